//! DANSE and rS-DANSE baselines.
//!
//! Each node broadcasts `z_k = F_kᴴ y_k` with `Q_f,k` channels and solves a
//! local MWF on `[y_k; z_{−k}]` targeting the speech image at its first
//! `max(Q_f,k, D)` channels. The first `Q_f,k` columns of the solved local
//! block become the node's next fusion matrix.

use crate::dmwf::{NetworkWideFilter, Solver};
use crate::error::{Error, Result};
use crate::filters::{centralized_mwf, gevd_mwf, SelectionMatrix};
use crate::numerics::{c64, reciprocal_condition, CMatrix, CVector, HermitianMatrix};
use crate::scenario::{NodeLayout, ObservabilityPattern, ScmSet};

/// Below this reciprocal condition number a local solve is reported as singular.
pub const RCOND_FLOOR: f64 = 1e-12;

/// Fused-channel count rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FusedRule {
    /// Every node sends `Qd` channels.
    Qd,
    /// Node `k` sends as many channels as speech sources it observes.
    QdK,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateOrder {
    /// One node per iteration, round-robin in ascending order.
    Sequential,
    /// All nodes per iteration, fusion matrices relaxed by `alpha`.
    Simultaneous { alpha: f64 },
}

impl UpdateOrder {
    pub fn simultaneous() -> Self {
        UpdateOrder::Simultaneous { alpha: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DanseState {
    layout: NodeLayout,
    desired: usize,
    pub rule: FusedRule,
    pub order: UpdateOrder,
    /// `Q_f,k`.
    pub qf: Vec<usize>,
    /// `F_k`, `M_k × Q_f,k`.
    pub fusion: Vec<CMatrix>,
    /// `W_kk`, `M_k × max(Q_f,k, D)`.
    pub w_kk: Vec<CMatrix>,
    /// `G_kq` for `q ≠ k` in ascending `q`, each `Q_f,q × max(Q_f,k, D)`.
    pub g: Vec<Vec<(usize, CMatrix)>>,
    pub iteration: usize,
}

fn head_identity(rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |r, c| if r == c { c64(1.0, 0.0) } else { c64(0.0, 0.0) })
}

impl DanseState {
    pub fn new(obs: &ObservabilityPattern, layout: &NodeLayout, desired: usize, rule: FusedRule, order: UpdateOrder) -> Result<Self> {
        let k_count = layout.nodes();
        let qd = obs.speech_sources();
        let qf: Vec<usize> = (0..k_count)
            .map(|k| match rule {
                FusedRule::Qd => qd,
                FusedRule::QdK => obs.observed_speech_count(k),
            })
            .collect();
        for k in 0..k_count {
            let targets = qf[k].max(desired);
            if targets > layout.dim(k) {
                return Err(Error::InvalidParameter(format!(
                    "node {k} has {} sensors for {targets} DANSE targets",
                    layout.dim(k)
                )));
            }
        }
        if let UpdateOrder::Simultaneous { alpha } = order {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::InvalidParameter(format!("relaxation {alpha} outside (0, 1]")));
            }
        }
        let fusion = (0..k_count).map(|k| head_identity(layout.dim(k), qf[k])).collect();
        let w_kk = (0..k_count).map(|k| head_identity(layout.dim(k), qf[k].max(desired))).collect();
        let g = (0..k_count)
            .map(|k| {
                (0..k_count)
                    .filter(|&q| q != k)
                    .map(|q| (q, CMatrix::zeros(qf[q], qf[k].max(desired))))
                    .collect()
            })
            .collect();
        Ok(Self {
            layout: layout.clone(),
            desired,
            rule,
            order,
            qf,
            fusion,
            w_kk,
            g,
            iteration: 0,
        })
    }

    pub fn nodes(&self) -> usize {
        self.layout.nodes()
    }

    pub fn layout(&self) -> &NodeLayout {
        &self.layout
    }

    fn targets(&self, k: usize) -> usize {
        self.qf[k].max(self.desired)
    }

    /// Length of node `k`'s observation vector.
    pub fn observation_dim(&self, k: usize) -> usize {
        self.layout.dim(k) + (0..self.nodes()).filter(|&q| q != k).map(|q| self.qf[q]).sum::<usize>()
    }

    /// `D_k` with `[y_k; z_{−k}] = D_kᴴ y` under the current fusion matrices.
    pub fn observation_map(&self, k: usize) -> CMatrix {
        let mut d = CMatrix::zeros(self.layout.total(), self.observation_dim(k));
        let mk = self.layout.dim(k);
        d.view_mut((self.layout.offset(k), 0), (mk, mk)).copy_from(&CMatrix::identity(mk, mk));
        let mut col = mk;
        for q in (0..self.nodes()).filter(|&q| q != k) {
            d.view_mut((self.layout.offset(q), col), (self.layout.dim(q), self.qf[q]))
                .copy_from(&self.fusion[q]);
            col += self.qf[q];
        }
        d
    }

    /// `z_k = F_kᴴ y_k`.
    pub fn fuse(&self, k: usize, y_k: &CVector) -> CVector {
        self.fusion[k].adjoint() * y_k
    }

    /// `[y_k; z_{−k}]` from per-node signals.
    pub fn observation(&self, k: usize, y: &[CVector]) -> CVector {
        let mut out = CVector::zeros(self.observation_dim(k));
        out.rows_mut(0, y[k].len()).copy_from(&y[k]);
        let mut off = y[k].len();
        for q in (0..self.nodes()).filter(|&q| q != k) {
            out.rows_mut(off, self.qf[q]).copy_from(&self.fuse(q, &y[q]));
            off += self.qf[q];
        }
        out
    }

    /// Solves node `k`'s local problem on the given observation statistics
    /// and stores its filter; returns the solved local block.
    pub fn solve_node(&mut self, k: usize, rtyy: &HermitianMatrix, rtnn: &HermitianMatrix, solver: Solver) -> Result<CMatrix> {
        let dim = self.observation_dim(k);
        if rtyy.dim() != dim || rtnn.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: rtyy.dim(),
                context: "DANSE observation statistics",
            });
        }
        let rcond = reciprocal_condition(rtyy);
        if !(rcond >= RCOND_FLOOR) {
            return Err(Error::SingularMatrix(format!(
                "DANSE node {k} observation SCM, reciprocal condition {rcond:.2e}"
            )));
        }
        let e = SelectionMatrix::first(dim, self.targets(k))?;
        let w = match solver {
            Solver::Mwf => centralized_mwf(rtyy, &rtyy.sub(rtnn)?, &e)?.w,
            Solver::Gevd(rank) => gevd_mwf(rtyy, rtnn, rank, &e)?.w,
        };
        let mk = self.layout.dim(k);
        self.w_kk[k] = w.rows(0, mk).into_owned();
        let mut off = mk;
        for (q, block) in self.g[k].iter_mut() {
            *block = w.rows(off, self.qf[*q]).into_owned();
            off += self.qf[*q];
        }
        Ok(self.w_kk[k].columns(0, self.qf[k]).into_owned())
    }

    /// Nodes updated by the next iteration.
    pub fn next_updating(&self) -> Vec<usize> {
        match self.order {
            UpdateOrder::Sequential => vec![self.iteration % self.nodes()],
            UpdateOrder::Simultaneous { .. } => (0..self.nodes()).collect(),
        }
    }

    /// Applies new fusion candidates `(node, W_kk[:, :Q_f,k])` per the update order.
    pub fn commit_fusion(&mut self, updates: Vec<(usize, CMatrix)>) {
        let alpha = match self.order {
            UpdateOrder::Sequential => 1.0,
            UpdateOrder::Simultaneous { alpha } => alpha,
        };
        for (k, f) in updates {
            self.fusion[k] = &self.fusion[k] * c64(1.0 - alpha, 0.0) + f * c64(alpha, 0.0);
        }
    }

    /// Hands the current local blocks of the next updating nodes over as
    /// fusion matrices and advances the iteration counter.
    pub fn commit_round(&mut self) {
        let updates = self
            .next_updating()
            .into_iter()
            .map(|k| (k, self.w_kk[k].columns(0, self.qf[k]).into_owned()))
            .collect();
        self.commit_fusion(updates);
        self.iteration += 1;
    }

    /// One batch iteration on network-wide statistics.
    pub fn iterate(&mut self, scms: &ScmSet, solver: Solver) -> Result<()> {
        for k in self.next_updating() {
            let d = self.observation_map(k);
            let rtyy = scms.ryy.project(&d)?;
            let rtnn = scms.rnnv.project(&d)?;
            self.solve_node(k, &rtyy, &rtnn, solver)?;
        }
        self.commit_round();
        Ok(())
    }

    /// `d̂_k` from the first `D` outputs of the local filter.
    pub fn estimate(&self, k: usize, y: &[CVector]) -> CVector {
        let mut w = CMatrix::zeros(self.observation_dim(k), self.desired);
        let mk = self.layout.dim(k);
        w.rows_mut(0, mk).copy_from(&self.w_kk[k].columns(0, self.desired));
        let mut off = mk;
        for (q, g) in &self.g[k] {
            w.rows_mut(off, self.qf[*q]).copy_from(&g.columns(0, self.desired));
            off += self.qf[*q];
        }
        w.adjoint() * self.observation(k, y)
    }
}

/// Functional form of [`DanseState::iterate`].
pub fn danse_iterate(mut state: DanseState, scms: &ScmSet, solver: Solver) -> Result<DanseState> {
    state.iterate(scms, solver)?;
    Ok(state)
}

/// `W_k = [F_1 G_k1; …; W_kk; …; F_K G_kK]`, first `D` columns.
pub fn danse_network_wide_filter(state: &DanseState, k: usize) -> NetworkWideFilter {
    let layout = &state.layout;
    let d = state.desired;
    let mut w = CMatrix::zeros(layout.total(), d);
    w.rows_mut(layout.offset(k), layout.dim(k))
        .copy_from(&state.w_kk[k].columns(0, d));
    for (q, g) in &state.g[k] {
        let block = &state.fusion[*q] * g.columns(0, d);
        w.rows_mut(layout.offset(*q), layout.dim(*q)).copy_from(&block);
    }
    NetworkWideFilter { node: k, w }
}
