//! Distributed MWF: discovery of fusion matrices from probe sums, and
//! per-node estimation on observation vectors built from fused signals.

mod appendix;

pub use appendix::{verify_appendix_identities, AppendixCheck, AppendixDiagnostics};

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::filters::{centralized_mwf, gevd_mwf, Filter, SelectionMatrix};
use crate::numerics::{c64, hermitian_solve, relative_min_singular_value, CMatrix, CVector, HermitianMatrix, RANK_TOLERANCE};
use crate::scenario::{complex_normal, NodeLayout, ObservabilityPattern, ScmSet};

/// Shared-source bookkeeping derived from an observability pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusedDimensions {
    /// `C_q`: sources seen by `q` and at least one other node.
    pub common: Vec<BTreeSet<usize>>,
    /// `Q̄_q = |C_q|`.
    pub qbar: Vec<usize>,
    /// `pair[k][q] = Q_kq = |O_k ∩ O_q|`; the diagonal holds `|O_k|`.
    pub pair: Vec<Vec<usize>>,
}

impl FusedDimensions {
    /// Channels node `q` transmits in the estimation step.
    pub fn fused_dim(&self, q: usize, sensors: usize) -> usize {
        self.qbar[q].min(sensors)
    }

    pub fn is_passthrough(&self, q: usize, sensors: usize) -> bool {
        self.qbar[q] > 0 && sensors <= self.qbar[q]
    }
}

pub fn fused_dimensions(obs: &ObservabilityPattern) -> FusedDimensions {
    let k_count = obs.nodes();
    let sets: Vec<BTreeSet<usize>> = (0..k_count).map(|k| obs.observed(k)).collect();
    let pair = (0..k_count)
        .map(|k| (0..k_count).map(|q| sets[k].intersection(&sets[q]).count()).collect())
        .collect();
    let common: Vec<BTreeSet<usize>> = (0..k_count)
        .map(|q| {
            (0..k_count)
                .filter(|&k| k != q)
                .flat_map(|k| sets[q].intersection(&sets[k]).copied().collect::<Vec<_>>())
                .collect()
        })
        .collect();
    let qbar = common.iter().map(BTreeSet::len).collect();
    FusedDimensions { common, qbar, pair }
}

/// Padding transform used to extend a reduced probe to `Q̄_q` channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    Zeros,
    Ones,
    /// Complex Gaussian entries drawn per (sender, receiver) pair.
    Random(u64),
}

impl Default for Padding {
    fn default() -> Self {
        Padding::Random(0)
    }
}

/// How many raw channels a sender puts in its probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbeWidth {
    /// `min(Q_kq, M_k)` channels plus padding.
    #[default]
    Reduced,
    /// `min(Q̄_q, M_k)` channels, padded only when `M_k < Q̄_q`.
    Full,
}

/// Probe sent from node `sender` to node `receiver` during discovery.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    pub sender: usize,
    pub receiver: usize,
    /// Raw channels taken from the front of `y_k`.
    pub channels: usize,
    /// Padded probe length `Q̄_q`.
    pub target_dim: usize,
    pub padding: Padding,
    /// `T_kq`, `(Q̄_q − channels) × channels`.
    pub transform: CMatrix,
}

impl ProbeSpec {
    pub fn new(sender: usize, receiver: usize, channels: usize, target_dim: usize, padding: Padding) -> Result<Self> {
        if channels > target_dim {
            return Err(Error::InvalidParameter(format!(
                "probe {sender}->{receiver} uses {channels} channels for target {target_dim}"
            )));
        }
        let rows = target_dim - channels;
        let transform = match padding {
            Padding::Zeros => CMatrix::zeros(rows, channels),
            Padding::Ones => CMatrix::from_element(rows, channels, c64(1.0, 0.0)),
            Padding::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((sender as u64) << 32) | receiver as u64);
                CMatrix::from_fn(rows, channels, |_, _| complex_normal(&mut rng, 1.0))
            }
        };
        Ok(Self {
            sender,
            receiver,
            channels,
            target_dim,
            padding,
            transform,
        })
    }

    /// `S_kq = [I; T_kq] [I | 0]`, `Q̄_q × M_k`.
    pub fn matrix(&self, sender_dim: usize) -> CMatrix {
        let mut s = CMatrix::zeros(self.target_dim, sender_dim);
        for i in 0..self.channels {
            s[(i, i)] = c64(1.0, 0.0);
        }
        s.view_mut((self.channels, 0), (self.target_dim - self.channels, self.channels))
            .copy_from(&self.transform);
        s
    }
}

pub fn build_probe(y_k: &CVector, spec: &ProbeSpec) -> Result<CVector> {
    if y_k.len() < spec.channels {
        return Err(Error::DimensionMismatch {
            expected: spec.channels,
            actual: y_k.len(),
            context: "probe source channels",
        });
    }
    let head = y_k.rows(0, spec.channels);
    let mut out = CVector::zeros(spec.target_dim);
    out.rows_mut(0, spec.channels).copy_from(&head);
    if spec.target_dim > spec.channels {
        out.rows_mut(spec.channels, spec.target_dim - spec.channels)
            .copy_from(&(&spec.transform * head));
    }
    Ok(out)
}

/// Every probe of the network, grouped by receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbePlan {
    pub dims: FusedDimensions,
    sensors: Vec<usize>,
    /// `probes[q]`: probes received by `q`, in ascending sender order.
    probes: Vec<Vec<ProbeSpec>>,
}

impl ProbePlan {
    pub fn new(obs: &ObservabilityPattern, sensors: &[usize], width: ProbeWidth, padding: Padding) -> Result<Self> {
        check_dim(obs.nodes(), sensors.len(), "probe plan sensor counts")?;
        let dims = fused_dimensions(obs);
        let k_count = obs.nodes();
        let mut probes = vec![Vec::new(); k_count];
        for q in 0..k_count {
            if dims.qbar[q] == 0 || dims.is_passthrough(q, sensors[q]) {
                continue;
            }
            for k in (0..k_count).filter(|&k| k != q) {
                let wanted = match width {
                    ProbeWidth::Reduced => dims.pair[k][q],
                    ProbeWidth::Full => dims.qbar[q],
                };
                let channels = wanted.min(sensors[k]).min(dims.qbar[q]);
                probes[q].push(ProbeSpec::new(k, q, channels, dims.qbar[q], padding)?);
            }
        }
        Ok(Self {
            dims,
            sensors: sensors.to_vec(),
            probes,
        })
    }

    pub fn received_by(&self, q: usize) -> &[ProbeSpec] {
        &self.probes[q]
    }

    pub fn nodes(&self) -> usize {
        self.sensors.len()
    }

    pub fn sensors(&self) -> &[usize] {
        &self.sensors
    }

    /// Raw channels on the air during one discovery frame (padding is
    /// reconstructed by the receiver from the shared transform).
    pub fn discovery_channels(&self) -> usize {
        self.probes.iter().flatten().map(|p| p.channels).sum()
    }

    /// Fused channels on the air during one estimation frame.
    pub fn estimation_channels(&self) -> usize {
        let k_count = self.nodes();
        (0..k_count)
            .map(|q| self.dims.fused_dim(q, self.sensors[q]) * (k_count - 1))
            .sum()
    }

    /// Probe sum `r_q` for the current frame.
    pub fn probe_sum(&self, q: usize, y: &[CVector]) -> Result<CVector> {
        let mut r = CVector::zeros(self.dims.qbar[q]);
        for spec in &self.probes[q] {
            r += build_probe(&y[spec.sender], spec)?;
        }
        Ok(r)
    }

    /// `R_{y_q r_q} = Σ_k R_{y_q y_k} S_kqᴴ` from network-wide statistics.
    pub fn oracle_cross(&self, q: usize, ryy: &HermitianMatrix, layout: &NodeLayout) -> CMatrix {
        let mut cross = CMatrix::zeros(self.sensors[q], self.dims.qbar[q]);
        for spec in &self.probes[q] {
            let k = spec.sender;
            cross += layout.block(ryy.as_matrix(), q, k) * spec.matrix(self.sensors[k]).adjoint();
        }
        cross
    }
}

/// Node `q`'s fusion matrix `P_q` (identity in passthrough).
#[derive(Debug, Clone, PartialEq)]
pub struct FusionState {
    pub node: usize,
    pub qbar: usize,
    pub p: CMatrix,
    pub passthrough: bool,
}

impl FusionState {
    pub fn passthrough(node: usize, sensors: usize, qbar: usize) -> Self {
        Self {
            node,
            qbar,
            p: CMatrix::identity(sensors, sensors),
            passthrough: true,
        }
    }

    pub fn silent(node: usize, sensors: usize) -> Self {
        Self {
            node,
            qbar: 0,
            p: CMatrix::zeros(sensors, 0),
            passthrough: false,
        }
    }

    pub fn fused_dim(&self) -> usize {
        self.p.ncols()
    }

    /// `z_q = P_qᴴ y_q`.
    pub fn fuse(&self, y_q: &CVector) -> Result<CVector> {
        check_dim(self.p.nrows(), y_q.len(), "fusion input")?;
        if self.passthrough {
            return Ok(y_q.clone());
        }
        Ok(self.p.adjoint() * y_q)
    }
}

/// `P_q = R_qq⁻¹ R_{y_q r_q}` with a full-column-rank check.
pub fn fusion_from_statistics(q: usize, rqq: &HermitianMatrix, cross: &CMatrix, qbar: usize) -> Result<FusionState> {
    let m_q = rqq.dim();
    if qbar == 0 {
        return Ok(FusionState::silent(q, m_q));
    }
    if m_q <= qbar {
        return Ok(FusionState::passthrough(q, m_q, qbar));
    }
    check_dim(m_q, cross.nrows(), "discovery cross-covariance rows")?;
    check_dim(qbar, cross.ncols(), "discovery cross-covariance columns")?;
    let p = hermitian_solve(rqq, cross)?;
    let rel = relative_min_singular_value(&p);
    if !(rel > RANK_TOLERANCE) {
        return Err(Error::RankDeficient(format!(
            "fusion matrix of node {q}: σmin/σmax = {rel:.3e}"
        )));
    }
    Ok(FusionState {
        node: q,
        qbar,
        p,
        passthrough: false,
    })
}

/// Discovery for every node from oracle network statistics.
pub fn oracle_discovery(plan: &ProbePlan, ryy: &HermitianMatrix, layout: &NodeLayout) -> Result<Vec<FusionState>> {
    (0..plan.nodes())
        .map(|q| {
            let rqq = ryy.block(layout.offset(q), layout.dim(q));
            let cross = plan.oracle_cross(q, ryy, layout);
            fusion_from_statistics(q, &rqq, &cross, plan.dims.qbar[q])
        })
        .collect()
}

/// Running estimates of `R_qq` and `R_{y_q r_q}`.
///
/// Each statistic is a cumulative mean until its sample count reaches
/// `1/(1−β)`, then an exponential average with factor `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryStats {
    local: CMatrix,
    cross: CMatrix,
    local_frames: usize,
    cross_frames: usize,
    local_beta: f64,
    cross_beta: f64,
}

impl DiscoveryStats {
    /// Plain sample averaging.
    pub fn cumulative(m_q: usize, qbar: usize) -> Self {
        Self::exponential(m_q, qbar, 1.0, 1.0)
    }

    pub fn exponential(m_q: usize, qbar: usize, local_beta: f64, cross_beta: f64) -> Self {
        Self {
            local: CMatrix::zeros(m_q, m_q),
            cross: CMatrix::zeros(m_q, qbar),
            local_frames: 0,
            cross_frames: 0,
            local_beta,
            cross_beta,
        }
    }

    /// Seeds both statistics and marks them as fully accumulated.
    pub fn primed(&mut self, rqq: &HermitianMatrix, cross: &CMatrix) {
        self.local = rqq.as_matrix().clone();
        self.cross = cross.clone();
        self.local_frames = usize::MAX / 2;
        self.cross_frames = usize::MAX / 2;
    }

    fn weight(frames: usize, beta: f64) -> f64 {
        let n = frames as f64;
        ((n - 1.0) / n).min(beta)
    }

    pub fn accumulate_local(&mut self, y_q: &CVector) -> Result<()> {
        check_dim(self.local.nrows(), y_q.len(), "discovery local frame")?;
        self.local_frames = self.local_frames.saturating_add(1);
        let w = Self::weight(self.local_frames, self.local_beta);
        self.local *= c64(w, 0.0);
        self.local.ger(c64(1.0 - w, 0.0), y_q, &y_q.conjugate(), c64(1.0, 0.0));
        Ok(())
    }

    pub fn accumulate_cross(&mut self, y_q: &CVector, r_q: &CVector) -> Result<()> {
        check_dim(self.cross.nrows(), y_q.len(), "discovery cross frame")?;
        check_dim(self.cross.ncols(), r_q.len(), "probe sum")?;
        self.cross_frames = self.cross_frames.saturating_add(1);
        let w = Self::weight(self.cross_frames, self.cross_beta);
        self.cross *= c64(w, 0.0);
        self.cross.ger(c64(1.0 - w, 0.0), y_q, &r_q.conjugate(), c64(1.0, 0.0));
        Ok(())
    }

    /// Both statistics from one frame.
    pub fn accumulate(&mut self, y_q: &CVector, r_q: &CVector) -> Result<()> {
        self.accumulate_local(y_q)?;
        self.accumulate_cross(y_q, r_q)
    }

    pub fn local_frames(&self) -> usize {
        self.local_frames
    }

    pub fn cross_frames(&self) -> usize {
        self.cross_frames
    }

    pub fn local(&self) -> HermitianMatrix {
        HermitianMatrix::from_matrix(self.local.clone()).expect("square by construction")
    }

    pub fn cross(&self) -> &CMatrix {
        &self.cross
    }
}

/// Solves discovery at node `q` from accumulated statistics.
pub fn discovery_update(q: usize, stats: &DiscoveryStats) -> Result<FusionState> {
    let m_q = stats.local.nrows();
    let qbar = stats.cross.ncols();
    if qbar > 0 && m_q > qbar {
        let need = qbar + m_q;
        if stats.local_frames < need || stats.cross_frames < need {
            return Err(Error::InsufficientData(format!(
                "node {q} discovery has {}/{} frames, needs {need}",
                stats.local_frames, stats.cross_frames
            )));
        }
    }
    fusion_from_statistics(q, &stats.local(), &stats.cross, qbar)
}

/// `T = (PᴴR_qqP)⁻¹ PᴴR_qqP'`, the LMMSE map from the old fused signal
/// `Pᴴy_q` to the new one `P'ᴴy_q`; exact when both span the same space.
/// Receivers apply it to re-express statistics gathered under the old
/// fusion matrix. `None` when the fused dimension changes or either side
/// is passthrough.
pub fn rebasing_transform(old: &FusionState, new: &FusionState, rqq: &HermitianMatrix) -> Option<CMatrix> {
    if old.passthrough || new.passthrough || old.p.shape() != new.p.shape() || new.p.ncols() == 0 {
        return None;
    }
    let gram = rqq.project(&old.p).ok()?;
    let rhs = old.p.adjoint() * rqq.as_matrix() * &new.p;
    hermitian_solve(&gram, &rhs).ok()
}

/// Block order of node `k`'s observation vector: local first, then the other
/// nodes ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationLayout {
    pub node: usize,
    /// `(source node, block length)` pairs.
    pub blocks: Vec<(usize, usize)>,
}

impl ObservationLayout {
    pub fn new(k: usize, local_dim: usize, fused_dims: &[usize]) -> Self {
        let mut blocks = vec![(k, local_dim)];
        blocks.extend(
            fused_dims
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != k)
                .map(|(q, &d)| (q, d)),
        );
        Self { node: k, blocks }
    }

    pub fn from_fusion(k: usize, local_dim: usize, fusion: &[FusionState]) -> Self {
        let dims: Vec<usize> = fusion.iter().map(FusionState::fused_dim).collect();
        Self::new(k, local_dim, &dims)
    }

    pub fn total(&self) -> usize {
        self.blocks.iter().map(|b| b.1).sum()
    }

    pub fn local_dim(&self) -> usize {
        self.blocks[0].1
    }
}

/// `ỹ_k = [y_k; z_q …]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector {
    pub node: usize,
    pub local: CVector,
    pub fused: Vec<(usize, CVector)>,
}

impl ObservationVector {
    pub fn dim(&self) -> usize {
        self.local.len() + self.fused.iter().map(|f| f.1.len()).sum::<usize>()
    }

    pub fn stacked(&self) -> CVector {
        let parts = std::iter::once(&self.local).chain(self.fused.iter().map(|f| &f.1));
        let mut out = CVector::zeros(self.dim());
        let mut off = 0;
        for p in parts {
            out.rows_mut(off, p.len()).copy_from(p);
            off += p.len();
        }
        out
    }
}

/// Assembles `ỹ_k` from the local signal and the fused signals of all other nodes.
pub fn build_observation(k: usize, nodes: usize, y_k: &CVector, fused: &BTreeMap<usize, CVector>) -> Result<ObservationVector> {
    let mut blocks = Vec::with_capacity(nodes.saturating_sub(1));
    for q in (0..nodes).filter(|&q| q != k) {
        let z = fused.get(&q).ok_or(Error::MissingBlock(q))?;
        blocks.push((q, z.clone()));
    }
    Ok(ObservationVector {
        node: k,
        local: y_k.clone(),
        fused: blocks,
    })
}

/// `D_k` (`M × M̃_k`) with `ỹ_k = D_kᴴ y`.
pub fn observation_map(k: usize, fusion: &[FusionState], layout: &NodeLayout) -> CMatrix {
    let obs = ObservationLayout::from_fusion(k, layout.dim(k), fusion);
    let mut d = CMatrix::zeros(layout.total(), obs.total());
    let mut col = 0;
    for &(q, len) in &obs.blocks {
        let block = if q == k {
            CMatrix::identity(layout.dim(k), layout.dim(k))
        } else {
            fusion[q].p.clone()
        };
        d.view_mut((layout.offset(q), col), (layout.dim(q), len)).copy_from(&block);
        col += len;
    }
    d
}

/// Partitioned estimation filter `W̃_k = [W_kk; G_kq …]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationFilter {
    pub node: usize,
    pub w_kk: CMatrix,
    pub g: Vec<(usize, CMatrix)>,
}

impl EstimationFilter {
    pub fn from_stacked(w: &CMatrix, layout: &ObservationLayout) -> Result<Self> {
        check_dim(layout.total(), w.nrows(), "estimation filter rows")?;
        let mut off = 0;
        let mut w_kk = CMatrix::zeros(0, w.ncols());
        let mut g = Vec::new();
        for &(q, len) in &layout.blocks {
            let block = w.rows(off, len).into_owned();
            if q == layout.node {
                w_kk = block;
            } else {
                g.push((q, block));
            }
            off += len;
        }
        Ok(Self {
            node: layout.node,
            w_kk,
            g,
        })
    }

    pub fn zeros(layout: &ObservationLayout, d: usize) -> Self {
        Self::from_stacked(&CMatrix::zeros(layout.total(), d), layout).expect("layout-sized")
    }

    pub fn outputs(&self) -> usize {
        self.w_kk.ncols()
    }

    pub fn stacked(&self) -> CMatrix {
        let rows = self.w_kk.nrows() + self.g.iter().map(|b| b.1.nrows()).sum::<usize>();
        let mut w = CMatrix::zeros(rows, self.outputs());
        let mut off = 0;
        for b in std::iter::once(&self.w_kk).chain(self.g.iter().map(|b| &b.1)) {
            w.rows_mut(off, b.nrows()).copy_from(b);
            off += b.nrows();
        }
        w
    }
}

/// Which LMMSE variant the estimation step solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    #[default]
    Mwf,
    /// GEVD-MWF with the given rank.
    Gevd(usize),
}

/// Solves the estimation step on observation-vector statistics.
pub fn estimation_filter(
    rtyy: &HermitianMatrix,
    rtnn: &HermitianMatrix,
    ek: &SelectionMatrix,
    solver: Solver,
    layout: &ObservationLayout,
) -> Result<EstimationFilter> {
    let f: Filter = match solver {
        Solver::Mwf => centralized_mwf(rtyy, &rtyy.sub(rtnn)?, ek)?,
        Solver::Gevd(rank) => gevd_mwf(rtyy, rtnn, rank, ek)?,
    };
    EstimationFilter::from_stacked(&f.w, layout)
}

/// `d̂_k = W_kkᴴ y_k + Σ_q G_kqᴴ z_q`.
pub fn estimate_desired(f: &EstimationFilter, obs: &ObservationVector) -> Result<CVector> {
    check_dim(f.w_kk.nrows(), obs.local.len(), "local estimation block")?;
    check_dim(f.g.len(), obs.fused.len(), "fused block count")?;
    let mut d = f.w_kk.adjoint() * &obs.local;
    for ((q, g), (qz, z)) in f.g.iter().zip(&obs.fused) {
        if q != qz {
            return Err(Error::MissingBlock(*q));
        }
        check_dim(g.nrows(), z.len(), "fused estimation block")?;
        d += g.adjoint() * z;
    }
    Ok(d)
}

/// Network-wide equivalent `W_k` of an estimation filter.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkWideFilter {
    pub node: usize,
    pub w: CMatrix,
}

/// `W_k = [P_1 G_k1; …; W_kk; …; P_K G_kK]`.
pub fn network_wide_filter(f: &EstimationFilter, fusion: &[FusionState], layout: &NodeLayout) -> Result<NetworkWideFilter> {
    let k = f.node;
    check_dim(layout.dim(k), f.w_kk.nrows(), "local filter block")?;
    let mut w = CMatrix::zeros(layout.total(), f.outputs());
    w.rows_mut(layout.offset(k), layout.dim(k)).copy_from(&f.w_kk);
    for (q, g) in &f.g {
        let p = &fusion[*q].p;
        check_dim(p.ncols(), g.nrows(), "fused filter block")?;
        check_dim(layout.dim(*q), p.nrows(), "fusion matrix rows")?;
        w.rows_mut(layout.offset(*q), layout.dim(*q)).copy_from(&(p * g));
    }
    Ok(NetworkWideFilter { node: k, w })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DmwfOptions {
    pub width: ProbeWidth,
    pub padding: Padding,
    pub solver: Solver,
}

/// Full dMWF solution for one set of oracle statistics.
#[derive(Debug, Clone)]
pub struct DmwfSolution {
    pub plan: ProbePlan,
    pub fusion: Vec<FusionState>,
    pub filters: Vec<EstimationFilter>,
    pub network: Vec<NetworkWideFilter>,
}

impl DmwfSolution {
    /// `d̂_k` for a frame of per-node signals.
    pub fn estimate(&self, k: usize, y: &[CVector]) -> Result<CVector> {
        let mut fused = BTreeMap::new();
        for (q, yq) in y.iter().enumerate() {
            if q != k {
                fused.insert(q, self.fusion[q].fuse(yq)?);
            }
        }
        let obs = build_observation(k, y.len(), &y[k], &fused)?;
        estimate_desired(&self.filters[k], &obs)
    }
}

/// Estimation-step filters for every node given fusion matrices and network SCMs.
pub fn estimation_filters(
    fusion: &[FusionState],
    scms: &ScmSet,
    layout: &NodeLayout,
    desired: usize,
    solver: Solver,
) -> Result<Vec<EstimationFilter>> {
    (0..layout.nodes())
        .map(|k| {
            let d_k = observation_map(k, fusion, layout);
            let obs = ObservationLayout::from_fusion(k, layout.dim(k), fusion);
            let rtyy = scms.ryy.project(&d_k)?;
            let rtnn = scms.rnnv.project(&d_k)?;
            let ek = SelectionMatrix::first(obs.total(), desired)?;
            estimation_filter(&rtyy, &rtnn, &ek, solver, &obs)
        })
        .collect()
}

/// Discovery and estimation from oracle network statistics.
pub fn solve_oracle(
    obs: &ObservabilityPattern,
    scms: &ScmSet,
    layout: &NodeLayout,
    desired: usize,
    opts: DmwfOptions,
) -> Result<DmwfSolution> {
    let plan = ProbePlan::new(obs, layout.dims(), opts.width, opts.padding)?;
    let fusion = oracle_discovery(&plan, &scms.ryy, layout)?;
    let filters = estimation_filters(&fusion, scms, layout, desired, opts.solver)?;
    let network = filters
        .iter()
        .map(|f| network_wide_filter(f, &fusion, layout))
        .collect::<Result<Vec<_>>>()?;
    Ok(DmwfSolution {
        plan,
        fusion,
        filters,
        network,
    })
}
