//! Closed-form checks of the matrix-inversion-lemma view of dMWF optimality,
//! computed from steering matrices independently of the dMWF solver.

use crate::error::{Error, Result};
use crate::filters::{centralized_mwf, SelectionMatrix};
use crate::numerics::{
    c64, frobenius, hermitian_inverse, hermitian_solve, max_principal_angle, relative_error, relative_min_singular_value,
    CMatrix, HermitianMatrix, RANK_TOLERANCE,
};
use crate::scenario::{oracle_scms, NodeLayout, Scenario};

use super::{fused_dimensions, oracle_discovery, DmwfOptions, ProbePlan};

const IDENTITY_TOLERANCE: f64 = 1e-8;
const ANGLE_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixCheck {
    pub name: &'static str,
    /// Worst value over nodes.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl AppendixCheck {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppendixDiagnostics {
    /// Per-node inverses of the uncommon-part SCMs.
    pub gamma_blocks: Vec<HermitianMatrix>,
    /// `Γ`, block diagonal, `M × M`.
    pub gamma: CMatrix,
    /// `C̄`: steering with columns of single-node sources zeroed, `M × Q`.
    pub common_steering: CMatrix,
    /// `X = R_x⁻¹ + C̄ᴴ Γ C̄`, `Q × Q`.
    pub x_full: CMatrix,
    /// `M_k` with `Ŵ_kq = Γ_q C̄_q M_k` for `q ≠ k`, `Q × D`.
    pub m: Vec<CMatrix>,
    /// `M̆_q` with `P_q = Γ_q C̄ᵘ_q M̆_q`, `Q̄_q × Q̄_q` (empty when node `q` runs no discovery).
    pub m_breve: Vec<CMatrix>,
    /// `X_kq` with `R_{y_q r_q} = R_{y_q ȳ_q} X_kq`.
    pub x_link: Vec<CMatrix>,
    pub checks: Vec<AppendixCheck>,
}

impl AppendixDiagnostics {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn check(&self, name: &str) -> Option<&AppendixCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Relative residual of `Ryy⁻¹ = Γ − Γ C̄ X⁻¹ C̄ᴴ Γ` for a given `Γ`.
pub fn mil_residual(ryy_inv: &CMatrix, gamma: &CMatrix, cbar: &CMatrix, rx_inv: &CMatrix) -> Result<f64> {
    let gc = gamma * cbar;
    let x = HermitianMatrix::from_matrix(rx_inv + cbar.adjoint() * &gc)?;
    let mil = gamma - &gc * hermitian_solve(&x, &gc.adjoint())?;
    Ok(relative_error(&mil, ryy_inv))
}

fn least_squares(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-14).map_err(|e| Error::SingularMatrix(format!("least squares: {e}")))
}

/// Builds the appendix quantities for `s` and evaluates every identity.
pub fn verify_appendix_identities(s: &Scenario, opts: DmwfOptions) -> Result<AppendixDiagnostics> {
    let p = &s.params;
    if p.latent_powers().iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter("appendix identities need positive source powers".into()));
    }
    let layout: NodeLayout = s.layout();
    let k_count = p.nodes;
    let q_total = p.total_sources();
    let d = p.desired_channels;
    let dims = fused_dimensions(&s.obs);
    let scms = oracle_scms(s);
    let powers = p.latent_powers();

    let is_common = |j: usize| (0..k_count).filter(|&k| s.obs.observes(k, j)).count() >= 2;
    let node_steering: Vec<CMatrix> = (0..k_count).map(|k| s.node_steering(k)).collect();

    let mut cbar = CMatrix::zeros(layout.total(), q_total);
    let mut gamma = CMatrix::zeros(layout.total(), layout.total());
    let mut gamma_blocks = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let c = &node_steering[k];
        let mut uncommon = CMatrix::identity(c.nrows(), c.nrows()) * c64(p.selfnoise_power, 0.0);
        for j in 0..q_total {
            if is_common(j) {
                cbar.view_mut((layout.offset(k), j), (c.nrows(), 1)).copy_from(&c.column(j));
            } else {
                let col = c.column(j);
                uncommon += col.clone() * col.adjoint() * c64(powers[j], 0.0);
            }
        }
        let g = hermitian_inverse(&HermitianMatrix::from_matrix(uncommon)?)?;
        gamma
            .view_mut((layout.offset(k), layout.offset(k)), (c.nrows(), c.nrows()))
            .copy_from(g.as_matrix());
        gamma_blocks.push(g);
    }
    let rx_inv = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(q_total, powers.iter().map(|&v| c64(1.0 / v, 0.0))));
    let gc = &gamma * &cbar;
    let x_full = &rx_inv + cbar.adjoint() * &gc;
    let x_herm = HermitianMatrix::from_matrix(x_full.clone())?;

    let ryy_inv = hermitian_inverse(&scms.ryy)?;
    let mil = mil_residual(ryy_inv.as_matrix(), &gamma, &cbar, &rx_inv)?;

    let mut off_block = 0.0_f64;
    for k in 0..k_count {
        for q in (0..k_count).filter(|&q| q != k) {
            off_block = off_block.max(frobenius(&layout.block(&gamma, k, q)));
        }
    }

    // Centralized filter blocks from steering: Ŵ_kq = Γ_q C̄_q M_k.
    let sigma_s = CMatrix::from_fn(q_total, q_total, |i, j| {
        if i == j && i < p.speech_sources && is_common(i) {
            c64(powers[i], 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let mut m = Vec::with_capacity(k_count);
    let mut centralized_form = 0.0_f64;
    for k in 0..k_count {
        let ek = SelectionMatrix::node_reference(&layout, k, d)?;
        let rss_e = ek.select_columns(scms.rss.as_matrix())?;
        let head = node_steering[k].rows(0, d).adjoint();
        let mk = &sigma_s * head - hermitian_solve(&x_herm, &(gc.adjoint() * &rss_e))?;
        let w_hat = centralized_mwf(&scms.ryy, &scms.rss, &ek)?.w;
        for q in (0..k_count).filter(|&q| q != k) {
            let gq = &gamma_blocks[q];
            let cq = cbar.rows(layout.offset(q), layout.dim(q));
            let form = gq.as_matrix() * cq * &mk;
            let actual = w_hat.rows(layout.offset(q), layout.dim(q)).into_owned();
            let scale = frobenius(&w_hat);
            centralized_form = centralized_form.max(frobenius(&(form - actual)) / scale);
        }
        m.push(mk);
    }

    // Per-node discovery quantities.
    let plan = ProbePlan::new(&s.obs, layout.dims(), opts.width, opts.padding)?;
    let fusion = oracle_discovery(&plan, &scms.ryy, &layout)?;
    let mut m_breve = Vec::with_capacity(k_count);
    let mut x_link = Vec::with_capacity(k_count);
    let (mut link_resid, mut link_angle, mut fusion_form, mut fusion_angle, mut span_resid) =
        (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut link_rank_ok = true;
    for q in 0..k_count {
        let qbar = dims.qbar[q];
        let specs = plan.received_by(q);
        if specs.is_empty() {
            m_breve.push(CMatrix::zeros(0, 0));
            x_link.push(CMatrix::zeros(0, 0));
            continue;
        }
        let cq_set: Vec<usize> = dims.common[q].iter().copied().collect();
        let cu = node_steering[q].select_columns(&cq_set);
        let rx_bar = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(qbar, cq_set.iter().map(|&j| c64(powers[j], 0.0))));
        let mut n = CMatrix::zeros(qbar, qbar);
        for spec in specs {
            let ck = node_steering[spec.sender].select_columns(&cq_set);
            n += &rx_bar * ck.adjoint() * spec.matrix(layout.dim(spec.sender)).adjoint();
        }
        let cross = plan.oracle_cross(q, &scms.ryy, &layout);
        let ideal = (&cu * &rx_bar * cu.adjoint()).columns(0, qbar).into_owned();
        let x = least_squares(&ideal, &cross)?;
        link_resid = link_resid.max(relative_error(&(&ideal * &x), &cross));
        link_rank_ok &= relative_min_singular_value(&x) > RANK_TOLERANCE;
        link_angle = link_angle.max(max_principal_angle(&cross, &ideal)?);

        let g = gamma_blocks[q].as_matrix();
        let inner = cu.adjoint() * g * &cu;
        let xq = HermitianMatrix::from_matrix(rx_bar.clone().try_inverse().expect("positive diagonal") + &inner)?;
        let mb = (CMatrix::identity(qbar, qbar) - hermitian_solve(&xq, &inner)?) * &n;
        let form = g * &cu * &mb;
        fusion_form = fusion_form.max(relative_error(&fusion[q].p, &form));
        fusion_angle = fusion_angle.max(max_principal_angle(&fusion[q].p, &form)?);

        // Each centralized block for q lies in span(P_q).
        let basis = fusion[q].p.clone().qr().q();
        for k in (0..k_count).filter(|&k| k != q) {
            let ek = SelectionMatrix::node_reference(&layout, k, d)?;
            let w_hat = centralized_mwf(&scms.ryy, &scms.rss, &ek)?.w;
            let block = w_hat.rows(layout.offset(q), layout.dim(q)).into_owned();
            let proj = &basis * (basis.adjoint() * &block);
            let scale = frobenius(&w_hat).max(f64::MIN_POSITIVE);
            span_resid = span_resid.max(frobenius(&(block - proj)) / scale);
        }
        m_breve.push(mb);
        x_link.push(x);
    }

    let checks = vec![
        AppendixCheck::new("mil_inverse", mil, IDENTITY_TOLERANCE),
        AppendixCheck::new("linking_transform", link_resid, IDENTITY_TOLERANCE),
        AppendixCheck::new("linking_rank", if link_rank_ok { 0.0 } else { 1.0 }, 0.0),
        AppendixCheck::new("column_space_angle", link_angle, ANGLE_TOLERANCE),
        AppendixCheck::new("gamma_block_diagonal", off_block, 0.0),
        AppendixCheck::new("fusion_closed_form", fusion_form, IDENTITY_TOLERANCE),
        AppendixCheck::new("fusion_angle", fusion_angle, ANGLE_TOLERANCE),
        AppendixCheck::new("centralized_closed_form", centralized_form, IDENTITY_TOLERANCE),
        AppendixCheck::new("centralized_in_fusion_span", span_resid, IDENTITY_TOLERANCE),
    ];
    Ok(AppendixDiagnostics {
        gamma_blocks,
        gamma,
        common_steering: cbar,
        x_full,
        m,
        m_breve,
        x_link,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_scenario, ScenarioMode, ScenarioParams};

    fn diagnostics(mode: ScenarioMode, seed: u64) -> (Scenario, AppendixDiagnostics) {
        let s = generate_scenario(&ScenarioParams::uniform(6, 5, 2, 2, mode, seed)).unwrap();
        let d = verify_appendix_identities(&s, DmwfOptions::default()).unwrap();
        (s, d)
    }

    #[test]
    fn fods_scenario_passes_all_checks() {
        let (_, d) = diagnostics(ScenarioMode::Fods, 1);
        assert!(d.passed(), "{:?}", d.checks);
    }

    #[test]
    fn pos_scenarios_pass_all_checks() {
        for seed in 0..5 {
            let (_, d) = diagnostics(ScenarioMode::Pos, seed);
            assert!(d.passed(), "seed {seed}: {:?}", d.checks);
        }
    }

    #[test]
    fn full_shared_set_uses_all_observed_columns() {
        // Four sensors, three sources, everyone sees everything: no passthrough.
        let p = ScenarioParams::uniform(3, 4, 2, 1, ScenarioMode::Fods, 4);
        let mut s = generate_scenario(&p).unwrap();
        while !(0..3).all(|k| s.obs.observed(k).len() == 3) {
            let mut p2 = s.params.clone();
            p2.seed += 1;
            s = generate_scenario(&p2).unwrap();
        }
        let d = verify_appendix_identities(&s, DmwfOptions::default()).unwrap();
        let layout = s.layout();
        for k in 0..3 {
            let rows = d.common_steering.rows(layout.offset(k), 4).into_owned();
            assert_eq!(rows, s.node_steering(k));
            assert_eq!(d.x_link[k].shape(), (3, 3));
        }
        assert!(d.passed(), "{:?}", d.checks);
    }

    #[test]
    fn dropping_a_gamma_block_breaks_the_inverse_identity() {
        let (s, d) = diagnostics(ScenarioMode::Pos, 2);
        let layout = s.layout();
        let mut corrupted = d.gamma.clone();
        corrupted.view_mut((layout.offset(1), layout.offset(1)), (5, 5)).fill(c64(0.0, 0.0));
        let ryy_inv = hermitian_inverse(&oracle_scms(&s).ryy).unwrap();
        let powers = s.params.latent_powers();
        let rx_inv = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(4, powers.iter().map(|&v| c64(1.0 / v, 0.0))));
        let good = mil_residual(ryy_inv.as_matrix(), &d.gamma, &d.common_steering, &rx_inv).unwrap();
        let bad = mil_residual(ryy_inv.as_matrix(), &corrupted, &d.common_steering, &rx_inv).unwrap();
        assert!(good <= IDENTITY_TOLERANCE);
        assert!(bad > 1e-2, "corrupted residual {bad}");
    }
}
