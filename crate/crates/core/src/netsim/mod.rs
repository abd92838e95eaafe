//! Experiment orchestration: batch oracle runs, online simulation, channel
//! accounting and compression factors.

mod online;

pub use online::{
    online_trial, run_online, threshold_observability, ObservabilityMode, OnlineConfig, OnlineTrial,
};

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;

use crate::danse::{danse_network_wide_filter, DanseState, FusedRule, UpdateOrder};
use crate::dmwf::{build_probe, fused_dimensions, solve_oracle, DmwfOptions, Padding, ProbePlan, ProbeWidth, Solver};
use crate::error::{Error, Result};
use crate::filters::{centralized_mwf, SelectionMatrix};
use crate::metrics::mse_w;
use crate::numerics::{hermitian_solve, CMatrix};
use crate::scenario::{
    generate_scenario, oracle_scms, synthesize_frames, Duty, NodeLayout, ObservabilityPattern, Scenario, ScenarioParams,
    ScmSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Centralized,
    Local,
    Dmwf,
    DanseQd,
    DanseQdk,
    RsDanseQd,
    RsDanseQdk,
    /// First `D` raw channels of each node; online only.
    Unprocessed,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Centralized,
        Algorithm::Local,
        Algorithm::Dmwf,
        Algorithm::DanseQd,
        Algorithm::DanseQdk,
        Algorithm::RsDanseQd,
        Algorithm::RsDanseQdk,
        Algorithm::Unprocessed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Centralized => "centralized",
            Algorithm::Local => "local",
            Algorithm::Dmwf => "dmwf",
            Algorithm::DanseQd => "danse_qd",
            Algorithm::DanseQdk => "danse_qdk",
            Algorithm::RsDanseQd => "rsdanse_qd",
            Algorithm::RsDanseQdk => "rsdanse_qdk",
            Algorithm::Unprocessed => "unprocessed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Self::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown algorithm `{s}`")))
    }

    /// DANSE flavour, if any.
    pub fn danse(&self) -> Option<(FusedRule, UpdateOrder)> {
        match self {
            Algorithm::DanseQd => Some((FusedRule::Qd, UpdateOrder::Sequential)),
            Algorithm::DanseQdk => Some((FusedRule::QdK, UpdateOrder::Sequential)),
            Algorithm::RsDanseQd => Some((FusedRule::Qd, UpdateOrder::simultaneous())),
            Algorithm::RsDanseQdk => Some((FusedRule::QdK, UpdateOrder::simultaneous())),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    BatchOracle,
    Online,
}

impl RunMode {
    pub fn name(&self) -> &'static str {
        match self {
            RunMode::BatchOracle => "batch",
            RunMode::Online => "online",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "batch" | "batch_oracle" => Ok(RunMode::BatchOracle),
            "online" => Ok(RunMode::Online),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioParams,
    pub algorithms: Vec<Algorithm>,
    pub mode: RunMode,
    /// Discovery period `N_ds` in frames.
    pub n_ds: usize,
    /// DANSE iterations in batch mode.
    pub iterations: usize,
    pub trials: usize,
    pub seed: u64,
    /// GEVD-MWF rank; plain MWF when `None`.
    pub gevd_rank: Option<usize>,
    pub probe_width: ProbeWidth,
    pub padding: Padding,
    /// rS-DANSE relaxation.
    pub relaxation: f64,
    pub online: OnlineConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioParams::default(),
            algorithms: vec![
                Algorithm::Dmwf,
                Algorithm::DanseQd,
                Algorithm::DanseQdk,
                Algorithm::RsDanseQd,
                Algorithm::RsDanseQdk,
            ],
            mode: RunMode::BatchOracle,
            n_ds: 8,
            iterations: 30,
            trials: 10,
            seed: 0,
            gevd_rank: None,
            probe_width: ProbeWidth::Reduced,
            padding: Padding::default(),
            relaxation: 0.5,
            online: OnlineConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n_ds == 0 {
            return Err(Error::InvalidParameter("discovery period must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("at least one trial is required".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("at least one iteration is required".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("no algorithms selected".into()));
        }
        if self.gevd_rank == Some(0) {
            return Err(Error::InvalidParameter("GEVD rank must be at least 1".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::InvalidParameter(format!("relaxation {} outside (0, 1]", self.relaxation)));
        }
        self.online.validate()
    }

    pub fn solver(&self) -> Solver {
        self.gevd_rank.map_or(Solver::Mwf, Solver::Gevd)
    }

    pub fn dmwf_options(&self, trial_seed: u64) -> DmwfOptions {
        let padding = match self.padding {
            Padding::Random(s) => Padding::Random(s ^ trial_seed),
            other => other,
        };
        DmwfOptions {
            width: self.probe_width,
            padding,
            solver: self.solver(),
        }
    }

    /// Scenario seed of trial `t`.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }

    pub fn trial_params(&self, trial: usize) -> ScenarioParams {
        ScenarioParams {
            seed: self.trial_seed(trial),
            ..self.scenario.clone()
        }
    }

    fn order(&self, order: UpdateOrder) -> UpdateOrder {
        match order {
            UpdateOrder::Simultaneous { .. } => UpdateOrder::Simultaneous { alpha: self.relaxation },
            o => o,
        }
    }
}

/// Result of one algorithm in one trial.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<T> {
    Completed(T),
    /// Numerical failure at `index` (iteration or frame).
    Failed { index: usize, message: String },
}

impl<T> Outcome<T> {
    pub fn completed(&self) -> Option<&T> {
        match self {
            Outcome::Completed(t) => Some(t),
            Outcome::Failed { .. } => None,
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, Outcome::Failed { .. })
    }
}

/// `(iteration, MSE_W)` pairs, iterations `1..=N`.
pub type MseSeries = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchTrial {
    pub trial: usize,
    pub seed: u64,
    pub results: BTreeMap<Algorithm, Outcome<MseSeries>>,
}

impl BatchTrial {
    pub fn all_failed(&self) -> bool {
        self.results.values().all(Outcome::is_failed)
    }
}

fn is_numerical(e: &Error) -> bool {
    matches!(e, Error::SingularMatrix(_) | Error::RankDeficient(_))
}

fn centralized_filters(s: &Scenario, scms: &ScmSet) -> Result<Vec<CMatrix>> {
    let layout = s.layout();
    (0..s.nodes())
        .map(|k| {
            let e = SelectionMatrix::node_reference(&layout, k, s.params.desired_channels)?;
            Ok(centralized_mwf(&scms.ryy, &scms.rss, &e)?.w)
        })
        .collect()
}

/// Network-wide filters of per-node local MWFs (zero outside the node's rows).
pub fn local_filters(scms: &ScmSet, layout: &NodeLayout, desired: usize) -> Result<Vec<CMatrix>> {
    (0..layout.nodes())
        .map(|k| {
            let r = layout.range(k);
            let ryy = scms.ryy.block(r.start, r.len());
            let rhs = layout.block(scms.rss.as_matrix(), k, k).columns(0, desired).into_owned();
            let w = hermitian_solve(&ryy, &rhs)?;
            let mut full = CMatrix::zeros(layout.total(), desired);
            full.rows_mut(r.start, r.len()).copy_from(&w);
            Ok(full)
        })
        .collect()
}

fn constant_series(value: f64, iterations: usize) -> MseSeries {
    (1..=iterations).map(|i| (i, value)).collect()
}

/// One batch trial: oracle SCMs, every selected algorithm, MSE_W per iteration.
pub fn batch_trial(cfg: &ExperimentConfig, trial: usize) -> Result<BatchTrial> {
    let params = cfg.trial_params(trial);
    let s = generate_scenario(&params)?;
    let scms = oracle_scms(&s);
    let layout = s.layout();
    let d = params.desired_channels;
    let reference = centralized_filters(&s, &scms)?;
    let mut results = BTreeMap::new();
    for &algo in &cfg.algorithms {
        let outcome = match algo {
            Algorithm::Centralized => Outcome::Completed(constant_series(0.0, cfg.iterations)),
            Algorithm::Local => {
                let w = local_filters(&scms, &layout, d)?;
                Outcome::Completed(constant_series(mse_w(&w, &reference)?, cfg.iterations))
            }
            Algorithm::Dmwf => match solve_oracle(&s.obs, &scms, &layout, d, cfg.dmwf_options(params.seed)) {
                Ok(sol) => {
                    let w: Vec<CMatrix> = sol.network.into_iter().map(|n| n.w).collect();
                    Outcome::Completed(constant_series(mse_w(&w, &reference)?, cfg.iterations))
                }
                Err(e) if is_numerical(&e) => Outcome::Failed {
                    index: 0,
                    message: e.to_string(),
                },
                Err(e) => return Err(e),
            },
            Algorithm::Unprocessed => {
                return Err(Error::InvalidParameter("the unprocessed baseline is only defined online".into()))
            }
            danse => {
                let (rule, order) = danse.danse().expect("DANSE variant");
                run_danse_batch(&s, &scms, &reference, rule, cfg.order(order), cfg)?
            }
        };
        results.insert(algo, outcome);
    }
    Ok(BatchTrial {
        trial,
        seed: params.seed,
        results,
    })
}

fn run_danse_batch(
    s: &Scenario,
    scms: &ScmSet,
    reference: &[CMatrix],
    rule: FusedRule,
    order: UpdateOrder,
    cfg: &ExperimentConfig,
) -> Result<Outcome<MseSeries>> {
    let mut st = DanseState::new(&s.obs, &s.layout(), s.params.desired_channels, rule, order)?;
    let mut series = Vec::with_capacity(cfg.iterations);
    for i in 1..=cfg.iterations {
        if let Err(e) = st.iterate(scms, cfg.solver()) {
            if is_numerical(&e) {
                return Ok(Outcome::Failed {
                    index: i,
                    message: e.to_string(),
                });
            }
            return Err(e);
        }
        let w: Vec<CMatrix> = (0..s.nodes()).map(|k| danse_network_wide_filter(&st, k).w).collect();
        series.push((i, mse_w(&w, reference)?));
    }
    Ok(Outcome::Completed(series))
}

/// All batch trials in order.
pub fn run_batch_oracle(cfg: &ExperimentConfig) -> Result<Vec<BatchTrial>> {
    cfg.validate()?;
    (0..cfg.trials).map(|t| batch_trial(cfg, t)).collect()
}

/// Trial-averaged MSE_W per iteration over the trials where `algo` completed.
pub fn average_mse(trials: &[BatchTrial], algo: Algorithm) -> MseSeries {
    let done: Vec<&MseSeries> = trials
        .iter()
        .filter_map(|t| t.results.get(&algo).and_then(Outcome::completed))
        .collect();
    let Some(first) = done.first() else {
        return Vec::new();
    };
    first
        .iter()
        .enumerate()
        .map(|(i, &(it, _))| (it, done.iter().map(|s| s[i].1).sum::<f64>() / done.len() as f64))
        .collect()
}

/// Channels transmitted on one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameChannels {
    pub frame: usize,
    pub discovery: bool,
    /// Raw probe channels sent (discovery frames only).
    pub probe: usize,
    /// Fused channels sent.
    pub fused: usize,
}

/// Per-frame transmitted-channel counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BandwidthLedger {
    pub frames: Vec<FrameChannels>,
}

impl BandwidthLedger {
    pub fn record(&mut self, entry: FrameChannels) {
        self.frames.push(entry);
    }

    pub fn total_probe(&self) -> usize {
        self.frames.iter().map(|f| f.probe).sum()
    }

    pub fn total_fused(&self) -> usize {
        self.frames.iter().map(|f| f.fused).sum()
    }

    pub fn discovery_frames(&self) -> usize {
        self.frames.iter().filter(|f| f.discovery).count()
    }
}

/// Closed-form channel counts of dMWF.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelForms {
    /// `N_est`: fused channels per frame.
    pub n_est: usize,
    /// `N_dis`: probe channels per discovery frame.
    pub n_dis: usize,
    /// `M̄ = M (K − 1)`: channels of raw all-to-all exchange.
    pub m_bar: usize,
    /// `N_D = K (K − 1) Qd`.
    pub n_danse: usize,
}

/// Probes skip silent and passthrough receivers; a reduced probe carries
/// `min(Q_kq, M_k)` raw channels, a full one `min(Q̄_q, M_k)`.
pub fn channel_forms(obs: &ObservabilityPattern, sensors: &[usize], width: ProbeWidth) -> ChannelForms {
    let dims = fused_dimensions(obs);
    let k_count = sensors.len();
    let mut n_est = 0;
    let mut n_dis = 0;
    for q in 0..k_count {
        n_est += dims.fused_dim(q, sensors[q]) * (k_count - 1);
        if dims.qbar[q] > 0 && !dims.is_passthrough(q, sensors[q]) {
            let wanted = |k: usize| match width {
                ProbeWidth::Reduced => dims.pair[k][q],
                ProbeWidth::Full => dims.qbar[q],
            };
            n_dis += (0..k_count)
                .filter(|&k| k != q)
                .map(|k| wanted(k).min(sensors[k]).min(dims.qbar[q]))
                .sum::<usize>();
        }
    }
    let m: usize = sensors.iter().sum();
    ChannelForms {
        n_est,
        n_dis,
        m_bar: m * (k_count - 1),
        n_danse: k_count * (k_count - 1) * obs.speech_sources(),
    }
}

/// Counts channels by pushing `frames` synthetic frames through the dMWF
/// transmit path: fused signals every frame, probes on discovery frames.
pub fn simulate_bandwidth(s: &Scenario, cfg: &ExperimentConfig, frames: usize) -> Result<BandwidthLedger> {
    let layout = s.layout();
    let scms = oracle_scms(s);
    let sol = solve_oracle(&s.obs, &scms, &layout, s.params.desired_channels, cfg.dmwf_options(s.params.seed))?;
    let stream = synthesize_frames(s, frames, Duty::default())?;
    let k_count = s.nodes();
    let mut ledger = BandwidthLedger::default();
    for (t, f) in stream.frames.iter().enumerate() {
        let discovery = t % cfg.n_ds == 0;
        let mut probe = 0;
        if discovery {
            for q in 0..k_count {
                for spec in sol.plan.received_by(q) {
                    build_probe(&f.y[spec.sender], spec)?;
                    // Padding rows are rebuilt by the receiver from the shared transform.
                    probe += spec.channels;
                }
            }
        }
        let mut fused = 0;
        for q in 0..k_count {
            fused += sol.fusion[q].fuse(&f.y[q])?.len() * (k_count - 1);
        }
        ledger.record(FrameChannels {
            frame: t,
            discovery,
            probe,
            fused,
        });
    }
    Ok(ledger)
}

/// Compression factors as exact ratios.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressionFactors {
    /// `M̄ / (N_est + N_dis / N_ds)`.
    pub dmwf_formula: Ratio<u64>,
    /// Raw channels over transmitted channels counted in the ledger.
    pub dmwf_measured: Option<Ratio<u64>>,
    /// `M / (K Qd)`; undefined without links or speech sources.
    pub danse: Option<Ratio<u64>>,
}

pub fn compression_factors(forms: &ChannelForms, n_ds: usize, ledger: Option<&BandwidthLedger>, sensors: &[usize]) -> CompressionFactors {
    let n_ds = n_ds as u64;
    let denom = forms.n_est as u64 * n_ds + forms.n_dis as u64;
    let dmwf_formula = if denom == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(forms.m_bar as u64 * n_ds, denom)
    };
    let dmwf_measured = ledger.and_then(|l| {
        let sent = (l.total_fused() + l.total_probe()) as u64;
        (sent > 0).then(|| Ratio::new(forms.m_bar as u64 * l.frames.len() as u64, sent))
    });
    let k = sensors.len() as u64;
    let m: u64 = sensors.iter().map(|&v| v as u64).sum();
    let danse = (forms.n_danse > 0).then(|| Ratio::new(m * (k - 1), forms.n_danse as u64));
    CompressionFactors {
        dmwf_formula,
        dmwf_measured,
        danse,
    }
}

/// Squared observation-vector dimensions of the per-node solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeComplexity {
    pub node: usize,
    /// `(M_k + Σ_{q≠k} Q̄_q)²`.
    pub dmwf: usize,
    /// `(M_k + (K − 1) Qd)²`.
    pub danse: usize,
}

pub fn complexity_report(obs: &ObservabilityPattern, sensors: &[usize]) -> Vec<NodeComplexity> {
    let dims = fused_dimensions(obs);
    let k_count = sensors.len();
    let qd = obs.speech_sources();
    (0..k_count)
        .map(|k| {
            let fused: usize = (0..k_count).filter(|&q| q != k).map(|q| dims.fused_dim(q, sensors[q])).sum();
            NodeComplexity {
                node: k,
                dmwf: (sensors[k] + fused).pow(2),
                danse: (sensors[k] + (k_count - 1) * qd).pow(2),
            }
        })
        .collect()
}

/// Probe plan for a scenario under the configured probe options.
pub fn probe_plan(s: &Scenario, cfg: &ExperimentConfig) -> Result<ProbePlan> {
    let opts = cfg.dmwf_options(s.params.seed);
    ProbePlan::new(&s.obs, s.layout().dims(), opts.width, opts.padding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_observability, ScenarioMode};

    fn cfg(mode: ScenarioMode, nodes: usize) -> ExperimentConfig {
        ExperimentConfig {
            scenario: ScenarioParams::uniform(nodes, 5, 2, 2, mode, 0),
            trials: 2,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::parse(a.name()).unwrap(), a);
        }
        assert!(Algorithm::parse("mvdr").is_err());
    }

    #[test]
    fn single_node_algorithms_agree_with_centralized() {
        let mut c = cfg(ScenarioMode::Fods, 1);
        c.trials = 1;
        c.algorithms = vec![
            Algorithm::Centralized,
            Algorithm::Local,
            Algorithm::Dmwf,
            Algorithm::DanseQd,
            Algorithm::DanseQdk,
            Algorithm::RsDanseQd,
            Algorithm::RsDanseQdk,
        ];
        let trials = run_batch_oracle(&c).unwrap();
        for (algo, outcome) in &trials[0].results {
            let series = outcome.completed().unwrap_or_else(|| panic!("{algo} failed"));
            for &(_, v) in series {
                assert!(v <= 1e-12, "{algo}: {v:e}");
            }
        }
    }

    #[test]
    fn batch_is_deterministic() {
        let c = cfg(ScenarioMode::Pos, 6);
        assert_eq!(run_batch_oracle(&c).unwrap(), run_batch_oracle(&c).unwrap());
    }

    #[test]
    fn pos_qd_danse_failures_are_recorded() {
        let mut c = cfg(ScenarioMode::Pos, 6);
        c.algorithms = vec![Algorithm::Dmwf, Algorithm::DanseQd];
        let trials = run_batch_oracle(&c).unwrap();
        for t in &trials {
            assert!(!t.results[&Algorithm::Dmwf].is_failed());
        }
        assert!(trials.iter().any(|t| t.results[&Algorithm::DanseQd].is_failed()));
    }

    #[test]
    fn unprocessed_is_rejected_in_batch() {
        let mut c = cfg(ScenarioMode::Fods, 3);
        c.algorithms = vec![Algorithm::Unprocessed];
        assert!(run_batch_oracle(&c).is_err());
    }

    #[test]
    fn danse_compression_for_23_sensors() {
        let sensors = [4, 4, 4, 4, 4, 3];
        let obs = ObservabilityPattern {
            speech: vec![vec![true, true]; 6],
            noise: vec![vec![]; 6],
        };
        let f = compression_factors(&channel_forms(&obs, &sensors, ProbeWidth::Reduced), 8, None, &sensors);
        assert_eq!(f.danse, Some(Ratio::new(23, 12)));
    }

    #[test]
    fn dmwf_approaches_danse_when_sharing_only_speech() {
        // Q̄_q = Q_kq = Qd everywhere and discovery amortized away.
        let sensors = [5; 4];
        let obs = ObservabilityPattern {
            speech: vec![vec![true, true]; 4],
            noise: vec![vec![]; 4],
        };
        let forms = channel_forms(&obs, &sensors, ProbeWidth::Reduced);
        let f = compression_factors(&forms, 1_000_000, None, &sensors);
        let diff = (*f.dmwf_formula.numer() as f64 / *f.dmwf_formula.denom() as f64)
            - (*f.danse.unwrap().numer() as f64 / *f.danse.unwrap().denom() as f64);
        assert!(diff.abs() < 1e-5);
    }

    #[test]
    fn measured_channels_match_closed_forms() {
        for seed in 0..8 {
            let mut c = cfg(ScenarioMode::Pos, 6);
            c.scenario.seed = seed;
            let s = generate_scenario(&c.scenario).unwrap();
            let forms = channel_forms(&s.obs, &c.scenario.sensors, c.probe_width);
            let ledger = simulate_bandwidth(&s, &c, 64).unwrap();
            for f in &ledger.frames {
                assert_eq!(f.fused, forms.n_est);
                assert_eq!(f.probe, if f.frame % c.n_ds == 0 { forms.n_dis } else { 0 });
            }
            let cf = compression_factors(&forms, c.n_ds, Some(&ledger), &c.scenario.sensors);
            assert_eq!(cf.dmwf_measured, Some(cf.dmwf_formula));
        }
    }

    #[test]
    fn complexity_terms() {
        let single = ObservabilityPattern {
            speech: vec![vec![true]],
            noise: vec![vec![true]],
        };
        assert_eq!(complexity_report(&single, &[4]), vec![NodeComplexity { node: 0, dmwf: 16, danse: 16 }]);
        let p = ScenarioParams::uniform(4, 6, 2, 2, ScenarioMode::Fods, 3);
        let obs = generate_observability(&p).unwrap();
        let dims = fused_dimensions(&obs);
        if dims.qbar.iter().all(|&q| q >= 2) {
            for c in complexity_report(&obs, &p.sensors) {
                assert!(c.dmwf >= c.danse);
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.n_ds = 0;
        assert!(c.validate().is_err());
        c.n_ds = 8;
        c.trials = 0;
        assert!(c.validate().is_err());
    }
}
