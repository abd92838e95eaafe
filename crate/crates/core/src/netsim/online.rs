//! Frame-by-frame online simulation over independent frequency bins.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Algorithm, BandwidthLedger, ExperimentConfig, FrameChannels, Outcome};
use crate::danse::DanseState;
use crate::dmwf::{
    build_observation, discovery_update, observation_map, oracle_discovery, rebasing_transform, DiscoveryStats, FusionState, ProbePlan,
    Solver,
};
use crate::error::{Error, Result};
use crate::filters::{centralized_mwf, gevd_mwf_operator, SelectionMatrix};
use crate::metrics::{ser_from_energies, MetricTrace};
use crate::numerics::{c64, CMatrix, CVector};
use crate::scenario::{
    generate_observability, oracle_scms, scenario_with_pattern, speech_image, synthesize_frame, Duty, Frame,
    ObservabilityPattern, Scenario, ScenarioParams,
};
use crate::scm::ScmTracker;
use crate::wola::WolaConfig;

/// How the algorithms learn which sources each node observes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservabilityMode {
    /// Signals follow the sampled pattern exactly.
    Exact,
    /// Every source leaks into every node with a random per-pair attenuation
    /// drawn uniformly from `leakage_db`; a source counts as observed where
    /// its reference-channel SIR is at least `delta_db`.
    Threshold { delta_db: f64, leakage_db: (f64, f64) },
}

impl ObservabilityMode {
    pub fn threshold(delta_db: f64) -> Self {
        ObservabilityMode::Threshold {
            delta_db,
            leakage_db: (-30.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineConfig {
    pub bins: usize,
    pub frames: usize,
    /// Steering is perturbed every this many frames; static when `None`.
    pub segment_frames: Option<usize>,
    pub beta: f64,
    /// Forgetting factor of the discovery cross-statistics per discovery
    /// frame; `R_qq` forgets at the matching per-frame rate.
    pub discovery_beta: f64,
    /// Start trackers and fusion matrices from the oracle statistics.
    pub warm_start: bool,
    /// Re-express the receivers' dMWF statistics after each fusion update.
    pub rebase: bool,
    pub duty: Duty,
    pub observability: ObservabilityMode,
    /// DANSE fusion-matrix handover period in frames.
    pub danse_period: usize,
    /// Filters are recomputed every this many frames.
    pub refresh: usize,
    /// SER window and hop in frames.
    pub ser_window: usize,
    pub ser_stride: usize,
    /// Weight of the old steering at a segment boundary.
    pub keep_weight: f64,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        let frame_rate = WolaConfig::default().frame_rate();
        Self {
            bins: 8,
            frames: (60.0 * frame_rate).round() as usize,
            segment_frames: Some((5.0 * frame_rate).round() as usize),
            beta: 0.967,
            discovery_beta: 0.995,
            warm_start: true,
            rebase: true,
            duty: Duty::default(),
            observability: ObservabilityMode::Exact,
            danse_period: 20,
            refresh: 1,
            ser_window: (3.0 * frame_rate).round() as usize,
            ser_stride: (0.25 * frame_rate).round() as usize,
            keep_weight: 0.8,
        }
    }
}

impl OnlineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            (self.bins, "bins"),
            (self.frames, "frames"),
            (self.danse_period, "danse_period"),
            (self.refresh, "refresh"),
            (self.ser_window, "ser_window"),
            (self.ser_stride, "ser_stride"),
        ];
        for (v, name) in positive {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        if self.segment_frames == Some(0) {
            return Err(Error::InvalidParameter("segment_frames must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!("beta {} outside [0, 1)", self.beta)));
        }
        if !(0.0..1.0).contains(&self.discovery_beta) {
            return Err(Error::InvalidParameter(format!("discovery_beta {} outside [0, 1)", self.discovery_beta)));
        }
        if !(0.0..=1.0).contains(&self.keep_weight) {
            return Err(Error::InvalidParameter(format!("keep_weight {} outside [0, 1]", self.keep_weight)));
        }
        if let ObservabilityMode::Threshold { delta_db, leakage_db } = self.observability {
            if !delta_db.is_finite() || !(leakage_db.0 <= leakage_db.1) {
                return Err(Error::InvalidParameter("invalid observability threshold".into()));
            }
        }
        Ok(())
    }

    pub fn boundaries(&self) -> Vec<usize> {
        match self.segment_frames {
            Some(s) => (1..).map(|i| i * s).take_while(|&t| t < self.frames).collect(),
            None => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineTrial {
    pub trial: usize,
    pub seed: u64,
    /// Pattern the algorithms are configured with.
    pub pattern: ObservabilityPattern,
    /// Frames at which the steering changed.
    pub boundaries: Vec<usize>,
    /// Per-node and node-mean (`None`) `"ser"` series, indexed by frame.
    pub results: BTreeMap<Algorithm, Outcome<MetricTrace>>,
    /// dMWF transmissions of one bin.
    pub ledger: BandwidthLedger,
}

impl OnlineTrial {
    pub fn all_failed(&self) -> bool {
        self.results.values().all(Outcome::is_failed)
    }
}

/// Per-pair attenuations in dB, `gains[k][j]` over all sources.
fn draw_leakage(params: &ScenarioParams, range: (f64, f64)) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(3);
    (0..params.nodes)
        .map(|_| {
            (0..params.total_sources())
                .map(|_| if range.0 == range.1 { range.0 } else { rng.random_range(range.0..=range.1) })
                .collect()
        })
        .collect()
}

/// δ-thresholded pattern from expected reference-channel powers.
///
/// A node left without a speech source keeps its strongest one.
pub fn threshold_observability(params: &ScenarioParams, gains_db: &[Vec<f64>], delta_db: f64) -> ObservabilityPattern {
    let qd = params.speech_sources;
    let powers = params.latent_powers();
    let mut speech = Vec::with_capacity(params.nodes);
    let mut noise = Vec::with_capacity(params.nodes);
    for g in gains_db {
        let p: Vec<f64> = g.iter().zip(&powers).map(|(db, s)| 10f64.powf(db / 10.0) * s).collect();
        let total: f64 = p.iter().sum::<f64>() + params.selfnoise_power;
        let seen: Vec<bool> = p.iter().map(|&pj| 10.0 * (pj / (total - pj)).log10() >= delta_db).collect();
        let mut s: Vec<bool> = seen[..qd].to_vec();
        if !s.iter().any(|&b| b) {
            let best = (0..qd).max_by(|&a, &b| p[a].total_cmp(&p[b])).expect("at least one speech source");
            s[best] = true;
        }
        speech.push(s);
        noise.push(seen[qd..].to_vec());
    }
    ObservabilityPattern { speech, noise }
}

fn apply_leakage(base: &Scenario, gains_db: &[Vec<f64>]) -> Scenario {
    let qd = base.params.speech_sources;
    let mut s = base.clone();
    for (k, g) in gains_db.iter().enumerate() {
        for (j, db) in g.iter().enumerate() {
            let amp = c64(10f64.powf(db / 20.0), 0.0);
            if j < qd {
                s.speech_steering[k].column_mut(j).scale_mut(amp.re);
            } else {
                s.noise_steering[k].column_mut(j - qd).scale_mut(amp.re);
            }
        }
    }
    s
}

/// Filters for the given reference selections from tracked statistics.
fn solve_tracked(tr: &ScmTracker, es: &[SelectionMatrix], solver: Solver) -> Result<Vec<CMatrix>> {
    match solver {
        Solver::Mwf => {
            let rss = tr.speech_scm()?;
            es.iter().map(|e| Ok(centralized_mwf(tr.ryy(), &rss, e)?.w)).collect()
        }
        Solver::Gevd(rank) => {
            let op = gevd_mwf_operator(tr.ryy(), tr.rnnv(), rank)?;
            es.iter().map(|e| e.select_columns(&op)).collect()
        }
    }
}

fn head(v: &CVector, d: usize) -> CVector {
    v.rows(0, d).into_owned()
}

struct Centralized {
    tracker: ScmTracker,
    refs: Vec<SelectionMatrix>,
    w: Vec<CMatrix>,
}

struct Local {
    trackers: Vec<ScmTracker>,
    w: Vec<CMatrix>,
}

struct Dmwf {
    plan: ProbePlan,
    stats: Vec<DiscoveryStats>,
    fusion: Vec<FusionState>,
    trackers: Vec<ScmTracker>,
    w: Vec<CMatrix>,
}

impl Dmwf {
    /// Maps the `z_q` block of every receiver's statistics through `t`.
    fn rebase(&mut self, q: usize, t: &CMatrix) -> Result<()> {
        for (k, tracker) in self.trackers.iter_mut().enumerate() {
            if k == q {
                continue;
            }
            let offset = self.plan.sensors()[k]
                + (0..q).filter(|&i| i != k).map(|i| self.fusion[i].fused_dim()).sum::<usize>();
            let mut d = CMatrix::identity(tracker.dim(), tracker.dim());
            d.view_mut((offset, offset), (t.nrows(), t.ncols())).copy_from(t);
            tracker.transform(&d)?;
        }
        Ok(())
    }
}

struct Danse {
    state: DanseState,
    trackers: Vec<ScmTracker>,
}

enum Runner {
    Centralized(Centralized),
    Local(Local),
    Dmwf(Dmwf),
    Danse(Danse),
    Unprocessed,
}

/// `[I; 0]`, the fusion matrix used before the first discovery.
fn initial_fusion(q: usize, m_q: usize, qbar: usize) -> FusionState {
    if qbar == 0 {
        return FusionState::silent(q, m_q);
    }
    if m_q <= qbar {
        return FusionState::passthrough(q, m_q, qbar);
    }
    FusionState {
        node: q,
        qbar,
        p: CMatrix::from_fn(m_q, qbar, |r, c| if r == c { c64(1.0, 0.0) } else { c64(0.0, 0.0) }),
        passthrough: false,
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    pattern: &'a ObservabilityPattern,
    desired: usize,
}

impl Ctx<'_> {
    fn tracker(&self, dim: usize, warm: Option<(crate::numerics::HermitianMatrix, crate::numerics::HermitianMatrix)>) -> Result<ScmTracker> {
        match warm {
            Some((ryy, rnnv)) if self.cfg.online.warm_start => ScmTracker::warm(ryy, rnnv, self.cfg.online.beta),
            _ => ScmTracker::new(dim, self.cfg.online.beta),
        }
    }
}

impl Runner {
    fn new(algo: Algorithm, ctx: &Ctx, s: &Scenario) -> Result<Self> {
        let layout = s.layout();
        let k_count = layout.nodes();
        let d = ctx.desired;
        let oracle = oracle_scms(s);
        let solver = ctx.cfg.solver();
        let mut runner = match algo {
            Algorithm::Centralized => {
                let refs = (0..k_count)
                    .map(|k| SelectionMatrix::node_reference(&layout, k, d))
                    .collect::<Result<Vec<_>>>()?;
                let tracker = ctx.tracker(layout.total(), Some((oracle.ryy.clone(), oracle.rnnv.clone())))?;
                Runner::Centralized(Centralized {
                    w: vec![CMatrix::zeros(layout.total(), d); k_count],
                    tracker,
                    refs,
                })
            }
            Algorithm::Local => {
                let trackers = (0..k_count)
                    .map(|k| {
                        let r = layout.range(k);
                        ctx.tracker(r.len(), Some((oracle.ryy.block(r.start, r.len()), oracle.rnnv.block(r.start, r.len()))))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Runner::Local(Local {
                    w: (0..k_count).map(|k| CMatrix::zeros(layout.dim(k), d)).collect(),
                    trackers,
                })
            }
            Algorithm::Dmwf => {
                let opts = ctx.cfg.dmwf_options(s.params.seed);
                let plan = ProbePlan::new(ctx.pattern, layout.dims(), opts.width, opts.padding)?;
                let cross_beta = ctx.cfg.online.discovery_beta;
                let local_beta = cross_beta.powf(1.0 / ctx.cfg.n_ds as f64);
                let mut stats: Vec<DiscoveryStats> = (0..k_count)
                    .map(|q| DiscoveryStats::exponential(layout.dim(q), plan.dims.qbar[q], local_beta, cross_beta))
                    .collect();
                let fusion = if ctx.cfg.online.warm_start {
                    for (q, st) in stats.iter_mut().enumerate() {
                        let r = layout.range(q);
                        st.primed(&oracle.ryy.block(r.start, r.len()), &plan.oracle_cross(q, &oracle.ryy, &layout));
                    }
                    oracle_discovery(&plan, &oracle.ryy, &layout)?
                } else {
                    (0..k_count).map(|q| initial_fusion(q, layout.dim(q), plan.dims.qbar[q])).collect()
                };
                let trackers = (0..k_count)
                    .map(|k| {
                        let dk = observation_map(k, &fusion, &layout);
                        ctx.tracker(dk.ncols(), Some((oracle.ryy.project(&dk)?, oracle.rnnv.project(&dk)?)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Runner::Dmwf(Dmwf {
                    w: trackers.iter().map(|t| CMatrix::zeros(t.dim(), d)).collect(),
                    plan,
                    stats,
                    fusion,
                    trackers,
                })
            }
            Algorithm::Unprocessed => Runner::Unprocessed,
            danse => {
                let (rule, order) = danse.danse().expect("DANSE variant");
                let state = DanseState::new(ctx.pattern, &layout, d, rule, ctx.cfg.order(order))?;
                let trackers = (0..k_count)
                    .map(|k| {
                        let dk = state.observation_map(k);
                        ctx.tracker(dk.ncols(), Some((oracle.ryy.project(&dk)?, oracle.rnnv.project(&dk)?)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Runner::Danse(Danse { state, trackers })
            }
        };
        if ctx.cfg.online.warm_start {
            runner.refresh(ctx.desired, solver)?;
        }
        Ok(runner)
    }

    fn refresh(&mut self, d: usize, solver: Solver) -> Result<()> {
        match self {
            Runner::Centralized(c) => {
                if c.tracker.is_ready() {
                    c.w = solve_tracked(&c.tracker, &c.refs, solver)?;
                }
            }
            Runner::Local(l) => {
                for (tr, w) in l.trackers.iter().zip(&mut l.w) {
                    if tr.is_ready() {
                        let e = SelectionMatrix::first(tr.dim(), d)?;
                        *w = solve_tracked(tr, &[e], solver)?.remove(0);
                    }
                }
            }
            Runner::Dmwf(m) => {
                for (tr, w) in m.trackers.iter().zip(&mut m.w) {
                    if tr.is_ready() {
                        let e = SelectionMatrix::first(tr.dim(), d)?;
                        *w = solve_tracked(tr, &[e], solver)?.remove(0);
                    }
                }
            }
            Runner::Danse(n) => {
                for (k, tr) in n.trackers.iter().enumerate() {
                    if tr.is_ready() {
                        n.state.solve_node(k, tr.ryy(), tr.rnnv(), solver)?;
                    }
                }
            }
            Runner::Unprocessed => {}
        }
        Ok(())
    }

    /// Consumes frame `t` and returns the per-node estimates. On discovery
    /// frames the dMWF runner reports the transmitted channels.
    fn step(
        &mut self,
        t: usize,
        frame: &Frame,
        ctx: &Ctx,
        channels: Option<&mut FrameChannels>,
    ) -> Result<Vec<CVector>> {
        let d = ctx.desired;
        let solver = ctx.cfg.solver();
        let refresh = t % ctx.cfg.online.refresh == 0;
        let y = &frame.y;
        let k_count = y.len();
        match self {
            Runner::Centralized(c) => {
                let stacked = crate::scenario::NodeLayout::new(y.iter().map(|v| v.len()).collect()).stack(y);
                c.tracker.update(&stacked, frame.vad)?;
                if refresh {
                    self.refresh(d, solver)?;
                }
                let Runner::Centralized(c) = self else { unreachable!() };
                Ok(c.w.iter().map(|w| w.adjoint() * &stacked).collect())
            }
            Runner::Local(l) => {
                for (tr, yk) in l.trackers.iter_mut().zip(y) {
                    tr.update(yk, frame.vad)?;
                }
                if refresh {
                    self.refresh(d, solver)?;
                }
                let Runner::Local(l) = self else { unreachable!() };
                Ok(l.w.iter().zip(y).map(|(w, yk)| w.adjoint() * yk).collect())
            }
            Runner::Dmwf(m) => {
                let discovery = t % ctx.cfg.n_ds == 0;
                let mut probe_channels = 0;
                for q in 0..k_count {
                    m.stats[q].accumulate_local(&y[q])?;
                    if discovery && !m.plan.received_by(q).is_empty() {
                        let r = m.plan.probe_sum(q, y)?;
                        probe_channels += m.plan.received_by(q).iter().map(|p| p.channels).sum::<usize>();
                        m.stats[q].accumulate_cross(&y[q], &r)?;
                    }
                }
                if discovery {
                    for q in 0..k_count {
                        match discovery_update(q, &m.stats[q]) {
                            Ok(f) => {
                                if ctx.cfg.online.rebase {
                                    if let Some(t) = rebasing_transform(&m.fusion[q], &f, &m.stats[q].local()) {
                                        m.rebase(q, &t)?;
                                    }
                                }
                                m.fusion[q] = f;
                            }
                            Err(Error::InsufficientData(_)) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
                let fused: Vec<CVector> = (0..k_count).map(|q| m.fusion[q].fuse(&y[q])).collect::<Result<_>>()?;
                if let Some(ch) = channels {
                    ch.discovery = discovery;
                    ch.probe = probe_channels;
                    ch.fused = fused.iter().map(|z| z.len() * (k_count - 1)).sum();
                }
                let mut obs = Vec::with_capacity(k_count);
                for k in 0..k_count {
                    let others: BTreeMap<usize, CVector> =
                        (0..k_count).filter(|&q| q != k).map(|q| (q, fused[q].clone())).collect();
                    let v = build_observation(k, k_count, &y[k], &others)?.stacked();
                    m.trackers[k].update(&v, frame.vad)?;
                    obs.push(v);
                }
                if refresh {
                    self.refresh(d, solver)?;
                }
                let Runner::Dmwf(m) = self else { unreachable!() };
                Ok(m.w.iter().zip(&obs).map(|(w, v)| w.adjoint() * v).collect())
            }
            Runner::Danse(n) => {
                for k in 0..k_count {
                    let v = n.state.observation(k, y);
                    n.trackers[k].update(&v, frame.vad)?;
                }
                if refresh {
                    self.refresh(d, solver)?;
                }
                let Runner::Danse(n) = self else { unreachable!() };
                let out = (0..k_count).map(|k| n.state.estimate(k, y)).collect();
                if (t + 1) % ctx.cfg.online.danse_period == 0 {
                    n.state.commit_round();
                }
                Ok(out)
            }
            Runner::Unprocessed => Ok(y.iter().map(|yk| head(yk, d)).collect()),
        }
    }
}

fn segment_seed(seed: u64, bin: usize, segment: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((bin as u64) << 32) ^ segment as u64
}

/// One online trial; every algorithm sees identical frames.
pub fn online_trial(cfg: &ExperimentConfig, trial: usize) -> Result<OnlineTrial> {
    let on = &cfg.online;
    let params = cfg.trial_params(trial);
    let k_count = params.nodes;
    let d = params.desired_channels;
    let (truth_pattern, pattern, leakage) = match on.observability {
        ObservabilityMode::Exact => {
            let p = generate_observability(&params)?;
            (p.clone(), p, None)
        }
        ObservabilityMode::Threshold { delta_db, leakage_db } => {
            params.validate()?;
            let full = ObservabilityPattern {
                speech: vec![vec![true; params.speech_sources]; k_count],
                noise: vec![vec![true; params.noise_sources]; k_count],
            };
            let gains = draw_leakage(&params, leakage_db);
            let p = threshold_observability(&params, &gains, delta_db);
            (full, p, Some(gains))
        }
    };
    let ctx = Ctx {
        cfg,
        pattern: &pattern,
        desired: d,
    };
    let boundaries = on.boundaries();
    let algos = &cfg.algorithms;
    let mut signal = vec![vec![0.0; on.frames]; k_count];
    let mut error = vec![vec![vec![0.0; on.frames]; k_count]; algos.len()];
    let mut failed: Vec<Option<(usize, String)>> = vec![None; algos.len()];
    let mut ledger = BandwidthLedger::default();

    for bin in 0..on.bins {
        let mut base = scenario_with_pattern(&params, truth_pattern.clone(), 1 + bin as u64)?;
        let truth = |b: &Scenario| match &leakage {
            Some(g) => apply_leakage(b, g),
            None => b.clone(),
        };
        let mut scenario = truth(&base);
        let mut runners: Vec<Option<Runner>> = Vec::with_capacity(algos.len());
        for (i, &algo) in algos.iter().enumerate() {
            if failed[i].is_some() {
                runners.push(None);
                continue;
            }
            match Runner::new(algo, &ctx, &scenario) {
                Ok(r) => runners.push(Some(r)),
                Err(e) if is_numerical(&e) => {
                    failed[i] = Some((0, e.to_string()));
                    runners.push(None);
                }
                Err(e) => return Err(e),
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(1000 + bin as u64);
        let mut segment = 0;
        for t in 0..on.frames {
            if boundaries.get(segment) == Some(&t) {
                segment += 1;
                base = base.perturbed(on.keep_weight, segment_seed(params.seed, bin, segment))?;
                scenario = truth(&base);
            }
            let frame = synthesize_frame(&scenario, on.duty.is_active(t), &mut rng);
            let desired: Vec<CVector> = (0..k_count).map(|k| head(&speech_image(&scenario, &frame, k), d)).collect();
            for (k, dk) in desired.iter().enumerate() {
                signal[k][t] += dk.norm_squared();
            }
            for (i, slot) in runners.iter_mut().enumerate() {
                let Some(runner) = slot else { continue };
                let mut ch = FrameChannels {
                    frame: t,
                    discovery: false,
                    probe: 0,
                    fused: 0,
                };
                let record = bin == 0 && matches!(runner, Runner::Dmwf(_)) && ledger.frames.len() == t;
                match runner.step(t, &frame, &ctx, record.then_some(&mut ch)) {
                    Ok(est) => {
                        for k in 0..k_count {
                            error[i][k][t] += (&desired[k] - &est[k]).norm_squared();
                        }
                        if record {
                            ledger.record(ch);
                        }
                    }
                    Err(e) if is_numerical(&e) => {
                        failed[i] = Some((t, e.to_string()));
                        *slot = None;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    let mut results = BTreeMap::new();
    for (i, &algo) in algos.iter().enumerate() {
        let outcome = match &failed[i] {
            Some((index, message)) => Outcome::Failed {
                index: *index,
                message: message.clone(),
            },
            None => Outcome::Completed(ser_trace(&signal, &error[i], on.ser_window, on.ser_stride)?),
        };
        results.insert(algo, outcome);
    }
    Ok(OnlineTrial {
        trial,
        seed: params.seed,
        pattern,
        boundaries,
        results,
        ledger,
    })
}

fn is_numerical(e: &Error) -> bool {
    matches!(e, Error::SingularMatrix(_) | Error::RankDeficient(_))
}

/// Windowed SER per node and its node mean, every `stride` frames.
fn ser_trace(signal: &[Vec<f64>], error: &[Vec<f64>], window: usize, stride: usize) -> Result<MetricTrace> {
    let mut trace = MetricTrace::new();
    let frames = signal.first().map_or(0, Vec::len);
    let mut t = window;
    while t < frames {
        let mut sum = 0.0;
        let mut count = 0;
        for (k, (sig, err)) in signal.iter().zip(error).enumerate() {
            let s: f64 = sig[t - window..=t].iter().sum();
            let e: f64 = err[t - window..=t].iter().sum();
            match ser_from_energies(s, e) {
                Ok(v) => {
                    trace.push(t, Some(k), "ser", v)?;
                    sum += v;
                    count += 1;
                }
                Err(Error::UndefinedMetric(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if count > 0 {
            trace.push(t, None, "ser", sum / count as f64)?;
        }
        t += stride;
    }
    Ok(trace)
}

/// All online trials in order.
pub fn run_online(cfg: &ExperimentConfig) -> Result<Vec<OnlineTrial>> {
    cfg.validate()?;
    (0..cfg.trials).map(|t| online_trial(cfg, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmwf::fused_dimensions;
    use crate::scenario::ScenarioMode;

    fn small(algorithms: Vec<Algorithm>) -> ExperimentConfig {
        ExperimentConfig {
            scenario: ScenarioParams::uniform(3, 4, 2, 1, ScenarioMode::Pos, 2),
            algorithms,
            trials: 1,
            online: OnlineConfig {
                bins: 2,
                frames: 300,
                segment_frames: None,
                ..OnlineConfig::default()
            },
            ..ExperimentConfig::default()
        }
    }

    fn mean_ser(trial: &OnlineTrial, algo: Algorithm) -> f64 {
        let s = trial.results[&algo].completed().unwrap().series("ser", None);
        s.iter().map(|p| p.1).sum::<f64>() / s.len() as f64
    }

    #[test]
    fn default_cadences() {
        let c = OnlineConfig::default();
        assert_eq!(c.ser_window, 94);
        assert_eq!(c.ser_stride, 8);
        assert_eq!(c.segment_frames, Some(156));
        assert_eq!(c.danse_period, 20);
    }

    #[test]
    fn unprocessed_matches_input_ser() {
        let cfg = small(vec![Algorithm::Unprocessed]);
        let trial = online_trial(&cfg, 0).unwrap();
        let trace = trial.results[&Algorithm::Unprocessed].completed().unwrap().clone();
        // Recompute the input SER from the same frames.
        let params = cfg.trial_params(0);
        let obs = generate_observability(&params).unwrap();
        let k_count = params.nodes;
        let mut sig = vec![vec![0.0; cfg.online.frames]; k_count];
        let mut err = vec![vec![0.0; cfg.online.frames]; k_count];
        for bin in 0..cfg.online.bins {
            let s = scenario_with_pattern(&params, obs.clone(), 1 + bin as u64).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(1000 + bin as u64);
            for t in 0..cfg.online.frames {
                let f = synthesize_frame(&s, cfg.online.duty.is_active(t), &mut rng);
                for k in 0..k_count {
                    let d = speech_image(&s, &f, k)[0];
                    sig[k][t] += d.norm_sqr();
                    err[k][t] += (f.y[k][0] - d).norm_sqr();
                }
            }
        }
        assert_eq!(trace, ser_trace(&sig, &err, 94, 8).unwrap());
    }

    #[test]
    fn trial_is_deterministic() {
        let cfg = small(vec![Algorithm::Dmwf, Algorithm::DanseQdk, Algorithm::Centralized]);
        assert_eq!(online_trial(&cfg, 0).unwrap(), online_trial(&cfg, 0).unwrap());
    }

    #[test]
    fn filtering_beats_raw_input() {
        let mut cfg = small(vec![Algorithm::Centralized, Algorithm::Dmwf, Algorithm::Local, Algorithm::Unprocessed]);
        cfg.gevd_rank = Some(2);
        let trial = online_trial(&cfg, 0).unwrap();
        let raw = mean_ser(&trial, Algorithm::Unprocessed);
        for a in [Algorithm::Centralized, Algorithm::Dmwf, Algorithm::Local] {
            assert!(mean_ser(&trial, a) > raw, "{a}");
        }
        assert!(mean_ser(&trial, Algorithm::Centralized) > mean_ser(&trial, Algorithm::Local));
    }

    #[test]
    fn cold_start_runs() {
        let mut cfg = small(vec![Algorithm::Dmwf, Algorithm::Centralized, Algorithm::RsDanseQdk]);
        cfg.online.warm_start = false;
        let trial = online_trial(&cfg, 0).unwrap();
        for (a, o) in &trial.results {
            assert!(!o.is_failed(), "{a}: {o:?}");
        }
    }

    #[test]
    fn ledger_counts_follow_schedule() {
        let cfg = small(vec![Algorithm::Dmwf]);
        let trial = online_trial(&cfg, 0).unwrap();
        let forms = super::super::channel_forms(&trial.pattern, &cfg.scenario.sensors, cfg.probe_width);
        assert_eq!(trial.ledger.frames.len(), cfg.online.frames);
        for f in &trial.ledger.frames {
            assert_eq!(f.discovery, f.frame % cfg.n_ds == 0);
            assert_eq!(f.fused, forms.n_est);
            assert_eq!(f.probe, if f.discovery { forms.n_dis } else { 0 });
        }
    }

    #[test]
    fn threshold_pattern_follows_sir() {
        let params = ScenarioParams::uniform(2, 4, 2, 1, ScenarioMode::Pos, 0);
        // Node 0: speech 0 dominates. Node 1: nothing clears the threshold.
        let gains = vec![vec![0.0, -30.0, -30.0], vec![-3.0, 0.0, 0.0]];
        let p = threshold_observability(&params, &gains, 6.0);
        assert_eq!(p.speech[0], vec![true, false]);
        assert_eq!(p.noise[0], vec![false]);
        assert_eq!(p.speech[1], vec![false, true]);
        assert_eq!(p.noise[1], vec![false]);
        let looser = threshold_observability(&params, &gains, -10.0);
        assert!(looser.speech[1].iter().chain(&looser.noise[1]).all(|&b| b));
        assert_eq!(looser.speech[0], vec![true, false]);
        assert_eq!(fused_dimensions(&looser).qbar, vec![1, 1]);
    }

    #[test]
    fn threshold_mode_runs() {
        let mut cfg = small(vec![Algorithm::Dmwf, Algorithm::Centralized, Algorithm::Unprocessed]);
        cfg.online.observability = ObservabilityMode::threshold(6.0);
        let trial = online_trial(&cfg, 0).unwrap();
        assert!(mean_ser(&trial, Algorithm::Centralized) > mean_ser(&trial, Algorithm::Unprocessed));
        assert!(trial.results[&Algorithm::Dmwf].completed().is_some());
    }

    #[test]
    fn boundaries_are_segment_multiples() {
        let c = OnlineConfig {
            frames: 500,
            segment_frames: Some(156),
            ..OnlineConfig::default()
        };
        assert_eq!(c.boundaries(), vec![156, 312, 468]);
    }
}
