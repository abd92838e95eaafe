//! Synthetic sensor-network scenarios.
//!
//! A scenario fixes which node observes which latent source, draws complex
//! steering matrices with all-zero columns for unobserved sources, and can
//! produce either oracle covariance matrices or a stream of noisy frames.
//!
//! Sources are indexed globally: speech sources first (`0..Qd`), then noise
//! sources (`Qd..Qd + Qn`).

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{c64, singular_values, CMatrix, CVector, HermitianMatrix};

const OBSERVABILITY_ATTEMPTS: usize = 1000;
const STEERING_ATTEMPTS: usize = 100;
const RANK_FLOOR: f64 = 1e-8;

/// Which speech-observability regime to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioMode {
    /// Every node observes every speech source.
    Fods,
    /// At least one node misses at least one speech source.
    Pos,
}

impl ScenarioMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioMode::Fods => "fods",
            ScenarioMode::Pos => "pos",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fods" => Ok(ScenarioMode::Fods),
            "pos" => Ok(ScenarioMode::Pos),
            other => Err(Error::Parse(format!("unknown scenario mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub nodes: usize,
    pub sensors: Vec<usize>,
    pub speech_sources: usize,
    pub noise_sources: usize,
    pub desired_channels: usize,
    pub speech_power: f64,
    pub noise_power: f64,
    pub selfnoise_power: f64,
    pub mode: ScenarioMode,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            nodes: 6,
            sensors: vec![5; 6],
            speech_sources: 2,
            noise_sources: 2,
            desired_channels: 1,
            speech_power: 1.0,
            noise_power: 1.0,
            selfnoise_power: 0.01,
            mode: ScenarioMode::Pos,
            seed: 0,
        }
    }
}

impl ScenarioParams {
    /// `nodes` nodes with `sensors` microphones each, other fields default.
    pub fn uniform(nodes: usize, sensors: usize, speech: usize, noise: usize, mode: ScenarioMode, seed: u64) -> Self {
        Self {
            nodes,
            sensors: vec![sensors; nodes],
            speech_sources: speech,
            noise_sources: noise,
            mode,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::InvalidParameter("at least one node is required".into()));
        }
        if self.sensors.len() != self.nodes {
            return Err(Error::InvalidParameter(format!(
                "{} sensor counts given for {} nodes",
                self.sensors.len(),
                self.nodes
            )));
        }
        if self.sensors.contains(&0) {
            return Err(Error::InvalidParameter("every node needs at least one sensor".into()));
        }
        let min_sensors = *self.sensors.iter().min().expect("nodes >= 1");
        if self.desired_channels == 0 || self.desired_channels > min_sensors {
            return Err(Error::InvalidParameter(format!(
                "desired channels {} must lie in 1..={min_sensors}",
                self.desired_channels
            )));
        }
        for (name, p) in [
            ("speech_power", self.speech_power),
            ("noise_power", self.noise_power),
            ("selfnoise_power", self.selfnoise_power),
        ] {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn total_sources(&self) -> usize {
        self.speech_sources + self.noise_sources
    }

    pub fn total_sensors(&self) -> usize {
        self.sensors.iter().sum()
    }

    pub fn layout(&self) -> NodeLayout {
        NodeLayout::new(self.sensors.clone())
    }

    /// Latent source powers, speech first.
    pub fn latent_powers(&self) -> Vec<f64> {
        let mut p = vec![self.speech_power; self.speech_sources];
        p.extend(std::iter::repeat_n(self.noise_power, self.noise_sources));
        p
    }
}

/// Per-node channel counts and their offsets in the stacked network vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLayout {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl NodeLayout {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for d in &dims {
            offsets.push(acc);
            acc += d;
        }
        Self { dims, offsets }
    }

    pub fn nodes(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, k: usize) -> usize {
        self.dims[k]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    pub fn total(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Rows of node `k` inside the stacked vector.
    pub fn range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k] + self.dims[k]
    }

    /// `(k, q)` block of a network-wide matrix.
    pub fn block(&self, m: &CMatrix, k: usize, q: usize) -> CMatrix {
        m.view((self.offsets[k], self.offsets[q]), (self.dims[k], self.dims[q])).into_owned()
    }

    pub fn split(&self, y: &CVector) -> Vec<CVector> {
        (0..self.nodes()).map(|k| y.rows(self.offsets[k], self.dims[k]).into_owned()).collect()
    }

    pub fn stack(&self, parts: &[CVector]) -> CVector {
        let mut y = CVector::zeros(self.total());
        for (k, p) in parts.iter().enumerate() {
            y.rows_mut(self.offsets[k], self.dims[k]).copy_from(p);
        }
        y
    }
}

/// Binary node-by-source observability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservabilityPattern {
    /// `speech[k][j]`: node `k` observes speech source `j`.
    pub speech: Vec<Vec<bool>>,
    /// `noise[k][j]`: node `k` observes noise source `j`.
    pub noise: Vec<Vec<bool>>,
}

impl ObservabilityPattern {
    pub fn nodes(&self) -> usize {
        self.speech.len()
    }

    pub fn speech_sources(&self) -> usize {
        self.speech.first().map_or(0, Vec::len)
    }

    pub fn noise_sources(&self) -> usize {
        self.noise.first().map_or(0, Vec::len)
    }

    pub fn total_sources(&self) -> usize {
        self.speech_sources() + self.noise_sources()
    }

    /// Whether node `k` observes global source index `j`.
    pub fn observes(&self, k: usize, j: usize) -> bool {
        let qd = self.speech_sources();
        if j < qd {
            self.speech[k][j]
        } else {
            self.noise[k][j - qd]
        }
    }

    /// Global indices observed by node `k`.
    pub fn observed(&self, k: usize) -> BTreeSet<usize> {
        (0..self.total_sources()).filter(|&j| self.observes(k, j)).collect()
    }

    pub fn observed_speech_count(&self, k: usize) -> usize {
        self.speech[k].iter().filter(|&&b| b).count()
    }

    pub fn is_fods(&self) -> bool {
        self.speech.iter().all(|row| row.iter().all(|&b| b))
    }

    fn check_invariants(&self, mode: ScenarioMode, sensors: &[usize]) -> bool {
        let k_count = self.nodes();
        let q = self.total_sources();
        let every_source_seen = (0..q).all(|j| (0..k_count).any(|k| self.observes(k, j)));
        let every_node_has_speech = (0..k_count).all(|k| self.observed_speech_count(k) > 0);
        let fits_sensors = (0..k_count).all(|k| self.observed(k).len() <= sensors[k]);
        let mode_ok = match mode {
            ScenarioMode::Fods => self.is_fods(),
            ScenarioMode::Pos => !self.is_fods(),
        };
        every_source_seen && every_node_has_speech && fits_sensors && mode_ok
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> crate::numerics::C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re * s, im * s)
}

/// Samples an observability pattern by rejection; deterministic in `params.seed`.
pub fn generate_observability(params: &ScenarioParams) -> Result<ObservabilityPattern> {
    params.validate()?;
    let mut rng = stream_rng(params.seed, 0);
    let (k, qd, qn) = (params.nodes, params.speech_sources, params.noise_sources);
    for _ in 0..OBSERVABILITY_ATTEMPTS {
        let speech = (0..k)
            .map(|_| {
                (0..qd)
                    .map(|_| params.mode == ScenarioMode::Fods || rng.random_bool(0.5))
                    .collect()
            })
            .collect();
        let noise = (0..k).map(|_| (0..qn).map(|_| rng.random_bool(0.5)).collect()).collect();
        let pattern = ObservabilityPattern { speech, noise };
        if pattern.check_invariants(params.mode, &params.sensors) {
            return Ok(pattern);
        }
    }
    Err(Error::InfeasiblePattern(format!(
        "no valid {} pattern for K={k}, Qd={qd}, Qn={qn} after {OBSERVABILITY_ATTEMPTS} attempts",
        params.mode.as_str()
    )))
}

/// A drawn scenario: observability plus per-node steering matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ScenarioParams,
    pub obs: ObservabilityPattern,
    /// `A_k`, `M_k × Qd`.
    pub speech_steering: Vec<CMatrix>,
    /// `B_k`, `M_k × Qn`.
    pub noise_steering: Vec<CMatrix>,
}

impl Scenario {
    pub fn layout(&self) -> NodeLayout {
        self.params.layout()
    }

    pub fn nodes(&self) -> usize {
        self.params.nodes
    }

    /// `[A_k | B_k]`, `M_k × Q`.
    pub fn node_steering(&self, k: usize) -> CMatrix {
        let a = &self.speech_steering[k];
        let b = &self.noise_steering[k];
        let mut c = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
        c.columns_mut(0, a.ncols()).copy_from(a);
        c.columns_mut(a.ncols(), b.ncols()).copy_from(b);
        c
    }

    fn stack(&self, parts: &[CMatrix], cols: usize) -> CMatrix {
        let layout = self.layout();
        let mut m = CMatrix::zeros(layout.total(), cols);
        for (k, p) in parts.iter().enumerate() {
            m.view_mut((layout.offset(k), 0), (layout.dim(k), cols)).copy_from(p);
        }
        m
    }

    /// Stacked speech steering `A`, `M × Qd`.
    pub fn speech_matrix(&self) -> CMatrix {
        self.stack(&self.speech_steering, self.params.speech_sources)
    }

    /// Stacked noise steering `B`, `M × Qn`.
    pub fn noise_matrix(&self) -> CMatrix {
        self.stack(&self.noise_steering, self.params.noise_sources)
    }

    /// Stacked `[A | B]`, `M × Q`.
    pub fn steering_matrix(&self) -> CMatrix {
        let parts: Vec<CMatrix> = (0..self.nodes()).map(|k| self.node_steering(k)).collect();
        self.stack(&parts, self.params.total_sources())
    }

    /// Verifies zero-column placement and the per-node rank condition.
    pub fn check(&self) -> Result<()> {
        for k in 0..self.nodes() {
            let c = self.node_steering(k);
            for j in 0..c.ncols() {
                let zero = c.column(j).iter().all(|z| *z == c64(0.0, 0.0));
                if zero == self.obs.observes(k, j) {
                    return Err(Error::InvalidParameter(format!(
                        "steering column {j} at node {k} disagrees with observability"
                    )));
                }
            }
            if !observed_columns_full_rank(&c, &self.obs, k) {
                return Err(Error::RankDeficient(format!("observed steering at node {k}")));
            }
        }
        Ok(())
    }

    /// Mixes in freshly drawn steering: `(w·old + (1−w)·new) / √(w² + (1−w)²)`,
    /// keeping zero columns and the per-node rank condition.
    pub fn perturbed(&self, keep_weight: f64, seed: u64) -> Result<Scenario> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let norm = (keep_weight * keep_weight + (1.0 - keep_weight).powi(2)).sqrt();
        for _ in 0..STEERING_ATTEMPTS {
            let (fresh_a, fresh_b) = draw_steering(&self.params, &self.obs, &mut rng);
            let mix = |old: &CMatrix, new: &CMatrix| (old * c64(keep_weight, 0.0) + new * c64(1.0 - keep_weight, 0.0)) / c64(norm, 0.0);
            let candidate = Scenario {
                params: self.params.clone(),
                obs: self.obs.clone(),
                speech_steering: self.speech_steering.iter().zip(&fresh_a).map(|(o, n)| mix(o, n)).collect(),
                noise_steering: self.noise_steering.iter().zip(&fresh_b).map(|(o, n)| mix(o, n)).collect(),
            };
            if candidate.check().is_ok() {
                return Ok(candidate);
            }
        }
        Err(Error::InfeasiblePattern("perturbed steering never met the rank condition".into()))
    }

    /// Key-value text form; floats use shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::from("# dmwf scenario v1\n");
        let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "nodes = {}", p.nodes);
        let _ = writeln!(out, "sensors = {}", join(&p.sensors));
        let _ = writeln!(out, "speech_sources = {}", p.speech_sources);
        let _ = writeln!(out, "noise_sources = {}", p.noise_sources);
        let _ = writeln!(out, "desired_channels = {}", p.desired_channels);
        let _ = writeln!(out, "speech_power = {:?}", p.speech_power);
        let _ = writeln!(out, "noise_power = {:?}", p.noise_power);
        let _ = writeln!(out, "selfnoise_power = {:?}", p.selfnoise_power);
        let _ = writeln!(out, "mode = {}", p.mode.as_str());
        let _ = writeln!(out, "seed = {}", p.seed);
        let bits = |row: &[bool]| row.iter().map(|&b| if b { "1" } else { "0" }).collect::<Vec<_>>().join(" ");
        for k in 0..p.nodes {
            let _ = writeln!(out, "obs_speech.{k} = {}", bits(&self.obs.speech[k]));
            let _ = writeln!(out, "obs_noise.{k} = {}", bits(&self.obs.noise[k]));
        }
        for k in 0..p.nodes {
            let _ = writeln!(out, "A.{k} = {}", matrix_text(&self.speech_steering[k]));
            let _ = writeln!(out, "B.{k} = {}", matrix_text(&self.noise_steering[k]));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Scenario> {
        let mut kv = std::collections::BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            kv.insert(key.trim().to_string(), value.trim().to_string());
        }
        let get = |key: &str| kv.get(key).ok_or_else(|| Error::Parse(format!("missing key `{key}`")));
        let int = |key: &str| -> Result<usize> {
            get(key)?.parse().map_err(|e| Error::Parse(format!("{key}: {e}")))
        };
        let float = |key: &str| -> Result<f64> {
            get(key)?.parse().map_err(|e| Error::Parse(format!("{key}: {e}")))
        };
        let nodes = int("nodes")?;
        let sensors = get("sensors")?
            .split_whitespace()
            .map(|s| s.parse().map_err(|e| Error::Parse(format!("sensors: {e}"))))
            .collect::<Result<Vec<usize>>>()?;
        let params = ScenarioParams {
            nodes,
            sensors,
            speech_sources: int("speech_sources")?,
            noise_sources: int("noise_sources")?,
            desired_channels: int("desired_channels")?,
            speech_power: float("speech_power")?,
            noise_power: float("noise_power")?,
            selfnoise_power: float("selfnoise_power")?,
            mode: ScenarioMode::parse(get("mode")?)?,
            seed: get("seed")?.parse().map_err(|e| Error::Parse(format!("seed: {e}")))?,
        };
        params.validate()?;
        let bits = |key: String| -> Result<Vec<bool>> {
            get(&key)?
                .split_whitespace()
                .map(|b| match b {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::Parse(format!("{key}: bad bit `{other}`"))),
                })
                .collect()
        };
        let mut obs = ObservabilityPattern {
            speech: Vec::new(),
            noise: Vec::new(),
        };
        let mut speech_steering = Vec::new();
        let mut noise_steering = Vec::new();
        for k in 0..nodes {
            obs.speech.push(bits(format!("obs_speech.{k}"))?);
            obs.noise.push(bits(format!("obs_noise.{k}"))?);
            speech_steering.push(parse_matrix(get(&format!("A.{k}"))?)?);
            noise_steering.push(parse_matrix(get(&format!("B.{k}"))?)?);
        }
        let s = Scenario {
            params,
            obs,
            speech_steering,
            noise_steering,
        };
        s.check()?;
        Ok(s)
    }
}

fn matrix_text(m: &CMatrix) -> String {
    let mut out = format!("{} {}", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            let _ = write!(out, " {:?} {:?}", z.re, z.im);
        }
    }
    out
}

fn parse_matrix(s: &str) -> Result<CMatrix> {
    let mut it = s.split_whitespace();
    let mut next = |what: &str| it.next().ok_or_else(|| Error::Parse(format!("matrix truncated at {what}")));
    let rows: usize = next("rows")?.parse().map_err(|e| Error::Parse(format!("rows: {e}")))?;
    let cols: usize = next("cols")?.parse().map_err(|e| Error::Parse(format!("cols: {e}")))?;
    let mut m = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let re: f64 = next("entry")?.parse().map_err(|e| Error::Parse(format!("entry: {e}")))?;
            let im: f64 = next("entry")?.parse().map_err(|e| Error::Parse(format!("entry: {e}")))?;
            m[(r, c)] = c64(re, im);
        }
    }
    Ok(m)
}

fn observed_columns_full_rank(c: &CMatrix, obs: &ObservabilityPattern, k: usize) -> bool {
    let cols: Vec<usize> = obs.observed(k).into_iter().collect();
    if cols.is_empty() {
        return true;
    }
    if cols.len() > c.nrows() {
        return false;
    }
    let sub = CMatrix::from_fn(c.nrows(), cols.len(), |r, i| c[(r, cols[i])]);
    singular_values(&sub).last().is_some_and(|&s| s > RANK_FLOOR)
}

pub(crate) fn draw_steering<R: Rng + ?Sized>(
    params: &ScenarioParams,
    obs: &ObservabilityPattern,
    rng: &mut R,
) -> (Vec<CMatrix>, Vec<CMatrix>) {
    let mut speech = Vec::with_capacity(params.nodes);
    let mut noise = Vec::with_capacity(params.nodes);
    for k in 0..params.nodes {
        let m = params.sensors[k];
        let mut a = CMatrix::zeros(m, params.speech_sources);
        let mut b = CMatrix::zeros(m, params.noise_sources);
        for r in 0..m {
            for j in 0..params.speech_sources {
                a[(r, j)] = complex_normal(rng, 1.0);
            }
            for j in 0..params.noise_sources {
                b[(r, j)] = complex_normal(rng, 1.0);
            }
        }
        for j in 0..params.speech_sources {
            if !obs.speech[k][j] {
                a.column_mut(j).fill(c64(0.0, 0.0));
            }
        }
        for j in 0..params.noise_sources {
            if !obs.noise[k][j] {
                b.column_mut(j).fill(c64(0.0, 0.0));
            }
        }
        speech.push(a);
        noise.push(b);
    }
    (speech, noise)
}

/// Draws a full scenario for `params`.
pub fn generate_scenario(params: &ScenarioParams) -> Result<Scenario> {
    let obs = generate_observability(params)?;
    scenario_with_pattern(params, obs, 1)
}

/// Draws steering for a given pattern; `stream` separates independent draws
/// sharing one seed.
pub fn scenario_with_pattern(params: &ScenarioParams, obs: ObservabilityPattern, stream: u64) -> Result<Scenario> {
    params.validate()?;
    let mut rng = stream_rng(params.seed, stream);
    for _ in 0..STEERING_ATTEMPTS {
        let (speech_steering, noise_steering) = draw_steering(params, &obs, &mut rng);
        let s = Scenario {
            params: params.clone(),
            obs: obs.clone(),
            speech_steering,
            noise_steering,
        };
        if s.check().is_ok() {
            return Ok(s);
        }
    }
    Err(Error::InfeasiblePattern(format!(
        "steering rank condition not met after {STEERING_ATTEMPTS} draws"
    )))
}

/// Whether a covariance set came from the model or from data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fidelity {
    Oracle,
    Tracked,
}

/// Network-wide spatial covariance matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ScmSet {
    pub ryy: HermitianMatrix,
    pub rss: HermitianMatrix,
    /// Noise plus self-noise.
    pub rnnv: HermitianMatrix,
    pub fidelity: Fidelity,
}

/// Model covariances `A Rs Aᴴ`, `B Rn Bᴴ + σ² I` and their sum.
pub fn oracle_scms(s: &Scenario) -> ScmSet {
    let p = &s.params;
    let a = s.speech_matrix();
    let b = s.noise_matrix();
    let rs = HermitianMatrix::from_diagonal(&vec![p.speech_power; p.speech_sources]);
    let rn = HermitianMatrix::from_diagonal(&vec![p.noise_power; p.noise_sources]);
    let m = p.total_sensors();
    let rss = rs.congruence(&a).expect("speech steering columns match");
    let rnn = rn.congruence(&b).expect("noise steering columns match");
    let rnnv = rnn
        .add(&HermitianMatrix::scaled_identity(m, p.selfnoise_power))
        .expect("same dimension");
    let ryy = rss.add(&rnnv).expect("same dimension");
    ScmSet {
        ryy,
        rss,
        rnnv,
        fidelity: Fidelity::Oracle,
    }
}

/// Speech on/off schedule shared by every speech source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Duty {
    AlwaysOn,
    AlwaysOff,
    /// `on` active frames followed by `off` silent frames, repeating.
    Blocks { on: usize, off: usize },
}

impl Default for Duty {
    fn default() -> Self {
        Duty::Blocks { on: 8, off: 8 }
    }
}

impl Duty {
    pub fn is_active(&self, t: usize) -> bool {
        match *self {
            Duty::AlwaysOn => true,
            Duty::AlwaysOff => false,
            Duty::Blocks { on, off } => {
                let period = on + off;
                period > 0 && t % period < on
            }
        }
    }
}

/// One time frame of the simulated network.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// Latent sources `[s; n]`; speech entries are zero when `vad` is false.
    pub latent: CVector,
    pub vad: bool,
    /// Per-node sensor signals `y_k`.
    pub y: Vec<CVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameStream {
    pub frames: Vec<Frame>,
}

/// Infinite frame source for a fixed scenario.
pub struct FrameGenerator<'a> {
    scenario: &'a Scenario,
    duty: Duty,
    rng: ChaCha8Rng,
    t: usize,
}

impl<'a> FrameGenerator<'a> {
    pub fn new(scenario: &'a Scenario, duty: Duty, seed: u64) -> Self {
        Self {
            scenario,
            duty,
            rng: stream_rng(seed, 2),
            t: 0,
        }
    }

    pub fn next_frame(&mut self) -> Frame {
        let vad = self.duty.is_active(self.t);
        self.t += 1;
        synthesize_frame(self.scenario, vad, &mut self.rng)
    }
}

/// One frame of `y_k = A_k s + B_k n + v_k`; speech latents are zero when `vad` is false.
pub fn synthesize_frame<R: Rng + ?Sized>(s: &Scenario, vad: bool, rng: &mut R) -> Frame {
    let p = &s.params;
    let mut latent = CVector::zeros(p.total_sources());
    for j in 0..p.speech_sources {
        let v = complex_normal(rng, p.speech_power);
        if vad {
            latent[j] = v;
        }
    }
    for j in 0..p.noise_sources {
        latent[p.speech_sources + j] = complex_normal(rng, p.noise_power);
    }
    let y = (0..p.nodes)
        .map(|k| {
            let mut yk = s.node_steering(k) * &latent;
            for v in yk.iter_mut() {
                *v += complex_normal(rng, p.selfnoise_power);
            }
            yk
        })
        .collect();
    Frame { latent, vad, y }
}

impl Iterator for FrameGenerator<'_> {
    type Item = Frame;

    fn next(&mut self) -> Option<Frame> {
        Some(self.next_frame())
    }
}

/// `T` frames of `y_k = A_k s + B_k n + v_k` with speech gated by `duty`.
pub fn synthesize_frames(s: &Scenario, frames: usize, duty: Duty) -> Result<FrameStream> {
    if frames == 0 {
        return Err(Error::InvalidParameter("frame count must be at least 1".into()));
    }
    Ok(FrameStream {
        frames: FrameGenerator::new(s, duty, s.params.seed).take(frames).collect(),
    })
}

/// Speech image `A_k s` at node `k` for a frame.
pub fn speech_image(s: &Scenario, frame: &Frame, k: usize) -> CVector {
    let qd = s.params.speech_sources;
    let latent = frame.latent.rows(0, qd);
    &s.speech_steering[k] * latent
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::relative_error;

    #[test]
    fn fods_pattern_is_all_ones() {
        let p = ScenarioParams::uniform(3, 5, 2, 2, ScenarioMode::Fods, 4);
        let obs = generate_observability(&p).unwrap();
        assert!(obs.speech.iter().all(|r| r.len() == 2 && r.iter().all(|&b| b)));
    }

    #[test]
    fn no_noise_sources_gives_empty_rows() {
        let p = ScenarioParams::uniform(3, 4, 2, 0, ScenarioMode::Pos, 1);
        let obs = generate_observability(&p).unwrap();
        assert!(obs.noise.iter().all(Vec::is_empty));
        assert_eq!(obs.noise_sources(), 0);
    }

    #[test]
    fn pos_pattern_is_deterministic_and_partial() {
        let p = ScenarioParams::uniform(6, 5, 2, 2, ScenarioMode::Pos, 77);
        let a = generate_observability(&p).unwrap();
        let b = generate_observability(&p).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_fods());
        for k in 0..6 {
            assert!(a.observed_speech_count(k) >= 1);
        }
        for j in 0..4 {
            assert!((0..6).any(|k| a.observes(k, j)));
        }
    }

    #[test]
    fn zero_speech_sources_is_infeasible() {
        let p = ScenarioParams::uniform(3, 4, 0, 2, ScenarioMode::Fods, 1);
        assert!(matches!(generate_observability(&p), Err(Error::InfeasiblePattern(_))));
    }

    #[test]
    fn single_speech_source_pos_is_infeasible() {
        let p = ScenarioParams::uniform(3, 3, 1, 2, ScenarioMode::Pos, 11);
        assert!(matches!(generate_observability(&p), Err(Error::InfeasiblePattern(_))));
    }

    #[test]
    fn single_node_pos_is_infeasible() {
        let p = ScenarioParams::uniform(1, 4, 2, 1, ScenarioMode::Pos, 1);
        assert!(matches!(generate_observability(&p), Err(Error::InfeasiblePattern(_))));
    }

    #[test]
    fn paper_sized_scenario_dimensions() {
        let p = ScenarioParams::uniform(6, 5, 2, 2, ScenarioMode::Pos, 3);
        let s = generate_scenario(&p).unwrap();
        assert_eq!(s.speech_matrix().shape(), (30, 2));
        assert_eq!(s.noise_matrix().shape(), (30, 2));
    }

    #[test]
    fn zero_columns_match_pattern_exactly() {
        for seed in 0..20 {
            let p = ScenarioParams::uniform(5, 4, 2, 2, ScenarioMode::Pos, seed);
            let s = generate_scenario(&p).unwrap();
            for k in 0..5 {
                let c = s.node_steering(k);
                for j in 0..4 {
                    let zero = c.column(j).iter().all(|z| z.re == 0.0 && z.im == 0.0);
                    assert_eq!(zero, !s.obs.observes(k, j), "seed {seed} node {k} source {j}");
                }
            }
        }
    }

    #[test]
    fn scenario_text_is_deterministic_and_round_trips() {
        let p = ScenarioParams::uniform(3, 3, 2, 1, ScenarioMode::Pos, 11);
        let a = generate_scenario(&p).unwrap();
        let b = generate_scenario(&p).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let back = Scenario::from_text(&a.to_text()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn oracle_scm_selfnoise_diagonal() {
        let mut p = ScenarioParams::uniform(2, 3, 1, 1, ScenarioMode::Fods, 5);
        p.selfnoise_power = 0.01;
        let mut s = generate_scenario(&p).unwrap();
        for a in s.speech_steering.iter_mut().chain(s.noise_steering.iter_mut()) {
            a.fill(c64(0.0, 0.0));
        }
        let scm = oracle_scms(&s);
        assert!(relative_error(scm.ryy.as_matrix(), &(CMatrix::identity(6, 6) * c64(0.01, 0.0))) < 1e-15);
    }

    #[test]
    fn oracle_decomposition_is_consistent() {
        let s = generate_scenario(&ScenarioParams::default()).unwrap();
        let scm = oracle_scms(&s);
        let resid = scm.ryy.sub(&scm.rss).unwrap().sub(&scm.rnnv).unwrap();
        assert!(resid.frobenius_norm() <= 1e-12 * scm.ryy.frobenius_norm());
    }

    #[test]
    fn always_off_frames_are_noise_only() {
        let s = generate_scenario(&ScenarioParams::uniform(2, 3, 1, 1, ScenarioMode::Fods, 2)).unwrap();
        let stream = synthesize_frames(&s, 20, Duty::AlwaysOff).unwrap();
        for f in &stream.frames {
            assert!(!f.vad);
            assert_eq!(f.latent[0], c64(0.0, 0.0));
            for k in 0..2 {
                assert_eq!(speech_image(&s, f, k).norm(), 0.0);
            }
        }
    }

    #[test]
    fn zero_frames_is_rejected() {
        let s = generate_scenario(&ScenarioParams::uniform(2, 3, 1, 1, ScenarioMode::Fods, 2)).unwrap();
        assert!(synthesize_frames(&s, 0, Duty::AlwaysOn).is_err());
    }

    #[test]
    fn default_duty_alternates_blocks_of_eight() {
        let d = Duty::default();
        assert!((0..8).all(|t| d.is_active(t)));
        assert!((8..16).all(|t| !d.is_active(t)));
        assert!(d.is_active(16));
    }

    #[test]
    fn sample_covariance_matches_oracle() {
        // Monte-Carlo oracle: 10^6 always-on frames at dim 6.
        let mut p = ScenarioParams::uniform(2, 3, 1, 1, ScenarioMode::Fods, 9);
        p.selfnoise_power = 0.1;
        let s = generate_scenario(&p).unwrap();
        let layout = s.layout();
        let mut acc = CMatrix::zeros(6, 6);
        let n = 1_000_000;
        for f in FrameGenerator::new(&s, Duty::AlwaysOn, 1).take(n) {
            let y = layout.stack(&f.y);
            acc.ger(c64(1.0, 0.0), &y, &y.conjugate(), c64(1.0, 0.0));
        }
        acc /= c64(n as f64, 0.0);
        let scm = oracle_scms(&s);
        assert!(relative_error(&acc, scm.ryy.as_matrix()) < 0.02);
    }
}
