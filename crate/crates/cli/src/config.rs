//! Flat `key = value` configuration with `[scenario]`, `[experiment]` and
//! `[online]` sections. `#` and `;` start comments; unset keys keep their
//! defaults.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use dmwf_core::dmwf::{Padding, ProbeWidth};
use dmwf_core::netsim::{Algorithm, ExperimentConfig, ObservabilityMode, RunMode};
use dmwf_core::{Duty, ScenarioMode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            key: key.map(str::to_string),
            message: message.into(),
        }
    }

    pub fn general(message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}, key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "key `{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn number<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("`{v}` is not a valid number"))
}

fn optional<T: FromStr>(v: &str) -> Result<Option<T>, String> {
    if v.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        number(v).map(Some)
    }
}

fn boolean(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{v}` is not a boolean")),
    }
}

pub fn parse_algorithms(v: &str) -> Result<Vec<Algorithm>, String> {
    let algos = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| Algorithm::parse(s).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    if algos.is_empty() {
        return Err("empty algorithm list".into());
    }
    Ok(algos)
}

fn padding(v: &str) -> Result<Padding, String> {
    match v.to_ascii_lowercase().as_str() {
        "zeros" => Ok(Padding::Zeros),
        "ones" => Ok(Padding::Ones),
        "random" => Ok(Padding::Random(0)),
        s => match s.strip_prefix("random:") {
            Some(seed) => number(seed).map(Padding::Random),
            None => Err(format!("unknown padding `{v}`")),
        },
    }
}

fn padding_text(p: Padding) -> String {
    match p {
        Padding::Zeros => "zeros".into(),
        Padding::Ones => "ones".into(),
        Padding::Random(s) => format!("random:{s}"),
    }
}

fn duty(v: &str) -> Result<Duty, String> {
    match v.to_ascii_lowercase().as_str() {
        "always_on" => Ok(Duty::AlwaysOn),
        "always_off" => Ok(Duty::AlwaysOff),
        s => {
            let (on, off) = s.split_once(':').ok_or_else(|| format!("duty `{v}` is not always_on, always_off or ON:OFF"))?;
            Ok(Duty::Blocks {
                on: number(on)?,
                off: number(off)?,
            })
        }
    }
}

fn duty_text(d: Duty) -> String {
    match d {
        Duty::AlwaysOn => "always_on".into(),
        Duty::AlwaysOff => "always_off".into(),
        Duty::Blocks { on, off } => format!("{on}:{off}"),
    }
}

fn observability(v: &str) -> Result<ObservabilityMode, String> {
    if v.eq_ignore_ascii_case("exact") {
        return Ok(ObservabilityMode::Exact);
    }
    let rest = v
        .strip_prefix("threshold:")
        .ok_or_else(|| format!("observability `{v}` is not exact or threshold:DELTA[:LO:HI]"))?;
    let parts: Vec<&str> = rest.split(':').collect();
    match parts.as_slice() {
        [delta] => Ok(ObservabilityMode::threshold(number(delta)?)),
        [delta, lo, hi] => Ok(ObservabilityMode::Threshold {
            delta_db: number(delta)?,
            leakage_db: (number(lo)?, number(hi)?),
        }),
        _ => Err(format!("observability `{v}` has the wrong number of fields")),
    }
}

fn observability_text(o: ObservabilityMode) -> String {
    match o {
        ObservabilityMode::Exact => "exact".into(),
        ObservabilityMode::Threshold { delta_db, leakage_db } => {
            format!("threshold:{delta_db}:{}:{}", leakage_db.0, leakage_db.1)
        }
    }
}

fn width(v: &str) -> Result<ProbeWidth, String> {
    match v.to_ascii_lowercase().as_str() {
        "reduced" => Ok(ProbeWidth::Reduced),
        "full" => Ok(ProbeWidth::Full),
        _ => Err(format!("unknown probe width `{v}`")),
    }
}

fn width_text(w: ProbeWidth) -> &'static str {
    match w {
        ProbeWidth::Reduced => "reduced",
        ProbeWidth::Full => "full",
    }
}

fn sensors(v: &str) -> Result<Vec<usize>, String> {
    v.split(',').map(|s| number(s.trim())).collect()
}

fn set(cfg: &mut ExperimentConfig, section: &str, key: &str, v: &str) -> Result<(), String> {
    let sc = &mut cfg.scenario;
    let on = &mut cfg.online;
    match (section, key) {
        ("scenario", "nodes") => sc.nodes = number(v)?,
        ("scenario", "sensors") => sc.sensors = sensors(v)?,
        ("scenario", "speech_sources") => sc.speech_sources = number(v)?,
        ("scenario", "noise_sources") => sc.noise_sources = number(v)?,
        ("scenario", "desired_channels") => sc.desired_channels = number(v)?,
        ("scenario", "speech_power") => sc.speech_power = number(v)?,
        ("scenario", "noise_power") => sc.noise_power = number(v)?,
        ("scenario", "selfnoise_power") => sc.selfnoise_power = number(v)?,
        ("scenario", "mode") => sc.mode = ScenarioMode::parse(v).map_err(|e| e.to_string())?,
        ("experiment", "mode") => cfg.mode = RunMode::parse(v).map_err(|e| e.to_string())?,
        ("experiment", "algorithms") => cfg.algorithms = parse_algorithms(v)?,
        ("experiment", "n_ds") => cfg.n_ds = number(v)?,
        ("experiment", "iterations") => cfg.iterations = number(v)?,
        ("experiment", "trials") => cfg.trials = number(v)?,
        ("experiment", "seed") => cfg.seed = number(v)?,
        ("experiment", "gevd_rank") => cfg.gevd_rank = optional(v)?,
        ("experiment", "probe_width") => cfg.probe_width = width(v)?,
        ("experiment", "padding") => cfg.padding = padding(v)?,
        ("experiment", "relaxation") => cfg.relaxation = number(v)?,
        ("online", "bins") => on.bins = number(v)?,
        ("online", "frames") => on.frames = number(v)?,
        ("online", "segment_frames") => on.segment_frames = optional(v)?,
        ("online", "beta") => on.beta = number(v)?,
        ("online", "discovery_beta") => on.discovery_beta = number(v)?,
        ("online", "warm_start") => on.warm_start = boolean(v)?,
        ("online", "rebase") => on.rebase = boolean(v)?,
        ("online", "duty") => on.duty = duty(v)?,
        ("online", "observability") => on.observability = observability(v)?,
        ("online", "danse_period") => on.danse_period = number(v)?,
        ("online", "refresh") => on.refresh = number(v)?,
        ("online", "ser_window") => on.ser_window = number(v)?,
        ("online", "ser_stride") => on.ser_stride = number(v)?,
        ("online", "keep_weight") => on.keep_weight = number(v)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

const SECTIONS: [&str; 3] = ["scenario", "experiment", "online"];

/// Parses a configuration; `sensors` may be a single count applied to every node.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut section: Option<String> = None;
    let mut seen = BTreeSet::new();
    let mut sensors_line = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line_no, None, "unterminated section header"))?
                .trim()
                .to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ConfigError::at(line_no, None, format!("unknown section [{name}]")));
            }
            section = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line_no, None, "expected `key = value`"))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        let sec = section
            .as_deref()
            .ok_or_else(|| ConfigError::at(line_no, Some(&key), "key outside of any section"))?;
        if !seen.insert((sec.to_string(), key.clone())) {
            return Err(ConfigError::at(line_no, Some(&key), format!("duplicate key in [{sec}]")));
        }
        set(&mut cfg, sec, &key, value).map_err(|m| ConfigError::at(line_no, Some(&key), m))?;
        if sec == "scenario" && key == "sensors" {
            sensors_line = Some(line_no);
        }
    }
    let nodes = cfg.scenario.nodes;
    if cfg.scenario.sensors.len() == 1 && nodes != 1 {
        cfg.scenario.sensors = vec![cfg.scenario.sensors[0]; nodes];
    } else if cfg.scenario.sensors.len() != nodes {
        let msg = format!("{} sensor counts for {nodes} nodes", cfg.scenario.sensors.len());
        return Err(match sensors_line {
            Some(l) => ConfigError::at(l, Some("sensors"), msg),
            None => ConfigError {
                line: None,
                key: Some("sensors".into()),
                message: msg,
            },
        });
    }
    cfg.validate().map_err(|e| ConfigError::general(e.to_string()))?;
    Ok(cfg)
}

fn opt_text<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

/// Canonical text form; `parse_config(&serialize_config(c)) == c`.
pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    let sc = &cfg.scenario;
    let on = &cfg.online;
    let mut s = String::new();
    let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let algos = cfg.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>().join(",");
    let _ = write!(
        s,
        "[scenario]\nnodes = {}\nsensors = {}\nspeech_sources = {}\nnoise_sources = {}\ndesired_channels = {}\n\
         speech_power = {}\nnoise_power = {}\nselfnoise_power = {}\nmode = {}\n",
        sc.nodes,
        list(&sc.sensors),
        sc.speech_sources,
        sc.noise_sources,
        sc.desired_channels,
        sc.speech_power,
        sc.noise_power,
        sc.selfnoise_power,
        sc.mode.as_str()
    );
    let _ = write!(
        s,
        "\n[experiment]\nmode = {}\nalgorithms = {algos}\nn_ds = {}\niterations = {}\ntrials = {}\nseed = {}\n\
         gevd_rank = {}\nprobe_width = {}\npadding = {}\nrelaxation = {}\n",
        cfg.mode.name(),
        cfg.n_ds,
        cfg.iterations,
        cfg.trials,
        cfg.seed,
        opt_text(cfg.gevd_rank),
        width_text(cfg.probe_width),
        padding_text(cfg.padding),
        cfg.relaxation
    );
    let _ = write!(
        s,
        "\n[online]\nbins = {}\nframes = {}\nsegment_frames = {}\nbeta = {}\ndiscovery_beta = {}\nwarm_start = {}\n\
         rebase = {}\nduty = {}\nobservability = {}\ndanse_period = {}\nrefresh = {}\nser_window = {}\n\
         ser_stride = {}\nkeep_weight = {}\n",
        on.bins,
        on.frames,
        opt_text(on.segment_frames),
        on.beta,
        on.discovery_beta,
        on.warm_start,
        on.rebase,
        duty_text(on.duty),
        observability_text(on.observability),
        on.danse_period,
        on.refresh,
        on.ser_window,
        on.ser_stride,
        on.keep_weight
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn scalar_sensor_count_is_broadcast() {
        let c = parse_config("[scenario]\nnodes = 3\nsensors = 4\n").unwrap();
        assert_eq!(c.scenario.sensors, vec![4, 4, 4]);
    }

    #[test]
    fn errors_carry_line_and_key() {
        let e = parse_config("[experiment]\n# comment\ntrials = many\n").unwrap_err();
        assert_eq!((e.line, e.key.as_deref()), (Some(3), Some("trials")));
        let e = parse_config("[experiment]\nbogus = 1\n").unwrap_err();
        assert_eq!((e.line, e.key.as_deref()), (Some(2), Some("bogus")));
        let e = parse_config("[nowhere]\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        let e = parse_config("trials = 3\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        let e = parse_config("[experiment]\ntrials = 2\ntrials = 3\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = parse_config("[scenario]\nnodes = 3\nsensors = 4,4\n").unwrap_err();
        assert_eq!((e.line, e.key.as_deref()), (Some(3), Some("sensors")));
    }

    #[test]
    fn invalid_values_are_rejected_after_parsing() {
        assert!(parse_config("[experiment]\ntrials = 0\n").is_err());
        assert!(parse_config("[online]\nbeta = 1.5\n").is_err());
    }

    #[test]
    fn option_syntaxes() {
        let c = parse_config(
            "[experiment]\npadding = random:5\ngevd_rank = 2\n[online]\nduty = always_on\nobservability = threshold:-10\nsegment_frames = none\n",
        )
        .unwrap();
        assert_eq!(c.padding, Padding::Random(5));
        assert_eq!(c.gevd_rank, Some(2));
        assert_eq!(c.online.duty, Duty::AlwaysOn);
        assert_eq!(c.online.observability, ObservabilityMode::threshold(-10.0));
        assert_eq!(c.online.segment_frames, None);
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        let scenario = (2usize..7, prop::collection::vec(1usize..8, 6), 1usize..3, 0usize..3, prop::bool::ANY, 0.01f64..10.0);
        let experiment = (
            prop::sample::subsequence(Algorithm::ALL.to_vec(), 1..8),
            1usize..20,
            any::<u64>(),
            prop::option::of(1usize..4),
            prop::bool::ANY,
            prop_oneof![Just(Padding::Zeros), Just(Padding::Ones), any::<u64>().prop_map(Padding::Random)],
            0.01f64..1.0,
        );
        let online = (
            prop::option::of(1usize..500),
            0.0f64..0.999,
            prop::bool::ANY,
            prop_oneof![Just(Duty::AlwaysOn), Just(Duty::AlwaysOff), (0usize..9, 0usize..9).prop_map(|(on, off)| Duty::Blocks { on, off })],
            prop_oneof![Just(ObservabilityMode::Exact), (-30.0f64..10.0).prop_map(ObservabilityMode::threshold)],
        );
        (scenario, experiment, online).prop_map(|(sc, ex, on)| {
            let mut c = ExperimentConfig::default();
            c.scenario.nodes = sc.0;
            c.scenario.sensors = sc.1[..sc.0].to_vec();
            c.scenario.speech_sources = sc.2;
            c.scenario.noise_sources = sc.3;
            c.scenario.mode = if sc.4 { ScenarioMode::Fods } else { ScenarioMode::Pos };
            c.scenario.noise_power = sc.5;
            c.algorithms = ex.0;
            c.mode = if c.algorithms.contains(&Algorithm::Unprocessed) { RunMode::Online } else { RunMode::BatchOracle };
            c.n_ds = ex.1;
            c.seed = ex.2;
            c.gevd_rank = ex.3;
            c.probe_width = if ex.4 { ProbeWidth::Full } else { ProbeWidth::Reduced };
            c.padding = ex.5;
            c.relaxation = ex.6;
            c.online.segment_frames = on.0;
            c.online.beta = on.1;
            c.online.warm_start = on.2;
            c.online.duty = on.3;
            c.online.observability = on.4;
            c
        })
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(cfg in arb_config()) {
            let text = serialize_config(&cfg);
            let back = parse_config(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(serialize_config(&back), text);
        }
    }
}
