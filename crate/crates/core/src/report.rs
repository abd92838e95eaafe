//! CSV tables and gnuplot data files for experiment results.
//!
//! Floats are written in shortest round-trip scientific form so that
//! identical results always serialize to identical bytes.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::metrics::MetricTrace;
use crate::netsim::{average_mse, Algorithm, BatchTrial, CompressionFactors, NodeComplexity, OnlineTrial, Outcome};

pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

fn node_label(node: Option<usize>) -> String {
    node.map_or_else(|| "mean".to_string(), |k| k.to_string())
}

struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(out)?;
        Ok(Self { w })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).map_err(out)
    }

    fn finish(self) -> Result<String> {
        let bytes = self.w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Output(e.to_string()))
    }
}

fn out(e: csv::Error) -> Error {
    Error::Output(e.to_string())
}

/// `trial,seed,algo,iteration,mse_w`, one row per completed iteration.
pub fn mse_csv(trials: &[BatchTrial]) -> Result<String> {
    let mut t = Table::new(&["trial", "seed", "algo", "iteration", "mse_w"])?;
    for tr in trials {
        for (algo, outcome) in &tr.results {
            if let Outcome::Completed(series) = outcome {
                for &(it, v) in series {
                    t.row([tr.trial.to_string(), tr.seed.to_string(), algo.name().into(), it.to_string(), format_f64(v)])?;
                }
            }
        }
    }
    t.finish()
}

fn batch_algorithms(trials: &[BatchTrial]) -> Vec<Algorithm> {
    let mut algos: Vec<Algorithm> = trials.iter().flat_map(|t| t.results.keys().copied()).collect();
    algos.sort();
    algos.dedup();
    algos
}

fn mean_mse_series(trials: &[BatchTrial]) -> Vec<(Algorithm, Vec<(usize, f64)>)> {
    batch_algorithms(trials)
        .into_iter()
        .map(|a| (a, average_mse(trials, a)))
        .filter(|(_, s)| !s.is_empty())
        .collect()
}

/// `algo,iteration,mse_w`, averaged over the trials where the algorithm completed.
pub fn mse_mean_csv(trials: &[BatchTrial]) -> Result<String> {
    let mut t = Table::new(&["algo", "iteration", "mse_w"])?;
    for (algo, series) in mean_mse_series(trials) {
        for (it, v) in series {
            t.row([algo.name().to_string(), it.to_string(), format_f64(v)])?;
        }
    }
    t.finish()
}

/// `trial,seed,algo,frame,node,ser_db`; node `mean` is the network average.
pub fn ser_csv(trials: &[OnlineTrial]) -> Result<String> {
    let mut t = Table::new(&["trial", "seed", "algo", "frame", "node", "ser_db"])?;
    for tr in trials {
        for (algo, outcome) in &tr.results {
            if let Outcome::Completed(trace) = outcome {
                for p in trace.points() {
                    t.row([
                        tr.trial.to_string(),
                        tr.seed.to_string(),
                        algo.name().into(),
                        p.index.to_string(),
                        node_label(p.node),
                        format_f64(p.value),
                    ])?;
                }
            }
        }
    }
    t.finish()
}

fn mean_ser_series(trials: &[OnlineTrial]) -> Vec<(Algorithm, Vec<(usize, f64)>)> {
    let mut by_algo: BTreeMap<Algorithm, Vec<&MetricTrace>> = BTreeMap::new();
    for tr in trials {
        for (algo, outcome) in &tr.results {
            let entry = by_algo.entry(*algo).or_default();
            if let Outcome::Completed(trace) = outcome {
                entry.push(trace);
            }
        }
    }
    by_algo
        .into_iter()
        .filter_map(|(algo, traces)| {
            let series: Vec<Vec<(usize, f64)>> = traces.iter().map(|t| t.series("ser", None)).collect();
            let first = series.first()?;
            let mean = first
                .iter()
                .enumerate()
                .filter(|(i, (idx, _))| series.iter().all(|s| s.get(*i).is_some_and(|p| p.0 == *idx)))
                .map(|(i, &(idx, _))| (idx, series.iter().map(|s| s[i].1).sum::<f64>() / series.len() as f64))
                .collect::<Vec<_>>();
            (!mean.is_empty()).then_some((algo, mean))
        })
        .collect()
}

/// `algo,frame,ser_db`, network-mean SER averaged over completed trials.
pub fn ser_mean_csv(trials: &[OnlineTrial]) -> Result<String> {
    let mut t = Table::new(&["algo", "frame", "ser_db"])?;
    for (algo, series) in mean_ser_series(trials) {
        for (frame, v) in series {
            t.row([algo.name().to_string(), frame.to_string(), format_f64(v)])?;
        }
    }
    t.finish()
}

/// Failure record of one algorithm in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureRow {
    pub trial: usize,
    pub seed: u64,
    pub algo: Algorithm,
    pub index: usize,
    pub message: String,
}

pub fn collect_failures<T>(trial: usize, seed: u64, results: &BTreeMap<Algorithm, Outcome<T>>) -> Vec<FailureRow> {
    results
        .iter()
        .filter_map(|(algo, o)| match o {
            Outcome::Failed { index, message } => Some(FailureRow {
                trial,
                seed,
                algo: *algo,
                index: *index,
                message: message.clone(),
            }),
            Outcome::Completed(_) => None,
        })
        .collect()
}

/// `trial,seed,algo,index,message`.
pub fn failures_csv(rows: &[FailureRow]) -> Result<String> {
    let mut t = Table::new(&["trial", "seed", "algo", "index", "message"])?;
    for r in rows {
        t.row([r.trial.to_string(), r.seed.to_string(), r.algo.name().into(), r.index.to_string(), r.message.clone()])?;
    }
    t.finish()
}

/// One compression factor of one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressionRow {
    pub trial: usize,
    pub seed: u64,
    /// `dmwf_formula`, `dmwf_measured` or `danse`.
    pub kind: &'static str,
    pub ratio: Ratio<u64>,
}

pub fn compression_rows(trial: usize, seed: u64, cf: &CompressionFactors) -> Vec<CompressionRow> {
    let mut rows = vec![CompressionRow {
        trial,
        seed,
        kind: "dmwf_formula",
        ratio: cf.dmwf_formula,
    }];
    if let Some(r) = cf.dmwf_measured {
        rows.push(CompressionRow {
            trial,
            seed,
            kind: "dmwf_measured",
            ratio: r,
        });
    }
    if let Some(r) = cf.danse {
        rows.push(CompressionRow {
            trial,
            seed,
            kind: "danse",
            ratio: r,
        });
    }
    rows
}

fn ratio_value(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `trial,seed,kind,numerator,denominator,value`.
pub fn compression_csv(rows: &[CompressionRow]) -> Result<String> {
    let mut t = Table::new(&["trial", "seed", "kind", "numerator", "denominator", "value"])?;
    for r in rows {
        t.row([
            r.trial.to_string(),
            r.seed.to_string(),
            r.kind.into(),
            r.ratio.numer().to_string(),
            r.ratio.denom().to_string(),
            format_f64(ratio_value(&r.ratio)),
        ])?;
    }
    t.finish()
}

/// `trial,node,dmwf,danse` squared solve dimensions.
pub fn complexity_csv(rows: &[(usize, Vec<NodeComplexity>)]) -> Result<String> {
    let mut t = Table::new(&["trial", "node", "dmwf", "danse"])?;
    for (trial, nodes) in rows {
        for c in nodes {
            t.row([trial.to_string(), c.node.to_string(), c.dmwf.to_string(), c.danse.to_string()])?;
        }
    }
    t.finish()
}

fn gnuplot_blocks(title: &str, columns: &str, series: &[(Algorithm, Vec<(usize, f64)>)]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::EmptyTrace(format!("no completed series for {title}")));
    }
    let mut s = format!("# {title}\n# columns: {columns}\n");
    for (i, (algo, points)) in series.iter().enumerate() {
        if i > 0 {
            s.push_str("\n\n");
        }
        s.push_str(&format!("# series {i}: {}\n", algo.name()));
        for (x, y) in points {
            s.push_str(&format!("{x} {}\n", format_f64(*y)));
        }
    }
    Ok(s)
}

/// Trial-mean MSE_W against iteration, one gnuplot index block per algorithm.
pub fn mse_plot(trials: &[BatchTrial]) -> Result<String> {
    gnuplot_blocks("mse_w vs iteration", "iteration mse_w", &mean_mse_series(trials))
}

/// Trial-mean network SER against frame, one gnuplot index block per algorithm.
pub fn ser_plot(trials: &[OnlineTrial]) -> Result<String> {
    gnuplot_blocks("ser vs frame", "frame ser_db", &mean_ser_series(trials))
}

/// Compression factors as a gnuplot table, `trial kind value`.
pub fn compression_plot(rows: &[CompressionRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyTrace("no compression factors".into()));
    }
    let mut s = "# compression factors\n# columns: trial kind value\n".to_string();
    for r in rows {
        s.push_str(&format!("{} {} {}\n", r.trial, r.kind, format_f64(ratio_value(&r.ratio))));
    }
    Ok(s)
}
