//! Evaluation metrics: filter MSE, windowed SER, oracle VAD, metric traces.

use std::collections::BTreeMap;

use crate::error::{check_dim, Error, Result};
use crate::numerics::{frobenius_sqr, CMatrix};

/// Default relative energy threshold of the oracle VAD.
pub const VAD_THRESHOLD: f64 = 1e-4;

/// `(1/K) Σ_k ‖W_k − Ŵ_k‖²_F`.
pub fn mse_w(w: &[CMatrix], w_hat: &[CMatrix]) -> Result<f64> {
    check_dim(w_hat.len(), w.len(), "mse_w node count")?;
    if w.is_empty() {
        return Err(Error::InvalidParameter("mse_w needs at least one node".into()));
    }
    let mut total = 0.0;
    for (a, b) in w.iter().zip(w_hat) {
        check_dim(b.nrows(), a.nrows(), "mse_w filter rows")?;
        check_dim(b.ncols(), a.ncols(), "mse_w filter columns")?;
        total += frobenius_sqr(&(a - b));
    }
    Ok(total / w.len() as f64)
}

/// `10 log10(signal / error)`; `+∞` when the error is exactly zero.
pub fn ser_from_energies(signal: f64, error: f64) -> Result<f64> {
    if signal <= 0.0 {
        return Err(Error::UndefinedMetric("signal energy is zero over the window".into()));
    }
    if error == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / error).log10())
}

/// SER over samples `t − Δ ..= t`.
pub fn ser(d: &[f64], d_hat: &[f64], t: usize, window: usize) -> Result<f64> {
    if d.len() != d_hat.len() {
        return Err(Error::LengthMismatch(format!("{} reference vs {} estimate samples", d.len(), d_hat.len())));
    }
    if t < window || t >= d.len() {
        return Err(Error::InvalidParameter(format!(
            "SER index {t} needs {window} <= t < {}",
            d.len()
        )));
    }
    let (mut sig, mut err) = (0.0, 0.0);
    for i in t - window..=t {
        sig += d[i] * d[i];
        err += (d[i] - d_hat[i]).powi(2);
    }
    ser_from_energies(sig, err)
}

/// Active iff energy exceeds `threshold` times the largest energy.
pub fn oracle_vad_energies(energies: &[f64], threshold: f64) -> Vec<bool> {
    let max = energies.iter().copied().fold(0.0, f64::max);
    energies.iter().map(|&e| max > 0.0 && e > threshold * max).collect()
}

/// Frame-wise energy VAD on clean speech frames.
pub fn oracle_vad<F: AsRef<[f64]>>(frames: &[F], threshold: f64) -> Vec<bool> {
    let energies: Vec<f64> = frames.iter().map(|f| f.as_ref().iter().map(|x| x * x).sum()).collect();
    oracle_vad_energies(&energies, threshold)
}

/// One metric sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPoint {
    pub index: usize,
    /// `None` for network-level values.
    pub node: Option<usize>,
    pub metric: String,
    pub value: f64,
}

/// Metric samples with a strictly increasing index per (metric, node) series.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricTrace {
    points: Vec<MetricPoint>,
    last: BTreeMap<(String, Option<usize>), usize>,
}

impl MetricTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, index: usize, node: Option<usize>, metric: &str, value: f64) -> Result<()> {
        let key = (metric.to_string(), node);
        if let Some(&prev) = self.last.get(&key) {
            if index <= prev {
                return Err(Error::InvalidParameter(format!(
                    "{metric} index {index} does not follow {prev}"
                )));
            }
        }
        self.last.insert(key, index);
        self.points.push(MetricPoint {
            index,
            node,
            metric: metric.to_string(),
            value,
        });
        Ok(())
    }

    pub fn points(&self) -> &[MetricPoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(index, value)` pairs of one series.
    pub fn series(&self, metric: &str, node: Option<usize>) -> Vec<(usize, f64)> {
        self.points
            .iter()
            .filter(|p| p.metric == metric && p.node == node)
            .map(|p| (p.index, p.value))
            .collect()
    }

    pub fn value_at(&self, metric: &str, node: Option<usize>, index: usize) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.metric == metric && p.node == node && p.index == index)
            .map(|p| p.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c64;
    use proptest::prelude::*;

    #[test]
    fn equal_filters_have_zero_mse() {
        let w = vec![CMatrix::identity(3, 1), CMatrix::identity(2, 1)];
        assert_eq!(mse_w(&w, &w).unwrap(), 0.0);
    }

    #[test]
    fn single_entry_difference() {
        let a = vec![CMatrix::from_element(2, 1, c64(0.0, 0.0))];
        let mut b = a.clone();
        b[0][(1, 0)] = c64(2.0, 0.0);
        assert_eq!(mse_w(&a, &b).unwrap(), 4.0);
    }

    #[test]
    fn mse_rejects_mismatched_shapes() {
        let a = vec![CMatrix::zeros(2, 1)];
        let b = vec![CMatrix::zeros(3, 1)];
        assert!(matches!(mse_w(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ser_edge_cases() {
        let d = vec![1.0, -2.0, 0.5, 3.0];
        assert_eq!(ser(&d, &d, 3, 3).unwrap(), f64::INFINITY);
        assert!(ser(&d, &[0.0; 4], 3, 3).unwrap().abs() < 1e-12);
        assert!(matches!(ser(&[0.0; 4], &d, 3, 2), Err(Error::UndefinedMetric(_))));
        assert!(ser(&d, &d, 1, 2).is_err());
    }

    #[test]
    fn ser_decreases_with_error_power() {
        let d: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.1).sin()).collect();
        let noise: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.5).collect();
        let mut prev = f64::INFINITY;
        for level in [0.01, 0.03, 0.1, 0.3, 1.0] {
            let est: Vec<f64> = d.iter().zip(&noise).map(|(x, n)| x + level * n).collect();
            let v = ser(&d, &est, 999, 999).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn vad_thresholds() {
        let frames = vec![vec![0.0; 4], vec![1.0; 4], vec![1e-3; 4]];
        assert_eq!(oracle_vad(&frames, VAD_THRESHOLD), vec![false, true, false]);
    }

    #[test]
    fn trace_enforces_monotone_index() {
        let mut t = MetricTrace::new();
        t.push(0, Some(0), "ser", 1.0).unwrap();
        t.push(0, Some(1), "ser", 1.0).unwrap();
        assert!(t.push(0, Some(0), "ser", 2.0).is_err());
        t.push(5, Some(0), "ser", 2.0).unwrap();
        assert_eq!(t.series("ser", Some(0)), vec![(0, 1.0), (5, 2.0)]);
    }

    fn arb_filters() -> impl Strategy<Value = (Vec<CMatrix>, Vec<CMatrix>)> {
        (1usize..4, 1usize..5, 1usize..3).prop_flat_map(|(k, m, d)| {
            let mat = move || {
                prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), m * d)
                    .prop_map(move |v| CMatrix::from_iterator(m, d, v.into_iter().map(|(r, i)| c64(r, i))))
            };
            (prop::collection::vec(mat(), k), prop::collection::vec(mat(), k))
        })
    }

    proptest! {
        #[test]
        fn mse_matches_naive_sum_and_is_symmetric((a, b) in arb_filters()) {
            let mut naive = 0.0;
            for (x, y) in a.iter().zip(&b) {
                for i in 0..x.len() {
                    let diff = x[i] - y[i];
                    naive += diff.re * diff.re + diff.im * diff.im;
                }
            }
            naive /= a.len() as f64;
            let v = mse_w(&a, &b).unwrap();
            prop_assert!((v - naive).abs() <= 1e-12 * naive.max(1.0));
            prop_assert_eq!(v, mse_w(&b, &a).unwrap());
            prop_assert!(v >= 0.0);
            prop_assert_eq!(v == 0.0, a == b);
        }
    }
}
