//! Weighted overlap-add STFT with a square-root Hann window at 50% overlap.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numerics::{c64, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolaConfig {
    pub dft_len: usize,
    pub sample_rate: f64,
}

impl Default for WolaConfig {
    fn default() -> Self {
        Self {
            dft_len: 1024,
            sample_rate: 16_000.0,
        }
    }
}

impl WolaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dft_len < 2 || !self.dft_len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("DFT length {} is not a power of two", self.dft_len)));
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        Ok(())
    }

    pub fn hop(&self) -> usize {
        self.dft_len / 2
    }

    pub fn bins(&self) -> usize {
        self.dft_len / 2 + 1
    }

    /// STFT frames per second.
    pub fn frame_rate(&self) -> f64 {
        self.sample_rate / self.hop() as f64
    }

    /// Periodic square-root Hann window; its square overlap-adds to one at hop `N/2`.
    pub fn window(&self) -> Vec<f64> {
        let n = self.dft_len as f64;
        (0..self.dft_len)
            .map(|i| (0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n).cos()).sqrt())
            .collect()
    }

    /// Number of full frames that fit in `len` samples.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.dft_len {
            0
        } else {
            (len - self.dft_len) / self.hop() + 1
        }
    }

    /// Samples covered by two frames after synthesis of `frames` frames.
    pub fn interior(&self, frames: usize) -> std::ops::Range<usize> {
        if frames < 2 {
            return 0..0;
        }
        self.hop()..frames * self.hop()
    }
}

pub struct Wola {
    cfg: WolaConfig,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Wola {
    pub fn new(cfg: WolaConfig) -> Result<Self> {
        cfg.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            window: cfg.window(),
            forward: planner.plan_fft_forward(cfg.dft_len),
            inverse: planner.plan_fft_inverse(cfg.dft_len),
            cfg,
        })
    }

    pub fn config(&self) -> &WolaConfig {
        &self.cfg
    }

    /// Windowed one-sided spectra, one per hop.
    pub fn analyze(&self, signal: &[f64]) -> Result<Vec<Vec<C64>>> {
        let n = self.cfg.dft_len;
        if signal.len() < n {
            return Err(Error::LengthMismatch(format!(
                "signal of {} samples is shorter than one {n}-point frame",
                signal.len()
            )));
        }
        let frames = self.cfg.frame_count(signal.len());
        let mut buf = vec![c64(0.0, 0.0); n];
        Ok((0..frames)
            .map(|f| {
                let start = f * self.cfg.hop();
                for (i, b) in buf.iter_mut().enumerate() {
                    *b = c64(signal[start + i] * self.window[i], 0.0);
                }
                self.forward.process(&mut buf);
                buf[..self.cfg.bins()].to_vec()
            })
            .collect())
    }

    /// Inverse transform, synthesis window and overlap-add.
    pub fn synthesize(&self, frames: &[Vec<C64>]) -> Result<Vec<f64>> {
        let n = self.cfg.dft_len;
        let hop = self.cfg.hop();
        let bins = self.cfg.bins();
        if frames.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = vec![0.0; (frames.len() - 1) * hop + n];
        let mut buf = vec![c64(0.0, 0.0); n];
        for (f, spec) in frames.iter().enumerate() {
            if spec.len() != bins {
                return Err(Error::LengthMismatch(format!(
                    "frame {f} has {} bins, expected {bins}",
                    spec.len()
                )));
            }
            buf[..bins].copy_from_slice(spec);
            for i in 1..n - bins + 1 {
                buf[n - i] = spec[i].conj();
            }
            self.inverse.process(&mut buf);
            let start = f * hop;
            for i in 0..n {
                out[start + i] += buf[i].re / n as f64 * self.window[i];
            }
        }
        Ok(out)
    }
}

pub fn wola_analyze(cfg: WolaConfig, signal: &[f64]) -> Result<Vec<Vec<C64>>> {
    Wola::new(cfg)?.analyze(signal)
}

pub fn wola_synthesize(cfg: WolaConfig, frames: &[Vec<C64>]) -> Result<Vec<f64>> {
    Wola::new(cfg)?.synthesize(frames)
}

/// Headerless little-endian `f64` samples.
pub fn read_raw_f64(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::LengthMismatch(format!("{} bytes is not a whole number of f64 samples", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn write_raw_f64(samples: &[f64]) -> Vec<u8> {
    samples.iter().flat_map(|s| s.to_le_bytes()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn white(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn window_squares_sum_to_one() {
        let cfg = WolaConfig::default();
        let w = cfg.window();
        for i in 0..cfg.hop() {
            let s = w[i] * w[i] + w[i + cfg.hop()] * w[i + cfg.hop()];
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_round_trip_reconstructs_interior() {
        let cfg = WolaConfig::default();
        let x = white(16_000, 1);
        let wola = Wola::new(cfg).unwrap();
        let frames = wola.analyze(&x).unwrap();
        let y = wola.synthesize(&frames).unwrap();
        let r = cfg.interior(frames.len());
        let err: f64 = r.clone().map(|i| (x[i] - y[i]).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = r.map(|i| x[i].powi(2)).sum::<f64>().sqrt();
        assert!(err / norm <= 1e-10, "{}", err / norm);
    }

    #[test]
    fn zero_signal_gives_zero_frames() {
        let frames = wola_analyze(WolaConfig::default(), &vec![0.0; 4096]).unwrap();
        assert!(frames.iter().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn bin_centred_tone_concentrates_energy() {
        let cfg = WolaConfig::default();
        let bin = 37;
        let x: Vec<f64> = (0..8192)
            .map(|t| (2.0 * std::f64::consts::PI * bin as f64 * t as f64 / cfg.dft_len as f64).cos())
            .collect();
        for spec in wola_analyze(cfg, &x).unwrap() {
            let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
            // The sqrt-Hann main lobe spans the centre bin and its two neighbours.
            let lobe: f64 = spec[bin - 1..=bin + 1].iter().map(|z| z.norm_sqr()).sum();
            assert!(lobe / total > 0.99, "{}", lobe / total);
            let peak = spec.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
            assert_eq!(spec[bin].norm_sqr(), peak);
        }
    }

    #[test]
    fn analysis_is_linear() {
        let cfg = WolaConfig {
            dft_len: 256,
            sample_rate: 16_000.0,
        };
        let (a, b) = (white(2048, 2), white(2048, 3));
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - 0.5 * y).collect();
        let (fa, fb, fm) = (
            wola_analyze(cfg, &a).unwrap(),
            wola_analyze(cfg, &b).unwrap(),
            wola_analyze(cfg, &mix).unwrap(),
        );
        for ((sa, sb), sm) in fa.iter().zip(&fb).zip(&fm) {
            for i in 0..cfg.bins() {
                assert!((sa[i] * 2.0 - sb[i] * 0.5 - sm[i]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn short_signal_and_wrong_bins_rejected() {
        let cfg = WolaConfig::default();
        assert!(matches!(wola_analyze(cfg, &[0.0; 100]), Err(Error::LengthMismatch(_))));
        assert!(matches!(
            wola_synthesize(cfg, &[vec![c64(0.0, 0.0); 3]]),
            Err(Error::LengthMismatch(_))
        ));
        assert!(WolaConfig { dft_len: 1000, sample_rate: 1.0 }.validate().is_err());
    }

    #[test]
    fn raw_samples_round_trip() {
        let x = vec![1.5, -0.25, f64::MIN_POSITIVE];
        assert_eq!(read_raw_f64(&write_raw_f64(&x)).unwrap(), x);
        assert!(read_raw_f64(&[0u8; 7]).is_err());
    }
}
