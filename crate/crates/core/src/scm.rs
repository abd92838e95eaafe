//! VAD-gated exponential averaging of spatial covariance matrices.

use crate::error::{check_dim, Error, Result};
use crate::numerics::{CMatrix, CVector, HermitianMatrix};
use crate::scenario::{Fidelity, ScmSet};

#[derive(Debug, Clone, PartialEq)]
pub struct ScmTracker {
    dim: usize,
    beta: f64,
    ryy: HermitianMatrix,
    rnnv: HermitianMatrix,
    frames_seen_speech: usize,
    frames_seen_noise: usize,
    primed: bool,
}

impl ScmTracker {
    /// Cold tracker; both matrices are seeded from the first frame's power.
    pub fn new(dim: usize, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("forgetting factor {beta} outside [0, 1)")));
        }
        Ok(Self {
            dim,
            beta,
            ryy: HermitianMatrix::zeros(dim),
            rnnv: HermitianMatrix::zeros(dim),
            frames_seen_speech: 0,
            frames_seen_noise: 0,
            primed: false,
        })
    }

    /// Tracker starting from precomputed matrices.
    pub fn warm(ryy: HermitianMatrix, rnnv: HermitianMatrix, beta: f64) -> Result<Self> {
        check_dim(ryy.dim(), rnnv.dim(), "warm-start matrices")?;
        let mut tr = Self::new(ryy.dim(), beta)?;
        tr.ryy = ryy;
        tr.rnnv = rnnv;
        tr.primed = true;
        Ok(tr)
    }

    pub fn from_scms(scms: &ScmSet, beta: f64) -> Result<Self> {
        Self::warm(scms.ryy.clone(), scms.rnnv.clone(), beta)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ryy(&self) -> &HermitianMatrix {
        &self.ryy
    }

    pub fn rnnv(&self) -> &HermitianMatrix {
        &self.rnnv
    }

    pub fn frames_seen_speech(&self) -> usize {
        self.frames_seen_speech
    }

    pub fn frames_seen_noise(&self) -> usize {
        self.frames_seen_noise
    }

    pub fn is_ready(&self) -> bool {
        self.primed || (self.frames_seen_speech > 0 && self.frames_seen_noise > 0)
    }

    pub fn update(&mut self, y: &CVector, vad: bool) -> Result<()> {
        check_dim(self.dim, y.len(), "tracker frame")?;
        if !self.primed && self.frames_seen_speech == 0 && self.frames_seen_noise == 0 {
            let init = HermitianMatrix::scaled_identity(self.dim, y.norm_squared() / self.dim.max(1) as f64);
            self.ryy = init.clone();
            self.rnnv = init;
        }
        if vad {
            self.ryy = self.ryy.exponential_update(self.beta, y);
            self.frames_seen_speech += 1;
        } else {
            self.rnnv = self.rnnv.exponential_update(self.beta, y);
            self.frames_seen_noise += 1;
        }
        Ok(())
    }

    /// Re-expresses both matrices for the input `Tᴴ y`: `R ← Tᴴ R T`.
    pub fn transform(&mut self, t: &CMatrix) -> Result<()> {
        check_dim(self.dim, t.nrows(), "tracker transform rows")?;
        check_dim(self.dim, t.ncols(), "tracker transform columns")?;
        self.ryy = self.ryy.project(t)?;
        self.rnnv = self.rnnv.project(t)?;
        Ok(())
    }

    /// `Ryy − Rnnv`; not forced to be PSD.
    pub fn speech_scm(&self) -> Result<HermitianMatrix> {
        if !self.is_ready() {
            return Err(Error::InsufficientData(format!(
                "{} speech and {} noise frames seen",
                self.frames_seen_speech, self.frames_seen_noise
            )));
        }
        self.ryy.sub(&self.rnnv)
    }

    pub fn snapshot(&self) -> Result<ScmSet> {
        Ok(ScmSet {
            rss: self.speech_scm()?,
            ryy: self.ryy.clone(),
            rnnv: self.rnnv.clone(),
            fidelity: Fidelity::Tracked,
        })
    }
}

/// Functional form of [`ScmTracker::update`].
pub fn scm_update(mut tr: ScmTracker, y: &CVector, vad: bool) -> Result<ScmTracker> {
    tr.update(y, vad)?;
    Ok(tr)
}

pub fn speech_scm(tr: &ScmTracker) -> Result<HermitianMatrix> {
    tr.speech_scm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c64, relative_error, CMatrix};
    use crate::scenario::{generate_scenario, oracle_scms, Duty, FrameGenerator, ScenarioMode, ScenarioParams};
    use proptest::prelude::*;

    fn vec_of(v: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&(r, i)| c64(r, i)))
    }

    #[test]
    fn transform_matches_tracking_transformed_frames() {
        let scms = oracle_scms(&generate_scenario(&ScenarioParams::uniform(2, 2, 1, 1, ScenarioMode::Fods, 4)).unwrap());
        let t = CMatrix::from_fn(4, 4, |r, c| c64((r * 4 + c) as f64 * 0.1 - 0.3, (r as f64 - c as f64) * 0.05));
        let mut a = ScmTracker::from_scms(&scms, 0.9).unwrap();
        let mut b = ScmTracker::warm(scms.ryy.project(&t).unwrap(), scms.rnnv.project(&t).unwrap(), 0.9).unwrap();
        let frames = [vec_of(&[(1.0, 0.5), (-0.2, 0.0), (0.3, 0.3), (0.0, -1.0)]), vec_of(&[(0.1, 0.0), (0.7, -0.4), (0.0, 0.2), (2.0, 0.0)])];
        for (i, y) in frames.iter().enumerate() {
            a.update(y, i == 0).unwrap();
            b.update(&(t.adjoint() * y), i == 0).unwrap();
        }
        a.transform(&t).unwrap();
        assert!(relative_error(a.ryy().as_matrix(), b.ryy().as_matrix()) < 1e-12);
        assert!(relative_error(a.rnnv().as_matrix(), b.rnnv().as_matrix()) < 1e-12);
        assert!(a.transform(&CMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn zero_beta_keeps_only_last_frame() {
        let y = vec_of(&[(1.0, 2.0), (-0.5, 0.3), (0.0, -1.0)]);
        let tr = scm_update(ScmTracker::new(3, 0.0).unwrap(), &y, true).unwrap();
        assert_eq!(tr.ryy().as_matrix(), &(&y * y.adjoint()));
    }

    #[test]
    fn constant_input_reaches_fixed_point() {
        let y = vec_of(&[(0.3, -0.7), (1.1, 0.2)]);
        let mut tr = ScmTracker::new(2, 0.967).unwrap();
        for _ in 0..1000 {
            tr.update(&y, true).unwrap();
        }
        let target = &y * y.adjoint();
        // Geometric series: the residual of the initial state decays as β^1000.
        let bound = 0.967f64.powi(1000) * 10.0 + 1e-12;
        assert!((tr.ryy().as_matrix() - &target).norm() < bound.max(1e-10));
    }

    #[test]
    fn only_gated_matrix_changes() {
        let mut tr = ScmTracker::warm(HermitianMatrix::identity(2), HermitianMatrix::identity(2), 0.9).unwrap();
        tr.update(&vec_of(&[(1.0, 0.0), (0.0, 1.0)]), false).unwrap();
        assert_eq!(tr.ryy(), &HermitianMatrix::identity(2));
        assert_ne!(tr.rnnv(), &HermitianMatrix::identity(2));
    }

    #[test]
    fn cold_start_matches_first_frame_power() {
        let y = vec_of(&[(2.0, 0.0), (0.0, 0.0)]);
        let tr = scm_update(ScmTracker::new(2, 0.5).unwrap(), &y, true).unwrap();
        // Rnnv keeps the identity seed scaled to ‖y‖²/dim = 2.
        assert_eq!(tr.rnnv(), &HermitianMatrix::scaled_identity(2, 2.0));
        assert!(matches!(tr.speech_scm(), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn fresh_tracker_has_insufficient_data() {
        let tr = ScmTracker::new(4, 0.9).unwrap();
        assert!(matches!(tr.speech_scm(), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn equal_matrices_give_zero_speech() {
        let r = HermitianMatrix::scaled_identity(3, 2.0);
        let tr = ScmTracker::warm(r.clone(), r, 0.9).unwrap();
        assert_eq!(tr.speech_scm().unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn wrong_length_is_rejected() {
        let mut tr = ScmTracker::new(3, 0.9).unwrap();
        assert!(matches!(
            tr.update(&CVector::zeros(2), true),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn long_average_approaches_oracle_speech_scm() {
        let mut p = ScenarioParams::uniform(2, 3, 1, 1, ScenarioMode::Fods, 21);
        p.selfnoise_power = 0.1;
        let s = generate_scenario(&p).unwrap();
        let layout = s.layout();
        // Long averaging: β close to 1 with a burn-in longer than its memory.
        let mut tr = ScmTracker::new(6, 0.9995).unwrap();
        let frames = 5000 * 8;
        for f in FrameGenerator::new(&s, Duty::Blocks { on: 1, off: 1 }, 3).take(frames) {
            tr.update(&layout.stack(&f.y), f.vad).unwrap();
        }
        let oracle = oracle_scms(&s);
        let err = relative_error(tr.speech_scm().unwrap().as_matrix(), oracle.rss.as_matrix());
        assert!(err < 0.05, "relative error {err}");
    }

    fn arb_frames() -> impl Strategy<Value = (f64, Vec<(Vec<(f64, f64)>, bool)>)> {
        (
            0.0f64..0.999,
            prop::collection::vec(
                (prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 3), any::<bool>()),
                1..12,
            ),
        )
    }

    proptest! {
        #[test]
        fn update_matches_brute_force_fold((beta, frames) in arb_frames()) {
            let mut tr = ScmTracker::warm(HermitianMatrix::identity(3), HermitianMatrix::identity(3), beta).unwrap();
            let mut ryy = CMatrix::identity(3, 3);
            let mut rnn = CMatrix::identity(3, 3);
            for (v, vad) in &frames {
                let y = vec_of(v);
                tr.update(&y, *vad).unwrap();
                let target = if *vad { &mut ryy } else { &mut rnn };
                *target = &*target * c64(beta, 0.0) + &y * y.adjoint() * c64(1.0 - beta, 0.0);
            }
            prop_assert!(relative_error(tr.ryy().as_matrix(), &ryy) < 1e-12);
            prop_assert!(relative_error(tr.rnnv().as_matrix(), &rnn) < 1e-12);
            let m = tr.ryy().as_matrix();
            prop_assert_eq!(m, &m.adjoint());
        }
    }
}
