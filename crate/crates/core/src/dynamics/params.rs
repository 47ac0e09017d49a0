use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which of the two emitters. Emitter 1 sits at `x = -d/2` and is the
/// higher-frequency one for positive detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Emitter {
    One,
    Two,
}

impl Emitter {
    pub fn index(self) -> u8 {
        match self {
            Emitter::One => 1,
            Emitter::Two => 2,
        }
    }
}

/// Dimensionless description of the two-emitter system.
///
/// `phi2` is the propagation phase `omega_2 d / v` of emitter 2; the phase of
/// emitter 1 is always `phi2 + delta * eta` and the reference frequency is the
/// midpoint of the two emitter frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub eta: f64,
    pub delta: f64,
    pub beta: f64,
    pub phi2: f64,
    pub j_cut: usize,
    pub c1_0: Complex64,
    pub c2_0: Complex64,
}

impl SystemParams {
    pub const DEFAULT_J_CUT: usize = 250;

    pub fn new(eta: f64, delta: f64) -> Result<Self> {
        let params = SystemParams {
            eta,
            delta,
            beta: 1.0,
            phi2: 0.0,
            j_cut: Self::DEFAULT_J_CUT,
            c1_0: Complex64::new(1.0, 0.0),
            c2_0: Complex64::new(0.0, 0.0),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_phi2(mut self, phi2: f64) -> Result<Self> {
        self.phi2 = phi2;
        self.validate()?;
        Ok(self)
    }

    pub fn with_j_cut(mut self, j_cut: usize) -> Result<Self> {
        self.j_cut = j_cut;
        self.validate()?;
        Ok(self)
    }

    pub fn with_initial_state(mut self, c1_0: Complex64, c2_0: Complex64) -> Result<Self> {
        self.c1_0 = c1_0;
        self.c2_0 = c2_0;
        self.validate()?;
        Ok(self)
    }

    /// Same system at a different detuning with the mean frequency held fixed,
    /// so `phi1 + phi2` stays constant.
    pub fn with_delta_at_fixed_mean_frequency(mut self, delta: f64) -> Result<Self> {
        self.phi2 -= 0.5 * (delta - self.delta) * self.eta;
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad("eta", self.eta, "must be positive and finite");
        }
        if !self.delta.is_finite() {
            return bad("delta", self.delta, "must be finite");
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return bad("beta", self.beta, "must lie in (0, 1]");
        }
        if !self.phi2.is_finite() {
            return bad("phi2", self.phi2, "must be finite");
        }
        if self.j_cut < 1 {
            return bad("j_cut", self.j_cut as f64, "must be at least 1");
        }
        let norm = self.c1_0.norm_sqr() + self.c2_0.norm_sqr();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::UnnormalisedInitialState(norm));
        }
        Ok(())
    }

    pub fn phi1(&self) -> f64 {
        self.phi2 + self.delta * self.eta
    }

    pub fn phase(&self, emitter: Emitter) -> f64 {
        match emitter {
            Emitter::One => self.phi1(),
            Emitter::Two => self.phi2,
        }
    }

    /// `omega_0 d / v` for the mean frequency `omega_0`.
    pub fn omega0_eta(&self) -> f64 {
        self.phi2 + 0.5 * self.delta * self.eta
    }

    /// Mean frequency in units of `gamma`, on the sheet where `omega_2 eta = phi2`.
    pub fn omega0_tilde(&self) -> f64 {
        self.omega0_eta() / self.eta
    }
}
