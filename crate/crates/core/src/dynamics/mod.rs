//! Single-excitation dynamics of two emitters coupled through a waveguide.
//!
//! Time is measured in units of the emitter lifetime (`gamma t`), the
//! separation enters only through the delay `eta = gamma d / v`, and the
//! detuning `delta` is in units of `gamma`. Amplitudes are in the frame
//! rotating at each emitter's own frequency.
//!
//! Three independent solvers are provided: the finite round-trip series
//! ([`amplitude_series`]), the pole expansion ([`amplitude_poles`]) and a
//! fixed-step delay-equation integrator ([`amplitude_ode`]).

mod ode;
mod params;
mod poles;
mod series;

pub use ode::amplitude_ode;
pub use params::{Emitter, SystemParams};
pub use poles::{
    amplitude_poles, characteristic, characteristic_derivative, compute_residues, find_pole_pair,
    find_poles, find_poles_with, laplace_coefficient, BranchSign, PoleEntry, PoleSet,
    POLE_RESIDUAL_TOL,
};
pub use series::amplitude_series;

pub(crate) use poles::{detuning_sign, feedback, numerator, reduced_phase};
pub(crate) use series::amplitudes_at;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Series,
    Poles,
    Ode,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Poles => "poles",
            Method::Ode => "ode",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "series" => Ok(Method::Series),
            "poles" => Ok(Method::Poles),
            "ode" => Ok(Method::Ode),
            other => Err(format!(
                "unknown method '{other}' (expected series, poles or ode)"
            )),
        }
    }
}

/// Emitter amplitudes sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrace {
    pub times: Vec<f64>,
    pub c1: Vec<Complex64>,
    pub c2: Vec<Complex64>,
    pub method: Method,
}

impl AmplitudeTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn populations(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.c1
            .iter()
            .zip(&self.c2)
            .map(|(a, b)| (a.norm_sqr(), b.norm_sqr()))
    }
}
