use num_complex::Complex64;
use thiserror::Error;

use crate::mathkit::MathError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("initial amplitudes must be normalised, got |c1|^2 + |c2|^2 = {0}")]
    UnnormalisedInitialState(f64),
    #[error("pole search failed on branch ({sign}, {branch}) for emitter {emitter}: {source}")]
    PoleSearch {
        emitter: u8,
        sign: char,
        branch: i32,
        source: MathError,
    },
    #[error("pole on branch ({sign}, {branch}) of emitter {emitter} has residual {residual:e}")]
    PoleResidual {
        emitter: u8,
        sign: char,
        branch: i32,
        residual: f64,
    },
    #[error("pole {pole} on branch ({sign}, {branch}) of emitter {emitter} lies in the right half plane")]
    RightHalfPlanePole {
        emitter: u8,
        sign: char,
        branch: i32,
        pole: Complex64,
    },
    #[error("poles of emitter {emitter} on branches ({a_sign}, {a_branch}) and ({b_sign}, {b_branch}) coincide")]
    DuplicatePole {
        emitter: u8,
        a_sign: char,
        a_branch: i32,
        b_sign: char,
        b_branch: i32,
    },
    #[error("vanishing denominator on branch ({sign}, {branch}) of emitter {emitter}")]
    DegenerateDenominator {
        emitter: u8,
        sign: char,
        branch: i32,
    },
    #[error("time step {dt} too coarse (needs dt <= {limit})")]
    StepTooCoarse { dt: f64, limit: f64 },
    #[error("response denominator vanishes at omega_bar = {omega_bar} (real-axis pole)")]
    RealAxisPole { omega_bar: f64 },
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("frequency grid too coarse: densities disagree by {relative:e}")]
    GridResolution { relative: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
