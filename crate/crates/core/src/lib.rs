//! Synchronization of coupled nonlinear agents over switching directed graphs.
//!
//! The crate is split along the pipeline a study goes through:
//!
//! - [`graph`]: switching topologies and joint-connectivity checks
//! - [`dynamics`]: the shared vector field `f(t, x)` and quadratic Lyapunov
//!   functions, with sample-based assumption checks
//! - [`simulator`]: fixed-step RK4 integration of the coupled network, split
//!   at every switch instant
//! - [`metrics`]: Lyapunov monitors, disagreement, and envelope checks over
//!   trajectories
//! - [`certificates`]: closed-form convergence constants and verdicts
//! - [`scenario`] and [`cli`]: the scenario file format and the command-line
//!   front end

pub mod certificates;
pub mod cli;
pub mod dynamics;
pub mod graph;
pub mod metrics;
pub mod scenario;
pub mod simulator;

/// Mixed absolute/relative tolerance: a quantity of size `mag` is accepted
/// within `abs + rel * (1 + mag)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    #[inline]
    pub fn bound(&self, mag: f64) -> f64 {
        self.abs + self.rel * (1.0 + mag.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-9, 1e-7)
    }
}
