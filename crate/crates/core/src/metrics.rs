//! Trajectory monitors: Lyapunov maxima, disagreement, and envelopes.
//!
//! The continuous-time statements these monitors check are exact
//! (non-increase of a maximum over agents follows from the Dini derivative of
//! a max being the largest derivative among the maximizing indices). On
//! sampled RK4 output a small per-step tolerance absorbs integration error.

use crate::dynamics::ConvexLyapunov;
use crate::simulator::Trajectory;
use crate::Tolerance;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    fn from_trajectory(traj: &Trajectory, f: impl Fn(&crate::simulator::NetworkState) -> f64) -> Self {
        TimeSeries {
            times: traj.times(),
            values: traj.samples.iter().map(f).collect(),
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// `max_{i,j} |x_i - x_j|^2` over the rows of a row-major `N x dim` array.
pub fn disagreement(x: &[f64], dim: usize) -> f64 {
    let rows: Vec<&[f64]> = x.chunks(dim).collect();
    let mut best = 0.0f64;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            best = best.max(sq_dist(a, b));
        }
    }
    best
}

/// `max_i |x_i - y|^2`.
pub fn leader_error(x: &[f64], dim: usize, y: &[f64]) -> f64 {
    x.chunks(dim).map(|xi| sq_dist(xi, y)).fold(0.0, f64::max)
}

/// `V(t) = 1/2 exp(-2 L (t - t0)) max_{i,j} |x_i - x_j|^2`.
pub fn lipschitz_v(t: f64, t0: f64, lipschitz: f64, x: &[f64], dim: usize) -> f64 {
    0.5 * (-2.0 * lipschitz * (t - t0)).exp() * disagreement(x, dim)
}

pub fn max_phi(phi: &ConvexLyapunov, x: &[f64]) -> f64 {
    x.chunks(phi.dim()).map(|xi| phi.value(xi)).fold(f64::NEG_INFINITY, f64::max)
}

fn min_phi(phi: &ConvexLyapunov, x: &[f64]) -> f64 {
    x.chunks(phi.dim()).map(|xi| phi.value(xi)).fold(f64::INFINITY, f64::min)
}

/// `max_i phi(x_i(t))` at every sample.
pub fn max_phi_series(traj: &Trajectory, phi: &ConvexLyapunov) -> TimeSeries {
    TimeSeries::from_trajectory(traj, |s| max_phi(phi, &s.x))
}

/// `max_i phi(x_i(t) - y(t))`: the Lyapunov maximum in coordinates relative
/// to the leader.
pub fn relative_max_phi_series(traj: &Trajectory, phi: &ConvexLyapunov) -> Option<TimeSeries> {
    traj.has_leader().then(|| {
        TimeSeries::from_trajectory(traj, |s| {
            let y = s.y.as_deref().expect("leader state");
            s.x.chunks(phi.dim())
                .map(|xi| phi.value_of_difference(xi, y))
                .fold(f64::NEG_INFINITY, f64::max)
        })
    })
}

/// Spread `max_i phi - min_i phi` at every sample.
pub fn phi_spread_series(traj: &Trajectory, phi: &ConvexLyapunov) -> TimeSeries {
    TimeSeries::from_trajectory(traj, |s| max_phi(phi, &s.x) - min_phi(phi, &s.x))
}

pub fn disagreement_series(traj: &Trajectory) -> TimeSeries {
    TimeSeries::from_trajectory(traj, |s| disagreement(&s.x, traj.dim))
}

pub fn leader_error_series(traj: &Trajectory) -> Option<TimeSeries> {
    traj.has_leader().then(|| {
        TimeSeries::from_trajectory(traj, |s| {
            leader_error(&s.x, traj.dim, s.y.as_deref().expect("leader state"))
        })
    })
}

pub fn lipschitz_v_series(traj: &Trajectory, lipschitz: f64) -> TimeSeries {
    let t0 = traj.start_time();
    TimeSeries::from_trajectory(traj, |s| lipschitz_v(s.t, t0, lipschitz, &s.x, traj.dim))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonotoneCheck {
    pub holds: bool,
    /// Index `k` of the first sample with `v[k] > v[k-1] + tolerance`.
    pub first_violation: Option<usize>,
}

/// Non-increase up to `tol.abs + tol.rel * (1 + |v_k|)` per consecutive pair.
pub fn check_monotone(values: &[f64], tol: Tolerance) -> MonotoneCheck {
    let first_violation = values
        .windows(2)
        .position(|w| w[1] > w[0] + tol.bound(w[0]))
        .map(|k| k + 1);
    MonotoneCheck {
        holds: first_violation.is_none(),
        first_violation,
    }
}

/// Synchronization of `phi(x_i)` over a trailing window.
///
/// Returns the windowed mean of the agent-mean of `phi` when, on every sample
/// of the last `window` seconds, the spread of `phi` across agents is below
/// `eps`, and the total variation of `max_i phi` over the window is below
/// `eps`.
pub fn detect_phi_sync(traj: &Trajectory, phi: &ConvexLyapunov, eps: f64, window: f64) -> Option<f64> {
    let last = traj.samples.last()?;
    if last.t - traj.start_time() < window * (1.0 - 1e-12) {
        return None;
    }
    let from = last.t - window;
    let tail: Vec<_> = traj
        .samples
        .iter()
        .filter(|s| s.t >= from - 1e-12 * (1.0 + from.abs()))
        .collect();
    let mut variation = 0.0;
    let mut prev_max: Option<f64> = None;
    let mut mean_acc = 0.0;
    for s in &tail {
        let hi = max_phi(phi, &s.x);
        let lo = min_phi(phi, &s.x);
        if !(hi - lo < eps) {
            return None;
        }
        if let Some(p) = prev_max {
            variation += (hi - p).abs();
        }
        prev_max = Some(hi);
        let agents = s.x.len() / phi.dim();
        mean_acc += s.x.chunks(phi.dim()).map(|xi| phi.value(xi)).sum::<f64>() / agents as f64;
    }
    (variation < eps).then(|| mean_acc / tail.len() as f64)
}

/// Absolute floor under the exponential envelope, so that a series that
/// starts at zero may carry rounding-level noise.
pub const ENVELOPE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCheck {
    pub holds: bool,
    pub first_violation: Option<usize>,
    /// Largest ratio `v(t_k) / bound(t_k)` seen; at most 1 when the check
    /// holds.
    pub worst_ratio: f64,
}

/// `v(t_k) <= gamma * exp(-lambda (t_k - t0)) * v(t0) * (1 + tol_rel)` for
/// every sample, with `series.values[0]` taken as `v(t0)`.
pub fn check_exponential_envelope(
    series: &TimeSeries,
    t0: f64,
    gamma: f64,
    lambda: f64,
    tol_rel: f64,
) -> EnvelopeCheck {
    let Some(&v0) = series.values.first() else {
        return EnvelopeCheck {
            holds: true,
            first_violation: None,
            worst_ratio: 0.0,
        };
    };
    let mut first_violation = None;
    let mut worst_ratio = 0.0f64;
    for (k, (&t, &v)) in series.times.iter().zip(&series.values).enumerate() {
        let bound = gamma * (-lambda * (t - t0)).exp() * v0 * (1.0 + tol_rel) + ENVELOPE_FLOOR;
        worst_ratio = worst_ratio.max(v / bound);
        if v > bound && first_violation.is_none() {
            first_violation = Some(k);
        }
    }
    EnvelopeCheck {
        holds: first_violation.is_none(),
        first_violation,
        worst_ratio,
    }
}
