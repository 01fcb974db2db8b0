//! Fixed-step RK4 integration of the coupled network.
//!
//! Each agent follows `x_i' = f(t, x_i) + sum_j a_ij (x_j - x_i)`, plus
//! `b_i (y - x_i)` when the leader talks to it. The leader follows
//! `y' = f(t, y)` with no coupling. Integration steps never straddle a switch
//! instant, so each step sees one smooth vector field.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamics::DynamicsSpec;
use crate::graph::{GraphError, SwitchingSignal, Topology};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("numerical blow-up at t = {t}")]
    BlowUp { t: f64 },
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Snapshot of the network at time `t`. `x` is row-major `N x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
}

impl NetworkState {
    pub fn agent(&self, i: usize, dim: usize) -> &[f64] {
        &self.x[i * dim..(i + 1) * dim]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<NetworkState>,
    pub fingerprint: String,
    pub step: f64,
    pub num_agents: usize,
    pub dim: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn has_leader(&self) -> bool {
        self.samples.first().is_some_and(|s| s.y.is_some())
    }

    pub fn start_time(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub signal: SwitchingSignal,
    pub dynamics: DynamicsSpec,
    /// Row-major `N x n` initial follower states.
    pub initial_states: Vec<f64>,
    pub leader_initial: Option<Vec<f64>>,
    pub h: f64,
    pub t_end: f64,
    /// Integration steps per output sample.
    pub output_stride: usize,
}

impl SimulationConfig {
    pub const DEFAULT_STEP: f64 = 1e-3;
    pub const DEFAULT_STRIDE: usize = 10;

    pub fn start_time(&self) -> f64 {
        self.signal.start_time()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        let n = self.dynamics.dim();
        let agents = self.signal.num_agents();
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(SimError::InvalidStep(self.h));
        }
        if !(self.t_end.is_finite() && self.t_end > self.start_time()) {
            return bad(format!(
                "t_end {} must be finite and after the start time {}",
                self.t_end,
                self.start_time()
            ));
        }
        if self.output_stride == 0 {
            return bad("output stride must be >= 1".into());
        }
        if self.initial_states.len() != agents * n {
            return bad(format!(
                "initial states have {} entries, expected {agents} agents x {n}",
                self.initial_states.len()
            ));
        }
        if self.initial_states.iter().any(|v| !v.is_finite()) {
            return bad("initial states must be finite".into());
        }
        match (&self.leader_initial, self.signal.has_leader()) {
            (Some(y), true) if y.len() != n => {
                bad(format!("leader state has {} entries, expected {n}", y.len()))
            }
            (Some(y), true) if y.iter().any(|v| !v.is_finite()) => {
                bad("leader state must be finite".into())
            }
            (None, true) => bad("leader-follower signal needs a leader initial state".into()),
            (Some(_), false) => bad("leader initial state given for a leaderless signal".into()),
            _ => Ok(()),
        }
    }

    /// SHA-256 over the exact field values (floats via their round-trip
    /// representation).
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(format!("{self:?}").as_bytes()))
    }
}

/// Adds the coupling input of agent `i` into `out`.
#[inline]
fn add_coupling(
    topology: &Topology,
    x: &[f64],
    dim: usize,
    y: Option<&[f64]>,
    i: usize,
    out: &mut [f64],
) {
    let xi = &x[i * dim..(i + 1) * dim];
    for e in topology.followers().in_edges(i) {
        let xj = &x[e.source * dim..(e.source + 1) * dim];
        for k in 0..dim {
            out[k] += e.weight * (xj[k] - xi[k]);
        }
    }
    if let (Some(y), Topology::LeaderFollower(lg)) = (y, topology) {
        if let Some(b) = lg.leader_weight(i) {
            for k in 0..dim {
                out[k] += b * (y[k] - xi[k]);
            }
        }
    }
}

/// `sum_j a_ij (x_j - x_i) + b_i (y - x_i)` for agent `i`.
pub fn coupling_term(
    topology: &Topology,
    x: &[f64],
    dim: usize,
    y: Option<&[f64]>,
    i: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    add_coupling(topology, x, dim, y, i, &mut out);
    out
}

/// Reusable RK4 stage buffers.
///
/// The state update uses compensated summation: the rounding lost when adding
/// a small increment to a large state is carried into the next step, so
/// rounding does not accumulate over many small steps and mask the
/// truncation error.
#[derive(Debug, Clone, Default)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
    carry: Vec<f64>,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        Rk4 {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
            carry: vec![0.0; len],
        }
    }

    /// Advances `state` from `t` to `t + h` in place.
    pub fn step<F>(&mut self, derivative: &mut F, t: f64, state: &mut [f64], h: f64) -> Result<(), SimError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        if !(h.is_finite() && h > 0.0) {
            return Err(SimError::InvalidStep(h));
        }
        let len = state.len();
        if self.k1.len() != len {
            *self = Rk4::new(len);
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let half = 0.5 * h;

        derivative(t, state, &mut self.k1);
        if !finite(&self.k1) {
            return Err(SimError::BlowUp { t });
        }
        for k in 0..len {
            self.tmp[k] = state[k] + half * self.k1[k];
        }
        derivative(t + half, &self.tmp, &mut self.k2);
        if !finite(&self.k2) {
            return Err(SimError::BlowUp { t });
        }
        for k in 0..len {
            self.tmp[k] = state[k] + half * self.k2[k];
        }
        derivative(t + half, &self.tmp, &mut self.k3);
        if !finite(&self.k3) {
            return Err(SimError::BlowUp { t });
        }
        for k in 0..len {
            self.tmp[k] = state[k] + h * self.k3[k];
        }
        derivative(t + h, &self.tmp, &mut self.k4);
        if !finite(&self.k4) {
            return Err(SimError::BlowUp { t });
        }
        let sixth = h / 6.0;
        for k in 0..len {
            let inc = sixth * (self.k1[k] + 2.0 * self.k2[k] + 2.0 * self.k3[k] + self.k4[k])
                + self.carry[k];
            let next = state[k] + inc;
            self.carry[k] = inc - (next - state[k]);
            state[k] = next;
        }
        if !finite(state) {
            return Err(SimError::BlowUp { t: t + h });
        }
        Ok(())
    }
}

/// One classical RK4 step of `state' = derivative(t, state)`.
pub fn rk4_step<F>(mut derivative: F, t: f64, state: &[f64], h: f64) -> Result<Vec<f64>, SimError>
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
{
    let mut next = state.to_vec();
    let mut adapter = |t: f64, x: &[f64], out: &mut [f64]| {
        let d = derivative(t, x);
        if d.len() == out.len() {
            out.copy_from_slice(&d);
        } else {
            out.fill(f64::NAN);
        }
    };
    Rk4::new(state.len()).step(&mut adapter, t, &mut next, h)?;
    Ok(next)
}

/// Steps of length `h` from `a`, plus one shorter final step ending at `b`.
fn grid(a: f64, b: f64, h: f64) -> impl Iterator<Item = (f64, f64)> {
    let steps = ((b - a) / h - 1e-9).ceil().max(1.0) as u64;
    (0..steps).map(move |j| {
        let lo = a + j as f64 * h;
        let hi = if j + 1 == steps { b } else { a + (j + 1) as f64 * h };
        (lo, hi)
    })
}

/// Sorted, deduplicated cut points spanning `[t0, t_end]`.
fn cut_points(t0: f64, t_end: f64, mut cuts: Vec<f64>) -> Vec<f64> {
    cuts.push(t0);
    cuts.push(t_end);
    cuts.retain(|&c| c >= t0 && c <= t_end);
    cuts.sort_by(f64::total_cmp);
    let slack = 1e-12 * (1.0 + t_end.abs().max(t0.abs()));
    cuts.dedup_by(|later, earlier| *later - *earlier <= slack);
    // keep t_end exact after dedup
    if let Some(last) = cuts.last_mut() {
        *last = t_end;
    }
    cuts
}

fn steps_between(cuts: &[f64], h: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    cuts.windows(2).flat_map(move |w| grid(w[0], w[1], h))
}

/// Step intervals covering `[t0, t_end]`, each at most `h` long, with every
/// switch instant of `signal` appearing as an interval endpoint.
pub fn switching_aware_schedule(
    signal: &SwitchingSignal,
    t0: f64,
    t_end: f64,
    h: f64,
) -> Result<Vec<(f64, f64)>, SimError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(SimError::InvalidStep(h));
    }
    if !(t0 < t_end) {
        return Err(SimError::InvalidConfig(format!(
            "empty span [{t0}, {t_end}]"
        )));
    }
    let cuts = cut_points(t0, t_end, signal.switch_times_between(t0, t_end));
    Ok(steps_between(&cuts, h).collect())
}

/// Output instants: every `stride` nominal steps from `t0`, plus `t_end`.
fn output_times(t0: f64, t_end: f64, h: f64, stride: usize) -> Vec<f64> {
    let every = h * stride as f64;
    let count = ((t_end - t0) / every + 1e-9).floor() as u64;
    let mut out: Vec<f64> = (0..=count).map(|k| t0 + k as f64 * every).collect();
    let slack = 1e-9 * every;
    if t_end - out.last().copied().unwrap_or(t0) > slack {
        out.push(t_end);
    } else if let Some(last) = out.last_mut() {
        *last = last.min(t_end);
    }
    out
}

/// Integrates the network described by `config`.
pub fn simulate(config: &SimulationConfig) -> Result<Trajectory, SimError> {
    config.validate()?;
    let signal = &config.signal;
    let dim = config.dynamics.dim();
    let agents = signal.num_agents();
    let t0 = config.start_time();
    let leader = config.leader_initial.is_some();
    let follower_len = agents * dim;

    let mut state = config.initial_states.clone();
    if let Some(y) = &config.leader_initial {
        state.extend_from_slice(y);
    }

    let outputs = output_times(t0, config.t_end, config.h, config.output_stride);
    let mut cuts = signal.switch_times_between(t0, config.t_end);
    cuts.extend(outputs.iter().copied());
    let cuts = cut_points(t0, config.t_end, cuts);

    let snapshot = |t: f64, state: &[f64]| NetworkState {
        t,
        x: state[..follower_len].to_vec(),
        y: leader.then(|| state[follower_len..].to_vec()),
    };

    let mut samples = Vec::with_capacity(outputs.len());
    samples.push(snapshot(t0, &state));
    let mut next_output = 1;

    let mut rk4 = Rk4::new(state.len());
    let dynamics = &config.dynamics;
    for (a, b) in steps_between(&cuts, config.h) {
        let topology = signal.graph_at(0.5 * (a + b))?;
        let mut derivative = |t: f64, s: &[f64], out: &mut [f64]| {
            let (xs, ys) = s.split_at(follower_len);
            let y = leader.then_some(ys);
            for i in 0..agents {
                let o = &mut out[i * dim..(i + 1) * dim];
                dynamics.eval_into(t, &xs[i * dim..(i + 1) * dim], o);
                add_coupling(topology, xs, dim, y, i, o);
            }
            if leader {
                dynamics.eval_into(t, ys, &mut out[follower_len..]);
            }
        };
        rk4.step(&mut derivative, a, &mut state, b - a)?;
        if next_output < outputs.len() && b >= outputs[next_output] - 1e-9 * config.h {
            samples.push(snapshot(outputs[next_output], &state));
            next_output += 1;
        }
    }

    Ok(Trajectory {
        samples,
        fingerprint: config.fingerprint(),
        step: config.h,
        num_agents: agents,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Extension, LeaderEdge, LeaderGraph, Segment, WeightedDigraph};

    fn two_agent_undirected() -> SimulationConfig {
        let g = WeightedDigraph::from_pairs(2, &[(0, 1), (1, 0)]).unwrap();
        SimulationConfig {
            signal: SwitchingSignal::constant(g, 0.0),
            dynamics: DynamicsSpec::Zero { dim: 1 },
            initial_states: vec![1.0, -1.0],
            leader_initial: None,
            h: 1e-3,
            t_end: 1.0,
            output_stride: 10,
        }
    }

    fn single_follower() -> SimulationConfig {
        let lg = LeaderGraph::new(
            WeightedDigraph::empty(1).unwrap(),
            [LeaderEdge {
                target: 0,
                weight: 1.0,
            }],
        )
        .unwrap();
        SimulationConfig {
            signal: SwitchingSignal::constant(lg, 0.0),
            dynamics: DynamicsSpec::Zero { dim: 1 },
            initial_states: vec![1.0],
            leader_initial: Some(vec![0.0]),
            h: 1e-3,
            t_end: 1.0,
            output_stride: 10,
        }
    }

    #[test]
    fn coupling_examples() {
        let g: Topology = WeightedDigraph::new(2, [Edge::new(1, 0, 1.0)]).unwrap().into();
        assert_eq!(coupling_term(&g, &[0.0, 2.0], 1, None, 0), vec![2.0]);
        assert_eq!(coupling_term(&g, &[0.0, 2.0], 1, None, 1), vec![0.0]);
        let lg: Topology = LeaderGraph::new(
            WeightedDigraph::empty(1).unwrap(),
            [LeaderEdge {
                target: 0,
                weight: 1.0,
            }],
        )
        .unwrap()
        .into();
        assert_eq!(coupling_term(&lg, &[0.0], 1, Some(&[1.0]), 0), vec![1.0]);
    }

    #[test]
    fn rk4_examples() {
        let decay = rk4_step(|_, x| vec![-x[0]], 0.0, &[1.0], 0.1).unwrap();
        // one RK4 step of x' = -x reproduces the degree-4 Taylor polynomial of e^-h
        let h = 0.1f64;
        let taylor = 1.0 - h + h * h / 2.0 - h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((decay[0] - taylor).abs() < 1e-15);
        let still = rk4_step(|_, x| vec![0.0; x.len()], 0.0, &[3.0, -2.0], 0.1).unwrap();
        assert_eq!(still, vec![3.0, -2.0]);
        let ramp = rk4_step(|_, _| vec![1.0], 0.0, &[0.0], 0.5).unwrap();
        assert_eq!(ramp, vec![0.5]);
    }

    #[test]
    fn rk4_reports_blow_up() {
        let err = rk4_step(|_, _| vec![f64::NAN], 2.0, &[0.0], 0.1).unwrap_err();
        assert_eq!(err, SimError::BlowUp { t: 2.0 });
        assert_eq!(
            rk4_step(|_, x| x.to_vec(), 0.0, &[1.0], 0.0).unwrap_err(),
            SimError::InvalidStep(0.0)
        );
    }

    fn boundaries(schedule: &[(f64, f64)]) -> Vec<f64> {
        let mut b = vec![schedule[0].0];
        b.extend(schedule.iter().map(|s| s.1));
        b
    }

    #[test]
    fn schedule_examples() {
        let g = WeightedDigraph::from_pairs(2, &[(0, 1)]).unwrap();
        let signal = SwitchingSignal::new(
            vec![
                Segment {
                    topology: g.clone().into(),
                    duration: 1.0,
                },
                Segment {
                    topology: g.into(),
                    duration: 1.0,
                },
            ],
            0.0,
            Extension::HoldLast,
        )
        .unwrap();
        let b = boundaries(&switching_aware_schedule(&signal, 0.0, 1.2, 0.4).unwrap());
        let expected = [0.0, 0.4, 0.8, 1.0, 1.2];
        assert_eq!(b.len(), expected.len());
        for (x, e) in b.iter().zip(expected) {
            assert!((x - e).abs() < 1e-12, "{b:?}");
        }

        let b = boundaries(&switching_aware_schedule(&signal, 0.0, 0.75, 0.25).unwrap());
        assert_eq!(b, vec![0.0, 0.25, 0.5, 0.75]);

        // switch at 1.0 lies on the 0.25 grid
        let b = boundaries(&switching_aware_schedule(&signal, 0.0, 1.5, 0.25).unwrap());
        assert_eq!(b, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5]);
    }

    #[test]
    fn two_agent_closed_form() {
        let traj = simulate(&two_agent_undirected()).unwrap();
        let last = traj.samples.last().unwrap();
        assert_eq!(last.t, 1.0);
        let diff = last.x[0] - last.x[1];
        assert!((diff - 2.0 * (-2.0f64).exp()).abs() < 1e-6);
        assert_eq!(traj.samples.len(), 101);
    }

    #[test]
    fn single_follower_closed_form() {
        let traj = simulate(&single_follower()).unwrap();
        let last = traj.samples.last().unwrap();
        assert!((last.x[0] - (-1.0f64).exp()).abs() < 1e-6);
        assert_eq!(last.y.as_deref(), Some(&[0.0][..]));
    }

    #[test]
    fn synchronized_start_stays_synchronized() {
        let mut cfg = two_agent_undirected();
        cfg.initial_states = vec![0.7, 0.7];
        let traj = simulate(&cfg).unwrap();
        assert!(traj.samples.iter().all(|s| s.x == vec![0.7, 0.7]));
    }

    #[test]
    fn deterministic_and_leader_decoupled() {
        let cfg = single_follower();
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
        let mut moved = cfg.clone();
        moved.initial_states = vec![5.0];
        let a = simulate(&cfg).unwrap();
        let b = simulate(&moved).unwrap();
        for (p, q) in a.samples.iter().zip(&b.samples) {
            assert_eq!(p.y, q.y);
        }
    }

    #[test]
    fn output_grid_includes_end() {
        let mut cfg = two_agent_undirected();
        cfg.t_end = 0.0255;
        let traj = simulate(&cfg).unwrap();
        let times = traj.times();
        assert_eq!(times.len(), 4);
        assert_eq!(*times.last().unwrap(), 0.0255);
        assert!(times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn config_validation() {
        let mut cfg = two_agent_undirected();
        cfg.initial_states = vec![1.0];
        assert!(matches!(simulate(&cfg), Err(SimError::InvalidConfig(_))));
        let mut cfg = two_agent_undirected();
        cfg.h = -1.0;
        assert_eq!(simulate(&cfg), Err(SimError::InvalidStep(-1.0)));
        let mut cfg = two_agent_undirected();
        cfg.leader_initial = Some(vec![0.0]);
        assert!(matches!(simulate(&cfg), Err(SimError::InvalidConfig(_))));
    }

    #[test]
    fn blow_up_surfaces_time() {
        let g = WeightedDigraph::empty(1).unwrap();
        let cfg = SimulationConfig {
            signal: SwitchingSignal::constant(g, 0.0),
            dynamics: DynamicsSpec::LinearTimeInvariant {
                a: crate::dynamics::SquareMatrix::diagonal(&[1e5]),
            },
            initial_states: vec![1.0],
            leader_initial: None,
            h: 0.1,
            t_end: 100.0,
            output_stride: 1,
        };
        assert!(matches!(simulate(&cfg), Err(SimError::BlowUp { .. })));
    }
}
