//! Helpers shared by the integration tests and the acceptance runner.
//!
//! The certificate oracle below re-evaluates every closed form directly:
//! plain products and powers, no log-space accumulation. It only uses
//! `ln_1p`/`exp_m1` where the textbook form would cancel catastrophically
//! (`ln(1 - q)` for tiny `q`), since a naive oracle would otherwise be the
//! less accurate side of the comparison.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use syncnet::certificates::{Certificate, NetworkParams};
use syncnet::dynamics::{ConvexLyapunov, DynamicsSpec, SquareMatrix};
use syncnet::graph::{
    Edge, Extension, LeaderEdge, LeaderGraph, Segment, SwitchingSignal, Topology, WeightedDigraph,
};
use syncnet::simulator::SimulationConfig;

pub type Constants = BTreeMap<&'static str, f64>;

pub fn contraction_oracle(p: &NetworkParams) -> Constants {
    let n = p.num_agents as f64;
    let t0 = p.window + 2.0 * p.tau_d;
    let lambda_1 = p.a_hi * (n - 1.0);
    let lambda_2 = p.a_hi * (n - 2.0) + p.a_lo;
    let rho = (-p.a_hi * (n - 1.0) * (n - 1.0) * t0).exp();
    let mu = (lambda_2 - p.a_lo * (1.0 - (-lambda_2 * p.tau_d).exp())) / lambda_2;
    let phi = ((1.0 - mu) * rho * rho).powi(p.num_agents as i32 - 1);
    let rho_hat = (-p.a_hi * (n - 1.0) * p.tau_d).exp();
    let phi_hat = ((1.0 - mu) * rho_hat * rho_hat).powi(p.num_agents as i32 - 1);
    BTreeMap::from([
        ("T0", t0),
        ("lambda_1", lambda_1),
        ("lambda_2", lambda_2),
        ("rho", rho),
        ("mu", mu),
        ("phi_N_minus_1", phi),
        ("rho_hat", rho_hat),
        ("phi_hat_N_minus_1", phi_hat),
    ])
}

pub fn leaderless_oracle(p: &NetworkParams) -> Constants {
    let n = p.num_agents as f64;
    let l = p.lipschitz.expect("oracle needs L");
    let n_bar = n - 1.0;
    let t0 = p.window + 2.0 * p.tau_d;
    let alpha = (2.0 * n - 3.0) * p.a_hi + p.a_lo;
    let alpha_bar = 2.0 * (n - 1.0) * p.a_hi;
    let beta_star =
        (1.0 - (-alpha * p.tau_d).exp()) * (p.a_lo / alpha) * (-alpha_bar * n_bar * t0).exp();
    let q = beta_star.powi(p.num_agents as i32 - 1);
    let beta_tilde = 1.0 - q;
    let rho_star = -(-q).ln_1p() / (n_bar * t0);
    BTreeMap::from([
        ("N_bar", n_bar),
        ("T0", t0),
        ("alpha", alpha),
        ("alpha_bar", alpha_bar),
        ("beta_star", beta_star),
        ("beta_tilde", beta_tilde),
        ("rho_star", rho_star),
        ("gamma", 1.0 / beta_tilde),
        ("L", l),
        ("lambda", rho_star - 2.0 * l),
    ])
}

pub fn leader_follower_oracle(p: &NetworkParams) -> Constants {
    let n = p.num_agents as f64;
    let l = p.lipschitz.expect("oracle needs L");
    let b = p.b_lo.expect("oracle needs b_lo");
    let t0 = p.window + 2.0 * p.tau_d;
    let t_star = n * t0;
    let lb1 = p.a_hi * (n - 1.0);
    let lb2 = p.a_hi * (n - 2.0) + p.a_lo;
    let lh1 = p.a_hi * (n - 1.0) + b;
    let delta_hat_1 = (lh1 - b * (1.0 - (-lh1 * p.tau_d).exp())) / lh1;
    let eta = (-lb1 * (n + 1.0) * t0).exp() * (1.0 - (-lb2 * p.tau_d).exp()) * p.a_lo
        / (p.a_hi * (n - 2.0) + p.a_lo);
    let growth = ((n - 2.0) * (n + 1.0) / 2.0 * lb1 * t0).exp();
    let q = eta.powi(p.num_agents as i32 - 1) * growth * b * (1.0 - (-lh1 * p.tau_d).exp())
        / (p.a_hi * (n - 1.0) + b);
    let delta_n = 1.0 - q;
    let rho_hat_star = -(-q).ln_1p() / t_star;
    BTreeMap::from([
        ("T0", t0),
        ("T_star", t_star),
        ("lambda_bar_1", lb1),
        ("lambda_bar_2", lb2),
        ("lambda_hat_1", lh1),
        ("delta_hat_1", delta_hat_1),
        ("eta", eta),
        ("delta_N", delta_n),
        ("rho_hat_star", rho_hat_star),
        ("gamma", 1.0 / delta_n),
        ("L", l),
        ("lambda", rho_hat_star - 2.0 * l),
    ])
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Compares every oracle constant against the certificate; returns the
/// first mismatch as text.
pub fn compare(cert: &Certificate, oracle: &Constants, rel: f64) -> Result<(), String> {
    for (&name, &want) in oracle {
        let got = cert
            .get(name)
            .ok_or_else(|| format!("{}: missing constant {name}", cert.kind.name()))?;
        let e = rel_err(got, want);
        if !(e <= rel) {
            return Err(format!(
                "{}: {name} = {got:e}, oracle {want:e} (rel err {e:e})",
                cert.kind.name()
            ));
        }
    }
    Ok(())
}

/// Parameters kept inside the range where every constant stays a normal
/// double (no underflow of the nested exponentials).
pub fn random_params(rng: &mut ChaCha8Rng, leader: bool) -> NetworkParams {
    let a_lo = rng.gen_range(0.2..=1.0);
    NetworkParams {
        num_agents: rng.gen_range(2..=4),
        dim: rng.gen_range(1..=3),
        a_lo,
        a_hi: rng.gen_range(a_lo..=1.0),
        b_lo: leader.then(|| rng.gen_range(0.2..=1.0)),
        tau_d: rng.gen_range(0.1..=1.0),
        window: rng.gen_range(0.1..=1.0),
        lipschitz: Some(0.0),
    }
}

pub fn digraph(n: usize, edges: &[(usize, usize, f64)]) -> WeightedDigraph {
    WeightedDigraph::new(
        n,
        edges.iter().map(|&(s, t, w)| Edge::new(s, t, w)),
    )
    .expect("valid test graph")
}

/// Two agents, one undirected unit edge, zero drift, `x(0) = (1, -1)`: the
/// exact solution is `x_1 = -x_2 = e^{-2t}`.
pub fn closed_form_two_agent(h: f64, stride: usize) -> SimulationConfig {
    let g: Topology = digraph(2, &[(0, 1, 1.0), (1, 0, 1.0)]).into();
    SimulationConfig {
        signal: SwitchingSignal::constant(g, 0.0),
        dynamics: DynamicsSpec::Zero { dim: 1 },
        initial_states: vec![1.0, -1.0],
        leader_initial: None,
        h,
        t_end: 1.0,
        output_stride: stride,
    }
}

/// `M^T M + 0.1 I` for a random `M`: symmetric positive definite.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SquareMatrix {
    let m: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let dot: f64 = (0..n).map(|k| m[k][i] * m[k][j]).sum();
                    dot + if i == j { 0.1 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    SquareMatrix::from_rows(&rows).expect("square")
}

/// Random switching signal: 1-6 segments with durations in
/// `[tau_d, 3 tau_d]`, each edge present with probability `density`, weights
/// in `[a_lo, a_hi]`. With `leader`, every segment carries leader edges too.
pub fn random_signal(
    rng: &mut ChaCha8Rng,
    agents: usize,
    tau_d: f64,
    (a_lo, a_hi): (f64, f64),
    density: f64,
    leader: bool,
) -> SwitchingSignal {
    let count = rng.gen_range(1..=6);
    let segments = (0..count)
        .map(|_| {
            let mut edges = Vec::new();
            for s in 0..agents {
                for t in 0..agents {
                    if s != t && rng.gen_bool(density) {
                        edges.push((s, t, rng.gen_range(a_lo..=a_hi)));
                    }
                }
            }
            let g = digraph(agents, &edges);
            let topology: Topology = if leader {
                let mut leader_edges = Vec::new();
                for i in 0..agents {
                    if rng.gen_bool(density) {
                        leader_edges.push(LeaderEdge {
                            target: i,
                            weight: rng.gen_range(a_lo..=a_hi),
                        });
                    }
                }
                LeaderGraph::new(g, leader_edges).expect("valid").into()
            } else {
                g.into()
            };
            Segment {
                topology,
                duration: rng.gen_range(tau_d..=3.0 * tau_d),
            }
        })
        .collect();
    let ext = if rng.gen_bool(0.5) {
        Extension::Periodic
    } else {
        Extension::HoldLast
    };
    SwitchingSignal::new(segments, 0.0, ext).expect("valid signal")
}

pub fn random_states(rng: &mut ChaCha8Rng, len: usize, radius: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-radius..=radius)).collect()
}

/// Rotation or zero drift with a Lyapunov matrix for which the drift is
/// neutral: block-scalar `P` for rotations, any SPD `P` for zero drift.
pub struct NeutralCase {
    pub config: SimulationConfig,
    pub phi: ConvexLyapunov,
}

pub fn neutral_case(rng: &mut ChaCha8Rng, t_end: f64, h: f64, stride: usize) -> NeutralCase {
    let agents = rng.gen_range(2..=6);
    let dim = [1usize, 2, 4][rng.gen_range(0..3)];
    let rotate = dim > 1 && rng.gen_bool(0.7);
    let (dynamics, p) = if rotate {
        let blocks = dim / 2;
        let rates = (0..blocks).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let diag: Vec<f64> = (0..blocks)
            .flat_map(|_| {
                let c = rng.gen_range(0.2..3.0);
                [c, c]
            })
            .collect();
        (DynamicsSpec::SkewRotation { rates }, SquareMatrix::diagonal(&diag))
    } else {
        (DynamicsSpec::Zero { dim }, random_spd(rng, dim))
    };
    let tau_d = rng.gen_range(0.2..=1.0);
    let density = rng.gen_range(0.1..0.7);
    let signal = random_signal(rng, agents, tau_d, (0.5, 1.5), density, false);
    NeutralCase {
        config: SimulationConfig {
            signal,
            dynamics,
            initial_states: random_states(rng, agents * dim, 3.0),
            leader_initial: None,
            h,
            t_end,
            output_stride: stride,
        },
        phi: ConvexLyapunov::new(p).expect("SPD"),
    }
}

/// Saturated Lipschitz drift over arbitrary switching, possibly never
/// connected.
pub fn lipschitz_case(rng: &mut ChaCha8Rng, t_end: f64, h: f64, stride: usize) -> SimulationConfig {
    let agents = rng.gen_range(2..=6);
    let dim = rng.gen_range(1..=3);
    let tau_d = rng.gen_range(0.2..=1.0);
    let density = rng.gen_range(0.0..0.6);
    SimulationConfig {
        signal: random_signal(rng, agents, tau_d, (0.2, 2.0), density, false),
        dynamics: DynamicsSpec::SaturatedLipschitz {
            dim,
            lipschitz: rng.gen_range(0.05..1.0),
        },
        initial_states: random_states(rng, agents * dim, 3.0),
        leader_initial: None,
        h,
        t_end,
        output_stride: stride,
    }
}

/// Reachability by enumerating every simple path from each node.
pub fn brute_reach(n: usize, adj: &[Vec<bool>]) -> Vec<Vec<bool>> {
    fn walk(v: usize, adj: &[Vec<bool>], seen: &mut Vec<bool>, out: &mut Vec<bool>) {
        out[v] = true;
        for w in 0..adj.len() {
            if adj[v][w] && !seen[w] {
                seen[w] = true;
                walk(w, adj, seen, out);
                seen[w] = false;
            }
        }
    }
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut out = vec![false; n];
            walk(s, adj, &mut seen, &mut out);
            out
        })
        .collect()
}

pub fn random_adj(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<bool>> {
    let density = rng.gen_range(0.1..0.9);
    (0..n)
        .map(|i| (0..n).map(|j| i != j && rng.gen_bool(density)).collect())
        .collect()
}

pub fn to_graph(adj: &[Vec<bool>]) -> WeightedDigraph {
    let n = adj.len();
    let edges: Vec<_> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| adj[i][j]).map(move |j| (i, j, 1.0)))
        .collect();
    digraph(n, &edges)
}
