//! Scenario files: one JSON document describing a complete run.
//!
//! Agent indices in the file are 1-based, matching the usual way edges are
//! written down (`[1, 2, 0.5]` is the edge 1 -> 2 with weight 0.5). The leader
//! is node 0, so leader edges are given as `[target, weight]`.
//!
//! ```json
//! {
//!   "params": { "num_agents": 2, "dim": 1, "a_lo": 1, "a_hi": 1,
//!               "tau_d": 1, "window": 1 },
//!   "dynamics": { "kind": "zero" },
//!   "signal": { "extension": "hold-last",
//!               "segments": [ { "duration": 1, "edges": [[1, 2, 1], [2, 1, 1]] } ] },
//!   "initial_states": [[1], [-1]],
//!   "integration": { "h": 0.001, "t_end": 1 }
//! }
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::certificates::NetworkParams;
use crate::dynamics::{ConvexLyapunov, DynamicsSpec, SquareMatrix};
use crate::graph::{
    validate_signal, Edge, Extension, LeaderEdge, LeaderGraph, Segment, SignalBounds,
    SwitchingSignal, Topology, WeightedDigraph,
};
use crate::simulator::SimulationConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

impl ScenarioError {
    pub fn errors(&self) -> &[FieldError] {
        match self {
            ScenarioError::Invalid(errs) => errs,
            ScenarioError::Io { .. } => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub num_agents: usize,
    pub dim: usize,
    pub a_lo: f64,
    pub a_hi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_lo: Option<f64>,
    pub tau_d: f64,
    pub window: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DynamicsFile {
    Zero,
    Lti { a: Vec<Vec<f64>> },
    SkewRotation { rates: Vec<f64> },
    SaturatedLipschitz { lipschitz: f64 },
    ForcedSaturated {
        gain: f64,
        amplitude: Vec<f64>,
        omega: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovFile {
    pub p: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionFile {
    #[default]
    HoldLast,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    pub duration: f64,
    #[serde(default)]
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leader_edges: Option<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalFile {
    #[serde(default)]
    pub start_time: f64,
    #[serde(default)]
    pub extension: ExtensionFile,
    pub segments: Vec<SegmentFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeaderFile {
    pub initial_state: Vec<f64>,
}

fn default_h() -> f64 {
    SimulationConfig::DEFAULT_STEP
}

fn default_stride() -> usize {
    SimulationConfig::DEFAULT_STRIDE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationFile {
    #[serde(default = "default_h")]
    pub h: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Disagreement,
    MaxPhi,
    PhiSpread,
    LipschitzV,
    LeaderError,
    RelativeMaxPhi,
}

impl Metric {
    pub fn column(&self) -> &'static str {
        match self {
            Metric::Disagreement => "disagreement",
            Metric::MaxPhi => "max_phi",
            Metric::PhiSpread => "phi_spread",
            Metric::LipschitzV => "lipschitz_v",
            Metric::LeaderError => "leader_error",
            Metric::RelativeMaxPhi => "relative_max_phi",
        }
    }

    fn needs_leader(&self) -> bool {
        matches!(self, Metric::LeaderError | Metric::RelativeMaxPhi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectivityMode {
    Strong,
    Leader,
    ConnectedUndirected,
}

impl std::str::FromStr for ConnectivityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strong" => Ok(ConnectivityMode::Strong),
            "leader" => Ok(ConnectivityMode::Leader),
            "connected-undirected" => Ok(ConnectivityMode::ConnectedUndirected),
            other => Err(format!(
                "unknown mode `{other}` (expected strong, leader or connected-undirected)"
            )),
        }
    }
}

fn default_eps() -> f64 {
    1e-3
}

fn default_sync_window() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorsFile {
    /// Metric columns appended to the trajectory CSV. `None` selects every
    /// metric that applies to the scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<Metric>>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_sync_window")]
    pub window: f64,
    /// Connectivity class the scenario is expected to satisfy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connectivity: Option<ConnectivityMode>,
}

impl Default for MonitorsFile {
    fn default() -> Self {
        MonitorsFile {
            metrics: None,
            eps: default_eps(),
            window: default_sync_window(),
            connectivity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub params: ParamsFile,
    pub dynamics: DynamicsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovFile>,
    pub signal: SignalFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leader: Option<LeaderFile>,
    pub initial_states: Vec<Vec<f64>>,
    pub integration: IntegrationFile,
    #[serde(default)]
    pub monitors: MonitorsFile,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ScenarioError::Invalid(vec![FieldError {
                path: if path == "." { "<root>".into() } else { path },
                message: e.into_inner().to_string(),
            }])
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Monitor settings with defaults resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Monitors {
    pub metrics: Vec<Metric>,
    pub eps: f64,
    pub window: f64,
    pub connectivity: ConnectivityMode,
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    /// Network constants; `lipschitz` is always filled in.
    pub params: NetworkParams,
    pub dynamics: DynamicsSpec,
    pub lyapunov: ConvexLyapunov,
    pub signal: SwitchingSignal,
    pub initial_states: Vec<f64>,
    pub leader_initial: Option<Vec<f64>>,
    pub h: f64,
    pub t_end: f64,
    pub output_stride: usize,
    pub monitors: Monitors,
    pub fingerprint: String,
}

struct Errors(Vec<FieldError>);

impl Errors {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldError {
            path: path.into(),
            message: message.into(),
        });
    }
}

fn build_dynamics(file: &DynamicsFile, dim: usize) -> Result<DynamicsSpec, String> {
    let spec = match file {
        DynamicsFile::Zero => DynamicsSpec::Zero { dim },
        DynamicsFile::Lti { a } => DynamicsSpec::LinearTimeInvariant {
            a: SquareMatrix::from_rows(a).map_err(|e| e.to_string())?,
        },
        DynamicsFile::SkewRotation { rates } => DynamicsSpec::SkewRotation {
            rates: rates.clone(),
        },
        DynamicsFile::SaturatedLipschitz { lipschitz } => DynamicsSpec::SaturatedLipschitz {
            dim,
            lipschitz: *lipschitz,
        },
        DynamicsFile::ForcedSaturated {
            gain,
            amplitude,
            omega,
        } => DynamicsSpec::ForcedSaturated {
            gain: *gain,
            amplitude: amplitude.clone(),
            omega: *omega,
        },
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn build_segment(
    seg: &SegmentFile,
    k: usize,
    num_agents: usize,
    leader: bool,
    errs: &mut Errors,
) -> Option<Segment> {
    let path = format!("signal.segments[{k}]");
    let mut edges = Vec::with_capacity(seg.edges.len());
    for (e, &(src, dst, w)) in seg.edges.iter().enumerate() {
        if src == 0 || dst == 0 || src > num_agents || dst > num_agents {
            errs.push(
                format!("{path}.edges[{e}]"),
                format!("agent indices must lie in 1..={num_agents} (params.num_agents), got {src}->{dst}"),
            );
            return None;
        }
        edges.push(Edge::new(src - 1, dst - 1, w));
    }
    let graph = match WeightedDigraph::new(num_agents, edges) {
        Ok(g) => g,
        Err(e) => {
            errs.push(format!("{path}.edges"), e.to_string());
            return None;
        }
    };
    let topology = match (&seg.leader_edges, leader) {
        (Some(_), false) => {
            errs.push(
                format!("{path}.leader_edges"),
                "leader edges given but the scenario has no `leader` block",
            );
            return None;
        }
        (None, false) => Topology::Leaderless(graph),
        (les, true) => {
            let mut out = Vec::new();
            for (e, &(dst, w)) in les.iter().flatten().enumerate() {
                if dst == 0 || dst > num_agents {
                    errs.push(
                        format!("{path}.leader_edges[{e}]"),
                        format!("target must lie in 1..={num_agents} (params.num_agents), got {dst}"),
                    );
                    return None;
                }
                out.push(LeaderEdge {
                    target: dst - 1,
                    weight: w,
                });
            }
            match LeaderGraph::new(graph, out) {
                Ok(lg) => Topology::LeaderFollower(lg),
                Err(e) => {
                    errs.push(format!("{path}.leader_edges"), e.to_string());
                    return None;
                }
            }
        }
    };
    Some(Segment {
        topology,
        duration: seg.duration,
    })
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Self::from_file(ScenarioFile::from_json(text)?)
    }

    /// Validates every field and cross-field constraint, collecting all
    /// problems before failing.
    pub fn from_file(file: ScenarioFile) -> Result<Self, ScenarioError> {
        let mut errs = Errors(Vec::new());
        let p = &file.params;
        let n = p.dim;
        let agents = p.num_agents;

        let base_params = NetworkParams {
            num_agents: agents,
            dim: n,
            a_lo: p.a_lo,
            a_hi: p.a_hi,
            b_lo: p.b_lo,
            tau_d: p.tau_d,
            window: p.window,
            lipschitz: p.lipschitz,
        };
        if let Err(e) = base_params.validate() {
            errs.push("params", e.to_string());
            return Err(ScenarioError::Invalid(errs.0));
        }

        let dynamics = match build_dynamics(&file.dynamics, n) {
            Ok(d) => Some(d),
            Err(msg) => {
                errs.push("dynamics", msg);
                None
            }
        };
        if let Some(d) = &dynamics {
            if d.dim() != n {
                errs.push(
                    "dynamics",
                    format!("dynamics has dimension {} but params.dim is {n}", d.dim()),
                );
            }
        }

        let lyapunov = match &file.lyapunov {
            None => Some(ConvexLyapunov::identity(n)),
            Some(l) => match SquareMatrix::from_rows(&l.p).and_then(ConvexLyapunov::new) {
                Ok(phi) if phi.dim() == n => Some(phi),
                Ok(phi) => {
                    errs.push(
                        "lyapunov.p",
                        format!(
                            "lyapunov.p is {0}x{0} but params.dim is {n}",
                            phi.dim()
                        ),
                    );
                    None
                }
                Err(e) => {
                    errs.push("lyapunov.p", e.to_string());
                    None
                }
            },
        };

        if file.initial_states.len() != agents {
            errs.push(
                "initial_states",
                format!(
                    "{} rows given but params.num_agents is {agents}",
                    file.initial_states.len()
                ),
            );
        }
        for (i, row) in file.initial_states.iter().enumerate() {
            if row.len() != n {
                errs.push(
                    format!("initial_states[{i}]"),
                    format!("{} entries but params.dim is {n}", row.len()),
                );
            }
        }
        let leader_initial = file.leader.as_ref().map(|l| l.initial_state.clone());
        if let Some(y) = &leader_initial {
            if y.len() != n {
                errs.push(
                    "leader.initial_state",
                    format!("{} entries but params.dim is {n}", y.len()),
                );
            }
        }

        let leader = file.leader.is_some();
        let mut segments = Vec::new();
        for (k, seg) in file.signal.segments.iter().enumerate() {
            if let Some(s) = build_segment(seg, k, agents, leader, &mut errs) {
                segments.push(s);
            }
        }
        let extension = match file.signal.extension {
            ExtensionFile::HoldLast => Extension::HoldLast,
            ExtensionFile::Periodic => Extension::Periodic,
        };
        let signal = if segments.len() == file.signal.segments.len() {
            match SwitchingSignal::new(segments, file.signal.start_time, extension) {
                Ok(s) => Some(s),
                Err(e) => {
                    errs.push("signal", e.to_string());
                    None
                }
            }
        } else {
            None
        };
        if let Some(signal) = &signal {
            let bounds = SignalBounds {
                tau_d: p.tau_d,
                a_lo: p.a_lo,
                a_hi: p.a_hi,
                b_lo: p.b_lo,
            };
            for v in validate_signal(signal, &bounds) {
                let path = match &v {
                    crate::graph::Violation::DwellTime { segment, .. }
                    | crate::graph::Violation::WeightOutOfBand { segment, .. }
                    | crate::graph::Violation::LeaderWeightBelowFloor { segment, .. } => {
                        format!("signal.segments[{segment}]")
                    }
                    crate::graph::Violation::InvalidBounds(_) => "params".into(),
                };
                errs.push(path, v.to_string());
            }
        }

        let lipschitz = match (&dynamics, p.lipschitz) {
            (Some(d), Some(given)) => {
                let exact = d.lipschitz_constant();
                if given < exact {
                    errs.push(
                        "params.lipschitz",
                        format!("{given} is below the dynamics' Lipschitz constant {exact}"),
                    );
                }
                given
            }
            (Some(d), None) => d.lipschitz_constant(),
            (None, _) => 0.0,
        };

        let integ = &file.integration;
        if !(integ.h.is_finite() && integ.h > 0.0) {
            errs.push("integration.h", format!("must be positive, got {}", integ.h));
        }
        if !(integ.t_end.is_finite() && integ.t_end > file.signal.start_time) {
            errs.push(
                "integration.t_end",
                format!(
                    "must be after signal.start_time {}, got {}",
                    file.signal.start_time, integ.t_end
                ),
            );
        }
        if integ.output_stride == 0 {
            errs.push("integration.output_stride", "must be >= 1");
        }

        let mon = &file.monitors;
        if !(mon.eps > 0.0) {
            errs.push("monitors.eps", format!("must be positive, got {}", mon.eps));
        }
        if !(mon.window > 0.0) {
            errs.push("monitors.window", format!("must be positive, got {}", mon.window));
        }
        let metrics = match &mon.metrics {
            Some(list) => {
                for (k, m) in list.iter().enumerate() {
                    if m.needs_leader() && !leader {
                        errs.push(
                            format!("monitors.metrics[{k}]"),
                            format!("{} needs a leader", m.column()),
                        );
                    }
                }
                list.clone()
            }
            None => {
                let mut all = vec![
                    Metric::Disagreement,
                    Metric::MaxPhi,
                    Metric::PhiSpread,
                    Metric::LipschitzV,
                ];
                if leader {
                    all.extend([Metric::LeaderError, Metric::RelativeMaxPhi]);
                }
                all
            }
        };
        let connectivity = mon.connectivity.unwrap_or(if leader {
            ConnectivityMode::Leader
        } else {
            ConnectivityMode::Strong
        });
        if connectivity == ConnectivityMode::Leader && !leader {
            errs.push("monitors.connectivity", "leader connectivity needs a leader");
        }

        if !errs.0.is_empty() {
            return Err(ScenarioError::Invalid(errs.0));
        }
        let (dynamics, lyapunov, signal) = (
            dynamics.expect("checked"),
            lyapunov.expect("checked"),
            signal.expect("checked"),
        );

        let mut normalized = file.clone();
        normalized.lyapunov = Some(LyapunovFile {
            p: lyapunov.matrix().rows(),
        });
        normalized.monitors.metrics = Some(metrics.clone());
        normalized.monitors.connectivity = Some(connectivity);
        let fingerprint =
            hex::encode(Sha256::digest(serde_json::to_vec(&normalized).expect("serializes")));

        Ok(Scenario {
            params: NetworkParams {
                lipschitz: Some(lipschitz),
                ..base_params
            },
            dynamics,
            lyapunov,
            signal,
            initial_states: file.initial_states.concat(),
            leader_initial,
            h: integ.h,
            t_end: integ.t_end,
            output_stride: integ.output_stride,
            monitors: Monitors {
                metrics,
                eps: mon.eps,
                window: mon.window,
                connectivity,
            },
            fingerprint,
            file,
        })
    }

    pub fn has_leader(&self) -> bool {
        self.leader_initial.is_some()
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        SimulationConfig {
            signal: self.signal.clone(),
            dynamics: self.dynamics.clone(),
            initial_states: self.initial_states.clone(),
            leader_initial: self.leader_initial.clone(),
            h: self.h,
            t_end: self.t_end,
            output_stride: self.output_stride,
        }
    }
}
