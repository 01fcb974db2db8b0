//! Switching communication topologies and joint-connectivity classes.
//!
//! Agents are indexed `0..num_agents` internally. In a leader-follower
//! topology the leader is a separate node that only ever sends; leader edges
//! are stored as `(target, weight)` pairs.
//!
//! A [`SwitchingSignal`] is a piecewise-constant schedule of topologies. Switch
//! instants belong to the segment that starts there (the signal is
//! right-continuous). After the last listed segment the schedule either holds
//! the last topology forever or repeats from the first one.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one agent")]
    NoAgents,
    #[error("self-loop on agent {0}")]
    SelfLoop(usize),
    #[error("edge {from}->{target} references an agent outside 0..{num_agents}")]
    AgentOutOfRange {
        from: usize,
        target: usize,
        num_agents: usize,
    },
    #[error("duplicate edge {from}->{target}")]
    DuplicateEdge { from: usize, target: usize },
    #[error("leader edge to agent {0} listed twice")]
    DuplicateLeaderEdge(usize),
    #[error("weight {weight} on edge {from}->{target} is not a positive finite number")]
    InvalidWeight {
        from: usize,
        target: usize,
        weight: f64,
    },
    #[error("signal has no segments")]
    EmptySignal,
    #[error("segment {segment} has non-positive or non-finite duration {duration}")]
    InvalidDuration { segment: usize, duration: f64 },
    #[error("segment {segment} has {found} agents, expected {expected}")]
    AgentCountMismatch {
        segment: usize,
        expected: usize,
        found: usize,
    },
    #[error("signal mixes leaderless and leader-follower segments")]
    MixedTopologyKinds,
    #[error("time before signal start ({t} < {start})")]
    TimeBeforeStart { t: f64, start: f64 },
    #[error("empty interval [{t1}, {t2})")]
    EmptyInterval { t1: f64, t2: f64 },
    #[error("window length must be positive and finite, got {0}")]
    InvalidWindow(f64),
    #[error("mode requires undirected segments (segment {0} is directed)")]
    DirectedSegment(usize),
    #[error("leader connectivity requested on a leaderless signal")]
    NotLeaderFollower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(source: usize, target: usize, weight: f64) -> Self {
        Edge {
            source,
            target,
            weight,
        }
    }
}

/// Weighted directed graph over `num_agents` nodes. An edge `j -> i` with
/// weight `a_ij` means agent `i` listens to agent `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    num_agents: usize,
    // sorted by (target, source)
    edges: Vec<Edge>,
}

impl WeightedDigraph {
    pub fn new(num_agents: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self, GraphError> {
        if num_agents == 0 {
            return Err(GraphError::NoAgents);
        }
        let mut by_pair = BTreeMap::new();
        for e in edges {
            if e.source >= num_agents || e.target >= num_agents {
                return Err(GraphError::AgentOutOfRange {
                    from: e.source,
                    target: e.target,
                    num_agents,
                });
            }
            if e.source == e.target {
                return Err(GraphError::SelfLoop(e.source));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(GraphError::InvalidWeight {
                    from: e.source,
                    target: e.target,
                    weight: e.weight,
                });
            }
            if by_pair.insert((e.target, e.source), e).is_some() {
                return Err(GraphError::DuplicateEdge {
                    from: e.source,
                    target: e.target,
                });
            }
        }
        Ok(WeightedDigraph {
            num_agents,
            edges: by_pair.into_values().collect(),
        })
    }

    pub fn empty(num_agents: usize) -> Result<Self, GraphError> {
        Self::new(num_agents, [])
    }

    /// Convenience constructor for unit-weight graphs.
    pub fn from_pairs(num_agents: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::new(num_agents, pairs.iter().map(|&(j, i)| Edge::new(j, i, 1.0)))
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.edges
            .binary_search_by(|e| (e.target, e.source).cmp(&(target, source)))
            .is_ok()
    }

    /// Edges whose target is `agent`.
    pub fn in_edges(&self, agent: usize) -> &[Edge] {
        let lo = self.edges.partition_point(|e| e.target < agent);
        let hi = self.edges.partition_point(|e| e.target <= agent);
        &self.edges[lo..hi]
    }

    /// True when every edge has its reverse (weights may differ).
    pub fn is_symmetric(&self) -> bool {
        self.edges.iter().all(|e| self.has_edge(e.target, e.source))
    }

    /// Out-neighbour adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_agents];
        for e in &self.edges {
            adj[e.source].push(e.target);
        }
        adj
    }
}

impl fmt::Display for WeightedDigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, e) in self.edges.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}->{}", e.source + 1, e.target + 1)?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderEdge {
    pub target: usize,
    pub weight: f64,
}

/// Follower graph plus edges from the leader (node 0 in the augmented graph).
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderGraph {
    followers: WeightedDigraph,
    // sorted by target
    leader_edges: Vec<LeaderEdge>,
}

impl LeaderGraph {
    pub fn new(
        followers: WeightedDigraph,
        leader_edges: impl IntoIterator<Item = LeaderEdge>,
    ) -> Result<Self, GraphError> {
        let n = followers.num_agents();
        let mut by_target = BTreeMap::new();
        for le in leader_edges {
            if le.target >= n {
                return Err(GraphError::AgentOutOfRange {
                    from: usize::MAX,
                    target: le.target,
                    num_agents: n,
                });
            }
            if !(le.weight.is_finite() && le.weight > 0.0) {
                return Err(GraphError::InvalidWeight {
                    from: usize::MAX,
                    target: le.target,
                    weight: le.weight,
                });
            }
            if by_target.insert(le.target, le).is_some() {
                return Err(GraphError::DuplicateLeaderEdge(le.target));
            }
        }
        Ok(LeaderGraph {
            followers,
            leader_edges: by_target.into_values().collect(),
        })
    }

    pub fn followers(&self) -> &WeightedDigraph {
        &self.followers
    }

    pub fn leader_edges(&self) -> &[LeaderEdge] {
        &self.leader_edges
    }

    pub fn leader_weight(&self, agent: usize) -> Option<f64> {
        self.leader_edges
            .binary_search_by_key(&agent, |le| le.target)
            .ok()
            .map(|k| self.leader_edges[k].weight)
    }
}

/// The graph active during one segment of a switching signal.
#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    Leaderless(WeightedDigraph),
    LeaderFollower(LeaderGraph),
}

impl Topology {
    pub fn followers(&self) -> &WeightedDigraph {
        match self {
            Topology::Leaderless(g) => g,
            Topology::LeaderFollower(lg) => lg.followers(),
        }
    }

    pub fn leader_edges(&self) -> &[LeaderEdge] {
        match self {
            Topology::Leaderless(_) => &[],
            Topology::LeaderFollower(lg) => lg.leader_edges(),
        }
    }

    pub fn has_leader(&self) -> bool {
        matches!(self, Topology::LeaderFollower(_))
    }

    pub fn num_agents(&self) -> usize {
        self.followers().num_agents()
    }
}

impl From<WeightedDigraph> for Topology {
    fn from(g: WeightedDigraph) -> Self {
        Topology::Leaderless(g)
    }
}

impl From<LeaderGraph> for Topology {
    fn from(g: LeaderGraph) -> Self {
        Topology::LeaderFollower(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    HoldLast,
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub topology: Topology,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSignal {
    segments: Vec<Segment>,
    start_time: f64,
    extension: Extension,
    // offsets of segment ends relative to start_time
    ends: Vec<f64>,
}

/// Slack used when comparing instants against switch times, so that window
/// ends computed as `t + T` land on the boundary they were derived from.
fn time_slack(t: f64) -> f64 {
    1e-12 * (1.0 + t.abs())
}

impl SwitchingSignal {
    pub fn new(
        segments: Vec<Segment>,
        start_time: f64,
        extension: Extension,
    ) -> Result<Self, GraphError> {
        let first = segments.first().ok_or(GraphError::EmptySignal)?;
        let expected = first.topology.num_agents();
        let leader = first.topology.has_leader();
        let mut ends = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for (k, seg) in segments.iter().enumerate() {
            if !(seg.duration.is_finite() && seg.duration > 0.0) {
                return Err(GraphError::InvalidDuration {
                    segment: k,
                    duration: seg.duration,
                });
            }
            if seg.topology.num_agents() != expected {
                return Err(GraphError::AgentCountMismatch {
                    segment: k,
                    expected,
                    found: seg.topology.num_agents(),
                });
            }
            if seg.topology.has_leader() != leader {
                return Err(GraphError::MixedTopologyKinds);
            }
            acc += seg.duration;
            ends.push(acc);
        }
        Ok(SwitchingSignal {
            segments,
            start_time,
            extension,
            ends,
        })
    }

    /// A signal that holds one topology forever.
    pub fn constant(topology: impl Into<Topology>, start_time: f64) -> Self {
        Self::new(
            vec![Segment {
                topology: topology.into(),
                duration: f64::MAX,
            }],
            start_time,
            Extension::HoldLast,
        )
        .expect("single positive segment is valid")
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn num_agents(&self) -> usize {
        self.segments[0].topology.num_agents()
    }

    pub fn has_leader(&self) -> bool {
        self.segments[0].topology.has_leader()
    }

    /// Sum of all listed segment durations.
    pub fn period(&self) -> f64 {
        *self.ends.last().expect("non-empty")
    }

    fn segment_start_offset(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.ends[k - 1]
        }
    }

    /// Index of the segment active at offset `tau` within one pass over the
    /// listed segments. Offsets at or past the final end map to the last
    /// segment.
    fn index_at_offset(&self, tau: f64) -> usize {
        let slack = time_slack(tau);
        let k = self.ends.partition_point(|&e| e <= tau + slack);
        k.min(self.segments.len() - 1)
    }

    /// Segment index active at absolute time `t`.
    pub fn segment_index_at(&self, t: f64) -> Result<usize, GraphError> {
        let rel = t - self.start_time;
        match self.extension {
            Extension::HoldLast => {
                if rel < -time_slack(t) {
                    return Err(GraphError::TimeBeforeStart {
                        t,
                        start: self.start_time,
                    });
                }
                Ok(self.index_at_offset(rel.max(0.0)))
            }
            Extension::Periodic => {
                let period = self.period();
                let mut tau = rel.rem_euclid(period);
                if period - tau <= time_slack(t) {
                    tau = 0.0;
                }
                Ok(self.index_at_offset(tau))
            }
        }
    }

    /// The topology active at `t`. Switch instants belong to the later segment.
    pub fn graph_at(&self, t: f64) -> Result<&Topology, GraphError> {
        Ok(&self.segments[self.segment_index_at(t)?].topology)
    }

    /// Switch instants strictly inside `(t1, t2)`, in increasing order.
    pub fn switch_times_between(&self, t1: f64, t2: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if t2 <= t1 {
            return out;
        }
        let inside = |s: f64| s > t1 + time_slack(t1) && s < t2 - time_slack(t2);
        match self.extension {
            Extension::HoldLast => {
                for k in 1..self.segments.len() {
                    let s = self.start_time + self.ends[k - 1];
                    if inside(s) {
                        out.push(s);
                    }
                }
            }
            Extension::Periodic => {
                let period = self.period();
                let first_cycle = ((t1 - self.start_time) / period).floor() as i64;
                let last_cycle = ((t2 - self.start_time) / period).ceil() as i64;
                for cycle in first_cycle..=last_cycle {
                    let base = self.start_time + cycle as f64 * period;
                    for k in 0..self.segments.len() {
                        let s = base + self.segment_start_offset(k);
                        if inside(s) {
                            out.push(s);
                        }
                    }
                }
            }
        }
        out
    }

    /// Indices of every segment occurrence intersecting `[t1, t2)`.
    fn segments_intersecting(&self, t1: f64, t2: f64) -> Result<Vec<usize>, GraphError> {
        if !(t1 < t2) {
            return Err(GraphError::EmptyInterval { t1, t2 });
        }
        let start = self.segment_index_at(t1)?;
        let mut hit = vec![false; self.segments.len()];
        hit[start] = true;
        for s in self.switch_times_between(t1, t2) {
            hit[self.segment_index_at(s)?] = true;
        }
        Ok(hit
            .iter()
            .enumerate()
            .filter_map(|(k, &h)| h.then_some(k))
            .collect())
    }

    /// Presence-only union of every topology active somewhere in `[t1, t2)`.
    /// Each union edge carries the largest weight seen for it.
    pub fn union_graph(&self, t1: f64, t2: f64) -> Result<Topology, GraphError> {
        let picked = self.segments_intersecting(t1, t2)?;
        Ok(union_of(
            picked.iter().map(|&k| &self.segments[k].topology),
            self.num_agents(),
            self.has_leader(),
        ))
    }
}

fn union_of<'a>(
    topologies: impl Iterator<Item = &'a Topology>,
    num_agents: usize,
    leader: bool,
) -> Topology {
    let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut leader_edges: BTreeMap<usize, f64> = BTreeMap::new();
    for topo in topologies {
        for e in topo.followers().edges() {
            let w = edges.entry((e.source, e.target)).or_insert(e.weight);
            *w = w.max(e.weight);
        }
        for le in topo.leader_edges() {
            let w = leader_edges.entry(le.target).or_insert(le.weight);
            *w = w.max(le.weight);
        }
    }
    let followers = WeightedDigraph::new(
        num_agents,
        edges.into_iter().map(|((j, i), w)| Edge::new(j, i, w)),
    )
    .expect("union of valid graphs is valid");
    if leader {
        let lg = LeaderGraph::new(
            followers,
            leader_edges
                .into_iter()
                .map(|(target, weight)| LeaderEdge { target, weight }),
        )
        .expect("union of valid leader graphs is valid");
        Topology::LeaderFollower(lg)
    } else {
        Topology::Leaderless(followers)
    }
}

/// Standing constraints a schedule is checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalBounds {
    pub tau_d: f64,
    pub a_lo: f64,
    pub a_hi: f64,
    pub b_lo: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DwellTime {
        segment: usize,
        duration: f64,
        tau_d: f64,
    },
    WeightOutOfBand {
        segment: usize,
        source: usize,
        target: usize,
        weight: f64,
    },
    LeaderWeightBelowFloor {
        segment: usize,
        target: usize,
        weight: f64,
    },
    InvalidBounds(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DwellTime {
                segment,
                duration,
                tau_d,
            } => write!(
                f,
                "segment {segment}: duration {duration} is below dwell time {tau_d}"
            ),
            Violation::WeightOutOfBand {
                segment,
                source,
                target,
                weight,
            } => write!(
                f,
                "segment {segment}: edge {}->{} weight {weight} outside the declared band",
                source + 1,
                target + 1
            ),
            Violation::LeaderWeightBelowFloor {
                segment,
                target,
                weight,
            } => write!(
                f,
                "segment {segment}: leader edge 0->{} weight {weight} below the declared floor",
                target + 1
            ),
            Violation::InvalidBounds(msg) => write!(f, "invalid bounds: {msg}"),
        }
    }
}

/// Checks dwell time and weight bands. An empty report means the signal
/// satisfies every standing constraint.
pub fn validate_signal(signal: &SwitchingSignal, bounds: &SignalBounds) -> Vec<Violation> {
    let mut report = Vec::new();
    if !(bounds.tau_d > 0.0 && bounds.a_lo > 0.0 && bounds.a_lo <= bounds.a_hi) {
        report.push(Violation::InvalidBounds(format!(
            "need tau_d > 0 and 0 < a_lo <= a_hi, got tau_d={}, a_lo={}, a_hi={}",
            bounds.tau_d, bounds.a_lo, bounds.a_hi
        )));
    }
    if let Some(b_lo) = bounds.b_lo {
        if !(b_lo > 0.0) {
            report.push(Violation::InvalidBounds(format!("need b_lo > 0, got {b_lo}")));
        }
    }
    for (k, seg) in signal.segments().iter().enumerate() {
        if seg.duration < bounds.tau_d {
            report.push(Violation::DwellTime {
                segment: k,
                duration: seg.duration,
                tau_d: bounds.tau_d,
            });
        }
        for e in seg.topology.followers().edges() {
            if e.weight < bounds.a_lo || e.weight > bounds.a_hi {
                report.push(Violation::WeightOutOfBand {
                    segment: k,
                    source: e.source,
                    target: e.target,
                    weight: e.weight,
                });
            }
        }
        if let Some(b_lo) = bounds.b_lo {
            for le in seg.topology.leader_edges() {
                if le.weight < b_lo {
                    report.push(Violation::LeaderWeightBelowFloor {
                        segment: k,
                        target: le.target,
                        weight: le.weight,
                    });
                }
            }
        }
    }
    report
}

fn reachable_from(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Every node reaches every other node along directed edges.
pub fn is_strongly_connected(g: &WeightedDigraph) -> bool {
    let adj = g.adjacency();
    if !reachable_from(&adj, 0).into_iter().all(|r| r) {
        return false;
    }
    let mut rev = vec![Vec::new(); adj.len()];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            rev[w].push(v);
        }
    }
    reachable_from(&rev, 0).into_iter().all(|r| r)
}

/// Every follower is reachable from the leader.
pub fn is_leader_connected(g: &LeaderGraph) -> bool {
    let n = g.followers().num_agents();
    // node n plays the leader
    let mut adj = g.followers().adjacency();
    adj.push(g.leader_edges().iter().map(|le| le.target).collect());
    reachable_from(&adj, n).into_iter().all(|r| r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniformMode {
    Strong,
    Leader,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfiniteMode {
    ConnectedUndirected,
    Leader,
}

fn topology_connected(topo: &Topology, leader_mode: bool) -> Result<bool, GraphError> {
    if leader_mode {
        match topo {
            Topology::LeaderFollower(lg) => Ok(is_leader_connected(lg)),
            Topology::Leaderless(_) => Err(GraphError::NotLeaderFollower),
        }
    } else {
        Ok(is_strongly_connected(topo.followers()))
    }
}

/// Window starts at which the union over `[t, t + window)` is smallest.
///
/// The set of segments meeting the window only changes when a boundary enters
/// or leaves it, i.e. at `b` or `b - window` for a switch instant `b`, and at
/// each such point the set is a subset of the sets just before and after it.
/// Checking those points is therefore exact.
fn critical_window_starts(signal: &SwitchingSignal, window: f64) -> Vec<f64> {
    let t0 = signal.start_time();
    let offsets: Vec<f64> = (0..signal.segments().len())
        .map(|k| signal.segment_start_offset(k))
        .collect();
    let mut starts = Vec::new();
    match signal.extension() {
        Extension::Periodic => {
            let period = signal.period();
            for &b in &offsets {
                starts.push(t0 + b);
                starts.push(t0 + (b - window).rem_euclid(period));
            }
        }
        Extension::HoldLast => {
            starts.push(t0);
            for &b in &offsets {
                starts.push(t0 + b);
                if b - window > 0.0 {
                    starts.push(t0 + b - window);
                }
            }
        }
    }
    starts.sort_by(f64::total_cmp);
    starts.dedup();
    starts
}

/// Every union over `[t, t + window)` is strongly (or leader) connected.
///
/// Exact for periodic signals. For hold-last signals every window start from
/// the signal start onward is covered, including the constant tail.
pub fn check_uniform_joint_connectivity(
    signal: &SwitchingSignal,
    window: f64,
    mode: UniformMode,
) -> Result<bool, GraphError> {
    if !(window.is_finite() && window > 0.0) {
        return Err(GraphError::InvalidWindow(window));
    }
    let leader_mode = mode == UniformMode::Leader;
    if leader_mode && !signal.has_leader() {
        return Err(GraphError::NotLeaderFollower);
    }
    for t in critical_window_starts(signal, window) {
        let union = signal.union_graph(t, t + window)?;
        if !topology_connected(&union, leader_mode)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The union over every suffix `[t, inf)` is connected (or leader connected).
///
/// For periodic signals every suffix contains a full period; for hold-last
/// signals the tail union is just the last topology.
pub fn check_infinite_joint_connectivity(
    signal: &SwitchingSignal,
    mode: InfiniteMode,
) -> Result<bool, GraphError> {
    let leader_mode = mode == InfiniteMode::Leader;
    if leader_mode && !signal.has_leader() {
        return Err(GraphError::NotLeaderFollower);
    }
    if mode == InfiniteMode::ConnectedUndirected {
        if let Some(k) = signal
            .segments()
            .iter()
            .position(|s| !s.topology.followers().is_symmetric())
        {
            return Err(GraphError::DirectedSegment(k));
        }
    }
    let tail = match signal.extension() {
        Extension::Periodic => union_of(
            signal.segments().iter().map(|s| &s.topology),
            signal.num_agents(),
            signal.has_leader(),
        ),
        Extension::HoldLast => signal.segments().last().expect("non-empty").topology.clone(),
    };
    topology_connected(&tail, leader_mode)
}
