//! Command-line front end: `simulate`, `certify`, `check-graph`, `sweep`.
//!
//! Exit codes are part of the interface: 0 success or satisfied, 1 runtime
//! failure (blow-up, I/O), 2 violated, 3 not-applicable or undecidable,
//! 64 usage.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::certificates::{
    leader_follower_certificate, leaderless_lipschitz_certificate,
    nonexpansive_contraction_factors, Certificate, NetworkParams, Verdict,
};
use crate::dynamics::{check_dissipation, SampleSet};
use crate::graph::{
    check_infinite_joint_connectivity, check_uniform_joint_connectivity, GraphError,
    InfiniteMode, UniformMode,
};
use crate::metrics::{self, check_exponential_envelope, TimeSeries};
use crate::scenario::{ConnectivityMode, DynamicsFile, Metric, Scenario, ScenarioFile};
use crate::simulator::{simulate, SimError, Trajectory};
use crate::Tolerance;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;
pub const EXIT_NOT_APPLICABLE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Seed for the assumption-check sampler.
pub const SEED_ENV: &str = "SYNCNET_SEED";

const DISSIPATION_SAMPLES: usize = 256;
const ENVELOPE_TOL_REL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "syncnet", version, about = "Simulate and certify synchronization over switching graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a scenario and write trajectory.csv and manifest.txt.
    Simulate(SimulateArgs),
    /// Print convergence constants and verdicts for a set of network parameters.
    Certify(CertifyArgs),
    /// Report which joint-connectivity classes a scenario's signal satisfies.
    CheckGraph(CheckGraphArgs),
    /// Run a scenario once per value of a scalar parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Override the integration step.
    #[arg(long)]
    h: Option<f64>,
    /// Override the final time.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    /// Take parameters from a scenario; flags below override them.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    num_agents: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    a_lo: Option<f64>,
    #[arg(long)]
    a_hi: Option<f64>,
    /// Leader-edge weight floor; selects the leader-follower certificate.
    #[arg(long)]
    b_lo: Option<f64>,
    #[arg(long)]
    tau_d: Option<f64>,
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct CheckGraphArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Window T for the uniform classes (default: params.window).
    #[arg(long)]
    window: Option<f64>,
    /// Class that must hold (default: monitors.connectivity).
    #[arg(long)]
    mode: Option<ConnectivityMode>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// One of L_f, h, t_end, weight_scale.
    #[arg(long)]
    param: String,
    /// Comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
}

enum Failure {
    Usage(String),
    NotApplicable(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::NotApplicable(_) => EXIT_NOT_APPLICABLE,
            Failure::Runtime(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::NotApplicable(m) | Failure::Runtime(m) => m,
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first) and runs the selected command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Certify(a) => cmd_certify(a, out),
        Command::CheckGraph(a) => cmd_check_graph(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn load_file(path: &Path) -> Result<ScenarioFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    ScenarioFile::from_json(&text).map_err(|e| Failure::Usage(format!("{}:\n{e}", path.display())))
}

fn validate(file: ScenarioFile, path: &Path) -> Result<Scenario, Failure> {
    Scenario::from_file(file).map_err(|e| Failure::Usage(format!("{}:\n{e}", path.display())))
}

fn sampler_seed() -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{s}`"))),
        Err(_) => Ok(0),
    }
}

/// Certificates computable from the scenario's parameters: the rate
/// certificate matching the network kind, plus the contraction diagnostics.
fn scenario_certificates(scenario: &Scenario) -> Vec<Certificate> {
    let p = &scenario.params;
    let mut certs = Vec::new();
    if scenario.has_leader() {
        if p.b_lo.is_some() {
            certs.extend(leader_follower_certificate(p).ok());
        }
    } else {
        certs.extend(leaderless_lipschitz_certificate(p).ok());
        certs.extend(nonexpansive_contraction_factors(p).ok());
    }
    certs
}

fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn metric_series(scenario: &Scenario, traj: &Trajectory, metric: Metric) -> TimeSeries {
    let phi = &scenario.lyapunov;
    match metric {
        Metric::Disagreement => metrics::disagreement_series(traj),
        Metric::MaxPhi => metrics::max_phi_series(traj, phi),
        Metric::PhiSpread => metrics::phi_spread_series(traj, phi),
        Metric::LipschitzV => {
            metrics::lipschitz_v_series(traj, scenario.params.lipschitz.unwrap_or(0.0))
        }
        Metric::LeaderError => metrics::leader_error_series(traj).expect("validated leader"),
        Metric::RelativeMaxPhi => {
            metrics::relative_max_phi_series(traj, phi).expect("validated leader")
        }
    }
}

fn write_trajectory(path: &Path, scenario: &Scenario, traj: &Trajectory) -> Result<(), Failure> {
    let (n_agents, dim) = (traj.num_agents, traj.dim);
    let mut header = vec!["t".to_string()];
    for i in 1..=n_agents {
        for k in 1..=dim {
            header.push(format!("x_{i}_{k}"));
        }
    }
    if traj.has_leader() {
        header.extend((1..=dim).map(|k| format!("y_{k}")));
    }
    let series: Vec<TimeSeries> = scenario
        .monitors
        .metrics
        .iter()
        .map(|&m| {
            header.push(m.column().to_string());
            metric_series(scenario, traj, m)
        })
        .collect();

    let mut w = csv::Writer::from_path(path).map_err(|e| io_failure(path, e))?;
    w.write_record(&header).map_err(|e| io_failure(path, e))?;
    let mut row = Vec::with_capacity(header.len());
    for (k, s) in traj.samples.iter().enumerate() {
        row.clear();
        row.push(format_f64(s.t));
        row.extend(s.x.iter().map(|&v| format_f64(v)));
        if let Some(y) = &s.y {
            row.extend(y.iter().map(|&v| format_f64(v)));
        }
        row.extend(series.iter().map(|m| format_f64(m.values[k])));
        w.write_record(&row).map_err(|e| io_failure(path, e))?;
    }
    w.flush().map_err(|e| io_failure(path, e))
}

fn dissipation_line(scenario: &Scenario, seed: u64) -> String {
    let radius = scenario
        .initial_states
        .iter()
        .chain(scenario.leader_initial.iter().flatten())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let samples = SampleSet::seeded(
        seed,
        DISSIPATION_SAMPLES,
        scenario.params.dim,
        radius,
        scenario.t_end,
    );
    let violations = check_dissipation(
        &scenario.lyapunov,
        &scenario.dynamics,
        &samples,
        scenario.has_leader(),
        Tolerance::default(),
    );
    if violations.is_empty() {
        format!("holds ({DISSIPATION_SAMPLES} samples)")
    } else {
        format!(
            "violated at {} of {DISSIPATION_SAMPLES} samples (first at t = {})",
            violations.len(),
            violations[0].t
        )
    }
}

fn write_manifest(
    path: &Path,
    scenario: &Scenario,
    traj: &Trajectory,
    certs: &[Certificate],
    seed: u64,
) -> Result<(), Failure> {
    let mut m = String::new();
    let mut line = |k: &str, v: String| {
        m.push_str(k);
        m.push_str(" = ");
        m.push_str(&v);
        m.push('\n');
    };
    line("scenario_fingerprint", scenario.fingerprint.clone());
    line("config_fingerprint", traj.fingerprint.clone());
    line("h", format_f64(scenario.h));
    line("t_end", format_f64(scenario.t_end));
    line("output_stride", scenario.output_stride.to_string());
    line("samples", traj.samples.len().to_string());
    line("num_agents", scenario.params.num_agents.to_string());
    line("dim", scenario.params.dim.to_string());
    line("lipschitz", format_f64(scenario.params.lipschitz.unwrap_or(0.0)));
    line("sampler_seed", seed.to_string());
    line("dissipation_check", dissipation_line(scenario, seed));
    for c in certs {
        line(&format!("certificate.{}", c.kind.name()), c.verdict.to_string());
        if let Some((gamma, lambda)) = c.envelope() {
            line(&format!("certificate.{}.gamma", c.kind.name()), format_f64(gamma));
            line(&format!("certificate.{}.lambda", c.kind.name()), format_f64(lambda));
        }
    }
    fs::write(path, m).map_err(|e| io_failure(path, e))
}

struct RunOutput {
    traj: Trajectory,
    certs: Vec<Certificate>,
}

fn run_scenario(scenario: &Scenario, dir: &Path, seed: u64) -> Result<RunOutput, Failure> {
    let traj = simulate(&scenario.simulation_config()).map_err(|e| match e {
        SimError::BlowUp { t } => Failure::Runtime(format!("state blew up at t = {t}")),
        other => Failure::Runtime(other.to_string()),
    })?;
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    write_trajectory(&dir.join("trajectory.csv"), scenario, &traj)?;
    let certs = scenario_certificates(scenario);
    write_manifest(&dir.join("manifest.txt"), scenario, &traj, &certs, seed)?;
    Ok(RunOutput { traj, certs })
}

fn cmd_simulate(args: SimulateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut file = load_file(&args.scenario)?;
    if let Some(h) = args.h {
        file.integration.h = h;
    }
    if let Some(t_end) = args.t_end {
        file.integration.t_end = t_end;
    }
    let scenario = validate(file, &args.scenario)?;
    let seed = sampler_seed()?;
    let run = run_scenario(&scenario, &args.out, seed)?;
    let _ = writeln!(
        out,
        "wrote {} samples to {}",
        run.traj.samples.len(),
        args.out.join("trajectory.csv").display()
    );
    for c in &run.certs {
        let _ = writeln!(out, "certificate {}: {}", c.kind.name(), c.verdict);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CertifyReport<'a> {
    params: &'a NetworkParams,
    certificates: &'a [Certificate],
    verdict: Verdict,
}

fn cmd_certify(args: CertifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let base = match &args.scenario {
        Some(path) => Some(validate(load_file(path)?, path)?.params),
        None => None,
    };
    let mut missing = Vec::new();
    let mut pick = |flag: Option<f64>, from: Option<f64>, name: &'static str| {
        let v = flag.or(from);
        if v.is_none() {
            missing.push(name);
        }
        v.unwrap_or(f64::NAN)
    };
    let a_lo = pick(args.a_lo, base.map(|b| b.a_lo), "--a-lo");
    let a_hi = pick(args.a_hi, base.map(|b| b.a_hi), "--a-hi");
    let tau_d = pick(args.tau_d, base.map(|b| b.tau_d), "--tau-d");
    let window = pick(args.window, base.map(|b| b.window), "--window");
    let lipschitz = pick(args.lipschitz, base.and_then(|b| b.lipschitz), "--lipschitz");
    let num_agents = args.num_agents.or(base.map(|b| b.num_agents));
    if num_agents.is_none() {
        missing.push("--num-agents");
    }
    if !missing.is_empty() {
        return Err(Failure::Usage(format!(
            "incomplete parameters, missing {}",
            missing.join(", ")
        )));
    }
    let params = NetworkParams {
        num_agents: num_agents.expect("checked"),
        dim: args.dim.or(base.map(|b| b.dim)).unwrap_or(1),
        a_lo,
        a_hi,
        b_lo: args.b_lo.or(base.and_then(|b| b.b_lo)),
        tau_d,
        window,
        lipschitz: Some(lipschitz),
    };
    params
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;

    let leader = params.b_lo.is_some();
    let requested = if leader {
        leader_follower_certificate(&params)
    } else {
        leaderless_lipschitz_certificate(&params)
    }
    .map_err(|e| Failure::NotApplicable(e.to_string()))?;
    let verdict = requested.verdict;
    let mut certs = vec![requested];
    if !leader {
        certs.extend(nonexpansive_contraction_factors(&params).ok());
    }

    match args.format {
        Format::Text => {
            for c in &certs {
                let _ = writeln!(out, "{c}");
            }
            let _ = writeln!(out, "verdict: {verdict}");
        }
        Format::Json => {
            let report = CertifyReport {
                params: &params,
                certificates: &certs,
                verdict,
            };
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
        }
    }
    Ok(match verdict {
        Verdict::Satisfied => EXIT_OK,
        Verdict::Violated => EXIT_VIOLATED,
        Verdict::NotApplicable => EXIT_NOT_APPLICABLE,
    })
}

fn describe(r: &Result<bool, GraphError>) -> String {
    match r {
        Ok(b) => b.to_string(),
        Err(e) => format!("undecidable ({e})"),
    }
}

fn cmd_check_graph(args: CheckGraphArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let scenario = validate(load_file(&args.scenario)?, &args.scenario)?;
    let signal = &scenario.signal;
    let window = args.window.unwrap_or(scenario.params.window);
    if !(window.is_finite() && window > 0.0) {
        return Err(Failure::Usage(format!("--window must be positive, got {window}")));
    }
    let mode = args.mode.unwrap_or(scenario.monitors.connectivity);

    let ujsc = check_uniform_joint_connectivity(signal, window, UniformMode::Strong);
    let _ = writeln!(out, "uniformly jointly strongly connected (T = {window}): {}", describe(&ujsc));
    let ijc = check_infinite_joint_connectivity(signal, InfiniteMode::ConnectedUndirected);
    let _ = writeln!(out, "infinitely jointly connected (undirected): {}", describe(&ijc));
    let ujlc = if signal.has_leader() {
        let u = check_uniform_joint_connectivity(signal, window, UniformMode::Leader);
        let i = check_infinite_joint_connectivity(signal, InfiniteMode::Leader);
        let _ = writeln!(out, "uniformly jointly leader connected (T = {window}): {}", describe(&u));
        let _ = writeln!(out, "infinitely jointly leader connected: {}", describe(&i));
        u
    } else {
        Err(GraphError::NotLeaderFollower)
    };

    let required = match mode {
        ConnectivityMode::Strong => ujsc,
        ConnectivityMode::ConnectedUndirected => ijc,
        ConnectivityMode::Leader => ujlc,
    };
    let name = match mode {
        ConnectivityMode::Strong => "strong",
        ConnectivityMode::Leader => "leader",
        ConnectivityMode::ConnectedUndirected => "connected-undirected",
    };
    match required {
        Ok(true) => {
            let _ = writeln!(out, "required class ({name}): holds");
            Ok(EXIT_OK)
        }
        Ok(false) => {
            let _ = writeln!(out, "required class ({name}): fails");
            Ok(EXIT_VIOLATED)
        }
        Err(e) => Err(Failure::NotApplicable(format!(
            "required class ({name}) cannot be decided: {e}"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepParam {
    LipschitzF,
    Step,
    TEnd,
    WeightScale,
}

impl SweepParam {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "L_f" => Some(SweepParam::LipschitzF),
            "h" => Some(SweepParam::Step),
            "t_end" => Some(SweepParam::TEnd),
            "weight_scale" => Some(SweepParam::WeightScale),
            _ => None,
        }
    }

    fn apply(self, file: &mut ScenarioFile, v: f64) {
        match self {
            SweepParam::LipschitzF => {
                if let DynamicsFile::SaturatedLipschitz { lipschitz } = &mut file.dynamics {
                    *lipschitz = v;
                }
                // the declared constant is recomputed from the new dynamics
                file.params.lipschitz = None;
            }
            SweepParam::Step => file.integration.h = v,
            SweepParam::TEnd => file.integration.t_end = v,
            SweepParam::WeightScale => {
                for seg in &mut file.signal.segments {
                    for e in &mut seg.edges {
                        e.2 *= v;
                    }
                    for e in seg.leader_edges.iter_mut().flatten() {
                        e.1 *= v;
                    }
                }
                file.params.a_lo *= v;
                file.params.a_hi *= v;
                if let Some(b) = &mut file.params.b_lo {
                    *b *= v;
                }
            }
        }
    }
}

struct SweepRow {
    value: f64,
    dir: String,
    final_disagreement: Option<f64>,
    final_leader_error: Option<f64>,
    envelope: &'static str,
    certificate: String,
    status: String,
}

fn sweep_one(base: &ScenarioFile, param: SweepParam, value: f64, dir: &Path, seed: u64) -> SweepRow {
    let mut row = SweepRow {
        value,
        dir: dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        final_disagreement: None,
        final_leader_error: None,
        envelope: "n/a",
        certificate: "n/a".into(),
        status: "ok".into(),
    };
    let mut file = base.clone();
    param.apply(&mut file, value);
    let scenario = match Scenario::from_file(file) {
        Ok(s) => s,
        Err(e) => {
            row.status = format!("invalid: {}", e.to_string().replace('\n', "; "));
            return row;
        }
    };
    let run = match run_scenario(&scenario, dir, seed) {
        Ok(r) => r,
        Err(f) => {
            row.status = f.message().to_string();
            return row;
        }
    };
    let disagreement = metrics::disagreement_series(&run.traj);
    let leader_error = metrics::leader_error_series(&run.traj);
    row.final_disagreement = disagreement.last();
    row.final_leader_error = leader_error.as_ref().and_then(TimeSeries::last);

    // the rate certificate is listed first
    if let Some(cert) = run.certs.first() {
        row.certificate = cert.verdict.to_string();
        if let Some((gamma, lambda)) = cert.envelope() {
            let tracked = leader_error.as_ref().unwrap_or(&disagreement);
            let check = check_exponential_envelope(
                tracked,
                run.traj.start_time(),
                gamma,
                lambda,
                ENVELOPE_TOL_REL,
            );
            row.envelope = if check.holds { "true" } else { "false" };
        }
    }
    row
}

fn cmd_sweep(args: SweepArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let param = SweepParam::parse(&args.param).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown sweep parameter `{}` (expected L_f, h, t_end or weight_scale)",
            args.param
        ))
    })?;
    let values = args
        .values
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Failure::Usage(format!("--values: `{s}` is not a number")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if values.is_empty() {
        return Err(Failure::Usage("--values is empty".into()));
    }
    if args.jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    let base = load_file(&args.scenario)?;
    if param == SweepParam::LipschitzF
        && !matches!(base.dynamics, DynamicsFile::SaturatedLipschitz { .. })
    {
        return Err(Failure::Usage(
            "sweeping L_f needs saturated_lipschitz dynamics".into(),
        ));
    }
    // catch scenario errors once up front rather than once per value
    validate(base.clone(), &args.scenario)?;
    let seed = sampler_seed()?;

    fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(k, &v)| sweep_one(&base, param, v, &args.out.join(format!("run_{k:03}")), seed))
            .collect()
    });

    let summary = args.out.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary).map_err(|e| io_failure(&summary, e))?;
    let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    w.write_record([
        "value",
        "run",
        "final_disagreement",
        "final_leader_error",
        "envelope",
        "certificate",
        "status",
    ])
    .map_err(|e| io_failure(&summary, e))?;
    for r in &rows {
        w.write_record([
            format_f64(r.value),
            r.dir.clone(),
            opt(r.final_disagreement),
            opt(r.final_leader_error),
            r.envelope.to_string(),
            r.certificate.clone(),
            r.status.clone(),
        ])
        .map_err(|e| io_failure(&summary, e))?;
    }
    w.flush().map_err(|e| io_failure(&summary, e))?;

    let failed = rows.iter().filter(|r| r.status != "ok").count();
    let _ = writeln!(
        out,
        "{} runs, {failed} failed; summary in {}",
        rows.len(),
        summary.display()
    );
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}
