//! Closed-form convergence constants.
//!
//! Every certificate is a pure function of [`NetworkParams`]. Products of
//! many exponentials are evaluated in log space, and `1 - q` style rates use
//! `ln_1p`, so tiny contraction margins keep full relative precision.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error("invalid network parameters: {0}")]
    InvalidParams(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("degenerate follower count: need at least two followers")]
    DegenerateFollowerCount,
}

/// Network-level constants entering every bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetworkParams {
    pub num_agents: usize,
    pub dim: usize,
    /// Lower end of the coupling-weight band.
    pub a_lo: f64,
    /// Upper end of the coupling-weight band.
    pub a_hi: f64,
    /// Floor on leader-edge weights.
    pub b_lo: Option<f64>,
    /// Dwell time between switches, seconds.
    pub tau_d: f64,
    /// Joint-connectivity window `T`, seconds.
    pub window: f64,
    /// Global Lipschitz constant of the agent dynamics.
    pub lipschitz: Option<f64>,
}

impl NetworkParams {
    pub fn validate(&self) -> Result<(), CertificateError> {
        let bad = |msg: String| Err(CertificateError::InvalidParams(msg));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if self.num_agents == 0 {
            return bad("num_agents must be >= 1".into());
        }
        if self.dim == 0 {
            return bad("dim must be >= 1".into());
        }
        if !(pos(self.a_lo) && pos(self.a_hi) && self.a_lo <= self.a_hi) {
            return bad(format!(
                "need 0 < a_lo <= a_hi, got a_lo={}, a_hi={}",
                self.a_lo, self.a_hi
            ));
        }
        if !pos(self.tau_d) {
            return bad(format!("tau_d must be positive, got {}", self.tau_d));
        }
        if !pos(self.window) {
            return bad(format!("window must be positive, got {}", self.window));
        }
        if let Some(b) = self.b_lo {
            if !pos(b) {
                return bad(format!("b_lo must be positive, got {b}"));
            }
        }
        if let Some(l) = self.lipschitz {
            if !(l.is_finite() && l >= 0.0) {
                return bad(format!("lipschitz must be >= 0, got {l}"));
            }
        }
        Ok(())
    }

    fn require_pair(&self) -> Result<(), CertificateError> {
        self.validate()?;
        if self.num_agents < 2 {
            return Err(CertificateError::InvalidParams(
                "need at least two agents".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Satisfied,
    Violated,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::NotApplicable => "not-applicable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    /// Contraction factors of the non-expansive (dissipative) case.
    /// Diagnostic only: no threshold is attached.
    ContractionFactors,
    /// Exponential synchronization of the leaderless network under a
    /// Lipschitz vector field.
    LeaderlessLipschitz,
    /// Exponential tracking of the leader under a Lipschitz vector field.
    LeaderFollower,
}

impl CertificateKind {
    pub fn name(&self) -> &'static str {
        match self {
            CertificateKind::ContractionFactors => "contraction-factors",
            CertificateKind::LeaderlessLipschitz => "leaderless-lipschitz",
            CertificateKind::LeaderFollower => "leader-follower",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constant {
    pub name: &'static str,
    pub value: f64,
    pub formula: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub constants: Vec<Constant>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl Certificate {
    fn new(kind: CertificateKind) -> Self {
        Certificate {
            kind,
            constants: Vec::new(),
            verdict: Verdict::NotApplicable,
            notes: Vec::new(),
        }
    }

    fn push(&mut self, name: &'static str, value: f64, formula: &'static str) -> f64 {
        self.constants.push(Constant {
            name,
            value,
            formula,
        });
        value
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|c| c.name == name).map(|c| c.value)
    }

    /// `(gamma, lambda)` of the exponential envelope, when the verdict is
    /// satisfied.
    pub fn envelope(&self) -> Option<(f64, f64)> {
        if self.verdict != Verdict::Satisfied {
            return None;
        }
        Some((self.get("gamma")?, self.get("lambda")?))
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}]", self.kind.name())?;
        let width = self.constants.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.constants {
            writeln!(
                f,
                "  {:<width$}  {:>24.16e}   {}",
                c.name, c.value, c.formula
            )?;
        }
        writeln!(f, "  {:<width$}  {}", "verdict", self.verdict)?;
        for note in &self.notes {
            writeln!(f, "  note: {note}")?;
        }
        Ok(())
    }
}

/// `T0 = T + 2 tau_D`: any window of this length contains a full dwell
/// interval of every edge that the joint-connectivity window guarantees.
pub fn compute_t0(params: &NetworkParams) -> f64 {
    params.window + 2.0 * params.tau_d
}

/// `1 - exp(-x)` without cancellation.
fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// Per-agent contraction factors of the non-expansive case.
pub fn nonexpansive_contraction_factors(
    params: &NetworkParams,
) -> Result<Certificate, CertificateError> {
    params.require_pair()?;
    let n = params.num_agents as f64;
    let (a_lo, a_hi, tau) = (params.a_lo, params.a_hi, params.tau_d);
    let mut cert = Certificate::new(CertificateKind::ContractionFactors);

    let t0 = cert.push("T0", compute_t0(params), "T + 2*tau_D");
    let l1 = cert.push("lambda_1", a_hi * (n - 1.0), "a_hi*(N-1)");
    let l2 = cert.push("lambda_2", a_hi * (n - 2.0) + a_lo, "a_hi*(N-2) + a_lo");
    let ln_rho = -l1 * (n - 1.0) * t0;
    cert.push("rho", ln_rho.exp(), "exp(-a_hi*(N-1)^2*T0)");
    let one_minus_mu = a_lo * one_minus_exp_neg(l2 * tau) / l2;
    cert.push(
        "mu",
        1.0 - one_minus_mu,
        "(lambda_2 - a_lo*(1 - exp(-lambda_2*tau_D))) / lambda_2",
    );
    cert.push(
        "phi_N_minus_1",
        ((n - 1.0) * (one_minus_mu.ln() + 2.0 * ln_rho)).exp(),
        "((1-mu)*rho^2)^(N-1)",
    );
    let ln_rho_hat = -a_hi * (n - 1.0) * tau;
    cert.push("rho_hat", ln_rho_hat.exp(), "exp(-a_hi*(N-1)*tau_D)");
    cert.push(
        "phi_hat_N_minus_1",
        ((n - 1.0) * (one_minus_mu.ln() + 2.0 * ln_rho_hat)).exp(),
        "((1-mu)*rho_hat^2)^(N-1)",
    );
    cert.notes
        .push("diagnostic only: the non-expansive case needs no threshold".into());
    Ok(cert)
}

fn rate_verdict(cert: &mut Certificate, rate: f64, lipschitz: f64) {
    let lambda = cert.push("lambda", rate - 2.0 * lipschitz, "rate - 2*L");
    cert.verdict = if lipschitz < rate / 2.0 {
        debug_assert!(lambda > 0.0);
        Verdict::Satisfied
    } else {
        Verdict::Violated
    };
}

/// Exponential-synchronization constants for a leaderless network with a
/// globally Lipschitz vector field. Satisfied iff `L < rho_star / 2`.
pub fn leaderless_lipschitz_certificate(
    params: &NetworkParams,
) -> Result<Certificate, CertificateError> {
    params.require_pair()?;
    let lipschitz = params
        .lipschitz
        .ok_or(CertificateError::MissingParameter("lipschitz"))?;
    let n = params.num_agents as f64;
    let (a_lo, a_hi, tau) = (params.a_lo, params.a_hi, params.tau_d);
    let mut cert = Certificate::new(CertificateKind::LeaderlessLipschitz);

    let n_bar = cert.push("N_bar", n - 1.0, "N - 1");
    let t0 = cert.push("T0", compute_t0(params), "T + 2*tau_D");
    let alpha = cert.push("alpha", (2.0 * n - 3.0) * a_hi + a_lo, "(2N-3)*a_hi + a_lo");
    let alpha_bar = cert.push("alpha_bar", 2.0 * (n - 1.0) * a_hi, "2*(N-1)*a_hi");
    let ln_beta_star =
        one_minus_exp_neg(alpha * tau).ln() + (a_lo / alpha).ln() - alpha_bar * n_bar * t0;
    let beta_star = cert.push(
        "beta_star",
        ln_beta_star.exp(),
        "(1 - exp(-alpha*tau_D)) * (a_lo/alpha) * exp(-alpha_bar*N_bar*T0)",
    );
    let q = (n_bar * ln_beta_star).exp();
    cert.push("beta_tilde", 1.0 - q, "1 - beta_star^N_bar");
    let rho_star = cert.push(
        "rho_star",
        -(-q).ln_1p() / (n_bar * t0),
        "ln(1/beta_tilde) / (N_bar*T0)",
    );
    cert.push("gamma", (-(-q).ln_1p()).exp(), "1 / beta_tilde");
    cert.push("L", lipschitz, "global Lipschitz constant");

    if !(beta_star > 0.0 && beta_star < 1.0 && q > 0.0 && rho_star > 0.0) {
        cert.push("lambda", rho_star - 2.0 * lipschitz, "rho_star - 2*L");
        cert.notes.push(format!(
            "beta_star^N_bar = {q:e} underflows; the rate is not representable"
        ));
        cert.verdict = Verdict::NotApplicable;
        return Ok(cert);
    }
    rate_verdict(&mut cert, rho_star, lipschitz);
    Ok(cert)
}

/// Exponential leader-tracking constants. Satisfied iff `L < rho_hat_star / 2`.
///
/// The horizon `T* = N * T0` is the longer of the two horizons that appear in
/// the derivation, giving the smaller (safer) rate. The factor
/// `exp(+(N-2)(N+1)/2 * lambda_bar_1 * T0)` in `delta_N` is kept exactly as
/// derived; whenever it pushes `delta_N` out of `(0, 1)` the certificate is
/// reported as not applicable instead of being clamped.
pub fn leader_follower_certificate(
    params: &NetworkParams,
) -> Result<Certificate, CertificateError> {
    params.validate()?;
    if params.num_agents < 2 {
        return Err(CertificateError::DegenerateFollowerCount);
    }
    let b = params
        .b_lo
        .ok_or(CertificateError::MissingParameter("b_lo"))?;
    let lipschitz = params
        .lipschitz
        .ok_or(CertificateError::MissingParameter("lipschitz"))?;
    let n = params.num_agents as f64;
    let (a_lo, a_hi, tau) = (params.a_lo, params.a_hi, params.tau_d);
    let mut cert = Certificate::new(CertificateKind::LeaderFollower);

    let t0 = cert.push("T0", compute_t0(params), "T + 2*tau_D");
    let t_star = cert.push("T_star", n * t0, "N*T0");
    let lb1 = cert.push("lambda_bar_1", a_hi * (n - 1.0), "a_hi*(N-1)");
    let lb2 = cert.push("lambda_bar_2", a_hi * (n - 2.0) + a_lo, "a_hi*(N-2) + a_lo");
    let lh1 = cert.push("lambda_hat_1", a_hi * (n - 1.0) + b, "a_hi*(N-1) + b_lo");
    cert.push(
        "delta_hat_1",
        (lh1 - b * one_minus_exp_neg(lh1 * tau)) / lh1,
        "(lambda_hat_1 - b_lo*(1 - exp(-lambda_hat_1*tau_D))) / lambda_hat_1",
    );
    let ln_eta = -lb1 * (n + 1.0) * t0
        + one_minus_exp_neg(lb2 * tau).ln()
        + (a_lo / (a_hi * (n - 2.0) + a_lo)).ln();
    cert.push(
        "eta",
        ln_eta.exp(),
        "exp(-lambda_bar_1*(N+1)*T0) * (1 - exp(-lambda_bar_2*tau_D)) * a_lo / (a_hi*(N-2) + a_lo)",
    );
    let ln_q = (n - 1.0) * ln_eta
        + 0.5 * (n - 2.0) * (n + 1.0) * lb1 * t0
        + (b * one_minus_exp_neg(lh1 * tau) / (a_hi * (n - 1.0) + b)).ln();
    let q = ln_q.exp();
    let delta_n = cert.push(
        "delta_N",
        1.0 - q,
        "1 - eta^(N-1) * exp((N-2)(N+1)/2*lambda_bar_1*T0) * b_lo*(1 - exp(-lambda_hat_1*tau_D)) / (a_hi*(N-1) + b_lo)",
    );
    cert.notes
        .push("T_star = N*T0 (the longer horizon; yields the smaller rate)".into());

    // q in (0, 1) is exactly delta_N in (0, 1); delta_N itself may round to 1
    if !(q > 0.0 && q < 1.0) {
        cert.notes.push(format!(
            "delta_N = {delta_n:e} lies outside (0, 1); no rate can be certified"
        ));
        cert.verdict = Verdict::NotApplicable;
        return Ok(cert);
    }
    let rate = cert.push(
        "rho_hat_star",
        -(-q).ln_1p() / t_star,
        "ln(1/delta_N) / T_star",
    );
    cert.push("gamma", (-(-q).ln_1p()).exp(), "1 / delta_N");
    cert.push("L", lipschitz, "global Lipschitz constant");
    rate_verdict(&mut cert, rate, lipschitz);
    Ok(cert)
}
