//! Inherent agent dynamics `f(t, x)` and quadratic Lyapunov functions.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::Tolerance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (entry ({row},{col}) differs by {gap:e})")]
    NotSymmetric { row: usize, col: usize, gap: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("invalid dynamics parameter: {0}")]
    InvalidParameter(String),
}

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DynamicsError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(DynamicsError::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        if dim == 0 {
            return Err(DynamicsError::NotSquare { rows: 0, cols: 0 });
        }
        Ok(SquareMatrix { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut data = vec![0.0; dim * dim];
        for (k, &d) in diag.iter().enumerate() {
            data[k * dim + k] = d;
        }
        SquareMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// `out = self * x`
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        for (row, o) in self.data.chunks(self.dim).zip(out.iter_mut()) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    fn check_symmetric(&self, tol: f64) -> Result<(), DynamicsError> {
        for r in 0..self.dim {
            for c in (r + 1)..self.dim {
                let gap = (self.get(r, c) - self.get(c, r)).abs();
                if gap > tol {
                    return Err(DynamicsError::NotSymmetric { row: r, col: c, gap });
                }
            }
        }
        Ok(())
    }
}

/// Odd saturation with unit slope at the origin, `|s| <= 1` and `|s'| <= 1`.
#[inline]
pub fn saturation(v: f64) -> f64 {
    v.tanh()
}

/// The uncoupled vector field shared by every agent (and the leader).
#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsSpec {
    Zero {
        dim: usize,
    },
    LinearTimeInvariant {
        a: SquareMatrix,
    },
    /// Block-diagonal rotation generator with one planar block per rate:
    /// `[[0, -w], [w, 0]]`.
    SkewRotation {
        rates: Vec<f64>,
    },
    /// `f(t, x) = L_f * s(x)` component-wise.
    SaturatedLipschitz {
        dim: usize,
        lipschitz: f64,
    },
    /// `f_k(t, x) = (gain + amplitude_k * sin(omega * t)) * s(x_k)`.
    ///
    /// The periodic forcing enters as a bounded modulation of the saturated
    /// term. With `gain <= -max|amplitude_k|` the field is dissipative for
    /// every diagonal quadratic Lyapunov function.
    ForcedSaturated {
        gain: f64,
        amplitude: Vec<f64>,
        omega: f64,
    },
}

impl DynamicsSpec {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |msg: String| Err(DynamicsError::InvalidParameter(msg));
        match self {
            DynamicsSpec::Zero { dim } if *dim == 0 => bad("dimension must be >= 1".into()),
            DynamicsSpec::SkewRotation { rates } if rates.is_empty() => {
                bad("skew rotation needs at least one rate".into())
            }
            DynamicsSpec::SkewRotation { rates } if rates.iter().any(|r| !r.is_finite()) => {
                bad("rotation rates must be finite".into())
            }
            DynamicsSpec::SaturatedLipschitz { dim, .. } if *dim == 0 => {
                bad("dimension must be >= 1".into())
            }
            DynamicsSpec::SaturatedLipschitz { lipschitz, .. }
                if !(lipschitz.is_finite() && *lipschitz > 0.0) =>
            {
                bad(format!("L_f must be positive, got {lipschitz}"))
            }
            DynamicsSpec::ForcedSaturated { amplitude, .. } if amplitude.is_empty() => {
                bad("forcing amplitude must have one entry per component".into())
            }
            DynamicsSpec::ForcedSaturated {
                gain,
                amplitude,
                omega,
            } if !(gain.is_finite()
                && omega.is_finite()
                && amplitude.iter().all(|a| a.is_finite())) =>
            {
                bad("forced saturation parameters must be finite".into())
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DynamicsSpec::Zero { dim } => *dim,
            DynamicsSpec::LinearTimeInvariant { a } => a.dim(),
            DynamicsSpec::SkewRotation { rates } => 2 * rates.len(),
            DynamicsSpec::SaturatedLipschitz { dim, .. } => *dim,
            DynamicsSpec::ForcedSaturated { amplitude, .. } => amplitude.len(),
        }
    }

    /// Writes `f(t, x)` into `out`. Slices must have length `dim()`.
    #[inline]
    pub fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match self {
            DynamicsSpec::Zero { .. } => out.fill(0.0),
            DynamicsSpec::LinearTimeInvariant { a } => a.mul_vec_into(x, out),
            DynamicsSpec::SkewRotation { rates } => {
                for (k, &w) in rates.iter().enumerate() {
                    let (p, q) = (x[2 * k], x[2 * k + 1]);
                    out[2 * k] = -w * q;
                    out[2 * k + 1] = w * p;
                }
            }
            DynamicsSpec::SaturatedLipschitz { lipschitz, .. } => {
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = lipschitz * saturation(v);
                }
            }
            DynamicsSpec::ForcedSaturated {
                gain,
                amplitude,
                omega,
            } => {
                let phase = (omega * t).sin();
                for ((o, &v), &amp) in out.iter_mut().zip(x).zip(amplitude) {
                    *o = (gain + amp * phase) * saturation(v);
                }
            }
        }
    }

    pub fn eval_vector_field(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        if x.len() != self.dim() {
            return Err(DynamicsError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut out = vec![0.0; x.len()];
        self.eval_into(t, x, &mut out);
        Ok(out)
    }

    /// Exact global Lipschitz constant of `x -> f(t, x)`, uniform in `t`.
    pub fn lipschitz_constant(&self) -> f64 {
        match self {
            DynamicsSpec::Zero { .. } => 0.0,
            DynamicsSpec::LinearTimeInvariant { a } => a
                .to_nalgebra()
                .singular_values()
                .iter()
                .copied()
                .fold(0.0, f64::max),
            DynamicsSpec::SkewRotation { rates } => {
                rates.iter().map(|r| r.abs()).fold(0.0, f64::max)
            }
            DynamicsSpec::SaturatedLipschitz { lipschitz, .. } => *lipschitz,
            DynamicsSpec::ForcedSaturated {
                gain,
                amplitude,
                omega,
            } => {
                if *omega == 0.0 {
                    gain.abs()
                } else {
                    amplitude
                        .iter()
                        .map(|a| gain.abs() + a.abs())
                        .fold(0.0, f64::max)
                }
            }
        }
    }
}

/// True iff the largest eigenvalue of `PA + A^T P` is at most `tol`.
pub fn check_neutral_stability(
    a: &SquareMatrix,
    p: &SquareMatrix,
    tol: f64,
) -> Result<bool, DynamicsError> {
    if a.dim() != p.dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: p.dim(),
            found: a.dim(),
        });
    }
    p.check_symmetric(1e-12)?;
    let pa = p.to_nalgebra() * a.to_nalgebra();
    let m = &pa + pa.transpose();
    let sym = (&m + m.transpose()) * 0.5;
    let top = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(top <= tol)
}

/// `phi(x) = x^T P x` with `P` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexLyapunov {
    p: SquareMatrix,
    c1: f64,
    c2: f64,
}

impl ConvexLyapunov {
    pub fn new(p: SquareMatrix) -> Result<Self, DynamicsError> {
        p.check_symmetric(1e-12)?;
        let eig = SymmetricEigen::new(p.to_nalgebra()).eigenvalues;
        let c1 = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let c2 = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(c1 > 0.0) {
            return Err(DynamicsError::NotPositiveDefinite(c1));
        }
        Ok(ConvexLyapunov { p, c1, c2 })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(SquareMatrix::identity(dim)).expect("identity is SPD")
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    /// Smallest eigenvalue of `P`: `c1 |x|^2 <= phi(x)`.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// Largest eigenvalue of `P`: `phi(x) <= c2 |x|^2`.
    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Strong-convexity modulus, `2 * lambda_min(P)`.
    pub fn modulus(&self) -> f64 {
        2.0 * self.c1
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "state dimension");
        let n = self.dim();
        let mut acc = 0.0;
        for r in 0..n {
            let row = &self.p.data[r * n..(r + 1) * n];
            acc += x[r] * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
        acc
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "state dimension");
        let mut g = vec![0.0; x.len()];
        self.p.mul_vec_into(x, &mut g);
        g.iter_mut().for_each(|v| *v *= 2.0);
        g
    }

    /// Value at `a - b`, used for relative coordinates.
    pub fn value_of_difference(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
        self.value(&d)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// One sample point `(t, eta, zeta)`; `zeta` is ignored by checks that only
/// need a single state.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub eta: Vec<f64>,
    pub zeta: Vec<f64>,
}

/// Deterministic set of sample points for assumption checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
}

impl SampleSet {
    /// `count` points with `t` uniform in `[0, t_max]` and state components
    /// uniform in `[-radius, radius]`, drawn from a ChaCha stream seeded with
    /// `seed`.
    pub fn seeded(seed: u64, count: usize, dim: usize, radius: f64, t_max: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vec = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect()
        };
        let samples = (0..count)
            .map(|_| {
                let t = rng.gen_range(0.0..=t_max);
                let eta = vec(&mut rng);
                let zeta = vec(&mut rng);
                Sample { t, eta, zeta }
            })
            .collect();
        SampleSet { samples }
    }

    pub fn from_points(points: impl IntoIterator<Item = (f64, Vec<f64>, Vec<f64>)>) -> Self {
        SampleSet {
            samples: points
                .into_iter()
                .map(|(t, eta, zeta)| Sample { t, eta, zeta })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipationViolation {
    pub index: usize,
    pub t: f64,
    pub inner_product: f64,
}

/// Samples where `<grad phi(eta), f(t, eta)>` (or, with `relative`,
/// `<grad phi(eta - zeta), f(t, eta) - f(t, zeta)>`) exceeds the tolerance.
pub fn check_dissipation(
    phi: &ConvexLyapunov,
    spec: &DynamicsSpec,
    samples: &SampleSet,
    relative: bool,
    tol: Tolerance,
) -> Vec<DissipationViolation> {
    let n = spec.dim();
    let mut f_eta = vec![0.0; n];
    let mut f_zeta = vec![0.0; n];
    let mut out = Vec::new();
    for (index, s) in samples.samples.iter().enumerate() {
        spec.eval_into(s.t, &s.eta, &mut f_eta);
        let (grad, field) = if relative {
            spec.eval_into(s.t, &s.zeta, &mut f_zeta);
            let diff: Vec<f64> = s.eta.iter().zip(&s.zeta).map(|(a, b)| a - b).collect();
            let df: Vec<f64> = f_eta.iter().zip(&f_zeta).map(|(a, b)| a - b).collect();
            (phi.gradient(&diff), df)
        } else {
            (phi.gradient(&s.eta), f_eta.clone())
        };
        let inner = dot(&grad, &field);
        if inner > tol.bound(norm(&grad) * norm(&field)) {
            out.push(DissipationViolation {
                index,
                t: s.t,
                inner_product: inner,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityKind {
    Convexity,
    StrongConvexity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityViolation {
    pub index: usize,
    pub kind: ConvexityKind,
    pub slack: f64,
}

/// Slack of the first-order convexity inequality
/// `phi(zeta) - phi(eta) - <grad phi(eta), zeta - eta>`, optionally minus
/// the strong-convexity term `(m / 2) |eta - zeta|^2`.
pub fn convexity_slack(phi: &ConvexLyapunov, eta: &[f64], zeta: &[f64], strong: bool) -> f64 {
    let grad = phi.gradient(eta);
    let step: Vec<f64> = zeta.iter().zip(eta).map(|(a, b)| a - b).collect();
    let base = phi.value(zeta) - phi.value(eta) - dot(&grad, &step);
    if strong {
        base - 0.5 * phi.modulus() * dot(&step, &step)
    } else {
        base
    }
}

/// Checks convexity and strong convexity (with the function's own modulus)
/// on every `(eta, zeta)` pair of the sample set.
pub fn check_convexity_properties(
    phi: &ConvexLyapunov,
    pairs: &SampleSet,
    tol: Tolerance,
) -> Vec<ConvexityViolation> {
    let mut out = Vec::new();
    for (index, s) in pairs.samples.iter().enumerate() {
        let scale = phi.value(&s.eta).abs()
            + phi.value(&s.zeta).abs()
            + phi.c2() * (norm(&s.eta) + norm(&s.zeta)).powi(2);
        for (kind, strong) in [
            (ConvexityKind::Convexity, false),
            (ConvexityKind::StrongConvexity, true),
        ] {
            let slack = convexity_slack(phi, &s.eta, &s.zeta, strong);
            if slack < -tol.bound(scale) {
                out.push(ConvexityViolation { index, kind, slack });
            }
        }
    }
    out
}
