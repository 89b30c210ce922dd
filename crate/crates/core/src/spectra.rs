//! Exactly solvable Steklov spectra of the disk and the 3-ball with constant
//! potential, their heat traces, and small-`t` coefficient fits.
//!
//! This is the only floating-point part of the crate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::Rational;
use crate::geometry::{ball_jet, curvature_package};
use crate::heat::GammaTag;
use crate::invariants::theorem_reference;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpectraError {
    #[error("continued fraction did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("argument must be positive, got {0}")]
    BadArgument(f64),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("effective potential q - k^2 = {0} is negative")]
    NegativePotential(f64),
    #[error("cutoff must be at least 1")]
    BadCutoff,
    #[error("t must be positive, got {0}")]
    BadTime(f64),
    #[error("tail bound {bound:e} exceeds tolerance {tol:e}; raise the cutoff to at least {suggested}")]
    TailTooLarge { bound: f64, tol: f64, suggested: usize },
    #[error("t grid must lie in (0, 0.5] with at least {needed} points")]
    BadGrid { needed: usize },
    #[error("design matrix is ill-conditioned (condition number {0:e}); use a wider t grid such as [1e-3, 0.2]")]
    IllConditioned(f64),
    #[error("value not representable: {0}")]
    NotFinite(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BesselKind {
    Cylindrical,
    Spherical,
}

const TINY: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

/// `I_{ν+1}(z)/I_ν(z)` by the modified Lentz algorithm.
fn ratio_next(nu: f64, z: f64) -> Result<f64, SpectraError> {
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..=MAX_ITER {
        let b = 2.0 * (nu + k as f64) / z;
        d = b + d;
        if d == 0.0 {
            d = TINY;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(f);
        }
    }
    Err(SpectraError::NoConvergence(MAX_ITER))
}

/// `I_ν′(z)/I_ν(z)`, or `i_ℓ′(z)/i_ℓ(z)` for the spherical kind with `ν = ℓ`.
pub fn bessel_ratio(nu: f64, z: f64, kind: BesselKind) -> Result<f64, SpectraError> {
    if !(z > 0.0) || !(nu >= 0.0) {
        return Err(SpectraError::BadArgument(if z > 0.0 { nu } else { z }));
    }
    match kind {
        BesselKind::Cylindrical => Ok(ratio_next(nu, z)? + nu / z),
        BesselKind::Spherical => {
            let nu = nu + 0.5;
            Ok(ratio_next(nu, z)? + nu / z - 0.5 / z)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Disk,
    Ball,
}

impl DomainKind {
    pub fn dimension(&self) -> usize {
        match self {
            DomainKind::Disk => 2,
            DomainKind::Ball => 3,
        }
    }

    fn multiplicity(&self, m: usize) -> usize {
        match self {
            DomainKind::Disk => {
                if m == 0 {
                    1
                } else {
                    2
                }
            }
            DomainKind::Ball => 2 * m + 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDomain {
    pub kind: DomainKind,
    pub radius: f64,
    pub q: f64,
    pub k: f64,
}

impl ModelDomain {
    pub fn new(kind: DomainKind, radius: f64, q: f64, k: f64) -> Result<Self, SpectraError> {
        let d = ModelDomain { kind, radius, q, k };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), SpectraError> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(SpectraError::BadRadius(self.radius));
        }
        let qe = self.q_eff();
        if qe < 0.0 || !qe.is_finite() {
            return Err(SpectraError::NegativePotential(qe));
        }
        Ok(())
    }

    pub fn q_eff(&self) -> f64 {
        self.q - self.k * self.k
    }

    /// Area of the boundary circle or sphere.
    pub fn boundary_volume(&self) -> f64 {
        match self.kind {
            DomainKind::Disk => 2.0 * std::f64::consts::PI * self.radius,
            DomainKind::Ball => 4.0 * std::f64::consts::PI * self.radius * self.radius,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumModel {
    pub domain: ModelDomain,
    /// `(λ_m, multiplicity)` for modes `m = 0 … index_cutoff`.
    pub eigenvalues: Vec<(f64, usize)>,
    pub index_cutoff: usize,
    /// `λ_m ≥ m · tail_bound_slope` for every mode.
    pub tail_bound_slope: f64,
}

pub fn model_spectrum(domain: &ModelDomain, cutoff: usize) -> Result<SpectrumModel, SpectraError> {
    domain.validate()?;
    if cutoff < 1 {
        return Err(SpectraError::BadCutoff);
    }
    let qe = domain.q_eff();
    let r = domain.radius;
    let kind = match domain.kind {
        DomainKind::Disk => BesselKind::Cylindrical,
        DomainKind::Ball => BesselKind::Spherical,
    };
    let mut eigenvalues = Vec::with_capacity(cutoff + 1);
    for m in 0..=cutoff {
        let lambda = if qe == 0.0 {
            m as f64 / r
        } else {
            let s = qe.sqrt();
            s * bessel_ratio(m as f64, s * r, kind)?
        };
        eigenvalues.push((lambda, domain.kind.multiplicity(m)));
    }
    Ok(SpectrumModel { domain: *domain, eigenvalues, index_cutoff: cutoff, tail_bound_slope: 1.0 / r })
}

/// Bound on `Σ_{m > M} mult(m) e^{−t λ_m}` from `λ_m ≥ m/r`.
fn tail_bound(kind: DomainKind, cutoff: usize, slope: f64, t: f64) -> f64 {
    let x = (-t * slope).exp();
    let n = (cutoff + 1) as f64;
    let xn = x.powf(n);
    match kind {
        DomainKind::Disk => 2.0 * xn / (1.0 - x),
        DomainKind::Ball => xn * ((2.0 * n + 1.0) / (1.0 - x) + 2.0 * x / ((1.0 - x) * (1.0 - x))),
    }
}

/// Smallest cutoff whose tail bound at `t` is below `tol`.
pub fn cutoff_for(domain: &ModelDomain, t: f64, tol: f64) -> usize {
    let slope = 1.0 / domain.radius;
    let mut m = 16usize;
    while tail_bound(domain.kind, m, slope, t) > tol {
        m = m * 5 / 4 + 1;
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceValue {
    pub value: f64,
    /// Truncation bound plus a rounding allowance.
    pub error_bound: f64,
}

pub fn heat_trace(spec: &SpectrumModel, t: f64, tol: f64) -> Result<TraceValue, SpectraError> {
    if !(t > 0.0) {
        return Err(SpectraError::BadTime(t));
    }
    let tail = tail_bound(spec.domain.kind, spec.index_cutoff, spec.tail_bound_slope, t);
    if tail > tol {
        return Err(SpectraError::TailTooLarge { bound: tail, tol, suggested: cutoff_for(&spec.domain, t, tol) });
    }
    // smallest terms first
    let sum: f64 = spec.eigenvalues.iter().rev().map(|(l, m)| *m as f64 * (-t * l).exp()).sum();
    let rounding = sum * f64::EPSILON * (spec.eigenvalues.len() as f64).sqrt();
    Ok(TraceValue { value: sum + tail / 2.0, error_bound: tail / 2.0 + rounding })
}

/// Fixed geometric ladder, decreasing from `t_max` to `t_min`.
pub fn geometric_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    let ratio = (t_min / t_max).powf(1.0 / (points as f64 - 1.0));
    (0..points).map(|i| t_max * ratio.powi(i as i32)).collect()
}

pub fn default_grid() -> Vec<f64> {
    geometric_grid(1e-3, 0.2, 40)
}

/// Extra powers `t¹ … t⁴` fitted beyond `â_{n−1}` to absorb the remainder.
pub const NUISANCE_POWERS: i32 = 4;
/// `t^m log t` columns, `m = 1 … LOG_NUISANCE`; a constant potential puts
/// such terms into the ball and disk traces.
pub const LOG_NUISANCE: i32 = 2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceFit {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `â₀ … â_{n−1}`.
    pub coefficients: Vec<f64>,
    /// Weighted root-mean-square residual.
    pub residual: f64,
    /// Fitted coefficient of an added `t⁰ log t` term.
    pub log_term_diagnostic: f64,
    pub condition_number: f64,
}

#[derive(Clone, Copy)]
enum Column {
    /// `t^p`
    Pow(i32),
    /// `t^p log t`
    PowLog(i32),
}

impl Column {
    fn eval(self, t: f64) -> f64 {
        match self {
            Column::Pow(p) => t.powi(p),
            Column::PowLog(p) => t.powi(p) * t.ln(),
        }
    }
}

fn columns(n: usize, constant_log: bool) -> Vec<Column> {
    let top = 1 - n as i32;
    let mut cols: Vec<Column> = (0..n as i32 + NUISANCE_POWERS).map(|j| Column::Pow(top + j)).collect();
    cols.extend((1..=LOG_NUISANCE).map(Column::PowLog));
    if constant_log {
        cols.push(Column::PowLog(0));
    }
    cols
}

struct LsqResult {
    coeffs: Vec<f64>,
    residual: f64,
    condition: f64,
}

/// Least squares for `T(t) ≈ Σ c_j col_j(t)` with weight `t^{n−1}` and
/// equilibrated columns.
fn weighted_fit(t: &[f64], values: &[f64], n: usize, cols: &[Column]) -> Result<LsqResult, SpectraError> {
    let rows = t.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols.len());
    let mut b = DVector::<f64>::zeros(rows);
    for (i, (&ti, &vi)) in t.iter().zip(values).enumerate() {
        let w = ti.powi(n as i32 - 1);
        for (j, c) in cols.iter().enumerate() {
            a[(i, j)] = w * c.eval(ti);
        }
        b[i] = w * vi;
    }
    let norms: Vec<f64> = (0..cols.len()).map(|j| a.column(j).norm()).collect();
    for (j, s) in norms.iter().enumerate() {
        a.column_mut(j).unscale_mut(*s);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < 1e12) {
        return Err(SpectraError::IllConditioned(condition));
    }
    let x = svd.solve(&b, 0.0).map_err(|_| SpectraError::IllConditioned(condition))?;
    let r = &a * &x - &b;
    let residual = (r.norm_squared() / rows as f64).sqrt();
    let coeffs = x.iter().zip(&norms).map(|(c, s)| c / s).collect();
    Ok(LsqResult { coeffs, residual, condition })
}

/// Heat-trace values at every grid point, each accurate to `1e-13` relative.
pub fn trace_on_grid(domain: &ModelDomain, t_grid: &[f64]) -> Result<Vec<f64>, SpectraError> {
    let t_min = t_grid.iter().cloned().fold(f64::MAX, f64::min);
    let n = domain.kind.dimension();
    let scale = 2.0 * domain.radius.powi(n as i32 - 1) / t_min.powi(n as i32 - 1);
    let tol = 1e-13 * scale.max(1.0);
    let spec = model_spectrum(domain, cutoff_for(domain, t_min, tol))?;
    t_grid.iter().map(|&t| heat_trace(&spec, t, tol).map(|v| v.value)).collect()
}

pub fn fit_asymptotics(domain: &ModelDomain, t_grid: &[f64]) -> Result<TraceFit, SpectraError> {
    let n = domain.kind.dimension();
    let cols = columns(n, true);
    if t_grid.len() < 2 * cols.len() || t_grid.iter().any(|&t| !(t > 0.0 && t <= 0.5)) {
        return Err(SpectraError::BadGrid { needed: 2 * cols.len() });
    }
    let values = trace_on_grid(domain, t_grid)?;
    let main = weighted_fit(t_grid, &values, n, &columns(n, false))?;
    let with_log = weighted_fit(t_grid, &values, n, &cols)?;
    Ok(TraceFit {
        t_grid: t_grid.to_vec(),
        values,
        coefficients: main.coeffs[..n].to_vec(),
        residual: main.residual,
        log_term_diagnostic: *with_log.coeffs.last().expect("nonempty"),
        condition_number: main.condition,
    })
}

/// Same fitting machinery on caller-supplied values.
pub fn fit_values(t_grid: &[f64], values: &[f64], n: usize) -> Result<Vec<f64>, SpectraError> {
    Ok(weighted_fit(t_grid, values, n, &columns(n, false))?.coeffs[..n].to_vec())
}

fn exact(v: f64) -> Result<Rational, SpectraError> {
    Rational::from_f64(v).ok_or(SpectraError::NotFinite(v))
}

/// `a₀ … a_{n−1}` integrated over the boundary, from the closed forms on the
/// domain's constant invariants.
pub fn integrated_reference(domain: &ModelDomain) -> Result<Vec<f64>, SpectraError> {
    domain.validate()?;
    let n = domain.kind.dimension();
    let jet = ball_jet(n, exact(domain.radius)?)
        .map_err(|_| SpectraError::BadRadius(domain.radius))?
        .with_q_const(exact(domain.q)?)
        .with_k(exact(domain.k)?);
    let inv = curvature_package(&jet).expect("ball jets are valid");
    (0..n)
        .map(|k| {
            let expr = theorem_reference(n, k, false).expect("k < n within range");
            let c = expr.evaluate(&inv).expect("order-3 jet");
            Ok(c.re.to_f64() * GammaTag::for_coefficient(n, k).to_f64() * domain.boundary_volume())
        })
        .collect()
}

pub fn spectrum_csv(spec: &SpectrumModel) -> String {
    let mut out = String::from("mode,lambda,multiplicity\n");
    for (m, (l, mult)) in spec.eigenvalues.iter().enumerate() {
        out.push_str(&format!("{m},{l:.17e},{mult}\n"));
    }
    out
}

pub fn fit_json(fit: &TraceFit) -> serde_json::Value {
    serde_json::json!({
        "t": fit.t_grid,
        "T": fit.values,
        "fit": {
            "a": fit.coefficients,
            "residual": fit.residual,
            "log_diag": fit.log_term_diagnostic,
            "condition_number": fit.condition_number,
        }
    })
}
