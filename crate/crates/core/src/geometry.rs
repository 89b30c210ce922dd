//! Jets of `(g, A, q, k)` at a boundary point in boundary normal
//! coordinates, and the curvature invariants they determine.
//!
//! Coordinates are `x_1 … x_{n-1}` along the boundary and `x_n` the inward
//! geodesic distance, stored as jet variables `0 … n-1`. The metric is
//! `g = Σ g_{αβ} dx_α dx_β + dx_n²`, normalised so that at the origin
//! `g_{αβ} = δ_{αβ}`, `∂_γ g_{αβ} = 0` and `∂_n g_{αβ} = −2 κ_α δ_{αβ}`.
//! With this sign the unit ball has `κ_α = 1`.
//!
//! Jet orders: `g` is known to `jet_order`, `A` to `jet_order − 1` and `q`
//! to `jet_order − 2` (saturating), which is exactly what `a_k` needs for
//! `k = jet_order`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::exact::{factorial, Gauss, Rational};
use crate::jet::{invert_near_identity, monomials_of_degree, Jet, Mono};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("dimension {0} is below the minimum of 2")]
    DimensionTooSmall(usize),
    #[error("jet order too low: {what} needs jet_order >= {needed}, have {have}")]
    OrderTooLow { what: &'static str, needed: u32, have: u32 },
    #[error("invalid jet: {0}")]
    Violation(String),
    #[error("malformed jet document: {0}")]
    Parse(String),
    #[error("radius must be positive")]
    NonPositiveRadius,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeometryJet {
    pub n: usize,
    pub jet_order: u32,
    pub kappa: Vec<Rational>,
    /// Tangential block `g_{αβ}`, full `(n-1) × (n-1)` and symmetric.
    pub g: Vec<Vec<Jet>>,
    /// Vector-field components `A_1 … A_n`.
    pub a: Vec<Jet>,
    pub q: Jet,
    pub k: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvatureInvariants {
    pub n: usize,
    pub kappa: Vec<Rational>,
    pub h: Rational,
    pub sum_kappa2: Rational,
    pub sum_kappa3: Rational,
    /// Scalar curvature of the boundary.
    pub r_boundary: Rational,
    /// Scalar curvature of the ambient manifold.
    pub r_tilde: Rational,
    pub r_diag: Vec<Rational>,
    pub r_tilde_diag: Vec<Rational>,
    pub r_tilde_nn: Rational,
    /// `∇_n R̃_nn`; needs `jet_order >= 3`.
    pub nabla_n_r_tilde_nn: Option<Rational>,
    /// `∂R̃/∂x_n`; needs `jet_order >= 3`.
    pub dn_r_tilde: Option<Rational>,
    /// Boundary Laplacian of the mean curvature; needs `jet_order >= 3`.
    pub laplacian_h: Option<Rational>,
    pub q0: Gauss,
    /// `∂q/∂x_n`; needs `jet_order >= 3`.
    pub dq_dn: Option<Gauss>,
    pub k: Rational,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RandomJetOptions {
    pub with_a: bool,
    pub with_q: bool,
}

fn g_one() -> Gauss {
    Gauss::from_int(1)
}

fn a_order(jet_order: u32) -> u32 {
    jet_order.saturating_sub(1)
}

fn q_order(jet_order: u32) -> u32 {
    jet_order.saturating_sub(2)
}

impl GeometryJet {
    /// Flat half-space: `g ≡ δ`, `A = 0`, `q = 0`, `k = 0`.
    pub fn flat(n: usize, jet_order: u32) -> Result<GeometryJet, GeometryError> {
        if n < 2 {
            return Err(GeometryError::DimensionTooSmall(n));
        }
        let d = n - 1;
        let g = (0..d)
            .map(|a| {
                (0..d)
                    .map(|b| if a == b { Jet::one(n, jet_order) } else { Jet::zero(n, jet_order) })
                    .collect()
            })
            .collect();
        Ok(GeometryJet {
            n,
            jet_order,
            kappa: vec![Rational::zero(); d],
            g,
            a: vec![Jet::zero(n, a_order(jet_order)); n],
            q: Jet::zero(n, q_order(jet_order)),
            k: Rational::zero(),
        })
    }

    pub fn dim_boundary(&self) -> usize {
        self.n - 1
    }

    /// Same geometry with every jet truncated to `order`.
    pub fn truncated(&self, order: u32) -> GeometryJet {
        let order = order.min(self.jet_order);
        GeometryJet {
            n: self.n,
            jet_order: order,
            kappa: self.kappa.clone(),
            g: self.g.iter().map(|row| row.iter().map(|j| j.truncate(order)).collect()).collect(),
            a: self.a.iter().map(|j| j.truncate(a_order(order))).collect(),
            q: self.q.truncate(q_order(order)),
            k: self.k.clone(),
        }
    }

    pub fn with_a(mut self, a: Vec<Jet>) -> GeometryJet {
        let order = a_order(self.jet_order);
        self.a = a.into_iter().map(|j| j.truncate(order)).collect();
        self
    }

    pub fn with_q(mut self, q: Jet) -> GeometryJet {
        self.q = q.truncate(q_order(self.jet_order));
        self
    }

    /// Constant electric potential.
    pub fn with_q_const(self, q: Rational) -> GeometryJet {
        let (n, o) = (self.n, q_order(self.jet_order));
        self.with_q(Jet::constant(n, o, Gauss::real(q)))
    }

    pub fn with_k(mut self, k: Rational) -> GeometryJet {
        self.k = k;
        self
    }

    /// Full `n × n` metric jet including the `dx_n²` block.
    pub fn full_metric(&self) -> Vec<Vec<Jet>> {
        let n = self.n;
        let o = self.jet_order;
        let mut m = vec![vec![Jet::zero(n, o); n]; n];
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                m[a][b] = self.g[a][b].clone();
            }
        }
        m[n - 1][n - 1] = Jet::one(n, o);
        m
    }

    /// `g^{αβ}` of the tangential block.
    pub fn inverse_tangential(&self) -> Vec<Vec<Jet>> {
        invert_near_identity(&self.g)
    }
}

/// Checks every structural constraint on a jet.
pub fn validate_jet(jet: &GeometryJet) -> Result<(), GeometryError> {
    let n = jet.n;
    if n < 2 {
        return Err(GeometryError::DimensionTooSmall(n));
    }
    let d = n - 1;
    let bad = |s: String| Err(GeometryError::Violation(s));
    if jet.kappa.len() != d {
        return bad(format!("kappa has length {}, expected {d}", jet.kappa.len()));
    }
    if jet.g.len() != d || jet.g.iter().any(|r| r.len() != d) {
        return bad(format!("g must be a {d}x{d} table"));
    }
    if jet.a.len() != n {
        return bad(format!("A must have {n} components"));
    }
    let all = jet.g.iter().flatten().chain(jet.a.iter()).chain(std::iter::once(&jet.q));
    if all.clone().any(|j| j.nvars != n) {
        return bad(format!("every jet must be in {n} variables"));
    }
    for a in 0..d {
        for b in 0..d {
            let j = &jet.g[a][b];
            if j.order != jet.jet_order {
                return bad(format!("g[{},{}] has order {}, expected {}", a + 1, b + 1, j.order, jet.jet_order));
            }
            if j != &jet.g[b][a] {
                return bad(format!("g not symmetric at ({},{})", a + 1, b + 1));
            }
            if !j.is_real() {
                return bad(format!("g[{},{}] has a non-real coefficient", a + 1, b + 1));
            }
            let delta = if a == b { g_one() } else { Gauss::default() };
            if j.value() != delta {
                return bad(format!("g[{},{}](x0) is not the identity", a + 1, b + 1));
            }
            for c in 0..d {
                if !j.coeff(Mono::var(c)).is_zero() {
                    return bad(format!(
                        "tangential derivative d g[{},{}]/dx{} is nonzero at x0",
                        a + 1,
                        b + 1,
                        c + 1
                    ));
                }
            }
        }
    }
    if jet.jet_order >= 1 {
        for a in 0..d {
            for b in 0..d {
                let dn = jet.g[a][b].coeff(Mono::var(n - 1));
                if a != b && !dn.is_zero() {
                    return bad("second fundamental form not diagonal".into());
                }
                if a == b && dn != Gauss::real(&Rational::from_int(-2) * &jet.kappa[a]) {
                    return bad(format!("normal derivative of g[{0},{0}] does not match kappa", a + 1));
                }
            }
        }
    }
    for (j, comp) in jet.a.iter().enumerate() {
        if comp.order != a_order(jet.jet_order) {
            return bad(format!("A[{}] has order {}, expected {}", j + 1, comp.order, a_order(jet.jet_order)));
        }
    }
    if jet.q.order != q_order(jet.jet_order) {
        return bad(format!("q has order {}, expected {}", jet.q.order, q_order(jet.jet_order)));
    }
    Ok(())
}

fn real(g: &Gauss) -> Rational {
    debug_assert!(g.is_real());
    g.re.clone()
}

/// Ricci tensor jets `Ric_{jk} = Σ_l R^l_{ljk}` of a metric given as a
/// `dim × dim` matrix of jets, differentiating in variables `0..dim`.
fn ricci_jets(metric: &[Vec<Jet>]) -> (Vec<Vec<Jet>>, Vec<Vec<Vec<Jet>>>) {
    let dim = metric.len();
    let ginv = invert_near_identity(metric);
    let nvars = metric[0][0].nvars;
    let order = metric[0][0].order;
    let dg: Vec<Vec<Vec<Jet>>> = (0..dim)
        .map(|k| (0..dim).map(|i| (0..dim).map(|j| metric[i][j].diff(k)).collect()).collect())
        .collect();
    // gamma[l][j][k] = Γ^l_{jk}
    let half = Gauss::frac(1, 2);
    let mut gamma = vec![vec![vec![Jet::zero(nvars, order.saturating_sub(1)); dim]; dim]; dim];
    for j in 0..dim {
        for k in j..dim {
            let lowered: Vec<Jet> = (0..dim)
                .map(|m| dg[j][k][m].add(&dg[k][j][m]).sub(&dg[m][j][k]).scale(&half))
                .collect();
            for l in 0..dim {
                let mut acc = Jet::zero(nvars, order.saturating_sub(1));
                for (m, low) in lowered.iter().enumerate() {
                    acc = acc.add(&ginv[l][m].mul(low));
                }
                gamma[l][j][k] = acc.clone();
                gamma[l][k][j] = acc;
            }
        }
    }
    let ro = order.saturating_sub(2);
    let mut ric = vec![vec![Jet::zero(nvars, ro); dim]; dim];
    for j in 0..dim {
        for k in j..dim {
            let mut acc = Jet::zero(nvars, ro);
            for l in 0..dim {
                acc = acc.add(&gamma[l][j][k].diff(l)).sub(&gamma[l][l][k].diff(j));
                for p in 0..dim {
                    acc = acc
                        .add(&gamma[p][j][k].mul(&gamma[l][l][p]))
                        .sub(&gamma[p][l][k].mul(&gamma[l][j][p]));
                }
            }
            ric[j][k] = acc.clone();
            ric[k][j] = acc;
        }
    }
    (ric, gamma)
}

/// `R^l_{ijk}` at the origin from Christoffel jets.
fn riemann_up_at_origin(gamma: &[Vec<Vec<Jet>>], l: usize, i: usize, j: usize, k: usize) -> Rational {
    let dim = gamma.len();
    let mut acc = &gamma[l][j][k].diff(i).value() - &gamma[l][i][k].diff(j).value();
    for p in 0..dim {
        acc = &acc + &(&gamma[p][j][k].value() * &gamma[l][i][p].value());
        acc = &acc - &(&gamma[p][i][k].value() * &gamma[l][j][p].value());
    }
    real(&acc)
}

struct AmbientCurvature {
    ric: Vec<Vec<Jet>>,
    gamma: Vec<Vec<Vec<Jet>>>,
}

fn ambient(jet: &GeometryJet) -> AmbientCurvature {
    let (ric, gamma) = ricci_jets(&jet.full_metric());
    AmbientCurvature { ric, gamma }
}

/// Ricci diagonal and scalar curvature of the induced metric on `x_n = 0`.
fn boundary_curvature(jet: &GeometryJet) -> (Vec<Rational>, Rational) {
    let d = jet.n - 1;
    if d == 1 {
        return (vec![Rational::zero()], Rational::zero());
    }
    let induced: Vec<Vec<Jet>> = jet
        .g
        .iter()
        .map(|row| row.iter().map(|j| j.restrict_zero(jet.n - 1).drop_trailing_vars(d)).collect())
        .collect();
    let (ric, _) = ricci_jets(&induced);
    let diag: Vec<Rational> = (0..d).map(|a| real(&ric[a][a].value())).collect();
    let scalar = diag.iter().fold(Rational::zero(), |s, r| &s + r);
    (diag, scalar)
}

/// All curvature invariants at the origin.
pub fn curvature_package(jet: &GeometryJet) -> Result<CurvatureInvariants, GeometryError> {
    validate_jet(jet)?;
    if jet.jet_order < 2 {
        return Err(GeometryError::OrderTooLow { what: "curvature", needed: 2, have: jet.jet_order });
    }
    let n = jet.n;
    let d = n - 1;
    let amb = ambient(jet);
    let r_tilde_diag: Vec<Rational> = (0..d).map(|a| real(&amb.ric[a][a].value())).collect();
    let r_tilde_nn = real(&amb.ric[n - 1][n - 1].value());
    let r_tilde = r_tilde_diag.iter().fold(r_tilde_nn.clone(), |s, r| &s + r);
    // Γ^i_nn ≡ 0 in these coordinates, so the covariant derivative reduces
    // to the partial one.
    let nabla = (jet.jet_order >= 3).then(|| real(&amb.ric[n - 1][n - 1].coeff(Mono::var(n - 1))));
    let (dn_r_tilde, laplacian_h) = if jet.jet_order >= 3 {
        (Some(dn_scalar_curvature(jet, &amb)), Some(laplacian_mean_curvature(jet)))
    } else {
        (None, None)
    };
    let (r_diag, r_boundary) = boundary_curvature(jet);
    let h = jet.kappa.iter().fold(Rational::zero(), |s, k| &s + k);
    let sum_kappa2 = jet.kappa.iter().fold(Rational::zero(), |s, k| &s + &(k * k));
    let sum_kappa3 = jet.kappa.iter().fold(Rational::zero(), |s, k| &s + &(&(k * k) * k));
    Ok(CurvatureInvariants {
        n,
        kappa: jet.kappa.clone(),
        h,
        sum_kappa2,
        sum_kappa3,
        r_boundary,
        r_tilde,
        r_diag,
        r_tilde_diag,
        r_tilde_nn,
        nabla_n_r_tilde_nn: nabla,
        dn_r_tilde,
        laplacian_h,
        q0: jet.q.value(),
        dq_dn: (jet.jet_order >= 3).then(|| jet.q.coeff(Mono::var(n - 1))),
        k: jet.k.clone(),
    })
}

fn dn_scalar_curvature(jet: &GeometryJet, amb: &AmbientCurvature) -> Rational {
    let ginv = invert_near_identity(&jet.full_metric());
    let n = jet.n;
    let mut acc = Rational::zero();
    for j in 0..n {
        for k in 0..n {
            acc = &acc + &real(&ginv[j][k].mul(&amb.ric[j][k]).diff(n - 1).value());
        }
    }
    acc
}

/// `Σ_γ ∂²_γ H` at the origin, `H = −½ g^{αβ} ∂_n g_{αβ}` on `x_n = 0`; the
/// boundary Christoffel symbols vanish there.
fn laplacian_mean_curvature(jet: &GeometryJet) -> Rational {
    let n = jet.n;
    let d = n - 1;
    let ginv = jet.inverse_tangential();
    let mut h = Jet::zero(n, jet.jet_order.saturating_sub(1));
    for a in 0..d {
        for b in 0..d {
            h = h.add(&ginv[a][b].mul(&jet.g[a][b].diff(n - 1)));
        }
    }
    let h = h.scale(&Gauss::frac(-1, 2)).restrict_zero(n - 1);
    let mut acc = Rational::zero();
    for g in 0..d {
        acc = &acc + &real(&h.diff(g).diff(g).value());
    }
    acc
}

/// Sectional-type component `R̃_{nααn}` at the origin.
pub fn r_tilde_n_alpha_alpha_n(jet: &GeometryJet, alpha: usize) -> Rational {
    let amb = ambient(jet);
    let n = jet.n;
    riemann_up_at_origin(&amb.gamma, n - 1, n - 1, alpha, alpha)
}

/// Verifies the Gauss equation in its Ricci and scalar forms.
pub fn gauss_check(jet: &GeometryJet) -> Result<(), GeometryError> {
    let inv = curvature_package(jet)?;
    let amb = ambient(jet);
    let n = jet.n;
    for a in 0..n - 1 {
        let sec = riemann_up_at_origin(&amb.gamma, n - 1, n - 1, a, a);
        let ka = &inv.kappa[a];
        let rhs = &(&(&inv.r_tilde_diag[a] - &sec) + &(&inv.h * ka)) - &(ka * ka);
        if rhs != inv.r_diag[a] {
            return Err(GeometryError::Violation(format!(
                "Gauss equation fails for R_{0}{0}: {1} != {2}",
                a + 1,
                inv.r_diag[a],
                rhs
            )));
        }
    }
    let two = Rational::from_int(2);
    let rhs = &(&(&inv.r_tilde - &(&two * &inv.r_tilde_nn)) + &(&inv.h * &inv.h)) - &inv.sum_kappa2;
    if rhs != inv.r_boundary {
        return Err(GeometryError::Violation(format!(
            "scalar Gauss equation fails: {} != {}",
            inv.r_boundary, rhs
        )));
    }
    Ok(())
}

/// Jet of the flat ball of radius `r` at a boundary point, exact to order 3.
pub fn ball_jet(n: usize, r: Rational) -> Result<GeometryJet, GeometryError> {
    ball_jet_with_order(n, r, 3)
}

/// Jet of the flat ball of radius `r`, exact to `order`.
///
/// In geodesic normal coordinates on the boundary sphere the metric is
/// `δ + (f(ρ) − 1)(δ − x x^T/ρ²)` with `f = (r sin(ρ/r)/ρ)²`, and moving a
/// distance `x_n` inward scales it by `(1 − x_n/r)²`.
pub fn ball_jet_with_order(n: usize, r: Rational, order: u32) -> Result<GeometryJet, GeometryError> {
    if n < 2 {
        return Err(GeometryError::DimensionTooSmall(n));
    }
    if r.signum() <= 0 {
        return Err(GeometryError::NonPositiveRadius);
    }
    let d = n - 1;
    let mut jet = GeometryJet::flat(n, order)?;
    let one = Jet::one(n, order);
    let mut scale = one.clone();
    scale.set(Mono::var(n - 1), Gauss::real(-&r.recip()));
    let scale = scale.mul(&scale);
    let rho2 = (0..d).fold(Jet::zero(n, order), |acc, a| acc.add(&Jet::var(n, order, a).mul(&Jet::var(n, order, a))));
    // Σ_{j≥1} c_j ρ^{2j-2} with c_j = (−1)^j 2^{2j+1} / ((2j+2)! r^{2j})
    let mut series = Jet::zero(n, order);
    let mut rho_pow = one.clone();
    for j in 1..=(order / 2 + 1) {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let c = &Rational::from_int(sign * (1i64 << (2 * j + 1))) / &(&factorial(2 * j + 2) * &r.pow(2 * j));
        series = series.add(&rho_pow.scale(&Gauss::real(c)));
        rho_pow = rho_pow.mul(&rho2);
    }
    for a in 0..d {
        for b in 0..d {
            let xx = Jet::var(n, order, a).mul(&Jet::var(n, order, b));
            let proj = if a == b { rho2.sub(&xx) } else { xx.neg() };
            let base = if a == b { one.clone() } else { Jet::zero(n, order) };
            jet.g[a][b] = base.add(&series.mul(&proj)).mul(&scale);
        }
    }
    jet.kappa = vec![r.recip(); d];
    Ok(jet)
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num = rng.gen_range(-3i64..=3);
    let den = rng.gen_range(1i64..=3);
    Rational::new(num, den)
}

/// Deterministic pseudo-random valid jet with distinct principal curvatures.
pub fn random_jet(n: usize, jet_order: u32, seed: u64, opts: RandomJetOptions) -> GeometryJet {
    assert!(n >= 2, "dimension must be at least 2");
    let d = n - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32));
    let mut kappa: Vec<Rational> = Vec::with_capacity(d);
    while kappa.len() < d {
        let c = Rational::new(rng.gen_range(-6i64..=6), rng.gen_range(1i64..=3));
        if !kappa.contains(&c) {
            kappa.push(c);
        }
    }
    let mut jet = GeometryJet::flat(n, jet_order).expect("n >= 2");
    for a in 0..d {
        for b in a..d {
            let mut j = if a == b { Jet::one(n, jet_order) } else { Jet::zero(n, jet_order) };
            if a == b && jet_order >= 1 {
                j.set(Mono::var(n - 1), Gauss::real(&Rational::from_int(-2) * &kappa[a]));
            }
            for deg in 2..=jet_order {
                for m in monomials_of_degree(n, deg) {
                    j.set(m, Gauss::real(random_rational(&mut rng)));
                }
            }
            jet.g[a][b] = j.clone();
            jet.g[b][a] = j;
        }
    }
    jet.kappa = kappa;
    if opts.with_a {
        let o = a_order(jet_order);
        jet.a = (0..n)
            .map(|_| {
                let mut j = Jet::zero(n, o);
                for deg in 0..=o {
                    for m in monomials_of_degree(n, deg) {
                        j.set(m, Gauss::real(random_rational(&mut rng)));
                    }
                }
                j
            })
            .collect();
    }
    if opts.with_q {
        let o = q_order(jet_order);
        let mut j = Jet::zero(n, o);
        for deg in 0..=o {
            for m in monomials_of_degree(n, deg) {
                j.set(m, Gauss::real(random_rational(&mut rng)));
            }
        }
        jet.q = j;
        jet.k = random_rational(&mut rng);
    }
    jet
}

fn jet_to_json(j: &Jet, n: usize) -> Value {
    let map: BTreeMap<String, String> = j.terms().map(|(m, c)| (m.key(n), c.to_string())).collect();
    json!(map)
}

fn jet_from_json(v: &Value, n: usize, order: u32, what: &str) -> Result<Jet, GeometryError> {
    let perr = |s: String| GeometryError::Parse(format!("{what}: {s}"));
    let obj = v.as_object().ok_or_else(|| perr("expected an object".into()))?;
    let mut j = Jet::zero(n, order);
    for (k, c) in obj {
        let m = Mono::parse_key(k, n).ok_or_else(|| perr(format!("bad multi-index `{k}`")))?;
        if m.degree() > order {
            return Err(perr(format!("multi-index `{k}` exceeds order {order}")));
        }
        let s = c.as_str().ok_or_else(|| perr("coefficients must be strings".into()))?;
        let g: Gauss = s.parse().map_err(|e: crate::exact::ParseExactError| perr(e.to_string()))?;
        j.set(m, g);
    }
    Ok(j)
}

/// JSON document with rationals as `"p/q"` strings and multi-indices as
/// comma-joined exponent lists over `x_1 … x_n`.
pub fn jet_to_json_value(jet: &GeometryJet) -> Value {
    let n = jet.n;
    let mut g = Map::new();
    for a in 0..n - 1 {
        for b in a..n - 1 {
            g.insert(format!("{},{}", a + 1, b + 1), jet_to_json(&jet.g[a][b], n));
        }
    }
    let mut a = Map::new();
    for (j, comp) in jet.a.iter().enumerate() {
        a.insert((j + 1).to_string(), jet_to_json(comp, n));
    }
    json!({
        "n": n,
        "jet_order": jet.jet_order,
        "kappa": jet.kappa.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
        "g": g,
        "A": a,
        "q": jet_to_json(&jet.q, n),
        "k": jet.k.to_string(),
    })
}

pub fn jet_to_json_string(jet: &GeometryJet) -> String {
    serde_json::to_string_pretty(&jet_to_json_value(jet)).expect("serializable")
}

pub fn jet_from_json_str(s: &str) -> Result<GeometryJet, GeometryError> {
    let v: Value = serde_json::from_str(s).map_err(|e| GeometryError::Parse(e.to_string()))?;
    jet_from_json_value(&v)
}

pub fn jet_from_json_value(v: &Value) -> Result<GeometryJet, GeometryError> {
    let perr = |s: &str| GeometryError::Parse(s.to_string());
    let n = v["n"].as_u64().ok_or_else(|| perr("missing n"))? as usize;
    if n < 2 {
        return Err(GeometryError::DimensionTooSmall(n));
    }
    if n > crate::jet::MAX_VARS {
        return Err(perr("dimension too large"));
    }
    let order = v["jet_order"].as_u64().ok_or_else(|| perr("missing jet_order"))? as u32;
    let parse_q = |x: &Value, what: &str| -> Result<Rational, GeometryError> {
        x.as_str()
            .ok_or_else(|| GeometryError::Parse(format!("{what} must be a string")))?
            .parse()
            .map_err(|e: crate::exact::ParseExactError| GeometryError::Parse(e.to_string()))
    };
    let kappa = v["kappa"]
        .as_array()
        .ok_or_else(|| perr("missing kappa"))?
        .iter()
        .map(|x| parse_q(x, "kappa"))
        .collect::<Result<Vec<_>, _>>()?;
    let mut jet = GeometryJet::flat(n, order)?;
    jet.kappa = kappa;
    let g = v["g"].as_object().ok_or_else(|| perr("missing g"))?;
    // Unlisted pairs default to the flat metric.
    for (key, val) in g {
        let idx: Vec<usize> = key.split(',').filter_map(|t| t.trim().parse().ok()).collect();
        if idx.len() != 2 || idx.iter().any(|&i| i == 0 || i >= n) {
            return Err(GeometryError::Parse(format!("bad g index `{key}`")));
        }
        let j = jet_from_json(val, n, order, &format!("g[{key}]"))?;
        jet.g[idx[0] - 1][idx[1] - 1] = j.clone();
        jet.g[idx[1] - 1][idx[0] - 1] = j;
    }
    if let Some(a) = v.get("A").and_then(Value::as_object) {
        for (key, val) in a {
            let i: usize = key.parse().map_err(|_| GeometryError::Parse(format!("bad A index `{key}`")))?;
            if i == 0 || i > n {
                return Err(GeometryError::Parse(format!("bad A index `{key}`")));
            }
            jet.a[i - 1] = jet_from_json(val, n, a_order(order), &format!("A[{key}]"))?;
        }
    }
    if let Some(q) = v.get("q") {
        jet.q = jet_from_json(q, n, q_order(order), "q")?;
    }
    if let Some(k) = v.get("k") {
        jet.k = parse_q(k, "k")?;
    }
    validate_jet(&jet)?;
    Ok(jet)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn flat_half_space_is_valid_and_flat() {
        let jet = GeometryJet::flat(4, 3).unwrap().with_q_const(q("2")).with_k(q("1/2"));
        validate_jet(&jet).unwrap();
        let inv = curvature_package(&jet).unwrap();
        assert!(inv.h.is_zero() && inv.r_boundary.is_zero() && inv.r_tilde.is_zero());
        assert_eq!(inv.nabla_n_r_tilde_nn, Some(Rational::zero()));
        assert_eq!(inv.q0, Gauss::from_int(2));
        assert_eq!(inv.k, q("1/2"));
        gauss_check(&jet).unwrap();
    }

    #[test]
    fn off_diagonal_normal_derivative_rejected() {
        let mut jet = GeometryJet::flat(3, 3).unwrap();
        jet.g[0][1].set(Mono::var(2), Gauss::from_int(1));
        jet.g[1][0].set(Mono::var(2), Gauss::from_int(1));
        let err = validate_jet(&jet).unwrap_err();
        assert_eq!(err, GeometryError::Violation("second fundamental form not diagonal".into()));
    }

    #[test]
    fn dimension_one_rejected() {
        assert_eq!(GeometryJet::flat(1, 3).unwrap_err(), GeometryError::DimensionTooSmall(1));
    }

    #[test]
    fn unit_ball_n3() {
        let jet = ball_jet(3, q("1")).unwrap();
        validate_jet(&jet).unwrap();
        let inv = curvature_package(&jet).unwrap();
        assert_eq!(inv.kappa, vec![q("1"), q("1")]);
        assert_eq!(inv.h, q("2"));
        assert_eq!(inv.sum_kappa2, q("2"));
        assert_eq!(inv.r_tilde, q("0"));
        assert_eq!(inv.r_boundary, q("2"));
        assert_eq!(inv.r_diag, vec![q("1"), q("1")]);
        gauss_check(&jet).unwrap();
    }

    #[test]
    fn ball_scaling_and_circle() {
        let inv = curvature_package(&ball_jet(3, q("2")).unwrap()).unwrap();
        assert_eq!(inv.kappa, vec![q("1/2"), q("1/2")]);
        assert_eq!(inv.h, q("1"));
        let inv = curvature_package(&ball_jet(2, q("1")).unwrap()).unwrap();
        assert_eq!(inv.kappa, vec![q("1")]);
        assert_eq!(inv.h, q("1"));
    }

    #[test]
    fn ball_family_invariants() {
        for n in 2..=8 {
            for r in ["1", "2", "1/2"] {
                let r = q(r);
                let jet = ball_jet(n, r.clone()).unwrap();
                let inv = curvature_package(&jet).unwrap();
                let d = (n - 1) as i64;
                assert!(inv.kappa.iter().all(|k| *k == r.recip()));
                assert!(inv.r_tilde.is_zero(), "n={n}");
                assert_eq!(inv.r_boundary, &Rational::from_int(d * (d - 1)) / &(&r * &r), "n={n}");
                assert_eq!(inv.nabla_n_r_tilde_nn, Some(Rational::zero()));
                gauss_check(&jet).unwrap();
            }
        }
    }

    #[test]
    fn ball_higher_order_is_flat() {
        let jet = ball_jet_with_order(4, q("1"), 5).unwrap();
        let (ric, _) = ricci_jets(&jet.full_metric());
        for row in &ric {
            for j in row {
                assert!(j.is_zero(), "ambient Ricci should vanish identically");
            }
        }
    }

    #[test]
    fn random_jets_satisfy_gauss() {
        for seed in 0..50 {
            let jet = random_jet(3 + (seed as usize % 3), 3, seed, RandomJetOptions::default());
            gauss_check(&jet).unwrap();
        }
    }

    #[test]
    fn random_jet_contract() {
        let a = random_jet(4, 3, 7, RandomJetOptions::default());
        validate_jet(&a).unwrap();
        assert_eq!(a, random_jet(4, 3, 7, RandomJetOptions::default()));
        let b = random_jet(5, 3, 9, RandomJetOptions { with_a: true, with_q: true });
        validate_jet(&b).unwrap();
        assert!(b.a.iter().any(|j| !j.is_zero()));
        let mut k = b.kappa.clone();
        k.sort();
        k.dedup();
        assert_eq!(k.len(), 4);
    }

    #[test]
    fn christoffel_metric_compatible() {
        let jet = random_jet(4, 3, 3, RandomJetOptions::default());
        let g = jet.full_metric();
        let (_, gamma) = ricci_jets(&g);
        let n = jet.n;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = g[i][j].diff(k);
                    for l in 0..n {
                        acc = acc.sub(&gamma[l][k][i].mul(&g[l][j])).sub(&gamma[l][k][j].mul(&g[i][l]));
                    }
                    assert!(acc.is_zero() && acc.order == 2, "nabla g != 0 at ({k},{i},{j})");
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let jet = random_jet(4, 3, 11, RandomJetOptions { with_a: true, with_q: true });
        let s = jet_to_json_string(&jet);
        let back = jet_from_json_str(&s).unwrap();
        assert_eq!(back, jet);
        assert_eq!(jet_to_json_string(&back), s);
    }

    #[test]
    fn order_too_low_is_reported() {
        let jet = GeometryJet::flat(3, 1).unwrap();
        assert_eq!(
            curvature_package(&jet).unwrap_err(),
            GeometryError::OrderTooLow { what: "curvature", needed: 2, have: 1 }
        );
    }
}
