//! Curvature-invariant bases, the reference coefficient tables and exact
//! recovery of coefficients from sampled jets.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::exact::{Gauss, Rational};
use crate::geometry::CurvatureInvariants;
use crate::heat::GammaTag;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Invariant {
    One,
    H,
    H2,
    SumKappa2,
    RTilde,
    R,
    Q,
    K2,
    H3,
    HRTilde,
    HR,
    HSumKappa2,
    SumKappa3,
    SumKappaRTildeDiag,
    SumKappaRDiag,
    NablaNRTildeNN,
    DqDn,
    HQ,
    K2H,
    /// `∂R̃/∂x_n`
    DnRTilde,
    /// Boundary Laplacian of `H`.
    LaplacianH,
    /// Constant sectional curvature `K` of a space form.
    Sectional,
    HSectional,
}

impl Invariant {
    pub fn label(&self) -> &'static str {
        match self {
            Invariant::One => "1",
            Invariant::H => "H",
            Invariant::H2 => "H^2",
            Invariant::SumKappa2 => "Σκ^2",
            Invariant::RTilde => "R̃",
            Invariant::R => "R",
            Invariant::Q => "q",
            Invariant::K2 => "k^2",
            Invariant::H3 => "H^3",
            Invariant::HRTilde => "HR̃",
            Invariant::HR => "HR",
            Invariant::HSumKappa2 => "HΣκ^2",
            Invariant::SumKappa3 => "Σκ^3",
            Invariant::SumKappaRTildeDiag => "Σκ_αR̃_αα",
            Invariant::SumKappaRDiag => "Σκ_αR_αα",
            Invariant::NablaNRTildeNN => "∇_nR̃_nn",
            Invariant::DqDn => "∂q/∂x_n",
            Invariant::HQ => "Hq",
            Invariant::K2H => "k^2H",
            Invariant::DnRTilde => "∂_nR̃",
            Invariant::LaplacianH => "Δ_∂H",
            Invariant::Sectional => "K",
            Invariant::HSectional => "HK",
        }
    }

    /// Value on a jet's invariants; `None` when the jet does not determine it.
    pub fn evaluate(&self, inv: &CurvatureInvariants) -> Option<Gauss> {
        let re = |r: Rational| Some(Gauss::real(r));
        let h = &inv.h;
        match self {
            Invariant::One => re(Rational::one()),
            Invariant::H => re(h.clone()),
            Invariant::H2 => re(h * h),
            Invariant::SumKappa2 => re(inv.sum_kappa2.clone()),
            Invariant::RTilde => re(inv.r_tilde.clone()),
            Invariant::R => re(inv.r_boundary.clone()),
            Invariant::Q => Some(inv.q0.clone()),
            Invariant::K2 => re(&inv.k * &inv.k),
            Invariant::H3 => re(&(h * h) * h),
            Invariant::HRTilde => re(h * &inv.r_tilde),
            Invariant::HR => re(h * &inv.r_boundary),
            Invariant::HSumKappa2 => re(h * &inv.sum_kappa2),
            Invariant::SumKappa3 => re(inv.sum_kappa3.clone()),
            Invariant::SumKappaRTildeDiag => {
                re(inv.kappa.iter().zip(&inv.r_tilde_diag).fold(Rational::zero(), |s, (k, r)| &s + &(k * r)))
            }
            Invariant::SumKappaRDiag => {
                re(inv.kappa.iter().zip(&inv.r_diag).fold(Rational::zero(), |s, (k, r)| &s + &(k * r)))
            }
            Invariant::NablaNRTildeNN => inv.nabla_n_r_tilde_nn.clone().map(Gauss::real),
            Invariant::DqDn => inv.dq_dn.clone(),
            Invariant::HQ => Some(inv.q0.scale(h)),
            Invariant::K2H => re(&(&inv.k * &inv.k) * h),
            Invariant::DnRTilde => inv.dn_r_tilde.clone().map(Gauss::real),
            Invariant::LaplacianH => inv.laplacian_h.clone().map(Gauss::real),
            Invariant::Sectional | Invariant::HSectional => None,
        }
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// General-manifold basis for `a_k`.
pub fn theorem_basis(k: usize) -> &'static [Invariant] {
    use Invariant::*;
    match k {
        0 => &[One],
        1 => &[H],
        2 => &[H2, SumKappa2, RTilde, R, Q, K2],
        3 => &[H3, HRTilde, HR, HSumKappa2, SumKappa3, SumKappaRTildeDiag, SumKappaRDiag, NablaNRTildeNN, DqDn, HQ, K2H],
        _ => &[],
    }
}

/// General basis extended by the weight-3 invariants the closed form of
/// `a₃` leaves out.
pub fn extended_basis(k: usize) -> Vec<Invariant> {
    let mut b = theorem_basis(k).to_vec();
    if k == 3 {
        b.extend([Invariant::DnRTilde, Invariant::LaplacianH]);
    }
    b
}

/// Space-form basis for `a_k`.
pub fn corollary_basis(k: usize) -> &'static [Invariant] {
    use Invariant::*;
    match k {
        0 => &[One],
        1 => &[H],
        2 => &[H2, R, Sectional, Q, K2],
        3 => &[H3, HSectional, HR, SumKappa3, DqDn, HQ, K2H],
        _ => &[],
    }
}

/// `Σ c_i · I_i` times the Γ-tag, with the `c_i` exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantExpression {
    pub n: usize,
    pub k_index: usize,
    pub tag: GammaTag,
    pub coeffs: BTreeMap<Invariant, Rational>,
}

impl InvariantExpression {
    pub fn zero(n: usize, k_index: usize) -> Self {
        InvariantExpression { n, k_index, tag: GammaTag::for_coefficient(n, k_index), coeffs: BTreeMap::new() }
    }

    pub fn add_term(&mut self, inv: Invariant, c: &Rational) {
        let e = self.coeffs.entry(inv).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&inv);
        }
    }

    pub fn coeff(&self, inv: Invariant) -> Rational {
        self.coeffs.get(&inv).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of the tag on a jet's invariants.
    pub fn evaluate(&self, inv: &CurvatureInvariants) -> Option<Gauss> {
        let mut total = Gauss::default();
        for (b, c) in &self.coeffs {
            total = &total + &b.evaluate(inv)?.scale(c);
        }
        Some(total)
    }

    fn scaled(mut self, f: &Rational) -> Self {
        for c in self.coeffs.values_mut() {
            *c = &*c * f;
        }
        self
    }
}

impl fmt::Display for InvariantExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{} × [", self.tag)?;
        for (i, (b, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})·{b}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReferenceError {
    #[error("no reference for a_{k} at n = {n}")]
    OutOfRange { n: usize, k: usize },
}

fn poly(n: i64, coeffs: &[i64]) -> i64 {
    coeffs.iter().fold(0, |acc, c| acc * n + c)
}

/// `α_i(n)` for `i = 1 … 15`: the bracket coefficients of `a₃`, general
/// (1–11) and space-form (12–15).
pub fn alpha(i: usize, n: usize) -> i64 {
    let n = n as i64;
    match i {
        1 => poly(n, &[1, -5, -10, 52, 2, -114]),
        2 => 3 * (n + 3) * poly(n, &[1, -6, 2, 14]),
        3 => -(n + 3) * poly(n, &[3, -20, 12, 42]),
        4 => 3 * poly(n, &[1, -1, -12, 22, 6]),
        5 => -8 * (n - 2) * (n - 3),
        6 => 12 * (n + 3) * poly(n, &[1, -3, 1]),
        7 => -4 * n * (n + 3) * (3 * n - 8),
        8 => 6 * (n + 1) * (n + 3) * (n - 2),
        9 => -12 * (n + 3) * (n * n - 1),
        10 => -12 * (n + 3) * (n - 4) * (n * n - 1),
        11 => 12 * (n + 3) * (n - 4) * (n * n - 1),
        12 => poly(n, &[1, -2, -25, 12, 164, -96]),
        13 => 2 * n * (n - 2) * poly(n, &[3, -12, -38, 108, -21]),
        14 => -2 * poly(n, &[3, -13, -44, 120, 72]),
        15 => 4 * poly(n, &[3, -1, -14, -12]),
        _ => panic!("alpha index out of range: {i}"),
    }
}

/// Hard-coded closed forms of `a₀ … a₃` evaluated at integer `n`, for a
/// general manifold or (with `constant_curvature`) a space form.
pub fn theorem_reference(n: usize, k: usize, constant_curvature: bool) -> Result<InvariantExpression, ReferenceError> {
    use Invariant::*;
    let min_n = match k {
        0 | 1 => 2,
        2 => 3,
        3 => 4,
        _ => return Err(ReferenceError::OutOfRange { n, k }),
    };
    if n < min_n {
        return Err(ReferenceError::OutOfRange { n, k });
    }
    let ni = n as i64;
    let n2m1 = ni * ni - 1;
    let mut e = InvariantExpression::zero(n, k);
    let int = Rational::from_int;
    let terms: Vec<(Invariant, i64)> = match (k, constant_curvature) {
        (0, _) => vec![(One, 1)],
        (1, _) => {
            e.add_term(H, &Rational::new(ni - 2, 2 * (ni - 1)));
            return Ok(e);
        }
        (2, false) => vec![
            (H2, 3 * poly(ni, &[1, -4, 1, 8])),
            (SumKappa2, 3 * ni * (ni - 3)),
            (RTilde, 3 * (ni + 1) * (ni - 2)),
            (R, -(ni + 1) * (ni - 4)),
            (Q, -12 * n2m1),
            (K2, 12 * n2m1),
        ],
        (2, true) => vec![
            (H2, 3 * (ni - 2) * poly(ni, &[1, -1, -4])),
            (R, -4 * poly(ni, &[1, -3, -1])),
            (Sectional, 6 * ni * (ni - 2) * (ni - 1) * (ni - 1)),
            (Q, -12 * n2m1),
            (K2, 12 * n2m1),
        ],
        (3, false) => theorem_basis(3).iter().enumerate().map(|(i, b)| (*b, alpha(i + 1, n))).collect(),
        (3, true) => vec![
            (H3, alpha(12, n)),
            (HSectional, alpha(13, n)),
            (HR, alpha(14, n)),
            (SumKappa3, alpha(15, n)),
            (DqDn, alpha(9, n)),
            (HQ, alpha(10, n)),
            (K2H, alpha(11, n)),
        ],
        _ => unreachable!(),
    };
    for (b, c) in terms {
        e.add_term(b, &int(c));
    }
    let den = match k {
        2 => 24 * n2m1,
        3 => 48 * (ni + 3) * n2m1,
        _ => 1,
    };
    Ok(e.scaled(&Rational::new(1, den)))
}

/// Rewrites a general-basis expression for a space form of sectional
/// curvature `K`, keeping `K` symbolic.
pub fn space_form_substitute(expr: &InvariantExpression) -> InvariantExpression {
    use Invariant::*;
    let n = Rational::from_int(expr.n as i64);
    let one = Rational::one();
    let nm1 = &n - &one;
    let nm2 = &nm1 - &one;
    let mut out = InvariantExpression { coeffs: BTreeMap::new(), ..expr.clone() };
    for (b, c) in &expr.coeffs {
        let rule: Vec<(Invariant, Rational)> = match b {
            RTilde => vec![(Sectional, &n * &nm1)],
            HRTilde => vec![(HSectional, &n * &nm1)],
            SumKappa2 => vec![(Sectional, &nm1 * &nm2), (H2, one.clone()), (R, -&one)],
            HSumKappa2 => vec![(HSectional, &nm1 * &nm2), (H3, one.clone()), (HR, -&one)],
            SumKappaRTildeDiag => vec![(HSectional, nm1.clone())],
            SumKappaRDiag => vec![(H3, one.clone()), (HSectional, &n * &nm2), (HR, -&one), (SumKappa3, -&one)],
            NablaNRTildeNN => vec![],
            other => vec![(*other, one.clone())],
        };
        for (t, f) in rule {
            out.add_term(t, &(c * &f));
        }
    }
    out
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProjectionError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("samples not in general position")]
    Singular,
    #[error("basis insufficient: held-out sample {0} is not reproduced")]
    BasisInsufficient(usize),
    #[error("invariant {0} is not determined by the sample jets")]
    Undetermined(Invariant),
}

/// Recovers the coefficients of `a_k` over the general basis from exact
/// samples `(invariants, coefficient of the tag)`. Every sample not used as a
/// pivot must be reproduced exactly.
pub fn invariant_projection(
    samples: &[(CurvatureInvariants, Gauss)],
    n: usize,
    k: usize,
) -> Result<InvariantExpression, ProjectionError> {
    invariant_projection_over(samples, n, k, theorem_basis(k))
}

/// [`invariant_projection`] over an explicit basis.
pub fn invariant_projection_over(
    samples: &[(CurvatureInvariants, Gauss)],
    n: usize,
    k: usize,
    basis: &[Invariant],
) -> Result<InvariantExpression, ProjectionError> {
    let b = basis.len();
    if samples.len() < b {
        return Err(ProjectionError::TooFewSamples { needed: b, got: samples.len() });
    }
    let mut rows: Vec<Vec<Gauss>> = Vec::with_capacity(samples.len());
    for (inv, v) in samples {
        let mut row = Vec::with_capacity(b + 1);
        for inv_b in basis {
            row.push(inv_b.evaluate(inv).ok_or(ProjectionError::Undetermined(*inv_b))?);
        }
        row.push(v.clone());
        rows.push(row);
    }
    let original = rows.clone();
    // reduced row echelon form
    let mut pivot_row = 0;
    for col in 0..b {
        let Some(p) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            return Err(ProjectionError::Singular);
        };
        rows.swap(pivot_row, p);
        let inv = rows[pivot_row][col].recip();
        for c in col..=b {
            rows[pivot_row][c] = &rows[pivot_row][c] * &inv;
        }
        for r in 0..rows.len() {
            if r != pivot_row && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in col..=b {
                    let t = &rows[pivot_row][c] * &f;
                    rows[r][c] = &rows[r][c] - &t;
                }
            }
        }
        pivot_row += 1;
    }
    let solution: Vec<Gauss> = (0..b).map(|i| rows[i][b].clone()).collect();
    for (idx, row) in original.iter().enumerate() {
        let mut acc = Gauss::default();
        for i in 0..b {
            acc = &acc + &(&row[i] * &solution[i]);
        }
        if acc != row[b] {
            return Err(ProjectionError::BasisInsufficient(idx));
        }
    }
    let mut out = InvariantExpression::zero(n, k);
    for (inv_b, c) in basis.iter().zip(solution) {
        if !c.is_real() {
            return Err(ProjectionError::BasisInsufficient(0));
        }
        out.add_term(*inv_b, &c.re);
    }
    Ok(out)
}
