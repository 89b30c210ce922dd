//! Truncated multivariate Taylor jets with exact Gaussian-rational
//! coefficients.

use std::collections::BTreeMap;
use std::fmt;

use crate::exact::{factorial, Gauss, Rational};

/// Maximum number of variables a [`Mono`] can hold.
pub const MAX_VARS: usize = 16;

/// Packed exponent vector, one byte per variable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mono(pub u128);

const BYTE_SUM: u128 = 0x0101_0101_0101_0101_0101_0101_0101_0101;

impl Mono {
    pub const ONE: Mono = Mono(0);

    pub fn var(i: usize) -> Mono {
        debug_assert!(i < MAX_VARS);
        Mono(1u128 << (8 * i))
    }

    pub fn from_exps(exps: &[u32]) -> Mono {
        assert!(exps.len() <= MAX_VARS, "too many variables");
        let mut m = 0u128;
        for (i, &e) in exps.iter().enumerate() {
            assert!(e < 256, "exponent too large");
            m |= (e as u128) << (8 * i);
        }
        Mono(m)
    }

    #[inline]
    pub fn get(self, i: usize) -> u32 {
        ((self.0 >> (8 * i)) & 0xff) as u32
    }

    /// Total degree. Exact while the degree stays below 256.
    #[inline]
    pub fn degree(self) -> u32 {
        (self.0.wrapping_mul(BYTE_SUM) >> 120) as u32
    }

    #[inline]
    pub fn mul(self, other: Mono) -> Mono {
        Mono(self.0 + other.0)
    }

    /// Removes one power of variable `i`; `None` if absent.
    #[inline]
    pub fn div_var(self, i: usize) -> Option<Mono> {
        if self.get(i) == 0 {
            None
        } else {
            Some(Mono(self.0 - (1u128 << (8 * i))))
        }
    }

    pub fn exps(self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|i| self.get(i)).collect()
    }

    /// `μ!` as a rational.
    pub fn factorial(self, nvars: usize) -> Rational {
        let mut acc = Rational::one();
        for i in 0..nvars {
            acc = &acc * &factorial(self.get(i));
        }
        acc
    }

    pub fn is_one(self) -> bool {
        self.0 == 0
    }

    /// All exponents even.
    pub fn is_even(self) -> bool {
        self.0 & 0x0101_0101_0101_0101_0101_0101_0101_0101 == 0
    }

    pub fn key(self, nvars: usize) -> String {
        self.exps(nvars).iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    }

    pub fn parse_key(s: &str, nvars: usize) -> Option<Mono> {
        let exps: Vec<u32> = s
            .split(',')
            .map(|t| t.trim().parse().ok())
            .collect::<Option<Vec<u32>>>()?;
        if exps.len() != nvars || exps.iter().any(|&e| e > 255) {
            return None;
        }
        Some(Mono::from_exps(&exps))
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "[")?;
        for i in 0..MAX_VARS {
            let e = self.get(i);
            if e > 0 {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{i}^{e}")?;
                first = false;
            }
        }
        write!(f, "]")
    }
}

/// Enumerates every monomial in `nvars` variables of total degree `deg`.
pub fn monomials_of_degree(nvars: usize, deg: u32) -> Vec<Mono> {
    fn rec(i: usize, nvars: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Mono>) {
        if i + 1 == nvars {
            cur[i] = left;
            out.push(Mono::from_exps(cur));
            cur[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(i + 1, nvars, left - e, cur, out);
        }
        cur[i] = 0;
    }
    if nvars == 0 {
        return if deg == 0 { vec![Mono::ONE] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(0, nvars, deg, &mut vec![0; nvars], &mut out);
    out
}

/// Taylor polynomial `Σ c_μ x^μ` known up to total degree `order`.
#[derive(Clone, PartialEq, Eq)]
pub struct Jet {
    pub nvars: usize,
    pub order: u32,
    terms: BTreeMap<Mono, Gauss>,
}

impl Jet {
    pub fn zero(nvars: usize, order: u32) -> Jet {
        assert!(nvars <= MAX_VARS, "too many variables");
        Jet { nvars, order, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, order: u32, c: Gauss) -> Jet {
        let mut j = Jet::zero(nvars, order);
        j.set(Mono::ONE, c);
        j
    }

    pub fn one(nvars: usize, order: u32) -> Jet {
        Jet::constant(nvars, order, Gauss::from_int(1))
    }

    pub fn var(nvars: usize, order: u32, i: usize) -> Jet {
        let mut j = Jet::zero(nvars, order);
        j.set(Mono::var(i), Gauss::from_int(1));
        j
    }

    /// Sets a coefficient; silently ignores monomials beyond the order.
    pub fn set(&mut self, m: Mono, c: Gauss) {
        if m.degree() > self.order {
            return;
        }
        if c.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, c);
        }
    }

    pub fn add_term(&mut self, m: Mono, c: &Gauss) {
        if m.degree() > self.order || c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_default();
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn coeff(&self, m: Mono) -> Gauss {
        self.terms.get(&m).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Gauss)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn value(&self) -> Gauss {
        self.coeff(Mono::ONE)
    }

    /// Partial derivative `∂^μ f(0) = μ! c_μ`.
    pub fn derivative_at_origin(&self, mu: Mono) -> Gauss {
        self.coeff(mu).scale(&mu.factorial(self.nvars))
    }

    pub fn truncate(&self, order: u32) -> Jet {
        let order = order.min(self.order);
        Jet {
            nvars: self.nvars,
            order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= order)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut out = self.truncate(self.order.min(other.order));
        for (m, c) in &other.terms {
            out.add_term(*m, c);
        }
        out
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Jet {
        self.scale(&Gauss::from_int(-1))
    }

    pub fn scale(&self, c: &Gauss) -> Jet {
        let mut out = Jet::zero(self.nvars, self.order);
        for (m, v) in &self.terms {
            out.set(*m, v * c);
        }
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let mut out = Jet::zero(self.nvars, order);
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            if da > order {
                continue;
            }
            for (mb, cb) in &other.terms {
                if da + mb.degree() <= order {
                    out.add_term(ma.mul(*mb), &(ca * cb));
                }
            }
        }
        out
    }

    /// `∂f/∂x_i`; the known order drops by one (saturating at zero, in
    /// which case the result is the zero jet of order zero only when `f`
    /// had no linear information left).
    pub fn diff(&self, i: usize) -> Jet {
        let order = self.order.saturating_sub(1);
        let mut out = Jet::zero(self.nvars, order);
        if self.order == 0 {
            return out;
        }
        for (m, c) in &self.terms {
            if let Some(r) = m.div_var(i) {
                out.add_term(r, &c.scale(&Rational::from_int(m.get(i) as i64)));
            }
        }
        out
    }

    /// Restriction to the hyperplane `x_i = 0`.
    pub fn restrict_zero(&self, i: usize) -> Jet {
        Jet {
            nvars: self.nvars,
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.get(i) == 0)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Reinterprets the jet in the first `nvars` variables; panics if a
    /// dropped variable occurs.
    pub fn drop_trailing_vars(&self, nvars: usize) -> Jet {
        let mut out = Jet::zero(nvars, self.order);
        for (m, c) in &self.terms {
            assert!((nvars..self.nvars).all(|i| m.get(i) == 0), "variable still present");
            out.set(*m, c.clone());
        }
        out
    }

    /// Real parts of all coefficients, or `None` if any is not real.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(Gauss::is_real)
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(order {}; ", self.order)?;
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c}){m:?}")?;
        }
        write!(f, ")")
    }
}

/// Inverse of a symmetric matrix of jets whose constant part is the identity,
/// by the Neumann series `Σ (−E)^k` with `E = M − I`.
pub fn invert_near_identity(m: &[Vec<Jet>]) -> Vec<Vec<Jet>> {
    let d = m.len();
    if d == 0 {
        return vec![];
    }
    let nvars = m[0][0].nvars;
    let order = m.iter().flatten().map(|j| j.order).min().unwrap_or(0);
    let mut e = vec![vec![Jet::zero(nvars, order); d]; d];
    for a in 0..d {
        for b in 0..d {
            let mut j = m[a][b].truncate(order);
            let id = if a == b { Gauss::from_int(1) } else { Gauss::default() };
            assert_eq!(j.value(), id, "matrix is not the identity at the origin");
            j.set(Mono::ONE, Gauss::default());
            e[a][b] = j.neg();
        }
    }
    let identity = |a: usize, b: usize| {
        if a == b {
            Jet::one(nvars, order)
        } else {
            Jet::zero(nvars, order)
        }
    };
    let mut result: Vec<Vec<Jet>> = (0..d).map(|a| (0..d).map(|b| identity(a, b)).collect()).collect();
    let mut power = result.clone();
    for _ in 0..order {
        power = matmul(&power, &e);
        for a in 0..d {
            for b in 0..d {
                result[a][b] = result[a][b].add(&power[a][b]);
            }
        }
    }
    result
}

pub fn matmul(a: &[Vec<Jet>], b: &[Vec<Jet>]) -> Vec<Vec<Jet>> {
    let d = a.len();
    let nvars = a[0][0].nvars;
    let order = a[0][0].order.min(b[0][0].order);
    let mut out = vec![vec![Jet::zero(nvars, order); d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = Jet::zero(nvars, order);
            for k in 0..d {
                acc = acc.add(&a[i][k].mul(&b[k][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> Gauss {
        Gauss::frac(a, b)
    }

    #[test]
    fn mono_packing() {
        let m = Mono::from_exps(&[1, 0, 3]);
        assert_eq!(m.degree(), 4);
        assert_eq!(m.get(2), 3);
        assert_eq!(m.div_var(1), None);
        assert_eq!(m.div_var(2).unwrap().get(2), 2);
        assert_eq!(m.key(3), "1,0,3");
        assert_eq!(Mono::parse_key("1,0,3", 3), Some(m));
        assert!(Mono::from_exps(&[2, 4]).is_even());
        assert!(!m.is_even());
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials_of_degree(3, 2).len(), 6);
        assert_eq!(monomials_of_degree(4, 3).len(), 20);
        assert_eq!(monomials_of_degree(1, 5).len(), 1);
    }

    #[test]
    fn truncated_product() {
        // (1 + x)(1 - x + x^2) = 1 + x^3, truncated at order 2 gives 1
        let mut a = Jet::one(1, 2);
        a.set(Mono::var(0), q(1, 1));
        let mut b = Jet::one(1, 2);
        b.set(Mono::var(0), q(-1, 1));
        b.set(Mono::from_exps(&[2]), q(1, 1));
        assert_eq!(a.mul(&b), Jet::one(1, 2));
    }

    #[test]
    fn derivative_drops_order() {
        let mut a = Jet::zero(2, 3);
        a.set(Mono::from_exps(&[2, 1]), q(1, 3));
        let d = a.diff(0);
        assert_eq!(d.order, 2);
        assert_eq!(d.coeff(Mono::from_exps(&[1, 1])), q(2, 3));
        assert_eq!(a.derivative_at_origin(Mono::from_exps(&[2, 1])), q(2, 3));
    }

    #[test]
    fn neumann_inverse() {
        let mut m = vec![vec![Jet::one(2, 3), Jet::zero(2, 3)], vec![Jet::zero(2, 3), Jet::one(2, 3)]];
        m[0][0].set(Mono::var(1), q(-2, 1));
        m[0][1].set(Mono::from_exps(&[1, 1]), q(1, 2));
        m[1][0].set(Mono::from_exps(&[1, 1]), q(1, 2));
        m[1][1].set(Mono::from_exps(&[2, 0]), q(1, 5));
        let inv = invert_near_identity(&m);
        let prod = matmul(&m, &inv);
        for a in 0..2 {
            for b in 0..2 {
                let expect = if a == b { Jet::one(2, 3) } else { Jet::zero(2, 3) };
                assert_eq!(prod[a][b], expect);
            }
        }
    }

    fn small_jet() -> impl Strategy<Value = Jet> {
        proptest::collection::vec((0u32..3, 0u32..3, -4i64..5, 1i64..4), 0..6).prop_map(|ts| {
            let mut j = Jet::zero(2, 3);
            for (a, b, n, d) in ts {
                j.add_term(Mono::from_exps(&[a, b]), &Gauss::frac(n, d));
            }
            j
        })
    }

    proptest! {
        #[test]
        fn ring_laws(a in small_jet(), b in small_jet(), c in small_jet()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn leibniz(a in small_jet(), b in small_jet()) {
            let lhs = a.mul(&b).diff(0);
            let rhs = a.diff(0).mul(&b).add(&a.mul(&b.diff(0)));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
