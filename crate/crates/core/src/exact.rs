//! Exact scalars: rationals with a machine-word fast path and Gaussian
//! rationals built on top of them.
//!
//! Almost every coefficient produced by the symbol recursion has a small
//! numerator and a denominator made of small primes, so `Rational` keeps an
//! `i128` pair and only promotes to a bignum when a checked operation
//! overflows. Values are always stored in lowest terms with a positive
//! denominator, and a value that fits the small form is never stored as a
//! bignum, so structural equality is value equality.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("cannot parse `{0}` as an exact number")]
pub struct ParseExactError(pub String);

#[derive(Clone)]
pub enum Rational {
    Small { num: i128, den: i128 },
    Big(Box<BigRational>),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    gcd_u128(a.unsigned_abs(), b.unsigned_abs()) as i128
}

impl Rational {
    pub fn zero() -> Self {
        Rational::Small { num: 0, den: 1 }
    }

    pub fn one() -> Self {
        Rational::Small { num: 1, den: 1 }
    }

    pub fn from_int(v: i64) -> Self {
        Rational::Small { num: v as i128, den: 1 }
    }

    /// `num/den` reduced. Panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128).expect("i64 fraction always fits")
    }

    fn from_i128(num: i128, den: i128) -> Option<Self> {
        let g = gcd_i128(num, den);
        let (mut n, mut d) = if g > 1 { (num / g, den / g) } else { (num, den) };
        if d < 0 {
            n = n.checked_neg()?;
            d = d.checked_neg()?;
        }
        if n == 0 {
            d = 1;
        }
        Some(Rational::Small { num: n, den: d })
    }

    fn from_big(r: BigRational) -> Self {
        // BigRational is already reduced with a positive denominator.
        if let (Some(n), Some(d)) = (r.numer().to_i128(), r.denom().to_i128()) {
            if n != i128::MIN {
                return Rational::Small { num: n, den: d };
            }
        }
        Rational::Big(Box::new(r))
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rational::Small { num, den } => {
                BigRational::new_raw(BigInt::from(*num), BigInt::from(*den))
            }
            Rational::Big(b) => (**b).clone(),
        }
    }

    pub fn from_bigint_frac(num: BigInt, den: BigInt) -> Self {
        Self::from_big(BigRational::new(num, den))
    }

    /// Exact conversion of a finite binary64 value.
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Self::from_big)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rational::Small { num: 0, .. })
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Rational::Small { num: 1, den: 1 })
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rational::Small { den, .. } => *den == 1,
            Rational::Big(b) => b.is_integer(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Rational::Small { num, .. } => num.signum() as i32,
            Rational::Big(b) => {
                if b.is_negative() {
                    -1
                } else if b.is_zero() {
                    0
                } else {
                    1
                }
            }
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Rational::Small { num, .. } => BigInt::from(*num),
            Rational::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Rational::Small { den, .. } => BigInt::from(*den),
            Rational::Big(b) => b.denom().clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rational::Small { num, den } => *num as f64 / *den as f64,
            Rational::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        match self {
            Rational::Small { num, den } => {
                Self::from_i128(*den, *num).unwrap_or_else(|| Self::from_big(self.to_big().recip()))
            }
            Rational::Big(b) => Self::from_big(b.recip()),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Rational::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_int(v)
    }
}

impl From<i32> for Rational {
    fn from(v: i32) -> Self {
        Rational::from_int(v as i64)
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Rational::Small { num: a, den: b }, Rational::Small { num: c, den: d }) => {
                a == c && b == d
            }
            (Rational::Big(a), Rational::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Rational::Small { num, den } => {
                0u8.hash(state);
                num.hash(state);
                den.hash(state);
            }
            Rational::Big(b) => {
                1u8.hash(state);
                b.hash(state);
            }
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Rational::Small { num: a, den: b }, Rational::Small { num: c, den: d }) =
            (self, other)
        {
            if let (Some(l), Some(r)) = (a.checked_mul(*d), c.checked_mul(*b)) {
                return l.cmp(&r);
            }
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn add(self, rhs: &'a Rational) -> Rational {
        if let (Rational::Small { num: a, den: b }, Rational::Small { num: c, den: d }) =
            (self, rhs)
        {
            if *a == 0 {
                return rhs.clone();
            }
            if *c == 0 {
                return self.clone();
            }
            if b == d {
                if let Some(n) = a.checked_add(*c) {
                    if let Some(r) = Rational::from_i128(n, *b) {
                        return r;
                    }
                }
            } else {
                let g = gcd_i128(*b, *d);
                let (bg, dg) = (b / g, d / g);
                let num = a
                    .checked_mul(dg)
                    .and_then(|x| c.checked_mul(bg).and_then(|y| x.checked_add(y)));
                let den = b.checked_mul(dg);
                if let (Some(n), Some(dd)) = (num, den) {
                    if let Some(r) = Rational::from_i128(n, dd) {
                        return r;
                    }
                }
            }
        }
        Rational::from_big(self.to_big() + rhs.to_big())
    }
}

impl<'a> Sub<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn sub(self, rhs: &'a Rational) -> Rational {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn mul(self, rhs: &'a Rational) -> Rational {
        if let (Rational::Small { num: a, den: b }, Rational::Small { num: c, den: d }) =
            (self, rhs)
        {
            if *a == 0 || *c == 0 {
                return Rational::zero();
            }
            if *b == 1 && *d == 1 {
                if let Some(n) = a.checked_mul(*c) {
                    return Rational::Small { num: n, den: 1 };
                }
            }
            let g1 = gcd_i128(*a, *d);
            let g2 = gcd_i128(*c, *b);
            let num = (a / g1).checked_mul(c / g2);
            let den = (b / g2).checked_mul(d / g1);
            if let (Some(n), Some(dd)) = (num, den) {
                return Rational::Small { num: n, den: dd };
            }
        }
        Rational::from_big(self.to_big() * rhs.to_big())
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        self * &rhs.recip()
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match self {
            Rational::Small { num, den } => match num.checked_neg() {
                Some(n) => Rational::Small { num: n, den: *den },
                None => Rational::from_big(-self.to_big()),
            },
            Rational::Big(b) => Rational::from_big(-(**b).clone()),
        }
    }
}

macro_rules! forward_owned {
    ($ty:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr<$ty> for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a $ty> for $ty {
            type Output = $ty;
            fn $m(self, rhs: &'a $ty) -> $ty { (&self).$m(rhs) }
        }
    )*};
}

forward_owned!(Rational, Add add, Sub sub, Mul mul, Div div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = &*self * rhs;
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational::one()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rational::Small { num, den: 1 } => write!(f, "{num}"),
            Rational::Small { num, den } => write!(f, "{num}/{den}"),
            Rational::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Rational::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rational {
    type Err = ParseExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseExactError(s.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Rational::from_big(BigRational::new(n, d)))
    }
}

/// Exact `a + b i` with rational parts.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gauss {
    pub re: Rational,
    pub im: Rational,
}

impl Gauss {
    pub fn new(re: Rational, im: Rational) -> Self {
        Gauss { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Gauss { re, im: Rational::zero() }
    }

    pub fn from_int(v: i64) -> Self {
        Gauss::real(Rational::from_int(v))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        Gauss::real(Rational::new(num, den))
    }

    pub fn i() -> Self {
        Gauss { re: Rational::zero(), im: Rational::one() }
    }

    /// `(-i)^k`
    pub fn neg_i_pow(k: usize) -> Self {
        match k % 4 {
            0 => Gauss::from_int(1),
            1 => -Gauss::i(),
            2 => Gauss::from_int(-1),
            _ => Gauss::i(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Gauss { re: self.re.clone(), im: -&self.im }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Gauss { re: &self.re * r, im: &self.im * r }
    }

    pub fn recip(&self) -> Self {
        let norm = &(&self.re * &self.re) + &(&self.im * &self.im);
        assert!(!norm.is_zero(), "reciprocal of zero");
        let inv = norm.recip();
        Gauss { re: &self.re * &inv, im: -&(&self.im * &inv) }
    }
}

impl<'a> Add<&'a Gauss> for &'a Gauss {
    type Output = Gauss;
    fn add(self, rhs: &'a Gauss) -> Gauss {
        Gauss { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl<'a> Sub<&'a Gauss> for &'a Gauss {
    type Output = Gauss;
    fn sub(self, rhs: &'a Gauss) -> Gauss {
        Gauss { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl<'a> Mul<&'a Gauss> for &'a Gauss {
    type Output = Gauss;
    fn mul(self, rhs: &'a Gauss) -> Gauss {
        match (self.im.is_zero(), rhs.im.is_zero()) {
            (true, true) => Gauss::real(&self.re * &rhs.re),
            (true, false) => Gauss { re: &self.re * &rhs.re, im: &self.re * &rhs.im },
            (false, true) => Gauss { re: &self.re * &rhs.re, im: &self.im * &rhs.re },
            (false, false) => Gauss {
                re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
                im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
            },
        }
    }
}

impl<'a> Div<&'a Gauss> for &'a Gauss {
    type Output = Gauss;
    fn div(self, rhs: &'a Gauss) -> Gauss {
        self * &rhs.recip()
    }
}

impl Neg for &Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss { re: -&self.re, im: -&self.im }
    }
}

impl Neg for Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        -&self
    }
}

forward_owned!(Gauss, Add add, Sub sub, Mul mul, Div div);

impl AddAssign<&Gauss> for Gauss {
    fn add_assign(&mut self, rhs: &Gauss) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&Gauss> for Gauss {
    fn sub_assign(&mut self, rhs: &Gauss) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl Zero for Gauss {
    fn zero() -> Self {
        Gauss::default()
    }
    fn is_zero(&self) -> bool {
        Gauss::is_zero(self)
    }
}

impl One for Gauss {
    fn one() -> Self {
        Gauss::from_int(1)
    }
}

impl From<Rational> for Gauss {
    fn from(r: Rational) -> Self {
        Gauss::real(r)
    }
}

impl fmt::Display for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im.signum() < 0 {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl fmt::Debug for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Gauss {
    type Err = ParseExactError;

    /// Accepts `a`, `bi`, `a+bi` and `a-bi` with rational `a`, `b`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let err = || ParseExactError(s.to_string());
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Gauss::real(t.parse()?));
        };
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            other => other,
        };
        let im = im.strip_prefix('+').unwrap_or(im);
        Ok(Gauss { re: re.parse().map_err(|_| err())?, im: im.parse().map_err(|_| err())? })
    }
}

/// `n!` as an exact rational.
pub fn factorial(n: u32) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    Rational::from_bigint_frac(acc, BigInt::one())
}

/// Rising product `a (a+1) ... (a+len-1)`; empty product is one.
pub fn rising(a: i64, len: u32) -> Rational {
    let mut acc = BigInt::one();
    for j in 0..len as i64 {
        acc *= a + j;
    }
    Rational::from_bigint_frac(acc, BigInt::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn small_arithmetic() {
        assert_eq!(q("1/2") + q("1/3"), q("5/6"));
        assert_eq!(q("1/2") * q("2/3"), q("1/3"));
        assert_eq!(q("1/2") - q("1/2"), Rational::zero());
        assert_eq!(q("-3/6"), q("1/-2"));
        assert_eq!(q("7").to_string(), "7");
        assert_eq!(q("-14/4").to_string(), "-7/2");
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rational::Small { num: i128::MAX / 3, den: 1 };
        let sq = &big * &big;
        assert!(matches!(sq, Rational::Big(_)));
        let back = &sq / &big;
        assert!(matches!(back, Rational::Small { .. }));
        assert_eq!(back, big);
    }

    #[test]
    fn gauss_parse_and_print() {
        for s in ["3/4", "1/2+3/4i", "-1/2-3i", "5i", "-2/3i", "0"] {
            let g: Gauss = s.parse().unwrap();
            assert_eq!(g.to_string().parse::<Gauss>().unwrap(), g, "{s}");
        }
        assert_eq!("1/2+3/4i".parse::<Gauss>().unwrap().to_string(), "1/2+3/4i");
        assert_eq!(Gauss::i() * Gauss::i(), Gauss::from_int(-1));
        assert_eq!(Gauss::neg_i_pow(3), Gauss::i());
    }

    #[test]
    fn rejects_garbage() {
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
    }

    proptest! {
        #[test]
        fn matches_bigrational(a in -1_000_000i64..1_000_000, b in 1i64..10_000,
                               c in -1_000_000i64..1_000_000, d in 1i64..10_000) {
            let x = Rational::new(a, b);
            let y = Rational::new(c, d);
            let bx = BigRational::new(a.into(), b.into());
            let by = BigRational::new(c.into(), d.into());
            prop_assert_eq!((&x + &y).to_big(), &bx + &by);
            prop_assert_eq!((&x * &y).to_big(), &bx * &by);
            prop_assert_eq!((&x - &y).to_big(), &bx - &by);
            prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
        }
    }
}
