//! Exact algebra of parameter-dependent symbols near the base point.
//!
//! A term is `c · x^μ · ξ^β · w₁^ε · Q^{-m} · s^q` where `Q = Σ g^{αβ}(x) ξ_α ξ_β`,
//! `w₁ = √Q` and `s = (w₁ − τ)^{-1}`. The x-dependence of `Q` stays implicit
//! in the key; it only becomes explicit through derivatives (`∂_i Q`), through
//! `w₁² = Q` carries that leave no negative power to absorb, and through
//! [`Symbol::is_zero_mod_q`].
//!
//! Each symbol carries a truncation `order`: monomials `x^μ` with
//! `|μ| > order` are unknown and are dropped. `EXACT` marks symbols that are
//! not truncated at all.

use std::fmt::Write as _;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::exact::{Gauss, Rational};
use crate::jet::{Jet, Mono};

pub const EXACT: i32 = i32::MAX;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SymbolError {
    #[error("coefficient jet order exhausted: x-derivative of a symbol known only to order 0")]
    JetExhausted,
    #[error("symbols belong to different contexts")]
    ContextMismatch,
}

fn sub_order(o: i32, k: i32) -> i32 {
    if o == EXACT {
        EXACT
    } else {
        o - k
    }
}

/// Polynomial in `ξ` with jet coefficients, as a flat list.
type XiPoly = Vec<(Mono, Mono, Gauss)>;

/// Metric data shared by all symbols of one computation.
#[derive(Debug)]
pub struct SymCtx {
    /// Ambient dimension; `x` has `n` variables, `ξ` has `n - 1`.
    pub n: usize,
    pub g_order: i32,
    q_poly: XiPoly,
    g_xi: Vec<XiPoly>,
    d_q: Vec<XiPoly>,
}

impl SymCtx {
    /// Flat metric: `Q = |ξ|²` exactly.
    pub fn flat(n: usize) -> Arc<SymCtx> {
        let d = n - 1;
        let one = Gauss::from_int(1);
        let q_poly = merge((0..d).map(|a| (Mono::var(a).mul(Mono::var(a)), Mono::ONE, one.clone())).collect());
        let g_xi = (0..d).map(|a| vec![(Mono::var(a), Mono::ONE, one.clone())]).collect();
        Arc::new(SymCtx { n, g_order: EXACT, q_poly, g_xi, d_q: vec![vec![]; n] })
    }

    /// Context from the jets of `g^{αβ}` (tangential block, `n` variables).
    pub fn from_inverse_metric(n: usize, ginv: &[Vec<Jet>]) -> Arc<SymCtx> {
        let d = n - 1;
        assert_eq!(ginv.len(), d);
        let order = ginv.iter().flatten().map(|j| j.order).min().unwrap_or(0);
        let mut q_poly = XiPoly::new();
        let mut g_xi = vec![XiPoly::new(); d];
        for a in 0..d {
            for b in 0..d {
                for (m, c) in ginv[a][b].terms() {
                    if m.degree() > order {
                        continue;
                    }
                    q_poly.push((Mono::var(a).mul(Mono::var(b)), *m, c.clone()));
                    g_xi[a].push((Mono::var(b), *m, c.clone()));
                }
            }
        }
        let q_poly = merge(q_poly);
        let g_xi = g_xi.into_iter().map(merge).collect();
        let d_q = (0..n)
            .map(|i| {
                merge(
                    q_poly
                        .iter()
                        .filter_map(|(xi, x, c)| {
                            x.div_var(i).map(|r| (*xi, r, c.scale(&Rational::from_int(x.get(i) as i64))))
                        })
                        .collect(),
                )
            })
            .collect();
        Arc::new(SymCtx { n, g_order: order as i32, q_poly, g_xi, d_q })
    }

    pub fn dim_xi(&self) -> usize {
        self.n - 1
    }
}

fn merge(p: XiPoly) -> XiPoly {
    let mut map: FxHashMap<(Mono, Mono), Gauss> = FxHashMap::default();
    for (a, b, c) in p {
        *map.entry((a, b)).or_default() += &c;
    }
    let mut out: XiPoly = map.into_iter().filter(|(_, c)| !c.is_zero()).map(|((a, b), c)| (a, b, c)).collect();
    // by x-degree first, so truncated loops can stop early
    out.sort_by_key(|t| (t.1.degree(), t.1, t.0));
    out
}

/// Canonical term key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    pub xi: Mono,
    pub x: Mono,
    pub eps: u8,
    pub m: u16,
    pub q: u16,
}

impl Key {
    /// Parametric degree `|β| + ε − 2m − q`.
    pub fn degree(&self) -> i32 {
        self.xi.degree() as i32 + self.eps as i32 - 2 * self.m as i32 - self.q as i32
    }

    pub fn has_q_dependence(&self) -> bool {
        self.eps > 0 || self.m > 0 || self.q > 0
    }
}

/// Un-normalised term; `w1_pow` may be any integer.
#[derive(Clone, Debug)]
pub struct RawTerm {
    pub coeff: Gauss,
    pub xi: Mono,
    pub x: Mono,
    pub w1_pow: i32,
    pub s_pow: u16,
}

#[derive(Clone)]
pub struct Symbol {
    ctx: Arc<SymCtx>,
    pub order: i32,
    terms: FxHashMap<Key, Gauss>,
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.terms == other.terms
    }
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Symbol(order {}) {{\n{}}}", self.order, self.dump())
    }
}

impl Symbol {
    pub fn zero(ctx: &Arc<SymCtx>, order: i32) -> Symbol {
        Symbol { ctx: ctx.clone(), order, terms: FxHashMap::default() }
    }

    pub fn constant(ctx: &Arc<SymCtx>, c: Gauss) -> Symbol {
        let mut s = Symbol::zero(ctx, EXACT);
        s.push(Key { xi: Mono::ONE, x: Mono::ONE, eps: 0, m: 0, q: 0 }, c);
        s
    }

    pub fn one(ctx: &Arc<SymCtx>) -> Symbol {
        Symbol::constant(ctx, Gauss::from_int(1))
    }

    fn single(ctx: &Arc<SymCtx>, key: Key, c: Gauss) -> Symbol {
        let order = if key.has_q_dependence() { ctx.g_order } else { EXACT };
        let mut s = Symbol::zero(ctx, order);
        s.push(key, c);
        s
    }

    /// `ξ_α`
    pub fn xi(ctx: &Arc<SymCtx>, alpha: usize) -> Symbol {
        Symbol::single(ctx, Key { xi: Mono::var(alpha), x: Mono::ONE, eps: 0, m: 0, q: 0 }, Gauss::from_int(1))
    }

    /// `w₁ = |ξ'|_g`
    pub fn w1(ctx: &Arc<SymCtx>) -> Symbol {
        Symbol::single(ctx, Key { xi: Mono::ONE, x: Mono::ONE, eps: 1, m: 0, q: 0 }, Gauss::from_int(1))
    }

    /// `(2 w₁)^{-1} = ½ w₁ Q^{-1}`
    pub fn inv_two_w1(ctx: &Arc<SymCtx>) -> Symbol {
        Symbol::single(ctx, Key { xi: Mono::ONE, x: Mono::ONE, eps: 1, m: 1, q: 0 }, Gauss::frac(1, 2))
    }

    /// `s₋₁ = (w₁ − τ)^{-1}`
    pub fn s(ctx: &Arc<SymCtx>) -> Symbol {
        Symbol::single(ctx, Key { xi: Mono::ONE, x: Mono::ONE, eps: 0, m: 0, q: 1 }, Gauss::from_int(1))
    }

    /// `Q` written out as a ξ-polynomial with jet coefficients.
    pub fn q_poly(ctx: &Arc<SymCtx>) -> Symbol {
        let mut s = Symbol::zero(ctx, ctx.g_order);
        for (xi, x, c) in &ctx.q_poly {
            s.push(Key { xi: *xi, x: *x, eps: 0, m: 0, q: 0 }, c.clone());
        }
        s
    }

    /// Jet coefficient as a ξ-independent symbol.
    pub fn from_jet(ctx: &Arc<SymCtx>, j: &Jet) -> Symbol {
        let mut s = Symbol::zero(ctx, j.order as i32);
        for (m, c) in j.terms() {
            s.push(Key { xi: Mono::ONE, x: *m, eps: 0, m: 0, q: 0 }, c.clone());
        }
        s
    }

    /// Canonical form of a raw term list: merges like terms, drops zeros and
    /// folds even powers of `w₁` into powers of `Q`.
    pub fn normalize(ctx: &Arc<SymCtx>, order: i32, raw: &[RawTerm]) -> Symbol {
        let mut order = order;
        if raw.iter().any(|t| t.w1_pow != 0 || t.s_pow != 0) {
            order = order.min(ctx.g_order);
        }
        let mut s = Symbol::zero(ctx, order);
        for t in raw {
            let eps = t.w1_pow.rem_euclid(2);
            let half = (t.w1_pow - eps) / 2;
            if half <= 0 {
                s.push(Key { xi: t.xi, x: t.x, eps: eps as u8, m: (-half) as u16, q: t.s_pow }, t.coeff.clone());
            } else {
                let mut poly: XiPoly = vec![(t.xi, t.x, t.coeff.clone())];
                for _ in 0..half {
                    poly = s.times_q_poly(&poly);
                }
                for (xi, x, c) in poly {
                    s.push(Key { xi, x, eps: eps as u8, m: 0, q: t.s_pow }, c);
                }
            }
        }
        s
    }

    fn times_q_poly(&self, p: &XiPoly) -> XiPoly {
        let mut out = XiPoly::new();
        for (xi, x, c) in p {
            let budget = self.order as i64 - x.degree() as i64;
            for (qxi, qx, qc) in &self.ctx.q_poly {
                if qx.degree() as i64 > budget {
                    break;
                }
                out.push((xi.mul(*qxi), x.mul(*qx), c * qc));
            }
        }
        merge(out)
    }

    pub fn raw_terms(&self) -> Vec<RawTerm> {
        self.sorted_terms()
            .into_iter()
            .map(|(k, c)| RawTerm {
                coeff: c.clone(),
                xi: k.xi,
                x: k.x,
                w1_pow: k.eps as i32 - 2 * k.m as i32,
                s_pow: k.q,
            })
            .collect()
    }

    pub fn ctx(&self) -> &Arc<SymCtx> {
        &self.ctx
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Structurally zero (no terms).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &Gauss)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &Key) -> Gauss {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    #[inline]
    fn push(&mut self, key: Key, c: Gauss) {
        if c.is_zero() || (key.x.degree() as i64) > self.order as i64 {
            return;
        }
        match self.terms.entry(key) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    /// Pushes `c ξ^xi x^x w₁^eps Q^{-m} s^q` with `eps ≤ 2`, carrying `w₁²`.
    #[inline]
    fn push_carry(&mut self, xi: Mono, x: Mono, eps: u8, m: u16, q: u16, c: Gauss) {
        if eps < 2 {
            self.push(Key { xi, x, eps, m, q }, c);
        } else if m > 0 {
            self.push(Key { xi, x, eps: 0, m: m - 1, q }, c);
        } else {
            let ctx = self.ctx.clone();
            let budget = self.order as i64 - x.degree() as i64;
            for (qxi, qx, qc) in &ctx.q_poly {
                if qx.degree() as i64 > budget {
                    break;
                }
                self.push(Key { xi: xi.mul(*qxi), x: x.mul(*qx), eps: 0, m: 0, q }, &c * qc);
            }
        }
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.terms.keys().map(Key::degree).max()
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.terms.keys().map(Key::degree).min()
    }

    pub fn add(&self, other: &Symbol) -> Symbol {
        let mut out = self.truncate(self.order.min(other.order));
        for (k, c) in &other.terms {
            out.push(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Symbol) -> Symbol {
        let mut out = self.truncate(self.order.min(other.order));
        for (k, c) in &other.terms {
            out.push(*k, -c);
        }
        out
    }

    pub fn add_assign(&mut self, other: &Symbol) {
        if other.order < self.order {
            *self = self.truncate(other.order);
        }
        for (k, c) in &other.terms {
            self.push(*k, c.clone());
        }
    }

    pub fn neg(&self) -> Symbol {
        self.scale(&Gauss::from_int(-1))
    }

    pub fn scale(&self, c: &Gauss) -> Symbol {
        let mut out = Symbol::zero(&self.ctx, self.order);
        for (k, v) in &self.terms {
            out.push(*k, v * c);
        }
        out
    }

    pub fn truncate(&self, order: i32) -> Symbol {
        let order = order.min(self.order);
        Symbol {
            ctx: self.ctx.clone(),
            order,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| (k.x.degree() as i64) <= order as i64)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Symbol) -> Symbol {
        self.mul_capped(other, EXACT, i32::MIN)
    }

    /// Product truncated to x-order `cap`, keeping only parametric degrees
    /// `≥ min_degree`.
    pub fn mul_capped(&self, other: &Symbol, cap: i32, min_degree: i32) -> Symbol {
        let order = self.order.min(other.order).min(cap);
        let mut out = Symbol::zero(&self.ctx, order);
        if self.terms.is_empty() || other.terms.is_empty() {
            return out;
        }
        let mut rhs: Vec<(&Key, &Gauss, u32, i32)> =
            other.terms.iter().map(|(k, c)| (k, c, k.x.degree(), k.degree())).collect();
        rhs.sort_unstable_by_key(|t| t.2);
        for (ka, ca) in &self.terms {
            let da = ka.x.degree() as i64;
            if da > order as i64 {
                continue;
            }
            let dga = ka.degree();
            for (kb, cb, dxb, dgb) in &rhs {
                if da + *dxb as i64 > order as i64 {
                    break;
                }
                if dga + dgb < min_degree {
                    continue;
                }
                out.push_carry(
                    ka.xi.mul(kb.xi),
                    ka.x.mul(kb.x),
                    ka.eps + kb.eps,
                    ka.m + kb.m,
                    ka.q + kb.q,
                    ca * *cb,
                );
            }
        }
        out
    }

    /// `∂/∂ξ_α`
    pub fn diff_xi(&self, alpha: usize) -> Symbol {
        let ctx = self.ctx.clone();
        let mut out = Symbol::zero(&ctx, self.order);
        for (k, c) in &self.terms {
            if let Some(r) = k.xi.div_var(alpha) {
                out.push(Key { xi: r, ..*k }, c.scale(&Rational::from_int(k.xi.get(alpha) as i64)));
            }
            let e = k.eps as i64 - 2 * k.m as i64;
            let budget = self.order as i64 - k.x.degree() as i64;
            if e != 0 {
                let cc = c.scale(&Rational::from_int(e));
                for (gxi, gx, gc) in &ctx.g_xi[alpha] {
                    if gx.degree() as i64 > budget {
                        break;
                    }
                    out.push_carry(k.xi.mul(*gxi), k.x.mul(*gx), k.eps, k.m + 1, k.q, &cc * gc);
                }
            }
            if k.q > 0 {
                let cc = c.scale(&Rational::from_int(-(k.q as i64)));
                for (gxi, gx, gc) in &ctx.g_xi[alpha] {
                    if gx.degree() as i64 > budget {
                        break;
                    }
                    out.push_carry(k.xi.mul(*gxi), k.x.mul(*gx), k.eps + 1, k.m + 1, k.q + 1, &cc * gc);
                }
            }
        }
        out
    }

    /// `∂/∂x_i`; the known order drops by one.
    pub fn diff_x(&self, i: usize) -> Result<Symbol, SymbolError> {
        if self.order == 0 && !self.terms.is_empty() {
            return Err(SymbolError::JetExhausted);
        }
        let ctx = self.ctx.clone();
        let mut out = Symbol::zero(&ctx, if self.order == 0 { 0 } else { sub_order(self.order, 1) });
        for (k, c) in &self.terms {
            if let Some(r) = k.x.div_var(i) {
                out.push(Key { x: r, ..*k }, c.scale(&Rational::from_int(k.x.get(i) as i64)));
            }
            let e = Rational::new(k.eps as i64 - 2 * k.m as i64, 2);
            let budget = out.order as i64 - k.x.degree() as i64;
            if !e.is_zero() {
                let cc = c.scale(&e);
                for (qxi, qx, qc) in &ctx.d_q[i] {
                    if qx.degree() as i64 > budget {
                        break;
                    }
                    out.push_carry(k.xi.mul(*qxi), k.x.mul(*qx), k.eps, k.m + 1, k.q, &cc * qc);
                }
            }
            if k.q > 0 {
                let cc = c.scale(&Rational::new(-(k.q as i64), 2));
                for (qxi, qx, qc) in &ctx.d_q[i] {
                    if qx.degree() as i64 > budget {
                        break;
                    }
                    out.push_carry(k.xi.mul(*qxi), k.x.mul(*qx), k.eps + 1, k.m + 1, k.q + 1, &cc * qc);
                }
            }
        }
        Ok(out)
    }

    /// `Σ_{|J| = len} ((−i)^{|J|}/J!) ∂_ξ^J f · ∂_x^J g` over tangential `J`,
    /// truncated to x-order `cap` and parametric degree `≥ min_degree`.
    pub fn compose_level(
        f: &Symbol,
        g: &Symbol,
        len: usize,
        cap: i32,
        min_degree: i32,
    ) -> Result<Symbol, SymbolError> {
        if !Arc::ptr_eq(&f.ctx, &g.ctx) {
            return Err(SymbolError::ContextMismatch);
        }
        let d = f.ctx.dim_xi();
        let mut out = Symbol::zero(&f.ctx, f.order.min(cap));
        if f.is_empty() || g.is_empty() {
            return Ok(out);
        }
        let f = &f.truncate(cap);
        let g = &g.truncate(cap.saturating_add(len as i32));
        let mut counts = vec![0u32; d];
        #[allow(clippy::too_many_arguments)]
        fn rec(
            start: usize,
            left: usize,
            fj: &Symbol,
            gj: &Symbol,
            inv_fact: Rational,
            counts: &mut Vec<u32>,
            out: &mut Symbol,
            cap: i32,
            min_degree: i32,
        ) -> Result<(), SymbolError> {
            if fj.is_empty() {
                return Ok(());
            }
            if left == 0 {
                let prod = fj.mul_capped(gj, cap, min_degree);
                out.add_assign(&prod.scale(&Gauss::real(inv_fact)));
                return Ok(());
            }
            for a in start..counts.len() {
                let f2 = fj.diff_xi(a);
                if f2.is_empty() {
                    continue;
                }
                let g2 = gj.diff_x(a)?;
                counts[a] += 1;
                let fact = &inv_fact / &Rational::from_int(counts[a] as i64);
                rec(a, left - 1, &f2, &g2, fact, counts, out, cap, min_degree)?;
                counts[a] -= 1;
            }
            Ok(())
        }
        rec(0, len, f, g, Rational::one(), &mut counts, &mut out, cap, min_degree)?;
        Ok(out.scale(&Gauss::neg_i_pow(len)))
    }

    /// Left-quantised composition `Σ_J ((−i)^{|J|}/J!) ∂_ξ^J f ∂_x^J g`,
    /// keeping parametric degrees `≥ lowest_degree`.
    pub fn compose(f: &Symbol, g: &Symbol, lowest_degree: i32) -> Result<Symbol, SymbolError> {
        let (Some(fmax), Some(gmax)) = (f.max_degree(), g.max_degree()) else {
            return Ok(Symbol::zero(&f.ctx, f.order.min(g.order)));
        };
        let top = fmax + gmax - lowest_degree;
        let mut out = Symbol::zero(&f.ctx, f.order.min(g.order));
        for len in 0..=top.max(-1) {
            let level = Symbol::compose_level(f, g, len as usize, EXACT, lowest_degree)?;
            out.add_assign(&level);
        }
        Ok(out)
    }

    /// Terms of parametric degree exactly `d`.
    pub fn homogeneous_part(&self, d: i32) -> Symbol {
        Symbol {
            ctx: self.ctx.clone(),
            order: self.order,
            terms: self.terms.iter().filter(|(k, _)| k.degree() == d).map(|(k, c)| (*k, c.clone())).collect(),
        }
    }

    /// Value at the base point: only constant jet coefficients survive.
    pub fn eval_x0(&self) -> Symbol {
        self.truncate(0)
    }

    /// Zero as a function, taking `w₁² = Q` into account.
    pub fn is_zero_mod_q(&self) -> bool {
        if self.terms.is_empty() {
            return true;
        }
        let big_m = self.terms.keys().map(|k| k.m).max().unwrap_or(0);
        let mut powers: Vec<XiPoly> = vec![vec![(Mono::ONE, Mono::ONE, Gauss::from_int(1))]];
        for p in 1..=big_m as usize {
            let next = self.times_q_poly(&powers[p - 1]);
            powers.push(next);
        }
        let mut acc: FxHashMap<(Mono, Mono, u8, u16), Gauss> = FxHashMap::default();
        for (k, c) in &self.terms {
            for (pxi, px, pc) in &powers[(big_m - k.m) as usize] {
                let x = k.x.mul(*px);
                if (x.degree() as i64) > self.order as i64 {
                    continue;
                }
                *acc.entry((k.xi.mul(*pxi), x, k.eps, k.q)).or_default() += &(c * pc);
            }
        }
        acc.values().all(Gauss::is_zero)
    }

    pub fn sorted_terms(&self) -> Vec<(Key, &Gauss)> {
        let mut v: Vec<(Key, &Gauss)> = self.terms.iter().map(|(k, c)| (*k, c)).collect();
        v.sort_by(|(a, _), (b, _)| {
            b.degree().cmp(&a.degree()).then_with(|| {
                (a.xi.exps(MAXV), a.eps, a.m, a.q, a.x.exps(MAXV)).cmp(&(b.xi.exps(MAXV), b.eps, b.m, b.q, b.x.exps(MAXV)))
            })
        });
        v
    }

    /// One line per term: `coeff * x^μ * xi^β * w1^ε * Q^-m * s^q`, ordered
    /// by degree (descending), then `β, ε, m, q, μ`.
    pub fn dump(&self) -> String {
        let n = self.ctx.n;
        let mut out = String::new();
        for (k, c) in self.sorted_terms() {
            let _ = writeln!(
                out,
                "({c}) * x^[{}] * xi^[{}] * w1^{} * Q^-{} * s^{}",
                k.x.key(n),
                k.xi.key(n - 1),
                k.eps,
                k.m,
                k.q
            );
        }
        out
    }
}

const MAXV: usize = crate::jet::MAX_VARS;
