//! Symbols of the factorisation `−L = (∂_n + B − W)(∂_n + W)`, of the
//! Dirichlet-to-Neumann map `W − iA_n`, and of its resolvent parametrix.
//!
//! Truncation bookkeeping: to evaluate `a_K` at the base point the metric is
//! needed to order `K`. Then `w_j` is needed to x-order `j + K − 1` and the
//! resolvent term `s_{−1−m}` to x-order `K − m`, which is what the recursions
//! below keep.

use std::sync::Arc;

use thiserror::Error;

use crate::exact::Gauss;
use crate::geometry::{validate_jet, GeometryError, GeometryJet};
use crate::jet::{invert_near_identity, Jet};
use crate::symbol::{SymCtx, Symbol, SymbolError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DtnError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("depth {depth} needs jet_order >= {needed}")]
    OrderTooLow { depth: usize, needed: u32 },
    #[error("ladder does not reach degree {0}")]
    MissingDegree(i32),
    #[error("closed form disagrees with the recursion at degree {0}")]
    ClosedFormMismatch(i32),
}

/// `b`, `c₂`, `c₁`, `c₀` of `−L = ∂_n² + B ∂_n + C`, plus `A_n`.
#[derive(Clone, Debug)]
pub struct OperatorSymbols {
    pub ctx: Arc<SymCtx>,
    pub b: Symbol,
    pub c2: Symbol,
    pub c1: Symbol,
    pub c0: Symbol,
    pub a_n: Symbol,
}

/// Homogeneous symbols indexed by degree, contiguous from `top` downward.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolLadder {
    pub top: i32,
    pub entries: Vec<Symbol>,
}

impl SymbolLadder {
    pub fn get(&self, degree: i32) -> Option<&Symbol> {
        let i = self.top - degree;
        if i < 0 {
            return None;
        }
        self.entries.get(i as usize)
    }

    pub fn bottom(&self) -> i32 {
        self.top - self.entries.len() as i32 + 1
    }

    fn at(&self, degree: i32) -> Result<&Symbol, DtnError> {
        self.get(degree).ok_or(DtnError::MissingDegree(degree))
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        (self.bottom()..=self.top).rev()
    }

    /// Text dump, one block per degree.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for d in self.degrees() {
            let s = self.get(d).expect("in range");
            out.push_str(&format!("# degree {d} (order {})\n", s.order));
            out.push_str(&s.dump());
        }
        out
    }
}

/// Symbol context of a jet: metric inverse of the tangential block.
pub fn context_for(jet: &GeometryJet) -> Arc<SymCtx> {
    SymCtx::from_inverse_metric(jet.n, &jet.inverse_tangential())
}

pub fn operator_symbols(jet: &GeometryJet) -> Result<OperatorSymbols, DtnError> {
    validate_jet(jet)?;
    let ctx = context_for(jet);
    operator_symbols_in(jet, &ctx)
}

fn operator_symbols_in(jet: &GeometryJet, ctx: &Arc<SymCtx>) -> Result<OperatorSymbols, DtnError> {
    let n = jet.n;
    let d = n - 1;
    let nn = n - 1;
    let o = jet.jet_order;
    let o1 = o.saturating_sub(1);
    let ginv = invert_near_identity(&jet.g);
    let half = Gauss::frac(1, 2);
    let i = Gauss::i();
    // L_l = Σ g^{γρ} ∂_l g_{γρ} = ∂_l log det g
    let log_det: Vec<Jet> = (0..n)
        .map(|l| {
            let mut acc = Jet::zero(n, o1);
            for a in 0..d {
                for b in 0..d {
                    acc = acc.add(&ginv[a][b].mul(&jet.g[a][b].diff(l)));
                }
            }
            acc
        })
        .collect();
    let a_n = Symbol::from_jet(ctx, &jet.a[nn]);
    let b = Symbol::from_jet(ctx, &log_det[nn].scale(&half)).add(&a_n.scale(&Gauss::from_int(2)).scale(&i));
    let c2 = Symbol::q_poly(ctx).neg();
    let mut c1 = Symbol::zero(ctx, o1 as i32);
    for beta in 0..d {
        let mut coeff = Jet::zero(n, o1);
        for alpha in 0..d {
            coeff = coeff.add(&ginv[alpha][beta].diff(alpha)).add(&ginv[alpha][beta].mul(&log_det[alpha]).scale(&half));
        }
        let xi = Symbol::xi(ctx, beta);
        c1 = c1.add(&Symbol::from_jet(ctx, &coeff).scale(&i).mul(&xi));
        c1 = c1.sub(&Symbol::from_jet(ctx, &jet.a[beta]).scale(&Gauss::from_int(2)).mul(&xi));
    }
    // V = Σ g_jk A_j A_k − i (Σ ∂_j A_j + ½ Σ L_l A_l) + q − k²
    let full = jet.full_metric();
    let oa = jet.a[0].order;
    let mut v = Jet::zero(n, oa);
    for j in 0..n {
        for k in 0..n {
            v = v.add(&full[j][k].mul(&jet.a[j]).mul(&jet.a[k]));
        }
    }
    let mut div = Jet::zero(n, oa.saturating_sub(1));
    for l in 0..n {
        div = div.add(&jet.a[l].diff(l)).add(&log_det[l].mul(&jet.a[l]).scale(&half));
    }
    v = v.sub(&div.scale(&i)).add(&jet.q);
    v.add_term(crate::jet::Mono::ONE, &Gauss::real(-&(&jet.k * &jet.k)));
    let c0 = Symbol::from_jet(ctx, &v).neg();
    Ok(OperatorSymbols { ctx: ctx.clone(), b, c2, c1, c0, a_n })
}

fn k_of(ops: &OperatorSymbols) -> i32 {
    ops.ctx.g_order
}

/// `w₁, w₀, …, w_{2−depth}` from the degree-by-degree solution of the
/// factorisation equation.
pub fn w_recursion(ops: &OperatorSymbols, depth: usize) -> Result<SymbolLadder, DtnError> {
    assert!(depth >= 1);
    let ctx = &ops.ctx;
    let kk = k_of(ops);
    let lowest = 2 - depth as i32;
    if lowest + kk - 1 < 0 {
        return Err(DtnError::OrderTooLow { depth, needed: (1 - lowest) as u32 });
    }
    let mut ladder = SymbolLadder { top: 1, entries: vec![Symbol::w1(ctx)] };
    let inv = Symbol::inv_two_w1(ctx);
    for j in ((lowest + 1)..=1).rev() {
        let cap = j + kk - 2;
        let mut r = Symbol::zero(ctx, cap);
        for a in j..=1 {
            for b in j..=1 {
                let len = a + b - j;
                if len < 0 {
                    continue;
                }
                r.add_assign(&Symbol::compose_level(ladder.at(a)?, ladder.at(b)?, len as usize, cap, i32::MIN)?);
            }
        }
        let wj = ladder.at(j)?;
        r = r.sub(&ops.b.mul_capped(wj, cap, i32::MIN));
        r = r.sub(&wj.diff_x(ctx.n - 1)?);
        match j {
            1 => r = r.add(&ops.c1),
            0 => r = r.add(&ops.c0),
            _ => {}
        }
        let next = inv.mul_capped(&r.truncate(cap), cap, i32::MIN).neg();
        ladder.entries.push(next);
    }
    Ok(ladder)
}

/// Full symbol of the Dirichlet-to-Neumann map: `w₀` is shifted by `−iA_n`.
pub fn dtn_full_symbol(ops: &OperatorSymbols, w: &SymbolLadder) -> SymbolLadder {
    let mut out = w.clone();
    if let Some(idx) = (w.top - 0).try_into().ok().filter(|&i: &usize| i < w.entries.len()) {
        out.entries[idx] = w.entries[idx].sub(&ops.a_n.scale(&Gauss::i()));
    }
    out
}

/// `s₋₁, s₋₂, …, s_{−depth}` of the parametrix of `σ(M) − τ`.
pub fn resolvent_symbols(sigma: &SymbolLadder, depth: usize) -> Result<SymbolLadder, DtnError> {
    assert!(depth >= 1);
    let w1 = sigma.at(1)?;
    let ctx = w1.ctx().clone();
    let kk = ctx.g_order;
    let s1 = Symbol::s(&ctx);
    let mut ladder = SymbolLadder { top: -1, entries: vec![s1.clone()] };
    for m in 1..depth as i32 {
        let cap = kk - m;
        if cap < 0 {
            return Err(DtnError::OrderTooLow { depth, needed: m as u32 });
        }
        let mut t = Symbol::zero(&ctx, cap);
        for j in (1 - m)..=1 {
            for k in -m..=-1 {
                let len = j + k + m;
                if len < 0 {
                    continue;
                }
                t.add_assign(&Symbol::compose_level(sigma.at(j)?, ladder.at(k)?, len as usize, cap, i32::MIN)?);
            }
        }
        ladder.entries.push(s1.mul_capped(&t, cap, i32::MIN).neg());
    }
    Ok(ladder)
}

/// Homogeneous parts of the factorisation equation
/// `Σ_J ((−i)^{|J|}/J!) ∂_ξ^J w ∂_x^J w − b w − ∂_n w + c`
/// for every degree the ladder determines completely.
pub fn factorization_residual(ops: &OperatorSymbols, w: &SymbolLadder) -> Result<Vec<(i32, Symbol)>, DtnError> {
    let ctx = &ops.ctx;
    let mut out = Vec::new();
    for d in ((w.bottom() + 1)..=2).rev() {
        // the equation at degree d is determined to x-order d + K − 2
        let cap = if ctx.g_order == crate::symbol::EXACT { ctx.g_order } else { (d + ctx.g_order - 2).max(0) };
        let mut r = Symbol::zero(ctx, cap);
        for a in w.degrees() {
            for b in w.degrees() {
                let len = a + b - d;
                if len < 0 {
                    continue;
                }
                r.add_assign(&Symbol::compose_level(w.at(a)?, w.at(b)?, len as usize, cap, d)?);
            }
        }
        if let Some(wd) = w.get(d) {
            r = r.sub(&ops.b.mul(wd)).sub(&wd.diff_x(ctx.n - 1)?);
        }
        match d {
            2 => r = r.add(&ops.c2),
            1 => r = r.add(&ops.c1),
            0 => r = r.add(&ops.c0),
            _ => {}
        }
        out.push((d, r.homogeneous_part(d)));
    }
    Ok(out)
}

/// Homogeneous parts of `s₋₁ · ((σ − τ) ∘ s − 1)`, labelled by the degree
/// of `(σ − τ) ∘ s − 1`, for every degree the two ladders determine completely.
pub fn parametrix_defect(sigma: &SymbolLadder, s: &SymbolLadder) -> Result<Vec<(i32, Symbol)>, DtnError> {
    let w1 = sigma.at(1)?;
    let ctx = w1.ctx().clone();
    let lowest = (sigma.bottom() - 1).max(s.bottom() + 1);
    let mut out = Vec::new();
    for d in (lowest..=0).rev() {
        let mut r = Symbol::zero(&ctx, crate::symbol::EXACT);
        for j in sigma.degrees() {
            for k in s.degrees() {
                let len = j + k - d;
                if len < 0 {
                    continue;
                }
                r.add_assign(&Symbol::compose_level(sigma.at(j)?, s.at(k)?, len as usize, crate::symbol::EXACT, d)?);
            }
        }
        // multiplied through by s₋₁ so that τ = w₁ − s₋₁^{-1} stays polynomial
        let s1 = Symbol::s(&ctx);
        r = s1.mul(&r.homogeneous_part(d));
        if let Some(sk) = s.get(d - 1) {
            r = r.sub(&w1.mul(&s1).mul(sk)).add(sk);
        }
        if d == 0 {
            r = r.sub(&s1);
        }
        out.push((d, r.homogeneous_part(d - 1)));
    }
    Ok(out)
}

/// Transcribed closed forms for `w₀, w₋₁, w₋₂` and `s₋₂, s₋₃, s₋₄`, used as
/// an independent check on the recursions.
pub mod closed_forms {
    use super::*;

    fn sum_level(f: &Symbol, g: &Symbol, len: usize) -> Result<Symbol, DtnError> {
        // Σ over ordered index tuples of ∂_ξ f ∂_x g, without the (−i)^k/k! weight.
        let d = f.ctx().dim_xi();
        let mut acc = Symbol::zero(f.ctx(), crate::symbol::EXACT);
        let mut stack = vec![(f.clone(), g.clone(), 0usize)];
        while let Some((fj, gj, depth)) = stack.pop() {
            if depth == len {
                acc.add_assign(&fj.mul(&gj));
                continue;
            }
            for a in 0..d {
                stack.push((fj.diff_xi(a), gj.diff_x(a)?, depth + 1));
            }
        }
        Ok(acc)
    }

    fn s1(f: &Symbol, g: &Symbol) -> Result<Symbol, DtnError> {
        sum_level(f, g, 1)
    }

    fn s2(f: &Symbol, g: &Symbol) -> Result<Symbol, DtnError> {
        sum_level(f, g, 2)
    }

    fn s3(f: &Symbol, g: &Symbol) -> Result<Symbol, DtnError> {
        sum_level(f, g, 3)
    }

    fn c(re: i64, im: i64, den: i64) -> Gauss {
        Gauss::new(crate::exact::Rational::new(re, den), crate::exact::Rational::new(im, den))
    }

    /// `[w₀, w₋₁, w₋₂]`
    pub fn w_closed(ops: &OperatorSymbols) -> Result<Vec<Symbol>, DtnError> {
        let ctx = &ops.ctx;
        let n = ctx.n - 1;
        let w1 = Symbol::w1(ctx);
        let inv = Symbol::inv_two_w1(ctx);
        let i = Gauss::i();
        let w0 = inv.mul(
            &s1(&w1, &w1)?.scale(&i).add(&ops.b.mul(&w1)).add(&w1.diff_x(n)?).sub(&ops.c1),
        );
        let wm1 = inv.mul(
            &w0.mul(&w0)
                .neg()
                .add(&s1(&w1, &w0)?.add(&s1(&w0, &w1)?).scale(&i))
                .add(&s2(&w1, &w1)?.scale(&c(1, 0, 2)))
                .add(&ops.b.mul(&w0))
                .add(&w0.diff_x(n)?)
                .sub(&ops.c0),
        );
        let wm2 = inv.mul(
            &w0.mul(&wm1)
                .scale(&Gauss::from_int(-2))
                .add(&s1(&w1, &wm1)?.add(&s1(&w0, &w0)?).add(&s1(&wm1, &w1)?).scale(&i))
                .add(&s2(&w1, &w0)?.add(&s2(&w0, &w1)?).scale(&c(1, 0, 2)))
                .add(&s3(&w1, &w1)?.scale(&c(0, -1, 6)))
                .add(&ops.b.mul(&wm1))
                .add(&wm1.diff_x(n)?),
        );
        Ok(vec![w0, wm1, wm2])
    }

    /// `[s₋₂, s₋₃, s₋₄]` from the ladder `σ₁ … σ₋₂`.
    pub fn s_closed(sigma: &SymbolLadder) -> Result<Vec<Symbol>, DtnError> {
        let w1 = sigma.at(1)?;
        let sg0 = sigma.at(0)?;
        let wm1 = sigma.at(-1)?;
        let wm2 = sigma.at(-2)?;
        let ctx = w1.ctx().clone();
        let s = Symbol::s(&ctx);
        let i = Gauss::i();
        let half = c(1, 0, 2);
        let sm2 = s.mul(&sg0.mul(&s).sub(&s1(w1, &s)?.scale(&i))).neg();
        let sm3 = s
            .mul(
                &sg0.mul(&sm2)
                    .add(&wm1.mul(&s))
                    .sub(&s1(w1, &sm2)?.add(&s1(sg0, &s)?).scale(&i))
                    .sub(&s2(w1, &s)?.scale(&half)),
            )
            .neg();
        let sm4 = s
            .mul(
                &sg0.mul(&sm3)
                    .add(&wm1.mul(&sm2))
                    .add(&wm2.mul(&s))
                    .sub(&s1(w1, &sm3)?.add(&s1(sg0, &sm2)?).add(&s1(wm1, &s)?).scale(&i))
                    .sub(&s2(w1, &sm2)?.add(&s2(sg0, &s)?).scale(&half))
                    .add(&s3(w1, &s)?.scale(&c(0, 1, 6))),
            )
            .neg();
        Ok(vec![sm2, sm3, sm4])
    }
}

/// Compares the recursion ladders against the closed forms; the ladders must
/// reach `w₋₂` and `s₋₄`.
pub fn check_closed_forms(ops: &OperatorSymbols, w: &SymbolLadder, s: &SymbolLadder, sigma: &SymbolLadder) -> Result<(), DtnError> {
    let wc = closed_forms::w_closed(ops)?;
    for (idx, d) in [0, -1, -2].into_iter().enumerate() {
        let rec = w.at(d)?;
        if !rec.sub(&wc[idx]).truncate(rec.order).is_zero_mod_q() {
            return Err(DtnError::ClosedFormMismatch(d));
        }
    }
    let sc = closed_forms::s_closed(sigma)?;
    for (idx, d) in [-2, -3, -4].into_iter().enumerate() {
        let rec = s.at(d)?;
        if !rec.sub(&sc[idx]).truncate(rec.order).is_zero_mod_q() {
            return Err(DtnError::ClosedFormMismatch(d));
        }
    }
    Ok(())
}

/// Everything the heat coefficients need, for one jet.
#[derive(Clone, Debug)]
pub struct DtnPipeline {
    pub ops: OperatorSymbols,
    pub w: SymbolLadder,
    pub sigma: SymbolLadder,
    pub s: SymbolLadder,
}

/// Runs the full chain for `a_0 … a_{k_max}`: truncates the jet to order
/// `k_max`, then builds `w` and `s` ladders of depth `k_max + 1`.
pub fn pipeline(jet: &GeometryJet, k_max: usize) -> Result<DtnPipeline, DtnError> {
    validate_jet(jet)?;
    if (jet.jet_order as usize) < k_max {
        return Err(DtnError::OrderTooLow { depth: k_max + 1, needed: k_max as u32 });
    }
    let jet = jet.truncated(k_max as u32);
    let ctx = context_for(&jet);
    let ops = operator_symbols_in(&jet, &ctx)?;
    let w = w_recursion(&ops, k_max + 1)?;
    let sigma = dtn_full_symbol(&ops, &w);
    let s = resolvent_symbols(&sigma, k_max + 1)?;
    Ok(DtnPipeline { ops, w, sigma, s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Rational;
    use crate::geometry::{random_jet, RandomJetOptions};
    use crate::jet::Mono;
    use crate::symbol::RawTerm;

    fn full() -> RandomJetOptions {
        RandomJetOptions { with_a: true, with_q: true }
    }

    #[test]
    fn flat_half_space() {
        let jet = GeometryJet::flat(4, 3).unwrap();
        let p = pipeline(&jet, 3).unwrap();
        assert!(p.ops.b.is_zero() && p.ops.c1.is_zero() && p.ops.c0.is_zero());
        for d in [0, -1, -2] {
            assert!(p.w.get(d).unwrap().is_zero(), "w_{d}");
        }
        for d in [-2, -3, -4] {
            assert!(p.s.get(d).unwrap().is_zero(), "s_{d}");
        }
        assert_eq!(p.sigma.get(1).unwrap(), &Symbol::w1(&p.ops.ctx));
        for (d, r) in factorization_residual(&p.ops, &p.w).unwrap() {
            assert!(r.is_zero_mod_q(), "degree {d}");
        }
    }

    #[test]
    fn operator_symbols_at_base_point() {
        let jet = random_jet(4, 3, 2, full());
        let ops = operator_symbols(&jet).unwrap();
        let h: Rational = jet.kappa.iter().fold(Rational::zero(), |s, k| &s + k);
        let expect_b = Gauss::new(-h, Rational::zero()).add_i(&jet.a[3].value().scale(&Rational::from_int(2)));
        let b0 = ops.b.eval_x0();
        assert_eq!(b0.len(), 1);
        assert_eq!(b0.terms().next().unwrap().1, &expect_b);
        let mut expect_c1 = Symbol::zero(&ops.ctx, 0);
        for a in 0..3 {
            let t = Symbol::xi(&ops.ctx, a).scale(&jet.a[a].value().scale(&Rational::from_int(-2)));
            expect_c1 = expect_c1.add(&t);
        }
        assert_eq!(ops.c1.eval_x0(), expect_c1);
        assert_eq!(ops.c2, Symbol::q_poly(&ops.ctx).neg());
    }

    trait AddI {
        fn add_i(self, im: &Gauss) -> Gauss;
    }
    impl AddI for Gauss {
        fn add_i(self, im: &Gauss) -> Gauss {
            &self + &(im * &Gauss::i())
        }
    }

    #[test]
    fn w0_at_base_point() {
        // w₀ − iA_n = ½ w₁^{-2} Σ κ_α ξ_α² − ½ H + w₁^{-1} Σ A_α ξ_α
        let jet = random_jet(4, 3, 3, full());
        let p = pipeline(&jet, 3).unwrap();
        let ctx = &p.ops.ctx;
        let mut raw = Vec::new();
        let h: Rational = jet.kappa.iter().fold(Rational::zero(), |s, k| &s + k);
        for a in 0..3 {
            raw.push(RawTerm {
                coeff: Gauss::real(&jet.kappa[a] * &Rational::new(1, 2)),
                xi: Mono::var(a).mul(Mono::var(a)),
                x: Mono::ONE,
                w1_pow: -2,
                s_pow: 0,
            });
            raw.push(RawTerm { coeff: jet.a[a].value(), xi: Mono::var(a), x: Mono::ONE, w1_pow: -1, s_pow: 0 });
        }
        raw.push(RawTerm { coeff: Gauss::real(&h * &Rational::new(-1, 2)), xi: Mono::ONE, x: Mono::ONE, w1_pow: 0, s_pow: 0 });
        let expect = Symbol::normalize(ctx, 0, &raw);
        let got = p.sigma.get(0).unwrap().eval_x0();
        assert!(got.sub(&expect).is_zero_mod_q(), "{got:?}");
    }

    #[test]
    fn s2_at_base_point() {
        let jet = random_jet(3, 2, 4, full());
        let p = pipeline(&jet, 2).unwrap();
        let ctx = &p.ops.ctx;
        let s = Symbol::s(ctx);
        let expect = s.mul(&s).mul(p.sigma.get(0).unwrap()).neg().eval_x0();
        assert!(p.s.get(-2).unwrap().eval_x0().sub(&expect).is_zero_mod_q());
    }

    #[test]
    fn recursion_matches_closed_forms() {
        for (n, seed) in [(3, 1), (4, 2), (4, 5)] {
            let jet = random_jet(n, 3, seed, full());
            let p = pipeline(&jet, 3).unwrap();
            check_closed_forms(&p.ops, &p.w, &p.s, &p.sigma).unwrap();
        }
    }

    #[test]
    fn homogeneity() {
        let jet = random_jet(4, 3, 8, full());
        let p = pipeline(&jet, 3).unwrap();
        for lad in [&p.w, &p.s] {
            for d in lad.degrees() {
                assert!(lad.get(d).unwrap().terms().all(|(k, _)| k.degree() == d), "degree {d}");
            }
        }
    }

    #[test]
    fn residual_and_tampering() {
        let jet = random_jet(4, 4, 6, full());
        let ctx = context_for(&jet);
        let ops = operator_symbols(&jet).unwrap();
        let w = w_recursion(&ops, 5).unwrap();
        let res = factorization_residual(&ops, &w).unwrap();
        assert_eq!(res.iter().map(|r| r.0).collect::<Vec<_>>(), vec![2, 1, 0, -1, -2]);
        for (d, r) in &res {
            assert!(r.is_zero_mod_q(), "degree {d}");
        }
        let mut bad = w.clone();
        bad.entries[1] = bad.entries[1].add(&Symbol::one(&ctx));
        let res = factorization_residual(&ops, &bad).unwrap();
        assert!(res.iter().find(|r| r.0 == 2).unwrap().1.is_zero_mod_q());
        assert!(!res.iter().find(|r| r.0 == 1).unwrap().1.is_zero_mod_q());
    }

    #[test]
    fn parametrix_property() {
        let jet = random_jet(4, 3, 10, full());
        let p = pipeline(&jet, 3).unwrap();
        let defect = parametrix_defect(&p.sigma, &p.s).unwrap();
        assert_eq!(defect.iter().map(|r| r.0).collect::<Vec<_>>(), vec![0, -1, -2, -3]);
        for (d, r) in &defect {
            assert!(r.is_zero_mod_q(), "degree {d}");
        }
    }

    #[test]
    fn reality_without_magnetic_potential() {
        let jet = random_jet(4, 3, 12, RandomJetOptions { with_a: false, with_q: true });
        let p = pipeline(&jet, 3).unwrap();
        assert!(p.w.get(1).unwrap().terms().all(|(_, c)| c.is_real()));
        let w0 = p.w.get(0).unwrap().eval_x0();
        for (k, c) in w0.terms() {
            if k.xi.is_even() {
                assert!(c.is_real(), "{k:?}");
            }
        }
    }
}
