//! Verification grids comparing engine coefficients with the closed forms,
//! and the machine-readable reports they produce.

use rayon::prelude::*;
use serde::Serialize;

use crate::exact::{Gauss, Rational};
use crate::geometry::{curvature_package, random_jet, CurvatureInvariants, GeometryError, RandomJetOptions};
use crate::heat::{heat_coefficients, GammaTag, HeatError, TaggedValue};
use crate::invariants::{
    alpha, extended_basis, invariant_projection_over, space_form_substitute, theorem_basis, theorem_reference,
    InvariantExpression, ProjectionError,
};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Heat(#[from] HeatError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error("no results")]
    Empty,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VerifyRun {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub k: usize,
    pub engine: String,
    pub reference: String,
    pub equal: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Summary {
    pub total: usize,
    pub equal: usize,
    pub mismatched: usize,
    pub all_equal: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VerifyReport {
    pub config: serde_json::Value,
    pub runs: Vec<VerifyRun>,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn new(config: serde_json::Value, runs: Vec<VerifyRun>) -> Result<Self, VerifyError> {
        if runs.is_empty() {
            return Err(VerifyError::Empty);
        }
        let equal = runs.iter().filter(|r| r.equal).count();
        let summary = Summary { total: runs.len(), equal, mismatched: runs.len() - equal, all_equal: equal == runs.len() };
        Ok(VerifyReport { config, runs, summary })
    }

    pub fn mismatches(&self) -> impl Iterator<Item = &VerifyRun> {
        self.runs.iter().filter(|r| !r.equal)
    }
}

/// Highest `k` with a closed form at dimension `n`.
pub fn max_k_for(n: usize) -> usize {
    (n - 1).min(3)
}

pub fn tagged(coeff: &Gauss, tag: GammaTag) -> String {
    TaggedValue { coeff: coeff.clone(), tag }.to_string()
}

/// Jet used for `(n, seed)` in every grid.
pub fn grid_jet(n: usize, seed: u64) -> crate::geometry::GeometryJet {
    random_jet(n, 3, seed, RandomJetOptions { with_a: true, with_q: true })
}

fn theorem_runs(n: usize, seed: u64, k_max: usize) -> Result<Vec<VerifyRun>, VerifyError> {
    let jet = grid_jet(n, seed);
    let inv = curvature_package(&jet)?;
    let kk = k_max.min(max_k_for(n));
    let engine = heat_coefficients(&jet, kk)?;
    Ok(engine
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let reference = theorem_reference(n, k, false).expect("k within range").evaluate(&inv).expect("order-3 jet");
            VerifyRun {
                n,
                seed: Some(seed),
                k,
                engine: a.to_string(),
                reference: tagged(&reference, a.tag),
                equal: a.coeff == reference,
            }
        })
        .collect())
}

/// Engine `a_k` against the general closed forms on random jets.
pub fn verify_theorem(ns: &[usize], seeds: &[u64], k_max: usize) -> Result<Vec<VerifyRun>, VerifyError> {
    let grid: Vec<(usize, u64)> = ns.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let chunks: Result<Vec<Vec<VerifyRun>>, VerifyError> =
        grid.par_iter().map(|&(n, s)| theorem_runs(n, s, k_max)).collect();
    Ok(chunks?.into_iter().flatten().collect())
}

/// Space-form substitution of the general closed forms against the
/// space-form closed forms.
pub fn verify_corollary(ns: &[usize]) -> Vec<VerifyRun> {
    let mut runs = Vec::new();
    for &n in ns {
        for k in 2..=max_k_for(n) {
            let sub = space_form_substitute(&theorem_reference(n, k, false).expect("in range"));
            let cor = theorem_reference(n, k, true).expect("in range");
            runs.push(VerifyRun {
                n,
                seed: None,
                k,
                engine: sub.to_string(),
                reference: cor.to_string(),
                equal: sub == cor,
            });
        }
    }
    runs
}

/// Replaces the magnetic potential of the grid jet by an unrelated one and
/// compares `a₀ … a_{k_max}`.
pub fn a_independence(n: usize, seed: u64, k_max: usize) -> Result<Vec<VerifyRun>, VerifyError> {
    let jet = grid_jet(n, seed);
    let other = random_jet(n, 3, seed.wrapping_add(0x5eed_0000), RandomJetOptions { with_a: true, with_q: false }).a;
    let swapped = jet.clone().with_a(other);
    let kk = k_max.min(max_k_for(n));
    let a = heat_coefficients(&jet, kk)?;
    let b = heat_coefficients(&swapped, kk)?;
    Ok(a.iter()
        .zip(&b)
        .enumerate()
        .map(|(k, (x, y))| VerifyRun {
            n,
            seed: Some(seed),
            k,
            engine: x.to_string(),
            reference: y.to_string(),
            equal: x == y,
        })
        .collect())
}

/// Exact samples `(invariants, a_k coefficient)` from consecutive seeds.
pub fn engine_samples(
    n: usize,
    k: usize,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<Vec<(CurvatureInvariants, Gauss)>, VerifyError> {
    let seeds: Vec<u64> = seeds.into_iter().collect();
    seeds
        .par_iter()
        .map(|&s| {
            let jet = grid_jet(n, s);
            let inv = curvature_package(&jet)?;
            let a = heat_coefficients(&jet, k)?;
            Ok((inv, a[k].coeff.clone()))
        })
        .collect()
}

/// Engine `a_k` recovered over the extended basis, with two held-out samples.
pub fn recover_expression(n: usize, k: usize, first_seed: u64) -> Result<InvariantExpression, VerifyError> {
    let basis = extended_basis(k);
    let count = basis.len() as u64 + 2;
    let samples = engine_samples(n, k, first_seed..first_seed + count)?;
    Ok(invariant_projection_over(&samples, n, k, &basis)?)
}

/// One row of the `a₃` coefficient table: bracket coefficients scaled by
/// `48(n+3)(n²−1)` so the closed-form entries are the integers `α_i(n)`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AlphaRow {
    pub n: usize,
    pub index: Option<usize>,
    pub invariant: String,
    pub theorem: String,
    pub engine: Option<String>,
}

pub fn alpha_table(n: usize, engine: Option<&InvariantExpression>) -> Vec<AlphaRow> {
    let ni = n as i64;
    let scale = Rational::from_int(48 * (ni + 3) * (ni * ni - 1));
    let mut rows = Vec::new();
    let general = theorem_basis(3);
    for b in extended_basis(3) {
        let index = general.iter().position(|g| *g == b).map(|i| i + 1);
        let theorem = index.map(|i| alpha(i, n).to_string()).unwrap_or_else(|| "0".into());
        rows.push(AlphaRow {
            n,
            index,
            invariant: b.label().to_string(),
            theorem,
            engine: engine.map(|e| (&e.coeff(b) * &scale).to_string()),
        });
    }
    rows
}

pub fn alpha_table_csv(rows: &[AlphaRow]) -> String {
    let mut out = String::from("n,alpha,invariant,theorem,engine\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            r.index.map(|i| i.to_string()).unwrap_or_default(),
            r.invariant,
            r.theorem,
            r.engine.clone().unwrap_or_default()
        ));
    }
    out
}

pub fn alpha_table_text(rows: &[AlphaRow]) -> String {
    let mut out = format!("{:<6} {:<12} {:>14} {:>14}\n", "alpha", "invariant", "theorem", "engine");
    for r in rows {
        out.push_str(&format!(
            "{:<6} {:<12} {:>14} {:>14}\n",
            r.index.map(|i| format!("α{i}")).unwrap_or_else(|| "-".into()),
            r.invariant,
            r.theorem,
            r.engine.clone().unwrap_or_else(|| "-".into())
        ));
    }
    out
}
