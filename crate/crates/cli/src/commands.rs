use std::fmt::Write as _;

use serde_json::{json, Value};

use dtn_heat::exact::Rational;
use dtn_heat::geometry::{ball_jet_with_order, jet_from_json_str, random_jet, RandomJetOptions};
use dtn_heat::heat::heat_coefficients;
use dtn_heat::spectra::{
    fit_asymptotics, fit_json, geometric_grid, integrated_reference, model_spectrum, spectrum_csv, ModelDomain,
};
use dtn_heat::verify::{alpha_table, alpha_table_csv, alpha_table_text, recover_expression, verify_corollary, verify_theorem, VerifyReport};

use crate::args::{
    parse_dimensions, CoeffArgs, Command, Format, JetSource, ReportArgs, SpectrumArgs, TraceFitArgs, VerifyCorollaryArgs,
    VerifyTheoremArgs,
};

/// Rendered output plus whether a verification failed.
pub struct Outcome {
    pub body: String,
    pub mismatch: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, mismatch: false }
    }
}

/// Fit tolerances on `â₀, â₁, â₂` against the closed forms.
pub const FIT_TOLERANCES: [f64; 3] = [1e-6, 1e-4, 1e-3];

pub fn run(cmd: &Command) -> Result<Outcome, String> {
    let config = cmd.echo();
    match cmd {
        Command::Coeff(a) => coeff(a, config),
        Command::VerifyTheorem(a) => verify_thm(a, config),
        Command::VerifyCorollary(a) => verify_cor(a, config),
        Command::Spectrum(a) => spectrum(a, config),
        Command::TraceFit(a) => trace_fit(a, config),
        Command::Report(a) => report(a, config),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn rational(s: &str, what: &str) -> Result<Rational, String> {
    s.parse().map_err(|e| format!("invalid {what} `{s}`: {e}"))
}

fn unsupported(format: Format, command: &str) -> String {
    format!("format {format:?} is not available for {command}").to_lowercase()
}

fn coeff(a: &CoeffArgs, config: Value) -> Result<Outcome, String> {
    let order = (a.k as u32).max(3);
    let jet = match a.jet {
        JetSource::Ball => ball_jet_with_order(a.n, rational(&a.radius, "radius")?, order)
            .map_err(|e| e.to_string())?
            .with_q_const(rational(&a.q, "q")?)
            .with_k(rational(&a.wavenumber, "wavenumber")?),
        JetSource::Random => {
            if a.n < 2 {
                return Err("n must be at least 2".into());
            }
            random_jet(a.n, order, a.seed, RandomJetOptions { with_a: true, with_q: true })
        }
        JetSource::File => {
            let path = a.jet_file.as_ref().ok_or("--jet file needs --jet-file")?;
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            jet_from_json_str(&text).map_err(|e| e.to_string())?
        }
    };
    if matches!(a.jet, JetSource::File) && jet.n != a.n {
        return Err(format!("jet file has n = {}, but --n {} was given", jet.n, a.n));
    }
    let values = heat_coefficients(&jet, a.k).map_err(|e| e.to_string())?;
    let v = values.last().expect("nonempty");
    match a.format {
        Format::Text => Ok(Outcome::ok(format!("a_{}(x) = {}\n", a.k, v))),
        Format::Json => Ok(Outcome::ok(pretty(&json!({
            "config": config,
            "n": a.n,
            "k": a.k,
            "value": v.to_string(),
            "coefficient": v.coeff.to_string(),
            "tag": v.tag.to_string(),
            "numeric": v.to_f64(),
        })))),
        Format::Csv => Err(unsupported(a.format, "coeff")),
    }
}

fn render_report(report: &VerifyReport, format: Format, command: &str) -> Result<Outcome, String> {
    let body = match format {
        Format::Json => pretty(&serde_json::to_value(report).expect("serializable")),
        Format::Text => {
            let s = &report.summary;
            let mut out = format!("{} runs, {} equal, {} mismatched\n", s.total, s.equal, s.mismatched);
            for r in report.mismatches() {
                let seed = r.seed.map(|s| format!(" seed {s}")).unwrap_or_default();
                let _ = writeln!(out, "MISMATCH n {}{seed} k {}\n  engine    {}\n  reference {}", r.n, r.k, r.engine, r.reference);
            }
            out
        }
        Format::Csv => return Err(unsupported(format, command)),
    };
    Ok(Outcome { body, mismatch: !report.summary.all_equal })
}

fn verify_thm(a: &VerifyTheoremArgs, config: Value) -> Result<Outcome, String> {
    let ns = parse_dimensions(&a.n)?;
    if a.seeds == 0 {
        return Err("--seeds must be at least 1".into());
    }
    let seeds: Vec<u64> = (0..a.seeds).collect();
    let runs = verify_theorem(&ns, &seeds, a.k_max).map_err(|e| e.to_string())?;
    let report = VerifyReport::new(config, runs).map_err(|e| e.to_string())?;
    render_report(&report, a.format, "verify-theorem")
}

fn verify_cor(a: &VerifyCorollaryArgs, config: Value) -> Result<Outcome, String> {
    let ns = parse_dimensions(&a.n)?;
    let report = VerifyReport::new(config, verify_corollary(&ns)).map_err(|e| e.to_string())?;
    render_report(&report, a.format, "verify-corollary")
}

fn domain(kind: crate::args::Domain, r: f64, q: f64, k: f64) -> Result<ModelDomain, String> {
    ModelDomain::new(kind.into(), r, q, k).map_err(|e| e.to_string())
}

fn spectrum(a: &SpectrumArgs, config: Value) -> Result<Outcome, String> {
    let spec = model_spectrum(&domain(a.domain, a.r, a.q, a.k)?, a.cutoff).map_err(|e| e.to_string())?;
    match a.format {
        Format::Csv => Ok(Outcome::ok(spectrum_csv(&spec))),
        Format::Json => Ok(Outcome::ok(pretty(&json!({ "config": config, "spectrum": spec })))),
        Format::Text => Err(unsupported(a.format, "spectrum")),
    }
}

fn trace_fit(a: &TraceFitArgs, config: Value) -> Result<Outcome, String> {
    let d = domain(a.domain, a.r, a.q, a.k)?;
    if !(a.t_min > 0.0 && a.t_min < a.t_max) || a.points < 2 {
        return Err("need 0 < t-min < t-max and at least 2 points".into());
    }
    let grid = geometric_grid(a.t_min, a.t_max, a.points);
    let fit = fit_asymptotics(&d, &grid).map_err(|e| e.to_string())?;
    let reference = integrated_reference(&d).map_err(|e| e.to_string())?;
    let within = fit
        .coefficients
        .iter()
        .zip(&reference)
        .zip(FIT_TOLERANCES)
        .all(|((f, r), tol)| (f - r).abs() <= tol);
    match a.format {
        Format::Json => {
            let mut v = fit_json(&fit);
            let obj = v.as_object_mut().expect("object");
            obj.insert("config".into(), config);
            obj.insert("reference".into(), json!(reference));
            obj.insert("within_tolerance".into(), json!(within));
            Ok(Outcome { body: pretty(&v), mismatch: !within })
        }
        Format::Text => {
            let mut out = format!("{:<4} {:>22} {:>22}\n", "k", "fit", "reference");
            for (k, (f, r)) in fit.coefficients.iter().zip(&reference).enumerate() {
                let _ = writeln!(out, "{k:<4} {f:>22.12} {r:>22.12}");
            }
            let _ = writeln!(out, "residual {:e}  log term {:e}  condition {:e}", fit.residual, fit.log_term_diagnostic, fit.condition_number);
            Ok(Outcome { body: out, mismatch: !within })
        }
        Format::Csv => Err(unsupported(a.format, "trace-fit")),
    }
}

fn report(a: &ReportArgs, config: Value) -> Result<Outcome, String> {
    let ns = parse_dimensions(&a.n)?;
    if let Some(n) = ns.iter().find(|&&n| n < 4) {
        return Err(format!("the a_3 table needs n >= 4, got {n}"));
    }
    let mut rows = Vec::new();
    for &n in &ns {
        let engine = if a.no_engine { None } else { Some(recover_expression(n, 3, a.seed).map_err(|e| e.to_string())?) };
        rows.push((n, alpha_table(n, engine.as_ref())));
    }
    match a.format {
        Format::Text => {
            let mut out = String::from("a_3 bracket coefficients scaled by 48(n+3)(n^2-1)\n");
            for (n, r) in &rows {
                let _ = write!(out, "\nn = {n}\n{}", alpha_table_text(r));
            }
            Ok(Outcome::ok(out))
        }
        Format::Csv => {
            let all: Vec<_> = rows.into_iter().flat_map(|(_, r)| r).collect();
            Ok(Outcome::ok(alpha_table_csv(&all)))
        }
        Format::Json => {
            let all: Vec<_> = rows.into_iter().flat_map(|(_, r)| r).collect();
            Ok(Outcome::ok(pretty(&json!({ "config": config, "rows": all }))))
        }
    }
}
