//! Command-line flags and the JSON config file that mirrors them.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use dtn_heat::spectra::DomainKind;

#[derive(Parser, Debug)]
#[command(name = "dtn-heat", version, about = "Heat invariants of the magnetic Dirichlet-to-Neumann map")]
pub struct Cli {
    /// Read the run configuration from a JSON file instead of flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Compute a_k(x) at the origin of a jet.
    Coeff(CoeffArgs),
    /// Compare engine coefficients with the general closed forms on random jets.
    VerifyTheorem(VerifyTheoremArgs),
    /// Compare the space-form substitution with the space-form closed forms.
    VerifyCorollary(VerifyCorollaryArgs),
    /// Exact Steklov spectrum of a disk or ball.
    Spectrum(SpectrumArgs),
    /// Heat trace of a model domain and its small-t coefficient fit.
    TraceFit(TraceFitArgs),
    /// a_3 coefficient table: closed form next to engine-recovered values.
    Report(ReportArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JetSource {
    Ball,
    Random,
    File,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Disk,
    Ball,
}

impl From<Domain> for DomainKind {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Disk => DomainKind::Disk,
            Domain::Ball => DomainKind::Ball,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Output {
    /// Write to this file (atomically) instead of stdout.
    #[arg(long, value_name = "PATH")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CoeffArgs {
    #[arg(long)]
    pub n: usize,
    /// Coefficient index.
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "ball")]
    pub jet: JetSource,
    /// Ball radius, an exact rational such as `3/2`.
    #[arg(long, default_value = "1")]
    pub radius: String,
    /// Constant potential q for the ball jet.
    #[arg(long, default_value = "0")]
    pub q: String,
    /// Constant k (entering as q - k^2) for the ball jet.
    #[arg(long, default_value = "0")]
    pub wavenumber: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Jet document for `--jet file`.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jet_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyTheoremArgs {
    /// Dimensions: `4..8`, `5`, or `4,6,8`.
    #[arg(long, default_value = "4..8")]
    pub n: String,
    /// Number of seeds, starting at 0.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyCorollaryArgs {
    #[arg(long, default_value = "3..10")]
    pub n: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, value_enum)]
    pub domain: Domain,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    #[arg(long, default_value_t = 0.0)]
    pub k: f64,
    /// Highest mode index.
    #[arg(long, default_value_t = 200)]
    pub cutoff: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct TraceFitArgs {
    #[arg(long, value_enum)]
    pub domain: Domain,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    #[arg(long, default_value_t = 0.0)]
    pub k: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub t_min: f64,
    #[arg(long, default_value_t = 0.2)]
    pub t_max: f64,
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    #[arg(long, default_value = "4..6")]
    pub n: String,
    /// Skip recovering the engine column.
    #[arg(long)]
    pub no_engine: bool,
    /// First seed of the recovery samples.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: Output,
}

impl Command {
    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Coeff(a) => a.output.out.as_ref(),
            Command::VerifyTheorem(a) => a.output.out.as_ref(),
            Command::VerifyCorollary(a) => a.output.out.as_ref(),
            Command::Spectrum(a) => a.output.out.as_ref(),
            Command::TraceFit(a) => a.output.out.as_ref(),
            Command::Report(a) => a.output.out.as_ref(),
        }
    }

    /// The effective configuration, echoed into report headers.
    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("plain data")
    }
}

/// Turns `{"command": "trace-fit", "domain": "ball", "q": 0.25}` into the
/// equivalent argument vector, so a config file goes through the same parser
/// and defaults as flags.
pub fn config_to_argv(config: &Value) -> Result<Vec<String>, String> {
    let obj = config.as_object().ok_or("config must be a JSON object")?;
    let command = obj.get("command").and_then(Value::as_str).ok_or("config needs a string `command` field")?;
    let mut argv = vec!["dtn-heat".to_string(), command.to_string()];
    for (key, value) in obj {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => argv.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => argv.extend([flag, s.clone()]),
            Value::Number(x) => argv.extend([flag, x.to_string()]),
            _ => return Err(format!("config field `{key}` must be a string, number or boolean")),
        }
    }
    Ok(argv)
}

/// `4..8` (inclusive), `5`, or `4,6,8`.
pub fn parse_dimensions(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid dimension list `{s}`; use e.g. 4..8, 5 or 4,6,8");
    let out: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if out.is_empty() || out.iter().any(|&n| n < 2) {
        return Err(format!("dimensions must be at least 2, got `{s}`"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn dimension_lists() {
        assert_eq!(parse_dimensions("4..8").unwrap(), vec![4, 5, 6, 7, 8]);
        assert_eq!(parse_dimensions("4..=5").unwrap(), vec![4, 5]);
        assert_eq!(parse_dimensions("3, 5").unwrap(), vec![3, 5]);
        assert!(parse_dimensions("8..4").is_err());
        assert!(parse_dimensions("1").is_err());
        assert!(parse_dimensions("x").is_err());
    }

    #[test]
    fn config_argv() {
        let v = serde_json::json!({"command": "trace-fit", "domain": "ball", "q": 0.25, "t_min": 0.001});
        let argv = config_to_argv(&v).unwrap();
        assert_eq!(argv, ["dtn-heat", "trace-fit", "--domain", "ball", "--q", "0.25", "--t-min", "0.001"]);
        assert!(config_to_argv(&serde_json::json!({"n": 3})).is_err());
        assert!(config_to_argv(&serde_json::json!({"command": "coeff", "n": [3]})).is_err());
    }
}
