//! Command-line definitions, value parsers and config-file merging.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "wallach-flow", version, about = "Normalized Ricci flow on generalized Wallach spaces")]
pub struct Cli {
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file with default values for any flag; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the field and cone functions over a grid.
    Field(FieldArgs),
    /// Phase-portrait data of the planar system on x1 x2 x3 = 1.
    Portrait(PortraitArgs),
    /// Check trajectory statistics against the regime table.
    Verify(VerifyArgs),
    /// Tables of F, the critical chart values and the equilibria.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long, value_parser = parse_number)]
    pub a: Option<f64>,
    /// General parameters `a1,a2,a3` instead of the symmetric `--a`.
    #[arg(long, value_parser = parse_triple)]
    pub general: Option<[f64; 3]>,
    /// `lo:hi:n`, applied to each coordinate.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<Grid>,
}

#[derive(Debug, Args)]
pub struct PortraitArgs {
    #[arg(long, value_parser = parse_number)]
    pub a: Option<f64>,
    /// Number of planar trajectories.
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long, value_parser = parse_number)]
    pub horizon: Option<f64>,
    /// Rays used to trace the boundary curves.
    #[arg(long)]
    pub rays: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated parameter values.
    #[arg(long, value_parser = parse_list)]
    pub a: Option<List>,
    /// Interior and exterior starts per parameter.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_number)]
    pub horizon: Option<f64>,
    /// Include the fixed-step boundary computation at a = 0.26.
    #[arg(long)]
    pub ivp: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Table {
    F,
    Roots,
    Equilibria,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// `lo:hi:n` grid of nu for the F table.
    #[arg(long, value_parser = parse_grid)]
    pub nu_grid: Option<Grid>,
    /// `lo:hi:n` grid of a for the root table.
    #[arg(long, value_parser = parse_grid)]
    pub a_grid: Option<Grid>,
    /// Parameters for the equilibrium table.
    #[arg(long, value_parser = parse_list)]
    pub a: Option<List>,
    /// Table written in CSV mode (JSON always carries all three).
    #[arg(long, value_enum)]
    pub table: Option<Table>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|k| {
                if k + 1 == self.n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64
                }
            })
            .collect()
    }
}

/// Parses a decimal or a fraction such as `3/14`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("invalid number `{s}`"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("invalid number `{s}`"))?;
            if q == 0.0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            p / q
        }
        None => s.parse().map_err(|_| format!("invalid number `{s}`"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite number `{s}`"))
    }
}

/// Comma-separated numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct List(pub Vec<f64>);

pub fn parse_list(s: &str) -> Result<List, String> {
    let v: Vec<f64> = s.split(',').map(parse_number).collect::<Result<_, _>>()?;
    Ok(List(v))
}

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v = parse_list(s)?.0;
    <[f64; 3]>::try_from(v).map_err(|_| format!("expected three values in `{s}`"))
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("expected lo:hi:n, got `{s}`"));
    };
    let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
    let n: usize = n.trim().parse().map_err(|_| format!("invalid count in `{s}`"))?;
    if n == 0 || hi < lo {
        return Err(format!("grid `{s}` needs n >= 1 and lo <= hi"));
    }
    Ok(Grid { lo, hi, n })
}

/// Flat JSON object whose keys are flag names.
pub struct ConfigFile(Map<String, Value>);

impl ConfigFile {
    pub fn empty() -> Self {
        ConfigFile(Map::new())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        match serde_json::from_str(&text) {
            Ok(Value::Object(m)) => Ok(ConfigFile(m)),
            Ok(_) => Err(CliError::Config("config must be a JSON object".into())),
            Err(e) => Err(CliError::Config(format!("invalid config JSON: {e}"))),
        }
    }

    fn text(&self, key: &str) -> Option<String> {
        self.0.get(key).map(|v| match v {
            Value::String(s) => s.clone(),
            Value::Array(items) => items
                .iter()
                .map(|i| match i {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => other.to_string(),
        })
    }

    /// Flag value if given, else the config entry parsed with the flag's parser.
    pub fn pick<T>(
        &self,
        flag: Option<T>,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.text(key)
            .map(|s| parse(&s).map_err(|e| CliError::Config(format!("config `{key}`: {e}"))))
            .transpose()
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        match self.0.get(key) {
            None => Ok(false),
            Some(Value::Bool(b)) => Ok(*b),
            Some(_) => Err(CliError::Config(format!("config `{key}` must be a boolean"))),
        }
    }
}

pub fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("invalid count `{s}`"))
}

pub fn parse_u64(s: &str) -> Result<u64, String> {
    s.trim().parse().map_err(|_| format!("invalid seed `{s}`"))
}

pub fn parse_format(s: &str) -> Result<Format, String> {
    Format::from_str(s.trim(), true)
}

pub fn parse_table(s: &str) -> Result<Table, String> {
    Table::from_str(s.trim(), true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_grids() {
        assert_eq!(parse_number("3/14").unwrap(), 3.0 / 14.0);
        assert_eq!(parse_number(" 0.25 ").unwrap(), 0.25);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("x").is_err());
        let g = parse_grid("0.5:2:4").unwrap();
        assert_eq!(g.points(), vec![0.5, 1.0, 1.5, 2.0]);
        assert!(parse_grid("2:1:3").is_err());
        assert_eq!(parse_list("1/8,0.3").unwrap().0, vec![0.125, 0.3]);
        assert_eq!(parse_triple("0.1,0.2,0.3").unwrap(), [0.1, 0.2, 0.3]);
    }
}
