use std::io::Write;

use serde::Serialize;
use wallach_core::{reproduce_ivp_026, run_regime_experiment, IntegratorOptions, IvpReproduction, IvpSetup, RegimeReport, Verdict};

use crate::config::{parse_list, parse_number, parse_usize, ConfigFile, Format, VerifyArgs};
use crate::error::{config, runtime, CliError};
use crate::output::{num, write_json, Table};

pub fn default_parameters() -> Vec<f64> {
    vec![1.0 / 9.0, 1.0 / 8.0, 1.0 / 6.0, 3.0 / 14.0, 0.22, 0.25, 0.3]
}

#[derive(Serialize)]
struct Doc {
    seed: u64,
    n: usize,
    horizon: f64,
    consistent: bool,
    /// Parameters whose verdict was inconclusive.
    warnings: Vec<String>,
    reports: Vec<RegimeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ivp: Option<IvpReproduction>,
}

fn label(v: &Verdict) -> String {
    match v {
        Verdict::ConsistentWithTheorem1Case { case } => format!("consistent_case_{case}"),
        Verdict::Violation { case, .. } => format!("violation_case_{case}"),
        Verdict::Inconclusive { case, .. } => format!("inconclusive_case_{case}"),
    }
}

pub fn run(args: VerifyArgs, cfg: &ConfigFile, seed: u64, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let params = cfg.pick(args.a, "a", parse_list)?.map(|l| l.0).unwrap_or_else(default_parameters);
    let n = cfg.pick(args.n, "n", parse_usize)?.unwrap_or(100);
    let horizon = cfg.pick(args.horizon, "horizon", parse_number)?.unwrap_or(200.0);
    let ivp = cfg.flag(args.ivp, "ivp")?;
    let opts = IntegratorOptions::default().with_horizon(horizon);
    opts.validate().map_err(config)?;
    if n == 0 {
        return Err(CliError::Config("n must be at least 1".into()));
    }
    for &a in &params {
        wallach_core::theorem_case(a).map_err(config)?;
    }

    let reports = params
        .iter()
        .map(|&a| run_regime_experiment(a, n, seed, &opts).map_err(runtime))
        .collect::<Result<Vec<_>, _>>()?;
    let ivp = if ivp { Some(reproduce_ivp_026(IvpSetup::default()).map_err(runtime)?) } else { None };
    let violations: Vec<f64> = reports
        .iter()
        .filter(|r| matches!(r.verdict, Verdict::Violation { .. }))
        .map(|r| r.a)
        .collect();
    let warnings = reports
        .iter()
        .filter_map(|r| match &r.verdict {
            Verdict::Inconclusive { details, .. } => Some(format!("a = {}: {}", r.a, details.join("; "))),
            _ => None,
        })
        .collect();
    let doc = Doc { seed, n, horizon, consistent: violations.is_empty(), warnings, reports, ivp };

    match format {
        Format::Json => write_json(out, "verify", &doc)?,
        Format::Csv => {
            let mut t = Table::new(&[
                "a", "case", "verdict", "runs", "interior_one_leave", "interior_no_leave", "exterior_entered", "flux_min", "flux_max",
            ]);
            for r in &doc.reports {
                let count = |f: &dyn Fn(usize) -> bool, v: &[usize]| v.iter().filter(|&&k| f(k)).count().to_string();
                t.push(vec![
                    num(r.a),
                    r.case.to_string(),
                    label(&r.verdict),
                    r.n_trajectories.to_string(),
                    count(&|k| k == 1, &r.interior_leave_counts),
                    count(&|k| k == 0, &r.interior_leave_counts),
                    count(&|k| k > 0, &r.exterior_enter_counts),
                    num(r.flux.min),
                    num(r.flux.max),
                ]);
            }
            t.write(out)?;
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verdict(format!("verdict violated for a = {violations:?}")))
    }
}
