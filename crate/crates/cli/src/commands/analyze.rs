use std::io::Write;

use serde::Serialize;
use wallach_core::{
    critical_nus, critical_nus_bisection, eigen_structure, equilibria, equilibrium_membership, g_h_f, EigenRole,
    FluxSplit, F_MIN, F_SUP, NU_STAR,
};

use crate::config::{parse_grid, parse_list, parse_table, AnalyzeArgs, ConfigFile, Format, Grid, Table as Which};
use crate::error::{config, runtime, CliError};
use crate::output::{num, write_json, Table};

#[derive(Serialize)]
struct FRow {
    nu: f64,
    g: f64,
    h: f64,
    f: f64,
}

#[derive(Serialize)]
struct RootRow {
    a: f64,
    regime: &'static str,
    nu1: Option<f64>,
    nu2: Option<f64>,
    nu1_bisection: Option<f64>,
    nu2_bisection: Option<f64>,
}

#[derive(Serialize)]
struct EqRow {
    a: f64,
    which: usize,
    x: [f64; 3],
    region: String,
    /// Eigenvalues of the symmetric-field Jacobian along the center, curve
    /// and transverse directions (center, plane, plane at `o0`).
    eigenvalues: Option<[f64; 3]>,
    roles: Option<[EigenRole; 3]>,
}

#[derive(Serialize)]
struct Doc {
    f: Vec<FRow>,
    roots: Vec<RootRow>,
    equilibria: Vec<EqRow>,
}

fn f_table(grid: Grid) -> Result<Vec<FRow>, CliError> {
    let mut nus = grid.points();
    if grid.lo <= NU_STAR && NU_STAR <= grid.hi && !nus.contains(&NU_STAR) {
        nus.push(NU_STAR);
        nus.sort_by(f64::total_cmp);
    }
    nus.into_iter()
        .map(|nu| {
            let (g, h, f) = g_h_f(nu).map_err(config)?;
            Ok(FRow { nu, g, h, f })
        })
        .collect()
}

fn root_table(grid: Grid) -> Result<Vec<RootRow>, CliError> {
    grid.points()
        .into_iter()
        .map(|a| {
            let split = critical_nus(a).map_err(config)?;
            let (regime, roots) = match split {
                FluxSplit::AlwaysNegative => ("always_negative", None),
                FluxSplit::TangentAtNu { nu } => ("tangent", Some((nu, nu))),
                FluxSplit::SignChange { nu1, nu2 } => ("sign_change", Some((nu1, nu2))),
                FluxSplit::AlwaysPositive => ("always_positive", None),
            };
            let bis = if a > F_MIN && a < F_SUP { Some(critical_nus_bisection(a).map_err(runtime)?) } else { None };
            Ok(RootRow {
                a,
                regime,
                nu1: roots.map(|r| r.0),
                nu2: roots.map(|r| r.1),
                nu1_bisection: bis.map(|r| r.0),
                nu2_bisection: bis.map(|r| r.1),
            })
        })
        .collect()
}

fn eq_table(params: &[f64]) -> Result<Vec<EqRow>, CliError> {
    let mut rows = Vec::new();
    for &a in params {
        let set = equilibria(a, 1.0).map_err(config)?;
        let member = equilibrium_membership(a).map_err(config)?;
        let count = if set.degenerate { 1 } else { 4 };
        for which in 0..count {
            let e = if set.degenerate { None } else { Some(eigen_structure(a, 1.0, which).map_err(runtime)?) };
            rows.push(EqRow {
                a,
                which,
                x: set.points[which].coords(),
                region: member.classes[which].kind.label(),
                eigenvalues: e.as_ref().map(|e| [0, 1, 2].map(|k| e.directions[k].eigenvalue)),
                roles: e.as_ref().map(|e| [0, 1, 2].map(|k| e.directions[k].role)),
            });
        }
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn role(r: EigenRole) -> &'static str {
    match r {
        EigenRole::Stable => "stable",
        EigenRole::Unstable => "unstable",
        EigenRole::Center => "center",
    }
}

pub fn run(args: AnalyzeArgs, cfg: &ConfigFile, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let nu_grid = cfg.pick(args.nu_grid, "nu-grid", parse_grid)?.unwrap_or(Grid { lo: 1.0, hi: 4.0, n: 301 });
    let a_grid = cfg.pick(args.a_grid, "a-grid", parse_grid)?.unwrap_or(Grid { lo: F_MIN, hi: F_SUP - 1e-3, n: 50 });
    let params = cfg
        .pick(args.a, "a", parse_list)?
        .map(|l| l.0)
        .unwrap_or_else(|| vec![1.0 / 9.0, 1.0 / 8.0, 1.0 / 6.0, 3.0 / 14.0, 0.22, 0.25, 0.3, 0.45]);
    let table = cfg.pick(args.table, "table", parse_table)?.unwrap_or(Which::F);
    if nu_grid.lo < 1.0 {
        return Err(CliError::Config(format!("nu grid must start at 1 or above, got {}", nu_grid.lo)));
    }
    match format {
        Format::Json => write_json(
            out,
            "analyze",
            &Doc { f: f_table(nu_grid)?, roots: root_table(a_grid)?, equilibria: eq_table(&params)? },
        ),
        Format::Csv => match table {
            Which::F => {
                let mut t = Table::new(&["nu", "G", "H", "F"]);
                for r in f_table(nu_grid)? {
                    t.push(vec![num(r.nu), num(r.g), num(r.h), num(r.f)]);
                }
                t.write(out)
            }
            Which::Roots => {
                let mut t = Table::new(&["a", "regime", "nu1", "nu2", "nu1_bisection", "nu2_bisection"]);
                for r in root_table(a_grid)? {
                    t.push(vec![
                        num(r.a),
                        r.regime.into(),
                        opt(r.nu1),
                        opt(r.nu2),
                        opt(r.nu1_bisection),
                        opt(r.nu2_bisection),
                    ]);
                }
                t.write(out)
            }
            Which::Equilibria => {
                let mut t = Table::new(&[
                    "a", "which", "x1", "x2", "x3", "region", "lambda1", "lambda2", "lambda3", "role1", "role2", "role3",
                ]);
                for r in eq_table(&params)? {
                    let mut row = vec![num(r.a), format!("o{}", r.which), num(r.x[0]), num(r.x[1]), num(r.x[2]), r.region];
                    for k in 0..3 {
                        row.push(opt(r.eigenvalues.map(|e| e[k])));
                    }
                    for k in 0..3 {
                        row.push(r.roles.map(|e| role(e[k]).to_string()).unwrap_or_default());
                    }
                    t.push(row);
                }
                t.write(out)
            }
        },
    }
}
