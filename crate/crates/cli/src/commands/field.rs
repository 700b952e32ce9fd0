use std::io::Write;

use serde::Serialize;
use wallach_core::{boundary_tolerance, classify_region, Point3, SystemParams};

use crate::config::{parse_grid, parse_number, parse_triple, ConfigFile, FieldArgs, Format, Grid};
use crate::error::{config, CliError};
use crate::output::{num, write_json, Table};

pub const HEADER: [&str; 10] = ["x1", "x2", "x3", "f1", "f2", "f3", "gamma1", "gamma2", "gamma3", "region"];

#[derive(Serialize)]
struct Row {
    x: [f64; 3],
    f: [f64; 3],
    gamma: [f64; 3],
    region: String,
}

#[derive(Serialize)]
struct Doc<'a> {
    params: &'a SystemParams,
    rows: Vec<Row>,
}

pub fn run(args: FieldArgs, cfg: &ConfigFile, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let general = cfg.pick(args.general, "general", parse_triple)?;
    let a = cfg.pick(args.a, "a", parse_number)?;
    let grid = cfg.pick(args.grid, "grid", parse_grid)?.unwrap_or(Grid { lo: 0.5, hi: 2.0, n: 10 });
    if grid.lo <= 0.0 {
        return Err(CliError::Config(format!("grid must be positive, got lower end {}", grid.lo)));
    }
    let params = match (general, a) {
        (Some([a1, a2, a3]), None) => SystemParams::general(a1, a2, a3).map_err(config)?,
        (None, Some(a)) => SystemParams::symmetric(a).map_err(config)?,
        (None, None) => SystemParams::symmetric(0.125).map_err(config)?,
        (Some(_), Some(_)) => return Err(CliError::Config("give either --a or --general".into())),
    };
    let pts = grid.points();
    let mut rows = Vec::with_capacity(pts.len().pow(3));
    for &x1 in &pts {
        for &x2 in &pts {
            for &x3 in &pts {
                let x = Point3::new(x1, x2, x3).map_err(config)?;
                let f = params.field(&x).0;
                let class = classify_region(&x, boundary_tolerance(&x));
                let mut region = class.kind.label();
                if class.on_diagonal {
                    region.push_str("/diagonal");
                }
                rows.push(Row { x: x.coords(), f, gamma: class.gammas, region });
            }
        }
    }
    match format {
        Format::Json => write_json(out, "field", &Doc { params: &params, rows }),
        Format::Csv => {
            let mut t = Table::new(&HEADER);
            for r in rows {
                let mut v: Vec<String> = r.x.iter().chain(&r.f).chain(&r.gamma).map(|&v| num(v)).collect();
                v.push(r.region);
                t.push(v);
            }
            t.write(out)
        }
    }
}
