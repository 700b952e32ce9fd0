use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wallach_core::{
    boundary_tolerance, classify_region, flux_switch_points, integrate_planar, invariant_curve_point,
    planar_classification, trace_planar_boundary, Axis, CrossingEvent, Direction, IntegratorOptions, PlanarKind,
    Termination,
};

use crate::config::{parse_number, parse_usize, ConfigFile, Format, PortraitArgs};
use crate::error::{config, runtime, CliError};
use crate::output::{num, write_json, Table};

#[derive(Serialize)]
struct Equilibrium {
    which: usize,
    x1: f64,
    x2: f64,
    /// `None` when degenerate.
    kind: Option<PlanarKind>,
    delta: Option<f64>,
    rho: Option<f64>,
    region: String,
    degenerate: bool,
}

#[derive(Serialize)]
struct Event {
    time: f64,
    x1: f64,
    x2: f64,
    cone: usize,
    direction: Direction,
    refined: bool,
}

impl From<&CrossingEvent> for Event {
    fn from(e: &CrossingEvent) -> Self {
        Event {
            time: e.time,
            x1: e.point.x1(),
            x2: e.point.x2(),
            cone: e.cone.number(),
            direction: e.direction,
            refined: e.refined,
        }
    }
}

#[derive(Serialize)]
struct Orbit {
    start: [f64; 2],
    t: Vec<f64>,
    x1: Vec<f64>,
    x2: Vec<f64>,
    events: Vec<Event>,
    terminated: Termination,
}

#[derive(Serialize, Default)]
struct Curve {
    x1: Vec<f64>,
    x2: Vec<f64>,
}

#[derive(Serialize)]
struct Marker {
    cone: usize,
    nu: f64,
    x1: f64,
    x2: f64,
}

#[derive(Serialize)]
struct Doc {
    a: f64,
    c: f64,
    seed: u64,
    horizon: f64,
    equilibria: Vec<Equilibrium>,
    /// Boundary curves `s1, s2, s3` of the planar domain.
    boundary: [Curve; 3],
    /// Invariant curves `c1, c2, c3`.
    invariant: [Curve; 3],
    /// Points where the flux through a cone changes sign.
    tangency: Vec<Marker>,
    trajectories: Vec<Orbit>,
}

fn equilibria(a: f64) -> Result<Vec<Equilibrium>, CliError> {
    let set = wallach_core::equilibria(a, 1.0).map_err(config)?;
    let count = if set.degenerate { 1 } else { 4 };
    (0..count)
        .map(|which| {
            let p = set.points[which];
            let class = classify_region(&p, boundary_tolerance(&p));
            let lin = if set.degenerate {
                None
            } else {
                Some(planar_classification(a, which).map_err(runtime)?)
            };
            Ok(Equilibrium {
                which,
                x1: p.x1(),
                x2: p.x2(),
                kind: lin.map(|l| l.kind),
                delta: lin.map(|l| l.delta),
                rho: lin.and_then(|l| l.rho),
                region: class.kind.label(),
                degenerate: set.degenerate,
            })
        })
        .collect()
}

/// Jittered square grid in `ln x1, ln x2` over `[-1, 1]^2`.
fn starts(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let k = (n as f64).sqrt().ceil().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = 2.0 / k as f64;
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let u1 = -1.0 + cell * (i as f64 + 0.5 + rng.random_range(-0.3..0.3));
            let u2 = -1.0 + cell * (j as f64 + 0.5 + rng.random_range(-0.3..0.3));
            out.push([u1.exp(), u2.exp()]);
        }
    }
    out.truncate(n);
    out
}

pub fn run(args: PortraitArgs, cfg: &ConfigFile, seed: u64, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let a = cfg.pick(args.a, "a", parse_number)?.unwrap_or(0.125);
    let n = cfg.pick(args.starts, "starts", parse_usize)?.unwrap_or(24);
    let horizon = cfg.pick(args.horizon, "horizon", parse_number)?.unwrap_or(50.0);
    let rays = cfg.pick(args.rays, "rays", parse_usize)?.unwrap_or(360);
    wallach_core::theorem_case(a).map_err(config)?;
    let opts = IntegratorOptions::default().with_horizon(horizon);
    opts.validate().map_err(config)?;
    if rays == 0 {
        return Err(CliError::Config("rays must be at least 1".into()));
    }

    let mut trajectories = Vec::with_capacity(n);
    for s in starts(n, seed) {
        let tr = integrate_planar(a, 1.0, s[0], s[1], &opts).map_err(runtime)?;
        trajectories.push(Orbit {
            start: s,
            t: tr.samples.iter().map(|p| p.t).collect(),
            x1: tr.samples.iter().map(|p| p.x.x1()).collect(),
            x2: tr.samples.iter().map(|p| p.x.x2()).collect(),
            events: tr.events.iter().map(Event::from).collect(),
            terminated: tr.terminated,
        });
    }

    let mut boundary: [Curve; 3] = Default::default();
    for p in trace_planar_boundary(1.0, rays, 4.0).map_err(runtime)? {
        let c = &mut boundary[p.cone.index()];
        c.x1.push(p.x1);
        c.x2.push(p.x2);
    }
    let mut invariant: [Curve; 3] = Default::default();
    for i in Axis::ALL {
        for k in 0..=200 {
            let p = (-2.0 + 4.0 * k as f64 / 200.0f64).exp();
            let x = invariant_curve_point(i, 1.0, p).map_err(runtime)?;
            invariant[i.index()].x1.push(x.x1());
            invariant[i.index()].x2.push(x.x2());
        }
    }
    let mut tangency = Vec::new();
    for i in Axis::ALL {
        if let Some(points) = flux_switch_points(a, i, 1.0).map_err(runtime)? {
            for (chart, x) in points {
                tangency.push(Marker { cone: i.number(), nu: chart.nu, x1: x.x1(), x2: x.x2() });
            }
        }
    }

    match format {
        Format::Json => write_json(
            out,
            "portrait",
            &Doc {
                a,
                c: 1.0,
                seed,
                horizon,
                equilibria: equilibria(a)?,
                boundary,
                invariant,
                tangency,
                trajectories,
            },
        ),
        Format::Csv => {
            let mut t = Table::new(&["trajectory", "t", "x1", "x2", "x3"]);
            for (k, o) in trajectories.iter().enumerate() {
                for s in 0..o.t.len() {
                    let x3 = 1.0 / (o.x1[s] * o.x2[s]);
                    t.push(vec![k.to_string(), num(o.t[s]), num(o.x1[s]), num(o.x2[s]), num(x3)]);
                }
            }
            t.write(out)
        }
    }
}
