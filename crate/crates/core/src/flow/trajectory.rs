//! Adaptive integration of the symmetric flow with cone-crossing events.
//!
//! The state is integrated in logarithmic coordinates `u_i = ln x_i`, where
//! the field reads `du_i/dt = f_i(x) / x_i`. The volume `x1 x2 x3` becomes the
//! linear invariant `u1 + u2 + u3`, which Runge–Kutta methods preserve up to
//! rounding, and positivity holds by construction. Time is rescaled so that
//! finite-time blow-up toward a corner becomes an infinite-parameter approach.

use serde::{Deserialize, Serialize};

use crate::error::{check_open, check_positive, Error, Result};
use crate::geometry::{classify_raw, gamma_all_raw, grad_gamma_raw, RegionClass, RegionKind};
use crate::model::{symmetric_field, Axis, Point3};

use super::dopri::{hermite, initial_step, step, Controller};

/// Integration and event-detection settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub horizon: f64,
    /// The run stops when a coordinate falls below this value.
    pub min_coordinate: f64,
    /// Hysteresis band `eps` for crossing detection: a cone side changes only
    /// once `|gamma_i| > eps (x1 + x2 + x3)^2` on the other side.
    pub crossing_band: f64,
    /// The run stops when `max |f_i / x_i|` falls below this value.
    pub equilibrium_tol: f64,
    /// Interior points per step checked for sign changes of `gamma_i`.
    pub subsamples: usize,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 1.0,
            horizon: 200.0,
            min_coordinate: 1e-12,
            crossing_band: 1e-13,
            equilibrium_tol: 1e-10,
            subsamples: 8,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        check_positive("rel_tol", self.rel_tol)?;
        check_positive("abs_tol", self.abs_tol)?;
        check_positive("max_step", self.max_step)?;
        check_positive("horizon", self.horizon)?;
        check_positive("min_coordinate", self.min_coordinate)?;
        check_positive("crossing_band", self.crossing_band)?;
        check_positive("equilibrium_tol", self.equilibrium_tol)?;
        if self.max_steps == 0 {
            return Err(Error::OutOfRange {
                name: "max_steps",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        Ok(())
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LeavingS,
    EnteringS,
}

/// A crossing of the cone `Gamma_cone`, or a graze when `refined` is false.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub time: f64,
    pub point: Point3,
    pub cone: Axis,
    pub direction: Direction,
    /// `d gamma / dt` along the field at the event point.
    pub rate: f64,
    /// False for tangential touches, which are not counted as crossings.
    pub refined: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    HorizonReached,
    CoordinateUnderflow,
    EquilibriumConverged,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    /// Integration parameter (rescaled time).
    pub s: f64,
    pub x: Point3,
}

/// A computed orbit with its events and diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub a: f64,
    /// One sample per accepted step, starting with the initial point.
    pub samples: Vec<Sample>,
    pub events: Vec<CrossingEvent>,
    /// `max |x1 x2 x3 / c0 - 1|` over the samples.
    pub volume_drift: f64,
    pub terminated: Termination,
    /// Side of `S` at the last sample with every `gamma_i` outside the band;
    /// Interior or Exterior.
    pub final_side: RegionKind,
    /// Raw classification of the last sample at the default boundary tolerance.
    pub final_class: RegionClass,
    /// True for runs of the planar system (samples lie on `x1 x2 x3 = c`).
    pub planar: bool,
}

impl Trajectory {
    /// Counted crossings in the given direction.
    pub fn count(&self, direction: Direction) -> usize {
        self.events
            .iter()
            .filter(|e| e.refined && e.direction == direction)
            .count()
    }

    pub fn crossings(&self) -> impl Iterator<Item = &CrossingEvent> {
        self.events.iter().filter(|e| e.refined)
    }

    pub fn grazes(&self) -> usize {
        self.events.iter().filter(|e| !e.refined).count()
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

/// An integrable system in log coordinates, reparameterized by
/// `dt/ds = 1 / (1 + max_i |du_i/dt|)`, together with its lift to the
/// three-dimensional phase space. The last state component is the physical
/// time `t`. Orbits are unchanged, and corner blow-up, which happens in
/// finite `t`, is pushed to `s = infinity`.
pub(crate) trait LogSystem<const N: usize>: Sync {
    /// `du/dt` for the log coordinates; the time slot is ignored.
    fn rate(&self, u: &[f64; N]) -> [f64; N];
    fn lift(&self, u: &[f64; N]) -> [f64; 3];

    #[inline]
    fn rhs(&self, u: &[f64; N]) -> [f64; N] {
        let mut r = self.rate(u);
        let m = r[..N - 1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let w = 1.0 / (1.0 + m);
        for v in r[..N - 1].iter_mut() {
            *v *= w;
        }
        r[N - 1] = w;
        r
    }
}

struct Spatial {
    a: f64,
}

impl LogSystem<4> for Spatial {
    #[inline]
    fn rate(&self, u: &[f64; 4]) -> [f64; 4] {
        let x = self.lift(u);
        let f = symmetric_field(self.a, &x);
        [f[0] / x[0], f[1] / x[1], f[2] / x[2], 0.0]
    }
    #[inline]
    fn lift(&self, u: &[f64; 4]) -> [f64; 3] {
        [u[0].exp(), u[1].exp(), u[2].exp()]
    }
}

struct RawRun<const N: usize> {
    /// Integration parameter `s`; physical time is `states[_][N - 1]`.
    times: Vec<f64>,
    states: Vec<[f64; N]>,
    derivs: Vec<[f64; N]>,
    terminated: Termination,
}

fn run<const N: usize, S: LogSystem<N>>(
    sys: &S,
    u0: [f64; N],
    opts: &IntegratorOptions,
) -> Result<RawRun<N>> {
    let f = |u: &[f64; N]| sys.rhs(u);
    let ln_min = opts.min_coordinate.ln();
    let mut s = 0.0;
    let mut u = u0;
    let mut k = f(&u);
    let mut out = RawRun {
        times: vec![0.0],
        states: vec![u],
        derivs: vec![k],
        terminated: Termination::HorizonReached,
    };
    let converged = |u: &[f64; N]| {
        sys.rate(u)[..N - 1]
            .iter()
            .all(|v| v.abs() < opts.equilibrium_tol)
    };
    if converged(&u) {
        out.terminated = Termination::EquilibriumConverged;
        return Ok(out);
    }
    let mut h = initial_step(&f, &u, &k, opts.rel_tol, opts.abs_tol, opts.max_step);
    let mut ctrl = Controller::new();
    let mut rejected_last = false;
    for _ in 0..opts.max_steps {
        let st = step(&f, &u, &k, h, opts.rel_tol, opts.abs_tol);
        if st.err <= 1.0 && st.y.iter().all(|v| v.is_finite()) {
            let fac = ctrl.accept(st.err);
            let (u_prev, k_prev) = (u, k);
            if st.y[N - 1] >= opts.horizon {
                // land exactly on the horizon
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let v = hermite(&u_prev, &k_prev, &st.y, &st.dy, h, mid);
                    if v[N - 1] < opts.horizon {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                let hc = hi * h;
                let sc = step(&f, &u_prev, &k_prev, hc, opts.rel_tol, opts.abs_tol);
                let mut y = sc.y;
                y[N - 1] = opts.horizon;
                out.times.push(s + hc);
                out.states.push(y);
                out.derivs.push(f(&y));
                return Ok(out);
            }
            s += h;
            u = st.y;
            k = st.dy;
            out.times.push(s);
            out.states.push(u);
            out.derivs.push(k);
            h = (h * if rejected_last { fac.min(1.0) } else { fac }).min(opts.max_step);
            rejected_last = false;
            if sys.lift(&u).iter().any(|x| x.ln() < ln_min) {
                out.terminated = Termination::CoordinateUnderflow;
                return Ok(out);
            }
            if converged(&u) {
                out.terminated = Termination::EquilibriumConverged;
                return Ok(out);
            }
        } else {
            h *= ctrl.reject(if st.err.is_finite() { st.err } else { 1e10 });
            rejected_last = true;
            if h <= 1e-14 * s.max(1.0) {
                return Err(Error::StepFailure {
                    t: u[N - 1],
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
        }
    }
    Err(Error::StepFailure {
        t: u[N - 1],
        reason: format!("exceeded {} steps", opts.max_steps),
    })
}

/// Time bisection tolerance for events.
const EVENT_TIME_TOL: f64 = 1e-12;
/// Relative rate `|d gamma/dt| / (|grad gamma| |f|)` below which a crossing
/// is treated as tangential.
const GRAZE_RATE: f64 = 1e-10;

struct Detector<'a, const N: usize, S: LogSystem<N>> {
    sys: &'a S,
    a: f64,
    run: &'a RawRun<N>,
    opts: &'a IntegratorOptions,
}

impl<'a, const N: usize, S: LogSystem<N>> Detector<'a, N, S> {
    /// State at time `tau` by re-integrating one step from the sample before it.
    fn state_at(&self, tau: f64) -> [f64; N] {
        let idx = match self
            .run
            .times
            .binary_search_by(|t| t.total_cmp(&tau))
        {
            Ok(i) => return self.run.states[i],
            Err(i) => i.saturating_sub(1),
        };
        let h = tau - self.run.times[idx];
        let f = |u: &[f64; N]| self.sys.rhs(u);
        step(&f, &self.run.states[idx], &self.run.derivs[idx], h, 1.0, 1.0).y
    }

    fn band(x: &[f64; 3], eps: f64) -> f64 {
        let s = x[0] + x[1] + x[2];
        eps * s * s
    }

    /// Bisects the crossing in `s`; returns physical time and point.
    fn refine(&self, cone: usize, mut lo: f64, mut hi: f64, old_side: f64) -> (f64, [f64; 3]) {
        while hi - lo > EVENT_TIME_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let x = self.sys.lift(&self.state_at(mid));
            let g = crate::geometry::gamma_raw(cone, &x);
            if g * old_side > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = self.state_at(0.5 * (lo + hi));
        (u[N - 1], self.sys.lift(&u))
    }

    fn event(&self, cone: usize, t: f64, x: [f64; 3], direction: Direction, refined: bool) -> CrossingEvent {
        let f = symmetric_field(self.a, &x);
        let g = grad_gamma_raw(cone, &x);
        let rate = f[0] * g[0] + f[1] * g[1] + f[2] * g[2];
        let norms = (f.iter().map(|v| v * v).sum::<f64>() * g.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let tangential = rate.abs() <= GRAZE_RATE * norms;
        CrossingEvent {
            time: t,
            point: Point3::from_array_unchecked(x),
            cone: Axis::ALL[cone],
            direction,
            rate,
            refined: refined && !tangential,
        }
    }

    /// Walks all steps with Hermite subsamples, latching each cone side.
    fn detect(&self) -> (Vec<CrossingEvent>, [f64; 3]) {
        let r = self.run;
        let x0 = self.sys.lift(&r.states[0]);
        let g0 = gamma_all_raw(&x0);
        let mut side = g0.map(|g| if g < 0.0 { -1.0 } else { 1.0 });
        // last time at which the raw sign agreed with the latched side
        let mut last_agree = [0.0f64; 3];
        // deepest band visit since the last decisive sample: (|gamma|/band, t, x)
        let mut in_band: [Option<(f64, f64, [f64; 3])>; 3] = [None; 3];
        let mut events = Vec::new();
        let m = self.opts.subsamples.max(1);
        for s in 0..r.times.len().saturating_sub(1) {
            let (t0, t1) = (r.times[s], r.times[s + 1]);
            let h = t1 - t0;
            for q in 1..=m {
                let theta = q as f64 / m as f64;
                let tau = t0 + theta * h;
                let u = if q == m {
                    r.states[s + 1]
                } else {
                    hermite(&r.states[s], &r.derivs[s], &r.states[s + 1], &r.derivs[s + 1], h, theta)
                };
                let x = self.sys.lift(&u);
                let g = gamma_all_raw(&x);
                let band = Self::band(&x, self.opts.crossing_band);
                for c in 0..3 {
                    if g[c] * side[c] > 0.0 && g[c].abs() > band {
                        // decisive on the latched side
                        if let Some((_, tg, xg)) = in_band[c].take() {
                            let direction = if side[c] > 0.0 {
                                Direction::LeavingS
                            } else {
                                Direction::EnteringS
                            };
                            events.push(self.event(c, tg, xg, direction, false));
                        }
                        last_agree[c] = tau;
                    } else if g[c] * side[c] < 0.0 && g[c].abs() > band {
                        // decisive on the other side: a crossing
                        in_band[c] = None;
                        let direction = if side[c] > 0.0 {
                            Direction::LeavingS
                        } else {
                            Direction::EnteringS
                        };
                        let (te, xe) = self.refine(c, last_agree[c], tau, side[c]);
                        events.push(self.event(c, te, xe, direction, true));
                        side[c] = -side[c];
                        last_agree[c] = tau;
                    } else {
                        if g[c] * side[c] > 0.0 {
                            last_agree[c] = tau;
                        }
                        let depth = g[c].abs() / band.max(f64::MIN_POSITIVE);
                        match in_band[c] {
                            Some((d, _, _)) if d <= depth => {}
                            _ => in_band[c] = Some((depth, u[N - 1], x)),
                        }
                    }
                }
            }
        }
        events.sort_by(|p, q| p.time.total_cmp(&q.time));
        (events, side)
    }
}

fn assemble<const N: usize, S: LogSystem<N>>(
    sys: &S,
    a: f64,
    raw: RawRun<N>,
    opts: &IntegratorOptions,
    planar: bool,
) -> Trajectory {
    let (events, side) = Detector {
        sys,
        a,
        run: &raw,
        opts,
    }
    .detect();
    let samples: Vec<Sample> = raw
        .times
        .iter()
        .zip(raw.states.iter())
        .map(|(&s, u)| Sample {
            t: u[N - 1],
            s,
            x: Point3::from_array_unchecked(sys.lift(u)),
        })
        .collect();
    let p0 = samples[0].x.product();
    let volume_drift = samples
        .iter()
        .map(|s| (s.x.product() / p0 - 1.0).abs())
        .fold(0.0, f64::max);
    let last = samples.last().expect("non-empty").x;
    let s = last.scale();
    let final_class = classify_raw(&last.coords(), crate::geometry::BOUNDARY_EPS * s * s);
    Trajectory {
        a,
        samples,
        events,
        volume_drift,
        terminated: raw.terminated,
        final_side: if side.iter().all(|&v| v > 0.0) {
            RegionKind::Interior
        } else {
            RegionKind::Exterior
        },
        final_class,
        planar,
    }
}

/// Integrates the symmetric flow from `x0`.
pub fn integrate(a: f64, x0: &Point3, opts: &IntegratorOptions) -> Result<Trajectory> {
    check_open("a", a, 0.0, 0.5, "(0, 1/2)")?;
    opts.validate()?;
    let sys = Spatial { a };
    let [x1, x2, x3] = x0.coords();
    let u0 = [x1.ln(), x2.ln(), x3.ln(), 0.0];
    let raw = run(&sys, u0, opts)?;
    Ok(assemble(&sys, a, raw, opts, false))
}

/// Integrates the planar system on `x1 x2 x3 = c` from `(x1, x2)`.
///
/// The state keeps all three log coordinates with `u3 = ln c - u1 - u2`; the
/// constraint is a linear invariant of the log system and holds to rounding.
/// Start coordinates that agree to a few ulps are made equal, so the invariant
/// curves `x_j = x_k` stay exact even where they are repelling. Events are
/// reported against `l_i = 0`, whose zero sets on the surface are those of
/// `gamma_i`.
pub fn integrate_planar(
    a: f64,
    c: f64,
    x1: f64,
    x2: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    check_open("a", a, 0.0, 0.5, "(0, 1/2)")?;
    check_positive("c", c)?;
    check_positive("x1", x1)?;
    check_positive("x2", x2)?;
    opts.validate()?;
    let mut u = [x1.ln(), x2.ln(), c.ln() - x1.ln() - x2.ln()];
    for (j, k) in [(0, 1), (1, 2), (0, 2)] {
        if (u[j] - u[k]).abs() <= 4.0 * f64::EPSILON * (1.0 + u[j].abs()) {
            u[k] = u[j];
        }
    }
    let sys = Spatial { a };
    let raw = run(&sys, [u[0], u[1], u[2], 0.0], opts)?;
    Ok(assemble(&sys, a, raw, opts, true))
}

/// Re-runs crossing detection on an existing trajectory.
///
/// Samples are treated as accepted steps; each interval is reproduced by a
/// single re-integrated step, so a trajectory produced by [`integrate`] yields
/// the events it already carries.
pub fn detect_crossings(trajectory: &Trajectory, opts: &IntegratorOptions) -> Vec<CrossingEvent> {
    let a = trajectory.a;
    let sys = Spatial { a };
    let raw = raw_from_samples(&sys, trajectory, |x, t| [x[0].ln(), x[1].ln(), x[2].ln(), t]);
    Detector { sys: &sys, a, run: &raw, opts }.detect().0
}

fn raw_from_samples<const N: usize, S: LogSystem<N>>(
    sys: &S,
    tr: &Trajectory,
    to_u: impl Fn([f64; 3], f64) -> [f64; N],
) -> RawRun<N> {
    let states: Vec<[f64; N]> = tr.samples.iter().map(|s| to_u(s.x.coords(), s.t)).collect();
    let derivs = states.iter().map(|u| sys.rhs(u)).collect();
    RawRun {
        times: tr.samples.iter().map(|s| s.s).collect(),
        states,
        derivs,
        terminated: tr.terminated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance_to_invariant_curve, invariant_curve_point};

    #[test]
    fn diagonal_start_is_stationary() {
        let tr = integrate(0.2, &Point3::diagonal(1.7).unwrap(), &IntegratorOptions::default()).unwrap();
        assert_eq!(tr.terminated, Termination::EquilibriumConverged);
        assert_eq!(tr.samples.len(), 1);
        assert!(tr.events.is_empty());
    }

    #[test]
    fn stays_on_invariant_curve() {
        let x0 = invariant_curve_point(Axis::X3, 1.0, 2.0).unwrap();
        let tr = integrate(1.0 / 6.0, &x0, &IntegratorOptions::default()).unwrap();
        for s in &tr.samples {
            assert!(distance_to_invariant_curve(Axis::X3, 1.0, &s.x) < 1e-8);
        }
        assert!(tr.volume_drift < 1e-12);
    }

    #[test]
    fn one_eighth_interior_start_leaves_once() {
        let x0 = Point3::new(1.1, 0.9, 1.0 / (1.1 * 0.9) * 1.01).unwrap();
        let tr = integrate(0.125, &x0, &IntegratorOptions::default()).unwrap();
        assert_eq!(tr.count(Direction::LeavingS), 1, "{:?}", tr.events);
        assert_eq!(tr.count(Direction::EnteringS), 0);
        assert_eq!(tr.final_side, RegionKind::Exterior);
        assert!(tr.volume_drift < 1e-8);
        let again = detect_crossings(&tr, &IntegratorOptions::default());
        assert_eq!(again.len(), tr.events.len());
        for (p, q) in again.iter().zip(&tr.events) {
            assert!((p.time - q.time).abs() < 1e-9);
        }
    }

    #[test]
    fn planar_run_stays_on_c3() {
        let tr = integrate_planar(0.2, 1.0, 1.3, 1.3, &IntegratorOptions::default()).unwrap();
        for s in &tr.samples {
            assert_eq!(s.x.x1(), s.x.x2());
        }
        let tr = integrate_planar(0.2, 1.0, 1.0, 1.0, &IntegratorOptions::default()).unwrap();
        assert_eq!(tr.terminated, Termination::EquilibriumConverged);
    }
}
