//! Flux of the symmetric field through the cones and the criterion
//! `a - F(nu)` that decides its sign.

use serde::{Deserialize, Serialize};

use crate::error::{check_open, Error, Result};
use crate::geometry::{boundary_tolerance, chart_of, cone_point, grad_gamma_raw, ConeChart};
use crate::model::{symmetric_field, Axis, Point3};
use crate::roots::bisect;

/// Minimum of `F`, attained at `nu = 4/3`.
pub const F_MIN: f64 = 3.0 / 14.0;
/// Supremum of `F` (value at `nu = 1` and limit at infinity).
pub const F_SUP: f64 = 0.25;
/// Location of the minimum of `F`.
pub const NU_STAR: f64 = 4.0 / 3.0;

/// `r(nu) = nu - 1/2 - sqrt(nu (nu - 1))`, evaluated without cancellation.
#[inline]
fn r_term(nu: f64) -> f64 {
    0.25 / (nu - 0.5 + (nu * (nu - 1.0)).sqrt())
}

/// `(G, H, F)` at `nu >= 1` with
/// `G = (12 nu - 15) sqrt(nu (nu - 1)) - 12 nu^2 + 21 nu - 5`,
/// `H = (3 nu - 1 - 3 sqrt(nu (nu - 1))) / 2` and `F = H / G`.
///
/// Both are evaluated through `r = nu - 1/2 - sqrt(nu (nu - 1))`, giving
/// `G = 5/2 - (12 nu - 15) r` and `H = (3 r + 1/2) / 2`, which avoids the
/// cancellation of the `nu^2` terms for large `nu`.
pub fn g_h_f(nu: f64) -> Result<(f64, f64, f64)> {
    if !(nu.is_finite() && nu >= 1.0) {
        return Err(Error::OutOfRange {
            name: "nu",
            value: nu,
            range: "[1, inf)",
        });
    }
    let r = r_term(nu);
    let g = 2.5 - (12.0 * nu - 15.0) * r;
    let h = 0.5 * (3.0 * r + 0.5);
    Ok((g, h, h / g))
}

/// `F(nu) = H(nu) / G(nu)`.
pub fn f_criterion(nu: f64) -> Result<f64> {
    g_h_f(nu).map(|(_, _, f)| f)
}

/// `G` and `H` in the printed (cancelling) form; used to cross-check [`g_h_f`].
pub fn g_h_printed(nu: f64) -> (f64, f64) {
    let s = (nu * (nu - 1.0)).sqrt();
    (
        (12.0 * nu - 15.0) * s - 12.0 * nu * nu + 21.0 * nu - 5.0,
        0.5 * (3.0 * nu - 1.0 - 3.0 * s),
    )
}

/// Sign structure of the flux through a cone as a function of `a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum FluxSplit {
    /// `a < 3/14`: flux negative on the whole cone.
    AlwaysNegative,
    /// `a = 3/14`: flux vanishes only on the ray `nu = 4/3`.
    TangentAtNu { nu: f64 },
    /// `3/14 < a < 1/4`: negative for `nu` in `(1, nu1) ∪ (nu2, inf)`, positive
    /// on `(nu1, nu2)`.
    SignChange { nu1: f64, nu2: f64 },
    /// `a >= 1/4`: flux positive on the whole cone.
    AlwaysPositive,
}

impl FluxSplit {
    pub fn roots(&self) -> Option<(f64, f64)> {
        match *self {
            FluxSplit::TangentAtNu { nu } => Some((nu, nu)),
            FluxSplit::SignChange { nu1, nu2 } => Some((nu1, nu2)),
            _ => None,
        }
    }
}

/// Closed-form roots of `F(nu) = a`:
/// `[3(2a-1)(10a-1) ± sqrt(3(14a-3)(10a-1)^3)] / [48a(4a-1)]`.
/// Returns `(plus, minus)`; for `a` in `(3/14, 1/4)` the denominator is negative
/// and the `+` branch is the smaller root.
pub fn nu_roots_formula(a: f64) -> (f64, f64) {
    let b = 3.0 * (2.0 * a - 1.0) * (10.0 * a - 1.0);
    let disc = 3.0 * (14.0 * a - 3.0) * (10.0 * a - 1.0).powi(3);
    let s = disc.max(0.0).sqrt();
    let den = 48.0 * a * (4.0 * a - 1.0);
    ((b + s) / den, (b - s) / den)
}

const TANGENT_A_TOL: f64 = 1e-14;

/// Flux regime for `a` in `(0, 1/2)`, with roots from the closed form.
pub fn critical_nus(a: f64) -> Result<FluxSplit> {
    check_open("a", a, 0.0, 0.5, "(0, 1/2)")?;
    Ok(if (a - F_MIN).abs() <= TANGENT_A_TOL {
        FluxSplit::TangentAtNu { nu: NU_STAR }
    } else if a < F_MIN {
        FluxSplit::AlwaysNegative
    } else if a < F_SUP {
        let (nu1, nu2) = nu_roots_formula(a);
        FluxSplit::SignChange { nu1, nu2 }
    } else {
        FluxSplit::AlwaysPositive
    })
}

/// Roots of `F(nu) = a` by bisection, for `a` in `(3/14, 1/4)`.
pub fn critical_nus_bisection(a: f64) -> Result<(f64, f64)> {
    check_open("a", a, F_MIN, F_SUP, "(3/14, 1/4)")?;
    let h = |nu: f64| f_criterion(nu).map(|f| f - a).unwrap_or(f64::NAN);
    let nu1 = bisect(h, 1.0 + 1e-12, NU_STAR, 1e-12, "nu1")?;
    let mut hi = 2.0;
    while h(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoBracket("nu2"));
        }
    }
    let nu2 = bisect(h, NU_STAR, hi, 1e-12 * hi.max(1.0), "nu2")?;
    Ok((nu1, nu2))
}

/// Points of `Gamma_i` on the surface `x1 x2 x3 = c` where the flux changes
/// sign, at `nu1` and `nu2` (`t = (c / (nu mu))^(1/3)`). `None` outside
/// `[3/14, 1/4)`.
pub fn flux_switch_points(a: f64, i: Axis, c: f64) -> Result<Option<[(ConeChart, Point3); 2]>> {
    crate::error::check_positive("c", c)?;
    let Some((nu1, nu2)) = critical_nus(a)?.roots() else {
        return Ok(None);
    };
    let at = |nu: f64| -> Result<(ConeChart, Point3)> {
        let mu = crate::geometry::chart_mu(nu);
        let chart = ConeChart::new(i, nu, (c / (nu * mu)).cbrt())?;
        Ok((chart, cone_point(&chart)?))
    };
    Ok(Some([at(nu1)?, at(nu2)?]))
}

/// `f · grad gamma_i` at a point of `Gamma_i`, computed directly from the
/// symmetric field. Fails if `|gamma_i| > tol` where `tol` defaults to the
/// scale-aware boundary tolerance.
pub fn flux(a: f64, x: &Point3, i: Axis) -> Result<f64> {
    check_open("a", a, 0.0, 0.5, "(0, 1/2)")?;
    let tol = boundary_tolerance(x);
    chart_of(i, x, tol)?;
    Ok(flux_unchecked(a, &x.coords(), i.index()))
}

#[inline]
pub(crate) fn flux_unchecked(a: f64, x: &[f64; 3], i: usize) -> f64 {
    let f = symmetric_field(a, x);
    let g = grad_gamma_raw(i, x);
    f[0] * g[0] + f[1] * g[1] + f[2] * g[2]
}

/// Flux at a charted cone point.
pub fn flux_at_chart(a: f64, chart: &ConeChart) -> Result<f64> {
    let x = cone_point(chart)?;
    Ok(flux_unchecked(a, &x.coords(), chart.i.index()))
}

/// The printed factorization `12 t nu (nu - 1) (G a - H)`.
pub fn flux_factorized_printed(a: f64, chart: &ConeChart) -> f64 {
    let (g, h, _) = g_h_f(chart.nu).expect("chart nu > 1");
    12.0 * chart.t * chart.nu * (chart.nu - 1.0) * (g * a - h)
}

/// Factorization of the directly computed flux of the symmetric field:
/// `24 t (nu - 1) / mu (G a - H)`. Same sign as the printed form.
pub fn flux_factorized(a: f64, chart: &ConeChart) -> f64 {
    let (g, h, _) = g_h_f(chart.nu).expect("chart nu > 1");
    24.0 * chart.t * (chart.nu - 1.0) / chart.mu * (g * a - h)
}

/// Flux samples over a cone-chart grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxCertificate {
    pub a: f64,
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    /// Every sample strictly negative.
    pub all_negative: bool,
    /// Every sample strictly positive.
    pub all_positive: bool,
}

/// Evaluates the direct flux on `n_nu x n_t` chart points of all three cones,
/// log-spaced over `nu - 1` in `[1e-6, 1e3]` and `t` in `[1e-3, 1e3]`.
pub fn flux_certificate(a: f64, n_nu: usize, n_t: usize) -> Result<FluxCertificate> {
    check_open("a", a, 0.0, 0.5, "(0, 1/2)")?;
    let logspace = |lo: f64, hi: f64, n: usize, k: usize| {
        if n <= 1 {
            lo
        } else {
            (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp()
        }
    };
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut samples = 0;
    for i in Axis::ALL {
        for p in 0..n_nu {
            let nu = 1.0 + logspace(1e-6, 1e3, n_nu, p);
            for q in 0..n_t {
                let t = logspace(1e-3, 1e3, n_t, q);
                // normalise by t so that the grid extremes are comparable
                let v = flux_at_chart(a, &ConeChart::new(i, nu, t)?)? / t;
                min = min.min(v);
                max = max.max(v);
                samples += 1;
            }
        }
    }
    Ok(FluxCertificate {
        a,
        samples,
        min,
        max,
        all_negative: max < 0.0,
        all_positive: min > 0.0,
    })
}
