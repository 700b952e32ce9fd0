//! Power-law asymptotics near the degenerate parameter `a = 1/4`, in the
//! chart `x = x3 / x1`, `y = x3 / x2` of the surface `x1 x2 x3 = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::roots::bisect;

/// Exponent `1/2 - 1/(4a)` of the asymptotic solution.
pub fn asymptotic_exponent(a: f64) -> f64 {
    0.5 - 1.0 / (4.0 * a)
}

fn check_x(x: f64, what: &'static str) -> Result<()> {
    if !(x.is_finite() && x > 1.0) {
        return Err(Error::Pole { what, at: 1.0 });
    }
    Ok(())
}

/// `y_a = C (x - 1)^(1/2 - 1/(4a))`.
pub fn asymptotic_solution(a: f64, c: f64, x: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("C", c)?;
    check_x(x, "asymptotic solution")?;
    Ok(c * (x - 1.0).powf(asymptotic_exponent(a)))
}

/// Coefficient `C` such that the asymptotic solution passes through `(x0, y0)`.
pub fn calibrate_coefficient(a: f64, x0: f64, y0: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("y0", y0)?;
    check_x(x0, "asymptotic solution")?;
    Ok(y0 / (x0 - 1.0).powf(asymptotic_exponent(a)))
}

/// Boundary curve `l3 = 0` in the chart:
/// `y_b = x (x - 1 + 2 sqrt(x (x - 1))) / ((3x + 1)(x - 1))`.
pub fn boundary_asymptote(x: f64) -> Result<f64> {
    check_x(x, "boundary curve")?;
    Ok(boundary_raw(x))
}

#[inline]
pub(crate) fn boundary_raw(x: f64) -> f64 {
    x * (x - 1.0 + 2.0 * (x * (x - 1.0)).sqrt()) / ((3.0 * x + 1.0) * (x - 1.0))
}

/// `dy/dx` of the planar flow in the chart at parameter `a`:
/// `(y - 1)(y - 2a x (y + 1)) / ((x - 1)(x - 2a y (x + 1)))`.
///
/// Follows from `d ln(x_i / x_j)/dt = 3 (x_i - x_j)(x_k - 2a(x_i + x_j)) / (x1 x2 x3)`.
#[inline]
pub fn chart_slope(a: f64, x: f64, y: f64) -> f64 {
    (y - 1.0) * (y - 2.0 * a * x * (y + 1.0)) / ((x - 1.0) * (x - 2.0 * a * y * (x + 1.0)))
}

/// Chart slope computed from the symmetric field at the corresponding point,
/// `y (f3/x3 - f2/x2) / (x (f3/x3 - f1/x1))`. Cross-check for [`chart_slope`].
pub fn chart_slope_from_field(a: f64, x: f64, y: f64) -> f64 {
    let x3 = (x * y).cbrt();
    let p = [x3 / x, x3 / y, x3];
    let f = crate::model::symmetric_field(a, &p);
    let r = [f[0] / p[0], f[1] / p[1], f[2] / p[2]];
    y * (r[2] - r[1]) / (x * (r[2] - r[0]))
}

/// Intersection of the calibrated asymptotic solution with the boundary curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteHit {
    pub x: f64,
    pub y: f64,
}

/// Solves `C (x-1)^e = y_b(x)` for `x` in `(1 + lo, 1 + hi)` by bisection on
/// `ln(x - 1)`.
pub fn asymptote_boundary_intersection(a: f64, c: f64, lo: f64, hi: f64) -> Result<AsymptoteHit> {
    let h = |s: f64| {
        let x = 1.0 + s.exp();
        (c * (x - 1.0).powf(asymptotic_exponent(a))).ln() - boundary_raw(x).ln()
    };
    let s = bisect(h, lo.ln(), hi.ln(), 1e-14, "asymptote/boundary intersection")?;
    let x = 1.0 + s.exp();
    Ok(AsymptoteHit {
        x,
        y: boundary_raw(x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        assert!((asymptotic_exponent(0.26) + 0.461_538_461_5).abs() < 1e-10);
        assert_eq!(asymptotic_exponent(0.25), -0.5);
        assert!((asymptotic_exponent(0.3) + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn calibration_at_026() {
        let c = calibrate_coefficient(0.26, 1.0 + 1e-3, 20.0).unwrap();
        assert!((c - 0.824_925_276_9).abs() < 1e-9, "{c}");
        let y = asymptotic_solution(0.26, c, 1.0 + 1e-3).unwrap();
        assert!((y - 20.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_examples() {
        let y = boundary_asymptote(2.0).unwrap();
        assert!((y - 2.0 * (1.0 + 2.0 * 2f64.sqrt()) / 7.0).abs() < 1e-15);
        let x = 1.0 + 1e-6;
        let y = boundary_asymptote(x).unwrap();
        assert!((y / 500.0 - 1.0).abs() < 1e-2);
        assert!(matches!(boundary_asymptote(1.0), Err(Error::Pole { .. })));
        // l3 vanishes on the curve
        for &x in &[1.01, 1.5, 3.0] {
            let y = boundary_raw(x);
            let x3 = (x * y).cbrt();
            let l = crate::geometry::planar_l(crate::model::Axis::X3, 1.0, x3 / x, x3 / y);
            assert!(l.abs() < 1e-10, "x={x} l={l}");
        }
    }

    #[test]
    fn chart_slope_matches_field() {
        for &(a, x, y) in &[(0.26, 1.001, 20.0), (0.25, 1.5, 2.5), (0.1, 2.0, 1.3)] {
            let s = chart_slope(a, x, y);
            let d = chart_slope_from_field(a, x, y);
            assert!((s - d).abs() <= 1e-9 * s.abs(), "{s} {d}");
        }
    }
}
