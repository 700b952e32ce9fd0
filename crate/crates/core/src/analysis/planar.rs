//! The flow restricted to `x1 x2 x3 = 1` and projected to `(x1, x2)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_open, check_positive, Error, Result};
use crate::geometry::{s1_param, s1_param_derivative};
use crate::roots::golden_max;

use super::equilibria::equilibria;

/// `a` used by the slope and angle diagnostics along `s1`.
pub const TANGENCY_A: f64 = 3.0 / 14.0;

/// Parameter of `s1` at which it passes through the projection of `o1`.
pub const S1_SINGULAR_T: f64 = 4.0 / 3.0;

/// Planar field on raw coordinates, in its printed form:
/// `f = x1/x2 + x1^2 x2 - 2a x1 (2 x1^2 - x2^2 - x1^-2 x2^-2) - 2` and the
/// mirror expression for `g`.
#[inline]
pub fn planar_field_raw(a: f64, x1: f64, x2: f64) -> (f64, f64) {
    let w = 1.0 / (x1 * x1 * x2 * x2);
    let f = x1 / x2 + x1 * x1 * x2 - 2.0 * a * x1 * (2.0 * x1 * x1 - x2 * x2 - w) - 2.0;
    let g = x2 / x1 + x1 * x2 * x2 - 2.0 * a * x2 * (2.0 * x2 * x2 - x1 * x1 - w) - 2.0;
    (f, g)
}

pub fn planar_field(a: f64, x1: f64, x2: f64) -> Result<(f64, f64)> {
    check_open("a", a, 0.0, 0.5, "(0, 1/2)")?;
    check_positive("x1", x1)?;
    check_positive("x2", x2)?;
    Ok(planar_field_raw(a, x1, x2))
}

/// Analytic Jacobian of [`planar_field_raw`].
pub fn planar_jacobian(a: f64, x1: f64, x2: f64) -> [[f64; 2]; 2] {
    let w1 = 1.0 / (x1 * x1 * x2 * x2);
    let f1 = 1.0 / x2 + 2.0 * x1 * x2 - 12.0 * a * x1 * x1 + 2.0 * a * x2 * x2 - 2.0 * a * w1;
    let f2 = -x1 / (x2 * x2) + x1 * x1 + 4.0 * a * x1 * x2 - 4.0 * a * w1 * x1 / x2;
    let g1 = -x2 / (x1 * x1) + x2 * x2 + 4.0 * a * x1 * x2 - 4.0 * a * w1 * x2 / x1;
    let g2 = 1.0 / x1 + 2.0 * x1 * x2 - 12.0 * a * x2 * x2 + 2.0 * a * x1 * x1 - 2.0 * a * w1;
    [[f1, f2], [g1, g2]]
}

/// Central-difference Jacobian of [`planar_field_raw`].
pub fn planar_jacobian_fd(a: f64, x1: f64, x2: f64, h: f64) -> [[f64; 2]; 2] {
    let (h1, h2) = (h * x1, h * x2);
    let (fp, gp) = planar_field_raw(a, x1 + h1, x2);
    let (fm, gm) = planar_field_raw(a, x1 - h1, x2);
    let (fq, gq) = planar_field_raw(a, x1, x2 + h2);
    let (fr, gr) = planar_field_raw(a, x1, x2 - h2);
    [
        [(fp - fm) / (2.0 * h1), (fq - fr) / (2.0 * h2)],
        [(gp - gm) / (2.0 * h1), (gq - gr) / (2.0 * h2)],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanarKind {
    StableNode,
    UnstableNode,
    Saddle,
}

/// Linearization data at a projected equilibrium on `c = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarClass {
    pub a: f64,
    pub which: usize,
    pub point: (f64, f64),
    /// Closed-form determinant: `(4a-1)^2` at `(1, 1)`,
    /// `(2a+1)(4a-1)^2 / ((2a-1) q^2)` at the saddles.
    pub delta: f64,
    /// Closed-form trace at `(1, 1)`: `-2(4a-1)`. Not given for saddles.
    pub rho: Option<f64>,
    /// `rho^2 - 4 delta` at `(1, 1)`.
    pub sigma: Option<f64>,
    pub kind: PlanarKind,
}

/// Closed forms in the time scale of the general field. The determinant of
/// [`planar_jacobian`] is `9 delta` and its trace `3 rho`.
pub fn planar_classification(a: f64, which: usize) -> Result<PlanarClass> {
    check_open("a", a, 0.0, 0.5, "(0, 1/2)")?;
    if (a - 0.25).abs() <= 1e-15 {
        return Err(Error::Degenerate("delta = rho = sigma = 0"));
    }
    let set = equilibria(a, 1.0)?;
    let x = set
        .points
        .get(which)
        .ok_or(Error::OutOfRange {
            name: "which",
            value: which as f64,
            range: "{0, 1, 2, 3}",
        })?
        .coords();
    let d = 4.0 * a - 1.0;
    Ok(if which == 0 {
        let rho = -2.0 * d;
        let delta = d * d;
        PlanarClass {
            a,
            which,
            point: (x[0], x[1]),
            delta,
            rho: Some(rho),
            sigma: Some(rho * rho - 4.0 * delta),
            kind: if rho < 0.0 {
                PlanarKind::StableNode
            } else {
                PlanarKind::UnstableNode
            },
        }
    } else {
        let q = set.q;
        PlanarClass {
            a,
            which,
            point: (x[0], x[1]),
            delta: (2.0 * a + 1.0) * d * d / ((2.0 * a - 1.0) * q * q),
            rho: None,
            sigma: None,
            kind: PlanarKind::Saddle,
        }
    })
}

fn check_t(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 1.0) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            range: "(1, inf)",
        });
    }
    if (t - S1_SINGULAR_T).abs() <= 1e-12 {
        return Err(Error::Pole {
            what: "field along s1",
            at: S1_SINGULAR_T,
        });
    }
    Ok(())
}

/// Tangent of `s1` and the planar field at `a = 3/14`, at parameter `t`.
fn s1_vectors(t: f64) -> Result<((f64, f64), (f64, f64))> {
    check_t(t)?;
    let (x1, x2) = s1_param(t)?;
    let tau = s1_param_derivative(t)?;
    Ok((tau, planar_field_raw(TANGENCY_A, x1, x2)))
}

/// `Delta(t) = x2'/x1' - g/f` along `s1` at `a = 3/14`.
pub fn slope_gap(t: f64) -> Result<f64> {
    let ((t1, t2), (f, g)) = s1_vectors(t)?;
    Ok(t2 / t1 - g / f)
}

/// Angle in radians between the planar field and the tangent of `s1` at
/// `a = 3/14`.
pub fn angle_alpha(t: f64) -> Result<f64> {
    let ((t1, t2), (f, g)) = s1_vectors(t)?;
    let cross = f * t2 - g * t1;
    let dot = f * t1 + g * t2;
    Ok(cross.abs().atan2(dot))
}

/// Extremes of `alpha` on both sides of `t = 4/3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBounds {
    /// `(t, alpha)` minimizing alpha on `(1, 4/3)`.
    pub min_below: (f64, f64),
    /// `(t, alpha)` maximizing alpha on `(4/3, inf)`.
    pub max_above: (f64, f64),
}

/// Grid search followed by golden-section refinement.
pub fn alpha_bounds() -> Result<AlphaBounds> {
    fn refine<F: Fn(f64) -> f64>(h: F, s_lo: f64, s_hi: f64, n: usize) -> (f64, f64) {
        let mut best = (s_lo, f64::NEG_INFINITY);
        for k in 0..=n {
            let s = s_lo + (s_hi - s_lo) * k as f64 / n as f64;
            let v = h(s);
            if v > best.1 {
                best = (s, v);
            }
        }
        let w = (s_hi - s_lo) / n as f64;
        golden_max(&h, (best.0 - w).max(s_lo), (best.0 + w).min(s_hi), 1e-12)
    }
    // below: parameterize t = 1 + (1/3) sigmoid(s); minimize alpha
    let below = |s: f64| {
        let t = 1.0 + (1.0 / 3.0) / (1.0 + (-s).exp());
        -angle_alpha(t).unwrap_or(std::f64::consts::PI)
    };
    let (s_b, v_b) = refine(below, -25.0, 25.0, 2000);
    let t_b = 1.0 + (1.0 / 3.0) / (1.0 + (-s_b).exp());
    // above: t = 4/3 + exp(s)
    let above = |s: f64| angle_alpha(S1_SINGULAR_T + s.exp()).unwrap_or(0.0);
    let (s_a, v_a) = refine(above, -25.0, 25.0, 2000);
    Ok(AlphaBounds {
        min_below: (t_b, -v_b),
        max_above: (S1_SINGULAR_T + s_a.exp(), v_a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::symmetric_field;

    #[test]
    fn matches_projected_field() {
        for &(a, x1, x2) in &[(0.1, 0.7, 1.9), (0.3, 2.0, 0.4), (0.22, 1.0, 1.0)] {
            let (f, g) = planar_field(a, x1, x2).unwrap();
            let v = symmetric_field(a, &[x1, x2, 1.0 / (x1 * x2)]);
            assert!((f - v[0]).abs() <= 1e-12 * (1.0 + v[0].abs()));
            assert!((g - v[1]).abs() <= 1e-12 * (1.0 + v[1].abs()));
        }
    }

    #[test]
    fn symmetric_line_is_invariant() {
        let (f, g) = planar_field(0.25, 1.7, 1.7).unwrap();
        assert_eq!(f, g);
        let (f, _) = planar_field(0.3, 1.0, 1.0).unwrap();
        assert!(f.abs() < 1e-15);
        // along c3 the planar field is three times the closed form of I3
        let (f, g) = planar_field(1.0 / 6.0, 2.0, 2.0).unwrap();
        assert!((f - 35.0 / 8.0).abs() < 1e-13 && (g - 35.0 / 8.0).abs() < 1e-13);
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        for &(a, x1, x2) in &[(0.1, 0.7, 1.9), (0.3, 2.0, 0.4), (0.22, 1.3, 1.1)] {
            let j = planar_jacobian(a, x1, x2);
            let d = planar_jacobian_fd(a, x1, x2, 1e-6);
            for r in 0..2 {
                for c in 0..2 {
                    assert!((j[r][c] - d[r][c]).abs() < 1e-6 * (1.0 + j[r][c].abs()));
                }
            }
        }
    }

    #[test]
    fn classification_examples() {
        let p = planar_classification(0.125, 0).unwrap();
        assert_eq!((p.delta, p.rho, p.sigma), (0.25, Some(1.0), Some(0.0)));
        assert_eq!(p.kind, PlanarKind::UnstableNode);
        let p = planar_classification(0.125, 3).unwrap();
        assert!((p.delta + 0.866_701_592_938_293_3).abs() < 1e-12, "{}", p.delta);
        assert_eq!(p.kind, PlanarKind::Saddle);
        let p = planar_classification(0.3, 0).unwrap();
        assert!((p.rho.unwrap() + 0.4).abs() < 1e-15);
        assert_eq!(p.kind, PlanarKind::StableNode);
        assert!(matches!(planar_classification(0.25, 0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn slope_gap_signs() {
        assert!(slope_gap(1.2).unwrap() > 0.0);
        assert!(slope_gap(2.0).unwrap() < 0.0);
        assert!(matches!(slope_gap(4.0 / 3.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn alpha_extremes() {
        let b = alpha_bounds().unwrap();
        assert!(b.min_below.1 >= 3.1125 && b.min_below.1 < std::f64::consts::PI);
        assert!((b.max_above.1 - 0.0210694).abs() < 1e-6, "{:?}", b);
    }
}
