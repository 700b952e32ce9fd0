//! The positive-curvature set `S`, its boundary cones, the invariant curves
//! `I_i` and the planar boundary curves on the surface `x1 x2 x3 = c`.
//!
//! `S` is cut out by `gamma_i > 0` for `i = 1, 2, 3`, where
//! `gamma_i = (x_j - x_k)^2 + 2 x_i (x_j + x_k) - 3 x_i^2`. Each `gamma_i` is a
//! quadratic form, so tolerances scale with `(x1 + x2 + x3)^2`.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::model::{Axis, Point3, Vec3};
use crate::roots::bisect;

/// Default relative boundary tolerance `eps` in `eps * (x1 + x2 + x3)^2`.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// Relative tolerance used by the diagonal flag.
pub const DIAGONAL_EPS: f64 = 1e-12;

#[inline]
pub(crate) fn gamma_raw(i: usize, x: &[f64; 3]) -> f64 {
    let (xi, xj, xk) = (x[i], x[(i + 1) % 3], x[(i + 2) % 3]);
    let d = xj - xk;
    d * d + 2.0 * xi * (xj + xk) - 3.0 * xi * xi
}

#[inline]
pub(crate) fn gamma_all_raw(x: &[f64; 3]) -> [f64; 3] {
    [gamma_raw(0, x), gamma_raw(1, x), gamma_raw(2, x)]
}

#[inline]
pub(crate) fn grad_gamma_raw(i: usize, x: &[f64; 3]) -> [f64; 3] {
    let j = (i + 1) % 3;
    let k = (i + 2) % 3;
    let (xi, xj, xk) = (x[i], x[j], x[k]);
    let mut g = [0.0; 3];
    g[i] = 2.0 * (xj + xk) - 6.0 * xi;
    g[j] = 2.0 * (xj - xk) + 2.0 * xi;
    g[k] = -2.0 * (xj - xk) + 2.0 * xi;
    g
}

/// `gamma_i(x)`.
pub fn gamma(i: Axis, x: &Point3) -> f64 {
    gamma_raw(i.index(), &x.coords())
}

/// `(gamma_1, gamma_2, gamma_3)`.
pub fn gamma_all(x: &Point3) -> [f64; 3] {
    gamma_all_raw(&x.coords())
}

/// Gradient of `gamma_i`; the normal of the cone `Gamma_i`.
pub fn grad_gamma(i: Axis, x: &Point3) -> Vec3 {
    Vec3(grad_gamma_raw(i.index(), &x.coords()))
}

/// `BOUNDARY_EPS * (x1 + x2 + x3)^2`.
pub fn boundary_tolerance(x: &Point3) -> f64 {
    let s = x.scale();
    BOUNDARY_EPS * s * s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "cone", rename_all = "snake_case")]
pub enum RegionKind {
    Interior,
    Boundary(Axis),
    Exterior,
}

impl RegionKind {
    /// Short label: `interior`, `boundary1..3`, `exterior`.
    pub fn label(&self) -> String {
        match self {
            RegionKind::Interior => "interior".into(),
            RegionKind::Boundary(i) => format!("boundary{}", i.number()),
            RegionKind::Exterior => "exterior".into(),
        }
    }
}

/// Position of a point relative to `S`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionClass {
    pub kind: RegionKind,
    pub gammas: [f64; 3],
    /// The point lies on the ray `x1 = x2 = x3`, which `S` excludes.
    pub on_diagonal: bool,
}

pub(crate) fn classify_raw(x: &[f64; 3], tol: f64) -> RegionClass {
    let gammas = gamma_all_raw(x);
    let kind = if gammas.iter().any(|&g| g < -tol) {
        RegionKind::Exterior
    } else if let Some(i) = gammas.iter().position(|&g| g.abs() <= tol) {
        RegionKind::Boundary(Axis::ALL[i])
    } else {
        RegionKind::Interior
    };
    let s = x[0] + x[1] + x[2];
    let dtol = DIAGONAL_EPS * s;
    let on_diagonal =
        (x[0] - x[1]).abs() <= dtol && (x[1] - x[2]).abs() <= dtol && (x[0] - x[2]).abs() <= dtol;
    RegionClass {
        kind,
        gammas,
        on_diagonal,
    }
}

/// Exterior if some `gamma_i < -tol`, else `Boundary(i)` if `|gamma_i| <= tol`,
/// else Interior. Points on the diagonal ray are Interior with the flag set.
pub fn classify_region(x: &Point3, tol: f64) -> RegionClass {
    classify_raw(&x.coords(), tol.max(0.0))
}

/// The two roots of `gamma_i = 0` in `x_i`: `(Psi, Phi)` with `Psi <= 0 < Phi`.
/// For positive `x_i`, `gamma_i > 0` exactly when `x_i < Phi`.
pub fn psi_phi(xj: f64, xk: f64) -> (f64, f64) {
    let r = (xj * xj - xj * xk + xk * xk).sqrt();
    ((xj + xk - 2.0 * r) / 3.0, (xj + xk + 2.0 * r) / 3.0)
}

/// `mu(nu) = 1 - nu + 2 sqrt(nu (nu - 1))`.
#[inline]
pub fn chart_mu(nu: f64) -> f64 {
    1.0 - nu + 2.0 * (nu * (nu - 1.0)).sqrt()
}

/// Chart of the cone `Gamma_i`: `x_i = nu t`, `x_j = mu t`, `x_k = t` with
/// `(j, k)` the cyclic successors of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeChart {
    pub i: Axis,
    pub nu: f64,
    pub t: f64,
    pub mu: f64,
}

impl ConeChart {
    pub fn new(i: Axis, nu: f64, t: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 1.0) {
            return Err(Error::OutOfRange {
                name: "nu",
                value: nu,
                range: "(1, inf)",
            });
        }
        check_positive("t", t)?;
        let mu = chart_mu(nu);
        if mu.is_nan() || mu <= 0.0 {
            return Err(Error::OutOfRange {
                name: "nu",
                value: nu,
                range: "(1, inf)",
            });
        }
        Ok(ConeChart { i, nu, t, mu })
    }
}

/// The charted point on `Gamma_i`.
pub fn cone_point(chart: &ConeChart) -> Result<Point3> {
    let i = chart.i.index();
    let mut x = [0.0; 3];
    x[i] = chart.nu * chart.t;
    x[(i + 1) % 3] = chart.mu * chart.t;
    x[(i + 2) % 3] = chart.t;
    Point3::from_array(x)
}

/// Chart coordinates of a point assumed to lie on `Gamma_i`:
/// `t = x_k`, `nu = x_i / x_k`. Fails if the point is off the cone.
pub fn chart_of(i: Axis, x: &Point3, tol: f64) -> Result<ConeChart> {
    let g = gamma(i, x);
    if g.abs() > tol {
        return Err(Error::NotOnCone {
            cone: i.number(),
            residual: g.abs(),
            tol,
        });
    }
    let (_, k) = i.others();
    let t = x.get(k);
    ConeChart::new(i, x.get(i) / t, t)
}

/// Point of the invariant curve `I_i`: `x_i = c p^-2`, `x_j = x_k = p`.
pub fn invariant_curve_point(i: Axis, c: f64, p: f64) -> Result<Point3> {
    check_positive("c", c)?;
    check_positive("p", p)?;
    let mut x = [p; 3];
    x[i.index()] = c / (p * p);
    Point3::from_array(x)
}

/// Parameter `t0 = cbrt(6c) / 2` where `I_i` meets `Gamma_i`.
pub fn curve_cone_parameter(c: f64) -> f64 {
    (6.0 * c).cbrt() / 2.0
}

/// The unique point of `I_i` on `Gamma_i`.
pub fn curve_cone_intersection(i: Axis, c: f64) -> Result<Point3> {
    check_positive("c", c)?;
    invariant_curve_point(i, c, curve_cone_parameter(c))
}

/// Distance from `x` to the curve `I_i` of the surface `x1 x2 x3 = c`,
/// relative to `x1 + x2 + x3`. The curve point with `p = sqrt(x_j x_k)` is
/// used, which is the nearest one to first order.
pub fn distance_to_invariant_curve(i: Axis, c: f64, x: &Point3) -> f64 {
    let (j, k) = i.others();
    let p = (x.get(j) * x.get(k)).sqrt();
    let mut y = [p; 3];
    y[i.index()] = c / (p * p);
    let d: f64 = x
        .coords()
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    d / x.scale()
}

/// Sign relating the printed sextics to the cones:
/// `l_i(x1, x2) = PLANAR_L_SIGN[i] (x1 x2)^2 gamma_i(x1, x2, c / (x1 x2))`.
pub const PLANAR_L_SIGN: [f64; 3] = [-1.0, -1.0, 1.0];

/// Planar boundary curve `l_i(x1, x2)` on the surface `x1 x2 x3 = c`, in its
/// printed form. See [`PLANAR_L_SIGN`] for the relation to `gamma_i`.
pub fn planar_l(i: Axis, c: f64, x1: f64, x2: f64) -> f64 {
    let (p1, p2) = (x1 * x1, x2 * x2);
    let c2 = c * c;
    match i {
        Axis::X1 => {
            3.0 * p1 * p1 * p2 - 2.0 * p1 * x1 * p2 * x2 - p1 * p2 * p2 - 2.0 * c * p1 * x2
                + 2.0 * c * x1 * p2
                - c2
        }
        Axis::X2 => {
            3.0 * p1 * p2 * p2 - 2.0 * p1 * x1 * p2 * x2 - p1 * p1 * p2 - 2.0 * c * x1 * p2
                + 2.0 * c * p1 * x2
                - c2
        }
        Axis::X3 => {
            p1 * p1 * p2 - 2.0 * p1 * x1 * p2 * x2 + p1 * p2 * p2 + 2.0 * c * p1 * x2
                + 2.0 * c * x1 * p2
                - 3.0 * c2
        }
    }
}

/// Parameterization of the curve `s1 = {l1 = 0}` on `x1 x2 x3 = 1`, `t > 1`:
/// `x2 = u^(1/3)`, `x1 = t x2` with
/// `u = (t - 1 + 2 sqrt(t (t - 1))) / ((3t + 1)(t - 1) t)`.
pub fn s1_param(t: f64) -> Result<(f64, f64)> {
    if !(t.is_finite() && t > 1.0) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            range: "(1, inf)",
        });
    }
    let u = (t - 1.0 + 2.0 * (t * (t - 1.0)).sqrt()) / ((3.0 * t + 1.0) * (t - 1.0) * t);
    let x2 = u.cbrt();
    Ok((t * x2, x2))
}

/// Derivative of [`s1_param`] with respect to `t`.
pub fn s1_param_derivative(t: f64) -> Result<(f64, f64)> {
    let (_, x2) = s1_param(t)?;
    let r = (t * (t - 1.0)).sqrt();
    let num = t - 1.0 + 2.0 * r;
    let den = (3.0 * t + 1.0) * (t - 1.0) * t;
    let dnum = 1.0 + (2.0 * t - 1.0) / r;
    // d/dt of 3t^3 - 2t^2 - t
    let dden = 9.0 * t * t - 4.0 * t - 1.0;
    let du_over_u = dnum / num - dden / den;
    let dx2 = x2 * du_over_u / 3.0;
    Ok((x2 + t * dx2, dx2))
}

/// A sampled point of a planar boundary curve `s_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub cone: Axis,
    pub x1: f64,
    pub x2: f64,
}

/// Traces the boundary of the planar domain `D = S ∩ {x1 x2 x3 = c}` by
/// root-finding along `n_rays` rays `ln x = ln c^(1/3) + r (cos th, sin th)`
/// for `r` up to `r_max`. Each root is tagged with the cone that vanishes
/// there. Rays that stay inside up to `r_max` contribute nothing.
pub fn trace_planar_boundary(c: f64, n_rays: usize, r_max: f64) -> Result<Vec<CurveSample>> {
    check_positive("c", c)?;
    check_positive("r_max", r_max)?;
    let base = c.cbrt().ln();
    let point = |th: f64, r: f64| {
        let x1 = (base + r * th.cos()).exp();
        let x2 = (base + r * th.sin()).exp();
        [x1, x2, c / (x1 * x2)]
    };
    let margin = |x: &[f64; 3]| {
        let s = x[0] + x[1] + x[2];
        gamma_all_raw(x).iter().cloned().fold(f64::INFINITY, f64::min) / (s * s)
    };
    let mut out = Vec::new();
    let steps = 400;
    for n in 0..n_rays {
        let th = 2.0 * std::f64::consts::PI * n as f64 / n_rays as f64;
        let mut prev = 0.0;
        for s in 1..=steps {
            let r = r_max * s as f64 / steps as f64;
            if margin(&point(th, r)) <= 0.0 {
                let root = bisect(|r| margin(&point(th, r)), prev, r, 1e-13, "planar boundary")?;
                let x = point(th, root);
                let g = gamma_all_raw(&x);
                let i = (0..3)
                    .min_by(|&a, &b| g[a].abs().total_cmp(&g[b].abs()))
                    .unwrap_or(0);
                out.push(CurveSample {
                    cone: Axis::ALL[i],
                    x1: x[0],
                    x2: x[1],
                });
                break;
            }
            prev = r;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: f64, b: f64, c: f64) -> Point3 {
        Point3::new(a, b, c).unwrap()
    }

    #[test]
    fn gamma_values() {
        for i in Axis::ALL {
            assert_eq!(gamma(i, &pt(1.0, 1.0, 1.0)), 1.0);
        }
        assert!(gamma(Axis::X3, &pt(1.0, 1.0, 4.0 / 3.0)).abs() < 1e-15);
        assert_eq!(gamma(Axis::X3, &pt(1.0, 1.0, 10.0)), -260.0);
    }

    #[test]
    fn classification_examples() {
        let r = classify_region(&pt(1.0, 1.0, 1.0), 1e-9);
        assert_eq!(r.kind, RegionKind::Interior);
        assert!(r.on_diagonal);
        let x = pt(1.0, 1.0, 4.0 / 3.0);
        let r = classify_region(&x, boundary_tolerance(&x));
        assert_eq!(r.kind, RegionKind::Boundary(Axis::X3));
        assert!(!r.on_diagonal);
        let r = classify_region(&pt(1.0, 1.0, 10.0), 1e-9);
        assert_eq!(r.kind, RegionKind::Exterior);
    }

    #[test]
    fn psi_phi_examples() {
        assert_eq!(psi_phi(1.0, 1.0), (0.0, 4.0 / 3.0));
        let (psi, phi) = psi_phi(2.0, 1.0);
        assert!((phi - (3.0 + 2.0 * 3f64.sqrt()) / 3.0).abs() < 1e-15);
        assert!(psi < 0.0);
        assert!(gamma(Axis::X1, &pt(phi, 2.0, 1.0)).abs() < 1e-13);
        let (psi, _) = psi_phi(1.0, 1e-12);
        assert!((psi + 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn gradient_examples() {
        let g = grad_gamma(Axis::X3, &pt(1.0, 1.0, 4.0 / 3.0));
        assert!((g.0[2] + 4.0).abs() < 1e-14);
        assert_eq!(grad_gamma(Axis::X3, &pt(1.0, 1.0, 1.0)).0, [2.0, 2.0, -2.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = [0.7, 1.9, 1.3];
        for i in 0..3 {
            let g = grad_gamma_raw(i, &x);
            for l in 0..3 {
                let h = 1e-6;
                let mut p = x;
                let mut m = x;
                p[l] += h;
                m[l] -= h;
                let fd = (gamma_raw(i, &p) - gamma_raw(i, &m)) / (2.0 * h);
                assert!((fd - g[l]).abs() < 1e-8, "i={i} l={l}");
            }
        }
    }

    #[test]
    fn chart_examples() {
        let t = 0.8;
        let p = cone_point(&ConeChart::new(Axis::X2, 4.0 / 3.0, t).unwrap()).unwrap();
        assert!((p.x2() - 4.0 * t / 3.0).abs() < 1e-15);
        assert!((p.x3() - t).abs() < 1e-15 && (p.x1() - t).abs() < 1e-15);

        let ch = ConeChart::new(Axis::X3, 2.0, 1.0).unwrap();
        assert!((ch.mu - (2.0 * 2f64.sqrt() - 1.0)).abs() < 1e-15);
        let p = cone_point(&ch).unwrap();
        assert!(gamma(Axis::X3, &p).abs() < 1e-12);
        let back = chart_of(Axis::X3, &p, 1e-9).unwrap();
        assert!((back.nu - 2.0).abs() < 1e-15 && (back.t - 1.0).abs() < 1e-15);

        assert!(ConeChart::new(Axis::X1, 1.0, 1.0).is_err());
        let near = ConeChart::new(Axis::X1, 1.0 + 1e-12, 1.0).unwrap();
        assert!(near.mu > 0.0 && near.mu < 1e-5);
    }

    #[test]
    fn invariant_curve_examples() {
        assert_eq!(invariant_curve_point(Axis::X3, 1.0, 1.0).unwrap().coords(), [1.0; 3]);
        assert_eq!(
            invariant_curve_point(Axis::X3, 1.0, 2.0).unwrap().coords(),
            [2.0, 2.0, 0.25]
        );
        let p = curve_cone_intersection(Axis::X1, 1.0).unwrap();
        let t0 = 6f64.cbrt() / 2.0;
        assert!((p.x2() - t0).abs() < 1e-15);
        assert!((p.x1() - 4.0 * t0 / 3.0).abs() < 1e-14);
        assert!((t0 - 0.908560296416069).abs() < 1e-12);
        let r = classify_region(&p, boundary_tolerance(&p));
        assert_eq!(r.kind, RegionKind::Boundary(Axis::X1));
        assert!(r.gammas[1] > 0.0 && r.gammas[2] > 0.0);
        let p = curve_cone_intersection(Axis::X2, 8.0 / 6.0).unwrap();
        assert!((p.x1() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn planar_l_matches_gamma() {
        let c = 1.7;
        for &(x1, x2) in &[(0.3, 2.1), (1.0, 1.0), (4.0, 0.2), (1.3, 1.1)] {
            let x = [x1, x2, c / (x1 * x2)];
            for i in Axis::ALL {
                let lhs = planar_l(i, c, x1, x2);
                let rhs = PLANAR_L_SIGN[i.index()] * (x1 * x2).powi(2) * gamma_raw(i.index(), &x);
                assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "{i:?} {lhs} {rhs}");
            }
        }
        assert_eq!(planar_l(Axis::X3, 1.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn s1_lies_on_l1() {
        for &t in &[1.0001, 1.2, 4.0 / 3.0, 2.0, 10.0, 1e4] {
            let (x1, x2) = s1_param(t).unwrap();
            let scale = (x1 * x2).powi(2) * (x1 + x2 + 1.0 / (x1 * x2)).powi(2);
            assert!(planar_l(Axis::X1, 1.0, x1, x2).abs() <= 1e-9 * scale, "t={t}");
        }
        assert!(s1_param(1.0).is_err());
    }

    #[test]
    fn s1_derivative_matches_finite_differences() {
        for &t in &[1.1, 1.5, 3.0] {
            let (d1, d2) = s1_param_derivative(t).unwrap();
            let h = 1e-6;
            let (a1, a2) = s1_param(t + h).unwrap();
            let (b1, b2) = s1_param(t - h).unwrap();
            assert!((d1 - (a1 - b1) / (2.0 * h)).abs() < 1e-7);
            assert!((d2 - (a2 - b2) / (2.0 * h)).abs() < 1e-7);
        }
    }

    #[test]
    fn traced_boundary_points_vanish() {
        let pts = trace_planar_boundary(1.0, 90, 6.0).unwrap();
        assert!(pts.len() > 30);
        for s in [Axis::X1, Axis::X2, Axis::X3] {
            assert!(pts.iter().any(|p| p.cone == s));
        }
        for p in &pts {
            let l = planar_l(p.cone, 1.0, p.x1, p.x2);
            let x = [p.x1, p.x2, 1.0 / (p.x1 * p.x2)];
            let s = x[0] + x[1] + x[2];
            assert!(l.abs() <= 1e-9 * (p.x1 * p.x2).powi(2) * s * s);
        }
    }
}
