//! Vector fields, first integral and Jacobians of the normalized Ricci flow
//! on generalized Wallach spaces.
//!
//! Two parameterizations are provided. The general field takes a triple
//! `(a1, a2, a3)` and is evaluated term by term in its printed form, including
//! the `B` normalization term. The symmetric field (`a1 = a2 = a3 = a`) is the
//! one integrated everywhere else in the crate.
//!
//! The general field restricted to `a1 = a2 = a3 = a` equals one third of the
//! symmetric field: both describe the same orbits, the symmetric one runs three
//! times faster. [`GENERAL_TIME_SCALE`] records that factor.

use serde::{Deserialize, Serialize};

use crate::error::{check_open, Error, Result};
use crate::linalg::Mat3;

/// Coordinates must exceed this value to be accepted as a phase point.
pub const MIN_COORDINATE: f64 = 1e-300;

/// Ratio between the symmetric field and the general field with equal
/// parameters: `symmetric(a, x) = GENERAL_TIME_SCALE * general(a, a, a, x)`.
pub const GENERAL_TIME_SCALE: f64 = 3.0;

/// One of the three coordinate slots; also indexes cones, invariant curves
/// and the equilibria `o1..o3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    /// Zero-based slot index.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    /// One-based label, as used in `gamma1`, `Gamma_2`, `o3`.
    #[inline]
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }

    pub fn from_number(n: usize) -> Option<Axis> {
        n.checked_sub(1).and_then(Axis::from_index)
    }

    /// The two remaining slots in cyclic order `(i+1, i+2)`.
    #[inline]
    pub fn others(self) -> (Axis, Axis) {
        let i = self.index();
        (Axis::ALL[(i + 1) % 3], Axis::ALL[(i + 2) % 3])
    }
}

/// A phase point with strictly positive coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3([f64; 3]);

impl Point3 {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        Self::from_array([x1, x2, x3])
    }

    pub fn from_array(x: [f64; 3]) -> Result<Self> {
        for (index, &value) in x.iter().enumerate() {
            if !(value.is_finite() && value > MIN_COORDINATE) {
                return Err(Error::NonPositiveCoordinate {
                    index: index + 1,
                    value,
                    min: MIN_COORDINATE,
                });
            }
        }
        Ok(Point3(x))
    }

    /// Skips validation; callers guarantee positivity.
    #[inline]
    pub(crate) fn from_array_unchecked(x: [f64; 3]) -> Self {
        debug_assert!(x.iter().all(|v| *v > 0.0), "non-positive point {x:?}");
        Point3(x)
    }

    /// The diagonal point `(t, t, t)`.
    pub fn diagonal(t: f64) -> Result<Self> {
        Self::new(t, t, t)
    }

    #[inline]
    pub fn x1(&self) -> f64 {
        self.0[0]
    }

    #[inline]
    pub fn x2(&self) -> f64 {
        self.0[1]
    }

    #[inline]
    pub fn x3(&self) -> f64 {
        self.0[2]
    }

    #[inline]
    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    #[inline]
    pub fn get(&self, axis: Axis) -> f64 {
        self.0[axis.index()]
    }

    /// `x1 + x2 + x3`, the length scale used by boundary tolerances.
    #[inline]
    pub fn scale(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    #[inline]
    pub fn product(&self) -> f64 {
        self.0[0] * self.0[1] * self.0[2]
    }

    /// Returns the point whose k-th coordinate is `self[perm[k]]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Point3 {
        Point3([self.0[perm[0]], self.0[perm[1]], self.0[perm[2]]])
    }
}

impl TryFrom<[f64; 3]> for Point3 {
    type Error = Error;

    fn try_from(x: [f64; 3]) -> Result<Self> {
        Point3::from_array(x)
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        p.0
    }
}

/// A real 3-vector: field values, gradients, eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const fn new(v1: f64, v2: f64, v3: f64) -> Self {
        Vec3([v1, v2, v3])
    }

    #[inline]
    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn sub(&self, other: &Vec3) -> Vec3 {
        Vec3([
            self.0[0] - other.0[0],
            self.0[1] - other.0[1],
            self.0[2] - other.0[2],
        ])
    }

    pub fn cross(&self, other: &Vec3) -> Vec3 {
        let (a, b) = (self.0, other.0);
        Vec3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }

    /// Unit vector in the same direction; zero stays zero.
    pub fn normalized(&self) -> Vec3 {
        let n = self.norm();
        if n > 0.0 {
            self.scaled(1.0 / n)
        } else {
            *self
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Vec3(v)
    }
}

/// Parameters of the flow: a full triple or the symmetric single value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SystemParams {
    General { a1: f64, a2: f64, a3: f64 },
    Symmetric { a: f64 },
}

fn check_a(name: &'static str, a: f64) -> Result<f64> {
    // (0, 1/2] written as an open check on (0, 1/2 + ulp)
    if a == 0.5 {
        return Ok(a);
    }
    check_open(name, a, 0.0, 0.5, "(0, 1/2]")
}

impl SystemParams {
    pub fn general(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        Ok(SystemParams::General {
            a1: check_a("a1", a1)?,
            a2: check_a("a2", a2)?,
            a3: check_a("a3", a3)?,
        })
    }

    /// Accepts `a` in `(0, 1/2]`; regime analysis further excludes `1/2`.
    pub fn symmetric(a: f64) -> Result<Self> {
        Ok(SystemParams::Symmetric {
            a: check_a("a", a)?,
        })
    }

    pub fn as_triple(&self) -> [f64; 3] {
        match *self {
            SystemParams::General { a1, a2, a3 } => [a1, a2, a3],
            SystemParams::Symmetric { a } => [a, a, a],
        }
    }

    pub fn field(&self, x: &Point3) -> Vec3 {
        match *self {
            SystemParams::General { a1, a2, a3 } => Vec3(general_field(&[a1, a2, a3], &x.0)),
            SystemParams::Symmetric { a } => Vec3(symmetric_field(a, &x.0)),
        }
    }

    pub fn jacobian(&self, x: &Point3) -> Mat3 {
        match *self {
            SystemParams::General { a1, a2, a3 } => general_jacobian(&[a1, a2, a3], &x.0),
            SystemParams::Symmetric { a } => symmetric_jacobian(a, &x.0),
        }
    }
}

/// General field, printed form with the `B` term.
pub fn eval_field_general(p: &SystemParams, x: &Point3) -> Result<Vec3> {
    match *p {
        SystemParams::General { a1, a2, a3 } => {
            let a = [check_a("a1", a1)?, check_a("a2", a2)?, check_a("a3", a3)?];
            Ok(Vec3(general_field(&a, &x.0)))
        }
        SystemParams::Symmetric { a } => {
            let a = check_a("a", a)?;
            Ok(Vec3(general_field(&[a, a, a], &x.0)))
        }
    }
}

/// Symmetric field (`a1 = a2 = a3 = a`).
pub fn eval_field_symmetric(a: f64, x: &Point3) -> Result<Vec3> {
    let a = check_a("a", a)?;
    Ok(Vec3(symmetric_field(a, &x.0)))
}

/// `x1^(1/a1) x2^(1/a2) x3^(1/a3)`; for symmetric parameters the monotone
/// reparameterization `x1 x2 x3` is returned.
pub fn volume_integral(p: &SystemParams, x: &Point3) -> f64 {
    match *p {
        SystemParams::General { a1, a2, a3 } => {
            x.x1().powf(1.0 / a1) * x.x2().powf(1.0 / a2) * x.x3().powf(1.0 / a3)
        }
        SystemParams::Symmetric { .. } => x.product(),
    }
}

/// Analytic Jacobian of the field selected by `p`.
pub fn jacobian(p: &SystemParams, x: &Point3) -> Mat3 {
    p.jacobian(x)
}

#[inline]
fn symmetric_component(a: f64, xi: f64, xj: f64, xk: f64) -> f64 {
    xi / xj + xi / xk - 2.0 * a * (2.0 * xi * xi - (xj * xj + xk * xk)) / (xj * xk) - 2.0
}

/// Symmetric field on raw coordinates. Each component is written so that
/// swapping the two passive coordinates is bit-exact.
#[inline]
pub fn symmetric_field(a: f64, x: &[f64; 3]) -> [f64; 3] {
    let [x1, x2, x3] = *x;
    [
        symmetric_component(a, x1, x2, x3),
        symmetric_component(a, x2, x3, x1),
        symmetric_component(a, x3, x1, x2),
    ]
}

/// General field on raw coordinates, evaluated exactly as printed.
pub fn general_field(a: &[f64; 3], x: &[f64; 3]) -> [f64; 3] {
    let [a1, a2, a3] = *a;
    let [x1, x2, x3] = *x;
    let b = (1.0 / (a1 * x1) + 1.0 / (a2 * x2) + 1.0 / (a3 * x3)
        - (x1 / (x2 * x3) + x2 / (x1 * x3) + x3 / (x1 * x2)))
        / (1.0 / a1 + 1.0 / a2 + 1.0 / a3);
    let f1 = -1.0 - a1 * x1 * (x1 / (x2 * x3) - x2 / (x1 * x3) - x3 / (x1 * x2)) + x1 * b;
    let f2 = -1.0 - a2 * x2 * (x2 / (x1 * x3) - x3 / (x1 * x2) - x1 / (x2 * x3)) + x2 * b;
    let f3 = -1.0 - a3 * x3 * (x3 / (x1 * x2) - x1 / (x2 * x3) - x2 / (x1 * x3)) + x3 * b;
    [f1, f2, f3]
}

/// Hand-differentiated Jacobian of [`symmetric_field`].
pub fn symmetric_jacobian(a: f64, x: &[f64; 3]) -> Mat3 {
    let mut jac = [[0.0; 3]; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        let (xi, xj, xk) = (x[i], x[j], x[k]);
        jac[i][i] = 1.0 / xj + 1.0 / xk - 8.0 * a * xi / (xj * xk);
        jac[i][j] =
            -xi / (xj * xj) - 2.0 * a * (-2.0 * xi * xi / (xj * xj * xk) - 1.0 / xk + xk / (xj * xj));
        jac[i][k] =
            -xi / (xk * xk) - 2.0 * a * (-2.0 * xi * xi / (xj * xk * xk) - 1.0 / xj + xj / (xk * xk));
    }
    jac
}

/// Hand-differentiated Jacobian of [`general_field`].
pub fn general_jacobian(a: &[f64; 3], x: &[f64; 3]) -> Mat3 {
    let p = x[0] * x[1] * x[2];
    let sum_sq = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let q = sum_sq / p;
    let inv_a_sum = 1.0 / a[0] + 1.0 / a[1] + 1.0 / a[2];
    let b = (1.0 / (a[0] * x[0]) + 1.0 / (a[1] * x[1]) + 1.0 / (a[2] * x[2]) - q) / inv_a_sum;
    let db: [f64; 3] = std::array::from_fn(|l| {
        let dq = 2.0 * x[l] / p - q / x[l];
        (-1.0 / (a[l] * x[l] * x[l]) - dq) / inv_a_sum
    });

    let mut jac = [[0.0; 3]; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        let (xi, xj, xk) = (x[i], x[j], x[k]);
        let mut dr = [0.0; 3];
        dr[i] = 2.0 * xi / (xj * xk);
        dr[j] = -xi * xi / (xj * xj * xk) - 1.0 / xk + xk / (xj * xj);
        dr[k] = -xi * xi / (xj * xk * xk) - 1.0 / xj + xj / (xk * xk);
        for l in 0..3 {
            jac[i][l] = -a[i] * dr[l] + xi * db[l] + if l == i { b } else { 0.0 };
        }
    }
    jac
}
