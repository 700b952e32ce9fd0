//! Equilibria on the surface `x1 x2 x3 = c`, their position relative to `S`
//! and the linearization at each of them.

use serde::{Deserialize, Serialize};

use crate::error::{check_open, check_positive, Error, Result};
use crate::geometry::{boundary_tolerance, classify_region, RegionClass};
use crate::linalg::{eigen3, norm, residual, Mat3};
use crate::model::{symmetric_jacobian, Axis, Point3, Vec3, GENERAL_TIME_SCALE};

/// `kappa = (1 - 2a) / (2a)`.
pub fn kappa(a: f64) -> f64 {
    (1.0 - 2.0 * a) / (2.0 * a)
}

fn is_quarter(a: f64) -> bool {
    (a - 0.25).abs() <= 1e-15
}

/// The four equilibria `o0..o3` on `x1 x2 x3 = c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub a: f64,
    pub c: f64,
    pub kappa: f64,
    /// `q = cbrt(c / kappa)`.
    pub q: f64,
    /// `o0 = (cbrt c, cbrt c, cbrt c)`, `o_i` has `q kappa` in slot `i` and `q`
    /// elsewhere.
    pub points: [Point3; 4],
    /// `a = 1/4`: all four points coincide.
    pub degenerate: bool,
}

pub fn equilibria(a: f64, c: f64) -> Result<EquilibriumSet> {
    check_open("a", a, 0.0, 0.5, "(0, 1/2)")?;
    check_positive("c", c)?;
    let degenerate = is_quarter(a);
    let kappa = if degenerate { 1.0 } else { kappa(a) };
    let q = if degenerate { c.cbrt() } else { (c / kappa).cbrt() };
    let r = c.cbrt();
    let o = |i: usize| {
        let mut x = [q; 3];
        x[i] = q * kappa;
        Point3::from_array(x)
    };
    Ok(EquilibriumSet {
        a,
        c,
        kappa,
        q,
        points: [Point3::new(r, r, r)?, o(0)?, o(1)?, o(2)?],
        degenerate,
    })
}

/// Position of `o0..o3` (on `c = 1`) relative to `S`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub a: f64,
    pub classes: [RegionClass; 4],
    /// `x_i - Phi(x_j, x_k)` at `o_i` per unit `q`: `(3 - 14a) / (6a)` up to a
    /// positive factor; negative inside `S`.
    pub sign_3_minus_14a: f64,
}

pub fn equilibrium_membership(a: f64) -> Result<Membership> {
    let set = equilibria(a, 1.0)?;
    let classes = set
        .points
        .map(|p| classify_region(&p, boundary_tolerance(&p)));
    Ok(Membership {
        a,
        classes,
        sign_3_minus_14a: (3.0 - 14.0 * a).signum(),
    })
}

/// Stability role of an eigen-direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenRole {
    Stable,
    Unstable,
    Center,
}

fn role_of(lambda: f64, scale: f64) -> EigenRole {
    if lambda.abs() <= 1e-10 * scale.max(1e-300) {
        EigenRole::Center
    } else if lambda < 0.0 {
        EigenRole::Stable
    } else {
        EigenRole::Unstable
    }
}

/// An invariant direction of the linearization with its eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenDirection {
    /// Unit vector (for the double eigenvalue at `o0`, one of two spanning
    /// vectors).
    pub vector: Vec3,
    pub eigenvalue: f64,
    pub role: EigenRole,
    /// `|J v - lambda v|`.
    pub residual: f64,
}

/// Linearization of the symmetric field at one equilibrium.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenStructure {
    pub a: f64,
    pub c: f64,
    /// 0 for `o0`, `i` for `o_i`.
    pub which: usize,
    pub point: Point3,
    pub jacobian: Mat3,
    pub jacobian_norm: f64,
    /// Numerical eigenvalues, ascending.
    pub eigenvalues: [f64; 3],
    /// Numerical eigenvectors matching `eigenvalues`.
    pub eigenvectors: [Vec3; 3],
    /// The expected invariant directions, each tested against the Jacobian:
    /// for `o0` the center `(1,1,1)` then the plane `(-1,0,1)`, `(-1,1,0)`;
    /// for `o_i` the center `(kappa at i, 1, 1)`, the curve direction
    /// `(2a-1 at i, a, a)` and the transverse direction `(0 at i, 1, -1)`.
    pub directions: Vec<EigenDirection>,
}

impl EigenStructure {
    pub fn max_residual(&self) -> f64 {
        self.directions
            .iter()
            .map(|d| d.residual)
            .fold(0.0, f64::max)
    }

    /// `lambda_transverse / lambda_curve` at `o_i`; `None` at `o0`.
    pub fn saddle_ratio(&self) -> Option<f64> {
        (self.which != 0).then(|| self.directions[2].eigenvalue / self.directions[1].eigenvalue)
    }
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|x| x / n)
}

fn rayleigh(m: &Mat3, v: &[f64; 3]) -> f64 {
    let mv = crate::linalg::mat_vec(m, v);
    mv[0] * v[0] + mv[1] * v[1] + mv[2] * v[2]
}

/// Expected invariant directions at `o_which`, in slot order.
fn expected_directions(a: f64, kappa: f64, which: usize) -> Vec<[f64; 3]> {
    if which == 0 {
        return vec![[1.0, 1.0, 1.0], [-1.0, 0.0, 1.0], [-1.0, 1.0, 0.0]];
    }
    let i = which - 1;
    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
    let mut center = [1.0; 3];
    center[i] = kappa;
    let mut curve = [a; 3];
    curve[i] = 2.0 * a - 1.0;
    let mut transverse = [0.0; 3];
    transverse[j] = 1.0;
    transverse[k] = -1.0;
    vec![center, curve, transverse]
}

/// Numerically diagonalizes the Jacobian of the symmetric field at `o_which`
/// and checks each expected invariant direction.
pub fn eigen_structure(a: f64, c: f64, which: usize) -> Result<EigenStructure> {
    check_open("a", a, 0.0, 0.5, "(0, 1/2)")?;
    if is_quarter(a) {
        return Err(Error::Degenerate("the equilibria merge and the linearization is nilpotent"));
    }
    if which > 3 {
        return Err(Error::OutOfRange {
            name: "which",
            value: which as f64,
            range: "{0, 1, 2, 3}",
        });
    }
    let set = equilibria(a, c)?;
    let point = set.points[which];
    let jac = symmetric_jacobian(a, &point.coords());
    let jn = norm(&jac);
    let eig = eigen3(&jac)?;
    let directions = expected_directions(a, set.kappa, which)
        .into_iter()
        .map(|d| {
            let v = unit(d);
            let lambda = rayleigh(&jac, &v);
            EigenDirection {
                vector: Vec3(v),
                eigenvalue: lambda,
                role: role_of(lambda, jn),
                residual: residual(&jac, lambda, &v),
            }
        })
        .collect();
    Ok(EigenStructure {
        a,
        c,
        which,
        point,
        jacobian: jac,
        jacobian_norm: jn,
        eigenvalues: eig.values,
        eigenvectors: eig.vectors.map(Vec3),
        directions,
    })
}

/// Closed-form eigenvalues in the time scale of the general field, in the
/// order of [`EigenStructure::directions`]. At `o_i`:
/// `0, (4a-1)/q, (4a-1)(2a+1)/((2a-1)q)`. At `o0`: `0` and the double
/// eigenvalue `-(4a-1)/cbrt(c)`.
/// Multiply by [`GENERAL_TIME_SCALE`] for the symmetric field.
pub fn lemma_eigenvalues(a: f64, c: f64, which: usize) -> Result<[f64; 3]> {
    let set = equilibria(a, c)?;
    let d = 4.0 * a - 1.0;
    Ok(if which == 0 {
        let l = -d / c.cbrt();
        [0.0, l, l]
    } else {
        [0.0, d / set.q, d * (2.0 * a + 1.0) / ((2.0 * a - 1.0) * set.q)]
    })
}

/// The printed double eigenvalue at `o0`, `-(4a-1)/q`.
pub fn printed_o0_eigenvalue(a: f64, c: f64) -> Result<f64> {
    let set = equilibria(a, c)?;
    Ok(-(4.0 * a - 1.0) / set.q)
}

/// Expected roles by the lemma, in [`EigenStructure::directions`] order.
pub fn lemma_roles(a: f64, which: usize) -> [EigenRole; 3] {
    let below = a < 0.25;
    let (s, u) = if below {
        (EigenRole::Stable, EigenRole::Unstable)
    } else {
        (EigenRole::Unstable, EigenRole::Stable)
    };
    if which == 0 {
        // the plane repels below 1/4 and attracts above
        [EigenRole::Center, u, u]
    } else {
        [EigenRole::Center, s, u]
    }
}

/// Scale factor between the symmetric field and the lemma eigenvalues.
pub const EIGEN_TIME_SCALE: f64 = GENERAL_TIME_SCALE;

/// Helper used by reports: slot of the cone through `o_i`.
pub fn cone_of(which: usize) -> Option<Axis> {
    which.checked_sub(1).and_then(Axis::from_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RegionKind;
    use crate::model::symmetric_field;

    #[test]
    fn equilibria_examples() {
        let s = equilibria(1.0 / 6.0, 1.0).unwrap();
        assert!((s.kappa - 2.0).abs() < 1e-15);
        assert!((s.q - 2f64.powf(-1.0 / 3.0)).abs() < 1e-15);
        let o3 = s.points[3].coords();
        assert!((o3[0] - 0.793700525984).abs() < 1e-11);
        assert!((o3[2] - 1.587401051968).abs() < 1e-11);

        let s = equilibria(0.25, 1.0).unwrap();
        assert!(s.degenerate);
        for p in s.points {
            assert_eq!(p.coords(), [1.0; 3]);
        }
    }

    #[test]
    fn equilibria_are_zeros_of_the_field() {
        for &a in &[0.05, 1.0 / 9.0, 0.2, 0.3, 0.49] {
            for &c in &[0.1, 1.0, 8.0] {
                for p in equilibria(a, c).unwrap().points {
                    let f = symmetric_field(a, &p.coords());
                    assert!(f.iter().all(|v| v.abs() < 1e-12), "a={a} c={c} {f:?}");
                    assert!((p.product() / c - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn membership_follows_3_minus_14a() {
        let m = equilibrium_membership(1.0 / 9.0).unwrap();
        assert_eq!(m.classes[0].kind, RegionKind::Interior);
        assert!(m.classes[1..].iter().all(|c| c.kind == RegionKind::Exterior));
        let m = equilibrium_membership(3.0 / 14.0).unwrap();
        for i in 1..4 {
            assert_eq!(m.classes[i].kind, RegionKind::Boundary(Axis::ALL[i - 1]));
        }
        let m = equilibrium_membership(0.3).unwrap();
        assert!(m.classes.iter().all(|c| c.kind == RegionKind::Interior));
    }

    #[test]
    fn eigen_directions_at_one_sixth() {
        let e = eigen_structure(1.0 / 6.0, 1.0, 3).unwrap();
        assert!(e.max_residual() <= 1e-8 * e.jacobian_norm);
        assert!((e.saddle_ratio().unwrap() + 2.0).abs() < 1e-8);
        let roles: Vec<_> = e.directions.iter().map(|d| d.role).collect();
        assert_eq!(roles, lemma_roles(1.0 / 6.0, 3));
        let l = lemma_eigenvalues(1.0 / 6.0, 1.0, 3).unwrap();
        for n in 1..3 {
            assert!((e.directions[n].eigenvalue - EIGEN_TIME_SCALE * l[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn o0_double_eigenvalue() {
        for &c in &[0.5, 1.0, 2.0] {
            let e = eigen_structure(0.3, c, 0).unwrap();
            let l = lemma_eigenvalues(0.3, c, 0).unwrap();
            assert!(e.directions[0].eigenvalue.abs() < 1e-12);
            for n in 1..3 {
                assert!((e.directions[n].eigenvalue - EIGEN_TIME_SCALE * l[n]).abs() < 1e-12);
            }
            let v = e.eigenvalues;
            // the pair is negative at a > 1/4
            assert!(v[0] < 0.0 && (v[0] - v[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_quarter() {
        assert!(matches!(eigen_structure(0.25, 1.0, 1), Err(Error::Degenerate(_))));
    }
}
