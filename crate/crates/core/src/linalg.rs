//! Dense 3x3 helpers: determinant, characteristic polynomial and a real
//! eigen-decomposition that returns a 2-span for a double eigenvalue.

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

pub fn mat_vec(m: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

pub fn trace(m: &Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

pub fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Frobenius norm.
pub fn norm(m: &Mat3) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = dot(&v, &v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// `‖m v - lambda v‖` for a unit `v`.
pub fn residual(m: &Mat3, lambda: f64, v: &[f64; 3]) -> f64 {
    let mv = mat_vec(m, v);
    let r = [mv[0] - lambda * v[0], mv[1] - lambda * v[1], mv[2] - lambda * v[2]];
    dot(&r, &r).sqrt()
}

/// Real eigen-decomposition of a 3x3 matrix with real spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigen3 {
    /// Ascending.
    pub values: [f64; 3],
    /// Unit eigenvectors, `vectors[n]` belongs to `values[n]`.
    pub vectors: [[f64; 3]; 3],
    /// Slots `(n, n+1)` of a double eigenvalue; their vectors form an
    /// orthonormal basis of the eigenplane.
    pub double: Option<(usize, usize)>,
}

/// Relative gap below which two eigenvalues are merged into a double one.
const DOUBLE_GAP: f64 = 1e-6;

pub fn eigen3(m: &Mat3) -> Result<Eigen3> {
    let scale = norm(m);
    if !scale.is_finite() {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    if scale == 0.0 {
        return Ok(Eigen3 {
            values: [0.0; 3],
            vectors: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            double: None,
        });
    }
    let tr = trace(m);
    let c2 = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let dt = det(m);
    let mut roots = cubic_real_roots(-tr, c2, -dt, scale)?;
    roots.sort_by(|a, b| a.total_cmp(b));

    // Near-double roots are ill-conditioned; recover the pair from the trace
    // using the well-conditioned simple root.
    let gap = DOUBLE_GAP * scale;
    let double = if (roots[1] - roots[0]).abs() <= gap {
        let d = 0.5 * (tr - roots[2]);
        roots[0] = d;
        roots[1] = d;
        Some((0, 1))
    } else if (roots[2] - roots[1]).abs() <= gap {
        let d = 0.5 * (tr - roots[0]);
        roots[1] = d;
        roots[2] = d;
        Some((1, 2))
    } else {
        None
    };

    let mut vectors = [[0.0; 3]; 3];
    match double {
        None => {
            for n in 0..3 {
                vectors[n] = null_vector(m, roots[n]);
            }
        }
        Some((p, q)) => {
            let simple = 3 - p - q;
            vectors[simple] = null_vector(m, roots[simple]);
            let [u, w] = null_plane(m, roots[p]);
            vectors[p] = u;
            vectors[q] = w;
        }
    }
    Ok(Eigen3 {
        values: roots,
        vectors,
        double,
    })
}

fn shifted(m: &Mat3, lambda: f64) -> Mat3 {
    let mut s = *m;
    for (i, row) in s.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    s
}

/// Unit vector spanning the kernel of `m - lambda I` (rank 2 assumed).
fn null_vector(m: &Mat3, lambda: f64) -> [f64; 3] {
    let s = shifted(m, lambda);
    let candidates = [cross(&s[0], &s[1]), cross(&s[0], &s[2]), cross(&s[1], &s[2])];
    let best = candidates
        .iter()
        .max_by(|a, b| dot(a, a).total_cmp(&dot(b, b)))
        .copied()
        .unwrap_or([1.0, 0.0, 0.0]);
    if dot(&best, &best) == 0.0 {
        // rank below 2: any vector orthogonal to the dominant row
        return null_plane(m, lambda)[0];
    }
    unit(best)
}

/// Orthonormal basis of the kernel of `m - lambda I` (rank 1 assumed).
fn null_plane(m: &Mat3, lambda: f64) -> [[f64; 3]; 2] {
    let s = shifted(m, lambda);
    let row = s
        .iter()
        .max_by(|a, b| dot(a, a).total_cmp(&dot(b, b)))
        .copied()
        .unwrap_or([0.0; 3]);
    if dot(&row, &row) == 0.0 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    }
    let r = unit(row);
    // axis least aligned with the row
    let axis = (0..3)
        .min_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs()))
        .unwrap_or(0);
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let u = unit(cross(&r, &e));
    let w = unit(cross(&r, &u));
    [u, w]
}

/// Real roots of `x^3 + b x^2 + c x + d`, polished by Newton steps.
/// Fails if the cubic has a complex pair well separated from the real axis.
fn cubic_real_roots(b: f64, c: f64, d: f64, scale: f64) -> Result<[f64; 3]> {
    let shift = b / 3.0;
    // depressed cubic t^3 + p t + q with x = t - b/3
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let mut roots = if p.abs() <= 1e-14 * scale * scale {
        let t = -q.cbrt();
        [t - shift; 3]
    } else if p < 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        [
            r * phi.cos() - shift,
            r * (phi - tau).cos() - shift,
            r * (phi + tau).cos() - shift,
        ]
    } else {
        return Err(Error::Eigen(format!(
            "characteristic polynomial has complex roots (p = {p:e})"
        )));
    };
    // a clamped acos means the discriminant was slightly positive; accept only
    // when the real parts are genuinely close
    let poly = |x: f64| ((x + b) * x + c) * x + d;
    let dpoly = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let dp = dpoly(*r);
            if dp.abs() <= 1e-10 * scale * scale {
                break;
            }
            let step = poly(*r) / dp;
            if !step.is_finite() || step.abs() > 1e-3 * scale {
                break;
            }
            *r -= step;
        }
    }
    Ok(roots)
}

#[cfg(test)]
pub(crate) fn assert_close(a: &Mat3, b: &Mat3, rel: f64) {
    let tol = rel * (1.0 + norm(a));
    for i in 0..3 {
        for j in 0..3 {
            assert!(
                (a[i][j] - b[i][j]).abs() <= tol,
                "entry ({i},{j}): {} vs {} (tol {tol:e})",
                a[i][j],
                b[i][j]
            );
        }
    }
}
