//! Fixed-step reproduction of the boundary-crossing computation at `a = 0.26`
//! in the chart `x = x3/x1`, `y = x3/x2`.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    asymptote_boundary_intersection, boundary_asymptote, calibrate_coefficient, chart_slope,
    AsymptoteHit,
};
use crate::error::{check_positive, Error, Result};

/// Parameter of the reproduced computation.
pub const IVP_A: f64 = 0.26;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IvpSetup {
    pub n: usize,
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
}

impl Default for IvpSetup {
    fn default() -> Self {
        IvpSetup {
            n: 5000,
            b: 1.0 + 1e-6,
            x0: 1.0 + 1e-3,
            y0: 20.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IvpReproduction {
    pub setup: IvpSetup,
    /// First mesh index with `y_j < y_b(x_j)`.
    pub mesh_index: usize,
    pub x: f64,
    /// Boundary value `y_b(x_j)`.
    pub y_boundary: f64,
    /// Runge–Kutta value `y_j`.
    pub y_rk: f64,
    /// Coefficient of the asymptotic solution through `(x0, y0)`.
    pub coefficient: f64,
    pub asymptote_hit: AsymptoteHit,
}

impl IvpReproduction {
    /// Crossing point reported on the boundary curve.
    pub fn crossing(&self) -> (f64, f64) {
        (self.x, self.y_boundary)
    }
}

/// Integrates `dy/dx` backward from `(x0, y0)` toward `b` with classical RK4
/// on the mesh `x_i = x0 + i h`, `h = (b - x0)/N`, and stops at the first mesh
/// point below the boundary curve `l3 = 0`.
pub fn reproduce_ivp_026(setup: IvpSetup) -> Result<IvpReproduction> {
    let IvpSetup { n, b, x0, y0 } = setup;
    if n == 0 {
        return Err(Error::OutOfRange { name: "N", value: 0.0, range: "[1, inf)" });
    }
    check_positive("y0", y0)?;
    if !(b > 1.0 && x0 > b) {
        return Err(Error::OutOfRange { name: "b", value: b, range: "(1, x0)" });
    }
    let a = IVP_A;
    let f = |x: f64, y: f64| chart_slope(a, x, y);
    let h = (b - x0) / n as f64;
    let mut y = y0;
    for i in 1..=n {
        let x = x0 + (i - 1) as f64 * h;
        let k1 = f(x, y);
        let k2 = f(x + 0.5 * h, y + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h, y + 0.5 * h * k2);
        let k4 = f(x + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let xi = x0 + i as f64 * h;
        let yb = boundary_asymptote(xi)?;
        if y < yb {
            let coefficient = calibrate_coefficient(a, x0, y0)?;
            let asymptote_hit =
                asymptote_boundary_intersection(a, coefficient, 1e-9, x0 - 1.0)?;
            return Ok(IvpReproduction {
                setup,
                mesh_index: i,
                x: xi,
                y_boundary: yb,
                y_rk: y,
                coefficient,
                asymptote_hit,
            });
        }
    }
    Err(Error::NoCrossing)
}
