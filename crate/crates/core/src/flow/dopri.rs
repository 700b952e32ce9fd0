//! Dormand–Prince 5(4) embedded pair with PI step-size control.

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub(crate) struct Step<const N: usize> {
    pub y: [f64; N],
    /// Derivative at the new point (first stage of the next step).
    pub dy: [f64; N],
    /// Weighted RMS error estimate; the step is acceptable when `<= 1`.
    pub err: f64,
}

#[inline]
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for n in 0..N {
                out[n] += h * c * k[n];
            }
        }
    }
    out
}

/// One Dormand–Prince step of an autonomous system from `y` with derivative
/// `k1 = f(y)`.
pub(crate) fn step<const N: usize, F: Fn(&[f64; N]) -> [f64; N]>(
    f: &F,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
) -> Step<N> {
    let k2 = f(&comb(y, h, &[(A21, k1)]));
    let k3 = f(&comb(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(&comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&comb(
        y,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y_new = comb(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = f(&y_new);
    let mut sq = [0.0; N];
    for n in 0..N {
        let e = h * (E1 * k1[n] + E3 * k3[n] + E4 * k4[n] + E5 * k5[n] + E6 * k6[n] + E7 * k7[n]);
        let sc = atol + rtol * y[n].abs().max(y_new[n].abs());
        let r = e / sc;
        sq[n] = r * r;
    }
    // order-independent sum, so permuted states get identical step sizes
    sq.sort_by(f64::total_cmp);
    let err = (sq.iter().sum::<f64>() / N as f64).sqrt();
    Step {
        y: y_new,
        dy: k7,
        err: if err.is_finite() { err } else { f64::INFINITY },
    }
}

/// PI controller of Gustafsson type.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Controller {
    prev_err: f64,
}

const SAFETY: f64 = 0.9;
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

impl Controller {
    pub fn new() -> Self {
        Controller { prev_err: 1e-4 }
    }

    /// Step-size factor after an accepted step.
    pub fn accept(&mut self, err: f64) -> f64 {
        let err = err.max(1e-10);
        let fac = SAFETY * err.powf(-ALPHA) * self.prev_err.powf(BETA);
        self.prev_err = err;
        fac.clamp(MIN_FACTOR, MAX_FACTOR)
    }

    /// Step-size factor after a rejected step.
    pub fn reject(&self, err: f64) -> f64 {
        (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
    }
}

/// Initial step heuristic (Hairer, Nørsett, Wanner, II.4).
pub(crate) fn initial_step<const N: usize, F: Fn(&[f64; N]) -> [f64; N]>(
    f: &F,
    y: &[f64; N],
    k1: &[f64; N],
    rtol: f64,
    atol: f64,
    max_step: f64,
) -> f64 {
    let norm = |v: &[f64; N]| {
        let s: f64 = (0..N)
            .map(|n| {
                let r = v[n] / (atol + rtol * y[n].abs());
                r * r
            })
            .sum();
        (s / N as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(k1);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = comb(y, h0, &[(1.0, k1)]);
    let k2 = f(&y1);
    let mut diff = [0.0; N];
    for n in 0..N {
        diff[n] = k2[n] - k1[n];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(max_step)
}

/// Cubic Hermite interpolation between two states with derivatives.
pub(crate) fn hermite<const N: usize>(
    y0: &[f64; N],
    f0: &[f64; N],
    y1: &[f64; N],
    f1: &[f64; N],
    h: f64,
    theta: f64,
) -> [f64; N] {
    let t = theta;
    let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    let h10 = t * (1.0 - t) * (1.0 - t);
    let h01 = t * t * (3.0 - 2.0 * t);
    let h11 = t * t * (t - 1.0);
    std::array::from_fn(|n| h00 * y0[n] + h10 * h * f0[n] + h01 * y1[n] + h11 * h * f1[n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fifth_order() {
        let f = |y: &[f64; 1]| [-y[0]];
        let err_at = |h: f64| {
            let mut y = [1.0];
            let n = (1.0 / h).round() as usize;
            for _ in 0..n {
                let k = f(&y);
                y = step(&f, &y, &k, h, 1e-10, 1e-12).y;
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err_at(0.1) / err_at(0.05);
        assert!(ratio > 25.0 && ratio < 45.0, "ratio {ratio}");
    }

    #[test]
    fn hermite_reproduces_cubics() {
        // y = t^3 on [0, 2]
        let y0 = [0.0];
        let y1 = [8.0];
        let f0 = [0.0];
        let f1 = [12.0];
        let v = hermite(&y0, &f0, &y1, &f1, 2.0, 0.25);
        assert!((v[0] - 0.125).abs() < 1e-14);
    }
}
