//! Adaptive embedded Runge–Kutta (Dormand–Prince 5(4)) on complex state
//! vectors. Used for vectorized density matrices and for matrix-free
//! generator applications.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 4th-order embedded weights
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

/// Integrate `y' = rhs(y)` from `t0` to `t1` and return `y(t1)`.
pub(crate) fn rk45<F>(
    rhs: &F,
    y0: Array1<C64>,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
) -> Result<Array1<C64>>
where
    F: Fn(&Array1<C64>) -> Array1<C64>,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    if span < 0.0 {
        return Err(Error::InvalidParameter("rk45: t1 < t0".into()));
    }

    let n = y0.len() as f64;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(&y);

    // initial step size from the first derivative scale
    let ynorm = y.iter().map(|z| z.norm()).fold(0.0, f64::max).max(atol);
    let fnorm = k1.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut h = if fnorm > 0.0 {
        (0.01 * ynorm / fnorm).min(span)
    } else {
        span
    };
    let h_min = span * 1e-14;

    loop {
        if t >= t1 {
            return Ok(y);
        }
        h = h.min(t1 - t);
        if h < h_min {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        let hc = C64::new(h, 0.0);
        let k2 = rhs(&(&y + &(&k1 * C64::new(A21, 0.0) * hc)));
        let k3 = rhs(&(&y + &((&k1 * C64::new(A31, 0.0) + &k2 * C64::new(A32, 0.0)) * hc)));
        let k4 = rhs(&(&y
            + &((&k1 * C64::new(A41, 0.0) + &k2 * C64::new(A42, 0.0) + &k3 * C64::new(A43, 0.0))
                * hc)));
        let k5 = rhs(&(&y
            + &((&k1 * C64::new(A51, 0.0)
                + &k2 * C64::new(A52, 0.0)
                + &k3 * C64::new(A53, 0.0)
                + &k4 * C64::new(A54, 0.0))
                * hc)));
        let k6 = rhs(&(&y
            + &((&k1 * C64::new(A61, 0.0)
                + &k2 * C64::new(A62, 0.0)
                + &k3 * C64::new(A63, 0.0)
                + &k4 * C64::new(A64, 0.0)
                + &k5 * C64::new(A65, 0.0))
                * hc)));

        let y5 = &y
            + &((&k1 * C64::new(B1, 0.0)
                + &k3 * C64::new(B3, 0.0)
                + &k4 * C64::new(B4, 0.0)
                + &k5 * C64::new(B5, 0.0)
                + &k6 * C64::new(B6, 0.0))
                * hc);
        let k7 = rhs(&y5);
        let y4 = &y
            + &((&k1 * C64::new(E1, 0.0)
                + &k3 * C64::new(E3, 0.0)
                + &k4 * C64::new(E4, 0.0)
                + &k5 * C64::new(E5, 0.0)
                + &k6 * C64::new(E6, 0.0)
                + &k7 * C64::new(E7, 0.0))
                * hc);

        let mut err_sq = 0.0f64;
        for i in 0..y.len() {
            let sc = atol + rtol * y[i].norm().max(y5[i].norm());
            let e = (y5[i] - y4[i]).norm();
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / n).sqrt();

        if err <= 1.0 {
            t += h;
            y = y5;
            k1 = k7; // FSAL
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
}
