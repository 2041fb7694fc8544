//! Numerical quadrature: Gauss–Laguerre rules for `∫₀^∞ e^{-x} f(x) dx` and
//! an adaptive Simpson rule for finite intervals.

use crate::error::{Error, Result};

/// Gauss–Laguerre rule with weight `e^{-x}` on `[0, ∞)`.
#[derive(Clone, Debug)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    /// Build an `n`-point rule by the Golub–Welsch algorithm: nodes are the
    /// eigenvalues of the symmetric Jacobi matrix (diagonal `2k+1`,
    /// off-diagonal `k`), weights the squared first eigenvector components.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("quadrature order must be > 0".into()));
        }
        let mut diag: Vec<f64> = (0..n).map(|k| (2 * k + 1) as f64).collect();
        let mut off: Vec<f64> = (1..n).map(|k| k as f64).collect();
        off.push(0.0);
        let mut first = vec![0.0; n];
        first[0] = 1.0;
        tridiag_ql(&mut diag, &mut off, &mut first)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
        let nodes: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
        let weights: Vec<f64> = order.iter().map(|&i| first[i] * first[i]).collect();
        Ok(Self { nodes, weights })
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// QL iteration with implicit shifts on a symmetric tridiagonal matrix,
/// accumulating only the first row of the eigenvector matrix (EISPACK
/// `imtql2` restricted to the quadrature-weight component).
fn tridiag_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::QuadratureNotConverged(
                    "tridiagonal QL iteration stalled".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Integrate `∫₀^∞ e^{-u} f(u) du` with node doubling until the relative
/// change drops below `rtol`, starting from 64 nodes.
pub fn laguerre_adaptive<F: Fn(f64) -> f64>(f: F, rtol: f64) -> Result<f64> {
    let mut n = 64;
    let mut prev = GaussLaguerre::new(n)?.integrate(&f);
    while n <= 8192 {
        n *= 2;
        let next = GaussLaguerre::new(n)?.integrate(&f);
        let scale = next.abs().max(prev.abs()).max(1e-300);
        if (next - prev).abs() <= rtol * scale {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged(format!(
        "Gauss-Laguerre not stabilized at {n} nodes (rtol {rtol:.1e})"
    )))
}

/// Adaptive Simpson quadrature of a real function on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }

    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(Error::QuadratureNotConverged(format!(
                "adaptive Simpson recursion limit on [{a}, {b}]"
            )));
        }
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }

    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 48)
}
