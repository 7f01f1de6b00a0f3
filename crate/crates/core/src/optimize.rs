//! Small unconstrained minimizers: BFGS, Nelder-Mead and coordinate search.

use serde::Serialize;

/// Outcome of a minimization.
#[derive(Clone, Debug, Serialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// `false` when the iteration cap was reached first.
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when `max |g_i|` falls below this.
    pub grad_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions { max_iter: 500, grad_tol: 1e-6 }
    }
}

/// Central finite-difference gradient.
pub fn numerical_gradient(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let fp = f(&y);
            y[i] = x[i] - h;
            let fm = f(&y);
            y[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS with an Armijo backtracking line search.
///
/// `fg` returns the value and gradient. The returned point never has a
/// higher value than `x0`.
pub fn bfgs(mut fg: impl FnMut(&[f64]) -> (f64, Vec<f64>), x0: &[f64], opts: BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut f, mut g) = fg(&x);
    if n == 0 {
        return Minimum { x, value: f, iterations: 0, converged: true };
    }
    let mut hinv = identity(n);
    for it in 0..opts.max_iter {
        if g.iter().all(|v| v.abs() <= opts.grad_tol) {
            return Minimum { x, value: f, iterations: it, converged: true };
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&hinv[i], &g)).collect();
        let mut slope = dot(&d, &g);
        if slope >= 0.0 {
            hinv = identity(n);
            d = g.iter().map(|v| -v).collect();
            slope = dot(&d, &g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (fnew, gnew) = fg(&xn);
            if fnew <= f + 1e-4 * step * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            return Minimum { x, value: f, iterations: it, converged: false };
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 {
            let hy: Vec<f64> = (0..n).map(|i| dot(&hinv[i], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let small = (f - fnew).abs() <= 1e-15 * f.abs().max(1.0);
        x = xn;
        f = fnew;
        g = gnew;
        if small && g.iter().all(|v| v.abs() <= opts.grad_tol.sqrt()) {
            return Minimum { x, value: f, iterations: it + 1, converged: true };
        }
    }
    let converged = g.iter().all(|v| v.abs() <= opts.grad_tol);
    Minimum { x, value: f, iterations: opts.max_iter, converged }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// Nelder-Mead simplex search.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], step: f64, tol: f64, max_iter: usize) -> Minimum {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    for it in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() <= tol && size <= tol {
            let (x, value) = simplex.swap_remove(0);
            return Minimum { x, value, iterations: it, converged: true };
        }
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect()
        };
        let worst = simplex[n].0.clone();
        let xr = along(1.0, &worst);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0, &worst);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(0.5, &worst);
                let v = f(&xc);
                (xc, v)
            } else {
                let xc = along(-0.5, &worst);
                let v = f(&xc);
                (xc, v)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *v = f(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, iterations: max_iter, converged: false }
}

/// Derivative-free coordinate search with step halving, for objectives with
/// kinks (sums of absolute values) where gradient methods stall.
pub fn coordinate_search(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], step: f64, tol: f64, max_sweeps: usize) -> Minimum {
    let mut x = x0.to_vec();
    let mut best = f(&x);
    let mut h = step;
    let mut sweeps = 0;
    while h > tol && sweeps < max_sweeps {
        sweeps += 1;
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                loop {
                    let old = x[i];
                    x[i] = old + dir * h;
                    let v = f(&x);
                    if v < best - 1e-15 * best.abs() {
                        best = v;
                        improved = true;
                    } else {
                        x[i] = old;
                        break;
                    }
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Minimum { x, value: best, iterations: sweeps, converged: h <= tol }
}
