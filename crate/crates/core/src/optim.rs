//! Derivative-free local minimization and minimum-norm points of polytopes.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // inherent on some targets and toolchains
use num_traits::Float;

/// Nelder-Mead settings. Coefficients follow the dimension-adaptive choice of
/// Gao and Han, which behaves better than the classic constants above a
/// handful of variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub max_evals: usize,
    pub initial_step: f64,
    /// Stop once the spread of simplex values drops below this.
    pub ftol: f64,
    /// ... and the simplex diameter below this.
    pub xtol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_evals: 4000, initial_step: 0.2, ftol: 1e-14, xtol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

impl NelderMead {
    pub fn minimize(&self, mut f: impl FnMut(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let nf = n.max(1) as f64;
        let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();

        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[n] - values[0];
            let diameter = simplex[1..]
                .iter()
                .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if spread <= self.ftol && diameter <= self.xtol {
                break;
            }

            let mut centroid = vec![0.0; n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect() };

            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < values[0] {
                let xe = along(gamma);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n.saturating_sub(1)] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let xc = along(rho * alpha);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            for i in 1..=n {
                let shrunk: Vec<f64> = simplex[0].iter().zip(&simplex[i]).map(|(b, x)| b + sigma * (x - b)).collect();
                values[i] = eval(&shrunk, &mut evals);
                simplex[i] = shrunk;
            }
        }
        let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
        Minimum { x: simplex[best].clone(), value: values[best], evals }
    }

    /// Restarts from the incumbent until a restart stops improving it. Helps on
    /// the kinked objectives used here, where one simplex often stalls.
    pub fn minimize_restarted(&self, mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], restarts: usize) -> Minimum {
        let mut best = self.minimize(&mut f, x0);
        for _ in 0..restarts {
            let next = self.minimize(&mut f, &best.x);
            let improved = next.value < best.value - 1e-15;
            let evals = best.evals + next.evals;
            if next.value <= best.value {
                best = Minimum { evals, ..next };
            } else {
                best.evals = evals;
            }
            if !improved {
                break;
            }
        }
        best
    }
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
#[derive(Debug, Clone, PartialEq)]
pub struct MinNormPoint {
    /// The point itself.
    pub point: Vec<f64>,
    /// Convex weights over all input points (zero off the final corral).
    pub weights: Vec<f64>,
    pub distance: f64,
    pub iterations: usize,
}

/// Wolfe's algorithm. Terminates when no point improves the current iterate
/// by more than `tol * max ||p||^2` in the optimality gap `|x|^2 - <x, p>`.
pub fn min_norm_point(points: &[Vec<f64>], tol: f64) -> Option<MinNormPoint> {
    let m = points.len();
    let first = points.first()?;
    let dim = first.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let scale = points.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(1e-300);

    let start = (0..m).min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b])))?;
    let mut corral: Vec<usize> = vec![start];
    let mut lambda: Vec<f64> = vec![1.0];
    let mut x = points[start].clone();
    let combine = |corral: &[usize], lambda: &[f64]| {
        let mut x = vec![0.0; dim];
        for (&i, &l) in corral.iter().zip(lambda) {
            for (xi, pi) in x.iter_mut().zip(&points[i]) {
                *xi += l * pi;
            }
        }
        x
    };

    let max_iter = 50 * (m + dim + 10);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let xx = dot(&x, &x);
        let (j, xj) = (0..m).map(|i| (i, dot(&x, &points[i]))).min_by(|a, b| a.1.total_cmp(&b.1))?;
        if xx - xj <= tol * scale || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lambda.push(0.0);

        loop {
            iterations += 1;
            let alpha = affine_minimizer(points, &corral);
            if alpha.iter().all(|&a| a > 1e-14) {
                lambda = alpha;
                x = combine(&corral, &lambda);
                break;
            }
            // Step from lambda toward alpha until the first weight hits zero.
            let mut theta = 1.0f64;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= 1e-14 {
                    let denom = l - a;
                    if denom > 0.0 {
                        theta = theta.min(l / denom);
                    }
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            let keep: Vec<bool> = lambda.iter().map(|&l| l > 1e-14).collect();
            if keep.iter().all(|&k| k) {
                // Round-off left every weight positive; drop the smallest.
                let worst = (0..lambda.len()).min_by(|&a, &b| lambda[a].total_cmp(&lambda[b])).unwrap_or(0);
                corral.remove(worst);
                lambda.remove(worst);
            } else {
                let mut c2 = Vec::new();
                let mut l2 = Vec::new();
                for ((&i, &l), k) in corral.iter().zip(&lambda).zip(keep) {
                    if k {
                        c2.push(i);
                        l2.push(l);
                    }
                }
                corral = c2;
                lambda = l2;
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
            x = combine(&corral, &lambda);
            if corral.len() <= 1 {
                break;
            }
        }
    }

    let mut weights = vec![0.0; m];
    for (&i, &l) in corral.iter().zip(&lambda) {
        weights[i] = l;
    }
    let distance = dot(&x, &x).sqrt();
    Some(MinNormPoint { point: x, weights, distance, iterations })
}

/// Weights of the minimum-norm point of the affine hull of the corral:
/// solves `(P^T P + 1 1^T) a = 1` and normalizes, which is equivalent to the
/// KKT system but better conditioned.
fn affine_minimizer(points: &[Vec<f64>], corral: &[usize]) -> Vec<f64> {
    let k = corral.len();
    let g = DMatrix::from_fn(k, k, |a, b| {
        points[corral[a]].iter().zip(&points[corral[b]]).map(|(x, y)| x * y).sum::<f64>() + 1.0
    });
    let ones = DVector::from_element(k, 1.0);
    let sol = g
        .clone()
        .lu()
        .solve(&ones)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .or_else(|| g.svd(true, true).solve(&ones, 1e-14).ok())
        .unwrap_or_else(|| DVector::from_element(k, 1.0));
    let total: f64 = sol.iter().sum();
    if total.abs() < 1e-300 {
        return vec![1.0 / k as f64; k];
    }
    sol.iter().map(|v| v / total).collect()
}
