//! Logistic models fitted by accelerated proximal gradient, the L1 variant
//! used for feature selection, and k-nearest neighbours.
//!
//! Parameter vectors hold the `p` weights followed by the intercept. The
//! intercept is never penalized. Labels are `true` for the positive class.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn signs(y: &[bool]) -> Vec<f64> {
    y.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect()
}

#[inline]
fn margin(row: &[f64], params: &[f64]) -> f64 {
    let p = row.len();
    row.iter().zip(&params[..p]).map(|(x, w)| x * w).sum::<f64>() + params[p]
}

/// Mean logistic loss plus `l2 / 2 * |w|^2`, and its gradient.
pub fn logistic_objective(x: &[Vec<f64>], y: &[bool], params: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let ys = signs(y);
    objective_pm(x, &ys, params, l2)
}

fn objective_pm(x: &[Vec<f64>], ys: &[f64], params: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let z = margins(x, params);
    loss_grad(x, ys, &z, params, l2)
}

fn margins(x: &[Vec<f64>], params: &[f64]) -> Vec<f64> {
    x.iter().map(|row| margin(row, params)).collect()
}

fn penalty(params: &[f64], l2: f64) -> f64 {
    let p = params.len() - 1;
    0.5 * l2 * params[..p].iter().map(|w| w * w).sum::<f64>()
}

fn loss_only(ys: &[f64], z: &[f64], params: &[f64], l2: f64) -> f64 {
    let loss = ys.iter().zip(z).map(|(y, m)| softplus(-y * m)).sum::<f64>() / ys.len() as f64;
    loss + penalty(params, l2)
}

/// Objective and gradient given the margins `z = X w + b` of `params`.
fn loss_grad(x: &[Vec<f64>], ys: &[f64], z: &[f64], params: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    let p = params.len() - 1;
    let mut loss = 0.0;
    let mut grad = vec![0.0; p + 1];
    for ((row, &yi), &zi) in x.iter().zip(ys).zip(z) {
        let m = yi * zi;
        loss += softplus(-m);
        let coef = -yi * sigmoid(-m) / n;
        for (g, xv) in grad.iter_mut().zip(row) {
            *g += coef * xv;
        }
        grad[p] += coef;
    }
    loss /= n;
    if l2 > 0.0 {
        for j in 0..p {
            grad[j] += l2 * params[j];
        }
    }
    (loss + penalty(params, l2), grad)
}

/// Upper estimate of the gradient Lipschitz constant from a few power
/// iterations on the augmented Gram matrix. Backtracking corrects any
/// underestimate.
fn lipschitz_estimate(x: &[Vec<f64>], l2: f64) -> f64 {
    let n = x.len().max(1) as f64;
    let p = x.first().map_or(0, Vec::len);
    let mut v = vec![1.0; p + 1];
    let mut eig = 1.0;
    for _ in 0..30 {
        let mut out = vec![0.0; p + 1];
        for row in x {
            let s = margin(row, &v);
            for (o, xv) in out.iter_mut().zip(row) {
                *o += s * xv;
            }
            out[p] += s;
        }
        let norm = out.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        eig = norm / v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v = out.into_iter().map(|a| a / norm).collect();
    }
    (0.25 * eig / n + l2).max(1e-12)
}

/// Drops columns that are zero in every row; their weights are zero at any
/// optimum. Returns the reduced rows and the kept column indices.
fn nonzero_columns(x: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<usize>) {
    let p = x.first().map_or(0, Vec::len);
    let keep: Vec<usize> = (0..p).filter(|&j| x.iter().any(|r| r[j] != 0.0)).collect();
    if keep.len() == p {
        return (x.to_vec(), keep);
    }
    let rows = x.iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect();
    (rows, keep)
}

/// Spreads parameters of the reduced problem back over all `p` columns.
fn expand(params: &[f64], keep: &[usize], p: usize) -> Vec<f64> {
    let mut full = vec![0.0; p + 1];
    for (&j, &w) in keep.iter().zip(params) {
        full[j] = w;
    }
    full[p] = params[params.len() - 1];
    full
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub params: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Fit {
    pub fn weights(&self) -> &[f64] {
        &self.params[..self.params.len() - 1]
    }

    pub fn intercept(&self) -> f64 {
        self.params[self.params.len() - 1]
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

const RESYNC_EVERY: usize = 64;
const MAX_BACKTRACK: usize = 60;

/// Accelerated proximal gradient with backtracking and gradient restart on
/// `f(params) + l1 * |w|_1`. Stops when the gradient mapping's max-norm at
/// the returned point falls below `tol`.
///
/// Margins are carried along with every iterate (they are affine in the
/// parameters), so an iteration costs one gradient pass at the extrapolated
/// point and one margin pass per step-size trial.
#[allow(clippy::too_many_arguments)]
fn solve(x: &[Vec<f64>], ys: &[f64], l2: f64, l1: f64, start: Vec<f64>, lip: f64, tol: f64, max_iter: usize) -> Fit {
    let p = start.len() - 1;
    let prox = |v: &[f64], g: &[f64], step: f64| -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().zip(g).map(|(a, b)| a - step * b).collect();
        if l1 > 0.0 {
            for o in out[..p].iter_mut() {
                *o = soft_threshold(*o, step * l1);
            }
        }
        out
    };
    let mapping_norm =
        |a: &[f64], b: &[f64], lip: f64| a.iter().zip(b).map(|(u, v)| (lip * (u - v)).abs()).fold(0.0, f64::max);

    let mut lip = lip;
    let mut prev = start;
    let mut z_prev = margins(x, &prev);
    let mut y = prev.clone();
    let mut z_y = z_prev.clone();
    let mut t = 1.0f64;
    for it in 0..max_iter {
        // extrapolated margins accumulate rounding error
        if it % RESYNC_EVERY == RESYNC_EVERY - 1 {
            z_y = margins(x, &y);
        }
        let (fy, gy) = loss_grad(x, ys, &z_y, &y, l2);
        let slack = 1e-12 * fy.abs().max(1.0);
        let mut trials = 0;
        let (next, z_next) = loop {
            let cand = prox(&y, &gy, 1.0 / lip);
            let z_c = margins(x, &cand);
            let fc = loss_only(ys, &z_c, &cand, l2);
            let d: Vec<f64> = cand.iter().zip(&y).map(|(a, b)| a - b).collect();
            let lin: f64 = d.iter().zip(&gy).map(|(a, g)| a * g).sum();
            let quad: f64 = d.iter().map(|a| a * a).sum();
            trials += 1;
            if fc <= fy + lin + 0.5 * lip * quad + slack || trials >= MAX_BACKTRACK {
                break (cand, z_c);
            }
            lip *= 2.0;
        };

        if mapping_norm(&y, &next, lip) < tol {
            let (_, g) = loss_grad(x, ys, &z_next, &next, l2);
            if mapping_norm(&next, &prox(&next, &g, 1.0 / lip), lip) < tol {
                return Fit {
                    params: next,
                    iterations: it + 1,
                    converged: true,
                };
            }
        }

        let restart: f64 = y
            .iter()
            .zip(&next)
            .zip(&prev)
            .map(|((yy, nn), pp)| (yy - nn) * (nn - pp))
            .sum();
        if restart > 0.0 {
            t = 1.0;
            y = next.clone();
            z_y = z_next.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            y = next.iter().zip(&prev).map(|(nn, pp)| nn + beta * (nn - pp)).collect();
            z_y = z_next
                .iter()
                .zip(&z_prev)
                .map(|(nn, pp)| nn + beta * (nn - pp))
                .collect();
            t = t_next;
        }
        prev = next;
        z_prev = z_next;
    }
    Fit {
        params: prev,
        iterations: max_iter,
        converged: false,
    }
}

/// L2-regularized logistic regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticRegression {
    pub l2: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticRegression {
    fn default() -> Self {
        LogisticRegression {
            l2: 1e-2,
            tol: 1e-8,
            max_iter: 100_000,
        }
    }
}

impl LogisticRegression {
    pub fn fit(&self, x: &[Vec<f64>], y: &[bool]) -> Result<Fit> {
        check_shapes(x, y)?;
        let p = x[0].len();
        let (xr, keep) = nonzero_columns(x);
        let lip = lipschitz_estimate(&xr, self.l2);
        let mut fit = solve(
            &xr,
            &signs(y),
            self.l2,
            0.0,
            vec![0.0; keep.len() + 1],
            lip,
            self.tol,
            self.max_iter,
        );
        fit.params = expand(&fit.params, &keep, p);
        if !fit.converged {
            log::warn!(
                "logistic regression stopped after {} iterations without reaching tolerance {}",
                fit.iterations,
                self.tol
            );
        }
        Ok(fit)
    }

    pub fn predict_proba(fit: &Fit, x: &[Vec<f64>]) -> Vec<f64> {
        x.iter().map(|r| sigmoid(margin(r, &fit.params))).collect()
    }
}

fn check_shapes(x: &[Vec<f64>], y: &[bool]) -> Result<()> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} training rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    let p = x[0].len();
    if x.iter().any(|r| r.len() != p) {
        return Err(Error::Shape("ragged training matrix".into()));
    }
    Ok(())
}

/// Intercept of the weightless model: the log-odds of the positive class.
fn null_intercept(y: &[bool]) -> f64 {
    let pos = y.iter().filter(|&&b| b).count() as f64;
    let neg = y.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        0.0
    } else {
        (pos / neg).ln()
    }
}

/// Smallest L1 strength at which every weight is zero at the optimum.
pub fn lasso_lambda_max(x: &[Vec<f64>], y: &[bool]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let p = x[0].len();
    let mut params = vec![0.0; p + 1];
    params[p] = null_intercept(y);
    let (_, g) = logistic_objective(x, y, &params, 0.0);
    g[..p].iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub support: Vec<usize>,
    pub fit: Fit,
}

pub const LASSO_SUPPORT_EPS: f64 = 1e-8;

pub const LASSO_TOL: f64 = 1e-7;
pub const LASSO_MAX_ITER: usize = 20_000;

/// L1-penalized logistic regression from zero weights (intercept at its
/// null-model value); the support is every column with `|coef| > 1e-8`.
/// Non-convergence is logged and the current support returned.
pub fn lasso_select(x: &[Vec<f64>], y: &[bool], lambda: f64) -> Result<LassoFit> {
    Ok(lasso_path(x, y, &[lambda])?.pop().expect("one penalty"))
}

/// [`lasso_select`] for several penalties, solved from the largest down with
/// each solution starting the next. Results follow the order of `lambdas`.
pub fn lasso_path(x: &[Vec<f64>], y: &[bool], lambdas: &[f64]) -> Result<Vec<LassoFit>> {
    check_shapes(x, y)?;
    if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument(format!("invalid lasso penalty {bad}")));
    }
    let p = x[0].len();
    let ys = signs(y);
    let (xr, keep) = nonzero_columns(x);
    let lip = lipschitz_estimate(&xr, 0.0);
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));
    let mut params = vec![0.0; keep.len() + 1];
    params[keep.len()] = null_intercept(y);
    let mut fits: Vec<Option<LassoFit>> = vec![None; lambdas.len()];
    for i in order {
        let lambda = lambdas[i];
        let mut fit = solve(&xr, &ys, 0.0, lambda, params, lip, LASSO_TOL, LASSO_MAX_ITER);
        if !fit.converged {
            log::warn!("lasso (lambda = {lambda}) did not converge; using the current support");
        }
        params = std::mem::take(&mut fit.params);
        fit.params = expand(&params, &keep, p);
        let support = fit
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, w)| w.abs() > LASSO_SUPPORT_EPS)
            .map(|(j, _)| j)
            .collect();
        fits[i] = Some(LassoFit { support, fit });
    }
    Ok(fits.into_iter().map(|f| f.expect("every penalty solved")).collect())
}

/// Euclidean k-nearest neighbours; the score is the positive fraction among
/// the `k` nearest rows, distance ties going to the lower row index.
pub fn knn_scores(train_x: &[Vec<f64>], train_y: &[bool], test_x: &[Vec<f64>], k: usize) -> Result<Vec<f64>> {
    check_shapes(train_x, train_y)?;
    if k == 0 || k > train_x.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} but only {} training rows",
            train_x.len()
        )));
    }
    Ok(test_x
        .iter()
        .map(|q| {
            let mut d: Vec<(f64, usize)> = train_x
                .iter()
                .enumerate()
                .map(|(i, r)| (r.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), i))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d[..k].iter().filter(|(_, i)| train_y[*i]).count() as f64 / k as f64
        })
        .collect())
}

/// Relative error between the analytic logistic gradient and central finite
/// differences (`h = 1e-5`) on a random instance.
pub fn gradient_check(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(5..30);
    let p = rng.gen_range(1..8);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let y: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let params: Vec<f64> = (0..=p).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let l2 = rng.gen_range(0.0..1.0);
    let (_, g) = logistic_objective(&x, &y, &params, l2);
    let h = 1e-5;
    let fd: Vec<f64> = (0..=p)
        .map(|j| {
            let mut a = params.clone();
            let mut b = params.clone();
            a[j] += h;
            b[j] -= h;
            (logistic_objective(&x, &y, &a, l2).0 - logistic_objective(&x, &y, &b, l2).0) / (2.0 * h)
        })
        .collect();
    let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
    diff / norm
}
