//! Independent reference implementations backing the l0class test suites:
//! brute-force enumeration, literal grid search, damped Newton and plain
//! gradient descent on restricted problems, and pairwise rank statistics.
//!
//! The crate is deliberately standalone: it operates on raw column arrays
//! and labels with its own loss formulas and solvers, so nothing here routes
//! through the implementation paths under test.

/// Loss functions, mirrored independently of the main crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Loss {
    Logistic,
    SquaredHinge,
    SmoothedHinge(f64),
}

pub fn loss_value(loss: Loss, vhat: f64, v: f64) -> f64 {
    let m = vhat * v;
    match loss {
        Loss::Logistic => {
            if m > 30.0 {
                (-m).exp()
            } else {
                (1.0 + (-m).exp()).ln()
            }
        }
        Loss::SquaredHinge => (1.0 - m).max(0.0).powi(2),
        Loss::SmoothedHinge(mu) => {
            if m >= 1.0 {
                0.0
            } else if m <= 1.0 - mu {
                1.0 - m - 0.5 * mu
            } else {
                (1.0 - m).powi(2) / (2.0 * mu)
            }
        }
    }
}

pub fn loss_deriv(loss: Loss, vhat: f64, v: f64) -> f64 {
    let m = vhat * v;
    match loss {
        Loss::Logistic => -v / (1.0 + m.exp()),
        Loss::SquaredHinge => {
            if m < 1.0 {
                -2.0 * v * (1.0 - m)
            } else {
                0.0
            }
        }
        Loss::SmoothedHinge(mu) => {
            if m >= 1.0 {
                0.0
            } else if m <= 1.0 - mu {
                -v
            } else {
                -v * (1.0 - m) / mu
            }
        }
    }
}

pub fn loss_second_deriv(loss: Loss, vhat: f64, v: f64) -> f64 {
    let m = vhat * v;
    match loss {
        Loss::Logistic => {
            let s = 1.0 / (1.0 + (-m).exp());
            s * (1.0 - s)
        }
        Loss::SquaredHinge => {
            if m < 1.0 {
                2.0
            } else {
                0.0
            }
        }
        Loss::SmoothedHinge(mu) => {
            if m < 1.0 && m > 1.0 - mu {
                1.0 / mu
            } else {
                0.0
            }
        }
    }
}

fn curvature_factor(loss: Loss) -> f64 {
    match loss {
        Loss::Logistic => 0.25,
        Loss::SquaredHinge => 2.0,
        Loss::SmoothedHinge(mu) => 1.0 / mu,
    }
}

fn scores_from(cols: &[Vec<f64>], beta: &[f64], n: usize) -> Vec<f64> {
    let mut u = vec![0.0; n];
    for (j, col) in cols.iter().enumerate() {
        if beta[j] != 0.0 {
            for (ui, x) in u.iter_mut().zip(col) {
                *ui += beta[j] * x;
            }
        }
    }
    u
}

/// Full penalized objective recomputed from raw definitions over dense
/// columns.
pub fn naive_objective(
    loss: Loss,
    columns: &[Vec<f64>],
    y: &[f64],
    beta: &[(usize, f64)],
    l0: f64,
    l1: f64,
    l2: f64,
) -> f64 {
    let n = y.len();
    let mut dense = vec![0.0; columns.len()];
    for &(j, b) in beta {
        dense[j] = b;
    }
    let u = scores_from(columns, &dense, n);
    let mut total = 0.0;
    for (ui, yi) in u.iter().zip(y) {
        total += loss_value(loss, *ui, *yi);
    }
    let g = total / n as f64;
    let nnz = dense.iter().filter(|b| **b != 0.0).count();
    g + l1 * dense.iter().map(|b| b.abs()).sum::<f64>()
        + l2 * dense.iter().map(|b| b * b).sum::<f64>()
        + l0 * nnz as f64
}

// ---------------------------------------------------------------------------
// One-dimensional thresholding oracle
// ---------------------------------------------------------------------------

/// The 1-D surrogate objective minimized by the thresholding operator.
pub fn threshold_objective(alpha: f64, c: f64, l0: f64, l1: f64, l2: f64, lhat: f64) -> f64 {
    let indicator = if alpha != 0.0 { 1.0 } else { 0.0 };
    0.5 * lhat * (alpha - c) * (alpha - c) + l0 * indicator + l1 * alpha.abs() + l2 * alpha * alpha
}

const GRID_STEP: f64 = 1e-6;
const GRID_RANGE: i64 = 10_000_000; // +- 10 in units of 1e-6

/// Literal scan of the grid `{t * 1e-6 : |t| <= 1e7} U {0}`.
pub fn threshold_grid_min_literal(c: f64, l0: f64, l1: f64, l2: f64, lhat: f64) -> f64 {
    let mut best = threshold_objective(0.0, c, l0, l1, l2, lhat);
    for t in -GRID_RANGE..=GRID_RANGE {
        let a = t as f64 * GRID_STEP;
        let v = threshold_objective(a, c, l0, l1, l2, lhat);
        if v < best {
            best = v;
        }
    }
    best
}

/// Exact value of the literal grid scan, computed from the piecewise
/// quadratic structure: on each sign half-line the objective is a convex
/// quadratic, so its minimum over a uniform grid is attained at a grid point
/// adjacent to the (clamped) vertex.
pub fn threshold_grid_min(c: f64, l0: f64, l1: f64, l2: f64, lhat: f64) -> f64 {
    let mut best = threshold_objective(0.0, c, l0, l1, l2, lhat);
    let denom = lhat + 2.0 * l2;
    // positive side: vertex of (lhat/2)(a-c)^2 + l1 a + l2 a^2
    let v_pos = (lhat * c - l1) / denom;
    // negative side: vertex of (lhat/2)(a-c)^2 - l1 a + l2 a^2
    let v_neg = (lhat * c + l1) / denom;
    let mut candidates: Vec<i64> = Vec::new();
    for (vertex, lo, hi) in [(v_pos, 1i64, GRID_RANGE), (v_neg, -GRID_RANGE, -1i64)] {
        let clamped = vertex.clamp(lo as f64 * GRID_STEP, hi as f64 * GRID_STEP);
        let t = (clamped / GRID_STEP).floor() as i64;
        for cand in [t - 1, t, t + 1] {
            if cand >= lo && cand <= hi {
                candidates.push(cand);
            }
        }
        candidates.push(lo);
        candidates.push(hi);
    }
    for t in candidates {
        let v = threshold_objective(t as f64 * GRID_STEP, c, l0, l1, l2, lhat);
        if v < best {
            best = v;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Restricted smooth solvers
// ---------------------------------------------------------------------------

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let s = b.len();
    for col in 0..s {
        let (pivot, pval) = (col..s)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if pval < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in (col + 1)..s {
            let f = a[r][col] / a[col][col];
            for k in col..s {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; s];
    for col in (0..s).rev() {
        let mut acc = b[col];
        for k in (col + 1)..s {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Minimizes `g(beta) + l2 ||beta||^2` restricted to `support` by damped
/// Newton with Armijo backtracking. Returns the dense minimizer (length
/// `columns.len()`) and the restricted objective value.
pub fn restricted_min_smooth(
    columns: &[Vec<f64>],
    y: &[f64],
    loss: Loss,
    support: &[usize],
    l2: f64,
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let n = y.len();
    let nf = n as f64;
    let s = support.len();
    let cols: Vec<&Vec<f64>> = support.iter().map(|&j| &columns[j]).collect();

    let eval = |b: &[f64]| -> (f64, Vec<f64>, Vec<f64>) {
        let mut u = vec![0.0; n];
        for (bj, col) in b.iter().zip(&cols) {
            if *bj != 0.0 {
                for (ui, x) in u.iter_mut().zip(col.iter()) {
                    *ui += bj * x;
                }
            }
        }
        let mut total = 0.0;
        let mut w = vec![0.0; n];
        for k in 0..n {
            total += loss_value(loss, u[k], y[k]);
            w[k] = loss_deriv(loss, u[k], y[k]);
        }
        let ridge: f64 = b.iter().map(|x| x * x).sum::<f64>() * l2;
        (total / nf + ridge, u, w)
    };

    let mut beta = vec![0.0; s];
    if s == 0 {
        let (obj, _, _) = eval(&beta);
        return (vec![0.0; columns.len()], obj);
    }

    for _ in 0..max_iters {
        let (obj, u, w) = eval(&beta);
        let grad: Vec<f64> = (0..s)
            .map(|a| {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += w[k] * cols[a][k];
                }
                acc / nf + 2.0 * l2 * beta[a]
            })
            .collect();
        let gmax = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
        if gmax <= tol {
            break;
        }
        // Hessian with small damping so flat squared-hinge regions stay
        // solvable even at l2 = 0
        let h2: Vec<f64> = (0..n).map(|k| loss_second_deriv(loss, u[k], y[k])).collect();
        let mut hess = vec![vec![0.0; s]; s];
        for a in 0..s {
            for b2 in a..s {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += h2[k] * cols[a][k] * cols[b2][k];
                }
                let v = acc / nf + if a == b2 { 2.0 * l2 + 1e-10 } else { 0.0 };
                hess[a][b2] = v;
                hess[b2][a] = v;
            }
        }
        let dir = match solve_linear(hess, grad.iter().map(|g| -g).collect()) {
            Some(dir) => dir,
            None => grad.iter().map(|g| -g).collect(),
        };
        let slope: f64 = grad.iter().zip(&dir).map(|(g, s)| g * s).sum();
        let (slope, dir) = if slope < 0.0 {
            (slope, dir)
        } else {
            let fallback: Vec<f64> = grad.iter().map(|g| -g).collect();
            let sl: f64 = -grad.iter().map(|g| g * g).sum::<f64>();
            (sl, fallback)
        };
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = beta.iter().zip(&dir).map(|(b, s)| b + t * s).collect();
            let (oc, _, _) = eval(&cand);
            if oc <= obj + 1e-4 * t * slope || t < 1e-18 {
                beta = cand;
                break;
            }
            t *= 0.5;
        }
    }
    let (obj, _, _) = eval(&beta);
    let mut dense = vec![0.0; columns.len()];
    for (a, &j) in support.iter().enumerate() {
        dense[j] = beta[a];
    }
    (dense, obj)
}

/// Plain gradient descent with backtracking on `g(beta) + l2 ||beta||^2`
/// over all coordinates, run until the gradient max-norm drops below `tol`.
pub fn smooth_ridge_gd(
    columns: &[Vec<f64>],
    y: &[f64],
    loss: Loss,
    l2: f64,
    tol: f64,
    max_iters: usize,
) -> Vec<f64> {
    let n = y.len();
    let nf = n as f64;
    let p = columns.len();
    let eval = |b: &[f64]| -> f64 {
        let u = scores_from(columns, b, n);
        let mut total = 0.0;
        for k in 0..n {
            total += loss_value(loss, u[k], y[k]);
        }
        total / nf + l2 * b.iter().map(|x| x * x).sum::<f64>()
    };
    let mut beta = vec![0.0; p];
    let mut obj = eval(&beta);
    for _ in 0..max_iters {
        let u = scores_from(columns, &beta, n);
        let grad: Vec<f64> = (0..p)
            .map(|j| {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += loss_deriv(loss, u[k], y[k]) * columns[j][k];
                }
                acc / nf + 2.0 * l2 * beta[j]
            })
            .collect();
        let gmax = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
        if gmax <= tol {
            break;
        }
        let slope: f64 = -grad.iter().map(|g| g * g).sum::<f64>();
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = beta.iter().zip(&grad).map(|(b, g)| b - t * g).collect();
            let oc = eval(&cand);
            if oc <= obj + 1e-4 * t * slope || t < 1e-18 {
                beta = cand;
                obj = oc;
                break;
            }
            t *= 0.5;
        }
    }
    beta
}

// ---------------------------------------------------------------------------
// Support enumeration
// ---------------------------------------------------------------------------

/// Exhaustive minimum of `P` over all `2^p` supports with `lambda1 = 0`:
/// each support is solved by the restricted Newton oracle. Suitable for
/// `p <= 16`.
pub fn best_subset_enumeration(
    columns: &[Vec<f64>],
    y: &[f64],
    loss: Loss,
    l0: f64,
    l2: f64,
) -> (Vec<usize>, f64) {
    let p = columns.len();
    assert!(p <= 16, "exhaustive enumeration limited to p <= 16");
    let mut best_p = f64::INFINITY;
    let mut best_support = Vec::new();
    for mask in 0u32..(1 << p) {
        let support: Vec<usize> = (0..p).filter(|j| mask >> j & 1 == 1).collect();
        let (_, g_star) = restricted_min_smooth(columns, y, loss, &support, l2, 1e-11, 200);
        let total = g_star + l0 * support.len() as f64;
        if total < best_p {
            best_p = total;
            best_support = support;
        }
    }
    (best_support, best_p)
}

/// Separable bound used by [`best_subset_up_to_size`]:
/// `G*(T) >= g(0) - sum_{j in T} grad_j(0)^2 / (4 l2)` for `lambda1 = 0`.
pub fn restricted_lower_bound(
    columns: &[Vec<f64>],
    y: &[f64],
    loss: Loss,
    support: &[usize],
    l2: f64,
) -> f64 {
    let nf = y.len() as f64;
    let g0: f64 = y.iter().map(|&v| loss_value(loss, 0.0, v)).sum::<f64>() / nf;
    let w0: Vec<f64> = y.iter().map(|&v| loss_deriv(loss, 0.0, v)).collect();
    let mut total = g0;
    for &j in support {
        let mut acc = 0.0;
        for (k, x) in columns[j].iter().enumerate() {
            acc += w0[k] * x;
        }
        let g = acc / nf;
        total -= g * g / (4.0 * l2);
    }
    total
}

struct SubsetSearch<'a> {
    columns: &'a [Vec<f64>],
    y: &'a [f64],
    loss: Loss,
    l0: f64,
    l2: f64,
    max_size: usize,
    order: Vec<usize>,
    sorted_gain: Vec<f64>,
    prefix: Vec<f64>,
    g0: f64,
    best_p: f64,
    best_support: Vec<usize>,
}

impl SubsetSearch<'_> {
    fn dfs(&mut self, pos: usize, set: &mut Vec<usize>, sum_gain: f64) {
        let p = self.order.len();
        for t in pos..p {
            let slots_after = self.max_size - set.len() - 1;
            let extra_end = (t + 1 + slots_after).min(p);
            let max_extra = self.prefix[extra_end] - self.prefix[t + 1];
            let bound = self.g0 - (sum_gain + self.sorted_gain[t] + max_extra)
                + self.l0 * (set.len() + 1) as f64;
            if bound >= self.best_p - 1e-12 {
                // later positions have smaller gains, so every remaining
                // branch at this level is bounded at least as high
                break;
            }
            set.push(self.order[t]);
            let mut support = set.clone();
            support.sort_unstable();
            let (_, g_star) =
                restricted_min_smooth(self.columns, self.y, self.loss, &support, self.l2, 1e-10, 200);
            let total = g_star + self.l0 * set.len() as f64;
            if total < self.best_p {
                self.best_p = total;
                self.best_support = support;
            }
            if set.len() < self.max_size {
                self.dfs(t + 1, set, sum_gain + self.sorted_gain[t]);
            }
            set.pop();
        }
    }
}

/// Exact minimum of `P` over all supports of size at most `max_size`, for
/// `lambda1 = 0` and `lambda2 > 0`. Prunes with the separable bound of
/// [`restricted_lower_bound`], so it scales to a few hundred features.
pub fn best_subset_up_to_size(
    columns: &[Vec<f64>],
    y: &[f64],
    loss: Loss,
    l0: f64,
    l2: f64,
    max_size: usize,
) -> (Vec<usize>, f64) {
    assert!(l2 > 0.0, "the pruning bound requires lambda2 > 0");
    let p = columns.len();
    let nf = y.len() as f64;

    let g0: f64 = y.iter().map(|&v| loss_value(loss, 0.0, v)).sum::<f64>() / nf;
    let w0: Vec<f64> = y.iter().map(|&v| loss_deriv(loss, 0.0, v)).collect();
    let gain: Vec<f64> = (0..p)
        .map(|j| {
            let mut acc = 0.0;
            for (k, x) in columns[j].iter().enumerate() {
                acc += w0[k] * x;
            }
            let g = acc / nf;
            g * g / (4.0 * l2)
        })
        .collect();

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| gain[b].partial_cmp(&gain[a]).unwrap().then(a.cmp(&b)));
    let sorted_gain: Vec<f64> = order.iter().map(|&j| gain[j]).collect();
    let mut prefix = vec![0.0; p + 1];
    for i in 0..p {
        prefix[i + 1] = prefix[i] + sorted_gain[i];
    }

    let mut search = SubsetSearch {
        columns,
        y,
        loss,
        l0,
        l2,
        max_size,
        order,
        sorted_gain,
        prefix,
        g0,
        best_p: g0, // empty support
        best_support: Vec::new(),
    };
    let mut set = Vec::new();
    search.dfs(0, &mut set, 0.0);
    (search.best_support, search.best_p)
}

// ---------------------------------------------------------------------------
// Separable prox enumeration (hard-thresholding oracle)
// ---------------------------------------------------------------------------

/// Brute-force minimizer of the cardinality-constrained separable prox
/// problem: over every support of size `k`, each selected coordinate takes
/// its 1-D soft-ridge optimum.
pub fn prox_topk(c: &[f64], tau: f64, l1: f64, l2: f64, k: usize) -> Vec<f64> {
    let p = c.len();
    assert!(p <= 20);
    let shrink = |ci: f64| -> f64 {
        let mag = (ci.abs() - tau * l1).max(0.0) / (1.0 + 2.0 * tau * l2);
        mag * ci.signum()
    };
    let coord_obj =
        |b: f64, ci: f64| -> f64 { (b - ci) * (b - ci) / (2.0 * tau) + l1 * b.abs() + l2 * b * b };
    let mut best = f64::INFINITY;
    let mut best_vec = vec![0.0; p];
    for mask in 0u32..(1 << p) {
        if (mask.count_ones() as usize) != k.min(p) {
            continue;
        }
        let mut obj = 0.0;
        let mut vec_b = vec![0.0; p];
        for j in 0..p {
            if mask >> j & 1 == 1 {
                let b = shrink(c[j]);
                vec_b[j] = b;
                obj += coord_obj(b, c[j]);
            } else {
                obj += coord_obj(0.0, c[j]);
            }
        }
        if obj < best - 1e-15 {
            best = obj;
            best_vec = vec_b;
        }
    }
    best_vec
}

// ---------------------------------------------------------------------------
// Pairwise AUC
// ---------------------------------------------------------------------------

/// O(n^2) pairwise AUC with exact integer counting: concordant pairs count
/// 2, ties count 1, divided by `2 n+ n-`.
pub fn pairwise_auc(scores: &[f64], labels: &[f64]) -> f64 {
    let mut num: i64 = 0;
    let mut n_pos: i64 = 0;
    let mut n_neg: i64 = 0;
    for (si, yi) in scores.iter().zip(labels) {
        if *yi > 0.0 {
            n_pos += 1;
            for (sj, yj) in scores.iter().zip(labels) {
                if *yj < 0.0 {
                    if si > sj {
                        num += 2;
                    } else if si == sj {
                        num += 1;
                    }
                }
            }
        } else {
            n_neg += 1;
        }
    }
    num as f64 / (2 * n_pos * n_neg) as f64
}

// ---------------------------------------------------------------------------
// Box-constrained l1 solver (node relaxation oracle)
// ---------------------------------------------------------------------------

/// Proximal gradient descent for
/// `min g(beta) + sum_i l1_eff[i] |beta_i| + l2 ||beta||^2`
/// over the box `|beta_i| <= box_m`, frozen coordinates pinned at zero.
/// Uses a Frobenius-norm step bound, run to a coefficient tolerance.
#[allow(clippy::too_many_arguments)]
pub fn box_l1_prox_gradient(
    columns: &[Vec<f64>],
    y: &[f64],
    loss: Loss,
    l1_eff: &[f64],
    l2: f64,
    box_m: f64,
    frozen: &[bool],
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let n = y.len();
    let nf = n as f64;
    let p = columns.len();
    let frob_sq: f64 = columns.iter().flatten().map(|x| x * x).sum();
    let l_est = (curvature_factor(loss) * frob_sq / nf).max(1e-12);
    let step = 1.0 / l_est;

    let mut beta = vec![0.0; p];
    for _ in 0..max_iters {
        let u = scores_from(columns, &beta, n);
        let mut max_delta = 0.0f64;
        let grad: Vec<f64> = (0..p)
            .map(|j| {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += loss_deriv(loss, u[k], y[k]) * columns[j][k];
                }
                acc / nf
            })
            .collect();
        for j in 0..p {
            if frozen[j] {
                continue;
            }
            let z = beta[j] - step * grad[j];
            let mag = (z.abs() - step * l1_eff[j]).max(0.0) / (1.0 + 2.0 * step * l2);
            let new = (mag * z.signum()).clamp(-box_m, box_m);
            max_delta = max_delta.max((new - beta[j]).abs());
            beta[j] = new;
        }
        if max_delta < tol {
            break;
        }
    }
    let u = scores_from(columns, &beta, n);
    let mut obj = 0.0;
    for k in 0..n {
        obj += loss_value(loss, u[k], y[k]);
    }
    obj /= nf;
    for j in 0..p {
        obj += l1_eff[j] * beta[j].abs() + l2 * beta[j] * beta[j];
    }
    (beta, obj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_grid_min_matches_literal_scan() {
        // A handful of draws; the literal scan is 2e7 evaluations per case.
        let cases = [
            (1.5, 0.5, 0.1, 0.25, 2.0),
            (0.7, 0.5, 0.1, 0.25, 2.0),
            (-3.2, 0.0, 0.4, 0.0, 1.0),
            (0.0, 1.0, 0.0, 0.5, 0.7),
            (8.9, 2.0, 1.5, 1.2, 3.3),
        ];
        for (c, l0, l1, l2, lhat) in cases {
            let fast = threshold_grid_min(c, l0, l1, l2, lhat);
            let literal = threshold_grid_min_literal(c, l0, l1, l2, lhat);
            assert_eq!(fast, literal, "case ({c},{l0},{l1},{l2},{lhat})");
        }
    }

    #[test]
    fn newton_zeroes_off_support_coordinates() {
        // tiny handmade instance
        let columns = vec![
            vec![1.0, -0.5, 0.25, 2.0],
            vec![0.5, 1.5, -1.0, 0.0],
            vec![-1.0, 0.5, 0.75, 1.0],
        ];
        let y = vec![1.0, -1.0, 1.0, -1.0];
        let support = vec![0, 2];
        let (beta, obj) =
            restricted_min_smooth(&columns, &y, Loss::Logistic, &support, 0.1, 1e-11, 100);
        assert!(obj.is_finite());
        assert_eq!(beta[1], 0.0);
    }

    #[test]
    fn pairwise_auc_known_value() {
        let scores = [0.9, 0.8, 0.4, 0.1];
        let labels = [1.0, -1.0, 1.0, -1.0];
        assert_eq!(pairwise_auc(&scores, &labels), 0.75);
    }
}
