//! Classification losses, their derivatives, Lipschitz constants, and the
//! from-scratch objective evaluator.
//!
//! The fitted objective is
//!
//! ```text
//! P(beta) = G(beta) + lambda0 ||beta||_0
//! G(beta) = g(beta) + lambda1 ||beta||_1 + lambda2 ||beta||_2^2
//! g(beta) = (1/n) sum_i f(<x_i, beta>, y_i)
//! ```
//!
//! [`objective`] recomputes all three from raw definitions; it is the audit
//! path, not the hot path (solvers maintain scores incrementally).

use crate::data::Dataset;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default smoothing parameter for the smoothed hinge loss.
pub const DEFAULT_SMOOTHING: f64 = 0.2;

/// Coordinates with zero columns get their curvature floored at this value
/// so thresholding never divides by zero; such coordinates provably stay at
/// zero whenever `lambda0 > 0` or `lambda1 > 0`.
pub const LIPSCHITZ_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossKind {
    /// `log(1 + exp(-vhat * v))`
    Logistic,
    /// `max(0, 1 - vhat * v)^2`
    SquaredHinge,
    /// Quadratic smoothing of the hinge with parameter `mu > 0`: with margin
    /// `m = vhat * v`, the loss is `0` for `m >= 1`, `1 - m - mu/2` for
    /// `m <= 1 - mu`, and `(1 - m)^2 / (2 mu)` in between. Uniform gap to the
    /// hinge is at most `mu / 2`.
    SmoothedHinge { mu: f64 },
}

impl LossKind {
    pub fn smoothed_hinge(mu: f64) -> Result<LossKind> {
        if mu > 0.0 {
            Ok(LossKind::SmoothedHinge { mu })
        } else {
            Err(Error::InvalidSpec(format!("smoothing mu must be positive; got {mu}")))
        }
    }

    /// Loss value `f(vhat, v)` for a label `v` in `{-1,+1}`.
    pub fn value(&self, vhat: f64, v: f64) -> f64 {
        let m = vhat * v;
        match *self {
            LossKind::Logistic => {
                // log(1 + exp(-m)), stable for large |m|
                if m >= 0.0 {
                    (-m).exp().ln_1p()
                } else {
                    -m + m.exp().ln_1p()
                }
            }
            LossKind::SquaredHinge => {
                let r = (1.0 - m).max(0.0);
                r * r
            }
            LossKind::SmoothedHinge { mu } => {
                if m >= 1.0 {
                    0.0
                } else if m <= 1.0 - mu {
                    1.0 - m - mu / 2.0
                } else {
                    (1.0 - m) * (1.0 - m) / (2.0 * mu)
                }
            }
        }
    }

    /// `d f / d vhat`.
    pub fn derivative(&self, vhat: f64, v: f64) -> f64 {
        let m = vhat * v;
        match *self {
            LossKind::Logistic => {
                // -v * sigma(-m)
                let s = if m >= 0.0 {
                    let e = (-m).exp();
                    e / (1.0 + e)
                } else {
                    1.0 / (1.0 + m.exp())
                };
                -v * s
            }
            LossKind::SquaredHinge => {
                if m < 1.0 {
                    -2.0 * v * (1.0 - m)
                } else {
                    0.0
                }
            }
            LossKind::SmoothedHinge { mu } => {
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

    /// Upper bound on the second derivative of `f` in its first argument:
    /// 1/4 for logistic, 2 for squared hinge, 1/mu for smoothed hinge.
    pub fn curvature_factor(&self) -> f64 {
        match *self {
            LossKind::Logistic => 0.25,
            LossKind::SquaredHinge => 2.0,
            LossKind::SmoothedHinge { mu } => 1.0 / mu,
        }
    }
}

/// The penalty triple `(lambda0, lambda1, lambda2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyParams {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl PenaltyParams {
    pub fn new(lambda0: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        if lambda0 < 0.0 || lambda1 < 0.0 || lambda2 < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "penalties must be non-negative; got ({lambda0}, {lambda1}, {lambda2})"
            )));
        }
        Ok(PenaltyParams {
            lambda0,
            lambda1,
            lambda2,
        })
    }

    pub fn l0(lambda0: f64) -> Self {
        PenaltyParams::new(lambda0, 0.0, 0.0).unwrap()
    }
}

/// Per-coordinate Lipschitz constants `L_i = c_f ||X_i||^2 / n` of the
/// partial gradients. Zero columns yield `L_i = 0`; solvers floor at
/// [`LIPSCHITZ_FLOOR`].
pub fn coordinate_lipschitz(kind: LossKind, d: &Dataset) -> Vec<f64> {
    let cf = kind.curvature_factor();
    let n = d.n() as f64;
    d.col_sq_norms().iter().map(|&s| cf * s / n).collect()
}

const POWER_ITER_MAX: usize = 1000;
const POWER_ITER_TOL: f64 = 1e-6;

/// Safety factor applied to the power-iteration estimate of the largest
/// singular value, so the returned constant upper-bounds the truth despite
/// the iteration's relative tolerance.
pub const GLOBAL_LIPSCHITZ_MARGIN: f64 = 1.01;

/// Lipschitz constant of the full gradient: `1.01 * c_f * sigma_max(X)^2 / n`
/// with `sigma_max` estimated by power iteration on `X^T X` to relative
/// tolerance 1e-6.
pub fn global_lipschitz(kind: LossKind, d: &Dataset) -> Result<f64> {
    let (n, p) = (d.n(), d.p());
    // Deterministic start aligned with the column norms.
    let mut v: Vec<f64> = (0..p)
        .map(|j| d.col_sq_norm(j).sqrt() + 1.0 / (j + 1) as f64)
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || d.col_sq_norms().iter().all(|&s| s == 0.0) {
        return Ok(0.0);
    }
    for x in &mut v {
        *x /= norm;
    }

    let mut sigma_sq_prev = 0.0;
    let mut u = vec![0.0; n];
    for iter in 0..POWER_ITER_MAX {
        u.iter_mut().for_each(|x| *x = 0.0);
        for (j, &b) in v.iter().enumerate() {
            if b != 0.0 {
                d.column(j).axpy(b, &mut u);
            }
        }
        let sigma_sq: f64 = u.iter().map(|x| x * x).sum();
        if sigma_sq == 0.0 {
            return Ok(0.0);
        }
        // v <- X^T u, renormalized
        for (j, out) in v.iter_mut().enumerate() {
            let mut acc = 0.0;
            d.column(j).for_each_nonzero(|k, x| acc += u[k] * x);
            *out = acc;
        }
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= vnorm;
        }
        if iter > 0 && (sigma_sq - sigma_sq_prev).abs() <= POWER_ITER_TOL * sigma_sq {
            let cf = kind.curvature_factor();
            return Ok(GLOBAL_LIPSCHITZ_MARGIN * cf * sigma_sq / n as f64);
        }
        sigma_sq_prev = sigma_sq;
    }
    Err(Error::PowerIterationDiverged(POWER_ITER_MAX))
}

/// The three objective levels evaluated at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Objectives {
    /// `P = G + lambda0 ||beta||_0`
    pub penalized: f64,
    /// `G = g + lambda1 ||beta||_1 + lambda2 ||beta||_2^2`
    pub regularized: f64,
    /// `g`, the mean loss
    pub loss: f64,
}

/// Mean loss over precomputed scores `u = X beta`.
pub fn mean_loss(kind: LossKind, scores: &[f64], y: &[f64]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(y)
        .map(|(&u, &v)| kind.value(u, v))
        .sum();
    total / y.len() as f64
}

/// Recomputes `(P, G, g)` from scratch for a sparse coefficient vector.
/// `||beta||_0` counts the stored (structurally nonzero) entries.
pub fn objective(
    kind: LossKind,
    d: &Dataset,
    beta: &[(usize, f64)],
    lam: &PenaltyParams,
) -> Objectives {
    let scores = d.scores(beta);
    let g = mean_loss(kind, &scores, d.y());
    let l1: f64 = beta.iter().map(|(_, b)| b.abs()).sum();
    let l2: f64 = beta.iter().map(|(_, b)| b * b).sum();
    let support = beta.iter().filter(|(_, b)| *b != 0.0).count();
    let reg = g + lam.lambda1 * l1 + lam.lambda2 * l2;
    Objectives {
        penalized: reg + lam.lambda0 * support as f64,
        regularized: reg,
        loss: g,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, Correlation, ResponseModel, SyntheticSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, p: usize) -> SyntheticSpec {
        SyntheticSpec {
            n,
            p,
            correlation: Correlation::Identity,
            k_dagger: p.min(3),
            response_model: ResponseModel::BernoulliLogistic { s: 1.0 },
        }
    }

    const KINDS: [LossKind; 3] = [
        LossKind::Logistic,
        LossKind::SquaredHinge,
        LossKind::SmoothedHinge { mu: 0.2 },
    ];

    #[test]
    fn logistic_at_zero_is_log_two() {
        for v in [-1.0, 1.0] {
            assert!((LossKind::Logistic.value(0.0, v) - 2.0f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn squared_hinge_zero_past_margin() {
        assert_eq!(LossKind::SquaredHinge.value(2.0, 1.0), 0.0);
        assert_eq!(LossKind::SquaredHinge.derivative(2.0, 1.0), 0.0);
    }

    #[test]
    fn smoothed_hinge_uniform_gap() {
        for &mu in &[0.05, 0.2, 1.0] {
            let kind = LossKind::smoothed_hinge(mu).unwrap();
            let mut m: f64 = -3.0;
            while m <= 3.0 {
                let hinge = (1.0 - m).max(0.0);
                let smooth = kind.value(m, 1.0);
                assert!(
                    (smooth - hinge).abs() <= mu / 2.0 + 1e-15,
                    "mu={mu} m={m}: |{smooth} - {hinge}|"
                );
                m += 0.01;
            }
        }
    }

    #[test]
    fn logistic_derivative_at_zero() {
        assert!((LossKind::Logistic.derivative(0.0, 1.0) - (-0.5)).abs() < 1e-15);
        assert!((LossKind::Logistic.derivative(0.0, -1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = 1e-6;
        for _ in 0..10_000 {
            let kind = KINDS[rng.random_range(0..3)];
            let vhat: f64 = rng.random_range(-4.0..4.0);
            let v = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let fd = (kind.value(vhat + h, v) - kind.value(vhat - h, v)) / (2.0 * h);
            let an = kind.derivative(vhat, v);
            assert!(
                (an - fd).abs() <= 1e-6 * (1.0 + an.abs()),
                "{kind:?} vhat={vhat} v={v}: {an} vs {fd}"
            );
        }
    }

    #[test]
    fn losses_nonnegative_and_midpoint_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let kind = KINDS[rng.random_range(0..3)];
            let a: f64 = rng.random_range(-5.0..5.0);
            let b: f64 = rng.random_range(-5.0..5.0);
            let v = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let fa = kind.value(a, v);
            let fb = kind.value(b, v);
            let fm = kind.value(0.5 * (a + b), v);
            assert!(fa >= 0.0 && fb >= 0.0);
            assert!(fm <= 0.5 * (fa + fb) + 1e-12);
        }
    }

    #[test]
    fn coordinate_lipschitz_values() {
        // single column (2, 0, ..., 0)^T scaled so ||X_1||^2 = 4, n = 1
        let d = crate::data::Dataset::from_rows(&[vec![2.0]], vec![1.0]).unwrap();
        let l_log = coordinate_lipschitz(LossKind::Logistic, &d);
        assert!((l_log[0] - 1.0).abs() < 1e-15);
        let l_sq = coordinate_lipschitz(LossKind::SquaredHinge, &d);
        assert!((l_sq[0] - 8.0).abs() < 1e-15);
        let l_sm = coordinate_lipschitz(LossKind::SmoothedHinge { mu: 0.5 }, &d);
        assert!((l_sm[0] - 8.0).abs() < 1e-15);
    }

    #[test]
    fn zero_column_gets_zero_lipschitz() {
        let d = crate::data::Dataset::from_rows(&[vec![0.0, 1.0]], vec![1.0]).unwrap();
        let l = coordinate_lipschitz(LossKind::Logistic, &d);
        assert_eq!(l[0], 0.0);
    }

    #[test]
    fn global_lipschitz_single_column() {
        let d = crate::data::Dataset::from_rows(&[vec![2.0], vec![1.0]], vec![1.0, -1.0]).unwrap();
        let li = coordinate_lipschitz(LossKind::Logistic, &d)[0];
        let l = global_lipschitz(LossKind::Logistic, &d).unwrap();
        assert!((l - GLOBAL_LIPSCHITZ_MARGIN * li).abs() < 1e-6 * li);
    }

    #[test]
    fn global_lipschitz_orthonormal_columns() {
        // 10x5 matrix with orthonormal columns scaled by 3: sigma_max = 3
        // exactly, so L = 1.01 * c_f * 9 / n. Columns built from disjoint
        // +-1 pairs (orthogonal by construction), normalized then scaled.
        let n = 10;
        let scale = 3.0;
        let mut rows = vec![vec![0.0; 5]; n];
        for j in 0..5 {
            let a = 2 * j;
            let b = 2 * j + 1;
            let inv = scale / 2.0f64.sqrt();
            rows[a][j] = inv;
            rows[b][j] = -inv;
        }
        let d = crate::data::Dataset::from_rows(&rows, vec![1.0; n]).unwrap();
        for kind in KINDS {
            let want = GLOBAL_LIPSCHITZ_MARGIN * kind.curvature_factor() * scale * scale / n as f64;
            let got = global_lipschitz(kind, &d).unwrap();
            assert!((got - want).abs() < 1e-5 * want, "{kind:?}: {got} vs {want}");
            let max_li = coordinate_lipschitz(kind, &d)
                .into_iter()
                .fold(0.0f64, f64::max);
            assert!((got - GLOBAL_LIPSCHITZ_MARGIN * max_li).abs() < 1e-5 * max_li);
        }
    }

    #[test]
    fn global_lipschitz_zero_matrix() {
        let d = crate::data::Dataset::from_rows(&[vec![0.0], vec![0.0]], vec![1.0, -1.0]).unwrap();
        assert_eq!(global_lipschitz(LossKind::Logistic, &d).unwrap(), 0.0);
    }

    #[test]
    fn objective_at_zero_is_log_two() {
        let (d, _) = gen_synthetic(&spec(40, 6), 3).unwrap();
        let lam = PenaltyParams::new(0.5, 0.1, 0.2).unwrap();
        let o = objective(LossKind::Logistic, &d, &[], &lam);
        let l2 = 2.0f64.ln();
        assert!((o.loss - l2).abs() < 1e-15);
        assert!((o.regularized - l2).abs() < 1e-15);
        assert!((o.penalized - l2).abs() < 1e-15);
    }

    #[test]
    fn objective_counts_support() {
        let (d, _) = gen_synthetic(&spec(40, 6), 4).unwrap();
        let lam = PenaltyParams::new(1.0, 0.0, 0.0).unwrap();
        let beta = [(0, 0.3), (2, -1.1), (5, 0.7)];
        let o = objective(LossKind::Logistic, &d, &beta, &lam);
        assert!((o.penalized - (o.loss + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn objective_matches_naive_reevaluation() {
        let (d, _) = gen_synthetic(&spec(50, 8), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for kind in KINDS {
            for _ in 0..20 {
                let mut beta: Vec<(usize, f64)> = Vec::new();
                for j in 0..8 {
                    if rng.random_bool(0.5) {
                        beta.push((j, rng.random_range(-2.0..2.0)));
                    }
                }
                let lam = PenaltyParams::new(
                    rng.random_range(0.0..1.0),
                    rng.random_range(0.0..1.0),
                    rng.random_range(0.0..1.0),
                )
                .unwrap();
                let o = objective(kind, &d, &beta, &lam);
                let naive = l0class_oracles::naive_objective(
                    crate::test_util::oracle_loss(kind),
                    &crate::test_util::oracle_cols(&d),
                    d.y(),
                    &beta,
                    lam.lambda0,
                    lam.lambda1,
                    lam.lambda2,
                );
                assert!((o.penalized - naive).abs() <= 1e-12 * (1.0 + naive.abs()));
            }
        }
    }

    #[test]
    fn coordinate_lipschitz_bounds_gradient_differences() {
        let (d, _) = gen_synthetic(&spec(30, 6), 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for kind in KINDS {
            let ls = coordinate_lipschitz(kind, &d);
            for _ in 0..200 {
                let beta: Vec<f64> = (0..6).map(|_| rng.random_range(-1.5..1.5)).collect();
                let i = rng.random_range(0..6);
                let s: f64 = rng.random_range(-2.0..2.0);
                let grad_i = |b: &[f64]| {
                    let u = d.scores_dense(b);
                    let mut acc = 0.0;
                    d.column(i)
                        .for_each_nonzero(|k, x| acc += kind.derivative(u[k], d.y()[k]) * x);
                    acc / d.n() as f64
                };
                let mut shifted = beta.clone();
                shifted[i] += s;
                let diff = (grad_i(&shifted) - grad_i(&beta)).abs();
                assert!(diff <= ls[i] * s.abs() + 1e-9, "{kind:?}: {diff} vs {}", ls[i] * s.abs());
            }
        }
    }

    #[test]
    fn block_descent_inequality() {
        let (d, _) = gen_synthetic(&spec(30, 6), 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for kind in KINDS {
            let ls = coordinate_lipschitz(kind, &d);
            for _ in 0..200 {
                let beta: Vec<f64> = (0..6).map(|_| rng.random_range(-1.5..1.5)).collect();
                let i = rng.random_range(0..6);
                let s: f64 = rng.random_range(-2.0..2.0);
                let g = |b: &[f64]| mean_loss(kind, &d.scores_dense(b), d.y());
                let u = d.scores_dense(&beta);
                let mut grad = 0.0;
                d.column(i)
                    .for_each_nonzero(|k, x| grad += kind.derivative(u[k], d.y()[k]) * x);
                grad /= d.n() as f64;
                let mut shifted = beta.clone();
                shifted[i] += s;
                let lhs = g(&shifted);
                let rhs = g(&beta) + s * grad + 0.5 * ls[i] * s * s;
                assert!(lhs <= rhs + 1e-9, "{kind:?}: {lhs} > {rhs}");
            }
        }
    }
}
