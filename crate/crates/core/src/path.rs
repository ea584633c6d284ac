//! Regularization paths over a (lambda0, lambda_q) grid with warm starts,
//! dynamic lambda0 selection, and validation-set tuning.
//!
//! Within a fixed (lambda1, lambda2) slice the path starts at `lambda0_max`
//! (the zero solution) and descends geometrically. With the dynamic rule on,
//! the next grid value is capped at `(1 - 1e-3)` times the largest penalty
//! at which some outside coordinate becomes admissible at the current
//! solution, so every fit can admit at least one new coordinate and
//! duplicate-support solves are skipped instead of recorded.

use rayon::prelude::*;
use serde::Serialize;

use crate::cd::{cd_fit, gradient, lambda0_max, FitOptions, Solution};
use crate::data::Dataset;
use crate::local_search::{cd_with_local_search, LocalSearchOptions, SwapOptions};
use crate::loss::{mean_loss, LossKind, PenaltyParams};
use crate::metrics::auc;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Cd,
    CdLocalSearch,
}

#[derive(Clone, Debug)]
pub struct GridSpec {
    /// Number of lambda0 values per slice (geometric spacing).
    pub n_lambda0: usize,
    /// Ratio of the smallest to largest lambda0.
    pub lambda0_ratio: f64,
    /// Explicit lambda0 grid; overrides the generated one when set.
    pub lambda0_values: Option<Vec<f64>>,
    /// Values swept for lambda1 (outer loop).
    pub lambda1_values: Vec<f64>,
    /// Values swept for lambda2 (outer loop).
    pub lambda2_values: Vec<f64>,
    /// Dynamic lambda0 selection.
    pub dynamic: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_lambda0: 100,
            lambda0_ratio: 0.001,
            lambda0_values: None,
            lambda1_values: vec![0.0],
            lambda2_values: vec![0.0],
            dynamic: true,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_lambda0 == 0 {
            return Err(Error::InvalidSpec("n_lambda0 must be at least 1".into()));
        }
        if !(self.lambda0_ratio > 0.0 && self.lambda0_ratio <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "lambda0_ratio must be in (0,1]; got {}",
                self.lambda0_ratio
            )));
        }
        if self.lambda1_values.is_empty() || self.lambda2_values.is_empty() {
            return Err(Error::InvalidSpec("penalty value lists must be non-empty".into()));
        }
        for &v in self.lambda1_values.iter().chain(&self.lambda2_values) {
            if v < 0.0 {
                return Err(Error::InvalidSpec(format!("negative penalty value {v}")));
            }
        }
        if let Some(vals) = &self.lambda0_values {
            if vals.is_empty() || vals.iter().any(|v| *v < 0.0) {
                return Err(Error::InvalidSpec("invalid explicit lambda0 grid".into()));
            }
        }
        Ok(())
    }
}

/// `count` log-spaced values from `hi` down to `lo`.
pub fn log_spaced_desc(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    assert!(hi > 0.0 && lo > 0.0 && lo <= hi);
    if count == 1 {
        return vec![hi];
    }
    let ratio = lo / hi;
    (0..count)
        .map(|t| hi * ratio.powf(t as f64 / (count - 1) as f64))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PathEntry {
    pub params: PenaltyParams,
    pub solution: Solution,
    /// Index (into the final entry list) of the entry whose solution warm
    /// started this fit.
    pub warm_start_from: Option<usize>,
    /// lambda0 values whose fit reproduced this entry's support and was
    /// therefore not recorded separately (dynamic grids only).
    pub skipped_lambda0: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PathResult {
    pub kind: LossKind,
    pub entries: Vec<PathEntry>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PathOptions {
    pub fit: FitOptions,
    pub swap: SwapOptions,
    /// Fit (lambda1, lambda2) slices in parallel. Entry order and content
    /// are identical either way.
    pub parallel: bool,
}

fn fit_one(
    d: &Dataset,
    kind: LossKind,
    lam: &PenaltyParams,
    warm: Option<&Solution>,
    algorithm: Algorithm,
    fit: &FitOptions,
    swap: &SwapOptions,
) -> Solution {
    match algorithm {
        Algorithm::Cd => cd_fit(d, kind, lam, warm, fit),
        Algorithm::CdLocalSearch => {
            let opts = LocalSearchOptions::new(*fit, *swap);
            cd_with_local_search(d, kind, lam, warm, &opts)
        }
    }
}

fn fit_slice(
    d: &Dataset,
    kind: LossKind,
    grid: &GridSpec,
    algorithm: Algorithm,
    opts: &PathOptions,
    lambda1: f64,
    lambda2: f64,
) -> Vec<PathEntry> {
    let mut entries: Vec<PathEntry> = Vec::new();
    let first_fit = opts.fit;
    let warm_fit = FitOptions {
        screen: false, // screening is a cold-start filter only
        ..opts.fit
    };

    if let Some(values) = &grid.lambda0_values {
        // explicit grid: fit every value, largest first, warm-started
        let mut values = values.clone();
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        values.dedup();
        let mut warm_idx: Option<usize> = None;
        for (t, &l0) in values.iter().enumerate() {
            let lam = PenaltyParams {
                lambda0: l0,
                lambda1,
                lambda2,
            };
            let warm = warm_idx.map(|i| &entries[i].solution);
            let fit = if t == 0 { &first_fit } else { &warm_fit };
            let sol = fit_one(d, kind, &lam, warm, algorithm, fit, &opts.swap);
            entries.push(PathEntry {
                params: lam,
                solution: sol,
                warm_start_from: warm_idx,
                skipped_lambda0: Vec::new(),
            });
            warm_idx = Some(entries.len() - 1);
        }
        return entries;
    }

    let l0_max = lambda0_max(d, kind, lambda1, lambda2, &opts.fit);
    let zero_lam = PenaltyParams {
        lambda0: l0_max,
        lambda1,
        lambda2,
    };
    entries.push(PathEntry {
        params: zero_lam,
        solution: Solution::zero(d, kind, &zero_lam),
        warm_start_from: None,
        skipped_lambda0: Vec::new(),
    });
    if l0_max == 0.0 {
        // the zero solution already solves the convex problem
        return entries;
    }

    let static_grid = log_spaced_desc(l0_max, grid.lambda0_ratio * l0_max, grid.n_lambda0);
    let lhat = opts.fit.lhat(kind, d);
    let mut next_static = 1usize; // static_grid[0] == l0_max is entry 0
    let mut prev_idx = 0usize;
    let mut first_real_fit = true;

    while next_static < static_grid.len() {
        let prev_support: Vec<usize> = entries[prev_idx].solution.support();
        let mut target = static_grid[next_static];
        if grid.dynamic {
            let grad = gradient(d, kind, &entries[prev_idx].solution.beta);
            let in_support = {
                let mut mask = vec![false; d.p()];
                for &j in &prev_support {
                    mask[j] = true;
                }
                mask
            };
            let mut admissible: f64 = 0.0;
            let mut any_outside = false;
            for j in 0..d.p() {
                if !in_support[j] {
                    any_outside = true;
                    let excess = (grad[j].abs() - lambda1).max(0.0);
                    admissible =
                        admissible.max(excess * excess / (2.0 * (lhat[j] + 2.0 * lambda2)));
                }
            }
            if any_outside {
                target = target.min((1.0 - 1e-3) * admissible);
            }
            // the grid's domain ends at ratio * lambda0_max; dynamic jumps
            // are floored there so static and dynamic runs cover the same
            // range
            target = target.max(*static_grid.last().unwrap());
        }

        // consume static values above the target; the dynamic rule says
        // their solutions would share the previous support
        let mut skipped_here = Vec::new();
        while next_static < static_grid.len() && static_grid[next_static] > target {
            skipped_here.push(static_grid[next_static]);
            next_static += 1;
        }
        if next_static < static_grid.len() && static_grid[next_static] >= target {
            // target coincides with the next static value; consume it
            target = static_grid[next_static];
            next_static += 1;
        }
        entries[prev_idx].skipped_lambda0.extend(skipped_here);

        let lam = PenaltyParams {
            lambda0: target,
            lambda1,
            lambda2,
        };
        let fit = if first_real_fit { &first_fit } else { &warm_fit };
        first_real_fit = false;
        let warm = Some(&entries[prev_idx].solution);
        let sol = fit_one(d, kind, &lam, warm, algorithm, fit, &opts.swap);

        if grid.dynamic && sol.support() == prev_support {
            entries[prev_idx].skipped_lambda0.push(target);
        } else {
            entries.push(PathEntry {
                params: lam,
                solution: sol,
                warm_start_from: Some(prev_idx),
                skipped_lambda0: Vec::new(),
            });
            prev_idx = entries.len() - 1;
        }
    }
    entries
}

/// Fits a full path over the (lambda1, lambda2) grid. Slices are
/// independent; within a slice each fit warm starts from the previous
/// solution.
pub fn fit_path(
    d: &Dataset,
    kind: LossKind,
    grid: &GridSpec,
    algorithm: Algorithm,
    opts: &PathOptions,
) -> Result<PathResult> {
    grid.validate()?;
    let slices: Vec<(f64, f64)> = grid
        .lambda1_values
        .iter()
        .flat_map(|&l1| grid.lambda2_values.iter().map(move |&l2| (l1, l2)))
        .collect();

    let slice_entries: Vec<Vec<PathEntry>> = if opts.parallel && slices.len() > 1 {
        slices
            .par_iter()
            .map(|&(l1, l2)| fit_slice(d, kind, grid, algorithm, opts, l1, l2))
            .collect()
    } else {
        slices
            .iter()
            .map(|&(l1, l2)| fit_slice(d, kind, grid, algorithm, opts, l1, l2))
            .collect()
    };

    let mut entries = Vec::new();
    for mut block in slice_entries {
        let offset = entries.len();
        for e in &mut block {
            if let Some(w) = &mut e.warm_start_from {
                *w += offset;
            }
        }
        entries.extend(block);
    }
    Ok(PathResult { kind, entries })
}

/// Per-entry tuning table row.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TuneRow {
    pub entry: usize,
    pub val_loss: f64,
    pub auc: Option<f64>,
    pub support_size: usize,
}

/// Selects the path entry minimizing unregularized mean loss on the
/// validation set. Ties (within 1e-15) break toward the smaller support,
/// then the larger lambda0. Returns the winning index and the full table.
pub fn tune_on_validation(path: &PathResult, d_val: &Dataset) -> Result<(usize, Vec<TuneRow>)> {
    if path.entries.is_empty() {
        return Err(Error::EmptyPath);
    }
    let p = path.entries[0].solution.p;
    if d_val.p() != p {
        return Err(Error::LengthMismatch {
            expected: p,
            got: d_val.p(),
        });
    }

    let rows: Vec<TuneRow> = path
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let scores = d_val.scores(&e.solution.beta);
            let val_loss = mean_loss(path.kind, &scores, d_val.y());
            let auc_val = auc(&scores, d_val.y()).ok();
            TuneRow {
                entry: i,
                val_loss,
                auc: auc_val,
                support_size: e.solution.support_size(),
            }
        })
        .collect();

    let mut best = 0usize;
    for i in 1..rows.len() {
        let (a, b) = (&rows[i], &rows[best]);
        let (ea, eb) = (&path.entries[i], &path.entries[best]);
        if a.val_loss < b.val_loss - 1e-15 {
            best = i;
        } else if (a.val_loss - b.val_loss).abs() <= 1e-15 {
            if a.support_size < b.support_size
                || (a.support_size == b.support_size
                    && ea.params.lambda0 > eb.params.lambda0)
            {
                best = i;
            }
        }
    }
    Ok((best, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cd::lambda0_max;
    use crate::data::{
        gen_synthetic, gen_validation_response, Correlation, Dataset, ResponseModel, SyntheticSpec,
    };
    use crate::iht::{constrained_path, IhtOptions};
    use crate::loss::objective;
    use std::collections::BTreeSet;

    fn synth_spec(n: usize, p: usize, corr: Correlation, k: usize, s: f64) -> SyntheticSpec {
        SyntheticSpec {
            n,
            p,
            correlation: corr,
            k_dagger: k,
            response_model: ResponseModel::BernoulliLogistic { s },
        }
    }

    fn small_grid(l2: f64, n_lambda0: usize, dynamic: bool) -> GridSpec {
        GridSpec {
            n_lambda0,
            lambda0_ratio: 0.01,
            lambda2_values: vec![l2],
            dynamic,
            ..GridSpec::default()
        }
    }

    #[test]
    fn first_entry_is_zero_at_lambda0_max() {
        let (d, _) = gen_synthetic(&synth_spec(80, 10, Correlation::Identity, 3, 1.0), 1).unwrap();
        let kind = LossKind::Logistic;
        let opts = PathOptions::default();
        let path = fit_path(&d, kind, &small_grid(1e-3, 20, true), Algorithm::Cd, &opts).unwrap();
        let first = &path.entries[0];
        assert_eq!(first.solution.support_size(), 0);
        let l0max = lambda0_max(&d, kind, 0.0, 1e-3, &opts.fit);
        assert!((first.params.lambda0 - l0max).abs() <= 1e-12 * l0max);
        // lambda0 strictly decreasing along the slice
        for w in path.entries.windows(2) {
            assert!(w[1].params.lambda0 < w[0].params.lambda0);
        }
    }

    #[test]
    fn explicit_grid_above_lambda0_max_gives_single_zero() {
        let (d, _) = gen_synthetic(&synth_spec(60, 8, Correlation::Identity, 2, 1.0), 2).unwrap();
        let kind = LossKind::Logistic;
        let opts = PathOptions::default();
        let l0max = lambda0_max(&d, kind, 0.0, 0.0, &opts.fit);
        let grid = GridSpec {
            lambda0_values: Some(vec![1.01 * l0max]),
            ..GridSpec::default()
        };
        let path = fit_path(&d, kind, &grid, Algorithm::Cd, &opts).unwrap();
        assert_eq!(path.entries.len(), 1);
        assert_eq!(path.entries[0].solution.support_size(), 0);
    }

    #[test]
    fn dynamic_and_static_find_same_distinct_supports() {
        let (d, _) =
            gen_synthetic(&synth_spec(100, 12, Correlation::Exponential(0.5), 3, 1.0), 3).unwrap();
        let kind = LossKind::Logistic;
        let opts = PathOptions {
            fit: FitOptions {
                rel_tol: 1e-10,
                ..FitOptions::default()
            },
            ..PathOptions::default()
        };
        let fine_static = fit_path(&d, kind, &small_grid(1e-3, 120, false), Algorithm::Cd, &opts)
            .unwrap();
        let dynamic = fit_path(&d, kind, &small_grid(1e-3, 120, true), Algorithm::Cd, &opts)
            .unwrap();
        let supports = |p: &PathResult| -> BTreeSet<Vec<usize>> {
            p.entries.iter().map(|e| e.solution.support()).collect()
        };
        let s_static = supports(&fine_static);
        let s_dynamic = supports(&dynamic);
        assert_eq!(s_static, s_dynamic);
        // dynamic never records the same support consecutively
        for w in dynamic.entries.windows(2) {
            assert_ne!(w[0].solution.support(), w[1].solution.support());
        }
        // diagnostic: support sizes are mostly nondecreasing along the slice
        let sizes: Vec<usize> = dynamic
            .entries
            .iter()
            .map(|e| e.solution.support_size())
            .collect();
        let nondecreasing = sizes.windows(2).filter(|w| w[1] >= w[0]).count();
        println!(
            "dynamic path: {}/{} steps nondecreasing in support size",
            nondecreasing,
            sizes.len().saturating_sub(1)
        );
    }

    #[test]
    fn warm_start_lineage_descends() {
        let (d, _) =
            gen_synthetic(&synth_spec(100, 15, Correlation::Exponential(0.7), 4, 1.0), 4).unwrap();
        let kind = LossKind::Logistic;
        let opts = PathOptions::default();
        let path = fit_path(&d, kind, &small_grid(1e-3, 30, true), Algorithm::Cd, &opts).unwrap();
        for (i, e) in path.entries.iter().enumerate() {
            if let Some(w) = e.warm_start_from {
                assert!(w < i, "lineage must be acyclic");
                let init_at_lam =
                    objective(kind, &d, &path.entries[w].solution.beta, &e.params).penalized;
                assert!(
                    e.solution.objectives.penalized <= init_at_lam + 1e-12,
                    "entry {i} worse than its initializer"
                );
            }
        }
    }

    #[test]
    fn parallel_and_serial_paths_agree() {
        let (d, _) =
            gen_synthetic(&synth_spec(80, 10, Correlation::Exponential(0.5), 3, 1.0), 5).unwrap();
        let kind = LossKind::Logistic;
        let grid = GridSpec {
            n_lambda0: 15,
            lambda0_ratio: 0.01,
            lambda2_values: vec![1e-4, 1e-2, 1.0],
            ..GridSpec::default()
        };
        let serial = fit_path(&d, kind, &grid, Algorithm::Cd, &PathOptions::default()).unwrap();
        let parallel = fit_path(
            &d,
            kind,
            &grid,
            Algorithm::Cd,
            &PathOptions {
                parallel: true,
                ..PathOptions::default()
            },
        )
        .unwrap();
        assert_eq!(serial.entries.len(), parallel.entries.len());
        for (a, b) in serial.entries.iter().zip(&parallel.entries) {
            assert_eq!(a.params.lambda0, b.params.lambda0);
            assert_eq!(a.solution.beta, b.solution.beta);
            assert_eq!(a.warm_start_from, b.warm_start_from);
        }
    }

    #[test]
    fn tuning_selects_planted_support_on_easy_instance() {
        let spec = synth_spec(400, 50, Correlation::Identity, 5, 1000.0);
        let (d, beta_dagger) = gen_synthetic(&spec, 6).unwrap();
        let kind = LossKind::Logistic;
        let opts = PathOptions::default();
        let path = fit_path(&d, kind, &small_grid(1e-4, 40, true), Algorithm::Cd, &opts).unwrap();

        // independent validation draw with many samples (fresh design)
        let val_spec = SyntheticSpec {
            n: 5000,
            ..spec.clone()
        };
        let (d_val_base, _) = gen_synthetic(&val_spec, 999).unwrap();
        let y_val = gen_validation_response(&d_val_base, &beta_dagger, &val_spec, 1234).unwrap();
        let d_val = Dataset::new(
            (0..d_val_base.p())
                .map(|j| d_val_base.column(j).clone())
                .collect(),
            y_val,
        )
        .unwrap();

        let (best, rows) = tune_on_validation(&path, &d_val).unwrap();
        assert_eq!(rows.len(), path.entries.len());
        let tuned = &path.entries[best].solution;
        let truth: Vec<usize> = beta_dagger
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect();
        assert_eq!(tuned.support(), truth, "tuned entry should recover the planted support");
    }

    #[test]
    fn tuning_single_entry_and_tie_breaks() {
        let (d, _) = gen_synthetic(&synth_spec(60, 8, Correlation::Identity, 2, 1.0), 7).unwrap();
        let kind = LossKind::Logistic;
        let opts = PathOptions::default();
        let l0max = lambda0_max(&d, kind, 0.0, 0.0, &opts.fit);
        let grid = GridSpec {
            lambda0_values: Some(vec![1.1 * l0max]),
            ..GridSpec::default()
        };
        let path = fit_path(&d, kind, &grid, Algorithm::Cd, &opts).unwrap();
        let (best, _) = tune_on_validation(&path, &d).unwrap();
        assert_eq!(best, 0);

        // two zero entries at different lambda0: equal loss, equal support,
        // larger lambda0 wins
        let grid2 = GridSpec {
            lambda0_values: Some(vec![1.2 * l0max, 1.1 * l0max]),
            ..GridSpec::default()
        };
        let path2 = fit_path(&d, kind, &grid2, Algorithm::Cd, &opts).unwrap();
        let (best2, _) = tune_on_validation(&path2, &d).unwrap();
        assert_eq!(path2.entries[best2].params.lambda0, 1.2 * l0max);
    }

    #[test]
    fn empty_path_errors() {
        let path = PathResult {
            kind: LossKind::Logistic,
            entries: Vec::new(),
        };
        let (d, _) = gen_synthetic(&synth_spec(10, 3, Correlation::Identity, 1, 1.0), 8).unwrap();
        assert!(matches!(tune_on_validation(&path, &d), Err(Error::EmptyPath)));
    }

    #[test]
    fn constrained_path_short_circuits_existing_sizes() {
        let (d, _) =
            gen_synthetic(&synth_spec(100, 12, Correlation::Exponential(0.5), 3, 1.0), 9).unwrap();
        let kind = LossKind::Logistic;
        let opts = PathOptions {
            fit: FitOptions {
                rel_tol: 1e-12,
                coef_tol: Some(1e-12),
                max_full_cycles: 50_000,
                ..FitOptions::default()
            },
            ..PathOptions::default()
        };
        let path = fit_path(&d, kind, &small_grid(1e-3, 30, true), Algorithm::Cd, &opts).unwrap();
        let sizes: Vec<usize> = path.entries.iter().map(|e| e.solution.support_size()).collect();
        let existing = *sizes.iter().max().unwrap();
        if existing == 0 {
            return;
        }
        let sols = constrained_path(&d, kind, 0.0, 1e-3, &[existing], &path, &IhtOptions::default())
            .unwrap();
        let original = path
            .entries
            .iter()
            .find(|e| e.solution.support_size() == existing)
            .unwrap();
        assert_eq!(sols[0].beta, original.solution.beta);
    }

    #[test]
    fn constrained_path_fills_missing_sizes() {
        let (d, _) =
            gen_synthetic(&synth_spec(120, 15, Correlation::Exponential(0.6), 4, 1.0), 10)
                .unwrap();
        let kind = LossKind::Logistic;
        let opts = PathOptions {
            fit: FitOptions {
                rel_tol: 1e-10,
                ..FitOptions::default()
            },
            ..PathOptions::default()
        };
        let path = fit_path(&d, kind, &small_grid(1e-3, 25, true), Algorithm::Cd, &opts).unwrap();
        let sizes: std::collections::BTreeSet<usize> =
            path.entries.iter().map(|e| e.solution.support_size()).collect();
        // find a size that's missing but below the max
        let max = *sizes.iter().max().unwrap();
        let missing: Vec<usize> = (1..max).filter(|k| !sizes.contains(k)).collect();
        if missing.is_empty() {
            return;
        }
        let wanted = missing[0];
        let sols = constrained_path(
            &d,
            kind,
            0.0,
            1e-3,
            &[wanted],
            &path,
            &IhtOptions::default(),
        )
        .unwrap();
        assert!(sols[0].support_size() <= wanted);
        // descent from the initializer: constrained G must be at most its
        // initializer's G
        let init = path
            .entries
            .iter()
            .filter(|e| e.solution.support_size() < wanted)
            .max_by_key(|e| e.solution.support_size())
            .unwrap();
        assert!(
            sols[0].objectives.regularized <= init.solution.objectives.regularized + 1e-9
        );
    }
}
