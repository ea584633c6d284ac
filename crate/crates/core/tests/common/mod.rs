//! Shared helpers for the integration and acceptance suites.

use l0class::data::{gen_synthetic, Correlation, Dataset, ResponseModel, SyntheticSpec};
use l0class::loss::LossKind;

pub fn oracle_cols(d: &Dataset) -> Vec<Vec<f64>> {
    (0..d.p()).map(|j| d.column(j).to_dense(d.n())).collect()
}

pub fn oracle_loss(kind: LossKind) -> l0class_oracles::Loss {
    match kind {
        LossKind::Logistic => l0class_oracles::Loss::Logistic,
        LossKind::SquaredHinge => l0class_oracles::Loss::SquaredHinge,
        LossKind::SmoothedHinge { mu } => l0class_oracles::Loss::SmoothedHinge(mu),
    }
}

pub fn logistic_spec(n: usize, p: usize, corr: Correlation, k: usize, s: f64) -> SyntheticSpec {
    SyntheticSpec {
        n,
        p,
        correlation: corr,
        k_dagger: k,
        response_model: ResponseModel::BernoulliLogistic { s },
    }
}

pub fn synth(spec: &SyntheticSpec, seed: u64) -> (Dataset, Vec<f64>) {
    gen_synthetic(spec, seed).expect("synthetic draw")
}

/// Largest path lambda0 whose solution has at most `target` nonzeros while
/// being as close to `target` as the path allows. Used to size instances
/// like "lambda0 chosen so the solution has k nonzeros".
pub fn lambda0_sized_for(
    d: &Dataset,
    kind: LossKind,
    lambda2: f64,
    target: usize,
) -> f64 {
    use l0class::path::{fit_path, Algorithm, GridSpec, PathOptions};
    let grid = GridSpec {
        n_lambda0: 40,
        lambda0_ratio: 0.005,
        lambda2_values: vec![lambda2],
        ..GridSpec::default()
    };
    let path = fit_path(d, kind, &grid, Algorithm::Cd, &PathOptions::default()).expect("path");
    let mut best: Option<(usize, f64)> = None;
    for e in &path.entries {
        let s = e.solution.support_size();
        if s >= 1 && s <= target {
            match best {
                Some((bs, _)) if bs >= s => {}
                _ => best = Some((s, e.params.lambda0)),
            }
        }
    }
    best.map(|(_, l0)| l0)
        .unwrap_or_else(|| path.entries.last().expect("entries").params.lambda0)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
