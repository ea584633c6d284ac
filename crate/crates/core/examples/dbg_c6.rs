use l0class::data::*;
use l0class::local_search::{cd_with_local_search, LocalSearchOptions, SwapMode, SwapOptions};
use l0class::loss::{LossKind, PenaltyParams};
use l0class::mip::*;
use l0class::path::{fit_path, Algorithm, GridSpec, PathOptions};

fn lambda0_sized_for(d: &Dataset, kind: LossKind, lambda2: f64, target: usize) -> f64 {
    let grid = GridSpec { n_lambda0: 40, lambda0_ratio: 0.005, lambda2_values: vec![lambda2], ..GridSpec::default() };
    let path = fit_path(d, kind, &grid, Algorithm::Cd, &PathOptions::default()).unwrap();
    let mut best: Option<(usize, f64)> = None;
    for e in &path.entries {
        let s = e.solution.support_size();
        if s >= 1 && s <= target {
            match best { Some((bs, _)) if bs >= s => {}, _ => best = Some((s, e.params.lambda0)) }
        }
    }
    best.map(|(_, l0)| l0)
        .unwrap_or_else(|| path.entries.last().unwrap().params.lambda0)
}

fn main() {
    for (kd, target, s_scale, l2) in [
        (1usize, 1usize, 2.0f64, 1e-1),
        (2, 2, 4.0, 2e-1),
        (2, 2, 6.0, 3e-1),
        (2, 2, 4.0, 3e-1),
        (2, 2, 6.0, 2e-1),
        (1, 2, 3.0, 2e-1),
    ] {
        let corr = Correlation::Identity;
        let mut warm_optimal = 0;
        let mut iga_wins = 0;
        let mut enum_match = 0;
        let mut iter1 = 0;
        let mut total = 0;
        for kind in [LossKind::Logistic, LossKind::SquaredHinge] {
            for seed in 0..10u64 {
                let spec = SyntheticSpec {
                    n: 100, p: 12, correlation: corr, k_dagger: kd,
                    response_model: ResponseModel::BernoulliLogistic { s: s_scale },
                };
                let (d, _) = gen_synthetic(&spec, 5000 + seed).unwrap();
                let l0 = lambda0_sized_for(&d, kind, l2, target);
                let lam = PenaltyParams::new(l0, 0.0, l2).unwrap();
                let warm = cd_with_local_search(&d, kind, &lam, None, &LocalSearchOptions {
                    swap: SwapOptions { mode: SwapMode::Exhaustive, ..SwapOptions::default() },
                    ..LocalSearchOptions::default()
                });
                let cols: Vec<Vec<f64>> = (0..d.p()).map(|j| d.column(j).to_dense(d.n())).collect();
                let loss = match kind { LossKind::Logistic => l0class_oracles::Loss::Logistic, _ => l0class_oracles::Loss::SquaredHinge };
                let (_, best_p) = l0class_oracles::best_subset_enumeration(&cols, d.y(), loss, lam.lambda0, lam.lambda2);
                total += 1;
                if (warm.objectives.penalized - best_p).abs() <= 1e-6 { warm_optimal += 1; }
                let opts = MipOptions::default();
                let iga = iga_solve(&d, kind, &lam, &warm, &opts).unwrap();
                let prob = MipProblem { data: &d, kind, lam, big_m: iga.big_m, integrality: (0..12).collect() };
                let direct = branch_and_bound(&prob, &warm, &opts);
                if iga.nodes_explored <= direct.nodes_explored { iga_wins += 1; }
                if iga.iga_iterations == 1 { iter1 += 1; }
                let ok = (iga.upper_bound - best_p).abs() <= 1e-6 * best_p.max(1.0)
                    && (direct.upper_bound - best_p).abs() <= 1e-6 * best_p.max(1.0)
                    && iga.gap <= 1e-6 && direct.gap <= 1e-6;
                if ok { enum_match += 1; }
            }
        }
        println!("k={kd} target={target} s={s_scale} l2={l2}: warm-opt {warm_optimal}/{total}, iter1 {iter1}/{total}, iga<=direct {iga_wins}/{total}, enum+gap ok {enum_match}/{total}");
    }
}
