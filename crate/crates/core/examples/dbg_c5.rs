use l0class::cd::FitOptions;
use l0class::data::*;
use l0class::local_search::{cd_with_local_search, LocalSearchOptions};
use l0class::loss::{LossKind, PenaltyParams};
use l0class::mip::*;
use l0class::path::{fit_path, Algorithm, GridSpec, PathOptions};

fn lambda0_sized_for(d: &Dataset, kind: LossKind, lambda2: f64, target: usize) -> f64 {
    let grid = GridSpec {
        n_lambda0: 40,
        lambda0_ratio: 0.005,
        lambda2_values: vec![lambda2],
        ..GridSpec::default()
    };
    let path = fit_path(d, kind, &grid, Algorithm::Cd, &PathOptions::default()).unwrap();
    let mut best: Option<(usize, f64)> = None;
    for e in &path.entries {
        let s = e.solution.support_size();
        if s >= 1 && s <= target {
            match best { Some((bs, _)) if bs >= s => {}, _ => best = Some((s, e.params.lambda0)) }
        }
    }
    best.map(|(_, l0)| l0).unwrap()
}

fn main() {
    let kind = LossKind::SquaredHinge;
    let spec = SyntheticSpec {
        n: 100, p: 12,
        correlation: Correlation::Exponential(0.3),
        k_dagger: 3,
        response_model: ResponseModel::BernoulliLogistic { s: 1.0 },
    };
    let (d, _) = gen_synthetic(&spec, 5003).unwrap();
    let l0 = lambda0_sized_for(&d, kind, 1e-2, 3);
    let lam = PenaltyParams::new(l0, 0.0, 1e-2).unwrap();
    println!("l0 = {l0:.6e}");
    let warm = cd_with_local_search(&d, kind, &lam, None, &LocalSearchOptions::default());
    println!("warm P = {:.9} supp {:?} maxabs {:.4}", warm.objectives.penalized, warm.support(), warm.max_abs());
    let iga = iga_solve(&d, kind, &lam, &warm, &MipOptions::default()).unwrap();
    println!("iga: ub={:.9} lb={:.9} gap={:.3e} nodes={} iters={} status={:?} M={:.4}",
        iga.upper_bound, iga.lower_bound, iga.gap, iga.nodes_explored, iga.iga_iterations, iga.status, iga.big_m);
    println!("z nonint: {:?}", iga.z.iter().enumerate().filter(|(_, z)| **z > 1e-6 && **z < 1.0 - 1e-6).collect::<Vec<_>>());
    let prob = MipProblem { data: &d, kind, lam, big_m: iga.big_m, integrality: (0..12).collect() };
    let direct = branch_and_bound(&prob, &warm, &MipOptions::default());
    println!("direct: ub={:.9} lb={:.9} gap={:.3e} nodes={} status={:?}",
        direct.upper_bound, direct.lower_bound, direct.gap, direct.nodes_explored, direct.status);
    let cols: Vec<Vec<f64>> = (0..d.p()).map(|j| d.column(j).to_dense(d.n())).collect();
    let (supp, best_p) = l0class_oracles::best_subset_enumeration(
        &cols, d.y(), l0class_oracles::Loss::SquaredHinge, lam.lambda0, lam.lambda2);
    println!("enumeration (unbounded): P*={best_p:.9} supp {supp:?}");
    println!("iga maxabs = {:.6} vs M {:.6}", iga.beta.iter().map(|(_, b)| b.abs()).fold(0.0f64, f64::max), iga.big_m);
    let doubled = iga_solve(&d, kind, &lam, &warm, &MipOptions { big_m: Some(2.0 * iga.big_m), ..MipOptions::default() }).unwrap();
    println!("doubled-M: ub={:.9} gap={:.3e}", doubled.upper_bound, doubled.gap);
    // with exhaustive local search as warm start
    use l0class::local_search::{SwapMode, SwapOptions};
    let ls_opts = LocalSearchOptions::new(FitOptions::default(), SwapOptions { mode: SwapMode::Exhaustive, ..SwapOptions::default() });
    let warm_ex = cd_with_local_search(&d, kind, &lam, None, &ls_opts);
    println!("exhaustive warm: P={:.9} supp {:?} maxabs {:.4}", warm_ex.objectives.penalized, warm_ex.support(), warm_ex.max_abs());
}
