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
    best.map(|(_, l0)| l0).unwrap()
}

fn main() {
    let kind = LossKind::Logistic;
    let spec = SyntheticSpec {
        n: 100, p: 12, correlation: Correlation::Identity, k_dagger: 3,
        response_model: ResponseModel::BernoulliLogistic { s: 2.0 },
    };
    let (d, _) = gen_synthetic(&spec, 5000).unwrap();
    let l0 = lambda0_sized_for(&d, kind, 0.5, 3);
    let lam = PenaltyParams::new(l0, 0.0, 0.5).unwrap();
    let warm = cd_with_local_search(&d, kind, &lam, None, &LocalSearchOptions {
        swap: SwapOptions { mode: SwapMode::Exhaustive, ..SwapOptions::default() },
        ..LocalSearchOptions::default()
    });
    let m = choose_big_m(&warm);
    println!("l0={l0:.4e} warm supp {:?} maxabs {:.4} M={m:.4} l0/M={:.4e}", warm.support(), warm.max_abs(), l0 / m);
    // iteration-1 style: I = warm support, solve the PMIO by BnB, look at z
    let prob = MipProblem { data: &d, kind, lam, big_m: m, integrality: warm.support() };
    let res = branch_and_bound(&prob, &warm, &MipOptions::default());
    println!("PMIO-I: ub={:.8} nodes={}", res.upper_bound, res.nodes_explored);
    for (j, z) in res.z.iter().enumerate() {
        if *z > 1e-6 && *z < 1.0 - 1e-6 {
            println!("  fractional z[{j}] = {z:.6e} (beta = {:.6e})", z * m);
        }
    }
    // what's the outside gradient at the warm optimum vs l1_eff?
    let grad = l0class::cd::gradient(&d, kind, &warm.beta);
    for j in 0..12 {
        if !warm.support().contains(&j) {
            println!("  |grad[{j}]| = {:.4e} vs l0/M = {:.4e}", grad[j].abs(), l0 / m);
        }
    }
}
