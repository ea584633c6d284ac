use std::time::Instant;
use l0class::data::*;
use l0class::local_search::{cd_with_local_search, LocalSearchOptions};
use l0class::loss::{LossKind, PenaltyParams};
use l0class::mip::*;
use l0class::path::{fit_path, Algorithm, GridSpec, PathOptions};

fn main() {
    let kind = LossKind::Logistic;
    let spec = SyntheticSpec {
        n: 300, p: 2000,
        correlation: Correlation::Identity,
        k_dagger: 3,
        response_model: ResponseModel::BernoulliLogistic { s: 1000.0 },
    };
    let t0 = Instant::now();
    let (d, _) = gen_synthetic(&spec, 5999).unwrap();
    println!("synth: {:.2?}", t0.elapsed());

    let t = Instant::now();
    let grid = GridSpec { n_lambda0: 40, lambda0_ratio: 0.005, lambda2_values: vec![1e-3], ..GridSpec::default() };
    let path = fit_path(&d, kind, &grid, Algorithm::Cd, &PathOptions::default()).unwrap();
    println!("sizing path: {:.2?} ({} entries)", t.elapsed(), path.entries.len());
    let mut best: Option<(usize, f64)> = None;
    for e in &path.entries {
        let s = e.solution.support_size();
        if s >= 1 && s <= 3 {
            match best { Some((bs, _)) if bs >= s => {}, _ => best = Some((s, e.params.lambda0)) }
        }
    }
    let l0 = best.unwrap().1;
    let lam = PenaltyParams::new(l0, 0.0, 1e-3).unwrap();

    let t = Instant::now();
    let warm = cd_with_local_search(&d, kind, &lam, None, &LocalSearchOptions::default());
    println!("warm cd+ls: {:.2?} (P={:.6}, supp {:?})", t.elapsed(), warm.objectives.penalized, warm.support());

    let t = Instant::now();
    let opts = MipOptions { gap_tol: 1e-4, ..MipOptions::default() };
    let res = iga_solve(&d, kind, &lam, &warm, &opts).unwrap();
    println!("iga: {:.2?} gap={:.2e} nodes={} iters={} status={:?}", t.elapsed(), res.gap, res.nodes_explored, res.iga_iterations, res.status);
}
