use l0class::data::*;
use l0class::loss::LossKind;
use l0class::metrics::recovery_report;
use l0class::path::*;

fn main() {
    let kind = LossKind::Logistic;
    let mut exact = 0;
    for seed in 0..10u64 {
        let spec = SyntheticSpec {
            n: 500, p: 2000,
            correlation: Correlation::Identity,
            k_dagger: 10,
            response_model: ResponseModel::BernoulliLogistic { s: 1000.0 },
        };
        let (d, beta_dagger) = gen_synthetic(&spec, 7000 + seed).unwrap();
        // independent validation design of the same model
        let val_spec = SyntheticSpec { n: 2000, ..spec.clone() };
        let (d_val_x, _) = gen_synthetic(&val_spec, 70_000 + seed).unwrap();
        let y_val = gen_validation_response(&d_val_x, &beta_dagger, &val_spec, 70_000 + seed).unwrap();
        let d_val = Dataset::new((0..d_val_x.p()).map(|j| d_val_x.column(j).clone()).collect(), y_val).unwrap();

        let grid = GridSpec {
            n_lambda0: 50,
            lambda0_ratio: 0.001,
            lambda2_values: vec![1e-4, 1e-2, 1.0, 1e2],
            ..GridSpec::default()
        };
        let path = fit_path(&d, kind, &grid, Algorithm::Cd, &PathOptions::default()).unwrap();
        let (best, _) = tune_on_validation(&path, &d_val).unwrap();
        let e = &path.entries[best];
        let rep = recovery_report(&e.solution, &beta_dagger);
        let ok = rep.false_positives == Some(0) && rep.f1 == Some(1.0);
        if ok { exact += 1; }
        println!("seed {seed}: support={} F1={:.3} FP={:?} ok={ok}", e.solution.support_size(), rep.f1.unwrap(), rep.false_positives);
    }
    println!("exact: {exact}/10");
}
