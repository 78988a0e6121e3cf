use neurogrow::eval::{
    comparison_table, evaluate_dirs, evaluate_masks, load_runs, replay_published, run_to_csv,
    EvalError, EvalOptions,
};
use neurogrow::metrics::RawConfusion;
use neurogrow::raster::save_image;
use neurogrow::{BinaryMask, Execution, PositiveClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(n: usize, seed: u64) -> Vec<(String, BinaryMask, BinaryMask)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let (w, h) = (rng.gen_range(8..40), rng.gen_range(8..40));
            let density = rng.gen_range(0.02..0.3);
            let truth: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(density)).collect();
            let pred: Vec<bool> = truth.iter().map(|&t| if rng.gen_bool(0.15) { !t } else { t }).collect();
            (
                format!("img{i:03}"),
                BinaryMask::from_vec(w, h, pred, PositiveClass::Neuron).unwrap(),
                BinaryMask::from_vec(w, h, truth, PositiveClass::Neuron).unwrap(),
            )
        })
        .collect()
}

/// Pooled tallies summed pixel by pixel, independently of the library.
fn hand_pool(pairs: &[(String, BinaryMask, BinaryMask)]) -> RawConfusion {
    let mut r = RawConfusion::default();
    for (_, p, t) in pairs {
        for (&a, &b) in p.as_slice().iter().zip(t.as_slice()) {
            match (a, b) {
                (true, true) => r.tp += 1,
                (false, false) => r.tn += 1,
                (true, false) => r.fp += 1,
                (false, true) => r.fn_ += 1,
            }
        }
    }
    r
}

#[test]
fn fifty_pairs_pool_to_hand_sum() {
    let pairs = fixture(50, 9);
    let want = hand_pool(&pairs);
    let n = want.total() as f64;
    for exec in [Execution::Sequential, Execution::Parallel] {
        let run = evaluate_masks("m", &pairs, true, exec).unwrap();
        assert_eq!(run.aggregate.raw, Some(want));
        assert_eq!(run.aggregate.tp, want.tp as f64 / n);
        assert_eq!(run.pairs.len(), 50);
        let fa = (want.tp + want.tn) as f64 / n;
        let pos_p = (want.tp + want.fp) as f64 / n;
        let pos_t = (want.tp + want.fn_) as f64 / n;
        let fc = pos_p * pos_t + (1.0 - pos_p) * (1.0 - pos_t);
        let kap = (fa - fc) / (1.0 - fc);
        assert!((run.report.kap.unwrap() - kap).abs() < 1e-12);
        let fpr = want.fp as f64 / (want.fp + want.tn) as f64;
        let fnr = want.fn_ as f64 / (want.fn_ + want.tp) as f64;
        assert!((run.report.auroc.unwrap() - (1.0 - (fpr + fnr) / 2.0)).abs() < 1e-12);
    }
    // pooling differs from averaging per-image scores
    let run = evaluate_masks("m", &pairs, true, Execution::Sequential).unwrap();
    let mean_kap: f64 = run.pairs.iter().map(|p| p.report.as_ref().unwrap().kap.unwrap()).sum::<f64>() / 50.0;
    assert!((mean_kap - run.report.kap.unwrap()).abs() > 1e-9);
}

#[test]
fn k_identical_pairs_equal_one_pair() {
    let pairs = fixture(1, 4);
    let one = evaluate_masks("m", &pairs, true, Execution::Sequential).unwrap();
    for k in [2, 5, 17] {
        let many: Vec<_> = (0..k).map(|i| (format!("{i}"), pairs[0].1.clone(), pairs[0].2.clone())).collect();
        let run = evaluate_masks("m", &many, true, Execution::Parallel).unwrap();
        assert_eq!(run.report, one.report);
    }
}

#[test]
fn directories_pair_by_stem() {
    let pairs = fixture(6, 2);
    let pred = tempfile::tempdir().unwrap();
    let truth = tempfile::tempdir().unwrap();
    for (name, p, t) in &pairs {
        save_image(p, pred.path().join(format!("{name}.png"))).unwrap();
        save_image(t, truth.path().join(format!("{name}.pgm"))).unwrap();
    }
    let opts = EvalOptions { method_name: "x".into(), ..EvalOptions::default() };
    let run = evaluate_dirs(pred.path(), truth.path(), &opts).unwrap();
    assert_eq!(run.aggregate.raw, Some(hand_pool(&pairs)));

    let same = evaluate_dirs(truth.path(), truth.path(), &opts).unwrap();
    assert_eq!(same.report.kap, Some(1.0));
    assert_eq!(same.report.auroc, Some(1.0));

    save_image(&pairs[0].1, pred.path().join("extra.png")).unwrap();
    let lenient = evaluate_dirs(pred.path(), truth.path(), &opts).unwrap();
    assert_eq!(lenient.unmatched.len(), 1);
    assert_eq!(lenient.report, run.report);
    let strict = EvalOptions { strict: true, ..opts };
    assert!(matches!(
        evaluate_dirs(pred.path(), truth.path(), &strict),
        Err(EvalError::UnmatchedFiles(v)) if v.len() == 1
    ));
}

#[test]
fn runs_round_trip_through_json_and_csv() {
    let run = evaluate_masks("floodfill", &fixture(4, 1), false, Execution::Sequential).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&run).unwrap()).unwrap();
    let back = load_runs(&path).unwrap();
    assert_eq!(back, vec![run.clone()]);
    let csv = run_to_csv(&run);
    assert_eq!(csv.lines().count(), 6);
    assert!(comparison_table(&back).contains("floodfill"));
}

#[test]
fn replay_rejects_malformed_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"[{"method":"x","matrix":[[0.5,0.5],[0.5,0.5]]}]"#).unwrap();
    assert!(matches!(replay_published(&path), Err(EvalError::Malformed { .. })));
    std::fs::write(&path, "{not json").unwrap();
    assert!(matches!(replay_published(&path), Err(EvalError::Malformed { .. })));
}
