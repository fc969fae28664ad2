use gtgbm::boosting::{fit_logged, model_to_json, with_workers};
use gtgbm::experiments::ImportanceRanking;
use gtgbm::seed::rng;
use gtgbm::{
    fit, fit_multitask, generate_synthetic, load_model, load_multitask_model, predict, save_model,
    save_multitask_model, standardize, BoostConfig, Dataset, Error, FeatureMatrix, LabeledDataset, ModelError,
    SplitCriterionConfig, SyntheticSpec, Tasks,
};
use rand::Rng;

fn synthetic(n: usize, d: usize, seed: u64) -> Dataset {
    standardize(generate_synthetic::<f64>(&SyntheticSpec { n, d, noise_sd: 0.3, seed }).unwrap()).0
}

#[test]
fn full_penalty_keeps_one_feature_per_tree_at_most() {
    let ds = synthetic(300, 20, 1);
    let mut sizes = Vec::new();
    let model = fit_logged(&ds, &BoostConfig::new(30, 0.1, 0.02, SplitCriterionConfig::agbm(1.0)), None, |l| {
        sizes.push(l.omega_size)
    })
    .unwrap();
    // With mu = 1 a new feature never beats a used one, so each tree adds at most one.
    let mut prev = 0;
    for s in sizes {
        assert!(s >= prev && s <= prev + 1);
        prev = s;
    }
    assert!(model.omega.len() <= 30);
}

#[test]
fn training_rmse_never_increases_without_penalty() {
    let ds = synthetic(400, 10, 2);
    let mut logs = Vec::new();
    fit_logged(&ds, &BoostConfig::new(40, 0.1, 0.05, SplitCriterionConfig::agbm(0.0)), None, |l| logs.push(*l))
        .unwrap();
    for w in logs.windows(2) {
        assert!(w[1].train_rmse <= w[0].train_rmse + 1e-12, "{w:?}");
    }
}

#[test]
fn omega_grows_monotonically_and_matches_trees() {
    let ds = synthetic(300, 25, 3);
    let mut sizes = Vec::new();
    let model = fit_logged(&ds, &BoostConfig::new(25, 0.1, 0.02, SplitCriterionConfig::gbfs(0.5)), None, |l| {
        sizes.push(l.omega_size)
    })
    .unwrap();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    let used: std::collections::BTreeSet<usize> = model.trees.iter().flat_map(|t| t.used_features()).collect();
    assert_eq!(used, model.omega);
    assert_eq!(ImportanceRanking::from_gains(&model.feature_gain).selected().len(), model.omega.len());
}

#[test]
fn gbfs_on_unit_root_residuals_equals_agbm() {
    // With targets scaled so every tree root has SSE 1, the two criteria coincide
    // for the first tree at any mu.
    let ds = synthetic(200, 12, 4);
    let mean = ds.targets.iter().sum::<f64>() / 200.0;
    let c: Vec<f64> = ds.targets.iter().map(|y| y - mean).collect();
    let scale = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut unit = ds.clone();
    unit.targets = ds.targets.iter().map(|y| y / scale).collect();
    let a = fit(&unit, &BoostConfig::new(1, 0.1, 0.02, SplitCriterionConfig::gbfs(0.05))).unwrap();
    let b = fit(&unit, &BoostConfig::new(1, 0.1, 0.02, SplitCriterionConfig::agbm(0.05))).unwrap();
    assert_eq!(a.trees, b.trees);
}

#[test]
fn predictions_replay_training_fit() {
    let raw = generate_synthetic::<f64>(&SyntheticSpec { n: 300, d: 8, noise_sd: 0.3, seed: 5 }).unwrap();
    let ds = standardize(raw.clone()).0;
    let cfg = BoostConfig::new(30, 0.1, 0.02, SplitCriterionConfig::agbm(0.01));
    let mut last = 0.0;
    let model = fit_logged(&ds, &cfg, None, |l| last = l.train_rmse).unwrap();
    let p = predict(&model, &raw.features).unwrap();
    let r = gtgbm::metrics::rmse(&p, &raw.targets).unwrap();
    assert!((r - last).abs() <= 1e-9, "{r} vs {last}");
}

#[test]
fn save_load_is_exact_for_both_splitters() {
    let ds = synthetic(200, 15, 6);
    let dir = tempfile::tempdir().unwrap();
    for cfg in [
        BoostConfig::new(10, 0.1, 0.02, SplitCriterionConfig::agbm(0.01)),
        BoostConfig::new(10, 0.1, 0.02, SplitCriterionConfig::agbm(0.01)).with_group_test(3, 0.1).with_seed(8),
    ] {
        let model = fit(&ds, &cfg).unwrap();
        let path = dir.path().join("m.json");
        save_model(&model, &path).unwrap();
        let back = load_model::<f64>(&path).unwrap();
        assert_eq!(back, model);
        assert_eq!(model_to_json(&back), std::fs::read_to_string(&path).unwrap());
    }
}

#[test]
fn damaged_model_files_are_rejected() {
    let ds = synthetic(100, 5, 7);
    let model = fit(&ds, &BoostConfig::new(5, 0.1, 0.05, SplitCriterionConfig::agbm(0.01))).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let text = model_to_json(&model);
    let cut = dir.path().join("cut.json");
    std::fs::write(&cut, &text[..text.len() / 2]).unwrap();
    assert!(matches!(load_model::<f64>(&cut), Err(ModelError::Malformed(_))));
    let future = dir.path().join("v9.json");
    std::fs::write(&future, text.replacen("\"version\": 1", "\"version\": 9", 1)).unwrap();
    assert!(matches!(load_model::<f64>(&future), Err(ModelError::Version { found: 9, .. })));
}

fn task(seed: u64, n: usize, d: usize, active: [usize; 2]) -> Dataset {
    let mut r = rng(seed);
    let cols: Vec<Vec<f64>> = (0..d).map(|_| (0..n).map(|_| r.random::<f64>()).collect()).collect();
    let y = (0..n).map(|i| 3.0 * cols[active[0]][i] - 2.0 * cols[active[1]][i] + 0.2 * r.random::<f64>()).collect();
    standardize(LabeledDataset::new(FeatureMatrix::from_columns(cols).unwrap(), y, None).unwrap()).0
}

#[test]
fn multitask_group_set_is_union_of_task_sets() {
    let tasks: Vec<Dataset> = (0..3).map(|t| task(t, 150, 12, [t as usize, 6])).collect();
    let tb = Tasks::new(tasks, vec!["a".into(), "b".into(), "c".into()]).unwrap();
    let model =
        fit_multitask(&tb, &BoostConfig::new(20, 0.1, 0.05, SplitCriterionConfig::multitask(0.1, 0.02))).unwrap();
    let union: std::collections::BTreeSet<usize> = model.tasks.iter().flat_map(|m| m.omega.iter().copied()).collect();
    assert_eq!(union, model.omega_group);
    // The shared feature is picked up by every task.
    assert!(model.tasks.iter().all(|m| m.omega.contains(&6)));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mt.json");
    save_multitask_model(&model, &path).unwrap();
    assert_eq!(load_multitask_model::<f64>(&path).unwrap(), model);
    assert!(load_model::<f64>(&path).is_err());
}

#[test]
fn group_penalty_shares_features_across_tasks() {
    let tasks: Vec<Dataset> = (0..3).map(|t| task(10 + t, 150, 12, [t as usize, 6])).collect();
    let tb = Tasks::new(tasks, vec!["a".into(), "b".into(), "c".into()]).unwrap();
    let loose =
        fit_multitask(&tb, &BoostConfig::new(20, 0.1, 0.05, SplitCriterionConfig::multitask(0.0, 0.02))).unwrap();
    let tight =
        fit_multitask(&tb, &BoostConfig::new(20, 0.1, 0.05, SplitCriterionConfig::multitask(0.6, 0.02))).unwrap();
    assert!(tight.omega_group.len() <= loose.omega_group.len());
}

#[test]
fn worker_count_does_not_change_models() {
    let ds = synthetic(500, 30, 9);
    for cfg in [
        BoostConfig::new(15, 0.1, 0.02, SplitCriterionConfig::agbm(0.01)),
        BoostConfig::new(15, 0.1, 0.02, SplitCriterionConfig::agbm(0.01)).with_group_test(3, 0.1).with_seed(2),
    ] {
        let one = with_workers(Some(1), || model_to_json(&fit(&ds, &cfg).unwrap())).unwrap();
        let three = with_workers(Some(3), || model_to_json(&fit(&ds, &cfg).unwrap())).unwrap();
        assert_eq!(one, three);
    }
}

#[test]
fn invalid_configs_are_config_errors() {
    let ds = synthetic(50, 4, 1);
    for cfg in [
        BoostConfig::new(5, 0.1, 0.02, SplitCriterionConfig::agbm(1.5)),
        BoostConfig::new(5, 0.0, 0.02, SplitCriterionConfig::agbm(0.1)),
        BoostConfig::new(5, 0.1, 0.0, SplitCriterionConfig::agbm(0.1)),
        BoostConfig::new(5, 0.1, 0.02, SplitCriterionConfig::gbfs(-1.0)),
    ] {
        assert!(matches!(fit(&ds, &cfg), Err(Error::Config(_))), "{cfg:?}");
    }
}
