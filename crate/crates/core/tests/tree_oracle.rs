use std::collections::VecDeque;

use gtgbm::grouptest::build_prefix_cache;
use gtgbm::seed::rng;
use gtgbm::{
    best_split_exhaustive, fit_tree, make_subset_plan, FeatureMatrix, FeatureUsageSets, GtConfig, Matrix,
    SplitCriterionConfig, Splitter, TreeNode, TreeParams,
};
use rand::Rng;

fn sse(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|y| (y - m) * (y - m)).sum()
}

/// Breadth-first tree built from the single-node search.
fn oracle_tree(
    x: &Matrix,
    y: &[f64],
    alpha: f64,
    cfg: &SplitCriterionConfig,
    usage: &FeatureUsageSets,
) -> Vec<TreeNode<f64>> {
    let m = y.len();
    let all: Vec<usize> = (0..x.n_features()).collect();
    let root = sse(y);
    let mut usage = usage.clone();
    let mut nodes = vec![TreeNode::Leaf { value: 0.0 }];
    let mut queue = VecDeque::from([(0usize, (0..m).collect::<Vec<usize>>())]);
    while let Some((id, rows)) = queue.pop_front() {
        let vals: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let constant = vals.iter().all(|&v| v == vals[0]);
        let split = if rows.len() as f64 > alpha * m as f64 && !constant {
            best_split_exhaustive(x, y, &rows, &all, cfg, &usage, root, None)
        } else {
            None
        };
        let Some(s) = split else {
            nodes[id] = TreeNode::Leaf { value: mean };
            continue;
        };
        usage.mark(s.feature);
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x.value(i, s.feature) < s.threshold);
        let left = nodes.len();
        nodes.push(TreeNode::Leaf { value: 0.0 });
        nodes.push(TreeNode::Leaf { value: 0.0 });
        nodes[id] = TreeNode::Split { feature: s.feature, threshold: s.threshold, left, right: left + 1 };
        queue.push_back((left, l));
        queue.push_back((left + 1, r));
    }
    nodes
}

fn instance(seed: u64, n: usize, d: usize) -> (Matrix, Vec<f64>) {
    let mut r = rng(seed);
    let cols: Vec<Vec<f64>> = (0..d).map(|_| (0..n).map(|_| r.random_range(0..10) as f64 / 9.0).collect()).collect();
    let y = (0..n).map(|i| cols[0][i] * 3.0 - cols[d / 2][i] + r.random_range(-0.5..0.5)).collect();
    (FeatureMatrix::from_columns(cols).unwrap(), y)
}

#[test]
fn presorted_growth_matches_node_by_node_search() {
    for seed in 0..30 {
        let (x, y) = instance(seed, 64, 8);
        for (cfg, alpha) in [
            (SplitCriterionConfig::plain(), 0.02),
            (SplitCriterionConfig::gbfs(0.5), 0.1),
            (SplitCriterionConfig::agbm(0.02), 0.05),
        ] {
            let usage = FeatureUsageSets::single([1, 4]);
            let got = fit_tree(&x, &y, &usage, &TreeParams::new(cfg, alpha, Splitter::Exhaustive)).unwrap();
            assert_eq!(got.tree.nodes(), oracle_tree(&x, &y, alpha, &cfg, &usage).as_slice(), "seed {seed}");
        }
    }
}

#[test]
fn fitted_values_are_tree_predictions() {
    let (x, y) = instance(3, 64, 8);
    let f = fit_tree(
        &x,
        &y,
        &FeatureUsageSets::new(),
        &TreeParams::new(SplitCriterionConfig::plain(), 0.05, Splitter::Exhaustive),
    )
    .unwrap();
    for i in 0..64 {
        assert_eq!(f.fitted[i], f.tree.predict_row(&x.row(i)));
    }
    let total: f64 = f.feature_gain.iter().sum();
    let leaf_sse: f64 = y.iter().zip(&f.fitted).map(|(a, b)| (a - b).powi(2)).sum();
    assert!((f.sse_root - leaf_sse - total).abs() < 1e-9);
}

#[test]
fn internal_nodes_hold_more_than_alpha_m() {
    let (x, y) = instance(8, 64, 8);
    let alpha = 0.2;
    let f = fit_tree(
        &x,
        &y,
        &FeatureUsageSets::new(),
        &TreeParams::new(SplitCriterionConfig::plain(), alpha, Splitter::Exhaustive),
    )
    .unwrap();
    let nodes = f.tree.nodes();
    let mut counts = vec![0usize; nodes.len()];
    for i in 0..64 {
        let mut k = 0;
        loop {
            counts[k] += 1;
            match nodes[k] {
                TreeNode::Split { feature, threshold, left, right } => {
                    k = if x.value(i, feature) < threshold { left } else { right };
                }
                TreeNode::Leaf { .. } => break,
            }
        }
    }
    for (k, node) in nodes.iter().enumerate() {
        if matches!(node, TreeNode::Split { .. }) {
            assert!(counts[k] as f64 > alpha * 64.0);
            assert!(counts[k] >= 2);
        }
    }
}

#[test]
fn pseudo_feature_slices_match_dense_sums() {
    let (x, _) = instance(11, 40, 20);
    let plan = make_subset_plan(20, &GtConfig::new(4, 0.1, 5)).unwrap();
    let cache = build_prefix_cache(&x, &plan);
    for (g, subset) in plan.subsets.iter().enumerate() {
        for l in 0..subset.len() {
            for r in l..=subset.len() {
                for i in 0..40 {
                    let dense: f64 = subset[l..r].iter().map(|&j| x.value(i, j)).sum();
                    assert!((cache.slice_sum(g, i, l..r) - dense).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn group_test_root_recovers_strong_features() {
    let mut r = rng(21);
    let (n, d) = (600, 30);
    let cols: Vec<Vec<f64>> = (0..d).map(|_| (0..n).map(|_| r.random::<f64>()).collect()).collect();
    let y: Vec<f64> = (0..n).map(|i| 4.0 * cols[5][i] + 3.0 * cols[17][i]).collect();
    let x = FeatureMatrix::from_columns(cols).unwrap();
    let mut params = TreeParams::new(SplitCriterionConfig::agbm(0.01), 0.02, Splitter::GroupTest { s: 2, delta: 0.05 });
    params.seed = 3;
    let f = fit_tree(&x, &y, &FeatureUsageSets::new(), &params).unwrap();
    let cand = f.root_candidates.unwrap();
    assert!(cand.contains(&5) && cand.contains(&17), "{cand:?}");
    match f.tree.nodes()[0] {
        TreeNode::Split { feature, .. } => assert!(feature == 5 || feature == 17),
        TreeNode::Leaf { .. } => panic!("root did not split"),
    }
}
