//! Binary random-forest classifier (CART, Gini impurity, bootstrap samples,
//! random feature subsets per split) and stratified k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::seed;

#[derive(Debug, Clone, Copy)]
pub struct ForestConfig {
    pub trees: usize,
    /// Features tried per split; `None` means `floor(sqrt(d))`, at least 1.
    pub max_features: Option<usize>,
    pub folds: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            trees: 100,
            max_features: None,
            folds: 5,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                Node::Leaf(p) => return *p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => k = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

/// Best split of `idx` on feature `j`: (weighted child impurity, threshold).
fn best_split(x: &[Vec<f64>], y: &[bool], idx: &[usize], j: usize) -> Option<(f64, f64)> {
    let mut order: Vec<usize> = idx.to_vec();
    order.sort_by(|&a, &b| x[a][j].total_cmp(&x[b][j]).then(a.cmp(&b)));
    let n = order.len();
    let total_pos = order.iter().filter(|&&i| y[i]).count();
    let mut left_pos = 0;
    let mut best: Option<(f64, f64)> = None;
    for k in 0..n - 1 {
        if y[order[k]] {
            left_pos += 1;
        }
        let (a, b) = (x[order[k]][j], x[order[k + 1]][j]);
        if a == b {
            continue;
        }
        let nl = k + 1;
        let nr = n - nl;
        let score = (nl as f64 * gini(left_pos, nl) + nr as f64 * gini(total_pos - left_pos, nr)) / n as f64;
        if best.is_none_or(|(s, _)| score < s) {
            let mid = a + (b - a) / 2.0;
            // keep the threshold strictly below the right value
            let thr = if mid < b { mid } else { a };
            best = Some((score, thr));
        }
    }
    best
}

fn grow(x: &[Vec<f64>], y: &[bool], sample: Vec<usize>, mtry: usize, rng: &mut ChaCha8Rng) -> Tree {
    let dim = x[0].len();
    let mut nodes = vec![Node::Leaf(0.0)];
    let mut stack = vec![(0usize, sample)];
    while let Some((slot, idx)) = stack.pop() {
        let pos = idx.iter().filter(|&&i| y[i]).count();
        let frac = pos as f64 / idx.len() as f64;
        if pos == 0 || pos == idx.len() {
            nodes[slot] = Node::Leaf(frac);
            continue;
        }
        let mut feats: Vec<usize> = (0..dim).collect();
        feats.shuffle(rng);
        let mut chosen: Option<(f64, f64, usize)> = None;
        for (tried, &j) in feats.iter().enumerate() {
            if tried >= mtry && chosen.is_some() {
                break;
            }
            if let Some((score, thr)) = best_split(x, y, &idx, j) {
                if chosen.is_none_or(|(s, _, _)| score < s) {
                    chosen = Some((score, thr, j));
                }
            }
        }
        let Some((_, threshold, feature)) = chosen else {
            nodes[slot] = Node::Leaf(frac);
            continue;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| x[i][feature] <= threshold);
        let left = nodes.len();
        nodes.push(Node::Leaf(0.0));
        let right = nodes.len();
        nodes.push(Node::Leaf(0.0));
        nodes[slot] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        stack.push((right, r));
        stack.push((left, l));
    }
    Tree { nodes }
}

#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<Tree>,
}

impl RandomForest {
    /// Fits on rows `x` (each of equal dimension) with binary labels `y`.
    pub fn fit(x: &[Vec<f64>], y: &[bool], cfg: &ForestConfig, seed_base: u64) -> Self {
        assert!(!x.is_empty() && x.len() == y.len());
        let dim = x[0].len();
        let mtry = cfg
            .max_features
            .unwrap_or_else(|| (dim as f64).sqrt().floor() as usize)
            .clamp(1, dim);
        let n = x.len();
        let trees = (0..cfg.trees)
            .map(|t| {
                let mut rng = seed::rng(seed_base, &[t as u64]);
                let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                grow(x, y, sample, mtry, &mut rng)
            })
            .collect();
        Self { trees }
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.predict_proba(x) > 0.5
    }
}

/// Assigns each position of `order` to a fold, dealing each class
/// round-robin so class proportions are balanced across folds.
pub fn stratified_folds(order: &[usize], y: &[bool], folds: usize) -> Vec<usize> {
    let mut fold_of = vec![0usize; y.len()];
    let mut next = [0usize; 2];
    for &i in order {
        let c = y[i] as usize;
        fold_of[i] = next[c] % folds;
        next[c] += 1;
    }
    fold_of
}

/// Cross-validated misclassification rate. `order` is the canonical instance
/// order (training sets follow it) and fixes the fold assignment.
pub fn cv_error(x: &[Vec<f64>], y: &[bool], order: &[usize], cfg: &ForestConfig, seed_base: u64) -> f64 {
    let fold_of = stratified_folds(order, y, cfg.folds);
    let mut wrong = 0usize;
    for f in 0..cfg.folds {
        let train: Vec<usize> = order.iter().copied().filter(|&i| fold_of[i] != f).collect();
        let test: Vec<usize> = order.iter().copied().filter(|&i| fold_of[i] == f).collect();
        if test.is_empty() || train.is_empty() {
            continue;
        }
        let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let ty: Vec<bool> = train.iter().map(|&i| y[i]).collect();
        let forest = RandomForest::fit(&tx, &ty, cfg, seed::derive(seed_base, &[f as u64]));
        wrong += test.iter().filter(|&&i| forest.predict(&x[i]) != y[i]).count();
    }
    wrong as f64 / y.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_data_is_learned() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let f = RandomForest::fit(&x, &y, &ForestConfig::default(), 5);
        assert!(f.predict(&[35.0, 1.0]));
        assert!(!f.predict(&[3.0, 1.0]));
        let order: Vec<usize> = (0..40).collect();
        assert!(cv_error(&x, &y, &order, &ForestConfig::default(), 5) <= 0.05);
    }

    #[test]
    fn folds_are_stratified() {
        let y: Vec<bool> = (0..50).map(|i| i % 5 == 0).collect();
        let order: Vec<usize> = (0..50).collect();
        let folds = stratified_folds(&order, &y, 5);
        for f in 0..5 {
            let pos = (0..50).filter(|&i| folds[i] == f && y[i]).count();
            assert_eq!(pos, 2);
        }
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let f = RandomForest::fit(&x, &[true, true], &ForestConfig::default(), 0);
        assert_eq!(f.predict_proba(&[0.5, 0.5]), 1.0);
    }
}
