//! Regression and classification trees on lagged returns.
//!
//! Inputs are lag vectors in chronological order (oldest return first), the
//! same convention used for sign states.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::sign_state;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub input: Vec<f64>,
    pub output: f64,
}

impl Sample {
    pub fn new(input: Vec<f64>, output: f64) -> Self {
        Self { input, output }
    }

    fn is_up(&self) -> bool {
        self.output >= 0.0
    }
}

/// Build `(input, output)` pairs from a return path: each output is preceded
/// by its `lag` predecessors.
pub fn lagged_samples(returns: &[f64], lag: usize) -> Vec<Sample> {
    if returns.len() <= lag {
        return Vec::new();
    }
    (lag..returns.len())
        .map(|t| Sample::new(returns[t - lag..t].to_vec(), returns[t]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    Mse,
    Gini,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictMode {
    Regression,
    Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafStats {
    pub n_samples: usize,
    pub mean_output: f64,
    pub n_up: usize,
    pub n_down: usize,
}

impl LeafStats {
    fn from_samples(samples: &[Sample], idx: &[usize]) -> Self {
        let n_up = idx.iter().filter(|&&i| samples[i].is_up()).count();
        let sum: f64 = idx.iter().map(|&i| samples[i].output).sum();
        Self {
            n_samples: idx.len(),
            mean_output: sum / idx.len() as f64,
            n_up,
            n_down: idx.len() - n_up,
        }
    }

    fn forecast(&self, mode: PredictMode) -> f64 {
        match mode {
            PredictMode::Regression => self.mean_output,
            PredictMode::Classification => majority(self.n_up, self.n_down),
        }
    }
}

/// Majority vote, ties and empty cells going long.
fn majority(n_up: usize, n_down: usize) -> f64 {
    if n_down > n_up {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        split_var: usize,
        split_point: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf(LeafStats),
}

impl TreeNode {
    pub fn leaf(&self, input: &[f64]) -> &LeafStats {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf(stats) => return stats,
                TreeNode::Split {
                    split_var,
                    split_point,
                    left,
                    right,
                } => {
                    node = if input[*split_var] <= *split_point {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn predict(&self, input: &[f64], mode: PredictMode) -> f64 {
        self.leaf(input).forecast(mode)
    }

    pub fn leaves(&self) -> Vec<&LeafStats> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            match node {
                TreeNode::Leaf(s) => out.push(s),
                TreeNode::Split { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves().len()
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// `N * Q` for a node: sum of squared deviations (MSE) or `2 n+ n- / N` (Gini).
fn node_loss(loss: Loss, n: f64, sum: f64, sum_sq: f64, n_up: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    match loss {
        Loss::Mse => (sum_sq - sum * sum / n).max(0.0),
        Loss::Gini => 2.0 * n_up * (n - n_up) / n,
    }
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: f64,
    sum: f64,
    sum_sq: f64,
    n_up: f64,
}

impl Moments {
    fn add(&mut self, s: &Sample) {
        self.n += 1.0;
        self.sum += s.output;
        self.sum_sq += s.output * s.output;
        self.n_up += f64::from(u8::from(s.is_up()));
    }

    fn minus(&self, o: &Moments) -> Moments {
        Moments {
            n: self.n - o.n,
            sum: self.sum - o.sum,
            sum_sq: self.sum_sq - o.sum_sq,
            n_up: self.n_up - o.n_up,
        }
    }

    fn loss(&self, loss: Loss) -> f64 {
        node_loss(loss, self.n, self.sum, self.sum_sq, self.n_up)
    }
}

fn lexicographic(a: &Sample, b: &Sample) -> Ordering {
    a.input
        .iter()
        .zip(&b.input)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then(a.output.total_cmp(&b.output))
}

/// Grow a CART tree by recursive binary splitting.
///
/// Every variable is scanned at every midpoint between consecutive distinct
/// values; splits leaving fewer than `min_samples_leaf` samples on either
/// side are inadmissible. A node is split on its best admissible split as long
/// as it is impure and the split does not increase the total loss. Zero-gain
/// splits are kept so that interaction patterns invisible to a single split
/// (XOR) can be recovered one level down. Ties go to the lowest variable
/// index, then the smallest split point.
pub fn fit_cart(samples: &[Sample], loss: Loss, min_samples_leaf: usize) -> Result<TreeNode> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples(
            "cannot fit a tree on no samples".into(),
        ));
    }
    if min_samples_leaf == 0 {
        return Err(Error::invalid("min_samples_leaf must be at least 1"));
    }
    let dim = samples[0].input.len();
    if let Some(s) = samples.iter().find(|s| s.input.len() != dim) {
        return Err(Error::LengthMismatch {
            expected: dim,
            actual: s.input.len(),
        });
    }
    if samples
        .iter()
        .any(|s| !s.output.is_finite() || s.input.iter().any(|x| !x.is_finite()))
    {
        return Err(Error::invalid("samples must be finite"));
    }
    // canonical order makes the fit independent of the caller's ordering
    let mut canon: Vec<usize> = (0..samples.len()).collect();
    canon.sort_by(|&a, &b| lexicographic(&samples[a], &samples[b]));
    // per-variable orderings, presorted once and partitioned stably per node
    let by_var: Vec<Vec<usize>> = (0..dim)
        .map(|v| {
            let mut order = canon.clone();
            order.sort_by(|&a, &b| samples[a].input[v].total_cmp(&samples[b].input[v]));
            order
        })
        .collect();
    let mut fitter = Fitter {
        samples,
        loss,
        min_leaf: min_samples_leaf,
        goes_left: vec![false; samples.len()],
    };
    Ok(fitter.grow(canon, by_var))
}

struct Fitter<'a> {
    samples: &'a [Sample],
    loss: Loss,
    min_leaf: usize,
    goes_left: Vec<bool>,
}

struct Candidate {
    var: usize,
    point: f64,
    loss: f64,
}

impl Fitter<'_> {
    fn grow(&mut self, canon: Vec<usize>, by_var: Vec<Vec<usize>>) -> TreeNode {
        let mut total = Moments::default();
        for &i in &canon {
            total.add(&self.samples[i]);
        }
        let parent_loss = total.loss(self.loss);
        let impure = match self.loss {
            Loss::Gini => total.n_up > 0.0 && total.n_up < total.n,
            Loss::Mse => {
                let first = self.samples[canon[0]].output;
                canon.iter().any(|&i| self.samples[i].output != first)
            }
        };
        if !impure || canon.len() < 2 * self.min_leaf {
            return TreeNode::Leaf(LeafStats::from_samples(self.samples, &canon));
        }
        match self.best_split(&by_var, &total) {
            Some(c) if c.loss <= parent_loss => {
                for &i in &canon {
                    self.goes_left[i] = self.samples[i].input[c.var] <= c.point;
                }
                let (lc, rc) = self.partition(&canon);
                let (lv, rv): (Vec<_>, Vec<_>) =
                    by_var.iter().map(|order| self.partition(order)).unzip();
                drop(by_var);
                TreeNode::Split {
                    split_var: c.var,
                    split_point: c.point,
                    left: Box::new(self.grow(lc, lv)),
                    right: Box::new(self.grow(rc, rv)),
                }
            }
            _ => TreeNode::Leaf(LeafStats::from_samples(self.samples, &canon)),
        }
    }

    fn partition(&self, order: &[usize]) -> (Vec<usize>, Vec<usize>) {
        order.iter().partition(|&&i| self.goes_left[i])
    }

    fn best_split(&self, by_var: &[Vec<usize>], total: &Moments) -> Option<Candidate> {
        let samples = self.samples;
        let mut best: Option<Candidate> = None;
        for (var, order) in by_var.iter().enumerate() {
            let n = order.len();
            let mut left = Moments::default();
            for k in 0..n - 1 {
                left.add(&samples[order[k]]);
                let here = samples[order[k]].input[var];
                let next = samples[order[k + 1]].input[var];
                if here == next {
                    continue;
                }
                let n_left = k + 1;
                if n_left < self.min_leaf || n - n_left < self.min_leaf {
                    continue;
                }
                let right = total.minus(&left);
                let split_loss = left.loss(self.loss) + right.loss(self.loss);
                if best.as_ref().is_none_or(|b| split_loss < b.loss) {
                    best = Some(Candidate {
                        var,
                        point: 0.5 * (here + next),
                        loss: split_loss,
                    });
                }
            }
        }
        best
    }
}

/// Cost-complexity loss `sum_m N_m Q_m + alpha |T|` of a tree on `samples`.
pub fn subtree_loss(tree: &TreeNode, samples: &[Sample], loss: Loss, alpha: f64) -> f64 {
    let leaves = tree.leaves();
    let mut moments = vec![Moments::default(); leaves.len()];
    for s in samples {
        let leaf = tree.leaf(&s.input);
        let pos = leaves
            .iter()
            .position(|l| std::ptr::eq(*l, leaf))
            .expect("leaf reachable");
        moments[pos].add(s);
    }
    moments.iter().map(|m| m.loss(loss)).sum::<f64>() + alpha * leaves.len() as f64
}

/// Smallest leaf size for which a class-probability gap of `prob_gap` is
/// `significance_sd` binomial standard deviations away from a fair coin.
pub fn min_leaf_bound(prob_gap: f64, significance_sd: f64) -> Result<usize> {
    if prob_gap == 0.0 {
        return Err(Error::Domain(
            "zero probability gap needs unbounded samples".into(),
        ));
    }
    if !(prob_gap > 0.0 && prob_gap <= 1.0) {
        return Err(Error::Domain(format!(
            "probability gap {prob_gap} outside (0, 1]"
        )));
    }
    if !(significance_sd > 0.0) {
        return Err(Error::invalid("significance_sd must be positive"));
    }
    // sd(p_hat) = 1 / (2 sqrt(n)) must not exceed the half gap / sd
    let n = (significance_sd * significance_sd / (prob_gap * prob_gap)).ceil();
    // guard against 99.999.. rounding up to the next integer
    let snapped = n.round();
    let n = if (n - 1.0 - snapped).abs() < 1e-9 {
        snapped
    } else {
        n
    };
    Ok(n.max(1.0) as usize)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StateStats {
    pub n_up: u64,
    pub n_down: u64,
    pub sum_output: f64,
}

impl StateStats {
    pub fn n(&self) -> u64 {
        self.n_up + self.n_down
    }
}

/// Tree whose leaves are the `2^lag` sign states of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedTree {
    pub lag: usize,
    pub states: Vec<StateStats>,
}

impl FixedTree {
    pub fn empty(lag: usize) -> Self {
        Self {
            lag,
            states: vec![StateStats::default(); 1 << lag],
        }
    }

    pub fn add(&mut self, state: usize, output: f64) {
        let s = &mut self.states[state];
        if output >= 0.0 {
            s.n_up += 1;
        } else {
            s.n_down += 1;
        }
        s.sum_output += output;
    }

    /// Undo a previous `add` of the same observation.
    pub fn remove(&mut self, state: usize, output: f64) {
        let s = &mut self.states[state];
        if output >= 0.0 {
            s.n_up -= 1;
        } else {
            s.n_down -= 1;
        }
        s.sum_output -= output;
    }

    pub fn n_samples(&self) -> u64 {
        self.states.iter().map(StateStats::n).sum()
    }

    pub fn predict_state(&self, state: usize, mode: PredictMode) -> f64 {
        let s = &self.states[state];
        match mode {
            PredictMode::Classification => majority(s.n_up as usize, s.n_down as usize),
            PredictMode::Regression if s.n() == 0 => 1.0,
            PredictMode::Regression => s.sum_output / s.n() as f64,
        }
    }

    pub fn predict(&self, input: &[f64], mode: PredictMode) -> f64 {
        self.predict_state(sign_state(input), mode)
    }
}

/// Accumulate per-sign-state counts and output sums. No minimum leaf size.
pub fn fit_fixed(samples: &[Sample], lag: usize) -> Result<FixedTree> {
    let mut tree = FixedTree::empty(lag);
    for s in samples {
        if s.input.len() != lag {
            return Err(Error::LengthMismatch {
                expected: lag,
                actual: s.input.len(),
            });
        }
        tree.add(sign_state(&s.input), s.output);
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng as _;

    pub(crate) fn xor_samples(copies: usize) -> Vec<Sample> {
        let base = [
            ([1.0, 1.0], -1.0),
            ([1.0, -1.0], 1.0),
            ([-1.0, 1.0], 1.0),
            ([-1.0, -1.0], -1.0),
        ];
        (0..copies)
            .flat_map(|_| base.iter().map(|(x, y)| Sample::new(x.to_vec(), *y)))
            .collect()
    }

    #[test]
    fn cart_recovers_xor() {
        let data = xor_samples(200);
        let tree = fit_cart(&data, Loss::Gini, 100).unwrap();
        assert_eq!(tree.depth(), 2);
        assert_eq!(tree.n_leaves(), 4);
        let correct = data
            .iter()
            .filter(|s| tree.predict(&s.input, PredictMode::Classification) == s.output)
            .count();
        assert_eq!(correct, data.len());
    }

    #[test]
    fn pure_node_is_leaf() {
        let data: Vec<Sample> = (0..50).map(|i| Sample::new(vec![i as f64], 0.7)).collect();
        for loss in [Loss::Mse, Loss::Gini] {
            let tree = fit_cart(&data, loss, 1).unwrap();
            assert_eq!(tree.n_leaves(), 1);
        }
    }

    #[test]
    fn step_function_matches_exhaustive_scan() {
        let mut g = rng::stream(3, 0);
        let data: Vec<Sample> = (0..400)
            .map(|_| {
                let x: f64 = g.random_range(-1.0..1.0);
                let y = if x <= 0.0 { -0.5 } else { 0.8 } + 0.01 * rng::normal(&mut g);
                Sample::new(vec![x], y)
            })
            .collect();
        // oracle: brute-force every midpoint, recomputing both sides directly
        let mut xs: Vec<f64> = data.iter().map(|s| s.input[0]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let sse = |ys: &[f64]| {
            let m = ys.iter().sum::<f64>() / ys.len() as f64;
            ys.iter().map(|y| (y - m).powi(2)).sum::<f64>()
        };
        let mut best = (f64::INFINITY, 0.0);
        for w in xs.windows(2) {
            let s = 0.5 * (w[0] + w[1]);
            let l: Vec<f64> = data
                .iter()
                .filter(|d| d.input[0] <= s)
                .map(|d| d.output)
                .collect();
            let r: Vec<f64> = data
                .iter()
                .filter(|d| d.input[0] > s)
                .map(|d| d.output)
                .collect();
            let total = sse(&l) + sse(&r);
            if total < best.0 {
                best = (total, s);
            }
        }
        let tree = fit_cart(&data, Loss::Mse, 150).unwrap();
        match &tree {
            TreeNode::Split {
                split_point,
                left,
                right,
                ..
            } => {
                assert_eq!(*split_point, best.1);
                let lm: Vec<f64> = data
                    .iter()
                    .filter(|d| d.input[0] <= best.1)
                    .map(|d| d.output)
                    .collect();
                let rm: Vec<f64> = data
                    .iter()
                    .filter(|d| d.input[0] > best.1)
                    .map(|d| d.output)
                    .collect();
                let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
                assert_abs_diff_eq!(
                    left.predict(&[0.0], PredictMode::Regression),
                    mean(&lm),
                    epsilon = 1e-12
                );
                assert_abs_diff_eq!(
                    right.predict(&[0.0], PredictMode::Regression),
                    mean(&rm),
                    epsilon = 1e-12
                );
            }
            TreeNode::Leaf(_) => panic!("expected a split"),
        }
        assert!(best.1.abs() < 0.05);
    }

    #[test]
    fn empty_input_errors() {
        assert!(fit_cart(&[], Loss::Mse, 1).is_err());
    }

    #[test]
    fn subtree_loss_cases() {
        let data = xor_samples(10);
        let leaf = fit_cart(&data, Loss::Gini, 100).unwrap();
        assert_eq!(leaf.n_leaves(), 1);
        // root: N = 40, p = 1/2 -> N * 2 p (1 - p) = 20
        assert_abs_diff_eq!(
            subtree_loss(&leaf, &data, Loss::Gini, 0.0),
            20.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            subtree_loss(&leaf, &data, Loss::Gini, 1.5),
            21.5,
            epsilon = 1e-12
        );
        let full = fit_cart(&data, Loss::Gini, 1).unwrap();
        assert_eq!(subtree_loss(&full, &data, Loss::Gini, 0.0), 0.0);
        // at alpha = 6 the 4-leaf tree (0 + 24) loses to the stump (20 + 6)
        assert!(
            subtree_loss(&full, &data, Loss::Gini, 6.0)
                < subtree_loss(&leaf, &data, Loss::Gini, 6.0)
        );
        assert!(
            subtree_loss(&full, &data, Loss::Gini, 7.0)
                > subtree_loss(&leaf, &data, Loss::Gini, 7.0)
        );
    }

    #[test]
    fn subtree_loss_matches_direct_mse() {
        let mut g = rng::stream(5, 0);
        let data: Vec<Sample> = (0..300)
            .map(|_| {
                Sample::new(
                    vec![rng::normal(&mut g), rng::normal(&mut g)],
                    rng::normal(&mut g),
                )
            })
            .collect();
        let tree = fit_cart(&data, Loss::Mse, 30).unwrap();
        let direct: f64 = data
            .iter()
            .map(|s| (s.output - tree.predict(&s.input, PredictMode::Regression)).powi(2))
            .sum();
        assert_abs_diff_eq!(
            subtree_loss(&tree, &data, Loss::Mse, 0.0),
            direct,
            epsilon = 1e-9
        );
    }

    #[test]
    fn min_leaf_bounds() {
        assert_eq!(min_leaf_bound(0.10, 1.0).unwrap(), 100);
        assert_eq!(min_leaf_bound(1.0, 1.0).unwrap(), 1);
        assert_eq!(min_leaf_bound(0.10, 2.0).unwrap(), 400);
        assert!(min_leaf_bound(0.0, 1.0).is_err());
    }

    #[test]
    fn fixed_tree_xor() {
        let tree = fit_fixed(&xor_samples(3), 2).unwrap();
        for s in &tree.states {
            assert!(s.n_up == 0 || s.n_down == 0);
            assert_eq!(s.n(), 3);
        }
        assert_eq!(tree.predict(&[1.0, -1.0], PredictMode::Classification), 1.0);
        assert_eq!(tree.predict(&[1.0, 1.0], PredictMode::Classification), -1.0);
    }

    #[test]
    fn fixed_tree_hand_case() {
        let mut tree = FixedTree::empty(1);
        for i in 0..10 {
            tree.add(1, if i < 7 { 0.02 } else { -0.01 });
        }
        assert_eq!(tree.predict_state(1, PredictMode::Classification), 1.0);
        assert_abs_diff_eq!(
            tree.predict_state(1, PredictMode::Regression),
            (7.0 * 0.02 - 3.0 * 0.01) / 10.0,
            epsilon = 1e-15
        );
        // never-observed state and ties go long
        assert_eq!(tree.predict_state(0, PredictMode::Classification), 1.0);
        assert_eq!(tree.predict_state(0, PredictMode::Regression), 1.0);
        tree.add(0, 0.1);
        tree.add(0, -0.1);
        assert_eq!(tree.predict_state(0, PredictMode::Classification), 1.0);
        assert_eq!(fit_fixed(&[], 3).unwrap().n_samples(), 0);
    }

    #[test]
    fn fixed_tree_recovers_markov_frequencies() {
        let spec = crate::dgp::TransitionSpec::uniform_two_lag(0.4, -0.2, 1.0).unwrap();
        let x = crate::dgp::simulate_markov(&spec, 100_000, 17).unwrap();
        let tree = fit_fixed(&lagged_samples(x.values(), 2), 2).unwrap();
        for (i, s) in tree.states.iter().enumerate() {
            let p = spec.p_up(i);
            let freq = s.n_up as f64 / s.n() as f64;
            let se = (p * (1.0 - p) / s.n() as f64).sqrt();
            assert!((freq - p).abs() < 4.0 * se, "state {i}: {freq} vs {p}");
        }
    }

    #[test]
    fn tree_json_round_trip() {
        let tree = fit_cart(&xor_samples(200), Loss::Gini, 100).unwrap();
        let json = serde_json::to_string(&tree).unwrap();
        assert!(json.contains("split_var"));
        let back: TreeNode = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tree);
    }

    fn arb_samples() -> impl Strategy<Value = Vec<Sample>> {
        prop::collection::vec((prop::collection::vec(-3i32..3, 2), -5i32..5), 4..120).prop_map(
            |v| {
                v.into_iter()
                    .map(|(x, y)| Sample::new(x.into_iter().map(f64::from).collect(), f64::from(y)))
                    .collect()
            },
        )
    }

    proptest! {
        #[test]
        fn leaves_respect_min_size(data in arb_samples(), min_leaf in 1usize..10, gini in any::<bool>()) {
            let loss = if gini { Loss::Gini } else { Loss::Mse };
            let tree = fit_cart(&data, loss, min_leaf).unwrap();
            let leaves = tree.leaves();
            prop_assert_eq!(leaves.iter().map(|l| l.n_samples).sum::<usize>(), data.len());
            if leaves.len() > 1 {
                for l in leaves {
                    prop_assert!(l.n_samples >= min_leaf);
                    prop_assert_eq!(l.n_up + l.n_down, l.n_samples);
                }
            }
        }

        #[test]
        fn splits_never_increase_loss(data in arb_samples(), gini in any::<bool>()) {
            let loss = if gini { Loss::Gini } else { Loss::Mse };
            let tree = fit_cart(&data, loss, 2).unwrap();
            let root = fit_cart(&data, loss, data.len()).unwrap();
            prop_assert!(subtree_loss(&tree, &data, loss, 0.0) <= subtree_loss(&root, &data, loss, 0.0) + 1e-9);
        }

        #[test]
        fn fit_is_order_independent(data in arb_samples(), seed in any::<u64>()) {
            let mut shuffled = data.clone();
            let mut g = rng::stream(seed, 0);
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, g.random_range(0..=i));
            }
            prop_assert_eq!(fit_cart(&data, Loss::Mse, 3).unwrap(), fit_cart(&shuffled, Loss::Mse, 3).unwrap());
        }

        #[test]
        fn fixed_counts_sum(data in arb_samples()) {
            let tree = fit_fixed(&data, 2).unwrap();
            prop_assert_eq!(tree.n_samples() as usize, data.len());
        }
    }
}
