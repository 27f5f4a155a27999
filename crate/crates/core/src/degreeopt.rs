//! Choosing download amounts and the repair degree.
//!
//! The allocation problem is the linear program
//! `min Σ b_i β_i` subject to `Σ_{i∈A} β_i ≥ l` for every `|A| = n−k` and
//! `0 ≤ β_i ≤ l`. Some optimum gives `β = l/(d−k+1)` to the `d` cheapest
//! nodes and nothing to the rest, so only `d` has to be searched.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graphrepair::{build_repair_tree, ip_tree_total, nearest_helpers, RepairTree, StorageGraph};
use crate::util::combinations;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpInstance {
    pub n: usize,
    pub k: usize,
    pub l: u64,
    /// One cost per candidate helper (`n − 1` entries), any order.
    pub costs: Vec<u64>,
    /// Helpers whose downloads cost nothing (they already forward `l` symbols).
    #[serde(default)]
    pub excluded: Vec<bool>,
}

impl LpInstance {
    pub fn new(n: usize, k: usize, l: u64, costs: Vec<u64>) -> Result<Self> {
        let inst = LpInstance { n, k, l, costs, excluded: Vec::new() };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_excluded(mut self, excluded: Vec<bool>) -> Result<Self> {
        self.excluded = excluded;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 || self.k == 0 || self.k > self.n - 1 {
            return Err(Error::Params(format!("need 1 <= k <= n-1, got n = {}, k = {}", self.n, self.k)));
        }
        if self.costs.len() != self.n - 1 {
            return Err(Error::Params(format!("{} costs for n-1 = {} helpers", self.costs.len(), self.n - 1)));
        }
        if !self.excluded.is_empty() && self.excluded.len() != self.n - 1 {
            return Err(Error::Params("exclusion mask must cover every helper".into()));
        }
        Ok(())
    }

    /// Costs with excluded helpers set to zero.
    pub fn effective_costs(&self) -> Vec<u64> {
        self.costs
            .iter()
            .enumerate()
            .map(|(i, &c)| if self.excluded.get(i).copied().unwrap_or(false) { 0 } else { c })
            .collect()
    }

    /// Helper indices from most to least expensive, ties by index.
    pub fn order(&self) -> Vec<usize> {
        let c = self.effective_costs();
        let mut idx: Vec<usize> = (0..c.len()).collect();
        idx.sort_by(|&a, &b| c[b].cmp(&c[a]).then(a.cmp(&b)));
        idx
    }

    pub fn objective(&self, betas: &[Rational64]) -> Rational64 {
        self.effective_costs().iter().zip(betas).map(|(&c, &b)| Rational64::from(c as i64) * b).sum()
    }

    /// `0 ≤ β_i ≤ l` and the `n−k` smallest downloads sum to at least `l`.
    pub fn is_feasible(&self, betas: &[Rational64]) -> bool {
        let l = Rational64::from(self.l as i64);
        if betas.len() != self.n - 1 || betas.iter().any(|&b| b < Rational64::from(0) || b > l) {
            return false;
        }
        let mut s = betas.to_vec();
        s.sort();
        s[..self.n - self.k].iter().sum::<Rational64>() >= l
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreePlan {
    pub d: usize,
    /// Downloads aligned with the instance's helpers.
    pub betas: Vec<Rational64>,
    pub objective: Rational64,
}

/// Objective of the uniform allocation to the `d` cheapest helpers.
pub fn structural_objective(inst: &LpInstance, d: usize) -> Rational64 {
    let c = inst.effective_costs();
    let order = inst.order();
    let cheap: u64 = order[inst.n - 1 - d..].iter().map(|&i| c[i]).sum();
    Rational64::new((cheap * inst.l) as i64, (d + 1 - inst.k) as i64)
}

/// Best `d ∈ {k, …, n−1}` for the uniform-on-the-cheapest allocation; ties go to the smaller `d`.
pub fn solve_lp_structural(inst: &LpInstance) -> DegreePlan {
    let mut best: Option<(usize, Rational64)> = None;
    for d in inst.k..inst.n {
        let v = structural_objective(inst, d);
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((d, v));
        }
    }
    let (d, objective) = best.expect("k <= n-1 leaves at least one degree");
    let beta = Rational64::new(inst.l as i64, (d + 1 - inst.k) as i64);
    let mut betas = vec![Rational64::from(0); inst.n - 1];
    for &i in &inst.order()[inst.n - 1 - d..] {
        betas[i] = beta;
    }
    DegreePlan { d, betas, objective }
}

/// Minimum over the grid `β_i ∈ {0, l/Q, …, l}` checking every subset constraint.
pub fn lp_bruteforce_oracle(inst: &LpInstance, q: u64, exec: Execution) -> Result<Rational64> {
    if inst.n > 6 {
        return Err(Error::ScaleTooLarge(format!("grid search needs n <= 6, got {}", inst.n)));
    }
    if q == 0 {
        return Err(Error::Params("grid denominator must be positive".into()));
    }
    if inst.l == 0 {
        return Ok(Rational64::from(0));
    }
    let vars = inst.n - 1;
    let costs = inst.effective_costs();
    let subsets = combinations(vars, inst.n - inst.k);
    let radix = q + 1;
    let inner: u64 = radix.pow(vars as u32 - 1);
    let best = exec.map(radix as usize, |first| {
        let mut v = vec![0u64; vars];
        v[0] = first as u64;
        let mut best: Option<u64> = None;
        for code in 0..inner {
            let mut x = code;
            for slot in v.iter_mut().skip(1) {
                *slot = x % radix;
                x /= radix;
            }
            if subsets.iter().all(|a| a.iter().map(|&i| v[i]).sum::<u64>() >= q) {
                let obj: u64 = costs.iter().zip(&v).map(|(c, x)| c * x).sum();
                if best.is_none_or(|b| obj < b) {
                    best = Some(obj);
                }
            }
        }
        best
    });
    let min = best.into_iter().flatten().min().expect("all-l allocation is feasible");
    Ok(Rational64::new((min * inst.l) as i64, q as i64))
}

/// Sorted hop distances from `f` to every other vertex.
fn sorted_distances(g: &StorageGraph, f: usize) -> Result<Vec<u64>> {
    if f >= g.n() {
        return Err(Error::NodeOutOfRange { index: f, n: g.n() });
    }
    let dist = g.distances(f);
    let mut out = Vec::with_capacity(g.n() - 1);
    for (v, x) in dist.iter().enumerate() {
        if v != f {
            out.push(x.ok_or(Error::Disconnected)? as u64);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// `Λ_U^AF(d) = l/(d−k+1) · Σ_{i} i d_i` with the `d` nearest helpers, for every `d ∈ {k, …, n−1}`.
pub fn af_degree_curve(g: &StorageGraph, f: usize, k: usize, l: u64) -> Result<Vec<(usize, Rational64)>> {
    let dist = sorted_distances(g, f)?;
    if k == 0 || k > dist.len() {
        return Err(Error::Params(format!("need 1 <= k <= n-1, got k = {k}, n = {}", g.n())));
    }
    let mut prefix = 0u64;
    let mut out = Vec::with_capacity(dist.len() + 1 - k);
    for (i, &x) in dist.iter().enumerate() {
        prefix += x;
        let d = i + 1;
        if d >= k {
            out.push((d, Rational64::new((prefix * l) as i64, (d + 1 - k) as i64)));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AfDegree {
    pub d: usize,
    pub value: Rational64,
    pub helpers: Vec<usize>,
}

/// `d*_AF = argmin_d Λ_U^AF(d)`, ties to the smaller `d`.
pub fn optimal_degree_af(g: &StorageGraph, f: usize, k: usize, l: u64) -> Result<AfDegree> {
    let curve = af_degree_curve(g, f, k, l)?;
    let (d, value) = curve.iter().fold(curve[0], |best, &c| if c.1 < best.1 { c } else { best });
    Ok(AfDegree { d, value, helpers: nearest_helpers(g, f, d)? })
}

/// With the `k`-th nearest helper in layer `a`: `Λ_U^AF(k) ≥ Λ_U^AF(|N_a(f)|)`.
pub fn prop3_holds(g: &StorageGraph, f: usize, k: usize, l: u64) -> Result<bool> {
    let dist = sorted_distances(g, f)?;
    let curve = af_degree_curve(g, f, k, l)?;
    let a = dist[k - 1];
    let ball = dist.iter().filter(|&&x| x <= a).count();
    Ok(curve[0].1 >= curve[ball - k].1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threshold {
    /// `max_a (C(a) − K(a)/a)`.
    pub bound: Rational64,
    /// Smallest `k` strictly above the bound.
    pub min_k: u64,
}

fn threshold_from_layers(layers: &[u64]) -> Threshold {
    let mut bound = Rational64::from(1);
    let (mut ball, mut weighted) = (0u64, 0u64);
    for a in 1..=layers.len() as u64 {
        let c = Rational64::from(ball as i64 + 1);
        let v = c - Rational64::new(weighted as i64, a as i64);
        bound = bound.max(v);
        let size = layers[a as usize - 1];
        ball += size;
        weighted += a * size;
    }
    Threshold { bound, min_k: bound.floor().to_integer() as u64 + 1 }
}

/// Rate threshold on a `t`-regular graph whose repair tree has height `m`,
/// using layer sizes `t(t−1)^{i−1}`.
pub fn threshold_k(t: u64, m: usize) -> Result<Threshold> {
    if t < 2 || m == 0 {
        return Err(Error::Params(format!("need t >= 2 and m >= 1, got t = {t}, m = {m}")));
    }
    let layers: Vec<u64> = (0..m as u32).map(|i| t * (t - 1).pow(i)).collect();
    Ok(threshold_from_layers(&layers))
}

/// The same threshold from the actual layer sizes around `f`.
pub fn threshold_k_general(g: &StorageGraph, f: usize) -> Result<Threshold> {
    let dist = sorted_distances(g, f)?;
    let m = *dist.last().ok_or(Error::Params("graph has a single vertex".into()))? as usize;
    let mut layers = vec![0u64; m];
    for x in dist {
        layers[x as usize - 1] += 1;
    }
    Ok(threshold_from_layers(&layers))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchMode {
    /// Every tree rooted at `f` in the graph; small graphs only.
    Exhaustive,
    /// The BFS tree, pruned to the `d` nearest helpers for each `d`.
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSearch {
    pub tree: RepairTree,
    pub d: usize,
    pub value: Rational64,
}

/// Limit on parent assignments tried by the exhaustive search.
pub const EXHAUSTIVE_LIMIT: u64 = 5_000_000;

/// Minimizes `Λ_U^IP` over repair trees rooted at `f` with at least `k` helpers.
pub fn optimal_tree_search(g: &StorageGraph, f: usize, k: usize, l: u64, mode: SearchMode) -> Result<TreeSearch> {
    let n = g.n();
    if f >= n {
        return Err(Error::NodeOutOfRange { index: f, n });
    }
    if k == 0 || k + 1 > n {
        return Err(Error::Params(format!("need 1 <= k <= n-1, got k = {k}, n = {n}")));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    match mode {
        SearchMode::Heuristic => {
            let mut best: Option<TreeSearch> = None;
            for d in k..n {
                let tree = build_repair_tree(g, f, &nearest_helpers(g, f, d)?)?;
                let value = ip_tree_total(&tree, l, d, k);
                if best.as_ref().is_none_or(|b| value < b.value) {
                    best = Some(TreeSearch { tree, d, value });
                }
            }
            Ok(best.expect("at least one degree"))
        }
        SearchMode::Exhaustive => exhaustive_search(g, f, k, l),
    }
}

fn exhaustive_search(g: &StorageGraph, f: usize, k: usize, l: u64) -> Result<TreeSearch> {
    let n = g.n();
    if n > 9 {
        return Err(Error::ScaleTooLarge(format!("exhaustive tree search needs n <= 9, got {n}")));
    }
    let others: Vec<usize> = (0..n).filter(|&v| v != f).collect();
    let space: u64 = others.iter().map(|&v| g.neighbors(v).len() as u64 + 1).product();
    if space > EXHAUSTIVE_LIMIT {
        return Err(Error::ScaleTooLarge(format!("{space} parent assignments exceed {EXHAUSTIVE_LIMIT}")));
    }
    // parent[v] = None: v is not in the tree
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut best: Option<(Rational64, usize, Vec<Option<usize>>)> = None;
    let mut choice = vec![0usize; others.len()];
    'outer: loop {
        for (slot, &v) in others.iter().enumerate() {
            parent[v] = if choice[slot] == 0 { None } else { Some(g.neighbors(v)[choice[slot] - 1]) };
        }
        if let Some((value, d)) = evaluate(&parent, f, k, l) {
            if best.as_ref().is_none_or(|(b, bd, _)| value < *b || (value == *b && d < *bd)) {
                best = Some((value, d, parent.clone()));
            }
        }
        for (slot, &v) in others.iter().enumerate() {
            choice[slot] += 1;
            if choice[slot] <= g.neighbors(v).len() {
                continue 'outer;
            }
            choice[slot] = 0;
        }
        break;
    }
    let (value, d, parent) = best.ok_or(Error::Params("no tree reaches k helpers".into()))?;
    let links: Vec<(usize, usize)> = parent.iter().enumerate().filter_map(|(v, p)| p.map(|p| (v, p))).collect();
    Ok(TreeSearch { tree: RepairTree::from_parents(n, f, &links)?, d, value })
}

/// `Λ_U^IP` of a parent assignment, if it is a tree hanging from `f` with at least `k` helpers.
fn evaluate(parent: &[Option<usize>], f: usize, k: usize, l: u64) -> Option<(Rational64, usize)> {
    let n = parent.len();
    let d = parent.iter().filter(|p| p.is_some()).count();
    if d < k {
        return None;
    }
    let mut sigma = vec![0i64; n];
    for v in 0..n {
        if parent[v].is_none() {
            continue;
        }
        let mut u = v;
        let mut steps = 0;
        while u != f {
            let p = parent[u]?;
            if p != f && parent[p].is_none() {
                return None;
            }
            if u != v {
                sigma[u] += 1;
            }
            u = p;
            steps += 1;
            if steps > n {
                return None;
            }
        }
    }
    let r = (d + 1 - k) as i64;
    let units: i64 = (0..n).filter(|&v| parent[v].is_some()).map(|v| (sigma[v] + 1).min(r)).sum();
    Some((Rational64::new(units * l as i64, r), d))
}

/// How the edge probability depends on `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProbabilityRule {
    /// `p = c · ln n / n`.
    LogFactor(f64),
    Constant(f64),
}

impl ProbabilityRule {
    pub fn p(self, n: usize) -> f64 {
        match self {
            ProbabilityRule::LogFactor(c) => (c * (n as f64).ln() / n as f64).min(1.0),
            ProbabilityRule::Constant(p) => p,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub trials: usize,
    /// Trials with `d*_AF = n − 1`.
    pub hits: usize,
    /// Disconnected samples drawn and discarded.
    pub resampled: usize,
    pub frequency: f64,
}

/// Result of one trial: whether `d*_AF = n−1`, and how many samples were discarded.
fn mc_trial(n: usize, p: f64, k: usize, seed: u64, trial: usize) -> (bool, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | trial as u64);
    let mut resampled = 0;
    loop {
        let g = StorageGraph::erdos_renyi_with(n, p, &mut rng);
        if g.is_connected() {
            let best = optimal_degree_af(&g, 0, k, 1).expect("connected sample");
            return (best.d == n - 1, resampled);
        }
        resampled += 1;
        // keep draws from a degenerate rule bounded
        if resampled > 10_000 {
            let _: u64 = rng.random();
            return (false, resampled);
        }
    }
}

/// Frequency of `d*_AF = n−1` on connected `G(n, p)` samples, failed node 0,
/// `k = ⌊k_fraction · n⌋`. Trial `i` at size `n` uses its own stream, so the
/// result does not depend on execution order.
pub fn mc_random_graph_experiment(
    n_list: &[usize],
    rule: ProbabilityRule,
    k_fraction: f64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<McRow>> {
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let k = (k_fraction * n as f64).floor() as usize;
        if n < 2 || k == 0 || k > n - 1 {
            return Err(Error::Params(format!("k = {k} is outside 1..=n-1 for n = {n}")));
        }
        let p = rule.p(n);
        if !(0.0..=1.0).contains(&p) || p == 0.0 {
            return Err(Error::Params(format!("edge probability {p} for n = {n}")));
        }
        let out = exec.map(trials, |i| mc_trial(n, p, k, seed, i));
        let hits = out.iter().filter(|o| o.0).count();
        let resampled = out.iter().map(|o| o.1).sum();
        rows.push(McRow { n, p, k, trials, hits, resampled, frequency: hits as f64 / trials.max(1) as f64 });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instance_structural_optimum() {
        let inst = LpInstance::new(5, 2, 6, vec![3, 2, 1, 1]).unwrap();
        let plan = solve_lp_structural(&inst);
        assert_eq!(plan.d, 2);
        assert_eq!(plan.objective, Rational64::from(12));
        assert_eq!(structural_objective(&inst, 3), Rational64::from(12));
        assert_eq!(structural_objective(&inst, 4), Rational64::from(14));
        assert!(inst.is_feasible(&plan.betas));
    }

    #[test]
    fn petersen_threshold() {
        let t = threshold_k(3, 2).unwrap();
        assert_eq!(t.bound, Rational64::new(5, 2));
        assert_eq!(t.min_k, 3);
        assert_eq!(threshold_k(5, 1).unwrap().min_k, 2);
    }
}
