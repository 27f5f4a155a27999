//! Repair over a connectivity graph: repair trees, bandwidth accounting for
//! accumulate-and-forward (AF) and intermediate-processing (IP) repair, and a
//! symbol-level simulation that moves helper data up a repair tree.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{derive_ip_matrices, nearest_first_ranks, Generators, IpMatrixSet, LinearRegeneratingCode};
use crate::error::{Error, Result};
use crate::gf::{add_vec, SymbolSpace};

/// A simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StorageGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl StorageGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut list = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Graph(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            if u == v {
                return Err(Error::Graph(format!("self loop at {u}")));
            }
            if adj[u].contains(&v) {
                return Err(Error::Graph(format!("repeated edge ({u}, {v})")));
            }
            adj[u].push(v);
            adj[v].push(u);
            list.push((u.min(v), u.max(v)));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(StorageGraph { n, edges: list, adj })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GraphJson = serde_json::from_str(text).map_err(|e| Error::Graph(e.to_string()))?;
        let edges: Vec<(usize, usize)> = g.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::new(g.n, &edges)
    }

    pub fn to_json(&self) -> String {
        let g = GraphJson { n: self.n, edges: self.edges.iter().map(|&(u, v)| [u, v]).collect() };
        serde_json::to_string(&g).expect("plain data serializes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Hop distances from `src`; `None` for unreachable vertices.
    pub fn distances(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        if src >= self.n {
            return dist;
        }
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued vertices have distances");
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.distances(0).iter().all(Option::is_some)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self::new(n, &edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Graph(format!("a cycle needs at least 3 vertices, got {n}")));
        }
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges)
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges).expect("path is simple")
    }

    pub fn star(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
        Self::new(n, &edges).expect("star is simple")
    }

    /// Outer 5-cycle, inner pentagram, spokes.
    pub fn petersen() -> Self {
        let mut edges = Vec::with_capacity(15);
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
            edges.push((i, 5 + i));
        }
        Self::new(10, &edges).expect("Petersen graph is simple")
    }

    /// Ball of radius `depth` around the root of the infinite `t`-regular tree:
    /// the root has `t` children, every other inner vertex `t−1`. Vertices are
    /// numbered in BFS order.
    pub fn tree_ball(t: usize, depth: usize) -> Result<Self> {
        if t < 2 {
            return Err(Error::Graph(format!("tree ball needs t >= 2, got {t}")));
        }
        let mut edges = Vec::new();
        let mut frontier = vec![0usize];
        let mut next_id = 1;
        for level in 0..depth {
            let mut next = Vec::new();
            for &u in &frontier {
                let kids = if level == 0 { t } else { t - 1 };
                for _ in 0..kids {
                    edges.push((u, next_id));
                    next.push(next_id);
                    next_id += 1;
                }
            }
            frontier = next;
        }
        Self::new(next_id, &edges)
    }

    /// `G(n, p)`, deterministic in `seed`.
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Self {
        Self::erdos_renyi_with(n, p, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn erdos_renyi_with<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        Self::new(n, &edges).expect("sampled graph is simple")
    }

    /// Product-matrix repair example: the failed node 0 with neighbors
    /// 1, 2, 6; node 1 relays for 3, 4, 5.
    pub fn fig3() -> Self {
        Self::new(7, &[(0, 1), (0, 2), (0, 6), (1, 3), (1, 4), (1, 5)]).expect("static graph")
    }

    /// Generalized product-matrix example: two relays with two leaves each.
    pub fn fig4() -> Self {
        Self::new(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]).expect("static graph")
    }

    /// Adversarial example: node 0 fails; 1 relays for 2 and 3, which relay
    /// for two leaves each; 8 and 9 are direct neighbors.
    pub fn fig5() -> Self {
        Self::new(10, &[(0, 1), (0, 8), (0, 9), (1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (3, 7)])
            .expect("static graph")
    }

    /// Parses `petersen`, `complete:N`, `cycle:N`, `path:N`, `star:N`,
    /// `tree:t=T,depth=H`, `er:n=N,p=P,seed=S`, `fig3`, `fig4`, `fig5`.
    pub fn from_name(spec: &str) -> Result<Self> {
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let count = |what: &str| -> Result<usize> {
            args.parse().map_err(|_| Error::Graph(format!("{what} needs a vertex count, got '{args}'")))
        };
        let kv = |key: &str| -> Result<&str> {
            args.split(',')
                .filter_map(|p| p.split_once('='))
                .find(|(k, _)| k.trim() == key)
                .map(|(_, v)| v.trim())
                .ok_or_else(|| Error::Graph(format!("'{spec}' is missing {key}=")))
        };
        let bad = |key: &str| Error::Graph(format!("bad value for {key} in '{spec}'"));
        match name {
            "petersen" => Ok(Self::petersen()),
            "fig3" => Ok(Self::fig3()),
            "fig4" => Ok(Self::fig4()),
            "fig5" => Ok(Self::fig5()),
            "complete" => Ok(Self::complete(count("complete")?)),
            "cycle" => Self::cycle(count("cycle")?),
            "path" => Ok(Self::path(count("path")?)),
            "star" => Ok(Self::star(count("star")?)),
            "tree" => Self::tree_ball(
                kv("t")?.parse().map_err(|_| bad("t"))?,
                kv("depth")?.parse().map_err(|_| bad("depth"))?,
            ),
            "er" => {
                let n = kv("n")?.parse().map_err(|_| bad("n"))?;
                let p: f64 = kv("p")?.parse().map_err(|_| bad("p"))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad("p"));
                }
                Ok(Self::erdos_renyi(n, p, kv("seed")?.parse().map_err(|_| bad("seed"))?))
            }
            _ => Err(Error::Graph(format!("unknown graph '{spec}'"))),
        }
    }
}

/// A tree rooted at the failed node, spanning the root and the helpers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairTree {
    root: usize,
    /// Helpers in BFS order: by depth, then by vertex index.
    helpers: Vec<usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    sigma: Vec<usize>,
}

impl RepairTree {
    /// Builds a tree from `(child, parent)` pairs over vertices `0..n`.
    pub fn from_parents(n: usize, root: usize, links: &[(usize, usize)]) -> Result<Self> {
        if root >= n {
            return Err(Error::NodeOutOfRange { index: root, n });
        }
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        for &(c, p) in links {
            if c >= n || p >= n {
                return Err(Error::Graph(format!("link ({c}, {p}) outside 0..{n}")));
            }
            if c == root || parent[c].is_some() {
                return Err(Error::Graph(format!("vertex {c} has two parents or is the root")));
            }
            parent[c] = Some(p);
            children[p].push(c);
        }
        for ch in &mut children {
            ch.sort_unstable();
        }
        let mut depth = vec![None; n];
        depth[root] = Some(0);
        let mut order = Vec::new();
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &c in &children[u] {
                depth[c] = Some(depth[u].expect("set") + 1);
                order.push(c);
                queue.push_back(c);
            }
        }
        if order.len() != links.len() {
            return Err(Error::Graph("links do not form a tree hanging from the root".into()));
        }
        order.sort_by_key(|&v| (depth[v], v));
        let mut sigma = vec![0usize; n];
        for &v in order.iter().rev() {
            if let Some(p) = parent[v] {
                sigma[p] += sigma[v] + 1;
            }
        }
        Ok(RepairTree { root, helpers: order, parent, depth, children, sigma })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn helpers(&self) -> &[usize] {
        &self.helpers
    }

    pub fn d(&self) -> usize {
        self.helpers.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent.get(v).copied().flatten()
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Hop distance to the root.
    pub fn rho(&self, v: usize) -> Option<usize> {
        self.depth.get(v).copied().flatten()
    }

    /// Number of descendants.
    pub fn sigma(&self, v: usize) -> usize {
        self.sigma[v]
    }

    pub fn contains(&self, v: usize) -> bool {
        self.rho(v).is_some()
    }

    pub fn height(&self) -> usize {
        self.helpers.iter().filter_map(|&v| self.rho(v)).max().unwrap_or(0)
    }

    /// `Γ_1, …, Γ_t`.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.height()];
        for &v in &self.helpers {
            out[self.rho(v).expect("helper in tree") - 1].push(v);
        }
        out
    }

    /// `d_1, …, d_t`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers().iter().map(Vec::len).collect()
    }

    /// Nodes whose subtree holds at least `d−k+1` further helpers. The set is
    /// closed under taking parents.
    pub fn j_set(&self, d: usize, k: usize) -> Vec<usize> {
        let r = d + 1 - k;
        self.helpers.iter().copied().filter(|&v| self.sigma[v] >= r).collect()
    }

    /// Nodes with at least `d−k+1` direct children.
    pub fn j_set_direct(&self, d: usize, k: usize) -> Vec<usize> {
        let r = d + 1 - k;
        self.helpers.iter().copied().filter(|&v| self.children[v].len() >= r).collect()
    }

    /// Nearest proper ancestor in `j`, or the root.
    pub fn nearest_j_ancestor(&self, v: usize, j: &[usize]) -> usize {
        let mut u = v;
        while let Some(p) = self.parent(u) {
            if j.contains(&p) {
                return p;
            }
            u = p;
        }
        self.root
    }

    fn subtree(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out
    }
}

/// BFS tree of the subgraph induced by `{f} ∪ D`, ties broken by vertex index.
pub fn build_repair_tree(g: &StorageGraph, f: usize, helpers: &[usize]) -> Result<RepairTree> {
    let n = g.n();
    if f >= n {
        return Err(Error::NodeOutOfRange { index: f, n });
    }
    let mut member = vec![false; n];
    member[f] = true;
    for &h in helpers {
        if h >= n {
            return Err(Error::NodeOutOfRange { index: h, n });
        }
        if h == f {
            return Err(Error::HelperIsFailed(h));
        }
        if member[h] {
            return Err(Error::Duplicate(h));
        }
        member[h] = true;
    }
    let mut seen = vec![false; n];
    seen[f] = true;
    let mut links = Vec::with_capacity(helpers.len());
    let mut queue = VecDeque::from([f]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if member[v] && !seen[v] {
                seen[v] = true;
                links.push((v, u));
                queue.push_back(v);
            }
        }
    }
    if let Some(&h) = helpers.iter().find(|&&h| !seen[h]) {
        return Err(Error::Unreachable(h));
    }
    RepairTree::from_parents(n, f, &links)
}

/// The `d` vertices nearest to `f` (BFS order, ties by index).
pub fn nearest_helpers(g: &StorageGraph, f: usize, d: usize) -> Result<Vec<usize>> {
    let dist = g.distances(f);
    let mut order: Vec<(usize, usize)> =
        dist.iter().enumerate().filter(|&(v, x)| v != f && x.is_some()).map(|(v, x)| (x.unwrap(), v)).collect();
    order.sort_unstable();
    if order.len() < d {
        return Err(Error::Disconnected);
    }
    Ok(order[..d].iter().map(|&(_, v)| v).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "af-u")]
    AfUniform,
    #[serde(rename = "ip-u")]
    IpUniform,
    #[serde(rename = "af-nu")]
    AfNonuniform,
    #[serde(rename = "ip-nu")]
    IpNonuniform,
}

impl Scheme {
    pub fn is_ip(self) -> bool {
        matches!(self, Scheme::IpUniform | Scheme::IpNonuniform)
    }

    pub fn is_uniform(self) -> bool {
        matches!(self, Scheme::AfUniform | Scheme::IpUniform)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::AfUniform => "af-u",
            Scheme::IpUniform => "ip-u",
            Scheme::AfNonuniform => "af-nu",
            Scheme::IpNonuniform => "ip-nu",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "af-u" => Ok(Scheme::AfUniform),
            "ip-u" => Ok(Scheme::IpUniform),
            "af-nu" => Ok(Scheme::AfNonuniform),
            "ip-nu" => Ok(Scheme::IpNonuniform),
            _ => Err(Error::Params(format!("unknown scheme '{s}'"))),
        }
    }
}

/// Symbols carried by the edge from `child` to `parent`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLoad {
    pub child: usize,
    pub parent: usize,
    pub symbols: Rational64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandwidthReport {
    pub scheme: Scheme,
    /// One entry per helper, in the tree's helper order.
    pub edges: Vec<EdgeLoad>,
    /// What each helper itself contributes, `(helper, symbols)`.
    pub downloads: Vec<(usize, Rational64)>,
    pub total: Rational64,
}

impl BandwidthReport {
    fn new(scheme: Scheme, edges: Vec<EdgeLoad>, downloads: Vec<(usize, Rational64)>) -> Self {
        let total = edges.iter().map(|e| e.symbols).sum();
        BandwidthReport { scheme, edges, downloads, total }
    }

    pub fn edge(&self, child: usize) -> Option<Rational64> {
        self.edges.iter().find(|e| e.child == child).map(|e| e.symbols)
    }
}

fn ratio(x: usize) -> Rational64 {
    Rational64::from_integer(x as i64)
}

fn check_tree_degree(tree: &RepairTree, d: usize, k: usize) -> Result<()> {
    if tree.d() != d {
        return Err(Error::Params(format!("tree has {} helpers, d = {d}", tree.d())));
    }
    if k == 0 || k > d {
        return Err(Error::Params(format!("need 1 <= k <= d, got k = {k}, d = {d}")));
    }
    Ok(())
}

/// Per-helper downloads `β_i` by layer for the edge accounting.
fn edge_report<F, G>(tree: &RepairTree, scheme: Scheme, beta_of: F, edge_of: G) -> BandwidthReport
where
    F: Fn(usize) -> Rational64,
    G: Fn(usize, Rational64) -> Rational64,
{
    let mut edges = Vec::with_capacity(tree.d());
    for &v in &tree.helpers {
        let raw: Rational64 = tree.subtree(v).into_iter().map(&beta_of).sum();
        edges.push(EdgeLoad { child: v, parent: tree.parent(v).expect("helper has parent"), symbols: edge_of(v, raw) });
    }
    let downloads = tree.helpers.iter().map(|&v| (v, beta_of(v))).collect();
    BandwidthReport::new(scheme, edges, downloads)
}

/// Every helper sends `β = l/(d−k+1)`; edges carry their subtree's symbols.
pub fn lambda_af_uniform(tree: &RepairTree, l: u64, d: usize, k: usize) -> Result<BandwidthReport> {
    check_tree_degree(tree, d, k)?;
    let beta = Rational64::new(l as i64, (d + 1 - k) as i64);
    Ok(edge_report(tree, Scheme::AfUniform, |_| beta, |_, raw| raw))
}

/// Uniform downloads with IP: the edge above `v` carries `min{σ(v)+1, d−k+1}·β`.
pub fn lambda_ip_uniform(tree: &RepairTree, l: u64, d: usize, k: usize) -> Result<BandwidthReport> {
    check_tree_degree(tree, d, k)?;
    let r = (d + 1 - k) as i64;
    let beta = Rational64::new(l as i64, r);
    Ok(edge_report(tree, Scheme::IpUniform, |_| beta, |v, _| beta * ratio(tree.sigma(v) + 1).min(Rational64::from(r))))
}

/// `Σ_h min{σ(h)+1, d−k+1}·l/(d−k+1)`, summed directly over helpers.
pub fn ip_tree_total(tree: &RepairTree, l: u64, d: usize, k: usize) -> Rational64 {
    let r = (d + 1 - k) as i64;
    tree.helpers.iter().map(|&h| Rational64::from((tree.sigma(h) as i64 + 1).min(r)) * Rational64::new(l as i64, r)).sum()
}

/// Downloads per layer, nonincreasing with depth, with `Δ_{d−k+1}(B) = l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonuniformPlan {
    pub layer_sizes: Vec<usize>,
    pub l: u64,
    pub k: usize,
    /// `β_1 ≥ … ≥ β_t`.
    pub betas: Vec<Rational64>,
}

impl NonuniformPlan {
    pub fn new(layer_sizes: Vec<usize>, l: u64, k: usize, betas: Vec<Rational64>) -> Result<Self> {
        let plan = NonuniformPlan { layer_sizes, l, k, betas };
        plan.check()?;
        Ok(plan)
    }

    /// `β_i = l/(d−k+1)` in every layer.
    pub fn uniform(layer_sizes: Vec<usize>, l: u64, k: usize) -> Result<Self> {
        let d: usize = layer_sizes.iter().sum();
        if k == 0 || k > d {
            return Err(Error::InfeasiblePlan(format!("k = {k}, d = {d}")));
        }
        let beta = Rational64::new(l as i64, (d + 1 - k) as i64);
        let t = layer_sizes.len();
        Self::new(layer_sizes, l, k, vec![beta; t])
    }

    /// The last layer sends `β − δ_a`, all others `β + d_a δ_a/(d−k+1−d_a)`.
    pub fn two_level(layer_sizes: Vec<usize>, l: u64, k: usize, delta_a: Rational64) -> Result<Self> {
        let d: usize = layer_sizes.iter().sum();
        let t = layer_sizes.len();
        if t < 2 || k == 0 || k > d {
            return Err(Error::InfeasiblePlan("need at least two layers and 1 <= k <= d".into()));
        }
        let r = (d + 1 - k) as i64;
        let da = layer_sizes[t - 1] as i64;
        if da >= r {
            return Err(Error::InfeasiblePlan(format!("last layer has {da} >= d-k+1 = {r} nodes")));
        }
        let beta = Rational64::new(l as i64, r);
        let up = Rational64::from(da) * delta_a / Rational64::from(r - da);
        let mut betas = vec![beta + up; t];
        betas[t - 1] = beta - delta_a;
        Self::new(layer_sizes, l, k, betas)
    }

    pub fn d(&self) -> usize {
        self.layer_sizes.iter().sum()
    }

    pub fn beta(&self) -> Rational64 {
        Rational64::new(self.l as i64, (self.d() + 1 - self.k) as i64)
    }

    /// `δ_i = β − β_i`.
    pub fn deltas(&self) -> Vec<Rational64> {
        let b = self.beta();
        self.betas.iter().map(|&x| b - x).collect()
    }

    /// `t′ = max{s : Σ_{i=s}^t d_i ≥ d−k+1}`, 1-based.
    pub fn t_prime(&self) -> usize {
        let r = self.d() + 1 - self.k;
        let mut acc = 0;
        for s in (1..=self.layer_sizes.len()).rev() {
            acc += self.layer_sizes[s - 1];
            if acc >= r {
                return s;
            }
        }
        unreachable!("all layers together hold d >= d-k+1 nodes")
    }

    /// Left side of the feasibility identity in deficits; zero for feasible plans.
    pub fn deficit_residual(&self) -> Rational64 {
        let r = (self.d() + 1 - self.k) as i64;
        let tp = self.t_prime();
        let del = self.deltas();
        let below: usize = self.layer_sizes[tp..].iter().sum();
        let mut acc: Rational64 = (tp..self.layer_sizes.len()).map(|i| ratio(self.layer_sizes[i]) * del[i]).sum();
        acc += Rational64::from(r - below as i64) * del[tp - 1];
        acc
    }

    /// `Δ_{d−k+1}` of the multiset with `β_i` repeated `d_i` times.
    pub fn delta_smallest(&self) -> Rational64 {
        let mut all: Vec<Rational64> =
            self.layer_sizes.iter().zip(&self.betas).flat_map(|(&n, &b)| std::iter::repeat_n(b, n)).collect();
        all.sort();
        all[..self.d() + 1 - self.k].iter().sum()
    }

    /// Caps layers above `t′` at `β_{t′}`: those helpers never need more.
    pub fn tightened(&self) -> Self {
        let tp = self.t_prime();
        let cap = self.betas[tp - 1];
        let mut p = self.clone();
        for b in &mut p.betas[..tp - 1] {
            *b = (*b).min(cap);
        }
        p
    }

    /// All downloads as a list aligned with ranks `1..=d` (smallest first).
    pub fn sorted_downloads(&self) -> Vec<Rational64> {
        let mut all: Vec<Rational64> =
            self.layer_sizes.iter().zip(&self.betas).flat_map(|(&n, &b)| std::iter::repeat_n(b, n)).collect();
        all.sort();
        all
    }

    fn check(&self) -> Result<()> {
        let d = self.d();
        if self.layer_sizes.is_empty() || self.layer_sizes.contains(&0) {
            return Err(Error::InfeasiblePlan("layers must be nonempty".into()));
        }
        if self.betas.len() != self.layer_sizes.len() {
            return Err(Error::InfeasiblePlan(format!("{} downloads for {} layers", self.betas.len(), self.layer_sizes.len())));
        }
        if self.k == 0 || self.k > d {
            return Err(Error::InfeasiblePlan(format!("k = {}, d = {d}", self.k)));
        }
        if self.betas.iter().any(|b| *b < Rational64::from(0)) {
            return Err(Error::InfeasiblePlan("negative download".into()));
        }
        if self.betas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InfeasiblePlan("downloads must not increase with depth".into()));
        }
        let got = self.delta_smallest();
        if got != Rational64::from(self.l as i64) {
            return Err(Error::InfeasiblePlan(format!("the d-k+1 smallest downloads sum to {got}, l = {}", self.l)));
        }
        Ok(())
    }
}

fn check_plan(tree: &RepairTree, plan: &NonuniformPlan) -> Result<()> {
    if tree.layer_sizes() != plan.layer_sizes {
        return Err(Error::InfeasiblePlan(format!(
            "plan layers {:?} do not match tree layers {:?}",
            plan.layer_sizes,
            tree.layer_sizes()
        )));
    }
    plan.check()
}

fn layer_beta(tree: &RepairTree, plan: &NonuniformPlan, v: usize) -> Rational64 {
    plan.betas[tree.rho(v).expect("helper in tree") - 1]
}

/// Per-layer downloads relayed unchanged: `Σ_i i·d_i·β_i`.
pub fn lambda_af_nonuniform(tree: &RepairTree, plan: &NonuniformPlan) -> Result<BandwidthReport> {
    check_plan(tree, plan)?;
    Ok(edge_report(tree, Scheme::AfNonuniform, |v| layer_beta(tree, plan, v), |_, raw| raw))
}

/// Per-layer downloads with IP at the nodes of [`RepairTree::j_set`], which
/// emit `l`; other nodes forward their subtree's symbols. With `greedy`, any
/// node whose subtree already holds at least `l` symbols also emits `l`.
pub fn lambda_ip_nonuniform(tree: &RepairTree, plan: &NonuniformPlan, greedy: bool) -> Result<BandwidthReport> {
    check_plan(tree, plan)?;
    let j = tree.j_set(plan.d(), plan.k);
    let l = Rational64::from(plan.l as i64);
    Ok(edge_report(
        tree,
        Scheme::IpNonuniform,
        |v| layer_beta(tree, plan, v),
        |v, raw| if j.contains(&v) || (greedy && raw >= l) { l } else { raw },
    ))
}

/// `Σ_{i∈J} l + Σ_{j∉J} ρ(j, P(j)) β_{layer(j)}`, summed over nodes.
pub fn nonuniform_ip_closed_form(tree: &RepairTree, plan: &NonuniformPlan) -> Rational64 {
    let j = tree.j_set(plan.d(), plan.k);
    let l = Rational64::from(plan.l as i64);
    tree.helpers
        .iter()
        .map(|&v| {
            if j.contains(&v) {
                l
            } else {
                let p = tree.nearest_j_ancestor(v, &j);
                let hops = tree.rho(v).unwrap() - tree.rho(p).unwrap();
                ratio(hops) * layer_beta(tree, plan, v)
            }
        })
        .sum()
}

/// `Σ_{j∉J} ρ(j, P(j)) δ_{layer(j)}`: the saving of a plan over uniform downloads under IP.
pub fn nonuniform_ip_savings(tree: &RepairTree, plan: &NonuniformPlan) -> Rational64 {
    let j = tree.j_set(plan.d(), plan.k);
    let del = plan.deltas();
    tree.helpers
        .iter()
        .filter(|v| !j.contains(v))
        .map(|&v| {
            let p = tree.nearest_j_ancestor(v, &j);
            ratio(tree.rho(v).unwrap() - tree.rho(p).unwrap()) * del[tree.rho(v).unwrap() - 1]
        })
        .sum()
}

/// AF saving of the two-level plan on layers `d_1..d_a`:
/// `d_a δ_a/(d−k+1−d_a) · (Σ_{i<a} (a−i) d_i − a(k−1))`.
pub fn two_level_af_savings(layer_sizes: &[usize], k: usize, delta_a: Rational64) -> Rational64 {
    let a = layer_sizes.len();
    let d: usize = layer_sizes.iter().sum();
    let da = layer_sizes[a - 1] as i64;
    let coeff = Rational64::from(da) * delta_a / Rational64::from((d + 1 - k) as i64 - da);
    let inner: i64 = (1..a).map(|i| ((a - i) * layer_sizes[i - 1]) as i64).sum::<i64>() - (a * (k - 1)) as i64;
    coeff * Rational64::from(inner)
}

/// Ranks for a repair over `tree`: helpers in BFS order get `d, d−1, …, 1`.
pub fn tree_ranks(tree: &RepairTree) -> Vec<usize> {
    nearest_first_ranks(tree.d())
}

/// A symbol-level repair with the bandwidth it used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulatedRepair<T> {
    pub content: Vec<T>,
    pub report: BandwidthReport,
}

enum Packet<T> {
    Raw(Vec<(usize, Vec<T>)>),
    Combined(Vec<T>),
}

/// Moves helper data up `tree`, leaves first. Under an IP scheme the nodes of
/// [`RepairTree::j_set`] (and, with `greedy`, any node already holding at
/// least `l` symbols) replace what they hold by its `l`-symbol combination.
/// Helpers compute their symbols from `contents`, which may be corrupted.
pub fn simulate_repair<S: SymbolSpace>(
    space: &S,
    tree: &RepairTree,
    ip: &IpMatrixSet,
    contents: &[Vec<S::Sym>],
    scheme: Scheme,
    k: usize,
    greedy: bool,
) -> Result<SimulatedRepair<S::Sym>> {
    let d = tree.d();
    let mut expect = tree.helpers.clone();
    let mut given = ip.helpers.clone();
    expect.sort_unstable();
    given.sort_unstable();
    if expect != given || ip.f != tree.root {
        return Err(Error::Params("combining matrices were derived for another repair".into()));
    }
    if k == 0 || k > d {
        return Err(Error::Params(format!("need 1 <= k <= d, got k = {k}, d = {d}")));
    }
    let l = ip.blocks.first().map_or(0, |b| b.rows());
    let j = tree.j_set(d, k);
    let mut packets: Vec<Option<Packet<S::Sym>>> = (0..contents.len()).map(|_| None).collect();
    let mut edges = Vec::with_capacity(d);
    let mut downloads = Vec::with_capacity(d);
    let merge = |held: Packet<S::Sym>, into: &mut Packet<S::Sym>| -> Result<()> {
        match (into, held) {
            (Packet::Raw(a), Packet::Raw(b)) => a.extend(b),
            (Packet::Combined(a), Packet::Combined(b)) => *a = add_vec(space, a, &b),
            (Packet::Combined(a), Packet::Raw(b)) => *a = add_vec(space, a, &ip.combine(space, &b)?),
            (into @ Packet::Raw(_), Packet::Combined(b)) => {
                let Packet::Raw(a) = std::mem::replace(into, Packet::Combined(b)) else { unreachable!() };
                let Packet::Combined(c) = into else { unreachable!() };
                *c = add_vec(space, c, &ip.combine(space, &a)?);
            }
        }
        Ok(())
    };
    for &v in tree.helpers.iter().rev() {
        let own = ip.helper_symbols(space, v, &contents[v])?;
        downloads.push((v, ratio(own.len())));
        let mut packet = Packet::Raw(vec![(v, own)]);
        for &c in tree.children(v) {
            let held = packets[c].take().expect("children are processed first");
            merge(held, &mut packet)?;
        }
        let count = |p: &Packet<S::Sym>| match p {
            Packet::Raw(list) => list.iter().map(|(_, s)| s.len()).sum::<usize>(),
            Packet::Combined(_) => l,
        };
        if scheme.is_ip() && (j.contains(&v) || (greedy && count(&packet) >= l)) {
            if let Packet::Raw(list) = &packet {
                packet = Packet::Combined(ip.combine(space, list)?);
            }
        }
        let parent = tree.parent(v).expect("helper has parent");
        edges.push(EdgeLoad { child: v, parent, symbols: ratio(count(&packet)) });
        packets[v] = Some(packet);
    }
    let mut at_root = Packet::Combined(vec![space.zero_sym(); l]);
    for &c in tree.children(tree.root) {
        let held = packets[c].take().expect("root children processed");
        merge(held, &mut at_root)?;
    }
    let Packet::Combined(content) = at_root else { unreachable!("root starts combined") };
    edges.reverse();
    downloads.reverse();
    Ok(SimulatedRepair { content, report: BandwidthReport::new(scheme, edges, downloads) })
}

/// Repairs `f` on graph `g` from helpers `helpers` with any linear code, using
/// the BFS repair tree and nearest-first ranks.
pub fn simulate_code_repair<C: LinearRegeneratingCode + ?Sized>(
    g: &StorageGraph,
    code: &C,
    gens: &Generators,
    cw: &[Vec<u32>],
    f: usize,
    helpers: &[usize],
    scheme: Scheme,
) -> Result<SimulatedRepair<u32>> {
    if code.n() != g.n() {
        return Err(Error::Graph(format!("code length {} does not match {} vertices", code.n(), g.n())));
    }
    if helpers.len() != code.d() {
        return Err(Error::Params(format!("{} helpers, d = {}", helpers.len(), code.d())));
    }
    let tree = build_repair_tree(g, f, helpers)?;
    let ip = derive_ip_matrices(code, gens, f, tree.helpers(), &tree_ranks(&tree))?;
    simulate_repair(code.field(), &tree, &ip, cw, scheme, code.k(), false)
}
