//! Repair in the presence of helpers whose stored data has been altered.
//!
//! Systematic nodes hold Gabidulin codewords over `F_{q^m}`; the inner
//! regenerating code is `F_q`-linear, so IP repair acts on the tower symbols
//! coordinate-wise and an altered helper adds an error of `F_q`-rank at most
//! its download size.

use std::sync::Arc;

use num_rational::Rational64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{cutset_bound, omega_r, CodeParams};
use crate::codes::{derive_ip_matrices, reconstruct, Codeword, Generators, IpMatrixSet, LinearRegeneratingCode, SystematicCode};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gf::{ExtField, Field, FieldOps, Matrix, TowerElement};
use crate::graphrepair::{
    build_repair_tree, lambda_af_uniform, nearest_helpers, simulate_repair, tree_ranks, BandwidthReport, RepairTree, Scheme,
    StorageGraph,
};
use crate::stacking::StackedCode;

/// `[N, K, N−K+1]` Gabidulin code over `F_{q^m}`.
#[derive(Clone, Debug)]
pub struct GabidulinCode {
    ext: ExtField,
    n: usize,
    k: usize,
    points: Vec<TowerElement>,
}

impl GabidulinCode {
    /// Evaluation points `1, γ, …, γ^{N−1}`.
    pub fn new(base: &Field, m: usize, n: usize, k: usize) -> Result<Self> {
        let ext = ExtField::new(base, m)?;
        if n > m {
            return Err(Error::Params(format!("need N <= m, got N = {n}, m = {m}")));
        }
        let points = (0..n).map(|j| ext.basis(j)).collect();
        Self::with_points(ext, points, k)
    }

    pub fn with_points(ext: ExtField, points: Vec<TowerElement>, k: usize) -> Result<Self> {
        let n = points.len();
        if k == 0 || k > n {
            return Err(Error::Params(format!("need 1 <= K <= N, got K = {k}, N = {n}")));
        }
        if ext.rank_over_base(&points) != n {
            return Err(Error::Params("evaluation points are dependent over the base field".into()));
        }
        Ok(GabidulinCode { ext, n, k, points })
    }

    pub fn ext(&self) -> &ExtField {
        &self.ext
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn min_distance(&self) -> usize {
        self.n - self.k + 1
    }

    /// Rank errors corrected: `⌊(N−K)/2⌋`.
    pub fn radius(&self) -> usize {
        (self.n - self.k) / 2
    }

    pub fn points(&self) -> &[TowerElement] {
        &self.points
    }

    /// `(f(g_1), …, f(g_N))` with `f(x) = Σ f_i x^{q^i}`.
    pub fn encode(&self, message: &[TowerElement]) -> Result<Vec<TowerElement>> {
        if message.len() != self.k {
            return Err(Error::Length { expected: self.k, got: message.len() });
        }
        Ok(self.points.iter().map(|g| self.ext.linearized_eval(message, g)).collect())
    }

    /// Rank distance between two words.
    pub fn rank_distance(&self, a: &[TowerElement], b: &[TowerElement]) -> usize {
        let diff: Vec<TowerElement> = a.iter().zip(b).map(|(x, y)| self.ext.sub(x, y)).collect();
        self.ext.rank_over_base(&diff)
    }

    /// Interpolation decoder: finds `V` of q-degree `≤ τ` and `Q` of q-degree
    /// `≤ K+τ−1` with `V(y_i) = Q(g_i)`, then divides `Q = V∘f` on the left.
    pub fn decode(&self, received: &[TowerElement]) -> Result<Vec<TowerElement>> {
        if received.len() != self.n {
            return Err(Error::Length { expected: self.n, got: received.len() });
        }
        let e = &self.ext;
        let tau = self.radius();
        let (vn, qn) = (tau + 1, self.k + tau);
        let mut data = Vec::with_capacity(self.n * (vn + qn));
        for (y, g) in received.iter().zip(&self.points) {
            let mut p = y.clone();
            for a in 0..vn {
                if a > 0 {
                    p = e.frobenius(&p);
                }
                data.push(p.clone());
            }
            let mut p = g.clone();
            for b in 0..qn {
                if b > 0 {
                    p = e.frobenius(&p);
                }
                data.push(e.neg(&p));
            }
        }
        let sys = Matrix::from_vec(self.n, vn + qn, data);
        let sol = sys.kernel(e).into_iter().next().ok_or(Error::DecodeFailure)?;
        let (v, q) = sol.split_at(vn);
        let top = (0..vn).rev().find(|&i| !e.is_zero(&v[i])).ok_or(Error::DecodeFailure)?;
        let lead_inv = e.inv(&v[top]).expect("nonzero");
        let mut f = vec![e.zero(); self.k];
        for j in (0..self.k).rev() {
            // coefficient of x^{q^{top+j}} in V∘f
            let mut acc = q[top + j].clone();
            for (i, vi) in v.iter().enumerate().take(top) {
                let idx = top + j - i;
                if idx < self.k {
                    acc = e.sub(&acc, &e.mul(vi, &e.frobenius_pow(&f[idx], i)));
                }
            }
            let root = e.mul(&acc, &lead_inv);
            f[j] = e.frobenius_pow(&root, e.degree() - top % e.degree());
        }
        if compose(e, v, &f)[..] != q[..] {
            return Err(Error::DecodeFailure);
        }
        let c = self.encode(&f)?;
        if self.rank_distance(&c, received) > tau {
            return Err(Error::DecodeFailure);
        }
        Ok(f)
    }

    /// Every message, for tiny codes.
    pub fn all_messages(&self) -> Result<Vec<Vec<TowerElement>>> {
        let q = self.ext.base().order() as u64;
        let digits = self.k * self.ext.degree();
        let total = (q as f64).powi(digits as i32);
        if total > (1u64 << 20) as f64 {
            return Err(Error::ScaleTooLarge(format!("{total} codewords")));
        }
        let m = self.ext.degree();
        Ok((0..total as u64)
            .map(|mut x| {
                (0..self.k)
                    .map(|_| {
                        let coords: Vec<u32> = (0..m)
                            .map(|_| {
                                let c = (x % q) as u32;
                                x /= q;
                                c
                            })
                            .collect();
                        self.ext.recombine(&coords).expect("digits below q")
                    })
                    .collect()
            })
            .collect())
    }

    /// Nearest codeword in rank distance by enumeration; `None` on a tie.
    pub fn decode_bruteforce(&self, received: &[TowerElement]) -> Result<Option<Vec<TowerElement>>> {
        let mut best: Option<(usize, Vec<TowerElement>)> = None;
        let mut tie = false;
        for msg in self.all_messages()? {
            let dist = self.rank_distance(&self.encode(&msg)?, received);
            match &best {
                Some((b, _)) if dist > *b => {}
                Some((b, _)) if dist == *b => tie = true,
                _ => {
                    best = Some((dist, msg));
                    tie = false;
                }
            }
        }
        Ok(if tie { None } else { best.map(|b| b.1) })
    }
}

/// Coefficients of `V∘f`.
fn compose(e: &ExtField, v: &[TowerElement], f: &[TowerElement]) -> Vec<TowerElement> {
    let mut out = vec![e.zero(); v.len() + f.len() - 1];
    for (i, vi) in v.iter().enumerate() {
        if e.is_zero(vi) {
            continue;
        }
        for (j, fj) in f.iter().enumerate() {
            out[i + j] = e.add(&out[i + j], &e.mul(vi, &e.frobenius_pow(fj, i)));
        }
    }
    out
}

/// A Gabidulin code over `F_{q^m}` concatenated with a systematic `F_q`-linear
/// regenerating code of node size `N`. Node `i` stores `N` tower symbols, i.e.
/// the `m` rows `(C_j)_i` of the inner codewords.
#[derive(Clone)]
pub struct ConcatCode {
    outer: GabidulinCode,
    inner: Arc<SystematicCode>,
    gens: Generators,
}

impl ConcatCode {
    pub fn new(outer: GabidulinCode, inner: Arc<dyn LinearRegeneratingCode>) -> Result<Self> {
        if inner.node_size() != outer.len() {
            return Err(Error::Params(format!("inner node size {} differs from N = {}", inner.node_size(), outer.len())));
        }
        if inner.field() != outer.ext().base() {
            return Err(Error::Params("inner code is not over the base field".into()));
        }
        let inner = Arc::new(SystematicCode::new(inner)?);
        let gens = Generators::of(inner.as_ref())?;
        Ok(ConcatCode { outer, inner, gens })
    }

    /// `[25, 15]` Gabidulin over `GF(256)^25` with the stacked `[10, 5, 9]`
    /// code, `β = 5` from every helper, `l = 25`.
    pub fn fig5() -> Result<Self> {
        let base = Field::gf256();
        let outer = GabidulinCode::new(&base, 25, 25, 15)?;
        let inner = StackedCode::build(&base, 10, 5, 9, &[5; 9])?;
        Self::new(outer, Arc::new(inner))
    }

    pub fn outer(&self) -> &GabidulinCode {
        &self.outer
    }

    pub fn inner(&self) -> &SystematicCode {
        &self.inner
    }

    pub fn generators(&self) -> &Generators {
        &self.gens
    }

    pub fn systematic_nodes(&self) -> Vec<usize> {
        self.inner.systematic_nodes()
    }

    /// `K·k·m` base symbols.
    pub fn file_size(&self) -> usize {
        self.outer.dim() * self.inner.k() * self.outer.ext().degree()
    }

    /// `Kk / (Nn)`.
    pub fn rate(&self) -> Rational64 {
        Rational64::new((self.outer.dim() * self.inner.k()) as i64, (self.outer.len() * self.inner.n()) as i64)
    }

    /// Parameters counted in base symbols; the file is smaller than the cutset allows when `K < N`.
    pub fn params(&self) -> CodeParams {
        let m = self.outer.ext().degree() as u64;
        let p = self.inner.params();
        CodeParams {
            l: p.l * m,
            betas: p.betas.iter().map(|b| b * m).collect(),
            m: self.file_size() as u64,
            ..p
        }
    }

    /// Whether the file size equals the cutset bound.
    pub fn meets_cutset(&self) -> bool {
        let p = self.params();
        cutset_bound(&p).rhs == p.m
    }

    fn blocks(&self, file: &[u32]) -> Result<Vec<Vec<TowerElement>>> {
        if file.len() != self.file_size() {
            return Err(Error::Length { expected: self.file_size(), got: file.len() });
        }
        let m = self.outer.ext().degree();
        let elems: Vec<TowerElement> = file.chunks(m).map(|c| self.outer.ext().recombine(c)).collect::<Result<_>>()?;
        Ok(elems.chunks(self.outer.dim()).map(<[TowerElement]>::to_vec).collect())
    }

    pub fn encode(&self, file: &[u32]) -> Result<Codeword<TowerElement>> {
        let mut rows = Vec::with_capacity(self.inner.k() * self.outer.len());
        for block in self.blocks(file)? {
            rows.extend(self.outer.encode(&block)?);
        }
        self.gens.encode_symbols(self.outer.ext(), &rows)
    }

    /// Row `j` of node `i`'s `m × N` base-field array.
    pub fn node_rows(&self, content: &[TowerElement]) -> Vec<Vec<u32>> {
        let m = self.outer.ext().degree();
        (0..m).map(|j| content.iter().map(|x| x.coords()[j]).collect()).collect()
    }

    /// Recovers the file from `k` nodes. Systematic nodes decode their own
    /// Gabidulin word; otherwise the inner code is inverted coordinate-wise.
    pub fn reconstruct(&self, nodes: &[(usize, Vec<TowerElement>)]) -> Result<Vec<u32>> {
        let k = self.inner.k();
        let all_systematic = nodes.len() == k && nodes.iter().all(|(i, _)| *i < k);
        let ext = self.outer.ext();
        let rows: Vec<Vec<TowerElement>> = if all_systematic {
            let mut sorted = nodes.to_vec();
            sorted.sort_by_key(|(i, _)| *i);
            sorted.windows(2).try_for_each(|w| if w[0].0 == w[1].0 { Err(Error::Duplicate(w[0].0)) } else { Ok(()) })?;
            sorted.into_iter().map(|(_, c)| c).collect()
        } else {
            let n_len = self.outer.len();
            let m = ext.degree();
            let mut coords = vec![vec![0u32; m]; k * n_len];
            for j in 0..m {
                let slice: Vec<(usize, Vec<u32>)> =
                    nodes.iter().map(|(i, c)| (*i, c.iter().map(|x| x.coords()[j]).collect())).collect();
                let file = reconstruct(self.inner.as_ref(), &self.gens, &slice)?;
                for (dst, v) in coords.iter_mut().zip(file) {
                    dst[j] = v;
                }
            }
            let elems: Vec<TowerElement> = coords.iter().map(|c| ext.recombine(c)).collect::<Result<_>>()?;
            elems.chunks(n_len).map(<[TowerElement]>::to_vec).collect()
        };
        let mut out = Vec::with_capacity(self.file_size());
        for row in rows {
            for x in self.outer.decode(&row)? {
                out.extend_from_slice(x.coords());
            }
        }
        Ok(out)
    }

    /// Base symbols downloaded to retrieve the file from `nodes`: `kKm` when
    /// they are the systematic nodes, `kNm` otherwise.
    pub fn retrieval_cost(&self, nodes: &[usize]) -> usize {
        let k = self.inner.k();
        let m = self.outer.ext().degree();
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        if sorted == (0..k).collect::<Vec<_>>() {
            k * self.outer.dim() * m
        } else {
            k * self.outer.len() * m
        }
    }

    /// Tree and combining matrices for repairing `f` from `helpers` on `g`.
    pub fn repair_setup(&self, g: &StorageGraph, f: usize, helpers: &[usize]) -> Result<RepairSetup> {
        if g.n() != self.inner.n() {
            return Err(Error::Graph(format!("code length {} does not match {} vertices", self.inner.n(), g.n())));
        }
        if f >= self.inner.k() {
            return Err(Error::Params(format!("node {f} is not systematic")));
        }
        let tree = build_repair_tree(g, f, helpers)?;
        let ranks = tree_ranks(&tree);
        let ip = derive_ip_matrices(self.inner.as_ref(), &self.gens, f, tree.helpers(), &ranks)?;
        Ok(RepairSetup { tree, ip })
    }
}

#[derive(Clone, Debug)]
pub struct RepairSetup {
    pub tree: RepairTree,
    pub ip: IpMatrixSet,
}

/// Helpers in `T` have `Z_h` added to their stored content. Everything they
/// compute from it is done faithfully.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversaryModel {
    pub t: usize,
    pub corruptions: Vec<(usize, Vec<TowerElement>)>,
}

impl AdversaryModel {
    pub fn new(t: usize, corruptions: Vec<(usize, Vec<TowerElement>)>) -> Result<Self> {
        if corruptions.len() > t {
            return Err(Error::Params(format!("{} corrupted nodes exceed t = {t}", corruptions.len())));
        }
        let mut seen: Vec<usize> = corruptions.iter().map(|c| c.0).collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Duplicate(w[0]));
        }
        Ok(AdversaryModel { t, corruptions })
    }

    pub fn none() -> Self {
        AdversaryModel { t: 0, corruptions: Vec::new() }
    }

    /// `t` distinct nodes from `candidates`, each with a uniform nonzero `l`-vector.
    pub fn random<R: Rng + ?Sized>(ext: &ExtField, l: usize, t: usize, candidates: &[usize], rng: &mut R) -> Result<Self> {
        if t > candidates.len() {
            return Err(Error::Params(format!("cannot corrupt {t} of {} helpers", candidates.len())));
        }
        let mut corruptions = Vec::with_capacity(t);
        for i in sample(rng, candidates.len(), t).into_iter() {
            let z = loop {
                let z: Vec<TowerElement> = (0..l).map(|_| ext.random(rng)).collect();
                if z.iter().any(|x| !ext.is_zero(x)) {
                    break z;
                }
            };
            corruptions.push((candidates[i], z));
        }
        Ok(AdversaryModel { t, corruptions })
    }

    pub fn corrupted(&self) -> Vec<usize> {
        self.corruptions.iter().map(|c| c.0).collect()
    }

    pub fn apply(&self, ext: &ExtField, cw: &[Vec<TowerElement>]) -> Result<Codeword<TowerElement>> {
        let mut out = cw.to_vec();
        for (h, z) in &self.corruptions {
            let node = out.get_mut(*h).ok_or(Error::NodeOutOfRange { index: *h, n: cw.len() })?;
            if z.len() != node.len() {
                return Err(Error::Length { expected: node.len(), got: z.len() });
            }
            *node = node.iter().zip(z).map(|(a, b)| ext.add(a, b)).collect();
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversarialRepair {
    pub content: Vec<TowerElement>,
    pub report: BandwidthReport,
    /// `F_q`-rank of the error in the combined word (measured against the true content).
    pub error_rank: usize,
    /// `Σ_{h∈T} β_{τ(h)}`.
    pub rank_budget: usize,
    pub omega: u64,
}

/// Runs the repair of systematic node `setup.ip.f` on corrupted data and
/// corrects the result with the outer code.
pub fn adversarial_repair(
    code: &ConcatCode,
    setup: &RepairSetup,
    cw: &[Vec<TowerElement>],
    adv: &AdversaryModel,
    scheme: Scheme,
) -> Result<AdversarialRepair> {
    let f = setup.ip.f;
    let mut betas: Vec<u64> = code.inner.betas().iter().map(|&b| b as u64).collect();
    betas.sort_unstable();
    let omega = omega_r(&betas, adv.t)?;
    let slack = code.outer.len() - code.outer.dim();
    if (slack as u64) < 2 * omega {
        return Err(Error::RadiusExceeded { slack, omega });
    }
    let mut rank_budget = 0;
    for h in adv.corrupted() {
        if h == f {
            return Err(Error::HelperIsFailed(h));
        }
        rank_budget += setup.ip.beta_of(h)?;
    }
    let ext = code.outer.ext();
    let stored = adv.apply(ext, cw)?;
    let sim = simulate_repair(ext, &setup.tree, &setup.ip, &stored, scheme, code.inner.k(), false)?;
    let error_rank = code.outer.rank_distance(&sim.content, &cw[f]);
    let message = code.outer.decode(&sim.content)?;
    let content = code.outer.encode(&message)?;
    Ok(AdversarialRepair { content, report: sim.report, error_rank, rank_budget, omega })
}

/// AF repair contacting `d + 2t` nearest helpers, each sending `β = l/(d−k+1)`.
pub fn af_with_extra_helpers_baseline(g: &StorageGraph, f: usize, k: usize, d: usize, l: u64, t: usize) -> Result<BandwidthReport> {
    if k == 0 || k > d {
        return Err(Error::Params(format!("need 1 <= k <= d, got k = {k}, d = {d}")));
    }
    let want = d + 2 * t;
    if want + 1 > g.n() {
        return Err(Error::Params(format!("{want} helpers needed, graph has {} other nodes", g.n().saturating_sub(1))));
    }
    let tree = build_repair_tree(g, f, &nearest_helpers(g, f, want)?)?;
    // d+2t helpers and k+2t keep β = l/(d−k+1)
    lambda_af_uniform(&tree, l, want, k + 2 * t)
}

/// One logged adversarial repair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialLog {
    pub trial: usize,
    pub seed: u64,
    pub corrupted: Vec<usize>,
    pub error_rank: usize,
    pub rank_budget: usize,
    pub success: bool,
    pub total: String,
}

/// Random files and adversaries; trial `i` draws from stream `i` of `seed`.
pub fn adversarial_trials(
    code: &ConcatCode,
    setup: &RepairSetup,
    t: usize,
    scheme: Scheme,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<TrialLog>> {
    let base = code.outer.ext().base().clone();
    let helpers = setup.tree.helpers().to_vec();
    let l = code.outer.len();
    let out = exec.map(trials, |trial| -> Result<TrialLog> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let file: Vec<u32> = (0..code.file_size()).map(|_| base.random(&mut rng)).collect();
        let cw = code.encode(&file)?;
        let adv = AdversaryModel::random(code.outer.ext(), l, t, &helpers, &mut rng)?;
        let f = setup.ip.f;
        let rep = adversarial_repair(code, setup, &cw, &adv, scheme)?;
        Ok(TrialLog {
            trial,
            seed,
            corrupted: adv.corrupted(),
            error_rank: rep.error_rank,
            rank_budget: rep.rank_budget,
            success: rep.content == cw[f],
            total: rep.report.total.to_string(),
        })
    });
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_code_shape() {
        let c = GabidulinCode::new(&Field::gf2(), 3, 3, 1).unwrap();
        assert_eq!((c.min_distance(), c.radius()), (3, 1));
        assert!(GabidulinCode::new(&Field::gf2(), 3, 4, 1).is_err());
        assert!(GabidulinCode::new(&Field::gf2(), 3, 3, 0).is_err());
    }

    #[test]
    fn composition_with_identity() {
        let e = ExtField::new(&Field::gf2(), 4).unwrap();
        let f = vec![e.gamma(), e.one()];
        assert_eq!(compose(&e, &[e.one()], &f), f);
    }
}
