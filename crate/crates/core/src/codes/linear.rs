use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bounds::CodeParams;
use crate::error::{Error, Result};
use crate::gf::{apply, Field, FieldOps, Matrix, SymbolSpace};

/// Node contents of a codeword, one `l`-vector per node.
pub type Codeword<S = u32> = Vec<Vec<S>>;

/// An F-linear regenerating code with exact, linear repair.
///
/// Helpers are ranked `1..=d` by a bijection τ; the helper of rank `j` sends
/// `β_j` symbols, each an F-linear function of its own stored content only.
pub trait LinearRegeneratingCode: Send + Sync {
    fn field(&self) -> &Field;
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn d(&self) -> usize;
    fn node_size(&self) -> usize;
    fn file_size(&self) -> usize;

    /// `β_1 ≤ … ≤ β_d`: what the helper of each rank sends.
    fn betas(&self) -> Vec<usize>;

    fn encode(&self, file: &[u32]) -> Result<Codeword>;

    /// The `β_rank × l` matrix mapping helper `h`'s content to the symbols it
    /// sends toward failed node `f`.
    fn repair_map(&self, h: usize, f: usize, rank: usize) -> Result<Matrix<u32>>;

    fn params(&self) -> CodeParams {
        CodeParams {
            n: self.n(),
            k: self.k(),
            d: self.d(),
            l: self.node_size() as u64,
            betas: self.betas().into_iter().map(|b| b as u64).collect(),
            m: self.file_size() as u64,
        }
    }
}

pub(crate) fn check_node(index: usize, n: usize) -> Result<()> {
    if index >= n {
        Err(Error::NodeOutOfRange { index, n })
    } else {
        Ok(())
    }
}

/// Per-node generator matrices (`l × M`), obtained by encoding unit files.
#[derive(Clone, Debug)]
pub struct Generators {
    pub nodes: Vec<Matrix<u32>>,
}

impl Generators {
    pub fn of<C: LinearRegeneratingCode + ?Sized>(code: &C) -> Result<Self> {
        let (n, l, m) = (code.n(), code.node_size(), code.file_size());
        let mut cols: Vec<Codeword> = Vec::with_capacity(m);
        for j in 0..m {
            let mut e = vec![0u32; m];
            e[j] = 1;
            cols.push(code.encode(&e)?);
        }
        let nodes = (0..n)
            .map(|i| {
                let mut data = Vec::with_capacity(l * m);
                for r in 0..l {
                    for c in &cols {
                        data.push(c[i][r]);
                    }
                }
                Matrix::from_vec(l, m, data)
            })
            .collect();
        Ok(Generators { nodes })
    }

    /// Encodes a file over any symbol space (e.g. tower elements).
    pub fn encode_symbols<S: SymbolSpace>(&self, space: &S, file: &[S::Sym]) -> Result<Codeword<S::Sym>> {
        self.nodes.iter().map(|g| apply(space, g, file)).collect()
    }
}

/// Recovers the file from exactly `k` distinct nodes.
pub fn reconstruct<C: LinearRegeneratingCode + ?Sized>(
    code: &C,
    gens: &Generators,
    nodes: &[(usize, Vec<u32>)],
) -> Result<Vec<u32>> {
    if nodes.len() != code.k() {
        return Err(Error::Params(format!("{} nodes supplied, exactly k = {} required", nodes.len(), code.k())));
    }
    let mut seen = HashSet::new();
    let mut parts = Vec::new();
    let mut rhs = Vec::new();
    for (i, content) in nodes {
        check_node(*i, code.n())?;
        if !seen.insert(*i) {
            return Err(Error::Duplicate(*i));
        }
        if content.len() != code.node_size() {
            return Err(Error::Length { expected: code.node_size(), got: content.len() });
        }
        parts.push(gens.nodes[*i].clone());
        rhs.extend(content.iter().copied());
    }
    let a = Matrix::vstack(&parts)?;
    let b = Matrix::from_vec(rhs.len(), 1, rhs);
    let x = a.solve_unique(code.field(), &b)?;
    Ok(x.col(0))
}

/// A helper-rank assignment τ for one repair: `ranks[i]` is the rank of `helpers[i]`.
pub fn validate_assignment(n: usize, d: usize, f: usize, helpers: &[usize], ranks: &[usize]) -> Result<()> {
    check_node(f, n)?;
    if helpers.len() != d {
        return Err(Error::Params(format!("{} helpers, d = {d}", helpers.len())));
    }
    if ranks.len() != d {
        return Err(Error::BadAssignment(format!("{} ranks for {d} helpers", ranks.len())));
    }
    let mut seen = HashSet::new();
    for &h in helpers {
        check_node(h, n)?;
        if h == f {
            return Err(Error::HelperIsFailed(h));
        }
        if !seen.insert(h) {
            return Err(Error::Duplicate(h));
        }
    }
    let mut rs: Vec<usize> = ranks.to_vec();
    rs.sort_unstable();
    if rs != (1..=d).collect::<Vec<_>>() {
        return Err(Error::BadAssignment(format!("ranks {ranks:?} are not a permutation of 1..={d}")));
    }
    Ok(())
}

/// The combining matrices `U_{h,f}` of one repair: `W_f = Σ_h U_{h,f} S_{h,f}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IpMatrixSet {
    pub f: usize,
    pub helpers: Vec<usize>,
    pub ranks: Vec<usize>,
    /// `U_{h,f}`, `l × β_{τ(h)}`, aligned with `helpers`.
    pub blocks: Vec<Matrix<u32>>,
    /// `G_{h,f}`, `β_{τ(h)} × l`, aligned with `helpers`.
    pub repair_maps: Vec<Matrix<u32>>,
}

impl IpMatrixSet {
    fn position(&self, h: usize) -> Result<usize> {
        self.helpers.iter().position(|&x| x == h).ok_or(Error::NotAHelper(h))
    }

    pub fn beta_of(&self, h: usize) -> Result<usize> {
        Ok(self.repair_maps[self.position(h)?].rows())
    }

    /// What helper `h` sends, computed from its (possibly corrupted) content.
    pub fn helper_symbols<S: SymbolSpace>(&self, space: &S, h: usize, content: &[S::Sym]) -> Result<Vec<S::Sym>> {
        apply(space, &self.repair_maps[self.position(h)?], content)
    }

    /// `Σ_{h∈A} U_{h,f} S_{h,f}` for the given `(h, S_{h,f})` pairs.
    pub fn combine<S: SymbolSpace>(&self, space: &S, symbols: &[(usize, Vec<S::Sym>)]) -> Result<Vec<S::Sym>> {
        let l = self.blocks.first().map_or(0, |b| b.rows());
        let mut acc = vec![space.zero_sym(); l];
        for (h, s) in symbols {
            let u = &self.blocks[self.position(*h)?];
            let part = apply(space, u, s)?;
            acc = crate::gf::add_vec(space, &acc, &part);
        }
        Ok(acc)
    }

    /// Generator (`l × M`) of the IP combination of subset `a`, given node generators.
    pub fn combination_generator(&self, field: &Field, gens: &Generators, a: &[usize]) -> Result<Matrix<u32>> {
        let m = gens.nodes[0].cols();
        let l = self.blocks[0].rows();
        let mut acc = Matrix::zeros(field, l, m);
        for &h in a {
            let p = self.position(h)?;
            let g = self.repair_maps[p].mul(field, &gens.nodes[h])?;
            let part = self.blocks[p].mul(field, &g)?;
            let data: Vec<u32> = acc
                .clone()
                .into_data()
                .iter()
                .zip(part.into_data())
                .map(|(x, y)| field.add(x, &y))
                .collect();
            acc = Matrix::from_vec(l, m, data);
        }
        Ok(acc)
    }
}

/// Solves for `U_{f,D}` from the helper-symbol generator (`Σβ × M`) and the
/// failed node's generator (`l × M`). Any solution is returned.
pub fn derive_ip_matrices<C: LinearRegeneratingCode + ?Sized>(
    code: &C,
    gens: &Generators,
    f: usize,
    helpers: &[usize],
    ranks: &[usize],
) -> Result<IpMatrixSet> {
    validate_assignment(code.n(), code.d(), f, helpers, ranks)?;
    let field = code.field();
    let mut maps = Vec::with_capacity(helpers.len());
    let mut helper_gens = Vec::with_capacity(helpers.len());
    for (&h, &r) in helpers.iter().zip(ranks) {
        let g = code.repair_map(h, f, r)?;
        helper_gens.push(g.mul(field, &gens.nodes[h])?);
        maps.push(g);
    }
    let blocks = solve_combination(field, &helper_gens, &gens.nodes[f])?;
    Ok(IpMatrixSet { f, helpers: helpers.to_vec(), ranks: ranks.to_vec(), blocks, repair_maps: maps })
}

/// Finds `U_h` with `Σ_h U_h · H_h = target`; errors if no such matrices exist.
pub fn solve_combination(field: &Field, helper_gens: &[Matrix<u32>], target: &Matrix<u32>) -> Result<Vec<Matrix<u32>>> {
    let stacked = Matrix::vstack(helper_gens)?;
    let ut = stacked
        .transpose()
        .solve(field, &target.transpose())
        .map_err(|e| match e {
            Error::Inconsistent => Error::Params("helpers do not determine the failed node".into()),
            other => other,
        })?;
    let u = ut.transpose();
    let mut blocks = Vec::with_capacity(helper_gens.len());
    let mut start = 0;
    for g in helper_gens {
        blocks.push(u.col_block(start, g.rows()));
        start += g.rows();
    }
    Ok(blocks)
}

/// Default τ: helpers listed nearest-first get the largest ranks (`helpers[0]` ↦ d).
pub fn nearest_first_ranks(d: usize) -> Vec<usize> {
    (1..=d).rev().collect()
}

/// Random file of the code's size.
pub fn random_file<C: LinearRegeneratingCode + ?Sized, R: rand::Rng + ?Sized>(code: &C, rng: &mut R) -> Vec<u32> {
    let f = code.field();
    (0..code.file_size()).map(|_| f.random(rng)).collect()
}
