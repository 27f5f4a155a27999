//! Codes with arbitrary per-helper downloads, built by stacking MSR codes.
//!
//! For sorted downloads `β_1 ≤ … ≤ β_d` every positive gap `β_j − β_{j−1}`
//! with `j ≤ d−k+1` becomes a component: that many copies of an MSR code
//! with repair degree `d−j+1` and one symbol per helper. The helper of rank
//! `r` takes part in the components with `j ≤ r`, so it sends
//! `β_{min(r, d−k+1)}` symbols. Node contents are the component contents in
//! ascending `j`, copies in order.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds::{delta_r, CodeParams};
use crate::codes::{
    derive_ip_matrices, reconstruct, unit_msr, validate_assignment, Codeword, Generators, IpMatrixSet,
    LinearRegeneratingCode,
};
use crate::error::{Error, Result};
use crate::gf::{add_vec, Field, Matrix};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    /// Gap index `j`.
    pub j: usize,
    /// Repair degree `d−j+1` of the unit code.
    pub degree: usize,
    /// `β_j − β_{j−1}`: copies of the unit code, and what each participating helper sends.
    pub copies: usize,
    /// Node size of one unit code, `d−j−k+2`.
    pub unit_l: usize,
    pub l: usize,
    pub m: usize,
    /// Where the component starts inside a node.
    pub node_offset: usize,
    /// Where the component starts inside the file.
    pub file_offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackSpec {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    /// Sorted downloads.
    pub betas: Vec<u64>,
    /// `μ_j = 1` iff `β_j > β_{j−1}`, for `j = 1..=d−k+1`.
    pub mu: Vec<u8>,
    /// `S = {j : μ_j = 1}`.
    pub s: Vec<usize>,
    pub components: Vec<Component>,
    pub l: usize,
    pub m: usize,
}

impl StackSpec {
    /// Component layout for downloads `betas` (any order). Does not check
    /// whether the components can be realized; see [`build_stack`].
    pub fn plan(n: usize, k: usize, d: usize, betas: &[u64]) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::Params(format!("need 1 <= k <= d, got k = {k}, d = {d}")));
        }
        if d + 1 > n {
            return Err(Error::Params(format!("d = {d} needs at least {} nodes, n = {n}", d + 1)));
        }
        if betas.len() != d {
            return Err(Error::Params(format!("{} download amounts for d = {d}", betas.len())));
        }
        let mut sorted = betas.to_vec();
        sorted.sort_unstable();
        let r = d - k + 1;
        let (mut mu, mut s, mut components) = (Vec::with_capacity(r), Vec::new(), Vec::new());
        let (mut prev, mut node_offset, mut file_offset) = (0u64, 0usize, 0usize);
        for j in 1..=r {
            let gap = (sorted[j - 1] - prev) as usize;
            prev = sorted[j - 1];
            mu.push(u8::from(gap > 0));
            if gap == 0 {
                continue;
            }
            s.push(j);
            let unit_l = d + 2 - j - k;
            let l = unit_l * gap;
            components.push(Component { j, degree: d - j + 1, copies: gap, unit_l, l, m: k * l, node_offset, file_offset });
            node_offset += l;
            file_offset += k * l;
        }
        let l = node_offset;
        if l == 0 {
            return Err(Error::Params("the d-k+1 smallest downloads are all zero".into()));
        }
        let expect = delta_r(&sorted, r)?;
        assert_eq!(l as u64, expect, "stacked node size must equal the sum of the d-k+1 smallest downloads");
        Ok(StackSpec { n, k, d, betas: sorted, mu, s, components, l, m: file_offset })
    }

    /// Node ranges `[start, end)` of the components.
    pub fn boundaries(&self) -> Vec<(usize, usize)> {
        self.components.iter().map(|c| (c.node_offset, c.node_offset + c.l)).collect()
    }

    /// Symbols sent by the helper of `rank`: `β_{min(rank, d−k+1)}`.
    pub fn sends(&self, rank: usize) -> usize {
        self.components.iter().filter(|c| c.j <= rank).map(|c| c.copies).sum()
    }

    /// Downloads actually used, one per rank.
    pub fn effective_betas(&self) -> Vec<u64> {
        (1..=self.d).map(|r| self.sends(r) as u64).collect()
    }

    pub fn params(&self) -> CodeParams {
        CodeParams { n: self.n, k: self.k, d: self.d, l: self.l as u64, betas: self.betas.clone(), m: self.m as u64 }
    }

    /// Every component needs a unit MSR code with `d' >= 2(k-1)` and `k >= 2`.
    pub fn check_realizable(&self) -> Result<()> {
        for c in &self.components {
            if self.k < 2 || c.degree + 2 < 2 * self.k {
                return Err(Error::Unrealizable { component: c.j, k: self.k, d: c.degree });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Plans the stack and checks that every component can be realized.
pub fn build_stack(n: usize, k: usize, d: usize, betas: &[u64]) -> Result<StackSpec> {
    let spec = StackSpec::plan(n, k, d, betas)?;
    spec.check_realizable()?;
    Ok(spec)
}

/// Outcome of a repair with all helpers forwarding raw symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackRepair {
    pub content: Vec<u32>,
    /// Symbols sent by each helper, aligned with the helper list.
    pub downloads: Vec<usize>,
}

/// Outcome of a repair in which a helper subset `A` is combined before forwarding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackIpRepair {
    pub content: Vec<u32>,
    /// Whether `A` was compressed to `l` symbols (only when `|A| >= d−k+1`).
    pub compressed: bool,
    /// Symbols leaving `A`.
    pub subset_symbols: usize,
    /// Symbols arriving at the failed node.
    pub total_symbols: usize,
}

pub struct StackedCode {
    field: Field,
    spec: StackSpec,
    units: Vec<Arc<dyn LinearRegeneratingCode>>,
    unit_gens: Vec<Generators>,
}

impl std::fmt::Debug for StackedCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StackedCode").field("spec", &self.spec).finish()
    }
}

impl StackedCode {
    pub fn new(field: &Field, spec: StackSpec) -> Result<Self> {
        spec.check_realizable()?;
        let mut units = Vec::with_capacity(spec.components.len());
        let mut unit_gens = Vec::with_capacity(spec.components.len());
        for c in &spec.components {
            let unit = unit_msr(field, spec.n, spec.k, c.degree).map_err(|e| match e {
                Error::Unrealizable { k, d, .. } => Error::Unrealizable { component: c.j, k, d },
                other => other,
            })?;
            unit_gens.push(Generators::of(unit.as_ref())?);
            units.push(unit);
        }
        Ok(StackedCode { field: field.clone(), spec, units, unit_gens })
    }

    pub fn build(field: &Field, n: usize, k: usize, d: usize, betas: &[u64]) -> Result<Self> {
        Self::new(field, build_stack(n, k, d, betas)?)
    }

    pub fn spec(&self) -> &StackSpec {
        &self.spec
    }

    /// The unit code of each component.
    pub fn units(&self) -> &[Arc<dyn LinearRegeneratingCode>] {
        &self.units
    }

    fn copy_range(c: &Component, q: usize) -> std::ops::Range<usize> {
        let s = c.node_offset + q * c.unit_l;
        s..s + c.unit_l
    }

    fn file_range(&self, c: &Component, q: usize) -> std::ops::Range<usize> {
        let w = self.spec.k * c.unit_l;
        let s = c.file_offset + q * w;
        s..s + w
    }

    /// Recovers the file component by component from any `k` nodes.
    pub fn reconstruct_stack(&self, nodes: &[(usize, Vec<u32>)]) -> Result<Vec<u32>> {
        if nodes.len() != self.spec.k {
            return Err(Error::Params(format!("{} nodes supplied, exactly k = {} required", nodes.len(), self.spec.k)));
        }
        for (_, content) in nodes {
            if content.len() != self.spec.l {
                return Err(Error::Length { expected: self.spec.l, got: content.len() });
            }
        }
        let mut file = vec![0u32; self.spec.m];
        for (ci, c) in self.spec.components.iter().enumerate() {
            for q in 0..c.copies {
                let slices: Vec<(usize, Vec<u32>)> =
                    nodes.iter().map(|(i, v)| (*i, v[Self::copy_range(c, q)].to_vec())).collect();
                let part = reconstruct(self.units[ci].as_ref(), &self.unit_gens[ci], &slices)?;
                file[self.file_range(c, q)].copy_from_slice(&part);
            }
        }
        Ok(file)
    }

    /// `(component, copy)` pairs the helper of `rank` takes part in, in send order.
    fn participation(&self, rank: usize) -> Vec<(usize, usize)> {
        self.spec
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| c.j <= rank)
            .flat_map(|(ci, c)| (0..c.copies).map(move |q| (ci, q)))
            .collect()
    }

    /// Combining matrices for one repair, assembled from the components' own.
    pub fn ip_matrices(&self, f: usize, helpers: &[usize], ranks: &[usize]) -> Result<IpMatrixSet> {
        let sp = &self.spec;
        validate_assignment(sp.n, sp.d, f, helpers, ranks)?;
        let mut unit_sets = Vec::with_capacity(sp.components.len());
        for (ci, c) in sp.components.iter().enumerate() {
            let (hp, rp): (Vec<usize>, Vec<usize>) =
                helpers.iter().zip(ranks).filter(|(_, &r)| r >= c.j).map(|(&h, &r)| (h, r + 1 - c.j)).unzip();
            unit_sets.push(derive_ip_matrices(self.units[ci].as_ref(), &self.unit_gens[ci], f, &hp, &rp)?);
        }
        let mut blocks = Vec::with_capacity(helpers.len());
        let mut maps = Vec::with_capacity(helpers.len());
        for (&h, &r) in helpers.iter().zip(ranks) {
            let part = self.participation(r);
            let b = part.len();
            let mut u = Matrix::zeros(&self.field, sp.l, b);
            let mut g = Matrix::zeros(&self.field, b, sp.l);
            for (col, &(ci, q)) in part.iter().enumerate() {
                let c = &sp.components[ci];
                let set = &unit_sets[ci];
                let pos = set.helpers.iter().position(|&x| x == h).expect("participating helper");
                let (ub, gb) = (&set.blocks[pos], &set.repair_maps[pos]);
                let base = c.node_offset + q * c.unit_l;
                for y in 0..c.unit_l {
                    u.set(base + y, col, *ub.get(y, 0));
                    g.set(col, base + y, *gb.get(0, y));
                }
            }
            blocks.push(u);
            maps.push(g);
        }
        Ok(IpMatrixSet { f, helpers: helpers.to_vec(), ranks: ranks.to_vec(), blocks, repair_maps: maps })
    }

    /// Repairs `f` with every helper forwarding its symbols unchanged.
    pub fn repair(&self, cw: &Codeword, f: usize, helpers: &[usize], ranks: &[usize]) -> Result<StackRepair> {
        let ip = self.ip_matrices(f, helpers, ranks)?;
        let syms = helpers
            .iter()
            .map(|&h| Ok((h, ip.helper_symbols(&self.field, h, &cw[h])?)))
            .collect::<Result<Vec<_>>>()?;
        let downloads = syms.iter().map(|(_, s)| s.len()).collect();
        Ok(StackRepair { content: ip.combine(&self.field, &syms)?, downloads })
    }

    /// Repairs `f` with the helpers in `subset` combined before forwarding.
    /// Subsets smaller than `d−k+1` are forwarded raw.
    pub fn ip_repair(
        &self,
        cw: &Codeword,
        f: usize,
        helpers: &[usize],
        ranks: &[usize],
        subset: &[usize],
    ) -> Result<StackIpRepair> {
        let ip = self.ip_matrices(f, helpers, ranks)?;
        let mut seen = HashSet::new();
        for &h in subset {
            if !helpers.contains(&h) {
                return Err(Error::NotAHelper(h));
            }
            if !seen.insert(h) {
                return Err(Error::Duplicate(h));
            }
        }
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        for &h in helpers {
            let s = ip.helper_symbols(&self.field, h, &cw[h])?;
            if seen.contains(&h) {
                inside.push((h, s));
            } else {
                outside.push((h, s));
            }
        }
        let raw_a: usize = inside.iter().map(|(_, s)| s.len()).sum();
        let raw_rest: usize = outside.iter().map(|(_, s)| s.len()).sum();
        let compressed = subset.len() + self.spec.k > self.spec.d;
        let subset_symbols = if compressed { self.spec.l } else { raw_a };
        let xi = ip.combine(&self.field, &inside)?;
        let rest = ip.combine(&self.field, &outside)?;
        Ok(StackIpRepair {
            content: add_vec(&self.field, &xi, &rest),
            compressed,
            subset_symbols,
            total_symbols: subset_symbols + raw_rest,
        })
    }
}

impl LinearRegeneratingCode for StackedCode {
    fn field(&self) -> &Field {
        &self.field
    }

    fn n(&self) -> usize {
        self.spec.n
    }

    fn k(&self) -> usize {
        self.spec.k
    }

    fn d(&self) -> usize {
        self.spec.d
    }

    fn node_size(&self) -> usize {
        self.spec.l
    }

    fn file_size(&self) -> usize {
        self.spec.m
    }

    fn betas(&self) -> Vec<usize> {
        (1..=self.spec.d).map(|r| self.spec.sends(r)).collect()
    }

    fn encode(&self, file: &[u32]) -> Result<Codeword> {
        if file.len() != self.spec.m {
            return Err(Error::Length { expected: self.spec.m, got: file.len() });
        }
        let mut cw = vec![vec![0u32; self.spec.l]; self.spec.n];
        for (ci, c) in self.spec.components.iter().enumerate() {
            for q in 0..c.copies {
                let part = self.units[ci].encode(&file[self.file_range(c, q)])?;
                let range = Self::copy_range(c, q);
                for (node, content) in cw.iter_mut().zip(part) {
                    node[range.clone()].copy_from_slice(&content);
                }
            }
        }
        Ok(cw)
    }

    fn repair_map(&self, h: usize, f: usize, rank: usize) -> Result<Matrix<u32>> {
        if rank == 0 || rank > self.spec.d {
            return Err(Error::BadAssignment(format!("rank {rank} outside 1..={}", self.spec.d)));
        }
        let part = self.participation(rank);
        let mut g = Matrix::zeros(&self.field, part.len(), self.spec.l);
        for (row, &(ci, q)) in part.iter().enumerate() {
            let c = &self.spec.components[ci];
            let unit = self.units[ci].repair_map(h, f, rank + 1 - c.j)?;
            let base = c.node_offset + q * c.unit_l;
            for y in 0..c.unit_l {
                g.set(row, base + y, *unit.get(0, y));
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_layout_of_small_instance() {
        let s = StackSpec::plan(5, 2, 4, &[2, 1, 2, 1]).unwrap();
        assert_eq!(s.betas, vec![1, 1, 2, 2]);
        assert_eq!(s.mu, vec![1, 0, 1]);
        assert_eq!(s.s, vec![1, 3]);
        let c: Vec<(usize, usize, usize, usize)> = s.components.iter().map(|c| (c.j, c.degree, c.l, c.m)).collect();
        assert_eq!(c, vec![(1, 4, 3, 6), (3, 2, 1, 2)]);
        assert_eq!((s.l, s.m), (4, 8));
        assert_eq!(s.boundaries(), vec![(0, 3), (3, 4)]);
        assert_eq!(s.effective_betas(), vec![1, 1, 2, 2]);
    }

    #[test]
    fn uniform_downloads_give_one_component() {
        let s = StackSpec::plan(10, 5, 9, &[5; 9]).unwrap();
        assert_eq!(s.s, vec![1]);
        assert_eq!(s.l, 25);
        assert_eq!(s.components[0].copies, 5);
    }

    #[test]
    fn low_degree_components_are_reported() {
        // the gap at j = 4 asks for repair degree 3 < 2(k-1)
        let s = StackSpec::plan(7, 3, 6, &[1, 1, 1, 2, 2, 2]).unwrap();
        assert_eq!(s.s, vec![1, 4]);
        assert_eq!(s.check_realizable(), Err(Error::Unrealizable { component: 4, k: 3, d: 3 }));
        assert!(build_stack(7, 3, 6, &[1, 1, 1, 1, 2, 2]).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let s = StackSpec::plan(5, 2, 4, &[1, 1, 2, 2]).unwrap();
        let back: StackSpec = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}
