//! Symmetric powers `S^p Y` of `Y = F^r`.
//!
//! The basis of `S^p Y` is indexed by nondecreasing index multisets of size
//! `p`, in lexicographic order. The symmetric product sends a pair of
//! multisets to their sorted union, which makes `⊕_p S^p Y` the ring of
//! polynomials in `r` commuting variables.

use std::collections::HashMap;

use crate::gf::{Field, FieldOps};

#[derive(Clone, Debug)]
pub struct SymBasis {
    vars: usize,
    degree: usize,
    monos: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

fn multisets(vars: usize, degree: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == degree {
        out.push(cur.clone());
        return;
    }
    for v in start..vars {
        cur.push(v);
        multisets(vars, degree, v, cur, out);
        cur.pop();
    }
}

impl SymBasis {
    pub fn new(vars: usize, degree: usize) -> Self {
        let mut monos = Vec::new();
        multisets(vars, degree, 0, &mut Vec::new(), &mut monos);
        let index = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        SymBasis { vars, degree, monos, index }
    }

    pub fn dim(&self) -> usize {
        self.monos.len()
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn monomials(&self) -> &[Vec<usize>] {
        &self.monos
    }

    /// Index of a multiset given in any order.
    pub fn index_of(&self, multiset: &[usize]) -> Option<usize> {
        let mut key = multiset.to_vec();
        key.sort_unstable();
        self.index.get(&key).copied()
    }

    /// Coordinates of the basis element `index`.
    pub fn unit(&self, index: usize) -> Vec<u32> {
        let mut v = vec![0u32; self.dim()];
        v[index] = 1;
        v
    }
}

/// Symmetric product of `a ∈ S^p Y` and `b ∈ S^q Y`, in the basis `out` of `S^{p+q} Y`.
pub fn sym_mul(f: &Field, a: &[u32], pa: &SymBasis, b: &[u32], pb: &SymBasis, out: &SymBasis) -> Vec<u32> {
    assert_eq!(out.degree, pa.degree + pb.degree, "degrees must add up");
    let mut res = vec![0u32; out.dim()];
    let mut key = Vec::with_capacity(out.degree);
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if *y == 0 {
                continue;
            }
            key.clear();
            key.extend_from_slice(&pa.monos[i]);
            key.extend_from_slice(&pb.monos[j]);
            let idx = out.index_of(&key).expect("product lands in the output basis");
            res[idx] = f.add(&res[idx], &f.mul(x, y));
        }
    }
    res
}
