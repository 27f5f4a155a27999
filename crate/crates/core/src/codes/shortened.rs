//! MSR codes with `d > 2(k-1)` obtained by shortening a product-matrix code.
//!
//! A product-matrix code with `k' = k + s`, `d' = d + s` and `n + s` nodes is
//! restricted to files whose last `s` nodes store zeros. Those virtual nodes
//! are dropped; during repair they act as helpers that send zero.

use std::sync::Arc;

use super::linear::{check_node, Codeword, Generators, LinearRegeneratingCode};
use super::pm::PmCode;
use crate::error::{Error, Result};
use crate::gf::{Field, Matrix};

#[derive(Clone, Debug)]
pub struct ShortenedPmCode {
    inner: PmCode,
    n: usize,
    k: usize,
    shift: usize,
    // M' × M, columns span the files that vanish on the virtual nodes
    embed: Matrix<u32>,
}

impl ShortenedPmCode {
    pub fn new(field: &Field, n: usize, k: usize, d: usize) -> Result<Self> {
        if k < 1 || d + 2 < 2 * k {
            return Err(Error::Params(format!("shortening needs d >= 2(k-1), got k = {k}, d = {d}")));
        }
        if d + 1 > n {
            return Err(Error::Params(format!("d = {d} needs n > d, n = {n}")));
        }
        let shift = d + 2 - 2 * k;
        let inner = PmCode::new(field, n + shift, k + shift)?;
        let gens = Generators::of(&inner)?;
        let virt: Vec<Matrix<u32>> = (n..n + shift).map(|i| gens.nodes[i].clone()).collect();
        let embed = if virt.is_empty() {
            Matrix::identity(field, inner.file_size())
        } else {
            let v = Matrix::vstack(&virt)?;
            let ker = v.kernel(field);
            let mm = inner.file_size();
            Matrix::from_rows(ker.len(), (0..mm).map(|r| ker.iter().map(|b| b[r]).collect()).collect())
        };
        let l = inner.node_size();
        if embed.cols() != k * l {
            return Err(Error::Params(format!(
                "virtual nodes are dependent: subcode dimension {} instead of {}",
                embed.cols(),
                k * l
            )));
        }
        Ok(ShortenedPmCode { inner, n, k, shift, embed })
    }

    /// Number of virtual nodes removed.
    pub fn shift(&self) -> usize {
        self.shift
    }
}

impl LinearRegeneratingCode for ShortenedPmCode {
    fn field(&self) -> &Field {
        self.inner.field()
    }

    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        self.k
    }

    fn d(&self) -> usize {
        self.inner.d() - self.shift
    }

    fn node_size(&self) -> usize {
        self.inner.node_size()
    }

    fn file_size(&self) -> usize {
        self.embed.cols()
    }

    fn betas(&self) -> Vec<usize> {
        vec![1; self.d()]
    }

    fn encode(&self, file: &[u32]) -> Result<Codeword> {
        if file.len() != self.file_size() {
            return Err(Error::Length { expected: self.file_size(), got: file.len() });
        }
        let full = self.embed.mul_vec(self.field(), file)?;
        let mut cw = self.inner.encode(&full)?;
        cw.truncate(self.n);
        Ok(cw)
    }

    fn repair_map(&self, h: usize, f: usize, rank: usize) -> Result<Matrix<u32>> {
        check_node(h, self.n)?;
        check_node(f, self.n)?;
        if rank == 0 || rank > self.d() {
            return Err(Error::BadAssignment(format!("rank {rank} outside 1..={}", self.d())));
        }
        self.inner.repair_map(h, f, 1)
    }
}

/// A unit-download MSR code with the given repair degree, if one is available:
/// product-matrix for `d = 2(k-1)`, shortened product-matrix for larger `d`.
pub fn unit_msr(field: &Field, n: usize, k: usize, d: usize) -> Result<Arc<dyn LinearRegeneratingCode>> {
    if k >= 2 && d == 2 * (k - 1) {
        Ok(Arc::new(PmCode::new(field, n, k)?))
    } else if d + 2 > 2 * k {
        Ok(Arc::new(ShortenedPmCode::new(field, n, k, d)?))
    } else {
        Err(Error::Unrealizable { component: 0, k, d })
    }
}
