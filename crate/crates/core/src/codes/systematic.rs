//! Systematic form of a linear code: the first `k` nodes store the file verbatim.

use std::sync::Arc;

use super::linear::{Codeword, Generators, LinearRegeneratingCode};
use crate::error::{Error, Result};
use crate::gf::{Field, Matrix};

/// Precodes the file through the inverse of the encoding restricted to the
/// systematic nodes `0..k`.
#[derive(Clone)]
pub struct SystematicCode {
    inner: Arc<dyn LinearRegeneratingCode>,
    precoder: Matrix<u32>,
}

impl SystematicCode {
    pub fn new(inner: Arc<dyn LinearRegeneratingCode>) -> Result<Self> {
        let gens = Generators::of(inner.as_ref())?;
        let top = Matrix::vstack(&gens.nodes[..inner.k()])?;
        let precoder = top
            .invert(inner.field())
            .map_err(|_| Error::Params("first k nodes do not determine the file".into()))?;
        Ok(SystematicCode { inner, precoder })
    }

    pub fn inner(&self) -> &Arc<dyn LinearRegeneratingCode> {
        &self.inner
    }

    pub fn systematic_nodes(&self) -> Vec<usize> {
        (0..self.inner.k()).collect()
    }
}

impl LinearRegeneratingCode for SystematicCode {
    fn field(&self) -> &Field {
        self.inner.field()
    }

    fn n(&self) -> usize {
        self.inner.n()
    }

    fn k(&self) -> usize {
        self.inner.k()
    }

    fn d(&self) -> usize {
        self.inner.d()
    }

    fn node_size(&self) -> usize {
        self.inner.node_size()
    }

    fn file_size(&self) -> usize {
        self.inner.file_size()
    }

    fn betas(&self) -> Vec<usize> {
        self.inner.betas()
    }

    fn encode(&self, file: &[u32]) -> Result<Codeword> {
        if file.len() != self.file_size() {
            return Err(Error::Length { expected: self.file_size(), got: file.len() });
        }
        let pre = self.precoder.mul_vec(self.field(), file)?;
        self.inner.encode(&pre)
    }

    fn repair_map(&self, h: usize, f: usize, rank: usize) -> Result<Matrix<u32>> {
        self.inner.repair_map(h, f, rank)
    }
}
