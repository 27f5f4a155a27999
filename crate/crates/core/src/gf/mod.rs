//! Finite fields, tower extensions and dense linear algebra.

mod ext;
mod field;
mod matrix;
pub mod poly;

use std::fmt::Debug;

use rand::Rng;

pub use ext::{ExtField, TowerElement};
pub use field::{poly_eval, ArithOp, Field, FieldElement};
pub use matrix::Matrix;

use crate::error::{Error, Result};

/// Field arithmetic on a context object; elements are plain values.
pub trait FieldOps: Clone + Send + Sync {
    type Elem: Clone + PartialEq + Eq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|i| self.mul(a, &i))
    }
}

/// A vector space over a base field whose scalars are `u32` base elements.
///
/// Repair maps are matrices over the base field; they act on stored symbols,
/// which are either base elements or tower elements.
pub trait SymbolSpace: Clone + Send + Sync {
    type Sym: Clone + PartialEq + Eq + Debug + Send + Sync;

    fn zero_sym(&self) -> Self::Sym;
    fn add_sym(&self, a: &Self::Sym, b: &Self::Sym) -> Self::Sym;
    fn scale_sym(&self, c: u32, a: &Self::Sym) -> Self::Sym;
}

/// `m · v` for a base-field matrix and a symbol vector.
pub fn apply<S: SymbolSpace>(space: &S, m: &Matrix<u32>, v: &[S::Sym]) -> Result<Vec<S::Sym>> {
    if v.len() != m.cols() {
        return Err(Error::Length { expected: m.cols(), got: v.len() });
    }
    Ok((0..m.rows())
        .map(|r| {
            let mut acc = space.zero_sym();
            for (c, x) in m.row(r).iter().zip(v) {
                if *c != 0 {
                    acc = space.add_sym(&acc, &space.scale_sym(*c, x));
                }
            }
            acc
        })
        .collect())
}

/// Elementwise sum of two symbol vectors.
pub fn add_vec<S: SymbolSpace>(space: &S, a: &[S::Sym], b: &[S::Sym]) -> Vec<S::Sym> {
    a.iter().zip(b).map(|(x, y)| space.add_sym(x, y)).collect()
}
