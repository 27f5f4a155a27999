use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::matrix::Matrix;
use super::poly;
use super::{Field, FieldOps, SymbolSpace};
use crate::error::{Error, Result};

/// Element of F_{q^m}: its coordinates over F_q in the polynomial basis
/// `1, γ, …, γ^{m-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TowerElement(Vec<u32>);

impl TowerElement {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Debug for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{:?}", self.0)
    }
}

struct Inner {
    base: Field,
    m: usize,
    // monic, length m + 1
    modulus: Vec<u32>,
    // γ^{jq} for j < m, as coordinate vectors
    frob: Vec<Vec<u32>>,
}

/// The extension F_{q^m} of a base field F_q.
#[derive(Clone)]
pub struct ExtField {
    inner: Arc<Inner>,
}

impl fmt::Debug for ExtField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}^{}[{:?}]", self.inner.base, self.inner.m, self.inner.modulus)
    }
}

impl PartialEq for ExtField {
    fn eq(&self, other: &Self) -> bool {
        self.inner.base == other.inner.base && self.inner.modulus == other.inner.modulus
    }
}

impl Eq for ExtField {}

impl ExtField {
    /// Builds F_{q^m} with the lexicographically first monic irreducible modulus.
    pub fn new(base: &Field, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Params("extension degree must be positive".into()));
        }
        let q = base.order() as u64;
        let mut counter: u64 = 0;
        loop {
            let mut coeffs = Vec::with_capacity(m + 1);
            let mut c = counter;
            for _ in 0..m {
                coeffs.push((c % q) as u32);
                c /= q;
            }
            if c != 0 {
                return Err(Error::NotIrreducible(format!("no modulus of degree {m} found")));
            }
            coeffs.push(1);
            if coeffs[0] != 0 && poly::is_irreducible(base, &coeffs) {
                return Self::with_modulus(base, coeffs);
            }
            counter += 1;
        }
    }

    /// Builds F_{q^m} from an explicit monic modulus of degree `m` (lowest coefficient first).
    pub fn with_modulus(base: &Field, modulus: Vec<u32>) -> Result<Self> {
        let m = modulus.len().checked_sub(1).filter(|&m| m > 0).ok_or_else(|| {
            Error::Params("modulus must have positive degree".into())
        })?;
        if modulus[m] != 1 {
            return Err(Error::Params("modulus must be monic".into()));
        }
        for &c in &modulus {
            base.elem(c as u64)?;
        }
        if !poly::is_irreducible(base, &modulus) {
            return Err(Error::NotIrreducible(format!("{modulus:?}")));
        }
        let mut ext = ExtField {
            inner: Arc::new(Inner { base: base.clone(), m, modulus, frob: Vec::new() }),
        };
        let q = base.order() as u64;
        let frob: Vec<Vec<u32>> = (0..m)
            .map(|j| {
                let gj = ext.basis(j);
                ext.pow(&gj, q).0
            })
            .collect();
        Arc::get_mut(&mut ext.inner).expect("fresh").frob = frob;
        Ok(ext)
    }

    pub fn base(&self) -> &Field {
        &self.inner.base
    }

    pub fn degree(&self) -> usize {
        self.inner.m
    }

    pub fn modulus(&self) -> &[u32] {
        &self.inner.modulus
    }

    /// Basis element γ^j, `j < m`.
    pub fn basis(&self, j: usize) -> TowerElement {
        assert!(j < self.inner.m, "basis index out of range");
        let mut v = vec![0u32; self.inner.m];
        v[j] = 1;
        TowerElement(v)
    }

    /// The generator γ (the class of x modulo the modulus).
    pub fn gamma(&self) -> TowerElement {
        if self.inner.m == 1 {
            let b = &self.inner.base;
            self.from_base(b.neg(&self.inner.modulus[0]))
        } else {
            self.basis(1)
        }
    }

    pub fn from_base(&self, c: u32) -> TowerElement {
        let mut v = vec![0u32; self.inner.m];
        v[0] = c;
        TowerElement(v)
    }

    /// Coordinates over F_q.
    pub fn expand(&self, a: &TowerElement) -> Vec<u32> {
        a.0.clone()
    }

    pub fn recombine(&self, coords: &[u32]) -> Result<TowerElement> {
        if coords.len() != self.inner.m {
            return Err(Error::Length { expected: self.inner.m, got: coords.len() });
        }
        for &c in coords {
            self.inner.base.elem(c as u64)?;
        }
        Ok(TowerElement(coords.to_vec()))
    }

    /// Multiplication by a base-field scalar.
    pub fn scale(&self, c: u32, a: &TowerElement) -> TowerElement {
        let b = &self.inner.base;
        TowerElement(a.0.iter().map(|x| b.mul(&c, x)).collect())
    }

    pub fn pow(&self, a: &TowerElement, mut e: u64) -> TowerElement {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// `a^q`, computed as an F_q-linear map.
    pub fn frobenius(&self, a: &TowerElement) -> TowerElement {
        let b = &self.inner.base;
        let m = self.inner.m;
        let mut out = vec![0u32; m];
        for (j, &c) in a.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (o, img) in out.iter_mut().zip(&self.inner.frob[j]) {
                *o = b.add(o, &b.mul(&c, img));
            }
        }
        TowerElement(out)
    }

    /// `a^{q^i}`; `i` is taken modulo `m`.
    pub fn frobenius_pow(&self, a: &TowerElement, i: usize) -> TowerElement {
        let mut acc = a.clone();
        for _ in 0..(i % self.inner.m) {
            acc = self.frobenius(&acc);
        }
        acc
    }

    /// Evaluates the linearized polynomial `Σ a_i x^{q^i}`.
    pub fn linearized_eval(&self, coeffs: &[TowerElement], x: &TowerElement) -> TowerElement {
        let mut acc = self.zero();
        let mut xp = x.clone();
        for (i, c) in coeffs.iter().enumerate() {
            if i > 0 {
                xp = self.frobenius(&xp);
            }
            acc = self.add(&acc, &self.mul(c, &xp));
        }
        acc
    }

    /// Rank over F_q of the m × N matrix whose columns are the expansions of `v`.
    pub fn rank_over_base(&self, v: &[TowerElement]) -> usize {
        let m = self.inner.m;
        let mut data = Vec::with_capacity(m * v.len());
        for r in 0..m {
            for e in v {
                data.push(e.0[r]);
            }
        }
        Matrix::from_vec(m, v.len(), data).rank(&self.inner.base)
    }
}

impl FieldOps for ExtField {
    type Elem = TowerElement;

    fn zero(&self) -> TowerElement {
        TowerElement(vec![0; self.inner.m])
    }

    fn one(&self) -> TowerElement {
        self.from_base(1)
    }

    fn add(&self, a: &TowerElement, b: &TowerElement) -> TowerElement {
        let f = &self.inner.base;
        TowerElement(a.0.iter().zip(&b.0).map(|(x, y)| f.add(x, y)).collect())
    }

    fn sub(&self, a: &TowerElement, b: &TowerElement) -> TowerElement {
        let f = &self.inner.base;
        TowerElement(a.0.iter().zip(&b.0).map(|(x, y)| f.sub(x, y)).collect())
    }

    fn neg(&self, a: &TowerElement) -> TowerElement {
        let f = &self.inner.base;
        TowerElement(a.0.iter().map(|x| f.neg(x)).collect())
    }

    fn mul(&self, a: &TowerElement, b: &TowerElement) -> TowerElement {
        let f = &self.inner.base;
        let m = self.inner.m;
        let mut t = vec![0u32; 2 * m - 1];
        for (i, x) in a.0.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.0.iter().enumerate() {
                t[i + j] = f.add(&t[i + j], &f.mul(x, y));
            }
        }
        let md = &self.inner.modulus;
        for i in (m..2 * m - 1).rev() {
            let c = t[i];
            if c == 0 {
                continue;
            }
            for j in 0..m {
                t[i - m + j] = f.sub(&t[i - m + j], &f.mul(&c, &md[j]));
            }
        }
        t.truncate(m);
        TowerElement(t)
    }

    fn inv(&self, a: &TowerElement) -> Option<TowerElement> {
        if self.is_zero(a) {
            return None;
        }
        let f = &self.inner.base;
        let (g, s) = poly::ext_gcd_inverse_part(f, &a.0, &self.inner.modulus);
        let g0 = f.inv(&g[0])?;
        let mut out = vec![0u32; self.inner.m];
        for (o, c) in out.iter_mut().zip(&s) {
            *o = f.mul(c, &g0);
        }
        Some(TowerElement(out))
    }

    fn is_zero(&self, a: &TowerElement) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> TowerElement {
        TowerElement((0..self.inner.m).map(|_| self.inner.base.random(rng)).collect())
    }
}

impl SymbolSpace for ExtField {
    type Sym = TowerElement;

    fn zero_sym(&self) -> TowerElement {
        self.zero()
    }

    fn add_sym(&self, a: &TowerElement, b: &TowerElement) -> TowerElement {
        self.add(a, b)
    }

    fn scale_sym(&self, c: u32, a: &TowerElement) -> TowerElement {
        self.scale(c, a)
    }
}
