//! Product-matrix MSR codes with `d = 2(k-1)`.
//!
//! Node `i` stores the coefficients of `g_i(z) = s_1(a_i, z) + a_i^{k-1} s_2(a_i, z)`
//! where `s_1, s_2` are the symmetric bivariate polynomials whose coefficient
//! matrices `S_1, S_2` hold the file. A helper `h` repairing `f` sends `g_h(a_f)`.

use std::collections::HashSet;

use super::linear::{check_node, Codeword, LinearRegeneratingCode};
use crate::error::{Error, Result};
use crate::gf::{poly, Field, FieldOps, Matrix};

#[derive(Clone, Debug)]
pub struct PmCode {
    field: Field,
    k: usize,
    points: Vec<u32>,
    lambdas: Vec<u32>,
}

/// Position of `(p, q)`, `p <= q`, in the row-major upper triangle of a `w × w` matrix.
fn tri_index(w: usize, p: usize, q: usize) -> usize {
    let (p, q) = if p <= q { (p, q) } else { (q, p) };
    // rows 0..p hold w, w-1, …, w-p+1 entries
    p * w - p * p.saturating_sub(1) / 2 + (q - p)
}

impl PmCode {
    /// Picks `n` points greedily from `1, α, α², …` so that the `a_i^{k-1}` are distinct.
    pub fn new(field: &Field, n: usize, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Params("product-matrix codes need k >= 2".into()));
        }
        let alpha = field.primitive();
        let mut points = Vec::with_capacity(n);
        let mut used = HashSet::new();
        let mut a = 1u32;
        for _ in 0..field.order() - 1 {
            let lam = field.pow(a, (k - 1) as u64);
            if used.insert(lam) {
                points.push(a);
                if points.len() == n {
                    break;
                }
            }
            a = field.mul(&a, &alpha);
        }
        if points.len() < n {
            return Err(Error::Params(format!(
                "{field:?} has only {} points with distinct (k-1)-th powers, n = {n}",
                points.len()
            )));
        }
        Self::with_points(field, k, points)
    }

    pub fn with_points(field: &Field, k: usize, points: Vec<u32>) -> Result<Self> {
        if k < 2 {
            return Err(Error::Params("product-matrix codes need k >= 2".into()));
        }
        let n = points.len();
        if 2 * (k - 1) > n.saturating_sub(1) {
            return Err(Error::Params(format!("d = {} needs n >= {}, n = {n}", 2 * (k - 1), 2 * k - 1)));
        }
        let mut seen = HashSet::new();
        let mut lams = HashSet::new();
        let mut lambdas = Vec::with_capacity(n);
        for &a in &points {
            field.elem(a as u64)?;
            if a == 0 {
                return Err(Error::Params("evaluation points must be nonzero".into()));
            }
            if !seen.insert(a) {
                return Err(Error::Params(format!("point {a} repeated")));
            }
            let lam = field.pow(a, (k - 1) as u64);
            if !lams.insert(lam) {
                return Err(Error::Params(format!("point {a} repeats a (k-1)-th power")));
            }
            lambdas.push(lam);
        }
        Ok(PmCode { field: field.clone(), k, points, lambdas })
    }

    pub fn points(&self) -> &[u32] {
        &self.points
    }

    fn w(&self) -> usize {
        self.k - 1
    }

    fn phi(&self, a: u32) -> Vec<u32> {
        (0..self.w()).map(|j| self.field.pow(a, j as u64)).collect()
    }

    /// Unpacks a file into the symmetric matrices `(S_1, S_2)`.
    pub fn unpack(&self, file: &[u32]) -> Result<(Matrix<u32>, Matrix<u32>)> {
        let m = self.file_size();
        if file.len() != m {
            return Err(Error::Length { expected: m, got: file.len() });
        }
        let w = self.w();
        let half = m / 2;
        let build = |off: usize| {
            let mut s = Matrix::filled(w, w, 0u32);
            for p in 0..w {
                for q in p..w {
                    let v = file[off + tri_index(w, p, q)];
                    s.set(p, q, v);
                    s.set(q, p, v);
                }
            }
            s
        };
        Ok((build(0), build(half)))
    }

    pub fn encode_pm(&self, file: &[u32]) -> Result<Codeword> {
        let (s1, s2) = self.unpack(file)?;
        let f = &self.field;
        Ok(self
            .points
            .iter()
            .zip(&self.lambdas)
            .map(|(&a, lam)| {
                let phi = self.phi(a);
                let u = s1.transpose().mul_vec(f, &phi).expect("shape");
                let v = s2.transpose().mul_vec(f, &phi).expect("shape");
                u.iter().zip(&v).map(|(x, y)| f.add(x, &f.mul(lam, y))).collect()
            })
            .collect())
    }

    /// `g_h(a_f)`, computed from helper `h`'s content.
    pub fn helper_symbol(&self, content_h: &[u32], h: usize, f: usize) -> Result<u32> {
        check_node(h, self.n())?;
        check_node(f, self.n())?;
        if h == f {
            return Err(Error::HelperIsFailed(h));
        }
        if content_h.len() != self.w() {
            return Err(Error::Length { expected: self.w(), got: content_h.len() });
        }
        Ok(poly::eval(&self.field, content_h, &self.points[f]))
    }

    fn check_helpers(&self, f: usize, helpers: &[usize]) -> Result<()> {
        check_node(f, self.n())?;
        let mut seen = HashSet::new();
        for &h in helpers {
            check_node(h, self.n())?;
            if h == f {
                return Err(Error::HelperIsFailed(h));
            }
            if !seen.insert(h) {
                return Err(Error::Duplicate(h));
            }
        }
        Ok(())
    }

    /// Accumulate-and-forward repair: interpolates `g_h(a_f)` over the `d` helpers.
    pub fn af_repair(&self, f: usize, symbols: &[(usize, u32)]) -> Result<Vec<u32>> {
        let d = self.d();
        if symbols.len() != d {
            return Err(Error::Params(format!("{} helper symbols, d = {d}", symbols.len())));
        }
        let helpers: Vec<usize> = symbols.iter().map(|s| s.0).collect();
        self.check_helpers(f, &helpers)?;
        let fld = &self.field;
        let rows = helpers
            .iter()
            .map(|&h| (0..d).map(|j| fld.pow(self.points[h], j as u64)).collect())
            .collect();
        let v = Matrix::from_rows(d, rows);
        let rhs = Matrix::from_vec(d, 1, symbols.iter().map(|s| s.1).collect());
        let g = v
            .solve_unique(fld, &rhs)
            .map_err(|_| Error::Params("Vandermonde system on distinct points is singular".into()))?
            .col(0);
        let w = self.w();
        let lam = self.lambdas[f];
        Ok((0..w).map(|j| fld.add(&g[j], &fld.mul(&lam, &g[w + j]))).collect())
    }

    /// Coefficients of the Lagrange basis polynomial of `h` over the points of `helpers`.
    pub fn lagrange_coeffs(&self, h: usize, helpers: &[usize]) -> Vec<u32> {
        let fld = &self.field;
        let ah = self.points[h];
        let mut num = vec![1u32];
        let mut den = 1u32;
        for &i in helpers {
            if i == h {
                continue;
            }
            let ai = self.points[i];
            num = poly::mul(fld, &num, &[fld.neg(&ai), 1]);
            den = fld.mul(&den, &fld.sub(&ah, &ai));
        }
        let inv = fld.inv(&den).expect("distinct points");
        let mut c: Vec<u32> = num.iter().map(|x| fld.mul(x, &inv)).collect();
        c.resize(helpers.len(), 0);
        c
    }

    /// `ξ(f, A) = Σ_{h∈A} g_h(a_f) [l^h_j + a_f^{k-1} l^h_{k-1+j}]_j`, added to `partial`.
    pub fn ip_combine(
        &self,
        partial: Option<&[u32]>,
        subset: &[(usize, u32)],
        f: usize,
        helpers: &[usize],
    ) -> Result<Vec<u32>> {
        if helpers.len() != self.d() {
            return Err(Error::Params(format!("{} helpers, d = {}", helpers.len(), self.d())));
        }
        self.check_helpers(f, helpers)?;
        let fld = &self.field;
        let w = self.w();
        let mut acc = match partial {
            Some(p) if p.len() != w => return Err(Error::Length { expected: w, got: p.len() }),
            Some(p) => p.to_vec(),
            None => vec![0u32; w],
        };
        let lam = self.lambdas[f];
        for &(h, s) in subset {
            if !helpers.contains(&h) {
                return Err(Error::NotAHelper(h));
            }
            let lc = self.lagrange_coeffs(h, helpers);
            for j in 0..w {
                let c = fld.add(&lc[j], &fld.mul(&lam, &lc[w + j]));
                acc[j] = fld.add(&acc[j], &fld.mul(&s, &c));
            }
        }
        Ok(acc)
    }
}

impl LinearRegeneratingCode for PmCode {
    fn field(&self) -> &Field {
        &self.field
    }

    fn n(&self) -> usize {
        self.points.len()
    }

    fn k(&self) -> usize {
        self.k
    }

    fn d(&self) -> usize {
        2 * (self.k - 1)
    }

    fn node_size(&self) -> usize {
        self.k - 1
    }

    fn file_size(&self) -> usize {
        self.k * (self.k - 1)
    }

    fn betas(&self) -> Vec<usize> {
        vec![1; self.d()]
    }

    fn encode(&self, file: &[u32]) -> Result<Codeword> {
        self.encode_pm(file)
    }

    fn repair_map(&self, h: usize, f: usize, rank: usize) -> Result<Matrix<u32>> {
        check_node(h, self.n())?;
        check_node(f, self.n())?;
        if h == f {
            return Err(Error::HelperIsFailed(h));
        }
        if rank == 0 || rank > self.d() {
            return Err(Error::BadAssignment(format!("rank {rank} outside 1..={}", self.d())));
        }
        Ok(Matrix::from_vec(1, self.w(), self.phi(self.points[f])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_packing_is_row_major() {
        let w = 3;
        let order: Vec<usize> = (0..w).flat_map(|p| (p..w).map(move |q| tri_index(w, p, q))).collect();
        assert_eq!(order, (0..6).collect::<Vec<_>>());
        assert_eq!(tri_index(3, 2, 1), tri_index(3, 1, 2));
    }

    #[test]
    fn gf16_cannot_host_seven_nodes_at_k4() {
        // cubes take only five nonzero values in GF(16)
        assert!(PmCode::new(&Field::gf16(), 7, 4).is_err());
        assert!(PmCode::new(&Field::gf256(), 7, 4).is_ok());
    }

    #[test]
    fn rejects_bad_points() {
        let f = Field::gf256();
        assert!(PmCode::with_points(&f, 2, vec![1, 1, 2]).is_err());
        assert!(PmCode::with_points(&f, 2, vec![0, 1, 2]).is_err());
        assert!(PmCode::with_points(&f, 3, vec![1, 2, 3, 4]).is_err());
        assert!(PmCode::new(&f, 5, 1).is_err());
    }
}
