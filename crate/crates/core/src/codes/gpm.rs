//! Generalized product-matrix codes.
//!
//! With `X = F^t`, `Y = F^{k-t+1}` and `L = X ⊗ S^t Y`, a file is a linear
//! functional `φ` on `L`, given by its values on the basis `e_a ⊗ y_J`. Node
//! `i` stores `φ` on `x_i ⊗ (y_i ⊙ S^{t-1} Y)`; to repair `f`, helper `h` sends
//! `φ` on `x_h ⊗ (y_h ⊙ S^{t-2} Y ⊙ y_f)`.

use super::linear::{check_node, solve_combination, Codeword, LinearRegeneratingCode};
use super::sym::{sym_mul, SymBasis};
use crate::error::{Error, Result};
use crate::gf::{apply, Field, FieldOps, Matrix};
use crate::util::combinations;

#[derive(Clone, Debug)]
pub struct GpmCode {
    field: Field,
    k: usize,
    t: usize,
    d: usize,
    xs: Vec<Vec<u32>>,
    ys: Vec<Vec<u32>>,
    deg1: SymBasis,
    deg_tm2: SymBasis,
    deg_tm1: SymBasis,
    deg_t: SymBasis,
    node_gens: Vec<Matrix<u32>>,
}

/// Which of the construction conditions failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GpmDefect {
    XSubsetDeficient(Vec<usize>),
    YSubsetDeficient(Vec<usize>),
    HelperSpanDeficient(Vec<usize>),
    NotReconstructible(Vec<usize>),
}

impl GpmCode {
    /// Builds the code from explicit vectors `x_i ∈ F^t`, `y_i ∈ F^{k-t+1}` and
    /// verifies every construction condition by rank computations.
    pub fn from_vectors(field: &Field, k: usize, t: usize, xs: Vec<Vec<u32>>, ys: Vec<Vec<u32>>) -> Result<Self> {
        if t < 2 || t > k {
            return Err(Error::Params(format!("need 2 <= t <= k, got t = {t}, k = {k}")));
        }
        if ((k - 1) * t) % (t - 1) != 0 {
            return Err(Error::Params(format!("(k-1)t/(t-1) is not an integer for k = {k}, t = {t}")));
        }
        let d = (k - 1) * t / (t - 1);
        let n = xs.len();
        if ys.len() != n {
            return Err(Error::Params("x and y vector counts differ".into()));
        }
        if d + 1 > n {
            return Err(Error::Params(format!("d = {d} needs n > d, n = {n}")));
        }
        let r = k - t + 1;
        for (x, y) in xs.iter().zip(&ys) {
            if x.len() != t || y.len() != r {
                return Err(Error::Params("vector dimension mismatch".into()));
            }
        }
        let deg1 = SymBasis::new(r, 1);
        let deg_tm2 = SymBasis::new(r, t - 2);
        let deg_tm1 = SymBasis::new(r, t - 1);
        let deg_t = SymBasis::new(r, t);
        let mut code = GpmCode {
            field: field.clone(),
            k,
            t,
            d,
            xs,
            ys,
            deg1,
            deg_tm2,
            deg_tm1,
            deg_t,
            node_gens: Vec::new(),
        };
        code.node_gens = (0..n).map(|i| code.node_tensor_rows(i)).collect();
        if let Some(defect) = code.find_defect() {
            return Err(Error::Params(format!("construction conditions fail: {defect:?}")));
        }
        Ok(code)
    }

    /// Points `a_i`, `x_i = (a_i^{e})_{e ∈ x_exps}`, `y_i = (a_i^{e})_{e ∈ y_exps}`.
    pub fn moment_curve(
        field: &Field,
        k: usize,
        t: usize,
        points: &[u32],
        x_exps: &[u64],
        y_exps: &[u64],
    ) -> Result<Self> {
        let xs = points.iter().map(|&a| x_exps.iter().map(|&e| field.pow(a, e)).collect()).collect();
        let ys = points.iter().map(|&a| y_exps.iter().map(|&e| field.pow(a, e)).collect()).collect();
        Self::from_vectors(field, k, t, xs, ys)
    }

    /// The `[7, 5, 6, 6, 3, 30]` instance over GF(16) with `x_i = (1, a_i², a_i⁶)`,
    /// `y_i = (1, a_i, a_i³)` at the first point set, in lexicographic order of
    /// exponents of the primitive element, that satisfies every condition.
    pub fn example_7_5_3() -> Result<Self> {
        let field = Field::gf16();
        let alpha = field.primitive();
        let elems: Vec<u32> = (0..15).map(|e| field.pow(alpha, e)).collect();
        for subset in combinations(elems.len(), 7) {
            let pts: Vec<u32> = subset.iter().map(|&i| elems[i]).collect();
            if let Ok(c) = Self::moment_curve(&field, 5, 3, &pts, &[0, 2, 6], &[0, 1, 3]) {
                return Ok(c);
            }
        }
        Err(Error::Params("no point set in GF(16) satisfies the construction conditions".into()))
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn xs(&self) -> &[Vec<u32>] {
        &self.xs
    }

    pub fn ys(&self) -> &[Vec<u32>] {
        &self.ys
    }

    /// Symbols each helper sends, `dim S^{t-2} Y`.
    pub fn beta(&self) -> usize {
        self.deg_tm2.dim()
    }

    fn dim_t(&self) -> usize {
        self.deg_t.dim()
    }

    /// Coordinates in `L` of `x ⊗ w`, `w ∈ S^t Y`.
    fn tensor(&self, x: &[u32], w: &[u32]) -> Vec<u32> {
        let f = &self.field;
        let mut out = Vec::with_capacity(self.t * self.dim_t());
        for xa in x {
            for wj in w {
                out.push(f.mul(xa, wj));
            }
        }
        out
    }

    fn node_tensor_rows(&self, i: usize) -> Matrix<u32> {
        let rows = (0..self.deg_tm1.dim())
            .map(|j| {
                let w = sym_mul(&self.field, &self.ys[i], &self.deg1, &self.deg_tm1.unit(j), &self.deg_tm1, &self.deg_t);
                self.tensor(&self.xs[i], &w)
            })
            .collect();
        Matrix::from_rows(self.t * self.dim_t(), rows)
    }

    /// Rows spanning `x_i ⊗ (y_i ⊙ S^{t-2} Y)` inside `X ⊗ S^{t-1} Y`.
    fn helper_span_rows(&self, i: usize) -> Vec<Vec<u32>> {
        let f = &self.field;
        (0..self.deg_tm2.dim())
            .map(|j| {
                let w = sym_mul(f, &self.ys[i], &self.deg1, &self.deg_tm2.unit(j), &self.deg_tm2, &self.deg_tm1);
                let mut out = Vec::new();
                for xa in &self.xs[i] {
                    for wj in &w {
                        out.push(f.mul(xa, wj));
                    }
                }
                out
            })
            .collect()
    }

    fn find_defect(&self) -> Option<GpmDefect> {
        let f = &self.field;
        let n = self.xs.len();
        let r = self.k - self.t + 1;
        for s in combinations(n, self.t) {
            let m = Matrix::from_rows(self.t, s.iter().map(|&i| self.xs[i].clone()).collect());
            if m.rank(f) < self.t {
                return Some(GpmDefect::XSubsetDeficient(s));
            }
        }
        for s in combinations(n, r) {
            let m = Matrix::from_rows(r, s.iter().map(|&i| self.ys[i].clone()).collect());
            if m.rank(f) < r {
                return Some(GpmDefect::YSubsetDeficient(s));
            }
        }
        let target = self.t * self.deg_tm1.dim();
        for s in combinations(n, self.d) {
            let rows: Vec<Vec<u32>> = s.iter().flat_map(|&i| self.helper_span_rows(i)).collect();
            if Matrix::from_rows(target, rows).rank(f) < target {
                return Some(GpmDefect::HelperSpanDeficient(s));
            }
        }
        let m = self.file_size();
        for s in combinations(n, self.k) {
            let parts: Vec<Matrix<u32>> = s.iter().map(|&i| self.node_gens[i].clone()).collect();
            if Matrix::vstack(&parts).expect("equal widths").rank(f) < m {
                return Some(GpmDefect::NotReconstructible(s));
            }
        }
        None
    }

    /// Generator of node `i`: rows are the tensors `x_i ⊗ y_i ⊙ m`, `m` a basis of `S^{t-1} Y`.
    pub fn node_generator(&self, i: usize) -> &Matrix<u32> {
        &self.node_gens[i]
    }

    /// `φ` on `x_h ⊗ (y_h ⊙ m' ⊙ y_f)` for `m'` in the basis of `S^{t-2} Y`.
    pub fn helper_symbols(&self, content_h: &[u32], h: usize, f: usize) -> Result<Vec<u32>> {
        let g = self.repair_map(h, f, 1)?;
        apply(&self.field, &g, content_h)
    }

    /// Combining matrices found by expressing each target tensor
    /// `x_f ⊗ y_f ⊙ m` in the helper tensors `x_h ⊗ y_h ⊙ m' ⊙ y_f`.
    pub fn ip_coefficients(&self, f: usize, helpers: &[usize]) -> Result<Vec<Matrix<u32>>> {
        check_node(f, self.n())?;
        if helpers.len() != self.d {
            return Err(Error::Params(format!("{} helpers, d = {}", helpers.len(), self.d)));
        }
        let fld = &self.field;
        let mut helper_tensors = Vec::with_capacity(helpers.len());
        for &h in helpers {
            check_node(h, self.n())?;
            if h == f {
                return Err(Error::HelperIsFailed(h));
            }
            let rows = (0..self.deg_tm2.dim())
                .map(|j| {
                    let m = sym_mul(fld, &self.deg_tm2.unit(j), &self.deg_tm2, &self.ys[f], &self.deg1, &self.deg_tm1);
                    let w = sym_mul(fld, &self.ys[h], &self.deg1, &m, &self.deg_tm1, &self.deg_t);
                    self.tensor(&self.xs[h], &w)
                })
                .collect();
            helper_tensors.push(Matrix::from_rows(self.t * self.dim_t(), rows));
        }
        solve_combination(fld, &helper_tensors, &self.node_gens[f])
            .map_err(|_| Error::Params("helper tensors do not span the failed node's tensors".into()))
    }

    /// `Σ_{h∈A} U_h S_h` with coefficients from [`GpmCode::ip_coefficients`].
    pub fn ip_combine(&self, coeffs: &[Matrix<u32>], helpers: &[usize], subset: &[(usize, Vec<u32>)]) -> Result<Vec<u32>> {
        let fld = &self.field;
        let mut acc = vec![0u32; self.node_size()];
        for (h, s) in subset {
            let p = helpers.iter().position(|x| x == h).ok_or(Error::NotAHelper(*h))?;
            let part = apply(fld, &coeffs[p], s)?;
            for (a, b) in acc.iter_mut().zip(part) {
                *a = fld.add(a, &b);
            }
        }
        Ok(acc)
    }
}

impl LinearRegeneratingCode for GpmCode {
    fn field(&self) -> &Field {
        &self.field
    }

    fn n(&self) -> usize {
        self.xs.len()
    }

    fn k(&self) -> usize {
        self.k
    }

    fn d(&self) -> usize {
        self.d
    }

    fn node_size(&self) -> usize {
        self.deg_tm1.dim()
    }

    fn file_size(&self) -> usize {
        self.t * self.dim_t()
    }

    fn betas(&self) -> Vec<usize> {
        vec![self.beta(); self.d]
    }

    fn encode(&self, file: &[u32]) -> Result<Codeword> {
        if file.len() != self.file_size() {
            return Err(Error::Length { expected: self.file_size(), got: file.len() });
        }
        self.node_gens.iter().map(|g| g.mul_vec(&self.field, file)).collect()
    }

    fn repair_map(&self, h: usize, f: usize, rank: usize) -> Result<Matrix<u32>> {
        check_node(h, self.n())?;
        check_node(f, self.n())?;
        if h == f {
            return Err(Error::HelperIsFailed(h));
        }
        if rank == 0 || rank > self.d {
            return Err(Error::BadAssignment(format!("rank {rank} outside 1..={}", self.d)));
        }
        let fld = &self.field;
        let rows = (0..self.deg_tm2.dim())
            .map(|j| sym_mul(fld, &self.deg_tm2.unit(j), &self.deg_tm2, &self.ys[f], &self.deg1, &self.deg_tm1))
            .collect();
        Ok(Matrix::from_rows(self.deg_tm1.dim(), rows))
    }
}
