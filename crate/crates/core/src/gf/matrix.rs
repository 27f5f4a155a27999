use serde::{Deserialize, Serialize};

use super::FieldOps;
use crate::error::{Error, Result};

/// Dense row-major matrix. Arithmetic takes the field as an explicit argument.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<E>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data does not match its shape");
        Matrix { rows, cols, data }
    }

    pub fn try_from_vec(rows: usize, cols: usize, data: Vec<E>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for {rows}x{cols}", data.len())));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<E>>) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend(row);
        }
        Matrix { rows: r, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, v: E) -> Self {
        Matrix { rows, cols, data: vec![v; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &E {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: E) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[E] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<E> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c).clone());
            }
        }
        Matrix { rows: self.cols, cols: self.rows, data }
    }

    /// Stacks matrices with equal column counts.
    pub fn vstack(parts: &[Matrix<E>]) -> Result<Self> {
        let cols = parts.first().map_or(0, |m| m.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            if p.cols != cols {
                return Err(Error::Dimension("vstack with differing column counts".into()));
            }
            rows += p.rows;
            data.extend(p.data.iter().cloned());
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Columns `start..start + width`.
    pub fn col_block(&self, start: usize, width: usize) -> Self {
        let mut data = Vec::with_capacity(self.rows * width);
        for r in 0..self.rows {
            data.extend(self.row(r)[start..start + width].iter().cloned());
        }
        Matrix { rows: self.rows, cols: width, data }
    }

    /// Rows `start..start + height`.
    pub fn row_block(&self, start: usize, height: usize) -> Self {
        Matrix {
            rows: height,
            cols: self.cols,
            data: self.data[start * self.cols..(start + height) * self.cols].to_vec(),
        }
    }

    pub fn into_data(self) -> Vec<E> {
        self.data
    }
}

impl<E: Clone + PartialEq> Matrix<E> {
    pub fn zeros<F: FieldOps<Elem = E>>(f: &F, rows: usize, cols: usize) -> Self {
        Matrix::filled(rows, cols, f.zero())
    }

    pub fn identity<F: FieldOps<Elem = E>>(f: &F, n: usize) -> Self {
        let mut m = Self::zeros(f, n, n);
        for i in 0..n {
            m.set(i, i, f.one());
        }
        m
    }

    pub fn mul<F: FieldOps<Elem = E>>(&self, f: &F, rhs: &Matrix<E>) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(f, self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if f.is_zero(a) {
                    continue;
                }
                for c in 0..rhs.cols {
                    let v = f.add(out.get(r, c), &f.mul(a, rhs.get(k, c)));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec<F: FieldOps<Elem = E>>(&self, f: &F, v: &[E]) -> Result<Vec<E>> {
        if v.len() != self.cols {
            return Err(Error::Length { expected: self.cols, got: v.len() });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect())
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref<F: FieldOps<Elem = E>>(&self, f: &F) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !f.is_zero(m.get(r, col))) else {
                continue;
            };
            if p != row {
                for c in 0..m.cols {
                    m.data.swap(p * m.cols + c, row * m.cols + c);
                }
            }
            let inv = f.inv(m.get(row, col)).expect("pivot is nonzero");
            for c in col..m.cols {
                let v = f.mul(m.get(row, c), &inv);
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col).clone();
                if f.is_zero(&factor) {
                    continue;
                }
                for c in col..m.cols {
                    let v = f.sub(m.get(r, c), &f.mul(&factor, m.get(row, c)));
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank<F: FieldOps<Elem = E>>(&self, f: &F) -> usize {
        self.rref(f).1.len()
    }

    /// Some solution `X` of `self · X = b`; free variables are set to zero.
    pub fn solve<F: FieldOps<Elem = E>>(&self, f: &F, b: &Matrix<E>) -> Result<Self> {
        if b.rows != self.rows {
            return Err(Error::Dimension(format!(
                "system with {} rows, right-hand side with {}",
                self.rows, b.rows
            )));
        }
        let n = self.cols;
        let mut aug_data = Vec::with_capacity(self.rows * (n + b.cols));
        for r in 0..self.rows {
            aug_data.extend(self.row(r).iter().cloned());
            aug_data.extend(b.row(r).iter().cloned());
        }
        let aug = Matrix { rows: self.rows, cols: n + b.cols, data: aug_data };
        let (red, pivots) = aug.rref(f);
        if pivots.iter().any(|&p| p >= n) {
            return Err(Error::Inconsistent);
        }
        let mut x = Self::zeros(f, n, b.cols);
        for (i, &p) in pivots.iter().enumerate() {
            for c in 0..b.cols {
                x.set(p, c, red.get(i, n + c).clone());
            }
        }
        Ok(x)
    }

    /// The unique solution of `self · X = b`, or `Singular` if `self` lacks full column rank.
    pub fn solve_unique<F: FieldOps<Elem = E>>(&self, f: &F, b: &Matrix<E>) -> Result<Self> {
        if self.rank(f) < self.cols {
            return Err(Error::Singular);
        }
        self.solve(f, b)
    }

    pub fn invert<F: FieldOps<Elem = E>>(&self, f: &F) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!("inverse of a {}x{} matrix", self.rows, self.cols)));
        }
        self.solve_unique(f, &Self::identity(f, self.rows))
    }

    /// Basis of the right null space, one vector per free column.
    pub fn kernel<F: FieldOps<Elem = E>>(&self, f: &F) -> Vec<Vec<E>> {
        let (red, pivots) = self.rref(f);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![f.zero(); self.cols];
                v[fc] = f.one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = f.neg(red.get(i, fc));
                }
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_is_its_own_inverse() {
        let f = Field::gf16();
        let i = Matrix::identity(&f, 5);
        assert_eq!(i.rank(&f), 5);
        assert_eq!(i.invert(&f).unwrap(), i);
    }

    #[test]
    fn vandermonde_is_invertible() {
        let f = Field::gf16();
        let pts = [2u32, 5, 11];
        let v = Matrix::from_rows(3, pts.iter().map(|&a| (0..3).map(|j| f.pow(a, j)).collect()).collect());
        assert_eq!(v.rank(&f), 3);
        let inv = v.invert(&f).unwrap();
        assert_eq!(v.mul(&f, &inv).unwrap(), Matrix::identity(&f, 3));
    }

    #[test]
    fn outer_product_has_rank_one() {
        let f = Field::prime(7).unwrap();
        let u = Matrix::from_vec(3, 1, vec![1, 4, 2]);
        let v = Matrix::from_vec(1, 4, vec![3, 0, 6, 5]);
        assert_eq!(u.mul(&f, &v).unwrap().rank(&f), 1);
    }

    #[test]
    fn inconsistent_and_singular_systems() {
        let f = Field::prime(7).unwrap();
        let a = Matrix::from_vec(2, 2, vec![1, 2, 2, 4]);
        assert_eq!(a.invert(&f), Err(Error::Singular));
        let b = Matrix::from_vec(2, 1, vec![1, 1]);
        assert_eq!(a.solve(&f, &b), Err(Error::Inconsistent));
        let b = Matrix::from_vec(2, 1, vec![3, 6]);
        let x = a.solve(&f, &b).unwrap();
        assert_eq!(a.mul(&f, &x).unwrap(), b);
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let f = Field::gf256();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = Matrix::from_vec(3, 6, (0..18).map(|_| f.random(&mut rng)).collect());
        let ker = a.kernel(&f);
        assert_eq!(ker.len(), 6 - a.rank(&f));
        for v in ker {
            assert!(a.mul_vec(&f, &v).unwrap().iter().all(|&x| x == 0));
        }
    }
}
