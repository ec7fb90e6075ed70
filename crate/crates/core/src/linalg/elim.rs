//! Elimination: determinants, inverses, row reduction and kernels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::ExactMatrix;
use crate::error::{Error, Result};
use crate::scalar::{FieldDescriptor, Scalar};

/// A subspace presented by the reduced row echelon form of a spanning set.
///
/// The presentation is unique for the subspace: `vectors[i]` has a 1 at
/// `pivots[i]` and zeros at every other pivot position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceBasis {
    field: FieldDescriptor,
    ambient: usize,
    vectors: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl SubspaceBasis {
    pub fn from_spanning(field: FieldDescriptor, ambient: usize, spanning: &[Vec<Scalar>]) -> Result<Self> {
        if spanning.is_empty() {
            return Ok(SubspaceBasis { field, ambient, vectors: Vec::new(), pivots: Vec::new() });
        }
        let m = ExactMatrix::from_rows(field, spanning.to_vec())?;
        if m.cols() != ambient {
            return Err(Error::DimensionMismatch("spanning vector length".into()));
        }
        let (r, pivots) = m.rref();
        let vectors = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        Ok(SubspaceBasis { field, ambient, vectors, pivots })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn vectors(&self) -> &[Vec<Scalar>] {
        &self.vectors
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Basis vectors as the columns of an `ambient × dim` matrix.
    pub fn as_columns(&self) -> ExactMatrix {
        if self.vectors.is_empty() {
            return ExactMatrix::zeros(self.ambient, 0, self.field);
        }
        ExactMatrix::from_columns(self.field, &self.vectors).expect("uniform basis")
    }

    /// Coordinates of `v` in this basis, or `None` when `v` is outside it.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        if v.len() != self.ambient {
            return None;
        }
        let coords: Vec<Scalar> = self.pivots.iter().map(|&p| v[p].clone()).collect();
        let mut rebuilt = vec![self.field.zero(); self.ambient];
        for (c, b) in coords.iter().zip(&self.vectors) {
            for (slot, x) in rebuilt.iter_mut().zip(b) {
                *slot = &*slot + &(c * x);
            }
        }
        (rebuilt == v).then_some(coords)
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.coordinates(v).is_some()
    }
}

impl ExactMatrix {
    /// Exact determinant. Over the rationals rows are cleared to integers
    /// and reduced with fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<Scalar> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "determinant of a {}x{} matrix",
                self.rows(),
                self.cols()
            )));
        }
        match self.field() {
            FieldDescriptor::Rationals => Ok(self.det_bareiss()),
            FieldDescriptor::Prime(_) => Ok(self.det_gauss()),
        }
    }

    fn det_bareiss(&self) -> Scalar {
        let n = self.rows();
        if n == 0 {
            return self.field().one();
        }
        let mut denom = BigInt::one();
        let mut a: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let row = self.row(i);
                let l = row.iter().fold(BigInt::one(), |acc, e| {
                    acc.lcm(e.as_rational().expect("rational entry").denom())
                });
                denom *= &l;
                row.iter()
                    .map(|e| {
                        let q = e.as_rational().expect("rational entry");
                        q.numer() * (&l / q.denom())
                    })
                    .collect()
            })
            .collect();
        let mut sign = 1i8;
        let mut prev = BigInt::one();
        for k in 0..n.saturating_sub(1) {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return self.field().zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        let mut d = a[n - 1][n - 1].clone();
        if sign < 0 {
            d = -d;
        }
        self.field().from_ratio(&d, &denom).expect("nonzero denominator")
    }

    fn det_gauss(&self) -> Scalar {
        let n = self.rows();
        let f = self.field();
        let mut a: Vec<Vec<Scalar>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut det = f.one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
                return f.zero();
            };
            if p != k {
                a.swap(p, k);
                det = -det;
            }
            det = &det * &a[k][k];
            let inv = a[k][k].inv().expect("nonzero pivot");
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let factor = &a[i][k] * &inv;
                for j in k..n {
                    let v = &a[i][j] - &(&factor * &a[k][j]);
                    a[i][j] = v;
                }
            }
        }
        det
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (ExactMatrix, Vec<usize>) {
        let (rows, cols) = (self.rows(), self.cols());
        let mut a: Vec<Vec<Scalar>> = (0..rows).map(|i| self.row(i).to_vec()).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(p, r);
            let inv = a[r][c].inv().expect("nonzero pivot");
            for j in c..cols {
                a[r][j] = &a[r][j] * &inv;
            }
            for i in 0..rows {
                if i == r || a[i][c].is_zero() {
                    continue;
                }
                let factor = a[i][c].clone();
                for j in c..cols {
                    let v = &a[i][j] - &(&factor * &a[r][j]);
                    a[i][j] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        let m = ExactMatrix::from_rows(self.field(), a).unwrap_or_else(|_| ExactMatrix::zeros(rows, cols, self.field()));
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Canonical basis of `{x : self·x = 0}`.
    ///
    /// The raw null vectors (one per free column) are themselves brought to
    /// reduced row echelon form, so the result depends only on the kernel.
    pub fn kernel_basis(&self) -> SubspaceBasis {
        let (r, pivots) = self.rref();
        let f = self.field();
        let free: Vec<usize> = (0..self.cols()).filter(|c| !pivots.contains(c)).collect();
        let raw: Vec<Vec<Scalar>> = free
            .iter()
            .map(|&fc| {
                let mut v = vec![f.zero(); self.cols()];
                v[fc] = f.one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r.get(row, fc);
                }
                v
            })
            .collect();
        SubspaceBasis::from_spanning(f, self.cols(), &raw).expect("well-formed kernel")
    }

    pub fn inverse(&self) -> Result<ExactMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows();
        let aug = ExactMatrix::hstack(&[self, &ExactMatrix::identity(n, self.field())])?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Ok(r.submatrix(&rows, &cols))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows()
    }
}

/// All `T` (as `m×n` matrices) with `T·ρ₁(g) = ρ₂(g)·T` for every pair
/// `(ρ₁(g), ρ₂(g))`, returned as a canonical basis of the solution space.
pub fn intertwiner_space(pairs: &[(ExactMatrix, ExactMatrix)]) -> Result<Vec<ExactMatrix>> {
    let (first_src, first_dst) = pairs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no generators for intertwiner system".into()))?;
    let n = first_src.rows();
    let m = first_dst.rows();
    let f = first_src.field();
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for (src, dst) in pairs {
        if !src.is_square() || !dst.is_square() || src.rows() != n || dst.rows() != m {
            return Err(Error::DimensionMismatch("intertwiner generator shapes".into()));
        }
        if src.field() != f || dst.field() != f {
            return Err(Error::MixedFields(src.field().tag(), dst.field().tag()));
        }
        for i in 0..m {
            for j in 0..n {
                let mut eq = vec![f.zero(); m * n];
                for k in 0..n {
                    eq[i * n + k] = &eq[i * n + k] + src.get(k, j);
                }
                for k in 0..m {
                    eq[k * n + j] = &eq[k * n + j] - dst.get(i, k);
                }
                rows.push(eq);
            }
        }
    }
    let system = ExactMatrix::from_rows(f, rows)?;
    let kernel = system.kernel_basis();
    kernel
        .vectors()
        .iter()
        .map(|v| ExactMatrix::new(m, n, f, v.clone()))
        .collect()
}
