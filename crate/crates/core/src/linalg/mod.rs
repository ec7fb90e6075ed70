//! Dense exact matrices over a single field.

mod elim;
mod wedge;

pub use elim::{intertwiner_space, SubspaceBasis};
pub use wedge::{lie_wedge_square, wedge_index, wedge_of, wedge_square, WEDGE_BASIS};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{FieldDescriptor, Scalar};

/// Row-major matrix whose entries all share one field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    field: FieldDescriptor,
    entries: Vec<Scalar>,
}

/// The three matrix operations exposed through [`mat_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatOp {
    Mul,
    Add,
    Sub,
}

pub fn mat_arith(a: &ExactMatrix, b: &ExactMatrix, op: MatOp) -> Result<ExactMatrix> {
    match op {
        MatOp::Mul => a.try_mul(b),
        MatOp::Add => a.try_add(b),
        MatOp::Sub => a.try_sub(b),
    }
}

impl ExactMatrix {
    pub fn new(rows: usize, cols: usize, field: FieldDescriptor, entries: Vec<Scalar>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| e.field() != field) {
            return Err(Error::MixedFields(bad.field().tag(), field.tag()));
        }
        Ok(ExactMatrix { rows, cols, field, entries })
    }

    pub fn zeros(rows: usize, cols: usize, field: FieldDescriptor) -> Self {
        ExactMatrix {
            rows,
            cols,
            field,
            entries: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(n: usize, field: FieldDescriptor) -> Self {
        let mut m = Self::zeros(n, n, field);
        for i in 0..n {
            m.entries[i * n + i] = field.one();
        }
        m
    }

    /// Builds a matrix from small integers, row-major.
    pub fn from_i64s(rows: usize, cols: usize, field: FieldDescriptor, values: &[i64]) -> Self {
        assert_eq!(values.len(), rows * cols, "entry count");
        ExactMatrix {
            rows,
            cols,
            field,
            entries: values.iter().map(|&v| field.from_i64(v)).collect(),
        }
    }

    pub fn from_rows(field: FieldDescriptor, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, field, rows.into_iter().flatten().collect())
    }

    pub fn from_columns(field: FieldDescriptor, columns: &[Vec<Scalar>]) -> Result<Self> {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|col| col.len() != r) {
            return Err(Error::DimensionMismatch("ragged columns".into()));
        }
        let mut entries = Vec::with_capacity(r * c);
        for i in 0..r {
            for col in columns {
                entries.push(col[i].clone());
            }
        }
        Self::new(r, c, field, entries)
    }

    pub fn diagonal(field: FieldDescriptor, diag: &[Scalar]) -> Result<Self> {
        let n = diag.len();
        let mut m = Self::zeros(n, n, field);
        for (i, d) in diag.iter().enumerate() {
            if d.field() != field {
                return Err(Error::MixedFields(d.field().tag(), field.tag()));
            }
            m.entries[i * n + i] = d.clone();
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    /// Panics when `value` is over another field.
    pub fn set(&mut self, i: usize, j: usize, value: Scalar) {
        assert_eq!(value.field(), self.field, "entry field");
        self.entries[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        ExactMatrix {
            rows: self.cols,
            cols: self.rows,
            field: self.field,
            entries,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        self.map(|e| e * s)
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::MixedFields(self.field.tag(), other.field.tag()));
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols, self.field);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.entries[idx] = &out.entries[idx] + &(a * b);
                }
            }
        }
        Ok(out)
    }

    fn zip(&self, other: &Self, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Result<Self> {
        self.check_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(self.field.zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// Bilinear pairing `xᵗ · self · y`.
    pub fn pair(&self, x: &[Scalar], y: &[Scalar]) -> Result<Scalar> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch("left vector length".into()));
        }
        let my = self.mul_vec(y)?;
        Ok(x.iter().zip(&my).fold(self.field.zero(), |acc, (a, b)| acc + a * b))
    }

    /// Block-diagonal matrix with the given blocks in order.
    pub fn block_diag(blocks: &[&ExactMatrix]) -> Result<Self> {
        let field = blocks
            .first()
            .map(|b| b.field)
            .ok_or_else(|| Error::DimensionMismatch("no blocks".into()))?;
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols, field);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            if b.field != field {
                return Err(Error::MixedFields(b.field.tag(), field.tag()));
            }
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.entries[(r0 + i) * cols + c0 + j] = b.get(i, j).clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        Ok(out)
    }

    /// Side-by-side concatenation.
    pub fn hstack(blocks: &[&ExactMatrix]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no blocks".into()))?;
        let mut columns = Vec::new();
        for b in blocks {
            first.check_field(b)?;
            if b.rows != first.rows {
                return Err(Error::DimensionMismatch("hstack row counts differ".into()));
            }
            columns.extend((0..b.cols).map(|j| b.column(j)));
        }
        Self::from_columns(first.field, &columns)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                entries.push(self.get(i, j).clone());
            }
        }
        ExactMatrix {
            rows: rows.len(),
            cols: cols.len(),
            field: self.field,
            entries,
        }
    }

    /// Kronecker product; with row-major vectorization,
    /// `vec(A·M·C) = kron(A, Cᵗ)·vec(M)`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols, self.field);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.entries[(i * other.rows + k) * cols + j * other.cols + l] = a * other.get(k, l);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Commutator `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    pub fn trace(&self) -> Result<Scalar> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("trace of a non-square matrix".into()));
        }
        Ok((0..self.rows).fold(self.field.zero(), |acc, i| acc + self.get(i, i)))
    }

    /// Row-major entries as one flat vector.
    pub fn flatten(&self) -> Vec<Scalar> {
        self.entries.clone()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("matrix serializes")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Wire form: `{"rows", "cols", "field", "entries": [row-major scalars]}`.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    field: String,
    entries: Vec<Value>,
}

impl From<ExactMatrix> for MatrixRepr {
    fn from(m: ExactMatrix) -> Self {
        MatrixRepr {
            rows: m.rows,
            cols: m.cols,
            field: m.field.tag(),
            entries: m.entries.iter().map(Scalar::to_json).collect(),
        }
    }
}

impl TryFrom<MatrixRepr> for ExactMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        let field: FieldDescriptor = r.field.parse()?;
        let entries = r
            .entries
            .iter()
            .map(|v| Scalar::from_json(v, field))
            .collect::<Result<Vec<_>>>()?;
        ExactMatrix::new(r.rows, r.cols, field, entries)
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, e) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

// Operator forms panic on shape or field mismatch, like other dense matrix
// libraries; use the `try_*` methods when inputs are untrusted.
impl Mul for &ExactMatrix {
    type Output = ExactMatrix;
    fn mul(self, rhs: &ExactMatrix) -> ExactMatrix {
        self.try_mul(rhs).expect("matrix product")
    }
}

impl Add for &ExactMatrix {
    type Output = ExactMatrix;
    fn add(self, rhs: &ExactMatrix) -> ExactMatrix {
        self.try_add(rhs).expect("matrix sum")
    }
}

impl Sub for &ExactMatrix {
    type Output = ExactMatrix;
    fn sub(self, rhs: &ExactMatrix) -> ExactMatrix {
        self.try_sub(rhs).expect("matrix difference")
    }
}

impl Neg for &ExactMatrix {
    type Output = ExactMatrix;
    fn neg(self) -> ExactMatrix {
        self.map(|e| -e)
    }
}
