//! The wedge-square functor on 4×4 matrices and its derivative.
//!
//! Λ²(k⁴) is always written in the lexicographic basis
//! `e1∧e2, e1∧e3, e1∧e4, e2∧e3, e2∧e4, e3∧e4` (zero-based pairs below).

use super::ExactMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Index pairs `(i, j)`, `i < j`, of the Λ²(k⁴) basis in order.
pub const WEDGE_BASIS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Position of `e_i∧e_j` (`i < j`, zero-based) in [`WEDGE_BASIS`].
pub fn wedge_index(i: usize, j: usize) -> Option<usize> {
    WEDGE_BASIS.iter().position(|&p| p == (i, j))
}

fn require_4x4(m: &ExactMatrix) -> Result<()> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected a 4x4 matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Coordinates of `v ∧ w` in the wedge basis.
pub fn wedge_of(v: &[Scalar], w: &[Scalar]) -> Result<Vec<Scalar>> {
    if v.len() != 4 || w.len() != 4 {
        return Err(Error::DimensionMismatch("wedge of non-4-vectors".into()));
    }
    Ok(WEDGE_BASIS
        .iter()
        .map(|&(i, j)| &(&v[i] * &w[j]) - &(&v[j] * &w[i]))
        .collect())
}

/// Matrix of `v∧w ↦ Av∧Aw`: entry `((i,j),(k,l))` is the 2×2 minor of `A`
/// on rows `i,j` and columns `k,l`.
pub fn wedge_square(a: &ExactMatrix) -> Result<ExactMatrix> {
    require_4x4(a)?;
    let mut entries = Vec::with_capacity(36);
    for &(i, j) in &WEDGE_BASIS {
        for &(k, l) in &WEDGE_BASIS {
            entries.push(&(a.get(i, k) * a.get(j, l)) - &(a.get(i, l) * a.get(j, k)));
        }
    }
    ExactMatrix::new(6, 6, a.field(), entries)
}

/// Matrix of `v∧w ↦ Xv∧w + v∧Xw`, the derivative of [`wedge_square`] at the
/// identity.
pub fn lie_wedge_square(x: &ExactMatrix) -> Result<ExactMatrix> {
    require_4x4(x)?;
    let zero = x.field().zero();
    let pick = |cond: bool, r: usize, c: usize| if cond { x.get(r, c).clone() } else { zero.clone() };
    let mut entries = Vec::with_capacity(36);
    for &(i, j) in &WEDGE_BASIS {
        for &(k, l) in &WEDGE_BASIS {
            let v = pick(l == j, i, k) - pick(l == i, j, k) + pick(k == i, j, l) - pick(k == j, i, l);
            entries.push(v);
        }
    }
    ExactMatrix::new(6, 6, x.field(), entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::FieldDescriptor;

    const Q: FieldDescriptor = FieldDescriptor::Rationals;

    #[test]
    fn identity_and_diagonals() {
        assert!(wedge_square(&ExactMatrix::identity(4, Q)).unwrap().is_identity());
        let d = ExactMatrix::from_i64s(4, 4, Q, &[2, 0, 0, 0, 0, 3, 0, 0, 0, 0, 5, 0, 0, 0, 0, 7]);
        let expected = ExactMatrix::from_i64s(
            6,
            6,
            Q,
            &[
                6, 0, 0, 0, 0, 0, //
                0, 10, 0, 0, 0, 0, //
                0, 0, 14, 0, 0, 0, //
                0, 0, 0, 15, 0, 0, //
                0, 0, 0, 0, 21, 0, //
                0, 0, 0, 0, 0, 35,
            ],
        );
        assert_eq!(wedge_square(&d).unwrap(), expected);
        let lie = lie_wedge_square(&d).unwrap();
        let sums = [5, 7, 9, 8, 10, 12];
        for (k, s) in sums.iter().enumerate() {
            assert_eq!(lie.get(k, k), &Q.from_i64(*s));
        }
        assert!(lie_wedge_square(&ExactMatrix::zeros(4, 4, Q)).unwrap().is_zero());
        assert_eq!(
            lie_wedge_square(&ExactMatrix::identity(4, Q)).unwrap(),
            ExactMatrix::identity(6, Q).scale(&Q.from_i64(2))
        );
    }

    #[test]
    fn columns_are_wedges_of_columns() {
        let a = ExactMatrix::from_i64s(4, 4, Q, &[1, 2, 0, -1, 3, 1, 4, 0, 0, -2, 1, 5, 2, 2, 0, 1]);
        let w = wedge_square(&a).unwrap();
        for (c, &(k, l)) in WEDGE_BASIS.iter().enumerate() {
            assert_eq!(w.column(c), wedge_of(&a.column(k), &a.column(l)).unwrap());
        }
    }

    #[test]
    fn rejects_wrong_shapes() {
        let m = ExactMatrix::identity(3, Q);
        assert!(matches!(wedge_square(&m), Err(Error::DimensionMismatch(_))));
        assert!(matches!(lie_wedge_square(&m), Err(Error::DimensionMismatch(_))));
        assert_eq!(wedge_index(1, 3), Some(4));
        assert_eq!(wedge_index(3, 1), None);
    }
}
