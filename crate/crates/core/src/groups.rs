//! SL(n), Sp₄ and SO(q) as matrix groups with exact membership checks,
//! seeded random elements, and the embeddings between them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::ExactMatrix;
use crate::quadform::QuadraticForm;
use crate::scalar::{FieldDescriptor, Scalar};
use crate::sporadic::{self, FormTable};

/// Which group a matrix is claimed to belong to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GroupDescriptor {
    #[serde(rename = "SL")]
    SpecialLinear { n: usize, field: FieldDescriptor },
    #[serde(rename = "Sp4")]
    Symplectic4 { omega: ExactMatrix },
    #[serde(rename = "SO")]
    SpecialOrthogonal { form: QuadraticForm },
}

/// `J = [[0, 1], [−1, 0]]`.
pub fn standard_j(field: FieldDescriptor) -> ExactMatrix {
    ExactMatrix::from_i64s(2, 2, field, &[0, 1, -1, 0])
}

/// `Ω = diag(J, J)`.
pub fn standard_omega(field: FieldDescriptor) -> ExactMatrix {
    let j = standard_j(field);
    ExactMatrix::block_diag(&[&j, &j]).expect("same field")
}

impl GroupDescriptor {
    pub fn sl(n: usize, field: FieldDescriptor) -> Self {
        GroupDescriptor::SpecialLinear { n, field }
    }

    /// Sp₄ for the standard `Ω = diag(J, J)`.
    pub fn sp4(field: FieldDescriptor) -> Self {
        GroupDescriptor::Symplectic4 { omega: standard_omega(field) }
    }

    pub fn sp4_with(omega: ExactMatrix) -> Result<Self> {
        if omega.rows() != 4 || omega.cols() != 4 {
            return Err(Error::DimensionMismatch("symplectic Gram must be 4x4".into()));
        }
        if !omega.try_add(&omega.transpose())?.is_zero() || !omega.is_invertible() {
            return Err(Error::InvalidArgument("symplectic Gram must be antisymmetric and invertible".into()));
        }
        Ok(GroupDescriptor::Symplectic4 { omega })
    }

    pub fn so(form: QuadraticForm) -> Result<Self> {
        if !form.is_nonsingular() {
            return Err(Error::SingularForm);
        }
        Ok(GroupDescriptor::SpecialOrthogonal { form })
    }

    pub fn dim(&self) -> usize {
        match self {
            GroupDescriptor::SpecialLinear { n, .. } => *n,
            GroupDescriptor::Symplectic4 { .. } => 4,
            GroupDescriptor::SpecialOrthogonal { form } => form.rank(),
        }
    }

    pub fn field(&self) -> FieldDescriptor {
        match self {
            GroupDescriptor::SpecialLinear { field, .. } => *field,
            GroupDescriptor::Symplectic4 { omega } => omega.field(),
            GroupDescriptor::SpecialOrthogonal { form } => form.field(),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("descriptor serializes")
    }
}

/// Evaluates the defining equations of `g` on `m` exactly.
pub fn check_membership(m: &ExactMatrix, g: &GroupDescriptor) -> Result<bool> {
    let n = g.dim();
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for a group of degree {n}",
            m.rows(),
            m.cols()
        )));
    }
    if m.field() != g.field() {
        return Err(Error::MixedFields(m.field().tag(), g.field().tag()));
    }
    Ok(match g {
        GroupDescriptor::SpecialLinear { .. } => m.det()?.is_one(),
        GroupDescriptor::Symplectic4 { omega } => &m.transpose().try_mul(omega)?.try_mul(m)? == omega,
        GroupDescriptor::SpecialOrthogonal { form } => {
            form.pullback(m)?.gram() == form.gram() && m.det()?.is_one()
        }
    })
}

/// A matrix together with a group it has been checked to lie in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ElementRepr")]
pub struct GroupElement {
    group: GroupDescriptor,
    matrix: ExactMatrix,
}

#[derive(Deserialize)]
struct ElementRepr {
    group: GroupDescriptor,
    matrix: ExactMatrix,
}

impl TryFrom<ElementRepr> for GroupElement {
    type Error = Error;

    fn try_from(r: ElementRepr) -> Result<Self> {
        GroupElement::new(r.group, r.matrix)
    }
}

impl GroupElement {
    pub fn new(group: GroupDescriptor, matrix: ExactMatrix) -> Result<Self> {
        if !check_membership(&matrix, &group)? {
            return Err(Error::MembershipFailure(format!("matrix is not in {}", describe(&group))));
        }
        Ok(GroupElement { group, matrix })
    }

    pub fn identity(group: GroupDescriptor) -> Self {
        let matrix = ExactMatrix::identity(group.dim(), group.field());
        GroupElement { group, matrix }
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ExactMatrix {
        self.matrix
    }

    pub fn field(&self) -> FieldDescriptor {
        self.matrix.field()
    }

    /// Product in the common group. Closure is re-checked.
    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.group != other.group {
            return Err(Error::InvalidArgument("product of elements of different groups".into()));
        }
        GroupElement::new(self.group.clone(), self.matrix.try_mul(&other.matrix)?)
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        GroupElement::new(self.group.clone(), self.matrix.inverse()?)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("element serializes")
    }
}

fn describe(g: &GroupDescriptor) -> String {
    match g {
        GroupDescriptor::SpecialLinear { n, field } => format!("SL({n}) over {field}"),
        GroupDescriptor::Symplectic4 { omega } => format!("Sp4 over {}", omega.field()),
        GroupDescriptor::SpecialOrthogonal { form } => format!("SO of a rank-{} form over {}", form.rank(), form.field()),
    }
}

/// Per-sample seed: a pure function of `(seed, index)`, so samples can be
/// drawn in any order.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    splitmix(seed ^ splitmix(index))
}

/// Bound on generator parameters over ℚ, to keep entries small.
const RATIONAL_BOX: i64 = 3;

/// `I + t·E_ij`.
pub fn elementary_transvection(n: usize, i: usize, j: usize, t: Scalar) -> ExactMatrix {
    let mut m = ExactMatrix::identity(n, t.field());
    m.set(i, j, t);
    m
}

/// `I + t·v·vᵗ·Ω`, which preserves `Ω` because `vᵗΩv = 0`.
pub fn symplectic_transvection(omega: &ExactMatrix, v: &[Scalar], t: &Scalar) -> Result<ExactMatrix> {
    let n = omega.rows();
    let row = omega.transpose().mul_vec(v)?; // vᵗΩ as a column
    let mut m = ExactMatrix::identity(n, omega.field());
    for i in 0..n {
        for j in 0..n {
            let add = &(t * &v[i]) * &row[j];
            let e = m.get(i, j) + &add;
            m.set(i, j, e);
        }
    }
    Ok(m)
}

fn random_sl(rng: &mut ChaCha8Rng, n: usize, field: FieldDescriptor, length: usize) -> ExactMatrix {
    let mut m = ExactMatrix::identity(n, field);
    if n < 2 {
        return m;
    }
    for _ in 0..length {
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let t = field.random_nonzero(rng, RATIONAL_BOX);
        m = m.try_mul(&elementary_transvection(n, i, j, t)).expect("square");
    }
    m
}

fn random_sp4(rng: &mut ChaCha8Rng, omega: &ExactMatrix, length: usize) -> ExactMatrix {
    let field = omega.field();
    let mut m = ExactMatrix::identity(4, field);
    for _ in 0..length {
        let v = loop {
            let v: Vec<Scalar> = (0..4).map(|_| field.random(rng, 1)).collect();
            if v.iter().any(|c| !c.is_zero()) {
                break v;
            }
        };
        let t = field.random_nonzero(rng, 2);
        let s = symplectic_transvection(omega, &v, &t).expect("4x4");
        m = m.try_mul(&s).expect("square");
    }
    m
}

/// A product of `length` seeded random elementary generators of `g`.
///
/// SL uses transvections `I + t·E_ij`, Sp₄ symplectic transvections. SO is
/// supported for the four sporadic Grams of ranks 3 to 6 (see
/// [`FormTable`]), by pushing random SL₂, SL₂×SL₂, Sp₄ or SL₄ elements
/// through the sporadic maps.
pub fn random_element(g: &GroupDescriptor, seed: u64, length: usize) -> Result<GroupElement> {
    if length == 0 {
        return Err(Error::InvalidArgument("random_element needs length >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = g.field();
    match g {
        GroupDescriptor::SpecialLinear { n, .. } => GroupElement::new(g.clone(), random_sl(&mut rng, *n, field, length)),
        GroupDescriptor::Symplectic4 { omega } => GroupElement::new(g.clone(), random_sp4(&mut rng, omega, length)),
        GroupDescriptor::SpecialOrthogonal { form } => {
            let rank = form.rank();
            if !(3..=6).contains(&rank) {
                return Err(Error::UnsupportedGroup(format!("random SO elements for rank {rank}")));
            }
            let table = FormTable::new(field);
            let sl2 = GroupDescriptor::sl(2, field);
            let image = if form.gram() == &table.g3 {
                sporadic::spin3_map(&GroupElement::new(sl2, random_sl(&mut rng, 2, field, length))?)?
            } else if form.gram() == &table.g4 {
                let a = GroupElement::new(sl2.clone(), random_sl(&mut rng, 2, field, length))?;
                let b = GroupElement::new(sl2, random_sl(&mut rng, 2, field, length))?;
                sporadic::spin4_map(&a, &b)?
            } else if form.gram() == &table.g5 {
                let omega = standard_omega(field);
                let s = random_sp4(&mut rng, &omega, length);
                sporadic::spin5_map(&GroupElement::new(GroupDescriptor::sp4(field), s)?)?
            } else if form.gram() == &table.g6 {
                sporadic::spin6_map(&GroupElement::new(GroupDescriptor::sl(4, field), random_sl(&mut rng, 4, field, length))?)?
            } else {
                return Err(Error::UnsupportedGroup(
                    "random SO elements only for the sporadic Grams G3, G4, G5, G6".into(),
                ));
            };
            GroupElement::new(g.clone(), image.into_matrix())
        }
    }
}

fn require_sl2(a: &GroupElement) -> Result<()> {
    match a.group() {
        GroupDescriptor::SpecialLinear { n: 2, .. } => Ok(()),
        other => Err(Error::InvalidArgument(format!("expected an SL(2) element, got {}", describe(other)))),
    }
}

/// `(A, B) ↦ diag(A, B)` in Sp₄ for `Ω = diag(J, J)`.
pub fn long_root_embedding(a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    require_sl2(a)?;
    require_sl2(b)?;
    let m = ExactMatrix::block_diag(&[a.matrix(), b.matrix()])?;
    GroupElement::new(GroupDescriptor::sp4(a.field()), m)
}

/// `A ↦ (A, A)`.
pub fn diagonal_embedding(a: &GroupElement) -> (GroupElement, GroupElement) {
    (a.clone(), a.clone())
}

/// `Sp₄ ↪ SL₄`.
pub fn symplectic_to_special_linear(s: &GroupElement) -> Result<GroupElement> {
    GroupElement::new(GroupDescriptor::sl(4, s.field()), s.matrix().clone())
}

/// Levi element of the Siegel parabolic: `g` on `(e1, e3)` and `g⁻ᵗ` on
/// `(e2, e4)`. Lies in Sp₄ for `Ω = diag(J, J)` whenever `g` is invertible.
pub fn siegel_levi(g: &ExactMatrix) -> Result<ExactMatrix> {
    let field = g.field();
    let h = g.inverse()?.transpose();
    let mut m = ExactMatrix::zeros(4, 4, field);
    for (r, &i) in [0usize, 2].iter().enumerate() {
        for (c, &j) in [0usize, 2].iter().enumerate() {
            m.set(i, j, g.get(r, c).clone());
            m.set(i + 1, j + 1, h.get(r, c).clone());
        }
    }
    Ok(m)
}

/// One factor of the pinned Weyl factorization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryFactor {
    /// `upper` is `x(t) = [[1, t], [0, 1]]`, `lower` is `[[1, 0], [t, 1]]`.
    pub root: String,
    pub parameter: i64,
    pub matrix: ExactMatrix,
}

/// `w = [[0, I], [−I, 0]]`: exchanges the two symplectic planes, with
/// `w·diag(A, B)·w⁻¹ = diag(B, A)` and `w² = −I`.
pub fn weyl_swap_conjugator(field: FieldDescriptor) -> GroupElement {
    let w = ExactMatrix::from_i64s(4, 4, field, &[0, 0, 1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, -1, 0, 0]);
    GroupElement::new(GroupDescriptor::sp4(field), w).expect("w preserves diag(J, J)")
}

/// `w = L(x(1))·L(x₋(−1))·L(x(1))` with `L` the Siegel Levi embedding;
/// each factor is an elementary symplectic unipotent.
pub fn weyl_factorization(field: FieldDescriptor) -> Vec<ElementaryFactor> {
    let upper = |t: i64| ExactMatrix::from_i64s(2, 2, field, &[1, t, 0, 1]);
    let lower = |t: i64| ExactMatrix::from_i64s(2, 2, field, &[1, 0, t, 1]);
    [("upper", 1), ("lower", -1), ("upper", 1)]
        .into_iter()
        .map(|(root, t)| {
            let g = if root == "upper" { upper(t) } else { lower(t) };
            ElementaryFactor {
                root: root.to_string(),
                parameter: t,
                matrix: siegel_levi(&g).expect("unipotent is invertible"),
            }
        })
        .collect()
}
