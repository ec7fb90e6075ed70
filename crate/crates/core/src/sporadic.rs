//! The low-rank sporadic isogenies as matrix functors
//!
//! * `SL₄ → SO(G6)` by the wedge square,
//! * `Sp₄ → SO(G5)` by restricting the wedge square to `ker ω`,
//! * `SL₂ × SL₂ → SO(G4)` by `M ↦ A·M·B⁻¹` on 2×2 matrices,
//! * `SL₂ → SO(G3)` by conjugation on trace-0 matrices,
//!
//! together with one verifier per compatibility statement between them.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::groups::{
    self, derive_seed, long_root_embedding, random_element, standard_omega, symplectic_to_special_linear,
    weyl_factorization, weyl_swap_conjugator, GroupDescriptor, GroupElement,
};
use crate::linalg::{intertwiner_space, ExactMatrix, lie_wedge_square, wedge_of, wedge_square, SubspaceBasis, WEDGE_BASIS};
use crate::quadform::QuadraticForm;
use crate::scalar::{FieldDescriptor, Scalar};

/// Fields on which Witt indices of the sporadic forms are always checked.
pub const WITT_FIELDS: [u64; 3] = [5, 7, 109];

/// Generator length used for random group elements in the verifiers.
const WORD_LENGTH: usize = 6;

/// The fixed Grams and basis maps, over one field.
///
/// * `g6`: determinant form on Λ²(k⁴), wedge basis `e12, e13, e14, e23, e24, e34`.
/// * `omega_row`: `ω(v∧w) = vᵗΩw` for `Ω = diag(J, J)`.
/// * `kernel`: canonical (RREF) basis of `ker ω`; `g5` is `g6` restricted to it.
/// * `g4`: `−tr(X·W·Yᵗ·W⁻¹)` on 2×2 matrices, basis `E11, E12, E21, E22`.
/// * `g3`: `tr(X·Y)` on trace-0 matrices, basis `E12, H, E21`.
/// * `stab45`: 6×4, columns the images of `E11, E12, E21, E22`, namely
///   `e4∧e1, e1∧e3, e4∧e2, e2∧e3`.
/// * `complement`: `e12 + e34`, spanning a line orthogonal to `ker ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormTable {
    pub field: FieldDescriptor,
    pub g6: ExactMatrix,
    pub omega_row: ExactMatrix,
    pub kernel: SubspaceBasis,
    pub g5: ExactMatrix,
    pub g4: ExactMatrix,
    pub g3: ExactMatrix,
    pub stab45: ExactMatrix,
    pub complement: Vec<Scalar>,
}

impl FormTable {
    pub fn new(field: FieldDescriptor) -> Self {
        let mut g6 = ExactMatrix::zeros(6, 6, field);
        for (a, b, v) in [(0, 5, 1), (1, 4, -1), (2, 3, 1)] {
            g6.set(a, b, field.from_i64(v));
            g6.set(b, a, field.from_i64(v));
        }
        let omega = standard_omega(field);
        let omega_row = ExactMatrix::new(
            1,
            6,
            field,
            WEDGE_BASIS.iter().map(|&(i, j)| omega.get(i, j).clone()).collect(),
        )
        .expect("six entries");
        let kernel = omega_row.kernel_basis();
        let k = kernel.as_columns();
        let g5 = k.transpose().try_mul(&g6).and_then(|m| m.try_mul(&k)).expect("shapes agree");
        let g4 = ExactMatrix::from_i64s(4, 4, field, &[0, 0, 0, -1, 0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0, 0]);
        let g3 = ExactMatrix::from_i64s(3, 3, field, &[0, 0, 1, 0, 2, 0, 1, 0, 0]);
        // one-based (i, j) meaning e_i∧e_j, in the order E11, E12, E21, E22
        let images = [(4, 1), (1, 3), (4, 2), (2, 3)];
        let columns: Vec<Vec<Scalar>> = images
            .iter()
            .map(|&(i, j)| wedge_of(&unit(field, 4, i - 1), &unit(field, 4, j - 1)).expect("4-vectors"))
            .collect();
        let stab45 = ExactMatrix::from_columns(field, &columns).expect("6x4");
        let complement = add_vec(&wedge_unit(field, 0, 1), &wedge_unit(field, 2, 3));
        FormTable { field, g6, omega_row, kernel, g5, g4, g3, stab45, complement }
    }

    pub fn form(&self, gram: &ExactMatrix) -> QuadraticForm {
        QuadraticForm::new(gram.clone()).expect("table Grams are symmetric")
    }

    pub fn so6(&self) -> GroupDescriptor {
        GroupDescriptor::so(self.form(&self.g6)).expect("nonsingular")
    }

    pub fn so5(&self) -> GroupDescriptor {
        GroupDescriptor::so(self.form(&self.g5)).expect("nonsingular")
    }

    pub fn so4(&self) -> GroupDescriptor {
        GroupDescriptor::so(self.form(&self.g4)).expect("nonsingular")
    }

    pub fn so3(&self) -> GroupDescriptor {
        GroupDescriptor::so(self.form(&self.g3)).expect("nonsingular")
    }

    /// `[K | c]`: kernel basis of ω followed by the complement vector.
    pub fn stab56_basis(&self) -> ExactMatrix {
        let mut cols: Vec<Vec<Scalar>> = self.kernel.vectors().to_vec();
        cols.push(self.complement.clone());
        ExactMatrix::from_columns(self.field, &cols).expect("6x6")
    }

    /// The six vectors `e12 ± e34, e13 ± e24, e14 ± e23`.
    pub fn orthogonal_basis(&self) -> Vec<Vec<Scalar>> {
        let f = self.field;
        let mut out = Vec::new();
        for ((a, b), (c, d)) in [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))] {
            let u = wedge_unit(f, a, b);
            let v = wedge_unit(f, c, d);
            out.push(add_vec(&u, &v));
            out.push(sub_vec(&u, &v));
        }
        out
    }
}

fn unit(field: FieldDescriptor, n: usize, i: usize) -> Vec<Scalar> {
    let mut v = vec![field.zero(); n];
    v[i] = field.one();
    v
}

/// `e_i∧e_j` (zero-based) in wedge coordinates.
pub fn wedge_unit(field: FieldDescriptor, i: usize, j: usize) -> Vec<Scalar> {
    wedge_of(&unit(field, 4, i), &unit(field, 4, j)).expect("4-vectors")
}

fn add_vec(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub_vec(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn vec_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(Scalar::to_json).collect())
}

/// Gram of `⟨v₁∧w₁, v₂∧w₂⟩ = det(v₁, w₁, v₂, w₂)`, computed from the
/// definition.
pub fn determinant_gram(field: FieldDescriptor) -> ExactMatrix {
    let mut g = ExactMatrix::zeros(6, 6, field);
    for (a, &(i, j)) in WEDGE_BASIS.iter().enumerate() {
        for (b, &(k, l)) in WEDGE_BASIS.iter().enumerate() {
            let cols: Vec<Vec<Scalar>> = [i, j, k, l].iter().map(|&c| unit(field, 4, c)).collect();
            let d = ExactMatrix::from_columns(field, &cols).expect("4x4").det().expect("square");
            g.set(a, b, d);
        }
    }
    g
}

fn mat2_basis(field: FieldDescriptor) -> Vec<ExactMatrix> {
    (0..4)
        .map(|k| {
            let mut m = ExactMatrix::zeros(2, 2, field);
            m.set(k / 2, k % 2, field.one());
            m
        })
        .collect()
}

/// Gram of `−tr(X·W·Yᵗ·W⁻¹)` (or with `W` and `W⁻¹` exchanged) on 2×2
/// matrices, `W = [[0, −1], [1, 0]]`, computed from the definition.
pub fn modified_trace_gram(field: FieldDescriptor, swap_w: bool) -> ExactMatrix {
    let w = ExactMatrix::from_i64s(2, 2, field, &[0, -1, 1, 0]);
    let winv = w.inverse().expect("invertible");
    let (l, r) = if swap_w { (&winv, &w) } else { (&w, &winv) };
    let basis = mat2_basis(field);
    let mut g = ExactMatrix::zeros(4, 4, field);
    for (a, x) in basis.iter().enumerate() {
        for (b, y) in basis.iter().enumerate() {
            let m = x.try_mul(l).and_then(|m| m.try_mul(&y.transpose())).and_then(|m| m.try_mul(r)).expect("2x2");
            g.set(a, b, -m.trace().expect("square"));
        }
    }
    g
}

/// `(E12, H, E21)` as 2×2 matrices.
fn sl2_basis(field: FieldDescriptor) -> [ExactMatrix; 3] {
    [
        ExactMatrix::from_i64s(2, 2, field, &[0, 1, 0, 0]),
        ExactMatrix::from_i64s(2, 2, field, &[1, 0, 0, -1]),
        ExactMatrix::from_i64s(2, 2, field, &[0, 0, 1, 0]),
    ]
}

/// Coordinates of a trace-0 matrix in `(E12, H, E21)`.
fn sl2_coords(m: &ExactMatrix) -> Vec<Scalar> {
    vec![m.get(0, 1).clone(), m.get(0, 0).clone(), m.get(1, 0).clone()]
}

/// Gram of `tr(X·Y)` on `(E12, H, E21)`, from the definition.
pub fn trace_gram(field: FieldDescriptor) -> ExactMatrix {
    let basis = sl2_basis(field);
    let mut g = ExactMatrix::zeros(3, 3, field);
    for (a, x) in basis.iter().enumerate() {
        for (b, y) in basis.iter().enumerate() {
            g.set(a, b, x.try_mul(y).and_then(|m| m.trace()).expect("2x2"));
        }
    }
    g
}

/// The inclusion of trace-0 matrices into 2×2 matrices, `(E12, H, E21) →
/// (E11, E12, E21, E22)` coordinates.
pub fn trace_zero_inclusion(field: FieldDescriptor) -> ExactMatrix {
    ExactMatrix::from_i64s(4, 3, field, &[0, 1, 0, 1, 0, 0, 0, 0, 1, 0, -1, 0])
}

fn expect_group(g: &GroupElement, want: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("expected an {want} element, got {:?}", g.group())))
    }
}

fn is_sl(g: &GroupElement, n: usize) -> bool {
    matches!(g.group(), GroupDescriptor::SpecialLinear { n: m, .. } if *m == n)
}

/// `A ↦ Λ²A`.
pub fn spin6_map(a: &GroupElement) -> Result<GroupElement> {
    expect_group(a, "SL(4)", is_sl(a, 4))?;
    let table = FormTable::new(a.field());
    GroupElement::new(table.so6(), wedge_square(a.matrix())?)
}

/// Λ²S on the canonical kernel basis of ω.
pub fn spin5_map(s: &GroupElement) -> Result<GroupElement> {
    let f = s.field();
    expect_group(s, "Sp4 (diag(J, J))", s.group() == &GroupDescriptor::sp4(f))?;
    let table = FormTable::new(f);
    let m = restrict_to_kernel(&table, &wedge_square(s.matrix())?)?;
    GroupElement::new(table.so5(), m)
}

/// Matrix of `L` restricted to the invariant subspace `ker ω`, in the
/// kernel basis.
fn restrict_to_kernel(table: &FormTable, l: &ExactMatrix) -> Result<ExactMatrix> {
    let image = l.try_mul(&table.kernel.as_columns())?;
    let cols = (0..image.cols())
        .map(|j| {
            table
                .kernel
                .coordinates(&image.column(j))
                .ok_or_else(|| Error::MembershipFailure("image leaves ker ω".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    ExactMatrix::from_columns(table.field, &cols)
}

/// Matrix of `M ↦ A·M·B⁻¹` on `(E11, E12, E21, E22)`: `A ⊗ (B⁻¹)ᵗ`.
pub fn spin4_matrix(a: &ExactMatrix, b: &ExactMatrix) -> Result<ExactMatrix> {
    a.kron(&b.inverse()?.transpose())
}

pub fn spin4_map(a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    expect_group(a, "SL(2)", is_sl(a, 2))?;
    expect_group(b, "SL(2)", is_sl(b, 2))?;
    let table = FormTable::new(a.field());
    GroupElement::new(table.so4(), spin4_matrix(a.matrix(), b.matrix())?)
}

/// Matrix of `X ↦ A·X·A⁻¹` on `(E12, H, E21)`.
pub fn spin3_matrix(a: &ExactMatrix) -> Result<ExactMatrix> {
    let ainv = a.inverse()?;
    let cols = sl2_basis(a.field())
        .iter()
        .map(|x| Ok(sl2_coords(&a.try_mul(x)?.try_mul(&ainv)?)))
        .collect::<Result<Vec<_>>>()?;
    ExactMatrix::from_columns(a.field(), &cols)
}

pub fn spin3_map(a: &GroupElement) -> Result<GroupElement> {
    expect_group(a, "SL(2)", is_sl(a, 2))?;
    let table = FormTable::new(a.field());
    GroupElement::new(table.so3(), spin3_matrix(a.matrix())?)
}

/// Derivative of [`spin3_matrix`] at `I`: `ad X` on `(E12, H, E21)`.
pub fn d_spin3(x: &ExactMatrix) -> Result<ExactMatrix> {
    let cols = sl2_basis(x.field())
        .iter()
        .map(|y| Ok(sl2_coords(&x.commutator(y)?)))
        .collect::<Result<Vec<_>>>()?;
    ExactMatrix::from_columns(x.field(), &cols)
}

/// Derivative of [`spin4_matrix`] at `(I, I)`: `X ⊗ I − I ⊗ Yᵗ`.
pub fn d_spin4(x: &ExactMatrix, y: &ExactMatrix) -> Result<ExactMatrix> {
    let id = ExactMatrix::identity(2, x.field());
    x.kron(&id)?.try_sub(&id.kron(&y.transpose())?)
}

/// Derivative of the spin5 map: `dΛ²(X)` on `ker ω`.
pub fn d_spin5(x: &ExactMatrix) -> Result<ExactMatrix> {
    restrict_to_kernel(&FormTable::new(x.field()), &lie_wedge_square(x)?)
}

/// Traceless basis of sl₄: off-diagonal `E_ij` then `E_ii − E_{i+1,i+1}`.
pub fn sl_basis(n: usize, field: FieldDescriptor) -> Vec<ExactMatrix> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut m = ExactMatrix::zeros(n, n, field);
                m.set(i, j, field.one());
                out.push(m);
            }
        }
    }
    for i in 0..n - 1 {
        let mut m = ExactMatrix::zeros(n, n, field);
        m.set(i, i, field.one());
        m.set(i + 1, i + 1, -field.one());
        out.push(m);
    }
    out
}

/// Basis of sp₄ = `{X : XᵗΩ + ΩX = 0}`.
pub fn sp4_lie_basis(field: FieldDescriptor) -> Vec<ExactMatrix> {
    let omega = standard_omega(field);
    let cols: Vec<Vec<Scalar>> = (0..16)
        .map(|k| {
            let mut e = ExactMatrix::zeros(4, 4, field);
            e.set(k / 4, k % 4, field.one());
            let s = e.transpose().try_mul(&omega).unwrap().try_add(&omega.try_mul(&e).unwrap()).unwrap();
            s.flatten()
        })
        .collect();
    let system = ExactMatrix::from_columns(field, &cols).expect("16x16");
    system
        .kernel_basis()
        .vectors()
        .iter()
        .map(|v| ExactMatrix::new(4, 4, field, v.clone()).expect("16 entries"))
        .collect()
}

/// Rank of the linear map `X ↦ d(X)` on the span of `basis`.
fn derivative_rank(basis: &[ExactMatrix], d: impl Fn(&ExactMatrix) -> Result<ExactMatrix>) -> Result<usize> {
    let field = basis[0].field();
    let cols = basis.iter().map(|x| Ok(d(x)?.flatten())).collect::<Result<Vec<_>>>()?;
    Ok(ExactMatrix::from_columns(field, &cols)?.rank())
}

/// First-order term of `t ↦ F(t)` when `F` is quadratic in `t`:
/// `F'(0) = (4·F(1) − F(2) − 3·F(0)) / 2`.
fn first_order(f0: &ExactMatrix, f1: &ExactMatrix, f2: &ExactMatrix) -> Result<ExactMatrix> {
    let field = f0.field();
    let four = f1.scale(&field.from_i64(4));
    let three = f0.scale(&field.from_i64(3));
    Ok(four.try_sub(f2)?.try_sub(&three)?.scale(&field.from_i64(2).inv()?))
}

/// Parameters shared by the verifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub field: FieldDescriptor,
    pub seed: u64,
    pub trials: usize,
}

impl VerifyConfig {
    pub fn new(field: FieldDescriptor, seed: u64, trials: usize) -> Self {
        VerifyConfig { field, seed, trials }
    }

    fn certificate(&self, check: &str) -> Certificate {
        Certificate::pass(check)
            .with_field(self.field)
            .with_seed(self.seed)
            .with_samples(self.trials as u64)
            .ledger("q_convention", "q(x) = B(x,x)/2, Gram stores B")
    }

    fn sl2(&self, index: u64, stream: u64) -> Result<GroupElement> {
        random_element(&GroupDescriptor::sl(2, self.field), derive_seed(self.seed, 4 * index + stream), WORD_LENGTH)
    }

    fn sp4(&self, index: u64, stream: u64) -> Result<GroupElement> {
        random_element(&GroupDescriptor::sp4(self.field), derive_seed(self.seed, 4 * index + stream), WORD_LENGTH)
    }

    fn sl4(&self, index: u64, stream: u64) -> Result<GroupElement> {
        random_element(&GroupDescriptor::sl(4, self.field), derive_seed(self.seed, 4 * index + stream), 2 * WORD_LENGTH)
    }
}

/// Runs `check` on every sample index and returns the first failure in
/// index order. Samples are independent, so they run in parallel.
pub(crate) fn first_failure<F>(count: usize, check: F) -> Result<Option<Value>>
where
    F: Fn(u64) -> Result<Option<Value>> + Sync,
{
    let results: Vec<Result<Option<Value>>> = (0..count as u64).into_par_iter().map(&check).collect();
    for r in results {
        if let Some(v) = r? {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

fn finish(cert: Certificate, failure: Option<Value>) -> Certificate {
    match failure {
        Some(ce) => cert.into_failure(ce),
        None => cert,
    }
}

fn elementary_sl2(field: FieldDescriptor) -> Vec<ExactMatrix> {
    let two = field.from_i64(2);
    vec![
        ExactMatrix::from_i64s(2, 2, field, &[1, 1, 0, 1]),
        ExactMatrix::from_i64s(2, 2, field, &[1, 0, 1, 1]),
        ExactMatrix::diagonal(field, &[two.clone(), two.inv().expect("odd characteristic")]).expect("2x2"),
    ]
}

/// Symmetry and nonsingularity of the fixed Grams, agreement with their
/// defining formulas, the orthogonal basis of Λ² with q-values
/// `(1, −1, −1, 1, 1, −1)`, and Witt indices 3, 2, 2, 1 for G6, G5, G4, G3
/// over several prime fields.
pub fn verify_forms(cfg: &VerifyConfig) -> Result<Certificate> {
    let f = cfg.field;
    let t = FormTable::new(f);
    let cert = cfg
        .certificate("forms")
        .with_samples(0)
        .ledger("G4_q_over_det", -1)
        .ledger("G3_vs_G4_on_trace0", 1)
        .ledger("W_placement", "W Y^t W^-1 and W^-1 Y^t W give the same Gram");
    let mut failures: Vec<Value> = Vec::new();

    for (name, g) in [("G6", &t.g6), ("G5", &t.g5), ("G4", &t.g4), ("G3", &t.g3)] {
        if !g.is_symmetric() || !g.is_invertible() {
            failures.push(json!({"gram": name, "problem": "not symmetric nonsingular"}));
        }
    }
    let defined = [
        ("G6", determinant_gram(f), &t.g6),
        ("G4", modified_trace_gram(f, false), &t.g4),
        ("G4_swapped_W", modified_trace_gram(f, true), &t.g4),
        ("G3", trace_gram(f), &t.g3),
    ];
    for (name, computed, table) in &defined {
        if computed != *table {
            failures.push(json!({"gram": name, "from_definition": computed.to_json(), "table": table.to_json()}));
        }
    }

    let g6 = t.form(&t.g6);
    let basis = t.orthogonal_basis();
    let expected_q = [1, -1, -1, 1, 1, -1];
    let mut q_values = Vec::new();
    for (a, u) in basis.iter().enumerate() {
        let q = g6.q_value(u)?;
        q_values.push(q.to_json());
        if q != f.from_i64(expected_q[a]) {
            failures.push(json!({"vector": vec_json(u), "q": q.to_json(), "expected": expected_q[a]}));
        }
        for v in &basis[a + 1..] {
            let b = g6.polar(u, v)?;
            if !b.is_zero() {
                failures.push(json!({"pair": [vec_json(u), vec_json(v)], "polar": b.to_json()}));
            }
        }
    }

    // q = −det on the matrix model
    let g4 = t.form(&t.g4);
    for (k, m) in mat2_basis(f).into_iter().enumerate().chain([(4, ExactMatrix::identity(2, f))]) {
        let q = g4.q_value(&m.flatten())?;
        if q != -m.det()? {
            failures.push(json!({"matrix": k, "q": q.to_json(), "det": m.det()?.to_json()}));
        }
    }

    let mut fields: Vec<u64> = WITT_FIELDS.to_vec();
    if let Some(p) = f.modulus() {
        if !fields.contains(&p) {
            fields.push(p);
        }
    }
    let mut witt = serde_json::Map::new();
    for p in fields {
        let fp = FieldDescriptor::prime(p)?;
        let tp = FormTable::new(fp);
        let indices = [&tp.g6, &tp.g5, &tp.g4, &tp.g3]
            .iter()
            .map(|g| Ok(tp.form(g).witt_decompose()?.witt_index))
            .collect::<Result<Vec<usize>>>()?;
        if indices != [3, 2, 2, 1] {
            failures.push(json!({"field": fp.tag(), "witt_indices": indices}));
        }
        witt.insert(fp.tag(), json!(indices));
    }

    let mut cert = cert.witness("q_values_orthogonal_basis", q_values).witness("witt_indices", Value::Object(witt));
    if !f.is_finite() {
        let d = g6.diagonalize()?;
        let positive = d.diagonal.iter().filter(|x| x.sign() == Some(num_bigint::Sign::Plus)).count();
        cert = cert.witness("G6_signature", json!([positive, 6 - positive]));
        if positive != 3 {
            failures.push(json!({"G6_diagonal": vec_json(&d.diagonal)}));
        }
    }
    Ok(finish(cert, failures.into_iter().next()))
}

/// Injectivity of the derivatives (trivial Lie kernels) and `{±I}` as the
/// kernel of the wedge square on sampled elements.
pub fn verify_kernels(cfg: &VerifyConfig) -> Result<Certificate> {
    let f = cfg.field;
    let samples = cfg.trials.max(10_000);
    let mut failures: Vec<Value> = Vec::new();

    let sl4 = sl_basis(4, f);
    let rank6 = derivative_rank(&sl4, lie_wedge_square)?;
    let sl2 = sl_basis(2, f);
    let rank3 = derivative_rank(&sl2, d_spin3)?;
    let zero2 = ExactMatrix::zeros(2, 2, f);
    let mut pairs: Vec<ExactMatrix> = Vec::new();
    for x in &sl2 {
        pairs.push(ExactMatrix::block_diag(&[x, &zero2])?);
        pairs.push(ExactMatrix::block_diag(&[&zero2, x])?);
    }
    let rank4 = derivative_rank(&pairs, |xy| d_spin4(&xy.submatrix(&[0, 1], &[0, 1]), &xy.submatrix(&[2, 3], &[2, 3])))?;
    let sp4 = sp4_lie_basis(f);
    let rank5 = derivative_rank(&sp4, d_spin5)?;
    let ranks = json!({
        "dspin6_on_sl4": [rank6, sl4.len()],
        "dspin5_on_sp4": [rank5, sp4.len()],
        "dspin4_on_sl2xsl2": [rank4, pairs.len()],
        "dspin3_on_sl2": [rank3, sl2.len()],
    });
    if (rank6, rank5, rank4, rank3) != (15, 10, 6, 3) || sp4.len() != 10 {
        failures.push(json!({"ranks": ranks.clone()}));
    }

    // the symbolic derivatives agree with first-order terms of the maps
    let id4 = ExactMatrix::identity(4, f);
    let id2 = ExactMatrix::identity(2, f);
    let curve = |x: &ExactMatrix, t: i64| ExactMatrix::identity(x.rows(), f).try_add(&x.scale(&f.from_i64(t)));
    for x in &sl4 {
        let d = first_order(&wedge_square(&id4)?, &wedge_square(&curve(x, 1)?)?, &wedge_square(&curve(x, 2)?)?)?;
        if d != lie_wedge_square(x)? {
            failures.push(json!({"first_order": "spin6", "x": x.to_json()}));
        }
    }
    let table = FormTable::new(f);
    for x in [&sl2[0], &sl2[1]] {
        let s = |t| spin3_matrix(&curve(x, t)?);
        if first_order(&s(0)?, &s(1)?, &s(2)?)? != d_spin3(x)? {
            failures.push(json!({"first_order": "spin3", "x": x.to_json()}));
        }
        for (xa, xb) in [(x, &zero2), (&zero2, x)] {
            let s = |t| spin4_matrix(&curve(xa, t)?, &curve(xb, t)?);
            if first_order(&s(0)?, &s(1)?, &s(2)?)? != d_spin4(xa, xb)? {
                failures.push(json!({"first_order": "spin4", "x": xa.to_json(), "y": xb.to_json()}));
            }
        }
    }
    let omega = standard_omega(f);
    for k in 0..4 {
        // symplectic transvection direction v·vᵗ·Ω is nilpotent
        let v: Vec<Scalar> = (0..4).map(|i| f.from_i64(i64::from(i == k) + i64::from(i == (k + 1) % 4))).collect();
        let x = groups::symplectic_transvection(&omega, &v, &f.one())?.try_sub(&id4)?;
        let s = |t| restrict_to_kernel(&table, &wedge_square(&curve(&x, t)?)?);
        if first_order(&s(0)?, &s(1)?, &s(2)?)? != d_spin5(&x)? {
            failures.push(json!({"first_order": "spin5", "x": x.to_json()}));
        }
    }

    let minus = |n: usize| ExactMatrix::identity(n, f).scale(&f.from_i64(-1));
    let sl4g = GroupDescriptor::sl(4, f);
    let sl2g = GroupDescriptor::sl(2, f);
    for sign in [id4.clone(), minus(4)] {
        if !spin6_map(&GroupElement::new(sl4g.clone(), sign.clone())?)?.matrix().is_identity() {
            failures.push(json!({"central": sign.to_json()}));
        }
    }
    for sign in [id2.clone(), minus(2)] {
        if !spin3_map(&GroupElement::new(sl2g.clone(), sign.clone())?)?.matrix().is_identity() {
            failures.push(json!({"central": sign.to_json()}));
        }
    }
    let minus4 = minus(4);
    let sampled = first_failure(samples, |i| {
        let a = cfg.sl4(i, 0)?;
        if a.matrix().is_identity() || a.matrix() == &minus4 {
            return Ok(None);
        }
        Ok(spin6_map(&a)?.matrix().is_identity().then(|| json!({"a": a.matrix().to_json()})))
    })?;
    failures.extend(sampled);

    let cert = cfg
        .certificate("kernels")
        .with_samples(samples as u64)
        .witness("derivative_ranks", ranks);
    Ok(finish(cert, failures.into_iter().next()))
}

/// `Λ²S` in the basis `[ker ω | e12 + e34]` is `diag(spin5(S), 1)`.
pub fn verify_stab56(cfg: &VerifyConfig) -> Result<Certificate> {
    let f = cfg.field;
    let t = FormTable::new(f);
    let p = t.stab56_basis();
    let pinv = p.inverse()?;
    let g6 = t.form(&t.g6);
    let mut failures: Vec<Value> = Vec::new();
    let qc = g6.q_value(&t.complement)?;
    if qc != f.one() {
        failures.push(json!({"complement_q": qc.to_json()}));
    }
    let orth = t.kernel.as_columns().transpose().try_mul(&t.g6)?.mul_vec(&t.complement)?;
    if orth.iter().any(|x| !x.is_zero()) {
        failures.push(json!({"complement_not_orthogonal": vec_json(&orth)}));
    }
    let one = ExactMatrix::identity(1, f);
    let sampled = first_failure(cfg.trials, |i| {
        let s = if i == 0 { GroupElement::identity(GroupDescriptor::sp4(f)) } else { cfg.sp4(i, 0)? };
        let l = spin6_map(&symplectic_to_special_linear(&s)?)?;
        let omega_after = t.omega_row.try_mul(l.matrix())?;
        let split = pinv.try_mul(l.matrix())?.try_mul(&p)?;
        let expected = ExactMatrix::block_diag(&[spin5_map(&s)?.matrix(), &one])?;
        Ok((split != expected || omega_after != t.omega_row).then(|| json!({"s": s.matrix().to_json()})))
    })?;
    failures.extend(sampled);
    let cert = cfg
        .certificate("stab56")
        .witness("complement", vec_json(&t.complement))
        .witness("complement_q", qc.to_json())
        .witness("kernel_basis", t.kernel.as_columns().to_json());
    Ok(finish(cert, failures.into_iter().next()))
}

/// The Mat₂ → Λ² table intertwines `M ↦ A·M·B⁻¹` with `Λ²diag(A, B)`, is an
/// isometry onto its image, and `e12 ± e34` are orthogonal to the image and
/// fixed.
pub fn verify_stab45(cfg: &VerifyConfig) -> Result<Certificate> {
    let f = cfg.field;
    let t = FormTable::new(f);
    let s = &t.stab45;
    let id2 = ExactMatrix::identity(2, f);
    let fixed = {
        let u = wedge_unit(f, 0, 1);
        let v = wedge_unit(f, 2, 3);
        [add_vec(&u, &v), sub_vec(&u, &v)]
    };
    let mut failures: Vec<Value> = Vec::new();

    let check_pair = |a: &ExactMatrix, b: &ExactMatrix| -> Result<Option<Value>> {
        let l = wedge_square(&ExactMatrix::block_diag(&[a, b])?)?;
        let lhs = l.try_mul(s)?;
        let rhs = s.try_mul(&spin4_matrix(a, b)?)?;
        if lhs != rhs {
            return Ok(Some(json!({"a": a.to_json(), "b": b.to_json(), "problem": "intertwining"})));
        }
        for v in &fixed {
            if &l.mul_vec(v)? != v {
                return Ok(Some(json!({"a": a.to_json(), "b": b.to_json(), "not_fixed": vec_json(v)})));
            }
        }
        Ok(None)
    };
    let mut generator_failure = None;
    for g in elementary_sl2(f) {
        for (a, b) in [(&g, &id2), (&id2, &g)] {
            if let Some(ce) = check_pair(a, b)? {
                generator_failure.get_or_insert(ce);
            }
        }
    }
    if let Some(mut ce) = generator_failure {
        // report the intertwiner space so a wrong table entry can be diagnosed
        let pairs: Vec<(ExactMatrix, ExactMatrix)> = elementary_sl2(f)
            .iter()
            .flat_map(|g| [(g.clone(), id2.clone()), (id2.clone(), g.clone())])
            .map(|(a, b)| Ok((spin4_matrix(&a, &b)?, wedge_square(&ExactMatrix::block_diag(&[&a, &b])?)?)))
            .collect::<Result<_>>()?;
        let space = intertwiner_space(&pairs)?;
        ce["intertwiner_basis"] = Value::Array(space.iter().map(ExactMatrix::to_json).collect());
        failures.push(ce);
    }
    let sampled = first_failure(cfg.trials, |i| {
        let a = cfg.sl2(i, 0)?;
        let b = cfg.sl2(i, 1)?;
        check_pair(a.matrix(), b.matrix())
    })?;
    failures.extend(sampled);

    let pulled = s.transpose().try_mul(&t.g6)?.try_mul(s)?;
    let scale = pullback_scale(&pulled, &t.g4);
    match &scale {
        Some(c) if !c.is_zero() => {}
        _ => failures.push(json!({"pullback": pulled.to_json(), "G4": t.g4.to_json()})),
    }
    for v in &fixed {
        let orth = s.transpose().try_mul(&t.g6)?.mul_vec(v)?;
        if orth.iter().any(|x| !x.is_zero()) {
            failures.push(json!({"not_orthogonal_to_image": vec_json(v)}));
        }
    }
    let cert = cfg
        .certificate("stab45")
        .witness("stab45_matrix", s.to_json())
        .witness("pullback_of_G6", pulled.to_json())
        .ledger("stab45_pullback_scale", scale.map(|c| c.to_string()).unwrap_or_else(|| "none".into()));
    Ok(finish(cert, failures.into_iter().next()))
}

/// `c` with `a = c·b`, if one exists.
fn pullback_scale(a: &ExactMatrix, b: &ExactMatrix) -> Option<Scalar> {
    let k = b.entries().iter().position(|x| !x.is_zero())?;
    let c = &a.entries()[k] / &b.entries()[k];
    (&b.scale(&c) == a).then_some(c)
}

/// `spin4(A, A)` restricted to trace-0 matrices is `spin3(A)`, and fixes `I`.
pub fn verify_stab34(cfg: &VerifyConfig) -> Result<Certificate> {
    let f = cfg.field;
    let t = FormTable::new(f);
    let z = trace_zero_inclusion(f);
    let id_vec = ExactMatrix::identity(2, f).flatten();
    let mut failures: Vec<Value> = Vec::new();
    let restricted = z.transpose().try_mul(&t.g4)?.try_mul(&z)?;
    let scale = pullback_scale(&restricted, &t.g3);
    if scale.is_none() {
        failures.push(json!({"G4_on_trace0": restricted.to_json()}));
    }
    let sampled = first_failure(cfg.trials, |i| {
        let a = if i == 0 { GroupElement::identity(GroupDescriptor::sl(2, f)) } else { cfg.sl2(i, 0)? };
        let (x, y) = groups::diagonal_embedding(&a);
        let m = spin4_map(&x, &y)?;
        let ok = m.matrix().try_mul(&z)? == z.try_mul(spin3_map(&a)?.matrix())? && m.matrix().mul_vec(&id_vec)? == id_vec;
        Ok((!ok).then(|| json!({"a": a.matrix().to_json()})))
    })?;
    failures.extend(sampled);
    let cert = cfg
        .certificate("stab34")
        .witness("trace0_inclusion", z.to_json())
        .ledger("G4_on_trace0_over_G3", scale.map(|c| c.to_string()).unwrap_or_else(|| "none".into()));
    Ok(finish(cert, failures.into_iter().next()))
}

/// `ρ(B): M ↦ M·B⁻¹` as a 4×4 matrix, `I ⊗ (B⁻¹)ᵗ`.
pub fn right_inverse_action(b: &ExactMatrix) -> Result<ExactMatrix> {
    ExactMatrix::identity(2, b.field()).kron(&b.inverse()?.transpose())
}

/// `diag(B, (B⁻¹)ᵗ)`, the action on `V ⊕ V^∨`.
pub fn hyperbolic_action(b: &ExactMatrix) -> Result<ExactMatrix> {
    ExactMatrix::block_diag(&[b, &b.inverse()?.transpose()])
}

/// First invertible member of the intertwiner space: basis elements in
/// order, then sums over subsets of increasing size.
fn pick_invertible(space: &[ExactMatrix]) -> Option<ExactMatrix> {
    let k = space.len();
    let mut subsets: Vec<u32> = (1..(1u32 << k)).collect();
    subsets.sort_by_key(|m| (m.count_ones(), m.reverse_bits()));
    subsets.into_iter().find_map(|mask| {
        let t = (0..k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| space[i].clone())
            .reduce(|a, b| a.try_add(&b).expect("same shape"))?;
        t.is_invertible().then_some(t)
    })
}

/// Solves `T·ρ(B) = diag(B, B⁻ᵗ)·T` on generators of SL₂, picks an
/// invertible solution and checks it on random `B`.
pub fn verify_hypso4(cfg: &VerifyConfig) -> Result<Certificate> {
    let f = cfg.field;
    let t = FormTable::new(f);
    let pairs = elementary_sl2(f)
        .iter()
        .map(|g| Ok((right_inverse_action(g)?, hyperbolic_action(g)?)))
        .collect::<Result<Vec<_>>>()?;
    let space = intertwiner_space(&pairs)?;
    let cert = cfg.certificate("hypso4").witness("intertwiner_dimension", space.len());
    let Some(tm) = pick_invertible(&space) else {
        return Ok(cert.into_failure(json!({
            "problem": "no invertible intertwiner",
            "intertwiner_basis": space.iter().map(ExactMatrix::to_json).collect::<Vec<_>>(),
        })));
    };
    let mut failures: Vec<Value> = Vec::new();
    let sampled = first_failure(cfg.trials, |i| {
        let b = cfg.sl2(i, 0)?;
        let lhs = tm.try_mul(&right_inverse_action(b.matrix())?)?;
        let rhs = hyperbolic_action(b.matrix())?.try_mul(&tm)?;
        Ok((lhs != rhs).then(|| json!({"b": b.matrix().to_json()})))
    })?;
    failures.extend(sampled);
    // the evaluation form on V ⊕ V^∨ pulls back to a multiple of G4
    let eval = ExactMatrix::from_i64s(4, 4, f, &[0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0]);
    let pulled = tm.transpose().try_mul(&eval)?.try_mul(&tm)?;
    let scale = pullback_scale(&pulled, &t.g4);
    if scale.as_ref().is_none_or(Scalar::is_zero) {
        failures.push(json!({"pullback_of_evaluation_form": pulled.to_json()}));
    }
    let cert = cert
        .witness("intertwiner", tm.to_json())
        .ledger("evaluation_form_pullback_over_G4", scale.map(|c| c.to_string()).unwrap_or_else(|| "none".into()));
    Ok(finish(cert, failures.into_iter().next()))
}

/// `w·diag(A, I)·w⁻¹ = diag(I, A)` for the pinned Weyl representative,
/// whose elementary factorization is stored in the certificate.
pub fn verify_weyl_equivalence(cfg: &VerifyConfig) -> Result<Certificate> {
    let f = cfg.field;
    let w = weyl_swap_conjugator(f);
    let factors = weyl_factorization(f);
    let omega = standard_omega(f);
    let mut product = ExactMatrix::identity(4, f);
    for fac in &factors {
        if fac.matrix.transpose().try_mul(&omega)?.try_mul(&fac.matrix)? != omega {
            return Err(Error::FactorizationMissing);
        }
        product = product.try_mul(&fac.matrix)?;
    }
    if &product != w.matrix() {
        return Err(Error::FactorizationMissing);
    }
    let winv = w.inverse()?;
    let id = GroupElement::identity(GroupDescriptor::sl(2, f));
    let sampled = first_failure(cfg.trials, |i| {
        let a = if i == 0 { id.clone() } else { cfg.sl2(i, 0)? };
        let lhs = w.mul(&long_root_embedding(&a, &id)?)?.mul(&winv)?;
        Ok((lhs != long_root_embedding(&id, &a)?).then(|| json!({"a": a.matrix().to_json()})))
    })?;
    let w2 = w.matrix().try_mul(w.matrix())?;
    let cert = cfg
        .certificate("weyl")
        .witness("w", w.matrix().to_json())
        .witness("w_squared_is_minus_identity", w2 == ExactMatrix::identity(4, f).scale(&f.from_i64(-1)))
        .witness("factorization_length", factors.len())
        .witness("factorization", serde_json::to_value(&factors).expect("factors serialize"));
    Ok(finish(cert, sampled))
}

/// `map(g·h) = map(g)·map(h)` with exact SO membership of every image, for
/// all four maps.
pub fn verify_homomorphisms(cfg: &VerifyConfig) -> Result<Certificate> {
    let f = cfg.field;
    let t = FormTable::new(f);
    let preserves = |m: &GroupElement, d: &GroupDescriptor| groups::check_membership(m.matrix(), d);
    let sampled = first_failure(cfg.trials, |i| {
        let (a1, a2, b1, b2) = (cfg.sl2(i, 0)?, cfg.sl2(i, 1)?, cfg.sl2(i, 2)?, cfg.sl2(i, 3)?);
        let (s1, s2) = (cfg.sp4(i, 0)?, cfg.sp4(i, 1)?);
        let (l1, l2) = (cfg.sl4(i, 2)?, cfg.sl4(i, 3)?);
        let checks: [(&str, GroupElement, GroupElement, GroupElement, GroupDescriptor); 4] = [
            ("spin3", spin3_map(&a1.mul(&a2)?)?, spin3_map(&a1)?, spin3_map(&a2)?, t.so3()),
            (
                "spin4",
                spin4_map(&a1.mul(&a2)?, &b1.mul(&b2)?)?,
                spin4_map(&a1, &b1)?,
                spin4_map(&a2, &b2)?,
                t.so4(),
            ),
            ("spin5", spin5_map(&s1.mul(&s2)?)?, spin5_map(&s1)?, spin5_map(&s2)?, t.so5()),
            ("spin6", spin6_map(&l1.mul(&l2)?)?, spin6_map(&l1)?, spin6_map(&l2)?, t.so6()),
        ];
        for (name, prod, x, y, group) in checks {
            let ok = prod.matrix() == &x.matrix().try_mul(y.matrix())? && preserves(&prod, &group)? && preserves(&x, &group)?;
            if !ok {
                return Ok(Some(json!({"map": name, "sample": i})));
            }
        }
        Ok(None)
    })?;
    Ok(finish(cfg.certificate("homomorphisms"), sampled))
}
