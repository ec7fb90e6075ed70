//! Quadratic forms on free modules, stored through the Gram matrix of the
//! polar form `B(x, y) = q(x + y) − q(x) − q(y)`.
//!
//! Quadratic values are always `q(x) = B(x, x) / 2`. Classification
//! (isotropic vectors, Witt decomposition, isometry) is decided over odd
//! prime fields only; over the rationals isometries must come with a
//! witness matrix.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::linalg::ExactMatrix;
use crate::scalar::{FieldDescriptor, Scalar};

/// A quadratic form given by its symmetric polar Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FormRepr", into = "FormRepr")]
pub struct QuadraticForm {
    gram: ExactMatrix,
}

#[derive(Serialize, Deserialize)]
struct FormRepr {
    gram: ExactMatrix,
    field: String,
}

impl From<QuadraticForm> for FormRepr {
    fn from(f: QuadraticForm) -> Self {
        FormRepr { field: f.field().tag(), gram: f.gram }
    }
}

impl TryFrom<FormRepr> for QuadraticForm {
    type Error = Error;

    fn try_from(r: FormRepr) -> Result<Self> {
        let field: FieldDescriptor = r.field.parse()?;
        if field != r.gram.field() {
            return Err(Error::MixedFields(field.tag(), r.gram.field().tag()));
        }
        QuadraticForm::new(r.gram)
    }
}

impl QuadraticForm {
    pub fn new(gram: ExactMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::DimensionMismatch("Gram matrix must be square".into()));
        }
        if !gram.is_symmetric() {
            return Err(Error::InvalidArgument("Gram matrix must be symmetric".into()));
        }
        Ok(QuadraticForm { gram })
    }

    /// The diagonal form `Σ aᵢ xᵢ²` (Gram `diag(2a₁, …, 2aₙ)`).
    pub fn from_q_diagonal(field: FieldDescriptor, values: &[Scalar]) -> Result<Self> {
        let two = field.from_i64(2);
        let doubled: Vec<Scalar> = values.iter().map(|a| a * &two).collect();
        Self::new(ExactMatrix::diagonal(field, &doubled)?)
    }

    /// The rank-0 form.
    pub fn zero(field: FieldDescriptor) -> Self {
        QuadraticForm { gram: ExactMatrix::zeros(0, 0, field) }
    }

    pub fn gram(&self) -> &ExactMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn field(&self) -> FieldDescriptor {
        self.gram.field()
    }

    pub fn polar(&self, x: &[Scalar], y: &[Scalar]) -> Result<Scalar> {
        self.check_vector(x)?;
        self.check_vector(y)?;
        self.gram.pair(x, y)
    }

    /// `q(x) = B(x, x) / 2`.
    pub fn q_value(&self, x: &[Scalar]) -> Result<Scalar> {
        let b = self.polar(x, x)?;
        Ok(&b * &self.field().from_i64(2).inv()?)
    }

    fn check_vector(&self, x: &[Scalar]) -> Result<()> {
        if x.len() != self.rank() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a rank-{} form",
                x.len(),
                self.rank()
            )));
        }
        if let Some(bad) = x.iter().find(|e| e.field() != self.field()) {
            return Err(Error::MixedFields(bad.field().tag(), self.field().tag()));
        }
        Ok(())
    }

    /// Determinant of the Gram matrix.
    pub fn discriminant(&self) -> Scalar {
        self.gram.det().expect("square Gram")
    }

    pub fn is_nonsingular(&self) -> bool {
        !self.discriminant().is_zero()
    }

    /// The form `x ↦ q(T·x)`, Gram `Tᵗ·G·T`.
    pub fn pullback(&self, t: &ExactMatrix) -> Result<QuadraticForm> {
        let g = t.transpose().try_mul(&self.gram)?.try_mul(t)?;
        QuadraticForm::new(g)
    }

    pub fn scaled(&self, c: &Scalar) -> QuadraticForm {
        QuadraticForm { gram: self.gram.scale(c) }
    }

    fn require_nonsingular(&self) -> Result<()> {
        if self.is_nonsingular() {
            Ok(())
        } else {
            Err(Error::SingularForm)
        }
    }

    fn require_finite(&self) -> Result<()> {
        if self.field().is_finite() {
            Ok(())
        } else {
            Err(Error::WrongField)
        }
    }

    /// Symmetric Gaussian elimination to `Tᵗ·G·T = diag(d)`.
    ///
    /// Pivot rule, applied at each step `k` to the not-yet-split block:
    /// take the first index `j ≥ k` whose diagonal entry is nonzero and swap
    /// it into position `k`; if every remaining diagonal entry vanishes,
    /// take the first `j > k` with `G[k][j] ≠ 0` and replace `e_k` by
    /// `e_k + e_j` (whose value `2·G[k][j]` is nonzero in odd
    /// characteristic). The returned diagonal lists Gram values `B(tᵢ, tᵢ)`.
    pub fn diagonalize(&self) -> Result<Diagonalization> {
        self.require_nonsingular()?;
        let n = self.rank();
        let f = self.field();
        let mut g: Vec<Vec<Scalar>> = (0..n).map(|i| self.gram.row(i).to_vec()).collect();
        // columns of T, kept as rows of `t` and transposed at the end
        let mut t: Vec<Vec<Scalar>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { f.one() } else { f.zero() }).collect())
            .collect();

        for k in 0..n {
            if g[k][k].is_zero() {
                if let Some(j) = (k + 1..n).find(|&j| !g[j][j].is_zero()) {
                    swap_basis(&mut g, &mut t, k, j);
                } else if let Some(j) = (k + 1..n).find(|&j| !g[k][j].is_zero()) {
                    add_basis(&mut g, &mut t, k, j, &f.one());
                } else {
                    return Err(Error::SingularForm);
                }
            }
            let inv = g[k][k].inv()?;
            for i in k + 1..n {
                if g[i][k].is_zero() {
                    continue;
                }
                let c = -(&g[i][k] * &inv);
                add_basis(&mut g, &mut t, i, k, &c);
            }
        }
        let diagonal = (0..n).map(|i| g[i][i].clone()).collect();
        let change_of_basis = ExactMatrix::from_rows(f, t)?.transpose();
        Ok(Diagonalization { change_of_basis, diagonal })
    }

    /// A nonzero isotropic vector, or `None` when the form is anisotropic.
    ///
    /// Works on a diagonalization with values `a₁, a₂, …` and is
    /// deterministic: rank 1 is always anisotropic; rank 2 returns
    /// `(1, √(−a₁/a₂))` when that root exists; rank ≥ 3 scans `t = 0, 1, …`
    /// for the first `(t, 1, z)` with `z² = −(a₁t² + a₂)/a₃`, which always
    /// exists over a finite field. Square roots are the smaller residue.
    pub fn find_isotropic(&self) -> Result<Option<Vec<Scalar>>> {
        self.require_finite()?;
        let d = self.diagonalize()?;
        let n = self.rank();
        let f = self.field();
        let p = f.modulus().expect("finite field");
        let a = &d.diagonal;
        let local: Vec<Scalar> = match n {
            0 | 1 => return Ok(None),
            2 => {
                let ratio = -(&a[0] / &a[1]);
                match ratio.sqrt() {
                    Some(r) => vec![f.one(), r],
                    None => return Ok(None),
                }
            }
            _ => {
                let mut found = None;
                for t in 0..p {
                    let t = f.from_bigint(&t.into());
                    let s = -(&(&(&a[0] * &(&t * &t)) + &a[1]) / &a[2]);
                    if let Some(z) = s.sqrt() {
                        let mut v = vec![f.zero(); n];
                        v[0] = t;
                        v[1] = f.one();
                        v[2] = z;
                        found = Some(v);
                        break;
                    }
                }
                found.expect("ternary forms over finite fields are isotropic")
            }
        };
        let mut padded = local;
        padded.resize(n, f.zero());
        Ok(Some(d.change_of_basis.mul_vec(&padded)?))
    }

    /// Splits off hyperbolic planes until the rest is anisotropic.
    ///
    /// Each round takes an isotropic `x`, a partner `y₀` with `B(x, y₀) = 1`
    /// (a scaled basis vector), corrects it to `y = y₀ − q(y₀)·x` so that
    /// `q(y) = 0`, and recurses on the orthogonal complement of `⟨x, y⟩`.
    pub fn witt_decompose(&self) -> Result<WittDecomposition> {
        self.require_finite()?;
        self.require_nonsingular()?;
        let f = self.field();
        let n = self.rank();
        let mut current = self.clone();
        let mut embed = ExactMatrix::identity(n, f);
        let mut hyperbolic_columns: Vec<Vec<Scalar>> = Vec::new();

        while current.rank() >= 2 {
            let Some(x) = current.find_isotropic()? else {
                break;
            };
            let gx = current.gram.mul_vec(&x)?;
            let i = gx.iter().position(|v| !v.is_zero()).ok_or(Error::SingularForm)?;
            let m = current.rank();
            let mut y = vec![f.zero(); m];
            y[i] = gx[i].inv()?;
            let c = current.q_value(&y)?;
            for (yk, xk) in y.iter_mut().zip(&x) {
                *yk = &*yk - &(&c * xk);
            }
            let gy = current.gram.mul_vec(&y)?;
            let complement = ExactMatrix::from_rows(f, vec![gx, gy])?.kernel_basis().as_columns();
            hyperbolic_columns.push(embed.mul_vec(&x)?);
            hyperbolic_columns.push(embed.mul_vec(&y)?);
            embed = embed.try_mul(&complement)?;
            current = current.pullback(&complement)?;
        }

        let witt_index = hyperbolic_columns.len() / 2;
        let mut columns = hyperbolic_columns;
        columns.extend((0..embed.cols()).map(|j| embed.column(j)));
        let change_of_basis = if columns.is_empty() {
            ExactMatrix::zeros(0, 0, f)
        } else {
            ExactMatrix::from_columns(f, &columns)?
        };
        debug_assert!(current.rank() <= 2, "anisotropic residue over a finite field has rank <= 2");
        Ok(WittDecomposition { witt_index, change_of_basis, anisotropic_residue: current })
    }

    /// An explicit isometry `W` from `self` to `other` (`Wᵗ·G_other·W =
    /// G_self`) over a finite field, or `None` when none exists.
    ///
    /// Both forms are brought to the normal form `diag(1, …, 1, δ)`.
    pub fn isometry_witness_ff(&self, other: &QuadraticForm) -> Result<Option<ExactMatrix>> {
        if !is_isometric_ff(self, other)? {
            return Ok(None);
        }
        if self.rank() == 0 {
            return Ok(Some(ExactMatrix::zeros(0, 0, self.field())));
        }
        let (ts, ds) = self.normal_form()?;
        let (tg, dg) = other.normal_form()?;
        let n = self.rank();
        // rescale the last basis vector of `other` to match δ
        let s = (&ds / &dg).sqrt().expect("same square class");
        let mut tg = tg;
        for i in 0..n {
            let v = tg.get(i, n - 1) * &s;
            tg.set(i, n - 1, v);
        }
        let w = tg.try_mul(&ts.inverse()?)?;
        Ok(Some(w))
    }

    /// `T` with `Tᵗ·G·T = diag(1, …, 1, δ)` and the last entry `δ`.
    fn normal_form(&self) -> Result<(ExactMatrix, Scalar)> {
        let d = self.diagonalize()?;
        let f = self.field();
        let p = f.modulus().expect("finite field");
        let n = self.rank();
        let mut t = d.change_of_basis;
        let mut diag = d.diagonal;
        for i in 0..n.saturating_sub(1) {
            let (a, b) = (diag[i].clone(), diag[i + 1].clone());
            // a x² + b y² = 1 has a solution over every finite field
            let (x, y) = (0..p)
                .find_map(|x| {
                    let x = f.from_bigint(&x.into());
                    let rhs = &(&f.one() - &(&a * &(&x * &x))) / &b;
                    rhs.sqrt().map(|y| (x, y))
                })
                .expect("binary forms over finite fields represent 1");
            let u: Vec<Scalar> = (0..n)
                .map(|r| &(&x * t.get(r, i)) + &(&y * t.get(r, i + 1)))
                .collect();
            let v: Vec<Scalar> = (0..n)
                .map(|r| &(&-(&b * &y) * t.get(r, i)) + &(&(&a * &x) * t.get(r, i + 1)))
                .collect();
            for r in 0..n {
                t.set(r, i, u[r].clone());
                t.set(r, i + 1, v[r].clone());
            }
            diag[i] = f.one();
            diag[i + 1] = &a * &b;
        }
        Ok((t, diag[n - 1].clone()))
    }
}

fn swap_basis(g: &mut [Vec<Scalar>], t: &mut [Vec<Scalar>], a: usize, b: usize) {
    g.swap(a, b);
    for row in g.iter_mut() {
        row.swap(a, b);
    }
    t.swap(a, b);
}

/// `e_target ← e_target + c·e_source`, updating the Gram congruence.
fn add_basis(g: &mut [Vec<Scalar>], t: &mut [Vec<Scalar>], target: usize, source: usize, c: &Scalar) {
    let n = g.len();
    for j in 0..n {
        let v = &g[target][j] + &(c * &g[source][j]);
        g[target][j] = v;
    }
    for i in 0..n {
        let v = &g[i][target] + &(c * &g[i][source]);
        g[i][target] = v;
    }
    for j in 0..n {
        let v = &t[target][j] + &(c * &t[source][j]);
        t[target][j] = v;
    }
}

/// Result of [`QuadraticForm::diagonalize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagonalization {
    pub change_of_basis: ExactMatrix,
    pub diagonal: Vec<Scalar>,
}

/// `form ≅ ℍ^⊥witt_index ⊥ anisotropic_residue`.
///
/// The columns of `change_of_basis` are `x₁, y₁, …, x_w, y_w` followed by a
/// basis of the residue, so `Tᵗ·G·T = ℍ^⊥w ⊥ residue`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittDecomposition {
    pub witt_index: usize,
    pub change_of_basis: ExactMatrix,
    pub anisotropic_residue: QuadraticForm,
}

impl WittDecomposition {
    /// The split model `ℍ^⊥w ⊥ residue` the change of basis produces.
    pub fn model(&self) -> Result<QuadraticForm> {
        let f = self.anisotropic_residue.field();
        orthogonal_sum(&hyperbolic_form(self.witt_index, f), &self.anisotropic_residue)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "witt_index": self.witt_index,
            "change_of_basis": self.change_of_basis.to_json(),
            "anisotropic_residue": serde_json::to_value(&self.anisotropic_residue).expect("form serializes"),
        })
    }
}

/// A linear map between forms that preserves quadratic values, checked on
/// construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry {
    source: QuadraticForm,
    target: QuadraticForm,
    matrix: ExactMatrix,
}

impl Isometry {
    pub fn new(source: QuadraticForm, target: QuadraticForm, matrix: ExactMatrix) -> Result<Self> {
        if !verify_isometry(&matrix, &source, &target)?.passed() {
            return Err(Error::InvalidArgument("matrix is not an isometry".into()));
        }
        Ok(Isometry { source, target, matrix })
    }

    pub fn source(&self) -> &QuadraticForm {
        &self.source
    }

    pub fn target(&self) -> &QuadraticForm {
        &self.target
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.matrix
    }
}

/// `ℍ^⊥n`: Gram is `n` diagonal blocks `[[0,1],[1,0]]`.
pub fn hyperbolic_form(n: usize, field: FieldDescriptor) -> QuadraticForm {
    let mut g = ExactMatrix::zeros(2 * n, 2 * n, field);
    for k in 0..n {
        g.set(2 * k, 2 * k + 1, field.one());
        g.set(2 * k + 1, 2 * k, field.one());
    }
    QuadraticForm { gram: g }
}

pub fn orthogonal_sum(f: &QuadraticForm, g: &QuadraticForm) -> Result<QuadraticForm> {
    if f.field() != g.field() {
        return Err(Error::MixedFields(f.field().tag(), g.field().tag()));
    }
    if f.rank() == 0 {
        return Ok(g.clone());
    }
    if g.rank() == 0 {
        return Ok(f.clone());
    }
    QuadraticForm::new(ExactMatrix::block_diag(&[&f.gram, &g.gram])?)
}

/// Isometry over a finite field: equal rank and discriminants in the same
/// square class.
pub fn is_isometric_ff(f: &QuadraticForm, g: &QuadraticForm) -> Result<bool> {
    f.require_finite()?;
    g.require_finite()?;
    if f.field() != g.field() {
        return Err(Error::MixedFields(f.field().tag(), g.field().tag()));
    }
    let (df, dg) = (f.discriminant(), g.discriminant());
    if df.is_zero() || dg.is_zero() {
        return Err(Error::SingularForm);
    }
    Ok(f.rank() == g.rank() && (&df * &dg).is_square()?)
}

/// Checks `Wᵗ·G_g·W = G_f` with `W` invertible. A failure names a vector `x`
/// with `q_g(W·x) ≠ q_f(x)` (or a kernel vector of `W`).
pub fn verify_isometry(witness: &ExactMatrix, f: &QuadraticForm, g: &QuadraticForm) -> Result<Certificate> {
    if !witness.is_square() || witness.rows() != f.rank() || g.rank() != f.rank() {
        return Err(Error::DimensionMismatch(format!(
            "witness {}x{} between forms of rank {} and {}",
            witness.rows(),
            witness.cols(),
            f.rank(),
            g.rank()
        )));
    }
    let field = f.field();
    let cert = Certificate::pass("isometry")
        .with_field(field)
        .witness("matrix", witness.to_json());
    let pulled = g.pullback(witness)?;
    let n = f.rank();
    let unit = |i: usize| {
        let mut v = vec![field.zero(); n];
        v[i] = field.one();
        v
    };
    let offender = (0..n)
        .find(|&i| pulled.gram.get(i, i) != f.gram.get(i, i))
        .map(unit)
        .or_else(|| {
            (0..n).find_map(|i| {
                (i + 1..n).find(|&j| pulled.gram.get(i, j) != f.gram.get(i, j)).map(|j| {
                    let mut v = unit(i);
                    v[j] = field.one();
                    v
                })
            })
        });
    if let Some(x) = offender {
        let wx = witness.mul_vec(&x)?;
        return Ok(cert.into_failure(json!({
            "x": x.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "q_source": f.q_value(&x)?.to_json(),
            "q_target_of_image": g.q_value(&wx)?.to_json(),
        })));
    }
    if !witness.is_invertible() {
        let k = witness.kernel_basis();
        return Ok(cert.into_failure(json!({
            "kernel_vector": k.vectors()[0].iter().map(Scalar::to_json).collect::<Vec<_>>(),
        })));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const Q: FieldDescriptor = FieldDescriptor::Rationals;

    fn fp(p: u64) -> FieldDescriptor {
        FieldDescriptor::prime(p).unwrap()
    }

    fn vecs(f: FieldDescriptor, xs: &[i64]) -> Vec<Scalar> {
        xs.iter().map(|&x| f.from_i64(x)).collect()
    }

    fn qdiag(f: FieldDescriptor, xs: &[i64]) -> QuadraticForm {
        QuadraticForm::from_q_diagonal(f, &vecs(f, xs)).unwrap()
    }

    #[test]
    fn q_values() {
        let h = hyperbolic_form(1, Q);
        assert_eq!(h.q_value(&vecs(Q, &[1, 1])).unwrap(), Q.one());
        assert_eq!(h.q_value(&vecs(Q, &[0, 0])).unwrap(), Q.zero());
        assert_eq!(h.q_value(&vecs(Q, &[1, 7])).unwrap(), Q.from_i64(7));
        let f7 = fp(7);
        let g = QuadraticForm::new(ExactMatrix::identity(3, f7).scale(&f7.from_i64(2))).unwrap();
        assert_eq!(g.q_value(&vecs(f7, &[1, 1, 1])).unwrap(), f7.from_i64(3));
        assert!(matches!(h.q_value(&vecs(Q, &[1])), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn construction_rejects_asymmetric_gram() {
        let g = ExactMatrix::from_i64s(2, 2, Q, &[0, 1, 2, 0]);
        assert!(QuadraticForm::new(g).is_err());
        assert!(QuadraticForm::new(ExactMatrix::zeros(2, 3, Q)).is_err());
    }

    #[test]
    fn hyperbolic_and_sums() {
        assert_eq!(hyperbolic_form(1, Q).gram(), &ExactMatrix::from_i64s(2, 2, Q, &[0, 1, 1, 0]));
        let h2 = hyperbolic_form(2, Q);
        assert_eq!(orthogonal_sum(&hyperbolic_form(1, Q), &hyperbolic_form(1, Q)).unwrap(), h2);
        assert_eq!(orthogonal_sum(&h2, &QuadraticForm::zero(Q)).unwrap(), h2);
        let f5 = fp(5);
        let s = orthogonal_sum(&qdiag(f5, &[1]), &qdiag(f5, &[-1])).unwrap();
        assert_eq!(s.gram(), &ExactMatrix::from_i64s(2, 2, f5, &[2, 0, 0, -2]));
        assert!(matches!(orthogonal_sum(&h2, &hyperbolic_form(1, f5)), Err(Error::MixedFields(..))));
    }

    #[test]
    fn nonsingularity() {
        assert!(hyperbolic_form(1, Q).is_nonsingular());
        assert_eq!(hyperbolic_form(1, Q).discriminant(), Q.from_i64(-1));
        let degenerate = QuadraticForm::new(ExactMatrix::from_i64s(2, 2, Q, &[1, 0, 0, 0])).unwrap();
        assert!(!degenerate.is_nonsingular());
        assert_eq!(degenerate.diagonalize(), Err(Error::SingularForm));
    }

    #[test]
    fn diagonalize_follows_pivot_rule() {
        let d = qdiag(Q, &[3, -1, 2]).diagonalize().unwrap();
        assert!(d.change_of_basis.is_identity());
        assert_eq!(d.diagonal, vecs(Q, &[6, -2, 4]));

        let h = hyperbolic_form(1, Q).diagonalize().unwrap();
        let half = Q.from_i64(1).checked_div(&Q.from_i64(2)).unwrap();
        assert_eq!(h.diagonal, vec![Q.from_i64(2), -half]);
    }

    #[test]
    fn diagonalization_is_a_congruence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for f in [Q, fp(7), fp(109)] {
            for _ in 0..200 {
                let n = rng.gen_range(1..=6);
                let form = random_symmetric(&mut rng, f, n);
                let Ok(d) = form.diagonalize() else {
                    assert!(!form.is_nonsingular());
                    continue;
                };
                let pulled = form.pullback(&d.change_of_basis).unwrap();
                assert_eq!(pulled.gram(), &ExactMatrix::diagonal(f, &d.diagonal).unwrap());
                assert!(d.change_of_basis.is_invertible());
            }
        }
    }

    fn random_symmetric(rng: &mut ChaCha8Rng, f: FieldDescriptor, n: usize) -> QuadraticForm {
        let mut g = ExactMatrix::zeros(n, n, f);
        for i in 0..n {
            for j in i..n {
                // sparse entries make the zero-diagonal branches of the pivot rule likely
                let v = if rng.gen_bool(0.4) { f.zero() } else { f.random(rng, 4) };
                g.set(i, j, v.clone());
                g.set(j, i, v);
            }
        }
        QuadraticForm::new(g).unwrap()
    }

    #[test]
    fn isotropic_examples() {
        let f5 = fp(5);
        let f7 = fp(7);
        assert_eq!(qdiag(f5, &[1, -1]).find_isotropic().unwrap(), Some(vecs(f5, &[1, 1])));
        assert_eq!(qdiag(f5, &[1, 1]).find_isotropic().unwrap(), Some(vecs(f5, &[1, 2])));
        // brute force: x² + y² never vanishes on the 48 nonzero vectors mod 7
        let anisotropic = (0..7)
            .flat_map(|x| (0..7).map(move |y| (x, y)))
            .filter(|&(x, y)| (x, y) != (0, 0))
            .all(|(x, y)| (x * x + y * y) % 7 != 0);
        assert!(anisotropic);
        assert_eq!(qdiag(f7, &[1, 1]).find_isotropic().unwrap(), None);
        assert_eq!(qdiag(f7, &[3]).find_isotropic().unwrap(), None);
        assert_eq!(hyperbolic_form(1, Q).find_isotropic(), Err(Error::WrongField));
        let singular = QuadraticForm::new(ExactMatrix::zeros(2, 2, f7)).unwrap();
        assert_eq!(singular.find_isotropic(), Err(Error::SingularForm));
    }

    #[test]
    fn isotropic_search_works_for_large_primes() {
        let big = fp((1 << 61) - 1);
        for diag in [[1, 1, 1], [1, 3, 5], [-2, 7, 11]] {
            let form = qdiag(big, &diag);
            let x = form.find_isotropic().unwrap().unwrap();
            assert!(form.q_value(&x).unwrap().is_zero());
            assert!(x.iter().any(|c| !c.is_zero()));
        }
    }

    #[test]
    fn witt_examples() {
        let f7 = fp(7);
        let h3 = hyperbolic_form(3, f7).witt_decompose().unwrap();
        assert_eq!(h3.witt_index, 3);
        assert_eq!(h3.anisotropic_residue.rank(), 0);
        assert_eq!(qdiag(f7, &[1, 1, 1, 1]).witt_decompose().unwrap().witt_index, 2);
        let aniso = qdiag(f7, &[1, 1]);
        let w = aniso.witt_decompose().unwrap();
        assert_eq!(w.witt_index, 0);
        assert_eq!(w.anisotropic_residue, aniso);
        assert_eq!(hyperbolic_form(1, Q).witt_decompose(), Err(Error::WrongField));
    }

    #[test]
    fn witt_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for p in [3, 5, 7, 11, 109] {
            let f = fp(p);
            for _ in 0..100 {
                let n = rng.gen_range(1..=8);
                let form = random_symmetric(&mut rng, f, n);
                if !form.is_nonsingular() {
                    continue;
                }
                let w = form.witt_decompose().unwrap();
                assert!(w.anisotropic_residue.rank() <= 2);
                assert_eq!(2 * w.witt_index + w.anisotropic_residue.rank(), n);
                let t = &w.change_of_basis;
                let tinv = t.inverse().unwrap();
                let rebuilt = w.model().unwrap().pullback(&tinv).unwrap();
                assert_eq!(rebuilt, form);
                if w.anisotropic_residue.rank() > 0 {
                    assert_eq!(w.anisotropic_residue.find_isotropic().unwrap(), None);
                }
            }
        }
    }

    #[test]
    fn isometry_classification() {
        let f5 = fp(5);
        let f7 = fp(7);
        let h = hyperbolic_form(1, f5);
        assert!(is_isometric_ff(&h, &h).unwrap());
        assert!(is_isometric_ff(&qdiag(f5, &[1, -1]), &h).unwrap());
        assert!(!is_isometric_ff(&qdiag(f7, &[1, 1]), &hyperbolic_form(1, f7)).unwrap());
        assert!(!is_isometric_ff(&qdiag(f7, &[1, 1]), &qdiag(f7, &[1])).unwrap());
        assert_eq!(is_isometric_ff(&hyperbolic_form(1, Q), &hyperbolic_form(1, Q)), Err(Error::WrongField));
    }

    #[test]
    fn explicit_isometries_agree_with_classification() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for p in [3, 5, 7, 13] {
            let f = fp(p);
            for _ in 0..150 {
                let n = rng.gen_range(1..=5);
                let a = random_symmetric(&mut rng, f, n);
                let b = random_symmetric(&mut rng, f, n);
                if !a.is_nonsingular() || !b.is_nonsingular() {
                    continue;
                }
                let w = a.isometry_witness_ff(&b).unwrap();
                assert_eq!(w.is_some(), is_isometric_ff(&a, &b).unwrap());
                if let Some(w) = w {
                    assert!(verify_isometry(&w, &a, &b).unwrap().passed());
                }
            }
        }
    }

    #[test]
    fn verify_isometry_examples() {
        let h = hyperbolic_form(1, Q);
        let id = ExactMatrix::identity(2, Q);
        assert!(verify_isometry(&id, &h, &h).unwrap().passed());
        let swap = ExactMatrix::from_i64s(2, 2, Q, &[0, 1, 1, 0]);
        assert!(verify_isometry(&swap, &h, &h).unwrap().passed());
        let stretch = ExactMatrix::from_i64s(2, 2, Q, &[2, 0, 0, 1]);
        let cert = verify_isometry(&stretch, &h, &h).unwrap();
        assert!(!cert.passed());
        // diagonals agree (both 0), the off-diagonal mismatch is exposed by e1 + e2
        let ce = cert.counterexample.unwrap();
        assert_eq!(ce["x"], json!(["1", "1"]));
        assert_eq!(ce["q_source"], json!("1"));
        assert_eq!(ce["q_target_of_image"], json!("2"));
        assert!(matches!(
            verify_isometry(&ExactMatrix::identity(3, Q), &h, &h),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(Isometry::new(h.clone(), h.clone(), stretch).is_err());
        assert!(Isometry::new(h.clone(), h, swap).is_ok());
    }

    #[test]
    fn polar_identity_and_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for f in [Q, fp(5), fp(109)] {
            for _ in 0..2_500 {
                let n = rng.gen_range(1..=5);
                let form = random_symmetric(&mut rng, f, n);
                let x: Vec<Scalar> = (0..n).map(|_| f.random(&mut rng, 9)).collect();
                let y: Vec<Scalar> = (0..n).map(|_| f.random(&mut rng, 9)).collect();
                let a = f.random(&mut rng, 9);
                let ax: Vec<Scalar> = x.iter().map(|c| &a * c).collect();
                let qx = form.q_value(&x).unwrap();
                assert_eq!(form.q_value(&ax).unwrap(), &(&a * &a) * &qx);
                let sum: Vec<Scalar> = x.iter().zip(&y).map(|(u, v)| u + v).collect();
                let polar = form.q_value(&sum).unwrap() - qx - form.q_value(&y).unwrap();
                assert_eq!(polar, form.polar(&x, &y).unwrap());
            }
        }
    }

    #[test]
    fn form_json_round_trip() {
        let f = qdiag(fp(7), &[1, 3]);
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["field"], "fp:7");
        let back: QuadraticForm = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
        let bad = json!({"gram": {"rows": 1, "cols": 1, "field": "q", "entries": ["1"]}, "field": "fp:7"});
        assert!(serde_json::from_value::<QuadraticForm>(bad).is_err());
    }
}
