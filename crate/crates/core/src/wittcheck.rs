//! Seeded fuzzing of Witt cancellation over finite fields, an exhaustive
//! cross-check of isotropic vector search, and the stabilization chain
//! `SO(G3) → SO(G4) → SO(G5) → SO(G6)` on random elements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::groups::{derive_seed, diagonal_embedding, random_element, GroupDescriptor, GroupElement};
use crate::linalg::{wedge_square, ExactMatrix};
use crate::quadform::{hyperbolic_form, is_isometric_ff, orthogonal_sum, QuadraticForm};
use crate::scalar::{is_prime_u64, FieldDescriptor, Scalar};
use crate::sporadic::{first_failure, spin3_map, spin4_map, spin5_map, spin6_map, trace_zero_inclusion, FormTable};

/// Largest rank the fuzzers generate.
pub const MAX_RANK: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzPlan {
    pub fields: Vec<u64>,
    pub min_rank: usize,
    pub max_rank: usize,
    pub samples: usize,
    pub seed: u64,
}

impl FuzzPlan {
    pub fn new(fields: Vec<u64>, min_rank: usize, max_rank: usize, samples: usize, seed: u64) -> Result<Self> {
        if min_rank == 0 || min_rank > max_rank || max_rank > MAX_RANK {
            return Err(Error::InvalidArgument(format!(
                "rank bounds must satisfy 1 <= {min_rank} <= {max_rank} <= {MAX_RANK}"
            )));
        }
        if fields.is_empty() {
            return Err(Error::InvalidArgument("no fields to fuzz".into()));
        }
        for &p in &fields {
            if p == 2 || !is_prime_u64(p) {
                return Err(Error::InvalidModulus(p));
            }
        }
        Ok(FuzzPlan { fields, min_rank, max_rank, samples, seed })
    }

    /// `𝔽₅, 𝔽₇, 𝔽₁₁, 𝔽₁₀₉`, ranks 1 to 8.
    pub fn standard(samples: usize, seed: u64) -> Self {
        FuzzPlan::new(vec![5, 7, 11, 109], 1, MAX_RANK, samples, seed).expect("valid")
    }
}

fn random_matrix<R: Rng>(rng: &mut R, field: FieldDescriptor, rows: usize, cols: usize) -> ExactMatrix {
    let e = (0..rows * cols).map(|_| field.random(rng, 0)).collect();
    ExactMatrix::new(rows, cols, field, e).expect("sized")
}

/// Uniform nonsingular symmetric Gram of the given rank.
pub fn random_nonsingular_form<R: Rng>(rng: &mut R, field: FieldDescriptor, rank: usize) -> QuadraticForm {
    loop {
        let mut g = ExactMatrix::zeros(rank, rank, field);
        for i in 0..rank {
            for j in i..rank {
                let v = field.random(rng, 0);
                if i == j {
                    // diagonal of B is 2q, any value is allowed in odd characteristic
                    g.set(i, i, v);
                } else {
                    g.set(i, j, v.clone());
                    g.set(j, i, v);
                }
            }
        }
        let f = QuadraticForm::new(g).expect("symmetric");
        if f.is_nonsingular() {
            return f;
        }
    }
}

fn random_invertible<R: Rng>(rng: &mut R, field: FieldDescriptor, n: usize) -> ExactMatrix {
    loop {
        let m = random_matrix(rng, field, n, n);
        if m.is_invertible() {
            return m;
        }
    }
}

/// Outcome of one cancellation sample.
#[derive(Default)]
struct PairOutcome {
    antecedent: bool,
    stably_checked: bool,
    failure: Option<Value>,
}

fn pair_json(q1: &QuadraticForm, q2: &QuadraticForm, reason: &str) -> Value {
    json!({"q1": q1.gram().to_json(), "q2": q2.gram().to_json(), "reason": reason})
}

/// One pair: if `q1 ⊥ ℍ ≅ q2 ⊥ ℍ` then an explicit isometry `q1 ≅ q2` is
/// built and checked; and if `q1 ⊥ ℍ` is hyperbolic then so is `q1`.
pub fn check_cancellation_pair(q1: &QuadraticForm, q2: &QuadraticForm) -> Result<(bool, bool, Option<Value>)> {
    let h = hyperbolic_form(1, q1.field());
    let s1 = orthogonal_sum(q1, &h)?;
    let s2 = orthogonal_sum(q2, &h)?;
    let stable = is_isometric_ff(&s1, &s2)?;
    let unstable = is_isometric_ff(q1, q2)?;
    if stable {
        if !unstable {
            return Ok((true, false, Some(pair_json(q1, q2, "cancellation fails"))));
        }
        let w = q1.isometry_witness_ff(q2)?.ok_or(Error::InvalidArgument("no witness".into()))?;
        if q2.pullback(&w)?.gram() != q1.gram() || !w.is_invertible() {
            return Ok((true, false, Some(pair_json(q1, q2, "cancelled witness does not verify"))));
        }
    }
    let n = q1.rank();
    let mut stably_checked = false;
    if n % 2 == 0 && s1.witt_decompose()?.witt_index == n / 2 + 1 {
        stably_checked = true;
        if q1.witt_decompose()?.witt_index != n / 2 {
            return Ok((stable, true, Some(pair_json(q1, q2, "stably hyperbolic but not hyperbolic"))));
        }
    }
    Ok((stable, stably_checked, None))
}

fn cancellation_sample(field: FieldDescriptor, plan: &FuzzPlan, seed: u64, index: u64) -> Result<PairOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index));
    let r = rng.gen_range(plan.min_rank..=plan.max_rank);
    let q1 = random_nonsingular_form(&mut rng, field, r);
    // a third of the pairs are isometric by construction, a third are scaled
    let q2 = match index % 3 {
        0 => q1.pullback(&random_invertible(&mut rng, field, r))?,
        1 => q1.scaled(&field.random_nonzero(&mut rng, 0)),
        _ => random_nonsingular_form(&mut rng, field, r),
    };
    let (antecedent, stably_checked, failure) = check_cancellation_pair(&q1, &q2)?;
    Ok(PairOutcome { antecedent, stably_checked, failure })
}

/// Runs `plan.samples` pairs per field. The witness lists, per field, how
/// many pairs had a true antecedent and how many passed vacuously.
pub fn run_cancellation_suite(plan: &FuzzPlan) -> Result<Certificate> {
    let mut per_field = Vec::new();
    let mut failure = None;
    for (fi, &p) in plan.fields.iter().enumerate() {
        let field = FieldDescriptor::prime(p)?;
        let seed = derive_seed(plan.seed, fi as u64);
        let outcomes: Vec<Result<PairOutcome>> = (0..plan.samples as u64)
            .into_par_iter()
            .map(|i| cancellation_sample(field, plan, seed, i))
            .collect();
        let (mut antecedent, mut stably, mut failures) = (0u64, 0u64, 0u64);
        for o in outcomes {
            let o = o?;
            antecedent += u64::from(o.antecedent);
            stably += u64::from(o.stably_checked);
            if let Some(mut ce) = o.failure {
                failures += 1;
                ce["field"] = json!(field.tag());
                failure.get_or_insert(ce);
            }
        }
        per_field.push(json!({
            "field": field.tag(),
            "pairs": plan.samples,
            "passed": plan.samples as u64 - failures,
            "antecedent_true": antecedent,
            "vacuous": plan.samples as u64 - antecedent,
            "stably_hyperbolic_checked": stably,
        }));
    }
    let cert = Certificate::pass("cancellation")
        .with_seed(plan.seed)
        .with_samples((plan.samples * plan.fields.len()) as u64)
        .witness("rank_bounds", json!([plan.min_rank, plan.max_rank]))
        .witness("per_field", Value::Array(per_field));
    Ok(match failure {
        Some(ce) => cert.into_failure(ce),
        None => cert,
    })
}

/// `xᵗGx = 2q(x)` on residues; same zeros as `q` in odd characteristic.
fn q_residue(gram: &[Vec<u64>], x: &[u64], p: u64) -> u64 {
    let n = x.len();
    let mut s: u128 = 0;
    for i in 0..n {
        for j in 0..n {
            s += u128::from(gram[i][j]) * u128::from(x[i]) % u128::from(p) * u128::from(x[j]);
            s %= u128::from(p);
        }
    }
    s as u64
}

/// Brute force: does a nonzero isotropic vector exist?
fn exhaustive_isotropic(gram: &[Vec<u64>], p: u64) -> bool {
    let n = gram.len();
    let mut x = vec![0u64; n];
    loop {
        let mut k = 0;
        while k < n {
            x[k] += 1;
            if x[k] < p {
                break;
            }
            x[k] = 0;
            k += 1;
        }
        if k == n {
            return false;
        }
        if q_residue(gram, &x, p) == 0 {
            return true;
        }
    }
}

/// `find_isotropic` against exhaustive search on `forms` random nonsingular
/// forms over `𝔽_p`, `p ∈ {3, 5, 7, 11}`, rank 1 to 4.
pub fn check_isotropic_exhaustive(forms: usize, seed: u64) -> Result<Certificate> {
    const PRIMES: [u64; 4] = [3, 5, 7, 11];
    let failure = first_failure(forms, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i));
        let p = PRIMES[i as usize % PRIMES.len()];
        let field = FieldDescriptor::prime(p)?;
        let rank = rng.gen_range(1..=4);
        let q = random_nonsingular_form(&mut rng, field, rank);
        let gram: Vec<Vec<u64>> = (0..rank)
            .map(|r| (0..rank).map(|c| q.gram().get(r, c).residue().expect("finite")).collect())
            .collect();
        let brute = exhaustive_isotropic(&gram, p);
        let found = q.find_isotropic()?;
        let ok = match &found {
            None => !brute,
            Some(x) => brute && x.iter().any(|v| !v.is_zero()) && q.q_value(x)?.is_zero(),
        };
        Ok((!ok).then(|| {
            json!({
                "field": field.tag(),
                "gram": q.gram().to_json(),
                "exhaustive": brute,
                "found": found.map(|x| x.iter().map(Scalar::to_json).collect::<Vec<_>>()),
            })
        }))
    })?;
    let cert = Certificate::pass("isotropic_exhaustive")
        .with_seed(seed)
        .with_samples(forms as u64)
        .witness("primes", json!(PRIMES))
        .witness("max_rank", 4);
    Ok(match failure {
        Some(ce) => cert.into_failure(ce),
        None => cert,
    })
}

/// The chain for one `A ∈ SL₂`. Returns the failing stage, if any.
///
/// In the basis `[stab45·(E12, H, E21), stab45·I, e12 − e34, e12 + e34]` of
/// Λ², `Λ²diag(A, A)` must be `diag(spin3(A), 1, 1, 1)`.
pub fn chain_stages(a: &GroupElement, table: &FormTable) -> Result<Option<Value>> {
    let f = a.field();
    let fail = |stage: &str| Ok(Some(json!({"stage": stage, "a": a.matrix().to_json()})));
    let g3 = spin3_map(a)?;
    let (x, y) = diagonal_embedding(a);
    let g4 = spin4_map(&x, &y)?;
    let z = trace_zero_inclusion(f);
    let id_vec = ExactMatrix::identity(2, f).flatten();
    if g4.matrix().try_mul(&z)? != z.try_mul(g3.matrix())? || g4.matrix().mul_vec(&id_vec)? != id_vec {
        return fail("stab34");
    }
    let s = ExactMatrix::block_diag(&[a.matrix(), a.matrix()])?;
    let sp = GroupElement::new(GroupDescriptor::sp4(f), s.clone())?;
    let l6 = wedge_square(&s)?;
    if l6.try_mul(&table.stab45)? != table.stab45.try_mul(g4.matrix())? {
        return fail("stab45");
    }
    let g5 = spin5_map(&sp)?;
    let p = table.stab56_basis();
    let one = ExactMatrix::identity(1, f);
    if p.inverse()?.try_mul(&l6)?.try_mul(&p)? != ExactMatrix::block_diag(&[g5.matrix(), &one])? {
        return fail("stab56");
    }
    let g6 = spin6_map(&GroupElement::new(GroupDescriptor::sl(4, f), s)?)?;
    if g6.matrix() != &l6 {
        return fail("spin6");
    }
    let mut cols: Vec<Vec<Scalar>> = (0..3).map(|j| table.stab45.mul_vec(&z.column(j))).collect::<Result<_>>()?;
    cols.push(table.stab45.mul_vec(&id_vec)?);
    let u = crate::sporadic::wedge_unit(f, 0, 1);
    let v = crate::sporadic::wedge_unit(f, 2, 3);
    cols.push(u.iter().zip(&v).map(|(a, b)| a - b).collect());
    cols.push(u.iter().zip(&v).map(|(a, b)| a + b).collect());
    let c = ExactMatrix::from_columns(f, &cols)?;
    let composite = c.inverse()?.try_mul(&l6)?.try_mul(&c)?;
    let expected = ExactMatrix::block_diag(&[g3.matrix(), &ExactMatrix::identity(3, f)])?;
    if composite != expected {
        return fail("composite");
    }
    let preserved = l6.transpose().try_mul(&table.g6)?.try_mul(&l6)? == table.g6;
    if !preserved {
        return fail("G6_preservation");
    }
    Ok(None)
}

/// Identity, the diagonal elements `diag(t, 1/t)` for `t = 2, 3, 5` (with
/// their expected images), and `samples` random elements of `SL₂(ℚ)`.
pub fn run_stabilization_chain(seed: u64, samples: usize) -> Result<Certificate> {
    let f = FieldDescriptor::Rationals;
    let table = FormTable::new(f);
    let sl2 = GroupDescriptor::sl(2, f);
    let mut failures: Vec<Value> = Vec::new();
    if let Some(ce) = chain_stages(&GroupElement::identity(sl2.clone()), &table)? {
        failures.push(ce);
    }
    for t in [2i64, 3, 5] {
        let tt = f.from_i64(t);
        let ti = tt.inv()?;
        let a = GroupElement::new(sl2.clone(), ExactMatrix::diagonal(f, &[tt.clone(), ti.clone()])?)?;
        if let Some(ce) = chain_stages(&a, &table)? {
            failures.push(ce);
        }
        let sq = &tt * &tt;
        let expected3 = ExactMatrix::diagonal(f, &[sq.clone(), f.one(), sq.inv()?])?;
        // wedge basis e12, e13, e14, e23, e24, e34 with diagonal (t, 1/t, t, 1/t)
        let expected6 = ExactMatrix::diagonal(f, &[f.one(), sq.clone(), f.one(), f.one(), sq.inv()?, f.one()])?;
        let s = ExactMatrix::block_diag(&[a.matrix(), a.matrix()])?;
        if spin3_map(&a)?.matrix() != &expected3 || wedge_square(&s)? != expected6 {
            failures.push(json!({"stage": "diagonal", "t": t}));
        }
    }
    let sampled = first_failure(samples, |i| {
        let a = random_element(&sl2, derive_seed(seed, i), 6)?;
        chain_stages(&a, &table)
    })?;
    failures.extend(sampled);
    let cert = Certificate::pass("chain")
        .with_field(f)
        .with_seed(seed)
        .with_samples(samples as u64 + 4)
        .witness("stages", json!(["spin3", "stab34", "stab45", "stab56", "spin6", "composite"]));
    Ok(match failures.into_iter().next() {
        Some(ce) => cert.into_failure(ce),
        None => cert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(p: u64, d: &[i64]) -> QuadraticForm {
        let f = FieldDescriptor::prime(p).unwrap();
        QuadraticForm::new(ExactMatrix::diagonal(f, &d.iter().map(|&x| f.from_i64(x)).collect::<Vec<_>>()).unwrap()).unwrap()
    }

    #[test]
    fn plan_validation() {
        assert!(FuzzPlan::new(vec![7], 1, 9, 10, 0).is_err());
        assert!(FuzzPlan::new(vec![2], 1, 4, 10, 0).is_err());
        assert!(FuzzPlan::new(vec![9], 1, 4, 10, 0).is_err());
        assert!(FuzzPlan::new(vec![7], 0, 4, 10, 0).is_err());
        assert!(FuzzPlan::new(vec![7, 109], 2, 4, 10, 0).is_ok());
    }

    #[test]
    fn hyperbolic_pair_is_trivial() {
        let f = FieldDescriptor::prime(7).unwrap();
        let h = hyperbolic_form(1, f);
        let (antecedent, stably, failure) = check_cancellation_pair(&h, &h).unwrap();
        assert!(antecedent && stably && failure.is_none());
    }

    #[test]
    fn different_disc_class_is_vacuous() {
        // 3 is a non-square mod 7
        let (antecedent, _, failure) = check_cancellation_pair(&diag(7, &[2, 2]), &diag(7, &[2, 6])).unwrap();
        assert!(!antecedent);
        assert!(failure.is_none());
    }

    #[test]
    fn rank_four_pairs_over_f7() {
        let plan = FuzzPlan::new(vec![7], 4, 4, 500, 3).unwrap();
        let c = run_cancellation_suite(&plan).unwrap();
        assert!(c.passed(), "{:?}", c.counterexample);
        let pf = &c.witness["per_field"][0];
        assert_eq!(pf["passed"], 500);
        assert!(pf["antecedent_true"].as_u64().unwrap() >= 167);
        assert!(pf["vacuous"].as_u64().unwrap() > 0);
    }

    #[test]
    fn exhaustive_oracle() {
        let p = 5;
        assert!(exhaustive_isotropic(&[vec![2, 0], vec![0, 8]], p));
        assert!(!exhaustive_isotropic(&[vec![2, 0], vec![0, 2]], 7));
        assert!(check_isotropic_exhaustive(200, 1).unwrap().passed());
    }

    #[test]
    fn chain_examples() {
        let c = run_stabilization_chain(0, 100).unwrap();
        assert!(c.passed(), "{:?}", c.counterexample);
    }

    #[test]
    fn broken_table_names_a_stage() {
        let f = FieldDescriptor::Rationals;
        let mut t = FormTable::new(f);
        t.stab45 = t.stab45.scale(&f.from_i64(-1));
        let mut cols: Vec<Vec<Scalar>> = (0..4).map(|j| t.stab45.column(j)).collect();
        cols.swap(0, 3);
        t.stab45 = ExactMatrix::from_columns(f, &cols).unwrap();
        let a = GroupElement::new(
            GroupDescriptor::sl(2, f),
            ExactMatrix::from_i64s(2, 2, f, &[1, 1, 0, 1]),
        )
        .unwrap();
        let ce = chain_stages(&a, &t).unwrap().unwrap();
        assert_eq!(ce["stage"], "stab45");
    }
}
