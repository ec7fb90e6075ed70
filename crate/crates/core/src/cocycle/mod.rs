//! Transition data over abstract covers: cocycle and structure checks by
//! randomized evaluation over a large prime field, pushforward along the
//! sporadic representations, twisting by scalar cocycles, and coboundary
//! witnesses.
//!
//! Identity testing: a claimed identity `f = g` of rational functions is
//! evaluated at `r` uniformly random points of `𝔽_p^n` avoiding every
//! denominator. If the difference has numerator degree `≤ d` and the
//! excluded denominators have total degree `≤ e`, a false identity survives
//! one point with probability at most `d / (p − e)`. A FAIL is definitive
//! and carries its point.

mod expr;

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

pub use expr::{exact_equal, fraction, simplify, Degree, Expr, Kind, Poly};

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::groups::derive_seed;
use crate::linalg::{ExactMatrix, WEDGE_BASIS};
use crate::scalar::{FieldDescriptor, Scalar};
use crate::sporadic::FormTable;

/// Row-major square matrix of expressions.
pub type ExprMatrix = Vec<Vec<Expr>>;

/// Default evaluation prime `2⁶¹ − 1`.
pub const DEFAULT_PRIME: u64 = (1 << 61) - 1;

/// Attempts per sample point before a cover is declared degenerate.
const MAX_ATTEMPTS: usize = 200;

pub fn expr_identity(r: usize) -> ExprMatrix {
    (0..r).map(|i| (0..r).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect()
}

pub fn expr_mul(a: &ExprMatrix, b: &ExprMatrix) -> ExprMatrix {
    let (n, m, k) = (a.len(), b.first().map_or(0, Vec::len), b.len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(Expr::zero(), |acc, l| acc.add(&a[i][l].mul(&b[l][j]))))
                .collect()
        })
        .collect()
}

fn expr_sub(a: &ExprMatrix, b: &ExprMatrix) -> ExprMatrix {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u.sub(v)).collect()).collect()
}

fn expr_transpose(a: &ExprMatrix) -> ExprMatrix {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

fn expr_scale(a: &ExprMatrix, u: &Expr) -> ExprMatrix {
    a.iter().map(|row| row.iter().map(|e| u.mul(e)).collect()).collect()
}

fn minor(a: &ExprMatrix, row: usize, col: usize) -> ExprMatrix {
    a.iter()
        .enumerate()
        .filter(|&(i, _)| i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, e)| e.clone()).collect())
        .collect()
}

/// Determinant by cofactor expansion along the first row.
pub fn expr_det(a: &ExprMatrix) -> Expr {
    match a.len() {
        0 => Expr::one(),
        1 => a[0][0].clone(),
        n => (0..n).fold(Expr::zero(), |acc, j| {
            let term = a[0][j].mul(&expr_det(&minor(a, 0, j)));
            if j % 2 == 0 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            }
        }),
    }
}

pub fn expr_adjugate(a: &ExprMatrix) -> ExprMatrix {
    let n = a.len();
    if n == 1 {
        return vec![vec![Expr::one()]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = expr_det(&minor(a, j, i));
                    if (i + j) % 2 == 0 {
                        c
                    } else {
                        c.neg()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn expr_inverse(a: &ExprMatrix) -> ExprMatrix {
    expr_scale(&expr_adjugate(a), &expr_det(a).inv())
}

/// A rational matrix as constant expressions.
pub fn expr_constant(m: &ExactMatrix) -> Result<ExprMatrix> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    m.get(i, j)
                        .as_rational()
                        .map(|q| Expr::constant(q.clone()))
                        .ok_or_else(|| Error::InvalidArgument("constant matrices must be rational".into()))
                })
                .collect()
        })
        .collect()
}

fn max_degree<'a>(entries: impl IntoIterator<Item = &'a Expr>) -> Degree {
    entries.into_iter().fold(Degree::default(), |acc, e| Degree {
        numerator: acc.numerator.max(e.degree().numerator),
        denominator: acc.denominator.max(e.degree().denominator),
    })
}

fn flat(m: &ExprMatrix) -> impl Iterator<Item = &Expr> {
    m.iter().flatten()
}

/// Value of every entry at `point`, `None` if some denominator vanishes.
pub fn eval_matrix(m: &ExprMatrix, field: FieldDescriptor, point: &[Scalar]) -> Result<Option<ExactMatrix>> {
    let mut rows = Vec::with_capacity(m.len());
    for row in m {
        let mut out = Vec::with_capacity(row.len());
        for e in row {
            match e.eval(field, point)? {
                Some(v) => out.push(v),
                None => return Ok(None),
            }
        }
        rows.push(out);
    }
    if rows.is_empty() {
        return Ok(Some(ExactMatrix::zeros(0, 0, field)));
    }
    Ok(Some(ExactMatrix::from_rows(field, rows)?))
}

fn render(m: &ExprMatrix) -> Value {
    Value::Array(m.iter().map(|row| Value::Array(row.iter().map(|e| Value::String(e.to_string())).collect())).collect())
}

fn point_json(point: &[Scalar]) -> Value {
    Value::Array(point.iter().map(|x| json!(x.residue())).collect())
}

/// Charts `0..charts`, `vars` coordinates, and per overlap the localizing
/// functions whose zeros are excluded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    pub charts: usize,
    pub vars: usize,
    pub denominators: BTreeMap<(usize, usize), Vec<Expr>>,
    pub triples: Option<Vec<[usize; 3]>>,
}

impl Cover {
    pub fn new(charts: usize, vars: usize) -> Self {
        Cover { charts, vars, denominators: BTreeMap::new(), triples: None }
    }

    pub fn with_denominators(mut self, pair: (usize, usize), dens: Vec<Expr>) -> Self {
        self.denominators.insert(pair, dens);
        self
    }

    /// Localizing functions of the overlap `U_i ∩ U_j` (either orientation).
    pub fn overlap_denominators(&self, i: usize, j: usize) -> Vec<Expr> {
        let mut out: Vec<Expr> = self.denominators.get(&(i, j)).cloned().unwrap_or_default();
        if i != j {
            out.extend(self.denominators.get(&(j, i)).cloned().unwrap_or_default());
        }
        out
    }
}

/// Group the transition matrices are claimed to lie in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Structure {
    SL,
    /// Gram over ℚ.
    SO(ExactMatrix),
    GL,
}

impl Structure {
    pub fn name(&self) -> &'static str {
        match self {
            Structure::SL => "SL",
            Structure::SO(_) => "SO",
            Structure::GL => "GL",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Structure::SO(g) => json!({"kind": "SO", "gram": g.to_json()}),
            other => json!({"kind": other.name()}),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v.get("kind").and_then(Value::as_str) {
            Some("SL") => Ok(Structure::SL),
            Some("GL") => Ok(Structure::GL),
            Some("SO") => {
                let g = ExactMatrix::from_json(v.get("gram").ok_or_else(|| Error::Parse("SO structure needs a gram".into()))?)?;
                if g.field() != FieldDescriptor::Rationals || !g.is_symmetric() {
                    return Err(Error::Parse("SO gram must be a symmetric rational matrix".into()));
                }
                Ok(Structure::SO(g))
            }
            _ => Err(Error::Parse("structure kind must be SL, SO or GL".into())),
        }
    }
}

/// Transition matrices `g_ij` on the overlaps of a cover. `g_ii = I`; a
/// missing `g_ji` is taken to be `g_ij⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionData {
    pub cover: Cover,
    pub rank: usize,
    pub structure: Structure,
    pub transitions: BTreeMap<(usize, usize), ExprMatrix>,
}

impl TransitionData {
    pub fn new(
        cover: Cover,
        rank: usize,
        structure: Structure,
        transitions: BTreeMap<(usize, usize), ExprMatrix>,
    ) -> Result<Self> {
        if let Structure::SO(g) = &structure {
            if g.rows() != rank || g.cols() != rank {
                return Err(Error::DimensionMismatch(format!("SO gram of size {} for rank {rank}", g.rows())));
            }
        }
        let check_expr = |e: &Expr| match e.max_var() {
            Some(v) if v >= cover.vars => Err(Error::InvalidArgument(format!(
                "variable {v} used on a cover with {} variables",
                cover.vars
            ))),
            _ => Ok(()),
        };
        for (&(i, j), m) in &transitions {
            if i == j || i >= cover.charts || j >= cover.charts {
                return Err(Error::InvalidArgument(format!("bad overlap ({i}, {j})")));
            }
            if m.len() != rank || m.iter().any(|row| row.len() != rank) {
                return Err(Error::DimensionMismatch(format!("transition ({i}, {j}) is not {rank}x{rank}")));
            }
            flat(m).try_for_each(check_expr)?;
        }
        for (&(i, j), dens) in &cover.denominators {
            if i >= cover.charts || j >= cover.charts {
                return Err(Error::InvalidArgument(format!("bad overlap ({i}, {j})")));
            }
            dens.iter().try_for_each(check_expr)?;
        }
        if let Some(ts) = &cover.triples {
            if ts.iter().flatten().any(|&c| c >= cover.charts) {
                return Err(Error::InvalidArgument("triple refers to a missing chart".into()));
            }
        }
        Ok(TransitionData { cover, rank, structure, transitions })
    }

    fn has_overlap(&self, i: usize, j: usize) -> bool {
        i == j || self.transitions.contains_key(&(i, j)) || self.transitions.contains_key(&(j, i))
    }

    /// Symbolic `g_ij`.
    pub fn transition(&self, i: usize, j: usize) -> Option<ExprMatrix> {
        if i == j {
            return Some(expr_identity(self.rank));
        }
        if let Some(m) = self.transitions.get(&(i, j)) {
            return Some(m.clone());
        }
        self.transitions.get(&(j, i)).map(expr_inverse)
    }

    /// `g_ij` at `point`; `None` when undefined or singular there.
    pub fn transition_at(&self, i: usize, j: usize, field: FieldDescriptor, point: &[Scalar]) -> Result<Option<ExactMatrix>> {
        if i == j {
            return Ok(Some(ExactMatrix::identity(self.rank, field)));
        }
        if let Some(m) = self.transitions.get(&(i, j)) {
            return eval_matrix(m, field, point);
        }
        match self.transitions.get(&(j, i)) {
            Some(m) => Ok(eval_matrix(m, field, point)?.and_then(|x| x.inverse().ok())),
            None => Ok(None),
        }
    }

    /// Declared triples, or every increasing triple whose three overlaps
    /// carry transitions.
    pub fn triples(&self) -> Vec<[usize; 3]> {
        if let Some(ts) = &self.cover.triples {
            return ts.clone();
        }
        let n = self.cover.charts;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if self.has_overlap(i, j) && self.has_overlap(j, k) && self.has_overlap(i, k) {
                        out.push([i, j, k]);
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut pairs: Vec<(usize, usize)> = self.transitions.keys().copied().collect();
        for p in self.cover.denominators.keys() {
            if !pairs.contains(p) {
                pairs.push(*p);
            }
        }
        pairs.sort();
        let overlaps: Vec<Value> = pairs
            .iter()
            .map(|p| {
                let mut o = json!({
                    "pair": [p.0, p.1],
                    "denominators": self.cover.denominators.get(p).map_or(vec![], |d| d.iter().map(Expr::to_string).collect()),
                });
                if let Some(m) = self.transitions.get(p) {
                    o["matrix"] = render(m);
                }
                o
            })
            .collect();
        let mut v = json!({
            "schema": 1,
            "charts": self.cover.charts,
            "vars": self.cover.vars,
            "rank": self.rank,
            "structure": self.structure.to_json(),
            "overlaps": overlaps,
        });
        if let Some(ts) = &self.cover.triples {
            v["triples"] = json!(ts);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let count = |k: &str| {
            v.get(k)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::Parse(format!("missing or bad `{k}`")))
        };
        let (charts, vars, rank) = (count("charts")?, count("vars")?, count("rank")?);
        let structure = Structure::from_json(v.get("structure").unwrap_or(&json!({"kind": "GL"})))?;
        let mut cover = Cover::new(charts, vars);
        let mut transitions = BTreeMap::new();
        let overlaps = v
            .get("overlaps")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing `overlaps` array".into()))?;
        for o in overlaps {
            let pair = parse_pair(o.get("pair"))?;
            if let Some(d) = o.get("denominators") {
                let dens = d
                    .as_array()
                    .ok_or_else(|| Error::Parse("`denominators` must be an array".into()))?
                    .iter()
                    .map(parse_expr)
                    .collect::<Result<Vec<_>>>()?;
                if !dens.is_empty() {
                    cover.denominators.insert(pair, dens);
                }
            }
            if let Some(m) = o.get("matrix") {
                transitions.insert(pair, parse_expr_matrix(m)?);
            }
        }
        if let Some(ts) = v.get("triples") {
            let ts: Vec<[usize; 3]> =
                serde_json::from_value(ts.clone()).map_err(|e| Error::Parse(format!("bad `triples`: {e}")))?;
            cover.triples = Some(ts);
        }
        TransitionData::new(cover, rank, structure, transitions)
    }
}

fn parse_pair(v: Option<&Value>) -> Result<(usize, usize)> {
    let p: [usize; 2] = v
        .cloned()
        .ok_or_else(|| Error::Parse("missing `pair`".into()))
        .and_then(|v| serde_json::from_value(v).map_err(|e| Error::Parse(format!("bad pair: {e}"))))?;
    Ok((p[0], p[1]))
}

fn parse_expr(v: &Value) -> Result<Expr> {
    match v {
        Value::String(s) => Expr::parse(s),
        Value::Number(n) => Expr::parse(&n.to_string()),
        _ => Err(Error::Parse(format!("expression must be a string, got {v}"))),
    }
}

pub fn parse_expr_matrix(v: &Value) -> Result<ExprMatrix> {
    v.as_array()
        .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                .iter()
                .map(parse_expr)
                .collect()
        })
        .collect()
}

/// `{"units": [{"pair": [i, j], "value": expr}, …]}`.
pub fn parse_units(v: &Value) -> Result<BTreeMap<(usize, usize), Expr>> {
    v.get("units")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing `units` array".into()))?
        .iter()
        .map(|u| Ok((parse_pair(u.get("pair"))?, parse_expr(u.get("value").ok_or_else(|| Error::Parse("unit without value".into()))?)?)))
        .collect()
}

/// `{"trivializations": [{"chart": i, "matrix": …}, …]}`.
pub fn parse_trivializations(v: &Value) -> Result<BTreeMap<usize, ExprMatrix>> {
    v.get("trivializations")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing `trivializations` array".into()))?
        .iter()
        .map(|h| {
            let chart = h
                .get("chart")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("trivialization without chart".into()))?;
            let m = parse_expr_matrix(h.get("matrix").ok_or_else(|| Error::Parse("trivialization without matrix".into()))?)?;
            Ok((chart as usize, m))
        })
        .collect()
}

/// Prime, number of points per identity, and seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvaluationPlan {
    pub prime: u64,
    pub trials: usize,
    pub seed: u64,
}

impl EvaluationPlan {
    pub fn new(prime: u64, trials: usize, seed: u64) -> Result<Self> {
        FieldDescriptor::prime(prime)?;
        if trials == 0 {
            return Err(Error::InvalidArgument("an evaluation plan needs at least one trial".into()));
        }
        Ok(EvaluationPlan { prime, trials, seed })
    }

    pub fn field(&self) -> FieldDescriptor {
        FieldDescriptor::prime(self.prime).expect("validated")
    }

    /// `log₂` of `(d / (p − e))^trials`, with `d` at least 1.
    pub fn failure_bound_log2(&self, degree: u64, excluded: u64) -> f64 {
        let d = degree.max(1) as f64;
        let room = (self.prime as f64) - excluded as f64;
        self.trials as f64 * (d.log2() - room.log2())
    }
}

/// Outcome of one sampled point.
enum PointResult {
    /// Some denominator or required inverse vanished: resample.
    Skip,
    Pass,
    Fail(Value),
}

type PointTest<'a> = Box<dyn Fn(&[Scalar]) -> Result<PointResult> + Send + Sync + 'a>;

/// One identity (or family of identities sharing a domain) to be tested.
struct IdentityGroup<'a> {
    label: Value,
    /// Bound for the difference of the two sides, over all entries.
    degree: Degree,
    /// Localizing functions of the domain.
    domain: Vec<Expr>,
    test: PointTest<'a>,
}

fn run_groups(check: &str, vars: usize, groups: Vec<IdentityGroup<'_>>, plan: &EvaluationPlan) -> Result<Certificate> {
    let field = plan.field();
    let mut worst_degree = 0u64;
    let mut worst_excluded = 0u64;
    for g in &groups {
        worst_degree = worst_degree.max(g.degree.numerator);
        let excluded = g.degree.denominator + g.domain.iter().map(|e| e.degree().numerator).sum::<u64>();
        worst_excluded = worst_excluded.max(excluded);
        if (plan.prime as u128) <= 4 * u128::from(g.degree.numerator.max(1)) {
            return Err(Error::InvalidArgument(format!(
                "prime {} too small for degree bound {}",
                plan.prime, g.degree.numerator
            )));
        }
    }
    let outcomes: Vec<Result<Option<Value>>> = groups
        .par_iter()
        .enumerate()
        .map(|(gi, g)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.seed, gi as u64));
            for _ in 0..plan.trials {
                let mut attempts = 0;
                loop {
                    attempts += 1;
                    if attempts > MAX_ATTEMPTS {
                        return Err(Error::DegenerateCover(format!("no admissible point for {}", g.label)));
                    }
                    let point: Vec<Scalar> = (0..vars).map(|_| field.random(&mut rng, 0)).collect();
                    let mut admissible = true;
                    for d in &g.domain {
                        if d.eval(field, &point)?.is_none_or(|x| x.is_zero()) {
                            admissible = false;
                            break;
                        }
                    }
                    if !admissible {
                        continue;
                    }
                    match (g.test)(&point)? {
                        PointResult::Skip => continue,
                        PointResult::Pass => break,
                        PointResult::Fail(mut ce) => {
                            ce["identity"] = g.label.clone();
                            ce["point"] = point_json(&point);
                            return Ok(Some(ce));
                        }
                    }
                }
            }
            Ok(None)
        })
        .collect();
    let mut failure = None;
    for o in outcomes {
        if let Some(ce) = o? {
            failure.get_or_insert(ce);
        }
    }
    let log2 = plan.failure_bound_log2(worst_degree, worst_excluded);
    let cert = Certificate::pass(check)
        .with_field(field)
        .with_seed(plan.seed)
        .with_samples((plan.trials * groups.len()) as u64)
        .witness("identities", groups.len())
        .witness(
            "schwartz_zippel",
            json!({
                "prime": plan.prime,
                "trials_per_identity": plan.trials,
                "degree_bound": worst_degree,
                "excluded_degree": worst_excluded,
                "failure_bound_log2": log2,
            }),
        );
    Ok(match failure {
        Some(ce) => cert.into_failure(ce),
        None => cert,
    })
}

fn matrices_equal_test(lhs: Option<ExactMatrix>, rhs: Option<ExactMatrix>) -> PointResult {
    match (lhs, rhs) {
        (Some(a), Some(b)) if a == b => PointResult::Pass,
        (Some(a), Some(b)) => PointResult::Fail(json!({"lhs": a.to_json(), "rhs": b.to_json()})),
        _ => PointResult::Skip,
    }
}

/// `g_ik = g_ij·g_jk` on every triple, and `g_ij·g_ji = I` where both
/// directions are given.
pub fn check_cocycle(t: &TransitionData, plan: &EvaluationPlan) -> Result<Certificate> {
    let field = plan.field();
    let mut groups: Vec<IdentityGroup> = Vec::new();
    for [i, j, k] in t.triples() {
        let (gij, gjk, gik) = match (t.transition(i, j), t.transition(j, k), t.transition(i, k)) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(Error::InvalidArgument(format!("triple ({i}, {j}, {k}) lacks an overlap"))),
        };
        let diff = expr_sub(&expr_mul(&gij, &gjk), &gik);
        let mut domain = t.cover.overlap_denominators(i, j);
        domain.extend(t.cover.overlap_denominators(j, k));
        domain.extend(t.cover.overlap_denominators(i, k));
        groups.push(IdentityGroup {
            label: json!({"triple": [i, j, k]}),
            degree: max_degree(flat(&diff)),
            domain,
            test: Box::new(move |pt| {
                let a = t.transition_at(i, j, field, pt)?;
                let b = t.transition_at(j, k, field, pt)?;
                let c = t.transition_at(i, k, field, pt)?;
                Ok(match (a, b) {
                    (Some(a), Some(b)) => matrices_equal_test(Some(a.try_mul(&b)?), c),
                    _ => PointResult::Skip,
                })
            }),
        });
    }
    for (&(i, j), gij) in &t.transitions {
        if i < j {
            if let Some(gji) = t.transitions.get(&(j, i)) {
                let diff = expr_sub(&expr_mul(gij, gji), &expr_identity(t.rank));
                groups.push(IdentityGroup {
                    label: json!({"inverse_pair": [i, j]}),
                    degree: max_degree(flat(&diff)),
                    domain: t.cover.overlap_denominators(i, j),
                    test: Box::new(move |pt| {
                        let a = eval_matrix(gij, field, pt)?;
                        let b = eval_matrix(gji, field, pt)?;
                        Ok(match (a, b) {
                            (Some(a), Some(b)) => matrices_equal_test(Some(a.try_mul(&b)?), Some(ExactMatrix::identity(t.rank, field))),
                            _ => PointResult::Skip,
                        })
                    }),
                });
            }
        }
    }
    run_groups("cocycle", t.cover.vars, groups, plan)
}

fn gram_in(field: FieldDescriptor, g: &ExactMatrix) -> Result<ExactMatrix> {
    g.entries()
        .iter()
        .map(|x| field.from_rational(x.as_rational().expect("rational gram")))
        .collect::<Result<Vec<_>>>()
        .and_then(|e| ExactMatrix::new(g.rows(), g.cols(), field, e))
}

/// Each given `g_ij` satisfies the equations of the declared structure at
/// sampled points: `det = 1` for SL, also `gᵗ·G·g = G` for SO, `det ≠ 0` for
/// GL.
pub fn structure_check(t: &TransitionData, plan: &EvaluationPlan) -> Result<Certificate> {
    let field = plan.field();
    let gram = match &t.structure {
        Structure::SO(g) => Some((expr_constant(g)?, gram_in(field, g)?)),
        _ => None,
    };
    let mut groups: Vec<IdentityGroup> = Vec::new();
    for (&(i, j), g) in &t.transitions {
        let det_diff = expr_det(g).sub(&Expr::one());
        let mut degree = max_degree([&det_diff]);
        if let Some((ge, _)) = &gram {
            let pres = expr_sub(&expr_mul(&expr_mul(&expr_transpose(g), ge), g), ge);
            let d = max_degree(flat(&pres));
            degree = Degree { numerator: degree.numerator.max(d.numerator), denominator: degree.denominator.max(d.denominator) };
        }
        let structure = &t.structure;
        let gram_f = gram.as_ref().map(|(_, gf)| gf.clone());
        groups.push(IdentityGroup {
            label: json!({"pair": [i, j], "structure": structure.name()}),
            degree,
            domain: t.cover.overlap_denominators(i, j),
            test: Box::new(move |pt| {
                let Some(m) = eval_matrix(g, field, pt)? else {
                    return Ok(PointResult::Skip);
                };
                let det = m.det()?;
                let ok = match structure {
                    Structure::GL => !det.is_zero(),
                    Structure::SL => det.is_one(),
                    Structure::SO(_) => {
                        let gf = gram_f.as_ref().expect("SO gram");
                        det.is_one() && &m.transpose().try_mul(gf)?.try_mul(&m)? == gf
                    }
                };
                Ok(if ok {
                    PointResult::Pass
                } else {
                    PointResult::Fail(json!({"matrix": m.to_json(), "det": det.to_json()}))
                })
            }),
        });
    }
    run_groups("structure", t.cover.vars, groups, plan)
}

/// The representations available for pushforward.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// SL₂ → SO(G3), conjugation on trace-0 matrices.
    Spin3,
    /// SL₂ → SO(G4), `M ↦ A·M·A⁻¹` on all 2×2 matrices.
    Spin4Diag,
    /// SL₄ → SO(G6), wedge square.
    Spin6Hyp3,
}

impl Representation {
    pub fn source_rank(self) -> usize {
        match self {
            Representation::Spin3 | Representation::Spin4Diag => 2,
            Representation::Spin6Hyp3 => 4,
        }
    }

    pub fn target_gram(self) -> ExactMatrix {
        let t = FormTable::new(FieldDescriptor::Rationals);
        match self {
            Representation::Spin3 => t.g3,
            Representation::Spin4Diag => t.g4,
            Representation::Spin6Hyp3 => t.g6,
        }
    }

    /// The representation applied to a symbolic matrix.
    pub fn apply(self, a: &ExprMatrix) -> ExprMatrix {
        match self {
            Representation::Spin3 => {
                let adj = expr_adjugate(a);
                let dinv = expr_det(a).inv();
                let basis = [[[0, 1], [0, 0]], [[1, 0], [0, -1]], [[0, 0], [1, 0]]];
                let cols: Vec<Vec<Expr>> = basis
                    .iter()
                    .map(|x| {
                        let x: ExprMatrix = x.iter().map(|r| r.iter().map(|&v| Expr::int(v)).collect()).collect();
                        let y = expr_scale(&expr_mul(&expr_mul(a, &x), &adj), &dinv);
                        vec![y[0][1].clone(), y[0][0].clone(), y[1][0].clone()]
                    })
                    .collect();
                expr_transpose(&cols)
            }
            Representation::Spin4Diag => {
                let inv_t = expr_transpose(&expr_inverse(a));
                (0..4)
                    .map(|r| (0..4).map(|c| a[r / 2][c / 2].mul(&inv_t[r % 2][c % 2])).collect())
                    .collect()
            }
            Representation::Spin6Hyp3 => WEDGE_BASIS
                .iter()
                .map(|&(i, j)| {
                    WEDGE_BASIS
                        .iter()
                        .map(|&(k, l)| a[i][k].mul(&a[j][l]).sub(&a[i][l].mul(&a[j][k])))
                        .collect()
                })
                .collect(),
        }
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spin3" => Ok(Representation::Spin3),
            "spin4_diag" => Ok(Representation::Spin4Diag),
            "spin6_hyp3" => Ok(Representation::Spin6Hyp3),
            _ => Err(Error::Parse(format!("unknown representation `{s}` (spin3, spin4_diag, spin6_hyp3)"))),
        }
    }
}

/// Applies `rep` to every transition and simplifies the entries; the result
/// is SO-structured for the representation's Gram.
pub fn pushforward(t: &TransitionData, rep: Representation) -> Result<TransitionData> {
    if t.rank != rep.source_rank() {
        return Err(Error::RankMismatch { expected: rep.source_rank(), actual: t.rank });
    }
    if t.structure != Structure::SL {
        return Err(Error::InvalidArgument("pushforward needs SL-structured data".into()));
    }
    let vars = t.cover.vars;
    let transitions = t
        .transitions
        .iter()
        .map(|(&p, g)| (p, rep.apply(g).iter().map(|row| row.iter().map(|e| simplify(e, vars)).collect()).collect()))
        .collect();
    let gram = rep.target_gram();
    TransitionData::new(t.cover.clone(), gram.rows(), Structure::SO(gram), transitions)
}

/// Result of [`twist_by_unit`].
#[derive(Clone, Debug)]
pub struct TwistOutcome {
    pub data: TransitionData,
    /// Whether the input structure survived; if not, `data` is GL.
    pub structure_retained: bool,
    pub unit_cocycle: Certificate,
    pub torsion: Option<Certificate>,
}

fn unit_for(units: &BTreeMap<(usize, usize), Expr>, i: usize, j: usize) -> Option<Expr> {
    units.get(&(i, j)).cloned().or_else(|| units.get(&(j, i)).map(Expr::inv))
}

/// `g_ij ↦ u_ij·g_ij` for a scalar cocycle `u`.
///
/// SL(r) structure is kept iff `u_ij^r = 1` holds as a sampled identity
/// (SO additionally needs `u_ij² = 1`); otherwise the result is GL.
pub fn twist_by_unit(
    t: &TransitionData,
    units: &BTreeMap<(usize, usize), Expr>,
    plan: &EvaluationPlan,
) -> Result<TwistOutcome> {
    let mut unit_transitions = BTreeMap::new();
    for &(i, j) in t.transitions.keys() {
        let u = unit_for(units, i, j)
            .ok_or_else(|| Error::InvalidArgument(format!("no unit given on overlap ({i}, {j})")))?;
        unit_transitions.insert((i, j), vec![vec![u]]);
    }
    let u = TransitionData::new(t.cover.clone(), 1, Structure::GL, unit_transitions)?;
    let unit_cocycle = check_cocycle(&u, plan)?;
    if !unit_cocycle.passed() {
        return Err(Error::NotACocycle(
            unit_cocycle.counterexample.as_ref().map(Value::to_string).unwrap_or_default(),
        ));
    }
    let transitions: BTreeMap<(usize, usize), ExprMatrix> = t
        .transitions
        .iter()
        .map(|(&(i, j), g)| ((i, j), expr_scale(g, &u.transitions[&(i, j)][0][0])))
        .collect();

    let exponents: Vec<i64> = match &t.structure {
        Structure::GL => vec![],
        Structure::SL => vec![t.rank as i64],
        Structure::SO(_) => vec![2, t.rank as i64],
    };
    let torsion = if exponents.is_empty() {
        None
    } else {
        let field = plan.field();
        let groups = u
            .transitions
            .iter()
            .map(|(&(i, j), m)| {
                let unit = m[0][0].clone();
                let diffs: Vec<Expr> = exponents.iter().map(|&k| unit.pow(k).sub(&Expr::one())).collect();
                let exps = exponents.clone();
                IdentityGroup {
                    label: json!({"pair": [i, j], "unit_power": exps}),
                    degree: max_degree(diffs.iter()),
                    domain: t.cover.overlap_denominators(i, j),
                    test: Box::new(move |pt| {
                        let Some(v) = unit.eval(field, pt)? else {
                            return Ok(PointResult::Skip);
                        };
                        for &k in &exps {
                            if !v.pow(k)?.is_one() {
                                return Ok(PointResult::Fail(json!({"unit": v.to_json(), "power": k})));
                            }
                        }
                        Ok(PointResult::Pass)
                    }),
                }
            })
            .collect();
        Some(run_groups("unit_torsion", t.cover.vars, groups, plan)?)
    };
    let retained = torsion.as_ref().is_none_or(Certificate::passed);
    let structure = if retained { t.structure.clone() } else { Structure::GL };
    let data = TransitionData::new(t.cover.clone(), t.rank, structure, transitions)?;
    Ok(TwistOutcome { data, structure_retained: retained, unit_cocycle, torsion })
}

/// `g_ij = h_i·h_j⁻¹` on every given overlap, checked as `g_ij·h_j = h_i`
/// at points where both trivializations are invertible.
pub fn verify_coboundary_witness(
    t: &TransitionData,
    h: &BTreeMap<usize, ExprMatrix>,
    plan: &EvaluationPlan,
) -> Result<Certificate> {
    let field = plan.field();
    for (c, m) in h {
        if m.len() != t.rank || m.iter().any(|r| r.len() != t.rank) {
            return Err(Error::DimensionMismatch(format!("trivialization on chart {c} is not {0}x{0}", t.rank)));
        }
    }
    let mut groups: Vec<IdentityGroup> = Vec::new();
    for (&(i, j), g) in &t.transitions {
        let (hi, hj) = match (h.get(&i), h.get(&j)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InvalidArgument(format!("no trivialization for chart {i} or {j}"))),
        };
        let diff = expr_sub(&expr_mul(g, hj), hi);
        groups.push(IdentityGroup {
            label: json!({"pair": [i, j], "convention": "g_ij = h_i h_j^-1"}),
            degree: max_degree(flat(&diff)),
            domain: t.cover.overlap_denominators(i, j),
            test: Box::new(move |pt| {
                let (Some(gv), Some(a), Some(b)) =
                    (eval_matrix(g, field, pt)?, eval_matrix(hi, field, pt)?, eval_matrix(hj, field, pt)?)
                else {
                    return Ok(PointResult::Skip);
                };
                if !a.is_invertible() || !b.is_invertible() {
                    return Ok(PointResult::Skip);
                }
                Ok(matrices_equal_test(Some(gv.try_mul(&b)?), Some(a)))
            }),
        });
    }
    let cert = run_groups("coboundary_witness", t.cover.vars, groups, plan)?;
    Ok(cert.ledger("coboundary_direction", "g_ij = h_i * h_j^-1"))
}

/// Entrywise agreement of two transition data on the union of their
/// overlaps.
pub fn verify_same_transitions(a: &TransitionData, b: &TransitionData, plan: &EvaluationPlan) -> Result<Certificate> {
    if a.rank != b.rank || a.cover.charts != b.cover.charts || a.cover.vars != b.cover.vars {
        return Err(Error::DimensionMismatch("transition data on different covers or ranks".into()));
    }
    let field = plan.field();
    let mut pairs: Vec<(usize, usize)> = a.transitions.keys().chain(b.transitions.keys()).copied().collect();
    pairs.sort();
    pairs.dedup();
    let mut groups: Vec<IdentityGroup> = Vec::new();
    for (i, j) in pairs {
        let (ga, gb) = match (a.transition(i, j), b.transition(i, j)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(Error::InvalidArgument(format!("overlap ({i}, {j}) missing on one side"))),
        };
        let diff = expr_sub(&ga, &gb);
        let mut domain = a.cover.overlap_denominators(i, j);
        domain.extend(b.cover.overlap_denominators(i, j));
        groups.push(IdentityGroup {
            label: json!({"pair": [i, j]}),
            degree: max_degree(flat(&diff)),
            domain,
            test: Box::new(move |pt| Ok(matrices_equal_test(a.transition_at(i, j, field, pt)?, b.transition_at(i, j, field, pt)?))),
        });
    }
    run_groups("same_transitions", a.cover.vars, groups, plan)
}

/// Exact (symbolic) equality of two expression matrices as rational
/// functions in `vars` variables.
pub fn exact_matrix_equal(a: &ExprMatrix, b: &ExprMatrix, vars: usize) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| x.len() == y.len() && x.iter().zip(y).all(|(u, v)| exact_equal(u, v, vars) == Some(true)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan() -> EvaluationPlan {
        EvaluationPlan::new(DEFAULT_PRIME, 8, 1).unwrap()
    }

    fn m(rows: &[&[&str]]) -> ExprMatrix {
        rows.iter().map(|r| r.iter().map(|s| Expr::parse(s).unwrap()).collect()).collect()
    }

    /// Two charts, one unit `u = var 0` on the overlap.
    fn diag_u() -> TransitionData {
        let cover = Cover::new(2, 1).with_denominators((0, 1), vec![Expr::var(0)]);
        let g = m(&[&["(var 0)", "0"], &["0", "(inv (var 0))"]]);
        TransitionData::new(cover, 2, Structure::SL, BTreeMap::from([((0, 1), g)])).unwrap()
    }

    /// Three charts over `k[x, y]`, `g_ij = h_i·h_j⁻¹` for noncommuting `h`.
    fn three_chart() -> (TransitionData, BTreeMap<usize, ExprMatrix>) {
        let h0 = m(&[&["1", "(var 0)"], &["0", "1"]]);
        let h1 = m(&[&["1", "0"], &["(var 1)", "1"]]);
        let h2 = m(&[&["(var 0)", "0"], &["0", "(inv (var 0))"]]);
        let hs = BTreeMap::from([(0, h0), (1, h1), (2, h2)]);
        let mut g = BTreeMap::new();
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            g.insert((i, j), expr_mul(&hs[&i], &expr_inverse(&hs[&j])));
        }
        let cover = Cover::new(3, 2).with_denominators((1, 2), vec![Expr::var(0)]).with_denominators((0, 2), vec![Expr::var(0)]);
        (TransitionData::new(cover, 2, Structure::SL, g).unwrap(), hs)
    }

    #[test]
    fn identity_and_two_chart_cocycles_pass() {
        let cover = Cover::new(3, 1);
        let id: BTreeMap<_, _> = [(0, 1), (1, 2), (0, 2)].into_iter().map(|p| (p, expr_identity(3))).collect();
        let t = TransitionData::new(cover, 3, Structure::SL, id).unwrap();
        assert!(check_cocycle(&t, &plan()).unwrap().passed());
        let c = check_cocycle(&diag_u(), &plan()).unwrap();
        assert!(c.passed());
        assert_eq!(c.witness["identities"], 0);
    }

    #[test]
    fn corrupted_triple_fails_with_point() {
        let (mut t, _) = three_chart();
        assert!(check_cocycle(&t, &plan()).unwrap().passed());
        let g02 = t.transitions.get_mut(&(0, 2)).unwrap();
        g02[0][1] = g02[0][1].add(&Expr::var(1));
        let c = check_cocycle(&t, &plan()).unwrap();
        assert!(!c.passed());
        let ce = c.counterexample.unwrap();
        assert_eq!(ce["identity"]["triple"], json!([0, 1, 2]));
        assert_eq!(ce["point"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn bounds_are_recorded() {
        let (t, _) = three_chart();
        let c = check_cocycle(&t, &plan()).unwrap();
        let sz = &c.witness["schwartz_zippel"];
        assert!(sz["degree_bound"].as_u64().unwrap() > 0);
        assert!(sz["failure_bound_log2"].as_f64().unwrap() <= -40.0);
        assert!(matches!(
            check_cocycle(&t, &EvaluationPlan::new(7, 3, 0).unwrap()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn inverse_pairs_are_checked() {
        let mut t = diag_u();
        t.transitions.insert((1, 0), m(&[&["(inv (var 0))", "0"], &["0", "(var 0)"]]));
        assert!(check_cocycle(&t, &plan()).unwrap().passed());
        t.transitions.insert((1, 0), m(&[&["(var 0)", "0"], &["0", "(var 0)"]]));
        assert!(!check_cocycle(&t, &plan()).unwrap().passed());
    }

    #[test]
    fn degenerate_cover() {
        let cover = Cover::new(3, 1).with_denominators((0, 1), vec![Expr::zero()]);
        let id: BTreeMap<_, _> = [(0, 1), (1, 2), (0, 2)].into_iter().map(|p| (p, expr_identity(1))).collect();
        let t = TransitionData::new(cover, 1, Structure::GL, id).unwrap();
        assert!(matches!(check_cocycle(&t, &plan()), Err(Error::DegenerateCover(_))));
    }

    #[test]
    fn structure_examples() {
        assert!(structure_check(&diag_u(), &plan()).unwrap().passed());
        let cover = Cover::new(2, 1).with_denominators((0, 1), vec![Expr::var(0)]);
        let bad = TransitionData::new(
            cover,
            2,
            Structure::SL,
            BTreeMap::from([((0, 1), m(&[&["(var 0)", "0"], &["0", "1"]]))]),
        )
        .unwrap();
        assert!(!structure_check(&bad, &plan()).unwrap().passed());
        let pushed = pushforward(&diag_u(), Representation::Spin3).unwrap();
        assert!(structure_check(&pushed, &plan()).unwrap().passed());
    }

    #[test]
    fn spin3_of_diagonal_unit_is_exact() {
        let pushed = pushforward(&diag_u(), Representation::Spin3).unwrap();
        let expected = m(&[&["(pow (var 0) 2)", "0", "0"], &["0", "1", "0"], &["0", "0", "(pow (var 0) -2)"]]);
        assert!(exact_matrix_equal(&pushed.transitions[&(0, 1)], &expected, 1));
        assert_eq!(pushed.structure, Structure::SO(FormTable::new(FieldDescriptor::Rationals).g3));
    }

    #[test]
    fn pushforwards_preserve_cocycles() {
        let (t, _) = three_chart();
        for rep in [Representation::Spin3, Representation::Spin4Diag] {
            let p = pushforward(&t, rep).unwrap();
            let fresh = EvaluationPlan::new(DEFAULT_PRIME, 4, 99).unwrap();
            assert!(check_cocycle(&p, &fresh).unwrap().passed());
            assert!(structure_check(&p, &fresh).unwrap().passed());
        }
        assert_eq!(
            pushforward(&t, Representation::Spin6Hyp3),
            Err(Error::RankMismatch { expected: 4, actual: 2 })
        );
    }

    #[test]
    fn spin4_diag_fixes_identity_section() {
        let (t, _) = three_chart();
        let p = pushforward(&t, Representation::Spin4Diag).unwrap();
        let id = vec![vec![Expr::one()], vec![Expr::zero()], vec![Expr::zero()], vec![Expr::one()]];
        for g in p.transitions.values() {
            assert!(exact_matrix_equal(&expr_mul(g, &id), &id, 2));
        }
    }

    #[test]
    fn spin6_pushforward_of_rank_four() {
        let cover = Cover::new(2, 1).with_denominators((0, 1), vec![Expr::var(0)]);
        let g = m(&[
            &["(var 0)", "0", "0", "0"],
            &["0", "(inv (var 0))", "0", "0"],
            &["0", "0", "1", "(var 0)"],
            &["0", "0", "0", "1"],
        ]);
        let t = TransitionData::new(cover, 4, Structure::SL, BTreeMap::from([((0, 1), g)])).unwrap();
        let p = pushforward(&t, Representation::Spin6Hyp3).unwrap();
        assert!(structure_check(&p, &plan()).unwrap().passed());
    }

    #[test]
    fn twisting() {
        let t = diag_u();
        let ones = BTreeMap::from([((0, 1), Expr::one())]);
        let same = twist_by_unit(&t, &ones, &plan()).unwrap();
        assert_eq!(same.data, t);
        assert!(same.structure_retained);

        let minus = BTreeMap::from([((0, 1), Expr::int(-1))]);
        let signed = twist_by_unit(&t, &minus, &plan()).unwrap();
        assert!(signed.structure_retained);
        assert_eq!(signed.data.structure, Structure::SL);

        let cover = Cover::new(2, 2).with_denominators((0, 1), vec![Expr::var(0), Expr::var(1)]);
        let t2 = TransitionData::new(cover, 2, Structure::SL, BTreeMap::from([((0, 1), m(&[&["(var 0)", "0"], &["0", "(inv (var 0))"]]))])).unwrap();
        let v = BTreeMap::from([((0, 1), Expr::var(1))]);
        let down = twist_by_unit(&t2, &v, &plan()).unwrap();
        assert!(!down.structure_retained);
        assert_eq!(down.data.structure, Structure::GL);
    }

    #[test]
    fn twisting_requires_a_cocycle() {
        let (t, _) = three_chart();
        let u = BTreeMap::from([((0, 1), Expr::int(2)), ((1, 2), Expr::int(3)), ((0, 2), Expr::int(5))]);
        assert!(matches!(twist_by_unit(&t, &u, &plan()), Err(Error::NotACocycle(_))));
        let missing = BTreeMap::from([((0, 1), Expr::int(2))]);
        assert!(matches!(twist_by_unit(&t, &missing, &plan()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn twist_action_composes() {
        let (t, _) = three_chart();
        let x = Expr::var(0);
        let y = Expr::var(1).add(&Expr::int(2));
        // u_ij = f_i / f_j is a cocycle for any functions f
        let unit = |f: &[Expr; 3]| -> BTreeMap<(usize, usize), Expr> {
            [(0, 1), (1, 2), (0, 2)].into_iter().map(|(i, j)| ((i, j), f[i].div(&f[j]))).collect()
        };
        let u = unit(&[x.clone(), Expr::one(), x.mul(&x)]);
        let w = unit(&[y.clone(), x.clone(), Expr::int(3)]);
        let uw: BTreeMap<_, _> = u.iter().map(|(p, e)| (*p, e.mul(&w[p]))).collect();
        let mut cover = t.cover.clone();
        for p in [(0, 1), (1, 2), (0, 2)] {
            cover.denominators.insert(p, vec![x.clone(), y.clone()]);
        }
        let t = TransitionData { cover, ..t };
        let twice = twist_by_unit(&twist_by_unit(&t, &u, &plan()).unwrap().data, &w, &plan()).unwrap();
        let once = twist_by_unit(&t, &uw, &plan()).unwrap();
        assert!(verify_same_transitions(&twice.data, &once.data, &plan()).unwrap().passed());
        assert!(!verify_same_transitions(&twice.data, &t, &plan()).unwrap().passed());
    }

    #[test]
    fn sign_twist_is_invisible_to_spin3() {
        let (t, _) = three_chart();
        let minus: BTreeMap<_, _> = [(0, 1), (1, 2), (0, 2)].into_iter().map(|p| (p, Expr::int(-1))).collect();
        // (−1) on every overlap is a cocycle only up to sign; use −1 on one overlap of a two-chart cover
        assert!(twist_by_unit(&t, &minus, &plan()).is_err());
        let t = diag_u();
        let minus = BTreeMap::from([((0, 1), Expr::int(-1))]);
        let twisted = twist_by_unit(&t, &minus, &plan()).unwrap().data;
        let a = pushforward(&t, Representation::Spin3).unwrap();
        let b = pushforward(&twisted, Representation::Spin3).unwrap();
        assert!(exact_matrix_equal(&a.transitions[&(0, 1)], &b.transitions[&(0, 1)], 1));
    }

    #[test]
    fn coboundary_witnesses() {
        let (t, hs) = three_chart();
        assert!(verify_coboundary_witness(&t, &hs, &plan()).unwrap().passed());
        let cover = Cover::new(3, 1);
        let id: BTreeMap<_, _> = [(0, 1), (1, 2)].into_iter().map(|p| (p, expr_identity(2))).collect();
        let trivial = TransitionData::new(cover, 2, Structure::SL, id).unwrap();
        let hid: BTreeMap<_, _> = (0..3).map(|c| (c, expr_identity(2))).collect();
        assert!(verify_coboundary_witness(&trivial, &hid, &plan()).unwrap().passed());
        // g_ij = h_i⁻¹·h_j is the other convention and must be rejected
        let mut g = BTreeMap::new();
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            g.insert((i, j), expr_mul(&expr_inverse(&hs[&i]), &hs[&j]));
        }
        let wrong = TransitionData { transitions: g, ..t };
        assert!(!verify_coboundary_witness(&wrong, &hs, &plan()).unwrap().passed());
    }

    #[test]
    fn json_round_trip() {
        let (t, _) = three_chart();
        let v = t.to_json();
        let back = TransitionData::from_json(&v).unwrap();
        assert!(verify_same_transitions(&t, &back, &plan()).unwrap().passed());
        assert_eq!(back.cover.denominators, t.cover.denominators);
        let bad = json!({"charts": 2, "vars": 1, "rank": 1, "overlaps": [{"pair": [0, 1], "matrix": [["(var 3)"]]}]});
        assert!(TransitionData::from_json(&bad).is_err());
        let units = parse_units(&json!({"units": [{"pair": [0, 1], "value": "-1"}]})).unwrap();
        assert_eq!(units[&(0, 1)], Expr::int(-1));
        let h = parse_trivializations(&json!({"trivializations": [{"chart": 1, "matrix": [["1"]]}]})).unwrap();
        assert_eq!(h[&1], vec![vec![Expr::one()]]);
    }
}
