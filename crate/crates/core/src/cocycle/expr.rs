//! Rational-function expressions as shared DAGs with structural degree
//! bounds, a prefix syntax, and exact comparison through polynomial
//! fractions.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, FieldDescriptor, Rational, Scalar};

/// `(numerator, denominator)` total-degree bound for the fraction the
/// expression represents when built up by the structural rules.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Degree {
    pub numerator: u64,
    pub denominator: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Const(Rational),
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Inv(Expr),
    Pow(Expr, i64),
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct Node {
    kind: Kind,
    degree: Degree,
    max_var: Option<usize>,
}

/// Immutable expression node; clones share structure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn build(kind: Kind) -> Expr {
        use Kind::*;
        let d = |e: &Expr| e.0.degree;
        let degree = match &kind {
            Const(_) => Degree::default(),
            Var(_) => Degree { numerator: 1, denominator: 0 },
            Add(a, b) | Sub(a, b) => {
                let (a, b) = (d(a), d(b));
                Degree {
                    numerator: (a.numerator + b.denominator).max(b.numerator + a.denominator),
                    denominator: a.denominator + b.denominator,
                }
            }
            Mul(a, b) => Degree {
                numerator: d(a).numerator + d(b).numerator,
                denominator: d(a).denominator + d(b).denominator,
            },
            Div(a, b) => Degree {
                numerator: d(a).numerator + d(b).denominator,
                denominator: d(a).denominator + d(b).numerator,
            },
            Neg(a) => d(a),
            Inv(a) => Degree { numerator: d(a).denominator, denominator: d(a).numerator },
            Pow(a, k) => {
                let m = k.unsigned_abs();
                let (n, den) = (d(a).numerator * m, d(a).denominator * m);
                if *k >= 0 {
                    Degree { numerator: n, denominator: den }
                } else {
                    Degree { numerator: den, denominator: n }
                }
            }
        };
        let max_var = match &kind {
            Const(_) => None,
            Var(i) => Some(*i),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.0.max_var.max(b.0.max_var),
            Neg(a) | Inv(a) | Pow(a, _) => a.0.max_var,
        };
        Expr(Arc::new(Node { kind, degree, max_var }))
    }

    pub fn constant(q: Rational) -> Expr {
        Expr::build(Kind::Const(q))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(Rational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(i: usize) -> Expr {
        Expr::build(Kind::Var(i))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn degree(&self) -> Degree {
        self.0.degree
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.0.max_var
    }

    pub fn as_constant(&self) -> Option<&Rational> {
        match self.kind() {
            Kind::Const(q) => Some(q),
            _ => None,
        }
    }

    fn is_const(&self, n: i64) -> bool {
        self.as_constant().is_some_and(|q| *q == Rational::from_integer(BigInt::from(n)))
    }

    pub fn add(&self, other: &Expr) -> Expr {
        match (self.as_constant(), other.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            _ if self.is_const(0) => other.clone(),
            _ if other.is_const(0) => self.clone(),
            _ => Expr::build(Kind::Add(self.clone(), other.clone())),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        match (self.as_constant(), other.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            _ if other.is_const(0) => self.clone(),
            _ if self.is_const(0) => other.neg(),
            _ => Expr::build(Kind::Sub(self.clone(), other.clone())),
        }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        match (self.as_constant(), other.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            _ if self.is_const(0) || other.is_const(0) => Expr::zero(),
            _ if self.is_const(1) => other.clone(),
            _ if other.is_const(1) => self.clone(),
            _ if self.is_const(-1) => other.neg(),
            _ if other.is_const(-1) => self.neg(),
            _ => Expr::build(Kind::Mul(self.clone(), other.clone())),
        }
    }

    pub fn div(&self, other: &Expr) -> Expr {
        match (self.as_constant(), other.as_constant()) {
            (Some(a), Some(b)) if !b.is_zero() => Expr::constant(a / b),
            _ if other.is_const(1) => self.clone(),
            _ if self.is_const(1) => other.inv(),
            _ => Expr::build(Kind::Div(self.clone(), other.clone())),
        }
    }

    pub fn neg(&self) -> Expr {
        match self.kind() {
            Kind::Const(q) => Expr::constant(-q),
            Kind::Neg(a) => a.clone(),
            _ => Expr::build(Kind::Neg(self.clone())),
        }
    }

    pub fn inv(&self) -> Expr {
        match self.kind() {
            Kind::Const(q) if !q.is_zero() => Expr::constant(q.recip()),
            Kind::Inv(a) => a.clone(),
            _ => Expr::build(Kind::Inv(self.clone())),
        }
    }

    pub fn pow(&self, k: i64) -> Expr {
        match (k, self.as_constant()) {
            (0, _) => Expr::one(),
            (1, _) => self.clone(),
            (-1, _) => self.inv(),
            (_, Some(q)) if k > 0 || !q.is_zero() => {
                let base = if k > 0 { q.clone() } else { q.recip() };
                Expr::constant(num_traits::pow(base, k.unsigned_abs() as usize))
            }
            _ => Expr::build(Kind::Pow(self.clone(), k)),
        }
    }

    /// Value at `point`, or `None` when some denominator on the way
    /// vanishes there.
    pub fn eval(&self, field: FieldDescriptor, point: &[Scalar]) -> Result<Option<Scalar>> {
        if let Some(v) = self.max_var() {
            if v >= point.len() {
                return Err(Error::DimensionMismatch(format!("variable {v} at a point of length {}", point.len())));
            }
        }
        let mut memo: HashMap<*const Node, Option<Scalar>> = HashMap::new();
        self.eval_memo(point, field, &mut memo)
    }

    fn eval_memo(
        &self,
        point: &[Scalar],
        field: FieldDescriptor,
        memo: &mut HashMap<*const Node, Option<Scalar>>,
    ) -> Result<Option<Scalar>> {
        let key = Arc::as_ptr(&self.0);
        if let Some(v) = memo.get(&key) {
            return Ok(v.clone());
        }
        let mut sub = |e: &Expr| e.eval_memo(point, field, memo);
        let value = match self.kind() {
            Kind::Const(q) => Some(field.from_rational(q)?),
            Kind::Var(i) => Some(point[*i].clone()),
            Kind::Add(a, b) => both(sub(a)?, sub(b)?, |x, y| Some(x + y)),
            Kind::Sub(a, b) => both(sub(a)?, sub(b)?, |x, y| Some(x - y)),
            Kind::Mul(a, b) => both(sub(a)?, sub(b)?, |x, y| Some(x * y)),
            Kind::Div(a, b) => both(sub(a)?, sub(b)?, |x, y| (!y.is_zero()).then(|| &x / &y)),
            Kind::Neg(a) => sub(a)?.map(|x| -x),
            Kind::Inv(a) => sub(a)?.and_then(|x| x.inv().ok()),
            Kind::Pow(a, k) => sub(a)?.and_then(|x| x.pow(*k).ok()),
        };
        memo.insert(key, value.clone());
        Ok(value)
    }

    pub fn parse(text: &str) -> Result<Expr> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let e = parse_tokens(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!("trailing input after expression in `{text}`")));
        }
        Ok(e)
    }
}

fn both(a: Option<Scalar>, b: Option<Scalar>, f: impl FnOnce(Scalar, Scalar) -> Option<Scalar>) -> Option<Scalar> {
    match (a, b) {
        (Some(x), Some(y)) => f(x, y),
        _ => None,
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect()
}

fn parse_tokens(tokens: &[String], pos: &mut usize) -> Result<Expr> {
    let tok = tokens.get(*pos).ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
    *pos += 1;
    if tok == ")" {
        return Err(Error::Parse("unexpected `)`".into()));
    }
    if tok != "(" {
        return Ok(Expr::constant(parse_rational(tok)?));
    }
    let op = tokens.get(*pos).ok_or_else(|| Error::Parse("missing operator".into()))?.clone();
    *pos += 1;
    let result = match op.as_str() {
        "var" => {
            let idx = tokens.get(*pos).ok_or_else(|| Error::Parse("missing variable index".into()))?;
            *pos += 1;
            Expr::var(idx.parse().map_err(|_| Error::Parse(format!("bad variable index `{idx}`")))?)
        }
        "pow" | "^" => {
            let base = parse_tokens(tokens, pos)?;
            let k = tokens.get(*pos).ok_or_else(|| Error::Parse("missing exponent".into()))?;
            *pos += 1;
            base.pow(k.parse().map_err(|_| Error::Parse(format!("bad exponent `{k}`")))?)
        }
        _ => {
            let mut args = Vec::new();
            while tokens.get(*pos).is_some_and(|t| t != ")") {
                args.push(parse_tokens(tokens, pos)?);
            }
            apply(&op, args)?
        }
    };
    match tokens.get(*pos) {
        Some(t) if t == ")" => {
            *pos += 1;
            Ok(result)
        }
        _ => Err(Error::Parse(format!("expected `)` to close `{op}`"))),
    }
}

fn apply(op: &str, args: Vec<Expr>) -> Result<Expr> {
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Parse(format!("`{op}` takes {n} argument(s), got {}", args.len())))
        }
    };
    Ok(match op {
        "+" if !args.is_empty() => args.iter().skip(1).fold(args[0].clone(), |acc, e| acc.add(e)),
        "*" if !args.is_empty() => args.iter().skip(1).fold(args[0].clone(), |acc, e| acc.mul(e)),
        "-" if args.len() == 1 => args[0].neg(),
        "-" => {
            arity(2)?;
            args[0].sub(&args[1])
        }
        "/" => {
            arity(2)?;
            args[0].div(&args[1])
        }
        "neg" => {
            arity(1)?;
            args[0].neg()
        }
        "inv" => {
            arity(1)?;
            args[0].inv()
        }
        _ => return Err(Error::Parse(format!("unknown operator `{op}`"))),
    })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Kind::Const(q) => write!(f, "{q}"),
            Kind::Var(i) => write!(f, "(var {i})"),
            Kind::Add(a, b) => write!(f, "(+ {a} {b})"),
            Kind::Sub(a, b) => write!(f, "(- {a} {b})"),
            Kind::Mul(a, b) => write!(f, "(* {a} {b})"),
            Kind::Div(a, b) => write!(f, "(/ {a} {b})"),
            Kind::Neg(a) => write!(f, "(neg {a})"),
            Kind::Inv(a) => write!(f, "(inv {a})"),
            Kind::Pow(a, k) => write!(f, "(pow {a} {k})"),
        }
    }
}

/// Multivariate polynomial with rational coefficients, keyed by exponent
/// vectors of a fixed length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    vars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Poly {
    fn constant(vars: usize, c: Rational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; vars], c);
        }
        Poly { vars, terms }
    }

    fn var(vars: usize, i: usize) -> Poly {
        let mut e = vec![0; vars];
        e[i] = 1;
        Poly { vars, terms: BTreeMap::from([(e, Rational::one())]) }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert_with(Rational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        Poly { vars: self.vars, terms }
    }

    fn neg(&self) -> Poly {
        Poly { vars: self.vars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::constant(self.vars, Rational::zero());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let entry = out.terms.entry(e.clone()).or_insert_with(Rational::zero);
                *entry += c1 * c2;
                if entry.is_zero() {
                    out.terms.remove(&e);
                }
            }
        }
        out
    }

    fn pow(&self, k: u64) -> Poly {
        let mut out = Poly::constant(self.vars, Rational::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }
}

/// `(numerator, denominator)` polynomials built by the same structural
/// rules as [`Degree`].
pub fn fraction(e: &Expr, vars: usize) -> (Poly, Poly) {
    let mut memo = HashMap::new();
    fraction_memo(e, vars, &mut memo)
}

fn fraction_memo(e: &Expr, vars: usize, memo: &mut HashMap<*const Node, (Poly, Poly)>) -> (Poly, Poly) {
    let key = Arc::as_ptr(&e.0);
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let one = || Poly::constant(vars, Rational::one());
    let mut f = |x: &Expr| fraction_memo(x, vars, memo);
    let value = match e.kind() {
        Kind::Const(q) => (Poly::constant(vars, q.clone()), one()),
        Kind::Var(i) => (Poly::var(vars, *i), one()),
        Kind::Add(a, b) | Kind::Sub(a, b) => {
            let ((n1, d1), (n2, d2)) = (f(a), f(b));
            let right = n2.mul(&d1);
            let right = if matches!(e.kind(), Kind::Sub(..)) { right.neg() } else { right };
            (n1.mul(&d2).add(&right), d1.mul(&d2))
        }
        Kind::Mul(a, b) => {
            let ((n1, d1), (n2, d2)) = (f(a), f(b));
            (n1.mul(&n2), d1.mul(&d2))
        }
        Kind::Div(a, b) => {
            let ((n1, d1), (n2, d2)) = (f(a), f(b));
            (n1.mul(&d2), d1.mul(&n2))
        }
        Kind::Neg(a) => {
            let (n, d) = f(a);
            (n.neg(), d)
        }
        Kind::Inv(a) => {
            let (n, d) = f(a);
            (d, n)
        }
        Kind::Pow(a, k) => {
            let (n, d) = f(a);
            let m = k.unsigned_abs();
            if *k >= 0 {
                (n.pow(m), d.pow(m))
            } else {
                (d.pow(m), n.pow(m))
            }
        }
    };
    memo.insert(key, value.clone());
    value
}

/// Exact equality of the rational functions `a` and `b` in `vars`
/// variables: `n_a·d_b = n_b·d_a`. `None` if either has a zero denominator.
pub fn exact_equal(a: &Expr, b: &Expr, vars: usize) -> Option<bool> {
    let (na, da) = fraction(a, vars);
    let (nb, db) = fraction(b, vars);
    if da.is_zero() || db.is_zero() {
        return None;
    }
    Some(na.mul(&db) == nb.mul(&da))
}

/// Sum of monomials, `x^e` written with `pow` and negative exponents
/// allowed through `shift`.
fn poly_expr(p: &Poly, shift: &[u32], scale: &Rational) -> Expr {
    p.terms.iter().fold(Expr::zero(), |acc, (e, c)| {
        let term = e.iter().zip(shift).enumerate().fold(Expr::constant(c / scale), |t, (i, (&a, &b))| {
            let k = i64::from(a) - i64::from(b);
            if k == 0 {
                t
            } else {
                t.mul(&Expr::var(i).pow(k))
            }
        });
        acc.add(&term)
    })
}

/// Componentwise minimum exponent over all terms of both polynomials.
fn common_monomial(n: &Poly, d: &Poly) -> Vec<u32> {
    let mut m: Option<Vec<u32>> = None;
    for e in n.terms.keys().chain(d.terms.keys()) {
        m = Some(match m {
            None => e.clone(),
            Some(m) => m.iter().zip(e).map(|(a, b)| *a.min(b)).collect(),
        });
    }
    m.unwrap_or_else(|| vec![0; n.vars])
}

/// An equal rational function in a normal-ish form: a Laurent polynomial
/// when the denominator is a monomial, a constant when numerator and
/// denominator are proportional, otherwise a quotient of expanded
/// polynomials with common monomial factors removed.
pub fn simplify(e: &Expr, vars: usize) -> Expr {
    let (n, d) = fraction(e, vars);
    if d.is_zero() {
        return e.clone();
    }
    if n.is_zero() {
        return Expr::zero();
    }
    if d.terms.len() == 1 {
        let (shift, c) = d.terms.iter().next().expect("one term");
        return poly_expr(&n, shift, c);
    }
    let (_, cn) = n.terms.iter().next().expect("nonzero");
    let (_, cd) = d.terms.iter().next().expect("nonzero");
    if n.terms.len() == d.terms.len() && n.mul(&Poly::constant(vars, cd.clone())) == d.mul(&Poly::constant(vars, cn.clone())) {
        return Expr::constant(cn / cd);
    }
    let shift = common_monomial(&n, &d);
    let one = Rational::one();
    poly_expr(&n, &shift, &one).div(&poly_expr(&d, &shift, &one))
}
