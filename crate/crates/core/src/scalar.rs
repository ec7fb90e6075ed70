//! Exact scalars over the rationals and odd prime fields.
//!
//! Every value is kept in canonical form (reduced fraction with positive
//! denominator, least nonnegative residue) so that structural equality is
//! mathematical equality. Characteristic 2 is rejected when a field is built.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

pub use num_bigint::Sign;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Reduced fraction `numerator / denominator` with `denominator > 0`.
pub type Rational = BigRational;

/// An odd prime modulus, validated at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if p == 2 || !is_prime_u64(p) {
            return Err(Error::InvalidModulus(p));
        }
        Ok(PrimeModulus(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

/// The field a scalar, matrix or form lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldDescriptor {
    Rationals,
    Prime(PrimeModulus),
}

impl FieldDescriptor {
    /// Shorthand for `FieldDescriptor::Prime(PrimeModulus::new(p)?)`.
    pub fn prime(p: u64) -> Result<Self> {
        Ok(FieldDescriptor::Prime(PrimeModulus::new(p)?))
    }

    pub fn is_finite(self) -> bool {
        matches!(self, FieldDescriptor::Prime(_))
    }

    pub fn modulus(self) -> Option<u64> {
        match self {
            FieldDescriptor::Rationals => None,
            FieldDescriptor::Prime(p) => Some(p.get()),
        }
    }

    pub fn zero(self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(self, n: i64) -> Scalar {
        match self {
            FieldDescriptor::Rationals => Scalar::Rational(Rational::from_integer(BigInt::from(n))),
            FieldDescriptor::Prime(p) => Scalar::Prime(PrimeFieldElement::from_i128(n as i128, p)),
        }
    }

    pub fn from_bigint(self, n: &BigInt) -> Scalar {
        match self {
            FieldDescriptor::Rationals => Scalar::Rational(Rational::from_integer(n.clone())),
            FieldDescriptor::Prime(p) => {
                let m = BigInt::from(p.get());
                let r = n.mod_floor(&m).to_u64().expect("residue fits in u64");
                Scalar::Prime(PrimeFieldElement { residue: r, modulus: p })
            }
        }
    }

    /// `num / den` in this field; fails when `den` vanishes in the field.
    pub fn from_ratio(self, num: &BigInt, den: &BigInt) -> Result<Scalar> {
        let n = self.from_bigint(num);
        let d = self.from_bigint(den);
        n.checked_div(&d)
    }

    pub fn from_rational(self, q: &Rational) -> Result<Scalar> {
        self.from_ratio(q.numer(), q.denom())
    }

    /// A uniformly random element; over the rationals an integer in
    /// `[-bound, bound]`.
    pub fn random<R: Rng + ?Sized>(self, rng: &mut R, bound: i64) -> Scalar {
        match self {
            FieldDescriptor::Rationals => self.from_i64(rng.gen_range(-bound..=bound)),
            FieldDescriptor::Prime(p) => Scalar::Prime(PrimeFieldElement {
                residue: rng.gen_range(0..p.get()),
                modulus: p,
            }),
        }
    }

    pub fn random_nonzero<R: Rng + ?Sized>(self, rng: &mut R, bound: i64) -> Scalar {
        loop {
            let s = self.random(rng, bound);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// Short flag form: `q` or `fp:<p>`.
    pub fn tag(self) -> String {
        match self {
            FieldDescriptor::Rationals => "q".to_string(),
            FieldDescriptor::Prime(p) => format!("fp:{}", p.get()),
        }
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for FieldDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("q") || s.eq_ignore_ascii_case("rationals") {
            return Ok(FieldDescriptor::Rationals);
        }
        let rest = s
            .strip_prefix("fp:")
            .or_else(|| s.strip_prefix("Fp:"))
            .ok_or_else(|| Error::Parse(format!("unknown field `{s}` (expected q or fp:<p>)")))?;
        let p: u64 = rest
            .parse()
            .map_err(|_| Error::Parse(format!("bad modulus `{rest}`")))?;
        FieldDescriptor::prime(p)
    }
}

impl serde::Serialize for FieldDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.tag())
    }
}

impl<'de> serde::Deserialize<'de> for FieldDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Least nonnegative residue modulo an odd prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeFieldElement {
    residue: u64,
    modulus: PrimeModulus,
}

impl PrimeFieldElement {
    pub fn new(residue: u64, modulus: PrimeModulus) -> Self {
        PrimeFieldElement {
            residue: residue % modulus.get(),
            modulus,
        }
    }

    fn from_i128(n: i128, modulus: PrimeModulus) -> Self {
        let p = modulus.get() as i128;
        PrimeFieldElement {
            residue: n.rem_euclid(p) as u64,
            modulus,
        }
    }

    #[inline]
    pub fn residue(self) -> u64 {
        self.residue
    }

    #[inline]
    pub fn modulus(self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    fn p(self) -> u64 {
        self.modulus.get()
    }

    #[inline]
    fn add(self, o: Self) -> Self {
        let p = self.p();
        // residues are below p < 2⁶⁴, so one conditional subtraction suffices
        let (s, carry) = self.residue.overflowing_add(o.residue);
        let residue = if carry || s >= p { s.wrapping_sub(p) } else { s };
        PrimeFieldElement { residue, modulus: self.modulus }
    }

    #[inline]
    fn sub(self, o: Self) -> Self {
        let p = self.p();
        let r = if self.residue >= o.residue {
            self.residue - o.residue
        } else {
            p - (o.residue - self.residue)
        };
        PrimeFieldElement { residue: r, modulus: self.modulus }
    }

    #[inline]
    fn mul(self, o: Self) -> Self {
        let p = self.p();
        let residue = if p <= u32::MAX as u64 {
            self.residue * o.residue % p
        } else {
            ((self.residue as u128 * o.residue as u128) % p as u128) as u64
        };
        PrimeFieldElement { residue, modulus: self.modulus }
    }

    #[inline]
    fn neg(self) -> Self {
        if self.residue == 0 {
            self
        } else {
            PrimeFieldElement {
                residue: self.p() - self.residue,
                modulus: self.modulus,
            }
        }
    }

    fn inv(self) -> Option<Self> {
        if self.residue == 0 {
            return None;
        }
        // extended Euclid on (residue, p)
        let (mut r0, mut r1) = (self.p() as i128, self.residue as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Some(PrimeFieldElement::from_i128(t0, self.modulus))
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = PrimeFieldElement { residue: 1 % self.p(), modulus: self.modulus };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    /// Euler's criterion; zero counts as a square.
    fn is_square(self) -> bool {
        self.residue == 0 || self.pow((self.p() - 1) / 2).residue == 1
    }

    /// Tonelli–Shanks. Returns the smaller of the two roots.
    fn sqrt(self) -> Option<Self> {
        if self.residue == 0 {
            return Some(self);
        }
        if !self.is_square() {
            return None;
        }
        let p = self.p();
        let root = if p % 4 == 3 {
            self.pow((p + 1) / 4)
        } else {
            let mut q = p - 1;
            let mut s = 0u32;
            while q % 2 == 0 {
                q /= 2;
                s += 1;
            }
            let mut z = PrimeFieldElement::new(2, self.modulus);
            while z.is_square() {
                z = z.add(PrimeFieldElement::new(1, self.modulus));
            }
            let mut m = s;
            let mut c = z.pow(q);
            let mut t = self.pow(q);
            let mut r = self.pow((q + 1) / 2);
            while t.residue != 1 {
                let mut i = 0u32;
                let mut t2 = t;
                while t2.residue != 1 {
                    t2 = t2.mul(t2);
                    i += 1;
                }
                let b = c.pow(1u64 << (m - i - 1));
                m = i;
                c = b.mul(b);
                t = t.mul(c);
                r = r.mul(b);
            }
            r
        };
        let other = root.neg();
        Some(if other.residue < root.residue { other } else { root })
    }
}

/// An exact field element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(Rational),
    Prime(PrimeFieldElement),
}

/// The four field operations exposed through [`field_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked binary arithmetic: rejects mixed fields and division by zero.
pub fn field_arith(a: &Scalar, b: &Scalar, op: ArithOp) -> Result<Scalar> {
    if a.field() != b.field() {
        return Err(Error::MixedFields(a.field().tag(), b.field().tag()));
    }
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => return a.checked_div(b),
    })
}

impl Scalar {
    pub fn field(&self) -> FieldDescriptor {
        match self {
            Scalar::Rational(_) => FieldDescriptor::Rationals,
            Scalar::Prime(x) => FieldDescriptor::Prime(x.modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Prime(x) => x.residue == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_one(),
            Scalar::Prime(x) => x.residue == 1,
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        match self {
            Scalar::Rational(q) if q.is_zero() => Err(Error::DivisionByZero),
            Scalar::Rational(q) => Ok(Scalar::Rational(q.recip())),
            Scalar::Prime(x) => x.inv().map(Scalar::Prime).ok_or(Error::DivisionByZero),
        }
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        if self.field() != other.field() {
            return Err(Error::MixedFields(self.field().tag(), other.field().tag()));
        }
        Ok(self * &other.inv()?)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<Scalar> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let e = e.unsigned_abs();
        Ok(match base {
            Scalar::Rational(q) => Scalar::Rational(num_traits::pow::Pow::pow(q, e as u32)),
            Scalar::Prime(x) => Scalar::Prime(x.pow(e)),
        })
    }

    /// Square test on a nonzero element. Over the rationals numerator and
    /// denominator are tested separately; over a prime field Euler's criterion
    /// decides.
    pub fn is_square(&self) -> Result<bool> {
        if self.is_zero() {
            return Err(Error::ZeroInput);
        }
        Ok(match self {
            Scalar::Rational(q) => {
                !q.is_negative() && is_perfect_square(q.numer()) && is_perfect_square(q.denom())
            }
            Scalar::Prime(x) => x.is_square(),
        })
    }

    /// A square root if one exists; over a prime field the smaller residue.
    pub fn sqrt(&self) -> Option<Scalar> {
        match self {
            Scalar::Rational(q) => {
                if q.is_negative() || !is_perfect_square(q.numer()) || !is_perfect_square(q.denom()) {
                    return None;
                }
                Some(Scalar::Rational(Rational::new(q.numer().sqrt(), q.denom().sqrt())))
            }
            Scalar::Prime(x) => x.sqrt().map(Scalar::Prime),
        }
    }

    /// Over a prime field the residue; `None` over the rationals.
    pub fn residue(&self) -> Option<u64> {
        match self {
            Scalar::Prime(x) => Some(x.residue),
            Scalar::Rational(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Rational(q) => Some(q),
            Scalar::Prime(_) => None,
        }
    }

    /// Sign of a rational value; prime-field elements report `None`.
    pub fn sign(&self) -> Option<Sign> {
        self.as_rational().map(|q| {
            if q.is_zero() {
                Sign::NoSign
            } else if q.is_negative() {
                Sign::Minus
            } else {
                Sign::Plus
            }
        })
    }

    /// JSON encoding: rationals as `"num/den"` (den omitted when 1), prime
    /// field elements as `{"residue": n, "p": p}`.
    pub fn to_json(&self) -> Value {
        match self {
            Scalar::Rational(_) => Value::String(self.to_string()),
            Scalar::Prime(x) => json!({ "residue": x.residue, "p": x.p() }),
        }
    }

    /// Decode a scalar into `field`. Besides the canonical encodings, plain
    /// JSON integers and integer/fraction strings are accepted and coerced.
    pub fn from_json(v: &Value, field: FieldDescriptor) -> Result<Scalar> {
        match v {
            Value::Number(n) => {
                let i = n
                    .as_i64()
                    .ok_or_else(|| Error::Parse(format!("non-integer number {n}")))?;
                Ok(field.from_i64(i))
            }
            Value::String(s) => {
                let q = parse_rational(s)?;
                field.from_rational(&q)
            }
            Value::Object(map) => {
                let residue = map
                    .get("residue")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Parse("missing residue".into()))?;
                let p = map
                    .get("p")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Parse("missing p".into()))?;
                if Some(p) != field.modulus() {
                    return Err(Error::MixedFields(format!("fp:{p}"), field.tag()));
                }
                if residue >= p {
                    return Err(Error::Parse(format!("residue {residue} not reduced mod {p}")));
                }
                Ok(field.from_bigint(&BigInt::from(residue)))
            }
            other => Err(Error::Parse(format!("cannot read scalar from {other}"))),
        }
    }
}

/// Parses `"a"` or `"a/b"` with arbitrary-precision integers.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        None => Ok(Rational::from_integer(s.parse::<BigInt>().map_err(|_| bad())?)),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(Rational::new(n, d))
        }
    }
}

fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) if q.denom().is_one() => write!(f, "{}", q.numer()),
            Scalar::Rational(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Scalar::Prime(x) => write!(f, "{}", x.residue),
        }
    }
}

fn mixed(a: &Scalar, b: &Scalar) -> ! {
    panic!("mixed-field arithmetic: {} vs {}", a.field(), b.field())
}

macro_rules! binop {
    ($tr:ident, $method:ident, $q:tt, $fp:ident) => {
        impl<'a> $tr<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            #[inline]
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a $q b),
                    (Scalar::Prime(a), Scalar::Prime(b)) if a.modulus == b.modulus => {
                        Scalar::Prime(a.$fp(*b))
                    }
                    _ => mixed(self, rhs),
                }
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            #[inline]
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            #[inline]
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +, add);
binop!(Sub, sub, -, sub);
binop!(Mul, mul, *, mul);

/// Panics on division by zero or mixed fields; use [`Scalar::checked_div`]
/// for the fallible form.
impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'a Scalar) -> Scalar {
        if self.field() != rhs.field() {
            mixed(self, rhs)
        }
        self.checked_div(rhs).expect("division by zero")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    #[inline]
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(q) => Scalar::Rational(-q),
            Scalar::Prime(x) => Scalar::Prime(x.neg()),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    #[inline]
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Deterministic Miller–Rabin, exact for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for &a in &SMALL {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
