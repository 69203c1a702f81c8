//! Graded coefficient rings `E_*`.
//!
//! Every scalar is a homogeneous element `c * t^k` where `c` lives in a base
//! ring (the integers, the rationals or a prime field) and `t` is the
//! periodicity element of the theory (`beta` for the multiplicative theory,
//! `v_n` for Morava K-theory).  Grading is cohomological, so `|beta| = -2`
//! and `|v_n| = -2(p^n - 1)`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::fgl::FormalGroupLaw;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("degree mismatch: cannot add scalars of degree {0} and {1}")]
    DegreeMismatch(i64, i64),
    #[error("{0} is not a unit")]
    NotUnit(String),
    #[error("coefficient ring mismatch")]
    RingMismatch,
    #[error("invalid theory: {0}")]
    InvalidTheory(String),
}

/// The four theory families, plus the rational form of ordinary cohomology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoryKind {
    OrdinaryIntegral,
    OrdinaryRational,
    OrdinaryModP,
    Multiplicative,
    Morava,
}

impl TheoryKind {
    pub fn name(self) -> &'static str {
        match self {
            TheoryKind::OrdinaryIntegral => "ordinary",
            TheoryKind::OrdinaryRational => "rational",
            TheoryKind::OrdinaryModP => "mod-p",
            TheoryKind::Multiplicative => "mult",
            TheoryKind::Morava => "morava",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "ordinary" | "ordinary-integral" => TheoryKind::OrdinaryIntegral,
            "rational" | "ordinary-rational" => TheoryKind::OrdinaryRational,
            "mod-p" | "ordinary-mod-p" => TheoryKind::OrdinaryModP,
            "mult" | "multiplicative" => TheoryKind::Multiplicative,
            "morava" => TheoryKind::Morava,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TheoryConfig {
    pub kind: TheoryKind,
    pub p: Option<u64>,
    pub n: Option<u32>,
    /// Maximal total exponent kept in power series.
    pub truncation: u32,
}

impl TheoryConfig {
    pub fn ordinary(truncation: u32) -> Self {
        TheoryConfig { kind: TheoryKind::OrdinaryIntegral, p: None, n: None, truncation }
    }

    pub fn rational(truncation: u32) -> Self {
        TheoryConfig { kind: TheoryKind::OrdinaryRational, p: None, n: None, truncation }
    }

    pub fn mod_p(p: u64, truncation: u32) -> Self {
        TheoryConfig { kind: TheoryKind::OrdinaryModP, p: Some(p), n: None, truncation }
    }

    pub fn multiplicative(truncation: u32) -> Self {
        TheoryConfig { kind: TheoryKind::Multiplicative, p: None, n: None, truncation }
    }

    /// Multiplicative formal group law with coefficients reduced mod `p`.
    pub fn multiplicative_mod_p(p: u64, truncation: u32) -> Self {
        TheoryConfig { kind: TheoryKind::Multiplicative, p: Some(p), n: None, truncation }
    }

    pub fn morava(p: u64, n: u32, truncation: u32) -> Self {
        TheoryConfig { kind: TheoryKind::Morava, p: Some(p), n: Some(n), truncation }
    }

    pub fn validate(&self) -> Result<(), ScalarError> {
        let bad = |msg: String| Err(ScalarError::InvalidTheory(msg));
        if self.truncation < 1 {
            return bad("truncation degree must be at least 1".into());
        }
        if let Some(p) = self.p {
            if !is_prime(p) {
                return bad(format!("p = {p} is not prime"));
            }
        }
        let needs_p = matches!(self.kind, TheoryKind::OrdinaryModP | TheoryKind::Morava);
        let allows_p = needs_p || self.kind == TheoryKind::Multiplicative;
        if needs_p && self.p.is_none() {
            return bad(format!("theory {} requires p", self.kind.name()));
        }
        if !allows_p && self.p.is_some() {
            return bad(format!("theory {} does not take p", self.kind.name()));
        }
        match (self.kind, self.n) {
            (TheoryKind::Morava, None) => return bad("theory morava requires n".into()),
            (TheoryKind::Morava, Some(0)) => return bad("height n must be at least 1".into()),
            (TheoryKind::Morava, Some(_)) => {}
            (kind, Some(_)) => return bad(format!("theory {} does not take n", kind.name())),
            (_, None) => {}
        }
        if self.truncation > 255 {
            return bad("truncation degree above 255 is not supported".into());
        }
        Ok(())
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseRing {
    Integers,
    Rationals,
    Prime(u64),
}

impl BaseRing {
    pub fn is_field(self) -> bool {
        !matches!(self, BaseRing::Integers)
    }

    pub fn from_i64(self, value: i64) -> Coeff {
        self.from_bigint(&BigInt::from(value))
    }

    pub fn from_bigint(self, value: &BigInt) -> Coeff {
        match self {
            BaseRing::Integers => Coeff::Int(value.clone()),
            BaseRing::Rationals => Coeff::Rat(BigRational::from_integer(value.clone())),
            BaseRing::Prime(p) => {
                let r = value.mod_floor(&BigInt::from(p));
                Coeff::Mod { value: r.to_u64().expect("residue fits"), p }
            }
        }
    }

    pub fn zero(self) -> Coeff {
        self.from_i64(0)
    }

    pub fn one(self) -> Coeff {
        self.from_i64(1)
    }
}

/// The periodicity element of a theory, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Period {
    None,
    Beta,
    Honda { p: u64, n: u32 },
}

impl Period {
    /// Cohomological degree of the periodicity element.
    pub fn degree(self) -> i64 {
        match self {
            Period::None => 0,
            Period::Beta => -2,
            Period::Honda { p, n } => -2 * (p.pow(n) as i64 - 1),
        }
    }

    pub fn name(self) -> Option<String> {
        match self {
            Period::None => None,
            Period::Beta => Some("beta".into()),
            Period::Honda { n, .. } => Some(format!("v{n}")),
        }
    }
}

/// A graded coefficient ring: base ring plus optional invertible periodicity element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ring {
    pub base: BaseRing,
    pub period: Period,
}

impl Ring {
    pub fn rationals() -> Self {
        Ring { base: BaseRing::Rationals, period: Period::None }
    }

    pub fn zero(&self) -> Scalar {
        Scalar { coeff: self.base.zero(), power: 0 }
    }

    pub fn one(&self) -> Scalar {
        Scalar { coeff: self.base.one(), power: 0 }
    }

    pub fn int(&self, value: i64) -> Scalar {
        Scalar { coeff: self.base.from_i64(value), power: 0 }
    }

    /// `c * t^power`; the power is dropped for rings without periodicity.
    pub fn scalar(&self, coeff: Coeff, power: i32) -> Scalar {
        let power = if self.period == Period::None || coeff.is_zero() { 0 } else { power };
        Scalar { coeff, power }
    }

    /// The periodicity element raised to `power`.
    pub fn period_power(&self, power: i32) -> Scalar {
        self.scalar(self.base.one(), power)
    }

    /// Cohomological degree; `None` for zero, which is homogeneous of every degree.
    pub fn degree(&self, s: &Scalar) -> Option<i64> {
        if s.is_zero() {
            None
        } else {
            Some(s.power as i64 * self.period.degree())
        }
    }

    pub fn has_period(&self) -> bool {
        self.period != Period::None
    }

    /// Same grading, rational coefficients in place of the integers.
    pub fn rationalized(&self) -> Ring {
        match self.base {
            BaseRing::Integers => Ring { base: BaseRing::Rationals, period: self.period },
            _ => *self,
        }
    }

    pub fn contains(&self, s: &Scalar) -> bool {
        s.coeff.base() == self.base && (self.has_period() || s.power == 0)
    }

    pub fn format_scalar(&self, s: &Scalar) -> String {
        let c = s.coeff.to_string();
        match (self.period.name(), s.power) {
            (_, 0) | (None, _) => c,
            (Some(name), k) => {
                let t = if k == 1 { name } else { format!("{name}^{k}") };
                if s.coeff.is_one() {
                    t
                } else if s.coeff.is_minus_one() {
                    format!("-{t}")
                } else {
                    format!("{c}*{t}")
                }
            }
        }
    }
}

/// An element of the base ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Coeff {
    Int(BigInt),
    Rat(BigRational),
    Mod { value: u64, p: u64 },
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "{a} not invertible mod {p}");
    t.rem_euclid(p as i128) as u64
}

impl Coeff {
    pub fn base(&self) -> BaseRing {
        match self {
            Coeff::Int(_) => BaseRing::Integers,
            Coeff::Rat(_) => BaseRing::Rationals,
            Coeff::Mod { p, .. } => BaseRing::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Int(a) => a.is_zero(),
            Coeff::Rat(a) => a.is_zero(),
            Coeff::Mod { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coeff::Int(a) => a.is_one(),
            Coeff::Rat(a) => a.is_one(),
            Coeff::Mod { value, .. } => *value == 1,
        }
    }

    pub fn is_minus_one(&self) -> bool {
        match self {
            Coeff::Int(a) => *a == BigInt::from(-1),
            Coeff::Rat(a) => *a == -BigRational::one(),
            Coeff::Mod { value, p } => *value + 1 == *p && *p > 2,
        }
    }

    pub fn is_unit(&self) -> bool {
        match self {
            Coeff::Int(a) => a.abs().is_one(),
            _ => !self.is_zero(),
        }
    }

    pub fn inverse(&self) -> Option<Coeff> {
        if !self.is_unit() {
            return None;
        }
        Some(match self {
            Coeff::Int(a) => Coeff::Int(a.clone()),
            Coeff::Rat(a) => Coeff::Rat(a.recip()),
            Coeff::Mod { value, p } => Coeff::Mod { value: mod_inverse(*value, *p), p: *p },
        })
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        match (self, other) {
            (Coeff::Int(a), Coeff::Int(b)) => Coeff::Int(a + b),
            (Coeff::Rat(a), Coeff::Rat(b)) => Coeff::Rat(a + b),
            (Coeff::Mod { value: a, p }, Coeff::Mod { value: b, .. }) => {
                Coeff::Mod { value: ((*a as u128 + *b as u128) % *p as u128) as u64, p: *p }
            }
            _ => panic!("coefficient ring mismatch"),
        }
    }

    pub fn add_assign(&mut self, other: &Coeff) {
        match (self, other) {
            (Coeff::Int(a), Coeff::Int(b)) => *a += b,
            (Coeff::Rat(a), Coeff::Rat(b)) => *a += b,
            (Coeff::Mod { value: a, p }, Coeff::Mod { value: b, .. }) => {
                *a = ((*a as u128 + *b as u128) % *p as u128) as u64;
            }
            _ => panic!("coefficient ring mismatch"),
        }
    }

    pub fn mul(&self, other: &Coeff) -> Coeff {
        match (self, other) {
            (Coeff::Int(a), Coeff::Int(b)) => Coeff::Int(a * b),
            (Coeff::Rat(a), Coeff::Rat(b)) => Coeff::Rat(a * b),
            (Coeff::Mod { value: a, p }, Coeff::Mod { value: b, .. }) => {
                Coeff::Mod { value: ((*a as u128 * *b as u128) % *p as u128) as u64, p: *p }
            }
            _ => panic!("coefficient ring mismatch"),
        }
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::Int(a) => Coeff::Int(-a),
            Coeff::Rat(a) => Coeff::Rat(-a),
            Coeff::Mod { value, p } => Coeff::Mod { value: (p - value) % p, p: *p },
        }
    }

    pub fn sub(&self, other: &Coeff) -> Coeff {
        self.add(&other.neg())
    }

    /// Euclidean division by a nonzero element: `self = q * d + r`.  Over a
    /// field the remainder is zero; over the integers `0 <= r < |d|`.
    pub fn div_rem(&self, d: &Coeff) -> (Coeff, Coeff) {
        match (self, d) {
            (Coeff::Int(a), Coeff::Int(b)) => {
                let r = a.mod_floor(&b.abs());
                let q = (a - &r) / b;
                (Coeff::Int(q), Coeff::Int(r))
            }
            _ => {
                let inv = d.inverse().expect("division by zero");
                (self.mul(&inv), self.base().zero())
            }
        }
    }

    pub fn as_bigint(&self) -> Option<&BigInt> {
        match self {
            Coeff::Int(a) => Some(a),
            _ => None,
        }
    }

    /// The exact rational value, for integer and rational coefficients.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Coeff::Int(a) => Some(BigRational::from_integer(a.clone())),
            Coeff::Rat(a) => Some(a.clone()),
            Coeff::Mod { .. } => None,
        }
    }

    /// Re-express an integer or rational in another base ring.  Reduction mod p
    /// fails when the denominator is divisible by p.
    pub fn convert(&self, target: BaseRing) -> Option<Coeff> {
        if self.base() == target {
            return Some(self.clone());
        }
        let q = self.to_rational()?;
        match target {
            BaseRing::Integers => q.is_integer().then(|| Coeff::Int(q.to_integer())),
            BaseRing::Rationals => Some(Coeff::Rat(q)),
            BaseRing::Prime(p) => {
                let num = BaseRing::Prime(p).from_bigint(q.numer());
                let den = BaseRing::Prime(p).from_bigint(q.denom());
                Some(num.mul(&den.inverse()?))
            }
        }
    }

    /// The integer value of a residue or integer, as the least non-negative representative.
    pub fn lift_to_i64(&self) -> Option<i64> {
        match self {
            Coeff::Int(a) => a.to_i64(),
            Coeff::Rat(a) if a.is_integer() => a.to_integer().to_i64(),
            Coeff::Rat(_) => None,
            Coeff::Mod { value, .. } => i64::try_from(*value).ok(),
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Int(a) => write!(f, "{a}"),
            Coeff::Rat(a) => write!(f, "{a}"),
            Coeff::Mod { value, .. } => write!(f, "{value}"),
        }
    }
}

/// A homogeneous scalar `coeff * t^power`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    pub coeff: Coeff,
    pub power: i32,
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        self.coeff.is_unit()
    }

    fn check_ring(&self, other: &Scalar) -> Result<(), ScalarError> {
        if self.coeff.base() != other.coeff.base() {
            return Err(ScalarError::RingMismatch);
        }
        Ok(())
    }

    /// Sum of two scalars of equal degree.  Zero is compatible with every degree.
    pub fn add(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.check_ring(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if self.power != other.power {
            return Err(ScalarError::DegreeMismatch(self.power as i64, other.power as i64));
        }
        Ok(normalize(Scalar { coeff: self.coeff.add(&other.coeff), power: self.power }))
    }

    pub fn add_assign(&mut self, other: &Scalar) -> Result<(), ScalarError> {
        if other.is_zero() {
            return Ok(());
        }
        if self.is_zero() {
            self.check_ring(other)?;
            *self = other.clone();
            return Ok(());
        }
        if self.power != other.power {
            return Err(ScalarError::DegreeMismatch(self.power as i64, other.power as i64));
        }
        self.coeff.add_assign(&other.coeff);
        if self.coeff.is_zero() {
            self.power = 0;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        normalize(Scalar { coeff: self.coeff.mul(&other.coeff), power: self.power + other.power })
    }

    pub fn neg(&self) -> Scalar {
        Scalar { coeff: self.coeff.neg(), power: self.power }
    }

    pub fn inverse(&self) -> Result<Scalar, ScalarError> {
        match self.coeff.inverse() {
            Some(c) => Ok(Scalar { coeff: c, power: -self.power }),
            None => Err(ScalarError::NotUnit(self.coeff.to_string())),
        }
    }

    pub fn scale(&self, c: &Coeff) -> Scalar {
        normalize(Scalar { coeff: self.coeff.mul(c), power: self.power })
    }
}

fn normalize(s: Scalar) -> Scalar {
    if s.coeff.is_zero() {
        Scalar { coeff: s.coeff, power: 0 }
    } else {
        s
    }
}

/// A cohomology theory: coefficient ring, truncation degree and (lazily) its
/// formal group law.
#[derive(Clone)]
pub struct Theory {
    inner: Arc<TheoryInner>,
}

struct TheoryInner {
    config: TheoryConfig,
    ring: Ring,
    rationalized: bool,
    fgl: OnceLock<FormalGroupLaw>,
}

impl fmt::Debug for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Theory").field("config", &self.inner.config).field("ring", &self.inner.ring).finish()
    }
}

impl PartialEq for Theory {
    fn eq(&self, other: &Self) -> bool {
        self.inner.config == other.inner.config && self.inner.ring == other.inner.ring
    }
}

impl Eq for Theory {}

pub fn make_theory(config: TheoryConfig) -> Result<Theory, ScalarError> {
    Theory::new(config)
}

impl Theory {
    pub fn new(config: TheoryConfig) -> Result<Theory, ScalarError> {
        config.validate()?;
        let ring = match config.kind {
            TheoryKind::OrdinaryIntegral => Ring { base: BaseRing::Integers, period: Period::None },
            TheoryKind::OrdinaryRational => Ring { base: BaseRing::Rationals, period: Period::None },
            TheoryKind::OrdinaryModP => Ring { base: BaseRing::Prime(config.p.unwrap()), period: Period::None },
            TheoryKind::Multiplicative => {
                Ring { base: config.p.map_or(BaseRing::Integers, BaseRing::Prime), period: Period::Beta }
            }
            TheoryKind::Morava => {
                let (p, n) = (config.p.unwrap(), config.n.unwrap());
                Ring { base: BaseRing::Prime(p), period: Period::Honda { p, n } }
            }
        };
        Ok(Theory::from_parts(config, ring, false))
    }

    fn from_parts(config: TheoryConfig, ring: Ring, rationalized: bool) -> Theory {
        Theory { inner: Arc::new(TheoryInner { config, ring, rationalized, fgl: OnceLock::new() }) }
    }

    pub fn config(&self) -> &TheoryConfig {
        &self.inner.config
    }

    pub fn kind(&self) -> TheoryKind {
        self.inner.config.kind
    }

    pub fn ring(&self) -> Ring {
        self.inner.ring
    }

    pub fn truncation(&self) -> u32 {
        self.inner.config.truncation
    }

    pub fn prime(&self) -> Option<u64> {
        self.inner.config.p
    }

    pub fn height(&self) -> Option<u32> {
        self.inner.config.n
    }

    pub fn is_rationalized(&self) -> bool {
        self.inner.rationalized
    }

    /// The same theory at another truncation degree.
    pub fn with_truncation(&self, truncation: u32) -> Result<Theory, ScalarError> {
        let mut config = self.inner.config.clone();
        config.truncation = truncation;
        config.validate()?;
        Ok(Theory::from_parts(config, self.inner.ring, self.inner.rationalized))
    }

    /// Extend integer scalars to the rationals; other theories are returned unchanged.
    pub fn rationalized(&self) -> Theory {
        if self.inner.ring.base != BaseRing::Integers {
            return self.clone();
        }
        Theory::from_parts(self.inner.config.clone(), self.inner.ring.rationalized(), true)
    }

    /// Whether the coefficient ring is a graded field (every nonzero homogeneous element a unit).
    pub fn is_graded_field(&self) -> bool {
        self.inner.ring.base.is_field()
    }

    pub(crate) fn fgl_cell(&self) -> &OnceLock<FormalGroupLaw> {
        &self.inner.fgl
    }

    pub fn describe(&self) -> String {
        let c = &self.inner.config;
        let mut s = c.kind.name().to_string();
        if let Some(p) = c.p {
            s.push_str(&format!(" p={p}"));
        }
        if let Some(n) = c.n {
            s.push_str(&format!(" n={n}"));
        }
        s.push_str(&format!(" trunc={}", c.truncation));
        if self.inner.rationalized {
            s.push_str(" (rationalized)");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn morava(p: u64, n: u32) -> Theory {
        Theory::new(TheoryConfig::morava(p, n, 8)).unwrap()
    }

    #[test]
    fn morava_coefficients() {
        let t = Theory::new(TheoryConfig::morava(2, 1, 12)).unwrap();
        let r = t.ring();
        assert_eq!(r.base, BaseRing::Prime(2));
        assert_eq!(r.degree(&r.period_power(1)), Some(-2));
        assert!(r.period_power(1).is_unit());
    }

    #[test]
    fn ordinary_integral_is_degree_zero() {
        let t = Theory::new(TheoryConfig::ordinary(8)).unwrap();
        let r = t.ring();
        assert_eq!(r.degree(&r.int(5)), Some(0));
        // no periodicity: requested powers are dropped
        assert_eq!(r.period_power(3), r.one());
    }

    #[test]
    fn validation_errors() {
        let missing_n = TheoryConfig { kind: TheoryKind::Morava, p: Some(2), n: None, truncation: 4 };
        assert!(Theory::new(missing_n).is_err());
        let missing_p = TheoryConfig { kind: TheoryKind::OrdinaryModP, p: None, n: None, truncation: 4 };
        assert!(Theory::new(missing_p).is_err());
        assert!(Theory::new(TheoryConfig::ordinary(0)).is_err());
        assert!(Theory::new(TheoryConfig::morava(4, 1, 4)).is_err());
        assert!(Theory::new(TheoryConfig::morava(2, 0, 4)).is_err());
        let extra_n = TheoryConfig { kind: TheoryKind::OrdinaryIntegral, p: None, n: Some(1), truncation: 4 };
        assert!(Theory::new(extra_n).is_err());
    }

    #[test]
    fn unit_axiom_morava() {
        let r = morava(5, 1).ring();
        let v = r.period_power(1);
        assert_eq!(v.mul(&v.inverse().unwrap()), r.one());
    }

    #[test]
    fn integer_units() {
        let r = Theory::new(TheoryConfig::ordinary(4)).unwrap().ring();
        assert!(!r.int(2).is_unit());
        assert!(r.int(-1).is_unit());
        assert!(r.int(2).inverse().is_err());
    }

    #[test]
    fn honda_degrees() {
        let r = morava(2, 2).ring();
        assert_eq!(r.degree(&r.period_power(1)), Some(-6));
        assert_eq!(r.degree(&r.period_power(2)), Some(-12));
    }

    #[test]
    fn unequal_degrees_do_not_add() {
        let r = morava(3, 1).ring();
        let err = r.one().add(&r.period_power(1)).unwrap_err();
        assert!(matches!(err, ScalarError::DegreeMismatch(0, 1)));
        assert_eq!(r.zero().add(&r.period_power(1)).unwrap(), r.period_power(1));
    }

    #[test]
    fn scalar_formatting() {
        let r = morava(2, 1).ring();
        assert_eq!(r.format_scalar(&r.period_power(1)), "v1");
        assert_eq!(r.format_scalar(&r.period_power(-2)), "v1^-2");
        let m = Theory::new(TheoryConfig::multiplicative(4)).unwrap().ring();
        assert_eq!(m.format_scalar(&m.period_power(1).neg()), "-beta");
        assert_eq!(m.format_scalar(&m.int(3).mul(&m.period_power(2))), "3*beta^2");
    }

    #[test]
    fn rational_conversion() {
        let half = Coeff::Rat(BigRational::new(1.into(), 2.into()));
        assert_eq!(half.convert(BaseRing::Prime(3)), Some(Coeff::Mod { value: 2, p: 3 }));
        assert_eq!(half.convert(BaseRing::Prime(2)), None);
        assert_eq!(half.convert(BaseRing::Integers), None);
    }

    #[test]
    fn integer_div_rem() {
        let (q, r) = Coeff::Int((-7).into()).div_rem(&Coeff::Int(3.into()));
        assert_eq!((q, r), (Coeff::Int((-3).into()), Coeff::Int(2.into())));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn ring_strategy() -> impl Strategy<Value = Ring> {
            prop_oneof![
                Just(Ring { base: BaseRing::Integers, period: Period::None }),
                Just(Ring { base: BaseRing::Integers, period: Period::Beta }),
                Just(Ring { base: BaseRing::Prime(3), period: Period::Honda { p: 3, n: 1 } }),
                Just(Ring { base: BaseRing::Prime(2), period: Period::Honda { p: 2, n: 2 } }),
                Just(Ring { base: BaseRing::Prime(7), period: Period::None }),
            ]
        }

        proptest! {
            #[test]
            fn ring_axioms(ring in ring_strategy(), a in -20i64..20, b in -20i64..20, c in -20i64..20, k in -3i32..3, l in -3i32..3) {
                let x = ring.int(a).mul(&ring.period_power(k));
                let y = ring.int(b).mul(&ring.period_power(k));
                let z = ring.int(c).mul(&ring.period_power(l));
                prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
                prop_assert_eq!(x.mul(&z), z.mul(&x));
                prop_assert_eq!(z.mul(&x.add(&y).unwrap()), z.mul(&x).add(&z.mul(&y)).unwrap());
                prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
                // degree additivity and preservation
                if let (Some(dx), Some(dz)) = (ring.degree(&x), ring.degree(&z)) {
                    if let Some(dxz) = ring.degree(&x.mul(&z)) {
                        prop_assert_eq!(dxz, dx + dz);
                    }
                    if let Some(dn) = ring.degree(&x.neg()) {
                        prop_assert_eq!(dn, dx);
                    }
                }
                if let Some(ds) = ring.degree(&x.add(&y).unwrap()) {
                    prop_assert_eq!(Some(ds), ring.degree(&x).or(ring.degree(&y)));
                }
            }

            #[test]
            fn graded_fields_have_inverses(a in 1i64..1000, k in -4i32..4, pick in 0usize..3) {
                let ring = [
                    Ring { base: BaseRing::Prime(5), period: Period::Honda { p: 5, n: 1 } },
                    Ring { base: BaseRing::Prime(3), period: Period::None },
                    Ring { base: BaseRing::Prime(2), period: Period::Honda { p: 2, n: 3 } },
                ][pick];
                let x = ring.int(a).mul(&ring.period_power(k));
                prop_assume!(!x.is_zero());
                prop_assert!(x.is_unit());
                prop_assert_eq!(x.mul(&x.inverse().unwrap()), ring.one());
            }
        }
    }
}
