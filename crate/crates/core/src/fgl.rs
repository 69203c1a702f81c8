//! Formal group laws: additive, multiplicative (`x + y - beta*x*y`) and the
//! Honda law of Morava K-theory, together with formal sums, inverses and
//! `[l]`-series.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{BaseRing, Coeff, Period, Ring, Scalar, Theory, TheoryKind};
use crate::series::{Homogeneity, SeriesError, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FglError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("Honda coefficient of x^{0} y^{1} is not p-integral")]
    NotPIntegral(u32, u32),
    #[error("Honda coefficient of x^{0} y^{1} is nonzero but (p^n - 1) does not divide {0} + {1} - 1")]
    Indivisible(u32, u32),
    #[error("argument has a nonzero constant term")]
    ConstantTerm,
    #[error("formal group law axiom fails: {0}")]
    Axiom(String),
}

#[derive(Debug, Clone)]
pub struct FormalGroupLaw {
    theory: Theory,
    law: TruncatedSeries,
    inverse: TruncatedSeries,
    multiples: Arc<Mutex<HashMap<i64, TruncatedSeries>>>,
}

impl Theory {
    /// The formal group law of the theory, built on first use.
    pub fn fgl(&self) -> Result<&FormalGroupLaw, FglError> {
        if let Some(f) = self.fgl_cell().get() {
            return Ok(f);
        }
        let built = build_fgl(self)?;
        Ok(self.fgl_cell().get_or_init(|| built))
    }
}

pub fn build_fgl(theory: &Theory) -> Result<FormalGroupLaw, FglError> {
    let ring = theory.ring();
    let d = theory.truncation();
    let x = TruncatedSeries::variable(ring, 2, d, 0);
    let y = TruncatedSeries::variable(ring, 2, d, 1);
    let law = match theory.kind() {
        TheoryKind::OrdinaryIntegral | TheoryKind::OrdinaryRational | TheoryKind::OrdinaryModP => x.add(&y)?,
        TheoryKind::Multiplicative => {
            let beta = ring.period_power(1);
            x.add(&y)?.sub(&x.mul(&y)?.scale(&beta))?
        }
        TheoryKind::Morava => {
            let (p, n) = (theory.prime().unwrap(), theory.height().unwrap());
            honda_law(ring, p, n, d)?
        }
    };
    let inverse = inverse_series(&law)?;
    Ok(FormalGroupLaw { theory: theory.clone(), law, inverse, multiples: Arc::default() })
}

/// The logarithm `sum_i x^{p^{n i}} / p^i` over the rationals, truncated at `d`.
pub fn honda_logarithm(p: u64, n: u32, d: u32) -> TruncatedSeries {
    let q = Ring::rationals();
    let mut log = TruncatedSeries::zero(q, 1, d);
    let step = p.pow(n);
    let (mut exponent, mut denom) = (1u64, BigInt::one());
    while exponent <= d as u64 {
        let c = BigRational::new(BigInt::one(), denom.clone());
        log.set_coeff(&[exponent as u32], q.scalar(Coeff::Rat(c), 0));
        exponent *= step;
        denom *= p;
    }
    log
}

/// Compositional inverse of a series `x + (higher terms)` in one variable.
fn reversion(f: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    let z = TruncatedSeries::variable(f.ring(), 1, f.truncation(), 0);
    let mut e = z.clone();
    // e <- z - (f(e) - e); each pass fixes at least one more degree
    for _ in 0..=f.truncation() {
        let next = z.sub(&f.substitute(&[e.clone()])?.sub(&e)?)?;
        if next == e {
            break;
        }
        e = next;
    }
    Ok(e)
}

fn honda_law(ring: Ring, p: u64, n: u32, d: u32) -> Result<TruncatedSeries, FglError> {
    let q = Ring::rationals();
    let log = honda_logarithm(p, n, d);
    let exp = reversion(&log)?;
    let x = TruncatedSeries::variable(q, 2, d, 0);
    let y = TruncatedSeries::variable(q, 2, d, 1);
    let sum = log.substitute(&[x])?.add(&log.substitute(&[y])?)?;
    let rational_law = exp.substitute(&[sum])?;

    let period = p.pow(n) - 1;
    let pz = BigInt::from(p);
    let mut law = TruncatedSeries::zero(ring, 2, d);
    for (e, c) in rational_law.terms() {
        let (i, j) = (e[0], e[1]);
        let value = c.coeff.to_rational().expect("rational coefficient");
        if value.denom().mod_floor(&pz).is_zero() {
            return Err(FglError::NotPIntegral(i, j));
        }
        if !((i + j - 1) as u64).is_multiple_of(period) {
            return Err(FglError::Indivisible(i, j));
        }
        let reduced = Coeff::Rat(value).convert(ring.base).expect("p-integral");
        if !reduced.is_zero() {
            let power = ((i + j - 1) as u64 / period) as i32;
            law.set_coeff(&e, ring.scalar(reduced, power));
        }
    }
    Ok(law)
}

fn inverse_series(law: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
    let ring = law.ring();
    let d = law.truncation();
    let u = TruncatedSeries::variable(ring, 1, d, 0);
    let mut iota = u.neg();
    for k in 2..=d {
        let r = law.substitute(&[u.clone(), iota.clone()])?.coeff(&[k]);
        if !r.is_zero() {
            let current = iota.coeff(&[k]);
            iota.set_coeff(&[k], current.sub(&r)?);
        }
    }
    Ok(iota)
}

fn require_no_constant(a: &TruncatedSeries) -> Result<(), FglError> {
    if a.constant_term().is_zero() {
        Ok(())
    } else {
        Err(FglError::ConstantTerm)
    }
}

impl FormalGroupLaw {
    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn ring(&self) -> Ring {
        self.law.ring()
    }

    /// `F(x, y)` as a two-variable series.
    pub fn series(&self) -> &TruncatedSeries {
        &self.law
    }

    pub fn truncation(&self) -> u32 {
        self.law.truncation()
    }

    /// Coefficient of `x^i y^j`.
    pub fn coefficient(&self, i: u32, j: u32) -> Scalar {
        self.law.coeff(&[i, j])
    }

    /// `a +_F b`.
    pub fn formal_sum(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries, FglError> {
        require_no_constant(a)?;
        require_no_constant(b)?;
        Ok(self.law.substitute(&[a.clone(), b.clone()])?)
    }

    /// The formal inverse series `iota(u)` with `F(u, iota(u)) = 0`.
    pub fn inverse_series(&self) -> &TruncatedSeries {
        &self.inverse
    }

    pub fn formal_inverse(&self, a: &TruncatedSeries) -> Result<TruncatedSeries, FglError> {
        require_no_constant(a)?;
        Ok(self.inverse.substitute(std::slice::from_ref(a))?)
    }

    /// `[l](u)` in one variable, by a doubling chain.  Results are memoized.
    pub fn n_series(&self, l: i64) -> Result<TruncatedSeries, FglError> {
        if let Some(s) = self.multiples.lock().unwrap().get(&l) {
            return Ok(s.clone());
        }
        let s = self.n_series_uncached(l)?;
        self.multiples.lock().unwrap().insert(l, s.clone());
        Ok(s)
    }

    fn n_series_uncached(&self, l: i64) -> Result<TruncatedSeries, FglError> {
        let u = TruncatedSeries::variable(self.ring(), 1, self.truncation(), 0);
        if l == 0 {
            return Ok(u.zero_like());
        }
        let magnitude = l.unsigned_abs();
        let mut acc = u.clone();
        for bit in (0..63 - magnitude.leading_zeros()).rev() {
            acc = self.formal_sum(&acc, &acc)?;
            if (magnitude >> bit) & 1 == 1 {
                acc = self.formal_sum(&acc, &u)?;
            }
        }
        if l < 0 {
            acc = self.formal_inverse(&acc)?;
        }
        Ok(acc)
    }

    /// The `u`-adic order of `[l](u)` without truncation; `None` when the
    /// series vanishes identically.
    pub fn n_series_order(&self, l: i64) -> Option<u32> {
        if l == 0 {
            return None;
        }
        let ring = self.ring();
        let p = match ring.base {
            BaseRing::Prime(p) => p,
            _ => return Some(1),
        };
        let mut r = 0u32;
        let mut rest = l.unsigned_abs();
        while rest.is_multiple_of(p) {
            rest /= p;
            r += 1;
        }
        let order = match ring.period {
            Period::None if r > 0 => return None,
            Period::None => 1,
            Period::Beta => p.checked_pow(r)?,
            Period::Honda { n, .. } => p.checked_pow(r * n)?,
        };
        u32::try_from(order).ok()
    }

    /// `[l](a)` for a series `a` without constant term.
    pub fn multiply(&self, l: i64, a: &TruncatedSeries) -> Result<TruncatedSeries, FglError> {
        require_no_constant(a)?;
        Ok(self.n_series(l)?.substitute(std::slice::from_ref(a))?)
    }

    /// Unitality, commutativity, associativity and coefficient degrees, to the truncation.
    pub fn verify_axioms(&self) -> Result<(), FglError> {
        let ring = self.ring();
        let d = self.truncation();
        let x = TruncatedSeries::variable(ring, 2, d, 0);
        let y = TruncatedSeries::variable(ring, 2, d, 1);
        let zero = x.zero_like();
        if self.formal_sum(&x, &zero)? != x || self.formal_sum(&zero, &y)? != y {
            return Err(FglError::Axiom("unitality".into()));
        }
        if self.formal_sum(&y, &x)? != self.law {
            return Err(FglError::Axiom("commutativity".into()));
        }
        let a = TruncatedSeries::variable(ring, 3, d, 0);
        let b = TruncatedSeries::variable(ring, 3, d, 1);
        let c = TruncatedSeries::variable(ring, 3, d, 2);
        let left = self.formal_sum(&self.formal_sum(&a, &b)?, &c)?;
        let right = self.formal_sum(&a, &self.formal_sum(&b, &c)?)?;
        if left != right {
            return Err(FglError::Axiom("associativity".into()));
        }
        match self.law.homogeneity() {
            Homogeneity::Homogeneous(2) => Ok(()),
            h => Err(FglError::Axiom(format!("law is not homogeneous of degree 2: {h:?}"))),
        }
    }

    pub fn format(&self) -> String {
        self.law.format(&["x", "y"])
    }

    /// Exponent `d(r) = (p^{rn} - 1) / (p^n - 1)` of `v_n` in `[p^r](u)`, for Honda laws.
    pub fn honda_exponent(&self, r: u32) -> Option<u64> {
        match self.ring().period {
            Period::Honda { p, n } => Some((p.pow(r * n) - 1) / (p.pow(n) - 1)),
            _ => None,
        }
    }
}
