//! Truncated multivariate power series over graded scalars, and one-variable
//! Laurent series used for localization.
//!
//! Series are stored densely: one coefficient per exponent vector of total
//! degree at most the truncation `D`, in the canonical order (total degree,
//! then descending lexicographic exponent).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::scalar::{Ring, Scalar, ScalarError};

/// Upper bound on the number of variables of a series.
pub const MAX_VARS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("shape mismatch: ({0} vars, trunc {1}) vs ({2} vars, trunc {3})")]
    ShapeMismatch(usize, u32, usize, u32),
    #[error("coefficient ring mismatch")]
    RingMismatch,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("substituted series {0} has a nonzero constant term")]
    ConstantTerm(usize),
    #[error("expected {expected} substitution series, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("series has truncation {have}, at least {need} required")]
    InsufficientTruncation { have: u32, need: u32 },
    #[error("constant term is not a unit")]
    NotInvertible,
    #[error("division by zero")]
    DivisionByZero,
    #[error("leading coefficient of the divisor is not a unit")]
    NonUnitLeading,
    #[error("too many variables (at most {MAX_VARS})")]
    TooManyVariables,
}

/// Exponent vectors of total degree at most `trunc` in `vars` variables.
#[derive(Debug)]
pub struct MonomialIndex {
    vars: usize,
    trunc: u32,
    exps: Vec<u8>,
    degrees: Vec<u32>,
    offsets: Vec<usize>,
    // binom[s][c] = C(s + c, c): vectors of c entries with total at most s
    binom: Vec<Vec<usize>>,
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k.min(n));
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl MonomialIndex {
    fn build(vars: usize, trunc: u32) -> MonomialIndex {
        let mut exps = Vec::new();
        let mut degrees = Vec::new();
        let mut offsets = Vec::with_capacity(trunc as usize + 2);
        let mut buf = vec![0u8; vars];
        for t in 0..=trunc {
            offsets.push(degrees.len());
            if vars == 0 {
                if t == 0 {
                    degrees.push(0);
                }
                continue;
            }
            fill(&mut buf, 0, t, &mut |e| {
                exps.extend_from_slice(e);
                degrees.push(t);
            });
        }
        offsets.push(degrees.len());
        let s_max = trunc as usize + 1;
        let binom = (0..=s_max).map(|s| (0..=vars).map(|c| binomial(s + c, c)).collect()).collect();
        MonomialIndex { vars, trunc, exps, degrees, offsets, binom }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn truncation(&self) -> u32 {
        self.trunc
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn exponent(&self, i: usize) -> &[u8] {
        &self.exps[i * self.vars..(i + 1) * self.vars]
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.degrees[i]
    }

    /// Indices of the monomials of total degree exactly `t`.
    pub fn degree_range(&self, t: u32) -> std::ops::Range<usize> {
        if t > self.trunc {
            return self.len()..self.len();
        }
        self.offsets[t as usize]..self.offsets[t as usize + 1]
    }

    /// Number of monomials with total degree at most `t`.
    pub fn count_up_to(&self, t: u32) -> usize {
        self.offsets[(t.min(self.trunc) + 1) as usize]
    }

    /// Position of an exponent vector, or `None` if its total exceeds the truncation.
    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        debug_assert_eq!(e.len(), self.vars);
        let t: u32 = e.iter().sum();
        if t > self.trunc {
            return None;
        }
        let mut rank = self.offsets[t as usize];
        let mut remaining = t;
        for (k, &a) in e.iter().enumerate().take(self.vars.saturating_sub(1)) {
            let after = self.vars - k - 1;
            if remaining > a {
                rank += self.binom[(remaining - a - 1) as usize][after];
            }
            remaining -= a;
        }
        Some(rank)
    }

    fn index_of_sum(&self, i: usize, j: usize) -> Option<usize> {
        let mut buf = [0u32; MAX_VARS];
        let (a, b) = (self.exponent(i), self.exponent(j));
        for k in 0..self.vars {
            buf[k] = a[k] as u32 + b[k] as u32;
        }
        self.index_of(&buf[..self.vars])
    }
}

fn fill(buf: &mut [u8], pos: usize, remaining: u32, emit: &mut dyn FnMut(&[u8])) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining as u8;
        emit(buf);
        return;
    }
    for a in (0..=remaining).rev() {
        buf[pos] = a as u8;
        fill(buf, pos + 1, remaining - a, emit);
    }
}

/// Shared monomial table for a given shape.
type IndexCache = Mutex<HashMap<(usize, u32), Arc<MonomialIndex>>>;

pub fn monomial_index(vars: usize, trunc: u32) -> Arc<MonomialIndex> {
    static CACHE: OnceLock<IndexCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry((vars, trunc)).or_insert_with(|| Arc::new(MonomialIndex::build(vars, trunc))).clone()
}

/// Homogeneity of a series with respect to cohomological degree (`|u_i| = 2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Homogeneity {
    Zero,
    Homogeneous(i64),
    Mixed,
}

/// An element of `E_*[[u_1, ..., u_m]] / (u)^{D+1}`.
#[derive(Debug, Clone)]
pub struct TruncatedSeries {
    ring: Ring,
    index: Arc<MonomialIndex>,
    coeffs: Vec<Scalar>,
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring
            && self.vars() == other.vars()
            && self.truncation() == other.truncation()
            && self.coeffs == other.coeffs
    }
}

impl Eq for TruncatedSeries {}

impl TruncatedSeries {
    pub fn zero(ring: Ring, vars: usize, trunc: u32) -> TruncatedSeries {
        assert!(vars <= MAX_VARS, "at most {MAX_VARS} variables");
        let index = monomial_index(vars, trunc);
        let coeffs = vec![ring.zero(); index.len()];
        TruncatedSeries { ring, index, coeffs }
    }

    pub fn constant(ring: Ring, vars: usize, trunc: u32, c: Scalar) -> TruncatedSeries {
        let mut s = Self::zero(ring, vars, trunc);
        s.coeffs[0] = c;
        s
    }

    pub fn one(ring: Ring, vars: usize, trunc: u32) -> TruncatedSeries {
        Self::constant(ring, vars, trunc, ring.one())
    }

    /// The variable `u_{i+1}` (zero-based `i`).
    pub fn variable(ring: Ring, vars: usize, trunc: u32, i: usize) -> TruncatedSeries {
        let mut e = vec![0u32; vars];
        e[i] = 1;
        Self::monomial(ring, vars, trunc, &e, ring.one())
    }

    /// `c * u^e`; zero if the monomial lies above the truncation.
    pub fn monomial(ring: Ring, vars: usize, trunc: u32, e: &[u32], c: Scalar) -> TruncatedSeries {
        let mut s = Self::zero(ring, vars, trunc);
        if let Some(i) = s.index.index_of(e) {
            s.coeffs[i] = c;
        }
        s
    }

    /// A zero series with the same shape and ring.
    pub fn zero_like(&self) -> TruncatedSeries {
        TruncatedSeries {
            ring: self.ring,
            index: self.index.clone(),
            coeffs: vec![self.ring.zero(); self.coeffs.len()],
        }
    }

    pub fn one_like(&self) -> TruncatedSeries {
        let mut s = self.zero_like();
        s.coeffs[0] = self.ring.one();
        s
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn vars(&self) -> usize {
        self.index.vars()
    }

    pub fn truncation(&self) -> u32 {
        self.index.truncation()
    }

    pub fn index(&self) -> &MonomialIndex {
        &self.index
    }

    pub fn coeff(&self, e: &[u32]) -> Scalar {
        match self.index.index_of(e) {
            Some(i) => self.coeffs[i].clone(),
            None => self.ring.zero(),
        }
    }

    pub fn coeff_at(&self, i: usize) -> &Scalar {
        &self.coeffs[i]
    }

    /// Sets a coefficient; silently ignored above the truncation.
    pub fn set_coeff(&mut self, e: &[u32], c: Scalar) {
        if let Some(i) = self.index.index_of(e) {
            self.coeffs[i] = c;
        }
    }

    pub fn constant_term(&self) -> &Scalar {
        &self.coeffs[0]
    }

    /// Nonzero terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<u32>, &Scalar)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.index.exponent(i).iter().map(|&x| x as u32).collect(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// Lowest total degree carrying a nonzero coefficient.
    pub fn order(&self) -> Option<u32> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|i| self.index.degree(i))
    }

    fn check_shape(&self, other: &TruncatedSeries) -> Result<(), SeriesError> {
        if self.vars() != other.vars() || self.truncation() != other.truncation() {
            return Err(SeriesError::ShapeMismatch(self.vars(), self.truncation(), other.vars(), other.truncation()));
        }
        if self.ring != other.ring {
            return Err(SeriesError::RingMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            a.add_assign(b)?;
        }
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &TruncatedSeries) -> Result<(), SeriesError> {
        self.check_shape(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            a.add_assign(b)?;
        }
        Ok(())
    }

    pub fn neg(&self) -> TruncatedSeries {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = c.neg());
        out
    }

    pub fn sub(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Scalar) -> TruncatedSeries {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = c.mul(s));
        out
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: &Scalar, other: &TruncatedSeries) -> Result<(), SeriesError> {
        self.check_shape(other)?;
        if s.is_zero() {
            return Ok(());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !b.is_zero() {
                a.add_assign(&b.mul(s))?;
            }
        }
        Ok(())
    }

    pub fn mul(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.check_shape(other)?;
        let idx = &*self.index;
        let d = idx.truncation();
        let mut out = self.zero_like();
        let right: Vec<usize> = (0..other.coeffs.len()).filter(|&j| !other.coeffs[j].is_zero()).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let limit = idx.count_up_to(d - idx.degree(i));
            for &j in right.iter().take_while(|&&j| j < limit) {
                let k = idx.index_of_sum(i, j).expect("within truncation");
                out.coeffs[k].add_assign(&a.mul(&other.coeffs[j]))?;
            }
        }
        Ok(out)
    }

    /// `c * u^e * self`, truncated.
    pub fn shift(&self, e: &[u32], c: &Scalar) -> TruncatedSeries {
        let mut out = self.zero_like();
        if c.is_zero() {
            return out;
        }
        let mut target = vec![0u32; e.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (k, (t, &x)) in target.iter_mut().zip(self.index.exponent(i)).enumerate() {
                *t = x as u32 + e[k];
            }
            if let Some(j) = self.index.index_of(&target) {
                out.coeffs[j] = a.mul(c);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Result<TruncatedSeries, SeriesError> {
        let mut result = self.one_like();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Multiplicative inverse; the constant term must be a unit.
    pub fn invert(&self) -> Result<TruncatedSeries, SeriesError> {
        let c0 = self.constant_term();
        if !c0.is_unit() {
            return Err(SeriesError::NotInvertible);
        }
        let c0_inv = c0.inverse()?;
        let mut tail = self.clone();
        tail.coeffs[0] = self.ring.zero();
        let h = tail.scale(&c0_inv.neg());
        // 1/(c0 (1 - h)) = c0^{-1} (1 + h + h^2 + ...)
        let mut r = self.one_like();
        for _ in 0..self.truncation() {
            let mut next = h.mul(&r)?;
            next.coeffs[0].add_assign(&self.ring.one())?;
            r = next;
        }
        Ok(r.scale(&c0_inv))
    }

    /// Composition `f(g_1, ..., g_m)`, each `g_i` without constant term, in the
    /// ring of the `g_i`.
    pub fn substitute(&self, gs: &[TruncatedSeries]) -> Result<TruncatedSeries, SeriesError> {
        if gs.len() != self.vars() {
            return Err(SeriesError::ArityMismatch { expected: self.vars(), got: gs.len() });
        }
        let target = match gs.first() {
            Some(g) => g.clone(),
            // constants substitute to constants; there is no target ring to speak of
            None => return Ok(self.clone()),
        };
        for (i, g) in gs.iter().enumerate() {
            target.check_shape(g)?;
            if !g.constant_term().is_zero() {
                return Err(SeriesError::ConstantTerm(i));
            }
        }
        if g_ring_mismatch(self, &target) {
            return Err(SeriesError::RingMismatch);
        }
        let d = target.truncation();
        if self.truncation() < d {
            return Err(SeriesError::InsufficientTruncation { have: self.truncation(), need: d });
        }
        let m = self.vars();
        // powers[k][e] = g_k^e while nonzero within truncation
        let mut powers: Vec<Vec<TruncatedSeries>> = Vec::with_capacity(m);
        for g in gs {
            let ord = g.order().unwrap_or(d + 1);
            let max_e = d.checked_div(ord).unwrap_or(0);
            let mut p = vec![target.one_like()];
            for e in 1..=max_e {
                let next = p[e as usize - 1].mul(g)?;
                p.push(next);
            }
            powers.push(p);
        }
        // group terms by the exponents of all but the last variable
        let mut groups: Vec<(Vec<u32>, TruncatedSeries)> = Vec::new();
        let mut lookup: HashMap<Vec<u32>, usize> = HashMap::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() || self.index.degree(i) > d {
                continue;
            }
            let e: Vec<u32> = self.index.exponent(i).iter().map(|&x| x as u32).collect();
            let (prefix, last) = (e[..m - 1].to_vec(), e[m - 1] as usize);
            if prefix.iter().zip(&powers).any(|(&a, p)| a as usize >= p.len()) || last >= powers[m - 1].len() {
                continue;
            }
            let slot = *lookup.entry(prefix.clone()).or_insert_with(|| {
                groups.push((prefix, target.zero_like()));
                groups.len() - 1
            });
            groups[slot].1.add_scaled(c, &powers[m - 1][last])?;
        }
        let mut out = target.zero_like();
        for (prefix, inner) in groups {
            let mut term = inner;
            for (k, &a) in prefix.iter().enumerate() {
                if a > 0 {
                    term = term.mul(&powers[k][a as usize])?;
                }
            }
            out.add_assign(&term)?;
        }
        Ok(out)
    }

    /// Copy of the series at another truncation.  Raising the truncation treats
    /// the unknown higher coefficients as zero.
    pub fn retruncate(&self, trunc: u32) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.ring, self.vars(), trunc);
        for (e, c) in self.terms() {
            out.set_coeff(&e, c.clone());
        }
        out
    }

    /// Reinterpret the coefficients in another ring with the same periodicity.
    pub fn convert(&self, ring: Ring) -> Option<TruncatedSeries> {
        if ring.period != self.ring.period {
            return None;
        }
        let mut out = TruncatedSeries::zero(ring, self.vars(), self.truncation());
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.coeffs[i] = Scalar { coeff: c.coeff.convert(ring.base)?, power: c.power };
            }
        }
        Some(out)
    }

    /// Homogeneity with `|u_i| = 2`.
    pub fn homogeneity(&self) -> Homogeneity {
        let mut deg = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if let Some(dc) = self.ring.degree(c) {
                let q = dc + 2 * self.index.degree(i) as i64;
                match deg {
                    None => deg = Some(q),
                    Some(d) if d != q => return Homogeneity::Mixed,
                    _ => {}
                }
            }
        }
        deg.map_or(Homogeneity::Zero, Homogeneity::Homogeneous)
    }

    pub fn is_homogeneous_of(&self, q: i64) -> bool {
        matches!(self.homogeneity(), Homogeneity::Zero) || self.homogeneity() == Homogeneity::Homogeneous(q)
    }

    /// Canonical text form with the given variable names.
    pub fn format(&self, names: &[&str]) -> String {
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut mono = String::new();
            for (k, &a) in self.index.exponent(i).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                if !mono.is_empty() {
                    mono.push('*');
                }
                mono.push_str(names[k]);
                if a > 1 {
                    let _ = write!(mono, "^{a}");
                }
            }
            let term = format_term(&self.ring, c, &mono);
            if out.is_empty() {
                out = term;
            } else if let Some(rest) = term.strip_prefix('-') {
                let _ = write!(out, " - {rest}");
            } else {
                let _ = write!(out, " + {term}");
            }
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }

    /// Canonical text with variables `u1, ..., um` (or `u` for one variable).
    pub fn to_canonical_string(&self) -> String {
        let names = default_names(self.vars());
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        self.format(&refs)
    }
}

fn g_ring_mismatch(f: &TruncatedSeries, target: &TruncatedSeries) -> bool {
    f.ring != target.ring
}

pub fn default_names(vars: usize) -> Vec<String> {
    if vars == 1 {
        vec!["u".into()]
    } else {
        (1..=vars).map(|i| format!("u{i}")).collect()
    }
}

fn format_term(ring: &Ring, c: &Scalar, mono: &str) -> String {
    if mono.is_empty() {
        return ring.format_scalar(c);
    }
    if c.power == 0 && c.coeff.is_one() {
        return mono.to_string();
    }
    if c.power == 0 && c.coeff.is_minus_one() {
        return format!("-{mono}");
    }
    format!("{}*{mono}", ring.format_scalar(c))
}

/// A one-variable Laurent series `sum_{k >= start} c_k s^k`, known through
/// exponent `known_through`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    ring: Ring,
    start: i64,
    coeffs: Vec<Scalar>,
    known_through: i64,
}

impl LaurentSeries {
    pub fn new(ring: Ring, start: i64, coeffs: Vec<Scalar>, known_through: i64) -> LaurentSeries {
        let mut s = LaurentSeries { ring, start, coeffs, known_through };
        s.normalize();
        s
    }

    /// A one-variable truncated series viewed as a Laurent series.
    pub fn from_series(f: &TruncatedSeries) -> LaurentSeries {
        assert_eq!(f.vars(), 1, "Laurent series need a single variable");
        let coeffs = (0..=f.truncation()).map(|k| f.coeff(&[k])).collect();
        LaurentSeries::new(f.ring(), 0, coeffs, f.truncation() as i64)
    }

    fn normalize(&mut self) {
        let drop = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        self.coeffs.drain(..drop);
        self.start += drop as i64;
        let keep = (self.known_through - self.start + 1).max(0) as usize;
        self.coeffs.truncate(keep);
        if self.coeffs.is_empty() {
            self.start = self.known_through + 1;
        }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.start)
    }

    pub fn known_through(&self) -> i64 {
        self.known_through
    }

    pub fn coeff(&self, k: i64) -> Scalar {
        if k < self.start || k > self.known_through {
            return self.ring.zero();
        }
        self.coeffs.get((k - self.start) as usize).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn add(&self, other: &LaurentSeries) -> Result<LaurentSeries, SeriesError> {
        if self.ring != other.ring {
            return Err(SeriesError::RingMismatch);
        }
        let known = self.known_through.min(other.known_through);
        let start = self.start.min(other.start).min(known + 1);
        let mut coeffs = Vec::new();
        for k in start..=known {
            coeffs.push(self.coeff(k).add(&other.coeff(k))?);
        }
        Ok(LaurentSeries::new(self.ring, start, coeffs, known))
    }

    pub fn mul(&self, other: &LaurentSeries) -> Result<LaurentSeries, SeriesError> {
        if self.ring != other.ring {
            return Err(SeriesError::RingMismatch);
        }
        let start = self.start + other.start;
        let rel = (self.known_through - self.start).min(other.known_through - other.start);
        let known = start + rel;
        let mut coeffs = vec![self.ring.zero(); (rel + 1).max(0) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j < coeffs.len() {
                    coeffs[i + j].add_assign(&a.mul(b))?;
                }
            }
        }
        Ok(LaurentSeries::new(self.ring, start, coeffs, known))
    }

    /// Exact quotient `self / divisor`; the divisor needs a unit leading coefficient.
    pub fn divide(&self, divisor: &LaurentSeries) -> Result<LaurentSeries, SeriesError> {
        laurent_divide(self, divisor)
    }

    pub fn format(&self, var: &str) -> String {
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = self.start + i as i64;
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            let term = format_term(&self.ring, c, &mono);
            if out.is_empty() {
                out = term;
            } else if let Some(rest) = term.strip_prefix('-') {
                let _ = write!(out, " - {rest}");
            } else {
                let _ = write!(out, " + {term}");
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        let _ = write!(out, " + O({var}^{})", self.known_through + 1);
        out
    }
}

/// Quotient of Laurent series, valid to the common relative precision.
pub fn laurent_divide(f: &LaurentSeries, g: &LaurentSeries) -> Result<LaurentSeries, SeriesError> {
    if f.ring != g.ring {
        return Err(SeriesError::RingMismatch);
    }
    if g.is_zero() {
        return Err(SeriesError::DivisionByZero);
    }
    let lead_inv = g.coeffs[0].inverse().map_err(|_| SeriesError::NonUnitLeading)?;
    let g_rel = g.known_through - g.start;
    if f.is_zero() {
        return Ok(LaurentSeries::new(f.ring, 0, vec![], f.known_through - g.start));
    }
    let rel = (f.known_through - f.start).min(g_rel);
    let start = f.start - g.start;
    let n = (rel + 1).max(0) as usize;
    let mut q: Vec<Scalar> = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = f.coeffs.get(k).cloned().unwrap_or_else(|| f.ring.zero());
        for j in 1..=k {
            if let Some(gj) = g.coeffs.get(j) {
                acc.add_assign(&gj.mul(&q[k - j]).neg())?;
            }
        }
        q.push(acc.mul(&lead_inv));
    }
    Ok(LaurentSeries::new(f.ring, start, q, start + rel))
}
