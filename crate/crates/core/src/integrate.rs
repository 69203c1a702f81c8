//! Fixed-point localization: equivariant Euler classes at the vertices and
//! the integration formula `sum_i f_i / eu_i`, evaluated after restricting to
//! a generic one-parameter subgroup `s -> (s^l_1, ..., s^l_m)`.

use std::fmt;

use thiserror::Error;

use crate::fgl::{FglError, FormalGroupLaw};
use crate::gkm::{validate_graph, EquivariantClass, GkmGraph, Violation};
use crate::lattice::Character;
use crate::scalar::{Scalar, ScalarError, Theory};
use crate::series::{laurent_divide, LaurentSeries, SeriesError, TruncatedSeries};

/// Largest box searched for a generic slope.
const MAX_RADIUS: i64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntegrateError {
    #[error(transparent)]
    Fgl(#[from] FglError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("invalid moment graph: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<Violation>),
    #[error("no generic slope exists: weight {0} pairs to a non-unit multiple for every slope")]
    NoGenericSlope(Character),
    #[error("no generic slope with entries in 1..={radius}")]
    SearchExhausted { radius: i64 },
    #[error("slope {slope} is not generic for weight {weight}")]
    NotGeneric { slope: GenericSlope, weight: Character },
    #[error("vertices have different valences; integration needs a common valence")]
    UnequalValence,
    #[error("class has {got} restrictions but the graph has {expected} vertices")]
    VertexCountMismatch { expected: usize, got: usize },
    #[error("truncation {have} is too small: the constant term needs at least {need}")]
    Precision { have: u32, need: u32 },
    #[error("class coefficients cannot be moved to the rationals")]
    Rationalize,
}

/// A one-parameter subgroup `lambda` with every edge weight pairing to an
/// element whose `[n]`-series has unit leading coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenericSlope(pub Vec<i64>);

impl GenericSlope {
    pub fn pairing(&self, a: &Character) -> i64 {
        a.pairing(&self.0)
    }
}

impl fmt::Display for GenericSlope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Character(self.0.clone()))
    }
}

fn is_generic(fgl: &FormalGroupLaw, g: &GkmGraph, slope: &[i64]) -> bool {
    g.edges.iter().all(|e| fgl.n_series_order(e.weight.pairing(slope)).is_some())
}

/// Vectors of `{1..r}^m` with largest entry `r`, in lexicographic order.
fn shell(m: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut v = vec![1i64; m];
    loop {
        if v.contains(&r) {
            out.push(v.clone());
        }
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if v[i] < r {
                v[i] += 1;
                v[i + 1..].iter_mut().for_each(|x| *x = 1);
                break;
            }
        }
    }
}

/// All generic slopes in order of increasing box radius, lexicographic within a radius.
pub fn generic_slopes(g: &GkmGraph, theory: &Theory) -> Result<Vec<GenericSlope>, IntegrateError> {
    generic_slopes_up_to(g, theory, usize::MAX)
}

fn generic_slopes_up_to(g: &GkmGraph, theory: &Theory, limit: usize) -> Result<Vec<GenericSlope>, IntegrateError> {
    let violations = validate_graph(g);
    if !violations.is_empty() {
        return Err(IntegrateError::InvalidGraph(violations));
    }
    let fgl = theory.fgl()?;
    // a weight whose content already has no unit leading coefficient can never pair generically
    for e in &g.edges {
        if fgl.n_series_order(e.weight.gcd() as i64).is_none() {
            return Err(IntegrateError::NoGenericSlope(e.weight.clone()));
        }
    }
    let mut out = Vec::new();
    for r in 1..=MAX_RADIUS {
        for v in shell(g.rank, r) {
            if is_generic(fgl, g, &v) {
                out.push(GenericSlope(v));
                if out.len() >= limit {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

/// The first generic slope of the search order.
pub fn find_generic_slope(g: &GkmGraph, theory: &Theory) -> Result<GenericSlope, IntegrateError> {
    let mut found = generic_slopes_up_to(g, theory, 1)?;
    match found.pop() {
        Some(s) => Ok(s),
        None => Err(IntegrateError::SearchExhausted { radius: MAX_RADIUS }),
    }
}

/// The first `n` generic slopes of the search order.
pub fn first_generic_slopes(g: &GkmGraph, theory: &Theory, n: usize) -> Result<Vec<GenericSlope>, IntegrateError> {
    generic_slopes_up_to(g, theory, n)
}

/// Localized Euler classes `eu_i(s) = prod_w [<w, lambda>](s)` over the
/// tangent weights `w` at each vertex.
#[derive(Debug, Clone)]
pub struct EulerClassData {
    pub slope: GenericSlope,
    pub weights: Vec<Vec<Character>>,
    pub classes: Vec<TruncatedSeries>,
    /// `s`-adic order of each Euler class (the valence for slopes pairing to units).
    pub orders: Vec<u32>,
}

pub fn euler_classes(g: &GkmGraph, theory: &Theory, slope: &GenericSlope) -> Result<EulerClassData, IntegrateError> {
    let fgl = theory.fgl()?;
    let ring = theory.ring();
    let d = theory.truncation();
    let mut weights = Vec::new();
    let mut classes = Vec::new();
    let mut orders = Vec::new();
    for v in 0..g.vertex_count() {
        let tangent = g.tangent_weights(v);
        let mut eu = TruncatedSeries::one(ring, 1, d);
        let mut order = 0;
        for w in &tangent {
            let l = slope.pairing(w);
            let not_generic = || IntegrateError::NotGeneric { slope: slope.clone(), weight: w.clone() };
            order += fgl.n_series_order(l).ok_or_else(not_generic)?;
            eu = eu.mul(&fgl.n_series(l)?)?;
        }
        match eu.order() {
            Some(n) if n == order && eu.coeff(&[n]).is_unit() => {}
            _ if order > d => return Err(IntegrateError::Precision { have: d, need: order }),
            _ => {
                let w = tangent.first().cloned().unwrap_or_else(|| Character(vec![0; g.rank]));
                return Err(IntegrateError::NotGeneric { slope: slope.clone(), weight: w });
            }
        }
        weights.push(tangent);
        classes.push(eu);
        orders.push(order);
    }
    Ok(EulerClassData { slope: slope.clone(), weights, classes, orders })
}

/// `f_i(u_1, ..., u_m) -> f_i([lambda_1](s), ..., [lambda_m](s))` at every vertex.
pub fn localize_class(
    theory: &Theory,
    c: &EquivariantClass,
    slope: &GenericSlope,
) -> Result<Vec<TruncatedSeries>, IntegrateError> {
    let fgl = theory.fgl()?;
    let images = slope.0.iter().map(|&l| fgl.n_series(l)).collect::<Result<Vec<_>, _>>()?;
    Ok(c.restrictions.iter().map(|f| f.substitute(&images)).collect::<Result<_, _>>()?)
}

/// Truncation needed to read off the constant term of the localization sum
/// for classes of cohomological degree `q` along `slope`.
pub fn integration_truncation(
    g: &GkmGraph,
    theory: &Theory,
    slope: &GenericSlope,
    q: i64,
) -> Result<u32, IntegrateError> {
    let fgl = theory.fgl()?;
    let mut max_order = 0i64;
    for v in 0..g.vertex_count() {
        let mut order = 0i64;
        for w in g.tangent_weights(v) {
            let not_generic = || IntegrateError::NotGeneric { slope: slope.clone(), weight: w.clone() };
            order += i64::from(fgl.n_series_order(slope.pairing(&w)).ok_or_else(not_generic)?);
        }
        max_order = max_order.max(order);
    }
    let half = (q / 2).max(0);
    Ok((half + max_order + 2).max(2 * max_order - half).max(1) as u32)
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub slope: GenericSlope,
    pub euler: EulerClassData,
    /// `f_i / eu_i` per vertex.
    pub terms: Vec<LaurentSeries>,
    pub sum: LaurentSeries,
    /// Whether every coefficient of a negative power of `s` vanishes within precision.
    pub polar_part_vanishes: bool,
    /// The constant coefficient, reported when the class has degree twice the valence.
    pub integral: Option<Scalar>,
    /// Whether integer coefficients were extended to the rationals.
    pub rationalized: bool,
    pub theory: Theory,
}

impl Integration {
    /// For rationalized computations, whether the integral is an integer.
    pub fn integral_is_integer(&self) -> Option<bool> {
        let value = self.integral.as_ref()?;
        Some(value.coeff.to_rational().is_none_or(|q| q.is_integer()))
    }
}

/// `sum_i f_i(s) / eu_i(s)` for a class on a graph with a common valence.
pub fn integrate(
    g: &GkmGraph,
    theory: &Theory,
    c: &EquivariantClass,
    slope: &GenericSlope,
) -> Result<Integration, IntegrateError> {
    let violations = validate_graph(g);
    if !violations.is_empty() {
        return Err(IntegrateError::InvalidGraph(violations));
    }
    if c.vertex_count() != g.vertex_count() {
        return Err(IntegrateError::VertexCountMismatch { expected: g.vertex_count(), got: c.vertex_count() });
    }
    let valence = g.valence(0);
    if (0..g.vertex_count()).any(|v| g.valence(v) != valence) {
        return Err(IntegrateError::UnequalValence);
    }
    let working = theory.rationalized();
    let rationalized = working.is_rationalized();
    let class = if rationalized {
        let ring = working.ring();
        let r = c
            .restrictions
            .iter()
            .map(|f| f.convert(ring).ok_or(IntegrateError::Rationalize))
            .collect::<Result<Vec<_>, _>>()?;
        EquivariantClass { restrictions: r, degree: c.degree }
    } else {
        c.clone()
    };
    let euler = euler_classes(g, &working, slope)?;
    let localized = localize_class(&working, &class, slope)?;
    let mut terms = Vec::with_capacity(localized.len());
    for (f, eu) in localized.iter().zip(&euler.classes) {
        terms.push(laurent_divide(&LaurentSeries::from_series(f), &LaurentSeries::from_series(eu))?);
    }
    let mut sum = terms[0].clone();
    for t in &terms[1..] {
        sum = sum.add(t)?;
    }
    if sum.known_through() < 0 {
        let need = integration_truncation(g, &working, slope, c.degree.unwrap_or(0))?;
        return Err(IntegrateError::Precision { have: theory.truncation(), need });
    }
    let polar_part_vanishes = sum.valuation().is_none_or(|v| v >= 0);
    let integral = (c.degree == Some(2 * valence as i64)).then(|| sum.coeff(0));
    Ok(Integration {
        slope: slope.clone(),
        euler,
        terms,
        sum,
        polar_part_vanishes,
        integral,
        rationalized,
        theory: working,
    })
}
