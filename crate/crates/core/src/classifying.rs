//! Classifying-space rings: character classes in `E*(BT)`, presentations of
//! `E*(BZ/l)` and of finite subgroups, and the kernel ideal of restriction to
//! the kernel of a character.

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::fgl::{FglError, FormalGroupLaw};
use crate::lattice::{adapted_basis, primitive_part, smith_normal_form, Character, IntMatrix, LatticeError};
use crate::scalar::{Scalar, Theory};
use crate::series::{SeriesError, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyingError {
    #[error(transparent)]
    Fgl(#[from] FglError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("the cyclic group order must be positive, got {0}")]
    InvalidOrder(i64),
    #[error("series has {got} variables but the torus has rank {expected}")]
    RankMismatch { expected: usize, got: usize },
}

/// `chi_a = [a_1](u_1) +_F ... +_F [a_m](u_m)` in `m = a.rank()` variables.
pub fn character_class(fgl: &FormalGroupLaw, a: &Character) -> Result<TruncatedSeries, ClassifyingError> {
    let m = a.rank();
    let (ring, d) = (fgl.ring(), fgl.truncation());
    let mut acc = TruncatedSeries::zero(ring, m, d);
    for (i, &ai) in a.0.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let ui = TruncatedSeries::variable(ring, m, d, i);
        let term = fgl.n_series(ai)?.substitute(&[ui])?;
        acc = if acc.is_zero() { term } else { fgl.formal_sum(&acc, &term)? };
    }
    Ok(acc)
}

/// A change of torus coordinates by a unimodular `W`: a character `a` becomes
/// `a * W`, and a series `f(u)` becomes `f(chi_{W_1}, ..., chi_{W_m})` where
/// `W_i` is the `i`-th row of `W`.
#[derive(Debug, Clone)]
pub struct CoordinateChange {
    matrix: IntMatrix,
    images: Vec<TruncatedSeries>,
}

impl CoordinateChange {
    pub fn new(fgl: &FormalGroupLaw, w: &IntMatrix) -> Result<CoordinateChange, ClassifyingError> {
        if !w.is_unimodular() {
            return Err(LatticeError::DimensionMismatch(w.rows(), w.cols()).into());
        }
        let rows = w.to_i64_rows()?;
        let images = rows.into_iter().map(|r| character_class(fgl, &Character(r))).collect::<Result<Vec<_>, _>>()?;
        Ok(CoordinateChange { matrix: w.clone(), images })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// Images of the old coordinate classes `u_1, ..., u_m`.
    pub fn images(&self) -> &[TruncatedSeries] {
        &self.images
    }

    pub fn character(&self, a: &Character) -> Result<Character, ClassifyingError> {
        Ok(a.transform(&self.matrix)?)
    }

    pub fn apply(&self, f: &TruncatedSeries) -> Result<TruncatedSeries, ClassifyingError> {
        if f.vars() != self.images.len() {
            return Err(ClassifyingError::RankMismatch { expected: self.images.len(), got: f.vars() });
        }
        Ok(f.substitute(&self.images)?)
    }
}

/// `E*(BZ/l) = E_*[[u]] / ([l](u))`.
#[derive(Debug, Clone)]
pub struct CyclicRingPresentation {
    pub theory: Theory,
    pub order: u64,
    /// The relation `[l](u)`.
    pub relation: TruncatedSeries,
    /// `u`-adic order of the relation, when it is nonzero within the truncation.
    pub relation_order: Option<u32>,
    /// The relation's leading term rescaled to a monic monomial `t^k u^N`,
    /// when its leading coefficient is a unit.
    pub normal_form: Option<TruncatedSeries>,
    /// Rank over `E_*`, defined when the coefficients form a graded field.
    pub rank: Option<u64>,
}

impl CyclicRingPresentation {
    /// `u^0, ..., u^{rank-1}`.
    pub fn basis(&self) -> Vec<TruncatedSeries> {
        let ring = self.theory.ring();
        let d = self.relation.truncation();
        (0..self.rank.unwrap_or(0) as u32).map(|k| TruncatedSeries::monomial(ring, 1, d, &[k], ring.one())).collect()
    }

    /// Number of free generators of `u`-degree `t` for `t = 0..=max`; `None`
    /// when the relation gives no finite rank.
    pub fn graded_ranks(&self, max: u32) -> Option<Vec<u64>> {
        let n = self.rank?;
        Some((0..=max).map(|t| u64::from((t as u64) < n)).collect())
    }
}

pub fn cyclic_classifying_ring(theory: &Theory, order: i64) -> Result<CyclicRingPresentation, ClassifyingError> {
    if order < 1 {
        return Err(ClassifyingError::InvalidOrder(order));
    }
    let fgl = theory.fgl()?;
    let relation = fgl.n_series(order)?;
    let (relation_order, normal_form) = leading_monomial(&relation);
    let rank = match (theory.is_graded_field(), &normal_form) {
        (true, Some(_)) => relation_order.map(u64::from),
        _ => None,
    };
    Ok(CyclicRingPresentation {
        theory: theory.clone(),
        order: order as u64,
        relation,
        relation_order,
        normal_form,
        rank,
    })
}

/// Order and unit-rescaled leading monomial of a one-variable series.
fn leading_monomial(f: &TruncatedSeries) -> (Option<u32>, Option<TruncatedSeries>) {
    let Some(n) = f.order() else { return (None, None) };
    let lead = f.coeff(&[n]);
    let normal = lead.is_unit().then(|| {
        let ring = f.ring();
        TruncatedSeries::monomial(ring, 1, f.truncation(), &[n], ring.period_power(lead.power))
    });
    (Some(n), normal)
}

/// Graded ranks of a tensor product, by convolution.
pub fn tensor_ranks(a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().min(b.len());
    (0..n).map(|t| (0..=t).map(|i| a[i] * b[t - i]).sum()).collect()
}

/// `E*(BK)` for `K` the common kernel of a list of characters, presented via
/// Smith normal form as `E_*[[u']] / ([d_1](u'_1), ..., [d_m](u'_m))`.
#[derive(Debug, Clone)]
pub struct SubgroupRing {
    /// Invariant factors, padded with zeros to the torus rank (zero means a circle factor).
    pub invariant_factors: Vec<u64>,
    /// `u`-adic order of each relation `[d_i](u)`; `None` for no relation.
    pub relation_orders: Vec<Option<u32>>,
}

impl SubgroupRing {
    pub fn new(fgl: &FormalGroupLaw, relations: &[Character]) -> Result<SubgroupRing, ClassifyingError> {
        let m = relations.first().map_or(0, Character::rank);
        let rows: Vec<Vec<i64>> = relations.iter().map(|c| c.0.clone()).collect();
        let snf = smith_normal_form(&IntMatrix::from_rows(&rows));
        let mut factors: Vec<u64> = snf.diagonal().iter().map(|d| d.to_u64().unwrap_or(0)).collect();
        factors.resize(m, 0);
        let mut orders = Vec::with_capacity(m);
        for &d in &factors {
            if d == 0 {
                orders.push(None);
                continue;
            }
            let s = fgl.n_series(d as i64)?;
            let (n, normal) = leading_monomial(&s);
            orders.push(if normal.is_some() { n } else { None });
        }
        Ok(SubgroupRing { invariant_factors: factors, relation_orders: orders })
    }

    /// Number of standard monomials `u'^a` (with `a_i` below each relation
    /// order) in each `u`-degree `0..=max`.
    pub fn graded_ranks(&self, max: u32) -> Vec<u64> {
        let mut ranks = vec![1u64];
        ranks.resize(max as usize + 1, 0);
        for order in &self.relation_orders {
            let factor: Vec<u64> = (0..=max).map(|t| u64::from(order.is_none_or(|n| t < n))).collect();
            ranks = tensor_ranks(&ranks, &factor);
        }
        ranks
    }
}

/// The kernel of `E*(BT) -> E*(B ker(Theta))`, modeled as the principal ideal
/// generated by `[d](chi_theta)` where `Theta = d * theta`.
#[derive(Debug, Clone)]
pub struct RestrictionIdeal {
    pub character: Character,
    pub multiplicity: u64,
    pub primitive: Character,
    change: CoordinateChange,
    /// `[d](u'_m)` in adapted coordinates.
    pub generator: TruncatedSeries,
    /// `u'_m`-adic order of the generator; `None` when the generator vanishes.
    pub order: Option<u32>,
    /// Coefficient of `u'_m^order` in the generator.
    pub lead: Option<Scalar>,
}

pub fn kernel_ideal(fgl: &FormalGroupLaw, theta: &Character) -> Result<RestrictionIdeal, ClassifyingError> {
    let (d, primitive) = primitive_part(theta)?;
    let basis = adapted_basis(&primitive)?;
    let change = CoordinateChange::new(fgl, &basis)?;
    let m = theta.rank();
    let (ring, trunc) = (fgl.ring(), fgl.truncation());
    let last = TruncatedSeries::variable(ring, m, trunc, m - 1);
    let generator = fgl.n_series(d as i64)?.substitute(&[last])?;
    let order = generator.order();
    let lead = order.map(|n| {
        let mut e = vec![0u32; m];
        e[m - 1] = n;
        generator.coeff(&e)
    });
    Ok(RestrictionIdeal { character: theta.clone(), multiplicity: d, primitive, change, generator, order, lead })
}

impl RestrictionIdeal {
    pub fn basis(&self) -> &IntMatrix {
        self.change.matrix()
    }

    pub fn coordinate_change(&self) -> &CoordinateChange {
        &self.change
    }

    /// Transport a series into the adapted coordinates of this ideal.
    pub fn transport(&self, f: &TruncatedSeries) -> Result<TruncatedSeries, ClassifyingError> {
        self.change.apply(f)
    }

    /// Whether membership reduces to dropping all terms divisible by `u'_m^order`.
    pub fn has_unit_lead(&self) -> bool {
        self.lead.as_ref().is_some_and(Scalar::is_unit)
    }
}

/// Canonical residue of `f` modulo the ideal, in adapted coordinates.  Terms
/// divisible by `u'_m^order` are cleared lowest degree first by Euclidean
/// division against the generator, so over a field they vanish entirely and
/// over the integers the surviving coefficients lie in `[0, |lead|)`.
pub fn ideal_residue(f: &TruncatedSeries, ideal: &RestrictionIdeal) -> Result<TruncatedSeries, ClassifyingError> {
    let mut h = ideal.transport(f)?;
    let (Some(nu), Some(lead)) = (ideal.order, ideal.lead.clone()) else {
        return Ok(h);
    };
    let m = h.vars();
    let index = crate::series::monomial_index(m, h.truncation());
    if lead.is_unit() {
        for i in 0..index.len() {
            if u32::from(index.exponent(i)[m - 1]) >= nu {
                let e: Vec<u32> = index.exponent(i).iter().map(|&x| x as u32).collect();
                h.set_coeff(&e, h.ring().zero());
            }
        }
        return Ok(h);
    }
    for i in 0..index.len() {
        let e: Vec<u32> = index.exponent(i).iter().map(|&x| x as u32).collect();
        if e[m - 1] < nu {
            continue;
        }
        let c = h.coeff_at(i).clone();
        if c.is_zero() {
            continue;
        }
        let (q, _) = c.coeff.div_rem(&lead.coeff);
        if q.is_zero() {
            continue;
        }
        let quotient = h.ring().scalar(q, c.power - lead.power);
        let mut shift = e.clone();
        shift[m - 1] -= nu;
        let step = ideal.generator.shift(&shift, &quotient);
        h = h.sub(&step)?;
    }
    Ok(h)
}

pub fn in_ideal(f: &TruncatedSeries, ideal: &RestrictionIdeal) -> Result<bool, ClassifyingError> {
    Ok(ideal_residue(f, ideal)?.is_zero())
}
