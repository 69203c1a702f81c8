//! Moment graphs and their equivariant cohomology, computed as the subring of
//! tuples of fixed-point restrictions satisfying the edge congruences.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::classifying::{ideal_residue, kernel_ideal, ClassifyingError, CoordinateChange, RestrictionIdeal};
use crate::fgl::FglError;
use crate::lattice::{hermite_basis, integer_kernel, pivot_of, smith_normal_form, Character, IntMatrix, LatticeError};
use crate::linalg::{field_kernel, rref};
use crate::scalar::{Coeff, Scalar, Theory};
use crate::series::{default_names, monomial_index, Homogeneity, SeriesError, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GkmError {
    #[error(transparent)]
    Classifying(#[from] ClassifyingError),
    #[error(transparent)]
    Fgl(#[from] FglError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("invalid moment graph: {}", join_violations(.0))]
    InvalidGraph(Vec<Violation>),
    #[error("truncation {have} is too small for degree {degree}: need at least {need}")]
    InsufficientTruncation { have: u32, need: u32, degree: i64 },
    #[error("class has {got} restrictions but the graph has {expected} vertices")]
    VertexCountMismatch { expected: usize, got: usize },
    #[error("restrictions live in {got} variables but the torus has rank {expected}")]
    RankMismatch { expected: usize, got: usize },
    #[error("degree bound {0} must be non-negative")]
    NegativeDegree(i64),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: Character,
}

impl Edge {
    pub fn new(tail: usize, head: usize, weight: &[i64]) -> Edge {
        Edge { tail, head, weight: Character(weight.to_vec()) }
    }
}

/// Fixed points and invariant spheres of a torus action, with the character
/// by which the torus rotates each sphere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GkmGraph {
    pub rank: usize,
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
}

impl GkmGraph {
    pub fn new(rank: usize, vertices: Vec<String>, edges: Vec<Edge>) -> GkmGraph {
        GkmGraph { rank, vertices, edges }
    }

    /// `CP^1` with the circle acting by weight `w`.
    pub fn projective_line(w: i64) -> GkmGraph {
        GkmGraph::new(1, vec!["a".into(), "b".into()], vec![Edge::new(0, 1, &[w])])
    }

    /// `CP^2` with its standard two-torus action.
    pub fn projective_plane() -> GkmGraph {
        GkmGraph::new(
            2,
            vec!["A".into(), "B".into(), "C".into()],
            vec![Edge::new(0, 1, &[1, 0]), Edge::new(0, 2, &[0, 1]), Edge::new(1, 2, &[-1, 1])],
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Tangent weights at a vertex: `Theta` at the tail of an edge, `-Theta` at its head.
    pub fn tangent_weights(&self, v: usize) -> Vec<Character> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.tail == v {
                out.push(e.weight.clone());
            }
            if e.head == v {
                out.push(e.weight.neg());
            }
        }
        out
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.tail == v || e.head == v).count()
    }

    /// The same action in torus coordinates changed by a unimodular `W`.
    pub fn transformed(&self, w: &IntMatrix) -> Result<GkmGraph, LatticeError> {
        let edges = self
            .edges
            .iter()
            .map(|e| Ok(Edge { tail: e.tail, head: e.head, weight: e.weight.transform(w)? }))
            .collect::<Result<Vec<_>, LatticeError>>()?;
        Ok(GkmGraph { rank: self.rank, vertices: self.vertices.clone(), edges })
    }

    /// Relabel vertices: vertex `i` becomes vertex `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> GkmGraph {
        let mut vertices = self.vertices.clone();
        for (i, name) in self.vertices.iter().enumerate() {
            vertices[perm[i]] = name.clone();
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { tail: perm[e.tail], head: perm[e.head], weight: e.weight.clone() })
            .collect();
        GkmGraph { rank: self.rank, vertices, edges }
    }

    /// Moment graph of the product action of the product torus.
    pub fn product(&self, other: &GkmGraph) -> GkmGraph {
        let (m1, m2) = (self.rank, other.rank);
        let n2 = other.vertex_count();
        let id = |a: usize, b: usize| a * n2 + b;
        let mut vertices = Vec::new();
        for a in &self.vertices {
            for b in &other.vertices {
                vertices.push(format!("{a}{b}"));
            }
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            for b in 0..n2 {
                let mut w = e.weight.0.clone();
                w.resize(m1 + m2, 0);
                edges.push(Edge { tail: id(e.tail, b), head: id(e.head, b), weight: Character(w) });
            }
        }
        for a in 0..self.vertex_count() {
            for e in &other.edges {
                let mut w = vec![0; m1];
                w.extend(&e.weight.0);
                edges.push(Edge { tail: id(a, e.tail), head: id(a, e.head), weight: Character(w) });
            }
        }
        GkmGraph { rank: m1 + m2, vertices, edges }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    ZeroWeight { edge: usize },
    WeightLength { edge: usize, expected: usize, got: usize },
    UnknownVertex { edge: usize, vertex: usize },
    SelfLoop { edge: usize },
    DependentWeights { vertex: String, first: usize, second: usize },
    Disconnected { vertex: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // edges are numbered from 1 in messages, in file order
        match self {
            Violation::Empty => write!(f, "graph has no vertices"),
            Violation::ZeroWeight { edge } => write!(f, "edge {}: zero weight", edge + 1),
            Violation::WeightLength { edge, expected, got } => {
                write!(f, "edge {}: weight has length {got}, expected {expected}", edge + 1)
            }
            Violation::UnknownVertex { edge, vertex } => {
                write!(f, "edge {}: vertex index {vertex} out of range", edge + 1)
            }
            Violation::SelfLoop { edge } => write!(f, "edge {}: tail and head coincide", edge + 1),
            Violation::DependentWeights { vertex, first, second } => {
                write!(f, "vertex {vertex}: dependent weights on edges {} and {}", first + 1, second + 1)
            }
            Violation::Disconnected { vertex } => write!(f, "vertex {vertex}: not connected to the first vertex"),
        }
    }
}

/// Every violated moment-graph condition; empty for a valid graph.
pub fn validate_graph(g: &GkmGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let k = g.vertex_count();
    if k == 0 {
        out.push(Violation::Empty);
        return out;
    }
    let mut usable = vec![true; g.edges.len()];
    for (i, e) in g.edges.iter().enumerate() {
        if e.weight.rank() != g.rank {
            out.push(Violation::WeightLength { edge: i, expected: g.rank, got: e.weight.rank() });
            usable[i] = false;
        } else if e.weight.is_zero() {
            out.push(Violation::ZeroWeight { edge: i });
            usable[i] = false;
        }
        for v in [e.tail, e.head] {
            if v >= k {
                out.push(Violation::UnknownVertex { edge: i, vertex: v });
                usable[i] = false;
            }
        }
        if e.tail == e.head {
            out.push(Violation::SelfLoop { edge: i });
            usable[i] = false;
        }
    }
    for v in 0..k {
        let incident: Vec<usize> =
            (0..g.edges.len()).filter(|&i| usable[i] && (g.edges[i].tail == v || g.edges[i].head == v)).collect();
        for (a, &i) in incident.iter().enumerate() {
            for &j in &incident[a + 1..] {
                if g.edges[i].weight.is_proportional(&g.edges[j].weight) {
                    out.push(Violation::DependentWeights { vertex: g.vertices[v].clone(), first: i, second: j });
                }
            }
        }
    }
    let mut seen = vec![false; k];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for (i, e) in g.edges.iter().enumerate() {
            if !usable[i] {
                continue;
            }
            let next = if e.tail == v {
                e.head
            } else if e.head == v {
                e.tail
            } else {
                continue;
            };
            if !seen[next] {
                seen[next] = true;
                queue.push_back(next);
            }
        }
    }
    for (name, _) in g.vertices.iter().zip(&seen).filter(|(_, &s)| !s) {
        out.push(Violation::Disconnected { vertex: name.clone() });
    }
    out
}

/// Pairs of weights at a vertex that become dependent after reduction mod `p`.
/// These are reported but do not invalidate the graph.
pub fn mod_p_warnings(g: &GkmGraph, p: u64) -> Vec<String> {
    let mut out = Vec::new();
    for v in 0..g.vertex_count() {
        let incident: Vec<usize> = (0..g.edges.len())
            .filter(|&i| g.edges[i].tail == v || g.edges[i].head == v)
            .filter(|&i| g.edges[i].weight.rank() == g.rank)
            .collect();
        for (a, &i) in incident.iter().enumerate() {
            for &j in &incident[a + 1..] {
                if g.edges[i].weight.is_proportional_mod(&g.edges[j].weight, p) {
                    out.push(format!(
                        "vertex {}: weights on edges {} and {} are dependent mod {p}",
                        g.vertices[v],
                        i + 1,
                        j + 1
                    ));
                }
            }
        }
    }
    out
}

/// A tuple of fixed-point restrictions `(f_1, ..., f_k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivariantClass {
    pub restrictions: Vec<TruncatedSeries>,
    pub degree: Option<i64>,
}

impl EquivariantClass {
    /// Tags the tuple with its degree when every restriction is homogeneous of the same degree.
    pub fn new(restrictions: Vec<TruncatedSeries>) -> EquivariantClass {
        let mut degree = None;
        let mut mixed = false;
        for f in &restrictions {
            match f.homogeneity() {
                Homogeneity::Zero => {}
                Homogeneity::Homogeneous(q) if degree.is_none() || degree == Some(q) => degree = Some(q),
                _ => mixed = true,
            }
        }
        EquivariantClass { restrictions, degree: if mixed { None } else { degree.or(Some(0)) } }
    }

    pub fn with_degree(restrictions: Vec<TruncatedSeries>, degree: i64) -> EquivariantClass {
        EquivariantClass { restrictions, degree: Some(degree) }
    }

    /// The pullback of a scalar from a point: the same constant at every vertex.
    pub fn constant(g: &GkmGraph, theory: &Theory, c: Scalar) -> EquivariantClass {
        let f = TruncatedSeries::constant(theory.ring(), g.rank, theory.truncation(), c);
        EquivariantClass::new(vec![f; g.vertex_count()])
    }

    pub fn vertex_count(&self) -> usize {
        self.restrictions.len()
    }

    pub fn is_zero(&self) -> bool {
        self.restrictions.iter().all(TruncatedSeries::is_zero)
    }

    pub fn add(&self, other: &EquivariantClass) -> Result<EquivariantClass, GkmError> {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &EquivariantClass) -> Result<EquivariantClass, GkmError> {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &EquivariantClass) -> Result<EquivariantClass, GkmError> {
        self.zip(other, |a, b| a.mul(b))
    }

    pub fn scale(&self, s: &Scalar) -> EquivariantClass {
        EquivariantClass::new(self.restrictions.iter().map(|f| f.scale(s)).collect())
    }

    fn zip(
        &self,
        other: &EquivariantClass,
        op: impl Fn(&TruncatedSeries, &TruncatedSeries) -> Result<TruncatedSeries, SeriesError>,
    ) -> Result<EquivariantClass, GkmError> {
        if self.vertex_count() != other.vertex_count() {
            return Err(GkmError::VertexCountMismatch { expected: self.vertex_count(), got: other.vertex_count() });
        }
        let r = self.restrictions.iter().zip(&other.restrictions).map(|(a, b)| op(a, b)).collect::<Result<_, _>>()?;
        Ok(EquivariantClass::new(r))
    }

    /// The class in torus coordinates changed by `change`.
    pub fn transported(&self, change: &CoordinateChange) -> Result<EquivariantClass, GkmError> {
        let r = self.restrictions.iter().map(|f| change.apply(f)).collect::<Result<_, _>>()?;
        Ok(EquivariantClass { restrictions: r, degree: self.degree })
    }

    /// Move restrictions along a vertex relabeling (vertex `i` becomes `perm[i]`).
    pub fn relabeled(&self, perm: &[usize]) -> EquivariantClass {
        let mut r = self.restrictions.clone();
        for (i, f) in self.restrictions.iter().enumerate() {
            r[perm[i]] = f.clone();
        }
        EquivariantClass { restrictions: r, degree: self.degree }
    }

    pub fn format(&self) -> String {
        let m = self.restrictions.first().map_or(0, TruncatedSeries::vars);
        let names = default_names(m);
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let parts: Vec<String> = self.restrictions.iter().map(|f| f.format(&names)).collect();
        format!("({})", parts.join(", "))
    }
}

/// Edge congruences of a graph for a fixed theory, with the kernel ideals precomputed.
#[derive(Debug, Clone)]
pub struct CongruenceSystem {
    graph: GkmGraph,
    theory: Theory,
    ideals: Vec<RestrictionIdeal>,
}

impl CongruenceSystem {
    pub fn new(g: &GkmGraph, theory: &Theory) -> Result<CongruenceSystem, GkmError> {
        let violations = validate_graph(g);
        if !violations.is_empty() {
            return Err(GkmError::InvalidGraph(violations));
        }
        let fgl = theory.fgl()?;
        let ideals = g.edges.iter().map(|e| kernel_ideal(fgl, &e.weight)).collect::<Result<_, _>>()?;
        Ok(CongruenceSystem { graph: g.clone(), theory: theory.clone(), ideals })
    }

    pub fn ideals(&self) -> &[RestrictionIdeal] {
        &self.ideals
    }

    fn check_shape(&self, c: &EquivariantClass) -> Result<(), GkmError> {
        if c.vertex_count() != self.graph.vertex_count() {
            return Err(GkmError::VertexCountMismatch { expected: self.graph.vertex_count(), got: c.vertex_count() });
        }
        for f in &c.restrictions {
            if f.vars() != self.graph.rank {
                return Err(GkmError::RankMismatch { expected: self.graph.rank, got: f.vars() });
            }
        }
        Ok(())
    }

    /// Residue of `f_tail - f_head` modulo each edge ideal.
    pub fn edge_residues(&self, c: &EquivariantClass) -> Result<Vec<TruncatedSeries>, GkmError> {
        self.check_shape(c)?;
        let d = self.theory.truncation();
        self.graph
            .edges
            .iter()
            .zip(&self.ideals)
            .map(|(e, ideal)| {
                let diff = c.restrictions[e.tail].sub(&c.restrictions[e.head])?.retruncate(d);
                Ok(ideal_residue(&diff, ideal)?)
            })
            .collect()
    }

    pub fn satisfies(&self, c: &EquivariantClass) -> Result<bool, GkmError> {
        Ok(self.edge_residues(c)?.iter().all(TruncatedSeries::is_zero))
    }
}

pub fn satisfies_congruences(g: &GkmGraph, theory: &Theory, c: &EquivariantClass) -> Result<bool, GkmError> {
    CongruenceSystem::new(g, theory)?.satisfies(c)
}

/// How the linear systems were solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePath {
    /// Gaussian elimination over a field.
    Field,
    /// Integer kernels, Hermite and Smith normal forms.
    Integer,
}

#[derive(Debug, Clone)]
pub struct DegreeSolution {
    pub degree: i64,
    /// Rank over `E_*` of the leading forms of `u`-order `degree / 2`.
    pub rank: usize,
    /// Echelon basis of all solutions of this degree with non-negative powers of the periodicity element.
    pub basis: Vec<EquivariantClass>,
    /// Elementary divisors of the solution lattice (integer path only).
    pub divisors: Vec<BigInt>,
    pub unknowns: usize,
    pub equations: usize,
}

#[derive(Debug, Clone)]
pub struct SolutionModule {
    pub theory: Theory,
    pub truncation: u32,
    pub path: SolvePath,
    pub degrees: Vec<DegreeSolution>,
}

impl SolutionModule {
    pub fn rank(&self, q: i64) -> Option<usize> {
        self.degrees.iter().find(|d| d.degree == q).map(|d| d.rank)
    }

    pub fn ranks(&self) -> Vec<(i64, usize)> {
        self.degrees.iter().map(|d| (d.degree, d.rank)).collect()
    }

    pub fn basis(&self, q: i64) -> &[EquivariantClass] {
        self.degrees.iter().find(|d| d.degree == q).map_or(&[], |d| &d.basis)
    }

    /// Line-oriented report: `q rank basis-count` per degree, then the bases.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for d in &self.degrees {
            out.push_str(&format!("{} {} {}\n", d.degree, d.rank, d.basis.len()));
        }
        for d in &self.degrees {
            out.push_str(&format!("basis {}\n", d.degree));
            if self.path == SolvePath::Integer {
                let divs: Vec<String> = d.divisors.iter().map(ToString::to_string).collect();
                out.push_str(&format!("  divisors {}\n", divs.join(" ")));
            }
            for b in &d.basis {
                out.push_str(&format!("  {}\n", b.format()));
            }
        }
        out
    }
}

/// Smallest truncation for which the solver's residue computations are exact
/// through degree `q_max`: `q_max / 2` plus the largest `u`-adic order of an
/// edge ideal generator.
pub fn required_truncation(g: &GkmGraph, theory: &Theory, q_max: i64) -> Result<u32, GkmError> {
    if q_max < 0 {
        return Err(GkmError::NegativeDegree(q_max));
    }
    let fgl = theory.fgl()?;
    let mut margin = 0;
    for e in &g.edges {
        let d = e.weight.gcd();
        if d > 0 {
            margin = margin.max(fgl.n_series_order(d as i64).unwrap_or(0));
        }
    }
    Ok((q_max / 2) as u32 + margin.max(1))
}

struct SolverContext<'a> {
    graph: &'a GkmGraph,
    theory: &'a Theory,
    ideals: Vec<RestrictionIdeal>,
    /// Per edge, the transported monomial `u^a` for every exponent within the truncation.
    images: Vec<Vec<TruncatedSeries>>,
}

/// A coefficient unknown: vertex, power of the periodicity element, monomial index.
#[derive(Clone, Copy)]
struct Unknown {
    vertex: usize,
    power: i32,
    monomial: usize,
}

pub fn solve_equivariant_cohomology(g: &GkmGraph, theory: &Theory, q_max: i64) -> Result<SolutionModule, GkmError> {
    let system = CongruenceSystem::new(g, theory)?;
    let need = required_truncation(g, theory, q_max)?;
    if theory.truncation() < need {
        return Err(GkmError::InsufficientTruncation { have: theory.truncation(), need, degree: q_max });
    }
    let (m, d) = (g.rank, theory.truncation());
    let index = monomial_index(m, d);
    let images = system
        .ideals
        .iter()
        .map(|ideal| {
            let vars = ideal.coordinate_change().images();
            let mut table: Vec<TruncatedSeries> = Vec::with_capacity(index.len());
            for i in 0..index.len() {
                let e = index.exponent(i);
                let Some(j) = e.iter().position(|&x| x > 0) else {
                    table.push(TruncatedSeries::one(theory.ring(), m, d));
                    continue;
                };
                let mut lower: Vec<u32> = e.iter().map(|&x| x as u32).collect();
                lower[j] -= 1;
                let prev = index.index_of(&lower).expect("lower monomial is indexed");
                table.push(table[prev].mul(&vars[j])?);
            }
            Ok(table)
        })
        .collect::<Result<Vec<_>, SeriesError>>()?;
    let ctx = SolverContext { graph: g, theory, ideals: system.ideals, images };
    let path = if theory.ring().base.is_field() { SolvePath::Field } else { SolvePath::Integer };
    let degrees: Vec<i64> = (0..=q_max).step_by(2).collect();
    let solved = degrees.par_iter().map(|&q| solve_degree(&ctx, q, path)).collect::<Result<Vec<_>, _>>()?;
    Ok(SolutionModule { theory: theory.clone(), truncation: d, path, degrees: solved })
}

fn solve_degree(ctx: &SolverContext<'_>, q: i64, path: SolvePath) -> Result<DegreeSolution, GkmError> {
    let theory = ctx.theory;
    let ring = theory.ring();
    let base = ring.base;
    let period = -ring.period.degree();
    let (m, d) = (ctx.graph.rank, theory.truncation());
    let k = ctx.graph.vertex_count();
    let index = monomial_index(m, d);

    // unknowns grouped by power of the periodicity element, leading block first
    let mut unknowns = Vec::new();
    let mut leading = 0;
    for power in 0.. {
        let order = (q + power as i64 * period) / 2;
        if order > d as i64 {
            break;
        }
        for vertex in 0..k {
            for monomial in index.degree_range(order as u32) {
                unknowns.push(Unknown { vertex, power, monomial });
            }
        }
        if power == 0 {
            leading = unknowns.len();
        }
        if period == 0 {
            break;
        }
    }
    let nx = unknowns.len();

    // equation blocks, one per edge; quotient unknowns appended per edge where needed
    let mut rows: Vec<Vec<Coeff>> = Vec::new();
    let mut extra_cols = 0usize;
    let mut blocks = Vec::new();
    for (e, ideal) in ctx.graph.edges.iter().zip(&ctx.ideals) {
        let nu = ideal.order;
        let residue_only = nu.is_none() || ideal.has_unit_lead();
        let row_monomials: Vec<usize> = (0..index.len())
            .filter(|&i| !residue_only || nu.is_none_or(|n| u32::from(index.exponent(i)[m - 1]) < n))
            .collect();
        let quotients: Vec<Vec<u32>> =
            if residue_only { Vec::new() } else { quotient_monomials(q, period, m, d - nu.unwrap()) };
        blocks.push((e, ideal, row_monomials, quotients, extra_cols));
        extra_cols += blocks.last().unwrap().3.len();
    }
    let ncols = nx + extra_cols;
    for (edge_no, (e, ideal, row_monomials, quotients, offset)) in blocks.iter().enumerate() {
        let table = &ctx.images[edge_no];
        let mut block = vec![vec![base.zero(); ncols]; row_monomials.len()];
        for (col, u) in unknowns.iter().enumerate() {
            let sign = if u.vertex == e.tail {
                base.one()
            } else if u.vertex == e.head {
                base.one().neg()
            } else {
                continue;
            };
            let image = &table[u.monomial];
            for (r, &gamma) in row_monomials.iter().enumerate() {
                let c = image.coeff_at(gamma);
                if !c.is_zero() {
                    block[r][col] = c.coeff.mul(&sign);
                }
            }
        }
        for (j, beta) in quotients.iter().enumerate() {
            let product = ideal.generator.shift(beta, &ring.one());
            for (r, &gamma) in row_monomials.iter().enumerate() {
                let c = product.coeff_at(gamma);
                if !c.is_zero() {
                    block[r][nx + offset + j] = c.coeff.neg();
                }
            }
        }
        rows.extend(block.into_iter().filter(|r| r.iter().any(|c| !c.is_zero())));
    }
    let equations = rows.len();

    let to_class = |vector: &[Coeff]| {
        let mut restrictions = vec![TruncatedSeries::zero(ring, m, d); k];
        for (c, u) in vector.iter().zip(&unknowns) {
            if !c.is_zero() {
                let e: Vec<u32> = index.exponent(u.monomial).iter().map(|&x| x as u32).collect();
                restrictions[u.vertex].set_coeff(&e, ring.scalar(c.clone(), u.power));
            }
        }
        EquivariantClass::with_degree(restrictions, q)
    };

    match path {
        SolvePath::Field => {
            let kernel = field_kernel(rows, ncols, base);
            let mut projected: Vec<Vec<Coeff>> = kernel.into_iter().map(|v| v[..nx].to_vec()).collect();
            let pivots = rref(&mut projected, nx);
            let rank = pivots.iter().filter(|&&p| p < leading).count();
            let basis = projected.iter().map(|v| to_class(v)).collect();
            Ok(DegreeSolution { degree: q, rank, basis, divisors: Vec::new(), unknowns: nx, equations })
        }
        SolvePath::Integer => {
            let int_rows: Vec<Vec<BigInt>> =
                rows.iter().map(|r| r.iter().map(|c| c.as_bigint().cloned().unwrap_or_default()).collect()).collect();
            let kernel = integer_kernel(&int_rows, ncols);
            let projected: Vec<Vec<BigInt>> = kernel.into_iter().map(|v| v[..nx].to_vec()).collect();
            let lattice = hermite_basis(projected, nx);
            let rank = lattice.iter().filter(|v| pivot_of(v).is_some_and(|p| p < leading)).count();
            let divisors = if lattice.is_empty() {
                Vec::new()
            } else {
                let snf = smith_normal_form(&IntMatrix::from_big_rows(lattice.clone(), nx));
                snf.diagonal().into_iter().filter(|x| !x.is_zero()).collect()
            };
            let basis = lattice
                .iter()
                .map(|v| to_class(&v.iter().map(|x| Coeff::Int(x.clone())).collect::<Vec<_>>()))
                .collect();
            Ok(DegreeSolution { degree: q, rank, basis, divisors, unknowns: nx, equations })
        }
    }
}

/// Exponents `b` of quotient unknowns `t^j u^b` of degree `q - 2` with `|b| <= cap`.
fn quotient_monomials(q: i64, period: i64, m: usize, cap: u32) -> Vec<Vec<u32>> {
    let index = monomial_index(m, cap);
    (0..index.len())
        .filter(|&i| {
            let excess = 2 * index.degree(i) as i64 - (q - 2);
            if period == 0 {
                excess == 0
            } else {
                excess % period == 0
            }
        })
        .map(|i| index.exponent(i).iter().map(|&x| x as u32).collect())
        .collect()
}

/// Predicted rank in degree `q` of `E*(M)[[u_1, ..., u_m]]` from the ranks
/// of `E*(M)` in each degree.
pub fn formality_prediction(betti: &[(i64, u64)], torus_rank: usize, q: i64) -> u64 {
    betti
        .iter()
        .filter(|&&(a, _)| a <= q && (q - a) % 2 == 0)
        .map(|&(a, r)| r * monomial_count(((q - a) / 2) as u64, torus_rank as u64))
        .sum()
}

/// Number of monomials of degree `b` in `m` variables.
fn monomial_count(b: u64, m: u64) -> u64 {
    if m == 0 {
        return u64::from(b == 0);
    }
    // C(b + m - 1, m - 1)
    let mut acc = 1u64;
    for i in 1..m {
        acc = acc * (b + i) / i;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalityRow {
    pub degree: i64,
    pub predicted: u64,
    pub actual: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalityReport {
    pub rows: Vec<FormalityRow>,
}

impl FormalityReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<i64> {
        self.rows.iter().find(|r| !r.pass).map(|r| r.degree)
    }

    pub fn format(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let verdict = if r.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{} predicted {} actual {} {verdict}\n", r.degree, r.predicted, r.actual));
        }
        out
    }
}

pub fn check_formality(g: &GkmGraph, betti: &[(i64, u64)], solution: &SolutionModule) -> FormalityReport {
    let rows = solution
        .degrees
        .iter()
        .map(|d| {
            let predicted = formality_prediction(betti, g.rank, d.degree);
            FormalityRow { degree: d.degree, predicted, actual: d.rank, pass: predicted == d.rank as u64 }
        })
        .collect();
    FormalityReport { rows }
}
