//! Moment-graph files.
//!
//! ```toml
//! torus_rank = 2
//! vertices = ["p0", "p1", "p2"]
//!
//! [[edges]]
//! tail = "p0"          # vertex name or 0-based index
//! head = "p1"
//! weight = [1, 0]
//!
//! [[betti]]
//! degree = 0
//! rank = 1
//!
//! [[classes]]
//! name = "H2"
//! restrictions = ["0", "chi(1,0)^2", "chi(0,1)^2"]
//! degree = 4           # optional; checked when present
//! ```

use std::fmt;
use std::ops::Range;
use std::path::Path;

use gkm_core::gkm::{Edge, EquivariantClass, GkmGraph};
use gkm_core::scalar::Theory;
use serde::Deserialize;
use toml::Spanned;

use crate::expr::parse_series;

#[derive(Debug)]
pub struct InputError {
    pub file: String,
    /// 1-based line and column.
    pub location: Option<(usize, usize)>,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some((line, col)) => write!(f, "{}:{line}:{col}: {}", self.file, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Endpoint {
    Index(usize),
    Name(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    tail: Spanned<Endpoint>,
    head: Spanned<Endpoint>,
    weight: Spanned<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BettiEntry {
    degree: i64,
    rank: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassEntry {
    name: Spanned<String>,
    restrictions: Spanned<Vec<Spanned<String>>>,
    degree: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    torus_rank: Spanned<usize>,
    vertices: Spanned<Vec<String>>,
    #[serde(default)]
    edges: Vec<EdgeEntry>,
    betti: Option<Vec<BettiEntry>>,
    #[serde(default)]
    classes: Vec<ClassEntry>,
}

pub struct GraphFile {
    file: String,
    source: String,
    pub graph: GkmGraph,
    pub betti: Option<Vec<(i64, u64)>>,
    classes: Vec<ClassEntry>,
}

impl GraphFile {
    pub fn load(path: &Path) -> Result<GraphFile, InputError> {
        let file = path.display().to_string();
        let source = std::fs::read_to_string(path).map_err(|e| InputError {
            file: file.clone(),
            location: None,
            message: e.to_string(),
        })?;
        GraphFile::parse(file, source)
    }

    pub fn parse(file: String, source: String) -> Result<GraphFile, InputError> {
        let error = |span: Option<Range<usize>>, message: String| InputError {
            file: file.clone(),
            location: span.map(|s| line_col(&source, s.start)),
            message,
        };
        let raw: RawFile = toml::from_str(&source).map_err(|e| error(e.span(), e.message().trim().to_string()))?;

        let rank = *raw.torus_rank.get_ref();
        if rank == 0 {
            return Err(error(Some(raw.torus_rank.span()), "torus_rank must be positive".into()));
        }
        let vertices = raw.vertices.get_ref().clone();
        for (i, name) in vertices.iter().enumerate() {
            if vertices[..i].contains(name) {
                return Err(error(Some(raw.vertices.span()), format!("duplicate vertex name '{name}'")));
            }
        }
        let resolve = |end: &Spanned<Endpoint>| match end.get_ref() {
            Endpoint::Index(i) if *i < vertices.len() => Ok(*i),
            Endpoint::Index(i) => Err(error(Some(end.span()), format!("vertex index {i} out of range"))),
            Endpoint::Name(n) => vertices
                .iter()
                .position(|v| v == n)
                .ok_or_else(|| error(Some(end.span()), format!("unknown vertex '{n}'"))),
        };
        let mut edges = Vec::with_capacity(raw.edges.len());
        for e in &raw.edges {
            let weight = e.weight.get_ref();
            if weight.len() != rank {
                return Err(error(
                    Some(e.weight.span()),
                    format!("weight has length {}, torus_rank is {rank}", weight.len()),
                ));
            }
            edges.push(Edge::new(resolve(&e.tail)?, resolve(&e.head)?, weight));
        }
        let betti = raw.betti.map(|b| b.iter().map(|r| (r.degree, r.rank)).collect());
        for (i, c) in raw.classes.iter().enumerate() {
            if raw.classes[..i].iter().any(|d| d.name.get_ref() == c.name.get_ref()) {
                return Err(error(Some(c.name.span()), format!("duplicate class name '{}'", c.name.get_ref())));
            }
        }
        let graph = GkmGraph::new(rank, vertices, edges);
        Ok(GraphFile { file, source, graph, betti, classes: raw.classes })
    }

    pub fn class_names(&self) -> Vec<&str> {
        self.classes.iter().map(|c| c.name.get_ref().as_str()).collect()
    }

    pub fn has_class(&self, name: &str) -> bool {
        self.classes.iter().any(|c| c.name.get_ref() == name)
    }

    fn error_at(&self, offset: Option<usize>, message: String) -> InputError {
        InputError { file: self.file.clone(), location: offset.map(|o| line_col(&self.source, o)), message }
    }

    /// Evaluate the named class over the theory at its truncation.
    pub fn class(&self, name: &str, theory: &Theory) -> Result<EquivariantClass, InputError> {
        let Some(entry) = self.classes.iter().find(|c| c.name.get_ref() == name) else {
            let known = self.class_names().join(", ");
            return Err(self.error_at(None, format!("no class named '{name}' (classes: {known})")));
        };
        let list = entry.restrictions.get_ref();
        if list.len() != self.graph.vertex_count() {
            return Err(self.error_at(
                Some(entry.restrictions.span().start),
                format!(
                    "class '{name}' has {} restrictions, graph has {} vertices",
                    list.len(),
                    self.graph.vertex_count()
                ),
            ));
        }
        let mut restrictions = Vec::with_capacity(list.len());
        for item in list {
            // the string body starts after its opening quote
            let body = item.span().start + 1;
            let f = parse_series(item.get_ref(), theory, self.graph.rank)
                .map_err(|e| self.error_at(Some(body + e.offset), e.message))?;
            restrictions.push(f);
        }
        let class = EquivariantClass::new(restrictions);
        if let Some(tag) = entry.degree {
            if !class.is_zero() && class.degree != Some(tag) {
                let got = class.degree.map_or("mixed".to_string(), |d| d.to_string());
                return Err(self.error_at(
                    Some(entry.restrictions.span().start),
                    format!("class '{name}' is tagged degree {tag} but has degree {got}"),
                ));
            }
            return Ok(EquivariantClass { degree: Some(tag), ..class });
        }
        Ok(class)
    }
}

fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}
