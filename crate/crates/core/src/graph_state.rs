//! Graph states as labeled simple graphs, and the graph rules for CZ,
//! local complementation, subgraph complementation and Pauli measurement.
//!
//! Vertex ids are stable: a measured vertex is retired and its id is never
//! handed out again, so schedules and error frames can refer to qubits by id
//! for the whole lifetime of a run.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2_linalg::BitMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Basis::X => "X",
            Basis::Y => "Y",
            Basis::Z => "Z",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub vertex: usize,
    pub basis: Basis,
    /// The local complementation a Y measurement performs before removal.
    pub companion_lc: Option<usize>,
}

#[derive(Clone, Default)]
pub struct LabeledGraph {
    adj: BTreeMap<usize, BTreeSet<usize>>,
    retired: BTreeSet<usize>,
}

impl PartialEq for LabeledGraph {
    fn eq(&self, other: &Self) -> bool {
        self.adj == other.adj
    }
}

impl Eq for LabeledGraph {}

impl fmt::Debug for LabeledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verts: Vec<usize> = self.vertices().collect();
        let edges: Vec<(usize, usize)> = self.edges().collect();
        f.debug_struct("LabeledGraph")
            .field("vertices", &verts)
            .field("edges", &edges)
            .finish()
    }
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vertices(ids: impl IntoIterator<Item = usize>) -> Self {
        let mut g = Self::new();
        for v in ids {
            g.adj.entry(v).or_default();
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::with_vertices(0..n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, v: usize) -> Result<()> {
        if self.retired.contains(&v) {
            return Err(Error::RetiredVertex(v));
        }
        self.adj.entry(v).or_default();
        Ok(())
    }

    pub fn contains(&self, v: usize) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn is_retired(&self, v: usize) -> bool {
        self.retired.contains(&v)
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.adj.keys().copied()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, ns)| ns.range(u + 1..).map(move |&v| (u, v)))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj.get(&a).is_some_and(|ns| ns.contains(&b))
    }

    pub fn neighbors(&self, v: usize) -> Result<impl Iterator<Item = usize> + '_> {
        self.adj
            .get(&v)
            .map(|ns| ns.iter().copied())
            .ok_or(Error::UnknownVertex(v))
    }

    pub fn neighborhood(&self, v: usize) -> Result<&BTreeSet<usize>> {
        self.adj.get(&v).ok_or(Error::UnknownVertex(v))
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        Ok(self.neighborhood(v)?.len())
    }

    fn require(&self, v: usize) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.require(a)?;
        self.require(b)?;
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        Ok(())
    }

    /// Insert an edge if absent.
    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        self.adj.get_mut(&a).unwrap().insert(b);
        self.adj.get_mut(&b).unwrap().insert(a);
        Ok(())
    }

    /// CZ on a graph state: toggles the edge `(a, b)`.
    pub fn toggle_edge(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        if !self.adj.get_mut(&a).unwrap().remove(&b) {
            self.adj.get_mut(&a).unwrap().insert(b);
            self.adj.get_mut(&b).unwrap().insert(a);
        } else {
            self.adj.get_mut(&b).unwrap().remove(&a);
        }
        Ok(())
    }

    fn toggle_unchecked(&mut self, a: usize, b: usize) {
        let na = self.adj.get_mut(&a).unwrap();
        if !na.remove(&b) {
            na.insert(b);
            self.adj.get_mut(&b).unwrap().insert(a);
        } else {
            self.adj.get_mut(&b).unwrap().remove(&a);
        }
    }

    /// Complement the induced subgraph on `set`.
    pub fn complement_within(&mut self, set: &BTreeSet<usize>) -> Result<()> {
        for &v in set {
            self.require(v)?;
        }
        let members: Vec<usize> = set.iter().copied().collect();
        for (i, &u) in members.iter().enumerate() {
            for &w in &members[i + 1..] {
                self.toggle_unchecked(u, w);
            }
        }
        Ok(())
    }

    /// Local complementation at `v`: complements the neighborhood of `v`.
    pub fn local_complement(&mut self, v: usize) -> Result<()> {
        let nbrs = self.neighborhood(v)?.clone();
        self.complement_within(&nbrs)
    }

    /// Delete `v` and its edges, retiring the id.
    pub fn remove_vertex(&mut self, v: usize) -> Result<()> {
        let nbrs = self.adj.remove(&v).ok_or(Error::UnknownVertex(v))?;
        for w in nbrs {
            self.adj.get_mut(&w).unwrap().remove(&v);
        }
        self.retired.insert(v);
        Ok(())
    }

    /// Graph rule for a Pauli measurement on `v`. Z deletes the vertex; Y
    /// locally complements at `v` first. Local byproduct operators are not
    /// represented at this level.
    pub fn measure(&mut self, v: usize, basis: Basis) -> Result<MeasurementRecord> {
        self.require(v)?;
        let companion_lc = match basis {
            Basis::Z => None,
            Basis::Y => {
                self.local_complement(v)?;
                Some(v)
            }
            Basis::X => {
                return Err(Error::InvalidArgument(
                    "X measurement is not a public graph rule".into(),
                ))
            }
        };
        self.remove_vertex(v)?;
        Ok(MeasurementRecord {
            vertex: v,
            basis,
            companion_lc,
        })
    }

    /// Adjacency matrix with rows and columns in increasing vertex-id order.
    pub fn adjacency(&self) -> BitMatrix {
        let index: BTreeMap<usize, usize> =
            self.vertices().enumerate().map(|(i, v)| (v, i)).collect();
        let mut m = BitMatrix::zeros(index.len(), index.len());
        for (u, v) in self.edges() {
            m.set(index[&u], index[&v], true);
            m.set(index[&v], index[&u], true);
        }
        m
    }

    /// Graph on `0..m.rows()` whose edges are the off-diagonal ones of `m`.
    pub fn from_adjacency(m: &BitMatrix) -> Result<Self> {
        if !m.is_adjacency() {
            return Err(Error::InvalidArgument("not an adjacency matrix".into()));
        }
        let mut g = Self::with_vertices(0..m.rows());
        for r in 0..m.rows() {
            for c in r + 1..m.cols() {
                if m.get(r, c) {
                    g.add_edge(r, c)?;
                }
            }
        }
        Ok(g)
    }

    pub fn relabel(&self, f: impl Fn(usize) -> usize) -> Self {
        let mut g = Self::with_vertices(self.vertices().map(&f));
        for (u, v) in self.edges() {
            g.toggle_unchecked(f(u), f(v));
        }
        g
    }

    /// Induced subgraph on `keep` (ids not in the graph are ignored).
    pub fn induced(&self, keep: &BTreeSet<usize>) -> Self {
        let mut g = Self::with_vertices(self.vertices().filter(|v| keep.contains(v)));
        for (u, v) in self.edges() {
            if keep.contains(&u) && keep.contains(&v) {
                g.toggle_unchecked(u, v);
            }
        }
        g
    }

    pub fn is_complete(&self) -> bool {
        let n = self.vertex_count();
        self.adj.values().all(|ns| ns.len() + 1 == n)
    }

    pub fn is_connected(&self) -> bool {
        let Some(start) = self.vertices().next() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &self.adj[&v] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == self.vertex_count()
    }

    /// Serialize in the plain text format: `n` then one `u v` per edge.
    /// Requires vertices `0..n`.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.vertex_count());
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::Parse(format!("bad vertex count {header:?}")))?;
        let mut g = Self::with_vertices(0..n);
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [a, b] = fields.as_slice() else {
                return Err(Error::Parse(format!("expected `u v`, got {line:?}")));
            };
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad vertex id {s:?}")))
            };
            let (a, b) = (parse(a)?, parse(b)?);
            if a >= n || b >= n {
                return Err(Error::Parse(format!("edge {a} {b} out of range for n = {n}")));
            }
            g.add_edge(a, b)
                .map_err(|e| Error::Parse(format!("edge {a} {b}: {e}")))?;
        }
        Ok(g)
    }
}

pub fn apply_cz(g: &LabeledGraph, a: usize, b: usize) -> Result<LabeledGraph> {
    let mut out = g.clone();
    out.toggle_edge(a, b)?;
    Ok(out)
}

pub fn local_complement(g: &LabeledGraph, v: usize) -> Result<LabeledGraph> {
    let mut out = g.clone();
    out.local_complement(v)?;
    Ok(out)
}

pub fn subgraph_complement(g: &LabeledGraph, set: &BTreeSet<usize>) -> Result<LabeledGraph> {
    let mut out = g.clone();
    out.complement_within(set)?;
    Ok(out)
}

pub fn measure(
    g: &LabeledGraph,
    v: usize,
    basis: Basis,
) -> Result<(LabeledGraph, MeasurementRecord)> {
    let mut out = g.clone();
    let rec = out.measure(v, basis)?;
    Ok((out, rec))
}

/// Erdős–Rényi graph on `0..n`; pairs are drawn in lexicographic order.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Result<LabeledGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("edge probability {p} not in [0, 1]")));
    }
    Ok(generators::gnp(n, p, seed))
}

/// Named graph families, parsed from strings such as `complete:6` or
/// `gnp:12,0.5,7`.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphFamily {
    Complete(usize),
    Bipartite(usize, usize),
    Multipartite(Vec<usize>),
    Path(usize),
    Cycle(usize),
    Star(usize),
    Wheel(usize),
    Gnp { n: usize, p: f64, seed: u64 },
}

impl GraphFamily {
    pub fn build(&self) -> LabeledGraph {
        match self {
            GraphFamily::Complete(n) => generators::complete(*n),
            GraphFamily::Bipartite(a, b) => generators::multipartite(&[*a, *b]),
            GraphFamily::Multipartite(parts) => generators::multipartite(parts),
            GraphFamily::Path(n) => generators::path(*n),
            GraphFamily::Cycle(n) => generators::cycle(*n),
            GraphFamily::Star(n) => generators::star(*n),
            GraphFamily::Wheel(n) => generators::wheel(*n),
            GraphFamily::Gnp { n, p, seed } => generators::gnp(*n, *p, *seed),
        }
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            GraphFamily::Complete(n)
            | GraphFamily::Path(n)
            | GraphFamily::Cycle(n)
            | GraphFamily::Star(n)
            | GraphFamily::Wheel(n)
            | GraphFamily::Gnp { n, .. } => *n,
            GraphFamily::Bipartite(a, b) => a + b,
            GraphFamily::Multipartite(parts) => parts.iter().sum(),
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphFamily::Complete(n) => write!(f, "complete:{n}"),
            GraphFamily::Bipartite(a, b) => write!(f, "bipartite:{a},{b}"),
            GraphFamily::Multipartite(parts) => {
                let s: Vec<String> = parts.iter().map(usize::to_string).collect();
                write!(f, "mpartite:{}", s.join(","))
            }
            GraphFamily::Path(n) => write!(f, "path:{n}"),
            GraphFamily::Cycle(n) => write!(f, "cycle:{n}"),
            GraphFamily::Star(n) => write!(f, "star:{n}"),
            GraphFamily::Wheel(n) => write!(f, "wheel:{n}"),
            GraphFamily::Gnp { n, p, seed } => write!(f, "gnp:{n},{p},{seed}"),
        }
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("generator {s:?} lacks `name:args`")))?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let count = |a: &str| {
            a.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad count {a:?} in {s:?}")))
        };
        let single = |min: usize| -> Result<usize> {
            match args.as_slice() {
                [a] => {
                    let n = count(a)?;
                    if n < min {
                        return Err(Error::Parse(format!("{name} needs at least {min} vertices")));
                    }
                    Ok(n)
                }
                _ => Err(Error::Parse(format!("{name} takes one argument"))),
            }
        };
        match name {
            "complete" => Ok(GraphFamily::Complete(single(1)?)),
            "path" => Ok(GraphFamily::Path(single(1)?)),
            "cycle" => Ok(GraphFamily::Cycle(single(3)?)),
            "star" => Ok(GraphFamily::Star(single(1)?)),
            "wheel" => Ok(GraphFamily::Wheel(single(4)?)),
            "bipartite" => match args.as_slice() {
                [a, b] => {
                    let (a, b) = (count(a)?, count(b)?);
                    if a == 0 || b == 0 {
                        return Err(Error::Parse("bipartite parts must be non-empty".into()));
                    }
                    Ok(GraphFamily::Bipartite(a, b))
                }
                _ => Err(Error::Parse("bipartite takes two arguments".into())),
            },
            "mpartite" => {
                let parts = args.iter().map(|a| count(a)).collect::<Result<Vec<_>>>()?;
                if parts.is_empty() || parts.contains(&0) {
                    return Err(Error::Parse("mpartite parts must be non-empty".into()));
                }
                Ok(GraphFamily::Multipartite(parts))
            }
            "gnp" => match args.as_slice() {
                [n, p, seed] => {
                    let n = count(n)?;
                    let p: f64 = p
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad probability {p:?}")))?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::Parse(format!("probability {p} not in [0, 1]")));
                    }
                    let seed: u64 = seed
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad seed {seed:?}")))?;
                    Ok(GraphFamily::Gnp { n, p, seed })
                }
                _ => Err(Error::Parse("gnp takes N,P,SEED".into())),
            },
            other => Err(Error::Parse(format!("unknown generator {other:?}"))),
        }
    }
}

/// Resolve a graph argument: a generator string, or else a path to a graph
/// text file.
pub fn load_graph(spec: &str) -> Result<(LabeledGraph, Option<GraphFamily>)> {
    if let Ok(family) = spec.parse::<GraphFamily>() {
        return Ok((family.build(), Some(family)));
    }
    let path = std::path::Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        return Ok((LabeledGraph::parse_text(&text)?, None));
    }
    // Surface the generator error when the string looks like one.
    if spec.contains(':') {
        spec.parse::<GraphFamily>()?;
    }
    Err(Error::Parse(format!("{spec:?} is neither a generator nor a readable file")))
}

pub mod generators {
    use super::*;

    pub fn complete(n: usize) -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(0..n);
        for u in 0..n {
            for v in u + 1..n {
                g.toggle_unchecked(u, v);
            }
        }
        g
    }

    /// Complete multipartite graph; parts are consecutive id ranges.
    pub fn multipartite(parts: &[usize]) -> LabeledGraph {
        let n: usize = parts.iter().sum();
        let mut part_of = Vec::with_capacity(n);
        for (i, &size) in parts.iter().enumerate() {
            part_of.extend(std::iter::repeat_n(i, size));
        }
        let mut g = LabeledGraph::with_vertices(0..n);
        for u in 0..n {
            for v in u + 1..n {
                if part_of[u] != part_of[v] {
                    g.toggle_unchecked(u, v);
                }
            }
        }
        g
    }

    pub fn bipartite(a: usize, b: usize) -> LabeledGraph {
        multipartite(&[a, b])
    }

    pub fn path(n: usize) -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(0..n);
        for v in 1..n {
            g.toggle_unchecked(v - 1, v);
        }
        g
    }

    pub fn cycle(n: usize) -> LabeledGraph {
        let mut g = path(n);
        if n >= 3 {
            g.toggle_unchecked(n - 1, 0);
        }
        g
    }

    /// Star on `n` vertices with center 0.
    pub fn star(n: usize) -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(0..n);
        for v in 1..n {
            g.toggle_unchecked(0, v);
        }
        g
    }

    /// Wheel on `n` vertices: hub 0 joined to the rim cycle `1..n`.
    pub fn wheel(n: usize) -> LabeledGraph {
        let mut g = star(n);
        if n >= 4 {
            for v in 2..n {
                g.toggle_unchecked(v - 1, v);
            }
            g.toggle_unchecked(n - 1, 1);
        }
        g
    }

    pub fn gnp(n: usize, p: f64, seed: u64) -> LabeledGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = LabeledGraph::with_vertices(0..n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < p {
                    g.toggle_unchecked(u, v);
                }
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn cz_examples() {
        let k2 = generators::complete(2);
        assert_eq!(apply_cz(&k2, 0, 1).unwrap(), LabeledGraph::with_vertices(0..2));
        let empty = LabeledGraph::with_vertices(0..2);
        assert_eq!(apply_cz(&empty, 0, 1).unwrap(), k2);
        let twice = apply_cz(&apply_cz(&k2, 1, 0).unwrap(), 0, 1).unwrap();
        assert_eq!(twice, k2);
        assert_eq!(apply_cz(&k2, 0, 0), Err(Error::SelfLoop(0)));
        assert_eq!(apply_cz(&k2, 0, 5), Err(Error::UnknownVertex(5)));
    }

    #[test]
    fn lc_examples() {
        let p2 = generators::path(2);
        assert_eq!(local_complement(&p2, 1).unwrap(), p2);
        let star = generators::star(4);
        assert_eq!(local_complement(&star, 0).unwrap(), generators::complete(4));
        let k3 = generators::complete(3);
        let lc = local_complement(&k3, 0).unwrap();
        assert_eq!(lc, LabeledGraph::from_edges(3, &[(0, 1), (0, 2)]).unwrap());
        assert!(local_complement(&k3, 3).is_err());
    }

    #[test]
    fn sc_examples() {
        let empty = LabeledGraph::with_vertices(0..5);
        let s = set(&[1, 2, 4]);
        let once = subgraph_complement(&empty, &s).unwrap();
        assert_eq!(once.edge_count(), 3);
        assert!(once.has_edge(1, 4) && once.has_edge(2, 4) && once.has_edge(1, 2));
        assert_eq!(subgraph_complement(&once, &s).unwrap(), empty);

        // Wheel system from the W5 figure, 0-indexed: hub ends up at 2.
        let mut g = empty.clone();
        for s in [set(&[0, 1, 3, 4]), set(&[1, 2, 3]), set(&[0, 2, 4])] {
            g.complement_within(&s).unwrap();
        }
        let expected = LabeledGraph::from_edges(
            5,
            &[(2, 0), (2, 1), (2, 3), (2, 4), (0, 1), (1, 4), (4, 3), (3, 0)],
        )
        .unwrap();
        assert_eq!(g, expected);
        assert!(subgraph_complement(&empty, &set(&[7])).is_err());
    }

    #[test]
    fn measurement_examples() {
        let k3 = generators::complete(3);
        let (g, rec) = measure(&k3, 0, Basis::Z).unwrap();
        assert_eq!(g, generators::complete(3).induced(&set(&[1, 2])));
        assert_eq!(rec.companion_lc, None);
        assert!(g.is_retired(0));

        let p3 = generators::path(3);
        let (g, rec) = measure(&p3, 1, Basis::Y).unwrap();
        assert!(g.has_edge(0, 2));
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(rec.companion_lc, Some(1));

        let mut iso = LabeledGraph::from_edges(3, &[(0, 1)]).unwrap();
        iso.measure(2, Basis::Z).unwrap();
        assert_eq!(iso, LabeledGraph::from_edges(2, &[(0, 1)]).unwrap());
        assert_eq!(iso.add_vertex(2), Err(Error::RetiredVertex(2)));
        assert!(iso.measure(0, Basis::X).is_err());
    }

    #[test]
    fn random_graph_examples() {
        assert_eq!(random_graph(6, 0.0, 3).unwrap().edge_count(), 0);
        assert_eq!(random_graph(6, 1.0, 3).unwrap(), generators::complete(6));
        assert_eq!(random_graph(9, 0.4, 11).unwrap(), random_graph(9, 0.4, 11).unwrap());
        assert!(random_graph(3, 1.5, 0).is_err());
    }

    #[test]
    fn text_format_and_generators() {
        let g = generators::wheel(5);
        assert_eq!(g.edge_count(), 8);
        let parsed = LabeledGraph::parse_text(&g.to_text()).unwrap();
        assert_eq!(parsed, g);
        assert!(LabeledGraph::parse_text("3\n0 3\n").is_err());
        assert!(LabeledGraph::parse_text("3\n0 0\n").is_err());
        assert!(LabeledGraph::parse_text("").is_err());

        for (s, n, m) in [
            ("complete:5", 5, 10),
            ("bipartite:2,3", 5, 6),
            ("mpartite:2,2,2", 6, 12),
            ("path:4", 4, 3),
            ("cycle:6", 6, 6),
            ("star:5", 5, 4),
            ("wheel:6", 6, 10),
        ] {
            let fam: GraphFamily = s.parse().unwrap();
            assert_eq!(fam.to_string(), s);
            let g = fam.build();
            assert_eq!((g.vertex_count(), g.edge_count()), (n, m), "{s}");
        }
        let fam: GraphFamily = "gnp:8,0.5,7".parse().unwrap();
        assert_eq!(fam.build(), generators::gnp(8, 0.5, 7));
        for bad in ["complete", "cycle:2", "bipartite:3", "gnp:3,2.0,1", "blob:3", "path:x"] {
            assert!(bad.parse::<GraphFamily>().is_err(), "{bad}");
        }
    }

    fn graph_and_system() -> impl Strategy<Value = (LabeledGraph, Vec<BTreeSet<usize>>)> {
        (2usize..=8, any::<u64>()).prop_flat_map(|(n, seed)| {
            let sets = proptest::collection::vec(
                proptest::collection::btree_set(0..n, 0..=n),
                0..6,
            );
            (Just(generators::gnp(n, 0.5, seed)), sets)
        })
    }

    proptest! {
        #[test]
        fn adjacency_is_symmetric_zero_diagonal(n in 0usize..12, seed in any::<u64>()) {
            prop_assert!(generators::gnp(n, 0.5, seed).adjacency().is_adjacency());
        }

        #[test]
        fn lc_is_an_involution(n in 1usize..10, seed in any::<u64>(), v in 0usize..10) {
            let g = generators::gnp(n, 0.5, seed);
            let v = v % n;
            let twice = local_complement(&local_complement(&g, v).unwrap(), v).unwrap();
            prop_assert_eq!(twice, g);
        }

        #[test]
        fn lc_equals_sc_on_neighborhood(n in 1usize..10, seed in any::<u64>(), v in 0usize..10) {
            let g = generators::gnp(n, 0.5, seed);
            let v = v % n;
            let nbrs = g.neighborhood(v).unwrap().clone();
            prop_assert_eq!(local_complement(&g, v).unwrap(), subgraph_complement(&g, &nbrs).unwrap());
        }

        #[test]
        fn sc_operations_commute((g, sets) in graph_and_system()) {
            let mut forward = g.clone();
            for s in &sets {
                forward.complement_within(s).unwrap();
            }
            let mut backward = g.clone();
            for s in sets.iter().rev() {
                backward.complement_within(s).unwrap();
            }
            prop_assert_eq!(forward, backward);
        }
    }

    #[test]
    fn sc_commutation_exhaustive_orders() {
        // Every permutation of a 4-set system on random graphs gives the same graph.
        for seed in 0..20u64 {
            let n = 8;
            let g = generators::gnp(n, 0.5, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sets: Vec<BTreeSet<usize>> = (0..4)
                .map(|_| (0..n).filter(|_| rng.gen_bool(0.5)).collect())
                .collect();
            let mut reference: Option<LabeledGraph> = None;
            let mut order: Vec<usize> = (0..sets.len()).collect();
            permute(&mut order, 0, &mut |ord| {
                let mut h = g.clone();
                for &i in ord {
                    h.complement_within(&sets[i]).unwrap();
                }
                match &reference {
                    None => reference = Some(h),
                    Some(r) => assert_eq!(&h, r),
                }
            });
        }
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }
}
