//! Subgraph complementation systems: producers, replay and `c2` bounds.
//!
//! A system is a list of vertex sets whose cliques, XORed together, give the
//! target graph. Producers range from the edge-wise system through closed
//! forms for named classes to an exact minimum search seeded at the GF(2)
//! minimum rank.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::gf2_linalg::{self, DEFAULT_CUT_RANK_LIMIT, DEFAULT_MIN_RANK_LIMIT};
use crate::graph_state::{GraphFamily, LabeledGraph};

pub const DEFAULT_EXACT_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Trivial,
    ClosedForm,
    Greedy,
    /// Symmetric elimination, at most `n - 1` sets for any graph.
    Elimination,
    Exact,
    /// Read from a file or built by hand.
    External,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Trivial => "trivial",
            Provenance::ClosedForm => "closed_form",
            Provenance::Greedy => "greedy",
            Provenance::Elimination => "elimination",
            Provenance::Exact => "exact",
            Provenance::External => "external",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScSystem {
    n: usize,
    sets: Vec<BTreeSet<usize>>,
    provenance: Provenance,
    target_hash: u64,
}

fn graph_hash(g: &LabeledGraph) -> u64 {
    let mut h = DefaultHasher::new();
    g.vertex_count().hash(&mut h);
    for e in g.edges() {
        e.hash(&mut h);
    }
    h.finish()
}

/// Fold subgraph complementation over the empty graph on `0..n`.
pub fn replay(n: usize, sets: &[BTreeSet<usize>]) -> Result<LabeledGraph> {
    let mut g = LabeledGraph::with_vertices(0..n);
    for s in sets {
        g.complement_within(s)?;
    }
    Ok(g)
}

impl ScSystem {
    pub fn new(n: usize, sets: Vec<BTreeSet<usize>>, provenance: Provenance) -> Result<Self> {
        for s in &sets {
            if s.len() < 2 {
                return Err(Error::InvalidArgument(format!(
                    "SC sets need at least two vertices, got {s:?}"
                )));
            }
            if let Some(&v) = s.iter().find(|&&v| v >= n) {
                return Err(Error::UnknownVertex(v));
            }
        }
        let target_hash = graph_hash(&replay(n, &sets)?);
        Ok(ScSystem {
            n,
            sets,
            provenance,
            target_hash,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn set_sizes(&self) -> Vec<usize> {
        self.sets.iter().map(BTreeSet::len).collect()
    }

    pub fn replay(&self) -> LabeledGraph {
        replay(self.n, &self.sets).expect("sets validated on construction")
    }

    /// Same system, sets reordered by `order` (a permutation of indices).
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.sets.len()];
        if order.len() != self.sets.len() {
            return Err(Error::SizeMismatch(order.len(), self.sets.len()));
        }
        for &i in order {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!("{order:?} is not a permutation")));
            }
        }
        Ok(ScSystem {
            sets: order.iter().map(|&i| self.sets[i].clone()).collect(),
            ..self.clone()
        })
    }

    pub fn reproduces(&self, g: &LabeledGraph) -> bool {
        graph_hash(g) == self.target_hash && self.replay() == *g
    }

    pub fn check_target(&self, g: &LabeledGraph) -> Result<()> {
        if self.reproduces(g) {
            Ok(())
        } else {
            Err(Error::SystemMismatch(format!(
                "{} system of size {} replays to a different graph",
                self.provenance,
                self.len()
            )))
        }
    }

    /// First line `n d`, then one line per set.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.sets.len());
        for s in &self.sets {
            let ids: Vec<String> = s.iter().map(usize::to_string).collect();
            out.push_str(&ids.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty system file".into()))?;
        let nums: Vec<usize> = parse_ids(header)?;
        let [n, d] = nums[..] else {
            return Err(Error::Parse(format!("header must be `n d`, got `{header}`")));
        };
        let sets: Vec<BTreeSet<usize>> = lines
            .map(|l| parse_ids(l).map(|ids| ids.into_iter().collect()))
            .collect::<Result<_>>()?;
        if sets.len() != d {
            return Err(Error::Parse(format!("header says {d} sets, found {}", sets.len())));
        }
        ScSystem::new(n, sets, Provenance::External)
    }
}

fn parse_ids(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Parse(format!("bad integer `{t}`")))
        })
        .collect()
}

/// Vertex ids must be exactly `0..n`.
pub(crate) fn dense_order(g: &LabeledGraph) -> Result<usize> {
    let n = g.vertex_count();
    match g.vertices().enumerate().find(|&(i, v)| i != v) {
        Some((_, v)) => Err(Error::InvalidArgument(format!(
            "solver graphs need vertex ids 0..{n}, found {v}"
        ))),
        None => Ok(n),
    }
}

pub fn trivial_system(g: &LabeledGraph) -> Result<ScSystem> {
    let n = dense_order(g)?;
    let sets = g.edges().map(|(a, b)| BTreeSet::from([a, b])).collect();
    ScSystem::new(n, sets, Provenance::Trivial)
}

/// Max-degree star elimination: each star at `v` is the pair
/// `{v} ∪ N(v)`, `N(v)`, or just the edge when `v` has one neighbor.
pub fn greedy_system(g: &LabeledGraph) -> Result<ScSystem> {
    let n = dense_order(g)?;
    let mut work = g.clone();
    let mut sets = Vec::new();
    loop {
        let best = work
            .vertices()
            .map(|v| (work.degree(v).unwrap(), v))
            .filter(|&(d, _)| d > 0)
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        let Some((deg, v)) = best else { break };
        let nbrs: BTreeSet<usize> = work.neighborhood(v)?.clone();
        let mut closed = nbrs.clone();
        closed.insert(v);
        sets.push(closed);
        if deg > 1 {
            sets.push(nbrs.clone());
        }
        for w in nbrs {
            work.toggle_edge(v, w)?;
        }
    }
    ScSystem::new(n, sets, Provenance::Greedy)
}

/// Symmetric elimination: for each vertex in id order, emit `{v} ∪ N(v)` in
/// the residual graph and complement it there. `v` becomes isolated, so at
/// most `n - 1` sets are emitted.
pub fn elimination_system(g: &LabeledGraph) -> Result<ScSystem> {
    let n = dense_order(g)?;
    let mut work = g.clone();
    let mut sets = Vec::new();
    for v in 0..n {
        let nbrs = work.neighborhood(v)?;
        if nbrs.is_empty() {
            continue;
        }
        let mut closed = nbrs.clone();
        closed.insert(v);
        work.complement_within(&closed)?;
        sets.push(closed);
    }
    debug_assert_eq!(work.edge_count(), 0);
    ScSystem::new(n, sets, Provenance::Elimination)
}

/// Recognized structure for closed-form systems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphClass {
    Empty,
    /// Parts in order of their smallest vertex. All-singleton parts mean a
    /// complete graph.
    CompleteMultipartite(Vec<BTreeSet<usize>>),
    /// Vertices in path order.
    Path(Vec<usize>),
    /// Vertices in cycle order.
    Cycle(Vec<usize>),
    Tree,
}

impl GraphClass {
    pub fn name(&self) -> &'static str {
        match self {
            GraphClass::Empty => "empty",
            GraphClass::CompleteMultipartite(p) if p.iter().all(|s| s.len() == 1) => "complete",
            GraphClass::CompleteMultipartite(p) if p.len() == 2 => "complete_bipartite",
            GraphClass::CompleteMultipartite(_) => "complete_mpartite",
            GraphClass::Path(_) => "path",
            GraphClass::Cycle(_) => "cycle",
            GraphClass::Tree => "tree",
        }
    }
}

pub fn detect_class(g: &LabeledGraph) -> Option<GraphClass> {
    let n = g.vertex_count();
    if g.edge_count() == 0 {
        return Some(GraphClass::Empty);
    }
    // Complete multipartite: non-adjacency is an equivalence relation, so
    // each part is a set of vertices with identical open neighborhoods.
    let mut parts: BTreeMap<Vec<usize>, BTreeSet<usize>> = BTreeMap::new();
    for v in g.vertices() {
        let key: Vec<usize> = g.neighbors(v).ok()?.collect();
        parts.entry(key).or_default().insert(v);
    }
    let is_multipartite = parts
        .iter()
        .all(|(nbrs, part)| nbrs.len() + part.len() == n && nbrs.iter().all(|w| !part.contains(w)));
    if is_multipartite && parts.len() >= 2 {
        let mut ps: Vec<BTreeSet<usize>> = parts.into_values().collect();
        ps.sort_by_key(|p| *p.iter().next().unwrap());
        return Some(GraphClass::CompleteMultipartite(ps));
    }
    if !g.is_connected() {
        return None;
    }
    let degrees: Vec<usize> = g.vertices().map(|v| g.degree(v).unwrap()).collect();
    let max_deg = *degrees.iter().max()?;
    if g.edge_count() + 1 == n {
        if max_deg <= 2 {
            let start = g.vertices().find(|&v| g.degree(v).unwrap() == 1)?;
            return Some(GraphClass::Path(walk(g, start)));
        }
        return Some(GraphClass::Tree);
    }
    if degrees.iter().all(|&d| d == 2) {
        let start = g.vertices().next()?;
        return Some(GraphClass::Cycle(walk(g, start)));
    }
    None
}

/// Vertex order along a path or cycle, heading to the lower-id neighbor first.
fn walk(g: &LabeledGraph, start: usize) -> Vec<usize> {
    let mut order = vec![start];
    let mut prev = None;
    let mut cur = start;
    while let Some(next) = g
        .neighbors(cur)
        .unwrap()
        .find(|&w| Some(w) != prev && w != start)
    {
        order.push(next);
        prev = Some(cur);
        cur = next;
    }
    order
}

fn closed_form_for_class(g: &LabeledGraph, class: &GraphClass) -> Result<Vec<BTreeSet<usize>>> {
    let n = g.vertex_count();
    let all: BTreeSet<usize> = g.vertices().collect();
    Ok(match class {
        GraphClass::Empty => Vec::new(),
        GraphClass::CompleteMultipartite(parts) if parts.len() == 2 => {
            let (mut small, mut big) = (parts[0].clone(), parts[1].clone());
            if small.len() > big.len() {
                std::mem::swap(&mut small, &mut big);
            }
            match small.len() {
                // A star, or a single edge.
                1 if big.len() == 1 => vec![all],
                1 => vec![all, big],
                // {x, y} against P: two cliques P+x, P+y overlap on P only.
                2 => small
                    .iter()
                    .map(|&x| {
                        let mut s = big.clone();
                        s.insert(x);
                        s
                    })
                    .collect(),
                _ => vec![all, parts[0].clone(), parts[1].clone()],
            }
        }
        GraphClass::CompleteMultipartite(parts) => std::iter::once(all)
            .chain(parts.iter().filter(|p| p.len() >= 2).cloned())
            .collect(),
        GraphClass::Path(order) => order
            .windows(2)
            .map(|w| BTreeSet::from([w[0], w[1]]))
            .collect(),
        // Fan of triangles from order[0]: interior spokes cancel in pairs.
        GraphClass::Cycle(order) => (1..n - 1)
            .map(|i| BTreeSet::from([order[0], order[i], order[i + 1]]))
            .collect(),
        GraphClass::Tree => tree_system(g)?,
    })
}

/// Root at the lowest-id max-degree vertex; each vertex's child star costs
/// one set for a single child and two sets otherwise.
fn tree_system(g: &LabeledGraph) -> Result<Vec<BTreeSet<usize>>> {
    let root = g
        .vertices()
        .max_by(|&a, &b| {
            g.degree(a)
                .unwrap()
                .cmp(&g.degree(b).unwrap())
                .then(b.cmp(&a))
        })
        .ok_or_else(|| Error::UnsupportedClass("empty tree".into()))?;
    let mut sets = Vec::new();
    let mut stack = vec![(root, None)];
    while let Some((v, parent)) = stack.pop() {
        let children: BTreeSet<usize> = g.neighbors(v)?.filter(|&w| Some(w) != parent).collect();
        match children.len() {
            0 => {}
            1 => sets.push(BTreeSet::from([v, *children.iter().next().unwrap()])),
            _ => {
                let mut closed = children.clone();
                closed.insert(v);
                sets.push(closed);
                sets.push(children.clone());
            }
        }
        for &c in children.iter().rev() {
            stack.push((c, Some(v)));
        }
    }
    Ok(sets)
}

/// Closed form for a named family.
pub fn closed_form_system(family: &GraphFamily) -> Result<ScSystem> {
    match family {
        GraphFamily::Wheel(_) | GraphFamily::Gnp { .. } => {
            return Err(Error::UnsupportedClass(family.to_string()))
        }
        _ => {}
    }
    let g = family.build();
    closed_form_for_graph(&g)?.ok_or_else(|| Error::UnsupportedClass(family.to_string()))
}

/// Closed form for any graph whose class is recognized.
pub fn closed_form_for_graph(g: &LabeledGraph) -> Result<Option<ScSystem>> {
    let n = dense_order(g)?;
    let Some(class) = detect_class(g) else {
        return Ok(None);
    };
    let sets = closed_form_for_class(g, &class)?;
    let sys = ScSystem::new(n, sets, Provenance::ClosedForm)?;
    sys.check_target(g)?;
    Ok(Some(sys))
}

/// Search for rows `r_u` in `GF(2)^d` with `<r_u, r_w> = A_uw` for all
/// `u != w`. Column `j` of the row matrix is the indicator of set `j`.
struct ExactSearch<'a> {
    adj: &'a [u64],
    n: usize,
    d: usize,
    rows: Vec<u32>,
}

impl ExactSearch<'_> {
    /// All `r` with `<r, rows[w]> = A_uw` for `w < u`.
    fn candidates(&self, u: usize) -> Vec<u32> {
        // Reduced echelon form on (mask, rhs) equations.
        let mut eqs: Vec<(u32, bool)> = Vec::new();
        for w in 0..u {
            let mut m = self.rows[w];
            let mut rhs = self.adj[u] >> w & 1 == 1;
            for &(pm, pr) in &eqs {
                let lead = 31 - pm.leading_zeros();
                if m >> lead & 1 == 1 {
                    m ^= pm;
                    rhs ^= pr;
                }
            }
            if m == 0 {
                if rhs {
                    return Vec::new();
                }
                continue;
            }
            let lead = 31 - m.leading_zeros();
            for e in eqs.iter_mut() {
                if e.0 >> lead & 1 == 1 {
                    e.0 ^= m;
                    e.1 ^= rhs;
                }
            }
            eqs.push((m, rhs));
        }
        let leads: u32 = eqs.iter().fold(0, |acc, &(m, _)| acc | 1 << (31 - m.leading_zeros()));
        let free: Vec<u32> = (0..self.d as u32).filter(|&j| leads >> j & 1 == 0).collect();
        let mut out = Vec::with_capacity(1 << free.len());
        for assign in 0u32..(1 << free.len()) {
            let mut r = 0u32;
            for (k, &j) in free.iter().enumerate() {
                r |= (assign >> k & 1) << j;
            }
            for &(m, rhs) in &eqs {
                let lead = 31 - m.leading_zeros();
                let rest = (m & !(1 << lead) & r).count_ones() % 2 == 1;
                r |= ((rhs ^ rest) as u32) << lead;
            }
            out.push(r);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    /// `ties` bit `j`: columns `j` and `j + 1` agree on all rows so far.
    fn dfs(&mut self, u: usize, ties: u32) -> bool {
        if u == self.n {
            return true;
        }
        for r in self.candidates(u) {
            // Tied columns must stay non-increasing (column symmetry).
            let lo = r & ties;
            let hi = (r >> 1) & ties;
            if hi & !lo != 0 {
                continue;
            }
            let diff = r ^ (r >> 1);
            self.rows.push(r);
            if self.dfs(u + 1, ties & !diff) {
                return true;
            }
            self.rows.pop();
        }
        false
    }
}

fn search_exact(g: &LabeledGraph, d: usize) -> Option<Vec<BTreeSet<usize>>> {
    let n = g.vertex_count();
    let adj: Vec<u64> = (0..n)
        .map(|u| g.neighbors(u).unwrap().fold(0u64, |acc, w| acc | 1 << w))
        .collect();
    let ties = if d == 0 { 0 } else { (1u32 << (d - 1)) - 1 };
    let mut s = ExactSearch {
        adj: &adj,
        n,
        d,
        rows: Vec::with_capacity(n),
    };
    if !s.dfs(0, ties) {
        return None;
    }
    let sets = (0..d)
        .map(|j| (0..n).filter(|&u| s.rows[u] >> j & 1 == 1).collect::<BTreeSet<_>>())
        .filter(|c| c.len() >= 2)
        .collect();
    Some(sets)
}

pub fn exact_min_system(g: &LabeledGraph) -> Result<ScSystem> {
    exact_min_system_with_limit(g, DEFAULT_EXACT_LIMIT)
}

/// Minimum system, searching only `d = mr` and `d = mr + 1`.
pub fn exact_min_system_with_limit(g: &LabeledGraph, limit: usize) -> Result<ScSystem> {
    let n = dense_order(g)?;
    check_exact_size(n, limit)?;
    let mr = gf2_linalg::min_rank_f2_with_limit(&g.adjacency(), limit)?.rank;
    for d in [mr, mr + 1] {
        if let Some(sets) = search_exact(g, d) {
            return ScSystem::new(n, sets, Provenance::Exact);
        }
    }
    Err(Error::SearchExhausted(mr + 1))
}

/// Iterative deepening from `d = 0`, with no minimum-rank seed.
pub fn exact_min_system_unseeded(g: &LabeledGraph, limit: usize) -> Result<ScSystem> {
    let n = dense_order(g)?;
    check_exact_size(n, limit)?;
    for d in 0..=n {
        if let Some(sets) = search_exact(g, d) {
            return ScSystem::new(n, sets, Provenance::Exact);
        }
    }
    Err(Error::SearchExhausted(n))
}

fn check_exact_size(n: usize, limit: usize) -> Result<()> {
    // Row masks are u32 and adjacency rows u64.
    let limit = limit.min(32);
    if n > limit {
        return Err(Error::SizeLimitExceeded {
            what: "exact_min_system",
            size: n,
            limit,
        });
    }
    Ok(())
}

/// Which producer the caller wants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Trivial,
    ClosedForm,
    Greedy,
    Elimination,
    Exact,
    /// Smallest of every producer that applies.
    Best,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "trivial" => Method::Trivial,
            "closed" | "closed_form" | "closed-form" => Method::ClosedForm,
            "greedy" => Method::Greedy,
            "elimination" => Method::Elimination,
            "exact" => Method::Exact,
            "best" | "auto" => Method::Best,
            _ => {
                return Err(Error::Parse(format!(
                    "unknown method `{s}` (trivial|closed|greedy|elimination|exact|best|auto)"
                )))
            }
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Trivial => "trivial",
            Method::ClosedForm => "closed",
            Method::Greedy => "greedy",
            Method::Elimination => "elimination",
            Method::Exact => "exact",
            Method::Best => "best",
        })
    }
}

pub fn solve(g: &LabeledGraph, method: Method, family: Option<&GraphFamily>) -> Result<ScSystem> {
    match method {
        Method::Trivial => trivial_system(g),
        Method::ClosedForm => match family {
            Some(f) => closed_form_system(f),
            None => closed_form_for_graph(g)?
                .ok_or_else(|| Error::UnsupportedClass("no recognized class".into())),
        },
        Method::Greedy => greedy_system(g),
        Method::Elimination => elimination_system(g),
        Method::Exact => exact_min_system(g),
        Method::Best => best_system(g, DEFAULT_EXACT_LIMIT),
    }
}

/// Smallest system among the producers that apply; ties keep the earlier
/// of exact, closed form, greedy, elimination.
pub fn best_system(g: &LabeledGraph, exact_limit: usize) -> Result<ScSystem> {
    let n = dense_order(g)?;
    let mut candidates = Vec::new();
    if n <= exact_limit {
        candidates.push(exact_min_system_with_limit(g, exact_limit)?);
    }
    if let Some(c) = closed_form_for_graph(g)? {
        candidates.push(c);
    }
    candidates.push(greedy_system(g)?);
    candidates.push(elimination_system(g)?);
    Ok(candidates
        .into_iter()
        .min_by_key(ScSystem::len)
        .expect("at least one producer"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct C2Report {
    pub n: usize,
    pub edges: usize,
    /// `mr(G, F2)`, or the best cut-rank found above the exhaustive limit.
    pub lower: usize,
    pub lower_is_min_rank: bool,
    pub upper: usize,
    pub exact: Option<usize>,
    /// Mean cut-rank over all bipartitions; `None` above its limit.
    pub avg_schmidt_rank: Option<Ratio<u64>>,
    pub class: Option<&'static str>,
    pub best: ScSystem,
}

impl C2Report {
    /// Known bounds that must hold; returns the violated ones.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.upper > self.n.saturating_sub(1) {
            out.push(format!("upper {} exceeds n - 1 = {}", self.upper, self.n.saturating_sub(1)));
        }
        if self.lower > self.upper {
            out.push(format!("lower {} exceeds upper {}", self.lower, self.upper));
        }
        if let Some(c2) = self.exact {
            if self.lower_is_min_rank && c2 != self.lower && c2 != self.lower + 1 {
                out.push(format!("c2 = {c2} outside {{mr, mr + 1}} with mr = {}", self.lower));
            }
            if c2 > self.upper || c2 < self.lower {
                out.push(format!("c2 = {c2} outside [{}, {}]", self.lower, self.upper));
            }
            if let Some(er) = self.avg_schmidt_rank {
                if self.edges > 0 && Ratio::from_integer(c2 as u64) <= er {
                    out.push(format!("c2 = {c2} is not above the mean cut-rank {er}"));
                }
            }
        }
        out
    }
}

pub fn c2_report(g: &LabeledGraph) -> Result<C2Report> {
    c2_report_with_limits(g, DEFAULT_MIN_RANK_LIMIT, DEFAULT_EXACT_LIMIT)
}

pub fn c2_report_with_limits(
    g: &LabeledGraph,
    min_rank_limit: usize,
    exact_limit: usize,
) -> Result<C2Report> {
    let n = dense_order(g)?;
    let (lower, lower_is_min_rank) = if n <= min_rank_limit {
        (gf2_linalg::min_rank_f2_with_limit(&g.adjacency(), min_rank_limit)?.rank, true)
    } else {
        (cut_rank_lower_bound(g)?, false)
    };
    let best = best_system(g, exact_limit)?;
    let exact = (n <= exact_limit).then(|| best.len());
    let avg_schmidt_rank = if n <= DEFAULT_CUT_RANK_LIMIT {
        Some(gf2_linalg::expected_cut_rank(g)?)
    } else {
        None
    };
    Ok(C2Report {
        n,
        edges: g.edge_count(),
        lower,
        lower_is_min_rank,
        upper: best.len(),
        exact,
        avg_schmidt_rank,
        class: detect_class(g).map(|c| c.name()),
        best,
    })
}

/// Any system of size `d` gives `A + D = B B^T` of rank at most `d`, and
/// every cut-rank is the rank of an off-diagonal block of `A + D`. The max
/// over a fixed family of cuts (prefixes and parity classes) is a lower
/// bound on `c2`.
fn cut_rank_lower_bound(g: &LabeledGraph) -> Result<usize> {
    let verts: Vec<usize> = g.vertices().collect();
    let mut best = 0;
    for k in 1..verts.len() {
        let prefix: BTreeSet<usize> = verts[..k].iter().copied().collect();
        best = best.max(gf2_linalg::cut_rank(g, &prefix)?);
    }
    let evens: BTreeSet<usize> = verts.iter().copied().step_by(2).collect();
    best = best.max(gf2_linalg::cut_rank(g, &evens)?);
    Ok(best)
}
