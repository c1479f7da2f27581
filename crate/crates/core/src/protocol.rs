//! Compile SC systems into round-by-round gate schedules on a star network,
//! plus the factory-node baseline, replay executors and resource tallies.
//!
//! Qubit ids: end qubit `c_v = v`, companion `a_v = n + v`. With the hub as
//! a graph vertex `h`, the hub qubit `a0` is `h` itself; otherwise it is
//! `2n`. Auxiliary qubits (parallel mode) and factory qubits follow.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph_state::{generators, GraphFamily, LabeledGraph};
use crate::sc_solver::{self, dense_order, Method, ScSystem};
use crate::stabilizer_oracle::{Gate, StabilizerTableau};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Cz,
    Lc,
    MeasZ,
    MeasY,
    /// X measurement of `q1`, realized with neighbor `q2` as pivot.
    MeasX,
    /// Pre-shared Bell pair; untimed and noiseless.
    BellPrep,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Cz => "CZ",
            OpKind::Lc => "LC",
            OpKind::MeasZ => "MeasZ",
            OpKind::MeasY => "MeasY",
            OpKind::MeasX => "MeasX",
            OpKind::BellPrep => "BellPrep",
        }
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, OpKind::MeasZ | OpKind::MeasY | OpKind::MeasX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Setup,
    Sc(usize),
    Reset(usize),
    Finalize,
    Build,
    Teleport,
    Ghz,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Setup => f.write_str("setup"),
            Phase::Sc(i) => write!(f, "sc:{i}"),
            Phase::Reset(i) => write!(f, "reset:{i}"),
            Phase::Finalize => f.write_str("finalize"),
            Phase::Build => f.write_str("build"),
            Phase::Teleport => f.write_str("teleport"),
            Phase::Ghz => f.write_str("ghz"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GateOp {
    pub kind: OpKind,
    pub q1: usize,
    pub q2: Option<usize>,
    pub phase: Phase,
}

impl GateOp {
    pub fn cz(a: usize, b: usize, phase: Phase) -> Self {
        GateOp { kind: OpKind::Cz, q1: a, q2: Some(b), phase }
    }

    pub fn lc(q: usize, phase: Phase) -> Self {
        GateOp { kind: OpKind::Lc, q1: q, q2: None, phase }
    }

    pub fn meas_z(q: usize, phase: Phase) -> Self {
        GateOp { kind: OpKind::MeasZ, q1: q, q2: None, phase }
    }

    pub fn meas_y(q: usize, phase: Phase) -> Self {
        GateOp { kind: OpKind::MeasY, q1: q, q2: None, phase }
    }

    pub fn meas_x(q: usize, pivot: usize, phase: Phase) -> Self {
        GateOp { kind: OpKind::MeasX, q1: q, q2: Some(pivot), phase }
    }

    pub fn bell(a: usize, c: usize) -> Self {
        GateOp { kind: OpKind::BellPrep, q1: a, q2: Some(c), phase: Phase::Setup }
    }

    pub fn support(&self) -> impl Iterator<Item = usize> {
        std::iter::once(self.q1).chain(self.q2)
    }

    /// Graph-level primitive steps. Composites expand in execution order.
    pub fn lower(&self) -> Vec<Primitive> {
        match self.kind {
            OpKind::Cz | OpKind::BellPrep => vec![Primitive::Cz(self.q1, self.q2.unwrap())],
            OpKind::Lc => vec![Primitive::Lc(self.q1)],
            OpKind::MeasZ => vec![Primitive::MeasZ(self.q1)],
            OpKind::MeasY => vec![Primitive::Lc(self.q1), Primitive::MeasZ(self.q1)],
            OpKind::MeasX => match self.q2 {
                Some(b) => vec![
                    Primitive::Lc(b),
                    Primitive::Lc(self.q1),
                    Primitive::MeasZ(self.q1),
                    Primitive::Lc(b),
                ],
                None => vec![Primitive::MeasZ(self.q1)],
            },
        }
    }
}

/// Steps every op reduces to. `MeasZ` includes its outcome-conditioned
/// corrections, so it acts on graphs as plain vertex deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primitive {
    Cz(usize, usize),
    Lc(usize),
    MeasZ(usize),
}

impl Primitive {
    pub fn apply(&self, g: &mut LabeledGraph) -> Result<()> {
        match *self {
            Primitive::Cz(a, b) => g.toggle_edge(a, b),
            Primitive::Lc(v) => g.local_complement(v),
            Primitive::MeasZ(v) => g.remove_vertex(v),
        }
    }

    pub fn apply_oracle<R: Rng + ?Sized>(&self, t: &mut StabilizerTableau, rng: &mut R) -> Result<()> {
        match *self {
            Primitive::Cz(a, b) => t.apply_gate(Gate::Cz(a, b)),
            Primitive::Lc(v) => t.apply_gate(Gate::Lc(v)),
            Primitive::MeasZ(v) => t.measure_z_corrected(v, rng).map(|_| ()),
        }
    }
}

/// Apply one op to a graph through the graph rules.
pub fn apply_op(g: &mut LabeledGraph, op: &GateOp) -> Result<()> {
    if op.kind == OpKind::MeasX {
        if let Some(b) = op.q2 {
            if !g.has_edge(op.q1, b) {
                return Err(Error::ProtocolOrderViolation(format!(
                    "X-measurement pivot {b} is not a neighbor of {}",
                    op.q1
                )));
            }
        }
    }
    for p in op.lower() {
        p.apply(g)?;
    }
    Ok(())
}

pub type Rounds = Vec<Vec<GateOp>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub protocol: String,
    /// Every qubit used; all start in `|+>`.
    pub qubits: BTreeSet<usize>,
    pub central: BTreeSet<usize>,
    /// Qubits alive at the end; they carry the target state.
    pub outputs: BTreeSet<usize>,
    pub target: LabeledGraph,
    pub setup: Vec<GateOp>,
    pub rounds: Rounds,
}

impl Schedule {
    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    pub fn ops(&self) -> impl Iterator<Item = &GateOp> {
        self.setup.iter().chain(self.rounds.iter().flatten())
    }

    pub fn op_count(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    /// Structural checks: declared qubits, disjoint supports within a round,
    /// no op after a qubit is measured, and the live set ends as `outputs`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ProtocolOrderViolation(msg));
        let mut dead = BTreeSet::new();
        for (r, round) in std::iter::once(&self.setup).chain(&self.rounds).enumerate() {
            let mut used = BTreeSet::new();
            for op in round {
                if op.q2 == Some(op.q1) {
                    return bad(format!("round {r}: {} repeats qubit {}", op.kind.name(), op.q1));
                }
                for q in op.support() {
                    if !self.qubits.contains(&q) {
                        return Err(Error::UnknownQubit(q));
                    }
                    if dead.contains(&q) {
                        return bad(format!("round {r}: qubit {q} used after measurement"));
                    }
                    if !used.insert(q) {
                        return bad(format!("round {r}: qubit {q} touched twice"));
                    }
                }
            }
            for op in round.iter().filter(|op| op.kind.is_measurement()) {
                dead.insert(op.q1);
            }
        }
        let live: BTreeSet<usize> = self.qubits.difference(&dead).copied().collect();
        if live != self.outputs {
            return bad(format!("live qubits {live:?} differ from outputs {:?}", self.outputs));
        }
        Ok(())
    }

    /// Noiseless replay through the graph rules.
    pub fn replay_graph(&self) -> Result<LabeledGraph> {
        let mut g = LabeledGraph::with_vertices(self.qubits.iter().copied());
        for op in self.ops() {
            apply_op(&mut g, op)?;
        }
        Ok(g)
    }

    /// Noiseless replay on the stabilizer oracle with random outcomes.
    pub fn replay_oracle<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<StabilizerTableau> {
        let mut t = StabilizerTableau::plus_state(self.qubits.iter().copied())?;
        for op in self.ops() {
            for p in op.lower() {
                p.apply_oracle(&mut t, rng)?;
            }
        }
        Ok(t)
    }

    /// Structural checks, then graph replay against the target.
    pub fn verify_graph(&self) -> Result<()> {
        self.validate()?;
        let got = self.replay_graph()?;
        if got != self.target {
            return Err(Error::TargetMismatch(format!(
                "{} schedule ends in {got:?}, expected {:?}",
                self.protocol, self.target
            )));
        }
        Ok(())
    }

    pub fn verify_oracle<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<()> {
        let t = self.replay_oracle(rng)?;
        let expect = StabilizerTableau::from_graph(&self.target)?;
        if !t.stabilizer_equal(&expect)? {
            return Err(Error::TargetMismatch(format!(
                "{} schedule: oracle state differs from the target graph state",
                self.protocol
            )));
        }
        Ok(())
    }

    /// Columns: round, op_kind, qubit1, qubit2, phase_annotation. Setup ops
    /// are round 0; timed rounds start at 1.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["round", "op_kind", "qubit1", "qubit2", "phase_annotation"])?;
        let numbered = self
            .setup
            .iter()
            .map(|op| (0, op))
            .chain(self.rounds.iter().enumerate().flat_map(|(r, ops)| ops.iter().map(move |op| (r + 1, op))));
        for (r, op) in numbered {
            out.write_record([
                r.to_string(),
                op.kind.name().to_string(),
                op.q1.to_string(),
                op.q2.map(|q| q.to_string()).unwrap_or_default(),
                op.phase.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ResourceReport {
    pub bell_pairs: usize,
    pub central_qubit_highwater: usize,
    pub cz_count: usize,
    pub lc_count: usize,
    pub meas_count: usize,
    pub rounds: usize,
    pub cc_bits: usize,
}

impl fmt::Display for ResourceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "bell_pairs {}\ncentral_qubits {}\ncz {}\nlc {}\nmeas {}\nrounds {}\ncc_bits {}",
            self.bell_pairs,
            self.central_qubit_highwater,
            self.cz_count,
            self.lc_count,
            self.meas_count,
            self.rounds,
            self.cc_bits
        )
    }
}

/// Exact tallies. Classical communication counts one bit per remote qubit
/// that a gate or correction must reach (LC byproducts on neighbors,
/// measurement corrections) plus one bit per remote measurement outcome.
pub fn resources(s: &Schedule) -> ResourceReport {
    let mut rep = ResourceReport {
        rounds: s.rounds.len(),
        ..Default::default()
    };
    for op in s.ops() {
        match op.kind {
            OpKind::Cz => rep.cz_count += 1,
            OpKind::Lc => rep.lc_count += 1,
            OpKind::BellPrep => rep.bell_pairs += 1,
            _ => rep.meas_count += 1,
        }
    }

    let mut born = BTreeSet::new();
    let mut live_central = 0usize;
    for round in std::iter::once(&s.setup).chain(&s.rounds) {
        for q in round.iter().flat_map(GateOp::support) {
            if s.central.contains(&q) && born.insert(q) {
                live_central += 1;
            }
        }
        rep.central_qubit_highwater = rep.central_qubit_highwater.max(live_central);
        for op in round.iter().filter(|op| op.kind.is_measurement()) {
            if s.central.contains(&op.q1) {
                live_central -= 1;
            }
        }
    }

    let remote = |q: usize| !s.central.contains(&q);
    let mut g = LabeledGraph::with_vertices(s.qubits.iter().copied());
    'ops: for op in s.ops() {
        if op.kind == OpKind::BellPrep {
            let _ = apply_op(&mut g, op);
            continue;
        }
        for p in op.lower() {
            let touched: Vec<usize> = match p {
                Primitive::Cz(a, b) => vec![a, b],
                Primitive::Lc(v) => {
                    let mut t = vec![v];
                    if let Ok(n) = g.neighbors(v) {
                        t.extend(n);
                    }
                    t
                }
                Primitive::MeasZ(v) => {
                    if remote(v) {
                        rep.cc_bits += 1;
                    }
                    g.neighbors(v).map(|n| n.collect()).unwrap_or_default()
                }
            };
            rep.cc_bits += touched.into_iter().filter(|&q| remote(q)).count();
            if p.apply(&mut g).is_err() {
                break 'ops;
            }
        }
    }
    rep
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HubChoice {
    /// Lowest-id vertex of maximum degree.
    #[default]
    Auto,
    Vertex(usize),
    /// The central node holds no graph vertex.
    External,
}

pub fn choose_hub(g: &LabeledGraph, choice: HubChoice) -> Result<Option<usize>> {
    match choice {
        HubChoice::External => Ok(None),
        HubChoice::Vertex(h) => {
            if g.contains(h) {
                Ok(Some(h))
            } else {
                Err(Error::UnknownVertex(h))
            }
        }
        HubChoice::Auto => Ok(g
            .vertices()
            .max_by(|&a, &b| g.degree(a).unwrap().cmp(&g.degree(b).unwrap()).then(b.cmp(&a)))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkLayout {
    pub n: usize,
    pub hub_vertex: Option<usize>,
    /// `a0`.
    pub hub: usize,
    /// End vertex -> central companion `a_i`.
    pub companions: BTreeMap<usize, usize>,
    /// End vertex -> end-node qubit `c_i`.
    pub end_qubits: BTreeMap<usize, usize>,
    pub bell_pairs: Vec<(usize, usize)>,
    /// First id free for auxiliary qubits.
    pub first_free: usize,
}

impl NetworkLayout {
    pub fn companion(&self, v: usize) -> Result<usize> {
        self.companions.get(&v).copied().ok_or(Error::DeadCompanion(v))
    }

    fn companions_of(&self, set: &BTreeSet<usize>) -> Result<Vec<usize>> {
        set.iter().map(|&v| self.companion(v)).collect()
    }

    /// Central qubits: hub and companions.
    pub fn central(&self) -> BTreeSet<usize> {
        std::iter::once(self.hub).chain(self.companions.values().copied()).collect()
    }

    pub fn qubits(&self) -> BTreeSet<usize> {
        let mut q = self.central();
        q.extend(self.end_qubits.values().copied());
        q
    }

    /// Qubits carrying the final state.
    pub fn outputs(&self) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self.end_qubits.values().copied().collect();
        if self.hub_vertex.is_some() {
            out.insert(self.hub);
        }
        out
    }
}

/// Layout plus the untimed Bell-pair setup round.
pub fn init_network(g: &LabeledGraph, hub_vertex: Option<usize>) -> Result<(NetworkLayout, Vec<GateOp>)> {
    let n = dense_order(g)?;
    if let Some(h) = hub_vertex {
        if h >= n {
            return Err(Error::UnknownVertex(h));
        }
    }
    let ends: Vec<usize> = (0..n).filter(|&v| Some(v) != hub_vertex).collect();
    let companions: BTreeMap<usize, usize> = ends.iter().map(|&v| (v, n + v)).collect();
    let end_qubits: BTreeMap<usize, usize> = ends.iter().map(|&v| (v, v)).collect();
    let bell_pairs: Vec<(usize, usize)> = ends.iter().map(|&v| (n + v, v)).collect();
    let setup = bell_pairs.iter().map(|&(a, c)| GateOp::bell(a, c)).collect();
    let layout = NetworkLayout {
        n,
        hub_vertex,
        hub: hub_vertex.unwrap_or(2 * n),
        companions,
        end_qubits,
        bell_pairs,
        first_free: 2 * n + usize::from(hub_vertex.is_none()),
    };
    Ok((layout, setup))
}

/// How the protocol toggles star edges between a center and companions.
pub(crate) trait StarOps {
    /// Center of the SC stars (`a0` serially, `q0` in parallel mode).
    fn center(&self) -> usize;
    /// Whether the center is an output qubit and must survive finalization.
    fn center_is_output(&self) -> bool;
    fn open(&self, phase: Phase) -> Rounds;
    fn close(&self, phase: Phase) -> Rounds;
    /// Toggle the edges center–`a` for each listed companion.
    fn outer(&self, companions: &[usize], phase: Phase) -> Rounds;
    /// Toggle hub–companion edges at finalization.
    fn hub_star(&self, hub: usize, companions: &[usize]) -> Rounds;
    /// Auxiliary qubits measured out at the end.
    fn auxiliaries(&self) -> Vec<usize>;
}

pub(crate) fn serial_star(center: usize, leaves: &[usize], phase: Phase) -> Rounds {
    leaves.iter().map(|&a| vec![GateOp::cz(a, center, phase)]).collect()
}

struct SerialStar {
    hub: usize,
    hub_is_output: bool,
}

impl StarOps for SerialStar {
    fn center(&self) -> usize {
        self.hub
    }
    fn center_is_output(&self) -> bool {
        self.hub_is_output
    }
    fn open(&self, _: Phase) -> Rounds {
        Vec::new()
    }
    fn close(&self, _: Phase) -> Rounds {
        Vec::new()
    }
    fn outer(&self, companions: &[usize], phase: Phase) -> Rounds {
        serial_star(self.hub, companions, phase)
    }
    fn hub_star(&self, hub: usize, companions: &[usize]) -> Rounds {
        serial_star(hub, companions, Phase::Finalize)
    }
    fn auxiliaries(&self) -> Vec<usize> {
        Vec::new()
    }
}

fn lc_round(qubits: &[usize], phase: Phase) -> Rounds {
    if qubits.is_empty() {
        Vec::new()
    } else {
        vec![qubits.iter().map(|&q| GateOp::lc(q, phase)).collect()]
    }
}

/// One SC on the companions `a`: star toggle, LC of each companion, star
/// toggle, LC of the center.
fn sc_fragment(star: &dyn StarOps, a: &[usize], i: usize) -> Rounds {
    let p = Phase::Sc(i);
    let mut r = star.open(p);
    r.extend(star.outer(a, p));
    r.extend(lc_round(a, p));
    r.extend(star.outer(a, p));
    r.extend(star.close(p));
    r.push(vec![GateOp::lc(star.center(), p)]);
    r
}

/// Remove the center-to-end edges an SC on `a` leaves behind: star toggle,
/// LC of each companion and star toggle, with no LC of the center.
fn reset_fragment(star: &dyn StarOps, a: &[usize], i: usize) -> Rounds {
    let p = Phase::Reset(i);
    let mut r = star.open(p);
    r.extend(star.outer(a, p));
    r.extend(lc_round(a, p));
    r.extend(star.outer(a, p));
    r.extend(star.close(p));
    r
}

/// Reset of `prev` fused with the SC on `next`: the two adjacent star
/// toggles collapse onto the symmetric difference.
fn merged_fragment(star: &dyn StarOps, prev: &[usize], next: &[usize], i: usize) -> Rounds {
    let (pr, p) = (Phase::Reset(i - 1), Phase::Sc(i));
    let prev_set: BTreeSet<usize> = prev.iter().copied().collect();
    let next_set: BTreeSet<usize> = next.iter().copied().collect();
    let diff: Vec<usize> = prev_set.symmetric_difference(&next_set).copied().collect();
    let mut r = star.open(pr);
    r.extend(star.outer(prev, pr));
    r.extend(lc_round(prev, pr));
    r.extend(star.outer(&diff, p));
    r.extend(lc_round(next, p));
    r.extend(star.outer(next, p));
    r.extend(star.close(p));
    r.push(vec![GateOp::lc(star.center(), p)]);
    r
}

/// Hub edges to the end qubits of `toggle`, then measure out companions,
/// the non-output center and auxiliaries.
fn finalize_fragment(
    layout: &NetworkLayout,
    star: &dyn StarOps,
    toggle: &BTreeSet<usize>,
) -> Result<Rounds> {
    let a = layout.companions_of(toggle)?;
    let mut r = star.hub_star(layout.hub, &a);
    r.extend(lc_round(&a, Phase::Finalize));
    let mut measured: Vec<usize> = layout.companions.values().copied().collect();
    if !star.center_is_output() {
        measured.push(star.center());
    }
    if layout.hub_vertex.is_none() && star.center() != layout.hub {
        measured.push(layout.hub);
    }
    measured.extend(star.auxiliaries());
    measured.sort_unstable();
    measured.dedup();
    if !measured.is_empty() {
        r.push(measured.into_iter().map(|q| GateOp::meas_z(q, Phase::Finalize)).collect());
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistributeOptions {
    pub hub: HubChoice,
    /// Fuse each reset with the next SC round's first star toggle.
    pub merge_resets: bool,
    /// Skip the last reset when finalization can absorb it.
    pub elide_final_reset: bool,
    /// Reorder the system's sets to minimize (ops, rounds).
    pub optimize_order: bool,
}

impl Default for DistributeOptions {
    fn default() -> Self {
        DistributeOptions {
            hub: HubChoice::Auto,
            merge_resets: true,
            elide_final_reset: true,
            optimize_order: true,
        }
    }
}

impl DistributeOptions {
    /// Every SC round followed by a full reset, in system order.
    pub fn plain() -> Self {
        DistributeOptions {
            hub: HubChoice::Auto,
            merge_resets: false,
            elide_final_reset: false,
            optimize_order: false,
        }
    }
}

fn cost(r: &Rounds) -> (usize, usize) {
    (r.iter().map(Vec::len).sum(), r.len())
}

/// SC rounds, resets and finalization for sets in the given order.
pub(crate) fn compile_rounds(
    layout: &NetworkLayout,
    g: &LabeledGraph,
    sets: &[BTreeSet<usize>],
    opts: &DistributeOptions,
    star: &dyn StarOps,
) -> Result<Rounds> {
    let comps: Vec<Vec<usize>> = sets.iter().map(|s| layout.companions_of(s)).collect::<Result<_>>()?;
    let mut rounds = Rounds::new();
    for (i, a) in comps.iter().enumerate() {
        if i > 0 && opts.merge_resets {
            rounds.extend(merged_fragment(star, &comps[i - 1], a, i));
        } else {
            if i > 0 {
                rounds.extend(reset_fragment(star, &comps[i - 1], i - 1));
            }
            rounds.extend(sc_fragment(star, a, i));
        }
    }
    let hub_nbrs: BTreeSet<usize> = match layout.hub_vertex {
        Some(h) => g.neighborhood(h)?.clone(),
        None => BTreeSet::new(),
    };
    let Some(last) = sets.last() else {
        rounds.extend(finalize_fragment(layout, star, &hub_nbrs)?);
        return Ok(rounds);
    };
    let last_a = comps.last().unwrap();
    let mut with_reset = reset_fragment(star, last_a, sets.len() - 1);
    with_reset.extend(finalize_fragment(layout, star, &hub_nbrs)?);
    let tail = if !opts.elide_final_reset {
        with_reset
    } else if !star.center_is_output() {
        // The center is measured out, which drops its star to the end qubits.
        finalize_fragment(layout, star, &hub_nbrs)?
    } else {
        let toggle: BTreeSet<usize> = last.symmetric_difference(&hub_nbrs).copied().collect();
        let elided = finalize_fragment(layout, star, &toggle)?;
        if cost(&elided) <= cost(&with_reset) {
            elided
        } else {
            with_reset
        }
    };
    rounds.extend(tail);
    Ok(rounds)
}

/// Every permutation up to 7 sets; otherwise nearest-neighbor chains by
/// symmetric difference from each start.
pub(crate) fn best_order(
    sets: &[BTreeSet<usize>],
    mut cost_of: impl FnMut(&[BTreeSet<usize>]) -> Result<(usize, usize)>,
) -> Result<Vec<BTreeSet<usize>>> {
    let d = sets.len();
    let mut best: Option<((usize, usize), Vec<usize>)> = None;
    let mut consider = |order: &[usize], best: &mut Option<((usize, usize), Vec<usize>)>| -> Result<()> {
        let ordered: Vec<BTreeSet<usize>> = order.iter().map(|&i| sets[i].clone()).collect();
        let c = cost_of(&ordered)?;
        if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            *best = Some((c, order.to_vec()));
        }
        Ok(())
    };
    if d <= 7 {
        let mut order: Vec<usize> = (0..d).collect();
        let mut result = Ok(());
        permutations(&mut order, 0, &mut |o| {
            if result.is_ok() {
                result = consider(o, &mut best);
            }
        });
        result?;
    } else {
        for start in 0..d {
            let mut order = vec![start];
            let mut left: Vec<usize> = (0..d).filter(|&i| i != start).collect();
            while !left.is_empty() {
                let cur = &sets[*order.last().unwrap()];
                let (pos, _) = left
                    .iter()
                    .enumerate()
                    .min_by_key(|&(_, &i)| (cur.symmetric_difference(&sets[i]).count(), i))
                    .unwrap();
                order.push(left.remove(pos));
            }
            consider(&order, &mut best)?;
        }
    }
    let (_, order) = best.expect("at least the empty order");
    Ok(order.into_iter().map(|i| sets[i].clone()).collect())
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

/// The graph a system must reproduce when `hub` is handled at finalization:
/// `g` with the hub's edges removed.
pub fn hub_stripped(g: &LabeledGraph, hub: Option<usize>) -> Result<LabeledGraph> {
    let mut out = g.clone();
    if let Some(h) = hub {
        let nbrs: Vec<usize> = out.neighbors(h)?.collect();
        for w in nbrs {
            out.toggle_edge(h, w)?;
        }
    }
    Ok(out)
}

/// Solve for `g` minus the hub and lift the sets back to the original ids.
pub fn hub_system(
    g: &LabeledGraph,
    hub: Option<usize>,
    method: Method,
    family: Option<&GraphFamily>,
) -> Result<ScSystem> {
    let n = dense_order(g)?;
    let Some(h) = hub else {
        return sc_solver::solve(g, method, family);
    };
    let keep: BTreeSet<usize> = (0..n).filter(|&v| v != h).collect();
    let reduced = g.induced(&keep).relabel(|v| if v > h { v - 1 } else { v });
    let sys = sc_solver::solve(&reduced, method, None)?;
    let lifted = sys
        .sets()
        .iter()
        .map(|s| s.iter().map(|&v| if v >= h { v + 1 } else { v }).collect())
        .collect();
    ScSystem::new(n, lifted, sys.provenance())
}

pub(crate) fn check_system(g: &LabeledGraph, system: &ScSystem, hub: Option<usize>) -> Result<()> {
    let n = dense_order(g)?;
    if system.vertex_count() != n {
        return Err(Error::SystemMismatch(format!(
            "system on {} vertices for a graph on {n}",
            system.vertex_count()
        )));
    }
    if let Some(h) = hub {
        if system.sets().iter().any(|s| s.contains(&h)) {
            return Err(Error::SystemMismatch(format!(
                "sets may not contain the hub vertex {h}"
            )));
        }
    }
    system.check_target(&hub_stripped(g, hub)?)
}

pub(crate) fn assemble(
    protocol: &str,
    layout: &NetworkLayout,
    extra_central: &[usize],
    target: &LabeledGraph,
    setup: Vec<GateOp>,
    rounds: Rounds,
) -> Result<Schedule> {
    let mut central = layout.central();
    central.extend(extra_central);
    let mut qubits = layout.qubits();
    qubits.extend(extra_central);
    let s = Schedule {
        protocol: protocol.to_string(),
        qubits,
        central,
        outputs: layout.outputs(),
        target: target.clone(),
        setup,
        rounds,
    };
    s.verify_graph()?;
    Ok(s)
}

/// Serial SC distribution of `g` using `system` (built for `g` minus the hub).
pub fn distribute(
    g: &LabeledGraph,
    system: &ScSystem,
    opts: &DistributeOptions,
) -> Result<(Schedule, ResourceReport)> {
    let hub = choose_hub(g, opts.hub)?;
    check_system(g, system, hub)?;
    let (layout, setup) = init_network(g, hub)?;
    let star = SerialStar {
        hub: layout.hub,
        hub_is_output: hub.is_some(),
    };
    let sets = if opts.optimize_order {
        best_order(system.sets(), |o| compile_rounds(&layout, g, o, opts, &star).map(|r| cost(&r)))?
    } else {
        system.sets().to_vec()
    };
    let rounds = compile_rounds(&layout, g, &sets, opts, &star)?;
    let s = assemble("sc", &layout, &[], g, setup, rounds)?;
    let rep = resources(&s);
    Ok((s, rep))
}

/// One SC round on the end vertices `set`.
pub fn schedule_sc_round(layout: &NetworkLayout, set: &BTreeSet<usize>, index: usize) -> Result<Rounds> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("SC round on an empty set".into()));
    }
    let a = layout.companions_of(set)?;
    Ok(sc_fragment(&serial_ops(layout), &a, index))
}

fn serial_ops(layout: &NetworkLayout) -> SerialStar {
    SerialStar {
        hub: layout.hub,
        hub_is_output: layout.hub_vertex.is_some(),
    }
}

/// Edge reset after an SC round on `set`; `state` is the graph right after
/// that round.
pub fn schedule_edge_reset(
    layout: &NetworkLayout,
    set: &BTreeSet<usize>,
    state: &LabeledGraph,
    index: usize,
) -> Result<Rounds> {
    let expected: BTreeSet<usize> = set.iter().map(|v| layout.end_qubits[v]).collect();
    if state.neighborhood(layout.hub)? != &expected {
        return Err(Error::ProtocolOrderViolation(format!(
            "edge reset on {set:?} must directly follow its SC round"
        )));
    }
    let a = layout.companions_of(set)?;
    Ok(reset_fragment(&serial_ops(layout), &a, index))
}

/// Hub edges and measurements. `state` is the current graph; its end-qubit
/// part must already equal `g` without the hub.
pub fn schedule_finalize(layout: &NetworkLayout, g: &LabeledGraph, state: &LabeledGraph) -> Result<Rounds> {
    let ends: BTreeSet<usize> = layout.end_qubits.values().copied().collect();
    let want = hub_stripped(g, layout.hub_vertex)?.induced(&ends);
    if state.induced(&ends) != want {
        return Err(Error::TargetMismatch("end-qubit graph is not the target yet".into()));
    }
    let hub_now: BTreeSet<usize> = state.neighborhood(layout.hub)?.intersection(&ends).copied().collect();
    let hub_want: BTreeSet<usize> = match layout.hub_vertex {
        Some(h) => g.neighborhood(h)?.clone(),
        None => BTreeSet::new(),
    };
    let toggle = hub_now.symmetric_difference(&hub_want).copied().collect();
    finalize_fragment(layout, &serial_ops(layout), &toggle)
}

/// The single-SC clique protocol on `k` vertices: hub vertex 0 plus one SC
/// over the other `k - 1` end vertices, then companions measured out.
pub fn schedule_clique(k: usize) -> Result<(Schedule, ResourceReport)> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("clique protocol needs k >= 2, got {k}")));
    }
    let g = generators::complete(k);
    let (layout, setup) = init_network(&g, Some(0))?;
    let set: BTreeSet<usize> = (1..k).collect();
    let opts = DistributeOptions::default();
    let rounds = compile_rounds(&layout, &g, &[set], &opts, &serial_ops(&layout))?;
    let s = assemble("sc", &layout, &[], &g, setup, rounds)?;
    let rep = resources(&s);
    Ok((s, rep))
}

/// Rounds of a proper edge coloring: circle method for complete graphs,
/// first-fit in lexicographic edge order otherwise.
pub fn edge_coloring(g: &LabeledGraph) -> Vec<Vec<(usize, usize)>> {
    let verts: Vec<usize> = g.vertices().collect();
    let n = verts.len();
    if n >= 2 && g.is_complete() {
        let m = if n.is_multiple_of(2) { n } else { n + 1 };
        let mut rounds = Vec::new();
        for r in 0..m - 1 {
            let mut pairs = Vec::new();
            let mut add = |x: usize, y: usize| {
                if x < n && y < n {
                    let (a, b) = (verts[x.min(y)], verts[x.max(y)]);
                    pairs.push((a, b));
                }
            };
            add(r, m - 1);
            for i in 1..m / 2 {
                add((r + i) % (m - 1), (r + m - 1 - i) % (m - 1));
            }
            pairs.sort_unstable();
            rounds.push(pairs);
        }
        return rounds;
    }
    let mut rounds: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut used: Vec<BTreeSet<usize>> = Vec::new();
    for (a, b) in g.edges() {
        let c = (0..).find(|&c| c >= used.len() || (!used[c].contains(&a) && !used[c].contains(&b))).unwrap();
        if c == used.len() {
            used.push(BTreeSet::new());
            rounds.push(Vec::new());
        }
        used[c].insert(a);
        used[c].insert(b);
        rounds[c].push((a, b));
    }
    rounds
}

/// Build `g` on factory qubits at the central node, then teleport each one
/// to its end node over a Bell pair.
pub fn baseline_factory(g: &LabeledGraph, parallel: bool) -> Result<(Schedule, ResourceReport)> {
    let n = dense_order(g)?;
    let half = |v: usize| n + v;
    let fq = |v: usize| 2 * n + v;
    let setup: Vec<GateOp> = (0..n).map(|v| GateOp::bell(half(v), v)).collect();
    let mut rounds = Rounds::new();
    let b = Phase::Build;
    if parallel {
        for colour in edge_coloring(g) {
            rounds.push(colour.into_iter().map(|(u, v)| GateOp::cz(fq(u), fq(v), b)).collect());
        }
    } else if n >= 3 && g.is_complete() {
        // Star at q_0, then LC(q_0) complements the leaves into a clique.
        rounds.extend((1..n).map(|v| vec![GateOp::cz(fq(0), fq(v), b)]));
        rounds.push(vec![GateOp::lc(fq(0), b)]);
    } else {
        rounds.extend(g.edges().map(|(u, v)| vec![GateOp::cz(fq(u), fq(v), b)]));
    }
    let t = Phase::Teleport;
    if n > 0 {
        rounds.push((0..n).map(|v| GateOp::cz(fq(v), half(v), t)).collect());
        rounds.push((0..n).map(|v| GateOp::meas_x(fq(v), half(v), t)).collect());
        rounds.push((0..n).map(|v| GateOp::meas_z(half(v), t)).collect());
    }
    let central: BTreeSet<usize> = (n..3 * n).collect();
    let s = Schedule {
        protocol: if parallel { "factory-parallel" } else { "factory" }.to_string(),
        qubits: (0..3 * n).collect(),
        central,
        outputs: (0..n).collect(),
        target: g.clone(),
        setup,
        rounds,
    };
    s.verify_graph()?;
    let rep = resources(&s);
    Ok((s, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_state::generators;
    use crate::sc_solver::{closed_form_system, greedy_system};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    fn replay_rounds(start: &LabeledGraph, rounds: &Rounds) -> LabeledGraph {
        let mut g = start.clone();
        for op in rounds.iter().flatten() {
            apply_op(&mut g, op).unwrap();
        }
        g
    }

    /// Setup state of the network: Bell pairs only.
    fn network(g: &LabeledGraph, hub: Option<usize>) -> (NetworkLayout, LabeledGraph) {
        let (layout, setup) = init_network(g, hub).unwrap();
        let mut state = LabeledGraph::with_vertices(layout.qubits());
        for op in &setup {
            apply_op(&mut state, op).unwrap();
        }
        (layout, state)
    }

    #[test]
    fn init_examples() {
        let (layout, setup) = init_network(&generators::complete(4), Some(0)).unwrap();
        assert_eq!(setup.len(), 3);
        assert_eq!(layout.companions.len(), 3);
        assert_eq!(layout.central().len(), 4);
        let (_, setup) = init_network(&generators::complete(2), Some(0)).unwrap();
        assert_eq!(setup.len(), 1);
        let (layout, setup) = init_network(&generators::complete(4), None).unwrap();
        assert_eq!(setup.len(), 4);
        assert_eq!(layout.hub, 8);
    }

    #[test]
    fn sc_round_counts_and_effect() {
        let g = generators::complete(4);
        let (layout, state) = network(&g, Some(0));
        let r = schedule_sc_round(&layout, &set(&[1, 2, 3]), 0).unwrap();
        let ops: Vec<&GateOp> = r.iter().flatten().collect();
        assert_eq!(ops.iter().filter(|o| o.kind == OpKind::Cz).count(), 6);
        assert_eq!(ops.iter().filter(|o| o.kind == OpKind::Lc).count(), 4);
        assert_eq!(r.len(), 2 * 3 + 2);
        let after = replay_rounds(&state, &r);
        // Clique on the hub and the three end qubits, companions as pendants.
        assert_eq!(after.induced(&set(&[0, 1, 2, 3])), generators::complete(4));
        for v in 1..4 {
            assert_eq!(after.neighborhood(4 + v).unwrap(), &set(&[v]));
        }
    }

    #[test]
    fn reset_restores_pendants() {
        let g = generators::complete(5);
        let (layout, state) = network(&g, Some(0));
        let s = set(&[1, 2, 4]);
        let r = schedule_sc_round(&layout, &s, 0).unwrap();
        let mid = replay_rounds(&state, &r);
        let reset = schedule_edge_reset(&layout, &s, &mid, 0).unwrap();
        assert_eq!(reset.len(), 2 * 3 + 1);
        let after = replay_rounds(&mid, &reset);
        assert!(after.neighborhood(0).unwrap().is_empty());
        assert_eq!(after.induced(&set(&[1, 2, 3, 4])).edge_count(), 3);
        assert!(schedule_edge_reset(&layout, &s, &after, 0).is_err());

        // Twice on the same set undoes the imprint.
        let again = replay_rounds(&after, &r);
        let again = replay_rounds(&again, &schedule_edge_reset(&layout, &s, &again, 1).unwrap());
        assert_eq!(again, state);
    }

    #[test]
    fn finalize_examples() {
        // Star at the hub: finalization alone.
        let star = generators::star(5);
        let (layout, state) = network(&star, Some(0));
        let fin = schedule_finalize(&layout, &star, &state).unwrap();
        let end = replay_rounds(&state, &fin);
        assert_eq!(end, star);

        // Isolated hub: companions measured, nothing else.
        let e = LabeledGraph::from_edges(3, &[(1, 2)]).unwrap();
        let (layout, state) = network(&e, Some(0));
        assert!(schedule_finalize(&layout, &e, &state).is_err());
    }

    #[test]
    fn distribute_examples() {
        let k10 = generators::complete(10);
        let sys = hub_system(&k10, Some(0), Method::ClosedForm, None).unwrap();
        assert_eq!(sys.len(), 1);
        let (s, rep) = distribute(&k10, &sys, &DistributeOptions::default()).unwrap();
        assert_eq!(rep.bell_pairs, 9);
        assert_eq!(rep.central_qubit_highwater, 10);
        assert_eq!(rep.rounds, s.round_count());

        let empty = LabeledGraph::with_vertices(0..4);
        let sys = hub_system(&empty, Some(0), Method::Greedy, None).unwrap();
        let (_, rep) = distribute(&empty, &sys, &DistributeOptions::default()).unwrap();
        assert_eq!((rep.cz_count, rep.lc_count, rep.meas_count), (0, 0, 3));

        let bad = ScSystem::new(10, vec![set(&[0, 1])], crate::sc_solver::Provenance::External).unwrap();
        assert!(matches!(
            distribute(&k10, &bad, &DistributeOptions::default()),
            Err(Error::SystemMismatch(_))
        ));
    }

    #[test]
    fn plain_round_counts() {
        // One set of size m: 2m + 2 rounds, reset 2m + 1, finalize.
        let g = LabeledGraph::from_edges(5, &[(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]).unwrap();
        let opts = DistributeOptions {
            hub: HubChoice::Vertex(0),
            ..DistributeOptions::plain()
        };
        let sys = ScSystem::new(5, vec![set(&[1, 2, 3, 4])], crate::sc_solver::Provenance::External).unwrap();
        let (s, _) = distribute(&g, &sys, &opts).unwrap();
        assert_eq!(s.round_count(), (2 * 4 + 2) + (2 * 4 + 1) + 1);
    }

    #[test]
    fn clique_protocol_counts() {
        for k in 2..=12 {
            let (s, rep) = schedule_clique(k).unwrap();
            assert_eq!((rep.cz_count, rep.lc_count), (2 * k - 2, k), "k = {k}");
            assert_eq!(s.replay_graph().unwrap(), generators::complete(k));
        }
    }

    #[test]
    fn factory_examples() {
        let ghz = generators::complete(6);
        let (s, rep) = baseline_factory(&ghz, false).unwrap();
        let build: Vec<&GateOp> = s.ops().filter(|o| o.phase == Phase::Build).collect();
        assert_eq!(build.iter().filter(|o| o.kind == OpKind::Cz).count(), 5);
        assert_eq!(build.iter().filter(|o| o.kind == OpKind::Lc).count(), 1);
        assert_eq!((rep.bell_pairs, rep.central_qubit_highwater), (6, 12));

        for n in 2..=9 {
            let (s, _) = baseline_factory(&generators::complete(n), true).unwrap();
            let colours = s.rounds.iter().filter(|r| r[0].phase == Phase::Build).count();
            assert_eq!(colours, if n % 2 == 0 { n - 1 } else { n });
        }
    }

    #[test]
    fn schedules_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..40u64 {
            let n = 2 + (seed as usize % 6);
            let g = generators::gnp(n, 0.5, seed);
            let hub = choose_hub(&g, HubChoice::Auto).unwrap();
            let sys = hub_system(&g, hub, Method::Greedy, None).unwrap();
            for opts in [DistributeOptions::default(), DistributeOptions::plain()] {
                let (s, _) = distribute(&g, &sys, &opts).unwrap();
                s.verify_oracle(&mut rng).unwrap();
            }
            let ext = DistributeOptions {
                hub: HubChoice::External,
                ..Default::default()
            };
            let sys = greedy_system(&g).unwrap();
            distribute(&g, &sys, &ext).unwrap().0.verify_oracle(&mut rng).unwrap();
            for par in [false, true] {
                baseline_factory(&g, par).unwrap().0.verify_oracle(&mut rng).unwrap();
            }
        }
    }

    #[test]
    fn csv_export() {
        let (s, _) = schedule_clique(3).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("round,op_kind,qubit1,qubit2,phase_annotation"));
        assert_eq!(lines.next(), Some("0,BellPrep,4,1,setup"));
        assert!(text.contains("1,CZ,4,0,sc:0"));
    }

    #[test]
    fn resources_of_empty_schedule() {
        let s = Schedule {
            protocol: String::new(),
            qubits: BTreeSet::new(),
            central: BTreeSet::new(),
            outputs: BTreeSet::new(),
            target: LabeledGraph::new(),
            setup: Vec::new(),
            rounds: Vec::new(),
        };
        assert_eq!(resources(&s), ResourceReport::default());
    }

    #[test]
    fn bipartite_closed_form_three_rounds() {
        let fam: GraphFamily = "bipartite:5,5".parse().unwrap();
        let g = fam.build();
        let sys = closed_form_system(&fam).unwrap();
        assert_eq!(sys.len(), 3);
        let opts = DistributeOptions {
            hub: HubChoice::External,
            ..Default::default()
        };
        let (s, _) = distribute(&g, &sys, &opts).unwrap();
        let scs: BTreeSet<String> = s.ops().map(|o| o.phase.to_string()).filter(|p| p.starts_with("sc:")).collect();
        assert_eq!(scs.len(), 3);
    }
}
