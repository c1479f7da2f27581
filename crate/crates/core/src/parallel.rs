//! Log-depth schedules: GHZ doubling and SC rounds whose star toggles are
//! spread over auxiliary central qubits.
//!
//! The hub `a0` stays the center of every star. The `k` auxiliary qubits
//! join it as GHZ leaves, after which each leaf toggles one hub edge per
//! three rounds (CZ, LC, CZ) while the hub toggles three more directly.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph_state::LabeledGraph;
use crate::protocol::{
    assemble, best_order, compile_rounds, init_network, resources, serial_star, DistributeOptions, GateOp, OpKind,
    NetworkLayout, Phase, ResourceReport, Rounds, Schedule, StarOps,
};
use crate::sc_solver::{dense_order, ScSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParallelConfig {
    /// Auxiliary qubits; `None` picks `max(2, ceil(n / log2 n))`.
    pub aux_count: Option<usize>,
    /// Seed star size for GHZ preparation.
    pub base_size: usize,
}

impl Default for ParallelConfig {
    fn default() -> Self {
        ParallelConfig {
            aux_count: None,
            base_size: 2,
        }
    }
}

impl ParallelConfig {
    pub fn with_aux(k: usize) -> Self {
        ParallelConfig {
            aux_count: Some(k),
            ..Default::default()
        }
    }

    pub fn aux_for(&self, n: usize) -> usize {
        self.aux_count.unwrap_or_else(|| default_aux(n))
    }
}

pub fn default_aux(n: usize) -> usize {
    if n < 4 {
        return 2;
    }
    let n = n as f64;
    ((n / n.log2()).ceil() as usize).max(2)
}

/// Grow a star centered at `center` with leaves `leaves` onto `targets`:
/// the center adds one target with a direct CZ, each leaf adds one with
/// CZ, LC, CZ. At most `1 + leaves.len()` targets are taken. Three rounds,
/// or one when only the center is used.
pub fn ghz_double(center: usize, leaves: &[usize], targets: &[usize], phase: Phase) -> Result<Rounds> {
    if targets.is_empty() {
        return Err(Error::InsufficientTargets { needed: 1, available: 0 });
    }
    let take = targets.len().min(leaves.len() + 1);
    let mut first = vec![GateOp::cz(center, targets[0], phase)];
    let pairs: Vec<(usize, usize)> = leaves.iter().copied().zip(targets[1..take].iter().copied()).collect();
    if pairs.is_empty() {
        return Ok(vec![first]);
    }
    first.extend(pairs.iter().map(|&(l, t)| GateOp::cz(l, t, phase)));
    let lcs = pairs.iter().map(|&(l, _)| GateOp::lc(l, phase)).collect();
    let last = pairs.iter().map(|&(l, t)| GateOp::cz(l, t, phase)).collect();
    Ok(vec![first, lcs, last])
}

/// Rounds building a star on `center` plus `leaves` from isolated qubits:
/// `c - 1` serial seed edges, then doublings.
pub fn ghz_rounds(center: usize, leaves: &[usize], base_size: usize, phase: Phase) -> Result<Rounds> {
    if base_size < 2 {
        return Err(Error::InvalidArgument(format!("seed size must be at least 2, got {base_size}")));
    }
    let seed = (base_size - 1).min(leaves.len());
    let mut rounds = serial_star(center, &leaves[..seed], phase);
    let mut joined = seed;
    while joined < leaves.len() {
        let step = ghz_double(center, &leaves[..joined], &leaves[joined..], phase)?;
        joined += (joined + 1).min(leaves.len() - joined);
        rounds.extend(step);
    }
    Ok(rounds)
}

/// An `n`-qubit star (GHZ up to local unitaries) on qubits `0..n` with
/// center 0, in at most `c + 3 ceil(log2(n / c))` rounds.
pub fn ghz_log_depth(n: usize, cfg: &ParallelConfig) -> Result<Schedule> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("GHZ preparation needs n >= 2, got {n}")));
    }
    let leaves: Vec<usize> = (1..n).collect();
    let rounds = ghz_rounds(0, &leaves, cfg.base_size, Phase::Ghz)?;
    let qubits: BTreeSet<usize> = (0..n).collect();
    let s = Schedule {
        protocol: "ghz".into(),
        qubits: qubits.clone(),
        central: qubits.clone(),
        outputs: qubits,
        target: crate::graph_state::generators::star(n),
        setup: Vec::new(),
        rounds,
    };
    s.verify_graph()?;
    Ok(s)
}

/// Bound on `ghz_log_depth` rounds.
pub fn ghz_round_bound(n: usize, c: usize) -> usize {
    let mut doublings = 0;
    let mut size = c;
    while size < n {
        size *= 2;
        doublings += 1;
    }
    c + 3 * doublings
}

struct AuxStar {
    hub: usize,
    hub_is_output: bool,
    aux: Vec<usize>,
    open: Rounds,
}

impl AuxStar {
    fn new(layout: &NetworkLayout, k: usize, base_size: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InsufficientAux { needed: 1, available: 0 });
        }
        let aux: Vec<usize> = (layout.first_free..layout.first_free + k).collect();
        let open = ghz_rounds(layout.hub, &aux, base_size, Phase::Ghz)?;
        Ok(AuxStar {
            hub: layout.hub,
            hub_is_output: layout.hub_vertex.is_some(),
            aux,
            open,
        })
    }

    /// Batches of three rounds: each leaf toggles one hub edge with CZ, LC,
    /// CZ while the hub toggles up to three directly. A remainder of at most
    /// three goes to the hub alone.
    fn batches(&self, companions: &[usize], phase: Phase) -> Rounds {
        let mut rounds = Rounds::new();
        let mut rest = companions;
        while !rest.is_empty() {
            if rest.len() <= 3 {
                rounds.extend(serial_star(self.hub, rest, phase));
                break;
            }
            let (direct, tail) = rest.split_at(3);
            let take = self.aux.len().min(tail.len());
            let pairs: Vec<(usize, usize)> = self.aux.iter().copied().zip(tail[..take].iter().copied()).collect();
            let cz = |extra: usize| -> Vec<GateOp> {
                let mut r: Vec<GateOp> = pairs.iter().map(|&(q, a)| GateOp::cz(q, a, phase)).collect();
                r.push(GateOp::cz(direct[extra], self.hub, phase));
                r
            };
            rounds.push(cz(0));
            let mut lcs: Vec<GateOp> = pairs.iter().map(|&(q, _)| GateOp::lc(q, phase)).collect();
            lcs.push(GateOp::cz(direct[1], self.hub, phase));
            rounds.push(lcs);
            rounds.push(cz(2));
            rest = &tail[take..];
        }
        rounds
    }
}

impl StarOps for AuxStar {
    fn center(&self) -> usize {
        self.hub
    }
    fn center_is_output(&self) -> bool {
        self.hub_is_output
    }
    fn open(&self, _: Phase) -> Rounds {
        self.open.clone()
    }
    fn close(&self, _: Phase) -> Rounds {
        self.open.iter().rev().cloned().collect()
    }
    fn outer(&self, companions: &[usize], phase: Phase) -> Rounds {
        self.batches(companions, phase)
    }
    fn hub_star(&self, hub: usize, companions: &[usize]) -> Rounds {
        let serial = serial_star(hub, companions, Phase::Finalize);
        let mut par = self.open(Phase::Finalize);
        par.extend(self.batches(companions, Phase::Finalize));
        par.extend(self.close(Phase::Finalize));
        if par.len() < serial.len() {
            par
        } else {
            serial
        }
    }
    fn auxiliaries(&self) -> Vec<usize> {
        self.aux.clone()
    }
}

/// One SC round on the end vertices `set`, toggling hub edges through the
/// auxiliary GHZ leaves.
pub fn parallel_sc_round(
    layout: &NetworkLayout,
    set: &BTreeSet<usize>,
    cfg: &ParallelConfig,
    index: usize,
) -> Result<Rounds> {
    let star = AuxStar::new(layout, cfg.aux_for(layout.n), cfg.base_size)?;
    let a: Vec<usize> = set.iter().map(|&v| layout.companion(v)).collect::<Result<_>>()?;
    let p = Phase::Sc(index);
    let mut r = star.open(p);
    r.extend(star.outer(&a, p));
    r.push(a.iter().map(|&q| GateOp::lc(q, p)).collect());
    r.extend(star.outer(&a, p));
    r.extend(star.close(p));
    r.push(vec![GateOp::lc(star.center(), p)]);
    Ok(r)
}

/// Replace the last GHZ close with a Z measurement of the leaves, taken in
/// the following round: once nothing else uses them, deleting the leaves
/// leaves the same graph as unwinding them.
fn retire_early(rounds: &mut Rounds, aux: &[usize]) {
    let touches = |op: &GateOp| op.support().any(|q| aux.contains(&q));
    let closing = |r: &Vec<GateOp>| !r.is_empty() && r.iter().all(|op| touches(op) && op.phase == Phase::Ghz);
    let Some(last) = rounds
        .iter()
        .rposition(|r| r.iter().any(|op| touches(op) && op.kind != OpKind::MeasZ))
    else {
        return;
    };
    if !closing(&rounds[last]) {
        return;
    }
    let mut start = last;
    while start > 0 && closing(&rounds[start - 1]) {
        start -= 1;
    }
    rounds.drain(start..=last);
    for r in rounds[start..].iter_mut() {
        r.retain(|op| !touches(op));
    }
    rounds.retain(|r| !r.is_empty());
    let meas = aux.iter().map(|&q| GateOp::meas_z(q, Phase::Ghz));
    match rounds.get_mut(start) {
        Some(r) => {
            r.splice(0..0, meas);
        }
        None => rounds.push(meas.collect()),
    }
}

fn compile(
    layout: &NetworkLayout,
    g: &LabeledGraph,
    sets: &[BTreeSet<usize>],
    opts: &DistributeOptions,
    star: &AuxStar,
) -> Result<Rounds> {
    let mut r = compile_rounds(layout, g, sets, opts, star)?;
    retire_early(&mut r, &star.aux);
    Ok(r)
}

/// Distribution with every star toggle parallelized over `k` auxiliaries.
pub fn parallel_distribute(
    g: &LabeledGraph,
    system: &ScSystem,
    cfg: &ParallelConfig,
    opts: &DistributeOptions,
) -> Result<(Schedule, ResourceReport)> {
    let n = dense_order(g)?;
    let hub = crate::protocol::choose_hub(g, opts.hub)?;
    crate::protocol::check_system(g, system, hub)?;
    let (layout, setup) = init_network(g, hub)?;
    let star = AuxStar::new(&layout, cfg.aux_for(n), cfg.base_size)?;
    let sets = if opts.optimize_order {
        best_order(system.sets(), |o| {
            compile(&layout, g, o, opts, &star).map(|r| (r.iter().map(Vec::len).sum(), r.len()))
        })?
    } else {
        system.sets().to_vec()
    };
    let rounds = compile(&layout, g, &sets, opts, &star)?;
    let s = assemble("sc-parallel", &layout, &star.aux, g, setup, rounds)?;
    let rep = resources(&s);
    Ok((s, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_state::generators;
    use crate::protocol::{apply_op, distribute, hub_system, HubChoice};
    use crate::sc_solver::Method;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(start: &LabeledGraph, rounds: &Rounds) -> LabeledGraph {
        let mut g = start.clone();
        for op in rounds.iter().flatten() {
            apply_op(&mut g, op).unwrap();
        }
        g
    }

    #[test]
    fn doubling_examples() {
        // One leaf: star of 2 grows to 4.
        let g = LabeledGraph::from_edges(4, &[(0, 1)]).unwrap();
        let r = ghz_double(0, &[1], &[2, 3], Phase::Ghz).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(run(&g, &r), generators::star(4));

        let g = LabeledGraph::with_vertices(0..2);
        let r = ghz_double(0, &[], &[1], Phase::Ghz).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(run(&g, &r), generators::star(2));

        // Star of 4 to 8.
        let g = generators::star(4).induced(&(0..4).collect()).clone();
        let mut g8 = LabeledGraph::with_vertices(0..8);
        for (a, b) in g.edges() {
            g8.toggle_edge(a, b).unwrap();
        }
        let r = ghz_double(0, &[1, 2, 3], &[4, 5, 6, 7], Phase::Ghz).unwrap();
        assert_eq!(run(&g8, &r), generators::star(8));

        assert!(matches!(
            ghz_double(0, &[1], &[], Phase::Ghz),
            Err(Error::InsufficientTargets { .. })
        ));
    }

    #[test]
    fn log_depth_bound() {
        let cfg = ParallelConfig::default();
        assert_eq!(ghz_log_depth(2, &cfg).unwrap().round_count(), 1);
        assert!(ghz_log_depth(16, &cfg).unwrap().round_count() <= 11);
        for n in 2..=70 {
            for c in 2..=4 {
                let cfg = ParallelConfig { aux_count: None, base_size: c };
                let s = ghz_log_depth(n, &cfg).unwrap();
                assert!(s.round_count() <= ghz_round_bound(n, c), "n = {n}, c = {c}");
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        ghz_log_depth(8, &cfg).unwrap().verify_oracle(&mut rng).unwrap();
    }

    #[test]
    fn sc_round_matches_serial() {
        let g = generators::complete(9);
        let (layout, setup) = init_network(&g, Some(0)).unwrap();
        let mut start = LabeledGraph::with_vertices(layout.qubits().into_iter().chain(layout.first_free..layout.first_free + 4));
        for op in &setup {
            apply_op(&mut start, op).unwrap();
        }
        let set: BTreeSet<usize> = (1..9).collect();
        let par = parallel_sc_round(&layout, &set, &ParallelConfig::with_aux(3), 0).unwrap();
        let ser = crate::protocol::schedule_sc_round(&layout, &set, 0).unwrap();
        let a = run(&start, &par);
        let b = run(&start, &ser);
        assert_eq!(a, b);
        // m = 8, k = 3: GHZ in 4 rounds each way; batches of 3 + 3 leave 2.
        assert_eq!(par.len(), 4 + 5 + 1 + 5 + 4 + 1);
        assert!(matches!(
            parallel_sc_round(&layout, &set, &ParallelConfig::with_aux(0), 0),
            Err(Error::InsufficientAux { .. })
        ));
    }

    #[test]
    fn distribute_matches_serial_and_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for seed in 0..30u64 {
            let n = 2 + (seed as usize % 7);
            let g = generators::gnp(n, 0.5, seed);
            let opts = DistributeOptions::default();
            let hub = crate::protocol::choose_hub(&g, HubChoice::Auto).unwrap();
            let sys = hub_system(&g, hub, Method::Greedy, None).unwrap();
            for k in 1..=3 {
                let (s, rep) = parallel_distribute(&g, &sys, &ParallelConfig::with_aux(k), &opts).unwrap();
                s.verify_oracle(&mut rng).unwrap();
                assert!(rep.central_qubit_highwater <= n + k);
            }
            let plain = DistributeOptions::plain();
            let (s, _) = parallel_distribute(&g, &sys, &ParallelConfig::default(), &plain).unwrap();
            s.verify_oracle(&mut rng).unwrap();
            let ext = DistributeOptions {
                hub: HubChoice::External,
                ..Default::default()
            };
            let sys = hub_system(&g, None, Method::Greedy, None).unwrap();
            let (s, _) = parallel_distribute(&g, &sys, &ParallelConfig::default(), &ext).unwrap();
            s.verify_oracle(&mut rng).unwrap();
        }
    }

    #[test]
    fn empty_graph_is_setup_and_finalize() {
        let g = LabeledGraph::with_vertices(0..5);
        let sys = hub_system(&g, Some(0), Method::Greedy, None).unwrap();
        let (s, _) = parallel_distribute(&g, &sys, &ParallelConfig::default(), &DistributeOptions::default()).unwrap();
        assert_eq!(s.round_count(), 1);
    }

    #[test]
    fn large_clique_beats_serial() {
        let g = generators::complete(64);
        let sys = hub_system(&g, Some(0), Method::ClosedForm, None).unwrap();
        let opts = DistributeOptions::default();
        let (ser, _) = distribute(&g, &sys, &opts).unwrap();
        let (par, rep) = parallel_distribute(&g, &sys, &ParallelConfig::default(), &opts).unwrap();
        assert_eq!(default_aux(64), 11);
        assert!(par.round_count() < ser.round_count());
        assert_eq!(rep.central_qubit_highwater, 64 + 11);
    }
}
