//! Monte Carlo fidelity estimation under depolarizing gate noise and
//! optional memory dephasing, tracking errors as a Z-only Pauli frame on the
//! running graph state.
//!
//! Every Pauli on a graph state is a Z string up to phase: `X_v` acts as
//! `Z_{N(v)}`, `Y_v` as `Z_v Z_{N(v)}`. Distinct Z strings give orthogonal
//! states, so the fidelity of a run is the probability that the final frame
//! is all zero on the output qubits.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph_state::LabeledGraph;
use crate::protocol::{GateOp, OpKind, Primitive, ResourceReport, Schedule};
use crate::stabilizer_oracle::Pauli;

/// Environment variable capping the trial thread count.
pub const THREADS_ENV: &str = "GSD_THREADS";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Depolarizing probability per touched qubit per operation.
    pub p_gate: f64,
    /// Dephasing probability per live idle qubit per round.
    pub p_mem: f64,
    /// Depolarize the measured qubit before each measurement.
    pub noise_on_measure: bool,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            p_gate: 0.0,
            p_mem: 0.0,
            noise_on_measure: true,
        }
    }
}

impl NoiseModel {
    pub fn new(p_gate: f64, p_mem: f64) -> Result<Self> {
        let m = NoiseModel {
            p_gate,
            p_mem,
            ..Default::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_gate", self.p_gate), ("p_mem", self.p_mem)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p_gate == 0.0 && self.p_mem == 0.0
    }
}

/// Qubits a primitive depolarizes, and whether before it (measurements)
/// or after it (gates). Composite measurements expose every constituent.
fn noise_sites(p: Primitive, model: &NoiseModel) -> (Vec<usize>, bool) {
    match p {
        Primitive::Cz(a, b) => (vec![a, b], false),
        Primitive::Lc(v) => (vec![v], false),
        Primitive::MeasZ(v) if model.noise_on_measure => (vec![v], true),
        Primitive::MeasZ(_) => (Vec::new(), true),
    }
}

/// Lowered primitives of an op; Bell-pair preparation is noiseless.
fn noisy_primitives(op: &GateOp) -> Vec<(Primitive, bool)> {
    let noisy = op.kind != OpKind::BellPrep;
    op.lower().into_iter().map(|p| (p, noisy)).collect()
}

fn sample_pauli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Option<Pauli> {
    if rng.gen::<f64>() < p {
        Some([Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)])
    } else {
        None
    }
}

/// Z-only error frame over the live qubits of a running graph state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliFrame {
    pub z_bits: BTreeMap<usize, bool>,
    pub graph: LabeledGraph,
}

impl PauliFrame {
    pub fn new(qubits: impl IntoIterator<Item = usize>) -> Self {
        let graph = LabeledGraph::with_vertices(qubits);
        PauliFrame {
            z_bits: graph.vertices().map(|q| (q, false)).collect(),
            graph,
        }
    }

    fn flip(&mut self, q: usize) {
        if let Some(b) = self.z_bits.get_mut(&q) {
            *b = !*b;
        }
    }

    /// Fold a Pauli on `q` into the frame relative to the current graph.
    pub fn inject(&mut self, pauli: Pauli, q: usize) -> Result<()> {
        let nbrs: Vec<usize> = self.graph.neighbors(q)?.collect();
        if matches!(pauli, Pauli::X | Pauli::Y) {
            for w in nbrs {
                self.flip(w);
            }
        }
        if matches!(pauli, Pauli::Y | Pauli::Z) {
            self.flip(q);
        }
        Ok(())
    }

    /// Commute the frame through one primitive and update the graph.
    pub fn apply_primitive(&mut self, p: Primitive) -> Result<()> {
        p.apply(&mut self.graph)?;
        match p {
            Primitive::Cz(..) => {}
            Primitive::Lc(v) => {
                if self.z_bits[&v] {
                    let nbrs: Vec<usize> = self.graph.neighbors(v)?.collect();
                    for w in nbrs {
                        self.flip(w);
                    }
                }
            }
            Primitive::MeasZ(v) => {
                self.z_bits.remove(&v);
            }
        }
        Ok(())
    }

    /// Frame update only, no noise.
    pub fn frame_update(&mut self, op: &GateOp) -> Result<()> {
        for p in op.lower() {
            self.apply_primitive(p)?;
        }
        Ok(())
    }

    /// Depolarize the qubits of one primitive with probability `p_gate` each.
    pub fn inject_noise<R: Rng + ?Sized>(&mut self, p: Primitive, model: &NoiseModel, rng: &mut R) -> Result<()> {
        for q in noise_sites(p, model).0 {
            if let Some(pauli) = sample_pauli(model.p_gate, rng) {
                self.inject(pauli, q)?;
            }
        }
        Ok(())
    }

    /// Noisy execution of one op: each primitive commutes the frame and
    /// then adds noise, except measurements, which are depolarized first.
    pub fn step<R: Rng + ?Sized>(&mut self, op: &GateOp, model: &NoiseModel, rng: &mut R) -> Result<()> {
        for (p, noisy) in noisy_primitives(op) {
            let before = noise_sites(p, model).1;
            if noisy && before {
                self.inject_noise(p, model, rng)?;
            }
            self.apply_primitive(p)?;
            if noisy && !before {
                self.inject_noise(p, model, rng)?;
            }
        }
        Ok(())
    }

    pub fn is_clean(&self) -> bool {
        self.z_bits.values().all(|b| !b)
    }

    pub fn flipped(&self) -> BTreeSet<usize> {
        self.z_bits.iter().filter(|(_, &b)| b).map(|(&q, _)| q).collect()
    }
}

/// Qubits first touched in, and measured in, each round (setup is round 0).
fn lifetimes(s: &Schedule) -> (BTreeMap<usize, usize>, BTreeMap<usize, usize>) {
    let mut born = BTreeMap::new();
    let mut died = BTreeMap::new();
    for (r, round) in std::iter::once(&s.setup).chain(&s.rounds).enumerate() {
        for op in round {
            for q in op.support() {
                born.entry(q).or_insert(r);
            }
            if op.kind.is_measurement() {
                died.insert(op.q1, r);
            }
        }
    }
    (born, died)
}

/// Idle live qubits after each timed round.
fn idle_sets(s: &Schedule) -> Vec<Vec<usize>> {
    let (born, died) = lifetimes(s);
    s.rounds
        .iter()
        .enumerate()
        .map(|(i, round)| {
            let r = i + 1;
            let busy: BTreeSet<usize> = round.iter().flat_map(GateOp::support).collect();
            born.iter()
                .filter(|&(q, &b)| b <= r && died.get(q).is_none_or(|&d| d > r) && !busy.contains(q))
                .map(|(&q, _)| q)
                .collect()
        })
        .collect()
}

/// Reference trial on the graph-level frame. Same random stream as the
/// compiled path.
pub fn simulate_trial_reference(s: &Schedule, model: &NoiseModel, seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frame = PauliFrame::new(s.qubits.iter().copied());
    for op in &s.setup {
        frame.frame_update(op)?;
    }
    for (round, idle) in s.rounds.iter().zip(idle_sets(s)) {
        for op in round {
            frame.step(op, model, &mut rng)?;
        }
        if model.p_mem > 0.0 {
            for q in idle {
                if rng.gen::<f64>() < model.p_mem {
                    frame.flip(q);
                }
            }
        }
    }
    Ok(s.outputs.iter().all(|q| !frame.z_bits.get(q).copied().unwrap_or(false)))
}

#[derive(Debug, Clone)]
enum Step {
    /// Depolarizing site on `q` with its neighborhood at that moment.
    Noise { q: usize, nbrs: usize },
    /// If bit `v` is set, toggle the mask.
    Conditional { v: usize, mask: usize },
    Clear(usize),
    Memory(Vec<usize>),
}

/// A schedule lowered to frame operations on dense bit indices, so trials
/// never touch the graph.
#[derive(Debug, Clone)]
pub struct FrameProgram {
    words: usize,
    masks: Vec<Vec<u64>>,
    steps: Vec<Step>,
    outputs: Vec<u64>,
    p_gate: f64,
    p_mem: f64,
}

impl FrameProgram {
    pub fn compile(s: &Schedule, model: &NoiseModel) -> Result<Self> {
        model.validate()?;
        let index: BTreeMap<usize, usize> = s.qubits.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let words = s.qubits.len().div_ceil(64).max(1);
        let mut masks: Vec<Vec<u64>> = Vec::new();
        let mut to_mask = |set: &mut dyn Iterator<Item = usize>| {
            let mut m = vec![0u64; words];
            for q in set {
                let i = index[&q];
                m[i / 64] |= 1 << (i % 64);
            }
            masks.push(m);
            masks.len() - 1
        };
        let mut g = LabeledGraph::with_vertices(s.qubits.iter().copied());
        let mut steps = Vec::new();
        for op in &s.setup {
            for p in op.lower() {
                p.apply(&mut g)?;
            }
        }
        for (round, idle) in s.rounds.iter().zip(idle_sets(s)) {
            for op in round {
                for (p, noisy) in noisy_primitives(op) {
                    let (sites, before) = noise_sites(p, model);
                    let sites = if noisy { sites } else { Vec::new() };
                    if before {
                        for &q in &sites {
                            let nbrs = to_mask(&mut g.neighbors(q)?);
                            steps.push(Step::Noise { q: index[&q], nbrs });
                        }
                    }
                    p.apply(&mut g)?;
                    match p {
                        Primitive::Cz(..) => {}
                        Primitive::Lc(v) => {
                            let mask = to_mask(&mut g.neighbors(v)?);
                            steps.push(Step::Conditional { v: index[&v], mask });
                        }
                        Primitive::MeasZ(v) => steps.push(Step::Clear(index[&v])),
                    }
                    if !before {
                        for &q in &sites {
                            let nbrs = to_mask(&mut g.neighbors(q)?);
                            steps.push(Step::Noise { q: index[&q], nbrs });
                        }
                    }
                }
            }
            if model.p_mem > 0.0 {
                steps.push(Step::Memory(idle.iter().map(|q| index[q]).collect()));
            }
        }
        let mut outputs = vec![0u64; words];
        for q in &s.outputs {
            let i = index[q];
            outputs[i / 64] |= 1 << (i % 64);
        }
        Ok(FrameProgram {
            words,
            masks,
            steps,
            outputs,
            p_gate: model.p_gate,
            p_mem: model.p_mem,
        })
    }

    /// Number of depolarizing sites per trial.
    pub fn noise_sites(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Noise { .. })).count()
    }

    pub fn run(&self, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = vec![0u64; self.words];
        let bit = |b: &[u64], i: usize| b[i / 64] >> (i % 64) & 1 == 1;
        let xor = |b: &mut [u64], m: &[u64]| b.iter_mut().zip(m).for_each(|(x, y)| *x ^= y);
        for step in &self.steps {
            match step {
                Step::Noise { q, nbrs } => {
                    if let Some(p) = sample_pauli(self.p_gate, &mut rng) {
                        if matches!(p, Pauli::X | Pauli::Y) {
                            xor(&mut b, &self.masks[*nbrs]);
                        }
                        if matches!(p, Pauli::Y | Pauli::Z) {
                            b[q / 64] ^= 1 << (q % 64);
                        }
                    }
                }
                Step::Conditional { v, mask } => {
                    if bit(&b, *v) {
                        xor(&mut b, &self.masks[*mask]);
                    }
                }
                Step::Clear(v) => b[v / 64] &= !(1 << (v % 64)),
                Step::Memory(idle) => {
                    for &q in idle {
                        if rng.gen::<f64>() < self.p_mem {
                            b[q / 64] ^= 1 << (q % 64);
                        }
                    }
                }
            }
        }
        b.iter().zip(&self.outputs).all(|(x, m)| x & m == 0)
    }
}

/// One noisy run; true when the output frame is all zero.
pub fn simulate_trial(s: &Schedule, model: &NoiseModel, seed: u64) -> Result<bool> {
    Ok(FrameProgram::compile(s, model)?.run(seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub trials: usize,
    pub ci95_halfwidth: f64,
    pub seed: u64,
}

impl FidelityEstimate {
    pub fn from_counts(successes: usize, trials: usize, seed: u64) -> Self {
        let mean = successes as f64 / trials as f64;
        FidelityEstimate {
            mean,
            trials,
            ci95_halfwidth: 1.96 * (mean * (1.0 - mean) / trials as f64).sqrt(),
            seed,
        }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.ci95_halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci95_halfwidth
    }

    /// Non-overlapping 95% intervals with `self` above `other`.
    pub fn separated_above(&self, other: &FidelityEstimate) -> bool {
        self.lower() > other.upper()
    }
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}

/// Trial `i` uses seed `seed + i`; the count is independent of scheduling.
pub fn estimate_fidelity(s: &Schedule, model: &NoiseModel, trials: usize, seed: u64) -> Result<FidelityEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let program = FrameProgram::compile(s, model)?;
    let count = || {
        (0..trials as u64)
            .into_par_iter()
            .filter(|&i| program.run(seed.wrapping_add(i)))
            .count()
    };
    let successes = match thread_cap() {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(count),
        None => count(),
    };
    Ok(FidelityEstimate::from_counts(successes, trials, seed))
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub protocol: String,
    pub n: usize,
    pub model: NoiseModel,
    pub estimate: FidelityEstimate,
    pub resources: ResourceReport,
}

impl ResultRow {
    pub const HEADER: [&'static str; 15] = [
        "protocol",
        "n",
        "p_gate",
        "p_mem",
        "trials",
        "fidelity",
        "ci95",
        "seed",
        "rounds",
        "cz",
        "lc",
        "meas",
        "bell_pairs",
        "cc_bits",
        "central_qubits",
    ];

    pub fn record(&self) -> Vec<String> {
        let r = &self.resources;
        vec![
            self.protocol.clone(),
            self.n.to_string(),
            self.model.p_gate.to_string(),
            self.model.p_mem.to_string(),
            self.estimate.trials.to_string(),
            format!("{:.6}", self.estimate.mean),
            format!("{:.6}", self.estimate.ci95_halfwidth),
            self.estimate.seed.to_string(),
            r.rounds.to_string(),
            r.cz_count.to_string(),
            r.lc_count.to_string(),
            r.meas_count.to_string(),
            r.bell_pairs.to_string(),
            r.cc_bits.to_string(),
            r.central_qubit_highwater.to_string(),
        ]
    }
}

pub fn write_results<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ResultRow::HEADER)?;
    for row in rows {
        out.write_record(row.record())?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_state::generators;
    use crate::protocol::{baseline_factory, distribute, hub_system, DistributeOptions, Phase};
    use crate::sc_solver::Method;
    use crate::stabilizer_oracle::{Gate, StabilizerTableau};

    fn sc_schedule(g: &LabeledGraph) -> Schedule {
        let opts = DistributeOptions::default();
        let hub = crate::protocol::choose_hub(g, opts.hub).unwrap();
        let sys = hub_system(g, hub, Method::Best, None).unwrap();
        distribute(g, &sys, &opts).unwrap().0
    }

    #[test]
    fn injection_examples() {
        let mut f = PauliFrame::new(0..3);
        f.inject(Pauli::X, 1).unwrap();
        assert!(f.is_clean());

        let mut f = PauliFrame::new(0..4);
        for v in 1..4 {
            f.graph.toggle_edge(0, v).unwrap();
        }
        f.inject(Pauli::X, 0).unwrap();
        assert_eq!(f.flipped(), (1..4).collect());
        f.inject(Pauli::Y, 0).unwrap();
        assert_eq!(f.flipped(), [0].into());
    }

    #[test]
    fn frame_update_examples() {
        let mut f = PauliFrame::new(0..4);
        for v in 1..4 {
            f.graph.toggle_edge(0, v).unwrap();
        }
        f.inject(Pauli::Z, 0).unwrap();
        f.frame_update(&GateOp::lc(0, Phase::Sc(0))).unwrap();
        assert_eq!(f.flipped(), (0..4).collect());
        f.frame_update(&GateOp::meas_z(0, Phase::Finalize)).unwrap();
        assert_eq!(f.flipped(), (1..4).collect());
        assert!(!f.z_bits.contains_key(&0));
    }

    #[test]
    fn noiseless_is_exact() {
        let s = sc_schedule(&generators::complete(5));
        let e = estimate_fidelity(&s, &NoiseModel::default(), 200, 3).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.ci95_halfwidth, 0.0);
    }

    #[test]
    fn compiled_matches_reference() {
        let g = generators::gnp(6, 0.5, 4);
        let (fac, _) = baseline_factory(&g, false).unwrap();
        for s in [sc_schedule(&g), fac] {
            for model in [
                NoiseModel::new(0.05, 0.0).unwrap(),
                NoiseModel::new(0.02, 0.03).unwrap(),
                NoiseModel {
                    p_gate: 0.04,
                    p_mem: 0.0,
                    noise_on_measure: false,
                },
            ] {
                let prog = FrameProgram::compile(&s, &model).unwrap();
                for seed in 0..300 {
                    assert_eq!(prog.run(seed), simulate_trial_reference(&s, &model, seed).unwrap());
                }
            }
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let s = sc_schedule(&generators::complete(6));
        let m = NoiseModel::new(0.01, 0.0).unwrap();
        let a = estimate_fidelity(&s, &m, 2000, 9).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate_fidelity(&s, &m, 2000, 9).unwrap());
        assert_eq!(a, b);
        assert!(a.mean < 1.0 && a.mean > 0.5);
    }

    #[test]
    fn measurement_noise_switch() {
        let (s, _) = baseline_factory(&generators::complete(3), false).unwrap();
        let on = NoiseModel::new(0.05, 0.0).unwrap();
        let off = NoiseModel {
            noise_on_measure: false,
            ..on
        };
        let a = FrameProgram::compile(&s, &on).unwrap().noise_sites();
        let b = FrameProgram::compile(&s, &off).unwrap().noise_sites();
        assert_eq!(a, b + 6);
        // Build 2 CZ + 1 LC, then per qubit CZ, X measurement (3 LC) and Z measurement.
        assert_eq!(a, 5 + 3 * 7);
    }

    #[test]
    fn frame_matches_oracle_on_random_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut ops_seen = 0;
        for seed in 0..60u64 {
            let n = 3 + (seed as usize % 4);
            let g = generators::gnp(n, 0.5, seed);
            let s = if seed % 2 == 0 { sc_schedule(&g) } else { baseline_factory(&g, seed % 4 == 1).unwrap().0 };
            let mut frame = PauliFrame::new(s.qubits.iter().copied());
            let mut t = StabilizerTableau::plus_state(s.qubits.iter().copied()).unwrap();
            for op in s.ops() {
                let inject = |frame: &mut PauliFrame, t: &mut StabilizerTableau, rng: &mut ChaCha8Rng| {
                    for q in op.support() {
                        if op.kind != OpKind::BellPrep && rng.gen_bool(0.3) {
                            let p = [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)];
                            frame.inject(p, q).unwrap();
                            t.apply_gate(Gate::Pauli(p, q)).unwrap();
                        }
                    }
                };
                if op.kind.is_measurement() {
                    inject(&mut frame, &mut t, &mut rng);
                }
                frame.frame_update(op).unwrap();
                for p in op.lower() {
                    p.apply_oracle(&mut t, &mut rng).unwrap();
                }
                if !op.kind.is_measurement() {
                    inject(&mut frame, &mut t, &mut rng);
                }
                ops_seen += 1;
            }
            let mut expect = StabilizerTableau::from_graph(&frame.graph).unwrap();
            for q in frame.flipped() {
                expect.apply_gate(Gate::Pauli(Pauli::Z, q)).unwrap();
            }
            assert!(t.stabilizer_equal(&expect).unwrap(), "seed {seed}");
            assert_eq!(frame.graph, s.target);
        }
        assert!(ops_seen > 1000);
    }

    #[test]
    fn result_row_layout() {
        let s = sc_schedule(&generators::complete(3));
        let row = ResultRow {
            protocol: "sc".into(),
            n: 3,
            model: NoiseModel::new(0.001, 0.0).unwrap(),
            estimate: estimate_fidelity(&s, &NoiseModel::default(), 10, 1).unwrap(),
            resources: crate::protocol::resources(&s),
        };
        let mut buf = Vec::new();
        write_results(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("protocol,n,p_gate,p_mem,trials,fidelity,ci95,seed,rounds,"));
        assert!(text.lines().nth(1).unwrap().starts_with("sc,3,0.001,0,10,1.000000,0.000000,1,"));
    }
}
