use std::collections::BTreeSet;

use gsdist::cli::{build_schedule, BuildConfig, Protocol};
use gsdist::graph_state::LabeledGraph;
use gsdist::noise_mc::{estimate_fidelity, simulate_trial, simulate_trial_reference, NoiseModel, PauliFrame};
use gsdist::parallel::{ghz_log_depth, ghz_round_bound, ParallelConfig};
use gsdist::protocol::{init_network, resources, DistributeOptions, HubChoice, OpKind};
use gsdist::sc_solver::Method;
use gsdist::stabilizer_oracle::{Gate, Pauli, StabilizerTableau};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = LabeledGraph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
            let edges: Vec<(usize, usize)> = pairs.zip(bits).filter(|(_, on)| *on).map(|(e, _)| e).collect();
            LabeledGraph::from_edges(n, &edges).unwrap()
        })
    })
}

fn protocol_strategy() -> impl Strategy<Value = Protocol> {
    prop_oneof![
        Just(Protocol::Sc),
        Just(Protocol::ScParallel),
        Just(Protocol::Factory),
        Just(Protocol::FactoryParallel),
    ]
}

fn config(protocol: Protocol, plain: bool, external: bool, aux: usize) -> BuildConfig {
    let mut options = if plain {
        DistributeOptions::plain()
    } else {
        DistributeOptions::default()
    };
    if external {
        options.hub = HubChoice::External;
    }
    BuildConfig {
        protocol,
        method: Method::Greedy,
        aux: Some(aux),
        options,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schedules_are_well_formed(
        g in graph_strategy(7),
        protocol in protocol_strategy(),
        plain in any::<bool>(),
        external in any::<bool>(),
        aux in 1usize..4,
    ) {
        let cfg = config(protocol, plain, external, aux);
        let (s, rep) = build_schedule(&g, None, &cfg, &mut std::io::sink()).unwrap();
        s.validate().unwrap();
        for round in &s.rounds {
            let mut seen = BTreeSet::new();
            for op in round {
                prop_assert!(op.support().all(|q| seen.insert(q)), "overlapping supports in {round:?}");
            }
        }
        prop_assert_eq!(rep, resources(&s));
        prop_assert_eq!(rep.rounds, s.rounds.len());
        prop_assert_eq!(s.replay_graph().unwrap(), g.clone());
        let (again, _) = build_schedule(&g, None, &cfg, &mut std::io::sink()).unwrap();
        prop_assert_eq!(again, s);
    }

    #[test]
    fn layout_pairs_every_non_hub_vertex(g in graph_strategy(8), external in any::<bool>()) {
        let hub = if external { None } else { Some(0) };
        let (layout, setup) = init_network(&g, hub).unwrap();
        let ends: BTreeSet<usize> = g.vertices().filter(|&v| Some(v) != hub).collect();
        prop_assert_eq!(layout.companions.keys().copied().collect::<BTreeSet<_>>(), ends.clone());
        prop_assert_eq!(layout.bell_pairs.len(), ends.len());
        prop_assert_eq!(setup.iter().filter(|op| op.kind == OpKind::BellPrep).count(), ends.len());
        if let Some(h) = hub {
            prop_assert_eq!(layout.hub, h);
            prop_assert!(layout.bell_pairs.iter().all(|&(a, c)| a != h && c != h));
        }
    }

    #[test]
    fn noiseless_runs_always_succeed(g in graph_strategy(6), protocol in protocol_strategy(), seed in any::<u64>()) {
        let (s, _) = build_schedule(&g, None, &config(protocol, false, false, 2), &mut std::io::sink()).unwrap();
        let model = NoiseModel::new(0.0, 0.0).unwrap();
        prop_assert_eq!(estimate_fidelity(&s, &model, 20, seed).unwrap().mean, 1.0);
    }

    #[test]
    fn compiled_trials_match_the_reference(
        g in graph_strategy(6),
        protocol in protocol_strategy(),
        seed in any::<u64>(),
        p in 0.0f64..0.3,
        pmem in 0.0f64..0.2,
    ) {
        let (s, _) = build_schedule(&g, None, &config(protocol, false, false, 2), &mut std::io::sink()).unwrap();
        let model = NoiseModel::new(p, pmem).unwrap();
        for i in 0..8 {
            prop_assert_eq!(
                simulate_trial(&s, &model, seed.wrapping_add(i)).unwrap(),
                simulate_trial_reference(&s, &model, seed.wrapping_add(i)).unwrap()
            );
        }
    }

    #[test]
    fn frame_keys_track_live_qubits(g in graph_strategy(6), protocol in protocol_strategy(), seed in any::<u64>()) {
        let (s, _) = build_schedule(&g, None, &config(protocol, false, false, 2), &mut std::io::sink()).unwrap();
        let model = NoiseModel::new(0.2, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut frame = PauliFrame::new(s.qubits.iter().copied());
        for op in s.ops() {
            frame.step(op, &model, &mut rng).unwrap();
            let keys: Vec<usize> = frame.z_bits.keys().copied().collect();
            let live: Vec<usize> = frame.graph.vertices().collect();
            prop_assert_eq!(keys, live);
        }
    }

    #[test]
    fn tableau_stays_valid_under_gates(g in graph_strategy(6), gates in proptest::collection::vec((0usize..4, 0usize..6, 0usize..6), 0..30)) {
        let mut t = StabilizerTableau::from_graph(&g).unwrap();
        let n = g.vertex_count();
        for (kind, a, b) in gates {
            let (a, b) = (a % n, b % n);
            let gate = match kind {
                0 if a != b => Gate::Cz(a, b),
                1 => Gate::H(a),
                2 => Gate::S(a),
                _ => Gate::Pauli([Pauli::X, Pauli::Y, Pauli::Z][b % 3], a),
            };
            t.apply_gate(gate).unwrap();
            prop_assert!(t.is_valid());
        }
    }
}

#[test]
fn ghz_doubling_meets_its_bound() {
    for c in 2..=4 {
        let cfg = ParallelConfig {
            base_size: c,
            ..Default::default()
        };
        for n in 2..=80 {
            let s = ghz_log_depth(n, &cfg).unwrap();
            assert!(s.round_count() <= ghz_round_bound(n, c), "n={n} c={c}");
        }
    }
}

#[test]
fn noise_probabilities_are_validated() {
    assert!(NoiseModel::new(-0.1, 0.0).is_err());
    assert!(NoiseModel::new(0.0, 1.5).is_err());
    assert!(NoiseModel::new(f64::NAN, 0.0).is_err());
    assert!(NoiseModel::new(1.0, 1.0).is_ok());
}
