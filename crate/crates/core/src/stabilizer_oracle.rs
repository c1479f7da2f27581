//! Brute-force stabilizer simulator used to cross-check the graph rules,
//! compiled schedules and error frames.
//!
//! The state is kept as `n` signed Pauli generators in binary symplectic
//! form. Columns carry stable qubit labels; a measured qubit is projected
//! and then traced out, mirroring vertex deletion on the graph side.
//! Sign bookkeeping follows the Aaronson–Gottesman row-product rule.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph_state::{Basis, LabeledGraph};

/// Columns are packed into a `u128`.
pub const MAX_QUBITS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// A Hermitian Pauli operator `(-1)^sign * P_1 ⊗ ... ⊗ P_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    pub negative: bool,
    /// `(qubit id, Pauli)` for every qubit, in column order.
    pub ops: Vec<(usize, Pauli)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Row {
    x: u128,
    z: u128,
    sign: bool,
}

impl Row {
    const IDENTITY: Row = Row {
        x: 0,
        z: 0,
        sign: false,
    };

    fn commutes_with(&self, other: &Row) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// `self <- left * self`, with the phase exponent tracked mod 4.
    fn left_multiply(&mut self, left: &Row) {
        let (x1, z1, x2, z2) = (left.x, left.z, self.x, self.z);
        let pos = (x1 & z1 & z2 & !x2) | (x1 & !z1 & x2 & z2) | (!x1 & z1 & x2 & !z2);
        let neg = (x1 & z1 & x2 & !z2) | (x1 & !z1 & !x2 & z2) | (!x1 & z1 & x2 & z2);
        let total = 2 * (self.sign as i64)
            + 2 * (left.sign as i64)
            + pos.count_ones() as i64
            - neg.count_ones() as i64;
        let phase = total.rem_euclid(4);
        debug_assert!(phase % 2 == 0, "product of commuting Paulis must be Hermitian");
        self.sign = phase == 2;
        self.x ^= x1;
        self.z ^= z1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Cz(usize, usize),
    /// Local complementation at a vertex of the current graph state:
    /// `sqrt(-iX_v) * prod_{w in N(v)} sqrt(iZ_w)`, with `N(v)` read off the
    /// tableau itself.
    Lc(usize),
    Pauli(Pauli, usize),
    H(usize),
    S(usize),
    Sdg(usize),
}

#[derive(Debug, Clone)]
pub struct StabilizerTableau {
    labels: Vec<usize>,
    rows: Vec<Row>,
}

impl StabilizerTableau {
    /// `|+>` on every listed qubit.
    pub fn plus_state(ids: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::from_graph(&LabeledGraph::with_vertices(ids))
    }

    /// Generators `K_v = X_v Z_{N(v)}`, all with sign `+`.
    pub fn from_graph(g: &LabeledGraph) -> Result<Self> {
        let labels: Vec<usize> = g.vertices().collect();
        if labels.len() > MAX_QUBITS {
            return Err(Error::SizeLimitExceeded {
                what: "stabilizer tableau",
                size: labels.len(),
                limit: MAX_QUBITS,
            });
        }
        let col: BTreeMap<usize, usize> = labels.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let rows = labels
            .iter()
            .enumerate()
            .map(|(i, &v)| Row {
                x: 1u128 << i,
                z: g.neighbors(v)
                    .expect("listed vertex")
                    .fold(0, |acc, w| acc | (1u128 << col[&w])),
                sign: false,
            })
            .collect();
        Ok(StabilizerTableau { labels, rows })
    }

    pub fn qubit_count(&self) -> usize {
        self.labels.len()
    }

    pub fn qubits(&self) -> &[usize] {
        &self.labels
    }

    fn col(&self, q: usize) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == q)
            .ok_or(Error::UnknownQubit(q))
    }

    /// Adjoin a fresh `|+>` qubit.
    pub fn add_plus(&mut self, q: usize) -> Result<()> {
        if self.labels.contains(&q) {
            return Err(Error::InvalidArgument(format!("qubit {q} already present")));
        }
        if self.labels.len() == MAX_QUBITS {
            return Err(Error::SizeLimitExceeded {
                what: "stabilizer tableau",
                size: MAX_QUBITS + 1,
                limit: MAX_QUBITS,
            });
        }
        let c = self.labels.len();
        self.labels.push(q);
        self.rows.push(Row {
            x: 1u128 << c,
            z: 0,
            sign: false,
        });
        Ok(())
    }

    pub fn generators(&self) -> Vec<PauliString> {
        self.rows
            .iter()
            .map(|r| PauliString {
                negative: r.sign,
                ops: self
                    .labels
                    .iter()
                    .enumerate()
                    .map(|(c, &q)| (q, Pauli::from_bits(r.x >> c & 1 == 1, r.z >> c & 1 == 1)))
                    .collect(),
            })
            .collect()
    }

    fn h_col(&mut self, c: usize) {
        for r in &mut self.rows {
            let (x, z) = (r.x >> c & 1, r.z >> c & 1);
            r.sign ^= x & z == 1;
            r.x = (r.x & !(1 << c)) | (z << c);
            r.z = (r.z & !(1 << c)) | (x << c);
        }
    }

    fn s_col(&mut self, c: usize) {
        for r in &mut self.rows {
            let (x, z) = (r.x >> c & 1, r.z >> c & 1);
            r.sign ^= x & z == 1;
            r.z ^= x << c;
        }
    }

    fn sdg_col(&mut self, c: usize) {
        for r in &mut self.rows {
            let (x, z) = (r.x >> c & 1, r.z >> c & 1);
            r.sign ^= x & (z ^ 1) == 1;
            r.z ^= x << c;
        }
    }

    fn cz_cols(&mut self, a: usize, b: usize) {
        for r in &mut self.rows {
            let (xa, xb) = (r.x >> a & 1, r.x >> b & 1);
            let (za, zb) = (r.z >> a & 1, r.z >> b & 1);
            r.sign ^= xa & xb & (za ^ zb) == 1;
            r.z ^= (xb << a) | (xa << b);
        }
    }

    fn pauli_col(&mut self, p: Pauli, c: usize) {
        for r in &mut self.rows {
            let (x, z) = (r.x >> c & 1 == 1, r.z >> c & 1 == 1);
            r.sign ^= match p {
                Pauli::I => false,
                Pauli::X => z,
                Pauli::Z => x,
                Pauli::Y => x ^ z,
            };
        }
    }

    pub fn apply_gate(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::Cz(a, b) => {
                let (ca, cb) = (self.col(a)?, self.col(b)?);
                if ca == cb {
                    return Err(Error::InvalidArgument(format!("CZ on a single qubit {a}")));
                }
                self.cz_cols(ca, cb);
            }
            Gate::Lc(v) => {
                let c = self.col(v)?;
                let (graph, _) = self.graph_form().ok_or_else(|| {
                    Error::InvalidArgument("LC needs a graph state up to Z signs".into())
                })?;
                let nbrs: Vec<usize> = graph.neighbors(v)?.collect();
                // sqrt(-iX) = H S H and sqrt(iZ) = S^dagger, up to global phase.
                self.h_col(c);
                self.s_col(c);
                self.h_col(c);
                for w in nbrs {
                    let cw = self.col(w)?;
                    self.sdg_col(cw);
                }
            }
            Gate::Pauli(p, q) => {
                let c = self.col(q)?;
                self.pauli_col(p, c);
            }
            Gate::H(q) => {
                let c = self.col(q)?;
                self.h_col(c);
            }
            Gate::S(q) => {
                let c = self.col(q)?;
                self.s_col(c);
            }
            Gate::Sdg(q) => {
                let c = self.col(q)?;
                self.sdg_col(c);
            }
        }
        Ok(())
    }

    /// Express `target` (a symplectic row) as a product of generators.
    /// Returns the generator indices used and the signed product, or `None`
    /// when `target` is outside the group (up to sign).
    fn decompose(&self, target: &Row) -> Option<(Vec<usize>, Row)> {
        let n = self.rows.len();
        // Eliminate on copies while remembering which originals combine.
        let mut work: Vec<(u128, u128, Vec<bool>)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut used = vec![false; n];
                used[i] = true;
                (r.x, r.z, used)
            })
            .collect();
        let (mut tx, mut tz) = (target.x, target.z);
        let mut used_total = vec![false; n];
        let width = self.labels.len();
        let mut pivot_row = 0;
        let mut pivots: Vec<(usize, bool, usize)> = Vec::new();
        for bit in 0..2 * width {
            let (is_z, c) = (bit >= width, bit % width);
            let has = |w: &(u128, u128, Vec<bool>)| {
                let m = if is_z { w.1 } else { w.0 };
                m >> c & 1 == 1
            };
            let Some(p) = (pivot_row..n).find(|&r| has(&work[r])) else {
                continue;
            };
            work.swap(pivot_row, p);
            let pivot = work[pivot_row].clone();
            for (r, w) in work.iter_mut().enumerate() {
                if r != pivot_row && has(w) {
                    w.0 ^= pivot.0;
                    w.1 ^= pivot.1;
                    for (u, &pu) in w.2.iter_mut().zip(&pivot.2) {
                        *u ^= pu;
                    }
                }
            }
            pivots.push((c, is_z, pivot_row));
            pivot_row += 1;
        }
        for &(c, is_z, r) in &pivots {
            let m = if is_z { tz } else { tx };
            if m >> c & 1 == 1 {
                tx ^= work[r].0;
                tz ^= work[r].1;
                for (u, &pu) in used_total.iter_mut().zip(&work[r].2) {
                    *u ^= pu;
                }
            }
        }
        if tx != 0 || tz != 0 {
            return None;
        }
        let idx: Vec<usize> = (0..n).filter(|&i| used_total[i]).collect();
        let mut product = Row::IDENTITY;
        for &i in &idx {
            product.left_multiply(&self.rows[i]);
        }
        debug_assert_eq!((product.x, product.z), (target.x, target.z));
        Some((idx, product))
    }

    /// Measure `basis` on qubit `q`, then trace the qubit out.
    /// Outcome `true` means eigenvalue `-1`.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        basis: Basis,
        q: usize,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<bool> {
        let c = self.col(q)?;
        let (px, pz) = match basis {
            Basis::X => (true, false),
            Basis::Y => (true, true),
            Basis::Z => (false, true),
        };
        let p = Row {
            x: (px as u128) << c,
            z: (pz as u128) << c,
            sign: false,
        };
        let anti: Vec<usize> = (0..self.rows.len())
            .filter(|&i| !self.rows[i].commutes_with(&p))
            .collect();
        let (pivot, outcome) = if let Some((&first, rest)) = anti.split_first() {
            let pivot_row = self.rows[first];
            for &i in rest {
                self.rows[i].left_multiply(&pivot_row);
            }
            let outcome = forced.unwrap_or_else(|| rng.gen::<bool>());
            self.rows[first] = Row { sign: outcome, ..p };
            (first, outcome)
        } else {
            let (idx, product) = self
                .decompose(&p)
                .expect("a commuting Pauli on a pure stabilizer state lies in the group");
            let outcome = product.sign;
            if let Some(f) = forced {
                if f != outcome {
                    return Err(Error::ForcedOutcomeImpossible { forced: f });
                }
            }
            self.rows[idx[0]] = product;
            (idx[0], outcome)
        };
        // Strip the measured column from every other generator.
        let pivot_row = self.rows[pivot];
        for i in 0..self.rows.len() {
            if i != pivot && ((self.rows[i].x | self.rows[i].z) >> c) & 1 == 1 {
                self.rows[i].left_multiply(&pivot_row);
            }
        }
        self.rows.remove(pivot);
        self.labels.remove(c);
        let low = (1u128 << c) - 1;
        for r in &mut self.rows {
            r.x = (r.x & low) | ((r.x >> 1) & !low);
            r.z = (r.z & low) | ((r.z >> 1) & !low);
        }
        Ok(outcome)
    }

    /// If the state is `Z^b |G>` for a graph `G`, return `G` (on the qubit
    /// labels) and the set of qubits where `b` is 1.
    pub fn graph_form(&self) -> Option<(LabeledGraph, BTreeSet<usize>)> {
        let n = self.labels.len();
        let mut rows = self.rows.clone();
        for c in 0..n {
            let p = (c..n).find(|&r| rows[r].x >> c & 1 == 1)?;
            rows.swap(c, p);
            let pivot = rows[c];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != c && row.x >> c & 1 == 1 {
                    row.left_multiply(&pivot);
                }
            }
        }
        let mut g = LabeledGraph::with_vertices(self.labels.iter().copied());
        let mut flipped = BTreeSet::new();
        for (c, row) in rows.iter().enumerate() {
            if row.z >> c & 1 == 1 {
                return None;
            }
            for (d, other) in rows.iter().enumerate().skip(c + 1) {
                let (cd, dc) = (row.z >> d & 1 == 1, other.z >> c & 1 == 1);
                if cd != dc {
                    return None;
                }
                if cd {
                    g.add_edge(self.labels[c], self.labels[d]).ok()?;
                }
            }
            if row.sign {
                flipped.insert(self.labels[c]);
            }
        }
        Some((g, flipped))
    }

    /// Generators pairwise commute and are independent.
    pub fn is_valid(&self) -> bool {
        let n = self.rows.len();
        if n != self.labels.len() {
            return false;
        }
        for i in 0..n {
            for j in i + 1..n {
                if !self.rows[i].commutes_with(&self.rows[j]) {
                    return false;
                }
            }
        }
        let mut packed: Vec<Vec<u64>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.x as u64,
                    (r.x >> 64) as u64,
                    r.z as u64,
                    (r.z >> 64) as u64,
                ]
            })
            .collect();
        crate::gf2_linalg::rank_of_rows(&mut packed, 256) == n
    }

    /// True iff both tableaus generate the same signed stabilizer group.
    pub fn stabilizer_equal(&self, other: &StabilizerTableau) -> Result<bool> {
        if self.labels.len() != other.labels.len() {
            return Err(Error::SizeMismatch(self.labels.len(), other.labels.len()));
        }
        let mine: BTreeSet<usize> = self.labels.iter().copied().collect();
        if other.labels.iter().any(|l| !mine.contains(l)) {
            return Ok(false);
        }
        let to_mine: Vec<usize> = other
            .labels
            .iter()
            .map(|l| self.labels.iter().position(|m| m == l).unwrap())
            .collect();
        for r in &other.rows {
            let mut mapped = Row {
                sign: r.sign,
                ..Row::IDENTITY
            };
            for (c, &mc) in to_mine.iter().enumerate() {
                mapped.x |= (r.x >> c & 1) << mc;
                mapped.z |= (r.z >> c & 1) << mc;
            }
            match self.decompose(&mapped) {
                Some((_, product)) if product.sign == mapped.sign => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    /// Z-basis measurement followed by the outcome-conditioned `Z` corrections
    /// on the former neighbors, leaving the graph state of `G - v`.
    pub fn measure_z_corrected<R: Rng + ?Sized>(&mut self, v: usize, rng: &mut R) -> Result<bool> {
        let nbrs = self.neighbors_of(v)?;
        let outcome = self.measure_pauli(Basis::Z, v, None, rng)?;
        if outcome {
            for w in nbrs {
                self.apply_gate(Gate::Pauli(Pauli::Z, w))?;
            }
        }
        Ok(outcome)
    }

    /// Y-basis measurement followed by the local Clifford corrections that
    /// leave the graph state of `tau_v(G) - v`.
    pub fn measure_y_corrected<R: Rng + ?Sized>(&mut self, v: usize, rng: &mut R) -> Result<bool> {
        let nbrs = self.neighbors_of(v)?;
        let outcome = self.measure_pauli(Basis::Y, v, None, rng)?;
        for w in nbrs {
            self.apply_gate(if outcome { Gate::S(w) } else { Gate::Sdg(w) })?;
        }
        Ok(outcome)
    }

    fn neighbors_of(&self, v: usize) -> Result<Vec<usize>> {
        let (graph, _) = self
            .graph_form()
            .ok_or_else(|| Error::InvalidArgument("state is not a graph state".into()))?;
        let nbrs = graph.neighbors(v)?.collect();
        Ok(nbrs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_state::{self, generators};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn paulis(t: &StabilizerTableau) -> Vec<(bool, Vec<Pauli>)> {
        t.generators()
            .into_iter()
            .map(|g| (g.negative, g.ops.into_iter().map(|(_, p)| p).collect()))
            .collect()
    }

    #[test]
    fn from_graph_examples() {
        let single = StabilizerTableau::from_graph(&LabeledGraph::with_vertices([0])).unwrap();
        assert_eq!(paulis(&single), vec![(false, vec![Pauli::X])]);
        let k2 = StabilizerTableau::from_graph(&generators::complete(2)).unwrap();
        assert_eq!(
            paulis(&k2),
            vec![(false, vec![Pauli::X, Pauli::Z]), (false, vec![Pauli::Z, Pauli::X])]
        );
        let e3 = StabilizerTableau::plus_state(0..3).unwrap();
        assert_eq!(paulis(&e3)[1], (false, vec![Pauli::I, Pauli::X, Pauli::I]));
        assert!(k2.is_valid());
    }

    #[test]
    fn gate_examples() {
        let g = generators::gnp(5, 0.5, 3);
        let t = StabilizerTableau::from_graph(&g).unwrap();
        let mut twice = t.clone();
        twice.apply_gate(Gate::Cz(1, 3)).unwrap();
        twice.apply_gate(Gate::Cz(3, 1)).unwrap();
        assert!(twice.stabilizer_equal(&t).unwrap());

        let mut plus = StabilizerTableau::plus_state([4]).unwrap();
        plus.apply_gate(Gate::Pauli(Pauli::X, 4)).unwrap();
        assert!(plus.stabilizer_equal(&StabilizerTableau::plus_state([4]).unwrap()).unwrap());
        assert_eq!(plus.apply_gate(Gate::Pauli(Pauli::X, 9)), Err(Error::UnknownQubit(9)));
    }

    #[test]
    fn cz_and_lc_match_graph_rules() {
        for seed in 0..200u64 {
            let n = 2 + (seed as usize % 7);
            let g = generators::gnp(n, 0.5, seed);
            let t = StabilizerTableau::from_graph(&g).unwrap();
            let (a, b) = ((seed as usize) % n, (seed as usize / 3 + 1) % n);
            if a != b {
                let mut tc = t.clone();
                tc.apply_gate(Gate::Cz(a, b)).unwrap();
                let expect = StabilizerTableau::from_graph(&graph_state::apply_cz(&g, a, b).unwrap()).unwrap();
                assert!(tc.stabilizer_equal(&expect).unwrap());
                assert!(tc.is_valid());
            }
            let mut tl = t.clone();
            tl.apply_gate(Gate::Lc(a)).unwrap();
            let expect = StabilizerTableau::from_graph(&graph_state::local_complement(&g, a).unwrap()).unwrap();
            assert!(tl.stabilizer_equal(&expect).unwrap(), "seed {seed}: {g:?} LC({a})");
            assert!(tl.is_valid());
        }
    }

    #[test]
    fn measurements_match_graph_rules() {
        for seed in 0..200u64 {
            let n = 2 + (seed as usize % 7);
            let g = generators::gnp(n, 0.5, seed);
            let v = (seed as usize * 5) % n;
            let mut r = rng(seed);

            let mut tz = StabilizerTableau::from_graph(&g).unwrap();
            tz.measure_z_corrected(v, &mut r).unwrap();
            let (gz, _) = graph_state::measure(&g, v, Basis::Z).unwrap();
            assert!(tz.stabilizer_equal(&StabilizerTableau::from_graph(&gz).unwrap()).unwrap());
            assert!(tz.is_valid());

            let mut ty = StabilizerTableau::from_graph(&g).unwrap();
            ty.measure_y_corrected(v, &mut r).unwrap();
            let (gy, _) = graph_state::measure(&g, v, Basis::Y).unwrap();
            assert!(
                ty.stabilizer_equal(&StabilizerTableau::from_graph(&gy).unwrap()).unwrap(),
                "seed {seed}: Y on {v} of {g:?}"
            );
        }
    }

    #[test]
    fn z_on_plus_is_uniform_and_forcing() {
        let mut ones = 0;
        let mut r = rng(7);
        for _ in 0..2000 {
            let mut t = StabilizerTableau::plus_state([0]).unwrap();
            ones += t.measure_pauli(Basis::Z, 0, None, &mut r).unwrap() as usize;
            assert_eq!(t.qubit_count(), 0);
        }
        assert!((900..1100).contains(&ones), "{ones}");

        let mut t = StabilizerTableau::plus_state([0, 1]).unwrap();
        assert_eq!(t.measure_pauli(Basis::X, 0, Some(false), &mut r), Ok(false));
        let mut t = StabilizerTableau::plus_state([0]).unwrap();
        assert_eq!(
            t.measure_pauli(Basis::X, 0, Some(true), &mut r),
            Err(Error::ForcedOutcomeImpossible { forced: true })
        );
        let mut t = StabilizerTableau::plus_state([0]).unwrap();
        assert_eq!(t.measure_pauli(Basis::Z, 0, Some(true), &mut r), Ok(true));
    }

    #[test]
    fn equality_examples() {
        let g = generators::gnp(6, 0.5, 1);
        let t = StabilizerTableau::from_graph(&g).unwrap();
        assert!(t.stabilizer_equal(&t).unwrap());
        let k2 = StabilizerTableau::from_graph(&generators::complete(2)).unwrap();
        let e2 = StabilizerTableau::plus_state(0..2).unwrap();
        assert!(!k2.stabilizer_equal(&e2).unwrap());
        let mut permuted = t.clone();
        permuted.rows.reverse();
        assert!(t.stabilizer_equal(&permuted).unwrap());
        assert!(t.stabilizer_equal(&e2).is_err());
    }

    #[test]
    fn distinct_z_frames_are_distinct_states() {
        for n in 1..=5usize {
            let g = generators::gnp(n, 0.6, n as u64);
            let states: Vec<StabilizerTableau> = (0u32..(1 << n))
                .map(|b| {
                    let mut t = StabilizerTableau::from_graph(&g).unwrap();
                    for q in (0..n).filter(|q| b >> q & 1 == 1) {
                        t.apply_gate(Gate::Pauli(Pauli::Z, q)).unwrap();
                    }
                    t
                })
                .collect();
            for i in 0..states.len() {
                for j in i + 1..states.len() {
                    assert!(!states[i].stabilizer_equal(&states[j]).unwrap());
                }
            }
        }
    }

    #[test]
    fn graph_form_reports_z_frame() {
        let g = generators::gnp(6, 0.5, 9);
        let mut t = StabilizerTableau::from_graph(&g).unwrap();
        t.apply_gate(Gate::Pauli(Pauli::Z, 2)).unwrap();
        t.apply_gate(Gate::Pauli(Pauli::Z, 5)).unwrap();
        let (h, flips) = t.graph_form().unwrap();
        assert_eq!(h, g);
        assert_eq!(flips, BTreeSet::from([2, 5]));
        t.apply_gate(Gate::S(0)).unwrap();
        assert!(t.graph_form().is_none());
    }
}
