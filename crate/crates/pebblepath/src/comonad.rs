//! The length-bounded pebble-relation construction `PR[k, n]` and its
//! comonad structure.
//!
//! A *pebble sequence* over a universe is a non-empty word of placements
//! `(pebble, element)` with pebbles drawn from `1..=k`; an *indexed play*
//! pairs such a sequence with a distinguished position `1..=len`. The
//! carrier of `PR[k, n] A` consists of all indexed plays over `A` of length
//! at most `n`; its relations relate positions of one shared sequence whose
//! pebbles are still active at the latest distinguished position and whose
//! underlying elements satisfy the base relation.
//!
//! The unindexed variant (`PebblingStructure`) keeps whole sequences as
//! elements and relates pairwise prefix-comparable sequences; projecting an
//! indexed play onto its index-prefix is a morphism from the indexed to the
//! unindexed construction, and both directions are exercised by
//! [`check_comonad_laws`].

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::structure::{Element, Structure};

/// 1-based pebble identifier.
pub type Pebble = usize;

/// Default cap on the number of carrier points a materialization may have.
pub const DEFAULT_CARRIER_BUDGET: usize = 2_000_000;

/// A non-empty word of pebble placements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PebbleSeq<E> {
    placements: Vec<(Pebble, E)>,
}

impl<E> PebbleSeq<E> {
    /// Builds a sequence, requiring at least one placement and 1-based
    /// pebbles.
    pub fn new(placements: Vec<(Pebble, E)>) -> Result<Self> {
        if placements.is_empty() {
            return Err(Error::InvalidPlay("empty pebble sequence".into()));
        }
        if placements.iter().any(|&(p, _)| p == 0) {
            return Err(Error::InvalidPlay("pebbles are numbered from 1".into()));
        }
        Ok(PebbleSeq { placements })
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn placements(&self) -> &[(Pebble, E)] {
        &self.placements
    }

    /// Pebble of the placement at 1-based position `i`.
    pub fn pebble_at(&self, i: usize) -> Pebble {
        self.placements[i - 1].0
    }

    /// Element of the placement at 1-based position `i`.
    pub fn element_at(&self, i: usize) -> &E {
        &self.placements[i - 1].1
    }

    /// The prefix of length `i >= 1`.
    pub fn prefix(&self, i: usize) -> PebbleSeq<E>
    where
        E: Clone,
    {
        PebbleSeq {
            placements: self.placements[..i].to_vec(),
        }
    }

    /// True iff `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_prefix_of(&self, other: &PebbleSeq<E>) -> bool
    where
        E: PartialEq,
    {
        self.len() <= other.len() && self.placements == other.placements[..self.len()]
    }

    /// The pebble of the last placement.
    pub fn last_pebble(&self) -> Pebble {
        self.placements[self.len() - 1].0
    }

    /// The element of the last placement.
    pub fn last_element(&self) -> &E {
        &self.placements[self.len() - 1].1
    }

    /// The element most recently pinned by pebble `p`, if any.
    pub fn last_pebbled(&self, p: Pebble) -> Option<&E> {
        self.placements
            .iter()
            .rev()
            .find(|&&(q, _)| q == p)
            .map(|(_, e)| e)
    }

    /// True iff pebble `p` occurs among positions `lo+1 ..= hi` (1-based,
    /// half-open at the bottom).
    pub fn pebble_occurs_in(&self, p: Pebble, lo: usize, hi: usize) -> bool {
        self.placements[lo..hi].iter().any(|&(q, _)| q == p)
    }

    /// Elements currently pinned by some pebble, with the pinning pebble.
    pub fn active_placements(&self) -> BTreeMap<Pebble, &E> {
        let mut out = BTreeMap::new();
        for (p, e) in self.placements.iter().rev() {
            out.entry(*p).or_insert(e);
        }
        out
    }

    /// Applies `f` to every element (the functor action on sequences).
    pub fn map<F, G: FnMut(&E) -> F>(&self, mut f: G) -> PebbleSeq<F> {
        PebbleSeq {
            placements: self.placements.iter().map(|(p, e)| (*p, f(e))).collect(),
        }
    }
}

/// Elements currently pinned by some pebble of `s`, deduplicated.
pub fn active_elements<E: Clone + Ord>(s: &PebbleSeq<E>) -> Vec<E> {
    let mut out: Vec<E> = s.active_placements().values().map(|e| (*e).clone()).collect();
    out.sort();
    out.dedup();
    out
}

/// A pebble sequence with a distinguished 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexedPlay<E> {
    seq: PebbleSeq<E>,
    index: usize,
}

impl<E> IndexedPlay<E> {
    pub fn new(seq: PebbleSeq<E>, index: usize) -> Result<Self> {
        if index == 0 || index > seq.len() {
            return Err(Error::InvalidPlay(format!(
                "index {index} out of range for sequence of length {}",
                seq.len()
            )));
        }
        Ok(IndexedPlay { seq, index })
    }

    pub fn seq(&self) -> &PebbleSeq<E> {
        &self.seq
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// The placement at the distinguished position.
    pub fn placement(&self) -> (Pebble, &E) {
        let (p, e) = &self.seq.placements[self.index - 1];
        (*p, e)
    }

    /// Applies `f` to every element (the functor action on plays).
    pub fn map<F, G: FnMut(&E) -> F>(&self, f: G) -> IndexedPlay<F> {
        IndexedPlay {
            seq: self.seq.map(f),
            index: self.index,
        }
    }
}

/// The counit: an indexed play yields the element at its index.
pub fn counit<E: Clone>(p: &IndexedPlay<E>) -> E {
    p.seq.element_at(p.index).clone()
}

/// The comultiplication: replaces each element of the sequence by the play
/// pointing at its own position, keeping the index.
pub fn comultiplication<E: Clone>(p: &IndexedPlay<E>) -> IndexedPlay<IndexedPlay<E>> {
    let inner: Vec<(Pebble, IndexedPlay<E>)> = (1..=p.seq.len())
        .map(|j| {
            (
                p.seq.pebble_at(j),
                IndexedPlay {
                    seq: p.seq.clone(),
                    index: j,
                },
            )
        })
        .collect();
    IndexedPlay {
        seq: PebbleSeq { placements: inner },
        index: p.index,
    }
}

/// Projects an indexed play onto its index-prefix; the comparison morphism
/// from the indexed to the unindexed construction.
pub fn prefix_projection<E: Clone>(p: &IndexedPlay<E>) -> PebbleSeq<E> {
    p.seq.prefix(p.index)
}

/// Comultiplication of the unindexed construction: replaces each placement
/// by the prefix ending at it.
pub fn seq_comultiplication<E: Clone>(s: &PebbleSeq<E>) -> PebbleSeq<PebbleSeq<E>> {
    PebbleSeq {
        placements: (1..=s.len())
            .map(|j| (s.pebble_at(j), s.prefix(j)))
            .collect(),
    }
}

/// Number of carrier points of `PR[k, n]` over a universe of `size`
/// elements: `sum over m = 1..=n of m * (k * size)^m`.
pub fn carrier_size(size: usize, k: usize, n: usize) -> u128 {
    let alphabet = (k as u128) * (size as u128);
    let mut total: u128 = 0;
    let mut power: u128 = 1;
    for m in 1..=n {
        power = power.saturating_mul(alphabet);
        total = total.saturating_add((m as u128).saturating_mul(power));
    }
    total
}

/// The materialized structure `PR[k, n] A`: all indexed plays of length at
/// most `n` with pebbles `1..=k`, under the lifted relations.
///
/// Carrier enumeration order is pinned: by sequence length, then by the
/// sequence (placements compared as `(pebble, element)` pairs, left to
/// right), then by index. Element names of the lifted structure are the
/// text encodings of the plays.
#[derive(Debug, Clone)]
pub struct PebbleRelation {
    k: usize,
    n: usize,
    base: Structure,
    carrier: Vec<IndexedPlay<Element>>,
    seqs: Vec<PebbleSeq<Element>>,
    seq_first_point: Vec<usize>,
    seq_index: HashMap<PebbleSeq<Element>, usize>,
    lifted: Structure,
}

impl PebbleRelation {
    /// Materializes `PR[k, n] a` under the default carrier budget.
    pub fn build(a: &Structure, k: usize, n: usize) -> Result<Self> {
        Self::build_with_budget(a, k, n, DEFAULT_CARRIER_BUDGET)
    }

    /// Materializes `PR[k, n] a`, refusing cleanly if the carrier would
    /// exceed `budget` points.
    pub fn build_with_budget(a: &Structure, k: usize, n: usize, budget: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPlay("k must be at least 1".into()));
        }
        if n == 0 {
            return Err(Error::InvalidPlay("n must be at least 1".into()));
        }
        let points = carrier_size(a.size(), k, n);
        if points > budget as u128 {
            return Err(Error::BudgetExceeded(format!(
                "PR[{k}, {n}] over {} elements has {points} carrier points, budget is {budget}",
                a.size()
            )));
        }

        // Enumerate sequences of each length in lexicographic order over
        // (pebble, element) placements.
        let mut seqs: Vec<PebbleSeq<Element>> = Vec::new();
        let mut current: Vec<Vec<(Pebble, Element)>> = vec![Vec::new()];
        for _ in 1..=n {
            let mut next = Vec::new();
            for word in &current {
                for p in 1..=k {
                    for e in 0..a.size() {
                        let mut w = word.clone();
                        w.push((p, e));
                        next.push(w);
                    }
                }
            }
            for w in &next {
                seqs.push(PebbleSeq {
                    placements: w.clone(),
                });
            }
            current = next;
        }

        let mut carrier = Vec::with_capacity(points as usize);
        let mut seq_first_point = Vec::with_capacity(seqs.len());
        let mut seq_index = HashMap::with_capacity(seqs.len());
        for (si, s) in seqs.iter().enumerate() {
            seq_first_point.push(carrier.len());
            seq_index.insert(s.clone(), si);
            for i in 1..=s.len() {
                carrier.push(IndexedPlay {
                    seq: s.clone(),
                    index: i,
                });
            }
        }
        debug_assert_eq!(carrier.len() as u128, points);

        // Lifted relations: positions of one shared sequence, all of whose
        // pebbles are still active at the latest position, with the base
        // relation on the underlying elements.
        let universe: Vec<String> = carrier.iter().map(|p| encode_play(p, &a)).collect();
        let mut relations: BTreeMap<String, Vec<Vec<Element>>> = BTreeMap::new();
        for (name, arity) in a.signature().entries() {
            let mut tuples = Vec::new();
            for (si, s) in seqs.iter().enumerate() {
                let first = seq_first_point[si];
                let m = s.len();
                let mut indices = vec![1usize; arity];
                loop {
                    if lifted_tuple_ok(s, &indices) {
                        let elems: Vec<Element> = indices
                            .iter()
                            .map(|&i| *s.element_at(i))
                            .collect();
                        if a.has(name, &elems) {
                            tuples.push(indices.iter().map(|&i| first + i - 1).collect());
                        }
                    }
                    // Advance the index odometer.
                    let mut pos = 0;
                    loop {
                        if pos == arity {
                            break;
                        }
                        indices[pos] += 1;
                        if indices[pos] <= m {
                            break;
                        }
                        indices[pos] = 1;
                        pos += 1;
                    }
                    if pos == arity {
                        break;
                    }
                }
            }
            relations.insert(name.to_string(), tuples);
        }
        let lifted = Structure::new(a.signature().clone(), universe, relations)?;
        Ok(PebbleRelation {
            k,
            n,
            base: a.clone(),
            carrier,
            seqs,
            seq_first_point,
            seq_index,
            lifted,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &Structure {
        &self.base
    }

    /// Carrier points in the pinned enumeration order.
    pub fn carrier(&self) -> &[IndexedPlay<Element>] {
        &self.carrier
    }

    /// All sequences of length `1..=n`, in enumeration order.
    pub fn seqs(&self) -> &[PebbleSeq<Element>] {
        &self.seqs
    }

    /// The lifted structure (universe indices follow the carrier order).
    pub fn as_structure(&self) -> &Structure {
        &self.lifted
    }

    /// Carrier index of a play.
    pub fn index_of(&self, play: &IndexedPlay<Element>) -> Option<usize> {
        let si = *self.seq_index.get(&play.seq)?;
        Some(self.seq_first_point[si] + play.index - 1)
    }

    /// Carrier index of `(seq, index)`.
    pub fn index_of_parts(&self, seq: &PebbleSeq<Element>, index: usize) -> Option<usize> {
        if index == 0 || index > seq.len() {
            return None;
        }
        let si = *self.seq_index.get(seq)?;
        Some(self.seq_first_point[si] + index - 1)
    }
}

/// The active-pebble condition for a lifted tuple over one sequence: each
/// chosen position's pebble must not be re-placed between that position and
/// the latest chosen position.
fn lifted_tuple_ok(s: &PebbleSeq<Element>, indices: &[usize]) -> bool {
    let hi = *indices.iter().max().expect("arities are positive");
    indices
        .iter()
        .all(|&i| !s.pebble_occurs_in(s.pebble_at(i), i, hi))
}

/// The materialized unindexed construction `P[k, n] A`: sequences of length
/// `1..=n` as elements, related when pairwise prefix-comparable with active
/// final pebbles and base-related final elements.
#[derive(Debug, Clone)]
pub struct PebblingStructure {
    seqs: Vec<PebbleSeq<Element>>,
    seq_index: HashMap<PebbleSeq<Element>, usize>,
    structure: Structure,
}

impl PebblingStructure {
    pub fn build(a: &Structure, k: usize, n: usize) -> Result<Self> {
        Self::build_with_budget(a, k, n, DEFAULT_CARRIER_BUDGET)
    }

    pub fn build_with_budget(a: &Structure, k: usize, n: usize, budget: usize) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::InvalidPlay("k and n must be at least 1".into()));
        }
        let alphabet = (k as u128) * (a.size() as u128);
        let mut count: u128 = 0;
        let mut power: u128 = 1;
        for _ in 1..=n {
            power = power.saturating_mul(alphabet);
            count = count.saturating_add(power);
        }
        if count > budget as u128 {
            return Err(Error::BudgetExceeded(format!(
                "P[{k}, {n}] over {} elements has {count} sequences, budget is {budget}",
                a.size()
            )));
        }
        let mut seqs: Vec<PebbleSeq<Element>> = Vec::new();
        let mut current: Vec<Vec<(Pebble, Element)>> = vec![Vec::new()];
        for _ in 1..=n {
            let mut next = Vec::new();
            for word in &current {
                for p in 1..=k {
                    for e in 0..a.size() {
                        let mut w = word.clone();
                        w.push((p, e));
                        next.push(w);
                    }
                }
            }
            for w in &next {
                seqs.push(PebbleSeq {
                    placements: w.clone(),
                });
            }
            current = next;
        }
        let mut seq_index = HashMap::with_capacity(seqs.len());
        for (i, s) in seqs.iter().enumerate() {
            seq_index.insert(s.clone(), i);
        }
        let universe: Vec<String> = seqs.iter().map(|s| encode_seq(s, a)).collect();
        let mut relations: BTreeMap<String, Vec<Vec<Element>>> = BTreeMap::new();
        for (name, arity) in a.signature().entries() {
            let mut tuples = Vec::new();
            let mut pick = vec![0usize; arity];
            loop {
                let chosen: Vec<&PebbleSeq<Element>> = pick.iter().map(|&i| &seqs[i]).collect();
                if unindexed_tuple_ok(&chosen) {
                    let elems: Vec<Element> =
                        chosen.iter().map(|s| *s.last_element()).collect();
                    if a.has(name, &elems) {
                        tuples.push(pick.clone());
                    }
                }
                let mut pos = 0;
                loop {
                    if pos == arity {
                        break;
                    }
                    pick[pos] += 1;
                    if pick[pos] < seqs.len() {
                        break;
                    }
                    pick[pos] = 0;
                    pos += 1;
                }
                if pos == arity || seqs.is_empty() {
                    break;
                }
            }
            relations.insert(name.to_string(), tuples);
        }
        let structure = Structure::new(a.signature().clone(), universe, relations)?;
        Ok(PebblingStructure {
            seqs,
            seq_index,
            structure,
        })
    }

    pub fn seqs(&self) -> &[PebbleSeq<Element>] {
        &self.seqs
    }

    pub fn as_structure(&self) -> &Structure {
        &self.structure
    }

    pub fn index_of(&self, s: &PebbleSeq<Element>) -> Option<usize> {
        self.seq_index.get(s).copied()
    }
}

/// Pairwise prefix-comparability plus the active-pebble condition on every
/// comparable pair.
fn unindexed_tuple_ok(chosen: &[&PebbleSeq<Element>]) -> bool {
    for (ai, &a) in chosen.iter().enumerate() {
        for &b in chosen.iter().skip(ai + 1) {
            let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
            if !short.is_prefix_of(long) {
                return false;
            }
        }
    }
    // For each pair (s, t) with s a prefix of t, the pebble finishing s may
    // not be re-placed in the extension of s inside t. Equal sequences give
    // an empty extension, so the condition is vacuous for them.
    for &a in chosen {
        for &b in chosen {
            if a.len() <= b.len() && a.is_prefix_of(b) {
                if b.pebble_occurs_in(a.last_pebble(), a.len(), b.len()) {
                    return false;
                }
            }
        }
    }
    true
}

/// A coKleisli map out of a materialized `PR[k, n] A`: a total assignment
/// of a target element to every carrier play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoKleisliMap {
    k: usize,
    n: usize,
    values: BTreeMap<IndexedPlay<Element>, Element>,
}

impl CoKleisliMap {
    /// Tabulates `f` over the carrier of `pr`.
    pub fn from_fn(
        pr: &PebbleRelation,
        mut f: impl FnMut(&IndexedPlay<Element>) -> Element,
    ) -> Self {
        let values = pr
            .carrier()
            .iter()
            .map(|play| (play.clone(), f(play)))
            .collect();
        CoKleisliMap {
            k: pr.k(),
            n: pr.n(),
            values,
        }
    }

    /// Builds a map from explicit `(play, value)` entries; the entries must
    /// cover the full carrier of `pr` exactly.
    pub fn from_entries(
        pr: &PebbleRelation,
        entries: BTreeMap<IndexedPlay<Element>, Element>,
    ) -> Result<Self> {
        for play in pr.carrier() {
            if !entries.contains_key(play) {
                return Err(Error::InvalidPlay(format!(
                    "coKleisli map misses carrier play {}",
                    encode_play(play, pr.base())
                )));
            }
        }
        if entries.len() != pr.carrier().len() {
            return Err(Error::InvalidPlay(
                "coKleisli map has entries outside the carrier".into(),
            ));
        }
        Ok(CoKleisliMap {
            k: pr.k(),
            n: pr.n(),
            values: entries,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, play: &IndexedPlay<Element>) -> Option<Element> {
        self.values.get(play).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&IndexedPlay<Element>, Element)> {
        self.values.iter().map(|(p, &v)| (p, v))
    }

    /// The coextension: maps `(s, i)` to `(t, i)` where `t` keeps the
    /// pebbles of `s` and replaces each element by the map's value at the
    /// corresponding position.
    pub fn coextend(&self, play: &IndexedPlay<Element>) -> Result<IndexedPlay<Element>> {
        let s = play.seq();
        let mut placements = Vec::with_capacity(s.len());
        for j in 1..=s.len() {
            let at_j = IndexedPlay {
                seq: s.clone(),
                index: j,
            };
            let v = self.value(&at_j).ok_or_else(|| {
                Error::InvalidPlay("coextension applied outside the map's carrier".into())
            })?;
            placements.push((s.pebble_at(j), v));
        }
        Ok(IndexedPlay {
            seq: PebbleSeq { placements },
            index: play.index(),
        })
    }

    /// True iff the map is a homomorphism from the lifted structure to `b`:
    /// every lifted tuple maps into the corresponding relation of `b`.
    pub fn is_morphism(&self, pr: &PebbleRelation, b: &Structure) -> bool {
        if pr.base().signature() != b.signature() {
            return false;
        }
        let table: Vec<Element> = pr
            .carrier()
            .iter()
            .map(|play| self.value(play).unwrap_or(usize::MAX))
            .collect();
        if table.iter().any(|&v| v >= b.size()) {
            return false;
        }
        pr.as_structure().is_total_hom(b, &table)
    }
}

/// Report of the comonad-law suite over one materialized instance.
#[derive(Debug, Clone)]
pub struct LawReport {
    /// Seed used for the pseudo-random probe maps.
    pub seed: u64,
    /// Number of probe maps (counit, constants, seeded maps).
    pub probe_count: usize,
    /// Coextension of the counit is the identity on the carrier.
    pub counit_coextension_identity: bool,
    /// Counit after coextension recovers the original map, for every probe.
    pub counit_after_coextension: bool,
    /// Coextending a composite through a coextension equals composing the
    /// coextensions, for every probe pair.
    pub coextension_composition: bool,
    /// Mapping the counit over the comultiplied play recovers the play.
    pub comultiplication_counit_inner: bool,
    /// The counit of the comultiplied play recovers the play.
    pub comultiplication_counit_outer: bool,
    /// Prefix projection commutes with comultiplication (the comparison
    /// square with the unindexed construction).
    pub prefix_comultiplication_square: bool,
    /// The final element of the projected prefix is the counit.
    pub prefix_counit: bool,
    /// Human-readable witnesses for any failures.
    pub failures: Vec<String>,
}

impl LawReport {
    pub fn all_hold(&self) -> bool {
        self.counit_coextension_identity
            && self.counit_after_coextension
            && self.coextension_composition
            && self.comultiplication_counit_inner
            && self.comultiplication_counit_outer
            && self.prefix_comultiplication_square
            && self.prefix_counit
    }
}

/// Evaluates the comonad laws of `PR[k, n] a` exhaustively over the carrier
/// against probe maps (the counit, two constants, and two seeded
/// pseudo-random maps).
pub fn check_comonad_laws(a: &Structure, k: usize, n: usize, seed: u64) -> Result<LawReport> {
    let pr = PebbleRelation::build(a, k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut probes: Vec<CoKleisliMap> = Vec::new();
    probes.push(CoKleisliMap::from_fn(&pr, counit));
    if a.size() > 0 {
        probes.push(CoKleisliMap::from_fn(&pr, |_| 0));
        probes.push(CoKleisliMap::from_fn(&pr, |_| a.size() - 1));
        for _ in 0..2 {
            let table: Vec<Element> = (0..pr.carrier().len())
                .map(|_| rng.gen_range(0..a.size()))
                .collect();
            let mut i = 0;
            probes.push(CoKleisliMap::from_fn(&pr, |_| {
                let v = table[i];
                i += 1;
                v
            }));
        }
    }

    let mut report = LawReport {
        seed,
        probe_count: probes.len(),
        counit_coextension_identity: true,
        counit_after_coextension: true,
        coextension_composition: true,
        comultiplication_counit_inner: true,
        comultiplication_counit_outer: true,
        prefix_comultiplication_square: true,
        prefix_counit: true,
        failures: Vec::new(),
    };

    let describe = |play: &IndexedPlay<Element>| encode_play(play, a);

    // Coextension of the counit is the identity.
    let counit_map = &probes[0];
    for play in pr.carrier() {
        if counit_map.coextend(play)? != *play {
            report.counit_coextension_identity = false;
            report
                .failures
                .push(format!("counit coextension moved {}", describe(play)));
            break;
        }
    }

    // Counit after coextension recovers the probe.
    'probe2: for (pi, f) in probes.iter().enumerate() {
        for play in pr.carrier() {
            let lhs = counit(&f.coextend(play)?);
            let rhs = f.value(play).expect("probe covers carrier");
            if lhs != rhs {
                report.counit_after_coextension = false;
                report.failures.push(format!(
                    "probe {pi}: counit after coextension differs at {}",
                    describe(play)
                ));
                break 'probe2;
            }
        }
    }

    // (g after coextension of f), coextended, equals composing the two
    // coextensions.
    'probe3: for (fi, f) in probes.iter().enumerate() {
        for (gi, g) in probes.iter().enumerate() {
            let composite = CoKleisliMap::from_fn(&pr, |play| {
                let via = f.coextend(play).expect("carrier is closed under coextension");
                g.value(&via).expect("probe covers carrier")
            });
            for play in pr.carrier() {
                let lhs = composite.coextend(play)?;
                let rhs = g.coextend(&f.coextend(play)?)?;
                if lhs != rhs {
                    report.coextension_composition = false;
                    report.failures.push(format!(
                        "probes ({fi}, {gi}): coextension composition differs at {}",
                        describe(play)
                    ));
                    break 'probe3;
                }
            }
        }
    }

    // Comultiplication counit laws and the comparison square.
    for play in pr.carrier() {
        let dd = comultiplication(play);

        let inner = dd.map(counit);
        if inner != *play {
            report.comultiplication_counit_inner = false;
            report.failures.push(format!(
                "inner counit law fails at {}",
                describe(play)
            ));
        }

        let outer = counit(&dd);
        if outer != *play {
            report.comultiplication_counit_outer = false;
            report.failures.push(format!(
                "outer counit law fails at {}",
                describe(play)
            ));
        }

        // prefix(map prefix over comultiplied) == seq-comultiplication of
        // the prefix.
        let lhs = prefix_projection(&dd.map(|inner_play| prefix_projection(inner_play)));
        let rhs = seq_comultiplication(&prefix_projection(play));
        if lhs != rhs {
            report.prefix_comultiplication_square = false;
            report.failures.push(format!(
                "comparison square fails at {}",
                describe(play)
            ));
        }

        if *prefix_projection(play).last_element() != counit(play) {
            report.prefix_counit = false;
            report.failures.push(format!(
                "prefix counit law fails at {}",
                describe(play)
            ));
        }

        if !report.comultiplication_counit_inner
            || !report.comultiplication_counit_outer
            || !report.prefix_comultiplication_square
            || !report.prefix_counit
        {
            break;
        }
    }

    Ok(report)
}

/// Encodes a sequence as `p:name;p:name;...` using the base structure's
/// element names.
pub fn encode_seq(s: &PebbleSeq<Element>, base: &Structure) -> String {
    let mut out = String::new();
    for (i, (p, e)) in s.placements().iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        let _ = write!(out, "{}:{}", p, base.element_name(*e));
    }
    out
}

/// Encodes an indexed play as `p:name;...@index`.
pub fn encode_play(play: &IndexedPlay<Element>, base: &Structure) -> String {
    format!("{}@{}", encode_seq(play.seq(), base), play.index())
}

/// Parses the sequence encoding produced by [`encode_seq`]. Pebbles are
/// checked against `k` when `k > 0`.
pub fn parse_seq(input: &str, base: &Structure, k: usize) -> Result<PebbleSeq<Element>> {
    let mut placements = Vec::new();
    for part in input.split(';') {
        let (pebble, name) = part.split_once(':').ok_or_else(|| {
            Error::ParseError(format!("placement {part:?} is not of the form pebble:element"))
        })?;
        let p: usize = pebble
            .parse()
            .map_err(|_| Error::ParseError(format!("bad pebble number {pebble:?}")))?;
        if p == 0 {
            return Err(Error::ParseError("pebbles are numbered from 1".into()));
        }
        if k > 0 && p > k {
            return Err(Error::ParseError(format!(
                "pebble {p} exceeds the announced bound {k}"
            )));
        }
        let e = base.element_by_name(name).ok_or_else(|| {
            Error::ParseError(format!("unknown element name {name:?}"))
        })?;
        placements.push((p, e));
    }
    PebbleSeq::new(placements)
}

/// Parses the play encoding produced by [`encode_play`].
pub fn parse_play(input: &str, base: &Structure, k: usize) -> Result<IndexedPlay<Element>> {
    let (seq_part, idx_part) = input.rsplit_once('@').ok_or_else(|| {
        Error::ParseError(format!("play {input:?} misses the @index suffix"))
    })?;
    let index: usize = idx_part
        .parse()
        .map_err(|_| Error::ParseError(format!("bad play index {idx_part:?}")))?;
    let seq = parse_seq(seq_part, base, k)?;
    IndexedPlay::new(seq, index)
}
