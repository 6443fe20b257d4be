//! Bounded homomorphism-vector equivalence.
//!
//! Structures of pathwidth below k act as probes: [`enumerate_pw_structures`]
//! lists them up to a size bound and up to isomorphism, each with a
//! witnessing path decomposition; [`hom_count_pd`] counts homomorphisms
//! from a probe into a target by dynamic programming along the
//! decomposition; [`hom_equivalence`] compares two targets across the
//! whole probe family and reports the first disagreement in canonical
//! order. Equality of all probe counts characterizes equivalence in the
//! restricted-conjunction k-variable counting logic; the tool's verdict
//! is always the bounded statement "no probe up to this size
//! distinguishes them", never an unbounded claim.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use itertools::Itertools;
use num_bigint::BigUint;

use crate::decomposition::PathDecomposition;
use crate::error::{Error, Result};
use crate::structure::{Element, Signature, Structure};

/// Budget on generator states visited by [`enumerate_pw_structures`].
pub const ENUMERATION_STATE_BUDGET: usize = 500_000;

/// Budget on candidate tuples per introduction step (the generator
/// branches over all subsets).
const INTRODUCTION_TUPLE_BUDGET: usize = 22;

/// A size-major canonical identifier: the lexicographically least
/// relabeling of the structure, rendered as text. Two structures get the
/// same key iff they are isomorphic, and sorting keys sorts by size
/// first.
pub fn canonical_key(s: &Structure) -> String {
    let (tuples, _) = canonical_data(s, None);
    render_key(s, &tuples)
}

type CanonTuples = Vec<Vec<Vec<Element>>>;

/// The least relabeling of the structure's tuples (relations in signature
/// order, tuples sorted), optionally tie-broken by a marked element set
/// that must also relabel least.
fn canonical_data(s: &Structure, marked: Option<&BTreeSet<Element>>) -> (CanonTuples, Vec<Element>) {
    let n = s.size();
    let rels: Vec<&str> = s.signature().entries().map(|(name, _)| name).collect();
    let mut best: Option<(CanonTuples, Vec<Element>)> = None;
    for perm in (0..n).permutations(n) {
        // perm is the new-to-old order; invert to relabel old elements.
        let mut new_of_old = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            new_of_old[old] = new;
        }
        let tuples: CanonTuples = rels
            .iter()
            .map(|rel| {
                let mut ts: Vec<Vec<Element>> = s
                    .tuples(rel)
                    .iter()
                    .map(|t| t.iter().map(|&e| new_of_old[e]).collect())
                    .collect();
                ts.sort();
                ts
            })
            .collect();
        let mark: Vec<Element> = marked
            .map(|m| m.iter().map(|&e| new_of_old[e]).sorted().collect())
            .unwrap_or_default();
        let candidate = (tuples, mark);
        if best.as_ref().is_none_or(|b| candidate < *b) {
            best = Some(candidate);
        }
    }
    best.unwrap_or_default()
}

fn render_key(s: &Structure, tuples: &CanonTuples) -> String {
    let rels: Vec<&str> = s.signature().entries().map(|(name, _)| name).collect();
    let body = rels
        .iter()
        .zip(tuples)
        .map(|(rel, ts)| {
            let ts = ts
                .iter()
                .map(|t| t.iter().map(Element::to_string).join("-"))
                .join(" ");
            format!("{rel}:{ts}")
        })
        .join(";");
    format!("{:02}|{}", s.size(), body)
}

/// One state of the bag-by-bag generator: the structure built so far and
/// the active bag. Forgotten elements can no longer enter tuples, so
/// every tuple lies inside the bag snapshot taken when its last element
/// arrived — the decomposition trace witnesses pathwidth < k by
/// construction.
#[derive(Clone)]
struct GenState {
    rels: BTreeMap<String, Vec<Vec<Element>>>,
    n: usize,
    bag: BTreeSet<Element>,
    trace: Vec<BTreeSet<Element>>,
}

/// Every structure over `sig` with at most `max_size` elements and
/// pathwidth < k, up to isomorphism, each with a witnessing path
/// decomposition, ordered by canonical key (size-major).
pub fn enumerate_pw_structures(
    sig: &Signature,
    k: usize,
    max_size: usize,
) -> Result<Vec<(Structure, PathDecomposition)>> {
    if k == 0 {
        return Err(Error::Precondition(
            "pathwidth below zero is empty; k must be at least 1".into(),
        ));
    }
    let mut outputs: BTreeMap<String, (Structure, PathDecomposition)> = BTreeMap::new();
    let mut visited: HashSet<String> = HashSet::new();
    let mut queue: VecDeque<GenState> = VecDeque::new();
    let start = GenState {
        rels: BTreeMap::new(),
        n: 0,
        bag: BTreeSet::new(),
        trace: Vec::new(),
    };
    queue.push_back(start);
    let mut states = 0usize;
    while let Some(state) = queue.pop_front() {
        states += 1;
        if states > ENUMERATION_STATE_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "probe generator visited more than {ENUMERATION_STATE_BUDGET} states"
            )));
        }
        let structure =
            Structure::with_numbered_universe(sig.clone(), state.n, state.rels.clone())?;
        let key = canonical_key(&structure);
        outputs
            .entry(key)
            .or_insert_with(|| (structure.clone(), PathDecomposition::new(state.trace.clone())));
        // Forget moves.
        for &e in &state.bag {
            let mut next = state.clone();
            next.bag.remove(&e);
            push_if_new(&mut queue, &mut visited, next, &structure);
        }
        // Introduce moves: a fresh element joins the bag, together with
        // any subset of the tuples that involve it and stay inside the
        // new bag.
        if state.n < max_size && state.bag.len() < k {
            let fresh = state.n;
            let mut bag = state.bag.clone();
            bag.insert(fresh);
            let candidates = tuples_with(sig, &bag, fresh);
            if candidates.len() > INTRODUCTION_TUPLE_BUDGET {
                return Err(Error::BudgetExceeded(format!(
                    "{} candidate tuples in one introduction step (budget {INTRODUCTION_TUPLE_BUDGET})",
                    candidates.len()
                )));
            }
            for subset in 0u64..(1u64 << candidates.len()) {
                let mut next = state.clone();
                next.n += 1;
                next.bag = bag.clone();
                next.trace.push(bag.clone());
                for (i, (rel, tuple)) in candidates.iter().enumerate() {
                    if subset >> i & 1 == 1 {
                        next.rels.entry(rel.clone()).or_default().push(tuple.clone());
                    }
                }
                let structure =
                    Structure::with_numbered_universe(sig.clone(), next.n, next.rels.clone())?;
                push_if_new(&mut queue, &mut visited, next, &structure);
            }
        }
    }
    Ok(outputs.into_values().collect())
}

fn push_if_new(
    queue: &mut VecDeque<GenState>,
    visited: &mut HashSet<String>,
    state: GenState,
    structure: &Structure,
) {
    let (tuples, mark) = canonical_data(structure, Some(&state.bag));
    let key = format!(
        "{} {:?}",
        render_key(structure, &tuples),
        mark
    );
    if visited.insert(key) {
        queue.push_back(state);
    }
}

/// All tuples over `bag` that involve `fresh`, for every relation.
fn tuples_with(sig: &Signature, bag: &BTreeSet<Element>, fresh: Element) -> Vec<(String, Vec<Element>)> {
    let pool: Vec<Element> = bag.iter().copied().collect();
    let mut out = Vec::new();
    for (rel, arity) in sig.entries() {
        for combo in std::iter::repeat_n(pool.iter().copied(), arity).multi_cartesian_product() {
            if combo.contains(&fresh) {
                out.push((rel.to_string(), combo));
            }
        }
    }
    out
}

/// Counts homomorphisms `c -> a` by dynamic programming along the path
/// decomposition: tables are indexed by the assignment of the current
/// bag; moving to the next bag sums out forgotten elements and extends
/// over images of introduced ones, keeping only assignments that
/// preserve every tuple inside the bag. Agrees with the brute-force
/// count on every valid decomposition.
pub fn hom_count_pd(c: &Structure, pd: &PathDecomposition, a: &Structure) -> Result<BigUint> {
    pd.validate(c)?;
    if c.signature() != a.signature() {
        return Err(Error::Precondition(
            "probe and target have different signatures".into(),
        ));
    }
    // Tuples of c grouped for the in-bag check.
    let all_tuples: Vec<(&str, &Vec<Element>)> = c
        .signature()
        .entries()
        .flat_map(|(rel, _)| c.tuples(rel).iter().map(move |t| (rel, t)))
        .collect();
    let mut table: HashMap<BTreeMap<Element, Element>, BigUint> =
        HashMap::from([(BTreeMap::new(), BigUint::from(1u32))]);
    let mut prev: BTreeSet<Element> = BTreeSet::new();
    for bag in &pd.bags {
        // Sum out the forgotten elements.
        let mut projected: HashMap<BTreeMap<Element, Element>, BigUint> = HashMap::new();
        for (asg, count) in table {
            let kept: BTreeMap<Element, Element> = asg
                .into_iter()
                .filter(|(e, _)| bag.contains(e))
                .collect();
            *projected.entry(kept).or_insert(BigUint::ZERO) += count;
        }
        // Extend over the introduced elements.
        let introduced: Vec<Element> = bag.iter().copied().filter(|e| !prev.contains(e)).collect();
        let in_bag: Vec<&(&str, &Vec<Element>)> = all_tuples
            .iter()
            .filter(|(_, t)| t.iter().all(|e| bag.contains(e)))
            .collect();
        let mut extended: HashMap<BTreeMap<Element, Element>, BigUint> = HashMap::new();
        for (asg, count) in projected {
            for images in std::iter::repeat_n(0..a.size(), introduced.len()).multi_cartesian_product() {
                let mut asg2 = asg.clone();
                for (&e, img) in introduced.iter().zip(images) {
                    asg2.insert(e, img);
                }
                let ok = in_bag.iter().all(|(rel, tuple)| {
                    let image: Vec<Element> = tuple.iter().map(|e| asg2[e]).collect();
                    a.has(rel, &image)
                });
                if ok {
                    *extended.entry(asg2).or_insert(BigUint::ZERO) += &count;
                }
            }
        }
        table = extended;
        prev = bag.clone();
    }
    Ok(table.into_values().sum())
}

/// The homomorphism vector of a target: one count per probe, in probe
/// order. Probes are independent, so the counts are computed on as many
/// threads as the host offers, then reassembled in order.
pub fn hom_vector(
    probes: &[(Structure, PathDecomposition)],
    target: &Structure,
) -> Result<Vec<BigUint>> {
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(probes.len().max(1));
    if threads <= 1 {
        return probes
            .iter()
            .map(|(c, pd)| hom_count_pd(c, pd, target))
            .collect();
    }
    let chunk = probes.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = probes
            .chunks(chunk)
            .map(|slice| {
                scope.spawn(move || {
                    slice
                        .iter()
                        .map(|(c, pd)| hom_count_pd(c, pd, target))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut out = Vec::with_capacity(probes.len());
        for handle in handles {
            out.extend(handle.join().expect("probe worker panicked")?);
        }
        Ok(out)
    })
}

/// Outcome of the bounded equivalence check: either no probe up to the
/// bound distinguishes the targets, or the canonically least probe that
/// does, with both counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomEquivalence {
    EquivalentUpTo { k: usize, max_size: usize },
    Distinguished {
        witness: Structure,
        witness_pd: PathDecomposition,
        count_a: BigUint,
        count_b: BigUint,
    },
}

/// Compares the homomorphism vectors of `a` and `b` over all probes of
/// pathwidth < k with at most `max_size` elements.
pub fn hom_equivalence(
    a: &Structure,
    b: &Structure,
    k: usize,
    max_size: usize,
) -> Result<HomEquivalence> {
    if a.signature() != b.signature() {
        return Err(Error::Precondition(
            "structures have different signatures".into(),
        ));
    }
    let probes = enumerate_pw_structures(a.signature(), k, max_size)?;
    let counts_a = hom_vector(&probes, a)?;
    let counts_b = hom_vector(&probes, b)?;
    for (i, (ca, cb)) in counts_a.iter().zip(&counts_b).enumerate() {
        if ca != cb {
            let (witness, witness_pd) = probes[i].clone();
            return Ok(HomEquivalence::Distinguished {
                witness,
                witness_pd,
                count_a: ca.clone(),
                count_b: cb.clone(),
            });
        }
    }
    Ok(HomEquivalence::EquivalentUpTo { k, max_size })
}
