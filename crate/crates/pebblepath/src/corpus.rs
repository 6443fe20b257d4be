//! Deterministic builders and enumerators for small test corpora:
//! named graph families, exhaustive streams of all structures over a small
//! signature, and seeded random generators.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::structure::{Element, Signature, Structure};

/// The one-binary-relation signature `{E: 2}`.
pub fn edge_signature() -> Signature {
    Signature::new([("E", 2)]).unwrap()
}

/// Structure over `{E: 2}` from explicit directed edges.
pub fn from_directed_edges(n: usize, edges: &[(Element, Element)]) -> Structure {
    let tuples = edges.iter().map(|&(a, b)| vec![a, b]).collect();
    Structure::with_numbered_universe(
        edge_signature(),
        n,
        BTreeMap::from([("E".to_string(), tuples)]),
    )
    .expect("edge list within range")
}

/// Structure over `{E: 2}` with both orientations of every listed edge.
pub fn from_undirected_edges(n: usize, edges: &[(Element, Element)]) -> Structure {
    let mut tuples = Vec::new();
    for &(a, b) in edges {
        tuples.push(vec![a, b]);
        if a != b {
            tuples.push(vec![b, a]);
        }
    }
    tuples.sort();
    tuples.dedup();
    Structure::with_numbered_universe(
        edge_signature(),
        n,
        BTreeMap::from([("E".to_string(), tuples)]),
    )
    .expect("edge list within range")
}

/// Complete symmetric graph on `n` vertices, no loops.
pub fn clique(n: usize) -> Structure {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j));
        }
    }
    from_undirected_edges(n, &edges)
}

/// Symmetric path `0 - 1 - ... - n-1`.
pub fn path(n: usize) -> Structure {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    from_undirected_edges(n, &edges)
}

/// Symmetric cycle on `n >= 3` vertices.
pub fn cycle(n: usize) -> Structure {
    assert!(n >= 3, "cycles need at least 3 vertices");
    let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    edges.push((n - 1, 0));
    from_undirected_edges(n, &edges)
}

/// Symmetric star with center `0` and `n - 1` leaves.
pub fn star(n: usize) -> Structure {
    let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
    from_undirected_edges(n, &edges)
}

/// All structures over `sig` with exactly `n` elements, enumerated by
/// subsets of the tuple space in a fixed order. Refuses signatures whose
/// tuple space exceeds 24 positions (2^24 structures).
pub fn all_structures(sig: &Signature, n: usize) -> Result<Vec<Structure>> {
    let mut slots: Vec<(String, Vec<Element>)> = Vec::new();
    for (name, arity) in sig.entries() {
        let mut tuple = vec![0usize; arity];
        if n == 0 {
            continue;
        }
        loop {
            slots.push((name.to_string(), tuple.clone()));
            let mut pos = 0;
            loop {
                if pos == arity {
                    break;
                }
                tuple[pos] += 1;
                if tuple[pos] < n {
                    break;
                }
                tuple[pos] = 0;
                pos += 1;
            }
            if pos == arity {
                break;
            }
        }
    }
    if slots.len() > 24 {
        return Err(Error::BudgetExceeded(format!(
            "tuple space has {} positions; refusing to enumerate 2^{} structures",
            slots.len(),
            slots.len()
        )));
    }
    let mut out = Vec::with_capacity(1usize << slots.len());
    for mask in 0..(1u64 << slots.len()) {
        let mut relations: BTreeMap<String, Vec<Vec<Element>>> = BTreeMap::new();
        for (i, (name, tuple)) in slots.iter().enumerate() {
            if mask & (1 << i) != 0 {
                relations.entry(name.clone()).or_default().push(tuple.clone());
            }
        }
        out.push(Structure::with_numbered_universe(sig.clone(), n, relations)?);
    }
    Ok(out)
}

/// All digraphs (structures over `{E: 2}`) with exactly `n` vertices.
pub fn all_digraphs(n: usize) -> Vec<Structure> {
    all_structures(&edge_signature(), n).expect("within enumeration budget for small n")
}

/// All digraphs with `0..=n` vertices.
pub fn all_digraphs_up_to(n: usize) -> Vec<Structure> {
    (0..=n).flat_map(all_digraphs).collect()
}

/// Seeded random digraph: each of the `n^2` possible directed edges is
/// present independently with probability `density`.
pub fn random_digraph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Structure {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    from_directed_edges(n, &edges)
}

/// Seeded random symmetric graph without loops.
pub fn random_graph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Structure {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    from_undirected_edges(n, &edges)
}

/// Seeded random tree on `n` vertices (each vertex attaches to an earlier
/// one), as a symmetric graph.
pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Structure {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    from_undirected_edges(n, &edges)
}

/// A deterministic seeded generator for corpora.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
