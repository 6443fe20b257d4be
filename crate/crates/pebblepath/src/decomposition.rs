//! Path decompositions, pebbled linear forest covers, and coalgebras of the
//! pebble-relation construction, with conversions between all three.
//!
//! The three views are equivalent and the conversions are exact:
//!
//! * a path decomposition of width `< k` yields a `k`-pebble linear forest
//!   cover through a family of per-bag pebble assignments;
//! * a cover yields a path decomposition of width `< k` whose bags are the
//!   "active predecessor" sets;
//! * covers and coalgebras are two encodings of the same data (each chain
//!   zipped with its pebbling is a play, each element points at its own
//!   position), and converting back and forth is the identity on canonical
//!   covers.
//!
//! Pathwidth is computed exactly by a layout search (dynamic programming
//! over vertex subsets of each component of the Gaifman graph), and the
//! least `k` admitting a cover is computed by an independent backtracking
//! search; the two routes must agree, which the tests check.

use std::collections::{BTreeMap, BTreeSet};

use crate::comonad::{IndexedPlay, Pebble, PebbleSeq};
use crate::error::{Error, Result};
use crate::structure::{Element, Gaifman, Structure};

/// A sequence of bags over a structure's universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDecomposition {
    pub bags: Vec<BTreeSet<Element>>,
}

impl PathDecomposition {
    pub fn new(bags: Vec<BTreeSet<Element>>) -> Self {
        PathDecomposition { bags }
    }

    /// Largest bag size minus one; 0 for an empty decomposition.
    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(|b| b.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Checks the three path-decomposition conditions against `a` and
    /// returns the width. The error message carries the first violated
    /// condition with a witness.
    pub fn validate(&self, a: &Structure) -> Result<usize> {
        for (x, bag) in self.bags.iter().enumerate() {
            for &e in bag {
                if e >= a.size() {
                    return Err(Error::InvalidDecomposition(format!(
                        "bag {x} contains element {e} outside the universe of size {}",
                        a.size()
                    )));
                }
            }
        }
        // Every element occurs in some bag.
        for e in 0..a.size() {
            if !self.bags.iter().any(|b| b.contains(&e)) {
                return Err(Error::InvalidDecomposition(format!(
                    "element {} occurs in no bag",
                    a.element_name(e)
                )));
            }
        }
        // Every Gaifman edge is covered by some bag.
        let g = a.gaifman();
        for (x, y) in g.edges() {
            if !self.bags.iter().any(|b| b.contains(&x) && b.contains(&y)) {
                return Err(Error::InvalidDecomposition(format!(
                    "adjacent elements {} and {} share no bag",
                    a.element_name(x),
                    a.element_name(y)
                )));
            }
        }
        // Convexity: the bags containing any fixed element form an interval.
        for e in 0..a.size() {
            let positions: Vec<usize> = self
                .bags
                .iter()
                .enumerate()
                .filter(|(_, b)| b.contains(&e))
                .map(|(x, _)| x)
                .collect();
            if let (Some(&first), Some(&last)) = (positions.first(), positions.last()) {
                for x in first..=last {
                    if !self.bags[x].contains(&e) {
                        return Err(Error::InvalidDecomposition(format!(
                            "element {} occurs in bags {first} and {last} but not in bag {x} between them",
                            a.element_name(e)
                        )));
                    }
                }
            }
        }
        Ok(self.width())
    }
}

/// A partition of the universe into ordered chains plus a pebbling, such
/// that all Gaifman edges stay within one chain and no pebble is re-placed
/// strictly between (and including) the endpoints of an edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearForestCover {
    pub k: usize,
    /// Ordered chains; together they partition the universe.
    pub chains: Vec<Vec<Element>>,
    /// Pebble of each element, indexed by element.
    pub pebbling: Vec<Pebble>,
}

impl LinearForestCover {
    /// Checks partition, pebble range, and the two cover conditions.
    pub fn validate(&self, a: &Structure) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidDecomposition(
                "cover needs at least one pebble".into(),
            ));
        }
        if self.pebbling.len() != a.size() {
            return Err(Error::InvalidDecomposition(format!(
                "pebbling covers {} elements, universe has {}",
                self.pebbling.len(),
                a.size()
            )));
        }
        for (e, &p) in self.pebbling.iter().enumerate() {
            if p == 0 || p > self.k {
                return Err(Error::InvalidDecomposition(format!(
                    "element {} has pebble {p} outside 1..={}",
                    a.element_name(e),
                    self.k
                )));
            }
        }
        let mut position: Vec<Option<(usize, usize)>> = vec![None; a.size()];
        for (ci, chain) in self.chains.iter().enumerate() {
            if chain.is_empty() {
                return Err(Error::InvalidDecomposition(format!("chain {ci} is empty")));
            }
            for (pos, &e) in chain.iter().enumerate() {
                if e >= a.size() {
                    return Err(Error::InvalidDecomposition(format!(
                        "chain {ci} references element {e} outside the universe"
                    )));
                }
                if position[e].is_some() {
                    return Err(Error::InvalidDecomposition(format!(
                        "element {} occurs in more than one chain position",
                        a.element_name(e)
                    )));
                }
                position[e] = Some((ci, pos));
            }
        }
        for e in 0..a.size() {
            if position[e].is_none() {
                return Err(Error::InvalidDecomposition(format!(
                    "element {} occurs in no chain",
                    a.element_name(e)
                )));
            }
        }
        let g = a.gaifman();
        for (x, y) in g.edges() {
            let (cx, px) = position[x].unwrap();
            let (cy, py) = position[y].unwrap();
            if cx != cy {
                return Err(Error::InvalidDecomposition(format!(
                    "adjacent elements {} and {} lie in different chains",
                    a.element_name(x),
                    a.element_name(y)
                )));
            }
            let (lo, hi) = if px <= py { (px, py) } else { (py, px) };
            let early = self.chains[cx][lo];
            for t in (lo + 1)..=hi {
                let b = self.chains[cx][t];
                if self.pebbling[b] == self.pebbling[early] {
                    return Err(Error::InvalidDecomposition(format!(
                        "pebble {} of {} is re-placed on {} before its edge to {} is covered",
                        self.pebbling[early],
                        a.element_name(early),
                        a.element_name(b),
                        a.element_name(self.chains[cx][hi])
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sorts the chains by their least element (the canonical
    /// representative used by the round-trip identities).
    pub fn canonicalize(&mut self) {
        self.chains
            .sort_by_key(|chain| chain.iter().min().copied().unwrap_or(usize::MAX));
    }
}

/// A coalgebra: one indexed play per element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalgebra {
    pub k: usize,
    /// The structure map, indexed by element.
    pub alpha: Vec<IndexedPlay<Element>>,
}

impl Coalgebra {
    /// Checks the coalgebra laws: the structure map must be a homomorphism
    /// into the lifted structure (checked directly on each base tuple), the
    /// counit must recover each element, and comultiplying the image must
    /// equal mapping the structure map over it.
    pub fn validate(&self, a: &Structure) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidDecomposition(
                "coalgebra needs at least one pebble".into(),
            ));
        }
        if self.alpha.len() != a.size() {
            return Err(Error::InvalidDecomposition(format!(
                "structure map covers {} elements, universe has {}",
                self.alpha.len(),
                a.size()
            )));
        }
        for (e, play) in self.alpha.iter().enumerate() {
            for &(p, x) in play.seq().placements() {
                if p > self.k {
                    return Err(Error::InvalidDecomposition(format!(
                        "play of {} uses pebble {p} beyond {}",
                        a.element_name(e),
                        self.k
                    )));
                }
                if x >= a.size() {
                    return Err(Error::InvalidDecomposition(format!(
                        "play of {} references element {x} outside the universe",
                        a.element_name(e)
                    )));
                }
            }
            // Counit law.
            if *play.seq().element_at(play.index()) != e {
                return Err(Error::InvalidDecomposition(format!(
                    "counit law fails at {}: the play's index points at {}",
                    a.element_name(e),
                    a.element_name(*play.seq().element_at(play.index()))
                )));
            }
        }
        // Homomorphism law, checked tuple by tuple against the lifted
        // relation conditions.
        for (name, _) in a.signature().entries() {
            for tuple in a.tuples(name) {
                let plays: Vec<&IndexedPlay<Element>> =
                    tuple.iter().map(|&e| &self.alpha[e]).collect();
                let shared = plays[0].seq();
                if plays.iter().any(|p| p.seq() != shared) {
                    return Err(Error::InvalidDecomposition(format!(
                        "tuple {tuple:?} of {name} maps to plays over different sequences"
                    )));
                }
                let hi = plays.iter().map(|p| p.index()).max().unwrap();
                for p in &plays {
                    let i = p.index();
                    if shared.pebble_occurs_in(shared.pebble_at(i), i, hi) {
                        return Err(Error::InvalidDecomposition(format!(
                            "tuple {tuple:?} of {name}: the pebble of position {i} is re-placed before position {hi}"
                        )));
                    }
                }
            }
        }
        // Comultiplication law: every position of every image play must map
        // back to that position.
        for (e, play) in self.alpha.iter().enumerate() {
            let s = play.seq();
            for i in 1..=s.len() {
                let there = *s.element_at(i);
                let back = &self.alpha[there];
                if back.seq() != s || back.index() != i {
                    return Err(Error::InvalidDecomposition(format!(
                        "comultiplication law fails at {}: position {i} of its play holds {} whose own play differs",
                        a.element_name(e),
                        a.element_name(there)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-bag pebble assignments: injective on each bag and agreeing on
/// overlaps of consecutive bags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionFamily {
    pub k: usize,
    /// One assignment per bag, aligned with the decomposition.
    pub assignments: Vec<BTreeMap<Element, Pebble>>,
}

impl SectionFamily {
    /// Re-checks local injectivity and glueability against `pd`.
    pub fn validate(&self, pd: &PathDecomposition) -> Result<()> {
        if self.assignments.len() != pd.bags.len() {
            return Err(Error::InvalidDecomposition(
                "section family length differs from the decomposition".into(),
            ));
        }
        for (x, (tau, bag)) in self.assignments.iter().zip(&pd.bags).enumerate() {
            if tau.keys().copied().collect::<BTreeSet<_>>() != *bag {
                return Err(Error::InvalidDecomposition(format!(
                    "assignment {x} does not cover its bag exactly"
                )));
            }
            let mut used = BTreeSet::new();
            for (&e, &p) in tau {
                if p == 0 || p > self.k {
                    return Err(Error::InvalidDecomposition(format!(
                        "assignment {x} gives element {e} pebble {p} outside 1..={}",
                        self.k
                    )));
                }
                if !used.insert(p) {
                    return Err(Error::InvalidDecomposition(format!(
                        "assignment {x} is not injective (pebble {p} twice)"
                    )));
                }
            }
        }
        for x in 1..self.assignments.len() {
            let (prev, cur) = (&self.assignments[x - 1], &self.assignments[x]);
            for (e, p) in cur {
                if let Some(q) = prev.get(e) {
                    if q != p {
                        return Err(Error::InvalidDecomposition(format!(
                            "assignments {} and {x} disagree on element {e}",
                            x - 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds a section family for a valid decomposition of width `< k`:
/// the first bag is enumerated into pebbles `1, 2, ...`; every later bag
/// keeps the previous assignment on the overlap and enumerates its new
/// elements into the unused pebbles in increasing order.
pub fn build_section_family(a: &Structure, pd: &PathDecomposition, k: usize) -> Result<SectionFamily> {
    let width = pd.validate(a)?;
    if k == 0 || pd.bags.iter().any(|b| b.len() > k) {
        return Err(Error::InvalidDecomposition(format!(
            "section family needs more pebbles: width {width} requires at least {}",
            width + 1
        )));
    }
    let mut assignments: Vec<BTreeMap<Element, Pebble>> = Vec::with_capacity(pd.bags.len());
    for (x, bag) in pd.bags.iter().enumerate() {
        let mut tau = BTreeMap::new();
        let mut used: BTreeSet<Pebble> = BTreeSet::new();
        if x > 0 {
            let prev = &assignments[x - 1];
            for &e in bag {
                if let Some(&p) = prev.get(&e) {
                    tau.insert(e, p);
                    used.insert(p);
                }
            }
        }
        let mut fresh = (1..=k).filter(|p| !used.contains(p));
        for &e in bag {
            if !tau.contains_key(&e) {
                let p = fresh.next().expect("bag size is at most k");
                tau.insert(e, p);
            }
        }
        assignments.push(tau);
    }
    Ok(SectionFamily { k, assignments })
}

/// Converts a valid path decomposition of width `w` into a
/// `(w + 1)`-pebble cover: chains are the components of the Gaifman graph,
/// ordered by first bag and then by assigned pebble, and the pebbling glues
/// the section family.
pub fn pd_to_cover(a: &Structure, pd: &PathDecomposition) -> Result<LinearForestCover> {
    let width = pd.validate(a)?;
    let k = width + 1;
    let family = build_section_family(a, pd, k)?;
    // Glue the per-bag assignments into one pebbling; overlapping bags agree
    // by construction, and convexity extends the agreement to all bags.
    let mut pebbling: Vec<Pebble> = vec![0; a.size()];
    let mut first_bag: Vec<usize> = vec![usize::MAX; a.size()];
    for (x, tau) in family.assignments.iter().enumerate() {
        for (&e, &p) in tau {
            if pebbling[e] == 0 {
                pebbling[e] = p;
                first_bag[e] = x;
            }
        }
    }
    let mut chains: Vec<Vec<Element>> = Vec::new();
    for comp in a.gaifman().components() {
        let mut chain = comp;
        chain.sort_by_key(|&e| (first_bag[e], pebbling[e]));
        chains.push(chain);
    }
    let mut cover = LinearForestCover { k, chains, pebbling };
    cover.canonicalize();
    cover.validate(a)?;
    Ok(cover)
}

/// Converts a valid cover into a path decomposition of width `< k`: one bag
/// per element in ordered-sum order, holding its active predecessors (the
/// earlier elements whose pebble is not re-placed up to and including it).
pub fn cover_to_pd(a: &Structure, cover: &LinearForestCover) -> Result<PathDecomposition> {
    cover.validate(a)?;
    let order: Vec<Element> = cover.chains.iter().flatten().copied().collect();
    let mut bags = Vec::with_capacity(order.len());
    for (j, &_elem) in order.iter().enumerate() {
        let mut bag = BTreeSet::new();
        'candidate: for (i, &cand) in order.iter().enumerate().take(j + 1) {
            for &between in &order[(i + 1)..=j] {
                if cover.pebbling[between] == cover.pebbling[cand] {
                    continue 'candidate;
                }
            }
            bag.insert(cand);
        }
        bags.push(bag);
    }
    let pd = PathDecomposition::new(bags);
    let width = pd.validate(a)?;
    if width + 1 > cover.k {
        return Err(Error::InvalidDecomposition(format!(
            "internal error: produced width {width} from a {}-pebble cover",
            cover.k
        )));
    }
    Ok(pd)
}

/// Encodes a cover as a coalgebra: each chain zipped with its pebbling is a
/// play, and each element points at its own position.
pub fn cover_to_coalgebra(a: &Structure, cover: &LinearForestCover) -> Result<Coalgebra> {
    cover.validate(a)?;
    let mut alpha: Vec<Option<IndexedPlay<Element>>> = vec![None; a.size()];
    for chain in &cover.chains {
        let seq = PebbleSeq::new(
            chain
                .iter()
                .map(|&e| (cover.pebbling[e], e))
                .collect::<Vec<_>>(),
        )?;
        for (pos, &e) in chain.iter().enumerate() {
            alpha[e] = Some(IndexedPlay::new(seq.clone(), pos + 1)?);
        }
    }
    let alpha: Vec<IndexedPlay<Element>> = alpha
        .into_iter()
        .map(|p| p.expect("cover partitions the universe"))
        .collect();
    let coalg = Coalgebra {
        k: cover.k,
        alpha,
    };
    coalg.validate(a)?;
    Ok(coalg)
}

/// Decodes a coalgebra back into a cover: the elements sharing one play
/// sequence form a chain ordered by index, and the pebbling reads each
/// element's pebble off its play. Chains come out sorted by least element.
pub fn coalgebra_to_cover(a: &Structure, coalg: &Coalgebra) -> Result<LinearForestCover> {
    coalg.validate(a)?;
    let mut by_seq: BTreeMap<&PebbleSeq<Element>, Vec<(usize, Element)>> = BTreeMap::new();
    for (e, play) in coalg.alpha.iter().enumerate() {
        by_seq.entry(play.seq()).or_default().push((play.index(), e));
    }
    let mut chains: Vec<Vec<Element>> = Vec::new();
    let mut pebbling: Vec<Pebble> = vec![0; a.size()];
    for (seq, mut members) in by_seq {
        members.sort();
        // The comultiplication law makes the members exactly the positions
        // 1..=len of the sequence.
        if members.len() != seq.len()
            || members
                .iter()
                .enumerate()
                .any(|(i, &(idx, e))| idx != i + 1 || *seq.element_at(idx) != e)
        {
            return Err(Error::InvalidDecomposition(
                "structure map image is not closed under its own positions".into(),
            ));
        }
        for &(idx, e) in &members {
            pebbling[e] = seq.pebble_at(idx);
        }
        chains.push(members.into_iter().map(|(_, e)| e).collect());
    }
    let mut cover = LinearForestCover {
        k: coalg.k,
        chains,
        pebbling,
    };
    cover.canonicalize();
    cover.validate(a)?;
    Ok(cover)
}

/// Largest component size accepted by the exact searches.
const MAX_COMPONENT: usize = 20;

/// Exact pathwidth with a certifying decomposition.
///
/// Per Gaifman component, a dynamic program over vertex subsets finds a
/// layout minimizing the largest boundary of a prefix; the bags of active
/// vertices along the optimal layout certify the bound. Components are
/// processed in order of least element and their bag sequences
/// concatenated.
pub fn pathwidth_exact(a: &Structure) -> Result<(usize, PathDecomposition)> {
    let g = a.gaifman();
    let mut width = 0usize;
    let mut bags: Vec<BTreeSet<Element>> = Vec::new();
    for comp in g.components() {
        let (w, layout) = component_layout(&g, &comp)?;
        width = width.max(w);
        // Bag i holds every vertex placed at or before i that still has a
        // neighbor (or itself) at or after i.
        let pos: BTreeMap<Element, usize> =
            layout.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let last_needed: Vec<usize> = layout
            .iter()
            .map(|&v| {
                g.neighbors(v)
                    .iter()
                    .filter_map(|w| pos.get(w).copied())
                    .max()
                    .unwrap_or(pos[&v])
                    .max(pos[&v])
            })
            .collect();
        for i in 0..layout.len() {
            let bag: BTreeSet<Element> = layout
                .iter()
                .enumerate()
                .filter(|&(j, _)| j <= i && last_needed[j] >= i)
                .map(|(_, &v)| v)
                .collect();
            bags.push(bag);
        }
    }
    let pd = PathDecomposition::new(bags);
    let checked = pd.validate(a)?;
    debug_assert_eq!(checked, width);
    Ok((width, pd))
}

/// Optimal layout of one component: returns the minimal over layouts of the
/// maximal prefix boundary, with a witnessing vertex order.
fn component_layout(g: &Gaifman, comp: &[Element]) -> Result<(usize, Vec<Element>)> {
    let m = comp.len();
    if m > MAX_COMPONENT {
        return Err(Error::BudgetExceeded(format!(
            "component of size {m} exceeds the exact-search bound {MAX_COMPONENT}"
        )));
    }
    let index: BTreeMap<Element, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let nbr: Vec<u32> = comp
        .iter()
        .map(|&v| {
            let mut mask = 0u32;
            for w in g.neighbors(v) {
                if let Some(&j) = index.get(w) {
                    if *w != v {
                        mask |= 1 << j;
                    }
                }
            }
            mask
        })
        .collect();
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let boundary = |s: u32| -> u32 {
        let outside = full & !s;
        (0..m)
            .filter(|&i| s & (1 << i) != 0 && nbr[i] & outside != 0)
            .count() as u32
    };
    let mut h = vec![u32::MAX; (full as usize) + 1];
    h[0] = 0;
    for s in 1..=(full as usize) {
        let su = s as u32;
        let mut best = u32::MAX;
        let mut bits = su;
        while bits != 0 {
            let v = bits.trailing_zeros();
            bits &= bits - 1;
            best = best.min(h[(su & !(1 << v)) as usize]);
        }
        h[s] = best.max(boundary(su));
    }
    // Reconstruct a layout achieving h(full), removing the last vertex
    // first; ties break toward the smallest element.
    let mut layout_rev = Vec::with_capacity(m);
    let mut s = full;
    while s != 0 {
        let target = h[s as usize];
        let mut chosen = None;
        let mut bits = s;
        while bits != 0 {
            let v = bits.trailing_zeros();
            bits &= bits - 1;
            if h[(s & !(1 << v)) as usize].max(boundary(s)) == target {
                chosen = Some(v);
                break;
            }
        }
        let v = chosen.expect("dynamic program is consistent");
        layout_rev.push(comp[v as usize]);
        s &= !(1 << v);
    }
    layout_rev.reverse();
    Ok((h[full as usize] as usize, layout_rev))
}

/// The least `k` for which a `k`-pebble linear forest cover exists, found
/// by a backtracking search independent of [`pathwidth_exact`]. Also
/// returns a witnessing cover.
pub fn coalgebra_number(a: &Structure) -> Result<(usize, LinearForestCover)> {
    let g = a.gaifman();
    let comps = g.components();
    for comp in &comps {
        if comp.len() > MAX_COMPONENT {
            return Err(Error::BudgetExceeded(format!(
                "component of size {} exceeds the exact-search bound {MAX_COMPONENT}",
                comp.len()
            )));
        }
    }
    let max_needed = comps.iter().map(|c| c.len()).max().unwrap_or(0).max(1);
    for k in 1..=max_needed {
        let mut chains = Vec::new();
        let mut pebbling = vec![0usize; a.size()];
        let mut ok = true;
        for comp in &comps {
            match component_cover_search(&g, comp, k) {
                Some((order, pebbles)) => {
                    for (&e, &p) in order.iter().zip(&pebbles) {
                        pebbling[e] = p;
                    }
                    chains.push(order);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let mut cover = LinearForestCover { k, chains, pebbling };
            cover.canonicalize();
            cover.validate(a)?;
            return Ok((k, cover));
        }
    }
    unreachable!("a cover with one pebble per element always exists");
}

/// Searches for an ordering and pebbling of one component satisfying the
/// no-re-placement condition with `k` pebbles. Pebbles are canonicalized by
/// first use to cut symmetry.
fn component_cover_search(
    g: &Gaifman,
    comp: &[Element],
    k: usize,
) -> Option<(Vec<Element>, Vec<Pebble>)> {
    let m = comp.len();
    let index: BTreeMap<Element, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let nbr: Vec<Vec<usize>> = comp
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter(|&&w| w != v)
                .filter_map(|w| index.get(w).copied())
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = Vec::with_capacity(m);
    let mut pebbles: Vec<Pebble> = Vec::with_capacity(m);
    let mut placed = vec![false; m];

    fn locked_pebbles(
        order: &[usize],
        pebbles: &[Pebble],
        placed: &[bool],
        nbr: &[Vec<usize>],
        next: usize,
    ) -> BTreeSet<Pebble> {
        // A placed vertex locks its pebble while it still has an edge to
        // the vertex being placed now or to any unplaced vertex.
        let mut locked = BTreeSet::new();
        for (&u, &p) in order.iter().zip(pebbles) {
            if nbr[u].iter().any(|&w| w == next || !placed[w]) {
                locked.insert(p);
            }
        }
        locked
    }

    fn go(
        m: usize,
        k: usize,
        nbr: &[Vec<usize>],
        order: &mut Vec<usize>,
        pebbles: &mut Vec<Pebble>,
        placed: &mut Vec<bool>,
    ) -> bool {
        if order.len() == m {
            return true;
        }
        for v in 0..m {
            if placed[v] {
                continue;
            }
            let locked = locked_pebbles(order, pebbles, placed, nbr, v);
            let max_used = pebbles.iter().copied().max().unwrap_or(0);
            let highest = (max_used + 1).min(k);
            for p in 1..=highest {
                if locked.contains(&p) {
                    continue;
                }
                order.push(v);
                pebbles.push(p);
                placed[v] = true;
                if go(m, k, nbr, order, pebbles, placed) {
                    return true;
                }
                placed[v] = false;
                pebbles.pop();
                order.pop();
            }
        }
        false
    }

    if go(m, k, &nbr, &mut order, &mut pebbles, &mut placed) {
        let elements = order.iter().map(|&i| comp[i]).collect();
        Some((elements, pebbles))
    } else {
        None
    }
}
