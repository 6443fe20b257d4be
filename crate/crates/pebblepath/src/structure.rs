//! Finite relational structures over finite signatures.
//!
//! Elements of a structure's universe are identified by their index
//! (`0..size`); the universe also carries one display name per element so
//! structures survive a round trip through the text format losslessly.
//! Relation data is stored sorted (for deterministic iteration and
//! canonical output) together with a hash index (for O(1) membership
//! queries inside game kernels).

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Index of an element in a structure's universe.
pub type Element = usize;

/// Name of the reserved binary identity relation used by the `J` expansion.
pub const IDENTITY_RELATION: &str = "I";

/// A finite relational signature: relation names with their arities.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Signature {
    arities: BTreeMap<String, usize>,
}

impl Signature {
    /// Builds a signature from `(name, arity)` pairs.
    ///
    /// Arities must be at least 1, names must be distinct and non-empty,
    /// and the reserved name `I` may only be used with arity 2.
    pub fn new<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut arities = BTreeMap::new();
        for (name, arity) in pairs {
            let name = name.into();
            if name.is_empty() {
                return Err(Error::InvalidStructure("empty relation name".into()));
            }
            if arity == 0 {
                return Err(Error::InvalidStructure(format!(
                    "relation {name} has arity 0; arities must be positive"
                )));
            }
            if name == IDENTITY_RELATION && arity != 2 {
                return Err(Error::InvalidStructure(format!(
                    "reserved relation {IDENTITY_RELATION} must have arity 2, got {arity}"
                )));
            }
            if arities.insert(name.clone(), arity).is_some() {
                return Err(Error::InvalidStructure(format!(
                    "duplicate relation name {name}"
                )));
            }
        }
        Ok(Signature { arities })
    }

    /// The arity of `name`, if the relation exists.
    pub fn arity(&self, name: &str) -> Option<usize> {
        self.arities.get(name).copied()
    }

    /// Relation names in sorted order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.arities.keys().map(|s| s.as_str())
    }

    /// `(name, arity)` pairs in sorted name order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, usize)> {
        self.arities.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn len(&self) -> usize {
        self.arities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arities.is_empty()
    }

    /// True if the signature contains the reserved identity relation.
    pub fn has_identity(&self) -> bool {
        self.arities.contains_key(IDENTITY_RELATION)
    }

    /// The signature extended with the identity relation (arity 2).
    pub fn with_identity(&self) -> Result<Signature> {
        if self.has_identity() {
            return Err(Error::InvalidStructure(format!(
                "signature already contains {IDENTITY_RELATION}"
            )));
        }
        let mut arities = self.arities.clone();
        arities.insert(IDENTITY_RELATION.to_string(), 2);
        Ok(Signature { arities })
    }

    /// The signature with the identity relation removed (if present).
    pub fn without_identity(&self) -> Signature {
        let mut arities = self.arities.clone();
        arities.remove(IDENTITY_RELATION);
        Signature { arities }
    }
}

/// Tuples of one relation: sorted for deterministic iteration plus a hash
/// index for constant-time membership.
#[derive(Debug, Clone)]
struct RelationData {
    tuples: Vec<Vec<Element>>,
    index: HashSet<Vec<Element>>,
}

impl RelationData {
    fn new(mut tuples: Vec<Vec<Element>>) -> Self {
        tuples.sort();
        tuples.dedup();
        let index = tuples.iter().cloned().collect();
        RelationData { tuples, index }
    }
}

impl PartialEq for RelationData {
    fn eq(&self, other: &Self) -> bool {
        self.tuples == other.tuples
    }
}
impl Eq for RelationData {}

/// A finite relational structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    signature: Signature,
    universe: Vec<String>,
    relations: BTreeMap<String, RelationData>,
}

impl Structure {
    /// Builds a structure and validates it: every listed relation must be
    /// in the signature with matching tuple lengths, every element index
    /// must be in range, and no tuple may be listed twice.
    pub fn new(
        signature: Signature,
        universe: Vec<String>,
        relations: BTreeMap<String, Vec<Vec<Element>>>,
    ) -> Result<Self> {
        let size = universe.len();
        {
            let mut seen = HashSet::new();
            for name in &universe {
                if name.is_empty() {
                    return Err(Error::InvalidStructure("empty element name".into()));
                }
                if !seen.insert(name) {
                    return Err(Error::InvalidStructure(format!(
                        "duplicate element name {name}"
                    )));
                }
            }
        }
        let mut data = BTreeMap::new();
        for (rel, tuples) in relations {
            let arity = signature.arity(&rel).ok_or_else(|| {
                Error::InvalidStructure(format!("relation {rel} not in signature"))
            })?;
            let mut seen = HashSet::new();
            for tuple in &tuples {
                if tuple.len() != arity {
                    return Err(Error::InvalidStructure(format!(
                        "relation {rel} has arity {arity} but tuple {tuple:?} has length {}",
                        tuple.len()
                    )));
                }
                for &e in tuple {
                    if e >= size {
                        return Err(Error::InvalidStructure(format!(
                            "relation {rel} tuple {tuple:?} references element {e} outside universe of size {size}"
                        )));
                    }
                }
                if !seen.insert(tuple.clone()) {
                    return Err(Error::InvalidStructure(format!(
                        "duplicate tuple {tuple:?} in relation {rel}"
                    )));
                }
            }
            data.insert(rel, RelationData::new(tuples));
        }
        // Relations absent from the map are empty.
        for name in signature.names() {
            if !data.contains_key(name) {
                data.insert(name.to_string(), RelationData::new(Vec::new()));
            }
        }
        Ok(Structure {
            signature,
            universe,
            relations: data,
        })
    }

    /// Builds a structure whose element names are the decimal indices
    /// `"0".."size-1"`.
    pub fn with_numbered_universe(
        signature: Signature,
        size: usize,
        relations: BTreeMap<String, Vec<Vec<Element>>>,
    ) -> Result<Self> {
        let universe = (0..size).map(|i| i.to_string()).collect();
        Structure::new(signature, universe, relations)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Number of elements in the universe.
    pub fn size(&self) -> usize {
        self.universe.len()
    }

    /// Display names of the universe, in element order.
    pub fn universe_names(&self) -> &[String] {
        &self.universe
    }

    pub fn element_name(&self, e: Element) -> &str {
        &self.universe[e]
    }

    /// Looks an element up by its display name.
    pub fn element_by_name(&self, name: &str) -> Option<Element> {
        self.universe.iter().position(|n| n == name)
    }

    /// Tuples of `rel` in sorted order. Empty for relations without tuples.
    pub fn tuples(&self, rel: &str) -> &[Vec<Element>] {
        self.relations
            .get(rel)
            .map(|d| d.tuples.as_slice())
            .unwrap_or(&[])
    }

    /// Constant-time membership test.
    pub fn has(&self, rel: &str, tuple: &[Element]) -> bool {
        self.relations
            .get(rel)
            .map(|d| d.index.contains(tuple))
            .unwrap_or(false)
    }

    /// Re-checks all structure invariants, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        let tuples: BTreeMap<String, Vec<Vec<Element>>> = self
            .relations
            .iter()
            .map(|(n, d)| (n.clone(), d.tuples.clone()))
            .collect();
        Structure::new(self.signature.clone(), self.universe.clone(), tuples).map(|_| ())
    }

    /// Total number of tuples across all relations.
    pub fn tuple_count(&self) -> usize {
        self.relations.values().map(|d| d.tuples.len()).sum()
    }

    /// The Gaifman graph: reflexive symmetric adjacency relating any two
    /// elements that occur together in some tuple.
    pub fn gaifman(&self) -> Gaifman {
        let mut adj: Vec<BTreeSet<Element>> = (0..self.size()).map(|v| BTreeSet::from([v])).collect();
        for data in self.relations.values() {
            for tuple in &data.tuples {
                for &a in tuple {
                    for &b in tuple {
                        adj[a].insert(b);
                        adj[b].insert(a);
                    }
                }
            }
        }
        Gaifman { adj }
    }

    /// The substructure induced by `subset`, together with the map from new
    /// element indices back to the original elements (in ascending order).
    pub fn induced_substructure(&self, subset: &BTreeSet<Element>) -> Result<(Structure, Vec<Element>)> {
        for &e in subset {
            if e >= self.size() {
                return Err(Error::InvalidStructure(format!(
                    "induced substructure: element {e} outside universe of size {}",
                    self.size()
                )));
            }
        }
        let old_of_new: Vec<Element> = subset.iter().copied().collect();
        let mut new_of_old: BTreeMap<Element, Element> = BTreeMap::new();
        for (new, &old) in old_of_new.iter().enumerate() {
            new_of_old.insert(old, new);
        }
        let universe = old_of_new
            .iter()
            .map(|&old| self.universe[old].clone())
            .collect();
        let mut relations = BTreeMap::new();
        for (name, data) in &self.relations {
            let mut tuples = Vec::new();
            'tuple: for tuple in &data.tuples {
                let mut mapped = Vec::with_capacity(tuple.len());
                for &e in tuple {
                    match new_of_old.get(&e) {
                        Some(&n) => mapped.push(n),
                        None => continue 'tuple,
                    }
                }
                tuples.push(mapped);
            }
            relations.insert(name.clone(), tuples);
        }
        let s = Structure::new(self.signature.clone(), universe, relations)?;
        Ok((s, old_of_new))
    }

    /// True iff the total map `f` (indexed by elements of `self`) is a
    /// homomorphism into `b`.
    pub fn is_total_hom(&self, b: &Structure, f: &[Element]) -> bool {
        if f.len() != self.size() || self.signature != b.signature {
            return false;
        }
        if f.iter().any(|&img| img >= b.size()) {
            return false;
        }
        let mut image = Vec::new();
        for (name, data) in &self.relations {
            for tuple in &data.tuples {
                image.clear();
                image.extend(tuple.iter().map(|&e| f[e]));
                if !b.has(name, &image) {
                    return false;
                }
            }
        }
        true
    }

    /// All homomorphisms `self -> b`, as total maps in lexicographic order.
    ///
    /// Exhaustive backtracking over all assignments; intended for small
    /// universes.
    pub fn enumerate_homs(&self, b: &Structure) -> Vec<Vec<Element>> {
        let mut out = Vec::new();
        self.for_each_hom(b, |f| out.push(f.to_vec()));
        out
    }

    /// Number of homomorphisms `self -> b`, by the same exhaustive
    /// backtracking as `enumerate_homs`.
    pub fn count_homs_bruteforce(&self, b: &Structure) -> BigUint {
        let mut count = BigUint::ZERO;
        self.for_each_hom(b, |_| count += 1u32);
        count
    }

    fn for_each_hom<F: FnMut(&[Element])>(&self, b: &Structure, mut visit: F) {
        // Tuples become checkable once their maximum element is assigned.
        let mut by_max: Vec<Vec<(&str, &Vec<Element>)>> = vec![Vec::new(); self.size()];
        for (name, data) in &self.relations {
            for tuple in &data.tuples {
                match tuple.iter().max() {
                    Some(&m) => by_max[m].push((name.as_str(), tuple)),
                    None => unreachable!("arities are positive"),
                }
            }
        }
        let mut f: Vec<Element> = Vec::with_capacity(self.size());
        self.hom_backtrack(b, &by_max, &mut f, &mut visit);
    }

    fn hom_backtrack<F: FnMut(&[Element])>(
        &self,
        b: &Structure,
        by_max: &[Vec<(&str, &Vec<Element>)>],
        f: &mut Vec<Element>,
        visit: &mut F,
    ) {
        let v = f.len();
        if v == self.size() {
            visit(f);
            return;
        }
        let mut image = Vec::new();
        'candidate: for img in 0..b.size() {
            f.push(img);
            for (name, tuple) in &by_max[v] {
                image.clear();
                image.extend(tuple.iter().map(|&e| f[e]));
                if !b.has(name, &image) {
                    f.pop();
                    continue 'candidate;
                }
            }
            self.hom_backtrack(b, by_max, f, visit);
            f.pop();
        }
    }

    /// True iff `f` is an isomorphism `self -> b`: a bijective homomorphism
    /// whose inverse is also a homomorphism.
    pub fn is_isomorphism(&self, b: &Structure, f: &[Element]) -> bool {
        if self.size() != b.size() {
            return false;
        }
        let mut seen = vec![false; b.size()];
        if f.len() != self.size() {
            return false;
        }
        for &img in f {
            if img >= b.size() || seen[img] {
                return false;
            }
            seen[img] = true;
        }
        if !self.is_total_hom(b, f) {
            return false;
        }
        // Bijective and forward-preserving: the inverse is a homomorphism
        // iff each relation has equally many tuples on both sides.
        self.signature
            .names()
            .all(|name| self.tuples(name).len() == b.tuples(name).len())
    }

    /// True iff some isomorphism `self -> b` exists (exhaustive search over
    /// bijections; intended for small universes).
    pub fn isomorphic(&self, b: &Structure) -> bool {
        if self.size() != b.size() || self.signature != b.signature {
            return false;
        }
        if self
            .signature
            .names()
            .any(|name| self.tuples(name).len() != b.tuples(name).len())
        {
            return false;
        }
        let mut f: Vec<Element> = (0..self.size()).collect();
        permutations_try(&mut f, &mut |perm| self.is_isomorphism(b, perm))
    }

    /// The structure over the signature extended with the identity relation,
    /// interpreted as the diagonal `{(a, a)}`.
    pub fn j_expand(&self) -> Result<Structure> {
        let signature = self.signature.with_identity()?;
        let mut relations: BTreeMap<String, Vec<Vec<Element>>> = self
            .relations
            .iter()
            .map(|(n, d)| (n.clone(), d.tuples.clone()))
            .collect();
        relations.insert(
            IDENTITY_RELATION.to_string(),
            (0..self.size()).map(|a| vec![a, a]).collect(),
        );
        Structure::new(signature, self.universe.clone(), relations)
    }

    /// The reduct dropping the identity relation (if present).
    pub fn sigma_reduct(&self) -> Structure {
        let signature = self.signature.without_identity();
        let relations = self
            .relations
            .iter()
            .filter(|(n, _)| n.as_str() != IDENTITY_RELATION)
            .map(|(n, d)| (n.clone(), d.tuples.clone()))
            .collect();
        Structure::new(signature, self.universe.clone(), relations)
            .expect("reduct of a valid structure is valid")
    }

    /// Quotients by the least equivalence containing the identity relation,
    /// then drops it. Returns the quotient together with the map sending
    /// each old element to its class index. Classes are indexed in order of
    /// their least member, and named after it.
    pub fn i_quotient(&self) -> Result<(Structure, Vec<Element>)> {
        if !self.signature.has_identity() {
            return Err(Error::InvalidStructure(format!(
                "i_quotient requires relation {IDENTITY_RELATION} in the signature"
            )));
        }
        let mut uf = UnionFind::new(self.size());
        for tuple in self.tuples(IDENTITY_RELATION) {
            uf.union(tuple[0], tuple[1]);
        }
        // Classes ordered by least member.
        let mut class_of = vec![usize::MAX; self.size()];
        let mut reps: Vec<Element> = Vec::new();
        for e in 0..self.size() {
            let root = uf.find(e);
            if class_of[root] == usize::MAX {
                class_of[root] = reps.len();
                reps.push(e);
            }
        }
        let class_map: Vec<Element> = (0..self.size()).map(|e| class_of[uf.find(e)]).collect();
        let universe: Vec<String> = reps.iter().map(|&r| self.universe[r].clone()).collect();
        let signature = self.signature.without_identity();
        let mut relations: BTreeMap<String, Vec<Vec<Element>>> = BTreeMap::new();
        for (name, data) in &self.relations {
            if name == IDENTITY_RELATION {
                continue;
            }
            let mapped: BTreeSet<Vec<Element>> = data
                .tuples
                .iter()
                .map(|t| t.iter().map(|&e| class_map[e]).collect())
                .collect();
            relations.insert(name.clone(), mapped.into_iter().collect());
        }
        let q = Structure::new(signature, universe, relations)?;
        Ok((q, class_map))
    }
}

/// Reflexive symmetric adjacency extracted from a structure.
#[derive(Debug, Clone)]
pub struct Gaifman {
    adj: Vec<BTreeSet<Element>>,
}

impl Gaifman {
    pub fn size(&self) -> usize {
        self.adj.len()
    }

    pub fn adjacent(&self, a: Element, b: Element) -> bool {
        self.adj[a].contains(&b)
    }

    /// Neighbors of `a`, including `a` itself.
    pub fn neighbors(&self, a: Element) -> &BTreeSet<Element> {
        &self.adj[a]
    }

    /// Connected components, each sorted, ordered by least element.
    pub fn components(&self) -> Vec<Vec<Element>> {
        let n = self.size();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    /// Distinct edges `{a, b}` with `a < b`.
    pub fn edges(&self) -> Vec<(Element, Element)> {
        let mut out = Vec::new();
        for a in 0..self.size() {
            for &b in &self.adj[a] {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// A partial map (or, when not single-valued, a partial relation) between
/// two universes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialMap {
    pairs: BTreeSet<(Element, Element)>,
}

/// Whether a partial-homomorphism check treats the candidate as a function
/// (single-valued) or as an arbitrary relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomMode {
    Function,
    Relation,
}

impl PartialMap {
    pub fn new() -> Self {
        PartialMap::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Element, Element)>>(pairs: I) -> Self {
        PartialMap {
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, a: Element, b: Element) {
        self.pairs.insert((a, b));
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Element, Element)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn domain(&self) -> BTreeSet<Element> {
        self.pairs.iter().map(|&(a, _)| a).collect()
    }

    pub fn images(&self, a: Element) -> impl Iterator<Item = Element> + '_ {
        self.pairs
            .range((a, 0)..=(a, usize::MAX))
            .map(|&(_, b)| b)
    }

    pub fn is_function(&self) -> bool {
        self.domain().iter().all(|&a| self.images(a).count() == 1)
    }
}

/// True iff `g` is a partial homomorphism from `a` to `b`.
///
/// In `Function` mode `g` must be single-valued. In either mode, every
/// tuple of `a` lying entirely in `g`'s domain must map into the
/// corresponding relation of `b` under every choice of images.
pub fn is_partial_hom(a: &Structure, b: &Structure, g: &PartialMap, mode: HomMode) -> bool {
    if mode == HomMode::Function && !g.is_function() {
        return false;
    }
    for (&(x, y), _) in g.pairs.iter().zip(std::iter::repeat(())) {
        if x >= a.size() || y >= b.size() {
            return false;
        }
    }
    let domain = g.domain();
    let mut image = Vec::new();
    for (name, arity) in a.signature().entries() {
        debug_assert!(arity >= 1);
        'tuple: for tuple in a.tuples(name) {
            if !tuple.iter().all(|e| domain.contains(e)) {
                continue;
            }
            // Enumerate every choice of images for the tuple positions.
            let choices: Vec<Vec<Element>> = tuple
                .iter()
                .map(|&e| g.images(e).collect::<Vec<_>>())
                .collect();
            let mut pick = vec![0usize; tuple.len()];
            loop {
                image.clear();
                image.extend(pick.iter().zip(&choices).map(|(&i, c)| c[i]));
                if !b.has(name, &image) {
                    return false;
                }
                // Advance the odometer.
                let mut pos = 0;
                loop {
                    if pos == pick.len() {
                        continue 'tuple;
                    }
                    pick[pos] += 1;
                    if pick[pos] < choices[pos].len() {
                        break;
                    }
                    pick[pos] = 0;
                    pos += 1;
                }
            }
        }
    }
    true
}

/// Calls `pred` on every permutation of `items` (Heap's algorithm) and
/// returns true as soon as `pred` does.
pub(crate) fn permutations_try(
    items: &mut [usize],
    pred: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    fn go(n: usize, items: &mut [usize], pred: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if n <= 1 {
            return pred(items);
        }
        for i in 0..n {
            if go(n - 1, items, pred) {
                return true;
            }
            if n % 2 == 0 {
                items.swap(i, n - 1);
            } else {
                items.swap(0, n - 1);
            }
        }
        false
    }
    go(items.len(), items, pred)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as the root so class representatives
            // are least members.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
