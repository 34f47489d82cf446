//! The finite poset carrier and its construction algebra.
//!
//! A [`Poset`] stores the full reflexive-transitive relation as one up-set and
//! one down-set bitmask per element. Covers (the Hasse diagram) are derived
//! once at construction. Elements are identified by position; labels are only
//! used for input and output.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::bits::{self, bit, has, MAX_ELEMENTS};
use crate::error::{Error, Result};
use crate::order_map::OrderMap;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poset {
    labels: Vec<String>,
    up: Vec<u64>,
    down: Vec<u64>,
    upper_covers: Vec<u64>,
    lower_covers: Vec<u64>,
}

/// Per-element ranks and the level sets `P(i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankProfile {
    pub rank_of: Vec<usize>,
    pub levels: Vec<Vec<usize>>,
    pub is_ranked: bool,
    pub height: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Width {
    pub width: usize,
    pub antichain: Vec<usize>,
}

/// One step of dismantling by irreducibles.
#[derive(Clone, Debug)]
pub struct DismantleStep {
    pub removed: String,
    pub image: String,
    /// Retraction of the poset before this step onto the poset after it,
    /// expressed as an idempotent self-map.
    pub retraction: OrderMap,
}

#[derive(Clone, Debug)]
pub struct Dismantling {
    pub core: Poset,
    pub steps: Vec<DismantleStep>,
}

impl Poset {
    /// Builds a poset from labels and a list of `lower < upper` pairs. The pairs
    /// may contain redundant comparabilities; covers are recomputed.
    pub fn new<S: AsRef<str>>(labels: &[S], relations: &[(S, S)]) -> Result<Poset> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        let index = label_index(&labels)?;
        let mut pairs = Vec::with_capacity(relations.len());
        for (a, b) in relations {
            let lookup = |s: &str| {
                index
                    .get(s)
                    .copied()
                    .ok_or_else(|| Error::UnknownElement(s.to_string()))
            };
            pairs.push((lookup(a.as_ref())?, lookup(b.as_ref())?));
        }
        Poset::from_pairs(labels, &pairs)
    }

    /// Builds a poset from labels and positional `lower < upper` pairs.
    pub fn from_pairs(labels: Vec<String>, pairs: &[(usize, usize)]) -> Result<Poset> {
        let n = labels.len();
        if n > MAX_ELEMENTS {
            return Err(Error::TooLarge {
                size: n,
                limit: MAX_ELEMENTS,
            });
        }
        label_index(&labels)?;
        let mut up: Vec<u64> = (0..n).map(bit).collect();
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!(
                    "relation ({a}, {b}) out of range for {n} elements"
                )));
            }
            if a == b {
                return Err(Error::Cycle(labels[a].clone(), labels[b].clone()));
            }
            up[a] |= bit(b);
        }
        for k in 0..n {
            for i in 0..n {
                if has(up[i], k) {
                    up[i] |= up[k];
                }
            }
        }
        for i in 0..n {
            for j in bits::iter(up[i] & !bit(i)) {
                if has(up[j], i) {
                    return Err(Error::Cycle(labels[i].clone(), labels[j].clone()));
                }
            }
        }
        Ok(Poset::from_closed_unchecked(labels, up))
    }

    /// Builds a poset from an already reflexive-transitive-antisymmetric
    /// relation given as up-sets. Callers inside the crate guarantee the laws;
    /// debug builds re-check them.
    pub(crate) fn from_closed_unchecked(labels: Vec<String>, up: Vec<u64>) -> Poset {
        let n = labels.len();
        debug_assert!(n <= MAX_ELEMENTS);
        debug_assert!((0..n).all(|i| has(up[i], i)));
        debug_assert!((0..n).all(|i| bits::iter(up[i]).all(|j| up[j] & !up[i] == 0)));
        debug_assert!((0..n).all(|i| bits::iter(up[i] & !bit(i)).all(|j| !has(up[j], i))));
        let mut down = vec![0u64; n];
        for i in 0..n {
            for j in bits::iter(up[i]) {
                down[j] |= bit(i);
            }
        }
        let mut upper_covers = vec![0u64; n];
        let mut lower_covers = vec![0u64; n];
        for i in 0..n {
            for j in bits::iter(up[i] & !bit(i)) {
                let between = up[i] & down[j] & !bit(i) & !bit(j);
                if between == 0 {
                    upper_covers[i] |= bit(j);
                    lower_covers[j] |= bit(i);
                }
            }
        }
        Poset {
            labels,
            up,
            down,
            upper_covers,
            lower_covers,
        }
    }

    /// Validating counterpart of [`Poset::from_closed_unchecked`].
    pub fn from_up_sets(labels: Vec<String>, up: Vec<u64>) -> Result<Poset> {
        let n = labels.len();
        if up.len() != n {
            return Err(Error::InvalidArgument("one up-set per label required".into()));
        }
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| bits::iter(up[i] & !bit(i)).map(move |j| (i, j)))
            .collect();
        if pairs.iter().any(|&(_, j)| j >= n) {
            return Err(Error::InvalidArgument("up-set mentions unknown element".into()));
        }
        let p = Poset::from_pairs(labels, &pairs)?;
        if p.up != up.iter().enumerate().map(|(i, u)| u | bit(i)).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument("relation is not transitively closed".into()));
        }
        Ok(p)
    }

    pub fn antichain(size: usize, prefix: &str) -> Poset {
        let labels = (0..size).map(|i| format!("{prefix}{i}")).collect();
        Poset::from_closed_unchecked(labels, (0..size).map(bit).collect())
    }

    /// Chain `c0 < c1 < … < c{len-1}`.
    pub fn chain(len: usize) -> Poset {
        let labels = (0..len).map(|i| format!("c{i}")).collect();
        let up = (0..len).map(|i| bits::full(len) & !bits::full(i)).collect();
        Poset::from_closed_unchecked(labels, up)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.index_of(l.as_ref())
                    .ok_or_else(|| Error::UnknownElement(l.as_ref().to_string()))
            })
            .collect()
    }

    pub fn all(&self) -> u64 {
        bits::full(self.len())
    }

    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        has(self.up[a], b)
    }

    #[inline]
    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && has(self.up[a], b)
    }

    #[inline]
    pub fn comparable(&self, a: usize, b: usize) -> bool {
        has(self.up[a] | self.down[a], b)
    }

    /// `{q | a ≤ q}`.
    #[inline]
    pub fn up_set(&self, a: usize) -> u64 {
        self.up[a]
    }

    /// `{q | q ≤ a}`.
    #[inline]
    pub fn down_set(&self, a: usize) -> u64 {
        self.down[a]
    }

    #[inline]
    pub fn upper_covers(&self, a: usize) -> u64 {
        self.upper_covers[a]
    }

    #[inline]
    pub fn lower_covers(&self, a: usize) -> u64 {
        self.lower_covers[a]
    }

    /// Hasse diagram edges `(lower, upper)`, sorted.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|i| bits::iter(self.upper_covers[i]).map(move |j| (i, j)))
            .collect()
    }

    /// Strict comparabilities `(lower, upper)`, sorted.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|i| bits::iter(self.up[i] & !bit(i)).map(move |j| (i, j)))
            .collect()
    }

    pub fn comparability_count(&self) -> usize {
        self.up.iter().map(|u| u.count_ones() as usize).sum::<usize>() - self.len()
    }

    pub fn minimal_elements(&self) -> u64 {
        (0..self.len())
            .filter(|&i| self.down[i] == bit(i))
            .fold(0, |acc, i| acc | bit(i))
    }

    pub fn maximal_elements(&self) -> u64 {
        (0..self.len())
            .filter(|&i| self.up[i] == bit(i))
            .fold(0, |acc, i| acc | bit(i))
    }

    pub fn is_antichain(&self, set: u64) -> bool {
        bits::iter(set).all(|i| self.up[i] & set == bit(i))
    }

    /// A linear extension listing minimal elements first: elements sorted by
    /// rank, ties by position.
    pub fn linear_extension(&self) -> Vec<usize> {
        let ranks = self.ranks();
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| (ranks[i], i));
        order
    }

    /// `r(p)`: the height of `{q | q ≤ p}`.
    pub fn ranks(&self) -> Vec<usize> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| self.down[i].count_ones());
        let mut rank = vec![0usize; n];
        for &i in &order {
            rank[i] = bits::iter(self.lower_covers[i])
                .map(|j| rank[j] + 1)
                .max()
                .unwrap_or(0);
        }
        rank
    }

    pub fn rank_structure(&self) -> Result<RankProfile> {
        if self.is_empty() {
            return Err(Error::EmptyPoset);
        }
        let rank_of = self.ranks();
        let height = *rank_of.iter().max().unwrap_or(&0);
        let mut levels = vec![Vec::new(); height + 1];
        for (i, &r) in rank_of.iter().enumerate() {
            levels[r].push(i);
        }
        // Maximal chains all reach `height` exactly when every cover joins
        // consecutive ranks and every maximal element sits at the top.
        let covers_consecutive = self.covers().iter().all(|&(a, b)| rank_of[b] == rank_of[a] + 1);
        let maxima_on_top = bits::iter(self.maximal_elements()).all(|m| rank_of[m] == height);
        Ok(RankProfile {
            rank_of,
            levels,
            is_ranked: covers_consecutive && maxima_on_top,
            height,
        })
    }

    pub fn is_ranked(&self) -> bool {
        self.rank_structure().map(|r| r.is_ranked).unwrap_or(true)
    }

    /// Elements with exactly one upper cover or exactly one lower cover.
    pub fn irreducible_elements(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.is_irreducible(i))
            .collect()
    }

    pub fn is_irreducible(&self, i: usize) -> bool {
        self.upper_covers[i].count_ones() == 1 || self.lower_covers[i].count_ones() == 1
    }

    /// The element an irreducible `i` is folded onto: its unique upper cover if
    /// it has one, otherwise its unique lower cover.
    pub fn irreducible_image(&self, i: usize) -> Option<usize> {
        if self.upper_covers[i].count_ones() == 1 {
            Some(self.upper_covers[i].trailing_zeros() as usize)
        } else if self.lower_covers[i].count_ones() == 1 {
            Some(self.lower_covers[i].trailing_zeros() as usize)
        } else {
            None
        }
    }

    /// Removes irreducible elements one at a time (lowest position first) until
    /// none remain.
    pub fn dismantle(&self) -> Dismantling {
        let mut current = self.clone();
        let mut steps = Vec::new();
        while let Some(&victim) = current.irreducible_elements().first() {
            let image = current.irreducible_image(victim).expect("irreducible");
            let shared = Arc::new(current.clone());
            let assignment: Vec<usize> = (0..current.len())
                .map(|i| if i == victim { image } else { i })
                .collect();
            let retraction = OrderMap::new(shared.clone(), shared, assignment);
            let removed = current.label(victim).to_string();
            let image_label = current.label(image).to_string();
            let keep: Vec<usize> = (0..current.len()).filter(|&i| i != victim).collect();
            current = current.induced(&keep);
            steps.push(DismantleStep {
                removed,
                image: image_label,
                retraction,
            });
        }
        Dismantling {
            core: current,
            steps,
        }
    }

    /// The order restricted to `subset` (positions, kept in increasing order).
    pub fn induced(&self, subset: &[usize]) -> Poset {
        let mut keep: Vec<usize> = subset.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        let up = keep
            .iter()
            .map(|&i| {
                keep.iter()
                    .enumerate()
                    .filter(|&(_, &j)| self.leq(i, j))
                    .fold(0u64, |acc, (k, _)| acc | bit(k))
            })
            .collect();
        Poset::from_closed_unchecked(labels, up)
    }

    pub fn induced_mask(&self, mask: u64) -> Poset {
        self.induced(&bits::to_indices(mask))
    }

    pub fn induced_subposet<S: AsRef<str>>(&self, subset: &[S]) -> Result<Poset> {
        let idx = self.indices_of(subset)?;
        Ok(self.induced(&idx))
    }

    /// The dual order, same labels.
    pub fn dual(&self) -> Poset {
        Poset::from_closed_unchecked(self.labels.clone(), self.down.clone())
    }

    /// Renames elements: element `i` moves to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Poset {
        let n = self.len();
        let mut labels = vec![String::new(); n];
        let mut up = vec![0u64; n];
        for i in 0..n {
            labels[perm[i]] = self.labels[i].clone();
            up[perm[i]] = bits::iter(self.up[i]).fold(0, |acc, j| acc | bit(perm[j]));
        }
        Poset::from_closed_unchecked(labels, up)
    }

    pub fn with_labels(&self, labels: Vec<String>) -> Result<Poset> {
        if labels.len() != self.len() {
            return Err(Error::InvalidArgument("label count mismatch".into()));
        }
        label_index(&labels)?;
        Ok(Poset::from_closed_unchecked(labels, self.up.clone()))
    }

    /// `P + Q`: no cross comparabilities.
    pub fn disjoint_sum(&self, other: &Poset) -> Poset {
        combine(&[self, other], false)
    }

    /// Ordinal sum of `parts`: everything in an earlier part lies below
    /// everything in a later one.
    pub fn ordinal_sum(parts: &[Poset]) -> Result<Poset> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("ordinal sum of no parts".into()));
        }
        let total: usize = parts.iter().map(Poset::len).sum();
        if total > MAX_ELEMENTS {
            return Err(Error::TooLarge {
                size: total,
                limit: MAX_ELEMENTS,
            });
        }
        let refs: Vec<&Poset> = parts.iter().collect();
        Ok(combine(&refs, true))
    }

    /// Exact width by Dilworth: `n` minus a maximum matching in the strict
    /// comparability bipartite graph, with a König witness antichain.
    pub fn width(&self) -> Result<Width> {
        if self.is_empty() {
            return Err(Error::EmptyPoset);
        }
        let n = self.len();
        let strict_up: Vec<u64> = (0..n).map(|i| self.up[i] & !bit(i)).collect();
        let mut match_right: Vec<Option<usize>> = vec![None; n];
        let mut match_left: Vec<Option<usize>> = vec![None; n];
        for u in 0..n {
            let mut seen = 0u64;
            augment(u, &strict_up, &mut seen, &mut match_left, &mut match_right);
        }
        let matched = match_left.iter().filter(|m| m.is_some()).count();

        // Alternating reachability from unmatched left vertices.
        let mut left_reached = 0u64;
        let mut right_reached = 0u64;
        let mut stack: Vec<usize> = (0..n).filter(|&u| match_left[u].is_none()).collect();
        for &u in &stack {
            left_reached |= bit(u);
        }
        while let Some(u) = stack.pop() {
            for v in bits::iter(strict_up[u] & !right_reached) {
                right_reached |= bit(v);
                if let Some(w) = match_right[v] {
                    if !has(left_reached, w) {
                        left_reached |= bit(w);
                        stack.push(w);
                    }
                }
            }
        }
        // Minimum vertex cover = (L \ reached) ∪ (R ∩ reached); the elements
        // touching neither side form a maximum antichain.
        let antichain: Vec<usize> = (0..n)
            .filter(|&i| has(left_reached, i) && !has(right_reached, i))
            .collect();
        debug_assert_eq!(antichain.len(), n - matched);
        Ok(Width {
            width: n - matched,
            antichain,
        })
    }

    /// Sorted cover pairs as labels.
    pub fn cover_labels(&self) -> Vec<(String, String)> {
        self.covers()
            .into_iter()
            .map(|(a, b)| (self.labels[a].clone(), self.labels[b].clone()))
            .collect()
    }

    /// Connected components of the comparability graph, each as a mask.
    pub fn components(&self) -> Vec<u64> {
        let mut seen = 0u64;
        let mut out = Vec::new();
        for start in 0..self.len() {
            if has(seen, start) {
                continue;
            }
            let mut comp = bit(start);
            let mut frontier = bit(start);
            while frontier != 0 {
                let next = bits::iter(frontier)
                    .fold(0u64, |acc, i| acc | self.up[i] | self.down[i])
                    & !comp;
                comp |= next;
                frontier = next;
            }
            seen |= comp;
            out.push(comp);
        }
        out
    }
}

fn augment(
    u: usize,
    adj: &[u64],
    seen: &mut u64,
    match_left: &mut [Option<usize>],
    match_right: &mut [Option<usize>],
) -> bool {
    for v in bits::iter(adj[u]) {
        if has(*seen, v) {
            continue;
        }
        *seen |= bit(v);
        let free = match match_right[v] {
            None => true,
            Some(w) => augment(w, adj, seen, match_left, match_right),
        };
        if free {
            match_right[v] = Some(u);
            match_left[u] = Some(v);
            return true;
        }
    }
    false
}

fn label_index(labels: &[String]) -> Result<HashMap<&str, usize>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.as_str(), i).is_some() {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(index)
}

fn combine(parts: &[&Poset], ordinal: bool) -> Poset {
    let mut seen = HashSet::new();
    let collide = parts
        .iter()
        .flat_map(|p| p.labels.iter())
        .any(|l| !seen.insert(l.as_str()));
    let mut labels = Vec::new();
    let mut up = Vec::new();
    let total: usize = parts.iter().map(|p| p.len()).sum();
    let mut offset = 0;
    for (k, p) in parts.iter().enumerate() {
        let above = bits::full(total) & !bits::full(offset + p.len());
        for i in 0..p.len() {
            labels.push(if collide {
                format!("{}.{k}", p.labels[i])
            } else {
                p.labels[i].clone()
            });
            let mut u = p.up[i] << offset;
            if ordinal {
                u |= above;
            }
            up.push(u);
        }
        offset += p.len();
    }
    Poset::from_closed_unchecked(labels, up)
}

/// Labels of a set of elements, sorted by position.
pub fn label_set(p: &Poset, set: u64) -> BTreeSet<String> {
    bits::iter(set).map(|i| p.label(i).to_string()).collect()
}
