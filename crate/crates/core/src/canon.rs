//! Isomorphism invariants: colour refinement, canonical forms, and
//! isomorphism testing.
//!
//! The canonical form is computed by individualisation-refinement. Every step
//! (initial colouring, refinement, choice of target cell) depends only on the
//! order itself, so isomorphic posets produce identical forms.

use std::collections::HashMap;
use std::sync::Arc;

use crate::bits::{self, bit};
use crate::order_map::OrderMap;
use crate::poset::Poset;
use crate::search::{MapSearch, SearchBudget};

/// Relation matrix under a canonical labelling. Two posets are isomorphic iff
/// their forms are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    rows: Vec<u64>,
}

impl CanonicalForm {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

type Signature = (u32, Vec<u32>, Vec<u32>);

/// Stable colour refinement. Colours are ranks of signatures, so they mean the
/// same thing for every poset refined together.
pub fn refine(p: &Poset, colors: &[u32]) -> Vec<u32> {
    let n = p.len();
    let mut colors = colors.to_vec();
    let mut classes = count_classes(&colors);
    loop {
        let sigs: Vec<Signature> = (0..n)
            .map(|i| {
                let mut below: Vec<u32> = bits::iter(p.down_set(i) & !bit(i)).map(|j| colors[j]).collect();
                let mut above: Vec<u32> = bits::iter(p.up_set(i) & !bit(i)).map(|j| colors[j]).collect();
                below.sort_unstable();
                above.sort_unstable();
                (colors[i], below, above)
            })
            .collect();
        colors = rank_signatures(&sigs);
        let next = count_classes(&colors);
        if next == classes {
            return colors;
        }
        classes = next;
    }
}

/// Initial colouring from degree data only.
pub fn initial_colors(p: &Poset) -> Vec<u32> {
    let sigs: Vec<(u32, u32, u32, u32)> = (0..p.len())
        .map(|i| {
            (
                p.down_set(i).count_ones(),
                p.up_set(i).count_ones(),
                p.lower_covers(i).count_ones(),
                p.upper_covers(i).count_ones(),
            )
        })
        .collect();
    rank_signatures(&sigs)
}

/// Equitable colouring of `p` used as an automorphism invariant.
pub fn orbit_colors(p: &Poset) -> Vec<u32> {
    refine(p, &initial_colors(p))
}

fn rank_signatures<T: Ord + Clone>(sigs: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    sigs.iter()
        .map(|s| sorted.binary_search(s).expect("present") as u32)
        .collect()
}

fn count_classes(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

pub fn canonical_form(p: &Poset) -> CanonicalForm {
    let mut best: Option<Vec<u64>> = None;
    let colors = orbit_colors(p);
    descend(p, colors, &mut best);
    CanonicalForm {
        rows: best.unwrap_or_default(),
    }
}

fn descend(p: &Poset, colors: Vec<u32>, best: &mut Option<Vec<u64>>) {
    let n = p.len();
    let classes = count_classes(&colors);
    if classes == n {
        let mut at = vec![0usize; n];
        for (v, &c) in colors.iter().enumerate() {
            at[c as usize] = v;
        }
        let rows: Vec<u64> = (0..n)
            .map(|i| {
                bits::iter(p.up_set(at[i])).fold(0u64, |acc, v| acc | bit(colors[v] as usize))
            })
            .collect();
        if best.as_ref().is_none_or(|b| rows < *b) {
            *best = Some(rows);
        }
        return;
    }
    // Target cell: the smallest non-singleton colour.
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for &c in &colors {
        *counts.entry(c).or_default() += 1;
    }
    let target = counts
        .iter()
        .filter(|&(_, &k)| k > 1)
        .map(|(&c, _)| c)
        .min()
        .expect("non-discrete colouring has a non-singleton cell");
    let cell: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();
    // Twins (same strict up- and down-sets) are interchangeable; one
    // representative per twin class suffices.
    let mut tried: Vec<usize> = Vec::new();
    for &v in &cell {
        if tried.iter().any(|&u| twins(p, u, v)) {
            continue;
        }
        tried.push(v);
        let marked: Vec<(u32, u32)> = colors
            .iter()
            .enumerate()
            .map(|(u, &c)| (c, u32::from(u != v && c == target)))
            .collect();
        let next = refine(p, &rank_signatures(&marked));
        descend(p, next, best);
    }
}

fn twins(p: &Poset, u: usize, v: usize) -> bool {
    p.up_set(u) & !bit(u) == p.up_set(v) & !bit(v) && p.down_set(u) & !bit(u) == p.down_set(v) & !bit(v)
}

/// Colours of the disjoint union of `p` and `q`, split back per poset. Equal
/// colours mean equal invariants across the two posets.
fn joint_colors(p: &Poset, q: &Poset) -> (Vec<u32>, Vec<u32>) {
    let union = p.disjoint_sum(q);
    let colors = orbit_colors(&union);
    (colors[..p.len()].to_vec(), colors[p.len()..].to_vec())
}

/// Returns an order-isomorphism `p → q` if one exists. Backtracks in `p`'s
/// linear-extension order over colour-compatible candidates.
pub fn is_isomorphic(p: &Poset, q: &Poset) -> Option<OrderMap> {
    if p.len() != q.len() || p.comparability_count() != q.comparability_count() {
        return None;
    }
    let (cp, cq) = joint_colors(p, q);
    let mut hp = cp.clone();
    let mut hq = cq.clone();
    hp.sort_unstable();
    hq.sort_unstable();
    if hp != hq {
        return None;
    }
    let domains: Vec<u64> = cp
        .iter()
        .map(|&c| (0..q.len()).filter(|&j| cq[j] == c).fold(0, |acc, j| acc | bit(j)))
        .collect();
    let search = MapSearch::new(p, q, domains).bijective();
    let found = search
        .first(&SearchBudget::unlimited(), |_| true)
        .expect("unlimited budget");
    found.map(|a| OrderMap::new(Arc::new(p.clone()), Arc::new(q.clone()), a))
}

/// A colour held by exactly one element marks an element every automorphism fixes.
pub(crate) fn singleton_color_exists(colors: &[u32]) -> bool {
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for &c in colors {
        *counts.entry(c).or_default() += 1;
    }
    counts.values().any(|&k| k == 1)
}

pub(crate) fn same_color_domains(colors: &[u32]) -> Vec<u64> {
    let n = colors.len();
    (0..n)
        .map(|i| (0..n).filter(|&j| colors[j] == colors[i]).fold(0, |acc, j| acc | bit(j)))
        .collect()
}
