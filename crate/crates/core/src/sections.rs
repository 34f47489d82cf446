//! Sections on the grid `{[i, k] | 0 ≤ i ≤ 2, 0 ≤ k ≤ n}`, niceness, towers
//! of sections, and the explicit 4-tower retractions of 6-stacks.
//!
//! Grid element `[i, k]` sits at position `3k + i` and is labelled `s{i}_{k}`.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::{self, bit};
use crate::canon::canonical_form;
use crate::error::{Error, Result};
use crate::order_map::OrderMap;
use crate::poset::Poset;
use crate::search::{proper_retract_subsets, RetractWitness, SearchBudget};
use crate::towers::{seam_blocks, six_stack};

pub const MAX_SECTION_N: usize = 3;

fn grid_labels(n: usize) -> Vec<String> {
    (0..=n)
        .flat_map(|k| (0..3).map(move |i| format!("s{i}_{k}")))
        .collect()
}

fn at(i: usize, k: usize) -> usize {
    3 * k + i
}

/// Level pairs `k < l` in a fixed order; pattern bit `2 * pair + (d - 1)` means
/// `[i, k] < [i + d, l]` for every `i`.
fn level_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..=n)
        .flat_map(|k| (k + 1..=n).map(move |l| (k, l)))
        .collect()
}

fn grid_up_sets(n: usize, pattern: u64) -> Vec<u64> {
    let mut up: Vec<u64> = (0..3 * (n + 1)).map(bit).collect();
    for (pi, &(k, l)) in level_pairs(n).iter().enumerate() {
        for i in 0..3 {
            up[at(i, k)] |= bit(at(i, l));
            for d in 1..=2 {
                if bits::has(pattern, 2 * pi + d - 1) {
                    up[at(i, k)] |= bit(at((i + d) % 3, l));
                }
            }
        }
    }
    up
}

fn is_transitive(up: &[u64]) -> bool {
    (0..up.len()).all(|a| bits::iter(up[a]).all(|b| up[b] & !up[a] == 0))
}

/// All sections with parameter `n`, up to isomorphism, in first-found order.
///
/// Rotation equivariance and the column chains leave two free bits per level
/// pair (`[i, k] < [i + 1, l]` and `[i, k] < [i + 2, l]`). No relation can point
/// from a higher level to a lower one without breaking the level antichains, so
/// every section arises from exactly one transitive pattern.
pub fn enumerate_sections(n: usize) -> Result<Vec<Poset>> {
    if n == 0 {
        return Err(Error::InvalidArgument("section parameter n must be at least 1".into()));
    }
    if n > MAX_SECTION_N {
        return Err(Error::TooLarge {
            size: n,
            limit: MAX_SECTION_N,
        });
    }
    let pairs = level_pairs(n);
    let consecutive: Vec<usize> = (0..pairs.len()).filter(|&p| pairs[p].1 == pairs[p].0 + 1).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for pattern in 0..(1u64 << (2 * pairs.len())) {
        // Condition (4): consecutive levels are never completely comparable.
        if consecutive.iter().any(|&p| (pattern >> (2 * p)) & 3 == 3) {
            continue;
        }
        let up = grid_up_sets(n, pattern);
        if !is_transitive(&up) {
            continue;
        }
        let p = Poset::from_up_sets(grid_labels(n), up)?;
        if seen.insert(canonical_form(&p)) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Whether the labelling `grid[pos] = element` satisfies conditions (1) to (4).
struct GridSearch<'a> {
    p: &'a Poset,
    n: usize,
    grid: Vec<usize>,
    used: u64,
}

impl GridSearch<'_> {
    fn rel(&self, a: (usize, usize), b: (usize, usize)) -> Option<bool> {
        let (x, y) = (at(a.0, a.1), at(b.0, b.1));
        if x < self.grid.len() && y < self.grid.len() {
            Some(self.p.lt(self.grid[x], self.grid[y]))
        } else {
            None
        }
    }

    /// Checks everything decidable once position `pos` is filled.
    fn consistent(&self, pos: usize) -> bool {
        let (i, k) = (pos % 3, pos / 3);
        let v = self.grid[pos];
        if k > 0 && !self.p.lt(self.grid[at(i, k - 1)], v) {
            return false;
        }
        for j in 0..i {
            if self.p.comparable(self.grid[at(j, k)], v) {
                return false;
            }
        }
        // Rotation equivariance against every filled position.
        for other in 0..pos {
            let (j, l) = (other % 3, other / 3);
            for (a, b) in [((i, k), (j, l)), ((j, l), (i, k))] {
                let here = self.rel(a, b).expect("filled");
                let next = ((a.0 + 1) % 3, a.1);
                let next_b = ((b.0 + 1) % 3, b.1);
                if let Some(r) = self.rel(next, next_b) {
                    if r != here {
                        return false;
                    }
                }
                let prev = ((a.0 + 2) % 3, a.1);
                let prev_b = ((b.0 + 2) % 3, b.1);
                if let Some(r) = self.rel(prev, prev_b) {
                    if r != here {
                        return false;
                    }
                }
            }
        }
        if i == 2 && k > 0 {
            let complete = (0..3).all(|a| (0..3).all(|b| self.p.lt(self.grid[at(a, k - 1)], self.grid[at(b, k)])));
            if complete {
                return false;
            }
        }
        true
    }

    fn run(&mut self) -> bool {
        let pos = self.grid.len();
        if pos == 3 * (self.n + 1) {
            return true;
        }
        for v in 0..self.p.len() {
            if bits::has(self.used, v) {
                continue;
            }
            self.grid.push(v);
            self.used |= bit(v);
            if self.consistent(pos) && self.run() {
                return true;
            }
            self.grid.pop();
            self.used &= !bit(v);
        }
        false
    }
}

/// A grid labelling of `p` (positions `3k + i` to elements), if `p` is a
/// section of the grid kind.
pub fn section_labelling(p: &Poset) -> Option<Vec<usize>> {
    if p.len() < 6 || p.len() % 3 != 0 {
        return None;
    }
    let mut search = GridSearch {
        p,
        n: p.len() / 3 - 1,
        grid: Vec::with_capacity(p.len()),
        used: 0,
    };
    search.run().then_some(search.grid)
}

pub fn is_section(p: &Poset) -> bool {
    (p.len() == 2 && p.comparability_count() == 0) || section_labelling(p).is_some()
}

/// For every `p < q` some `r > p` has `q ≰ r` and some `s < q` has `s ≰ p`.
pub fn is_nice(p: &Poset) -> Result<bool> {
    if !is_section(p) {
        return Err(Error::NotASection);
    }
    Ok(p.strict_pairs().iter().all(|&(a, b)| {
        let r_ok = bits::iter(p.up_set(a) & !bit(a)).any(|r| !p.leq(b, r));
        let s_ok = bits::iter(p.down_set(b) & !bit(b)).any(|s| !p.leq(s, a));
        r_ok && s_ok
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectionKind {
    Antichain2,
    Grid { n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionSummand {
    #[serde(flatten)]
    pub kind: SectionKind,
    pub elements: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionTowerDecomposition {
    pub summands: Vec<SectionSummand>,
}

pub fn is_tower_of_sections(p: &Poset) -> Option<SectionTowerDecomposition> {
    if p.is_empty() {
        return None;
    }
    let mut summands = Vec::new();
    for block in seam_blocks(p) {
        let q = p.induced(&block);
        let kind = if q.len() == 2 && q.comparability_count() == 0 {
            SectionKind::Antichain2
        } else if section_labelling(&q).is_some() {
            SectionKind::Grid { n: q.len() / 3 - 1 }
        } else {
            return None;
        };
        summands.push(SectionSummand {
            kind,
            elements: block.iter().map(|&e| p.label(e).to_string()).collect(),
        });
    }
    Some(SectionTowerDecomposition { summands })
}

/// First proper retract (smallest first) that is a tower of sections.
pub fn tower_of_sections_retract(p: &Poset, budget: &SearchBudget) -> Result<Option<RetractWitness>> {
    let mut scan = proper_retract_subsets(p, budget, |q: &Poset, s: u64| {
        Ok(is_tower_of_sections(&q.induced_mask(s)).is_some())
    })?;
    scan.next().transpose()
}

pub fn is_very_nice(p: &Poset, budget: &SearchBudget) -> Result<bool> {
    if !is_section(p) {
        return Err(Error::NotASection);
    }
    Ok(tower_of_sections_retract(p, budget)?.is_none())
}

fn six_stack_label(name: char, rank: usize) -> usize {
    let offset = match name {
        'x' => 0,
        'y' => 1,
        'z' => 2,
        _ => unreachable!(),
    };
    3 * rank + offset
}

/// `(rank, name) → (rank, name)` pairs of the retraction onto
/// `{x0, z0, y1, y2, x3, z3}` with `f(x1) = x0`, shifted up by `base` ranks and
/// optionally mirrored by `x ↔ z`.
fn rank_three_pairs(base: usize, mirror: bool) -> Vec<(usize, usize)> {
    let swap = |c: char| match (mirror, c) {
        (true, 'x') => 'z',
        (true, 'z') => 'x',
        _ => c,
    };
    let moved = [
        (('x', 1), ('x', 0)),
        (('y', 0), ('x', 0)),
        (('z', 1), ('y', 2)),
        (('x', 2), ('y', 1)),
        (('z', 2), ('z', 3)),
        (('y', 3), ('z', 3)),
    ];
    let fixed = [('x', 0), ('z', 0), ('y', 1), ('y', 2), ('x', 3), ('z', 3)];
    let pos = |(c, r): (char, usize)| six_stack_label(swap(c), base + r);
    moved
        .iter()
        .map(|&(a, b)| (pos(a), pos(b)))
        .chain(fixed.iter().map(|&q| (pos(q), pos(q))))
        .collect()
}

/// The retract subset `{x0, z0, y1, y2, x3, z3}` of the 6-stack of rank 3 and
/// the retraction onto it with `f(x1) = x0`.
pub fn lemma59_retraction() -> (Poset, u64, OrderMap) {
    let (p, subset, f) = stacked_4tower_retraction(1).expect("k = 1 is valid");
    (p, subset, f)
}

/// Retraction of the 6-stack of rank `3k` onto a 4-tower of rank `2k`.
///
/// Segment `t` covers ranks `3t..=3t+3`. Even segments use the rank-3 pattern
/// as is; odd segments use its mirror image under `x ↔ z`, which agrees with
/// the previous segment on the shared level.
pub fn stacked_4tower_retraction(k: usize) -> Result<(Poset, u64, OrderMap)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let p = six_stack(3 * k)?;
    let mut assignment: Vec<Option<usize>> = vec![None; p.len()];
    let mut subset = 0u64;
    for t in 0..k {
        for (from, to) in rank_three_pairs(3 * t, t % 2 == 1) {
            match assignment[from] {
                Some(prev) if prev != to => {
                    return Err(Error::InvalidArgument(format!(
                        "segments disagree on `{}`",
                        p.label(from)
                    )))
                }
                _ => assignment[from] = Some(to),
            }
            if from == to {
                subset |= bit(from);
            }
        }
    }
    let assignment: Vec<usize> = assignment.into_iter().map(|v| v.expect("every rank covered")).collect();
    let f = OrderMap::self_map(Arc::new(p.clone()), assignment);
    Ok((p, subset, f))
}
