//! Circulant bipartite posets and generalized crowns.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::{self, bit, has};
use crate::canon;
use crate::error::{Error, Result};
use crate::order_map::OrderMap;
use crate::poset::Poset;
use crate::search::{has_fpp, retraction_exists, MapSearch, SearchBudget};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CirculantSpec {
    pub m: usize,
    pub n: usize,
    pub offsets: Vec<usize>,
}

/// `x_i < y_{(i + j) mod n}` for `i < m` and `j` in the offsets. Positions:
/// `x0..x{m-1}` then `y0..y{n-1}`.
///
/// Offsets must satisfy `J + m ≡ J (mod n)`; otherwise the relation built
/// over `i = 0..m-1` is not invariant under the shift.
pub fn circulant_bipartite(spec: &CirculantSpec) -> Result<Poset> {
    let CirculantSpec { m, n, offsets } = spec;
    let (m, n) = (*m, *n);
    if m < 2 || n < 2 {
        return Err(Error::InvalidArgument("circulant sides need at least 2 elements".into()));
    }
    if offsets.windows(2).any(|w| w[0] >= w[1]) || offsets.iter().any(|&j| j >= n) {
        return Err(Error::InvalidArgument(
            "offsets must be strictly increasing and below n".into(),
        ));
    }
    let mut shifted: Vec<usize> = offsets.iter().map(|&j| (j + m) % n).collect();
    shifted.sort_unstable();
    if shifted != *offsets {
        return Err(Error::InvalidArgument(format!(
            "offsets {offsets:?} are not invariant under adding m = {m} modulo n = {n}"
        )));
    }
    let mut labels: Vec<String> = (0..m).map(|i| format!("x{i}")).collect();
    labels.extend((0..n).map(|j| format!("y{j}")));
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| offsets.iter().map(move |&j| (i, m + (i + j) % n)))
        .collect();
    Poset::from_pairs(labels, &pairs)
}

/// Blocks `A_0..A_{k-1}`, each listed in its cyclic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrownPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl CrownPartition {
    pub fn block_labels(&self, p: &Poset) -> Vec<Vec<String>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&e| p.label(e).to_string()).collect())
            .collect()
    }

    fn covers_exactly(&self, p: &Poset) -> bool {
        let mut seen = 0u64;
        for &e in self.blocks.iter().flatten() {
            if e >= p.len() || has(seen, e) {
                return false;
            }
            seen |= bit(e);
        }
        seen == p.all()
    }
}

/// Whether `lower ∪ upper` (all of `lower` below or incomparable to `upper`)
/// is circulant with the given cyclic orders.
fn circulant_pair(p: &Poset, lower: &[usize], upper: &[usize]) -> bool {
    let (m, n) = (lower.len(), upper.len());
    let offsets: Vec<usize> = (0..n).filter(|&t| p.lt(lower[0], upper[t])).collect();
    let relation_ok = (0..m).all(|i| {
        (0..n).all(|t| p.lt(lower[i], upper[t]) == offsets.contains(&((t + n - i % n) % n)))
    });
    let shift_ok = (0..m).all(|i| {
        (0..n).all(|t| !p.lt(lower[i], upper[t]) || p.lt(lower[(i + 1) % m], upper[(t + 1) % n]))
    });
    relation_ok && shift_ok
}

pub fn is_generalized_crown(p: &Poset, partition: &CrownPartition) -> Result<bool> {
    if !partition.covers_exactly(p) {
        return Err(Error::InvalidArgument("partition does not cover the poset exactly".into()));
    }
    for block in &partition.blocks {
        if block.len() < 2 || !p.is_antichain(bits::from_indices(block)) {
            return Ok(false);
        }
    }
    for (i, a) in partition.blocks.iter().enumerate() {
        for b in &partition.blocks[i + 1..] {
            let up = a.iter().any(|&u| b.iter().any(|&v| p.lt(u, v)));
            let down = a.iter().any(|&u| b.iter().any(|&v| p.lt(v, u)));
            let ok = match (up, down) {
                (true, true) => false,
                (false, false) => true,
                (true, false) => circulant_pair(p, a, b),
                (false, true) => circulant_pair(p, b, a),
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn orbits_match(assignment: &[usize], blocks: &[Vec<usize>]) -> bool {
    blocks.iter().all(|block| {
        let mut orbit = vec![block[0]];
        let mut at = assignment[block[0]];
        while at != block[0] && orbit.len() <= block.len() {
            orbit.push(at);
            at = assignment[at];
        }
        orbit.len() == block.len() && orbit.iter().all(|e| block.contains(e))
    })
}

/// An automorphism whose orbits are exactly the blocks.
pub fn is_special(p: &Poset, partition: &CrownPartition, budget: &SearchBudget) -> Result<Option<OrderMap>> {
    if !partition.covers_exactly(p) || partition.blocks.iter().any(|b| b.len() < 2) {
        return Ok(None);
    }
    let colors = canon::orbit_colors(p);
    let same = canon::same_color_domains(&colors);
    let mut domains = vec![0u64; p.len()];
    for block in &partition.blocks {
        let mask = bits::from_indices(block);
        for &e in block {
            domains[e] = same[e] & mask & !bit(e);
        }
    }
    let blocks = partition.blocks.clone();
    let found = MapSearch::new(p, p, domains)
        .bijective()
        .first(budget, move |a| orbits_match(a, &blocks))?;
    Ok(found.map(|a| OrderMap::self_map(Arc::new(p.clone()), a)))
}

/// Restricts to the blocks at `keep`; positions are renumbered for the induced
/// subposet and the kept blocks stay in their original relative order.
pub fn drop_degenerate_blocks(p: &Poset, partition: &CrownPartition, keep: &[usize]) -> Result<(Poset, CrownPartition)> {
    if keep.iter().any(|&k| k >= partition.blocks.len()) {
        return Err(Error::InvalidArgument("block index out of range".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let elements: Vec<usize> = {
        let mut v: Vec<usize> = kept.iter().flat_map(|&k| partition.blocks[k].clone()).collect();
        v.sort_unstable();
        v
    };
    let position = |e: usize| elements.binary_search(&e).expect("kept element");
    let blocks = kept
        .iter()
        .map(|&k| partition.blocks[k].iter().map(|&e| position(e)).collect())
        .collect();
    Ok((p.induced(&elements), CrownPartition { blocks }))
}

/// Orbits of a permutation as blocks, each in cycle order from its smallest element.
pub fn orbit_partition(f: &OrderMap) -> CrownPartition {
    CrownPartition { blocks: f.cycles() }
}

#[derive(Clone, Debug)]
pub struct SpecialCrownRetract {
    pub subset: u64,
    pub retraction: OrderMap,
    /// The retract, positions renumbered in increasing order of `subset`.
    pub crown: Poset,
    pub partition: CrownPartition,
    pub automorphism: OrderMap,
}

/// Smallest retract of `p` that is a special generalized crown, including `p`
/// itself. Absent when `p` has the fixed point property.
pub fn find_special_crown_retract(p: &Poset, budget: &SearchBudget) -> Result<Option<SpecialCrownRetract>> {
    if p.is_empty() {
        return Err(Error::EmptyPoset);
    }
    budget.check_size(p)?;
    if has_fpp(p, budget)?.has_fpp {
        return Ok(None);
    }
    let n = p.len();
    for size in 2..=n {
        for subset in bits::subsets_of_size(n, size) {
            let q = p.induced_mask(subset);
            let Some(automorphism) = crate::search::fixed_point_free_automorphism(&q, budget)? else {
                continue;
            };
            let Some(retraction) = retraction_exists(p, subset, budget)? else {
                continue;
            };
            let partition = orbit_partition(&automorphism);
            if is_generalized_crown(&q, &partition)? {
                return Ok(Some(SpecialCrownRetract {
                    subset,
                    retraction,
                    crown: q,
                    partition,
                    automorphism,
                }));
            }
        }
    }
    Ok(None)
}

/// Removes irreducible elements one at a time, whole blocks at once, until
/// none remain. Every mate of an irreducible element must itself be
/// irreducible when its block is reached.
pub fn strip_irreducibles_keeping_crown(p: &Poset, partition: &CrownPartition) -> Result<(Poset, CrownPartition)> {
    let mut current = p.clone();
    let mut blocks = partition.blocks.clone();
    loop {
        let irreducible = current.irreducible_elements();
        let Some(&first) = irreducible.first() else {
            return Ok((current, CrownPartition { blocks }));
        };
        let bi = blocks
            .iter()
            .position(|b| b.contains(&first))
            .ok_or_else(|| Error::InvalidArgument("partition does not cover the poset".into()))?;
        let block = blocks[bi].clone();
        if let Some(&mate) = block.iter().find(|&&e| !current.is_irreducible(e)) {
            return Err(Error::OrbitNotIrreducible {
                element: current.label(first).to_string(),
                mate: current.label(mate).to_string(),
            });
        }
        // Remove the block one element at a time, re-checking irreducibility.
        let first_label = current.label(first).to_string();
        let mut labels: Vec<String> = block.iter().map(|&e| current.label(e).to_string()).collect();
        while let Some(label) = labels.pop() {
            let e = current.index_of(&label).expect("still present");
            if !current.is_irreducible(e) {
                return Err(Error::OrbitNotIrreducible {
                    element: first_label,
                    mate: label,
                });
            }
            let remaining: Vec<usize> = (0..current.len()).filter(|&i| i != e).collect();
            let next = current.induced(&remaining);
            blocks = blocks
                .into_iter()
                .map(|b| b.into_iter().filter(|&i| i != e).map(|i| if i > e { i - 1 } else { i }).collect())
                .filter(|b: &Vec<usize>| !b.is_empty())
                .collect();
            current = next;
        }
    }
}
