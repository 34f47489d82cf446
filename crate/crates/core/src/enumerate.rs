//! Isomorphism-free generation of small posets.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{self, bit};
use crate::canon::canonical_form;
use crate::error::{Error, Result};
use crate::poset::Poset;

pub const MAX_ALL_POSETS: usize = 7;
pub const MAX_RANKED: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFilter {
    pub max_size: usize,
    pub max_width: Option<usize>,
    pub ranked_only: bool,
    pub max_rank: Option<usize>,
}

impl CorpusFilter {
    pub fn accepts(&self, p: &Poset) -> bool {
        if p.is_empty() || p.len() > self.max_size {
            return false;
        }
        if let Some(w) = self.max_width {
            if p.width().map(|x| x.width).unwrap_or(0) > w {
                return false;
            }
        }
        let profile = p.rank_structure().expect("nonempty");
        if self.ranked_only && !profile.is_ranked {
            return false;
        }
        if let Some(r) = self.max_rank {
            if profile.height > r {
                return false;
            }
        }
        true
    }
}

fn dedup(candidates: Vec<Poset>) -> Vec<Poset> {
    let forms: Vec<_> = candidates.par_iter().map(canonical_form).collect();
    let mut seen = HashSet::new();
    candidates
        .into_iter()
        .zip(forms)
        .filter_map(|(p, f)| seen.insert(f).then_some(p))
        .collect()
}

fn is_down_set(p: &Poset, set: u64) -> bool {
    bits::iter(set).all(|e| p.down_set(e) & !set == 0)
}

/// Every way to add one new maximal element to `p`.
fn maximal_extensions(p: &Poset) -> Vec<Poset> {
    let n = p.len();
    let mut labels = p.labels().to_vec();
    labels.push(format!("p{n}"));
    (0..=bits::full(n))
        .filter(|&d| is_down_set(p, d))
        .map(|d| {
            let mut up: Vec<u64> = (0..n)
                .map(|i| p.up_set(i) | if bits::has(d, i) { bit(n) } else { 0 })
                .collect();
            up.push(bit(n));
            Poset::from_closed_unchecked(labels.clone(), up)
        })
        .collect()
}

/// All posets on `n` elements up to isomorphism. Each class is reached by
/// adding a maximal element to a smaller poset.
pub fn all_posets(n: usize) -> Result<Vec<Poset>> {
    if n > MAX_ALL_POSETS {
        return Err(Error::TooLarge {
            size: n,
            limit: MAX_ALL_POSETS,
        });
    }
    let mut level = vec![Poset::antichain(0, "p")];
    for _ in 0..n {
        let candidates: Vec<Poset> = level
            .par_iter()
            .flat_map_iter(maximal_extensions)
            .collect();
        level = dedup(candidates);
    }
    Ok(level)
}

/// All posets with at most `max` elements, smallest first.
pub fn all_posets_up_to(max: usize) -> Result<Vec<Poset>> {
    let mut out = Vec::new();
    for n in 1..=max {
        out.extend(all_posets(n)?);
    }
    Ok(out)
}

/// Nondecreasing sequences of `count` masks from `choices` whose union is `cover`.
fn covering_multisets(choices: &[u64], count: usize, cover: u64) -> Vec<Vec<u64>> {
    fn go(choices: &[u64], start: usize, left: usize, acc: &mut Vec<u64>, cover: u64, out: &mut Vec<Vec<u64>>) {
        if left == 0 {
            if acc.iter().fold(0, |a, &m| a | m) == cover {
                out.push(acc.clone());
            }
            return;
        }
        for i in start..choices.len() {
            acc.push(choices[i]);
            go(choices, i, left - 1, acc, cover, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(choices, 0, count, &mut Vec::new(), cover, &mut out);
    out
}

/// Adds a new top level whose elements cover the given subsets of the current
/// top level `top`.
fn add_level(p: &Poset, top: u64, covers: &[u64]) -> Poset {
    let n = p.len();
    let mut labels = p.labels().to_vec();
    labels.extend((0..covers.len()).map(|j| format!("r{n}_{j}")));
    let mut up: Vec<u64> = (0..n).map(|i| p.up_set(i)).collect();
    for (j, &c) in covers.iter().enumerate() {
        let e = n + j;
        let below = bits::iter(c).fold(0u64, |acc, t| acc | p.down_set(t));
        debug_assert!(c & !top == 0);
        for i in bits::iter(below) {
            up[i] |= bit(e);
        }
    }
    up.extend((0..covers.len()).map(|j| bit(n + j)));
    Poset::from_closed_unchecked(labels, up)
}

/// Ranked posets built level by level: every element of a new level covers a
/// nonempty set of the previous top level, and every previous top element is
/// covered. Deduplicated up to isomorphism and filtered by `filter`.
pub fn ranked_posets(filter: &CorpusFilter) -> Result<Vec<Poset>> {
    if filter.max_size > MAX_RANKED {
        return Err(Error::TooLarge {
            size: filter.max_size,
            limit: MAX_RANKED,
        });
    }
    let max_level = filter.max_width.unwrap_or(filter.max_size).min(filter.max_size);
    let width_ok = |p: &Poset| filter.max_width.is_none_or(|w| p.width().map(|x| x.width).unwrap_or(0) <= w);

    // States are ranked posets; the top level is the set of maximal elements.
    let mut frontier: Vec<(Poset, usize)> = (1..=max_level).map(|s| (Poset::antichain(s, "r0_"), 0)).collect();
    let mut out: Vec<Poset> = Vec::new();
    let mut seen = HashSet::new();
    while !frontier.is_empty() {
        let mut fresh = Vec::new();
        for (p, height) in frontier.drain(..) {
            if seen.insert(canonical_form(&p)) {
                fresh.push((p, height));
            }
        }
        out.extend(fresh.iter().map(|(p, _)| p.clone()));
        let candidates: Vec<(Poset, usize)> = fresh
            .par_iter()
            .filter(|(_, h)| filter.max_rank.is_none_or(|r| *h < r))
            .flat_map_iter(|(p, h)| {
                let top = p.maximal_elements();
                let choices: Vec<u64> = (1..=bits::full(p.len())).filter(|&m| m & !top == 0).collect();
                let room = filter.max_size - p.len();
                (1..=max_level.min(room))
                    .flat_map(|s| covering_multisets(&choices, s, top))
                    .map(|c| (add_level(p, top, &c), h + 1))
                    .filter(|(q, _)| width_ok(q))
                    .collect::<Vec<_>>()
            })
            .collect();
        frontier = candidates;
    }
    let mut result: Vec<Poset> = out.into_iter().filter(|p| filter.accepts(p)).collect();
    result.sort_by_key(Poset::len);
    Ok(result)
}

/// Posets accepted by `filter`: ranked generation when `ranked_only`, else all
/// posets up to `max_size` filtered.
pub fn corpus(filter: &CorpusFilter) -> Result<Vec<Poset>> {
    if filter.ranked_only {
        ranked_posets(filter)
    } else {
        Ok(all_posets_up_to(filter.max_size)?
            .into_iter()
            .filter(|p| filter.accepts(p))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::is_isomorphic;
    use crate::towers::{crown, four_tower};

    /// Brute force: every relation on `n` points, closed and antisymmetric,
    /// deduplicated by isomorphism.
    fn brute_posets(n: usize) -> usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
        let mut reps: Vec<Poset> = Vec::new();
        for mask in 0u64..(1 << pairs.len()) {
            let chosen: Vec<(usize, usize)> = bits::iter(mask).map(|i| pairs[i]).collect();
            let labels: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
            let Ok(p) = Poset::from_pairs(labels, &chosen) else { continue };
            if p.comparability_count() != chosen.len() {
                continue; // count each closed relation once
            }
            if !reps.iter().any(|q| is_isomorphic(q, &p).is_some()) {
                reps.push(p);
            }
        }
        reps.len()
    }

    #[test]
    fn counts_match_brute_force() {
        for n in 0..=3 {
            assert_eq!(all_posets(n).unwrap().len(), brute_posets(n), "n={n}");
        }
    }

    #[test]
    fn counts_match_known_sequence() {
        let counts: Vec<usize> = (0..=6).map(|n| all_posets(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 16, 63, 318]);
        assert!(all_posets(8).is_err());
    }

    #[test]
    fn ranked_examples() {
        let f = CorpusFilter {
            max_size: 6,
            max_width: Some(3),
            ranked_only: true,
            max_rank: None,
        };
        let ranked = ranked_posets(&f).unwrap();
        assert!(ranked.iter().any(|p| is_isomorphic(p, &crown(3).unwrap()).is_some()));
        assert!(ranked.iter().all(|p| p.is_ranked() && p.width().unwrap().width <= 3));

        let f = CorpusFilter {
            max_size: 4,
            max_width: Some(2),
            ranked_only: true,
            max_rank: None,
        };
        let small = ranked_posets(&f).unwrap();
        assert!(small.iter().any(|p| is_isomorphic(p, &crown(2).unwrap()).is_some()));
        assert!(small.iter().any(|p| is_isomorphic(p, &four_tower(1)).is_some()));
    }

    #[test]
    fn ranked_matches_filtered_all_posets() {
        for n in 1..=5 {
            let f = CorpusFilter {
                max_size: n,
                max_width: None,
                ranked_only: true,
                max_rank: None,
            };
            let mut ranked: Vec<_> = ranked_posets(&f).unwrap().iter().filter(|p| p.len() == n).map(canonical_form).collect();
            let mut expected: Vec<_> = all_posets(n).unwrap().iter().filter(|p| p.is_ranked()).map(canonical_form).collect();
            ranked.sort();
            expected.sort();
            assert_eq!(ranked, expected, "n={n}");
        }
    }

    #[test]
    fn outputs_are_pairwise_non_isomorphic() {
        let f = CorpusFilter {
            max_size: 7,
            max_width: Some(3),
            ranked_only: true,
            max_rank: Some(2),
        };
        let ps = ranked_posets(&f).unwrap();
        let forms: HashSet<_> = ps.iter().map(canonical_form).collect();
        assert_eq!(forms.len(), ps.len());
        assert!(ps.iter().all(|p| f.accepts(p)));
    }
}
