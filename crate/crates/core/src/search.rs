//! Exhaustive searches over order-preserving maps.
//!
//! Every search here is a [`MapSearch`]: backtracking over the source poset in
//! a fixed linear extension, with one candidate set per element. Assigning
//! `f(p) = v` narrows every later element above `p` to the up-set of `v` and
//! every later element below `p` to the down-set of `v`, so each complete
//! assignment is order-preserving by construction.
//!
//! Node budgets are global across a search. When root branches run on several
//! workers each branch keeps its own counter and the counts are folded in
//! branch order afterwards, which reproduces the sequential outcome exactly.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bits::{self, bit, MAX_ELEMENTS};
use crate::canon;
use crate::error::{Error, Result};
use crate::order_map::OrderMap;
use crate::poset::Poset;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Backtracking nodes allowed per search call.
    pub max_nodes: u64,
    /// Largest input accepted by searches that scan subsets.
    pub max_elements: usize,
    /// Number of workers for root-branch splitting; 0 and 1 mean sequential.
    pub parallel_fanout: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: 50_000_000,
            max_elements: 24,
            parallel_fanout: 1,
        }
    }
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        SearchBudget {
            max_nodes: u64::MAX,
            max_elements: MAX_ELEMENTS,
            parallel_fanout: 1,
        }
    }

    pub fn with_nodes(max_nodes: u64) -> Self {
        SearchBudget {
            max_nodes,
            ..SearchBudget::default()
        }
    }

    fn exhausted(&self) -> Error {
        Error::BudgetExhausted {
            limit: self.max_nodes,
        }
    }

    pub(crate) fn check_size(&self, p: &Poset) -> Result<()> {
        if p.len() > self.max_elements {
            Err(Error::TooLarge {
                size: p.len(),
                limit: self.max_elements,
            })
        } else {
            Ok(())
        }
    }
}

/// Backtracking search for maps `source → target` with per-element candidate
/// sets.
#[derive(Clone, Debug)]
pub struct MapSearch<'a> {
    source: &'a Poset,
    target: &'a Poset,
    domains: Vec<u64>,
    order: Vec<usize>,
    injective: bool,
    reflect: bool,
}

enum Flow {
    Continue,
    Stop,
    Exhausted,
}

struct Run<'s, 'a, F> {
    search: &'s MapSearch<'a>,
    max_nodes: u64,
    nodes: u64,
    visit: F,
}

impl<'a> MapSearch<'a> {
    pub fn new(source: &'a Poset, target: &'a Poset, domains: Vec<u64>) -> Self {
        assert_eq!(domains.len(), source.len());
        MapSearch {
            source,
            target,
            domains,
            order: source.linear_extension(),
            injective: false,
            reflect: false,
        }
    }

    /// Restricts to bijections that also preserve incomparability. For finite
    /// posets of equal size these are exactly the isomorphisms.
    pub fn bijective(mut self) -> Self {
        self.injective = true;
        self.reflect = true;
        self
    }

    /// First accepted solution in search order.
    pub fn first<A>(&self, budget: &SearchBudget, accept: A) -> Result<Option<Vec<usize>>>
    where
        A: Fn(&[usize]) -> bool + Sync,
    {
        let branches = self.branches(budget, |branch, cap| {
            let mut found = None;
            let (flow, nodes) = branch.run(cap, |a: &[usize]| {
                if accept(a) {
                    found = Some(a.to_vec());
                    true
                } else {
                    false
                }
            });
            (flow, nodes, found)
        });
        let mut total: u64 = 0;
        for (flow, nodes, found) in branches {
            total = total.saturating_add(nodes);
            if total > budget.max_nodes || matches!(flow, Flow::Exhausted) {
                return Err(budget.exhausted());
            }
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    /// Every solution, in search order.
    pub fn all(&self, budget: &SearchBudget) -> Result<Vec<Vec<usize>>> {
        let branches = self.branches(budget, |branch, cap| {
            let mut out = Vec::new();
            let (flow, nodes) = branch.run(cap, |a: &[usize]| {
                out.push(a.to_vec());
                false
            });
            (flow, nodes, out)
        });
        let mut total: u64 = 0;
        let mut out = Vec::new();
        for (flow, nodes, found) in branches {
            total = total.saturating_add(nodes);
            if total > budget.max_nodes || matches!(flow, Flow::Exhausted) {
                return Err(budget.exhausted());
            }
            out.extend(found);
        }
        Ok(out)
    }

    /// Splits on the candidates of the first variable and runs `job` on each
    /// branch, in parallel when the budget allows. Results are in branch order.
    fn branches<T, J>(&self, budget: &SearchBudget, job: J) -> Vec<(Flow, u64, T)>
    where
        T: Send,
        J: Fn(&MapSearch<'a>, u64) -> (Flow, u64, T) + Sync,
    {
        if self.order.is_empty() || budget.parallel_fanout <= 1 {
            return vec![job(self, budget.max_nodes)];
        }
        let root = self.order[0];
        let candidates: Vec<usize> = bits::iter(self.domains[root]).collect();
        let make = |c: usize| {
            let mut sub = self.clone();
            sub.domains[root] = bit(c);
            sub
        };
        candidates
            .par_iter()
            .map(|&c| job(&make(c), budget.max_nodes))
            .collect()
    }

    fn run<F: FnMut(&[usize]) -> bool>(&self, max_nodes: u64, visit: F) -> (Flow, u64) {
        let n = self.source.len();
        let mut run = Run {
            search: self,
            max_nodes,
            nodes: 0,
            visit,
        };
        let mut frames = vec![vec![0u64; n]; n + 1];
        frames[0].copy_from_slice(&self.domains);
        if frames[0].contains(&0) {
            return (Flow::Continue, 0);
        }
        let flow = run.dfs(0, &mut frames);
        (flow, run.nodes)
    }
}

impl<F: FnMut(&[usize]) -> bool> Run<'_, '_, F> {
    fn dfs(&mut self, depth: usize, frames: &mut [Vec<u64>]) -> Flow {
        let s = self.search;
        let n = s.source.len();
        if depth == n {
            let assignment: Vec<usize> = frames[depth]
                .iter()
                .map(|&d| d.trailing_zeros() as usize)
                .collect();
            return if (self.visit)(&assignment) {
                Flow::Stop
            } else {
                Flow::Continue
            };
        }
        let var = s.order[depth];
        let choices = frames[depth][var];
        for v in bits::iter(choices) {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Flow::Exhausted;
            }
            let (head, tail) = frames.split_at_mut(depth + 1);
            let next = &mut tail[0];
            next.copy_from_slice(&head[depth]);
            next[var] = bit(v);
            let above = s.target.up_set(v);
            let below = s.target.down_set(v);
            let mut dead = false;
            for &q in &s.order[depth + 1..] {
                let d = &mut next[q];
                if s.source.lt(var, q) {
                    *d &= above;
                } else if s.source.lt(q, var) {
                    *d &= below;
                } else if s.reflect {
                    *d &= !(above | below);
                }
                if s.injective {
                    *d &= !bit(v);
                }
                if *d == 0 {
                    dead = true;
                    break;
                }
            }
            if dead {
                continue;
            }
            match self.dfs(depth + 1, frames) {
                Flow::Continue => {}
                other => return other,
            }
        }
        Flow::Continue
    }
}

/// Outcome of a fixed point property decision.
#[derive(Clone, Debug)]
pub struct FppVerdict {
    pub has_fpp: bool,
    /// A fixed-point-free order-preserving self-map when `has_fpp` is false.
    pub witness: Option<OrderMap>,
}

pub fn has_fpp(p: &Poset, budget: &SearchBudget) -> Result<FppVerdict> {
    if p.is_empty() {
        return Err(Error::EmptyPoset);
    }
    budget.check_size(p)?;
    let all = p.all();
    let domains: Vec<u64> = (0..p.len()).map(|i| all & !bit(i)).collect();
    let found = MapSearch::new(p, p, domains).first(budget, |_| true)?;
    Ok(match found {
        None => FppVerdict {
            has_fpp: true,
            witness: None,
        },
        Some(a) => FppVerdict {
            has_fpp: false,
            witness: Some(OrderMap::self_map(Arc::new(p.clone()), a)),
        },
    })
}

fn retraction_domains(p: &Poset, subset: u64) -> Result<Vec<u64>> {
    if subset == 0 {
        return Err(Error::InvalidArgument("retract subset must be nonempty".into()));
    }
    if subset & !p.all() != 0 {
        return Err(Error::InvalidArgument("retract subset outside the poset".into()));
    }
    Ok((0..p.len())
        .map(|i| if bits::has(subset, i) { bit(i) } else { subset })
        .collect())
}

/// An order-preserving self-map of `p` fixing `subset` pointwise with image
/// `subset`, if one exists.
pub fn retraction_exists(p: &Poset, subset: u64, budget: &SearchBudget) -> Result<Option<OrderMap>> {
    let domains = retraction_domains(p, subset)?;
    let found = MapSearch::new(p, p, domains).first(budget, |_| true)?;
    Ok(found.map(|a| OrderMap::self_map(Arc::new(p.clone()), a)))
}

pub fn enumerate_retractions(p: &Poset, subset: u64, budget: &SearchBudget) -> Result<Vec<OrderMap>> {
    let domains = retraction_domains(p, subset)?;
    let shared = Arc::new(p.clone());
    Ok(MapSearch::new(p, p, domains)
        .all(budget)?
        .into_iter()
        .map(|a| OrderMap::self_map(shared.clone(), a))
        .collect())
}

fn automorphism_search<'a>(p: &'a Poset, fixed_point_free: bool) -> MapSearch<'a> {
    let colors = canon::orbit_colors(p);
    let mut domains = canon::same_color_domains(&colors);
    if fixed_point_free {
        for (i, d) in domains.iter_mut().enumerate() {
            *d &= !bit(i);
        }
    }
    MapSearch::new(p, p, domains).bijective()
}

pub fn automorphisms(p: &Poset, budget: &SearchBudget) -> Result<Vec<OrderMap>> {
    budget.check_size(p)?;
    let shared = Arc::new(p.clone());
    Ok(automorphism_search(p, false)
        .all(budget)?
        .into_iter()
        .map(|a| OrderMap::self_map(shared.clone(), a))
        .collect())
}

/// First fixed-point-free automorphism satisfying `accept`, in search order.
pub fn fixed_point_free_automorphism_where<A>(
    p: &Poset,
    budget: &SearchBudget,
    accept: A,
) -> Result<Option<OrderMap>>
where
    A: Fn(&[usize]) -> bool + Sync,
{
    budget.check_size(p)?;
    if p.is_empty() || canon::singleton_color_exists(&canon::orbit_colors(p)) {
        return Ok(None);
    }
    let found = automorphism_search(p, true).first(budget, accept)?;
    Ok(found.map(|a| OrderMap::self_map(Arc::new(p.clone()), a)))
}

pub fn fixed_point_free_automorphism(p: &Poset, budget: &SearchBudget) -> Result<Option<OrderMap>> {
    fixed_point_free_automorphism_where(p, budget, |_| true)
}

pub fn is_automorphic(p: &Poset, budget: &SearchBudget) -> Result<bool> {
    Ok(fixed_point_free_automorphism(p, budget)?.is_some())
}

/// A proper retract found by [`proper_retract_subsets`].
#[derive(Clone, Debug)]
pub struct RetractWitness {
    pub subset: u64,
    pub retraction: OrderMap,
}

/// Iterator over proper nonempty retract subsets, smallest first, numeric
/// order within a size. The filter runs before the retraction search.
pub struct RetractSubsets<'a, F> {
    poset: &'a Poset,
    budget: SearchBudget,
    filter: F,
    size: usize,
    current: Box<dyn Iterator<Item = u64> + 'a>,
    failed: bool,
}

impl<F: FnMut(&Poset, u64) -> Result<bool>> Iterator for RetractSubsets<'_, F> {
    type Item = Result<RetractWitness>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let n = self.poset.len();
        loop {
            let subset = match self.current.next() {
                Some(s) => s,
                None => {
                    self.size += 1;
                    if self.size >= n {
                        return None;
                    }
                    self.current = Box::new(bits::subsets_of_size(n, self.size));
                    continue;
                }
            };
            let outcome = (self.filter)(self.poset, subset).and_then(|keep| {
                if keep {
                    retraction_exists(self.poset, subset, &self.budget)
                } else {
                    Ok(None)
                }
            });
            match outcome {
                Ok(Some(retraction)) => return Some(Ok(RetractWitness { subset, retraction })),
                Ok(None) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

pub fn proper_retract_subsets<'a, F>(
    p: &'a Poset,
    budget: &SearchBudget,
    filter: F,
) -> Result<RetractSubsets<'a, F>>
where
    F: FnMut(&Poset, u64) -> Result<bool>,
{
    budget.check_size(p)?;
    Ok(RetractSubsets {
        poset: p,
        budget: *budget,
        filter,
        size: 1,
        current: Box::new(bits::subsets_of_size(p.len(), 1)),
        failed: p.len() <= 1,
    })
}

/// First proper retract whose induced subposet is automorphic.
pub fn automorphic_proper_retract(p: &Poset, budget: &SearchBudget) -> Result<Option<RetractWitness>> {
    let b = *budget;
    let mut scan = proper_retract_subsets(p, budget, move |q: &Poset, s: u64| {
        if s.count_ones() < 2 {
            return Ok(false);
        }
        is_automorphic(&q.induced_mask(s), &b)
    })?;
    scan.next().transpose()
}

pub fn is_minimal_automorphic(p: &Poset, budget: &SearchBudget) -> Result<bool> {
    budget.check_size(p)?;
    if !is_automorphic(p, budget)? {
        return Ok(false);
    }
    Ok(automorphic_proper_retract(p, budget)?.is_none())
}

/// Counts of all order-preserving self-maps, by unpruned enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelfMapCount {
    pub total: u64,
    pub fixed_point_free: u64,
}

pub const SELF_MAP_COUNT_LIMIT: usize = 8;

pub fn count_order_preserving_self_maps(p: &Poset) -> Result<SelfMapCount> {
    let n = p.len();
    if n > SELF_MAP_COUNT_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: SELF_MAP_COUNT_LIMIT,
        });
    }
    let pairs = p.strict_pairs();
    let mut f = vec![0usize; n];
    let mut count = SelfMapCount {
        total: 0,
        fixed_point_free: 0,
    };
    loop {
        if pairs.iter().all(|&(a, b)| p.leq(f[a], f[b])) {
            count.total += 1;
            if (0..n).all(|i| f[i] != i) {
                count.fixed_point_free += 1;
            }
        }
        // Odometer over all n^n functions.
        let mut k = 0;
        loop {
            if k == n {
                return Ok(count);
            }
            f[k] += 1;
            if f[k] < n {
                break;
            }
            f[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::from_indices;
    use crate::towers::{crown, six_stack};

    fn fence() -> Poset {
        Poset::new(&["a", "b", "c"], &[("a", "b"), ("c", "b")]).unwrap()
    }

    fn b() -> SearchBudget {
        SearchBudget::default()
    }

    #[test]
    fn fpp_examples() {
        assert!(has_fpp(&Poset::chain(4), &b()).unwrap().has_fpp);
        let v = has_fpp(&crown(2).unwrap(), &b()).unwrap();
        assert!(!v.has_fpp);
        let w = v.witness.unwrap();
        assert!(w.is_order_preserving() && w.is_fixed_point_free());
        assert!(has_fpp(&fence(), &b()).unwrap().has_fpp);
        // Oracle: no fixed-point-free map among all 27 self-maps.
        assert_eq!(count_order_preserving_self_maps(&fence()).unwrap().fixed_point_free, 0);
    }

    #[test]
    fn retraction_examples() {
        let c6 = crown(3).unwrap();
        let s = from_indices(&c6.indices_of(&["x0", "y0"]).unwrap());
        let f = retraction_exists(&c6, s, &b()).unwrap().unwrap();
        assert!(f.is_retraction_onto(s));
        // The map from the worked example: x_i -> x0, y_i -> y0.
        let shown = OrderMap::self_map(Arc::new(c6.clone()), vec![0, 0, 0, 3, 3, 3]);
        assert!(shown.is_retraction_onto(s));

        let all = c6.all();
        let id = retraction_exists(&c6, all, &b()).unwrap().unwrap();
        assert_eq!(id.assignment(), &[0, 1, 2, 3, 4, 5]);

        let chain = Poset::chain(2);
        assert_eq!(enumerate_retractions(&chain, bit(1), &b()).unwrap().len(), 1);
        let c4 = crown(2).unwrap();
        assert_eq!(enumerate_retractions(&c4, bit(0), &b()).unwrap().len(), 1);
        assert!(retraction_exists(&c4, 0, &b()).is_err());
    }

    #[test]
    fn rank_three_stack_retraction_is_found() {
        let p = six_stack(3).unwrap();
        let q = from_indices(&p.indices_of(&["x0", "z0", "y1", "y2", "x3", "z3"]).unwrap());
        assert!(retraction_exists(&p, q, &b()).unwrap().is_some());
    }

    /// Brute force over all bijections.
    fn brute_automorphism_count(p: &Poset) -> usize {
        fn permute(k: usize, perm: &mut Vec<usize>, p: &Poset, count: &mut usize) {
            let n = perm.len();
            if k == n {
                let ok = (0..n).all(|a| (0..n).all(|b| p.leq(a, b) == p.leq(perm[a], perm[b])));
                if ok {
                    *count += 1;
                }
                return;
            }
            for i in k..n {
                perm.swap(k, i);
                permute(k + 1, perm, p, count);
                perm.swap(k, i);
            }
        }
        let mut count = 0;
        permute(0, &mut (0..p.len()).collect(), p, &mut count);
        count
    }

    #[test]
    fn automorphism_counts() {
        // C_4 is complete bipartite 2+2: swaps on each side, 4 in total.
        let c4 = crown(2).unwrap();
        assert_eq!(brute_automorphism_count(&c4), 4);
        assert_eq!(automorphisms(&c4, &b()).unwrap().len(), 4);
        assert_eq!(automorphisms(&Poset::chain(3), &b()).unwrap().len(), 1);
        assert_eq!(automorphisms(&Poset::antichain(2, "a"), &b()).unwrap().len(), 2);
        let c8 = crown(4).unwrap();
        assert_eq!(automorphisms(&c8, &b()).unwrap().len(), brute_automorphism_count(&c8));
        for f in automorphisms(&c8, &b()).unwrap() {
            assert!(f.is_automorphism());
        }
    }

    #[test]
    fn fpf_automorphism_examples() {
        for n in 1..=3 {
            let f = fixed_point_free_automorphism(&six_stack(n).unwrap(), &b()).unwrap().unwrap();
            assert!(f.is_automorphism() && f.is_fixed_point_free());
        }
        let capped = Poset::ordinal_sum(&[crown(3).unwrap(), Poset::antichain(1, "t")]).unwrap();
        assert!(fixed_point_free_automorphism(&capped, &b()).unwrap().is_none());
        assert!(fixed_point_free_automorphism(&crown(4).unwrap(), &b()).unwrap().is_some());
    }

    #[test]
    fn proper_retracts() {
        let chain = Poset::chain(2);
        let found: Vec<u64> = proper_retract_subsets(&chain, &b(), |_, _| Ok(true))
            .unwrap()
            .map(|w| w.unwrap().subset)
            .collect();
        assert_eq!(found, vec![0b01, 0b10]);

        let c4 = crown(2).unwrap();
        let bb = b();
        let automorphic: Vec<u64> = proper_retract_subsets(&c4, &bb, |q, s| {
            is_automorphic(&q.induced_mask(s), &bb)
        })
        .unwrap()
        .map(|w| w.unwrap().subset)
        .collect();
        assert!(automorphic.is_empty());

        let p = six_stack(3).unwrap();
        let q = from_indices(&p.indices_of(&["x0", "z0", "y1", "y2", "x3", "z3"]).unwrap());
        let mut scan = proper_retract_subsets(&p, &b(), |_, s| Ok(s == q)).unwrap();
        assert_eq!(scan.next().unwrap().unwrap().subset, q);
    }

    #[test]
    fn minimal_automorphic_examples() {
        assert!(is_minimal_automorphic(&crown(2).unwrap(), &b()).unwrap());
        assert!(is_minimal_automorphic(&six_stack(1).unwrap(), &b()).unwrap());
        assert!(!is_minimal_automorphic(&six_stack(3).unwrap(), &b()).unwrap());
        assert!(!is_minimal_automorphic(&Poset::chain(3), &b()).unwrap());
    }

    #[test]
    fn self_map_counts() {
        let anti = count_order_preserving_self_maps(&Poset::antichain(2, "a")).unwrap();
        assert_eq!((anti.total, anti.fixed_point_free), (4, 1));
        let chain = count_order_preserving_self_maps(&Poset::chain(2)).unwrap();
        assert_eq!((chain.total, chain.fixed_point_free), (3, 0));
        let one = count_order_preserving_self_maps(&Poset::chain(1)).unwrap();
        assert_eq!((one.total, one.fixed_point_free), (1, 0));
        assert!(count_order_preserving_self_maps(&Poset::chain(9)).is_err());
    }

    #[test]
    fn budget_exhaustion_is_distinct() {
        let p = six_stack(3).unwrap();
        let tiny = SearchBudget::with_nodes(3);
        assert!(matches!(has_fpp(&p, &tiny), Err(Error::BudgetExhausted { .. })));
    }

    #[test]
    fn parallel_matches_sequential() {
        let p = six_stack(3).unwrap();
        let q = from_indices(&p.indices_of(&["x0", "z0", "y1", "y2", "x3", "z3"]).unwrap());
        let seq = enumerate_retractions(&p, q, &b()).unwrap();
        let par_budget = SearchBudget {
            parallel_fanout: 4,
            ..b()
        };
        let par = enumerate_retractions(&p, q, &par_budget).unwrap();
        assert_eq!(seq, par);
        let a = has_fpp(&crown(4).unwrap(), &b()).unwrap().witness;
        let c = has_fpp(&crown(4).unwrap(), &par_budget).unwrap().witness;
        assert_eq!(a, c);
        for nodes in [1, 5, 10, 40] {
            let s = has_fpp(&p, &SearchBudget::with_nodes(nodes)).map(|v| v.witness);
            let t = has_fpp(&p, &SearchBudget { max_nodes: nodes, ..par_budget }).map(|v| v.witness);
            assert_eq!(s, t);
        }
    }
}
