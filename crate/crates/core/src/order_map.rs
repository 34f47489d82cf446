use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bits;
use crate::poset::Poset;

/// A function between two posets, stored positionally. Search routines only
/// hand out order-preserving maps; the validators here re-check that claim
/// independently of how the map was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderMap {
    source: Arc<Poset>,
    target: Arc<Poset>,
    assignment: Vec<usize>,
}

impl OrderMap {
    pub fn new(source: Arc<Poset>, target: Arc<Poset>, assignment: Vec<usize>) -> OrderMap {
        assert_eq!(source.len(), assignment.len(), "one image per source element");
        assert!(assignment.iter().all(|&v| v < target.len()), "image out of range");
        OrderMap {
            source,
            target,
            assignment,
        }
    }

    pub fn self_map(p: Arc<Poset>, assignment: Vec<usize>) -> OrderMap {
        OrderMap::new(p.clone(), p, assignment)
    }

    pub fn identity(p: Arc<Poset>) -> OrderMap {
        let n = p.len();
        OrderMap::self_map(p, (0..n).collect())
    }

    pub fn source(&self) -> &Poset {
        &self.source
    }

    pub fn target(&self) -> &Poset {
        &self.target
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn apply(&self, i: usize) -> usize {
        self.assignment[i]
    }

    /// Image of the element labelled `label`, as a label.
    pub fn apply_label(&self, label: &str) -> Option<&str> {
        let i = self.source.index_of(label)?;
        Some(self.target.label(self.assignment[i]))
    }

    pub fn as_label_map(&self) -> BTreeMap<String, String> {
        self.assignment
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.source.label(i).to_string(), self.target.label(v).to_string()))
            .collect()
    }

    /// Checks `p ≤ q ⇒ f(p) ≤ f(q)` on every comparable pair.
    pub fn is_order_preserving(&self) -> bool {
        self.source
            .strict_pairs()
            .iter()
            .all(|&(a, b)| self.target.leq(self.assignment[a], self.assignment[b]))
    }

    fn is_endo(&self) -> bool {
        Arc::ptr_eq(&self.source, &self.target) || self.source == self.target
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        if !self.is_endo() {
            return Vec::new();
        }
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == i)
            .collect()
    }

    pub fn is_fixed_point_free(&self) -> bool {
        self.is_endo() && self.fixed_points().is_empty()
    }

    pub fn is_bijective(&self) -> bool {
        if self.source.len() != self.target.len() {
            return false;
        }
        let mut hit = 0u64;
        for &v in &self.assignment {
            hit |= bits::bit(v);
        }
        hit == self.target.all()
    }

    /// Bijective with both directions order-preserving.
    pub fn is_isomorphism(&self) -> bool {
        if !self.is_bijective() || !self.is_order_preserving() {
            return false;
        }
        let n = self.source.len();
        (0..n).all(|a| {
            (0..n).all(|b| {
                self.target.leq(self.assignment[a], self.assignment[b]) == self.source.leq(a, b)
            })
        })
    }

    pub fn is_automorphism(&self) -> bool {
        self.is_endo() && self.is_isomorphism()
    }

    pub fn is_idempotent(&self) -> bool {
        self.is_endo()
            && self
                .assignment
                .iter()
                .all(|&v| self.assignment[v] == v)
    }

    pub fn image(&self) -> u64 {
        self.assignment.iter().fold(0, |acc, &v| acc | bits::bit(v))
    }

    /// True when this self-map is an order-preserving retraction of its source
    /// onto exactly `subset`: it fixes the subset pointwise and maps into it.
    pub fn is_retraction_onto(&self, subset: u64) -> bool {
        self.is_endo()
            && self.is_order_preserving()
            && bits::iter(subset).all(|q| self.assignment[q] == q)
            && self.image() == subset
    }

    /// Orbits of a permutation, each listed along its cycle starting from the
    /// smallest position.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.assignment.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut at = self.assignment[start];
            while at != start && !seen[at] {
                seen[at] = true;
                cycle.push(at);
                at = self.assignment[at];
            }
            out.push(cycle);
        }
        out
    }

    pub fn compose(&self, then: &OrderMap) -> OrderMap {
        assert!(self.target.as_ref() == then.source.as_ref());
        OrderMap::new(
            self.source.clone(),
            then.target.clone(),
            self.assignment.iter().map(|&v| then.assignment[v]).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::towers::crown;

    #[test]
    fn crown_rotation_validates() {
        let c = Arc::new(crown(4).unwrap());
        // x_i -> x_{i+1}, y_i -> y_{i+1}
        let f = OrderMap::self_map(c.clone(), vec![1, 2, 3, 0, 5, 6, 7, 4]);
        assert!(f.is_automorphism());
        assert!(f.is_fixed_point_free());
        assert_eq!(f.cycles().len(), 2);
        let g = OrderMap::self_map(c, vec![4, 4, 4, 4, 0, 0, 0, 0]);
        assert!(!g.is_order_preserving());
    }

    #[test]
    fn identity_is_retraction() {
        let c = Arc::new(crown(2).unwrap());
        let id = OrderMap::identity(c.clone());
        assert!(id.is_retraction_onto(c.all()));
        assert!(id.is_idempotent());
        assert_eq!(id.compose(&id), id);
    }
}
