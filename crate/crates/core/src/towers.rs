//! Forbidden-retract families: crowns, 4-towers, 6-stacks and 6-towers,
//! admissible 8-stacks and 8-towers, plus the bipartite layer catalog they are
//! assembled from.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::bits::{self, bit, has};
use crate::canon::{canonical_form, is_isomorphic, CanonicalForm};
use crate::error::{Error, Result, StackDefect};
use crate::order_map::OrderMap;
use crate::poset::Poset;
use crate::search::{fixed_point_free_automorphism, SearchBudget};

/// The crown `C_{2n}`: `x_i < y_i` and `x_i < y_{i-1}`, indices mod `n`.
/// Positions: `x0..x{n-1}` then `y0..y{n-1}`.
pub fn crown(n: usize) -> Result<Poset> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("crown needs n >= 2, got {n}")));
    }
    let mut labels: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    labels.extend((0..n).map(|i| format!("y{i}")));
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| [(i, n + i), (i, n + (i + n - 1) % n)])
        .collect();
    Poset::from_pairs(labels, &pairs)
}

/// Ordinal sum of `r + 1` two-element antichains; level `i` is `{a_i, b_i}`.
pub fn four_tower(r: usize) -> Poset {
    let labels: Vec<String> = (0..=r)
        .flat_map(|i| [format!("a{i}"), format!("b{i}")])
        .collect();
    let n = labels.len();
    let up = (0..n)
        .map(|i| {
            let level_end = (i / 2 + 1) * 2;
            bit(i) | (bits::full(n) & !bits::full(level_end))
        })
        .collect();
    Poset::from_closed_unchecked(labels, up)
}

/// The 6-stack of rank `n`: levels `{x_i, y_i, z_i}` where `x_{i+1}` covers
/// `x_i, y_i`, `y_{i+1}` covers `x_i, z_i` and `z_{i+1}` covers `y_i, z_i`.
/// Position of `x_i, y_i, z_i` is `3i, 3i+1, 3i+2`.
pub fn six_stack(n: usize) -> Result<Poset> {
    if n < 1 {
        return Err(Error::InvalidArgument("6-stack needs rank >= 1".into()));
    }
    let labels: Vec<String> = (0..=n)
        .flat_map(|i| [format!("x{i}"), format!("y{i}"), format!("z{i}")])
        .collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        let (lo, hi) = (3 * i, 3 * (i + 1));
        pairs.extend([
            (lo, hi),
            (lo + 1, hi),
            (lo, hi + 1),
            (lo + 2, hi + 1),
            (lo + 1, hi + 2),
            (lo + 2, hi + 2),
        ]);
    }
    Poset::from_pairs(labels, &pairs)
}

/// `x_i < y_j` iff `i ≠ j` on four plus four elements.
pub fn k44bar() -> Poset {
    let mut labels: Vec<String> = (0..4).map(|i| format!("x{i}")).collect();
    labels.extend((0..4).map(|i| format!("y{i}")));
    let pairs: Vec<(usize, usize)> = (0..4)
        .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, 4 + j)))
        .collect();
    Poset::from_pairs(labels, &pairs).expect("valid")
}

/// Cycle type of a fixed-point-free permutation of one rank level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CycleType {
    #[serde(rename = "(2)")]
    Two,
    #[serde(rename = "(3)")]
    Three,
    #[serde(rename = "(4)")]
    Four,
    #[serde(rename = "(2)(2)")]
    TwoTwo,
}

impl CycleType {
    pub fn level_size(self) -> usize {
        match self {
            CycleType::Two => 2,
            CycleType::Three => 3,
            CycleType::Four | CycleType::TwoTwo => 4,
        }
    }

    /// The representative permutation: cycle left to right, or swap the two
    /// leftmost and the two rightmost.
    pub fn permutation(self) -> Vec<usize> {
        match self {
            CycleType::Two => vec![1, 0],
            CycleType::Three => vec![1, 2, 0],
            CycleType::Four => vec![1, 2, 3, 0],
            CycleType::TwoTwo => vec![1, 0, 3, 2],
        }
    }

    /// Cycle type of a fixed-point-free permutation given by cycle lengths.
    pub fn from_cycle_lengths(lengths: &[usize]) -> Option<CycleType> {
        let mut l = lengths.to_vec();
        l.sort_unstable();
        match l.as_slice() {
            [2] => Some(CycleType::Two),
            [3] => Some(CycleType::Three),
            [4] => Some(CycleType::Four),
            [2, 2] => Some(CycleType::TwoTwo),
            _ => None,
        }
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleType::Two => "(2)",
            CycleType::Three => "(3)",
            CycleType::Four => "(4)",
            CycleType::TwoTwo => "(2)(2)",
        })
    }
}

impl FromStr for CycleType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "(2)" | "2" => Ok(CycleType::Two),
            "(3)" | "3" => Ok(CycleType::Three),
            "(4)" | "4" => Ok(CycleType::Four),
            "(2)(2)" | "22" | "2,2" => Ok(CycleType::TwoTwo),
            other => Err(Error::InvalidArgument(format!("unknown cycle type `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LayerName {
    #[serde(rename = "C_8")]
    C8,
    #[serde(rename = "C_4+C_4")]
    C4PlusC4,
    #[serde(rename = "K44bar")]
    K44Bar,
    #[serde(rename = "Z_1")]
    Z1,
    #[serde(rename = "Z_1_dual")]
    Z1Dual,
    #[serde(rename = "Z_2")]
    Z2,
    #[serde(rename = "Z_3")]
    Z3,
    #[serde(rename = "Z_4")]
    Z4,
    #[serde(rename = "Z_5")]
    Z5,
    #[serde(rename = "C_6")]
    C6,
    #[serde(rename = "unnamed")]
    Unnamed,
}

impl LayerName {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerName::C8 => "C_8",
            LayerName::C4PlusC4 => "C_4+C_4",
            LayerName::K44Bar => "K44bar",
            LayerName::Z1 => "Z_1",
            LayerName::Z1Dual => "Z_1_dual",
            LayerName::Z2 => "Z_2",
            LayerName::Z3 => "Z_3",
            LayerName::Z4 => "Z_4",
            LayerName::Z5 => "Z_5",
            LayerName::C6 => "C_6",
            LayerName::Unnamed => "unnamed",
        }
    }
}

impl fmt::Display for LayerName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One isomorphism class of bipartite layer admitting a fixed-point-free
/// automorphism with the stated cycle types on its two levels.
#[derive(Clone, Debug)]
pub struct LayerCatalogEntry {
    /// Positions `b0..` (minimal) then `t0..` (maximal).
    pub layer: Poset,
    pub bottom_type: CycleType,
    pub top_type: CycleType,
    pub name: LayerName,
    /// `(σ_bottom, σ_top)` as permutations of level positions.
    pub witness_pair: (Vec<usize>, Vec<usize>),
}

impl LayerCatalogEntry {
    /// The witness pair as one automorphism of `layer`.
    pub fn witness(&self) -> OrderMap {
        let m = self.witness_pair.0.len();
        let mut a: Vec<usize> = self.witness_pair.0.clone();
        a.extend(self.witness_pair.1.iter().map(|&t| m + t));
        OrderMap::self_map(Arc::new(self.layer.clone()), a)
    }
}

/// Bipartite layer on `m` bottoms and `k` tops from a relation mask with bit
/// `b * k + t` meaning `b < t`.
pub fn layer_from_mask(m: usize, k: usize, mask: u64) -> Poset {
    let mut labels: Vec<String> = (0..m).map(|i| format!("b{i}")).collect();
    labels.extend((0..k).map(|i| format!("t{i}")));
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|b| (0..k).filter(move |&t| has(mask, b * k + t)).map(move |t| (b, m + t)))
        .collect();
    Poset::from_pairs(labels, &pairs).expect("bipartite relation is a poset")
}

fn invariant_under(mask: u64, m: usize, k: usize, sb: &[usize], st: &[usize]) -> bool {
    (0..m).all(|b| (0..k).all(|t| has(mask, b * k + t) == has(mask, sb[b] * k + st[t])))
}

/// Labelled layers first, then one representative per isomorphism class in
/// first-seen order.
fn raw_layers(bottom: CycleType, top: CycleType) -> Vec<(Poset, CanonicalForm)> {
    let (m, k) = (bottom.level_size(), top.level_size());
    let (sb, st) = (bottom.permutation(), top.permutation());
    let complete = bits::full(m * k);
    let mut seen: HashMap<CanonicalForm, ()> = HashMap::new();
    let mut out = Vec::new();
    for mask in 0..=complete {
        if mask == complete {
            continue;
        }
        let bottoms_ok = (0..m).all(|b| (mask >> (b * k) & bits::full(k)).count_ones() >= 2);
        let tops_ok = (0..k).all(|t| (0..m).filter(|&b| has(mask, b * k + t)).count() >= 2);
        if !bottoms_ok || !tops_ok || !invariant_under(mask, m, k, &sb, &st) {
            continue;
        }
        let layer = layer_from_mask(m, k, mask);
        debug_assert!(layer.irreducible_elements().is_empty());
        let form = canonical_form(&layer);
        if seen.insert(form.clone(), ()).is_none() {
            out.push((layer, form));
        }
    }
    out
}

fn degree_profile(p: &Poset) -> (Vec<u32>, Vec<u32>) {
    let mins = p.minimal_elements();
    let mut low: Vec<u32> = bits::iter(mins).map(|b| p.upper_covers(b).count_ones()).collect();
    let mut high: Vec<u32> = bits::iter(p.all() & !mins)
        .map(|t| p.lower_covers(t).count_ones())
        .collect();
    low.sort_unstable();
    high.sort_unstable();
    (low, high)
}

/// Names a 4+4 layer by its degree signature. `None` marks the two-way
/// ambiguity between `Z_2` and `Z_3`.
fn name_by_signature(p: &Poset) -> Option<LayerName> {
    let (low, high) = degree_profile(p);
    let (low, high) = (low.as_slice(), high.as_slice());
    Some(match (low, high) {
        ([2, 2, 2, 2], [2, 2, 2, 2]) if p.components().len() == 1 => LayerName::C8,
        ([2, 2, 2, 2], [2, 2, 2, 2]) => LayerName::C4PlusC4,
        ([3, 3, 3, 3], [3, 3, 3, 3]) => LayerName::K44Bar,
        ([3, 3, 3, 3], [2, 2, 4, 4]) => LayerName::Z1,
        ([2, 2, 4, 4], [3, 3, 3, 3]) => LayerName::Z1Dual,
        ([2, 2, 3, 3], [2, 2, 3, 3]) => return None,
        ([2, 2, 4, 4], [2, 2, 4, 4]) => LayerName::Z4,
        ([3, 3, 4, 4], [3, 3, 4, 4]) => LayerName::Z5,
        _ => LayerName::Unnamed,
    })
}

const EIGHT_TYPES: [CycleType; 2] = [CycleType::Four, CycleType::TwoTwo];

/// Every 4+4 layer class over all four type pairs, named. Within the `Z_2`/`Z_3`
/// pair the lexicographically least canonical form is `Z_2`.
fn named_layers() -> &'static BTreeMap<CanonicalForm, (LayerName, Poset)> {
    static CATALOG: OnceLock<BTreeMap<CanonicalForm, (LayerName, Poset)>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let mut classes: BTreeMap<CanonicalForm, Poset> = BTreeMap::new();
        for b in EIGHT_TYPES {
            for t in EIGHT_TYPES {
                for (layer, form) in raw_layers(b, t) {
                    classes.entry(form).or_insert(layer);
                }
            }
        }
        let mut ambiguous = 0;
        classes
            .into_iter()
            .map(|(form, layer)| {
                let name = name_by_signature(&layer).unwrap_or_else(|| {
                    ambiguous += 1;
                    if ambiguous == 1 {
                        LayerName::Z2
                    } else if ambiguous == 2 {
                        LayerName::Z3
                    } else {
                        LayerName::Unnamed
                    }
                });
                (form, (name, layer))
            })
            .collect()
    })
}

/// The representative layer for a name, if the name belongs to the 4+4 catalog.
pub fn named_layer(name: LayerName) -> Option<Poset> {
    named_layers()
        .values()
        .find(|(n, _)| *n == name)
        .map(|(_, p)| p.clone())
}

/// Name of a bipartite layer up to isomorphism.
pub fn layer_name(p: &Poset) -> LayerName {
    if p.len() == 8 {
        if let Some((name, _)) = named_layers().get(&canonical_form(p)) {
            return *name;
        }
    }
    if p.len() == 6 && is_isomorphic(p, &crown(3).expect("valid")).is_some() {
        return LayerName::C6;
    }
    LayerName::Unnamed
}

/// Exhaustive catalog of layers whose bottom and top levels carry a
/// fixed-point-free automorphism of the given cycle types, with no
/// irreducible elements, not complete bipartite, up to isomorphism.
pub fn enumerate_admissible_layers(bottom: CycleType, top: CycleType) -> Vec<LayerCatalogEntry> {
    raw_layers(bottom, top)
        .into_iter()
        .map(|(layer, _)| LayerCatalogEntry {
            name: layer_name(&layer),
            layer,
            bottom_type: bottom,
            top_type: top,
            witness_pair: (bottom.permutation(), top.permutation()),
        })
        .collect()
}

/// Per-rank cycle types of a rank-preserving fixed-point-free automorphism.
#[derive(Clone, Debug)]
pub struct RankTypeAssignment {
    pub types: Vec<CycleType>,
    pub automorphism: OrderMap,
}

/// Rank levels of `p` under `f`, as cycle types. `None` if some level is not
/// mapped onto itself by a single recognised cycle type.
fn rank_types(p: &Poset, levels: &[Vec<usize>], f: &OrderMap) -> Option<Vec<CycleType>> {
    let cycles = f.cycles();
    levels
        .iter()
        .map(|level| {
            let lengths: Vec<usize> = cycles
                .iter()
                .filter(|c| level.contains(&c[0]))
                .map(|c| c.len())
                .collect();
            debug_assert!(level.iter().all(|&e| p.len() > e));
            CycleType::from_cycle_lengths(&lengths)
        })
        .collect()
}

/// Checks the 8-stack shape, then looks for a rank-preserving
/// fixed-point-free automorphism with cycle type (4) or (2)(2) on each level.
pub fn is_admissible_8stack(p: &Poset) -> Result<Option<RankTypeAssignment>> {
    if p.is_empty() {
        return Err(Error::EmptyPoset);
    }
    let profile = p.rank_structure()?;
    if !profile.is_ranked {
        return Err(Error::NotAnEightStack(StackDefect::NotRanked));
    }
    if profile.height == 0 {
        return Err(Error::NotAnEightStack(StackDefect::RankZero));
    }
    for (rank, level) in profile.levels.iter().enumerate() {
        if level.len() != 4 {
            return Err(Error::NotAnEightStack(StackDefect::WrongLevelSize {
                rank,
                size: level.len(),
            }));
        }
    }
    for rank in 0..profile.height {
        let mut pair = profile.levels[rank].clone();
        pair.extend(&profile.levels[rank + 1]);
        let layer = p.induced(&pair);
        if !named_layers().contains_key(&canonical_form(&layer)) {
            return Err(Error::NotAnEightStack(StackDefect::NonCatalogLayer { rank }));
        }
    }
    let found = fixed_point_free_automorphism(p, &SearchBudget::unlimited())?;
    Ok(found.map(|automorphism| {
        let types = rank_types(p, &profile.levels, &automorphism)
            .expect("fixed-point-free permutations of four elements are (4) or (2)(2)");
        RankTypeAssignment {
            types,
            automorphism,
        }
    }))
}

/// One summand of a tower.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Summand {
    Antichain2,
    SixStack {
        rank: usize,
    },
    /// Layers glued by position: the tops of layer `i` are the bottoms of
    /// layer `i + 1`. Each layer lists `(bottom, top)` cover pairs in `0..4`.
    EightStack {
        layers: Vec<Vec<(usize, usize)>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub summands: Vec<Summand>,
}

/// The 8-stack with the given layers; levels labelled `w{rank}_{position}`.
pub fn eight_stack(layers: &[Vec<(usize, usize)>]) -> Result<Poset> {
    if layers.is_empty() {
        return Err(Error::InvalidArgument("8-stack needs at least one layer".into()));
    }
    let n = layers.len();
    let labels: Vec<String> = (0..=n)
        .flat_map(|r| (0..4).map(move |i| format!("w{r}_{i}")))
        .collect();
    let mut pairs = Vec::new();
    for (r, layer) in layers.iter().enumerate() {
        for &(b, t) in layer {
            if b >= 4 || t >= 4 {
                return Err(Error::InvalidArgument(format!("layer pair ({b}, {t}) out of range")));
            }
            pairs.push((4 * r + b, 4 * (r + 1) + t));
        }
    }
    Poset::from_pairs(labels, &pairs)
}

/// Cover pairs of a 4+4 layer poset whose positions are `b0..b3, t0..t3`.
pub fn layer_pairs(layer: &Poset) -> Vec<(usize, usize)> {
    layer
        .covers()
        .into_iter()
        .map(|(b, t)| (b, t - 4))
        .collect()
}

fn realize(summand: &Summand) -> Result<Poset> {
    match summand {
        Summand::Antichain2 => Ok(Poset::antichain(2, "a")),
        Summand::SixStack { rank } => six_stack(*rank),
        Summand::EightStack { layers } => {
            let p = eight_stack(layers)?;
            match is_admissible_8stack(&p)? {
                Some(_) => Ok(p),
                None => Err(Error::InadmissibleStack),
            }
        }
    }
}

pub fn build_tower(spec: &TowerSpec) -> Result<Poset> {
    let parts: Vec<Poset> = spec.summands.iter().map(realize).collect::<Result<_>>()?;
    Poset::ordinal_sum(&parts)
}

/// Fixed-point-free automorphism of a 6-stack: `x → y → z → x` on even ranks
/// and `x → z → y → x` on odd ranks.
pub fn six_stack_automorphism(n: usize) -> Vec<usize> {
    (0..=n)
        .flat_map(|i| {
            let base = 3 * i;
            if i % 2 == 0 {
                [base + 1, base + 2, base]
            } else {
                [base + 2, base, base + 1]
            }
        })
        .collect()
}

/// Assembles a fixed-point-free automorphism of `build_tower(spec)` summand by
/// summand.
pub fn canonical_tower_automorphism(spec: &TowerSpec) -> Result<OrderMap> {
    let tower = Arc::new(build_tower(spec)?);
    let mut assignment = Vec::with_capacity(tower.len());
    for summand in &spec.summands {
        let offset = assignment.len();
        let local: Vec<usize> = match summand {
            Summand::Antichain2 => vec![1, 0],
            Summand::SixStack { rank } => six_stack_automorphism(*rank),
            Summand::EightStack { layers } => {
                let p = eight_stack(layers)?;
                let witness = is_admissible_8stack(&p)?.ok_or(Error::InadmissibleStack)?;
                witness.automorphism.assignment().to_vec()
            }
        };
        assignment.extend(local.into_iter().map(|v| v + offset));
    }
    Ok(OrderMap::self_map(tower, assignment))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Antichain2,
    SixStack,
    EightStack,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerBlock {
    pub kind: BlockKind,
    pub rank: usize,
    pub elements: Vec<String>,
    /// Per-rank cycle types, for 8-stack blocks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub types: Option<Vec<CycleType>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerFamily {
    FourTower,
    SixTower,
    EightTower,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerDecomposition {
    pub blocks: Vec<TowerBlock>,
}

impl TowerDecomposition {
    /// Smallest family containing the tower.
    pub fn family(&self) -> TowerFamily {
        if self.blocks.iter().any(|b| b.kind == BlockKind::EightStack) {
            TowerFamily::EightTower
        } else if self.blocks.iter().any(|b| b.kind == BlockKind::SixStack) {
            TowerFamily::SixTower
        } else {
            TowerFamily::FourTower
        }
    }

    pub fn to_spec(&self, p: &Poset) -> TowerSpec {
        let summands = self
            .blocks
            .iter()
            .map(|b| match b.kind {
                BlockKind::Antichain2 => Summand::Antichain2,
                BlockKind::SixStack => Summand::SixStack { rank: b.rank },
                BlockKind::EightStack => {
                    let block = p.induced_subposet(&b.elements).expect("block of p");
                    Summand::EightStack {
                        layers: stack_layers(&block),
                    }
                }
            })
            .collect();
        TowerSpec { summands }
    }
}

/// Layers of a ranked poset with 4-element levels, positions by label order
/// within each level.
fn stack_layers(p: &Poset) -> Vec<Vec<(usize, usize)>> {
    let profile = p.rank_structure().expect("nonempty");
    (0..profile.height)
        .map(|r| {
            let lo = &profile.levels[r];
            let hi = &profile.levels[r + 1];
            let mut pairs = Vec::new();
            for (bi, &b) in lo.iter().enumerate() {
                for (ti, &t) in hi.iter().enumerate() {
                    if p.lt(b, t) {
                        pairs.push((bi, ti));
                    }
                }
            }
            pairs
        })
        .collect()
}

/// Why [`classify_tower`] rejected a poset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotATower {
    pub block: Vec<String>,
    pub reason: String,
}

impl fmt::Display for NotATower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block {{{}}}: {}", self.block.join(", "), self.reason)
    }
}

/// Rank intervals `[lo, hi]` between ordinal-sum seams: a seam sits between
/// ranks `i` and `i + 1` when every element of rank at most `i` lies below
/// every element of rank at least `i + 1`.
pub fn seam_blocks(p: &Poset) -> Vec<Vec<usize>> {
    if p.is_empty() {
        return Vec::new();
    }
    let ranks = p.ranks();
    let height = *ranks.iter().max().unwrap_or(&0);
    let upto = |i: usize| (0..p.len()).filter(|&e| ranks[e] <= i).fold(0u64, |a, e| a | bit(e));
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 0..=height {
        let is_seam = if i == height {
            true
        } else {
            let lower = upto(i);
            let upper = p.all() & !lower;
            bits::iter(lower).all(|a| p.up_set(a) & upper == upper)
        };
        if is_seam {
            blocks.push((0..p.len()).filter(|&e| ranks[e] >= start && ranks[e] <= i).collect());
            start = i + 1;
        }
    }
    blocks
}

/// Splits `p` at ordinal-sum seams and matches every block against the
/// 2-antichain, the 6-stack of its rank, or an admissible 8-stack.
pub fn classify_tower(p: &Poset) -> std::result::Result<TowerDecomposition, NotATower> {
    if p.is_empty() {
        return Err(NotATower {
            block: Vec::new(),
            reason: "empty poset".into(),
        });
    }
    let mut blocks = Vec::new();
    for block in seam_blocks(p) {
        let q = p.induced(&block);
        let elements: Vec<String> = block.iter().map(|&e| p.label(e).to_string()).collect();
        let height = q.rank_structure().map(|r| r.height).unwrap_or(0);
        let kind = if q.len() == 2 && q.comparability_count() == 0 {
            Some((BlockKind::Antichain2, None))
        } else if height >= 1
            && q.len() == 3 * (height + 1)
            && is_isomorphic(&q, &six_stack(height).expect("rank >= 1")).is_some()
        {
            Some((BlockKind::SixStack, None))
        } else {
            match is_admissible_8stack(&q) {
                Ok(Some(w)) => Some((BlockKind::EightStack, Some(w.types))),
                _ => None,
            }
        };
        match kind {
            Some((kind, types)) => blocks.push(TowerBlock {
                kind,
                rank: height,
                elements,
                types,
            }),
            None => {
                return Err(NotATower {
                    block: elements,
                    reason: "block is not a 2-antichain, a 6-stack, or an admissible 8-stack".into(),
                })
            }
        }
    }
    Ok(TowerDecomposition { blocks })
}

/// Whether the subset `t` induces a 4-tower: every rank level of the induced
/// order has two elements and consecutive levels are completely comparable.
pub fn is_four_tower_subset(p: &Poset, t: u64) -> bool {
    let n = t.count_ones() as usize;
    if n < 2 || n % 2 == 1 {
        return false;
    }
    let q = p.induced_mask(t);
    let Ok(profile) = q.rank_structure() else {
        return false;
    };
    profile.levels.iter().all(|l| l.len() == 2)
        && profile.levels.windows(2).all(|w| {
            w[0].iter().all(|&a| w[1].iter().all(|&b| q.lt(a, b)))
        })
}

/// Levels of a 4-tower subset, as masks of `p`, bottom first.
pub fn tower_levels(p: &Poset, t: u64) -> Vec<u64> {
    let members = bits::to_indices(t);
    let q = p.induced(&members);
    let profile = q.rank_structure().expect("nonempty");
    profile
        .levels
        .iter()
        .map(|l| l.iter().fold(0u64, |a, &i| a | bit(members[i])))
        .collect()
}

/// Every `t ∈ T` is minimal in `P` among the upper bounds of `{t' ∈ T | t' < t}`.
pub fn is_four_crowns_tower(p: &Poset, t: u64) -> bool {
    bits::iter(t).all(|e| {
        let below = p.down_set(e) & t & !bit(e);
        let bounds = bits::iter(below).fold(p.all(), |acc, b| acc & p.up_set(b));
        bounds & p.down_set(e) == bit(e)
    })
}

/// For consecutive levels, no element of `P` is an upper bound of `T(i)` and a
/// lower bound of `T(i + 1)`.
pub fn is_four_cycle_tower(p: &Poset, t: u64) -> bool {
    let levels = tower_levels(p, t);
    levels.windows(2).all(|w| {
        let uppers = bits::iter(w[0]).fold(p.all(), |acc, a| acc & p.up_set(a));
        let lowers = bits::iter(w[1]).fold(p.all(), |acc, b| acc & p.down_set(b));
        uppers & lowers == 0
    })
}

/// 4-tower subsets of `p`, largest first, numeric order within a size.
pub fn four_tower_subsets(p: &Poset) -> impl Iterator<Item = u64> + '_ {
    let n = p.len();
    (1..=n / 2)
        .rev()
        .flat_map(move |half| bits::subsets_of_size(n, 2 * half))
        .filter(move |&t| is_four_tower_subset(p, t))
}

pub fn detect_4crown_tower(p: &Poset) -> Option<u64> {
    four_tower_subsets(p).find(|&t| is_four_crowns_tower(p, t))
}

pub fn detect_4cycle_tower(p: &Poset) -> Option<u64> {
    four_tower_subsets(p).find(|&t| is_four_cycle_tower(p, t))
}
