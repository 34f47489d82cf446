//! Named, budgeted verification suites with machine-readable reports.
//!
//! Every suite is deterministic: instances are generated in a fixed order,
//! checked (possibly in parallel), and folded back in generation order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bits;
use crate::canon::{canonical_form, is_isomorphic};
use crate::enumerate::{all_posets_up_to, ranked_posets, CorpusFilter};
use crate::error::{Error, Result};
use crate::gencrown::{find_special_crown_retract, is_generalized_crown, is_special};
use crate::io::PosetDocument;
use crate::poset::{label_set, Poset};
use crate::search::{
    enumerate_retractions, fixed_point_free_automorphism, has_fpp, is_minimal_automorphic, retraction_exists,
    SearchBudget,
};
use crate::sections::{
    enumerate_sections, is_nice, is_section, is_very_nice, lemma59_retraction, stacked_4tower_retraction,
    tower_of_sections_retract,
};
use crate::towers::{
    build_tower, canonical_tower_automorphism, classify_tower, crown, eight_stack, enumerate_admissible_layers,
    four_tower, is_admissible_8stack, tower_levels, is_four_crowns_tower, is_four_tower_subset, k44bar, layer_pairs, named_layer,
    six_stack, CycleType, LayerName, Summand, TowerFamily, TowerSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Claim {
    Width2,
    Prop41,
    Prop42,
    Cor36Fwd,
    Cor36Bwd,
    Thm35Fwd,
    Thm35Bwd,
    Table21,
    Prop511,
    Thm512,
    Lemma31,
    Lemma59,
    Cor510,
    Lemmas56To58,
}

impl Claim {
    pub const ALL: [Claim; 14] = [
        Claim::Width2,
        Claim::Prop41,
        Claim::Prop42,
        Claim::Cor36Fwd,
        Claim::Cor36Bwd,
        Claim::Thm35Fwd,
        Claim::Thm35Bwd,
        Claim::Table21,
        Claim::Prop511,
        Claim::Thm512,
        Claim::Lemma31,
        Claim::Lemma59,
        Claim::Cor510,
        Claim::Lemmas56To58,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Claim::Width2 => "width2",
            Claim::Prop41 => "prop41",
            Claim::Prop42 => "prop42",
            Claim::Cor36Fwd => "cor36_fwd",
            Claim::Cor36Bwd => "cor36_bwd",
            Claim::Thm35Fwd => "thm35_fwd",
            Claim::Thm35Bwd => "thm35_bwd",
            Claim::Table21 => "table21",
            Claim::Prop511 => "prop511",
            Claim::Thm512 => "thm512",
            Claim::Lemma31 => "lemma31",
            Claim::Lemma59 => "lemma59",
            Claim::Cor510 => "cor510",
            Claim::Lemmas56To58 => "lemmas56_58",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Claim::Width2 => "width <= 2: fixed point property iff no 4-crowns tower is a retract",
            Claim::Prop41 => "every labelled stacking of 6-crowns is the 6-stack",
            Claim::Prop42 => "ranked nice sections are the 2-antichain and the 6-stacks",
            Claim::Cor36Fwd => "every 6-tower is automorphic",
            Claim::Cor36Bwd => "ranked width <= 3 minimal automorphic posets are 6-towers",
            Claim::Thm35Fwd => "every 8-tower is automorphic",
            Claim::Thm35Bwd => "ranked width <= 4 minimal automorphic posets are 8-towers",
            Claim::Table21 => "admissible layer classes per cycle-type pair are 3, 2, 2, 9",
            Claim::Prop511 => "a 6-stack is minimal automorphic iff 3 does not divide its rank",
            Claim::Thm512 => "a 6-stack is very nice iff 3 does not divide its rank",
            Claim::Lemma31 => "every poset without the fixed point property retracts onto a special generalized crown",
            Claim::Lemma59 => "the constrained retraction of the rank-3 6-stack onto its 4-tower is unique",
            Claim::Cor510 => "6-stacks of rank 3k retract onto a 4-tower",
            Claim::Lemmas56To58 => "4-tower retracts of 6-stacks meet the bottom level and restrict to P(3, n)",
        }
    }

    /// `(parameter, default, cap)`.
    fn parameters(self) -> &'static [(&'static str, usize, usize)] {
        match self {
            Claim::Width2 => &[("max_size", 7, 7)],
            Claim::Prop41 => &[("max_rank", 3, 4)],
            Claim::Prop42 => &[("max_n", 3, 3)],
            Claim::Cor36Fwd => &[("max_size", 12, 16)],
            Claim::Cor36Bwd => &[("max_size", 10, 10), ("max_width", 3, 3)],
            Claim::Thm35Fwd => &[("max_size", 12, 12)],
            Claim::Thm35Bwd => &[("max_size", 9, 10), ("max_width", 4, 4)],
            Claim::Table21 => &[],
            Claim::Prop511 => &[("max_rank", 3, 4)],
            Claim::Thm512 => &[("max_rank", 3, 4)],
            Claim::Lemma31 => &[("max_size", 6, 7)],
            Claim::Lemma59 => &[],
            Claim::Cor510 => &[("max_k", 2, 3)],
            Claim::Lemmas56To58 => &[("min_rank", 3, 4), ("max_rank", 4, 4)],
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Claim::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown claim `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Verified,
    Refuted,
    BudgetExhausted,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Verified => 0,
            Status::Refuted => 1,
            Status::BudgetExhausted => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub poset: PosetDocument,
    pub context: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub claim: String,
    pub params: BTreeMap<String, usize>,
    pub instances_checked: u64,
    pub counterexamples: Vec<Counterexample>,
    pub status: Status,
    pub details: BTreeMap<String, Value>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub budget: SearchBudget,
    pub jobs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            budget: SearchBudget::default(),
            jobs: 1,
        }
    }
}

enum Outcome {
    Pass,
    Fail(Counterexample),
    Exhausted,
}

fn fail(name: &str, p: &Poset, context: impl Into<String>) -> Outcome {
    Outcome::Fail(Counterexample {
        poset: PosetDocument::from_poset(name, p),
        context: context.into(),
    })
}

/// Budget errors become [`Outcome::Exhausted`]; anything else propagates.
fn guarded(r: Result<Outcome>) -> Result<Outcome> {
    match r {
        Err(Error::BudgetExhausted { .. }) | Err(Error::TooLarge { .. }) => Ok(Outcome::Exhausted),
        other => other,
    }
}

struct Tally {
    instances: u64,
    counterexamples: Vec<Counterexample>,
    exhausted: bool,
    details: BTreeMap<String, Value>,
}

impl Tally {
    fn new() -> Tally {
        Tally {
            instances: 0,
            counterexamples: Vec::new(),
            exhausted: false,
            details: BTreeMap::new(),
        }
    }

    fn add(&mut self, outcome: Outcome) {
        self.instances += 1;
        match outcome {
            Outcome::Pass => {}
            Outcome::Fail(c) => self.counterexamples.push(c),
            Outcome::Exhausted => self.exhausted = true,
        }
    }

    fn check(&mut self, ok: bool, name: &str, p: &Poset, context: &str) {
        self.add(if ok { Outcome::Pass } else { fail(name, p, context) });
    }

    fn detail(&mut self, key: &str, value: Value) {
        self.details.insert(key.to_string(), value);
    }

    /// Runs `check` over `items` on the ambient pool and folds in order.
    fn run_all<T, F>(&mut self, items: &[T], check: F) -> Result<()>
    where
        T: Sync,
        F: Fn(&T) -> Result<Outcome> + Sync,
    {
        let outcomes: Vec<Result<Outcome>> = items.par_iter().map(|t| guarded(check(t))).collect();
        for o in outcomes {
            self.add(o?);
        }
        Ok(())
    }
}

fn resolve_params(claim: Claim, given: &BTreeMap<String, String>) -> Result<(BTreeMap<String, usize>, Vec<String>)> {
    let spec = claim.parameters();
    let mut params = BTreeMap::new();
    let mut over_cap = Vec::new();
    for (key, value) in given {
        let Some(&(_, _, cap)) = spec.iter().find(|(k, _, _)| k == key) else {
            return Err(Error::InvalidArgument(format!("claim {claim} has no parameter `{key}`")));
        };
        let v: usize = value
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("parameter `{key}` expects a non-negative integer, got `{value}`")))?;
        if v > cap {
            over_cap.push(format!("{key} = {v} exceeds the cap {cap}"));
        }
        params.insert(key.clone(), v);
    }
    for &(key, default, _) in spec {
        params.entry(key.to_string()).or_insert(default);
    }
    Ok((params, over_cap))
}

/// Runs one claim's suite.
pub fn verify(claim: Claim, given: &BTreeMap<String, String>, options: &VerifyOptions) -> Result<Report> {
    let (params, over_cap) = resolve_params(claim, given)?;
    let start = Instant::now();
    let mut tally = Tally::new();
    if over_cap.is_empty() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        pool.install(|| run_claim(claim, &params, &options.budget, &mut tally))?;
    } else {
        tally.exhausted = true;
        tally.detail("over_cap", json!(over_cap));
    }
    let status = if !tally.counterexamples.is_empty() {
        Status::Refuted
    } else if tally.exhausted {
        Status::BudgetExhausted
    } else {
        Status::Verified
    };
    Ok(Report {
        claim: claim.id().to_string(),
        params,
        instances_checked: tally.instances,
        counterexamples: tally.counterexamples,
        status,
        details: tally.details,
        wall_time: start.elapsed(),
    })
}

fn run_claim(claim: Claim, params: &BTreeMap<String, usize>, budget: &SearchBudget, t: &mut Tally) -> Result<()> {
    let p = |k: &str| params[k];
    match claim {
        Claim::Width2 => width2(p("max_size"), budget, t),
        Claim::Prop41 => stackings_collapse(p("max_rank"), t),
        Claim::Prop42 => nice_sections(p("max_n"), t),
        Claim::Cor36Fwd => tower_forward(&six_tower_specs(p("max_size")), budget, t),
        Claim::Cor36Bwd => tower_backward(p("max_size"), p("max_width"), false, budget, t),
        Claim::Thm35Fwd => {
            let (blocks, stats) = eight_stack_blocks(p("max_size"))?;
            for (k, v) in stats {
                t.detail(&k, v);
            }
            tower_forward(&eight_tower_specs(p("max_size"), &blocks), budget, t)
        }
        Claim::Thm35Bwd => tower_backward(p("max_size"), p("max_width"), true, budget, t),
        Claim::Table21 => layer_catalog(t),
        Claim::Prop511 => six_stack_minimality(p("max_rank"), budget, t),
        Claim::Thm512 => six_stack_very_nice(p("max_rank"), budget, t),
        Claim::Lemma31 => special_crown_retracts(p("max_size"), budget, t),
        Claim::Lemma59 => constrained_retraction(budget, t),
        Claim::Cor510 => stacked_retractions(p("max_k"), t),
        Claim::Lemmas56To58 => stack_tower_retracts(p("min_rank"), p("max_rank"), budget, t),
    }
}

fn width2(max_size: usize, budget: &SearchBudget, t: &mut Tally) -> Result<()> {
    let corpus: Vec<Poset> = all_posets_up_to(max_size)?
        .into_iter()
        .filter(|p| p.width().map(|w| w.width <= 2).unwrap_or(false))
        .collect();
    t.detail("corpus", json!(corpus.len()));
    t.run_all(&corpus, |p| {
        let fpp = has_fpp(p, budget)?.has_fpp;
        let mut tower_retract = None;
        for size in (2..=p.len()).step_by(2) {
            for s in bits::subsets_of_size(p.len(), size) {
                if is_four_tower_subset(p, s) && is_four_crowns_tower(p, s) && retraction_exists(p, s, budget)?.is_some() {
                    tower_retract = Some(s);
                    break;
                }
            }
            if tower_retract.is_some() {
                break;
            }
        }
        Ok(if fpp == tower_retract.is_none() {
            Outcome::Pass
        } else {
            fail(
                "width2",
                p,
                format!("has_fpp = {fpp}, 4-crowns tower retract = {:?}", tower_retract.map(|s| label_set(p, s))),
            )
        })
    })
}

/// All `6^n` ways to join `n + 1` labelled 3-levels by 6-crowns.
fn labelled_stackings(n: usize) -> Vec<Poset> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let labels: Vec<String> = (0..=n).flat_map(|k| (0..3).map(move |i| format!("e{k}_{i}"))).collect();
    let total = 6usize.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut pairs = Vec::new();
            for k in 0..n {
                // Top `j` of the layer misses bottom `perm[j]`.
                let perm = PERMS[code % 6];
                code /= 6;
                for (j, &miss) in perm.iter().enumerate() {
                    for b in (0..3).filter(|&b| b != miss) {
                        pairs.push((3 * k + b, 3 * (k + 1) + j));
                    }
                }
            }
            Poset::from_pairs(labels.clone(), &pairs).expect("layered relation is acyclic")
        })
        .collect()
}

fn stackings_collapse(max_rank: usize, t: &mut Tally) -> Result<()> {
    let mut per_rank = BTreeMap::new();
    for n in 1..=max_rank {
        let stackings = labelled_stackings(n);
        let target = canonical_form(&six_stack(n)?);
        let forms: Vec<_> = stackings.par_iter().map(canonical_form).collect();
        let classes: BTreeSet<_> = forms.iter().cloned().collect();
        per_rank.insert(n.to_string(), json!({"labelled": stackings.len(), "classes": classes.len()}));
        for (p, f) in stackings.iter().zip(&forms) {
            t.check(*f == target, "stacking", p, &format!("rank {n} stacking is not the 6-stack"));
        }
    }
    t.detail("per_rank", json!(per_rank));
    Ok(())
}

fn nice_sections(max_n: usize, t: &mut Tally) -> Result<()> {
    let pair = Poset::antichain(2, "a");
    t.check(is_section(&pair) && is_nice(&pair)?, "antichain2", &pair, "2-antichain is not a nice section");
    let mut per_n = BTreeMap::new();
    for n in 1..=max_n {
        let sections = enumerate_sections(n)?;
        let stack = six_stack(n)?;
        let target = canonical_form(&stack);
        t.check(
            is_section(&stack) && is_nice(&stack)?,
            "six_stack",
            &stack,
            &format!("6-stack of rank {n} is not a nice section"),
        );
        let mut ranked = 0;
        let mut ranked_nice = 0;
        let mut stack_found = false;
        for s in &sections {
            let nice = is_nice(s)?;
            let is_stack = canonical_form(s) == target;
            stack_found |= is_stack;
            if s.is_ranked() {
                ranked += 1;
                if nice {
                    ranked_nice += 1;
                }
                t.check(nice == is_stack, "section", s, &format!("n = {n}: ranked section with nice = {nice}, 6-stack = {is_stack}"));
            }
        }
        t.check(stack_found, "six_stack", &stack, &format!("6-stack of rank {n} missing from the section enumeration"));
        per_n.insert(
            n.to_string(),
            json!({"sections": sections.len(), "ranked": ranked, "ranked_nice": ranked_nice, "not_ranked": sections.len() - ranked}),
        );
    }
    t.detail("per_n", json!(per_n));
    Ok(())
}

/// Sequences of summands with total size at most `max_size`, in a fixed order.
fn compositions(max_size: usize, parts: &[(Summand, usize)]) -> Vec<Vec<Summand>> {
    fn go(left: usize, parts: &[(Summand, usize)], acc: &mut Vec<Summand>, out: &mut Vec<Vec<Summand>>) {
        if !acc.is_empty() {
            out.push(acc.clone());
        }
        for (s, size) in parts {
            if *size <= left {
                acc.push(s.clone());
                go(left - size, parts, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(max_size, parts, &mut Vec::new(), &mut out);
    out
}

fn six_tower_parts(max_size: usize) -> Vec<(Summand, usize)> {
    let mut parts = vec![(Summand::Antichain2, 2)];
    parts.extend((1..).map(|r| (Summand::SixStack { rank: r }, 3 * r + 3)).take_while(|(_, s)| *s <= max_size));
    parts
}

fn six_tower_specs(max_size: usize) -> Vec<TowerSpec> {
    compositions(max_size, &six_tower_parts(max_size))
        .into_iter()
        .map(|summands| TowerSpec { summands })
        .collect()
}

/// Admissible 8-stacks with at most `max_size` elements, one per isomorphism
/// class: every catalog layer, and every gluing of catalog layers for higher ranks.
fn eight_stack_blocks(max_size: usize) -> Result<(Vec<(Summand, usize)>, BTreeMap<String, Value>)> {
    const NAMES: [LayerName; 9] = [
        LayerName::C8,
        LayerName::C4PlusC4,
        LayerName::K44Bar,
        LayerName::Z1,
        LayerName::Z1Dual,
        LayerName::Z2,
        LayerName::Z3,
        LayerName::Z4,
        LayerName::Z5,
    ];
    let layers: Vec<Vec<(usize, usize)>> = NAMES
        .iter()
        .map(|&n| layer_pairs(&named_layer(n).expect("catalogued")))
        .collect();
    let perms = permutations4();
    let mut stats = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut current: Vec<Vec<Vec<(usize, usize)>>> = layers.iter().map(|l| vec![l.clone()]).collect();
    let mut rank = 1;
    while 4 * (rank + 1) <= max_size && !current.is_empty() {
        let mut admissible = Vec::new();
        let mut inadmissible = 0;
        let candidates: Vec<_> = current
            .par_iter()
            .map(|stack| -> Result<Option<(Vec<Vec<(usize, usize)>>, crate::canon::CanonicalForm)>> {
                let p = eight_stack(stack)?;
                Ok(is_admissible_8stack(&p)?.map(|_| (stack.clone(), canonical_form(&p))))
            })
            .collect::<Result<_>>()?;
        let total = candidates.len();
        for c in candidates {
            match c {
                Some((stack, form)) => {
                    if seen.insert(form) {
                        admissible.push(stack);
                    }
                }
                None => inadmissible += 1,
            }
        }
        stats.insert(
            format!("rank{rank}_stacks"),
            json!({"candidates": total, "inadmissible": inadmissible, "admissible_classes": admissible.len()}),
        );
        out.extend(admissible.iter().map(|s| (Summand::EightStack { layers: s.clone() }, 4 * (rank + 1))));
        rank += 1;
        // Glue every catalog layer on top of every admissible stack, under
        // every identification of the shared level.
        current = admissible
            .iter()
            .flat_map(|stack| {
                let perms = &perms;
                layers.iter().flat_map(move |layer| {
                    perms.iter().map(move |perm| {
                        let mut s = stack.clone();
                        s.push(layer.iter().map(|&(b, t)| (perm[b], t)).collect());
                        s
                    })
                })
            })
            .collect();
    }
    Ok((out, stats))
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|x| p.contains(&x)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn eight_tower_specs(max_size: usize, blocks: &[(Summand, usize)]) -> Vec<TowerSpec> {
    let mut parts = six_tower_parts(max_size);
    parts.extend(blocks.iter().cloned());
    compositions(max_size, &parts)
        .into_iter()
        .map(|summands| TowerSpec { summands })
        .collect()
}

fn tower_forward(specs: &[TowerSpec], budget: &SearchBudget, t: &mut Tally) -> Result<()> {
    t.detail("towers", json!(specs.len()));
    t.run_all(specs, |spec| {
        let p = build_tower(spec)?;
        let found = fixed_point_free_automorphism(&p, budget)?;
        let canonical = canonical_tower_automorphism(spec)?;
        let ok = found.as_ref().is_some_and(|f| f.is_automorphism() && f.is_fixed_point_free())
            && canonical.is_automorphism()
            && canonical.is_fixed_point_free();
        Ok(if ok {
            Outcome::Pass
        } else {
            fail("tower", &p, format!("no validated fixed-point-free automorphism for {spec:?}"))
        })
    })
}

fn tower_backward(max_size: usize, max_width: usize, allow_eight: bool, budget: &SearchBudget, t: &mut Tally) -> Result<()> {
    let corpus = ranked_posets(&CorpusFilter {
        max_size,
        max_width: Some(max_width),
        ranked_only: true,
        max_rank: None,
    })?;
    t.detail("corpus", json!(corpus.len()));
    let outcomes: Vec<Result<(Outcome, Option<TowerFamily>)>> = corpus
        .par_iter()
        .map(|p| {
            let minimal = match is_minimal_automorphic(p, budget) {
                Ok(m) => m,
                Err(Error::BudgetExhausted { .. }) | Err(Error::TooLarge { .. }) => return Ok((Outcome::Exhausted, None)),
                Err(e) => return Err(e),
            };
            if !minimal {
                return Ok((Outcome::Pass, None));
            }
            Ok(match classify_tower(p) {
                Ok(d) => {
                    let family = d.family();
                    if allow_eight || family != TowerFamily::EightTower {
                        (Outcome::Pass, Some(family))
                    } else {
                        (fail("minimal", p, "minimal automorphic but needs an 8-stack block"), Some(family))
                    }
                }
                Err(e) => (fail("minimal", p, format!("minimal automorphic but not a tower: {e}")), None),
            })
        })
        .collect();
    let mut minimal = 0u64;
    let mut families: BTreeMap<String, u64> = BTreeMap::new();
    for o in outcomes {
        let (outcome, family) = o?;
        if let Some(f) = family {
            minimal += 1;
            let key = serde_json::to_value(f).expect("serializes");
            *families.entry(key.as_str().unwrap_or_default().to_string()).or_default() += 1;
        } else if let Outcome::Fail(_) = outcome {
            minimal += 1;
        }
        t.add(outcome);
    }
    t.detail("minimal_automorphic", json!(minimal));
    t.detail("families", json!(families));
    Ok(())
}

fn layer_catalog(t: &mut Tally) -> Result<()> {
    use CycleType::*;
    let cells = [(Four, Four, 3), (Four, TwoTwo, 2), (TwoTwo, Four, 2), (TwoTwo, TwoTwo, 9)];
    let mut counts = BTreeMap::new();
    let mut sets = Vec::new();
    for (b, top, expected) in cells {
        let entries = enumerate_admissible_layers(b, top);
        let key = format!("{b}/{top}");
        let mut names: Vec<String> = entries.iter().map(|e| e.name.to_string()).collect();
        names.sort();
        counts.insert(key.clone(), json!({"classes": entries.len(), "names": names}));
        let witnesses_ok = entries.iter().all(|e| {
            let w = e.witness();
            w.is_automorphism() && w.is_fixed_point_free() && e.layer.irreducible_elements().is_empty()
        });
        let summary = entries.first().map(|e| e.layer.clone()).unwrap_or_else(|| Poset::antichain(0, "p"));
        t.check(entries.len() == expected && witnesses_ok, &key, &summary, &format!("{key}: {} classes, expected {expected}", entries.len()));
        sets.push(entries.iter().map(|e| canonical_form(&e.layer)).collect::<BTreeSet<_>>());
    }
    let mixed = enumerate_admissible_layers(Four, TwoTwo);
    let dual_forms: BTreeSet<_> = mixed.iter().map(|e| canonical_form(&e.layer.dual())).collect();
    let empty = Poset::antichain(0, "p");
    t.check(dual_forms == sets[2], "duality", &empty, "((2)(2),(4)) classes are not the duals of ((4),(2)(2))");
    let c4c4 = crown(2)?.disjoint_sum(&crown(2)?);
    for (name, direct) in [(LayerName::K44Bar, k44bar()), (LayerName::C8, crown(4)?), (LayerName::C4PlusC4, c4c4)] {
        let entry = named_layer(name).expect("catalogued");
        t.check(is_isomorphic(&entry, &direct).is_some(), name.as_str(), &direct, "catalog entry differs from the direct construction");
    }
    let c6 = enumerate_admissible_layers(Three, Three);
    t.check(
        c6.len() == 1 && c6[0].name == LayerName::C6,
        "c6",
        &crown(3)?,
        "(3)/(3) cell is not exactly C_6",
    );
    t.detail("cells", json!(counts));
    Ok(())
}

fn six_stack_minimality(max_rank: usize, budget: &SearchBudget, t: &mut Tally) -> Result<()> {
    let ranks: Vec<usize> = (1..=max_rank).collect();
    let mut results = BTreeMap::new();
    let outcomes: Vec<Result<(bool, bool)>> = ranks
        .par_iter()
        .map(|&n| {
            let p = six_stack(n)?;
            let minimal = is_minimal_automorphic(&p, budget)?;
            let tower_retract = tower_of_sections_retract(&p, budget)?.is_some();
            Ok((minimal, tower_retract))
        })
        .collect();
    for (&n, o) in ranks.iter().zip(outcomes) {
        let p = six_stack(n)?;
        match o {
            Ok((minimal, tower_retract)) => {
                results.insert(n.to_string(), json!({"minimal_automorphic": minimal, "tower_of_sections_retract": tower_retract}));
                let expect = n % 3 != 0;
                t.check(
                    minimal == expect && tower_retract == !expect,
                    "six_stack",
                    &p,
                    &format!("rank {n}: minimal = {minimal}, tower-of-sections retract = {tower_retract}"),
                );
            }
            Err(Error::BudgetExhausted { .. }) | Err(Error::TooLarge { .. }) => t.add(Outcome::Exhausted),
            Err(e) => return Err(e),
        }
    }
    t.detail("per_rank", json!(results));
    Ok(())
}

fn six_stack_very_nice(max_rank: usize, budget: &SearchBudget, t: &mut Tally) -> Result<()> {
    let mut results = BTreeMap::new();
    for n in 1..=max_rank {
        let p = six_stack(n)?;
        let outcome = (|| -> Result<(bool, Option<crate::search::RetractWitness>)> {
            let very_nice = is_very_nice(&p, budget)?;
            let witness = if very_nice { None } else { tower_of_sections_retract(&p, budget)? };
            Ok((very_nice, witness))
        })();
        match outcome {
            Ok((very_nice, witness)) => {
                let expect = n % 3 != 0;
                let retract_is_four_tower = witness.as_ref().is_none_or(|w| {
                    let q = p.induced_mask(w.subset);
                    is_isomorphic(&q, &four_tower(q.len() / 2 - 1)).is_some()
                });
                results.insert(
                    n.to_string(),
                    json!({
                        "very_nice": very_nice,
                        "retract": witness.as_ref().map(|w| label_set(&p, w.subset)),
                    }),
                );
                t.check(
                    very_nice == expect && retract_is_four_tower,
                    "six_stack",
                    &p,
                    &format!("rank {n}: very nice = {very_nice}, retract is a 4-tower = {retract_is_four_tower}"),
                );
            }
            Err(Error::BudgetExhausted { .. }) | Err(Error::TooLarge { .. }) => t.add(Outcome::Exhausted),
            Err(e) => return Err(e),
        }
    }
    t.detail("per_rank", json!(results));
    Ok(())
}

fn special_crown_retracts(max_size: usize, budget: &SearchBudget, t: &mut Tally) -> Result<()> {
    let corpus: Vec<Poset> = all_posets_up_to(max_size)?
        .into_iter()
        .filter(|p| has_fpp(p, budget).map(|v| !v.has_fpp).unwrap_or(true))
        .collect();
    t.detail("without_fpp", json!(corpus.len()));
    t.run_all(&corpus, |p| {
        let Some(found) = find_special_crown_retract(p, budget)? else {
            return Ok(fail("lemma31", p, "no special generalized crown retract"));
        };
        let ok = found.retraction.is_retraction_onto(found.subset)
            && found.crown == p.induced_mask(found.subset)
            && is_generalized_crown(&found.crown, &found.partition)?
            && is_special(&found.crown, &found.partition, budget)?.is_some()
            && found.automorphism.is_automorphism()
            && found.automorphism.is_fixed_point_free();
        Ok(if ok {
            Outcome::Pass
        } else {
            fail("lemma31", p, format!("witness on {:?} does not validate", label_set(p, found.subset)))
        })
    })
}

fn constrained_retraction(budget: &SearchBudget, t: &mut Tally) -> Result<()> {
    let (p, subset, f) = lemma59_retraction();
    let idx = |l: &str| p.index_of(l).expect("6-stack label");
    let all = enumerate_retractions(&p, subset, budget)?;
    let constrained: Vec<_> = all.iter().filter(|g| g.apply(idx("x1")) == idx("x0")).collect();
    t.detail("retractions", json!(all.len()));
    t.detail("constrained", json!(constrained.len()));
    t.check(constrained.len() == 1, "six_stack3", &p, &format!("{} retractions with f(x1) = x0", constrained.len()));
    if let [g] = constrained.as_slice() {
        t.detail("map", json!(g.as_label_map()));
        let values = [("y0", "x0"), ("y3", "z3"), ("z1", "y2"), ("x2", "y1"), ("z2", "z3")];
        for (from, to) in values {
            t.check(g.apply_label(from) == Some(to), "six_stack3", &p, &format!("f({from}) should be {to}"));
        }
        t.check(**g == f && f.is_retraction_onto(subset), "six_stack3", &p, "explicit map differs from the searched one");
    }
    Ok(())
}

fn stacked_retractions(max_k: usize, t: &mut Tally) -> Result<()> {
    let mut sizes = BTreeMap::new();
    for k in 1..=max_k {
        let (p, subset, f) = stacked_4tower_retraction(k)?;
        let q = p.induced_mask(subset);
        sizes.insert(k.to_string(), json!(q.len()));
        t.check(
            f.is_retraction_onto(subset) && f.is_idempotent() && is_isomorphic(&q, &four_tower(2 * k)).is_some(),
            "six_stack",
            &p,
            &format!("k = {k}: stacked map is not a retraction onto a 4-tower"),
        );
    }
    t.detail("retract_sizes", json!(sizes));
    Ok(())
}

/// 4-tower retracts of `p`, as subsets. Rank-0 towers (2-antichains) count.
fn four_tower_retracts(p: &Poset, proper: bool, budget: &SearchBudget) -> Result<Vec<u64>> {
    let n = p.len();
    let largest = if proper { n - 1 } else { n };
    let mut out = Vec::new();
    for size in (2..=largest).step_by(2) {
        for s in bits::subsets_of_size(n, size) {
            if is_four_tower_subset(p, s) && retraction_exists(p, s, budget)?.is_some() {
                out.push(s);
            }
        }
    }
    Ok(out)
}

fn stack_tower_retracts(min_rank: usize, max_rank: usize, budget: &SearchBudget, t: &mut Tally) -> Result<()> {
    let mut found = BTreeMap::new();
    for n in min_rank.max(1)..=max_rank {
        let p = six_stack(n)?;
        let retracts = match four_tower_retracts(&p, true, budget) {
            Ok(r) => r,
            Err(Error::BudgetExhausted { .. }) | Err(Error::TooLarge { .. }) => {
                t.add(Outcome::Exhausted);
                continue;
            }
            Err(e) => return Err(e),
        };
        found.insert(n.to_string(), json!(retracts.len()));
        let upper_part = p.induced(&(9..p.len()).collect::<Vec<_>>());
        let upper_has_retract = n >= 3 && !four_tower_retracts(&upper_part, false, budget)?.is_empty();
        for s in retracts {
            let meets_bottom = tower_levels(&p, s)[0] & bits::full(3) != 0;
            let inherits = upper_has_retract;
            t.check(
                meets_bottom && inherits,
                "six_stack",
                &p,
                &format!("rank {n}, retract {:?}: meets P(0) = {meets_bottom}, P(3, n) has a 4-tower retract = {inherits}", label_set(&p, s)),
            );
        }
    }
    t.detail("four_tower_retracts", json!(found));
    Ok(())
}

/// Every claim with default parameters, in registry order.
pub fn verify_all(options: &VerifyOptions) -> Result<Vec<Report>> {
    Claim::ALL
        .into_iter()
        .map(|c| verify(c, &BTreeMap::new(), options))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(claim: Claim, params: &[(&str, &str)]) -> Report {
        let given = params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        verify(claim, &given, &VerifyOptions::default()).unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for c in Claim::ALL {
            assert_eq!(c.id().parse::<Claim>().unwrap(), c);
        }
        assert!("nope".parse::<Claim>().is_err());
    }

    #[test]
    fn rank_two_stackings_collapse() {
        let r = run(Claim::Prop41, &[("max_rank", "2")]);
        assert_eq!(r.status, Status::Verified);
        assert_eq!(r.instances_checked, 6 + 36);
    }

    #[test]
    fn constrained_retraction_verified() {
        let r = run(Claim::Lemma59, &[]);
        assert_eq!(r.status, Status::Verified, "{}", r.to_json());
        assert_eq!(r.details["constrained"], json!(1));
    }

    #[test]
    fn layer_catalog_verified() {
        let r = run(Claim::Table21, &[]);
        assert_eq!(r.status, Status::Verified, "{}", r.to_json());
    }

    #[test]
    fn over_cap_is_budget_exhausted() {
        let r = run(Claim::Width2, &[("max_size", "9")]);
        assert_eq!(r.status, Status::BudgetExhausted);
        assert_eq!(r.instances_checked, 0);
    }

    #[test]
    fn bad_params_are_errors() {
        let given = [("bogus".to_string(), "1".to_string())].into_iter().collect();
        assert!(verify(Claim::Lemma59, &given, &VerifyOptions::default()).is_err());
        let given = [("max_rank".to_string(), "x".to_string())].into_iter().collect();
        assert!(verify(Claim::Prop41, &given, &VerifyOptions::default()).is_err());
    }

    #[test]
    fn tiny_budget_is_reported() {
        let options = VerifyOptions {
            budget: SearchBudget::with_nodes(5),
            jobs: 1,
        };
        let r = verify(Claim::Lemma31, &[("max_size".to_string(), "4".to_string())].into_iter().collect(), &options).unwrap();
        assert_eq!(r.status, Status::BudgetExhausted);
    }

    #[test]
    fn reports_are_deterministic_across_jobs() {
        let a = verify(Claim::Prop41, &BTreeMap::new(), &VerifyOptions::default()).unwrap();
        let b = verify(
            Claim::Prop41,
            &BTreeMap::new(),
            &VerifyOptions {
                jobs: 4,
                ..VerifyOptions::default()
            },
        )
        .unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
