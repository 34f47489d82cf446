//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fpp_core::enumerate::all_posets_up_to;
use fpp_core::search::{count_order_preserving_self_maps, enumerate_retractions, has_fpp, is_minimal_automorphic};
use fpp_core::sections::{is_very_nice, stacked_4tower_retraction, tower_of_sections_retract};
use fpp_core::towers::{
    crown, enumerate_admissible_layers, is_four_tower_subset, k44bar, named_layer, six_stack, CycleType, LayerName,
};
use fpp_core::verify::{verify, Claim, Report, Status, VerifyOptions};
use fpp_core::{canonical_form, is_isomorphic, SearchBudget};

type Outcome = Result<String, String>;

fn run(claim: Claim, params: &[(&str, usize)], jobs: usize) -> Result<Report, String> {
    let given: BTreeMap<String, String> = params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let options = VerifyOptions {
        budget: SearchBudget::default(),
        jobs,
    };
    verify(claim, &given, &options).map_err(|e| format!("{claim}: {e}"))
}

fn verified(claim: Claim, params: &[(&str, usize)]) -> Result<Report, String> {
    let r = run(claim, params, 1)?;
    if r.status != Status::Verified {
        let first = r.counterexamples.first().map(|c| c.context.clone()).unwrap_or_default();
        return Err(format!("{claim}: {:?} after {} instances {first}", r.status, r.instances_checked));
    }
    Ok(r)
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if elapsed > limit {
        return Err(format!("{what} took {elapsed:.1?}, limit {limit:?}"));
    }
    Ok(())
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let corpus = all_posets_up_to(6).map_err(|e| e.to_string())?;
    if corpus.len() < 300 {
        return Err(format!("only {} classes", corpus.len()));
    }
    let budget = SearchBudget::default();
    for p in &corpus {
        let pruned = has_fpp(p, &budget).map_err(|e| e.to_string())?.has_fpp;
        let brute = count_order_preserving_self_maps(p).map_err(|e| e.to_string())?.fixed_point_free == 0;
        if pruned != brute {
            return Err(format!("disagreement on {:?}", p.cover_labels()));
        }
    }
    within(start.elapsed(), Duration::from_secs(60), "oracle sweep")?;
    Ok(format!("{} classes agree", corpus.len()))
}

fn width2() -> Outcome {
    let r = verified(Claim::Width2, &[("max_size", 7)])?;
    Ok(format!("{} posets, no counterexample", r.instances_checked))
}

fn stackings() -> Outcome {
    let start = Instant::now();
    let r = verified(Claim::Prop41, &[("max_rank", 3)])?;
    within(start.elapsed(), Duration::from_secs(10), "stackings")?;
    Ok(format!("{} labelled stackings, one class per rank", r.instances_checked))
}

fn layer_catalog() -> Outcome {
    use CycleType::*;
    let start = Instant::now();
    verified(Claim::Table21, &[])?;
    let counts: Vec<usize> = [(Four, Four), (Four, TwoTwo), (TwoTwo, Four), (TwoTwo, TwoTwo)]
        .iter()
        .map(|&(b, t)| enumerate_admissible_layers(b, t).len())
        .collect();
    if counts != [3, 2, 2, 9] {
        return Err(format!("counts {counts:?}"));
    }
    let dual: BTreeSet<_> = enumerate_admissible_layers(Four, TwoTwo).iter().map(|e| canonical_form(&e.layer.dual())).collect();
    let other: BTreeSet<_> = enumerate_admissible_layers(TwoTwo, Four).iter().map(|e| canonical_form(&e.layer)).collect();
    if dual != other {
        return Err("mixed cells are not dual".into());
    }
    let c4 = crown(2).map_err(|e| e.to_string())?;
    let direct = [
        (LayerName::K44Bar, k44bar()),
        (LayerName::C8, crown(4).map_err(|e| e.to_string())?),
        (LayerName::C4PlusC4, c4.disjoint_sum(&c4)),
    ];
    for (name, p) in direct {
        let entry = named_layer(name).ok_or(format!("{name} missing"))?;
        if is_isomorphic(&entry, &p).is_none() {
            return Err(format!("{name} differs from its construction"));
        }
    }
    within(start.elapsed(), Duration::from_secs(60), "catalog")?;
    Ok(format!("counts {counts:?}, duality and direct constructions match"))
}

fn towers_forward() -> Outcome {
    let six = verified(Claim::Cor36Fwd, &[("max_size", 12)])?;
    let eight = verified(Claim::Thm35Fwd, &[("max_size", 12)])?;
    Ok(format!("{} 6-towers and {} 8-towers automorphic", six.instances_checked, eight.instances_checked))
}

fn towers_backward() -> Outcome {
    let start = Instant::now();
    let six = verified(Claim::Cor36Bwd, &[("max_size", 10), ("max_width", 3)])?;
    let eight = verified(Claim::Thm35Bwd, &[("max_size", 9), ("max_width", 4)])?;
    within(start.elapsed(), Duration::from_secs(30 * 60), "backward sweeps")?;
    Ok(format!(
        "{} width-3 and {} width-4 ranked posets, minimal automorphic ones are towers",
        six.instances_checked, eight.instances_checked
    ))
}

fn six_stack_minimality() -> Outcome {
    let start = Instant::now();
    verified(Claim::Prop511, &[("max_rank", 3)])?;
    verified(Claim::Thm512, &[("max_rank", 3)])?;
    let budget = SearchBudget::default();
    let err = |e: fpp_core::Error| e.to_string();
    for n in 1..=3 {
        let p = six_stack(n).map_err(err)?;
        let minimal = is_minimal_automorphic(&p, &budget).map_err(err)?;
        let very_nice = is_very_nice(&p, &budget).map_err(err)?;
        let expected = n % 3 != 0;
        if minimal != expected || very_nice != expected {
            return Err(format!("rank {n}: minimal {minimal}, very nice {very_nice}"));
        }
        if n == 3 {
            let w = tower_of_sections_retract(&p, &budget).map_err(err)?.ok_or("no retract for rank 3")?;
            if !is_four_tower_subset(&p, w.subset) {
                return Err("rank 3 retract is not a 4-tower".into());
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(300), "subset scans")?;
    Ok("ranks 1, 2 minimal and very nice; rank 3 retracts onto a 4-tower".into())
}

fn constrained_retraction() -> Outcome {
    verified(Claim::Lemma59, &[])?;
    verified(Claim::Cor510, &[("max_k", 2)])?;
    let p = six_stack(3).map_err(|e| e.to_string())?;
    let subset = ["x0", "z0", "y1", "y2", "x3", "z3"]
        .iter()
        .fold(0u64, |acc, l| acc | 1 << p.index_of(l).expect("label"));
    let all = enumerate_retractions(&p, subset, &SearchBudget::default()).map_err(|e| e.to_string())?;
    let hits: Vec<_> = all.iter().filter(|f| f.apply_label("x1") == Some("x0")).collect();
    let [f] = hits.as_slice() else {
        return Err(format!("{} constrained retractions", hits.len()));
    };
    if f.apply_label("y0") != Some("x0") || f.apply_label("y3") != Some("z3") {
        return Err("wrong values at y0 or y3".into());
    }
    for k in 1..=2 {
        let (_, subset, g) = stacked_4tower_retraction(k).map_err(|e| e.to_string())?;
        if !g.is_retraction_onto(subset) {
            return Err(format!("k = {k} does not validate"));
        }
    }
    Ok(format!("1 of {} retractions has f(x1) = x0; k = 1, 2 validate", all.len()))
}

fn special_crowns() -> Outcome {
    let r = verified(Claim::Lemma31, &[("max_size", 6)])?;
    Ok(format!("{} posets without the property, all with a special crown retract", r.instances_checked))
}

fn nice_sections() -> Outcome {
    let r = verified(Claim::Prop42, &[("max_n", 3)])?;
    Ok(format!("{} sections checked, nice ones are the 6-stacks", r.instances_checked))
}

fn determinism() -> Outcome {
    let cases: [(Claim, &[(&str, usize)]); 5] = [
        (Claim::Prop41, &[("max_rank", 2)]),
        (Claim::Table21, &[]),
        (Claim::Lemma31, &[("max_size", 5)]),
        (Claim::Cor36Bwd, &[("max_size", 8), ("max_width", 3)]),
        (Claim::Lemma59, &[]),
    ];
    for (claim, params) in cases {
        let a = run(claim, params, 1)?.to_json();
        let b = run(claim, params, 1)?.to_json();
        let c = run(claim, params, 4)?.to_json();
        if a != b || a != c {
            return Err(format!("{claim} reports differ"));
        }
    }
    Ok(format!("{} suites byte-identical across runs and jobs 1, 4", cases.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("oracle equivalence, <= 6 elements", oracle_equivalence),
        ("width-2 characterization, <= 7 elements", width2),
        ("6-crown stackings collapse, ranks 1-3", stackings),
        ("layer catalog 3/2/2/9", layer_catalog),
        ("6- and 8-towers automorphic, <= 12 elements", towers_forward),
        ("minimal automorphic ranked posets are towers", towers_backward),
        ("6-stack minimality and very-niceness, ranks 1-3", six_stack_minimality),
        ("constrained retraction and stacked 4-towers", constrained_retraction),
        ("special generalized crown retracts, <= 6 elements", special_crowns),
        ("ranked nice sections, n <= 3", nice_sections),
        ("deterministic reports", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name} ({secs:.1}s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
