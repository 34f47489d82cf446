//! `fpp-lab`: generate posets, check fixed point and related properties,
//! search retractions, classify towers and replay the verification suites.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpp_core::enumerate::{corpus, CorpusFilter};
use fpp_core::io::{emit_dot, emit_poset, emit_poset_line, parse_poset_lines, DocumentError, PosetDocument};
use fpp_core::poset::label_set;
use fpp_core::search::{
    automorphic_proper_retract, enumerate_retractions, fixed_point_free_automorphism, has_fpp, retraction_exists,
};
use fpp_core::sections::{enumerate_sections, is_nice, is_section, is_tower_of_sections, tower_of_sections_retract};
use fpp_core::towers::{build_tower, classify_tower, crown, enumerate_admissible_layers, four_tower, six_stack, CycleType, TowerSpec};
use fpp_core::verify::{verify, Claim, Report, Status, VerifyOptions};
use fpp_core::{Error, OrderMap, Poset, SearchBudget};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "fpp-lab", version, about = "Finite posets and the fixed point property")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Backtracking nodes allowed per search.
    #[arg(long, global = true, env = "FPP_LAB_BUDGET_NODES")]
    budget_nodes: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct posets and write them as JSON.
    Gen {
        #[command(subcommand)]
        what: GenTarget,
        /// Write the documents here instead of stdout.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
        /// Also write a Graphviz diagram.
        #[arg(long, global = true)]
        dot: Option<PathBuf>,
    },
    /// Decide a property; exit 0 if it holds, 1 if not.
    Check {
        property: Property,
        /// Poset document, `-` for stdin.
        file: PathBuf,
    },
    /// Search retractions onto a subset.
    Retract {
        file: PathBuf,
        /// Comma-separated labels of the retract.
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<String>,
        /// List every retraction rather than the first.
        #[arg(long)]
        enumerate: bool,
        /// Keep only retractions with `f(a) = b`.
        #[arg(long = "require", value_name = "A=B")]
        require: Vec<String>,
    },
    /// Report width, rank profile, tower decomposition and section status.
    Classify { file: PathBuf },
    /// Run a verification suite, or `all`.
    Verify {
        /// width2, prop41, prop42, cor36_fwd, cor36_bwd, thm35_fwd, thm35_bwd, table21,
        /// prop511, thm512, lemma31, lemma59, cor510, lemmas56_58 or all.
        claim: String,
        /// Suite parameter `key=value`.
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<String>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenTarget {
    /// The crown on 2N elements.
    Crown { n: usize },
    /// The 4-crowns tower of rank R.
    FourTower { r: usize },
    /// The 6-stack of rank N.
    SixStack { n: usize },
    /// A tower from a JSON summand list.
    Tower { spec: PathBuf },
    /// Admissible layers for a pair of cycle types, e.g. `(4)` `(2)(2)`.
    Layers { bottom: String, top: String },
    /// Sections with parameter N, up to isomorphism.
    Sections { n: usize },
    /// Small posets up to isomorphism.
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    max_size: usize,
    #[arg(long)]
    max_width: Option<usize>,
    #[arg(long)]
    ranked: bool,
    #[arg(long)]
    max_rank: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Fpp,
    Automorphic,
    MinimalAutomorphic,
    Section,
    Nice,
    VeryNice,
    TowerOfSections,
}

impl Property {
    fn id(self) -> &'static str {
        match self {
            Property::Fpp => "fpp",
            Property::Automorphic => "automorphic",
            Property::MinimalAutomorphic => "minimal-automorphic",
            Property::Section => "section",
            Property::Nice => "nice",
            Property::VeryNice => "very-nice",
            Property::TowerOfSections => "tower-of-sections",
        }
    }
}

/// Exit codes: 0 holds, 1 does not hold, 2 budget, 3 usage or input.
enum Failure {
    Budget(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExhausted { .. } | Error::TooLarge { .. } => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        match e {
            DocumentError::Poset(p) => p.into(),
            syntax => Failure::Usage(syntax.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

struct Ctx {
    json: bool,
    budget: SearchBudget,
    jobs: usize,
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}

fn read_posets(path: &Path) -> Result<Vec<(PosetDocument, Poset)>, Failure> {
    let docs = parse_poset_lines(&read_input(path)?)?;
    if docs.is_empty() {
        return Err(Failure::Usage(format!("{}: no poset documents", path.display())));
    }
    docs.into_iter()
        .map(|d| {
            let p = d.to_poset()?;
            Ok((d, p))
        })
        .collect()
}

fn read_one(path: &Path) -> Result<(PosetDocument, Poset), Failure> {
    let mut all = read_posets(path)?;
    if all.len() != 1 {
        return Err(Failure::Usage(format!("{}: expected one poset, found {}", path.display(), all.len())));
    }
    Ok(all.remove(0))
}

fn nonempty(p: &Poset) -> Result<(), Failure> {
    if p.is_empty() {
        return Err(Error::EmptyPoset.into());
    }
    Ok(())
}

fn map_json(f: &OrderMap) -> Value {
    json!(f.as_label_map())
}

fn map_text(f: &OrderMap) -> String {
    f.as_label_map()
        .iter()
        .map(|(a, b)| format!("{a}->{b}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn labels_json(p: &Poset, set: u64) -> Value {
    json!(label_set(p, set))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn gen(ctx: &Ctx, what: GenTarget, out: Option<PathBuf>, dot: Option<PathBuf>) -> Outcome {
    let docs: Vec<PosetDocument> = match what {
        GenTarget::Crown { n } => vec![PosetDocument::from_poset(&format!("crown-{n}"), &crown(n)?)],
        GenTarget::FourTower { r } => vec![PosetDocument::from_poset(&format!("four-tower-{r}"), &four_tower(r))],
        GenTarget::SixStack { n } => vec![PosetDocument::from_poset(&format!("six-stack-{n}"), &six_stack(n)?)],
        GenTarget::Tower { spec } => {
            let text = read_input(&spec)?;
            let spec: TowerSpec = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("tower spec: {e}")))?;
            vec![PosetDocument::from_poset("tower", &build_tower(&spec)?)]
        }
        GenTarget::Layers { bottom, top } => {
            let b: CycleType = bottom.parse()?;
            let t: CycleType = top.parse()?;
            enumerate_admissible_layers(b, t)
                .iter()
                .map(|e| {
                    PosetDocument::from_poset(e.name.as_str(), &e.layer)
                        .with_metadata("bottom_type", json!(b.to_string()))
                        .with_metadata("top_type", json!(t.to_string()))
                        .with_metadata("witness", map_json(&e.witness()))
                })
                .collect()
        }
        GenTarget::Sections { n } => enumerate_sections(n)?
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let nice = is_nice(s).unwrap_or(false);
                PosetDocument::from_poset(&format!("section-{n}-{i}"), s).with_metadata("nice", json!(nice))
            })
            .collect(),
        GenTarget::Corpus(a) => {
            let filter = CorpusFilter {
                max_size: a.max_size,
                max_width: a.max_width,
                ranked_only: a.ranked,
                max_rank: a.max_rank,
            };
            corpus(&filter)?
                .iter()
                .enumerate()
                .map(|(i, p)| PosetDocument::from_poset(&format!("corpus-{i}"), p))
                .collect()
        }
    };
    let text = if docs.len() == 1 {
        emit_poset(&docs[0]) + "\n"
    } else {
        docs.iter().map(|d| emit_poset_line(d) + "\n").collect()
    };
    match out {
        Some(path) => write_text(&path, &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = dot {
        let mut graphs = String::new();
        for d in &docs {
            graphs.push_str(&emit_dot(&d.to_poset()?, &d.name));
        }
        write_text(&path, &graphs)?;
    }
    if !ctx.json && docs.is_empty() {
        eprintln!("no posets generated");
    }
    Ok(0)
}

/// Whether `property` holds, plus a witness or explanation.
fn decide(ctx: &Ctx, property: Property, p: &Poset) -> Result<(bool, Value), Failure> {
    let b = &ctx.budget;
    Ok(match property {
        Property::Fpp => {
            nonempty(p)?;
            let v = has_fpp(p, b)?;
            (v.has_fpp, json!({ "fixed_point_free_map": v.witness.as_ref().map(map_json) }))
        }
        Property::Automorphic => {
            nonempty(p)?;
            let f = fixed_point_free_automorphism(p, b)?;
            (f.is_some(), json!({ "automorphism": f.as_ref().map(map_json) }))
        }
        Property::MinimalAutomorphic => {
            nonempty(p)?;
            match fixed_point_free_automorphism(p, b)? {
                None => (false, json!({ "automorphism": null, "automorphic_retract": null })),
                Some(f) => {
                    let r = automorphic_proper_retract(p, b)?;
                    (
                        r.is_none(),
                        json!({
                            "automorphism": map_json(&f),
                            "automorphic_retract": r.map(|w| json!({
                                "subset": labels_json(p, w.subset),
                                "retraction": map_json(&w.retraction),
                            })),
                        }),
                    )
                }
            }
        }
        Property::Section => (is_section(p), json!({})),
        Property::Nice => {
            if !is_section(p) {
                (false, json!({ "section": false }))
            } else {
                (is_nice(p)?, json!({ "section": true }))
            }
        }
        Property::VeryNice => {
            if !is_section(p) {
                (false, json!({ "section": false, "tower_retract": null }))
            } else {
                let r = tower_of_sections_retract(p, b)?;
                (
                    r.is_none(),
                    json!({
                        "section": true,
                        "tower_retract": r.map(|w| json!({
                            "subset": labels_json(p, w.subset),
                            "retraction": map_json(&w.retraction),
                        })),
                    }),
                )
            }
        }
        Property::TowerOfSections => {
            let d = is_tower_of_sections(p);
            (d.is_some(), json!({ "decomposition": d }))
        }
    })
}

fn check(ctx: &Ctx, property: Property, file: &Path) -> Outcome {
    let mut code = 0;
    for (doc, p) in read_posets(file)? {
        let (holds, detail) = decide(ctx, property, &p)?;
        if !holds {
            code = 1;
        }
        if ctx.json {
            let mut out = json!({ "property": property.id(), "poset": doc.name, "holds": holds });
            if let (Value::Object(o), Value::Object(d)) = (&mut out, detail) {
                o.extend(d);
            }
            println!("{out}");
        } else {
            let name = if doc.name.is_empty() { "poset" } else { &doc.name };
            println!("{name}: {} {}", property.id(), if holds { "holds" } else { "fails" });
            if let Value::Object(d) = detail {
                for (k, v) in d {
                    match v {
                        Value::Null => {}
                        Value::Object(m) if m.values().all(Value::is_string) => {
                            let pairs: Vec<String> = m.iter().map(|(a, b)| format!("{a}->{}", b.as_str().unwrap_or(""))).collect();
                            println!("  {k}: {}", pairs.join(" "));
                        }
                        other => println!("  {k}: {other}"),
                    }
                }
            }
        }
    }
    Ok(code)
}

fn retract(ctx: &Ctx, file: &Path, subset: &[String], enumerate: bool, require: &[String]) -> Outcome {
    let (doc, p) = read_one(file)?;
    let positions = p.indices_of(subset)?;
    let mask = positions.iter().fold(0u64, |acc, &i| acc | 1 << i);
    let mut constraints = Vec::new();
    for r in require {
        let (a, b) = r
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--require expects A=B, got `{r}`")))?;
        let [a, b] = [a.trim(), b.trim()].map(|l| p.index_of(l).ok_or_else(|| Error::UnknownElement(l.to_string())));
        constraints.push((a?, b?));
    }
    let meets = |f: &OrderMap| constraints.iter().all(|&(a, b)| f.apply(a) == b);
    let maps: Vec<OrderMap> = if enumerate || !constraints.is_empty() {
        let all = enumerate_retractions(&p, mask, &ctx.budget)?;
        let kept: Vec<OrderMap> = all.into_iter().filter(|f| meets(f)).collect();
        if enumerate {
            kept
        } else {
            kept.into_iter().take(1).collect()
        }
    } else {
        retraction_exists(&p, mask, &ctx.budget)?.into_iter().collect()
    };
    if ctx.json {
        let mut out = json!({
            "poset": doc.name,
            "subset": labels_json(&p, mask),
            "retract": !maps.is_empty(),
        });
        if enumerate {
            out["count"] = json!(maps.len());
            out["retractions"] = json!(maps.iter().map(map_json).collect::<Vec<_>>());
        } else {
            out["retraction"] = maps.first().map(map_json).unwrap_or(Value::Null);
        }
        println!("{out}");
    } else if enumerate {
        println!("{} retractions", maps.len());
        for f in &maps {
            println!("  {}", map_text(f));
        }
    } else {
        match maps.first() {
            Some(f) => println!("retraction: {}", map_text(f)),
            None => println!("no retraction"),
        }
    }
    Ok(if maps.is_empty() { 1 } else { 0 })
}

fn classify(ctx: &Ctx, file: &Path) -> Outcome {
    let (doc, p) = read_one(file)?;
    nonempty(&p)?;
    let width = p.width()?;
    let profile = p.rank_structure()?;
    let levels: Vec<Vec<String>> = profile
        .levels
        .iter()
        .map(|l| l.iter().map(|&e| p.label(e).to_string()).collect())
        .collect();
    let tower = classify_tower(&p);
    let section = is_section(&p);
    let nice = if section { Some(is_nice(&p)?) } else { None };
    let antichain: Vec<&str> = width.antichain.iter().map(|&e| p.label(e)).collect();
    if ctx.json {
        let (decomposition, family, reason) = match &tower {
            Ok(d) => (json!(d), json!(d.family()), Value::Null),
            Err(e) => (Value::Null, Value::Null, json!(e.to_string())),
        };
        let out = json!({
            "poset": doc.name,
            "size": p.len(),
            "width": width.width,
            "antichain": antichain,
            "ranked": profile.is_ranked,
            "height": profile.height,
            "levels": levels,
            "tower": decomposition,
            "tower_family": family,
            "not_a_tower": reason,
            "section": section,
            "nice": nice,
        });
        println!("{out}");
    } else {
        println!("size: {}", p.len());
        println!("width: {} ({})", width.width, antichain.join(", "));
        println!("ranked: {}, height {}", profile.is_ranked, profile.height);
        for (i, l) in levels.iter().enumerate() {
            println!("  P({i}): {}", l.join(", "));
        }
        match &tower {
            Ok(d) => {
                let family = serde_json::to_value(d.family()).unwrap_or(Value::Null);
                println!("tower: {}", family.as_str().unwrap_or("?"));
                for b in &d.blocks {
                    let kind = serde_json::to_value(b.kind).unwrap_or(Value::Null);
                    println!("  {} rank {}: {}", kind.as_str().unwrap_or("?"), b.rank, b.elements.join(", "));
                }
            }
            Err(e) => println!("tower: no ({e})"),
        }
        match nice {
            Some(n) => println!("section: yes, nice {n}"),
            None => println!("section: no"),
        }
    }
    Ok(0)
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, String>, Failure> {
    raw.iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Failure::Usage(format!("--param expects key=value, got `{kv}`")))
        })
        .collect()
}

fn run_verify(ctx: &Ctx, claim: &str, params: &[String], report: Option<PathBuf>) -> Outcome {
    let given = parse_params(params)?;
    let claims: Vec<Claim> = if claim == "all" {
        if !given.is_empty() {
            return Err(Failure::Usage("--param needs a single claim".into()));
        }
        Claim::ALL.to_vec()
    } else {
        vec![claim.parse()?]
    };
    let options = VerifyOptions {
        budget: ctx.budget,
        jobs: ctx.jobs,
    };
    let reports: Vec<Report> = claims.iter().map(|&c| verify(c, &given, &options)).collect::<Result<_, _>>()?;
    let lines: String = reports.iter().map(|r| r.to_json() + "\n").collect();
    if let Some(path) = report {
        write_text(&path, &lines)?;
    }
    if ctx.json {
        print!("{lines}");
    } else {
        for r in &reports {
            let status = serde_json::to_value(r.status).unwrap_or(Value::Null);
            println!(
                "{}: {} ({} instances, {:.2}s)",
                r.claim,
                status.as_str().unwrap_or("?"),
                r.instances_checked,
                r.wall_time.as_secs_f64()
            );
            for c in &r.counterexamples {
                println!("  counterexample {}: {}", c.poset.name, c.context);
            }
        }
    }
    let worst = if reports.iter().any(|r| r.status == Status::Refuted) {
        Status::Refuted
    } else if reports.iter().any(|r| r.status == Status::BudgetExhausted) {
        Status::BudgetExhausted
    } else {
        Status::Verified
    };
    Ok(worst.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let mut budget = SearchBudget::default();
    if let Some(n) = cli.budget_nodes {
        budget.max_nodes = n;
    }
    budget.parallel_fanout = cli.jobs;
    let ctx = Ctx {
        json: cli.json,
        budget,
        jobs: cli.jobs,
    };
    let outcome = match cli.command {
        Command::Gen { what, out, dot } => gen(&ctx, what, out, dot),
        Command::Check { property, file } => check(&ctx, property, &file),
        Command::Retract {
            file,
            subset,
            enumerate,
            require,
        } => retract(&ctx, &file, &subset, enumerate, &require),
        Command::Classify { file } => classify(&ctx, &file),
        Command::Verify { claim, params, report } => run_verify(&ctx, &claim, &params, report),
    };
    let _ = io::stdout().flush();
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Budget(msg)) => {
            eprintln!("fpp-lab: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("fpp-lab: {msg}");
            ExitCode::from(3)
        }
    }
}
