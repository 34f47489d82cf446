use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fpp-lab"));
    c.env_remove("FPP_LAB_BUDGET_NODES");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn gen_to(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let p = path.to_str().unwrap().to_string();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &p]);
    let o = run(&full);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    p
}

const C4: &str = r#"{"name":"c4","elements":["x0","x1","y0","y1"],"covers":[["x0","y0"],["x1","y0"],["x1","y1"],["x0","y1"]]}"#;

#[test]
fn check_fpp_on_c4_prints_witness() {
    let o = run_stdin(&["--json", "check", "fpp", "-"], C4);
    assert_eq!(code(&o), 1);
    assert_eq!(
        stdout(&o),
        "{\"fixed_point_free_map\":{\"x0\":\"x1\",\"x1\":\"x0\",\"y0\":\"y1\",\"y1\":\"y0\"},\"holds\":false,\"poset\":\"c4\",\"property\":\"fpp\"}\n"
    );
    let text = run_stdin(&["check", "fpp", "-"], C4);
    assert_eq!(code(&text), 1);
    assert!(stdout(&text).contains("fixed_point_free_map: x0->x1"));
}

#[test]
fn chain_has_fpp() {
    let chain = r#"{"name":"c","elements":["a","b"],"covers":[["a","b"]]}"#;
    assert_eq!(code(&run_stdin(&["check", "fpp", "-"], chain)), 0);
}

#[test]
fn six_stacks_are_nice_sections() {
    for n in 1..=3 {
        let g = run(&["gen", "six-stack", &n.to_string()]);
        assert_eq!(code(&g), 0);
        let c = run_stdin(&["check", "nice", "-"], &stdout(&g));
        assert_eq!(code(&c), 0, "rank {n}");
    }
}

#[test]
fn very_nice_and_minimality_follow_rank() {
    let dir = tempfile::tempdir().unwrap();
    for (n, expected) in [(1, 0), (2, 0), (3, 1)] {
        let f = gen_to(dir.path(), &format!("s{n}.json"), &["six-stack", &n.to_string()]);
        assert_eq!(code(&run(&["check", "very-nice", &f])), expected, "rank {n}");
        assert_eq!(code(&run(&["check", "minimal-automorphic", &f])), expected, "rank {n}");
        assert_eq!(code(&run(&["check", "automorphic", &f])), 0);
    }
}

#[test]
fn constrained_retraction_of_rank_three_stack() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_to(dir.path(), "s3.json", &["six-stack", "3"]);
    let subset = "x0,z0,y1,y2,x3,z3";
    let all = run(&["--json", "retract", &f, "--subset", subset, "--enumerate"]);
    assert_eq!(code(&all), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&all)).unwrap();
    assert_eq!(v["count"], 2);

    let one = run(&["--json", "retract", &f, "--subset", subset, "--enumerate", "--require", "x1=x0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&one)).unwrap();
    assert_eq!(v["count"], 1);
    let f0 = &v["retractions"][0];
    assert_eq!(f0["y0"], "x0");
    assert_eq!(f0["y3"], "z3");

    let none = run(&["retract", &f, "--subset", subset, "--require", "x1=x3"]);
    assert_eq!(code(&none), 1);
}

#[test]
fn retract_onto_non_retract_fails() {
    // x0 lies below both tops, so it has nowhere to go
    let o = run_stdin(&["retract", "-", "--subset", "y0,y1"], C4);
    assert_eq!(code(&o), 1);
    let o = run_stdin(&["retract", "-", "--subset", "x0,y0"], C4);
    assert_eq!(code(&o), 0);
    let chain3 = r#"{"name":"c","elements":["a","b","c"],"covers":[["a","b"],["b","c"]]}"#;
    assert_eq!(code(&run_stdin(&["retract", "-", "--subset", "a,c"], chain3)), 0);
    let v = r#"{"name":"v","elements":["a","b","c"],"covers":[["a","b"],["a","c"]]}"#;
    assert_eq!(code(&run_stdin(&["retract", "-", "--subset", "b,c"], v)), 1);
}

#[test]
fn classify_snapshot() {
    let o = run_stdin(&["--json", "classify", "-"], C4);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        concat!(
            "{\"antichain\":[\"y0\",\"y1\"],\"height\":1,\"levels\":[[\"x0\",\"x1\"],[\"y0\",\"y1\"]],\"nice\":null,",
            "\"not_a_tower\":null,\"poset\":\"c4\",\"ranked\":true,\"section\":false,\"size\":4,",
            "\"tower\":{\"blocks\":[{\"elements\":[\"x0\",\"x1\"],\"kind\":\"antichain2\",\"rank\":0},",
            "{\"elements\":[\"y0\",\"y1\"],\"kind\":\"antichain2\",\"rank\":0}]},\"tower_family\":\"four_tower\",\"width\":2}\n"
        )
    );
    let v = r#"{"name":"v","elements":["a","b","c"],"covers":[["a","b"],["a","c"]]}"#;
    let o = run_stdin(&["--json", "classify", "-"], v);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["tower"].is_null());
    assert!(v["not_a_tower"].is_string());
}

#[test]
fn verify_reports() {
    let o = run(&["verify", "prop41", "--param", "max_rank=3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("prop41: verified (258 instances"));

    let o = run(&["--json", "verify", "lemma59"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        concat!(
            "{\"claim\":\"lemma59\",\"params\":{},\"instances_checked\":7,\"counterexamples\":[],\"status\":\"verified\",",
            "\"details\":{\"constrained\":1,\"map\":{\"x0\":\"x0\",\"x1\":\"x0\",\"x2\":\"y1\",\"x3\":\"x3\",\"y0\":\"x0\",",
            "\"y1\":\"y1\",\"y2\":\"y2\",\"y3\":\"z3\",\"z0\":\"z0\",\"z1\":\"y2\",\"z2\":\"z3\",\"z3\":\"z3\"},\"retractions\":2}}\n"
        )
    );
}

#[test]
fn verify_report_file_is_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |p: &Path, jobs: &'static str| {
        vec![
            "--jobs".to_string(),
            jobs.to_string(),
            "verify".into(),
            "lemma31".into(),
            "--param".into(),
            "max_size=5".into(),
            "--report".into(),
            p.to_str().unwrap().to_string(),
        ]
    };
    assert_eq!(code(&bin().args(args(&a, "1")).output().unwrap()), 0);
    assert_eq!(code(&bin().args(args(&b, "3")).output().unwrap()), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["verify", "prop41", "--param", "max_rank=9"])), 2);
    assert_eq!(code(&run(&["verify", "no_such_claim"])), 3);
    assert_eq!(code(&run(&["verify", "prop41", "--param", "colour=3"])), 3);
    assert_eq!(code(&run(&["frobnicate"])), 3);
    assert_eq!(code(&run_stdin(&["check", "fpp", "-"], "{not json")), 3);
    let cyclic = r#"{"name":"x","elements":["a","b"],"covers":[["a","b"],["b","a"]]}"#;
    assert_eq!(code(&run_stdin(&["check", "fpp", "-"], cyclic)), 3);
    let empty = r#"{"name":"e","elements":[],"covers":[]}"#;
    assert_eq!(code(&run_stdin(&["check", "fpp", "-"], empty)), 3);
    assert_eq!(code(&run(&["--help"])), 0);

    let g = stdout(&run(&["gen", "six-stack", "3"]));
    let o = run_stdin(&["--budget-nodes", "5", "check", "fpp", "-"], &g);
    assert_eq!(code(&o), 2);
    let o = bin()
        .env("FPP_LAB_BUDGET_NODES", "5")
        .args(["check", "fpp", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .and_then(|mut c| {
            c.stdin.take().unwrap().write_all(g.as_bytes())?;
            c.wait_with_output()
        })
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_element_is_reported() {
    let bad = r#"{"name":"e","elements":["a"],"covers":[["a","b"]]}"#;
    let o = run_stdin(&["check", "fpp", "-"], bad);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`b`"));
}

#[test]
fn gen_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("s1.dot");
    let o = run(&["gen", "six-stack", "1", "--dot", dot.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let d = fs::read_to_string(&dot).unwrap();
    assert_eq!(d.matches("->").count(), 6);
    assert_eq!(d.matches("rank=same").count(), 2);

    let layers = stdout(&run(&["gen", "layers", "(2)(2)", "(2)(2)"]));
    assert_eq!(layers.lines().count(), 9);
    let layers = stdout(&run(&["gen", "layers", "4", "4"]));
    assert_eq!(layers.lines().count(), 3);

    let corpus = stdout(&run(&["gen", "corpus", "--max-size", "4"]));
    assert_eq!(corpus.lines().count(), 1 + 2 + 5 + 16);
    let ranked = stdout(&run(&["gen", "corpus", "--max-size", "6", "--max-width", "3", "--ranked"]));
    assert!(ranked.lines().all(|l| l.contains("\"elements\"")));

    let sections = stdout(&run(&["--json", "gen", "sections", "2"]));
    let nice = sections.lines().filter(|l| l.contains("\"nice\":true")).count();
    assert_eq!(nice, 1);

    let spec = dir.path().join("tower.json");
    fs::write(&spec, r#"{"summands":[{"kind":"six_stack","rank":1},{"kind":"antichain2"}]}"#).unwrap();
    let t = run(&["gen", "tower", spec.to_str().unwrap()]);
    assert_eq!(code(&t), 0);
    let c = run_stdin(&["--json", "classify", "-"], &stdout(&t));
    let v: serde_json::Value = serde_json::from_str(&stdout(&c)).unwrap();
    assert_eq!(v["tower_family"], "six_tower");
    assert_eq!(v["size"], 8);
}

#[test]
fn gen_round_trips_through_check() {
    let c = stdout(&run(&["gen", "crown", "3"]));
    assert_eq!(code(&run_stdin(&["check", "automorphic", "-"], &c)), 0);
    assert_eq!(code(&run_stdin(&["check", "fpp", "-"], &c)), 1);
    let t = stdout(&run(&["gen", "four-tower", "2"]));
    assert_eq!(code(&run_stdin(&["check", "tower-of-sections", "-"], &t)), 0);
    assert_eq!(code(&run_stdin(&["check", "section", "-"], &t)), 1);
}
