use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_solenoid"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Punctured torus with λ on `0→∞`, `0→1` and `1→∞`.
fn torus(x: &str, y: &str, z: &str) -> String {
    format!(
        r#"{{"group":{{"type":"commutator"}},"flips":[],"lambda":[
            {{"edge":["0/1","1/0"],"value":"{x}"}},
            {{"edge":["0/1","1/1"],"value":"{y}"}},
            {{"edge":["1/1","1/0"],"value":"{z}"}}]}}"#
    )
}

fn indicator(tail: &str, head: &str) -> String {
    let edges = [("0/1", "1/0"), ("0/1", "1/1"), ("1/1", "1/0")];
    let items: Vec<String> = edges
        .iter()
        .map(|(a, b)| {
            let v = if (*a, *b) == (tail, head) { "1" } else { "0" };
            format!(r#"{{"edge":["{a}","{b}"],"value":"{v}"}}"#)
        })
        .collect();
    format!("[{}]", items.join(","))
}

#[test]
fn delaunay_of_unity_is_trivial() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "s.json", &torus("1", "1", "1"));
    let o = run(&["delaunay", s(&f)]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["flips"], Value::Array(vec![]));
    assert_eq!(doc["removed"], Value::Array(vec![]));
}

#[test]
fn delaunay_flips_once_and_is_then_stable() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "s.json", &torus("2", "1", "1"));
    let o = run(&["delaunay", s(&f)]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["flips"].as_array().unwrap().len(), 1);

    // Feeding the final structure back needs no further flips.
    let again = write(&dir, "t.json", &doc["structure"].to_string());
    let o = run(&["delaunay", s(&again)]);
    let redo: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(redo["flips"], Value::Array(vec![]));
    assert_eq!(redo["structure"], doc["structure"]);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", &torus("1/0x", "1", "1"));
    assert_eq!(run(&["delaunay", s(&bad)]).status.code(), Some(2));
    let garbage = write(&dir, "garbage.json", "{not json");
    assert_eq!(run(&["delaunay", s(&garbage)]).status.code(), Some(2));
    let decimal = write(&dir, "dec.json", &torus("2.0", "1", "1"));
    assert_eq!(run(&["delaunay", s(&decimal)]).status.code(), Some(2));
    assert_eq!(run(&["--approx", "20", "delaunay", s(&decimal)]).status.code(), Some(0));
    assert_eq!(run(&["--approx", "8", "delaunay", s(&decimal)]).status.code(), Some(2));

    let needs_flip = write(&dir, "s.json", &torus("2", "1", "1"));
    assert_eq!(run(&["--max-flips", "0", "delaunay", s(&needs_flip)]).status.code(), Some(3));
    assert_eq!(run(&["flip", s(&needs_flip), "0/1", "2/1"]).status.code(), Some(2));
}

#[test]
fn wp_values() {
    let dir = TempDir::new().unwrap();
    let st = write(&dir, "s.json", &torus("1", "1", "1"));
    let u = write(&dir, "u.json", &indicator("0/1", "1/0"));
    let v = write(&dir, "v.json", &indicator("0/1", "1/1"));
    let o = run(&["wp", s(&st), s(&u), s(&v)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("-4/1"));
    assert_eq!(lines.next(), Some("-4.00000000000000000000"));

    let o = run(&["wp", s(&st), s(&u), s(&u)]);
    assert_eq!(stdout(&o).lines().next(), Some("0/1"));
    assert_eq!(stdout(&o), stdout(&run(&["wp", s(&st), s(&u), s(&u)])));

    let short = write(&dir, "w.json", r#"[{"edge":["0/1","1/0"],"value":"1"}]"#);
    assert_eq!(run(&["wp", s(&st), s(&u), s(&short)]).status.code(), Some(2));
    let foreign = write(&dir, "x.json", r#"[{"edge":["0/1","2/1"],"value":"1"}]"#);
    assert_eq!(run(&["wp", s(&st), s(&u), s(&foreign)]).status.code(), Some(2));
}

#[test]
fn flip_applies_ptolemy() {
    let dir = TempDir::new().unwrap();
    let st = write(&dir, "s.json", &torus("1", "1", "1"));
    let o = run(&["flip", s(&st), "0/1", "1/0"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // (1·1 + 1·1)/1 on the new diagonal.
    let values: Vec<&str> = doc["lambda"].as_array().unwrap().iter().map(|x| x["value"].as_str().unwrap()).collect();
    assert_eq!(values.iter().filter(|v| **v == "2/1").count(), 1);
    assert_eq!(doc["flips"].as_array().unwrap().len(), 1);
}

#[test]
fn relations_subcommand() {
    for name in ["involutivity", "commutativity", "pentagon", "coset"] {
        let o = run(&["--seed", "7", "relations", name, "--count", "5"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert_eq!(stdout(&o).matches(": pass").count(), 5);
    }
    assert_eq!(run(&["relations", "associativity"]).status.code(), Some(2));
}

fn arcs(svg: &str) -> Vec<(String, String)> {
    svg.lines()
        .filter(|l| l.contains(r#"class="edge""#))
        .map(|l| {
            let attr = |name: &str| {
                let start = l.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
                l[start..].split('"').next().unwrap().to_string()
            };
            (attr("data-tail"), attr("data-head"))
        })
        .collect()
}

#[test]
fn render_counts_and_determinism() {
    let dir = TempDir::new().unwrap();
    let tau = write(&dir, "tau.json", r#"{"group":{"type":"full"}}"#);
    let a = run(&["render", s(&tau), "--depth", "4"]);
    assert_eq!(a.status.code(), Some(0));
    // Three edges at the root triangle, then two new ones per added triangle.
    assert_eq!(arcs(&stdout(&a)).len(), 3 + 2 * 3 * ((1 << 4) - 1));
    assert_eq!(a.stdout, run(&["render", s(&tau), "--depth", "4"]).stdout);
    assert_eq!(run(&["render", s(&tau), "--depth", "11"]).status.code(), Some(2));

    let out = dir.path().join("tau.svg");
    assert_eq!(run(&["render", s(&tau), "--depth", "4", "-o", s(&out)]).status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
}

#[test]
fn render_flipped_and_paving() {
    let dir = TempDir::new().unwrap();
    let plain = write(&dir, "t.json", r#"{"group":{"type":"commutator"}}"#);
    let flipped = write(&dir, "f.json", r#"{"group":{"type":"commutator"},"flips":[["0/1","1/0"]]}"#);
    let e0 = ("0/1".to_string(), "1/0".to_string());
    let dual = ("-1/1".to_string(), "1/1".to_string());
    let before = arcs(&stdout(&run(&["render", s(&plain), "--depth", "1"])));
    let after = arcs(&stdout(&run(&["render", s(&flipped), "--depth", "1"])));
    assert!(before.contains(&e0) && !before.contains(&dual));
    assert!(after.contains(&dual) && !after.contains(&e0));

    let st = write(&dir, "s.json", &torus("5", "3", "4"));
    let o = run(&["delaunay", s(&st)]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["removed"].as_array().unwrap().len(), 1);
    let paving = write(&dir, "p.json", &stdout(&o));
    let svg = stdout(&run(&["render", s(&paving), "--depth", "2"]));
    assert!(svg.contains("stroke-dasharray"));
    assert!(!stdout(&run(&["render", s(&st), "--depth", "2"])).contains("stroke-dasharray"));
}

#[test]
fn words_normalform_and_equals() {
    let dir = TempDir::new().unwrap();
    let mixed = write(
        &dir,
        "w.json",
        r#"{"base":[[1,0],[0,1]],"word":[
            {"group":{"type":"congruence","level":2},"edge":["0/1","1/0"]},
            {"group":{"type":"commutator"},"edge":["0/1","1/1"]}]}"#,
    );
    let o = run(&["normalform", s(&mixed)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let groups: Vec<&Value> = doc["word"].as_array().unwrap().iter().map(|g| &g["group"]).collect();
    assert!(groups.windows(2).all(|w| w[0] == w[1]));
    let normal = write(&dir, "n.json", &stdout(&o));
    assert_eq!(stdout(&run(&["equals", s(&mixed), s(&normal)])), "true\n");

    let identity = write(&dir, "i.json", r#"{"base":[[1,0],[0,1]],"word":[]}"#);
    assert_eq!(stdout(&run(&["equals", s(&mixed), s(&identity)])), "false\n");
    let bad = write(&dir, "b.json", r#"{"base":[[2,0],[0,1]],"word":[]}"#);
    assert_eq!(run(&["equals", s(&bad), s(&identity)]).status.code(), Some(2));
}
