// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gedmine_core::parse_rules;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/running_example").join(name)
}

fn gedmine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gedmine"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn graph_args() -> Vec<String> {
    vec![
        "--nodes".into(),
        fixture("nodes.csv").display().to_string(),
        "--edges".into(),
        fixture("edges.csv").display().to_string(),
    ]
}

fn run(sub: &str, extra: &[&str]) -> Output {
    let g = graph_args();
    let mut args: Vec<&str> = vec![sub];
    args.extend(g.iter().map(String::as_str));
    args.extend_from_slice(extra);
    gedmine(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn discover_to(out: &Path, extra: &[&str]) -> Output {
    let out = out.display().to_string();
    let mut args = vec!["--out", out.as_str(), "--gamma", "0.01", "--tau", "2"];
    args.extend_from_slice(extra);
    run("discover", &args)
}

#[test]
fn help_and_version_exit_zero() {
    let o = gedmine(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for sub in ["discover", "validate", "match", "communities"] {
        assert!(stdout(&o).contains(sub));
    }
    assert_eq!(gedmine(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(gedmine(&[]).status.code(), Some(1));
    assert_eq!(gedmine(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run("communities", &["--gamma", "abc"]).status.code(), Some(1));
    assert_eq!(run("communities", &["--gamma", "0"]).status.code(), Some(1));
    assert_eq!(run("communities", &["--workers", "0"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let o = discover_to(&dir.path().join("r.jsonl"), &["--alpha", "2"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = discover_to(&dir.path().join("r.jsonl"), &["--mode", "xyz"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn data_errors_exit_two() {
    let o = gedmine(&["communities", "--nodes", "/nonexistent.csv", "--edges", "/nonexistent.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error:"));
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.csv");
    fs::write(&edges, "src,label,dst\n1,create,99\n").unwrap();
    let nodes = fixture("nodes.csv").display().to_string();
    let edges = edges.display().to_string();
    let o = gedmine(&["communities", "--nodes", &nodes, "--edges", &edges]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let rules = dir.path().join("rules.jsonl");
    fs::write(&rules, "not json\n").unwrap();
    let o = run("validate", &["--rules", rules.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn discover_writes_rules_that_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rules.jsonl");
    let o = discover_to(&out, &["--top-k", "7", "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("stage=dependencies"), "{err}");
    assert!(err.contains("summary communities="), "{err}");
    let rules = parse_rules(File::open(&out).unwrap()).unwrap();
    assert_eq!(rules.len(), 7);
    assert!(rules.iter().all(|r| r.rank.is_some()));

    let o = run("validate", &["--rules", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    for (i, line) in lines.iter().enumerate() {
        assert!(line.starts_with(&format!("rule={} holds=true violations=0 rule_text=", i + 1)), "{line}");
    }
}

#[test]
fn discover_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    assert!(discover_to(&a, &["--workers", "1"]).status.success());
    assert!(discover_to(&b, &["--workers", "3"]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn validate_lists_violations() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.jsonl");
    let rule = r#"{"pattern":{"nodes":[{"var":"x","label":"company"},{"var":"y","label":"product"}],"edges":[{"src":"x","label":"create","dst":"y"}]},"lhs":[],"rhs":[{"kind":"variable","var":"x","attr":"name","other_var":"y","other_attr":"creator"}]}"#;
    fs::write(&rules, format!("{rule}\n")).unwrap();
    let nodes = fixture("nodes_creator.csv").display().to_string();
    let edges = fixture("edges.csv").display().to_string();
    let o = gedmine(&["validate", "--nodes", &nodes, "--edges", &edges, "--rules", rules.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("rule=1 holds=false violations=1 "), "{text}");
    assert_eq!(lines[1], "  violation x=2 y=6");
}

#[test]
fn match_prints_csv_table() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.json");
    fs::write(
        &q,
        r#"{"nodes":[{"var":"x","label":"company"},{"var":"y","label":"product"}],"edges":[{"src":"x","label":"create","dst":"y"}]}"#,
    )
    .unwrap();
    let o = run("match", &["--pattern", q.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x.id,x.country,x.name,y.id,y.name"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.contains(&"1,USA,EA,4,F20"));

    let out = dir.path().join("m.csv");
    let o = run("match", &["--pattern", q.to_str().unwrap(), "--isomorphic", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap(), text);

    fs::write(&q, "{").unwrap();
    assert_eq!(run("match", &["--pattern", q.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn communities_prints_every_node() {
    let o = run("communities", &["--gamma", "0.01", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("id,community"));
    let rows: Vec<(String, String)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.to_string(), b.to_string())
        })
        .collect();
    assert_eq!(rows.len(), 15);
    let ids: Vec<&str> = rows.iter().map(|(a, _)| a.as_str()).collect();
    for v in 0..15 {
        assert!(ids.contains(&v.to_string().as_str()));
    }
    let c13 = &rows.iter().find(|(a, _)| a == "13").unwrap().1;
    assert_eq!(rows.iter().filter(|(_, c)| c == c13).count(), 1);
    assert_eq!(run("communities", &["--gamma", "0.01", "--seed", "4"]).stdout, o.stdout);
}
