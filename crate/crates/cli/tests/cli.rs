use std::path::PathBuf;
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn looplock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_looplock"))
        .args(args)
        .current_dir(root())
        .env("LOOPLOCK_COLOR", "never")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn assert_valid(schema: &str, instance: &Value) {
    let raw: Value =
        serde_json::from_str(&std::fs::read_to_string(root().join("schemas").join(schema)).unwrap()).unwrap();
    let compiled = JSONSchema::compile(&raw).unwrap();
    let msgs: Vec<String> = match compiled.validate(instance) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    panic!("{schema}: {msgs:?}\n{instance}");
}

#[test]
fn check_accepts_the_examples() {
    for f in ["examples/msg.spec", "examples/delay.spec"] {
        let o = looplock(&["check", f]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let o = looplock(&["check", "examples/delay.spec"]);
    assert!(stdout(&o).contains("sys Delay : [Id ^ T _ T ◁ Id ^ T _ T]^1  (loop state T)"));
}

#[test]
fn check_names_the_failing_rule() {
    let o = looplock(&["check", "examples/mismatch.spec"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("α"), "{}", stderr(&o));
}

#[test]
fn syntax_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.spec");
    std::fs::write(&p, "type T;\nfn f : T -> ;\n").unwrap();
    let o = looplock(&["check", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.spec:2:13: syntax error"), "{}", stderr(&o));
}

#[test]
fn verify_exit_codes_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = looplock(&[
        "verify",
        "examples/msg.spec",
        "--spec",
        "S",
        "--plant",
        "P",
        "--controller",
        "C",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_valid("verdict.schema.json", &r);
    assert_eq!(r["verdict"], "similar");

    let o = looplock(&[
        "verify",
        "examples/msg.spec",
        "--spec",
        "S",
        "--plant",
        "P",
        "--controller",
        "Cbad",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_valid("verdict.schema.json", &r);
    assert_eq!(r["counterexample"]["unmatched"]["function"], "send");

    let o = looplock(&[
        "verify",
        "examples/msg.spec",
        "--spec",
        "S",
        "--plant",
        "P",
        "--controller",
        "Nope",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compose_output_checks_on_its_own() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pc.spec");
    let o = looplock(&[
        "compose",
        "examples/msg.spec",
        "--plant",
        "P",
        "--controller",
        "C",
        "--name",
        "PC",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = looplock(&["check", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("sys PC : [Id ◁ Id]^WORLD"));
    // the composed closed loop still satisfies the specification
    let text = std::fs::read_to_string(&out).unwrap()
        + "sys S : Id = mu(lift([send, pi1] . d1 . recv) . omega);\nsys Unit : Id @ WORLD = mu(omega);\n";
    std::fs::write(&out, text).unwrap();
    let o = looplock(&[
        "verify",
        out.to_str().unwrap(),
        "--spec",
        "S",
        "--plant",
        "PC",
        "--controller",
        "Unit",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn dot_export_has_one_node_per_state() {
    let base = [
        "elaborate",
        "examples/delay.spec",
        "--plant",
        "Delay",
        "--controller",
        "Feed",
    ];
    let dot = looplock(&[&base[..], &["--emit", "dot"]].concat());
    let json = looplock(&[&base[..], &["--emit", "json"]].concat());
    assert_eq!(dot.status.code(), Some(0), "{}", stderr(&dot));
    let j: Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_valid("automaton.schema.json", &j);
    let nodes = stdout(&dot)
        .lines()
        .filter(|l| l.trim_start().starts_with('q') && !l.contains("->"))
        .count();
    assert_eq!(nodes, j["states"].as_array().unwrap().len());
    assert!(stdout(&dot).starts_with("digraph"));
    assert!(!stdout(&dot).contains("<<"));
}

#[test]
fn staged_elaboration_validates() {
    for flags in [
        &["--eps-eliminate"][..],
        &["--commutative-extension"],
        &["--eps-eliminate", "--commutative-extension"],
    ] {
        let mut args = vec![
            "elaborate",
            "examples/msg.spec",
            "--plant",
            "P",
            "--controller",
            "C",
            "--emit",
            "json",
        ];
        args.extend_from_slice(flags);
        let o = looplock(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let j: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_valid("automaton.schema.json", &j);
        let has_eps = j["transitions"].as_array().unwrap().iter().any(|t| t["kind"] == "eps");
        if flags == ["--eps-eliminate"] || flags.len() == 2 {
            assert!(!has_eps);
        }
    }
    let o = looplock(&["elaborate", "examples/delay.spec", "--system", "Delay"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_scripted_world() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let o = looplock(&[
        "simulate",
        "examples/msg.spec",
        "--plant",
        "P",
        "--controller",
        "C",
        "--interp",
        "examples/msg.world.json",
        "--param",
        "0",
        "--cycles",
        "6",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_valid("diamond.schema.json", &out);
    let d = out["diamond"].as_array().unwrap();
    let has = |f: &str, a: Value| d.iter().any(|e| e["function"] == f && e["argument"] == a);
    assert!(has("recv", serde_json::json!(0)));
    // the message 7 arrives from world 1 and is sent back from world 2
    assert!(has("send", serde_json::json!([2, 7])));
    let sends: Vec<_> = d.iter().filter(|e| e["function"] == "send").collect();
    assert_eq!(sends.len(), 1);
    let lines = std::fs::read_to_string(&trace).unwrap();
    assert!(!lines.is_empty());
    for l in lines.lines() {
        assert_valid("trace.schema.json", &serde_json::from_str(l).unwrap());
    }
}

#[test]
fn unicode_and_colour() {
    let o = looplock(&[
        "--unicode",
        "compose",
        "examples/msg.spec",
        "--plant",
        "P",
        "--controller",
        "C",
    ]);
    assert!(stdout(&o).contains("⌈"), "{}", stdout(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_looplock"))
        .args([
            "verify",
            "examples/msg.spec",
            "--spec",
            "S",
            "--plant",
            "P",
            "--controller",
            "C",
        ])
        .current_dir(root())
        .env("LOOPLOCK_COLOR", "always")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("\x1b[32msimilar"));
}
