use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chorefair"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn gen(dir: &Path, name: &str, agents: usize, chores: usize, seed: u64) -> PathBuf {
    let out = path(dir, name);
    let o = run(&[
        "gen",
        "--agents",
        &agents.to_string(),
        "--chores",
        &chores.to_string(),
        "--maxd",
        "12",
        "--seed",
        &seed.to_string(),
        "-o",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn gen_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.json", 3, 6, 11);
    let b = gen(dir.path(), "b.json", 3, 6, 11);
    let c = gen(dir.path(), "c.json", 3, 6, 12);
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    assert_ne!(ta, std::fs::read(&c).unwrap());
    let v = read(&a);
    assert_eq!(v["agents"], 3);
    assert_eq!(v["chores"], 6);
}

#[test]
fn generated_instance_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "g.json");
    let o = run(&[
        "gen",
        "--agents",
        "4",
        "--chores",
        "8",
        "--maxd",
        "20",
        "--seed",
        "7",
        "--format",
        "json",
        "-o",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let inst: chorefair::Instance = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((inst.agents(), inst.chores()), (4, 8));
    assert!(inst
        .rows()
        .iter()
        .flatten()
        .all(|v| *v >= chorefair::rational::int(1) && *v <= chorefair::rational::int(20)));
    assert_eq!(
        serde_json::to_string_pretty(&inst).unwrap() + "\n",
        std::fs::read_to_string(&out).unwrap()
    );
    let o = run(&["gen", "--agents", "0", "--chores", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn solve_surplus_output_reverifies() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..4 {
        let inst = gen(dir.path(), "i.json", 3, 6, seed);
        let out = path(dir.path(), "s.json");
        let trace = path(dir.path(), "t.json");
        let o = run(&["solve-surplus", "-i", s(&inst), "-o", s(&out), "--trace", s(&trace)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v = read(&out);
        assert!(v["surplus"].as_u64().unwrap() <= 2);
        assert!(v["certificates"].as_array().unwrap().iter().all(|c| c["holds"] == true));
        assert!(read(&trace)["events"].is_array());
        for prop in ["ef1", "pef1", "fisher", "fpo", "po"] {
            let o = run(&["verify", "-i", s(&inst), "--alloc", s(&out), "--property", prop]);
            assert_eq!(
                code(&o),
                0,
                "seed {seed} {prop}: {}",
                String::from_utf8_lossy(&o.stdout)
            );
        }
    }
}

#[test]
fn exact_solver_flag_and_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.json", 3, 5, 3);
    let out = path(dir.path(), "s.json");
    let o = run(&["solve-surplus", "-i", s(&inst), "-o", s(&out), "--exact"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out)["epsilon"], 0);
    let o = run(&["solve-surplus", "-i", s(&inst), "-o", s(&out), "--epsilon", "1/40"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(&out)["epsilon"], "1/40");
}

#[test]
fn solve_three_output_reverifies() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..4 {
        let inst = gen(dir.path(), "i.json", 3, 7, seed);
        let out = path(dir.path(), "th.json");
        let o = run(&["solve-three", "-i", s(&inst), "-o", s(&out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v = read(&out);
        let prop = if v["kind"] == "tEFX" { "tefx" } else { "prop" };
        let o = run(&["verify", "-i", s(&inst), "--alloc", s(&out), "--property", prop]);
        assert_eq!(code(&o), 0);
    }
}

#[test]
fn solve_three_rejects_two_agents() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.json", 2, 4, 0);
    let o = run(&["solve-three", "-i", s(&inst)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn violated_property_exits_one_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "i.json");
    std::fs::write(
        &inst,
        r#"{"agents": 2, "chores": 3, "disutility": [[1, 1, 1], [1, 1, 1]]}"#,
    )
    .unwrap();
    let alloc = path(dir.path(), "a.json");
    std::fs::write(
        &alloc,
        r#"[[{"chore": 0, "copy": 0}, {"chore": 1, "copy": 0}, {"chore": 2, "copy": 0}], []]"#,
    )
    .unwrap();
    let o = run(&["verify", "-i", s(&inst), "--alloc", s(&alloc), "--property", "ef1"]);
    assert_eq!(code(&o), 1);
    let cert: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cert["holds"], false);
    assert_eq!(cert["witness"]["kind"], "envy");
    let o = run(&["verify", "-i", s(&inst), "--alloc", s(&alloc), "--property", "po"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn empty_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.json", 2, 0, 0);
    let out = path(dir.path(), "s.json");
    let o = run(&["solve-surplus", "-i", s(&inst), "-o", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read(&out);
    assert_eq!(v["surplus"], 0);
    assert_eq!(v["allocation"], serde_json::json!([[], []]));
    let o = run(&["verify", "-i", s(&inst), "--alloc", s(&out), "--property", "ef1"]);
    assert_eq!(code(&o), 0);

    let three = gen(dir.path(), "t.json", 3, 0, 0);
    let o = run(&["solve-three", "-i", s(&three), "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(&out)["kind"], "tEFX");
    let o = run(&["oracle", "-i", s(&three), "--which", "po-brute", "--alloc", s(&out)]);
    assert_eq!(code(&o), 0);
    // Equilibria need at least one chore.
    let o = run(&["oracle", "-i", s(&three), "--which", "ceei-exact"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("{\"agents\": 2,\n \"chores\": 1,\n \"disutility\": [[1], [2]", "line"),
        (
            r#"{"agents": 2, "chores": 1, "disutility": [[1], ["q"]]}"#,
            "disutility[1][0]",
        ),
        (
            r#"{"agents": 1, "chores": 1, "disutility": [[1]], "extra": 0}"#,
            "extra",
        ),
        (r#"{"agents": 3, "chores": 1, "disutility": [[1], [2]]}"#, "rows"),
        (r#"{"agents": 2, "chores": 1, "disutility": [[1], [0]]}"#, "zero"),
        (r#"{"agents": 1, "chores": 1, "disutility": [[-2]]}"#, "negative"),
    ];
    for (k, (text, needle)) in cases.iter().enumerate() {
        let inst = path(dir.path(), &format!("bad{k}.json"));
        std::fs::write(&inst, text).unwrap();
        let o = run(&["solve-surplus", "-i", s(&inst)]);
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(code(&o), 2, "case {k}: {err}");
        assert!(err.contains(needle), "case {k}: {err}");
    }
    let o = run(&["solve-surplus", "-i", s(&path(dir.path(), "missing.json"))]);
    assert_eq!(code(&o), 2);
    let o = run(&["verify", "-i", "x.json", "--property", "nope"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn oracles() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.json", 3, 5, 9);
    let out = path(dir.path(), "o.json");
    for which in ["ceei-exact", "ceei-approx"] {
        let o = run(&["oracle", "-i", s(&inst), "--which", which, "-o", s(&out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v = read(&out);
        for key in ["clearing", "incomes", "mpb"] {
            assert_eq!(v["report"][key], true, "{which}: {v}");
        }
    }
    let o = run(&["oracle", "-i", s(&inst), "--which", "po-brute"]);
    assert_eq!(code(&o), 2);
}
