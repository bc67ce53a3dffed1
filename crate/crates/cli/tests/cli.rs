use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn shlin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shlin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

#[test]
fn eval_omega_match() {
    let o = shlin(&[
        "eval",
        "--domain",
        "omega",
        "--op",
        "match",
        "[x^2, xz]_{x,y,z}",
        "[uv, ux, vx^2, x]_{u,v,x}",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "[uv, ux^2, u^2x^2, uxz, vx^2, x^2, xz]_{u,v,x,y,z}");
}

#[test]
fn eval_two_match_agrees_with_reference() {
    let args = |op| {
        shlin(&[
            "eval",
            "--domain",
            "two",
            "--op",
            op,
            "[x^*, xz]_{x,y,z}",
            "[uv, ux, vx^*, x]_{u,v,x}",
        ])
    };
    let fast = args("match");
    let reference = args("match-ref");
    assert_eq!(fast.status.code(), Some(0));
    assert_eq!(stdout(&fast), stdout(&reference));
    assert_eq!(
        stdout(&fast).trim(),
        "↓[uv, u^*v^*x^*, u^*x^*, uxz, v^*x^*, vxz, x^*, xz]_{u,v,x,y,z}"
    );
}

#[test]
fn eval_sl_alpha_and_project() {
    let o = shlin(&["eval", "--domain", "sl", "--op", "alpha", "[{x/s(y,u,y), z/s(u,u), v/u}]_{w,x,y,z}"]);
    assert_eq!(stdout(&o).trim(), "[{w, xy, xz}, lin={w,y}]_{w,x,y,z}");
    let o = shlin(&["eval", "--op", "project", "--onto", "{u,v,w}", "[uvx, vwz]_{u,v,w,x,z}"]);
    assert_eq!(stdout(&o).trim(), "[uv, vw]_{u,v,w}");
}

#[test]
fn eval_rejects_wrong_syntax_and_arity() {
    let o = shlin(&["eval", "--domain", "two", "--op", "match", "[x^2]_{x}", "[x]_{x}"]);
    assert_eq!(o.status.code(), Some(1));
    let o = shlin(&["eval", "--op", "match", "[x]_{x}"]);
    assert_eq!(o.status.code(), Some(1));
    let o = shlin(&["eval", "-d", "omega"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn analyze_independent_variables() {
    let base = ["analyze", "--program", &data("independent.pl"), "--goal", "p(x,f(x,z),z)", "--call", "[x, z]_{x,z}"];
    let o = shlin(&base);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "[x, z]_{x,z}");

    let mut mgu = base.to_vec();
    mgu.extend(["--mode", "mgu", "--json"]);
    let v = json(&shlin(&mgu));
    assert_eq!(v["mode"], "mgu");
    assert!(v["answer"].as_str().unwrap().contains(" xz,"));

    let mut traced = base.to_vec();
    traced.push("--trace");
    let out = stdout(&shlin(&traced));
    assert!(out.contains("forward [uvx, vwz]_{u,v,w,x,z}"));
    assert!(out.contains("entry   [uv, vw]_{u,v,w}"));
}

#[test]
fn diff_reports_the_shared_pair() {
    let o = shlin(&[
        "diff",
        "--program",
        &data("independent.pl"),
        "--goal",
        "p(x,f(x,z),z)",
        "--call",
        "[x, z]_{x,z}",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["matching"], "[x, z]_{x,z}");
    assert_eq!(v["sharing"], serde_json::json!(["xz"]));
}

#[test]
fn diff_is_empty_for_ground_call() {
    let v = json(&shlin(&[
        "diff",
        "--program",
        &data("independent.pl"),
        "--goal",
        "p(x,f(x,z),z)",
        "--call",
        "[0]_{x,z}",
        "--json",
    ]));
    assert_eq!(v["groups"], serde_json::json!([]));
    assert_eq!(v["sharing"], serde_json::json!([]));
}

#[test]
fn diff_member_with_injection() {
    let v = json(&shlin(&[
        "diff",
        "--program",
        &data("member.pl"),
        "--goal",
        "member(x, [y])",
        "--call",
        "[xy, xz]_{x,y,z}",
        "--domain",
        "two",
        "--inject",
        &data("member.inject"),
        "--json",
    ]));
    assert_eq!(v["matching"], "↓[x^*y^*]_{x,y,z}");
    assert_eq!(v["mgu"], "↓[x^*y^*, x^*y^*z^*]_{x,y,z}");
    assert_eq!(v["groups"], serde_json::json!(["x^*y^*z^*"]));
}

#[test]
fn missing_file_is_an_io_error() {
    let o = shlin(&["analyze", "--program", "/nonexistent/p.pl", "--goal", "p(x)", "--call", "[x]_{x}"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_and_mutant_fails() {
    let o = shlin(&["verify", "correctness", "--domain", "omega", "--trials", "2000", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("check=correctness domain=omega seed=42 trials=2000"));

    let o = shlin(&["verify", "correctness", "--domain", "omega", "--trials", "2000", "--mutant"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("failure trial="));
}

#[test]
fn verify_optimality_json_is_deterministic() {
    let args = ["verify", "optimality", "--trials", "200", "--seed", "9", "--json"];
    let a = shlin(&args);
    let b = shlin(&[&args[..], &["--jobs", "1"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["ok"], true);
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);
}

#[test]
fn equiv_reads_config_defaults() {
    let o = shlin(&["--config", &data("ci.conf"), "equiv", "--trials", "500"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("check=equivalence domain=all seed=42 trials=500"));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = std::env::temp_dir().join(format!("shlin-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.conf");
    std::fs::write(&path, "colour = red\n").unwrap();
    let o = shlin(&["--config", path.to_str().unwrap(), "equiv"]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).unwrap();
}
