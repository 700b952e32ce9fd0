use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wallach-flow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

fn f(v: &str) -> f64 {
    v.parse().unwrap()
}

#[test]
fn field_table_shape() {
    let text = stdout(&["field", "--grid", "0.5:1.5:3"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,x2,x3,f1,f2,f3,gamma1,gamma2,gamma3,region");
    assert_eq!(lines.len(), 1 + 27);
    let diag = lines.iter().find(|l| l.starts_with("1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0")).unwrap();
    let cols: Vec<&str> = diag.split(',').collect();
    assert_eq!(cols[9], "interior/diagonal");
    // o0 = (1, 1, 1) is stationary for a = 1/4
    let at_quarter = stdout(&["field", "--a", "1/4", "--grid", "1:1:1"]);
    let row: Vec<&str> = at_quarter.lines().nth(1).unwrap().split(',').collect();
    for c in &row[3..6] {
        assert!(f(c).abs() < 1e-15, "{c}");
    }
}

#[test]
fn field_general_matches_symmetric_scaling() {
    let sym = stdout(&["field", "--a", "0.2", "--grid", "0.7:1.9:2"]);
    let gen = stdout(&["field", "--general", "0.2,0.2,0.2", "--grid", "0.7:1.9:2"]);
    for (s, g) in sym.lines().zip(gen.lines()).skip(1) {
        let s: Vec<&str> = s.split(',').collect();
        let g: Vec<&str> = g.split(',').collect();
        for k in 3..6 {
            assert!((f(s[k]) / 3.0 - f(g[k])).abs() < 1e-12 * (1.0 + f(s[k]).abs()));
        }
    }
}

#[test]
fn invalid_input_exits_with_config_code() {
    assert_eq!(run(&["field", "--a", "0.7"]).status.code(), Some(2));
    assert_eq!(run(&["field", "--a", "0.2", "--general", "0.1,0.2,0.3"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--a", "0"]).status.code(), Some(2));
    assert_eq!(run(&["field", "--grid", "0:1:3"]).status.code(), Some(2));
    assert_eq!(run(&["field", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(run(&["field", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let out = scratch("never.csv");
    let _ = std::fs::remove_file(&out);
    assert_eq!(run(&["field", "--a", "0.9", "--output", out.to_str().unwrap()]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn config_file_values_yield_to_flags() {
    let cfg = scratch("field.json");
    std::fs::write(&cfg, r#"{"a": "1/8", "grid": "1:2:2", "format": "json"}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let doc = json(&["field", "--config", c]);
    assert_eq!(doc["schema"], "wallach-flow/1");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 8);
    let csv = stdout(&["field", "--config", c, "--format", "csv", "--grid", "1:2:3"]);
    assert_eq!(csv.lines().count(), 1 + 27);
}

#[test]
fn portrait_equilibria() {
    let doc = json(&["portrait", "--a", "0.25", "--starts", "4", "--horizon", "5", "--rays", "90"]);
    let eq = doc["equilibria"].as_array().unwrap();
    assert_eq!(eq.len(), 1);
    assert_eq!(eq[0]["degenerate"], true);
    assert_eq!(doc["trajectories"].as_array().unwrap().len(), 4);

    let doc = json(&["portrait", "--a", "0.3", "--starts", "4", "--horizon", "5", "--rays", "90"]);
    let eq = doc["equilibria"].as_array().unwrap();
    assert_eq!(eq.len(), 4);
    assert_eq!(eq[0]["kind"], "stable_node");
    for e in &eq[1..] {
        assert_eq!(e["kind"], "saddle");
    }
    assert!(doc["tangency"].as_array().unwrap().is_empty());

    let doc = json(&["portrait", "--a", "0.22", "--starts", "1", "--horizon", "1", "--rays", "90"]);
    assert_eq!(doc["tangency"].as_array().unwrap().len(), 6);
}

#[test]
fn portrait_csv_stays_on_surface() {
    let text = stdout(&["portrait", "--a", "0.125", "--starts", "3", "--horizon", "2", "--format", "csv"]);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "trajectory,t,x1,x2,x3");
    for l in lines {
        let c: Vec<f64> = l.split(',').skip(2).map(f).collect();
        assert!((c[0] * c[1] * c[2] - 1.0).abs() < 1e-9);
    }
}

#[test]
fn verify_is_seed_deterministic() {
    let (p, q) = (scratch("v1.json"), scratch("v2.json"));
    for path in [&p, &q] {
        let out = run(&["verify", "--a", "1/8,0.3", "--n", "12", "--seed", "11", "--output", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let (a, b) = (std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
    assert_eq!(a, b);
    let doc: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["schema"], "wallach-flow/1");
    assert_eq!(doc["command"], "verify");
    assert_eq!(doc["seed"], 11);
    assert_eq!(doc["consistent"], true);
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["case"], 1);
    assert_eq!(reports[1]["case"], 4);
    for r in reports {
        assert_eq!(r["verdict"]["kind"], "consistent_with_theorem1_case");
        assert_eq!(r["runs"].as_array().unwrap().len(), 24);
    }
    let other = stdout(&["verify", "--a", "1/8,0.3", "--n", "12", "--seed", "12"]);
    assert_ne!(other.as_bytes(), &a[..]);
}

#[test]
fn verify_csv_summary_and_ivp() {
    let text = stdout(&["verify", "--a", "3/14", "--n", "10", "--format", "csv"]);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("a,case,verdict,runs,"));
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row[1], "2");
    assert_eq!(row[2], "consistent_case_2");
    assert_eq!(row[4], "10");

    let doc = json(&["verify", "--a", "0.3", "--n", "2", "--ivp"]);
    let ivp = &doc["ivp"];
    assert_eq!(ivp["mesh_index"], 4961);
    assert!((ivp["x"].as_f64().unwrap() - 1.0000087922).abs() < 1e-9);
    assert!((ivp["y_boundary"].as_f64().unwrap() - 168.88).abs() < 0.01);
    assert!((ivp["coefficient"].as_f64().unwrap() - 0.8249252769).abs() < 1e-8);
}

#[test]
fn analyze_tables() {
    let roots = stdout(&["analyze", "--table", "roots", "--a-grid", "3/14:0.24:2"]);
    let rows: Vec<Vec<&str>> = roots.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][1], "tangent");
    assert!((f(rows[0][2]) - 4.0 / 3.0).abs() < 1e-6);
    assert_eq!(rows[0][2], rows[0][3]);
    assert_eq!(rows[1][1], "sign_change");
    assert!(f(rows[1][2]) < f(rows[1][3]));
    assert!((f(rows[1][2]) - f(rows[1][4])).abs() < 1e-9);

    let ft = stdout(&["analyze", "--table", "f", "--nu-grid", "1:2:3"]);
    let star = ft.lines().find(|l| l.starts_with("1.3333333333333333e0")).unwrap();
    let fv = f(star.split(',').nth(3).unwrap());
    assert!((fv - 3.0 / 14.0).abs() < 1e-14);

    let eq = stdout(&["analyze", "--table", "equilibria", "--a", "0.25,0.3"]);
    assert_eq!(eq.lines().count(), 1 + 1 + 4);

    let doc = json(&["analyze", "--format", "json", "--a", "0.3", "--a-grid", "0.22:0.23:2", "--nu-grid", "1:4:4"]);
    assert_eq!(doc["command"], "analyze");
    assert_eq!(doc["f"].as_array().unwrap().len(), 5);
    assert_eq!(doc["roots"].as_array().unwrap().len(), 2);
    assert_eq!(doc["equilibria"].as_array().unwrap().len(), 4);
}
