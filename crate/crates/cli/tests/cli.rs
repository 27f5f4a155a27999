use std::path::PathBuf;
use std::process::{Command, Output};

fn grc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o).lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("grc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn value(o: &Output, quantity: &str) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{quantity},")).map(str::to_string))
        .unwrap_or_else(|| panic!("no {quantity} row"))
}

#[test]
fn bounds_for_pm_parameters() {
    let o = grc(&["bounds", "--n", "7", "--k", "4", "--d", "6", "--l", "3"]);
    assert!(o.status.success());
    assert_eq!(value(&o, "cutset_rhs"), "12");
    assert_eq!(value(&o, "ip_lower_bound"), "3");
    assert_eq!(value(&o, "M"), "12");
}

#[test]
fn bounds_adversarial_uniform_msr() {
    // l + 2tβ with l = 25, β = 5, t = 2
    let o = grc(&["bounds", "--k", "5", "--d", "9", "--beta-list", "5,5,5,5,5,5,5,5,5", "--t-adversary", "2"]);
    assert!(o.status.success());
    assert_eq!(value(&o, "l"), "25");
    assert_eq!(value(&o, "adversarial_bound"), "45");
}

#[test]
fn invalid_input_exits_one() {
    assert_eq!(grc(&["bounds", "--k", "0", "--d", "6"]).status.code(), Some(1));
    assert_eq!(grc(&["bounds", "--k", "2", "--d", "3", "--beta-list", "1,1"]).status.code(), Some(1));
    assert_eq!(grc(&["simulate", "--example", "fig3", "--scheme", "af"]).status.code(), Some(1));
    assert_eq!(grc(&["optimize", "--graph", "nosuch", "--k", "2"]).status.code(), Some(1));
    assert_eq!(grc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(grc(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_fig3_and_fig4() {
    for (ex, af, ip) in [("fig3", "9", "8"), ("fig4", "30", "24")] {
        let o = grc(&["simulate", "--example", ex, "--baseline", "--trials", "3"]);
        assert!(o.status.success(), "{ex}");
        let rows = csv_rows(&o);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0][3..], [String::from("af-u"), af.into(), "true".into()]);
        assert_eq!(rows[1][3..], [String::from("ip-u"), ip.into(), "true".into()]);
    }
}

#[test]
fn simulate_fig5_baseline() {
    let o = grc(&["simulate", "--example", "fig5", "--baseline", "--trials", "2"]);
    assert!(o.status.success());
    let rows = csv_rows(&o);
    assert_eq!(rows[0][4], "95");
    assert_eq!(rows[0][5], "");
    assert_eq!(rows[1][4], "85");
    assert_eq!(rows[1][5], "true");
}

#[test]
fn accounting_matches_symbol_level() {
    let o = grc(&[
        "simulate", "--graph", "fig4", "--accounting-only", "--k", "5", "--d", "6", "--l", "6", "--baseline",
    ]);
    assert!(o.status.success());
    let totals: Vec<String> = csv_rows(&o).into_iter().map(|r| r[4].clone()).collect();
    assert_eq!(totals, ["30", "24"]);
}

#[test]
fn simulate_custom_code_from_json_graph() {
    let path = scratch("cycle.json");
    let edges: Vec<[usize; 2]> = (0..6).map(|i| [i, (i + 1) % 6]).collect();
    std::fs::write(&path, serde_json::json!({ "n": 6, "edges": edges }).to_string()).unwrap();
    let o = grc(&[
        "simulate", "--graph", path.to_str().unwrap(), "--code", "stacked", "--k", "2", "--d", "4", "--beta-list",
        "1,1,2,2", "--f", "2", "--baseline",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for r in csv_rows(&o) {
        assert_eq!(r[5], "true");
    }
}

#[test]
fn optimize_petersen_every_node() {
    let o = grc(&["optimize", "--graph", "petersen", "--k", "3"]);
    assert!(o.status.success());
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r[4] == "9"));
}

#[test]
fn optimize_complete_graph() {
    let o = grc(&["optimize", "--graph", "complete:10", "--k", "4"]);
    assert!(csv_rows(&o).iter().all(|r| r[4] == "9"));
}

#[test]
fn optimize_ip_tree_search() {
    let o = grc(&["optimize", "--graph", "fig3", "--k", "4", "--l", "3", "--scheme", "ip-u", "--exhaustive", "--f", "0"]);
    assert!(o.status.success());
    let r = &csv_rows(&o)[0];
    assert_eq!((r[4].as_str(), r[5].as_str()), ("6", "8"));
}

#[test]
fn random_graph_table_is_reproducible() {
    let a = scratch("mc-a.csv");
    let b = scratch("mc-b.csv");
    for (path, extra) in [(&a, "--sequential"), (&b, "--format=csv")] {
        let o = grc(&[
            "optimize", "--graph", "er:c=3", "--trials", "10", "--n-list", "20,40", "--seed", "9", extra, "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next(), Some("n,p,k,trials,hits,resampled,frequency"));
    assert_eq!(text.lines().count(), 3);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(scratch("mc-a.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn identical_runs_write_identical_files() {
    let out = scratch("fig3.json");
    let run = || {
        let o = grc(&["simulate", "--example", "fig3", "--format", "json", "--seed", "4", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        (std::fs::read(&out).unwrap(), std::fs::read(scratch("fig3.json.meta.json")).unwrap())
    };
    assert_eq!(run(), run());
}

#[test]
fn adversarial_demo_logs() {
    let o = grc(&["adversarial-demo", "--trials", "3", "--format", "json", "--seed", "11"]);
    assert!(o.status.success());
    let logs: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let logs = logs.as_array().unwrap();
    assert_eq!(logs.len(), 3);
    for l in logs {
        assert_eq!(l["success"], true);
        assert_eq!(l["total"], "85");
        assert!(l["error_rank"].as_u64().unwrap() <= 5);
    }
    assert_eq!(grc(&["adversarial-demo", "--trials", "1", "--t-adversary", "2"]).status.code(), Some(1));
}

#[test]
fn selftest_json_report() {
    let o = grc(&["selftest", "--json", "--only", "1,2,6"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ids: Vec<u64> = v.as_array().unwrap().iter().map(|x| x["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [1, 2, 6]);
    assert!(v.as_array().unwrap().iter().all(|x| x["passed"] == true));
    assert_eq!(grc(&["selftest", "--only", "12"]).status.code(), Some(1));
}
