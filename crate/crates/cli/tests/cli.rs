use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name);
    p.to_string_lossy().into_owned()
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("ineqmine-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ineqmine")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn eca_finds_the_stasheff_equality() {
    let o = run(&["eca", &data("stasheff.vtx")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "d=1\nEQ 10 1 1 1 1\n");
}

#[test]
fn eca_with_equality_known_reports_nothing_new() {
    let o = run(&["eca", &data("stasheff.vtx"), "--known", &data("stasheff_eq.lin")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "d=0\n");
}

#[test]
fn malformed_vertices_exit_2_with_line_number() {
    let bad = scratch("bad.vtx", "2 3\n0 1\n1 x\n");
    let o = run(&["eca", &bad]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn missing_file_is_a_parse_failure() {
    assert_eq!(code(&run(&["eca", "/nonexistent/points.vtx"])), 2);
}

#[test]
fn violated_known_equality_exits_3() {
    let lin = scratch("wrong_eq.lin", "EQ 9 1 1 1 1\n");
    assert_eq!(code(&run(&["eca", &data("stasheff.vtx"), "--known", &lin])), 3);
}

#[test]
fn mine_without_equalities_exits_3() {
    let o = run(&["mine", &data("stasheff.vtx"), "--known", &data("stasheff_known.lin")]);
    assert_eq!(code(&o), 3);
}

#[test]
fn mine_recovers_the_two_missing_facets() {
    let o = run(&["mine", &data("stasheff.vtx"), "--known", &data("stasheff_known.lin"), "--auto-eca"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("CONFIG epsilon=1/100 big_m=100"));
    let facets: Vec<&str> = lines.iter().filter(|l| l.contains("FACET_NEW")).copied().collect();
    assert_eq!(facets.len(), 2, "{text}");
    assert!(facets.iter().any(|l| l.ends_with("ineq=\"GE 1 0 0 0 1\"")));
    assert!(facets.iter().any(|l| l.ends_with("ineq=\"GE 6 1 1 1 0\"")));
    assert!(lines.last().unwrap().starts_with("TERM MIP_INFEASIBLE"));
}

#[test]
fn mine_with_every_facet_known_finds_nothing() {
    let known = std::fs::read_to_string(data("stasheff_known.lin")).unwrap()
        + &std::fs::read_to_string(data("stasheff_missing.lin")).unwrap()
        + &std::fs::read_to_string(data("stasheff_eq.lin")).unwrap();
    let all = scratch("all.lin", &known);
    let o = run(&["mine", &data("stasheff.vtx"), "--known", &all]);
    assert_eq!(code(&o), 0);
    assert!(!stdout(&o).contains("FACET_NEW"));
    assert!(stdout(&o).contains("TERM MIP_INFEASIBLE"));
}

#[test]
fn exhausted_node_budget_exits_4() {
    let o = run(&["mine", &data("stasheff.vtx"), "--auto-eca", "--node-budget", "1"]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("TERM NODE_BUDGET"));
}

#[test]
fn mine_float_mode_agrees_with_exact() {
    let base = [data("stasheff.vtx"), "--known".into(), data("stasheff_known.lin"), "--auto-eca".into()];
    let mut args: Vec<&str> = vec!["mine"];
    args.extend(base.iter().map(String::as_str));
    let exact = stdout(&run(&args));
    args.extend(["--mode", "float"]);
    let float = stdout(&run(&args));
    // ties between equally large supports may be broken in a different order
    let facets = |t: &str| {
        let mut v: Vec<String> = t
            .lines()
            .filter(|l| l.starts_with("ITER"))
            .map(|l| l.split_once(" FACET").unwrap().1.to_string())
            .collect();
        v.sort();
        v
    };
    assert_eq!(facets(&exact), facets(&float));
    assert_eq!(exact.lines().last(), float.lines().last());
}

#[test]
fn random_polytopes_match_the_oracle() {
    for seed in [1, 2, 5] {
        let o = run(&["random-polytope", "--seed", &seed.to_string(), "--dim", "3", "--ambient", "4"]);
        assert_eq!(code(&o), 0);
        let vtx = scratch(&format!("random{seed}.vtx"), &stdout(&o));
        let o = run(&["mine", &vtx, "--auto-eca", "--oracle"]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        assert!(stdout(&o).contains(" MATCH"));
    }
}

#[test]
fn random_polytope_output_is_reproducible() {
    let a = stdout(&run(&["random-polytope", "--seed", "7", "--dim", "4", "--ambient", "6"]));
    let b = stdout(&run(&["random-polytope", "--seed", "7", "--dim", "4", "--ambient", "6"]));
    assert_eq!(a, b);
    assert!(a.starts_with("6 "));
}

#[test]
fn check_classifies_inequalities() {
    let vtx = data("stasheff.vtx");
    let known = data("stasheff_known.lin");
    let check = |ineq: &str| stdout(&run(&["check", &vtx, &known, ineq]));
    assert!(check("GE 1 0 0 0 1").starts_with("VALID face_dim=2 FACET NEW"));
    assert!(check("LE 0 0 0 0 1").starts_with("INVALID"));
    assert!(check("GE 4 0 1 1 0").starts_with("INVALID"));
    assert!(check("GE 3 0 1 1 0").starts_with("VALID face_dim=2 FACET REDUNDANT"));
    assert!(check("GE 2 0 1 1 0").starts_with("VALID face_dim=empty NOT_FACE REDUNDANT"));
}

#[test]
fn check_rejects_unparsable_inequalities() {
    let o = run(&["check", &data("stasheff.vtx"), &data("stasheff_known.lin"), "LT 1 0 0 0 1"]);
    assert_eq!(code(&o), 2);
    let o = run(&["check", &data("stasheff.vtx"), &data("stasheff_known.lin"), "GE 1 0 1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn tours_write_a_vertex_file() {
    let o = run(&["tsp", "tours", "--n", "5", "--beta", "0.9"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("32 24"));
    assert_eq!(lines.count(), 24);
}

#[test]
fn tours_feed_eca_and_mine_without_edits() {
    let tours = stdout(&run(&["tsp", "tours", "--n", "5", "--beta", "0.9"]));
    let vtx = scratch("tours5.vtx", &tours);
    let eqs = stdout(&run(&["tsp", "equalities", "--n", "5", "--beta", "0.9"]));
    let lin = scratch("tours5.lin", &eqs);
    let o = run(&["eca", &vtx, "--known", &lin]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("d=3\n"));

    let args = ["mine", &vtx, "--known", &lin, "--auto-eca", "--preset", "tsp", "--mode", "float", "--max-iterations", "2"];
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("CONFIG epsilon=1/10 big_m=100"));
    assert_eq!(text.lines().filter(|l| l.starts_with("ITER")).count(), 2);
    assert!(text.ends_with("TERM USER_LIMIT cap=20\n"));
}

#[test]
fn four_city_tours_mine_to_completion() {
    let vtx = scratch("tours4.vtx", &stdout(&run(&["tsp", "tours", "--n", "4", "--beta", "0.9"])));
    let lin = scratch("tours4.lin", &stdout(&run(&["tsp", "equalities", "--n", "4", "--beta", "0.9"])));
    let o = run(&["mine", &vtx, "--known", &lin, "--auto-eca", "--preset", "tsp"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("FACET_NEW dim=4")).count(), 6, "{text}");
    assert!(text.ends_with("TERM MIP_INFEASIBLE cap=5\n"));
}

#[test]
fn mask_lists_one_based_columns() {
    let o = run(&["tsp", "mask", "--n", "6"]);
    assert_eq!(stdout(&o), "11,12,15,16,19,20,39,40,44,45,49,50\n");
}

#[test]
fn bounds_report_lines_and_table() {
    let atsp = "NAME: tiny\nTYPE: ATSP\nDIMENSION: 4\nEDGE_WEIGHT_TYPE: EXPLICIT\n\
        EDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n\
        0 3 9 4\n2 0 5 8\n7 1 0 6\n3 9 2 0\nEOF\n";
    let inst = scratch("tiny.atsp", atsp);
    let o = run(&["tsp", "bounds", "--instance", &inst, "--model", "sd"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("BOUND tiny SD - "), "{text}");
    assert!(text.contains("Problem"));

    let o = run(&["tsp", "bounds", "--instance", &inst, "--model", "tsp-h", "--beta", "0.9"]);
    assert!(stdout(&o).starts_with("BOUND tiny TSP_H 0.9 "));
}

#[test]
fn unsupported_tsplib_variant_exits_2() {
    let inst = scratch("sym.tsp", "NAME: s\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nEOF\n");
    assert_eq!(code(&run(&["tsp", "bounds", "--instance", &inst])), 2);
}

#[test]
fn validate_set3_small_case_passes() {
    let o = run(&["tsp", "validate-set3", "--n", "6", "--beta", "0.999", "--jobs", "2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("SET3 n=6 beta=999/1000 tours=120 dim=34"));
    assert_eq!(text.lines().filter(|l| l.contains("VALID+FACET")).count(), 11);
}

#[test]
fn validate_set3_rejects_small_n() {
    assert_eq!(code(&run(&["tsp", "validate-set3", "--n", "5"])), 1);
}
