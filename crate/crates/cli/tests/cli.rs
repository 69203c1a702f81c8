use std::path::PathBuf;
use std::process::{Command, Output};

fn graph(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../graphs").join(name);
    p.to_str().unwrap().to_string()
}

fn gkm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkm")).args(args).output().expect("run gkm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Writes `contents` to a scratch file unique to this test.
fn scratch(tag: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("gkm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{tag}.toml"));
    std::fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

fn rank_lines(report: &str) -> Vec<(i64, usize)> {
    report
        .lines()
        .take_while(|l| !l.starts_with("basis"))
        .filter_map(|l| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            match parts.as_slice() {
                [q, r, _] => Some((q.parse().ok()?, r.parse().ok()?)),
                _ => None,
            }
        })
        .collect()
}

#[test]
fn fgl_prints_p_series() {
    let o = gkm(&["fgl", "--theory", "morava", "--p", "2", "--n", "1", "--trunc", "8", "--ell", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "[2]u = v1*u^2"), "{}", stdout(&o));

    let o = gkm(&["fgl", "--theory", "ordinary", "--trunc", "4", "--ell", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "[5]u = 5*u"));
    assert!(stdout(&o).lines().any(|l| l == "F(x,y) = x + y"));

    let o = gkm(&["fgl", "--theory", "morava", "--p", "3", "--n", "1", "--trunc", "10", "--ell", "9"]);
    assert!(stdout(&o).lines().any(|l| l == "[9]u = v1^4*u^9"), "{}", stdout(&o));

    let o = gkm(&["fgl", "--theory", "mult", "--trunc", "3", "--ell", "-1"]);
    assert!(stdout(&o).lines().any(|l| l == "[-1]u = -u - beta*u^2 - beta^2*u^3"), "{}", stdout(&o));
}

#[test]
fn fgl_flag_errors_exit_2_and_name_the_flag() {
    let o = gkm(&["fgl", "--theory", "morava", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--n"));

    let o = gkm(&["fgl", "--theory", "mod-p"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--p"));

    let o = gkm(&["fgl", "--theory", "ordinary", "--p", "4"]);
    assert_eq!(o.status.code(), Some(2));

    let o = gkm(&["fgl", "--theory", "ktheory"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--theory"));

    let o = gkm(&["fgl", "--trunc", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_projective_line() {
    let o = gkm(&["solve", &graph("cp1.toml"), "--qmax", "4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "model: conjectural"));
    assert_eq!(rank_lines(&out), vec![(0, 1), (2, 2), (4, 2)]);
    assert!(out.contains("basis 2\n  divisors 1 1\n  (u, 0)\n  (0, u)\n"), "{out}");
}

#[test]
fn solve_projective_plane_matches_formality() {
    let o = gkm(&["solve", &graph("cp2.toml"), "--theory", "morava", "--p", "2", "--n", "1", "--qmax", "4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(!out.contains("model: conjectural"));
    assert_eq!(rank_lines(&out), vec![(0, 1), (2, 3), (4, 6)]);
}

#[test]
fn solve_is_deterministic() {
    let args = ["solve", &graph("cp1xcp1.toml"), "--theory", "rational", "--qmax", "6"];
    let a = gkm(&args);
    let b = gkm(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_weight_length_is_located() {
    let bad = std::fs::read_to_string(graph("cp1.toml")).unwrap().replace("weight = [1]", "weight = [1, 2]");
    let path = scratch("bad-weight", &bad);
    let o = gkm(&["solve", &path]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains(&format!("{path}:8:10:")), "{err}");
    assert!(err.contains("length 2"));
}

#[test]
fn syntax_errors_and_missing_files_exit_2() {
    let path = scratch("syntax", "torus_rank = 1\nvertices = [\"a\"\n");
    let o = gkm(&["solve", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("{path}:")));

    let o = gkm(&["solve", "/nonexistent/graph.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_graph_exits_3_with_violations() {
    let src = "torus_rank = 1\nvertices = [\"a\", \"b\", \"c\"]\n\n[[edges]]\ntail = 0\nhead = 1\nweight = [0]\n";
    let path = scratch("invalid", src);
    let o = gkm(&["solve", &path]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("edge 1: zero weight"), "{err}");
    assert!(err.contains("vertex c: not connected"), "{err}");
}

#[test]
fn integrate_top_degree_classes() {
    let o = gkm(&["integrate", &graph("cp2.toml"), "--class", "H2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "integral = 1"), "{out}");
    assert!(out.lines().any(|l| l == "slope (1,2)"));
    assert!(out.lines().any(|l| l == "polar part vanishes"));

    for theory in [&["--theory", "mult"][..], &["--theory", "morava", "--p", "2", "--n", "1"][..]] {
        let mut args = vec!["integrate", "--class", "euler0"];
        let path = graph("cp1.toml");
        args.push(&path);
        args.extend_from_slice(theory);
        let o = gkm(&args);
        assert!(o.status.success());
        assert!(stdout(&o).lines().any(|l| l == "integral = 1"), "{}", stdout(&o));
    }
}

#[test]
fn integrate_degree_zero_prints_laurent_sum_only() {
    let o = gkm(&["integrate", &graph("cp1.toml"), "--class", "one"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "term north = s^-1 + O(s^2)"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("sum = 0")));
    assert!(!out.contains("integral ="));
}

#[test]
fn integrate_with_explicit_slope() {
    let o = gkm(&["integrate", &graph("cp2.toml"), "--class", "H2", "--theory", "rational", "--slope", "3,-1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l == "integral = 1"));

    let o = gkm(&["integrate", &graph("cp2.toml"), "--class", "H2", "--slope", "1,1"]);
    assert_eq!(o.status.code(), Some(4), "(1,1) pairs to zero with (-1,1)");

    let o = gkm(&["integrate", &graph("cp2.toml"), "--class", "H2", "--slope", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn integrate_localization_failures_exit_4() {
    let o = gkm(&["integrate", &graph("cp2.toml"), "--class", "H2", "--theory", "mod-p", "--p", "2"]);
    assert_eq!(o.status.code(), Some(4));
    let o = gkm(&["integrate", &graph("cp2.toml"), "--class", "H2", "--trunc", "2"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn integrate_unknown_class_exits_2() {
    let o = gkm(&["integrate", &graph("cp2.toml"), "--class", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("H2"));
}

#[test]
fn bad_class_expression_is_located() {
    let src = std::fs::read_to_string(graph("cp1.toml")).unwrap().replace("\"chi(1)\", \"0\"", "\"chi(1)\", \"u +\"");
    let path = scratch("bad-expr", &src);
    let o = gkm(&["integrate", &path, "--class", "euler0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("{path}:20:31:")), "{}", stderr(&o));
}

#[test]
fn check_formality_verdicts() {
    let o = gkm(&["check-formality", &graph("cp1.toml")]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().all(|l| !l.ends_with("FAIL")));

    let o = gkm(&["check-formality", &graph("cp1xcp1.toml"), "--theory", "morava", "--p", "2", "--n", "1"]);
    assert!(o.status.success(), "{}", stdout(&o));

    let wrong = std::fs::read_to_string(graph("cp1.toml"))
        .unwrap()
        .replace("[[betti]]\ndegree = 2\nrank = 1\n", "")
        .replace("degree = 0\nrank = 1", "degree = 0\nrank = 2");
    let path = scratch("wrong-betti", &wrong);
    let o = gkm(&["check-formality", &path]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().any(|l| l == "0 predicted 2 actual 1 FAIL"), "{}", stdout(&o));
}

#[test]
fn check_formality_needs_betti() {
    let src = std::fs::read_to_string(graph("cp1.toml")).unwrap().replace("[[betti]]", "[[ignored]]");
    let src: String = src.split("[[ignored]]").next().unwrap().to_string();
    let path = scratch("no-betti", &src);
    let o = gkm(&["check-formality", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("betti"));
}
