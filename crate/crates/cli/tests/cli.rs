use std::fs;
use std::path::{Path, PathBuf};

use ssmc_cli::{run_cli, EXIT_FOUND, EXIT_NONE, EXIT_PRECONDITION, EXIT_USAGE};
use tempfile::TempDir;

const W: &str = "doctors: a b c\nhospitals: s1 h0\nclosed: s1\npref a: s1 > h0\npref b: h0\npref c: h0\npref s1: a\npref h0: a > b = c\n";
const I1: &str = "doctors: a b\nhospitals: x y\npref a: x > y\npref b: x\npref x: a = b\npref y: a\n";
const NOT_STAR: &str = "doctors: a\nhospitals: x y\nclosed: x\npref a: x = y\npref x: a\npref y: a\n";

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn ssmc(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ssmc").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn degree2_solves_w() {
    let dir = TempDir::new().unwrap();
    let w = file(&dir, "w.txt", W);
    let r = ssmc(&["solve", "--input", s(&w), "--method", "degree2"]);
    assert_eq!(r.code, EXIT_FOUND, "{}", r.err);
    assert_eq!(r.out, "status: stable\nmethod: degree2\na h0\n");
}

#[test]
fn separated_rejects_non_star() {
    let dir = TempDir::new().unwrap();
    let p = file(&dir, "i.txt", NOT_STAR);
    let r = ssmc(&["solve", "--input", s(&p), "--method", "separated"]);
    assert_eq!(r.code, EXIT_PRECONDITION);
    assert!(r.err.contains("E_STAR_VIOLATED"), "{}", r.err);
}

#[test]
fn check_lists_blocking_edges() {
    let dir = TempDir::new().unwrap();
    let inst = file(&dir, "i1.txt", I1);
    let bad = file(&dir, "bad.txt", "a y\nb x\n");
    let r = ssmc(&["check", "--input", s(&inst), "--matching", s(&bad)]);
    assert_eq!(r.code, EXIT_NONE);
    assert!(r.out.lines().any(|l| l.starts_with("block a x ")), "{}", r.out);

    let w = file(&dir, "w.txt", W);
    let good = file(&dir, "good.txt", "a h0\n");
    let r = ssmc(&["check", "--input", s(&w), "--matching", s(&good)]);
    assert_eq!(r.code, EXIT_FOUND, "{}", r.out);

    let non_edge = file(&dir, "non.txt", "b y\n");
    let r = ssmc(&["check", "--input", s(&inst), "--matching", s(&non_edge)]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.err.contains("E_EDGE_NOT_IN_E"), "{}", r.err);
}

#[test]
fn solve_output_passes_check() {
    let dir = TempDir::new().unwrap();
    for seed in 0..20 {
        let gen = ssmc(&["gen", "--seed", &seed.to_string(), "--doctors", "4", "--hospitals", "4"]);
        assert_eq!(gen.code, EXIT_FOUND);
        let inst = file(&dir, "g.txt", &gen.out);
        let solved = ssmc(&["solve", "--input", s(&inst)]);
        match solved.code {
            EXIT_FOUND => {
                let m = file(&dir, "m.txt", &solved.out);
                assert_eq!(ssmc(&["check", "--input", s(&inst), "--matching", s(&m)]).code, EXIT_FOUND);
            }
            EXIT_NONE => assert!(solved.out.starts_with("status: none")),
            other => panic!("exit {other}: {}", solved.err),
        }
    }
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "--seed", "11", "--doctors", "8", "--hospitals", "6", "--star"];
    let first = ssmc(&args);
    assert_eq!(first.code, EXIT_FOUND);
    assert!(first.out.starts_with("doctors:"));
    assert_eq!(ssmc(&args).out, first.out);
    assert_ne!(ssmc(&["gen", "--seed", "12", "--doctors", "8", "--hospitals", "6", "--star"]).out, first.out);
}

#[test]
fn reduce_sat_writes_instance_and_map() {
    let dir = TempDir::new().unwrap();
    let formula = ssmc(&["gen", "--b2sat", "3", "--seed", "5"]);
    assert_eq!(formula.code, EXIT_FOUND);
    let cnf = file(&dir, "f.cnf", &formula.out);
    let out = dir.path().join("red.txt");
    let r = ssmc(&["reduce", "sat", "--cnf", s(&cnf), "--output", s(&out)]);
    assert_eq!(r.code, EXIT_FOUND, "{}", r.err);
    let inst = ssmc::parse_instance(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((inst.doctor_count(), inst.hospital_count(), inst.edge_count()), (26, 33, 64));
    let map = fs::read_to_string(dir.path().join("red.txt.map")).unwrap();
    assert_eq!(map.lines().filter(|l| l.starts_with("var ")).count(), 3);
    assert_eq!(map.lines().filter(|l| l.starts_with("clause ")).count(), 4);
}

#[test]
fn reduce_sat_rejects_bad_formula() {
    let dir = TempDir::new().unwrap();
    let cnf = file(&dir, "f.cnf", "p b2sat 3 1\n1 2 0\n");
    assert_eq!(ssmc(&["reduce", "sat", "--cnf", s(&cnf)]).code, EXIT_USAGE);
}

#[test]
fn reduce_envy_closes_every_hospital() {
    let dir = TempDir::new().unwrap();
    let input = file(&dir, "e.txt", "doctors: a b\nhospitals: x y\npref a: x > y\npref b: x\n");
    let r = ssmc(&["reduce", "envy", "--input", s(&input)]);
    assert_eq!(r.code, EXIT_FOUND, "{}", r.err);
    let inst = ssmc::parse_instance(&r.out).unwrap();
    assert!(inst.hospitals().all(|h| inst.is_closed(h)));
}

#[test]
fn preprocess_prints_sections() {
    let dir = TempDir::new().unwrap();
    let w = file(&dir, "w.txt", W);
    let r = ssmc(&["preprocess", "--input", s(&w)]);
    assert_eq!(r.code, EXIT_FOUND);
    for section in ["R:", "L:", "mu:", "critical:", "rounds:"] {
        assert!(r.out.lines().any(|l| l.starts_with(section)), "{section} missing from\n{}", r.out);
    }
}

#[test]
fn usage_errors() {
    assert_eq!(ssmc(&["verify", "--mode", "nonsense"]).code, EXIT_USAGE);
    assert_eq!(ssmc(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(ssmc(&["solve", "--input", "/nonexistent/file"]).code, EXIT_USAGE);
    assert_eq!(ssmc(&["--help"]).code, EXIT_FOUND);
    let dir = TempDir::new().unwrap();
    let broken = file(&dir, "b.txt", "doctors: a\nhospitals: x\npref a: q\n");
    assert_eq!(ssmc(&["solve", "--input", s(&broken)]).code, EXIT_USAGE);
}

#[test]
fn verify_reports_counts() {
    let r = ssmc(&["verify", "--mode", "separated", "--trials", "50", "--seed", "3"]);
    assert_eq!(r.code, EXIT_FOUND, "{}", r.out);
    assert!(r.out.contains("passed: 50"), "{}", r.out);
}
