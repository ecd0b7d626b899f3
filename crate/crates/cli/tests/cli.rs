use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lacunary::diophantine::{check_a_omega, DEFAULT_WORK_BUDGET};
use lacunary::periodic::TrigPolynomial;
use lacunary::sequences::{gen_geometric, read_sequence, write_sequence, IntegerSequence, OmegaSchedule};
use lacunary::stats::{excess_kurtosis, ks_fitted_normal, lil_scan, random_point, sample_sums, SampleSpec};
use serde_json::Value;

fn lacunary(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lacunary"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = lacunary(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn write_seq(dir: &Path, name: &str, seq: &IntegerSequence) -> PathBuf {
    let path = dir.join(name);
    let mut buf = Vec::new();
    write_sequence(seq, &mut buf).unwrap();
    std::fs::write(&path, buf).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_geometric_writes_a_readable_sequence_file() {
    let text = ok(&["gen", "--family", "geometric", "--base", "2", "--count", "5"]);
    assert!(text.starts_with("# schema=lacunary-lab/1\n"));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data, ["2", "4", "8", "16", "32"]);
    let seq = read_sequence(text.as_bytes()).unwrap();
    assert_eq!(seq.fingerprint(), gen_geometric(2, 5).unwrap().fingerprint());
}

#[test]
fn gen_json_lists_terms_as_strings() {
    let v = json(&["gen", "--family", "erdos_fortet", "--count", "3", "--format", "json"]);
    assert_eq!(v["schema"], "lacunary-lab/1");
    assert_eq!(v["result"]["terms"], serde_json::json!(["1", "3", "7"]));
}

#[test]
fn aomega_matches_library_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let seq = gen_geometric(2, 12).unwrap();
    let path = write_seq(dir.path(), "seq.txt", &seq);
    for omega in ["sqrt", "const:2"] {
        let v = json(&[
            "aomega", "--seq", s(&path), "--omega", omega, "--level", "5", "--rmax", "3", "--amax", "25",
        ]);
        let lib = check_a_omega(&seq, &omega.parse::<OmegaSchedule>().unwrap(), 5, (3, 25), DEFAULT_WORK_BUDGET)
            .unwrap();
        let r = &v["result"];
        assert_eq!(r["level"], 5);
        assert_eq!(r["outcome"], lib.outcome.to_string());
        assert_eq!(r["caps"], serde_json::json!([lib.caps.0, lib.caps.1]));
        match &lib.witness {
            Some(w) => {
                assert_eq!(r["witness"]["indices"], serde_json::json!(w.indices));
                assert_eq!(r["witness"]["coeffs"], serde_json::json!(w.coeffs));
            }
            None => assert!(r.get("witness").is_none()),
        }
    }
}

#[test]
fn clt_matches_library_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let seq = gen_geometric(2, 256).unwrap();
    let path = write_seq(dir.path(), "seq.txt", &seq);
    let v = json(&[
        "clt", "--function", "cos:1:1.0", "--seq", s(&path), "--N", "256", "--grid", "100003",
    ]);
    let f: TrigPolynomial = "cos:1:1.0".parse().unwrap();
    let sample = sample_sums(&f, &seq, None, 256, &SampleSpec::grid(100_003)).unwrap();
    let r = &v["result"];
    assert_eq!(r["N"], 256);
    assert_eq!(r["M"], 100_003);
    assert_eq!(r["ks"].as_f64().unwrap(), ks_fitted_normal(sample.values()).unwrap());
    assert_eq!(r["kurtosis"].as_f64().unwrap(), excess_kurtosis(sample.values()).unwrap());
    assert_eq!(r["cf"].as_array().unwrap().len(), 3);
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let seq = gen_geometric(3, 64).unwrap();
    let path = write_seq(dir.path(), "seq.txt", &seq);
    let base = ["clt", "--function", "cos:1:1,sin:2:0.5", "--seq", s(&path), "--N", "64", "--random", "500"];
    let run = |threads: &str, seed: &str| {
        let mut a: Vec<&str> = base.to_vec();
        a.extend(["--threads", threads, "--seed", seed, "--samples"]);
        ok(&a)
    };
    let one = run("1", "9");
    assert_eq!(one, run("1", "9"));
    assert_eq!(one, run("3", "9"));
    assert_ne!(one, run("1", "10"));
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("levy.csv");
    let stdout = ok(&["levy", "--steps", "6"]);
    assert_eq!(ok(&["levy", "--steps", "6", "--out", s(&out)]), "");
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout);
}

#[test]
fn dioph_emits_json_lines_of_true_relations() {
    let dir = tempfile::tempdir().unwrap();
    let seq = IntegerSequence::from_u64s(&[1, 2, 3, 5, 8, 13]).unwrap();
    let path = write_seq(dir.path(), "fib.txt", &seq);
    let text = ok(&["dioph", "--seq", s(&path), "--r", "3", "--amax", "1"]);
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["schema"], "lacunary-lab/1");
    let count = lines[0]["result"]["count"].as_u64().unwrap() as usize;
    assert_eq!(lines.len(), count + 1);
    assert!(count >= 4, "1+2=3, 2+3=5, 3+5=8, 5+8=13 at least");
    for sol in &lines[1..] {
        let total: i64 = sol["coeffs"]
            .as_array()
            .unwrap()
            .iter()
            .zip(sol["elements"].as_array().unwrap())
            .map(|(c, e)| c.as_i64().unwrap() * e.as_str().unwrap().parse::<i64>().unwrap())
            .sum();
        assert_eq!(total, 0, "{sol}");
    }
}

#[test]
fn gap_reports_first_violation() {
    let dir = tempfile::tempdir().unwrap();
    let seq = IntegerSequence::from_u64s(&[1, 2, 4, 5, 10]).unwrap();
    let path = write_seq(dir.path(), "g.txt", &seq);
    let v = json(&["gap", "--seq", s(&path), "--eps", "0.5"]);
    assert_eq!(v["result"]["passed"], false);
    assert_eq!(v["result"]["first_violation"]["k"], 3);
    assert_eq!(v["result"]["first_violation"]["ratio"], "5/4");
    assert_eq!(v["result"]["first_violation"]["required"], "3/2");
    let v = json(&["gap", "--seq", s(&path), "--eps", "1/5"]);
    assert_eq!(v["result"]["passed"], true);
}

#[test]
fn moments_second_moment_is_exact_for_powers_of_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_seq(dir.path(), "g.txt", &gen_geometric(2, 8).unwrap());
    let v = json(&["moments", "--function", "cos:1:1", "--seq", s(&path), "--N", "8", "--p", "2"]);
    let row = &v["result"]["moments"][0];
    assert_eq!(row["p"], 2);
    assert!((row["moment"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn lil_csv_matches_library_scan() {
    let dir = tempfile::tempdir().unwrap();
    let seq = gen_geometric(2, 40).unwrap();
    let path = write_seq(dir.path(), "g.txt", &seq);
    let text = ok(&[
        "lil", "--function", "cos:1:1", "--seq", s(&path), "--points", "3", "--checkpoints", "8,40", "--seed", "4",
    ]);
    let rows: Vec<&str> = text.lines().skip_while(|l| *l != "## ratios").skip(1).collect();
    assert_eq!(rows[0], "x_index,N,ratio");
    assert_eq!(rows.len(), 1 + 3 * 2);
    let f: TrigPolynomial = "cos:1:1".parse().unwrap();
    let pts: Vec<_> = (0..3).map(|i| random_point(4, i, 128).unwrap()).collect();
    let scan = lil_scan(&f, &seq, None, &pts, &[8, 40]).unwrap();
    let last: Vec<&str> = rows[6].split(',').collect();
    assert_eq!(last[..2], ["2", "40"]);
    assert_eq!(last[2].parse::<f64>().unwrap(), scan.ratios[2][1]);
}

#[test]
fn levy_has_four_sections() {
    let text = ok(&["levy", "--steps", "4"]);
    for header in ["## fg", "t,F,G", "## levy", "x,L,density", "## cf", "t,re,im", "## cdf", "y,cdf"] {
        assert!(text.lines().any(|l| l == header), "missing {header}");
    }
    let cdf: Vec<f64> = text
        .lines()
        .skip_while(|l| *l != "y,cdf")
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(cdf.len(), 5);
    assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_seq(dir.path(), "g.txt", &gen_geometric(2, 30).unwrap());
    let code = |args: &[&str]| lacunary(args).status.code();
    assert_eq!(code(&["gen", "--family", "geometric", "--base", "1", "--count", "3"]), Some(2));
    assert_eq!(code(&["gen", "--family", "geometric", "--count", "3", "--bogus"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["gap", "--seq", s(&dir.path().join("missing.txt"))]), Some(2));
    assert_eq!(
        code(&["clt", "--function", "cos:1:1", "--seq", s(&path), "--N", "30", "--grid", "8"]),
        Some(2),
        "resonant grid"
    );
    assert_eq!(
        code(&["dioph", "--seq", s(&path), "--r", "4", "--amax", "100", "--budget", "10"]),
        Some(3)
    );
    assert_eq!(code(&["--help"]), Some(0));
    let out = lacunary(&["aomega", "--seq", s(&path), "--omega", "nope", "--level", "3", "--rmax", "2", "--amax", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}
