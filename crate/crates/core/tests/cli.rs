use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_benford");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

#[test]
fn constants_fixture_accepts() {
    let path = fixture("physical_constants.csv");
    let out = run(&["analyze", path.to_str().unwrap(), "--column", "value"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["counts"], serde_json::json!([63, 37, 18, 15, 15, 13, 7, 7, 8]));
    assert!((doc["chi_square"].as_f64().unwrap() - 5.206).abs() < 0.01);
    assert_eq!(doc["verdict"]["p05"], "accept");
    assert_eq!(doc["df"], 8);
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let path = fixture("physical_constants.csv");
    let p = path.to_str().unwrap();
    let doc = json(&run(&["analyze", p, "--column", "value", "--format", "json"]));
    let csv_out = stdout(&run(&["analyze", p, "--column", "value", "--format", "csv"]));
    let mut lines = csv_out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let field = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    for key in ["chi_square", "d1", "d_max"] {
        assert_eq!(field(key).parse::<f64>().unwrap(), doc[key].as_f64().unwrap(), "{key}");
    }
    for d in 1..=9usize {
        assert_eq!(
            field(&format!("observed_{d}")).parse::<f64>().unwrap(),
            doc["observed"][d - 1].as_f64().unwrap()
        );
    }
}

#[test]
fn generated_primes_reject() {
    let dir = tempfile::tempdir().unwrap();
    let values = run(&["generate", "primes", "--below", "1000", "--values"]);
    assert!(values.status.success());
    let path = dir.path().join("primes.txt");
    std::fs::write(&path, &values.stdout).unwrap();

    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json(&out);
    assert_eq!(doc["verdict"]["p05"], "reject");
    assert_eq!(doc["verdict"]["p01"], "reject");
    assert!((doc["chi_square"].as_f64().unwrap() - 45.0).abs() < 0.05);

    let out = run(&["analyze", path.to_str().unwrap(), "--level", "1", "--format", "text"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("reject"));
}

#[test]
fn empty_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.txt");
    std::fs::write(&path, "no numbers here").unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).to_lowercase().contains("empty"));
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = dir.path().join("bad.csv");
    std::fs::write(&ragged, "a,b\n1,2\n3\n").unwrap();
    let out = run(&["analyze", ragged.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));

    let out = run(&["analyze", ragged.to_str().unwrap(), "--column", "zzz"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(run(&["analyze", "/nonexistent/file.txt"]).status.code(), Some(1));
    assert_eq!(run(&["analyze"]).status.code(), Some(1));
    assert_eq!(run(&["generate", "fibonacci", "--terms", "0x"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--noise", "uniform:-1,1"]).status.code(), Some(1));
}

#[test]
fn text_scanning_options() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("article.txt");
    std::fs::write(&path, "In 1998 the price rose 0.150 to 2,300 (see A4).\n").unwrap();
    let p = path.to_str().unwrap();
    let tokens = dir.path().join("tokens.csv");
    let out = run(&[
        "analyze", p, "--separators", "--skip-shape", "year", "--dump-tokens", tokens.to_str().unwrap(),
    ]);
    let doc = json(&out);
    assert_eq!(doc["counts"], serde_json::json!([1, 1, 0, 0, 0, 0, 0, 0, 0]));
    assert_eq!(doc["exclusions"], 1);
    assert_eq!(
        std::fs::read_to_string(&tokens).unwrap(),
        "line,column,raw,value\n1,24,0.150,0.150\n1,33,\"2,300\",2300\n"
    );
}

#[test]
fn generate_streams() {
    let fib = run(&["generate", "fibonacci", "--a1", "1", "--a2", "2", "--terms", "5", "--values"]);
    assert_eq!(stdout(&fib), "1\n2\n3\n5\n8\n");
    assert_eq!(stdout(&run(&["generate", "primes", "--below", "10", "--values"])), "2\n3\n5\n7\n");
    assert_eq!(stdout(&run(&["generate", "factorial", "--n", "5"])), "1\n2\n6\n2\n1\n");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("series.conf");
    std::fs::write(&cfg, "# fifth powers\npower_n\nk = 5\nn = 4\n").unwrap();
    let out = run(&["generate", "--config", cfg.to_str().unwrap(), "--values"]);
    assert_eq!(stdout(&out), "1\n32\n243\n1024\n");
}

#[test]
fn generate_census_reports() {
    let out = run(&["generate", "factorial", "--n", "100", "--census"]);
    let doc = json(&out);
    assert!((doc["chi_square"].as_f64().unwrap() - 6.95).abs() < 0.005);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn simulate_curves() {
    let out = run(&["simulate", "--noise", "constant:10", "--steps", "4", "--walkers", "100", "--seed", "5"]);
    let text = stdout(&out);
    assert!(text.starts_with("# seed=5 rng=ChaCha8Rng"));
    let values: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("step"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 4);
    assert!(values.iter().all(|v| (v - (5f64).log10()).abs() < 1e-9));

    let base2 = stdout(&run(&["simulate", "--base", "2", "--steps", "3", "--walkers", "50"]));
    assert!(base2.lines().filter(|l| l.ends_with(",0")).count() == 3);

    let a = stdout(&run(&["simulate", "--steps", "10", "--walkers", "300", "--seed", "9"]));
    let b = stdout(&run(&["simulate", "--steps", "10", "--walkers", "300", "--seed", "9"]));
    assert_eq!(a, b);
    let j = json(&run(&["simulate", "--steps", "3", "--walkers", "30", "--format", "json"]));
    assert_eq!(j["meta"]["seed"], 0);
    assert_eq!(j["curve"].as_array().unwrap().len(), 3);
}

#[test]
fn expected_tables() {
    let moments = stdout(&run(&["expected", "--table", "moments", "--k", "1..7"]));
    assert_eq!(moments.lines().count(), 8);
    assert!(moments.contains("1,3.44023696712,6.05651263138"));
    let tvd = stdout(&run(&["expected", "--table", "tvd", "--k", "1..7"]));
    assert!(tvd.lines().nth(1).unwrap().starts_with("1,0.268726657995"));
    let corr = stdout(&run(&["expected", "--table", "corr", "--max-j", "5"]));
    assert_eq!(corr.lines().count(), 11);
    assert!(corr.contains("1,2,0.0560563"));
    let probs = stdout(&run(&["expected", "--k", "1", "--sample-size", "1000"]));
    assert!(probs.contains("1,1,0.301029995664,301.029995664"));
    let base8 = stdout(&run(&["expected", "--base", "8"]));
    assert_eq!(base8.lines().count(), 8);
    assert_eq!(run(&["expected", "--k", "9"]).status.code(), Some(1));
}
