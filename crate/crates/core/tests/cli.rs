use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_henon-morse"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_writes_profile_and_z_zeros() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["solve", "--N", "3", "--p", "3", "--m", "3", "--out", "o"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let o = dir.path().join("o");
    for f in ["profile.json", "profile.csv", "emden_profile.csv"] {
        assert!(o.join(f).is_file(), "{f} missing");
    }
    let doc = read_json(o.join("profile.json"));
    assert_eq!(doc["z_zero_count"], 3);
    assert_eq!(doc["validation"]["sign_alternation_ok"], true);
    let csv = fs::read_to_string(o.join("profile.csv")).unwrap();
    assert!(csv.lines().count() > 100);
}

#[test]
fn spectrum_is_reproducible_through_the_cache() {
    let dir = TempDir::new().unwrap();
    let args = |out: &'static str| ["spectrum", "--p", "2.2", "--k", "4", "--out", out];
    assert_eq!(code(&run(dir.path(), &args("a"))), 0);
    assert_eq!(code(&run(dir.path(), &args("a"))), 0);
    let cache_files = fs::read_dir(dir.path().join("a/cache")).unwrap().count();
    assert!(cache_files >= 5);
    let mut no_cache = args("b").to_vec();
    no_cache.push("--no-cache");
    assert_eq!(code(&run(dir.path(), &no_cache)), 0);
    assert!(!dir.path().join("b/cache").exists());
    for f in [
        "spectrum.json",
        "singular_eigenfunctions.csv",
        "standard_eigenfunctions.csv",
    ] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs between cached and uncached runs");
    }
}

#[test]
fn morse_total_matches_thresholds_from_the_spectrum() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "morse", "--N", "3", "--alpha", "0", "--p", "3", "--m", "2", "--out", "o",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let morse = read_json(dir.path().join("o/morse.json"));
    // N = 3, α = 0: J = √(1/4 − ν̂) − 1/2, harmonics of degree j have 2j+1 copies
    let mut total = 0;
    for c in morse["report"]["per_eigenvalue"].as_array().unwrap() {
        let nu = c["nu_hat"].as_f64().unwrap();
        if nu < 0.0 {
            let j = (0.25 - nu).sqrt() - 0.5;
            total += (0..)
                .take_while(|&d| (d as f64) < j)
                .map(|d| 2 * d + 1)
                .sum::<u32>();
        }
    }
    assert_eq!(morse["report"]["total"], total);
    assert_eq!(total, 10);
    assert_eq!(morse["report"]["radial_morse"], 2);
    assert_eq!(morse["ordering_holds"], true);
    assert!(dir.path().join("o/morse.csv").is_file());
}

#[test]
fn morse_near_critical_exponent() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["morse", "--p", "4.9", "--out", "o"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let morse = read_json(dir.path().join("o/morse.json"));
    assert_eq!(morse["report"]["total"], 5);
    let j: Vec<f64> = morse["report"]["per_eigenvalue"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["J"].as_f64().unwrap())
        .collect();
    assert!(j[0] > 1.0 && j[0] < 2.0 && j[1] > 0.0 && j[1] < 1.0, "{j:?}");
}

#[test]
fn sweep_rows_and_empty_sweep() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "sweep", "--axis", "alpha", "--from", "0", "--to", "2", "--steps", "3", "--k", "3", "--out", "o",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("o/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "alpha,nu_1,nu_2,nu_3,total,lower_general,lower_f3");
    assert_eq!(lines.len(), 4);
    let alphas: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(alphas, vec![0.0, 1.0, 2.0]);

    let out = run(dir.path(), &["sweep", "--steps", "0", "--out", "e"]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("e/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn oracle_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["oracle", "--out", "o"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(dir.path().join("o/oracle.json"));
    assert_eq!(doc["agree"], true);
    assert_eq!(doc["liouville_count"], doc["oracle_count"]);

    let out = run(dir.path(), &["oracle", "--oracle-n", "5000", "--out", "g"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("oracle.n"));
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let dir = TempDir::new().unwrap();
    let cases: [(&str, &str); 4] = [
        ("{\"p\": \"three\"}", "p"),
        ("{\"spectral\": {\"gird\": 10}}", "spectral"),
        ("{\"N\": 1}", "N"),
        ("{\"k\": 0}", "k"),
    ];
    for (i, (text, field)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("c{i}.json"));
        fs::write(&path, text).unwrap();
        let out = run(dir.path(), &["solve", "--config", path.to_str().unwrap()]);
        assert_eq!(code(&out), 2, "{text}");
        assert!(stderr(&out).contains(field), "{text}: {}", stderr(&out));
    }
    let out = run(dir.path(), &["solve", "--p", "5"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("p:"));
    assert_eq!(code(&run(dir.path(), &["solve", "--bogus"])), 2);
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("run.json");
    fs::write(&path, "{\"N\": 3, \"p\": 2.2, \"m\": 1, \"out\": \"from_file\"}").unwrap();
    let out = run(
        dir.path(),
        &["solve", "--config", path.to_str().unwrap(), "--m", "2"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(dir.path().join("from_file/profile.json"));
    assert_eq!(doc["z_zero_count"], 2);
    assert_eq!(doc["metadata"]["nonlinearity"]["p"], 2.2);
}

#[test]
fn zero_potential_spectrum() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "spectrum",
            "--zero-potential",
            "--N",
            "4",
            "--k",
            "2",
            "--out",
            "o",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(dir.path().join("o/spectrum.json"));
    assert_eq!(doc["singular"]["eigenvalues"].as_array().unwrap().len(), 0);
    let first = doc["standard"]["eigenvalues"][0]["value"].as_f64().unwrap();
    // first Dirichlet eigenvalue of the unit ball in R^4 is j_{1,1}²
    assert!((first - 3.831_705_970_207_512f64.powi(2)).abs() < 1e-4 * first);
}
