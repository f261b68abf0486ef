use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn idq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idq")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn evolve_frozen_bosons_to_stdout() {
    let dir = scratch("evolve_stdout");
    let cfg = write(
        &dir,
        "run.toml",
        "channel = \"phase_damping\"\nstatistics = \"boson\"\ntheta = 3.141592653589793\nindistinguishability = 1.0\nt_max = 5.0\nsamples = 21\n",
    );
    let out = idq(&["evolve", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().any(|l| l == "t,p_1m,p_1p,p_a,p_b,P_LR,C,I"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 21);
    for row in rows {
        assert!((row[6] - 1.0).abs() < 1e-10);
    }
}

#[test]
fn evolve_writes_output_path() {
    let dir = scratch("evolve_file");
    let target = dir.join("nested/out.csv");
    let cfg = write(
        &dir,
        "run.toml",
        &format!(
            "channel = \"amplitude_damping\"\nstatistics = \"fermion\"\ntheta = 1.5707963267948966\nl2 = 1.0\nlprime2 = 0.0\nt_max = 2.0\nsamples = 5\noutput_path = {:?}\n",
            target.to_str().unwrap()
        ),
    );
    let out = idq(&["evolve", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&fs::read_to_string(&target).unwrap());
    let c: Vec<f64> = rows.iter().map(|r| r[6]).collect();
    assert!((c[0] - 1.0).abs() < 1e-12);
    assert!((c[4] - (-2.0f64).exp()).abs() < 1e-10);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = scratch("bad_input");
    let missing = dir.join("nope.toml");
    assert_eq!(idq(&["evolve", missing.to_str().unwrap()]).status.code(), Some(2));

    let unknown = write(&dir, "a.toml", "channel = \"bitflip\"\nstatistics = \"boson\"\nindistinguishability = 1\nt_max = 1\nsamples = 2\n");
    assert_eq!(idq(&["evolve", &unknown]).status.code(), Some(2));

    let few = write(&dir, "b.toml", "channel = \"depolarizing\"\nstatistics = \"boson\"\nindistinguishability = 1\nt_max = 1\nsamples = 1\n");
    assert_eq!(idq(&["evolve", &few]).status.code(), Some(2));

    let forbidden = write(
        &dir,
        "c.toml",
        "channel = \"amplitude_damping\"\nstatistics = \"fermion\"\nl2 = 0.5\nlprime2 = 0.5\ninitial_state = \"two\"\nt_max = 1\nsamples = 2\n",
    );
    let out = idq(&["evolve", &forbidden]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("forbidden"));

    assert_eq!(idq(&["figure", "9z"]).status.code(), Some(2));
    assert_eq!(idq(&["validate", "--cases", "0"]).status.code(), Some(2));
    assert_eq!(idq(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn sweep_endpoints() {
    let dir = scratch("sweep");
    let cfg = write(&dir, "sweep.toml", "channel = \"depolarizing\"\nstatistics = \"fermion\"\ngrid = [0.0, 0.5, 1.0]\n");
    let out = idq(&["sweep", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().any(|l| l == "I,l2,C,P_LR"));
    let rows = data_rows(&csv);
    assert_eq!(rows[0][2], 0.0);
    assert!((rows[2][2] - 1.0).abs() < 1e-12);
}

#[test]
fn figure_output_is_byte_identical() {
    let a = scratch("figure_a");
    let b = scratch("figure_b");
    for dir in [&a, &b] {
        let out = idq(&["figure", "2a", "--out", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
}

#[test]
fn validate_is_reproducible() {
    let first = idq(&["validate", "--seed", "5", "--cases", "4"]);
    let second = idq(&["validate", "--seed", "5", "--cases", "4"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stdout));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn validate_forced_cases() {
    let out = idq(&["validate", "--cases", "1", "--force", "coincident-damping"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("max |p_1m(t) - p_1m(0)| = 0.000e0"));
    let out = idq(&["validate", "--cases", "1", "--force", "separated-dephasing"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(idq(&["validate", "--force", "sideways"]).status.code(), Some(2));
}
