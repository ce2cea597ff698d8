use std::path::Path;
use std::process::{Command, Output};

fn ascpr(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ascpr"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn generate_then_solve_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let gen = ascpr(
        &["generate", "--nx", "8", "--ny", "8", "--nz", "2", "--nsteps", "3", "--out", "prob"],
        dir.path(),
    );
    assert_eq!(code(&gen), 0, "{}", String::from_utf8_lossy(&gen.stderr));
    assert!(dir.path().join("prob/manifest.toml").exists());
    let solve = ascpr(&["solve", "--manifest", "prob/manifest.toml", "--mu", "10", "--out", "sol"], dir.path());
    assert_eq!(code(&solve), 0, "{}", String::from_utf8_lossy(&solve.stderr));
    let stdout = String::from_utf8_lossy(&solve.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("system")).count(), 3);
    assert!(dir.path().join("sol/solution_003.mtx").exists());
}

#[test]
fn verify_generated_matrix_passes() {
    let dir = tempfile::tempdir().unwrap();
    ascpr(&["generate", "--nx", "6", "--ny", "6", "--nz", "2", "--nsteps", "1", "--out", "p"], dir.path());
    let out = ascpr(&["verify", "--matrix", "p/system_001.mtx", "--block-size", "3", "--out", "v"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).lines().any(|l| l.starts_with("PASS coloring.independent")));
    assert!(dir.path().join("v/verify.json").exists());
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "theta = [0.0]\nbogus_key = 1\n").unwrap();
    assert_eq!(code(&ascpr(&["bench", "--config", "bad.toml"], dir.path())), 2);
    std::fs::write(dir.path().join("range.toml"), "theta = 1.5\n").unwrap();
    assert_eq!(code(&ascpr(&["bench", "--config", "range.toml"], dir.path())), 2);
    assert_eq!(code(&ascpr(&["solve", "--matrix", "missing.mtx"], dir.path())), 2);
    assert_eq!(code(&ascpr(&["bench", "--no-such-flag"], dir.path())), 2);
    std::fs::write(dir.path().join("junk.mtx"), "not a matrix\n").unwrap();
    assert_eq!(code(&ascpr(&["verify", "--matrix", "junk.mtx"], dir.path())), 2);
}

#[test]
fn singular_diagonal_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("z.mtx"),
        "%%MatrixMarket matrix coordinate real general\n3 3 4\n1 1 2.0\n2 1 1.0\n2 2 0.0\n3 3 1.0\n",
    )
    .unwrap();
    let out = ascpr(&["solve", "--matrix", "z.mtx"], dir.path());
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
}
