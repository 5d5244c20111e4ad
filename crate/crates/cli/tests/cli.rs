use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qrlbench(args: &[&str], output_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrlbench"))
        .args(args)
        .env("QRLBENCH_OUTPUT_ROOT", output_root)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, family: &str) -> PathBuf {
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(
        &path,
        format!(
            "name = \"{name}\"\nseeds = [0, 1]\nmax_env_steps = 60\n[env]\nid = \"gridworld_3x3\"\n[agent]\nfamily = \"{family}\"\nn_layers = 1\n"
        ),
    )
    .unwrap();
    path
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn validate_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "good", "aa");
    let out = qrlbench(&["validate", good.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("ok: good"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = \"bad\"\nbogus = 1\n[env]\nid = \"gridworld_3x3\"\n[agent]\nfamily = \"aa\"\n").unwrap();
    let out = qrlbench(&["validate", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("configuration error"));

    let missing = qrlbench(&["validate", "does/not/exist.toml"], dir.path());
    assert_eq!(missing.status.code(), Some(2));

    let empty_seeds = dir.path().join("seeds.toml");
    std::fs::write(
        &empty_seeds,
        "name = \"s\"\nseeds = []\n[env]\nid = \"gridworld_3x3\"\n[agent]\nfamily = \"aa\"\n",
    )
    .unwrap();
    let out = qrlbench(&["validate", empty_seeds.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("seed"));
}

#[test]
fn run_writes_under_output_root_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "aa_small", "aa");
    let root = dir.path().join("results");
    let out = qrlbench(&["run", config.to_str().unwrap()], &root);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let run_dir = root.join("aa_small");
    for f in ["seed_0.csv", "seed_1.csv", "summary.json", "config.toml", "wall_time.json"] {
        assert!(run_dir.join(f).is_file(), "{f}");
    }
    let first = std::fs::read(run_dir.join("seed_1.csv")).unwrap();

    let other = dir.path().join("again");
    let out = qrlbench(
        &["run", config.to_str().unwrap(), "--out", other.to_str().unwrap()],
        &root,
    );
    assert!(out.status.success());
    assert_eq!(std::fs::read(other.join("seed_1.csv")).unwrap(), first);
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "qpg_small", "qpg");
    let out_dir = dir.path().join("o");
    let out = qrlbench(
        &[
            "run",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seeds",
            "3,4,5",
            "--max-env-steps",
            "25",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    for s in [3, 4, 5] {
        assert!(out_dir.join(format!("seed_{s}.csv")).is_file());
    }
    assert!(!out_dir.join("seed_0.csv").exists());
    let summary = std::fs::read_to_string(out_dir.join("summary.json")).unwrap();
    assert!(summary.contains("\"budget\": 25"));
}

#[test]
fn sweep_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "enc", "qpg");
    let out_dir = dir.path().join("sweep");
    let out = qrlbench(
        &["sweep", config.to_str().unwrap(), "--axis", "encoding", "--out", out_dir.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let table = std::fs::read_to_string(out_dir.join("sweep_encoding.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);

    let out = qrlbench(&["report", out_dir.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("enc_encoding_one_hot"));
    let long = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(long.starts_with("experiment,seed,x_axis,x,y\n"));
}

#[test]
fn sweep_rejects_incompatible_axis() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "aa", "aa");
    for axis in ["encoding", "replica_count", "ansatz_variant", "nonsense"] {
        let out = qrlbench(&["sweep", config.to_str().unwrap(), "--axis", axis], dir.path());
        assert_eq!(out.status.code(), Some(2), "{axis}");
    }
    assert!(std::fs::read_dir(dir.path()).unwrap().count() == 1, "nothing was run");
}

#[test]
fn report_on_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = qrlbench(&["report", dir.path().to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("summary.json"));
}
