//! CLI behavior: exit codes, config handling, artifact formats.

use std::path::Path;
use std::process::Command;

use fadelab_core::baselines::parse_reports_csv;

fn fadelab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fadelab"))
        .args(args)
        .output()
        .expect("spawn fadelab")
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn tiny_cfg(out: &Path) -> String {
    format!(
        concat!(
            "output_dir = {}\n",
            "train_channels = 2\nval_channels = 1\ntest_channels = 1\n",
            "train_sequences = 6\nval_sequences = 2\ntest_sequences = 2\n",
            "epochs = 1\nbatch_size = 4\ntest_snr_db = 10,20\ntrace_length = 320\n"
        ),
        out.display()
    )
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.cfg", "no_such_key = 1\n");
    let out = fadelab(&["--config", &cfg, "gen-channels"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
}

#[test]
fn invalid_layout_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.cfg", "pilots_per_block = 5\n");
    let out = fadelab(&["--config", &cfg, "gen-channels"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_2() {
    let out = fadelab(&["--config", "/definitely/not/here.cfg", "gen-channels"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_inputs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_cfg(dir.path(), "t.cfg", &tiny_cfg(&out_dir));
    // gen-dataset without channels.
    let out = fadelab(&["--config", &cfg, "gen-dataset"]);
    assert_eq!(out.status.code(), Some(3));
    // train without datasets.
    let out = fadelab(&["--config", &cfg, "train"]);
    assert_eq!(out.status.code(), Some(3));
    // eval without a model.
    let out = fadelab(&["--config", &cfg, "eval"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn corrupted_channel_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_cfg(dir.path(), "t.cfg", &tiny_cfg(&out_dir));
    assert!(fadelab(&["--config", &cfg, "gen-channels"]).status.success());
    let victim = out_dir.join("channels_train.fch");
    let mut bytes = std::fs::read(&victim).unwrap();
    bytes[0] = b'X';
    std::fs::write(&victim, bytes).unwrap();
    let out = fadelab(&["--config", &cfg, "gen-dataset"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn full_tiny_pipeline_produces_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_cfg(dir.path(), "t.cfg", &tiny_cfg(&out_dir));
    for args in [
        &["gen-channels"][..],
        &["gen-dataset"],
        &["train"],
        &["eval"],
        &["trace"],
    ] {
        let out = fadelab(&[&["--config", &cfg], args].concat());
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }

    // Eval CSV: strict schema, 5 estimators x 2 SNRs.
    let text = std::fs::read_to_string(out_dir.join("eval_mse.csv")).unwrap();
    let reports = parse_reports_csv(&text).unwrap();
    assert_eq!(reports.len(), 10);
    assert!(text.ends_with('\n') && !text.contains('\r'));

    // Train log: header + one epoch.
    let log = std::fs::read_to_string(out_dir.join("train_log.csv")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "epoch,train_loss,val_loss");
    assert_eq!(lines.len(), 2);

    // Trace: header + one row per symbol.
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 320 + 1);

    // Checkpoint reloads and matches the documented parameter count.
    let model: fadelab_core::ModelParams64 =
        fadelab_core::io::read_fnn(std::fs::File::open(out_dir.join("model.fnn")).unwrap()).unwrap();
    assert_eq!(model.param_count(), 40002);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let cfg_a = write_cfg(dir.path(), "a.cfg", &tiny_cfg(&out_a));
    let cfg_b = write_cfg(dir.path(), "b.cfg", &tiny_cfg(&out_b));
    assert!(fadelab(&["--config", &cfg_a, "gen-channels"]).status.success());
    assert!(fadelab(&["--config", &cfg_b, "--seed", "9", "gen-channels"]).status.success());
    let a = std::fs::read(out_a.join("channels_train.fch")).unwrap();
    let b = std::fs::read(out_b.join("channels_train.fch")).unwrap();
    assert_ne!(a, b, "different seeds must give different ensembles");
}

#[test]
fn epochs_zero_writes_initial_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let body = tiny_cfg(&out_dir).replace("epochs = 1", "epochs = 0");
    let cfg = write_cfg(dir.path(), "t.cfg", &body);
    assert!(fadelab(&["--config", &cfg, "gen-channels"]).status.success());
    assert!(fadelab(&["--config", &cfg, "gen-dataset"]).status.success());
    assert!(fadelab(&["--config", &cfg, "train"]).status.success());
    let log = std::fs::read_to_string(out_dir.join("train_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 1, "header only");
    assert!(out_dir.join("model.fnn").exists());
}
