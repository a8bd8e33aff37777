//! End-to-end tests of the `cmf` binary: subcommand plumbing and the
//! documented exit-code contract (0 success, 2 non-convergence, 1 usage or
//! I/O errors).

use std::path::Path;
use std::process::{Command, Output};

fn cmf(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmf"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to spawn cmf")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn synth_reconstruct_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmf(
        &[
            "synth",
            "--dims",
            "12x10",
            "--noise",
            "0.2",
            "--seed",
            "5",
            "--out-prefix",
            "obs",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "synth failed: {}", stderr(&out));
    for file in ["obs_truth.cmf", "obs_real.cmf", "obs_imag.cmf", "obs.meta"] {
        assert!(dir.path().join(file).exists(), "{file} missing");
    }
    let meta = std::fs::read_to_string(dir.path().join("obs.meta")).unwrap();
    assert!(meta.contains("seed=5"), "meta: {meta}");

    let out = cmf(
        &[
            "reconstruct",
            "--input",
            "obs_real.cmf",
            "--imag",
            "obs_imag.cmf",
            "--kind",
            "complex-pair",
            "--n-theta",
            "8",
            "--smoothness",
            "0.2",
            "--max-iters",
            "500",
            "--out-labels",
            "labels.cmf",
            "--out-u",
            "u.cmf",
            "--out-trace",
            "trace.csv",
            "--out-preview",
            "preview.png",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "reconstruct: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("converged=true"), "stdout: {text}");
    for file in ["labels.cmf", "u.cmf", "trace.csv", "preview.png"] {
        assert!(dir.path().join(file).exists(), "{file} missing");
    }

    // energy of the result against its own cost fields via files
    let out = cmf(
        &[
            "trace-plot-data",
            "--trace",
            "trace.csv",
            "--columns",
            "iteration,mean_G",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("iteration,mean_G\n"), "got: {text}");
    assert!(text.lines().count() > 1);
}

#[test]
fn nonconvergence_exits_two_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    cmf(
        &[
            "synth",
            "--dims",
            "8x8",
            "--noise",
            "0.4",
            "--out-prefix",
            "obs",
        ],
        dir.path(),
    );
    let out = cmf(
        &[
            "reconstruct",
            "--input",
            "obs_real.cmf",
            "--imag",
            "obs_imag.cmf",
            "--n-theta",
            "8",
            "--max-iters",
            "3",
            "--tolerance",
            "1e-12",
            "--out-labels",
            "labels.cmf",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(dir.path().join("labels.cmf").exists());
    assert!(stderr(&out).contains("not converged"));
}

#[test]
fn usage_and_io_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // unknown flag
    let out = cmf(&["reconstruct", "--no-such-flag"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    // missing input file
    let out = cmf(
        &[
            "reconstruct",
            "--input",
            "absent.cmf",
            "--imag",
            "b.cmf",
            "--out-labels",
            "l.cmf",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    // --help is not an error
    let out = cmf(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("reconstruct"));
}

#[test]
fn truncated_input_reports_offset() {
    let dir = tempfile::tempdir().unwrap();
    cmf(
        &["synth", "--dims", "6x6", "--out-prefix", "obs"],
        dir.path(),
    );
    let path = dir.path().join("obs_real.cmf");
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
    let out = cmf(
        &[
            "reconstruct",
            "--input",
            "obs_real.cmf",
            "--imag",
            "obs_imag.cmf",
            "--n-theta",
            "4",
            "--out-labels",
            "labels.cmf",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(
        err.contains("truncated") && err.contains("offset"),
        "stderr: {err}"
    );
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    cmf(
        &[
            "synth",
            "--dims",
            "10x6",
            "--noise",
            "0.1",
            "--out-prefix",
            "obs",
        ],
        dir.path(),
    );
    std::fs::write(
        dir.path().join("run.cfg"),
        "input=obs_real.cmf\nimag=obs_imag.cmf\nn_theta=8\nsolver=al\nmax_iters=1500\nsmoothness=0.05\nout_labels=labels.cmf\n",
    )
    .unwrap();
    // flags override the config's solver and step parameters
    let out = cmf(
        &[
            "reconstruct",
            "--config",
            "run.cfg",
            "--solver",
            "pf",
            "--c",
            "0.2",
            "--tau",
            "0.05",
            "--tolerance",
            "1e-4",
            "--out-trace",
            "trace.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("solver=pf"));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,energy,pf_objective,max_du,norm_err"));
    assert!(dir.path().join("labels.cmf").exists());
}

#[test]
fn energy_subcommand_reports_components() {
    let dir = tempfile::tempdir().unwrap();
    cmf(
        &[
            "synth",
            "--dims",
            "6x4",
            "--noise",
            "0.2",
            "--out-prefix",
            "obs",
        ],
        dir.path(),
    );
    let out = cmf(
        &[
            "reconstruct",
            "--input",
            "obs_real.cmf",
            "--imag",
            "obs_imag.cmf",
            "--n-theta",
            "8",
            "--max-iters",
            "300",
            "--out-u",
            "u.cmf",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    // build the matching data cost by hand and round-trip it through a file
    let real = cyclic_maxflow_cli::format::read_spatial(&dir.path().join("obs_real.cmf")).unwrap();
    let imag = cyclic_maxflow_cli::format::read_spatial(&dir.path().join("obs_imag.cmf")).unwrap();
    let grid = cyclic_maxflow::CylinderGrid::new(real.grid().spatial_dims(), 8).unwrap();
    let obs =
        cyclic_maxflow::data_term::phase_from_complex(&grid, real.values(), imag.values()).unwrap();
    let d = cyclic_maxflow::data_term::build_data_term(&obs, 1.0, 1.0).unwrap();
    cyclic_maxflow_cli::format::write_cyclic(&dir.path().join("d.cmf"), &d).unwrap();

    let out = cmf(
        &["energy", "--u", "u.cmf", "--d", "d.cmf", "--s-value", "0.5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("data_energy="), "stdout: {text}");
    assert!(text.contains("smoothness_energy="));
    assert!(text.contains("total="));
    // total is the sum of the two parts
    let get = |key: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(key))
            .and_then(|l| l.split('=').nth(1))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((get("data_energy") + get("smoothness_energy") - get("total")).abs() < 1e-12);
}

#[test]
fn same_command_twice_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    cmf(
        &[
            "synth",
            "--dims",
            "10x8",
            "--noise",
            "0.3",
            "--seed",
            "9",
            "--out-prefix",
            "obs",
        ],
        dir.path(),
    );
    for run in ["one", "two"] {
        let out = cmf(
            &[
                "reconstruct",
                "--input",
                "obs_real.cmf",
                "--imag",
                "obs_imag.cmf",
                "--n-theta",
                "8",
                "--max-iters",
                "300",
                "--out-labels",
                &format!("labels_{run}.cmf"),
                "--out-u",
                &format!("u_{run}.cmf"),
                "--out-trace",
                &format!("trace_{run}.csv"),
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    for stem in ["labels", "u", "trace"] {
        let ext = if stem == "trace" { "csv" } else { "cmf" };
        let a = std::fs::read(dir.path().join(format!("{stem}_one.{ext}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("{stem}_two.{ext}"))).unwrap();
        assert_eq!(a, b, "{stem} differs between runs");
    }
}
