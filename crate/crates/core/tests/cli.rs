use std::path::{Path, PathBuf};
use std::process::Command;

use kslab::cli::{run, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};
use kslab::experiments::RunConfig;
use kslab::functionals::{trace_run, verify_apriori_bounds, FunctionalRecord, Trace, TraceMeta};
use proptest::prelude::*;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn kslab(args: &[&str]) -> i32 {
    let mut argv = vec!["kslab".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run(argv)
}

fn out_arg(dir: &Path) -> String {
    format!("--out_dir={}", dir.display())
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn simulate_writes_record_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("default.toml");
    let code = kslab(&["simulate", "-c", cfg.to_str().unwrap(), "--t_end=0.5", &out_arg(dir.path())]);
    assert_eq!(code, EXIT_PASS);
    let mut rd = csv::Reader::from_path(dir.path().join("trace.csv")).unwrap();
    let header: Vec<&str> = rd.headers().unwrap().iter().collect();
    assert_eq!(header, FunctionalRecord::COLUMNS);
    assert_eq!(rd.records().count(), 6);
    assert!(dir.path().join("snapshots").join("u_00000.bin").exists());
}

#[test]
fn simulate_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let code = kslab(&[
            "simulate",
            "--u0=random:1,0.5,6,11",
            "--cells=64",
            "--t_end=0.3",
            "--snapshot_every=1",
            &out_arg(d.path()),
        ]);
        assert_eq!(code, EXIT_PASS);
    }
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&a, "trace.csv"), read(&b, "trace.csv"));
    assert_eq!(read(&a, "snapshots/u_00003.bin"), read(&b, "snapshots/u_00003.bin"));
}

#[test]
fn verify_zero_trace_margins_equal_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let zero = ["--u0=const:0", "--v0=const:0", "--cells=32", "--t_end=1", "--snapshot_every=0"];
    let mut args = vec!["simulate"];
    args.extend(zero);
    let out = out_arg(dir.path());
    args.push(&out);
    assert_eq!(kslab(&args), EXIT_PASS);

    let trace = dir.path().join("trace.csv");
    let trace_arg = format!("--trace={}", trace.display());
    let mut args = vec!["verify", &trace_arg];
    args.extend(zero);
    args.push(&out);
    assert_eq!(kslab(&args), EXIT_PASS);

    let items = rows(&dir.path().join("bounds.csv"));
    assert!(!items.is_empty());
    for it in items {
        // name,t,theoretical,observed,margin,tolerance,pass,status
        assert_eq!(&it[3], "0.0", "{it:?}");
        assert_eq!(it[2].parse::<f64>().unwrap(), it[4].parse::<f64>().unwrap());
        assert_eq!(&it[6], "true");
    }
}

#[test]
fn decay_config_reports_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("decay.toml");
    let code = kslab(&["experiment", "decay", "-c", cfg.to_str().unwrap(), &out_arg(dir.path())]);
    assert_eq!(code, EXIT_PASS);
    let runs = rows(&dir.path().join("decay_runs.csv"));
    let crossings: Vec<_> = runs.iter().filter(|r| r[1].starts_with("cross_")).collect();
    assert!(crossings.len() >= 4);
    // every verdict row names where its reference value came from
    for r in rows(&dir.path().join("decay_verdicts.csv")) {
        let prov = &r[6];
        assert!(
            ["formula:", "fitted:", "oracle:", "config:"].iter().any(|p| prov.starts_with(p)),
            "{prov}"
        );
    }
}

#[test]
fn unknown_key_is_named_on_stderr() {
    let out = Command::new(env!("CARGO_BIN_EXE_kslab"))
        .args(["simulate", "--kapa=1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown key 'kapa'"), "{err}");
}

#[test]
fn plot_writes_script() {
    let dir = tempfile::tempdir().unwrap();
    let d = format!("--dir={}", dir.path().display());
    assert_eq!(kslab(&["plot", &d]), EXIT_PASS);
    assert!(dir.path().join("plot.py").exists());
}

#[test]
fn missing_config_file_is_an_error() {
    assert_eq!(kslab(&["simulate", "-c", "/nonexistent/config.toml"]), EXIT_ERROR);
}

fn base_trace() -> (RunConfig, Trace) {
    let c = RunConfig {
        cells: 32,
        t_end: 1.0,
        ..Default::default()
    };
    let tr = trace_run(&c.stepper().unwrap(), c.initial_state().unwrap(), c.t_end, c.cadence, 0)
        .unwrap()
        .trace;
    (c, tr)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exit_status_tracks_bound_report(k in 1usize..10, factor in 0.5f64..2.0, garble in prop::bool::weighted(0.15)) {
        let (c, tr) = base_trace();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let mut recs = tr.records().to_vec();
        recs[k].mass_u *= factor;
        let meta = TraceMeta { params: c.params().unwrap(), grid: c.grid().unwrap(), dt: c.dt };
        let mut synth = Trace::new(meta);
        for r in recs {
            synth.push(r).unwrap();
        }
        synth.write_csv(&path).unwrap();
        if garble {
            let text = std::fs::read_to_string(&path).unwrap().replacen(',', ";", 40);
            std::fs::write(&path, text).unwrap();
        }
        let trace_arg = format!("--trace={}", path.display());
        let code = kslab(&["verify", &trace_arg, "--cells=32", &out_arg(dir.path())]);
        let expected = if garble {
            EXIT_ERROR
        } else if verify_apriori_bounds(&synth, c.rel_tol).unwrap().all_pass() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        };
        prop_assert_eq!(code, expected);
    }
}
