use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;
use tspower_core::oracle::numeric_mean;
use tspower_core::{solve, LineSpectrum, Netlist, NetlistSpec, SampledSignal, Unit};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tspower"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_with(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra);
    cmd.output().expect("binary runs")
}

/// Writes a netlist and a config naming it into `dir`.
fn write_case(dir: &Path, netlist: Value, mut config: Value) -> PathBuf {
    fs::write(
        dir.join("net.json"),
        serde_json::to_string_pretty(&netlist).unwrap(),
    )
    .unwrap();
    config["netlist"] = json!("net.json");
    let path = dir.join("case.json");
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn flicker_netlist() -> Value {
    json!({
        "branches": [
            {"id": "R1", "kind": "resistor", "value": 10.0, "nodes": ["p", "0"]},
            {"id": "C1", "kind": "capacitor", "value": 0.3, "nodes": ["p", "0"]}
        ],
        "port": {"plus": "p", "ground": "0"}
    })
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn analyze_writes_the_expected_files_and_headers() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = run_with("analyze", &configs().join("rlc_ladder.json"), &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let (header, rows) = read_csv(&out.join("instantaneous.csv"));
    assert_eq!(
        header,
        ["t", "p", "p_d", "w_m", "w_e", "w", "x", "P_t", "Q_t"]
    );
    assert_eq!(rows.len(), 64);
    for s in ["0", "0.01", "0.1", "0.5", "1", "3"] {
        let (header, rows) = read_csv(&out.join(format!("scaled_s{s}.csv")));
        assert_eq!(header, ["t", "W_m", "W_e", "W", "X", "P", "Q", "P_d"]);
        assert_eq!(rows.len(), 64);
        for r in rows {
            assert!((r[3] - (r[1] + r[2])).abs() <= 1e-12 * r[3].abs().max(1.0));
            assert!((r[4] - (r[1] - r[2])).abs() <= 1e-12 * r[3].abs().max(1.0));
        }
    }
    let s = summary(&out);
    for key in [
        "active_power",
        "budeanu_reactive_power",
        "apparent_power",
        "character",
        "lines",
        "residuals",
    ] {
        assert!(s.get(key).is_some(), "summary lacks {key}");
    }
    let b: Value =
        serde_json::from_str(&fs::read_to_string(out.join("balance.json")).unwrap()).unwrap();
    for key in ["instantaneous", "active", "reactive"] {
        assert!(b[key]["relative"].as_f64().unwrap() < 1e-9);
    }

    let text = fs::read_to_string(out.join("instantaneous.csv")).unwrap();
    assert!(!text.contains('\r'));
    let first = text.lines().nth(1).unwrap();
    assert!(
        first.split(',').all(|v| v.contains('e')),
        "scientific notation: {first}"
    );
}

#[test]
fn analyze_output_is_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        assert!(
            run_with("analyze", &configs().join("flicker.json"), out, &[])
                .status
                .success()
        );
    }
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 4);
    for name in names {
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn format_flag_selects_outputs() {
    let tmp = TempDir::new().unwrap();
    let json_only = tmp.path().join("j");
    assert!(run_with(
        "analyze",
        &configs().join("flicker.json"),
        &json_only,
        &["--format", "json"]
    )
    .status
    .success());
    assert!(json_only.join("summary.json").exists());
    assert!(!json_only.join("instantaneous.csv").exists());
    let csv_only = tmp.path().join("c");
    assert!(run_with(
        "analyze",
        &configs().join("flicker.json"),
        &csv_only,
        &["--format", "csv"]
    )
    .status
    .success());
    assert!(csv_only.join("instantaneous.csv").exists());
    assert!(!csv_only.join("summary.json").exists());
}

#[test]
fn flicker_summary_values() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    assert!(
        run_with("analyze", &configs().join("flicker.json"), &out, &[])
            .status
            .success()
    );
    let s = summary(&out);
    let p = s["active_power"].as_f64().unwrap();
    let q = s["budeanu_reactive_power"].as_f64().unwrap();
    assert!((p - 10.05).abs() < 1e-6 * 10.05);
    assert!((q + 30.15).abs() < 1e-6 * 30.15);
    assert_eq!(s["character"], "capacitive");
}

#[test]
fn summary_agrees_with_sampled_means() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = configs().join("rlc_ladder.json");
    assert!(run_with("analyze", &config, &out, &[]).status.success());
    let s = summary(&out);

    // independent recomputation: sample u and i, average the products
    let spec: NetlistSpec = serde_json::from_str(
        &fs::read_to_string(configs().join("rlc_ladder_netlist.json")).unwrap(),
    )
    .unwrap();
    let net = Netlist::try_from(spec).unwrap();
    let u = LineSpectrum::from_tones(
        Unit::Volt,
        &[
            (1.0, 0.0, 0.0),
            (10.0, 1.0, 0.0),
            (2.0, 3.0, -0.4),
            (0.7, 5.0, 1.1),
        ],
    )
    .unwrap();
    let sol = solve(&net, &u).unwrap();
    let i = sol.port_current();
    let n = 20_001;
    let dt = 2.0 * std::f64::consts::PI / (n - 1) as f64;
    let sampled = |f: &dyn Fn(f64) -> f64| {
        SampledSignal::new(0.0, dt, (0..n).map(|k| f(k as f64 * dt)).collect()).unwrap()
    };
    let p = numeric_mean(&sampled(&|t| u.evaluate(t) * i.evaluate(t)));
    let u_rms = numeric_mean(&sampled(&|t| u.evaluate(t).powi(2))).sqrt();
    let i_rms = numeric_mean(&sampled(&|t| i.evaluate(t).powi(2))).sqrt();
    let (uh, ih) = (u.hilbert(), i.hilbert());
    let q_b = numeric_mean(&sampled(&|t| {
        0.5 * (uh.evaluate(t) * i.evaluate(t) - u.evaluate(t) * ih.evaluate(t))
    }));

    let close = |key: &str, v: f64| {
        let got = s[key].as_f64().unwrap();
        assert!((got - v).abs() <= 1e-6 * v.abs(), "{key}: {got} vs {v}");
    };
    close("active_power", p);
    close("voltage_rms", u_rms);
    close("current_rms", i_rms);
    close("apparent_power", u_rms * i_rms);
    close("budeanu_reactive_power", q_b);
}

#[test]
fn resistive_load_is_balanced() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    assert!(
        run_with("analyze", &configs().join("resistive.json"), &out, &[])
            .status
            .success()
    );
    let s = summary(&out);
    assert_eq!(s["character"], "balanced");
    let q = s["budeanu_reactive_power"].as_f64().unwrap();
    assert!(q.abs() < 1e-12 * s["apparent_power"].as_f64().unwrap());
    for key in ["instantaneous", "active", "reactive"] {
        assert!(s["residuals"][key].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn verify_passes_by_default_and_fails_at_zero_tolerance() {
    let tmp = TempDir::new().unwrap();
    let o = run_with(
        "verify",
        &configs().join("rlc_ladder.json"),
        tmp.path(),
        &[],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains("PASS")).count(), 4);

    let o = run_with(
        "verify",
        &configs().join("rlc_ladder.json"),
        tmp.path(),
        &["--tol", "0"],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn malformed_netlist_names_the_offending_path() {
    let tmp = TempDir::new().unwrap();
    let mut net = flicker_netlist();
    net["branches"][1]["value"] = json!("0.3");
    let config = write_case(
        tmp.path(),
        net,
        json!({"source": {"lines": [{"amplitude_peak": 1.0, "omega": 1.0}]}}),
    );
    let o = run_with("analyze", &config, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("branches[1].value"), "{stderr}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn invalid_inputs_exit_with_code_two() {
    let tmp = TempDir::new().unwrap();
    let source = json!({"source": {"lines": [{"amplitude_peak": 1.0, "omega": 1.0}]}});
    let mut negative = flicker_netlist();
    negative["branches"][0]["value"] = json!(-1.0);
    let mut unknown = flicker_netlist();
    unknown["branches"][0]["colour"] = json!("red");
    for net in [negative, unknown] {
        let config = write_case(tmp.path(), net, source.clone());
        assert_eq!(
            run_with("analyze", &config, &tmp.path().join("out"), &[])
                .status
                .code(),
            Some(2)
        );
    }
    let incommensurate = json!({"source": {"lines": [
        {"amplitude_peak": 1.0, "omega": 1.0},
        {"amplitude_peak": 1.0, "omega": std::f64::consts::SQRT_2}
    ]}});
    let config = write_case(tmp.path(), flicker_netlist(), incommensurate);
    assert_eq!(
        run_with("analyze", &config, &tmp.path().join("out"), &[])
            .status
            .code(),
        Some(2)
    );
    // an unreadable config is an input error like any other
    assert_eq!(
        run(&["analyze", "--config", "/nonexistent/config.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn singular_network_exits_with_code_three() {
    let tmp = TempDir::new().unwrap();
    let net = json!({
        "branches": [{"id": "L1", "kind": "inductor", "value": 1.0, "nodes": ["p", "0"]}],
        "port": {"plus": "p", "ground": "0"}
    });
    let config = write_case(
        tmp.path(),
        net,
        json!({"source": {"lines": [{"amplitude_peak": 1.0, "omega": 0.0}, {"amplitude_peak": 1.0, "omega": 1.0}]}}),
    );
    let o = run_with("analyze", &config, &tmp.path().join("out"), &[]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
}

#[test]
fn sweep_of_a_single_tone_decays_exponentially() {
    let tmp = TempDir::new().unwrap();
    let net = json!({
        "branches": [
            {"id": "R1", "kind": "resistor", "value": 1.0, "nodes": ["p", "a"]},
            {"id": "L1", "kind": "inductor", "value": 2.0, "nodes": ["a", "0"]}
        ],
        "port": {"plus": "p", "ground": "0"}
    });
    let omega = 1.5;
    let config = write_case(
        tmp.path(),
        net,
        json!({
            "source": {"lines": [{"amplitude_peak": 3.0, "omega": omega, "phase": 0.2}]},
            "s_grid": [0.0, 0.1, 0.4, 1.0, 2.0]
        }),
    );
    let out = tmp.path().join("out");
    assert!(run_with("sweep-s", &config, &out, &[]).status.success());
    let (header, rows) = read_csv(&out.join("sweep.csv"));
    assert_eq!(header, ["s", "mean_X", "mean_Q"]);
    let x0 = rows[0][1];
    let q0 = rows[0][2];
    assert!(x0 > 0.0 && q0 > 0.0);
    for r in &rows {
        let decay = (-2.0 * omega * r[0]).exp();
        assert!((r[1] - x0 * decay).abs() < 1e-12 * x0);
        assert!((r[2] - q0 * decay).abs() < 1e-12 * q0);
    }
    // Q = -dX/ds = 2 w X for a single tone
    assert!((q0 - 2.0 * omega * x0).abs() < 1e-12 * q0);
}

#[test]
fn sweep_slope_at_zero_gives_budeanu_reactive_power() {
    let tmp = TempDir::new().unwrap();
    let config = write_case(
        tmp.path(),
        flicker_netlist(),
        json!({
            "source": {"am": {"carrier": {"amplitude_peak": 14.142135623730951, "omega": 1.0}, "depth": 0.1, "mod_omega": 0.2}},
            "s_grid": [0.0, 1e-6]
        }),
    );
    let out = tmp.path().join("out");
    assert!(run_with("sweep-s", &config, &out, &[]).status.success());
    let (_, rows) = read_csv(&out.join("sweep.csv"));
    let slope = (rows[1][1] - rows[0][1]) / (rows[1][0] - rows[0][0]);
    assert!((-slope + 30.15).abs() < 1e-4 * 30.15, "slope {slope}");
}

#[test]
fn sweep_of_a_zero_source_is_zero() {
    let tmp = TempDir::new().unwrap();
    let config = write_case(
        tmp.path(),
        flicker_netlist(),
        json!({"source": {"lines": [{"amplitude_peak": 0.0, "omega": 1.0}]}, "s_grid": [0.0, 0.5, 1.0]}),
    );
    let out = tmp.path().join("out");
    let o = run_with("sweep-s", &config, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1] == 0.0 && r[2] == 0.0));
}
