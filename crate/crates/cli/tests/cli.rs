use std::path::PathBuf;
use std::process::{Command, Output};

fn daqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daqc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("daqc-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn compile_summarizes_every_paradigm() {
    let o = daqc(&["compile", "--qubits", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("paradigm,qubits,events,analog_blocks,total_time_us\n"));
    assert_eq!(s.lines().count(), 4);
}

#[test]
fn compile_dump_lists_events() {
    let o = daqc(&["compile", "--qubits", "3", "--paradigm", "dqc", "--dump"]);
    assert!(o.status.success());
    // 2(n−1)+1 single-qubit layers plus 7 events per pair
    assert!(stdout(&o).lines().count() >= 26);
}

#[test]
fn four_qubit_daqc_is_a_config_error() {
    let o = daqc(&["compile", "--qubits", "4", "--paradigm", "bdaqc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("N = 4"));
}

#[test]
fn bad_config_exits_2() {
    let dir = scratch("badcfg");
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("run.cfg");
    std::fs::write(&f, "no_such_key = 1\n").unwrap();
    let o = daqc(&["simulate", "--config", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(daqc(&["simulate", "--paradigm", "xyz"]).status.code(), Some(2));
    assert_eq!(daqc(&["simulate", "--config", "/definitely/missing.cfg"]).status.code(), Some(2));
}

#[test]
fn show_config_round_trips_through_a_file() {
    let o = daqc(&["--show-config", "simulate", "--seed", "42", "--no-bitflip"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("seed = 42"));
    assert!(text.contains("bitflip = false"));
    let dir = scratch("showcfg");
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("run.cfg");
    std::fs::write(&f, &text).unwrap();
    let again = daqc(&["simulate", "--show-config", "--config", f.to_str().unwrap()]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn simulate_csv_is_byte_stable() {
    let args = ["simulate", "--qubits", "3", "--trajectories", "8", "--paradigm", "sdaqc", "--seed", "5"];
    let a = daqc(&args);
    let b = daqc(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let s = stdout(&a);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("beta,sdaqc,sdaqc_stderr"));
    assert_eq!(lines.count(), 33);
    let c = daqc(&["simulate", "--qubits", "3", "--trajectories", "8", "--paradigm", "sdaqc", "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_writes_csv_and_json() {
    let dir = scratch("sim");
    let o = daqc(&["simulate", "--qubits", "2", "--trajectories", "4", "--figure-of-merit", "z0", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.join("simulate_n2_z0.csv")).unwrap();
    assert!(csv.starts_with("beta,dqc,sdaqc,bdaqc\n"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("results.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 1);
    assert!(json["beta_averaged_fidelity"]["bdaqc"].as_f64().unwrap() > 0.5);
}

#[test]
fn noise_toggles_reach_the_engine() {
    let base = ["simulate", "--qubits", "2", "--trajectories", "2", "--paradigm", "dqc"];
    let clean = daqc(&[&base[..], &["--no-bitflip", "--no-decoherence", "--no-control-noise", "--no-measurement-error"]].concat());
    let first = stdout(&clean).lines().nth(1).unwrap().to_string();
    assert_eq!(first, "0,1.00000,0");
    let noisy = daqc(&base);
    assert_ne!(stdout(&noisy).lines().nth(1).unwrap(), first);
}

#[test]
fn mitigation_from_published_values() {
    let dir = scratch("mit");
    let o = daqc(&["mitigate", "--from-paper-values", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success());
    let t1 = std::fs::read_to_string(dir.join("table1_fidelity.csv")).unwrap();
    let rows: Vec<&str> = t1.lines().collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0], "row,b0,b1,b2,b3,b4");
    assert_eq!(rows[1], "g0,0.727000,0.800600,0.815600,0.821100,0.823600");
    let t3 = std::fs::read_to_string(dir.join("table3_fidelity_stage2.csv")).unwrap();
    let vals: Vec<f64> = t3.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    for (got, want) in vals.iter().zip([1.0, 0.9929, 0.9865, 0.9862, 0.9862]) {
        assert!((got - want).abs() <= 0.001, "{got} {want}");
    }
    let t4 = std::fs::read_to_string(dir.join("table4_z0_stage2.csv")).unwrap();
    let vals: Vec<f64> = t4.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    for (got, want) in vals.iter().zip([0.2887, 0.2895, 0.2881, 0.2879, 0.2883]) {
        assert!((got - want).abs() <= 0.001, "{got} {want}");
    }
    assert!(dir.join("table2_z0.csv").exists() && dir.join("results.json").exists());
}

#[test]
fn simulated_mitigation_runs() {
    let o = daqc(&["mitigate"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(s.matches("Ideal,Linear,Quadratic,Cubic,Richardson").count(), 2);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = scratch("io");
    std::fs::create_dir_all(&dir).unwrap();
    let blocker = dir.join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = daqc(&["compile", "--qubits", "2", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn validate_passes() {
    let o = daqc(&["validate"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}
