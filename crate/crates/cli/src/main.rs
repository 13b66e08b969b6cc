mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use daqc::circuit::{build_qft, qft_reference, CircuitSchedule, EventKind, Paradigm};
use daqc::engine::{beta_grid, sweep_average, sweep_beta, SweepPoint};
use daqc::mitigation::{mitigate_grid, published_grid, published_report, published_stage1, run_mitigation_experiment, MitigationReport, Pipeline};
use daqc::state::{expect_z, make_initial};

use config::{ConfigError, RunConfig};
use output::{csv_bytes, num, write_file};

/// Exit codes: 0 ok, 1 validation failed, 2 bad configuration, 3 numerical failure, 4 I/O.
enum Failure {
    Validation(String),
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Config(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<daqc::Error> for Failure {
    fn from(e: daqc::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

#[derive(Parser)]
#[command(name = "daqc", version, about = "Noisy QFT simulation in digital and digital-analog paradigms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; tables go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    paradigm: Option<ParadigmArg>,
    #[arg(long, global = true)]
    qubits: Option<usize>,
    #[arg(long, global = true)]
    trajectories: Option<usize>,
    #[arg(long, global = true)]
    no_bitflip: bool,
    #[arg(long, global = true)]
    no_decoherence: bool,
    #[arg(long, global = true)]
    no_control_noise: bool,
    #[arg(long, global = true)]
    no_measurement_error: bool,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParadigmArg {
    Dqc,
    Sdaqc,
    Bdaqc,
}

impl From<ParadigmArg> for Paradigm {
    fn from(p: ParadigmArg) -> Self {
        match p {
            ParadigmArg::Dqc => Paradigm::Dqc,
            ParadigmArg::Sdaqc => Paradigm::Sdaqc,
            ParadigmArg::Bdaqc => Paradigm::Bdaqc,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigureOfMerit {
    Fidelity,
    Z0,
}

#[derive(Subcommand)]
enum Command {
    /// Build the QFT schedule and summarize it.
    Compile {
        /// Print every event.
        #[arg(long)]
        dump: bool,
    },
    /// Noisy beta sweep over the W/GHZ input family.
    Simulate {
        #[arg(long, value_enum, default_value = "fidelity")]
        figure_of_merit: FigureOfMerit,
    },
    /// Two-stage zero-noise extrapolation for bDAQC.
    Mitigate {
        /// Feed the published grid instead of simulating.
        #[arg(long)]
        from_paper_values: bool,
    },
    /// Quick self-checks; exits 1 when one fails.
    Validate,
}

fn load_config(c: &Common, qubits_for_mitigation: bool) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(p) = c.paradigm {
        cfg.paradigm = Some(p.into());
    }
    if let Some(n) = c.qubits {
        if qubits_for_mitigation {
            cfg.mitigation_qubits = n;
        } else {
            cfg.qubits = n;
        }
    }
    if let Some(k) = c.trajectories {
        cfg.trajectories = k;
    }
    cfg.bitflip &= !c.no_bitflip;
    cfg.decoherence &= !c.no_decoherence;
    cfg.control_noise &= !c.no_control_noise;
    cfg.measurement_error &= !c.no_measurement_error;
    cfg.validate()?;
    Ok(cfg)
}

fn paradigms(cfg: &RunConfig) -> Vec<Paradigm> {
    cfg.paradigm.map_or(Paradigm::ALL.to_vec(), |p| vec![p])
}

fn emit(out: Option<&Path>, name: &str, bytes: &[u8]) -> Result<()> {
    match out {
        Some(dir) => write_file(dir, name, bytes).map_err(|e| Failure::Io(format!("{}: {e}", dir.join(name).display()))),
        None => {
            print!("{}", String::from_utf8_lossy(bytes));
            Ok(())
        }
    }
}

fn compile(cfg: &RunConfig, out: Option<&Path>, dump: bool) -> Result<()> {
    let header: Vec<String> = ["paradigm", "qubits", "events", "analog_blocks", "total_time_us"].map(String::from).to_vec();
    let mut rows = Vec::new();
    let mut dumps = String::new();
    for p in paradigms(cfg) {
        let s: CircuitSchedule = build_qft(p, cfg.qubits, &cfg.circuit_params())?;
        let blocks = s.events.iter().filter(|e| matches!(e.kind, EventKind::Analog { .. } | EventKind::ZzPhase { .. })).count();
        rows.push(vec![p.to_string(), cfg.qubits.to_string(), s.events.len().to_string(), blocks.to_string(), num(s.total_time() * 1e6)]);
        if dump {
            dumps.push_str(&s.dump());
        }
    }
    emit(out, &format!("compile_n{}.csv", cfg.qubits), &csv_bytes(&header, &rows)?)?;
    if dump {
        emit(out, &format!("schedule_n{}.txt", cfg.qubits), dumps.as_bytes())?;
    }
    Ok(())
}

fn simulate(cfg: &RunConfig, out: Option<&Path>, fom: FigureOfMerit) -> Result<()> {
    let betas = beta_grid(cfg.beta_points);
    let noise = cfg.noise(cfg.g_mhz);
    let mut curves: Vec<(Paradigm, Vec<SweepPoint>)> = Vec::new();
    for p in paradigms(cfg) {
        let s = build_qft(p, cfg.qubits, &cfg.circuit_params())?;
        curves.push((p, sweep_beta(&s, &betas, &noise, cfg.trajectories, cfg.seed)?));
    }
    let mut header = vec!["beta".to_string()];
    for (p, _) in &curves {
        header.push(p.to_string());
        if fom == FigureOfMerit::Fidelity {
            header.push(format!("{p}_stderr"));
        }
    }
    let rows: Vec<Vec<String>> = betas
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let mut r = vec![num(b)];
            for (_, c) in &curves {
                let res = &c[i].result;
                match fom {
                    FigureOfMerit::Fidelity => {
                        r.push(num(res.mean_fidelity));
                        r.push(num(res.std_error));
                    }
                    FigureOfMerit::Z0 => r.push(num(res.mean_z0)),
                }
            }
            r
        })
        .collect();
    let tag = match fom {
        FigureOfMerit::Fidelity => "fidelity",
        FigureOfMerit::Z0 => "z0",
    };
    emit(out, &format!("simulate_n{}_{tag}.csv", cfg.qubits), &csv_bytes(&header, &rows)?)?;
    if let Some(dir) = out {
        let averages: serde_json::Map<String, serde_json::Value> =
            curves.iter().map(|(p, c)| (p.to_string(), json!(sweep_average(c)))).collect();
        let record = json!({
            "command": "simulate",
            "seed": cfg.seed,
            "qubits": cfg.qubits,
            "trajectories": cfg.trajectories,
            "beta_averaged_fidelity": averages,
            "config": cfg.render(),
        });
        write_json(dir, &record)?;
        for (p, c) in &curves {
            println!("{p}: beta-averaged fidelity {}", num(sweep_average(c)));
        }
    }
    Ok(())
}

fn write_json(dir: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))? + "\n";
    write_file(dir, "results.json", text.as_bytes()).map_err(Failure::from)
}

fn step1_table(report: &MitigationReport, values: &[Vec<f64>], pipe: &Pipeline, ideal: &[f64]) -> Result<Vec<u8>> {
    let nb = report.grid.b_values.len();
    let mut header = vec!["row".to_string()];
    header.extend((0..nb).map(|i| format!("b{i}")));
    let mut rows: Vec<Vec<String>> = (0..report.grid.a_values.len())
        .map(|j| {
            let mut r = vec![format!("g{j}")];
            r.extend((0..nb).map(|i| num(values[i][j])));
            r
        })
        .collect();
    let mut zero = vec!["zero_decoherence_limit".to_string()];
    zero.extend(pipe.zero_decoherence.iter().map(|x| num(x.intercept)));
    rows.push(zero);
    let mut id = vec!["ideal".to_string()];
    id.extend(ideal.iter().map(|&x| num(x)));
    rows.push(id);
    Ok(csv_bytes(&header, &rows)?)
}

fn step2_table(pipe: &Pipeline, ideal: f64) -> Result<Vec<u8>> {
    let mut header = vec!["Ideal".to_string()];
    header.extend(pipe.stage2.iter().map(|(m, _)| m.name().to_string()));
    let mut row = vec![num(ideal)];
    row.extend(pipe.stage2.iter().map(|(_, r)| num(r.intercept)));
    Ok(csv_bytes(&header, &[row])?)
}

fn mitigate(cfg: &RunConfig, out: Option<&Path>, from_paper: bool) -> Result<()> {
    let report = if from_paper {
        published_report()?
    } else {
        if cfg.control_noise || cfg.bitflip || cfg.measurement_error {
            eprintln!("note: mitigation uses decoherence only; other noise sources are switched off");
        }
        let noise = daqc::engine::NoiseConfig {
            control_noise: false,
            bitflip: false,
            measurement: false,
            ..cfg.noise(cfg.mitigation_g_mhz)
        };
        run_mitigation_experiment(&cfg.mitigation_spec(), &noise)?
    };
    let n = if from_paper { 6 } else { cfg.mitigation_qubits };
    let beta = if from_paper { std::f64::consts::FRAC_PI_4 } else { cfg.mitigation_beta };
    let phi = make_initial(beta, n)?.evolve(&qft_reference(n)?)?;
    let exact_z0 = expect_z(&phi.to_density().into_matrix(), n, 0);

    let g = &report.grid;
    let tables = [
        ("table1_fidelity.csv", step1_table(&report, &g.fidelity, &report.fidelity, &g.ideal_fidelity)?),
        ("table2_z0.csv", step1_table(&report, &g.z0, &report.z0, &g.ideal_z0)?),
        ("table3_fidelity_stage2.csv", step2_table(&report.fidelity, 1.0)?),
        ("table4_z0_stage2.csv", step2_table(&report.z0, exact_z0)?),
    ];
    for (k, (name, bytes)) in tables.iter().enumerate() {
        if out.is_none() && k > 0 {
            println!();
        }
        emit(out, name, bytes)?;
    }
    if let Some(dir) = out {
        let stage2 = |p: &Pipeline| -> serde_json::Map<String, serde_json::Value> {
            p.stage2.iter().map(|(m, r)| (m.name().to_string(), json!(r.intercept))).collect()
        };
        let record = json!({
            "command": "mitigate",
            "source": if from_paper { "published" } else { "simulated" },
            "qubits": n,
            "b_values": g.b_values,
            "a_values": g.a_values,
            "total_time_us": g.times.iter().map(|r| r.iter().map(|t| t * 1e6).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "zero_decoherence_fidelity": report.fidelity.zero_decoherence.iter().map(|r| r.intercept).collect::<Vec<_>>(),
            "zero_decoherence_z0": report.z0.zero_decoherence.iter().map(|r| r.intercept).collect::<Vec<_>>(),
            "stage2_fidelity": stage2(&report.fidelity),
            "stage2_z0": stage2(&report.z0),
            "exact_z0": exact_z0,
            "stage1_refit_of_published_cells": if from_paper {
                let (f, z) = published_stage1()?;
                json!({
                    "fidelity": f.iter().map(|r| r.intercept).collect::<Vec<_>>(),
                    "z0": z.iter().map(|r| r.intercept).collect::<Vec<_>>(),
                })
            } else {
                serde_json::Value::Null
            },
            "config": cfg.render(),
        });
        write_json(dir, &record)?;
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<()> {
    let mut failed = Vec::new();
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(name.to_string());
        }
    };

    for n in [2usize, 3, 5, 6] {
        let spec = daqc::compiler::CouplingSpec {
            n_qubits: n,
            couplings: (0..n * (n - 1) / 2).map(|k| 1e6 * (0.3 + 0.1 * k as f64)).collect(),
            base_coupling: 1e6,
            total_time: 1e-6,
        };
        let sched = daqc::compiler::solve_block_times(&spec)?;
        let u = daqc::compiler::reconstruct_unitary(&sched, 1e6);
        let d: Vec<daqc::tensor::C64> = daqc::compiler::zz_diagonal(n, &spec.couplings)
            .iter()
            .map(|e| daqc::tensor::C64::new(0.0, e * 1e-6).exp())
            .collect();
        let dist = daqc::tensor::op_distance(&u, &daqc::tensor::Matrix::from_diag(&d));
        check(&format!("compiler N={n}"), dist < 1e-9, format!("operator distance {dist:.2e}"));
    }
    let four = daqc::compiler::solve_block_times(&daqc::compiler::CouplingSpec {
        n_qubits: 4,
        couplings: vec![1e6; 6],
        base_coupling: 1e6,
        total_time: 1e-6,
    });
    check("compiler N=4 rejected", four.is_err(), format!("{:?}", four.err()));

    let noiseless = daqc::engine::NoiseConfig::noiseless(cfg.coupling());
    for p in [Paradigm::Dqc, Paradigm::Sdaqc] {
        for n in [2usize, 3, 5] {
            let s = build_qft(p, n, &cfg.circuit_params())?;
            let r = sweep_beta(&s, &beta_grid(5), &noiseless, 1, 0)?;
            let worst = r.iter().map(|x| x.result.mean_fidelity).fold(1.0, f64::min);
            check(&format!("noiseless {p} n={n}"), worst >= 1.0 - 1e-8, format!("min fidelity {}", num(worst)));
        }
    }

    let r = published_report()?;
    let lin = r.fidelity.stage2[0].1.intercept;
    check("stage-2 linear on published row", (lin - 0.9929).abs() <= 0.001, num(lin));
    let z = r.z0.stage2[3].1.intercept;
    check("stage-2 Richardson on published <Z0> row", (z - 0.2883).abs() <= 0.001, num(z));
    let s1 = mitigate_grid(published_grid())?.fidelity.zero_decoherence[0].intercept;
    check("stage-1 on published b0 column", (s1 - 0.8651).abs() <= 0.001, num(s1));

    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        for j in 0..=20 {
            let ch = daqc::channels::gad(i as f64 / 20.0, j as f64 / 20.0)?;
            worst = worst.max(daqc::channels::validate_cptp(&ch).deviation);
        }
    }
    check("channel completeness", worst < daqc::channels::CPTP_TOL, format!("{worst:.2e}"));

    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
    }
}

fn run(cli: Cli) -> Result<()> {
    let for_mitigation = matches!(cli.command, Command::Mitigate { .. });
    let cfg = load_config(&cli.common, for_mitigation)?;
    if cli.common.show_config {
        print!("{}", cfg.render());
        return Ok(());
    }
    let out = cli.common.out.as_deref();
    match cli.command {
        Command::Compile { dump } => compile(&cfg, out, dump),
        Command::Simulate { figure_of_merit } => simulate(&cfg, out, figure_of_merit),
        Command::Mitigate { from_paper_values } => mitigate(&cfg, out, from_paper_values),
        Command::Validate => validate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
