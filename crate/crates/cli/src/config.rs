//! Flat `key = value` run configuration. Units at this boundary: couplings
//! in MHz, times in µs; `to_*` methods convert to SI.

use std::fmt::Write as _;
use std::str::FromStr;

use daqc::channels::DecoherenceConfig;
use daqc::circuit::{BangModel, CircuitParams, Paradigm};
use daqc::engine::{DecoherenceScope, NoiseConfig};
use daqc::mitigation::MitigationSpec;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub paradigm: Option<Paradigm>,
    pub qubits: usize,
    pub trajectories: usize,
    pub beta_points: usize,
    pub g_mhz: f64,
    pub sqg_factor: f64,
    pub bang_model: BangModel,
    pub t1_us: f64,
    pub p_ground: f64,
    pub sqgn: f64,
    pub tqgn: f64,
    /// Analog-time widths in units of 1/g.
    pub s_abn: f64,
    pub b_abn: f64,
    pub p_bitflip: f64,
    pub p_meas: f64,
    pub control_noise: bool,
    pub bitflip: bool,
    pub decoherence: bool,
    pub measurement_error: bool,
    pub decoherence_scope: DecoherenceScope,
    pub mitigation_qubits: usize,
    pub mitigation_g_mhz: f64,
    pub mitigation_beta: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            paradigm: None,
            qubits: 3,
            trajectories: 1000,
            beta_points: 33,
            g_mhz: 10.0,
            sqg_factor: 0.01,
            bang_model: BangModel::Simultaneous,
            t1_us: 50.0,
            p_ground: 0.35,
            sqgn: 0.0005,
            tqgn: 0.2,
            s_abn: 0.02,
            b_abn: 0.01,
            p_bitflip: 0.005,
            p_meas: 0.01,
            control_noise: true,
            bitflip: true,
            decoherence: true,
            measurement_error: true,
            decoherence_scope: DecoherenceScope::AllQubits,
            mitigation_qubits: 6,
            mitigation_g_mhz: 1.0,
            mitigation_beta: std::f64::consts::FRAC_PI_4,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError(format!("bad value for '{key}': '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError(format!("bad boolean for '{key}': '{value}'"))),
    }
}

fn scope_name(s: DecoherenceScope) -> &'static str {
    match s {
        DecoherenceScope::AllQubits => "all",
        DecoherenceScope::ActiveOnly => "active",
    }
}

fn bang_name(b: BangModel) -> &'static str {
    match b {
        BangModel::Simultaneous => "simultaneous",
        BangModel::Midpoint => "midpoint",
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.seed = parse(key, v)?,
            "paradigm" => {
                self.paradigm = match v {
                    "all" => None,
                    p => Some(Paradigm::from_str(p).map_err(|e| ConfigError(e.to_string()))?),
                }
            }
            "qubits" => self.qubits = parse(key, v)?,
            "trajectories" => self.trajectories = parse(key, v)?,
            "beta_points" => self.beta_points = parse(key, v)?,
            "g_mhz" => self.g_mhz = parse(key, v)?,
            "sqg_factor" => self.sqg_factor = parse(key, v)?,
            "bang_model" => self.bang_model = BangModel::from_str(v).map_err(|e| ConfigError(e.to_string()))?,
            "t1_us" => self.t1_us = parse(key, v)?,
            "p_ground" => self.p_ground = parse(key, v)?,
            "sqgn" => self.sqgn = parse(key, v)?,
            "tqgn" => self.tqgn = parse(key, v)?,
            "s_abn" => self.s_abn = parse(key, v)?,
            "b_abn" => self.b_abn = parse(key, v)?,
            "p_bitflip" => self.p_bitflip = parse(key, v)?,
            "p_meas" => self.p_meas = parse(key, v)?,
            "control_noise" => self.control_noise = parse_bool(key, v)?,
            "bitflip" => self.bitflip = parse_bool(key, v)?,
            "decoherence" => self.decoherence = parse_bool(key, v)?,
            "measurement_error" => self.measurement_error = parse_bool(key, v)?,
            "decoherence_scope" => {
                self.decoherence_scope = match v {
                    "all" => DecoherenceScope::AllQubits,
                    "active" => DecoherenceScope::ActiveOnly,
                    _ => return Err(ConfigError(format!("decoherence_scope must be 'all' or 'active', got '{v}'"))),
                }
            }
            "mitigation_qubits" => self.mitigation_qubits = parse(key, v)?,
            "mitigation_g_mhz" => self.mitigation_g_mhz = parse(key, v)?,
            "mitigation_beta" => self.mitigation_beta = parse(key, v)?,
            other => return Err(ConfigError(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected 'key = value'", no + 1)))?;
            self.set(k, v).map_err(|e| ConfigError(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.g_mhz > 0.0) || !(self.mitigation_g_mhz > 0.0) {
            return Err(ConfigError("couplings must be positive".into()));
        }
        if self.trajectories == 0 {
            return Err(ConfigError("trajectories must be at least 1".into()));
        }
        if self.beta_points == 0 {
            return Err(ConfigError("beta_points must be at least 1".into()));
        }
        self.noise(self.g_mhz).validate().map_err(|e| ConfigError(e.to_string()))?;
        DecoherenceConfig::new(self.t1_us * 1e-6, self.p_ground).map_err(|e| ConfigError(e.to_string()))?;
        Ok(())
    }

    /// Coupling in rad/s.
    pub fn coupling(&self) -> f64 {
        self.g_mhz * 1e6
    }

    pub fn circuit_params(&self) -> CircuitParams {
        CircuitParams { bang_model: self.bang_model, ..CircuitParams::new(self.coupling(), self.sqg_factor) }
    }

    /// Noise model with analog widths scaled by the coupling `g_mhz`.
    pub fn noise(&self, g_mhz: f64) -> NoiseConfig {
        let g = g_mhz * 1e6;
        NoiseConfig {
            sqgn: self.sqgn,
            tqgn: self.tqgn,
            s_abn: self.s_abn / g,
            b_abn: self.b_abn / g,
            p_bitflip: self.p_bitflip,
            p_meas: self.p_meas,
            decoherence: DecoherenceConfig { t1: self.t1_us * 1e-6, p_ground: self.p_ground },
            scope: self.decoherence_scope,
            control_noise: self.control_noise,
            bitflip: self.bitflip,
            decoherence_on: self.decoherence,
            measurement: self.measurement_error,
        }
    }

    pub fn mitigation_spec(&self) -> MitigationSpec {
        MitigationSpec {
            n_qubits: self.mitigation_qubits,
            beta: self.mitigation_beta,
            g0: self.mitigation_g_mhz * 1e6,
            bang_model: self.bang_model,
            ..MitigationSpec::standard()
        }
    }

    /// Every key with its effective value, in a form `apply_text` accepts.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String, note: &str| {
            let _ = if note.is_empty() { writeln!(s, "{k} = {v}") } else { writeln!(s, "{k} = {v}  # {note}") };
        };
        kv("seed", self.seed.to_string(), "");
        kv("paradigm", self.paradigm.map_or("all".into(), |p| p.to_string()), "dqc | sdaqc | bdaqc | all");
        kv("qubits", self.qubits.to_string(), "simulate and compile");
        kv("trajectories", self.trajectories.to_string(), "");
        kv("beta_points", self.beta_points.to_string(), "evenly spaced on [0, pi]");
        kv("g_mhz", self.g_mhz.to_string(), "interaction strength, MHz");
        kv("sqg_factor", self.sqg_factor.to_string(), "single-qubit gate time = sqg_factor / g");
        kv("bang_model", bang_name(self.bang_model).into(), "simultaneous | midpoint");
        kv("t1_us", self.t1_us.to_string(), "microseconds");
        kv("p_ground", self.p_ground.to_string(), "");
        kv("sqgn", self.sqgn.to_string(), "");
        kv("tqgn", self.tqgn.to_string(), "");
        kv("s_abn", self.s_abn.to_string(), "units of 1/g");
        kv("b_abn", self.b_abn.to_string(), "units of 1/g");
        kv("p_bitflip", self.p_bitflip.to_string(), "");
        kv("p_meas", self.p_meas.to_string(), "");
        kv("control_noise", self.control_noise.to_string(), "");
        kv("bitflip", self.bitflip.to_string(), "");
        kv("decoherence", self.decoherence.to_string(), "");
        kv("measurement_error", self.measurement_error.to_string(), "");
        kv("decoherence_scope", scope_name(self.decoherence_scope).into(), "all | active");
        kv("mitigation_qubits", self.mitigation_qubits.to_string(), "");
        kv("mitigation_g_mhz", self.mitigation_g_mhz.to_string(), "MHz");
        kv("mitigation_beta", self.mitigation_beta.to_string(), "");
        s
    }
}
