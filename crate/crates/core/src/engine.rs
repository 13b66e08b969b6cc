//! Noisy execution of circuit schedules: sampled control errors per
//! trajectory, Kraus channels per timed event, readout error and ensemble
//! averaging.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::channels::{bit_flip, gad, gamma_from_time, measurement_error, DecoherenceConfig};
use crate::circuit::{qft_reference, CircuitSchedule, ControlNoise, EventKind, GateEvent, Paradigm};
use crate::error::{Error, Result};
use crate::state::{expect_z, fidelity_pure, make_ghz, make_w, outer, DensityMatrix, StateVector};
use crate::tensor::{superop_local, Matrix, Superop, C64};

/// Which qubits relax during a timed event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecoherenceScope {
    #[default]
    AllQubits,
    ActiveOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Half-width of the multiplicative SQG angle factor.
    pub sqgn: f64,
    /// Standard deviation of ε in the DQC π/4 phases.
    pub tqgn: f64,
    /// Standard deviation of the sDAQC block-time shift, seconds.
    pub s_abn: f64,
    /// Standard deviation of the bDAQC block-time shift, seconds.
    pub b_abn: f64,
    pub p_bitflip: f64,
    pub p_meas: f64,
    pub decoherence: DecoherenceConfig,
    pub scope: DecoherenceScope,
    pub control_noise: bool,
    pub bitflip: bool,
    pub decoherence_on: bool,
    pub measurement: bool,
}

impl NoiseConfig {
    /// The full noise model with the analog-time widths scaled by 1/g0 (g0 in rad/s).
    pub fn standard(g0: f64) -> Self {
        NoiseConfig {
            sqgn: 0.0005,
            tqgn: 0.2,
            s_abn: 0.02 / g0,
            b_abn: 0.01 / g0,
            p_bitflip: 0.005,
            p_meas: 0.01,
            decoherence: DecoherenceConfig::default(),
            scope: DecoherenceScope::AllQubits,
            control_noise: true,
            bitflip: true,
            decoherence_on: true,
            measurement: true,
        }
    }

    pub fn noiseless(g0: f64) -> Self {
        NoiseConfig { control_noise: false, bitflip: false, decoherence_on: false, measurement: false, ..Self::standard(g0) }
    }

    pub fn decoherence_only(g0: f64) -> Self {
        NoiseConfig { decoherence_on: true, ..Self::noiseless(g0) }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_bitflip", self.p_bitflip), ("p_meas", self.p_meas)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        for (name, s) in [("sqgn", self.sqgn), ("tqgn", self.tqgn), ("s_abn", self.s_abn), ("b_abn", self.b_abn)] {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {s}")));
            }
        }
        DecoherenceConfig::new(self.decoherence.t1, self.decoherence.p_ground)?;
        Ok(())
    }

    /// True when some control-noise width is active, so trajectories differ.
    pub fn is_stochastic(&self) -> bool {
        self.control_noise && (self.sqgn > 0.0 || self.tqgn > 0.0 || self.s_abn > 0.0 || self.b_abn > 0.0)
    }
}

/// The random draws of one trajectory, in event order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseRecord {
    pub draws: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyInstance {
    pub schedule: CircuitSchedule,
    pub record: NoiseRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub state: DensityMatrix,
    pub record: NoiseRecord,
    /// Wall-clock model time in seconds.
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub mean_fidelity: f64,
    pub mean_z0: f64,
    pub std_error: f64,
    pub trajectories: usize,
    pub seed: u64,
}

/// Substream of trajectory `index`: ChaCha8 keyed by the seed, stream = index.
/// Draws are consumed in event order, one per noisy parameter.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws fresh control errors for every event.
pub fn sample_controls<R: Rng>(schedule: &CircuitSchedule, cfg: &NoiseConfig, rng: &mut R) -> Result<NoisyInstance> {
    let mut out = schedule.clone();
    let mut record = NoiseRecord::default();
    if !cfg.control_noise {
        return Ok(NoisyInstance { schedule: out, record });
    }
    let normal = |sd: f64| Normal::new(0.0, sd).map_err(|e| Error::InvalidArgument(e.to_string()));
    let tqg = normal(cfg.tqgn)?;
    let analog = normal(if schedule.paradigm == Paradigm::Sdaqc { cfg.s_abn } else { cfg.b_abn })?;

    for (i, e) in out.events.iter_mut().enumerate() {
        match (&mut e.kind, e.noise) {
            (EventKind::Rotation { terms }, ControlNoise::SqgAngle)
            | (EventKind::Bang { terms, .. }, ControlNoise::SqgAngle) => {
                for t in terms.iter_mut() {
                    let u = if cfg.sqgn > 0.0 { rng.random_range(1.0 - cfg.sqgn..1.0 + cfg.sqgn) } else { 1.0 };
                    t.angle *= u;
                    record.draws.push((i, u));
                }
            }
            (EventKind::ZzPhase { angle, .. }, ControlNoise::TqgPhase) => {
                let eps = tqg.sample(rng);
                *angle *= 1.0 + eps;
                e.duration *= (1.0 + eps).abs();
                record.draws.push((i, eps));
            }
            (EventKind::Analog { time, .. }, ControlNoise::AnalogTime) => {
                let delta = analog.sample(rng);
                *time += delta;
                e.duration = time.abs();
                record.draws.push((i, delta));
            }
            _ => {}
        }
    }
    Ok(NoisyInstance { schedule: out, record })
}

struct Channels {
    bit_flip: Option<Superop>,
    readout: Option<Superop>,
}

impl Channels {
    fn new(cfg: &NoiseConfig) -> Result<Self> {
        Ok(Channels {
            bit_flip: if cfg.bitflip { Some(bit_flip(cfg.p_bitflip)?.superoperator()) } else { None },
            readout: if cfg.measurement { Some(measurement_error(cfg.p_meas)?.superoperator()) } else { None },
        })
    }
}

fn bit_flip_targets(schedule: &CircuitSchedule, e: &GateEvent) -> Vec<usize> {
    match &e.kind {
        EventKind::Rotation { .. } | EventKind::Bang { .. } if !e.virtual_gate => e.targets(),
        EventKind::ZzPhase { .. } => e.targets(),
        EventKind::Analog { .. } if schedule.paradigm == Paradigm::Sdaqc && e.duration > 0.0 => {
            (0..schedule.n_qubits).collect()
        }
        _ => Vec::new(),
    }
}

/// Runs a (noisy) schedule on an arbitrary operator. The map is linear, so
/// non-Hermitian inputs are allowed.
pub fn evolve_operator(schedule: &CircuitSchedule, m: &mut Matrix, cfg: &NoiseConfig) -> Result<f64> {
    let n = schedule.n_qubits;
    let h = schedule.interaction_diagonal();
    let ch = Channels::new(cfg)?;
    let mut elapsed = 0.0;
    for e in &schedule.events {
        for a in schedule.event_actions(e, &h)? {
            a.apply_operator(m);
        }
        if e.duration > 0.0 {
            elapsed += e.duration;
            if cfg.decoherence_on {
                let gamma = gamma_from_time(e.duration, &cfg.decoherence)?;
                let s = gad(cfg.decoherence.p_ground, gamma)?.superoperator();
                let qubits: Vec<usize> = match (cfg.scope, &e.kind) {
                    (DecoherenceScope::ActiveOnly, EventKind::Rotation { .. } | EventKind::ZzPhase { .. }) => e.targets(),
                    _ => (0..n).collect(),
                };
                for q in qubits {
                    superop_local(m, n, q, &s);
                }
            }
        }
        if let Some(s) = &ch.bit_flip {
            for q in bit_flip_targets(schedule, e) {
                superop_local(m, n, q, s);
            }
        }
    }
    if let Some(s) = &ch.readout {
        for q in 0..n {
            superop_local(m, n, q, s);
        }
    }
    Ok(elapsed)
}

pub fn run_trajectory(noisy: &NoisyInstance, rho0: &DensityMatrix, cfg: &NoiseConfig) -> Result<TrajectoryResult> {
    let s = &noisy.schedule;
    s.validate()?;
    if rho0.n_qubits() != s.n_qubits {
        return Err(Error::DimensionMismatch(format!("{}-qubit state for a {}-qubit schedule", rho0.n_qubits(), s.n_qubits)));
    }
    let mut m = rho0.matrix().clone();
    let elapsed = evolve_operator(s, &mut m, cfg)?;
    Ok(TrajectoryResult {
        state: DensityMatrix::from_matrix_unchecked(s.n_qubits, m),
        record: noisy.record.clone(),
        elapsed,
    })
}

/// Order-fixed pairwise summation.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    match x.len() {
        0 => 0.0,
        1 => x[0],
        2 => x[0] + x[1],
        n => pairwise_sum(&x[..n / 2]) + pairwise_sum(&x[n / 2..]),
    }
}

fn mean_and_error(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = pairwise_sum(x) / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = x.iter().map(|v| (v - mean).powi(2)).collect();
    (mean, (pairwise_sum(&dev) / (n - 1.0) / n).sqrt())
}

fn trajectory_count(n_traj: usize, cfg: &NoiseConfig) -> Result<usize> {
    if n_traj == 0 {
        return Err(Error::InvalidArgument("need at least one trajectory".into()));
    }
    // Without control noise every trajectory is identical.
    Ok(if cfg.is_stochastic() { n_traj } else { 1 })
}

/// Averages fidelity against `ideal` and ⟨Z0⟩ over independent trajectories.
pub fn run_ensemble(
    schedule: &CircuitSchedule,
    rho0: &DensityMatrix,
    ideal: &StateVector,
    cfg: &NoiseConfig,
    n_traj: usize,
    seed: u64,
) -> Result<EnsembleResult> {
    cfg.validate()?;
    let runs = trajectory_count(n_traj, cfg)?;
    let per: Vec<(f64, f64)> = (0..runs as u64)
        .into_par_iter()
        .map(|k| {
            let noisy = sample_controls(schedule, cfg, &mut trajectory_rng(seed, k))?;
            let r = run_trajectory(&noisy, rho0, cfg)?;
            Ok((fidelity_pure(ideal, r.state.matrix()), expect_z(r.state.matrix(), schedule.n_qubits, 0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let f: Vec<f64> = per.iter().map(|p| p.0).collect();
    let z: Vec<f64> = per.iter().map(|p| p.1).collect();
    let (mean_fidelity, std_error) = mean_and_error(&f);
    Ok(EnsembleResult { mean_fidelity, mean_z0: pairwise_sum(&z) / z.len() as f64, std_error, trajectories: n_traj, seed })
}

/// `count` evenly spaced values covering [0, π].
pub fn beta_grid(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        c => (0..c).map(|i| std::f64::consts::PI * i as f64 / (c - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub beta: f64,
    pub result: EnsembleResult,
}

/// Ensemble over the input family sin β|W⟩ + cos β|GHZ⟩ for every β, with the
/// same noise draws for every β. Each trajectory evolves |W⟩⟨W|, |GHZ⟩⟨GHZ|
/// and |W⟩⟨GHZ| once and recombines them, which equals running each β.
pub fn sweep_beta(schedule: &CircuitSchedule, betas: &[f64], cfg: &NoiseConfig, n_traj: usize, seed: u64) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    schedule.validate()?;
    let n = schedule.n_qubits;
    let runs = trajectory_count(n_traj, cfg)?;
    let w = make_w(n)?;
    let g = make_ghz(n)?;
    let reference = qft_reference(n)?;
    let ideals: Vec<StateVector> = betas
        .iter()
        .map(|&b| crate::state::make_initial(b, n).and_then(|s| s.evolve(&reference)))
        .collect::<Result<_>>()?;

    let per: Vec<Vec<(f64, f64)>> = (0..runs as u64)
        .into_par_iter()
        .map(|k| {
            let noisy = sample_controls(schedule, cfg, &mut trajectory_rng(seed, k))?;
            let mut parts = [outer(w.amplitudes(), w.amplitudes()), outer(g.amplitudes(), g.amplitudes()), outer(w.amplitudes(), g.amplitudes())];
            for p in parts.iter_mut() {
                evolve_operator(&noisy.schedule, p, cfg)?;
            }
            let [ww, gg, wg] = parts;
            Ok(betas
                .iter()
                .zip(&ideals)
                .map(|(&b, ideal)| {
                    let (s, c) = b.sin_cos();
                    let cross = fidelity_pure(ideal, &wg);
                    // ⟨φ|WG†|φ⟩ = conj⟨φ|WG|φ⟩ and only the real part survives
                    let f = s * s * fidelity_pure(ideal, &ww) + c * c * fidelity_pure(ideal, &gg) + 2.0 * s * c * cross;
                    let z = s * s * expect_z(&ww, n, 0) + c * c * expect_z(&gg, n, 0) + 2.0 * s * c * expect_z(&wg, n, 0);
                    (f, z)
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(betas
        .iter()
        .enumerate()
        .map(|(i, &beta)| {
            let f: Vec<f64> = per.iter().map(|r| r[i].0).collect();
            let z: Vec<f64> = per.iter().map(|r| r[i].1).collect();
            let (mean_fidelity, std_error) = mean_and_error(&f);
            SweepPoint {
                beta,
                result: EnsembleResult { mean_fidelity, mean_z0: pairwise_sum(&z) / z.len() as f64, std_error, trajectories: n_traj, seed },
            }
        })
        .collect())
}

/// Mean fidelity over a sweep.
pub fn sweep_average(points: &[SweepPoint]) -> f64 {
    let f: Vec<f64> = points.iter().map(|p| p.result.mean_fidelity).collect();
    pairwise_sum(&f) / f.len() as f64
}

/// Re(⟨ψ|A|ψ⟩) helper exposed for callers that combine operators themselves.
pub fn expectation(psi: &StateVector, a: &Matrix) -> C64 {
    let v = psi.amplitudes();
    let dim = v.len();
    (0..dim).map(|i| v[i].conj() * (0..dim).map(|j| a[(i, j)] * v[j]).sum::<C64>()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_qft, CircuitParams};
    use crate::state::{fidelity, make_initial};
    use std::f64::consts::PI;

    const G0: f64 = 1e7;

    fn params() -> CircuitParams {
        CircuitParams::new(G0, 0.01)
    }

    #[test]
    fn toggles_off_leave_schedule_unchanged() {
        let s = build_qft(Paradigm::Dqc, 3, &params()).unwrap();
        let cfg = NoiseConfig { control_noise: false, ..NoiseConfig::standard(G0) };
        let inst = sample_controls(&s, &cfg, &mut trajectory_rng(1, 0)).unwrap();
        assert_eq!(inst.schedule, s);
        assert!(inst.record.draws.is_empty());
    }

    #[test]
    fn replay_is_identical() {
        let s = build_qft(Paradigm::Sdaqc, 3, &params()).unwrap();
        let cfg = NoiseConfig::standard(G0);
        let a = sample_controls(&s, &cfg, &mut trajectory_rng(7, 3)).unwrap();
        let b = sample_controls(&s, &cfg, &mut trajectory_rng(7, 3)).unwrap();
        assert_eq!(a, b);
        let c = sample_controls(&s, &cfg, &mut trajectory_rng(7, 4)).unwrap();
        assert_ne!(a.record, c.record);
    }

    #[test]
    fn noiseless_dqc_is_exact() {
        let s = build_qft(Paradigm::Dqc, 3, &params()).unwrap();
        let cfg = NoiseConfig::noiseless(G0);
        let reference = qft_reference(3).unwrap();
        for beta in [0.0, 0.7, 2.0] {
            let psi = make_initial(beta, 3).unwrap();
            let ideal = psi.evolve(&reference).unwrap();
            let r = run_ensemble(&s, &psi.to_density(), &ideal, &cfg, 1, 0).unwrap();
            assert!((r.mean_fidelity - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn pure_fidelity_matches_uhlmann_on_noisy_output() {
        let s = build_qft(Paradigm::Bdaqc, 3, &params()).unwrap();
        let cfg = NoiseConfig::standard(G0);
        let psi = make_initial(0.3, 3).unwrap();
        let ideal = psi.evolve(&qft_reference(3).unwrap()).unwrap();
        let inst = sample_controls(&s, &cfg, &mut trajectory_rng(2, 0)).unwrap();
        let r = run_trajectory(&inst, &psi.to_density(), &cfg).unwrap();
        let a = fidelity_pure(&ideal, r.state.matrix());
        let b = fidelity(&ideal.to_density(), &r.state).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn one_trajectory_matches_direct_run() {
        let s = build_qft(Paradigm::Dqc, 3, &params()).unwrap();
        let cfg = NoiseConfig::standard(G0);
        let psi = make_initial(1.1, 3).unwrap();
        let ideal = psi.evolve(&qft_reference(3).unwrap()).unwrap();
        let e = run_ensemble(&s, &psi.to_density(), &ideal, &cfg, 1, 11).unwrap();
        let inst = sample_controls(&s, &cfg, &mut trajectory_rng(11, 0)).unwrap();
        let r = run_trajectory(&inst, &psi.to_density(), &cfg).unwrap();
        assert_eq!(e.mean_fidelity, fidelity_pure(&ideal, r.state.matrix()));
    }

    #[test]
    fn sweep_matches_per_beta_ensembles() {
        let s = build_qft(Paradigm::Sdaqc, 3, &params()).unwrap();
        let cfg = NoiseConfig::standard(G0);
        let betas = [0.0, 0.5, PI / 2.0, 2.9];
        let sweep = sweep_beta(&s, &betas, &cfg, 4, 5).unwrap();
        let reference = qft_reference(3).unwrap();
        for p in &sweep {
            let psi = make_initial(p.beta, 3).unwrap();
            let ideal = psi.evolve(&reference).unwrap();
            let e = run_ensemble(&s, &psi.to_density(), &ideal, &cfg, 4, 5).unwrap();
            assert!((e.mean_fidelity - p.result.mean_fidelity).abs() < 1e-10);
            assert!((e.mean_z0 - p.result.mean_z0).abs() < 1e-10);
        }
    }

    #[test]
    fn tqg_noise_statistics() {
        let s = build_qft(Paradigm::Dqc, 2, &params()).unwrap();
        let cfg = NoiseConfig::standard(G0);
        let mut rng = trajectory_rng(3, 0);
        let mut eps = Vec::new();
        while eps.len() < 100_000 {
            let inst = sample_controls(&s, &cfg, &mut rng).unwrap();
            for &(i, v) in &inst.record.draws {
                if matches!(s.events[i].kind, EventKind::ZzPhase { .. }) {
                    eps.push(v);
                }
            }
        }
        let m = eps.iter().sum::<f64>() / eps.len() as f64;
        let sd = (eps.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (eps.len() - 1) as f64).sqrt();
        assert!((sd - 0.2).abs() < 0.005, "{sd}");
    }

    #[test]
    fn beta_grid_endpoints() {
        let g = beta_grid(33);
        assert_eq!(g.len(), 33);
        assert_eq!(g[0], 0.0);
        assert!((g[32] - PI).abs() < 1e-15);
    }

    #[test]
    fn pairwise_sum_is_exact_on_small_input() {
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0, 4.0, 5.0]), 15.0);
    }
}
