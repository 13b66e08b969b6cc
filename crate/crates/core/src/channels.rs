//! Single-qubit Kraus channels: bit flip, generalized amplitude damping and
//! the readout bit flip.

use crate::error::{Error, Result};
use crate::state::DensityMatrix;
use crate::tensor::{pauli, superop_local, Matrix, Superop, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    BitFlip,
    AmplitudeDamping,
    MeasurementError,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    pub label: ChannelKind,
    pub operators: Vec<Matrix>,
}

impl KrausChannel {
    /// Builds a channel from arbitrary 2×2 operators without checking completeness.
    pub fn custom(operators: Vec<Matrix>) -> Result<Self> {
        if operators.is_empty() || operators.iter().any(|e| e.rows() != 2 || e.cols() != 2) {
            return Err(Error::InvalidArgument("Kraus operators must be 2x2".into()));
        }
        Ok(KrausChannel { label: ChannelKind::Custom, operators })
    }

    /// S = Σ_k E_k ⊗ conj(E_k) acting on a row-major 2×2 block.
    pub fn superoperator(&self) -> Superop {
        let mut s: Superop = [[ZERO; 4]; 4];
        for e in &self.operators {
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        for d in 0..2 {
                            s[2 * a + b][2 * c + d] += e[(a, c)] * e[(b, d)].conj();
                        }
                    }
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceConfig {
    /// Relaxation time in seconds.
    pub t1: f64,
    /// Ground-state population of the environment.
    pub p_ground: f64,
}

impl DecoherenceConfig {
    pub fn new(t1: f64, p_ground: f64) -> Result<Self> {
        if !(t1 > 0.0) || !t1.is_finite() {
            return Err(Error::InvalidArgument(format!("T1 must be positive, got {t1}")));
        }
        check_prob("p_ground", p_ground)?;
        Ok(DecoherenceConfig { t1, p_ground })
    }
}

impl Default for DecoherenceConfig {
    fn default() -> Self {
        DecoherenceConfig { t1: 50e-6, p_ground: 0.35 }
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// E0 = √(1−p) I, E1 = √p X.
pub fn bit_flip(p: f64) -> Result<KrausChannel> {
    check_prob("bit-flip probability", p)?;
    Ok(KrausChannel {
        label: ChannelKind::BitFlip,
        operators: vec![pauli::id().scale(real((1.0 - p).sqrt())), pauli::x().scale(real(p.sqrt()))],
    })
}

/// Readout error: a bit flip right before a perfect measurement.
pub fn measurement_error(p: f64) -> Result<KrausChannel> {
    let mut ch = bit_flip(p)?;
    ch.label = ChannelKind::MeasurementError;
    Ok(ch)
}

/// Generalized amplitude damping towards diag(p_ground, 1 − p_ground).
pub fn gad(p_ground: f64, gamma: f64) -> Result<KrausChannel> {
    check_prob("p_ground", p_ground)?;
    check_prob("gamma", gamma)?;
    let sp = p_ground.sqrt();
    let sq = (1.0 - p_ground).sqrt();
    let sg = gamma.sqrt();
    let s1g = (1.0 - gamma).sqrt();
    Ok(KrausChannel {
        label: ChannelKind::AmplitudeDamping,
        operators: vec![
            Matrix::from_real(&[&[sp, 0.0], &[0.0, sp * s1g]]),
            Matrix::from_real(&[&[0.0, sp * sg], &[0.0, 0.0]]),
            Matrix::from_real(&[&[sq * s1g, 0.0], &[0.0, sq]]),
            Matrix::from_real(&[&[0.0, 0.0], &[sq * sg, 0.0]]),
        ],
    })
}

/// γ = 1 − e^{−dt/T1}.
pub fn gamma_from_time(dt: f64, cfg: &DecoherenceConfig) -> Result<f64> {
    if dt < 0.0 || dt.is_nan() {
        return Err(Error::InvalidArgument(format!("negative duration {dt}")));
    }
    Ok(-(-dt / cfg.t1).exp_m1())
}

/// Applies the channel to one qubit of a density matrix.
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel, qubit: usize) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if qubit >= n {
        return Err(Error::QubitOutOfRange { qubit, n_qubits: n });
    }
    let mut m = rho.matrix().clone();
    superop_local(&mut m, n, qubit, &ch.superoperator());
    Ok(DensityMatrix::from_matrix_unchecked(n, m))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub passed: bool,
    /// max |Σ E†E − I|
    pub deviation: f64,
}

pub const CPTP_TOL: f64 = 1e-9;

/// Checks the completeness relation Σ E_k†E_k = I.
pub fn validate_cptp(ch: &KrausChannel) -> CptpReport {
    let mut sum = Matrix::zeros(2, 2);
    for e in &ch.operators {
        sum = &sum + &(&e.dagger() * e);
    }
    let deviation = (&sum - &Matrix::identity(2)).max_abs();
    CptpReport { passed: deviation < CPTP_TOL, deviation }
}
