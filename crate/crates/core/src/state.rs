//! Pure and mixed states, the W/GHZ input family, fidelity and ⟨Z0⟩.

use crate::error::{Error, Result};
use crate::tensor::{mat_sqrt_psd, psd_eigenvalues, qubit_mask, Matrix, C64, ONE, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("state norm² is {norm}")));
        }
        Ok(StateVector { n_qubits, amps })
    }

    /// Computational basis state; bit q of `index` (from the left) is qubit q.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        StateVector { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// U|ψ⟩.
    pub fn evolve(&self, u: &Matrix) -> Result<StateVector> {
        let dim = self.amps.len();
        if u.rows() != dim || u.cols() != dim {
            return Err(Error::DimensionMismatch(format!("{}x{} operator on dimension {dim}", u.rows(), u.cols())));
        }
        let amps = (0..dim).map(|i| (0..dim).map(|j| u[(i, j)] * self.amps[j]).sum()).collect();
        Ok(StateVector { n_qubits: self.n_qubits, amps })
    }

    /// |ψ⟩⟨ψ|.
    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { n_qubits: self.n_qubits, matrix: outer(&self.amps, &self.amps) }
    }
}

/// |a⟩⟨b|.
pub fn outer(a: &[C64], b: &[C64]) -> Matrix {
    let mut m = Matrix::zeros(a.len(), b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            m[(i, j)] = x * y.conj();
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: Matrix,
}

impl DensityMatrix {
    /// Wraps a matrix after checking hermiticity, trace and positivity.
    pub fn new(n_qubits: usize, matrix: Matrix) -> Result<Self> {
        let rho = DensityMatrix { n_qubits, matrix };
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps without validation; for kernels that preserve validity.
    pub(crate) fn from_matrix_unchecked(n_qubits: usize, matrix: Matrix) -> Self {
        DensityMatrix { n_qubits, matrix }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        DensityMatrix { n_qubits, matrix: Matrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = crate::tensor::herm_eig(&self.matrix)?;
        Ok(vals[0])
    }

    pub fn validate(&self) -> Result<()> {
        let d = 1usize << self.n_qubits;
        if self.matrix.rows() != d || self.matrix.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for {} qubits",
                self.matrix.rows(),
                self.matrix.cols(),
                self.n_qubits
            )));
        }
        let dev = self.matrix.hermiticity_error();
        if dev > 1e-10 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::Numerical(format!("trace is {tr}")));
        }
        let lo = self.min_eigenvalue()?;
        if lo < -1e-8 {
            return Err(Error::NotPsd { eigenvalue: lo });
        }
        Ok(())
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 qubits, got {n}")));
    }
    if n > 8 {
        return Err(Error::InvalidArgument(format!("at most 8 qubits are supported, got {n}")));
    }
    Ok(())
}

/// (|0…0⟩ + |1…1⟩)/√2.
pub fn make_ghz(n: usize) -> Result<StateVector> {
    check_n(n)?;
    let mut amps = vec![ZERO; 1 << n];
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[0] = s;
    amps[(1 << n) - 1] = s;
    Ok(StateVector { n_qubits: n, amps })
}

/// Equal superposition of the single-excitation basis states.
pub fn make_w(n: usize) -> Result<StateVector> {
    check_n(n)?;
    let mut amps = vec![ZERO; 1 << n];
    let s = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    for q in 0..n {
        amps[qubit_mask(q, n)] = s;
    }
    Ok(StateVector { n_qubits: n, amps })
}

/// sin β |W⟩ + cos β |GHZ⟩.
pub fn make_initial(beta: f64, n: usize) -> Result<StateVector> {
    let w = make_w(n)?;
    let g = make_ghz(n)?;
    let (s, c) = beta.sin_cos();
    let amps = w.amps.iter().zip(&g.amps).map(|(a, b)| a * s + b * c).collect();
    Ok(StateVector { n_qubits: n, amps })
}

/// Uhlmann fidelity [tr √(√ρ σ √ρ)]².
pub fn fidelity(ideal: &DensityMatrix, noisy: &DensityMatrix) -> Result<f64> {
    if ideal.n_qubits != noisy.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} qubits",
            ideal.n_qubits, noisy.n_qubits
        )));
    }
    let s = mat_sqrt_psd(&ideal.matrix)?;
    let inner = &(&s * &noisy.matrix) * &s;
    let vals = psd_eigenvalues(&inner)?;
    // Round-off eigenvalues near 0 would contribute ~1e-8 each after the root.
    let cut = 1e-12 * vals.iter().cloned().fold(0.0, f64::max);
    let tr: f64 = vals.iter().filter(|&&x| x > cut).map(|x| x.sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// ⟨ψ|ρ|ψ⟩, which equals the Uhlmann fidelity when the ideal state is pure.
pub fn fidelity_pure(ideal: &StateVector, noisy: &Matrix) -> f64 {
    let a = &ideal.amps;
    let dim = a.len();
    let mut acc = ZERO;
    for i in 0..dim {
        if a[i] == ZERO {
            continue;
        }
        let row: C64 = (0..dim).map(|j| noisy[(i, j)] * a[j]).sum();
        acc += a[i].conj() * row;
    }
    acc.re
}

/// tr(Z ⊗ I ⊗ … ⊗ I · ρ).
pub fn expect_z0(rho: &DensityMatrix) -> f64 {
    expect_z(rho.matrix(), rho.n_qubits, 0)
}

/// tr(Z_q ρ) for any square operator on `n` qubits.
pub fn expect_z(m: &Matrix, n: usize, q: usize) -> f64 {
    let mask = qubit_mask(q, n);
    (0..m.rows())
        .map(|i| if i & mask == 0 { m[(i, i)].re } else { -m[(i, i)].re })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn ghz_and_w_examples() {
        let g = make_ghz(2).unwrap();
        assert!((g.amps[0].re - FRAC_1_SQRT_2).abs() < 1e-15 && (g.amps[3].re - FRAC_1_SQRT_2).abs() < 1e-15);
        let g = make_ghz(3).unwrap();
        assert!((g.amps[7].re - FRAC_1_SQRT_2).abs() < 1e-15);
        for n in 2..=6 {
            assert!((make_ghz(n).unwrap().norm() - 1.0).abs() < 1e-14);
            assert!((make_w(n).unwrap().norm() - 1.0).abs() < 1e-14);
            assert!(make_w(n).unwrap().inner(&make_ghz(n).unwrap()).norm() < 1e-15);
        }
        let w = make_w(3).unwrap();
        let s = 1.0 / 3f64.sqrt();
        for idx in [1, 2, 4] {
            assert!((w.amps[idx].re - s).abs() < 1e-15);
        }
        assert!(make_ghz(1).is_err());
        assert!(make_w(1).is_err());
    }

    #[test]
    fn initial_family() {
        assert_eq!(make_initial(0.0, 4).unwrap(), make_ghz(4).unwrap());
        let w = make_initial(PI / 2.0, 4).unwrap();
        let d = w.inner(&make_w(4).unwrap());
        assert!((d.re - 1.0).abs() < 1e-15);
        let m = make_initial(PI / 4.0, 6).unwrap();
        let g = make_ghz(6).unwrap();
        let w = make_w(6).unwrap();
        for i in 0..64 {
            let expect = (w.amps[i] + g.amps[i]) * FRAC_1_SQRT_2;
            assert!((m.amps[i] - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn fidelity_examples() {
        let z = StateVector::basis(1, 0).to_density();
        let o = StateVector::basis(1, 1).to_density();
        assert!((fidelity(&z, &z).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&z, &o).unwrap().abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(1);
        assert!((fidelity(&z, &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!(fidelity(&z, &DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn z0_examples() {
        assert!((expect_z0(&StateVector::basis(3, 0).to_density()) - 1.0).abs() < 1e-15);
        assert!((expect_z0(&StateVector::basis(3, 0b100).to_density()) + 1.0).abs() < 1e-15);
        assert!((expect_z0(&StateVector::basis(3, 0b001).to_density()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validate_rejects_bad_trace() {
        let m = Matrix::identity(2);
        assert!(DensityMatrix::new(1, m).is_err());
        assert!(DensityMatrix::new(1, Matrix::from_real_diag(&[0.5, 0.5])).is_ok());
    }
}
