//! Compilation of inhomogeneous all-to-all ZZ evolutions into homogeneous
//! analog blocks sandwiched by X⊗X flips.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tensor::{embed, pauli, qubit_mask, Matrix, C64};

/// Flat pair index α (1-based) of the pair 1 ≤ n < m ≤ N.
pub fn vec_index(n: usize, m: usize, big_n: usize) -> Result<usize> {
    if n < 1 || n >= m || m > big_n {
        return Err(Error::InvalidArgument(format!("pair ({n}, {m}) invalid for N = {big_n}")));
    }
    Ok(big_n * (n - 1) + m - n * (n + 1) / 2)
}

/// All 0-based pairs (j, k), j < k, in ascending flat-index order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect()
}

pub fn n_pairs(n: usize) -> usize {
    n * (n.saturating_sub(1)) / 2
}

/// Diagonal of Σ_pairs c_jk Z_j Z_k with couplings in [`pairs`] order.
pub fn zz_diagonal(n: usize, couplings: &[f64]) -> Vec<f64> {
    let ps = pairs(n);
    (0..1usize << n)
        .map(|i| {
            ps.iter()
                .zip(couplings)
                .map(|(&(j, k), &c)| {
                    let zj = i & qubit_mask(j, n) == 0;
                    let zk = i & qubit_mask(k, n) == 0;
                    if zj == zk { c } else { -c }
                })
                .sum()
        })
        .collect()
}

/// Diagonal of the homogeneous Σ_{j<k} Z_j Z_k (unit coupling).
pub fn ata_diagonal(n: usize) -> Vec<f64> {
    zz_diagonal(n, &vec![1.0; n_pairs(n)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignMatrix {
    pub n: usize,
    /// Row-major ±1 entries of dimension N(N−1)/2.
    pub entries: Vec<f64>,
}

impl SignMatrix {
    pub fn dim(&self) -> usize {
        n_pairs(self.n)
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.dim() + b]
    }

    pub fn is_symmetric(&self) -> bool {
        let d = self.dim();
        (0..d).all(|a| (0..d).all(|b| self.get(a, b) == self.get(b, a)))
    }
}

/// M_αβ = (−1)^{|{n,m} ∩ {j,k}|}.
pub fn build_sign_matrix(n: usize) -> Result<SignMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 qubits, got {n}")));
    }
    let ps = pairs(n);
    let mut entries = Vec::with_capacity(ps.len() * ps.len());
    for &(a, b) in &ps {
        for &(c, d) in &ps {
            let shared = [a == c, a == d, b == c, b == d].iter().filter(|&&x| x).count();
            entries.push(if shared % 2 == 0 { 1.0 } else { -1.0 });
        }
    }
    Ok(SignMatrix { n, entries })
}

/// LU factorization with partial pivoting of a dense real matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    dim: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &[f64], dim: usize) -> Result<Self> {
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..dim).collect();
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        for col in 0..dim {
            let piv = (col..dim)
                .max_by(|&i, &j| lu[i * dim + col].abs().total_cmp(&lu[j * dim + col].abs()))
                .unwrap();
            if lu[piv * dim + col].abs() <= 1e-12 * scale {
                return Err(Error::Numerical(format!("matrix is singular at column {col}")));
            }
            if piv != col {
                for k in 0..dim {
                    lu.swap(piv * dim + k, col * dim + k);
                }
                perm.swap(piv, col);
            }
            let p = lu[col * dim + col];
            for r in col + 1..dim {
                let f = lu[r * dim + col] / p;
                lu[r * dim + col] = f;
                for k in col + 1..dim {
                    lu[r * dim + k] -= f * lu[col * dim + k];
                }
            }
        }
        Ok(Lu { dim, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..d {
            for k in 0..r {
                x[r] -= self.lu[r * d + k] * x[k];
            }
        }
        for r in (0..d).rev() {
            for k in r + 1..d {
                x[r] -= self.lu[r * d + k] * x[k];
            }
            x[r] /= self.lu[r * d + r];
        }
        x
    }

    pub fn inverse(&self) -> Vec<f64> {
        let d = self.dim;
        let mut inv = vec![0.0; d * d];
        for c in 0..d {
            let mut e = vec![0.0; d];
            e[c] = 1.0;
            for (r, v) in self.solve(&e).into_iter().enumerate() {
                inv[r * d + c] = v;
            }
        }
        inv
    }
}

fn norm1(a: &[f64], dim: usize) -> f64 {
    (0..dim).map(|c| (0..dim).map(|r| a[r * dim + c].abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Determinant by LU; zero when the factorization breaks down.
pub fn determinant(m: &SignMatrix) -> f64 {
    let d = m.dim();
    match Lu::factor(&m.entries, d) {
        Err(_) => 0.0,
        Ok(lu) => {
            let mut det: f64 = (0..d).map(|i| lu.lu[i * d + i]).product();
            // parity of the permutation
            let mut seen = vec![false; d];
            for start in 0..d {
                if seen[start] {
                    continue;
                }
                let mut len = 0;
                let mut i = start;
                while !seen[i] {
                    seen[i] = true;
                    i = lu.perm[i];
                    len += 1;
                }
                if len % 2 == 0 {
                    det = -det;
                }
            }
            det
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    pub n_qubits: usize,
    /// g_β in rad/s, in flat-index order.
    pub couplings: Vec<f64>,
    /// Homogeneous coupling g in rad/s.
    pub base_coupling: f64,
    /// t_F in seconds.
    pub total_time: f64,
}

impl CouplingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.couplings.len() != n_pairs(self.n_qubits) {
            return Err(Error::DimensionMismatch(format!(
                "{} couplings for {} qubits",
                self.couplings.len(),
                self.n_qubits
            )));
        }
        if self.base_coupling == 0.0 || !self.base_coupling.is_finite() {
            return Err(Error::InvalidArgument("base coupling must be non-zero".into()));
        }
        if !(self.total_time > 0.0) {
            return Err(Error::InvalidArgument("total time must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogBlock {
    /// 0-based qubit pair flipped before and after the block.
    pub pair: (usize, usize),
    /// Block duration in seconds; may be negative.
    pub duration: f64,
    pub negative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogSchedule {
    pub n_qubits: usize,
    pub blocks: Vec<AnalogBlock>,
    /// 1-norm condition number of the sign matrix.
    pub condition_number: f64,
}

impl AnalogSchedule {
    pub fn has_negative_times(&self) -> bool {
        self.blocks.iter().any(|b| b.negative)
    }

    /// One line per block: n m t_α·g with 1-based qubit labels.
    pub fn to_text(&self, g: f64) -> String {
        let mut s = String::from("# n m t_alpha[1/g]\n");
        for b in &self.blocks {
            let _ = writeln!(s, "{} {} {:.12e}", b.pair.0 + 1, b.pair.1 + 1, b.duration * g);
        }
        s
    }
}

/// t_α = (M⁻¹)_αβ g_β t_F / g.
pub fn solve_block_times(spec: &CouplingSpec) -> Result<AnalogSchedule> {
    if spec.n_qubits == 4 {
        return Err(Error::SingularSignMatrix { n: 4 });
    }
    let m = build_sign_matrix(spec.n_qubits)?;
    solve_with_matrix(spec, &m)
}

/// Same as [`solve_block_times`] with a caller-supplied sign matrix.
pub fn solve_with_matrix(spec: &CouplingSpec, m: &SignMatrix) -> Result<AnalogSchedule> {
    spec.validate()?;
    let d = m.dim();
    if d != spec.couplings.len() {
        return Err(Error::DimensionMismatch("sign matrix does not match the coupling vector".into()));
    }
    let lu = Lu::factor(&m.entries, d).map_err(|_| {
        if spec.n_qubits == 4 {
            Error::SingularSignMatrix { n: 4 }
        } else {
            Error::Numerical(format!("sign matrix for N = {} is singular", spec.n_qubits))
        }
    })?;
    let rhs: Vec<f64> = spec.couplings.iter().map(|gb| gb * spec.total_time / spec.base_coupling).collect();
    let t = lu.solve(&rhs);

    let scale = rhs.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(spec.total_time);
    let residual = (0..d)
        .map(|a| ((0..d).map(|b| m.get(a, b) * t[b]).sum::<f64>() - rhs[a]).abs())
        .fold(0.0, f64::max)
        / scale;
    if residual > 1e-8 {
        return Err(Error::Numerical(format!("block-time residual {residual:.3e}")));
    }
    let condition_number = norm1(&m.entries, d) * norm1(&lu.inverse(), d);

    let blocks = pairs(spec.n_qubits)
        .into_iter()
        .zip(t)
        .map(|(pair, duration)| AnalogBlock { pair, duration, negative: duration < 0.0 })
        .collect();
    Ok(AnalogSchedule { n_qubits: spec.n_qubits, blocks, condition_number })
}

/// Π X_n X_m e^{i t_α H0} X_n X_m with H0 = g Σ_{j<k} Z_j Z_k, in schedule order.
pub fn reconstruct_unitary(sched: &AnalogSchedule, g: f64) -> Matrix {
    let n = sched.n_qubits;
    let h0 = ata_diagonal(n);
    let mut u = Matrix::identity(1 << n);
    for b in &sched.blocks {
        let xx = &embed(&pauli::x(), b.pair.0, n) * &embed(&pauli::x(), b.pair.1, n);
        let phases: Vec<C64> = h0.iter().map(|&e| C64::new(0.0, b.duration * g * e).exp()).collect();
        let block = &(&xx * &Matrix::from_diag(&phases)) * &xx;
        u = &block * &u;
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_index_examples() {
        assert_eq!(vec_index(1, 2, 3).unwrap(), 1);
        assert_eq!(vec_index(2, 3, 3).unwrap(), 3);
        assert!(vec_index(2, 2, 3).is_err());
        assert!(vec_index(1, 4, 3).is_err());
        for n in [2, 3, 5, 6] {
            let idx: Vec<usize> =
                pairs(n).iter().map(|&(j, k)| vec_index(j + 1, k + 1, n).unwrap()).collect();
            assert_eq!(idx, (1..=n_pairs(n)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn sign_matrix_examples() {
        assert_eq!(build_sign_matrix(2).unwrap().entries, vec![1.0]);
        let m3 = build_sign_matrix(3).unwrap();
        assert_eq!(m3.entries, vec![1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0, 1.0]);
        assert!(determinant(&build_sign_matrix(4).unwrap()).abs() < 1e-9);
        assert!((determinant(&m3) + 4.0).abs() < 1e-12);
        for n in [2, 3, 5, 6] {
            let m = build_sign_matrix(n).unwrap();
            assert!(m.is_symmetric());
            assert!((0..m.dim()).all(|a| m.get(a, a) == 1.0));
        }
    }

    #[test]
    fn n3_row_sums() {
        let m = build_sign_matrix(3).unwrap();
        for a in 0..3 {
            assert_eq!((0..3).map(|b| m.get(a, b)).sum::<f64>(), -1.0);
        }
    }

    #[test]
    fn block_times_examples() {
        let g = 2.0e6;
        let spec = CouplingSpec { n_qubits: 2, couplings: vec![g], base_coupling: g, total_time: 3e-6 };
        let s = solve_block_times(&spec).unwrap();
        assert_eq!(s.blocks.len(), 1);
        assert!((s.blocks[0].duration - 3e-6).abs() < 1e-18);

        let spec = CouplingSpec { n_qubits: 3, couplings: vec![g; 3], base_coupling: g, total_time: 1e-6 };
        let s = solve_block_times(&spec).unwrap();
        for b in &s.blocks {
            assert!((b.duration + 1e-6).abs() < 1e-18);
            assert!(b.negative);
        }
        assert!(s.condition_number >= 1.0);

        let spec = CouplingSpec { n_qubits: 4, couplings: vec![g; 6], base_coupling: g, total_time: 1e-6 };
        assert_eq!(solve_block_times(&spec), Err(Error::SingularSignMatrix { n: 4 }));
    }

    #[test]
    fn zero_couplings_give_identity() {
        let spec = CouplingSpec { n_qubits: 3, couplings: vec![0.0; 3], base_coupling: 1.0, total_time: 1.0 };
        let s = solve_block_times(&spec).unwrap();
        let u = reconstruct_unitary(&s, 1.0);
        assert!((&u - &Matrix::identity(8)).max_abs() < 1e-15);
    }

    #[test]
    fn corrupted_matrix_breaks_reconstruction() {
        let spec = CouplingSpec { n_qubits: 3, couplings: vec![0.3, -0.7, 0.2], base_coupling: 1.0, total_time: 1.0 };
        let mut m = build_sign_matrix(3).unwrap();
        m.entries[0] = -1.0;
        let s = solve_with_matrix(&spec, &m).unwrap();
        let target: Vec<C64> =
            zz_diagonal(3, &spec.couplings).iter().map(|&e| C64::new(0.0, e).exp()).collect();
        let d = crate::tensor::op_distance(&reconstruct_unitary(&s, 1.0), &Matrix::from_diag(&target));
        assert!(d > 1e-3);
    }

    #[test]
    fn export_uses_one_based_labels() {
        let spec = CouplingSpec { n_qubits: 3, couplings: vec![2.0; 3], base_coupling: 2.0, total_time: 0.5 };
        let txt = solve_block_times(&spec).unwrap().to_text(2.0);
        let lines: Vec<&str> = txt.lines().skip(1).collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("2 3 -1.0000"));
    }
}
