//! Dense complex matrices, Hermitian eigendecomposition and the in-place
//! kernels the simulator uses to act on density matrices.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub unitarity: f64,
    pub reconstruction: f64,
    /// Negative eigenvalues down to this magnitude are treated as roundoff.
    pub psd_clamp: f64,
    /// Eigenvalues below minus this value reject a PSD input.
    pub psd_reject: f64,
}

pub const TOL: Tolerances = Tolerances {
    hermiticity: 1e-10,
    unitarity: 1e-9,
    reconstruction: 1e-9,
    psd_clamp: 1e-10,
    psd_reject: 1e-6,
};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from real row slices.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| C64::new(x, 0.0))).collect();
        Matrix { rows: r, cols: c, data }
    }

    pub fn from_diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let c: Vec<C64> = d.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&c)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |m_ij - conj(m_ji)|.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn is_diagonal(&self) -> bool {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j && self[(i, j)] != ZERO {
                    return false;
                }
            }
        }
        true
    }

    /// Spectral norm, computed from the eigenvalues of A†A.
    pub fn op_norm(&self) -> f64 {
        let g = &self.dagger() * self;
        let (vals, _) = herm_eig_unchecked(&hermitize(&g));
        vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    /// Panics on shape mismatch; use [`Matrix::matmul`] for a checked product.
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs).expect("matrix shapes do not match")
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }
}

/// Single-qubit operators.
pub mod pauli {
    use super::*;

    pub fn id() -> Matrix {
        Matrix::identity(2)
    }
    pub fn x() -> Matrix {
        Matrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }
    pub fn y() -> Matrix {
        Matrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
    }
    pub fn z() -> Matrix {
        Matrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }
    /// (Z + X)/√2, the Hadamard generator.
    pub fn hadamard() -> Matrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Matrix::from_real(&[&[s, s], &[s, -s]])
    }
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = Matrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Lifts a single-qubit operator onto qubit `q` of an `n`-qubit register.
/// Qubit 0 is the leftmost tensor factor.
pub fn embed(op: &Matrix, q: usize, n: usize) -> Matrix {
    let mut out = Matrix::identity(1);
    for k in 0..n {
        out = if k == q { kron(&out, op) } else { kron(&out, &Matrix::identity(2)) };
    }
    out
}

fn hermitize(m: &Matrix) -> Matrix {
    let mut h = m.clone();
    for i in 0..m.rows {
        h[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in i + 1..m.cols {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    h
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
/// Eigenvalues are returned in ascending order; the eigenvectors are the columns of V.
pub fn herm_eig(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", m.rows, m.cols)));
    }
    let dev = m.hermiticity_error();
    if dev > TOL.hermiticity * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(herm_eig_unchecked(&hermitize(m)))
}

fn herm_eig_unchecked(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.rows;
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on columns p, q.
                let g00 = C64::new(c, 0.0);
                let g01 = C64::new(s, 0.0);
                let g10 = -phase.conj() * s;
                let g11 = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g00 + akq * g10;
                    a[(k, q)] = akp * g01 + akq * g11;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
                    a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g00 + vkq * g10;
                    v[(k, q)] = vkp * g01 + vkq * g11;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let vals = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vs = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vs[(k, new)] = v[(k, old)];
        }
    }
    (vals, vs)
}

/// V diag(f(λ)) V†.
fn spectral_apply(vals: &[f64], v: &Matrix, f: impl Fn(f64) -> C64) -> Matrix {
    let n = vals.len();
    let fv: Vec<C64> = vals.iter().map(|&x| f(x)).collect();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += v[(i, k)] * fv[k] * v[(j, k)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn mat_sqrt_psd(m: &Matrix) -> Result<Matrix> {
    let (vals, v) = herm_eig(m)?;
    if let Some(&lo) = vals.first() {
        if lo < -TOL.psd_reject {
            return Err(Error::NotPsd { eigenvalue: lo });
        }
    }
    Ok(spectral_apply(&vals, &v, |x| C64::new(x.max(0.0).sqrt(), 0.0)))
}

/// Eigenvalues of a PSD matrix with roundoff negatives clamped to zero.
pub fn psd_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let (vals, _) = herm_eig(m)?;
    if let Some(&lo) = vals.first() {
        if lo < -TOL.psd_reject {
            return Err(Error::NotPsd { eigenvalue: lo });
        }
    }
    Ok(vals.into_iter().map(|x| x.max(0.0)).collect())
}

/// exp(scale · h) for Hermitian h. Diagonal inputs skip the eigendecomposition.
pub fn expm_herm(h: &Matrix, scale: C64) -> Result<Matrix> {
    if h.is_square() && h.is_diagonal() {
        let d: Vec<C64> = h.diagonal().iter().map(|x| (scale * x.re).exp()).collect();
        return Ok(Matrix::from_diag(&d));
    }
    let (vals, v) = herm_eig(h)?;
    Ok(spectral_apply(&vals, &v, |x| (scale * x).exp()))
}

/// ‖a − b‖ in the spectral norm.
pub fn op_distance(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).op_norm()
}

/// Spectral distance after removing the best global phase between a and b.
pub fn op_distance_up_to_phase(a: &Matrix, b: &Matrix) -> f64 {
    let overlap = (&a.dagger() * b).trace();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
    op_distance(&a.scale(phase), b)
}

/// ‖U†U − I‖ in the spectral norm.
pub fn unitarity_error(u: &Matrix) -> f64 {
    op_distance(&(&u.dagger() * u), &Matrix::identity(u.rows))
}

/// Bit mask of qubit `q` inside an `n`-qubit basis index (qubit 0 is the MSB).
#[inline]
pub fn qubit_mask(q: usize, n: usize) -> usize {
    1 << (n - 1 - q)
}

/// m ← diag(d) · m · diag(d)†.
pub fn sandwich_diag(m: &mut Matrix, d: &[C64]) {
    let n = m.rows;
    let dc: Vec<C64> = d.iter().map(|x| x.conj()).collect();
    for (i, &di) in d.iter().enumerate().take(n) {
        let row = &mut m.data[i * n..(i + 1) * n];
        for (x, &c) in row.iter_mut().zip(&dc) {
            *x *= di * c;
        }
    }
}

/// Index layout of a set of target qubits inside an `n`-qubit register.
#[derive(Debug, Clone)]
pub struct LocalLayout {
    /// Offset of every local basis state; the first target is the local MSB.
    pub offsets: Vec<usize>,
    /// Base index of every spectator configuration, spectators in ascending order.
    pub bases: Vec<usize>,
}

impl LocalLayout {
    pub fn new(targets: &[usize], n: usize) -> Self {
        let k = targets.len();
        let offsets = (0..1usize << k)
            .map(|l| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| l & (1 << (k - 1 - bit)) != 0)
                    .map(|(_, &q)| qubit_mask(q, n))
                    .sum()
            })
            .collect();
        let spectators: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
        let s = spectators.len();
        let bases = (0..1usize << s)
            .map(|c| {
                spectators
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| c & (1 << (s - 1 - bit)) != 0)
                    .map(|(_, &q)| qubit_mask(q, n))
                    .sum()
            })
            .collect();
        LocalLayout { offsets, bases }
    }
}

/// m ← U m U† where U acts on `targets` with a block that may depend on the
/// spectator configuration. `blocks` holds either one shared block or one per
/// spectator configuration, indexed as in [`LocalLayout::bases`].
pub fn sandwich_local(m: &mut Matrix, layout: &LocalLayout, blocks: &[Matrix]) {
    let dim = m.rows;
    let k = layout.offsets.len();
    let shared = blocks.len() == 1;
    let mut buf = vec![ZERO; k];

    // Left multiplication, column by column.
    for (s, &base) in layout.bases.iter().enumerate() {
        let u = if shared { &blocks[0] } else { &blocks[s] };
        for col in 0..dim {
            for (l, slot) in buf.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (c, &off) in layout.offsets.iter().enumerate() {
                    acc += u.data[l * k + c] * m.data[(base + off) * dim + col];
                }
                *slot = acc;
            }
            for (l, &off) in layout.offsets.iter().enumerate() {
                m.data[(base + off) * dim + col] = buf[l];
            }
        }
    }
    // Right multiplication by U†, row by row.
    for row in 0..dim {
        let r = &mut m.data[row * dim..(row + 1) * dim];
        for (s, &base) in layout.bases.iter().enumerate() {
            let u = if shared { &blocks[0] } else { &blocks[s] };
            for (l, slot) in buf.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (c, &off) in layout.offsets.iter().enumerate() {
                    acc += r[base + off] * u.data[l * k + c].conj();
                }
                *slot = acc;
            }
            for (l, &off) in layout.offsets.iter().enumerate() {
                r[base + off] = buf[l];
            }
        }
    }
}

/// Superoperator of a single-qubit map acting on the row-major 2×2 block
/// (x00, x01, x10, x11).
pub type Superop = [[C64; 4]; 4];

/// Applies a single-qubit superoperator to qubit `q` of an `n`-qubit operator.
pub fn superop_local(m: &mut Matrix, n: usize, q: usize, s: &Superop) {
    let dim = m.rows;
    let mask = qubit_mask(q, n);
    for r in (0..dim).filter(|r| r & mask == 0) {
        for c in (0..dim).filter(|c| c & mask == 0) {
            let idx = [r * dim + c, r * dim + c + mask, (r + mask) * dim + c, (r + mask) * dim + c + mask];
            let x = idx.map(|i| m.data[i]);
            for (a, &i) in idx.iter().enumerate() {
                m.data[i] = s[a][0] * x[0] + s[a][1] * x[1] + s[a][2] * x[2] + s[a][3] * x[3];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).max_abs() < tol
    }

    fn random_hermitian(n: usize, seed: u64) -> Matrix {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(next(), 0.0);
            for j in i + 1..n {
                let v = C64::new(next(), next());
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        m
    }

    #[test]
    fn kron_identities_and_paulis() {
        assert_eq!(kron(&pauli::id(), &pauli::id()), Matrix::identity(4));
        assert_eq!(kron(&pauli::z(), &pauli::z()), Matrix::from_real_diag(&[1.0, -1.0, -1.0, 1.0]));
        let xi = kron(&pauli::x(), &pauli::id());
        // |00> -> |10>
        assert_eq!(xi[(2, 0)], ONE);
        assert_eq!(xi[(0, 0)], ZERO);
    }

    #[test]
    fn eig_of_paulis() {
        let (vals, _) = herm_eig(&pauli::z()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let (vals, v) = herm_eig(&pauli::x()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        // (|0> - |1>)/√2 up to phase
        assert!((v[(0, 0)].norm() - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((v[(0, 0)] + v[(1, 0)]).norm() < 1e-14);
        assert!((v[(0, 1)] - v[(1, 1)]).norm() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_64() {
        let m = random_hermitian(64, 7);
        let (vals, v) = herm_eig(&m).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let rec = spectral_apply(&vals, &v, |x| C64::new(x, 0.0));
        assert!(op_distance(&rec, &m) < TOL.reconstruction);
        assert!(unitarity_error(&v) < TOL.unitarity);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = Matrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_examples() {
        assert!(close(&mat_sqrt_psd(&Matrix::identity(3)).unwrap(), &Matrix::identity(3), 1e-14));
        let r = mat_sqrt_psd(&Matrix::from_real_diag(&[4.0, 9.0])).unwrap();
        assert!(close(&r, &Matrix::from_real_diag(&[2.0, 3.0]), 1e-14));
        assert!(matches!(
            mat_sqrt_psd(&Matrix::from_real_diag(&[1.0, -1e-3])),
            Err(Error::NotPsd { .. })
        ));
        // roundoff negatives are clamped
        let r = mat_sqrt_psd(&Matrix::from_real_diag(&[1.0, -1e-12])).unwrap();
        assert_eq!(r[(1, 1)], ZERO);
    }

    #[test]
    fn expm_examples() {
        let u = expm_herm(&pauli::z(), I * (PI / 2.0)).unwrap();
        assert!(close(&u, &Matrix::from_diag(&[I, -I]), 1e-15));

        let g = 1.7;
        let t = 0.3;
        let h0 = kron(&pauli::z(), &pauli::z()).scale(C64::new(g, 0.0));
        let u = expm_herm(&h0, I * t).unwrap();
        let p = (I * g * t).exp();
        let m = (-I * g * t).exp();
        assert!(close(&u, &Matrix::from_diag(&[p, m, m, p]), 1e-15));

        // e^{iπ/2 (I − (Z+X)/√2)} is the Hadamard
        let h = expm_herm(&pauli::hadamard(), -I * (PI / 2.0)).unwrap().scale(I);
        let s = FRAC_1_SQRT_2;
        assert!(close(&h, &Matrix::from_real(&[&[s, s], &[s, -s]]), 1e-12));
    }

    #[test]
    fn diag_fast_path_matches_dense_path() {
        let d = Matrix::from_real_diag(&[0.3, -1.2, 2.0, 0.0]);
        let fast = expm_herm(&d, I * 0.7).unwrap();
        let (vals, v) = herm_eig_unchecked(&d);
        let slow = spectral_apply(&vals, &v, |x| (I * 0.7 * x).exp());
        assert!(close(&fast, &slow, 1e-14));
    }

    #[test]
    fn local_kernels_match_dense_products() {
        let n = 3;
        let rho = random_hermitian(8, 3);
        let u = expm_herm(&random_hermitian(4, 9), I * 0.4).unwrap();
        // U on qubits (2, 0): first target is the local MSB
        let mut dense = Matrix::zeros(8, 8);
        let layout = LocalLayout::new(&[2, 0], n);
        for i in 0..8usize {
            for j in 0..8usize {
                // i = (q0 q1 q2); local index = (q2 q0), spectator q1 must match
                if (i >> 1) & 1 != (j >> 1) & 1 {
                    continue;
                }
                let li = ((i & 1) << 1) | (i >> 2);
                let lj = ((j & 1) << 1) | (j >> 2);
                dense[(i, j)] = u[(li, lj)];
            }
        }
        let expect = &(&dense * &rho) * &dense.dagger();
        let mut got = rho.clone();
        sandwich_local(&mut got, &layout, std::slice::from_ref(&u));
        assert!(close(&got, &expect, 1e-13));
    }

    #[test]
    fn superop_matches_kraus_sum() {
        let n = 2;
        let rho = random_hermitian(4, 5);
        let e0 = Matrix::from_real(&[&[1.0, 0.0], &[0.0, 0.8f64.sqrt()]]);
        let e1 = Matrix::from_real(&[&[0.0, 0.2f64.sqrt()], &[0.0, 0.0]]);
        let mut s: Superop = [[ZERO; 4]; 4];
        for e in [&e0, &e1] {
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
        let mut got = rho.clone();
        superop_local(&mut got, n, 1, &s);
        let mut expect = Matrix::zeros(4, 4);
        for e in [&e0, &e1] {
            let big = embed(e, 1, n);
            expect = &expect + &(&(&big * &rho) * &big.dagger());
        }
        assert!(close(&got, &expect, 1e-14));
    }
}
