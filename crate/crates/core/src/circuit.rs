//! QFT schedules for the digital (DQC), stepwise digital-analog (sDAQC) and
//! banged digital-analog (bDAQC) paradigms.
//!
//! Every rotation is e^{i·angle·G}. Global phases are dropped.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use crate::compiler::{ata_diagonal, build_sign_matrix, n_pairs, pairs, solve_block_times, CouplingSpec, Lu};
use crate::error::{Error, Result};
use crate::tensor::{
    embed, expm_herm, herm_eig, pauli, qubit_mask, sandwich_diag, sandwich_local, LocalLayout, Matrix, C64, I, ONE,
    ZERO,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Paradigm {
    Dqc,
    Sdaqc,
    Bdaqc,
}

impl Paradigm {
    pub const ALL: [Paradigm; 3] = [Paradigm::Dqc, Paradigm::Sdaqc, Paradigm::Bdaqc];

    pub fn name(self) -> &'static str {
        match self {
            Paradigm::Dqc => "dqc",
            Paradigm::Sdaqc => "sdaqc",
            Paradigm::Bdaqc => "bdaqc",
        }
    }
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Paradigm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dqc" => Ok(Paradigm::Dqc),
            "sdaqc" => Ok(Paradigm::Sdaqc),
            "bdaqc" => Ok(Paradigm::Bdaqc),
            other => Err(Error::InvalidArgument(format!("unknown paradigm '{other}'"))),
        }
    }
}

/// How a rotation combines with the always-on interaction in bDAQC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BangModel {
    /// e^{iΔt(H_int + H_rot)}
    #[default]
    Simultaneous,
    /// e^{iΔt H_int/2} e^{iΔt H_rot} e^{iΔt H_int/2}
    Midpoint,
}

impl std::str::FromStr for BangModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simultaneous" => Ok(BangModel::Simultaneous),
            "midpoint" => Ok(BangModel::Midpoint),
            other => Err(Error::InvalidArgument(format!("unknown bang model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    X,
    Y,
    Z,
    /// (Z + X)/√2
    Hadamard,
}

impl Generator {
    pub fn matrix(self) -> Matrix {
        match self {
            Generator::X => pauli::x(),
            Generator::Y => pauli::y(),
            Generator::Z => pauli::z(),
            Generator::Hadamard => pauli::hadamard(),
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Generator::X => "X",
            Generator::Y => "Y",
            Generator::Z => "Z",
            Generator::Hadamard => "H",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationTerm {
    pub qubit: usize,
    pub generator: Generator,
    pub angle: f64,
}

impl RotationTerm {
    pub fn new(qubit: usize, generator: Generator, angle: f64) -> Self {
        RotationTerm { qubit, generator, angle }
    }

    /// e^{i·angle·G}.
    pub fn unitary(&self) -> Matrix {
        // Every generator squares to the identity: e^{iθG} = cos θ I + i sin θ G.
        let (s, c) = self.angle.sin_cos();
        &Matrix::identity(2).scale(C64::new(c, 0.0)) + &self.generator.matrix().scale(I * s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    /// Simultaneous single-qubit rotations on distinct qubits.
    Rotation { terms: Vec<RotationTerm> },
    /// e^{i·angle·Z_a Z_b}
    ZzPhase { pair: (usize, usize), angle: f64 },
    /// Homogeneous interaction e^{i t g Σ Z_j Z_k} for a signed time t in seconds.
    Analog { time: f64, pair: Option<(usize, usize)> },
    /// Rotations applied on top of the interaction during Δt.
    Bang { terms: Vec<RotationTerm>, window: f64, compensate: bool },
}

/// Which control-noise model a sampler applies to an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlNoise {
    None,
    SqgAngle,
    TqgPhase,
    AnalogTime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateEvent {
    pub kind: EventKind,
    /// Wall-clock time the event occupies, in seconds.
    pub duration: f64,
    pub noise: ControlNoise,
    /// Frame change realised in software: no duration and no bit flip.
    pub virtual_gate: bool,
}

impl GateEvent {
    pub fn targets(&self) -> Vec<usize> {
        match &self.kind {
            EventKind::Rotation { terms } | EventKind::Bang { terms, .. } => terms.iter().map(|t| t.qubit).collect(),
            EventKind::ZzPhase { pair, .. } => vec![pair.0, pair.1],
            EventKind::Analog { pair, .. } => pair.map(|(a, b)| vec![a, b]).unwrap_or_default(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.duration >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative event duration {}", self.duration)));
        }
        let t = self.targets();
        for (i, &q) in t.iter().enumerate() {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits: n });
            }
            if t[..i].contains(&q) {
                return Err(Error::InvalidArgument(format!("qubit {q} targeted twice in one event")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSchedule {
    pub paradigm: Paradigm,
    pub n_qubits: usize,
    pub events: Vec<GateEvent>,
    /// Interaction strength g in rad/s.
    pub coupling: f64,
    /// Δt_SQG = b/g.
    pub sqg_factor: f64,
    pub bang_model: BangModel,
}

/// Builder parameters shared by the three paradigms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Interaction strength g in rad/s.
    pub coupling: f64,
    /// b in Δt_SQG = b/g.
    pub sqg_factor: f64,
    pub bang_model: BangModel,
}

impl CircuitParams {
    pub fn new(coupling: f64, sqg_factor: f64) -> Self {
        CircuitParams { coupling, sqg_factor, bang_model: BangModel::Simultaneous }
    }

    pub fn sqg_time(&self) -> f64 {
        self.sqg_factor / self.coupling
    }

    fn validate(&self) -> Result<()> {
        if !(self.coupling > 0.0) || !self.coupling.is_finite() {
            return Err(Error::InvalidArgument(format!("coupling must be positive, got {}", self.coupling)));
        }
        if !(self.sqg_factor > 0.0) || !self.sqg_factor.is_finite() {
            return Err(Error::InvalidArgument(format!("SQG time factor must be positive, got {}", self.sqg_factor)));
        }
        Ok(())
    }
}

/// θ_k = π/2^{k+1}.
pub fn theta(k: usize) -> f64 {
    PI / 2f64.powi(k as i32 + 1)
}

/// Controlled-phase angle between control m and target k (0-based, k > m): π/2^{k−m+2}.
pub fn alpha(m: usize, k: usize) -> f64 {
    PI / 2f64.powi((k - m + 2) as i32)
}

fn sqg_layer(n: usize, m: usize) -> (RotationTerm, Vec<RotationTerm>) {
    let h = RotationTerm::new(m, Generator::Hadamard, -PI / 2.0);
    let mut zs: Vec<RotationTerm> = Vec::new();
    let mut total = 0.0;
    for q in m + 1..n {
        let th = theta(q - m + 1);
        zs.push(RotationTerm::new(q, Generator::Z, -th));
        total += th;
    }
    if total > 0.0 {
        zs.insert(0, RotationTerm::new(m, Generator::Z, -total));
    }
    (h, zs)
}

fn dense_exp_diag(diag: &[f64]) -> Matrix {
    Matrix::from_diag(&diag.iter().map(|&x| C64::new(0.0, x).exp()).collect::<Vec<_>>())
}

/// The QFT unitary as the time-ordered product of its exponential factors:
/// for each control m the Hadamard, the Z phases and the controlled phases,
/// then a final Hadamard. Equals the textbook QFT without the final swaps.
pub fn qft_reference(n: usize) -> Result<Matrix> {
    if n == 0 || n > 8 {
        return Err(Error::InvalidArgument(format!("reference supports 1 to 8 qubits, got {n}")));
    }
    let dim = 1 << n;
    let hadamard = |q: usize| -> Result<Matrix> {
        let h = &Matrix::identity(dim) - &embed(&pauli::hadamard(), q, n);
        expm_herm(&h, I * (PI / 2.0))
    };
    let mut u = Matrix::identity(dim);
    for m in 0..n.saturating_sub(1) {
        u = &hadamard(m)? * &u;
        let mut phase = vec![0.0; dim];
        let mut zz = vec![0.0; dim];
        for q in m + 1..n {
            let th = theta(q - m + 1);
            let a = alpha(m, q);
            for (i, (p, z)) in phase.iter_mut().zip(zz.iter_mut()).enumerate() {
                let zm = if i & qubit_mask(m, n) == 0 { 1.0 } else { -1.0 };
                let zq = if i & qubit_mask(q, n) == 0 { 1.0 } else { -1.0 };
                *p += th * (1.0 - zq - zm);
                *z += a * zm * zq;
            }
        }
        u = &dense_exp_diag(&phase) * &u;
        u = &dense_exp_diag(&zz) * &u;
    }
    Ok(&hadamard(n - 1)? * &u)
}

fn check_size(n: usize, paradigm: Paradigm) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("QFT schedules need at least 2 qubits, got {n}")));
    }
    if n > 8 {
        return Err(Error::InvalidArgument(format!("at most 8 qubits are supported, got {n}")));
    }
    if n == 4 && paradigm != Paradigm::Dqc {
        return Err(Error::SingularSignMatrix { n: 4 });
    }
    Ok(())
}

fn rotation(terms: Vec<RotationTerm>, duration: f64) -> GateEvent {
    let virtual_gate = terms.iter().all(|t| t.generator == Generator::Z);
    GateEvent {
        kind: EventKind::Rotation { terms },
        duration: if virtual_gate { 0.0 } else { duration },
        noise: ControlNoise::SqgAngle,
        virtual_gate,
    }
}

/// Gate-based QFT: each controlled phase expands into two π/4 ZZ phases,
/// two X flips on the target and three Y rotations on the control.
pub fn build_qft_dqc(n: usize, params: &CircuitParams) -> Result<CircuitSchedule> {
    check_size(n, Paradigm::Dqc)?;
    params.validate()?;
    let dt = params.sqg_time();
    let dt_tqg = PI / 4.0 / params.coupling;
    let mut events = Vec::new();
    let single = |q: usize, g: Generator, a: f64| rotation(vec![RotationTerm::new(q, g, a)], dt);
    let zz = |c: usize, k: usize| GateEvent {
        kind: EventKind::ZzPhase { pair: (c, k), angle: PI / 4.0 },
        duration: dt_tqg,
        noise: ControlNoise::TqgPhase,
        virtual_gate: false,
    };
    for m in 0..n - 1 {
        let (h, zs) = sqg_layer(n, m);
        events.push(rotation(vec![h], dt));
        events.push(rotation(zs, dt));
        for k in m + 1..n {
            events.push(single(m, Generator::Y, -PI / 4.0));
            events.push(single(k, Generator::X, PI / 2.0));
            events.push(zz(m, k));
            events.push(single(k, Generator::X, PI / 2.0));
            events.push(single(m, Generator::Y, alpha(m, k)));
            events.push(zz(m, k));
            events.push(single(m, Generator::Y, PI / 4.0));
        }
    }
    events.push(rotation(vec![RotationTerm::new(n - 1, Generator::Hadamard, -PI / 2.0)], dt));
    Ok(CircuitSchedule {
        paradigm: Paradigm::Dqc,
        n_qubits: n,
        events,
        coupling: params.coupling,
        sqg_factor: params.sqg_factor,
        bang_model: params.bang_model,
    })
}

/// Block times (units of 1/g) realising the controlled phases of control m.
pub fn entangler_block_times(n: usize, m: usize) -> Result<Vec<f64>> {
    let couplings: Vec<f64> = pairs(n).iter().map(|&(a, k)| if a == m { alpha(m, k) } else { 0.0 }).collect();
    let spec = CouplingSpec { n_qubits: n, couplings, base_coupling: 1.0, total_time: 1.0 };
    Ok(solve_block_times(&spec)?.blocks.into_iter().map(|b| b.duration).collect())
}

/// Block-time shifts (units of 1/g) that cancel the first-order interaction
/// picked up during the X windows of one entangling group. Each window
/// contributes half its exposure in the frame before it and half in the
/// frame after it.
pub fn window_compensation(n: usize, window: f64) -> Result<Vec<f64>> {
    let m = build_sign_matrix(n)?;
    let d = n_pairs(n);
    let mut exposure = vec![0.0; d];
    for (beta, e) in exposure.iter_mut().enumerate() {
        // frames: identity, S_1, …, S_d, identity
        let sign = |frame: usize| if frame == 0 || frame == d + 1 { 1.0 } else { m.get(frame - 1, beta) };
        *e = (0..=d).map(|w| 0.5 * window * (sign(w) + sign(w + 1))).sum();
    }
    let lu = Lu::factor(&m.entries, d)?;
    Ok(lu.solve(&exposure).into_iter().map(|x| -x).collect())
}

fn xor_targets(a: &[RotationTerm], b: &[RotationTerm]) -> Vec<usize> {
    let mut q: Vec<usize> = a.iter().chain(b).map(|t| t.qubit).collect();
    q.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < q.len() {
        if i + 1 < q.len() && q[i] == q[i + 1] {
            i += 2;
        } else {
            out.push(q[i]);
            i += 1;
        }
    }
    out
}

fn x_terms(qs: &[usize]) -> Vec<RotationTerm> {
    qs.iter().map(|&q| RotationTerm::new(q, Generator::X, PI / 2.0)).collect()
}

/// Block times below this (in units of 1/g) count as zero.
pub const NULL_BLOCK: f64 = 1e-12;

fn build_daqc(n: usize, params: &CircuitParams, paradigm: Paradigm) -> Result<CircuitSchedule> {
    check_size(n, paradigm)?;
    params.validate()?;
    let g = params.coupling;
    let b = params.sqg_factor;
    let dt = params.sqg_time();
    let banged = paradigm == Paradigm::Bdaqc;
    let shift = if banged { window_compensation(n, b)? } else { vec![0.0; n_pairs(n)] };

    let sqr = |terms: Vec<RotationTerm>, compensate: bool| -> GateEvent {
        let virtual_gate = terms.iter().all(|t| t.generator == Generator::Z);
        if banged {
            GateEvent {
                kind: EventKind::Bang { terms, window: dt, compensate },
                duration: 0.0,
                noise: ControlNoise::SqgAngle,
                virtual_gate,
            }
        } else {
            rotation(terms, dt)
        }
    };

    let mut events = Vec::new();
    for m in 0..n - 1 {
        let (h, zs) = sqg_layer(n, m);
        events.push(sqr(vec![h], true));
        events.push(sqr(zs, true));

        let times = entangler_block_times(n, m)?;
        let mut group: Vec<GateEvent> = Vec::new();
        let mut pending: Vec<usize> = Vec::new();
        for (idx, (&(j, k), &t)) in pairs(n).iter().zip(&times).enumerate() {
            let flips = xor_targets(&x_terms(&pending), &x_terms(&[j, k]));
            if !flips.is_empty() {
                group.push(sqr(x_terms(&flips), false));
            }
            // Null blocks are skipped by the hardware: no timing error, no flips.
            let units = t + shift[idx];
            let null = units.abs() < NULL_BLOCK;
            let time = if null { 0.0 } else { units / g };
            group.push(GateEvent {
                kind: EventKind::Analog { time, pair: Some((j, k)) },
                duration: time.abs(),
                noise: if null { ControlNoise::None } else { ControlNoise::AnalogTime },
                virtual_gate: false,
            });
            pending = vec![j, k];
        }
        group.push(sqr(x_terms(&pending), false));
        events.extend(group);
    }
    events.push(sqr(vec![RotationTerm::new(n - 1, Generator::Hadamard, -PI / 2.0)], true));
    Ok(CircuitSchedule {
        paradigm,
        n_qubits: n,
        events,
        coupling: g,
        sqg_factor: b,
        bang_model: params.bang_model,
    })
}

/// Stepwise DAQC: every controlled-phase group becomes N(N−1)/2 analog
/// blocks with X sandwiches; the interaction is off during rotations.
pub fn build_qft_sdaqc(n: usize, params: &CircuitParams) -> Result<CircuitSchedule> {
    build_daqc(n, params, Paradigm::Sdaqc)
}

/// Banged DAQC: the interaction stays on and rotations act on top of it.
pub fn build_qft_bdaqc(n: usize, params: &CircuitParams) -> Result<CircuitSchedule> {
    build_daqc(n, params, Paradigm::Bdaqc)
}

pub fn build_qft(paradigm: Paradigm, n: usize, params: &CircuitParams) -> Result<CircuitSchedule> {
    match paradigm {
        Paradigm::Dqc => build_qft_dqc(n, params),
        Paradigm::Sdaqc => build_qft_sdaqc(n, params),
        Paradigm::Bdaqc => build_qft_bdaqc(n, params),
    }
}

/// A unitary ready to be applied to states or operators.
#[derive(Debug, Clone)]
pub enum Action {
    Diagonal(Vec<C64>),
    Local { layout: LocalLayout, blocks: Vec<Matrix> },
}

impl Action {
    pub fn apply_operator(&self, m: &mut Matrix) {
        match self {
            Action::Diagonal(d) => sandwich_diag(m, d),
            Action::Local { layout, blocks } => sandwich_local(m, layout, blocks),
        }
    }

    pub fn apply_state(&self, psi: &mut [C64]) {
        match self {
            Action::Diagonal(d) => psi.iter_mut().zip(d).for_each(|(a, p)| *a *= p),
            Action::Local { layout, blocks } => {
                let k = layout.offsets.len();
                let mut buf = vec![ZERO; k];
                for (s, &base) in layout.bases.iter().enumerate() {
                    let u = if blocks.len() == 1 { &blocks[0] } else { &blocks[s] };
                    for (l, slot) in buf.iter_mut().enumerate() {
                        *slot = (0..k).map(|c| u[(l, c)] * psi[base + layout.offsets[c]]).sum();
                    }
                    for (l, &off) in layout.offsets.iter().enumerate() {
                        psi[base + off] = buf[l];
                    }
                }
            }
        }
    }
}

fn local_hamiltonian(terms: &[RotationTerm]) -> Matrix {
    let k = terms.len();
    let mut h = Matrix::zeros(1 << k, 1 << k);
    for (pos, t) in terms.iter().enumerate() {
        h = &h + &embed(&t.generator.matrix(), pos, k).scale(C64::new(t.angle, 0.0));
    }
    h
}

fn z_phases(n: usize, terms: &[RotationTerm]) -> Vec<C64> {
    (0..1usize << n)
        .map(|i| {
            let ph: f64 = terms
                .iter()
                .map(|t| if i & qubit_mask(t.qubit, n) == 0 { t.angle } else { -t.angle })
                .sum();
            C64::new(0.0, ph).exp()
        })
        .collect()
}

impl CircuitSchedule {
    pub fn validate(&self) -> Result<()> {
        for e in &self.events {
            e.validate(self.n_qubits)?;
        }
        Ok(())
    }

    /// Wall-clock length of the schedule in seconds.
    pub fn total_time(&self) -> f64 {
        self.events.iter().map(|e| e.duration).sum()
    }

    /// Unit-coupling interaction diagonal Σ_{j<k} z_j z_k.
    pub fn interaction_diagonal(&self) -> Vec<f64> {
        ata_diagonal(self.n_qubits)
    }

    /// The unitaries of one event, in time order.
    pub fn event_actions(&self, e: &GateEvent, h: &[f64]) -> Result<Vec<Action>> {
        let n = self.n_qubits;
        Ok(match &e.kind {
            EventKind::Rotation { terms } => {
                if terms.iter().all(|t| t.generator == Generator::Z) {
                    vec![Action::Diagonal(z_phases(n, terms))]
                } else {
                    terms
                        .iter()
                        .map(|t| Action::Local { layout: LocalLayout::new(&[t.qubit], n), blocks: vec![t.unitary()] })
                        .collect()
                }
            }
            EventKind::ZzPhase { pair, angle } => {
                let d = (0..1usize << n)
                    .map(|i| {
                        let same = (i & qubit_mask(pair.0, n) == 0) == (i & qubit_mask(pair.1, n) == 0);
                        C64::new(0.0, if same { *angle } else { -angle }).exp()
                    })
                    .collect();
                vec![Action::Diagonal(d)]
            }
            EventKind::Analog { time, .. } => {
                let phase = time * self.coupling;
                vec![Action::Diagonal(h.iter().map(|&x| C64::new(0.0, phase * x).exp()).collect())]
            }
            EventKind::Bang { terms, window, compensate } => self.bang_actions(terms, *window, *compensate, h)?,
        })
    }

    fn bang_actions(&self, terms: &[RotationTerm], window: f64, compensate: bool, h: &[f64]) -> Result<Vec<Action>> {
        let n = self.n_qubits;
        let exposure = window * self.coupling;
        let diag = |scale: f64| Action::Diagonal(h.iter().map(|&x| C64::new(0.0, scale * x).exp()).collect());

        match self.bang_model {
            BangModel::Midpoint => {
                let mut out = Vec::new();
                let half = if compensate { 0.0 } else { exposure / 2.0 };
                if half != 0.0 {
                    out.push(diag(half));
                }
                out.extend(self.event_actions(
                    &GateEvent {
                        kind: EventKind::Rotation { terms: terms.to_vec() },
                        duration: 0.0,
                        noise: ControlNoise::None,
                        virtual_gate: false,
                    },
                    h,
                )?);
                if half != 0.0 {
                    out.push(diag(half));
                }
                Ok(out)
            }
            BangModel::Simultaneous => {
                if compensate && terms.iter().all(|t| t.generator == Generator::Z) {
                    // Z rotations commute with the interaction: the deduction is exact.
                    return Ok(vec![Action::Diagonal(z_phases(n, terms))]);
                }
                let qs: Vec<usize> = terms.iter().map(|t| t.qubit).collect();
                let layout = LocalLayout::new(&qs, n);
                let local = local_hamiltonian(terms);
                let mut blocks = Vec::with_capacity(layout.bases.len());
                for &base in &layout.bases {
                    let mut hs = local.clone();
                    for (l, &off) in layout.offsets.iter().enumerate() {
                        hs[(l, l)] += C64::new(exposure * h[base + off], 0.0);
                    }
                    let (vals, v) = herm_eig(&hs)?;
                    let k = vals.len();
                    let mut u = Matrix::zeros(k, k);
                    for r in 0..k {
                        for c in 0..k {
                            let mut acc = ZERO;
                            for (j, &lam) in vals.iter().enumerate() {
                                acc += v[(r, j)] * C64::new(0.0, lam).exp() * v[(c, j)].conj();
                            }
                            // compensation: e^{-iΔt H_int} just before the window
                            if compensate {
                                acc *= C64::new(0.0, -exposure * h[base + layout.offsets[c]]).exp();
                            }
                            u[(r, c)] = acc;
                        }
                    }
                    blocks.push(u);
                }
                Ok(vec![Action::Local { layout, blocks }])
            }
        }
    }

    /// Noiseless unitary of the whole schedule.
    pub fn unitary(&self) -> Result<Matrix> {
        let dim = 1usize << self.n_qubits;
        let h = self.interaction_diagonal();
        let actions: Vec<Action> = self
            .events
            .iter()
            .map(|e| self.event_actions(e, &h))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let mut u = Matrix::zeros(dim, dim);
        for col in 0..dim {
            let mut psi = vec![ZERO; dim];
            psi[col] = ONE;
            for a in &actions {
                a.apply_state(&mut psi);
            }
            for (row, v) in psi.into_iter().enumerate() {
                u[(row, col)] = v;
            }
        }
        Ok(u)
    }

    /// Human-readable event list.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# paradigm={} qubits={} g={:.6e} rad/s b={} bang_model={:?} events={} total_time={:.6e} s",
            self.paradigm,
            self.n_qubits,
            self.coupling,
            self.sqg_factor,
            self.bang_model,
            self.events.len(),
            self.total_time()
        );
        for (i, e) in self.events.iter().enumerate() {
            let body = match &e.kind {
                EventKind::Rotation { terms } => format!("rotation {}", fmt_terms(terms)),
                EventKind::ZzPhase { pair, angle } => format!("zz q{}q{} angle={:.9}", pair.0, pair.1, angle),
                EventKind::Analog { time, pair } => match pair {
                    Some((a, b)) => format!("analog sandwich=q{a}q{b} t={:.9e} s", time),
                    None => format!("analog t={:.9e} s", time),
                },
                EventKind::Bang { terms, window, compensate } => {
                    format!("bang {} window={:.6e} s compensate={}", fmt_terms(terms), window, compensate)
                }
            };
            let tag = if e.virtual_gate { " virtual" } else { "" };
            let _ = writeln!(s, "{i:4} {body} duration={:.6e} s noise={:?}{tag}", e.duration, e.noise);
        }
        s
    }
}

fn fmt_terms(terms: &[RotationTerm]) -> String {
    terms
        .iter()
        .map(|t| format!("{}(q{},{:.9})", t.generator.symbol(), t.qubit, t.angle))
        .collect::<Vec<_>>()
        .join(" ")
}
