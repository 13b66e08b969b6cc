use daqc::circuit::{build_qft, qft_reference, CircuitParams, Paradigm};
use daqc::engine::{beta_grid, run_ensemble, run_trajectory, sample_controls, sweep_beta, trajectory_rng, NoiseConfig};
use daqc::state::make_initial;

const G0: f64 = 1e7;

fn params() -> CircuitParams {
    CircuitParams::new(G0, 0.01)
}

#[test]
fn ensembles_are_seed_deterministic() {
    for p in Paradigm::ALL {
        let s = build_qft(p, 3, &params()).unwrap();
        let cfg = NoiseConfig::standard(G0);
        let psi = make_initial(0.9, 3).unwrap();
        let ideal = psi.evolve(&qft_reference(3).unwrap()).unwrap();
        let a = run_ensemble(&s, &psi.to_density(), &ideal, &cfg, 16, 99).unwrap();
        let b = run_ensemble(&s, &psi.to_density(), &ideal, &cfg, 16, 99).unwrap();
        assert_eq!(a, b);
        let c = run_ensemble(&s, &psi.to_density(), &ideal, &cfg, 16, 100).unwrap();
        assert_ne!(a.mean_fidelity, c.mean_fidelity);
    }
}

#[test]
fn noisy_outputs_are_valid_states() {
    for (p, n) in Paradigm::ALL.iter().flat_map(|&p| [(p, 3), (p, 5)]) {
        let s = build_qft(p, n, &params()).unwrap();
        let cfg = NoiseConfig::standard(G0);
        for k in 0..3 {
            let inst = sample_controls(&s, &cfg, &mut trajectory_rng(5, k)).unwrap();
            let r = run_trajectory(&inst, &make_initial(0.4, n).unwrap().to_density(), &cfg).unwrap();
            r.state.validate().unwrap();
            assert!(r.elapsed > 0.0);
        }
    }
}

#[test]
fn noiseless_qft_is_exact_for_larger_registers() {
    let cfg = NoiseConfig::noiseless(G0);
    for p in [Paradigm::Dqc, Paradigm::Sdaqc] {
        for n in [5, 6] {
            let s = build_qft(p, n, &params()).unwrap();
            let reference = qft_reference(n).unwrap();
            for beta in [0.0, std::f64::consts::FRAC_PI_4, 2.5] {
                let psi = make_initial(beta, n).unwrap();
                let ideal = psi.evolve(&reference).unwrap();
                let r = run_ensemble(&s, &psi.to_density(), &ideal, &cfg, 1, 0).unwrap();
                assert!(r.mean_fidelity >= 1.0 - 1e-8, "{p} n={n}: {}", r.mean_fidelity);
            }
        }
    }
}

/// Readout alone: F = Σ_S p^|S| (1−p)^(n−|S|) |⟨φ|X_S|φ⟩|².
fn readout_oracle(phi: &[num_complex::Complex64], n: usize, p: f64) -> f64 {
    (0..1usize << n)
        .map(|mask| {
            let k = mask.count_ones() as i32;
            let overlap: num_complex::Complex64 = (0..phi.len()).map(|i| phi[i].conj() * phi[i ^ mask]).sum();
            p.powi(k) * (1.0 - p).powi(n as i32 - k) * overlap.norm_sqr()
        })
        .sum()
}

#[test]
fn readout_error_matches_closed_form() {
    let n = 3;
    let s = build_qft(Paradigm::Dqc, n, &params()).unwrap();
    let cfg = NoiseConfig { measurement: true, ..NoiseConfig::noiseless(G0) };
    let reference = qft_reference(n).unwrap();
    let betas = beta_grid(9);
    for p in sweep_beta(&s, &betas, &cfg, 1, 0).unwrap() {
        let phi = make_initial(p.beta, n).unwrap().evolve(&reference).unwrap();
        let want = readout_oracle(phi.amplitudes(), n, cfg.p_meas);
        assert!((p.result.mean_fidelity - want).abs() < 1e-12);
    }
}

#[test]
#[ignore = "the readout shift depends on beta through |<phi|X_S|phi>|^2; spread is about 18%"]
fn readout_error_shifts_fidelity_uniformly_in_beta() {
    let s = build_qft(Paradigm::Dqc, 3, &params()).unwrap();
    let without = NoiseConfig::noiseless(G0);
    let with = NoiseConfig { measurement: true, ..without };
    let betas = beta_grid(9);
    let a = sweep_beta(&s, &betas, &with, 8, 3).unwrap();
    let b = sweep_beta(&s, &betas, &without, 8, 3).unwrap();
    let shifts: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y.result.mean_fidelity - x.result.mean_fidelity).collect();
    let mean = shifts.iter().sum::<f64>() / shifts.len() as f64;
    assert!(mean > 0.0);
    for s in &shifts {
        assert!((s - mean).abs() < 0.1 * mean, "{shifts:?}");
    }
}

#[test]
fn decoherence_only_runs_ignore_trajectory_count() {
    let s = build_qft(Paradigm::Sdaqc, 3, &params()).unwrap();
    let cfg = NoiseConfig::decoherence_only(G0);
    let psi = make_initial(1.0, 3).unwrap();
    let ideal = psi.evolve(&qft_reference(3).unwrap()).unwrap();
    let one = run_ensemble(&s, &psi.to_density(), &ideal, &cfg, 1, 0).unwrap();
    let many = run_ensemble(&s, &psi.to_density(), &ideal, &cfg, 50, 7).unwrap();
    assert_eq!(one.mean_fidelity, many.mean_fidelity);
    assert_eq!(many.std_error, 0.0);
    assert!(one.mean_fidelity < 1.0);
}

#[test]
fn each_noise_source_lowers_fidelity() {
    let s = build_qft(Paradigm::Dqc, 3, &params()).unwrap();
    let betas = beta_grid(5);
    let base = NoiseConfig::noiseless(G0);
    let clean = sweep_beta(&s, &betas, &base, 1, 0).unwrap();
    let toggles = [
        NoiseConfig { control_noise: true, ..base },
        NoiseConfig { bitflip: true, ..base },
        NoiseConfig { decoherence_on: true, ..base },
        NoiseConfig { measurement: true, ..base },
    ];
    for cfg in toggles {
        let r = sweep_beta(&s, &betas, &cfg, 20, 1).unwrap();
        let avg = |v: &[daqc::engine::SweepPoint]| v.iter().map(|p| p.result.mean_fidelity).sum::<f64>() / v.len() as f64;
        assert!(avg(&r) < avg(&clean) - 1e-6, "{cfg:?}");
    }
}
