//! State-vector engine against a dense-matrix oracle.
//!
//! Each pulse unitary is rebuilt as `exp(−i·θ/2·G)` from its Hermitian
//! generator `G` assembled with Kronecker products on the full
//! `3^N·(n_max+1)` space, then exponentiated by nalgebra. Nothing here shares
//! code with the engine's pairwise rotations.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use ionforge_core::chain::{lamb_dicke_cm, ChainConfig, LambDicke};
use ionforge_core::constants::angular;
use ionforge_core::dynamics::{
    cnot, cnot_area_error_sweep, cnot_sequence, controlled_z_sequence, fidelity, pulse_area_perturbation, Level,
    OpticalPhase, PulseKind, PulseSpec, RegisterState, Sideband, Transition, TRUNCATION_GUARD,
};
use ionforge_core::exec::Execution;
use ionforge_core::species::IonSpecies;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn eta(n_ions: usize) -> LambDicke {
    let cfg = ChainConfig::new(n_ions, angular(200e3), IonSpecies::calcium40()).unwrap();
    lamb_dicke_cm(&cfg, 732e-9, 0.0).unwrap()
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn ket_bra(dim: usize, row: usize, col: usize) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    m[(row, col)] = c(1.0, 0.0);
    m
}

/// Truncated annihilation operator on `n_max + 1` Fock states.
fn annihilation(n_max: usize) -> CMat {
    let d = n_max + 1;
    let mut a = CMat::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
    }
    a
}

fn level_index(l: Level) -> usize {
    match l {
        Level::Zero => 0,
        Level::One => 1,
        Level::Aux => 2,
    }
}

/// Dense unitary of one pulse on `n_ions` ions with phonon cutoff `n_max`.
fn pulse_unitary(p: &PulseSpec, n_ions: usize, n_max: usize) -> CMat {
    let (lo, up) = p.transition.levels();
    let (lo, up) = (level_index(lo), level_index(up));
    let raise = ket_bra(3, up, lo) * Complex64::from_polar(1.0, -p.phi());
    let phonon = match p.sideband {
        Sideband::Carrier => CMat::identity(n_max + 1, n_max + 1),
        Sideband::Red => annihilation(n_max),
        Sideband::Blue => annihilation(n_max).adjoint(),
    };
    let pre = CMat::identity(3usize.pow(p.ion as u32), 3usize.pow(p.ion as u32));
    let post_dim = 3usize.pow((n_ions - 1 - p.ion) as u32);
    let post = CMat::identity(post_dim, post_dim);
    let term = kron(&pre, &kron(&raise, &kron(&post, &phonon)));
    let generator = &term + term.adjoint();
    (generator * c(0.0, -0.5 * p.theta)).exp()
}

fn sequence_unitary(pulses: &[PulseSpec], n_ions: usize, n_max: usize) -> CMat {
    let dim = 3usize.pow(n_ions as u32) * (n_max + 1);
    pulses
        .iter()
        .fold(CMat::identity(dim, dim), |acc, p| pulse_unitary(p, n_ions, n_max) * acc)
}

/// Engine map as a matrix: column `j` is the engine applied to basis vector `j`,
/// `None` where the truncation guard refuses the input.
fn engine_columns(pulses: &[PulseSpec], n_ions: usize, n_max: usize) -> Vec<Option<Vec<Complex64>>> {
    let dim = 3usize.pow(n_ions as u32) * (n_max + 1);
    let e = eta(n_ions);
    (0..dim)
        .map(|j| {
            let mut amps = vec![c(0.0, 0.0); dim];
            amps[j] = c(1.0, 0.0);
            let mut s = RegisterState::from_amplitudes(n_ions, n_max, amps).unwrap();
            s.apply_sequence(pulses, &e).ok().map(|_| s.amplitudes().to_vec())
        })
        .collect()
}

/// Largest entry difference over the accepted columns; also returns which were accepted.
fn compare(oracle: &CMat, engine: &[Option<Vec<Complex64>>]) -> (f64, Vec<usize>) {
    let mut worst: f64 = 0.0;
    let mut accepted = Vec::new();
    for (j, col) in engine.iter().enumerate() {
        if let Some(col) = col {
            accepted.push(j);
            for (i, a) in col.iter().enumerate() {
                worst = worst.max((oracle[(i, j)] - a).norm());
            }
        }
    }
    (worst, accepted)
}

fn max_entry_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn state_vector(s: &RegisterState) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(s.amplitudes())
}

#[test]
fn single_pulses_match_matrix_exponential() {
    let (n_ions, n_max) = (2, 2);
    let dim = 9 * (n_max + 1);
    for ion in 0..2 {
        for transition in [Transition::ZeroOne, Transition::ZeroAux] {
            for (theta, phi) in [(0.3, 0.0), (PI, 1.1), (2.0 * PI, -0.4), (PI / 2.0, 1.5 * PI)] {
                for p in [
                    PulseSpec::v(ion, theta, phi, transition),
                    PulseSpec::u(ion, theta, phi, transition, Sideband::Red),
                    PulseSpec::u(ion, theta, phi, transition, Sideband::Blue),
                ] {
                    let (worst, accepted) = compare(&pulse_unitary(&p, n_ions, n_max), &engine_columns(&[p], n_ions, n_max));
                    assert!(worst < 1e-10, "{p:?}: {worst}");
                    // the guard only refuses inputs with the top phonon level occupied
                    let expected: Vec<usize> = match p.kind {
                        PulseKind::V => (0..dim).collect(),
                        PulseKind::U => (0..dim).filter(|j| j % (n_max + 1) != n_max).collect(),
                    };
                    assert_eq!(accepted, expected);
                }
            }
        }
    }
}

#[test]
fn composed_gates_match_oracle() {
    for seq in [controlled_z_sequence(0, 1), controlled_z_sequence(1, 0), cnot_sequence(0, 1), cnot_sequence(1, 0)] {
        let oracle = sequence_unitary(&seq, 2, 2);
        let unitarity = max_entry_diff(&(oracle.adjoint() * &oracle), &CMat::identity(27, 27));
        assert!(unitarity < 1e-10);
        let (worst, accepted) = compare(&oracle, &engine_columns(&seq, 2, 2));
        assert!(worst < 1e-10, "{worst}");
        // every computational-basis input in the motional ground state runs through;
        // auxiliary-level inputs may be carried to n_max by the 2π pulse
        let missing: Vec<usize> = [0, 1, 3, 4].iter().map(|l| l * 3).filter(|j| !accepted.contains(j)).collect();
        assert!(missing.is_empty(), "{missing:?}");
    }
}

/// Indices of the 12-dim subspace: qubit levels only, phonons 0..=2.
fn qubit_subspace() -> Vec<(usize, usize, usize)> {
    let mut v = Vec::new();
    for cb in 0..2 {
        for tb in 0..2 {
            for n in 0..3 {
                v.push((cb, tb, n));
            }
        }
    }
    v
}

#[test]
fn cnot_truth_table_on_twelve_dim_subspace() {
    let seq = cnot_sequence(0, 1);
    let oracle = sequence_unitary(&seq, 2, 2);
    let idx = |cb: usize, tb: usize, n: usize| (cb * 3 + tb) * 3 + n;
    let sub = qubit_subspace();
    assert_eq!(sub.len(), 12);
    // phonon-|0> inputs stay inside the qubit subspace and realise CNOT
    for &(cb, tb, n) in sub.iter().filter(|s| s.2 == 0) {
        let col = oracle.column(idx(cb, tb, n));
        let target = idx(cb, cb ^ tb, 0);
        assert!((col[target].norm() - 1.0).abs() < 1e-10);
        let leak: f64 = sub
            .iter()
            .map(|&(a, b, m)| idx(a, b, m))
            .filter(|&i| i != target)
            .map(|i| col[i].norm_sqr())
            .sum();
        assert!(leak < 1e-20);
    }
    // the relative phases agree, so the restriction equals CNOT up to one global phase
    let phase = oracle[(idx(0, 0, 0), idx(0, 0, 0))];
    for (cb, tb) in [(0, 1), (1, 0), (1, 1)] {
        let a = oracle[(idx(cb, cb ^ tb, 0), idx(cb, tb, 0))];
        assert!((a - phase).norm() < 1e-10);
    }

    let e = eta(2);
    for (cb, tb) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let lv = |b| if b == 1 { Level::One } else { Level::Zero };
        let input = RegisterState::basis(&[lv(cb), lv(tb)], 0, 2).unwrap();
        let out = cnot(&input, 0, 1, &e).unwrap();
        let expected = RegisterState::basis(&[lv(cb), lv(cb ^ tb)], 0, 2).unwrap();
        assert!(fidelity(&expected, &out).unwrap() >= 1.0 - 1e-9);
        assert!(out.phonon_excitation() < 1e-10);
        let oracle_out = &oracle * state_vector(&input);
        let diff = (oracle_out - state_vector(&out)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10);
    }
}

fn entropy_bits(eigs: &[f64]) -> f64 {
    eigs.iter().filter(|&&p| p > 1e-15).map(|&p| -p * p.log2()).sum()
}

#[test]
fn bell_state_has_one_bit_of_entanglement() {
    let e = eta(2);
    let mut s = RegisterState::ground(2, 3).unwrap();
    s.apply(&PulseSpec::v(0, PI / 2.0, 0.5 * PI, Transition::ZeroOne), &e).unwrap();
    let bell = cnot(&s, 0, 1, &e).unwrap();
    // reduced density matrix of ion 0 over its three levels
    let mut rho = DMatrix::<Complex64>::zeros(3, 3);
    let amps = bell.amplitudes();
    for i in 0..amps.len() {
        for j in 0..amps.len() {
            let (li, ri) = (i / 12, i % 12);
            let (lj, rj) = (j / 12, j % 12);
            if ri == rj {
                rho[(li, lj)] += amps[i] * amps[j].conj();
            }
        }
    }
    let eig = rho.symmetric_eigen();
    let s_bits = entropy_bits(eig.eigenvalues.as_slice());
    assert_relative_eq!(s_bits, 1.0, epsilon = 1e-10);
    assert!(bell.phonon_excitation() < 1e-10);
}

#[test]
fn pi_pulse_area_error_closed_form() {
    let eps = 1e-3;
    let ideal = PulseSpec::v(0, PI, 0.0, Transition::ZeroOne);
    let p = pulse_area_perturbation(&ideal, eps).unwrap();
    let e = eta(1);
    let mut s = RegisterState::ground(1, 2).unwrap();
    s.apply(&p, &e).unwrap();
    let mut target = RegisterState::ground(1, 2).unwrap();
    target.apply(&ideal, &e).unwrap();
    let infidelity = 1.0 - fidelity(&target, &s).unwrap();
    let closed = 1.0 - (PI * eps / 2.0).cos().powi(2);
    assert!((infidelity - closed).abs() < 1e-9);
    assert_relative_eq!(closed, 2.4674e-6, max_relative = 1e-4);
}

#[test]
fn area_error_sweep_matches_perturbed_oracle() {
    let e = eta(2);
    let errors = [0.0, 1e-3, -2e-3, 1e-2];
    let sweep = cnot_area_error_sweep(&errors, 2, &e, Execution::Sequential).unwrap();
    let idx = |cb: usize, tb: usize| (cb * 3 + tb) * 3;
    for (eps, mean) in sweep {
        let perturbed: Vec<PulseSpec> = cnot_sequence(0, 1)
            .iter()
            .map(|p| PulseSpec {
                theta: p.theta * (1.0 + eps),
                ..*p
            })
            .collect();
        let u = sequence_unitary(&perturbed, 2, 2);
        let mut total = 0.0;
        for (cb, tb) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            total += 1.0 - u[(idx(cb, cb ^ tb), idx(cb, tb))].norm_sqr();
        }
        assert!((mean - total / 4.0).abs() < 1e-12, "eps {eps}: {mean} vs {}", total / 4.0);
    }
}

#[test]
fn v_pulse_on_excited_motion_keeps_phonon_distribution() {
    let e = eta(2);
    let amps: Vec<Complex64> = (0..27).map(|i| c((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let s = RegisterState::from_amplitudes(2, 2, amps.iter().map(|a| a / norm).collect()).unwrap();
    let mut t = s.clone();
    t.apply(&PulseSpec::v(1, 1.3, 0.2, Transition::ZeroAux), &e).unwrap();
    for (a, b) in s.phonon_distribution().iter().zip(t.phonon_distribution()) {
        assert!((a - b).abs() < 1e-12);
    }
}

fn arb_pulse(n_ions: usize) -> impl Strategy<Value = PulseSpec> {
    (
        0..n_ions,
        0.0..4.0 * PI,
        -PI..PI,
        prop::bool::ANY,
        0..3u8,
    )
        .prop_map(|(ion, theta, phi, aux, kind)| {
            let t = if aux { Transition::ZeroAux } else { Transition::ZeroOne };
            match kind {
                0 => PulseSpec::v(ion, theta, phi, t),
                1 => PulseSpec::u(ion, theta, phi, t, Sideband::Red),
                _ => PulseSpec::u(ion, theta, phi, t, Sideband::Blue),
            }
        })
}

fn arb_state(n_ions: usize, n_max: usize) -> impl Strategy<Value = RegisterState> {
    let dim = 3usize.pow(n_ions as u32) * (n_max + 1);
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim).prop_filter_map("zero vector", move |v| {
        let mut amps: Vec<Complex64> = v
            .iter()
            .enumerate()
            .map(|(i, &(re, im))| if i % (n_max + 1) == n_max { c(0.0, 0.0) } else { c(re, im) })
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-3 {
            return None;
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        RegisterState::from_amplitudes(n_ions, n_max, amps).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pulses_preserve_norm_and_invert(s in arb_state(2, 3), p in arb_pulse(2)) {
        let e = eta(2);
        let mut t = s.clone();
        t.apply(&p, &e).unwrap();
        prop_assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
        if p.kind == PulseKind::V || t.top_phonon_amplitude() < TRUNCATION_GUARD {
            t.apply(&p.inverse(), &e).unwrap();
            prop_assert!(fidelity(&s, &t).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn v_pulses_commute_with_phonon_number(s in arb_state(2, 3), p in arb_pulse(2)) {
        let v = PulseSpec { kind: PulseKind::V, sideband: Sideband::Carrier, ..p };
        let mut t = s.clone();
        t.apply_v(&v).unwrap();
        for (a, b) in s.phonon_distribution().iter().zip(t.phonon_distribution()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn raman_outcomes_depend_on_phase_difference_only(
        s in arb_state(2, 3),
        pump in -PI..PI,
        stokes in -PI..PI,
        shift in -10.0..10.0f64,
    ) {
        let e = eta(2);
        let seq: Vec<PulseSpec> = cnot_sequence(0, 1)
            .into_iter()
            .map(|p| p.with_phase(OpticalPhase::Raman { pump: pump + p.phi(), stokes }))
            .collect();
        let shifted: Vec<PulseSpec> = seq
            .iter()
            .map(|p| match p.phase {
                OpticalPhase::Raman { pump, stokes } => {
                    p.with_phase(OpticalPhase::Raman { pump: pump + shift, stokes: stokes + shift })
                }
                _ => unreachable!(),
            })
            .collect();
        let (mut a, mut b) = (s.clone(), s.clone());
        // V-only prefix keeps this valid for any phonon content
        let prefix = [seq[0]];
        let prefix_shifted = [shifted[0]];
        a.apply_sequence(&prefix, &e).unwrap();
        b.apply_sequence(&prefix_shifted, &e).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
        let g = RegisterState::ground(2, 3).unwrap();
        let (mut a, mut b) = (g.clone(), g);
        a.apply_sequence(&seq, &e).unwrap();
        b.apply_sequence(&shifted, &e).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn gate_sequences_from_motional_ground_stay_truncation_safe(
        bits in prop::collection::vec(0..2usize, 3),
        n_max in 2..5usize,
        control in 0..3usize,
        offset in 1..3usize,
    ) {
        let e = eta(3);
        let levels: Vec<Level> = bits.iter().map(|&b| if b == 1 { Level::One } else { Level::Zero }).collect();
        let target = (control + offset) % 3;
        let mut s = RegisterState::basis(&levels, 0, n_max).unwrap();
        for p in cnot_sequence(control, target).iter().chain(&controlled_z_sequence(target, control)) {
            s.apply(p, &e).unwrap();
            prop_assert!(s.top_phonon_amplitude() < TRUNCATION_GUARD);
        }
    }
}
