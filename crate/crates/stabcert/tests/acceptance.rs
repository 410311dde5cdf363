//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the quantity it pinned down. Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the lines).

mod common;

use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;

use stabcert::bell::{self, SQRT2};
use stabcert::bounds::{self, ObservableAssignment};
use stabcert::geometry;
use stabcert::linalg::{self, CVec, C};
use stabcert::pauli::QubitSubset;
use stabcert::robustness::{self, AngleConfig};
use stabcert::selftest::{self, JointState, TildeObservables};
use stabcert::stabilizer::{self, StabilizerGroup};
use stabcert::toric::ToricLattice;

fn beta_q5() -> f64 {
    4.0 * SQRT2 + 1.0
}

fn five_qubit_group() -> StabilizerGroup {
    StabilizerGroup::from_generators(stabilizer::five_qubit_generators()).unwrap()
}

fn c5_basis() -> stabilizer::CodeBasis {
    stabilizer::code_basis(&five_qubit_group(), &[stabilizer::five_qubit_labeler()]).unwrap()
}

#[test]
fn criterion_01_classical_bound_i5() {
    let started = Instant::now();
    let report = bounds::classical_bound(&bell::i5()).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(report.value, 5.0, "classical bound must be exactly 5");
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "1024-strategy enumeration took {elapsed:?}"
    );
    println!(
        "[PASS] criterion 1: classical bound of I5 = 5 by full enumeration ({} ms)",
        elapsed.as_millis()
    );
}

#[test]
fn criterion_02_quantum_value_i5_and_attainment() {
    let group = five_qubit_group();
    let expr = bell::i5();
    let report = bounds::quantum_value_ideal(&expr, &group, 0).unwrap();
    assert!(
        (report.value - beta_q5()).abs() < 1e-9,
        "quantum value {} vs 4√2+1",
        report.value
    );
    // every code-basis state attains it
    let basis = c5_basis();
    let obs = ObservableAssignment::ideal(5, 0);
    let b = bounds::bell_operator(&expr, &obs).unwrap();
    for (k, s) in basis.states.iter().enumerate() {
        let v = CVec::from_column_slice(s);
        let val = (v.adjoint() * &b * &v)[(0, 0)].re;
        assert!(
            (val - beta_q5()).abs() < 1e-10,
            "basis state {k} attains {val}"
        );
    }
    println!("[PASS] criterion 2: quantum value of I5 = 4√2+1, attained by both basis states");
}

#[test]
fn criterion_03_sos_certificate_i5() {
    let expr = bell::i5();
    let weights = bounds::i5_sos_weights();
    let ideal = ObservableAssignment::ideal(5, 0);
    let r = bounds::sos_residual(&expr, &ideal, &weights, beta_q5()).unwrap();
    assert!(r <= 1e-9, "ideal SOS residual {r}");

    let mut rng = linalg::seeded_rng(3);
    let mut worst_residual = 0.0f64;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..100 {
        let obs = ObservableAssignment::random_qubits(5, &mut rng);
        let r = bounds::sos_residual(&expr, &obs, &weights, beta_q5()).unwrap();
        worst_residual = worst_residual.max(r);
        let b = bounds::bell_operator(&expr, &obs).unwrap();
        worst_excess = worst_excess.max(linalg::max_eigenvalue(&b) - beta_q5());
    }
    assert!(worst_residual <= 1e-9, "worst SOS residual {worst_residual}");
    assert!(worst_excess <= 1e-8, "λ_max exceeds β_q by {worst_excess}");
    println!(
        "[PASS] criterion 3: SOS residual ≤ 1e-9 on ideal + 100 random assignments \
         (worst {worst_residual:.2e}), λ_max ≤ β_q + 1e-8"
    );
}

#[test]
fn criterion_04_toric_l2_bounds_and_sos() {
    let started = Instant::now();
    let expr = bell::i_tor_default(2).unwrap();
    let group = StabilizerGroup::from_generators(stabilizer::toric_generators(2).unwrap()).unwrap();

    let classical = bounds::classical_bound(&expr).unwrap();
    let formula = 8.0 - 2.0 * SQRT2 * (SQRT2 - 1.0);
    assert!((classical.value - (4.0 + 2.0 * SQRT2)).abs() < 1e-9);
    assert!((classical.value - formula).abs() < 1e-9);

    let quantum = bounds::quantum_value_ideal(&expr, &group, 0).unwrap();
    assert!((quantum.value - 8.0).abs() < 1e-9, "quantum {}", quantum.value);

    let ideal = ObservableAssignment::ideal(8, 0);
    let weights = bounds::toric_sos_weights(2).unwrap();
    let r = bounds::sos_residual(&expr, &ideal, &weights, 8.0).unwrap();
    assert!(r <= 1e-9, "toric SOS residual {r}");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 4: toric L=2 classical 4+2√2, quantum 8, SOS ≤ 1e-9 ({} ms)",
        elapsed.as_millis()
    );
}

#[test]
fn criterion_05_toric_l3_iterative_quantum_value() {
    let started = Instant::now();
    let expr = bell::i_tor_default(3).unwrap();
    let group = StabilizerGroup::from_generators(stabilizer::toric_generators(3).unwrap()).unwrap();
    match bounds::quantum_value_ideal(&expr, &group, 0) {
        Ok(report) => {
            let elapsed = started.elapsed();
            let ok = (report.value - 18.0).abs() < 1e-6 && elapsed.as_secs() <= 600;
            if ok {
                println!(
                    "[PASS] criterion 5: toric L=3 quantum value {} via matrix-free \
                     eigensolver ({} matvecs, {:.1} s)",
                    report.value,
                    report.matvecs,
                    elapsed.as_secs_f64()
                );
            } else {
                // stretch criterion: failure downgrades to a warning
                println!(
                    "[WARN] criterion 5 (stretch): value {} after {:.1} s — outside target",
                    report.value,
                    elapsed.as_secs_f64()
                );
            }
        }
        Err(e) => {
            println!("[WARN] criterion 5 (stretch): solver did not converge: {e}");
        }
    }
}

#[test]
fn criterion_06_gme_certificates() {
    // five-qubit: all 15 bipartitions
    let cert5 = stabilizer::gme_certificate_exhaustive(&five_qubit_group()).unwrap();
    assert_eq!((cert5.n_witnessed(), cert5.n_bipartitions()), (15, 15));

    // toric L=2: exhaustive and constructive agree bipartition by bipartition
    let group_l2 =
        StabilizerGroup::from_generators(stabilizer::toric_generators(2).unwrap()).unwrap();
    let exhaustive = stabilizer::gme_certificate_exhaustive(&group_l2).unwrap();
    assert_eq!(
        (exhaustive.n_witnessed(), exhaustive.n_bipartitions()),
        (127, 127)
    );
    let constructive = stabilizer::toric_gme_certificate(2).unwrap();
    assert!(constructive.all_witnessed());
    for (a, b) in exhaustive.witnesses.iter().zip(&constructive.witnesses) {
        assert_eq!(a.side_mask, b.side_mask);
        assert_eq!(a.pair.is_some(), b.pair.is_some());
    }

    // toric L=3: constructive witness for all 131071 bipartitions, each
    // re-verified through anticommute_on
    let lat = ToricLattice::new(3).unwrap();
    let gens = lat.generators();
    let cert3 = stabilizer::toric_gme_certificate(3).unwrap();
    assert_eq!(cert3.n_bipartitions(), 131_071);
    assert!(cert3.all_witnessed());
    for w in &cert3.witnesses {
        let (i, j) = w.pair.unwrap();
        let g = QubitSubset::from_mask(18, w.side_mask);
        assert!(gens[i].anticommute_on(&gens[j], &g).unwrap());
    }
    println!(
        "[PASS] criterion 6: GME certificates 15/15 (C5), 127/127 (toric L=2, \
         methods agree), 131071/131071 (toric L=3, re-verified)"
    );
}

/// Self-check of the criterion-7 oracle: the reduced k×k fidelity used in
/// the subspace maximization agrees with the full-space Uhlmann fidelity,
/// and the Uhlmann fidelity behaves on known cases.
#[test]
fn fidelity_oracle_self_checks() {
    let mut rng = linalg::seeded_rng(70);
    let rho = common::random_density(6, &mut rng);
    assert!((common::fidelity(&rho, &rho) - 1.0).abs() < 1e-10);

    // pure states: F = |⟨ψ|φ⟩|²
    let psi = linalg::random_state(6, &mut rng);
    let phi = linalg::random_state(6, &mut rng);
    let overlap = psi.dotc(&phi).norm_sqr();
    let rp = &psi * psi.adjoint();
    let rq = &phi * phi.adjoint();
    assert!((common::fidelity(&rp, &rq) - overlap).abs() < 1e-10);

    // reduced route versus the full-space route for subspace-supported σ
    let basis = common::random_subspace(6, 3, &mut rng);
    let m = common::random_density(3, &mut rng);
    let sigma = &basis * &m * basis.adjoint();
    let full = common::fidelity(&sigma, &rho);
    let rho_s = basis.adjoint() * &rho * &basis;
    let sm = common::psd_sqrt(&m);
    let inner = &sm * rho_s * &sm;
    let tr: f64 = ((&inner + inner.adjoint()) * C::new(0.5, 0.0))
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum();
    assert!((full - tr * tr).abs() < 1e-10, "{full} vs {}", tr * tr);
}

#[test]
fn criterion_07_fact4_fidelity_identity() {
    let mut rng = linalg::seeded_rng(7);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let dim = [4usize, 6, 8][trial % 3];
        let k = 1 + rng.gen::<usize>() % 4.min(dim - 1);
        let rho = common::random_density(dim, &mut rng);
        let basis = common::random_subspace(dim, k, &mut rng);
        let p = &basis * basis.adjoint();
        let target = (&p * &rho).diagonal().iter().map(|x| x.re).sum::<f64>();
        let got = common::max_fidelity_over_subspace(&rho, &basis);
        let diff = (got - target).abs();
        worst = worst.max(diff);
        assert!(
            diff <= 1e-3,
            "trial {trial}: dim {dim} k {k}: oracle {got} vs tr(Pρ) {target}"
        );
    }
    println!(
        "[PASS] criterion 7: direct fidelity maximization = tr(P_s ρ) on 200 \
         instances (worst gap {worst:.2e})"
    );
}

#[test]
fn criterion_08_qubit_frame_roundtrip() {
    let mut rng = linalg::seeded_rng(8);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let d = [1usize, 2, 4][trial % 3];
        let dim = 2 * d;
        let x0 = linalg::kron(&linalg::sx(), &linalg::id(d));
        let z0 = linalg::kron(&linalg::sz(), &linalg::id(d));
        let v = linalg::random_unitary(dim, &mut rng);
        let xt = &v * &x0 * v.adjoint();
        let zt = &v * &z0 * v.adjoint();
        let frame = selftest::extract_qubit_frame(&xt, &zt, 1e-8).unwrap();
        let u = &frame.unitary;
        let rx = (u * &xt * u.adjoint() - &x0).norm();
        let rz = (u * &zt * u.adjoint() - &z0).norm();
        worst = worst.max(rx).max(rz);
        assert!(rx <= 1e-10 && rz <= 1e-10, "trial {trial}: {rx} {rz}");
    }
    println!(
        "[PASS] criterion 8: 100 qubit-frame roundtrips at d ∈ {{1,2,4}} \
         (worst residual {worst:.2e})"
    );
}

#[test]
fn criterion_09_selftest_pipeline() {
    let basis = c5_basis();
    let group = five_qubit_group();
    let gens = stabilizer::five_qubit_generators();
    let tilde = TildeObservables::ideal(5);
    let mut rng = linalg::seeded_rng(9);

    // states of the exact self-tested form
    for trial in 0..50 {
        let raw: [f64; 2] = [rng.gen::<f64>(), rng.gen::<f64>()];
        let norm = (raw[0] * raw[0] + raw[1] * raw[1]).sqrt();
        let coeffs = [raw[0] / norm, raw[1] / norm];
        let junk: Vec<Vec<C>> = (0..2)
            .map(|_| linalg::random_state(2, &mut rng).iter().copied().collect())
            .collect();
        let mut amps = vec![C::new(0.0, 0.0); 64];
        for (k, psi) in basis.states.iter().enumerate() {
            for (i, a) in psi.iter().enumerate() {
                for (j, b) in junk[k].iter().enumerate() {
                    amps[j * 32 + i] += C::new(coeffs[k], 0.0) * a * b;
                }
            }
        }
        let state = JointState::new(amps.clone(), vec![2; 5], 2).unwrap();
        for r in selftest::stabilization_residual(&state, &tilde, &gens).unwrap() {
            assert!(r <= 1e-10, "trial {trial}: stabilization residual {r}");
        }
        let dec = selftest::decompose_onto_code(&amps, 2, &basis).unwrap();
        for (k, &want) in coeffs.iter().enumerate() {
            assert!(
                (dec.coefficients[k] - want).abs() <= 1e-8,
                "trial {trial}: c[{k}] {} vs {want}",
                dec.coefficients[k],
            );
        }
    }

    // arbitrary states: residual = 1 − tr((P ⊗ 1)ρ)
    let p = group.code_projector().unwrap();
    let lifted = linalg::kron(&linalg::id(2), &p);
    for trial in 0..50 {
        let v: DVector<C> = linalg::random_state(64, &mut rng);
        let amps: Vec<C> = v.iter().copied().collect();
        let dec = selftest::decompose_onto_code(&amps, 2, &basis).unwrap();
        let weight = (v.adjoint() * &lifted * &v)[(0, 0)].re;
        assert!(
            (dec.residual - (1.0 - weight)).abs() <= 1e-10,
            "trial {trial}: residual {} vs {}",
            dec.residual,
            1.0 - weight
        );
    }
    println!(
        "[PASS] criterion 9: 50 in-code states recover (c1, c2) to 1e-8 with \
         stabilization ≤ 1e-10; 50 generic states match 1 − tr(Pρ) to 1e-10"
    );
}

#[test]
fn criterion_10_robustness_certificate() {
    let group = five_qubit_group();
    let setup = robustness::RobustnessSetup::new(bell::i5(), &group).unwrap();

    // K at the all-π/4 grid point is exactly the code projector (g(π/4)=1)
    let ideal = AngleConfig::uniform(5, std::f64::consts::FRAC_PI_4);
    let k = setup.k_operator(&ideal).unwrap();
    let kp = (&k - &setup.projector).norm();
    assert!(kp <= 1e-12, "‖K(π/4) − P5‖ = {kp}");

    let scan = robustness::ScanSpec::default();
    let grid = robustness::GridSpec::default();
    let cert = robustness::certificate_search(&setup, &scan, &grid).unwrap();
    let tightness = (cert.a * setup.beta_q + cert.b - 1.0).abs();
    assert!(tightness <= 1e-6, "a·β_q + b − 1 = {tightness:e}");

    let rows = robustness::curve_rows(&setup, &cert, 41);
    assert!((rows[0].absolute_violation - setup.beta_c).abs() < 1e-12);
    assert!((rows.last().unwrap().absolute_violation - setup.beta_q).abs() < 1e-12);
    assert!((rows.last().unwrap().lower_bound - 1.0).abs() <= 1e-6);
    for pair in rows.windows(2) {
        assert!(pair[1].lower_bound >= pair[0].lower_bound - 1e-12);
    }
    println!(
        "[PASS] criterion 10: certificate a = {}, b = {} with a·β_q + b = 1 ± 1e-6; \
         curve non-decreasing; K(π/4) = P5 exactly",
        cert.a, cert.b
    );
}

#[test]
fn criterion_11_face_geometry() {
    // five-qubit: two behaviours spanning an affine line
    let basis = c5_basis();
    let obs = ObservableAssignment::ideal(5, 0);
    let points: Vec<geometry::CorrelationPoint> = basis
        .states
        .iter()
        .map(|s| geometry::behaviour_of(s, &obs).unwrap())
        .collect();
    let report = geometry::face_dimension(&points);
    assert_eq!(report.dimension, 1);

    // the substituted ⟨S̃5⟩ takes −1 and +1 on the two points
    let s5 = stabilizer::five_qubit_labeler();
    let terms = bell::substitute(&s5, 0, 1.0).unwrap();
    let values: Vec<f64> = points
        .iter()
        .map(|p| terms.iter().map(|t| t.coefficient * p.correlator(t.key())).sum())
        .collect();
    assert!((values[0] + 1.0).abs() < 1e-10, "⟨S̃5⟩ on ψ1 = {}", values[0]);
    assert!((values[1] - 1.0).abs() < 1e-10, "⟨S̃5⟩ on ψ2 = {}", values[1]);

    // toric L=2: four behaviours, affine dimension at least two (exact value
    // computed and reported)
    let lat = ToricLattice::new(2).unwrap();
    let group_l2 = StabilizerGroup::from_generators(lat.generators()).unwrap();
    let basis_l2 =
        stabilizer::code_basis(&group_l2, &[lat.z_hor_loop(0), lat.z_vert_loop(0)]).unwrap();
    let obs_l2 = ObservableAssignment::ideal(8, 0);
    let points_l2: Vec<geometry::CorrelationPoint> = basis_l2
        .states
        .iter()
        .map(|s| geometry::behaviour_of(s, &obs_l2).unwrap())
        .collect();
    let report_l2 = geometry::face_dimension(&points_l2);
    assert!(report_l2.dimension >= 2);
    println!(
        "[PASS] criterion 11: C5 face dimension 1 with ⟨S̃5⟩ = (-1, +1); \
         toric L=2 face dimension {} (≥ 2)",
        report_l2.dimension
    );
}

/// Shared check behind criteria 2 and 11: both code-basis behaviours give
/// identical values on every correlator of I5, as the face argument needs.
#[test]
fn basis_behaviours_agree_on_the_expression_support() {
    let basis = c5_basis();
    let obs = ObservableAssignment::ideal(5, 0);
    let expr = bell::i5();
    let points: Vec<geometry::CorrelationPoint> = basis
        .states
        .iter()
        .map(|s| geometry::behaviour_of(s, &obs).unwrap())
        .collect();
    for t in &expr.terms {
        let a = points[0].correlator(t.key());
        let b = points[1].correlator(t.key());
        assert!((a - b).abs() < 1e-10, "correlator differs: {a} vs {b}");
    }
    // and each evaluates the expression to β_q
    for p in &points {
        let v = expr.evaluate(&p.to_behaviour()).unwrap();
        assert!((v - beta_q5()).abs() < 1e-9);
    }
}
