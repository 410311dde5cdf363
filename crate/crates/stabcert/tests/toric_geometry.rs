//! Cross-module checks of the toric face: loop labels propagate to the
//! behaviours, every codeword behaviour shares the expression correlators,
//! and the matrix-free L=3 path reproduces the same structure.

use stabcert::bell::{self, SQRT2};
use stabcert::bounds::ObservableAssignment;
use stabcert::geometry::{self, LoopKind};
use stabcert::stabilizer::{code_basis, StabilizerGroup};
use stabcert::toric::ToricLattice;

#[test]
fn loop_expectations_read_off_the_labels() {
    let lat = ToricLattice::new(2).unwrap();
    let group = StabilizerGroup::from_generators(lat.generators()).unwrap();
    let basis = code_basis(&group, &[lat.z_hor_loop(0), lat.z_vert_loop(0)]).unwrap();
    let obs = ObservableAssignment::ideal(8, 0);

    for (state, label) in basis.states.iter().zip(&basis.labels) {
        let point = geometry::behaviour_of(state, &obs).unwrap();
        let loops = geometry::loop_expectations(&point, 2, 0).unwrap();
        // every row loop reads a, every column loop reads b
        for l in &loops {
            let want = match l.kind {
                LoopKind::Horizontal(_) => f64::from(label[0]),
                LoopKind::Vertical(_) => f64::from(label[1]),
            };
            assert!(
                (l.value - want).abs() < 1e-10,
                "label {label:?} loop {:?}: {} vs {want}",
                l.kind,
                l.value
            );
        }
    }
}

#[test]
fn all_four_behaviours_share_the_expression_correlators() {
    let lat = ToricLattice::new(2).unwrap();
    let group = StabilizerGroup::from_generators(lat.generators()).unwrap();
    let basis = code_basis(&group, &[lat.z_hor_loop(0), lat.z_vert_loop(0)]).unwrap();
    let obs = ObservableAssignment::ideal(8, 0);
    let expr = bell::i_tor_default(2).unwrap();

    let points: Vec<_> = basis
        .states
        .iter()
        .map(|s| geometry::behaviour_of(s, &obs).unwrap())
        .collect();
    for t in &expr.terms {
        let reference = points[0].correlator(t.key());
        for p in &points[1..] {
            assert!((p.correlator(t.key()) - reference).abs() < 1e-10);
        }
    }
    for p in &points {
        let v = expr.evaluate(&p.to_behaviour()).unwrap();
        assert!((v - 8.0).abs() < 1e-9, "value {v}");
    }
}

#[test]
fn l3_subfamily_face_dimension_via_matrix_free_states() {
    let lat = ToricLattice::new(3).unwrap();
    let obs = ObservableAssignment::ideal(18, 0);
    let expr = bell::i_tor_default(3).unwrap();

    let mut keys: Vec<bell::SupportKey> = expr.terms.iter().map(|t| t.key()).collect();
    for k in 0..3isize {
        for t in bell::substitute(&lat.z_hor_loop(k), 0, 1.0).unwrap() {
            keys.push(t.key());
        }
        for t in bell::substitute(&lat.z_vert_loop(k), 0, 1.0).unwrap() {
            keys.push(t.key());
        }
    }
    keys.sort_unstable();
    keys.dedup();

    let states = lat.code_states_matrix_free().unwrap();
    let behaviours: Vec<_> = states
        .iter()
        .map(|(_, s)| geometry::subfamily_correlators(s, &obs, &keys).unwrap())
        .collect();

    // expression value N on every codeword behaviour
    for b in &behaviours {
        let v = expr.evaluate(b).unwrap();
        assert!((v - 18.0).abs() < 1e-9, "value {v}");
    }

    // the loop correlators separate the four states: lower bound ≥ 2
    let report = geometry::face_dimension_on_family(&behaviours, &keys);
    assert!(report.dimension >= 2, "dimension {}", report.dimension);

    // the substituted Z̃_vert loop through the special qubit reads b
    for ((label, _), b) in states.iter().zip(&behaviours) {
        let terms = bell::substitute(&lat.z_vert_loop(0), 0, 1.0).unwrap();
        let v: f64 = terms
            .iter()
            .map(|t| t.coefficient * b.get(&t.key()).unwrap())
            .sum();
        assert!((v - f64::from(label[1])).abs() < 1e-10);
        // coefficient structure: the split loop carries ±1/√2
        assert!((terms[0].coefficient - 1.0 / SQRT2).abs() < 1e-12);
    }
}
