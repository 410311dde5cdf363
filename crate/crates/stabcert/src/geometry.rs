//! Correlation vectors of maximally violating states and the affine
//! dimension of the face they span.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{self, Behaviour, SupportKey};
use crate::bounds::ObservableAssignment;
use crate::linalg::{apply_qubit_op, C};
use crate::pauli::PauliString;
use crate::toric::ToricLattice;
use crate::{Error, Result};

/// Full 3^N − 1 correlator vectors are materialized only up to this many
/// parties; beyond it, work with a declared correlator sub-family.
pub const FULL_CORRELATOR_PARTY_CAP: usize = 10;

/// The complete behaviour of one state under fixed observables: one entry
/// per nonempty party subset and input choice, indexed in base 3
/// (digit 0 = party absent, 1 = input 0, 2 = input 1).
#[derive(Clone, Debug)]
pub struct CorrelationPoint {
    n_parties: usize,
    /// Length 3^N; entry 0 is the empty correlator, fixed at 1.
    values: Vec<f64>,
}

impl CorrelationPoint {
    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn n_correlators(&self) -> usize {
        self.values.len() - 1
    }

    pub fn correlator(&self, key: SupportKey) -> f64 {
        let mut idx = 0usize;
        let mut pow = 1usize;
        for p in 0..self.n_parties {
            if key.parties >> p & 1 == 1 {
                let digit = 1 + (key.inputs >> p & 1) as usize;
                idx += digit * pow;
            }
            pow *= 3;
        }
        self.values[idx]
    }

    /// Materializes the point as a behaviour map.
    pub fn to_behaviour(&self) -> Behaviour {
        let mut b = Behaviour::new();
        for idx in 1..self.values.len() {
            let (parties, inputs) = decode_support(idx, self.n_parties);
            b.insert(SupportKey { parties, inputs }, self.values[idx]);
        }
        b
    }

    /// Pointwise convex mixture; evaluation of any expression is affine in
    /// the mixture weights.
    pub fn mix(points: &[&CorrelationPoint], weights: &[f64]) -> CorrelationPoint {
        let n = points[0].n_parties;
        let mut values = vec![0.0; points[0].values.len()];
        for (p, &w) in points.iter().zip(weights) {
            for (acc, v) in values.iter_mut().zip(&p.values) {
                *acc += w * v;
            }
        }
        CorrelationPoint {
            n_parties: n,
            values,
        }
    }
}

fn decode_support(mut idx: usize, n: usize) -> (u64, u64) {
    let mut parties = 0u64;
    let mut inputs = 0u64;
    for p in 0..n {
        match idx % 3 {
            0 => {}
            1 => parties |= 1 << p,
            _ => {
                parties |= 1 << p;
                inputs |= 1 << p;
            }
        }
        idx /= 3;
    }
    (parties, inputs)
}

/// All 3^N − 1 correlators of a pure qubit state under the given
/// observables, computed by matrix-free local-operator application.
pub fn behaviour_of(state: &[C], obs: &ObservableAssignment) -> Result<CorrelationPoint> {
    let n = obs.n_parties();
    if n > FULL_CORRELATOR_PARTY_CAP {
        return Err(Error::EnumerationCapExceeded {
            n,
            cap: FULL_CORRELATOR_PARTY_CAP,
        });
    }
    let dim = 1usize << n;
    if state.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: state.len(),
        });
    }
    for p in 0..n {
        if obs.dim(p) != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: obs.dim(p),
            });
        }
    }
    let total = 3usize.pow(n as u32);
    let mut values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            if idx == 0 {
                return 1.0;
            }
            let (parties, inputs) = decode_support(idx, n);
            let mut v: Vec<C> = state.to_vec();
            for p in 0..n {
                if parties >> p & 1 == 1 {
                    let x = (inputs >> p & 1) as u8;
                    apply_qubit_op(obs.observable(p, x), p, &mut v);
                }
            }
            state
                .iter()
                .zip(&v)
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
        })
        .collect();
    values[0] = 1.0;
    Ok(CorrelationPoint {
        n_parties: n,
        values,
    })
}

/// Correlators of a state over a declared support sub-family, for systems
/// too large for the full 3^N − 1 vector. Works on any qubit count the
/// statevector itself fits.
pub fn subfamily_correlators(
    state: &[C],
    obs: &ObservableAssignment,
    keys: &[SupportKey],
) -> Result<Behaviour> {
    let n = obs.n_parties();
    let dim = 1usize << n;
    if state.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: state.len(),
        });
    }
    let entries: Vec<(SupportKey, f64)> = keys
        .par_iter()
        .map(|&key| {
            let mut v: Vec<C> = state.to_vec();
            for p in 0..n {
                if key.parties >> p & 1 == 1 {
                    let x = (key.inputs >> p & 1) as u8;
                    apply_qubit_op(obs.observable(p, x), p, &mut v);
                }
            }
            let val = state
                .iter()
                .zip(&v)
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>();
            (key, val)
        })
        .collect();
    let mut b = Behaviour::new();
    for (k, v) in entries {
        b.insert(k, v);
    }
    Ok(b)
}

#[derive(Clone, Debug, Serialize)]
pub struct FaceReport {
    /// Affine dimension: rank of the difference matrix (p_k − p_1).
    pub dimension: usize,
    /// All singular values of the difference matrix, descending.
    pub singular_values: Vec<f64>,
    pub rank_threshold: f64,
}

/// Rank threshold on singular values for the affine dimension.
pub const FACE_RANK_THRESHOLD: f64 = 1e-8;

/// Affine dimension of the set of points: singular values of the matrix of
/// differences against the first point, thresholded at 1e−8 and reported
/// for auditability.
pub fn face_dimension(points: &[CorrelationPoint]) -> FaceReport {
    face_dimension_with_threshold(points, FACE_RANK_THRESHOLD)
}

/// [`face_dimension`] with an explicit singular-value threshold.
pub fn face_dimension_with_threshold(
    points: &[CorrelationPoint],
    threshold: f64,
) -> FaceReport {
    if points.len() <= 1 {
        return FaceReport {
            dimension: 0,
            singular_values: Vec::new(),
            rank_threshold: threshold,
        };
    }
    let cols = points[0].values.len() - 1;
    let rows = points.len() - 1;
    let d = DMatrix::<f64>::from_fn(rows, cols, |r, c| {
        points[r + 1].values[c + 1] - points[0].values[c + 1]
    });
    let mut sv: Vec<f64> = d.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    FaceReport {
        dimension: sv.iter().filter(|&&s| s > threshold).count(),
        singular_values: sv,
        rank_threshold: threshold,
    }
}

/// Same report computed from behaviours restricted to a fixed key family
/// (dimension is then a lower bound on the full affine dimension).
pub fn face_dimension_on_family(behaviours: &[Behaviour], keys: &[SupportKey]) -> FaceReport {
    if behaviours.len() <= 1 {
        return FaceReport {
            dimension: 0,
            singular_values: Vec::new(),
            rank_threshold: FACE_RANK_THRESHOLD,
        };
    }
    let rows = behaviours.len() - 1;
    let d = DMatrix::<f64>::from_fn(rows, keys.len(), |r, c| {
        behaviours[r + 1].get(&keys[c]).unwrap_or(0.0) - behaviours[0].get(&keys[c]).unwrap_or(0.0)
    });
    let mut sv: Vec<f64> = d.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    FaceReport {
        dimension: sv.iter().filter(|&&s| s > FACE_RANK_THRESHOLD).count(),
        singular_values: sv,
        rank_threshold: FACE_RANK_THRESHOLD,
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum LoopKind {
    Horizontal(usize),
    Vertical(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct LoopExpectation {
    pub kind: LoopKind,
    pub value: f64,
}

/// The substituted loop correlators ⟨Z̃_hor⟩, ⟨Z̃_vert⟩ for every loop row
/// and column of the torus; loops through the special qubit split into the
/// (A₀ − A₁)/√2 pair of correlators.
pub fn loop_expectations(
    point: &CorrelationPoint,
    l: usize,
    special_party: usize,
) -> Result<Vec<LoopExpectation>> {
    let lat = ToricLattice::new(l)?;
    if point.n_parties() != lat.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: lat.n_qubits(),
            got: point.n_parties(),
        });
    }
    let eval_loop = |op: &PauliString| -> Result<f64> {
        let terms = bell::substitute(op, special_party, 1.0)?;
        Ok(terms
            .iter()
            .map(|t| t.coefficient * point.correlator(t.key()))
            .sum())
    };
    let mut out = Vec::with_capacity(2 * l);
    for r in 0..l {
        out.push(LoopExpectation {
            kind: LoopKind::Horizontal(r),
            value: eval_loop(&lat.z_hor_loop(r as isize))?,
        });
    }
    for c in 0..l {
        out.push(LoopExpectation {
            kind: LoopKind::Vertical(c),
            value: eval_loop(&lat.z_vert_loop(c as isize))?,
        });
    }
    Ok(out)
}
