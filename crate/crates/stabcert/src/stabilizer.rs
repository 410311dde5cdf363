//! Stabilizer groups, code projectors and bases, and genuine-entanglement
//! certificates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat, CVec, C};
use crate::pauli::{PauliString, QubitSubset, DENSE_QUBIT_CAP};
use crate::toric::ToricLattice;
use crate::{Error, Result};

/// Exhaustive bipartition enumeration refuses above this many parties
/// (2^(N−1) − 1 bipartitions).
pub const EXHAUSTIVE_PARTY_CAP: usize = 20;

/// A validated stabilizer group: Hermitian, pairwise commuting generators
/// whose generated group does not contain −identity. The original generator
/// list is kept verbatim (it may be redundant, as for the toric code, where
/// Bell synthesis needs every vertex and plaquette); an independent set is
/// derived by symplectic elimination.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    n_qubits: usize,
    generators: Vec<PauliString>,
    independent: Vec<PauliString>,
}

impl StabilizerGroup {
    /// The trivial group on n qubits: no generators, the code space is the
    /// whole space and the projector is the identity.
    pub fn trivial(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            generators: Vec::new(),
            independent: Vec::new(),
        }
    }

    pub fn from_generators(gens: Vec<PauliString>) -> Result<Self> {
        let n_qubits = match gens.first() {
            Some(g) => g.n_qubits(),
            None => {
                return Err(Error::Parse(
                    "empty generator list has no qubit count; use StabilizerGroup::trivial"
                        .into(),
                ))
            }
        };
        for (i, g) in gens.iter().enumerate() {
            if g.n_qubits() != n_qubits {
                return Err(Error::SizeMismatch(n_qubits, g.n_qubits()));
            }
            if !g.is_hermitian() {
                return Err(Error::NonHermitianGenerator(i));
            }
            if g.is_scalar() && g.phase_exp() == 2 {
                return Err(Error::MinusIdentity(i));
            }
        }
        for i in 0..gens.len() {
            for j in (i + 1)..gens.len() {
                if !gens[i].commutes(&gens[j])? {
                    return Err(Error::NonCommutingGenerators(i, j));
                }
            }
        }
        let independent = reduce_generators(n_qubits, &gens)?;
        Ok(Self {
            n_qubits,
            generators: gens,
            independent,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// The generators as given, including redundant ones.
    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// An independent generating set (symplectic rank many elements).
    pub fn independent_generators(&self) -> &[PauliString] {
        &self.independent
    }

    pub fn rank(&self) -> usize {
        self.independent.len()
    }

    /// |𝕊| = 2^rank.
    pub fn group_order(&self) -> u128 {
        1u128 << self.rank()
    }

    /// dim C = 2^(n − rank).
    pub fn code_dimension(&self) -> usize {
        1usize << (self.n_qubits - self.rank())
    }

    /// Dense projector onto the joint +1 eigenspace, ∏ᵢ (1 + Sᵢ)/2.
    pub fn code_projector(&self) -> Result<CMat> {
        if self.n_qubits > DENSE_QUBIT_CAP {
            return Err(Error::DenseCapExceeded {
                n: self.n_qubits,
                cap: DENSE_QUBIT_CAP,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut p = CMat::identity(dim, dim);
        let half = C::new(0.5, 0.0);
        for g in &self.independent {
            let s = g.dense()?;
            p = (&p + &p * &s) * half;
        }
        Ok(p)
    }

    /// Checks membership of `p` in the generated group up to phase.
    fn masks_in_group(&self, p: &PauliString) -> bool {
        match eliminate(*p, &self.independent) {
            Ok(r) => r.is_scalar(),
            Err(_) => false,
        }
    }
}

/// Symplectic column marker: (part, bit index) with part 0 = x, 1 = z.
/// Columns are ordered x₀..x_{n−1} then z₀..z_{n−1}; the lead of a row is
/// its first set column, so its whole support sits at columns ≥ the lead.
fn lead_column(p: &PauliString) -> (u8, u32) {
    if p.x_mask() != 0 {
        (0, p.x_mask().trailing_zeros())
    } else {
        (1, p.z_mask().trailing_zeros())
    }
}

fn has_column(p: &PauliString, col: (u8, u32)) -> bool {
    let mask = if col.0 == 0 { p.x_mask() } else { p.z_mask() };
    mask >> col.1 & 1 == 1
}

/// Reduces `cur` against echelon pivots (distinct lead columns, each pivot
/// supported on columns ≥ its own lead, sorted ascending). The result is a
/// scalar exactly when `cur` lies in the span, with the phase tracked
/// exactly through Pauli multiplication.
fn eliminate(mut cur: PauliString, pivots: &[PauliString]) -> Result<PauliString> {
    for piv in pivots {
        if !cur.is_scalar() && has_column(&cur, lead_column(piv)) {
            cur = cur.multiply(piv)?;
        }
    }
    Ok(cur)
}

/// Symplectic Gaussian elimination with exact phase tracking. Returns an
/// independent generating set in echelon form; rejects generator lists whose
/// group contains −identity (a dependent row reducing to the identity mask
/// with phase −1).
fn reduce_generators(_n: usize, gens: &[PauliString]) -> Result<Vec<PauliString>> {
    let mut pivots: Vec<PauliString> = Vec::new();
    for (origin, row) in gens.iter().enumerate() {
        let cur = eliminate(*row, &pivots)?;
        if cur.is_scalar() {
            if cur.phase_exp() != 0 {
                return Err(Error::MinusIdentity(origin));
            }
            continue; // redundant generator
        }
        let pos = pivots
            .partition_point(|p| lead_column(p) < lead_column(&cur));
        pivots.insert(pos, cur);
    }
    Ok(pivots)
}

/// The four generators of the five-qubit code.
pub fn five_qubit_generators() -> Vec<PauliString> {
    ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
        .iter()
        .map(|s| s.parse().expect("built-in generator"))
        .collect()
}

/// The logical labeler S₅ = ZZZZZ of the five-qubit code.
pub fn five_qubit_labeler() -> PauliString {
    "ZZZZZ".parse().expect("built-in labeler")
}

/// All 2L² toric generators (vertices then plaquettes, row-major) on
/// N = 2L² qubits.
pub fn toric_generators(l: usize) -> Result<Vec<PauliString>> {
    Ok(ToricLattice::new(l)?.generators())
}

/// Orthonormal basis of the code space, labeled by the eigenvalues of extra
/// commuting Pauli operators.
#[derive(Clone, Debug)]
pub struct CodeBasis {
    pub n_qubits: usize,
    /// Statevectors, one per code dimension, in label order.
    pub states: Vec<Vec<C>>,
    /// Eigenvalue tuple of each state under the labelers, −1 sorted first.
    pub labels: Vec<Vec<i8>>,
    pub labelers: Vec<PauliString>,
}

impl CodeBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }
}

/// Simultaneous +1 eigenbasis of the generators, split by labeler
/// eigenvalues. Labelers must be Hermitian, commute with the generators and
/// each other, and be independent of the group.
pub fn code_basis(group: &StabilizerGroup, labelers: &[PauliString]) -> Result<CodeBasis> {
    let n = group.n_qubits();
    for (k, lab) in labelers.iter().enumerate() {
        if lab.n_qubits() != n {
            return Err(Error::SizeMismatch(n, lab.n_qubits()));
        }
        if !lab.is_hermitian() {
            return Err(Error::InvalidLabeler(k, "not Hermitian".into()));
        }
        for g in group.generators() {
            if !lab.commutes(g)? {
                return Err(Error::InvalidLabeler(
                    k,
                    "does not commute with a generator".into(),
                ));
            }
        }
        for other in &labelers[..k] {
            if !lab.commutes(other)? {
                return Err(Error::InvalidLabeler(
                    k,
                    "labelers do not commute".into(),
                ));
            }
        }
        if group.masks_in_group(lab) {
            return Err(Error::InvalidLabeler(
                k,
                "not independent of the stabilizer".into(),
            ));
        }
    }

    let p = group.code_projector()?;
    let dim = 1usize << n;
    let cols: Vec<CVec> = (0..dim).map(|i| CVec::from(p.column(i))).collect();
    let mut basis = linalg::mgs_orthonormalize(cols, 1e-10);
    if basis.len() != group.code_dimension() {
        return Err(Error::RelationViolated {
            relation: "rank of code projector",
            residual: basis.len() as f64,
            tol: group.code_dimension() as f64,
        });
    }

    // split the basis by each labeler in turn
    let mut blocks: Vec<(Vec<i8>, Vec<CVec>)> = vec![(Vec::new(), std::mem::take(&mut basis))];
    for (k, lab) in labelers.iter().enumerate() {
        let ld = lab.dense()?;
        let mut next: Vec<(Vec<i8>, Vec<CVec>)> = Vec::new();
        for (label, vecs) in blocks {
            let b = vecs.len();
            let v = CMat::from_fn(dim, b, |r, c| vecs[c][r]);
            let m = v.adjoint() * &ld * &v;
            let (vals, rot) = linalg::hermitian_eigen(&m);
            let rotated = &v * rot;
            for sign in [-1i8, 1] {
                let mut sub: Vec<CVec> = Vec::new();
                for (i, &val) in vals.iter().enumerate() {
                    if (val - f64::from(sign)).abs() < 1e-6 {
                        sub.push(CVec::from(rotated.column(i)));
                    } else if (val - 1.0).abs() > 1e-6 && (val + 1.0).abs() > 1e-6 {
                        return Err(Error::InvalidLabeler(
                            k,
                            format!("eigenvalue {val} on the code space is not ±1"),
                        ));
                    }
                }
                if !sub.is_empty() {
                    let mut l = label.clone();
                    l.push(sign);
                    next.push((l, sub));
                }
            }
        }
        blocks = next;
    }

    let mut states = Vec::new();
    let mut labels = Vec::new();
    for (label, vecs) in blocks {
        for mut v in vecs {
            linalg::fix_phase(&mut v);
            states.push(v.iter().copied().collect::<Vec<C>>());
            labels.push(label.clone());
        }
    }

    // every basis vector must be a +1 eigenvector of every generator
    let mut out = vec![C::new(0.0, 0.0); dim];
    for (s, lab) in states.iter().zip(&labels) {
        for g in group.generators() {
            g.apply_to_state(s, &mut out)?;
            let res: f64 = out
                .iter()
                .zip(s)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if res > 1e-12 {
                return Err(Error::RelationViolated {
                    relation: "S|ψ⟩ = |ψ⟩ on code basis",
                    residual: res,
                    tol: 1e-12,
                });
            }
        }
        let _ = lab;
    }

    Ok(CodeBasis {
        n_qubits: n,
        states,
        labels,
        labelers: labelers.to_vec(),
    })
}

/// Per-bipartition witness: a generator pair whose restrictions to the side
/// containing party 0 anticommute, or `None` when no pair exists
/// (inconclusive — the criterion is sufficient only).
#[derive(Clone, Debug, Serialize)]
pub struct BipartitionWitness {
    /// Canonical side mask; bit 0 (party 1) always set.
    pub side_mask: u64,
    /// Indices into the generator list, lexicographically first hit.
    pub pair: Option<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GmeCertificate {
    pub n_qubits: usize,
    pub witnesses: Vec<BipartitionWitness>,
}

impl GmeCertificate {
    pub fn n_bipartitions(&self) -> usize {
        self.witnesses.len()
    }

    pub fn n_witnessed(&self) -> usize {
        self.witnesses.iter().filter(|w| w.pair.is_some()).count()
    }

    /// True ⇔ every bipartition has a witness, certifying the code space as
    /// genuinely multipartite entangled.
    pub fn all_witnessed(&self) -> bool {
        self.witnesses.iter().all(|w| w.pair.is_some())
    }
}

/// Canonical bipartition side masks: party 0 fixed in G, ascending order.
pub fn bipartition_masks(n: usize) -> impl Iterator<Item = u64> {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    (0u64..(1u64 << (n - 1)))
        .map(|k| (k << 1) | 1)
        .filter(move |&m| m != full)
}

/// Exhaustive certificate: for each of the 2^(N−1) − 1 canonical
/// bipartitions, the lexicographically first generator pair whose
/// restrictions anticommute.
pub fn gme_certificate_exhaustive(group: &StabilizerGroup) -> Result<GmeCertificate> {
    let n = group.n_qubits();
    if n > EXHAUSTIVE_PARTY_CAP {
        return Err(Error::EnumerationCapExceeded {
            n,
            cap: EXHAUSTIVE_PARTY_CAP,
        });
    }
    let gens = group.generators();
    let masks: Vec<u64> = bipartition_masks(n).collect();
    let witnesses: Vec<BipartitionWitness> = masks
        .par_iter()
        .map(|&mask| {
            let g = QubitSubset::from_mask(n, mask);
            let mut pair = None;
            'outer: for i in 0..gens.len() {
                for j in (i + 1)..gens.len() {
                    if gens[i].anticommute_on(&gens[j], &g).unwrap_or(false) {
                        pair = Some((i, j));
                        break 'outer;
                    }
                }
            }
            BipartitionWitness {
                side_mask: mask,
                pair,
            }
        })
        .collect();
    Ok(GmeCertificate {
        n_qubits: n,
        witnesses,
    })
}

/// Constructive toric witness for one bipartition; indices refer to the
/// toric generator list (vertices then plaquettes).
pub fn toric_gme_witness(l: usize, g: &QubitSubset) -> Result<(usize, usize)> {
    ToricLattice::new(l)?.gme_witness(g)
}

/// Constructive certificate over all canonical bipartitions of the toric
/// code; every returned pair is re-verified by `anticommute_on`.
pub fn toric_gme_certificate(l: usize) -> Result<GmeCertificate> {
    let lat = ToricLattice::new(l)?;
    let n = lat.n_qubits();
    let gens = lat.generators();
    let masks: Vec<u64> = bipartition_masks(n).collect();
    let witnesses: Vec<BipartitionWitness> = masks
        .par_iter()
        .map(|&mask| {
            let g = QubitSubset::from_mask(n, mask);
            let pair = lat.gme_witness(&g).ok().filter(|&(i, j)| {
                gens[i].anticommute_on(&gens[j], &g).unwrap_or(false)
            });
            BipartitionWitness {
                side_mask: mask,
                pair,
            }
        })
        .collect();
    Ok(GmeCertificate {
        n_qubits: n,
        witnesses,
    })
}

/// On-disk stabilizer definition.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CodeDefinition {
    pub n: usize,
    pub generators: Vec<String>,
    #[serde(default)]
    pub labelers: Vec<String>,
}

/// A resolved code: validated group plus labelers (and the lattice when the
/// code is toric).
pub struct Code {
    pub name: String,
    pub group: StabilizerGroup,
    pub labelers: Vec<PauliString>,
    pub lattice: Option<ToricLattice>,
}

/// Resolves "five_qubit", "toric:L", or a JSON definition file path.
pub fn resolve_code(spec: &str) -> Result<Code> {
    if spec == "five_qubit" {
        return Ok(Code {
            name: spec.to_string(),
            group: StabilizerGroup::from_generators(five_qubit_generators())?,
            labelers: vec![five_qubit_labeler()],
            lattice: None,
        });
    }
    if let Some(l) = spec.strip_prefix("toric:") {
        let l: usize = l
            .parse()
            .map_err(|_| Error::Parse(format!("invalid toric size '{l}'")))?;
        let lat = ToricLattice::new(l)?;
        return Ok(Code {
            name: spec.to_string(),
            group: StabilizerGroup::from_generators(lat.generators())?,
            labelers: vec![lat.z_hor_loop(0), lat.z_vert_loop(0)],
            lattice: Some(lat),
        });
    }
    let text = std::fs::read_to_string(spec)?;
    let def: CodeDefinition = serde_json::from_str(&text)?;
    let gens = def
        .generators
        .iter()
        .map(|s| s.parse::<PauliString>())
        .collect::<Result<Vec<_>>>()?;
    for g in &gens {
        if g.n_qubits() != def.n {
            return Err(Error::SizeMismatch(def.n, g.n_qubits()));
        }
    }
    let labelers = def
        .labelers
        .iter()
        .map(|s| s.parse::<PauliString>())
        .collect::<Result<Vec<_>>>()?;
    Ok(Code {
        name: spec.to_string(),
        group: StabilizerGroup::from_generators(gens)?,
        labelers,
        lattice: None,
    })
}
