//! Bell expressions synthesized from stabilizer generators.
//!
//! Every X/Z-type Pauli string maps to a sum of correlators through the
//! substitution X^(j) → (A₀+A₁)/√2, Z^(j) → (A₀−A₁)/√2 at the chosen party j
//! and X → A₀, Z → A₁ elsewhere. Expressions are stored expanded, as plain
//! correlators, so evaluation and classical-bound enumeration stay uniform.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::pauli::PauliString;
use crate::toric::ToricLattice;
use crate::{Error, Result};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// One correlator: a coefficient times the product of one chosen input per
/// participating party. The support is sorted by party and duplicate-free.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    /// (party, input) pairs, input ∈ {0, 1}.
    pub support: Vec<(usize, u8)>,
}

impl Term {
    /// Bitmask key (parties, inputs) identifying the support.
    pub fn key(&self) -> SupportKey {
        let mut parties = 0u64;
        let mut inputs = 0u64;
        for &(p, x) in &self.support {
            parties |= 1 << p;
            if x == 1 {
                inputs |= 1 << p;
            }
        }
        SupportKey { parties, inputs }
    }
}

/// Identifies a correlator by its participating parties and chosen inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SupportKey {
    pub parties: u64,
    pub inputs: u64,
}

impl SupportKey {
    pub fn to_support(self) -> Vec<(usize, u8)> {
        let mut out = Vec::new();
        let mut m = self.parties;
        while m != 0 {
            let p = m.trailing_zeros() as usize;
            out.push((p, ((self.inputs >> p) & 1) as u8));
            m &= m - 1;
        }
        out
    }
}

/// A weighted sum of correlators.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BellExpression {
    pub n_parties: usize,
    pub terms: Vec<Term>,
    /// The party where the (A₀ ± A₁)/√2 substitution was made.
    pub special_party: usize,
    pub classical_bound_hint: Option<f64>,
}

/// Expands `w · S̃` for a stabilizer term into correlator terms. X and Z
/// factors on the special party split into two correlators with the √2
/// absorbed into the coefficients; a Y factor has no substitution rule.
pub fn substitute(
    stabilizer_term: &PauliString,
    special_party: usize,
    weight: f64,
) -> Result<Vec<Term>> {
    let n = stabilizer_term.n_qubits();
    if special_party >= n {
        return Err(Error::InvalidParty {
            party: special_party,
            n,
        });
    }
    let overlap = stabilizer_term.x_mask() & stabilizer_term.z_mask();
    if overlap != 0 {
        return Err(Error::UnsupportedYFactor(overlap.trailing_zeros() as usize));
    }
    let sign = match stabilizer_term.phase_exp() {
        0 => 1.0,
        2 => -1.0,
        _ => return Err(Error::ImaginaryPhase),
    };
    let mut base: Vec<(usize, u8)> = Vec::new();
    let mut special: Option<u8> = None;
    for p in 0..n {
        let x = stabilizer_term.x_mask() >> p & 1 == 1;
        let z = stabilizer_term.z_mask() >> p & 1 == 1;
        if !x && !z {
            continue;
        }
        let input = if x { 0u8 } else { 1u8 };
        if p == special_party {
            special = Some(input);
        } else {
            base.push((p, input));
        }
    }
    let terms = match special {
        None => vec![Term {
            coefficient: sign * weight,
            support: base,
        }],
        Some(kind) => {
            // X → (A₀+A₁)/√2, Z → (A₀−A₁)/√2 on the special party
            let w = sign * weight / SQRT2;
            let mut t0 = base.clone();
            t0.push((special_party, 0));
            t0.sort_unstable();
            let mut t1 = base;
            t1.push((special_party, 1));
            t1.sort_unstable();
            let second = if kind == 0 { w } else { -w };
            vec![
                Term {
                    coefficient: w,
                    support: t0,
                },
                Term {
                    coefficient: second,
                    support: t1,
                },
            ]
        }
    };
    Ok(terms)
}

impl BellExpression {
    /// Builds an expression from weighted stabilizer terms, merging
    /// identical supports and dropping cancelled ones.
    pub fn from_weighted_generators(
        n_parties: usize,
        weighted: &[(f64, PauliString)],
        special_party: usize,
        classical_bound_hint: Option<f64>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<SupportKey, f64> = BTreeMap::new();
        for (w, s) in weighted {
            if s.n_qubits() != n_parties {
                return Err(Error::SizeMismatch(n_parties, s.n_qubits()));
            }
            for t in substitute(s, special_party, *w)? {
                *merged.entry(t.key()).or_insert(0.0) += t.coefficient;
            }
        }
        let terms: Vec<Term> = merged
            .into_iter()
            .filter(|(_, c)| c.abs() > 1e-15)
            .map(|(k, c)| Term {
                coefficient: c,
                support: k.to_support(),
            })
            .collect();
        Ok(Self {
            n_parties,
            terms,
            special_party,
            classical_bound_hint,
        })
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Σ |coefficients| — a crude upper bound for any behaviour value.
    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// Evaluates the expression on a behaviour; every support must be
    /// defined.
    pub fn evaluate(&self, behaviour: &Behaviour) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            let key = t.key();
            let v = behaviour.get(&key).ok_or_else(|| {
                let sup = key.to_support();
                Error::MissingCorrelator(
                    sup.iter().map(|&(p, _)| p).collect(),
                    sup.iter().map(|&(_, x)| x).collect(),
                )
            })?;
            acc += t.coefficient * v;
        }
        Ok(acc)
    }
}

/// The five-qubit-code inequality: weights (√2, 1, √2, 2√2) on the
/// substituted generators, special party 0, local bound 5.
pub fn i5() -> BellExpression {
    let gens = crate::stabilizer::five_qubit_generators();
    let weighted = vec![
        (SQRT2, gens[0]),
        (1.0, gens[1]),
        (SQRT2, gens[2]),
        (2.0 * SQRT2, gens[3]),
    ];
    BellExpression::from_weighted_generators(5, &weighted, 0, Some(5.0))
        .expect("built-in expression")
}

/// The toric-code inequality: every vertex and plaquette term at weight 1,
/// expanded around the special qubit j; local bound N − 2√2(√2 − 1).
pub fn i_tor(l: usize, special_party: usize) -> Result<BellExpression> {
    let lat = ToricLattice::new(l)?;
    let n = lat.n_qubits();
    if special_party >= n {
        return Err(Error::InvalidParty {
            party: special_party,
            n,
        });
    }
    let weighted: Vec<(f64, PauliString)> =
        lat.generators().into_iter().map(|g| (1.0, g)).collect();
    let hint = n as f64 - 2.0 * SQRT2 * (SQRT2 - 1.0);
    BellExpression::from_weighted_generators(n, &weighted, special_party, Some(hint))
}

/// Default special qubit for the toric expression: the first vertical edge
/// of row 0.
pub fn i_tor_default(l: usize) -> Result<BellExpression> {
    i_tor(l, 0)
}

/// A map from correlator supports to expectation values in [−1, 1].
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Behaviour {
    values: BTreeMap<SupportKey, f64>,
}

impl Behaviour {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: SupportKey, value: f64) {
        debug_assert!(value.abs() <= 1.0 + 1e-9, "correlator outside [-1, 1]");
        self.values.insert(key, value);
    }

    pub fn get(&self, key: &SupportKey) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SupportKey, &f64)> {
        self.values.iter()
    }

    /// The deterministic behaviour of a strategy assigning ±1 to every
    /// (party, input), defined on the supports of `expr`.
    pub fn deterministic(expr: &BellExpression, signs: &[[i8; 2]]) -> Self {
        let mut b = Self::new();
        for t in &expr.terms {
            let v: i32 = t
                .support
                .iter()
                .map(|&(p, x)| i32::from(signs[p][x as usize]))
                .product();
            b.insert(t.key(), f64::from(v));
        }
        b
    }
}

/// Serialized form of an expression term list: {coef, parties, inputs}.
#[derive(Serialize, Deserialize)]
pub struct TermRecord {
    pub coef: f64,
    pub parties: Vec<usize>,
    pub inputs: Vec<u8>,
}

pub fn expression_to_records(expr: &BellExpression) -> Vec<TermRecord> {
    expr.terms
        .iter()
        .map(|t| TermRecord {
            coef: t.coefficient,
            parties: t.support.iter().map(|&(p, _)| p).collect(),
            inputs: t.support.iter().map(|&(_, x)| x).collect(),
        })
        .collect()
}

pub fn expression_from_records(
    n_parties: usize,
    special_party: usize,
    records: &[TermRecord],
) -> Result<BellExpression> {
    let mut merged: BTreeMap<SupportKey, f64> = BTreeMap::new();
    for r in records {
        if r.parties.len() != r.inputs.len() {
            return Err(Error::Parse(
                "parties and inputs have different lengths".into(),
            ));
        }
        let mut support: Vec<(usize, u8)> = r
            .parties
            .iter()
            .zip(&r.inputs)
            .map(|(&p, &x)| (p, x))
            .collect();
        support.sort_unstable();
        let t = Term {
            coefficient: r.coef,
            support,
        };
        *merged.entry(t.key()).or_insert(0.0) += t.coefficient;
    }
    let terms = merged
        .into_iter()
        .filter(|(_, c)| c.abs() > 1e-15)
        .map(|(k, c)| Term {
            coefficient: c,
            support: k.to_support(),
        })
        .collect();
    Ok(BellExpression {
        n_parties,
        terms,
        special_party,
        classical_bound_hint: None,
    })
}

/// Behaviour file entry, keyed like [`TermRecord`].
#[derive(Serialize, Deserialize)]
pub struct BehaviourRecord {
    pub parties: Vec<usize>,
    pub inputs: Vec<u8>,
    pub value: f64,
}

pub fn behaviour_to_records(b: &Behaviour) -> Vec<BehaviourRecord> {
    b.iter()
        .map(|(k, &v)| {
            let sup = k.to_support();
            BehaviourRecord {
                parties: sup.iter().map(|&(p, _)| p).collect(),
                inputs: sup.iter().map(|&(_, x)| x).collect(),
                value: v,
            }
        })
        .collect()
}

pub fn behaviour_from_records(records: &[BehaviourRecord]) -> Result<Behaviour> {
    let mut b = Behaviour::new();
    for r in records {
        if r.parties.len() != r.inputs.len() {
            return Err(Error::Parse(
                "parties and inputs have different lengths".into(),
            ));
        }
        if r.value.abs() > 1.0 + 1e-9 {
            return Err(Error::Parse(format!(
                "correlator value {} outside [-1, 1]",
                r.value
            )));
        }
        let mut parties = 0u64;
        let mut inputs = 0u64;
        for (&p, &x) in r.parties.iter().zip(&r.inputs) {
            parties |= 1 << p;
            if x == 1 {
                inputs |= 1 << p;
            }
        }
        b.insert(SupportKey { parties, inputs }, r.value);
    }
    Ok(b)
}
