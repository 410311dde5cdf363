//! Signed N-qubit Pauli strings in symplectic bitmask form.
//!
//! A string is stored as `i^phase_exp · ∏_j X_j^{x_j} Z_j^{z_j}` with the X
//! factor left of the Z factor on every qubit. All phase bookkeeping in the
//! crate derives from this single convention; the dense and matrix-free
//! realizations below are bit-for-bit consistent with it.
//!
//! Qubit 0 is the least significant bit of a computational-basis index, and
//! the leftmost character of the text form ("XZZXI").

use std::fmt;
use std::str::FromStr;

use crate::linalg::{i_pow, CMat, C};
use crate::{Error, Result};

/// Hard cap for dense 2^n × 2^n realizations.
pub const DENSE_QUBIT_CAP: usize = 14;

/// An N-qubit signed Pauli operator.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x_mask: u64,
    z_mask: u64,
    phase_exp: u8,
}

/// A subset of qubits/parties, used as one side of a bipartition.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct QubitSubset {
    n_qubits: usize,
    mask: u64,
}

impl QubitSubset {
    pub fn from_mask(n_qubits: usize, mask: u64) -> Self {
        assert!(n_qubits <= 64 && (n_qubits == 64 || mask < (1u64 << n_qubits)));
        Self { n_qubits, mask }
    }

    pub fn from_qubits(n_qubits: usize, qubits: &[usize]) -> Self {
        let mut mask = 0u64;
        for &q in qubits {
            assert!(q < n_qubits);
            mask |= 1 << q;
        }
        Self { n_qubits, mask }
    }

    pub fn full(n_qubits: usize) -> Self {
        let mask = if n_qubits == 64 {
            u64::MAX
        } else {
            (1u64 << n_qubits) - 1
        };
        Self { n_qubits, mask }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn complement(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            mask: Self::full(self.n_qubits).mask & !self.mask,
        }
    }

    pub fn contains(&self, qubit: usize) -> bool {
        qubit < self.n_qubits && (self.mask >> qubit) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// Nonempty and proper: valid as one side of a bipartition.
    pub fn is_proper_nonempty(&self) -> bool {
        self.mask != 0 && self.mask != Self::full(self.n_qubits).mask
    }
}

impl PauliString {
    pub fn new(n_qubits: usize, x_mask: u64, z_mask: u64, phase_exp: u8) -> Self {
        assert!((1..=64).contains(&n_qubits));
        if n_qubits < 64 {
            let valid = (1u64 << n_qubits) - 1;
            assert!(
                x_mask & !valid == 0 && z_mask & !valid == 0,
                "mask has bits beyond n_qubits"
            );
        }
        Self {
            n_qubits,
            x_mask,
            z_mask,
            phase_exp: phase_exp & 3,
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(n_qubits, 0, 0, 0)
    }

    /// Single X factor on `qubit`.
    pub fn x(n_qubits: usize, qubit: usize) -> Self {
        Self::new(n_qubits, 1 << qubit, 0, 0)
    }

    /// Single Z factor on `qubit`.
    pub fn z(n_qubits: usize, qubit: usize) -> Self {
        Self::new(n_qubits, 0, 1 << qubit, 0)
    }

    /// Single Y factor on `qubit` (Y = i·XZ).
    pub fn y(n_qubits: usize, qubit: usize) -> Self {
        Self::new(n_qubits, 1 << qubit, 1 << qubit, 1)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        (self.x_mask | self.z_mask).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0 && self.phase_exp == 0
    }

    /// True when the mask part is trivial regardless of phase.
    pub fn is_scalar(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Hermitian ⇔ phase_exp + #(qubits carrying both X and Z) is even.
    pub fn is_hermitian(&self) -> bool {
        (self.phase_exp as u32 + (self.x_mask & self.z_mask).count_ones()).is_multiple_of(2)
    }

    /// Exact symplectic product with phase bookkeeping.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch(self.n_qubits, other.n_qubits));
        }
        // commuting Z^z past X^x picks up (−1) per overlapping qubit
        let swaps = (self.z_mask & other.x_mask).count_ones() as u8;
        Ok(Self {
            n_qubits: self.n_qubits,
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
            phase_exp: (self.phase_exp + other.phase_exp + 2 * (swaps & 1)) & 3,
        })
    }

    /// True ⇔ the symplectic inner product is even.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch(self.n_qubits, other.n_qubits));
        }
        let parity = (self.x_mask & other.z_mask).count_ones()
            + (self.z_mask & other.x_mask).count_ones();
        Ok(parity.is_multiple_of(2))
    }

    /// Restriction to the qubits in `g`: masks intersected, phase kept on the
    /// G factor by convention.
    pub fn restrict(&self, g: &QubitSubset) -> Self {
        Self {
            n_qubits: self.n_qubits,
            x_mask: self.x_mask & g.mask,
            z_mask: self.z_mask & g.mask,
            phase_exp: self.phase_exp,
        }
    }

    /// True ⇔ the restrictions of `self` and `other` to `g` anticommute.
    /// Only the mask parity on `g` enters, so the phase convention of
    /// `restrict` is observationally irrelevant here.
    pub fn anticommute_on(&self, other: &Self, g: &QubitSubset) -> Result<bool> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch(self.n_qubits, other.n_qubits));
        }
        let parity = (self.x_mask & other.z_mask & g.mask).count_ones()
            + (self.z_mask & other.x_mask & g.mask).count_ones();
        Ok(parity % 2 == 1)
    }

    /// Scalar phase applied to basis state `idx`: P|idx⟩ = phase · |idx ⊕ x⟩.
    #[inline]
    fn phase_on(&self, idx: u64) -> C {
        let sign = ((self.z_mask & idx).count_ones() & 1) as u8;
        i_pow(self.phase_exp + 2 * sign)
    }

    /// Matrix-free application: `out = P·v`, O(2^n) index permutation plus
    /// phase multiplication.
    pub fn apply_to_state(&self, v: &[C], out: &mut [C]) -> Result<()> {
        let dim = 1usize
            .checked_shl(self.n_qubits as u32)
            .ok_or(Error::DimensionMismatch {
                expected: usize::MAX,
                got: v.len(),
            })?;
        if v.len() != dim || out.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        let x = self.x_mask;
        for j in 0..dim as u64 {
            let src = j ^ x;
            out[j as usize] = self.phase_on(src) * v[src as usize];
        }
        Ok(())
    }

    /// Accumulating variant: `out += c · P·v`.
    pub fn apply_add_to_state(&self, c: C, v: &[C], out: &mut [C]) -> Result<()> {
        let dim = 1usize << self.n_qubits;
        if v.len() != dim || out.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        let x = self.x_mask;
        for j in 0..dim as u64 {
            let src = j ^ x;
            out[j as usize] += c * self.phase_on(src) * v[src as usize];
        }
        Ok(())
    }

    /// Dense 2^n × 2^n realization. Refused above [`DENSE_QUBIT_CAP`] qubits;
    /// use [`PauliString::apply_to_state`] there.
    pub fn dense(&self) -> Result<CMat> {
        if self.n_qubits > DENSE_QUBIT_CAP {
            return Err(Error::DenseCapExceeded {
                n: self.n_qubits,
                cap: DENSE_QUBIT_CAP,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = CMat::zeros(dim, dim);
        for col in 0..dim as u64 {
            let row = col ^ self.x_mask;
            m[(row as usize, col as usize)] = self.phase_on(col);
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ys = (self.x_mask & self.z_mask).count_ones() as u8;
        let token_exp = (self.phase_exp + 4 - (ys & 3)) & 3;
        match token_exp {
            1 => write!(f, "+i")?,
            2 => write!(f, "-")?,
            3 => write!(f, "-i")?,
            _ => {}
        }
        for q in 0..self.n_qubits {
            let x = (self.x_mask >> q) & 1 == 1;
            let z = (self.z_mask >> q) & 1 == 1;
            let ch = match (x, z) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (token_exp, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1u8, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3u8, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0u8, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2u8, r)
        } else {
            (0u8, s)
        };
        if rest.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        if rest.len() > 64 {
            return Err(Error::Parse(format!("{} qubits exceeds 64", rest.len())));
        }
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        let mut ys = 0u8;
        for (q, ch) in rest.chars().enumerate() {
            match ch {
                'I' | 'i' => {}
                'X' | 'x' => x_mask |= 1 << q,
                'Z' | 'z' => z_mask |= 1 << q,
                'Y' | 'y' => {
                    x_mask |= 1 << q;
                    z_mask |= 1 << q;
                    ys = (ys + 1) & 3;
                }
                other => {
                    return Err(Error::Parse(format!("invalid Pauli letter '{other}'")));
                }
            }
        }
        Ok(Self {
            n_qubits: rest.chars().count(),
            x_mask,
            z_mask,
            phase_exp: (token_exp + ys) & 3,
        })
    }
}
