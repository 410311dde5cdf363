//! The L×L torus lattice behind the toric code.
//!
//! Qubits sit on edges. Row r (0-based, periodic) carries the L vertical
//! qubits `2Lr .. 2Lr+L-1` followed by the L horizontal qubits
//! `2Lr+L .. 2Lr+2L-1`; the vertical qubit above `j` is `j + 2L` and the
//! horizontal qubit to its upper right is `j + L`.
//!
//! `vertex(c, r)` is the X-type star at the top end of vertical qubit
//! `v(c, r)`; `plaquette(c, r)` is the Z-type face to its right. Adjacent
//! vertex/plaquette pairs overlap on exactly two qubits, one vertical and one
//! horizontal.

use crate::linalg::C;
use crate::pauli::{PauliString, QubitSubset};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct ToricLattice {
    l: usize,
}

/// Which side of a lattice edge a qubit lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Vertical,
    Horizontal,
}

impl ToricLattice {
    pub fn new(l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidLatticeSize(l));
        }
        // 2L² qubits must fit in the u64 masks
        if 2 * l * l > 64 {
            return Err(Error::InvalidLatticeSize(l));
        }
        Ok(Self { l })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.l * self.l
    }

    /// Vertical edge qubit at column c, row r (periodic).
    pub fn v_qubit(&self, c: isize, r: isize) -> usize {
        let l = self.l as isize;
        let c = c.rem_euclid(l) as usize;
        let r = r.rem_euclid(l) as usize;
        2 * self.l * r + c
    }

    /// Horizontal edge qubit at column c, row r (periodic).
    pub fn h_qubit(&self, c: isize, r: isize) -> usize {
        let l = self.l as isize;
        let c = c.rem_euclid(l) as usize;
        let r = r.rem_euclid(l) as usize;
        2 * self.l * r + self.l + c
    }

    pub fn edge_kind(&self, qubit: usize) -> EdgeKind {
        if qubit % (2 * self.l) < self.l {
            EdgeKind::Vertical
        } else {
            EdgeKind::Horizontal
        }
    }

    /// The four qubits of the vertex star at the top of v(c, r).
    pub fn vertex_qubits(&self, c: isize, r: isize) -> [usize; 4] {
        [
            self.v_qubit(c, r),
            self.v_qubit(c, r + 1),
            self.h_qubit(c, r),
            self.h_qubit(c - 1, r),
        ]
    }

    /// The four qubits of the plaquette to the right of v(c, r).
    pub fn plaquette_qubits(&self, c: isize, r: isize) -> [usize; 4] {
        [
            self.v_qubit(c, r),
            self.v_qubit(c + 1, r),
            self.h_qubit(c, r),
            self.h_qubit(c, r - 1),
        ]
    }

    pub fn vertex_operator(&self, c: isize, r: isize) -> PauliString {
        let mut x = 0u64;
        for q in self.vertex_qubits(c, r) {
            x |= 1 << q;
        }
        PauliString::new(self.n_qubits(), x, 0, 0)
    }

    pub fn plaquette_operator(&self, c: isize, r: isize) -> PauliString {
        let mut z = 0u64;
        for q in self.plaquette_qubits(c, r) {
            z |= 1 << q;
        }
        PauliString::new(self.n_qubits(), 0, z, 0)
    }

    /// All L² vertex operators followed by all L² plaquette operators,
    /// row-major. The list is intentionally redundant (∏Sᵥ = ∏Sₚ = 1); Bell
    /// synthesis sums over all of them.
    pub fn generators(&self) -> Vec<PauliString> {
        let l = self.l as isize;
        let mut gens = Vec::with_capacity(2 * self.l * self.l);
        for r in 0..l {
            for c in 0..l {
                gens.push(self.vertex_operator(c, r));
            }
        }
        for r in 0..l {
            for c in 0..l {
                gens.push(self.plaquette_operator(c, r));
            }
        }
        gens
    }

    /// Index of vertex (c, r) in [`ToricLattice::generators`].
    pub fn vertex_index(&self, c: isize, r: isize) -> usize {
        let l = self.l as isize;
        let c = c.rem_euclid(l) as usize;
        let r = r.rem_euclid(l) as usize;
        r * self.l + c
    }

    /// Index of plaquette (c, r) in [`ToricLattice::generators`].
    pub fn plaquette_index(&self, c: isize, r: isize) -> usize {
        let l = self.l as isize;
        let c = c.rem_euclid(l) as usize;
        let r = r.rem_euclid(l) as usize;
        self.l * self.l + r * self.l + c
    }

    /// Z loop along the horizontal cycle: Z on every horizontal qubit of
    /// row r.
    pub fn z_hor_loop(&self, r: isize) -> PauliString {
        let mut z = 0u64;
        for c in 0..self.l as isize {
            z |= 1 << self.h_qubit(c, r);
        }
        PauliString::new(self.n_qubits(), 0, z, 0)
    }

    /// Z loop along the vertical cycle: Z on every vertical qubit of
    /// column c. Column 0 contains the default special qubit v(0, 0).
    pub fn z_vert_loop(&self, c: isize) -> PauliString {
        let mut z = 0u64;
        for r in 0..self.l as isize {
            z |= 1 << self.v_qubit(c, r);
        }
        PauliString::new(self.n_qubits(), 0, z, 0)
    }

    /// The four codewords ψ_ab built without any dense operator: a
    /// computational seed with the right loop parities (flipping a
    /// column of horizontal qubits toggles the Z_hor eigenvalue, a row of
    /// vertical qubits toggles Z_vert, neither excites a plaquette) is
    /// pushed through every (1 + S)/2 projector. Labels are (a, b) =
    /// (Z_hor, Z_vert) eigenvalues, ordered −1 before +1, matching
    /// [`crate::stabilizer::code_basis`].
    pub fn code_states_matrix_free(&self) -> Result<Vec<([i8; 2], Vec<C>)>> {
        let n = self.n_qubits();
        let dim = 1usize << n;
        let mut hor_flip = 0u64; // column of horizontal qubits
        let mut vert_flip = 0u64; // row of vertical qubits
        for k in 0..self.l as isize {
            hor_flip |= 1 << self.h_qubit(0, k);
            vert_flip |= 1 << self.v_qubit(k, 0);
        }
        let gens = self.generators();
        let mut out = Vec::with_capacity(4);
        for a in [-1i8, 1] {
            for b in [-1i8, 1] {
                let seed = (if a == -1 { hor_flip } else { 0 })
                    | (if b == -1 { vert_flip } else { 0 });
                let mut v = vec![C::new(0.0, 0.0); dim];
                v[seed as usize] = C::new(1.0, 0.0);
                let mut scratch = vec![C::new(0.0, 0.0); dim];
                for g in &gens {
                    g.apply_to_state(&v, &mut scratch)?;
                    for (x, s) in v.iter_mut().zip(&scratch) {
                        *x = (*x + s) * C::new(0.5, 0.0);
                    }
                }
                let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-12 {
                    return Err(Error::RelationViolated {
                        relation: "seed overlaps the code space",
                        residual: norm,
                        tol: 1e-12,
                    });
                }
                v.iter_mut().for_each(|x| *x /= C::new(norm, 0.0));
                out.push(([a, b], v));
            }
        }
        Ok(out)
    }

    /// Constructive genuine-entanglement witness for a bipartition: a
    /// (vertex, plaquette) generator pair whose restrictions to `g`
    /// anticommute. Looks for a vertex divided between the two sides, then
    /// picks the plaquette overlapping it on exactly one `g` qubit.
    /// Returns indices into [`ToricLattice::generators`].
    pub fn gme_witness(&self, g: &QubitSubset) -> Result<(usize, usize)> {
        if g.n_qubits() != self.n_qubits() || !g.is_proper_nonempty() {
            return Err(Error::InvalidBipartition);
        }
        let l = self.l as isize;
        for r in 0..l {
            for c in 0..l {
                let star = self.vertex_qubits(c, r);
                let inside = star.iter().filter(|&&q| g.contains(q)).count();
                if inside == 0 || inside == 4 {
                    continue;
                }
                // divided vertex: pick a (vertical, horizontal) edge pair of
                // the star with exactly one member in g; the unique plaquette
                // through both then anticommutes with the star on g.
                let vb = (self.v_qubit(c, r), self.plaquette_index(c, r));
                let vt = (self.v_qubit(c, r + 1), self.plaquette_index(c, r + 1));
                let hr = self.h_qubit(c, r);
                let hl = self.h_qubit(c - 1, r);
                let candidates = [
                    (vb.0, hr, vb.1),
                    (vb.0, hl, self.plaquette_index(c - 1, r)),
                    (vt.0, hr, vt.1),
                    (vt.0, hl, self.plaquette_index(c - 1, r + 1)),
                ];
                for (vq, hq, p_idx) in candidates {
                    if g.contains(vq) != g.contains(hq) {
                        return Ok((self.vertex_index(c, r), p_idx));
                    }
                }
                // a divided star always admits a mixed-type split pair
                unreachable!("divided vertex without a mixed-type split pair");
            }
        }
        unreachable!("nontrivial bipartition without a divided vertex");
    }
}
