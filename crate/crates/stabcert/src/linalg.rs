//! Dense complex linear algebra shared across the crate: Hermitian
//! eigendecompositions, Gram–Schmidt with pivoting, local-operator kernels on
//! statevectors, seeded random objects, and a restarted Lanczos solver for
//! matrix-free extremal eigenvalues.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub type C = Complex<f64>;
pub type CMat = DMatrix<C>;
pub type CVec = DVector<C>;

pub const ONE: C = Complex::new(1.0, 0.0);
pub const I: C = Complex::new(0.0, 1.0);

/// i^k for k mod 4.
pub fn i_pow(k: u8) -> C {
    match k & 3 {
        0 => Complex::new(1.0, 0.0),
        1 => Complex::new(0.0, 1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, -1.0),
    }
}

pub fn id(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn sx() -> CMat {
    CMat::from_row_slice(2, 2, &[C::new(0., 0.), ONE, ONE, C::new(0., 0.)])
}

pub fn sy() -> CMat {
    CMat::from_row_slice(2, 2, &[C::new(0., 0.), -I, I, C::new(0., 0.)])
}

pub fn sz() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, C::new(0., 0.), C::new(0., 0.), -ONE])
}

/// H = (X + Z)/√2, the diagonal observable of the X/Z plane.
pub fn obs_h() -> CMat {
    (sx() + sz()) / C::new(std::f64::consts::SQRT_2, 0.0)
}

/// V = (X − Z)/√2, the anti-diagonal observable of the X/Z plane.
pub fn obs_v() -> CMat {
    (sx() - sz()) / C::new(std::f64::consts::SQRT_2, 0.0)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product over `ops`, first entry = most significant factor.
pub fn kron_all(ops: &[CMat]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for op in ops {
        out = out.kronecker(op);
    }
    out
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * C::new(0.5, 0.0)
}

pub fn hermiticity_residual(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
/// The input is symmetrized first; columns of the returned matrix are the
/// eigenvectors in the same order as the eigenvalues.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = hermitize(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix. Real symmetric inputs (common
/// here: projectors, dephased projectors and X/Z-plane Bell operators are
/// all real) take a real-arithmetic path, which is severalfold faster.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    let n = m.nrows();
    let imag_max = m.iter().fold(0.0f64, |acc, v| acc.max(v.im.abs()));
    if imag_max < 1e-12 {
        let re = DMatrix::<f64>::from_fn(n, n, |r, c| 0.5 * (m[(r, c)].re + m[(c, r)].re));
        let eig = re.symmetric_eigen();
        return eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    }
    let eig = hermitize(m).symmetric_eigen();
    eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(m: &CMat) -> f64 {
    let eig = hermitize(m).symmetric_eigen();
    eig.eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
}

/// Modified Gram–Schmidt with pivoting on column norm. Columns with residual
/// norm at most `tol` are dropped; the returned set is orthonormal.
pub fn mgs_orthonormalize(mut cols: Vec<CVec>, tol: f64) -> Vec<CVec> {
    let mut out: Vec<CVec> = Vec::new();
    while let Some((best, norm)) = cols
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        if norm <= tol {
            break;
        }
        let v = cols.swap_remove(best) / C::new(norm, 0.0);
        for c in cols.iter_mut() {
            let overlap = v.dotc(c);
            *c -= &v * overlap;
        }
        out.push(v);
    }
    out
}

/// Rotates the global phase so the largest-modulus entry is real positive.
/// Ties resolve to the lowest index, making basis vectors reproducible.
pub fn fix_phase(v: &mut CVec) {
    let mut best = 0usize;
    let mut best_norm = 0.0f64;
    for (i, a) in v.iter().enumerate() {
        let n = a.norm();
        if n > best_norm + 1e-12 {
            best_norm = n;
            best = i;
        }
    }
    if best_norm > 0.0 {
        let phase = v[best] / C::new(best_norm, 0.0);
        let rot = phase.conj();
        for a in v.iter_mut() {
            *a *= rot;
        }
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state(dim: usize, rng: &mut impl Rng) -> CVec {
    let mut v = CVec::from_fn(dim, |_, _| {
        C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let n = v.norm();
    v /= C::new(n, 0.0);
    v
}

/// Full-rank random density matrix (normalized Ginibre product).
pub fn random_density(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| {
        C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let rho = &g * g.adjoint();
    let tr = trace(&rho).re;
    rho / C::new(tr, 0.0)
}

/// Haar-like random unitary via QR of a Ginibre matrix with phase-fixed R.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| {
        C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let ph = d / C::new(n, 0.0);
            for i in 0..dim {
                q[(i, j)] *= ph;
            }
        }
    }
    q
}

/// Random ±1-eigenvalue qubit observable n̂·σ.
pub fn random_qubit_observable(rng: &mut impl Rng) -> CMat {
    let mut n = [0.0f64; 3];
    loop {
        for x in n.iter_mut() {
            *x = 2.0 * rng.gen::<f64>() - 1.0;
        }
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len > 1e-3 && len <= 1.0 {
            for x in n.iter_mut() {
                *x /= len;
            }
            break;
        }
    }
    sx() * C::new(n[0], 0.0) + sy() * C::new(n[1], 0.0) + sz() * C::new(n[2], 0.0)
}

pub fn trace(m: &CMat) -> C {
    m.diagonal().sum()
}

/// Applies a (possibly rectangular) local operator at `site` of a tensor
/// product with the given per-site dimensions. Site 0 is the fastest-varying
/// index factor (for qubit sites, site p = index bit p), so a trailing
/// environment site is the most significant.
pub fn apply_local(op: &CMat, site: usize, dims: &[usize], v: &[C]) -> Vec<C> {
    let d_in = dims[site];
    let d_out = op.nrows();
    assert_eq!(op.ncols(), d_in, "operator shape does not match site dim");
    let inner: usize = dims[..site].iter().product();
    let outer: usize = dims[site + 1..].iter().product();
    assert_eq!(inner * d_in * outer, v.len(), "state length mismatch");
    let mut out = vec![C::new(0.0, 0.0); inner * d_out * outer];
    for o in 0..outer {
        for i in 0..inner {
            for a in 0..d_out {
                let mut acc = C::new(0.0, 0.0);
                for b in 0..d_in {
                    acc += op[(a, b)] * v[(o * d_in + b) * inner + i];
                }
                out[(o * d_out + a) * inner + i] = acc;
            }
        }
    }
    out
}

/// In-place 2×2 operator on qubit `q` of an n-qubit statevector
/// (qubit 0 = least significant bit).
pub fn apply_qubit_op(op: &CMat, q: usize, v: &mut [C]) {
    let stride = 1usize << q;
    let a = op[(0, 0)];
    let b = op[(0, 1)];
    let c = op[(1, 0)];
    let d = op[(1, 1)];
    let mut base = 0usize;
    while base < v.len() {
        for i in base..base + stride {
            let lo = v[i];
            let hi = v[i + stride];
            v[i] = a * lo + b * hi;
            v[i + stride] = c * lo + d * hi;
        }
        base += stride << 1;
    }
}

/// A Hermitian linear operator given by its action on statevectors.
pub trait HermitianOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[C], out: &mut [C]);
}

pub struct LanczosOutcome {
    pub value: f64,
    pub vector: Vec<C>,
    pub residual: f64,
    pub matvecs: usize,
}

fn dotc(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest eigenvalue of a Hermitian operator by restarted Lanczos with full
/// reorthogonalization. Converges when the true residual ‖Av − θv‖ drops
/// below `tol`; fails after `max_matvecs` operator applications.
pub fn lanczos_largest(
    op: &dyn HermitianOp,
    seed: u64,
    tol: f64,
    max_matvecs: usize,
) -> Result<LanczosOutcome> {
    let dim = op.dim();
    let cycle = 48.min(dim);
    let mut rng = seeded_rng(seed);
    let mut start: Vec<C> = (0..dim)
        .map(|_| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let n0 = norm(&start);
    start.iter_mut().for_each(|x| *x /= n0);

    let mut matvecs = 0usize;

    loop {
        let mut basis: Vec<Vec<C>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::with_capacity(cycle);
        let mut betas: Vec<f64> = Vec::with_capacity(cycle);
        let mut w = vec![C::new(0.0, 0.0); dim];

        for j in 0..cycle {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let alpha = dotc(&basis[j], &w).re;
            alphas.push(alpha);
            // three-term recurrence, then full reorthogonalization (twice)
            for _ in 0..2 {
                for b in &basis {
                    let ov = dotc(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= ov * y);
                }
            }
            let beta = norm(&w);
            if beta < 1e-14 || j + 1 == cycle || matvecs >= max_matvecs {
                if beta >= 1e-14 {
                    betas.push(beta);
                }
                break;
            }
            betas.push(beta);
            let next: Vec<C> = w.iter().map(|x| x / beta).collect();
            basis.push(next);
        }

        let k = alphas.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = t.symmetric_eigen();
        let mut best = 0usize;
        for i in 1..k {
            if eig.eigenvalues[i] > eig.eigenvalues[best] {
                best = i;
            }
        }
        let theta = eig.eigenvalues[best];
        let mut ritz = vec![C::new(0.0, 0.0); dim];
        for (i, b) in basis.iter().enumerate().take(k) {
            let s = C::new(eig.eigenvectors[(i, best)], 0.0);
            ritz.iter_mut().zip(b).for_each(|(x, y)| *x += s * y);
        }
        let nr = norm(&ritz);
        ritz.iter_mut().for_each(|x| *x /= nr);

        op.apply(&ritz, &mut w);
        matvecs += 1;
        let residual = {
            let mut acc = 0.0f64;
            for (x, y) in w.iter().zip(&ritz) {
                acc += (x - y * C::new(theta, 0.0)).norm_sqr();
            }
            acc.sqrt()
        };

        if residual <= tol {
            return Ok(LanczosOutcome {
                value: theta,
                vector: ritz,
                residual,
                matvecs,
            });
        }
        if matvecs >= max_matvecs {
            return Err(Error::NonConvergence { residual, matvecs });
        }
        start = ritz;
    }
}
