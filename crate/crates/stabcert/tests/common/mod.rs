//! Shared test oracles, independent of the library paths they check.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;

pub type C = Complex<f64>;
pub type CMat = DMatrix<C>;

/// Hermitian square root via eigendecomposition. Eigenvalues below a
/// relative cutoff are treated as exact zeros — the square root would
/// otherwise amplify O(ε) eigenvalue noise to O(√ε).
pub fn psd_sqrt(m: &CMat) -> CMat {
    let eig = ((m + m.adjoint()) * C::new(0.5, 0.0)).symmetric_eigen();
    let n = m.nrows();
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let cutoff = top * 1e-13;
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let raw = eig.eigenvalues[k];
        let lam = if raw <= cutoff { 0.0 } else { raw.sqrt() };
        if lam == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += C::new(lam, 0.0) * v[i] * v[j].conj();
            }
        }
    }
    out
}

/// Sum of square roots of the eigenvalues, with near-zero eigenvalues
/// treated as exact zeros (same √ε-amplification concern as in psd_sqrt).
fn trace_sqrt(m: &CMat) -> f64 {
    let eig = ((m + m.adjoint()) * C::new(0.5, 0.0)).symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let cutoff = top * 1e-13;
    eig.eigenvalues
        .iter()
        .map(|&l| if l <= cutoff { 0.0 } else { l.sqrt() })
        .sum()
}

/// Uhlmann fidelity F(ρ, σ) = (tr √(√ρ σ √ρ))².
pub fn fidelity(rho: &CMat, sigma: &CMat) -> f64 {
    let sr = psd_sqrt(rho);
    let tr = trace_sqrt(&(&sr * sigma * &sr));
    tr * tr
}

/// Projects a Hermitian matrix onto the density-matrix set: eigenvalues onto
/// the probability simplex, eigenvectors kept.
fn project_to_density(m: &CMat) -> CMat {
    let k = m.nrows();
    let eig = ((m + m.adjoint()) * C::new(0.5, 0.0)).symmetric_eigen();
    let mut w: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut sorted = w.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut tau = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        css += v;
        let t = (1.0 - css) / (i + 1) as f64;
        if v + t > 0.0 {
            tau = t;
        }
    }
    for x in w.iter_mut() {
        *x = (*x + tau).max(0.0);
    }
    let mut out = CMat::zeros(k, k);
    for (c, &weight) in w.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(c);
        for i in 0..k {
            for j in 0..k {
                out[(i, j)] += C::new(weight, 0.0) * v[i] * v[j].conj();
            }
        }
    }
    out
}

/// Direct numerical maximization of F(σ, ρ) over density matrices σ
/// supported on the subspace spanned by the orthonormal columns of `basis`:
/// projected gradient ascent with a numerical gradient over the Hermitian
/// parametrization. Fidelity is jointly concave, so the ascent reaches the
/// global maximum. This is the independent route against tr(P_s ρ).
pub fn max_fidelity_over_subspace(rho: &CMat, basis: &CMat) -> f64 {
    let k = basis.ncols();
    let rho_s = basis.adjoint() * rho * basis; // k×k, PSD, trace ≤ 1
    let f = |m: &CMat| -> f64 {
        // F(VMV†, ρ) reduces to (tr √(√M ρ_s √M))²
        let sm = psd_sqrt(m);
        let tr = trace_sqrt(&(&sm * &rho_s * &sm));
        tr * tr
    };

    let mut m = CMat::identity(k, k) / C::new(k as f64, 0.0);
    let mut fv = f(&m);
    let mut step = 0.1f64;
    let eps = 1e-6;
    for _ in 0..400 {
        // numerical gradient over the Hermitian basis
        let mut grad = CMat::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let mut e = CMat::zeros(k, k);
                if i == j {
                    e[(i, i)] = C::new(1.0, 0.0);
                    let d = (f(&(&m + &e * C::new(eps, 0.0))) - fv) / eps;
                    grad += &e * C::new(d, 0.0);
                } else {
                    e[(i, j)] = C::new(1.0, 0.0);
                    e[(j, i)] = C::new(1.0, 0.0);
                    let d1 = (f(&(&m + &e * C::new(eps, 0.0))) - fv) / eps;
                    grad += &e * C::new(d1 / 2.0, 0.0);
                    let mut e2 = CMat::zeros(k, k);
                    e2[(i, j)] = C::new(0.0, 1.0);
                    e2[(j, i)] = C::new(0.0, -1.0);
                    let d2 = (f(&(&m + &e2 * C::new(eps, 0.0))) - fv) / eps;
                    grad += &e2 * C::new(d2 / 2.0, 0.0);
                }
            }
        }
        let trial = project_to_density(&(&m + &grad * C::new(step, 0.0)));
        let ft = f(&trial);
        if ft > fv {
            m = trial;
            fv = ft;
            step *= 1.2;
        } else {
            step *= 0.5;
            if step < 1e-9 {
                break;
            }
        }
    }
    fv
}

/// Random full-rank density matrix.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| {
        C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let rho = &g * g.adjoint();
    let tr: f64 = rho.diagonal().iter().map(|x| x.re).sum();
    rho / C::new(tr, 0.0)
}

/// Orthonormal basis of a random k-dimensional subspace.
pub fn random_subspace(dim: usize, k: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(dim, k, |_, _| {
        C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let qr = g.qr();
    let q = qr.q();
    CMat::from_fn(dim, k, |r, c| q[(r, c)])
}
