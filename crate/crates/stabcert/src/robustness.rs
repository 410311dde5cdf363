//! Noise-robustness numerics: Jordan-parametrized observables, extraction
//! channels, the operator certificate K ⪰ aB + b over an angle grid, and the
//! extractability-vs-violation curve.

use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{BellExpression, SQRT2};
use crate::bounds::{self, ObservableAssignment};
use crate::linalg::{self, CMat, C};
use crate::stabilizer::StabilizerGroup;
use crate::{Error, Result};

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Dense K-operator construction is capped at this many qubits.
pub const K_OPERATOR_QUBIT_CAP: usize = 10;

/// One angle per party, each in [0, π/2].
#[derive(Clone, Debug, PartialEq)]
pub struct AngleConfig(pub Vec<f64>);

impl AngleConfig {
    pub fn uniform(n: usize, angle: f64) -> Self {
        Self(vec![angle; n])
    }

    pub fn validate(&self) -> Result<()> {
        for &a in &self.0 {
            if !(0.0..=FRAC_PI_2 + 1e-12).contains(&a) {
                return Err(Error::AngleOutOfRange(a));
            }
        }
        Ok(())
    }

    pub fn n_parties(&self) -> usize {
        self.0.len()
    }
}

/// Channel weight g(x) = (1 + √2)(sin x + cos x − 1); g(0) = 0, g(π/4) = 1.
pub fn g_weight(x: f64) -> f64 {
    (1.0 + SQRT2) * (x.sin() + x.cos() - 1.0)
}

/// Dephasing axis of the extraction channel: X/Z on the special party,
/// H/V elsewhere, switching at x = π/4.
pub fn channel_gamma(party: usize, special_party: usize, x: f64) -> CMat {
    let first = x <= FRAC_PI_4;
    if party == special_party {
        if first {
            linalg::sx()
        } else {
            linalg::sz()
        }
    } else if first {
        linalg::obs_h()
    } else {
        linalg::obs_v()
    }
}

/// The extraction channel Λ(x): ρ ↦ (1+g)/2 ρ + (1−g)/2 Γ ρ Γ for one
/// party. Unital and self-dual: its Kraus operators are Hermitian.
#[derive(Clone, Debug)]
pub struct ExtractionChannel {
    pub party: usize,
    pub angle: f64,
    pub g: f64,
    pub gamma: CMat,
}

impl ExtractionChannel {
    pub fn new(party: usize, special_party: usize, angle: f64) -> Self {
        Self {
            party,
            angle,
            g: g_weight(angle),
            gamma: channel_gamma(party, special_party, angle),
        }
    }

    /// Operator-sum form, for CPTP checks and the Kraus-composition oracle.
    pub fn kraus(&self) -> crate::selftest::KrausChannel {
        crate::selftest::KrausChannel {
            kraus: vec![
                linalg::id(2) * C::new(((1.0 + self.g) / 2.0).sqrt(), 0.0),
                self.gamma.clone() * C::new(((1.0 - self.g) / 2.0).sqrt(), 0.0),
            ],
        }
    }
}

/// Jordan-lemma observables: the special party measures in the X/Z plane,
/// all others in the H/V plane, A_x = cos α M^a + (−1)^x sin α M^b.
pub fn jordan_observables(
    config: &AngleConfig,
    special_party: usize,
) -> Result<ObservableAssignment> {
    config.validate()?;
    let mut obs = Vec::with_capacity(config.0.len());
    for (p, &alpha) in config.0.iter().enumerate() {
        let (ma, mb) = if p == special_party {
            (linalg::sx(), linalg::sz())
        } else {
            (linalg::obs_h(), linalg::obs_v())
        };
        let cos = C::new(alpha.cos(), 0.0);
        let sin = C::new(alpha.sin(), 0.0);
        obs.push([&ma * cos + &mb * sin, &ma * cos - &mb * sin]);
    }
    ObservableAssignment::new(obs)
}

/// Fixed data for grid scans over one code/expression pair: the projector,
/// the per-party dephasing operators lifted to the full space, and the
/// classical and quantum reference values.
pub struct RobustnessSetup {
    pub expr: BellExpression,
    pub projector: CMat,
    pub beta_c: f64,
    pub beta_q: f64,
    n: usize,
    special: usize,
    /// lifted Γ per party: [first-branch (x ≤ π/4), second-branch]
    lifted_gammas: Vec<[CMat; 2]>,
}

fn lift_qubit_op(op: &CMat, party: usize, n: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for p in (0..n).rev() {
        if p == party {
            out = out.kronecker(op);
        } else {
            out = out.kronecker(&linalg::id(2));
        }
    }
    out
}

impl RobustnessSetup {
    pub fn new(expr: BellExpression, group: &StabilizerGroup) -> Result<Self> {
        let n = expr.n_parties;
        if group.n_qubits() != n {
            return Err(Error::SizeMismatch(group.n_qubits(), n));
        }
        if n > K_OPERATOR_QUBIT_CAP {
            return Err(Error::DenseCapExceeded {
                n,
                cap: K_OPERATOR_QUBIT_CAP,
            });
        }
        let special = expr.special_party;
        let projector = group.code_projector()?;
        let beta_c = bounds::classical_bound(&expr)?.value;
        let beta_q = bounds::quantum_value_ideal(&expr, group, 0)?.value;
        let lifted_gammas = (0..n)
            .map(|p| {
                [
                    lift_qubit_op(&channel_gamma(p, special, 0.0), p, n),
                    lift_qubit_op(&channel_gamma(p, special, FRAC_PI_2), p, n),
                ]
            })
            .collect();
        Ok(Self {
            expr,
            projector,
            beta_c,
            beta_q,
            n,
            special,
            lifted_gammas,
        })
    }

    pub fn n_parties(&self) -> usize {
        self.n
    }

    pub fn special_party(&self) -> usize {
        self.special
    }

    /// K(ᾱ) = (Λ₁† ⊗ … ⊗ Λ_N†)(P_s); the channels are self-dual, so the
    /// duals act exactly like the channels themselves.
    pub fn k_operator(&self, config: &AngleConfig) -> Result<CMat> {
        config.validate()?;
        if config.n_parties() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: config.n_parties(),
            });
        }
        let mut k = self.projector.clone();
        for (p, &alpha) in config.0.iter().enumerate() {
            let g = g_weight(alpha);
            let branch = usize::from(alpha > FRAC_PI_4);
            let gamma = &self.lifted_gammas[p][branch];
            let w1 = C::new((1.0 + g) / 2.0, 0.0);
            let w2 = C::new((1.0 - g) / 2.0, 0.0);
            k = &k * w1 + gamma * &k * gamma * w2;
        }
        Ok(k)
    }

    /// Dense Bell operator at a Jordan angle configuration.
    pub fn bell_operator(&self, config: &AngleConfig) -> Result<CMat> {
        let obs = jordan_observables(config, self.special)?;
        bounds::bell_operator(&self.expr, &obs)
    }

    /// λ_min(K(ᾱ) − a·B(ᾱ)) at one configuration.
    pub fn lambda_min(&self, a: f64, config: &AngleConfig) -> Result<f64> {
        let m = self.k_operator(config)? - self.bell_operator(config)? * C::new(a, 0.0);
        Ok(linalg::min_eigenvalue(&m))
    }
}

/// Product grid over [0, π/2]^N plus the coordinate-descent refinement
/// schedule.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridSpec {
    pub points_per_angle: usize,
    /// Refinement halts once the step drops below this (π/800 by default).
    pub refine_min_step: f64,
    pub refine: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points_per_angle: 9,
            refine_min_step: PI / 800.0,
            refine: true,
        }
    }
}

impl GridSpec {
    fn angle(&self, digit: usize) -> f64 {
        digit as f64 * FRAC_PI_2 / (self.points_per_angle - 1) as f64
    }

    fn decode(&self, mut idx: usize, n: usize) -> AngleConfig {
        let mut angles = vec![0.0; n];
        for slot in angles.iter_mut() {
            *slot = self.angle(idx % self.points_per_angle);
            idx /= self.points_per_angle;
        }
        AngleConfig(angles)
    }
}

/// Result of minimizing λ_min(K − aB) over the grid.
#[derive(Clone, Debug, Serialize)]
pub struct LinearCertificate {
    pub a: f64,
    /// b = min over the (refined) grid of λ_min(K − aB).
    pub b: f64,
    pub grid: GridSpec,
    pub argmin_angles: Vec<f64>,
    /// Accepted coordinate-descent moves during refinement.
    pub refine_moves: usize,
    /// a·β_q + b at this certificate; 1 for a tight one.
    pub bound_at_max_violation: f64,
}

/// b_of_a: scans the full product grid for min λ_min(K(ᾱ) − a·B(ᾱ)), then
/// refines the argmin by coordinate descent with halving steps down to
/// `grid.refine_min_step`. Deterministic: grid ties resolve to the smallest
/// index, refinement is sequential.
pub fn b_of_a(setup: &RobustnessSetup, a: f64, grid: &GridSpec) -> Result<LinearCertificate> {
    if !(a >= 0.0) {
        return Err(Error::Parse(format!("slope a must be nonnegative, got {a}")));
    }
    let n = setup.n_parties();
    let total = grid.points_per_angle.pow(n as u32);
    let (coarse_val, coarse_idx) = (0..total)
        .into_par_iter()
        .map(|idx| {
            let config = grid.decode(idx, n);
            let v = setup.lambda_min(a, &config).expect("grid angles in range");
            (v, idx)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |best, cur| {
                if cur.0 < best.0 || (cur.0 == best.0 && cur.1 < best.1) {
                    cur
                } else {
                    best
                }
            },
        );

    let mut argmin = grid.decode(coarse_idx, n);
    let mut value = coarse_val;
    let mut moves = 0usize;

    if grid.refine {
        let mut step = FRAC_PI_2 / (grid.points_per_angle - 1) as f64 / 2.0;
        while step >= grid.refine_min_step {
            let mut improved = true;
            while improved {
                improved = false;
                for i in 0..n {
                    for delta in [-step, step] {
                        let mut trial = argmin.clone();
                        trial.0[i] = (trial.0[i] + delta).clamp(0.0, FRAC_PI_2);
                        let v = setup.lambda_min(a, &trial)?;
                        if v < value - 1e-14 {
                            log::debug!(
                                "refine a={a}: angle[{i}] {} -> {} lowers b to {v}",
                                argmin.0[i],
                                trial.0[i]
                            );
                            argmin = trial;
                            value = v;
                            moves += 1;
                            improved = true;
                        }
                    }
                }
            }
            step /= 2.0;
        }
    }

    Ok(LinearCertificate {
        a,
        b: value,
        grid: *grid,
        argmin_angles: argmin.0,
        refine_moves: moves,
        bound_at_max_violation: a * setup.beta_q + value,
    })
}

/// Tightness tolerance on a·β_q + b = 1.
pub const TIGHTNESS_TOL: f64 = 1e-6;

/// Scan specification for the slope search: the a lattice is
/// {0, pace, 2·pace, …, a_max}.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanSpec {
    pub pace: f64,
    pub a_max: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            pace: 1e-3,
            a_max: 1.0,
        }
    }
}

/// Finds the smallest lattice slope a whose certificate is tight
/// (a·β_q + b = 1 ± 1e−6), giving the best extractability line through the
/// maximal-violation point. The tight region is up-closed in a — the
/// codeword eigenvalue 1 − aβ_q falls faster than any other grid value — so
/// a lattice bisection applies. A cheap necessary check at the all-π/4 point
/// prunes slopes that already fail there.
pub fn certificate_search(
    setup: &RobustnessSetup,
    scan: &ScanSpec,
    grid: &GridSpec,
) -> Result<LinearCertificate> {
    let ideal = AngleConfig::uniform(setup.n_parties(), FRAC_PI_4);
    let tight = |k: u64, full: &mut Option<LinearCertificate>| -> Result<bool> {
        let a = k as f64 * scan.pace;
        let target = 1.0 - a * setup.beta_q;
        // necessary condition at the ideal grid point
        if setup.lambda_min(a, &ideal)? < target - TIGHTNESS_TOL {
            return Ok(false);
        }
        let cert = b_of_a(setup, a, grid)?;
        let ok = (cert.bound_at_max_violation - 1.0).abs() <= TIGHTNESS_TOL;
        if ok {
            *full = Some(cert);
        }
        Ok(ok)
    };

    let mut hi = (scan.a_max / scan.pace).round() as u64;
    let mut best: Option<LinearCertificate> = None;
    if !tight(hi, &mut best)? {
        return Err(Error::NoTightCertificate(scan.a_max));
    }
    let mut lo = 0u64; // a = 0 is never tight: b(0) ≥ 0 and β_q·0 + b ≪ 1
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let mut cert = None;
        if tight(mid, &mut cert)? {
            hi = mid;
            best = cert;
        } else {
            lo = mid;
        }
    }
    best.ok_or(Error::NoTightCertificate(scan.a_max))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub relative_violation: f64,
    pub absolute_violation: f64,
    pub lower_bound: f64,
}

/// The extractability-vs-violation table for an emitted certificate.
#[derive(Clone, Debug, Serialize)]
pub struct SweepCurve {
    pub certificate: LinearCertificate,
    pub rows: Vec<SweepRow>,
    /// Best product-state overlap with the projector: extractability is
    /// trivially at least this for any state, so the line is informative
    /// only above it.
    pub trivial_floor: f64,
    pub beta_c: f64,
    pub beta_q: f64,
}

/// Full sweep: certificate search, the β ↦ aβ + b table from β_c to β_q
/// inclusive, and the trivial product-state floor.
pub fn sweep_curve(
    setup: &RobustnessSetup,
    scan: &ScanSpec,
    grid: &GridSpec,
    n_rows: usize,
    seed: u64,
) -> Result<SweepCurve> {
    let certificate = certificate_search(setup, scan, grid)?;
    let rows = curve_rows(setup, &certificate, n_rows);
    let trivial_floor =
        product_state_overlap_floor(&setup.projector, setup.n_parties(), 100, seed);
    Ok(SweepCurve {
        certificate,
        rows,
        trivial_floor,
        beta_c: setup.beta_c,
        beta_q: setup.beta_q,
    })
}

/// Rows of the bound line β ↦ aβ + b, including the β_c and β_q endpoints.
pub fn curve_rows(
    setup: &RobustnessSetup,
    cert: &LinearCertificate,
    n_rows: usize,
) -> Vec<SweepRow> {
    let steps = n_rows.max(2) - 1;
    (0..=steps)
        .map(|k| {
            let t = k as f64 / steps as f64;
            let beta = setup.beta_c + t * (setup.beta_q - setup.beta_c);
            SweepRow {
                relative_violation: t,
                absolute_violation: beta,
                lower_bound: cert.a * beta + cert.b,
            }
        })
        .collect()
}

/// max over product states of ⟨⊗φᵢ|P|⊗φᵢ⟩ by alternating local
/// optimization: each pass replaces one factor with the top eigenvector of
/// the partially contracted projector. Seeded restarts guard against local
/// maxima; the value is recorded, not certified.
pub fn product_state_overlap_floor(
    projector: &CMat,
    n_parties: usize,
    restarts: usize,
    seed: u64,
) -> f64 {
    let mut rng = linalg::seeded_rng(seed);
    let dim = 1usize << n_parties;
    assert_eq!(projector.nrows(), dim);
    let mut best = 0.0f64;
    for _ in 0..restarts {
        let mut factors: Vec<[C; 2]> = (0..n_parties)
            .map(|_| {
                let v = linalg::random_state(2, &mut rng);
                [v[0], v[1]]
            })
            .collect();
        let mut value = 0.0f64;
        for _ in 0..200 {
            let prev = value;
            for i in 0..n_parties {
                // A: dim × 2, columns = the product vector with e_b in slot
                // i (qubit p = index bit p); then argmax over the slot is
                // the top eigenvector of A†PA
                let mut cols = [vec![C::new(0.0, 0.0); dim], vec![C::new(0.0, 0.0); dim]];
                for (b, col) in cols.iter_mut().enumerate() {
                    for (idx, slot) in col.iter_mut().enumerate() {
                        let mut amp = C::new(1.0, 0.0);
                        for (p, f) in factors.iter().enumerate() {
                            let bit = (idx >> p) & 1;
                            if p == i {
                                if bit != b {
                                    amp = C::new(0.0, 0.0);
                                    break;
                                }
                            } else {
                                amp *= f[bit];
                            }
                        }
                        *slot = amp;
                    }
                }
                let a = CMat::from_fn(dim, 2, |r, c| cols[c][r]);
                let m = a.adjoint() * projector * &a;
                let (vals, vecs) = linalg::hermitian_eigen(&m);
                factors[i] = [vecs[(0, 1)], vecs[(1, 1)]];
                value = vals[1];
            }
            if (value - prev).abs() < 1e-12 {
                break;
            }
        }
        best = best.max(value);
    }
    best
}
