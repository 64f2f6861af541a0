//! Stationarity and local convergence-rate analysis for PGD on the
//! unit-modulus set.
//!
//! At a stationary point `x*` with multipliers `γ` and tangent basis `Z`,
//! the reduced Riemannian Hessian is `H = ZᵀAᵀAZ − diag(γ)` and the local
//! error dynamics of fixed-step PGD are governed by
//! `M_η = I − η (I − η diag(γ))⁻¹ H`. Its spectral radius `ρ(M_η)` is the
//! linear rate; the admissible-step conditions, the optimal step `η*`, the
//! step ceiling `η_max`, and the region-of-convergence constants `c₀`, `c₁`
//! all derive from `(γ, H, η)` and are computed here.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::{gradient, select2, spectral_norm, RealProblem, UnitModulusPoint};

/// `η γᵢ` counts as exactly 1 (singular scaling) below this tolerance.
pub const C2_TOL: f64 = 1e-12;

/// Stationarity bundle at a candidate point: multipliers, tangent basis,
/// reduced Hessian, and the first-order-condition residual.
#[derive(Debug, Clone)]
pub struct StationaryAnalysis {
    pub x_star: UnitModulusPoint,
    pub gamma: DVector<f64>,
    pub z: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub stationarity_residual: f64,
}

impl StationaryAnalysis {
    pub fn at(p: &RealProblem, x: &UnitModulusPoint) -> Self {
        let (gamma, residual) = lagrange_multipliers(p, x);
        let z = tangent_basis(x);
        let h = reduced_hessian(p, x, &gamma);
        Self {
            x_star: x.clone(),
            gamma,
            z,
            h,
            stationarity_residual: residual,
        }
    }
}

/// Per-step-size condition flags and derived constants at a stationary
/// point. `m_eta` and `rho` are present when the scaling is nonsingular
/// (C2); `c0`/`c1_radius` when all of (C1)-(C3) hold.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub eta: f64,
    pub m_eta: Option<DMatrix<f64>>,
    pub rho: Option<f64>,
    /// (C1) `H ≻ 0`.
    pub c1_ok: bool,
    /// (C2) `η γᵢ ≠ 1` for all i.
    pub c2_ok: bool,
    /// (C3) `ρ(M_η) < 1`.
    pub c3_ok: bool,
    /// (C3') `η (λ₁(H) + 2 max γᵢ) < 2`; sufficient for (C3).
    pub c3prime_ok: bool,
    /// Fixed-point condition on the multipliers: `γᵢ < 1/η`, relaxed to `≤`
    /// on pairs equal to the tie-break vector `[1, 0]ᵀ`.
    pub fixed_point_ok: bool,
    pub c0: Option<f64>,
    pub c1_radius: Option<f64>,
}

/// Least-squares multipliers `γᵢ = ⟨Sᵢ(r), Sᵢ(x)⟩` with `r = Aᵀ(Ax − b)`,
/// and the residual `‖r − (diag(γ) ⊗ I₂) x‖` of the first-order condition.
/// The residual vanishes exactly at stationary points.
pub fn lagrange_multipliers(p: &RealProblem, x: &UnitModulusPoint) -> (DVector<f64>, f64) {
    let r = gradient(p, x.as_vector());
    let n = x.n_pairs();
    let mut gamma = DVector::<f64>::zeros(n);
    let mut res_sq = 0.0;
    for i in 0..n {
        let ri = select2(&r, i);
        let xi = x.pair(i);
        let g = ri.dot(&xi);
        gamma[i] = g;
        res_sq += (ri - g * xi).norm_squared();
    }
    (gamma, res_sq.sqrt())
}

/// Tangent basis `Z ∈ ℝ^{2N×N}`: column i is `eᵢ ⊗ vᵢ` with
/// `vᵢ = [−x_{2i+1}, x_{2i}]ᵀ` (zero-based). Satisfies `ZᵀZ = I` and
/// `J(x) Z = 0` for the constraint Jacobian `J`.
pub fn tangent_basis(x: &UnitModulusPoint) -> DMatrix<f64> {
    let n = x.n_pairs();
    let xv = x.as_vector();
    let mut z = DMatrix::<f64>::zeros(2 * n, n);
    for i in 0..n {
        z[(2 * i, i)] = -xv[2 * i + 1];
        z[(2 * i + 1, i)] = xv[2 * i];
    }
    z
}

/// Constraint Jacobian at `x`: row i is `eᵢᵀ ⊗ Sᵢ(x)ᵀ` (up to the factor 2
/// of the squared-norm constraints, which does not affect its null space).
pub fn constraint_jacobian(x: &UnitModulusPoint) -> DMatrix<f64> {
    let n = x.n_pairs();
    let xv = x.as_vector();
    let mut j = DMatrix::<f64>::zeros(n, 2 * n);
    for i in 0..n {
        j[(i, 2 * i)] = xv[2 * i];
        j[(i, 2 * i + 1)] = xv[2 * i + 1];
    }
    j
}

/// Reduced Riemannian Hessian `H = ZᵀAᵀAZ − diag(γ)`.
pub fn reduced_hessian(p: &RealProblem, x: &UnitModulusPoint, gamma: &DVector<f64>) -> DMatrix<f64> {
    assert_eq!(
        gamma.len(),
        x.n_pairs(),
        "reduced_hessian: gamma has {} entries, point has {} pairs",
        gamma.len(),
        x.n_pairs()
    );
    assert_eq!(x.dim(), p.dim(), "reduced_hessian: dimension mismatch");
    let z = tangent_basis(x);
    let az = p.a() * &z;
    let mut h = az.transpose() * az;
    for i in 0..gamma.len() {
        h[(i, i)] -= gamma[i];
    }
    // kill any roundoff asymmetry so symmetric eigensolvers are exact
    let ht = h.transpose();
    h = (h + ht) * 0.5;
    h
}

/// Convergence matrix `M_η = I − η (I − η diag(γ))⁻¹ H`.
pub fn convergence_matrix(h: &DMatrix<f64>, gamma: &DVector<f64>, eta: f64) -> Result<DMatrix<f64>> {
    let n = gamma.len();
    assert_eq!(h.nrows(), n, "convergence_matrix: H is {}x{}, gamma has {n} entries", h.nrows(), h.ncols());
    assert!(h.is_square(), "convergence_matrix: H must be square");
    let mut m = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        let scale = 1.0 - eta * gamma[i];
        if scale.abs() <= C2_TOL {
            return Err(Error::SingularScaling { index: i, tol: C2_TOL });
        }
        let d = eta / scale;
        for j in 0..n {
            m[(i, j)] -= d * h[(i, j)];
        }
    }
    Ok(m)
}

/// Spectral radius `max |λᵢ(M)|` via the real Schur form (Hessenberg
/// reduction and shifted QR).
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    assert!(m.is_square(), "spectral_radius: matrix must be square");
    if m.nrows() == 0 {
        return Err(Error::InvalidInput("spectral_radius of an empty matrix".into()));
    }
    if !m.iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidInput("spectral_radius of a non-finite matrix".into()));
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::IterationLimit("Schur decomposition"))?;
    let eigs = schur.complex_eigenvalues();
    Ok(eigs.iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// Spectral radius of `M_η` through the symmetric similarity
/// `D^{1/2} (I − η D^{1/2} H D^{1/2}) D^{-1/2}`; valid whenever all
/// `1 − η γᵢ > 0`.
pub fn spectral_radius_via_similarity(
    h: &DMatrix<f64>,
    gamma: &DVector<f64>,
    eta: f64,
) -> Result<f64> {
    let n = gamma.len();
    let mut d_sqrt = DVector::<f64>::zeros(n);
    for i in 0..n {
        let scale = 1.0 - eta * gamma[i];
        if scale <= 0.0 {
            return Err(Error::ConditionFailed("1 - eta*gamma_i > 0"));
        }
        d_sqrt[i] = (1.0 / scale).sqrt();
    }
    let mut s = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] -= eta * d_sqrt[i] * h[(i, j)] * d_sqrt[j];
        }
    }
    let st = s.transpose();
    let sym = (s + st) * 0.5;
    let eig = nalgebra::linalg::SymmetricEigen::try_new(sym, f64::EPSILON, 100_000)
        .ok_or(Error::IterationLimit("symmetric eigendecomposition"))?;
    Ok(eig.eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs())))
}

/// `ρ(M_η)` from `(H, γ, η)`; takes the symmetric similarity path when the
/// scaling is positive, otherwise the general Schur path.
pub fn rho_m_eta(h: &DMatrix<f64>, gamma: &DVector<f64>, eta: f64) -> Result<f64> {
    for i in 0..gamma.len() {
        if (1.0 - eta * gamma[i]).abs() <= C2_TOL {
            return Err(Error::SingularScaling { index: i, tol: C2_TOL });
        }
    }
    if gamma.iter().all(|g| 1.0 - eta * g > 0.0) {
        spectral_radius_via_similarity(h, gamma, eta)
    } else {
        spectral_radius(&convergence_matrix(h, gamma, eta)?)
    }
}

fn sym_eigen_range(h: &DMatrix<f64>) -> Result<(f64, f64)> {
    let eig = nalgebra::linalg::SymmetricEigen::try_new(h.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::IterationLimit("symmetric eigendecomposition"))?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for l in eig.eigenvalues.iter() {
        lo = lo.min(*l);
        hi = hi.max(*l);
    }
    Ok((lo, hi))
}

/// Smallest and largest eigenvalues of the (symmetric) reduced Hessian.
pub fn hessian_eigen_range(h: &DMatrix<f64>) -> Result<(f64, f64)> {
    sym_eigen_range(h)
}

/// Full condition/constant report at `(x*, η)`.
///
/// `x*` must be stationary: the first-order residual has to stay below
/// `1e-8 (1 + ‖Aᵀb‖)`.
pub fn rate_report(p: &RealProblem, x_star: &UnitModulusPoint, eta: f64) -> Result<RateReport> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidInput(format!("eta must be positive and finite, got {eta}")));
    }
    let sa = StationaryAnalysis::at(p, x_star);
    let threshold = 1e-8 * (1.0 + (p.a_t() * p.b()).norm());
    if sa.stationarity_residual > threshold {
        return Err(Error::NotStationary {
            residual: sa.stationarity_residual,
            threshold,
        });
    }
    rate_report_from_analysis(p, &sa, eta)
}

/// Same as [`rate_report`] but reuses an existing [`StationaryAnalysis`]
/// (no stationarity re-check).
pub fn rate_report_from_analysis(
    p: &RealProblem,
    sa: &StationaryAnalysis,
    eta: f64,
) -> Result<RateReport> {
    let (lambda_min, lambda_max) = sym_eigen_range(&sa.h)?;
    let c1_ok = lambda_min > 0.0;
    let c2_ok = sa.gamma.iter().all(|g| (1.0 - eta * g).abs() > C2_TOL);

    let (m_eta, rho) = if c2_ok {
        let m = convergence_matrix(&sa.h, &sa.gamma, eta)?;
        let r = rho_m_eta(&sa.h, &sa.gamma, eta)?;
        (Some(m), Some(r))
    } else {
        (None, None)
    };
    let c3_ok = rho.map(|r| r < 1.0).unwrap_or(false);

    let gamma_max = sa.gamma.max();
    let c3prime_ok = eta * (lambda_max + 2.0 * gamma_max) < 2.0;

    let tie = nalgebra::Vector2::new(1.0, 0.0);
    let fixed_point_ok = (0..sa.gamma.len()).all(|i| {
        let pair = sa.x_star.pair(i);
        if pair == tie {
            sa.gamma[i] <= 1.0 / eta
        } else {
            sa.gamma[i] < 1.0 / eta
        }
    });

    let (c0, c1_radius) = if c1_ok && c2_ok && c3_ok {
        let roc = roc_constants(p, &sa.gamma, &sa.h, eta)?;
        (Some(roc.c0), Some(roc.c1))
    } else {
        (None, None)
    };

    Ok(RateReport {
        eta,
        m_eta,
        rho,
        c1_ok,
        c2_ok,
        c3_ok,
        c3prime_ok,
        fixed_point_ok,
        c0,
        c1_radius,
    })
}

/// Region-of-convergence constants.
#[derive(Debug, Clone, Copy)]
pub struct RocConstants {
    /// Radius around `x*` from which PGD converges.
    pub c0: f64,
    /// `ρ(M_η) c₀`: radius on which the explicit linear error bound holds.
    pub c1: f64,
    /// `‖((I − η diag(γ))⁻¹ ⊗ I₂)(I − η AᵀA)‖₂`.
    pub c_eta: f64,
}

/// Evaluates `c_η`, `c₀ = (1 − ρ)/(2 c_η (c_η + 1)) · (1 − η γ̄)/(1 − η γ̲)`
/// and `c₁ = ρ c₀`. Requires (C1)-(C3).
pub fn roc_constants(
    p: &RealProblem,
    gamma: &DVector<f64>,
    h: &DMatrix<f64>,
    eta: f64,
) -> Result<RocConstants> {
    let (lambda_min, _) = sym_eigen_range(h)?;
    if lambda_min <= 0.0 {
        return Err(Error::ConditionFailed("C1: H positive definite"));
    }
    let rho = rho_m_eta(h, gamma, eta)?;
    if rho >= 1.0 {
        return Err(Error::ConditionFailed("C3: rho(M_eta) < 1"));
    }

    // K = (D_eta ⊗ I₂)(I − η AᵀA): scale row pair i of (I − η AᵀA) by
    // 1/(1 − η γᵢ).
    let dim = p.dim();
    let mut k = DMatrix::<f64>::identity(dim, dim) - eta * (p.a_t() * p.a());
    for i in 0..gamma.len() {
        let d = 1.0 / (1.0 - eta * gamma[i]);
        for col in 0..dim {
            k[(2 * i, col)] *= d;
            k[(2 * i + 1, col)] *= d;
        }
    }
    let c_eta = spectral_norm(&k)?;

    let gamma_max = gamma.max();
    let gamma_min = gamma.min();
    let c0 = (1.0 - rho) / (2.0 * c_eta * (c_eta + 1.0)) * (1.0 - eta * gamma_max)
        / (1.0 - eta * gamma_min);
    Ok(RocConstants {
        c0,
        c1: rho * c0,
        c_eta,
    })
}

/// Supremum of step sizes with `ρ(M_η) < 1` (and nonsingular scaling) on
/// `(0, η)`, found by bracketing the first crossing of `ρ(M_η) = 1` and
/// bisecting. Returns infinity when the rate stays below 1 for every tested
/// step up to a large cap, which happens exactly when `λ₁(H) + 2 γ̄ ≤ 0`.
pub fn eta_max(h: &DMatrix<f64>, gamma: &DVector<f64>) -> Result<f64> {
    let (lambda_min, lambda_max) = sym_eigen_range(h)?;
    if lambda_min <= 0.0 {
        return Err(Error::ConditionFailed("C1: H positive definite"));
    }
    let gamma_max = gamma.max();

    // Guaranteed-convergent floor from the sufficient condition
    // eta (lambda_1 + 2 gamma_max) < 2.
    let safe = if lambda_max + 2.0 * gamma_max > 0.0 {
        2.0 / (lambda_max + 2.0 * gamma_max)
    } else {
        1.0 / lambda_max
    };

    // First positive-gamma singularity: rho blows up before it, so the
    // crossing (if any) lies below.
    let pole = gamma
        .iter()
        .filter(|g| **g > 0.0)
        .map(|g| 1.0 / g)
        .fold(f64::INFINITY, f64::min);
    let cap = (1e6 / lambda_max).min(pole * (1.0 - 1e-9));

    let diverged = |eta: f64| -> Result<bool> {
        match rho_m_eta(h, gamma, eta) {
            Ok(r) => Ok(r >= 1.0),
            // Landing on a singular scaling means the admissible interval
            // has already ended.
            Err(Error::SingularScaling { .. }) => Ok(true),
            Err(e) => Err(e),
        }
    };

    // March multiplicatively from the safe floor until rho crosses 1.
    let mut lo = safe * 0.999_999;
    if lo >= cap {
        lo = cap * 0.5;
    }
    if diverged(lo)? {
        // Roundoff right at the sufficient-condition boundary; back off.
        lo = safe * 1e-6;
        if diverged(lo)? {
            return Err(Error::ConditionFailed("rho(M_eta) < 1 near eta = 0"));
        }
    }
    let mut bracket_hi = None;
    let mut probe = lo;
    while probe < cap {
        probe = (probe * 1.05).min(cap);
        if diverged(probe)? {
            bracket_hi = Some(probe);
            break;
        }
        lo = probe;
    }
    match bracket_hi {
        Some(hi) => bisect_eta(lo, hi, &diverged),
        None if pole.is_finite() => {
            // rho tends to infinity at the pole; bracket against it if the
            // march stopped short, otherwise the admissible interval runs
            // right up to the pole.
            let near_pole = pole * (1.0 - 1e-12);
            if near_pole > lo && diverged(near_pole)? {
                bisect_eta(lo, near_pole, &diverged)
            } else {
                Ok(pole)
            }
        }
        None => Ok(f64::INFINITY),
    }
}

fn bisect_eta(mut lo: f64, mut hi: f64, diverged: &dyn Fn(f64) -> Result<bool>) -> Result<f64> {
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if diverged(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimizes `ρ(M_η)` over `(0, η_max)` (capped at `10/λ₁(H)` when `η_max`
/// is infinite): dense 1000-point grid, then golden-section refinement of
/// the best bracket. Returns `(η*, ρ(M_{η*}))`.
pub fn optimal_step(h: &DMatrix<f64>, gamma: &DVector<f64>) -> Result<(f64, f64)> {
    let (lambda_min, lambda_max) = sym_eigen_range(h)?;
    if lambda_min <= 0.0 {
        return Err(Error::ConditionFailed("C1: H positive definite"));
    }
    let e_max = eta_max(h, gamma)?;
    let domain_hi = if e_max.is_finite() {
        e_max
    } else {
        10.0 / lambda_max
    };

    let rho_at = |eta: f64| -> f64 { rho_m_eta(h, gamma, eta).unwrap_or(f64::INFINITY) };

    const GRID: usize = 1000;
    let mut best_j = 1usize;
    let mut best_rho = f64::INFINITY;
    for j in 1..=GRID {
        let eta = domain_hi * j as f64 / (GRID + 1) as f64;
        let r = rho_at(eta);
        if r < best_rho {
            best_rho = r;
            best_j = j;
        }
    }
    let mut best_eta = domain_hi * best_j as f64 / (GRID + 1) as f64;

    // Golden-section refinement inside the bracketing grid cells.
    let mut a = domain_hi * best_j.saturating_sub(1) as f64 / (GRID + 1) as f64;
    if a <= 0.0 {
        a = best_eta * 0.5;
    }
    let mut b = domain_hi * (best_j + 1) as f64 / (GRID + 1) as f64;
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = rho_at(c);
    let mut fd = rho_at(d);
    while b - a > 1e-9 * domain_hi.max(1.0) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = rho_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = rho_at(d);
        }
    }
    let refined = 0.5 * (a + b);
    let refined_rho = rho_at(refined);
    if refined_rho < best_rho {
        best_eta = refined;
        best_rho = refined_rho;
    }
    Ok((best_eta, best_rho))
}

/// Right-hand side of the linear error bound
/// `(1 − ‖δ⁰‖/c₁)⁻¹ ((1 − η γ̲)/(1 − η γ̄))^{1/2} ‖δ⁰‖ ρᵏ`,
/// valid for `‖δ⁰‖ < c₁ = ρ c₀`.
pub fn linear_error_bound(
    norm_delta0: f64,
    rho: f64,
    c0: f64,
    gamma_max: f64,
    gamma_min: f64,
    eta: f64,
    k: usize,
) -> Result<f64> {
    let c1 = rho * c0;
    if !(norm_delta0 < c1) {
        return Err(Error::OutsideRegion { norm_delta0, c1 });
    }
    let prefactor = 1.0 / (1.0 - norm_delta0 / c1);
    let gamma_factor = ((1.0 - eta * gamma_min) / (1.0 - eta * gamma_max)).sqrt();
    Ok(prefactor * gamma_factor * norm_delta0 * rho.powi(k as i32))
}

/// Sublinear bound `sqrt(2η (f₀ − f*) / ((1 − η‖A‖₂²) k))` on the smallest
/// consecutive-iterate distance over the first `k` steps of fixed-step PGD
/// with `0 < η < 1/‖A‖₂²`. Any upper estimate of the limit objective may
/// stand in for `f*`; `k = 0` returns infinity (empty prefix).
pub fn sublinear_bound(
    f0: f64,
    f_star_upper: f64,
    eta: f64,
    spec_norm_a: f64,
    k: usize,
) -> Result<f64> {
    let limit = 1.0 / (spec_norm_a * spec_norm_a);
    if !(eta > 0.0 && eta < limit) {
        return Err(Error::StepOutOfRange { eta, limit });
    }
    if k == 0 {
        return Ok(f64::INFINITY);
    }
    Ok((2.0 * eta * (f0 - f_star_upper) / ((1.0 - eta * spec_norm_a * spec_norm_a) * k as f64))
        .sqrt())
}

/// The scalar sequence `a_{k+1} = ρ a_k + q a_k²`, length `len + 1`
/// including `a₀`.
pub fn scalar_recursion(a0: f64, rho: f64, q: f64, len: usize) -> Vec<f64> {
    let mut seq = Vec::with_capacity(len + 1);
    let mut a = a0;
    seq.push(a);
    for _ in 0..len {
        a = rho * a + q * a * a;
        seq.push(a);
    }
    seq
}

/// Closed-form bound `(1 − a₀ q / (ρ(1 − ρ)))⁻¹ a₀ ρᵏ` on the scalar
/// recursion, valid for `a₀ < ρ(1 − ρ)/q`.
pub fn scalar_recursion_bound(a0: f64, rho: f64, q: f64, k: usize) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidInput(format!("rho must lie in (0,1), got {rho}")));
    }
    if q < 0.0 {
        return Err(Error::InvalidInput(format!("q must be nonnegative, got {q}")));
    }
    let region = rho * (1.0 - rho) / q;
    if !(a0 < region) {
        return Err(Error::OutsideRegion {
            norm_delta0: a0,
            c1: region,
        });
    }
    Ok(1.0 / (1.0 - a0 * q / (rho * (1.0 - rho))) * a0 * rho.powi(k as i32))
}
