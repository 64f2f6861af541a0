//! Deterministic test-problem construction.
//!
//! Two families: a synthetic generator that plants a stationary point with a
//! positive definite reduced Hessian (complex Gaussian data, multipliers
//! read off `Aᵀv`), and the fixed 2-D circle instance `A = diag([5, 1])`,
//! `b = [3.5, 0.2]ᵀ` whose four stationary points are enumerated by a grid
//! scan plus bisection on the circle parametrization.
//!
//! Randomness comes from a ChaCha8 stream seeded with a 64-bit integer;
//! normal variates use the ziggurat sampler. Draw order is fixed (Re Φ
//! row-major, Im Φ row-major, v, then t) so a seed pins the instance down
//! bit for bit. The instance file, not the seed, is the artifact to exchange
//! across implementations.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analysis::{lagrange_multipliers, reduced_hessian};
use crate::error::{Error, Result};
use crate::problem::{gradient, realify_problem, ComplexProblem, RealProblem, UnitModulusPoint};
use crate::projection::project;

/// Entries of the planting vector `v` below this trigger a redraw: the
/// construction divides by `γᵢ = ±‖Sᵢ(Aᵀv)‖`.
const ZERO_GAMMA_TOL: f64 = 1e-12;

/// A generated problem together with its planted stationary point.
#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub problem: RealProblem,
    pub x_star: UnitModulusPoint,
    pub gamma_planted: DVector<f64>,
    pub h: DMatrix<f64>,
    pub seed: u64,
    pub retries_used: u32,
    pub sigma_v: f64,
}

/// Generates a problem of size `(M, N)` whose stationary point `x*` with
/// multipliers `γ` is planted by construction:
/// `γᵢ = tᵢ ‖Sᵢ(Aᵀv)‖`, `Sᵢ(x*) = Sᵢ(Aᵀv)/γᵢ`, `b = A x* − v`.
/// Redraws everything until the reduced Hessian is positive definite.
pub fn generate_synthetic(
    m: usize,
    n: usize,
    seed: u64,
    sigma_v: f64,
    max_retries: u32,
) -> Result<SyntheticInstance> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput(format!(
            "instance size must be at least 1x1, got M={m}, N={n}"
        )));
    }
    if !(sigma_v > 0.0) {
        return Err(Error::InvalidInput(format!(
            "sigma_v must be positive, got {sigma_v}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;

    for attempt in 0..=max_retries {
        // Fixed draw order: Re(Phi) row-major, Im(Phi) row-major, v, t.
        let mut phi_re = DMatrix::<f64>::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                phi_re[(i, j)] = normal.sample(&mut rng);
            }
        }
        let mut phi_im = DMatrix::<f64>::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                phi_im[(i, j)] = normal.sample(&mut rng);
            }
        }
        let mut v = DVector::<f64>::zeros(2 * m);
        for i in 0..2 * m {
            let z: f64 = normal.sample(&mut rng);
            v[i] = sigma_v * z;
        }
        let mut t = DVector::<f64>::zeros(n);
        for i in 0..n {
            t[i] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }

        let cp = ComplexProblem::new(phi_re, phi_im, DVector::zeros(m), DVector::zeros(m))
            .expect("generator dimensions are consistent");
        let a = realify_problem(&cp).a().clone();

        let atv = a.transpose() * &v;
        let mut gamma = DVector::<f64>::zeros(n);
        let mut x_star = DVector::<f64>::zeros(2 * n);
        let mut degenerate = false;
        for i in 0..n {
            let norm = atv[2 * i].hypot(atv[2 * i + 1]);
            if norm < ZERO_GAMMA_TOL {
                degenerate = true;
                break;
            }
            gamma[i] = t[i] * norm;
            x_star[2 * i] = atv[2 * i] / gamma[i];
            x_star[2 * i + 1] = atv[2 * i + 1] / gamma[i];
        }
        if degenerate {
            continue;
        }

        let b = &a * &x_star - &v;
        let problem = RealProblem::new(a, b)?;
        let x_star = UnitModulusPoint::new(x_star)?;

        let (gamma_check, _) = lagrange_multipliers(&problem, &x_star);
        let h = reduced_hessian(&problem, &x_star, &gamma_check);
        let lambda_min = nalgebra::linalg::SymmetricEigen::new(h.clone())
            .eigenvalues
            .min();
        if lambda_min > 0.0 {
            return Ok(SyntheticInstance {
                problem,
                x_star,
                gamma_planted: gamma,
                h,
                seed,
                retries_used: attempt,
                sigma_v,
            });
        }
    }
    Err(Error::RetriesExhausted {
        retries: max_retries,
    })
}

/// `x⁰ = P(x* + n)` with `nᵢ ~ N(0, σ²)` i.i.d.; the projection puts the
/// perturbed point back on the set.
pub fn initial_point_near(x_star: &UnitModulusPoint, sigma: f64, seed: u64) -> UnitModulusPoint {
    assert!(sigma >= 0.0, "noise level must be nonnegative, got {sigma}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut x = x_star.as_vector().clone();
    for i in 0..x.len() {
        let z: f64 = normal.sample(&mut rng);
        x[i] += sigma * z;
    }
    project(&x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryKind {
    Minimum,
    Maximum,
}

impl StationaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StationaryKind::Minimum => "minimum",
            StationaryKind::Maximum => "maximum",
        }
    }
}

/// A stationary point of the 2-D circle instance.
#[derive(Debug, Clone)]
pub struct StationaryPoint2D {
    /// Circle parameter, `x = (cos t, sin t)`, in `[0, 2π)`.
    pub angle: f64,
    pub x: UnitModulusPoint,
    pub gamma: f64,
    pub h: f64,
    pub kind: StationaryKind,
}

/// The fixed 2-D instance with its enumerated stationary points.
#[derive(Debug, Clone)]
pub struct Instance2D {
    pub problem: RealProblem,
    pub stationary_points: Vec<StationaryPoint2D>,
}

impl Instance2D {
    pub fn minima(&self) -> Vec<&StationaryPoint2D> {
        self.stationary_points
            .iter()
            .filter(|s| s.kind == StationaryKind::Minimum)
            .collect()
    }

    pub fn maxima(&self) -> Vec<&StationaryPoint2D> {
        self.stationary_points
            .iter()
            .filter(|s| s.kind == StationaryKind::Maximum)
            .collect()
    }
}

/// Builds the circle example `A = diag([5, 1])`, `b = [3.5, 0.2]ᵀ`
/// (unconstrained minimizer `[0.7, 0.2]`) with its four stationary points.
pub fn example_2d() -> Instance2D {
    let problem = RealProblem::new(
        DMatrix::from_row_slice(2, 2, &[5.0, 0.0, 0.0, 1.0]),
        DVector::from_column_slice(&[3.5, 0.2]),
    )
    .expect("fixed 2x2 instance");
    let stationary_points =
        stationary_points_2d(&problem).expect("the fixed instance has four stationary points");
    Instance2D {
        problem,
        stationary_points,
    }
}

const ANGLE_GRID: usize = 1_000_000;
const ANGLE_TOL: f64 = 1e-12;
const DEGENERATE_H_TOL: f64 = 1e-10;

fn circle_point(t: f64) -> UnitModulusPoint {
    project(&DVector::from_column_slice(&[t.cos(), t.sin()]))
}

/// Derivative of the restricted objective `t ↦ f(cos t, sin t)`.
fn objective_angle_derivative(p: &RealProblem, t: f64) -> f64 {
    let x = DVector::from_column_slice(&[t.cos(), t.sin()]);
    let g = gradient(p, &x);
    -g[0] * t.sin() + g[1] * t.cos()
}

/// Enumerates the stationary points of a 2-D (N = 1) instance by locating
/// all sign changes of `d/dt f(cos t, sin t)` on a dense grid and refining
/// each with bisection. Exactly four roots are expected, two minima and two
/// maxima by the sign of the scalar reduced Hessian.
pub fn stationary_points_2d(p: &RealProblem) -> Result<Vec<StationaryPoint2D>> {
    if p.n() != 1 {
        return Err(Error::Dimension(format!(
            "stationary_points_2d needs N = 1, got N = {}",
            p.n()
        )));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let step = two_pi / ANGLE_GRID as f64;

    let mut roots: Vec<f64> = Vec::new();
    let mut g_prev = objective_angle_derivative(p, 0.0);
    for j in 1..=ANGLE_GRID {
        let t = if j == ANGLE_GRID { two_pi } else { j as f64 * step };
        let g = objective_angle_derivative(p, t);
        if g_prev == 0.0 {
            roots.push((j - 1) as f64 * step);
        } else if g_prev * g < 0.0 {
            let (mut a, mut b) = ((j - 1) as f64 * step, t);
            let mut ga = g_prev;
            while b - a > ANGLE_TOL {
                let mid = 0.5 * (a + b);
                let gm = objective_angle_derivative(p, mid);
                if gm == 0.0 {
                    a = mid;
                    b = mid;
                } else if ga * gm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    ga = gm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        g_prev = g;
    }

    if roots.len() != 4 {
        return Err(Error::RootCount {
            found: roots.len(),
            expected: 4,
        });
    }

    let mut points = Vec::with_capacity(roots.len());
    for t in roots {
        let x = circle_point(t);
        let (gamma, _) = lagrange_multipliers(p, &x);
        let h = reduced_hessian(p, &x, &gamma)[(0, 0)];
        if h.abs() < DEGENERATE_H_TOL {
            return Err(Error::DegenerateStationaryPoint {
                angle: t,
                h_abs: h.abs(),
            });
        }
        points.push(StationaryPoint2D {
            angle: t,
            x,
            gamma: gamma[0],
            h,
            kind: if h > 0.0 {
                StationaryKind::Minimum
            } else {
                StationaryKind::Maximum
            },
        });
    }
    Ok(points)
}
