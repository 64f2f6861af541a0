//! Iterative solvers: fixed-step projected gradient descent, backtracking
//! PGD, and Nesterov-accelerated PGD with adaptive restart.
//!
//! All three produce a [`SolverTrace`] with one record per iterate. Every
//! recorded iterate lies on the unit-modulus set; a non-finite update or a
//! runaway backtracking loop terminates the run with
//! [`Termination::NumericalFailure`] instead of recording garbage.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::problem::{residual_gradient, RealProblem, UnitModulusPoint};
use crate::projection::project;

/// Shrink attempts allowed within a single backtracking line search.
const MAX_BACKTRACK_SHRINKS: usize = 200;

/// Solver parameters shared by all three algorithms.
///
/// `step` is only read by [`pgd_run`]; the adaptive solvers start from
/// `η₀ = 1` and manage the step size themselves via `alpha` (growth divisor,
/// in (0,1]) and `beta` (shrink factor, in (0,1)).
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub step: f64,
    pub alpha: f64,
    pub beta: f64,
    pub max_iters: usize,
    /// Stop when the generalized-gradient norm at the accepted step size
    /// drops to this value. Zero (the default) disables the check so traces
    /// have a fixed length.
    pub stop_tol: f64,
    /// Reference point for the `err` column of the trace, typically a known
    /// stationary point.
    pub reference_point: Option<UnitModulusPoint>,
}

impl SolverConfig {
    /// Fixed-step PGD configuration.
    pub fn fixed_step(step: f64, max_iters: usize) -> Self {
        Self {
            step,
            alpha: 1.0,
            beta: 0.5,
            max_iters,
            stop_tol: 0.0,
            reference_point: None,
        }
    }

    /// Backtracking / accelerated configuration.
    pub fn backtracking(alpha: f64, beta: f64, max_iters: usize) -> Self {
        Self {
            step: 0.0,
            alpha,
            beta,
            max_iters,
            stop_tol: 0.0,
            reference_point: None,
        }
    }

    pub fn with_reference(mut self, x: UnitModulusPoint) -> Self {
        self.reference_point = Some(x);
        self
    }

    pub fn with_stop_tol(mut self, tol: f64) -> Self {
        self.stop_tol = tol;
        self
    }

    fn check_adaptive(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        self.check_common()
    }

    fn check_fixed(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "fixed step size must be positive and finite, got {}",
                self.step
            )));
        }
        self.check_common()
    }

    fn check_common(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "stop_tol must be nonnegative, got {}",
                self.stop_tol
            )));
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxIters,
    Tolerance,
    NumericalFailure,
}

/// Per-iterate record. For records with a successor, `eta` and
/// `gen_grad_norm` describe the accepted step leaving this iterate; the
/// final record evaluates the generalized gradient afresh at the step size
/// the solver would try next.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub k: usize,
    pub x: UnitModulusPoint,
    pub f: f64,
    pub eta: f64,
    pub gen_grad_norm: f64,
    pub err_to_ref: Option<f64>,
    pub restarted: bool,
    /// Cumulative count of A·v and Aᵀ·v applications up to and including
    /// this iteration.
    pub mv_products: u64,
}

#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_point(&self) -> &UnitModulusPoint {
        &self.records.last().expect("trace has at least one record").x
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().expect("trace has at least one record").f
    }

    /// `err` column as a vector; panics if the run had no reference point.
    pub fn errors(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.err_to_ref.expect("trace has no reference point"))
            .collect()
    }

    /// Distances `‖x^{(k+1)} − x^{(k)}‖` between consecutive iterates.
    pub fn step_distances(&self) -> Vec<f64> {
        self.records
            .windows(2)
            .map(|w| (w[1].x.as_vector() - w[0].x.as_vector()).norm())
            .collect()
    }

    /// Smallest iteration index whose `err` column is at or below `tol`,
    /// if the trace ever gets there.
    pub fn iterations_to_error(&self, tol: f64) -> Option<usize> {
        self.records
            .iter()
            .position(|r| r.err_to_ref.map(|e| e <= tol).unwrap_or(false))
    }
}

/// Nesterov momentum state: `theta` drives the extrapolation weight, `y` is
/// the extrapolated point the gradient is evaluated at.
#[derive(Debug, Clone)]
pub struct MomentumState {
    pub theta: f64,
    pub y: DVector<f64>,
}

/// One fixed-step PGD update `P(x − η Aᵀ(Ax − b))`.
pub fn pgd_step(p: &RealProblem, x: &UnitModulusPoint, eta: f64) -> UnitModulusPoint {
    let (_, g) = residual_gradient(p, x.as_vector());
    project(&(x.as_vector() - eta * g))
}

/// Generalized gradient `g̃_η(x) = (x − P(x − η∇f(x)))/η`; vanishes exactly
/// at fixed points of the PGD update.
pub fn generalized_gradient(p: &RealProblem, x: &UnitModulusPoint, eta: f64) -> DVector<f64> {
    assert!(eta > 0.0, "generalized gradient needs eta > 0, got {eta}");
    (x.as_vector() - pgd_step(p, x, eta).as_vector()) / eta
}

fn err_to(reference: &Option<UnitModulusPoint>, x: &UnitModulusPoint) -> Option<f64> {
    reference
        .as_ref()
        .map(|r| (x.as_vector() - r.as_vector()).norm())
}

fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Fixed-step projected gradient descent.
pub fn pgd_run(p: &RealProblem, x0: &UnitModulusPoint, cfg: &SolverConfig) -> Result<SolverTrace> {
    cfg.check_fixed()?;
    if x0.dim() != p.dim() {
        return Err(Error::Dimension(format!(
            "x0 has dimension {}, problem has {}",
            x0.dim(),
            p.dim()
        )));
    }
    let eta = cfg.step;
    let mut x = x0.clone();
    let mut records: Vec<TraceRecord> = Vec::with_capacity(cfg.max_iters + 1);
    let mut mv: u64 = 0;

    for k in 0..cfg.max_iters {
        let (r, g) = residual_gradient(p, x.as_vector());
        mv += 2;
        let f = 0.5 * r.norm_squared();
        let z = x.as_vector() - eta * &g;
        if !all_finite(&z) {
            records.push(TraceRecord {
                k,
                x: x.clone(),
                f,
                eta,
                gen_grad_norm: f64::NAN,
                err_to_ref: err_to(&cfg.reference_point, &x),
                restarted: false,
                mv_products: mv,
            });
            return Ok(SolverTrace {
                records,
                termination: Termination::NumericalFailure,
            });
        }
        let x_next = project(&z);
        let gg_norm = (x.as_vector() - x_next.as_vector()).norm() / eta;
        records.push(TraceRecord {
            k,
            x: x.clone(),
            f,
            eta,
            gen_grad_norm: gg_norm,
            err_to_ref: err_to(&cfg.reference_point, &x),
            restarted: false,
            mv_products: mv,
        });
        x = x_next;
        if cfg.stop_tol > 0.0 && gg_norm <= cfg.stop_tol {
            push_final_record(p, &mut records, &mut mv, &x, k + 1, eta, &cfg.reference_point);
            return Ok(SolverTrace {
                records,
                termination: Termination::Tolerance,
            });
        }
    }
    push_final_record(
        p,
        &mut records,
        &mut mv,
        &x,
        cfg.max_iters,
        eta,
        &cfg.reference_point,
    );
    Ok(SolverTrace {
        records,
        termination: Termination::MaxIters,
    })
}

fn push_final_record(
    p: &RealProblem,
    records: &mut Vec<TraceRecord>,
    mv: &mut u64,
    x: &UnitModulusPoint,
    k: usize,
    eta: f64,
    reference: &Option<UnitModulusPoint>,
) {
    let (r, g) = residual_gradient(p, x.as_vector());
    *mv += 2;
    let f = 0.5 * r.norm_squared();
    let gg_norm = (x.as_vector() - project(&(x.as_vector() - eta * g)).as_vector()).norm() / eta;
    records.push(TraceRecord {
        k,
        x: x.clone(),
        f,
        eta,
        gen_grad_norm: gg_norm,
        err_to_ref: err_to(reference, x),
        restarted: false,
        mv_products: *mv,
    });
}

/// Backtracking PGD: per iteration, shrink `η` by `beta` until the accepted
/// step satisfies `g̃ᵀAᵀA g̃ ≤ (1/η)‖g̃‖²`, take `x ← x − η g̃`, then grow
/// `η ← η/alpha`.
pub fn backtracking_pgd_run(
    p: &RealProblem,
    x0: &UnitModulusPoint,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    adaptive_run(p, x0, cfg, AdaptiveMode::Backtracking)
}

/// Nesterov-accelerated PGD with the same backtracking condition, momentum
/// extrapolation, and a generalized-gradient restart test. On restart the
/// momentum is zeroed for the next extrapolation and `θ` resets to 1.
pub fn arnapgd_run(
    p: &RealProblem,
    x0: &UnitModulusPoint,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    adaptive_run(
        p,
        x0,
        cfg,
        AdaptiveMode::Accelerated {
            restarts_enabled: true,
        },
    )
}

/// Accelerated run with the restart test switched off; with
/// `AdaptiveMode::Backtracking` the momentum is structurally zero, which is
/// how the two adaptive solvers are kept bit-identical when momentum is
/// disabled.
pub fn arnapgd_run_no_restart(
    p: &RealProblem,
    x0: &UnitModulusPoint,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    adaptive_run(
        p,
        x0,
        cfg,
        AdaptiveMode::Accelerated {
            restarts_enabled: false,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptiveMode {
    /// Plain backtracking PGD (no momentum, no restarts).
    Backtracking,
    /// Nesterov momentum; the restart test can be toggled.
    Accelerated { restarts_enabled: bool },
}

/// Adaptive-step core shared by Bt-PGD and ARNAPGD. A run with momentum
/// disabled and one with `AdaptiveMode::Backtracking` execute the same
/// instruction sequence, so their traces agree bit for bit.
pub fn adaptive_run(
    p: &RealProblem,
    x0: &UnitModulusPoint,
    cfg: &SolverConfig,
    mode: AdaptiveMode,
) -> Result<SolverTrace> {
    cfg.check_adaptive()?;
    if x0.dim() != p.dim() {
        return Err(Error::Dimension(format!(
            "x0 has dimension {}, problem has {}",
            x0.dim(),
            p.dim()
        )));
    }
    let momentum = matches!(mode, AdaptiveMode::Accelerated { .. });
    let restarts = matches!(
        mode,
        AdaptiveMode::Accelerated {
            restarts_enabled: true
        }
    );

    let mut x = x0.clone();
    let mut state = MomentumState {
        theta: 1.0,
        y: x0.as_vector().clone(),
    };
    // Residual Ax^{(k)} − b, maintained by linearity so per-iterate
    // objectives cost no extra matrix-vector products.
    let mut rx: Option<DVector<f64>> = None;
    let mut eta = 1.0f64;
    let mut mv: u64 = 0;
    let mut records: Vec<TraceRecord> = Vec::with_capacity(cfg.max_iters + 1);

    for k in 0..cfg.max_iters {
        let (ry, gy) = residual_gradient(p, &state.y);
        mv += 2;
        let f_x = match &rx {
            Some(r) => 0.5 * r.norm_squared(),
            None => 0.5 * ry.norm_squared(), // k = 0: y = x0
        };

        // Backtracking line search. The incoming eta is the first trial
        // value (the η/β growth and the first β-shrink of the loop cancel).
        let mut shrinks = 0usize;
        let accepted = loop {
            let z = &state.y - eta * &gy;
            if !all_finite(&z) {
                break None;
            }
            let pz = project(&z);
            let gt = (&state.y - pz.as_vector()) / eta;
            let agt = p.a() * &gt;
            mv += 1;
            if agt.norm_squared() <= gt.norm_squared() / eta {
                break Some((pz, gt, agt));
            }
            if shrinks == MAX_BACKTRACK_SHRINKS {
                break None;
            }
            shrinks += 1;
            eta *= cfg.beta;
        };
        let Some((x_next, gt, agt)) = accepted else {
            records.push(TraceRecord {
                k,
                x: x.clone(),
                f: f_x,
                eta,
                gen_grad_norm: f64::NAN,
                err_to_ref: err_to(&cfg.reference_point, &x),
                restarted: false,
                mv_products: mv,
            });
            return Ok(SolverTrace {
                records,
                termination: Termination::NumericalFailure,
            });
        };
        let accepted_eta = eta;
        let gg_norm = gt.norm();

        // A x^{(k+1)} − b = (Ay − b) − η A g̃, exact by linearity.
        let rx_next = &ry - accepted_eta * &agt;

        // Momentum bookkeeping (Nesterov scheme). With momentum off the
        // extrapolated point is simply the new iterate.
        let mut restarted = false;
        let next_state = if momentum {
            let theta = state.theta;
            let theta_next = 2.0 * theta / (theta + (theta * theta + 4.0).sqrt());
            let beta_next = theta * (1.0 - theta) / (theta * theta + theta_next);
            let step_diff = x_next.as_vector() - x.as_vector();
            if restarts && gt.dot(&step_diff) > 0.0 {
                restarted = true;
                MomentumState {
                    theta: 1.0,
                    y: x_next.as_vector().clone(),
                }
            } else if beta_next == 0.0 {
                MomentumState {
                    theta: theta_next,
                    y: x_next.as_vector().clone(),
                }
            } else {
                MomentumState {
                    theta: theta_next,
                    y: x_next.as_vector() + beta_next * step_diff,
                }
            }
        } else {
            MomentumState {
                theta: state.theta,
                y: x_next.as_vector().clone(),
            }
        };

        records.push(TraceRecord {
            k,
            x: x.clone(),
            f: f_x,
            eta: accepted_eta,
            gen_grad_norm: gg_norm,
            err_to_ref: err_to(&cfg.reference_point, &x),
            restarted,
            mv_products: mv,
        });

        x = x_next;
        rx = Some(rx_next);
        state = next_state;
        eta = accepted_eta / cfg.alpha;

        if cfg.stop_tol > 0.0 && gg_norm <= cfg.stop_tol {
            push_final_record(p, &mut records, &mut mv, &x, k + 1, eta, &cfg.reference_point);
            return Ok(SolverTrace {
                records,
                termination: Termination::Tolerance,
            });
        }
    }
    push_final_record(
        p,
        &mut records,
        &mut mv,
        &x,
        cfg.max_iters,
        eta,
        &cfg.reference_point,
    );
    Ok(SolverTrace {
        records,
        termination: Termination::MaxIters,
    })
}
