//! Orthogonal projection onto the unit-modulus set and its first-order
//! Taylor structure.
//!
//! The projection acts pairwise: each coordinate pair is normalized onto the
//! unit circle, with the fixed tie-break `s = [1, 0]ᵀ` for an exactly zero
//! pair. About any point `x` on the set,
//! `P(x + δ) = x + ZZᵀδ + q(δ)` with `‖q(δ)‖ ≤ 2‖δ‖²`, where `ZZᵀ` is the
//! orthogonal projector onto the tangent space at `x`.

use nalgebra::DVector;

use crate::problem::UnitModulusPoint;

/// Remainder `q(δ) = P(x + δ) − x − ZZᵀδ` of the first-order expansion of
/// the projection, together with `‖δ‖`. Satisfies `‖q‖ ≤ 2‖δ‖²`.
#[derive(Debug, Clone)]
pub struct TaylorResidual {
    pub q: DVector<f64>,
    pub delta_norm: f64,
}

/// Projects each coordinate pair of `x` onto the unit circle.
///
/// A pair that is exactly `(0, 0)` maps to `[1, 0]ᵀ`. The zero test is exact
/// (no tolerance): near-zero pairs are normalized normally, and the
/// tie-break choice does not affect the local convergence behavior.
pub fn project(x: &DVector<f64>) -> UnitModulusPoint {
    assert!(
        !x.is_empty() && x.len() % 2 == 0,
        "project needs an even-length vector, got {}",
        x.len()
    );
    let mut out = DVector::<f64>::zeros(x.len());
    for i in 0..x.len() / 2 {
        let (a, b) = (x[2 * i], x[2 * i + 1]);
        if a == 0.0 && b == 0.0 {
            out[2 * i] = 1.0;
            out[2 * i + 1] = 0.0;
        } else {
            let norm = a.hypot(b);
            out[2 * i] = a / norm;
            out[2 * i + 1] = b / norm;
        }
    }
    UnitModulusPoint::new_unchecked(out)
}

/// Applies the tangent-space projector `ZZᵀ` at `x` to `delta`, computed
/// pairwise as `vᵢ vᵢᵀ Sᵢ(δ)` with `vᵢ = [−x_{2i+1}, x_{2i}]ᵀ` (zero-based).
pub fn tangent_linearization(x: &UnitModulusPoint, delta: &DVector<f64>) -> DVector<f64> {
    let xv = x.as_vector();
    assert_eq!(
        delta.len(),
        xv.len(),
        "tangent_linearization: delta has length {}, point has {}",
        delta.len(),
        xv.len()
    );
    let mut out = DVector::<f64>::zeros(xv.len());
    for i in 0..x.n_pairs() {
        let (vx, vy) = (-xv[2 * i + 1], xv[2 * i]);
        let coeff = vx * delta[2 * i] + vy * delta[2 * i + 1];
        out[2 * i] = coeff * vx;
        out[2 * i + 1] = coeff * vy;
    }
    out
}

/// Evaluates `q(δ) = P(x + δ) − x − ZZᵀδ`.
pub fn taylor_residual(x: &UnitModulusPoint, delta: &DVector<f64>) -> TaylorResidual {
    let projected = project(&(x.as_vector() + delta));
    let q = projected.as_vector() - x.as_vector() - tangent_linearization(x, delta);
    TaylorResidual {
        q,
        delta_norm: delta.norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn point(coords: &[f64]) -> UnitModulusPoint {
        UnitModulusPoint::new(DVector::from_column_slice(coords)).unwrap()
    }

    #[test]
    fn project_normalizes() {
        let p = project(&DVector::from_column_slice(&[3.0, 4.0]));
        assert_relative_eq!(p.as_vector()[0], 0.6, max_relative = 1e-15);
        assert_relative_eq!(p.as_vector()[1], 0.8, max_relative = 1e-15);
    }

    #[test]
    fn project_zero_pair_tie_break() {
        let p = project(&DVector::from_column_slice(&[0.0, 0.0]));
        assert_eq!(p.as_vector(), &DVector::from_column_slice(&[1.0, 0.0]));

        let mixed = project(&DVector::from_column_slice(&[0.6, 0.8, 0.0, 0.0]));
        assert_eq!(
            mixed.as_vector(),
            &DVector::from_column_slice(&[0.6, 0.8, 1.0, 0.0])
        );
    }

    #[test]
    fn project_near_zero_pair_is_normalized_not_tie_broken() {
        let p = project(&DVector::from_column_slice(&[1e-300, 0.0]));
        assert_eq!(p.as_vector(), &DVector::from_column_slice(&[1.0, 0.0]));
        let q = project(&DVector::from_column_slice(&[0.0, -1e-300]));
        assert_eq!(q.as_vector(), &DVector::from_column_slice(&[0.0, -1.0]));
    }

    #[test]
    fn tangent_annihilates_radial_and_keeps_tangential() {
        let x = point(&[1.0, 0.0]);
        let radial = tangent_linearization(&x, &DVector::from_column_slice(&[1e-3, 0.0]));
        assert_eq!(radial, DVector::from_column_slice(&[0.0, 0.0]));

        let t = 0.37;
        let tangential = tangent_linearization(&x, &DVector::from_column_slice(&[0.0, t]));
        assert_relative_eq!(tangential[0], 0.0, epsilon = 1e-16);
        assert_relative_eq!(tangential[1], t, max_relative = 1e-15);
    }

    #[test]
    fn taylor_residual_zero_delta() {
        let x = point(&[0.6, 0.8, 1.0, 0.0]);
        let r = taylor_residual(&x, &DVector::zeros(4));
        assert!(r.q.norm() < 1e-15);
        assert_eq!(r.delta_norm, 0.0);
    }

    #[test]
    fn taylor_residual_radial_delta_is_exact() {
        // Moving along the radius leaves the projection at x, and the
        // tangent projector kills the displacement, so q = 0 exactly.
        let x = point(&[1.0, 0.0]);
        for eps in [-0.5, 1e-8, 0.25, 3.0] {
            let r = taylor_residual(&x, &DVector::from_column_slice(&[eps, 0.0]));
            assert!(r.q.norm() < 1e-15, "eps={eps}: |q|={}", r.q.norm());
        }
    }
}
