//! Problem data for unit-modulus least squares.
//!
//! The complex model `min ½‖Φw − h‖²  s.t. |wᵢ| = 1` is reparametrized over
//! the reals as `min ½‖Ax − b‖²` with `x ∈ ℝ^{2N}` holding the interleaved
//! real/imaginary parts of `w`, and `A ∈ ℝ^{2M×2N}` built from 2×2 rotation
//! blocks. Everything downstream (projection, solvers, rate analysis) works
//! on the real form.

use nalgebra::{DMatrix, DVector, Vector2};

use crate::error::{Error, Result};

/// Default tolerance on `| ‖Sᵢ(x)‖² − 1 |` for accepting a point as a member
/// of the unit-modulus set. Pairs renormalized by the projection keep the
/// deviation around 1 ulp, so 1e-9 leaves ample slack for long solver runs.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Complex least-squares data `(Φ, h)`, stored as separate real and
/// imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexProblem {
    phi_re: DMatrix<f64>,
    phi_im: DMatrix<f64>,
    h_re: DVector<f64>,
    h_im: DVector<f64>,
}

impl ComplexProblem {
    pub fn new(
        phi_re: DMatrix<f64>,
        phi_im: DMatrix<f64>,
        h_re: DVector<f64>,
        h_im: DVector<f64>,
    ) -> Result<Self> {
        if phi_re.shape() != phi_im.shape() {
            return Err(Error::Dimension(format!(
                "Re(Phi) is {:?} but Im(Phi) is {:?}",
                phi_re.shape(),
                phi_im.shape()
            )));
        }
        if phi_re.nrows() == 0 || phi_re.ncols() == 0 {
            return Err(Error::Dimension("Phi must be at least 1x1".into()));
        }
        if h_re.len() != phi_re.nrows() || h_im.len() != phi_re.nrows() {
            return Err(Error::Dimension(format!(
                "h has {} complex entries, Phi has {} rows",
                h_re.len(),
                phi_re.nrows()
            )));
        }
        Ok(Self {
            phi_re,
            phi_im,
            h_re,
            h_im,
        })
    }

    pub fn m(&self) -> usize {
        self.phi_re.nrows()
    }

    pub fn n(&self) -> usize {
        self.phi_re.ncols()
    }

    pub fn phi_re(&self) -> &DMatrix<f64> {
        &self.phi_re
    }

    pub fn phi_im(&self) -> &DMatrix<f64> {
        &self.phi_im
    }

    pub fn h_re(&self) -> &DVector<f64> {
        &self.h_re
    }

    pub fn h_im(&self) -> &DVector<f64> {
        &self.h_im
    }
}

/// Real-valued least-squares data `(A, b)` with `A ∈ ℝ^{2M×2N}`,
/// `b ∈ ℝ^{2M}`.
///
/// When built by [`realify_problem`], each 2×2 block of `A` has the rotation
/// structure `[[re, -im], [im, re]]`; a `RealProblem` constructed directly
/// from arbitrary data (e.g. the 2-D example) need not have it.
#[derive(Debug, Clone, PartialEq)]
pub struct RealProblem {
    a: DMatrix<f64>,
    a_t: DMatrix<f64>,
    b: DVector<f64>,
    m: usize,
    n: usize,
}

impl RealProblem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let (rows, cols) = a.shape();
        if rows == 0 || cols == 0 || rows % 2 != 0 || cols % 2 != 0 {
            return Err(Error::Dimension(format!(
                "A must be 2M x 2N with M, N >= 1, got {rows} x {cols}"
            )));
        }
        if b.len() != rows {
            return Err(Error::Dimension(format!(
                "b has length {}, A has {} rows",
                b.len(),
                rows
            )));
        }
        let a_t = a.transpose();
        Ok(Self {
            a,
            a_t,
            b,
            m: rows / 2,
            n: cols / 2,
        })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn a_t(&self) -> &DMatrix<f64> {
        &self.a_t
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// Number of complex measurements (A has 2M rows).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of unit-modulus pairs (A has 2N columns).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient dimension 2N of the variable.
    pub fn dim(&self) -> usize {
        2 * self.n
    }
}

/// A point in ℝ^{2N} whose N coordinate pairs each have unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitModulusPoint {
    x: DVector<f64>,
}

impl UnitModulusPoint {
    /// Wraps `x` after checking membership at the default tolerance.
    pub fn new(x: DVector<f64>) -> Result<Self> {
        Self::with_tol(x, MEMBERSHIP_TOL)
    }

    /// Wraps `x` after checking membership at tolerance `tol`.
    pub fn with_tol(x: DVector<f64>, tol: f64) -> Result<Self> {
        if x.is_empty() || x.len() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "unit-modulus point must have even positive length, got {}",
                x.len()
            )));
        }
        let dev = worst_pair_deviation(&x);
        if dev > tol {
            return Err(Error::NotOnManifold {
                deviation: dev,
                tol,
            });
        }
        Ok(Self { x })
    }

    /// Wraps a vector whose pairs are unit by construction (projection
    /// output). Callers must guarantee membership.
    pub(crate) fn new_unchecked(x: DVector<f64>) -> Self {
        Self { x }
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.x
    }

    /// Number of coordinate pairs N.
    pub fn n_pairs(&self) -> usize {
        self.x.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// The i-th coordinate pair (zero-based).
    pub fn pair(&self, i: usize) -> Vector2<f64> {
        select2(&self.x, i)
    }
}

/// Squared-residual objective value `½‖Ax − b‖²`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ObjectiveValue(f64);

impl ObjectiveValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

fn worst_pair_deviation(x: &DVector<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..x.len() / 2 {
        let ns = x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1];
        let dev = (ns - 1.0).abs();
        if !dev.is_finite() {
            // f64::max would silently drop a NaN deviation
            return f64::INFINITY;
        }
        worst = worst.max(dev);
    }
    worst
}

/// True iff every coordinate pair of `x` has squared norm within `tol` of 1.
pub fn membership(x: &DVector<f64>, tol: f64) -> bool {
    if x.is_empty() || x.len() % 2 != 0 {
        return false;
    }
    worst_pair_deviation(x) <= tol
}

/// Builds the real reparametrization: `A` from 2×2 blocks
/// `[[Re Φᵢⱼ, −Im Φᵢⱼ], [Im Φᵢⱼ, Re Φᵢⱼ]]` and `b` interleaving the real and
/// imaginary parts of `h`.
pub fn realify_problem(cp: &ComplexProblem) -> RealProblem {
    let (m, n) = (cp.m(), cp.n());
    let mut a = DMatrix::<f64>::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let re = cp.phi_re[(i, j)];
            let im = cp.phi_im[(i, j)];
            a[(2 * i, 2 * j)] = re;
            a[(2 * i, 2 * j + 1)] = -im;
            a[(2 * i + 1, 2 * j)] = im;
            a[(2 * i + 1, 2 * j + 1)] = re;
        }
    }
    let mut b = DVector::<f64>::zeros(2 * m);
    for i in 0..m {
        b[2 * i] = cp.h_re[i];
        b[2 * i + 1] = cp.h_im[i];
    }
    RealProblem::new(a, b).expect("realified dimensions are consistent by construction")
}

/// The 2-selection operator: extracts the i-th coordinate pair (zero-based)
/// of a 2N-vector.
///
/// Panics if `i` is out of range or the vector has odd length.
pub fn select2(x: &DVector<f64>, i: usize) -> Vector2<f64> {
    assert!(
        x.len() % 2 == 0,
        "select2 needs an even-length vector, got {}",
        x.len()
    );
    assert!(
        i < x.len() / 2,
        "pair index {i} out of range for {} pairs",
        x.len() / 2
    );
    Vector2::new(x[2 * i], x[2 * i + 1])
}

/// Interleaves N coordinate pairs back into a 2N-vector, the inverse of
/// [`select2`] applied pairwise.
pub fn assemble_from_pairs(pairs: &[Vector2<f64>]) -> DVector<f64> {
    let mut x = DVector::<f64>::zeros(2 * pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        x[2 * i] = p[0];
        x[2 * i + 1] = p[1];
    }
    x
}

/// Splits an interleaved real vector back into complex parts:
/// `x = [Re w₁, Im w₁, …]` becomes `(Re w, Im w)`. Plumbing for callers that
/// want the complex weight vector back.
pub fn deinterleave(x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    assert!(
        x.len() % 2 == 0,
        "deinterleave needs an even-length vector, got {}",
        x.len()
    );
    let n = x.len() / 2;
    let mut re = DVector::<f64>::zeros(n);
    let mut im = DVector::<f64>::zeros(n);
    for i in 0..n {
        re[i] = x[2 * i];
        im[i] = x[2 * i + 1];
    }
    (re, im)
}

/// Objective `½‖Ax − b‖²`.
pub fn objective(p: &RealProblem, x: &DVector<f64>) -> ObjectiveValue {
    assert_eq!(
        x.len(),
        p.dim(),
        "objective: x has length {}, problem dimension is {}",
        x.len(),
        p.dim()
    );
    let r = p.a() * x - p.b();
    ObjectiveValue(0.5 * r.norm_squared())
}

/// Gradient `Aᵀ(Ax − b)` of the objective.
pub fn gradient(p: &RealProblem, x: &DVector<f64>) -> DVector<f64> {
    residual_gradient(p, x).1
}

/// Returns `(Ax − b, Aᵀ(Ax − b))`; solvers reuse the residual for the
/// objective so each gradient costs exactly two matrix-vector products.
pub(crate) fn residual_gradient(p: &RealProblem, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    assert_eq!(
        x.len(),
        p.dim(),
        "gradient: x has length {}, problem dimension is {}",
        x.len(),
        p.dim()
    );
    let r = p.a() * x - p.b();
    let g = p.a_t() * &r;
    (r, g)
}

/// Largest singular value of `a`, by power iteration on `AᵀA`.
///
/// Deterministic all-ones start, relative-change stop at 1e-12, cap 10 000
/// iterations. The returned value is `‖Av‖` at the final unit iterate.
pub fn spectral_norm(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidInput("spectral_norm of an empty matrix".into()));
    }
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("spectral_norm of a non-finite matrix".into()));
    }
    let n = a.ncols();
    let a_t = a.transpose();
    let mut v = DVector::<f64>::from_element(n, 1.0 / (n as f64).sqrt());
    let mut prev = f64::INFINITY;
    let mut fallback_col = 0usize;
    for _ in 0..10_000 {
        let w = a * &v;
        let est = w.norm_squared(); // vᵀAᵀAv for unit v
        if est == 0.0 {
            // Start vector landed in the null space; restart from the next
            // canonical direction with a nonzero image.
            loop {
                if fallback_col >= n {
                    return Ok(0.0); // A is the zero matrix
                }
                let mut e = DVector::<f64>::zeros(n);
                e[fallback_col] = 1.0;
                fallback_col += 1;
                if (a * &e).norm_squared() > 0.0 {
                    v = e;
                    break;
                }
            }
            prev = f64::INFINITY;
            continue;
        }
        let u = &a_t * &w;
        let un = u.norm();
        v = u / un;
        if (est - prev).abs() <= 1e-12 * est {
            return Ok((a * &v).norm());
        }
        prev = est;
    }
    Err(Error::IterationLimit("spectral_norm power iteration"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn realify_single_entry() {
        // Phi = [[1 + 2i]], h = [3 - 1i]
        let cp = ComplexProblem::new(
            DMatrix::from_row_slice(1, 1, &[1.0]),
            DMatrix::from_row_slice(1, 1, &[2.0]),
            DVector::from_column_slice(&[3.0]),
            DVector::from_column_slice(&[-1.0]),
        )
        .unwrap();
        let p = realify_problem(&cp);
        assert_eq!(p.a(), &DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 2.0, 1.0]));
        assert_eq!(p.b(), &DVector::from_column_slice(&[3.0, -1.0]));
    }

    #[test]
    fn realify_real_phi_gives_scaled_identity_blocks() {
        let cp = ComplexProblem::new(
            DMatrix::from_row_slice(2, 2, &[1.5, -2.0, 0.25, 4.0]),
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
            DVector::zeros(2),
        )
        .unwrap();
        let p = realify_problem(&cp);
        for i in 0..2 {
            for j in 0..2 {
                let re = cp.phi_re()[(i, j)];
                assert_eq!(p.a()[(2 * i, 2 * j)], re);
                assert_eq!(p.a()[(2 * i + 1, 2 * j + 1)], re);
                assert_eq!(p.a()[(2 * i, 2 * j + 1)], 0.0);
                assert_eq!(p.a()[(2 * i + 1, 2 * j)], 0.0);
            }
        }
    }

    #[test]
    fn select2_picks_pairs() {
        let x = DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(select2(&x, 1), Vector2::new(3.0, 4.0));
        assert_eq!(select2(&x, 0), Vector2::new(1.0, 2.0));
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn select2_rejects_out_of_range() {
        let x = DVector::from_column_slice(&[1.0, 2.0]);
        let _ = select2(&x, 1);
    }

    #[test]
    fn assemble_examples() {
        let pairs = [Vector2::new(1.0, 2.0), Vector2::new(3.0, 4.0)];
        assert_eq!(
            assemble_from_pairs(&pairs),
            DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0])
        );
        let single = [Vector2::new(0.6, 0.8)];
        assert_eq!(
            assemble_from_pairs(&single),
            DVector::from_column_slice(&[0.6, 0.8])
        );
    }

    #[test]
    fn deinterleave_inverts_the_real_parametrization() {
        let x = DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
        let (re, im) = deinterleave(&x);
        assert_eq!(re, DVector::from_column_slice(&[1.0, 3.0]));
        assert_eq!(im, DVector::from_column_slice(&[2.0, 4.0]));
    }

    #[test]
    fn objective_identity_cases() {
        let p = RealProblem::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let x = DVector::from_column_slice(&[1.0, 0.0]);
        assert_eq!(objective(&p, &x).value(), 0.5);

        let p2 = RealProblem::new(
            DMatrix::identity(2, 2),
            DVector::from_column_slice(&[1.0, 0.0]),
        )
        .unwrap();
        assert_eq!(objective(&p2, &x).value(), 0.0);
    }

    #[test]
    fn gradient_identity_cases() {
        let p = RealProblem::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let x = DVector::from_column_slice(&[1.0, 0.0]);
        assert_eq!(gradient(&p, &x), DVector::from_column_slice(&[1.0, 0.0]));
    }

    #[test]
    fn gradient_vanishes_at_least_squares_solution() {
        // A full-rank 4x2, x_ls = (AᵀA)⁻¹Aᵀb
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.5, -0.25, 2.0, 3.0, -1.0, 0.0, 1.5]);
        let b = DVector::from_column_slice(&[0.3, -1.2, 2.0, 0.7]);
        let ata = a.transpose() * &a;
        let x_ls = ata
            .lu()
            .solve(&(a.transpose() * &b))
            .expect("AᵀA invertible");
        let p = RealProblem::new(a, b).unwrap();
        let g = gradient(&p, &x_ls);
        assert!(g.norm() < 1e-12, "gradient norm {} at LS solution", g.norm());
    }

    #[test]
    fn spectral_norm_diagonal_and_identity() {
        let d = DMatrix::from_row_slice(2, 2, &[5.0, 0.0, 0.0, 1.0]);
        assert_relative_eq!(spectral_norm(&d).unwrap(), 5.0, max_relative = 1e-10);
        let i = DMatrix::<f64>::identity(3, 3);
        assert_relative_eq!(spectral_norm(&i).unwrap(), 1.0, max_relative = 1e-10);
        let z = DMatrix::<f64>::zeros(2, 3);
        assert_eq!(spectral_norm(&z).unwrap(), 0.0);
    }

    #[test]
    fn membership_examples() {
        let on = DVector::from_column_slice(&[1.0, 0.0, 0.0, -1.0]);
        assert!(membership(&on, 1e-12));
        let off = DVector::from_column_slice(&[0.5, 0.5, 1.0, 0.0]);
        assert!(!membership(&off, 1e-12));
    }

    #[test]
    fn unit_modulus_point_rejects_off_manifold() {
        let err = UnitModulusPoint::new(DVector::from_column_slice(&[0.5, 0.5]));
        assert!(err.is_err());
        let ok = UnitModulusPoint::new(DVector::from_column_slice(&[0.6, 0.8]));
        assert!(ok.is_ok());
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        assert!(UnitModulusPoint::new(DVector::from_column_slice(&[f64::NAN, 0.0])).is_err());
        assert!(!membership(&DVector::from_column_slice(&[f64::NAN, 1.0]), 1e-9));
        assert!(!membership(
            &DVector::from_column_slice(&[f64::INFINITY, 0.0]),
            1e-9
        ));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, 0.0, 1.0]);
        assert!(spectral_norm(&m).is_err());
    }
}
