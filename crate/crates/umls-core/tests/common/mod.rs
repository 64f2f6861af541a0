//! Shared helpers for the integration-test oracles. Everything here is an
//! independent slow path: none of it calls the library routines it is used
//! to check.
#![allow(dead_code)] // each test binary uses its own subset

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| (rng.random::<f64>() * 2.0 - 1.0) * scale)
}

pub fn random_vector(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(len, |_, _| (rng.random::<f64>() * 2.0 - 1.0) * scale)
}

/// Random point on the unit-modulus set via angles.
pub fn random_unit_modulus(rng: &mut ChaCha8Rng, n_pairs: usize) -> DVector<f64> {
    let mut x = DVector::<f64>::zeros(2 * n_pairs);
    for i in 0..n_pairs {
        let t = rng.random::<f64>() * std::f64::consts::TAU;
        x[2 * i] = t.cos();
        x[2 * i + 1] = t.sin();
    }
    x
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix. Returns the
/// eigenvalues in no particular order.
pub fn jacobi_eigenvalues(s: &DMatrix<f64>) -> Vec<f64> {
    let n = s.nrows();
    assert_eq!(n, s.ncols());
    let mut a = s.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + a.norm()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sgn = t * c;
                // rotate rows/columns p and q
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sgn * akq;
                    a[(k, q)] = sgn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sgn * aqk;
                    a[(q, k)] = sgn * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// Characteristic polynomial coefficients `[1, c1, ..., cn]` of a square
/// matrix via the Faddeev-LeVerrier recurrence.
pub fn char_poly(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut coeffs = vec![1.0];
    let mut b = m.clone();
    let mut c = -b.trace();
    coeffs.push(c);
    for k in 2..=n {
        let mut shifted = b;
        for i in 0..n {
            shifted[(i, i)] += c;
        }
        b = m * shifted;
        c = -b.trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

fn poly_eval(coeffs: &[f64], z: Complex<f64>) -> Complex<f64> {
    let mut acc = Complex::new(0.0, 0.0);
    for c in coeffs {
        acc = acc * z + Complex::new(*c, 0.0);
    }
    acc
}

/// All complex roots of a real monic polynomial by the Durand-Kerner
/// simultaneous iteration.
pub fn durand_kerner_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let radius = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut w: Vec<Complex<f64>> = (0..n)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / n as f64 + 0.5;
            Complex::new(radius * t.cos(), radius * t.sin())
        })
        .collect();
    for _ in 0..5000 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= w[i] - w[j];
                }
            }
            if denom.norm() == 0.0 {
                // coincident iterates: nudge
                w[i] += Complex::new(1e-8, 1e-8);
                continue;
            }
            let step = poly_eval(coeffs, w[i]) / denom;
            w[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-13 * radius.max(1.0) {
            break;
        }
    }
    w
}

/// Real roots of a real polynomial by dense sign scan and bisection over
/// the Cauchy root bound interval.
pub fn real_roots_by_scan(coeffs: &[f64]) -> Vec<f64> {
    let radius = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let grid = 40_000usize;
    let eval = |x: f64| poly_eval(coeffs, Complex::new(x, 0.0)).re;
    let mut roots = Vec::new();
    let step = 2.0 * radius / grid as f64;
    let mut prev_x = -radius;
    let mut prev_v = eval(prev_x);
    for j in 1..=grid {
        let x = -radius + j as f64 * step;
        let v = eval(x);
        if prev_v == 0.0 {
            roots.push(prev_x);
        } else if prev_v * v < 0.0 {
            let (mut a, mut b, mut va) = (prev_x, x, prev_v);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let vm = eval(mid);
                if vm == 0.0 || b - a < 1e-14 * radius {
                    a = mid;
                    b = mid;
                    break;
                }
                if va * vm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    va = vm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_x = x;
        prev_v = v;
    }
    roots
}

/// Independent spectral radius: max root modulus of the characteristic
/// polynomial, with the real roots cross-checked by scan + bisection.
pub fn spectral_radius_oracle(m: &DMatrix<f64>) -> f64 {
    let coeffs = char_poly(m);
    let roots = durand_kerner_roots(&coeffs);
    let rho = roots.iter().fold(0.0f64, |acc, r| acc.max(r.norm()));
    // Every plainly real root found by the scan must be matched by a
    // Durand-Kerner root.
    for x in real_roots_by_scan(&coeffs) {
        let nearest = roots
            .iter()
            .map(|r| (r - Complex::new(x, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest < 1e-5 * (1.0 + x.abs()),
            "scan root {x} unmatched by Durand-Kerner (nearest {nearest})"
        );
    }
    rho
}

/// Multiplies the complex matrix (re, im) by the complex vector (re, im)
/// with hand-rolled complex arithmetic.
pub fn complex_matvec(
    phi_re: &DMatrix<f64>,
    phi_im: &DMatrix<f64>,
    w_re: &DVector<f64>,
    w_im: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let m = phi_re.nrows();
    let n = phi_re.ncols();
    let mut out_re = DVector::<f64>::zeros(m);
    let mut out_im = DVector::<f64>::zeros(m);
    for i in 0..m {
        for j in 0..n {
            out_re[i] += phi_re[(i, j)] * w_re[j] - phi_im[(i, j)] * w_im[j];
            out_im[i] += phi_re[(i, j)] * w_im[j] + phi_im[(i, j)] * w_re[j];
        }
    }
    (out_re, out_im)
}
