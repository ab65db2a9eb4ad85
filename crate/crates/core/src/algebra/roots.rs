//! Floating-point root finding (Aberth–Ehrlich). Advisory output only; the
//! certificates never depend on it.

use num_complex::Complex64;

use super::{AlgebraError, UniPoly};

const MAX_ITER: usize = 1000;

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Starting points on circles whose radii come from the upper convex hull
/// of `(i, log|a_i|)`, so that roots of very different magnitude start
/// near the right scale.
fn initial_guesses(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let pts: Vec<(f64, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| (i as f64, c.abs().ln()))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut out = Vec::with_capacity(n);
    let offset = 0.4;
    for w in hull.windows(2) {
        let (i, j) = (w[0].0, w[1].0);
        let k = (j - i) as usize;
        let r = ((w[0].1 - w[1].1) / (j - i)).exp();
        for m in 0..k {
            let theta = 2.0 * std::f64::consts::PI * (m as f64) / (k as f64)
                + offset
                + out.len() as f64 * 0.1;
            out.push(Complex64::from_polar(r, theta));
        }
    }
    out
}

/// All complex roots of `g` (deg >= 1, nonzero constant term not required).
///
/// Each root is validated by the backward-error bound
/// `|g(r)| <= 1e-9 * ||g|| * max(1, |r|)^deg`.
pub fn numeric_roots(g: &UniPoly) -> Result<Vec<Complex64>, AlgebraError> {
    let degree = g.degree().ok_or(AlgebraError::ZeroPolynomial)?;
    if degree == 0 {
        return Err(AlgebraError::ConstantPolynomial);
    }
    let raw = g.to_f64();
    let lead = *raw.last().unwrap();
    let coeffs: Vec<f64> = raw.iter().map(|c| c / lead).collect();
    // zero roots are split off exactly
    let zeros = coeffs.iter().take_while(|c| **c == 0.0).count();
    let reduced = &coeffs[zeros..];
    let mut z = if reduced.len() > 1 {
        initial_guesses(reduced)
    } else {
        Vec::new()
    };
    let m = z.len();
    let mut converged = m == 0;
    for _ in 0..MAX_ITER {
        let mut max_step: f64 = 0.0;
        for k in 0..m {
            let (p, dp) = horner(reduced, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..m {
                if j != k {
                    sum += (z[k] - z[j]).inv();
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if w.is_finite() {
                z[k] -= w;
                max_step = max_step.max(w.norm() / z[k].norm().max(f64::MIN_POSITIVE));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(AlgebraError::ConvergenceFailure(MAX_ITER));
    }
    // Newton polishing
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(reduced, *r);
            let step = p / dp;
            if step.is_finite() && step.norm() < 1e-6 * r.norm().max(1e-300) {
                *r -= step;
            }
        }
    }
    let norm: f64 = coeffs.iter().map(|c| c.abs()).sum();
    for r in &z {
        let (p, _) = horner(&coeffs, *r);
        let bound = 1e-9 * norm * r.norm().max(1.0).powi(degree as i32);
        if p.norm() > bound {
            return Err(AlgebraError::ConvergenceFailure(MAX_ITER));
        }
    }
    let mut roots: Vec<Complex64> = std::iter::repeat_n(Complex64::new(0.0, 0.0), zeros)
        .chain(z)
        .map(|r| {
            // snap imaginary noise of real roots
            if r.im.abs() <= 1e-12 * r.norm().max(1e-300) {
                Complex64::new(r.re, 0.0)
            } else {
                r
            }
        })
        .collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn paper_roots() {
        let roots = numeric_roots(&UniPoly::from_ints([1, 91, 541, 91, 1])).unwrap();
        let expect = [-84.619, -6.2077, -0.16109, -0.011818];
        for e in expect {
            assert!(
                roots.iter().any(|r| (r.re - e).abs() < 1e-3 && r.im == 0.0),
                "{e} missing from {roots:?}"
            );
        }
    }

    #[test]
    fn trivial_roots() {
        let roots = numeric_roots(&UniPoly::from_ints([-1, 0, 1])).unwrap();
        assert!(close(roots[0], Complex64::new(-1.0, 0.0), 1e-12));
        assert!(close(roots[1], Complex64::new(1.0, 0.0), 1e-12));
        let roots = numeric_roots(&UniPoly::from_ints([-8, 0, 0, 1])).unwrap();
        let w = Complex64::from_polar(2.0, 2.0 * std::f64::consts::PI / 3.0);
        for e in [Complex64::new(2.0, 0.0), w, w.conj()] {
            assert!(roots.iter().any(|r| close(*r, e, 1e-10)), "{e}");
        }
    }

    #[test]
    fn zero_roots_split_off() {
        let roots = numeric_roots(&UniPoly::from_ints([0, 0, 2, 2])).unwrap();
        assert_eq!(roots.len(), 3);
        assert!(close(roots[0], Complex64::new(-1.0, 0.0), 1e-12));
    }

    #[test]
    fn widely_spread_roots() {
        // (p + 1e-4)(p + 1)(p + 1e4)
        let mut g = UniPoly::one();
        for r in [1i64, 10_000] {
            g = &g * &UniPoly::from_ints([r, 1]);
        }
        g = &g * &UniPoly::new(vec![
            num_rational::BigRational::new(1.into(), 10_000.into()),
            num_rational::BigRational::from_integer(1.into()),
        ]);
        let roots = numeric_roots(&g).unwrap();
        for (r, e) in roots.iter().zip([-1e4, -1.0, -1e-4]) {
            assert!((r.re - e).abs() <= 1e-9 * e.abs(), "{r} vs {e}");
        }
    }
}
