//! Minimal 3x3 linear algebra: characteristic polynomial and its roots.
//!
//! The closed-loop matrices in this crate are all 3x3, so root finding
//! reduces to one monic cubic. Roots are computed in closed form (trig
//! branch for three real roots, Cardano otherwise) and then polished with
//! a guarded complex Newton iteration.

use core::cmp::Ordering;

pub use num_complex::Complex;

use crate::real::Real;

/// Dense 3x3 real matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3<T> {
    rows: [[T; 3]; 3],
}

impl<T: Real> Matrix3<T> {
    pub fn from_rows(rows: [[T; 3]; 3]) -> Self {
        Matrix3 { rows }
    }

    pub fn zeros() -> Self {
        Matrix3 {
            rows: [[T::zero(); 3]; 3],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.rows[row][col]
    }

    pub fn rows(&self) -> &[[T; 3]; 3] {
        &self.rows
    }

    pub fn trace(&self) -> T {
        self.rows[0][0] + self.rows[1][1] + self.rows[2][2]
    }

    pub fn determinant(&self) -> T {
        let m = &self.rows;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Coefficients of `det(sI - A)` as a monic cubic.
    pub fn characteristic_polynomial(&self) -> Cubic<T> {
        let m = &self.rows;
        // Sum of the principal 2x2 minors.
        let minors = (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
            + (m[0][0] * m[1][1] - m[0][1] * m[1][0]);
        Cubic {
            c2: -self.trace(),
            c1: minors,
            c0: -self.determinant(),
        }
    }
}

/// Monic cubic `s^3 + c2 s^2 + c1 s + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic<T> {
    pub c2: T,
    pub c1: T,
    pub c0: T,
}

impl<T: Real> Cubic<T> {
    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        ((s + self.c2) * s + self.c1) * s + self.c0
    }

    fn eval_derivative(&self, s: Complex<T>) -> Complex<T> {
        let three = Complex::new(T::cast(3.0), T::zero());
        let two = Complex::new(T::cast(2.0), T::zero());
        (three * s + two * self.c2) * s + self.c1
    }

    /// All three roots, sorted by real part then imaginary part.
    pub fn roots(&self) -> [Complex<T>; 3] {
        let third = T::cast(1.0 / 3.0);
        let half = T::cast(0.5);
        let shift = self.c2 * third;

        // Depressed cubic t^3 + p t + q with s = t - c2/3.
        let p = self.c1 - self.c2 * self.c2 * third;
        let q = self.c2 * (T::cast(2.0) * self.c2 * self.c2 / T::cast(27.0) - self.c1 * third)
            + self.c0;

        let mut roots = if p == T::zero() && q == T::zero() {
            let t = Complex::new(-shift, T::zero());
            [t, t, t]
        } else {
            let disc = (q * half) * (q * half) + (p * third) * (p * third) * (p * third);
            let disc_scale = (q * half) * (q * half) + ((p * third) * (p * third) * (p * third)).abs();
            if disc.abs() <= T::cast(512.0) * T::epsilon() * disc_scale {
                // Discriminant at rounding level: a double root. Its
                // closed form d = -3q/(2p) is well conditioned, unlike
                // Cardano or the trig branch at the boundary.
                let d = T::cast(-1.5) * q / p;
                [
                    Complex::new(d - shift, T::zero()),
                    Complex::new(d - shift, T::zero()),
                    Complex::new(-T::cast(2.0) * d - shift, T::zero()),
                ]
            } else if disc > T::zero() {
                // One real root, one conjugate pair. Pick the cube-root
                // argument with the larger magnitude to dodge cancellation.
                let sqrt_disc = disc.sqrt();
                let u3 = if q <= T::zero() {
                    -q * half + sqrt_disc
                } else {
                    -q * half - sqrt_disc
                };
                let u = u3.cbrt();
                let v = -p * third / u;
                let real = u + v;
                let re_pair = -real * half;
                let im_pair = (u - v) * T::cast(3.0).sqrt() * half;
                [
                    Complex::new(real - shift, T::zero()),
                    Complex::new(re_pair - shift, im_pair),
                    Complex::new(re_pair - shift, -im_pair),
                ]
            } else {
                // Three real roots: t_k = m cos(phi/3 - 2 pi k / 3).
                let s_amp = (-p * third).sqrt();
                let m = T::cast(2.0) * s_amp;
                let cos_arg = if s_amp == T::zero() {
                    T::zero()
                } else {
                    let raw = -q / (T::cast(2.0) * s_amp * s_amp * s_amp);
                    raw.max(-T::one()).min(T::one())
                };
                let phi = cos_arg.acos();
                let two_thirds_pi = T::TAU() * third;
                let mut out = [Complex::new(T::zero(), T::zero()); 3];
                for (k, slot) in out.iter_mut().enumerate() {
                    let angle = phi * third - two_thirds_pi * T::from_usize(k).unwrap();
                    *slot = Complex::new(m * angle.cos() - shift, T::zero());
                }
                out
            }
        };

        for root in roots.iter_mut() {
            *root = self.polish(*root);
        }
        roots.sort_by(compare_complex);
        roots
    }

    // Guarded Newton refinement: accept a step only if it reduces the
    // residual. Converges linearly at double roots, which is enough to pull
    // the trig-branch error below 1e-9.
    fn polish(&self, start: Complex<T>) -> Complex<T> {
        let mut z = start;
        let mut best = z;
        let mut best_res = self.eval(z).norm();
        for _ in 0..24 {
            let deriv = self.eval_derivative(z);
            if deriv.norm() == T::zero() {
                break;
            }
            let step = self.eval(z) / deriv;
            let candidate = z - step;
            let res = self.eval(candidate).norm();
            if res < best_res {
                best = candidate;
                best_res = res;
                z = candidate;
            } else {
                break;
            }
            if step.norm() <= T::epsilon() * (z.norm() + T::one()) {
                break;
            }
        }
        best
    }
}

fn compare_complex<T: Real>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// Eigenvalues of a 3x3 matrix as the roots of `det(sI - A)`, sorted by
/// real part then imaginary part.
pub fn characteristic_roots<T: Real>(matrix: &Matrix3<T>) -> [Complex<T>; 3] {
    matrix.characteristic_polynomial().roots()
}

#[cfg(test)]
mod tests {
    use nalgebra as na;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    use super::*;

    fn assert_roots_match(actual: &[Complex<f64>; 3], expected: &[Complex<f64>; 3], tol: f64) {
        // Compare as multisets via best permutation; sorting alone can pair
        // a conjugate with its mirror when real parts tie within rounding.
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let best = perms
            .iter()
            .map(|perm| {
                (0..3)
                    .map(|i| (actual[i] - expected[perm[i]]).norm())
                    .fold(0.0f64, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best <= tol, "roots {actual:?} vs {expected:?}, err {best}");
    }

    #[test]
    fn diagonal_matrix_roots() {
        let m = Matrix3::from_rows([[-1.0, 0.0, 0.0], [0.0, -2.0, 0.0], [0.0, 0.0, -3.0]]);
        let roots = characteristic_roots(&m);
        assert_roots_match(
            &roots,
            &[
                Complex::new(-3.0, 0.0),
                Complex::new(-2.0, 0.0),
                Complex::new(-1.0, 0.0),
            ],
            1e-12,
        );
        // Sorted ascending by real part.
        assert!(roots[0].re <= roots[1].re && roots[1].re <= roots[2].re);
    }

    #[test]
    fn zero_matrix_roots() {
        let roots = characteristic_roots(&Matrix3::<f64>::zeros());
        for r in roots {
            assert_eq!(r, Complex::new(0.0, 0.0));
        }
    }

    #[test]
    fn residuals_stay_small_on_random_matrices() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..2000 {
            let mut rows = [[0.0f64; 3]; 3];
            for row in rows.iter_mut() {
                for entry in row.iter_mut() {
                    *entry = rng.random_range(-5.0..5.0);
                }
            }
            let m = Matrix3::from_rows(rows);
            let poly = m.characteristic_polynomial();
            for root in poly.roots() {
                let scale = (1.0 + root.norm()).powi(3);
                assert!(
                    poly.eval(root).norm() <= 1e-9 * scale,
                    "residual too large for {rows:?}"
                );
            }
        }
    }

    #[test]
    fn matches_general_purpose_eigensolver() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..500 {
            let mut rows = [[0.0f64; 3]; 3];
            for row in rows.iter_mut() {
                for entry in row.iter_mut() {
                    *entry = rng.random_range(-5.0..5.0);
                }
            }
            let ours = characteristic_roots(&Matrix3::from_rows(rows));
            let eig = na::Matrix3::from_row_slice(&[
                rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1], rows[1][2],
                rows[2][0], rows[2][1], rows[2][2],
            ])
            .complex_eigenvalues();
            let reference = [
                Complex::new(eig[0].re, eig[0].im),
                Complex::new(eig[1].re, eig[1].im),
                Complex::new(eig[2].re, eig[2].im),
            ];
            assert_roots_match(&ours, &reference, 1e-6);
        }
    }

    #[test]
    fn conjugate_pair_is_exact() {
        // s^3 + s = s (s - i)(s + i)
        let poly = Cubic {
            c2: 0.0,
            c1: 1.0,
            c0: 0.0,
        };
        let roots = poly.roots();
        assert_eq!(roots[0].re, roots[2].re);
        assert_eq!(roots[0].im, -roots[2].im);
    }
}
