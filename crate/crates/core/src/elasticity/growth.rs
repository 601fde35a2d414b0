use nalgebra::{Matrix2, Matrix3, Vector2};

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_exponent<T: Real>(p: T) -> Result<()> {
    if p > T::one() && p <= T::lit(2.0) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("exponent p must lie in (1, 2], got {}", p.as_f64())))
    }
}

/// `Φ_p(t) = min(t^p, t²)`.
pub fn phi_p<T: Real>(t: T, p: T) -> Result<T> {
    check_exponent(p)?;
    if t < T::zero() {
        return Err(Error::InvalidArgument(format!("Φ_p needs t >= 0, got {}", t.as_f64())));
    }
    Ok(phi_unchecked(t, p))
}

#[inline]
fn phi_unchecked<T: Real>(t: T, p: T) -> T {
    if t <= T::one() {
        t * t
    } else {
        t.powf(p)
    }
}

/// Mixed-growth density `Φ_p` with its convex envelope `Φ_p**`.
///
/// The envelope is `s²` on `[0, t₁]`, the common tangent on `[t₁, t₂]` and
/// `s^p` beyond `t₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedGrowth<T: Real = f64> {
    p: T,
    t1: T,
    t2: T,
    c_p: T,
    newton_iterations: usize,
}

impl<T: Real> MixedGrowth<T> {
    pub fn new(p: T) -> Result<Self> {
        check_exponent(p)?;
        if p == T::lit(2.0) {
            return Ok(Self {
                p,
                t1: T::one(),
                t2: T::one(),
                c_p: T::one(),
                newton_iterations: 0,
            });
        }
        let (t1, t2, newton_iterations) = tangency_points(p)?;
        // Φ_p/Φ_p** peaks at the kink t = 1 where the tangent line is lowest relative to Φ_p.
        let c_p = T::one() / (T::lit(2.0) * t1 - t1 * t1);
        Ok(Self {
            p,
            t1,
            t2,
            c_p,
            newton_iterations,
        })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn tangency(&self) -> (T, T) {
        (self.t1, self.t2)
    }

    /// Constant with `Φ_p <= c_p Φ_p**`.
    pub fn c_p(&self) -> T {
        self.c_p
    }

    pub fn newton_iterations(&self) -> usize {
        self.newton_iterations
    }

    /// `Φ_p(t)` for `t >= 0`.
    #[inline]
    pub fn phi(&self, t: T) -> T {
        debug_assert!(t >= T::zero());
        phi_unchecked(t, self.p)
    }

    /// `Φ_p**(t)` for `t >= 0`.
    #[inline]
    pub fn envelope(&self, t: T) -> T {
        debug_assert!(t >= T::zero());
        if t <= self.t1 {
            t * t
        } else if t <= self.t2 {
            self.t1 * self.t1 + T::lit(2.0) * self.t1 * (t - self.t1)
        } else {
            t.powf(self.p)
        }
    }
}

/// Damped Newton iteration on `2t₁ = p t₂^{p-1}`, `-t₁² = (1-p) t₂^p`.
fn tangency_points<T: Real>(p: T) -> Result<(T, T, usize)> {
    let two = T::lit(2.0);
    let one = T::one();
    let tol = {
        let e = T::default_epsilon() * T::lit(100.0);
        if e > T::lit(1e-12) {
            e
        } else {
            T::lit(1e-12)
        }
    };
    let residual = |x: &Vector2<T>| {
        Vector2::new(
            two * x[0] - p * x[1].powf(p - one),
            -x[0] * x[0] - (one - p) * x[1].powf(p),
        )
    };
    // Start on the power branch well beyond the kink.
    let mut x = Vector2::new(T::lit(0.5), T::lit(2.0));
    let mut r = residual(&x);
    let max_iter = 200;
    for it in 0..max_iter {
        if r.norm() <= tol {
            return Ok((x[0], x[1], it));
        }
        let jac = Matrix2::new(
            two,
            -p * (p - one) * x[1].powf(p - two),
            -two * x[0],
            -(one - p) * p * x[1].powf(p - one),
        );
        let step = jac
            .lu()
            .solve(&r)
            .ok_or_else(|| Error::Singular("tangency Jacobian".into()))?;
        let mut damping = one;
        loop {
            let trial = x - step * damping;
            if trial[0] > T::zero() && trial[1] > T::zero() {
                let rt = residual(&trial);
                if rt.norm() < r.norm() || damping < T::lit(1e-6) {
                    x = trial;
                    r = rt;
                    break;
                }
            }
            damping *= T::lit(0.5);
            if damping < T::lit(1e-12) {
                return Err(Error::NoConvergence {
                    what: "envelope tangency Newton",
                    iterations: it,
                    residual: r.norm().as_f64(),
                });
            }
        }
    }
    Err(Error::NoConvergence {
        what: "envelope tangency Newton",
        iterations: max_iter,
        residual: r.norm().as_f64(),
    })
}

/// Splits `f` into `a = f·1_{|f| <= 1}` and `b = f - a` (Frobenius norm).
pub fn split_small_large<T: Real>(values: &[Matrix3<T>]) -> (Vec<Matrix3<T>>, Vec<Matrix3<T>>) {
    values
        .iter()
        .map(|f| {
            if f.norm() <= T::one() {
                (*f, Matrix3::zeros())
            } else {
                (Matrix3::zeros(), *f)
            }
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn phi_values() {
        assert_eq!(phi_p(0.0, 1.5).unwrap(), 0.0);
        assert_relative_eq!(phi_p(0.5, 1.5).unwrap(), 0.25);
        assert_relative_eq!(phi_p(4.0, 1.5).unwrap(), 8.0, epsilon = 1e-14);
        assert!(phi_p(-1.0, 1.5).is_err());
        assert!(phi_p(1.0, 1.0).is_err());
        assert!(phi_p(1.0, 2.5).is_err());
    }

    #[test]
    fn tangency_matches_closed_form() {
        for k in 1..100 {
            let p = 1.0 + k as f64 / 100.0;
            let mg = MixedGrowth::new(p).unwrap();
            let t2 = (4.0 * (p - 1.0) / (p * p)).powf(1.0 / (p - 2.0));
            let t1 = p * t2.powf(p - 1.0) / 2.0;
            let (a, b) = mg.tangency();
            assert_relative_eq!(a, t1, max_relative = 1e-10);
            assert_relative_eq!(b, t2, max_relative = 1e-10);
            assert!(a <= 1.0 && b >= 1.0);
        }
    }

    #[test]
    fn p_two_is_identity() {
        let mg = MixedGrowth::new(2.0).unwrap();
        for t in [0.0, 0.3, 1.0, 7.0] {
            assert_eq!(mg.envelope(t), t * t);
            assert_eq!(mg.phi(t), t * t);
        }
        assert_eq!(mg.c_p(), 1.0);
    }

    #[test]
    fn sandwich_constant_matches_grid_maximum() {
        let mg = MixedGrowth::new(1.5).unwrap();
        let grid_max = (1..=200_000)
            .map(|i| {
                let t = i as f64 * 5e-5;
                mg.phi(t) / mg.envelope(t)
            })
            .fold(0.0, f64::max);
        assert_relative_eq!(mg.c_p(), grid_max, max_relative = 1e-9);
    }

    #[test]
    fn works_in_single_precision() {
        let mg = MixedGrowth::<f32>::new(1.5).unwrap();
        let (t1, _) = mg.tangency();
        assert!((t1 - 0.84375).abs() < 1e-5);
    }

    #[test]
    fn split_examples() {
        let half = Matrix3::identity() * (0.5 / 3f64.sqrt());
        let (a, b) = split_small_large(&[half, half]);
        assert!(b.iter().all(|m| m.norm() == 0.0));
        assert_eq!(a[0], half);
        let big = Matrix3::identity() * (2.0 / 3f64.sqrt());
        let (a, b) = split_small_large(&[half, big]);
        assert_eq!(a[1], Matrix3::zeros());
        assert_eq!(b[1], big);
    }
}
