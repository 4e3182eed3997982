//! Scalar and flat-vector helpers.
//!
//! Transcendental functions go through `libm` in every configuration, not
//! just under `no_std`, so a run produces bit-identical numbers regardless of
//! which float backend the host libstd uses.

/// Natural exponential.
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Square root.
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Hyperbolic tangent.
#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

/// Absolute value.
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Smallest integer not below `x`.
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// `x` raised to an integer power, by repeated squaring on the float.
#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

/// Logistic sigmoid, evaluated on the side that avoids `exp` overflow.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// Dot product of two equally long slices.
///
/// Callers are expected to have checked lengths; this truncates to the
/// shorter slice like `zip` does.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Euclidean norm.
#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Euclidean norm.
#[inline]
pub fn norm(a: &[f64]) -> f64 {
    sqrt(norm_sq(a))
}

/// True when every element is finite.
#[inline]
pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_matches_definition_on_both_branches() {
        for &x in &[-30.0, -2.0, -1e-9, 0.0, 1e-9, 2.0, 30.0] {
            let direct = 1.0 / (1.0 + exp(-x));
            assert!(
                abs(sigmoid(x) - direct) <= 1e-15,
                "sigmoid({x}) = {} but direct evaluation gives {direct}",
                sigmoid(x)
            );
        }
    }

    #[test]
    fn sigmoid_saturates_without_overflow() {
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
    }

    #[test]
    fn dot_and_norms_agree_on_a_known_vector() {
        let v = [3.0, 4.0];
        assert_eq!(dot(&v, &v), 25.0);
        assert_eq!(norm_sq(&v), 25.0);
        assert_eq!(norm(&v), 5.0);
    }

    #[test]
    fn all_finite_rejects_nan_and_infinity() {
        assert!(all_finite(&[0.0, -1.5, 1e300]));
        assert!(!all_finite(&[0.0, f64::NAN]));
        assert!(!all_finite(&[f64::INFINITY]));
    }
}
