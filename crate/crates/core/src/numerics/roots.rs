use crate::error::{DecayError, Result};

/// Bisection root of `f` on `[lo, hi]`, bracketed to width `<= tol`.
///
/// Requires a sign change; an exact zero at either end is returned as is.
pub fn find_root_bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) {
        return Err(DecayError::InvalidInterval { a: lo, b: hi });
    }
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo * f_hi < 0.0) {
        return Err(DecayError::NoSignChange { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear() {
        assert!((find_root_bisect(|x| x - 1.0, 0.0, 2.0, 1e-12).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_root_of_two() {
        let r = find_root_bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-10).unwrap();
        assert!((r - 1.414_213_56).abs() < 1e-8);
    }

    #[test]
    fn cosine_zero() {
        let r = find_root_bisect(f64::cos, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change_is_rejected() {
        assert!(matches!(
            find_root_bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9),
            Err(DecayError::NoSignChange { .. })
        ));
    }
}
