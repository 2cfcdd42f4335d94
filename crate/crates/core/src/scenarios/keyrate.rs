//! Asymptotic key rate from detection rate, bit error and phase error.

use crate::{Error, Result};

/// `-p log2 p - (1-p) log2 (1-p)` with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    let term = |q: f64| if q == 0.0 { 0.0 } else { -q * q.log2() };
    Ok(term(p) + term(1.0 - p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateResult {
    /// Secret key bits per signal, clamped at zero.
    pub rate: f64,
    pub eps_ph: f64,
    pub p_det: f64,
    pub eps0: f64,
}

/// `max{0, p_det (1 - h2(ε0) - h2(ε_ph))}`.
pub fn keyrate(p_det: f64, eps0: f64, eps_ph: f64) -> Result<KeyRateResult> {
    if !(0.0..=1.0).contains(&p_det) {
        return Err(Error::InvalidParameter(format!("p_det {p_det} outside [0, 1]")));
    }
    let raw = p_det * (1.0 - binary_entropy(eps0)? - binary_entropy(eps_ph)?);
    Ok(KeyRateResult { rate: raw.max(0.0), eps_ph, p_det, eps0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert!((binary_entropy(0.11).unwrap() - 0.499916).abs() < 1e-5);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn rate_values() {
        assert_eq!(keyrate(1.0, 0.0, 0.0).unwrap().rate, 1.0);
        assert_eq!(keyrate(1.0, 0.0, 0.5).unwrap().rate, 0.0);
        let r = keyrate(0.5, 0.02, 0.05).unwrap().rate;
        let want = 0.5 * (1.0 - binary_entropy(0.02).unwrap() - binary_entropy(0.05).unwrap());
        assert!((r - want).abs() < 1e-15);
        assert!((r - 0.2861).abs() < 1e-3);
        assert!(keyrate(1.5, 0.0, 0.0).is_err());
        assert!(keyrate(0.5, 0.0, 2.0).is_err());
    }
}
