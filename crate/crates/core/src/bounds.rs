//! Closed-form lower-bound constants for `‖M^n f‖_p / ‖f‖_p` and the
//! strict improvement `ε_p` for the centered operator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfun::GammaTable;

/// Below this exponent the report flags results as outside the validated
/// range.
pub const VALIDATED_P_MIN: f64 = 1.01;

/// Default weak-(1,1) constant for the centered operator on the line.
pub const DEFAULT_C1: f64 = 2.0;

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `(p/(p-1))^{1/p}`, the uncentered (and left) lower constant.
pub fn lerner_constant(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok((p / (p - 1.0)).powf(1.0 / p))
}

/// `(p/(2(p-1)))^{1/p}` for `1 < p < 2`.
pub fn iz_constant(p: f64) -> Result<f64> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::OutOfRange(format!("p = {p} outside (1, 2)")));
    }
    Ok((p / (2.0 * (p - 1.0))).powf(1.0 / p))
}

fn iterated_from_gamma(p: f64, gamma: f64) -> f64 {
    (gamma * p / (p - 1.0)).powf(1.0 / p)
}

/// `(γ_n p/(p-1))^{1/p}`, the lower constant for `‖M^n f‖_p`.
pub fn iterated_constant(p: f64, n: usize) -> Result<f64> {
    check_p(p)?;
    Ok(iterated_from_gamma(p, crate::gfun::gamma(n)?))
}

/// `γ_n (p/(p-1))^{1/p}`, the constant obtained by chaining the pointwise
/// comparison with the left operator's bound.
pub fn weak_chain_constant(p: f64, n: usize) -> Result<f64> {
    Ok(crate::gfun::gamma(n)? * lerner_constant(p)?)
}

/// Upper bound `2 (c1 p/(p-1))^{1/p}` for the strong `(p, p)` constant of
/// the centered operator, by Marcinkiewicz interpolation between weak
/// `(1, 1)` with constant `c1` and `L^∞` with constant 1.
pub fn ap_upper(p: f64, c1: f64) -> Result<f64> {
    check_p(p)?;
    if !(c1 >= 1.0) || !c1.is_finite() {
        return Err(Error::OutOfRange(format!(
            "weak-(1,1) constant c1 = {c1} must be >= 1"
        )));
    }
    Ok(2.0 * (c1 * p / (p - 1.0)).powf(1.0 / p))
}

/// `ε` for one choice of `n`; `Invalid` when `(γ_n p/(p-1))^{1/p} < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "state", content = "value", rename_all = "lowercase")]
pub enum Epsilon {
    Valid(f64),
    Invalid,
}

impl Epsilon {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Valid(v) => Some(v),
            Self::Invalid => None,
        }
    }
}

/// `ε` solving `(1+ε)^p = 1 + ((A-1)/(A^n-1))^p ((γ_n p/(p-1))^{1/p} - 1)^p`.
pub fn epsilon_p(p: f64, n: usize, ap: f64) -> Result<Epsilon> {
    check_p(p)?;
    let gamma = crate::gfun::gamma(n)?;
    epsilon_from_gamma(p, n, gamma, ap)
}

fn epsilon_from_gamma(p: f64, n: usize, gamma: f64, ap: f64) -> Result<Epsilon> {
    if !(ap > 1.0) || !ap.is_finite() {
        return Err(Error::OutOfRange(format!("A_p bound {ap} must exceed 1")));
    }
    let iterated = iterated_from_gamma(p, gamma);
    if iterated < 1.0 {
        return Ok(Epsilon::Invalid);
    }
    let bracket = iterated - 1.0;
    if bracket == 0.0 {
        return Ok(Epsilon::Valid(0.0));
    }
    // log((A-1)/(A^n-1)) without forming A^n
    let ln_a = ap.ln();
    let ln_geometric = n as f64 * ln_a + (-(-(n as f64) * ln_a).exp()).ln_1p();
    let ln_ratio = (ap - 1.0).ln() - ln_geometric;
    let x = (p * (ln_ratio + bracket.ln())).exp();
    Ok(Epsilon::Valid((x.ln_1p() / p).exp_m1()))
}

/// `(n*, ε*)` maximizing `ε` over `1 ≤ n ≤ n_max`, ties to the smaller `n`.
/// `None` when no `n` gives a valid `ε`.
pub fn best_n(p: f64, ap: f64, n_max: usize) -> Result<Option<(usize, f64)>> {
    check_p(p)?;
    let table = GammaTable::build(n_max)?;
    let mut best: Option<(usize, f64)> = None;
    for (i, &gamma) in table.gammas().iter().enumerate() {
        if let Epsilon::Valid(e) = epsilon_from_gamma(p, i + 1, gamma, ap)? {
            if best.map_or(true, |(_, b)| e > b) {
                best = Some((i + 1, e));
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    pub gamma: f64,
    pub iterated: f64,
    pub weak_chain: f64,
    pub epsilon: Epsilon,
}

/// Every constant for one exponent `p`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub p: f64,
    pub n_max: usize,
    pub lerner: f64,
    pub iz: Option<f64>,
    pub ap_upper: f64,
    pub c1: f64,
    pub rows: Vec<BoundsRow>,
    pub best_n: Option<usize>,
    pub best_epsilon: Option<f64>,
    /// `p` below [`VALIDATED_P_MIN`].
    pub out_of_validated_range: bool,
}

impl BoundsReport {
    pub fn compute(p: f64, n_max: usize, c1: f64) -> Result<Self> {
        check_p(p)?;
        let table = GammaTable::build(n_max)?;
        let ap = ap_upper(p, c1)?;
        let lerner = lerner_constant(p)?;
        let mut rows = Vec::with_capacity(n_max);
        let mut best: Option<(usize, f64)> = None;
        for (i, &gamma) in table.gammas().iter().enumerate() {
            let n = i + 1;
            let epsilon = epsilon_from_gamma(p, n, gamma, ap)?;
            if let Epsilon::Valid(e) = epsilon {
                if best.map_or(true, |(_, b)| e > b) {
                    best = Some((n, e));
                }
            }
            rows.push(BoundsRow {
                n,
                gamma,
                iterated: iterated_from_gamma(p, gamma),
                weak_chain: gamma * lerner,
                epsilon,
            });
        }
        Ok(Self {
            p,
            n_max,
            lerner,
            iz: iz_constant(p).ok(),
            ap_upper: ap,
            c1,
            rows,
            best_n: best.map(|b| b.0),
            best_epsilon: best.map(|b| b.1),
            out_of_validated_range: p < VALIDATED_P_MIN,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn lerner_examples() {
        assert!((lerner_constant(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((lerner_constant(1.5).unwrap() - 3f64.powf(2.0 / 3.0)).abs() < 1e-14);
        assert!((lerner_constant(1.5).unwrap() - 2.0801).abs() < 1e-4);
        let big: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&p| lerner_constant(p).unwrap())
            .collect();
        assert!(big.windows(2).all(|w| w[1] < w[0]) && big[2] > 1.0 && big[2] < 1.01);
        assert!(lerner_constant(1.0).is_err());
    }

    #[test]
    fn iz_examples() {
        assert!((iz_constant(1.5).unwrap() - 1.5f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert!((iz_constant(1.5).unwrap() - 1.3104).abs() < 1e-4);
        assert!((iz_constant(2.0 - 1e-9).unwrap() - 1.0).abs() < 1e-8);
        assert!(iz_constant(2.0).is_err());
        assert!(iz_constant(1.0).is_err());
    }

    #[test]
    fn iterated_examples() {
        for p in [1.1, 1.5, 1.9] {
            assert!((iterated_constant(p, 1).unwrap() - iz_constant(p).unwrap()).abs() < 1e-14);
        }
        assert!((iterated_constant(2.0, 1).unwrap() - 1.0).abs() < 1e-15);
        let v = iterated_constant(2.0, 2).unwrap();
        assert!((v - (1.0 + LN_2 / 2.0).sqrt()).abs() < 1e-15);
        assert!((v - 1.1605).abs() < 1e-4);
        assert!(iterated_constant(2.0, 0).is_err());
    }

    #[test]
    fn weak_chain_examples() {
        assert!((weak_chain_constant(2.0, 1).unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((weak_chain_constant(1.5, 1).unwrap() - 1.0400).abs() < 1e-4);
        for p in [1.2, 2.0, 7.0] {
            for n in [1, 3, 40] {
                assert!(weak_chain_constant(p, n).unwrap() <= iterated_constant(p, n).unwrap());
            }
        }
    }

    #[test]
    fn ap_upper_examples() {
        assert!((ap_upper(2.0, 2.0).unwrap() - 4.0).abs() < 1e-15);
        for p in [1.1, 2.0, 10.0] {
            assert!(ap_upper(p, 1.5675).unwrap() < ap_upper(p, 2.0).unwrap());
            assert!(ap_upper(p, 1.0).unwrap() >= 1.0);
        }
        assert!(ap_upper(2.0, 0.5).is_err());
        assert!(ap_upper(1.0, 2.0).is_err());
    }

    #[test]
    fn epsilon_examples() {
        // n = 1: (A-1)/(A-1) = 1
        for p in [1.2, 1.5, 1.8] {
            let direct = (1.0 + (iz_constant(p).unwrap() - 1.0).powf(p)).powf(1.0 / p) - 1.0;
            let e = epsilon_p(p, 1, 3.7).unwrap().value().unwrap();
            assert!((e - direct).abs() < 1e-12, "{e} vs {direct}");
        }
        assert_eq!(epsilon_p(2.0, 1, 4.0).unwrap(), Epsilon::Valid(0.0));
        let e = epsilon_p(2.0, 2, 4.0).unwrap().value().unwrap();
        let g2 = 0.5 + LN_2 / 4.0;
        let recomputed = (1.0 + (0.2 * ((2.0 * g2).sqrt() - 1.0)).powi(2)).sqrt() - 1.0;
        assert!((e - recomputed).abs() < 1e-15);
        assert!((e - 5.15e-4).abs() < 0.01e-4);
        assert_eq!(epsilon_p(3.0, 1, 4.0).unwrap(), Epsilon::Invalid);
        assert!(epsilon_p(2.0, 2, 1.0).is_err());
    }

    #[test]
    fn best_n_examples() {
        let (n, e) = best_n(1.5, ap_upper(1.5, 2.0).unwrap(), 200)
            .unwrap()
            .unwrap();
        assert!(e > 0.0 && n >= 1);
        let (n, e) = best_n(10.0, ap_upper(10.0, 2.0).unwrap(), 500)
            .unwrap()
            .unwrap();
        assert!(e > 0.0);
        assert!(crate::gfun::gamma(n).unwrap() > 0.9);
        assert_eq!(best_n(2.0, 4.0, 1).unwrap(), Some((1, 0.0)));
        assert_eq!(best_n(3.0, 4.0, 1).unwrap(), None);
    }

    #[test]
    fn report_flags_small_p() {
        let r = BoundsReport::compute(1.005, 10, 2.0).unwrap();
        assert!(r.out_of_validated_range);
        let r = BoundsReport::compute(3.0, 50, 2.0).unwrap();
        assert!(!r.out_of_validated_range);
        assert!(r.iz.is_none());
        assert_eq!(r.rows.len(), 50);
        assert!(r.rows.windows(2).all(|w| w[0].iterated < w[1].iterated));
        assert!(matches!(r.rows[0].epsilon, Epsilon::Invalid));
        assert!(r.best_epsilon.unwrap() > 0.0);
    }
}
