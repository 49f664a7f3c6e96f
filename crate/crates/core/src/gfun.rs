//! The family `g_n` on `[-1/2, ∞)`, its increments `h_n`, the constants
//! `γ_n = g_n(0)`, and the series identities around them.
//!
//! `g_0 ≡ 0` and `g_n(t) = (1 + ∫_0^{1+2t} g_{n-1}) / (2(1+t))`. The closed
//! form used here is
//!
//! ```text
//! g_n(t) = log(2+2t)/(1+t) · Σ_{j=1}^{n} log^{j-2}(2^j (1+t)) / (2^j (j-1)!)
//! ```
//!
//! whose `j`-th term is `h_{j-1}(t)`. Terms are summed in ascending `j`
//! with compensated summation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

const LN2: f64 = std::f64::consts::LN_2;

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= -0.5 {
        Ok(())
    } else {
        Err(Error::DomainT { t, min: -0.5 })
    }
}

/// `ln(k!)` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = CompensatedSum::default();
    out.push(0.0);
    for k in 1..=n {
        acc.add((k as f64).ln());
        out.push(acc.value());
    }
    out
}

/// Term `j ≥ 1` of the closed-form sum, i.e. `h_{j-1}(t)`.
///
/// The `j = 1` term simplifies to `1/(2+2t)` exactly, which also covers the
/// removable singularity at `t = -1/2`.
fn series_term(j: usize, t: f64, ln_fact_jm1: f64) -> f64 {
    if j == 1 {
        return 1.0 / (2.0 + 2.0 * t);
    }
    let lead = (2.0 + 2.0 * t).ln();
    if lead == 0.0 {
        return 0.0;
    }
    let log_arg = j as f64 * LN2 + (1.0 + t).ln();
    let log_mag = (j as f64 - 2.0) * log_arg.ln() - j as f64 * LN2 - ln_fact_jm1;
    lead / (1.0 + t) * log_mag.exp()
}

/// `g_n(t)` from the closed form.
pub fn g_closed(n: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    let lf = ln_factorials(n);
    let mut acc = CompensatedSum::default();
    for j in 1..=n {
        acc.add(series_term(j, t, lf[j - 1]));
    }
    Ok(acc.value())
}

/// `h_n(t) = g_{n+1}(t) - g_n(t)`, evaluated in closed form.
pub fn h_closed(n: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    let lf = ln_factorials(n);
    Ok(series_term(n + 1, t, lf[n]))
}

/// `g_n(t)` through one step of the defining recursion, with the integral of
/// `g_{n-1}` (closed form) taken by adaptive Simpson to absolute tolerance
/// `tol`.
pub fn g_recursive(n: usize, t: f64, tol: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidOrder(n));
    }
    check_t(t)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let prev = n - 1;
    let lf = ln_factorials(prev);
    let integrand = |u: f64| {
        let mut acc = CompensatedSum::default();
        for j in 1..=prev {
            acc.add(series_term(j, u, lf[j - 1]));
        }
        acc.value()
    };
    let integral = if prev == 0 {
        0.0
    } else {
        adaptive_simpson(integrand, 0.0, 1.0 + 2.0 * t, tol).value
    };
    Ok((1.0 + integral) / (2.0 * (1.0 + t)))
}

/// Term `j` of the `γ` series, `(1/2) j^{j-2} / (j-1)! · (log 2 / 2)^{j-1}`,
/// generated by the ratio `term_{j+1} / term_j = (log 2 / 2)(1 + 1/j)^{j-1}`.
fn gamma_terms(n: usize) -> Vec<f64> {
    let c = LN2 / 2.0;
    let mut terms = Vec::with_capacity(n);
    let mut term = 0.5;
    for j in 1..=n {
        terms.push(term);
        let jf = j as f64;
        term *= c * ((jf - 1.0) * (1.0 / jf).ln_1p()).exp();
    }
    terms
}

/// `γ_n = g_n(0)`, summed from its own series.
pub fn gamma(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidOrder(n));
    }
    let mut acc = CompensatedSum::default();
    for t in gamma_terms(n) {
        acc.add(t);
    }
    Ok(acc.value())
}

/// `γ_1 … γ_N` with the series terms that produce them.
#[derive(Clone, Debug, Serialize)]
pub struct GammaTable {
    max_n: usize,
    gammas: Vec<f64>,
    terms: Vec<f64>,
}

impl GammaTable {
    pub fn build(max_n: usize) -> Result<Self> {
        if max_n == 0 {
            return Err(Error::InvalidOrder(0));
        }
        let terms = gamma_terms(max_n);
        let mut acc = CompensatedSum::default();
        let gammas = terms
            .iter()
            .map(|&t| {
                acc.add(t);
                acc.value()
            })
            .collect();
        Ok(Self {
            max_n,
            gammas,
            terms,
        })
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// `γ_n` for `1 ≤ n ≤ max_n`.
    pub fn gamma(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.gammas.get(i)).copied()
    }

    pub fn term(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.terms.get(i)).copied()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }
}

/// `(n, t, g_n(t))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GFamilyPoint {
    pub n: usize,
    pub t: f64,
    pub value: f64,
}

impl GFamilyPoint {
    pub fn evaluate(n: usize, t: f64) -> Result<Self> {
        let value = g_closed(n, t)?;
        Ok(Self { n, t, value })
    }
}

/// Partial sum `Σ_{k=0}^{K} x (x + k log 2)^{k-1} 2^{-k} / k!` with
/// `x = log(2+2t)`; tends to `2 + 2t`.
pub fn lagrange_sum(t: f64, max_k: usize) -> Result<f64> {
    check_t(t)?;
    let x = (2.0 + 2.0 * t).ln();
    let mut acc = CompensatedSum::default();
    // k = 0 contributes x · x^{-1} = 1, including the limit at x = 0
    acc.add(1.0);
    if x == 0.0 {
        return Ok(acc.value());
    }
    let lf = ln_factorials(max_k);
    for k in 1..=max_k {
        let kf = k as f64;
        let log_mag = x.ln() + (kf - 1.0) * (x + kf * LN2).ln() - kf * LN2 - lf[k];
        acc.add(log_mag.exp());
    }
    Ok(acc.value())
}

/// `1 - (√8/3)^n √(1+t)`, the inductive lower bound for `g_n(t)`.
pub fn inductive_lower_bound(n: usize, t: f64) -> f64 {
    1.0 - (8f64.sqrt() / 3.0).powi(n as i32) * (1.0 + t).sqrt()
}

/// Whether `g_n(t)` lies in `[1 - (√8/3)^n √(1+t), 1]` (with `1e-12` slack).
pub fn inductive_bound_check(n: usize, t: f64) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidOrder(n));
    }
    if t < 0.0 {
        return Err(Error::DomainT { t, min: 0.0 });
    }
    let g = g_closed(n, t)?;
    Ok(g >= inductive_lower_bound(n, t) - 1e-12 && g <= 1.0 + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    const G2_0: f64 = 0.5 + LN2 / 4.0;

    #[test]
    fn g_closed_examples() {
        assert_eq!(g_closed(0, 0.7).unwrap(), 0.0);
        assert_eq!(g_closed(1, 0.0).unwrap(), 0.5);
        for t in [-0.5, 0.0, 0.3, 4.0] {
            assert!((g_closed(1, t).unwrap() - 1.0 / (2.0 + 2.0 * t)).abs() < 1e-15);
        }
        assert!((g_closed(2, 0.0).unwrap() - G2_0).abs() < 1e-15);
        assert!((G2_0 - 0.673_286_7).abs() < 1e-7);
        assert!(g_closed(3, -0.6).is_err());
    }

    #[test]
    fn g_at_left_endpoint() {
        // only the j = 1 term survives at t = -1/2
        for n in 1..10 {
            assert!((g_closed(n, -0.5).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn g_recursive_examples() {
        assert_eq!(g_recursive(1, 0.0, 1e-10).unwrap(), 0.5);
        assert!((g_recursive(2, 0.0, 1e-10).unwrap() - g_closed(2, 0.0).unwrap()).abs() < 1e-10);
        assert!((g_recursive(5, 1.0, 1e-9).unwrap() - g_closed(5, 1.0).unwrap()).abs() < 1e-9);
        assert!(g_recursive(0, 0.0, 1e-9).is_err());
        assert!(g_recursive(2, 0.0, 0.0).is_err());
        assert!(g_recursive(2, -1.0, 1e-9).is_err());
    }

    #[test]
    fn h_closed_examples() {
        assert_eq!(h_closed(0, 0.0).unwrap(), 0.5);
        assert!((h_closed(1, 0.0).unwrap() - LN2 / 4.0).abs() < 1e-16);
        assert_eq!(h_closed(0, -0.5).unwrap(), 1.0);
        for n in 0..20 {
            for t in [-0.4, 0.0, 0.5, 3.0] {
                let diff = g_closed(n + 1, t).unwrap() - g_closed(n, t).unwrap();
                assert!((h_closed(n, t).unwrap() - diff).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(1).unwrap(), 0.5);
        assert!((gamma(2).unwrap() - G2_0).abs() < 1e-16);
        assert!(gamma(0).is_err());
        let table = GammaTable::build(300).unwrap();
        assert!(table.gammas().windows(2).all(|w| w[0] < w[1]));
        assert!(table.gammas().iter().all(|&g| g > 0.0 && g < 1.0));
        assert_eq!(table.gamma(2), Some(gamma(2).unwrap()));
        assert_eq!(table.gamma(0), None);
    }

    #[test]
    fn lagrange_examples() {
        assert!((lagrange_sum(0.0, 500).unwrap() - 2.0).abs() < 1e-9);
        for k in [0, 1, 7] {
            assert_eq!(lagrange_sum(-0.5, k).unwrap(), 1.0);
        }
        assert!((lagrange_sum(1.0, 400).unwrap() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn inductive_bound_examples() {
        assert!(inductive_bound_check(1, 0.0).unwrap());
        assert!((inductive_lower_bound(1, 0.0) - 0.0572).abs() < 1e-4);
        assert!(inductive_bound_check(1, 10.0).unwrap());
        assert!(inductive_lower_bound(1, 10.0) < 0.0);
        assert!(inductive_bound_check(30, 0.0).unwrap());
        assert!((inductive_lower_bound(30, 0.0) - 0.829).abs() < 1e-3);
        assert!(inductive_bound_check(3, -0.1).is_err());
    }
}
