//! Compactly supported, nonnegative step functions with exact rational
//! breakpoints and values.
//!
//! A [`StepFunction`] is kept in canonical form: adjacent pieces never share
//! a value and the outermost pieces are nonzero. The zero function has no
//! breakpoints at all.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `num / den` as an exact rational.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact conversion of a finite double (every double is a dyadic rational).
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `p/q` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let r: Rational = s
        .parse()
        .map_err(|_| Error::Parse(format!("not a rational: {s:?}")))?;
    Ok(r)
}

/// Formats as `p/q`, or as an integer when the denominator is 1.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StepFunction {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl StepFunction {
    /// Builds a canonical step function; `values[i]` is the value on
    /// `(breakpoints[i], breakpoints[i + 1])`.
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        let expected = breakpoints.len().saturating_sub(1);
        if values.len() != expected || (breakpoints.len() == 1 && !values.is_empty()) {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        for i in 1..breakpoints.len() {
            if breakpoints[i] <= breakpoints[i - 1] {
                return Err(Error::NonIncreasingBreakpoints(i));
            }
        }
        for (index, v) in values.iter().enumerate() {
            if v.is_negative() {
                return Err(Error::NegativeValue {
                    index,
                    value: format_rational(v),
                });
            }
        }
        Ok(Self::canonicalize(breakpoints, values))
    }

    pub fn zero() -> Self {
        Self {
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    /// `value · χ_[a, b]`.
    pub fn indicator(a: Rational, b: Rational, value: Rational) -> Result<Self> {
        Self::new(vec![a, b], vec![value])
    }

    fn canonicalize(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Self {
        if values.is_empty() {
            return Self::zero();
        }
        let mut bps: Vec<Rational> = Vec::with_capacity(breakpoints.len());
        let mut vals: Vec<Rational> = Vec::with_capacity(values.len());
        let mut bp_iter = breakpoints.into_iter();
        bps.push(bp_iter.next().unwrap());
        for (v, right) in values.into_iter().zip(bp_iter) {
            match vals.last() {
                Some(last) if *last == v => {
                    *bps.last_mut().unwrap() = right;
                }
                _ => {
                    vals.push(v);
                    bps.push(right);
                }
            }
        }
        // trim zero pieces at either end
        let first = vals.iter().position(|v| !v.is_zero());
        let Some(first) = first else {
            return Self::zero();
        };
        let last = vals.iter().rposition(|v| !v.is_zero()).unwrap();
        let values = vals[first..=last].to_vec();
        let breakpoints = bps[first..=last + 1].to_vec();
        Self {
            breakpoints,
            values,
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// `[x_0, x_m]`, or `None` for the zero function.
    pub fn support(&self) -> Option<(&Rational, &Rational)> {
        Some((self.breakpoints.first()?, self.breakpoints.last()?))
    }

    pub fn max_value(&self) -> Rational {
        self.values
            .iter()
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// `∫ f`.
    pub fn mass(&self) -> Rational {
        self.piece_masses().fold(Rational::zero(), |acc, m| acc + m)
    }

    fn piece_masses(&self) -> impl Iterator<Item = Rational> + '_ {
        self.values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, w)| v * (&w[1] - &w[0]))
    }

    /// Index of the piece containing `x` in its interior together with the
    /// piece value, or the location of `x` relative to the breakpoints.
    fn locate(&self, x: &Rational) -> Location {
        match self.breakpoints.binary_search(x) {
            Ok(i) => Location::Breakpoint(i),
            Err(0) => Location::Outside,
            Err(i) if i == self.breakpoints.len() => Location::Outside,
            Err(i) => Location::Interior(i - 1),
        }
    }

    /// Limit of `f(y)` as `y → x⁻`.
    pub fn left_limit(&self, x: &Rational) -> Rational {
        match self.locate(x) {
            Location::Outside => Rational::zero(),
            Location::Interior(i) => self.values[i].clone(),
            Location::Breakpoint(0) => Rational::zero(),
            Location::Breakpoint(i) => self.values[i - 1].clone(),
        }
    }

    /// Limit of `f(y)` as `y → x⁺`.
    pub fn right_limit(&self, x: &Rational) -> Rational {
        match self.locate(x) {
            Location::Outside => Rational::zero(),
            Location::Interior(i) => self.values[i].clone(),
            Location::Breakpoint(i) if i == self.values.len() => Rational::zero(),
            Location::Breakpoint(i) => self.values[i].clone(),
        }
    }

    /// Piece value at interior points; mean of the one-sided limits at a
    /// breakpoint.
    pub fn value_at(&self, x: &Rational) -> Rational {
        match self.locate(x) {
            Location::Breakpoint(_) => (self.left_limit(x) + self.right_limit(x)) / int(2),
            _ => self.left_limit(x),
        }
    }

    pub fn prefix(&self) -> PrefixIntegral {
        let mut cumulative = Vec::with_capacity(self.breakpoints.len());
        let mut acc = Rational::zero();
        cumulative.push(acc.clone());
        for m in self.piece_masses() {
            acc += m;
            cumulative.push(acc.clone());
        }
        PrefixIntegral {
            breakpoints: self.breakpoints.clone(),
            cumulative,
        }
    }

    /// Exact mean of `f` over `[a, b]`.
    pub fn average(&self, a: &Rational, b: &Rational) -> Result<Rational> {
        if a >= b {
            return Err(Error::EmptyInterval {
                a: format_rational(a),
                b: format_rational(b),
            });
        }
        let prefix = self.prefix();
        Ok((prefix.eval(b) - prefix.eval(a)) / (b - a))
    }

    /// `‖f‖_p`; exact except for the floating-point `v^p`.
    pub fn lp_norm_p(&self, p: f64) -> Result<f64> {
        Ok(self.lp_norm_pow(p)?.powf(1.0 / p))
    }

    /// `‖f‖_p^p`.
    pub fn lp_norm_pow(&self, p: f64) -> Result<f64> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidExponent(p));
        }
        Ok(self
            .values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, w)| to_f64(v).powf(p) * to_f64(&(&w[1] - &w[0])))
            .sum())
    }

    /// `|{f > λ}|`.
    pub fn level_measure(&self, lambda: &Rational) -> Result<Rational> {
        check_level(lambda)?;
        Ok(self
            .values
            .iter()
            .zip(self.breakpoints.windows(2))
            .filter(|(v, _)| *v > lambda)
            .fold(Rational::zero(), |acc, (_, w)| acc + (&w[1] - &w[0])))
    }

    /// `∫_{f > λ} f`.
    pub fn integral_over_superlevel(&self, lambda: &Rational) -> Result<Rational> {
        check_level(lambda)?;
        Ok(self
            .values
            .iter()
            .zip(self.breakpoints.windows(2))
            .filter(|(v, _)| *v > lambda)
            .fold(Rational::zero(), |acc, (v, w)| acc + v * (&w[1] - &w[0])))
    }

    /// `c · f` for `c ≥ 0`.
    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        Self::new(
            self.breakpoints.clone(),
            self.values.iter().map(|v| v * c).collect(),
        )
    }

    /// `x ↦ f(s·x + t)` for `s > 0`.
    pub fn compose_affine(&self, s: &Rational, t: &Rational) -> Result<Self> {
        if !s.is_positive() {
            return Err(Error::OutOfRange("dilation factor must be positive".into()));
        }
        let bps = self.breakpoints.iter().map(|x| (x - t) / s).collect();
        Self::new(bps, self.values.clone())
    }

    /// Serializes in the `stepfn v1` text format.
    pub fn to_text(&self) -> String {
        let mut out = String::from("stepfn v1\n");
        let join = |xs: &[Rational]| xs.iter().map(format_rational).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{}", join(&self.breakpoints));
        let _ = writeln!(out, "{}", join(&self.values));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some("stepfn v1") => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header `stepfn v1`, got {other:?}"
                )))
            }
        }
        let parse_line = |line: Option<&str>| -> Result<Vec<Rational>> {
            line.unwrap_or("")
                .split_whitespace()
                .map(parse_rational)
                .collect()
        };
        let breakpoints = parse_line(lines.next())?;
        let values = parse_line(lines.next())?;
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("unexpected trailing line {extra:?}")));
        }
        Self::new(breakpoints, values)
    }
}

fn check_level(lambda: &Rational) -> Result<()> {
    if lambda.is_negative() {
        Err(Error::NegativeLevel(format_rational(lambda)))
    } else {
        Ok(())
    }
}

enum Location {
    Outside,
    Interior(usize),
    Breakpoint(usize),
}

/// Continuous piecewise-linear antiderivative `I(x) = ∫_{-∞}^x f`.
#[derive(Clone, Debug)]
pub struct PrefixIntegral {
    breakpoints: Vec<Rational>,
    cumulative: Vec<Rational>,
}

impl PrefixIntegral {
    pub fn eval(&self, x: &Rational) -> Rational {
        let bps = &self.breakpoints;
        if bps.is_empty() || x <= &bps[0] {
            return Rational::zero();
        }
        match bps.binary_search(x) {
            Ok(i) => self.cumulative[i].clone(),
            Err(i) if i == bps.len() => self.cumulative[i - 1].clone(),
            Err(i) => {
                let (x0, x1) = (&bps[i - 1], &bps[i]);
                let (i0, i1) = (&self.cumulative[i - 1], &self.cumulative[i]);
                i0 + (i1 - i0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn total(&self) -> Rational {
        self.cumulative
            .last()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    /// `I(x_k)` at each breakpoint.
    pub fn cumulative(&self) -> &[Rational] {
        &self.cumulative
    }
}
