//! Exact evaluation of C-finite recurrences and their rational generating
//! functions.
//!
//! A [`Recurrence`] is `f_n = a_1 f_{n-1} + ... + a_k f_{n-k}` with
//! `f_0 = 1`. With [`Inits::Default`] every `f_h` for `h < 0` is zero; with
//! [`Inits::Explicit`] the values `f_1 .. f_{k-1}` are given.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Initial-condition policy of a recurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inits {
    /// `f_0 = 1` and `f_h = 0` for `h < 0`.
    Default,
    /// `f_0 = 1` and `f_i = h_i` for `1 <= i < k`.
    Explicit(Vec<BigInt>),
}

impl Inits {
    pub fn is_default(&self) -> bool {
        matches!(self, Inits::Default)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recurrence {
    coeffs: Vec<BigInt>,
    inits: Inits,
}

impl Recurrence {
    pub fn new(coeffs: Vec<BigInt>, inits: Inits) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidRecurrence("at least one coefficient is required".into()));
        }
        if coeffs.last().is_some_and(Zero::is_zero) {
            return Err(Error::InvalidRecurrence(
                "trailing coefficient a_k must be nonzero".into(),
            ));
        }
        if let Inits::Explicit(h) = &inits {
            if h.len() != coeffs.len() - 1 {
                return Err(Error::InvalidRecurrence(format!(
                    "expected {} initial values (f_1..f_{}), got {}",
                    coeffs.len() - 1,
                    coeffs.len() - 1,
                    h.len()
                )));
            }
        }
        Ok(Self { coeffs, inits })
    }

    /// Recurrence with default initial conditions.
    pub fn with_default_inits<I, T>(coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        Self::new(coeffs.into_iter().map(Into::into).collect(), Inits::Default)
    }

    /// Recurrence with explicit `f_1 .. f_{k-1}`.
    pub fn with_inits<I, T, J, U>(coeffs: I, inits: J) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
        J: IntoIterator<Item = U>,
        U: Into<BigInt>,
    {
        Self::new(
            coeffs.into_iter().map(Into::into).collect(),
            Inits::Explicit(inits.into_iter().map(Into::into).collect()),
        )
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn inits(&self) -> &Inits {
        &self.inits
    }

    /// Degree `k`.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// The same coefficients with default initial conditions.
    pub fn core(&self) -> Recurrence {
        Recurrence { coeffs: self.coeffs.clone(), inits: Inits::Default }
    }

    /// Coefficients narrowed to machine integers, for label arithmetic.
    pub fn small_coeffs(&self) -> Result<Vec<i64>> {
        narrow(&self.coeffs)
    }

    pub fn small_inits(&self) -> Result<Option<Vec<i64>>> {
        match &self.inits {
            Inits::Default => Ok(None),
            Inits::Explicit(h) => narrow(h).map(Some),
        }
    }
}

fn narrow(values: &[BigInt]) -> Result<Vec<i64>> {
    values
        .iter()
        .map(|v| v.to_i64().ok_or_else(|| Error::Overflow(format!("{v} does not fit in 64 bits"))))
        .collect()
}

impl fmt::Display for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f(n) =")?;
        let mut first = true;
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let sign = if a.is_negative() { "-" } else { "+" };
            if first {
                if a.is_negative() {
                    write!(f, " -")?;
                }
                write!(f, " ")?;
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let abs = a.abs();
            if !abs.is_one() {
                write!(f, "{abs}*")?;
            }
            write!(f, "f(n-{})", i + 1)?;
        }
        match &self.inits {
            Inits::Default => write!(f, ", f(0) = 1, f(h<0) = 0"),
            Inits::Explicit(h) => {
                write!(f, ", f(0) = 1")?;
                for (i, v) in h.iter().enumerate() {
                    write!(f, ", f({}) = {v}", i + 1)?;
                }
                Ok(())
            }
        }
    }
}

/// Terms `f_0 ..= f_n`.
pub fn eval_sequence(rec: &Recurrence, n: usize) -> Vec<BigInt> {
    let k = rec.order();
    let mut f: Vec<BigInt> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let term = if m == 0 {
            BigInt::one()
        } else {
            match &rec.inits {
                Inits::Explicit(h) if m < k => h[m - 1].clone(),
                _ => rec
                    .coeffs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i < m)
                    .map(|(i, a)| a * &f[m - i - 1])
                    .sum(),
            }
        };
        f.push(term);
    }
    f
}

/// Rational power series `numerator / denominator` with integer coefficients.
/// Polynomials are stored low degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalGF {
    numerator: Vec<BigInt>,
    denominator: Vec<BigInt>,
}

impl RationalGF {
    pub fn new(numerator: Vec<BigInt>, denominator: Vec<BigInt>) -> Result<Self> {
        if denominator.first().is_none_or(|c| !c.is_one()) {
            return Err(Error::InvalidRecurrence(
                "generating function denominator must have constant term 1".into(),
            ));
        }
        Ok(Self { numerator: trim(numerator), denominator: trim(denominator) })
    }

    pub fn numerator(&self) -> &[BigInt] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[BigInt] {
        &self.denominator
    }
}

fn trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    if p.is_empty() {
        p.push(BigInt::zero());
    }
    p
}

/// Renders an integer polynomial in `x`, e.g. `1 - 3x - 2x^2 + x^3`.
pub fn format_poly(p: &[BigInt]) -> String {
    let mut out = String::new();
    for (i, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let abs = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        let mono = match i {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{i}"),
        };
        if i == 0 || !abs.is_one() {
            out.push_str(&abs.to_string());
        }
        out.push_str(&mono);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for RationalGF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", format_poly(&self.numerator), format_poly(&self.denominator))
    }
}

/// Denominator `1 - a_1 x - ... - a_k x^k`; the numerator is the first `k`
/// terms of the sequence multiplied by the denominator, truncated below
/// degree `k` (just `1` for default initial conditions).
pub fn generating_function(rec: &Recurrence) -> RationalGF {
    let k = rec.order();
    let mut denominator = Vec::with_capacity(k + 1);
    denominator.push(BigInt::one());
    denominator.extend(rec.coeffs.iter().map(|a| -a));

    let numerator = match rec.inits {
        Inits::Default => vec![BigInt::one()],
        Inits::Explicit(_) => {
            let prefix = eval_sequence(rec, k - 1);
            (0..k)
                .map(|d| (0..=d).map(|i| &prefix[i] * &denominator[d - i]).sum())
                .collect()
        }
    };
    RationalGF { numerator: trim(numerator), denominator }
}

/// First `n + 1` coefficients of the power-series expansion.
pub fn series_of_gf(gf: &RationalGF, n: usize) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut c = gf.numerator.get(m).cloned().unwrap_or_default();
        for (i, d) in gf.denominator.iter().enumerate().skip(1).take(m) {
            c -= d * &out[m - i];
        }
        out.push(c);
    }
    out
}
