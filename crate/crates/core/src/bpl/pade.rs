use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

/// Rational function `q(ξ)/r(ξ)` with `r₀ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PadeApproximant {
    pub num: Vec<C64>,
    pub den: Vec<C64>,
    /// How many times the denominator degree was lowered because the
    /// linear system for `r` was singular.
    pub degraded: usize,
}

impl PadeApproximant {
    pub fn num_degree(&self) -> usize {
        self.num.len() - 1
    }

    pub fn den_degree(&self) -> usize {
        self.den.len() - 1
    }

    pub fn numerator_at(&self, x: C64) -> C64 {
        horner(&self.num, x)
    }

    pub fn denominator_at(&self, x: C64) -> C64 {
        horner(&self.den, x)
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.numerator_at(x) / self.denominator_at(x)
    }

    /// `(value, derivative)` at `x`.
    pub fn eval_with_derivative(&self, x: C64) -> (C64, C64) {
        let (q, dq) = horner_with_derivative(&self.num, x);
        let (r, dr) = horner_with_derivative(&self.den, x);
        (q / r, (dq * r - q * dr) / (r * r))
    }

    /// Taylor coefficients of `q/r` through order `n`.
    pub fn expand(&self, n: usize) -> Vec<C64> {
        let mut out: Vec<C64> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let qk = self.num.get(k).copied().unwrap_or_default();
            let acc: C64 = (1..=k.min(self.den_degree())).map(|j| self.den[j] * out[k - j]).sum();
            out.push(qk - acc);
        }
        out
    }
}

fn horner(c: &[C64], x: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * x + a)
}

fn horner_with_derivative(c: &[C64], x: C64) -> (C64, C64) {
    let zero = C64::new(0.0, 0.0);
    c.iter().rev().fold((zero, zero), |(p, dp), &a| (p * x + a, dp * x + p))
}

/// `[dq/dr]` Padé approximant of a power series given by its first
/// `dq + dr + 1` (or more) coefficients.
///
/// A singular (or numerically useless) system for the denominator lowers
/// `dr` by one, raising `dq` by one so the matched order is kept, until it
/// solves; `dr = 0` is the truncated series itself.
pub fn pade_approximant(series: &[C64], dq: usize, dr: usize) -> Result<PadeApproximant> {
    if series.len() < dq + dr + 1 {
        return Err(Error::InvalidParameter(format!(
            "Pade [{dq}/{dr}] needs {} coefficients, got {}",
            dq + dr + 1,
            series.len()
        )));
    }
    let a = |k: isize| -> C64 {
        if k < 0 {
            C64::new(0.0, 0.0)
        } else {
            series[k as usize]
        }
    };
    let (mut dq, mut dr) = (dq, dr);
    let mut degraded = 0;
    loop {
        let den = if dr == 0 {
            Some(vec![C64::new(1.0, 0.0)])
        } else {
            solve_denominator(&a, dq, dr)
        };
        if let Some(den) = den {
            let num = (0..=dq)
                .map(|k| {
                    (0..=k.min(dr))
                        .map(|j| den[j] * a(k as isize - j as isize))
                        .sum()
                })
                .collect();
            let pade = PadeApproximant { num, den, degraded };
            if dr == 0 || reproduces(&pade, &series[..=dq + dr]) {
                return Ok(pade);
            }
        }
        dr -= 1;
        dq += 1;
        degraded += 1;
    }
}

/// A nearly singular system can return a denominator so large that `q/r`
/// no longer reproduces the series in floating point; such a solution is
/// treated like a singular one.
fn reproduces(pade: &PadeApproximant, series: &[C64]) -> bool {
    let scale = series.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let back = pade.expand(series.len() - 1);
    back.iter().zip(series).all(|(b, s)| (b - s).norm() <= 1e-11 * scale)
}

fn solve_denominator(a: &impl Fn(isize) -> C64, dq: usize, dr: usize) -> Option<Vec<C64>> {
    let m = DMatrix::from_fn(dr, dr, |row, col| a(dq as isize + row as isize - col as isize));
    let rhs = DVector::from_fn(dr, |row, _| -a((dq + 1 + row) as isize));
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let lu = m.lu();
    let pivot = lu.u().diagonal().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if pivot <= 1e-13 * scale {
        return None;
    }
    let r = lu.solve(&rhs)?;
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    let mut den = vec![C64::new(1.0, 0.0)];
    den.extend(r.iter());
    Some(den)
}
