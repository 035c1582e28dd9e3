use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::C64;

/// Truncated power series `Σ_{k≤p} a_k τ^k` with complex coefficients.
///
/// All arithmetic truncates at the common order, so evaluating a
/// right-hand side on jets gives its Taylor coefficients exactly up to `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorJet {
    coeffs: Vec<C64>,
}

impl TaylorJet {
    pub fn new(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least the constant term");
        Self { coeffs }
    }

    pub fn constant(value: C64, order: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// The independent variable `value + τ`.
    pub fn variable(value: C64, order: usize) -> Self {
        let mut jet = Self::constant(value, order);
        if order >= 1 {
            jet.coeffs[1] = C64::new(1.0, 0.0);
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * s).collect())
    }

    pub fn exp(&self) -> Self {
        let a = &self.coeffs;
        let mut e = vec![a[0].exp()];
        for k in 1..a.len() {
            let sum: C64 = (1..=k).map(|j| a[j] * e[k - j] * j as f64).sum();
            e.push(sum / k as f64);
        }
        Self::new(e)
    }

    /// `(sin, cos)` by their coupled recurrence.
    pub fn sin_cos(&self) -> (Self, Self) {
        let a = &self.coeffs;
        let mut s = vec![a[0].sin()];
        let mut c = vec![a[0].cos()];
        for k in 1..a.len() {
            let ds: C64 = (1..=k).map(|j| a[j] * c[k - j] * j as f64).sum();
            let dc: C64 = (1..=k).map(|j| a[j] * s[k - j] * j as f64).sum();
            s.push(ds / k as f64);
            c.push(-dc / k as f64);
        }
        (Self::new(s), Self::new(c))
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    pub fn recip(&self) -> Self {
        Self::constant(C64::new(1.0, 0.0), self.order()) / self
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = Self::constant(C64::new(1.0, 0.0), self.order());
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        result
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Self::new((0..n).map(|k| f(self.coeffs[k], rhs.coeffs[k])).collect())
    }
}

impl Add for &TaylorJet {
    type Output = TaylorJet;
    fn add(self, rhs: &TaylorJet) -> TaylorJet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &TaylorJet {
    type Output = TaylorJet;
    fn sub(self, rhs: &TaylorJet) -> TaylorJet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &TaylorJet {
    type Output = TaylorJet;
    fn mul(self, rhs: &TaylorJet) -> TaylorJet {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let (a, b) = (&self.coeffs, &rhs.coeffs);
        TaylorJet::new((0..n).map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum()).collect())
    }
}

impl Div for &TaylorJet {
    type Output = TaylorJet;
    fn div(self, rhs: &TaylorJet) -> TaylorJet {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let (a, b) = (&self.coeffs, &rhs.coeffs);
        let mut q: Vec<C64> = Vec::with_capacity(n);
        for k in 0..n {
            let acc: C64 = (1..=k).map(|j| b[j] * q[k - j]).sum();
            q.push((a[k] - acc) / b[0]);
        }
        TaylorJet::new(q)
    }
}

impl Neg for &TaylorJet {
    type Output = TaylorJet;
    fn neg(self) -> TaylorJet {
        TaylorJet::new(self.coeffs.iter().map(|a| -a).collect())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for TaylorJet {
            type Output = TaylorJet;
            fn $m(self, rhs: TaylorJet) -> TaylorJet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&TaylorJet> for TaylorJet {
            type Output = TaylorJet;
            fn $m(self, rhs: &TaylorJet) -> TaylorJet {
                (&self).$m(rhs)
            }
        }
        impl $tr<TaylorJet> for &TaylorJet {
            type Output = TaylorJet;
            fn $m(self, rhs: TaylorJet) -> TaylorJet {
                self.$m(&rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for TaylorJet {
    type Output = TaylorJet;
    fn neg(self) -> TaylorJet {
        -&self
    }
}

impl Mul<f64> for &TaylorJet {
    type Output = TaylorJet;
    fn mul(self, s: f64) -> TaylorJet {
        self.scale(C64::new(s, 0.0))
    }
}

impl Mul<f64> for TaylorJet {
    type Output = TaylorJet;
    fn mul(self, s: f64) -> TaylorJet {
        self.scale(C64::new(s, 0.0))
    }
}

impl Add<f64> for TaylorJet {
    type Output = TaylorJet;
    fn add(mut self, s: f64) -> TaylorJet {
        self.coeffs[0] += s;
        self
    }
}
