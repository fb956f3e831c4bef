//! Truncated Laurent series in a local variable h = s - z.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Coefficients c_j of h^j for j = low, low+1, ..., low+len-1.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    pub low: i32,
    pub coeffs: Vec<Complex64>,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl Laurent {
    pub fn new(low: i32, coeffs: Vec<Complex64>) -> Self {
        Self { low, coeffs }
    }

    /// Constant series truncated after `len` terms.
    pub fn constant(v: Complex64, len: usize) -> Self {
        let mut coeffs = vec![c(0.0); len.max(1)];
        coeffs[0] = v;
        Self { low: 0, coeffs }
    }

    /// Highest power represented (exclusive upper bound of the truncation).
    pub fn high(&self) -> i32 {
        self.low + self.coeffs.len() as i32
    }

    /// Coefficient of h^j (zero outside the stored range).
    pub fn coeff(&self, j: i32) -> Complex64 {
        if j < self.low || j >= self.high() {
            c(0.0)
        } else {
            self.coeffs[(j - self.low) as usize]
        }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self { low: self.low, coeffs: self.coeffs.iter().map(|x| x * k).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let low = self.low.min(o.low);
        let high = self.high().min(o.high());
        let coeffs = (low..high).map(|j| self.coeff(j) + o.coeff(j)).collect();
        Self { low, coeffs }
    }

    /// Product, truncated to the precision both factors support.
    pub fn mul(&self, o: &Self) -> Self {
        let low = self.low + o.low;
        let len = self.coeffs.len().min(o.coeffs.len());
        let mut coeffs = vec![c(0.0); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            for (j, b) in o.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] += a * b;
            }
        }
        Self { low, coeffs }
    }

    /// Reciprocal; the leading stored coefficient must be nonzero.
    pub fn recip(&self) -> Self {
        let n = self.coeffs.len();
        let a0 = self.coeffs[0];
        let mut out = vec![c(0.0); n];
        out[0] = 1.0 / a0;
        for k in 1..n {
            let mut s = c(0.0);
            for j in 1..=k {
                s += self.coeffs[j] * out[k - j];
            }
            out[k] = -s / a0;
        }
        Self { low: -self.low, coeffs: out }
    }

    /// exp of a power series with low >= 0.
    pub fn exp(&self) -> Self {
        assert!(self.low >= 0, "exp needs a power series");
        let n = self.coeffs.len() + self.low as usize;
        let mut a = vec![c(0.0); n];
        for j in 0..n {
            a[j] = self.coeff(j as i32);
        }
        let e0 = a[0].exp();
        let mut out = vec![c(0.0); n];
        out[0] = e0;
        // b' = a' b
        for k in 1..n {
            let mut s = c(0.0);
            for j in 1..=k {
                s += a[j] * out[k - j] * j as f64;
            }
            out[k] = s / k as f64;
        }
        Self { low: 0, coeffs: out }
    }

    /// Series of f(z + λh) given series of f(z + h).
    pub fn rescale_var(&self, lambda: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, x)| x * lambda.powi(self.low + i as i32))
            .collect();
        Self { low: self.low, coeffs }
    }

    /// Drop leading zero coefficients (exact zeros only).
    pub fn normalize(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs[0] == c(0.0) {
            self.coeffs.remove(0);
            self.low += 1;
        }
        self
    }
}

/// Numerical Laurent coefficients of `f` around `z0` from the trapezoid rule
/// on a circle of radius `rho` (`m` nodes). Returns c_j for j in `range`.
pub fn laurent_fit<F: Fn(Complex64) -> Complex64>(
    f: F,
    z0: Complex64,
    rho: f64,
    m: usize,
    range: std::ops::RangeInclusive<i32>,
) -> Vec<Complex64> {
    let vals: Vec<Complex64> = (0..m)
        .map(|k| {
            let th = 2.0 * PI * (k as f64 + 0.5) / m as f64;
            f(z0 + Complex64::from_polar(rho, th))
        })
        .collect();
    range
        .map(|j| {
            let mut s = c(0.0);
            for (k, v) in vals.iter().enumerate() {
                let th = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                s += v * Complex64::from_polar(rho.powi(-j), -(j as f64) * th);
            }
            s / m as f64
        })
        .collect()
}
