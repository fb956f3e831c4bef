//! Riemann and Hurwitz zeta functions on the whole plane.

use super::bernoulli::{bernoulli_f64, bernoulli_number, bernoulli_poly_exact};
use super::gamma::{gamma, nonpositive_integer};
use crate::error::{invalid, Result, SalError};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::f64::consts::PI;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn cpow(base: f64, s: Complex64) -> Complex64 {
    (s * base.ln()).exp()
}

// Euler–Maclaurin with an explicit head sum; reliable for moderate Re s.
fn hurwitz_em(s: Complex64, a: f64) -> Complex64 {
    let n_head = (s.norm().ceil() as usize + 15).max(20);
    let mut head = c(0.0);
    for n in 0..n_head {
        head += cpow(n as f64 + a, -s);
    }
    let x = n_head as f64 + a;
    let xs = cpow(x, -s);
    let mut sum = head + x * xs / (s - 1.0) + 0.5 * xs;
    // rising factorial s(s+1)...(s+2k-2) times x^{-s-2k+1}
    let mut poch = s;
    let mut xp = xs / x;
    let mut fact = 2.0;
    for k in 1..=80usize {
        let term = bernoulli_f64(2 * k) / fact * poch * xp;
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
        let kk = (2 * k) as f64;
        poch *= (s + kk - 1.0) * (s + kk);
        xp /= x * x;
        fact *= (kk + 1.0) * (kk + 2.0);
    }
    sum
}

/// Periodic zeta F(s, a) = Σ_{n≥1} e^{2πina} n^{-s} for Re s > 1.
fn periodic_zeta(s: Complex64, a: f64) -> Complex64 {
    let sigma = s.re;
    // tail after N terms is below N^{1-σ}/(σ-1)
    let target = 1e-17f64;
    let n = ((target * (sigma - 1.0)).ln() / (1.0 - sigma)).exp().ceil().clamp(50.0, 2.0e5) as usize;
    let mut sum = c(0.0);
    for k in (1..=n).rev() {
        let kf = k as f64;
        let ph = 2.0 * PI * ((kf * a).fract());
        sum += Complex64::from_polar(1.0, ph) * cpow(kf, -s);
    }
    sum
}

/// Riemann ζ(s).
pub fn riemann_zeta(s: Complex64) -> Result<Complex64> {
    if s == c(1.0) {
        return Err(SalError::Pole("Riemann zeta at s = 1".into()));
    }
    if let Some(m) = nonpositive_integer(s) {
        let m = m as usize;
        if m > 0 && m % 2 == 0 {
            return Ok(c(0.0));
        }
        if m + 1 < 240 {
            let b = bernoulli_number(m + 1)?.to_f64().unwrap_or(f64::NAN);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            return Ok(c(sign * b / (m as f64 + 1.0)));
        }
    }
    if s.re >= 0.5 {
        return Ok(hurwitz_em(s, 1.0));
    }
    let one_minus = 1.0 - s;
    let factor = cpow(2.0, s) * cpow(PI, s - 1.0) * (s * (PI / 2.0)).sin() * gamma(one_minus)?;
    Ok(factor * hurwitz_em(one_minus, 1.0))
}

/// ζ(-m, a) = -B_{m+1}(a)/(m+1), exact.
pub fn hurwitz_neg_int_exact(m: usize, a: &BigRational) -> Result<BigRational> {
    let b = bernoulli_poly_exact(m + 1, a)?;
    Ok(-b / BigRational::from_integer((m as i64 + 1).into()))
}

/// Hurwitz ζ(s, a) = Σ_{n≥0} (n+a)^{-s}, a > 0.
pub fn hurwitz_zeta(s: Complex64, a: f64) -> Result<Complex64> {
    if !(a > 0.0) {
        return invalid(format!("Hurwitz zeta needs a > 0, got {a}"));
    }
    if s == c(1.0) {
        return Err(SalError::Pole("Hurwitz zeta at s = 1".into()));
    }
    let twice = 2.0 * a;
    if twice == twice.round() && twice < 1e6 {
        let n = twice.round() as u64;
        if n % 2 == 0 {
            let mut v = riemann_zeta(s)?;
            for k in 1..n / 2 {
                v -= cpow(k as f64, -s);
            }
            return Ok(v);
        }
        let mut v = (cpow(2.0, s) - 1.0) * riemann_zeta(s)?;
        for k in 0..(n - 1) / 2 {
            v -= cpow(k as f64 + 0.5, -s);
        }
        return Ok(v);
    }
    if let Some(m) = nonpositive_integer(s) {
        if m < 200 {
            let b = super::bernoulli::bernoulli_poly(m as usize + 1, a)?;
            return Ok(c(-b / (m as f64 + 1.0)));
        }
    }
    if s.re > -3.0 {
        return Ok(hurwitz_em(s, a));
    }
    // ζ(1-w, a0) = Γ(w)/(2π)^w [e^{-πiw/2} F(w, a0) + e^{πiw/2} F(w, -a0)], 0 < a0 ≤ 1
    let shift = (a - 1.0).ceil().max(0.0);
    let a0 = a - shift;
    let w = 1.0 - s;
    let i_half = Complex64::new(0.0, PI / 2.0) * w;
    let base = gamma(w)? / cpow(2.0 * PI, w) * ((-i_half).exp() * periodic_zeta(w, a0) + i_half.exp() * periodic_zeta(w, 1.0 - a0));
    let mut v = base;
    for k in 0..shift as usize {
        v -= cpow(a0 + k as f64, -s);
    }
    Ok(v)
}

/// Leading Laurent data of ζ(s, a) at s = 1: (residue, constant) = (1, -ψ(a)).
pub fn hurwitz_pole_data(a: f64) -> Result<(Complex64, Complex64)> {
    let psi = super::gamma::digamma(c(a))?;
    Ok((c(1.0), -psi))
}
