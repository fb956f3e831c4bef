//! Complex Gamma, reciprocal Gamma, polygamma and Laurent data of Γ.

use super::bernoulli::bernoulli_f64;
use crate::error::{Result, SalError};
use crate::laurent::Laurent;
use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Nonpositive integer test (exact).
pub fn nonpositive_integer(z: Complex64) -> Option<u64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        Some((-z.re) as u64)
    } else {
        None
    }
}

// ln Γ(z) for Re z >= 1/2 (principal-ish branch, only used through exp).
fn ln_gamma_right(z: Complex64) -> Complex64 {
    let z1 = z - 1.0;
    let mut a = c(LANCZOS[0]);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        a += p / (z1 + i as f64);
    }
    let t = z1 + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z1 + 0.5) * t.ln() - t + a.ln()
}

// Γ for large positive real part is better served by Stirling with shifts;
// Lanczos keeps ~1e-15 relative accuracy over the range used here.
fn gamma_right(z: Complex64) -> Complex64 {
    ln_gamma_right(z).exp()
}

fn sin_pi(z: Complex64) -> Complex64 {
    // reduce the real part to keep sin accurate
    let r = z.re - 2.0 * (z.re / 2.0).round();
    (Complex64::new(r, z.im) * PI).sin()
}

// ln Γ(z) = ln Γ(z+m) - Σ_{j<m} ln(z+j), m chosen so Re(z+m) ≥ 1/2.
fn ln_gamma_shifted(z: Complex64) -> Complex64 {
    let m = (0.5 - z.re).ceil().max(0.0) as usize;
    let mut v = ln_gamma_right(z + m as f64);
    for j in 0..m {
        v -= (z + j as f64).ln();
    }
    v
}

/// Γ(z). Errors at nonpositive integers.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    if let Some(k) = nonpositive_integer(z) {
        return Err(SalError::Pole(format!("Gamma at -{k}")));
    }
    if z.re >= 0.5 {
        Ok(gamma_right(z))
    } else if z.im.abs() > 20.0 {
        // reflection overflows sin and underflows Γ(1-z) far from the real axis
        Ok(ln_gamma_shifted(z).exp())
    } else {
        Ok(PI / (sin_pi(z) * gamma_right(1.0 - z)))
    }
}

/// 1/Γ(z), entire.
pub fn rgamma(z: Complex64) -> Complex64 {
    if nonpositive_integer(z).is_some() {
        return c(0.0);
    }
    if z.re >= 0.5 {
        (-ln_gamma_right(z)).exp()
    } else {
        sin_pi(z) * gamma_right(1.0 - z) / PI
    }
}

/// ln Γ(z) for Re z >= 1/2 or via reflection (branch not normalized).
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if let Some(k) = nonpositive_integer(z) {
        return Err(SalError::Pole(format!("log Gamma at -{k}")));
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_right(z))
    } else if z.im.abs() > 20.0 {
        Ok(ln_gamma_shifted(z))
    } else {
        Ok(c(PI.ln()) - sin_pi(z).ln() - ln_gamma_right(1.0 - z))
    }
}

/// Real Γ(x).
pub fn gamma_real(x: f64) -> f64 {
    gamma(c(x)).map(|v| v.re).unwrap_or(f64::NAN)
}

/// Polygamma ψ^{(m)}(z); m = 0 is the digamma function.
pub fn polygamma(m: u32, z: Complex64) -> Result<Complex64> {
    if let Some(k) = nonpositive_integer(z) {
        return Err(SalError::Pole(format!("polygamma at -{k}")));
    }
    let mut w = z;
    let mut shift = c(0.0);
    let mf = factorial(m);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    while w.norm() < 20.0 || w.re < 10.0 {
        shift += w.powi(-(m as i32) - 1);
        w += 1.0;
    }
    let mut asym;
    if m == 0 {
        asym = w.ln() - 0.5 / w;
        let w2 = w * w;
        let mut wp = w2;
        for k in 1..=15usize {
            asym -= bernoulli_f64(2 * k) / (2.0 * k as f64) / wp;
            wp *= w2;
        }
    } else {
        let mm = m as i32;
        asym = factorial(m - 1) / w.powi(mm) + mf / (2.0 * w.powi(mm + 1));
        for k in 1..=15usize {
            let num = bernoulli_f64(2 * k) * factorial(2 * k as u32 + m - 1) / factorial(2 * k as u32);
            asym += num / w.powi(2 * k as i32 + mm);
        }
        if m % 2 == 0 {
            asym = -asym;
        }
    }
    Ok(asym - shift * sign * mf)
}

/// ψ(z).
pub fn digamma(z: Complex64) -> Result<Complex64> {
    polygamma(0, z)
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// Laurent series of Γ(z + h) with `len` stored coefficients starting at
/// h^{-1} for poles and h^0 otherwise.
pub fn gamma_series(z: Complex64, len: usize) -> Laurent {
    let log_series = |z0: Complex64| -> Laurent {
        let mut cs = vec![c(0.0); len];
        for (m, slot) in cs.iter_mut().enumerate().skip(1) {
            let p = polygamma(m as u32 - 1, z0).expect("regular point");
            *slot = p / factorial(m as u32);
        }
        Laurent::new(0, cs)
    };
    match nonpositive_integer(z) {
        None => log_series(z).exp().scale(gamma(z).expect("regular point")),
        Some(k) => {
            // Γ(-k+h) = Γ(1+h) / (h (h-1)(h-2)...(h-k))
            let num = log_series(c(1.0)).exp();
            let mut den = Laurent::new(1, {
                let mut v = vec![c(0.0); len];
                v[0] = c(1.0);
                v
            });
            for j in 1..=k {
                let mut v = vec![c(0.0); len];
                v[0] = c(-(j as f64));
                if len > 1 {
                    v[1] = c(1.0);
                }
                den = den.mul(&Laurent::new(0, v));
            }
            num.mul(&den.recip())
        }
    }
}

/// Γ_j(z): coefficient of (s-z)^j in the Laurent expansion of Γ(s) at z.
pub fn gamma_laurent(z: Complex64, j: i32) -> Complex64 {
    if j < -1 {
        return c(0.0);
    }
    let len = (j + 3).max(2) as usize;
    gamma_series(z, len).coeff(j)
}
