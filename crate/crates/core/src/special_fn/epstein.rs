//! Lattice zeta functions over ℤ^d with an optional half-integer shift.

use super::gamma::rgamma;
use super::incgamma::misra_e;
use crate::error::{invalid, Result, SalError};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Shell data of the shifted lattice: for each integer `norm` = Σ (2k_j + s_j)²,
/// the number of lattice points on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Shell {
    pub norm: u64,
    pub count: u64,
}

/// Enumerate shells with norm ≤ `max_norm` for the lattice 2ℤ^d + s.
pub fn lattice_shells(d: usize, spin: &[u8], max_norm: u64) -> Vec<Shell> {
    let len = max_norm as usize + 1;
    let mut count = vec![0u64; len];
    count[0] = 1;
    for j in 0..d {
        let s = *spin.get(j).unwrap_or(&0) as i64;
        let mut next_c = vec![0u64; len];
        let kmax = ((max_norm as f64).sqrt() / 2.0).ceil() as i64 + 1;
        for k in -kmax..=kmax {
            let v = (2 * k + s) * (2 * k + s);
            if v as u64 > max_norm {
                continue;
            }
            for n in 0..len - v as usize {
                next_c[n + v as usize] += count[n];
            }
        }
        count = next_c;
    }
    (0..len)
        .filter(|&n| count[n] > 0)
        .map(|n| Shell { norm: n as u64, count: count[n] })
        .collect()
}

/// Z(s; c) = Σ_{k+c≠0} |k+c|^{-s}, c = spin/2, continued to all s ≠ d.
pub fn lattice_zeta(s: Complex64, d: usize, spin: &[u8]) -> Result<Complex64> {
    if d == 0 {
        return invalid("lattice dimension must be positive");
    }
    let df = d as f64;
    if s == Complex64::new(df, 0.0) {
        return Err(SalError::Pole(format!("lattice zeta at s = {d}")));
    }
    let shifted = spin.iter().any(|&b| b != 0);
    let a1 = s / 2.0;
    let a2 = (df - s) / 2.0;
    let r2 = (a1.norm().max(a2.norm()) + 45.0) / PI;
    // norms of 2(k+c) and 2m are 4|k+c|² and 4|m|²
    let max_norm = (4.0 * r2).ceil() as u64;
    let direct = lattice_shells(d, spin, max_norm);
    let dual = lattice_shells(d, &[], max_norm);
    let phases = if shifted { phase_weights(d, spin, max_norm) } else { Vec::new() };
    let mut sum = Complex64::new(0.0, 0.0);
    for sh in direct.iter().rev().filter(|sh| sh.norm > 0) {
        sum += sh.count as f64 * misra_e(a1, PI * sh.norm as f64 / 4.0)?;
    }
    for sh in dual.iter().rev().filter(|sh| sh.norm > 0) {
        let weight = if shifted { phases[sh.norm as usize] as f64 } else { sh.count as f64 };
        if weight != 0.0 {
            sum += weight * misra_e(a2, PI * sh.norm as f64 / 4.0)?;
        }
    }
    sum -= 2.0 / (df - s);
    let pref = (s / 2.0 * PI.ln()).exp();
    let mut v = pref * rgamma(a1) * sum;
    if !shifted {
        v -= pref * rgamma(a1 + 1.0);
    }
    Ok(v)
}

// Σ_{|2m|² = n} (-1)^{m·s} for n ≤ max_norm.
fn phase_weights(d: usize, spin: &[u8], max_norm: u64) -> Vec<i64> {
    let len = max_norm as usize + 1;
    let mut w = vec![0i64; len];
    w[0] = 1;
    for j in 0..d {
        let s = *spin.get(j).unwrap_or(&0) as i64;
        let mut next = vec![0i64; len];
        let kmax = ((max_norm as f64).sqrt() / 2.0).ceil() as i64 + 1;
        for k in -kmax..=kmax {
            let v = (4 * k * k) as usize;
            if v >= len {
                continue;
            }
            let sign = if (k * s).rem_euclid(2) == 1 { -1 } else { 1 };
            for n in 0..len - v {
                next[n + v] += sign * w[n];
            }
        }
        w = next;
    }
    w
}

/// Z_d(s) = Σ'_{k∈ℤ^d} |k|^{-s}.
pub fn epstein_zd(s: Complex64, d: usize) -> Result<Complex64> {
    lattice_zeta(s, d, &[])
}

/// Residue of Z(s; c) at s = d: 2π^{d/2}/Γ(d/2), independent of the shift.
pub fn lattice_zeta_residue(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) * rgamma(Complex64::new(h, 0.0)).re
}

/// Truncated lattice sum Σ_{0<|k+c|≤R} |k+c|^{-s} for Re s > d, with an integral tail bound.
pub fn lattice_sum_direct(s: f64, d: usize, spin: &[u8], radius: f64) -> Result<(f64, f64)> {
    let df = d as f64;
    if s <= df {
        return invalid("direct lattice sum needs s > d");
    }
    let max_norm = (4.0 * radius * radius).floor() as u64;
    let shells = lattice_shells(d, spin, max_norm);
    let mut sum = 0.0;
    for sh in shells.iter().rev().filter(|sh| sh.norm > 0) {
        sum += sh.count as f64 * (sh.norm as f64 / 4.0).powf(-s / 2.0);
    }
    // points outside radius R lie in the shell beyond R - √d/2 with cube volume 1 each
    let r0 = (radius - df.sqrt() / 2.0).max(1e-9);
    let area = lattice_zeta_residue(d);
    let tail = area * r0.powf(df - s) / (s - df);
    Ok((sum, tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn shells_small() {
        let sh = lattice_shells(4, &[], 8);
        // |2k|² = 8 ⇔ |k|² = 2: 24 points in ℤ⁴
        let s8 = sh.iter().find(|x| x.norm == 8).unwrap();
        assert_eq!(s8.count, 24);
        let sh3 = lattice_shells(3, &[1, 0, 0], 1);
        assert_eq!(sh3, vec![Shell { norm: 1, count: 2 }]);
    }

    #[test]
    fn values_at_zero_and_residue() {
        assert!((epstein_zd(c(0.0), 2).unwrap() + 1.0).norm() < 1e-12);
        assert!((epstein_zd(c(0.0), 4).unwrap() + 1.0).norm() < 1e-12);
        let h = 1e-6;
        let r = (epstein_zd(c(2.0 + h), 2).unwrap() * h - epstein_zd(c(2.0 - h), 2).unwrap() * h) / 2.0;
        assert!((r.re - 2.0 * PI).abs() < 1e-5);
        assert!((lattice_zeta_residue(2) - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_reduces_to_riemann() {
        let z = super::super::zeta::riemann_zeta(c(3.0)).unwrap();
        assert!((epstein_zd(c(3.0), 1).unwrap() - 2.0 * z).norm() < 1e-13);
        // shift 1/2: Σ |k+1/2|^{-s} = 2 ζ(s, 1/2) = 2 (2^s - 1) ζ(s)
        let v = lattice_zeta(c(3.0), 1, &[1]).unwrap();
        assert!((v - 14.0 * z).norm() < 1e-12);
        let s = Complex64::new(-1.5, 2.0);
        let l = lattice_zeta(s, 1, &[1]).unwrap();
        let r = 2.0 * super::super::zeta::hurwitz_zeta(s, 0.5).unwrap();
        assert!((l - r).norm() < 1e-11 * r.norm());
    }

    #[test]
    fn direct_sum_agreement() {
        let (sum, tail) = lattice_sum_direct(4.0, 2, &[], 400.0).unwrap();
        let v = epstein_zd(c(4.0), 2).unwrap().re;
        assert!((v - sum).abs() <= tail + 1e-12, "{v} {sum} {tail}");
        // Z_2(4) = 4 ζ(2) β(2) (Catalan)
        let exact = 4.0 * PI * PI / 6.0 * 0.915_965_594_177_219;
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn functional_equation() {
        for d in [2usize, 3, 4] {
            for s in [Complex64::new(0.7, 3.0), Complex64::new(-2.5, 1.0), Complex64::new(1.3, -6.0)] {
                let df = d as f64;
                let l = epstein_zd(s, d).unwrap();
                let g = (PI.ln() * (s - df / 2.0)).exp() * super::super::gamma::gamma((df - s) / 2.0).unwrap() * rgamma(s / 2.0);
                let r = g * epstein_zd(df - s, d).unwrap();
                assert!((l - r).norm() < 1e-10 * l.norm().max(1.0), "d={d} s={s}");
            }
        }
    }
}
