//! Poisson and Euler–Maclaurin summation, and the closed-form actions of
//! S³, T³ and S⁴ obtained from them.

use crate::accumulate::Neumaier;
use crate::cutoffs::ActionFunction;
use crate::error::{invalid, Result, SalError};
use crate::quadrature::{integrate, integrate_to_inf};
use crate::series_engine::spectral_action_direct;
use crate::special_fn::bernoulli::{bernoulli_f64, bernoulli_number};
use crate::special_fn::epstein::{lattice_shells, lattice_zeta_residue};
use crate::special_fn::gamma::gamma_real;
use crate::special_fn::riemann_zeta;
use crate::spectra::Spectrum;
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::f64::consts::PI;

/// Radial profiles g(|x|) on ℝ^m for Poisson comparisons.
pub enum RadialKernel {
    /// e^{-r²}
    Gaussian,
    /// e^{-r}
    ExpAbs,
    /// r^{2j} e^{-r²}
    PolyGaussian(u32),
    /// Any profile with |g(r)| ≤ c e^{-a r^p}; F[g](0) by quadrature.
    Custom { g: Box<dyn Fn(f64) -> f64 + Sync>, c: f64, a: f64, p: f64 },
}

impl RadialKernel {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialKernel::Gaussian => (-r * r).exp(),
            RadialKernel::ExpAbs => (-r.abs()).exp(),
            RadialKernel::PolyGaussian(j) => r.powi(2 * *j as i32) * (-r * r).exp(),
            RadialKernel::Custom { g, .. } => g(r),
        }
    }

    /// Monotone majorant of |g(r)| for r ≥ 0.
    fn envelope(&self, r: f64) -> f64 {
        match self {
            RadialKernel::Gaussian => (-r * r).exp(),
            RadialKernel::ExpAbs => (-r).exp(),
            RadialKernel::PolyGaussian(j) => {
                let j = *j as f64;
                let c = if j == 0.0 { 1.0 } else { (2.0 * j).powf(j) * (-j).exp() };
                c * (-r * r / 2.0).exp()
            }
            RadialKernel::Custom { c, a, p, .. } => c * (-a * r.powf(*p)).exp(),
        }
    }

    /// ∫_{ℝ^m} g(|x|) dx.
    pub fn fourier_zero(&self, m: usize) -> Result<f64> {
        let area = lattice_zeta_residue(m);
        let mf = m as f64;
        match self {
            RadialKernel::Gaussian => Ok(PI.powf(mf / 2.0)),
            RadialKernel::ExpAbs => Ok(area * gamma_real(mf)),
            RadialKernel::PolyGaussian(j) => Ok(area * gamma_real((mf + 2.0 * *j as f64) / 2.0) / 2.0),
            RadialKernel::Custom { g, .. } => {
                let (v, _) = integrate_to_inf(|r| r.powf(mf - 1.0) * g(r), 0.0, 1e-15, 1e-13)?;
                Ok(area * v)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoissonReport {
    /// Σ_{k∈ℤ^m} g(t|k|)
    pub sum: f64,
    /// t^{-m} F[g](0)
    pub integral: f64,
    pub discrepancy: f64,
    /// Bound on the omitted lattice points.
    pub tail_bound: f64,
    pub points: u64,
}

// Σ_{|k| > R} |g(t|k|)| ≤ area ∫_{R-√m/2}^∞ (r+√m/2)^{m-1} G(tr) dr
fn lattice_tail(g: &RadialKernel, t: f64, m: usize, radius: f64) -> Result<f64> {
    let h = (m as f64).sqrt() / 2.0;
    let lo = (radius - h).max(0.0);
    let area = lattice_zeta_residue(m);
    let (v, e) = integrate_to_inf(|r| (r + h).powi(m as i32 - 1) * g.envelope(t * r), lo, 1e-300, 1e-8)?;
    Ok(area * (v + e))
}

/// Compare the lattice sum Σ g(tk) with its Poisson leading term t^{-m} F[g](0).
pub fn poisson_compare(g: &RadialKernel, t: f64, m: usize) -> Result<PoissonReport> {
    if m == 0 || !(t > 0.0) {
        return invalid("poisson_compare needs m ≥ 1 and t > 0");
    }
    let integral = g.fourier_zero(m)? * t.powi(-(m as i32));
    let target = 1e-17 * integral.abs().max(1e-300);
    let mut radius = (1.0 / t).max(4.0);
    let mut tail = lattice_tail(g, t, m, radius)?;
    while tail > target {
        radius *= 1.25;
        if radius.powi(m as i32) > 5e8 {
            return Err(SalError::NotConverged(format!("lattice sum needs more than 5e8 points at t = {t}")));
        }
        tail = lattice_tail(g, t, m, radius)?;
    }
    let mut acc = Neumaier::<f64>::new();
    let mut points = 0u64;
    if m == 1 {
        let kmax = radius.ceil() as i64;
        for k in (1..=kmax).rev() {
            acc.add(2.0 * g.eval(t * k as f64));
        }
        acc.add(g.eval(0.0));
        points = 2 * kmax as u64 + 1;
    } else {
        let max_norm = (4.0 * radius * radius).ceil() as u64;
        for sh in lattice_shells(m, &[], max_norm).iter().rev() {
            let r = (sh.norm as f64).sqrt() / 2.0;
            acc.add(sh.count as f64 * g.eval(t * r));
            points += sh.count;
        }
    }
    let sum = acc.value();
    Ok(PoissonReport { sum, integral, discrepancy: sum - integral, tail_bound: tail, points })
}

/// Least-squares fit y ≈ Σ_i c_i x^{p_i}.
pub fn power_fit(xs: &[f64], ys: &[f64], powers: &[i32]) -> Result<Vec<f64>> {
    if xs.len() != ys.len() || xs.len() < powers.len() {
        return invalid("power_fit needs at least as many samples as powers");
    }
    let a = DMatrix::from_fn(xs.len(), powers.len(), |i, j| xs[i].powi(powers[j]));
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let sol = svd.solve(&b, 1e-14).map_err(|e| SalError::NotConverged(format!("power fit: {e}")))?;
    Ok(sol.iter().copied().collect())
}

/// Decay rate -d log|y| / d log x from a least-squares line; zero values are
/// floored at the smallest positive double.
pub fn decay_rate(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return invalid("decay_rate needs at least two points");
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().max(f64::MIN_POSITIVE).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return invalid("decay_rate needs distinct abscissae");
    }
    Ok(-sxy / sxx)
}

/// Functions with Taylor coefficients available at every point.
#[derive(Clone, Debug, PartialEq)]
pub enum Smooth {
    /// Σ c_i x^i
    Poly(Vec<f64>),
    /// e^{-(x/λ)²}
    Gauss(f64),
    /// e^{-x/λ}
    Exp(f64),
    Product(Box<Smooth>, Box<Smooth>),
}

// exp of a truncated power series
fn series_exp(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    out[0] = a[0].exp();
    for k in 1..n {
        let mut s = 0.0;
        for j in 1..=k {
            s += j as f64 * a[j] * out[k - j];
        }
        out[k] = s / k as f64;
    }
    out
}

impl Smooth {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Smooth::Poly(c) => c.iter().rev().fold(0.0, |acc, v| acc * x + v),
            Smooth::Gauss(l) => (-(x / l) * (x / l)).exp(),
            Smooth::Exp(l) => (-x / l).exp(),
            Smooth::Product(a, b) => a.eval(x) * b.eval(x),
        }
    }

    /// g^{(i)}(x)/i! for i ≤ n.
    pub fn taylor(&self, x: f64, n: usize) -> Vec<f64> {
        let len = n + 1;
        match self {
            Smooth::Poly(c) => {
                let mut out = vec![0.0; len];
                for (i, slot) in out.iter_mut().enumerate() {
                    // Σ_k c_k C(k, i) x^{k-i}
                    let mut s = 0.0;
                    for (k, ck) in c.iter().enumerate().skip(i) {
                        let mut b = 1.0;
                        for j in 0..i {
                            b = b * (k - j) as f64 / (j + 1) as f64;
                        }
                        s += ck * b * x.powi((k - i) as i32);
                    }
                    *slot = s;
                }
                out
            }
            Smooth::Gauss(l) => {
                let mut a = vec![0.0; len];
                a[0] = -(x / l) * (x / l);
                if len > 1 {
                    a[1] = -2.0 * x / (l * l);
                }
                if len > 2 {
                    a[2] = -1.0 / (l * l);
                }
                series_exp(&a)
            }
            Smooth::Exp(l) => {
                let mut a = vec![0.0; len];
                a[0] = -x / l;
                if len > 1 {
                    a[1] = -1.0 / l;
                }
                series_exp(&a)
            }
            Smooth::Product(f, g) => {
                let (p, q) = (f.taylor(x, n), g.taylor(x, n));
                let mut out = vec![0.0; len];
                for i in 0..len {
                    for j in 0..len - i {
                        out[i + j] += p[i] * q[j];
                    }
                }
                out
            }
        }
    }

    /// g^{(k)}(x).
    pub fn derivative(&self, x: f64, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.taylor(x, k)[k] * fact
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EulerMaclaurin {
    pub estimate: f64,
    pub remainder_bound: f64,
    pub integral: f64,
}

/// Σ_{k=0}^{N} g(k) (N = None for ∞, g decaying with its derivatives) from
/// ∫ g + boundary terms + Σ_{j ≤ m/2} B_{2j}/(2j)! [g^{(2j-1)}]; remainder bound
/// 2ζ(m)/(2π)^m ∫ |g^{(m)}|.
pub fn euler_maclaurin(g: &Smooth, upper: Option<u64>, m: usize) -> Result<EulerMaclaurin> {
    if m < 2 || m % 2 == 1 {
        return invalid(format!("Euler-Maclaurin order must be even and ≥ 2, got {m}"));
    }
    let fact = |k: usize| -> f64 { (1..=k).map(|i| i as f64).product() };
    let (integral, qerr, int_abs) = match upper {
        Some(n) => {
            let b = n as f64;
            let (v, e) = integrate(|x| g.eval(x), 0.0, b, 1e-300, 1e-14)?;
            let (w, _) = integrate(|x| g.derivative(x, m).abs(), 0.0, b, 1e-300, 1e-10)?;
            (v, e, w)
        }
        None => {
            let (v, e) = integrate_to_inf(|x| g.eval(x), 0.0, 1e-300, 1e-14)?;
            let (w, _) = integrate_to_inf(|x| g.derivative(x, m).abs(), 0.0, 1e-300, 1e-10)?;
            (v, e, w)
        }
    };
    let t0 = g.taylor(0.0, m);
    let tn = upper.map(|n| g.taylor(n as f64, m));
    let mut est = integral + 0.5 * g.eval(0.0);
    if let Some(n) = upper {
        est += 0.5 * g.eval(n as f64);
    }
    for j in 1..=m / 2 {
        let k = 2 * j - 1;
        let d0 = t0[k] * fact(k);
        let dn = tn.as_ref().map_or(0.0, |t| t[k] * fact(k));
        est += bernoulli_f64(2 * j) / fact(2 * j) * (dn - d0);
    }
    let zm = riemann_zeta(Complex64::new(m as f64, 0.0))?.re;
    let bound = 2.0 * zm / (2.0 * PI).powi(m as i32) * int_abs * 1.001 + qerr;
    Ok(EulerMaclaurin { estimate: est, remainder_bound: bound, integral })
}

fn even_integral<F: Fn(f64) -> f64>(f: &F, power: i32) -> Result<f64> {
    let (v, _) = integrate_to_inf(|x| x.powi(power) * f(x), 0.0, 1e-300, 1e-13)?;
    Ok(v)
}

/// Λ³∫_ℝ x² f − (Λ/4)∫_ℝ f for an even f.
pub fn s3_action<F: Fn(f64) -> f64>(f: &F, lambda: f64) -> Result<f64> {
    Ok(2.0 * lambda.powi(3) * even_integral(f, 2)? - lambda / 2.0 * even_integral(f, 0)?)
}

/// (1/4π³)Λ³∫_{ℝ³} f(|x|) dx.
pub fn t3_action<F: Fn(f64) -> f64>(f: &F, lambda: f64) -> Result<f64> {
    Ok(lambda.powi(3) / (PI * PI) * even_integral(f, 2)?)
}

/// c_m for m = 0..=mmax in the S⁴ action, with f(x) = F(x²) and the term c_m Λ^{-2m} F^{(m)}(0):
/// c_m = (4/3)/m! [B_{2m+2}/(2m+2) - B_{2m+4}/(2m+4)].
pub fn s4_coefficients(mmax: usize) -> Result<Vec<BigRational>> {
    let mut out = Vec::with_capacity(mmax + 1);
    for m in 0..=mmax {
        let a = bernoulli_number(2 * m + 2)? / BigRational::from_integer(BigInt::from(2 * m + 2));
        let b = bernoulli_number(2 * m + 4)? / BigRational::from_integer(BigInt::from(2 * m + 4));
        let fact: BigInt = (1..=m as u64).map(BigInt::from).product();
        out.push((a - b) * BigRational::new(BigInt::from(4), BigInt::from(3) * fact));
    }
    Ok(out)
}

/// The same coefficients recomputed from the odd derivatives g^{(2j-1)}(0) of
/// g(x) = (4/3)(x³ - x) Σ_i a_i x^i, a_{2m} = F^{(m)}(0) Λ^{-2m}/m!.
pub fn s4_coefficients_from_derivatives(mmax: usize) -> Result<Vec<BigRational>> {
    let jmax = mmax + 2;
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let fact = |k: usize| -> BigInt { (1..=k as u64).map(BigInt::from).product() };
    // coefficient of a_i in the Euler–Maclaurin correction
    let mut coef = vec![BigRational::zero(); 2 * jmax + 1];
    for j in 1..=jmax {
        let n = 2 * j - 1;
        // g^{(n)}(0) = n! (4/3)(a_{n-3} - a_{n-1})
        let scale = bernoulli_number(2 * j)? / BigRational::from_integer(fact(2 * j)) * BigRational::from_integer(fact(n)) * r(4, 3);
        if n >= 3 {
            coef[n - 3] += &scale;
        }
        coef[n - 1] -= &scale;
    }
    // Σ g(k) = ∫ g + g(0)/2 - Σ B_{2j}/(2j)! g^{(2j-1)}(0); g(0) = 0
    Ok((0..=mmax)
        .map(|m| {
            let c = -coef[2 * m].clone();
            c / BigRational::from_integer(fact(m))
        })
        .collect())
}

/// S⁴ action from the closed form: (4/3)Λ⁴∫₀^∞u³f − (4/3)Λ²∫₀^∞uf + Σ_{m≤M} c_m Λ^{-2m} F^{(m)}(0),
/// with `u_derivs[m]` = F^{(m)}(0) where f(x) = F(x²).
pub fn s4_action<F: Fn(f64) -> f64>(f: &F, u_derivs: &[f64], lambda: f64, terms: usize) -> Result<f64> {
    if u_derivs.len() <= terms {
        return invalid(format!("need F^(m)(0) for m ≤ {terms}"));
    }
    let cs = s4_coefficients(terms)?;
    let mut v = 4.0 / 3.0 * lambda.powi(4) * even_integral(f, 3)? - 4.0 / 3.0 * lambda.powi(2) * even_integral(f, 1)?;
    for (m, c) in cs.iter().enumerate() {
        v += c.to_f64().unwrap_or(f64::NAN) * lambda.powi(-2 * m as i32) * u_derivs[m];
    }
    Ok(v)
}

/// Euler–Maclaurin applied to g(x) = (4/3)(x³ - x) e^{-(x/Λ)²}, the S⁴ summand for the Gaussian cut-off.
pub fn s4_gaussian_pipeline(lambda: f64, m: usize) -> Result<EulerMaclaurin> {
    let g = Smooth::Product(Box::new(Smooth::Poly(vec![0.0, -4.0 / 3.0, 0.0, 4.0 / 3.0])), Box::new(Smooth::Gauss(lambda)));
    euler_maclaurin(&g, None, m)
}

/// |Tr f(|D_{s1}|/Λ) - Tr f(|D_{s2}|/Λ)| / Λ³ on T³ for each Λ.
pub fn t3_spin_difference<A: ActionFunction + ?Sized>(f: &A, lambdas: &[f64], s1: &[u8], s2: &[u8]) -> Result<Vec<f64>> {
    let a = Spectrum::torus(3, s1)?;
    let b = Spectrum::torus(3, s2)?;
    lambdas
        .iter()
        .map(|&l| {
            let x = spectral_action_direct(&a, f, l, 1e-15 * l.powi(3))?;
            let y = spectral_action_direct(&b, f, l, 1e-15 * l.powi(3))?;
            Ok((x.value - y.value).abs() / l.powi(3))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoffs::gaussian;
    use crate::special_fn::bernoulli::rational;

    #[test]
    fn gaussian_poisson() {
        let r = poisson_compare(&RadialKernel::Gaussian, 1.0, 1).unwrap();
        let want = 2.0 * PI.sqrt() * ((-PI * PI).exp() + (-4.0 * PI * PI).exp());
        assert!((r.discrepancy - want).abs() < 1e-15, "{} {}", r.discrepancy, want);
    }

    #[test]
    fn exp_abs_discrepancy() {
        let t = 0.3;
        let r = poisson_compare(&RadialKernel::ExpAbs, t, 1).unwrap();
        assert!((r.sum - (t.exp() + 1.0) / (t.exp() - 1.0)).abs() < 1e-13);
        assert!((r.integral - 2.0 / t).abs() < 1e-14);
        let ts: Vec<f64> = (1..=12).map(|i| 0.05 * i as f64).collect();
        let ds: Vec<f64> = ts.iter().map(|&t| poisson_compare(&RadialKernel::ExpAbs, t, 1).unwrap().discrepancy).collect();
        let c = power_fit(&ts, &ds, &[1, 3, 5, 7]).unwrap();
        assert!((c[0] - 1.0 / 6.0).abs() < 1e-6);
    }

    #[test]
    fn poisson_in_two_dimensions() {
        let r = poisson_compare(&RadialKernel::Gaussian, 0.5, 2).unwrap();
        // θ₃-type identity: Σ e^{-t²|k|²} = (π/t²)(Σ e^{-π²n²/t²})²
        let one: f64 = (-50..=50).map(|n: i32| (-(PI * n as f64 / 0.5).powi(2)).exp()).sum();
        assert!((r.sum - PI / 0.25 * one * one).abs() < 1e-12 * r.sum);
        let f = poisson_compare(&RadialKernel::PolyGaussian(1), 0.5, 2).unwrap();
        assert!(f.discrepancy.abs() < 1e-12 * f.sum);
    }

    #[test]
    fn em_examples() {
        let g = Smooth::Poly(vec![0.0, 1.0]);
        let r = euler_maclaurin(&g, Some(10), 2).unwrap();
        assert!((r.estimate - 55.0).abs() < 1e-12);
        let g = Smooth::Exp(5.0);
        let r = euler_maclaurin(&g, Some(50), 8).unwrap();
        let direct: f64 = (0..=50).map(|k| (-(k as f64) / 5.0).exp()).sum();
        assert!((r.estimate - direct).abs() <= r.remainder_bound);
        assert!(euler_maclaurin(&g, Some(50), 3).is_err());
    }

    #[test]
    fn taylor_matches_finite_differences() {
        let g = Smooth::Product(Box::new(Smooth::Poly(vec![0.0, -1.0, 0.0, 1.0])), Box::new(Smooth::Gauss(3.0)));
        let x = 1.3;
        let h = 1e-4;
        let fd = (g.eval(x + h) - g.eval(x - h)) / (2.0 * h);
        assert!((g.derivative(x, 1) - fd).abs() < 1e-7);
        let fd2 = (g.eval(x + h) - 2.0 * g.eval(x) + g.eval(x - h)) / (h * h);
        assert!((g.derivative(x, 2) - fd2).abs() < 1e-5);
    }

    #[test]
    fn s4_rationals() {
        let c = s4_coefficients(3).unwrap();
        assert_eq!(c[0], rational(11, 90));
        assert_eq!(c[1], rational(-31, 1890));
        assert_eq!(c[2], rational(41, 7560));
        assert_eq!(c[3], rational(-31, 11880));
        assert_eq!(s4_coefficients_from_derivatives(6).unwrap(), s4_coefficients(6).unwrap());
    }

    #[test]
    fn s4_pipeline_vs_direct() {
        let lambda = 10.0;
        let direct: f64 = (2..200).map(|k| {
            let k = k as f64;
            4.0 / 3.0 * (k * k * k - k) * (-(k / lambda) * (k / lambda)).exp()
        }).sum();
        let em = s4_gaussian_pipeline(lambda, 10).unwrap();
        assert!((em.estimate - direct).abs() <= em.remainder_bound + 1e-10 * direct, "{} {} {}", em.estimate, direct, em.remainder_bound);
        let derivs: Vec<f64> = (0..6).map(|m| if m % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let closed = s4_action(&|x: f64| (-x * x).exp(), &derivs, lambda, 5).unwrap();
        assert!((closed - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn s3_gaussian_value() {
        let v = s3_action(&|x: f64| (-x * x).exp(), 10.0).unwrap();
        let want = PI.sqrt() / 2.0 * 1000.0 - PI.sqrt() / 4.0 * 10.0;
        assert!((v - want).abs() < 1e-10 * want);
        assert!((v - 881.796).abs() < 1e-3);
    }

    #[test]
    fn t3_leading_term() {
        let f = gaussian();
        let spec = Spectrum::torus(3, &[]).unwrap();
        let l = 12.0;
        let d = spectral_action_direct(&spec, &f, l, 1e-12).unwrap().value;
        let c = t3_action(&|x: f64| (-x * x).exp(), l).unwrap();
        assert!((d - c).abs() < 1e-9 * c);
    }

    #[test]
    fn t3_spin_structures_decouple() {
        let f = gaussian();
        let ls = [4.0, 8.0, 16.0];
        let d = t3_spin_difference(&f, &ls, &[0, 0, 0], &[1, 0, 0]).unwrap();
        assert!(decay_rate(&ls, &d).unwrap() >= 8.0, "{d:?}");
    }
}
