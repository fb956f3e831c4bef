//! Asymptotic expansions of heat traces and spectral actions built from the
//! poles of Γ(s)ζ(s).

use crate::cutoffs::{CutoffFunction, CutoffSpec};
use crate::error::{invalid, Result, SalError};
use crate::laurent::Laurent;
use crate::special_fn::gamma::{gamma_series, nonpositive_integer};
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

/// Laurent data of ζ at a candidate pole z of Γ(s)ζ(s).
#[derive(Clone, Debug, PartialEq)]
pub struct PoleDatum {
    pub z: Complex64,
    /// ζ(z + h) = Σ_j c_j h^j, from the leading (possibly singular) power up to at least h^0.
    pub zeta: Laurent,
    /// Exact value of a_{z,0} when it is rational.
    pub exact_a0: Option<BigRational>,
}

impl PoleDatum {
    /// Regular point of ζ with known value (only useful where Γ has a pole).
    pub fn regular(z: Complex64, value: Complex64) -> Self {
        PoleDatum { z, zeta: Laurent::new(0, vec![value]), exact_a0: None }
    }

    /// Simple pole of ζ with the given residue.
    pub fn simple(z: Complex64, residue: Complex64, constant: Complex64) -> Self {
        PoleDatum { z, zeta: Laurent::new(-1, vec![residue, constant]), exact_a0: None }
    }

    pub fn with_exact(mut self, a0: BigRational) -> Self {
        self.exact_a0 = Some(a0);
        self
    }

    /// Order of the pole of Γζ at z.
    pub fn order(&self) -> i32 {
        let g = if nonpositive_integer(self.z).is_some() { 1 } else { 0 };
        let lead = self.zeta.clone().normalize();
        (-lead.low + g).max(0)
    }

    /// a_{z,n} = ((-1)^n / n!) · [(s-z)^{-n-1}] Γ(s)ζ(s), for n < order.
    pub fn heat_coefficients(&self) -> Vec<Complex64> {
        let ord = self.order();
        if ord == 0 {
            return Vec::new();
        }
        let g = gamma_series(self.z, (ord + 2) as usize);
        let mut out = Vec::with_capacity(ord as usize);
        let mut fact = 1.0;
        for n in 0..ord {
            if n > 0 {
                fact *= n as f64;
            }
            let j = -n - 1;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in self.zeta.low..self.zeta.high() {
                acc += self.zeta.coeff(i) * g.coeff(j - i);
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            out.push(acc * sign / fact);
        }
        out
    }
}

/// Expansion variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variable {
    /// Σ a_{z,n} log^n t · t^{-z}.
    HeatT,
    /// Σ c_{z,n} log^n Λ · Λ^{z}.
    ActionLambda,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionTerm {
    pub z: Complex64,
    pub n: u32,
    pub coeff: Complex64,
    /// Exact coefficient when rational.
    pub exact: Option<BigRational>,
    pub strip: usize,
}

/// Finite list of expansion terms sorted by strip.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticExpansion {
    pub terms: Vec<ExpansionTerm>,
    /// Scale r_k: strip k holds -r_{k+1} < Re z < -r_k.
    pub scale: Vec<f64>,
    pub variable: Variable,
}

/// One row of the expansion JSON.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermRow {
    pub re_z: f64,
    pub im_z: f64,
    pub n: u32,
    pub re_a: f64,
    pub im_a: f64,
    pub strip_k: usize,
}

const RE_TOL: f64 = 1e-9;

fn auto_scale(terms: &[ExpansionTerm]) -> Vec<f64> {
    let mut re: Vec<f64> = terms.iter().map(|t| t.z.re).collect();
    re.sort_by(|a, b| b.partial_cmp(a).unwrap());
    re.dedup_by(|a, b| (*a - *b).abs() < RE_TOL);
    let mut scale = Vec::with_capacity(re.len() + 1);
    if re.is_empty() {
        return vec![0.0];
    }
    scale.push(-(re[0] + 0.5));
    for w in re.windows(2) {
        scale.push(-(w[0] + w[1]) / 2.0);
    }
    scale.push(-(re[re.len() - 1] - 0.5));
    scale
}

impl AsymptoticExpansion {
    /// Assign strips from `scale` (or from the distinct real parts) and sort.
    pub fn new(mut terms: Vec<ExpansionTerm>, scale: Option<Vec<f64>>, variable: Variable) -> Result<Self> {
        terms.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
        let scale = match scale {
            Some(s) => {
                if s.len() < 2 || s.windows(2).any(|w| !(w[1] > w[0])) {
                    return invalid("scale must be strictly increasing with at least two entries");
                }
                s
            }
            None => auto_scale(&terms),
        };
        for t in terms.iter_mut() {
            let x = -t.z.re;
            if scale.iter().any(|r| (x - r).abs() < 1e-12) {
                return Err(SalError::InvalidArgument(format!("scale line hits the pole at z = {}", t.z)));
            }
            let k = scale.windows(2).position(|w| x > w[0] && x < w[1]).ok_or_else(|| {
                SalError::InvalidArgument(format!("pole z = {} lies outside the scale range", t.z))
            })?;
            t.strip = k;
        }
        terms.sort_by(|a, b| {
            a.strip
                .cmp(&b.strip)
                .then(b.z.re.partial_cmp(&a.z.re).unwrap())
                .then(a.z.im.partial_cmp(&b.z.im).unwrap())
                .then(a.n.cmp(&b.n))
        });
        Ok(AsymptoticExpansion { terms, scale, variable })
    }

    pub fn strip_count(&self) -> usize {
        self.terms.iter().map(|t| t.strip + 1).max().unwrap_or(0)
    }

    /// Largest Re z (the dimension for heat expansions).
    pub fn leading_re(&self) -> f64 {
        self.terms.iter().map(|t| t.z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn coefficient(&self, z: Complex64, n: u32) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.n == n && (t.z - z).norm() < RE_TOL)
            .map(|t| t.coeff)
            .sum()
    }

    pub fn rows(&self) -> Vec<TermRow> {
        self.terms
            .iter()
            .map(|t| TermRow { re_z: t.z.re, im_z: t.z.im, n: t.n, re_a: t.coeff.re, im_a: t.coeff.im, strip_k: t.strip })
            .collect()
    }

    fn term_value(&self, t: &ExpansionTerm, x: f64) -> Complex64 {
        let l = x.ln();
        let pw = match self.variable {
            Variable::HeatT => (-t.z * l).exp(),
            Variable::ActionLambda => (t.z * l).exp(),
        };
        t.coeff * pw * l.powi(t.n as i32)
    }

    /// Contribution of each strip at x.
    pub fn strip_contributions(&self, x: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.strip_count()];
        for t in &self.terms {
            out[t.strip] += self.term_value(t, x);
        }
        out
    }

    /// Σ over strips 0..=k_strips (real part).
    pub fn evaluate(&self, x: f64, k_strips: usize) -> Result<f64> {
        if self.terms.is_empty() {
            return invalid("empty expansion");
        }
        if !(x > 0.0) {
            return invalid("expansion variable must be positive");
        }
        Ok(self.strip_contributions(x).iter().take(k_strips + 1).sum::<Complex64>().re)
    }

    /// Superasymptotic truncation: sum the strips before the smallest one found
    /// before the contributions start growing; the remainder estimate is that strip's
    /// magnitude plus a rounding allowance.
    pub fn optimal_truncation(&self, x: f64) -> Result<Truncation> {
        if self.terms.is_empty() {
            return invalid("empty expansion");
        }
        let c = self.strip_contributions(x);
        let mags: Vec<f64> = c.iter().map(|v| v.norm()).collect();
        let mut best = 0;
        for k in 1..mags.len() {
            if mags[k] > mags[k - 1] {
                break;
            }
            if mags[k] <= mags[best] {
                best = k;
            }
        }
        let value: Complex64 = c[..best].iter().sum();
        let abs_sum: f64 = mags[..best].iter().sum();
        let rounding = 8.0 * f64::EPSILON * abs_sum;
        Ok(Truncation { value: value.re, remainder: mags[best] + rounding, strips_used: best, smallest_strip: mags[best] })
    }
}

/// Result of [`AsymptoticExpansion::optimal_truncation`].
#[derive(Clone, Debug, PartialEq)]
pub struct Truncation {
    pub value: f64,
    pub remainder: f64,
    pub strips_used: usize,
    pub smallest_strip: f64,
}

fn exact_ratio(num: i64, fact_of: u32) -> BigRational {
    let f: BigInt = (1..=fact_of as u64).map(BigInt::from).product();
    BigRational::new(BigInt::from(num), f)
}

/// Heat expansion of Tr e^{-tH} (including dim ker) from pole data of ζ (which counts the kernel as 1^{-s}).
pub fn heat_expansion_from_poles(poles: &[PoleDatum], kernel_dim: u64, scale: Option<Vec<f64>>) -> Result<AsymptoticExpansion> {
    if poles.windows(2).any(|w| w[1].z.re > w[0].z.re + RE_TOL) {
        return invalid("poles must be sorted by Re z descending");
    }
    let mut terms: Vec<ExpansionTerm> = Vec::new();
    for p in poles {
        for (n, a) in p.heat_coefficients().into_iter().enumerate() {
            let exact = if n == 0 { p.exact_a0.clone() } else { None };
            terms.push(ExpansionTerm { z: p.z, n: n as u32, coeff: a, exact, strip: 0 });
        }
    }
    // kernel convention: ker·(1 - e^{-t}) = ker Σ_{k≥1} (-1)^{k+1} t^k / k!
    if kernel_dim > 0 {
        let lowest = poles.iter().map(|p| p.z.re).fold(f64::INFINITY, f64::min);
        let mut k = 1u32;
        while -(k as f64) >= lowest - RE_TOL {
            let sign: i64 = if k % 2 == 1 { 1 } else { -1 };
            let ex = exact_ratio(sign * kernel_dim as i64, k);
            let val = ex.to_f64().unwrap_or(0.0);
            let z = Complex64::new(-(k as f64), 0.0);
            match terms.iter_mut().find(|t| t.n == 0 && (t.z - z).norm() < RE_TOL) {
                Some(t) => {
                    t.coeff += val;
                    t.exact = t.exact.take().map(|e| e + ex);
                }
                None => terms.push(ExpansionTerm { z, n: 0, coeff: Complex64::new(val, 0.0), exact: Some(ex), strip: 0 }),
            }
            k += 1;
        }
    }
    for t in terms.iter_mut() {
        if let Some(e) = &t.exact {
            if e.is_zero() {
                t.coeff = Complex64::new(0.0, 0.0);
            }
        }
    }
    AsymptoticExpansion::new(terms, scale, Variable::HeatT)
}

fn binom(m: u32, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, j| acc * (m - j) as f64 / (j + 1) as f64)
}

/// Large-Λ expansion of Tr f(H/Λ) from a heat expansion:
/// c_{z,n} = (-1)^n Σ_{m≥n} C(m,n) a_{z,m} f_{z,m-n}.
pub fn action_expansion(heat: &AsymptoticExpansion, f: &CutoffFunction) -> Result<AsymptoticExpansion> {
    action_expansion_with(heat, f.decay_order(), |z, n| f.f_moment(z, n))
}

/// Same as [`action_expansion`] for any parsed cut-off, including the Gaussian.
pub fn action_expansion_spec(heat: &AsymptoticExpansion, f: &CutoffSpec) -> Result<AsymptoticExpansion> {
    let order = match f {
        CutoffSpec::Laplace(g) => g.decay_order(),
        CutoffSpec::Gauss => f64::INFINITY,
    };
    action_expansion_with(heat, order, |z, n| f.f_moment(z, n))
}

fn action_expansion_with<M: Fn(Complex64, usize) -> Result<Complex64>>(
    heat: &AsymptoticExpansion,
    decay_order: f64,
    moment: M,
) -> Result<AsymptoticExpansion> {
    if heat.variable != Variable::HeatT {
        return invalid("action expansion needs a heat expansion");
    }
    let p = heat.leading_re();
    if !(decay_order > p) {
        return Err(SalError::Divergent(format!("cut-off certificate {decay_order} does not exceed the dimension {p}")));
    }
    let mut zs: Vec<Complex64> = Vec::new();
    for t in &heat.terms {
        if !zs.iter().any(|z| (z - t.z).norm() < RE_TOL) {
            zs.push(t.z);
        }
    }
    let mut terms = Vec::new();
    for z in zs {
        let group: Vec<&ExpansionTerm> = heat.terms.iter().filter(|t| (t.z - z).norm() < RE_TOL).collect();
        let mmax = group.iter().map(|t| t.n).max().unwrap_or(0);
        let mut fm = Vec::with_capacity(mmax as usize + 1);
        for k in 0..=mmax {
            fm.push(moment(z, k as usize)?);
        }
        for n in 0..=mmax {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in &group {
                if t.n >= n {
                    acc += binom(t.n, n) * t.coeff * fm[(t.n - n) as usize];
                }
            }
            if n % 2 == 1 {
                acc = -acc;
            }
            terms.push(ExpansionTerm { z, n, coeff: acc, exact: None, strip: 0 });
        }
    }
    AsymptoticExpansion::new(terms, Some(heat.scale.clone()), Variable::ActionLambda)
}

/// ⨍^{[k]} |D|^{-z} = [(s-z)^{-k}] ζ(s), read from the pole data.
pub fn ncint(poles: &[PoleDatum], k: i32, z: Complex64) -> Result<Complex64> {
    let p = poles
        .iter()
        .find(|p| (p.z - z).norm() < RE_TOL)
        .ok_or_else(|| SalError::InvalidArgument(format!("no Laurent data at z = {z}")))?;
    if -k >= p.zeta.high() {
        return Err(SalError::InvalidArgument(format!("Laurent data at z = {z} too short for k = {k}")));
    }
    Ok(p.zeta.coeff(-k))
}

/// Same quantity recovered from the heat coefficients a_{z,n} by dividing out Γ.
pub fn ncint_from_expansion(heat: &AsymptoticExpansion, kernel_dim: u64, k: i32, z: Complex64) -> Result<Complex64> {
    if k < 1 {
        return invalid("ncint from heat data needs k ≥ 1");
    }
    let group: Vec<&ExpansionTerm> = heat.terms.iter().filter(|t| (t.z - z).norm() < RE_TOL).collect();
    let mmax = group.iter().map(|t| t.n as i32).max().unwrap_or(-1);
    // principal part of Γζ: coefficient of h^{-n-1} is (-1)^n n! a_{z,n}
    let mut zc = vec![Complex64::new(0.0, 0.0); (mmax + 1).max(0) as usize];
    let mut fact = 1.0;
    for n in 0..=mmax {
        if n > 0 {
            fact *= n as f64;
        }
        let mut a: Complex64 = group.iter().filter(|t| t.n as i32 == n).map(|t| t.coeff).sum();
        if n == 0 && kernel_dim > 0 {
            if let Some(m) = nonpositive_integer(z) {
                if m >= 1 {
                    let mut f = 1.0;
                    for j in 1..=m {
                        f *= j as f64;
                    }
                    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                    a -= sign * kernel_dim as f64 / f;
                }
            }
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        zc[n as usize] = a * sign * fact;
    }
    let len = (mmax + 3).max(3) as usize;
    let rg = gamma_series(z, len).recip();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in rg.low..rg.high() {
        let j = -k - i;
        if j <= -1 && (-j - 1) < zc.len() as i32 {
            acc += zc[(-j - 1) as usize] * rg.coeff(i);
        }
    }
    Ok(acc)
}

/// Convergence-radius estimate and the fit behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusEstimate {
    pub t: f64,
    /// Coefficient of log r in y = ln(c/ε)/r.
    pub beta: f64,
    pub alpha: f64,
    pub samples: usize,
}

fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let m = rows.len();
    let n = rows[0].len();
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    let sol = ata
        .lu()
        .solve(&atb)
        .ok_or_else(|| SalError::NotConverged("singular regression in radius estimate".into()))?;
    Ok(sol.iter().copied().collect())
}

/// T = [limsup (c_k/ε_k)^{1/r_k}]^{-1}, estimated by regressing y_k = ln(c_k/ε_k)/r_k on
/// (1, ln r_k, 1/r_k). A clear ln r_k trend means super-geometric growth (T = 0) or decay (T = ∞);
/// otherwise the intercept of the (1, 1/r_k) fit gives T = e^{-α}.
pub fn convergence_radius(c: &[f64], eps: &[f64], r: &[f64]) -> Result<RadiusEstimate> {
    if c.len() != eps.len() || c.len() != r.len() {
        return invalid("c, eps and r must have equal lengths");
    }
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for i in 0..c.len() {
        if r[i] > 0.0 && c[i] > 0.0 && eps[i] > 0.0 && c[i].is_finite() {
            ys.push((c[i] / eps[i]).ln() / r[i]);
            rows.push(vec![1.0, r[i].ln(), 1.0 / r[i]]);
        }
    }
    let samples = ys.len();
    if samples < 5 {
        return invalid(format!("convergence radius needs at least 5 usable samples, got {samples}"));
    }
    let full = least_squares(&rows, &ys)?;
    let beta = full[1];
    if beta > 0.25 {
        return Ok(RadiusEstimate { t: 0.0, beta, alpha: full[0], samples });
    }
    if beta < -0.25 {
        return Ok(RadiusEstimate { t: f64::INFINITY, beta, alpha: full[0], samples });
    }
    let reduced: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[2]]).collect();
    let fit = least_squares(&reduced, &ys)?;
    Ok(RadiusEstimate { t: (-fit[0]).exp(), beta, alpha: fit[0], samples })
}

/// Radius of the heat expansion from strip magnitudes c_k = Σ|a| and r_k = -Re z.
pub fn radius_from_expansion(heat: &AsymptoticExpansion) -> Result<RadiusEstimate> {
    let k = heat.strip_count();
    let mut c = vec![0.0; k];
    let mut r = vec![f64::NAN; k];
    for t in &heat.terms {
        c[t.strip] += t.coeff.norm();
        r[t.strip] = -t.z.re;
    }
    let (mut cc, mut rr) = (Vec::new(), Vec::new());
    for i in 0..k {
        if r[i] >= 0.5 {
            cc.push(c[i]);
            rr.push(r[i]);
        }
    }
    // a terminating expansion has limsup 0, hence T = ∞
    if cc.iter().all(|v| *v < 1e-300) {
        return Ok(RadiusEstimate { t: f64::INFINITY, beta: f64::NAN, alpha: f64::NAN, samples: 0 });
    }
    let ones = vec![1.0; cc.len()];
    convergence_radius(&cc, &ones, &rr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::bernoulli::{bernoulli_number, rational};
    use crate::special_fn::riemann_zeta;
    use std::f64::consts::PI;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    // S² with H = D²: ζ(s) = 4ζ(2s-1).
    fn s2_poles(kmax: usize) -> Vec<PoleDatum> {
        let mut v = vec![PoleDatum::simple(c(1.0), c(2.0), c(0.0)).with_exact(rational(2, 1))];
        for k in 0..=kmax {
            let b = bernoulli_number(2 * k + 2).unwrap();
            let zeta_val = -b / BigRational::from_integer(BigInt::from(2 * k as i64 + 2)) * rational(4, 1);
            let sign: i64 = if k % 2 == 0 { 1 } else { -1 };
            let a0 = zeta_val.clone() * exact_ratio(sign, k as u32);
            v.push(PoleDatum::regular(c(-(k as f64)), c(zeta_val.to_f64().unwrap())).with_exact(a0));
        }
        v
    }

    #[test]
    fn s2_coefficients() {
        let e = heat_expansion_from_poles(&s2_poles(5), 0, None).unwrap();
        assert_eq!(e.terms[0].exact, Some(rational(2, 1)));
        assert!((e.coefficient(c(1.0), 0) - c(2.0)).norm() < 1e-14, "{}", e.coefficient(c(1.0), 0));
        // a_{0,0} = 4ζ(-1) = -1/3
        assert!((e.coefficient(c(0.0), 0) - c(-1.0 / 3.0)).norm() < 1e-14);
        assert_eq!(e.strip_count(), 7);
        let r = radius_from_expansion(&heat_expansion_from_poles(&s2_poles(40), 0, None).unwrap()).unwrap();
        assert_eq!(r.t, 0.0);
    }

    #[test]
    fn optimal_truncation_s2() {
        let e = heat_expansion_from_poles(&s2_poles(110), 0, None).unwrap();
        let t = 0.1;
        let tr = e.optimal_truncation(t).unwrap();
        let direct: f64 = (0..2000).map(|n| 4.0 * (n as f64 + 1.0) * (-t * (n as f64 + 1.0).powi(2)).exp()).sum();
        assert!((tr.value - direct).abs() <= tr.remainder, "{tr:?} vs {direct}");
        assert!(tr.strips_used > 50);
    }

    #[test]
    fn s1_laurent_and_radius() {
        // ζ = 1 + 2ζ(s), kernel 1
        let mut poles = vec![PoleDatum::simple(c(1.0), c(2.0), c(1.0 + 2.0 * 0.5772156649015329))];
        for k in 0..=40usize {
            let zk = if k == 0 { rational(-1, 2) } else { -bernoulli_number(k + 1).unwrap() / BigRational::from_integer(BigInt::from(k as i64 + 1)) };
            let v = rational(1, 1) + rational(2, 1) * zk;
            let sign: i64 = if k % 2 == 0 { 1 } else { -1 };
            let a0 = v.clone() * exact_ratio(sign, k as u32);
            poles.push(PoleDatum::regular(c(-(k as f64)), c(v.to_f64().unwrap())).with_exact(a0));
        }
        let e = heat_expansion_from_poles(&poles, 1, None).unwrap();
        let t = 0.5f64;
        let exact = 1.0 / (t / 2.0).tanh();
        assert!((e.evaluate(t, 21).unwrap() - exact).abs() < 1e-12);
        let r = radius_from_expansion(&e).unwrap();
        assert!((r.t - 2.0 * PI).abs() < 0.3, "{r:?}");
        // ⨍|D|^{-1} = 2 and ζ regular at 0
        assert_eq!(ncint(&poles, 1, c(1.0)).unwrap(), c(2.0));
        assert_eq!(ncint(&poles, 1, c(0.0)).unwrap(), c(0.0));
        let back = ncint_from_expansion(&e, 1, 1, c(1.0)).unwrap();
        assert!((back - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn radius_examples() {
        let ks: Vec<f64> = (5..=40).map(|k| k as f64).collect();
        let c1: Vec<f64> = ks.iter().map(|&k| 2.0 * (2.0 * PI).powf(-2.0 * k) * riemann_zeta(c(2.0 * k + 1.0)).unwrap().re).collect();
        let e1 = vec![PI / 2.0; ks.len()];
        let r1: Vec<f64> = ks.iter().map(|&k| 2.0 * (k - 2.0)).collect();
        let est = convergence_radius(&c1, &e1, &r1).unwrap();
        assert!((est.t - 2.0 * PI).abs() < 0.3, "{est:?}");
        let ones = vec![1.0; ks.len()];
        assert!((convergence_radius(&ones, &ones, &ks).unwrap().t - 1.0).abs() < 1e-12);
        let pod: Vec<f64> = ks.iter().map(|&k| (k + 0.5).exp() * (k + 0.5).powf(-k)).collect();
        assert_eq!(convergence_radius(&pod, &ones, &ks).unwrap().t, f64::INFINITY);
        assert!(convergence_radius(&ones[..4], &ones[..4], &ks[..4]).is_err());
    }

    #[test]
    fn action_from_exponential_cutoff_is_heat_at_inverse_lambda() {
        let e = heat_expansion_from_poles(&s2_poles(6), 0, None).unwrap();
        let f = CutoffFunction::exp(1.0).unwrap();
        let a = action_expansion(&e, &f).unwrap();
        for (h, g) in e.terms.iter().zip(&a.terms) {
            assert_eq!(h.z, g.z);
            assert!((h.coeff - g.coeff).norm() < 1e-15);
        }
        let lam = 7.0;
        assert!((a.evaluate(lam, 4).unwrap() - e.evaluate(1.0 / lam, 4).unwrap()).abs() < 1e-12);
        let slow = CutoffFunction::window(0.0, 1.0).unwrap();
        assert!(action_expansion(&e, &slow).is_err());
    }

    #[test]
    fn scale_validation() {
        let p = s2_poles(2);
        assert!(heat_expansion_from_poles(&p, 0, Some(vec![-1.5, -1.0, 0.5, 3.5])).is_err());
        let e = heat_expansion_from_poles(&p, 0, Some(vec![-1.5, -0.5, 3.5])).unwrap();
        assert_eq!(e.strip_count(), 2);
        assert_eq!(e.terms.iter().filter(|t| t.strip == 1).count(), 3);
        let rows = e.rows();
        assert_eq!(rows[0].re_z, 1.0);
    }

    #[test]
    fn triple_pole_inversion() {
        // ζ = 4 (u/q)^{-s} (1-q^s)^{-2}: double pole at 0, Γ adds one more
        let q: f64 = 0.5;
        let u = q / (1.0 - q * q);
        let lq = q.ln();
        let zeta = |s: Complex64| 4.0 * (-(s * (u / q).ln())).exp() / (1.0 - (s * lq).exp()).powi(2);
        let coeffs = crate::laurent::laurent_fit(zeta, c(0.0), 0.1, 64, -2..=1);
        let p = PoleDatum { z: c(0.0), zeta: Laurent::new(-2, coeffs), exact_a0: None };
        assert_eq!(p.order(), 3);
        let a = p.heat_coefficients();
        assert!((a[2] - c(2.0 / (lq * lq))).norm() < 1e-10);
        let e = heat_expansion_from_poles(&[p.clone()], 0, None).unwrap();
        let back = ncint_from_expansion(&e, 0, 2, c(0.0)).unwrap();
        assert!((back - c(4.0 / (lq * lq))).norm() < 1e-10);
        assert!((ncint(&[p], 2, c(0.0)).unwrap() - back).norm() < 1e-10);
    }
}
