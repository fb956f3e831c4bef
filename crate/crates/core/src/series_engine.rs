//! Direct summation of heat traces, zeta functions and spectral actions with
//! certified truncation, plus Dirichlet-series diagnostics.

use crate::accumulate::{par_pairwise_sum, thread_budget, Neumaier};
use crate::cutoffs::{ActionFunction, Envelope};
use crate::error::{invalid, Result, SalError};
use crate::quadrature::integrate_c;
use crate::scalar::Real;
use crate::special_fn::gamma::{gamma, gamma_real};
use crate::special_fn::incgamma::{erfc, upper_gamma_real};
use crate::special_fn::riemann_zeta;
use crate::spectra::{Growth, Spectrum, SpectrumEntry, SpectrumMeta};
use num_complex::{Complex, Complex64};

/// Hard cap on distinct spectral entries visited by one summation.
pub const TERM_BUDGET: usize = 20_000_000;
const CHUNK: usize = 1 << 16;

/// Result of a truncated summation.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationReport<V> {
    pub value: V,
    pub terms_used: usize,
    pub tail_bound: f64,
    pub converged: bool,
}

/// Diagonal weight K: entry i (in spectral order) carries per_entry(i); `sup` bounds every weight.
pub struct DiagWeight<'a> {
    pub per_entry: &'a (dyn Fn(usize) -> f64 + Sync),
    pub kernel: f64,
    pub sup: f64,
}

// Deterministic chunked accumulation: fixed pairwise tree inside a chunk, compensated across chunks.
struct ChunkSum<T: Real> {
    buf: Vec<T>,
    acc: Neumaier<T>,
    threads: usize,
}

impl<T: Real> ChunkSum<T> {
    fn new() -> Self {
        ChunkSum { buf: Vec::with_capacity(1024), acc: Neumaier::new(), threads: thread_budget() }
    }
    fn push(&mut self, x: T) {
        self.buf.push(x);
        if self.buf.len() == CHUNK {
            self.flush();
        }
    }
    fn flush(&mut self) {
        if !self.buf.is_empty() {
            self.acc.add(par_pairwise_sum(&self.buf, self.threads));
            self.buf.clear();
        }
    }
    fn value(mut self) -> T {
        self.flush();
        self.acc.value()
    }
}

// Sum of nonzero count up to and including Λ, growth-model constant A_Λ.
fn poly_a_lambda(a: f64, sigma: f64, r: f64, p: f64, lambda: f64) -> f64 {
    a * (1.0 + sigma * lambda.powf(-1.0 / r)).powf(p * r)
}

/// Upper bound on Σ_{n > idx} M_n e^{-t μ_n} given the last included entry.
pub fn heat_tail_bound(meta: &SpectrumMeta, t: f64, last: SpectrumEntry, idx: usize, count: f64) -> f64 {
    let lam = last.value;
    match meta.growth {
        Growth::Polynomial { a, sigma, r } => {
            let p = meta.dimension_p;
            let al = poly_a_lambda(a, sigma, r, p, lam);
            let g = match upper_gamma_real(p + 1.0, t * lam) {
                Ok(g) => g,
                Err(_) => return f64::INFINITY,
            };
            let main = al * t.powf(-p) * g;
            let sub = count * (-t * lam).exp();
            (main - sub).max(0.0) + 1e-15 * main
        }
        Growth::Exponential { rho, a, b } => {
            let n = idx as f64;
            let y = (-t * lam * (rho - 1.0)).exp();
            if y >= 1.0 {
                return f64::INFINITY;
            }
            (-t * lam).exp() * ((a * n + b) * y / (1.0 - y) + a * y / ((1.0 - y) * (1.0 - y)))
        }
        Growth::LogSquared => {
            // values ln² m, m = idx + 2; ∫_{ln m}^∞ e^{u - t u²} du
            let lm = (idx as f64 + 2.0).ln();
            if lm <= 1.0 / (2.0 * t) {
                return f64::INFINITY;
            }
            (1.0 / (4.0 * t)).exp() * std::f64::consts::PI.sqrt() / (2.0 * t.sqrt()) * erfc(t.sqrt() * (lm - 1.0 / (2.0 * t)))
        }
        Growth::Finite => f64::INFINITY,
    }
}

/// Upper bound on Σ_{n > idx} M_n μ_n^{-σ}.
pub fn zeta_tail_bound(meta: &SpectrumMeta, sigma: f64, last: SpectrumEntry, idx: usize, count: f64) -> f64 {
    let lam = last.value;
    match meta.growth {
        Growth::Polynomial { a, sigma: sg, r } => {
            let p = meta.dimension_p;
            if sigma <= p {
                return f64::INFINITY;
            }
            let al = poly_a_lambda(a, sg, r, p, lam);
            let main = al * lam.powf(p - sigma) * sigma / (sigma - p);
            (main - count * lam.powf(-sigma)).max(0.0) + 1e-15 * main
        }
        Growth::Exponential { rho, a, b } => {
            if sigma <= 0.0 {
                return f64::INFINITY;
            }
            let n = idx as f64;
            let x = rho.powf(-sigma);
            lam.powf(-sigma) * ((a * n + b) * x / (1.0 - x) + a * x / ((1.0 - x) * (1.0 - x)))
        }
        Growth::LogSquared | Growth::Finite => f64::INFINITY,
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    Ok(())
}

// Drives a summation: `term` returns the term and a magnitude used for the cheap pre-check,
// `tail` returns the certified bound after a given entry.
fn drive<T, F, B>(spec: &Spectrum, tol: f64, mut term: F, tail: B) -> (TruncationReport<T>, bool)
where
    T: Real,
    F: FnMut(usize, SpectrumEntry) -> (T, f64),
    B: Fn(SpectrumEntry, usize, f64) -> f64,
{
    let mut sum = ChunkSum::new();
    let mut count = 0.0;
    let mut tail_bound = f64::INFINITY;
    let mut converged = false;
    let mut used = 0usize;
    let mut next_check = 0usize;
    let mut exhausted = true;
    for (i, e) in spec.iter().enumerate() {
        if i >= TERM_BUDGET {
            exhausted = false;
            break;
        }
        let (v, mag) = term(i, e);
        sum.push(v);
        count += e.mult as f64;
        used = i + 1;
        if mag <= tol && i >= next_check {
            tail_bound = tail(e, i, count);
            if tail_bound <= tol {
                converged = true;
                exhausted = false;
                break;
            }
            next_check = i + 1 + i / 64;
        }
    }
    if exhausted && used < TERM_BUDGET {
        // finite spectrum fully summed
        tail_bound = 0.0;
        converged = true;
    }
    (TruncationReport { value: sum.value(), terms_used: used, tail_bound, converged }, exhausted)
}

fn heat_impl<T: Real>(spec: &Spectrum, weight: Option<&DiagWeight>, t: T, tol: f64, with_kernel: bool) -> Result<TruncationReport<T>> {
    check_tol(tol)?;
    let tf = t.to64();
    if !(tf > 0.0) {
        return invalid("heat trace needs t > 0");
    }
    let sup = weight.map_or(1.0, |w| w.sup);
    let (mut rep, _) = drive(
        spec,
        tol,
        |i, e| {
            let w = weight.map_or(1.0, |w| (w.per_entry)(i));
            let m = T::of(e.mult as f64);
            let v = m * T::of(w) * (-t * T::of(e.value)).exp();
            (v, sup * e.mult as f64 * (-tf * e.value).exp())
        },
        |e, i, c| sup * heat_tail_bound(&spec.meta, tf, e, i, c),
    );
    if with_kernel {
        let kw = weight.map_or(1.0, |w| w.kernel);
        rep.value = rep.value + T::of(kw * spec.meta.kernel_dim as f64);
    }
    Ok(rep)
}

/// Tr K e^{-tH} = kernel weight · dim ker + Σ M_n w_n e^{-t μ_n}.
pub fn heat_trace<T: Real>(spec: &Spectrum, weight: Option<&DiagWeight>, t: T, tol: f64) -> Result<TruncationReport<T>> {
    heat_impl(spec, weight, t, tol, true)
}

/// Kernel-free heat trace Σ M_n e^{-t μ_n} in f64.
pub fn heat_trace_nonzero(spec: &Spectrum, t: f64, tol: f64) -> Result<TruncationReport<f64>> {
    heat_impl(spec, None, t, tol, false)
}

/// ζ(s) = kernel weight · dim ker + Σ M_n w_n μ_n^{-s} (kernel counted as 1^{-s}).
pub fn zeta_direct<T: Real>(
    spec: &Spectrum,
    weight: Option<&DiagWeight>,
    s: Complex<T>,
    tol: f64,
) -> Result<TruncationReport<Complex<T>>> {
    check_tol(tol)?;
    let sigma = s.re.to64();
    let p = spec.meta.dimension_p;
    if !p.is_finite() || sigma <= p {
        return Err(SalError::Divergent(format!(
            "zeta series of {} diverges at Re s = {sigma} (abscissa {p})",
            spec.meta.label
        )));
    }
    let sup = weight.map_or(1.0, |w| w.sup);
    let mut im = ChunkSum::<T>::new();
    let (mut rep, _) = drive(
        spec,
        tol,
        |i, e| {
            let w = weight.map_or(1.0, |w| (w.per_entry)(i));
            let ln = T::of(e.value.ln());
            let z = (-s * ln).exp() * T::of(e.mult as f64 * w);
            im.push(z.im);
            (z.re, sup * e.mult as f64 * e.value.powf(-sigma))
        },
        |e, i, c| sup * zeta_tail_bound(&spec.meta, sigma, e, i, c),
    );
    let kw = weight.map_or(1.0, |w| w.kernel);
    let value = Complex::new(rep.value + T::of(kw * spec.meta.kernel_dim as f64), im.value());
    Ok(TruncationReport { value, terms_used: rep.terms_used, tail_bound: std::mem::take(&mut rep.tail_bound), converged: rep.converged })
}

/// Tail bound of Σ_{μ > μ_c} M |f(μ/Λ)| from the envelope.
fn action_tail(meta: &SpectrumMeta, env: &Envelope, lambda: f64, last: SpectrumEntry, idx: usize, count: f64) -> f64 {
    let mu = last.value;
    match env {
        Envelope::Terms(ts) => ts
            .iter()
            .map(|t| {
                if t.c == 0.0 {
                    0.0
                } else if t.a > 0.0 {
                    let pre = if t.p == 0.0 { 1.0 } else { (lambda / mu).powf(t.p) };
                    t.c * pre * heat_tail_bound(meta, t.a / lambda, last, idx, count)
                } else {
                    t.c * lambda.powf(t.p) * zeta_tail_bound(meta, t.p, last, idx, count)
                }
            })
            .sum(),
        Envelope::Gaussian { c } => c * heat_tail_bound(meta, mu / (lambda * lambda), last, idx, count),
        Envelope::Compact { support } => {
            if mu / lambda >= *support {
                0.0
            } else {
                f64::INFINITY
            }
        }
        Envelope::Unknown => f64::INFINITY,
    }
}

fn envelope_at(env: &Envelope, x: f64) -> f64 {
    match env {
        Envelope::Terms(ts) => ts.iter().map(|t| t.c * x.powf(-t.p) * (-t.a * x).exp()).sum(),
        Envelope::Gaussian { c } => c * (-x * x).exp(),
        Envelope::Compact { support } => {
            if x > *support {
                0.0
            } else {
                f64::INFINITY
            }
        }
        Envelope::Unknown => f64::INFINITY,
    }
}

/// Tr f(|D|/Λ) = dim ker · f(0) + Σ M_n f(μ_n/Λ).
pub fn spectral_action_direct<A: ActionFunction + ?Sized>(
    spec: &Spectrum,
    f: &A,
    lambda: f64,
    tol: f64,
) -> Result<TruncationReport<f64>> {
    check_tol(tol)?;
    if !(lambda > 0.0) {
        return invalid("spectral action needs Λ > 0");
    }
    let env = f.envelope();
    match &env {
        Envelope::Unknown => {
            return Err(SalError::Unsupported("cut-off has no decay certificate and no compact support".into()));
        }
        Envelope::Terms(ts) => {
            let p = spec.meta.dimension_p;
            if ts.iter().any(|t| t.c > 0.0 && t.a == 0.0 && !(t.p > p)) && !matches!(spec.meta.growth, Growth::Finite) {
                return Err(SalError::Divergent(format!(
                    "cut-off decays like x^-{} which is not summable against dimension {p}",
                    env.decay_order()
                )));
            }
        }
        _ => {}
    }
    let (mut rep, _) = drive(
        spec,
        tol,
        |_, e| {
            let x = e.value / lambda;
            (e.mult as f64 * f.eval(x), e.mult as f64 * envelope_at(&env, x))
        },
        |e, i, c| action_tail(&spec.meta, &env, lambda, e, i, c),
    );
    rep.value += spec.meta.kernel_dim as f64 * f.eval(0.0);
    if !rep.value.is_finite() {
        return Err(SalError::NotConverged("cut-off evaluation returned a non-finite value".into()));
    }
    Ok(rep)
}

/// N(Λ) = dim ker + Σ_{μ_n ≤ Λ} M_n.
pub fn counting(spec: &Spectrum, lambda: f64) -> u64 {
    spec.meta.kernel_dim + spec.iter().take_while(|e| e.value <= lambda).map(|e| e.mult).sum::<u64>()
}

/// ⟨N(Λ)⟩ = ∫₀^Λ P + Σ_j c_j ζ(-j) + dim ker for multiplicity polynomial P(u) = Σ c_j u^j.
pub fn averaged_counting(coeffs: &[f64], lambda: f64, kernel_dim: u64) -> f64 {
    let mut acc = kernel_dim as f64;
    for (j, c) in coeffs.iter().enumerate() {
        let jf = j as f64;
        acc += c * lambda.powf(jf + 1.0) / (jf + 1.0);
        acc += c * riemann_zeta(Complex64::new(-jf, 0.0)).map(|z| z.re).unwrap_or(0.0);
    }
    acc
}

/// Tr_λ of a positive compact operator given by decreasing (value, multiplicity) pairs.
/// Fractional λ interpolates linearly between integer cuts.
pub fn partial_trace(values: &[(f64, u64)], level: f64) -> Result<f64> {
    if !(level >= 0.0) {
        return invalid("partial trace level must be nonnegative");
    }
    for (i, (v, m)) in values.iter().enumerate() {
        if !(*v > 0.0) || *m == 0 {
            return invalid(format!("entry {i}: values must be positive with positive multiplicity"));
        }
        if i > 0 && values[i - 1].0 < *v {
            return invalid(format!("entry {i}: values must be nonincreasing"));
        }
    }
    let mut left = level;
    let mut acc = Neumaier::new();
    for &(v, m) in values {
        let take = left.min(m as f64);
        acc.add(take * v);
        left -= take;
        if left <= 0.0 {
            break;
        }
    }
    Ok(acc.value())
}

/// Estimates of lim Tr_N(T)/log N for T = |D|^{-α}.
#[derive(Clone, Debug, PartialEq)]
pub struct DixmierEstimate {
    /// (Tr_N − Tr_{N/2}) / log 2.
    pub richardson: f64,
    /// Tr_N / log N.
    pub plain: f64,
    /// Total multiplicity N of the included levels.
    pub level: f64,
}

/// Dixmier-limit estimate from the first `n_levels` nonzero singular values of |D|.
pub fn dixmier_estimate(spec: &Spectrum, exponent: f64, n_levels: usize) -> Result<DixmierEstimate> {
    if !(exponent > 0.0) || n_levels < 2 {
        return invalid("dixmier estimate needs exponent > 0 and at least two levels");
    }
    let vals: Vec<(f64, u64)> = spec.iter().take(n_levels).map(|e| (e.value.powf(-exponent), e.mult)).collect();
    let n: f64 = vals.iter().map(|v| v.1 as f64).sum();
    let full = partial_trace(&vals, n)?;
    let half = partial_trace(&vals, n / 2.0)?;
    Ok(DixmierEstimate { richardson: (full - half) / std::f64::consts::LN_2, plain: full / n.ln(), level: n })
}

/// Σ a_n e^{-s b_n} with strictly increasing exponents.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralDirichletSeries {
    pub a: Vec<Complex64>,
    pub b: Vec<f64>,
}

impl GeneralDirichletSeries {
    pub fn new(a: Vec<Complex64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return invalid("coefficient and exponent lists must have equal nonzero length");
        }
        if b.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("exponents must be strictly increasing");
        }
        Ok(GeneralDirichletSeries { a, b })
    }

    /// Heat series of a spectrum: a_n = M_n, b_n = μ_n.
    pub fn from_spectrum(spec: &Spectrum, n: usize) -> Result<Self> {
        let (a, b) = spec.iter().take(n).map(|e| (Complex64::new(e.mult as f64, 0.0), e.value)).unzip();
        Self::new(a, b)
    }

    /// Partial sum at s over the stored terms.
    pub fn partial_sum(&self, s: Complex64) -> Complex64 {
        let mut re = Neumaier::new();
        let mut im = Neumaier::new();
        for (a, b) in self.a.iter().zip(&self.b) {
            let z = a * (-s * b).exp();
            re.add(z.re);
            im.add(z.im);
        }
        Complex64::new(re.value(), im.value())
    }
}

/// Empirical abscissa of convergence: max over n ∈ [n_probe/2, n_probe] of log|a_0+…+a_n| / b_n,
/// clamped at 0 (a bounded partial-sum sequence reads as 0).
pub fn abscissa_estimate(series: &GeneralDirichletSeries, n_probe: usize) -> Result<f64> {
    if n_probe < 10 {
        return invalid("n_probe must be at least 10");
    }
    let n = n_probe.min(series.a.len());
    let mut s = Complex64::new(0.0, 0.0);
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        s += series.a[i];
        if i + 1 >= n / 2 && series.b[i] > 0.0 {
            let l = s.norm();
            let v = if l > 0.0 { l.ln() / series.b[i] } else { f64::NEG_INFINITY };
            best = best.max(v);
        }
    }
    Ok(best.max(0.0))
}

/// Outcome of the Mellin identity check ∫₀^∞ t^{s-1} K(t) dt = Γ(s) ζ(s).
#[derive(Clone, Debug, PartialEq)]
pub struct MellinReport {
    pub integral: Complex64,
    pub reference: Complex64,
    pub residual: f64,
    /// Lower cut ε; the piece over [0, ε] is bounded, not computed.
    pub epsilon: f64,
    pub cut_bound: f64,
}

/// Bound on ∫₀^ε t^{σ-1} K(t) dt for the kernel-free heat trace.
pub fn small_t_bound(spec: &Spectrum, sigma: f64, eps: f64) -> Result<f64> {
    let meta = &spec.meta;
    let p = meta.dimension_p;
    match meta.growth {
        Growth::Polynomial { a, sigma: sg, r } => {
            if sigma <= p {
                return Err(SalError::Divergent("Mellin integral diverges for Re s ≤ p".into()));
            }
            // K(t) ≤ a 2^{k-1} (Γ(p+1) t^{-p} + sg^k), k = p r
            let k = p * r;
            let ck = 2f64.powf(k - 1.0).max(1.0);
            Ok(a * ck * (gamma_real(p + 1.0) * eps.powf(sigma - p) / (sigma - p) + sg.powf(k) * eps.powf(sigma) / sigma))
        }
        Growth::Exponential { rho, a, b } => {
            let mu0 = spec.iter().next().map(|e| e.value).unwrap_or(1.0);
            let g = gamma_real(sigma);
            let mut acc = 0.0;
            for n in 0..100_000 {
                let nf = n as f64;
                let mu = mu0 * rho.powf(nf);
                let x = eps * mu;
                let lower = (x.powf(sigma) / sigma).min(g);
                let term = (a * nf + b) * mu.powf(-sigma) * lower;
                acc += term;
                if x > 1.0 && term < 1e-30 * acc {
                    // remaining terms decay at least geometrically with ratio ρ^{-σ}
                    let ratio = rho.powf(-sigma);
                    acc += term * (1.0 + a / (a * nf + b)) * ratio / (1.0 - ratio) * 4.0;
                    break;
                }
            }
            Ok(acc)
        }
        Growth::Finite => {
            let total: f64 = spec.iter().map(|e| e.mult as f64).sum();
            Ok(total * eps.powf(sigma) / sigma)
        }
        Growth::LogSquared => Err(SalError::Unsupported("no Mellin transform for a spectrum without zeta function".into())),
    }
}

/// Compare ∫₀^∞ t^{s-1} K(t) dt against Γ(s) ζ(s), both kernel-free.
pub fn mellin_check(spec: &Spectrum, s: Complex64, rel_tol: f64) -> Result<MellinReport> {
    check_tol(rel_tol)?;
    let z = zeta_direct::<f64>(spec, None, s, 1e-15)?;
    if !z.converged {
        return Err(SalError::NotConverged("reference zeta sum did not converge".into()));
    }
    let reference = gamma(s)? * (z.value - spec.meta.kernel_dim as f64);
    let target = 0.01 * rel_tol * reference.norm();
    let mut eps = 0.5;
    let mut cut = small_t_bound(spec, s.re, eps)?;
    while cut > target {
        eps *= 0.25;
        if eps < 1e-14 {
            return Err(SalError::NotConverged("small-t cut cannot reach the requested tolerance".into()));
        }
        cut = small_t_bound(spec, s.re, eps)?;
    }
    let first = spec.iter().next().ok_or_else(|| SalError::InvalidArgument("empty spectrum".into()))?;
    let lower = |t: f64| first.mult as f64 * (-t * first.value).exp();
    let heat = |t: f64| -> Complex64 {
        match heat_trace_nonzero(spec, t, 1e-14 * lower(t)) {
            Ok(r) => Complex64::new(r.value, 0.0),
            Err(_) => Complex64::new(f64::NAN, 0.0),
        }
    };
    let (at, rt) = (1e-300, 1e-13);
    let mut acc = Complex64::new(0.0, 0.0);
    // [ε, 1] with t = e^u
    let u0 = eps.ln();
    let mut lo = u0;
    while lo < 0.0 {
        let hi = (lo + 1.0).min(0.0);
        acc += integrate_c(|u| (s * u).exp() * heat(u.exp()), lo, hi, at, rt)?.value;
        lo = hi;
    }
    // [1, ∞)
    let step = 2.0 / first.value.max(1e-3);
    let mut lo = 1.0;
    loop {
        let hi = lo + step;
        let piece = integrate_c(|t| (s * t.ln()).exp() / t * heat(t), lo, hi, at, rt)?.value;
        acc += piece;
        if piece.norm() < 1e-17 * acc.norm() || lo > 1e6 {
            break;
        }
        lo = hi;
    }
    if !acc.re.is_finite() {
        return Err(SalError::NotConverged("heat trace failed inside the Mellin quadrature".into()));
    }
    let residual = (acc - reference).norm() / reference.norm();
    Ok(MellinReport { integral: acc, reference, residual, epsilon: eps, cut_bound: cut })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoffs::{gaussian, indicator_unit, CutoffFunction};
    use crate::spectra::{PodlesParams, SphereSpin};

    fn s1() -> Spectrum {
        Spectrum::sphere(1, SphereSpin::Trivial).unwrap()
    }

    #[test]
    fn s1_heat_is_coth() {
        for t in [0.1f64, 0.5, 2.0] {
            let r = heat_trace::<f64>(&s1(), None, t, 1e-15).unwrap();
            assert!(r.converged);
            let exact = 1.0 / (t / 2.0).tanh();
            assert!((r.value - exact).abs() < 1e-12, "t={t}: {} vs {exact}", r.value);
        }
        let r = heat_trace::<f64>(&s1(), None, 0.1, 1e-15).unwrap();
        assert!((r.value - 20.0166638895501).abs() < 1e-11);
    }

    #[test]
    fn f32_heat() {
        let r = heat_trace::<f32>(&s1(), None, 0.5f32, 1e-6).unwrap();
        let exact = 1.0 / 0.25f64.tanh();
        assert!((r.value as f64 - exact).abs() < 1e-5);
    }

    #[test]
    fn large_t_tends_to_kernel() {
        let r = heat_trace::<f64>(&Spectrum::nc_torus(2).unwrap(), None, 60.0, 1e-15).unwrap();
        assert!((r.value - 2.0).abs() < 1e-20 + 1e-15);
    }

    #[test]
    fn nct2_gaussian_sum() {
        let sq = Spectrum::nc_torus(2).unwrap().squared().unwrap();
        let t = 0.05;
        let r = heat_trace::<f64>(&sq, None, t, 1e-13).unwrap();
        let exact = 2.0 * std::f64::consts::PI / t;
        assert!(((r.value - exact) / exact).abs() < 1e-10, "{} vs {exact}", r.value);
    }

    #[test]
    fn zeta_examples() {
        let z = zeta_direct::<f64>(&s1(), None, Complex64::new(3.0, 0.0), 1e-13).unwrap();
        let e = 1.0 + 2.0 * 1.2020569031595942;
        assert!((z.value.re - e).abs() < 1e-12);
        let s2 = Spectrum::sphere(2, SphereSpin::NonTrivial).unwrap().squared().unwrap();
        let z = zeta_direct::<f64>(&s2, None, Complex64::new(3.0, 0.0), 1e-13).unwrap();
        assert!((z.value.re - 4.0 * 1.0369277551433699).abs() < 1e-12);
        let p = PodlesParams::new(0.5, Complex64::new(1.0, 0.0)).unwrap();
        let sp = Spectrum::podles(p, true);
        let z = zeta_direct::<f64>(&sp, None, Complex64::new(3.0, 0.0), 1e-15).unwrap();
        let u = p.u();
        let e = 4.0 * (u / 0.5f64).powf(-3.0) / (1.0 - 0.125f64).powi(2);
        assert!((z.value.re - e).abs() < 1e-13 * e);
        assert!(zeta_direct::<f64>(&s1(), None, Complex64::new(1.0, 0.0), 1e-10).is_err());
        assert!(zeta_direct::<f64>(&Spectrum::log_squared(), None, Complex64::new(50.0, 0.0), 1e-10).is_err());
        assert!(heat_trace::<f64>(&Spectrum::log_squared(), None, 1.0, 1e-10).unwrap().converged);
    }

    #[test]
    fn tail_bound_is_honest() {
        let spec = Spectrum::sphere(3, SphereSpin::NonTrivial).unwrap();
        let full = heat_trace::<f64>(&spec, None, 0.3, 1e-15).unwrap().value;
        let rough = heat_trace::<f64>(&spec, None, 0.3, 1e-3).unwrap();
        assert!(rough.converged);
        assert!((full - rough.value).abs() <= rough.tail_bound);
        let zf = zeta_direct::<f64>(&spec, None, Complex64::new(4.5, 1.0), 1e-13).unwrap().value;
        let zr = zeta_direct::<f64>(&spec, None, Complex64::new(4.5, 1.0), 1e-4).unwrap();
        assert!((zf - zr.value).norm() <= zr.tail_bound);
    }

    #[test]
    fn action_examples() {
        let r = spectral_action_direct(&s1(), &indicator_unit(), 5.5, 1e-12).unwrap();
        assert_eq!(r.value, 11.0);
        let s3 = Spectrum::sphere(3, SphereSpin::NonTrivial).unwrap();
        let r = spectral_action_direct(&s3, &gaussian(), 10.0, 1e-12).unwrap();
        let sp = std::f64::consts::PI.sqrt();
        let e = sp / 2.0 * 1000.0 - sp / 4.0 * 10.0;
        assert!(((r.value - e) / e).abs() < 1e-8);
        // e^{-ax} reproduces the heat trace
        let f = CutoffFunction::exp(2.0).unwrap();
        let a = spectral_action_direct(&s3, &f, 7.0, 1e-13).unwrap();
        let h = heat_trace::<f64>(&s3, None, 2.0 / 7.0, 1e-13).unwrap();
        assert!((a.value - h.value).abs() < 1e-10);
        // slow decay refused
        let w = CutoffFunction::window(0.0, 1.0).unwrap();
        assert!(spectral_action_direct(&s3, &w, 7.0, 1e-8).is_err());
    }

    #[test]
    fn counting_examples() {
        assert_eq!(counting(&s1(), 5.5), 11);
        assert!((averaged_counting(&[2.0], 7.3, 1) - 14.6).abs() < 1e-13);
        assert!((averaged_counting(&[0.0, 0.0, 1.0], 3.0, 2) - 11.0).abs() < 1e-13);
        for k in 10..=100 {
            let lam = k as f64 + 0.37;
            let d = counting(&s1(), lam) as f64 - averaged_counting(&[2.0], lam, 1);
            assert!(d.abs() <= 2.0);
        }
    }

    #[test]
    fn partial_traces() {
        let v = vec![(1.0, 2), (0.5, 3), (0.25, 1)];
        assert_eq!(partial_trace(&v, 2.0).unwrap(), 2.0);
        assert_eq!(partial_trace(&v, 3.0).unwrap(), 2.5);
        assert_eq!(partial_trace(&v, 2.5).unwrap(), 2.25);
        assert!(partial_trace(&[(0.0, 1)], 1.0).is_err());
        let s2 = Spectrum::sphere(2, SphereSpin::NonTrivial).unwrap();
        let d = dixmier_estimate(&s2, 2.0, 100_000).unwrap();
        assert!((d.richardson - 2.0).abs() < 0.1, "{d:?}");
        let d3 = dixmier_estimate(&s2, 3.0, 100_000).unwrap();
        assert!(d3.richardson < 1e-3);
    }

    #[test]
    fn abscissa() {
        let n = 100_000;
        let ones = GeneralDirichletSeries::new(vec![Complex64::new(1.0, 0.0); n], (1..=n).map(|k| (k as f64).ln()).collect()).unwrap();
        let a = abscissa_estimate(&ones, n).unwrap();
        assert!((a - 1.0).abs() < 0.05);
        let eta = GeneralDirichletSeries::new(
            (0..n).map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect(),
            (1..=n).map(|k| (k as f64).ln()).collect(),
        )
        .unwrap();
        assert!(abscissa_estimate(&eta, n).unwrap() < 1e-12);
        let heat = GeneralDirichletSeries::from_spectrum(&s1(), 10_000).unwrap();
        assert!(abscissa_estimate(&heat, 10_000).unwrap() < 2e-3);
        assert!(GeneralDirichletSeries::new(vec![Complex64::new(1.0, 0.0); 2], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn mellin() {
        let s1sq = s1().squared().unwrap();
        let r = mellin_check(&s1sq, Complex64::new(2.0, 0.0), 1e-8).unwrap();
        assert!(r.residual < 1e-8, "{r:?}");
        let p = PodlesParams::new(0.5, Complex64::new(1.0, 0.0)).unwrap();
        let r = mellin_check(&Spectrum::podles(p, true), Complex64::new(1.0, 0.5), 1e-8).unwrap();
        assert!(r.residual < 1e-7, "{r:?}");
    }
}
