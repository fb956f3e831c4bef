//! Cut-off functions f = L[φ] for signed measures φ on [0, ∞), plus
//! pointwise cut-offs (Gaussian, compact support) for direct summation only.

use crate::error::{invalid, Result, SalError};
use crate::laurent::Laurent;
use crate::quadrature::{integrate, integrate_c, integrate_to_inf};
use crate::special_fn::gamma::{gamma_real, gamma_series};
use crate::special_fn::rgamma;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

/// |f(x)| ≤ c x^{-p} e^{-a x} for x > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvTerm {
    pub c: f64,
    pub p: f64,
    pub a: f64,
}

/// Decay certificate used to bound truncation tails of Σ M f(μ/Λ).
#[derive(Clone, Debug, PartialEq)]
pub enum Envelope {
    /// |f| ≤ Σ terms.
    Terms(Vec<EnvTerm>),
    /// |f(x)| ≤ c e^{-x²}.
    Gaussian { c: f64 },
    /// f(x) = 0 for x > support.
    Compact { support: f64 },
    Unknown,
}

impl Envelope {
    /// Envelope of a product of two functions.
    pub fn product(&self, other: &Envelope) -> Envelope {
        match (self, other) {
            (Envelope::Terms(a), Envelope::Terms(b)) => {
                let mut out = Vec::with_capacity(a.len() * b.len());
                for x in a {
                    for y in b {
                        out.push(EnvTerm { c: x.c * y.c, p: x.p + y.p, a: x.a + y.a });
                    }
                }
                Envelope::Terms(out)
            }
            (Envelope::Compact { support: s }, Envelope::Compact { support: t }) => Envelope::Compact { support: s.min(*t) },
            _ => Envelope::Unknown,
        }
    }

    /// Decay order p: f = O(x^{-p}); infinite for exponential decay.
    pub fn decay_order(&self) -> f64 {
        match self {
            Envelope::Terms(ts) => ts.iter().map(|t| if t.a > 0.0 { f64::INFINITY } else { t.p }).fold(f64::INFINITY, f64::min),
            Envelope::Gaussian { .. } | Envelope::Compact { .. } => f64::INFINITY,
            Envelope::Unknown => 0.0,
        }
    }
}

/// Functions usable in Tr f(|D|/Λ).
pub trait ActionFunction: Sync {
    fn eval(&self, x: f64) -> f64;
    fn envelope(&self) -> Envelope;
}

/// Pointwise cut-off with a declared envelope.
pub struct Pointwise<F: Fn(f64) -> f64 + Sync> {
    pub f: F,
    pub env: Envelope,
}

impl<F: Fn(f64) -> f64 + Sync> ActionFunction for Pointwise<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn envelope(&self) -> Envelope {
        self.env.clone()
    }
}

/// f(x) = e^{-x²}; a Schwartz function that is not a Laplace transform.
pub fn gaussian() -> Pointwise<fn(f64) -> f64> {
    fn g(x: f64) -> f64 {
        (-x * x).exp()
    }
    Pointwise { f: g, env: Envelope::Gaussian { c: 1.0 } }
}

/// χ_{[0, 1]}, the counting-function cut-off.
pub fn indicator_unit() -> Pointwise<fn(f64) -> f64> {
    fn g(x: f64) -> f64 {
        if x <= 1.0 {
            1.0
        } else {
            0.0
        }
    }
    Pointwise { f: g, env: Envelope::Compact { support: 1.0 } }
}

/// Absolutely continuous parts of the measure.
#[derive(Clone, Debug, PartialEq)]
pub enum Density {
    /// w (s - shift)^{r-1} e^{-rate (s - shift)} / Γ(r) on s > shift.
    Gamma { w: f64, r: f64, rate: f64, shift: f64 },
    /// w on [a, b].
    Uniform { a: f64, b: f64, w: f64 },
    /// Piecewise linear through (grid, values), zero outside.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
    /// w e^{-v^{1/4}} sin(v^{1/4}), v = s - shift > 0; every moment vanishes.
    NullTaylor { w: f64, shift: f64 },
}

fn quad_tol() -> (f64, f64) {
    (1e-15, 1e-12)
}

// ∫_0^∞ 4u³ g(u) du style integrals on [0, 80] in unit pieces.
fn u_integral<F: Fn(f64) -> f64>(g: F) -> Result<f64> {
    let (at, rt) = quad_tol();
    let mut acc = 0.0;
    let mut lo = 0.0;
    while lo < 80.0 {
        let hi = lo + 2.0;
        acc += integrate(&g, lo, hi, at, rt)?.0;
        lo = hi;
    }
    Ok(acc)
}

// Laplace transform of a linear segment: ∫_{s0}^{s0+h} (v0 + slope (s-s0)) e^{-sx} ds.
fn segment_laplace(s0: f64, h: f64, v0: f64, v1: f64, x: f64) -> f64 {
    let hx = h * x;
    let (e0, e1) = if hx.abs() < 0.1 {
        let mut e0 = 0.0;
        let mut e1 = 0.0;
        let mut pw = 1.0;
        let mut fact = 1.0;
        for k in 0..12 {
            if k > 0 {
                fact *= k as f64;
                pw *= -hx;
            }
            e0 += pw / (fact * (k as f64 + 1.0));
            e1 += pw / (fact * (k as f64 + 2.0));
        }
        (h * e0, h * h * e1)
    } else {
        let e = (-hx).exp();
        ((1.0 - e) / x, (1.0 - e * (1.0 + hx)) / (x * x))
    };
    (-s0 * x).exp() * (v0 * e0 + (v1 - v0) / h * e1)
}

impl Density {
    /// Density value at s.
    pub fn pdf(&self, s: f64) -> f64 {
        match self {
            Density::Gamma { w, r, rate, shift } => {
                let v = s - shift;
                if v <= 0.0 {
                    return 0.0;
                }
                w * ((r - 1.0) * v.ln() - rate * v).exp() * rgamma(Complex64::new(*r, 0.0)).re
            }
            Density::Uniform { a, b, w } => {
                if s >= *a && s <= *b {
                    *w
                } else {
                    0.0
                }
            }
            Density::Tabulated { grid, values } => {
                if s < grid[0] || s > *grid.last().unwrap() {
                    return 0.0;
                }
                let i = grid.partition_point(|&g| g <= s).clamp(1, grid.len() - 1);
                let (g0, g1) = (grid[i - 1], grid[i]);
                values[i - 1] + (values[i] - values[i - 1]) * (s - g0) / (g1 - g0)
            }
            Density::NullTaylor { w, shift } => {
                let v = s - shift;
                if v <= 0.0 {
                    return 0.0;
                }
                let u = v.powf(0.25);
                w * (-u).exp() * u.sin()
            }
        }
    }

    /// ∫ e^{-sx} φ(s) ds.
    pub fn laplace(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Density::Gamma { w, r, rate, shift } => w * (-shift * x).exp() * (rate + x).powf(-r),
            Density::Uniform { a, b, w } => {
                let h = b - a;
                w * segment_laplace(*a, h, 1.0, 1.0, x)
            }
            Density::Tabulated { grid, values } => {
                let mut acc = 0.0;
                for i in 1..grid.len() {
                    acc += segment_laplace(grid[i - 1], grid[i] - grid[i - 1], values[i - 1], values[i], x);
                }
                acc
            }
            Density::NullTaylor { w, shift } => {
                let v = u_integral(|u| 4.0 * u.powi(3) * (-u).exp() * u.sin() * (-u.powi(4) * x).exp())?;
                w * (-shift * x).exp() * v
            }
        })
    }

    /// Same density translated by c and scaled by k.
    pub fn shifted(&self, c: f64, k: f64) -> Density {
        match self {
            Density::Gamma { w, r, rate, shift } => Density::Gamma { w: w * k, r: *r, rate: *rate, shift: shift + c },
            Density::Uniform { a, b, w } => Density::Uniform { a: a + c, b: b + c, w: w * k },
            Density::Tabulated { grid, values } => Density::Tabulated {
                grid: grid.iter().map(|g| g + c).collect(),
                values: values.iter().map(|v| v * k).collect(),
            },
            Density::NullTaylor { w, shift } => Density::NullTaylor { w: w * k, shift: shift + c },
        }
    }

    fn lower(&self) -> f64 {
        match self {
            Density::Gamma { shift, .. } | Density::NullTaylor { shift, .. } => *shift,
            Density::Uniform { a, .. } => *a,
            Density::Tabulated { grid, .. } => grid[0],
        }
    }

    // Point beyond which the remaining |mass| is negligible.
    fn upper(&self) -> f64 {
        match self {
            Density::Gamma { r, rate, shift, .. } => shift + (r + 40.0 + 8.0 * r.sqrt()) / rate,
            Density::Uniform { b, .. } => *b,
            Density::Tabulated { grid, .. } => *grid.last().unwrap(),
            Density::NullTaylor { shift, .. } => shift + 45f64.powi(4),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Density::Uniform { a, b, .. } => vec![*a, *b],
            Density::Tabulated { grid, .. } => grid.clone(),
            _ => vec![self.lower()],
        }
    }

    fn envelope_term(&self) -> Result<EnvTerm> {
        Ok(match self {
            Density::Gamma { w, r, shift, .. } => EnvTerm { c: w.abs(), p: *r, a: *shift },
            Density::Uniform { a, b, w } => {
                if *a > 0.0 {
                    EnvTerm { c: w.abs() * (b - a), p: 0.0, a: *a }
                } else {
                    EnvTerm { c: w.abs(), p: 1.0, a: 0.0 }
                }
            }
            Density::Tabulated { grid, values } => {
                if grid[0] > 0.0 {
                    EnvTerm { c: self.abs_moment(0.0)?, p: 0.0, a: grid[0] }
                } else {
                    EnvTerm { c: values.iter().fold(0.0f64, |m, v| m.max(v.abs())), p: 1.0, a: 0.0 }
                }
            }
            Density::NullTaylor { w, shift } => EnvTerm { c: gamma_real(1.25) * w.abs(), p: 1.25, a: *shift },
        })
    }

    /// Infimum of exponents m with ∫ s^m |φ| < ∞.
    fn min_moment(&self) -> f64 {
        if self.lower() > 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            Density::Gamma { r, .. } => -r,
            Density::Uniform { .. } => -1.0,
            Density::Tabulated { values, grid } => {
                if values[0] != 0.0 {
                    -1.0
                } else {
                    // linear vanishing at the left end
                    let slope = (values[1] - values[0]) / (grid[1] - grid[0]);
                    if slope != 0.0 {
                        -2.0
                    } else {
                        -1.0
                    }
                }
            }
            Density::NullTaylor { .. } => -1.25,
        }
    }

    // ∫ g(s) φ(s) ds by quadrature over the support.
    fn quad_against<G: Fn(f64) -> Complex64>(&self, g: G, absolute: bool) -> Result<Complex64> {
        let (at, rt) = quad_tol();
        let h = |s: f64| {
            let p = self.pdf(s);
            g(s) * if absolute { p.abs() } else { p }
        };
        match self {
            Density::NullTaylor { w, shift } => {
                // s = shift + u⁴
                let k = |u: f64| {
                    let v = u.powi(4);
                    let dens = w * (-u).exp() * u.sin();
                    let dens = if absolute { dens.abs() } else { dens };
                    g(shift + v) * dens * 4.0 * u.powi(3)
                };
                let mut acc = Complex64::new(0.0, 0.0);
                let mut lo = 0.0;
                while lo < 80.0 {
                    acc += integrate_c(&k, lo, lo + 2.0, at, rt)?.value;
                    lo += 2.0;
                }
                Ok(acc)
            }
            Density::Gamma { shift, r, rate, .. } => {
                // s = shift + v; integrate v on [0, 1] with v = t^{1/r} substitution near zero, then to infinity
                let lo = *shift;
                let near = |t: f64| {
                    if t <= 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let v = t.powf(1.0 / r);
                    // dv = (1/r) t^{1/r - 1} dt, pdf ∝ v^{r-1}: product ∝ 1/r
                    let dens = if absolute { self.pdf(lo + v).abs() } else { self.pdf(lo + v) };
                    g(lo + v) * dens * v / (r * t)
                };
                let a = integrate_c(near, 0.0, 1.0, at, rt)?.value;
                let tail_end = (self.upper() - lo).max(2.0);
                let mut acc = a;
                let mut x0 = 1.0;
                let step = (1.0 / rate).max(1.0);
                while x0 < tail_end {
                    acc += integrate_c(|v| h(lo + v), x0, x0 + step, at, rt)?.value;
                    x0 += step;
                }
                Ok(acc)
            }
            _ => {
                let pts = self.breakpoints();
                let mut acc = Complex64::new(0.0, 0.0);
                for w in pts.windows(2) {
                    if w[1] > w[0] {
                        acc += integrate_c(h, w[0], w[1], at, rt)?.value;
                    }
                }
                Ok(acc)
            }
        }
    }

    /// ∫ s^m φ(s) ds.
    pub fn moment(&self, m: f64) -> Result<f64> {
        if m <= self.min_moment() {
            return Err(SalError::Divergent(format!("moment of order {m} diverges (needs m > {})", self.min_moment())));
        }
        match self {
            Density::Gamma { w, r, rate, shift } if *shift == 0.0 => {
                Ok(w * gamma_real(r + m) / gamma_real(*r) * rate.powf(-(r + m)))
            }
            Density::Uniform { a, b, w } => Ok(if (m + 1.0).abs() < 1e-300 {
                w * (b / a).ln()
            } else {
                w * (b.powf(m + 1.0) - a.powf(m + 1.0)) / (m + 1.0)
            }),
            Density::NullTaylor { w, shift } if *shift == 0.0 => {
                let c = 4.0 * m + 4.0;
                let sin = if (m - m.round()).abs() < 1e-15 { 0.0 } else { (c * PI / 4.0).sin() };
                Ok(4.0 * w * gamma_real(c) * 2f64.powf(-c / 2.0) * sin)
            }
            _ => Ok(self.quad_against(|s| Complex64::new(s.powf(m), 0.0), false)?.re),
        }
    }

    /// ∫ s^m |φ(s)| ds.
    pub fn abs_moment(&self, m: f64) -> Result<f64> {
        if m <= self.min_moment() {
            return Err(SalError::Divergent(format!("absolute moment of order {m} diverges (needs m > {})", self.min_moment())));
        }
        match self {
            Density::Gamma { .. } | Density::Uniform { .. } => Ok(self.moment(m)?.abs()),
            _ => Ok(self.quad_against(|s| Complex64::new(s.powf(m), 0.0), true)?.re),
        }
    }

    /// ∫ s^{-z} log^n(s) φ(s) ds.
    pub fn log_moment(&self, z: Complex64, n: usize) -> Result<Complex64> {
        if -z.re <= self.min_moment() {
            return Err(SalError::Divergent(format!("f-moment at z = {z} diverges (needs Re z < {})", -self.min_moment())));
        }
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        match self {
            Density::Gamma { w, r, rate, shift } if *shift == 0.0 => {
                // ∂_c^n [Γ(c) rate^{-c}] at c = r - z
                let c = Complex64::new(*r, 0.0) - z;
                let g = gamma_series(c, n + 2);
                let e = exp_linear(-rate.ln(), n + 2).scale((-c * rate.ln()).exp());
                let d = g.mul(&e).coeff(n as i32) * fact;
                Ok(d * *w * rgamma(Complex64::new(*r, 0.0)).re)
            }
            Density::NullTaylor { w, shift } if *shift == 0.0 => {
                // s = u⁴: 4 w 4^n ∂_c^n [Γ(c) 2^{-c/2} sin(cπ/4)] at c = 4 - 4z
                let c = Complex64::new(4.0, 0.0) - 4.0 * z;
                let g = gamma_series(c, n + 2);
                let e = exp_linear(-0.5 * 2f64.ln(), n + 2).scale((-c * 0.5 * 2f64.ln()).exp());
                let mut sin_c = vec![Complex64::new(0.0, 0.0); n + 2];
                let mut f = 1.0;
                for (k, slot) in sin_c.iter_mut().enumerate() {
                    if k > 0 {
                        f *= k as f64;
                    }
                    let arg = c * (PI / 4.0) + k as f64 * PI / 2.0;
                    *slot = arg.sin() * (PI / 4.0).powi(k as i32) / f;
                }
                let s = Laurent::new(0, sin_c);
                let d = g.mul(&e).mul(&s).coeff(n as i32) * fact;
                Ok(d * 4.0 * *w * 4f64.powi(n as i32))
            }
            Density::Uniform { a, b, w } if *a == 0.0 => {
                // s = b e^{-u}
                let lb = b.ln();
                let (at, rt) = quad_tol();
                let k = |u: f64| {
                    let ls = lb - u;
                    ((1.0 - z) * ls).exp() * ls.powi(n as i32)
                };
                let mut acc = Complex64::new(0.0, 0.0);
                let mut lo = 0.0;
                let rate = (1.0 - z.re).max(1e-3);
                let end = 50.0 / rate;
                while lo < end {
                    acc += integrate_c(k, lo, lo + 1.0, at, rt)?.value;
                    lo += 1.0;
                }
                Ok(acc * *w)
            }
            _ => self.quad_against(|s| (-z * s.ln()).exp() * s.ln().powi(n as i32), false),
        }
    }
}

// Power series of e^{k h}.
fn exp_linear(k: f64, len: usize) -> Laurent {
    let mut c = vec![Complex64::new(0.0, 0.0); len];
    let mut t = 1.0;
    for (j, slot) in c.iter_mut().enumerate() {
        if j > 0 {
            t *= k / j as f64;
        }
        *slot = Complex64::new(t, 0.0);
    }
    Laurent::new(0, c)
}

/// Signed measure: atoms plus densities.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SignedMeasure {
    pub atoms: Vec<(f64, f64)>,
    pub densities: Vec<Density>,
}

impl SignedMeasure {
    pub fn validate(&self) -> Result<()> {
        for (i, (a, _)) in self.atoms.iter().enumerate() {
            if !(*a >= 0.0) {
                return invalid(format!("atom at negative location {a}"));
            }
            if self.atoms[..i].iter().any(|(b, _)| b == a) {
                return invalid(format!("duplicate atom location {a}"));
            }
        }
        for d in &self.densities {
            match d {
                Density::Gamma { r, rate, shift, .. } => {
                    if !(*r > 0.0 && *rate > 0.0 && *shift >= 0.0) {
                        return invalid("gamma density needs r > 0, rate > 0, shift ≥ 0");
                    }
                }
                Density::Uniform { a, b, .. } => {
                    if !(*a >= 0.0 && b > a) {
                        return invalid("uniform density needs 0 ≤ a < b");
                    }
                }
                Density::Tabulated { grid, values } => {
                    if grid.len() < 2 || grid.len() != values.len() || grid[0] < 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
                        return invalid("tabulated density needs an increasing nonnegative grid");
                    }
                }
                Density::NullTaylor { shift, .. } => {
                    if *shift < 0.0 {
                        return invalid("null-Taylor density needs shift ≥ 0");
                    }
                }
            }
        }
        Ok(())
    }

    fn min_moment(&self) -> f64 {
        let atoms = if self.atoms.iter().any(|(a, w)| *a == 0.0 && *w != 0.0) { 0.0 } else { f64::NEG_INFINITY };
        self.densities.iter().map(|d| d.min_moment()).fold(atoms, f64::max)
    }
}

/// f = L[φ] with its decay certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffFunction {
    pub measure: SignedMeasure,
    pub label: String,
    envelope: Envelope,
}

impl fmt::Display for CutoffFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl CutoffFunction {
    /// Build from a measure; the envelope is derived from the components.
    pub fn from_measure(measure: SignedMeasure, label: &str) -> Result<Self> {
        measure.validate()?;
        let mut terms = Vec::new();
        for &(a, w) in &measure.atoms {
            if w != 0.0 {
                terms.push(EnvTerm { c: w.abs(), p: 0.0, a });
            }
        }
        for d in &measure.densities {
            terms.push(d.envelope_term()?);
        }
        Ok(CutoffFunction { measure, label: label.to_string(), envelope: Envelope::Terms(terms) })
    }

    /// e^{-a x} = L[δ_a].
    pub fn exp(a: f64) -> Result<Self> {
        Self::from_measure(SignedMeasure { atoms: vec![(a, 1.0)], densities: vec![] }, &format!("exp:{a}"))
    }

    /// (e^{-ax} - e^{-bx})/x = L[χ_{[a,b]}].
    pub fn window(a: f64, b: f64) -> Result<Self> {
        Self::from_measure(
            SignedMeasure { atoms: vec![], densities: vec![Density::Uniform { a, b, w: 1.0 }] },
            &format!("window:{a},{b}"),
        )
    }

    /// (a x + b)^{-r}.
    pub fn power_law(a: f64, b: f64, r: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && r > 0.0) {
            return invalid("powerlaw needs a, b, r > 0");
        }
        Self::from_measure(
            SignedMeasure { atoms: vec![], densities: vec![Density::Gamma { w: a.powf(-r), r, rate: b / a, shift: 0.0 }] },
            &format!("powerlaw:{a},{b},{r}"),
        )
    }

    /// Laplace transform of e^{-s^{1/4}} sin(s^{1/4}): f^{(n)}(0) = 0 for all n.
    pub fn null_taylor() -> Result<Self> {
        Self::from_measure(
            SignedMeasure { atoms: vec![], densities: vec![Density::NullTaylor { w: 1.0, shift: 0.0 }] },
            "nulltaylor",
        )
    }

    /// Pointwise product f·g, i.e. the convolution of the measures.
    pub fn product(&self, other: &CutoffFunction) -> Result<Self> {
        let (m1, m2) = (&self.measure, &other.measure);
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for &(a, w) in &m1.atoms {
            for &(b, v) in &m2.atoms {
                let loc = a + b;
                match atoms.iter_mut().find(|(l, _)| (*l - loc).abs() <= 1e-15 * loc.max(1.0)) {
                    Some(slot) => slot.1 += w * v,
                    None => atoms.push((loc, w * v)),
                }
            }
        }
        let mut densities = Vec::new();
        for &(a, w) in &m1.atoms {
            densities.extend(m2.densities.iter().map(|d| d.shifted(a, w)));
        }
        for &(b, v) in &m2.atoms {
            densities.extend(m1.densities.iter().map(|d| d.shifted(b, v)));
        }
        for d1 in &m1.densities {
            for d2 in &m2.densities {
                densities.push(convolve(d1, d2)?);
            }
        }
        let measure = SignedMeasure { atoms, densities };
        measure.validate()?;
        Ok(CutoffFunction {
            measure,
            label: format!("product({},{})", self.label, other.label),
            envelope: self.envelope.product(&other.envelope),
        })
    }

    /// f^n.
    pub fn power(&self, n: u32) -> Result<Self> {
        if n == 0 {
            return invalid("power needs n ≥ 1");
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.product(self)?;
        }
        Ok(out)
    }

    /// f(x) for x ≥ 0.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return invalid("cut-off evaluated at negative x");
        }
        let mut acc = 0.0;
        for &(a, w) in &self.measure.atoms {
            acc += w * (-a * x).exp();
        }
        for d in &self.measure.densities {
            acc += d.laplace(x)?;
        }
        Ok(acc)
    }

    /// ∫ s^m dφ.
    pub fn moment(&self, m: f64) -> Result<f64> {
        let mut acc = 0.0;
        for &(a, w) in &self.measure.atoms {
            acc += w * atom_power(a, m)?;
        }
        for d in &self.measure.densities {
            acc += d.moment(m)?;
        }
        Ok(acc)
    }

    /// ∫ s^m d|φ| (an upper bound when components overlap with opposite signs).
    pub fn abs_moment(&self, m: f64) -> Result<f64> {
        let mut acc = 0.0;
        for &(a, w) in &self.measure.atoms {
            acc += w.abs() * atom_power(a, m)?;
        }
        for d in &self.measure.densities {
            acc += d.abs_moment(m)?;
        }
        Ok(acc)
    }

    /// f_{z,n} = ∫ s^{-z} log^n(s) dφ(s).
    pub fn f_moment(&self, z: Complex64, n: usize) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, w) in &self.measure.atoms {
            if a == 0.0 {
                if w == 0.0 {
                    continue;
                }
                if n == 0 && z == Complex64::new(0.0, 0.0) {
                    acc += w;
                    continue;
                }
                return Err(SalError::Divergent(format!("atom at 0 has no f-moment at z = {z}, n = {n}")));
            }
            acc += w * (-z * a.ln()).exp() * a.ln().powi(n as i32);
        }
        for d in &self.measure.densities {
            acc += d.log_moment(z, n)?;
        }
        Ok(acc)
    }

    /// Infimum of m with finite |φ|-moments.
    pub fn min_moment(&self) -> f64 {
        self.measure.min_moment()
    }

    /// Decay order of the certificate.
    pub fn decay_order(&self) -> f64 {
        self.envelope.decay_order()
    }

    /// Sampled nonnegativity on a log-spaced grid of `n` points in [1e-4, 1e4].
    pub fn check_nonnegative(&self, n: usize) -> Result<bool> {
        for i in 0..n {
            let x = 10f64.powf(-4.0 + 8.0 * i as f64 / (n.max(2) - 1) as f64);
            let v = self.evaluate(x)?;
            let scale = self.abs_moment(0.0).unwrap_or(1.0).max(1e-300);
            if v < -1e-12 * scale {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn atom_power(a: f64, m: f64) -> Result<f64> {
    if a == 0.0 {
        if m > 0.0 {
            return Ok(0.0);
        }
        if m == 0.0 {
            return Ok(1.0);
        }
        return Err(SalError::Divergent(format!("atom at 0 has no moment of order {m}")));
    }
    Ok(a.powf(m))
}

impl ActionFunction for CutoffFunction {
    fn eval(&self, x: f64) -> f64 {
        self.evaluate(x).unwrap_or(f64::NAN)
    }
    fn envelope(&self) -> Envelope {
        self.envelope.clone()
    }
}

// Density of φ₁ ∗ φ₂; same-rate gamma pairs stay closed form, the rest is tabulated.
fn convolve(d1: &Density, d2: &Density) -> Result<Density> {
    if let (Density::Gamma { w: w1, r: r1, rate: a1, shift: s1 }, Density::Gamma { w: w2, r: r2, rate: a2, shift: s2 }) = (d1, d2) {
        if a1 == a2 {
            return Ok(Density::Gamma { w: w1 * w2, r: r1 + r2, rate: *a1, shift: s1 + s2 });
        }
    }
    let lo = d1.lower() + d2.lower();
    let hi = d1.upper() + d2.upper();
    let n = 2000usize;
    let (at, rt) = (1e-14, 1e-10);
    let mut grid = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 / n as f64;
        let s = lo + (hi - lo) * t * t;
        let a = d1.lower().max(s - d2.upper());
        let b = d1.upper().min(s - d2.lower());
        let v = if b > a {
            let mut pts = vec![a];
            for p in d1.breakpoints().into_iter().chain(d2.breakpoints().into_iter().map(|p| s - p)) {
                if p > a && p < b {
                    pts.push(p);
                }
            }
            pts.push(b);
            pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let mut acc = 0.0;
            for w in pts.windows(2) {
                if w[1] > w[0] {
                    acc += integrate(|v| d1.pdf(v) * d2.pdf(s - v), w[0], w[1], at, rt)?.0;
                }
            }
            acc
        } else {
            0.0
        };
        grid.push(s);
        values.push(v);
    }
    Ok(Density::Tabulated { grid, values })
}

/// Parsed cut-off: Laplace-type or the Gaussian (direct summation only).
#[derive(Clone, Debug, PartialEq)]
pub enum CutoffSpec {
    Laplace(CutoffFunction),
    Gauss,
}

impl ActionFunction for CutoffSpec {
    fn eval(&self, x: f64) -> f64 {
        match self {
            CutoffSpec::Laplace(f) => f.eval(x),
            CutoffSpec::Gauss => (-x * x).exp(),
        }
    }
    fn envelope(&self) -> Envelope {
        match self {
            CutoffSpec::Laplace(f) => f.envelope(),
            CutoffSpec::Gauss => Envelope::Gaussian { c: 1.0 },
        }
    }
}

impl CutoffSpec {
    /// f_{z,n}; the Gaussian is treated formally, with f_{z,0} = Γ(z/2)/(2Γ(z)).
    pub fn f_moment(&self, z: Complex64, n: usize) -> Result<Complex64> {
        match self {
            CutoffSpec::Laplace(f) => f.f_moment(z, n),
            CutoffSpec::Gauss => {
                if n > 0 {
                    return Err(SalError::Unsupported("log-moments of the Gaussian cut-off".into()));
                }
                gauss_moment(z)
            }
        }
    }
}

// Γ(z/2)/(2Γ(z)), continued to z = -2m as (-1)^m (2m)!/m! = f^{(2m)}(0).
fn gauss_moment(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && (z.re / 2.0).fract() == 0.0 {
        let m = (-z.re / 2.0) as u32;
        let v = (m + 1..=2 * m).fold(1.0, |acc, j| acc * j as f64);
        return Ok(Complex64::new(if m % 2 == 0 { v } else { -v }, 0.0));
    }
    let g = crate::special_fn::gamma::gamma(z / 2.0)?;
    Ok(g * rgamma(z) / 2.0)
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 && s[i + 1..].starts_with(|c: char| c.is_ascii_alphabetic()) => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn nums(s: &str, n: usize) -> Result<Vec<f64>> {
    let v: std::result::Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == n => Ok(v),
        _ => Err(SalError::Parse(format!("expected {n} numbers in '{s}'"))),
    }
}

impl std::str::FromStr for CutoffSpec {
    type Err = SalError;

    fn from_str(s: &str) -> Result<CutoffSpec> {
        let s = s.trim();
        if s == "gauss" {
            return Ok(CutoffSpec::Gauss);
        }
        if s == "nulltaylor" {
            return Ok(CutoffSpec::Laplace(CutoffFunction::null_taylor()?));
        }
        if let Some(inner) = s.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
            let parts = split_top_level(inner);
            if parts.len() != 2 {
                return Err(SalError::Parse(format!("product needs two arguments: '{s}'")));
            }
            let a: CutoffSpec = parts[0].parse()?;
            let b: CutoffSpec = parts[1].parse()?;
            return match (a, b) {
                (CutoffSpec::Laplace(f), CutoffSpec::Laplace(g)) => Ok(CutoffSpec::Laplace(f.product(&g)?)),
                _ => Err(SalError::Unsupported("products with gauss have no Laplace representation".into())),
            };
        }
        if let Some(r) = s.strip_prefix("exp:") {
            let v = nums(r, 1)?;
            if !(v[0] >= 0.0) {
                return invalid("exp:a needs a ≥ 0");
            }
            return Ok(CutoffSpec::Laplace(CutoffFunction::exp(v[0])?));
        }
        if let Some(r) = s.strip_prefix("window:") {
            let v = nums(r, 2)?;
            return Ok(CutoffSpec::Laplace(CutoffFunction::window(v[0], v[1])?));
        }
        if let Some(r) = s.strip_prefix("powerlaw:") {
            let v = nums(r, 3)?;
            return Ok(CutoffSpec::Laplace(CutoffFunction::power_law(v[0], v[1], v[2])?));
        }
        Err(SalError::Parse(format!("unknown cut-off '{s}'")))
    }
}

/// ∫_0^∞ x^{α-1} f(x) dx / Γ(α): the Mellin route to f_{α,0}.
pub fn mellin_moment<A: ActionFunction + ?Sized>(f: &A, alpha: f64) -> Result<f64> {
    let (at, rt) = (1e-14, 1e-11);
    let g = |x: f64| if x == 0.0 { 0.0 } else { x.powf(alpha - 1.0) * f.eval(x) };
    let mut acc = 0.0;
    // [0, 1] with x = e^{-u}
    acc += integrate_to_inf(|u| (-alpha * u).exp() * f.eval((-u).exp()), 0.0, at, rt)?.0;
    let mut lo = 1.0;
    while lo < 1e6 {
        let hi = lo * 2.0;
        let piece = integrate(g, lo, hi, at, rt)?.0;
        acc += piece;
        if piece.abs() < 1e-17 * acc.abs() && lo > 64.0 {
            break;
        }
        lo = hi;
    }
    Ok(acc * rgamma(Complex64::new(alpha, 0.0)).re)
}
