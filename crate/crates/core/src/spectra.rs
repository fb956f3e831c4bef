//! Singular-value sequences (value, multiplicity) of the catalog triples.

use crate::error::{invalid, Result, SalError};
use crate::scalar::Real;
use crate::special_fn::epstein::lattice_shells;
use crate::special_fn::q_number;
use num_complex::Complex64;
use serde::Deserialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// One singular value with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumEntry<T = f64> {
    pub value: T,
    pub mult: u64,
}

/// Growth model used to bound tails of spectral sums.
#[derive(Clone, Debug, PartialEq)]
pub enum Growth {
    /// N(λ) ≤ a (λ^{1/r} + sigma)^{p r} for the nonzero values, p = dimension.
    Polynomial { a: f64, sigma: f64, r: f64 },
    /// μ_{n+1} ≥ rho μ_n and M_n ≤ a n + b.
    Exponential { rho: f64, a: f64, b: f64 },
    /// μ_n = log² n, one per n.
    LogSquared,
    /// Finite list, no tail.
    Finite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumMeta {
    pub dimension_p: f64,
    pub kernel_dim: u64,
    pub label: String,
    pub growth: Growth,
}

impl Growth {
    /// Upper bound for the number of nonzero values ≤ λ (with multiplicity).
    pub fn counting_bound(&self, p: f64, lambda: f64) -> f64 {
        match *self {
            Growth::Polynomial { a, sigma, r } => a * (lambda.max(0.0).powf(1.0 / r) + sigma).powf(p * r),
            _ => f64::INFINITY,
        }
    }
}

/// Parameters (q, w) of the standard Podleś sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PodlesParams {
    pub q: f64,
    pub w: Complex64,
}

impl PodlesParams {
    pub fn new(q: f64, w: Complex64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return invalid(format!("Podles q must lie in (0,1), got {q}"));
        }
        if w.norm() == 0.0 || !w.norm().is_finite() {
            return invalid("Podles w must be nonzero");
        }
        Ok(PodlesParams { q, w })
    }

    /// u = |w| q / (1 - q²).
    pub fn u(&self) -> f64 {
        self.w.norm() * self.q / (1.0 - self.q * self.q)
    }

    /// κ = 2πi / log q.
    pub fn kappa(&self) -> Complex64 {
        Complex64::new(0.0, 2.0 * PI / self.q.ln())
    }

    /// Full operator: |w| [n+1].
    pub fn full_value(&self, n: u64) -> f64 {
        self.w.norm() * q_number(n as f64 + 1.0, self.q)
    }

    /// Simplified operator: (u/q) q^{-n}.
    pub fn simplified_value(&self, n: u64) -> f64 {
        self.u() / self.q * (-(n as f64) * self.q.ln()).exp()
    }
}

/// Spin structure of the circle / spheres.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereSpin {
    Trivial,
    NonTrivial,
}

#[derive(Clone, Debug, PartialEq)]
enum Family {
    Sphere { d: u32, spin: SphereSpin },
    Torus { d: u32, spin: Vec<u8> },
    NcTorus { d: u32 },
    Podles { params: PodlesParams, simplified: bool },
    LogSquared,
    Table(Arc<Vec<SpectrumEntry>>),
}

/// A lazily generated spectrum of |D| (or of D² when squared).
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub meta: SpectrumMeta,
    family: Family,
    squared: bool,
}

fn spinor_rank(d: u32) -> u64 {
    1u64 << (d / 2)
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut r: u128 = 1;
    for j in 0..k {
        r = r * (n - j) as u128 / (j + 1) as u128;
    }
    r.min(u64::MAX as u128) as u64
}

fn unit_ball_volume(d: u32) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) * crate::special_fn::rgamma(Complex64::new(h + 1.0, 0.0)).re
}

impl Spectrum {
    /// Round sphere S^d. Trivial spin is only meaningful on the circle.
    pub fn sphere(d: u32, spin: SphereSpin) -> Result<Self> {
        if d == 0 {
            return invalid("sphere dimension must be at least 1");
        }
        if d > 1 && spin == SphereSpin::Trivial {
            return invalid(format!("S^{d} has a unique spin structure"));
        }
        let c = (2 * spinor_rank(d)) as f64;
        let (kernel_dim, growth, label) = if spin == SphereSpin::Trivial {
            (1, Growth::Polynomial { a: 2.0, sigma: 0.0, r: 1.0 }, "S^1 (trivial spin)".to_string())
        } else {
            let fact: f64 = (1..=d).map(|k| k as f64).product();
            (0, Growth::Polynomial { a: c / fact, sigma: 0.5, r: 1.0 }, format!("S^{d}"))
        };
        Ok(Spectrum {
            meta: SpectrumMeta { dimension_p: d as f64, kernel_dim, label, growth },
            family: Family::Sphere { d, spin },
            squared: false,
        })
    }

    /// Flat torus T^d = ℝ^d/ℤ^d with spin structure bits s_j.
    pub fn torus(d: u32, spin: &[u8]) -> Result<Self> {
        if d == 0 || spin.len() > d as usize || spin.iter().any(|&b| b > 1) {
            return invalid("torus spin structure must be a bit vector of length ≤ d");
        }
        let mut bits = spin.to_vec();
        bits.resize(d as usize, 0);
        let m = spinor_rank(d);
        let kernel_dim = if bits.iter().all(|&b| b == 0) { m } else { 0 };
        let df = d as f64;
        let a = m as f64 * unit_ball_volume(d) * (2.0 * PI).powf(-df);
        let label = format!("T^{d} spin {}", bits.iter().map(|b| b.to_string()).collect::<String>());
        Ok(Spectrum {
            meta: SpectrumMeta {
                dimension_p: df,
                kernel_dim,
                label,
                growth: Growth::Polynomial { a, sigma: PI * df.sqrt(), r: 1.0 },
            },
            family: Family::Torus { d, spin: bits },
            squared: false,
        })
    }

    /// Noncommutative torus T^d_Θ (spectrum independent of Θ).
    pub fn nc_torus(d: u32) -> Result<Self> {
        if d == 0 {
            return invalid("torus dimension must be at least 1");
        }
        let m = spinor_rank(d);
        let df = d as f64;
        Ok(Spectrum {
            meta: SpectrumMeta {
                dimension_p: df,
                kernel_dim: m,
                label: format!("NC torus d={d}"),
                growth: Growth::Polynomial { a: m as f64 * unit_ball_volume(d), sigma: df.sqrt() / 2.0, r: 1.0 },
            },
            family: Family::NcTorus { d },
            squared: false,
        })
    }

    /// Podleś sphere, full D_q or simplified D_q^S.
    pub fn podles(params: PodlesParams, simplified: bool) -> Self {
        let which = if simplified { "simplified" } else { "full" };
        Spectrum {
            meta: SpectrumMeta {
                dimension_p: 0.0,
                kernel_dim: 0,
                label: format!("Podles q={} |w|={} {which}", params.q, params.w.norm()),
                growth: Growth::Exponential { rho: 1.0 / params.q, a: 4.0, b: 4.0 },
            },
            family: Family::Podles { params, simplified },
            squared: false,
        }
    }

    /// Test spectrum μ = log² n (n ≥ 2) with a one-dimensional kernel: heat trace finite, zeta nowhere.
    pub fn log_squared() -> Self {
        Spectrum {
            meta: SpectrumMeta { dimension_p: f64::INFINITY, kernel_dim: 1, label: "log^2 n".into(), growth: Growth::LogSquared },
            family: Family::LogSquared,
            squared: false,
        }
    }

    /// Finite user-supplied spectrum; values must be positive and strictly increasing.
    pub fn from_table(dimension_p: f64, kernel_dim: u64, label: &str, entries: Vec<SpectrumEntry>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if !(e.value > 0.0) || !e.value.is_finite() {
                return invalid(format!("entry {i}: value must be positive and finite"));
            }
            if e.mult == 0 {
                return invalid(format!("entry {i}: multiplicity must be positive"));
            }
            if i > 0 && entries[i - 1].value >= e.value {
                return invalid(format!("entry {i}: values must be strictly increasing"));
            }
        }
        Ok(Spectrum {
            meta: SpectrumMeta { dimension_p, kernel_dim, label: label.to_string(), growth: Growth::Finite },
            family: Family::Table(Arc::new(entries)),
            squared: false,
        })
    }

    /// Spectrum of D² (values squared).
    pub fn squared(&self) -> Result<Self> {
        if self.squared {
            return invalid("spectrum is already squared");
        }
        let growth = match self.meta.growth.clone() {
            Growth::Polynomial { a, sigma, r } => Growth::Polynomial { a, sigma, r: 2.0 * r },
            Growth::Exponential { rho, a, b } => Growth::Exponential { rho: rho * rho, a, b },
            Growth::Finite => Growth::Finite,
            Growth::LogSquared => return Err(SalError::Unsupported("squaring the log^2 spectrum".into())),
        };
        Ok(Spectrum {
            meta: SpectrumMeta {
                dimension_p: self.meta.dimension_p / 2.0,
                kernel_dim: self.meta.kernel_dim,
                label: format!("{} squared", self.meta.label),
                growth,
            },
            family: self.family.clone(),
            squared: true,
        })
    }

    pub fn is_squared(&self) -> bool {
        self.squared
    }

    pub fn podles_params(&self) -> Option<(PodlesParams, bool)> {
        match &self.family {
            Family::Podles { params, simplified } => Some((*params, *simplified)),
            _ => None,
        }
    }

    /// Nonzero singular values in increasing order (kernel excluded).
    pub fn iter(&self) -> Box<dyn Iterator<Item = SpectrumEntry> + Send + '_> {
        let sq = self.squared;
        let map = move |e: SpectrumEntry| if sq { SpectrumEntry { value: e.value * e.value, mult: e.mult } } else { e };
        match &self.family {
            Family::Sphere { d, spin } => {
                let d = *d;
                let c = 2 * spinor_rank(d);
                match spin {
                    SphereSpin::Trivial => Box::new((1u64..).map(move |n| map(SpectrumEntry { value: n as f64, mult: 2 }))),
                    SphereSpin::NonTrivial => Box::new((0u64..).map(move |n| {
                        map(SpectrumEntry { value: n as f64 + d as f64 / 2.0, mult: c * binomial(n + d as u64 - 1, d as u64 - 1) })
                    })),
                }
            }
            Family::Torus { d, spin } => Box::new(
                LatticeIter::new(*d as usize, spin.clone(), spinor_rank(*d)).map(move |(norm, mult)| {
                    map(SpectrumEntry { value: PI * (norm as f64).sqrt(), mult })
                }),
            ),
            Family::NcTorus { d } => Box::new(
                LatticeIter::new(*d as usize, Vec::new(), spinor_rank(*d))
                    .map(move |(norm, mult)| map(SpectrumEntry { value: (norm as f64).sqrt() / 2.0, mult })),
            ),
            Family::Podles { params, simplified } => {
                let p = *params;
                let s = *simplified;
                Box::new((0u64..).map(move |n| {
                    let value = if s { p.simplified_value(n) } else { p.full_value(n) };
                    map(SpectrumEntry { value, mult: 4 * (n + 1) })
                }))
            }
            Family::LogSquared => Box::new((2u64..).map(move |n| {
                let l = (n as f64).ln();
                map(SpectrumEntry { value: l * l, mult: 1 })
            })),
            Family::Table(t) => Box::new(t.iter().copied().map(map)),
        }
    }

    /// Nonzero entries with value ≤ λ.
    pub fn up_to(&self, lambda: f64) -> Vec<SpectrumEntry> {
        self.iter().take_while(|e| e.value <= lambda).collect()
    }

    /// First n nonzero entries.
    pub fn first(&self, n: usize) -> Vec<SpectrumEntry> {
        self.iter().take(n).collect()
    }

    /// Entries converted to another scalar type.
    pub fn first_as<T: Real>(&self, n: usize) -> Vec<SpectrumEntry<T>> {
        self.iter().take(n).map(|e| SpectrumEntry { value: T::of(e.value), mult: e.mult }).collect()
    }
}

// Shells of 2ℤ^d + s in increasing norm, generated in doubling batches.
struct LatticeIter {
    d: usize,
    spin: Vec<u8>,
    factor: u64,
    done_up_to: u64,
    buffer: std::collections::VecDeque<(u64, u64)>,
}

impl LatticeIter {
    fn new(d: usize, spin: Vec<u8>, factor: u64) -> Self {
        LatticeIter { d, spin, factor, done_up_to: 0, buffer: Default::default() }
    }
}

impl Iterator for LatticeIter {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        while self.buffer.is_empty() {
            let next_bound = (self.done_up_to * 4).max(64);
            for sh in lattice_shells(self.d, &self.spin, next_bound) {
                if sh.norm > self.done_up_to {
                    self.buffer.push_back((sh.norm, sh.count * self.factor));
                }
            }
            self.done_up_to = next_bound;
        }
        self.buffer.pop_front()
    }
}

/// Entries of S^d up to index n_max.
pub fn sphere_spectrum<T: Real>(d: u32, spin: SphereSpin, n_max: usize) -> Result<(Vec<SpectrumEntry<T>>, SpectrumMeta)> {
    let s = Spectrum::sphere(d, spin)?;
    let take = if spin == SphereSpin::Trivial { n_max } else { n_max + 1 };
    Ok((s.first_as(take), s.meta))
}

/// Entries of T^d with value ≤ radius_cut.
pub fn torus_spectrum(d: u32, spin: &[u8], radius_cut: f64) -> Result<(Vec<SpectrumEntry>, SpectrumMeta)> {
    if !(radius_cut > 0.0) {
        return invalid("radius_cut must be positive");
    }
    let s = Spectrum::torus(d, spin)?;
    Ok((s.up_to(radius_cut), s.meta))
}

/// Entries of the NC torus with value ≤ radius_cut.
pub fn nctorus_spectrum(d: u32, radius_cut: f64) -> Result<(Vec<SpectrumEntry>, SpectrumMeta)> {
    let s = Spectrum::nc_torus(d)?;
    Ok((s.up_to(radius_cut), s.meta))
}

/// Podleś entries n = 0..=n_max.
pub fn podles_spectrum(params: PodlesParams, simplified: bool, n_max: usize) -> (Vec<SpectrumEntry>, SpectrumMeta) {
    let s = Spectrum::podles(params, simplified);
    (s.first(n_max + 1), s.meta)
}

/// Σ_{m=-l}^{l} A⁰_{l,m,±}: diagonal of the generator A in the representation π_±.
pub fn podles_diag_a(params: PodlesParams, l: f64, plus: bool) -> Result<f64> {
    let two_l = 2.0 * l;
    if !(l > 0.0) || (two_l - two_l.round()).abs() > 1e-12 || (two_l.round() as i64) % 2 == 0 {
        return invalid(format!("l must be a positive half-integer, got {l}"));
    }
    let q = params.q;
    let qn = |x: f64| q_number(x, q);
    let extra = if plus { q } else { -1.0 / q };
    let alpha0 = ((q - 1.0 / q) * qn(l - 0.5) * qn(l + 1.5) + extra) / q.sqrt() / (qn(two_l) * qn(two_l + 2.0));
    let pre = 1.0 / (q.sqrt() * (1.0 + q * q));
    let mut sum = 0.0;
    let steps = two_l.round() as i64;
    for i in 0..=steps {
        let m = -l + i as f64;
        let bracket = qn(l - m + 1.0) * qn(l + m) - q * q * qn(l - m) * qn(l + m + 1.0);
        sum += pre * bracket * alpha0 + 1.0 / (1.0 + q * q);
    }
    Ok(sum)
}

/// Single coefficient A⁰_{l,m,±}.
pub fn podles_a0(params: PodlesParams, l: f64, m: f64, plus: bool) -> f64 {
    let q = params.q;
    let qn = |x: f64| q_number(x, q);
    let extra = if plus { q } else { -1.0 / q };
    let alpha0 = ((q - 1.0 / q) * qn(l - 0.5) * qn(l + 1.5) + extra) / q.sqrt() / (qn(2.0 * l) * qn(2.0 * l + 2.0));
    let bracket = qn(l - m + 1.0) * qn(l + m) - q * q * qn(l - m) * qn(l + m + 1.0);
    bracket * alpha0 / (q.sqrt() * (1.0 + q * q)) + 1.0 / (1.0 + q * q)
}

#[derive(Deserialize)]
struct FileHeader {
    p: f64,
    kernel: u64,
    label: String,
}

#[derive(Deserialize)]
struct FileLine {
    value: f64,
    mult: u64,
}

/// Parse a JSON-lines spectrum: header {"p","kernel","label"} then {"value","mult"} lines.
pub fn parse_spectrum_jsonl(text: &str) -> Result<Spectrum> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let head = lines.next().ok_or_else(|| SalError::Parse("empty spectrum file".into()))?;
    let h: FileHeader = serde_json::from_str(head).map_err(|e| SalError::Parse(format!("header: {e}")))?;
    let mut entries = Vec::new();
    for (i, l) in lines.enumerate() {
        let e: FileLine = serde_json::from_str(l).map_err(|e| SalError::Parse(format!("line {}: {e}", i + 2)))?;
        entries.push(SpectrumEntry { value: e.value, mult: e.mult });
    }
    Spectrum::from_table(h.p, h.kernel, &h.label, entries)
}

/// Triple identifiers understood by the catalog.
#[derive(Clone, Debug, PartialEq)]
pub enum TripleKind {
    Sphere { d: u32, spin: SphereSpin },
    Torus { d: u32, spin: Vec<u8> },
    NcTorus { d: u32 },
    Podles { params: PodlesParams, simplified: bool },
    File(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripleId {
    pub kind: TripleKind,
    pub squared: bool,
}

fn parse_podles(rest: &str) -> Result<PodlesParams> {
    let parts: Vec<&str> = rest.split(',').collect();
    if parts.len() != 2 {
        return Err(SalError::Parse(format!("expected q,w in '{rest}'")));
    }
    let q: f64 = parts[0].trim().parse().map_err(|_| SalError::Parse(format!("bad q '{}'", parts[0])))?;
    let w: f64 = parts[1].trim().parse().map_err(|_| SalError::Parse(format!("bad w '{}'", parts[1])))?;
    PodlesParams::new(q, Complex64::new(w, 0.0))
}

impl std::str::FromStr for TripleId {
    type Err = SalError;

    fn from_str(s: &str) -> Result<TripleId> {
        let raw = s.trim();
        if let Some(path) = raw.strip_prefix("file:") {
            return Ok(TripleId { kind: TripleKind::File(path.to_string()), squared: false });
        }
        let (body, squared) = match raw.strip_suffix("sq") {
            Some(b) => (b, true),
            None => (raw, false),
        };
        let bad = || SalError::Parse(format!("unknown triple '{raw}'"));
        let kind = if let Some(rest) = body.strip_prefix("podless:") {
            TripleKind::Podles { params: parse_podles(rest)?, simplified: true }
        } else if let Some(rest) = body.strip_prefix("podles:") {
            TripleKind::Podles { params: parse_podles(rest)?, simplified: false }
        } else if let Some(rest) = body.strip_prefix("nct") {
            TripleKind::NcTorus { d: rest.parse().map_err(|_| bad())? }
        } else if let Some(rest) = body.strip_prefix('t') {
            let (dim, bits) = match rest.split_once(':') {
                Some((a, b)) => (a, b),
                None => (rest, ""),
            };
            let d: u32 = dim.parse().map_err(|_| bad())?;
            let spin = bits
                .chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(bad()),
                })
                .collect::<Result<Vec<u8>>>()?;
            if spin.len() > d as usize {
                return Err(bad());
            }
            TripleKind::Torus { d, spin }
        } else if let Some(rest) = body.strip_prefix('s') {
            let (dim, spin) = match rest.strip_suffix("nt") {
                Some(r) => (r, SphereSpin::NonTrivial),
                None => (rest, if rest == "1" { SphereSpin::Trivial } else { SphereSpin::NonTrivial }),
            };
            let d: u32 = dim.parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            TripleKind::Sphere { d, spin }
        } else {
            return Err(bad());
        };
        Ok(TripleId { kind, squared })
    }
}

impl TripleId {
    /// Build the spectrum; file identifiers read the file.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let base = match &self.kind {
            TripleKind::Sphere { d, spin } => Spectrum::sphere(*d, *spin)?,
            TripleKind::Torus { d, spin } => Spectrum::torus(*d, spin)?,
            TripleKind::NcTorus { d } => Spectrum::nc_torus(*d)?,
            TripleKind::Podles { params, simplified } => Spectrum::podles(*params, *simplified),
            TripleKind::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| SalError::Parse(format!("{path}: {e}")))?;
                parse_spectrum_jsonl(&text)?
            }
        };
        if self.squared {
            base.squared()
        } else {
            Ok(base)
        }
    }
}
