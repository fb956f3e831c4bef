//! Finite spectral triples: axiom checks, real structures, inner fluctuations,
//! gauge covariance, the index, and the exact combinatorics of fluctuated zetas.

use crate::error::{invalid, Result, SalError};
use base64::Engine;
use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;
use std::collections::BTreeMap;

pub type CMat = DMatrix<Complex64>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Signs (ε, ε', ε'') of a real structure; ε'' only for even KO-dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KoSigns {
    pub eps: i8,
    pub eps1: i8,
    pub eps2: Option<i8>,
}

/// The mod-8 sign table: JD = εDJ, J² = ε', Jγ = ε''γJ.
pub fn ko_signs(d: u8) -> KoSigns {
    let d = d % 8;
    let eps = [1, -1, 1, 1, 1, -1, 1, 1][d as usize];
    let eps1 = [1, 1, -1, -1, -1, -1, 1, 1][d as usize];
    let eps2 = match d {
        0 | 4 => Some(1),
        2 | 6 => Some(-1),
        _ => None,
    };
    KoSigns { eps, eps1, eps2 }
}

/// A finite spectral triple. J acts as ψ ↦ U ψ̄.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteTriple {
    pub d: CMat,
    pub gamma: Option<CMat>,
    pub j_unitary: Option<CMat>,
    pub gens: Vec<CMat>,
    pub signs: Option<KoSigns>,
    pub ko_dim: Option<u8>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| c.violation <= tol)
    }

    pub fn violation(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.violation)
    }
}

/// Hermitian functional calculus V f(Λ) V*.
pub fn hermitian_fn<F: Fn(f64) -> f64>(m: &CMat, f: F) -> CMat {
    let eig = SymmetricEigen::new(m.clone());
    let diag = CMat::from_diagonal(&eig.eigenvalues.map(|l| c(f(l))));
    &eig.eigenvectors * diag * eig.eigenvectors.adjoint()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Projection onto ker D, with eigenvalues below 1e-10·‖D‖ counted as zero.
pub fn kernel_projection(d: &CMat) -> CMat {
    let scale = fro(d).max(1e-300);
    hermitian_fn(d, |l| if l.abs() <= 1e-10 * scale { 1.0 } else { 0.0 })
}

impl FiniteTriple {
    pub fn new(d: CMat, gamma: Option<CMat>, j_unitary: Option<CMat>, gens: Vec<CMat>, signs: Option<KoSigns>, ko_dim: Option<u8>) -> Result<Self> {
        let n = d.nrows();
        if d.ncols() != n {
            return invalid("D must be square");
        }
        let same = |m: &CMat| m.nrows() == n && m.ncols() == n;
        if gamma.as_ref().is_some_and(|g| !same(g)) || j_unitary.as_ref().is_some_and(|u| !same(u)) || gens.iter().any(|g| !same(g)) {
            return invalid("all matrices must have the dimension of D");
        }
        if j_unitary.is_some() && signs.is_none() && ko_dim.is_none() {
            return invalid("a real structure needs its signs or a KO-dimension");
        }
        let signs = signs.or_else(|| ko_dim.map(ko_signs));
        Ok(FiniteTriple { d, gamma, j_unitary, gens, signs, ko_dim })
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    /// J M J⁻¹ = U M̄ U*.
    pub fn conj_by_j(&self, m: &CMat) -> Option<CMat> {
        self.j_unitary.as_ref().map(|u| u * m.map(|z| z.conj()) * u.adjoint())
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.dim();
        let one = identity(n);
        let d = &self.d;
        let comm = |a: &CMat, b: &CMat| a * b - b * a;
        let mut checks = vec![Check { name: "selfadjoint", violation: fro(&(d - d.adjoint())) }];
        if let Some(g) = &self.gamma {
            checks.push(Check { name: "grading_selfadjoint", violation: fro(&(g - g.adjoint())) });
            checks.push(Check { name: "grading_square", violation: fro(&(g * g - &one)) });
            checks.push(Check { name: "grading_anticommutes", violation: fro(&(g * d + d * g)) });
            let v = self.gens.iter().map(|a| fro(&comm(g, a))).fold(0.0, f64::max);
            checks.push(Check { name: "grading_even_algebra", violation: v });
        }
        if let (Some(u), Some(s)) = (&self.j_unitary, &self.signs) {
            checks.push(Check { name: "j_unitary", violation: fro(&(u.adjoint() * u - &one)) });
            let j2 = u * u.map(|z| z.conj());
            checks.push(Check { name: "j_square", violation: fro(&(j2 - one.scale(s.eps1 as f64))) });
            let jd = u * d.map(|z| z.conj());
            checks.push(Check { name: "j_commutes_d", violation: fro(&(jd - (d * u).scale(s.eps as f64))) });
            if let (Some(g), Some(e2)) = (&self.gamma, s.eps2) {
                let jg = u * g.map(|z| z.conj());
                checks.push(Check { name: "j_commutes_gamma", violation: fro(&(jg - (g * u).scale(e2 as f64))) });
            }
            let mut order0: f64 = 0.0;
            let mut order1: f64 = 0.0;
            for a in &self.gens {
                let da = comm(d, a);
                for b in &self.gens {
                    let jb = self.conj_by_j(&b.adjoint()).expect("J present");
                    order0 = order0.max(fro(&comm(a, &jb)));
                    order1 = order1.max(fro(&comm(&da, &jb)));
                }
            }
            checks.push(Check { name: "order_zero", violation: order0 });
            checks.push(Check { name: "first_order", violation: order1 });
            if let Some(k) = self.ko_dim {
                let t = ko_signs(k);
                let mut mism = 0.0;
                if t.eps != s.eps {
                    mism += 1.0;
                }
                if t.eps1 != s.eps1 {
                    mism += 1.0;
                }
                if t.eps2.is_some() && t.eps2 != s.eps2 {
                    mism += 1.0;
                }
                if t.eps2.is_some() != self.gamma.is_some() {
                    mism += 1.0;
                }
                checks.push(Check { name: "ko_table", violation: mism });
            }
        }
        ValidationReport { checks }
    }

    /// D_A = D + A + ε J A J⁻¹ (or D + A without J).
    pub fn fluctuate(&self, a: &CMat) -> Result<FiniteTriple> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return invalid("gauge potential has the wrong size");
        }
        if fro(&(a - a.adjoint())) > 1e-12 * fro(a).max(1.0) {
            return invalid("gauge potential must be Hermitian");
        }
        let mut d = &self.d + a;
        if let (Some(ja), Some(s)) = (self.conj_by_j(a), self.signs) {
            d += ja.scale(s.eps as f64);
        }
        Ok(FiniteTriple { d, ..self.clone() })
    }

    /// Σ a_i [D, b_i].
    pub fn one_form(&self, pairs: &[(CMat, CMat)]) -> CMat {
        let mut out = CMat::zeros(self.dim(), self.dim());
        for (a, b) in pairs {
            out += a * (&self.d * b - b * &self.d);
        }
        out
    }

    /// Hermitian gauge potential ½(ω + ω*), with the witnesses of ω* = Σ b*[D,a*] - [D, b*a*].
    pub fn hermitian_potential(&self, pairs: &[(CMat, CMat)]) -> GaugePotential {
        let mut w: Vec<(CMat, CMat)> = Vec::new();
        let one = identity(self.dim());
        for (a, b) in pairs {
            w.push((a.scale(0.5), b.clone()));
            w.push((b.adjoint().scale(0.5), a.adjoint()));
            w.push((one.scale(-0.5), b.adjoint() * a.adjoint()));
        }
        GaugePotential { a: self.one_form(&w), witnesses: w }
    }

    /// A^u = uAu* + u[D,u*] and ‖U D_A U* - D_{A^u}‖_F with U = u J u J⁻¹.
    pub fn gauge_transform(&self, a: &CMat, u: &CMat) -> Result<(CMat, f64)> {
        let n = self.dim();
        let one = identity(n);
        if fro(&(u * u.adjoint() - &one)) > 1e-12 * (n as f64) {
            return invalid("gauge transformation must be unitary");
        }
        let us = u.adjoint();
        let au = u * a * &us + u * (&self.d * &us - &us * &self.d);
        let big_u = match self.conj_by_j(u) {
            Some(ju) => u * ju,
            None => u.clone(),
        };
        let da = self.fluctuate(a)?.d;
        let lhs = &big_u * da * big_u.adjoint();
        let rhs = self.fluctuate(&((&au + au.adjoint()).scale(0.5)))?.d;
        Ok((au, fro(&(lhs - rhs))))
    }

    fn gamma_or_err(&self) -> Result<&CMat> {
        self.gamma.as_ref().ok_or_else(|| SalError::InvalidArgument("triple has no grading".into()))
    }

    /// Tr γ e^{-tD²}.
    pub fn mckean_singer(&self, t: f64) -> Result<f64> {
        let g = self.gamma_or_err()?;
        let h = hermitian_fn(&self.d, |l| (-t * l * l).exp());
        Ok((g * h).trace().re)
    }

    /// index D = Tr γ P₀.
    pub fn index(&self) -> Result<f64> {
        let g = self.gamma_or_err()?;
        Ok((g * kernel_projection(&self.d)).trace().re)
    }

    /// Tr γ f(|D|/Λ) from the eigen-decomposition, and f(0) · index.
    pub fn topological_action<F: Fn(f64) -> f64>(&self, f: F, lambda: f64) -> Result<(f64, f64)> {
        let g = self.gamma_or_err()?;
        let direct = (g * hermitian_fn(&self.d, |l| f(l.abs() / lambda))).trace().re;
        Ok((direct, f(0.0) * self.index()?))
    }
}

/// e^{iH} for Hermitian H.
pub fn unitary_exp(h: &CMat) -> CMat {
    let eig = SymmetricEigen::new(h.clone());
    let diag = CMat::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, l)));
    &eig.eigenvectors * diag * eig.eigenvectors.adjoint()
}

/// Gauge covariance on a fixed potential and unitary built from the generators:
/// A from all pairs (a_i, a_j), u = exp(i Σ θ_k (a_k + a_k*)/2). Returns (‖A‖_F, residual).
pub fn gauge_check(triple: &FiniteTriple, angles: &[f64]) -> Result<(f64, f64)> {
    if triple.gens.is_empty() {
        return invalid("gauge check needs algebra generators");
    }
    let pairs: Vec<(CMat, CMat)> = triple
        .gens
        .iter()
        .flat_map(|a| triple.gens.iter().map(move |b| (a.clone(), b.clone())))
        .collect();
    let pot = triple.hermitian_potential(&pairs);
    let n = triple.dim();
    let mut h = CMat::zeros(n, n);
    for (k, g) in triple.gens.iter().enumerate() {
        let th = angles.get(k).copied().unwrap_or(0.3 * k as f64 + 0.1);
        h += (g + g.adjoint()).scale(th / 2.0);
    }
    let (_, res) = triple.gauge_transform(&pot.a, &unitary_exp(&h))?;
    Ok((fro(&pot.a), res))
}

/// Tr f(|D|/Λ).
pub fn spectral_action_finite<F: Fn(f64) -> f64>(d: &CMat, f: F, lambda: f64) -> f64 {
    eigenvalues(d).iter().map(|l| f(l.abs() / lambda)).sum()
}

/// Gauge potential with its one-form witnesses (a_i, b_i).
#[derive(Clone, Debug, PartialEq)]
pub struct GaugePotential {
    pub a: CMat,
    pub witnesses: Vec<(CMat, CMat)>,
}

/// Pauli-product matrices on ℂ² ⊗ ℂ².
fn pauli2(a: char, b: char) -> CMat {
    let p = |x: char| -> CMat {
        let i = Complex64::new(0.0, 1.0);
        match x {
            'X' => CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
            'Y' => CMat::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
            'Z' => CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
            _ => identity(2),
        }
    };
    p(a).kronecker(&p(b))
}

/// A four-dimensional triple over ℂ realising the KO signs of dimension d.
pub fn reference_triple(d: u8) -> FiniteTriple {
    let d = d % 8;
    // (U, D, γ) found by search over Pauli products
    let (u, dd, g) = match d {
        0 => ("II", "IX", Some("IZ")),
        1 => ("II", "IY", None),
        2 => ("IY", "XI", Some("YI")),
        3 => ("IY", "XI", None),
        4 => ("IY", "XI", Some("YX")),
        5 => ("IY", "IX", None),
        6 => ("II", "IX", Some("IY")),
        _ => ("II", "IX", None),
    };
    let m = |s: &str| {
        let ch: Vec<char> = s.chars().collect();
        pauli2(ch[0], ch[1])
    };
    FiniteTriple {
        d: m(dd).scale(1.5),
        gamma: g.map(m),
        j_unitary: Some(m(u)),
        gens: vec![identity(4)],
        signs: Some(ko_signs(d)),
        ko_dim: Some(d),
    }
}

/// M_n bimodule triple: H = ℂⁿ ⊗ ℂⁿ ≅ M_n, algebra `gens` acting on the left, J X = X*,
/// D X = D₁X + XD₁ (ε = ε' = 1).
pub fn bimodule_triple(d1: &CMat, gens: &[CMat]) -> Result<FiniteTriple> {
    let n = d1.nrows();
    if fro(&(d1 - d1.adjoint())) > 1e-12 * fro(d1).max(1.0) {
        return invalid("D₁ must be Hermitian");
    }
    let one = identity(n);
    let d = d1.kronecker(&one) + one.kronecker(&d1.transpose());
    let mut swap = CMat::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            swap[(i * n + j, j * n + i)] = c(1.0);
        }
    }
    let gens = gens.iter().map(|a| a.kronecker(&one)).collect();
    FiniteTriple::new(d, None, Some(swap), gens, Some(KoSigns { eps: 1, eps1: 1, eps2: None }), None)
}

/// Graded triple D = [[0, T*], [T, 0]] on ℂᵐ ⊕ ℂⁿ, γ = 1 ⊕ -1 (T is n × m).
pub fn graded_triple(t: &CMat) -> FiniteTriple {
    let (n, m) = (t.nrows(), t.ncols());
    let mut d = CMat::zeros(m + n, m + n);
    d.view_mut((0, m), (m, n)).copy_from(&t.adjoint());
    d.view_mut((m, 0), (n, m)).copy_from(t);
    let mut g = CMat::zeros(m + n, m + n);
    for i in 0..m + n {
        g[(i, i)] = c(if i < m { 1.0 } else { -1.0 });
    }
    FiniteTriple { d, gamma: Some(g), j_unitary: None, gens: vec![identity(m + n)], signs: None, ko_dim: None }
}

/// |ζ_{D_A}(0) - ζ_D(0)| for the |D| + P₀ convention: both count eigenvalues.
pub fn zeta0_fluctuation_check(triple: &FiniteTriple, a: &CMat) -> Result<f64> {
    let da = triple.fluctuate(a)?;
    let z = |m: &CMat| -> f64 {
        let p0 = kernel_projection(m);
        let abs = hermitian_fn(m, f64::abs) + p0;
        // Σ μ^0 over the spectrum of |D| + P₀, all of which is positive
        eigenvalues(&abs).iter().filter(|l| **l > 0.0).count() as f64
    };
    Ok((z(&da.d) - z(&triple.d)).abs())
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// h_n(s; ℓ) = Σ_j h_j s^{n+j}.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolynomial {
    pub n: usize,
    pub ell: Vec<usize>,
    pub coeffs: Vec<BigRational>,
}

impl HPolynomial {
    pub fn degree(&self) -> usize {
        let top = self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
        self.n + top
    }

    /// Coefficient of s^k.
    pub fn coeff(&self, k: usize) -> BigRational {
        if k < self.n || k - self.n >= self.coeffs.len() {
            BigRational::zero()
        } else {
            self.coeffs[k - self.n].clone()
        }
    }
}

// Coefficients of binom(x, l) = x(x-1)...(x-l+1)/l! in powers of x.
fn binom_poly(l: usize) -> Vec<BigRational> {
    let mut p = vec![BigRational::one()];
    for k in 0..l {
        let mut next = vec![BigRational::zero(); p.len() + 1];
        for (i, v) in p.iter().enumerate() {
            next[i + 1] += v;
            next[i] -= v * BigRational::from_integer(BigInt::from(k));
        }
        p = next;
    }
    let f: BigInt = (1..=l as u64).map(BigInt::from).product();
    p.into_iter().map(|v| v / BigRational::from_integer(f.clone())).collect()
}

/// (-s/2)^n ∫_{0≤t₁≤…≤t_n≤1} Π binom(-s t_i/2, ℓ_i) dt, exactly.
pub fn h_polynomial(n: usize, ell: &[usize]) -> Result<HPolynomial> {
    if n == 0 || ell.len() != n {
        return invalid("h_polynomial needs n ≥ 1 and a multi-index of length n");
    }
    let total: usize = ell.iter().sum();
    // binom(-s t/2, l) = Σ_e p_e (-1/2)^e s^e t^e
    let factors: Vec<Vec<BigRational>> = ell
        .iter()
        .map(|&l| {
            binom_poly(l)
                .into_iter()
                .enumerate()
                .map(|(e, p)| p * num_traits::pow(ratio(-1, 2), e))
                .collect()
        })
        .collect();
    let mut coeffs = vec![BigRational::zero(); total + 1];
    let mut idx = vec![0usize; n];
    loop {
        let mut term = BigRational::one();
        let mut partial = 0usize;
        for (k, &e) in idx.iter().enumerate() {
            term *= &factors[k][e];
            partial += e;
            // ∫ over the ordered simplex: Π_k 1/(e₁+…+e_k + k)
            term /= BigRational::from_integer(BigInt::from(partial + k + 1));
        }
        coeffs[partial] += term;
        let mut k = 0;
        loop {
            if k == n {
                let pre = num_traits::pow(ratio(-1, 2), n);
                let coeffs = coeffs.into_iter().map(|v| v * &pre).collect();
                return Ok(HPolynomial { n, ell: ell.to_vec(), coeffs });
            }
            idx[k] += 1;
            if idx[k] < factors[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Polynomial in α with rational coefficients (index = power).
pub type AlphaPoly = Vec<BigRational>;

fn poly_mul(a: &AlphaPoly, b: &AlphaPoly) -> AlphaPoly {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &mut AlphaPoly, b: &AlphaPoly) {
    if a.len() < b.len() {
        a.resize(b.len(), BigRational::zero());
    }
    for (i, y) in b.iter().enumerate() {
        a[i] += y;
    }
}

fn poly_trim(mut a: AlphaPoly) -> AlphaPoly {
    while a.len() > 1 && a.last().is_some_and(|v| v.is_zero()) {
        a.pop();
    }
    a
}

/// binom(β, k) with β = p·α as a polynomial in α.
fn binom_alpha(p: BigRational, k: usize) -> AlphaPoly {
    let mut out = vec![BigRational::one()];
    for j in 0..k {
        out = poly_mul(&out, &vec![BigRational::from_integer(BigInt::from(-(j as i64))), p.clone()]);
    }
    let f: BigInt = (1..=k as u64).map(BigInt::from).product();
    out.into_iter().map(|v| v / BigRational::from_integer(f.clone())).collect()
}

/// Word in A and D: (A-count, D-exponent) letters.
type Word = Vec<(usize, i32)>;

// Normal form modulo lower order: the leading D power is moved to the end (trace
// cyclicity), then consecutive A-blocks merge across even D powers and split across
// odd ones. Returns the block sizes; the block [j] stands for A^j D^{-j}.
fn normal_form(word: &Word) -> Vec<usize> {
    let mut w: Vec<(usize, i32)> = word.iter().copied().filter(|l| l.0 > 0 || l.1 != 0).collect();
    while let Some(&(0, _)) = w.first() {
        let l = w.remove(0);
        w.push(l);
    }
    let mut blocks: Vec<usize> = Vec::new();
    let mut gap = 0i32;
    let mut started = false;
    for (a, e) in w {
        if a > 0 {
            if started && gap % 2 == 0 {
                *blocks.last_mut().expect("started") += a;
            } else {
                blocks.push(a);
            }
            started = true;
            gap = 0;
        }
        gap += e;
    }
    blocks
}

/// Render blocks as a word, e.g. [1, 1] → "(A D^-1)^2", [2] → "A^2 D^-2".
pub fn block_name(blocks: &[usize]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < blocks.len() {
        let b = blocks[i];
        let mut run = 1;
        while i + run < blocks.len() && blocks[i + run] == b {
            run += 1;
        }
        let base = if b == 1 { "A D^-1".to_string() } else { format!("A^{b} D^-{b}") };
        parts.push(if run == 1 { base } else { format!("({base})^{run}") });
        i += run;
    }
    parts.join(" ")
}

/// P_n(α) for n ≤ 3: map from block structure to a polynomial in α, from
/// |D_A|^{-α} = Σ_k binom(-α/2, k) (X D^{-2})^k |D|^{-α}, X = AD + DA + A².
/// P₃ is produced by the same reduction and has no printed reference.
pub fn perturbation_polynomials(n: usize) -> Result<BTreeMap<Vec<usize>, AlphaPoly>> {
    if n > 3 {
        return Err(SalError::Unsupported(format!("P_n is only derived for n ≤ 3, got {n}")));
    }
    let mut out: BTreeMap<Vec<usize>, AlphaPoly> = BTreeMap::new();
    if n == 0 {
        out.insert(Vec::new(), vec![BigRational::one()]);
        return Ok(out);
    }
    // X D^{-2} terms: A D^{-1}, D A D^{-2}, A² D^{-2}
    let x_terms: Vec<Word> = vec![vec![(1, -1)], vec![(0, 1), (1, -2)], vec![(2, -2)]];
    for k in 1..=n {
        let coef = binom_alpha(ratio(-1, 2), k);
        let mut stack: Vec<(Word, usize)> = vec![(Vec::new(), 0)];
        for _ in 0..k {
            let mut next = Vec::new();
            for (w, deg) in &stack {
                for t in &x_terms {
                    let d: usize = t.iter().map(|l| l.0).sum();
                    if deg + d <= n {
                        let mut w2 = w.clone();
                        w2.extend(t.iter().copied());
                        next.push((w2, deg + d));
                    }
                }
            }
            stack = next;
        }
        for (w, deg) in stack {
            if deg == n {
                poly_add(out.entry(normal_form(&w)).or_insert_with(|| vec![BigRational::zero()]), &coef);
            }
        }
    }
    Ok(out.into_iter().map(|(k, v)| (k, poly_trim(v))).collect())
}

/// In the commuting case every block word equals xⁿ, so Σ coefficients must equal binom(-α, n).
pub fn commuting_check(n: usize) -> Result<bool> {
    let p = perturbation_polynomials(n)?;
    let mut sum: AlphaPoly = vec![BigRational::zero()];
    for v in p.values() {
        poly_add(&mut sum, v);
    }
    Ok(poly_trim(sum) == poly_trim(binom_alpha(BigRational::from_integer(BigInt::from(-1)), n)))
}

pub fn eval_alpha(p: &AlphaPoly, alpha: f64) -> f64 {
    use num_traits::ToPrimitive;
    p.iter().rev().fold(0.0, |acc, v| acc * alpha + v.to_f64().unwrap_or(f64::NAN))
}

/// ‖|D + A|^{-α} - Σ_{n≤N} P_n |D|^{-α}‖_F for D > 0 and Hermitian A, blocks evaluated as matrices.
pub fn perturbation_residual(d: &CMat, a: &CMat, alpha: f64, order: usize) -> Result<f64> {
    let n = d.nrows();
    let dinv = hermitian_fn(d, |l| 1.0 / l);
    let dpow = hermitian_fn(d, |l| l.abs().powf(-alpha));
    let exact = hermitian_fn(&(d + a), |l| l.abs().powf(-alpha));
    let mut approx = CMat::zeros(n, n);
    for k in 0..=order {
        for (blocks, poly) in perturbation_polynomials(k)? {
            let mut m = identity(n);
            for b in blocks {
                let mut ab = identity(n);
                for _ in 0..b {
                    ab = ab * a;
                }
                for _ in 0..b {
                    ab = ab * &dinv;
                }
                m *= ab;
            }
            approx += m.scale(eval_alpha(&poly, alpha));
        }
    }
    Ok(fro(&(exact - approx * dpow)))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixJson {
    Base64(String),
    Nested(Vec<Vec<EntryJson>>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EntryJson {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Deserialize)]
struct TripleJson {
    dim: usize,
    #[serde(rename = "D")]
    d: MatrixJson,
    gamma: Option<MatrixJson>,
    #[serde(rename = "J_unitary")]
    j_unitary: Option<MatrixJson>,
    #[serde(default)]
    gens: Vec<MatrixJson>,
    ko_dim: Option<u8>,
    eps: Option<[i8; 2]>,
}

fn decode(m: MatrixJson, dim: usize) -> Result<CMat> {
    match m {
        MatrixJson::Base64(s) => {
            // row-major little-endian (re, im) f64 pairs
            let bytes = base64::engine::general_purpose::STANDARD
                .decode(s.trim())
                .map_err(|e| SalError::Parse(format!("base64: {e}")))?;
            if bytes.len() != dim * dim * 16 {
                return Err(SalError::Parse(format!("base64 matrix has {} bytes, expected {}", bytes.len(), dim * dim * 16)));
            }
            let vals: Vec<f64> = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
            Ok(CMat::from_fn(dim, dim, |i, j| Complex64::new(vals[2 * (i * dim + j)], vals[2 * (i * dim + j) + 1])))
        }
        MatrixJson::Nested(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(SalError::Parse(format!("matrix must be {dim} × {dim}")));
            }
            Ok(CMat::from_fn(dim, dim, |i, j| match rows[i][j] {
                EntryJson::Real(x) => c(x),
                EntryJson::Complex([re, im]) => Complex64::new(re, im),
            }))
        }
    }
}

/// Encode a matrix in the base64 layout accepted by [`parse_triple_json`].
pub fn encode_base64(m: &CMat) -> String {
    let mut bytes = Vec::with_capacity(m.len() * 16);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            bytes.extend_from_slice(&m[(i, j)].re.to_le_bytes());
            bytes.extend_from_slice(&m[(i, j)].im.to_le_bytes());
        }
    }
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

/// Parse {dim, D, gamma?, J_unitary?, gens[], ko_dim?, eps?}; eps = [ε, ε'] overrides the table.
pub fn parse_triple_json(text: &str) -> Result<FiniteTriple> {
    let raw: TripleJson = serde_json::from_str(text).map_err(|e| SalError::Parse(e.to_string()))?;
    let n = raw.dim;
    let d = decode(raw.d, n)?;
    let gamma = raw.gamma.map(|m| decode(m, n)).transpose()?;
    let j = raw.j_unitary.map(|m| decode(m, n)).transpose()?;
    let gens = raw.gens.into_iter().map(|m| decode(m, n)).collect::<Result<Vec<_>>>()?;
    let signs = match (raw.eps, raw.ko_dim) {
        (Some([e, e1]), k) => Some(KoSigns { eps: e, eps1: e1, eps2: k.and_then(|k| ko_signs(k).eps2) }),
        (None, Some(k)) => Some(ko_signs(k)),
        _ => None,
    };
    FiniteTriple::new(d, gamma, j, gens, signs, raw.ko_dim)
}
