//! Acceptance suite: one PASS/FAIL line per criterion, with the sub-checks behind it.
//! Run with `cargo test -p sal-core --test acceptance -- --nocapture` to see the table.
//!
//! Criteria whose reference values do not survive an independent recomputation are
//! listed in KNOWN_DEFECTS: they are computed faithfully and reported as FAIL, and the
//! test asserts that nothing outside that list fails.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sal_core::asymptotics::{convergence_radius, heat_expansion_from_poles, radius_from_expansion};
use sal_core::cutoffs::{CutoffFunction, CutoffSpec};
use sal_core::finite_triples::{
    bimodule_triple, commuting_check, graded_triple, h_polynomial, perturbation_polynomials, perturbation_residual, reference_triple, ko_signs,
    CMat, FiniteTriple, KoSigns,
};
use sal_core::oracles::{
    catalog_kernel, catalog_poles, catalog_zeta, podles_a_residue, podles_heat_exact, podles_radius_data, s1_heat_exact, s1_laurent_sum, s1_radius_data,
};
use sal_core::series_engine::{dixmier_estimate, heat_trace, mellin_check, spectral_action_direct, zeta_direct};
use sal_core::special_fn::bernoulli::bernoulli_number;
use sal_core::special_fn::epstein_zd;
use sal_core::special_fn::gamma::{digamma, gamma, EULER_GAMMA};
use sal_core::spectra::{PodlesParams, Spectrum, SphereSpin, TripleId};
use sal_core::summation::{decay_rate, poisson_compare, power_fit, s3_action, s4_coefficients, s4_gaussian_pipeline, t3_spin_difference, RadialKernel};
use std::f64::consts::PI;
use std::time::Instant;

/// (criterion, sub-check) pairs expected to fail; see the decisions ledger.
const KNOWN_DEFECTS: &[(u32, &str)] = &[(4, "c1 = +31/1890"), (6, "A-residue = 2q(1+q^2)|w|^2/log^2 q")];

struct Row {
    criterion: u32,
    name: String,
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Suite {
    rows: Vec<Row>,
}

impl Suite {
    fn check(&mut self, criterion: u32, name: &str, pass: bool, detail: String) {
        self.rows.push(Row { criterion, name: name.to_string(), pass, detail });
    }

    fn close(&mut self, criterion: u32, name: &str, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs();
        self.check(criterion, name, err < tol, format!("got {got:.12e}, want {want:.12e}, err {err:.2e} (tol {tol:.0e})"));
    }

    fn rel(&mut self, criterion: u32, name: &str, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs() / want.abs();
        self.check(criterion, name, err < tol, format!("got {got:.12e}, want {want:.12e}, rel {err:.2e} (tol {tol:.0e})"));
    }
}

fn id(s: &str) -> TripleId {
    s.parse().unwrap()
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn podles(q: f64) -> PodlesParams {
    PodlesParams::new(q, Complex64::new(1.0, 0.0)).unwrap()
}

fn criterion_1(s: &mut Suite) {
    let start = Instant::now();
    let s1 = id("s1").spectrum().unwrap();
    for t in [0.1, 0.5, 2.0] {
        let h = heat_trace(&s1, None, t, 1e-15).unwrap();
        s.close(1, &format!("heat(s1, {t}) = coth(t/2)"), h.value, s1_heat_exact(t), 1e-12);
    }
    s.close(1, "Laurent partial sum k <= 10 at t = 0.5", s1_laurent_sum(0.5, 10).unwrap(), s1_heat_exact(0.5), 1e-12);
    let (c, e, rr) = s1_radius_data(5..=40).unwrap();
    let t = convergence_radius(&c, &e, &rr).unwrap().t;
    s.check(1, "radius in [6.0, 6.6]", (6.0..=6.6).contains(&t), format!("T = {t:.6} (2π = {:.6})", 2.0 * PI));
    let el = start.elapsed().as_secs_f64();
    s.check(1, "runtime < 1 s", el < 1.0, format!("{el:.3} s"));
}

fn criterion_2(s: &mut Suite) {
    let t: f64 = 0.05;
    let h = heat_trace(&id("s3sq").spectrum().unwrap(), None, t, 1e-14).unwrap();
    let want = PI.sqrt() / 2.0 * t.powf(-1.5) - PI.sqrt() / 4.0 * t.powf(-0.5);
    s.rel(2, "heat(s3sq, 0.05) two-term form", h.value, want, 1e-10);
    let a = spectral_action_direct(&id("s3").spectrum().unwrap(), &CutoffSpec::Gauss, 10.0, 1e-12).unwrap();
    let closed = s3_action(&|x: f64| (-x * x).exp(), 10.0).unwrap();
    s.rel(2, "S^3 action, gauss, Λ = 10", a.value, closed, 1e-8);
}

fn criterion_3(s: &mut Suite) {
    let tid = id("s2sq");
    let poles = catalog_poles(&tid, 30, 0).unwrap();
    let heat = heat_expansion_from_poles(&poles, catalog_kernel(&tid).unwrap(), None).unwrap();
    let exact_at = |z: f64| heat.terms.iter().find(|t| (t.z.re - z).abs() < 1e-9 && t.n == 0).and_then(|t| t.exact.clone());
    s.check(3, "a_{1,0} = 2", exact_at(1.0) == Some(r(2, 1)), format!("{:?}", exact_at(1.0).map(|q| q.to_string())));
    let mut ok = true;
    let mut shown = Vec::new();
    for k in 0..=5i64 {
        let fact: BigInt = (1..=k).map(BigInt::from).product();
        let sign = if k % 2 == 0 { -4 } else { 4 };
        let want = bernoulli_number(2 * k as usize + 2).unwrap() * BigRational::from_integer(BigInt::from(sign))
            / (BigRational::from_integer(fact) * r(2 * k + 2, 1));
        let got = exact_at(-(k as f64));
        ok &= got.as_ref() == Some(&want);
        shown.push(format!("{}", got.map_or("none".into(), |q| q.to_string())));
    }
    s.check(3, "a_{-k,0} = -4(-1)^k B_{2k+2}/(k!(2k+2)), k <= 5", ok, shown.join(", "));
    let tr = heat.optimal_truncation(0.1).unwrap();
    let direct = heat_trace(&tid.spectrum().unwrap(), None, 0.1, 1e-14).unwrap().value;
    let err = (tr.value - direct).abs();
    s.check(
        3,
        "optimal truncation at t = 0.1 within smallest-term bound",
        err <= tr.remainder,
        format!("err {err:.3e}, bound {:.3e}, strips {}", tr.remainder, tr.strips_used),
    );
    let t = radius_from_expansion(&heat).unwrap().t;
    s.check(3, "radius T = 0", t == 0.0, format!("T = {t}"));
}

fn criterion_4(s: &mut Suite) {
    let c = s4_coefficients(3).unwrap();
    s.check(4, "constant term 11/90", c[0] == r(11, 90), c[0].to_string());
    s.check(4, "c1 = +31/1890", c[1] == r(31, 1890), format!("engine {}", c[1]));
    s.check(4, "c2 = 41/7560", c[2] == r(41, 7560), c[2].to_string());
    s.check(4, "c3 = -31/11880", c[3] == r(-31, 11880), c[3].to_string());
    let lambda = 10.0;
    let direct: f64 = (2..400)
        .map(|k| {
            let k = k as f64;
            4.0 / 3.0 * (k * k * k - k) * (-(k / lambda) * (k / lambda)).exp()
        })
        .sum();
    let em = s4_gaussian_pipeline(lambda, 10).unwrap();
    let err = (em.estimate - direct).abs();
    s.check(4, "pipeline vs direct, Λ = 10, m = 10", err <= em.remainder_bound, format!("err {err:.3e}, bound {:.3e}", em.remainder_bound));
}

fn criterion_5(s: &mut Suite) {
    let t = 0.05;
    let h = heat_trace(&id("nct2sq").spectrum().unwrap(), None, t, 1e-14).unwrap();
    s.rel(5, "heat(nct2sq, 0.05) = 2π/t", h.value, 2.0 * PI / t, 1e-9);
    let z0 = epstein_zd(Complex64::new(0.0, 0.0), 2).unwrap().re;
    s.close(5, "Z_2(0) = -1", z0, -1.0, 1e-10);
    s.close(5, "ζ_D(0) = 0", catalog_zeta(&id("nct2"), Complex64::new(0.0, 0.0)).unwrap().norm(), 0.0, 1e-10);
    let f = CutoffFunction::window(0.0, 1.0).unwrap().product(&CutoffFunction::exp(1.0).unwrap()).unwrap();
    // f(x) = (1 - e^{-x}) e^{-x}/x: ∫ x f = 1/2, ∫ x³ f = 7/4
    let f2 = f.f_moment(Complex64::new(2.0, 0.0), 0).unwrap().re;
    let f4 = f.f_moment(Complex64::new(4.0, 0.0), 0).unwrap().re * 6.0;
    s.close(5, "f_2 moment", f2, 0.5, 1e-10);
    s.close(5, "f_4 moment", f4, 1.75, 1e-10);
    let spec = CutoffSpec::Laplace(f);
    let l2 = 30.0;
    let a2 = spectral_action_direct(&id("nct2").spectrum().unwrap(), &spec, l2, 1e-6 * l2 * l2).unwrap();
    s.rel(5, "nct2 action vs 4π f_2 Λ², Λ = 30", a2.value, 4.0 * PI * 0.5 * l2 * l2, 1e-3);
    let l4 = 12.0;
    let a4 = spectral_action_direct(&id("nct4").spectrum().unwrap(), &spec, l4, 1e-6 * l4.powi(4)).unwrap();
    s.rel(5, "nct4 action vs 8π² f_4 Λ⁴, Λ = 12", a4.value, 8.0 * PI * PI * 1.75 * l4.powi(4), 1e-3);
}

fn criterion_6(s: &mut Suite) {
    for q in [0.3, 0.5, 0.8] {
        let tid = id(&format!("podles:{q},1"));
        let spec = tid.spectrum().unwrap();
        for sv in [2.0, 3.0] {
            let z = Complex64::new(sv, 0.0);
            let d = zeta_direct(&spec, None, z, 1e-15).unwrap().value.re;
            let c = catalog_zeta(&tid, z).unwrap().re;
            s.close(6, &format!("ζ closed form vs direct, q = {q}, s = {sv}"), c, d, 1e-10);
        }
    }
    let p = podles(0.5);
    let l = p.q.ln();
    let lu = p.u().ln();
    let poles = catalog_poles(&id("podless:0.5,1"), 3, 3).unwrap();
    let a = poles.iter().find(|d| d.z.norm() < 1e-12).unwrap().heat_coefficients();
    s.close(6, "a_{0,2} = 2/log²q", a[2].re, 2.0 / (l * l), 1e-10);
    s.close(6, "a_{0,1} = 4(log u + γ)/log²q", a[1].re, 4.0 / (l * l) * (lu + EULER_GAMMA), 1e-10);
    let k1 = p.kappa();
    let ak = poles.iter().find(|d| (d.z - k1).norm() < 1e-12).unwrap().heat_coefficients();
    let pre = -4.0 / (l * l) * (-k1 * lu).exp() * gamma(k1).unwrap();
    s.close(6, "a_{κ,1}", (ak[1] - pre).norm(), 0.0, 1e-10);
    s.close(6, "a_{κ,0}", (ak[0] - pre * (lu - digamma(k1).unwrap())).norm(), 0.0, 1e-10);
    let simp = Spectrum::podles(p, true);
    for t in [0.5, 1.0, 5.0] {
        let d = heat_trace(&simp, None, t, 1e-15).unwrap().value;
        let e = podles_heat_exact(p, t, 40, 60).unwrap();
        s.close(6, &format!("heat exact vs direct, t = {t}"), e, d, 1e-8);
    }
    let (c, e, rr) = podles_radius_data(p, 5..=40);
    let t = convergence_radius(&c, &e, &rr).unwrap().t;
    s.check(6, "radius T = ∞", t == f64::INFINITY, format!("T = {t}"));
    let ar = podles_a_residue(p).unwrap();
    let rel = (ar.value.re - ar.printed).abs() / ar.printed;
    s.check(
        6,
        "A-residue = 2q(1+q^2)|w|^2/log^2 q",
        rel < 1e-4,
        format!("engine {:.6}, reference {:.6}, rel {rel:.2e}; closed form vs diagonal sums {:.1e}", ar.value.re, ar.printed, ar.closed_form_error),
    );
}

fn criterion_7(s: &mut Suite) {
    let cases: [(&str, Spectrum, [Complex64; 2]); 3] = [
        ("S^1 (kernel removed)", id("s1sq").spectrum().unwrap(), [Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.5)]),
        ("S^2", id("s2sq").spectrum().unwrap(), [Complex64::new(3.0, 0.0), Complex64::new(3.5, 1.0)]),
        ("Podles simplified", Spectrum::podles(podles(0.5), true), [Complex64::new(1.0, 0.5), Complex64::new(2.0, 0.0)]),
    ];
    for (name, spec, ss) in cases {
        for z in ss {
            match mellin_check(&spec, z, 1e-8) {
                Ok(rep) => s.check(7, &format!("Mellin {name}, s = {z}"), rep.residual < 1e-7, format!("residual {:.2e}", rep.residual)),
                Err(e) => s.check(7, &format!("Mellin {name}, s = {z}"), false, e.to_string()),
            }
        }
    }
}

fn criterion_8(s: &mut Suite) {
    let ts: Vec<f64> = (1..=12).map(|i| 0.05 * i as f64).collect();
    let ds: Vec<f64> = ts.iter().map(|&t| poisson_compare(&RadialKernel::ExpAbs, t, 1).unwrap().discrepancy).collect();
    let c = power_fit(&ts, &ds, &[1, 3, 5, 7]).unwrap();
    s.close(8, "e^{-t|k|} discrepancy leading coefficient 1/6", c[0], 1.0 / 6.0, 1e-6);
    let ls = [4.0, 8.0, 16.0];
    let d = t3_spin_difference(&CutoffSpec::Gauss, &ls, &[0, 0, 0], &[1, 0, 0]).unwrap();
    let slope = decay_rate(&ls, &d).unwrap();
    s.check(8, "T^3 spin-structure difference log-slope >= 8", slope >= 8.0, format!("slope {slope:.2}"));
}

fn diag(v: &[Complex64]) -> CMat {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

fn criterion_9(s: &mut Suite) {
    // KO table: reference triples pass and every single sign flip is detected
    let mut cells = 0;
    let mut good = 0;
    for d in 0..8u8 {
        let t = reference_triple(d);
        let sg = ko_signs(d);
        let base_ok = t.validate().passes(1e-14);
        let flips = [
            Some(KoSigns { eps: -sg.eps, ..sg }),
            Some(KoSigns { eps1: -sg.eps1, ..sg }),
            sg.eps2.map(|e| KoSigns { eps2: Some(-e), ..sg }),
        ];
        for f in flips {
            cells += 1;
            let detected = match f {
                Some(f) => !FiniteTriple { signs: Some(f), ..t.clone() }.validate().passes(1e-6),
                None => true,
            };
            if base_ok && detected {
                good += 1;
            }
        }
    }
    s.check(9, "KO sign table 8 x 3", good == cells && cells == 24, format!("{good}/{cells} cells"));

    let mut rng = StdRng::seed_from_u64(20261018);
    let mut worst: f64 = 0.0;
    let cplx = |rng: &mut StdRng| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    for _ in 0..100 {
        let n = rng.gen_range(2..=4usize);
        let mut d1 = DMatrix::from_fn(n, n, |_, _| cplx(&mut rng));
        d1 = (&d1 + d1.adjoint()).scale(0.5);
        let gens: Vec<CMat> = (0..n)
            .map(|i| diag(&(0..n).map(|j| Complex64::new((i == j) as u8 as f64, 0.0)).collect::<Vec<_>>()))
            .collect();
        let t = bimodule_triple(&d1, &gens).unwrap();
        let one = DMatrix::identity(n, n);
        let pairs: Vec<(CMat, CMat)> = (0..3)
            .map(|_| {
                let a = diag(&(0..n).map(|_| cplx(&mut rng)).collect::<Vec<_>>());
                let b = diag(&(0..n).map(|_| cplx(&mut rng)).collect::<Vec<_>>());
                (a.kronecker(&one), b.kronecker(&one))
            })
            .collect();
        let pot = t.hermitian_potential(&pairs);
        let u = diag(&(0..n).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))).collect::<Vec<_>>()).kronecker(&one);
        let (_, res) = t.gauge_transform(&pot.a, &u).unwrap();
        worst = worst.max(res);
    }
    s.check(9, "gauge covariance, 100 random commutative triples", worst < 1e-12, format!("max residual {worst:.2e}"));

    let tm = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 0.0, 2.0, 1.0, -1.0].map(|x| Complex64::new(x, 0.0)));
    let g = graded_triple(&tm);
    let ms: Vec<f64> = [0.01, 0.1, 1.0, 10.0].iter().map(|&t| g.mckean_singer(t).unwrap()).collect();
    let spread = ms.iter().fold(0.0f64, |m, v| m.max((v - ms[0]).abs()));
    s.check(9, "McKean-Singer t-independence", spread < 1e-11, format!("values {ms:?}, spread {spread:.1e}"));
    let (direct, via) = g.topological_action(|x| (-x).exp() + 1.0 / (1.0 + x * x), 2.0).unwrap();
    let err = (direct - via).abs();
    s.check(9, "S_top = f(0) index", err <= 8.0 * f64::EPSILON * direct.abs().max(1.0), format!("direct {direct}, f(0) index {via}, err {err:.1e}"));

    let h = h_polynomial(1, &[1]).unwrap();
    let h_ok = h.coeff(2) == r(1, 8) && h.coeffs.iter().enumerate().all(|(j, c)| j + h.n == 2 || *c == r(0, 1));
    s.check(9, "h_1(s;(1)) = s^2/8", h_ok, format!("coefficients of s^1.. {:?}", h.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>()));
    let p2 = perturbation_polynomials(2).unwrap();
    let mut sum = vec![r(0, 1); 3];
    for v in p2.values() {
        for (i, c) in v.iter().enumerate() {
            sum[i] += c;
        }
    }
    s.check(
        9,
        "P_2 commuting identity α(α+1)/2",
        sum == vec![r(0, 1), r(1, 2), r(1, 2)] && commuting_check(2).unwrap(),
        format!("Σ P_2 = {:?}", sum.iter().map(|c| c.to_string()).collect::<Vec<_>>()),
    );
    let d = diag(&[1.0, 2.0, 3.0, 5.0].map(|x| Complex64::new(x, 0.0)));
    let a = diag(&[0.3, -0.2, 0.5, 0.1].map(|x| Complex64::new(x, 0.0)));
    let e1 = perturbation_residual(&d, &a.scale(0.1), 0.7, 2).unwrap();
    let e2 = perturbation_residual(&d, &a.scale(0.01), 0.7, 2).unwrap();
    let slope = (e1 / e2).log10();
    s.check(9, "Σ P_n |D|^{-α} residual is cubic in the A-scale", (slope - 3.0).abs() < 0.1, format!("log-slope {slope:.4}"));
}

fn criterion_10(s: &mut Suite) {
    let s2 = Spectrum::sphere(2, SphereSpin::NonTrivial).unwrap();
    let d = dixmier_estimate(&s2, 2.0, 100_000).unwrap();
    s.rel(10, "|D|^{-2} Dixmier estimate (Richardson), n = 1e5", d.richardson, 2.0, 0.05);
    let d3 = dixmier_estimate(&s2, 3.0, 100_000).unwrap();
    s.check(10, "trace-class |D|^{-3} estimate < 1e-3", d3.richardson.abs() < 1e-3, format!("{:.3e}", d3.richardson));
}

#[test]
fn acceptance() {
    let mut s = Suite::default();
    criterion_1(&mut s);
    criterion_2(&mut s);
    criterion_3(&mut s);
    criterion_4(&mut s);
    criterion_5(&mut s);
    criterion_6(&mut s);
    criterion_7(&mut s);
    criterion_8(&mut s);
    criterion_9(&mut s);
    criterion_10(&mut s);
    let mut unexpected = Vec::new();
    for c in 1..=10u32 {
        let rows: Vec<&Row> = s.rows.iter().filter(|r| r.criterion == c).collect();
        let pass = rows.iter().all(|r| r.pass);
        println!("CRITERION {c:2}: {}", if pass { "PASS" } else { "FAIL" });
        for r in rows {
            let known = KNOWN_DEFECTS.contains(&(c, r.name.as_str()));
            let tag = match (r.pass, known) {
                (true, _) => "ok",
                (false, true) => "FAIL (known defect)",
                (false, false) => "FAIL",
            };
            println!("    [{tag}] {}: {}", r.name, r.detail);
            if !r.pass && !known {
                unexpected.push(format!("{c}: {}", r.name));
            }
        }
    }
    assert!(unexpected.is_empty(), "unexpected failures: {unexpected:?}");
}
