//! `sal`: spectral functions of catalog triples from the command line.
//!
//! Exit codes: 0 ok, 2 argument or domain errors, 3 non-converged computation.

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use sal_core::asymptotics::{action_expansion_spec, convergence_radius, heat_expansion_from_poles, radius_from_expansion, RadiusEstimate};
use sal_core::cutoffs::CutoffSpec;
use sal_core::finite_triples::{gauge_check, parse_triple_json, FiniteTriple};
use sal_core::io::{Cell, Format, Table};
use sal_core::oracles::{catalog_kernel, catalog_poles, catalog_zeta, podles_radius_data, s1_radius_data};
use sal_core::series_engine::{heat_trace, spectral_action_direct, zeta_direct};
use sal_core::spectra::{SphereSpin, TripleId, TripleKind};
use sal_core::SalError;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sal", version, about = "Heat traces, zeta functions and spectral actions of spectral triples")]
struct Cli {
    /// Output format: csv or json.
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tr e^{-tD} on a linear grid a:b:n.
    Heat {
        #[arg(long)]
        triple: TripleId,
        #[arg(long = "t-grid")]
        t_grid: String,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
    },
    /// ζ_D(s): direct sum where convergent, closed form elsewhere.
    Zeta {
        #[arg(long)]
        triple: TripleId,
        /// RE or RE,IM.
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Tr f(|D|/Λ) on a geometric grid a:b:n.
    Action {
        #[arg(long)]
        triple: TripleId,
        #[arg(long)]
        cutoff: CutoffSpec,
        #[arg(long = "lambda-grid")]
        lambda_grid: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Heat (or, with a cut-off, action) expansion terms from the pole data.
    Expand {
        #[arg(long)]
        triple: TripleId,
        #[arg(long)]
        cutoff: Option<CutoffSpec>,
        #[arg(long, default_value_t = 4)]
        strips: usize,
    },
    /// Direct action against its expansion, with discrepancy and log-slope.
    Compare {
        #[arg(long)]
        triple: TripleId,
        #[arg(long)]
        cutoff: CutoffSpec,
        #[arg(long = "lambda-grid")]
        lambda_grid: String,
        /// Number of expansion strips (default: all available).
        #[arg(long)]
        strips: Option<usize>,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
    },
    /// Axiom, gauge and index checks on a finite triple file.
    Finite {
        #[arg(long)]
        file: String,
        #[arg(long, default_value = "all")]
        check: String,
    },
    /// Convergence radius T of the heat expansion.
    Radius {
        #[arg(long)]
        triple: TripleId,
    },
}

enum Failure {
    Argument(String),
    NotConverged(String),
}

impl From<SalError> for Failure {
    fn from(e: SalError) -> Self {
        match e {
            SalError::NotConverged(m) => Failure::NotConverged(m),
            other => Failure::Argument(other.to_string()),
        }
    }
}

type Out = Result<(Table, Vec<String>), Failure>;

fn grid(spec: &str, geometric: bool) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Argument(format!("grid must be a:b:n with a ≤ b, n ≥ 1, got '{spec}'"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if n == 0 || !(a <= b) || !(a > 0.0) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            if geometric {
                a * (b / a).powf(f)
            } else {
                a + (b - a) * f
            }
        })
        .collect())
}

fn heat(id: &TripleId, t_grid: &str, tol: f64) -> Out {
    let spec = id.spectrum()?;
    let mut table = Table::new(&["t", "heat_trace", "terms", "tail_bound", "converged"]);
    let mut issues = Vec::new();
    for t in grid(t_grid, false)? {
        let r = heat_trace(&spec, None, t, tol)?;
        if !r.converged {
            issues.push(format!("heat trace at t = {t} not converged: tail bound {:e}", r.tail_bound));
        }
        table.push(vec![t.into(), r.value.into(), r.terms_used.into(), r.tail_bound.into(), r.converged.into()]);
    }
    Ok((table, issues))
}

fn zeta(id: &TripleId, s_arg: &str, tol: f64) -> Out {
    let nums: Result<Vec<f64>, _> = s_arg.split(',').map(|v| v.trim().parse::<f64>()).collect();
    let s = match nums.map_err(|_| Failure::Argument(format!("bad --s '{s_arg}'")))?.as_slice() {
        [re] => Complex64::new(*re, 0.0),
        [re, im] => Complex64::new(*re, *im),
        _ => return Err(Failure::Argument("--s takes RE or RE,IM".into())),
    };
    let spec = id.spectrum()?;
    let mut table = Table::new(&["re_s", "im_s", "re_zeta", "im_zeta", "method", "terms", "tail_bound", "converged"]);
    let mut issues = Vec::new();
    if s.re > spec.meta.dimension_p {
        let r = zeta_direct(&spec, None, s, tol)?;
        if !r.converged {
            issues.push(format!("direct zeta at s = {s} not converged: tail bound {:e}", r.tail_bound));
        }
        table.push(vec![
            s.re.into(),
            s.im.into(),
            r.value.re.into(),
            r.value.im.into(),
            "direct".into(),
            r.terms_used.into(),
            r.tail_bound.into(),
            r.converged.into(),
        ]);
    } else {
        let z = catalog_zeta(id, s)?;
        table.push(vec![s.re.into(), s.im.into(), z.re.into(), z.im.into(), "closed_form".into(), Cell::Empty, Cell::Empty, true.into()]);
    }
    Ok((table, issues))
}

fn action(id: &TripleId, f: &CutoffSpec, lambda_grid: &str, tol: f64) -> Out {
    let spec = id.spectrum()?;
    let mut table = Table::new(&["lambda", "action", "terms", "tail_bound", "converged"]);
    let mut issues = Vec::new();
    for l in grid(lambda_grid, true)? {
        let r = spectral_action_direct(&spec, f, l, tol * l.powf(spec.meta.dimension_p).max(1.0))?;
        if !r.converged {
            issues.push(format!("action at Λ = {l} not converged: tail bound {:e}", r.tail_bound));
        }
        table.push(vec![l.into(), r.value.into(), r.terms_used.into(), r.tail_bound.into(), r.converged.into()]);
    }
    Ok((table, issues))
}

fn heat_expansion(id: &TripleId, k_max: u32) -> Result<sal_core::asymptotics::AsymptoticExpansion, Failure> {
    let poles = catalog_poles(id, k_max, 8)?;
    Ok(heat_expansion_from_poles(&poles, catalog_kernel(id)?, None)?)
}

fn expand(id: &TripleId, f: Option<&CutoffSpec>, strips: usize) -> Out {
    if strips == 0 {
        return Err(Failure::Argument("--strips must be at least 1".into()));
    }
    let heat = heat_expansion(id, strips as u32 + 1)?;
    let exp = match f {
        Some(f) => action_expansion_spec(&heat, f)?,
        None => heat,
    };
    let mut table = Table::new(&["strip", "re_z", "im_z", "n", "re_coeff", "im_coeff", "exact"]);
    for t in exp.terms.iter().filter(|t| t.strip < strips) {
        if t.coeff.norm() == 0.0 {
            continue;
        }
        table.push(vec![
            t.strip.into(),
            t.z.re.into(),
            t.z.im.into(),
            (t.n as u64).into(),
            t.coeff.re.into(),
            t.coeff.im.into(),
            t.exact.as_ref().map(|q| q.to_string()).into(),
        ]);
    }
    Ok((table, Vec::new()))
}

fn compare(id: &TripleId, f: &CutoffSpec, lambda_grid: &str, strips: Option<usize>, tol: f64) -> Out {
    let spec = id.spectrum()?;
    let heat = heat_expansion(id, 8)?;
    let exp = action_expansion_spec(&heat, f)?;
    let k = strips.map_or(exp.strip_count(), |s| s.min(exp.strip_count())).max(1) - 1;
    let mut table = Table::new(&["lambda", "direct", "tail_bound", "expansion", "strips", "discrepancy", "log_slope"]);
    let mut issues = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for l in grid(lambda_grid, true)? {
        let r = spectral_action_direct(&spec, f, l, tol * l.powf(spec.meta.dimension_p).max(1.0))?;
        if !r.converged {
            issues.push(format!("action at Λ = {l} not converged: tail bound {:e}", r.tail_bound));
        }
        let e = exp.evaluate(l, k)?;
        let disc = (r.value - e).abs();
        let slope = prev.map(|(l0, d0)| -(disc / d0).ln() / (l / l0).ln());
        prev = Some((l, disc));
        table.push(vec![l.into(), r.value.into(), r.tail_bound.into(), e.into(), (k + 1).into(), disc.into(), slope.into()]);
    }
    Ok((table, issues))
}

fn finite(path: &str, check: &str) -> Out {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Argument(format!("{path}: {e}")))?;
    let t: FiniteTriple = parse_triple_json(&text)?;
    let tol = 1e-10 * t.d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let mut table = Table::new(&["check", "value", "reference", "violation", "pass"]);
    let (all, gauge, index) = match check {
        "all" => (true, true, t.gamma.is_some()),
        "gauge" => (false, true, false),
        "index" => (false, false, true),
        _ => return Err(Failure::Argument(format!("--check must be all|gauge|index, got '{check}'"))),
    };
    if all {
        for c in t.validate().checks {
            table.push(vec![c.name.into(), Cell::Empty, Cell::Empty, c.violation.into(), (c.violation <= tol).into()]);
        }
    }
    if gauge {
        let (norm, res) = gauge_check(&t, &[])?;
        table.push(vec!["gauge_covariance".into(), norm.into(), Cell::Empty, res.into(), (res <= tol).into()]);
    }
    if index {
        let ind = t.index()?;
        table.push(vec!["index".into(), ind.into(), Cell::Empty, Cell::Empty, true.into()]);
        for s in [0.1, 1.0, 10.0] {
            let m = t.mckean_singer(s)?;
            let v = (m - ind).abs();
            table.push(vec![format!("mckean_singer_t={s}").into(), m.into(), ind.into(), v.into(), (v <= 1e-11).into()]);
        }
        let (direct, via) = t.topological_action(|x| (-x).exp(), 1.0)?;
        let v = (direct - via).abs();
        table.push(vec!["topological_action".into(), direct.into(), via.into(), v.into(), (v <= 1e-12).into()]);
    }
    Ok((table, Vec::new()))
}

fn radius(id: &TripleId) -> Out {
    let (est, method): (RadiusEstimate, &str) = match &id.kind {
        TripleKind::Sphere { d: 1, spin: SphereSpin::Trivial } if !id.squared => {
            let (c, e, r) = s1_radius_data(5..=40)?;
            (convergence_radius(&c, &e, &r)?, "exactness_data")
        }
        TripleKind::Podles { params, simplified: true } if !id.squared => {
            let (c, e, r) = podles_radius_data(*params, 5..=40);
            (convergence_radius(&c, &e, &r)?, "exactness_data")
        }
        _ => (radius_from_expansion(&heat_expansion(id, 40)?)?, "expansion_strips"),
    };
    let mut table = Table::new(&["radius", "beta", "alpha", "samples", "method"]);
    table.push(vec![est.t.into(), est.beta.into(), est.alpha.into(), est.samples.into(), method.into()]);
    Ok((table, Vec::new()))
}

fn run(cli: Cli) -> Out {
    match cli.cmd {
        Cmd::Heat { triple, t_grid, tol } => heat(&triple, &t_grid, tol),
        Cmd::Zeta { triple, s, tol } => zeta(&triple, &s, tol),
        Cmd::Action { triple, cutoff, lambda_grid, tol } => action(&triple, &cutoff, &lambda_grid, tol),
        Cmd::Expand { triple, cutoff, strips } => expand(&triple, cutoff.as_ref(), strips),
        Cmd::Compare { triple, cutoff, lambda_grid, strips, tol } => compare(&triple, &cutoff, &lambda_grid, strips, tol),
        Cmd::Finite { file, check } => finite(&file, &check),
        Cmd::Radius { triple } => radius(&triple),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let format = cli.format;
    match run(cli) {
        Ok((table, issues)) => {
            print!("{}", table.render(format));
            if issues.is_empty() {
                ExitCode::SUCCESS
            } else {
                for i in issues {
                    eprintln!("sal: {i}");
                }
                ExitCode::from(3)
            }
        }
        Err(Failure::Argument(m)) => {
            eprintln!("sal: {m}");
            ExitCode::from(2)
        }
        Err(Failure::NotConverged(m)) => {
            eprintln!("sal: not converged: {m}");
            ExitCode::from(3)
        }
    }
}
