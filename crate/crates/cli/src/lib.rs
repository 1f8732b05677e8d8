//! Command line front end: builds a [`VerifyConfig`], runs one suite and
//! emits a JSON [`Report`].

pub mod provider;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use griffiths_core::adapted_frame::{random_riemann, RiemannTensor};
use griffiths_core::calibration::{
    coclosure_diagnostics, comass_estimate, gwistor_phi, never_closed_check, special_lagrangian_identity,
    ComassOptions,
};
use griffiths_core::griffiths_forms::{residual_string, GriffithsSystem};
use griffiths_core::hypersurface::{
    el_residuals, el_residuals_via_forms, pullback_alpha, pullback_alpha_by_forms, pullback_form,
    weingarten_polynomial, AmbientData, ShapeOperator,
};
use griffiths_core::linalg::Matrix;
use griffiths_core::metrics::{csc_via_coclosure_within, einstein_via_alpha2_within};
use griffiths_core::space_forms::{space_form_curvature, undetected_mutations, verify_csc};
use griffiths_core::symmetry::{det_l, det_l_closed, det_l_display, lie_derivative_check, symmetry_solutions};
use griffiths_core::{Error as CoreError, Rational, Scalar};
use num_traits::Zero;
use serde_json::{json, Value};

use crate::provider::{parse, parse_vec, Curvature, Provider};
use crate::report::Report;

pub const DEFAULT_SEED: u64 = 1_729;
pub const SEED_ENV: &str = "GRIFFITHS_SEED";
const EXACT_TOL: f64 = 1e-10;
const FD_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "griffiths", version, about = "Verify the Griffiths exterior differential system of a tangent sphere bundle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hodge dualities and first-order structure equations for one tensor.
    Structure(Common),
    /// Closed-form equations and coclosure on a space form.
    Csc(Common),
    /// Einstein and space-form criteria for a curvature provider.
    Einstein(Common),
    /// Symmetry determinant and its eigen-solutions on a space form.
    Symmetry(Common),
    /// Euler–Lagrange residuals of a normal lift.
    Hypersurface(HypersurfaceArgs),
    /// G2 form, special-Lagrangian pair and comass (n = 3).
    Gwistor(GwistorArgs),
}

#[derive(Clone, Debug, Default, Args)]
pub struct Common {
    /// Fibre dimension; the base has dimension n+1.
    #[arg(long)]
    pub n: Option<usize>,
    /// Fibre radius.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub s: String,
    /// Sectional curvature of the space form.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub k: String,
    /// csc:k=.., product-spheres:k1,k2,d1,d2, random:SEED,
    /// einstein-random:SEED, json:PATH or a chart metric name.
    #[arg(long)]
    pub provider: Option<String>,
    /// Unit direction the frame is adapted to.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u: Option<Vec<String>>,
    /// Point of a chart metric.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Base seed; defaults to $GRIFFITHS_SEED, then a fixed constant.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random sample count where a suite draws samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Tolerance for floating point comparisons; defaults to 1e-10, or
    /// 1e-6 for finite-difference providers.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Args)]
pub struct HypersurfaceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Shape operator as a JSON matrix, e.g. '[[1,0],[0,"-1/2"]]'.
    #[arg(long, conflicts_with = "eigenvalues")]
    pub a: Option<String>,
    /// Principal curvatures.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eigenvalues: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, Args)]
pub struct GwistorArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 10_000)]
    pub comass_samples: usize,
    #[arg(long, default_value_t = 100)]
    pub ascent_steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Structure,
    Csc,
    Einstein,
    Symmetry,
    Hypersurface,
    Gwistor,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Structure => "structure",
            Self::Csc => "csc",
            Self::Einstein => "einstein",
            Self::Symmetry => "symmetry",
            Self::Hypersurface => "hypersurface",
            Self::Gwistor => "gwistor",
        }
    }
}

/// Validated settings for one run.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub command: CommandKind,
    pub n: usize,
    pub s: String,
    pub k: String,
    pub provider: Option<Provider>,
    pub u: Option<Vec<String>>,
    pub x: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    pub tol: Option<f64>,
    pub shape: Option<Matrix<Rational>>,
    pub comass: ComassOptions,
    pub out: Option<PathBuf>,
}

/// Arguments only some subcommands take.
enum Extra {
    Shape(HypersurfaceArgs),
    Comass(GwistorArgs),
}

fn default_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{SEED_ENV}={v} is not a seed")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

impl VerifyConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let (command, common, extra) = match cli.command {
            Command::Structure(c) => (CommandKind::Structure, c, None),
            Command::Csc(c) => (CommandKind::Csc, c, None),
            Command::Einstein(c) => (CommandKind::Einstein, c, None),
            Command::Symmetry(c) => (CommandKind::Symmetry, c, None),
            Command::Hypersurface(h) => (CommandKind::Hypersurface, h.common.clone(), Some(Extra::Shape(h))),
            Command::Gwistor(g) => (CommandKind::Gwistor, g.common.clone(), Some(Extra::Comass(g))),
        };
        let provider = common.provider.as_deref().map(Provider::parse).transpose()?;
        let seed = match common.seed {
            Some(s) => s,
            None => default_seed()?,
        };
        let mut shape = None;
        let mut comass = ComassOptions {
            seed,
            ..ComassOptions::default()
        };
        match extra {
            Some(Extra::Shape(h)) => shape = Some(parse_shape(&h)?),
            Some(Extra::Comass(g)) => {
                comass.samples = g.comass_samples;
                comass.ascent_steps = g.ascent_steps;
            }
            None => {}
        }
        let forced = provider.as_ref().and_then(Provider::forced_n);
        let n = match (common.n, forced, &shape) {
            (Some(n), Some(f), _) if n != f => bail!("--n {n} conflicts with the provider (n = {f})"),
            (_, _, Some(a)) => a.rows(),
            (Some(n), _, _) | (None, Some(n), _) => n,
            (None, None, None) => match command {
                CommandKind::Symmetry => 2,
                _ => 3,
            },
        };
        if n == 0 {
            bail!("n must be at least 1");
        }
        if command == CommandKind::Gwistor && n != 3 {
            bail!("gwistor needs n = 3");
        }
        if command == CommandKind::Einstein && n < 2 {
            bail!("the Einstein criterion needs n >= 2");
        }
        let s: Rational = parse(&common.s)?;
        if s <= Rational::zero() {
            bail!("fibre radius must be positive");
        }
        if command == CommandKind::Gwistor && s != Rational::from_count(1) {
            bail!("gwistor works on the unit bundle, s = 1");
        }
        parse::<Rational>(&common.k)?;
        let x = common
            .x
            .unwrap_or_else(|| [0.1, 0.2, -0.3, 0.15, -0.05, 0.25].iter().cycle().take(n + 1).copied().collect());
        Ok(Self {
            command,
            n,
            s: common.s,
            k: common.k,
            provider,
            u: common.u,
            x,
            seed,
            samples: common.samples.unwrap_or(100),
            tol: common.tol,
            shape,
            comass,
            out: common.out,
        })
    }

    fn curvature(&self, fallback: &str) -> Result<Curvature> {
        let p = match &self.provider {
            Some(p) => p.clone(),
            None => Provider::parse(fallback)?,
        };
        p.build(self.n, self.u.as_deref(), &self.x)
    }
}

fn parse_shape(h: &HypersurfaceArgs) -> Result<Matrix<Rational>> {
    if let Some(text) = &h.a {
        let rows: Vec<Vec<Value>> = serde_json::from_str(text).context("--a must be a JSON matrix")?;
        let rows: Vec<Vec<Rational>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| match v {
                        Value::String(s) => parse(s),
                        other => parse(&other.to_string()),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let m = Matrix::from_rows(rows).context("--a must be rectangular")?;
        ShapeOperator::new(m.clone())?;
        Ok(m)
    } else if let Some(ev) = &h.eigenvalues {
        Ok(Matrix::diagonal(&parse_vec::<Rational>(ev)?))
    } else {
        bail!("hypersurface needs --a or --eigenvalues")
    }
}

pub fn run(cfg: &VerifyConfig) -> Result<Report> {
    let mut rep = Report::new(cfg.command.name());
    match cfg.command {
        CommandKind::Structure => match cfg.curvature(&format!("csc:k={}", cfg.k))? {
            Curvature::Exact(r) => structure(&mut rep, &parse(&cfg.s)?, &r, None)?,
            Curvature::Float(r) => structure(&mut rep, &parse(&cfg.s)?, &r, Some(cfg.tol.unwrap_or(FD_TOL)))?,
        },
        CommandKind::Csc => csc(&mut rep, cfg)?,
        CommandKind::Einstein => match cfg.curvature("product-spheres:1,1,2,2")? {
            Curvature::Exact(r) => einstein(&mut rep, &parse(&cfg.s)?, &r, cfg.tol.unwrap_or(EXACT_TOL))?,
            Curvature::Float(r) => einstein(&mut rep, &parse(&cfg.s)?, &r, cfg.tol.unwrap_or(FD_TOL))?,
        },
        CommandKind::Symmetry => symmetry(&mut rep, cfg)?,
        CommandKind::Hypersurface => hypersurface(&mut rep, cfg)?,
        CommandKind::Gwistor => gwistor(&mut rep, cfg)?,
    }
    Ok(rep)
}

/// `tol` re-judges float residuals; identities are checked against the
/// tensor as given, so only the curvature-dependent ones see the noise.
fn structure<T: Scalar>(rep: &mut Report, s: &T, r: &RiemannTensor<T>, tol: Option<f64>) -> Result<()> {
    let sys = GriffithsSystem::new(r.n(), s.clone())?;
    rep.check("curvature_symmetries", r.is_valid(), r.validate().len().to_string());
    let mut sr = sys.structure_report(r);
    if let Some(tol) = tol {
        for outcome in sr.checks.values_mut() {
            if let Ok(v) = outcome.residual.parse::<f64>() {
                outcome.pass = v <= tol;
            }
        }
    }
    rep.extend(&sr);
    Ok(())
}

fn csc(rep: &mut Report, cfg: &VerifyConfig) -> Result<()> {
    let (k, s): (Rational, Rational) = (parse(&cfg.k)?, parse(&cfg.s)?);
    rep.extend(&verify_csc(&k, &s, cfg.n)?);
    if cfg.n >= 2 {
        let missed = undetected_mutations(&k, &s, cfg.n, &Rational::new(1.into(), 3.into()))?;
        rep.check("every_mutation_breaks_coclosure", missed.is_empty(), missed.len().to_string());
    }
    Ok(())
}

fn einstein<T: Scalar>(rep: &mut Report, s: &T, r: &RiemannTensor<T>, tol: f64) -> Result<()> {
    let sys = GriffithsSystem::new(r.n(), s.clone())?;
    rep.check("curvature_symmetries", r.is_valid(), r.validate().len().to_string());
    let diff = &sys.d_star_alpha(r, 2) - &r.rho(s).wedge(sys.vol());
    rep.check(
        "d_star_alpha_2_equals_rho_vol",
        diff.is_negligible(tol),
        residual_string(&diff.max_abs_coeff()),
    );
    let residual = r.einstein_residual();
    let einstein = einstein_via_alpha2_within(r, s, tol)?;
    let csc = csc_via_coclosure_within(r, s, tol)?;
    let truth_einstein = residual.is_negligible(tol);
    let truth_csc = space_form_curvature(r, tol).is_some();
    rep.check("einstein_matches_ricci", einstein == truth_einstein, residual_string(&residual));
    rep.check("csc_matches_curvature", csc == truth_csc, format!("space form: {truth_csc}"));
    rep.summary = Some(format!("einstein: {einstein}, csc: {csc}"));
    rep.detail("einstein", einstein);
    rep.detail("csc", csc);
    rep.detail("einstein_residual", residual_string(&residual));
    Ok(())
}

fn symmetry(rep: &mut Report, cfg: &VerifyConfig) -> Result<()> {
    let (k, s): (Rational, Rational) = (parse(&cfg.k)?, parse(&cfg.s)?);
    let eps = s.clone() * s.clone() * k.clone();
    let det = det_l(cfg.n, &eps);
    rep.check("det_l_matches_closed_form", det == det_l_closed(cfg.n, &eps), "0");
    rep.detail("det", det_l_display(cfg.n));
    rep.detail("det_polynomial", det.to_string());
    rep.detail("epsilon", eps.to_string());
    match symmetry_solutions(cfg.n, &k, &s) {
        Ok(an) => {
            rep.detail("case", an.case);
            let mut sols = Vec::new();
            for sol in &an.solutions {
                let res = lie_derivative_check(&sol.x, &sol.c, &k, &s)?;
                rep.check_zero(format!("lie_derivative_c={}", sol.c), &res.max_abs_coeff());
                sols.push(json!({
                    "c": sol.c.to_string(),
                    "x": sol.x.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "closed": sol.closed,
                }));
            }
            rep.detail("solutions", sols);
        }
        Err(CoreError::IrrationalRoot(_)) => {
            let (kf, sf) = (k.to_f64(), s.to_f64());
            let an = symmetry_solutions(cfg.n, &kf, &sf)?;
            rep.detail("case", an.case);
            let mut sols = Vec::new();
            for sol in &an.solutions {
                let res = lie_derivative_check(&sol.x, &sol.c, &kf, &sf)?;
                let scale = sol.x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                rep.check(
                    format!("lie_derivative_c={:.12}", sol.c),
                    res.max_abs() <= cfg.tol.unwrap_or(EXACT_TOL) * scale,
                    format!("{:e}", res.max_abs()),
                );
                sols.push(json!({ "c": sol.c, "x": sol.x, "closed": sol.closed }));
            }
            rep.detail("solutions", sols);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn hypersurface(rep: &mut Report, cfg: &VerifyConfig) -> Result<()> {
    let a = ShapeOperator::new(cfg.shape.clone().expect("validated"))?;
    let k: Rational = parse(&cfg.k)?;
    let n = a.n();
    for i in 0..=n {
        let (fast, forms) = (pullback_alpha(i, &a), pullback_alpha_by_forms(i, &a));
        rep.check_zero(format!("pullback_alpha_{i}"), &(fast - forms));
    }
    let sys = GriffithsSystem::new(n, Rational::from_count(1))?;
    let contact = pullback_form(a.matrix(), sys.dtheta())?;
    rep.check_zero("dtheta_pulls_back_to_zero", &contact.max_abs_coeff());
    let poly = weingarten_polynomial(&a);
    let sum: Vec<Rational> = (0..=n).map(|i| pullback_alpha(i, &a)).collect();
    rep.check("weingarten_identity", poly == sum, "0");
    let res = el_residuals(&a, &AmbientData::space_form(n, k.clone()))?;
    let forms = el_residuals_via_forms(&a, &k)?;
    rep.check("el_residuals_match_forms", res == forms, "0");
    rep.detail(
        "residuals",
        json!({
            "volume": res.volume.to_string(),
            "mean": res.mean.to_string(),
            "scal": res.scal.to_string(),
        }),
    );
    rep.detail(
        "stationary",
        json!({
            "volume": res.volume.is_zero(),
            "mean": res.mean.is_zero(),
            "scal": res.scal.is_zero(),
        }),
    );
    Ok(())
}

fn gwistor(rep: &mut Report, cfg: &VerifyConfig) -> Result<()> {
    let r = match cfg.curvature(&format!("csc:k={}", cfg.k))? {
        Curvature::Exact(r) => r,
        Curvature::Float(_) => bail!("gwistor diagnostics need an exact curvature provider"),
    };
    let d = coclosure_diagnostics(&r)?;
    let einstein = r.einstein_residual().is_zero();
    let csc = space_form_curvature(&r, 0.0).is_some();
    rep.check(
        "diagnostics_match_ground_truth",
        d.a0_minus_a2 == einstein && d.phi == einstein && d.a1_minus_a3 == csc,
        format!("einstein: {einstein}, csc: {csc}"),
    );
    rep.detail("coclosed", d);
    rep.detail("seed", cfg.seed);
    rep.check("special_lagrangian_identity", special_lagrangian_identity(), "0");
    let samples: Vec<RiemannTensor<Rational>> = (0..cfg.samples as u64)
        .map(|i| random_riemann(cfg.seed.wrapping_add(i), 3))
        .collect();
    let closed = never_closed_check(&samples)?;
    rep.check("never_closed", closed.passed(), closed.counterexamples.len().to_string());
    let est = comass_estimate(&gwistor_phi::<f64>(), cfg.comass)?;
    rep.check(
        "comass_phi_near_one",
        (0.95..=1.05).contains(&est.value),
        format!("{:.9}", est.value),
    );
    rep.detail(
        "comass",
        json!({
            "value": format!("{:.9}", est.value),
            "label": est.label,
            "converged": est.converged,
            "samples": est.samples,
        }),
    );
    Ok(())
}

/// Parses arguments, runs, writes the report; returns the process exit code
/// (0 all checks pass, 1 a check failed, 2 configuration error).
pub fn main_with<I, A>(args: I) -> ExitCode
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = VerifyConfig::from_cli(cli).and_then(|cfg| {
        let rep = run(&cfg)?;
        match &cfg.out {
            Some(path) => {
                std::fs::write(path, rep.to_json()).with_context(|| format!("writing {}", path.display()))?
            }
            None => print!("{}", rep.to_json()),
        }
        Ok(rep)
    });
    match outcome {
        Ok(rep) => {
            if let Some(summary) = &rep.summary {
                eprintln!("{summary}");
            }
            if rep.all_pass() {
                ExitCode::SUCCESS
            } else {
                for c in rep.checks.iter().filter(|c| !c.pass) {
                    eprintln!("FAILED {} (residual {})", c.name, c.residual);
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
