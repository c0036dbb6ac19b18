//! Command-line front end: parses verbs, dispatches to the numeric and
//! symbolic modules, and emits deterministic reports.

use crate::error::{Error, Result};
use crate::frequency::{
    ellipse_mean_frequency, ellipse_sandwich, ellipsoid_report, prop86_separation, uniform_sandwich,
};
use crate::jacobi::{first_conjugate_time, poincare_map, CurvatureProfile};
use crate::models::Model;
use crate::report::{Cell, Report};
use crate::ring::{round_critical_table, CoefficientSpec};
use crate::symplectic::{
    index_monotonicity_scan, is_plus_curve, plus_cone_member, sampling, star_consistency_check,
    star_derivative, Bump, PerturbationFamily, PerturbationKind, ScanVerdict, SymplecticElement,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Parser, Debug)]
#[command(
    name = "meanfreq",
    version,
    about = "Mean frequencies of closed geodesics: conjugate-point numerics and exact loop-homology level tables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OutputOpts {
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mean frequency of closed geodesics of a model
    Frequency {
        /// Inline model JSON, or a path to a JSON file
        #[arg(long)]
        model: String,
        /// Ellipse index pair "i,j" (ellipsoids; all pairs when omitted)
        #[arg(long)]
        ellipse: Option<String>,
        /// Number of periods for the density estimator
        #[arg(long, default_value_t = 50)]
        periods: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Three-axis ellipsoid frequency table with bound verdicts
    Ellipsoid {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 50)]
        periods: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Graded-family separation arithmetic
    Separation {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Round-sphere resonance report from the exact critical table
    Resonance {
        #[arg(long)]
        n: usize,
        /// Prime closed geodesic length
        #[arg(long, short = 'L')]
        length: f64,
        #[arg(long, default_value_t = 500)]
        max_degree: i64,
        /// integers | rationals | mod<p>  (e.g. mod5)
        #[arg(long, default_value = "integers")]
        coefficients: String,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Critical-level table export (class, degree, critical_level, dual_class)
    Ring {
        #[arg(long)]
        n: usize,
        #[arg(long, short = 'L')]
        length: f64,
        #[arg(long, default_value_t = 100)]
        max_degree: i64,
        #[arg(long, default_value = "integers")]
        coefficients: String,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Dichotomy scan of a one-sided perturbation family
    Perturb {
        /// Constant curvature of the base profile
        #[arg(long, default_value_t = 1.0)]
        base_curvature: f64,
        /// Period of the base profile
        #[arg(long, default_value_t = 2.0 * PI)]
        period: f64,
        #[arg(long, value_enum, default_value_t = FamilyKind::Curvature)]
        kind: FamilyKind,
        /// Comma-separated increasing grid starting at 0
        #[arg(long, default_value = "0,0.05,0.1,0.2")]
        s_grid: String,
        #[arg(long, default_value_t = 24)]
        periods: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Randomized property suites; exit code 0 iff all verdicts pass
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Finite-difference step for the star suite
        #[arg(long, default_value_t = 1e-4)]
        ds: f64,
        #[command(flatten)]
        output: OutputOpts,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum FamilyKind {
    Curvature,
    Length,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Suite {
    Sturm,
    Star,
    PlusCurve,
    Dichotomy,
}

/// Exit code for a failed run: 2 for invalid input, 3 for numerical
/// failures.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::ModelJson(_)
        | Error::InvalidModel(_)
        | Error::UnsupportedModel(_)
        | Error::InvalidArgument(_)
        | Error::Precondition(_)
        | Error::RingMismatch(_) => 2,
        Error::IntegrationFailure { .. }
        | Error::NotSymplectic { .. }
        | Error::NotInAlgebra { .. }
        | Error::NotPsd { .. }
        | Error::TableDepth(_) => 3,
    }
}

fn load_model(arg: &str) -> Result<Model> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| Error::InvalidModel(format!("cannot read model file {arg}: {e}")))?
    };
    Model::from_json(&text)
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidArgument(format!("expected \"i,j\", got {s}")));
    }
    let i = parts[0].trim().parse::<usize>();
    let j = parts[1].trim().parse::<usize>();
    match (i, j) {
        (Ok(i), Ok(j)) => Ok((i, j)),
        _ => Err(Error::InvalidArgument(format!("expected \"i,j\", got {s}"))),
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad grid value {p}")))
        })
        .collect()
}

fn parse_coefficients(s: &str) -> Result<CoefficientSpec> {
    match s {
        "integers" => Ok(CoefficientSpec::Integers),
        "rationals" => Ok(CoefficientSpec::Rationals),
        other => {
            if let Some(p) = other.strip_prefix("mod") {
                let p: u64 = p
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad coefficients {other}")))?;
                CoefficientSpec::mod_p(p)
            } else {
                Err(Error::InvalidArgument(format!(
                    "coefficients must be integers, rationals, or mod<p>; got {other}"
                )))
            }
        }
    }
}

/// Run a parsed command. Returns the report and whether every verdict in
/// it passed.
pub fn run(command: &Command) -> Result<(Report, bool)> {
    match command {
        Command::Frequency {
            model,
            ellipse,
            periods,
            ..
        } => run_frequency(model, ellipse.as_deref(), *periods),
        Command::Ellipsoid { model, periods, .. } => run_ellipsoid(model, *periods),
        Command::Separation { mu, lambda, m, .. } => run_separation(*mu, *lambda, *m),
        Command::Resonance {
            n,
            length,
            max_degree,
            coefficients,
            ..
        } => run_resonance(*n, *length, *max_degree, coefficients),
        Command::Ring {
            n,
            length,
            max_degree,
            coefficients,
            ..
        } => run_ring(*n, *length, *max_degree, coefficients),
        Command::Perturb {
            base_curvature,
            period,
            kind,
            s_grid,
            periods,
            ..
        } => run_perturb(*base_curvature, *period, *kind, s_grid, *periods),
        Command::Verify {
            suite,
            trials,
            seed,
            ds,
            ..
        } => run_verify(*suite, *trials, *seed, *ds),
    }
}

pub fn output_opts(command: &Command) -> &OutputOpts {
    match command {
        Command::Frequency { output, .. }
        | Command::Ellipsoid { output, .. }
        | Command::Separation { output, .. }
        | Command::Resonance { output, .. }
        | Command::Ring { output, .. }
        | Command::Perturb { output, .. }
        | Command::Verify { output, .. } => output,
    }
}

fn run_frequency(model: &str, ellipse: Option<&str>, periods: usize) -> Result<(Report, bool)> {
    let model = load_model(model)?;
    let mut report = Report::new();
    report.tolerance("convergence_rtol", crate::frequency::CONVERGENCE_RTOL);
    let mut all_ok = true;
    match model {
        Model::Ellipsoid(e) => {
            let pairs: Vec<(usize, usize)> = match ellipse {
                Some(s) => vec![parse_pair(s)?],
                None => e.short_geodesics().iter().map(|g| g.pair).collect(),
            };
            for pair in pairs {
                let f = ellipse_mean_frequency(&e, pair, periods)?;
                let b = ellipse_sandwich(&e, pair)?;
                let ok = b.contains(f.estimate.mean_frequency)
                    || (!b.strict
                        && (f.estimate.mean_frequency - b.lower).abs() < 1e-3 * b.lower.max(1e-12));
                all_ok &= ok;
                report.push_row(vec![
                    ("geodesic", Cell::Str(format!("{},{}", pair.0, pair.1))),
                    ("length", f.length.into()),
                    ("alpha_bar", f.estimate.mean_frequency.into()),
                    ("average_index", f.estimate.average_index.into()),
                    ("lower", b.lower.into()),
                    ("upper", b.upper.into()),
                    ("converged", f.estimate.converged.into()),
                    ("error_estimate", f.estimate.error_estimate.into()),
                    ("verdict", ok.into()),
                ]);
            }
        }
        Model::Round(r) => {
            let data = r.reference_data();
            report.push_row(vec![
                ("geodesic", Cell::Str("all".into())),
                ("length", data.prime_length.unwrap().into()),
                ("alpha_bar", data.mean_frequency.into()),
                ("lower", data.mean_frequency.into()),
                ("upper", data.mean_frequency.into()),
                ("verdict", true.into()),
            ]);
        }
        Model::Katok(k) => {
            let data = k.reference_data();
            let b = uniform_sandwich(k.dim(), 1.0, 1.0)?;
            let ok = (data.mean_frequency - b.lower).abs() < 1e-12;
            all_ok &= ok;
            report.push_row(vec![
                ("geodesic", Cell::Str("all".into())),
                ("count", data.geodesic_count.unwrap().into()),
                ("alpha_bar", data.mean_frequency.into()),
                ("lower", b.lower.into()),
                ("upper", b.upper.into()),
                (
                    "rational_parameter_warning",
                    data.rational_parameter_warning.into(),
                ),
                ("verdict", ok.into()),
            ]);
        }
    }
    Ok((report, all_ok))
}

fn run_ellipsoid(model: &str, periods: usize) -> Result<(Report, bool)> {
    let model = load_model(model)?;
    let Model::Ellipsoid(e) = model else {
        return Err(Error::InvalidModel(
            "the ellipsoid verb needs an ellipsoid model".into(),
        ));
    };
    let rep = ellipsoid_report(&e, periods)?;
    let mut report = Report::new();
    report.tolerance("convergence_rtol", crate::frequency::CONVERGENCE_RTOL);
    report.tolerance("split_check", crate::frequency::SPLIT_CHECK_TOL);
    for (i, f) in rep.frequencies.iter().enumerate() {
        let b = &rep.bounds[i];
        report.push_row(vec![
            ("geodesic", Cell::Str(format!("{},{}", f.pair.0, f.pair.1))),
            ("length", f.length.into()),
            ("alpha_bar", f.estimate.mean_frequency.into()),
            ("lower", b.lower.into()),
            ("upper", b.upper.into()),
            ("strict", b.strict.into()),
            ("verdict", rep.bound_verdicts[i].into()),
        ]);
    }
    report.meta("chain_ok", rep.chain_ok);
    report.meta("alpha1_lt_alpha3", rep.alpha1_lt_alpha3);
    report.meta("all_distinct", rep.all_distinct);
    let ok = rep.bound_verdicts.iter().all(|v| *v) && rep.chain_ok;
    Ok((report, ok))
}

fn run_separation(mu: f64, lambda: f64, m: usize) -> Result<(Report, bool)> {
    let rep = prop86_separation(mu, m, lambda)?;
    let mut report = Report::new();
    for (i, b) in rep.intervals.iter().enumerate() {
        report.push_row(vec![
            ("geodesic", Cell::Int(i as i64 + 1)),
            ("lower", b.lower.into()),
            ("upper", b.upper.into()),
        ]);
    }
    report.meta("threshold", rep.threshold);
    report.meta("lambda_below_threshold", rep.lambda_below_threshold);
    report.meta("separated", rep.separated);
    Ok((report, rep.separated || !rep.lambda_below_threshold))
}

fn run_resonance(
    n: usize,
    length: f64,
    max_degree: i64,
    coefficients: &str,
) -> Result<(Report, bool)> {
    let spec = parse_coefficients(coefficients)?;
    let table = round_critical_table(n, length, max_degree, spec)?;
    let rep = table.resonance_report()?;
    let mut report = Report::new();
    report.push_row(vec![
        ("alpha_bar", rep.alpha_bar.into()),
        ("mu_plus", rep.mu_plus.into()),
        ("mu_minus", rep.mu_minus.into()),
        ("max_deviation", rep.max_deviation.into()),
        ("bound", rep.bound.into()),
        ("verdict", rep.verdict.into()),
    ]);
    report.meta("n", n);
    report.meta("max_degree", max_degree);
    report.meta("worst_class", rep.worst_class.as_str());
    Ok((report, rep.verdict))
}

fn run_ring(n: usize, length: f64, max_degree: i64, coefficients: &str) -> Result<(Report, bool)> {
    let spec = parse_coefficients(coefficients)?;
    let table = round_critical_table(n, length, max_degree, spec)?;
    let mut report = Report::new();
    report.set_column_order(&["class", "degree", "critical_level", "dual_class"]);
    for (class, degree, level, dual) in table.csv_rows() {
        report.push_row(vec![
            ("class", Cell::Str(class)),
            ("degree", Cell::Int(degree)),
            ("critical_level", Cell::Num(level)),
            ("dual_class", Cell::Str(dual)),
        ]);
    }
    report.meta("n", n);
    report.meta("length", length);
    Ok((report, true))
}

fn run_perturb(
    base_curvature: f64,
    period: f64,
    kind: FamilyKind,
    s_grid: &str,
    periods: usize,
) -> Result<(Report, bool)> {
    let grid = parse_grid(s_grid)?;
    let base = CurvatureProfile::constant_scalar(base_curvature, period);
    let kind = match kind {
        FamilyKind::Curvature => PerturbationKind::CurvatureBump,
        FamilyKind::Length => PerturbationKind::LengthBump,
    };
    let family = PerturbationFamily::centered(base, kind)?;
    let scan = index_monotonicity_scan(&family, &grid, periods)?;
    let mut report = Report::new();
    report.tolerance("monotonicity", scan.tolerance);
    for p in &scan.points {
        report.push_row(vec![
            ("s", p.s.into()),
            ("alpha_bar", p.estimate.mean_frequency.into()),
            ("average_index", p.estimate.average_index.into()),
            ("unit_circle", p.unit_circle_flag.into()),
            ("converged", p.estimate.converged.into()),
        ]);
    }
    let verdict_name = match scan.verdict {
        ScanVerdict::IndexIncreasing => "index-increasing",
        ScanVerdict::HyperbolicWindow => "hyperbolic-window",
        ScanVerdict::Inconclusive => "inconclusive",
    };
    report.meta("verdict", verdict_name);
    Ok((report, scan.verdict != ScanVerdict::Inconclusive))
}

/// Random smooth positive periodic curvature with the given floor.
fn random_periodic_curvature<R: Rng>(
    rng: &mut R,
    period: f64,
    floor: f64,
) -> (
    impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    f64,
    f64,
) {
    let c0 = rng.gen_range(floor + 0.4..floor + 1.4);
    let budget = (c0 - floor) * 0.8;
    let a1 = rng.gen_range(-budget / 2.0..budget / 2.0);
    let a2 = rng.gen_range(-budget / 4.0..budget / 4.0);
    let p1 = rng.gen_range(0.0..2.0 * PI);
    let p2 = rng.gen_range(0.0..2.0 * PI);
    let w = 2.0 * PI / period;
    let f = move |t: f64| c0 + a1 * (w * t + p1).cos() + a2 * (2.0 * w * t + p2).cos();
    let min = c0 - a1.abs() - a2.abs();
    let max = c0 + a1.abs() + a2.abs();
    (f, min, max)
}

fn run_verify(suite: Suite, trials: usize, seed: u64, ds: f64) -> Result<(Report, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new();
    report.meta("seed", seed as i64);
    report.meta("trials", trials);
    let mut all_ok = true;
    match suite {
        Suite::Sturm => {
            for trial in 0..trials {
                let period = rng.gen_range(3.0..8.0);
                let (k1, k1_min, _) = random_periodic_curvature(&mut rng, period, 0.2);
                let gap0 = rng.gen_range(0.05..0.6);
                let gap1 = rng.gen_range(0.0..gap0 * 0.8);
                let ph = rng.gen_range(0.0..2.0 * PI);
                let w = 2.0 * PI / period;
                let k1c = k1.clone();
                let k2 = move |t: f64| k1c(t) + gap0 + gap1 * (w * t + ph).cos();
                let p1 = CurvatureProfile::scalar(period, k1)?;
                let p2 = CurvatureProfile::scalar(period, k2)?;
                let horizon = 1.2 * PI / k1_min.sqrt() + period;
                let t1 = first_conjugate_time(&p1, horizon)?.ok_or_else(|| {
                    Error::InvalidArgument("missing first conjugate point".into())
                })?;
                let t2 = first_conjugate_time(&p2, horizon)?.ok_or_else(|| {
                    Error::InvalidArgument("missing first conjugate point".into())
                })?;
                let ok = t1 >= t2 - 1e-9;
                all_ok &= ok;
                report.push_row(vec![
                    ("trial", Cell::Int(trial as i64)),
                    ("t1_smaller_curvature", t1.into()),
                    ("t1_larger_curvature", t2.into()),
                    ("ok", ok.into()),
                ]);
            }
        }
        Suite::Star => {
            for trial in 0..trials {
                let period = rng.gen_range(1.5..7.0);
                let flat = rng.gen_bool(0.2);
                let base = if flat {
                    CurvatureProfile::constant_scalar(0.0, period)
                } else {
                    let (k, _, _) = random_periodic_curvature(&mut rng, period, -0.5);
                    CurvatureProfile::scalar(period, k)?
                };
                let eta = period * rng.gen_range(0.03..0.1);
                let center = rng.gen_range(2.5 * eta..period - 2.5 * eta);
                let family = PerturbationFamily::new(
                    base,
                    Bump::new(center, eta)?,
                    PerturbationKind::CurvatureBump,
                )?;
                let err = star_consistency_check(&family, ds)?;
                let star = star_derivative(&family.base, family.tau())?;
                let sym = crate::linalg::asymmetry(&star.form);
                let ok = err <= 1e-4 && sym <= 1e-10 && star.min_eigenvalue > 0.0;
                all_ok &= ok;
                report.push_row(vec![
                    ("trial", Cell::Int(trial as i64)),
                    ("fd_error", err.into()),
                    ("asymmetry", sym.into()),
                    ("min_eigenvalue", star.min_eigenvalue.into()),
                    ("ok", ok.into()),
                ]);
            }
        }
        Suite::PlusCurve => {
            for trial in 0..trials {
                let d = 1 + rng.gen_range(0..3usize);
                let a = sampling::random_cone_element(&mut rng, d, 1.0);
                let s = sampling::random_symplectic(&mut rng, d, 0.4);
                let conj = &s * &a * s.clone().try_inverse().unwrap();
                let cone_ok = plus_cone_member(&SymplecticElement::algebra(conj)?)?;

                let period = rng.gen_range(3.0..7.0);
                let (k, _, _) = random_periodic_curvature(&mut rng, period, 0.1);
                let base = CurvatureProfile::scalar(period, k)?;
                let family = PerturbationFamily::centered(base, PerturbationKind::CurvatureBump)?;
                let params: Vec<f64> = (0..5).map(|i| 0.01 * i as f64).collect();
                let samples: Vec<SymplecticElement> = params
                    .iter()
                    .map(|&s| {
                        let p = family.at(s)?;
                        SymplecticElement::group(poincare_map(&p)?.matrix)
                    })
                    .collect::<Result<_>>()?;
                let curve_ok = is_plus_curve(&params, &samples)?;
                let ok = cone_ok && curve_ok;
                all_ok &= ok;
                report.push_row(vec![
                    ("trial", Cell::Int(trial as i64)),
                    ("cone_conjugation_ok", cone_ok.into()),
                    ("bump_plus_curve_ok", curve_ok.into()),
                    ("ok", ok.into()),
                ]);
            }
        }
        Suite::Dichotomy => {
            let cases: Vec<(&str, CurvatureProfile)> = vec![
                ("round", CurvatureProfile::constant_scalar(1.0, 2.0 * PI)),
                ("hyperbolic", CurvatureProfile::constant_scalar(-1.0, 2.0)),
                (
                    "wavy",
                    CurvatureProfile::scalar(2.0 * PI, |t| 1.0 + 0.4 * t.sin())?,
                ),
            ];
            for (name, base) in cases {
                let family = PerturbationFamily::centered(base, PerturbationKind::CurvatureBump)?;
                let scan = index_monotonicity_scan(&family, &[0.0, 0.05, 0.1, 0.2], 24)?;
                let verdict = match scan.verdict {
                    ScanVerdict::IndexIncreasing => "index-increasing",
                    ScanVerdict::HyperbolicWindow => "hyperbolic-window",
                    ScanVerdict::Inconclusive => "inconclusive",
                };
                let ok = scan.verdict != ScanVerdict::Inconclusive;
                all_ok &= ok;
                report.push_row(vec![
                    ("case", Cell::Str(name.into())),
                    ("verdict", Cell::Str(verdict.into())),
                    ("ok", ok.into()),
                ]);
            }
        }
    }
    report.meta("pass", all_ok);
    Ok((report, all_ok))
}
