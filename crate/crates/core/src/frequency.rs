//! Mean-frequency estimation from conjugate-point density, and the
//! curvature sandwich bounds that pin every estimate.

use crate::error::{Error, Result};
use crate::jacobi::{conjugate_points, CurvatureProfile};
use crate::models::{EllipsoidModel, PlaneSection};
use crate::numeric::gl7;
use std::f64::consts::PI;
use std::sync::Arc;

/// Relative agreement between successive halved estimates that declares
/// convergence.
pub const CONVERGENCE_RTOL: f64 = 1e-3;

/// Tolerance for the section-sum vs block-diagonal cross-check.
pub const SPLIT_CHECK_TOL: f64 = 2e-3;

/// Density estimate of the mean frequency of a closed geodesic.
#[derive(Debug, Clone)]
pub struct FrequencyEstimate {
    /// Conjugate points per unit arclength.
    pub mean_frequency: f64,
    /// `mean_frequency * period` (the average index per iterate).
    pub average_index: f64,
    pub periods_used: usize,
    /// `(m, count(mL)/(mL))` at m = 4, 8, 16, ... and the final m.
    pub convergence_history: Vec<(usize, f64)>,
    /// Absolute difference of the last two history entries.
    pub error_estimate: f64,
    pub converged: bool,
}

/// Mean frequency of a profile over `max_periods` periods: conjugate
/// points per unit length, normalized at the last conjugate point inside
/// each horizon (`k / t_k`).
pub fn mean_frequency(profile: &CurvatureProfile, max_periods: usize) -> Result<FrequencyEstimate> {
    if max_periods < 4 {
        return Err(Error::InvalidArgument(format!(
            "mean frequency needs at least 4 periods, got {max_periods}"
        )));
    }
    let l = profile.period();
    let report = conjugate_points(profile, max_periods as f64 * l)?;
    let mut ms = Vec::new();
    let mut m = 4;
    while m < max_periods {
        ms.push(m);
        m *= 2;
    }
    ms.push(max_periods);
    let history: Vec<(usize, f64)> = ms
        .iter()
        .map(|&m| (m, report.density(m as f64 * l)))
        .collect();
    Ok(estimate_from_history(history, l))
}

fn estimate_from_report(
    report: &crate::jacobi::ConjugateReport,
    l: f64,
    max_periods: usize,
) -> FrequencyEstimate {
    let mut ms = Vec::new();
    let mut m = 4;
    while m < max_periods {
        ms.push(m);
        m *= 2;
    }
    ms.push(max_periods);
    let history: Vec<(usize, f64)> = ms
        .iter()
        .map(|&m| (m, report.density(m as f64 * l)))
        .collect();
    estimate_from_history(history, l)
}

fn estimate_from_history(history: Vec<(usize, f64)>, period: f64) -> FrequencyEstimate {
    let last = history.last().map(|v| v.1).unwrap_or(0.0);
    let prev = if history.len() >= 2 {
        history[history.len() - 2].1
    } else {
        last
    };
    let error_estimate = (last - prev).abs();
    let converged = error_estimate <= CONVERGENCE_RTOL * last.abs().max(1e-12);
    FrequencyEstimate {
        mean_frequency: last,
        average_index: last * period,
        periods_used: history.last().map(|v| v.0).unwrap_or(0),
        convergence_history: history,
        error_estimate,
        converged,
    }
}

/// Monotone arclength map of the ellipse `(a cos t, b sin t)`:
/// cumulative quadrature over a fine grid plus monotone cubic inversion
/// with a Newton polish against the exact speed.
pub struct ArclengthMap {
    a: f64,
    b: f64,
    ts: Vec<f64>,
    us: Vec<f64>,
    total: f64,
}

impl ArclengthMap {
    pub fn new(a: f64, b: f64) -> Self {
        let n = 2048;
        let mut ts = Vec::with_capacity(n + 1);
        let mut us = Vec::with_capacity(n + 1);
        let speed = |t: f64| {
            let (s, c) = t.sin_cos();
            (a * a * s * s + b * b * c * c).sqrt()
        };
        let mut acc = 0.0;
        ts.push(0.0);
        us.push(0.0);
        for i in 1..=n {
            let t0 = 2.0 * PI * (i - 1) as f64 / n as f64;
            let t1 = 2.0 * PI * i as f64 / n as f64;
            acc += gl7(speed, t0, t1);
            ts.push(t1);
            us.push(acc);
        }
        ArclengthMap {
            a,
            b,
            ts,
            us,
            total: acc,
        }
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    fn speed(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        (self.a * self.a * s * s + self.b * self.b * c * c).sqrt()
    }

    /// Ellipse parameter at arclength `u` from the vertex `(a, 0)`.
    pub fn parameter_at(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, self.total);
        let i = match self.us.binary_search_by(|x| x.partial_cmp(&u).unwrap()) {
            Ok(i) => i.min(self.ts.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.ts.len() - 2),
        };
        let (u0, u1) = (self.us[i], self.us[i + 1]);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = u1 - u0;
        let s = ((u - u0) / h).clamp(0.0, 1.0);
        let d0 = 1.0 / self.speed(t0);
        let d1 = 1.0 / self.speed(t1);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let mut t = h00 * t0 + h10 * h * d0 + h01 * t1 + h11 * h * d1;
        for _ in 0..2 {
            let arc = u0 + gl7(|x| self.speed(x), t0, t);
            t -= (arc - u) / self.speed(t);
        }
        t.clamp(t0 - 1e-12, t1 + 1e-12)
    }
}

/// Scalar curvature profile of a totally geodesic section, parametrized
/// by arclength of its distinguished ellipse.
pub fn section_profile(section: &PlaneSection) -> Result<CurvatureProfile> {
    let map = Arc::new(ArclengthMap::new(section.a, section.b));
    let sec = *section;
    let total = map.total();
    CurvatureProfile::scalar(total, move |u| sec.curvature(map.parameter_at(u)))
}

/// Mean frequency of one short closed geodesic of an ellipsoid, as a sum
/// of surface-section estimates. For `n <= 4` the sum is cross-checked
/// against a full block-diagonal profile run.
#[derive(Debug, Clone)]
pub struct EllipseFrequency {
    pub pair: (usize, usize),
    pub length: f64,
    pub estimate: FrequencyEstimate,
    pub per_section: Vec<FrequencyEstimate>,
    /// Count-density difference between the block-diagonal run and the
    /// section union at the shared horizon, when the cross-check ran.
    pub cross_check_diff: Option<f64>,
}

pub fn ellipse_mean_frequency(
    model: &EllipsoidModel,
    pair: (usize, usize),
    max_periods: usize,
) -> Result<EllipseFrequency> {
    let sections = model.section_decomposition(pair)?;
    let profiles: Vec<CurvatureProfile> = sections
        .iter()
        .map(section_profile)
        .collect::<Result<_>>()?;
    let length = profiles[0].period();
    let horizon = max_periods as f64 * length;
    let mut per_section = Vec::with_capacity(sections.len());
    let mut reports = Vec::with_capacity(sections.len());
    for p in &profiles {
        let report = conjugate_points(p, horizon)?;
        per_section.push(estimate_from_report(&report, length, max_periods));
        reports.push(report);
    }
    // sum the histories entry-wise
    let ms: Vec<usize> = per_section[0]
        .convergence_history
        .iter()
        .map(|(m, _)| *m)
        .collect();
    let history: Vec<(usize, f64)> = ms
        .iter()
        .enumerate()
        .map(|(idx, &m)| {
            (
                m,
                per_section
                    .iter()
                    .map(|e| e.convergence_history[idx].1)
                    .sum(),
            )
        })
        .collect();
    let estimate = estimate_from_history(history, length);

    // The index form of the geodesic splits over the parallel coordinate
    // directions, so the conjugate points of the block profile must be
    // the multiset union of the section conjugate points. Compare the
    // count densities at the shared horizon: one missed root shows up as
    // 1/horizon.
    let cross_check_diff = if model.dim() <= 4 {
        let block = CurvatureProfile::block_diagonal(&profiles)?;
        let block_report = conjugate_points(&block, horizon)?;
        let section_count: usize = reports.iter().map(|r| r.count(horizon)).sum();
        let diff = (block_report.count(horizon) as f64 - section_count as f64).abs() / horizon;
        Some(diff)
    } else {
        None
    };

    Ok(EllipseFrequency {
        pair,
        length,
        estimate,
        per_section,
        cross_check_diff,
    })
}

/// Where a bound interval comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    /// Uniform curvature pinch `delta^2 <= K <= Delta^2`.
    Sandwich,
    /// Per-direction pinches summed over a parallel frame.
    Holonomy,
    /// Three-axis ellipsoid chain bounds.
    Prop85,
    /// Graded-ellipsoid separation bounds.
    Prop86,
}

/// A lower/upper bound on a mean frequency.
#[derive(Debug, Clone, Copy)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
    pub source: BoundSource,
    /// Whether the bounds are strict (non-constant curvature).
    pub strict: bool,
}

impl BoundInterval {
    pub fn contains(&self, x: f64) -> bool {
        if self.strict {
            self.lower < x && x < self.upper
        } else {
            self.lower <= x && x <= self.upper
        }
    }
}

/// Interval `[(sum delta_i)/pi, (sum Delta_i)/pi]` from per-direction
/// curvature pinches `delta_i^2 <= K_i <= Delta_i^2`.
pub fn curvature_sandwich(per_direction: &[(f64, f64)]) -> Result<BoundInterval> {
    if per_direction.is_empty() {
        return Err(Error::InvalidArgument("need at least one direction".into()));
    }
    for &(lo, hi) in per_direction {
        if !(lo > 0.0) {
            return Err(Error::Precondition(format!(
                "positive curvature hypothesis fails: delta = {lo}"
            )));
        }
        if lo > hi {
            return Err(Error::InvalidArgument(format!(
                "direction bounds out of order: ({lo}, {hi})"
            )));
        }
    }
    let lower: f64 = per_direction.iter().map(|p| p.0).sum::<f64>() / PI;
    let upper: f64 = per_direction.iter().map(|p| p.1).sum::<f64>() / PI;
    let strict = per_direction.iter().any(|p| p.0 < p.1);
    Ok(BoundInterval {
        lower,
        upper,
        source: if per_direction.len() == 1 || !strict {
            BoundSource::Sandwich
        } else {
            BoundSource::Holonomy
        },
        strict,
    })
}

/// Uniform pinch `delta^2 <= K <= Delta^2` in dimension `n`.
pub fn uniform_sandwich(n: usize, delta: f64, delta_cap: f64) -> Result<BoundInterval> {
    let dirs = vec![(delta, delta_cap); n - 1];
    let mut b = curvature_sandwich(&dirs)?;
    b.source = BoundSource::Sandwich;
    Ok(b)
}

/// The curvature-sandwich interval of one short geodesic of an ellipsoid,
/// from the closed section curvature bounds.
pub fn ellipse_sandwich(model: &EllipsoidModel, pair: (usize, usize)) -> Result<BoundInterval> {
    let sections = model.section_decomposition(pair)?;
    let dirs: Vec<(f64, f64)> = sections
        .iter()
        .map(|s| {
            let (lo, hi) = s.curvature_bounds();
            (lo.sqrt(), hi.sqrt())
        })
        .collect();
    let mut b = curvature_sandwich(&dirs)?;
    b.source = if model.dim() == 2 {
        BoundSource::Prop85
    } else {
        BoundSource::Prop86
    };
    b.strict = dirs.iter().any(|d| d.1 - d.0 > 1e-14 * d.1);
    Ok(b)
}

/// Full three-axis ellipsoid report: the three short geodesics, their
/// computed mean frequencies, the chain bounds, and distinctness.
#[derive(Debug, Clone)]
pub struct EllipsoidReport {
    /// Frequencies of the ellipses (0,1), (0,2), (1,2), in that order.
    pub frequencies: [EllipseFrequency; 3],
    pub bounds: [BoundInterval; 3],
    pub bound_verdicts: [bool; 3],
    /// The chain `alpha_1 < a1/(pi a0 a2) < alpha_3`.
    pub chain_ok: bool,
    pub alpha1_lt_alpha3: bool,
    /// Pairwise-distinct verdict at the estimator tolerance.
    pub all_distinct: bool,
}

pub fn ellipsoid_report(model: &EllipsoidModel, max_periods: usize) -> Result<EllipsoidReport> {
    if model.dim() != 2 {
        return Err(Error::UnsupportedModel(
            "the three-geodesic report is for 3-axis ellipsoids".into(),
        ));
    }
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut freqs = Vec::with_capacity(3);
    let mut bounds = Vec::with_capacity(3);
    for &p in &pairs {
        freqs.push(ellipse_mean_frequency(model, p, max_periods)?);
        bounds.push(ellipse_sandwich(model, p)?);
    }
    let a = [
        freqs[0].estimate.mean_frequency,
        freqs[1].estimate.mean_frequency,
        freqs[2].estimate.mean_frequency,
    ];
    let bound_verdicts = [
        verdict(&bounds[0], a[0]),
        verdict(&bounds[1], a[1]),
        verdict(&bounds[2], a[2]),
    ];
    let axes = model.axes();
    let mid = axes[1] / (PI * axes[0] * axes[2]);
    let chain_ok = bound_verdicts.iter().all(|v| *v)
        && (a[0] < mid || !bounds[0].strict)
        && (a[2] > mid || !bounds[2].strict);
    let tol = distinctness_tolerance(&freqs);
    let alpha1_lt_alpha3 = a[0] + tol < a[2];
    let all_distinct =
        (a[0] - a[1]).abs() > tol && (a[0] - a[2]).abs() > tol && (a[1] - a[2]).abs() > tol;
    let freqs: [EllipseFrequency; 3] = freqs.try_into().map_err(|_| unreachable()).unwrap();
    let bounds: [BoundInterval; 3] = bounds.try_into().map_err(|_| unreachable()).unwrap();
    Ok(EllipsoidReport {
        frequencies: freqs,
        bounds,
        bound_verdicts,
        chain_ok,
        alpha1_lt_alpha3,
        all_distinct,
    })
}

fn unreachable() -> Error {
    Error::InvalidArgument("internal: fixed-size conversion".into())
}

fn verdict(bound: &BoundInterval, value: f64) -> bool {
    if bound.strict {
        bound.contains(value)
    } else {
        // degenerate axes collapse bounds to equalities
        value >= bound.lower - 1e-6 && value <= bound.upper + 1e-6
    }
}

fn distinctness_tolerance(freqs: &[EllipseFrequency]) -> f64 {
    let noise = freqs
        .iter()
        .map(|f| f.estimate.error_estimate)
        .fold(0.0, f64::max);
    (2.0 * noise).max(1e-4)
}

/// Separation arithmetic for the graded ellipsoid family: per-geodesic
/// bound intervals `((1+lambda)/lambda * S_i, (1+lambda)*lambda * S_i)`
/// with `S_i = sum_{0 <= k <= m, k != i} mu^{-k}`, and the sufficient
/// threshold `lambda < 1 + (mu-1)^2 mu^{-m-2}`.
#[derive(Debug, Clone)]
pub struct Prop86Report {
    pub mu: f64,
    pub lambda: f64,
    pub m: usize,
    pub threshold: f64,
    pub lambda_below_threshold: bool,
    pub intervals: Vec<BoundInterval>,
    /// `upper(i) < lower(i+1)` for all `i = 1..m-1`.
    pub separated: bool,
}

pub fn prop86_separation(mu: f64, m: usize, lambda: f64) -> Result<Prop86Report> {
    if !(mu > 1.0) || !(lambda > 1.0) {
        return Err(Error::InvalidArgument(
            "separation arithmetic needs mu > 1 and lambda > 1".into(),
        ));
    }
    if m < 2 {
        return Err(Error::InvalidArgument("need m >= 2".into()));
    }
    let threshold = 1.0 + (mu - 1.0) * (mu - 1.0) * mu.powi(-(m as i32) - 2);
    let s = |i: usize| -> f64 {
        (0..=m)
            .filter(|k| *k != i)
            .map(|k| mu.powi(-(k as i32)))
            .sum()
    };
    let intervals: Vec<BoundInterval> = (1..=m)
        .map(|i| BoundInterval {
            lower: (1.0 + lambda) / lambda * s(i),
            upper: (1.0 + lambda) * lambda * s(i),
            source: BoundSource::Prop86,
            strict: true,
        })
        .collect();
    let separated = intervals.windows(2).all(|w| w[0].upper < w[1].lower);
    Ok(Prop86Report {
        mu,
        lambda,
        m,
        threshold,
        lambda_below_threshold: lambda < threshold,
        intervals,
        separated,
    })
}

/// Two-sided iterate-index verdict for
/// `L*alpha_bar - (n-1) <= ind <= L*alpha_bar + (n-1) - null`.
#[derive(Debug, Clone, Copy)]
pub struct IterateIndexCheck {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub lower_slack: f64,
    pub upper_slack: f64,
}

pub fn iterate_index_check(
    length: f64,
    alpha_bar: f64,
    ind: i64,
    null: i64,
    n: usize,
) -> IterateIndexCheck {
    let la = length * alpha_bar;
    let nm1 = (n - 1) as f64;
    let lower_slack = ind as f64 - (la - nm1);
    let upper_slack = (la + nm1 - null as f64) - ind as f64;
    IterateIndexCheck {
        lower_ok: lower_slack >= -1e-9,
        upper_ok: upper_slack >= -1e-9,
        lower_slack,
        upper_slack,
    }
}
