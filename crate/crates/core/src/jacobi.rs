//! Linearized geodesic flow along a closed geodesic: fundamental solutions
//! of the Jacobi equation, conjugate points with multiplicities, and
//! Poincare return maps.
//!
//! The state is the symplectic fundamental solution `X(t)` of
//! `X' = A(t) X`, `A = [[0, I], [-R(t), 0]]`, where `R(t)` is the matrix of
//! sectional curvatures in a parallel orthonormal frame. Profiles are
//! periodic, so for spans beyond one period the solution is composed from
//! one densely-stored period and monodromy powers; this keeps the phase
//! error over many iterates at the one-period level.

use crate::error::{Error, Result};
use crate::linalg::{orthogonality_defect, singular_values, symplectic_defect};
use crate::numeric::{bisect, golden_min};
use crate::ode::{integrate_dense, DenseSolution};
use nalgebra::DMatrix;
use std::sync::Arc;

/// Default per-step error target of the integrator. Tighter than the
/// 1e-11 contract so that monodromy composition over ~100 periods stays
/// well below the conjugate-point resolution.
pub const DEFAULT_RTOL: f64 = 1e-12;
pub const DEFAULT_ATOL: f64 = 1e-13;

/// Width of the final bracket in conjugate-point refinement.
pub const REFINE_TOL: f64 = 1e-12;

/// Relative singular-value threshold for conjugate-point multiplicity.
pub const MULTIPLICITY_RTOL: f64 = 1e-7;

/// Two refined roots closer than this are reported as one (with a warning).
pub const MERGE_TOL: f64 = 1e-8;

/// Tolerance for |lambda| = 1 in spectrum classification.
pub const UNIT_CIRCLE_TOL: f64 = 1e-8;

type CurvatureFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// Periodic curvature matrix `R(t)` along a closed geodesic in a parallel
/// orthonormal frame, together with the frame holonomy `Q`.
#[derive(Clone)]
pub struct CurvatureProfile {
    dim: usize,
    period: f64,
    curvature: CurvatureFn,
    holonomy: DMatrix<f64>,
}

impl std::fmt::Debug for CurvatureProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurvatureProfile")
            .field("dim", &self.dim)
            .field("period", &self.period)
            .finish()
    }
}

impl CurvatureProfile {
    /// Build a profile from `R` on `[0, period]` and the holonomy `Q`
    /// (`d x d` orthogonal). Checks symmetry of `R` and periodic
    /// consistency `R(period) = Q R(0) Q^T`.
    pub fn new<F>(dim: usize, period: f64, holonomy: DMatrix<f64>, curvature: F) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "fiber dimension must be >= 1".into(),
            ));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "period must be positive, got {period}"
            )));
        }
        if holonomy.nrows() != dim || holonomy.ncols() != dim {
            return Err(Error::InvalidArgument("holonomy must be d x d".into()));
        }
        if orthogonality_defect(&holonomy) > 1e-9 {
            return Err(Error::InvalidArgument("holonomy must be orthogonal".into()));
        }
        let profile = Self {
            dim,
            period,
            curvature: Arc::new(curvature),
            holonomy,
        };
        for i in 0..=16 {
            let t = period * i as f64 / 16.0;
            let r = (profile.curvature)(t);
            if r.nrows() != dim || r.ncols() != dim {
                return Err(Error::InvalidArgument(
                    "curvature matrix has wrong shape".into(),
                ));
            }
            if crate::linalg::asymmetry(&r) > 1e-12 * (1.0 + r.abs().max()) {
                return Err(Error::InvalidArgument(format!(
                    "curvature matrix not symmetric at t = {t}"
                )));
            }
        }
        let r_end = (profile.curvature)(period);
        let r_wrap = &profile.holonomy * (profile.curvature)(0.0) * profile.holonomy.transpose();
        if (&r_end - &r_wrap).abs().max() > 1e-9 * (1.0 + r_end.abs().max()) {
            return Err(Error::InvalidArgument(
                "curvature does not satisfy the periodic holonomy consistency".into(),
            ));
        }
        Ok(profile)
    }

    /// Scalar profile (`d = 1`) with trivial holonomy.
    pub fn scalar<F>(period: f64, k: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(1, period, DMatrix::identity(1, 1), move |t| {
            DMatrix::from_element(1, 1, k(t))
        })
    }

    /// Constant scalar curvature profile.
    pub fn constant_scalar(k: f64, period: f64) -> Self {
        Self::scalar(period, move |_| k).unwrap()
    }

    /// Constant matrix curvature profile with trivial holonomy.
    pub fn constant_matrix(r: DMatrix<f64>, period: f64) -> Result<Self> {
        let dim = r.nrows();
        Self::new(dim, period, DMatrix::identity(dim, dim), move |_| r.clone())
    }

    /// Block-diagonal combination of profiles with equal periods and
    /// trivial holonomies.
    pub fn block_diagonal(parts: &[CurvatureProfile]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("need at least one block".into()));
        }
        let period = parts[0].period;
        for p in parts {
            if (p.period - period).abs() > 1e-9 * period {
                return Err(Error::InvalidArgument("block periods differ".into()));
            }
            if !p.has_trivial_holonomy() {
                return Err(Error::InvalidArgument(
                    "block-diagonal profiles need trivial holonomies".into(),
                ));
            }
        }
        let dims: Vec<usize> = parts.iter().map(|p| p.dim).collect();
        let total: usize = dims.iter().sum();
        let fns: Vec<CurvatureFn> = parts.iter().map(|p| p.curvature.clone()).collect();
        Self::new(total, period, DMatrix::identity(total, total), move |t| {
            let mut r = DMatrix::zeros(total, total);
            let mut off = 0;
            for (f, d) in fns.iter().zip(dims.iter()) {
                r.view_mut((off, off), (*d, *d)).copy_from(&f(t));
                off += d;
            }
            r
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn holonomy(&self) -> &DMatrix<f64> {
        &self.holonomy
    }

    pub fn has_trivial_holonomy(&self) -> bool {
        orthogonality_defect(&self.holonomy) < 1e-12
            && (&self.holonomy - DMatrix::identity(self.dim, self.dim))
                .abs()
                .max()
                < 1e-12
    }

    /// Curvature at any `t >= 0`, extended past one period by
    /// `R(t + L) = Q R(t) Q^T`.
    pub fn curvature_at(&self, t: f64) -> DMatrix<f64> {
        let l = self.period;
        if (0.0..=l).contains(&t) {
            return (self.curvature)(t);
        }
        let j = (t / l).floor();
        let tau = (t - j * l).clamp(0.0, l);
        let r = (self.curvature)(tau);
        if self.has_trivial_holonomy() {
            return r;
        }
        let qj = power(&self.holonomy, j as i64);
        &qj * r * qj.transpose()
    }

    /// Largest eigenvalue of `R(t)` over a sample grid of one period.
    pub fn max_curvature_eigenvalue(&self, samples: usize) -> f64 {
        let mut k_max = f64::NEG_INFINITY;
        for i in 0..samples {
            let t = self.period * i as f64 / samples as f64;
            let r = (self.curvature)(t);
            let top = if self.dim == 1 {
                r[(0, 0)]
            } else {
                crate::linalg::max_symmetric_eigenvalue(&r)
            };
            k_max = k_max.max(top);
        }
        k_max
    }

    /// Smallest eigenvalue of `R(t)` over a sample grid of one period.
    pub fn min_curvature_eigenvalue(&self, samples: usize) -> f64 {
        let mut k_min = f64::INFINITY;
        for i in 0..samples {
            let t = self.period * i as f64 / samples as f64;
            let r = (self.curvature)(t);
            let bot = if self.dim == 1 {
                r[(0, 0)]
            } else {
                crate::linalg::min_symmetric_eigenvalue(&r)
            };
            k_min = k_min.min(bot);
        }
        k_min
    }
}

fn power(q: &DMatrix<f64>, j: i64) -> DMatrix<f64> {
    let d = q.nrows();
    let mut acc = DMatrix::identity(d, d);
    let base = if j >= 0 { q.clone() } else { q.transpose() };
    for _ in 0..j.unsigned_abs() {
        acc = &base * acc;
    }
    acc
}

/// Dense-output fundamental solution `X(t)` on `[0, T]`, stored as one
/// period of dense data plus monodromy powers.
pub struct FundamentalSolution {
    dim: usize,
    period: f64,
    total: f64,
    base: DenseSolution,
    /// `X(j L)` for `j = 0..=n_periods`.
    monodromy: Vec<DMatrix<f64>>,
    /// `Qhat^j` alongside, when the holonomy is nontrivial.
    qhat_powers: Option<Vec<DMatrix<f64>>>,
    max_defect: f64,
    pub n_ode_steps: usize,
}

impl FundamentalSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_span(&self) -> f64 {
        self.total
    }

    /// Largest symplecticity defect `max_t |X^T J X - J|` over all stored
    /// step endpoints and monodromy powers.
    pub fn max_symplectic_defect(&self) -> f64 {
        self.max_defect
    }

    /// Evaluate `X(t)` for `t` in `[0, T]`.
    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        let l = self.period;
        let t = t.clamp(0.0, self.total);
        if t <= self.base.t_end && self.monodromy.len() <= 1 {
            return self.base.eval(t);
        }
        let mut j = (t / l).floor() as usize;
        if j >= self.monodromy.len() {
            j = self.monodromy.len() - 1;
        }
        // keep tau within the stored base interval
        let mut tau = t - j as f64 * l;
        if tau < 0.0 {
            tau = 0.0;
        }
        if tau > self.base.t_end {
            tau = self.base.t_end;
        }
        let xt = self.base.eval(tau);
        match &self.qhat_powers {
            None => xt * &self.monodromy[j],
            Some(q) => &q[j] * xt * q[j].transpose() * &self.monodromy[j],
        }
    }

    /// Position block of the solutions with `x(0) = 0`, `y(0) = I`
    /// (upper-right `d x d` block of `X(t)`).
    pub fn b_block(&self, t: f64) -> DMatrix<f64> {
        let d = self.dim;
        self.eval(t).view((0, d), (d, d)).into_owned()
    }

    /// Velocity block of the same solutions (lower-right block).
    pub fn d_block(&self, t: f64) -> DMatrix<f64> {
        let d = self.dim;
        self.eval(t).view((d, d), (d, d)).into_owned()
    }
}

/// Integrate the Jacobi fundamental solution over `[0, T]`.
pub fn integrate_fundamental(
    profile: &CurvatureProfile,
    t_end: f64,
) -> Result<FundamentalSolution> {
    integrate_fundamental_with(profile, t_end, DEFAULT_RTOL, DEFAULT_ATOL)
}

pub fn integrate_fundamental_with(
    profile: &CurvatureProfile,
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<FundamentalSolution> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "span must be positive, got {t_end}"
        )));
    }
    let d = profile.dim;
    let l = profile.period;
    let base_span = t_end.min(l);
    let curvature = profile.curvature.clone();
    let rhs = move |t: f64, x: &DMatrix<f64>| {
        let r = curvature(t.clamp(0.0, l));
        let mut dx = DMatrix::zeros(2 * d, 2 * d);
        dx.view_mut((0, 0), (d, 2 * d))
            .copy_from(&x.view((d, 0), (d, 2 * d)));
        let top = x.view((0, 0), (d, 2 * d)).into_owned();
        dx.view_mut((d, 0), (d, 2 * d)).copy_from(&(-(&r * top)));
        dx
    };
    let base = integrate_dense(
        &rhs,
        0.0,
        base_span,
        DMatrix::identity(2 * d, 2 * d),
        rtol,
        atol,
    )?;
    let n_steps = base.n_steps;

    let n_periods = if t_end > l {
        (t_end / l).ceil() as usize
    } else {
        0
    };
    let trivial_q = profile.has_trivial_holonomy();
    let mut monodromy = vec![DMatrix::identity(2 * d, 2 * d)];
    let mut qhat_powers = if trivial_q {
        None
    } else {
        Some(vec![DMatrix::identity(2 * d, 2 * d)])
    };
    if n_periods > 0 {
        let xl = base.final_state.clone();
        let qhat = {
            let mut q = DMatrix::zeros(2 * d, 2 * d);
            q.view_mut((0, 0), (d, d)).copy_from(&profile.holonomy);
            q.view_mut((d, d), (d, d)).copy_from(&profile.holonomy);
            q
        };
        for j in 0..n_periods {
            let step = if trivial_q {
                xl.clone()
            } else {
                let qj = power(&qhat, j as i64);
                &qj * &xl * qj.transpose()
            };
            let next = &step * &monodromy[j];
            monodromy.push(next);
            if let Some(qp) = qhat_powers.as_mut() {
                qp.push(&qhat * qp[j].clone());
            }
        }
    }

    let mut max_defect: f64 = 0.0;
    for s in &base.steps {
        max_defect = max_defect.max(symplectic_defect(&s.eval(s.t0 + s.h)));
    }
    for m in &monodromy {
        max_defect = max_defect.max(symplectic_defect(m));
    }

    Ok(FundamentalSolution {
        dim: d,
        period: l,
        total: t_end,
        base,
        monodromy,
        qhat_powers,
        max_defect,
        n_ode_steps: n_steps,
    })
}

/// Conjugate points of `gamma(0)` along `[0, T]` (zeros of `det B`),
/// with multiplicities.
#[derive(Debug, Clone)]
pub struct ConjugateReport {
    pub times: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Bracket width to which roots were refined.
    pub refine_tolerance: f64,
    /// Relative singular-value threshold used for multiplicities.
    pub multiplicity_threshold: f64,
    /// Set when distinct detections were merged within the resolution.
    pub merged_cluster_warning: bool,
}

impl ConjugateReport {
    /// Cumulative count of conjugate points with `t <= horizon` (closed
    /// at the right within the merge resolution), with multiplicity.
    pub fn count(&self, horizon: f64) -> usize {
        self.times
            .iter()
            .zip(self.multiplicities.iter())
            .filter(|(t, _)| **t <= horizon + MERGE_TOL)
            .map(|(_, m)| m)
            .sum()
    }

    pub fn total(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn first(&self) -> Option<f64> {
        self.times.first().copied()
    }

    /// Conjugate-point density up to `horizon`, normalized at the last
    /// located conjugate point `t_k` (the `k / t_k` form, which is free
    /// of the cutoff sawtooth of `count/horizon`). Zero when no
    /// conjugate point exists.
    pub fn density(&self, horizon: f64) -> f64 {
        let mut count = 0usize;
        let mut t_last = None;
        for (t, m) in self.times.iter().zip(self.multiplicities.iter()) {
            if *t <= horizon + MERGE_TOL {
                count += m;
                t_last = Some(*t);
            }
        }
        match t_last {
            None => 0.0,
            Some(t) => count as f64 / t,
        }
    }
}

/// Locate conjugate points on `(0, T]` for the given profile.
pub fn conjugate_points(profile: &CurvatureProfile, t_end: f64) -> Result<ConjugateReport> {
    let sol = integrate_fundamental(profile, t_end)?;
    let k_max = profile.max_curvature_eigenvalue(256);
    conjugate_points_of(&sol, k_max)
}

/// Conjugate-point scan over an already-integrated fundamental solution.
/// `k_max` is an upper bound on the curvature eigenvalues; it sets the
/// scan grid through the Sturm spacing bound `pi / sqrt(k_max)`.
pub fn conjugate_points_of(sol: &FundamentalSolution, k_max: f64) -> Result<ConjugateReport> {
    let t_end = sol.total;
    let spacing = if k_max > 1e-12 {
        std::f64::consts::PI / k_max.sqrt()
    } else {
        f64::INFINITY
    };
    // 64 samples per shortest expected conjugate spacing, at least 64 total
    let h = spacing.min(t_end) / 64.0;
    let n = (t_end / h).ceil() as usize;
    let h = t_end / n as f64;

    let mut ts = Vec::with_capacity(n + 1);
    let mut dets = Vec::with_capacity(n + 1);
    let mut sigmas = Vec::with_capacity(n + 1);
    let mut bnorms = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 * h;
        let b = sol.b_block(t);
        let sv = singular_values(&b);
        ts.push(t);
        dets.push(b.determinant());
        sigmas.push(*sv.last().unwrap());
        bnorms.push(b.norm());
    }

    let sigma_at = |t: f64| *singular_values(&sol.b_block(t)).last().unwrap();
    let det_at = |t: f64| sol.b_block(t).determinant();
    let multiplicity = |t_root: f64, scale: f64| -> usize {
        let sv = singular_values(&sol.b_block(t_root));
        let thr = MULTIPLICITY_RTOL * scale.max(1e-300);
        sv.iter().filter(|s| **s <= thr).count().max(1)
    };

    // Candidate windows: cells with a det sign change, plus windows
    // around grid dips of the smallest singular value that reach the
    // velocity scale of one cell.
    let mut windows: Vec<(f64, f64, f64)> = Vec::new(); // (lo, hi, scale)
    for i in 1..=n {
        if dets[i - 1] != 0.0 && dets[i] != 0.0 && (dets[i - 1] < 0.0) != (dets[i] < 0.0) {
            windows.push((ts[i - 1], ts[i], bnorms[i - 1].max(bnorms[i])));
        }
    }
    for i in 1..=n {
        let dip = if i < n {
            sigmas[i] < sigmas[i - 1] && sigmas[i] <= sigmas[i + 1]
        } else {
            sigmas[n] < sigmas[n - 1]
        };
        if !dip {
            continue;
        }
        let gate = h * sol.d_block(ts[i]).norm().max(1e-12);
        if sigmas[i] > gate {
            continue;
        }
        let lo = i - 1;
        let hi = (i + 1).min(n);
        windows.push((ts[lo], ts[hi], bnorms[lo].max(bnorms[hi]).max(1e-300)));
    }
    windows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // merge overlaps so each root is extracted from one window
    let mut merged_windows: Vec<(f64, f64, f64)> = Vec::new();
    for w in windows {
        if let Some(last) = merged_windows.last_mut() {
            if w.0 <= last.1 + REFINE_TOL {
                last.1 = last.1.max(w.1);
                last.2 = last.2.max(w.2);
                continue;
            }
        }
        merged_windows.push(w);
    }

    // Extract every root of a window: bisect sign changes, minimize the
    // smallest singular value otherwise, then re-scan both flanks so that
    // several roots sharing one grid cell are all recovered.
    let mut found: Vec<(f64, usize)> = Vec::new();
    for (lo, hi, scale) in merged_windows {
        let mut stack = vec![(lo, hi, 0u32)];
        while let Some((a, b, depth)) = stack.pop() {
            if b - a <= 4.0 * REFINE_TOL {
                continue;
            }
            let (da, db) = (det_at(a), det_at(b));
            let t_root = if da != 0.0 && db != 0.0 && (da < 0.0) != (db < 0.0) {
                bisect(det_at, a, b, REFINE_TOL)
            } else {
                let t_min = golden_min(sigma_at, a, b, REFINE_TOL);
                // edge minima are leftovers of an already-extracted root
                if t_min - a < 32.0 * REFINE_TOL || b - t_min < 32.0 * REFINE_TOL {
                    continue;
                }
                if sigma_at(t_min) > MULTIPLICITY_RTOL * scale {
                    continue;
                }
                t_min
            };
            found.push((t_root, multiplicity(t_root, scale)));
            if depth < 3 {
                let margin = 16.0 * REFINE_TOL;
                stack.push((a, t_root - margin, depth + 1));
                stack.push((t_root + margin, b, depth + 1));
            }
        }
    }

    // A root sitting exactly at the right endpoint: no interior dip or
    // sign change; test against the velocity scale there.
    {
        let b_end = sol.b_block(t_end);
        let sv = singular_values(&b_end);
        let scale = b_end.norm().max(sol.d_block(t_end).norm()).max(1e-300);
        let thr = MULTIPLICITY_RTOL * scale;
        if *sv.last().unwrap() <= thr {
            let mult = sv.iter().filter(|s| **s <= thr).count().max(1);
            found.push((t_end, mult));
        }
    }

    found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut times = Vec::new();
    let mut mults = Vec::new();
    let mut merged_warning = false;
    for (t, m) in found {
        if let (Some(last_t), Some(last_m)) = (times.last().copied(), mults.last_mut()) {
            let last_t: f64 = last_t;
            if (t - last_t).abs() <= MERGE_TOL {
                let last_m: &mut usize = last_m;
                if *last_m != m {
                    merged_warning = true;
                }
                *last_m = (*last_m).max(m);
                continue;
            }
        }
        times.push(t);
        mults.push(m);
    }

    Ok(ConjugateReport {
        times,
        multiplicities: mults,
        refine_tolerance: REFINE_TOL,
        multiplicity_threshold: MULTIPLICITY_RTOL,
        merged_cluster_warning: merged_warning,
    })
}

/// First conjugate time in `(0, t_max]`, if any.
pub fn first_conjugate_time(profile: &CurvatureProfile, t_max: f64) -> Result<Option<f64>> {
    Ok(conjugate_points(profile, t_max)?.first())
}

/// Poincare return map data: `P = Qhat X(L)`, spectrum, and nullity.
#[derive(Debug, Clone)]
pub struct PoincareData {
    pub matrix: DMatrix<f64>,
    pub spectrum: Vec<nalgebra::Complex<f64>>,
    pub unit_circle_flag: bool,
    pub nullity: usize,
    pub unit_circle_tolerance: f64,
}

/// Compute the Poincare map of one period of the profile.
pub fn poincare_map(profile: &CurvatureProfile) -> Result<PoincareData> {
    let sol = integrate_fundamental(profile, profile.period())?;
    let d = profile.dim();
    let mut qhat = DMatrix::zeros(2 * d, 2 * d);
    qhat.view_mut((0, 0), (d, d)).copy_from(profile.holonomy());
    qhat.view_mut((d, d), (d, d)).copy_from(profile.holonomy());
    let p = &qhat * sol.eval(profile.period());
    poincare_of_matrix(p)
}

/// Classify an explicitly given symplectic return map.
pub fn poincare_of_matrix(p: DMatrix<f64>) -> Result<PoincareData> {
    let defect = symplectic_defect(&p);
    if defect > 1e-8 * (1.0 + p.abs().max()) {
        return Err(Error::NotSymplectic { defect });
    }
    let spectrum = crate::linalg::complex_eigenvalues_bounded(&p).ok_or_else(|| {
        Error::InvalidArgument("eigenvalue iteration did not converge".into())
    })?;
    let unit_circle_flag = spectrum
        .iter()
        .any(|z| (z.norm() - 1.0).abs() <= UNIT_CIRCLE_TOL);
    let n = p.nrows();
    let sv = singular_values(&(&p - DMatrix::identity(n, n)));
    let thr = 1e-8 * p.norm().max(1.0);
    let nullity = sv.iter().filter(|s| **s <= thr).count();
    Ok(PoincareData {
        matrix: p,
        spectrum,
        unit_circle_flag,
        nullity,
        unit_circle_tolerance: UNIT_CIRCLE_TOL,
    })
}

/// Value of the index form `int_0^T (y' z' - K y z) dt` of a scalar
/// profile on test functions vanishing at both ends.
pub fn index_form_value(
    profile: &CurvatureProfile,
    t_end: f64,
    y: &dyn Fn(f64) -> f64,
    dy: &dyn Fn(f64) -> f64,
    z: &dyn Fn(f64) -> f64,
    dz: &dyn Fn(f64) -> f64,
) -> Result<f64> {
    if profile.dim() != 1 {
        return Err(Error::InvalidArgument(
            "index form values are computed for scalar profiles".into(),
        ));
    }
    let scale = 1.0 + y(0.5 * t_end).abs() + z(0.5 * t_end).abs();
    for (name, v) in [
        ("y(0)", y(0.0)),
        ("y(T)", y(t_end)),
        ("z(0)", z(0.0)),
        ("z(T)", z(t_end)),
    ] {
        if v.abs() > 1e-9 * scale {
            return Err(Error::Precondition(format!(
                "index form requires vanishing boundary values, {name} = {v}"
            )));
        }
    }
    let f = |t: f64| {
        let k = profile.curvature_at(t)[(0, 0)];
        dy(t) * dz(t) - k * y(t) * z(t)
    };
    Ok(crate::numeric::adaptive_simpson(
        &f, 0.0, t_end, 1e-9, 1e-12,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_profile_closed_form() {
        let p = CurvatureProfile::constant_scalar(0.0, 1.0);
        let sol = integrate_fundamental(&p, 1.0).unwrap();
        let x = sol.eval(1.0);
        let exact = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!((x - exact).abs().max() < 1e-11);
    }

    #[test]
    fn unit_curvature_rotation() {
        let p = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
        let sol = integrate_fundamental(&p, 2.0 * PI).unwrap();
        for i in 1..=10 {
            let t = 2.0 * PI * i as f64 / 10.0;
            let x = sol.eval(t);
            let exact = DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
            assert!((x - exact).abs().max() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn constant_matrix_closed_form() {
        // R = w^2 I: diagonal blocks cos(wt) I, sin(wt)/w I, -w sin(wt) I, cos(wt) I
        for d in [2usize, 3] {
            let w = 1.7;
            let r = DMatrix::identity(d, d) * (w * w);
            let p = CurvatureProfile::constant_matrix(r, 3.0).unwrap();
            let sol = integrate_fundamental(&p, 3.0).unwrap();
            for i in 1..=6 {
                let t = 3.0 * i as f64 / 6.0;
                let x = sol.eval(t);
                let id = DMatrix::<f64>::identity(d, d);
                let mut exact = DMatrix::zeros(2 * d, 2 * d);
                exact
                    .view_mut((0, 0), (d, d))
                    .copy_from(&(&id * (w * t).cos()));
                exact
                    .view_mut((0, d), (d, d))
                    .copy_from(&(&id * ((w * t).sin() / w)));
                exact
                    .view_mut((d, 0), (d, d))
                    .copy_from(&(&id * (-w * (w * t).sin())));
                exact
                    .view_mut((d, d), (d, d))
                    .copy_from(&(&id * (w * t).cos()));
                assert!((x - exact).abs().max() < 1e-9, "d = {d}, t = {t}");
            }
        }
    }

    #[test]
    fn symplecticity_across_many_periods() {
        let p = CurvatureProfile::scalar(2.0, |t| 1.0 + 0.5 * (PI * t).sin()).unwrap();
        let t_end = 100.0;
        let sol = integrate_fundamental(&p, t_end).unwrap();
        assert!(sol.max_symplectic_defect() < 1e-9 * (1.0 + t_end));
        for i in 0..20 {
            let t = t_end * i as f64 / 20.0;
            assert!(symplectic_defect(&sol.eval(t)) < 1e-9 * (1.0 + t_end));
        }
    }

    #[test]
    fn conjugate_points_constant_curvature() {
        let p = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
        let rep = conjugate_points(&p, 10.0).unwrap();
        assert_eq!(rep.times.len(), 3);
        for (k, t) in rep.times.iter().enumerate() {
            assert!((t - PI * (k as f64 + 1.0)).abs() < 1e-8, "k = {k}, t = {t}");
            assert_eq!(rep.multiplicities[k], 1);
        }

        let p = CurvatureProfile::constant_scalar(4.0, PI);
        let rep = conjugate_points(&p, 4.0).unwrap();
        assert_eq!(rep.times.len(), 2);
        assert!((rep.times[0] - PI / 2.0).abs() < 1e-8);
        assert!((rep.times[1] - PI).abs() < 1e-8);
    }

    #[test]
    fn conjugate_points_ten_periods_accuracy() {
        let p = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
        let rep = conjugate_points(&p, 20.0 * PI).unwrap();
        assert_eq!(rep.total(), 20);
        for (k, t) in rep.times.iter().enumerate() {
            assert!(
                (t - PI * (k as f64 + 1.0)).abs() < 1e-8,
                "k = {k}, err = {:e}",
                (t - PI * (k as f64 + 1.0)).abs()
            );
        }
    }

    #[test]
    fn conjugate_multiplicity_round_block() {
        // R = I in d = 2: conjugate points at k pi with multiplicity 2,
        // det B = sin^2 never changes sign.
        let p = CurvatureProfile::constant_matrix(DMatrix::identity(2, 2), 2.0 * PI).unwrap();
        let rep = conjugate_points(&p, 2.0 * PI).unwrap();
        assert_eq!(rep.times.len(), 2);
        assert!((rep.times[0] - PI).abs() < 1e-8);
        assert!((rep.times[1] - 2.0 * PI).abs() < 1e-7);
        assert_eq!(rep.multiplicities, vec![2, 2]);
    }

    #[test]
    fn block_diagonal_union() {
        let p1 = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
        let p2 = CurvatureProfile::constant_scalar(2.25, 2.0 * PI);
        let both = CurvatureProfile::block_diagonal(&[p1.clone(), p2.clone()]).unwrap();
        let t_end = 12.0;
        let ra = conjugate_points(&p1, t_end).unwrap();
        let rb = conjugate_points(&p2, t_end).unwrap();
        let rc = conjugate_points(&both, t_end).unwrap();
        let mut merged: Vec<f64> = ra.times.iter().chain(rb.times.iter()).cloned().collect();
        merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(rc.total(), ra.total() + rb.total());
        let mut flat: Vec<f64> = Vec::new();
        for (t, m) in rc.times.iter().zip(rc.multiplicities.iter()) {
            for _ in 0..*m {
                flat.push(*t);
            }
        }
        for (a, b) in merged.iter().zip(flat.iter()) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn no_conjugate_points_nonpositive_curvature() {
        let p = CurvatureProfile::constant_scalar(-1.0, 1.0);
        let rep = conjugate_points(&p, 30.0).unwrap();
        assert!(rep.times.is_empty());
        let p = CurvatureProfile::constant_scalar(0.0, 1.0);
        let rep = conjugate_points(&p, 30.0).unwrap();
        assert!(rep.times.is_empty());
    }

    #[test]
    fn poincare_identity_round() {
        let p = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
        let data = poincare_map(&p).unwrap();
        assert!((&data.matrix - DMatrix::identity(2, 2)).abs().max() < 1e-9);
        assert_eq!(data.nullity, 2);
        assert!(data.unit_circle_flag);
    }

    #[test]
    fn poincare_parabolic_flat() {
        let p = CurvatureProfile::constant_scalar(0.0, 1.0);
        let data = poincare_map(&p).unwrap();
        let exact = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!((&data.matrix - exact).abs().max() < 1e-10);
        assert!(data.unit_circle_flag);
        assert!(data.spectrum.iter().all(|z| (z - 1.0).norm() < 1e-6));
    }

    #[test]
    fn poincare_hyperbolic() {
        let p = CurvatureProfile::constant_scalar(-1.0, 1.0);
        let data = poincare_map(&p).unwrap();
        let mut mods: Vec<f64> = data.spectrum.iter().map(|z| z.norm()).collect();
        mods.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mods[0] - (-1.0_f64).exp()).abs() < 1e-9);
        assert!((mods[1] - 1.0_f64.exp()).abs() < 1e-9);
        assert!(!data.unit_circle_flag);
        assert_eq!(data.nullity, 0);
    }

    #[test]
    fn index_form_examples() {
        let p = CurvatureProfile::constant_scalar(1.0, PI);
        let v = index_form_value(&p, PI, &|t| t.sin(), &|t| t.cos(), &|t| t.sin(), &|t| {
            t.cos()
        })
        .unwrap();
        assert!(v.abs() < 1e-9);

        let v = index_form_value(
            &p,
            PI / 2.0,
            &|t| (2.0 * t).sin(),
            &|t| 2.0 * (2.0 * t).cos(),
            &|t| (2.0 * t).sin(),
            &|t| 2.0 * (2.0 * t).cos(),
        )
        .unwrap();
        assert!((v - 3.0 * PI / 4.0).abs() < 1e-9);

        let p4 = CurvatureProfile::constant_scalar(4.0, PI);
        let v = index_form_value(&p4, PI, &|t| t.sin(), &|t| t.cos(), &|t| t.sin(), &|t| {
            t.cos()
        })
        .unwrap();
        assert!((v + 3.0 * PI / 2.0).abs() < 1e-9);

        // boundary violation
        let bad = index_form_value(&p, 1.0, &|t| t.cos(), &|t| -t.sin(), &|t| t.sin(), &|t| {
            t.cos()
        });
        assert!(bad.is_err());
    }

    #[test]
    fn index_form_sign_matches_first_conjugate_point() {
        // positive before the first conjugate point, degenerate at it
        let p = CurvatureProfile::constant_scalar(1.0, PI);
        for frac in [0.5, 0.8, 0.95] {
            let t_end = frac * PI;
            let w = PI / t_end;
            let v = index_form_value(
                &p,
                t_end,
                &move |t| (w * t).sin(),
                &move |t| w * (w * t).cos(),
                &move |t| (w * t).sin(),
                &move |t| w * (w * t).cos(),
            )
            .unwrap();
            assert!(v > 0.0, "T = {t_end}: {v}");
        }
        let sol = integrate_fundamental(&p, PI).unwrap();
        let b = sol.b_block(PI);
        assert!(b.determinant().abs() < 1e-9, "null vector at t1");
    }

    #[test]
    fn sturm_first_conjugate_bracket_for_ellipse_bounds() {
        // constant-curvature comparison oracle: K in [0.308642, 0.64]
        let lo = CurvatureProfile::constant_scalar(0.64, 10.0);
        let hi = CurvatureProfile::constant_scalar(1.0 / 3.24, 10.0);
        let t_lo = first_conjugate_time(&lo, 10.0).unwrap().unwrap();
        let t_hi = first_conjugate_time(&hi, 10.0).unwrap().unwrap();
        assert!((t_lo - PI / 0.8).abs() < 1e-8);
        assert!((t_hi - PI / (1.0f64 / 3.24).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn step_metadata_recorded() {
        let p = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
        let sol = integrate_fundamental(&p, 2.0 * PI).unwrap();
        assert!(sol.n_ode_steps > 10);
    }

    #[test]
    fn nontrivial_holonomy_matches_unrolled_profile() {
        // Q swaps the two frame directions after one period; the same
        // flow unrolls to a plain 2L-periodic block profile.
        let l = 3.0;
        let a = move |t: f64| 1.0 + 0.4 * (PI * t / l).sin();
        let q = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let holonomy_profile = CurvatureProfile::new(2, l, q.clone(), move |t| {
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a(t), a(t + l)]))
        })
        .unwrap();
        let unrolled = CurvatureProfile::new(2, 2.0 * l, DMatrix::identity(2, 2), move |t| {
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a(t), a(t + l)]))
        })
        .unwrap();
        let t_end = 2.0 * l;
        let s1 = integrate_fundamental(&holonomy_profile, t_end).unwrap();
        let s2 = integrate_fundamental(&unrolled, t_end).unwrap();
        for i in 1..=8 {
            let t = t_end * i as f64 / 8.0;
            let diff = (s1.eval(t) - s2.eval(t)).abs().max();
            assert!(diff < 1e-9, "t = {t}: diff {diff:e}");
        }
        // the return map uses the lifted holonomy
        let p = poincare_map(&holonomy_profile).unwrap();
        let mut qhat = DMatrix::zeros(4, 4);
        qhat.view_mut((0, 0), (2, 2)).copy_from(&q);
        qhat.view_mut((2, 2), (2, 2)).copy_from(&q);
        let expected = &qhat * s1.eval(l);
        assert!((p.matrix - expected).abs().max() < 1e-9);
    }
}
