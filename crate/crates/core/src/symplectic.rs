//! Finite-dimensional perturbation calculus along a closed geodesic:
//! positive-cone predicates in the symplectic group, curvature-bump and
//! length-bump families at the curvature-profile level, the first-order
//! derivative of the fundamental solution, and the index-monotonicity /
//! hyperbolicity dichotomy scan.

use crate::error::{Error, Result};
use crate::frequency::{mean_frequency, FrequencyEstimate};
use crate::jacobi::{integrate_fundamental, poincare_map, CurvatureProfile, FundamentalSolution};
use crate::linalg::{algebra_defect, j_matrix, min_symmetric_eigenvalue, symplectic_defect};
use crate::numeric::{GL7_NODES, GL7_WEIGHTS};
use nalgebra::DMatrix;

/// Minimum-eigenvalue threshold for positive definiteness predicates.
pub const CONE_EIG_TOL: f64 = 1e-10;

/// A matrix tagged as a symplectic group or Lie-algebra element, checked
/// on construction.
#[derive(Debug, Clone)]
pub struct SymplecticElement {
    matrix: DMatrix<f64>,
    kind: ElementKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Group,
    Algebra,
}

impl SymplecticElement {
    pub fn group(matrix: DMatrix<f64>) -> Result<Self> {
        let defect = symplectic_defect(&matrix);
        if defect > 1e-8 * (1.0 + matrix.abs().max()) {
            return Err(Error::NotSymplectic { defect });
        }
        Ok(Self {
            matrix,
            kind: ElementKind::Group,
        })
    }

    pub fn algebra(matrix: DMatrix<f64>) -> Result<Self> {
        let defect = algebra_defect(&matrix);
        if defect > 1e-10 * (1.0 + matrix.abs().max()) {
            return Err(Error::NotInAlgebra { defect });
        }
        Ok(Self {
            matrix,
            kind: ElementKind::Algebra,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }
}

/// Is the algebra element in the positive cone `{A : JA > 0}`?
pub fn plus_cone_member(a: &SymplecticElement) -> Result<bool> {
    if a.kind() != ElementKind::Algebra {
        return Err(Error::InvalidArgument(
            "cone membership is a Lie-algebra predicate".into(),
        ));
    }
    let d = a.matrix.nrows() / 2;
    let ja = j_matrix(d) * &a.matrix;
    let min_eig = min_symmetric_eigenvalue(&ja);
    Ok(min_eig > CONE_EIG_TOL)
}

/// Is a sampled path `s -> P(s)` a +-curve, i.e. is `J P^{-1} dP/ds`
/// positive definite at every interior sample? Derivatives are central
/// finite differences.
pub fn is_plus_curve(params: &[f64], samples: &[SymplecticElement]) -> Result<bool> {
    if params.len() != samples.len() || params.len() < 3 {
        return Err(Error::InvalidArgument(
            "need at least 3 aligned samples of the path".into(),
        ));
    }
    if params.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "parameters must increase strictly".into(),
        ));
    }
    for p in samples {
        if p.kind() != ElementKind::Group {
            return Err(Error::InvalidArgument(
                "path samples must be group elements".into(),
            ));
        }
    }
    let d = samples[0].matrix.nrows() / 2;
    let j = j_matrix(d);
    for i in 1..samples.len() - 1 {
        let dp =
            (&samples[i + 1].matrix - &samples[i - 1].matrix) / (params[i + 1] - params[i - 1]);
        let inv = samples[i]
            .matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("path sample is singular".into()))?;
        let vel = &j * inv * dp;
        if min_symmetric_eigenvalue(&vel) <= CONE_EIG_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// C^2 plateau bump: 1 on `[-eta, eta]`, 0 outside `[-2 eta, 2 eta]`,
/// quintic smoothstep ramps in between.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub center: f64,
    pub eta: f64,
}

impl Bump {
    pub fn new(center: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidArgument("bump needs eta > 0".into()));
        }
        Ok(Self { center, eta })
    }

    pub fn value(&self, t: f64) -> f64 {
        let x = (t - self.center).abs();
        if x <= self.eta {
            1.0
        } else if x >= 2.0 * self.eta {
            0.0
        } else {
            let u = (x - self.eta) / self.eta;
            1.0 - smoothstep(u)
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - 2.0 * self.eta, self.center + 2.0 * self.eta)
    }
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

/// What a perturbation family does to the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    /// `R_s(t) = R(t) + s a(t) I`.
    CurvatureBump,
    /// Insert a flat stretch of length `s` at the bump center.
    LengthBump,
}

/// One-sided (`s >= 0`) family of profile perturbations driven by a
/// plateau bump supported strictly inside one period.
#[derive(Clone)]
pub struct PerturbationFamily {
    pub base: CurvatureProfile,
    pub bump: Bump,
    pub kind: PerturbationKind,
}

impl PerturbationFamily {
    pub fn new(base: CurvatureProfile, bump: Bump, kind: PerturbationKind) -> Result<Self> {
        let (lo, hi) = bump.support();
        if lo <= 0.0 || hi >= base.period() {
            return Err(Error::InvalidArgument(
                "bump support must lie strictly inside one period".into(),
            ));
        }
        Ok(Self { base, bump, kind })
    }

    /// Centered plateau bump taking an eighth of the period.
    pub fn centered(base: CurvatureProfile, kind: PerturbationKind) -> Result<Self> {
        let l = base.period();
        let bump = Bump::new(0.5 * l, l / 16.0)?;
        Self::new(base, bump, kind)
    }

    /// The perturbed profile at parameter `s >= 0`.
    pub fn at(&self, s: f64) -> Result<CurvatureProfile> {
        if s < 0.0 {
            return Err(Error::InvalidArgument(
                "the perturbation families are one-sided: s >= 0".into(),
            ));
        }
        match self.kind {
            PerturbationKind::CurvatureBump => apply_curvature_bump(&self.base, &self.bump, s),
            PerturbationKind::LengthBump => length_bump(&self.base, &self.bump, s),
        }
    }

    /// `tau(t) = dR_s(t)/ds = a(t) I` of the curvature family.
    pub fn tau(&self) -> impl Fn(f64) -> DMatrix<f64> + Clone + Send + Sync + 'static {
        let bump = self.bump;
        let d = self.base.dim();
        move |t: f64| DMatrix::identity(d, d) * bump.value(t)
    }
}

/// `R_s(t) = R(t) + s a(t) I`; identical to the base outside the bump
/// support.
pub fn apply_curvature_bump(
    base: &CurvatureProfile,
    bump: &Bump,
    s: f64,
) -> Result<CurvatureProfile> {
    if s < 0.0 {
        return Err(Error::InvalidArgument(
            "curvature bumps are one-sided: s >= 0".into(),
        ));
    }
    let d = base.dim();
    let inner = base.clone();
    let bump = *bump;
    CurvatureProfile::new(d, base.period(), base.holonomy().clone(), move |t| {
        let mut r = inner.curvature_at(t);
        let a = s * bump.value(t);
        if a != 0.0 {
            for i in 0..d {
                r[(i, i)] += a;
            }
        }
        r
    })
}

/// Insert a flat stretch of length `s` at the bump center: the period
/// grows to `L + s`, the curvature is zero along the inserted stretch,
/// and the holonomy is unchanged.
pub fn length_bump(base: &CurvatureProfile, bump: &Bump, s: f64) -> Result<CurvatureProfile> {
    if s < 0.0 {
        return Err(Error::InvalidArgument(
            "length bumps are one-sided: s >= 0".into(),
        ));
    }
    if s == 0.0 {
        return Ok(base.clone());
    }
    let d = base.dim();
    let cut = bump.center;
    let inner = base.clone();
    CurvatureProfile::new(d, base.period() + s, base.holonomy().clone(), move |t| {
        if t <= cut {
            inner.curvature_at(t)
        } else if t < cut + s {
            DMatrix::zeros(d, d)
        } else {
            inner.curvature_at(t - s)
        }
    })
}

/// The symmetric form `int_0^l X_0(t)^T T(t) X_0(t) dt` with
/// `T = blockdiag(tau, 0)`, evaluated along the stored fundamental
/// solution, together with its minimum eigenvalue.
#[derive(Debug, Clone)]
pub struct StarForm {
    pub form: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

pub fn star_derivative<F>(profile: &CurvatureProfile, tau: F) -> Result<StarForm>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    let sol = integrate_fundamental(profile, profile.period())?;
    star_derivative_of(&sol, profile.dim(), tau)
}

pub fn star_derivative_of<F>(sol: &FundamentalSolution, d: usize, tau: F) -> Result<StarForm>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    let l = sol.total_span();
    // verify the positivity hypothesis on a sample grid
    for i in 0..=64 {
        let t = l * i as f64 / 64.0;
        let tt = tau(t);
        let min_eig = min_symmetric_eigenvalue(&tt);
        if min_eig < -1e-10 * (1.0 + tt.abs().max()) {
            return Err(Error::NotPsd {
                t,
                min_eigenvalue: min_eig,
            });
        }
    }
    // panel Gauss-Legendre along the dense output
    let n_panels = 256;
    let mut acc = DMatrix::zeros(2 * d, 2 * d);
    for p in 0..n_panels {
        let a = l * p as f64 / n_panels as f64;
        let b = l * (p + 1) as f64 / n_panels as f64;
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for (x, w) in GL7_NODES.iter().zip(GL7_WEIGHTS.iter()) {
            let t = c + h * x;
            let xt = sol.eval(t);
            let mut tt = DMatrix::zeros(2 * d, 2 * d);
            tt.view_mut((0, 0), (d, d)).copy_from(&tau(t));
            acc += xt.transpose() * tt * xt * (w * h);
        }
    }
    // symmetrize away quadrature round-off
    let form = (&acc + acc.transpose()) * 0.5;
    let min_eigenvalue = min_symmetric_eigenvalue(&form);
    Ok(StarForm {
        form,
        min_eigenvalue,
    })
}

/// Frobenius relative error between the integral form and the one-sided
/// finite difference `J X_0(l)^{-1} (X_ds(l) - X_0(l)) / ds` for the
/// perturbation `R + ds * tau`.
pub fn star_consistency_check_tau<F>(profile: &CurvatureProfile, tau: F, ds: f64) -> Result<f64>
where
    F: Fn(f64) -> DMatrix<f64> + Clone + Send + Sync + 'static,
{
    if !(1e-6..=1e-2).contains(&ds) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must lie in [1e-6, 1e-2], got {ds}"
        )));
    }
    let l = profile.period();
    let d = profile.dim();
    let sol0 = integrate_fundamental(profile, l)?;
    let x0 = sol0.eval(l);
    let star = star_derivative_of(&sol0, d, tau.clone())?;

    let inner = profile.clone();
    let tau_inner = tau.clone();
    let perturbed = CurvatureProfile::new(d, l, profile.holonomy().clone(), move |t| {
        inner.curvature_at(t) + tau_inner(t) * ds
    })?;
    let sol1 = integrate_fundamental(&perturbed, l)?;
    let x1 = sol1.eval(l);
    let inv = x0
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("fundamental solution not invertible".into()))?;
    let fd = j_matrix(d) * inv * (&x1 - &x0) / ds;
    let fd = (&fd + fd.transpose()) * 0.5;

    let denom = star.form.norm().max(fd.norm());
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((&fd - &star.form).norm() / denom)
}

/// The finite-difference consistency check of a curvature-bump family.
pub fn star_consistency_check(family: &PerturbationFamily, ds: f64) -> Result<f64> {
    if family.kind != PerturbationKind::CurvatureBump {
        return Err(Error::InvalidArgument(
            "the derivative formula applies to curvature bumps".into(),
        ));
    }
    star_consistency_check_tau(&family.base, family.tau(), ds)
}

/// Verdict of a dichotomy scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanVerdict {
    IndexIncreasing,
    HyperbolicWindow,
    Inconclusive,
}

/// Per-parameter record of a dichotomy scan.
#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub s: f64,
    pub estimate: FrequencyEstimate,
    pub unit_circle_flag: bool,
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    pub verdict: ScanVerdict,
    /// Estimator tolerance used for the monotonicity arm.
    pub tolerance: f64,
}

/// Scan a perturbation family over an increasing `s` grid: the mean
/// frequency must be nondecreasing within the estimator tolerance, or the
/// return map must stay off the unit circle for all `s > 0`.
pub fn index_monotonicity_scan(
    family: &PerturbationFamily,
    s_grid: &[f64],
    periods: usize,
) -> Result<ScanReport> {
    if s_grid.is_empty() || s_grid[0] != 0.0 {
        return Err(Error::InvalidArgument("the s grid must start at 0".into()));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("the s grid must increase".into()));
    }
    let tol = 2e-3;
    let mut points = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let profile = family.at(s)?;
        let estimate = mean_frequency(&profile, periods)?;
        let unit_circle_flag = poincare_map(&profile)?.unit_circle_flag;
        points.push(ScanPoint {
            s,
            estimate,
            unit_circle_flag,
        });
    }
    let scale = points
        .iter()
        .map(|p| p.estimate.mean_frequency.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let nondecreasing = points
        .windows(2)
        .all(|w| w[1].estimate.mean_frequency >= w[0].estimate.mean_frequency - tol * scale);
    let hyperbolic = points.iter().skip(1).all(|p| !p.unit_circle_flag);
    // A spectrum off the unit circle pins the average index to a locally
    // constant integer, so test that arm first.
    let verdict = if hyperbolic {
        ScanVerdict::HyperbolicWindow
    } else if nondecreasing {
        ScanVerdict::IndexIncreasing
    } else {
        // Both arms false: with converged estimates this would contradict
        // the dichotomy; report inconclusive and let the caller flag it.
        ScanVerdict::Inconclusive
    };
    Ok(ScanReport {
        points,
        verdict,
        tolerance: tol,
    })
}

/// Random symplectic and cone elements for the property suites.
pub mod sampling {
    use super::*;
    use rand::Rng;

    /// Random element of sp(2d) with entries of order `scale`.
    pub fn random_algebra<R: Rng>(rng: &mut R, d: usize, scale: f64) -> DMatrix<f64> {
        // A = J S with S symmetric is the general element of sp(2d)
        let mut s = DMatrix::zeros(2 * d, 2 * d);
        for i in 0..2 * d {
            for j in 0..=i {
                let v = rng.gen_range(-scale..scale);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        j_matrix(d) * s
    }

    /// Random cone element: `A = J^{-1} S` ... built so that `J A = S` is
    /// positive definite.
    pub fn random_cone_element<R: Rng>(rng: &mut R, d: usize, scale: f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(2 * d, 2 * d);
        for i in 0..2 * d {
            for j in 0..2 * d {
                m[(i, j)] = rng.gen_range(-scale..scale);
            }
        }
        let spd = &m * m.transpose() + DMatrix::identity(2 * d, 2 * d) * (0.1 * scale * scale);
        // J A = spd  =>  A = -J spd  (J^{-1} = -J)
        -(j_matrix(d) * spd)
    }

    /// Random symplectic group element as `exp` of an algebra element.
    pub fn random_symplectic<R: Rng>(rng: &mut R, d: usize, scale: f64) -> DMatrix<f64> {
        random_algebra(rng, d, scale).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn block(i: &DMatrix<f64>, top_right: f64, bottom_left: f64) -> DMatrix<f64> {
        let d = i.nrows();
        let mut a = DMatrix::zeros(2 * d, 2 * d);
        a.view_mut((0, d), (d, d)).copy_from(&(i * top_right));
        a.view_mut((d, 0), (d, d)).copy_from(&(i * bottom_left));
        a
    }

    #[test]
    fn cone_membership_examples() {
        let id = DMatrix::identity(2, 2);
        let a = SymplecticElement::algebra(block(&id, 1.0, -1.0)).unwrap();
        assert!(plus_cone_member(&a).unwrap());

        let a = SymplecticElement::algebra(block(&id, 1.0, 1.0)).unwrap();
        assert!(!plus_cone_member(&a).unwrap());

        let not_algebra = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(SymplecticElement::algebra(not_algebra).is_err());
    }

    #[test]
    fn cone_invariant_under_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let d = 1 + (rng.gen::<u8>() as usize) % 3;
            let a = sampling::random_cone_element(&mut rng, d, 1.0);
            let s = sampling::random_symplectic(&mut rng, d, 0.4);
            let conj = &s
                * &a
                * s.clone()
                    .try_inverse()
                    .expect("symplectic matrices are invertible");
            let elem = SymplecticElement::algebra(conj).unwrap();
            assert!(plus_cone_member(&elem).unwrap());
        }
    }

    use rand::Rng;

    #[test]
    fn plus_curve_examples() {
        let d = 1;
        let id = DMatrix::identity(d, d);
        let a = block(&id, 1.0, -1.0); // rotation generator, in the cone
        let sample = |s: f64| SymplecticElement::group((a.clone() * s).exp()).unwrap();
        let params: Vec<f64> = (0..9).map(|i| 0.05 * i as f64).collect();
        let samples: Vec<_> = params.iter().map(|&s| sample(s)).collect();
        assert!(is_plus_curve(&params, &samples).unwrap());

        let constant: Vec<_> = params
            .iter()
            .map(|_| SymplecticElement::group(DMatrix::identity(2, 2)).unwrap())
            .collect();
        assert!(!is_plus_curve(&params, &constant).unwrap());

        let reversed: Vec<_> = params.iter().map(|&s| sample(-s)).collect();
        assert!(!is_plus_curve(&params, &reversed).unwrap());
    }

    #[test]
    fn curvature_bump_pointwise() {
        let base = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
        let family =
            PerturbationFamily::centered(base.clone(), PerturbationKind::CurvatureBump).unwrap();
        let p0 = family.at(0.0).unwrap();
        for i in 0..=32 {
            let t = 2.0 * PI * i as f64 / 32.0;
            assert_eq!(p0.curvature_at(t)[(0, 0)], base.curvature_at(t)[(0, 0)]);
        }
        let s = 0.1;
        let ps = family.at(s).unwrap();
        let center = family.bump.center;
        assert!((ps.curvature_at(center)[(0, 0)] - 1.1).abs() < 1e-15);
        let (lo, hi) = family.bump.support();
        for t in [lo * 0.5, hi + 0.1, 0.01] {
            assert_eq!(ps.curvature_at(t)[(0, 0)], 1.0);
        }
        assert!(family.at(-0.1).is_err());
    }

    #[test]
    fn star_derivative_flat_closed_form() {
        // X_0(t) = [[1, t], [0, 1]]; tau = 1:
        // int_0^1 [[1, t], [t, t^2]] dt = [[1, 1/2], [1/2, 1/3]]
        let p = CurvatureProfile::constant_scalar(0.0, 1.0);
        let star = star_derivative(&p, |_| DMatrix::identity(1, 1)).unwrap();
        let exact = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0 / 3.0]);
        assert!((&star.form - exact).abs().max() < 1e-9);
        assert!(star.min_eigenvalue > 0.0);

        let zero = star_derivative(&p, |_| DMatrix::zeros(1, 1)).unwrap();
        assert!(zero.form.abs().max() < 1e-12);

        let bad = star_derivative(&p, |_| -DMatrix::identity(1, 1));
        assert!(bad.is_err());
    }

    #[test]
    fn star_form_symmetric_and_definite_on_bumps() {
        let base = CurvatureProfile::scalar(2.0 * PI, |t| 1.0 + 0.3 * t.sin()).unwrap();
        let family = PerturbationFamily::centered(base, PerturbationKind::CurvatureBump).unwrap();
        let star = star_derivative(&family.base, family.tau()).unwrap();
        assert!(crate::linalg::asymmetry(&star.form) < 1e-10);
        assert!(star.min_eigenvalue > 0.0, "bump active on an open set");
    }

    #[test]
    fn star_consistency_examples() {
        // flat profile with the constant-one perturbation direction
        let flat = CurvatureProfile::constant_scalar(0.0, 1.0);
        let err = star_consistency_check_tau(&flat, |_| DMatrix::identity(1, 1), 1e-4).unwrap();
        assert!(err <= 1e-4, "flat profile, tau = 1: error {err:e}");
        let err = star_consistency_check_tau(&flat, |_| DMatrix::zeros(1, 1), 1e-4).unwrap();
        assert_eq!(err, 0.0);

        let bump = Bump::new(0.5, 0.1).unwrap();
        let family = PerturbationFamily::new(flat, bump, PerturbationKind::CurvatureBump).unwrap();
        let err = star_consistency_check(&family, 1e-4).unwrap();
        assert!(err <= 1e-4, "flat profile error {err:e}");

        let round = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
        let family = PerturbationFamily::centered(round, PerturbationKind::CurvatureBump).unwrap();
        let err = star_consistency_check(&family, 1e-4).unwrap();
        assert!(err <= 1e-4, "round profile error {err:e}");

        assert!(star_consistency_check(&family, 0.5).is_err());
    }

    #[test]
    fn plus_curve_generated_by_curvature_bumps() {
        let base = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
        let family = PerturbationFamily::centered(base, PerturbationKind::CurvatureBump).unwrap();
        let params: Vec<f64> = vec![0.0, 0.01, 0.02, 0.03, 0.04];
        let samples: Vec<SymplecticElement> = params
            .iter()
            .map(|&s| {
                let p = family.at(s).unwrap();
                SymplecticElement::group(poincare_map(&p).unwrap().matrix).unwrap()
            })
            .collect();
        assert!(is_plus_curve(&params, &samples).unwrap());
    }

    #[test]
    fn dichotomy_scan_examples() {
        let base = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
        let family =
            PerturbationFamily::centered(base.clone(), PerturbationKind::CurvatureBump).unwrap();
        let scan = index_monotonicity_scan(&family, &[0.0, 0.05, 0.1, 0.2], 24).unwrap();
        assert_eq!(scan.verdict, ScanVerdict::IndexIncreasing);

        let hyp = CurvatureProfile::constant_scalar(-1.0, 2.0);
        let family = PerturbationFamily::centered(hyp, PerturbationKind::CurvatureBump).unwrap();
        let scan = index_monotonicity_scan(&family, &[0.0, 0.05, 0.1], 12).unwrap();
        assert!(scan.points.iter().skip(1).all(|p| !p.unit_circle_flag));
        assert_eq!(scan.verdict, ScanVerdict::HyperbolicWindow);

        // zero bump: constant frequency across the grid
        let base = CurvatureProfile::constant_scalar(1.0, 2.0 * PI);
        let family = PerturbationFamily {
            base,
            bump: Bump::new(PI, 1e-9).unwrap(),
            kind: PerturbationKind::CurvatureBump,
        };
        let scan = index_monotonicity_scan(&family, &[0.0, 0.1, 0.2], 24).unwrap();
        let a0 = scan.points[0].estimate.mean_frequency;
        assert!(scan
            .points
            .iter()
            .all(|p| (p.estimate.mean_frequency - a0).abs() < 1e-9));
    }

    #[test]
    fn length_bump_properties() {
        let base = CurvatureProfile::scalar(2.0 * PI, |t| 1.0 + 0.2 * t.cos()).unwrap();
        let family =
            PerturbationFamily::centered(base.clone(), PerturbationKind::LengthBump).unwrap();
        let p0 = family.at(0.0).unwrap();
        assert_eq!(p0.period(), base.period());
        let s = 0.5;
        let ps = family.at(s).unwrap();
        assert!((ps.period() - (base.period() + s)).abs() < 1e-12);
        // outside the insertion the curvature values are shifted copies
        assert!((ps.curvature_at(0.3)[(0, 0)] - base.curvature_at(0.3)[(0, 0)]).abs() < 1e-15);
        assert!(
            (ps.curvature_at(base.period() + s - 0.3)[(0, 0)]
                - base.curvature_at(base.period() - 0.3)[(0, 0)])
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn length_bump_scales_frequency_of_hyperbolic_profile() {
        // mixed profile with hyperbolic return map but nonzero index
        let hump = Bump::new(1.0, 0.35).unwrap();
        let base = CurvatureProfile::scalar(4.0, move |t| {
            let b = hump.value(t);
            9.0 * b - 1.2 * (1.0 - b)
        })
        .unwrap();
        let data = poincare_map(&base).unwrap();
        assert!(!data.unit_circle_flag, "profile should be hyperbolic");
        let est0 = mean_frequency(&base, 40).unwrap();
        assert!(est0.mean_frequency > 0.0);

        let family =
            PerturbationFamily::centered(base.clone(), PerturbationKind::LengthBump).unwrap();
        let s = 0.8;
        let longer = family.at(s).unwrap();
        let est1 = mean_frequency(&longer, 40).unwrap();
        let expected = est0.average_index / (base.period() + s);
        assert!(
            (est1.mean_frequency - expected).abs() < 3e-3 * expected,
            "got {}, expected {}",
            est1.mean_frequency,
            expected
        );
    }
}
