//! Catalog of metric models with closed-form curvature, geodesic, and
//! frequency data: round spheres, coordinate ellipsoids, and the Katok
//! reference family.

use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative tolerance for ellipse arclength quadrature.
pub const ARCLENGTH_RTOL: f64 = 1e-10;

/// Round sphere of constant curvature `K > 0` in dimension `n >= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundSphereModel {
    n: usize,
    curvature: f64,
}

impl RoundSphereModel {
    pub fn new(n: usize, curvature: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidModel(format!(
                "round sphere needs n >= 2, got {n}"
            )));
        }
        if !(curvature > 0.0) || !curvature.is_finite() {
            return Err(Error::InvalidModel(format!(
                "round sphere needs K > 0, got {curvature}"
            )));
        }
        Ok(Self { n, curvature })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    /// Length of every prime closed geodesic.
    pub fn prime_length(&self) -> f64 {
        2.0 * PI / self.curvature.sqrt()
    }
}

/// Coordinate ellipsoid with semi-axes sorted ascending. Geodesic indices
/// `(i, j)` always refer to the sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidModel {
    axes: Vec<f64>,
}

impl EllipsoidModel {
    /// Accepts axes in any order; sorts ascending internally.
    pub fn new(axes: impl Into<Vec<f64>>) -> Result<Self> {
        let mut axes = axes.into();
        if axes.len() < 3 {
            return Err(Error::InvalidModel(format!(
                "ellipsoid needs n + 1 >= 3 semi-axes, got {}",
                axes.len()
            )));
        }
        if axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidModel(
                "ellipsoid semi-axes must be positive".into(),
            ));
        }
        axes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { axes })
    }

    /// Graded family: axes `a_{2i} = mu^i`, `a_{2i+1} = lambda * mu^i`
    /// for `i = 0..=m`, truncated to `2m + 1` entries (dimension `n = 2m`).
    pub fn graded(mu: f64, lambda: f64, m: usize) -> Result<Self> {
        if !(mu > 1.0) || !(lambda > 1.0) {
            return Err(Error::InvalidModel(format!(
                "graded ellipsoid needs mu > 1 and lambda > 1, got mu = {mu}, lambda = {lambda}"
            )));
        }
        if m < 1 {
            return Err(Error::InvalidModel("graded ellipsoid needs m >= 1".into()));
        }
        let mut axes = Vec::with_capacity(2 * m + 1);
        for i in 0..=m {
            axes.push(mu.powi(i as i32));
            if i < m {
                axes.push(lambda * mu.powi(i as i32));
            }
        }
        Self::new(axes)
    }

    /// Manifold dimension `n` (one less than the number of axes).
    pub fn dim(&self) -> usize {
        self.axes.len() - 1
    }

    pub fn axes(&self) -> &[f64] {
        &self.axes
    }

    /// Scale every semi-axis by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.axes.iter().map(|a| a * s).collect::<Vec<_>>())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let n1 = self.axes.len();
        if i >= j || j >= n1 {
            return Err(Error::InvalidArgument(format!(
                "geodesic index pair ({i}, {j}) is not valid for {n1} axes (need i < j < {n1})"
            )));
        }
        Ok(())
    }

    /// Gauss curvature of a 3-axis ellipsoid at surface parameters
    /// `(u, v)` of the parametrization
    /// `(a0 cos u sin v, a1 sin u sin v, a2 cos v)`.
    pub fn gauss_curvature(&self, u: f64, v: f64) -> Result<f64> {
        if self.axes.len() != 3 {
            return Err(Error::UnsupportedModel(
                "gauss_curvature is defined for 3-axis ellipsoids".into(),
            ));
        }
        let (a0, a1, a2) = (self.axes[0], self.axes[1], self.axes[2]);
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        let denom = a0 * a0 * a1 * a1 * cv * cv
            + a2 * a2 * (a1 * a1 * cu * cu + a0 * a0 * su * su) * sv * sv;
        Ok(a0 * a0 * a1 * a1 * a2 * a2 / (denom * denom))
    }

    /// All short closed geodesics: the coordinate-plane ellipses, as index
    /// pairs `(i, j)` with `i < j`, together with their arclengths.
    pub fn short_geodesics(&self) -> Vec<ShortGeodesic> {
        let n1 = self.axes.len();
        let mut out = Vec::with_capacity(n1 * (n1 - 1) / 2);
        for i in 0..n1 {
            for j in (i + 1)..n1 {
                out.push(ShortGeodesic {
                    pair: (i, j),
                    length: ellipse_arclength(self.axes[i], self.axes[j]),
                });
            }
        }
        out
    }

    /// Totally geodesic 2-dimensional sections through the ellipse `(i, j)`:
    /// one per remaining coordinate direction `k`, with normal axis `a_k`.
    pub fn section_decomposition(&self, pair: (usize, usize)) -> Result<Vec<PlaneSection>> {
        let (i, j) = pair;
        self.check_pair(i, j)?;
        Ok((0..self.axes.len())
            .filter(|&k| k != i && k != j)
            .map(|k| PlaneSection::new(self.axes[i], self.axes[j], self.axes[k]).unwrap())
            .collect())
    }
}

/// One coordinate-plane ellipse of an ellipsoid with its arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortGeodesic {
    pub pair: (usize, usize),
    pub length: f64,
}

/// Arclength of the ellipse with semi-axes `(a, b)`.
pub fn ellipse_arclength(a: f64, b: f64) -> f64 {
    adaptive_simpson(
        &|t: f64| ellipse_speed(a, b, t),
        0.0,
        2.0 * PI,
        ARCLENGTH_RTOL,
        0.0,
    )
}

fn ellipse_speed(a: f64, b: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    (a * a * s * s + b * b * c * c).sqrt()
}

/// A 2-dimensional totally geodesic ellipsoid section `(a, b, c)`: the
/// distinguished ellipse lies in the `(a, b)`-plane, `c` is the normal
/// axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSection {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PlaneSection {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(Error::InvalidModel(
                "section semi-axes must be positive".into(),
            ));
        }
        Ok(Self { a, b, c })
    }

    /// Gauss curvature of the section at ellipse parameter `t`, where the
    /// ellipse is `(a cos t, b sin t)`.
    pub fn curvature(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        let q = self.b * self.b * c * c + self.a * self.a * s * s;
        (self.a * self.a * self.b * self.b) / (self.c * self.c * q * q)
    }

    /// `ds/dt` of the ellipse parametrization, for arclength
    /// reparametrization.
    pub fn speed(&self, t: f64) -> f64 {
        ellipse_speed(self.a, self.b, t)
    }

    /// Closed bounds on the curvature over the whole ellipse.
    pub fn curvature_bounds(&self) -> (f64, f64) {
        let lo = self.a.min(self.b);
        let hi = self.a.max(self.b);
        (
            lo * lo / (hi * hi * self.c * self.c),
            hi * hi / (lo * lo * self.c * self.c),
        )
    }

    /// Arclength of the distinguished ellipse.
    pub fn arclength(&self) -> f64 {
        ellipse_arclength(self.a, self.b)
    }
}

/// Katok reference family on an odd-dimensional sphere: data only, no flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatokModel {
    n: usize,
    epsilon: f64,
}

impl KatokModel {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidModel(format!(
                "Katok model needs odd n >= 3, got {n}"
            )));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidModel(format!(
                "Katok parameter must lie in [0, 1), got {epsilon}"
            )));
        }
        Ok(Self { n, epsilon })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Reversibility `(1 + eps) / (1 - eps)`.
    pub fn reversibility(&self) -> f64 {
        (1.0 + self.epsilon) / (1.0 - self.epsilon)
    }

    /// Number of geometrically distinct closed geodesics for irrational
    /// `eps` (odd n).
    pub fn geodesic_count(&self) -> usize {
        self.n + 1
    }

    /// Heuristic: does `eps` look rational with a small denominator?
    /// (Rational parameters give infinitely many closed geodesics.)
    pub fn epsilon_looks_rational(&self) -> bool {
        looks_rational(self.epsilon, 1000, 1e-12)
    }
}

fn looks_rational(x: f64, max_den: u64, tol: f64) -> bool {
    (1..=max_den).any(|q| {
        let p = (x * q as f64).round();
        (x - p / q as f64).abs() < tol
    })
}

/// Closed-form reference record for models that have one.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceData {
    /// Length of a prime closed geodesic (round metric only).
    pub prime_length: Option<f64>,
    /// Mean frequency shared by every closed geodesic.
    pub mean_frequency: f64,
    /// Number of geometrically distinct closed geodesics, when finite.
    pub geodesic_count: Option<usize>,
    /// Set when the Katok parameter looks rational (the finite-count claim
    /// then fails).
    pub rational_parameter_warning: bool,
}

impl RoundSphereModel {
    /// Morse index of the m-th iterate of any prime closed geodesic.
    pub fn iterate_index(&self, m: u64) -> u64 {
        (2 * m - 1) * (self.n as u64 - 1)
    }

    pub fn reference_data(&self) -> ReferenceData {
        ReferenceData {
            prime_length: Some(self.prime_length()),
            mean_frequency: self.curvature.sqrt() * (self.n as f64 - 1.0) / PI,
            geodesic_count: None,
            rational_parameter_warning: false,
        }
    }
}

impl KatokModel {
    pub fn reference_data(&self) -> ReferenceData {
        ReferenceData {
            prime_length: None,
            mean_frequency: (self.n as f64 - 1.0) / PI,
            geodesic_count: Some(self.geodesic_count()),
            rational_parameter_warning: self.epsilon_looks_rational(),
        }
    }
}

/// Any model in the catalog, as parsed from JSON.
///
/// Literals: `{"kind":"ellipsoid","axes":[...]}`,
/// `{"kind":"round","n":3,"K":1.0}`, `{"kind":"katok","n":3,"epsilon":0.1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Round(RoundSphereModel),
    Ellipsoid(EllipsoidModel),
    Katok(KatokModel),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ModelLiteral {
    Round {
        n: usize,
        #[serde(rename = "K")]
        curvature: f64,
    },
    Ellipsoid {
        axes: Vec<f64>,
    },
    Katok {
        n: usize,
        epsilon: f64,
    },
}

impl Model {
    pub fn from_json(text: &str) -> Result<Self> {
        let lit: ModelLiteral = serde_json::from_str(text)?;
        match lit {
            ModelLiteral::Round { n, curvature } => {
                Ok(Model::Round(RoundSphereModel::new(n, curvature)?))
            }
            ModelLiteral::Ellipsoid { axes } => Ok(Model::Ellipsoid(EllipsoidModel::new(axes)?)),
            ModelLiteral::Katok { n, epsilon } => Ok(Model::Katok(KatokModel::new(n, epsilon)?)),
        }
    }

    /// Closed-form reference data; ellipsoids have none.
    pub fn reference_data(&self) -> Result<ReferenceData> {
        match self {
            Model::Round(m) => Ok(m.reference_data()),
            Model::Katok(m) => Ok(m.reference_data()),
            Model::Ellipsoid(_) => Err(Error::UnsupportedModel(
                "no closed-form reference data for ellipsoids".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_curvature_round_degeneration() {
        let e = EllipsoidModel::new(vec![1.0, 1.0, 1.0]).unwrap();
        for &(u, v) in &[(0.0, 0.1), (0.7, 1.2), (2.0, 2.5), (4.0, 0.3)] {
            assert!((e.gauss_curvature(u, v).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_curvature_examples() {
        let e = EllipsoidModel::new(vec![1.0, 1.2, 1.5]).unwrap();
        let k = e.gauss_curvature(0.0, PI / 2.0).unwrap();
        assert!((k - 1.0 / 3.24).abs() < 1e-12, "got {k}");
        let k = e.gauss_curvature(0.0, 0.0).unwrap();
        assert!((k - 1.5625).abs() < 1e-12, "got {k}");
    }

    #[test]
    fn invalid_axes_rejected() {
        assert!(EllipsoidModel::new(vec![1.0, -1.0, 2.0]).is_err());
        assert!(EllipsoidModel::new(vec![1.0, 0.0, 2.0]).is_err());
        assert!(EllipsoidModel::new(vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn section_profile_examples() {
        let s = PlaneSection::new(1.0, 1.0, 1.0).unwrap();
        assert!((s.curvature(0.7) - 1.0).abs() < 1e-14);
        assert!((s.speed(0.7) - 1.0).abs() < 1e-14);

        let s = PlaneSection::new(1.0, 1.2, 1.5).unwrap();
        assert!((s.curvature(0.0) - 1.0 / 3.24).abs() < 1e-12);
        assert!((s.speed(0.0) - 1.2).abs() < 1e-14);
        assert!((s.curvature(PI / 2.0) - 0.64).abs() < 1e-12);
        assert!((s.speed(PI / 2.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn section_profile_within_bounds() {
        let s = PlaneSection::new(1.0, 1.2, 1.5).unwrap();
        let (lo, hi) = s.curvature_bounds();
        for i in 0..=1000 {
            let t = 2.0 * PI * i as f64 / 1000.0;
            let k = s.curvature(t);
            assert!(k >= lo - 1e-12 && k <= hi + 1e-12);
        }
    }

    #[test]
    fn section_matches_gauss_curvature_along_ellipse() {
        // ellipse (0,1): surface curve v = pi/2, u = t
        let e = EllipsoidModel::new(vec![1.0, 1.2, 1.5]).unwrap();
        let s = PlaneSection::new(1.0, 1.2, 1.5).unwrap();
        for i in 0..=200 {
            let t = 2.0 * PI * i as f64 / 200.0;
            let k_surf = e.gauss_curvature(t, PI / 2.0).unwrap();
            assert!((k_surf - s.curvature(t)).abs() < 1e-12);
        }
        // ellipse (0,2): surface curve u = 0, parameter t = pi/2 - v
        let s02 = PlaneSection::new(1.0, 1.5, 1.2).unwrap();
        for i in 0..=200 {
            let v = 2.0 * PI * i as f64 / 200.0;
            let k_surf = e.gauss_curvature(0.0, v).unwrap();
            assert!((k_surf - s02.curvature(PI / 2.0 - v)).abs() < 1e-12);
        }
    }

    #[test]
    fn short_geodesic_counts() {
        let e = EllipsoidModel::new(vec![1.0, 1.2, 1.5]).unwrap();
        let g = e.short_geodesics();
        assert_eq!(g.len(), 3);
        assert_eq!(
            g.iter().map(|s| s.pair).collect::<Vec<_>>(),
            vec![(0, 1), (0, 2), (1, 2)]
        );
        let e = EllipsoidModel::new(vec![1.0, 1.1, 1.2, 1.3]).unwrap();
        assert_eq!(e.short_geodesics().len(), 6);
        for n in 2..=8usize {
            let axes: Vec<f64> = (0..=n).map(|i| 1.0 + 0.1 * i as f64).collect();
            let e = EllipsoidModel::new(axes).unwrap();
            assert_eq!(e.short_geodesics().len(), (n + 1) * n / 2);
        }
    }

    #[test]
    fn unit_sphere_ellipse_lengths() {
        let e = EllipsoidModel::new(vec![1.0, 1.0, 1.0]).unwrap();
        for g in e.short_geodesics() {
            assert!((g.length - 2.0 * PI).abs() < 1e-9);
        }
    }

    #[test]
    fn section_decompositions() {
        let e = EllipsoidModel::new(vec![1.0, 1.2, 1.5]).unwrap();
        let secs = e.section_decomposition((0, 1)).unwrap();
        assert_eq!(secs.len(), 1);
        assert_eq!(
            secs[0],
            PlaneSection {
                a: 1.0,
                b: 1.2,
                c: 1.5
            }
        );

        let e = EllipsoidModel::graded(2.0, 1.05, 2).unwrap();
        assert_eq!(e.axes(), &[1.0, 1.05, 2.0, 2.1, 4.0]);
        let secs = e.section_decomposition((0, 1)).unwrap();
        let normals: Vec<f64> = secs.iter().map(|s| s.c).collect();
        assert_eq!(normals, vec![2.0, 2.1, 4.0]);

        let e = EllipsoidModel::new(vec![1.0, 1.1, 1.2, 1.3]).unwrap();
        let secs = e.section_decomposition((2, 3)).unwrap();
        let normals: Vec<f64> = secs.iter().map(|s| s.c).collect();
        assert_eq!(normals, vec![1.0, 1.1]);

        assert!(e.section_decomposition((3, 3)).is_err());
        assert!(e.section_decomposition((1, 7)).is_err());
    }

    #[test]
    fn round_reference_data() {
        let m = RoundSphereModel::new(3, 1.0).unwrap();
        let r = m.reference_data();
        assert!((r.prime_length.unwrap() - 2.0 * PI).abs() < 1e-14);
        for mm in 1..6u64 {
            assert_eq!(m.iterate_index(mm), 2 * (2 * mm - 1));
        }
        assert!((r.mean_frequency - 2.0 / PI).abs() < 1e-14);

        let m = RoundSphereModel::new(3, 4.0).unwrap();
        let r = m.reference_data();
        assert!((r.prime_length.unwrap() - PI).abs() < 1e-14);
        assert!((r.mean_frequency - 4.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn katok_reference_data() {
        let m = KatokModel::new(3, 2.0_f64.sqrt() - 1.0).unwrap();
        let r = m.reference_data();
        assert_eq!(r.geodesic_count, Some(4));
        assert!((r.mean_frequency - 2.0 / PI).abs() < 1e-14);
        assert!(!r.rational_parameter_warning);

        let m = KatokModel::new(3, 0.5).unwrap();
        assert!(m.reference_data().rational_parameter_warning);

        assert!(KatokModel::new(4, 0.1).is_err());
        assert!(KatokModel::new(3, 1.0).is_err());
    }

    #[test]
    fn ellipsoid_reference_unsupported() {
        let m = Model::from_json(r#"{"kind":"ellipsoid","axes":[1,1.2,1.5]}"#).unwrap();
        assert!(m.reference_data().is_err());
    }

    #[test]
    fn model_json_literals() {
        match Model::from_json(r#"{"kind":"round","n":3,"K":1.0}"#).unwrap() {
            Model::Round(m) => {
                assert_eq!(m.dim(), 3);
                assert_eq!(m.curvature(), 1.0);
            }
            _ => panic!("wrong variant"),
        }
        match Model::from_json(r#"{"kind":"katok","n":3,"epsilon":0.123}"#).unwrap() {
            Model::Katok(m) => assert_eq!(m.geodesic_count(), 4),
            _ => panic!("wrong variant"),
        }
        assert!(Model::from_json(r#"{"kind":"torus"}"#).is_err());
        assert!(Model::from_json("not json").is_err());
    }

    #[test]
    fn axes_sorted_internally() {
        let e = EllipsoidModel::new(vec![1.5, 1.0, 1.2]).unwrap();
        assert_eq!(e.axes(), &[1.0, 1.2, 1.5]);
    }
}
