//! Critical-level tables: the exact distribution of loop-homology
//! classes of a round sphere over the length filtration, the mean-level
//! (Fekete) limits of the fundamental nonnilpotent powers, and the
//! degree-vs-level resonance report.

use super::scalar::{CoefficientSpec, KScalar};
use super::{monomial_degree, ring_kind, Monomial, RingElement, RingKind};
use crate::error::{Error, Result};

/// One tabulated class.
#[derive(Debug, Clone)]
pub struct TableEntry {
    pub class: String,
    /// Basis monomial for ring-generated tables; absent for external
    /// point sets.
    pub monomial: Option<Monomial>,
    pub degree: i64,
    /// Critical level in units of the prime length `L` (integral for the
    /// round tables).
    pub level_mult: f64,
    /// Name of the Kronecker-dual cohomology class, which carries the
    /// same critical level on rank-1 degrees.
    pub dual_class: String,
    /// 2-torsion classes of the even integral presentation.
    pub torsion: bool,
}

/// A critical-level table over the length filtration.
#[derive(Debug, Clone)]
pub struct CriticalTable {
    pub n: usize,
    /// Prime closed geodesic length `L`.
    pub length: f64,
    pub max_degree: i64,
    pub spec: CoefficientSpec,
    /// Presentation used to generate entries; `None` for external tables.
    pub kind: Option<RingKind>,
    pub entries: Vec<TableEntry>,
}

/// Critical level (in units of `L`) of a basis monomial in the round
/// metric: `ceil(m/2)` for `U`-power monomials, the `Theta`-power for the
/// even presentation (`W` shifts by one column).
pub fn round_level_mult(kind: RingKind, m: &Monomial) -> i64 {
    match kind {
        RingKind::OddU => m.power.div_ceil(2) as i64,
        RingKind::EvenIntegral => m.power as i64 + if m.w { 1 } else { 0 },
    }
}

fn dual_name(n: usize, degree: i64, class: &str) -> String {
    // the generator dual to degree (2m-1)(n-1) is the m-th power of the
    // fundamental nonnilpotent cohomology class
    let nm1 = (n as i64) - 1;
    if degree > 0 && degree % nm1 == 0 {
        let q = degree / nm1;
        if q % 2 == 1 {
            let m = (q + 1) / 2;
            return if m == 1 {
                "omega".to_string()
            } else {
                format!("omega^{m}")
            };
        }
    }
    format!("dual({class})")
}

/// Build the round-metric critical table for all basis monomials of
/// degree at most `max_degree`.
pub fn round_critical_table(
    n: usize,
    length: f64,
    max_degree: i64,
    spec: CoefficientSpec,
) -> Result<CriticalTable> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "round tables need sphere dimension n >= 3, got {n}"
        )));
    }
    if !(length > 0.0) {
        return Err(Error::InvalidArgument(
            "prime length must be positive".into(),
        ));
    }
    let kind = ring_kind(n, &spec);
    let mut entries = Vec::new();
    let mut push = |m: Monomial, torsion: bool| {
        let degree = monomial_degree(n, kind, &m);
        if degree <= max_degree {
            let class = m.name(kind);
            entries.push(TableEntry {
                dual_class: dual_name(n, degree, &class),
                class,
                monomial: Some(m),
                degree,
                level_mult: round_level_mult(kind, &m) as f64,
                torsion,
            });
        }
    };
    match kind {
        RingKind::OddU => {
            let mut m = 0u32;
            loop {
                let mono = Monomial {
                    a: false,
                    w: false,
                    power: m,
                };
                if monomial_degree(n, kind, &mono) > max_degree {
                    break;
                }
                push(mono, false);
                push(
                    Monomial {
                        a: true,
                        w: false,
                        power: m,
                    },
                    false,
                );
                m += 1;
            }
        }
        RingKind::EvenIntegral => {
            let torsion_lives = matches!(spec, CoefficientSpec::Integers);
            let mut m = 0u32;
            loop {
                let theta_m = Monomial {
                    a: false,
                    w: false,
                    power: m,
                };
                let w_theta_m = Monomial {
                    a: false,
                    w: true,
                    power: m,
                };
                let a_theta_m = Monomial {
                    a: true,
                    w: false,
                    power: m,
                };
                let min_deg = monomial_degree(n, kind, &a_theta_m);
                if min_deg > max_degree {
                    break;
                }
                push(theta_m, false);
                push(w_theta_m, false);
                if m == 0 {
                    push(a_theta_m, false);
                } else if torsion_lives {
                    push(a_theta_m, true);
                }
                m += 1;
            }
        }
    }
    entries.sort_by_key(|e| (e.degree, e.class.clone()));
    Ok(CriticalTable {
        n,
        length,
        max_degree,
        spec,
        kind: Some(kind),
        entries,
    })
}

impl CriticalTable {
    /// Wrap an externally computed `(label, degree, level)` point set so
    /// numeric experiments can be checked with the same report machinery.
    pub fn external(n: usize, length: f64, points: Vec<(String, i64, f64)>) -> Self {
        let max_degree = points.iter().map(|p| p.1).max().unwrap_or(0);
        let entries = points
            .into_iter()
            .map(|(class, degree, level)| TableEntry {
                dual_class: dual_name(n, degree, &class),
                class,
                monomial: None,
                degree,
                level_mult: level / length,
                torsion: false,
            })
            .collect();
        CriticalTable {
            n,
            length,
            max_degree,
            spec: CoefficientSpec::Integers,
            kind: None,
            entries,
        }
    }

    pub fn level(&self, entry: &TableEntry) -> f64 {
        entry.level_mult * self.length
    }

    fn require_ring(&self) -> Result<RingKind> {
        self.kind
            .ok_or_else(|| Error::InvalidArgument("operation needs a ring-generated table".into()))
    }

    /// Level (units of `L`) of the basis monomial under the round rule,
    /// whether or not it is inside the tabulated degree horizon.
    pub fn monomial_level_mult(&self, m: &Monomial) -> Result<i64> {
        Ok(round_level_mult(self.require_ring()?, m))
    }

    /// The single basis monomial of a nonzero monomial element.
    fn single_monomial(x: &RingElement) -> Option<Monomial> {
        let mut it = x.terms();
        let first = it.next()?;
        if it.next().is_some() {
            return None;
        }
        Some(*first.0)
    }

    /// Mean-level estimates `cr(U^m * Z)/m` along the table horizon.
    pub fn mean_level(&self, u: &RingElement, z: &RingElement) -> Result<MeanLevelEstimate> {
        let kind = self.require_ring()?;
        let _ = kind;
        let du = u
            .degree()
            .ok_or_else(|| Error::InvalidArgument("power class must be homogeneous".into()))?;
        if du <= self.n as i64 {
            return Err(Error::Precondition(format!(
                "mean levels need deg > n, got {du} (n = {})",
                self.n
            )));
        }
        let mut ratios = Vec::new();
        let mut acc = z.clone();
        let mut m = 0u32;
        loop {
            acc = acc.product(u)?;
            m += 1;
            if acc.is_zero() {
                break;
            }
            let mono = match Self::single_monomial(&acc) {
                Some(mo) => mo,
                None => break,
            };
            let deg = acc.degree().unwrap();
            if deg > self.max_degree {
                break;
            }
            let mult = self.monomial_level_mult(&mono)?;
            ratios.push((m, mult as f64 * self.length / m as f64));
        }
        if ratios.is_empty() {
            return Err(Error::TableDepth(
                "no power of the class fits inside the table horizon".into(),
            ));
        }
        let window = 8.min(ratios.len());
        let tail = &ratios[ratios.len() - window..];
        let limsup = tail.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        let liminf = tail.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let m_max = ratios.last().unwrap().0;
        Ok(MeanLevelEstimate {
            limsup,
            liminf,
            m_max,
            truncated: m_max < 10,
            ratios,
        })
    }

    /// Fekete limits of the fundamental nonnilpotent powers: the level
    /// sequence of Theta-powers is subadditive (limit = inf of the
    /// ratios), the dual omega-power sequence is superadditive (limit =
    /// sup). For the round table both are exactly `L`.
    pub fn mu_limits(&self) -> Result<MuLimits> {
        let kind = self.require_ring()?;
        let n = self.n as i64;
        // Theta^m: degree 2m(n-1)+n
        let m_theta = (self.max_degree - n) / (2 * (n - 1));
        // omega^m ~ dual of the degree (2m-1)(n-1) generator
        let m_omega = (self.max_degree / (n - 1) + 1).div_euclid(2);
        if m_theta < 10 || m_omega < 10 {
            return Err(Error::TableDepth(format!(
                "mean-level limits need powers up to m >= 10; table allows {} and {}",
                m_theta, m_omega
            )));
        }
        let theta_mult = |m: i64| -> i64 {
            match kind {
                RingKind::OddU => {
                    // Theta^m = U^{2m}
                    round_level_mult(
                        kind,
                        &Monomial {
                            a: false,
                            w: false,
                            power: 2 * m as u32,
                        },
                    )
                }
                RingKind::EvenIntegral => round_level_mult(
                    kind,
                    &Monomial {
                        a: false,
                        w: false,
                        power: m as u32,
                    },
                ),
            }
        };
        let omega_mult = |m: i64| -> i64 {
            match kind {
                RingKind::OddU => round_level_mult(
                    kind,
                    &Monomial {
                        a: true,
                        w: false,
                        power: (2 * m - 1) as u32,
                    },
                ),
                RingKind::EvenIntegral => round_level_mult(
                    kind,
                    &Monomial {
                        a: false,
                        w: true,
                        power: (m - 1) as u32,
                    },
                ),
            }
        };
        let theta_ratios: Vec<f64> = (1..=m_theta)
            .map(|m| theta_mult(m) as f64 / m as f64)
            .collect();
        let omega_ratios: Vec<f64> = (1..=m_omega)
            .map(|m| omega_mult(m) as f64 / m as f64)
            .collect();
        // subadditive: limit bounded above by every ratio
        let mu_plus_mult = theta_ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        // superadditive: limit bounded below by every ratio
        let mu_minus_mult = omega_ratios
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(MuLimits {
            mu_plus: mu_plus_mult * self.length,
            mu_minus: mu_minus_mult * self.length,
            mu_plus_mult,
            mu_minus_mult,
            m_theta,
            m_omega,
        })
    }

    /// Subadditivity witness: `cr(Theta^{a+b}) <= cr(Theta^a) + cr(Theta^b)`.
    pub fn theta_subadditive(&self, max_sum: u32) -> Result<bool> {
        let kind = self.require_ring()?;
        let theta_pow = |m: u32| -> Monomial {
            match kind {
                RingKind::OddU => Monomial {
                    a: false,
                    w: false,
                    power: 2 * m,
                },
                RingKind::EvenIntegral => Monomial {
                    a: false,
                    w: false,
                    power: m,
                },
            }
        };
        for a in 1..max_sum {
            for b in 1..=(max_sum - a) {
                let lhs = round_level_mult(kind, &theta_pow(a + b));
                let rhs =
                    round_level_mult(kind, &theta_pow(a)) + round_level_mult(kind, &theta_pow(b));
                if lhs > rhs {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `cr(X*Y) <= cr(X) + cr(Y)` over all tabulated pairs with nonzero
    /// product.
    pub fn product_level_inequality(&self) -> Result<bool> {
        let kind = self.require_ring()?;
        let monos: Vec<(Monomial, i64)> = self
            .entries
            .iter()
            .filter_map(|e| e.monomial.map(|m| (m, round_level_mult(kind, &m))))
            .collect();
        for (ma, la) in &monos {
            for (mb, lb) in &monos {
                if let Some(prod) = super::multiply_monomials(kind, ma, mb) {
                    if round_level_mult(kind, &prod) > la + lb {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// `cr(Delta X) <= cr(X)` for every tabulated `X` with nonzero image.
    pub fn delta_level_check(&self) -> Result<DeltaLevelCheck> {
        let kind = self.require_ring()?;
        let mut checked = 0usize;
        let mut violations = Vec::new();
        for e in &self.entries {
            let Some(mono) = e.monomial else { continue };
            let x = RingElement::monomial(self.n, self.spec, mono, KScalar::one())?;
            let dx = x.delta()?;
            if dx.is_zero() {
                continue;
            }
            let target = Self::single_monomial(&dx).expect("closed-form image is a monomial");
            let lx = round_level_mult(kind, &mono);
            let ld = round_level_mult(kind, &target);
            checked += 1;
            if ld > lx {
                violations.push(format!(
                    "{} -> {}: level {} > {}",
                    e.class,
                    target.name(kind),
                    ld,
                    lx
                ));
            }
        }
        Ok(DeltaLevelCheck {
            checked,
            ok: violations.is_empty(),
            violations,
        })
    }

    /// Resonance report: the global slope `2(n-1)/mu`, and the largest
    /// deviation `|deg X - alpha_bar cr(X)|` over entries of degree > n.
    pub fn resonance_report(&self) -> Result<ResonanceReport> {
        let n = self.n as i64;
        if self.max_degree < 10 * (n - 1) {
            return Err(Error::TableDepth(format!(
                "resonance reports need degree horizon >= {}, got {}",
                10 * (n - 1),
                self.max_degree
            )));
        }
        let mu = self.mu_limits()?;
        let mu_bar_mult = 0.5 * (mu.mu_plus_mult + mu.mu_minus_mult);
        let slope = 2.0 * (n - 1) as f64 / mu_bar_mult; // degree per level-multiple
        let alpha_bar = slope / self.length;
        let mut max_deviation: f64 = 0.0;
        let mut worst = String::new();
        for e in &self.entries {
            if e.degree <= n {
                continue;
            }
            let dev = (e.degree as f64 - slope * e.level_mult).abs();
            if dev > max_deviation {
                max_deviation = dev;
                worst = e.class.clone();
            }
        }
        let split = (mu.mu_plus - mu.mu_minus).abs() > 1e-9 * mu.mu_plus.abs().max(1e-300);
        let interval = if split {
            Some((
                mu.mu_minus / (2.0 * (n - 1) as f64),
                mu.mu_plus / (2.0 * (n - 1) as f64),
            ))
        } else {
            None
        };
        Ok(ResonanceReport {
            n: self.n,
            length: self.length,
            alpha_bar,
            mu_plus: mu.mu_plus,
            mu_minus: mu.mu_minus,
            max_deviation,
            bound: self.n as f64,
            verdict: max_deviation <= self.n as f64 + 1e-9,
            worst_class: worst,
            inverse_slope_interval: interval,
        })
    }

    /// Deviation scan against an externally supplied slope (used for
    /// numeric cross-loading).
    pub fn deviation_report(&self, alpha_bar: f64) -> (f64, usize) {
        let n = self.n as i64;
        let mut max_dev: f64 = 0.0;
        let mut count = 0usize;
        for e in &self.entries {
            if e.degree <= n {
                continue;
            }
            count += 1;
            let dev = (e.degree as f64 - alpha_bar * self.level(e)).abs();
            max_dev = max_dev.max(dev);
        }
        (max_dev, count)
    }

    /// Kronecker duality on rank-1 degrees: every tabulated degree holds
    /// exactly one class, whose dual carries the same level by
    /// construction; returns false if some degree has rank > 1.
    pub fn rank_one_per_degree(&self) -> bool {
        let mut degrees: Vec<i64> = self.entries.iter().map(|e| e.degree).collect();
        degrees.sort_unstable();
        degrees.windows(2).all(|w| w[0] != w[1])
    }

    /// CSV rows `(class, degree, critical_level, dual_class)`.
    pub fn csv_rows(&self) -> Vec<(String, i64, f64, String)> {
        self.entries
            .iter()
            .map(|e| {
                (
                    e.class.clone(),
                    e.degree,
                    self.level(e),
                    e.dual_class.clone(),
                )
            })
            .collect()
    }
}

/// Consecutive circle-operator coefficients `2m-1`, `2m+1` are never both
/// divisible by a prime `p` (the even-presentation variant `(m-1)k+1`,
/// `mk+1` has no common root `k` mod `p` either).
pub fn consecutive_coefficients_nonvanishing(p: u64, max_m: u32) -> bool {
    for m in 1..=max_m as u64 {
        let c0 = (2 * m - 1) % p;
        let c1 = (2 * m + 1) % p;
        if c0 == 0 && c1 == 0 {
            return false;
        }
        // even presentation: both (m-1)k+1 and mk+1 zero mod p forces
        // k = 0 mod p and then 1 = 0
        for k in 0..p {
            let d0 = ((m - 1) * k + 1) % p;
            let d1 = (m * k + 1) % p;
            if d0 == 0 && d1 == 0 {
                return false;
            }
        }
    }
    true
}

/// Mean-level estimate of `cr(U^m * Z)/m` over the last window of the
/// table horizon.
#[derive(Debug, Clone)]
pub struct MeanLevelEstimate {
    pub limsup: f64,
    pub liminf: f64,
    pub m_max: u32,
    pub truncated: bool,
    pub ratios: Vec<(u32, f64)>,
}

/// Fekete limits of the fundamental powers.
#[derive(Debug, Clone, Copy)]
pub struct MuLimits {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub mu_plus_mult: f64,
    pub mu_minus_mult: f64,
    pub m_theta: i64,
    pub m_omega: i64,
}

#[derive(Debug, Clone)]
pub struct DeltaLevelCheck {
    pub checked: usize,
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Degree/level resonance summary of a table.
#[derive(Debug, Clone)]
pub struct ResonanceReport {
    pub n: usize,
    pub length: f64,
    pub alpha_bar: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub max_deviation: f64,
    pub bound: f64,
    pub verdict: bool,
    pub worst_class: String,
    /// `[mu_minus/2(n-1), mu_plus/2(n-1)]` when the limits split.
    pub inverse_slope_interval: Option<(f64, f64)>,
}
