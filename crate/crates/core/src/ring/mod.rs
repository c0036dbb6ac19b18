//! Exact loop-homology algebra of spheres: graded-commutative rings on
//! the standard generators, the degree +1 circle operator, and the
//! bracket tying the two together.
//!
//! Two presentations are used. For `n` odd (any coefficients) and for
//! `n` even mod 2, the ring is exterior(A) tensor G[U] with
//! `deg A = 0`, `deg U = 2n-1`. For `n > 2` even with integral (or
//! rational / odd-prime) coefficients, it is exterior(W) tensor
//! G[A, Theta] / (A^2, AW, 2A·Theta) with `deg W = n-1`,
//! `deg Theta = 3n-2`. Products lower degree by `n`; the even-case
//! circle-operator constant `k = k(n)` is kept symbolic.

pub mod scalar;
pub mod table;

pub use scalar::{CoefficientSpec, KScalar};
pub use table::{
    round_critical_table, CriticalTable, MeanLevelEstimate, MuLimits, ResonanceReport, TableEntry,
};

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

/// Which presentation a ring element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingKind {
    /// exterior(A) tensor G[U]
    OddU,
    /// exterior(W) tensor G[A, Theta] / (A^2, AW, 2A·Theta)
    EvenIntegral,
}

/// The presentation used for sphere dimension `n` over `spec`.
pub fn ring_kind(n: usize, spec: &CoefficientSpec) -> RingKind {
    if n % 2 == 1 || spec.characteristic() == 2 {
        RingKind::OddU
    } else {
        RingKind::EvenIntegral
    }
}

/// Basis monomial. In `OddU` the fields are (A-exponent, U-power); in
/// `EvenIntegral` they are (A-exponent, W-exponent, Theta-power).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial {
    pub a: bool,
    pub w: bool,
    pub power: u32,
}

impl Monomial {
    pub const E: Monomial = Monomial {
        a: false,
        w: false,
        power: 0,
    };

    /// Display name used in tables and CSV exports.
    pub fn name(&self, kind: RingKind) -> String {
        let sym = match kind {
            RingKind::OddU => "U",
            RingKind::EvenIntegral => "Theta",
        };
        let mut parts = Vec::new();
        if self.a {
            parts.push("A".to_string());
        }
        if self.w {
            parts.push("W".to_string());
        }
        match self.power {
            0 => {}
            1 => parts.push(sym.to_string()),
            p => parts.push(format!("{sym}^{p}")),
        }
        if parts.is_empty() {
            "E".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// Named generators of the two presentations. In the odd presentation
/// `W` and `Theta` are the derived classes `A*U` and `U^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    A,
    U,
    W,
    Theta,
}

/// A finite exact linear combination of basis monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct RingElement {
    n: usize,
    spec: CoefficientSpec,
    kind: RingKind,
    terms: BTreeMap<Monomial, KScalar>,
}

impl RingElement {
    pub fn zero(n: usize, spec: CoefficientSpec) -> Self {
        RingElement {
            n,
            spec,
            kind: ring_kind(n, &spec),
            terms: BTreeMap::new(),
        }
    }

    /// The identity element `E`.
    pub fn identity(n: usize, spec: CoefficientSpec) -> Self {
        Self::monomial(n, spec, Monomial::E, KScalar::one()).unwrap()
    }

    pub fn monomial(n: usize, spec: CoefficientSpec, m: Monomial, c: KScalar) -> Result<Self> {
        let mut e = Self::zero(n, spec);
        e.add_term(m, c)?;
        Ok(e)
    }

    pub fn generator(n: usize, spec: CoefficientSpec, g: Generator) -> Result<Self> {
        let kind = ring_kind(n, &spec);
        let mono = match (kind, g) {
            (RingKind::OddU, Generator::A) => Monomial {
                a: true,
                w: false,
                power: 0,
            },
            (RingKind::OddU, Generator::U) => Monomial {
                a: false,
                w: false,
                power: 1,
            },
            // derived classes: W = A*U, Theta = U^2
            (RingKind::OddU, Generator::W) => Monomial {
                a: true,
                w: false,
                power: 1,
            },
            (RingKind::OddU, Generator::Theta) => Monomial {
                a: false,
                w: false,
                power: 2,
            },
            (RingKind::EvenIntegral, Generator::A) => Monomial {
                a: true,
                w: false,
                power: 0,
            },
            (RingKind::EvenIntegral, Generator::W) => Monomial {
                a: false,
                w: true,
                power: 0,
            },
            (RingKind::EvenIntegral, Generator::Theta) => Monomial {
                a: false,
                w: false,
                power: 1,
            },
            (RingKind::EvenIntegral, Generator::U) => {
                return Err(Error::RingMismatch(
                    "U is a generator of the odd presentation only".into(),
                ))
            }
        };
        Self::monomial(n, spec, mono, KScalar::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> CoefficientSpec {
        self.spec
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &KScalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree of a basis monomial in this ring.
    pub fn monomial_degree(&self, m: &Monomial) -> i64 {
        monomial_degree(self.n, self.kind, m)
    }

    /// Degree of a homogeneous element; `None` for 0 or mixed degrees.
    pub fn degree(&self) -> Option<i64> {
        let mut deg = None;
        for m in self.terms.keys() {
            let d = self.monomial_degree(m);
            match deg {
                None => deg = Some(d),
                Some(prev) if prev != d => return None,
                _ => {}
            }
        }
        deg
    }

    fn add_term(&mut self, m: Monomial, c: KScalar) -> Result<()> {
        let c = normalize_coefficient(self.kind, &self.spec, &m, c)?;
        if c.is_zero() {
            return Ok(());
        }
        let entry = self.terms.entry(m).or_insert_with(KScalar::zero);
        let sum = entry.add(&c);
        let sum = normalize_coefficient(self.kind, &self.spec, &m, sum)?;
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            *entry = sum;
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.spec != other.spec {
            return Err(Error::RingMismatch(format!(
                "elements live in different rings (n = {} vs {}, {:?} vs {:?})",
                self.n, other.n, self.spec, other.spec
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &KScalar) -> Result<Self> {
        let mut out = Self::zero(self.n, self.spec);
        for (m, c) in &self.terms {
            out.add_term(*m, c.mul(s))?;
        }
        Ok(out)
    }

    pub fn scale_int(&self, v: i64) -> Result<Self> {
        self.scale(&KScalar::from_int(v))
    }

    /// Loop product. Degrees add and then drop by `n`; the relations of
    /// the presentation are reduced to normal form.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.n, self.spec);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some(m) = multiply_monomials(self.kind, ma, mb) {
                    out.add_term(m, ca.mul(cb))?;
                }
            }
        }
        Ok(out)
    }

    /// Power `self^m` under the loop product.
    pub fn pow(&self, m: u32) -> Result<Self> {
        let mut acc = Self::identity(self.n, self.spec);
        for _ in 0..m {
            acc = acc.product(self)?;
        }
        Ok(acc)
    }

    /// Circle operator (degree +1), closed form on basis monomials:
    /// `A*U^m -> m U^{m-1}`, `U^m -> 0`;
    /// `W*Theta^m -> (mk+1) Theta^m`, `Theta^m -> 0`, `A*Theta^m -> 0`.
    pub fn delta(&self) -> Result<Self> {
        let mut out = Self::zero(self.n, self.spec);
        for (m, c) in &self.terms {
            match self.kind {
                RingKind::OddU => {
                    if m.a && m.power >= 1 {
                        let target = Monomial {
                            a: false,
                            w: false,
                            power: m.power - 1,
                        };
                        out.add_term(target, c.mul_int(m.power as i64))?;
                    }
                }
                RingKind::EvenIntegral => {
                    if m.w && !m.a {
                        let target = Monomial {
                            a: false,
                            w: false,
                            power: m.power,
                        };
                        out.add_term(target, c.mul(&KScalar::linear_in_k(m.power as i64, 1)))?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Circle operator computed through the product identity
    /// `Delta(X*Y) = Delta(X)*Y ± X*Delta(Y) ± {X, Y}`, recursing on a
    /// leading generator and expanding brackets by the Leibniz rule down
    /// to the generator bracket table. Used to cross-check `delta`.
    pub fn delta_recursive(&self) -> Result<Self> {
        let mut out = Self::zero(self.n, self.spec);
        for (m, c) in &self.terms {
            let d = delta_recursive_monomial(self.n, self.spec, self.kind, m)?;
            out = out.add(&d.scale(c)?)?;
        }
        Ok(out)
    }

    /// Loop bracket, defined through the circle operator and the product:
    /// `{X, Y} = ±(Delta(X*Y) - Delta(X)*Y) - X*Delta(Y)` per homogeneous
    /// term, extended bilinearly.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.n, self.spec);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let x = Self::monomial(self.n, self.spec, *ma, KScalar::one())?;
                let y = Self::monomial(self.n, self.spec, *mb, KScalar::one())?;
                let sx = shifted_parity(self.n, self.kind, ma);
                let sign = if sx { -1 } else { 1 };
                // (-1)^{|X|} [ Delta(X*Y) - Delta(X)*Y ] - X*Delta(Y)
                let t1 = x.product(&y)?.delta()?;
                let t2 = x.delta()?.product(&y)?;
                let t3 = x.product(&y.delta()?)?;
                let term = t1.sub(&t2)?.scale_int(sign)?.sub(&t3)?;
                out = out.add(&term.scale(&ca.mul(cb))?)?;
            }
        }
        Ok(out)
    }

    /// Bracket computed from the generator table and the Leibniz rule
    /// only (no closed-form circle operator); `x` must be one of the
    /// ring's generators. Used by the verification suite.
    pub fn bracket_recursive(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.n, self.spec);
        for (ma, ca) in &self.terms {
            let g = single_generator(self.kind, ma).ok_or_else(|| {
                Error::InvalidArgument("recursive brackets start from a single generator".into())
            })?;
            for (mb, cb) in &other.terms {
                let b = bracket_generator_monomial(self.n, self.spec, self.kind, g, mb)?;
                out = out.add(&b.scale(&ca.mul(cb))?)?;
            }
        }
        Ok(out)
    }
}

/// Degree of a basis monomial: generator degrees minus `n` per product
/// pairing.
pub fn monomial_degree(n: usize, kind: RingKind, m: &Monomial) -> i64 {
    let n = n as i64;
    let factors: i64;
    let gen_sum: i64;
    match kind {
        RingKind::OddU => {
            factors = m.a as i64 + m.power as i64;
            gen_sum = m.power as i64 * (2 * n - 1);
        }
        RingKind::EvenIntegral => {
            factors = m.a as i64 + m.w as i64 + m.power as i64;
            gen_sum = m.w as i64 * (n - 1) + m.power as i64 * (3 * n - 2);
        }
    }
    gen_sum - (factors - 1) * n
}

/// Parity of the shifted degree `deg - n`, which rules the signs.
fn shifted_parity(n: usize, kind: RingKind, m: &Monomial) -> bool {
    ((monomial_degree(n, kind, m) - n as i64) % 2) != 0
}

fn multiply_monomials(kind: RingKind, a: &Monomial, b: &Monomial) -> Option<Monomial> {
    if a.a && b.a {
        return None; // A^2 = 0
    }
    if a.w && b.w {
        return None; // exterior generator
    }
    let m = Monomial {
        a: a.a || b.a,
        w: a.w || b.w,
        power: a.power + b.power,
    };
    if kind == RingKind::EvenIntegral && m.a && m.w {
        return None; // AW = 0
    }
    Some(m)
}

/// Torsion normal form: in the even integral ring, `2 A Theta = 0`, so
/// the coefficient of `A*Theta^m` (m >= 1) lives in Z/2 over the
/// integers and dies over coefficient fields of odd characteristic.
fn normalize_coefficient(
    kind: RingKind,
    spec: &CoefficientSpec,
    m: &Monomial,
    c: KScalar,
) -> Result<KScalar> {
    let c = c.reduced(spec)?;
    if kind != RingKind::EvenIntegral || !m.a || m.power == 0 {
        return Ok(c);
    }
    match spec {
        // the coefficient lives in (Z/2)[k]: reduce each polynomial
        // coefficient mod 2 and keep k symbolic
        CoefficientSpec::Integers => c.reduced(&CoefficientSpec::ModP(2)),
        // 2 is invertible: the torsion classes vanish
        CoefficientSpec::Rationals => Ok(KScalar::zero()),
        CoefficientSpec::ModP(p) => {
            if *p == 2 {
                Ok(c)
            } else {
                Ok(KScalar::zero())
            }
        }
    }
}

fn single_generator(kind: RingKind, m: &Monomial) -> Option<Generator> {
    match kind {
        RingKind::OddU => match (m.a, m.power) {
            (true, 0) => Some(Generator::A),
            (false, 1) => Some(Generator::U),
            _ => None,
        },
        RingKind::EvenIntegral => match (m.a, m.w, m.power) {
            (true, false, 0) => Some(Generator::A),
            (false, true, 0) => Some(Generator::W),
            (false, false, 1) => Some(Generator::Theta),
            _ => None,
        },
    }
}

fn generator_monomial(kind: RingKind, g: Generator) -> Monomial {
    match (kind, g) {
        (RingKind::OddU, Generator::A) => Monomial {
            a: true,
            w: false,
            power: 0,
        },
        (RingKind::OddU, Generator::U) => Monomial {
            a: false,
            w: false,
            power: 1,
        },
        (RingKind::EvenIntegral, Generator::A) => Monomial {
            a: true,
            w: false,
            power: 0,
        },
        (RingKind::EvenIntegral, Generator::W) => Monomial {
            a: false,
            w: true,
            power: 0,
        },
        (RingKind::EvenIntegral, Generator::Theta) => Monomial {
            a: false,
            w: false,
            power: 1,
        },
        _ => unreachable!("generator not available in this presentation"),
    }
}

fn generator_parity(n: usize, kind: RingKind, g: Generator) -> bool {
    shifted_parity(n, kind, &generator_monomial(kind, g))
}

/// Circle operator on the generators.
fn delta_generator(n: usize, spec: CoefficientSpec, kind: RingKind, g: Generator) -> RingElement {
    match (kind, g) {
        (RingKind::EvenIntegral, Generator::W) => RingElement::identity(n, spec),
        _ => RingElement::zero(n, spec),
    }
}

/// Bracket table on ordered generator pairs.
fn bracket_generators(
    n: usize,
    spec: CoefficientSpec,
    kind: RingKind,
    g: Generator,
    h: Generator,
) -> Result<RingElement> {
    use Generator::*;
    let e = RingElement::identity(n, spec);
    let zero = RingElement::zero(n, spec);
    Ok(match kind {
        RingKind::OddU => match (g, h) {
            (A, U) => e.neg(),
            (U, A) => e,
            _ => zero,
        },
        RingKind::EvenIntegral => {
            let a = RingElement::generator(n, spec, A)?;
            let theta = RingElement::generator(n, spec, Theta)?;
            let k = KScalar::symbol_k();
            match (g, h) {
                (A, W) => a.neg(),
                (W, A) => a,
                (W, Theta) => theta.scale(&k)?.neg(),
                (Theta, W) => theta.scale(&k)?,
                _ => zero,
            }
        }
    })
}

/// `{g, m}` for a single generator `g` against a basis monomial, by the
/// Leibniz rule `{g, h*Z} = {g,h}*Z + (-1)^{|h|(|g|+1)} h*{g,Z}`.
fn bracket_generator_monomial(
    n: usize,
    spec: CoefficientSpec,
    kind: RingKind,
    g: Generator,
    m: &Monomial,
) -> Result<RingElement> {
    if *m == Monomial::E {
        return Ok(RingElement::zero(n, spec));
    }
    let (h, rest) = strip_generator(kind, m);
    if rest == Monomial::E {
        return bracket_generators(n, spec, kind, g, h);
    }
    let h_elem = RingElement::generator(n, spec, h)?;
    let rest_elem = RingElement::monomial(n, spec, rest, KScalar::one())?;
    let first = bracket_generators(n, spec, kind, g, h)?.product(&rest_elem)?;
    let inner = bracket_generator_monomial(n, spec, kind, g, &rest)?;
    let sign_exp = generator_parity(n, kind, h) && !generator_parity(n, kind, g);
    let second = h_elem.product(&inner)?;
    let second = if sign_exp { second.neg() } else { second };
    first.add(&second)
}

/// Split a non-identity monomial as (leading generator, remainder).
fn strip_generator(kind: RingKind, m: &Monomial) -> (Generator, Monomial) {
    if m.a {
        (Generator::A, Monomial { a: false, ..*m })
    } else if m.w {
        (Generator::W, Monomial { w: false, ..*m })
    } else {
        let g = match kind {
            RingKind::OddU => Generator::U,
            RingKind::EvenIntegral => Generator::Theta,
        };
        (
            g,
            Monomial {
                power: m.power - 1,
                ..*m
            },
        )
    }
}

fn delta_recursive_monomial(
    n: usize,
    spec: CoefficientSpec,
    kind: RingKind,
    m: &Monomial,
) -> Result<RingElement> {
    if *m == Monomial::E {
        return Ok(RingElement::zero(n, spec));
    }
    let (g, rest) = strip_generator(kind, m);
    let g_elem = RingElement::generator(n, spec, g)?;
    let rest_elem = RingElement::monomial(n, spec, rest, KScalar::one())?;
    // Delta(g * rest) = Delta(g)*rest + (-1)^{|g|} g*Delta(rest)
    //                   + (-1)^{|g|} {g, rest}
    let t1 = delta_generator(n, spec, kind, g).product(&rest_elem)?;
    let t2 = g_elem.product(&delta_recursive_monomial(n, spec, kind, &rest)?)?;
    let t3 = bracket_generator_monomial(n, spec, kind, g, &rest)?;
    let signed = t2.add(&t3)?;
    let signed = if generator_parity(n, kind, g) {
        signed.neg()
    } else {
        signed
    };
    t1.add(&signed)
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let name = m.name(self.kind);
                if name == "E" {
                    return c.to_string();
                }
                match c.to_string().as_str() {
                    "1" => name,
                    "-1" => format!("-{name}"),
                    s if s.contains(' ') || s.contains('k') => format!("({s})*{name}"),
                    s => format!("{s}*{name}"),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
