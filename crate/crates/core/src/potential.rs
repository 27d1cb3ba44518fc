//! Potentials, physical constants and the local momentum of the
//! canonical-form equation `psi'' + (k^2 - U^2(x)) psi = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant and particle mass in working units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        let c = Self { hbar, mass };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite() && self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "hbar and mass must be positive and finite (hbar = {}, mass = {})",
                self.hbar, self.mass
            )));
        }
        Ok(())
    }
}

/// One end of a potential domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    /// Inclusive hard end (tabulated data, explicit boxes).
    Closed(f64),
    /// Excluded end point where the potential is singular (`r = 0`, `theta = 0`).
    Open(f64),
    /// Scan cutoff of a half-infinite side; the potential is defined beyond it.
    Cutoff(f64),
}

impl Bound {
    pub fn value(self) -> f64 {
        match self {
            Bound::Closed(v) | Bound::Open(v) | Bound::Cutoff(v) => v,
        }
    }

    pub fn is_cutoff(self) -> bool {
        matches!(self, Bound::Cutoff(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Bound,
    pub hi: Bound,
}

impl Domain {
    /// Both sides half-infinite, scanned on `[lo, hi]`.
    pub fn cutoff(lo: f64, hi: f64) -> Self {
        Self {
            lo: Bound::Cutoff(lo),
            hi: Bound::Cutoff(hi),
        }
    }

    /// Hard walls at both ends.
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo: Bound::Closed(lo),
            hi: Bound::Closed(hi),
        }
    }

    /// The radial half-line `(0, r_max]`, open to the right.
    pub fn radial(r_max: f64) -> Self {
        Self {
            lo: Bound::Open(0.0),
            hi: Bound::Cutoff(r_max),
        }
    }

    pub fn window(&self) -> (f64, f64) {
        (self.lo.value(), self.hi.value())
    }

    pub fn bound(&self, side: Side) -> Bound {
        match side {
            Side::Left => self.lo,
            Side::Right => self.hi,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.lo, Bound::Open(v) if v == 0.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        let lo_ok = match self.lo {
            Bound::Closed(a) => x >= a,
            Bound::Open(a) => x > a,
            Bound::Cutoff(_) => true,
        };
        let hi_ok = match self.hi {
            Bound::Closed(b) => x <= b,
            Bound::Open(b) => x < b,
            Bound::Cutoff(_) => true,
        };
        lo_ok && hi_ok
    }

    /// Scan interval with open ends pulled inside the domain.
    pub fn scan_window(&self) -> (f64, f64) {
        let (lo, hi) = self.window();
        let nudge = 1e-9 * (hi - lo);
        let lo = if matches!(self.lo, Bound::Open(_)) { lo + nudge } else { lo };
        let hi = if matches!(self.hi, Bound::Open(_)) { hi - nudge } else { hi };
        (lo, hi)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let left = match self.lo {
            Bound::Closed(a) => format!("[{a}"),
            Bound::Open(a) => format!("({a}"),
            Bound::Cutoff(a) => format!("(-inf <{a}>"),
        };
        let right = match self.hi {
            Bound::Closed(b) => format!("{b}]"),
            Bound::Open(b) => format!("{b})"),
            Bound::Cutoff(b) => format!("<{b}> +inf)"),
        };
        write!(f, "{left}, {right}")
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCurve {
    xs: Vec<f64>,
    vs: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedCurve {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::InvalidPotential(format!(
                "tabulated potential needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidPotential("tabulated samples must be finite".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidPotential(
                "tabulated sample positions must be strictly increasing".into(),
            ));
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let vs: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let secant: Vec<f64> = (0..n - 1).map(|k| (vs[k + 1] - vs[k]) / h[k]).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secant[0];
        slopes[n - 1] = secant[n - 2];
        for k in 1..n - 1 {
            let (d0, d1) = (secant[k - 1], secant[k]);
            if d0 * d1 > 0.0 {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        Ok(Self { xs, vs, slopes })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.vs.iter().copied())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&xi| xi <= x).clamp(1, n - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.vs[i] + h10 * h * self.slopes[i] + h01 * self.vs[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

/// Built-in potential families.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `m omega^2 x^2 / 2`
    Harmonic { omega: f64 },
    /// `slope |x|`
    Linear { slope: f64 },
    /// `D (exp(-2 a x) - 2 exp(-a x))`, minimum `-D` at the origin.
    Morse { depth: f64, range: f64 },
    /// `-Z / r + M^2 / (2 m r^2)` on the radial half-line.
    Coulomb { charge: f64, m_squared: f64 },
    /// `-depth` for `|x| < width / 2`, zero outside.
    SquareWell { depth: f64, width: f64 },
    Tabulated(Arc<TabulatedCurve>),
    /// `M_z^2 / sin^2(theta)` on `(0, pi)`: the barrier of the polar equation
    /// written in 1D form with `E = M^2` and mass 1/2.
    PolarBarrier { mz_squared: f64 },
}

/// A 1D potential bound to its constants and domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel {
    kind: PotentialKind,
    constants: PhysicalConstants,
    domain: Domain,
    /// Squared angular momentum of an added `M^2 / (2 m r^2)` term.
    centrifugal: f64,
}

/// Where a point sits relative to the classical motion at a given energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Motion {
    Allowed,
    Boundary,
    Forbidden,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMomentum {
    /// `sqrt(2 m |E - V(x)|)`
    pub magnitude: f64,
    pub motion: Motion,
}

impl PotentialModel {
    pub fn new(kind: PotentialKind, constants: PhysicalConstants, domain: Domain) -> Result<Self> {
        let model = Self {
            kind,
            constants,
            domain,
            centrifugal: 0.0,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn harmonic(omega: f64) -> Result<Self> {
        let reach = if omega > 0.0 { 10.0 / omega.sqrt() } else { 10.0 };
        Self::new(
            PotentialKind::Harmonic { omega },
            PhysicalConstants::default(),
            Domain::cutoff(-reach, reach),
        )
    }

    pub fn linear(slope: f64) -> Result<Self> {
        Self::new(PotentialKind::Linear { slope }, PhysicalConstants::default(), Domain::cutoff(-10.0, 10.0))
    }

    /// `V = 0` on the given domain.
    pub fn free(domain: Domain) -> Result<Self> {
        Self::new(PotentialKind::Linear { slope: 0.0 }, PhysicalConstants::default(), domain)
    }

    pub fn morse(depth: f64, range: f64) -> Result<Self> {
        let a = if range > 0.0 { range } else { 1.0 };
        Self::new(
            PotentialKind::Morse { depth, range },
            PhysicalConstants::default(),
            Domain::cutoff(-2.0 / a, 30.0 / a),
        )
    }

    pub fn coulomb(charge: f64, m_squared: f64) -> Result<Self> {
        let reach = if charge > 0.0 { 100.0 / charge } else { 100.0 };
        Self::new(
            PotentialKind::Coulomb { charge, m_squared },
            PhysicalConstants::default(),
            Domain::radial(reach),
        )
    }

    pub fn square_well(depth: f64, width: f64) -> Result<Self> {
        let reach = if width > 0.0 { 2.0 * width } else { 1.0 };
        Self::new(
            PotentialKind::SquareWell { depth, width },
            PhysicalConstants::default(),
            Domain::cutoff(-reach, reach),
        )
    }

    /// Tabulated samples; the domain is the closed sample range.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        let curve = TabulatedCurve::new(samples)?;
        let (lo, hi) = curve.range();
        Self::new(
            PotentialKind::Tabulated(Arc::new(curve)),
            PhysicalConstants::default(),
            Domain::closed(lo, hi),
        )
    }

    pub fn polar_barrier(mz_squared: f64) -> Result<Self> {
        Self::new(
            PotentialKind::PolarBarrier { mz_squared },
            PhysicalConstants::default(),
            Domain {
                lo: Bound::Open(0.0),
                hi: Bound::Open(std::f64::consts::PI),
            },
        )
    }

    pub fn with_constants(mut self, constants: PhysicalConstants) -> Result<Self> {
        self.constants = constants;
        self.validate()?;
        Ok(self)
    }

    pub fn with_domain(mut self, domain: Domain) -> Result<Self> {
        self.domain = domain;
        self.validate()?;
        Ok(self)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn constants(&self) -> PhysicalConstants {
        self.constants
    }

    pub fn hbar(&self) -> f64 {
        self.constants.hbar
    }

    pub fn mass(&self) -> f64 {
        self.constants.mass
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn centrifugal(&self) -> f64 {
        self.centrifugal
    }

    fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        let bad = |msg: String| Err(Error::InvalidPotential(msg));
        let finite_positive = |v: f64| v > 0.0 && v.is_finite();
        match &self.kind {
            PotentialKind::Harmonic { omega } if !finite_positive(*omega) => {
                return bad(format!("harmonic omega must be positive, got {omega}"))
            }
            PotentialKind::Linear { slope } if !slope.is_finite() => {
                return bad(format!("linear slope must be finite, got {slope}"))
            }
            PotentialKind::Morse { depth, range } if !(finite_positive(*depth) && finite_positive(*range)) => {
                return bad(format!("morse depth and range must be positive, got D = {depth}, a = {range}"))
            }
            PotentialKind::Coulomb { charge, m_squared } if !(charge.is_finite() && *m_squared >= 0.0 && m_squared.is_finite()) => {
                return bad(format!("coulomb needs finite charge and M^2 >= 0, got Z = {charge}, M^2 = {m_squared}"))
            }
            PotentialKind::SquareWell { depth, width } if !(finite_positive(*depth) && finite_positive(*width)) => {
                return bad(format!("square well depth and width must be positive, got {depth}, {width}"))
            }
            PotentialKind::PolarBarrier { mz_squared } if !(*mz_squared >= 0.0 && mz_squared.is_finite()) => {
                return bad(format!("polar barrier needs M_z^2 >= 0, got {mz_squared}"))
            }
            _ => {}
        }
        let (lo, hi) = self.domain.window();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("domain {} must be a finite, non-empty window", self.domain));
        }
        let needs_radial = self.centrifugal > 0.0 || matches!(self.kind, PotentialKind::Coulomb { .. });
        if needs_radial && (self.domain.lo.is_cutoff() || lo < 0.0) {
            return bad(format!("radial potential needs a domain inside (0, inf), got {}", self.domain));
        }
        match &self.kind {
            PotentialKind::Tabulated(curve) => {
                let (a, b) = curve.range();
                if self.domain.lo.is_cutoff() || self.domain.hi.is_cutoff() || lo < a || hi > b {
                    return bad(format!(
                        "tabulated domain {} must be closed and inside the sample range [{a}, {b}]",
                        self.domain
                    ));
                }
            }
            PotentialKind::PolarBarrier { .. } => {
                if self.domain.lo.is_cutoff() || self.domain.hi.is_cutoff() || lo < 0.0 || hi > std::f64::consts::PI {
                    return bad(format!("polar barrier domain {} must lie in (0, pi)", self.domain));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn base_value(&self, x: f64) -> f64 {
        let m = self.constants.mass;
        match &self.kind {
            PotentialKind::Harmonic { omega } => 0.5 * m * omega * omega * x * x,
            PotentialKind::Linear { slope } => slope * x.abs(),
            PotentialKind::Morse { depth, range } => {
                let e = (-range * x).exp();
                depth * (e * e - 2.0 * e)
            }
            PotentialKind::Coulomb { charge, m_squared } => -charge / x + m_squared / (2.0 * m * x * x),
            PotentialKind::SquareWell { depth, width } => {
                if x.abs() < 0.5 * width {
                    -depth
                } else {
                    0.0
                }
            }
            PotentialKind::Tabulated(curve) => curve.eval(x),
            PotentialKind::PolarBarrier { mz_squared } => {
                if *mz_squared == 0.0 {
                    0.0
                } else {
                    let s = x.sin();
                    mz_squared / (s * s)
                }
            }
        }
    }

    fn base_derivative(&self, x: f64) -> Option<f64> {
        let m = self.constants.mass;
        match &self.kind {
            PotentialKind::Harmonic { omega } => Some(m * omega * omega * x),
            PotentialKind::Linear { slope } => {
                if *slope == 0.0 {
                    Some(0.0)
                } else if x == 0.0 {
                    None
                } else {
                    Some(slope * x.signum())
                }
            }
            PotentialKind::Morse { depth, range } => {
                let e = (-range * x).exp();
                Some(2.0 * depth * range * (e - e * e))
            }
            PotentialKind::Coulomb { charge, m_squared } => Some(charge / (x * x) - m_squared / (m * x * x * x)),
            PotentialKind::SquareWell { width, .. } => {
                if x.abs() == 0.5 * width {
                    None
                } else {
                    Some(0.0)
                }
            }
            PotentialKind::Tabulated(_) => None,
            PotentialKind::PolarBarrier { mz_squared } => {
                let s = x.sin();
                Some(-2.0 * mz_squared * x.cos() / (s * s * s))
            }
        }
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                x,
                domain: self.domain.to_string(),
            })
        }
    }

    /// `V(x)`, including any centrifugal term.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let mut v = self.base_value(x);
        if self.centrifugal > 0.0 {
            v += self.centrifugal / (2.0 * self.constants.mass * x * x);
        }
        Ok(v)
    }

    /// Analytic `dV/dx` when the family provides one at `x`.
    pub fn derivative(&self, x: f64) -> Result<Option<f64>> {
        self.check(x)?;
        Ok(self.base_derivative(x).map(|d| {
            if self.centrifugal > 0.0 {
                d - self.centrifugal / (self.constants.mass * x * x * x)
            } else {
                d
            }
        }))
    }

    pub fn local_momentum(&self, energy: f64, x: f64) -> Result<LocalMomentum> {
        let gap = energy - self.evaluate(x)?;
        let motion = if gap > 0.0 {
            Motion::Allowed
        } else if gap < 0.0 {
            Motion::Forbidden
        } else {
            Motion::Boundary
        };
        Ok(LocalMomentum {
            magnitude: (2.0 * self.constants.mass * gap.abs()).sqrt(),
            motion,
        })
    }

    /// Adds `M^2 / (2 m r^2)` to a potential on the radial half-line.
    pub fn effective_radial(&self, m_squared: f64) -> Result<Self> {
        if !self.domain.is_radial() {
            return Err(Error::Usage(format!(
                "effective radial potential needs a domain (0, r_max], got {}",
                self.domain
            )));
        }
        if !(m_squared >= 0.0 && m_squared.is_finite()) {
            return Err(Error::Usage(format!("M^2 must be non-negative, got {m_squared}")));
        }
        let mut out = self.clone();
        out.centrifugal += m_squared;
        out.validate()?;
        Ok(out)
    }

    /// Value approached at one end of the domain: the far-field limit for a
    /// cutoff side, the singular limit for an open end, the wall value for a
    /// closed end.
    pub fn edge_limit(&self, side: Side) -> f64 {
        match self.domain.bound(side) {
            Bound::Closed(a) => self.evaluate(a).unwrap_or(f64::INFINITY),
            Bound::Open(a) => self.singular_limit(a),
            Bound::Cutoff(_) => self.far_field(side),
        }
    }

    /// Lowest energy at which motion can escape through a domain end.
    pub fn escape_energy(&self) -> f64 {
        self.edge_limit(Side::Left).min(self.edge_limit(Side::Right))
    }

    fn singular_limit(&self, a: f64) -> f64 {
        match &self.kind {
            // the polar ends bound the coordinate itself; nothing escapes there
            PotentialKind::PolarBarrier { .. } => f64::INFINITY,
            PotentialKind::Coulomb { charge, m_squared } if a == 0.0 => {
                if m_squared + self.centrifugal > 0.0 || *charge < 0.0 {
                    f64::INFINITY
                } else if *charge > 0.0 {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
            _ if a == 0.0 && self.centrifugal > 0.0 => f64::INFINITY,
            _ => self.base_value(a),
        }
    }

    fn far_field(&self, side: Side) -> f64 {
        match &self.kind {
            PotentialKind::Harmonic { .. } => f64::INFINITY,
            PotentialKind::Linear { slope } => {
                if *slope > 0.0 {
                    f64::INFINITY
                } else if *slope < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
            PotentialKind::Morse { .. } => match side {
                Side::Left => f64::INFINITY,
                Side::Right => 0.0,
            },
            PotentialKind::Coulomb { .. } | PotentialKind::SquareWell { .. } => 0.0,
            // validation keeps these off cutoff domains
            PotentialKind::Tabulated(_) | PotentialKind::PolarBarrier { .. } => f64::NAN,
        }
    }
}

/// JSON potential descriptor as read from a potential file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialDescriptor {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
    /// Treat both domain ends as hard walls.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub walls: bool,
}

impl PotentialDescriptor {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn param(&self, names: &[&str]) -> Result<f64> {
        names
            .iter()
            .find_map(|n| self.params.get(*n).copied())
            .ok_or_else(|| Error::InvalidPotential(format!("{} potential needs parameter \"{}\"", self.kind, names[0])))
    }

    fn param_or(&self, names: &[&str], default: f64) -> f64 {
        names.iter().find_map(|n| self.params.get(*n).copied()).unwrap_or(default)
    }

    fn check_params(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidPotential(format!(
                "unknown parameter \"{k}\" for {} potential",
                self.kind
            ))),
            None => Ok(()),
        }
    }

    pub fn to_model(&self) -> Result<PotentialModel> {
        let base = match self.kind.as_str() {
            "harmonic" => {
                self.check_params(&["omega"])?;
                PotentialModel::harmonic(self.param(&["omega"])?)?
            }
            "linear" => {
                self.check_params(&["slope"])?;
                PotentialModel::linear(self.param_or(&["slope"], 1.0))?
            }
            "morse" => {
                self.check_params(&["depth", "D", "range", "a"])?;
                PotentialModel::morse(self.param(&["depth", "D"])?, self.param(&["range", "a"])?)?
            }
            "coulomb" => {
                self.check_params(&["charge", "Z", "m_squared", "M2"])?;
                PotentialModel::coulomb(self.param_or(&["charge", "Z"], 1.0), self.param_or(&["m_squared", "M2"], 0.0))?
            }
            "square_well" => {
                self.check_params(&["depth", "width"])?;
                PotentialModel::square_well(self.param(&["depth"])?, self.param(&["width"])?)?
            }
            "tabulated" => {
                self.check_params(&[])?;
                let samples = self
                    .samples
                    .as_ref()
                    .ok_or_else(|| Error::InvalidPotential("tabulated potential needs \"samples\"".into()))?;
                let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s[0], s[1])).collect();
                PotentialModel::tabulated(&pairs)?
            }
            other => {
                return Err(Error::InvalidPotential(format!(
                    "unknown potential type \"{other}\" (expected harmonic, linear, morse, coulomb, square_well or tabulated)"
                )))
            }
        };
        let constants = PhysicalConstants::new(self.hbar.unwrap_or(1.0), self.mass.unwrap_or(1.0))?;
        let mut model = base.with_constants(constants)?;
        let tabulated = matches!(model.kind, PotentialKind::Tabulated(_));
        if let Some([lo, hi]) = self.domain {
            let domain = if self.walls || tabulated {
                Domain::closed(lo, hi)
            } else if lo == 0.0 {
                Domain::radial(hi)
            } else {
                Domain::cutoff(lo, hi)
            };
            model = model.with_domain(domain)?;
        } else if self.walls {
            let (lo, hi) = model.domain.window();
            model = model.with_domain(Domain::closed(lo, hi))?;
        }
        Ok(model)
    }
}
