//! Piecewise phase-space state functions, their normalization, checks of
//! the turning-point connection and the local quasi-classicality measures.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{phase_anchors, phase_map, potential_at, reduced_action, RegionTag};
use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate, integrate_sine_substituted, QuadratureConfig};
use crate::potential::{Bound, PotentialModel, Side};
use crate::quantizer::EnergyLevel;

/// Tails are integrated until `|Psi|^2` has fallen to this fraction of its
/// turning-point value.
pub const TAIL_FRACTION: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u32) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// A solved level together with everything needed to sample its state.
#[derive(Debug, Clone)]
pub struct StateFunction {
    pub level: EnergyLevel,
    /// `phi2 - phi1 = pi (n + 1/2)`.
    pub anchors: (f64, f64),
    /// Anchor wavenumber `pi (n + 1/2) / (x2 - x1)`.
    pub wavenumber: Option<f64>,
    pub normalization_paper: Option<f64>,
    /// Always positive.
    pub normalization_numeric: f64,
    pub parity: Parity,
    /// Integration extent of the forbidden tails.
    pub extent: (f64, f64),
    potential: PotentialModel,
    quadrature: QuadratureConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionSample {
    pub x: f64,
    pub phi: f64,
    pub psi: f64,
    pub dpsi_dphi: f64,
    pub region: RegionTag,
}

/// Branch value and `d/dphi` of the unnormalized state.
pub fn branch(n: u32, phi: f64, region: RegionTag) -> (f64, f64) {
    let (phi1, phi2) = phase_anchors(n);
    match region {
        RegionTag::LeftForbidden => {
            let v = (phi - phi1).exp();
            (v, v)
        }
        RegionTag::Allowed => {
            let a = phi - phi1 - FRAC_PI_4;
            (SQRT_2 * a.cos(), -SQRT_2 * a.sin())
        }
        RegionTag::RightForbidden => {
            let v = Parity::of(n).sign() * (phi2 - phi).exp();
            (v, -v)
        }
    }
}

fn check_solved(level: &EnergyLevel) -> Result<()> {
    let ok = level.energy.is_finite() && level.residual.is_finite() && level.residual <= 1e-8 && level.region.width() > 0.0;
    if ok {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "level n = {} is not a solved level (E = {}, residual = {}, region width = {})",
            level.n,
            level.energy,
            level.residual,
            level.region.width()
        )))
    }
}

/// Walks from a turning point into the forbidden region until the decay
/// exponent reaches `target` or a hard domain end is met.
fn tail_extent(
    potential: &PotentialModel,
    energy: f64,
    tp: f64,
    side: Side,
    target: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let dir = if side == Side::Left { -1.0 } else { 1.0 };
    let limit = match potential.domain().bound(side) {
        Bound::Cutoff(_) => None,
        Bound::Closed(v) | Bound::Open(v) => Some(v),
    };
    let past = |x: f64| limit.is_some_and(|l| dir * (x - l) >= 0.0);
    if past(tp) {
        return Ok(tp);
    }
    let mut x = tp;
    let mut step = 0.05 * scale;
    let mut decay = 0.0;
    for _ in 0..400 {
        let mut next = x + dir * step;
        if past(next) {
            next = limit.expect("past() implies a limit");
        }
        for probe in [0.5 * (x + next), next] {
            if energy - potential_at(potential, probe) > 0.0 {
                return Err(Error::Normalization(format!(
                    "forbidden tail of E = {energy} does not decay: motion resumes near x = {probe}"
                )));
            }
        }
        let (a, b) = if dir < 0.0 { (next, x) } else { (x, next) };
        decay += reduced_action(potential, energy, a, b, cfg)?;
        x = next;
        if decay >= target || past(x) {
            return Ok(x);
        }
        step *= 1.5;
    }
    Err(Error::Normalization(format!("forbidden tail of E = {energy} never reaches the decay target")))
}

struct Extent {
    left: f64,
    right: f64,
}

fn tails(potential: &PotentialModel, level: &EnergyLevel, cfg: &QuadratureConfig) -> Result<Extent> {
    let target = 0.5 * (1.0 / TAIL_FRACTION).ln();
    let r = &level.region;
    Ok(Extent {
        left: tail_extent(potential, level.energy, r.x1, Side::Left, target, r.width(), cfg)?,
        right: tail_extent(potential, level.energy, r.x2, Side::Right, target, r.width(), cfg)?,
    })
}

/// `int |branch|^2 dx` over the allowed region and both tails.
fn branch_norm_squared(potential: &PotentialModel, level: &EnergyLevel, ext: &Extent, cfg: &QuadratureConfig) -> Result<f64> {
    check_solved(level)?;
    let e = level.energy;
    let r = level.region;
    let (phi1, _) = phase_anchors(level.n);
    let mut failure: Option<Error> = None;
    let mut record = |res: Result<f64>| match res {
        Ok(v) => v,
        Err(err) => {
            failure.get_or_insert(err);
            0.0
        }
    };
    let left = if ext.left < r.x1 {
        integrate(
            |x| {
                let d = record(reduced_action(potential, e, x, r.x1, cfg));
                (-2.0 * d).exp()
            },
            ext.left,
            r.x1,
            cfg,
        )?
        .value
    } else {
        0.0
    };
    let right = if ext.right > r.x2 {
        integrate(
            |x| {
                let d = record(reduced_action(potential, e, r.x2, x, cfg));
                (-2.0 * d).exp()
            },
            r.x2,
            ext.right,
            cfg,
        )?
        .value
    } else {
        0.0
    };
    let middle = integrate_sine_substituted(
        |x| {
            let phi = record(phase_map(potential, level, x, cfg).map(|p| p.phi));
            2.0 * (phi - phi1 - FRAC_PI_4).cos().powi(2)
        },
        r.x1,
        r.x2,
        cfg,
    )?
    .value;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(left + middle + right)
}

/// Constant `N > 0` with `int |N branch|^2 dx = 1`.
pub fn numeric_normalization(potential: &PotentialModel, level: &EnergyLevel, cfg: &QuadratureConfig) -> Result<f64> {
    check_solved(level)?;
    let ext = tails(potential, level, cfg)?;
    norm_from(branch_norm_squared(potential, level, &ext, cfg)?)
}

fn norm_from(total: f64) -> Result<f64> {
    if total > 0.0 && total.is_finite() {
        Ok(total.sqrt().recip())
    } else {
        Err(Error::Normalization(format!("state norm {total} is not positive and finite")))
    }
}

/// `C_n = sqrt(k_n / (pi (n + 1/2) + 1))`.
pub fn paper_normalization(n: u32, wavenumber: f64) -> Result<f64> {
    if !(wavenumber > 0.0 && wavenumber.is_finite()) {
        return Err(Error::Usage(format!("C_n needs a positive wavenumber, got {wavenumber}")));
    }
    Ok((wavenumber / (PI * (n as f64 + 0.5) + 1.0)).sqrt())
}

/// `sqrt(2 k / (pi (n + 1/2) + 1)) cos(k x + pi n / 2)`, with `x` measured
/// from the centre of the allowed window.
pub fn standing_wave_value(n: u32, wavenumber: f64, x: f64) -> Result<f64> {
    let c = paper_normalization(n, wavenumber)?;
    Ok(SQRT_2 * c * (wavenumber * x + 0.5 * PI * n as f64).cos())
}

/// Standing-wave form of a level whose momentum is constant across its
/// allowed region; `x` is an absolute position.
pub fn standing_wave(potential: &PotentialModel, level: &EnergyLevel, x: f64) -> Result<f64> {
    check_solved(level)?;
    let r = level.region;
    let samples: Vec<f64> = (1..16)
        .map(|i| r.x1 + r.width() * i as f64 / 16.0)
        .map(|xi| potential.local_momentum(level.energy, xi).map(|p| p.magnitude))
        .collect::<Result<_>>()?;
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(hi - lo <= 1e-12 * hi) {
        return Err(Error::Usage(format!(
            "no standing-wave wavenumber for level n = {}: momentum varies over [{lo}, {hi}] in the allowed region",
            level.n
        )));
    }
    let k = PI * (level.n as f64 + 0.5) / r.width();
    standing_wave_value(level.n, k, x - r.midpoint())
}

impl StateFunction {
    pub fn build(potential: &PotentialModel, level: &EnergyLevel, cfg: &QuadratureConfig) -> Result<Self> {
        check_solved(level)?;
        cfg.validate()?;
        let ext = tails(potential, level, cfg)?;
        let normalization_numeric = norm_from(branch_norm_squared(potential, level, &ext, cfg)?)?;
        let wavenumber = Some(PI * (level.n as f64 + 0.5) / level.region.width());
        let normalization_paper = wavenumber.map(|k| paper_normalization(level.n, k)).transpose()?;
        Ok(Self {
            level: *level,
            anchors: phase_anchors(level.n),
            wavenumber,
            normalization_paper,
            normalization_numeric,
            parity: Parity::of(level.n),
            extent: (ext.left, ext.right),
            potential: potential.clone(),
            quadrature: *cfg,
        })
    }

    pub fn potential(&self) -> &PotentialModel {
        &self.potential
    }

    /// `C_n / N`, for auditing the closed-form constant.
    pub fn paper_ratio(&self) -> Option<f64> {
        self.normalization_paper.map(|c| c / self.normalization_numeric)
    }

    pub fn evaluate(&self, x: f64) -> Result<WavefunctionSample> {
        evaluate_state(self, x)
    }

    /// `int |Psi|^2 dx` over `[extent.0 - pad, extent.1 + pad]`, clipped
    /// to hard domain ends.
    pub fn norm_squared(&self, pad: f64) -> Result<f64> {
        let d = self.potential.domain();
        let clip = |x: f64, side: Side| match d.bound(side) {
            Bound::Cutoff(_) => x,
            Bound::Closed(v) | Bound::Open(v) => {
                if side == Side::Left {
                    x.max(v)
                } else {
                    x.min(v)
                }
            }
        };
        let ext = Extent {
            left: clip(self.extent.0 - pad, Side::Left),
            right: clip(self.extent.1 + pad, Side::Right),
        };
        Ok(self.normalization_numeric.powi(2) * branch_norm_squared(&self.potential, &self.level, &ext, &self.quadrature)?)
    }
}

/// `N * branch(phi(x))` with the phase from the classical phase map.
pub fn evaluate_state(state: &StateFunction, x: f64) -> Result<WavefunctionSample> {
    let p = phase_map(&state.potential, &state.level, x, &state.quadrature)?;
    let (v, dv) = branch(state.level.n, p.phi, p.region);
    let norm = state.normalization_numeric;
    Ok(WavefunctionSample {
        x,
        phi: p.phi,
        psi: norm * v,
        dpsi_dphi: norm * dv,
        region: p.region,
    })
}

fn allowed_momentum(potential: &PotentialModel, energy: f64, x: f64) -> Result<f64> {
    let v = potential.evaluate(x)?;
    let gap = energy - v;
    let scale = (2.0 * potential.mass() * energy.abs().max(v.abs())).sqrt();
    if gap <= 0.0 {
        return Err(Error::SingularPoint {
            x,
            reason: format!("not classically allowed at E = {energy}"),
        });
    }
    let p = (2.0 * potential.mass() * gap).sqrt();
    if p < 1e-12 * scale {
        return Err(Error::SingularPoint {
            x,
            reason: format!("momentum {p} is too close to a turning point"),
        });
    }
    Ok(p)
}

/// Central difference of `V` with step `1e-6` of the domain window,
/// one-sided against a hard end.
fn fd_derivative(potential: &PotentialModel, x: f64) -> Result<f64> {
    let (lo, hi) = potential.domain().window();
    let h = 1e-6 * (hi - lo);
    match (potential.evaluate(x - h), potential.evaluate(x + h)) {
        (Ok(a), Ok(b)) => Ok((b - a) / (2.0 * h)),
        (Err(_), Ok(b)) => Ok((b - potential.evaluate(x)?) / h),
        (Ok(a), Err(_)) => Ok((potential.evaluate(x)? - a) / h),
        (Err(e), Err(_)) => Err(e),
    }
}

fn slope(potential: &PotentialModel, x: f64) -> Result<f64> {
    match potential.derivative(x)? {
        Some(d) => Ok(d),
        None => fd_derivative(potential, x),
    }
}

/// `epsilon = (hbar / p^2) dp/dx = -hbar m V' / p^3`.
pub fn epsilon_parameter(potential: &PotentialModel, energy: f64, x: f64) -> Result<f64> {
    let p = allowed_momentum(potential, energy, x)?;
    Ok(-potential.hbar() * potential.mass() * slope(potential, x)? / p.powi(3))
}

/// As [`epsilon_parameter`] with `V'` always from finite differences.
pub fn epsilon_parameter_fd(potential: &PotentialModel, energy: f64, x: f64) -> Result<f64> {
    let p = allowed_momentum(potential, energy, x)?;
    Ok(-potential.hbar() * potential.mass() * fd_derivative(potential, x)? / p.powi(3))
}

/// `delta = 1/2 d(epsilon)/d(phi) + epsilon^2 / 4`, with
/// `d/dphi = (hbar / p) d/dx` and a central difference in `x`.
pub fn delta_functional(potential: &PotentialModel, energy: f64, x: f64) -> Result<f64> {
    let p = allowed_momentum(potential, energy, x)?;
    let hbar = potential.hbar();
    let dv = slope(potential, x)?.abs();
    let mut length = hbar / p;
    if dv > 0.0 {
        length = length.min(p * p / (2.0 * potential.mass() * dv));
    }
    let h = 1e-4 * length;
    let eps = epsilon_parameter(potential, energy, x)?;
    let de_dx = (epsilon_parameter(potential, energy, x + h)? - epsilon_parameter(potential, energy, x - h)?) / (2.0 * h);
    Ok(0.5 * (hbar / p) * de_dx + 0.25 * eps * eps)
}

/// Outcome of matching the three branches at both anchors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionReport {
    pub n: u32,
    /// `|dPsi|` at `phi1`, `phi2`.
    pub value_mismatch: [f64; 2],
    /// `|d(dPsi/dphi)|` at `phi1`, `phi2`.
    pub derivative_mismatch: [f64; 2],
    /// Distance of the recovered `(A, B)` from the connection formula
    /// applied to the recovered `(C, D)`, at each anchor.
    pub coefficient_residual: [f64; 2],
    pub max_residual: f64,
}

/// Coefficients of `A e^{i chi} + B e^{-i chi}` from two real samples.
fn oscillating_coefficients(chi: [f64; 2], f: [f64; 2]) -> (Complex64, Complex64) {
    let e = |c: f64| Complex64::from_polar(1.0, c);
    let det = e(chi[0]) * e(-chi[1]) - e(-chi[0]) * e(chi[1]);
    let a = (f[0] * e(-chi[1]) - f[1] * e(-chi[0])) / det;
    let b = (f[1] * e(chi[0]) - f[0] * e(chi[1])) / det;
    (a, b)
}

/// Coefficients of `C e^{-chi} + D e^{chi}` from two samples.
fn decaying_coefficients(chi: [f64; 2], g: [f64; 2]) -> (f64, f64) {
    let det = (-chi[0]).exp() * chi[1].exp() - chi[0].exp() * (-chi[1]).exp();
    let c = (g[0] * chi[1].exp() - g[1] * chi[0].exp()) / det;
    let d = (g[1] * (-chi[0]).exp() - g[0] * (-chi[1]).exp()) / det;
    (c, d)
}

/// Value and derivative continuity of the branches at both anchors, and
/// the connection formula `A = (C e^{i pi/4} + D e^{-i pi/4}) / sqrt 2`,
/// `B = (C e^{-i pi/4} + D e^{i pi/4}) / sqrt 2` for coefficients recovered
/// from the branches. `chi` is the local phase distance from the anchor,
/// increasing into the forbidden side.
pub fn connection_check(n: u32) -> ConnectionReport {
    let (phi1, phi2) = phase_anchors(n);
    let mut value = [0.0; 2];
    let mut deriv = [0.0; 2];
    let mut coeff = [0.0; 2];
    let samples = [0.3, 0.7];
    for (k, (anchor, outer, dir)) in [
        (phi1, RegionTag::LeftForbidden, -1.0),
        (phi2, RegionTag::RightForbidden, 1.0),
    ]
    .into_iter()
    .enumerate()
    {
        let (vm, dm) = branch(n, anchor, RegionTag::Allowed);
        let (vo, d_o) = branch(n, anchor, outer);
        value[k] = (vm - vo).abs();
        deriv[k] = (dm - d_o).abs();
        // allowed side lies at chi < 0, forbidden at chi > 0
        let f = samples.map(|c| branch(n, anchor - dir * c, RegionTag::Allowed).0);
        let g = samples.map(|c| branch(n, anchor + dir * c, outer).0);
        let (a, b) = oscillating_coefficients(samples.map(|c| -c), f);
        let (c, d) = decaying_coefficients(samples, g);
        let w = Complex64::from_polar(1.0, FRAC_PI_4);
        let a_pred = (c * w + d * w.conj()) / SQRT_2;
        let b_pred = (c * w.conj() + d * w) / SQRT_2;
        coeff[k] = (a - a_pred).norm().max((b - b_pred).norm());
    }
    let max_residual = value.iter().chain(&deriv).chain(&coeff).cloned().fold(0.0, f64::max);
    ConnectionReport {
        n,
        value_mismatch: value,
        derivative_mismatch: deriv,
        coefficient_residual: coeff,
        max_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::{solve_level, SolverConfig};

    fn qc() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn closed_form_constant_values() {
        assert!((paper_normalization(0, 1.0).unwrap() - 0.623_686_2).abs() < 1e-6);
        let c3 = paper_normalization(3, 2.0).unwrap();
        assert!((c3 - (2.0 / (3.5 * PI + 1.0)).sqrt()).abs() < 1e-15);
        assert!(paper_normalization(0, 0.0).is_err());
    }

    #[test]
    fn standing_wave_parity_at_origin() {
        let k = 1.3;
        let c0 = paper_normalization(0, k).unwrap();
        assert!((standing_wave_value(0, k, 0.0).unwrap() - SQRT_2 * c0).abs() < 1e-15);
        assert!(standing_wave_value(1, k, 0.0).unwrap().abs() < 1e-15);
        for x in [0.1, 0.4, 0.9] {
            let (a, b) = (standing_wave_value(2, k, x).unwrap(), standing_wave_value(2, k, -x).unwrap());
            assert!((a - b).abs() < 1e-14);
            let (a, b) = (standing_wave_value(3, k, x).unwrap(), standing_wave_value(3, k, -x).unwrap());
            assert!((a + b).abs() < 1e-14);
        }
    }

    #[test]
    fn branches_meet_at_anchors() {
        for n in 0..12 {
            let r = connection_check(n);
            assert!(r.value_mismatch.iter().all(|v| *v < 1e-12), "{r:?}");
            assert!(r.derivative_mismatch.iter().all(|v| *v < 1e-12), "{r:?}");
            assert!(r.max_residual < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn coefficient_recovery_round_trip() {
        let (a, b) = oscillating_coefficients([-0.3, -0.7], [0.3f64.cos() * 2.0, 0.7f64.cos() * 2.0]);
        assert!((a - 1.0).norm() < 1e-13 && (b - 1.0).norm() < 1e-13);
        let (c, d) = decaying_coefficients([0.3, 0.7], [2.0 * (-0.3f64).exp() + 0.5 * 0.3f64.exp(), 2.0 * (-0.7f64).exp() + 0.5 * 0.7f64.exp()]);
        assert!((c - 2.0).abs() < 1e-13 && (d - 0.5).abs() < 1e-13);
    }

    #[test]
    fn harmonic_ground_state_is_normalized() {
        let v = PotentialModel::harmonic(1.0).unwrap();
        let level = solve_level(&v, 0, &SolverConfig::default()).unwrap();
        let s = StateFunction::build(&v, &level, &qc()).unwrap();
        assert!(s.normalization_numeric > 0.0);
        assert!((s.norm_squared(0.0).unwrap() - 1.0).abs() < 1e-10);
        assert!(s.paper_ratio().unwrap() > 0.0);
    }

    #[test]
    fn free_particle_has_no_epsilon_or_delta() {
        let v = PotentialModel::free(crate::potential::Domain::cutoff(-5.0, 5.0)).unwrap();
        for x in [-2.0, 0.0, 3.0] {
            assert_eq!(epsilon_parameter(&v, 1.0, x).unwrap(), 0.0);
            assert_eq!(delta_functional(&v, 1.0, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn diagnostics_refuse_forbidden_points() {
        let v = PotentialModel::harmonic(1.0).unwrap();
        assert!(matches!(epsilon_parameter(&v, 0.5, 1.5), Err(Error::SingularPoint { .. })));
        assert!(matches!(epsilon_parameter(&v, 0.5, 1.0), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn unsolved_level_is_a_usage_error() {
        let v = PotentialModel::harmonic(1.0).unwrap();
        let mut level = solve_level(&v, 0, &SolverConfig::default()).unwrap();
        level.residual = 1.0;
        assert!(matches!(StateFunction::build(&v, &level, &qc()), Err(Error::Usage(_))));
    }
}
