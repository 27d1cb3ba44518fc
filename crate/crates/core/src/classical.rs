//! Turning points, the reduced classical action `W = int p dx` and the
//! phase variable `phi = W / hbar`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate, integrate_sine_substituted, integrate_sine_window, QuadratureConfig};
use crate::numerics::roots::{bisect_then_brent, golden_minimize};
use crate::potential::{Bound, PotentialModel};
use crate::quantizer::EnergyLevel;

/// How an allowed interval ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    /// `E = V(x)` at an interior point.
    TurningPoint,
    /// The allowed motion runs into the scan window edge.
    Wall,
}

/// An interval `[x1, x2]` with `E - V >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRegion {
    pub x1: f64,
    pub x2: f64,
    /// Width of the scan bracket each end was refined from.
    pub bracket_width: f64,
    pub left: Edge,
    pub right: Edge,
}

impl ClassicalRegion {
    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.x1 + self.x2)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x1 && x <= self.x2
    }

    pub fn has_two_turning_points(&self) -> bool {
        self.left == Edge::TurningPoint && self.right == Edge::TurningPoint
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurningPointReport {
    pub energy: f64,
    /// Disjoint allowed regions in increasing `x`.
    pub regions: Vec<ClassicalRegion>,
    /// Whether the allowed motion reaches the left / right window edge.
    pub boundary_flags: [bool; 2],
    /// Near-double roots: local minima of `|E - V|` without a sign change.
    pub degenerate: Vec<f64>,
}

/// Location of a point relative to the two turning points of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionTag {
    LeftForbidden,
    Allowed,
    RightForbidden,
}

impl RegionTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionTag::LeftForbidden => "left_forbidden",
            RegionTag::Allowed => "allowed",
            RegionTag::RightForbidden => "right_forbidden",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseValue {
    pub phi: f64,
    pub region: RegionTag,
}

/// `V(x)`, stepping one ulp inward when `x` rounds onto an open end.
pub(crate) fn potential_at(potential: &PotentialModel, x: f64) -> f64 {
    match potential.evaluate(x) {
        Ok(v) => v,
        Err(_) => {
            let d = potential.domain();
            let inside = match (d.lo, d.hi) {
                (Bound::Open(a), _) if x <= a => next_up(a),
                (_, Bound::Open(b)) if x >= b => next_down(b),
                _ => x,
            };
            potential.evaluate(inside).unwrap_or(f64::NAN)
        }
    }
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else if x > 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

fn root_tol(a: f64, b: f64) -> f64 {
    1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Uniform sign-change scan of `E - V` over the domain's scan window.
pub fn find_turning_points(potential: &PotentialModel, energy: f64, scan_resolution: usize) -> Result<TurningPointReport> {
    scan_turning_points(potential, energy, potential.domain().scan_window(), scan_resolution, &[])
}

/// Scan on an explicit window; `hints` are extra sample points (typically
/// the potential minimum) so that narrow wells are not stepped over.
pub fn scan_turning_points(
    potential: &PotentialModel,
    energy: f64,
    window: (f64, f64),
    scan_resolution: usize,
    hints: &[f64],
) -> Result<TurningPointReport> {
    if !energy.is_finite() {
        return Err(Error::Usage(format!("energy must be finite, got {energy}")));
    }
    if scan_resolution < 64 {
        return Err(Error::Usage(format!("scan resolution must be at least 64, got {scan_resolution}")));
    }
    let (lo, hi) = window;
    let step = (hi - lo) / (scan_resolution - 1) as f64;
    let mut xs: Vec<f64> = (0..scan_resolution).map(|i| lo + step * i as f64).collect();
    xs[scan_resolution - 1] = hi;
    xs.extend(hints.iter().copied().filter(|h| *h > lo && *h < hi));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let gap = |x: f64| energy - potential_at(potential, x);
    let g: Vec<f64> = xs.iter().map(|&x| gap(x)).collect();
    if g.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidPotential(format!("potential is not finite on the scan window [{lo}, {hi}]")));
    }
    let allowed: Vec<bool> = g.iter().map(|&v| v >= 0.0).collect();
    let n = xs.len();

    // end points of the open domain ends map back onto the exact bound
    let d = potential.domain();
    let left_edge = match d.lo {
        Bound::Open(a) if (lo - a).abs() <= 1e-8 * (hi - lo) => a,
        _ => lo,
    };
    let right_edge = match d.hi {
        Bound::Open(b) if (b - hi).abs() <= 1e-8 * (hi - lo) => b,
        _ => hi,
    };

    let refine = |i: usize| -> Result<f64> {
        let r = bisect_then_brent(gap, xs[i], xs[i + 1], root_tol(xs[i], xs[i + 1]))?;
        Ok(r.x)
    };

    let mut regions = Vec::new();
    let mut i = 0;
    while i < n {
        if !allowed[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && allowed[i + 1] {
            i += 1;
        }
        let end = i;
        let (x1, left, w1) = if start == 0 {
            (left_edge, Edge::Wall, 0.0)
        } else {
            (refine(start - 1)?, Edge::TurningPoint, xs[start] - xs[start - 1])
        };
        let (x2, right, w2) = if end == n - 1 {
            (right_edge, Edge::Wall, 0.0)
        } else {
            (refine(end)?, Edge::TurningPoint, xs[end + 1] - xs[end])
        };
        regions.push(ClassicalRegion {
            x1,
            x2,
            bracket_width: w1.max(w2),
            left,
            right,
        });
        i += 1;
    }

    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut degenerate = Vec::new();
    for k in 1..n - 1 {
        let same_sign = allowed[k - 1] == allowed[k] && allowed[k] == allowed[k + 1];
        if same_sign && g[k].abs() < g[k - 1].abs() && g[k].abs() <= g[k + 1].abs() {
            let (x, v) = golden_minimize(|x| gap(x).abs(), xs[k - 1], xs[k + 1], root_tol(xs[k - 1], xs[k + 1]));
            if v < 1e-8 * scale {
                degenerate.push(x);
            }
        }
    }

    if regions.is_empty() {
        return Err(Error::NoClassicalMotion { energy });
    }
    let boundary_flags = [allowed[0], allowed[n - 1]];
    Ok(TurningPointReport {
        energy,
        regions,
        boundary_flags,
        degenerate,
    })
}

/// Global minimum of `V` on a window: grid scan, then golden-section refinement.
pub fn locate_minimum(potential: &PotentialModel, window: (f64, f64), resolution: usize) -> (f64, f64) {
    let (lo, hi) = window;
    let step = (hi - lo) / (resolution - 1) as f64;
    let (mut best, mut best_v) = (lo, f64::INFINITY);
    let mut best_i = 0;
    for i in 0..resolution {
        let x = lo + step * i as f64;
        let v = potential_at(potential, x);
        if v < best_v {
            best = x;
            best_v = v;
            best_i = i;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let (x, v) = golden_minimize(|x| potential_at(potential, x), a, b, root_tol(a, b));
    if v < best_v {
        (x, v)
    } else {
        (best, best_v)
    }
}

/// `W(E) = int_{x1}^{x2} sqrt(2 m (E - V)) dx` with the endpoint square
/// roots removed by `x = x_mid + x_half sin t`.
pub fn action_integral(
    potential: &PotentialModel,
    energy: f64,
    region: &ClassicalRegion,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if region.width() <= 0.0 {
        return Ok(0.0);
    }
    let two_m = 2.0 * potential.mass();
    let r = integrate_sine_substituted(
        |x| (two_m * (energy - potential_at(potential, x)).max(0.0)).sqrt(),
        region.x1,
        region.x2,
        cfg,
    )?;
    Ok(r.value)
}

/// `dW/dE = int m / p dx`, half the classical period.
///
/// In `x = c + h sin t` the integrand tends to a finite limit at both ends,
/// but within `~1e-8` of them `E - V` is pure rounding noise. The last
/// `END_GAP` of `t` at each end is therefore taken by linear extrapolation
/// from two interior samples (error `O(END_GAP^3)`), and the relative
/// tolerance is capped at `1e-10`.
pub fn action_energy_derivative(
    potential: &PotentialModel,
    energy: f64,
    region: &ClassicalRegion,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    const END_GAP: f64 = 1e-4;
    if region.width() <= 0.0 {
        return Err(Error::Usage("energy derivative needs a region of positive width".into()));
    }
    let m = potential.mass();
    let c = region.midpoint();
    let h = 0.5 * region.width();
    let f = |t: f64| {
        let x = (c + h * t.sin()).clamp(region.x1, region.x2);
        let gap = energy - potential_at(potential, x);
        if gap > 0.0 {
            m / (2.0 * m * gap).sqrt() * h * t.cos()
        } else {
            0.0
        }
    };
    let lo = -0.5 * PI + END_GAP;
    let hi = 0.5 * PI - END_GAP;
    let cfg = QuadratureConfig {
        rel_tol: cfg.rel_tol.max(1e-10),
        ..*cfg
    };
    let core = integrate(f, lo, hi, &cfg)?.value;
    let left = 0.5 * END_GAP * (3.0 * f(lo) - f(lo + END_GAP));
    let right = 0.5 * END_GAP * (3.0 * f(hi) - f(hi - END_GAP));
    Ok(core + left + right)
}

/// `(1 / hbar) int_a^b |p| dx` for `a <= b` inside one motion type.
pub fn reduced_action(
    potential: &PotentialModel,
    energy: f64,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let two_m = 2.0 * potential.mass();
    let r = integrate_sine_substituted(
        |x| (two_m * (energy - potential_at(potential, x)).abs()).sqrt(),
        a,
        b,
        cfg,
    )?;
    Ok(r.value / potential.hbar())
}

/// Phase anchors `(phi1, phi2) = (-pi (n + 1/2) / 2, +pi (n + 1/2) / 2)`.
pub fn phase_anchors(n: u32) -> (f64, f64) {
    let half = 0.5 * PI * (n as f64 + 0.5);
    (-half, half)
}

/// The phase variable of a solved level at `x`, anchored at the turning
/// points. Inside `[x1, x2]` the phase grows with the action; outside it
/// moves away from the nearer anchor with the decay action `int |p| dx`.
pub fn phase_map(potential: &PotentialModel, level: &EnergyLevel, x: f64, cfg: &QuadratureConfig) -> Result<PhaseValue> {
    potential.evaluate(x)?;
    let region = &level.region;
    let (phi1, phi2) = phase_anchors(level.n);
    let e = level.energy;
    if x < region.x1 {
        let decay = reduced_action(potential, e, x, region.x1, cfg)?;
        return Ok(PhaseValue {
            phi: phi1 - decay,
            region: RegionTag::LeftForbidden,
        });
    }
    if x > region.x2 {
        let decay = reduced_action(potential, e, region.x2, x, cfg)?;
        return Ok(PhaseValue {
            phi: phi2 + decay,
            region: RegionTag::RightForbidden,
        });
    }
    Ok(PhaseValue {
        phi: allowed_phase(potential, e, region, phi1, phi2, x, cfg)?,
        region: RegionTag::Allowed,
    })
}

/// Phase inside the allowed region, integrated from the nearer anchor in the
/// substituted variable so both anchors are reproduced exactly.
fn allowed_phase(
    potential: &PotentialModel,
    energy: f64,
    region: &ClassicalRegion,
    phi1: f64,
    phi2: f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if x <= region.x1 {
        return Ok(phi1);
    }
    if x >= region.x2 {
        return Ok(phi2);
    }
    let half = 0.5 * region.width();
    let t = ((x - region.midpoint()) / half).clamp(-1.0, 1.0).asin();
    let two_m = 2.0 * potential.mass();
    let hbar = potential.hbar();
    let mut p = |xx: f64| (two_m * (energy - potential_at(potential, xx)).max(0.0)).sqrt();
    if t <= 0.0 {
        let r = integrate_sine_window(&mut p, region.x1, region.x2, -0.5 * PI, t, cfg)?;
        Ok(phi1 + r.value / hbar)
    } else {
        let r = integrate_sine_window(&mut p, region.x1, region.x2, t, 0.5 * PI, cfg)?;
        Ok(phi2 - r.value / hbar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Domain;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    /// Midpoint rule with the end points excluded.
    fn midpoint_oracle(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn harmonic_turning_points() {
        let v = PotentialModel::harmonic(1.0).unwrap();
        let rep = find_turning_points(&v, 0.5, 256).unwrap();
        assert_eq!(rep.regions.len(), 1);
        let r = rep.regions[0];
        assert!((r.x1 + 1.0).abs() < 1e-10 && (r.x2 - 1.0).abs() < 1e-10);
        assert!(r.has_two_turning_points());
        assert_eq!(rep.boundary_flags, [false, false]);
    }

    #[test]
    fn free_particle_in_box_hits_both_walls() {
        let v = PotentialModel::free(Domain::closed(-1.0, 1.0)).unwrap();
        let rep = find_turning_points(&v, 1.0, 64).unwrap();
        assert_eq!(rep.regions.len(), 1);
        assert_eq!(rep.boundary_flags, [true, true]);
        assert_eq!(rep.regions[0].left, Edge::Wall);
        assert_eq!(rep.regions[0].right, Edge::Wall);
    }

    #[test]
    fn double_well_has_two_regions() {
        let samples: Vec<(f64, f64)> = (0..=400)
            .map(|i| {
                let x = -2.0 + 0.01 * i as f64;
                (x, (x * x - 1.0).powi(2))
            })
            .collect();
        let v = PotentialModel::tabulated(&samples).unwrap();
        let rep = find_turning_points(&v, 0.5, 1024).unwrap();
        assert_eq!(rep.regions.len(), 2);
        // quartic oracle: (x^2 - 1)^2 = 1/2  =>  x^2 = 1 +- 1/sqrt 2
        let inner = (1.0 - 0.5f64.sqrt()).sqrt();
        let outer = (1.0 + 0.5f64.sqrt()).sqrt();
        let xs = [rep.regions[0].x1, rep.regions[0].x2, rep.regions[1].x1, rep.regions[1].x2];
        let expected = [-outer, -inner, inner, outer];
        for (a, b) in xs.iter().zip(expected) {
            // interpolation error of the 0.01-spaced table dominates
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn no_motion_error() {
        let v = PotentialModel::harmonic(1.0).unwrap();
        assert!(matches!(find_turning_points(&v, -1.0, 128), Err(Error::NoClassicalMotion { .. })));
    }

    #[test]
    fn tangent_energy_is_reported_degenerate() {
        // V = (x^2 - 1)^2 has a local maximum V = 1 at x = 0
        let samples: Vec<(f64, f64)> = (0..=400)
            .map(|i| {
                let x = -2.0 + 0.01 * i as f64;
                (x, (x * x - 1.0).powi(2))
            })
            .collect();
        let v = PotentialModel::tabulated(&samples).unwrap();
        let rep = find_turning_points(&v, 1.0 + 1e-12, 401).unwrap();
        assert_eq!(rep.regions.len(), 1);
        assert_eq!(rep.degenerate.len(), 1);
        assert!(rep.degenerate[0].abs() < 0.011, "{:?}", rep.degenerate);
        let rep = find_turning_points(&v, 0.9, 401).unwrap();
        assert_eq!(rep.regions.len(), 2);
        assert!(rep.degenerate.is_empty());
    }

    #[test]
    fn harmonic_action_is_pi_e() {
        let v = PotentialModel::harmonic(1.0).unwrap();
        let r = find_turning_points(&v, 0.5, 256).unwrap().regions[0];
        let w = action_integral(&v, 0.5, &r, &cfg()).unwrap();
        assert!((w - PI / 2.0).abs() < 1e-10 * PI / 2.0);
        let oracle = midpoint_oracle(|x| (2.0 * (0.5 - 0.5 * x * x)).max(0.0).sqrt(), -1.0, 1.0, 1_000_000);
        assert!((w - oracle).abs() < 1e-6 * w);
    }

    #[test]
    fn linear_action_closed_form() {
        let v = PotentialModel::linear(1.0).unwrap();
        let r = find_turning_points(&v, 1.0, 256).unwrap().regions[0];
        let w = action_integral(&v, 1.0, &r, &cfg()).unwrap();
        let exact = 4.0 * 2f64.sqrt() / 3.0;
        assert!((w - exact).abs() < 1e-10);
        let oracle = midpoint_oracle(|x| (2.0 * (1.0 - x.abs())).max(0.0).sqrt(), -1.0, 1.0, 1_000_000);
        assert!((w - oracle).abs() < 1e-6 * w);
    }

    #[test]
    fn zero_width_region_has_zero_action() {
        let v = PotentialModel::harmonic(1.0).unwrap();
        let r = ClassicalRegion {
            x1: 0.0,
            x2: 0.0,
            bracket_width: 0.0,
            left: Edge::TurningPoint,
            right: Edge::TurningPoint,
        };
        assert_eq!(action_integral(&v, 0.0, &r, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn energy_derivatives() {
        let h = PotentialModel::harmonic(1.0).unwrap();
        for &e in &[1e-6, 0.5, 3.0] {
            let r = scan_turning_points(&h, e, h.domain().scan_window(), 4096, &[0.0]).unwrap().regions[0];
            let d = action_energy_derivative(&h, e, &r, &cfg()).unwrap();
            assert!((d - PI).abs() < 1e-8, "E = {e}: {d}");
        }
        let l = PotentialModel::linear(1.0).unwrap();
        let r = find_turning_points(&l, 1.0, 256).unwrap().regions[0];
        let d = action_energy_derivative(&l, 1.0, &r, &cfg()).unwrap();
        assert!((d - 2.0 * 2f64.sqrt()).abs() < 1e-9);
        // centered finite difference of W, step 1e-6
        let w = |e: f64| {
            let r = find_turning_points(&l, e, 256).unwrap().regions[0];
            action_integral(&l, e, &r, &cfg()).unwrap()
        };
        let fd = (w(1.0 + 1e-6) - w(1.0 - 1e-6)) / 2e-6;
        assert!((fd - d).abs() < 1e-6 * d);
    }

    #[test]
    fn free_phase_is_kx() {
        let v = PotentialModel::free(Domain::cutoff(-5.0, 5.0)).unwrap();
        let e: f64 = 2.0;
        let k = (2.0 * e).sqrt();
        for &x in &[0.1, 0.7, 3.0] {
            let phi = reduced_action(&v, e, 0.0, x, &cfg()).unwrap();
            assert!((phi - k * x).abs() < 1e-13);
        }
    }
}
