//! Bound-state energies from the two-turning-point quantization condition
//! `int_{x1}^{x2} sqrt(2 m (E - V)) dx = pi hbar (n + 1/2)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::classical::{
    action_energy_derivative, action_integral, locate_minimum, scan_turning_points, ClassicalRegion, Edge,
};
use crate::error::{Error, Result};
use crate::numerics::quadrature::QuadratureConfig;
use crate::numerics::roots::brent_from;
use crate::oracle::{self, OracleConfig};
use crate::potential::{Bound, PotentialModel, Side};

/// Largest tolerated `|W / hbar - pi (n + 1/2)|` for a returned level.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

const MAX_WINDOW_EXTENSIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative energy tolerance of the root search.
    pub energy_tol: f64,
    pub max_iterations: u32,
    /// Factor by which the upper energy bracket grows.
    pub bracket_growth: f64,
    pub scan_resolution: usize,
    pub quadrature: QuadratureConfig,
    /// Accept allowed regions that end on a singular domain end instead of
    /// a turning point. Needed for the `M_z = 0` polar problem only.
    pub accept_hard_walls: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            energy_tol: 1e-15,
            max_iterations: 200,
            bracket_growth: 2.0,
            scan_resolution: 2048,
            quadrature: QuadratureConfig::default(),
            accept_hard_walls: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_tol > 0.0 && self.max_iterations > 0 && self.bracket_growth > 1.0 && self.scan_resolution >= 64) {
            return Err(Error::Usage(format!("invalid solver configuration: {self:?}")));
        }
        self.quadrature.validate()
    }
}

/// A solved level of the quantization condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLevel {
    pub n: u32,
    pub energy: f64,
    /// `W(E_n)`
    pub action: f64,
    pub region: ClassicalRegion,
    /// `|W / hbar - pi (n + 1/2)|`
    pub residual: f64,
    pub iterations: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub levels: Vec<EnergyLevel>,
    /// Why the spectrum stops short of the requested `n_max`.
    pub truncation: Option<String>,
}

#[derive(Debug, Clone, Copy)]
struct Trial {
    energy: f64,
    f: f64,
    dfde: Option<f64>,
    action: f64,
    region: ClassicalRegion,
}

/// Working state shared by the levels of one potential: the minimum, the
/// escape energy and a scan window that grows along cutoff sides.
struct Solver<'a> {
    potential: &'a PotentialModel,
    cfg: &'a SolverConfig,
    window: (f64, f64),
    x_min: f64,
    v_min: f64,
    escape: f64,
    energy_scale: f64,
}

impl<'a> Solver<'a> {
    fn new(potential: &'a PotentialModel, cfg: &'a SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let window = potential.domain().scan_window();
        let (x_min, v_min) = locate_minimum(potential, window, cfg.scan_resolution);
        let escape = potential.escape_energy();
        if escape == f64::NEG_INFINITY || !v_min.is_finite() {
            return Err(Error::UnboundedBelow(format!(
                "potential decreases without bound toward a domain end ({})",
                potential.domain()
            )));
        }
        if !(escape > v_min) {
            return Err(Error::NoBoundStates(format!(
                "potential minimum {v_min} is not below the escape energy {escape}"
            )));
        }
        let energy_scale = characteristic_energy(potential, x_min, v_min, escape, window);
        Ok(Self {
            potential,
            cfg,
            window,
            x_min,
            v_min,
            escape,
            energy_scale,
        })
    }

    fn region_at(&mut self, energy: f64) -> Result<ClassicalRegion> {
        let domain = self.potential.domain();
        for _ in 0..MAX_WINDOW_EXTENSIONS {
            let report =
                scan_turning_points(self.potential, energy, self.window, self.cfg.scan_resolution, &[self.x_min])
                    .map_err(|e| match e {
                        Error::NoClassicalMotion { .. } => Error::RootFinding(format!(
                            "no allowed region at trial energy {energy} above the minimum {}",
                            self.v_min
                        )),
                        other => other,
                    })?;
            if report.regions.len() > 1 {
                return Err(Error::MultiTurningPoint {
                    energy,
                    report: Box::new(report),
                });
            }
            let region = report.regions[0];
            let mut extended = false;
            for (side, edge, x) in [(Side::Left, region.left, region.x1), (Side::Right, region.right, region.x2)] {
                if edge != Edge::Wall {
                    continue;
                }
                match domain.bound(side) {
                    Bound::Cutoff(_) => {
                        match side {
                            Side::Left => self.window.0 = self.x_min - 2.0 * (self.x_min - self.window.0),
                            Side::Right => self.window.1 = self.x_min + 2.0 * (self.window.1 - self.x_min),
                        }
                        extended = true;
                    }
                    Bound::Open(_) if self.cfg.accept_hard_walls => {}
                    _ => return Err(Error::HardWall { energy, x }),
                }
            }
            if !extended {
                return Ok(region);
            }
        }
        Err(Error::RootFinding(format!(
            "allowed region at E = {energy} keeps growing past the scan window {:?}",
            self.window
        )))
    }

    fn trial(&mut self, energy: f64, target: f64) -> Result<Trial> {
        let region = self.region_at(energy)?;
        let q = &self.cfg.quadrature;
        let action = action_integral(self.potential, energy, &region, q)?;
        let hbar = self.potential.hbar();
        let dfde = if region.width() > 0.0 && (region.has_two_turning_points() || self.cfg.accept_hard_walls) {
            action_energy_derivative(self.potential, energy, &region, q).ok().map(|d| d / hbar)
        } else {
            None
        };
        Ok(Trial {
            energy,
            f: action / hbar - target,
            dfde,
            action,
            region,
        })
    }

    fn solve(&mut self, n: u32, seed: Option<(f64, f64)>) -> Result<EnergyLevel> {
        let target = PI * (n as f64 + 0.5);
        let (mut lo, mut step) = match seed {
            Some((e, gap)) => {
                let t = self.trial(e, target)?;
                if t.f >= 0.0 {
                    return Err(Error::NonMonotoneAction {
                        lower: self.v_min,
                        upper: e,
                    });
                }
                (t, gap.max(1e-6 * self.energy_scale))
            }
            // W vanishes at the bottom of the well; evaluating it there
            // would only integrate rounding noise
            None => (
                Trial {
                    energy: self.v_min,
                    f: -target,
                    dfde: None,
                    action: 0.0,
                    region: ClassicalRegion {
                        x1: self.x_min,
                        x2: self.x_min,
                        bracket_width: 0.0,
                        left: Edge::TurningPoint,
                        right: Edge::TurningPoint,
                    },
                },
                self.energy_scale * (n as f64 + 0.5),
            ),
        };
        let margin = 1e-12 * self.escape.abs().max(self.energy_scale);
        let hi = loop {
            let mut e_hi = lo.energy + step;
            let room = self.escape - margin - lo.energy;
            // close in on the escape energy geometrically; W may grow without
            // bound there and the region with it
            let last = room <= margin;
            if e_hi >= self.escape - margin {
                e_hi = if last { self.escape - margin } else { lo.energy + 0.5 * room };
            }
            if e_hi <= lo.energy {
                return Err(Error::LevelDoesNotExist {
                    n,
                    reason: format!("no energy room left below the escape energy {}", self.escape),
                });
            }
            let t = self.trial(e_hi, target)?;
            if t.f <= lo.f {
                return Err(Error::NonMonotoneAction {
                    lower: lo.energy,
                    upper: e_hi,
                });
            }
            if t.f > 0.0 {
                break t;
            }
            if last {
                return Err(Error::LevelDoesNotExist {
                    n,
                    reason: format!(
                        "W/hbar stays below pi (n + 1/2) = {target} up to the escape energy {}",
                        self.escape
                    ),
                });
            }
            lo = t;
            step *= self.cfg.bracket_growth;
        };

        let xtol = self.cfg.energy_tol * lo.energy.abs().max(hi.energy.abs()).max(self.energy_scale);
        let max_iterations = self.cfg.max_iterations;
        let mut evaluate = |e: f64| -> Result<(f64, Option<f64>)> {
            let t = self.trial(e, target)?;
            Ok((t.f, t.dfde))
        };
        let root = brent_from(
            &mut evaluate,
            (lo.energy, lo.f, lo.dfde),
            (hi.energy, hi.f, hi.dfde),
            xtol,
            max_iterations,
        )?;
        let fin = self.trial(root.x, target)?;
        let residual = fin.f.abs();
        if !(residual < RESIDUAL_LIMIT) {
            return Err(Error::RootFinding(format!(
                "level n = {n} converged to E = {} with residual {residual:e} above {RESIDUAL_LIMIT:e}",
                root.x
            )));
        }
        Ok(EnergyLevel {
            n,
            energy: fin.energy,
            action: fin.action,
            region: fin.region,
            residual,
            iterations: root.iterations,
        })
    }
}

/// `hbar omega` of the curvature at the minimum, or a fallback scale for
/// potentials without curvature there.
fn characteristic_energy(potential: &PotentialModel, x_min: f64, v_min: f64, escape: f64, window: (f64, f64)) -> f64 {
    let h = 1e-4 * (window.1 - window.0);
    let curvature = match (potential.evaluate(x_min - h), potential.evaluate(x_min + h)) {
        (Ok(a), Ok(b)) => (a - 2.0 * v_min + b) / (h * h),
        _ => f64::NAN,
    };
    let hbar_omega = potential.hbar() * (curvature / potential.mass()).sqrt();
    if hbar_omega.is_finite() && hbar_omega > 0.0 {
        let gap = escape - v_min;
        if gap.is_finite() {
            hbar_omega.min(gap)
        } else {
            hbar_omega
        }
    } else if (escape - v_min).is_finite() {
        0.1 * (escape - v_min)
    } else {
        1.0
    }
}

/// Solves `W(E) / hbar = pi (n + 1/2)` for one level.
pub fn solve_level(potential: &PotentialModel, n: u32, cfg: &SolverConfig) -> Result<EnergyLevel> {
    Solver::new(potential, cfg)?.solve(n, None)
}

/// Levels `0..=n_max`, each bracket seeded above the previous level.
/// A level that does not exist truncates the list.
pub fn spectrum(potential: &PotentialModel, n_max: u32, cfg: &SolverConfig) -> Result<Spectrum> {
    let mut solver = Solver::new(potential, cfg)?;
    let mut levels: Vec<EnergyLevel> = Vec::new();
    let mut truncation = None;
    for n in 0..=n_max {
        let seed = match levels.as_slice() {
            [] => None,
            [only] => Some((only.energy, only.energy - solver.v_min)),
            [.., a, b] => Some((b.energy, b.energy - a.energy)),
        };
        match solver.solve(n, seed) {
            Ok(level) => {
                if let Some(prev) = levels.last() {
                    if level.energy <= prev.energy {
                        return Err(Error::NonMonotoneAction {
                            lower: prev.energy,
                            upper: level.energy,
                        });
                    }
                }
                levels.push(level);
            }
            Err(err @ Error::LevelDoesNotExist { .. }) if n > 0 => {
                truncation = Some(err.to_string());
                break;
            }
            Err(err) => return Err(err),
        }
    }
    Ok(Spectrum { levels, truncation })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub n: u32,
    pub e_quantized: f64,
    pub e_oracle: Option<f64>,
    /// `(E_quantized - E_oracle) / |E_oracle|`
    pub relative_deviation: Option<f64>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub max_abs_deviation: Option<f64>,
    pub truncation: Option<String>,
}

/// Compares the quantized spectrum with the finite-difference oracle level
/// by level.
pub fn claim_audit(
    potential: &PotentialModel,
    n_max: u32,
    cfg: &SolverConfig,
    oracle_cfg: &OracleConfig,
) -> Result<AuditReport> {
    let spec = spectrum(potential, n_max, cfg)?;
    let oracle_cfg = OracleConfig {
        target_levels: spec.levels.len(),
        ..oracle_cfg.clone()
    };
    let reference = oracle::solve(potential, &oracle_cfg);
    let rows: Vec<AuditRow> = spec
        .levels
        .iter()
        .enumerate()
        .map(|(i, level)| {
            let (e_oracle, flag) = match &reference {
                Ok(r) => match r.energies.get(i) {
                    Some(e) => (Some(*e), None),
                    None => (None, Some(format!("oracle returned only {} levels", r.energies.len()))),
                },
                Err(e) => (None, Some(e.to_string())),
            };
            AuditRow {
                n: level.n,
                e_quantized: level.energy,
                e_oracle,
                relative_deviation: e_oracle.map(|eo| (level.energy - eo) / eo.abs()),
                flag,
            }
        })
        .collect();
    let max_abs_deviation = rows
        .iter()
        .filter_map(|r| r.relative_deviation)
        .map(f64::abs)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
    Ok(AuditReport {
        rows,
        max_abs_deviation,
        truncation: spec.truncation,
    })
}
