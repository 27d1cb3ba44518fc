//! Central potentials in three dimensions: azimuthal and polar
//! quantization of the separation constants, the effective radial
//! spectrum, and a finite-difference check of the separated product state
//! against the canonical 3D equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{PhysicalConstants, PotentialModel};
use crate::quantizer::{self, EnergyLevel, SolverConfig};

/// Agreement demanded between the numeric polar solve and `hbar (n + 1/2) + |M_z|`.
pub const ANGULAR_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularQuantumNumbers {
    pub m_z: i32,
    pub n_theta: u32,
    /// `M_z = m_z hbar`
    #[serde(rename = "M_z")]
    pub azimuthal: f64,
    /// `M >= |M_z|`
    #[serde(rename = "M")]
    pub total: f64,
}

impl AngularQuantumNumbers {
    /// `n_theta + |m_z|`
    pub fn l_equivalent(&self) -> u32 {
        self.n_theta + self.m_z.unsigned_abs()
    }
}

/// `M_z = m_z hbar`, from single-valuedness of `Phi(phi + 2 pi) = Phi(phi)`.
pub fn azimuthal_eigenvalue(m_z: i32, hbar: f64) -> f64 {
    m_z as f64 * hbar
}

/// `M = hbar (n_theta + 1/2) + |M_z|`.
pub fn angular_closed_form(n_theta: u32, azimuthal: f64, hbar: f64) -> f64 {
    hbar * (n_theta as f64 + 0.5) + azimuthal.abs()
}

/// The polar problem as a 1D quantization: with mass 1/2 and `E = M^2`,
/// `p(theta) = sqrt(M^2 - M_z^2 / sin^2 theta)`.
pub fn polar_potential(azimuthal: f64, hbar: f64) -> Result<PotentialModel> {
    PotentialModel::polar_barrier(azimuthal * azimuthal)?.with_constants(PhysicalConstants::new(hbar, 0.5)?)
}

/// `M` from the two-turning-point condition on the polar equation, checked
/// against the closed form.
pub fn angular_eigenvalue(n_theta: u32, azimuthal: f64, hbar: f64, cfg: &SolverConfig) -> Result<f64> {
    let theta = polar_potential(azimuthal, hbar)?;
    let cfg = SolverConfig {
        accept_hard_walls: azimuthal == 0.0,
        ..*cfg
    };
    let level = quantizer::solve_level(&theta, n_theta, &cfg)?;
    let m = level.energy.sqrt();
    let closed = angular_closed_form(n_theta, azimuthal, hbar);
    if !((m - closed).abs() <= ANGULAR_REL_TOL * closed) {
        return Err(Error::RootFinding(format!(
            "polar quantization gave M = {m}, closed form {closed} (n_theta = {n_theta}, M_z = {azimuthal})"
        )));
    }
    Ok(m)
}

pub fn angular_numbers(n_theta: u32, m_z: i32, hbar: f64, cfg: &SolverConfig) -> Result<AngularQuantumNumbers> {
    let azimuthal = azimuthal_eigenvalue(m_z, hbar);
    Ok(AngularQuantumNumbers {
        m_z,
        n_theta,
        azimuthal,
        total: angular_eigenvalue(n_theta, azimuthal, hbar, cfg)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialLevel {
    pub n_r: u32,
    pub l_equivalent: u32,
    pub energy: f64,
    pub level_1d: EnergyLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSpectrum {
    pub angular: AngularQuantumNumbers,
    /// Energies increase with `n_r`.
    pub levels: Vec<RadialLevel>,
    pub truncation: Option<String>,
}

/// Rejects potentials whose attraction at `r -> 0` beats the centrifugal
/// barrier, i.e. `r^2 V_eff(r)` turning negative at small `r`.
fn check_bounded_below(v_eff: &PotentialModel) -> Result<()> {
    let (_, r_max) = v_eff.domain().window();
    for scale in [1e-6, 1e-8, 1e-10] {
        let r = scale * r_max;
        let v = v_eff.evaluate(r)?;
        if !(r * r * v >= 0.0) {
            return Err(Error::UnboundedBelow(format!(
                "potential not bounded below: r^2 V_eff = {} at r = {r}",
                r * r * v
            )));
        }
    }
    Ok(())
}

/// Radial levels `n_r = 0..=n_r_max` of `V(r) + M^2 / (2 m r^2)` with `M`
/// from the angular quantization.
pub fn radial_spectrum(
    potential: &PotentialModel,
    n_r_max: u32,
    n_theta: u32,
    m_z: i32,
    cfg: &SolverConfig,
) -> Result<RadialSpectrum> {
    let angular = angular_numbers(n_theta, m_z, potential.hbar(), cfg)?;
    let v_eff = potential.effective_radial(angular.total * angular.total)?;
    check_bounded_below(&v_eff)?;
    let spec = quantizer::spectrum(&v_eff, n_r_max, cfg)?;
    let levels = spec
        .levels
        .into_iter()
        .map(|l| RadialLevel {
            n_r: l.n,
            l_equivalent: angular.l_equivalent(),
            energy: l.energy,
            level_1d: l,
        })
        .collect();
    Ok(RadialSpectrum {
        angular,
        levels,
        truncation: spec.truncation,
    })
}

/// Product `R(r) Theta(theta) Phi(phi)` of solutions of the three
/// separated canonical equations with constants `E`, `M`, `M_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparableState {
    pub energy: f64,
    pub total: f64,
    pub azimuthal: f64,
}

impl SeparableState {
    pub fn new(energy: f64, angular: &AngularQuantumNumbers) -> Self {
        Self {
            energy,
            total: angular.total,
            azimuthal: angular.azimuthal,
        }
    }

    pub fn from_level(level: &RadialLevel, angular: &AngularQuantumNumbers) -> Self {
        Self::new(level.energy, angular)
    }
}

/// `y'' = -q(x) y / hbar^2` from `(x0, y = 1, y' = 0)` to `x0 + dx` by RK4.
fn local_factor(q: &dyn Fn(f64) -> f64, hbar2: f64, x0: f64, dx: f64) -> f64 {
    const SUBSTEPS: usize = 256;
    let h = dx / SUBSTEPS as f64;
    let rhs = |x: f64, y: f64| -q(x) * y / hbar2;
    let (mut y, mut v) = (1.0, 0.0);
    let mut x = x0;
    for _ in 0..SUBSTEPS {
        let (k1y, k1v) = (v, rhs(x, y));
        let (k2y, k2v) = (v + 0.5 * h * k1v, rhs(x + 0.5 * h, y + 0.5 * h * k1y));
        let (k3y, k3v) = (v + 0.5 * h * k2v, rhs(x + 0.5 * h, y + 0.5 * h * k2y));
        let (k4y, k4v) = (v + h * k3v, rhs(x + h, y + h * k3y));
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        x += h;
    }
    y
}

/// Values at `x0 - h`, `x0`, `x0 + h`.
fn stencil(q: &dyn Fn(f64) -> f64, hbar2: f64, x0: f64, h: f64) -> [f64; 3] {
    [local_factor(q, hbar2, x0, -h), 1.0, local_factor(q, hbar2, x0, h)]
}

fn refuse_near_turning_point(name: &str, q: &dyn Fn(f64) -> f64, x0: f64) -> Result<()> {
    const GUARD: f64 = 1e-6;
    let (a, b, c) = (q(x0 - GUARD), q(x0), q(x0 + GUARD));
    if b == 0.0 || a.signum() != b.signum() || c.signum() != b.signum() {
        return Err(Error::SingularPoint {
            x: x0,
            reason: format!("{name} factor has a turning point within {GUARD} of the sample point"),
        });
    }
    Ok(())
}

/// `|(-i hbar)^2 Delta^c Psi + 2 m V Psi - 2 m E Psi|` at `(r, theta, phi)`,
/// with `Delta^c = d_rr + d_thth / r^2 + d_phph / (r^2 sin^2 theta)` taken
/// by central differences of step `h` and the factors normalized to 1 at
/// the sample point.
pub fn canonical_3d_residual(
    potential: &PotentialModel,
    state: &SeparableState,
    point: (f64, f64, f64),
    h: f64,
) -> Result<f64> {
    let (r, theta, phi) = point;
    if !(h > 0.0 && r - h > 0.0 && theta - h > 0.0 && theta + h < std::f64::consts::PI) {
        return Err(Error::Usage(format!(
            "sample point ({r}, {theta}, {phi}) with step {h} leaves r > 0, 0 < theta < pi"
        )));
    }
    let hbar2 = potential.hbar().powi(2);
    let two_m = 2.0 * potential.mass();
    let m2 = state.total * state.total;
    let mz2 = state.azimuthal * state.azimuthal;
    let energy = state.energy;
    let v = |x: f64| potential.evaluate(x).unwrap_or(f64::NAN);
    let q_r = move |x: f64| two_m * (energy - v(x)) - m2 / (x * x);
    let q_t = move |x: f64| {
        let s = x.sin();
        m2 - mz2 / (s * s)
    };
    let q_p = move |_: f64| mz2;
    potential.evaluate(r - h)?;
    potential.evaluate(r + h)?;
    refuse_near_turning_point("radial", &q_r, r)?;
    refuse_near_turning_point("polar", &q_t, theta)?;
    if mz2 > 0.0 {
        refuse_near_turning_point("azimuthal", &q_p, phi)?;
    }
    let big_r = stencil(&q_r, hbar2, r, h);
    let big_t = stencil(&q_t, hbar2, theta, h);
    let big_p = stencil(&q_p, hbar2, phi, h);
    let second = |f: [f64; 3]| (f[0] - 2.0 * f[1] + f[2]) / (h * h);
    let sin2 = theta.sin().powi(2);
    // all factors equal 1 at the centre, so Psi = 1 there
    let laplacian = second(big_r) + second(big_t) / (r * r) + second(big_p) / (r * r * sin2);
    let u = two_m * potential.evaluate(r)?;
    Ok((-hbar2 * laplacian + u - two_m * energy).abs())
}
