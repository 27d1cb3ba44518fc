//! Independent finite-difference bound-state solver.
//!
//! The Hamiltonian `-hbar^2/(2m) d^2/dx^2 + V` is discretized with the
//! three-point stencil on a Dirichlet box; eigenvalues come from Sturm
//! sequence bisection and eigenvectors from inverse iteration. Nothing
//! here touches the turning-point or action machinery.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{Bound, PotentialModel, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OracleBox {
    /// Grow the box until every target level is confined.
    Auto,
    Fixed(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Grid points including both Dirichlet ends; odd.
    pub grid_points: usize,
    pub bounding_box: OracleBox,
    pub target_levels: usize,
    pub eigen_tol: f64,
    pub retain_eigenvectors: bool,
    /// Combine grids `h` and `h/2` as `(4 E(h/2) - E(h)) / 3`.
    pub richardson: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            grid_points: 4001,
            bounding_box: OracleBox::Auto,
            target_levels: 10,
            eigen_tol: 1e-10,
            retain_eigenvectors: false,
            richardson: true,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 201 || self.grid_points.is_multiple_of(2) {
            return Err(Error::Usage(format!(
                "oracle grid_points must be odd and at least 201, got {}",
                self.grid_points
            )));
        }
        if !(self.eigen_tol > 0.0) || self.target_levels == 0 {
            return Err(Error::Usage("oracle needs target_levels > 0 and eigen_tol > 0".into()));
        }
        if let OracleBox::Fixed(a, b) = self.bounding_box {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Usage(format!("oracle box [{a}, {b}] must be finite and non-empty")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Dirichlet end points.
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

impl Grid {
    /// Position of unknown `i` (0-based; the end points are not unknowns).
    pub fn x(&self, i: usize) -> f64 {
        self.a + self.h * (i + 1) as f64
    }
}

/// Symmetric tridiagonal matrix: `diag[i]` and `off[i] = T[i][i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub grid: Grid,
}

impl TridiagonalOperator {
    pub fn from_parts(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Usage("tridiagonal operator needs off.len() == diag.len() - 1".into()));
        }
        let n = diag.len();
        Ok(Self {
            diag,
            off,
            grid: Grid {
                a: -1.0,
                b: n as f64,
                h: 1.0,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpectrum {
    pub energies: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub grid: Grid,
    /// Bisection steps spent on each level.
    pub convergence: Vec<u32>,
    pub extrapolated: bool,
}

/// Three-point finite-difference Hamiltonian on `[a, b]` with `grid_points`
/// points including the Dirichlet ends.
pub fn discretize_on(potential: &PotentialModel, a: f64, b: f64, grid_points: usize) -> Result<TridiagonalOperator> {
    if grid_points < 3 || !(a < b) {
        return Err(Error::Usage(format!("cannot discretize [{a}, {b}] with {grid_points} points")));
    }
    let h = (b - a) / (grid_points - 1) as f64;
    let kin = potential.hbar() * potential.hbar() / (potential.mass() * h * h);
    let grid = Grid { a, b, h };
    let n = grid_points - 2;
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let v = potential.evaluate(grid.x(i))?;
        if !v.is_finite() {
            return Err(Error::Oracle(format!("potential not finite at grid point x = {}", grid.x(i))));
        }
        diag.push(kin + v);
    }
    Ok(TridiagonalOperator {
        diag,
        off: vec![-0.5 * kin; n.saturating_sub(1)],
        grid,
    })
}

/// Discretization on the configured (or automatically chosen) box.
pub fn discretize(potential: &PotentialModel, cfg: &OracleConfig) -> Result<TridiagonalOperator> {
    cfg.validate()?;
    let (a, b) = match cfg.bounding_box {
        OracleBox::Fixed(a, b) => (a, b),
        OracleBox::Auto => auto_box(potential, cfg)?,
    };
    discretize_on(potential, a, b, cfg.grid_points)
}

fn sturm_count_once(op: &TridiagonalOperator, sigma: f64) -> Option<usize> {
    let mut count = 0;
    let mut d = op.diag[0] - sigma;
    if d == 0.0 {
        return None;
    }
    if d < 0.0 {
        count += 1;
    }
    for i in 1..op.dim() {
        let b = op.off[i - 1];
        d = (op.diag[i] - sigma) - b * b / d;
        if d == 0.0 {
            return None;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    Some(count)
}

/// Number of eigenvalues below `sigma` (negative pivots of the shifted
/// LDL^T factorization). An exactly vanishing pivot nudges the shift.
pub fn sturm_count(op: &TridiagonalOperator, sigma: f64) -> usize {
    let nudge = 1e-12 * op.scale();
    let mut s = sigma;
    for _ in 0..8 {
        if let Some(c) = sturm_count_once(op, s) {
            return c;
        }
        s += nudge;
    }
    // a zero pivot eight shifts in a row cannot happen for finite input
    sturm_count_once(op, s + nudge).unwrap_or(0)
}

/// The lowest `target_levels` eigenvalues by bisection on the Sturm count.
pub fn eigenvalues_by_bisection(
    op: &TridiagonalOperator,
    target_levels: usize,
    eigen_tol: f64,
    with_vectors: bool,
) -> Result<OracleSpectrum> {
    let n = op.dim();
    if target_levels > n {
        return Err(Error::Oracle(format!("{target_levels} levels requested from a {n}-point operator")));
    }
    let (glo, ghi) = op.gershgorin();
    let floor = 4.0 * f64::EPSILON * op.scale();
    let mut energies = Vec::with_capacity(target_levels);
    let mut convergence = Vec::with_capacity(target_levels);
    let mut start = glo;
    for k in 0..target_levels {
        let (mut lo, mut hi) = (start, ghi);
        let mut iters = 0;
        while hi - lo > (eigen_tol * lo.abs().max(hi.abs())).max(floor) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(op, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            iters += 1;
        }
        let lambda = 0.5 * (lo + hi);
        energies.push(lambda);
        convergence.push(iters);
        start = lo;
    }
    let eigenvectors = if with_vectors {
        Some(energies.iter().map(|&l| inverse_iteration(op, l)).collect())
    } else {
        None
    };
    Ok(OracleSpectrum {
        energies,
        eigenvectors,
        grid: op.grid,
        convergence,
        extrapolated: false,
    })
}

/// Thomas solve of `(T - shift) y = rhs`.
fn shifted_solve(op: &TridiagonalOperator, shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = op.dim();
    let tiny = f64::EPSILON * op.scale();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut denom = op.diag[0] - shift;
    if denom.abs() < tiny {
        denom = tiny;
    }
    c[0] = if n > 1 { op.off[0] / denom } else { 0.0 };
    y[0] = rhs[0] / denom;
    for i in 1..n {
        let b = op.off[i - 1];
        denom = (op.diag[i] - shift) - b * c[i - 1];
        if denom.abs() < tiny {
            denom = tiny;
        }
        c[i] = if i + 1 < n { op.off[i] / denom } else { 0.0 };
        y[i] = (rhs[i] - b * y[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

fn inverse_iteration(op: &TridiagonalOperator, lambda: f64) -> Vec<f64> {
    let n = op.dim();
    let shift = lambda + 1e-10 * op.scale().min(1.0).max(lambda.abs() * 1e-3);
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..4 {
        let mut y = shifted_solve(op, shift, &v);
        let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        y.iter_mut().for_each(|a| *a /= norm);
        v = y;
    }
    // normalize as a grid function: sum |v|^2 h = 1
    let h = op.grid.h;
    let norm = (v.iter().map(|a| a * a).sum::<f64>() * h).sqrt();
    let first = v.iter().copied().find(|a| a.abs() > 1e-8).unwrap_or(1.0);
    let sign = first.signum();
    v.iter_mut().for_each(|a| *a *= sign / norm);
    v
}

/// Interior sign changes, ignoring components below `1e-8` of the peak.
pub fn node_count(v: &[f64]) -> usize {
    let peak = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mut last = 0.0f64;
    let mut count = 0;
    for &a in v {
        if a.abs() <= 1e-8 * peak {
            continue;
        }
        if last != 0.0 && a.signum() != last.signum() {
            count += 1;
        }
        last = a;
    }
    count
}

fn own_minimum(potential: &PotentialModel, lo: f64, hi: f64) -> (f64, f64) {
    let n = 4001;
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| lo + h * i as f64)
        .filter_map(|x| potential.evaluate(x).ok().filter(|v| v.is_finite()).map(|v| (x, v)))
        .fold((lo, f64::INFINITY), |best, (x, v)| if v < best.1 { (x, v) } else { best })
}

/// Walks outward from `start` until the potential sits `margin` above
/// `energy` (when that is reachable) and the accumulated decay exponent
/// `int sqrt(2m (V - E)) / hbar dx` past the classical edge reaches `decay`.
fn confining_edge(
    potential: &PotentialModel,
    start: f64,
    direction: f64,
    energy: f64,
    margin: f64,
    decay: f64,
    initial_step: f64,
    waive_margin: bool,
) -> Result<f64> {
    let two_m = 2.0 * potential.mass();
    let hbar = potential.hbar();
    let mut x = start;
    let mut step = initial_step;
    let mut exponent = 0.0;
    let mut prev_kappa = 0.0;
    for doubling in 0..80 {
        for _ in 0..1000 {
            let next = x + direction * step;
            let v = match potential.evaluate(next) {
                Ok(v) if v.is_finite() => v,
                _ => return Ok(x),
            };
            let kappa = if v > energy { (two_m * (v - energy)).sqrt() / hbar } else { 0.0 };
            exponent = if v > energy { exponent + 0.5 * (kappa + prev_kappa) * step } else { 0.0 };
            prev_kappa = kappa;
            x = next;
            if exponent >= decay && (waive_margin || v >= energy + margin) {
                return Ok(x);
            }
        }
        if doubling > 0 || exponent == 0.0 {
            step *= 2.0;
        }
    }
    Err(Error::Oracle(format!(
        "auto-box failure: potential does not confine E = {energy} in direction {direction}"
    )))
}

/// Box chosen so every target level has decayed by `e^-20` in amplitude
/// at the Dirichlet ends and, where the potential keeps rising, the edges
/// sit at least `5 hbar omega` above the highest target level. `hbar omega`
/// is the spacing of the two lowest levels of the current box.
fn auto_box(potential: &PotentialModel, cfg: &OracleConfig) -> Result<(f64, f64)> {
    let domain = potential.domain();
    let (x0, _) = own_minimum(potential, domain.scan_window().0, domain.scan_window().1);
    let mut bx = domain.window();
    let wanted = cfg.target_levels.max(2);
    for _ in 0..12 {
        let op = discretize_on(potential, bx.0, bx.1, cfg.grid_points.min(2001))?;
        let levels = eigenvalues_by_bisection(&op, wanted, 1e-8, false)?;
        let e_top = levels.energies[cfg.target_levels - 1];
        let margin = 5.0 * (levels.energies[1] - levels.energies[0]);
        let step = 1e-3 * (bx.1 - bx.0);
        let mut next = bx;
        for side in [Side::Left, Side::Right] {
            let dir = if side == Side::Left { -1.0 } else { 1.0 };
            if let Bound::Cutoff(_) = domain.bound(side) {
                if potential.edge_limit(side) <= e_top {
                    return Err(Error::Oracle(format!(
                        "auto-box failure: level {e_top} is not confined on the {side:?} side"
                    )));
                }
                let waive = potential.edge_limit(side) < e_top + margin;
                let edge = confining_edge(potential, x0, dir, e_top, margin, 20.0, step, waive)?;
                match side {
                    Side::Left => next.0 = edge,
                    Side::Right => next.1 = edge,
                }
            }
        }
        let width = bx.1 - bx.0;
        let moved = (next.0 - bx.0).abs().max((next.1 - bx.1).abs());
        bx = next;
        if moved <= 0.01 * width {
            return Ok(bx);
        }
    }
    Ok(bx)
}

/// Reference spectrum: automatic or fixed box, optional Richardson
/// extrapolation over the grid pair `h`, `h/2`.
pub fn solve(potential: &PotentialModel, cfg: &OracleConfig) -> Result<OracleSpectrum> {
    let coarse_op = discretize(potential, cfg)?;
    let (a, b) = (coarse_op.grid.a, coarse_op.grid.b);
    if !cfg.richardson {
        return eigenvalues_by_bisection(&coarse_op, cfg.target_levels, cfg.eigen_tol, cfg.retain_eigenvectors);
    }
    let coarse = eigenvalues_by_bisection(&coarse_op, cfg.target_levels, cfg.eigen_tol, false)?;
    let fine_op = discretize_on(potential, a, b, 2 * cfg.grid_points - 1)?;
    let fine = eigenvalues_by_bisection(&fine_op, cfg.target_levels, cfg.eigen_tol, cfg.retain_eigenvectors)?;
    let energies = coarse
        .energies
        .iter()
        .zip(&fine.energies)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    Ok(OracleSpectrum {
        energies,
        eigenvectors: fine.eigenvectors,
        grid: fine.grid,
        convergence: fine.convergence,
        extrapolated: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Domain;

    #[test]
    fn three_by_three_closed_form() {
        let op = TridiagonalOperator::from_parts(vec![2.0; 3], vec![-1.0; 2]).unwrap();
        let s = eigenvalues_by_bisection(&op, 3, 1e-14, false).unwrap();
        let r2 = 2f64.sqrt();
        for (got, want) in s.energies.iter().zip([2.0 - r2, 2.0, 2.0 + r2]) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn count_below_spectrum_is_zero() {
        let op = TridiagonalOperator::from_parts(vec![2.0; 3], vec![-1.0; 2]).unwrap();
        assert_eq!(sturm_count(&op, 0.0), 0);
        assert_eq!(sturm_count(&op, 10.0), 3);
        assert_eq!(sturm_count(&op, 2.0 - 1e-9), 1);
        assert_eq!(sturm_count(&op, 2.0 + 1e-9), 2);
        // a shift exactly on an eigenvalue hits a zero pivot and is nudged
        assert!((1..=2).contains(&sturm_count(&op, 2.0)));
    }

    #[test]
    fn particle_in_box_ground_state() {
        let v = PotentialModel::free(Domain::cutoff(-1.0, 5.0)).unwrap();
        let op = discretize_on(&v, 0.0, std::f64::consts::PI, 2001).unwrap();
        let s = eigenvalues_by_bisection(&op, 1, 1e-14, false).unwrap();
        assert!((s.energies[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn harmonic_fixed_box() {
        let v = PotentialModel::harmonic(1.0).unwrap();
        let cfg = OracleConfig {
            bounding_box: OracleBox::Fixed(-10.0, 10.0),
            target_levels: 1,
            richardson: false,
            ..OracleConfig::default()
        };
        let raw = solve(&v, &cfg).unwrap();
        // three-point stencil error is about h^2 <p^4> / 24 = 7.8e-7 here
        assert!((raw.energies[0] - 0.5).abs() < 1e-6);
        let ext = solve(&v, &OracleConfig { richardson: true, ..cfg }).unwrap();
        assert!((ext.energies[0] - 0.5).abs() < 1e-7);
    }

    #[test]
    fn harmonic_first_ten_levels() {
        let v = PotentialModel::harmonic(1.0).unwrap();
        let s = solve(&v, &OracleConfig::default()).unwrap();
        for (n, e) in s.energies.iter().enumerate() {
            assert!((e - (n as f64 + 0.5)).abs() < 1e-6, "n = {n}: {e}");
        }
    }

    #[test]
    fn eigenvector_nodes_match_level_index() {
        let v = PotentialModel::harmonic(1.0).unwrap();
        let cfg = OracleConfig {
            target_levels: 8,
            retain_eigenvectors: true,
            richardson: false,
            grid_points: 1001,
            ..OracleConfig::default()
        };
        let s = solve(&v, &cfg).unwrap();
        for (n, vec) in s.eigenvectors.unwrap().iter().enumerate() {
            assert_eq!(node_count(vec), n);
        }
    }

    #[test]
    fn rejects_even_grid() {
        let v = PotentialModel::harmonic(1.0).unwrap();
        let cfg = OracleConfig {
            grid_points: 1000,
            ..OracleConfig::default()
        };
        assert!(solve(&v, &cfg).is_err());
    }

    #[test]
    fn unconfined_level_fails_auto_box() {
        let v = PotentialModel::morse(1.0, 1.0).unwrap();
        let cfg = OracleConfig {
            target_levels: 5,
            ..OracleConfig::default()
        };
        assert!(matches!(solve(&v, &cfg), Err(Error::Oracle(_))));
    }
}
