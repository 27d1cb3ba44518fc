use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use qcsolve::state::{delta_functional, epsilon_parameter};
use qcsolve::{
    claim_audit, radial_spectrum, spectrum, AngularQuantumNumbers, Bound, OracleConfig, PotentialDescriptor,
    PotentialModel, Side, SolverConfig, StateFunction,
};

use crate::manifest::RunManifest;
use crate::output::{finite, num, opt_num, write_csv, write_json, CliError, CliResult};
use crate::{AuditArgs, Command, Format, RadialArgs, SpectrumArgs, Status, WavefunctionArgs};

pub fn run(command: &Command) -> CliResult<Status> {
    match command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Wavefunction(a) => cmd_wavefunction(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Radial(a) => cmd_radial(a),
    }
}

fn load(path: &Path) -> CliResult<(PotentialDescriptor, PotentialModel)> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let descriptor = PotentialDescriptor::from_json(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    let model = descriptor.to_model()?;
    Ok((descriptor, model))
}

fn level_count(levels: u32) -> CliResult<u32> {
    levels
        .checked_sub(1)
        .ok_or_else(|| CliError::Usage("--levels must be at least 1".into()))
}

fn report_truncation(truncation: &Option<String>) -> Status {
    match truncation {
        Some(reason) => {
            eprintln!("truncated: {reason}");
            Status::Truncated
        }
        None => Status::Ok,
    }
}

#[derive(Serialize)]
struct SpectrumRow {
    n: u32,
    #[serde(rename = "E")]
    energy: f64,
    #[serde(rename = "W")]
    action: f64,
    residual: f64,
}

#[derive(Serialize)]
struct SpectrumDoc {
    levels: Vec<SpectrumRow>,
    truncation: Option<String>,
}

fn cmd_spectrum(a: &SpectrumArgs) -> CliResult<Status> {
    let n_max = level_count(a.levels)?;
    let (descriptor, v) = load(&a.common.potential)?;
    let cfg = SolverConfig::default();
    let spec = spectrum(&v, n_max, &cfg)?;
    let rows = spec
        .levels
        .iter()
        .map(|l| {
            Ok(SpectrumRow {
                n: l.n,
                energy: finite(l.energy, || format!("E_{}", l.n))?,
                action: finite(l.action, || format!("W(E_{})", l.n))?,
                residual: finite(l.residual, || format!("residual of n = {}", l.n))?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let manifest = RunManifest::new(
        "spectrum",
        &a.common.potential,
        &descriptor,
        json!({"levels": a.levels, "format": a.format, "solver": cfg}),
    );
    let out = a.common.out.as_deref();
    match a.format {
        Format::Json => write_json(
            out,
            &manifest,
            &SpectrumDoc {
                levels: rows,
                truncation: spec.truncation.clone(),
            },
        )?,
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.n.to_string(), num(r.energy), num(r.action), num(r.residual)])
                .collect();
            write_csv(out, &manifest, &["n", "E", "W", "residual"], &table)?;
        }
    }
    Ok(report_truncation(&spec.truncation))
}

/// `[x1 - w, x2 + w]` with `w` the region width, clipped to closed or open
/// domain ends. Open ends are stepped inside by a relative `1e-12`.
fn sample_window(v: &PotentialModel, x1: f64, x2: f64) -> (f64, f64) {
    let w = x2 - x1;
    let d = v.domain();
    let (lo_win, hi_win) = d.window();
    let inset = 1e-12 * (hi_win - lo_win);
    let clip = |x: f64, side: Side| match d.bound(side) {
        Bound::Cutoff(_) => x,
        Bound::Closed(b) => match side {
            Side::Left => x.max(b),
            Side::Right => x.min(b),
        },
        Bound::Open(b) => match side {
            Side::Left => x.max(b + inset),
            Side::Right => x.min(b - inset),
        },
    };
    (clip(x1 - w, Side::Left), clip(x2 + w, Side::Right))
}

fn cmd_wavefunction(a: &WavefunctionArgs) -> CliResult<Status> {
    if a.grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let (descriptor, v) = load(&a.common.potential)?;
    let cfg = SolverConfig::default();
    let spec = spectrum(&v, a.n, &cfg)?;
    let level = match spec.levels.get(a.n as usize) {
        Some(l) => *l,
        None => {
            return Err(CliError::Usage(
                spec.truncation
                    .unwrap_or_else(|| format!("level n = {} does not exist", a.n)),
            ))
        }
    };
    let state = StateFunction::build(&v, &level, &cfg.quadrature)?;
    let (lo, hi) = sample_window(&v, level.region.x1, level.region.x2);
    let step = (hi - lo) / (a.grid - 1) as f64;
    let mut table = Vec::with_capacity(a.grid);
    for i in 0..a.grid {
        let x = if i + 1 == a.grid { hi } else { lo + step * i as f64 };
        let s = state.evaluate(x)?;
        let psi = finite(s.psi, || format!("psi at x = {x}"))?;
        let phi = finite(s.phi, || format!("phi at x = {x}"))?;
        let eps = epsilon_parameter(&v, level.energy, x).ok().filter(|e| e.is_finite());
        let delta = delta_functional(&v, level.energy, x).ok().filter(|d| d.is_finite());
        table.push(vec![
            num(x),
            num(phi),
            num(psi),
            s.region.as_str().to_string(),
            opt_num(eps),
            opt_num(delta),
        ]);
    }
    let manifest = RunManifest::new(
        "wavefunction",
        &a.common.potential,
        &descriptor,
        json!({
            "n": a.n,
            "grid": a.grid,
            "window": [lo, hi],
            "energy": level.energy,
            "normalization": state.normalization_numeric,
            "solver": cfg,
        }),
    );
    write_csv(
        a.common.out.as_deref(),
        &manifest,
        &["x", "phi", "psi", "region", "epsilon", "delta"],
        &table,
    )?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct AuditDocRow {
    n: u32,
    #[serde(rename = "E_quantized")]
    e_quantized: f64,
    #[serde(rename = "E_oracle")]
    e_oracle: Option<f64>,
    relative_deviation: Option<f64>,
    flag: Option<String>,
}

#[derive(Serialize)]
struct AuditDoc {
    rows: Vec<AuditDocRow>,
    max_abs_deviation: Option<f64>,
    truncation: Option<String>,
}

fn cmd_audit(a: &AuditArgs) -> CliResult<Status> {
    let n_max = level_count(a.levels)?;
    let (descriptor, v) = load(&a.common.potential)?;
    let cfg = SolverConfig::default();
    let oracle_cfg = OracleConfig {
        grid_points: a.grid_points,
        ..OracleConfig::default()
    };
    oracle_cfg.validate()?;
    let report = claim_audit(&v, n_max, &cfg, &oracle_cfg)?;
    let check = |x: Option<f64>, what: &str, n: u32| -> CliResult<Option<f64>> {
        x.map(|x| finite(x, || format!("{what} of n = {n}"))).transpose()
    };
    let rows = report
        .rows
        .iter()
        .map(|r| {
            Ok(AuditDocRow {
                n: r.n,
                e_quantized: finite(r.e_quantized, || format!("E_quantized of n = {}", r.n))?,
                e_oracle: check(r.e_oracle, "E_oracle", r.n)?,
                relative_deviation: check(r.relative_deviation, "relative deviation", r.n)?,
                flag: r.flag.clone(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let manifest = RunManifest::new(
        "audit",
        &a.common.potential,
        &descriptor,
        json!({"levels": a.levels, "format": a.format, "solver": cfg, "oracle": oracle_cfg}),
    );
    let out = a.common.out.as_deref();
    match a.format {
        Format::Json => write_json(
            out,
            &manifest,
            &AuditDoc {
                rows,
                max_abs_deviation: report.max_abs_deviation,
                truncation: report.truncation.clone(),
            },
        )?,
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        num(r.e_quantized),
                        opt_num(r.e_oracle),
                        opt_num(r.relative_deviation),
                        r.flag.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            write_csv(
                out,
                &manifest,
                &["n", "E_quantized", "E_oracle", "relative_deviation", "flag"],
                &table,
            )?;
        }
    }
    Ok(report_truncation(&report.truncation))
}

#[derive(Serialize)]
struct RadialDocLevel {
    n_r: u32,
    l_equivalent: u32,
    #[serde(rename = "E")]
    energy: f64,
    residual: f64,
}

#[derive(Serialize)]
struct RadialDoc {
    angular: AngularQuantumNumbers,
    levels: Vec<RadialDocLevel>,
    truncation: Option<String>,
}

fn cmd_radial(a: &RadialArgs) -> CliResult<Status> {
    let (descriptor, v) = load(&a.common.potential)?;
    let cfg = SolverConfig::default();
    let spec = radial_spectrum(&v, a.nrmax, a.ntheta, a.mz, &cfg)?;
    let levels = spec
        .levels
        .iter()
        .map(|l| {
            Ok(RadialDocLevel {
                n_r: l.n_r,
                l_equivalent: l.l_equivalent,
                energy: finite(l.energy, || format!("E of n_r = {}", l.n_r))?,
                residual: finite(l.level_1d.residual, || format!("residual of n_r = {}", l.n_r))?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let manifest = RunManifest::new(
        "radial",
        &a.common.potential,
        &descriptor,
        json!({"ntheta": a.ntheta, "mz": a.mz, "nrmax": a.nrmax, "solver": cfg}),
    );
    write_json(
        a.common.out.as_deref(),
        &manifest,
        &RadialDoc {
            angular: spec.angular,
            levels,
            truncation: spec.truncation.clone(),
        },
    )?;
    Ok(report_truncation(&spec.truncation))
}
