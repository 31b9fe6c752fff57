//! Experiment drivers, output files, manifests, and parameter sweeps.
//!
//! Every run writes into its own output directory and finishes with
//! `manifest.json`: schema version, software version, resolved
//! configuration, unit conventions, SHA-256 of every output file, warnings,
//! and headline numbers. Output files:
//!
//! | experiment | files |
//! |---|---|
//! | fig2 | `observables.csv`, `shells_<k>.csv` (`l,p,p_eq`), `density_<k>.csv` (`theta,phi,value`), `state_<k>.bin` |
//! | fig3 | `wigner_<k>.csv` (`m,alpha,w`), `marginal_<k>.csv` (`m,probability`), `state_<k>.bin`, `stationary_marginal.csv` |
//! | stationary-linear | `stationary.csv` (`l,m,probability`), `shells.csv` (`l,p`), `stationary.json` |
//! | stationary-planar | `stationary.csv` (`m,probability`), `stationary.json` |
//! | classical-linear | `moments.csv` |
//! | gibbs-scaling | `residuals.csv` (`xi,l_max,residual,convergence`) |
//! | custom | `tensors.json`, `moments.csv` |
//!
//! Snapshot index `k` follows the order of the snapshot times listed in the
//! manifest.

mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::classical::{
    diffusion_from_particles, ensemble_moments, run_linear_ensemble, write_moments_csv, ClassicalState, Ensemble,
    LinearEnsembleConfig, StepKernel,
};
use crate::error::{Error, Result};
use crate::lindblad::io::{fmt, write_binary, write_observables_csv, JsonSnapshot, JSON_MAX_DIM};
use crate::lindblad::{stationary_nullspace, trace_distance, DensityMatrix};
use crate::linear::{
    build_linear_generator, fig2_experiment, fit_slope, gibbs_residual_scaling, stationary_closed_form,
    stationary_iterative, Fig2Config, LinearRotorParams,
};
use crate::planar::{build_planar_generator, fig3_experiment, stationary_planar, Fig3Config, PlanarRotorParams};
use crate::tensors::{Orientation, RotorGeometry};
use crate::Variant;

pub use config::{parse_config_text, Experiment, RunConfig};

/// Version of the manifest layout.
pub const SCHEMA_VERSION: u32 = 1;
/// Largest dimension for which stationary runs cross-check against the generator kernel.
const NULLSPACE_CHECK_DIM: usize = 400;

/// Exit status for an invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for a numerical failure.
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Machine-readable error record.
pub fn error_record(e: &Error) -> Value {
    let kind = match e {
        Error::InvalidArgument(_) | Error::Parse(_) => "config",
        Error::Io(_) | Error::Json(_) => "io",
        _ => "numerical",
    };
    json!({
        "schema_version": SCHEMA_VERSION,
        "status": "error",
        "exit_code": exit_code(e),
        "kind": kind,
        "message": e.to_string(),
    })
}

/// What a run produced.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub out: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// Named scalars that summarize the run, in a fixed order.
    pub headline: Vec<(String, f64)>,
    pub extras: Value,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(fs::File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        self.files.push(PathBuf::from(name));
        Ok(())
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, v)?;
            writeln!(w)?;
            Ok(())
        })
    }

    fn state(&mut self, name: &str, rho: &DensityMatrix) -> Result<()> {
        self.write(name, |w| write_binary(w, rho.matrix()))
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

fn write_manifest(out: &Outputs, config: &impl Serialize, warnings: &[String], headline: &[(String, f64)], extras: &Value) -> Result<()> {
    let mut outputs = Vec::new();
    for f in &out.files {
        outputs.push(json!({ "file": f, "sha256": sha256_file(&out.dir.join(f))? }));
    }
    let head: BTreeMap<&str, f64> = headline.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let manifest = json!({
        "schema_version": SCHEMA_VERSION,
        "software": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "config": config,
        "units": {
            "hbar": 1, "moment_of_inertia": 1, "k_B": 1,
            "temperature": "xi = 2 I k_B T / hbar^2, kT = xi / 2",
            "time": "I / hbar",
            "friction": "gamma in hbar / I",
            "diffusion": "D = xi gamma / 2",
            "angles": "radians",
        },
        "outputs": outputs,
        "warnings": warnings,
        "headline": head,
        "extras": extras,
    });
    let path = out.dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Run one experiment and write its files.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let mut out = Outputs::new(&config.out)?;
    let (warnings, headline, extras) = match config.experiment {
        Experiment::Fig2 => run_fig2(config, &mut out)?,
        Experiment::Fig3 => run_fig3(config, &mut out)?,
        Experiment::StationaryLinear => run_stationary_linear(config, &mut out)?,
        Experiment::StationaryPlanar => run_stationary_planar(config, &mut out)?,
        Experiment::ClassicalLinear => run_classical_linear(config, &mut out)?,
        Experiment::GibbsScaling => run_gibbs(config, &mut out)?,
        Experiment::Custom => run_custom(config, &mut out)?,
    };
    write_manifest(&out, config, &warnings, &headline, &extras)?;
    Ok(RunSummary {
        out: out.dir.clone(),
        outputs: out.files.clone(),
        warnings,
        headline,
        extras,
    })
}

type RunParts = (Vec<String>, Vec<(String, f64)>, Value);

fn fig2_config(c: &RunConfig) -> Fig2Config {
    let mut snaps: Vec<f64> = [0.0, 0.5, 5.0].into_iter().filter(|&t| t <= c.t_final).collect();
    if snaps.last() != Some(&c.t_final) {
        snaps.push(c.t_final);
    }
    Fig2Config {
        xi: c.xi,
        gamma: c.gamma,
        sigma: c.sigma,
        l_max: c.l_max,
        variant: c.variant,
        inversion_symmetric: c.inversion_symmetric,
        t_final: c.t_final,
        dt_output: c.dt_output,
        snapshot_times: snaps,
        rtol: c.rtol,
        atol: c.atol,
        ..Fig2Config::default()
    }
}

fn run_fig2(c: &RunConfig, out: &mut Outputs) -> Result<RunParts> {
    let fc = fig2_config(c);
    let r = fig2_experiment(&fc)?;
    out.write("observables.csv", |w| write_observables_csv(w, r.final_state.basis(), &r.series))?;
    for (k, s) in r.snapshots.iter().enumerate() {
        out.write(&format!("shells_{k}.csv"), |w| {
            writeln!(w, "l,p,p_eq")?;
            for (l, (p, q)) in s.shell_populations.iter().zip(&r.stationary_shells).enumerate() {
                writeln!(w, "{l},{},{}", fmt(*p), fmt(*q))?;
            }
            Ok(())
        })?;
        out.write(&format!("density_{k}.csv"), |w| {
            writeln!(w, "theta,phi,value")?;
            for (t, p, v) in &s.density {
                writeln!(w, "{},{},{}", fmt(*t), fmt(*p), fmt(*v))?;
            }
            Ok(())
        })?;
        out.state(&format!("state_{k}.bin"), &s.state)?;
    }
    let last = r.series.records.last().expect("non-empty series");
    let headline = vec![
        ("final_energy".to_string(), last.energy),
        ("final_purity".to_string(), last.purity),
        ("final_trace_distance".to_string(), r.final_distance),
    ];
    let extras = json!({
        "snapshot_times": fc.snapshot_times,
        "stationary_energy": r.stationary.expectation(&build_linear_generator(&fc.params()?)?.hamiltonian_matrix()).re,
        "min_eigenvalue": r.series.records.iter().map(|x| x.min_eigenvalue).fold(f64::INFINITY, f64::min),
    });
    Ok((r.warnings, headline, extras))
}

fn run_fig3(c: &RunConfig, out: &mut Outputs) -> Result<RunParts> {
    let fc = Fig3Config {
        xi: c.xi,
        gamma: c.gamma,
        m0: c.m0,
        sigma: c.sigma,
        m_max: c.m_max,
        n_alpha: c.n_alpha,
        times: c.times.clone(),
        variant: c.variant,
        inversion_symmetric: c.inversion_symmetric,
        rtol: c.rtol,
        atol: c.atol,
    };
    let r = fig3_experiment(&fc)?;
    let m_max = c.m_max as i64;
    for (k, s) in r.snapshots.iter().enumerate() {
        out.write(&format!("wigner_{k}.csv"), |w| {
            writeln!(w, "m,alpha,w")?;
            for (m, a, v) in s.field.integer_grid() {
                writeln!(w, "{m},{},{}", fmt(a), fmt(v))?;
            }
            Ok(())
        })?;
        out.write(&format!("marginal_{k}.csv"), |w| marginal_csv(w, m_max, &s.marginal))?;
        out.state(&format!("state_{k}.bin"), &s.state)?;
    }
    out.write("stationary_marginal.csv", |w| marginal_csv(w, m_max, &r.stationary.populations()))?;
    let headline = vec![
        ("initial_fringe".to_string(), r.snapshots[0].fringe),
        ("final_fringe".to_string(), r.snapshots.last().expect("snapshots").fringe),
        ("final_trace_distance".to_string(), r.final_distance),
        ("boundary_mass".to_string(), r.max_boundary_mass),
    ];
    let extras = json!({
        "snapshot_times": fc.times,
        "fringe": r.snapshots.iter().map(|s| s.fringe).collect::<Vec<_>>(),
        "blob_weights": r.snapshots.iter().map(|s| [s.blob_weights.0, s.blob_weights.1]).collect::<Vec<_>>(),
        "boundary_mass": r.snapshots.iter().map(|s| s.boundary_mass).collect::<Vec<_>>(),
        "truncation_flagged": r.truncation_flagged(),
        "n_alpha": fc.angle_points(),
    });
    Ok((r.warnings, headline, extras))
}

fn marginal_csv(w: &mut dyn Write, m_max: i64, p: &[f64]) -> Result<()> {
    writeln!(w, "m,probability")?;
    for (m, v) in (-m_max..=m_max).zip(p) {
        writeln!(w, "{m},{}", fmt(*v))?;
    }
    Ok(())
}

fn snapshot_json(out: &mut Outputs, rho: &DensityMatrix, warnings: &mut Vec<String>) -> Result<()> {
    if rho.dim() <= JSON_MAX_DIM {
        out.json("stationary.json", &JsonSnapshot::from_state(rho)?)
    } else {
        warnings.push(format!("dimension {} exceeds the JSON limit; wrote stationary.bin", rho.dim()));
        out.state("stationary.bin", rho)
    }
}

fn run_stationary_linear(c: &RunConfig, out: &mut Outputs) -> Result<RunParts> {
    let p = LinearRotorParams::new(c.xi, c.gamma, c.l_max)?
        .with_variant(c.variant)
        .with_inversion_symmetry(c.inversion_symmetric);
    p.validate()?;
    let mut warnings = Vec::new();
    let mut extras = serde_json::Map::new();
    let closed_form_applies = p.variant == Variant::Full && !p.inversion_symmetric;
    let rho = if closed_form_applies {
        let rho = stationary_closed_form(&p)?;
        let it = stationary_iterative(&p)?;
        extras.insert("iterative_trace_distance".into(), json!(trace_distance(&rho, &it)?));
        if p.basis().dim() <= NULLSPACE_CHECK_DIM {
            let ns = stationary_nullspace(&build_linear_generator(&p)?)?;
            extras.insert("nullspace_trace_distance".into(), json!(trace_distance(&rho, &ns)?));
        }
        rho
    } else {
        warnings.push("no closed form for this generator; using its kernel".into());
        stationary_nullspace(&build_linear_generator(&p)?)?
    };
    let basis = p.basis();
    let diag = rho.populations();
    out.write("stationary.csv", |w| {
        writeln!(w, "l,m,probability")?;
        for ((l, m), v) in basis.states().zip(&diag) {
            writeln!(w, "{l},{m},{}", fmt(*v))?;
        }
        Ok(())
    })?;
    let shells = crate::linear::shell_populations(&rho, basis);
    out.write("shells.csv", |w| {
        writeln!(w, "l,p")?;
        for (l, v) in shells.iter().enumerate() {
            writeln!(w, "{l},{}", fmt(*v))?;
        }
        Ok(())
    })?;
    snapshot_json(out, &rho, &mut warnings)?;
    let energy: f64 = basis.states().zip(&diag).map(|((l, _), v)| (l * (l + 1)) as f64 / 2.0 * v).sum();
    let headline = vec![
        ("energy".to_string(), energy),
        ("energy_over_kt".to_string(), energy / p.kt()),
        ("ground_population".to_string(), diag[0]),
    ];
    Ok((warnings, headline, Value::Object(extras)))
}

fn run_stationary_planar(c: &RunConfig, out: &mut Outputs) -> Result<RunParts> {
    let p = PlanarRotorParams::new(c.xi, c.gamma, c.m_max)?
        .with_variant(c.variant)
        .with_inversion_symmetry(c.inversion_symmetric);
    let mut warnings = Vec::new();
    let mut extras = serde_json::Map::new();
    let rho = if p.inversion_symmetric {
        warnings.push("no closed form for the inversion-symmetric generator; using its kernel".into());
        stationary_nullspace(&build_planar_generator(&p)?)?
    } else {
        let rho = stationary_planar(c.xi, c.m_max, c.variant)?;
        if p.basis().dim() <= NULLSPACE_CHECK_DIM {
            let ns = stationary_nullspace(&build_planar_generator(&p)?)?;
            extras.insert("nullspace_trace_distance".into(), json!(trace_distance(&rho, &ns)?));
        }
        rho
    };
    let diag = rho.populations();
    out.write("stationary.csv", |w| marginal_csv(w, c.m_max as i64, &diag))?;
    snapshot_json(out, &rho, &mut warnings)?;
    let energy: f64 = p.basis().momenta().zip(&diag).map(|(m, v)| (m * m) as f64 / 2.0 * v).sum();
    let headline = vec![
        ("energy".to_string(), energy),
        ("energy_over_kt".to_string(), energy / p.kt()),
        ("ground_population".to_string(), diag[c.m_max]),
    ];
    Ok((warnings, headline, Value::Object(extras)))
}

fn run_classical_linear(c: &RunConfig, out: &mut Outputs) -> Result<RunParts> {
    let ec = LinearEnsembleConfig {
        xi: c.xi,
        gamma: c.gamma,
        trajectories: c.trajectories,
        dt: c.dt,
        t_final: c.t_final,
        dt_output: c.dt_output,
        seed: c.seed,
        ..LinearEnsembleConfig::default()
    };
    let series = run_linear_ensemble(&ec)?;
    out.write("moments.csv", |w| write_moments_csv(w, &series))?;
    let last = series.last().expect("non-empty series");
    let headline = vec![
        ("final_j_squared".to_string(), last.j_squared),
        ("final_j_squared_se".to_string(), last.j_squared_se),
        ("equilibrium_j_squared".to_string(), c.xi),
    ];
    Ok((Vec::new(), headline, json!({ "dt": ec.step() })))
}

fn run_gibbs(c: &RunConfig, out: &mut Outputs) -> Result<RunParts> {
    let s = gibbs_residual_scaling(c.gamma, &c.xi_list)?;
    out.write("residuals.csv", |w| {
        writeln!(w, "xi,l_max,residual,convergence")?;
        for k in 0..s.xi.len() {
            writeln!(w, "{},{},{},{}", fmt(s.xi[k]), s.l_max[k], fmt(s.residuals[k]), fmt(s.convergence[k]))?;
        }
        Ok(())
    })?;
    let mut headline = vec![("residual".to_string(), s.residuals[0])];
    if let Some(slope) = s.slope {
        headline.push(("slope".to_string(), slope));
    }
    Ok((Vec::new(), headline, json!({ "slope": s.slope, "residuals": s.residuals })))
}

fn run_custom(c: &RunConfig, out: &mut Outputs) -> Result<RunParts> {
    let path = c.geometry.as_ref().expect("validated");
    let text = fs::read_to_string(path)?;
    let geom: RotorGeometry = text.parse()?;
    let tensors = diffusion_from_particles(&geom, c.kt)?;
    let mut warnings = Vec::new();
    if let Some(v) = &tensors.weights.violation {
        warnings.push(format!(
            "Lindblad weight {} is negative ({:.3e}); the quantum generator is not completely positive",
            v.index + 1,
            v.weight
        ));
    }
    out.json("tensors.json", &tensors)?;
    let kernel = StepKernel::new(&tensors)?;
    let start = if tensors.rank == 3 {
        ClassicalState::full(Orientation::identity(), Vector3::zeros())
    } else {
        ClassicalState::linear(tensors.inertia_axes.column(0).into_owned(), Vector3::zeros())?
    };
    let mut e = Ensemble::replicate(start, c.trajectories, c.seed)?;
    let dt = c.dt.unwrap_or_else(|| 1e-3 / tensors.friction.max().max(f64::MIN_POSITIVE));
    let per_output = (c.dt_output / dt).round().max(1.0) as usize;
    let n_out = (c.t_final / (per_output as f64 * dt)).round() as usize;
    let mut series = vec![ensemble_moments(&e, &tensors)?];
    for _ in 0..n_out {
        e.advance(&kernel, dt, per_output)?;
        series.push(ensemble_moments(&e, &tensors)?);
    }
    out.write("moments.csv", |w| write_moments_csv(w, &series))?;
    let last = series.last().expect("non-empty");
    let headline = vec![
        ("final_energy".to_string(), last.energy),
        ("equipartition_energy".to_string(), tensors.rank as f64 / 2.0 * c.kt),
    ];
    Ok((warnings, headline, json!({ "rank": tensors.rank, "completely_positive": tensors.weights.is_completely_positive(), "dt": dt })))
}

/// Result of a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub out: PathBuf,
    pub parameter: String,
    pub values: Vec<String>,
    pub runs: Vec<RunSummary>,
    /// Least-squares slope of `log headline` against `log value` for the
    /// first headline column, when all entries are positive.
    pub loglog_slope: Option<f64>,
}

/// Run `template` once per value of `parameter`, each in `<out>/<parameter>_<value>`,
/// up to `jobs` at a time, and aggregate headline scalars into `sweep.csv`.
pub fn sweep(template: &[(String, String)], experiment: Experiment, parameter: &str, values: &[String], jobs: usize) -> Result<SweepSummary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one value".into()));
    }
    if jobs == 0 {
        return Err(Error::InvalidArgument("jobs must be at least 1".into()));
    }
    let key = if experiment == Experiment::GibbsScaling && parameter == "xi" { "xi_list" } else { parameter };
    let base = RunConfig::from_pairs(Some(experiment), template)?;
    let configs: Vec<RunConfig> = values
        .iter()
        .map(|v| {
            let mut pairs = template.to_vec();
            pairs.push((key.to_string(), v.clone()));
            pairs.push(("out".to_string(), base.out.join(format!("{parameter}_{v}")).display().to_string()));
            RunConfig::from_pairs(Some(experiment), &pairs)
        })
        .collect::<Result<_>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {jobs} jobs: {e}")))?;
    let runs: Vec<RunSummary> = pool.install(|| configs.par_iter().map(run).collect::<Result<_>>())?;
    let mut out = Outputs::new(&base.out)?;
    let names: Vec<String> = runs[0].headline.iter().map(|(k, _)| k.clone()).collect();
    out.write("sweep.csv", |w| {
        writeln!(w, "{parameter},{}", names.join(","))?;
        for (v, r) in values.iter().zip(&runs) {
            let cols: Vec<String> = r.headline.iter().map(|(_, x)| fmt(*x)).collect();
            writeln!(w, "{v},{}", cols.join(","))?;
        }
        Ok(())
    })?;
    let xs: Option<Vec<f64>> = values.iter().map(|v| v.parse::<f64>().ok().filter(|x| *x > 0.0)).collect();
    let ys: Option<Vec<f64>> = runs.iter().map(|r| r.headline.first().map(|h| h.1).filter(|y| *y > 0.0)).collect();
    let loglog_slope = match (xs, ys) {
        (Some(x), Some(y)) if x.len() >= 2 => Some(fit_slope(
            &x.iter().map(|v| v.ln()).collect::<Vec<_>>(),
            &y.iter().map(|v| v.ln()).collect::<Vec<_>>(),
        )),
        _ => None,
    };
    let warnings: Vec<String> = runs
        .iter()
        .zip(values)
        .flat_map(|(r, v)| r.warnings.iter().map(move |w| format!("{parameter}={v}: {w}")))
        .collect();
    let extras = json!({
        "parameter": parameter,
        "values": values,
        "runs": runs.iter().map(|r| r.out.display().to_string()).collect::<Vec<_>>(),
        "loglog_slope": loglog_slope,
    });
    let headline: Vec<(String, f64)> = loglog_slope.map(|s| ("loglog_slope".to_string(), s)).into_iter().collect();
    write_manifest(&out, &base, &warnings, &headline, &extras)?;
    Ok(SweepSummary {
        out: base.out,
        parameter: parameter.to_string(),
        values: values.to_vec(),
        runs,
        loglog_slope,
    })
}
