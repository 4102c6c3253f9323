//! Run manifests and the pipeline that executes them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use raddamp::charge_analysis::{default_k_max, default_threshold, fourier_radial, wiener_scan};
use raddamp::diagnostics::{
    decay_fit, farfield_coverage, flux_balance, majorant, max_excursion, radiation_functional, relaxation_series,
    scattering_remainder, weighted_deviation_series, AuditSettings, DecayTarget, RadiationSettings, ScatterOptions,
};
use raddamp::dynamics::{linear_simulate, simulate, ScenarioConfig, SimulationRecord};
use raddamp::Vec3;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::artifact::{artifact_path, read_run, run_meta, write_atomic, write_run, write_series, write_table};
use crate::config::parse_config_lenient;

/// One pipeline stage with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Simulate,
    /// Cross-check of the far-field routes on random directions.
    Farfield { directions: usize, times: usize, tol: f64 },
    Wiener { samples: usize, k_max: Option<f64>, gate: bool },
    /// Energy balance on the ball of `radius` between `R + t0` and `R + t1`.
    Audit { radius: Option<f64>, t0: f64, t1: Option<f64> },
    Radiation { t_end: Option<f64> },
    Ratefit { alpha: f64, eps: f64, t_min: Option<f64>, t_max: Option<f64>, norm_times: usize, r_trunc: Option<f64> },
    Scatter { alpha: f64, eps: f64 },
    Linear { samples: usize, tol: f64 },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Farfield { .. } => "farfield",
            Command::Wiener { .. } => "wiener",
            Command::Audit { .. } => "audit",
            Command::Radiation { .. } => "radiation",
            Command::Ratefit { .. } => "ratefit",
            Command::Scatter { .. } => "scatter",
            Command::Linear { .. } => "linear",
        }
    }

    fn needs_run(&self) -> bool {
        !matches!(self, Command::Wiener { .. } | Command::Linear { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    /// Scenario file; may be omitted when `artifact` supplies the config snapshot.
    pub config_path: Option<PathBuf>,
    /// Existing run artifact used instead of simulating.
    pub artifact: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub commands: Vec<Command>,
    pub seed: u64,
    pub strict: bool,
    pub version: String,
}

impl RunManifest {
    pub fn new(config_path: Option<PathBuf>, out_dir: PathBuf, commands: Vec<Command>) -> Self {
        let scenario = config_path
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
        Self {
            scenario,
            config_path,
            artifact: None,
            out_dir,
            commands,
            seed: 0,
            strict: true,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub version: String,
    pub seed: u64,
    pub passed: bool,
    pub failures: Vec<String>,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
    pub artifacts: Vec<String>,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
}

struct Context_<'a> {
    manifest: &'a RunManifest,
    config: Option<ScenarioConfig>,
    run: Option<SimulationRecord<f64>>,
    checks: Vec<Check>,
    metrics: BTreeMap<String, Value>,
    artifacts: Vec<String>,
}

impl Context_<'_> {
    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }

    fn metric(&mut self, key: &str, v: impl Serialize) {
        self.metrics.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn out(&mut self, name: &str) -> PathBuf {
        let p = artifact_path(&self.manifest.out_dir, name);
        self.artifacts.push(p.display().to_string());
        p
    }

    fn config(&self) -> Result<&ScenarioConfig> {
        match (&self.config, &self.run) {
            (Some(c), _) => Ok(c),
            (None, Some(r)) => Ok(&r.config),
            _ => bail!("no scenario: pass --config or --artifact"),
        }
    }

    fn run(&mut self) -> Result<&SimulationRecord<f64>> {
        if self.run.is_none() {
            let cfg = self.config()?.clone();
            self.run = Some(simulate::<f64>(&cfg).context("simulation failed")?);
        }
        Ok(self.run.as_ref().unwrap())
    }
}

/// Runs every stage of `m`, writes the artifacts and `summary.json`.
pub fn execute(m: &RunManifest) -> Result<Summary> {
    let clock = Instant::now();
    fs::create_dir_all(&m.out_dir).with_context(|| format!("creating {}", m.out_dir.display()))?;
    let mut warnings = vec![];
    let config = match &m.config_path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let (cfg, unknown) = parse_config_lenient(&text).with_context(|| format!("in {}", p.display()))?;
            if !unknown.is_empty() {
                if m.strict {
                    bail!("in {}: unknown key(s): {}", p.display(), unknown.join(", "));
                }
                warnings.extend(unknown.into_iter().map(|k| format!("ignored unknown key {k}")));
            }
            Some(cfg)
        }
        None => None,
    };
    // loaded before any stage runs so a bad artifact leaves no output behind
    let run = match &m.artifact {
        Some(p) => Some(read_run(p)?),
        None => None,
    };
    if let (Some(c), Some(r)) = (&config, &run) {
        if *c != r.config {
            bail!("the run artifact was produced by a different config than {}", m.config_path.as_ref().unwrap().display());
        }
    }
    if config.is_none() && run.is_none() {
        bail!("no scenario: pass --config or --artifact");
    }
    let mut cx = Context_ { manifest: m, config, run, checks: vec![], metrics: BTreeMap::new(), artifacts: vec![] };
    for cmd in &m.commands {
        if cmd.needs_run() {
            cx.run()?;
        }
        stage(&mut cx, cmd).with_context(|| format!("stage `{}`", cmd.name()))?;
    }
    let failures: Vec<String> = cx.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let summary = Summary {
        scenario: m.scenario.clone(),
        version: m.version.clone(),
        seed: m.seed,
        passed: failures.is_empty(),
        failures,
        checks: cx.checks,
        metrics: cx.metrics,
        artifacts: cx.artifacts,
        warnings,
        wall_time_s: clock.elapsed().as_secs_f64(),
    };
    write_atomic(&m.out_dir.join("manifest.json"), serde_json::to_string_pretty(m)?.as_bytes())?;
    write_atomic(&m.out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(summary)
}

fn stage(cx: &mut Context_<'_>, cmd: &Command) -> Result<()> {
    match *cmd {
        Command::Simulate => {
            let path = cx.out("run");
            let run = cx.run.as_ref().unwrap();
            write_run(&path, run)?;
            let (_, last) = run.history.last();
            let dev = (last.q - run.system.potential.minimum).norm();
            let relax = relaxation_series(run)?.summary;
            let (plane, pdev, tol) = (run.config.plane, run.info.max_plane_deviation, run.config.tolerances.plane);
            let speed = run.info.speed_bound;
            cx.metric("final_deviation", dev);
            cx.metric("speed_bound", speed);
            cx.metric("envelope_ratio", relax.ratio);
            cx.metric("max_plane_deviation", pdev);
            cx.check("simulate.finite", dev.is_finite(), format!("final |q - q+| = {dev:e}"));
            if plane {
                cx.check("simulate.plane", pdev < tol, format!("max |q3| + |p3| = {pdev:e}, tolerance {tol:e}"));
            }
        }
        Command::Farfield { directions, times, tol } => {
            let path = cx.out("farfield");
            let seed = cx.manifest.seed;
            let run = cx.run.as_ref().unwrap();
            let (rows, worst, header) = farfield_rows(run, seed, directions, times)?;
            let mut meta = run_meta(&run.config);
            meta["seed"] = json!(seed);
            meta["ball_orders"] = json!([16, 32]);
            write_table(&path, meta, &header, &rows)?;
            cx.metric("farfield_max_rel_diff", worst);
            cx.check("farfield.routes", worst <= tol, format!("max pairwise relative difference {worst:e}, tolerance {tol:e}"));
        }
        Command::Wiener { samples, k_max, gate } => {
            let path = cx.out("wiener");
            let cfg = cx.config()?.clone();
            let rho = cfg.rho.build::<f64>(cfg.orders)?;
            let k_max = k_max.unwrap_or_else(|| default_k_max(&rho));
            let report = wiener_scan(&rho, k_max, samples, default_threshold(&rho))?;
            let n = samples.max(2);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let k = k_max * i as f64 / (n - 1) as f64;
                    vec![k, fourier_radial(&rho, k)]
                })
                .collect();
            let meta = json!({"kind": "wiener", "k_max": k_max, "samples": n, "threshold": report.threshold, "orders": cfg.orders});
            write_table(&path, meta, &["k", "rho_hat"], &rows)?;
            let detail = format!("min |rho^| = {:e} at k = {}, verdict {:?}", report.min_abs, report.argmin, report.verdict);
            cx.metric("wiener", &report);
            if gate {
                cx.check("wiener.verdict", report.passed(), detail);
            }
        }
        Command::Audit { radius, t0, t1 } => {
            let path = cx.out("audit");
            let run = cx.run.as_ref().unwrap();
            let r = radius.unwrap_or_else(|| (max_excursion(run) + run.system.rho.support_radius()).ceil() + 4.0);
            let t1 = t1.unwrap_or(run.config.t_end - r);
            let s = AuditSettings::default();
            let fb = flux_balance(run, r, t0, t1, &s)?;
            let mut meta = run_meta(&run.config);
            meta["audit_settings"] = json!(s);
            meta["radius"] = json!(r);
            let row = vec![fb.radius, fb.t_start, fb.t_end, fb.h_start, fb.h_end, fb.delta_h, fb.flux, fb.mismatch];
            write_table(&path, meta, &["radius", "t_start", "t_end", "h_start", "h_end", "delta_h", "flux", "mismatch"], &[row])?;
            let ok = fb.closes(1e-3, 1e-6);
            let detail = format!("dH = {:e}, flux = {:e}, mismatch = {:e}", fb.delta_h, fb.flux, fb.mismatch);
            cx.metric("audit", &fb);
            cx.check("audit.balance", ok, detail);
        }
        Command::Radiation { t_end } => {
            let path = cx.out("radiation");
            let run = cx.run.as_ref().unwrap();
            let s = RadiationSettings::default();
            let series = radiation_functional(run, t_end, &s)?;
            write_series(&path, &series, run_meta(&run.config))?;
            let c = series.column(0);
            let total = *c.last().unwrap_or(&0.0);
            let monotone = c.windows(2).all(|w| w[1] >= w[0]);
            let mid = series.times[series.len() / 2];
            let half = raddamp::diagnostics::cumulative_at(&series, mid);
            cx.metric("radiation_total", total);
            cx.metric("radiation_late_over_early", if half > 0.0 { (total - half) / half } else { 0.0 });
            cx.check("radiation.monotone", monotone, format!("cumulative {total:e} at t = {}", series.times.last().unwrap()));
        }
        Command::Ratefit { alpha, eps, t_min, t_max, norm_times, r_trunc } => {
            let p_speed = cx.out("speed");
            let p_norm = cx.out("weighted_norm");
            let run = cx.run.as_ref().unwrap();
            let target = DecayTarget { alpha, eps };
            let end = run.config.t_end;
            let (a, b) = (t_min.unwrap_or(0.25 * end), t_max.unwrap_or(end));
            let rel = relaxation_series(run)?;
            let speed_fit = decay_fit(&rel.speed.times, &majorant(&rel.speed.column(0)), a, b, target)?;
            let r_trunc = r_trunc.unwrap_or_else(|| (2.0 * (max_excursion(run) + run.system.rho.support_radius())).ceil());
            let n = norm_times.max(2);
            let times: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
            let norm = weighted_deviation_series(run, alpha, &times, r_trunc, &AuditSettings::default())?;
            let norm_fit = decay_fit(&norm.times, &majorant(&norm.column(0)), a, b, target)?;
            write_series(&p_speed, &rel.speed, run_meta(&run.config))?;
            write_series(&p_norm, &norm, run_meta(&run.config))?;
            let d = |f: &raddamp::diagnostics::DecayFit| format!("beta = {:.4} ({:?})", f.beta, f.flag);
            let (ds, dn) = (d(&speed_fit), d(&norm_fit));
            let (cs, cn) = (speed_fit.consistent(), norm_fit.consistent());
            cx.metric("speed_fit", &speed_fit);
            cx.metric("weighted_norm_fit", &norm_fit);
            cx.check("ratefit.speed", cs, ds);
            cx.check("ratefit.weighted_norm", cn, dn);
        }
        Command::Scatter { alpha, eps } => {
            let p_src = cx.out("scatter_source");
            let p_bound = cx.out("scatter_bound");
            let run = cx.run.as_ref().unwrap();
            let opts = ScatterOptions { target: DecayTarget { alpha, eps }, ..ScatterOptions::default() };
            let sc = scattering_remainder(run, &opts)?;
            write_series(&p_src, &sc.source, run_meta(&run.config))?;
            write_series(&p_bound, &sc.bound, run_meta(&run.config))?;
            let (ok, detail) = match &sc.bound_fit {
                Some(f) => (f.consistent(), format!("bound beta = {:.4} ({:?}), tail {:e}", f.beta, f.flag, sc.tail)),
                None => (true, "remainder vanishes".to_string()),
            };
            cx.metric("scatter_bound_fit", &sc.bound_fit);
            cx.metric("scatter_tail", sc.tail);
            cx.check("scatter.bound", ok, detail);
        }
        Command::Linear { samples, tol } => {
            let path = cx.out("linear_energy");
            let cfg = cx.config()?.clone();
            let lin = linear_simulate::<f64>(&cfg)?;
            let n = samples.max(2);
            let mut rows = vec![];
            for i in 0..n {
                let e = lin.energy_at(cfg.t_end * i as f64 / (n - 1) as f64)?;
                rows.push(vec![e.t, e.value, e.particle, e.field, e.tail, e.radius]);
            }
            let e0 = rows[0][1];
            let drift = rows.iter().map(|r| (r[1] - e0).abs() / e0.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
            write_table(&path, run_meta(&cfg), &["t", "energy", "particle", "field", "tail", "radius"], &rows)?;
            cx.metric("linear_energy_drift", drift);
            cx.check("linear.energy", drift < tol, format!("relative drift {drift:e}, tolerance {tol:e}"));
        }
    }
    Ok(())
}

type Table = (Vec<Vec<f64>>, f64, Vec<&'static str>);

fn farfield_rows(run: &SimulationRecord<f64>, seed: u64, directions: usize, times: usize) -> Result<Table> {
    let solver = &run.system.solver;
    let hist = &run.history;
    let eps = run.config.tolerances.cone_eps;
    let with_cone = run.config.plane;
    let theta = if with_cone { run.info.theta } else { 0.0 };
    let (a, b) = farfield_coverage(run);
    if !(b > a) {
        bail!("the run is too short for far-field amplitudes (covered window [{a}, {b}])");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![];
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let z: f64 = rng.gen_range(theta..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let ph: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let s = (1.0 - z * z).sqrt();
        let w = Vec3::new(s * ph.cos(), s * ph.sin(), z);
        for i in 0..times {
            let t = a + (b - a) * (i as f64 + 0.5) / times as f64;
            let mut vals = vec![solver.farfield_amplitude(hist, w, t)?, solver.farfield_amplitude_ball(hist, w, t, 16, 32)?];
            if with_cone {
                vals.push(solver.farfield_amplitude_cone(hist, w, t, eps)?.value);
            }
            for j in 0..vals.len() {
                for k in j + 1..vals.len() {
                    let d = (vals[j] - vals[k]).abs() / vals[j].abs().max(vals[k].abs()).max(1e-8);
                    worst = worst.max(d);
                }
            }
            let mut row = vec![t, w[0], w[1], w[2]];
            row.extend(vals);
            rows.push(row);
        }
    }
    let mut header = vec!["t", "w1", "w2", "w3", "plane", "ball"];
    if with_cone {
        header.push("cone");
    }
    Ok((rows, worst, header))
}

/// Reads a manifest written by `execute` or by hand.
pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
}
