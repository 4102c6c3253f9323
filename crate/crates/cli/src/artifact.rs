//! CSV artifacts with a `#`-prefixed JSON metadata line.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use raddamp::diagnostics::DiagnosticSeries;
use raddamp::dynamics::{RunInfo, ScenarioConfig, SimulationRecord};
use raddamp::field::theta_threshold;
use raddamp::history::{Trajectory, TrajectoryHistory};
use raddamp::Vec3;
use serde_json::{json, Value};

pub const RUN_COLUMNS: [&str; 10] = ["t", "q1", "q2", "q3", "v1", "v2", "v3", "a1", "a2", "a3"];

/// Writes `path` through a temporary sibling so a failed write leaves nothing behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))
}

fn render(meta: &Value, header: &[&str], rows: &[Vec<f64>]) -> Result<Vec<u8>> {
    let mut out = format!("# {}\n", serde_json::to_string(meta)?).into_bytes();
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(header)?;
    for r in rows {
        if r.iter().any(|x| !x.is_finite()) {
            bail!("refusing to write a non-finite value");
        }
        w.write_record(r.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    drop(w);
    Ok(out)
}

/// Metadata shared by every artifact of a run.
pub fn run_meta(cfg: &ScenarioConfig) -> Value {
    json!({
        "step": cfg.h,
        "t_end": cfg.t_end,
        "orders": cfg.orders,
        "field_settings": cfg.field_settings,
        "tool_version": env!("CARGO_PKG_VERSION"),
    })
}

pub fn write_run(path: &Path, run: &SimulationRecord<f64>) -> Result<()> {
    let h = &run.history;
    let rows: Vec<Vec<f64>> = (0..h.len())
        .map(|n| {
            let (t, k) = h.knot(n);
            let mut r = vec![t];
            r.extend(k.q.to_f64());
            r.extend(k.v.to_f64());
            r.extend(k.a.to_f64());
            r
        })
        .collect();
    let mut meta = run_meta(&run.config);
    meta["kind"] = json!("run");
    meta["config"] = serde_json::to_value(&run.config)?;
    meta["speed_bound"] = json!(run.info.speed_bound);
    meta["max_plane_deviation"] = json!(run.info.max_plane_deviation);
    write_atomic(path, &render(&meta, &RUN_COLUMNS, &rows)?)
}

pub fn write_series(path: &Path, series: &DiagnosticSeries, extra: Value) -> Result<()> {
    series.validate()?;
    let mut meta = extra;
    meta["kind"] = json!("series");
    meta["name"] = json!(series.name);
    meta["metadata"] = serde_json::to_value(&series.metadata)?;
    let mut header = vec!["t"];
    header.extend(series.columns.iter().map(|s| s.as_str()));
    let rows: Vec<Vec<f64>> = series
        .times
        .iter()
        .zip(&series.values)
        .map(|(t, v)| std::iter::once(*t).chain(v.iter().copied()).collect())
        .collect();
    write_atomic(path, &render(&meta, &header, &rows)?)
}

pub fn write_table(path: &Path, meta: Value, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_atomic(path, &render(&meta, header, rows)?)
}

/// Reads a run artifact back into a record with the system rebuilt from its config snapshot.
pub fn read_run(path: &Path) -> Result<SimulationRecord<f64>> {
    let bad = |why: String| anyhow!("corrupted run artifact {}: {why}", path.display());
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let meta: Value = first
        .strip_prefix("# ")
        .ok_or_else(|| bad("missing metadata line".into()))
        .and_then(|s| serde_json::from_str(s).map_err(|e| bad(format!("metadata is not JSON ({e})"))))?;
    if meta["kind"] != "run" {
        return Err(bad("metadata does not describe a run".into()));
    }
    let config: ScenarioConfig =
        serde_json::from_value(meta["config"].clone()).map_err(|e| bad(format!("config snapshot ({e})")))?;
    config.validate().map_err(|e| bad(format!("config snapshot ({e})")))?;
    let system = config.build::<f64>().map_err(|e| bad(e.to_string()))?;

    let mut rd = csv::Reader::from_reader(reader);
    let header: Vec<String> = rd.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    if header != RUN_COLUMNS {
        return Err(bad(format!("unexpected columns {header:?}")));
    }
    let mut history: Option<TrajectoryHistory<f64>> = None;
    let mut plane_dev: f64 = 0.0;
    for (n, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| bad(format!("row {}: {e}", n + 1)))?;
        let x: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| bad(format!("row {}: non-numeric or non-finite entry", n + 1)))?;
        if (x[0] - n as f64 * config.h).abs() > 1e-9 * (1.0 + x[0].abs()) {
            return Err(bad(format!("row {}: time {} is off the step grid", n + 1, x[0])));
        }
        let v3 = |i: usize| Vec3::new(x[i], x[i + 1], x[i + 2]);
        plane_dev = plane_dev.max(x[3].abs() + x[6].abs());
        match history.as_mut() {
            None => {
                let quiescent = system.solver.data.coulomb.is_some();
                history = Some(TrajectoryHistory::new(config.h, v3(1), v3(4), v3(7), quiescent)?);
            }
            Some(h) => h.push(v3(1), v3(4), v3(7)),
        }
    }
    let history = history.ok_or_else(|| bad("no knots".into()))?;
    if history.len() != config.steps() + 1 {
        return Err(bad(format!("{} knots, the config asks for {}", history.len(), config.steps() + 1)));
    }
    let speed_bound = history.speed_bound();
    let info = RunInfo {
        steps: config.steps(),
        wall_time_s: 0.0,
        speed_bound,
        theta: theta_threshold(speed_bound, config.tolerances.cone_eps)?,
        escape_radius: config.escape_radius(),
        max_plane_deviation: if config.plane { plane_dev } else { 0.0 },
    };
    Ok(SimulationRecord { config, system, history, forces: vec![], info })
}

pub fn artifact_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.csv"))
}
