//! Plain-text `key = value` scenario files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use raddamp::dynamics::{CoulombPart, DensitySpec, FieldSpec, FreeField, PotentialSpec, ScenarioConfig};
use raddamp::model::PotentialKind;

#[derive(Debug)]
struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{line}`", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                bail!("line {}: empty key or value", i + 1);
            }
            if let Some((first, _)) = map.insert(k.to_string(), (i + 1, v.to_string())) {
                bail!("line {}: duplicate key `{k}` (first set on line {first})", i + 1);
            }
        }
        Ok(Self { map })
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        self.map.remove(key).map(|(_, v)| v)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => {
                let x: f64 = v.parse().map_err(|_| anyhow!("`{key}`: expected a number, got `{v}`"))?;
                if !x.is_finite() {
                    bail!("`{key}`: must be finite, got `{v}`");
                }
                Ok(x)
            }
        }
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        if self.map.contains_key(key) {
            self.f64_or(key, 0.0).map(Some)
        } else {
            Ok(None)
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| anyhow!("`{key}`: expected a nonnegative integer, got `{v}`")),
        }
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key).as_deref() {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => bail!("`{key}`: expected true or false, got `{v}`"),
        }
    }

    fn word_or(&mut self, key: &str, default: &str, allowed: &[&str]) -> Result<String> {
        let v = self.raw(key).unwrap_or_else(|| default.to_string());
        if !allowed.contains(&v.as_str()) {
            bail!("`{key}`: unknown value `{v}`, expected one of {}", allowed.join(", "));
        }
        Ok(v)
    }

    fn vec3_or(&mut self, prefix: &str, default: [f64; 3]) -> Result<[f64; 3]> {
        let mut out = default;
        for (i, x) in out.iter_mut().enumerate() {
            *x = self.f64_or(&format!("{prefix}{}", i + 1), *x)?;
        }
        Ok(out)
    }

    fn leftover(self) -> Vec<(usize, String)> {
        let mut v: Vec<(usize, String)> = self.map.into_iter().map(|(k, (line, _))| (line, k)).collect();
        v.sort();
        v
    }
}

/// Parses a scenario file in strict mode: unknown keys are errors.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let (cfg, unknown) = parse_config_lenient(text)?;
    if !unknown.is_empty() {
        let list: Vec<String> = unknown.iter().map(|k| format!("`{k}`")).collect();
        bail!("unknown key(s): {}", list.join(", "));
    }
    Ok(cfg)
}

/// Parses a scenario file and returns the keys it did not recognise.
pub fn parse_config_lenient(text: &str) -> Result<(ScenarioConfig, Vec<String>)> {
    let mut e = Entries::parse(text)?;
    let base = ScenarioConfig::default();

    let rho_kind = e.word_or("rho", "bump", &["bump", "uniform_ball", "shell", "zero"])?;
    let radius = e.f64_or("rho.radius", 1.0)?;
    let rho = match rho_kind.as_str() {
        "bump" => DensitySpec::Bump { radius, charge: e.f64_or("rho.charge", 1.0)? },
        "uniform_ball" => DensitySpec::UniformBall { radius, charge: e.f64_or("rho.charge", 1.0)? },
        "shell" => DensitySpec::Shell {
            radius,
            width: e.f64_or("rho.width", 0.01 * radius)?,
            charge: e.f64_or("rho.charge", 1.0)?,
        },
        _ => DensitySpec::Zero { radius },
    };

    let pot_kind = e.word_or("potential", "harmonic", &["harmonic", "quartic", "cubic"])?;
    let kind = match pot_kind.as_str() {
        "harmonic" => PotentialKind::Harmonic,
        "quartic" => PotentialKind::Quartic { lambda: e.f64_or("potential.lambda", 0.1)? },
        _ => PotentialKind::Cubic {
            kappa: e.f64_or("potential.kappa", 0.5)?,
            lambda: e.f64_or("potential.lambda", 0.1)?,
        },
    };
    let potential = PotentialSpec { kind, nu0: e.f64_or("potential.nu0", 1.0)?, minimum: e.vec3_or("potential.min", [0.0; 3])? };

    let q0 = e.vec3_or("init.q", [0.0; 3])?;
    let p0 = e.vec3_or("init.p", [0.0; 3])?;

    let free_kind = e.word_or("field.free", "none", &["none", "bump", "plateau", "algebraic"])?;
    let free = if free_kind == "none" {
        FreeField::None
    } else {
        let center = e.vec3_or("field.center", [0.0; 3])?;
        let amp_phi = e.f64_or("field.amp_phi", 0.0)?;
        let amp_pi = e.f64_or("field.amp_pi", 0.0)?;
        match free_kind.as_str() {
            "bump" => FreeField::Bump { center, radius: e.f64_or("field.radius", 1.0)?, amp_phi, amp_pi },
            "plateau" => FreeField::Plateau {
                center,
                inner: e.f64_or("field.inner", 1.0)?,
                outer: e.f64_or("field.outer", 2.0)?,
                amp_phi,
                amp_pi,
            },
            _ => FreeField::Algebraic {
                center,
                scale: e.f64_or("field.scale", 1.0)?,
                sigma: e.f64_or("field.sigma", 2.0)?,
                amp_phi,
                amp_pi,
            },
        }
    };
    let coulomb = match e.word_or("field.coulomb", "none", &["none", "particle", "minimum"])?.as_str() {
        "particle" => CoulombPart::Particle,
        "minimum" => CoulombPart::Minimum,
        _ => CoulombPart::None,
    };

    let t_end = e.f64_or("run.T", base.t_end)?;
    // default step: the largest divisor of the horizon not above 0.02 R_ρ
    let h0 = 0.02 * rho.support_radius();
    let h_default = if t_end > 0.0 { t_end / (t_end / h0 - 1e-9).ceil().max(1.0) } else { h0 };
    let mut cfg = ScenarioConfig {
        h: e.f64_or("run.h", h_default)?,
        rho,
        potential,
        q0,
        p0,
        field: FieldSpec { free, coulomb },
        t_end,
        plane: e.bool_or("run.plane", false)?,
        ..base
    };
    cfg.tolerances.plane = e.f64_or("run.plane_tol", cfg.tolerances.plane)?;
    cfg.tolerances.escape_radius = e.opt_f64("run.escape")?;
    cfg.tolerances.cone_eps = e.f64_or("run.cone_eps", cfg.tolerances.cone_eps)?;
    cfg.orders.radial = e.usize_or("quad.radial", cfg.orders.radial)?;
    cfg.orders.polar = e.usize_or("quad.polar", cfg.orders.polar)?;
    cfg.orders.azimuthal = e.usize_or("quad.azimuthal", cfg.orders.azimuthal)?;
    let fs = &mut cfg.field_settings;
    fs.panel_order = e.usize_or("quad.panel_order", fs.panel_order)?;
    fs.sphere_polar = e.usize_or("quad.sphere_polar", fs.sphere_polar)?;
    fs.sphere_azimuth = e.usize_or("quad.sphere_azimuth", fs.sphere_azimuth)?;

    let unknown: Vec<String> = e.leftover().into_iter().map(|(line, k)| format!("{k} (line {line})")).collect();
    check_orders(&cfg)?;
    cfg.validate().context("scenario rejected")?;
    Ok((cfg, unknown))
}

fn check_orders(cfg: &ScenarioConfig) -> Result<()> {
    let all = [
        ("quad.radial", cfg.orders.radial),
        ("quad.polar", cfg.orders.polar),
        ("quad.azimuthal", cfg.orders.azimuthal),
        ("quad.panel_order", cfg.field_settings.panel_order),
        ("quad.sphere_polar", cfg.field_settings.sphere_polar),
        ("quad.sphere_azimuth", cfg.field_settings.sphere_azimuth),
    ];
    for (k, n) in all {
        if n == 0 {
            bail!("`{k}`: must be at least 1");
        }
    }
    Ok(())
}

/// Writes every key of `cfg`; `parse_config` reads it back unchanged.
pub fn config_to_text(cfg: &ScenarioConfig) -> String {
    let mut s = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    let vec3 = |put: &mut dyn FnMut(&str, String), prefix: &str, v: [f64; 3]| {
        for (i, x) in v.iter().enumerate() {
            put(&format!("{prefix}{}", i + 1), x.to_string());
        }
    };
    match cfg.rho {
        DensitySpec::Bump { radius, charge } => {
            put("rho", "bump".into());
            put("rho.radius", radius.to_string());
            put("rho.charge", charge.to_string());
        }
        DensitySpec::UniformBall { radius, charge } => {
            put("rho", "uniform_ball".into());
            put("rho.radius", radius.to_string());
            put("rho.charge", charge.to_string());
        }
        DensitySpec::Shell { radius, width, charge } => {
            put("rho", "shell".into());
            put("rho.radius", radius.to_string());
            put("rho.width", width.to_string());
            put("rho.charge", charge.to_string());
        }
        DensitySpec::Zero { radius } => {
            put("rho", "zero".into());
            put("rho.radius", radius.to_string());
        }
    }
    match cfg.potential.kind {
        PotentialKind::Harmonic => put("potential", "harmonic".into()),
        PotentialKind::Quartic { lambda } => {
            put("potential", "quartic".into());
            put("potential.lambda", lambda.to_string());
        }
        PotentialKind::Cubic { kappa, lambda } => {
            put("potential", "cubic".into());
            put("potential.kappa", kappa.to_string());
            put("potential.lambda", lambda.to_string());
        }
    }
    put("potential.nu0", cfg.potential.nu0.to_string());
    vec3(&mut put, "potential.min", cfg.potential.minimum);
    vec3(&mut put, "init.q", cfg.q0);
    vec3(&mut put, "init.p", cfg.p0);
    let amps = |put: &mut dyn FnMut(&str, String), center: [f64; 3], phi: f64, pi: f64| {
        vec3(put, "field.center", center);
        put("field.amp_phi", phi.to_string());
        put("field.amp_pi", pi.to_string());
    };
    match cfg.field.free {
        FreeField::None => put("field.free", "none".into()),
        FreeField::Bump { center, radius, amp_phi, amp_pi } => {
            put("field.free", "bump".into());
            put("field.radius", radius.to_string());
            amps(&mut put, center, amp_phi, amp_pi);
        }
        FreeField::Plateau { center, inner, outer, amp_phi, amp_pi } => {
            put("field.free", "plateau".into());
            put("field.inner", inner.to_string());
            put("field.outer", outer.to_string());
            amps(&mut put, center, amp_phi, amp_pi);
        }
        FreeField::Algebraic { center, scale, sigma, amp_phi, amp_pi } => {
            put("field.free", "algebraic".into());
            put("field.scale", scale.to_string());
            put("field.sigma", sigma.to_string());
            amps(&mut put, center, amp_phi, amp_pi);
        }
    }
    let coulomb = match cfg.field.coulomb {
        CoulombPart::None => "none",
        CoulombPart::Particle => "particle",
        CoulombPart::Minimum => "minimum",
    };
    put("field.coulomb", coulomb.into());
    put("run.h", cfg.h.to_string());
    put("run.T", cfg.t_end.to_string());
    put("run.plane", cfg.plane.to_string());
    put("run.plane_tol", cfg.tolerances.plane.to_string());
    if let Some(r) = cfg.tolerances.escape_radius {
        put("run.escape", r.to_string());
    }
    put("run.cone_eps", cfg.tolerances.cone_eps.to_string());
    put("quad.radial", cfg.orders.radial.to_string());
    put("quad.polar", cfg.orders.polar.to_string());
    put("quad.azimuthal", cfg.orders.azimuthal.to_string());
    put("quad.panel_order", cfg.field_settings.panel_order.to_string());
    put("quad.sphere_polar", cfg.field_settings.sphere_polar.to_string());
    put("quad.sphere_azimuth", cfg.field_settings.sphere_azimuth.to_string());
    s
}
