//! Flat `section.key = value` run configuration.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use latstab::models::LoadMode;
use latstab::solver::SolverMethod;
use latstab::Model;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.origin, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model_name: String,
    pub sigma: f64,
    pub n: usize,
    pub scan_m: usize,
    pub tol_annulus: f64,
    pub det_threshold: f64,
    pub n_list: Vec<usize>,
    pub load: Vec<LoadMode>,
    pub solver_tol: f64,
    pub max_iter: usize,
    pub method: SolverMethod,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    pub direction: [f64; 2],
    pub k_max: f64,
    pub steps: usize,
}

pub const KEYS: &[&str] = &[
    "model.name",
    "model.sigma",
    "grid.N",
    "scan.M",
    "scan.tol_annulus",
    "scan.det_threshold",
    "convergence.N_list",
    "load.modes",
    "solver.tol",
    "solver.max_iter",
    "solver.method",
    "output.dir",
    "output.formats",
    "symbol.direction",
    "symbol.k_max",
    "symbol.steps",
];

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model_name: "harmonic".into(),
            sigma: 1.0,
            n: 16,
            scan_m: 1000,
            tol_annulus: 1e-8,
            det_threshold: 1e-6,
            n_list: vec![8, 16, 32, 64],
            load: vec![
                LoadMode {
                    component: 0,
                    k: [1, 0],
                    amplitude: 1.0,
                },
                LoadMode {
                    component: 1,
                    k: [0, 1],
                    amplitude: 0.5,
                },
            ],
            solver_tol: 1e-10,
            max_iter: 500,
            method: SolverMethod::Gmres,
            out_dir: PathBuf::from("out"),
            formats: vec![Format::Text, Format::Json],
            direction: [1.0, 0.0],
            k_max: 4.0,
            steps: 64,
        }
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got `{v}`"))?;
    if !x.is_finite() {
        return Err(format!("expected a finite number, got `{v}`"));
    }
    Ok(x)
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.parse().map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

fn positive(x: f64) -> Result<f64, String> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be positive, got {x}"))
    }
}

fn at_least(x: usize, min: usize) -> Result<usize, String> {
    if x >= min {
        Ok(x)
    } else {
        Err(format!("must be at least {min}, got {x}"))
    }
}

/// `c k0 k1 a` quadruples separated by `;`.
fn parse_modes(v: &str) -> Result<Vec<LoadMode>, String> {
    let mut out = Vec::new();
    for (i, term) in v.split(';').map(str::trim).enumerate() {
        if term.is_empty() {
            continue;
        }
        let parts: Vec<&str> = term.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(format!("load term {} must be `component k0 k1 amplitude`, got `{term}`", i + 1));
        }
        let component = parse_usize(parts[0])?;
        if component > 1 {
            return Err(format!("load term {}: component must be 0 or 1, got {component}", i + 1));
        }
        let k0: i64 = parts[1].parse().map_err(|_| format!("load term {}: bad wavevector `{}`", i + 1, parts[1]))?;
        let k1: i64 = parts[2].parse().map_err(|_| format!("load term {}: bad wavevector `{}`", i + 1, parts[2]))?;
        if k0 == 0 && k1 == 0 {
            return Err(format!("load term {}: wavevector (0, 0) has nonzero mean", i + 1));
        }
        out.push(LoadMode {
            component,
            k: [k0, k1],
            amplitude: parse_f64(parts[3])?,
        });
    }
    if out.is_empty() {
        return Err("load needs at least one term".into());
    }
    Ok(out)
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "model.name" => match value {
                "harmonic" | "lj" | "lj-pair" => self.model_name = value.to_string(),
                _ => return Err(format!("unknown model `{value}` (expected harmonic, lj or lj-pair)")),
            },
            "model.sigma" => self.sigma = positive(parse_f64(value)?)?,
            "grid.N" => self.n = at_least(parse_usize(value)?, 2)?,
            "scan.M" => self.scan_m = at_least(parse_usize(value)?, 100)?,
            "scan.tol_annulus" => {
                let t = positive(parse_f64(value)?)?;
                if t >= 0.5 {
                    return Err(format!("must be below 0.5, got {t}"));
                }
                self.tol_annulus = t;
            }
            "scan.det_threshold" => {
                let t = parse_f64(value)?;
                if t < 0.0 {
                    return Err(format!("must be non-negative, got {t}"));
                }
                self.det_threshold = t;
            }
            "convergence.N_list" => {
                let list = value
                    .split(',')
                    .map(|s| parse_usize(s.trim()).and_then(|n| at_least(n, 2)))
                    .collect::<Result<Vec<_>, _>>()?;
                if list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err("N list must be strictly increasing".into());
                }
                self.n_list = list;
            }
            "load.modes" => self.load = parse_modes(value)?,
            "solver.tol" => self.solver_tol = positive(parse_f64(value)?)?,
            "solver.max_iter" => self.max_iter = at_least(parse_usize(value)?, 1)?,
            "solver.method" => self.method = value.parse().map_err(|e: latstab::Error| e.to_string())?,
            "output.dir" => {
                if value.is_empty() {
                    return Err("output directory must not be empty".into());
                }
                self.out_dir = PathBuf::from(value);
            }
            "output.formats" => {
                let mut f = Vec::new();
                for name in value.split(',').map(str::trim) {
                    let v = match name {
                        "text" => Format::Text,
                        "json" => Format::Json,
                        _ => return Err(format!("unknown format `{name}` (expected text or json)")),
                    };
                    if !f.contains(&v) {
                        f.push(v);
                    }
                }
                self.formats = f;
            }
            "symbol.direction" => {
                let d: Vec<f64> = value.split_whitespace().map(parse_f64).collect::<Result<_, _>>()?;
                if d.len() != 2 || (d[0] == 0.0 && d[1] == 0.0) {
                    return Err(format!("direction must be two numbers, not both zero, got `{value}`"));
                }
                self.direction = [d[0], d[1]];
            }
            "symbol.k_max" => self.k_max = positive(parse_f64(value)?)?,
            "symbol.steps" => self.steps = at_least(parse_usize(value)?, 1)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn parse_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let at = |message: String| ConfigError {
                origin: format!("{origin}:{}", i + 1),
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) && KEYS.contains(&key) {
                return Err(at(format!("duplicate key `{key}`")));
            }
            cfg.set(key, value).map_err(|m| at(format!("{key}: {m}")))?;
        }
        Ok(cfg)
    }

    pub fn model(&self) -> latstab::Result<Model> {
        match self.model_name.as_str() {
            "lj" => Model::lj(self.sigma),
            "lj-pair" => Model::lj_pair(self.sigma),
            _ => Ok(Model::HarmonicTriangular),
        }
    }

    /// Canonical form of every key that affects results (the output location is excluded).
    pub fn canonical(&self) -> String {
        let e = |x: f64| format!("{x:.16e}");
        let modes: Vec<String> = self
            .load
            .iter()
            .map(|m| format!("{} {} {} {}", m.component, m.k[0], m.k[1], e(m.amplitude)))
            .collect();
        let formats: Vec<&str> = self
            .formats
            .iter()
            .map(|f| match f {
                Format::Text => "text",
                Format::Json => "json",
            })
            .collect();
        let lines = [
            ("model.name", self.model_name.clone()),
            ("model.sigma", e(self.sigma)),
            ("grid.N", self.n.to_string()),
            ("scan.M", self.scan_m.to_string()),
            ("scan.tol_annulus", e(self.tol_annulus)),
            ("scan.det_threshold", e(self.det_threshold)),
            (
                "convergence.N_list",
                self.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("load.modes", modes.join("; ")),
            ("solver.tol", e(self.solver_tol)),
            ("solver.max_iter", self.max_iter.to_string()),
            (
                "solver.method",
                match self.method {
                    SolverMethod::Gmres => "gmres".into(),
                    SolverMethod::Direct => "direct".into(),
                },
            ),
            ("output.formats", formats.join(",")),
            ("symbol.direction", format!("{} {}", e(self.direction[0]), e(self.direction[1]))),
            ("symbol.k_max", e(self.k_max)),
            ("symbol.steps", self.steps.to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
