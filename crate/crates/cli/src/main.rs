mod config;
mod report;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use latstab::lattice::{Grid, Lattice};
use latstab::solver::trigonometric_load;
use latstab::stencil::{hermitian_defect, max_entry, CMatrix};
use latstab::{convergence_study, full_stability_report, SolverOptions, StabilityOptions, Verdict};

use config::{ConfigError, Format, RunConfig};
use report::{fl, Metadata, ReportBundle, ScanPoint};

#[derive(Parser, Debug)]
#[command(name = "latstab", version, about = "Stability checks and refinement studies for coupled lattice schemes")]
struct Cli {
    /// Flat `section.key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for the library's parallel loops.
    #[arg(long, global = true, env = "LATSTAB_THREADS", value_name = "K")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Runs every stability check and writes the report.
    Stability(Overrides),
    /// Writes the boundary determinant scan as CSV.
    Detscan(Overrides),
    /// Runs the refinement study and writes the error table.
    Converge(Overrides),
    /// Tabulates atomistic, discrete continuum and Cauchy-Born symbols along a ray.
    Symbol(Overrides),
}

#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long = "N", alias = "n")]
    n: Option<String>,
    #[arg(long = "scan-M", alias = "scan-m")]
    scan_m: Option<String>,
    #[arg(long)]
    tol_annulus: Option<String>,
    #[arg(long)]
    det_threshold: Option<String>,
    #[arg(long = "N-list", alias = "n-list")]
    n_list: Option<String>,
    #[arg(long)]
    load: Option<String>,
    #[arg(long)]
    solver_tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    formats: Option<String>,
    #[arg(long)]
    direction: Option<String>,
    #[arg(long)]
    k_max: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// Any config key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(String, &'static str, String)> {
        let named: [(&Option<String>, &str, &'static str); 15] = [
            (&self.model, "--model", "model.name"),
            (&self.sigma, "--sigma", "model.sigma"),
            (&self.n, "--N", "grid.N"),
            (&self.scan_m, "--scan-M", "scan.M"),
            (&self.tol_annulus, "--tol-annulus", "scan.tol_annulus"),
            (&self.det_threshold, "--det-threshold", "scan.det_threshold"),
            (&self.n_list, "--N-list", "convergence.N_list"),
            (&self.load, "--load", "load.modes"),
            (&self.solver_tol, "--solver-tol", "solver.tol"),
            (&self.max_iter, "--max-iter", "solver.max_iter"),
            (&self.method, "--method", "solver.method"),
            (&self.formats, "--formats", "output.formats"),
            (&self.direction, "--direction", "symbol.direction"),
            (&self.k_max, "--k-max", "symbol.k_max"),
            (&self.steps, "--steps", "symbol.steps"),
        ];
        named
            .into_iter()
            .filter_map(|(v, flag, key)| v.as_ref().map(|v| (flag.to_string(), key, v.clone())))
            .collect()
    }
}

fn load_config(cli: &Cli, ov: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let origin = path.display().to_string();
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
                origin: origin.clone(),
                message: e.to_string(),
            })?;
            RunConfig::parse_str(&text, &origin)?
        }
        None => RunConfig::default(),
    };
    for (flag, key, value) in ov.pairs() {
        cfg.set(key, &value).map_err(|message| ConfigError { origin: flag, message })?;
    }
    for item in &ov.set {
        let err = |message: String| ConfigError {
            origin: format!("--set {item}"),
            message,
        };
        let (k, v) = item.split_once('=').ok_or_else(|| err("expected KEY=VALUE".into()))?;
        cfg.set(k.trim(), v.trim()).map_err(err)?;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn stability_options(cfg: &RunConfig) -> StabilityOptions {
    StabilityOptions {
        scan_m: cfg.scan_m,
        tol_annulus: cfg.tol_annulus,
        det_threshold: cfg.det_threshold,
        ..Default::default()
    }
}

fn grid(cfg: &RunConfig) -> Result<Grid> {
    Ok(Grid::new(Lattice::triangular(), cfg.n)?)
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => 2,
        Verdict::Unresolved => 3,
    }
}

fn cmd_stability(cfg: &RunConfig, start: Instant) -> Result<u8> {
    let model = cfg.model()?;
    let r = full_stability_report(&model, &grid(cfg)?, &stability_options(cfg))?;
    let meta = Metadata::new(&cfg.canonical(), start.elapsed().as_secs_f64());
    let mut files = Vec::new();
    if cfg.formats.contains(&Format::Text) {
        files.push(("report.txt", format!("{}{}", report::stability_text(&r), meta.block())));
    }
    if cfg.formats.contains(&Format::Json) {
        let bundle = ReportBundle {
            stability: Some(&r),
            convergence: None,
            scan_series: Some(r.mode1.series.iter().map(ScanPoint::from).collect()),
            metadata: &meta,
        };
        files.push(("report.json", serde_json::to_string_pretty(&bundle)? + "\n"));
    }
    for (name, body) in &files {
        report::write_atomic(&cfg.out_dir.join(name), body)?;
    }
    println!(
        "{}: overall {} (mode1 min margin {}, min |det A| {})",
        r.model,
        r.overall.as_str(),
        fl(r.mode1.min_margin),
        fl(r.mode1.min_abs_det)
    );
    Ok(verdict_code(r.overall))
}

fn cmd_detscan(cfg: &RunConfig, start: Instant) -> Result<u8> {
    let model = cfg.model()?;
    let r = full_stability_report(&model, &grid(cfg)?, &stability_options(cfg))?;
    let m = &r.mode1;
    let meta = Metadata::new(&cfg.canonical(), start.elapsed().as_secs_f64());
    let mut summary = String::new();
    let _ = writeln!(summary, "model: {}", r.model);
    let _ = writeln!(summary, "rows: {}", m.series.len());
    let _ = writeln!(summary, "min_abs_det: {}", fl(m.min_abs_det));
    let _ = writeln!(summary, "argmin_theta: {}", fl(m.argmin_theta));
    let _ = writeln!(summary, "min_margin: {}", fl(m.min_margin));
    let _ = writeln!(summary, "monotone_fraction: {}", fl(m.monotone_fraction));
    let _ = writeln!(summary, "symmetry_defect: {}", fl(m.symmetry_defect));
    summary.push_str(&meta.block());
    report::write_atomic(&cfg.out_dir.join("detscan.csv"), &report::detscan_csv(&m.series))?;
    report::write_atomic(&cfg.out_dir.join("detscan.txt"), &summary)?;
    println!(
        "{}: {} scan rows, min |det A| {} at theta {}, D|det A| > 0 on (0, pi) for fraction {}",
        r.model,
        m.series.len(),
        fl(m.min_abs_det),
        fl(m.argmin_theta),
        fl(m.monotone_fraction)
    );
    Ok(0)
}

fn cmd_converge(cfg: &RunConfig, start: Instant) -> Result<u8> {
    let model = cfg.model()?;
    let load = trigonometric_load(&model, cfg.load.clone());
    let opts = SolverOptions {
        tol: cfg.solver_tol,
        max_iter: cfg.max_iter,
        method: cfg.method,
        ..Default::default()
    };
    let t = convergence_study(&model, &load, &cfg.n_list, &opts)?;
    let meta = Metadata::new(&cfg.canonical(), start.elapsed().as_secs_f64());
    report::write_atomic(&cfg.out_dir.join("convergence.csv"), &report::convergence_csv(&t))?;
    if cfg.formats.contains(&Format::Text) {
        let body = format!("{}{}", report::convergence_text(&t), meta.block());
        report::write_atomic(&cfg.out_dir.join("convergence.txt"), &body)?;
    }
    if cfg.formats.contains(&Format::Json) {
        let bundle = ReportBundle {
            stability: None,
            convergence: Some(&t),
            scan_series: None,
            metadata: &meta,
        };
        report::write_atomic(&cfg.out_dir.join("convergence.json"), &(serde_json::to_string_pretty(&bundle)? + "\n"))?;
    }
    println!("{}: fitted order {}", t.model, report::order_string(t.fitted_order));
    Ok(0)
}

fn entries(h: &CMatrix) -> [f64; 4] {
    [h[(0, 0)].re, h[(0, 1)].re, h[(1, 0)].re, h[(1, 1)].re]
}

fn cmd_symbol(cfg: &RunConfig) -> Result<u8> {
    let model = cfg.model()?;
    let eps = grid(cfg)?.eps();
    let (sa, sc) = (model.atomistic_stencil(eps), model.continuum_stencil(eps));
    let mut s = String::from("t,k0,k1");
    for name in ["h_at", "h_eps", "h_cb"] {
        for ij in ["00", "01", "10", "11"] {
            let _ = write!(s, ",{name}_{ij}");
        }
    }
    s.push_str(",diff_at_cb,diff_at_eps,diff_eps_cb,hermitian_residual\n");
    for i in 0..=cfg.steps {
        let t = cfg.k_max * i as f64 / cfg.steps as f64;
        let k = [t * cfg.direction[0], t * cfg.direction[1]];
        let (ha, he, hc) = (sa.symbol(eps, &k), sc.symbol(eps, &k), model.symbol_cb(&k));
        let _ = write!(s, "{},{},{}", fl(t), fl(k[0]), fl(k[1]));
        for h in [&ha, &he, &hc] {
            for v in entries(h) {
                let _ = write!(s, ",{}", fl(v));
            }
        }
        let rel = |h: &CMatrix| hermitian_defect(h) / max_entry(h).max(f64::MIN_POSITIVE);
        let herm = rel(&ha).max(rel(&he));
        let _ = writeln!(
            s,
            ",{},{},{},{}",
            fl(max_entry(&(&ha - &hc))),
            fl(max_entry(&(&ha - &he))),
            fl(max_entry(&(&he - &hc))),
            fl(herm)
        );
    }
    report::write_atomic(&cfg.out_dir.join("symbol.csv"), &s)?;
    println!("{}: {} symbol rows at eps {}", model.name(), cfg.steps + 1, fl(eps));
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    let start = Instant::now();
    let ov = match &cli.command {
        Command::Stability(o) | Command::Detscan(o) | Command::Converge(o) | Command::Symbol(o) => o,
    };
    let cfg = match load_config(cli, ov) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return Ok(1);
        }
    };
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("config error: --threads: must be at least 1");
            return Ok(1);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("configuring thread pool")?;
    }
    match &cli.command {
        Command::Stability(_) => cmd_stability(&cfg, start),
        Command::Detscan(_) => cmd_detscan(&cfg, start),
        Command::Converge(_) => cmd_converge(&cfg, start),
        Command::Symbol(_) => cmd_symbol(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
