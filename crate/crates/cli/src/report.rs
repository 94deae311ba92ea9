//! Report, table and metadata emission.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use latstab::stability::ScanRow;
use latstab::{ConvergenceTable, StabilityReport};
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// 17 significant digits.
pub fn fl(x: f64) -> String {
    format!("{x:.16e}")
}

fn cx(z: Complex64) -> String {
    format!("{} {}", fl(z.re), fl(z.im))
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub version: String,
    pub config_hash: String,
    pub wall_time_s: f64,
}

impl Metadata {
    pub fn new(canonical_config: &str, wall_time_s: f64) -> Self {
        let hash = Sha256::digest(canonical_config.as_bytes());
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: hash.iter().map(|b| format!("{b:02x}")).collect(),
            wall_time_s,
        }
    }

    pub fn block(&self) -> String {
        format!(
            "# metadata\nversion: {}\nconfig_hash: {}\nwall_time_s: {:.3}\n",
            self.version, self.config_hash, self.wall_time_s
        )
    }
}

#[derive(Debug, Serialize)]
pub struct ScanPoint {
    pub theta: f64,
    pub abs_det: f64,
    pub d_abs_det: f64,
    pub margin: f64,
}

impl From<&ScanRow> for ScanPoint {
    fn from(r: &ScanRow) -> Self {
        Self {
            theta: r.theta,
            abs_det: r.abs_det,
            d_abs_det: r.d_abs_det,
            margin: r.margin,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReportBundle<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<&'a StabilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<&'a ConvergenceTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_series: Option<Vec<ScanPoint>>,
    pub metadata: &'a Metadata,
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn stability_text(r: &StabilityReport) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k}: {v}");
    };
    kv("model", r.model.clone());
    kv("grid.N", r.n_half.to_string());
    kv("eps", fl(r.eps));
    kv("scalar_reduced", r.scalar_reduced.to_string());
    kv("q", r.q.to_string());
    kv("p", r.p.to_string());

    let a = &r.assumption_a;
    kv("assumption_a.min_ratio", fl(a.min_ratio));
    kv("assumption_a.argmin_k", format!("{:?}", a.argmin_k));
    kv("assumption_a.sign_consistent", a.sign_consistent.to_string());
    kv("assumption_a.verdict", a.verdict.as_str().into());

    let b = &r.assumption_b;
    kv("assumption_b.expected_q", b.expected_q.to_string());
    kv("assumption_b.samples", b.samples.to_string());
    let (lo, hi) = b.counts.iter().fold((usize::MAX, 0), |(lo, hi), c| {
        let t = c[0] + c[1];
        (lo.min(t), hi.max(t))
    });
    kv("assumption_b.inside_count_range", format!("{lo} {hi}"));
    if let Some(c) = b.counts.first() {
        kv("assumption_b.split_first_sample", format!("{} {}", c[0], c[1]));
    }
    kv("assumption_b.mismatched", b.mismatched_thetas.len().to_string());
    kv("assumption_b.unresolved", b.unresolved_thetas.len().to_string());
    kv("assumption_b.verdict", b.verdict.as_str().into());

    let m = &r.mode1;
    kv("mode1.samples", m.samples.to_string());
    kv("mode1.literal_layout", m.literal_layout.to_string());
    kv("mode1.min_abs_det", fl(m.min_abs_det));
    kv("mode1.argmin_theta", fl(m.argmin_theta));
    kv("mode1.min_margin", fl(m.min_margin));
    kv("mode1.argmin_margin_theta", fl(m.argmin_margin_theta));
    kv("mode1.det_threshold", fl(m.det_threshold));
    kv("mode1.symmetry_defect", fl(m.symmetry_defect));
    kv("mode1.monotone_fraction", fl(m.monotone_fraction));
    kv("mode1.continuity_violations", m.continuity_violations.to_string());
    kv("mode1.unresolved", m.unresolved_thetas.len().to_string());
    kv("mode1.count_mismatches", m.count_mismatches.to_string());
    kv("mode1.verdict", m.verdict.as_str().into());

    for smp in &r.mode2.samples {
        let p = format!("mode2.theta[{}]", smp.theta);
        kv(&format!("{p}.margin"), fl(smp.margin));
        kv(&format!("{p}.jordan_columns"), smp.jordan_columns.to_string());
        kv(&format!("{p}.supplementary_violation"), smp.supplementary_violation.to_string());
    }
    kv("mode2.verdict", r.mode2.verdict.as_str().into());

    let m3 = &r.mode3;
    for (i, root) in m3.retained.iter().enumerate() {
        kv(
            &format!("mode3.retained[{i}]"),
            format!("{} {} x{}", root.side, cx(root.z), root.multiplicity),
        );
    }
    kv(
        "mode3.deflated_unit_roots",
        format!("{} {}", m3.deflated_unit_roots[0], m3.deflated_unit_roots[1]),
    );
    kv("mode3.shape", format!("{}x{}", m3.rows, m3.cols));
    kv("mode3.kernel_dim", m3.kernel_dim.to_string());
    kv("mode3.margin", fl(m3.margin));
    kv("mode3.dimension_mismatch", m3.dimension_mismatch.to_string());
    if let Some(l) = &m3.literal {
        kv("mode3.literal_shape", format!("{}x{}", l.rows, l.cols));
        kv("mode3.literal_kernel_dim", l.kernel_dim.to_string());
    }
    kv("mode3.verdict", m3.verdict.as_str().into());

    let sp = &r.supplementary;
    kv("supplementary.samples", sp.samples.to_string());
    kv("supplementary.skipped_parallel", sp.skipped_parallel.to_string());
    kv("supplementary.uneven_splits", sp.uneven_splits.to_string());
    kv("supplementary.verdict", sp.verdict.as_str().into());

    if let Some(e) = &r.elasticity_bound {
        kv("elasticity_bound.lhs", fl(e.lhs));
        kv("elasticity_bound.rhs", fl(e.rhs));
        kv("elasticity_bound.margin", fl(e.margin));
        kv("elasticity_bound.holds", e.holds.to_string());
    }
    kv("overall", r.overall.as_str().into());
    s
}

pub fn detscan_csv(series: &[ScanRow]) -> String {
    let mut s = String::from("theta,abs_det,d_abs_det,margin\n");
    for r in series {
        let _ = writeln!(s, "{},{},{},{}", fl(r.theta), fl(r.abs_det), fl(r.d_abs_det), fl(r.margin));
    }
    s
}

pub fn convergence_csv(t: &ConvergenceTable) -> String {
    let mut s = String::from("N,eps,e_l2,e_h1,e_h2\n");
    for r in &t.rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.n, fl(r.eps), fl(r.error_l2), fl(r.error_h1), fl(r.error_h2));
    }
    s
}

pub fn order_string(order: Option<f64>) -> String {
    match order {
        Some(o) if o.is_finite() => format!("{o:.3}"),
        _ => "n/a".into(),
    }
}

pub fn convergence_text(t: &ConvergenceTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model: {}", t.model);
    let _ = writeln!(s, "levels: {}", t.rows.len());
    let _ = writeln!(s, "fitted_order: {}", order_string(t.fitted_order));
    let ratios: Vec<String> = t.ratios.iter().map(|r| fl(*r)).collect();
    let _ = writeln!(s, "ratios: {}", ratios.join(" "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let x = 0.1 + 0.2;
        assert_eq!(fl(x).parse::<f64>().unwrap(), x);
        assert_eq!(fl(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn order_formatting() {
        assert_eq!(order_string(Some(1.98765)), "1.988");
        assert_eq!(order_string(None), "n/a");
    }

    #[test]
    fn atomic_write_replaces() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("sub/a.txt");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(d.path().join("sub")).unwrap().count(), 1);
    }
}
