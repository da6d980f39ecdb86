//! Deterministic CSV emission: full-precision values, LF line endings,
//! byte-identical across repeated runs and thread counts.

use std::io::Write;
use std::path::Path;

use crate::certify::{ExistenceCertificate, StabilityReport, UniquenessCertificate};
use crate::grid::GridFunction;
use crate::langevin::{SolutionBundle, StructuralConstants};

/// 17 significant decimal digits; round-trips every f64 exactly.
pub fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_solution_csv(bundle: &SolutionBundle, out: &mut dyn Write) -> std::io::Result<()> {
    out.write_all(b"t,u,du,residual\n")?;
    let mesh = bundle.u.mesh();
    for i in 0..bundle.u.len() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_full(mesh.t(i)),
            fmt_full(bundle.u[i]),
            fmt_full(bundle.du[i]),
            fmt_full(bundle.residual.nodewise[i]),
        )?;
    }
    Ok(())
}

pub fn write_grid_csv(
    header: &str,
    grid: &GridFunction,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    writeln!(out, "{header}")?;
    let mesh = grid.mesh();
    for i in 0..grid.len() {
        writeln!(out, "{},{}", fmt_full(mesh.t(i)), fmt_full(grid[i]))?;
    }
    Ok(())
}

/// `name,value` rows in fixed declaration order, then the verdict lines.
pub fn write_certificate_csv(
    sc: &StructuralConstants,
    uniq: &UniquenessCertificate,
    exist: &ExistenceCertificate,
    kappa0: f64,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    out.write_all(b"name,value\n")?;
    let rows: Vec<(&str, f64)> = vec![
        ("sigma11", sc.sigma11),
        ("sigma12", sc.sigma12),
        ("sigma21", sc.sigma21),
        ("sigma22", sc.sigma22),
        ("Delta", sc.delta),
        ("rho11", uniq.rho11),
        ("rho12", uniq.rho12),
        ("rho21", uniq.rho21),
        ("rho22", uniq.rho22),
        ("zeta11", uniq.zeta11),
        ("zeta12", uniq.zeta12),
        ("zeta13", uniq.zeta13),
        ("zeta21", uniq.zeta21),
        ("zeta22", uniq.zeta22),
        ("zeta23", uniq.zeta23),
        ("zeta_max", uniq.zeta_max),
        ("Lambda11", exist.lambda11),
        ("Lambda12", exist.lambda12),
        ("Lambda21", exist.lambda21),
        ("Lambda22", exist.lambda22),
        ("lambda_product", exist.product),
        ("radius", exist.radius.unwrap_or(f64::NAN)),
        ("kappa0", kappa0),
    ];
    for (name, value) in rows {
        writeln!(out, "{name},{}", fmt_full(value))?;
    }
    writeln!(out, "UNIQUENESS: {}", if uniq.holds { "PASS" } else { "FAIL" })?;
    writeln!(out, "EXISTENCE: {}", if exist.holds { "PASS" } else { "FAIL" })?;
    Ok(())
}

pub fn write_stability_csv(report: &StabilityReport, out: &mut dyn Write) -> std::io::Result<()> {
    match &report.pointwise_bound {
        Some(grid) => write_grid_csv("t,bound", grid, out),
        None => out.write_all(b"t,bound\n"),
    }
}

/// The plot-data pair: solution curve and iteration trace.
pub fn write_plot_data(bundle: &SolutionBundle, prefix: &Path) -> std::io::Result<()> {
    let curve_path = with_suffix(prefix, "_solution.csv");
    let trace_path = with_suffix(prefix, "_trace.csv");
    let mut curve = std::io::BufWriter::new(std::fs::File::create(curve_path)?);
    write_solution_csv(bundle, &mut curve)?;
    curve.flush()?;
    let mut trace = std::io::BufWriter::new(std::fs::File::create(trace_path)?);
    trace.write_all(b"iter,update_norm\n")?;
    for (i, norm) in bundle.update_trace.iter().enumerate() {
        writeln!(trace, "{},{}", i + 1, fmt_full(*norm))?;
    }
    trace.flush()
}

fn with_suffix(prefix: &Path, suffix: &str) -> std::path::PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    std::path::PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_full_precision() {
        let x = std::f64::consts::PI;
        let s = fmt_full(x);
        let back: f64 = s.parse().unwrap();
        assert_eq!(back, x);
        assert_eq!(fmt_full(0.0), "0.0000000000000000e0");
    }
}
