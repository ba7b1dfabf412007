//! Report serialization: flat key-value summary plus columnar
//! distribution files for plotting.

use std::io::Write;

use super::TopologyReport;

pub fn write_report_kv(report: &TopologyReport, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "n_nodes={}", report.n_nodes)?;
    writeln!(w, "n_branches={}", report.n_branches)?;
    writeln!(w, "avg_degree={}", report.avg_degree)?;
    writeln!(w, "avg_path_length_hops={}", report.avg_path_length_hops)?;
    match report.pearson_degree_corr {
        Some(rho) => writeln!(w, "pearson_degree_corr={rho}")?,
        None => writeln!(w, "pearson_degree_corr=undefined")?,
    }
    writeln!(w, "algebraic_connectivity={}", report.algebraic_connectivity)?;
    writeln!(w, "clustering_coeff={}", report.clustering_coeff)?;
    writeln!(
        w,
        "clustering_transitivity={}",
        report.clustering_transitivity
    )?;
    Ok(())
}

pub fn write_degree_pmf(report: &TopologyReport, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "degree,probability")?;
    for (d, p) in &report.degree_pmf {
        writeln!(w, "{d},{p}")?;
    }
    Ok(())
}

pub fn write_spectral_density(report: &TopologyReport, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "normalized_eigenvalue,density")?;
    for (x, d) in &report.spectral_density {
        writeln!(w, "{x},{d}")?;
    }
    Ok(())
}

pub fn write_branch_length_pmf(report: &TopologyReport, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "length_m,probability")?;
    for (x, p) in &report.branch_length_hist {
        writeln!(w, "{x},{p}")?;
    }
    Ok(())
}
