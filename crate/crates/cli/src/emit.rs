//! CSV emission. Floats are written with Rust's shortest-round-trip
//! formatting so repeated runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use eigloc::analysis::{ConvergenceReport, PerturbationReport, RefinementReport, WeylReport};
use eigloc::eigensolve::Spectrum;
use eigloc::localization::{MatchingResult, NodeInterval};

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)
}

pub fn eigs_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, v) in spectrum.values.iter().enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

pub fn localize_csv(
    intervals: &[NodeInterval],
    matching: &MatchingResult,
    spectrum: &Spectrum,
) -> String {
    let mut out = String::from("node,x,y,r_nodal,lo,hi,matched_eigenvalue,width\n");
    for (j, iv) in intervals.iter().enumerate() {
        let matched = match matching.eig_of_interval[j] {
            Some(i) => format!("{}", spectrum.values[i]),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            iv.node,
            iv.point.x,
            iv.point.y,
            iv.nodal_ratio,
            iv.interval.lo,
            iv.interval.hi,
            matched,
            iv.width()
        );
    }
    out
}

pub fn study_csv(report: &RefinementReport) -> String {
    let mut out = String::from("level,n_dofs,h_max,lambda_min,lambda_max,fill_distance,max_width\n");
    for l in &report.levels {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            l.level, l.n_dofs, l.h_max, l.lambda_min, l.lambda_max, l.fill_distance, l.max_width
        );
    }
    out
}

pub fn perturb_csv(report: &PerturbationReport) -> String {
    let mut out = String::from("j,k,multiplicity,theta_min,theta_max,theta,bound,eigs_in_interval\n");
    let nodes = report
        .j_nodes
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(";");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        nodes,
        report.k_value,
        report.multiplicity,
        report.theta_min,
        report.theta_max,
        report.theta,
        report.bound,
        report.eigs_in_interval
    );
    out
}

pub fn weyl_csv(report: &WeylReport) -> String {
    let mut out = String::from("x0,y0,lambda0,radius,u_norm_b,bound\n");
    for row in &report.radii {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            report.center.x, report.center.y, report.lambda0, row.radius, row.u_norm, row.bound
        );
    }
    out
}

pub fn converge_csv(report: &ConvergenceReport) -> String {
    let mut out =
        String::from("level,n_dofs,galerkin_error,best_approx_error,quasi_opt_ratio,z_error\n");
    for l in &report.levels {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            l.level, l.n_dofs, l.galerkin_error, l.best_error, l.quasi_opt_ratio, l.z_error
        );
    }
    out
}
