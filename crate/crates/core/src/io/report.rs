//! CSV emission of optimization traces.

use std::fmt::Write as _;

use crate::optimizer::{OptimizationReport, Termination};

pub const REPORT_HEADER: &str = "iter,value,grad_norm,duality_bound,kF,kappa";

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIters => "max_iters",
        Termination::Certified => "certified",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per iterate, then a `#` summary row. Floats use the shortest
/// representation that round-trips, so equal runs give equal bytes. An
/// empty `duality_bound` means the certificate was not yet available.
pub fn format_report_csv(report: &OptimizationReport) -> String {
    let mut out = String::new();
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for r in &report.iterations {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iter,
            r.value,
            r.grad_norm,
            opt(r.duality_bound),
            r.kf,
            r.kappa
        )
        .unwrap();
    }
    writeln!(
        out,
        "# termination={},steps={},initial_kF={},final_kF={},initial_kappa={},final_kappa={},certificate={}",
        termination_name(report.termination),
        report.steps(),
        report.initial_kf,
        report.final_kf,
        report.initial_kappa,
        report.final_kappa,
        opt(report.certificate)
    )
    .unwrap();
    out
}
