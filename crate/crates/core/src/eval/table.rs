use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use super::{ExperimentReport, RobustnessReport, COMPACT_MODELS};

/// One-row table in the layout `big | BM | ST | MED || win BM | ST | MED`,
/// values in percent.
pub fn experiment_table(dataset: &str, report: &ExperimentReport) -> String {
    let mut out = String::new();
    let width = dataset.len().max(7);
    let _ = writeln!(out, "{:width$}  {:^31}  {:^23}", "", "Accuracy", "Win rate");
    let _ = write!(out, "{:width$}  {:>7}", "Dataset", report.big_model);
    for m in COMPACT_MODELS {
        let _ = write!(out, " {m:>7}");
    }
    out.push(' ');
    for m in COMPACT_MODELS {
        let _ = write!(out, " {m:>7}");
    }
    out.push('\n');
    let _ = write!(out, "{dataset:width$}  {:>7.2}", 100.0 * report.mean_accuracy[&report.big_model]);
    for m in COMPACT_MODELS {
        let _ = write!(out, " {:>7.2}", 100.0 * report.mean_accuracy[m]);
    }
    out.push(' ');
    for m in COMPACT_MODELS {
        let _ = write!(out, " {:>7.2}", report.win_rate[m]);
    }
    out.push('\n');
    out
}

/// Agreement percentages per compact model type.
pub fn robustness_table(dataset: &str, report: &RobustnessReport) -> String {
    let width = dataset.len().max(7);
    let mut out = format!("{:width$}  {:^23}\n{:width$} ", "", format!("Agreement ({})", report.big_model), "Dataset");
    for m in COMPACT_MODELS {
        let _ = write!(out, " {m:>7}");
    }
    let _ = write!(out, "\n{dataset:width$} ");
    for m in COMPACT_MODELS {
        let _ = write!(out, " {:>7.2}", 100.0 * report.agreement[m]);
    }
    out.push('\n');
    out
}
