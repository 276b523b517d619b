use std::fmt::Write as _;
use std::path::Path;

use super::EvalReport;
use crate::error::{Error, Result};

pub const FIGURE_FILES: [&str; 5] = [
    "fig4_accuracy.csv",
    "fig5_error_histogram.csv",
    "fig6_counts.csv",
    "fig7_baseline.csv",
    "fig8_pdp.csv",
];

fn accuracy_csv(r: &EvalReport) -> String {
    let mut s = String::from("layout,vtd,accuracy,accuracy_pre_vr,n_error,n_all,test_clusters\n");
    for c in &r.conditions {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            c.layout, c.vtd, c.accuracy, c.accuracy_pre_vr, c.n_error, c.n_all, c.test_clusters
        );
    }
    s
}

fn histogram_csv(r: &EvalReport) -> String {
    let mut s = String::from("layout,vtd,abs_error,probability\n");
    for c in &r.conditions {
        for (e, p) in c.error_histogram.iter().enumerate() {
            let _ = writeln!(s, "{},{},{e},{p}", c.layout, c.vtd);
        }
    }
    for (e, p) in r.pooled_error_histogram.iter().enumerate() {
        let _ = writeln!(s, "all,all,{e},{p}");
    }
    s
}

fn counts_csv(r: &EvalReport) -> String {
    let mut s = String::from("layout,vtd,count,truth_clusters,predicted_clusters\n");
    for c in &r.conditions {
        let n = c.truth_count_histogram.len().max(c.predicted_count_histogram.len());
        for k in 0..n {
            let t = c.truth_count_histogram.get(k).copied().unwrap_or(0);
            let p = c.predicted_count_histogram.get(k).copied().unwrap_or(0);
            let _ = writeln!(s, "{},{},{k},{t},{p}", c.layout, c.vtd);
        }
    }
    s
}

fn baseline_csv(r: &EvalReport) -> String {
    let mut s = String::from("layout,vtd,accuracy,baseline_accuracy,improvement,binary_accuracy,regression_accuracy\n");
    for c in &r.conditions {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            c.layout,
            c.vtd,
            c.accuracy,
            c.baseline_accuracy,
            c.accuracy - c.baseline_accuracy,
            c.binary_accuracy,
            c.regression_accuracy
        );
    }
    s
}

/// Joins `channel/pdp_truth.csv` and `channel/pdp_recognized.csv` with a
/// leading `source` column. `None` when neither exists.
fn pdp_csv(dir: &Path) -> Result<Option<String>> {
    let mut s = String::from("source,snapshot,delay_s,power\n");
    let mut any = false;
    for source in ["truth", "recognized"] {
        let path = dir.join("channel").join(format!("pdp_{source}.csv"));
        if !path.is_file() {
            continue;
        }
        any = true;
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        for line in text.lines().skip(1).filter(|l| !l.is_empty()) {
            let _ = writeln!(s, "{source},{line}");
        }
    }
    Ok(any.then_some(s))
}

/// Writes the plot-data CSVs for `report` into `dir`. `fig8_pdp.csv` is only
/// written when `dir/channel` holds PDP dumps. Returns the files written.
pub fn write_figures(dir: &Path, report: &EvalReport) -> Result<Vec<&'static str>> {
    let mut written = Vec::new();
    let tables = [accuracy_csv(report), histogram_csv(report), counts_csv(report), baseline_csv(report)];
    for (name, text) in FIGURE_FILES.iter().zip(tables) {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(*name);
    }
    if let Some(text) = pdp_csv(dir)? {
        let path = dir.join(FIGURE_FILES[4]);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(FIGURE_FILES[4]);
    }
    Ok(written)
}
