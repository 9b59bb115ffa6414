//! Plot-ready CSV/JSON series.
//!
//! Percentages are written twice: rounded to one decimal in the main column
//! and at full precision in a matching `*_exact` column. Column and row order
//! are fixed, so identical inputs give byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use csv::WriterBuilder;

use super::breakdown::CorrelationBreakdown;
use super::report::{FusionReport, SubgroupCell};
use super::{CcrStat, MetricsError};

pub const REPORT_HEADER: [&str; 8] = [
    "method",
    "k",
    "trial_type",
    "mean_ccr",
    "std_ccr",
    "n_groups",
    "mean_ccr_exact",
    "std_ccr_exact",
];

fn one(v: f64) -> String {
    format!("{v:.1}")
}

fn exact(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>, f: fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MetricsError + '_ {
    move |source| MetricsError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_to_io(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

fn stat_fields(s: &CcrStat) -> [String; 2] {
    [one(s.mean), one(s.std)]
}

pub fn write_report_csv<W: Write>(report: &FusionReport, out: W) -> std::io::Result<()> {
    let mut w = WriterBuilder::new().from_writer(out);
    let res: csv::Result<()> = (|| {
        w.write_record(REPORT_HEADER)?;
        for c in &report.cells {
            let [mean, std] = stat_fields(&c.stat);
            w.write_record([
                c.method.as_str(),
                &c.k.to_string(),
                c.trial_type.as_str(),
                &mean,
                &std,
                &c.stat.n_groups.to_string(),
                &exact(c.stat.mean),
                &exact(c.stat.std),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(csv_to_io)
}

/// Five-number summaries of group CCRs per method × k × trial type.
pub fn write_boxplot_csv<W: Write>(report: &FusionReport, out: W) -> std::io::Result<()> {
    let mut w = WriterBuilder::new().from_writer(out);
    let res: csv::Result<()> = (|| {
        let names = ["min", "q1", "median", "q3", "max"];
        let mut header = vec!["method".to_owned(), "k".into(), "trial_type".into()];
        header.extend(names.iter().map(|n| n.to_string()));
        header.extend(names.iter().map(|n| format!("{n}_exact")));
        w.write_record(&header)?;
        for c in &report.cells {
            let b = &c.boxplot;
            let vals = [b.min, b.q1, b.median, b.q3, b.max];
            let mut row = vec![c.method.to_string(), c.k.to_string(), c.trial_type.to_string()];
            row.extend(vals.iter().map(|&v| one(v)));
            row.extend(vals.iter().map(|&v| exact(v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(csv_to_io)
}

pub fn write_errors_csv<W: Write>(report: &FusionReport, out: W) -> std::io::Result<()> {
    let mut w = WriterBuilder::new().from_writer(out);
    let res: csv::Result<()> = (|| {
        w.write_record([
            "method",
            "k",
            "trial_type",
            "false_positives",
            "false_negatives",
            "bona_fide_total",
            "manipulated_total",
        ])?;
        for c in &report.cells {
            let e = &c.errors;
            w.write_record([
                c.method.to_string(),
                c.k.to_string(),
                c.trial_type.to_string(),
                e.false_positives.to_string(),
                e.false_negatives.to_string(),
                e.bona_fide_total.to_string(),
                e.manipulated_total.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(csv_to_io)
}

fn write_subgroups<W: Write>(cells: &[SubgroupCell], label: &str, out: W) -> std::io::Result<()> {
    let mut w = WriterBuilder::new().from_writer(out);
    let res: csv::Result<()> = (|| {
        w.write_record([
            "method",
            "k",
            label,
            "mean_ccr",
            "std_ccr",
            "n_groups",
            "mean_ccr_exact",
            "std_ccr_exact",
        ])?;
        for c in cells {
            let [mean, std] = stat_fields(&c.stat);
            w.write_record([
                c.method.as_str(),
                &c.k.to_string(),
                &c.label,
                &mean,
                &std,
                &c.stat.n_groups.to_string(),
                &exact(c.stat.mean),
                &exact(c.stat.std),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(csv_to_io)
}

pub fn write_class_csv<W: Write>(report: &FusionReport, out: W) -> std::io::Result<()> {
    write_subgroups(&report.by_class, "manipulation_class", out)
}

pub fn write_difficulty_csv<W: Write>(report: &FusionReport, out: W) -> std::io::Result<()> {
    write_subgroups(&report.by_difficulty, "difficulty", out)
}

pub fn write_report_json<W: Write>(report: &FusionReport, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")
}

/// One row per bin, in bin order.
pub fn write_breakdown_csv<W: Write>(b: &CorrelationBreakdown, out: W) -> std::io::Result<()> {
    let mut w = WriterBuilder::new().from_writer(out);
    let res: csv::Result<()> = (|| {
        w.write_record([
            "dimension",
            "bin",
            "n_decisions",
            "n_correct",
            "n_examiners",
            "mean_ccr",
            "std_ccr",
            "pooled_ccr",
            "mean_ccr_exact",
            "std_ccr_exact",
            "pooled_ccr_exact",
        ])?;
        for bin in &b.bins {
            let mean = bin.stat.map(|s| s.mean);
            let std = bin.stat.map(|s| s.std);
            w.write_record([
                b.dimension.as_str(),
                &bin.label,
                &bin.n_decisions.to_string(),
                &bin.n_correct.to_string(),
                &bin.n_examiners.to_string(),
                &opt(mean, one),
                &opt(std, one),
                &opt(bin.pooled_ccr, one),
                &opt(mean, exact),
                &opt(std, exact),
                &opt(bin.pooled_ccr, exact),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(csv_to_io)
}

pub fn write_breakdown_json<W: Write>(b: &CorrelationBreakdown, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, b)?;
    out.write_all(b"\n")
}

type Writer<T> = fn(&T, BufWriter<File>) -> std::io::Result<()>;

fn write_files<T>(item: &T, dir: &Path, files: &[(&str, Writer<T>)]) -> Result<Vec<PathBuf>, MetricsError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, write) in files {
        let path = dir.join(name);
        let file = File::create(&path).map_err(io_err(&path))?;
        write(item, BufWriter::new(file)).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `report.csv`, `report.json`, `boxplot.csv`, `errors.csv`,
/// `by_class.csv` and `by_difficulty.csv` into `dir`.
pub fn emit_report(report: &FusionReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, MetricsError> {
    write_files(
        report,
        dir.as_ref(),
        &[
            ("report.csv", write_report_csv),
            ("report.json", write_report_json),
            ("boxplot.csv", write_boxplot_csv),
            ("errors.csv", write_errors_csv),
            ("by_class.csv", write_class_csv),
            ("by_difficulty.csv", write_difficulty_csv),
        ],
    )
}

/// Writes `breakdown_<dimension>.csv` and `.json` into `dir`.
pub fn emit_breakdown(b: &CorrelationBreakdown, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, MetricsError> {
    let csv_name = format!("breakdown_{}.csv", b.dimension);
    let json_name = format!("breakdown_{}.json", b.dimension);
    write_files(
        b,
        dir.as_ref(),
        &[
            (csv_name.as_str(), write_breakdown_csv),
            (json_name.as_str(), write_breakdown_json),
        ],
    )
}
