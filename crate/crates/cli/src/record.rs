//! Run records: one CSV row per solve.

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use otkit::SolveReport;

pub const SCHEMA_LINE: &str = "#schema=runrecord/1";
pub const HEADER: [&str; 14] = [
    "id",
    "m",
    "n",
    "metric",
    "status",
    "objective",
    "ipm_iters",
    "cg_iters",
    "iter_phase",
    "dir_phase",
    "max_fill_pct",
    "final_support",
    "wall_ms",
    "rwe",
];

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub id: String,
    pub m: usize,
    pub n: usize,
    pub metric: String,
    pub status: String,
    pub objective: f64,
    pub ipm_iters: usize,
    pub cg_iters: usize,
    pub iter_phase: usize,
    pub dir_phase: usize,
    pub max_fill_pct: f64,
    pub final_support: usize,
    pub wall_ms: u128,
    pub rwe: Option<f64>,
}

impl RunRecord {
    pub fn from_report(id: String, m: usize, n: usize, metric: String, report: &SolveReport, wall_ms: u128) -> Self {
        RunRecord {
            id,
            m,
            n,
            metric,
            status: report.status.name().to_string(),
            objective: report.objective,
            ipm_iters: report.ipm_iters,
            cg_iters: report.cg_iters_total,
            iter_phase: report.iterative_phase_iters,
            dir_phase: report.direct_phase_iters,
            max_fill_pct: report.max_fill_percent,
            final_support: report.final_support_size,
            wall_ms,
            rwe: report.rwe_vs_reference,
        }
    }

    fn fields(&self) -> [String; 14] {
        [
            self.id.clone(),
            self.m.to_string(),
            self.n.to_string(),
            self.metric.clone(),
            self.status.clone(),
            format!("{:.12e}", self.objective),
            self.ipm_iters.to_string(),
            self.cg_iters.to_string(),
            self.iter_phase.to_string(),
            self.dir_phase.to_string(),
            format!("{:.4}", self.max_fill_pct),
            self.final_support.to_string(),
            self.wall_ms.to_string(),
            self.rwe.map(|v| format!("{v:.6e}")).unwrap_or_default(),
        ]
    }
}

fn write_rows<W: Write>(out: W, rows: &[RunRecord], header: bool) -> io::Result<()> {
    let mut out = out;
    if header {
        writeln!(out, "{SCHEMA_LINE}")?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        w.write_record(HEADER)?;
    }
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()
}

/// Appends rows to `path`, writing the schema line and header first if the
/// file is new or empty. `None` writes to stdout with a header.
pub fn append(path: Option<&Path>, rows: &[RunRecord]) -> io::Result<()> {
    match path {
        None => write_rows(io::stdout().lock(), rows, true),
        Some(p) => {
            let file = OpenOptions::new().create(true).append(true).open(p)?;
            let fresh = file.metadata()?.len() == 0;
            write_rows(file, rows, fresh)
        }
    }
}
