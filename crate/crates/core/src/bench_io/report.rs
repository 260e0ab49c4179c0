//! Per-run metric CSV and the seed-averaged summary table.

use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::MetricRow;

pub const HEADER: [&str; 10] = [
    "design", "seed", "stage", "HPWL", "FTpin", "FTmod", "WS_pct", "PD_pct", "RT_s", "RT_cum_s",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub design: String,
    pub seed: u64,
    pub stage: String,
    pub metrics: MetricRow,
    pub rt_cum_s: f64,
}

impl ReportRow {
    fn record(&self) -> Vec<String> {
        let m = &self.metrics;
        vec![
            self.design.clone(),
            self.seed.to_string(),
            self.stage.clone(),
            format!("{:.3}", m.hpwl),
            m.ftpin.to_string(),
            format!("{:.1}", m.ftmod),
            format!("{:.4}", m.ws_pct),
            format!("{:.4}", m.pd_pct),
            format!("{:.3}", m.rt_s),
            format!("{:.3}", self.rt_cum_s),
        ]
    }
}

pub fn emit_report(rows: &[ReportRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let path = path.as_ref();
    let schema = |msg: String| Error::ReportSchema {
        path: path.to_path_buf(),
        msg,
    };
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(schema(format!("unexpected columns {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |col: usize| -> Result<f64> {
            rec[col]
                .parse()
                .map_err(|_| schema(format!("row {}: bad {} value `{}`", i + 1, HEADER[col], &rec[col])))
        };
        rows.push(ReportRow {
            design: rec[0].to_string(),
            seed: rec[1]
                .parse()
                .map_err(|_| schema(format!("row {}: bad seed `{}`", i + 1, &rec[1])))?,
            stage: rec[2].to_string(),
            metrics: MetricRow {
                hpwl: num(3)?,
                ftpin: num(4)? as u64,
                ftmod: num(5)?,
                ws_pct: num(6)?,
                pd_pct: num(7)?,
                rt_s: num(8)?,
            },
            rt_cum_s: num(9)?,
        });
    }
    Ok(rows)
}

/// Mean of every metric over the seeds of one design and stage.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub design: String,
    pub stage: String,
    pub runs: usize,
    pub hpwl: f64,
    pub ftpin: f64,
    pub ftmod: f64,
    pub ws_pct: f64,
    pub pd_pct: f64,
    pub rt_s: f64,
    pub rt_cum_s: f64,
}

pub fn aggregate(rows: &[ReportRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for r in rows {
        let idx = match out.iter().position(|s| s.design == r.design && s.stage == r.stage) {
            Some(i) => i,
            None => {
                out.push(SummaryRow {
                    design: r.design.clone(),
                    stage: r.stage.clone(),
                    runs: 0,
                    hpwl: 0.0,
                    ftpin: 0.0,
                    ftmod: 0.0,
                    ws_pct: 0.0,
                    pd_pct: 0.0,
                    rt_s: 0.0,
                    rt_cum_s: 0.0,
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        s.runs += 1;
        s.hpwl += r.metrics.hpwl;
        s.ftpin += r.metrics.ftpin as f64;
        s.ftmod += r.metrics.ftmod;
        s.ws_pct += r.metrics.ws_pct;
        s.pd_pct += r.metrics.pd_pct;
        s.rt_s += r.metrics.rt_s;
        s.rt_cum_s += r.rt_cum_s;
    }
    for s in &mut out {
        let n = s.runs as f64;
        for v in [
            &mut s.hpwl,
            &mut s.ftpin,
            &mut s.ftmod,
            &mut s.ws_pct,
            &mut s.pd_pct,
            &mut s.rt_s,
            &mut s.rt_cum_s,
        ] {
            *v /= n;
        }
    }
    out
}

/// Read and average one or more report files.
pub fn report_aggregate<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<SummaryRow>> {
    if paths.is_empty() {
        return Err(Error::Config("no report files given".into()));
    }
    let mut rows = Vec::new();
    for p in paths {
        rows.extend(read_report(p)?);
    }
    Ok(aggregate(&rows))
}

pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut s = format!(
        "{:<10} {:<11} {:>4} {:>12} {:>8} {:>8} {:>7} {:>7} {:>9}\n",
        "design", "stage", "runs", "HPWL", "FTpin", "FTmod", "WS(%)", "PD(%)", "RT(s)"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<10} {:<11} {:>4} {:>12.1} {:>8.1} {:>8.1} {:>7.2} {:>7.2} {:>9.2}\n",
            r.design, r.stage, r.runs, r.hpwl, r.ftpin, r.ftmod, r.ws_pct, r.pd_pct, r.rt_cum_s
        ));
    }
    s
}
