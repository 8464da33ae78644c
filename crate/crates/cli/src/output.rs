//! CSV rendering: header row, one row per stored time, every number in
//! `{:.16e}`; empty cells for absent metrics.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use crate::error::CliError;
use crate::run::{kind_has_summary, PointData, PointResult, RunResult};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn point_csv(result: &PointResult, gt_from: f64) -> String {
    let mut out = String::new();
    let keep = |i: usize| result.gt[i] >= gt_from - 1e-12;
    match &result.data {
        PointData::Rabi { bloch, .. } => {
            out.push_str("gt,sx,sy,sz,purity\n");
            for (i, b) in bloch.iter().enumerate().filter(|(i, _)| keep(*i)) {
                let _ = writeln!(out, "{},{},{},{},{}", num(result.gt[i]), num(b.sx), num(b.sy), num(b.sz), num(b.purity));
            }
        }
        PointData::Ground {
            r2,
            concurrence: Some((c, _)),
            ..
        } => {
            out.push_str("gt,concurrence,abs_r2\n");
            for i in (0..r2.len()).filter(|&i| keep(i)) {
                let _ = writeln!(out, "{},{},{}", num(result.gt[i]), num(c[i]), num(r2[i]));
            }
        }
        PointData::Ground { r, r2, .. } => {
            out.push_str("gt,re_r,im_r,abs_r2\n");
            for i in (0..r2.len()).filter(|&i| keep(i)) {
                let _ = writeln!(out, "{},{},{},{}", num(result.gt[i]), num(r[i].re), num(r[i].im), num(r2[i]));
            }
        }
    }
    out
}

pub fn summary_csv(run: &RunResult) -> String {
    let mut out =
        String::from("h,j,j_over_h,m,branch,alpha,alpha_perturbative,r2_max,t_first_min,t_esd,max_norm_drift\n");
    for p in &run.points {
        let metrics = p.metrics.unwrap_or_default();
        let (m, branch) = p
            .ground()
            .map(|g| (g.m.to_string(), g.branch.label().to_string()))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            num(p.point.h),
            num(p.point.j),
            opt(p.point.j_over_h),
            m,
            branch,
            opt(metrics.alpha),
            opt(p.alpha_perturbative),
            opt(metrics.r2_max),
            opt(metrics.t_first_min),
            opt(metrics.t_esd),
            num(p.max_norm_drift)
        );
    }
    out
}

pub fn verify_report(run: &RunResult) -> Option<String> {
    if !run.experiment.verify {
        return None;
    }
    let mut out = String::new();
    for p in &run.points {
        if let Some(v) = &p.verification {
            let _ = writeln!(out, "{} h={} J={}: {}", run.experiment.name, p.point.h, p.point.j, v.describe());
        }
    }
    Some(out)
}

/// All files of a run, in a fixed order.
pub fn render(run: &RunResult) -> Vec<OutputFile> {
    let exp = &run.experiment;
    let mut files = Vec::new();
    let single = !exp.swept && run.points.len() == 1;
    for p in &run.points {
        let name = if single {
            format!("{}.csv", exp.name)
        } else {
            format!("{}_{}.csv", exp.name, p.point.stem())
        };
        files.push(OutputFile {
            name,
            contents: point_csv(p, exp.gt_from),
        });
    }
    if kind_has_summary(exp.kind) {
        files.push(OutputFile {
            name: "summary.csv".into(),
            contents: summary_csv(run),
        });
    }
    if let Some(report) = verify_report(run) {
        files.push(OutputFile {
            name: "verify.txt".into(),
            contents: report,
        });
    }
    files
}

pub fn write(dir: &std::path::Path, files: &[OutputFile]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    files
        .iter()
        .map(|f| {
            let path = dir.join(&f.name);
            fs::write(&path, &f.contents)?;
            Ok(path)
        })
        .collect()
}
