use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{resolve, Resolved, RunConfig};
use super::{CommonArgs, EXIT_ESCAPE, EXIT_NOT_CERTIFIED, EXIT_OK};
use crate::analysis::{summarize, ArcSummary};
use crate::error::{LabError, Result};
use crate::hybrid::{
    simulate, simulate_sample_hold, simulate_state_feedback, write_arc_csv, HybridArc, LoopVariant,
};
use crate::template::{certify_template, search_template};

fn load(args: &CommonArgs) -> Result<(RunConfig, Resolved, PathBuf)> {
    let cfg = RunConfig::load(&args.config)?;
    let resolved = resolve(&cfg, args.seed)?;
    let dir = args.out.clone().or_else(|| cfg.outputs.dir.clone().map(PathBuf::from)).unwrap_or_else(|| ".".into());
    fs::create_dir_all(&dir)?;
    Ok((cfg, resolved, dir))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::Numerical(format!("json: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn run_variant(r: &Resolved, variant: LoopVariant, theta: f64, delta: f64) -> Result<HybridArc> {
    let cfg = r.observer(theta, delta)?;
    match variant {
        LoopVariant::Templated => {
            simulate(&r.system, &r.spec, &r.template, &cfg, r.init_for(delta, true), r.t_end, r.integrator)
        }
        LoopVariant::SampleHold => {
            simulate_sample_hold(&r.system, &r.spec, &cfg, r.init_for(delta, true), r.t_end, r.integrator)
        }
        LoopVariant::StateFeedback => simulate_state_feedback(
            &r.system,
            &r.spec,
            &r.template,
            delta,
            r.init_for(delta, false),
            r.t_end,
            r.integrator,
        ),
    }
}

pub fn run_simulate(args: &CommonArgs) -> Result<i32> {
    let (_, r, dir) = load(args)?;
    let cfg = r.single_observer()?;
    let arc = run_variant(&r, r.variant, cfg.theta, cfg.delta)?;
    let mut csv = Vec::new();
    write_arc_csv(&arc, &mut csv)?;
    fs::write(dir.join("arc.csv"), csv)?;
    let summary = summarize(&arc, &r.spec, &r.system, &r.template);
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(if arc.escaped() || !summary.contained { EXIT_ESCAPE } else { EXIT_OK })
}

pub fn run_certify(args: &CommonArgs) -> Result<i32> {
    let (_, r, dir) = load(args)?;
    let report = certify_template(&r.system, &r.spec, &r.template, r.q, &r.grid)?;
    write_json(&dir.join("certification.json"), &report)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_NOT_CERTIFIED })
}

pub fn run_search(args: &CommonArgs) -> Result<i32> {
    let (_, r, dir) = load(args)?;
    let outcome = search_template(&r.system, &r.spec, &r.template, r.q, &r.grid, &r.search)?;
    write_json(&dir.join("search.json"), &outcome)?;
    Ok(if outcome.found() { EXIT_OK } else { EXIT_NOT_CERTIFIED })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub delta: f64,
    pub summary: ArcSummary,
    pub escaped: bool,
}

fn summary_fields(s: &ArcSummary) -> Vec<String> {
    vec![
        opt(s.nu_x),
        opt(s.nu_e),
        s.contained.to_string(),
        s.max_excursion.to_string(),
        s.clamp_events.to_string(),
        s.phi_failures.to_string(),
        s.final_x_norm.to_string(),
    ]
}

const SUMMARY_COLUMNS: [&str; 7] =
    ["nu_x", "nu_e", "contained", "max_excursion", "clamp_events", "phi_failures", "final_x_norm"];

fn write_csv(path: &Path, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| LabError::Numerical(format!("csv: {e}")))?;
    w.write_record(&header).map_err(|e| LabError::Numerical(format!("csv: {e}")))?;
    for row in rows {
        w.write_record(&row).map_err(|e| LabError::Numerical(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Templated runs over every `(θ, Δ)` pair, computed in parallel and
/// written in grid order.
pub fn sweep_rows(r: &Resolved) -> Result<Vec<SweepRow>> {
    let cells: Vec<(f64, f64)> = r.thetas.iter().flat_map(|&t| r.deltas.iter().map(move |&d| (t, d))).collect();
    cells
        .par_iter()
        .map(|&(theta, delta)| {
            let arc = run_variant(r, LoopVariant::Templated, theta, delta)?;
            let summary = summarize(&arc, &r.spec, &r.system, &r.template);
            Ok(SweepRow { theta, delta, escaped: arc.escaped(), summary })
        })
        .collect()
}

pub fn run_sweep(args: &CommonArgs) -> Result<i32> {
    let (_, r, dir) = load(args)?;
    let rows = sweep_rows(&r)?;
    let mut header = vec!["theta".to_string(), "delta".to_string()];
    header.extend(SUMMARY_COLUMNS.iter().map(|c| c.to_string()));
    header.push("escaped".into());
    let body = rows
        .iter()
        .map(|row| {
            let mut v = vec![row.theta.to_string(), row.delta.to_string()];
            v.extend(summary_fields(&row.summary));
            v.push(row.escaped.to_string());
            v
        })
        .collect();
    write_csv(&dir.join("sweep.csv"), header, body)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub variant: LoopVariant,
    pub summary: ArcSummary,
}

pub fn compare_rows(r: &Resolved) -> Result<Vec<CompareRow>> {
    let cfg = r.single_observer()?;
    LoopVariant::ALL
        .par_iter()
        .map(|&variant| {
            let arc = run_variant(r, variant, cfg.theta, cfg.delta)?;
            Ok(CompareRow { variant, summary: summarize(&arc, &r.spec, &r.system, &r.template) })
        })
        .collect()
}

pub fn run_compare(args: &CommonArgs) -> Result<i32> {
    let (_, r, dir) = load(args)?;
    let rows = compare_rows(&r)?;
    let mut header = vec!["variant".to_string()];
    header.extend(SUMMARY_COLUMNS.iter().map(|c| c.to_string()));
    let body = rows
        .iter()
        .map(|row| {
            let mut v = vec![row.variant.name().to_string()];
            v.extend(summary_fields(&row.summary));
            v
        })
        .collect();
    write_csv(&dir.join("compare.csv"), header, body)?;
    Ok(EXIT_OK)
}
