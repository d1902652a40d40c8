//! Implementations behind the `madd` binary's subcommands. Each writes its
//! outputs plus a run manifest and returns a short summary.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::densities::{kde_plot_curve, madd, DensityVector};
use crate::error::{MaddError, Result};
use crate::io::{
    format_sig17, manifest_path, read_records_file, unix_now, write_json, write_records_file, write_sweep_csv,
    GroupCounts, RunManifest, SweepReport,
};
use crate::model::{default_schema, TabularDataset};
use crate::objective::{even_grid, sweep, ObjectiveConfig};
use crate::pipeline::{self, PipelineConfig};
use crate::record::{group_probas, Group};
use crate::simulate::{SimulationSpec, Simulator};
use crate::transport::fip;

pub fn cmd_simulate(spec: &SimulationSpec, out: &Path) -> Result<GroupCounts> {
    let started = unix_now();
    let sim = Simulator::new(spec.clone())?;
    let records = sim.sample();
    write_records_file(out, &records)?;
    let (c0, c1) = sim.constants();
    let mut manifest = RunManifest::new("simulate", json!({ "spec": spec, "c0": c0, "c1": c1 }), started);
    manifest.outputs.push(out.to_path_buf());
    let rows = GroupCounts::of(&records);
    manifest.rows = rows;
    manifest.finish(&manifest_path(out))?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct MaddReport {
    pub madd: f64,
    pub fairness_loss: f64,
    pub m: usize,
    pub n_g0: usize,
    pub n_g1: usize,
    pub bins_g0: Vec<f64>,
    pub bins_g1: Vec<f64>,
}

pub struct MaddArgs<'a> {
    pub input: &'a Path,
    pub m: usize,
    pub out: Option<&'a Path>,
    /// Optional plot data: `x,density_g0,density_g1`.
    pub kde_out: Option<&'a Path>,
    pub bandwidth: f64,
}

pub fn cmd_madd(args: &MaddArgs<'_>) -> Result<MaddReport> {
    let started = unix_now();
    let records = read_records_file(args.input)?;
    let p0 = group_probas(&records, Group::G0);
    let p1 = group_probas(&records, Group::G1);
    let d0 = DensityVector::build(&p0, args.m)?;
    let d1 = DensityVector::build(&p1, args.m)?;
    let value = madd(&d0, &d1)?;
    let report = MaddReport {
        madd: value,
        fairness_loss: 0.5 * value,
        m: args.m,
        n_g0: p0.len(),
        n_g1: p1.len(),
        bins_g0: d0.bins().to_vec(),
        bins_g1: d1.bins().to_vec(),
    };
    let mut outputs = Vec::new();
    if let Some(kde) = args.kde_out {
        let grid = 201;
        let c0 = kde_plot_curve(&d0, args.bandwidth, grid)?;
        let c1 = kde_plot_curve(&d1, args.bandwidth, grid)?;
        crate::io::ensure_parent(kde)?;
        let mut w = csv::Writer::from_writer(File::create(kde)?);
        w.write_record(["x", "density_g0", "density_g1"])?;
        for ((x, a), (_, b)) in c0.into_iter().zip(c1) {
            w.write_record([format_sig17(x), format_sig17(a), format_sig17(b)])?;
        }
        w.flush()?;
        outputs.push(kde.to_path_buf());
    }
    if let Some(out) = args.out {
        write_json(out, &report)?;
        outputs.insert(0, out.to_path_buf());
    }
    if let Some(primary) = outputs.first().cloned() {
        let mut manifest = RunManifest::new("madd", json!({ "m": args.m, "bandwidth": args.bandwidth }), started);
        manifest.inputs.push(args.input.to_path_buf());
        manifest.outputs = outputs;
        manifest.rows = GroupCounts::of(&records);
        manifest.finish(&manifest_path(&primary))?;
    }
    Ok(report)
}

pub fn cmd_fip(input: &Path, lambda: f64, m: usize, out: &Path) -> Result<GroupCounts> {
    let started = unix_now();
    let records = read_records_file(input)?;
    let mapped = fip(&records, lambda, m)?;
    crate::io::ensure_parent(out)?;
    let mut w = csv::Writer::from_writer(File::create(out)?);
    w.write_record(["proba", "new_proba", "group"])?;
    for (r, p) in records.iter().zip(&mapped) {
        w.write_record([format_sig17(r.proba()), format_sig17(*p), r.group.as_u8().to_string()])?;
    }
    w.flush()?;
    let mut manifest = RunManifest::new("fip", json!({ "lambda": lambda, "m": m }), started);
    manifest.inputs.push(input.to_path_buf());
    manifest.outputs.push(out.to_path_buf());
    let rows = GroupCounts::of(&records);
    manifest.rows = rows;
    manifest.finish(&manifest_path(out))?;
    Ok(rows)
}

pub fn objective_config(theta: f64, threshold: f64, m: usize, grid: usize) -> Result<ObjectiveConfig> {
    let config = ObjectiveConfig { theta, threshold, m, lambda_grid: even_grid(grid) };
    config.validate()?;
    Ok(config)
}

/// Writes `out` (CSV) and `out` with a `.json` extension; returns the report.
pub fn cmd_sweep(input: &Path, config: &ObjectiveConfig, out: &Path) -> Result<SweepReport> {
    let started = unix_now();
    let records = read_records_file(input)?;
    let result = sweep(&records, config)?;
    crate::io::ensure_parent(out)?;
    write_sweep_csv(File::create(out)?, &result.rows)?;
    let report = SweepReport::from(&result);
    let json_path = out.with_extension("json");
    write_json(&json_path, &report)?;
    let mut manifest = RunManifest::new("sweep", serde_json::to_value(&report.config)?, started);
    manifest.inputs.push(input.to_path_buf());
    manifest.outputs = vec![out.to_path_buf(), json_path];
    manifest.rows = GroupCounts::of(&records);
    manifest.finish(&manifest_path(out))?;
    Ok(report)
}

pub struct PipelineArgs<'a> {
    pub input: &'a Path,
    pub sensitive: &'a str,
    pub label: &'a str,
    pub config: PipelineConfig,
    pub out_dir: &'a Path,
}

pub struct PipelinePaths {
    pub model: PathBuf,
    pub sweep_csv: PathBuf,
    pub sweep_json: PathBuf,
    pub metrics: PathBuf,
    pub manifest: PathBuf,
}

impl PipelinePaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            model: dir.join("model.json"),
            sweep_csv: dir.join("validation_sweep.csv"),
            sweep_json: dir.join("validation_sweep.json"),
            metrics: dir.join("test_metrics.json"),
            manifest: dir.join("pipeline.manifest.json"),
        }
    }
}

pub fn cmd_pipeline(args: &PipelineArgs<'_>) -> Result<pipeline::TestReport> {
    let started = unix_now();
    let ds = TabularDataset::from_csv(File::open(args.input)?, default_schema(), args.label, args.sensitive)?;
    let outcome = pipeline::run(&ds, &args.config)?;
    let paths = PipelinePaths::in_dir(args.out_dir);
    std::fs::create_dir_all(args.out_dir)?;
    write_json(&paths.model, &outcome.model)?;
    write_sweep_csv(File::create(&paths.sweep_csv)?, &outcome.validation.rows)?;
    write_json(&paths.sweep_json, &SweepReport::from(&outcome.validation))?;
    write_json(&paths.metrics, &outcome.test)?;

    let (groups, _) = ds.groups()?;
    let g0 = groups.iter().filter(|g| **g == Group::G0).count();
    let mut manifest = RunManifest::new(
        "pipeline",
        json!({
            "sensitive": args.sensitive,
            "label": args.label,
            "theta": args.config.objective.theta,
            "threshold": args.config.objective.threshold,
            "m": args.config.objective.m,
            "grid_size": args.config.objective.lambda_grid.len(),
            "seed": args.config.seed,
            "ratios": args.config.ratios,
            "train": args.config.train,
            "group_levels": outcome.test.group_levels,
            "dropped_rows": ds.dropped,
        }),
        started,
    );
    manifest.inputs.push(args.input.to_path_buf());
    manifest.outputs = vec![paths.model, paths.sweep_csv, paths.sweep_json, paths.metrics];
    manifest.rows = GroupCounts { g0, g1: groups.len() - g0 };
    manifest.finish(&paths.manifest)?;
    Ok(outcome.test)
}

/// One-line diagnostic for the error stream.
pub fn diagnostic(err: &MaddError) -> String {
    let msg = err.to_string().replace('\n', " ");
    format!("madd: error kind={} code={} message={:?}", err.kind(), err.code(), msg)
}
