//! The six subcommands. Each validates everything it can up front (usage
//! errors, exit 2) before touching an image (processing failures, exit 1).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use wearscope_core::edgefinder::{self, CropConfig};
use wearscope_core::imageio::{load_image, load_manifest, save_image, DatasetManifest, ImageRole};
use wearscope_core::svm::{self, SvmError, SvmModel};
use wearscope_core::texture::{read_descriptors, write_descriptors, DescriptorRecord};
use wearscope_core::wearcheck::{self, ReportFormat, ReportRow};
use wearscope_core::{DescriptorKind, LayoutName, TrainSet};

use crate::config::{Overrides, RunConfig};
use crate::pool::run_ordered;
use crate::{CliError, Global};

/// C grid scanned by `train --tune`.
const TUNE_GRID: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
const TUNE_FOLDS: usize = 5;

#[derive(Args)]
pub struct ExtractEdgesArgs {
    /// Input image file, or directory of .pgm/.png images
    #[arg(long, value_name = "PATH")]
    input: PathBuf,

    /// Directory for cropped edges and their JSON sidecars
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,

    /// Smallest screw radius considered, in pixels
    #[arg(long, default_value_t = 40)]
    rmin: u32,

    /// Largest screw radius considered, in pixels
    #[arg(long, default_value_t = 80)]
    rmax: u32,

    /// Gaussian blur sigma for edge detection
    #[arg(long, default_value_t = edgefinder::DEFAULT_SIGMA)]
    sigma: f64,

    /// Fixed low hysteresis threshold (default: derived per image)
    #[arg(long, value_name = "T")]
    low: Option<f64>,

    /// Fixed high hysteresis threshold (default: derived per image)
    #[arg(long, value_name = "T")]
    high: Option<f64>,

    /// Crop width as a fraction of image width
    #[arg(long, default_value_t = 0.35, value_name = "FRAC")]
    width_frac: f64,

    /// Report failed images but keep processing and exit 0
    #[arg(long)]
    keep_going: bool,
}

pub fn extract_edges(args: &ExtractEdgesArgs, global: &Global) -> Result<(), CliError> {
    if args.rmin == 0 || args.rmin > args.rmax {
        return Err(CliError::usage(format!(
            "radius range {}..={} is invalid (need 1 <= rmin <= rmax)",
            args.rmin, args.rmax
        )));
    }
    if !(args.width_frac > 0.0 && args.width_frac <= 1.0) {
        return Err(CliError::usage(format!(
            "--width-frac must be in (0, 1], got {}",
            args.width_frac
        )));
    }
    match (args.low, args.high) {
        (Some(low), Some(high)) if !(0.0 <= low && low <= high) => {
            return Err(CliError::usage(format!(
                "hysteresis thresholds need 0 <= low <= high, got {low} and {high}"
            )));
        }
        (Some(_), None) | (None, Some(_)) => {
            return Err(CliError::usage(
                "--low and --high must be given together or not at all",
            ));
        }
        _ => {}
    }
    let inputs = collect_images(&args.input)?;
    if inputs.is_empty() {
        println!("0 processed");
        return Ok(());
    }
    fs::create_dir_all(&args.out_dir).map_err(|e| {
        CliError::failure(format!("cannot create {}: {e}", args.out_dir.display()))
    })?;
    let crop = CropConfig {
        sigma: args.sigma,
        low: args.low,
        high: args.high,
        r_min: args.rmin,
        r_max: args.rmax,
        width_frac: args.width_frac,
        ..CropConfig::default()
    };
    let results = run_ordered(&inputs, global.jobs, |path| {
        extract_one(path, &args.out_dir, &crop)
    });
    let mut failed = 0usize;
    for (path, result) in inputs.iter().zip(results) {
        match result {
            Ok(line) => println!("{line}"),
            Err(msg) => {
                failed += 1;
                eprintln!("wearscope: {}: {msg}", path.display());
            }
        }
    }
    if failed == 0 {
        println!("{} processed", inputs.len());
    } else {
        println!("{} processed, {failed} failed", inputs.len() - failed);
    }
    if failed > 0 && !args.keep_going {
        return Err(CliError::failure(format!(
            "{failed} of {} images failed",
            inputs.len()
        )));
    }
    Ok(())
}

fn extract_one(src: &Path, out_dir: &Path, crop: &CropConfig) -> Result<String, String> {
    let img = load_image(src).map_err(|e| e.to_string())?;
    let outcome = edgefinder::crop_cutting_edge(&img, crop).map_err(|e| e.to_string())?;
    let stem = src
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("unnamed");
    let pgm_path = out_dir.join(format!("{stem}_edge.pgm"));
    let json_path = out_dir.join(format!("{stem}_edge.json"));
    save_image(&outcome.crop, &pgm_path).map_err(|e| e.to_string())?;
    let sidecar = serde_json::json!({
        "source": src.display().to_string(),
        "column": outcome.column,
        "line": {
            "rho": outcome.line.rho,
            "theta": outcome.line.theta,
            "votes": outcome.line.votes,
        },
        "circle": outcome.circle.map(|c| {
            serde_json::json!({"cx": c.cx, "cy": c.cy, "r": c.r, "votes": c.votes})
        }),
    });
    fs::write(&json_path, format!("{sidecar:#}\n")).map_err(|e| e.to_string())?;
    Ok(format!(
        "{}: edge at column {}, {}x{} crop -> {}",
        src.display(),
        outcome.column,
        outcome.crop.width(),
        outcome.crop.height(),
        pgm_path.display()
    ))
}

#[derive(Args)]
pub struct FeaturizeArgs {
    /// Dataset manifest CSV (path,role,label,group)
    #[arg(long, value_name = "CSV")]
    manifest: PathBuf,

    /// Output descriptor file
    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    /// Manifest role to featurize: patch or edge
    #[arg(long, default_value = "patch")]
    role: String,

    #[command(flatten)]
    overrides: Overrides,
}

pub fn featurize(args: &FeaturizeArgs, global: &Global) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(global.config.as_deref(), global.seed, &args.overrides)?;
    let role = parse_role(&args.role)?;
    let manifest = load_manifest_checked(&args.manifest)?;
    let entries: Vec<_> = manifest.with_role(role).cloned().collect();
    if entries.is_empty() {
        return Err(CliError::failure(format!(
            "manifest {} has no {} entries",
            args.manifest.display(),
            role.as_str()
        )));
    }
    let results = run_ordered(&entries, global.jobs, |entry| -> Result<_, String> {
        let img = load_image(manifest.resolve(entry)).map_err(|e| e.to_string())?;
        let d = cfg
            .descriptor
            .compute(&img, cfg.mapping)
            .map_err(|e| e.to_string())?;
        Ok(DescriptorRecord {
            name: entry.path.clone(),
            label: entry.label,
            values: d.into_values(),
        })
    });
    let mut records = Vec::with_capacity(entries.len());
    for (entry, result) in entries.iter().zip(results) {
        match result {
            Ok(record) => records.push(record),
            Err(msg) => return Err(CliError::failure(format!("{}: {msg}", entry.path))),
        }
    }
    write_descriptors(&records, &args.out).map_err(|e| CliError::failure(e.to_string()))?;
    println!(
        "wrote {} descriptors ({} x {}, {} values each) to {}",
        records.len(),
        cfg.descriptor.canonical_name(),
        cfg.mapping,
        cfg.descriptor.len(cfg.mapping),
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).multiple(false))]
pub struct TrainArgs {
    /// Descriptor file written by `featurize`
    #[arg(long, value_name = "PATH", group = "source")]
    features: Option<PathBuf>,

    /// Dataset manifest; its patch images are featurized on the fly
    #[arg(long, value_name = "CSV", group = "source")]
    manifest: Option<PathBuf>,

    /// Where to write the trained model
    #[arg(long, value_name = "PATH")]
    model_out: PathBuf,

    /// Pick C by cross-validation over {0.1, 1, 10, 100}
    #[arg(long)]
    tune: bool,

    #[command(flatten)]
    overrides: Overrides,
}

pub fn train(args: &TrainArgs, global: &Global) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(global.config.as_deref(), global.seed, &args.overrides)?;
    let data = match (&args.features, &args.manifest) {
        (Some(path), None) => train_set_from_features(path)?,
        (None, Some(path)) => {
            let manifest = load_manifest_checked(path)?;
            train_set_from_manifest(&manifest, &cfg, global.jobs)?
        }
        _ => unreachable!("clap enforces exactly one source"),
    };
    let mut params = cfg.svm;
    if args.tune {
        let (rows, best) = svm::tune(&data, &TUNE_GRID, TUNE_FOLDS, params.tol, params.seed)
            .map_err(|e| CliError::failure(format!("tuning failed: {e}")))?;
        for (c, cv_accuracy) in &rows {
            println!("C={c} cv_accuracy={cv_accuracy:.4}");
        }
        println!("selected C={best}");
        params.c = best;
    }
    let model = svm::train_with(&data, &params).map_err(|e| match e {
        SvmError::NonConvergence { iterations, .. } => CliError::failure(format!(
            "training did not converge within {iterations} working-set steps; \
             raise --max-passes or loosen --tol"
        )),
        other => CliError::failure(other.to_string()),
    })?;
    let correct = data
        .samples()
        .iter()
        .zip(data.labels())
        .filter(|(x, &y)| {
            model
                .decision(x)
                .map(|d| (d >= 0.0) == (y > 0.0))
                .unwrap_or(false)
        })
        .count();
    svm::save_model(&model, &args.model_out).map_err(|e| CliError::failure(e.to_string()))?;
    println!(
        "trained on {} samples: {} support vectors, C={}, train accuracy {:.3}",
        data.len(),
        model.support_vector_count(),
        params.c,
        correct as f64 / data.len() as f64
    );
    println!("wrote model to {}", args.model_out.display());
    Ok(())
}

fn train_set_from_features(path: &Path) -> Result<TrainSet, CliError> {
    if !path.exists() {
        return Err(CliError::usage(format!(
            "features file {} does not exist",
            path.display()
        )));
    }
    let records = read_descriptors(path).map_err(|e| CliError::usage(e.to_string()))?;
    let mut samples = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for r in records {
        labels.push(r.label.sign());
        samples.push(r.values);
    }
    TrainSet::new(samples, labels).map_err(|e| CliError::usage(e.to_string()))
}

fn train_set_from_manifest(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    jobs: usize,
) -> Result<TrainSet, CliError> {
    let entries: Vec<_> = manifest.with_role(ImageRole::Patch).cloned().collect();
    if entries.is_empty() {
        return Err(CliError::failure("manifest has no patch entries"));
    }
    let results = run_ordered(&entries, jobs, |entry| -> Result<_, String> {
        let img = load_image(manifest.resolve(entry)).map_err(|e| e.to_string())?;
        let d = cfg
            .descriptor
            .compute(&img, cfg.mapping)
            .map_err(|e| e.to_string())?;
        Ok((d.into_values(), entry.label.sign()))
    });
    let mut samples = Vec::with_capacity(entries.len());
    let mut labels = Vec::with_capacity(entries.len());
    for (entry, result) in entries.iter().zip(results) {
        match result {
            Ok((values, label)) => {
                samples.push(values);
                labels.push(label);
            }
            Err(msg) => return Err(CliError::failure(format!("{}: {msg}", entry.path))),
        }
    }
    TrainSet::new(samples, labels).map_err(|e| CliError::failure(e.to_string()))
}

#[derive(Args)]
pub struct AssessArgs {
    /// Trained model file
    #[arg(long, value_name = "PATH")]
    model: PathBuf,

    /// Cutting-edge image file, or directory of .pgm/.png images
    #[arg(long, value_name = "PATH")]
    input: PathBuf,

    /// Also write the assessments as a JSON array
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,
}

pub fn assess(args: &AssessArgs, global: &Global) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(global.config.as_deref(), global.seed, &args.overrides)?;
    cfg.check_threshold()?;
    let model = load_model_checked(&args.model)?;
    let expected = cfg.descriptor.len(cfg.mapping);
    if model.feature_len() != expected {
        return Err(CliError::usage(format!(
            "model {} expects {}-dimensional descriptors, but {} with {} mapping yields {}",
            args.model.display(),
            model.feature_len(),
            cfg.descriptor.canonical_name(),
            cfg.mapping,
            expected
        )));
    }
    let layout = cfg.build_layout();
    let inputs = collect_images(&args.input)?;
    if inputs.is_empty() {
        println!("0 assessed");
        return Ok(());
    }
    let start = Instant::now();
    let results = run_ordered(&inputs, global.jobs, |path| {
        let img = load_image(path).map_err(|e| e.to_string())?;
        wearcheck::assess_edge(
            &path.display().to_string(),
            &img,
            &layout,
            &model,
            cfg.descriptor,
            cfg.mapping,
            cfg.threshold,
            cfg.strict,
        )
        .map_err(|e| e.to_string())
    });
    let elapsed = start.elapsed().as_secs_f64();
    let mut assessments = Vec::with_capacity(inputs.len());
    for (path, result) in inputs.iter().zip(results) {
        match result {
            Ok(a) => assessments.push(a),
            Err(msg) => return Err(CliError::failure(format!("{}: {msg}", path.display()))),
        }
    }
    for a in &assessments {
        println!("{} {} {:.3}", a.image, a.verdict.as_str(), a.wear_fraction);
    }
    println!(
        "assessed {} inserts in {:.3} s ({:.3} s per insert)",
        assessments.len(),
        elapsed,
        elapsed / assessments.len() as f64
    );
    if let Some(json_path) = &args.json {
        let body = serde_json::to_string_pretty(&assessments)
            .map_err(|e| CliError::failure(e.to_string()))?;
        fs::write(json_path, body + "\n").map_err(|e| {
            CliError::failure(format!("cannot write {}: {e}", json_path.display()))
        })?;
        println!("wrote {}", json_path.display());
    }
    Ok(())
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Dataset manifest CSV: trains on patch rows, scores edge rows
    #[arg(long, value_name = "CSV")]
    manifest: PathBuf,

    /// Report path; format from the extension (.csv, .json or .svg)
    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    /// Run every descriptor across every layout
    #[arg(long)]
    grid: bool,

    #[command(flatten)]
    overrides: Overrides,
}

pub fn evaluate(args: &EvaluateArgs, global: &Global) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(global.config.as_deref(), global.seed, &args.overrides)?;
    let format = report_format(&args.out)?;
    let manifest = load_manifest_checked(&args.manifest)?;
    let rows = if args.grid {
        let tightest = LayoutName::ALL
            .into_iter()
            .min_by_key(|l| l.patch_count())
            .expect("five layouts");
        if cfg.threshold > tightest.patch_count() {
            return Err(CliError::usage(format!(
                "threshold {} exceeds the {} layout's {} patches, so the grid cannot run",
                cfg.threshold,
                tightest.as_str(),
                tightest.patch_count()
            )));
        }
        let cells: Vec<(LayoutName, DescriptorKind)> = LayoutName::ALL
            .into_iter()
            .flat_map(|l| DescriptorKind::ALL.into_iter().map(move |d| (l, d)))
            .collect();
        let outcomes = run_ordered(&cells, global.jobs, |&(layout, descriptor)| {
            let mut cell = cfg.eval_config();
            cell.layout = layout;
            cell.descriptor = descriptor;
            wearcheck::evaluate(&manifest, &cell)
                .map(|o| o.row)
                .map_err(|e| format!("{} {}: {e}", layout.as_str(), descriptor.canonical_name()))
        });
        let mut rows = Vec::with_capacity(cells.len());
        for outcome in outcomes {
            rows.push(outcome.map_err(CliError::failure)?);
        }
        rows
    } else {
        cfg.check_threshold()?;
        let outcome = wearcheck::evaluate(&manifest, &cfg.eval_config())
            .map_err(|e| CliError::failure(e.to_string()))?;
        vec![outcome.row]
    };
    for row in &rows {
        println!("{}", row_line(row));
    }
    wearcheck::emit_report(&rows, &args.out, format)
        .map_err(|e| CliError::failure(e.to_string()))?;
    println!("wrote {} report rows to {}", rows.len(), args.out.display());
    Ok(())
}

#[derive(Args)]
pub struct SweepArgs {
    /// Dataset manifest CSV: trains on patch rows, scores edge rows
    #[arg(long, value_name = "CSV")]
    manifest: PathBuf,

    /// Report path; format from the extension (.csv, .json or .svg)
    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    #[command(flatten)]
    overrides: Overrides,
}

pub fn sweep(args: &SweepArgs, global: &Global) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(global.config.as_deref(), global.seed, &args.overrides)?;
    cfg.check_threshold()?;
    let format = report_format(&args.out)?;
    let manifest = load_manifest_checked(&args.manifest)?;
    let outcome = wearcheck::evaluate(&manifest, &cfg.eval_config())
        .map_err(|e| CliError::failure(e.to_string()))?;
    let swept = wearcheck::sweep_threshold(&outcome.assessments, &outcome.truths, cfg.strict)
        .map_err(|e| CliError::failure(e.to_string()))?;
    let rows: Vec<ReportRow> = swept
        .into_iter()
        .map(|(threshold, cm, metrics)| ReportRow {
            layout: cfg.layout,
            descriptor: cfg.descriptor.canonical_name().to_string(),
            threshold,
            cm,
            metrics,
        })
        .collect();
    for row in &rows {
        println!("{}", row_line(row));
    }
    wearcheck::emit_report(&rows, &args.out, format)
        .map_err(|e| CliError::failure(e.to_string()))?;
    println!("wrote {} report rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn row_line(row: &ReportRow) -> String {
    format!(
        "{} {} threshold={} accuracy={:.4} precision={:.4} recall={:.4} fscore={:.4}",
        row.layout.as_str(),
        row.descriptor,
        row.threshold,
        row.metrics.accuracy,
        row.metrics.precision,
        row.metrics.recall,
        row.metrics.fscore
    )
}

fn report_format(path: &Path) -> Result<ReportFormat, CliError> {
    ReportFormat::from_extension(path).ok_or_else(|| {
        CliError::usage(format!(
            "cannot infer report format from {} (use .csv, .json or .svg)",
            path.display()
        ))
    })
}

fn parse_role(s: &str) -> Result<ImageRole, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "patch" => Ok(ImageRole::Patch),
        "edge" => Ok(ImageRole::Edge),
        other => Err(CliError::usage(format!(
            "unknown role {other:?} (expected patch or edge)"
        ))),
    }
}

fn load_manifest_checked(path: &Path) -> Result<DatasetManifest, CliError> {
    if !path.exists() {
        return Err(CliError::usage(format!(
            "manifest {} does not exist",
            path.display()
        )));
    }
    load_manifest(path).map_err(|e| CliError::usage(e.to_string()))
}

fn load_model_checked(path: &Path) -> Result<SvmModel, CliError> {
    if !path.exists() {
        return Err(CliError::usage(format!(
            "model {} does not exist",
            path.display()
        )));
    }
    svm::load_model(path).map_err(|e| CliError::usage(e.to_string()))
}

/// One file stays one file; a directory yields its .pgm/.png entries in
/// name order, so output order never depends on readdir order.
fn collect_images(input: &Path) -> Result<Vec<PathBuf>, CliError> {
    let meta = fs::metadata(input).map_err(|e| {
        CliError::usage(format!("cannot open input {}: {e}", input.display()))
    })?;
    if meta.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut files = Vec::new();
    let entries = fs::read_dir(input).map_err(|e| {
        CliError::usage(format!("cannot list input {}: {e}", input.display()))
    })?;
    for entry in entries {
        let entry =
            entry.map_err(|e| CliError::failure(format!("cannot list {}: {e}", input.display())))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if matches!(ext.as_deref(), Some("pgm") | Some("png")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}
