//! End-to-end wear assessment and evaluation.
//!
//! An edge image is split into layout patches, each patch is classified
//! worn or serviceable, and the edge verdict comes from a worn-patch
//! count threshold. Evaluation trains on patch-role manifest entries,
//! assesses the edge-role entries, and reports the four usual binary
//! classification metrics with worn as the positive class.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imageio::{
    load_image, DatasetManifest, GrayImage, ImageIoError, ImageRole, ManifestEntry,
    ManifestError, WearLabel,
};
use crate::patching::{extract_patches, layout_for, LayoutName, LayoutParams, PatchError,
    PatchLayout};
use crate::svm::{train_with, SvmError, SvmModel, SvmParams, TrainSet};
use crate::texture::{DescriptorKind, MappingKind, TextureError};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Error)]
pub enum WearcheckError {
    #[error(transparent)]
    Image(#[from] ImageIoError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Patch(#[from] PatchError),
    #[error(transparent)]
    Texture(#[from] TextureError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error("threshold {threshold} outside [1, {patch_count}] for this layout")]
    BadThreshold { threshold: usize, patch_count: usize },
    #[error("confusion matrix is empty: metrics need at least one observation")]
    EmptyConfusion,
    #[error("train fraction {0} outside (0, 1)")]
    BadTrainFrac(f64),
    #[error("the {half} half of the split is missing the {label} class")]
    SplitClassMissing { half: &'static str, label: WearLabel },
    #[error("no {0} entries in the manifest")]
    EmptyRole(&'static str),
    #[error("no assessments to aggregate")]
    NoAssessments,
    #[error("assessments disagree on patch count: {first} vs {other}")]
    MixedPatchCounts { first: usize, other: usize },
    #[error("nothing to report")]
    EmptyReport,
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// The per-edge decision. The tool is pulled from the machine when the
/// verdict is disposable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Disposable,
    Serviceable,
}

impl Verdict {
    /// Count rule: disposable when the worn-patch count reaches the
    /// threshold; with `strict`, the count must exceed it.
    pub fn from_count(worn_count: usize, threshold: usize, strict: bool) -> Verdict {
        let disposable = if strict {
            worn_count > threshold
        } else {
            worn_count >= threshold
        };
        if disposable {
            Verdict::Disposable
        } else {
            Verdict::Serviceable
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Disposable => "disposable",
            Verdict::Serviceable => "serviceable",
        }
    }

    /// Worn when disposable, for confusion-matrix bookkeeping.
    pub fn as_label(&self) -> WearLabel {
        match self {
            Verdict::Disposable => WearLabel::Worn,
            Verdict::Serviceable => WearLabel::Serviceable,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of assessing one edge image: per-patch labels in layout rect
/// order plus the aggregated verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeAssessment {
    pub image: String,
    pub patch_labels: Vec<WearLabel>,
    pub worn_count: usize,
    pub wear_fraction: f64,
    pub verdict: Verdict,
    pub threshold: usize,
}

impl EdgeAssessment {
    /// Aggregates stored patch labels under a (threshold, strictness)
    /// rule; both the assessor and threshold sweeps go through here.
    pub fn from_labels(
        image: impl Into<String>,
        patch_labels: Vec<WearLabel>,
        threshold: usize,
        strict: bool,
    ) -> Result<EdgeAssessment, WearcheckError> {
        let patch_count = patch_labels.len();
        if threshold < 1 || threshold > patch_count {
            return Err(WearcheckError::BadThreshold {
                threshold,
                patch_count,
            });
        }
        let worn_count = patch_labels
            .iter()
            .filter(|&&l| l == WearLabel::Worn)
            .count();
        Ok(EdgeAssessment {
            image: image.into(),
            patch_labels,
            worn_count,
            wear_fraction: worn_count as f64 / patch_count as f64,
            verdict: Verdict::from_count(worn_count, threshold, strict),
            threshold,
        })
    }
}

/// Binary confusion counts with worn as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    #[serde(rename = "tp")]
    pub true_pos: u64,
    #[serde(rename = "fn")]
    pub false_neg: u64,
    #[serde(rename = "fp")]
    pub false_pos: u64,
    #[serde(rename = "tn")]
    pub true_neg: u64,
}

impl ConfusionMatrix {
    pub fn record(&mut self, truth: WearLabel, predicted: WearLabel) {
        match (truth, predicted) {
            (WearLabel::Worn, WearLabel::Worn) => self.true_pos += 1,
            (WearLabel::Worn, WearLabel::Serviceable) => self.false_neg += 1,
            (WearLabel::Serviceable, WearLabel::Worn) => self.false_pos += 1,
            (WearLabel::Serviceable, WearLabel::Serviceable) => self.true_neg += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_neg + self.false_pos + self.true_neg
    }
}

/// The four standard metrics. `degenerate` marks that some denominator
/// was zero and the affected metric was defined as 0 to keep sweeps
/// total; it appears in JSON reports but not the fixed CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub degenerate: bool,
}

/// accuracy = (tp+tn)/total, precision = tp/(tp+fp), recall = tp/(tp+fn),
/// fscore = 2tp/(2tp+fp+fn).
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics, WearcheckError> {
    let total = cm.total();
    if total == 0 {
        return Err(WearcheckError::EmptyConfusion);
    }
    let mut degenerate = false;
    let mut ratio = |num: u64, den: u64| -> f64 {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = ratio(cm.true_pos + cm.true_neg, total);
    let precision = ratio(cm.true_pos, cm.true_pos + cm.false_pos);
    let recall = ratio(cm.true_pos, cm.true_pos + cm.false_neg);
    let fscore = ratio(2 * cm.true_pos, 2 * cm.true_pos + cm.false_pos + cm.false_neg);
    Ok(Metrics {
        accuracy,
        precision,
        recall,
        fscore,
        degenerate,
    })
}

/// Classifies every layout patch of `img` and aggregates the verdict.
#[allow(clippy::too_many_arguments)] // the full per-assessment parameter surface
pub fn assess_edge(
    image_id: &str,
    img: &GrayImage,
    layout: &PatchLayout,
    model: &SvmModel,
    descriptor: DescriptorKind,
    mapping: MappingKind,
    threshold: usize,
    strict: bool,
) -> Result<EdgeAssessment, WearcheckError> {
    let patch_count = layout.patch_count();
    if threshold < 1 || threshold > patch_count {
        return Err(WearcheckError::BadThreshold {
            threshold,
            patch_count,
        });
    }
    let mut patch_labels = Vec::with_capacity(patch_count);
    for patch in extract_patches(img, layout, descriptor.min_patch_side())? {
        let d = descriptor.compute(&patch, mapping)?;
        patch_labels.push(model.classify(d.values())?);
    }
    EdgeAssessment::from_labels(image_id, patch_labels, threshold, strict)
}

/// Seeded shuffle-and-cut split. The train half takes `round(n * frac)`
/// entries; both halves must end up with both classes.
pub fn split(
    entries: &[ManifestEntry],
    train_frac: f64,
    seed: u64,
) -> Result<(Vec<ManifestEntry>, Vec<ManifestEntry>), WearcheckError> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(WearcheckError::BadTrainFrac(train_frac));
    }
    let mut order: Vec<usize> = (0..entries.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let train_size = (entries.len() as f64 * train_frac).round() as usize;
    let take = |slice: &[usize]| -> Vec<ManifestEntry> {
        slice.iter().map(|&i| entries[i].clone()).collect()
    };
    let train = take(&order[..train_size]);
    let test = take(&order[train_size..]);
    for (half, items) in [("train", &train), ("test", &test)] {
        for label in [WearLabel::Worn, WearLabel::Serviceable] {
            if !items.iter().any(|e| e.label == label) {
                return Err(WearcheckError::SplitClassMissing { half, label });
            }
        }
    }
    Ok((train, test))
}

/// One line of an evaluation report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub layout: LayoutName,
    pub descriptor: String,
    pub threshold: usize,
    pub cm: ConfusionMatrix,
    pub metrics: Metrics,
}

/// Re-aggregates stored patch labels at every threshold `1..=patch_count`
/// against the ground truth; no patch is reclassified.
pub fn sweep_threshold(
    assessments: &[EdgeAssessment],
    truths: &[WearLabel],
    strict: bool,
) -> Result<Vec<(usize, ConfusionMatrix, Metrics)>, WearcheckError> {
    if assessments.is_empty() {
        return Err(WearcheckError::NoAssessments);
    }
    assert_eq!(
        assessments.len(),
        truths.len(),
        "one ground-truth label per assessment"
    );
    let patch_count = assessments[0].patch_labels.len();
    for a in assessments {
        if a.patch_labels.len() != patch_count {
            return Err(WearcheckError::MixedPatchCounts {
                first: patch_count,
                other: a.patch_labels.len(),
            });
        }
    }
    let mut rows = Vec::with_capacity(patch_count);
    for threshold in 1..=patch_count {
        let mut cm = ConfusionMatrix::default();
        for (a, &truth) in assessments.iter().zip(truths) {
            let verdict = Verdict::from_count(a.worn_count, threshold, strict);
            cm.record(truth, verdict.as_label());
        }
        rows.push((threshold, cm, metrics(&cm)?));
    }
    Ok(rows)
}

/// Everything needed to reproduce one evaluation run.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub layout: LayoutName,
    pub layout_params: LayoutParams,
    pub descriptor: DescriptorKind,
    pub mapping: MappingKind,
    pub svm: SvmParams,
    pub threshold: usize,
    pub strict: bool,
}

/// Result of [`evaluate`]: the report row plus the raw per-edge
/// assessments (for threshold sweeps) and the trained model.
#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub row: ReportRow,
    pub assessments: Vec<EdgeAssessment>,
    pub truths: Vec<WearLabel>,
    pub model: SvmModel,
}

/// Trains on the manifest's patch-role entries and assesses its
/// edge-role entries. Deterministic for fixed (manifest, config).
pub fn evaluate(
    manifest: &DatasetManifest,
    config: &EvalConfig,
) -> Result<EvalOutcome, WearcheckError> {
    let layout = layout_for(config.layout, config.layout_params)?;
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for entry in manifest.with_role(ImageRole::Patch) {
        let img = load_image(manifest.resolve(entry))?;
        let d = config.descriptor.compute(&img, config.mapping)?;
        samples.push(d.into_values());
        labels.push(entry.label.sign());
    }
    if samples.is_empty() {
        return Err(WearcheckError::EmptyRole("patch"));
    }
    let train_set = TrainSet::new(samples, labels)?;
    let model = train_with(&train_set, &config.svm)?;

    let mut assessments = Vec::new();
    let mut truths = Vec::new();
    let mut cm = ConfusionMatrix::default();
    for entry in manifest.with_role(ImageRole::Edge) {
        let img = load_image(manifest.resolve(entry))?;
        let assessment = assess_edge(
            &entry.path,
            &img,
            &layout,
            &model,
            config.descriptor,
            config.mapping,
            config.threshold,
            config.strict,
        )?;
        cm.record(entry.label, assessment.verdict.as_label());
        assessments.push(assessment);
        truths.push(entry.label);
    }
    if assessments.is_empty() {
        return Err(WearcheckError::EmptyRole("edge"));
    }
    let row = ReportRow {
        layout: config.layout,
        descriptor: config.descriptor.canonical_name().to_string(),
        threshold: config.threshold,
        cm,
        metrics: metrics(&cm)?,
    };
    Ok(EvalOutcome {
        row,
        assessments,
        truths,
        model,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

impl ReportFormat {
    pub fn from_extension(path: &Path) -> Option<ReportFormat> {
        match path.extension()?.to_str()? {
            "csv" => Some(ReportFormat::Csv),
            "json" => Some(ReportFormat::Json),
            "svg" => Some(ReportFormat::Svg),
            _ => None,
        }
    }
}

/// Report row as serialized to JSON (the superset format: CSV keeps the
/// fixed column set without the degenerate flag).
#[derive(Serialize)]
struct JsonRow<'a> {
    layout: &'a str,
    descriptor: &'a str,
    threshold: usize,
    tp: u64,
    #[serde(rename = "fn")]
    false_neg: u64,
    fp: u64,
    tn: u64,
    accuracy: f64,
    precision: f64,
    recall: f64,
    fscore: f64,
    degenerate: bool,
}

pub fn emit_report(
    rows: &[ReportRow],
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<(), WearcheckError> {
    let path = path.as_ref();
    if rows.is_empty() {
        return Err(WearcheckError::EmptyReport);
    }
    let body = match format {
        ReportFormat::Csv => render_csv(rows),
        ReportFormat::Json => render_json(rows),
        ReportFormat::Svg => render_svg(rows),
    };
    fs::write(path, body).map_err(|source| WearcheckError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub const REPORT_CSV_HEADER: &str =
    "layout,descriptor,threshold,tp,fn,fp,tn,accuracy,precision,recall,fscore";

fn render_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.layout.as_str(),
            r.descriptor,
            r.threshold,
            r.cm.true_pos,
            r.cm.false_neg,
            r.cm.false_pos,
            r.cm.true_neg,
            r.metrics.accuracy,
            r.metrics.precision,
            r.metrics.recall,
            r.metrics.fscore,
        ));
    }
    out
}

fn render_json(rows: &[ReportRow]) -> String {
    let out: Vec<JsonRow> = rows
        .iter()
        .map(|r| JsonRow {
            layout: r.layout.as_str(),
            descriptor: &r.descriptor,
            threshold: r.threshold,
            tp: r.cm.true_pos,
            false_neg: r.cm.false_neg,
            fp: r.cm.false_pos,
            tn: r.cm.true_neg,
            accuracy: r.metrics.accuracy,
            precision: r.metrics.precision,
            recall: r.metrics.recall,
            fscore: r.metrics.fscore,
            degenerate: r.metrics.degenerate,
        })
        .collect();
    serde_json::to_string_pretty(&out).expect("report rows serialize")
}

/// A minimal self-contained line chart: the four metrics across rows
/// (x = threshold when rows form one sweep, otherwise the row index).
fn render_svg(rows: &[ReportRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const MARGIN: f64 = 50.0;
    let n = rows.len();
    // (legend label, stroke color, metric accessor)
    type Series = (&'static str, &'static str, fn(&Metrics) -> f64);
    let series: [Series; 4] = [
        ("accuracy", "#1f77b4", |m| m.accuracy),
        ("precision", "#ff7f0e", |m| m.precision),
        ("recall", "#2ca02c", |m| m.recall),
        ("fscore", "#d62728", |m| m.fscore),
    ];
    let x_at = |i: usize| -> f64 {
        if n == 1 {
            W / 2.0
        } else {
            MARGIN + (W - 2.0 * MARGIN) * i as f64 / (n - 1) as f64
        }
    };
    let y_at = |v: f64| -> f64 { H - MARGIN - (H - 2.0 * MARGIN) * v };
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    // Axes.
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MARGIN,
        W - MARGIN,
        H - MARGIN
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MARGIN
    ));
    for (i, r) in rows.iter().enumerate() {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
            x_at(i),
            H - MARGIN + 15.0,
            r.threshold
        ));
    }
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{tick}</text>\n",
            MARGIN - 5.0,
            y_at(tick) + 3.0
        ));
    }
    for (si, (label, color, get)) in series.iter().enumerate() {
        let points: Vec<String> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| format!("{},{}", x_at(i), y_at(get(&r.metrics))))
            .collect();
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{label}</text>\n",
            W - MARGIN + 5.0,
            MARGIN + 14.0 * si as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
