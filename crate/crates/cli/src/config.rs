//! Run configuration, resolved in three layers: built-in defaults, then the
//! TOML config file (`--config` or `$WEARSCOPE_CONFIG`), then command-line
//! flags. Every key is validated before any image is touched.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use wearscope_core::patching::layout_for;
use wearscope_core::wearcheck::EvalConfig;
use wearscope_core::{DescriptorKind, LayoutName, LayoutParams, MappingKind, PatchLayout, SvmParams};

use crate::CliError;

/// Environment variable consulted when `--config` is absent.
pub const CONFIG_ENV: &str = "WEARSCOPE_CONFIG";

/// Config keys that double as flags on every pipeline subcommand.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Patch layout: HGD, FED, TBD, HED or SED
    #[arg(long, value_parser = clap::value_parser!(LayoutName), value_name = "NAME")]
    pub layout: Option<LayoutName>,

    /// Width of the vertical edge strip as a fraction of image width
    #[arg(long, value_name = "FRAC")]
    pub edge_width: Option<f64>,

    /// Height of each horizontal band as a fraction of image height
    #[arg(long, value_name = "FRAC")]
    pub band_height: Option<f64>,

    /// Width of the SED edge strip as a fraction of image width
    #[arg(long, value_name = "FRAC")]
    pub sed_edge_width: Option<f64>,

    /// Descriptor: LBP8NH, LBP16NH, LBP8NH+LBP16NH, ALBP8, ALBP16,
    /// CLBP8, CLBP16, LBPV8 or LBPV16
    #[arg(long, value_parser = clap::value_parser!(DescriptorKind), value_name = "NAME")]
    pub descriptor: Option<DescriptorKind>,

    /// Histogram mapping: raw, ri or riu2
    #[arg(long, value_parser = clap::value_parser!(MappingKind), value_name = "NAME")]
    pub mapping: Option<MappingKind>,

    /// SVM soft-margin penalty
    #[arg(long = "c", value_name = "C")]
    pub c: Option<f64>,

    /// SVM KKT tolerance
    #[arg(long, value_name = "TOL")]
    pub tol: Option<f64>,

    /// SVM iteration budget (working-set passes over the data)
    #[arg(long, value_name = "N")]
    pub max_passes: Option<usize>,

    /// Worn-patch count at which an edge is ruled disposable
    #[arg(long, value_name = "N")]
    pub threshold: Option<usize>,

    /// Rule disposable only when the worn count strictly exceeds the
    /// threshold (default: greater or equal)
    #[arg(long)]
    pub strict_threshold: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    layout: Option<LayoutSection>,
    descriptor: Option<DescriptorSection>,
    svm: Option<SvmSection>,
    eval: Option<EvalSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutSection {
    name: Option<String>,
    edge_width: Option<f64>,
    band_height: Option<f64>,
    sed_edge_width: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DescriptorSection {
    name: Option<String>,
    mapping: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SvmSection {
    c: Option<f64>,
    tol: Option<f64>,
    max_passes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalSection {
    threshold: Option<usize>,
    strict: Option<bool>,
    seed: Option<u64>,
}

/// Fully resolved, validated run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub layout: LayoutName,
    pub layout_params: LayoutParams,
    pub descriptor: DescriptorKind,
    pub mapping: MappingKind,
    pub svm: SvmParams,
    pub threshold: usize,
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            layout: LayoutName::Sed,
            layout_params: LayoutParams::default(),
            descriptor: DescriptorKind::Lbp8Lbp16,
            mapping: MappingKind::Riu2,
            svm: SvmParams::default(),
            threshold: 1,
            strict: false,
        }
    }
}

impl RunConfig {
    /// Builds the layered configuration. `config_flag` wins over the
    /// `WEARSCOPE_CONFIG` environment variable; `seed_flag` wins over the
    /// file's `eval.seed`.
    pub fn resolve(
        config_flag: Option<&Path>,
        seed_flag: Option<u64>,
        overrides: &Overrides,
    ) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = config_file_path(config_flag) {
            cfg.apply_file(&load_file(&path)?)?;
        }
        cfg.apply_overrides(overrides);
        if let Some(seed) = seed_flag {
            cfg.svm.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, file: &FileConfig) -> Result<(), CliError> {
        if let Some(layout) = &file.layout {
            if let Some(name) = &layout.name {
                self.layout = parse_key("layout.name", name)?;
            }
            if let Some(v) = layout.edge_width {
                self.layout_params.edge_width = v;
            }
            if let Some(v) = layout.band_height {
                self.layout_params.band_height = v;
            }
            if let Some(v) = layout.sed_edge_width {
                self.layout_params.sed_edge_width = v;
            }
        }
        if let Some(descriptor) = &file.descriptor {
            if let Some(name) = &descriptor.name {
                self.descriptor = parse_key("descriptor.name", name)?;
            }
            if let Some(mapping) = &descriptor.mapping {
                self.mapping = parse_key("descriptor.mapping", mapping)?;
            }
        }
        if let Some(svm) = &file.svm {
            if let Some(c) = svm.c {
                self.svm.c = c;
            }
            if let Some(tol) = svm.tol {
                self.svm.tol = tol;
            }
            if let Some(n) = svm.max_passes {
                self.svm.max_passes = n;
            }
        }
        if let Some(eval) = &file.eval {
            if let Some(t) = eval.threshold {
                self.threshold = t;
            }
            if let Some(s) = eval.strict {
                self.strict = s;
            }
            if let Some(seed) = eval.seed {
                self.svm.seed = seed;
            }
        }
        Ok(())
    }

    fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(v) = o.layout {
            self.layout = v;
        }
        if let Some(v) = o.edge_width {
            self.layout_params.edge_width = v;
        }
        if let Some(v) = o.band_height {
            self.layout_params.band_height = v;
        }
        if let Some(v) = o.sed_edge_width {
            self.layout_params.sed_edge_width = v;
        }
        if let Some(v) = o.descriptor {
            self.descriptor = v;
        }
        if let Some(v) = o.mapping {
            self.mapping = v;
        }
        if let Some(v) = o.c {
            self.svm.c = v;
        }
        if let Some(v) = o.tol {
            self.svm.tol = v;
        }
        if let Some(v) = o.max_passes {
            self.svm.max_passes = v;
        }
        if let Some(v) = o.threshold {
            self.threshold = v;
        }
        if o.strict_threshold {
            self.strict = true;
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        // Checks layout-parameter ranges as a side effect.
        layout_for(self.layout, self.layout_params)
            .map_err(|e| CliError::usage(format!("invalid layout config: {e}")))?;
        if !(self.svm.c > 0.0 && self.svm.c.is_finite()) {
            return Err(CliError::usage(format!(
                "svm.c must be positive and finite, got {}",
                self.svm.c
            )));
        }
        if !(self.svm.tol > 0.0 && self.svm.tol.is_finite()) {
            return Err(CliError::usage(format!(
                "svm.tol must be positive and finite, got {}",
                self.svm.tol
            )));
        }
        if self.threshold < 1 {
            return Err(CliError::usage("eval.threshold must be at least 1"));
        }
        Ok(())
    }

    /// The configured layout, already known to be valid.
    pub fn build_layout(&self) -> PatchLayout {
        layout_for(self.layout, self.layout_params).expect("validated at resolve time")
    }

    /// Rejects thresholds no edge under this layout could ever reach.
    pub fn check_threshold(&self) -> Result<(), CliError> {
        let patches = self.layout.patch_count();
        if self.threshold > patches {
            return Err(CliError::usage(format!(
                "threshold {} exceeds the {} layout's {} patches",
                self.threshold,
                self.layout.as_str(),
                patches
            )));
        }
        Ok(())
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            layout: self.layout,
            layout_params: self.layout_params,
            descriptor: self.descriptor,
            mapping: self.mapping,
            svm: self.svm,
            threshold: self.threshold,
            strict: self.strict,
        }
    }
}

fn config_file_path(flag: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = flag {
        return Some(p.to_path_buf());
    }
    match env::var(CONFIG_ENV) {
        Ok(v) if !v.is_empty() => Some(PathBuf::from(v)),
        _ => None,
    }
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
}

fn parse_key<T>(key: &str, value: &str) -> Result<T, CliError>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::usage(format!("config key {key}: {e}")))
}
