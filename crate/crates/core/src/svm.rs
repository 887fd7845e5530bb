//! Binary soft-margin SVM with the histogram intersection kernel.
//!
//! Training is sequential minimal optimization over the standard dual:
//! maximize `sum(a_i) - 1/2 sum(a_i a_j y_i y_j k(x_i, x_j))` subject to
//! `0 <= a_i <= C` and `sum(a_i y_i) = 0`. The working pair is chosen by
//! the classic second-choice heuristic (maximize `|E_i - E_j|`), with
//! seeded random sweep origins so training is deterministic for a fixed
//! seed. Models persist as versioned plain text with hexadecimal float
//! encoding, so save/load round-trips are bit-exact.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("descriptor lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("negative component {value} at index {index}: the intersection kernel needs non-negative inputs")]
    NegativeComponent { index: usize, value: f64 },
    #[error("training set has {samples} samples but {labels} labels")]
    LabelCountMismatch { samples: usize, labels: usize },
    #[error("training set must contain at least one sample of each class")]
    MissingClass,
    #[error("label {0} is not +1 or -1")]
    BadLabel(i8),
    #[error("invalid hyperparameter: {0}")]
    BadHyperparameter(String),
    #[error("SMO did not converge within {iterations} working-set selections; best iterate attached")]
    NonConvergence {
        model: Box<SvmModel>,
        iterations: usize,
    },
    #[error("model has no support vectors")]
    EmptyModel,
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: expected header `WEARSCOPE-SVM v1`, found {found:?}")]
    VersionMismatch { path: PathBuf, found: String },
    #[error("{path}: corrupt model file: {detail}")]
    Corrupt { path: PathBuf, detail: String },
}

/// Labeled training samples; labels are +1 (worn) or -1 (serviceable).
#[derive(Debug, Clone)]
pub struct TrainSet {
    samples: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

impl TrainSet {
    /// Validates equal counts, consistent dimensions, non-negative values
    /// and the presence of both classes.
    pub fn new(samples: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self, SvmError> {
        if samples.len() != labels.len() {
            return Err(SvmError::LabelCountMismatch {
                samples: samples.len(),
                labels: labels.len(),
            });
        }
        let dim = samples.first().map(Vec::len).unwrap_or(0);
        for s in &samples {
            if s.len() != dim {
                return Err(SvmError::LengthMismatch {
                    left: dim,
                    right: s.len(),
                });
            }
            check_non_negative(s)?;
        }
        let mut seen = (false, false);
        for &l in &labels {
            match l {
                1 => seen.0 = true,
                -1 => seen.1 = true,
                other => return Err(SvmError::BadLabel(other)),
            }
        }
        if !(seen.0 && seen.1) {
            return Err(SvmError::MissingClass);
        }
        Ok(Self {
            samples,
            labels: labels.into_iter().map(f64::from).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map(Vec::len).unwrap_or(0)
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    /// Labels as +1.0 / -1.0.
    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// The subset at `indices`, used for cross-validation folds.
    fn subset(&self, indices: &[usize]) -> Result<TrainSet, SvmError> {
        TrainSet::new(
            indices.iter().map(|&i| self.samples[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i] as i8).collect(),
        )
    }
}

fn check_non_negative(x: &[f64]) -> Result<(), SvmError> {
    for (index, &value) in x.iter().enumerate() {
        // NaN fails this check too, on purpose.
        if value < 0.0 || value.is_nan() {
            return Err(SvmError::NegativeComponent { index, value });
        }
    }
    Ok(())
}

/// Histogram intersection kernel `k(x, y) = sum(min(x_i, y_i))`.
/// Symmetric, and bounded by `min(sum(x), sum(y))` for non-negative inputs.
pub fn intersection_kernel(x: &[f64], y: &[f64]) -> Result<f64, SvmError> {
    if x.len() != y.len() {
        return Err(SvmError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    check_non_negative(x)?;
    check_non_negative(y)?;
    Ok(kernel_unchecked(x, y))
}

#[inline]
fn kernel_unchecked(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a.min(*b)).sum()
}

/// A trained intersection-kernel SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    support_vectors: Vec<Vec<f64>>,
    alphas: Vec<f64>,
    sv_labels: Vec<f64>,
    bias: f64,
    c: f64,
    feature_len: usize,
}

impl SvmModel {
    pub fn support_vector_count(&self) -> usize {
        self.support_vectors.len()
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn feature_len(&self) -> usize {
        self.feature_len
    }

    /// Signed margin `sum(alpha_i y_i k(sv_i, x)) + bias`.
    pub fn decision(&self, x: &[f64]) -> Result<f64, SvmError> {
        if x.len() != self.feature_len {
            return Err(SvmError::LengthMismatch {
                left: self.feature_len,
                right: x.len(),
            });
        }
        check_non_negative(x)?;
        let mut sum = self.bias;
        for ((sv, &a), &y) in self.support_vectors.iter().zip(&self.alphas).zip(&self.sv_labels) {
            sum += a * y * kernel_unchecked(sv, x);
        }
        Ok(sum)
    }

    /// Worn iff the margin is non-negative: a tied margin goes to worn
    /// because missing a worn edge is the costly mistake in this domain.
    pub fn classify(&self, x: &[f64]) -> Result<crate::imageio::WearLabel, SvmError> {
        Ok(if self.decision(x)? >= 0.0 {
            crate::imageio::WearLabel::Worn
        } else {
            crate::imageio::WearLabel::Serviceable
        })
    }
}

/// Training hyperparameters. `tol` bounds the tolerated KKT violation;
/// training touches at most `max_passes * n` working-set candidates before
/// giving up with [`SvmError::NonConvergence`].
#[derive(Debug, Clone, Copy)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_passes: 100,
            seed: 0,
        }
    }
}

/// Trains with default iteration budget; see [`train_with`].
pub fn train(data: &TrainSet, c: f64, tol: f64, seed: u64) -> Result<SvmModel, SvmError> {
    train_with(
        data,
        &SvmParams {
            c,
            tol,
            seed,
            ..SvmParams::default()
        },
    )
}

/// Sequential minimal optimization on the dual problem. Deterministic for
/// fixed (data order, params). Returns the model with bias set from the
/// mean of `y_i - f_i` over non-bound support vectors, falling back to the
/// midpoint of the feasible KKT interval when every alpha is at a bound.
pub fn train_with(data: &TrainSet, params: &SvmParams) -> Result<SvmModel, SvmError> {
    if !params.c.is_finite() || params.c <= 0.0 {
        return Err(SvmError::BadHyperparameter(format!("C = {}", params.c)));
    }
    if !params.tol.is_finite() || params.tol <= 0.0 {
        return Err(SvmError::BadHyperparameter(format!("tol = {}", params.tol)));
    }
    let mut smo = Smo::new(data, params);
    let converged = smo.run();
    let model = smo.finish(data);
    if converged {
        Ok(model)
    } else {
        Err(SvmError::NonConvergence {
            model: Box::new(model),
            iterations: smo.examined,
        })
    }
}

/// SMO working state: dual variables, the bias-free prediction cache
/// `f_i = sum(alpha_j y_j K_ij)`, and the running threshold.
struct Smo<'a> {
    gram: Vec<f64>,
    n: usize,
    y: &'a [f64],
    alpha: Vec<f64>,
    f: Vec<f64>,
    b: f64,
    c: f64,
    tol: f64,
    budget: usize,
    examined: usize,
    rng: ChaCha8Rng,
}

/// Step-progress threshold from the SMO literature; movements smaller
/// than this are numerical noise, not optimization progress.
const EPS: f64 = 1e-12;

/// Alphas within this relative distance of a box bound are snapped onto
/// it, so "at the bound" is an exact test later (bias extraction must not
/// average in pseudo-free vectors whose KKT equality does not hold).
const BOUND_EPS: f64 = 1e-8;

impl<'a> Smo<'a> {
    fn new(data: &'a TrainSet, params: &SvmParams) -> Self {
        let n = data.len();
        let mut gram = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i..n {
                let k = kernel_unchecked(&data.samples()[i], &data.samples()[j]);
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
        }
        Smo {
            gram,
            n,
            y: data.labels(),
            alpha: vec![0.0; n],
            f: vec![0.0; n],
            b: 0.0,
            c: params.c,
            tol: params.tol,
            budget: params.max_passes.saturating_mul(n),
            examined: 0,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
        }
    }

    #[inline]
    fn k(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.n + j]
    }

    #[inline]
    fn error(&self, i: usize) -> f64 {
        self.f[i] + self.b - self.y[i]
    }

    fn is_non_bound(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.c
    }

    /// Outer loop: alternate full sweeps with non-bound sweeps until a
    /// full sweep changes nothing (all KKT conditions hold within tol).
    /// Returns false when the iteration budget runs out first.
    fn run(&mut self) -> bool {
        let mut examine_all = true;
        loop {
            let indices: Vec<usize> = if examine_all {
                (0..self.n).collect()
            } else {
                (0..self.n).filter(|&i| self.is_non_bound(i)).collect()
            };
            let mut changed = 0usize;
            for i in indices {
                self.examined += 1;
                if self.examined > self.budget {
                    return false;
                }
                if self.examine(i) {
                    changed += 1;
                }
            }
            if examine_all {
                if changed == 0 {
                    return true;
                }
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
        }
    }

    fn examine(&mut self, i2: usize) -> bool {
        let y2 = self.y[i2];
        let a2 = self.alpha[i2];
        let e2 = self.error(i2);
        let r2 = e2 * y2;
        let violates = (r2 < -self.tol && a2 < self.c) || (r2 > self.tol && a2 > 0.0);
        if !violates {
            return false;
        }
        // Second-choice heuristic: the partner maximizing |E1 - E2|.
        let non_bound: Vec<usize> = (0..self.n).filter(|&i| self.is_non_bound(i)).collect();
        if non_bound.len() > 1 {
            let i1 = non_bound
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    let da = (self.error(a) - e2).abs();
                    let db = (self.error(b) - e2).abs();
                    da.partial_cmp(&db).expect("finite errors")
                })
                .expect("non-empty");
            if self.take_step(i1, i2) {
                return true;
            }
        }
        // Fall back to sweeping non-bound, then all, from random origins.
        if !non_bound.is_empty() {
            let start = self.rng.random_range(0..non_bound.len());
            for off in 0..non_bound.len() {
                let i1 = non_bound[(start + off) % non_bound.len()];
                if self.take_step(i1, i2) {
                    return true;
                }
            }
        }
        let start = self.rng.random_range(0..self.n);
        for off in 0..self.n {
            let i1 = (start + off) % self.n;
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (alph1, alph2) = (self.alpha[i1], self.alpha[i2]);
        let (e1, e2) = (self.error(i1), self.error(i2));
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            ((alph2 - alph1).max(0.0), (self.c + alph2 - alph1).min(self.c))
        } else {
            ((alph1 + alph2 - self.c).max(0.0), (alph1 + alph2).min(self.c))
        };
        if lo >= hi {
            return false;
        }
        let (k11, k12, k22) = (self.k(i1, i1), self.k(i1, i2), self.k(i2, i2));
        let eta = k11 + k22 - 2.0 * k12;
        let a2 = if eta > 0.0 {
            (alph2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // Flat direction: the dual is linear along the constraint
            // line, so compare its value at both ends.
            let obj = |a2c: f64| {
                let a1c = alph1 + s * (alph2 - a2c);
                let v1 = self.f[i1] - alph1 * y1 * k11 - alph2 * y2 * k12;
                let v2 = self.f[i2] - alph1 * y1 * k12 - alph2 * y2 * k22;
                a1c + a2c
                    - 0.5 * k11 * a1c * a1c
                    - 0.5 * k22 * a2c * a2c
                    - s * k12 * a1c * a2c
                    - y1 * a1c * v1
                    - y2 * a2c * v2
            };
            let (lobj, hobj) = (obj(lo), obj(hi));
            if lobj > hobj + EPS {
                lo
            } else if hobj > lobj + EPS {
                hi
            } else {
                alph2
            }
        };
        // Snap to the box first, then derive a1 from the snapped value so
        // the equality constraint is conserved exactly.
        let a2 = if a2 < BOUND_EPS * self.c {
            0.0
        } else if a2 > (1.0 - BOUND_EPS) * self.c {
            self.c
        } else {
            a2
        };
        if (a2 - alph2).abs() < EPS * (a2 + alph2 + EPS) {
            return false;
        }
        let a1 = (alph1 + s * (alph2 - a2)).clamp(0.0, self.c);
        // Threshold update: make the KKT equality hold at whichever of the
        // two touched points stays strictly inside (0, C).
        let d1 = y1 * (a1 - alph1);
        let d2 = y2 * (a2 - alph2);
        let b1 = self.b - e1 - d1 * k11 - d2 * k12;
        let b2 = self.b - e2 - d1 * k12 - d2 * k22;
        self.b = if a1 > 0.0 && a1 < self.c {
            b1
        } else if a2 > 0.0 && a2 < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        for i in 0..self.n {
            self.f[i] += d1 * self.k(i1, i) + d2 * self.k(i2, i);
        }
        self.alpha[i1] = a1;
        self.alpha[i2] = a2;
        true
    }

    /// Extracts the support vectors and recomputes the bias by the
    /// documented deterministic rule.
    fn finish(&self, data: &TrainSet) -> SvmModel {
        let mut support_vectors = Vec::new();
        let mut alphas = Vec::new();
        let mut sv_labels = Vec::new();
        for i in 0..self.n {
            if self.alpha[i] > 0.0 {
                support_vectors.push(data.samples()[i].clone());
                alphas.push(self.alpha[i]);
                sv_labels.push(self.y[i]);
            }
        }
        let bias = self.final_bias();
        SvmModel {
            support_vectors,
            alphas,
            sv_labels,
            bias,
            c: self.c,
            feature_len: data.dim(),
        }
    }

    fn final_bias(&self) -> f64 {
        // "Free" needs daylight from both bounds: the KKT equality
        // y_i = f_i + b holds only strictly inside the box.
        let margin = BOUND_EPS * self.c;
        let free: Vec<usize> = (0..self.n)
            .filter(|&i| self.alpha[i] > margin && self.alpha[i] < self.c - margin)
            .collect();
        if !free.is_empty() {
            let sum: f64 = free.iter().map(|&i| self.y[i] - self.f[i]).sum();
            return sum / free.len() as f64;
        }
        // Every alpha at a bound: any bias inside the feasible KKT
        // interval is optimal; take the midpoint.
        let mut b_lo = f64::NEG_INFINITY;
        let mut b_hi = f64::INFINITY;
        for i in 0..self.n {
            let bound = self.y[i] - self.f[i];
            let at_zero = self.alpha[i] <= margin;
            if (self.y[i] > 0.0) == at_zero {
                // y=+1 with alpha=0, or y=-1 with alpha=C: margin >= 1
                // constrains the bias from below.
                b_lo = b_lo.max(bound);
            } else {
                b_hi = b_hi.min(bound);
            }
        }
        match (b_lo.is_finite(), b_hi.is_finite()) {
            (true, true) => (b_lo + b_hi) / 2.0,
            (true, false) => b_lo,
            (false, true) => b_hi,
            (false, false) => 0.0,
        }
    }
}

/// Dual objective value of a model's alphas on its own training set; used
/// by tests to compare against reference optimizers.
pub fn dual_objective(data: &TrainSet, alphas: &[f64]) -> f64 {
    let n = data.len();
    assert_eq!(alphas.len(), n, "one alpha per training sample");
    let mut sum = 0.0;
    for i in 0..n {
        sum += alphas[i];
        for j in 0..n {
            sum -= 0.5
                * alphas[i]
                * alphas[j]
                * data.labels()[i]
                * data.labels()[j]
                * kernel_unchecked(&data.samples()[i], &data.samples()[j]);
        }
    }
    sum
}

impl SvmModel {
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn sv_labels(&self) -> &[f64] {
        &self.sv_labels
    }

    pub fn support_vectors(&self) -> &[Vec<f64>] {
        &self.support_vectors
    }
}

/// 5-fold cross-validation over a C grid; returns (C, mean accuracy) rows
/// in grid order plus the best C (ties go to the smaller C).
pub fn tune(
    data: &TrainSet,
    c_grid: &[f64],
    folds: usize,
    tol: f64,
    seed: u64,
) -> Result<(Vec<(f64, f64)>, f64), SvmError> {
    if folds < 2 || folds > data.len() {
        return Err(SvmError::BadHyperparameter(format!(
            "folds = {folds} for {} samples",
            data.len()
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng);
    let mut rows = Vec::with_capacity(c_grid.len());
    for &c in c_grid {
        let mut correct = 0usize;
        let mut total = 0usize;
        for fold in 0..folds {
            let test: Vec<usize> = order
                .iter()
                .copied()
                .skip(fold)
                .step_by(folds)
                .collect();
            let train_idx: Vec<usize> = order
                .iter()
                .copied()
                .filter(|i| !test.contains(i))
                .collect();
            let model = train_with(
                &data.subset(&train_idx)?,
                &SvmParams {
                    c,
                    tol,
                    seed,
                    ..SvmParams::default()
                },
            )?;
            for &i in &test {
                let predicted = model.decision(&data.samples()[i])? >= 0.0;
                if predicted == (data.labels()[i] > 0.0) {
                    correct += 1;
                }
                total += 1;
            }
        }
        rows.push((c, correct as f64 / total as f64));
    }
    let best_accuracy = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let best = rows
        .iter()
        .filter(|r| r.1 == best_accuracy)
        .map(|r| r.0)
        .fold(f64::INFINITY, f64::min);
    Ok((rows, best))
}

const MODEL_HEADER: &str = "WEARSCOPE-SVM v1";

/// Writes the model as line-oriented plain text with hexfloat values, so
/// loading reproduces every f64 bit for bit. Rejects models without
/// support vectors or with non-finite numbers.
pub fn save_model(model: &SvmModel, path: impl AsRef<Path>) -> Result<(), SvmError> {
    let path = path.as_ref();
    if model.support_vectors.is_empty() {
        return Err(SvmError::EmptyModel);
    }
    let mut out = String::new();
    out.push_str(MODEL_HEADER);
    out.push('\n');
    out.push_str(&format!("C {}\n", format_hexfloat(model.c)));
    out.push_str(&format!("bias {}\n", format_hexfloat(model.bias)));
    out.push_str(&format!("feature_len {}\n", model.feature_len));
    out.push_str(&format!("n_sv {}\n", model.support_vectors.len()));
    for ((sv, &a), &y) in model
        .support_vectors
        .iter()
        .zip(&model.alphas)
        .zip(&model.sv_labels)
    {
        out.push_str(&format_hexfloat(a));
        out.push('\t');
        out.push_str(if y > 0.0 { "+1" } else { "-1" });
        out.push('\t');
        for (i, v) in sv.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&format_hexfloat(*v));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| SvmError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SvmModel, SvmError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SvmError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let corrupt = |detail: String| SvmError::Corrupt {
        path: path.to_path_buf(),
        detail,
    };
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != MODEL_HEADER {
        return Err(SvmError::VersionMismatch {
            path: path.to_path_buf(),
            found: header.to_string(),
        });
    }
    let mut keyed = |key: &str| -> Result<String, SvmError> {
        let line = lines
            .next()
            .ok_or_else(|| corrupt(format!("missing `{key}` line")))?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| corrupt(format!("expected `{key} ...`, found {line:?}")))
    };
    let c = parse_hexfloat(&keyed("C")?).ok_or_else(|| corrupt("bad C value".into()))?;
    let bias = parse_hexfloat(&keyed("bias")?).ok_or_else(|| corrupt("bad bias value".into()))?;
    let feature_len: usize = keyed("feature_len")?
        .parse()
        .map_err(|_| corrupt("bad feature_len".into()))?;
    let n_sv: usize = keyed("n_sv")?
        .parse()
        .map_err(|_| corrupt("bad n_sv".into()))?;
    if n_sv == 0 {
        return Err(SvmError::EmptyModel);
    }
    let mut support_vectors = Vec::with_capacity(n_sv);
    let mut alphas = Vec::with_capacity(n_sv);
    let mut sv_labels = Vec::with_capacity(n_sv);
    for row in 0..n_sv {
        let line = lines
            .next()
            .ok_or_else(|| corrupt(format!("truncated: {row} of {n_sv} support vectors")))?;
        let mut fields = line.splitn(3, '\t');
        let alpha = fields
            .next()
            .and_then(parse_hexfloat_str)
            .ok_or_else(|| corrupt(format!("bad alpha on SV {row}")))?;
        let label = match fields.next() {
            Some("+1") => 1.0,
            Some("-1") => -1.0,
            other => return Err(corrupt(format!("bad label {other:?} on SV {row}"))),
        };
        let values: Option<Vec<f64>> = fields
            .next()
            .map(|rest| rest.split(' ').map(parse_hexfloat).collect())
            .unwrap_or(None);
        let values = values.ok_or_else(|| corrupt(format!("bad values on SV {row}")))?;
        if values.len() != feature_len {
            return Err(corrupt(format!(
                "SV {row} has {} values, expected {feature_len}",
                values.len()
            )));
        }
        support_vectors.push(values);
        alphas.push(alpha);
        sv_labels.push(label);
    }
    if lines.next().is_some() {
        return Err(corrupt("trailing data after support vectors".into()));
    }
    Ok(SvmModel {
        support_vectors,
        alphas,
        sv_labels,
        bias,
        c,
        feature_len,
    })
}

fn parse_hexfloat_str(s: &str) -> Option<f64> {
    parse_hexfloat(s)
}

/// C-style `%a` formatting: `[-]0x1.<frac>p<exp>` for normal numbers,
/// `[-]0x0.<frac>p-1022` for subnormals, `[-]0x0p+0` for zero. Exact by
/// construction. Panics on non-finite input.
pub fn format_hexfloat(v: f64) -> String {
    assert!(v.is_finite(), "cannot serialize {v}");
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 {
        ('0', -1022)
    } else {
        ('1', exp_bits - 1023)
    };
    let mut digits = format!("{frac:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp:+}")
    }
}

/// Parses the subset of hexfloat syntax that [`format_hexfloat`] emits
/// (plus arbitrary digit counts). Returns None on malformed input.
pub fn parse_hexfloat(s: &str) -> Option<f64> {
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, s),
    };
    let rest = rest.strip_prefix("0x")?;
    let p = rest.find(['p', 'P'])?;
    let (mantissa_text, exp_text) = (&rest[..p], &rest[p + 1..]);
    let exp: i32 = exp_text.parse().ok()?;
    let (int_text, frac_text) = match mantissa_text.find('.') {
        Some(dot) => (&mantissa_text[..dot], &mantissa_text[dot + 1..]),
        None => (mantissa_text, ""),
    };
    if int_text.is_empty() || int_text.len() + frac_text.len() > 16 {
        return None;
    }
    let mut mantissa = 0u64;
    for ch in int_text.chars().chain(frac_text.chars()) {
        mantissa = mantissa.checked_mul(16)? + ch.to_digit(16)? as u64;
    }
    let scale = exp - 4 * frac_text.len() as i32;
    Some(sign * ldexp(mantissa as f64, scale))
}

/// `x * 2^e` built from exact power-of-two multiplications; chunked so the
/// intermediate factors never overflow to infinity.
fn ldexp(mut x: f64, mut e: i32) -> f64 {
    const TWO_POW_512: f64 = f64::from_bits(0x5ff0000000000000);
    const TWO_POW_NEG_512: f64 = f64::from_bits(0x1ff0000000000000);
    while e > 511 {
        x *= TWO_POW_512;
        e -= 512;
    }
    while e < -511 {
        x *= TWO_POW_NEG_512;
        e += 512;
    }
    x * f64::from_bits(((1023 + e) as u64) << 52)
}
