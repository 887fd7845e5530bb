//! Deterministic fixtures shared by the benchmarks: synthetic patches and
//! edges, plus a small model trained on them, so every run measures the
//! same workload.

use wearscope_core::svm::train_with;
use wearscope_core::synth::{gradient_image, noise_image};
use wearscope_core::{DescriptorKind, GrayImage, MappingKind, SvmModel, SvmParams, TrainSet};

/// Worn-looking texture: seeded noise.
pub fn worn_patch(side: u32, seed: u64) -> GrayImage {
    noise_image(side, side, seed)
}

/// Serviceable-looking texture: a smooth ramp.
pub fn serviceable_patch(side: u32, seed: u64) -> GrayImage {
    let tilt = (seed % 7) as f64;
    gradient_image(side, side, 1.5 + 0.1 * tilt, 0.5, 40.0)
}

/// A full-size cutting-edge image with worn texture.
pub fn worn_edge(width: u32, height: u32, seed: u64) -> GrayImage {
    noise_image(width, height, seed)
}

/// Featurizes `per_class` patches of each class.
pub fn training_set(
    per_class: usize,
    descriptor: DescriptorKind,
    mapping: MappingKind,
) -> TrainSet {
    let mut samples = Vec::with_capacity(2 * per_class);
    let mut labels = Vec::with_capacity(2 * per_class);
    for i in 0..per_class {
        let worn = worn_patch(64, i as u64);
        samples.push(
            descriptor
                .compute(&worn, mapping)
                .expect("64px patches fit every preset")
                .into_values(),
        );
        labels.push(1);
        let fine = serviceable_patch(64, i as u64);
        samples.push(
            descriptor
                .compute(&fine, mapping)
                .expect("64px patches fit every preset")
                .into_values(),
        );
        labels.push(-1);
    }
    TrainSet::new(samples, labels).expect("both classes present")
}

/// Trains on the standard fixture set with default hyperparameters.
pub fn trained_model(
    per_class: usize,
    descriptor: DescriptorKind,
    mapping: MappingKind,
) -> SvmModel {
    train_with(
        &training_set(per_class, descriptor, mapping),
        &SvmParams::default(),
    )
    .expect("separable fixture converges")
}
