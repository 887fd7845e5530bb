//! Whole-pipeline stages: one insert assessment (the production budget)
//! and one cutting-edge extraction.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use wearscope_bench::{trained_model, worn_edge};
use wearscope_core::edgefinder::{crop_cutting_edge, CropConfig};
use wearscope_core::patching::layout_for;
use wearscope_core::synth::insert_mock;
use wearscope_core::wearcheck::assess_edge;
use wearscope_core::{DescriptorKind, LayoutName, LayoutParams, MappingKind};

fn assess_one_insert(c: &mut Criterion) {
    let model = trained_model(20, DescriptorKind::Lbp8Lbp16, MappingKind::Riu2);
    let layout = layout_for(LayoutName::Sed, LayoutParams::default()).expect("defaults valid");
    let edge = worn_edge(128, 512, 3);
    let mut group = c.benchmark_group("assess");
    group.sample_size(20);
    group.bench_function("sed_lbp8lbp16_128x512", |b| {
        b.iter(|| {
            assess_edge(
                "bench-edge",
                black_box(&edge),
                &layout,
                &model,
                DescriptorKind::Lbp8Lbp16,
                MappingKind::Riu2,
                1,
                false,
            )
            .expect("threshold fits layout")
        })
    });
    group.finish();
}

fn extract_one_insert(c: &mut Criterion) {
    let head = insert_mock(90);
    let config = CropConfig::default();
    let mut group = c.benchmark_group("extract");
    group.sample_size(20);
    group.bench_function("crop_cutting_edge_256px", |b| {
        b.iter(|| crop_cutting_edge(black_box(&head), &config).expect("mock has an edge"))
    });
    group.finish();
}

criterion_group!(benches, assess_one_insert, extract_one_insert);
criterion_main!(benches);
