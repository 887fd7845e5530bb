//! Descriptor throughput on a 64x64 patch, the unit of work behind both
//! featurize and assess.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use wearscope_bench::worn_patch;
use wearscope_core::texture::{lbp_code, NeighborhoodSpec};
use wearscope_core::{DescriptorKind, MappingKind};

fn descriptor_menu(c: &mut Criterion) {
    let patch = worn_patch(64, 7);
    let mut group = c.benchmark_group("descriptor_64px");
    for kind in DescriptorKind::ALL {
        group.bench_function(kind.canonical_name(), |b| {
            b.iter(|| {
                kind.compute(black_box(&patch), MappingKind::Riu2)
                    .expect("patch fits")
            })
        });
    }
    group.finish();
}

fn mappings(c: &mut Criterion) {
    let patch = worn_patch(64, 7);
    let mut group = c.benchmark_group("lbp16_mapping");
    for mapping in [MappingKind::Raw, MappingKind::RotationInvariant, MappingKind::Riu2] {
        group.bench_function(mapping.as_str(), |b| {
            b.iter(|| {
                DescriptorKind::Lbp16
                    .compute(black_box(&patch), mapping)
                    .expect("patch fits")
            })
        });
    }
    group.finish();
}

fn single_code(c: &mut Criterion) {
    let patch = worn_patch(64, 7);
    c.bench_function("lbp_code_p16r2", |b| {
        b.iter(|| lbp_code(black_box(&patch), 32, 32, NeighborhoodSpec::P16R2))
    });
}

criterion_group!(benches, descriptor_menu, mappings, single_code);
criterion_main!(benches);
