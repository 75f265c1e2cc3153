//! Criterion benchmarks for the individual filters, the Canny detector,
//! the SSIM metric, and the end-to-end pipeline.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use speed_bench::{sample_edges, sample_gray, sample_image};
use speed_core::canny::{canny_detect, CannyParams};
use speed_core::eval::ssim_map;
use speed_core::filters::{
    anisotropic_diffusion, conditional_contrast_normalization, conditional_gaussian_blur,
    fuzzy_histogram_hyperbolization, gaussian_blur, median_blur, white_balance,
    ConditionalTriggerParams, DiffusionParams,
};
use speed_core::pipeline::{run_pipeline, PipelineConfig};
use std::hint::black_box;

fn bench_filters(c: &mut Criterion) {
    let mut group = c.benchmark_group("filters");
    let size = 512;
    group.throughput(Throughput::Elements((size * size) as u64));

    let color = sample_image(size);
    let gray = sample_gray(size);
    let diffusion = DiffusionParams::default();
    let triggers = ConditionalTriggerParams::default();

    group.bench_function("white_balance", |b| b.iter(|| white_balance(black_box(&color))));
    group.bench_function("anisotropic_diffusion", |b| {
        b.iter(|| anisotropic_diffusion(black_box(&gray), &diffusion).unwrap())
    });
    group.bench_function("contrast_normalization", |b| {
        b.iter(|| conditional_contrast_normalization(black_box(&gray), &triggers, true))
    });
    group.bench_function("fuzzy_hyperbolization", |b| {
        b.iter(|| fuzzy_histogram_hyperbolization(black_box(&gray), 256))
    });
    group.bench_function("median_blur", |b| b.iter(|| median_blur(black_box(&gray))));
    group.bench_function("gaussian_blur", |b| b.iter(|| gaussian_blur(black_box(&gray))));
    group.bench_function("conditional_blur", |b| {
        b.iter(|| conditional_gaussian_blur(black_box(&gray), &triggers, true))
    });
    group.finish();
}

fn bench_canny(c: &mut Criterion) {
    let mut group = c.benchmark_group("canny");
    for size in [256usize, 512, 1024] {
        let gray = sample_gray(size);
        group.throughput(Throughput::Elements((size * size) as u64));
        group.bench_with_input(BenchmarkId::new("otsu", size), &gray, |b, img| {
            b.iter(|| canny_detect(black_box(img), &CannyParams::default()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fixed", size), &gray, |b, img| {
            b.iter(|| canny_detect(black_box(img), &CannyParams::fixed(0.04, 0.12)).unwrap())
        });
    }
    group.finish();
}

fn bench_ssim(c: &mut Criterion) {
    let mut group = c.benchmark_group("ssim");
    for size in [256usize, 512] {
        let g = sample_edges(size, 0.1);
        let d = sample_edges(size, 0.12);
        group.throughput(Throughput::Elements((size * size) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(size), &(g, d), |b, (g, d)| {
            b.iter(|| ssim_map(black_box(g), black_box(d)).unwrap())
        });
    }
    group.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    let cfg = PipelineConfig::default();
    for size in [256usize, 512, 1024] {
        let img = sample_image(size);
        group.throughput(Throughput::Elements((size * size) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(size), &img, |b, img| {
            b.iter(|| run_pipeline(black_box(img), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_filters, bench_canny, bench_ssim, bench_pipeline);
criterion_main!(benches);
