//! Sequential vs parallel execution of the data-parallel hot spots.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use oda_core::data::{gen_gaussians, stream, Dataset, FeatureShape, OrderPolicy};
use oda_core::metrics::eval_accuracy_with;
use oda_core::mrtree::{OdaTree, TreeConfig};
use oda_core::oda::{run_oda, ParamOverrides};
use oda_core::par::Exec;
use oda_core::wavelet::resolution_stack;

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

/// Ten noisy 16x16 "digits", one Gaussian cluster per class.
fn images(n_per_class: usize) -> Dataset {
    let centers: Vec<Vec<f64>> = (0..10)
        .map(|c| (0..256).map(|j| if (j * 7 + c * 13) % 10 < 3 { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut d = gen_gaussians(5, n_per_class, &centers, 0.3).unwrap();
    d.shape = FeatureShape::Image { rows: 16, cols: 16 };
    d
}

fn batch_eval(c: &mut Criterion) {
    let d = images(300);
    let o = ParamOverrides { k_max: Some(64), t_min_ratio: Some(0.01), ..Default::default() };
    let model = run_oda(&mut stream(&d, 1, OrderPolicy::default()).unwrap(), &o).unwrap();
    let mut g = c.benchmark_group("batch_eval");
    for (name, exec) in STRATEGIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| eval_accuracy_with(&model, &d, e).unwrap())
        });
    }
    g.finish();
}

fn pyramids(c: &mut Criterion) {
    let d = images(200);
    let mut g = c.benchmark_group("pyramids");
    for (name, exec) in STRATEGIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| e.map(&d.samples, |x| resolution_stack(x, d.shape, 2).unwrap()))
        });
    }
    g.finish();
}

fn tree_batches(c: &mut Criterion) {
    let d = images(200);
    let config = TreeConfig {
        max_depth: 2,
        layers: Some(2),
        depth_params: vec![
            ParamOverrides { k_max: Some(16), ..Default::default() },
            ParamOverrides { k_max: Some(8), ..Default::default() },
        ],
        seed: 3,
        ..Default::default()
    };
    let mut g = c.benchmark_group("tree_training");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| {
                let mut tree = OdaTree::new(config.clone(), d.shape, true).unwrap();
                let mut st = stream(&d, 3, OrderPolicy::default()).unwrap();
                tree.train(&mut st, 200_000, 256, e).unwrap();
                tree.samples_seen
            })
        });
    }
    g.finish();
}

criterion_group!(benches, batch_eval, pyramids, tree_batches);
criterion_main!(benches);
