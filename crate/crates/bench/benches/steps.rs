use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use imstep::harness::build_method;
use imstep::problems::{make_problem, Params};
use imstep::stability::{composed_magnitude, scan_region, Region};
use imstep::ButcherTableau;

fn single_steps(c: &mut Criterion) {
    let cubic = make_problem("cubic", &Params::new()).unwrap();
    let lv = make_problem("lotkaVolterra", &Params::new()).unwrap();
    let mut group = c.benchmark_group("step");
    for scheme in ["rk4", "composed-rk4", "dop5", "composed-grk2", "bpl5"] {
        let method = build_method(scheme, false).unwrap();
        group.bench_function(format!("{scheme}/cubic"), |b| {
            b.iter(|| method.step(cubic.system(), 0.0, black_box(&cubic.y0), black_box(0.05)).unwrap())
        });
        group.bench_function(format!("{scheme}/lotkaVolterra"), |b| {
            b.iter(|| method.step(lv.system(), 0.0, black_box(&lv.y0), black_box(0.05)).unwrap())
        });
    }
    group.finish();
}

fn stability_scan(c: &mut Criterion) {
    let tab = ButcherTableau::by_name("rk4", None).unwrap();
    let region = Region { xmin: -5.0, xmax: 1.0, ymin: -4.0, ymax: 4.0 };
    c.bench_function("stability/composed-rk4/101x101", |b| {
        b.iter(|| scan_region(composed_magnitude(&tab).unwrap(), black_box(region), 101, 101).unwrap())
    });
}

criterion_group!(benches, single_steps, stability_scan);
criterion_main!(benches);
