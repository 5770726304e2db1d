//! Panel and search throughput: the library's fan-out entry points (rayon
//! under the default `parallel` feature) against like-for-like sequential
//! baselines built from the single-shot public API.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qmt_core::instruments::luders_instrument;
use qmt_core::linop::HermitianMatrix;
use qmt_core::measproc::{
    induced_instrument, ozawa_dilation, thermo_construction, MeasurementProcess,
};
use qmt_core::qobjects::{random, Effect, Observable, State};
use qmt_core::thermo::{
    glo_of_instrument, panel_state, search_negative_glo, second_law_audit, second_law_panel,
};

const PANEL_STATES: usize = 50;
const SEARCH_TRIALS: usize = 200;
const SEED: u64 = 2024;

fn bench_process() -> MeasurementProcess {
    let obs = random::povm(3, 3, 11).unwrap();
    let us: Vec<_> = (0..3)
        .map(|i| random::unitary(3, 20 + i).unwrap())
        .collect();
    let xi = random::full_rank_state(3, 31).unwrap();
    thermo_construction(&obs, &us, &xi).unwrap()
}

fn nogo_instrument() -> qmt_core::instruments::Instrument {
    let e0 = Effect::new(HermitianMatrix::from_diagonal(&[0.7, 0.3]).unwrap()).unwrap();
    let e1 = Effect::new(HermitianMatrix::from_diagonal(&[0.3, 0.7]).unwrap()).unwrap();
    let obs = Observable::with_default_labels(vec![e0, e1]).unwrap();
    let proc = ozawa_dilation(&luders_instrument(&obs).unwrap()).unwrap();
    let mm = State::maximally_mixed(proc.app_dim()).unwrap();
    let xi = State::mix(&[(0.95, proc.xi()), (0.05, &mm)]).unwrap();
    let smoothed = MeasurementProcess::new(
        proc.sys_dim(),
        xi,
        proc.premeasurement().clone(),
        proc.objectification().clone(),
    )
    .unwrap();
    induced_instrument(&smoothed).unwrap()
}

fn bench_second_law_panel(c: &mut Criterion) {
    let proc = bench_process();
    let mut group = c.benchmark_group("second_law_panel");
    group.sample_size(10);

    group.bench_function("fanout", |b| {
        b.iter(|| black_box(second_law_panel(&proc, PANEL_STATES, SEED).unwrap()))
    });

    group.bench_function("sequential", |b| {
        b.iter(|| {
            let mut min_slack = f64::INFINITY;
            for trial in 0..PANEL_STATES {
                let rho = panel_state(proc.sys_dim(), trial, SEED).unwrap();
                let report = second_law_audit(&proc, &rho, None).unwrap();
                min_slack = min_slack.min(report.delta_s_total);
            }
            black_box(min_slack)
        })
    });

    group.finish();
}

fn bench_negative_glo_search(c: &mut Criterion) {
    let inst = nogo_instrument();
    let mut group = c.benchmark_group("negative_glo_search");
    group.sample_size(10);

    group.bench_function("fanout", |b| {
        b.iter(|| black_box(search_negative_glo(&inst, SEARCH_TRIALS, SEED).unwrap()))
    });

    group.bench_function("sequential", |b| {
        b.iter(|| {
            let mut best = f64::INFINITY;
            for trial in 0..SEARCH_TRIALS {
                let rho = panel_state(inst.in_dim(), trial, SEED).unwrap();
                best = best.min(glo_of_instrument(&inst, &rho).unwrap());
            }
            black_box(best)
        })
    });

    group.finish();
}

criterion_group!(panels, bench_second_law_panel, bench_negative_glo_search);
criterion_main!(panels);
