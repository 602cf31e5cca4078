mod common;

use common::load_fixtures;
use nml_core::kernels::partial_select_k;
use nml_core::perf::{amdahl, emit_report, measure, sort_advisor, RunReport, SortStrategy, Workload};
use nml_core::{Backend, ClusterConfig, Mode};

#[test]
fn every_fixture_scales_within_amdahl_bound() {
    for f in load_fixtures() {
        let w = Workload::new(&f.model, &f.data);
        let mut last = 0.0;
        for n in [1, 2, 4, 8] {
            let m = measure(&w, &ClusterConfig::new(n).unwrap(), Mode::Emulated).unwrap();
            let r = &m.report;
            assert_eq!(m.seq_labels, m.par_labels, "{} at {n}", f.name);
            assert!(r.achieved <= r.theoretical, "{} at {n}: {} > {}", f.name, r.achieved, r.theoretical);
            assert!(r.theoretical <= n as f64);
            assert_eq!(r.theoretical, amdahl(r.parallel_fraction, n as u32).unwrap());
            assert!(r.achieved > last, "{}: no gain going to {n} cores", f.name);
            assert_eq!(r.per_worker_ops.len(), n);
            // Work is conserved or grows: merges and reductions only add ops.
            let par_total: u64 = r.per_worker_ops.iter().map(|c| c.total()).sum::<u64>() + r.serial_ops.total();
            assert!(par_total >= r.seq_ops.total(), "{} at {n}", f.name);
            last = r.achieved;
        }
    }
}

#[test]
fn single_core_is_exactly_sequential() {
    for f in load_fixtures() {
        let m = measure(&Workload::new(&f.model, &f.data), &ClusterConfig::new(1).unwrap(), Mode::Native).unwrap();
        assert_eq!(m.report.achieved, 1.0, "{}", f.name);
        assert_eq!(m.report.per_worker_ops[0].total() + m.report.serial_ops.total(), m.report.seq_ops.total());
    }
}

#[test]
fn counts_do_not_depend_on_backend_mode() {
    for f in load_fixtures() {
        let w = Workload::new(&f.model, &f.data);
        let cfg = ClusterConfig::new(4).unwrap();
        let a = measure(&w, &cfg, Mode::Native).unwrap();
        let b = measure(&w, &cfg, Mode::Emulated).unwrap();
        assert_eq!(a, b, "{}", f.name);
    }
}

#[test]
fn tree_walks_are_less_float_heavy_than_distances() {
    let fixtures = load_fixtures();
    let intensity = |name: &str| {
        let f = fixtures.iter().find(|f| f.name == name).unwrap();
        let m = measure(&Workload::new(&f.model, &f.data), &ClusterConfig::new(8).unwrap(), Mode::Emulated).unwrap();
        m.report.flop_intensity
    };
    let (rf, knn, lr) = (intensity("rf_digits"), intensity("knn_asd"), intensity("lr_digits"));
    assert!(rf < knn, "rf {rf} vs knn {knn}");
    assert!(rf < lr, "rf {rf} vs lr {lr}");
    assert!((0.0..=100.0).contains(&rf));
}

/// The advisor's selection estimate bounds the comparisons a local
/// selection actually performs.
#[test]
fn selection_comparisons_within_advisor_estimate() {
    let n = 1000;
    let dists: Vec<f32> = (0..n).map(|i| ((i * 7919) % 1009) as f32).collect();
    for k in 1..=12 {
        let mut d = dists.clone();
        let mut ids: Vec<u32> = (0..n as u32).collect();
        let cmp = partial_select_k(&mut d, &mut ids, k, &mut Backend::native()).unwrap();
        let advice = sort_advisor(n as u64, 1, k as u64).unwrap();
        assert!(cmp as f64 <= advice.ss_cost, "k={k}: {cmp} > {}", advice.ss_cost);
        if advice.choice == SortStrategy::SS {
            assert!(k <= 9);
        }
    }
}

#[test]
fn report_for_fixture_run_round_trips() {
    let f = common::fixture("gnb_digits");
    let m = measure(&Workload::new(&f.model, &f.data), &ClusterConfig::new(8).unwrap(), Mode::Emulated).unwrap();
    let labels = m.par_labels.clone();
    let r = RunReport::new("gnb", (f.data.n_samples(), f.data.d(), f.model.n_class()), Mode::Emulated, m);
    let json = emit_report(std::slice::from_ref(&r));
    let back: Vec<RunReport> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, vec![r]);
    assert_eq!(back[0].labels, labels);
    assert!(back[0].labels_match);
    assert_eq!(emit_report(&[]), "[]\n");
}
