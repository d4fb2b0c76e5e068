use qsched_core::circuits::{build_benchmark, standard_set};
use qsched_core::fleet::{generate_synthetic_fleet, FleetSpec};
use qsched_core::noise::analytic_pos;
use qsched_core::predict::{
    fit_product_linear, generate_timing_dataset, pearson, FitOptions, JobRuntimeFeatures,
    TimingDataSpec,
};
use qsched_core::sim::{compare_policies, LoadKind, LoadProfile, Scenario};
use qsched_core::transpiler::{compile_with_snapshot, FeatureVector};

fn main() {
    let t0 = std::time::Instant::now();
    let spec = FleetSpec::default();
    let fleet = generate_synthetic_fleet(&spec).unwrap();
    let sizes: Vec<usize> = fleet.iter().map(|m| m.n_qubits).collect();
    println!("fleet sizes: {sizes:?}");

    // fidelity dataset: every benchmark x machine x cycle
    let set = standard_set();
    let mut samples: Vec<(Vec<f64>, f64)> = Vec::new();
    for (b, p) in &set {
        let c = build_benchmark(*b, p).unwrap();
        for m in &fleet {
            if m.n_qubits < c.width {
                continue;
            }
            for s in &m.snapshots {
                let (cc, fv) = compile_with_snapshot(&c, m, s).unwrap();
                samples.push((fv.as_array().to_vec(), analytic_pos(&cc, s).pos));
            }
        }
    }
    println!("fidelity samples: {} ({:?})", samples.len(), t0.elapsed());

    let names: Vec<&str> = FeatureVector::NAMES.to_vec();
    let report = fit_product_linear(&samples, &names, &FitOptions::default()).unwrap();
    println!(
        "fidelity fit: train {:.4} test {:.4}",
        report.train_pearson, report.test_pearson
    );
    let targets: Vec<f64> = samples.iter().map(|s| s.1).collect();
    for (i, name) in names.iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s.0[i]).collect();
        let r = pearson(&xs, &targets).unwrap();
        println!("  feature {name}: r = {r:+.4} (|r| = {:.4})", r.abs());
    }
    let mean_pos = targets.iter().sum::<f64>() / targets.len() as f64;
    let min_pos = targets.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_pos = targets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("pos spread: mean {mean_pos:.3} min {min_pos:.3} max {max_pos:.3}");

    // runtime dataset
    let rows = generate_timing_dataset(&fleet, &TimingDataSpec::default());
    let rt_samples: Vec<(Vec<f64>, f64)> = rows
        .iter()
        .map(|r| (r.features.as_array().to_vec(), r.observed))
        .collect();
    let rt_names: Vec<&str> = JobRuntimeFeatures::NAMES.to_vec();
    let rt = fit_product_linear(&rt_samples, &rt_names, &FitOptions::default()).unwrap();
    println!("runtime fit: train {:.4} test {:.4}", rt.train_pearson, rt.test_pearson);
    let mut worst: Vec<(String, f64)> = Vec::new();
    for m in &fleet {
        let (mut preds, mut obs) = (Vec::new(), Vec::new());
        for r in rows.iter().filter(|r| r.machine_id == m.id) {
            preds.push(rt.model.predict(&r.features.as_array()).unwrap());
            obs.push(r.observed);
        }
        worst.push((m.id.clone(), pearson(&preds, &obs).unwrap()));
    }
    worst.sort_by(|a, b| a.1.total_cmp(&b.1));
    println!("worst per-machine runtime pearson: {:?}", &worst[..3]);

    // policy comparison at each load
    let fid_model = report.model.clone();
    let rt_model = rt.model.clone();
    for kind in [LoadKind::Low, LoadKind::High, LoadKind::Random] {
        let mut agg: std::collections::BTreeMap<String, (f64, f64)> = Default::default();
        for seed in 0..5u64 {
            eprintln!("load {kind:?} seed {seed}...");
            let scenario = Scenario {
                load: LoadProfile {
                    kind,
                    max_queue: 86_400.0,
                    filler_seed: 100 + seed,
                },
                benchmark_seed: 200 + seed,
                arrival_seed: 300 + seed,
                noise_seed: 400 + seed,
                ..Scenario::default()
            };
            let rep = compare_policies(&fleet, &fid_model, &rt_model, &scenario).unwrap();
            for (k, a) in &rep.per_policy {
                let e = agg.entry(k.clone()).or_insert((0.0, 0.0));
                e.0 += a.mean_pos / 5.0;
                e.1 += a.mean_wait / 5.0;
            }
        }
        println!("--- load {kind:?} (5-seed means)");
        for (k, (pos, wait)) in &agg {
            println!("  {k:10} pos {pos:.4} wait {wait:9.1}");
        }
        let p = agg["proposed"];
        let f = agg["only_fid"];
        let w = agg["only_wt"];
        println!(
            "  fid p/f {:.3}  fid p/w {:.3}  wait f/p {:.2}  wait p/w {:.3}",
            p.0 / f.0,
            p.0 / w.0,
            f.1 / p.1.max(1e-9),
            p.1 / w.1.max(1e-9)
        );
    }
    println!("total {:?}", t0.elapsed());
}
