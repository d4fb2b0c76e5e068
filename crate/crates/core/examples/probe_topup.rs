use qsched_core::circuits::{build_benchmark, standard_set};
use qsched_core::fleet::{generate_synthetic_fleet, FleetSpec};
use qsched_core::noise::analytic_pos;
use qsched_core::transpiler::compile_with_snapshot;

fn main() {
    let fleet = generate_synthetic_fleet(&FleetSpec::default()).unwrap();
    for (b, p) in standard_set() {
        let c = build_benchmark(b, &p).unwrap();
        let mut per_machine: Vec<(String, usize, f64)> = Vec::new();
        for m in &fleet {
            if m.n_qubits < c.width {
                continue;
            }
            let s = &m.snapshots[0];
            let (cc, _) = compile_with_snapshot(&c, m, s).unwrap();
            per_machine.push((m.id.clone(), m.n_qubits, analytic_pos(&cc, s).pos));
        }
        per_machine.sort_by(|a, b| b.2.total_cmp(&a.2));
        let top: Vec<String> = per_machine
            .iter()
            .take(8)
            .map(|(id, n, pos)| format!("{id}({n}q)={pos:.3}"))
            .collect();
        let mean: f64 =
            per_machine.iter().map(|x| x.2).sum::<f64>() / per_machine.len() as f64;
        println!(
            "{:20} feasible {:2} mean {:.3} | top: {}",
            c.name,
            per_machine.len(),
            mean,
            top.join(" ")
        );
    }
}
