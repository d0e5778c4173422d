//! Seed sweep over the built-in benchmarks (development tool).

use collonet_core::optim::{two_phase_train, TrainConfig};
use collonet_core::problems::{accuracy_report, catalog};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seeds: Vec<u64> = if args.len() > 1 {
        args[1..].iter().map(|s| s.parse().unwrap()).collect()
    } else {
        vec![0, 1, 2, 3, 4]
    };
    for case in catalog() {
        for &seed in &seeds {
            let config = TrainConfig { seed, max_iters_synergy: std::env::var("SYN_ITERS").ok().and_then(|v| v.parse().ok()).unwrap_or(200), ..TrainConfig::default() };
            let t0 = std::time::Instant::now();
            match two_phase_train(case.spec(), case.hidden_count(), &config) {
                Ok((solution, report)) => {
                    let k = case.spec().interior().len() as f64;
                    let grid = case.evaluation_grid(50);
                    let acc = accuracy_report(&solution, &case, &grid).unwrap();
                    let bc = solution.max_boundary_mismatch().unwrap();
                    println!(
                        "{} seed={} p1_final={:.3e} p1_int={:.3e} p2_init={:.3e} p2_final={:.3e} msr={:.3e} grid_max={:.3e} bc={:.3e} iters={}+{} t={:.1}s",
                        case.id(),
                        seed,
                        report.penalty.final_error,
                        report.penalty_interior_error,
                        report.synergy.initial_error,
                        report.synergy.final_error,
                        report.synergy.final_error / k,
                        acc.max,
                        bc,
                        report.penalty.iterations,
                        report.synergy.iterations,
                        t0.elapsed().as_secs_f64(),
                    );
                }
                Err(e) => println!("{} seed={} FAILED: {e}", case.id(), seed),
            }
        }
    }
}
