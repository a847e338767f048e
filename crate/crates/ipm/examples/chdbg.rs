// Scratch diagnostics for the conserved-flow solver path.
use ipm::experiments::{ch_config, named_initial};
use ipm::{run_ipm, GinzburgLandau1D, StateVector};

fn main() {
    let n = 100;
    let model = GinzburgLandau1D::cahn_hilliard(n, 0.6).unwrap();
    let phi04 = named_initial("phi04", n).unwrap();
    let x0 = StateVector::new(phi04).unwrap();
    let args: Vec<String> = std::env::args().collect();
    let rho: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(100.0);
    let m: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(100);
    let mut cfg = ch_config(rho, m, n);
    cfg.max_outer = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(50);
    let start = std::time::Instant::now();
    let trace = run_ipm(&model, &x0, &cfg).unwrap();
    for rec in trace.records.iter().take(40) {
        println!(
            "t={} e={:.4e} evals={:?} pen={:.3e} elapsed={:.2}s",
            rec.outer,
            rec.error,
            rec.eigenvalues.iter().map(|l| (l * 1e4).round() / 1e4).collect::<Vec<_>>(),
            rec.penalty_distance,
            rec.elapsed_s
        );
    }
    println!(
        "status {:?} cycles {} wrong_index {} guard {} total {:.2}s",
        trace.status,
        trace.outer_cycles(),
        trace.wrong_index,
        trace.guard_events,
        start.elapsed().as_secs_f64()
    );
}
