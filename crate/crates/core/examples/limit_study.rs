//! eps -> 0 along two schedules n(eps): only the one with eps^{n/2} -> 0
//! approaches the bi-harmonic flow.

use simfilm::homotopy::{
    default_initial_data, limit_study, schedule_log_squared, schedule_sqrt_log, PdeConfig,
};

fn main() -> simfilm::Result<()> {
    let base = PdeConfig::default();
    let u0 = default_initial_data(&base)?;
    let eps = [1e-1, 1e-2, 1e-3];
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    for (name, sched) in [
        ("sqrt-log", schedule_sqrt_log(&eps)),
        ("log-squared", schedule_log_squared(&eps)),
    ] {
        let s = limit_study(&sched, &u0, 0.5, &base, jobs)?;
        println!("{name}: decreasing = {}", s.strictly_decreasing);
        for r in &s.rows {
            println!(
                "  eps {:.0e} n {:.4} eps^(n/2) {:.4} distance {:.4}",
                r.eps, r.n, r.eps_pow, r.distance
            );
        }
    }
    Ok(())
}
