//! A regularized run with its conservation and dissipation diagnostics.

use simfilm::homotopy::{default_initial_data, holder_report, run, PdeConfig};

fn main() -> simfilm::Result<()> {
    let cfg = PdeConfig::default().with_mobility(0.05, 0.2);
    let r = run(&cfg, &default_initial_data(&cfg)?)?;
    let c = &r.checks;
    println!("{} steps ({} rejected)", r.steps, r.rejected);
    println!(
        "mass drift {:.2e}, energy balance defect {:.2e}",
        c.mass_drift, c.energy_balance_defect
    );
    println!(
        "energy non-increasing: {}, parabolicity margin {:.3}",
        c.energy_non_increasing, c.parabolicity_margin
    );
    let deg = PdeConfig::degenerate();
    let h = holder_report(&run(&deg, &default_initial_data(&deg)?)?)?;
    println!(
        "degenerate run: temporal Hölder exponent {:.4}",
        h.temporal_exponent
    );
    Ok(())
}
