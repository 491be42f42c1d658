//! Self-similar profiles for small n by continuation from the kernel.

use simfilm::kernel::KernelModel;
use simfilm::profile::{continuation, kernel_profile, oscillation_report, ProfileConfig};

fn main() -> simfilm::Result<()> {
    let m = KernelModel::standard(1, 2)?;
    let cfg = ProfileConfig::default();
    let f = kernel_profile(&m, &cfg)?;
    let branch = continuation(&m, &[0.01, 0.02, 0.04, 0.08], 1, &cfg).map_err(|e| e.source)?;
    for s in &branch.solutions {
        let osc = oscillation_report(s);
        println!(
            "n = {:.2}: alpha {:.6}, |f - F| = {:.3e}, first zeros {:.3?}",
            s.n,
            s.alpha,
            s.field.l2_distance(&f)?,
            &osc.sign_changes[..osc.sign_changes.len().min(3)]
        );
    }
    println!("increment ratio {:.3}", branch.increment_ratio(f.l2_norm()));
    Ok(())
}
