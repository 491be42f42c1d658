//! Linear semigroup: eigen-expansion against direct convolution, and the
//! decay rate of data with vanishing moments.

use simfilm::kernel::KernelModel;
use simfilm::semigroup::{
    bump_derivative, compare, decay_slope, evolve_convolution, evolve_expansion, unit_bump,
};
use simfilm::spectral::EigenPairSet;
use simfilm::GridSpec;

fn main() -> simfilm::Result<()> {
    let m = KernelModel::standard(1, 2)?;
    let g = GridSpec::line(30.0, 0.05)?;
    let u = unit_bump(&g)?;
    let pairs = EigenPairSet::build(&m, 8, &g)?;
    for tau in [1.0, 2.0, 4.0] {
        let c = compare(
            &evolve_expansion(&pairs, &u, tau, 8)?,
            &evolve_convolution(&m, &u, tau)?,
            tau,
            8,
        )?;
        println!(
            "tau {tau}: L2 gap {:.2e}, sup gap {:.2e}",
            c.l2_error, c.linf_error
        );
    }
    let taus = [6.0, 7.0, 8.0, 9.0, 10.0];
    for k in [1, 2] {
        let v = bump_derivative(&g, k)?;
        let norms: Vec<f64> = taus
            .iter()
            .map(|&t| evolve_convolution(&m, &v, t).map(|w| w.l2_norm()))
            .collect::<Result<_, _>>()?;
        println!(
            "k = {k}: d log|u| / d tau = {:.4} (expected {})",
            decay_slope(&taus, &norms)?,
            -(k as f64) / 4.0
        );
    }
    Ok(())
}
