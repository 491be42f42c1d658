//! Eigenpairs of the rescaled operator and their bi-orthonormality.

use simfilm::kernel::KernelModel;
use simfilm::spectral::{eigen_residual, gram_matrix, EigenPairSet, GramQuadrature};
use simfilm::GridSpec;

fn main() -> simfilm::Result<()> {
    let m = KernelModel::standard(1, 2)?;
    let pairs = EigenPairSet::build(&m, 4, &GridSpec::line(36.0, 0.1)?)?;
    for b in &pairs.indices {
        println!(
            "beta {b}: lambda = {:>5}, |B psi - lambda psi| = {:.2e}",
            pairs.eigenvalues[b].to_string(),
            eigen_residual(&m, &pairs, b, 18.0)?
        );
    }
    let g = gram_matrix(&pairs, &GramQuadrature::default())?;
    println!(
        "max |G - I| = {:.2e} (resolved: {})",
        g.identity_error(),
        g.resolved
    );
    Ok(())
}
