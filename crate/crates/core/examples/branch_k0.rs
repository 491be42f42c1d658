//! First-order branching coefficient at level 0 in one and two dimensions.

use simfilm::branching::{assemble_k0, SingularQuadConfig};
use simfilm::kernel::{KernelConfig, KernelModel};
use simfilm::spectral::EigenPairSet;
use simfilm::GridSpec;

fn main() -> simfilm::Result<()> {
    let cfg = SingularQuadConfig::default();
    let m1 = KernelModel::standard(1, 2)?;
    let r1 = assemble_k0(
        &m1,
        &EigenPairSet::build(&m1, 0, &GridSpec::line(40.0, 0.01)?)?,
        &cfg,
    )?;
    let m2 = KernelModel::new(KernelConfig::new(2, 2).with_radial_extent(46.0))?;
    let r2 = assemble_k0(
        &m2,
        &EigenPairSet::build(&m2, 0, &GridSpec::square(32.0, 0.25)?)?,
        &cfg,
    )?;
    for r in [r1, r2] {
        println!(
            "N = {}: mu_1,0 = {:.10}, -N^2/16 = {}, rel err {:.1e}",
            r.dim, r.mu_first, r.oracle, r.relative_error
        );
    }
    Ok(())
}
