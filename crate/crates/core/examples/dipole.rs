//! Level 1 in the plane: the quadratic in c2 and its root structure.

use simfilm::branching::{assemble_dipole, solve_dipole, SingularQuadConfig, SolveOptions};
use simfilm::kernel::{KernelConfig, KernelModel};
use simfilm::spectral::EigenPairSet;
use simfilm::GridSpec;

fn main() -> simfilm::Result<()> {
    let m = KernelModel::new(KernelConfig::new(2, 2).with_radial_extent(46.0))?;
    let pairs = EigenPairSet::build(&m, 1, &GridSpec::square(32.0, 0.25)?)?;
    let sys = assemble_dipole(&m, &pairs, &SingularQuadConfig::default())?;
    let s = sys.summary();
    println!(
        "A = {:.3e}, B = {:.3e}, C = {:.3e} (noise {:.1e})",
        s.a, s.b, s.c, s.coefficient_noise
    );
    println!(
        "swap defects {:.1e} {:.1e}",
        s.diagonal_swap_defect, s.cross_swap_defect
    );
    let rep = solve_dipole(&sys, &SolveOptions::default())?;
    println!(
        "{:?}: {} lattice roots, predicted {:?}",
        rep.structure,
        rep.solutions.len(),
        rep.conditions.predicted
    );
    for w in &rep.warnings {
        println!("  note: {w}");
    }
    Ok(())
}
