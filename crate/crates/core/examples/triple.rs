//! Level 2 in the plane: two conics in (c2, c3) plus the log perturbation.
//! Takes about half a minute.

use simfilm::branching::{assemble_triple, solve_triple, SingularQuadConfig, SolveOptions};
use simfilm::kernel::{KernelConfig, KernelModel};
use simfilm::spectral::EigenPairSet;
use simfilm::GridSpec;

fn main() -> simfilm::Result<()> {
    let m = KernelModel::new(KernelConfig::new(2, 2).with_radial_extent(46.0))?;
    let pairs = EigenPairSet::build(&m, 2, &GridSpec::square(32.0, 0.25)?)?;
    let sys = assemble_triple(&m, &pairs, &SingularQuadConfig::default())?;
    for (k, c) in sys.classes().iter().enumerate() {
        println!("conic {k}: {:?}", c.kind);
    }
    let rep = solve_triple(
        &sys,
        &SolveOptions {
            lattice: 6,
            ..SolveOptions::default()
        },
    )?;
    println!("{:?}, {} roots", rep.structure, rep.root_count);
    for (s, r) in rep.solutions.iter().zip(&rep.jacobian_ratios) {
        println!(
            "  {:?} mu = {:.6} jacobian ratio {:.2}",
            s.coefficients, s.mu_first, r
        );
    }
    Ok(())
}
