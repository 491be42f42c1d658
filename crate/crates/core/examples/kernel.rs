//! Sample the 1D kernel, check its mass and the tail envelope.

use simfilm::kernel::{
    check_decay_envelope, envelope_exponent, eval_kernel, kernel_mass, KernelModel,
};
use simfilm::spectral::apply_b;
use simfilm::GridSpec;

fn main() -> simfilm::Result<()> {
    let m = KernelModel::standard(1, 2)?;
    let f = eval_kernel(&m, &GridSpec::line(30.0, 0.01)?)?;
    println!("int F - 1      = {:e}", kernel_mass(&m)? - 1.0);
    println!("max |B F|      = {:e}", apply_b(&m, &f)?.max_abs());
    let env = check_decay_envelope(&f)?;
    println!(
        "envelope d     = {:.5} (fit), exponent {:.4}",
        env.fitted_d,
        envelope_exponent()
    );
    println!(
        "rms 4/3 vs y^2 = {:.3e} vs {:.3e}",
        env.rms_four_thirds, env.rms_quadratic
    );
    Ok(())
}
