use simfilm::kernel::{eval_kernel, KernelModel};
use simfilm::semigroup::{
    bump_derivative, compare, decay_slope, evolve_convolution, evolve_expansion, momentum,
    unit_bump,
};
use simfilm::spectral::EigenPairSet;
use simfilm::{GridSpec, MultiIndex};

fn setup() -> (KernelModel, GridSpec) {
    (
        KernelModel::standard(1, 2).unwrap(),
        GridSpec::line(30.0, 0.05).unwrap(),
    )
}

#[test]
fn moments_of_kernel() {
    let (m, g) = setup();
    let f = eval_kernel(&m, &g).unwrap();
    assert!((momentum(&f, &MultiIndex::new(vec![0])).unwrap() - 1.0).abs() < 1e-8);
    assert!(momentum(&f, &MultiIndex::new(vec![1])).unwrap().abs() < 1e-10);
}

#[test]
fn bump_second_moment_matches_direct_sum() {
    let g = GridSpec::line(2.0, 0.001).unwrap();
    let u = unit_bump(&g).unwrap();
    let m2 = momentum(&u, &MultiIndex::new(vec![2])).unwrap();
    // independent summation at double resolution
    let n = 4000;
    let h = 2.0 / n as f64;
    let (mut mass, mut second) = (0.0, 0.0);
    for k in 1..n {
        let z = -1.0 + k as f64 * h;
        let b = (-1.0 / (1.0 - z * z)).exp();
        mass += b;
        second += z * z * b;
    }
    assert!((m2 - second / mass / 2f64.sqrt()).abs() < 1e-10, "{m2}");
}

#[test]
fn expansion_agrees_with_convolution() {
    let (m, g) = setup();
    let u = unit_bump(&g).unwrap();
    let pairs = EigenPairSet::build(&m, 8, &g).unwrap();
    for tau in [1.0, 2.0, 4.0] {
        let a = evolve_expansion(&pairs, &u, tau, 8).unwrap();
        let b = evolve_convolution(&m, &u, tau).unwrap();
        let c = compare(&a, &b, tau, 8).unwrap();
        assert!(c.l2_error < 1e-4, "{c:?}");
        assert!((b.integrate() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn truncation_error_is_monotone_in_k() {
    let (m, g) = setup();
    let u = unit_bump(&g).unwrap();
    let pairs = EigenPairSet::build(&m, 8, &g).unwrap();
    let conv = evolve_convolution(&m, &u, 2.0).unwrap();
    let mut last = f64::INFINITY;
    for k in [0, 2, 4, 6, 8] {
        let e = compare(
            &evolve_expansion(&pairs, &u, 2.0, k).unwrap(),
            &conv,
            2.0,
            k,
        )
        .unwrap()
        .l2_error;
        assert!(e < last, "K={k}: {e} !< {last}");
        last = e;
    }
}

#[test]
fn remainder_fit_for_k4() {
    let (m, g) = setup();
    let u = unit_bump(&g).unwrap();
    let pairs = EigenPairSet::build(&m, 4, &g).unwrap();
    let taus = [1.0, 2.0, 3.0, 4.0];
    let errs: Vec<f64> = taus
        .iter()
        .map(|&t| {
            let a = evolve_expansion(&pairs, &u, t, 4).unwrap();
            let b = evolve_convolution(&m, &u, t).unwrap();
            compare(&a, &b, t, 4).unwrap().l2_error
        })
        .collect();
    // odd moments vanish, so the remainder is led by |beta| = 6 rather than 5
    let slope = decay_slope(&taus, &errs).unwrap();
    assert!(slope <= -5.0 / 4.0 + 0.05, "{slope} {errs:?}");
    let c = errs[1] / (-5.0f64 * 2.0 / 4.0).exp();
    assert!(errs[1] <= c * (-5.0f64 * 2.0 / 4.0).exp() * (1.0 + 1e-12));
}

#[test]
fn mass_zero_decay_rates() {
    let (m, g) = setup();
    let taus = [6.0, 7.0, 8.0, 9.0, 10.0];
    for k in [1u32, 2] {
        let u = bump_derivative(&g, k).unwrap();
        let norms: Vec<f64> = taus
            .iter()
            .map(|&t| evolve_convolution(&m, &u, t).unwrap().l2_norm())
            .collect();
        let slope = decay_slope(&taus, &norms).unwrap();
        let want = -(k as f64) / 4.0;
        assert!((slope - want).abs() < 0.05 * want.abs(), "k={k}: {slope}");
    }
}

#[test]
fn linearity_and_long_time_limit() {
    let (m, g) = setup();
    let u = unit_bump(&g).unwrap();
    let w = evolve_convolution(&m, &u, 1.5).unwrap();
    let w3 = evolve_convolution(&m, &u.scaled(3.0), 1.5).unwrap();
    assert!(w3.linf_distance(&w.scaled(3.0)).unwrap() < 1e-15);

    let f = eval_kernel(&m, &g).unwrap();
    let far = evolve_convolution(&m, &u, 4.0 * 10f64.ln()).unwrap();
    assert!(far.l2_distance(&f).unwrap() < 1e-3);
    let farther = evolve_convolution(&m, &u, 40.0).unwrap();
    assert!(farther.linf_distance(&f).unwrap() < 1e-8);
}
