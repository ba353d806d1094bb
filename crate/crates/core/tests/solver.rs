use hslab::minimizer::{
    descend_symmetric, estimate_mazya, initial_profile, minimize_quotient, ConcentrationFlag, EstimateSource, Init,
    MinimizeResult, SolverConfig,
};
use hslab::params::sobolev_constant;
use hslab::scanner::{sweep_bottom_b, sweep_gamma_from};
use hslab::ParamSet;

fn cfg(n: usize) -> SolverConfig {
    let mut c = SolverConfig::default();
    c.mesh.nr = n;
    c.mesh.ns = n;
    c
}

fn ps(d: u32, k: u32, p: f64, q: f64, a: f64, b: f64, g: f64) -> ParamSet {
    ParamSet::new(d, k, p, q, a, b, g).unwrap()
}

fn assert_monotone(r: &MinimizeResult) {
    for w in r.trace.windows(2) {
        assert!(w[1].1 <= w[0].1 * (1.0 + 1e-12), "trace rises at {}: {} -> {}", w[1].0, w[0].1, w[1].1);
    }
    assert_eq!(r.trace.last().unwrap().1, r.constant_estimate);
}

#[test]
fn attained_subcritical_case_converges() {
    let r = minimize_quotient(&ps(4, 2, 2.0, 3.0, 0.0, 0.5, 1.0), &cfg(48), &Init::TalentiLike).unwrap();
    assert!(r.converged);
    assert_eq!(r.concentration_flag, ConcentrationFlag::None);
    assert_eq!(r.source, EstimateSource::SymmetricDescent);
    // Euler-Lagrange residual in the dual norm of the preconditioner
    assert!(r.stationarity < 1e-3, "{}", r.stationarity);
    assert_monotone(&r);
}

#[test]
fn initializations_agree_when_attained() {
    for (p, q) in [(2.0, 3.0), (3.0, 5.0)] {
        let pset = ps(4, 2, p, q, 0.5, 0.0, 0.5);
        let est: Vec<f64> = [Init::GaussianBump, Init::TalentiLike, Init::Random]
            .iter()
            .map(|i| {
                let r = minimize_quotient(&pset, &cfg(32), i).unwrap();
                assert_monotone(&r);
                r.constant_estimate
            })
            .collect();
        let (lo, hi) = est.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), &e| (l.min(e), h.max(e)));
        assert!(hi / lo - 1.0 < 0.02, "p = {p}: {est:?}");
    }
}

#[test]
fn descent_ignores_initial_scale() {
    let pset = ps(4, 2, 2.0, 3.0, 0.5, 0.25, 0.75);
    let c = cfg(24);
    let g = c.grid(4, 2).unwrap();
    let u0 = initial_profile(&Init::GaussianBump, &g, &pset, 0).unwrap();
    let run = |f: f64| {
        let init = Init::Grid(g.with_values(u0.iter().map(|v| f * v).collect()));
        descend_symmetric(&pset, &c, &init).unwrap().constant_estimate
    };
    let base = run(1.0);
    for f in [1e-3, 7.0, 1e3] {
        assert!((run(f) / base - 1.0).abs() < 1e-9, "scale {f}");
    }
}

#[test]
fn regularization_halving_is_invisible() {
    let pset = ps(4, 2, 3.0, 5.0, 0.5, 0.0, 0.5);
    let mut c = cfg(48);
    c.delta_rel = 1e-6;
    let r1 = minimize_quotient(&pset, &c, &Init::GaussianBump).unwrap();
    c.delta_rel = 5e-7;
    let r2 = minimize_quotient(&pset, &c, &Init::GaussianBump).unwrap();
    assert_monotone(&r1);
    assert_monotone(&r2);
    let rel = (r1.constant_estimate / r2.constant_estimate - 1.0).abs();
    assert!(rel < 1e-4, "{rel}");
}

#[test]
fn negative_bottom_escapes_to_the_sobolev_level() {
    let r = minimize_quotient(&ps(4, 2, 2.0, 4.0, 1.0, -1.0, -1.0), &cfg(48), &Init::TalentiLike).unwrap();
    let s = sobolev_constant(4, 2.0).unwrap();
    assert_eq!(r.concentration_flag, ConcentrationFlag::TowardInfinity);
    assert!(!r.converged);
    assert!(r.descent_estimate >= r.constant_estimate);
    assert!(r.constant_estimate >= s * (1.0 - 1e-3), "{} < {s}", r.constant_estimate);
    assert!((r.constant_estimate / s - 1.0).abs() < 0.01);
}

#[test]
fn mazya_at_critical_exponent_equals_sobolev() {
    let r = estimate_mazya(&ps(3, 1, 2.0, 6.0, 1.0, 0.0, 0.0), &cfg(48)).unwrap();
    let s = sobolev_constant(3, 2.0).unwrap();
    assert!((r.constant_estimate / s - 1.0).abs() < 0.01, "{} vs {s}", r.constant_estimate);
    assert!(matches!(r.concentration_flag, ConcentrationFlag::TowardAxis | ConcentrationFlag::TowardInfinity));
}

#[test]
fn planar_example_converges() {
    let r = minimize_quotient(&ps(2, 1, 2.0, 4.0, 1.0, 0.0, 0.0), &cfg(48), &Init::TalentiLike).unwrap();
    assert!(r.converged);
    assert_monotone(&r);
}

#[test]
fn gamma_sweep_is_monotone_for_every_seed() {
    let base = ps(2, 1, 2.0, 4.0, 1.0, 0.0, 0.0);
    let gammas = [0.0, 0.5, 1.0, 2.0];
    for seed in [1, 2, 3] {
        let mut c = cfg(32);
        c.seed = seed;
        let r = sweep_gamma_from(&base, &gammas, &c, &Init::Random).unwrap();
        let est: Vec<f64> = r.points.iter().map(|p| p.estimate.unwrap()).collect();
        for w in est.windows(2) {
            assert!(w[1] >= w[0] * 0.98, "seed {seed}: {est:?}");
        }
        assert!(r.all_checks_pass(), "seed {seed}: {:?}", r.checks);
    }
}

#[test]
fn bottom_sweep_has_finite_lipschitz_bound() {
    let base = ps(4, 2, 2.0, 3.0, 0.0, 0.0, 0.0);
    let r = sweep_bottom_b(&base, &[0.0, 0.25, 0.5, 0.75], &cfg(32)).unwrap();
    let l = r.lipschitz_estimate.unwrap();
    assert!(l.is_finite() && l >= 0.0, "{l}");
    // the J_b coefficient moves by at most 2 H_a per unit b and Hardy bounds
    // the |z|^{-2} term by J / H_a^2
    let top = r.points.iter().filter_map(|p| p.estimate).fold(0.0, f64::max);
    assert!(l <= 2.0 / base.h_of(0.0) * top, "{l} vs {top}");
}
