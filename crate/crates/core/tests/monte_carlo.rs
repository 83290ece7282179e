//! Monte Carlo cross-checks of the quadrature expectations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_bundling::curve::CurveDistribution;
use robust_bundling::dispersion::Dispersion;
use robust_bundling::saddle::{minimize_guarantee, AmbiguityProblem};

#[test]
fn quadrature_matches_monte_carlo_on_random_bounded_integrands() {
    let p = AmbiguityProblem::with_point_moments(
        &[0.6, 0.5],
        &[vec![0], vec![1]],
        &[Dispersion::Quadratic, Dispersion::Quadratic],
        &[0.1, 0.1],
    );
    let sol = minimize_guarantee(&p).unwrap();
    let curve = CurveDistribution::from_solution(&sol);
    let sample = curve.sample(400_000, 314_159);

    let mut rng = ChaCha8Rng::seed_from_u64(2_718);
    for trial in 0..20 {
        let a: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b: f64 = rng.gen_range(-1.0..1.0);
        let c0: f64 = rng.gen_range(-2.0..2.0);
        let c1: f64 = rng.gen_range(-2.0..2.0);
        let f = |v: &[f64]| {
            let t = a[0] * v[0] + a[1] * v[1] + b;
            c0 * t.sin() + c1 * (0.7 * t).cos()
        };
        let by_quadrature = curve.expect(f);
        let (by_mc, se) = sample.mean_and_se(f);
        assert!(
            (by_quadrature - by_mc).abs() <= 4.0 * se,
            "trial {trial}: quadrature {by_quadrature} vs mc {by_mc} (se {se})"
        );
    }
}
