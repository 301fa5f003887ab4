//! Bootstrap coverage simulation: the percentile interval for a tail
//! exceedance probability should cover the truth at close to its
//! nominal level.

use monotone_core::evt::{bootstrap_ci, gpd_quantile, gpd_survival};
use monotone_core::rng::RngStream;

#[test]
#[ignore = "statistical coverage simulation (~1 min); run with --ignored"]
fn bootstrap_ci_covers_a_true_tail_probability() {
    let xi = -0.1;
    let sigma = 1.0;
    // Probe the true 1e-3 exceedance level.
    let t = gpd_quantile(xi, sigma, 0.999);
    assert!((gpd_survival(xi, sigma, t) - 1e-3).abs() < 1e-12);

    let trials = 50;
    let mut covered = 0;
    for trial in 0..trials {
        let mut rng = RngStream::new(9000 + trial, 0);
        let xs: Vec<f64> = (0..2000)
            .map(|_| gpd_quantile(xi, sigma, rng.next_f64()))
            .collect();
        let ci = bootstrap_ci(&xs, 0.0, t, 200, 31 * trial + 1, 0.95).unwrap();
        if ci.ci_low <= 1e-3 && 1e-3 <= ci.ci_high {
            covered += 1;
        }
    }
    assert!(
        covered * 10 >= trials * 9,
        "coverage {covered}/{trials} below 90%"
    );
    println!("bootstrap coverage {covered}/{trials}");
}
