mod common;

use common::*;
use qeraser::optics::{fringe_phases, pattern_value, sinc, PatternKind, PatternPdf, ScreenConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_self_checks() {
    // 5-point Gauss–Legendre is exact for degree ≤ 9.
    let v = gauss_legendre(|x| x.powi(8), 0.0, 1.0, 1);
    assert!((v - 1.0 / 9.0).abs() < 1e-14);
    assert!((ks_coefficient(0.001) - 1.9495).abs() < 1e-4);
    assert!((chi_square_critical(99, 0.999) - 148.23).abs() < 0.05);
    assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
    assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
}

#[test]
fn family_members_match_closed_forms_on_a_grid() {
    let o = optics();
    let x_max = screen().x_max;
    for i in 0..1000 {
        let x = -x_max + 2.0 * x_max * i as f64 / 999.0;
        let (ta, td) = fringe_phases(x, &o);
        let s2 = sinc(ta).powi(2);
        let mixed = pattern_value(x, PatternKind::Mixed, &o);
        assert!((mixed - 1.5 * pattern_value(x, PatternKind::Family(1.0 / 3.0), &o)).abs() < 1e-12);
        assert!(
            (pattern_value(x, PatternKind::Envelope, &o)
                - pattern_value(x, PatternKind::Family(0.0), &o))
            .abs()
                < 1e-12
        );
        // Two-slit intensity from adding the two slit fields: |e^{iφA} + e^{iφB}|² = 2(1 + cos Δφ).
        let field_sum = (1.0 + (2.0 * td).cos()) * 2.0;
        assert!((s2 * td.cos().powi(2) - s2 * field_sum / 4.0).abs() < 1e-12);
        assert!(
            (family_density(x, 0.6, &o) - pattern_value(x, PatternKind::Family(0.6), &o)).abs()
                < 1e-12
        );
    }
}

#[test]
fn interference_sampler_passes_chi_square() {
    let o = optics();
    let s = screen();
    let pdf = PatternPdf::new(PatternKind::Interference, &o, &s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let xs: Vec<f64> = (0..1_000_000).map(|_| pdf.sample(&mut rng)).collect();
    let counts = bin_counts(&xs, s.x_max, s.n_bins);
    let (stat, df) = chi_square(&counts, &bin_probabilities(1.0, &o, s.x_max, s.n_bins));
    assert!(stat < chi_square_critical(df, 0.999), "chi2 {stat} df {df}");
}

#[test]
fn central_lobe_holds_ninety_percent_of_a_wide_screen() {
    let o = optics();
    let null = o.envelope_null();
    let wide = ScreenConfig::new(50.0 * null, 100).unwrap();
    let total = gauss_legendre(
        |x| family_density(x, 0.0, &o),
        -wide.x_max,
        wide.x_max,
        20_000,
    );
    let lobe = gauss_legendre(|x| family_density(x, 0.0, &o), -null, null, 2_000);
    let expected = lobe / total;
    assert!(
        (expected - 0.903).abs() < 0.005,
        "oracle fraction {expected}"
    );

    let pdf = PatternPdf::with_nodes(PatternKind::Envelope, &o, &wide, 200_001).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 1_000_000;
    let inside = (0..n).filter(|_| pdf.sample(&mut rng).abs() < null).count();
    let frac = inside as f64 / n as f64;
    let se = (expected * (1.0 - expected) / n as f64).sqrt();
    assert!((frac - expected).abs() < 5.0 * se, "{frac} vs {expected}");
}

#[test]
fn sample_means_are_centered() {
    let o = optics();
    let s = screen();
    for kind in [
        PatternKind::Interference,
        PatternKind::Envelope,
        PatternKind::Mixed,
    ] {
        let pdf = PatternPdf::new(kind, &o, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let xs: Vec<f64> = (0..1_000_000).map(|_| pdf.sample(&mut rng)).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 5.0 * (var / n).sqrt(), "{kind}: mean {mean}");
    }
}

#[test]
fn cdf_of_samples_is_uniform() {
    let o = optics();
    let s = screen();
    for kind in [PatternKind::Interference, PatternKind::Family(0.4)] {
        let pdf = PatternPdf::new(kind, &o, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u: Vec<f64> = (0..100_000)
            .map(|_| pdf.cdf_at(pdf.sample(&mut rng)))
            .collect();
        let d = ks_uniform(&u);
        assert!(
            d < ks_coefficient(0.001) / (u.len() as f64).sqrt(),
            "{kind}: D = {d}"
        );
    }
}

#[test]
fn minimum_grid_still_normalizes() {
    let o = optics();
    let s = screen();
    let pdf = PatternPdf::with_nodes(PatternKind::Envelope, &o, &s, 4097).unwrap();
    assert!((pdf.integral() - 1.0).abs() < 1e-9);
    assert!(PatternPdf::with_nodes(PatternKind::Envelope, &o, &s, 4096).is_err());
}
