use evmix::numeric::{integrate, ks_critical_1pct, ks_statistic};
use evmix::rng::seeded_rng;
use evmix::stable::{exps_cdf, exps_pdf, exps_quantile};
use evmix::{ExpSParams, StableLaw};
use proptest::prelude::*;

#[test]
fn laplace_transform_matches() {
    let n = 1_000_000;
    for (k, &alpha) in [0.3, 0.5, 0.7, 0.9].iter().enumerate() {
        let law = StableLaw::new(alpha).unwrap();
        let draws = law.sample_n(n, 40 + k as u64);
        for &t in &[0.25, 0.5, 1.0, 2.0, 4.0] {
            let vals: Vec<f64> = draws.iter().map(|s| (-t * s).exp()).collect();
            let m = evmix::numeric::mean(&vals);
            let sd = evmix::numeric::variance(&vals).sqrt();
            let target = (-t.powf(alpha)).exp();
            assert!(
                (m - target).abs() < 4.0 * sd / (n as f64).sqrt(),
                "alpha {alpha} t {t}: {m} vs {target}"
            );
        }
    }
}

#[test]
fn sampler_matches_cdf() {
    for (k, &alpha) in [0.2, 0.5, 0.8].iter().enumerate() {
        let law = StableLaw::new(alpha).unwrap();
        let draws = law.sample_n(20_000, 7 + k as u64);
        let d = ks_statistic(&draws, |x| law.cdf(x.clamp(1e-300, 1e300)).unwrap());
        assert!(d < ks_critical_1pct(draws.len()), "alpha {alpha}: {d}");
    }
}

#[test]
fn exps_density_integrates_to_one() {
    for &alpha in &[0.3, 0.5, 0.8] {
        let p = ExpSParams::new(alpha, 0.0, 1.0).unwrap();
        let lo = exps_quantile(&p, 1e-12).unwrap();
        let hi = exps_quantile(&p, 1.0 - 1e-9).unwrap();
        let body = integrate(|x| exps_pdf(&p, x).unwrap(), lo, hi, 1e-12, 1e-12);
        let total = body + exps_cdf(&p, lo).unwrap() + p.sf(hi).unwrap();
        assert!((total - 1.0).abs() < 1e-6, "alpha {alpha}: {total}");
    }
}

#[test]
fn exps_round_trip() {
    for &alpha in &[0.1, 0.3, 0.5, 0.8, 0.95] {
        let p = ExpSParams::new(alpha, 2.0, 3.0).unwrap();
        for &q in &[0.01, 0.1, 0.5, 0.9, 0.99] {
            let x = exps_quantile(&p, q).unwrap();
            assert!((exps_cdf(&p, x).unwrap() - q).abs() < 1e-8);
        }
    }
}

#[test]
fn right_tail_is_exponential() {
    for &alpha in &[0.3, 0.5, 0.8] {
        let (mu, sigma) = (1.0, 2.0);
        let p = ExpSParams::new(alpha, mu, sigma).unwrap();
        let t = exps_quantile(&p, 1.0 - 1e-4).unwrap();
        let ratio = p.sf(t).unwrap() * ((t - mu) / (sigma / alpha)).exp() / p.law().tail_constant();
        assert!((ratio - 1.0).abs() < 0.05, "alpha {alpha}: {ratio}");
    }
}

#[test]
fn exps_draws_match_cdf() {
    let p = ExpSParams::new(0.6, -1.0, 0.5).unwrap();
    let mut rng = seeded_rng(3);
    let draws: Vec<f64> = (0..20_000).map(|_| p.sample(&mut rng)).collect();
    let d = ks_statistic(&draws, |x| p.cdf(x).unwrap());
    assert!(d < ks_critical_1pct(draws.len()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_is_monotone_and_bounded(alpha in 0.05f64..0.99, ln_x in -30.0f64..30.0, dx in 0.01f64..2.0) {
        let law = StableLaw::new(alpha).unwrap();
        let a = law.cdf(ln_x.exp()).unwrap();
        let b = law.cdf((ln_x + dx).exp()).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(b >= a);
        prop_assert!(law.pdf(ln_x.exp()).unwrap() >= 0.0);
    }

    #[test]
    fn quantile_inverts_cdf(alpha in 0.05f64..0.99, q in 0.001f64..0.999) {
        let law = StableLaw::new(alpha).unwrap();
        let x = law.quantile(q).unwrap();
        prop_assert!((law.cdf(x).unwrap() - q).abs() < 1e-9);
    }

    #[test]
    fn cdf_plus_sf_is_one(alpha in 0.05f64..0.99, ln_x in -20.0f64..20.0) {
        let law = StableLaw::new(alpha).unwrap();
        let x = ln_x.exp();
        prop_assert!((law.cdf(x).unwrap() + law.sf(x).unwrap() - 1.0).abs() < 1e-9);
    }
}
