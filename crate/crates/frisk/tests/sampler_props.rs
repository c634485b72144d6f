//! Property tests for the sampling layer: distributional identities of the
//! stable sampler, subordinator path structure, and estimator brackets.
//!
//! Statistical assertions use wide (6+ SE) bounds so that the suite stays
//! deterministic-in-practice across many proptest cases.

use proptest::prelude::*;

use frisk::rng::RngStream;
use frisk::stable::{
    characteristic_exponent, sample_subordinator_path, StableParams, StableSampler,
    SubordinatorSampler,
};
use frisk::stats::{ks_two_sample, Estimate};

fn draws(sampler: &StableSampler, seed: u64, n: usize) -> Vec<f64> {
    let mut rng = RngStream::new(seed).named("sampler-props").rng();
    (0..n).map(|_| sampler.sample(&mut rng)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // The empirical characteristic function matches exp(-psi) at any
    // frequency, for any admissible (alpha, skew).
    #[test]
    fn empirical_cf_matches_exponent(
        alpha in 0.4f64..=2.0,
        skew in -1.0f64..=1.0,
        xi in 0.1f64..=2.5,
        seed in 0u64..1 << 48,
    ) {
        let skew = if alpha == 2.0 { 0.0 } else { skew };
        let sampler = StableSampler::new(alpha, skew).unwrap();
        let params = StableParams::new_1d(alpha, 0.5 * (1.0 + skew), 0.5 * (1.0 - skew)).unwrap();
        let psi = characteristic_exponent(&params, &[xi]);
        let target_mod = (-psi.re).exp();
        let (t_re, t_im) = (target_mod * (-psi.im).cos(), target_mod * (-psi.im).sin());

        let n = 40_000usize;
        let xs = draws(&sampler, seed, n);
        let (mut s_c, mut s_s, mut s_c2, mut s_s2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &x in &xs {
            let (s, c) = (xi * x).sin_cos();
            s_c += c;
            s_s += s;
            s_c2 += c * c;
            s_s2 += s * s;
        }
        let nf = n as f64;
        for (sum, sum2, t) in [(s_c, s_c2, t_re), (s_s, s_s2, t_im)] {
            let mean = sum / nf;
            let se = (((sum2 / nf - mean * mean).max(1e-12)) / nf).sqrt();
            prop_assert!(
                (mean - t).abs() <= 6.0 * se,
                "cf part off: mean={mean} target={t} se={se} alpha={alpha} skew={skew} xi={xi}"
            );
        }
    }

    // Symmetric draws are distributionally even: an independent mirrored
    // batch is KS-indistinguishable.
    #[test]
    fn symmetric_alpha_stable_is_even(
        alpha in 0.4f64..=2.0,
        seed in 0u64..1 << 48,
    ) {
        let sampler = StableSampler::new(alpha, 0.0).unwrap();
        let a = draws(&sampler, seed, 4000);
        let b: Vec<f64> = draws(&sampler, seed ^ 0x9e37_79b9_7f4a_7c15, 4000)
            .into_iter()
            .map(|x| -x)
            .collect();
        let (_, p) = ks_two_sample(&a, &b);
        prop_assert!(p > 1e-4, "mirrored KS rejected: p={p} alpha={alpha}");
    }

    // Far-tail mass halves by 2^alpha when the cutoff doubles (regularly
    // varying tails). Away from alpha = 2 and with generous slack.
    #[test]
    fn tail_ratio_tracks_alpha(
        alpha in 0.6f64..=1.5,
        skew in -1.0f64..=1.0,
        seed in 0u64..1 << 48,
    ) {
        let sampler = StableSampler::new(alpha, skew).unwrap();
        let n = 120_000usize;
        let mut xs: Vec<f64> = draws(&sampler, seed, n).iter().map(|x| x.abs()).collect();
        xs.sort_by(f64::total_cmp);
        let c = xs[n - n / 200]; // 0.5% two-sided tail
        let p1 = 0.005f64;
        let p2 = xs.iter().rev().take_while(|&&x| x > 2.0 * c).count() as f64 / n as f64;
        let ratio = p2 / p1;
        let target = 2.0f64.powf(-alpha);
        // 6 SE of p2 plus 20% for pre-asymptotic curvature of the tail.
        let se = (p1 * target * (1.0 - p1 * target) / n as f64).sqrt() / p1;
        prop_assert!(
            (ratio - target).abs() <= 0.2 * target + 6.0 * se,
            "tail ratio {ratio} vs 2^-alpha {target} at alpha={alpha} skew={skew}"
        );
    }

    // Wilson interval brackets the point estimate and stays in [0, 1];
    // the estimate is monotone in the success count.
    #[test]
    fn wilson_bracket_and_monotonicity(n in 1u64..100_000, k in 0u64..100_000) {
        let k = k % (n + 1);
        let e = Estimate::from_successes(k, n);
        prop_assert!(0.0 <= e.ci_low && e.ci_low <= e.p && e.p <= e.ci_high && e.ci_high <= 1.0);
        if k < n {
            let e2 = Estimate::from_successes(k + 1, n);
            prop_assert!(e2.p > e.p);
            prop_assert!(e2.ci_low >= e.ci_low && e2.ci_high >= e.ci_high);
        }
    }

    // Kanter draws are strictly positive; subordinator paths are
    // nondecreasing with nonnegative increments; the inverse is monotone
    // with invert(0) = 0.
    #[test]
    fn subordinator_paths_and_inverse_are_monotone(
        beta in 0.05f64..=0.95,
        u_max in 0.5f64..=4.0,
        seed in 0u64..1 << 48,
    ) {
        let sampler = SubordinatorSampler::new(beta).unwrap();
        let mut rng = RngStream::new(seed).named("sub-props").rng();
        for _ in 0..100 {
            prop_assert!(sampler.sample_unit(&mut rng) > 0.0);
        }
        let path = sample_subordinator_path(beta, u_max, 1e-2, &mut rng).unwrap();
        let vals = path.values();
        for w in vals.windows(2) {
            prop_assert!(w[1] >= w[0], "path decreased: {} -> {}", w[0], w[1]);
        }
        let t_hi = vals[vals.len() - 1] * 0.9;
        prop_assert_eq!(path.invert(0.0).unwrap(), 0.0);
        let mut prev = 0.0;
        for k in 1..=20 {
            let t = t_hi * k as f64 / 20.0;
            let u = path.invert(t).unwrap();
            prop_assert!(u >= prev && u <= path.u_max());
            prev = u;
        }
    }

    // The multivariate exponent is nonnegative-definite in the Levy sense:
    // Re psi >= 0, psi(0) = 0, and psi(-xi) is the conjugate of psi(xi).
    #[test]
    fn exponent_is_levy_admissible(
        alpha in 0.3f64..=2.0,
        w1 in 0.05f64..=1.0,
        w2 in 0.05f64..=1.0,
        dir in 0.0f64..std::f64::consts::TAU,
        xi1 in -8.0f64..=8.0,
        xi2 in -8.0f64..=8.0,
    ) {
        let params = StableParams::new(
            alpha,
            vec![
                frisk::stable::SpectralAtom { direction: vec![dir.cos(), dir.sin()], weight: w1 },
                frisk::stable::SpectralAtom { direction: vec![1.0, 0.0], weight: w2 },
            ],
        )
        .unwrap();
        let xi = [xi1, xi2];
        let psi = characteristic_exponent(&params, &xi);
        prop_assert!(psi.re >= -1e-12, "Re psi = {} < 0", psi.re);
        let zero = characteristic_exponent(&params, &[0.0, 0.0]);
        prop_assert!(zero.re.abs() < 1e-12 && zero.im.abs() < 1e-12);
        let neg = characteristic_exponent(&params, &[-xi1, -xi2]);
        prop_assert!((neg.re - psi.re).abs() <= 1e-9 * (1.0 + psi.re.abs()));
        prop_assert!((neg.im + psi.im).abs() <= 1e-9 * (1.0 + psi.im.abs()));
    }
}
