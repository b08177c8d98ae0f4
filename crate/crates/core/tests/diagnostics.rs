use cmphurdle::diagnostics::{
    dic, heidelberger_welch, hpd_interval, mcse, posterior_predictive, validation_metrics, PredictiveModel,
};
use cmphurdle::links::LinkSpec;
use cmphurdle::mcmc::{ChainConfig, PosteriorChain};
use cmphurdle::models::{Component, CountFamily, FittedComponent, HurdleFit, RegressionData};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, Normal, StandardNormal};

fn chain(names: &[&str], draws: Vec<Vec<f64>>) -> PosteriorChain {
    PosteriorChain {
        param_names: names.iter().map(|s| s.to_string()).collect(),
        draws,
        acceptance_rate: 1.0,
        accepted: 0,
        proposed: 0,
        block_acceptance: Vec::new(),
        final_multipliers: Vec::new(),
        adaptation: Vec::new(),
        config: ChainConfig::default(),
    }
}

fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[test]
fn dic_identities_hold() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let draws: Vec<Vec<f64>> = (0..500).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
    let c = chain(&["a"], draws);
    let r = dic(&c, |t| -(t[0] - 0.2).powi(2) - 3.0).unwrap();
    assert!((r.dic - (r.dbar + r.p_d)).abs() < 1e-9);
    assert!((r.p_d - (r.dbar - r.dhat)).abs() < 1e-9);
    assert!(r.p_d > 0.0);

    let flat = dic(&c, |_| -7.5).unwrap();
    assert_eq!(flat.p_d, 0.0);
    assert_eq!(flat.dic, 15.0);

    assert!(dic(&c, |t| if t[0] > 0.9 { f64::NEG_INFINITY } else { 0.0 }).is_err());
}

#[test]
fn dic_effective_parameters_match_dimension() {
    // Normal means with known unit variance and a flat prior: exact posterior
    // draws give p_d -> k.
    let k = 3;
    let n = 40;
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let data: Vec<Vec<f64>> = (0..k)
        .map(|j| (0..n).map(|_| j as f64 + rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let ybar: Vec<f64> = data.iter().map(|d| d.iter().sum::<f64>() / n as f64).collect();
    let sd = 1.0 / (n as f64).sqrt();
    let draws: Vec<Vec<f64>> = (0..40_000)
        .map(|_| ybar.iter().map(|m| Normal::new(*m, sd).unwrap().sample(&mut rng)).collect())
        .collect();
    let c = chain(&["m0", "m1", "m2"], draws);
    let loglik = |t: &[f64]| -> f64 {
        data.iter()
            .zip(t)
            .map(|(d, m)| d.iter().map(|y| -0.5 * (y - m).powi(2)).sum::<f64>())
            .sum()
    };
    let r = dic(&c, loglik).unwrap();
    assert!((r.p_d - k as f64).abs() < 0.2, "p_d {}", r.p_d);
}

#[test]
fn hpd_of_standard_normal() {
    let h = hpd_interval(&normals(1_000_000, 3), 0.95).unwrap();
    assert!((h.lower + 1.959964).abs() < 0.02, "{h:?}");
    assert!((h.upper - 1.959964).abs() < 0.02, "{h:?}");
}

#[test]
fn hpd_of_exponential_hugs_zero() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let d = Exp::new(1.0).unwrap();
    let x: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
    let h = hpd_interval(&x, 0.95).unwrap();
    assert!(h.lower < 0.01);
    assert!((h.upper - 20f64.ln()).abs() < 0.1);
}

#[test]
fn hpd_input_checks() {
    assert!(hpd_interval(&[1.0; 9], 0.9).is_err());
    assert!(hpd_interval(&[1.0; 20], 1.0).is_err());
    let h = hpd_interval(&(0..10).map(f64::from).collect::<Vec<_>>(), 0.5).unwrap();
    assert_eq!((h.lower, h.upper), (0.0, 4.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hpd_no_wider_than_equal_tailed(xs in prop::collection::vec(-100.0f64..100.0, 20..200), prob in 0.5f64..0.99) {
        let h = hpd_interval(&xs, prob).unwrap();
        let mut s = xs.clone();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let inside = (prob * n as f64).ceil() as usize;
        let lo = (n - inside) / 2;
        let et_width = s[lo + inside - 1] - s[lo];
        prop_assert!(h.upper - h.lower <= et_width + 1e-12);
        let covered = xs.iter().filter(|&&v| v >= h.lower && v <= h.upper).count();
        prop_assert!(covered >= inside);
    }

    #[test]
    fn metrics_are_bounded(
        obs in prop::collection::vec(0u64..20, 1..40),
        reps in 1usize..8,
        seed in 0u64..1000,
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let draws: Vec<Vec<u64>> = (0..reps).map(|_| obs.iter().map(|_| rng.random_range(0..25)).collect()).collect();
        let mean: Vec<f64> = (0..obs.len())
            .map(|i| draws.iter().map(|d| d[i] as f64).sum::<f64>() / reps as f64)
            .collect();
        let m = validation_metrics(&obs, &mean, &draws).unwrap();
        prop_assert!((0.0..=1.0).contains(&m.ks));
        prop_assert!(m.mse + 1e-12 >= m.mae * m.mae);
    }
}

#[test]
fn metrics_reject_length_mismatch() {
    assert!(validation_metrics(&[1, 2], &[1.0], &[vec![1, 2]]).is_err());
    assert!(validation_metrics(&[1, 2], &[1.0, 2.0], &[vec![1]]).is_err());
    let m = validation_metrics(&[1, 2], &[1.0, 2.0], &[vec![1, 2]]).unwrap();
    assert_eq!((m.mse, m.mae, m.ks), (0.0, 0.0, 0.0));

    let apart = validation_metrics(&[0, 0, 0], &[5.0; 3], &[vec![5, 5, 5], vec![6, 7, 5]]).unwrap();
    assert_eq!(apart.ks, 1.0);
    let apart = validation_metrics(&[4, 6, 5], &[0.0; 3], &[vec![0, 1, 0]]).unwrap();
    assert_eq!(apart.ks, 1.0);
}

#[test]
fn mcse_matches_ar1_asymptotics() {
    let n = 200_000;
    let e = normals(n, 60);
    assert!((mcse(&e) * (n as f64).sqrt() - 1.0).abs() < 0.05);
    let phi = 0.9;
    let mut x = vec![0.0; n];
    for i in 1..n {
        x[i] = phi * x[i - 1] + e[i];
    }
    let expected = 1.0 / ((1.0 - phi) * (n as f64).sqrt());
    let got = mcse(&x);
    assert!((got / expected - 1.0).abs() < 0.15, "{got} vs {expected}");
    assert_eq!(mcse(&[3.0; 50]), 0.0);
}

#[test]
fn heidelberger_welch_accepts_white_noise() {
    let passed = (0..100)
        .filter(|&s| heidelberger_welch(&normals(1_000, 100 + s)).unwrap().stationary)
        .count();
    assert!(passed >= 95, "{passed}/100");
}

#[test]
fn heidelberger_welch_flags_linear_trend() {
    let flagged = (0..100)
        .filter(|&s| {
            let x: Vec<f64> = normals(1_000, 500 + s)
                .iter()
                .enumerate()
                .map(|(i, v)| v + 3.0 * i as f64 / 1_000.0)
                .collect();
            !heidelberger_welch(&x).unwrap().stationary
        })
        .count();
    assert!(flagged >= 95, "{flagged}/100");
}

#[test]
fn heidelberger_welch_edge_cases() {
    assert!(heidelberger_welch(&[0.0; 50]).is_err());
    let h = heidelberger_welch(&[2.5; 200]).unwrap();
    assert!(h.stationary && h.halfwidth_ok);
}

fn design(m: usize) -> RegressionData {
    let x = DMatrix::from_fn(m, 1, |i, _| i as f64 / m as f64);
    RegressionData::with_intercept(vec![0; m], &x, &["x1".to_string()], None).unwrap()
}

#[test]
fn ordinary_predictive_mean_tracks_rate() {
    let data = design(5);
    let fit = FittedComponent {
        component: Component::OrdinaryPoisson,
        chain: chain(&["beta_intercept", "beta_x1"], vec![vec![1.0, 0.5]; 4_000]),
    };
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let sample = posterior_predictive(PredictiveModel::Ordinary(&fit), &data, 4_000, &mut rng).unwrap();
    assert!(!sample.with_replacement);
    for (i, m) in sample.mean().iter().enumerate() {
        let rate = (1.0 + 0.5 * i as f64 / 5.0).exp();
        assert!((m - rate).abs() < 4.0 * (rate / 4_000.0).sqrt(), "row {i}: {m} vs {rate}");
    }
}

#[test]
fn hurdle_predictive_respects_gate_and_seed() {
    let data = design(6);
    let closed = HurdleFit {
        binary: FittedComponent {
            component: Component::Binary { link: LinkSpec::probit(), offset: false },
            chain: chain(&["beta_intercept", "beta_x1"], vec![vec![-40.0, 0.0]; 50]),
        },
        positive: FittedComponent {
            component: Component::ZeroTruncated { family: CountFamily::Cmp },
            chain: chain(&["gamma_intercept", "gamma_x1", "nu"], vec![vec![1.0, 0.0, 0.7]; 50]),
        },
        binary_dic: cmphurdle::diagnostics::DicResult::from_deviances(0.0, 0.0),
        positive_dic: cmphurdle::diagnostics::DicResult::from_deviances(0.0, 0.0),
        combined_dic: 0.0,
    };
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let zeros = posterior_predictive(PredictiveModel::Hurdle(&closed), &data, 80, &mut rng).unwrap();
    assert!(zeros.with_replacement);
    assert!(zeros.draws.iter().flatten().all(|&v| v == 0));

    let mut open = closed.clone();
    open.binary.chain = chain(&["beta_intercept", "beta_x1"], vec![vec![40.0, 0.0]; 50]);
    let run = |seed| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        posterior_predictive(PredictiveModel::Hurdle(&open), &data, 30, &mut rng).unwrap()
    };
    let a = run(9);
    assert!(a.draws.iter().flatten().all(|&v| v >= 1));
    assert_eq!(a, run(9));
    assert_ne!(a.draws, run(10).draws);
}

#[test]
fn predictive_rejects_non_count_component() {
    let data = design(3);
    let fit = FittedComponent {
        component: Component::ZeroTruncated { family: CountFamily::Poisson },
        chain: chain(&["gamma_intercept", "gamma_x1"], vec![vec![0.0, 0.0]; 20]),
    };
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    assert!(posterior_predictive(PredictiveModel::Ordinary(&fit), &data, 5, &mut rng).is_err());
}
