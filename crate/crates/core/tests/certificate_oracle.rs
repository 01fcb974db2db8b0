mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{
    compare, contraction_oracle, leader_follower_oracle, leaderless_oracle, random_params,
};
use syncnet::certificates::{
    leader_follower_certificate, leaderless_lipschitz_certificate,
    nonexpansive_contraction_factors, NetworkParams, Verdict,
};

const REL: f64 = 1e-12;

#[test]
fn grid_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for k in 0..100 {
        let mut p = random_params(&mut rng, true);
        p.lipschitz = Some(rand::Rng::gen_range(&mut rng, 0.0..1e-3));
        let ctx = format!("grid point {k}: {p:?}");
        compare(&nonexpansive_contraction_factors(&p).unwrap(), &contraction_oracle(&p), REL)
            .expect(&ctx);
        compare(&leaderless_lipschitz_certificate(&p).unwrap(), &leaderless_oracle(&p), REL)
            .expect(&ctx);
        compare(&leader_follower_certificate(&p).unwrap(), &leader_follower_oracle(&p), REL)
            .expect(&ctx);
    }
}

#[test]
fn worked_examples_match_oracle() {
    let base = NetworkParams {
        num_agents: 2,
        dim: 1,
        a_lo: 1.0,
        a_hi: 1.0,
        b_lo: Some(1.0),
        tau_d: 1.0,
        window: 1.0,
        lipschitz: Some(1e-5),
    };
    let ll = leaderless_lipschitz_certificate(&base).unwrap();
    compare(&ll, &leaderless_oracle(&base), REL).unwrap();
    assert!((ll.get("rho_star").unwrap() / 2.0 - 1.787e-4).abs() < 1e-7);
    let lf = leader_follower_certificate(&base).unwrap();
    compare(&lf, &leader_follower_oracle(&base), REL).unwrap();
    let three = NetworkParams {
        num_agents: 3,
        tau_d: 0.5,
        ..base
    };
    compare(
        &nonexpansive_contraction_factors(&three).unwrap(),
        &contraction_oracle(&three),
        REL,
    )
    .unwrap();
}

fn params() -> impl Strategy<Value = NetworkParams> {
    (2usize..=4, 0.2f64..=1.0, 0.0f64..=1.0, 0.2f64..=1.0, 0.1f64..=1.0, 0.1f64..=1.0).prop_map(
        |(n, a_lo, frac, b, tau, window)| NetworkParams {
            num_agents: n,
            dim: 1,
            a_lo,
            a_hi: a_lo + frac * (1.0 - a_lo),
            b_lo: Some(b),
            tau_d: tau,
            window,
            lipschitz: Some(0.0),
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn factors_stay_in_unit_interval(p in params()) {
        let ll = leaderless_lipschitz_certificate(&p).unwrap();
        let beta_star = ll.get("beta_star").unwrap();
        let beta_tilde = ll.get("beta_tilde").unwrap();
        prop_assert!(beta_star > 0.0 && beta_star < 1.0);
        // 1 - beta_tilde can sit below one ulp of 1.0, so strictness is read
        // off the rate, which is computed from 1 - beta_tilde directly
        prop_assert!(beta_tilde > 0.0 && beta_tilde <= 1.0);
        prop_assert!(ll.get("rho_star").unwrap() > 0.0);
        let lf = leader_follower_certificate(&p).unwrap();
        let delta_n = lf.get("delta_N").unwrap();
        prop_assert!(delta_n > 0.0 && delta_n <= 1.0);
        prop_assert!(lf.get("rho_hat_star").unwrap() > 0.0);
        let c = nonexpansive_contraction_factors(&p).unwrap();
        for name in ["rho", "mu", "phi_N_minus_1", "rho_hat", "phi_hat_N_minus_1"] {
            let v = c.get(name).unwrap();
            prop_assert!(v > 0.0 && v < 1.0, "{name} = {v}");
        }
    }

    #[test]
    fn rho_star_non_increasing_in_n_and_t0(p in params(), extra in 0.0f64..1.0) {
        let rho = |q: &NetworkParams| {
            leaderless_lipschitz_certificate(q).unwrap().get("rho_star").unwrap()
        };
        if p.num_agents < 4 {
            let bigger = NetworkParams { num_agents: p.num_agents + 1, ..p };
            prop_assert!(rho(&bigger) <= rho(&p));
        }
        let longer = NetworkParams { window: p.window + extra, ..p };
        prop_assert!(rho(&longer) <= rho(&p));
    }

    #[test]
    fn satisfied_means_positive_rate(p in params(), frac in 0.0f64..3.0) {
        for cert in [
            leaderless_lipschitz_certificate(&p).unwrap(),
            leader_follower_certificate(&p).unwrap(),
        ] {
            let rate = cert.get("lambda").unwrap();
            let with_l = NetworkParams { lipschitz: Some(frac * rate / 2.0), ..p };
            let cert = if cert.get("rho_star").is_some() {
                leaderless_lipschitz_certificate(&with_l).unwrap()
            } else {
                leader_follower_certificate(&with_l).unwrap()
            };
            let lambda = cert.get("lambda").unwrap();
            let gamma = cert.get("gamma").unwrap();
            match cert.verdict {
                Verdict::Satisfied => {
                    prop_assert!(lambda > 0.0);
                    prop_assert!(gamma >= 1.0);
                    prop_assert_eq!(cert.envelope(), Some((gamma, lambda)));
                }
                Verdict::Violated => prop_assert!(lambda <= 0.0),
                Verdict::NotApplicable => prop_assert!(false, "unexpected not-applicable"),
            }
        }
    }
}
