use adgame_core::equilibrium::{self, best_response_cutoff, EquilibriumKind};
use adgame_core::metrics;
use adgame_core::model::{epsilon_from_q, q_from_epsilon, prior_t1};
use adgame_core::numeric::QuadConfig;
use adgame_core::posterior::{posterior, posterior_with, CutoffMasses};
use adgame_core::pricing::{discriminatory_price, discriminatory_revenue, monopoly_price};
use adgame_core::{AdvertiserStrategy, Epsilon, Game, GameParams, TypeModel, ValueDistribution};
use proptest::prelude::*;

fn dist() -> impl Strategy<Value = ValueDistribution> {
    prop_oneof![
        Just(ValueDistribution::Uniform01),
        (-3.0f64..3.0)
            .prop_filter("nonzero", |l| l.abs() > 0.05)
            .prop_map(|l| ValueDistribution::trunc_exp(l).unwrap()),
        (1.0f64..3.0).prop_map(|k| ValueDistribution::power(k).unwrap()),
    ]
}

fn types() -> impl Strategy<Value = TypeModel> {
    prop_oneof![
        Just(TypeModel::Identity),
        (0.02f64..0.9).prop_map(|t| TypeModel::step(t).unwrap()),
        (0.0f64..0.5, 0.05f64..0.5).prop_map(|(a, b)| TypeModel::affine(a, b).unwrap()),
    ]
}

fn game() -> impl Strategy<Value = Game> {
    (dist(), types(), 0.05f64..1.5, 0.05f64..0.95)
        .prop_map(|(d, g, delta, eta)| Game::new(d, g, GameParams::with_eta(delta, eta).unwrap()))
}

fn builtin_models() -> Vec<(ValueDistribution, TypeModel)> {
    vec![
        (ValueDistribution::Uniform01, TypeModel::Identity),
        (ValueDistribution::Uniform01, TypeModel::step(0.05).unwrap()),
        (ValueDistribution::trunc_exp(1.0).unwrap(), TypeModel::Identity),
    ]
}

fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    h(p) + h(1.0 - p)
}

#[test]
fn posteriors_monotone_in_q_on_builtin_models() {
    for (d, g) in builtin_models() {
        for v_star in [0.0, 0.1, 0.25, 0.5, 0.77, 1.0] {
            let mut last = posterior(&d, &g, v_star, 0.5).unwrap();
            for i in 1..=100 {
                let q = 0.5 + 0.5 * i as f64 / 100.0;
                let p = posterior(&d, &g, v_star, q).unwrap();
                assert!(p.r1 >= last.r1 - 1e-12, "r1 fell at v*={v_star}, q={q}");
                assert!(p.r0 <= last.r0 + 1e-12, "r0 rose at v*={v_star}, q={q}");
                last = p;
            }
        }
    }
}

#[test]
fn reflection_holds_at_support_edges() {
    for (d, g) in builtin_models() {
        for v_star in [0.0, 1.0] {
            let m = CutoffMasses::compute(&d, &g, v_star, QuadConfig::default()).unwrap();
            for i in 0..=100 {
                let q = i as f64 / 100.0;
                assert!((m.at(q).r0 - m.at(1.0 - q).r1).abs() < 1e-10, "v*={v_star}, q={q}");
            }
        }
    }
}

#[test]
fn builtin_distributions_validate() {
    for (d, g) in builtin_models() {
        let params = GameParams::with_eta(1.0, 0.5).unwrap();
        for n in [256, 1024, 4096] {
            let report = Game::new(d.clone(), g.clone(), params).validate(n);
            assert!(report.is_ok(), "{:?}", report.violations);
        }
    }
}

#[test]
fn epsilon_round_trip_in_q_space() {
    for i in 0..=3600 {
        let eps = i as f64 / 100.0;
        let q = q_from_epsilon(Epsilon::Finite(eps)).unwrap();
        let back = q_from_epsilon(epsilon_from_q(q).unwrap()).unwrap();
        assert!((back - q).abs() <= 1e-9, "eps={eps}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn epsilon_round_trip(eps in 0.0f64..12.0) {
        let q = q_from_epsilon(Epsilon::Finite(eps)).unwrap();
        match epsilon_from_q(q).unwrap() {
            Epsilon::Finite(back) => prop_assert!((back - eps).abs() <= 1e-9),
            Epsilon::Infinite => prop_assert!(false),
        }
    }

    #[test]
    fn posterior_identities(g in game(), v_star in 0.0f64..1.0, q in 0.5f64..1.0) {
        let m = CutoffMasses::compute(&g.dist, &g.types, v_star, QuadConfig::default()).unwrap();
        let prior = prior_t1(&g.dist, &g.types).unwrap();
        let p = m.at(q);
        prop_assert!(p.r1 >= p.r0 - 1e-12);
        prop_assert!((p.p_sig1 * p.r1 + p.p_sig0 * p.r0 - prior).abs() < 1e-10);
        prop_assert!((p.r0 - m.at(1.0 - q).r1).abs() < 1e-10);
        prop_assert!((m.at(1.0 - q).r0 - p.r1).abs() < 1e-10);
        let fine = posterior_with(&g.dist, &g.types, v_star, q, QuadConfig::default().tightened(1e-2)).unwrap();
        prop_assert!((fine.r1 - p.r1).abs() < 1e-9 && (fine.r0 - p.r0).abs() < 1e-9);
    }

    #[test]
    fn posteriors_monotone(g in game(), v_star in 0.0f64..1.0, q in 0.5f64..0.99, dq in 0.0f64..0.01) {
        let m = CutoffMasses::compute(&g.dist, &g.types, v_star, QuadConfig::default()).unwrap();
        let (a, b) = (m.at(q), m.at(q + dq));
        prop_assert!(b.r1 >= a.r1 - 1e-12);
        prop_assert!(b.r0 <= a.r0 + 1e-12);
    }

    #[test]
    fn prior_stable_under_refinement(d in dist(), t in types()) {
        let a = prior_t1(&d, &t).unwrap();
        let b = adgame_core::model::prior_t1_with(&d, &t, QuadConfig::default().tightened(1e-2)).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn pricing_orderings(d in dist(), delta in 0.05f64..1.5, q in 0.5f64..0.99, dq in 0.0f64..0.01) {
        let p_m = monopoly_price(&d).unwrap();
        let a = discriminatory_price(&d, delta, q).unwrap();
        let b = discriminatory_price(&d, delta, q + dq).unwrap();
        prop_assert!(b.p1 >= a.p1 - 1e-10);
        prop_assert!(b.v_star <= a.v_star + 1e-10);
        prop_assert!(a.v_star <= p_m + 1e-10 && p_m <= a.p1 + 1e-10);
    }

    #[test]
    fn discriminatory_price_is_revenue_optimal(d in dist(), delta in 0.05f64..1.5, q in 0.5f64..1.0) {
        let s = discriminatory_price(&d, delta, q).unwrap();
        let best = discriminatory_revenue(&d, delta, q, s.p1);
        let hi = 1.0 + (2.0 * q - 1.0) * delta;
        let n = 20_000;
        for i in 0..=n {
            let p = hi * i as f64 / n as f64;
            prop_assert!(discriminatory_revenue(&d, delta, q, p) <= best + 1e-9);
        }
    }

    #[test]
    fn classification_invariants(g in game(), q in 0.5f64..1.0) {
        let pts = equilibrium::classify(&g, q).unwrap();
        let has = |k| pts.iter().any(|p| p.kind == k);
        prop_assert!(!(has(EquilibriumKind::UniformA) && has(EquilibriumKind::UniformB)));
        for p in &pts {
            prop_assert!(p.self_check(&g).unwrap());
            let br = best_response_cutoff(&g.params, p.kind.strategy(), p.price, q);
            prop_assert!(br.certified);
            prop_assert!((br.cutoff - p.cutoff).abs() < 1e-12);
        }
        if has(EquilibriumKind::Discriminatory) && has(EquilibriumKind::UniformA) {
            let p_m = monopoly_price(&g.dist).unwrap();
            let d = pts.iter().find(|p| p.kind == EquilibriumKind::Discriminatory).unwrap();
            prop_assert!(d.price > p_m && d.cutoff < p_m);
        }
    }

    #[test]
    fn full_privacy_has_one_uniform_kind(g in game()) {
        let pts = equilibrium::classify(&g, 0.5).unwrap();
        prop_assert_eq!(pts.len(), 1);
        let prior = prior_t1(&g.dist, &g.types).unwrap();
        let eta = g.params.eta();
        let kind = pts[0].kind;
        if prior > eta + 1e-9 {
            prop_assert_eq!(kind, EquilibriumKind::UniformA);
        } else if prior < eta - 1e-9 {
            prop_assert_eq!(kind, EquilibriumKind::UniformB);
        } else {
            prop_assert!(pts[0].boundary_flag);
        }
    }

    #[test]
    fn best_response_certified(delta in 0.05f64..2.0, price in -0.5f64..2.5, q in 0.5f64..1.0, s in 0usize..3) {
        let params = GameParams::with_eta(delta, 0.5).unwrap();
        let strategy = [AdvertiserStrategy::Discriminatory, AdvertiserStrategy::AlwaysA, AdvertiserStrategy::AlwaysB][s];
        prop_assert!(best_response_cutoff(&params, strategy, price, q).certified);
    }

    #[test]
    fn coexistence_orderings(g in game(), q in 0.5f64..1.0) {
        let pts = equilibrium::classify(&g, q).unwrap();
        let Some(d) = pts.iter().find(|p| p.kind == EquilibriumKind::Discriminatory) else { return Ok(()) };
        let md = metrics::evaluate(&g, d).unwrap();
        for u in pts.iter().filter(|p| p.kind != EquilibriumKind::Discriminatory) {
            let mu = metrics::evaluate(&g, u).unwrap();
            prop_assert!(md.advertiser_utility >= mu.advertiser_utility - 1e-9);
            if u.kind == EquilibriumKind::UniformA {
                prop_assert!(mu.consumer_surplus > md.consumer_surplus);
                prop_assert!(md.seller_profit > mu.seller_profit);
            } else {
                prop_assert!(md.consumer_surplus >= mu.consumer_surplus - 1e-12);
            }
        }
    }

    #[test]
    fn mutual_information_bounds(g in game(), v_star in 0.0f64..1.0, q in 0.5f64..1.0) {
        let mi = metrics::mutual_information(&g.dist, &g.types, v_star, q).unwrap();
        let p = posterior(&g.dist, &g.types, v_star, q).unwrap();
        prop_assert!((0.0..=1.0).contains(&mi));
        prop_assert!(mi <= binary_entropy(p.p_sig1) + 1e-12);
    }

    #[test]
    fn welfare_derivative_matches_finite_difference(d in dist(), delta in 0.05f64..1.0, q in 0.52f64..0.98) {
        let g = Game::new(d, TypeModel::Identity, GameParams::with_eta(delta, 0.5).unwrap());
        let s = discriminatory_price(&g.dist, delta, q).unwrap();
        // the corner kink makes the finite difference meaningless nearby
        prop_assume!(!s.corner_flag && s.v_star > 1e-3);
        let h = 1e-4;
        let fd = (metrics::discriminatory_surplus(&g, q + h).unwrap() - metrics::discriminatory_surplus(&g, q - h).unwrap()) / (2.0 * h);
        let exact = metrics::cs_derivative(&g.dist, &g.params, q).unwrap();
        prop_assert!((fd - exact).abs() < 1e-6, "fd {} exact {}", fd, exact);
    }
}
