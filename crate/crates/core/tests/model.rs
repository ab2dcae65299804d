mod common;

use common::{rel_err, TestRng};
use proptest::prelude::*;
use twoway_impair::model::{
    optimal_split, relaying_gain, relaying_gain_asymptotic, sndr, sndr_asymptotic, sndr_ceiling, sndr_closed_form,
    sndr_via_gain, Direction, HighPowerRegime, ImpairmentPair, SystemConfig,
};

fn config_strategy() -> impl Strategy<Value = SystemConfig> {
    let power = -2.0f64..6.0;
    let noise = -2.0f64..1.0;
    let omega = -1.0f64..1.0;
    (
        (power.clone(), power.clone(), power),
        (noise.clone(), noise.clone(), noise),
        (omega.clone(), omega),
        (0.0f64..0.4, 0.0f64..0.4),
    )
        .prop_map(|((p1, p2, p3), (n1, n2, n3), (o1, o2), (kt, kr))| SystemConfig {
            p1: 10f64.powf(p1),
            p2: 10f64.powf(p2),
            p3: 10f64.powf(p3),
            n1: 10f64.powf(n1),
            n2: 10f64.powf(n2),
            n3: 10f64.powf(n3),
            omega1: 10f64.powf(o1),
            omega2: 10f64.powf(o2),
            relay: ImpairmentPair::new(kt, kr).unwrap(),
            assumed_kappa_r: None,
        })
}

fn rho() -> impl Strategy<Value = f64> {
    (-4.0f64..2.0).prop_map(|e| 10f64.powf(e))
}

fn direction() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::T1), Just(Direction::T2)]
}

fn swapped(cfg: &SystemConfig) -> SystemConfig {
    SystemConfig {
        p1: cfg.p2,
        p2: cfg.p1,
        n1: cfg.n2,
        n2: cfg.n1,
        omega1: cfg.omega2,
        omega2: cfg.omega1,
        ..*cfg
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn gain_and_closed_form_routes_agree(cfg in config_strategy(), dir in direction(), r1 in rho(), r2 in rho()) {
        let closed = sndr_closed_form(&cfg, dir, r1, r2);
        let via_gain = sndr_via_gain(&cfg, dir, r1, r2, relaying_gain(&cfg, r1, r2));
        prop_assert!(rel_err(via_gain, closed) <= 1e-12, "{via_gain} vs {closed}");
    }

    #[test]
    fn sndr_stays_below_ceiling(cfg in config_strategy(), dir in direction(), r1 in rho(), r2 in rho()) {
        let c = cfg.c();
        prop_assume!(c > 0.0);
        let ceiling = sndr_ceiling(c).unwrap();
        prop_assert!(sndr(&cfg, dir, r1, r2) < ceiling);
        prop_assert!(sndr_asymptotic(dir, r1, r2, c).unwrap() < ceiling);
    }

    #[test]
    fn sndr_nonincreasing_in_each_kappa(
        cfg in config_strategy(),
        dir in direction(),
        r1 in rho(),
        r2 in rho(),
        dt in 0.0f64..0.2,
        dr in 0.0f64..0.2,
    ) {
        let base = sndr(&cfg, dir, r1, r2);
        let mut worse_t = cfg;
        worse_t.relay.kappa_t += dt;
        let mut worse_r = cfg;
        worse_r.relay.kappa_r += dr;
        prop_assert!(sndr(&worse_t, dir, r1, r2) <= base);
        prop_assert!(sndr(&worse_r, dir, r1, r2) <= base);
    }

    #[test]
    fn swapping_terminals_swaps_directions(cfg in config_strategy(), r1 in rho(), r2 in rho()) {
        let mirror = swapped(&cfg);
        prop_assert_eq!(sndr(&cfg, Direction::T1, r1, r2), sndr(&mirror, Direction::T2, r2, r1));
        prop_assert_eq!(sndr(&cfg, Direction::T2, r1, r2), sndr(&mirror, Direction::T1, r2, r1));
    }

    #[test]
    fn zero_channel_gives_zero_sndr(cfg in config_strategy(), dir in direction(), r in rho()) {
        prop_assert_eq!(sndr(&cfg, dir, 0.0, r), 0.0);
        prop_assert_eq!(sndr(&cfg, dir, r, 0.0), 0.0);
    }

    #[test]
    fn asymptotic_gain_scales_with_inverse_root_tau(tau in 0.1f64..10.0, r1 in rho(), r2 in rho(), kr in 0.0f64..0.4) {
        let g = relaying_gain_asymptotic(HighPowerRegime::new(tau).unwrap(), r1, r2, kr);
        let g2 = relaying_gain_asymptotic(HighPowerRegime::new(2.0 * tau).unwrap(), r1, r2, kr);
        prop_assert!(rel_err(g2 * 2f64.sqrt(), g) <= 1e-14);
    }
}

#[test]
fn ideal_hardware_has_no_quadratic_terms() {
    // with c = 0 the denominator is affine in (rho_i, rho_ri)
    let cfg = SystemConfig::symmetric(10.0, 1.0, 1.0, ImpairmentPair::IDEAL);
    let mut rng = TestRng::new(3);
    for _ in 0..100 {
        let r1 = rng.log_range(1e-3, 10.0);
        let r2 = rng.log_range(1e-3, 10.0);
        for dir in Direction::BOTH {
            let (ri, rri) = dir.select(r1, r2);
            let denom = ri * rri / sndr(&cfg, dir, r1, r2);
            let a = cfg.n3 / cfg.power(dir.partner()) + cfg.power(dir.receiver()) / cfg.power(dir.partner())
                * cfg.noise(dir.receiver())
                / cfg.p3;
            let b = cfg.noise(dir.receiver()) / cfg.p3;
            let c0 = cfg.noise(dir.receiver()) * cfg.n3 / (cfg.power(dir.partner()) * cfg.p3);
            assert!(rel_err(denom, a * ri + b * rri + c0) < 1e-13);
        }
    }
}

#[test]
fn high_power_convergence() {
    let relay = ImpairmentPair::new(0.1, 0.1).unwrap();
    let cfg = SystemConfig::symmetric(1e10, 2.0, 1.0, relay);
    let regime = HighPowerRegime::new(2.0).unwrap();
    let mut rng = TestRng::new(17);
    let mut worst_sndr: f64 = 0.0;
    let mut worst_gain: f64 = 0.0;
    for _ in 0..10_000 {
        let r1 = -cfg.omega1 * (1.0 - rng.uniform()).ln();
        let r2 = -cfg.omega2 * (1.0 - rng.uniform()).ln();
        for dir in Direction::BOTH {
            let exact = sndr(&cfg, dir, r1, r2);
            let limit = sndr_asymptotic(dir, r1, r2, cfg.c()).unwrap();
            worst_sndr = worst_sndr.max((exact - limit).abs() / limit);
        }
        let g = relaying_gain(&cfg, r1, r2);
        let g_inf = relaying_gain_asymptotic(regime, r1, r2, relay.kappa_r);
        worst_gain = worst_gain.max(rel_err(g, g_inf));
    }
    assert!(worst_sndr <= 1e-3, "worst SNDR gap {worst_sndr:e}");
    assert!(worst_gain <= 1e-3, "worst gain gap {worst_gain:e}");
}

#[test]
fn equal_split_minimizes_c_on_grid() {
    let best = (0..=20)
        .map(|k| {
            let kt = k as f64 * 0.01;
            let kr = 0.2 - kt;
            (k, ImpairmentPair::new(kt, kr.max(0.0)).unwrap().c())
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert_eq!(best.0, 10);
    let split = optimal_split(0.2).unwrap();
    assert!((split.c() - 0.0201).abs() < 1e-15);
    assert!(split.c() < ImpairmentPair::new(0.0, 0.2).unwrap().c());
}

#[test]
fn gain_mismatch_changes_only_the_gain_route() {
    let relay = ImpairmentPair::new(0.1, 0.2).unwrap();
    let matched = SystemConfig::symmetric(100.0, 1.0, 1.0, relay);
    let mut over = matched;
    over.assumed_kappa_r = Some(0.4);
    let mut under = matched;
    under.assumed_kappa_r = Some(0.0);
    let mut rng = TestRng::new(5);
    for _ in 0..200 {
        let r1 = rng.log_range(1e-2, 10.0);
        let r2 = rng.log_range(1e-2, 10.0);
        for dir in Direction::BOTH {
            let base = sndr(&matched, dir, r1, r2);
            let g = relaying_gain(&over, r1, r2);
            assert_eq!(sndr(&over, dir, r1, r2), sndr_via_gain(&over, dir, r1, r2, g));
            // a smaller gain only scales down the forwarded signal relative to terminal noise
            assert!(sndr(&over, dir, r1, r2) <= base);
            assert!(sndr(&under, dir, r1, r2) >= base);
        }
    }
}
