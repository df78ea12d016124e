use pilotplan::channel::linear_rate_model;
use pilotplan::oracle::approx_eq;
use pilotplan::{TwoGroupConfig, Weight};

const OMEGAS: [(i64, i64); 6] = [(1, 2), (3, 5), (7, 10), (3, 4), (4, 5), (9, 10)];

/// Every configuration of the test grid: L in {9, 27, 81}, K <= 12, every
/// split of K, six weights.
fn grid() -> Vec<TwoGroupConfig> {
    let mut out = Vec::new();
    for cells in [9, 27, 81] {
        for users in 2..=12i64 {
            for k1 in 1..users {
                for (n, d) in OMEGAS {
                    let alpha = Weight::new(k1, users).unwrap();
                    out.push(TwoGroupConfig::new(cells, users as u64, alpha, Weight::new(n, d).unwrap()).unwrap());
                }
            }
        }
    }
    out
}

fn label(cfg: &TwoGroupConfig) -> String {
    format!("L={} K1={} K2={} w={}", cfg.cells(), cfg.k1(), cfg.k2(), cfg.omega())
}

#[test]
fn closed_form_rho_matches_search() {
    for cfg in grid() {
        for t in cfg.totals() {
            assert_eq!(cfg.rho(t).unwrap(), cfg.rho_closed_form(t).unwrap(), "{} T={t}", label(&cfg));
        }
    }
}

#[test]
fn rho_steps_by_zero_or_two() {
    for cfg in grid() {
        let rho: Vec<u64> = cfg.totals().map(|t| cfg.rho(t).unwrap()).collect();
        for w in rho.windows(2) {
            assert!(w[1] == w[0] || w[1] == w[0] + 2, "{}: {rho:?}", label(&cfg));
        }
    }
}

#[test]
fn rho_and_mu_bracket_feasible_splits() {
    for cfg in grid() {
        for t in cfg.totals() {
            let b = cfg.bounds(t).unwrap();
            let rho = cfg.rho(t).unwrap();
            assert!(b.lower <= rho && rho <= b.upper);
            if cfg.has_integral_log_weight() {
                let mu = cfg.mu(t).unwrap();
                assert!(rho <= mu && mu <= b.upper, "{} T={t}", label(&cfg));
            } else {
                assert!(cfg.mu(t).is_err());
            }
        }
    }
}

#[test]
fn one_step_gain_matches_delta() {
    for c0 in [2.0, 5.5] {
        for cfg in grid() {
            let rates = linear_rate_model(c0, 6.0, cfg.depths()).unwrap();
            let totals: Vec<u64> = cfg.totals().collect();
            for w in totals.windows(2) {
                let gain = cfg.wsr_bar(w[1], &rates).unwrap() - cfg.wsr_bar(w[0], &rates).unwrap();
                let delta = cfg.delta(w[0], &rates).unwrap();
                assert!(delta > 0.0);
                assert!(approx_eq(gain, delta), "{} T={}: {gain} vs {delta}", label(&cfg), w[0]);
            }
            assert!(cfg.delta(cfg.max_total(), &rates).is_err());
        }
    }
}

#[test]
fn neighboring_split_difference_identity() {
    for cfg in grid() {
        let rates = linear_rate_model(2.0, 6.0, cfg.depths()).unwrap();
        let w = cfg.omega().to_f64();
        let f = |t: u64, total: u64| {
            let p1 = pilotplan::assignment::optimal_fixed_length(t, cfg.k1(), cfg.cells()).unwrap();
            let p2 = pilotplan::assignment::optimal_fixed_length(total - t, cfg.k2(), cfg.cells()).unwrap();
            cfg.c_wsr(&p1, &p2, &rates).unwrap()
        };
        for total in cfg.totals() {
            for t in cfg.bounds(total).unwrap().s1() {
                let chi = pilotplan::assignment::chi(t, cfg.k1(), cfg.cells()).unwrap();
                let g = cfg.g(t, total).unwrap().to_f64();
                let lhs = f(t, total) - f(t + 2, total);
                let rhs = 6.0 * w * 3f64.powi(-(chi as i32)) * (g - 1.0);
                let scale = lhs.abs().max(rhs.abs()).max(f(t, total));
                assert!((lhs - rhs).abs() <= 1e-9 * scale, "{} T={total} t={t}: {lhs} vs {rhs}", label(&cfg));
            }
        }
    }
}

#[test]
fn thresholds_match_direct_crossings() {
    for cfg in grid().into_iter().filter(|c| c.cells() <= 27) {
        let rates = linear_rate_model(2.0, 6.0, cfg.depths()).unwrap();
        let th = cfg.thresholds(&rates).unwrap();
        assert_eq!(th.values.len(), cfg.n_levels() + 2);
        assert_eq!(th.values[0], 0.0);
        assert_eq!(*th.values.last().unwrap(), f64::INFINITY);
        let k = cfg.users() as f64;
        for (n, total) in cfg.totals().take(cfg.n_levels()).enumerate() {
            let (a, b) = (cfg.wsr_bar(total, &rates).unwrap(), cfg.wsr_bar(total + 2, &rates).unwrap());
            let t = total as f64;
            let crossing = ((t + 2.0) * b - t * a) / (b - a) / k;
            assert!(approx_eq(crossing, th.values[n + 1]), "{} n={}", label(&cfg), n + 1);
        }
    }
}

#[test]
fn optimal_total_grows_with_coherence_time() {
    for cfg in grid().into_iter().filter(|c| c.cells() == 27 && c.users() <= 6) {
        let rates = linear_rate_model(2.0, 6.0, cfg.depths()).unwrap();
        let th = cfg.thresholds(&rates).unwrap();
        if !th.is_nondecreasing() {
            continue;
        }
        let mut last = 0;
        for step in 1..400 {
            let n_coh = step as f64 * 0.5;
            let sol = cfg.optimize_with(n_coh, &rates, &th).unwrap();
            assert!(sol.total >= last);
            last = sol.total;
        }
    }
}
