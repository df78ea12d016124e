use proptest::prelude::*;

use pilotplan::assignment::{chi, max_pilot_length, optimal_fixed_length, PilotAssignmentVector};
use pilotplan::channel::{asymptotic_rate, linear_rate_model};
use pilotplan::{TwoGroupConfig, Weight};

fn cells() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![9u64, 27, 81, 243])
}

proptest! {
    #[test]
    fn closed_form_is_valid(cells in cells(), users in 1u64..20, step in 0u64..1000) {
        let span = (max_pilot_length(users, cells) - users) / 2;
        let n = users + 2 * (step % (span + 1));
        let p = optimal_fixed_length(n, users, cells).unwrap();
        prop_assert!(p.is_valid());
        prop_assert_eq!(p.n_pil(), n);
        let k = chi(n, users, cells).unwrap();
        prop_assert!(p.entries()[k] > 0);
        prop_assert!(p.entries().iter().enumerate().all(|(i, &x)| x == 0 || i == k || i == k + 1));
    }

    #[test]
    fn scaled_validity_matches_rational_check(entries in prop::collection::vec(0u64..30, 3), users in 1u64..6) {
        let p = PilotAssignmentVector::new(entries.clone(), users, 27).unwrap();
        let sum: num_rational::Ratio<i64> =
            entries.iter().enumerate().map(|(i, &x)| num_rational::Ratio::new(x as i64, 3i64.pow(i as u32))).sum();
        let caps = entries.iter().enumerate().all(|(i, &x)| x <= users * 3u64.pow(i as u32));
        prop_assert_eq!(p.is_valid(), caps && sum == num_rational::Ratio::from_integer(users as i64));
    }

    #[test]
    fn fixed_length_sum_rate_is_concave_in_length(cells in cells(), users in 1u64..10, c0 in 0.5f64..8.0, slope in 0.5f64..9.0) {
        let rates = linear_rate_model(c0, slope, pilotplan::assignment::partition_depths(cells).unwrap()).unwrap();
        let values: Vec<f64> = pilotplan::assignment::pilot_lengths(users, cells)
            .map(|n| optimal_fixed_length(n, users, cells).unwrap().c_sum(&rates).unwrap())
            .collect();
        for w in values.windows(3) {
            prop_assert!(w[1] > w[0]);
            prop_assert!(w[2] - w[1] <= w[1] - w[0] + 1e-9);
        }
    }

    #[test]
    fn rho_properties(cells in cells(), users in 2i64..14, k1 in 1i64..13, wn in 51i64..99) {
        prop_assume!(k1 < users);
        let cfg = TwoGroupConfig::new(cells, users as u64, Weight::new(k1, users).unwrap(), Weight::new(wn, 100).unwrap()).unwrap();
        let mut prev = None;
        for t in cfg.totals() {
            let rho = cfg.rho(t).unwrap();
            prop_assert_eq!(rho, cfg.rho_closed_form(t).unwrap());
            let b = cfg.bounds(t).unwrap();
            prop_assert!(b.lower <= rho && rho <= b.upper);
            if let Some(p) = prev {
                prop_assert!(rho == p || rho == p + 2);
            }
            prev = Some(rho);
        }
    }

    #[test]
    fn rate_is_positive_and_scale_free(home in 1e-6f64..1.0, others in prop::collection::vec(1e-6f64..1.0, 1..20), c in 1e-3f64..1e3) {
        let r = asymptotic_rate(home, &others).unwrap();
        prop_assert!(r > 0.0);
        let scaled: Vec<f64> = others.iter().map(|b| b * c).collect();
        prop_assert!((asymptotic_rate(home * c, &scaled).unwrap() - r).abs() < 1e-9 * r.max(1.0));
    }

    #[test]
    fn weight_text_round_trips(n in 0i64..1000, d in 1i64..1000) {
        let w = Weight::new(n, d).unwrap();
        prop_assert_eq!(w.to_string().parse::<Weight>().unwrap(), w);
    }
}
