use proptest::prelude::*;

use empower_core::capacity::{channel_capacity, Channel, InnerSettings};
use empower_core::config::{EnvironmentConfig, RunConfig, SweepConfig};
use empower_core::export::{trace_from_csv, trace_to_csv, ResultDocument};
use empower_core::random::{random_mdp, rng, RandomMdpSpec};
use empower_core::render::{render_pgm, render_svg, Legend};
use empower_core::solve::{solve, SolveSettings};
use empower_core::tradeoff::TradeoffConfig;
use empower_core::{GridWorld, Mdp};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mdp_json_round_trip(seed in any::<u64>()) {
        let mdp = random_mdp(&mut rng(seed), &RandomMdpSpec::default());
        prop_assert_eq!(Mdp::from_json(&mdp.to_json()).unwrap(), mdp);
    }

    #[test]
    fn result_document_round_trip(seed in any::<u64>(), alpha in 0.0..2.0f64, beta in 0.1..2.0f64) {
        let mdp = random_mdp(&mut rng(seed), &RandomMdpSpec::default());
        let res = solve(&mdp, &TradeoffConfig::empowered(alpha, beta).unwrap(), &SolveSettings::default()).unwrap();
        let doc = ResultDocument::from_result(&res, true);
        prop_assert_eq!(ResultDocument::from_json(&doc.to_json()).unwrap(), doc);
    }

    #[test]
    fn trace_csv_round_trip(trace in prop::collection::vec(0.0..1e3f64, 0..50)) {
        prop_assert_eq!(trace_from_csv(&trace_to_csv(&trace)).unwrap(), trace);
    }

    #[test]
    fn config_toml_round_trip(a in 0.0..5.0f64, b in 0.0..5.0f64, tol in 1e-9..1e-2f64) {
        let mut cfg = RunConfig::new(EnvironmentConfig::builtin("grid-b"), SweepConfig::single(a, b));
        cfg.solver.outer_tolerance = tol;
        cfg.dynamics.discount = Some(0.8);
        prop_assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn capacity_is_between_zero_and_log_inputs(rows in prop::collection::vec(prop::collection::vec(0.01..1.0f64, 3), 2..5)) {
        let rows: Vec<Vec<f64>> = rows
            .into_iter()
            .map(|r| { let t: f64 = r.iter().sum(); r.into_iter().map(|x| x / t).collect() })
            .collect();
        let ch = Channel::from_rows(&rows).unwrap();
        let c = channel_capacity(&ch, &InnerSettings::default()).unwrap().capacity;
        prop_assert!(c >= 0.0);
        prop_assert!(c <= (rows.len().min(3) as f64).ln() + 1e-12);
    }

    #[test]
    fn rendered_images_have_grid_shape(values in prop::collection::vec(-50.0..50.0f64, 1..2)) {
        let world = GridWorld::builtin("grid-a").unwrap();
        let l = &world.layout;
        let v: Vec<f64> = (0..l.n_states()).map(|s| values[0] * s as f64).collect();
        let pgm = render_pgm(&v, l, 2).unwrap();
        let body: String = pgm.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
        let mut tokens = body.split_whitespace();
        prop_assert_eq!(tokens.next(), Some("P2"));
        prop_assert_eq!(tokens.next().unwrap().parse::<usize>().unwrap(), 2 * l.width());
        prop_assert_eq!(tokens.next().unwrap().parse::<usize>().unwrap(), 2 * l.height());
        prop_assert_eq!(tokens.skip(1).count(), 4 * l.width() * l.height());
        let svg = render_svg(&v, l, 5).unwrap();
        prop_assert_eq!(svg.matches("<rect").count(), l.width() * l.height());
        let legend = Legend::of(&v);
        prop_assert_eq!(Legend::from_text(&legend.to_text()), Some(legend));
        prop_assert!(render_pgm(&v[1..], l, 2).is_err());
    }
}
