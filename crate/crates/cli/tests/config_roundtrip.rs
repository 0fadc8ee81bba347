use std::path::PathBuf;

use proptest::prelude::*;
use rotbec_cli::config::{ConvergeConfig, Frame, InitialCondition, OutputConfig, RunConfig};

fn positive() -> impl Strategy<Value = f64> {
    (1e-6..1e3f64).prop_filter("non-zero", |v| *v > 0.0)
}

fn path() -> impl Strategy<Value = PathBuf> {
    "[a-z][a-z0-9_/]{0,12}\\.[a-z]{3}".prop_map(PathBuf::from)
}

fn initial() -> impl Strategy<Value = InitialCondition> {
    prop_oneof![
        Just(InitialCondition::GaussianPair),
        Just(InitialCondition::SingleVortex),
        Just(InitialCondition::VortexPair),
        path().prop_map(InitialCondition::Dump),
    ]
}

fn config() -> impl Strategy<Value = RunConfig> {
    let geometry = (2usize..=3).prop_flat_map(|dim| {
        (
            prop::collection::vec((-50.0..0.0f64, 0.1..50.0f64), dim),
            prop::collection::vec((2usize..300).prop_map(|c| 2 * c), dim),
            prop::collection::vec(positive(), dim),
            prop::collection::vec(positive(), dim),
        )
    });
    let time = (positive(), -1.0..100.0f64, 0usize..10_000);
    let model = (-2.0..2.0f64, -5.0..5.0f64, prop::array::uniform3(-1e3..1e3f64));
    let output = (path(), path(), prop::collection::vec(-1.0..100.0f64, 0..4), any::<bool>());
    let converge = (
        prop::collection::vec(positive(), 0..5),
        prop::option::of(positive()),
        prop::collection::vec(positive(), 0..5),
        prop::option::of(positive()),
        prop::option::of(0.0..10.0f64),
    );
    (geometry, time, model, initial(), output, converge).prop_map(
        |((bounds, cells, g1, g2), (dt, t_end, every), (omega, lambda, b), initial, out, conv)| RunConfig {
            domain: bounds.into_iter().map(|(lo, len)| (lo, lo + len)).collect(),
            cells,
            dt,
            t_end,
            sample_every: every,
            omega,
            lambda,
            beta: [[b[0], b[1]], [b[1], b[2]]],
            traps: [g1, g2],
            initial,
            output: OutputConfig {
                timeseries: out.0,
                dump_prefix: out.1,
                dump_times: out.2,
                frame: if out.3 { Frame::Eulerian } else { Frame::Lagrangian },
            },
            converge: ConvergeConfig {
                dt_ladder: conv.0,
                dt_reference: conv.1,
                h_ladder: conv.2,
                h_reference: conv.3,
                t_end: conv.4,
            },
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalized_form_round_trips(c in config()) {
        let text = c.to_text();
        let parsed = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &c);
        prop_assert_eq!(parsed.to_text(), text);
    }

    #[test]
    fn normalizing_user_text_is_idempotent(
        h in prop::sample::select(vec!["1/2", "1/4", "1/8", "0.25"]),
        dt in prop::sample::select(vec!["1e-3", "pi/3000", "1/40"]),
        omega in -1.0..1.0f64,
        preset in prop::sample::select(vec!["sec51", "sec52-case-i", "sec53-case-b"]),
    ) {
        let text = format!("# user file\npreset = {preset}\n\ngrid.h = {h}\ntime.dt = {dt}\nomega = {omega}\n");
        let once = RunConfig::parse(&text).unwrap().to_text();
        let twice = RunConfig::parse(&once).unwrap().to_text();
        prop_assert_eq!(once, twice);
    }
}
