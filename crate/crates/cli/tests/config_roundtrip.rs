use fhgmc_cli::config::{parse_points, Command};
use fhgmc_cli::ExperimentConfig;
use fhgmc::hankel::Method;
use fhgmc::rmt::{Normalizer, Sampler};
use proptest::prelude::*;

const COMMANDS: [Command; 8] = [
    Command::Equilibrium,
    Command::Hankel,
    Command::CompareAsymptotics,
    Command::DiCheck,
    Command::RhpCheck,
    Command::Sample,
    Command::Gmc,
    Command::SecondMoment,
];

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, -1.0..1.0f64, Just(0.0), Just(1e-300), Just(-0.1)]
}

prop_compose! {
    fn configs()(
        cmd in 0..8usize,
        pot in prop::sample::select(vec!["gue", "t4", "t3t4", "quartic", "mono:0,0,2", "cheb:1,0,0.5"]),
        norm in any::<bool>(),
        points in prop::collection::vec((finite(), finite()), 0..4),
        smooth in prop::collection::vec(finite(), 0..5),
        t in finite(), s in finite(), h in finite(), beta in finite(),
        n in prop::collection::vec(0..200usize, 0..5),
        k in prop::option::of(0..100usize),
        m in 0..1000usize,
        seed in any::<u64>(),
        prec in 0..5000u32,
        samples in 0..100_000usize,
        flags in (any::<bool>(), any::<bool>(), 0..3usize),
        bump in (finite(), finite()),
        xs in prop::collection::vec(finite(), 0..6),
        grid in 0..1000usize,
        output in prop::option::of("[a-z/_.]{1,12}"),
        id in "[a-zA-Z0-9 _-]{0,10}",
    ) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(COMMANDS[cmd]);
        c.potential = pot.to_string();
        c.normalize_support = norm;
        c.points = points;
        c.smooth = smooth;
        c.t = t;
        c.s = s;
        c.h = h;
        c.beta = beta;
        c.n = n;
        c.k = k;
        c.m = m;
        c.seed = seed;
        c.precision_bits = prec;
        c.samples = samples;
        c.method = if flags.0 { Method::Direct } else { Method::Recurrence };
        c.sampler = if flags.1 { Sampler::Mcmc } else { Sampler::Tridiagonal };
        c.normalizer = [Normalizer::ExactHankel, Normalizer::Asymptotic, Normalizer::Auto][flags.2];
        c.bump = bump;
        c.xs = xs;
        c.grid = grid;
        c.output = output;
        c.config_id = id;
        c
    }
}

proptest! {
    #[test]
    fn toml_round_trip_is_identity(c in configs()) {
        let text = c.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn json_round_trip_is_identity(c in configs()) {
        let js = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&js).unwrap();
        prop_assert_eq!(back, c);
    }
}

#[test]
fn missing_fields_take_defaults() {
    let c = ExperimentConfig::from_toml("command = \"hankel\"").unwrap();
    assert_eq!(c, ExperimentConfig::new(Command::Hankel));
}

#[test]
fn points_parse() {
    assert_eq!(parse_points("0:1, -0.5:2").unwrap(), vec![(0.0, 1.0), (-0.5, 2.0)]);
    assert_eq!(parse_points("").unwrap(), vec![]);
    assert!(parse_points("0.5").is_err());
    assert!(parse_points("a:1").is_err());
}
