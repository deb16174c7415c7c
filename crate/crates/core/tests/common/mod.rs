#![allow(dead_code)]

use equideg::config::RunConfig;
use equideg::map::EquivariantLocalMap;
use equideg::poly::Polynomial;
use equideg::scalar::Q;
use equideg::Analysis;
use num_traits::One;

pub const S1: &str = include_str!("../../scenarios/s1_classical.toml");
pub const S2: &str = include_str!("../../scenarios/s2_odd_line.toml");
pub const S3: &str = include_str!("../../scenarios/s3_reflection_disc.toml");
pub const S4: &str = include_str!("../../scenarios/s4_rotation_annulus.toml");
pub const S5: &str = include_str!("../../scenarios/s5_dihedral_annulus.toml");

pub struct Scenario {
    pub name: &'static str,
    pub config: RunConfig,
    pub analysis: Analysis,
    pub map: EquivariantLocalMap,
}

pub fn scenario(name: &'static str, text: &str) -> Scenario {
    let config = RunConfig::from_toml(text).expect("scenario parses");
    let analysis = config.analysis().expect("scenario analysis");
    let map = config.build_map(&analysis).expect("scenario map").expect("map present");
    Scenario {
        name,
        config,
        analysis,
        map,
    }
}

pub fn all() -> Vec<Scenario> {
    vec![
        scenario("S1", S1),
        scenario("S2", S2),
        scenario("S3", S3),
        scenario("S4", S4),
        scenario("S5", S5),
    ]
}

/// Complex polynomial pair `(re, im)` in `x1, x2`.
pub type Cx = (Polynomial, Polynomial);

pub fn cx_mul(a: &Cx, b: &Cx) -> Cx {
    (&(&a.0 * &b.0) - &(&a.1 * &b.1), &(&a.0 * &b.1) + &(&a.1 * &b.0))
}

/// `z − c` or its conjugate `z̄ − c̄`.
pub fn cx_linear(c: (Q, Q), conjugate: bool) -> Cx {
    let re = &Polynomial::var(2, 0) - &Polynomial::constant(2, c.0);
    let im = &Polynomial::var(2, 1) - &Polynomial::constant(2, c.1);
    if conjugate {
        (re, -&im)
    } else {
        (re, im)
    }
}

pub fn cx_one() -> Cx {
    (Polynomial::constant(2, Q::one()), Polynomial::zero(2))
}
