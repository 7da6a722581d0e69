#![allow(dead_code)]

use std::f64::consts::PI;

use b2quad::systems::{system, SystemId, SystemParams};
use b2quad::{CoeffPair, Coefficient, QuadConfig};

pub fn sin_coeffs() -> CoeffPair {
    CoeffPair::new(
        Coefficient::sinusoid(0.8, 2.0, 0.3, 0.2),
        Coefficient::sinusoid(0.5, 3.0, -0.4, 0.1),
    )
}

pub fn quad() -> QuadConfig {
    QuadConfig::with_tolerances(1e-13, 1e-12)
}

pub struct Case {
    pub label: String,
    pub id: SystemId,
    pub params: SystemParams,
    pub state: Vec<f64>,
}

fn case(label: &str, id: SystemId, params: SystemParams, state: &[f64]) -> Case {
    Case {
        label: label.to_string(),
        id,
        params,
        state: state.to_vec(),
    }
}

/// One representative problem per exact solver.
pub fn solver_cases() -> Vec<Case> {
    use SystemId::*;
    vec![
        case("canonical", CanonicalB2, SystemParams::default(), &[1.0, 0.5]),
        case("Bernoulli polar n=3", BernoulliPolar, SystemParams::with_n(3.0), &[1.0, PI / 8.0]),
        case("Bernoulli polar n=2.5", BernoulliPolar, SystemParams::with_n(2.5), &[0.8, 0.5]),
        case("Bernoulli Cartesian n=2 (quadratic map)", BernoulliCartesianN2, SystemParams::default(), &[0.6, 0.4]),
        case("Bernoulli Cartesian n=2", BernoulliCartesian, SystemParams::with_n(2.0), &[0.6, 0.4]),
        case("Bernoulli Cartesian n=3", BernoulliCartesian, SystemParams::with_n(3.0), &[0.6, 0.4]),
        case("Bernoulli Cartesian n=4", BernoulliCartesian, SystemParams::with_n(4.0), &[0.6, 0.4]),
        case("Bernoulli variant n=3", BernoulliVariantPolar, SystemParams::with_n(3.0), &[1.0, 0.2]),
        case("deformed canonical z=0.5", DeformedCanonical, SystemParams::with_z(0.5), &[0.5, 0.2]),
        case("deformed canonical linearized", DeformedCanonicalLinearized, SystemParams::default(), &[0.8, 0.2]),
        case("order-1 z=0.3", ApproxOrder1, SystemParams::with_z(0.3), &[0.5, 0.2]),
        case("order-2 z=0.3", ApproxOrder2, SystemParams::with_z(0.3), &[0.5, 0.2]),
        case("order-k k=3 z=0.3", ApproxOrderK, SystemParams::with_zk(0.3, 3), &[0.5, 0.2]),
        case("deformed Bernoulli n=3 z=0.2", DeformedBernoulli, SystemParams::with_nz(3.0, 0.2), &[0.7, PI / 8.0]),
        case("two-copy canonical", TwocopyCanonical, SystemParams::default(), &[0.1, 0.2, 0.3, 0.4]),
        case("two-particle z=0.5", DeformedTwoparticle, SystemParams::with_z(0.5), &[0.1, 0.2, 0.3, 0.4]),
        case("two-particle linearized", DeformedTwoparticleLinearized, SystemParams::default(), &[1.1, 0.2, 0.9, 0.4]),
        case("coupled (1,1,-1,2)", CoupledBernoulli, SystemParams::power(1.0, 1.0, -1.0, 2.0), &[0.7, 1.3]),
        case("deformed coupled (1,1,-1,2)", DeformedCoupledBernoulli, SystemParams::power(1.0, 1.0, -1.0, 2.0), &[0.7, 1.3]),
        case("deformed coupled special q=1", DeformedCoupledSpecial, SystemParams::with_q(1.0), &[0.7, 1.3]),
    ]
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn rhs(case: &Case, coeffs: &CoeffPair, t: f64, s: &[f64]) -> Vec<f64> {
    system(case.id, &case.params, coeffs).unwrap().rhs(t, s)
}
