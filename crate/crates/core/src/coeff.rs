//! Time-dependent scalar coefficients.
//!
//! Every system in the catalog is driven by one or two real functions of time
//! (`b_A`, `b_B` for the book-algebra family, `a_1`, `a_2` for the Bernoulli
//! family). A [`Coefficient`] is an immutable, validated description of such a
//! function drawn from a small set of families, together with the closed time
//! interval on which it may be evaluated.
//!
//! Piecewise families are right-continuous: at a breakpoint the value of the
//! panel to the right applies.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoeffError {
    #[error("t = {t} lies outside the coefficient domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("invalid coefficient: {0}")]
    Invalid(String),
}

/// The functional form of a coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Constant(f64),
    /// Ascending powers: `c[0] + c[1] t + c[2] t^2 + ...`.
    Polynomial(Vec<f64>),
    /// `amplitude * sin(omega t + phase) + offset`.
    Sinusoid {
        amplitude: f64,
        omega: f64,
        phase: f64,
        offset: f64,
    },
    /// `amplitude * exp(rate t) + offset`.
    Exponential {
        amplitude: f64,
        rate: f64,
        offset: f64,
    },
    /// `values[i]` on `[breaks[i-1], breaks[i])`, with `values.len() == breaks.len() + 1`.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// Linear interpolation through `(knots[i], values[i])`.
    TabulatedLinear { knots: Vec<f64>, values: Vec<f64> },
}

impl Family {
    fn name(&self) -> &'static str {
        match self {
            Family::Constant(_) => "constant",
            Family::Polynomial(_) => "polynomial",
            Family::Sinusoid { .. } => "sinusoid",
            Family::Exponential { .. } => "exponential",
            Family::PiecewiseConstant { .. } => "piecewise_constant",
            Family::TabulatedLinear { .. } => "tabulated_linear",
        }
    }
}

/// A validated coefficient `c(t)` on a closed domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientRepr", into = "CoefficientRepr")]
pub struct Coefficient {
    family: Family,
    domain: (f64, f64),
}

impl Coefficient {
    pub fn new(family: Family) -> Result<Self, CoeffError> {
        let domain = match &family {
            Family::TabulatedLinear { knots, .. } if !knots.is_empty() => {
                (knots[0], knots[knots.len() - 1])
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        };
        Self::with_domain(family, domain.0, domain.1)
    }

    pub fn with_domain(family: Family, t_min: f64, t_max: f64) -> Result<Self, CoeffError> {
        let c = Coefficient {
            family,
            domain: (t_min, t_max),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn constant(value: f64) -> Self {
        Self::new(Family::Constant(value)).expect("finite constant")
    }

    pub fn sinusoid(amplitude: f64, omega: f64, phase: f64, offset: f64) -> Self {
        Self::new(Family::Sinusoid {
            amplitude,
            omega,
            phase,
            offset,
        })
        .expect("finite sinusoid parameters")
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self, CoeffError> {
        Self::new(Family::Polynomial(coeffs))
    }

    pub fn exponential(amplitude: f64, rate: f64, offset: f64) -> Result<Self, CoeffError> {
        Self::new(Family::Exponential {
            amplitude,
            rate,
            offset,
        })
    }

    pub fn piecewise_constant(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self, CoeffError> {
        Self::new(Family::PiecewiseConstant { breaks, values })
    }

    pub fn tabulated_linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self, CoeffError> {
        Self::new(Family::TabulatedLinear { knots, values })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.domain.0 && t <= self.domain.1
    }

    /// Evaluates `c(t)`, rejecting times outside the domain.
    pub fn eval(&self, t: f64) -> Result<f64, CoeffError> {
        if !self.contains(t) {
            return Err(CoeffError::OutOfDomain {
                t,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        Ok(self.value(t))
    }

    /// Evaluates the family formula without the domain check.
    ///
    /// Piecewise families extend their outermost panel; the tabulated family
    /// extends its outermost segment linearly.
    pub fn value(&self, t: f64) -> f64 {
        match &self.family {
            Family::Constant(c) => *c,
            Family::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci),
            Family::Sinusoid {
                amplitude,
                omega,
                phase,
                offset,
            } => amplitude * (omega * t + phase).sin() + offset,
            Family::Exponential {
                amplitude,
                rate,
                offset,
            } => amplitude * (rate * t).exp() + offset,
            Family::PiecewiseConstant { breaks, values } => {
                values[breaks.partition_point(|&b| b <= t)]
            }
            Family::TabulatedLinear { knots, values } => {
                if knots.len() == 1 {
                    return values[0];
                }
                let i = knots
                    .partition_point(|&k| k <= t)
                    .clamp(1, knots.len() - 1);
                let (k0, k1) = (knots[i - 1], knots[i]);
                let w = (t - k0) / (k1 - k0);
                values[i - 1] + w * (values[i] - values[i - 1])
            }
        }
    }

    /// Interior points where the coefficient is not smooth, sorted ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let inside = |t: &&f64| **t > self.domain.0 && **t < self.domain.1;
        match &self.family {
            Family::PiecewiseConstant { breaks, .. } => breaks.iter().filter(inside).copied().collect(),
            Family::TabulatedLinear { knots, .. } => knots.iter().filter(inside).copied().collect(),
            _ => Vec::new(),
        }
    }

    /// The coefficient `k * c(t)` on the same domain.
    pub fn scaled(&self, k: f64) -> Coefficient {
        let family = match &self.family {
            Family::Constant(c) => Family::Constant(k * c),
            Family::Polynomial(c) => Family::Polynomial(c.iter().map(|ci| k * ci).collect()),
            Family::Sinusoid {
                amplitude,
                omega,
                phase,
                offset,
            } => Family::Sinusoid {
                amplitude: k * amplitude,
                omega: *omega,
                phase: *phase,
                offset: k * offset,
            },
            Family::Exponential {
                amplitude,
                rate,
                offset,
            } => Family::Exponential {
                amplitude: k * amplitude,
                rate: *rate,
                offset: k * offset,
            },
            Family::PiecewiseConstant { breaks, values } => Family::PiecewiseConstant {
                breaks: breaks.clone(),
                values: values.iter().map(|v| k * v).collect(),
            },
            Family::TabulatedLinear { knots, values } => Family::TabulatedLinear {
                knots: knots.clone(),
                values: values.iter().map(|v| k * v).collect(),
            },
        };
        Coefficient {
            family,
            domain: self.domain,
        }
    }

    /// Largest `|c(t)|` seen on a uniform sample of `[lo, hi]`, for tolerance scaling.
    pub fn sampled_max_abs(&self, lo: f64, hi: f64, samples: usize) -> f64 {
        let n = samples.max(2);
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .map(|t| self.value(t).abs())
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<(), CoeffError> {
        let invalid = |msg: String| Err(CoeffError::Invalid(msg));
        let (lo, hi) = self.domain;
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return invalid(format!("domain [{lo}, {hi}] is not a closed interval"));
        }
        let all_finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let strictly_increasing = |xs: &[f64]| xs.windows(2).all(|w| w[0] < w[1]);
        match &self.family {
            Family::Constant(c) if !c.is_finite() => invalid("constant must be finite".into()),
            Family::Polynomial(c) if c.is_empty() || !all_finite(c) => {
                invalid("polynomial needs at least one finite coefficient".into())
            }
            Family::Sinusoid {
                amplitude,
                omega,
                phase,
                offset,
            } if !all_finite(&[*amplitude, *omega, *phase, *offset]) => {
                invalid("sinusoid parameters must be finite".into())
            }
            Family::Exponential {
                amplitude,
                rate,
                offset,
            } => {
                if !all_finite(&[*amplitude, *rate, *offset]) {
                    return invalid("exponential parameters must be finite".into());
                }
                // exp(rate t) must stay finite on the domain.
                let worst = if *rate >= 0.0 { hi } else { lo };
                if *rate != 0.0 && !(amplitude * (rate * worst).exp()).is_finite() {
                    return invalid("exponential overflows on its domain; bound the domain".into());
                }
                Ok(())
            }
            Family::PiecewiseConstant { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return invalid(format!(
                        "piecewise_constant needs {} values for {} breaks, got {}",
                        breaks.len() + 1,
                        breaks.len(),
                        values.len()
                    ));
                }
                if !all_finite(breaks) || !all_finite(values) || !strictly_increasing(breaks) {
                    return invalid("breaks must be finite and strictly increasing".into());
                }
                if breaks.iter().any(|&b| b < lo || b > hi) {
                    return invalid("breaks must lie inside the domain".into());
                }
                Ok(())
            }
            Family::TabulatedLinear { knots, values } => {
                if knots.is_empty() || knots.len() != values.len() {
                    return invalid("tabulated_linear needs matching, non-empty knots and values".into());
                }
                if !all_finite(knots) || !all_finite(values) || !strictly_increasing(knots) {
                    return invalid("knots must be finite and strictly increasing".into());
                }
                if lo < knots[0] || hi > knots[knots.len() - 1] {
                    return invalid("domain must lie within the tabulated knots".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// The pair of coefficients driving a planar or two-particle system.
///
/// For the book-algebra systems these are `(b_A, b_B)`; for the Bernoulli
/// systems `(a_1, a_2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffPair {
    pub first: Coefficient,
    pub second: Coefficient,
}

impl CoeffPair {
    pub fn new(first: Coefficient, second: Coefficient) -> Self {
        CoeffPair { first, second }
    }

    pub fn constant(first: f64, second: f64) -> Self {
        CoeffPair::new(Coefficient::constant(first), Coefficient::constant(second))
    }

    /// Union of both breakpoint lists, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.first.breakpoints();
        b.extend(self.second.breakpoints());
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Intersection of both domains.
    pub fn domain(&self) -> (f64, f64) {
        let (a0, a1) = self.first.domain();
        let (b0, b1) = self.second.domain();
        (a0.max(b0), a1.min(b1))
    }
}

// JSON form: {"family": "...", "params": {...}, "domain": [t_min, t_max]}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
enum FamilyRepr {
    Constant {
        value: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    Sinusoid {
        #[serde(rename = "A", alias = "amplitude")]
        amplitude: f64,
        #[serde(alias = "frequency")]
        omega: f64,
        #[serde(default, alias = "phase")]
        phi: f64,
        #[serde(default, rename = "B", alias = "offset")]
        offset: f64,
    },
    Exponential {
        #[serde(rename = "A", alias = "amplitude")]
        amplitude: f64,
        rate: f64,
        #[serde(default, rename = "B", alias = "offset")]
        offset: f64,
    },
    PiecewiseConstant {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    TabulatedLinear {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Serialize, Deserialize)]
struct CoefficientRepr {
    #[serde(flatten)]
    family: FamilyRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<[f64; 2]>,
}

impl TryFrom<CoefficientRepr> for Coefficient {
    type Error = CoeffError;

    fn try_from(repr: CoefficientRepr) -> Result<Self, Self::Error> {
        let family = match repr.family {
            FamilyRepr::Constant { value } => Family::Constant(value),
            FamilyRepr::Polynomial { coeffs } => Family::Polynomial(coeffs),
            FamilyRepr::Sinusoid {
                amplitude,
                omega,
                phi,
                offset,
            } => Family::Sinusoid {
                amplitude,
                omega,
                phase: phi,
                offset,
            },
            FamilyRepr::Exponential {
                amplitude,
                rate,
                offset,
            } => Family::Exponential {
                amplitude,
                rate,
                offset,
            },
            FamilyRepr::PiecewiseConstant { breaks, values } => {
                Family::PiecewiseConstant { breaks, values }
            }
            FamilyRepr::TabulatedLinear { knots, values } => Family::TabulatedLinear { knots, values },
        };
        match repr.domain {
            Some([lo, hi]) => Coefficient::with_domain(family, lo, hi),
            None => Coefficient::new(family),
        }
    }
}

impl From<Coefficient> for CoefficientRepr {
    fn from(c: Coefficient) -> Self {
        let family = match c.family {
            Family::Constant(value) => FamilyRepr::Constant { value },
            Family::Polynomial(coeffs) => FamilyRepr::Polynomial { coeffs },
            Family::Sinusoid {
                amplitude,
                omega,
                phase,
                offset,
            } => FamilyRepr::Sinusoid {
                amplitude,
                omega,
                phi: phase,
                offset,
            },
            Family::Exponential {
                amplitude,
                rate,
                offset,
            } => FamilyRepr::Exponential {
                amplitude,
                rate,
                offset,
            },
            Family::PiecewiseConstant { breaks, values } => {
                FamilyRepr::PiecewiseConstant { breaks, values }
            }
            Family::TabulatedLinear { knots, values } => FamilyRepr::TabulatedLinear { knots, values },
        };
        let (lo, hi) = c.domain;
        let domain = (lo.is_finite() || hi.is_finite()).then_some([lo, hi]);
        CoefficientRepr { family, domain }
    }
}

impl std::fmt::Display for Coefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} on [{}, {}]", self.family.name(), self.domain.0, self.domain.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_evaluates_everywhere() {
        assert_eq!(Coefficient::constant(1.0).eval(7.0).unwrap(), 1.0);
        assert!(Coefficient::constant(1.0).breakpoints().is_empty());
    }

    #[test]
    fn sinusoid_peak() {
        let c = Coefficient::sinusoid(1.0, 1.0, 0.0, 0.0);
        assert!((c.eval(PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn piecewise_is_right_continuous() {
        let c = Coefficient::piecewise_constant(vec![1.0], vec![2.0, 5.0]).unwrap();
        assert_eq!(c.eval(1.5).unwrap(), 5.0);
        assert_eq!(c.eval(1.0).unwrap(), 5.0);
        assert_eq!(c.eval(0.999).unwrap(), 2.0);
        assert_eq!(c.breakpoints(), vec![1.0]);
    }

    #[test]
    fn tabulated_breakpoints_are_interior_knots() {
        let c = Coefficient::tabulated_linear(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(c.breakpoints(), vec![0.5]);
        assert_eq!(c.eval(0.25).unwrap(), 0.5);
        assert!(matches!(c.eval(1.5), Err(CoeffError::OutOfDomain { .. })));
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let c = Coefficient::with_domain(Family::Constant(1.0), 0.0, 1.0).unwrap();
        assert!(matches!(c.eval(-0.1), Err(CoeffError::OutOfDomain { .. })));
        assert!(c.eval(1.0).is_ok());
    }

    #[test]
    fn invalid_configs_fail_eagerly() {
        assert!(Coefficient::piecewise_constant(vec![1.0, 0.5], vec![1.0, 2.0, 3.0]).is_err());
        assert!(Coefficient::piecewise_constant(vec![1.0], vec![1.0]).is_err());
        assert!(Coefficient::new(Family::Constant(f64::NAN)).is_err());
        assert!(Coefficient::with_domain(
            Family::PiecewiseConstant {
                breaks: vec![3.0],
                values: vec![1.0, 2.0]
            },
            0.0,
            2.0
        )
        .is_err());
        assert!(Coefficient::exponential(1.0, 1.0, 0.0).is_err());
        assert!(Coefficient::with_domain(
            Family::Exponential {
                amplitude: 1.0,
                rate: 1.0,
                offset: 0.0
            },
            0.0,
            5.0
        )
        .is_ok());
    }

    #[test]
    fn polynomial_horner() {
        let c = Coefficient::polynomial(vec![1.0, -2.0, 3.0]).unwrap();
        assert_eq!(c.eval(2.0).unwrap(), 1.0 - 4.0 + 12.0);
    }

    #[test]
    fn scaling_every_family() {
        let fams = vec![
            Coefficient::constant(2.0),
            Coefficient::polynomial(vec![1.0, 2.0]).unwrap(),
            Coefficient::sinusoid(1.0, 2.0, 0.3, 0.5),
            Coefficient::with_domain(
                Family::Exponential {
                    amplitude: 1.0,
                    rate: 0.5,
                    offset: 1.0,
                },
                -2.0,
                2.0,
            )
            .unwrap(),
            Coefficient::piecewise_constant(vec![0.5], vec![1.0, 3.0]).unwrap(),
            Coefficient::tabulated_linear(vec![-1.0, 0.0, 2.0], vec![1.0, -1.0, 4.0]).unwrap(),
        ];
        for c in fams {
            let s = c.scaled(-1.5);
            for t in [-0.7, 0.0, 0.4, 0.5, 1.3] {
                assert!((s.value(t) + 1.5 * c.value(t)).abs() < 1e-14, "{c}");
            }
        }
    }

    #[test]
    fn json_schema_roundtrip() {
        let json = r#"{"family":"sinusoid","params":{"A":1.0,"omega":2.0,"phi":0.0,"B":0.5},"domain":[0.0,3.0]}"#;
        let c: Coefficient = serde_json::from_str(json).unwrap();
        assert_eq!(c.domain(), (0.0, 3.0));
        assert!((c.eval(0.0).unwrap() - 0.5).abs() < 1e-15);
        let back: Coefficient = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);

        let bad = r#"{"family":"piecewise_constant","params":{"breaks":[1.0],"values":[1.0]}}"#;
        assert!(serde_json::from_str::<Coefficient>(bad).is_err());
    }

    #[test]
    fn eval_is_bit_reproducible() {
        let c = Coefficient::sinusoid(0.7, 3.1, 0.2, -0.4);
        for i in 0..100 {
            let t = i as f64 * 0.0137;
            assert_eq!(c.value(t).to_bits(), c.value(t).to_bits());
        }
    }
}
