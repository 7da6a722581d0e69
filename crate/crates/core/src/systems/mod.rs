//! Catalog of right-hand sides, vector fields, Hamiltonians and coordinate
//! changes.

mod basis;
mod catalog;
mod diffeo;
mod fields;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use basis::book_basis_normalize;
pub use catalog::system;
pub(crate) use catalog::{truncated_exp, truncated_p};
pub use diffeo::{pushforward_rhs, pushforward_system, Diffeo2, DiffeoKind};
pub use fields::{
    all_hamiltonian_pairs, all_vector_field_pairs, Chart, HamiltonianPair, SymplecticWeight,
    VectorFieldPair,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("unknown system '{0}'")]
    UnknownSystem(String),
    #[error("system {system} needs parameter '{name}'")]
    MissingParam { system: SystemId, name: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("point {point:?} is outside the domain of {what}")]
    Domain { what: String, point: Vec<f64> },
    #[error("coordinate change {0} is singular here (|Ξ| < 1e-12)")]
    SingularMap(String),
    #[error("{0}")]
    Abelian(String),
}

macro_rules! system_ids {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Identifier of a catalog system.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum SystemId {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl SystemId {
            pub const ALL: &'static [SystemId] = &[$(SystemId::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(SystemId::$variant => $name,)*
                }
            }
        }

        impl FromStr for SystemId {
            type Err = SystemError;

            fn from_str(s: &str) -> Result<Self, SystemError> {
                match s {
                    $($name => Ok(SystemId::$variant),)*
                    _ => Err(SystemError::UnknownSystem(s.to_string())),
                }
            }
        }
    };
}

system_ids! {
    CanonicalB2 => "canonical_b2",
    BernoulliCartesianN2 => "bernoulli_cartesian_n2",
    BernoulliCartesian => "bernoulli_cartesian",
    BernoulliPolar => "bernoulli_polar",
    BernoulliVariantPolar => "bernoulli_variant_polar",
    DeformedCanonical => "deformed_canonical",
    DeformedCanonicalLinearized => "deformed_canonical_linearized",
    ApproxOrder1 => "approx_order1",
    ApproxOrder2 => "approx_order2",
    ApproxOrderK => "approx_orderk",
    DeformedBernoulli => "deformed_bernoulli",
    TwocopyCanonical => "twocopy_canonical",
    DeformedTwoparticle => "deformed_twoparticle",
    DeformedTwoparticleLinearized => "deformed_twoparticle_linearized",
    CoupledBernoulli => "coupled_bernoulli",
    DeformedCoupledBernoulli => "deformed_coupled_bernoulli",
    DeformedCoupledSpecial => "deformed_coupled_special",
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl SystemId {
    pub fn dim(self) -> usize {
        match self {
            SystemId::TwocopyCanonical
            | SystemId::DeformedTwoparticle
            | SystemId::DeformedTwoparticleLinearized => 4,
            _ => 2,
        }
    }

    pub fn labels(self) -> &'static [&'static str] {
        use SystemId::*;
        match self {
            CanonicalB2 | DeformedCanonical | ApproxOrder1 | ApproxOrder2 | ApproxOrderK => &["x", "y"],
            BernoulliPolar | BernoulliVariantPolar | DeformedBernoulli => &["r", "theta"],
            TwocopyCanonical | DeformedTwoparticle => &["x1", "y1", "x2", "y2"],
            DeformedTwoparticleLinearized => &["u1", "y1", "u2", "y2"],
            DeformedCanonicalLinearized | BernoulliCartesianN2 | BernoulliCartesian
            | CoupledBernoulli | DeformedCoupledBernoulli | DeformedCoupledSpecial => &["u", "v"],
        }
    }

    /// Names of the two coefficient slots, `(bA, bB)` or `(a1, a2)`.
    pub fn coefficient_names(self) -> (&'static str, &'static str) {
        use SystemId::*;
        match self {
            BernoulliCartesianN2 | BernoulliCartesian | BernoulliPolar | BernoulliVariantPolar
            | DeformedBernoulli => ("a1", "a2"),
            _ => ("bA", "bB"),
        }
    }

    /// The system this one reduces to as the deformation parameter vanishes.
    pub fn undeformed(self) -> Option<SystemId> {
        use SystemId::*;
        match self {
            DeformedCanonical | ApproxOrder1 | ApproxOrder2 | ApproxOrderK => Some(CanonicalB2),
            DeformedBernoulli => Some(BernoulliPolar),
            DeformedTwoparticle => Some(TwocopyCanonical),
            _ => None,
        }
    }

    pub fn required_params(self) -> &'static [&'static str] {
        use SystemId::*;
        match self {
            CanonicalB2 | BernoulliCartesianN2 | DeformedCanonicalLinearized | TwocopyCanonical
            | DeformedTwoparticleLinearized => &[],
            BernoulliCartesian | BernoulliPolar | BernoulliVariantPolar => &["n"],
            DeformedCanonical | ApproxOrder1 | ApproxOrder2 | DeformedTwoparticle => &["z"],
            ApproxOrderK => &["z", "k"],
            DeformedBernoulli => &["n", "z"],
            CoupledBernoulli | DeformedCoupledBernoulli => &["p", "q", "r", "m"],
            DeformedCoupledSpecial => &["q"],
        }
    }
}

/// Structural parameters. Only the ones a system needs are read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

impl SystemParams {
    pub fn with_n(n: f64) -> Self {
        SystemParams {
            n: Some(n),
            ..Default::default()
        }
    }

    pub fn with_z(z: f64) -> Self {
        SystemParams {
            z: Some(z),
            ..Default::default()
        }
    }

    pub fn with_nz(n: f64, z: f64) -> Self {
        SystemParams {
            n: Some(n),
            z: Some(z),
            ..Default::default()
        }
    }

    pub fn with_zk(z: f64, k: u32) -> Self {
        SystemParams {
            z: Some(z),
            k: Some(k),
            ..Default::default()
        }
    }

    pub fn power(p: f64, q: f64, r: f64, m: f64) -> Self {
        SystemParams {
            p: Some(p),
            q: Some(q),
            r: Some(r),
            m: Some(m),
            ..Default::default()
        }
    }

    pub fn with_q(q: f64) -> Self {
        SystemParams {
            q: Some(q),
            ..Default::default()
        }
    }

    fn get(&self, id: SystemId, name: &'static str) -> Result<f64, SystemError> {
        let v = match name {
            "n" => self.n,
            "z" => self.z,
            "k" => self.k.map(f64::from),
            "p" => self.p,
            "q" => self.q,
            "r" => self.r,
            "m" => self.m,
            _ => None,
        };
        let v = v.ok_or(SystemError::MissingParam { system: id, name })?;
        if !v.is_finite() {
            return Err(SystemError::InvalidParam(format!("{name} must be finite")));
        }
        Ok(v)
    }

    /// Checks everything `id` needs: presence, finiteness and the
    /// family-specific restrictions.
    pub fn validate(&self, id: SystemId) -> Result<(), SystemError> {
        for name in id.required_params() {
            self.get(id, name)?;
        }
        use SystemId::*;
        match id {
            BernoulliPolar | BernoulliVariantPolar | DeformedBernoulli => {
                let n = self.get(id, "n")?;
                if n == 0.0 || n == 1.0 {
                    return Err(SystemError::InvalidParam("n must not be 0 or 1".into()));
                }
            }
            BernoulliCartesian => {
                let n = self.get(id, "n")?;
                if n.fract() != 0.0 || n < 2.0 || n > 64.0 {
                    return Err(SystemError::InvalidParam(
                        "bernoulli_cartesian needs an integer n with 2 <= n <= 64".into(),
                    ));
                }
            }
            ApproxOrderK => {
                if self.k == Some(0) {
                    return Err(SystemError::InvalidParam("k must be at least 1".into()));
                }
            }
            CoupledBernoulli | DeformedCoupledBernoulli => {
                if self.lambda()? == 0.0 {
                    return Err(SystemError::InvalidParam("Λ = mr - pq must be nonzero".into()));
                }
            }
            DeformedCoupledSpecial => {
                if self.get(id, "q")? == 0.0 {
                    return Err(SystemError::InvalidParam("q must be nonzero".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn n(&self) -> Result<f64, SystemError> {
        self.n
            .ok_or(SystemError::InvalidParam("parameter n is not set".into()))
    }

    pub fn z(&self) -> Result<f64, SystemError> {
        self.z
            .ok_or(SystemError::InvalidParam("parameter z is not set".into()))
    }

    pub fn k(&self) -> Result<u32, SystemError> {
        self.k
            .ok_or(SystemError::InvalidParam("parameter k is not set".into()))
    }

    /// `(p, q, r, m)` of the power map. The special coupled case fixes
    /// `p = -1, m = 2, r = -q`.
    pub fn pqrm(&self) -> Result<(f64, f64, f64, f64), SystemError> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| SystemError::InvalidParam(format!("parameter {name} is not set")))
        };
        Ok((
            need(self.p, "p")?,
            need(self.q, "q")?,
            need(self.r, "r")?,
            need(self.m, "m")?,
        ))
    }

    pub fn special_pqrm(&self) -> Result<(f64, f64, f64, f64), SystemError> {
        let q = self
            .q
            .ok_or(SystemError::InvalidParam("parameter q is not set".into()))?;
        Ok((-1.0, q, -q, 2.0))
    }

    pub fn lambda(&self) -> Result<f64, SystemError> {
        let (p, q, r, m) = self.pqrm()?;
        Ok(m * r - p * q)
    }
}

pub type RhsFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
pub type GuardFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A non-autonomous first-order system with a domain guard.
#[derive(Clone)]
pub struct TdSystem {
    pub name: String,
    pub dim: usize,
    pub labels: Vec<&'static str>,
    rhs: RhsFn,
    guard: GuardFn,
    /// Times where the right-hand side is not smooth in t.
    pub breaks: Vec<f64>,
}

impl fmt::Debug for TdSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TdSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("labels", &self.labels)
            .field("breaks", &self.breaks)
            .finish()
    }
}

impl TdSystem {
    pub fn new(
        name: impl Into<String>,
        labels: Vec<&'static str>,
        rhs: RhsFn,
        guard: GuardFn,
        breaks: Vec<f64>,
    ) -> Self {
        TdSystem {
            name: name.into(),
            dim: labels.len(),
            labels,
            rhs,
            guard,
            breaks,
        }
    }

    pub fn rhs_into(&self, t: f64, s: &[f64], out: &mut [f64]) {
        (self.rhs)(t, s, out)
    }

    pub fn rhs(&self, t: f64, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        (self.rhs)(t, s, &mut out);
        out
    }

    pub fn in_domain(&self, s: &[f64]) -> bool {
        s.len() == self.dim && s.iter().all(|v| v.is_finite()) && (self.guard)(s)
    }

    pub(crate) fn guard_fn(&self) -> GuardFn {
        Arc::clone(&self.guard)
    }
}

/// `(e^{zx} - 1)/z`, equal to `x` at `z = 0`.
pub fn expm1_over(z: f64, x: f64) -> f64 {
    if z == 0.0 {
        x
    } else {
        (z * x).exp_m1() / z
    }
}

/// `(e^w - 1)/w`, equal to 1 at `w = 0`.
pub fn psi(w: f64) -> f64 {
    if w == 0.0 {
        1.0
    } else {
        w.exp_m1() / w
    }
}

/// Derivative of [`psi`].
pub fn dpsi(w: f64) -> f64 {
    if w.abs() < 0.1 {
        // sum_{k>=1} k w^{k-1} / (k+1)!
        let mut sum = 0.0;
        let mut pow = 1.0;
        let mut fact = 2.0;
        for k in 1..=14 {
            sum += k as f64 * pow / fact;
            pow *= w;
            fact *= (k + 2) as f64;
        }
        sum
    } else {
        (w.exp() - psi(w)) / w
    }
}
