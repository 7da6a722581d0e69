//! Solutions by quadratures, evaluated as trajectories.
//!
//! Every solver reduces its system to the canonical book-algebra system
//! `x' = b_A x`, `y' = -b_A y + b_B` (or to its linearized deformation
//! `u' = b_A (u - 1)`, `v' = -b_A v/u + b_B`) through a coordinate change,
//! solves that by cumulative integrals of the coefficients, and maps back.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::coeff::{CoeffPair, Coefficient};
use crate::error::Error;
use crate::quad::{cumulative, CumulativeIntegral, Fallible, QuadConfig, QuadError};
use crate::systems::{truncated_exp, truncated_p, Diffeo2, DiffeoKind, SystemId, SystemParams};

/// Samples used when scanning a solution for a chart exit.
pub const SCAN_SAMPLES: usize = 1024;
/// A truncated validity interval stops this fraction of the requested span
/// short of the detected boundary.
pub const END_MARGIN: f64 = 1e-6;

/// A time-parametrized state.
pub trait Trajectory: Send + Sync {
    fn labels(&self) -> &[&'static str];

    fn dim(&self) -> usize {
        self.labels().len()
    }

    fn validity(&self) -> &Validity;

    fn eval(&self, t: f64) -> Result<Vec<f64>, Error>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boundary {
    pub t: f64,
    pub reason: String,
}

/// The checked interval `[start, end]` out of the requested
/// `[start, requested_end]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validity {
    pub start: f64,
    pub end: f64,
    pub requested_end: f64,
    pub boundary: Option<Boundary>,
}

impl Validity {
    pub fn full(start: f64, end: f64) -> Self {
        Validity {
            start,
            end,
            requested_end: end,
            boundary: None,
        }
    }

    pub fn is_truncated(&self) -> bool {
        self.boundary.is_some()
    }

    pub fn contains(&self, t: f64) -> bool {
        let slack = 1e-13 * self.start.abs().max(self.end.abs()).max(1.0);
        t >= self.start - slack && t <= self.end + slack
    }
}

/// Fitted constants of a solution.
///
/// `constants` holds, per family:
/// - canonical and every family mapped onto it (`bernoulli_*`,
///   `coupled_bernoulli`): `[c1, c2]` of the canonical solution;
/// - `deformed_canonical`, `deformed_bernoulli`: `[c1, c2]` with
///   `c1 = (1 - e^{-z x0})/z`;
/// - `deformed_canonical_linearized`, `deformed_coupled_*`: `[u0 - 1, v0]`
///   in the linearized chart;
/// - `approx_order1`: `[2 x0/(2 + z x0), y0]`; `approx_order2`,
///   `approx_orderk`: `[x0, y0]`;
/// - two-particle families: `[C1, y1(a), C2, y2(a)]`, `u_i = 1 + C_i ...`;
///   `twocopy_canonical`: the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionParams {
    pub system: SystemId,
    pub params: SystemParams,
    pub coeffs: CoeffPair,
    pub a: f64,
    pub initial: Vec<f64>,
    pub constants: Vec<f64>,
    pub quad: QuadConfig,
}

fn domain_error(system: SystemId, state: &[f64], reason: impl Into<String>) -> Error {
    Error::Domain {
        system: system.as_str().to_string(),
        state: state.to_vec(),
        reason: reason.into(),
    }
}

/// `(x, y)` of the Bernoulli chart at `(r, θ)`, with `k = n - 1`.
fn bernoulli_xy(k: f64, r: f64, theta: f64) -> (f64, f64) {
    let (s, c) = (k * theta).sin_cos();
    let rk = r.powf(k);
    (rk / s, c / (-k * rk))
}

fn power_forward(id: SystemId, pqrm: (f64, f64, f64, f64), s0: &[f64]) -> Result<(f64, f64), Error> {
    let (u, v) = (s0[0], s0[1]);
    if !(u > 0.0 && v > 0.0) {
        return Err(domain_error(id, s0, "the power map needs u > 0 and v > 0"));
    }
    let (p, q, r, m) = pqrm;
    Ok((u.powf(p) * v.powf(-r), -v.powf(q) * u.powf(-m)))
}

/// Sets `a = t0` and the constants so that the solution passes through `s0`.
pub fn fit_initial(
    system: SystemId,
    params: &SystemParams,
    coeffs: &CoeffPair,
    t0: f64,
    s0: &[f64],
    quad: &QuadConfig,
) -> Result<SolutionParams, Error> {
    use SystemId::*;
    params.validate(system)?;
    quad.validate()?;
    if s0.len() != system.dim() {
        return Err(Error::Invalid(format!(
            "{system} has {} components, got {}",
            system.dim(),
            s0.len()
        )));
    }
    if !s0.iter().all(|v| v.is_finite()) {
        return Err(domain_error(system, s0, "non-finite component"));
    }
    let (lo, hi) = coeffs.domain();
    if !(t0.is_finite() && t0 >= lo && t0 <= hi) {
        return Err(Error::Invalid(format!(
            "t0 = {t0} is outside the coefficient domain [{lo}, {hi}]"
        )));
    }
    let (x0, y0) = (s0[0], s0[1]);
    let constants = match system {
        CanonicalB2 | TwocopyCanonical => s0.to_vec(),
        BernoulliCartesianN2 => {
            if y0 == 0.0 {
                return Err(domain_error(system, s0, "v = 0 is outside the quadratic chart"));
            }
            let d = Diffeo2::new(DiffeoKind::Quadratic)?;
            d.forward([x0, y0])?.to_vec()
        }
        BernoulliCartesian => {
            let k = params.n()? - 1.0;
            let r = x0.hypot(y0);
            if r == 0.0 {
                return Err(domain_error(system, s0, "the origin has no polar angle"));
            }
            let th = y0.atan2(x0);
            if (k * th).sin() == 0.0 {
                return Err(domain_error(system, s0, "sin((n-1) theta) = 0"));
            }
            let (x, y) = bernoulli_xy(k, r, th);
            vec![x, y]
        }
        BernoulliPolar | BernoulliVariantPolar | DeformedBernoulli => {
            let k = params.n()? - 1.0;
            let th = if system == BernoulliVariantPolar {
                y0 + PI / (2.0 * k)
            } else {
                y0
            };
            if !(x0 > 0.0) {
                return Err(domain_error(system, s0, "r must be positive"));
            }
            if (k * th).sin() == 0.0 {
                let what = if system == BernoulliVariantPolar { "cos" } else { "sin" };
                return Err(domain_error(system, s0, format!("{what}((n-1) theta) = 0")));
            }
            let (x, y) = bernoulli_xy(k, x0, th);
            if system == DeformedBernoulli {
                vec![deformed_c1(params.z()?, x), y]
            } else {
                vec![x, y]
            }
        }
        DeformedCanonical => vec![deformed_c1(params.z()?, x0), y0],
        DeformedCanonicalLinearized => {
            if !(x0 > 0.0) {
                return Err(domain_error(system, s0, "u must be positive"));
            }
            vec![x0 - 1.0, y0]
        }
        ApproxOrder1 => {
            let z = params.z()?;
            let d = 2.0 + z * x0;
            if d == 0.0 {
                return Err(domain_error(system, s0, "2 + z x0 = 0"));
            }
            vec![2.0 * x0 / d, y0]
        }
        ApproxOrder2 | ApproxOrderK => {
            let k = if system == ApproxOrder2 { 2 } else { params.k()? };
            let z = params.z()?;
            if !(x0 > 0.0) {
                return Err(domain_error(system, s0, "the implicit solution needs x0 > 0"));
            }
            if !(truncated_p(k, z * x0) > 0.0) {
                return Err(domain_error(system, s0, "x0 is at or beyond an equilibrium"));
            }
            vec![x0, y0]
        }
        DeformedTwoparticle => {
            let z = params.z()?;
            vec![(-z * x0).exp_m1(), y0, (-z * s0[2]).exp_m1(), s0[3]]
        }
        DeformedTwoparticleLinearized => {
            if !(x0 > 0.0 && s0[2] > 0.0) {
                return Err(domain_error(system, s0, "u1 and u2 must be positive"));
            }
            vec![x0 - 1.0, y0, s0[2] - 1.0, s0[3]]
        }
        CoupledBernoulli => {
            let (x, y) = power_forward(system, params.pqrm()?, s0)?;
            vec![x, y]
        }
        DeformedCoupledBernoulli | DeformedCoupledSpecial => {
            let pqrm = if system == DeformedCoupledSpecial {
                params.special_pqrm()?
            } else {
                params.pqrm()?
            };
            let (x, y) = power_forward(system, pqrm, s0)?;
            vec![x - 1.0, y]
        }
    };
    if !constants.iter().all(|c| c.is_finite()) {
        return Err(domain_error(system, s0, "the fitted constants are not finite"));
    }
    Ok(SolutionParams {
        system,
        params: *params,
        coeffs: coeffs.clone(),
        a: t0,
        initial: s0.to_vec(),
        constants,
        quad: *quad,
    })
}

/// `c1 = (1 - e^{-z x0})/z`, and `x0` at `z = 0`.
fn deformed_c1(z: f64, x0: f64) -> f64 {
    if z == 0.0 {
        x0
    } else {
        -(-z * x0).exp_m1() / z
    }
}

type EvalFn = Arc<dyn Fn(f64) -> Result<Vec<f64>, Error> + Send + Sync>;
type ScalarFn = Arc<dyn Fn(f64) -> Result<f64, Error> + Send + Sync>;
type PairFn = Arc<dyn Fn(f64) -> Result<[f64; 2], Error> + Send + Sync>;

/// An evaluated solution. Concurrent `eval` calls are safe; the cumulative
/// integrals behind it are extended lazily.
pub struct ExactTrajectory {
    params: SolutionParams,
    chart: &'static str,
    labels: &'static [&'static str],
    validity: Validity,
    branch: Option<(f64, f64)>,
    eval: EvalFn,
    principal: Option<ScalarFn>,
    canonical: Option<PairFn>,
}

impl std::fmt::Debug for ExactTrajectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExactTrajectory")
            .field("system", &self.params.system)
            .field("chart", &self.chart)
            .field("validity", &self.validity)
            .finish()
    }
}

impl ExactTrajectory {
    pub fn params(&self) -> &SolutionParams {
        &self.params
    }

    pub fn system(&self) -> SystemId {
        self.params.system
    }

    /// `"cartesian"`, `"polar"`, `"linearized"` or `"power"`.
    pub fn chart(&self) -> &'static str {
        self.chart
    }

    fn check(&self, t: f64) -> Result<(), Error> {
        if self.validity.contains(t) {
            Ok(())
        } else {
            Err(Error::OutsideValidity {
                t,
                start: self.validity.start,
                end: self.validity.end,
            })
        }
    }

    /// The state at each of `ts`.
    pub fn eval_grid(&self, ts: &[f64]) -> Result<Vec<Vec<f64>>, Error> {
        ts.iter().map(|&t| Trajectory::eval(self, t)).collect()
    }

    /// θ as printed with the principal arctangent, before unwrapping.
    /// Only for the polar Bernoulli families.
    pub fn principal_theta(&self, t: f64) -> Result<f64, Error> {
        self.check(t)?;
        match &self.principal {
            Some(f) => f(t),
            None => Err(Error::Invalid(format!("{} has no polar angle", self.system()))),
        }
    }

    /// The internal canonical `(x, y)` behind a Bernoulli solution.
    pub fn canonical_state(&self, t: f64) -> Result<[f64; 2], Error> {
        self.check(t)?;
        match &self.canonical {
            Some(f) => f(t),
            None => Err(Error::Invalid(format!(
                "{} is not solved through the Bernoulli chart",
                self.system()
            ))),
        }
    }

    /// Initial sub-interval of the validity interval on which
    /// `-(n-1) x y >= 0` holds for the internal canonical solution.
    pub fn branch_interval(&self) -> Option<(f64, f64)> {
        self.branch
    }
}

impl Trajectory for ExactTrajectory {
    fn labels(&self) -> &[&'static str] {
        self.labels
    }

    fn validity(&self) -> &Validity {
        &self.validity
    }

    fn eval(&self, t: f64) -> Result<Vec<f64>, Error> {
        self.check(t)?;
        (self.eval)(t)
    }
}

/// First time `ok` fails on `[a, b]`, as a bisection-refined pair
/// `(last good, first bad)`. Assumes `ok(a)`.
fn first_failure(a: f64, b: f64, ok: impl Fn(f64) -> bool) -> Option<(f64, f64)> {
    if b <= a {
        return None;
    }
    let mut prev = a;
    for i in 1..=SCAN_SAMPLES {
        let t = if i == SCAN_SAMPLES {
            b
        } else {
            a + (b - a) * (i as f64 / SCAN_SAMPLES as f64)
        };
        if !ok(t) {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if ok(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some((lo, hi));
        }
        prev = t;
    }
    None
}

type Cum = Arc<CumulativeIntegral>;

struct Ctx {
    a: f64,
    requested: f64,
    limit: f64,
    boundary: Option<Boundary>,
    quad: QuadConfig,
    ba: Coefficient,
    bb: Coefficient,
    breaks: Vec<f64>,
}

impl Ctx {
    /// `scale` multiplies the first coefficient (`b_A = (n-1) a_1`).
    fn new(p: &SolutionParams, t_end: f64, scale: f64) -> Result<Self, Error> {
        if !t_end.is_finite() || t_end < p.a {
            return Err(Error::Invalid(format!(
                "t_end = {t_end} must be finite and not before t0 = {}",
                p.a
            )));
        }
        let (_, hi) = p.coeffs.domain();
        let (limit, boundary) = if t_end > hi {
            (
                hi,
                Some(Boundary {
                    t: hi,
                    reason: "end of the coefficient domain".into(),
                }),
            )
        } else {
            (t_end, None)
        };
        let ba = if scale == 1.0 {
            p.coeffs.first.clone()
        } else {
            p.coeffs.first.scaled(scale)
        };
        Ok(Ctx {
            a: p.a,
            requested: t_end,
            limit,
            boundary,
            quad: p.quad,
            ba,
            bb: p.coeffs.second.clone(),
            breaks: p.coeffs.breakpoints(),
        })
    }

    /// Shrinks the interval to the first failure of `ok`.
    fn cut(&mut self, reason: &str, ok: impl Fn(f64) -> bool) {
        if let Some((lo, _)) = first_failure(self.a, self.limit, ok) {
            self.limit = (lo - END_MARGIN * (self.requested - self.a)).max(self.a);
            self.boundary = Some(Boundary {
                t: lo,
                reason: reason.to_string(),
            });
        }
    }

    fn gamma(&self) -> Result<Cum, Error> {
        Ok(Arc::new(cumulative(
            self.ba.clone(),
            self.a,
            self.limit,
            &[],
            &self.quad,
        )?))
    }

    fn integral<F>(&self, f: F) -> Result<Cum, Error>
    where
        F: Fn(f64) -> Result<f64, QuadError> + Send + Sync + 'static,
    {
        Ok(Arc::new(cumulative(
            Fallible(f),
            self.a,
            self.limit,
            &self.breaks,
            &self.quad,
        )?))
    }

    fn validity(&self) -> Validity {
        Validity {
            start: self.a,
            end: self.limit,
            requested_end: self.requested,
            boundary: self.boundary.clone(),
        }
    }
}

/// `y(t) = e^{-ρ(t)} (c + ∫_a^t e^{ρ} g)`, the solution of `y' = -ρ' y + g`.
struct Linear {
    rho: Cum,
    acc: Cum,
    c: f64,
}

impl Linear {
    fn new<G>(ctx: &Ctx, rho: Cum, g: G, c: f64) -> Result<Self, Error>
    where
        G: Fn(f64) -> Result<f64, QuadError> + Send + Sync + 'static,
    {
        let r = Arc::clone(&rho);
        let acc = ctx.integral(move |s| Ok(r.eval(s)?.exp() * g(s)?))?;
        Ok(Linear { rho, acc, c })
    }

    /// `c + ∫_a^t e^{ρ} g`.
    fn scaled(&self, t: f64) -> Result<f64, QuadError> {
        Ok(self.c + self.acc.eval(t)?)
    }

    fn eval(&self, t: f64) -> Result<f64, QuadError> {
        Ok((-self.rho.eval(t)?).exp() * self.scaled(t)?)
    }
}

fn forcing(b: &Coefficient) -> impl Fn(f64) -> Result<f64, QuadError> + Send + Sync + 'static {
    let b = b.clone();
    move |s| Ok(b.eval(s)?)
}

/// Canonical solution `x = c1 e^γ`, `y = e^{-γ}(c2 + ∫ e^γ b_B)`.
struct Canon {
    gamma: Cum,
    c1: f64,
    y: Linear,
}

impl Canon {
    fn new(ctx: &Ctx, c1: f64, c2: f64) -> Result<Self, Error> {
        let gamma = ctx.gamma()?;
        let y = Linear::new(ctx, Arc::clone(&gamma), forcing(&ctx.bb), c2)?;
        Ok(Canon { gamma, c1, y })
    }

    fn x(&self, t: f64) -> Result<f64, QuadError> {
        Ok(self.c1 * self.gamma.eval(t)?.exp())
    }

    fn y(&self, t: f64) -> Result<f64, QuadError> {
        self.y.eval(t)
    }

    /// `x y = c1 (c2 + ∫ e^γ b_B)`, free of exponentials.
    fn xy(&self, t: f64) -> Result<f64, QuadError> {
        Ok(self.c1 * self.y.scaled(t)?)
    }
}

/// Linearized deformed solution `u = 1 + c e^γ`,
/// `v = e^{-σ}(v0 + ∫ e^σ b_B)` with `σ = ∫ b_A/u`. Cuts the interval where
/// `u` reaches zero.
struct Linearized {
    gamma: Cum,
    c: f64,
    v: Linear,
}

impl Linearized {
    fn new(ctx: &mut Ctx, c: f64, v0: f64) -> Result<Self, Error> {
        let gamma = ctx.gamma()?;
        if c < 0.0 {
            let g = Arc::clone(&gamma);
            ctx.cut("1 - z c1 e^gamma reaches 0", move |t| {
                g.eval(t).map(|gv| 1.0 + c * gv.exp() > 0.0).unwrap_or(false)
            });
        }
        let (g, ba) = (Arc::clone(&gamma), ctx.ba.clone());
        let sigma = ctx.integral(move |s| Ok(ba.eval(s)? / (1.0 + c * g.eval(s)?.exp())))?;
        let v = Linear::new(ctx, sigma, forcing(&ctx.bb), v0)?;
        Ok(Linearized { gamma, c, v })
    }

    /// `u - 1`.
    fn du(&self, t: f64) -> Result<f64, QuadError> {
        Ok(self.c * self.gamma.eval(t)?.exp())
    }

    /// `-ln(u)/z`, the deformed canonical `x`.
    fn x(&self, t: f64, z: f64) -> Result<f64, QuadError> {
        Ok(-self.du(t)?.ln_1p() / z)
    }
}

fn wrap<T, F>(f: F) -> impl Fn(f64) -> Result<T, Error> + Send + Sync + 'static
where
    F: Fn(f64) -> Result<T, QuadError> + Send + Sync + 'static,
{
    move |t| f(t).map_err(Error::from)
}

fn check_family(p: &SolutionParams, allowed: &[SystemId], solver: &str) -> Result<(), Error> {
    if allowed.contains(&p.system) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{solver} does not handle {}", p.system)))
    }
}

fn build(
    p: &SolutionParams,
    ctx: &Ctx,
    chart: &'static str,
    eval: EvalFn,
) -> ExactTrajectory {
    ExactTrajectory {
        params: p.clone(),
        chart,
        labels: p.system.labels(),
        validity: ctx.validity(),
        branch: None,
        eval,
        principal: None,
        canonical: None,
    }
}

/// Evaluates the solution fitted in `p` on `[a, t_end]`.
pub fn solve(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    use SystemId::*;
    match p.system {
        CanonicalB2 => solve_canonical(p, t_end),
        BernoulliPolar => solve_bernoulli_polar(p, t_end),
        BernoulliCartesian | BernoulliCartesianN2 => solve_bernoulli_cartesian(p, t_end),
        BernoulliVariantPolar => solve_bernoulli_variant(p, t_end),
        DeformedCanonical | DeformedCanonicalLinearized => solve_deformed_canonical(p, t_end),
        ApproxOrder1 => solve_approx_order1(p, t_end),
        ApproxOrder2 | ApproxOrderK => solve_approx_orderk(p, t_end),
        DeformedBernoulli => solve_deformed_bernoulli(p, t_end),
        TwocopyCanonical => solve_twocopy(p, t_end),
        DeformedTwoparticle | DeformedTwoparticleLinearized => solve_deformed_twoparticle(p, t_end),
        CoupledBernoulli | DeformedCoupledBernoulli | DeformedCoupledSpecial => {
            solve_coupled_bernoulli(p, t_end)
        }
    }
}

/// Fits and solves in one call.
pub fn solve_from(
    system: SystemId,
    params: &SystemParams,
    coeffs: &CoeffPair,
    t0: f64,
    s0: &[f64],
    t_end: f64,
    quad: &QuadConfig,
) -> Result<ExactTrajectory, Error> {
    solve(&fit_initial(system, params, coeffs, t0, s0, quad)?, t_end)
}

pub fn solve_canonical(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    check_family(p, &[SystemId::CanonicalB2], "solve_canonical")?;
    let ctx = Ctx::new(p, t_end, 1.0)?;
    let c = Arc::new(Canon::new(&ctx, p.constants[0], p.constants[1])?);
    let eval: EvalFn = Arc::new(wrap(move |t| Ok(vec![c.x(t)?, c.y(t)?])));
    Ok(build(p, &ctx, "cartesian", eval))
}

/// Polar angle data of a Bernoulli-chart solution: `θ(a)`, the unwrapped
/// reference angle `φ(a)` and `k = n - 1`.
#[derive(Clone, Copy)]
struct Angle {
    k: f64,
    theta0: f64,
    phi0: f64,
    shift: f64,
}

impl Angle {
    /// `φ` from the canonical `(x, y)`, continuous while `x` keeps its sign.
    fn phi(&self, x: f64, y: f64) -> f64 {
        x.signum().atan2(-self.k * x.abs() * y)
    }

    /// `(r, θ)` from `(x, y)`, with `r^k = |x|/sqrt(1 + k² x² y²)`.
    fn polar(&self, x: f64, y: f64) -> [f64; 2] {
        let kxy = self.k * x * y;
        let ln_rk = x.abs().ln() - 0.5 * (kxy * kxy).ln_1p();
        let r = (ln_rk / self.k).exp();
        let theta = self.theta0 + (self.phi(x, y) - self.phi0) / self.k;
        [r, theta - self.shift]
    }

    fn principal(&self, x: f64, y: f64) -> f64 {
        -(1.0 / (self.k * x * y)).atan() / self.k - self.shift
    }
}

/// Polar Bernoulli solution through the canonical chart. `shift` is
/// subtracted from θ on output (the variant system).
fn polar_via_canonical(
    p: &SolutionParams,
    t_end: f64,
    n: f64,
    shift: f64,
) -> Result<(ExactTrajectory, Angle), Error> {
    let k = n - 1.0;
    let ctx = Ctx::new(p, t_end, k)?;
    let (c1, c2) = (p.constants[0], p.constants[1]);
    let c = Arc::new(Canon::new(&ctx, c1, c2)?);
    let theta0 = p.initial[1] + shift;
    let mut ang = Angle {
        k,
        theta0,
        phi0: 0.0,
        shift,
    };
    ang.phi0 = ang.phi(c1, c2);
    let xy = {
        let c = Arc::clone(&c);
        move |t: f64| -> Result<(f64, f64), QuadError> { Ok((c.x(t)?, c.y(t)?)) }
    };
    let eval: EvalFn = {
        let xy = xy.clone();
        Arc::new(wrap(move |t| {
            let (x, y) = xy(t)?;
            Ok(ang.polar(x, y).to_vec())
        }))
    };
    let mut traj = build(p, &ctx, "polar", eval);
    traj.principal = {
        let c = Arc::clone(&c);
        Some(Arc::new(wrap(move |t| {
            let x = c.x(t)?;
            Ok(ang.principal(x, c.xy(t)? / x))
        })))
    };
    traj.canonical = Some(Arc::new(wrap(move |t| {
        let (x, y) = xy(t)?;
        Ok([x, y])
    })));
    traj.branch = {
        let q = move |t: f64| c.xy(t).map(|v| -k * v >= 0.0).unwrap_or(false);
        branch_from(&ctx, q)
    };
    Ok((traj, ang))
}

fn branch_from(ctx: &Ctx, ok: impl Fn(f64) -> bool) -> Option<(f64, f64)> {
    if !ok(ctx.a) {
        return None;
    }
    match first_failure(ctx.a, ctx.limit, ok) {
        Some((lo, _)) => Some((ctx.a, lo)),
        None => Some((ctx.a, ctx.limit)),
    }
}

pub fn solve_bernoulli_polar(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    check_family(p, &[SystemId::BernoulliPolar], "solve_bernoulli_polar")?;
    Ok(polar_via_canonical(p, t_end, p.params.n()?, 0.0)?.0)
}

/// The variant system is the polar system with θ shifted by `π/(2(n-1))`.
pub fn solve_bernoulli_variant(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    check_family(p, &[SystemId::BernoulliVariantPolar], "solve_bernoulli_variant")?;
    let n = p.params.n()?;
    Ok(polar_via_canonical(p, t_end, n, PI / (2.0 * (n - 1.0)))?.0)
}

/// Cartesian Bernoulli solution. `bernoulli_cartesian` goes through the
/// polar chart; `bernoulli_cartesian_n2` through the quadratic map.
pub fn solve_bernoulli_cartesian(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    check_family(
        p,
        &[SystemId::BernoulliCartesian, SystemId::BernoulliCartesianN2],
        "solve_bernoulli_cartesian",
    )?;
    if p.system == SystemId::BernoulliCartesianN2 {
        let ctx = Ctx::new(p, t_end, 1.0)?;
        let c = Arc::new(Canon::new(&ctx, p.constants[0], p.constants[1])?);
        let eval: EvalFn = Arc::new(wrap(move |t| {
            let x = c.x(t)?;
            let xy = c.xy(t)?;
            let d = 1.0 + xy * xy;
            Ok(vec![-xy * x / d, x / d])
        }));
        return Ok(build(p, &ctx, "cartesian", eval));
    }
    let n = p.params.n()?;
    let (u0, v0) = (p.initial[0], p.initial[1]);
    let mut polar = p.clone();
    polar.initial = vec![u0.hypot(v0), v0.atan2(u0)];
    let (inner, _) = polar_via_canonical(&polar, t_end, n, 0.0)?;
    let inner = Arc::new(inner);
    let eval: EvalFn = {
        let inner = Arc::clone(&inner);
        Arc::new(move |t| {
            let s = (inner.eval)(t)?;
            let (sn, cs) = s[1].sin_cos();
            Ok(vec![s[0] * cs, s[0] * sn])
        })
    };
    Ok(ExactTrajectory {
        params: p.clone(),
        chart: "cartesian",
        labels: p.system.labels(),
        validity: inner.validity.clone(),
        branch: inner.branch,
        eval,
        principal: None,
        canonical: inner.canonical.clone(),
    })
}

/// Deformed canonical solution `x = -ln(1 - z c1 e^γ)/z` and the nested
/// quadrature for `y`; also the linearized chart `(u, v)`.
pub fn solve_deformed_canonical(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    check_family(
        p,
        &[SystemId::DeformedCanonical, SystemId::DeformedCanonicalLinearized],
        "solve_deformed_canonical",
    )?;
    let mut ctx = Ctx::new(p, t_end, 1.0)?;
    if p.system == SystemId::DeformedCanonicalLinearized {
        let l = Arc::new(Linearized::new(&mut ctx, p.constants[0], p.constants[1])?);
        let eval: EvalFn = Arc::new(wrap(move |t| Ok(vec![1.0 + l.du(t)?, l.v.eval(t)?])));
        return Ok(build(p, &ctx, "linearized", eval));
    }
    let z = p.params.z()?;
    let (c1, c2) = (p.constants[0], p.constants[1]);
    if z == 0.0 {
        let c = Arc::new(Canon::new(&ctx, c1, c2)?);
        let eval: EvalFn = Arc::new(wrap(move |t| Ok(vec![c.x(t)?, c.y(t)?])));
        return Ok(build(p, &ctx, "cartesian", eval));
    }
    let l = Arc::new(Linearized::new(&mut ctx, -z * c1, c2)?);
    let eval: EvalFn = Arc::new(wrap(move |t| Ok(vec![l.x(t, z)?, l.v.eval(t)?])));
    Ok(build(p, &ctx, "cartesian", eval))
}

/// Closed-form order-1 truncation `x = 2 c1/(2 e^{-γ} - z c1)` with the
/// linear quadrature for `y`.
pub fn solve_approx_order1(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    check_family(p, &[SystemId::ApproxOrder1], "solve_approx_order1")?;
    let z = p.params.z()?;
    let (c1, c2) = (p.constants[0], p.constants[1]);
    let mut ctx = Ctx::new(p, t_end, 1.0)?;
    let gamma = ctx.gamma()?;
    let side = (2.0 - z * c1).signum();
    {
        let g = Arc::clone(&gamma);
        ctx.cut("pole of the order-1 solution", move |t| {
            g.eval(t)
                .map(|gv| (2.0 * (-gv).exp() - z * c1) * side > 0.0)
                .unwrap_or(false)
        });
    }
    let x = {
        let g = Arc::clone(&gamma);
        move |t: f64| -> Result<f64, QuadError> { Ok(2.0 * c1 / (2.0 * (-g.eval(t)?).exp() - z * c1)) }
    };
    let xi = {
        let (x, ba) = (x.clone(), ctx.ba.clone());
        ctx.integral(move |s| Ok(ba.eval(s)? * (1.0 + z * x(s)?)))?
    };
    let y = Linear::new(&ctx, xi, forcing(&ctx.bb), c2)?;
    let eval: EvalFn = Arc::new(wrap(move |t| Ok(vec![x(t)?, y.eval(t)?])));
    Ok(build(p, &ctx, "cartesian", eval))
}

/// First integral of the order-2 truncation `x' = b_A (x + z x²/2 + z² x³/6)`:
/// constant along solutions when `gamma_val = ∫ b_A`.
pub fn abel_first_integral(z: f64, x: f64, gamma_val: f64) -> Result<f64, Error> {
    if z == 0.0 {
        return Err(Error::Invalid("the first integral needs z != 0".into()));
    }
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Invalid("the first integral is singular at x = 0".into()));
    }
    let q = z * z * x * x + 3.0 * z * x + 6.0;
    let s15 = 15f64.sqrt();
    Ok((x * x / q).ln() / 12.0
        - ((2.0 * z * z * x + 3.0 * z) / (s15 * z)).atan() / (2.0 * s15)
        - gamma_val / 6.0)
}

fn gauss_legendre_10() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = 10;
        (1..=n)
            .map(|i| {
                let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for j in 2..=n {
                        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

/// Implicit order-k solution: `G(s) = ∫_{s0}^{s} dσ/P_k(z e^σ) = γ` in
/// `s = ln x`.
struct OrderK {
    k: u32,
    z: f64,
    s0: f64,
    /// `G` diverges here (an equilibrium `P_k = 0`), or `+∞`.
    s_cap: f64,
}

const ORDERK_PANEL: f64 = 0.25;
const ORDERK_SPAN: f64 = 700.0;

impl OrderK {
    fn new(k: u32, z: f64, x0: f64) -> Self {
        let s0 = x0.ln();
        let mut ok = OrderK {
            k,
            z,
            s0,
            s_cap: f64::INFINITY,
        };
        if z < 0.0 {
            let step = 0.05;
            let mut s = s0;
            while s < s0 + ORDERK_SPAN {
                if ok.p(s + step) <= 0.0 {
                    let (mut lo, mut hi) = (s, s + step);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if ok.p(mid) > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    ok.s_cap = hi;
                    break;
                }
                s += step;
            }
        }
        ok
    }

    fn p(&self, s: f64) -> f64 {
        truncated_p(self.k, self.z * s.exp())
    }

    fn g(&self, s: f64) -> f64 {
        let span = s - self.s0;
        if span == 0.0 {
            return 0.0;
        }
        let panels = (span.abs() / ORDERK_PANEL).ceil().max(1.0);
        let h = span / panels;
        let nodes = gauss_legendre_10();
        let mut total = 0.0;
        for i in 0..panels as usize {
            let mid = self.s0 + (i as f64 + 0.5) * h;
            let mut panel = 0.0;
            for &(x, w) in nodes {
                panel += w / self.p(mid + 0.5 * h * x);
            }
            total += 0.5 * h * panel;
        }
        total
    }

    /// `ln x` with `G(ln x) = gamma`, or `None` when the solution has left
    /// every bracket (blow-up or collapse to 0).
    fn solve(&self, gamma: f64) -> Result<Option<f64>, Error> {
        if gamma == 0.0 {
            return Ok(Some(self.s0));
        }
        let f = |s: f64| self.g(s) - gamma;
        let (mut lo, mut hi);
        if gamma > 0.0 {
            lo = self.s0;
            let mut d = gamma;
            loop {
                hi = self.s0 + d;
                if hi >= self.s_cap {
                    hi = self.s_cap;
                    break;
                }
                if d > ORDERK_SPAN {
                    return Ok(None);
                }
                if f(hi) >= 0.0 {
                    break;
                }
                lo = hi;
                d *= 2.0;
            }
        } else {
            hi = self.s0;
            let mut d = -gamma;
            loop {
                lo = self.s0 - d;
                if d > ORDERK_SPAN {
                    return Ok(None);
                }
                if f(lo) <= 0.0 {
                    break;
                }
                hi = lo;
                d *= 2.0;
            }
        }
        let mut s = (self.s0 + gamma).clamp(lo, hi);
        if s <= lo || s >= hi {
            s = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let fs = f(s);
            if fs == 0.0 {
                return Ok(Some(s));
            }
            if fs < 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let mut next = s - fs * self.p(s);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 4.0 * f64::EPSILON * s.abs().max(1.0) || hi - lo <= f64::EPSILON * s.abs().max(1.0) {
                return Ok(Some(next));
            }
            s = next;
        }
        Err(Error::RootFinding { gamma })
    }
}

/// Order-k truncation: `x` by quadrature and safeguarded root finding, `y`
/// by the linear quadrature with rate `b_A Σ_{j≤k} (z x)^j/j!`.
pub fn solve_approx_orderk(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    check_family(
        p,
        &[SystemId::ApproxOrder2, SystemId::ApproxOrderK],
        "solve_approx_orderk",
    )?;
    let k = if p.system == SystemId::ApproxOrder2 { 2 } else { p.params.k()? };
    let z = p.params.z()?;
    let (x0, c2) = (p.constants[0], p.constants[1]);
    let mut ctx = Ctx::new(p, t_end, 1.0)?;
    let gamma = ctx.gamma()?;
    let ok = Arc::new(OrderK::new(k, z, x0));
    {
        let (g, ok) = (Arc::clone(&gamma), Arc::clone(&ok));
        ctx.cut("the implicit solution leaves its bracket", move |t| {
            matches!(g.eval(t).map(|gv| ok.solve(gv)), Ok(Ok(Some(_))))
        });
    }
    let x = {
        let g = Arc::clone(&gamma);
        move |t: f64| -> Result<f64, Error> {
            let gv = g.eval(t)?;
            match ok.solve(gv)? {
                Some(s) => Ok(s.exp()),
                None => Err(Error::RootFinding { gamma: gv }),
            }
        }
    };
    let rho = {
        let (x, ba) = (x.clone(), ctx.ba.clone());
        ctx.integral(move |s| {
            let xv = x(s).map_err(|_| QuadError::NonFinite { t: s })?;
            Ok(ba.eval(s)? * truncated_exp(k, z * xv))
        })?
    };
    let y = Linear::new(&ctx, rho, forcing(&ctx.bb), c2)?;
    let eval: EvalFn = Arc::new(move |t| Ok(vec![x(t)?, y.eval(t)?]));
    Ok(build(p, &ctx, "cartesian", eval))
}

/// Deformed Bernoulli solution: the deformed canonical solution read
/// through the Bernoulli chart.
pub fn solve_deformed_bernoulli(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    check_family(p, &[SystemId::DeformedBernoulli], "solve_deformed_bernoulli")?;
    let z = p.params.z()?;
    let n = p.params.n()?;
    if z == 0.0 {
        return Ok(polar_via_canonical(p, t_end, n, 0.0)?.0);
    }
    let k = n - 1.0;
    let mut ctx = Ctx::new(p, t_end, k)?;
    let (c1, c2) = (p.constants[0], p.constants[1]);
    let l = Arc::new(Linearized::new(&mut ctx, -z * c1, c2)?);
    let x0 = -(-z * c1).ln_1p() / z;
    let mut ang = Angle {
        k,
        theta0: p.initial[1],
        phi0: 0.0,
        shift: 0.0,
    };
    ang.phi0 = ang.phi(x0, c2);
    let xy = {
        let l = Arc::clone(&l);
        move |t: f64| -> Result<(f64, f64), QuadError> { Ok((l.x(t, z)?, l.v.eval(t)?)) }
    };
    let eval: EvalFn = {
        let xy = xy.clone();
        Arc::new(wrap(move |t| {
            let (x, y) = xy(t)?;
            Ok(ang.polar(x, y).to_vec())
        }))
    };
    let mut traj = build(p, &ctx, "polar", eval);
    traj.principal = {
        let xy = xy.clone();
        Some(Arc::new(wrap(move |t| {
            let (x, y) = xy(t)?;
            Ok(ang.principal(x, y))
        })))
    };
    traj.branch = {
        let xy = xy.clone();
        branch_from(&ctx, move |t| xy(t).map(|(x, y)| -k * x * y >= 0.0).unwrap_or(false))
    };
    traj.canonical = Some(Arc::new(wrap(move |t| {
        let (x, y) = xy(t)?;
        Ok([x, y])
    })));
    Ok(traj)
}

/// Two uncoupled canonical copies sharing `γ` and `∫ e^γ b_B`.
pub fn solve_twocopy(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    check_family(p, &[SystemId::TwocopyCanonical], "solve_twocopy")?;
    let ctx = Ctx::new(p, t_end, 1.0)?;
    let k = p.constants.clone();
    let c = Arc::new(Canon::new(&ctx, 1.0, 0.0)?);
    let eval: EvalFn = Arc::new(wrap(move |t| {
        let e = c.gamma.eval(t)?.exp();
        let acc = c.y.acc.eval(t)?;
        Ok(vec![k[0] * e, (k[1] + acc) / e, k[2] * e, (k[3] + acc) / e])
    }));
    Ok(build(p, &ctx, "cartesian", eval))
}

/// Two-particle deformed solution by sequential quadratures in the
/// linearized variables `u_i = e^{-z x_i}`.
pub fn solve_deformed_twoparticle(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    check_family(
        p,
        &[SystemId::DeformedTwoparticle, SystemId::DeformedTwoparticleLinearized],
        "solve_deformed_twoparticle",
    )?;
    let linearized = p.system == SystemId::DeformedTwoparticleLinearized;
    let z = if linearized { 1.0 } else { p.params.z()? };
    if z == 0.0 {
        let mut q = p.clone();
        q.system = SystemId::TwocopyCanonical;
        q.constants = p.initial.clone();
        let mut traj = solve_twocopy(&q, t_end)?;
        traj.params = p.clone();
        return Ok(traj);
    }
    let (c1, y10, c2, y20) = (p.constants[0], p.constants[1], p.constants[2], p.constants[3]);
    let mut ctx = Ctx::new(p, t_end, 1.0)?;
    let gamma = ctx.gamma()?;
    let du2 = {
        let g = Arc::clone(&gamma);
        move |t: f64| -> Result<f64, QuadError> { Ok(c2 * g.eval(t)?.exp()) }
    };
    if c2 < 0.0 {
        let du2 = du2.clone();
        ctx.cut("u2 reaches 0", move |t| du2(t).map(|d| 1.0 + d > 0.0).unwrap_or(false));
    }
    let sigma2 = {
        let (du2, ba) = (du2.clone(), ctx.ba.clone());
        ctx.integral(move |s| Ok(ba.eval(s)? / (1.0 + du2(s)?)))?
    };
    let du1 = {
        let s2 = Arc::clone(&sigma2);
        move |t: f64| -> Result<f64, QuadError> { Ok(c1 * s2.eval(t)?.exp()) }
    };
    if c1 < 0.0 {
        let du1 = du1.clone();
        ctx.cut("u1 reaches 0", move |t| du1(t).map(|d| 1.0 + d > 0.0).unwrap_or(false));
    }
    let rho1 = {
        let (du1, du2, ba) = (du1.clone(), du2.clone(), ctx.ba.clone());
        ctx.integral(move |s| Ok(ba.eval(s)? / ((1.0 + du1(s)?) * (1.0 + du2(s)?))))?
    };
    let y1 = Arc::new(Linear::new(&ctx, rho1, forcing(&ctx.bb), y10)?);
    let y2 = {
        let (du1, du2, y1) = (du1.clone(), du2.clone(), Arc::clone(&y1));
        let (ba, bb) = (ctx.ba.clone(), ctx.bb.clone());
        let g = move |s: f64| -> Result<f64, QuadError> {
            let (d1, d2) = (du1(s)?, du2(s)?);
            Ok(ba.eval(s)? * d1 * y1.eval(s)? / ((1.0 + d1) * (1.0 + d2)) + bb.eval(s)?)
        };
        Linear::new(&ctx, sigma2, g, y20)?
    };
    let eval: EvalFn = Arc::new(wrap(move |t| {
        let (d1, d2) = (du1(t)?, du2(t)?);
        let (a, b) = if linearized {
            (1.0 + d1, 1.0 + d2)
        } else {
            (-d1.ln_1p() / z, -d2.ln_1p() / z)
        };
        Ok(vec![a, y1.eval(t)?, b, y2.eval(t)?])
    }));
    Ok(build(
        p,
        &ctx,
        if linearized { "linearized" } else { "cartesian" },
        eval,
    ))
}

/// Coupled Bernoulli systems: the power map `(u, v) -> (u^p v^{-r}, -v^q u^{-m})`
/// onto the canonical system, or onto its linearized deformation for the
/// deformed families.
pub fn solve_coupled_bernoulli(p: &SolutionParams, t_end: f64) -> Result<ExactTrajectory, Error> {
    use SystemId::*;
    check_family(
        p,
        &[CoupledBernoulli, DeformedCoupledBernoulli, DeformedCoupledSpecial],
        "solve_coupled_bernoulli",
    )?;
    let (pp, q, r, m) = if p.system == DeformedCoupledSpecial {
        p.params.special_pqrm()?
    } else {
        p.params.pqrm()?
    };
    let det = pp * q - r * m;
    let (c1, c2) = (p.constants[0], p.constants[1]);
    let mut ctx = Ctx::new(p, t_end, 1.0)?;
    // (ln x, -y) in the target chart
    let target: Arc<dyn Fn(f64) -> Result<(f64, f64), QuadError> + Send + Sync> =
        if p.system == CoupledBernoulli {
            let c = Arc::new(Canon::new(&ctx, c1, c2)?);
            Arc::new(move |t| {
                let g = c.gamma.eval(t)?;
                Ok((c1.ln() + g, -c.y(t)?))
            })
        } else {
            let l = Arc::new(Linearized::new(&mut ctx, c1, c2)?);
            Arc::new(move |t| Ok((l.du(t)?.ln_1p(), -l.v.eval(t)?)))
        };
    {
        let target = Arc::clone(&target);
        ctx.cut("y reaches 0 in the power-map chart", move |t| {
            target(t).map(|(_, my)| my > 0.0).unwrap_or(false)
        });
    }
    let eval: EvalFn = Arc::new(wrap(move |t| {
        let (lx, my) = target(t)?;
        let ly = my.ln();
        Ok(vec![
            ((q * lx + r * ly) / det).exp(),
            ((m * lx + pp * ly) / det).exp(),
        ])
    }));
    Ok(build(p, &ctx, "power", eval))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_4, LN_2};

    fn tight() -> QuadConfig {
        QuadConfig::with_tolerances(1e-13, 1e-13)
    }

    fn fit(id: SystemId, params: SystemParams, coeffs: CoeffPair, s0: &[f64]) -> SolutionParams {
        fit_initial(id, &params, &coeffs, 0.0, s0, &tight()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn canonical_fit_reads_off_the_state() {
        let p = fit(SystemId::CanonicalB2, SystemParams::default(), CoeffPair::constant(1.0, 0.0), &[2.0, 3.0]);
        assert_eq!(p.constants, vec![2.0, 3.0]);
    }

    #[test]
    fn deformed_fit_at_origin() {
        let p = fit(SystemId::DeformedCanonical, SystemParams::with_z(1.0), CoeffPair::constant(1.0, 0.0), &[0.0, 1.0]);
        assert_eq!(p.constants[0], 0.0);
    }

    #[test]
    fn polar_fit_through_the_chart() {
        let p = fit(SystemId::BernoulliPolar, SystemParams::with_n(2.0), CoeffPair::constant(1.0, 0.0), &[1.0, FRAC_PI_4]);
        assert!((p.constants[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((p.constants[1] + 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn chart_violation_is_a_domain_error() {
        let r = fit_initial(
            SystemId::BernoulliPolar,
            &SystemParams::with_n(3.0),
            &CoeffPair::constant(1.0, 0.0),
            0.0,
            &[1.0, 0.0],
            &tight(),
        );
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn canonical_closed_forms() {
        let p = fit(SystemId::CanonicalB2, SystemParams::default(), CoeffPair::constant(0.0, 1.0), &[1.0, 0.0]);
        let s = solve(&p, 2.0).unwrap();
        assert!(close(&s.eval(2.0).unwrap(), &[1.0, 2.0], 1e-13));

        let p = fit(SystemId::CanonicalB2, SystemParams::default(), CoeffPair::constant(1.0, 0.0), &[2.0, 3.0]);
        let s = solve(&p, 1.0).unwrap();
        assert!(close(&s.eval(1.0).unwrap(), &[2.0 * E, 3.0 / E], 1e-12));
        assert!(!s.validity().is_truncated());

        let p = fit(SystemId::CanonicalB2, SystemParams::default(), CoeffPair::constant(0.0, 0.0), &[2.0, 3.0]);
        assert_eq!(solve(&p, 5.0).unwrap().eval(4.0).unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn outside_validity_is_an_error() {
        let p = fit(SystemId::CanonicalB2, SystemParams::default(), CoeffPair::constant(1.0, 0.0), &[2.0, 3.0]);
        let s = solve(&p, 1.0).unwrap();
        assert!(matches!(s.eval(1.5), Err(Error::OutsideValidity { .. })));
        assert!(matches!(solve(&p, -1.0), Err(Error::Invalid(_))));
    }

    #[test]
    fn polar_scaling_example() {
        let p = fit(SystemId::BernoulliPolar, SystemParams::with_n(2.0), CoeffPair::constant(1.0, 0.0), &[1.0, FRAC_PI_4]);
        let s = solve(&p, 1.0).unwrap();
        assert!(close(&s.eval(1.0).unwrap(), &[E, FRAC_PI_4], 1e-12));
        assert!(close(&s.eval(0.0).unwrap(), &[1.0, FRAC_PI_4], 1e-14));
    }

    #[test]
    fn constant_polar_state() {
        let p = fit(SystemId::BernoulliPolar, SystemParams::with_n(3.5), CoeffPair::constant(0.0, 0.0), &[0.7, 0.3]);
        let s = solve(&p, 1.0).unwrap();
        assert!(close(&s.eval(0.6).unwrap(), &[0.7, 0.3], 1e-14));
    }

    #[test]
    fn principal_angle_agrees_on_the_branch() {
        let p = fit(SystemId::BernoulliPolar, SystemParams::with_n(3.0), CoeffPair::constant(0.4, 0.3), &[0.8, 0.3]);
        let s = solve(&p, 1.0).unwrap();
        let (lo, hi) = s.branch_interval().unwrap();
        for i in 0..=10 {
            let t = lo + (hi - lo) * i as f64 / 10.0;
            let th = s.eval(t).unwrap()[1];
            let pr = s.principal_theta(t).unwrap();
            let k = (th - pr) / (PI / 2.0);
            assert!((k - k.round()).abs() < 1e-9, "t={t}: {th} vs {pr}");
        }
    }

    #[test]
    fn cartesian_scales_without_a2() {
        let coeffs = CoeffPair::new(Coefficient::sinusoid(0.5, 2.0, 0.1, 0.3), Coefficient::constant(0.0));
        let p = fit(SystemId::BernoulliCartesian, SystemParams::with_n(4.0), coeffs.clone(), &[0.6, 0.4]);
        let s = solve(&p, 1.0).unwrap();
        let g = crate::quad::integrate(&coeffs.first, 0.0, 1.0, &tight()).unwrap().value.exp();
        assert!(close(&s.eval(1.0).unwrap(), &[0.6 * g, 0.4 * g], 1e-12));
    }

    #[test]
    fn quadratic_route_matches_polar_route() {
        let coeffs = CoeffPair::new(Coefficient::sinusoid(0.5, 2.0, 0.1, 0.3), Coefficient::sinusoid(0.4, 3.0, 0.0, -0.2));
        let s0 = [0.6, 0.4];
        let a = solve(&fit(SystemId::BernoulliCartesianN2, SystemParams::default(), coeffs.clone(), &s0), 1.0).unwrap();
        let b = solve(&fit(SystemId::BernoulliCartesian, SystemParams::with_n(2.0), coeffs, &s0), 1.0).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert!(close(&a.eval(t).unwrap(), &b.eval(t).unwrap(), 1e-8), "t={t}");
        }
    }

    #[test]
    fn deformed_boundary_example() {
        // c1 = 0.5 with z = 1: x0 = -ln(1 - 0.5) = ln 2
        let p = fit(SystemId::DeformedCanonical, SystemParams::with_z(1.0), CoeffPair::constant(1.0, 0.0), &[LN_2, 1.0]);
        assert!((p.constants[0] - 0.5).abs() < 1e-15);
        let s = solve(&p, 2.0).unwrap();
        let b = s.validity().boundary.clone().unwrap();
        assert!((b.t - LN_2).abs() < 1e-12, "{}", b.t);
        assert!(s.validity().end < LN_2);
    }

    #[test]
    fn deformed_closed_form_value() {
        let p = fit(SystemId::DeformedCanonical, SystemParams::with_z(1.0), CoeffPair::constant(1.0, 0.0), &[-1.0, 0.5]);
        let s = solve(&p, 1.0).unwrap();
        let x = s.eval(1.0).unwrap()[0];
        assert!((x + (1.0 + (E - 1.0) * E).ln()).abs() < 1e-12);
        assert!((x + 1.735325).abs() < 1e-6);
    }

    #[test]
    fn deformed_without_drift() {
        let z = 0.4;
        let p = fit(SystemId::DeformedCanonical, SystemParams::with_z(z), CoeffPair::constant(0.0, 0.7), &[0.3, 0.5]);
        let s = solve(&p, 2.0).unwrap();
        let c1 = p.constants[0];
        let v = s.eval(2.0).unwrap();
        assert!((v[0] + (1.0 - z * c1).ln() / z).abs() < 1e-14);
        assert!((v[1] - (0.5 + 1.4)).abs() < 1e-13);
    }

    #[test]
    fn order1_at_zero_is_canonical() {
        let coeffs = CoeffPair::new(Coefficient::sinusoid(0.5, 2.0, 0.1, 0.3), Coefficient::constant(0.2));
        let a = solve(&fit(SystemId::ApproxOrder1, SystemParams::with_z(0.0), coeffs.clone(), &[1.0, 0.5]), 1.0).unwrap();
        let b = solve(&fit(SystemId::CanonicalB2, SystemParams::default(), coeffs, &[1.0, 0.5]), 1.0).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(a.eval(t).unwrap(), b.eval(t).unwrap());
        }
    }

    #[test]
    fn orderk_at_one_is_order1() {
        let coeffs = CoeffPair::new(Coefficient::sinusoid(0.5, 2.0, 0.1, 0.3), Coefficient::constant(0.2));
        let z = 0.05;
        let a = solve(&fit(SystemId::ApproxOrder1, SystemParams::with_z(z), coeffs.clone(), &[1.0, 0.5]), 1.0).unwrap();
        let b = solve(&fit(SystemId::ApproxOrderK, SystemParams::with_zk(z, 1), coeffs, &[1.0, 0.5]), 1.0).unwrap();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            assert!(close(&a.eval(t).unwrap(), &b.eval(t).unwrap(), 1e-10), "t={t}");
        }
    }

    #[test]
    fn orderk_leaves_its_bracket_at_blow_up() {
        // x' = x (1 + x/2) from x0 = 2: x/(1 + x/2) = e^t, which tends to 2 as x blows up
        let p = fit(SystemId::ApproxOrderK, SystemParams::with_zk(1.0, 1), CoeffPair::constant(1.0, 0.0), &[2.0, 1.0]);
        let s = solve(&p, 2.0).unwrap();
        let b = s.validity().boundary.clone().unwrap();
        assert!((b.t - LN_2).abs() < 1e-6, "{}", b.t);
    }

    #[test]
    fn abel_integral_rejects_singular_input() {
        assert!(abel_first_integral(0.0, 1.0, 0.0).is_err());
        assert!(abel_first_integral(0.1, 0.0, 0.0).is_err());
        assert!(abel_first_integral(0.1, 1.0, 0.0).unwrap().is_finite());
    }

    #[test]
    fn twoparticle_without_drift() {
        let coeffs = CoeffPair::constant(0.0, 0.3);
        let p = fit(SystemId::DeformedTwoparticle, SystemParams::with_z(0.5), coeffs, &[0.2, 0.1, -0.4, 0.5]);
        let s = solve(&p, 1.0).unwrap();
        assert!(close(&s.eval(1.0).unwrap(), &[0.2, 0.4, -0.4, 0.8], 1e-13));
    }

    #[test]
    fn coupled_fixed_point() {
        let p = fit(
            SystemId::CoupledBernoulli,
            SystemParams::power(1.0, 1.0, -1.0, 2.0),
            CoeffPair::constant(0.0, 0.0),
            &[0.7, 1.3],
        );
        let s = solve(&p, 1.0).unwrap();
        assert!(close(&s.eval(1.0).unwrap(), &[0.7, 1.3], 1e-14));
    }

    #[test]
    fn initial_states_are_reproduced() {
        let coeffs = CoeffPair::new(Coefficient::sinusoid(0.5, 2.0, 0.1, 0.3), Coefficient::sinusoid(0.4, 3.0, 0.0, -0.2));
        let cases: Vec<(SystemId, SystemParams, Vec<f64>)> = vec![
            (SystemId::CanonicalB2, SystemParams::default(), vec![2.0, 3.0]),
            (SystemId::BernoulliCartesianN2, SystemParams::default(), vec![0.6, 0.4]),
            (SystemId::BernoulliCartesian, SystemParams::with_n(3.0), vec![0.6, 0.4]),
            (SystemId::BernoulliPolar, SystemParams::with_n(3.0), vec![1.0, PI / 8.0]),
            (SystemId::BernoulliVariantPolar, SystemParams::with_n(3.0), vec![1.0, 0.2]),
            (SystemId::DeformedCanonical, SystemParams::with_z(0.3), vec![0.5, 0.2]),
            (SystemId::DeformedCanonicalLinearized, SystemParams::default(), vec![0.8, 0.2]),
            (SystemId::ApproxOrder1, SystemParams::with_z(0.3), vec![0.5, 0.2]),
            (SystemId::ApproxOrder2, SystemParams::with_z(0.3), vec![0.5, 0.2]),
            (SystemId::ApproxOrderK, SystemParams::with_zk(0.3, 3), vec![0.5, 0.2]),
            (SystemId::DeformedBernoulli, SystemParams::with_nz(3.0, 0.2), vec![1.0, PI / 8.0]),
            (SystemId::TwocopyCanonical, SystemParams::default(), vec![0.1, 0.2, 0.3, 0.4]),
            (SystemId::DeformedTwoparticle, SystemParams::with_z(0.5), vec![0.1, 0.2, 0.3, 0.4]),
            (SystemId::DeformedTwoparticleLinearized, SystemParams::default(), vec![1.1, 0.2, 0.9, 0.4]),
            (SystemId::CoupledBernoulli, SystemParams::power(1.0, 1.0, -1.0, 2.0), vec![0.7, 1.3]),
            (SystemId::DeformedCoupledBernoulli, SystemParams::power(1.0, 1.0, -1.0, 2.0), vec![0.7, 1.3]),
            (SystemId::DeformedCoupledSpecial, SystemParams::with_q(1.0), vec![0.7, 1.3]),
        ];
        for (id, params, s0) in cases {
            let p = fit(id, params, coeffs.clone(), &s0);
            let s = solve(&p, 1.0).unwrap();
            let v = s.eval(0.0).unwrap();
            assert!(close(&v, &s0, 1e-12), "{id}: {v:?} vs {s0:?}");
        }
    }
}
