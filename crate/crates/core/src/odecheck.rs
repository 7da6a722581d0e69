//! Dormand–Prince 5(4) integrator with dense output, used as the independent
//! reference for the exact solvers, plus comparison and order-scan harnesses.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{CoeffPair, Coefficient};
use crate::error::Error;
use crate::exact::{solve_from, Boundary, Trajectory, Validity};
use crate::quad::QuadConfig;
use crate::systems::{SystemId, SystemParams, TdSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("initial state {0:?} fails the domain guard")]
    InitialState(Vec<f64>),
    #[error("maximum of {steps} steps reached at t = {t}")]
    MaxSteps { t: f64, steps: usize },
    #[error("t = {t} is outside the integrated range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("no grid point lies inside both validity intervals")]
    EmptyOverlap,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("only {valid} z values are usable; at least {needed} are needed")]
    TooFewPoints { valid: usize, needed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// First trial step; chosen automatically when absent.
    pub initial_step: Option<f64>,
    /// Largest step; the whole span when absent.
    pub max_step: Option<f64>,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
            initial_step: None,
            max_step: None,
        }
    }
}

impl OdeConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        OdeConfig {
            rel_tol,
            abs_tol,
            ..OdeConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.rel_tol) || !pos(self.abs_tol) {
            return Err(OdeError::InvalidConfig("tolerances must be finite and positive".into()));
        }
        if self.max_steps == 0 {
            return Err(OdeError::InvalidConfig("max_steps must be positive".into()));
        }
        for (name, v) in [("initial_step", self.initial_step), ("max_step", self.max_step)] {
            if let Some(v) = v {
                if !pos(v) {
                    return Err(OdeError::InvalidConfig(format!("{name} must be finite and positive")));
                }
            }
        }
        Ok(())
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// One accepted step and its quartic dense-output coefficients.
#[derive(Debug, Clone)]
struct Step {
    t: f64,
    h: f64,
    /// `dim x 5` coefficients, row-major by component.
    r: Vec<[f64; 5]>,
}

impl Step {
    fn eval(&self, t: f64, out: &mut [f64]) {
        let th = (t - self.t) / self.h;
        let th1 = 1.0 - th;
        for (o, r) in out.iter_mut().zip(&self.r) {
            *o = r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
        }
    }

    fn end(&self) -> f64 {
        self.t + self.h
    }
}

/// Output of [`integrate`]: dense output over the integrated range.
#[derive(Debug, Clone)]
pub struct NumericTrajectory {
    labels: Vec<&'static str>,
    t0: f64,
    s0: Vec<f64>,
    t_final: f64,
    s_final: Vec<f64>,
    steps: Vec<Step>,
    validity: Validity,
    rejected: usize,
    rhs_evals: usize,
}

impl NumericTrajectory {
    pub fn accepted_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    pub fn rhs_evals(&self) -> usize {
        self.rhs_evals
    }

    /// Step boundaries, in integration order.
    pub fn step_times(&self) -> Vec<f64> {
        let mut v = vec![self.t0];
        v.extend(self.steps.iter().map(Step::end));
        v
    }

    pub fn final_time(&self) -> f64 {
        self.t_final
    }

    pub fn final_state(&self) -> &[f64] {
        &self.s_final
    }

    fn eval_raw(&self, t: f64) -> Result<Vec<f64>, OdeError> {
        let (lo, hi) = (self.t0.min(self.t_final), self.t0.max(self.t_final));
        if !(t >= lo && t <= hi) {
            return Err(OdeError::OutOfRange { t, lo, hi });
        }
        if self.steps.is_empty() || t == self.t0 {
            return Ok(self.s0.clone());
        }
        if t == self.t_final {
            return Ok(self.s_final.clone());
        }
        let forward = self.t_final > self.t0;
        let i = if forward {
            self.steps.partition_point(|s| s.end() < t)
        } else {
            self.steps.partition_point(|s| s.end() > t)
        };
        let mut out = vec![0.0; self.s0.len()];
        self.steps[i.min(self.steps.len() - 1)].eval(t, &mut out);
        Ok(out)
    }
}

impl Trajectory for NumericTrajectory {
    fn labels(&self) -> &[&'static str] {
        &self.labels
    }

    fn validity(&self) -> &Validity {
        &self.validity
    }

    fn eval(&self, t: f64) -> Result<Vec<f64>, Error> {
        Ok(self.eval_raw(t)?)
    }
}

fn rms_norm(v: &[f64], y: &[f64], y2: &[f64], cfg: &OdeConfig) -> f64 {
    let n = v.len() as f64;
    let s: f64 = v
        .iter()
        .zip(y)
        .zip(y2)
        .map(|((e, a), b)| {
            let sk = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            (e / sk).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates `sys` from `(t0, s0)` towards `t_end` (either direction).
///
/// Breakpoints of `sys` are landed on exactly and every stage is evaluated
/// strictly inside its step, so a jump in a coefficient never straddles a
/// step. A failed domain guard or a collapsing step size ends the
/// integration early with a truncated validity report.
pub fn integrate(
    sys: &TdSystem,
    t0: f64,
    s0: &[f64],
    t_end: f64,
    cfg: &OdeConfig,
) -> Result<NumericTrajectory, OdeError> {
    cfg.validate()?;
    if !(t0.is_finite() && t_end.is_finite()) {
        return Err(OdeError::InvalidConfig("times must be finite".into()));
    }
    if s0.len() != sys.dim {
        return Err(OdeError::DimensionMismatch(s0.len(), sys.dim));
    }
    if !sys.in_domain(s0) {
        return Err(OdeError::InitialState(s0.to_vec()));
    }
    let dim = sys.dim;
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut stops: Vec<f64> = sys
        .breaks
        .iter()
        .copied()
        .filter(|&b| (b - t0) * dir > 0.0 && (t_end - b) * dir > 0.0)
        .collect();
    stops.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    stops.dedup();
    stops.push(t_end);

    let mut out = NumericTrajectory {
        labels: sys.labels.clone(),
        t0,
        s0: s0.to_vec(),
        t_final: t0,
        s_final: s0.to_vec(),
        steps: Vec::new(),
        validity: Validity::full(t0.min(t_end), t0.max(t_end)),
        rejected: 0,
        rhs_evals: 0,
    };
    if span == 0.0 {
        return Ok(out);
    }

    let h_max = cfg.max_step.unwrap_or(span).min(span);
    let mut t = t0;
    let mut y = s0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut ytmp = vec![0.0; dim];
    let mut ynew = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let mut evals = 0usize;
    let mut f = |tt: f64, s: &[f64], o: &mut [f64]| {
        evals += 1;
        sys.rhs_into(tt, s, o);
    };

    let inside = |tt: f64| if dir > 0.0 { tt.next_up() } else { tt.next_down() };
    f(inside(t), &y, &mut k[0]);
    let mut h = match cfg.initial_step {
        Some(h) => h.min(h_max),
        None => {
            let mut f1 = vec![0.0; dim];
            initial_step(&mut f, t, &y, &k[0], dir, h_max, cfg, &mut f1)
        }
    };
    let mut stop_idx = 0;
    let mut boundary: Option<Boundary> = None;
    let mut last_rejected = false;

    while stop_idx < stops.len() {
        let stop = stops[stop_idx];
        if out.steps.len() >= cfg.max_steps {
            return Err(OdeError::MaxSteps { t, steps: out.steps.len() });
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(span).max(1e-300);
        let rem = (stop - t).abs();
        let landing = h >= rem * (1.0 - 1e-12);
        let hh = if landing { rem } else { h };
        let hs = dir * hh;
        let t_new = if landing { stop } else { t + hs };
        let t_in = |c: f64| -> f64 {
            let lo = inside(t);
            let hi = if dir > 0.0 { t_new.next_down() } else { t_new.next_up() };
            let tc = t + c * hs;
            if dir > 0.0 {
                tc.clamp(lo, hi.max(lo))
            } else {
                tc.clamp(hi.min(lo), lo)
            }
        };

        for i in 0..dim {
            ytmp[i] = y[i] + hs * A21 * k[0][i];
        }
        f(t_in(C2), &ytmp, &mut k[1]);
        for i in 0..dim {
            ytmp[i] = y[i] + hs * (A31 * k[0][i] + A32 * k[1][i]);
        }
        f(t_in(C3), &ytmp, &mut k[2]);
        for i in 0..dim {
            ytmp[i] = y[i] + hs * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        f(t_in(C4), &ytmp, &mut k[3]);
        for i in 0..dim {
            ytmp[i] = y[i] + hs * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        f(t_in(C5), &ytmp, &mut k[4]);
        for i in 0..dim {
            ytmp[i] = y[i]
                + hs * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
        }
        f(t_in(1.0), &ytmp, &mut k[5]);
        for i in 0..dim {
            ynew[i] = y[i]
                + hs * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        f(t_in(1.0), &ynew, &mut k[6]);
        for i in 0..dim {
            err[i] = hs
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
        }
        let en = rms_norm(&err, &y, &ynew, cfg);
        let finite = en.is_finite() && ynew.iter().all(|v| v.is_finite());
        let in_domain = finite && sys.in_domain(&ynew);

        if finite && en <= 1.0 && in_domain {
            let r = (0..dim)
                .map(|i| {
                    let r1 = y[i];
                    let r2 = ynew[i] - y[i];
                    let r3 = hs * k[0][i] - r2;
                    let r4 = r2 - hs * k[6][i] - r3;
                    let r5 = hs
                        * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                            + D7 * k[6][i]);
                    [r1, r2, r3, r4, r5]
                })
                .collect();
            out.steps.push(Step { t, h: t_new - t, r });
            t = t_new;
            y.copy_from_slice(&ynew);
            if landing {
                stop_idx += 1;
                // the stage times sat just inside the step; restart the
                // derivative on the far side of a breakpoint
                if stop_idx < stops.len() {
                    f(inside(t), &y, &mut k[0]);
                }
            } else {
                k.swap(0, 6);
            }
            let fac = if en == 0.0 { FAC_MAX } else { (SAFETY * en.powf(-0.2)).clamp(FAC_MIN, FAC_MAX) };
            let fac = if last_rejected { fac.min(1.0) } else { fac };
            h = (hh * fac).min(h_max);
            last_rejected = false;
        } else {
            out.rejected += 1;
            last_rejected = true;
            let fac = if finite && in_domain {
                (SAFETY * en.powf(-0.2)).clamp(FAC_MIN, 1.0)
            } else {
                0.5
            };
            h = hh * fac;
            if h < h_min {
                let reason = if !in_domain && finite {
                    "the state leaves the domain guard"
                } else {
                    "step size underflow"
                };
                boundary = Some(Boundary { t, reason: reason.into() });
                break;
            }
        }
    }
    out.rhs_evals = evals;
    out.t_final = t;
    out.s_final = y;
    let (lo, hi) = (t0.min(t), t0.max(t));
    out.validity = Validity {
        start: lo,
        end: hi,
        requested_end: t_end,
        boundary,
    };
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn initial_step(
    f: &mut impl FnMut(f64, &[f64], &mut [f64]),
    t: f64,
    y: &[f64],
    f0: &[f64],
    dir: f64,
    h_max: f64,
    cfg: &OdeConfig,
    f1: &mut [f64],
) -> f64 {
    let n = y.len() as f64;
    let sk: Vec<f64> = y.iter().map(|v| cfg.abs_tol + cfg.rel_tol * v.abs()).collect();
    let dnf: f64 = f0.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n;
    let dny: f64 = y.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n;
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(h_max);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + dir * h * b).collect();
    f(t + dir * h, &y1, f1);
    let der2 = (f1
        .iter()
        .zip(f0)
        .zip(&sk)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h;
    if !der2.is_finite() {
        return (h * 1e-3).min(h_max);
    }
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(h_max)
}

/// Componentwise maximum of `|a - b|` over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub labels: Vec<String>,
    pub max_error: Vec<f64>,
    /// Grid points inside both validity intervals.
    pub points: usize,
    pub skipped: usize,
}

impl Comparison {
    pub fn max(&self) -> f64 {
        self.max_error.iter().copied().fold(0.0, f64::max)
    }
}

/// Compares two trajectories at the grid points inside both validity
/// intervals.
pub fn compare(a: &dyn Trajectory, b: &dyn Trajectory, grid: &[f64]) -> Result<Comparison, Error> {
    if a.dim() != b.dim() {
        return Err(OdeError::DimensionMismatch(a.dim(), b.dim()).into());
    }
    let mut max_error = vec![0.0f64; a.dim()];
    let (mut points, mut skipped) = (0, 0);
    for &t in grid {
        if !(a.validity().contains(t) && b.validity().contains(t)) {
            skipped += 1;
            continue;
        }
        let (va, vb) = (a.eval(t)?, b.eval(t)?);
        for ((m, x), y) in max_error.iter_mut().zip(&va).zip(&vb) {
            let d = (x - y).abs();
            *m = if d.is_nan() { f64::NAN } else { m.max(d) };
        }
        points += 1;
    }
    if points == 0 {
        return Err(OdeError::EmptyOverlap.into());
    }
    Ok(Comparison {
        labels: a.labels().iter().map(|s| s.to_string()).collect(),
        max_error,
        points,
        skipped,
    })
}

/// `n` equally spaced points on `[a, b]`, both ends included.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| if i == n - 1 { b } else { a + (b - a) * (i as f64 / (n - 1) as f64) })
            .collect(),
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Problem shared by every point of an order scan.
#[derive(Debug, Clone)]
pub struct OrderScanSetup {
    pub coeffs: CoeffPair,
    pub t0: f64,
    pub state: [f64; 2],
    pub grid: Vec<f64>,
    pub quad: QuadConfig,
}

/// z values of the default scan.
pub const DEFAULT_SCAN_Z: [f64; 5] = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];

impl Default for OrderScanSetup {
    /// Sinusoidal coefficients, `(x, y)(0) = (1, 0.5)`, 101 points on `[0, 1]`.
    fn default() -> Self {
        OrderScanSetup {
            coeffs: CoeffPair::new(
                Coefficient::sinusoid(0.8, 2.0, 0.3, 0.2),
                Coefficient::sinusoid(0.5, 3.0, -0.4, 0.1),
            ),
            t0: 0.0,
            state: [1.0, 0.5],
            grid: uniform_grid(0.0, 1.0, 101),
            quad: QuadConfig::with_tolerances(1e-13, 1e-13),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderScan {
    pub k: u32,
    pub z: Vec<f64>,
    pub errors: Vec<f64>,
    /// z values dropped because a solution did not cover the grid.
    pub skipped: Vec<f64>,
    pub slope: f64,
}

/// Error of the order-`k` truncation against the full deformed canonical
/// solution, as a function of `z`. `k = 0` is the undeformed solution.
pub fn order_scan(k: u32, z_list: &[f64], setup: &OrderScanSetup) -> Result<OrderScan, Error> {
    let t_end = setup
        .grid
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if setup.grid.is_empty() || !t_end.is_finite() {
        return Err(OdeError::EmptyOverlap.into());
    }
    let (mut zs, mut errors, mut skipped) = (Vec::new(), Vec::new(), Vec::new());
    for &z in z_list {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Invalid(format!("order-scan z values must be positive, got {z}")));
        }
        let run = |id: SystemId, params: SystemParams| {
            solve_from(id, &params, &setup.coeffs, setup.t0, &setup.state, t_end, &setup.quad)
        };
        let reference = run(SystemId::DeformedCanonical, SystemParams::with_z(z))?;
        let approx = match k {
            0 => run(SystemId::CanonicalB2, SystemParams::default())?,
            1 => run(SystemId::ApproxOrder1, SystemParams::with_z(z))?,
            _ => run(SystemId::ApproxOrderK, SystemParams::with_zk(z, k))?,
        };
        if reference.validity().is_truncated() || approx.validity().is_truncated() {
            skipped.push(z);
            continue;
        }
        let e = compare(&reference, &approx, &setup.grid)?.max();
        if e > 0.0 && e.is_finite() {
            zs.push(z);
            errors.push(e);
        } else {
            skipped.push(z);
        }
    }
    if zs.len() < 3 {
        return Err(OdeError::TooFewPoints { valid: zs.len(), needed: 3 }.into());
    }
    let slope = loglog_slope(&zs, &errors);
    Ok(OrderScan {
        k,
        z: zs,
        errors,
        skipped,
        slope,
    })
}
