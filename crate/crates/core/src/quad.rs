//! Adaptive quadrature and cached cumulative integrals.
//!
//! The base rule is adaptive Simpson with Richardson extrapolation, split at
//! declared breakpoints. Accepted panels ("leaves") keep their five samples, so
//! a [`CumulativeIntegral`] can answer `F(t)` anywhere inside a leaf by
//! integrating the leaf's quartic interpolant exactly. Over a whole leaf that
//! interpolant integral is Boole's rule, i.e. the extrapolated Simpson value,
//! so `F` is continuous across leaves.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::coeff::{CoeffError, Coefficient};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature on [{lo}, {hi}] did not converge within the depth limit (best value {value}, error estimate {err_est})")]
    Accuracy {
        value: f64,
        err_est: f64,
        lo: f64,
        hi: f64,
    },
    #[error("integrand is not finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("t = {t} is outside the integration range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Coefficient(#[from] CoeffError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Distance between stored checkpoints of a cumulative integral.
    /// `None` means `(domain_end - base) / 256`.
    pub checkpoint_spacing: Option<f64>,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_depth: 40,
            checkpoint_spacing: None,
        }
    }
}

impl QuadConfig {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        QuadConfig {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.abs_tol) || !positive(self.rel_tol) {
            return Err(QuadError::InvalidConfig(
                "tolerances must be finite and positive".into(),
            ));
        }
        if self.max_depth < 1 {
            return Err(QuadError::InvalidConfig("max_depth must be at least 1".into()));
        }
        if let Some(s) = self.checkpoint_spacing {
            if !positive(s) {
                return Err(QuadError::InvalidConfig(
                    "checkpoint_spacing must be finite and positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A real function of time that may fail, with optional non-smooth points.
pub trait Integrand: Send + Sync {
    fn value(&self, t: f64) -> Result<f64, QuadError>;

    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F> Integrand for F
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn value(&self, t: f64) -> Result<f64, QuadError> {
        Ok(self(t))
    }
}

impl Integrand for Coefficient {
    fn value(&self, t: f64) -> Result<f64, QuadError> {
        Ok(self.eval(t)?)
    }

    fn breakpoints(&self) -> Vec<f64> {
        Coefficient::breakpoints(self)
    }
}

impl<I: Integrand + ?Sized> Integrand for Arc<I> {
    fn value(&self, t: f64) -> Result<f64, QuadError> {
        (**self).value(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}

/// Adapts a closure returning `Result` into an [`Integrand`].
pub struct Fallible<F>(pub F);

impl<F> Integrand for Fallible<F>
where
    F: Fn(f64) -> Result<f64, QuadError> + Send + Sync,
{
    fn value(&self, t: f64) -> Result<f64, QuadError> {
        (self.0)(t)
    }
}

/// Attaches breakpoints to an integrand that does not know its own.
pub struct WithBreaks<I> {
    pub inner: I,
    pub breaks: Vec<f64>,
}

impl<I: Integrand> Integrand for WithBreaks<I> {
    fn value(&self, t: f64) -> Result<f64, QuadError> {
        self.inner.value(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.inner.breakpoints();
        b.extend_from_slice(&self.breaks);
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err_est: f64,
}

/// Integral of `f` over `[a, b]`, split at the integrand's breakpoints.
pub fn integrate<I: Integrand + ?Sized>(
    f: &I,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError> {
    integrate_with_breaks(f, a, b, &[], cfg)
}

pub fn integrate_with_breaks<I: Integrand + ?Sized>(
    f: &I,
    a: f64,
    b: f64,
    extra_breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            err_est: 0.0,
        });
    }
    let mut breaks = f.breakpoints();
    breaks.extend_from_slice(extra_breaks);
    let bounds = panel_bounds(a, b, &breaks, None);

    let mut starts = Vec::with_capacity(bounds.len() - 1);
    let mut coarse = 0.0;
    for w in bounds.windows(2) {
        let s = Seed::new(f, w[0], w[1])?;
        coarse += s.whole;
        starts.push(s);
    }
    let tol = cfg.abs_tol.max(cfg.rel_tol * coarse.abs());
    let mut acc = Accumulator::default();
    for s in starts {
        let eps = tol * (s.b - s.a) / (b - a);
        refine(f, s, eps, 0, cfg.max_depth, &mut |leaf: &Leaf5| {
            acc.value += leaf.value;
            acc.err += leaf.err;
            acc.failed |= leaf.unconverged;
        })?;
    }
    acc.finish(a, b)
}

#[derive(Default)]
struct Accumulator {
    value: f64,
    err: f64,
    failed: bool,
}

impl Accumulator {
    fn finish(self, lo: f64, hi: f64) -> Result<Estimate, QuadError> {
        if self.failed {
            return Err(QuadError::Accuracy {
                value: self.value,
                err_est: self.err,
                lo,
                hi,
            });
        }
        Ok(Estimate {
            value: self.value,
            err_est: self.err,
        })
    }
}

/// Sorted panel boundaries covering `[a, b]`: the endpoints, every breakpoint
/// strictly inside, and (optionally) a uniform grid. Grid points that fall
/// within a hair of a breakpoint are dropped in favor of the breakpoint.
fn panel_bounds(a: f64, b: f64, breaks: &[f64], spacing: Option<f64>) -> Vec<f64> {
    let len = b - a;
    let eps = 1e-12 * len.max(a.abs()).max(b.abs()).max(1.0);
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&t| t > a + eps && t < b - eps)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if let Some(h) = spacing {
        let n = (len / h).ceil().max(1.0) as usize;
        for i in 1..n {
            let t = a + len * i as f64 / n as f64;
            let near_break = {
                let j = pts.partition_point(|&p| p < t);
                (j < pts.len() && (pts[j] - t).abs() < eps)
                    || (j > 0 && (t - pts[j - 1]).abs() < eps)
            };
            if !near_break {
                pts.push(t);
            }
        }
        pts.sort_by(f64::total_cmp);
    }
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(a);
    out.extend(pts);
    out.push(b);
    out
}

fn sample<I: Integrand + ?Sized>(f: &I, t: f64) -> Result<f64, QuadError> {
    let v = f.value(t)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadError::NonFinite { t })
    }
}

#[derive(Clone, Copy)]
struct Seed {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl Seed {
    fn new<I: Integrand + ?Sized>(f: &I, a: f64, b: f64) -> Result<Self, QuadError> {
        let fa = sample(f, a)?;
        let fm = sample(f, 0.5 * (a + b))?;
        // Panel ends may sit on a jump; take the limit from inside the panel
        // (values are right-continuous, so the left end needs no adjustment).
        let fb = sample(f, if b > a { b.next_down() } else { b })?;
        Ok(Seed {
            a,
            b,
            fa,
            fm,
            fb,
            whole: (b - a) / 6.0 * (fa + 4.0 * fm + fb),
        })
    }
}

/// An accepted panel with samples at `a + i (b - a) / 4`, `i = 0..=4`.
struct Leaf5 {
    a: f64,
    b: f64,
    f: [f64; 5],
    value: f64,
    err: f64,
    unconverged: bool,
}

fn refine<I, S>(
    f: &I,
    s: Seed,
    eps: f64,
    depth: u32,
    max_depth: u32,
    sink: &mut S,
) -> Result<(), QuadError>
where
    I: Integrand + ?Sized,
    S: FnMut(&Leaf5),
{
    let Seed { a, b, fa, fm, fb, whole } = s;
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = sample(f, lm)?;
    let frm = sample(f, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    // Below this the difference is rounding noise, not truncation error.
    let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    let converged = diff.abs() <= 15.0 * eps || diff.abs() <= noise;
    let exhausted = depth >= max_depth || !(lm > a && rm < b);
    if converged || exhausted {
        sink(&Leaf5 {
            a,
            b,
            f: [fa, flm, fm, frm, fb],
            value: left + right + diff / 15.0,
            err: diff.abs() / 15.0,
            unconverged: !converged,
        });
        return Ok(());
    }
    let l = Seed {
        a,
        b: m,
        fa,
        fm: flm,
        fb: fm,
        whole: left,
    };
    let r = Seed {
        a: m,
        b,
        fa: fm,
        fm: frm,
        fb,
        whole: right,
    };
    refine(f, l, 0.5 * eps, depth + 1, max_depth, sink)?;
    refine(f, r, 0.5 * eps, depth + 1, max_depth, sink)
}

// Antiderivative weights of the quartic interpolant through s = 0, 1/4, 1/2,
// 3/4, 1: the coefficient of s^(k+1) in the integral from 0 to s of the i-th
// Lagrange basis polynomial is WEIGHTS[i][k].
const WEIGHTS: [[f64; 5]; 5] = [
    [1.0, -25.0 / 6.0, 70.0 / 9.0, -20.0 / 3.0, 32.0 / 15.0],
    [0.0, 8.0, -208.0 / 9.0, 24.0, -128.0 / 15.0],
    [0.0, -6.0, 76.0 / 3.0, -32.0, 64.0 / 5.0],
    [0.0, 8.0 / 3.0, -112.0 / 9.0, 56.0 / 3.0, -128.0 / 15.0],
    [0.0, -1.0 / 2.0, 22.0 / 9.0, -4.0, 32.0 / 15.0],
];

#[derive(Debug, Clone)]
struct Leaf {
    start: f64,
    width: f64,
    /// Integral from the segment start to `start`.
    offset: f64,
    /// `G(s) = sum_k poly[k] s^(k+1)`, already scaled by the width.
    poly: [f64; 5],
}

impl Leaf {
    fn from_samples(start: f64, width: f64, offset: f64, f: &[f64; 5]) -> Self {
        let mut poly = [0.0; 5];
        for (k, p) in poly.iter_mut().enumerate() {
            *p = width * (0..5).map(|i| f[i] * WEIGHTS[i][k]).sum::<f64>();
        }
        Leaf {
            start,
            width,
            offset,
            poly,
        }
    }

    fn partial(&self, t: f64) -> f64 {
        let s = ((t - self.start) / self.width).clamp(0.0, 1.0);
        let p = &self.poly;
        s * (p[0] + s * (p[1] + s * (p[2] + s * (p[3] + s * p[4]))))
    }

    fn total(&self) -> f64 {
        self.poly.iter().sum()
    }
}

#[derive(Debug, Clone)]
struct Segment {
    /// `F` at the segment start.
    offset: f64,
    leaves: Vec<Leaf>,
    total: f64,
    err: f64,
}

impl Segment {
    fn value_at(&self, t: f64) -> f64 {
        let i = self
            .leaves
            .partition_point(|l| l.start <= t)
            .saturating_sub(1);
        let leaf = &self.leaves[i];
        self.offset + leaf.offset + leaf.partial(t)
    }
}

/// `F(t) = ∫_base^t f(s) ds` on `[base, end]`, built lazily in checkpointed
/// segments and safe to query from many threads.
///
/// Segment boundaries are a uniform grid of the configured spacing merged with
/// every breakpoint of the integrand, so breakpoints are always checkpoints.
/// A segment is integrated the first time a query reaches it; segments are
/// always completed in order, so the stored offsets are deterministic.
pub struct CumulativeIntegral {
    base: f64,
    end: f64,
    integrand: Arc<dyn Integrand>,
    cfg: QuadConfig,
    bounds: Vec<f64>,
    segments: Vec<OnceLock<Result<Segment, QuadError>>>,
    built: AtomicUsize,
}

impl std::fmt::Debug for CumulativeIntegral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CumulativeIntegral")
            .field("base", &self.base)
            .field("end", &self.end)
            .field("segments", &self.segments.len())
            .field("built", &self.built.load(Ordering::Relaxed))
            .finish()
    }
}

/// Builds the cumulative integral of `f` from `a` over `[a, domain_end]`.
pub fn cumulative<I: Integrand + 'static>(
    f: I,
    a: f64,
    domain_end: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<CumulativeIntegral, QuadError> {
    CumulativeIntegral::new(Arc::new(f), a, domain_end, breaks, cfg)
}

impl CumulativeIntegral {
    pub fn new(
        integrand: Arc<dyn Integrand>,
        base: f64,
        end: f64,
        breaks: &[f64],
        cfg: &QuadConfig,
    ) -> Result<Self, QuadError> {
        cfg.validate()?;
        if !(base.is_finite() && end.is_finite()) || base > end {
            return Err(QuadError::InvalidInterval { a: base, b: end });
        }
        let mut all_breaks = integrand.breakpoints();
        all_breaks.extend_from_slice(breaks);
        let bounds = if end > base {
            let spacing = cfg.checkpoint_spacing.unwrap_or((end - base) / 256.0);
            panel_bounds(base, end, &all_breaks, Some(spacing))
        } else {
            vec![base, end]
        };
        let segments = (0..bounds.len() - 1).map(|_| OnceLock::new()).collect();
        Ok(CumulativeIntegral {
            base,
            end,
            integrand,
            cfg: *cfg,
            bounds,
            segments,
            built: AtomicUsize::new(0),
        })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn config(&self) -> &QuadConfig {
        &self.cfg
    }

    /// `F(t)`. `F(base)` is exactly zero.
    pub fn eval(&self, t: f64) -> Result<f64, QuadError> {
        let k = self.locate(t)?;
        let seg = self.segment(k)?;
        Ok(seg.value_at(t.clamp(self.bounds[k], self.bounds[k + 1])))
    }

    /// `F` at each of `ts`. Ascending input is answered with a single forward
    /// sweep over the segments.
    pub fn eval_many(&self, ts: &[f64]) -> Result<Vec<f64>, QuadError> {
        let mut out = Vec::with_capacity(ts.len());
        if !ts.windows(2).all(|w| w[0] <= w[1]) {
            for &t in ts {
                out.push(self.eval(t)?);
            }
            return Ok(out);
        }
        let mut k = match ts.first() {
            Some(&t) => self.locate(t)?,
            None => return Ok(out),
        };
        let mut seg = self.segment(k)?;
        let mut leaf = 0usize;
        for &t in ts {
            if t > self.bounds[k + 1] {
                k = self.locate(t)?;
                seg = self.segment(k)?;
                leaf = 0;
            }
            while leaf + 1 < seg.leaves.len() && seg.leaves[leaf + 1].start <= t {
                leaf += 1;
            }
            let l = &seg.leaves[leaf];
            out.push(seg.offset + l.offset + l.partial(t.min(self.bounds[k + 1])));
        }
        Ok(out)
    }

    /// Estimated absolute error of `F(t)`.
    pub fn error_estimate(&self, t: f64) -> Result<f64, QuadError> {
        let k = self.locate(t)?;
        self.segment(k)?;
        Ok((0..=k)
            .map(|j| self.segments[j].get().and_then(|s| s.as_ref().ok()).map_or(0.0, |s| s.err))
            .sum())
    }

    /// Checkpoints built so far, as `(t, F(t))` pairs.
    pub fn checkpoints(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (k, cell) in self.segments.iter().enumerate() {
            match cell.get() {
                Some(Ok(seg)) => {
                    out.push((self.bounds[k], seg.offset));
                    if k + 1 == self.segments.len() {
                        out.push((self.bounds[k + 1], seg.offset + seg.total));
                    }
                }
                _ => break,
            }
        }
        out
    }

    /// All segment boundaries, built or not.
    pub fn checkpoint_times(&self) -> &[f64] {
        &self.bounds
    }

    fn locate(&self, t: f64) -> Result<usize, QuadError> {
        let slack = 1e-12 * (self.end - self.base).max(self.base.abs()).max(1.0);
        if !(t >= self.base - slack && t <= self.end + slack) {
            return Err(QuadError::OutOfRange {
                t,
                lo: self.base,
                hi: self.end,
            });
        }
        let k = self.bounds.partition_point(|&b| b <= t);
        Ok(k.saturating_sub(1).min(self.segments.len() - 1))
    }

    fn segment(&self, k: usize) -> Result<&Segment, QuadError> {
        let built = self.built.load(Ordering::Acquire);
        if k >= built {
            for j in built..=k {
                self.segments[j].get_or_init(|| self.build(j));
                if self.segments[j].get().is_some_and(|s| s.is_err()) {
                    break;
                }
                self.built.fetch_max(j + 1, Ordering::AcqRel);
            }
        }
        match self.segments[k].get() {
            Some(Ok(seg)) => Ok(seg),
            Some(Err(e)) => Err(e.clone()),
            // An earlier segment failed, so this one was never reached.
            None => Err((0..k)
                .find_map(|j| self.segments[j].get().and_then(|s| s.as_ref().err().cloned()))
                .expect("a failed predecessor segment")),
        }
    }

    fn build(&self, k: usize) -> Result<Segment, QuadError> {
        let offset = if k == 0 {
            0.0
        } else {
            match self.segments[k - 1].get() {
                Some(Ok(prev)) => prev.offset + prev.total,
                Some(Err(e)) => return Err(e.clone()),
                None => unreachable!("segments are built in order"),
            }
        };
        let (a, b) = (self.bounds[k], self.bounds[k + 1]);
        if b <= a {
            return Ok(Segment {
                offset,
                leaves: vec![Leaf {
                    start: a,
                    width: 1.0,
                    offset: 0.0,
                    poly: [0.0; 5],
                }],
                total: 0.0,
                err: 0.0,
            });
        }
        let f = self.integrand.as_ref();
        let seed = Seed::new(f, a, b)?;
        let share = self.cfg.abs_tol * (b - a) / (self.end - self.base);
        let eps = share.max(self.cfg.rel_tol * seed.whole.abs());
        let mut leaves: Vec<Leaf> = Vec::new();
        let mut running = 0.0;
        let mut err = 0.0;
        let mut failed = false;
        refine(f, seed, eps, 0, self.cfg.max_depth, &mut |l: &Leaf5| {
            let leaf = Leaf::from_samples(l.a, l.b - l.a, running, &l.f);
            running += leaf.total();
            err += l.err;
            failed |= l.unconverged;
            leaves.push(leaf);
        })?;
        if failed {
            return Err(QuadError::Accuracy {
                value: offset + running,
                err_est: err,
                lo: a,
                hi: b,
            });
        }
        Ok(Segment {
            offset,
            leaves,
            total: running,
            err,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(&|t: f64| t * t, 0.0, 1.0, &cfg()).unwrap();
        assert!((e.value - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sine_over_half_period() {
        let e = integrate(&|t: f64| t.sin(), 0.0, PI, &cfg()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn breakpoints_split_panels() {
        let c = Coefficient::piecewise_constant(vec![1.0], vec![2.0, 5.0]).unwrap();
        let e = integrate(&c, 0.0, 2.0, &cfg()).unwrap();
        assert!((e.value - 7.0).abs() < 1e-14, "{}", e.value);
    }

    #[test]
    fn depth_limit_reports_accuracy_error() {
        let tight = QuadConfig {
            max_depth: 2,
            ..QuadConfig::with_tolerances(1e-14, 1e-14)
        };
        let r = integrate(&|t: f64| (20.0 * t).sin().exp(), 0.0, 3.0, &tight);
        match r {
            Err(QuadError::Accuracy { value, err_est, .. }) => {
                assert!(value.is_finite() && err_est > 0.0);
            }
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = integrate(&|t: f64| 1.0 / (t - 0.5), 0.0, 1.0, &cfg());
        assert!(matches!(r, Err(QuadError::NonFinite { .. })));
    }

    #[test]
    fn reversed_interval_is_rejected() {
        assert!(matches!(
            integrate(&|t: f64| t, 1.0, 0.0, &cfg()),
            Err(QuadError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn cumulative_of_zero_and_one() {
        let z = cumulative(|_t: f64| 0.0, 0.0, 2.0, &[], &cfg()).unwrap();
        let o = cumulative(|_t: f64| 1.0, 0.0, 2.0, &[], &cfg()).unwrap();
        for t in [0.0, 0.1, 1.0, 2.0] {
            assert_eq!(z.eval(t).unwrap(), 0.0);
            assert!((o.eval(t).unwrap() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulative_is_zero_at_base() {
        let c = cumulative(|t: f64| t.cos() + 3.0, 0.7, 4.0, &[], &cfg()).unwrap();
        assert_eq!(c.eval(0.7).unwrap(), 0.0);
    }

    #[test]
    fn cumulative_checkpoints_include_breakpoints() {
        let pc = Coefficient::piecewise_constant(vec![0.3, 1.234567], vec![1.0, -2.0, 4.0]).unwrap();
        let c = cumulative(pc, 0.0, 2.0, &[0.77], &cfg()).unwrap();
        for b in [0.3, 1.234567, 0.77] {
            assert!(c.checkpoint_times().contains(&b));
        }
        let want = 0.3 - 2.0 * (1.234567 - 0.3) + 4.0 * (2.0 - 1.234567);
        assert!((c.eval(2.0).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn cumulative_is_lazy() {
        let c = cumulative(|t: f64| t.exp(), 0.0, 10.0, &[], &cfg()).unwrap();
        c.eval(1.0).unwrap();
        let built = c.checkpoints();
        assert!(built.len() < 40, "built {} segments", built.len());
        assert!((c.eval(10.0).unwrap() - (10f64.exp() - 1.0)).abs() < 1e-10 * 10f64.exp());
    }

    #[test]
    fn eval_many_matches_eval() {
        let c = cumulative(|t: f64| (3.0 * t).sin() * t, 0.0, 3.0, &[], &cfg()).unwrap();
        let ts: Vec<f64> = (0..500).map(|i| 3.0 * i as f64 / 499.0).collect();
        let many = c.eval_many(&ts).unwrap();
        for (t, v) in ts.iter().zip(&many) {
            assert_eq!(*v, c.eval(*t).unwrap());
        }
        let mut shuffled = ts.clone();
        shuffled.reverse();
        let rev = c.eval_many(&shuffled).unwrap();
        assert_eq!(rev.iter().rev().copied().collect::<Vec<_>>(), many);
    }

    #[test]
    fn out_of_range_query() {
        let c = cumulative(|t: f64| t, 0.0, 1.0, &[], &cfg()).unwrap();
        assert!(matches!(c.eval(1.5), Err(QuadError::OutOfRange { .. })));
        assert!(matches!(c.eval(-0.5), Err(QuadError::OutOfRange { .. })));
    }

    #[test]
    fn failure_in_an_early_segment_poisons_later_queries() {
        let c = cumulative(
            Fallible(|t: f64| if t > 0.5 { Err(QuadError::NonFinite { t }) } else { Ok(1.0) }),
            0.0,
            1.0,
            &[],
            &cfg(),
        )
        .unwrap();
        assert!(c.eval(0.25).is_ok());
        assert!(c.eval(0.9).is_err());
        assert!(c.eval(0.95).is_err());
    }

    #[test]
    fn degenerate_interval() {
        let c = cumulative(|t: f64| t, 1.0, 1.0, &[], &cfg()).unwrap();
        assert_eq!(c.eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn leaf_weights_reproduce_boole() {
        let f = [0.3, -1.2, 2.0, 0.7, 1.1];
        let leaf = Leaf::from_samples(0.0, 2.0, 0.0, &f);
        let boole = 2.0 / 90.0 * (7.0 * f[0] + 32.0 * f[1] + 12.0 * f[2] + 32.0 * f[3] + 7.0 * f[4]);
        assert!((leaf.total() - boole).abs() < 1e-13);
        // Exact for quartics at interior points.
        let q = |s: f64| 1.0 - 2.0 * s + 3.0 * s.powi(3) - s.powi(4);
        let samples = [0.0, 0.25, 0.5, 0.75, 1.0].map(q);
        let leaf = Leaf::from_samples(0.0, 1.0, 0.0, &samples);
        let anti = |s: f64| s - s * s + 0.75 * s.powi(4) - 0.2 * s.powi(5);
        for s in [0.1, 0.33, 0.8] {
            assert!((leaf.partial(s) - anti(s)).abs() < 1e-14);
        }
    }

    #[test]
    fn concurrent_reads_agree() {
        let c = Arc::new(cumulative(|t: f64| (t * 5.0).cos(), 0.0, 4.0, &[], &cfg()).unwrap());
        let handles: Vec<_> = (0..4)
            .map(|k| {
                let c = Arc::clone(&c);
                std::thread::spawn(move || {
                    (0..200)
                        .map(|i| c.eval(4.0 * ((i * 7 + k * 13) % 200) as f64 / 199.0).unwrap())
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let serial = cumulative(|t: f64| (t * 5.0).cos(), 0.0, 4.0, &[], &cfg()).unwrap();
        for (k, h) in handles.into_iter().enumerate() {
            for (i, v) in h.join().unwrap().into_iter().enumerate() {
                let t = 4.0 * ((i * 7 + k * 13) % 200) as f64 / 199.0;
                assert_eq!(v, serial.eval(t).unwrap());
            }
        }
    }
}
