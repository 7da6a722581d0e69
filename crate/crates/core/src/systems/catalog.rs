use std::sync::Arc;

use super::{expm1_over, psi, GuardFn, RhsFn, SystemError, SystemId, SystemParams, TdSystem};
use crate::coeff::CoeffPair;

/// Real and imaginary parts of `(u + iv)^n` as the two binomial sums
/// `sum_j (-1)^{j+1} n!/((2j-2)!(n+2-2j)!) u^{n+2-2j} v^{2j-2}` and
/// `sum_j (-1)^{j+1} n!/((2j-1)!(n+1-2j)!) u^{n+1-2j} v^{2j-1}`.
pub(crate) fn binomial_parts(n: u32, u: f64, v: f64) -> (f64, f64) {
    let n = n as i64;
    let mut re = 0.0;
    let mut im = 0.0;
    for j in 1..=(n / 2 + 1) {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        let (a, b) = (2 * j - 2, n + 2 - 2 * j);
        if b >= 0 {
            re += sign * binom(n, a) * u.powi(b as i32) * v.powi(a as i32);
        }
        let (a, b) = (2 * j - 1, n + 1 - 2 * j);
        if b >= 0 {
            im += sign * binom(n, a) * u.powi(b as i32) * v.powi(a as i32);
        }
    }
    (re, im)
}

fn binom(n: i64, k: i64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn always(_: &[f64]) -> bool {
    true
}

/// Builds a catalog system. `coeffs.first` is `b_A` (or `a_1`),
/// `coeffs.second` is `b_B` (or `a_2`).
pub fn system(
    id: SystemId,
    params: &SystemParams,
    coeffs: &CoeffPair,
) -> Result<TdSystem, SystemError> {
    params.validate(id)?;
    let c = Arc::new(coeffs.clone());
    let ab = move |t: f64| (c.first.value(t), c.second.value(t));
    let (rhs, guard): (RhsFn, GuardFn) = match id {
        SystemId::CanonicalB2 => (
            Arc::new(move |t, s, o| {
                let (a, b) = ab(t);
                o[0] = a * s[0];
                o[1] = -a * s[1] + b;
            }),
            Arc::new(always),
        ),
        SystemId::BernoulliCartesianN2 => (
            Arc::new(move |t, s, o| {
                let (f, g) = ab(t);
                let (u, v) = (s[0], s[1]);
                o[0] = f * u + g * (u * u - v * v);
                o[1] = f * v + 2.0 * g * u * v;
            }),
            Arc::new(always),
        ),
        SystemId::BernoulliCartesian => {
            let n = params.n()? as u32;
            (
                Arc::new(move |t, s, o| {
                    let (f, g) = ab(t);
                    let (re, im) = binomial_parts(n, s[0], s[1]);
                    o[0] = f * s[0] + g * re;
                    o[1] = f * s[1] + g * im;
                }),
                Arc::new(always),
            )
        }
        SystemId::BernoulliPolar => {
            let n = params.n()?;
            (
                Arc::new(move |t, s, o| {
                    let (a1, a2) = ab(t);
                    let (r, th) = (s[0], s[1]);
                    let (sn, cs) = ((n - 1.0) * th).sin_cos();
                    let rn1 = r.powf(n - 1.0);
                    o[0] = a1 * r + a2 * rn1 * r * cs;
                    o[1] = a2 * rn1 * sn;
                }),
                Arc::new(move |s| s[0] > 0.0 && ((n - 1.0) * s[1]).sin() != 0.0),
            )
        }
        SystemId::BernoulliVariantPolar => {
            let n = params.n()?;
            (
                Arc::new(move |t, s, o| {
                    let (a1, a2) = ab(t);
                    let (r, th) = (s[0], s[1]);
                    let (sn, cs) = ((n - 1.0) * th).sin_cos();
                    let rn1 = r.powf(n - 1.0);
                    o[0] = a1 * r - a2 * rn1 * r * sn;
                    o[1] = a2 * rn1 * cs;
                }),
                Arc::new(move |s| s[0] > 0.0 && ((n - 1.0) * s[1]).cos() != 0.0),
            )
        }
        SystemId::DeformedCanonical => {
            let z = params.z()?;
            (
                Arc::new(move |t, s, o| {
                    let (a, b) = ab(t);
                    o[0] = a * expm1_over(z, s[0]);
                    o[1] = -a * (z * s[0]).exp() * s[1] + b;
                }),
                Arc::new(always),
            )
        }
        SystemId::DeformedCanonicalLinearized => (
            Arc::new(move |t, s, o| {
                let (a, b) = ab(t);
                o[0] = a * (s[0] - 1.0);
                o[1] = -a * s[1] / s[0] + b;
            }),
            Arc::new(|s| s[0] > 0.0),
        ),
        SystemId::ApproxOrder1 => {
            let z = params.z()?;
            (
                Arc::new(move |t, s, o| {
                    let (a, b) = ab(t);
                    let (x, y) = (s[0], s[1]);
                    o[0] = a * (x + 0.5 * z * x * x);
                    o[1] = -a * (y + z * x * y) + b;
                }),
                Arc::new(always),
            )
        }
        SystemId::ApproxOrder2 => {
            let z = params.z()?;
            (
                Arc::new(move |t, s, o| {
                    let (a, b) = ab(t);
                    let (x, y) = (s[0], s[1]);
                    o[0] = a * (x + 0.5 * z * x * x + z * z * x * x * x / 6.0);
                    o[1] = -a * (y + z * x * y + 0.5 * z * z * x * x * y) + b;
                }),
                Arc::new(always),
            )
        }
        SystemId::ApproxOrderK => {
            let z = params.z()?;
            let k = params.k()?;
            (
                Arc::new(move |t, s, o| {
                    let (a, b) = ab(t);
                    let (x, y) = (s[0], s[1]);
                    o[0] = a * x * truncated_p(k, z * x);
                    o[1] = -a * truncated_exp(k, z * x) * y + b;
                }),
                Arc::new(always),
            )
        }
        SystemId::DeformedBernoulli => {
            let n = params.n()?;
            let z = params.z()?;
            (
                Arc::new(move |t, s, o| {
                    let (a1, a2) = ab(t);
                    let (r, th) = (s[0], s[1]);
                    let (sn, cs) = ((n - 1.0) * th).sin_cos();
                    let rn1 = r.powf(n - 1.0);
                    let w = z * rn1 / sn;
                    let (ew, pw) = (w.exp(), psi(w));
                    // (sin^3/(z r^{n-2})) (e^w - 1) = r sin^2 psi(w)
                    o[0] = a1 * (r * cs * cs * ew + r * sn * sn * pw) + a2 * rn1 * r * cs;
                    o[1] = a1 * sn * cs * (ew - pw) + a2 * rn1 * sn;
                }),
                Arc::new(move |s| s[0] > 0.0 && ((n - 1.0) * s[1]).sin() != 0.0),
            )
        }
        SystemId::TwocopyCanonical => (
            Arc::new(move |t, s, o| {
                let (a, b) = ab(t);
                o[0] = a * s[0];
                o[1] = -a * s[1] + b;
                o[2] = a * s[2];
                o[3] = -a * s[3] + b;
            }),
            Arc::new(always),
        ),
        SystemId::DeformedTwoparticle => {
            let z = params.z()?;
            (
                Arc::new(move |t, s, o| {
                    let (a, b) = ab(t);
                    let (x1, y1, x2, y2) = (s[0], s[1], s[2], s[3]);
                    let e2 = (z * x2).exp();
                    o[0] = a * expm1_over(z, x1) * e2;
                    o[1] = -a * (z * (x1 + x2)).exp() * y1 + b;
                    o[2] = a * expm1_over(z, x2);
                    o[3] = -a * e2 * ((z * x1).exp_m1() * y1 + y2) + b;
                }),
                Arc::new(always),
            )
        }
        SystemId::DeformedTwoparticleLinearized => (
            Arc::new(move |t, s, o| {
                let (a, b) = ab(t);
                let (u1, y1, u2, y2) = (s[0], s[1], s[2], s[3]);
                o[0] = a / u2 * (u1 - 1.0);
                o[1] = -a * y1 / (u1 * u2) + b;
                o[2] = a * (u2 - 1.0);
                o[3] = a / u2 * ((u1 - 1.0) / u1 * y1 - y2) + b;
            }),
            Arc::new(|s| s[0] > 0.0 && s[2] > 0.0),
        ),
        SystemId::CoupledBernoulli => {
            let (p, q, r, m) = params.pqrm()?;
            let lam = m * r - p * q;
            (
                Arc::new(move |t, s, o| {
                    let (a, b) = ab(t);
                    let (u, v) = (s[0], s[1]);
                    o[0] = a * (r - q) / lam * u + r * b / (lam * v.powf(q)) * u.powf(m + 1.0);
                    o[1] = -a * (m - p) / lam * v + p * b * u.powf(m) / lam * v.powf(1.0 - q);
                }),
                Arc::new(|s| s[0] > 0.0 && s[1] > 0.0),
            )
        }
        SystemId::DeformedCoupledBernoulli | SystemId::DeformedCoupledSpecial => {
            let (p, q, r, m) = if id == SystemId::DeformedCoupledSpecial {
                params.special_pqrm()?
            } else {
                params.pqrm()?
            };
            let lam = m * r - p * q;
            (
                Arc::new(move |t, s, o| {
                    let (a, b) = ab(t);
                    let (u, v) = (s[0], s[1]);
                    let (up, vr) = (u.powf(p), v.powf(r));
                    o[0] = a * ((r + q) * vr - q * up) / (lam * u.powf(p - 1.0))
                        + r * b / (lam * v.powf(q)) * u.powf(m + 1.0);
                    o[1] = -a * (m * up - (m + p) * vr) * v / (lam * up)
                        + p * b * u.powf(m) / lam * v.powf(1.0 - q);
                }),
                Arc::new(|s| s[0] > 0.0 && s[1] > 0.0),
            )
        }
    };
    Ok(TdSystem::new(
        id.as_str(),
        id.labels().to_vec(),
        rhs,
        guard,
        coeffs.breakpoints(),
    ))
}

/// `P_k(w) = sum_{j=0}^{k} w^j/(j+1)!` at `w = z x`.
pub(crate) fn truncated_p(k: u32, w: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=k {
        term *= w / (j + 1) as f64;
        sum += term;
    }
    sum
}

/// `sum_{j=0}^{k} w^j/j!`.
pub(crate) fn truncated_exp(k: u32, w: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=k {
        term *= w / j as f64;
        sum += term;
    }
    sum
}
