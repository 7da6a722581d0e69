use std::fmt;
use std::sync::Arc;

use super::{SystemError, TdSystem};

type Map2 = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
type Jac2 = Arc<dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync>;
type Scalar2 = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
type Pred2 = Arc<dyn Fn([f64; 2]) -> bool + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffeoKind {
    /// `(r, θ) -> (x, y)` with `x = r^{n-1}/sin φ`, `y = cos φ/((1-n) r^{n-1})`, `φ = (n-1)θ`.
    Bernoulli { n: f64 },
    /// `(u, v) -> (x, y) = ((u²+v²)/v, -u/(u²+v²))`.
    Quadratic,
    /// `(u, v) -> (x, y) = (u^p v^{-r}, -v^q u^{-m})`.
    Power { p: f64, q: f64, r: f64, m: f64 },
    /// `(u, v) -> (x, y) = (-ln(u)/z, v)`.
    DeformedLog { z: f64 },
    /// `(r, θ) -> (u, v) = (r cos θ, r sin θ)`.
    Polar,
    Identity,
}

/// An invertible planar coordinate change. `forward` maps the new
/// coordinates into the old ones; `jacobian` is the analytic Jacobian of
/// `forward` and `xi` its determinant written in closed form.
#[derive(Clone)]
pub struct Diffeo2 {
    pub kind: DiffeoKind,
    forward: Map2,
    inverse: Map2,
    jacobian: Jac2,
    xi: Scalar2,
    forward_domain: Pred2,
    inverse_domain: Pred2,
}

impl fmt::Debug for Diffeo2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diffeo2").field("kind", &self.kind).finish()
    }
}

impl Diffeo2 {
    pub fn new(kind: DiffeoKind) -> Result<Self, SystemError> {
        Ok(match kind {
            DiffeoKind::Bernoulli { n } => {
                if !n.is_finite() || n == 0.0 || n == 1.0 {
                    return Err(SystemError::InvalidParam("n must be finite and not 0 or 1".into()));
                }
                let k = n - 1.0;
                Diffeo2 {
                    kind,
                    forward: Arc::new(move |[r, th]| {
                        let (s, c) = (k * th).sin_cos();
                        let rk = r.powf(k);
                        [rk / s, c / (-k * rk)]
                    }),
                    inverse: Arc::new(move |[x, y]| {
                        let rk = x.abs() / (1.0 + k * k * x * x * y * y).sqrt();
                        let phi = (1.0 / x).atan2(-k * y);
                        [rk.powf(1.0 / k), phi / k]
                    }),
                    jacobian: Arc::new(move |[r, th]| {
                        let (s, c) = (k * th).sin_cos();
                        let rk = r.powf(k);
                        [
                            [k * rk / (r * s), -k * rk * c / (s * s)],
                            [c / (rk * r), s / rk],
                        ]
                    }),
                    xi: Arc::new(move |[r, th]| {
                        let s = (k * th).sin();
                        k / (r * s * s)
                    }),
                    forward_domain: Arc::new(move |[r, th]| r > 0.0 && (k * th).sin() != 0.0),
                    inverse_domain: Arc::new(|[x, y]| x != 0.0 && x.is_finite() && y.is_finite()),
                }
            }
            DiffeoKind::Quadratic => Diffeo2 {
                kind,
                forward: Arc::new(|[u, v]| {
                    let q = u * u + v * v;
                    [q / v, -u / q]
                }),
                inverse: Arc::new(|[x, y]| {
                    let d = 1.0 + x * x * y * y;
                    [-x * x * y / d, x / d]
                }),
                jacobian: Arc::new(|[u, v]| {
                    let q = u * u + v * v;
                    [
                        [2.0 * u / v, 1.0 - u * u / (v * v)],
                        [(u * u - v * v) / (q * q), 2.0 * u * v / (q * q)],
                    ]
                }),
                xi: Arc::new(|[_, v]| 1.0 / (v * v)),
                forward_domain: Arc::new(|[_, v]| v != 0.0),
                inverse_domain: Arc::new(|[x, y]| x != 0.0 && x.is_finite() && y.is_finite()),
            },
            DiffeoKind::Power { p, q, r, m } => {
                let lam = m * r - p * q;
                if !(lam.is_finite() && lam != 0.0) {
                    return Err(SystemError::InvalidParam("Λ = mr - pq must be nonzero".into()));
                }
                Diffeo2 {
                    kind,
                    forward: Arc::new(move |[u, v]| [u.powf(p) * v.powf(-r), -v.powf(q) * u.powf(-m)]),
                    inverse: Arc::new(move |[x, y]| {
                        let (lx, ly) = (x.ln(), (-y).ln());
                        let d = p * q - r * m;
                        [((q * lx + r * ly) / d).exp(), ((m * lx + p * ly) / d).exp()]
                    }),
                    jacobian: Arc::new(move |[u, v]| {
                        let x = u.powf(p) * v.powf(-r);
                        let y = -v.powf(q) * u.powf(-m);
                        [[p * x / u, -r * x / v], [-m * y / u, q * y / v]]
                    }),
                    xi: Arc::new(move |[u, v]| lam * u.powf(p - m - 1.0) * v.powf(q - r - 1.0)),
                    forward_domain: Arc::new(|[u, v]| u > 0.0 && v > 0.0),
                    inverse_domain: Arc::new(|[x, y]| x > 0.0 && y < 0.0),
                }
            }
            DiffeoKind::DeformedLog { z } => {
                if !(z.is_finite() && z != 0.0) {
                    return Err(SystemError::InvalidParam("z must be finite and nonzero".into()));
                }
                Diffeo2 {
                    kind,
                    forward: Arc::new(move |[u, v]| [-u.ln() / z, v]),
                    inverse: Arc::new(move |[x, y]| [(-z * x).exp(), y]),
                    jacobian: Arc::new(move |[u, _]| [[-1.0 / (z * u), 0.0], [0.0, 1.0]]),
                    xi: Arc::new(move |[u, _]| -1.0 / (z * u)),
                    forward_domain: Arc::new(|[u, _]| u > 0.0),
                    inverse_domain: Arc::new(|[x, y]| x.is_finite() && y.is_finite()),
                }
            }
            DiffeoKind::Polar => Diffeo2 {
                kind,
                forward: Arc::new(|[r, th]| [r * th.cos(), r * th.sin()]),
                inverse: Arc::new(|[u, v]| [u.hypot(v), v.atan2(u)]),
                jacobian: Arc::new(|[r, th]| {
                    let (s, c) = th.sin_cos();
                    [[c, -r * s], [s, r * c]]
                }),
                xi: Arc::new(|[r, _]| r),
                forward_domain: Arc::new(|[r, th]| r > 0.0 && th > -std::f64::consts::PI && th <= std::f64::consts::PI),
                inverse_domain: Arc::new(|[u, v]| u != 0.0 || v != 0.0),
            },
            DiffeoKind::Identity => Diffeo2 {
                kind,
                forward: Arc::new(|p| p),
                inverse: Arc::new(|p| p),
                jacobian: Arc::new(|_| [[1.0, 0.0], [0.0, 1.0]]),
                xi: Arc::new(|_| 1.0),
                forward_domain: Arc::new(|_| true),
                inverse_domain: Arc::new(|_| true),
            },
        })
    }

    pub fn forward(&self, w: [f64; 2]) -> Result<[f64; 2], SystemError> {
        if !self.in_forward_domain(w) {
            return Err(self.domain_error(w));
        }
        Ok((self.forward)(w))
    }

    pub fn inverse(&self, p: [f64; 2]) -> Result<[f64; 2], SystemError> {
        if !self.in_inverse_domain(p) {
            return Err(self.domain_error(p));
        }
        Ok((self.inverse)(p))
    }

    pub fn forward_jacobian(&self, w: [f64; 2]) -> [[f64; 2]; 2] {
        (self.jacobian)(w)
    }

    /// `Ξ` in closed form.
    pub fn jac_det(&self, w: [f64; 2]) -> f64 {
        (self.xi)(w)
    }

    pub fn in_forward_domain(&self, w: [f64; 2]) -> bool {
        w.iter().all(|v| v.is_finite()) && (self.forward_domain)(w)
    }

    pub fn in_inverse_domain(&self, p: [f64; 2]) -> bool {
        p.iter().all(|v| v.is_finite()) && (self.inverse_domain)(p)
    }

    fn domain_error(&self, p: [f64; 2]) -> SystemError {
        SystemError::Domain {
            what: format!("{:?}", self.kind),
            point: p.to_vec(),
        }
    }
}

/// Velocity of the transported system at `w`: `J(w)^{-1} rhs(t, forward(w))`.
pub fn pushforward_rhs(
    d: &Diffeo2,
    s: &TdSystem,
    t: f64,
    w: [f64; 2],
) -> Result<[f64; 2], SystemError> {
    if s.dim != 2 {
        return Err(SystemError::InvalidParam("pushforward needs a planar system".into()));
    }
    let p = d.forward(w)?;
    let j = d.forward_jacobian(w);
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if !(det.abs() >= 1e-12) {
        return Err(SystemError::SingularMap(format!("{:?}", d.kind)));
    }
    let f = s.rhs(t, &p);
    Ok([
        (j[1][1] * f[0] - j[0][1] * f[1]) / det,
        (-j[1][0] * f[0] + j[0][0] * f[1]) / det,
    ])
}

/// The system `s` rewritten in the coordinates of `d`'s domain. Points where
/// the map is undefined or singular fail the guard and give NaN velocities.
pub fn pushforward_system(d: &Diffeo2, s: &TdSystem) -> Result<TdSystem, SystemError> {
    if s.dim != 2 {
        return Err(SystemError::InvalidParam("pushforward needs a planar system".into()));
    }
    let (d1, s1) = (d.clone(), s.clone());
    let (d2, guard) = (d.clone(), s.guard_fn());
    Ok(TdSystem::new(
        format!("{} in {:?} coordinates", s.name, d.kind),
        vec!["u", "v"],
        Arc::new(move |t, w, out| {
            let v = pushforward_rhs(&d1, &s1, t, [w[0], w[1]]).unwrap_or([f64::NAN; 2]);
            out.copy_from_slice(&v);
        }),
        Arc::new(move |w| {
            let w = [w[0], w[1]];
            if !d2.in_forward_domain(w) {
                return false;
            }
            let j = d2.forward_jacobian(w);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            det.abs() >= 1e-12 && guard(&(d2.forward)(w))
        }),
        s.breaks.clone(),
    ))
}
