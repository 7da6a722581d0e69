//! Numeric checks of the algebraic identities behind the systems: Lie
//! brackets, Hamiltonian compatibility `ι_X ω = dh`, invariance of `ω`
//! under the fields, Poisson brackets, and the rotation relating the two
//! Bernoulli families.

use std::fmt;

use serde::Serialize;

use crate::error::Error;
use crate::systems::{
    HamiltonianPair, SymplecticWeight, SystemError, SystemId, VectorFieldPair,
};

pub const BRACKET_TOL: f64 = 1e-8;
pub const POISSON_TOL: f64 = 1e-8;
pub const ANALYTIC_TOL: f64 = 1e-9;
pub const FD_TOL: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-5;
pub const DEFAULT_POINTS: usize = 100;

/// Result of one identity over a set of sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub identity: String,
    pub points: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    fn new(identity: impl Into<String>, residuals: impl IntoIterator<Item = f64>, tolerance: f64) -> Self {
        let mut points = 0;
        let mut max_residual: f64 = 0.0;
        for r in residuals {
            points += 1;
            // NaN must fail
            max_residual = if r.is_nan() || max_residual.is_nan() { f64::NAN } else { max_residual.max(r) };
        }
        CheckReport {
            identity: identity.into(),
            points,
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} (max residual {:.3e}, tol {:.0e}, {} points)",
            if self.pass { "PASS" } else { "FAIL" },
            self.identity,
            self.max_residual,
            self.tolerance,
            self.points
        )
    }
}

/// How partial derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivatives {
    Analytic,
    /// Central differences with the given step.
    FiniteDifference(f64),
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> Vec<f64> {
    (0..p.len())
        .map(|c| {
            let (mut pp, mut pm) = (p.to_vec(), p.to_vec());
            pp[c] += h;
            pm[c] -= h;
            (f(&pp) - f(&pm)) / (2.0 * h)
        })
        .collect()
}

fn fd_jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, p: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut jac = vec![vec![0.0; n]; n];
    for c in 0..n {
        let (mut pp, mut pm) = (p.to_vec(), p.to_vec());
        pp[c] += h;
        pm[c] -= h;
        let (fp, fm) = (f(&pp), f(&pm));
        for r in 0..n {
            jac[r][c] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    jac
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `[X1, X2](p) = J2(p) X1(p) - J1(p) X2(p)`.
pub fn lie_bracket_numeric(pair: &VectorFieldPair, p: &[f64]) -> Vec<f64> {
    let (x1, x2) = ((pair.x1)(p), (pair.x2)(p));
    let a = mat_vec(&(pair.j2)(p), &x1);
    let b = mat_vec(&(pair.j1)(p), &x2);
    a.iter().zip(&b).map(|(u, v)| u - v).collect()
}

/// `[X1, X2] = c(p) X2` at every point.
pub fn check_bracket(pair: &VectorFieldPair, points: &[Vec<f64>], tol: f64) -> CheckReport {
    let res = points.iter().map(|p| {
        let br = lie_bracket_numeric(pair, p);
        let c = (pair.bracket_coeff)(p);
        let rhs: Vec<f64> = (pair.x2)(p).iter().map(|v| c * v).collect();
        max_abs_diff(&br, &rhs)
    });
    CheckReport::new(format!("bracket: {}", pair.name), res, tol)
}

/// Residuals of `∂h/∂q + f X^p` and `∂h/∂p - f X^q` over the canonical
/// pairs `(q, p)` of coordinates.
/// Largest compatibility residual and the largest gradient entry.
fn compat_residual(grad: &[f64], f: f64, x: &[f64]) -> (f64, f64) {
    let mut worst: f64 = 0.0;
    for i in (0..x.len()).step_by(2) {
        worst = worst
            .max((grad[i] + f * x[i + 1]).abs())
            .max((grad[i + 1] - f * x[i]).abs());
    }
    (worst, grad.iter().fold(0.0, |m, g| m.max(g.abs())))
}

/// Finite differences lose accuracy in proportion to the size of what they
/// differentiate, so their residuals are measured relative to it.
fn scaled(deriv: Derivatives, (res, scale): (f64, f64)) -> f64 {
    match deriv {
        Derivatives::Analytic => res,
        Derivatives::FiniteDifference(_) => res / (1.0 + scale),
    }
}

/// `ι_{X_i} ω = dh_i` for both pairs `(h1, X1)` and `(h2, X2)` of `hp`, with
/// the fields of `vp`.
pub fn check_hamiltonian_compat(
    hp: &HamiltonianPair,
    vp: &VectorFieldPair,
    points: &[Vec<f64>],
    deriv: Derivatives,
    tol: f64,
) -> [CheckReport; 2] {
    let pairs = [(&hp.h1, &hp.g1, &vp.x1, "h1/X1"), (&hp.h2, &hp.g2, &vp.x2, "h2/X2")];
    pairs.map(|(h, g, x, tag)| {
        let res = points.iter().map(|p| {
            let grad = match deriv {
                Derivatives::Analytic => g(p),
                Derivatives::FiniteDifference(step) => fd_gradient(&|q| h(q), p, step),
            };
            scaled(deriv, compat_residual(&grad, (hp.weight.f)(p), &x(p)))
        });
        CheckReport::new(format!("compatibility {tag}: {}", hp.name), res, tol)
    })
}

/// `L_X ω = d(ι_X ω) = 0` for `ω = f Σ dq ∧ dp`. With `α = ι_X ω` this is
/// `∂_j α_i = ∂_i α_j`; in the plane it reduces to `∂_u(f X¹) + ∂_v(f X²) = 0`.
fn invariance_residual(
    p: &[f64],
    f: f64,
    grad_f: &[f64],
    x: &[f64],
    jac: &[Vec<f64>],
) -> (f64, f64) {
    let n = p.len();
    // α_i = sign_i f X^{partner(i)}: α_q = -f X^p, α_p = f X^q
    let partner = |i: usize| if i % 2 == 0 { i + 1 } else { i - 1 };
    let sign = |i: usize| if i % 2 == 0 { -1.0 } else { 1.0 };
    let dalpha = |i: usize, j: usize| sign(i) * (grad_f[j] * x[partner(i)] + f * jac[partner(i)][j]);
    let (mut worst, mut scale): (f64, f64) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (dalpha(i, j), dalpha(j, i));
            worst = worst.max((a - b).abs());
            scale = scale.max(a.abs()).max(b.abs());
        }
    }
    (worst, scale)
}

/// Invariance of `ω = f Σ dq ∧ dp` under both fields of `vp`.
pub fn check_symplectic_invariance(
    vp: &VectorFieldPair,
    weight: &SymplecticWeight,
    points: &[Vec<f64>],
    deriv: Derivatives,
    tol: f64,
) -> CheckReport {
    let res = points.iter().map(|p| {
        let (f, grad) = match deriv {
            Derivatives::Analytic => ((weight.f)(p), (weight.grad)(p)),
            Derivatives::FiniteDifference(step) => ((weight.f)(p), fd_gradient(&|q| (weight.f)(q), p, step)),
        };
        [(&vp.x1, &vp.j1), (&vp.x2, &vp.j2)]
            .iter()
            .map(|(x, j)| {
                let jac = match deriv {
                    Derivatives::Analytic => j(p),
                    Derivatives::FiniteDifference(step) => fd_jacobian(&|q| x(q), p, step),
                };
                scaled(deriv, invariance_residual(p, f, &grad, &x(p), &jac))
            })
            .fold(0.0, f64::max)
    });
    CheckReport::new(format!("invariance: {}", vp.name), res, tol)
}

/// `{h1, h2} = Σ (∂_q h1 ∂_p h2 - ∂_p h1 ∂_q h2)/f`.
pub fn poisson_bracket(hp: &HamiltonianPair, p: &[f64]) -> Result<f64, Error> {
    let f = (hp.weight.f)(p);
    if f == 0.0 || !f.is_finite() {
        return Err(SystemError::Domain {
            what: format!("the symplectic form of {}", hp.name),
            point: p.to_vec(),
        }
        .into());
    }
    let (g1, g2) = ((hp.g1)(p), (hp.g2)(p));
    let mut s = 0.0;
    for i in (0..p.len()).step_by(2) {
        s += g1[i] * g2[i + 1] - g1[i + 1] * g2[i];
    }
    Ok(s / f)
}

pub fn check_poisson(hp: &HamiltonianPair, points: &[Vec<f64>], tol: f64) -> CheckReport {
    let res = points.iter().map(|p| match poisson_bracket(hp, p) {
        Ok(v) => (v - (hp.expected_poisson)(p)).abs(),
        Err(_) => f64::NAN,
    });
    CheckReport::new(format!("Poisson: {}", hp.name), res, tol)
}

/// `Z2(p) = R(p) Y2(p)` with `R = [[0, -r], [1/r, 0]]`, for the polar
/// Bernoulli field `Y2` and the variant field `Z2`.
pub fn check_orthogonal_relation(n: f64, points: &[Vec<f64>], tol: f64) -> CheckReport {
    let y = VectorFieldPair::bernoulli_polar(n);
    let z = VectorFieldPair::bernoulli_variant(n);
    let res = points.iter().map(|p| {
        let r = p[0];
        let y2 = (y.x2)(p);
        let ry = [-r * y2[1], y2[0] / r];
        max_abs_diff(&(z.x2)(p), &ry)
    });
    CheckReport::new(format!("orthogonal relation Z2 = R Y2 (n={n})"), res, tol)
}

/// What `verify` covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scope {
    All,
    System(SystemId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub points: usize,
    pub seed: u64,
    /// Replaces every analytic Jacobian by a wrong one (negative control).
    pub corrupt_jacobians: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            points: DEFAULT_POINTS,
            seed: 2024,
            corrupt_jacobians: false,
        }
    }
}

/// Field and Hamiltonian pairs behind a system, with the orthogonal
/// relation's `n` values.
fn catalog_for(id: SystemId) -> (Vec<VectorFieldPair>, Vec<HamiltonianPair>, Vec<f64>) {
    use SystemId::*;
    match id {
        CanonicalB2 => (vec![], vec![HamiltonianPair::canonical()], vec![]),
        BernoulliCartesianN2 => (vec![], vec![HamiltonianPair::bernoulli_n2()], vec![]),
        BernoulliCartesian => (
            vec![VectorFieldPair::bernoulli_cartesian(3), VectorFieldPair::bernoulli_cartesian(4)],
            vec![],
            vec![],
        ),
        BernoulliPolar => (
            vec![VectorFieldPair::bernoulli_polar(2.5)],
            vec![HamiltonianPair::bernoulli_polar(2.0), HamiltonianPair::bernoulli_polar(3.0)],
            vec![],
        ),
        BernoulliVariantPolar => (vec![VectorFieldPair::bernoulli_variant(3.0)], vec![], vec![2.0, 3.0, 5.0]),
        DeformedCanonical => (
            vec![],
            vec![HamiltonianPair::deformed_canonical(0.3), HamiltonianPair::deformed_canonical(-0.7)],
            vec![],
        ),
        DeformedBernoulli => (
            vec![],
            vec![HamiltonianPair::deformed_polar(2.0, 0.3), HamiltonianPair::deformed_polar(3.0, 0.2)],
            vec![],
        ),
        TwocopyCanonical => (vec![], vec![HamiltonianPair::twocopy()], vec![]),
        DeformedTwoparticle => (vec![], vec![HamiltonianPair::deformed_twoparticle(0.5)], vec![]),
        _ => (vec![], vec![], vec![]),
    }
}

/// Runs every identity attached to `scope`. A Hamiltonian pair contributes
/// its bracket, compatibility of both Hamiltonians (one row), invariance of
/// `ω` and its Poisson relation.
pub fn verify(scope: Scope, opts: &VerifyOptions) -> Vec<CheckReport> {
    let ids: Vec<SystemId> = match scope {
        Scope::All => SystemId::ALL.to_vec(),
        Scope::System(id) => vec![id],
    };
    let prep = |vp: VectorFieldPair| {
        if opts.corrupt_jacobians {
            vp.with_corrupted_jacobian()
        } else {
            vp
        }
    };
    let mut out = Vec::new();
    for id in ids {
        let (vps, hps, ortho) = catalog_for(id);
        for hp in hps {
            let vp = prep(hp.fields.clone());
            let pts = vp.chart.sample_points(opts.points, opts.seed);
            out.push(check_bracket(&vp, &pts, BRACKET_TOL));
            let [c1, c2] = check_hamiltonian_compat(&hp, &vp, &pts, Derivatives::Analytic, ANALYTIC_TOL);
            out.push(CheckReport {
                identity: format!("compatibility: {}", hp.name),
                points: c1.points,
                max_residual: c1.max_residual.max(c2.max_residual),
                tolerance: ANALYTIC_TOL,
                pass: c1.pass && c2.pass,
            });
            out.push(check_symplectic_invariance(&vp, &hp.weight, &pts, Derivatives::Analytic, ANALYTIC_TOL));
            out.push(check_poisson(&hp, &pts, POISSON_TOL));
        }
        for vp in vps {
            let vp = prep(vp);
            let pts = vp.chart.sample_points(opts.points, opts.seed);
            out.push(check_bracket(&vp, &pts, BRACKET_TOL));
        }
        for n in ortho {
            let pts = crate::systems::Chart::Polar { n, z: None }.sample_points(opts.points, opts.seed);
            out.push(check_orthogonal_relation(n, &pts, 1e-10));
        }
    }
    out
}
