use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::catalog::binomial_parts;
use super::{dpsi, expm1_over, psi};

pub type VecField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JacField = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Region used when sampling test points for a set of fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    /// `|x|, |y| <= 2`, and `|z x| <= 1` when deformed.
    Cartesian { z: Option<f64> },
    /// `u` in `[-2, 2]`, `v` in `[0.2, 2]`.
    UpperHalfPlane,
    /// `r` in `[0.2, 2]`, `(n-1)θ` in `[0.1, π/2 - 0.1]`, and
    /// `|z r^{n-1}/sin((n-1)θ)| <= 1` when deformed.
    Polar { n: f64, z: Option<f64> },
    /// `(x1, y1, x2, y2)` with all components in `[-2, 2]`, and
    /// `|z x1|, |z x2|, |z (x1 + x2)| <= 1` when deformed.
    Cartesian4 { z: Option<f64> },
}

impl Chart {
    pub fn dim(&self) -> usize {
        match self {
            Chart::Cartesian4 { .. } => 4,
            _ => 2,
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let zx = |z: Option<f64>, x: f64| z.map_or(true, |z| (z * x).abs() <= 1.0);
        let box2 = |v: f64| (-2.0..=2.0).contains(&v);
        match *self {
            Chart::Cartesian { z } => box2(p[0]) && box2(p[1]) && zx(z, p[0]),
            Chart::UpperHalfPlane => box2(p[0]) && (0.2..=2.0).contains(&p[1]),
            Chart::Polar { n, z } => {
                let phi = (n - 1.0) * p[1];
                (0.2..=2.0).contains(&p[0])
                    && (0.1..=FRAC_PI_2 - 0.1).contains(&phi)
                    && zx(z, p[0].powf(n - 1.0) / phi.sin())
            }
            Chart::Cartesian4 { z } => {
                p.iter().all(|&v| box2(v)) && zx(z, p[0]) && zx(z, p[2]) && zx(z, p[0] + p[2])
            }
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        loop {
            let p = match *self {
                Chart::Cartesian { .. } => vec![rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0)],
                Chart::UpperHalfPlane => vec![rng.gen_range(-2.0..=2.0), rng.gen_range(0.2..=2.0)],
                Chart::Polar { n, .. } => vec![
                    rng.gen_range(0.2..=2.0),
                    rng.gen_range(0.1..=FRAC_PI_2 - 0.1) / (n - 1.0),
                ],
                Chart::Cartesian4 { .. } => (0..4).map(|_| rng.gen_range(-2.0..=2.0)).collect(),
            };
            if self.contains(&p) {
                return p;
            }
        }
    }

    /// `count` reproducible points from the chart.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..count).map(|_| self.sample(&mut rng)).collect()
    }
}

/// Two autonomous fields with analytic Jacobians (`J[i][j] = ∂X^i/∂p_j`)
/// and the expected bracket `[X1, X2] = c(p) X2`.
#[derive(Clone)]
pub struct VectorFieldPair {
    pub name: String,
    pub dim: usize,
    pub x1: VecField,
    pub j1: JacField,
    pub x2: VecField,
    pub j2: JacField,
    pub bracket_coeff: ScalarField,
    pub chart: Chart,
}

impl fmt::Debug for VectorFieldPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldPair")
            .field("name", &self.name)
            .field("chart", &self.chart)
            .finish()
    }
}

/// Scalar `f` of `ω = f Σ dq_i ∧ dp_i` (pairs `(0,1)`, `(2,3)`), with its gradient.
#[derive(Clone)]
pub struct SymplecticWeight {
    pub f: ScalarField,
    pub grad: VecField,
}

impl SymplecticWeight {
    pub fn canonical(dim: usize) -> Self {
        SymplecticWeight {
            f: Arc::new(|_| 1.0),
            grad: Arc::new(move |_| vec![0.0; dim]),
        }
    }
}

/// Hamiltonians `h1, h2` with analytic gradients, the symplectic weight they
/// refer to, the matching fields, and the expected value of `{h1, h2}`.
#[derive(Clone)]
pub struct HamiltonianPair {
    pub name: String,
    pub dim: usize,
    pub h1: ScalarField,
    pub g1: VecField,
    pub h2: ScalarField,
    pub g2: VecField,
    pub weight: SymplecticWeight,
    pub expected_poisson: ScalarField,
    pub fields: VectorFieldPair,
}

impl fmt::Debug for HamiltonianPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianPair")
            .field("name", &self.name)
            .field("chart", &self.fields.chart)
            .finish()
    }
}

fn fd_jacobian(f: &VecField, p: &[f64], h: f64) -> Vec<Vec<f64>> {
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

impl VectorFieldPair {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        chart: Chart,
        x1: VecField,
        j1: JacField,
        x2: VecField,
        j2: JacField,
        bracket_coeff: ScalarField,
    ) -> Self {
        let pair = VectorFieldPair {
            name: name.into(),
            dim: chart.dim(),
            x1,
            j1,
            x2,
            j2,
            bracket_coeff,
            chart,
        };
        if cfg!(debug_assertions) {
            if let Some(err) = pair.jacobian_fd_mismatch(4, 1e-5) {
                panic!("analytic Jacobian of {} disagrees with finite differences: {err}", pair.name);
            }
        }
        pair
    }

    /// Largest relative mismatch between the analytic Jacobians and central
    /// differences over `count` chart points, if it exceeds `tol`.
    pub fn jacobian_fd_mismatch(&self, count: usize, tol: f64) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for p in self.chart.sample_points(count, 0x5eed) {
            for (f, j) in [(&self.x1, &self.j1), (&self.x2, &self.j2)] {
                let fd = fd_jacobian(f, &p, 1e-6);
                let an = j(&p);
                for (ra, rf) in an.iter().zip(&fd) {
                    for (a, b) in ra.iter().zip(rf) {
                        worst = worst.max((a - b).abs() / a.abs().max(1.0));
                    }
                }
            }
        }
        (worst > tol).then_some(worst)
    }

    /// Replaces the Jacobian of `X2` with a wrong one. Negative control for
    /// the verification suite.
    #[doc(hidden)]
    pub fn with_corrupted_jacobian(mut self) -> Self {
        let j2 = Arc::clone(&self.j2);
        self.j2 = Arc::new(move |p| {
            let mut j = j2(p);
            j[0][0] += 0.5;
            j
        });
        self.name = format!("{} (corrupted)", self.name);
        self
    }

    pub fn canonical() -> Self {
        Self::new(
            "canonical X_A, X_B",
            Chart::Cartesian { z: None },
            Arc::new(|p| vec![p[0], -p[1]]),
            Arc::new(|_| vec![vec![1.0, 0.0], vec![0.0, -1.0]]),
            Arc::new(|_| vec![0.0, 1.0]),
            Arc::new(|_| vec![vec![0.0; 2]; 2]),
            Arc::new(|_| 1.0),
        )
    }

    pub fn bernoulli_n2() -> Self {
        Self::new(
            "Bernoulli n=2 Cartesian X_1, X_2",
            Chart::UpperHalfPlane,
            Arc::new(|p| vec![p[0], p[1]]),
            Arc::new(|_| vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            Arc::new(|p| vec![p[0] * p[0] - p[1] * p[1], 2.0 * p[0] * p[1]]),
            Arc::new(|p| vec![vec![2.0 * p[0], -2.0 * p[1]], vec![2.0 * p[1], 2.0 * p[0]]]),
            Arc::new(|_| 1.0),
        )
    }

    /// Fields of the general integer-`n` Cartesian system, `X2 = (Re w^n, Im w^n)`.
    pub fn bernoulli_cartesian(n: u32) -> Self {
        let nf = n as f64;
        Self::new(
            format!("Bernoulli n={n} Cartesian X_1, X_2"),
            Chart::Cartesian { z: None },
            Arc::new(|p| vec![p[0], p[1]]),
            Arc::new(|_| vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            Arc::new(move |p| {
                let (re, im) = binomial_parts(n, p[0], p[1]);
                vec![re, im]
            }),
            Arc::new(move |p| {
                // holomorphic: derivative n w^{n-1}
                let (re, im) = binomial_parts(n - 1, p[0], p[1]);
                let (re, im) = (nf * re, nf * im);
                vec![vec![re, -im], vec![im, re]]
            }),
            Arc::new(move |_| nf - 1.0),
        )
    }

    pub fn bernoulli_polar(n: f64) -> Self {
        let k = n - 1.0;
        Self::new(
            format!("Bernoulli polar Y_1, Y_2 (n={n})"),
            Chart::Polar { n, z: None },
            Arc::new(|p| vec![p[0], 0.0]),
            Arc::new(|_| vec![vec![1.0, 0.0], vec![0.0, 0.0]]),
            Arc::new(move |p| {
                let (s, c) = (k * p[1]).sin_cos();
                let rk = p[0].powf(k);
                vec![rk * p[0] * c, rk * s]
            }),
            Arc::new(move |p| {
                let r = p[0];
                let (s, c) = (k * p[1]).sin_cos();
                let rk = r.powf(k);
                vec![
                    vec![n * rk * c, -k * rk * r * s],
                    vec![k * rk / r * s, k * rk * c],
                ]
            }),
            Arc::new(move |_| k),
        )
    }

    pub fn bernoulli_variant(n: f64) -> Self {
        let k = n - 1.0;
        Self::new(
            format!("Bernoulli variant Z_1, Z_2 (n={n})"),
            Chart::Polar { n, z: None },
            Arc::new(|p| vec![p[0], 0.0]),
            Arc::new(|_| vec![vec![1.0, 0.0], vec![0.0, 0.0]]),
            Arc::new(move |p| {
                let (s, c) = (k * p[1]).sin_cos();
                let rk = p[0].powf(k);
                vec![-rk * p[0] * s, rk * c]
            }),
            Arc::new(move |p| {
                let r = p[0];
                let (s, c) = (k * p[1]).sin_cos();
                let rk = r.powf(k);
                vec![
                    vec![-n * rk * s, -k * rk * r * c],
                    vec![k * rk / r * c, -k * rk * s],
                ]
            }),
            Arc::new(move |_| k),
        )
    }

    pub fn deformed_canonical(z: f64) -> Self {
        Self::new(
            format!("deformed X_zA, X_zB (z={z})"),
            Chart::Cartesian { z: Some(z) },
            Arc::new(move |p| vec![expm1_over(z, p[0]), -(z * p[0]).exp() * p[1]]),
            Arc::new(move |p| {
                let e = (z * p[0]).exp();
                vec![vec![e, 0.0], vec![-z * e * p[1], -e]]
            }),
            Arc::new(|_| vec![0.0, 1.0]),
            Arc::new(|_| vec![vec![0.0; 2]; 2]),
            Arc::new(move |p| (z * p[0]).exp()),
        )
    }

    pub fn deformed_polar(n: f64, z: f64) -> Self {
        let k = n - 1.0;
        let undeformed = Self::bernoulli_polar(n);
        Self::new(
            format!("deformed Bernoulli Y_z1, Y_z2 (n={n}, z={z})"),
            Chart::Polar { n, z: Some(z) },
            Arc::new(move |p| {
                let r = p[0];
                let (s, c) = (k * p[1]).sin_cos();
                let w = z * r.powf(k) / s;
                let (ew, pw) = (w.exp(), psi(w));
                vec![r * c * c * ew + r * s * s * pw, s * c * (ew - pw)]
            }),
            Arc::new(move |p| {
                let r = p[0];
                let (s, c) = (k * p[1]).sin_cos();
                let w = z * r.powf(k) / s;
                let (ew, pw, dp) = (w.exp(), psi(w), dpsi(w));
                let (wr, wt) = (k * w / r, -k * w * c / s);
                // chi(w) = e^w - psi(w) = w psi'(w), chi' = e^w - psi'(w)
                let (chi, dchi) = (w * dp, ew - dp);
                let (dc2, ds2) = (-2.0 * k * s * c, 2.0 * k * s * c);
                vec![
                    vec![
                        c * c * ew + r * c * c * ew * wr + s * s * pw + r * s * s * dp * wr,
                        r * (dc2 * ew + c * c * ew * wt + ds2 * pw + s * s * dp * wt),
                    ],
                    vec![
                        s * c * dchi * wr,
                        k * (c * c - s * s) * chi + s * c * dchi * wt,
                    ],
                ]
            }),
            undeformed.x2,
            undeformed.j2,
            Arc::new(move |p| {
                let (r, s) = (p[0], (k * p[1]).sin());
                k * (z * r.powf(k) / s).exp()
            }),
        )
    }

    pub fn twocopy() -> Self {
        Self::new(
            "two-copy X_A, X_B",
            Chart::Cartesian4 { z: None },
            Arc::new(|p| vec![p[0], -p[1], p[2], -p[3]]),
            Arc::new(|_| {
                let mut j = vec![vec![0.0; 4]; 4];
                for (i, row) in j.iter_mut().enumerate() {
                    row[i] = if i % 2 == 0 { 1.0 } else { -1.0 };
                }
                j
            }),
            Arc::new(|_| vec![0.0, 1.0, 0.0, 1.0]),
            Arc::new(|_| vec![vec![0.0; 4]; 4]),
            Arc::new(|_| 1.0),
        )
    }

    pub fn deformed_twoparticle(z: f64) -> Self {
        Self::new(
            format!("two-particle X_zA, X_zB (z={z})"),
            Chart::Cartesian4 { z: Some(z) },
            Arc::new(move |p| {
                let (x1, y1, x2, y2) = (p[0], p[1], p[2], p[3]);
                let (e1, e2) = ((z * x1).exp(), (z * x2).exp());
                vec![
                    expm1_over(z, x1) * e2,
                    -e1 * e2 * y1,
                    expm1_over(z, x2),
                    -e2 * ((z * x1).exp_m1() * y1 + y2),
                ]
            }),
            Arc::new(move |p| {
                let (x1, y1, x2, y2) = (p[0], p[1], p[2], p[3]);
                let (e1, e2) = ((z * x1).exp(), (z * x2).exp());
                let em1 = (z * x1).exp_m1();
                vec![
                    vec![e1 * e2, 0.0, expm1_over(z, x1) * z * e2, 0.0],
                    vec![-z * e1 * e2 * y1, -e1 * e2, -z * e1 * e2 * y1, 0.0],
                    vec![0.0, 0.0, e2, 0.0],
                    vec![-z * e1 * e2 * y1, -e2 * em1, -z * e2 * (em1 * y1 + y2), -e2],
                ]
            }),
            Arc::new(|_| vec![0.0, 1.0, 0.0, 1.0]),
            Arc::new(|_| vec![vec![0.0; 4]; 4]),
            Arc::new(move |p| (z * (p[0] + p[2])).exp()),
        )
    }
}

impl HamiltonianPair {
    pub fn canonical() -> Self {
        HamiltonianPair {
            name: "canonical h_A = xy, h_B = -x".into(),
            dim: 2,
            h1: Arc::new(|p| p[0] * p[1]),
            g1: Arc::new(|p| vec![p[1], p[0]]),
            h2: Arc::new(|p| -p[0]),
            g2: Arc::new(|_| vec![-1.0, 0.0]),
            weight: SymplecticWeight::canonical(2),
            expected_poisson: Arc::new(|p| p[0]),
            fields: VectorFieldPair::canonical(),
        }
    }

    pub fn bernoulli_n2() -> Self {
        HamiltonianPair {
            name: "Bernoulli n=2 h_1 = -u/v, h_2 = -(u²+v²)/v".into(),
            dim: 2,
            h1: Arc::new(|p| -p[0] / p[1]),
            g1: Arc::new(|p| vec![-1.0 / p[1], p[0] / (p[1] * p[1])]),
            h2: Arc::new(|p| -(p[0] * p[0] + p[1] * p[1]) / p[1]),
            g2: Arc::new(|p| vec![-2.0 * p[0] / p[1], p[0] * p[0] / (p[1] * p[1]) - 1.0]),
            weight: SymplecticWeight {
                f: Arc::new(|p| 1.0 / (p[1] * p[1])),
                grad: Arc::new(|p| vec![0.0, -2.0 / p[1].powi(3)]),
            },
            expected_poisson: Arc::new(|p| (p[0] * p[0] + p[1] * p[1]) / p[1]),
            fields: VectorFieldPair::bernoulli_n2(),
        }
    }

    fn polar_weight(n: f64) -> SymplecticWeight {
        let k = n - 1.0;
        SymplecticWeight {
            f: Arc::new(move |p| {
                let s = (k * p[1]).sin();
                k / (p[0] * s * s)
            }),
            grad: Arc::new(move |p| {
                let r = p[0];
                let (s, c) = (k * p[1]).sin_cos();
                vec![-k / (r * r * s * s), -2.0 * k * k * c / (r * s * s * s)]
            }),
        }
    }

    fn polar_h2(n: f64) -> (ScalarField, VecField) {
        let k = n - 1.0;
        (
            Arc::new(move |p| -p[0].powf(k) / (k * p[1]).sin()),
            Arc::new(move |p| {
                let r = p[0];
                let (s, c) = (k * p[1]).sin_cos();
                let rk = r.powf(k);
                vec![-k * rk / (r * s), k * rk * c / (s * s)]
            }),
        )
    }

    pub fn bernoulli_polar(n: f64) -> Self {
        let k = n - 1.0;
        let (h2, g2) = Self::polar_h2(n);
        HamiltonianPair {
            name: format!("Bernoulli polar h_1, h_2 (n={n})"),
            dim: 2,
            h1: Arc::new(move |p| {
                let (s, c) = (k * p[1]).sin_cos();
                -c / s
            }),
            g1: Arc::new(move |p| {
                let s = (k * p[1]).sin();
                vec![0.0, k / (s * s)]
            }),
            h2,
            g2,
            weight: Self::polar_weight(n),
            expected_poisson: Arc::new(move |p| k * p[0].powf(k) / (k * p[1]).sin()),
            fields: VectorFieldPair::bernoulli_polar(n),
        }
    }

    pub fn deformed_canonical(z: f64) -> Self {
        HamiltonianPair {
            name: format!("deformed h_zA, h_zB (z={z})"),
            dim: 2,
            h1: Arc::new(move |p| expm1_over(z, p[0]) * p[1]),
            g1: Arc::new(move |p| vec![(z * p[0]).exp() * p[1], expm1_over(z, p[0])]),
            h2: Arc::new(|p| -p[0]),
            g2: Arc::new(|_| vec![-1.0, 0.0]),
            weight: SymplecticWeight::canonical(2),
            // -(1 - e^{-z h_B})/z with h_B = -x
            expected_poisson: Arc::new(move |p| expm1_over(z, p[0])),
            fields: VectorFieldPair::deformed_canonical(z),
        }
    }

    pub fn deformed_polar(n: f64, z: f64) -> Self {
        let k = n - 1.0;
        let (h2, g2) = Self::polar_h2(n);
        HamiltonianPair {
            name: format!("deformed Bernoulli h_z1, h_z2 (n={n}, z={z})"),
            dim: 2,
            h1: Arc::new(move |p| {
                let (s, c) = (k * p[1]).sin_cos();
                -c / s * psi(z * p[0].powf(k) / s)
            }),
            g1: Arc::new(move |p| {
                let r = p[0];
                let (s, c) = (k * p[1]).sin_cos();
                let w = z * r.powf(k) / s;
                let (wr, wt) = (k * w / r, -k * w * c / s);
                let dp = dpsi(w);
                vec![-c / s * dp * wr, k / (s * s) * psi(w) - c / s * dp * wt]
            }),
            h2,
            g2,
            weight: Self::polar_weight(n),
            // (n-1)(e^{-z h_z2} - 1)/z with -h_z2 = r^{n-1}/sin
            expected_poisson: Arc::new(move |p| k * expm1_over(z, p[0].powf(k) / (k * p[1]).sin())),
            fields: VectorFieldPair::deformed_polar(n, z),
        }
    }

    pub fn twocopy() -> Self {
        HamiltonianPair {
            name: "two-copy h_A, h_B".into(),
            dim: 4,
            h1: Arc::new(|p| p[0] * p[1] + p[2] * p[3]),
            g1: Arc::new(|p| vec![p[1], p[0], p[3], p[2]]),
            h2: Arc::new(|p| -p[0] - p[2]),
            g2: Arc::new(|_| vec![-1.0, 0.0, -1.0, 0.0]),
            weight: SymplecticWeight::canonical(4),
            expected_poisson: Arc::new(|p| p[0] + p[2]),
            fields: VectorFieldPair::twocopy(),
        }
    }

    pub fn deformed_twoparticle(z: f64) -> Self {
        HamiltonianPair {
            name: format!("two-particle h_zA, h_zB (z={z})"),
            dim: 4,
            h1: Arc::new(move |p| {
                expm1_over(z, p[0]) * (z * p[2]).exp() * p[1] + expm1_over(z, p[2]) * p[3]
            }),
            g1: Arc::new(move |p| {
                let (x1, y1, x2, y2) = (p[0], p[1], p[2], p[3]);
                let (e1, e2) = ((z * x1).exp(), (z * x2).exp());
                vec![
                    e1 * e2 * y1,
                    expm1_over(z, x1) * e2,
                    expm1_over(z, x1) * z * e2 * y1 + e2 * y2,
                    expm1_over(z, x2),
                ]
            }),
            h2: Arc::new(|p| -p[0] - p[2]),
            g2: Arc::new(|_| vec![-1.0, 0.0, -1.0, 0.0]),
            weight: SymplecticWeight::canonical(4),
            expected_poisson: Arc::new(move |p| expm1_over(z, p[0] + p[2])),
            fields: VectorFieldPair::deformed_twoparticle(z),
        }
    }
}

/// Every field pair with a stated bracket, at representative parameters.
pub fn all_vector_field_pairs() -> Vec<VectorFieldPair> {
    vec![
        VectorFieldPair::canonical(),
        VectorFieldPair::bernoulli_n2(),
        VectorFieldPair::bernoulli_cartesian(3),
        VectorFieldPair::bernoulli_cartesian(4),
        VectorFieldPair::bernoulli_polar(2.0),
        VectorFieldPair::bernoulli_polar(3.0),
        VectorFieldPair::bernoulli_polar(2.5),
        VectorFieldPair::bernoulli_variant(3.0),
        VectorFieldPair::deformed_canonical(0.3),
        VectorFieldPair::deformed_canonical(-0.7),
        VectorFieldPair::deformed_polar(2.0, 0.3),
        VectorFieldPair::deformed_polar(3.0, 0.2),
        VectorFieldPair::twocopy(),
        VectorFieldPair::deformed_twoparticle(0.5),
    ]
}

/// Every Hamiltonian pair with a stated Poisson relation, at representative
/// parameters.
pub fn all_hamiltonian_pairs() -> Vec<HamiltonianPair> {
    vec![
        HamiltonianPair::canonical(),
        HamiltonianPair::bernoulli_n2(),
        HamiltonianPair::bernoulli_polar(2.0),
        HamiltonianPair::bernoulli_polar(3.0),
        HamiltonianPair::deformed_canonical(0.3),
        HamiltonianPair::deformed_canonical(-0.7),
        HamiltonianPair::deformed_polar(2.0, 0.3),
        HamiltonianPair::deformed_polar(3.0, 0.2),
        HamiltonianPair::twocopy(),
        HamiltonianPair::deformed_twoparticle(0.5),
    ]
}
