use b2quad::structure::{
    check_bracket, check_hamiltonian_compat, check_orthogonal_relation, check_poisson,
    check_symplectic_invariance, lie_bracket_numeric, poisson_bracket, verify, Derivatives, Scope,
    VerifyOptions, FD_STEP, FD_TOL,
};
use b2quad::systems::{all_hamiltonian_pairs, all_vector_field_pairs, HamiltonianPair, SystemId, VectorFieldPair};

fn fd_bracket(pair: &VectorFieldPair, p: &[f64], h: f64) -> Vec<f64> {
    // [X1, X2] = (X1·∇) X2 - (X2·∇) X1, directional derivatives by central differences
    let along = |f: &dyn Fn(&[f64]) -> Vec<f64>, dir: &[f64]| {
        let pp: Vec<f64> = p.iter().zip(dir).map(|(a, d)| a + h * d).collect();
        let pm: Vec<f64> = p.iter().zip(dir).map(|(a, d)| a - h * d).collect();
        f(&pp).iter().zip(f(&pm)).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>()
    };
    let (x1, x2) = ((pair.x1)(p), (pair.x2)(p));
    let a = along(&|q| (pair.x2)(q), &x1);
    let b = along(&|q| (pair.x1)(q), &x2);
    a.iter().zip(b).map(|(u, v)| u - v).collect()
}

#[test]
fn full_verification_passes() {
    let reports = verify(Scope::All, &VerifyOptions::default());
    assert!(reports.len() >= 24 + 4, "{}", reports.len());
    for r in &reports {
        assert!(r.pass, "{r}");
        assert_eq!(r.points, 100, "{r}");
    }
}

#[test]
fn canonical_scope_has_four_rows() {
    let reports = verify(Scope::System(SystemId::CanonicalB2), &VerifyOptions::default());
    assert_eq!(reports.len(), 4);
    assert!(reports.iter().all(|r| r.pass));
}

#[test]
fn corrupted_jacobians_are_caught() {
    let opts = VerifyOptions { corrupt_jacobians: true, ..Default::default() };
    let reports = verify(Scope::All, &opts);
    assert!(reports.iter().any(|r| !r.pass));
}

#[test]
fn brackets_by_finite_differences() {
    for pair in all_vector_field_pairs() {
        let pts = pair.chart.sample_points(50, 7);
        let worst = pts
            .iter()
            .map(|p| {
                let fd = fd_bracket(&pair, p, FD_STEP);
                let an = lie_bracket_numeric(&pair, p);
                let scale = an.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                fd.iter().zip(&an).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        assert!(worst <= FD_TOL, "{}: {worst:e}", pair.name);
        assert!(check_bracket(&pair, &pts, 1e-8).pass, "{}", pair.name);
    }
}

#[test]
fn compatibility_and_invariance_by_finite_differences() {
    for hp in all_hamiltonian_pairs() {
        let pts = hp.fields.chart.sample_points(50, 11);
        let deriv = Derivatives::FiniteDifference(FD_STEP);
        for r in check_hamiltonian_compat(&hp, &hp.fields, &pts, deriv, FD_TOL) {
            assert!(r.pass, "{r}");
        }
        let r = check_symplectic_invariance(&hp.fields, &hp.weight, &pts, deriv, FD_TOL);
        assert!(r.pass, "{r}");
    }
}

fn fd_poisson(hp: &HamiltonianPair, p: &[f64]) -> f64 {
    let h = 1e-6;
    let grad = |f: &dyn Fn(&[f64]) -> f64| {
        (0..p.len())
            .map(|c| {
                let (mut a, mut b) = (p.to_vec(), p.to_vec());
                a[c] += h;
                b[c] -= h;
                (f(&a) - f(&b)) / (2.0 * h)
            })
            .collect::<Vec<_>>()
    };
    let (g1, g2) = (grad(&|q| (hp.h1)(q)), grad(&|q| (hp.h2)(q)));
    let s: f64 = (0..p.len()).step_by(2).map(|i| g1[i] * g2[i + 1] - g1[i + 1] * g2[i]).sum();
    s / (hp.weight.f)(p)
}

#[test]
fn deformed_polar_poisson_in_terms_of_h2() {
    for (n, z) in [(2.0, 0.3), (3.0, 0.2), (4.0, -0.4), (2.5, 1e-3)] {
        let hp = HamiltonianPair::deformed_polar(n, z);
        for p in hp.fields.chart.sample_points(100, 3) {
            let expected = (n - 1.0) * ((-z * (hp.h2)(&p)).exp() - 1.0) / z;
            let analytic = poisson_bracket(&hp, &p).unwrap();
            let tol = 1e-9 * (1.0 + expected.abs());
            assert!((analytic - expected).abs() <= tol, "n={n} z={z} {p:?}: {analytic} vs {expected}");
            assert!((fd_poisson(&hp, &p) - expected).abs() <= 1e-5 * (1.0 + expected.abs()));
        }
        assert!(check_poisson(&hp, &hp.fields.chart.sample_points(100, 5), 1e-8).pass);
    }
}

#[test]
fn undeformed_poisson_limit() {
    // {h_z1, h_z2} tends to (1-n) h2 as z -> 0
    let n = 3.0;
    let hp = HamiltonianPair::deformed_polar(n, 1e-9);
    let plain = HamiltonianPair::bernoulli_polar(n);
    for p in plain.fields.chart.sample_points(50, 9) {
        let (a, b) = (poisson_bracket(&hp, &p).unwrap(), poisson_bracket(&plain, &p).unwrap());
        assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()), "{p:?}: {a} vs {b}");
    }
}

#[test]
fn orthogonal_relation_for_several_orders() {
    for n in [2.0, 3.0, 5.0, 2.5] {
        let pts = VectorFieldPair::bernoulli_polar(n).chart.sample_points(100, 13);
        let r = check_orthogonal_relation(n, &pts, 1e-10);
        assert!(r.pass, "{r}");
    }
}
