use super::SystemError;

/// Basis change `(Y1, Y2)ᵀ = M (X1, X2)ᵀ` taking `[X1, X2] = λX1 + μX2`
/// to `[Y1, Y2] = Y2`.
pub fn book_basis_normalize(lambda: f64, mu: f64) -> Result<[[f64; 2]; 2], SystemError> {
    if !(lambda.is_finite() && mu.is_finite()) {
        return Err(SystemError::InvalidParam("structure constants must be finite".into()));
    }
    if lambda == 0.0 && mu == 0.0 {
        return Err(SystemError::Abelian(
            "[X1, X2] = 0: the fields span an abelian algebra, not b2".into(),
        ));
    }
    Ok(if mu == 0.0 {
        // [-X2/λ, X1] = [X1, X2]/λ = X1
        [[0.0, -1.0 / lambda], [1.0, 0.0]]
    } else if lambda == 0.0 {
        [[1.0 / mu, 0.0], [0.0, 1.0]]
    } else {
        // [X1/μ, λX1 + μX2] = [X1, X2] = λX1 + μX2
        [[1.0 / mu, 0.0], [lambda, mu]]
    })
}
