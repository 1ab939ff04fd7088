use super::{Complex, NumericsError};

/// Monic polynomial `∏ (z - a_k)` evaluated at `z`. The empty product is 1.
pub fn eval_poly_from_roots(roots: &[Complex], z: Complex) -> Complex {
    roots
        .iter()
        .fold(Complex::new(1.0, 0.0), |acc, &a| acc * (z - a))
}

/// Para-conjugate `P*(z) = conj(P(-conj(z)))` of the monic polynomial with the
/// given roots, i.e. `∏ (-z - conj(a_k))`.
///
/// On the imaginary axis this is exactly `conj(P(jω))`, so `P/P*` is unimodular
/// there. As a polynomial it equals `(-1)^m ∏ (z + conj(a_k))`.
pub fn conj_reflect_eval(roots: &[Complex], z: Complex) -> Complex {
    roots
        .iter()
        .fold(Complex::new(1.0, 0.0), |acc, &a| acc * (-z - a.conj()))
}

/// Rejects NaN or infinite components, reporting the first offending index.
pub fn ensure_finite(values: &[Complex]) -> Result<(), NumericsError> {
    match values
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        Some(i) => Err(NumericsError::NonFinite(i)),
        None => Ok(()),
    }
}
