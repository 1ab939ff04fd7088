use super::BaselineError;
use crate::numerics::Complex;

fn check_grid(omegas: &[f64], n: usize) -> Result<(), BaselineError> {
    if omegas.len() != n {
        return Err(BaselineError::LengthMismatch {
            expected: omegas.len(),
            got: n,
        });
    }
    if n < 2 || omegas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(BaselineError::Grid);
    }
    Ok(())
}

/// Phase from reflectance-like power samples `R(ω_i) = |f(jω_i)|²`:
///
/// `φ(ω_i) = −(1/π) ∫ [g(ω′) − g(ω_i)] / (ω′ − ω_i) dω′`, `g = ½ ln R`,
///
/// integrated by the trapezoid rule over the measured band only (see
/// [`hilbert_transform`]). At `ω′ = ω_i` the integrand takes its limit
/// `g′(ω_i)` (central difference, one-sided at the band edges). Subtracting
/// `g(ω_i)` removes the principal-value singularity; the analytic
/// contribution of the constant term is not added back, so a constant
/// spectrum yields zero phase.
pub fn kk_phase(power: &[f64], omegas: &[f64]) -> Result<Vec<f64>, BaselineError> {
    let n = power.len();
    check_grid(omegas, n)?;
    if let Some(i) = power.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(BaselineError::ZeroMagnitude(i));
    }
    let g: Vec<f64> = power.iter().map(|r| 0.5 * r.ln()).collect();
    hilbert_transform(&g, omegas)
}

/// `v(ω_i) = −(1/π) ∫ [u(ω′) − u(ω_i)] / (ω′ − ω_i) dω′` over the sampled
/// band by the trapezoid rule, the integrand at `ω′ = ω_i` being `u′(ω_i)`.
/// For `u = cos` on a wide band, `v ≈ sin` near the band centre.
pub fn hilbert_transform(u: &[f64], omegas: &[f64]) -> Result<Vec<f64>, BaselineError> {
    let n = u.len();
    check_grid(omegas, n)?;
    let slope = |i: usize| -> f64 {
        let (a, b) = match i {
            0 => (0, 1),
            i if i == n - 1 => (n - 2, n - 1),
            i => (i - 1, i + 1),
        };
        (u[b] - u[a]) / (omegas[b] - omegas[a])
    };
    let mut out = Vec::with_capacity(n);
    let mut integrand = vec![0.0; n];
    for i in 0..n {
        for (k, v) in integrand.iter_mut().enumerate() {
            *v = if k == i {
                slope(i)
            } else {
                (u[k] - u[i]) / (omegas[k] - omegas[i])
            };
        }
        let integral: f64 = (0..n - 1)
            .map(|k| 0.5 * (integrand[k] + integrand[k + 1]) * (omegas[k + 1] - omegas[k]))
            .sum();
        out.push(-integral / std::f64::consts::PI);
    }
    Ok(out)
}

/// `|f|·e^{jφ}` with `φ` from [`kk_phase`] applied to `|f|²`.
pub fn kk_reconstruct(magnitudes: &[f64], omegas: &[f64]) -> Result<Vec<Complex>, BaselineError> {
    let power: Vec<f64> = magnitudes.iter().map(|a| a * a).collect();
    let phase = kk_phase(&power, omegas)?;
    Ok(magnitudes
        .iter()
        .zip(&phase)
        .map(|(&a, &p)| Complex::from_polar(a, p))
        .collect())
}
