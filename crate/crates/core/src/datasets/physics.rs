use crate::numerics::{Complex, J};

use super::DatasetError;

/// One Lorentz oscillator term `ω_p² / (ω_o² − ω² − j ω_s ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub plasma: f64,
    pub resonance: f64,
    pub damping: f64,
}

/// Dielectric slab with a Lorentzian permittivity.
///
/// `thickness` and `speed` share a length unit and `speed` is in
/// length-unit × frequency-unit, so `ω·thickness/speed` is in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianParams {
    pub eps_inf: f64,
    pub oscillators: Vec<Oscillator>,
    pub thickness: f64,
    pub speed: f64,
}

pub fn lorentzian_permittivity(params: &LorentzianParams, omega: f64) -> Complex {
    params
        .oscillators
        .iter()
        .fold(Complex::new(params.eps_inf, 0.0), |eps, o| {
            let den = Complex::new(o.resonance * o.resonance - omega * omega, -o.damping * omega);
            eps + o.plasma * o.plasma / den
        })
}

/// Transmission through the slab:
/// `t = [cos(nωl/c) − (j/2)(z + 1/z) sin(nωl/c)]⁻¹` with `n = √ε_r`
/// (branch with `Im n ≥ 0`) and `z = 1/n`.
pub fn transfer_matrix_t(params: &LorentzianParams, omega: f64) -> Result<Complex, DatasetError> {
    let eps = lorentzian_permittivity(params, omega);
    if eps == Complex::new(0.0, 0.0) {
        return Err(DatasetError::ZeroPermittivity(omega));
    }
    let mut n = eps.sqrt();
    if n.im < 0.0 {
        n = -n;
    }
    let z = n.inv();
    let delta = n * (omega * params.thickness / params.speed);
    let den = delta.cos() - J * 0.5 * (z + z.inv()) * delta.sin();
    Ok(den.inv())
}
