use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use super::{
    eigh, DensityOperator, Eigh, HermitianOperator, Matrix, PINV_NEGATIVE_TOL, PSD_REL_TOL,
};
use crate::error::{Error, Result};

fn check_layouts(rho: &DensityOperator, sigma: &DensityOperator) -> Result<()> {
    if rho.layout() != sigma.layout() {
        return Err(Error::Layout(format!("layouts differ: {} vs {}", rho.layout(), sigma.layout())));
    }
    Ok(())
}

/// Eigendecomposition of a PSD matrix with the relative clamp applied.
fn psd_eigh(m: &Matrix) -> Result<Eigh> {
    let mut e = eigh(m)?;
    let scale = e.max_value().abs().max(f64::MIN_POSITIVE);
    if e.min_value() < -PSD_REL_TOL * scale.max(1.0) {
        return Err(Error::Domain(format!(
            "operator is not positive semidefinite (eigenvalue {:e})",
            e.min_value()
        )));
    }
    // rounding noise above zero would otherwise survive a square root
    let floor = 4.0 * m.rows() as f64 * f64::EPSILON * scale;
    for l in e.values.iter_mut() {
        if *l < floor {
            *l = 0.0;
        }
    }
    Ok(e)
}

/// Square root of a PSD matrix.
pub fn sqrt_psd(m: &Matrix) -> Result<Matrix> {
    Ok(psd_eigh(m)?.reconstruct_with(f64::sqrt))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_layouts(rho, sigma)?;
    let sqrt_rho = sqrt_psd(rho.matrix())?;
    let inner = sqrt_rho.matmul(sigma.matrix()).matmul(&sqrt_rho).hermitian_part();
    let e = psd_eigh(&inner)?;
    let root_sum: f64 = e.values.iter().map(|l| l.sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// `½ ‖ρ − σ‖₁`, clamped to `[0, 1]`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_layouts(rho, sigma)?;
    let diff = (rho.matrix() - sigma.matrix()).hermitian_part();
    let e = eigh(&diff)?;
    let t = 0.5 * e.values.iter().map(|l| l.abs()).sum::<f64>();
    Ok(t.clamp(0.0, 1.0))
}

/// Moore–Penrose inverse square root of a PSD operator. Eigenvalues at or
/// below `cutoff · λ_max` are treated as kernel and mapped to zero.
pub fn pinv_sqrt(op: &HermitianOperator, cutoff: f64) -> Result<HermitianOperator> {
    let e = op.eigh()?;
    if e.min_value() < -PINV_NEGATIVE_TOL {
        return Err(Error::Domain(format!(
            "pinv_sqrt needs a PSD operator (eigenvalue {:e})",
            e.min_value()
        )));
    }
    let threshold = cutoff * e.max_value().max(0.0);
    let m = e.reconstruct_with(|l| if l > threshold && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 });
    HermitianOperator::from_rounded(op.layout().clone(), &m)
}
