//! Fisher information of the channel parameters `[φ, θ, Re β, Im β]`, its
//! transformation to location parameters `[x, y, Re β, Im β]` and the
//! resulting position bound.

use nalgebra::{Matrix2, Matrix4, RowVector3};

use super::{dot, SensingContext};
use crate::geometry::{Frame, Vec3};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct FimResult {
    pub f_ch: Matrix4<f64>,
    pub jacobian: Matrix4<f64>,
    pub f_lo: Matrix4<f64>,
    /// Position error matrix (horizontal coordinates), m².
    pub psi: Matrix2<f64>,
    /// `√tr Ψ`, m.
    pub crb_pos: f64,
    pub crb_azimuth: f64,
    pub crb_elevation: f64,
}

/// `F_ch = (2/σ²) Σ_t Re{∇ȳ_t ∇ȳ_tᴴ}`.
pub fn fim_channel(ctx: &SensingContext, k: usize) -> Result<Matrix4<f64>> {
    let var = ctx.noise(k).total();
    if !(var > 0.0) {
        return Err(Error::ZeroNoise);
    }
    let psi = ctx.los.psi_ue[k];
    let lambda = ctx.wavelength();
    let a = ctx.ris_upa.response(psi, lambda);
    let (da_phi, da_theta) = ctx.ris_upa.steering_derivatives(psi, lambda);
    let rho = ctx.rho(k);
    let beta = ctx.los.gains.beta[k];
    // ∂ȳ/∂Re β = ȳ/β = β₀ (a_Bᵀs) φ_t
    let gain = rho / beta;
    let mut f = Matrix4::zeros();
    for t in 0..ctx.snapshots() {
        let m = ctx.masked(t);
        let phi = dot(&a, m);
        let grad = [
            rho * dot(&da_phi, m),
            rho * dot(&da_theta, m),
            gain * phi,
            gain * phi * C64::i(),
        ];
        for i in 0..4 {
            for j in 0..4 {
                f[(i, j)] += (grad[i] * grad[j].conj()).re;
            }
        }
    }
    Ok(f * (2.0 / var))
}

/// `Γ = ∂ξ_ch/∂ξ_lo` for a UE at `ue` seen from the RIS frame.
pub fn jacobian_location(ris: &Frame, ue: &Vec3) -> Result<Matrix4<f64>> {
    let d = ris.to_local(ue);
    let dp = d.x * d.x + d.y * d.y;
    if dp == 0.0 {
        return Err(Error::AzimuthUndefined);
    }
    let r2 = d.norm_squared();
    let v = &ris.rotation;
    let row = |i: usize| RowVector3::new(v[(i, 0)], v[(i, 1)], v[(i, 2)]);
    let d_phi = (row(1) * d.x - row(0) * d.y) / dp;
    let global = (ue - ris.origin).transpose();
    let d_theta = (row(2) * (-r2) + global * d.z) / (r2 * dp.sqrt());
    let mut g = Matrix4::zeros();
    g[(0, 0)] = d_phi[0];
    g[(0, 1)] = d_phi[1];
    g[(1, 0)] = d_theta[0];
    g[(1, 1)] = d_theta[1];
    g[(2, 2)] = 1.0;
    g[(3, 3)] = 1.0;
    Ok(g)
}

/// Inverse of a symmetric positive-definite information matrix.
///
/// The gain parameters and the angles live on scales many orders of magnitude
/// apart, so singularity is judged on the unit-diagonal (correlation) form.
fn information_inverse(f: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let mut scale = [0.0; 4];
    for i in 0..4 {
        let d = f[(i, i)];
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Unidentifiable);
        }
        scale[i] = 1.0 / d.sqrt();
    }
    let c = Matrix4::from_fn(|i, j| f[(i, j)] * scale[i] * scale[j]);
    let c = (c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigenvalues();
    if eig.min() < 1e-10 * eig.max() {
        return Err(Error::Unidentifiable);
    }
    let ci = c.try_inverse().ok_or(Error::Unidentifiable)?;
    Ok(Matrix4::from_fn(|i, j| ci[(i, j)] * scale[i] * scale[j]))
}

/// Position and angle bounds of UE `k`.
pub fn crb(ctx: &SensingContext, k: usize) -> Result<FimResult> {
    let f_ch = fim_channel(ctx, k)?;
    let jacobian = jacobian_location(&ctx.ris, &ctx.ues[k])?;
    let f_lo = jacobian.transpose() * f_ch * jacobian;
    let f_lo = (f_lo + f_lo.transpose()) * 0.5;
    let inv_lo = information_inverse(&f_lo)?;
    let inv_ch = information_inverse(&f_ch)?;
    let psi = inv_lo.fixed_view::<2, 2>(0, 0).into_owned();
    Ok(FimResult {
        crb_pos: psi.trace().sqrt(),
        crb_azimuth: inv_ch[(0, 0)].sqrt(),
        crb_elevation: inv_ch[(1, 1)].sqrt(),
        f_ch,
        jacobian,
        f_lo,
        psi,
    })
}
