//! Horizontal random-walk mobility between location coherence intervals.

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::Vec3;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityModel {
    /// Step covariance per UE (m²), horizontal plane.
    pub covariance: Vec<Matrix2<f64>>,
    /// Matching square roots, `L Lᵀ = Ξ`.
    roots: Vec<Matrix2<f64>>,
}

impl MobilityModel {
    pub fn new(covariance: Vec<Matrix2<f64>>) -> Result<Self> {
        let roots = covariance
            .iter()
            .map(|c| {
                if (c - c.transpose()).amax() > 1e-12 * c.amax().max(1.0) {
                    return Err(Error::InvalidParameter(
                        "walk covariance must be symmetric".into(),
                    ));
                }
                let eig = c.symmetric_eigen();
                if eig.eigenvalues.min() < -1e-12 * c.amax().max(1.0) {
                    return Err(Error::InvalidParameter(
                        "walk covariance must be positive semidefinite".into(),
                    ));
                }
                let sqrt = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
                Ok(eig.eigenvectors * Matrix2::from_diagonal(&sqrt))
            })
            .collect::<Result<_>>()?;
        Ok(Self { covariance, roots })
    }

    /// `Ξ = std² I` for every UE.
    pub fn isotropic(num_ues: usize, std: f64) -> Result<Self> {
        Self::new(vec![Matrix2::identity() * (std * std); num_ues])
    }
}

/// One Gaussian step per UE in the horizontal plane; heights are unchanged.
pub fn step_mobility<R: Rng + ?Sized>(
    positions: &[Vec3],
    model: &MobilityModel,
    rng: &mut R,
) -> Result<Vec<Vec3>> {
    if positions.len() != model.roots.len() {
        return Err(Error::Dimension(format!(
            "{} positions, {} walk covariances",
            positions.len(),
            model.roots.len()
        )));
    }
    Ok(positions
        .iter()
        .zip(&model.roots)
        .map(|(p, l)| {
            let z = Vector2::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let d = l * z;
            Vec3::new(p.x + d.x, p.y + d.y, p.z)
        })
        .collect())
}
