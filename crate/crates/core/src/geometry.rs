//! Coordinate frames, spherical conversions and uniform planar array (UPA)
//! responses.
//!
//! Element order is row-major: element `(m_x, m_z)` (zero-based) sits at
//! linear index `m_x * M_z + m_z`, so the full response equals
//! `a_x ⊗ a_z`. Angles are radians everywhere in the library.

use nalgebra::{Matrix3, Vector3};

use crate::{Error, Result, C64};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Azimuth / elevation pair `ψ = (φ, θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Angle {
    pub const fn new(azimuth: f64, elevation: f64) -> Self {
        Self { azimuth, elevation }
    }

    /// Unit direction vector `ω(ψ) = [sinθ cosφ, sinθ sinφ, cosθ]`.
    pub fn direction(&self) -> Vec3 {
        let (sp, cp) = self.azimuth.sin_cos();
        let (st, ct) = self.elevation.sin_cos();
        Vec3::new(st * cp, st * sp, ct)
    }

    /// Wave vector `μ(ψ) = -(2π/λ) ω(ψ)`.
    pub fn wave_vector(&self, wavelength: f64) -> Vec3 {
        self.direction() * (-std::f64::consts::TAU / wavelength)
    }

    /// `∂ω/∂φ`.
    ///
    /// The second component is `+sinθ cosφ`; for arrays lying in the local
    /// xz-plane it multiplies a zero coordinate, so its sign never reaches the
    /// array response.
    pub fn direction_d_azimuth(&self) -> Vec3 {
        let (sp, cp) = self.azimuth.sin_cos();
        let st = self.elevation.sin();
        Vec3::new(-st * sp, st * cp, 0.0)
    }

    /// `∂ω/∂θ`.
    pub fn direction_d_elevation(&self) -> Vec3 {
        let (sp, cp) = self.azimuth.sin_cos();
        let (st, ct) = self.elevation.sin_cos();
        Vec3::new(ct * cp, ct * sp, -st)
    }

    /// Both components strictly inside `(0, π)`.
    pub fn in_upper_half(&self) -> bool {
        let open = |x: f64| x > 0.0 && x < std::f64::consts::PI;
        open(self.azimuth) && open(self.elevation)
    }
}

/// Free function form of [`Angle::direction`].
pub fn direction_vector(psi: Angle) -> Vec3 {
    psi.direction()
}

/// Local coordinate frame: origin `l` and rotation `V` taking global offsets
/// into local coordinates (`Δl = V (target - l)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: Vec3,
    pub rotation: Mat3,
}

impl Frame {
    pub fn new(origin: Vec3, rotation: Mat3) -> Result<Self> {
        let dev = (rotation.transpose() * rotation - Mat3::identity()).amax();
        if dev > 1e-12 {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { origin, rotation })
    }

    pub fn axis_aligned(origin: Vec3) -> Self {
        Self {
            origin,
            rotation: Mat3::identity(),
        }
    }

    /// Offset of `target` expressed in this frame.
    pub fn to_local(&self, target: &Vec3) -> Vec3 {
        self.rotation * (target - self.origin)
    }
}

/// Spherical coordinates of a point in a local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spherical {
    pub range: f64,
    pub angle: Angle,
}

pub fn cart_to_local_spherical(target: &Vec3, frame: &Frame) -> Result<Spherical> {
    let d = frame.to_local(target);
    let range = d.norm();
    if range == 0.0 || !range.is_finite() {
        return Err(Error::CoincidentPoints);
    }
    let azimuth = d.y.atan2(d.x);
    let elevation = (d.z / range).clamp(-1.0, 1.0).acos();
    Ok(Spherical {
        range,
        angle: Angle::new(azimuth, elevation),
    })
}

pub fn local_spherical_to_cart(range: f64, psi: Angle, frame: &Frame) -> Result<Vec3> {
    if !(range > 0.0) {
        return Err(Error::NonPositiveRadius(range));
    }
    Ok(frame.origin + frame.rotation.transpose() * (psi.direction() * range))
}

/// Uniform planar array in the local xz-plane, centred on the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Upa {
    m_x: usize,
    m_z: usize,
    spacing: f64,
    positions: Vec<Vec3>,
}

impl Upa {
    pub fn new(m_x: usize, m_z: usize, spacing: f64) -> Result<Self> {
        if m_x == 0 || m_z == 0 {
            return Err(Error::InvalidParameter(format!(
                "UPA needs at least one element per axis, got {m_x}x{m_z}"
            )));
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "element spacing must be positive, got {spacing}"
            )));
        }
        let cx = (m_x as f64 - 1.0) * spacing / 2.0;
        let cz = (m_z as f64 - 1.0) * spacing / 2.0;
        let positions = (0..m_x)
            .flat_map(|ix| {
                (0..m_z).map(move |iz| {
                    Vec3::new(ix as f64 * spacing - cx, 0.0, iz as f64 * spacing - cz)
                })
            })
            .collect();
        Ok(Self {
            m_x,
            m_z,
            spacing,
            positions,
        })
    }

    /// Half-wavelength spaced array.
    pub fn half_wavelength(m_x: usize, m_z: usize, wavelength: f64) -> Result<Self> {
        Self::new(m_x, m_z, wavelength / 2.0)
    }

    pub fn m_x(&self) -> usize {
        self.m_x
    }

    pub fn m_z(&self) -> usize {
        self.m_z
    }

    pub fn len(&self) -> usize {
        self.m_x * self.m_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    /// Per-axis factors `(a_x, a_z)` without forming the Kronecker product.
    pub fn axis_factors(&self, psi: Angle, wavelength: f64) -> (Vec<C64>, Vec<C64>) {
        let mu = psi.wave_vector(wavelength);
        let axis = |count: usize, mu_d: f64| -> Vec<C64> {
            let zeta = mu_d * (count as f64 - 1.0) / 2.0;
            (0..count)
                .map(|m| C64::from_polar(1.0, zeta - mu_d * m as f64))
                .collect()
        };
        (
            axis(self.m_x, mu.x * self.spacing),
            axis(self.m_z, mu.z * self.spacing),
        )
    }

    pub fn steering(&self, psi: Angle, wavelength: f64) -> Steering {
        let (x, z) = self.axis_factors(psi, wavelength);
        let full = x
            .iter()
            .flat_map(|ax| z.iter().map(move |az| ax * az))
            .collect();
        Steering { x, z, full }
    }

    /// Full response only.
    pub fn response(&self, psi: Angle, wavelength: f64) -> Vec<C64> {
        self.steering(psi, wavelength).full
    }

    /// Analytic `(∂a/∂φ, ∂a/∂θ)`: `∂a = a ⊙ (-j (∂μ)ᵀ N)`.
    pub fn steering_derivatives(&self, psi: Angle, wavelength: f64) -> (Vec<C64>, Vec<C64>) {
        let a = self.response(psi, wavelength);
        let k = -std::f64::consts::TAU / wavelength;
        let dmu_phi = psi.direction_d_azimuth() * k;
        let dmu_theta = psi.direction_d_elevation() * k;
        let minus_j = C64::new(0.0, -1.0);
        let d_phi = a
            .iter()
            .zip(&self.positions)
            .map(|(ai, n)| ai * minus_j * dmu_phi.dot(n))
            .collect();
        let d_theta = a
            .iter()
            .zip(&self.positions)
            .map(|(ai, n)| ai * minus_j * dmu_theta.dot(n))
            .collect();
        (d_phi, d_theta)
    }
}

/// Steering vector together with its per-axis factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Steering {
    pub x: Vec<C64>,
    pub z: Vec<C64>,
    pub full: Vec<C64>,
}
