//! 2D-IFFT grid search, quadratic peak interpolation, quasi-Newton
//! refinement and the range-from-height position fix. A dense angular grid
//! (MLE) baseline shares the refinement stage.

use std::time::{Duration, Instant};

use nalgebra::Vector2;
use rustfft::FftPlanner;

use super::bfgs::{self, BfgsOptions, Stop};
use super::SensingContext;
use crate::geometry::{Angle, Frame, Vec3};
use crate::{Error, Result, C64};

/// Offline dictionary `[Λ̂]_{m,n}`: zero-padded 2D IFFT of every
/// `Λ_t ⊙ A(ψ_R)`, stored bin-major so each bin is a contiguous `T`-vector.
#[derive(Debug, Clone, PartialEq)]
pub struct IfftDictionary {
    m_fx: usize,
    m_fz: usize,
    snapshots: usize,
    data: Vec<C64>,
    norms: Vec<f64>,
    /// `λ/d`, converts a bin offset into a direction cosine.
    lambda_over_d: f64,
}

impl IfftDictionary {
    pub fn new(ctx: &SensingContext, m_fx: usize, m_fz: usize) -> Result<Self> {
        let (mx, mz) = (ctx.ris_upa.m_x(), ctx.ris_upa.m_z());
        if m_fx < mx || m_fz < mz {
            return Err(Error::InvalidParameter(format!(
                "IFFT size {m_fx}x{m_fz} smaller than RIS {mx}x{mz}"
            )));
        }
        let t_len = ctx.snapshots();
        let mut planner = FftPlanner::<f64>::new();
        let ifft_z = planner.plan_fft_inverse(m_fz);
        let ifft_x = planner.plan_fft_inverse(m_fx);
        let scale = 1.0 / (m_fx * m_fz) as f64;
        let mut data = vec![C64::new(0.0, 0.0); m_fx * m_fz * t_len];
        let mut grid = vec![C64::new(0.0, 0.0); m_fx * m_fz];
        let mut column = vec![C64::new(0.0, 0.0); m_fx];
        for t in 0..t_len {
            grid.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            let masked = ctx.masked(t);
            for kx in 0..mx {
                let row = &mut grid[kx * m_fz..(kx + 1) * m_fz];
                row[..mz].copy_from_slice(&masked[kx * mz..(kx + 1) * mz]);
                ifft_z.process(row);
            }
            for n in 0..m_fz {
                for (m, c) in column.iter_mut().enumerate() {
                    *c = grid[m * m_fz + n];
                }
                ifft_x.process(&mut column);
                for (m, c) in column.iter().enumerate() {
                    data[(m * m_fz + n) * t_len + t] = c * scale;
                }
            }
        }
        let norms = data
            .chunks(t_len)
            .map(|c| c.iter().map(|v| v.norm_sqr()).sum())
            .collect();
        Ok(Self {
            m_fx,
            m_fz,
            snapshots: t_len,
            data,
            norms,
            lambda_over_d: ctx.wavelength() / ctx.ris_upa.spacing(),
        })
    }

    /// `(M_Fx, M_Fz, T)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.m_fx, self.m_fz, self.snapshots)
    }

    pub fn column(&self, m: usize, n: usize) -> &[C64] {
        let i = (m * self.m_fz + n) * self.snapshots;
        &self.data[i..i + self.snapshots]
    }

    fn wrap(index: f64, len: usize) -> f64 {
        let l = len as f64;
        let w = index - l * (index / l).round();
        // representative in (-L/2, L/2]
        if w <= -l / 2.0 {
            w + l
        } else {
            w
        }
    }

    /// Direction cosines `([ω]₁, [ω]₃)` of a (possibly fractional) bin.
    ///
    /// The dictionary column at bin `m` is collinear with `φ(ψ)` when
    /// `-[μ]₁ d ≡ 2πm/M_F`, i.e. `[ω]₁ = m' λ/(M_F d)` with `m'` the
    /// representative of `m` in `(-M_F/2, M_F/2]`.
    pub fn direction_cosines(&self, m: f64, n: f64) -> (f64, f64) {
        (
            Self::wrap(m, self.m_fx) * self.lambda_over_d / self.m_fx as f64,
            Self::wrap(n, self.m_fz) * self.lambda_over_d / self.m_fz as f64,
        )
    }
}

/// Result of the dictionary search.
#[derive(Debug, Clone)]
pub struct GridSearch {
    pub m: usize,
    pub n: usize,
    /// `ε(m, n)`, row-major over `(m, n)`.
    pub surface: Vec<f64>,
    m_fz: usize,
}

impl GridSearch {
    pub fn epsilon(&self, m: usize, n: usize) -> f64 {
        self.surface[m * self.m_fz + n]
    }
}

fn residual(y: &[C64], x: &[C64], norm: f64) -> f64 {
    if norm == 0.0 {
        return y.iter().map(|v| v.norm_sqr()).sum();
    }
    let f: C64 = x.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<C64>() / norm;
    y.iter().zip(x).map(|(b, a)| (b - f * a).norm_sqr()).sum()
}

/// `ε(m,n) = ‖y − f(x) x‖²` over all bins; argmin with ties going to the
/// smallest `m`, then `n`.
pub fn grid_search(y: &[C64], dict: &IfftDictionary) -> Result<GridSearch> {
    if y.len() != dict.snapshots {
        return Err(Error::Dimension(format!(
            "observation has {} samples, dictionary {}",
            y.len(),
            dict.snapshots
        )));
    }
    let y2: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    let (m_fx, m_fz) = (dict.m_fx, dict.m_fz);
    let mut surface = Vec::with_capacity(m_fx * m_fz);
    for (col, &norm) in dict.data.chunks(dict.snapshots).zip(&dict.norms) {
        let e = if norm == 0.0 {
            y2
        } else {
            let xy: C64 = col.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
            (y2 - xy.norm_sqr() / norm).max(0.0)
        };
        surface.push(e);
    }
    let mut best = 0;
    for (i, &e) in surface.iter().enumerate() {
        if e < surface[best] {
            best = i;
        }
    }
    let (m, n) = (best / m_fz, best % m_fz);
    // The expanded form above loses accuracy to cancellation; recompute the
    // bins the interpolation will read directly.
    for (mm, nn) in [
        (m, n),
        ((m + m_fx - 1) % m_fx, n),
        ((m + 1) % m_fx, n),
        (m, (n + m_fz - 1) % m_fz),
        (m, (n + 1) % m_fz),
    ] {
        let i = mm * m_fz + nn;
        surface[i] = residual(y, dict.column(mm, nn), dict.norms[i]);
    }
    Ok(GridSearch {
        m,
        n,
        surface,
        m_fz,
    })
}

/// Vertex offset of the parabola through `(-1, e_minus), (0, e0), (1, e_plus)`,
/// clamped to `[-1, 1]`; zero when the three points are collinear.
pub fn interpolate_peak(e_minus: f64, e0: f64, e_plus: f64) -> f64 {
    let den = 2.0 * (e_minus + e_plus - 2.0 * e0);
    if den == 0.0 || !den.is_finite() {
        return 0.0;
    }
    ((e_minus - e_plus) / den).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct EstimateOptions {
    pub bfgs: BfgsOptions,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            bfgs: BfgsOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub grid_idx: (usize, usize),
    pub refined_idx: (f64, f64),
    /// Angle read off the interpolated grid peak.
    pub coarse: Angle,
    /// Angle after quasi-Newton refinement.
    pub angle: Angle,
    /// `‖y − f(φ)φ‖²` at `angle`.
    pub residual: f64,
    /// The interpolated direction fell outside the unit sphere and was clamped.
    pub grid_edge: bool,
    pub iterations: usize,
    pub stop: Stop,
    pub elapsed: Duration,
}

/// Angle from direction cosines with `[ω]₂ ≥ 0`. Returns whether
/// `1 − ω₁² − ω₃²` had to be clamped.
fn angle_from_cosines(w1: f64, w3: f64) -> (Angle, bool) {
    let rest = 1.0 - w1 * w1 - w3 * w3;
    let w2 = rest.max(0.0).sqrt();
    let angle = Angle::new(w2.atan2(w1), w3.clamp(-1.0, 1.0).acos());
    (angle, rest < 0.0)
}

/// The response is blind to the sign of `[ω]₂`; map onto the `[ω]₂ ≥ 0`
/// hemisphere.
fn canonical(psi: Angle) -> Angle {
    let w = psi.direction();
    Angle::new(w.y.abs().atan2(w.x), w.z.clamp(-1.0, 1.0).acos())
}

/// `J(ψ) = 1 − |φᴴy|²/(‖φ‖²‖y‖²)` and its gradient. `‖y‖² J` is the
/// least-squares residual of fitting `y` by a scaled `φ(ψ)`.
struct MatchedObjective<'a> {
    ctx: &'a SensingContext,
    y: &'a [C64],
    y2: f64,
}

impl MatchedObjective<'_> {
    fn eval(&self, x: &Vector2<f64>) -> (f64, Vector2<f64>) {
        let psi = Angle::new(x[0], x[1]);
        let lambda = self.ctx.wavelength();
        let a = self.ctx.ris_upa.response(psi, lambda);
        let (da_p, da_t) = self.ctx.ris_upa.steering_derivatives(psi, lambda);
        let mut u = C64::new(0.0, 0.0);
        let mut du = [C64::new(0.0, 0.0); 2];
        let mut n = 0.0;
        let mut dn = [0.0; 2];
        for (t, &yt) in self.y.iter().enumerate() {
            let m = self.ctx.masked(t);
            let mut p = C64::new(0.0, 0.0);
            let mut pp = C64::new(0.0, 0.0);
            let mut pt = C64::new(0.0, 0.0);
            for i in 0..m.len() {
                p += a[i] * m[i];
                pp += da_p[i] * m[i];
                pt += da_t[i] * m[i];
            }
            u += p.conj() * yt;
            du[0] += pp.conj() * yt;
            du[1] += pt.conj() * yt;
            n += p.norm_sqr();
            dn[0] += 2.0 * (p.conj() * pp).re;
            dn[1] += 2.0 * (p.conj() * pt).re;
        }
        if n == 0.0 {
            return (1.0, Vector2::zeros());
        }
        let u2 = u.norm_sqr();
        let j = 1.0 - u2 / (n * self.y2);
        let g = Vector2::from_fn(|i, _| {
            let du2 = 2.0 * (u.conj() * du[i]).re;
            -(du2 * n - u2 * dn[i]) / (n * n * self.y2)
        });
        (j, g)
    }
}

fn refine_from(
    y: &[C64],
    ctx: &SensingContext,
    start: Angle,
    opts: &EstimateOptions,
) -> (Angle, f64, usize, Stop) {
    let y2: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    if y2 == 0.0 {
        return (start, 0.0, 0, Stop::Gradient);
    }
    let obj = MatchedObjective { ctx, y, y2 };
    let r = bfgs::minimize(
        |x| obj.eval(x),
        Vector2::new(start.azimuth, start.elevation),
        &opts.bfgs,
    );
    let angle = canonical(Angle::new(r.x[0], r.x[1]));
    (angle, r.value.max(0.0) * y2, r.iterations, r.stop)
}

/// Interpolate around the grid peak, convert to an angle and refine.
pub fn refine(
    y: &[C64],
    grid: &GridSearch,
    dict: &IfftDictionary,
    ctx: &SensingContext,
    opts: &EstimateOptions,
) -> EstimateResult {
    let start = Instant::now();
    let (m, n) = (grid.m, grid.n);
    let (m_fx, m_fz) = (dict.m_fx, dict.m_fz);
    let dm = interpolate_peak(
        grid.epsilon((m + m_fx - 1) % m_fx, n),
        grid.epsilon(m, n),
        grid.epsilon((m + 1) % m_fx, n),
    );
    let dn = interpolate_peak(
        grid.epsilon(m, (n + m_fz - 1) % m_fz),
        grid.epsilon(m, n),
        grid.epsilon(m, (n + 1) % m_fz),
    );
    let refined_idx = (m as f64 + dm, n as f64 + dn);
    let (w1, w3) = dict.direction_cosines(refined_idx.0, refined_idx.1);
    let (coarse, grid_edge) = angle_from_cosines(w1.clamp(-1.0, 1.0), w3.clamp(-1.0, 1.0));
    let grid_edge = grid_edge || w1.abs() > 1.0 || w3.abs() > 1.0;
    let (angle, residual, iterations, stop) = refine_from(y, ctx, coarse, opts);
    EstimateResult {
        grid_idx: (m, n),
        refined_idx,
        coarse,
        angle,
        residual,
        grid_edge,
        iterations,
        stop,
        elapsed: start.elapsed(),
    }
}

/// Full IFFT pipeline: grid search, interpolation, refinement. `elapsed`
/// covers the online part only (the dictionary is built offline).
pub fn estimate(
    y: &[C64],
    dict: &IfftDictionary,
    ctx: &SensingContext,
    opts: &EstimateOptions,
) -> Result<EstimateResult> {
    let start = Instant::now();
    let grid = grid_search(y, dict)?;
    let mut r = refine(y, &grid, dict, ctx, opts);
    r.elapsed = start.elapsed();
    Ok(r)
}

/// Position on the plane of known height `height` along direction `psi`
/// from the RIS: `l̂ = l_R + d V_Rᵀ ω(ψ)` with `d = |Δh / [V_Rᵀ ω]₃|`, which is
/// `|Δh / cos θ|` for an axis-aligned RIS.
pub fn locate(psi: Angle, ris: &Frame, height: f64) -> Result<Vec3> {
    let w = ris.rotation.transpose() * psi.direction();
    if w.z.abs() < 1e-6 {
        return Err(Error::GrazingElevation);
    }
    let d = ((height - ris.origin.z) / w.z).abs();
    Ok(ris.origin + w * d)
}

/// Dense `(φ, θ)` grid over `(0, π)²` maximising the same matched
/// projection, followed by the same refinement. `density` is grid points per
/// native angular resolution cell of the RIS (`2/M` in direction cosine).
pub fn mle_baseline(
    y: &[C64],
    ctx: &SensingContext,
    density: f64,
    opts: &EstimateOptions,
) -> Result<EstimateResult> {
    if !(density > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "grid density must be positive, got {density}"
        )));
    }
    if y.len() != ctx.snapshots() {
        return Err(Error::Dimension(format!(
            "observation has {} samples, sensing slot {}",
            y.len(),
            ctx.snapshots()
        )));
    }
    let start = Instant::now();
    let upa = &ctx.ris_upa;
    let (mx, mz) = (upa.m_x(), upa.m_z());
    let per_axis = (density * std::f64::consts::PI * mx.max(mz) as f64 / 2.0).ceil() as usize;
    let per_axis = per_axis.max(2);
    let grid = |i: usize| std::f64::consts::PI * (i as f64 + 0.5) / per_axis as f64;
    let lambda = ctx.wavelength();
    let t_len = ctx.snapshots();
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    let mut partial = vec![C64::new(0.0, 0.0); t_len * mx];
    for j in 0..per_axis {
        let theta = grid(j);
        let (_, az) = upa.axis_factors(Angle::new(0.0, theta), lambda);
        for t in 0..t_len {
            let m = ctx.masked(t);
            for ix in 0..mx {
                partial[t * mx + ix] = m[ix * mz..(ix + 1) * mz]
                    .iter()
                    .zip(&az)
                    .map(|(a, b)| a * b)
                    .sum();
            }
        }
        for i in 0..per_axis {
            let (ax, _) = upa.axis_factors(Angle::new(grid(i), theta), lambda);
            let mut u = C64::new(0.0, 0.0);
            let mut n = 0.0;
            for (t, yt) in y.iter().enumerate() {
                let p: C64 = partial[t * mx..(t + 1) * mx]
                    .iter()
                    .zip(&ax)
                    .map(|(a, b)| a * b)
                    .sum();
                u += p.conj() * yt;
                n += p.norm_sqr();
            }
            if n > 0.0 {
                let score = u.norm_sqr() / n;
                if score > best.0 {
                    best = (score, i, j);
                }
            }
        }
    }
    let coarse = Angle::new(grid(best.1), grid(best.2));
    let (angle, residual, iterations, stop) = refine_from(y, ctx, coarse, opts);
    Ok(EstimateResult {
        grid_idx: (best.1, best.2),
        refined_idx: (best.1 as f64, best.2 as f64),
        coarse,
        angle,
        residual,
        grid_edge: false,
        iterations,
        stop,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{LosModel, SceneConfig};
    use crate::geometry::cart_to_local_spherical;
    use crate::rng;
    use crate::sensing::{noiseless_rx, noiseless_ue, SensingSetup};
    use std::f64::consts::PI;

    fn scene(n: usize) -> SceneConfig {
        SceneConfig {
            ris_dims: (n, n),
            bs_dims: (4, 4),
            ues: vec![Vec3::new(-6.0, 7.0, 0.0)],
            tau_p: 2e-4,
            tau_l: 1.0002,
            ..SceneConfig::table_one()
        }
    }

    fn context(s: &SceneConfig, seed: u64) -> SensingContext {
        let los = LosModel::new(s).unwrap();
        let setup = SensingSetup::random(s, &los, &mut rng::root(seed));
        SensingContext::new(s, setup).unwrap()
    }

    /// Angle whose direction cosines sit exactly on bin `(m, n)`.
    fn on_grid(dict: &IfftDictionary, m: usize, n: usize) -> Angle {
        let (w1, w3) = dict.direction_cosines(m as f64, n as f64);
        angle_from_cosines(w1, w3).0
    }

    #[test]
    fn dictionary_shape_and_repeatability() {
        let s = scene(4);
        let ctx = context(&s, 1);
        let a = IfftDictionary::new(&ctx, 16, 8).unwrap();
        assert_eq!(a.shape(), (16, 8, 20));
        let b = IfftDictionary::new(&ctx, 16, 8).unwrap();
        assert_eq!(a, b);
        assert!(IfftDictionary::new(&ctx, 2, 8).is_err());
    }

    #[test]
    fn dictionary_matches_direct_matrix_product() {
        let s = scene(4);
        let ctx = context(&s, 2);
        let (mf_x, mf_z) = (8, 4);
        let dict = IfftDictionary::new(&ctx, mf_x, mf_z).unwrap();
        for t in [0, 7, 19] {
            let b = ctx.masked(t);
            for m in 0..mf_x {
                for n in 0..mf_z {
                    let mut v = C64::new(0.0, 0.0);
                    for k in 0..4 {
                        for l in 0..4 {
                            let ph = 2.0 * PI * (m * k) as f64 / mf_x as f64
                                + 2.0 * PI * (n * l) as f64 / mf_z as f64;
                            v += C64::from_polar(1.0, ph) * b[k * 4 + l];
                        }
                    }
                    v /= (mf_x * mf_z) as f64;
                    assert!((v - dict.column(m, n)[t]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn on_grid_column_is_collinear_with_phi() {
        let s = scene(4);
        let ctx = context(&s, 3);
        let dict = IfftDictionary::new(&ctx, 16, 16).unwrap();
        for (m, n) in [(1, 2), (3, 15), (14, 1)] {
            let psi = on_grid(&dict, m, n);
            let phi = ctx.phi(psi);
            let col = dict.column(m, n);
            let iota = col[0] / phi[0];
            for t in 0..phi.len() {
                assert!((col[t] - iota * phi[t]).norm() < 1e-12 * col[t].norm().max(1e-3));
            }
        }
    }

    #[test]
    fn projection_identities() {
        let y = vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.1)];
        assert!(residual(&y, &y, 5.26) < 1e-15);
        let s = scene(4);
        let ctx = context(&s, 4);
        let dict = IfftDictionary::new(&ctx, 8, 8).unwrap();
        let mut r = rng::root(5);
        let y: Vec<C64> = (0..20)
            .map(|_| crate::rng::complex_normal(&mut r, 1.0))
            .collect();
        let y2: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        let g = grid_search(&y, &dict).unwrap();
        assert!(g.surface.iter().all(|&e| e <= y2 * (1.0 + 1e-12)));
    }

    #[test]
    fn noiseless_on_grid_bin_has_zero_residual() {
        let s = scene(8);
        let ctx = context(&s, 6);
        let dict = IfftDictionary::new(&ctx, 32, 32).unwrap();
        let psi = on_grid(&dict, 5, 3);
        let y = noiseless_rx(&ctx, psi, C64::new(0.3, -1.2));
        let y2: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        let g = grid_search(&y, &dict).unwrap();
        assert_eq!((g.m, g.n), (5, 3));
        assert!(g.epsilon(5, 3) < 1e-18 * y2);
    }

    #[test]
    fn interpolation_cases() {
        assert_eq!(interpolate_peak(2.0, 1.0, 2.0), 0.0);
        assert_eq!(interpolate_peak(1.0, 1.0, 1.0), 0.0);
        // parabola e(x) = (x - 0.3)²
        let e = |x: f64| (x - 0.3) * (x - 0.3);
        assert!((interpolate_peak(e(-1.0), e(0.0), e(1.0)) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn noiseless_off_grid_recovery() {
        let s = scene(16);
        let ctx = context(&s, 7);
        let dict = IfftDictionary::new(&ctx, 64, 64).unwrap();
        let truth = ctx.los.psi_ue[0];
        let y = noiseless_ue(&ctx, 0);
        let r = estimate(&y, &dict, &ctx, &EstimateOptions::default()).unwrap();
        assert!(
            (r.angle.azimuth - truth.azimuth).abs() < 1e-6,
            "{r:?} {truth:?}"
        );
        assert!((r.angle.elevation - truth.elevation).abs() < 1e-6);
        assert!((r.refined_idx.0 - r.grid_idx.0 as f64).abs() <= 1.0);
        assert!(r.angle.in_upper_half());
        let l = locate(r.angle, &ctx.ris, 0.0).unwrap();
        assert!((l - s.ues[0]).norm() < 1e-3);
    }

    #[test]
    fn mle_agrees_with_ifft_on_noiseless_data() {
        let s = scene(8);
        let ctx = context(&s, 8);
        let dict = IfftDictionary::new(&ctx, 32, 32).unwrap();
        let y = noiseless_ue(&ctx, 0);
        let opts = EstimateOptions::default();
        let a = estimate(&y, &dict, &ctx, &opts).unwrap();
        let b = mle_baseline(&y, &ctx, 2.0, &opts).unwrap();
        assert!((a.angle.azimuth - b.angle.azimuth).abs() < 1e-8);
        assert!((a.angle.elevation - b.angle.elevation).abs() < 1e-8);
    }

    #[test]
    fn locate_straight_down_and_round_trip() {
        let ris = Frame::axis_aligned(Vec3::new(0.0, 0.0, 10.0));
        let l = locate(Angle::new(0.3, PI), &ris, 0.0).unwrap();
        assert!(l.norm() < 1e-12);
        let mut r = rng::root(9);
        use rand::Rng;
        for _ in 0..100 {
            let ue = Vec3::new(
                r.random_range(-20.0..20.0),
                r.random_range(1.0..20.0),
                r.random_range(0.0..3.0),
            );
            let psi = cart_to_local_spherical(&ue, &ris).unwrap().angle;
            assert!((locate(psi, &ris, ue.z).unwrap() - ue).norm() < 1e-9);
        }
        assert!(matches!(
            locate(Angle::new(0.3, PI / 2.0), &ris, 0.0),
            Err(Error::GrazingElevation)
        ));
    }

    #[test]
    fn objective_gradient_matches_finite_differences() {
        let s = scene(6);
        let ctx = context(&s, 10);
        let mut r = rng::root(11);
        let y: Vec<C64> = noiseless_ue(&ctx, 0)
            .into_iter()
            .map(|v| v + crate::rng::complex_normal(&mut r, v.norm_sqr() * 0.1))
            .collect();
        let y2 = y.iter().map(|v| v.norm_sqr()).sum();
        let obj = MatchedObjective {
            ctx: &ctx,
            y: &y,
            y2,
        };
        let x = Vector2::new(2.0, 1.9);
        let (_, g) = obj.eval(&x);
        let h = 1e-6;
        for i in 0..2 {
            let mut hi = x;
            let mut lo = x;
            hi[i] += h;
            lo[i] -= h;
            let fd = (obj.eval(&hi).0 - obj.eval(&lo).0) / (2.0 * h);
            assert!(
                (g[i] - fd).abs() < 1e-4 * fd.abs().max(1e-6),
                "{i}: {} vs {fd}",
                g[i]
            );
        }
    }
}
