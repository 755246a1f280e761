//! Second- and fourth-order moments of the cascaded channels
//! `g_k = H₀ᴴ diag(vec Λ) h_k`.
//!
//! With `s_k = a_Rᴴ diag(vec Λ) h_k` and `u_k = diag(vec Λ) h_k` the cascade
//! splits into `β₀* conj(a_B) s_k` plus an NLOS part driven by `H̃₀`, and every
//! moment reduces to moments of `(s_k, u_k)`. Writing `B = |β|²`, `S = σ²`
//! and `F_k = |f_k|²`:
//!
//! * `E|s|² = B F + S M_R`, `E‖u‖² = (B + S) M_R`
//! * `E‖g_k‖² = M_B χ_k`, `E‖g_k‖⁴ = M_B Δ_k`,
//!   `E|g_kᴴ g_i|² = M_B Ω_ki`, `E‖g_k‖²‖g_i‖² = M_B Ξ_ki`.

use nalgebra::DMatrix;

use crate::channel::{LosModel, PhaseProfile};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub m_b: usize,
    pub m_r: usize,
    pub f: Vec<C64>,
    pub chi: Vec<f64>,
    pub delta: Vec<f64>,
    pub omega: DMatrix<f64>,
    pub xi: DMatrix<f64>,
    /// `Ξ` without the `Re{f_k* f_i a_iᴴ a_k}` coupling term. Kept for
    /// comparison only; the oracle tests show the full form is the right one.
    pub xi_without_los_coupling: DMatrix<f64>,
}

struct Single {
    es2: f64,
    eu2: f64,
    es4: f64,
    eu4: f64,
    esu: f64,
}

fn single(b: f64, s: f64, f2: f64, m: f64) -> Single {
    let es2 = b * f2 + s * m;
    let eu2 = (b + s) * m;
    Single {
        es2,
        eu2,
        es4: b * b * f2 * f2 + 4.0 * s * m * b * f2 + 2.0 * s * s * m * m,
        eu4: eu2 * eu2 + 2.0 * s * b * m + m * s * s,
        esu: es2 * eu2 + s * s * m + 2.0 * s * b * f2,
    }
}

pub fn moments(los: &LosModel, profile: &PhaseProfile) -> Moments {
    let k_count = los.num_ues();
    let g = &los.gains;
    let (mb, m) = (los.m_b as f64, los.m_r as f64);
    let b0 = g.beta0.norm_sqr();
    let s0 = g.nlos0;
    let f: Vec<C64> = (0..k_count).map(|k| los.f(k, profile)).collect();
    let bk: Vec<f64> = g.beta.iter().map(|b| b.norm_sqr()).collect();
    let sk = &g.nlos;
    let st: Vec<Single> = (0..k_count)
        .map(|k| single(bk[k], sk[k], f[k].norm_sqr(), m))
        .collect();
    let chi: Vec<f64> = st.iter().map(|s| b0 * s.es2 + s0 * s.eu2).collect();
    let delta: Vec<f64> = st
        .iter()
        .map(|s| {
            let shared = s0 * s0 * s.eu4 + 2.0 * b0 * s0 * s.esu;
            mb * (b0 * b0 * s.es4 + shared) + shared
        })
        .collect();
    let mut omega = DMatrix::zeros(k_count, k_count);
    let mut xi = DMatrix::zeros(k_count, k_count);
    let mut xi_without = DMatrix::zeros(k_count, k_count);
    for k in 0..k_count {
        omega[(k, k)] = delta[k];
        xi[(k, k)] = delta[k];
        xi_without[(k, k)] = delta[k];
        for i in 0..k_count {
            if i == k {
                continue;
            }
            // a_kᴴ a_i
            let aa: C64 = los.a_ue[k]
                .iter()
                .zip(&los.a_ue[i])
                .map(|(x, y)| x.conj() * y)
                .sum();
            let tr_rr =
                bk[k] * bk[i] * aa.norm_sqr() + (sk[i] * bk[k] + sk[k] * bk[i] + sk[k] * sk[i]) * m;
            // Re{f_k* f_i a_iᴴ a_k}
            let coupling = bk[k] * bk[i] * (f[k].conj() * f[i] * aa.conj()).re;
            let rest = sk[k] * bk[i] * f[i].norm_sqr()
                + sk[i] * bk[k] * f[k].norm_sqr()
                + sk[i] * sk[k] * m;
            let cross = s0 * s0 * tr_rr + 2.0 * b0 * s0 * (coupling + rest);
            xi[(k, i)] = mb * chi[k] * chi[i] + cross;
            xi_without[(k, i)] = xi[(k, i)] - 2.0 * b0 * s0 * coupling;
            omega[(k, i)] = b0 * s0 * (st[k].es2 * st[i].eu2 + st[i].es2 * st[k].eu2)
                + s0 * s0 * st[k].eu2 * st[i].eu2
                + mb * (b0 * b0 * st[k].es2 * st[i].es2
                    + s0 * s0 * tr_rr
                    + 2.0 * b0 * s0 * (coupling + rest));
        }
    }
    // Enforce exact symmetry against rounding in the pairwise evaluation.
    let omega = (&omega + omega.transpose()) * 0.5;
    let xi = (&xi + xi.transpose()) * 0.5;
    let xi_without = (&xi_without + xi_without.transpose()) * 0.5;
    Moments {
        m_b: los.m_b,
        m_r: los.m_r,
        f,
        chi,
        delta,
        omega,
        xi,
        xi_without_los_coupling: xi_without,
    }
}
