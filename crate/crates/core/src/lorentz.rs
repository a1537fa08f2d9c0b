//! The development `g = −β_t² dt² + h_t` in the orthonormal coframe
//! `(e₀, e₁, e₂, e₃) = (β_t dt, e^t_u, e^t_l, e^t_n)`, signature `(−,+,+,+)`.
//!
//! With a spatially constant lapse the coframe satisfies `de₀ = 0` and
//! `de_a = Θ_t(e_a) ∧ (e₀ + e₁)`. Structure functions depend on time only,
//! and `E₀ = β⁻¹∂_t`, so their frame derivatives come from the rate of `Θ_t`.

use serde::Serialize;

use crate::cauchy::{CauchyPair, Tolerance};
use crate::error::{FlowError, Result};
use crate::exact::ClosedFormFlow;
use crate::lapse::LapseProfile;
use crate::numeric::theta_rate;
use crate::tensor::{frame_connection, frame_ricci, Sym3, Tensor3, U};

/// Lorentzian signature of the frame.
pub const ETA4: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

/// Frame components of the null covector `e₀ + e₁`.
pub const NULL_DIRECTION: [f64; 4] = [1.0, 1.0, 0.0, 0.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coframe4 {
    pub t: f64,
    pub beta: f64,
    /// Shape operator in the spatial frame.
    pub theta: Sym3,
    /// `c[A][B][C]` with `[E_B, E_C] = c^A_{BC} E_A`.
    pub c: Tensor3<4>,
    /// `E₀(c)`.
    pub dc0: Tensor3<4>,
}

fn structure4(theta: &Sym3) -> Tensor3<4> {
    // de_{a+1}(E_B, E_C) = Σ_b Θ_ab (δ_{b+1,B} k_C − δ_{b+1,C} k_B)
    let th = |a: usize, b: usize| if b == 0 { 0.0 } else { theta.get(a, b - 1) };
    let k = NULL_DIRECTION;
    let mut c = [[[0.0; 4]; 4]; 4];
    for a in 0..3 {
        for bb in 0..4 {
            for cc in 0..4 {
                c[a + 1][bb][cc] = -(th(a, bb) * k[cc] - th(a, cc) * k[bb]);
            }
        }
    }
    c
}

pub fn coframe4_from_theta(theta: &Sym3, beta: f64, t: f64) -> Coframe4 {
    // E₀ = β⁻¹ ∂_t and the rate is linear in β
    let rate = theta_rate(theta, 1.0);
    Coframe4 {
        t,
        beta,
        theta: *theta,
        c: structure4(theta),
        dc0: structure4(&rate),
    }
}

pub fn coframe4_at(pair: &CauchyPair, profile: &LapseProfile, t: f64) -> Result<Coframe4> {
    let flow = ClosedFormFlow::new(pair, profile, Tolerance::default())?;
    coframe4_of(&flow, t)
}

pub fn coframe4_of(flow: &ClosedFormFlow, t: f64) -> Result<Coframe4> {
    Ok(coframe4_from_theta(&flow.theta(t)?, flow.beta(t)?, t))
}

impl Coframe4 {
    /// Frame components `F[B][C] = de_A(E_B, E_C)` of one exterior derivative.
    pub fn differential(&self, a: usize) -> [[f64; 4]; 4] {
        self.c[a].map(|row| row.map(|x| -x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ricci4 {
    pub components: [[f64; 4]; 4],
}

impl Ricci4 {
    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Max-norm distance to `k · (e₀ + e₁) ⊗ (e₀ + e₁)`.
    pub fn distance_to_null_dust(&self, k: f64) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let target = k * NULL_DIRECTION[a] * NULL_DIRECTION[b];
                m = m.max((self.components[a][b] - target).abs());
            }
        }
        m
    }
}

pub fn ricci4(frame: &Coframe4) -> Ricci4 {
    let gamma = frame_connection(&frame.c, &ETA4);
    let zero = [[[0.0; 4]; 4]; 4];
    let dgamma = [frame_connection(&frame.dc0, &ETA4), zero, zero, zero];
    let r = frame_ricci(&frame.c, &gamma, &dgamma, &ETA4);
    let mut sym = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            sym[a][b] = 0.5 * (r[a][b] + r[b][a]);
        }
    }
    Ricci4 { components: sym }
}

/// `‖Ric⁴ − (𝓗_t/2)(e₀+e₁)⊗(e₀+e₁)‖_max` with the closed-form `𝓗_t`.
pub fn verify_ricci_identity(pair: &CauchyPair, profile: &LapseProfile, t: f64) -> Result<f64> {
    let flow = ClosedFormFlow::new(pair, profile, Tolerance::default())?;
    ricci_identity_residual(&flow, t)
}

pub fn ricci_identity_residual(flow: &ClosedFormFlow, t: f64) -> Result<f64> {
    let ric = ricci4(&coframe4_of(flow, t)?);
    Ok(ric.distance_to_null_dust(0.5 * flow.hamiltonian(t)?))
}

/// Frame data of the Dirac current `u = e^{𝔣_t}(β_t dt + e^t_u)` and of the
/// null class `[e^t_l]`. The scale `e^{𝔣_t}` enters only through `d𝔣_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiracCurrentFrame {
    /// `β_t dt + e^t_u` in the four-frame.
    pub base_oneform: [f64; 4],
    /// `d𝔣_t = −Θ_t(e^t_u)` in the spatial frame `e^t`.
    pub log_scale_differential: [f64; 3],
    /// `e^t_l` in the four-frame.
    pub l_class_representative: [f64; 4],
    /// `g⁻¹(base, base)`.
    pub base_norm: f64,
    /// Max-norm of `d(d𝔣_t)` from the structure constants of `e^t`.
    pub closedness_residual: f64,
}

pub fn dirac_current_frame(
    pair: &CauchyPair,
    profile: &LapseProfile,
    t: f64,
) -> Result<DiracCurrentFrame> {
    let flow = ClosedFormFlow::new(pair, profile, Tolerance::default())?;
    dirac_current_of(&flow, t)
}

pub fn dirac_current_of(flow: &ClosedFormFlow, t: f64) -> Result<DiracCurrentFrame> {
    let theta = flow.theta(t)?;
    let u = flow.frame(t)?;
    let c = flow
        .pair()
        .structure_constants()
        .push_forward(&u.u)
        .ok_or(FlowError::SingularTime { t })?;
    let alpha: [f64; 3] = std::array::from_fn(|a| -theta.get(U, a));

    let mut closed: f64 = 0.0;
    for b in 0..3 {
        for d in 0..3 {
            let v: f64 = (0..3).map(|a| alpha[a] * c.c[a][b][d]).sum();
            closed = closed.max(v.abs());
        }
    }
    let base = NULL_DIRECTION;
    let base_norm: f64 = (0..4).map(|a| ETA4[a] * base[a] * base[a]).sum();

    Ok(DiracCurrentFrame {
        base_oneform: base,
        log_scale_differential: alpha,
        l_class_representative: [0.0, 0.0, 1.0, 0.0],
        base_norm,
        closedness_residual: closed,
    })
}

/// Curvature summary at one time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub t: f64,
    pub theta: Sym3,
    pub ricci3: Sym3,
    pub scalar_curvature: f64,
    pub hamiltonian: f64,
    pub hamiltonian_recomputed: f64,
    pub momentum_residual: [f64; 3],
    pub ricci4: [[f64; 4]; 4],
    pub ricci_identity_residual: f64,
}

pub fn curvature_report(flow: &ClosedFormFlow, t: f64) -> Result<CurvatureReport> {
    let slice = flow.slice(t)?;
    let hamiltonian = flow.hamiltonian(t)?;
    let ric = ricci4(&coframe4_of(flow, t)?);
    Ok(CurvatureReport {
        t,
        theta: flow.theta(t)?,
        ricci3: slice.ricci,
        scalar_curvature: slice.scalar_curvature,
        hamiltonian,
        hamiltonian_recomputed: slice.hamiltonian,
        momentum_residual: slice.momentum,
        ricci4: ric.components,
        ricci_identity_residual: ric.distance_to_null_dust(0.5 * hamiltonian),
    })
}
