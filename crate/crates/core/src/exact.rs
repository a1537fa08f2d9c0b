//! Closed-form left-invariant flows.
//!
//! Along the flow `e^t = 𝒰ᵗ e` with `∂_t𝒰ᵗ = −β_t Θ_t 𝒰ᵗ`, and `Θ_ul`, `Θ_un` stay
//! constant. Everything depends on `t` only through `ℬ_t`. With
//! `λ = √(Θ_ul² + Θ_un²)` the solutions split into four code paths:
//!
//! * `λ = 0`: every component of `Θ` scales by `1/(1 − Θ_uu ℬ_t)` and the
//!   lower block of `𝒰ᵗ` is a power of `1 − Θ_uu ℬ_t` in the eigenbasis of
//!   `θ/Θ_uu`;
//! * `λ = 0`, `Θ_uu = 0`: the lower block is `exp(−ℬ_t θ)`;
//! * exactly one of `Θ_ul`, `Θ_un` nonzero;
//! * both nonzero.
//!
//! In the last two `y_t = λℬ_t + arctan(Θ_uu/λ)` and `Θ_uu^t = λ tan y_t`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::cauchy::{
    invariants, slice_curvature, validate, CauchyPair, SliceCurvature, TableRow, ThetaInvariants,
    Tolerance,
};
use crate::error::{FlowError, Result};
use crate::lapse::LapseProfile;
use crate::tensor::{
    det3, eigen2x2, matmul3, swap_ln, sym2_function, transpose3, EigenData2, Mat3, Sym3, L, N, U,
};

/// Distance to a singular time below which evaluation is refused.
pub const SINGULAR_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowBranch {
    QuasiDiagonal,
    /// `λ = 0` and `Θ_uu = 0`.
    QuasiDiagonalLimit,
    /// One off-diagonal component. `swapped` means `Θ_un = 0`, handled by
    /// relabelling `l ↔ n`.
    SingleOffDiagonal { swapped: bool },
    DoubleOffDiagonal,
}

impl FlowBranch {
    pub fn is_quasi_diagonal(self) -> bool {
        matches!(
            self,
            FlowBranch::QuasiDiagonal | FlowBranch::QuasiDiagonalLimit
        )
    }
}

/// Constants of the `λ ≠ 0` solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NonQDCoefficients {
    pub y0: f64,
    pub c_ll: f64,
    pub c_nn: f64,
    pub c_ln: f64,
}

impl NonQDCoefficients {
    pub fn from_theta(theta: &Sym3) -> Self {
        let th = theta;
        let lambda = th.ul.hypot(th.un);
        let denom = lambda * lambda.hypot(th.uu);
        let l2 = lambda * lambda;
        NonQDCoefficients {
            y0: (th.uu / lambda).atan(),
            c_ll: (th.ll * l2 + th.ul * th.ul * th.uu) / denom,
            c_nn: (th.nn * l2 + th.un * th.un * th.uu) / denom,
            c_ln: (th.ln * l2 + th.ul * th.un * th.uu) / denom,
        }
    }
}

/// Matrix `𝒰ᵗ` with `e^t_a = Σ_b U[a][b] e_b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameTransform {
    pub u: Mat3,
}

impl FrameTransform {
    pub fn det(&self) -> f64 {
        det3(&self.u)
    }

    /// `h = UᵀU`, components of `Σ_a e^t_a ⊗ e^t_a` in the reference coframe.
    pub fn metric(&self) -> Sym3 {
        Sym3::from_matrix(&matmul3(&transpose3(&self.u), &self.u))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Finite(f64),
    Infinite,
    /// The boundary lies outside the lapse table.
    Unknown,
}

impl Boundary {
    pub fn finite(self) -> Option<f64> {
        match self {
            Boundary::Finite(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lifespan {
    pub t_minus: Boundary,
    pub t_plus: Boundary,
    pub immortal: bool,
    /// Forward-only verdict: `∫₀^∞ β < |1/Θ_uu|` when `λ = 0`, `|y_t| < π/2`
    /// for all `t` otherwise. `None` when the lapse is only known on a table.
    pub forward_criterion: Option<bool>,
    /// The forward-only verdict disagrees with `immortal`.
    pub criteria_conflict: bool,
}

impl Lifespan {
    pub fn contains(&self, t: f64) -> bool {
        let above = match self.t_minus {
            Boundary::Finite(lo) => t > lo,
            _ => true,
        };
        let below = match self.t_plus {
            Boundary::Finite(hi) => t < hi,
            _ => true,
        };
        above && below
    }
}

/// Closed-form solution for one pair and lapse.
#[derive(Clone, Debug)]
pub struct ClosedFormFlow {
    pair: CauchyPair,
    profile: LapseProfile,
    row: TableRow,
    branch: FlowBranch,
    inv: ThetaInvariants,
    h0: f64,
    eigen: Option<EigenData2>,
    nonqd: Option<NonQDCoefficients>,
}

impl ClosedFormFlow {
    pub fn new(pair: &CauchyPair, profile: &LapseProfile, tol: Tolerance) -> Result<Self> {
        let row = validate(pair, tol)?.row;
        let th = &pair.theta;
        let s = th.max_abs();
        let inv = invariants(pair);

        let branch = if tol.is_zero(inv.lambda, s) {
            if tol.is_zero(th.uu, s) {
                FlowBranch::QuasiDiagonalLimit
            } else {
                FlowBranch::QuasiDiagonal
            }
        } else if tol.is_zero(th.ul, s) {
            FlowBranch::SingleOffDiagonal { swapped: false }
        } else if tol.is_zero(th.un, s) {
            FlowBranch::SingleOffDiagonal { swapped: true }
        } else {
            FlowBranch::DoubleOffDiagonal
        };

        let eigen = match branch {
            FlowBranch::QuasiDiagonal => Some(eigen2x2([
                [th.ll / th.uu, th.ln / th.uu],
                [th.ln / th.uu, th.nn / th.uu],
            ])),
            FlowBranch::QuasiDiagonalLimit => Some(eigen2x2(inv.theta2)),
            _ => None,
        };
        let nonqd = (!branch.is_quasi_diagonal()).then(|| NonQDCoefficients::from_theta(th));
        let h0 = slice_curvature(&pair.structure_constants(), th).hamiltonian;

        Ok(ClosedFormFlow {
            pair: *pair,
            profile: profile.clone(),
            row,
            branch,
            inv,
            h0,
            eigen,
            nonqd,
        })
    }

    pub fn pair(&self) -> &CauchyPair {
        &self.pair
    }

    pub fn profile(&self) -> &LapseProfile {
        &self.profile
    }

    pub fn row(&self) -> TableRow {
        self.row
    }

    pub fn branch(&self) -> FlowBranch {
        self.branch
    }

    pub fn invariants(&self) -> &ThetaInvariants {
        &self.inv
    }

    pub fn eigen(&self) -> Option<&EigenData2> {
        self.eigen.as_ref()
    }

    pub fn nonqd_coefficients(&self) -> Option<&NonQDCoefficients> {
        self.nonqd.as_ref()
    }

    /// `𝓗₀` of the initial pair.
    pub fn initial_hamiltonian(&self) -> f64 {
        self.h0
    }

    pub fn b(&self, t: f64) -> Result<f64> {
        self.profile.integral(t)
    }

    pub fn beta(&self, t: f64) -> Result<f64> {
        self.profile.beta(t)
    }

    /// `1 − Θ_uu ℬ_t`, checked against the singular guard.
    fn scale_factor(&self, t: f64, b: f64) -> Result<f64> {
        let s = 1.0 - self.pair.theta.uu * b;
        if s < SINGULAR_GUARD {
            return Err(FlowError::SingularTime { t });
        }
        Ok(s)
    }

    /// `y_t`, checked against the singular guard.
    fn angle(&self, t: f64, b: f64) -> Result<f64> {
        let c = self.nonqd.as_ref().expect("no angle on the quasi-diagonal branches");
        let y = self.inv.lambda * b + c.y0;
        if FRAC_PI_2 - y.abs() < SINGULAR_GUARD {
            return Err(FlowError::SingularTime { t });
        }
        Ok(y)
    }

    /// Frame components `Θ^t_ab` of `Θ_t` in `e^t`.
    pub fn theta(&self, t: f64) -> Result<Sym3> {
        let b = self.b(t)?;
        let th = &self.pair.theta;
        if self.branch.is_quasi_diagonal() {
            let k = 1.0 / self.scale_factor(t, b)?;
            return Ok(Sym3::new(th.uu * k, th.ul, th.un, th.ll * k, th.ln * k, th.nn * k));
        }
        let y = self.angle(t, b)?;
        let lambda = self.inv.lambda;
        let c = self.nonqd.as_ref().unwrap();
        let (sec, tan) = (1.0 / y.cos(), y.tan());
        Ok(Sym3::new(
            lambda * tan,
            th.ul,
            th.un,
            c.c_ll * sec - th.ul * th.ul / lambda * tan,
            c.c_ln * sec - th.ul * th.un / lambda * tan,
            c.c_nn * sec - th.un * th.un / lambda * tan,
        ))
    }

    pub fn frame(&self, t: f64) -> Result<FrameTransform> {
        let b = self.b(t)?;
        let th = &self.pair.theta;
        let u = match self.branch {
            FlowBranch::QuasiDiagonal => {
                let s = self.scale_factor(t, b)?;
                let block = sym2_function(self.eigen.as_ref().unwrap(), |rho| s.powf(rho));
                embed_block(s, &block)
            }
            FlowBranch::QuasiDiagonalLimit => {
                let s = self.scale_factor(t, b)?;
                let block = sym2_function(self.eigen.as_ref().unwrap(), |rho| (-b * rho).exp());
                embed_block(s, &block)
            }
            FlowBranch::SingleOffDiagonal { swapped } => {
                let y = self.angle(t, b)?;
                let work = if swapped { th.swap_ln() } else { *th };
                let u = single_off_diagonal_frame(&work, b, y);
                if swapped {
                    swap_ln(&u)
                } else {
                    u
                }
            }
            FlowBranch::DoubleOffDiagonal => {
                let y = self.angle(t, b)?;
                double_off_diagonal_frame(th, self.inv.lambda, b, y)
            }
        };
        Ok(FrameTransform { u })
    }

    /// `h_t = UᵀU` in the reference coframe.
    pub fn metric(&self, t: f64) -> Result<Sym3> {
        Ok(self.frame(t)?.metric())
    }

    /// `h_t` from the explicit per-branch metric expressions, independent of
    /// the frame transform.
    pub fn metric_family(&self, t: f64) -> Result<Sym3> {
        let b = self.b(t)?;
        let th = &self.pair.theta;
        match self.branch {
            FlowBranch::QuasiDiagonal => {
                let s = self.scale_factor(t, b)?;
                let block = sym2_function(self.eigen.as_ref().unwrap(), |rho| s.powf(2.0 * rho));
                Ok(Sym3::new(s * s, 0.0, 0.0, block[0][0], block[0][1], block[1][1]))
            }
            FlowBranch::QuasiDiagonalLimit => {
                let s = self.scale_factor(t, b)?;
                let block =
                    sym2_function(self.eigen.as_ref().unwrap(), |rho| (-2.0 * b * rho).exp());
                Ok(Sym3::new(s * s, 0.0, 0.0, block[0][0], block[0][1], block[1][1]))
            }
            FlowBranch::SingleOffDiagonal { swapped } => {
                let y = self.angle(t, b)?;
                let work = if swapped { th.swap_ln() } else { *th };
                let (uu, un, lambda) = (work.uu, work.un, work.un.abs());
                let (sec2, tan) = (1.0 / y.cos().powi(2), y.tan());
                let s = 1.0 - uu * b;
                let h = Sym3::new(
                    s * s * sec2 + uu * uu / (lambda * lambda) - 2.0 * uu / lambda * s * tan,
                    0.0,
                    uu / un - un * b * sec2 * s - lambda / un * tan * (1.0 - 2.0 * uu * b),
                    1.0,
                    0.0,
                    1.0 + lambda * lambda * b * b * sec2 + 2.0 * b * lambda * tan,
                );
                Ok(if swapped { h.swap_ln() } else { h })
            }
            FlowBranch::DoubleOffDiagonal => {
                let y = self.angle(t, b)?;
                let lambda = self.inv.lambda;
                let tr = self.inv.trace;
                let (sec2, tan) = (1.0 / y.cos().powi(2), y.tan());
                let p = 1.0 + tr * b;
                let k = tr / (lambda * lambda)
                    + tan * (1.0 + 2.0 * tr * b) / lambda
                    + b * p * sec2;
                let diag = |x: f64| 1.0 + x * x * b * (b * sec2 + 2.0 * tan / lambda);
                Ok(Sym3::new(
                    p * p + (tan * p + tr / lambda).powi(2),
                    -th.ul * k,
                    -th.un * k,
                    diag(th.ul),
                    th.ul * th.un * b * sec2 * (b + (2.0 * y).sin() / lambda),
                    diag(th.un),
                ))
            }
        }
    }

    /// Closed-form `𝓗_t` for an initial value `h0`.
    pub fn hamiltonian_from(&self, h0: f64, t: f64) -> Result<f64> {
        let b = self.b(t)?;
        let th = &self.pair.theta;
        match self.branch {
            FlowBranch::QuasiDiagonal | FlowBranch::QuasiDiagonalLimit => {
                let s = self.scale_factor(t, b)?;
                Ok(h0 / (s * s))
            }
            FlowBranch::SingleOffDiagonal { swapped } => {
                let y = self.angle(t, b)?;
                let off = if swapped { th.ul } else { th.un };
                Ok(off * off * h0 / (th.uu * th.uu + off * off) / y.cos().powi(2))
            }
            FlowBranch::DoubleOffDiagonal => {
                let y = self.angle(t, b)?;
                let l2 = self.inv.lambda * self.inv.lambda;
                Ok(l2 * h0 / (l2 + th.uu * th.uu) / y.cos().powi(2))
            }
        }
    }

    pub fn hamiltonian(&self, t: f64) -> Result<f64> {
        self.hamiltonian_from(self.h0, t)
    }

    /// Curvature and constraints of `(h_t, Θ_t)` recomputed from the
    /// structure constants of `e^t`.
    pub fn slice(&self, t: f64) -> Result<SliceCurvature> {
        let u = self.frame(t)?;
        let theta = self.theta(t)?;
        let c = self
            .pair
            .structure_constants()
            .push_forward(&u.u)
            .ok_or(FlowError::SingularTime { t })?;
        Ok(slice_curvature(&c, &theta))
    }

    pub fn lifespan(&self) -> Lifespan {
        let th = &self.pair.theta;
        let constant_lapse = matches!(self.profile, LapseProfile::Constant { .. });
        let at = |target: f64| match self.profile.time_for_integral(target) {
            Some(t) => Boundary::Finite(t),
            None => Boundary::Unknown,
        };

        let (t_minus, t_plus, forward) = match self.branch {
            FlowBranch::QuasiDiagonalLimit => {
                (Boundary::Infinite, Boundary::Infinite, Some(true))
            }
            FlowBranch::QuasiDiagonal => {
                let forward = constant_lapse.then_some(false);
                if th.uu > 0.0 {
                    (Boundary::Infinite, at(1.0 / th.uu), forward)
                } else {
                    (at(1.0 / th.uu), Boundary::Infinite, forward)
                }
            }
            _ => {
                let c = self.nonqd.as_ref().unwrap();
                let lambda = self.inv.lambda;
                (
                    at((-FRAC_PI_2 - c.y0) / lambda),
                    at((FRAC_PI_2 - c.y0) / lambda),
                    constant_lapse.then_some(false),
                )
            }
        };
        let immortal = t_minus == Boundary::Infinite && t_plus == Boundary::Infinite;
        Lifespan {
            t_minus,
            t_plus,
            immortal,
            forward_criterion: forward,
            criteria_conflict: forward.is_some_and(|f| f != immortal),
        }
    }

    /// Middle `fraction` of the lifespan. Infinite sides are cut at
    /// `±horizon` and unknown ones at the lapse table edge.
    pub fn window(&self, fraction: f64, horizon: f64) -> (f64, f64) {
        let span = self.lifespan();
        let (dlo, dhi) = self.profile.domain();
        let lo = match span.t_minus {
            Boundary::Finite(t) => t,
            Boundary::Infinite => (-horizon).max(dlo),
            Boundary::Unknown => dlo,
        };
        let hi = match span.t_plus {
            Boundary::Finite(t) => t,
            Boundary::Infinite => horizon.min(dhi),
            Boundary::Unknown => dhi,
        };
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo) * fraction;
        (mid - half, mid + half)
    }

    /// Frame components of the unit one-form `η = (Θ_un e^t_l − Θ_ul e^t_n)/λ`.
    pub fn eta_frame(&self) -> Result<[f64; 3]> {
        if self.branch.is_quasi_diagonal() {
            return Err(FlowError::NotApplicable("η is defined only when λ ≠ 0"));
        }
        let th = &self.pair.theta;
        let lambda = self.inv.lambda;
        Ok([0.0, th.un / lambda, -th.ul / lambda])
    }

    /// Components of `η_t` in the reference coframe.
    pub fn eta(&self, t: f64) -> Result<[f64; 3]> {
        let e = self.eta_frame()?;
        let u = self.frame(t)?.u;
        Ok(std::array::from_fn(|c| e[L] * u[L][c] + e[N] * u[N][c]))
    }
}

fn embed_block(uu: f64, block: &[[f64; 2]; 2]) -> Mat3 {
    [
        [uu, 0.0, 0.0],
        [0.0, block[0][0], block[0][1]],
        [0.0, block[1][0], block[1][1]],
    ]
}

/// `Θ_ul = 0`, `Θ_un ≠ 0`: five nonzero entries.
fn single_off_diagonal_frame(th: &Sym3, b: f64, y: f64) -> Mat3 {
    let lambda = th.un.abs();
    let s = 1.0 - th.uu * b;
    let tan = y.tan();
    let mut u = [[0.0; 3]; 3];
    u[U][U] = s;
    u[U][N] = -th.un * b;
    u[L][L] = 1.0;
    u[N][U] = th.uu / th.un - lambda / th.un * s * tan;
    u[N][N] = 1.0 + lambda * b * tan;
    u
}

/// `Θ_ul Θ_un ≠ 0`: all nine entries.
fn double_off_diagonal_frame(th: &Sym3, lambda: f64, b: f64, y: f64) -> Mat3 {
    let s = 1.0 - th.uu * b;
    let tan = y.tan();
    let a = th.uu / lambda - s * tan;
    let cross = th.ul * th.un * b * tan / lambda;
    [
        [s, -th.ul * b, -th.un * b],
        [th.ul / lambda * a, 1.0 + th.ul * th.ul * b * tan / lambda, cross],
        [th.un / lambda * a, cross, 1.0 + th.un * th.un * b * tan / lambda],
    ]
}

fn flow(pair: &CauchyPair, profile: &LapseProfile) -> Result<ClosedFormFlow> {
    ClosedFormFlow::new(pair, profile, Tolerance::default())
}

pub fn theta_exact(pair: &CauchyPair, profile: &LapseProfile, t: f64) -> Result<Sym3> {
    flow(pair, profile)?.theta(t)
}

pub fn frame_exact(pair: &CauchyPair, profile: &LapseProfile, t: f64) -> Result<FrameTransform> {
    flow(pair, profile)?.frame(t)
}

pub fn metric_exact(pair: &CauchyPair, profile: &LapseProfile, t: f64) -> Result<Sym3> {
    flow(pair, profile)?.metric(t)
}

pub fn hamiltonian_exact(
    pair: &CauchyPair,
    h0: f64,
    profile: &LapseProfile,
    t: f64,
) -> Result<f64> {
    flow(pair, profile)?.hamiltonian_from(h0, t)
}

pub fn lifespan(pair: &CauchyPair, profile: &LapseProfile) -> Result<Lifespan> {
    Ok(flow(pair, profile)?.lifespan())
}

pub fn eta_oneform(pair: &CauchyPair, profile: &LapseProfile, t: f64) -> Result<[f64; 3]> {
    flow(pair, profile)?.eta(t)
}
