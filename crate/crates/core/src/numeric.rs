//! Runge–Kutta integration of the coupled system
//!
//! ```text
//! ∂_t Θ_uu = β (Θ_uu² + Θ_ul² + Θ_un²)
//! ∂_t Θ_ll = β (Θ_ll Θ_uu − Θ_ul²)
//! ∂_t Θ_ln = β (Θ_ln Θ_uu − Θ_ul Θ_un)
//! ∂_t Θ_nn = β (Θ_nn Θ_uu − Θ_un²)
//! ∂_t Θ_ul = ∂_t Θ_un = 0
//! ∂_t U    = −β Θ U,  U(0) = Id
//! ```
//!
//! used as an oracle for the closed forms, and residual monitors for the
//! flow equations along a computed state.

use serde::Serialize;

use crate::cauchy::{slice_curvature, validate, CauchyPair, Tolerance};
use crate::error::{FlowError, Result};
use crate::exact::FrameTransform;
use crate::lapse::LapseProfile;
use crate::tensor::{identity3, matmul3, Mat3, Sym3, U};

/// States whose shape operator exceeds this are treated as blown up.
pub const OVERFLOW_GUARD: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowState {
    pub t: f64,
    /// `ℬ_t`.
    pub b: f64,
    pub beta: f64,
    pub theta: Sym3,
    pub u: FrameTransform,
    pub metric: Sym3,
    /// `𝓗_t` recomputed from the curvature of `h_t`.
    pub hamiltonian: f64,
}

impl FlowState {
    pub fn new(pair: &CauchyPair, t: f64, b: f64, beta: f64, theta: Sym3, u: Mat3) -> Self {
        let u = FrameTransform { u };
        let hamiltonian = match pair.structure_constants().push_forward(&u.u) {
            Some(c) => slice_curvature(&c, &theta).hamiltonian,
            None => f64::NAN,
        };
        FlowState {
            t,
            b,
            beta,
            theta,
            metric: u.metric(),
            u,
            hamiltonian,
        }
    }

    pub fn initial(pair: &CauchyPair, beta: f64) -> Self {
        FlowState::new(pair, 0.0, 0.0, beta, pair.theta, identity3())
    }
}

pub fn theta_rate(theta: &Sym3, beta: f64) -> Sym3 {
    let th = theta;
    Sym3::new(
        beta * (th.uu * th.uu + th.ul * th.ul + th.un * th.un),
        0.0,
        0.0,
        beta * (th.ll * th.uu - th.ul * th.ul),
        beta * (th.ln * th.uu - th.ul * th.un),
        beta * (th.nn * th.uu - th.un * th.un),
    )
}

pub fn frame_rate(theta: &Sym3, u: &Mat3, beta: f64) -> Mat3 {
    matmul3(&theta.to_matrix(), u).map(|row| row.map(|x| -beta * x))
}

/// `(∂_t Θ, ∂_t U)` at the given point.
pub fn ode_rhs(theta: &Sym3, u: &Mat3, beta: f64) -> (Sym3, Mat3) {
    (theta_rate(theta, beta), frame_rate(theta, u, beta))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StepOptions {
    Fixed { step: f64 },
    /// Step-doubling error control.
    Adaptive {
        tol: f64,
        initial_step: f64,
        min_step: f64,
    },
}

impl StepOptions {
    pub fn fixed(step: f64) -> Self {
        StepOptions::Fixed { step }
    }

    pub fn adaptive(tol: f64) -> Self {
        StepOptions::Adaptive {
            tol,
            initial_step: 1e-3,
            min_step: 1e-14,
        }
    }

    fn initial_step(&self) -> f64 {
        match *self {
            StepOptions::Fixed { step } => step,
            StepOptions::Adaptive { initial_step, .. } => initial_step,
        }
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            StepOptions::Fixed { step } => step.is_finite() && step > 0.0,
            StepOptions::Adaptive {
                tol,
                initial_step,
                min_step,
            } => tol > 0.0 && initial_step > 0.0 && min_step > 0.0 && min_step <= initial_step,
        };
        if ok {
            Ok(())
        } else {
            Err(FlowError::InvalidInput(format!("bad step options {self:?}")))
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trajectory {
    /// Accepted states in increasing `t`, including `t = 0`.
    pub states: Vec<FlowState>,
    pub accepted: usize,
    pub rejected: usize,
    pub max_residual: f64,
    /// The overflow guard stopped the integration early.
    pub truncated: bool,
}

#[derive(Clone, Copy)]
struct Point {
    theta: [f64; 6],
    u: Mat3,
}

impl Point {
    fn sym(&self) -> Sym3 {
        Sym3::from_components(self.theta)
    }

    fn axpy(&self, h: f64, d: &Point) -> Point {
        Point {
            theta: std::array::from_fn(|i| self.theta[i] + h * d.theta[i]),
            u: std::array::from_fn(|i| std::array::from_fn(|j| self.u[i][j] + h * d.u[i][j])),
        }
    }

    fn max_diff(&self, o: &Point) -> f64 {
        let a = self.theta.iter().zip(o.theta.iter()).map(|(x, y)| (x - y).abs());
        let b = self.u.iter().flatten().zip(o.u.iter().flatten()).map(|(x, y)| (x - y).abs());
        a.chain(b).fold(0.0, f64::max)
    }

    fn magnitude(&self) -> f64 {
        self.theta.iter().chain(self.u.iter().flatten()).fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    fn blown_up(&self) -> bool {
        let th = self.sym();
        !th.is_finite() || th.max_abs() > OVERFLOW_GUARD || self.u.iter().flatten().any(|x| !x.is_finite())
    }
}

fn rate(p: &Point, beta: f64) -> Point {
    let (th, u) = ode_rhs(&p.sym(), &p.u, beta);
    Point {
        theta: th.components(),
        u,
    }
}

fn rk4_step(profile: &LapseProfile, t: f64, p: &Point, h: f64) -> Result<Point> {
    let b0 = profile.beta(t)?;
    let bm = profile.beta(t + 0.5 * h)?;
    let b1 = profile.beta(t + h)?;
    let k1 = rate(p, b0);
    let k2 = rate(&p.axpy(0.5 * h, &k1), bm);
    let k3 = rate(&p.axpy(0.5 * h, &k2), bm);
    let k4 = rate(&p.axpy(h, &k3), b1);
    Ok(Point {
        theta: std::array::from_fn(|i| {
            p.theta[i] + h / 6.0 * (k1.theta[i] + 2.0 * k2.theta[i] + 2.0 * k3.theta[i] + k4.theta[i])
        }),
        u: std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                p.u[i][j] + h / 6.0 * (k1.u[i][j] + 2.0 * k2.u[i][j] + 2.0 * k3.u[i][j] + k4.u[i][j])
            })
        }),
    })
}

struct Run {
    states: Vec<FlowState>,
    accepted: usize,
    rejected: usize,
    truncated: bool,
}

/// Marches from `t = 0` towards `t_end`, landing exactly on every time in
/// `stops` (which must lie between 0 and `t_end`).
fn march(
    pair: &CauchyPair,
    profile: &LapseProfile,
    t_end: f64,
    opts: &StepOptions,
    stops: &[f64],
) -> Result<Run> {
    let dir = if t_end >= 0.0 { 1.0 } else { -1.0 };
    // steps never straddle a kink of the lapse
    let mut stops: Vec<f64> = stops
        .iter()
        .chain(profile.breakpoints())
        .copied()
        .filter(|s| *s * dir > 0.0 && *s * dir < t_end * dir)
        .collect();
    stops.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    stops.dedup();
    if t_end != 0.0 {
        stops.push(t_end);
    }

    let record = |t: f64, p: &Point| -> Result<FlowState> {
        Ok(FlowState::new(
            pair,
            t,
            profile.integral(t)?,
            profile.beta(t)?,
            p.sym(),
            p.u,
        ))
    };

    let mut p = Point {
        theta: pair.theta.components(),
        u: identity3(),
    };
    let mut t = 0.0;
    let mut run = Run {
        states: vec![record(0.0, &p)?],
        accepted: 0,
        rejected: 0,
        truncated: false,
    };
    let mut h = opts.initial_step();

    for &stop in &stops {
        while (stop - t) * dir > 0.0 {
            let remaining = (stop - t).abs();
            let last = h >= remaining;
            let step = if last { remaining } else { h };

            let (next, t_next) = match *opts {
                StepOptions::Fixed { .. } => {
                    let t_next = if last { stop } else { t + dir * step };
                    (rk4_step(profile, t, &p, dir * step)?, t_next)
                }
                StepOptions::Adaptive { tol, min_step, .. } => {
                    let full = rk4_step(profile, t, &p, dir * step)?;
                    let half = rk4_step(profile, t, &p, 0.5 * dir * step)?;
                    let two = rk4_step(profile, t + 0.5 * dir * step, &half, 0.5 * dir * step)?;
                    let err = full.max_diff(&two) / 15.0 / two.magnitude().max(1.0);
                    let factor = if err == 0.0 {
                        4.0
                    } else {
                        (0.9 * (tol / err).powf(0.2)).clamp(0.2, 4.0)
                    };
                    if !(err <= tol) {
                        run.rejected += 1;
                        h = step * factor;
                        if h < min_step {
                            return Err(FlowError::StepFailure { t, step: h });
                        }
                        continue;
                    }
                    if !last {
                        h = step * factor;
                    }
                    (two, if last { stop } else { t + dir * step })
                }
            };

            if next.blown_up() {
                run.truncated = true;
                break;
            }
            p = next;
            t = t_next;
            run.accepted += 1;
            run.states.push(record(t, &p)?);
        }
        if run.truncated {
            break;
        }
    }
    Ok(run)
}

/// Integrates from `t = 0` to `t_end` (either sign).
pub fn integrate(
    pair: &CauchyPair,
    profile: &LapseProfile,
    t_end: f64,
    opts: &StepOptions,
) -> Result<Trajectory> {
    validate(pair, Tolerance::default())?;
    opts.check()?;
    let mut run = march(pair, profile, t_end, opts, &[])?;
    if t_end < 0.0 {
        run.states.reverse();
    }
    let max_residual = run
        .states
        .iter()
        .map(|s| flow_residuals(s, pair).max())
        .fold(0.0, f64::max);
    Ok(Trajectory {
        states: run.states,
        accepted: run.accepted,
        rejected: run.rejected,
        max_residual,
        truncated: run.truncated,
    })
}

/// States at the requested times, obtained by marching outwards from `t = 0`
/// in both directions. Times past a blow-up are omitted and flag `truncated`.
pub fn integrate_samples(
    pair: &CauchyPair,
    profile: &LapseProfile,
    times: &[f64],
    opts: &StepOptions,
) -> Result<Trajectory> {
    validate(pair, Tolerance::default())?;
    opts.check()?;
    let lo = times.iter().copied().fold(0.0, f64::min);
    let hi = times.iter().copied().fold(0.0, f64::max);

    let mut out = Trajectory::default();
    let mut found: Vec<FlowState> = Vec::with_capacity(times.len());
    for end in [lo, hi] {
        if end == 0.0 {
            continue;
        }
        let run = march(pair, profile, end, opts, times)?;
        out.accepted += run.accepted;
        out.rejected += run.rejected;
        out.truncated |= run.truncated;
        found.extend(run.states.into_iter().filter(|s| s.t != 0.0 && times.contains(&s.t)));
    }
    if times.contains(&0.0) {
        found.push(FlowState::new(pair, 0.0, 0.0, profile.beta(0.0)?, pair.theta, identity3()));
    }
    found.sort_by(|a, b| a.t.total_cmp(&b.t));
    found.dedup_by(|a, b| a.t == b.t);
    out.max_residual = found
        .iter()
        .map(|s| flow_residuals(s, pair).max())
        .fold(0.0, f64::max);
    out.states = found;
    Ok(out)
}

/// Residuals of the four flow equations at one state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `‖∂_t U + β Θ U‖` with `∂_t U` from the right-hand side.
    pub r1: f64,
    /// `d e^t_a` from `U de` against `Θ_t(e^t_a) ∧ e^t_u`.
    pub r2: f64,
    /// `∂_t (Θ_t(e^t_u))`.
    pub r3: f64,
    /// `dΘ_t(e^t_u)`, i.e. the `ul` and `un` entries of `Θ_t²`.
    pub r4: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3).max(self.r4)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.r1, self.r2, self.r3, self.r4]
    }
}

pub fn flow_residuals(state: &FlowState, pair: &CauchyPair) -> ResidualReport {
    let th = state.theta.to_matrix();
    let th0 = pair.theta.to_matrix();
    let u = &state.u.u;
    let (dth, du) = ode_rhs(&state.theta, u, state.beta);
    let dth = dth.to_matrix();

    let mut r1: f64 = 0.0;
    let tu = matmul3(&th, u);
    for i in 0..3 {
        for j in 0..3 {
            r1 = r1.max((du[i][j] + state.beta * tu[i][j]).abs());
        }
    }

    // two-form coefficients M[a][c][d] of e_c ∧ e_d, antisymmetrized
    let mut r2: f64 = 0.0;
    let ut = matmul3(u, &th0);
    for a in 0..3 {
        let mut lhs = [[0.0; 3]; 3];
        let mut rhs = [[0.0; 3]; 3];
        for c in 0..3 {
            lhs[c][U] = ut[a][c];
            for d in 0..3 {
                rhs[c][d] = (0..3).map(|b| th[a][b] * u[b][c]).sum::<f64>() * u[U][d];
            }
        }
        for c in 0..3 {
            for d in 0..3 {
                let l = lhs[c][d] - lhs[d][c];
                let r = rhs[c][d] - rhs[d][c];
                r2 = r2.max((l - r).abs());
            }
        }
    }

    let mut r3: f64 = 0.0;
    for b in 0..3 {
        let v: f64 = (0..3).map(|a| dth[U][a] * u[a][b] + th[U][a] * du[a][b]).sum();
        r3 = r3.max(v.abs());
    }

    let sq = state.theta.square();
    let r4 = sq.ul.abs().max(sq.un.abs());

    ResidualReport { r1, r2, r3, r4 }
}
