//! Left-invariant parallel Cauchy pairs.
//!
//! A pair is a shape operator `Θ` in a fixed orthonormal coframe `(e_u, e_l, e_n)`
//! subject to `de_a = Θ(e_a) ∧ e_u` and `dΘ(e_u) = 0`. On a Lie algebra those
//! reduce to four quadratic relations among the six components.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::tensor::{divergence_sym, ricci3, structure_constants, StructureConstants, Sym3};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative zero-test threshold: `x` counts as zero when `|x| ≤ tol · scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(tol: f64) -> Result<Self> {
        if tol.is_finite() && tol > 0.0 {
            Ok(Tolerance(tol))
        } else {
            Err(FlowError::InvalidInput(format!(
                "tolerance must be finite and positive, got {tol}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self, x: f64, scale: f64) -> bool {
        x.abs() <= self.0 * scale
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_TOL)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyPair {
    pub theta: Sym3,
}

impl CauchyPair {
    pub fn new(theta: Sym3) -> Result<Self> {
        if !theta.is_finite() {
            return Err(FlowError::InvalidInput(
                "shape operator components must be finite".into(),
            ));
        }
        Ok(CauchyPair { theta })
    }

    pub fn invariants(&self) -> ThetaInvariants {
        invariants(self)
    }

    pub fn structure_constants(&self) -> StructureConstants {
        structure_constants(&self.theta)
    }

    /// Largest component magnitude, the scale for relative zero tests.
    pub fn scale(&self) -> f64 {
        self.theta.max_abs()
    }
}

impl From<Sym3> for CauchyPair {
    fn from(theta: Sym3) -> Self {
        CauchyPair { theta }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaInvariants {
    pub lambda: f64,
    /// Lower block `[[Θ_ll, Θ_ln], [Θ_ln, Θ_nn]]`.
    pub theta2: [[f64; 2]; 2],
    pub trace: f64,
    pub delta: f64,
}

pub fn invariants(pair: &CauchyPair) -> ThetaInvariants {
    let th = &pair.theta;
    ThetaInvariants {
        lambda: th.ul.hypot(th.un),
        theta2: [[th.ll, th.ln], [th.ln, th.nn]],
        trace: th.ll + th.nn,
        delta: th.ll * th.nn - th.ln * th.ln,
    }
}

/// Residuals of the four quadratic relations, in order
/// `Θ_lnΘ_ul − Θ_llΘ_un`, `Θ_nnΘ_ul − Θ_lnΘ_un`,
/// `Θ_lnΘ_un + Θ_ul(Θ_ll + Θ_uu)`, `Θ_lnΘ_ul + Θ_un(Θ_nn + Θ_uu)`.
pub fn algebraic_residuals(theta: &Sym3) -> [f64; 4] {
    let t = theta;
    [
        t.ln * t.ul - t.ll * t.un,
        t.nn * t.ul - t.ln * t.un,
        t.ln * t.un + t.ul * (t.ll + t.uu),
        t.ln * t.ul + t.un * (t.nn + t.uu),
    ]
}

const RELATION_TEXT: [&str; 4] = [
    "Θ_ln Θ_ul = Θ_ll Θ_un",
    "Θ_nn Θ_ul = Θ_ln Θ_un",
    "Θ_ln Θ_un + Θ_ul (Θ_ll + Θ_uu) = 0",
    "Θ_ln Θ_ul + Θ_un (Θ_nn + Θ_uu) = 0",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// One of the four quadratic relations, numbered from 1.
    Relation { index: usize, residual: f64 },
    ForbiddenLambdaDelta { lambda: f64, delta: f64 },
    MuOutOfRange { mu: f64 },
    NoTableRow,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Relation { index, residual } => write!(
                f,
                "relation {index} violated: {} (residual {residual:e})",
                RELATION_TEXT[index - 1]
            ),
            Violation::ForbiddenLambdaDelta { lambda, delta } => write!(
                f,
                "λ = {lambda} and Δ = {delta} are both nonzero"
            ),
            Violation::MuOutOfRange { mu } => write!(f, "μ = {mu} outside 0 < |μ| ≤ 1"),
            Violation::NoTableRow => write!(f, "component pattern matches no admissible row"),
        }
    }
}

/// Admissible component patterns, in first-match order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableRow {
    /// Only `Θ_uu` may be nonzero.
    Abelian,
    /// `λ = 0`, `T = 0`, `θ ≠ 0`.
    E11,
    /// `λ ≠ 0`, `Θ_uu = 0`, `θ = 0`.
    Tau2OffDiagonal,
    /// `λ = 0`, `T ≠ 0`, `Δ = 0`.
    Tau2QuasiDiagonal,
    /// `Θ_ul, Θ_ll ≠ 0`, `Θ_uu = −Θ_ll`, the rest zero.
    Tau2SingleL,
    /// `Θ_un, Θ_nn ≠ 0`, `Θ_uu = −Θ_nn`, the rest zero.
    Tau2SingleN,
    /// `Θ_ulΘ_unΘ_ln ≠ 0`, `Θ_nn = Θ_unΘ_ln/Θ_ul`, `Θ_ll = Θ_ulΘ_ln/Θ_un`, `Θ_uu = −T`.
    Tau2Generic,
    /// `λ = 0`, `T ≠ 0`, `Δ ≠ 0`.
    Tau3Mu,
}

impl TableRow {
    pub const ALL: [TableRow; 8] = [
        TableRow::Abelian,
        TableRow::E11,
        TableRow::Tau2OffDiagonal,
        TableRow::Tau2QuasiDiagonal,
        TableRow::Tau2SingleL,
        TableRow::Tau2SingleN,
        TableRow::Tau2Generic,
        TableRow::Tau3Mu,
    ];

    /// A fixed representative of the row.
    pub fn example(self) -> CauchyPair {
        let th = match self {
            TableRow::Abelian => Sym3::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
            TableRow::E11 => Sym3::new(0.0, 0.0, 0.0, 1.0, 0.0, -1.0),
            TableRow::Tau2OffDiagonal => Sym3::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
            TableRow::Tau2QuasiDiagonal => Sym3::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0),
            TableRow::Tau2SingleL => Sym3::new(-1.0, 1.0, 0.0, 1.0, 0.0, 0.0),
            TableRow::Tau2SingleN => Sym3::new(-1.0, 0.0, 1.0, 0.0, 0.0, 1.0),
            TableRow::Tau2Generic => Sym3::new(-2.0, 1.0, 1.0, 1.0, 1.0, 1.0),
            TableRow::Tau3Mu => Sym3::new(3.0, 0.0, 0.0, 2.0, 0.0, 1.0),
        };
        CauchyPair::from(th)
    }

    pub fn description(self) -> &'static str {
        match self {
            TableRow::Abelian => "R3: Θ = Θ_uu e_u⊗e_u",
            TableRow::E11 => "E(1,1): λ = 0, T = 0, Δ ≠ 0",
            TableRow::Tau2OffDiagonal => "τ2⊕R: Θ = Θ_ul(e_u⊙e_l) + Θ_un(e_u⊙e_n)",
            TableRow::Tau2QuasiDiagonal => "τ2⊕R: λ = 0, T ≠ 0, Δ = 0",
            TableRow::Tau2SingleL => "τ2⊕R: Θ_ul Θ_ll ≠ 0, Θ_uu = −Θ_ll",
            TableRow::Tau2SingleN => "τ2⊕R: Θ_un Θ_nn ≠ 0, Θ_uu = −Θ_nn",
            TableRow::Tau2Generic => "τ2⊕R: Θ_ln Θ_ul Θ_un ≠ 0, Θ_nn = (Θ_un/Θ_ul)Θ_ln",
            TableRow::Tau3Mu => "τ3,μ: λ = 0, T ≠ 0, Δ ≠ 0",
        }
    }

    pub fn group_name(self) -> &'static str {
        match self {
            TableRow::Abelian => "R3",
            TableRow::E11 => "E11",
            TableRow::Tau3Mu => "Tau3Mu",
            _ => "Tau2PlusR",
        }
    }

    fn matches(self, th: &Sym3, inv: &ThetaInvariants, tol: Tolerance) -> bool {
        let s = th.max_abs();
        let z = |x: f64| tol.is_zero(x, s);
        let zq = |x: f64| tol.is_zero(x, s * s);
        let theta2_zero = z(th.ll) && z(th.ln) && z(th.nn);
        let lambda0 = z(inv.lambda);
        match self {
            TableRow::Abelian => lambda0 && theta2_zero,
            TableRow::E11 => lambda0 && z(inv.trace) && !theta2_zero,
            TableRow::Tau2OffDiagonal => !lambda0 && z(th.uu) && theta2_zero,
            TableRow::Tau2QuasiDiagonal => lambda0 && !z(inv.trace) && zq(inv.delta),
            TableRow::Tau2SingleL => {
                z(th.un) && z(th.ln) && z(th.nn) && !z(th.ul) && !z(th.ll) && z(th.uu + th.ll)
            }
            TableRow::Tau2SingleN => {
                z(th.ul) && z(th.ln) && z(th.ll) && !z(th.un) && !z(th.nn) && z(th.uu + th.nn)
            }
            TableRow::Tau2Generic => {
                !z(th.ul)
                    && !z(th.un)
                    && !z(th.ln)
                    && zq(th.nn * th.ul - th.un * th.ln)
                    && zq(th.ll * th.un - th.ul * th.ln)
                    && z(th.uu + inv.trace)
            }
            TableRow::Tau3Mu => lambda0 && !z(inv.trace) && !zq(inv.delta),
        }
    }
}

impl fmt::Display for TableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.description())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub row: TableRow,
    pub residuals: [f64; 4],
}

/// Checks the quadratic relations, the `λΔ = 0` exclusion and row membership.
pub fn validate(pair: &CauchyPair, tol: Tolerance) -> Result<ValidationReport> {
    let th = &pair.theta;
    if !th.is_finite() {
        return Err(FlowError::InvalidInput(
            "shape operator components must be finite".into(),
        ));
    }
    let s = th.max_abs();
    let inv = invariants(pair);
    let residuals = algebraic_residuals(th);

    let mut violations: Vec<Violation> = residuals
        .iter()
        .enumerate()
        .filter(|(_, r)| !tol.is_zero(**r, s * s))
        .map(|(i, r)| Violation::Relation {
            index: i + 1,
            residual: *r,
        })
        .collect();
    if !tol.is_zero(inv.lambda, s) && !tol.is_zero(inv.delta, s * s) {
        violations.push(Violation::ForbiddenLambdaDelta {
            lambda: inv.lambda,
            delta: inv.delta,
        });
    }
    if !violations.is_empty() {
        return Err(FlowError::InvalidPair(violations));
    }

    match TableRow::ALL.iter().find(|r| r.matches(th, &inv, tol)) {
        Some(&row) => Ok(ValidationReport { row, residuals }),
        None => Err(FlowError::InvalidPair(vec![Violation::NoTableRow])),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "tag")]
pub enum GroupType {
    R3,
    E11,
    Tau2PlusR,
    Tau3Mu { mu: f64 },
}

impl GroupType {
    pub fn name(&self) -> &'static str {
        match self {
            GroupType::R3 => "R3",
            GroupType::E11 => "E11",
            GroupType::Tau2PlusR => "Tau2PlusR",
            GroupType::Tau3Mu { .. } => "Tau3Mu",
        }
    }

    pub fn mu(&self) -> Option<f64> {
        match self {
            GroupType::Tau3Mu { mu } => Some(*mu),
            _ => None,
        }
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupType::Tau3Mu { mu } => write!(f, "Tau3Mu(mu={mu})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Isomorphism type of the group from `(T, Δ, λ)`.
///
/// Assumes the pair satisfies the quadratic relations; only the forbidden
/// `λ ≠ 0, Δ ≠ 0` combination is rejected here.
pub fn classify(pair: &CauchyPair, tol: Tolerance) -> Result<GroupType> {
    let th = &pair.theta;
    let s = th.max_abs();
    let inv = invariants(pair);
    let lambda0 = tol.is_zero(inv.lambda, s);
    let t0 = tol.is_zero(inv.trace, s);
    let d0 = tol.is_zero(inv.delta, s * s);

    if !lambda0 && !d0 {
        return Err(FlowError::InvalidPair(vec![Violation::ForbiddenLambdaDelta {
            lambda: inv.lambda,
            delta: inv.delta,
        }]));
    }
    if d0 {
        return Ok(if lambda0 && t0 {
            GroupType::R3
        } else {
            GroupType::Tau2PlusR
        });
    }
    if t0 {
        return Ok(GroupType::E11);
    }

    let mu = if tol.is_zero(th.ln, s) {
        if th.ll.abs() >= th.nn.abs() {
            th.nn / th.ll
        } else {
            th.ll / th.nn
        }
    } else {
        let t = inv.trace;
        let disc = (t * t - 4.0 * inv.delta).max(0.0).sqrt();
        let sg = t.signum();
        (t - sg * disc) / (t + sg * disc)
    };
    if !(mu != 0.0 && mu.abs() <= 1.0 + tol.value()) {
        return Err(FlowError::InvalidPair(vec![Violation::MuOutOfRange { mu }]));
    }
    Ok(GroupType::Tau3Mu {
        mu: mu.clamp(-1.0, 1.0),
    })
}

/// Vacuum constraint data of a slice with constant frame components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SliceCurvature {
    pub ricci: Sym3,
    pub scalar_curvature: f64,
    /// `R − |Θ|² + (tr Θ)²`.
    pub hamiltonian: f64,
    /// `div Θ − d tr Θ`; the second term vanishes for constant components.
    pub momentum: [f64; 3],
}

/// Curvature and constraint residuals of the metric making the frame with
/// constants `c` orthonormal, with shape operator `theta` in that frame.
pub fn slice_curvature(c: &StructureConstants, theta: &Sym3) -> SliceCurvature {
    let (ricci, scalar) = ricci3(c);
    let tr = theta.trace();
    SliceCurvature {
        ricci,
        scalar_curvature: scalar,
        hamiltonian: scalar - theta.norm_sq() + tr * tr,
        momentum: divergence_sym(c, theta),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub hamiltonian: f64,
    pub momentum_residual: [f64; 3],
    pub scalar_curvature: f64,
    pub is_vacuum_admissible: bool,
}

pub fn norm3(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Hamiltonian and momentum constraints of a valid pair. Admissibility uses
/// `tol` as an absolute bound on `|𝓗₀|` and on the momentum norm.
pub fn constraints(pair: &CauchyPair, tol: Tolerance) -> Result<ConstraintReport> {
    validate(pair, tol)?;
    let sc = slice_curvature(&pair.structure_constants(), &pair.theta);
    Ok(ConstraintReport {
        hamiltonian: sc.hamiltonian,
        momentum_residual: sc.momentum,
        scalar_curvature: sc.scalar_curvature,
        is_vacuum_admissible: sc.hamiltonian.abs() <= tol.value()
            && norm3(&sc.momentum) <= tol.value(),
    })
}

pub fn is_constrained_ricci_flat(pair: &CauchyPair, tol: Tolerance) -> Result<bool> {
    Ok(constraints(pair, tol)?.is_vacuum_admissible)
}
