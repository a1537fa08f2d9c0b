//! Frame-indexed dense tensors on three- and four-dimensional orthonormal
//! frames.
//!
//! Spatial frame labels are the closed set `{u, l, n}`, mapped onto array
//! positions [`U`], [`L`], [`N`]. Lorentzian frames use `0..4` with `0`
//! timelike. Everything is stored in fixed-size arrays.

mod eigen;
mod lie;

use serde::{Deserialize, Serialize};

pub use eigen::{eigen2x2, sym2_function, EigenData2};
pub use lie::{
    divergence_sym, frame_connection, frame_ricci, levi_civita, ricci3, structure_constants,
    ConnectionCoefficients, StructureConstants, Tensor3,
};

/// Array position of the `u` label.
pub const U: usize = 0;
/// Array position of the `l` label.
pub const L: usize = 1;
/// Array position of the `n` label.
pub const N: usize = 2;

/// Label names in storage order.
pub const LABELS: [&str; 3] = ["u", "l", "n"];

pub type Mat3 = [[f64; 3]; 3];

pub fn identity3() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

pub fn matmul3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose3(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn det3(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inverse by cofactors; `None` when the determinant vanishes.
pub fn inverse3(a: &Mat3) -> Option<Mat3> {
    let det = det3(a);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = minor_index(j);
            let (c0, c1) = minor_index(i);
            let cof = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            out[i][j] = sign * cof / det;
        }
    }
    Some(out)
}

fn minor_index(skip: usize) -> (usize, usize) {
    match skip {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Max-norm of the difference of two matrices.
pub fn max_abs_diff3(a: &Mat3, b: &Mat3) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

/// Swap of the `l` and `n` labels, `P = Pᵀ = P⁻¹`.
pub(crate) fn swap_ln(a: &Mat3) -> Mat3 {
    let p = [0usize, 2, 1];
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[p[i]][p[j]];
        }
    }
    out
}

/// Symmetric two-tensor in a spatial frame, stored as its upper triangle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sym3 {
    pub uu: f64,
    pub ul: f64,
    pub un: f64,
    pub ll: f64,
    pub ln: f64,
    pub nn: f64,
}

impl Sym3 {
    pub const ZERO: Sym3 = Sym3 {
        uu: 0.0,
        ul: 0.0,
        un: 0.0,
        ll: 0.0,
        ln: 0.0,
        nn: 0.0,
    };

    pub fn new(uu: f64, ul: f64, un: f64, ll: f64, ln: f64, nn: f64) -> Self {
        Sym3 {
            uu,
            ul,
            un,
            ll,
            ln,
            nn,
        }
    }

    pub fn identity() -> Self {
        Sym3::new(1.0, 0.0, 0.0, 1.0, 0.0, 1.0)
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        match (a.min(b), a.max(b)) {
            (U, U) => self.uu,
            (U, L) => self.ul,
            (U, N) => self.un,
            (L, L) => self.ll,
            (L, N) => self.ln,
            (N, N) => self.nn,
            _ => panic!("frame label out of range: ({a}, {b})"),
        }
    }

    pub fn to_matrix(&self) -> Mat3 {
        [
            [self.uu, self.ul, self.un],
            [self.ul, self.ll, self.ln],
            [self.un, self.ln, self.nn],
        ]
    }

    /// Symmetric part of `m`.
    pub fn from_matrix(m: &Mat3) -> Self {
        let s = |a: usize, b: usize| 0.5 * (m[a][b] + m[b][a]);
        Sym3::new(s(U, U), s(U, L), s(U, N), s(L, L), s(L, N), s(N, N))
    }

    /// Components in the order `uu, ul, un, ll, ln, nn`.
    pub fn components(&self) -> [f64; 6] {
        [self.uu, self.ul, self.un, self.ll, self.ln, self.nn]
    }

    pub fn from_components(c: [f64; 6]) -> Self {
        Sym3::new(c[0], c[1], c[2], c[3], c[4], c[5])
    }

    pub fn trace(&self) -> f64 {
        self.uu + self.ll + self.nn
    }

    /// `|S|²` for the identity frame metric.
    pub fn norm_sq(&self) -> f64 {
        self.uu * self.uu
            + self.ll * self.ll
            + self.nn * self.nn
            + 2.0 * (self.ul * self.ul + self.un * self.un + self.ln * self.ln)
    }

    pub fn max_abs(&self) -> f64 {
        self.components()
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|x| x.is_finite())
    }

    pub fn scale(&self, k: f64) -> Self {
        Sym3::from_components(self.components().map(|x| k * x))
    }

    pub fn add(&self, other: &Sym3) -> Self {
        let a = self.components();
        let b = other.components();
        Sym3::from_components(std::array::from_fn(|i| a[i] + b[i]))
    }

    pub fn sub(&self, other: &Sym3) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `S ∘ S` as a matrix product.
    pub fn square(&self) -> Sym3 {
        let m = self.to_matrix();
        Sym3::from_matrix(&matmul3(&m, &m))
    }

    /// `l ↔ n` relabelling.
    pub fn swap_ln(&self) -> Sym3 {
        Sym3::new(self.uu, self.un, self.ul, self.nn, self.ln, self.ll)
    }

    /// Components `Aᵀ S A`, i.e. the same tensor expressed in the coframe
    /// `e` when `S` is given in `e' = A e`.
    pub fn pull_back(&self, a: &Mat3) -> Sym3 {
        let m = matmul3(&transpose3(a), &matmul3(&self.to_matrix(), a));
        Sym3::from_matrix(&m)
    }

    pub fn max_abs_diff(&self, other: &Sym3) -> f64 {
        self.sub(other).max_abs()
    }
}
