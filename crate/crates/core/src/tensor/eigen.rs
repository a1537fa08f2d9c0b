use serde::Serialize;

/// Orthogonal diagonalization `θ = Q diag(ρ₊, ρ₋) Qᵀ` of a symmetric 2×2
/// matrix, with `ρ₊ ≥ ρ₋` and `det Q = +1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenData2 {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub q: [[f64; 2]; 2],
}

impl EigenData2 {
    pub fn reconstruct(&self) -> [[f64; 2]; 2] {
        sym2_from_eigen(self, self.rho_plus, self.rho_minus)
    }
}

/// Diagonalizes the symmetric matrix `theta` (only the upper triangle is read).
///
/// Ties and already-diagonal inputs with `θ₁₁ ≥ θ₂₂` give `Q = Id`. Otherwise
/// the first column of `Q` is the `ρ₊` eigenvector with its first nonzero
/// entry positive.
pub fn eigen2x2(theta: [[f64; 2]; 2]) -> EigenData2 {
    let a = theta[0][0];
    let b = theta[0][1];
    let c = theta[1][1];

    if b == 0.0 {
        return if a >= c {
            EigenData2 {
                rho_plus: a,
                rho_minus: c,
                q: [[1.0, 0.0], [0.0, 1.0]],
            }
        } else {
            EigenData2 {
                rho_plus: c,
                rho_minus: a,
                q: [[0.0, -1.0], [1.0, 0.0]],
            }
        };
    }

    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    let rho_plus = mean + radius;
    let rho_minus = mean - radius;

    // pick the better conditioned of the two eigenvector formulas
    let (mut v0, mut v1) = if a >= c {
        (rho_plus - c, b)
    } else {
        (b, rho_plus - a)
    };
    let norm = v0.hypot(v1);
    v0 /= norm;
    v1 /= norm;
    if v0 < 0.0 || (v0 == 0.0 && v1 < 0.0) {
        v0 = -v0;
        v1 = -v1;
    }

    EigenData2 {
        rho_plus,
        rho_minus,
        q: [[v0, -v1], [v1, v0]],
    }
}

/// `Q diag(p, m) Qᵀ`.
fn sym2_from_eigen(e: &EigenData2, p: f64, m: f64) -> [[f64; 2]; 2] {
    let q = &e.q;
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = q[i][0] * p * q[j][0] + q[i][1] * m * q[j][1];
        }
    }
    out
}

/// Spectral function `Q diag(f(ρ₊), f(ρ₋)) Qᵀ` of a diagonalized matrix.
pub fn sym2_function(e: &EigenData2, f: impl Fn(f64) -> f64) -> [[f64; 2]; 2] {
    sym2_from_eigen(e, f(e.rho_plus), f(e.rho_minus))
}
