use super::{inverse3, matmul3, transpose3, Mat3, Sym3, L, N, U};

/// Rank-3 array over a `D`-dimensional frame.
pub type Tensor3<const D: usize> = [[[f64; D]; D]; D];

fn zero3<const D: usize>() -> Tensor3<D> {
    [[[0.0; D]; D]; D]
}

/// Structure constants `c[a][b][c] = c^a_{bc}` of a left-invariant frame,
/// `[x_b, x_c] = c^a_{bc} x_a`, equivalently `de_a(x_b, x_c) = −c^a_{bc}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureConstants {
    pub c: Tensor3<3>,
}

impl StructureConstants {
    pub fn zero() -> Self {
        StructureConstants { c: zero3() }
    }

    /// Constants from the exterior derivatives of the coframe, each given as
    /// the antisymmetric matrix `F^a_{bc} = de_a(x_b, x_c)`.
    pub fn from_differentials(forms: &[Mat3; 3]) -> Self {
        let mut c = zero3();
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    c[a][b][d] = -forms[a][b][d];
                }
            }
        }
        StructureConstants { c }
    }

    /// `F^a_{bc} = de_a(x_b, x_c)`.
    pub fn differentials(&self) -> [Mat3; 3] {
        let mut f = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    f[a][b][d] = -self.c[a][b][d];
                }
            }
        }
        f
    }

    /// Constants of the coframe `e' = A e` (constant `A`), in the frame dual
    /// to `e'`. `None` when `A` is singular.
    pub fn push_forward(&self, a: &Mat3) -> Option<Self> {
        let v = inverse3(a)?;
        let vt = transpose3(&v);
        let old = self.differentials();
        let mut forms = [[[0.0; 3]; 3]; 3];
        for (i, form) in forms.iter_mut().enumerate() {
            let mut acc = [[0.0; 3]; 3];
            for (b, ob) in old.iter().enumerate() {
                let k = a[i][b];
                if k == 0.0 {
                    continue;
                }
                for p in 0..3 {
                    for q in 0..3 {
                        acc[p][q] += k * ob[p][q];
                    }
                }
            }
            *form = matmul3(&vt, &matmul3(&acc, &v));
        }
        Some(StructureConstants::from_differentials(&forms))
    }

    /// Max-norm of `c^a_{bc} + c^a_{cb}`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    m = m.max((self.c[a][b][d] + self.c[a][d][b]).abs());
                }
            }
        }
        m
    }

    /// Max-norm of the cyclic Jacobi sum over all frame triples.
    pub fn jacobi_residual(&self) -> f64 {
        let c = &self.c;
        let mut m: f64 = 0.0;
        for x in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    for out in 0..3 {
                        let mut s = 0.0;
                        for d in 0..3 {
                            s += c[d][y][z] * c[out][x][d]
                                + c[d][z][x] * c[out][y][d]
                                + c[d][x][y] * c[out][z][d];
                        }
                        m = m.max(s.abs());
                    }
                }
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &StructureConstants) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    m = m.max((self.c[a][b][d] - other.c[a][b][d]).abs());
                }
            }
        }
        m
    }
}

/// Constants of a coframe obeying `de_a = Σ_b Θ_ab e_b ∧ e_u`.
///
/// Only `Θ_ab` with `b ∈ {l, n}` enter; the brackets are
/// `[x_u, x_b] = Σ_a Θ_ab x_a` and `[x_l, x_n] = 0`.
pub fn structure_constants(theta: &Sym3) -> StructureConstants {
    let mut c = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in [L, N] {
            let k = theta.get(a, b);
            c[a][U][b] = k;
            c[a][b][U] = -k;
        }
    }
    StructureConstants { c }
}

/// Levi-Civita connection of an orthonormal left-invariant frame:
/// `w[a][b][c] = h(∇_{x_a} x_b, x_c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionCoefficients {
    pub w: Tensor3<3>,
}

impl ConnectionCoefficients {
    /// Constants reconstructed from torsion-freeness,
    /// `c^c_{ab} = w_{abc} − w_{bac}`.
    pub fn torsion_constants(&self) -> StructureConstants {
        let mut c = zero3();
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    c[d][a][b] = self.w[a][b][d] - self.w[b][a][d];
                }
            }
        }
        StructureConstants { c }
    }

    /// Max-norm of `w_{abc} + w_{acb}`.
    pub fn metric_residual(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    m = m.max((self.w[a][b][d] + self.w[a][d][b]).abs());
                }
            }
        }
        m
    }
}

pub fn levi_civita(c: &StructureConstants) -> ConnectionCoefficients {
    ConnectionCoefficients {
        w: frame_connection(&c.c, &[1.0; 3]),
    }
}

/// Koszul formula in an orthonormal frame of signature `eta`:
/// `Γ_{abc} = g(∇_a E_b, E_c) = ½(C_{abc} − C_{bca} + C_{cab})` with
/// `C_{abc} = η_c c^c_{ab}`. Valid for non-constant structure functions too,
/// since the frame metric is constant.
pub fn frame_connection<const D: usize>(c: &Tensor3<D>, eta: &[f64; D]) -> Tensor3<D> {
    let lower = |a: usize, b: usize, d: usize| eta[d] * c[d][a][b];
    let mut g = zero3();
    for a in 0..D {
        for b in 0..D {
            for d in 0..D {
                g[a][b][d] = 0.5 * (lower(a, b, d) - lower(b, d, a) + lower(d, a, b));
            }
        }
    }
    g
}

/// Ricci tensor `Ric_{bc} = Σ_a R_{abc}{}^a` of an orthonormal frame with
/// structure functions `c`, connection `gamma` and frame derivatives
/// `dgamma[k] = E_k(Γ)`.
pub fn frame_ricci<const D: usize>(
    c: &Tensor3<D>,
    gamma: &Tensor3<D>,
    dgamma: &[Tensor3<D>; D],
    eta: &[f64; D],
) -> [[f64; D]; D] {
    // Γ_{ab}^f = η_f Γ_{abf}
    let up = |x: usize, y: usize, f: usize| eta[f] * gamma[x][y][f];
    let dup = |k: usize, x: usize, y: usize, f: usize| eta[f] * dgamma[k][x][y][f];

    let mut ric = [[0.0; D]; D];
    for b in 0..D {
        for cc in 0..D {
            let mut s = 0.0;
            for a in 0..D {
                // R_{a b cc}^a
                let f = a;
                let mut r = dup(a, b, cc, f) - dup(b, a, cc, f);
                for d in 0..D {
                    r += up(b, cc, d) * up(a, d, f) - up(a, cc, d) * up(b, d, f)
                        - c[d][a][b] * up(d, cc, f);
                }
                s += r;
            }
            ric[b][cc] = s;
        }
    }
    ric
}

/// Ricci tensor and scalar curvature of the left-invariant metric for which
/// the frame is orthonormal.
pub fn ricci3(c: &StructureConstants) -> (Sym3, f64) {
    let eta = [1.0; 3];
    let gamma = frame_connection(&c.c, &eta);
    let ric = frame_ricci(&c.c, &gamma, &[zero3(); 3], &eta);
    let ric = Sym3::from_matrix(&ric);
    let scalar = ric.trace();
    (ric, scalar)
}

/// Frame components of `div S` for a tensor with constant frame components:
/// `(div S)_c = −Σ Γ_{aad} S_{dc} − Σ Γ_{acd} S_{ad}`.
pub fn divergence_sym(c: &StructureConstants, s: &Sym3) -> [f64; 3] {
    let w = levi_civita(c).w;
    let mut out = [0.0; 3];
    for (cc, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for a in 0..3 {
            for d in 0..3 {
                acc -= w[a][a][d] * s.get(d, cc) + w[a][cc][d] * s.get(a, d);
            }
        }
        *slot = acc;
    }
    out
}
