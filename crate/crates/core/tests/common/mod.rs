//! Oracles built on nalgebra, sharing no code with the crate's frame calculus.

#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3, Vector4};
use proptest::prelude::*;
use spinorflow::{CauchyPair, Sym3, TableRow};

pub fn pair(uu: f64, ul: f64, un: f64, ll: f64, ln: f64, nn: f64) -> CauchyPair {
    CauchyPair::from(Sym3::new(uu, ul, un, ll, ln, nn))
}

pub fn sym_matrix(s: &Sym3) -> Matrix3<f64> {
    Matrix3::new(s.uu, s.ul, s.un, s.ul, s.ll, s.ln, s.un, s.ln, s.nn)
}

pub fn mat(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

/// `brackets[i][j]` holds the components of `[x_i, x_j]`.
pub fn brackets(theta: &Sym3) -> [[Vector3<f64>; 3]; 3] {
    let th = sym_matrix(theta);
    let mut b = [[Vector3::zeros(); 3]; 3];
    for j in 1..3 {
        let v = th.column(j).into_owned();
        b[0][j] = v;
        b[j][0] = -v;
    }
    b
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Algebra {
    Abelian,
    /// Derived algebra of dimension one.
    Tau2,
    /// Derived algebra of dimension two; `ad` eigenvalues sum to zero.
    E11,
    Tau3 { mu: f64 },
    Other,
}

/// Classification from the bracket table alone.
pub fn classify_algebra(theta: &Sym3) -> Algebra {
    let b = brackets(theta);
    let gens = Matrix3::from_columns(&[b[0][1], b[0][2], b[1][2]]);
    let svd = gens.svd(true, false);
    let scale = svd.singular_values.max().max(1e-300);
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-9 * scale).count();
    match rank {
        0 => Algebra::Abelian,
        1 => {
            // not Heisenberg: the derived line must not be central
            let d = svd.u.unwrap().column(0).into_owned();
            let central = (0..3).all(|i| ad(&b, &d, i).norm() < 1e-9 * scale);
            if central {
                Algebra::Other
            } else {
                Algebra::Tau2
            }
        }
        2 => {
            let u = svd.u.unwrap();
            let d1 = u.column(0).into_owned();
            let d2 = u.column(1).into_owned();
            let x = d1.cross(&d2);
            // ad_x on the derived plane, in the basis (d1, d2)
            let img1 = ad_vec(&b, &x, &d1);
            let img2 = ad_vec(&b, &x, &d2);
            let m = Matrix2::new(img1.dot(&d1), img2.dot(&d1), img1.dot(&d2), img2.dot(&d2));
            let tr = m.trace();
            let det = m.determinant();
            let disc = tr * tr - 4.0 * det;
            if disc < -1e-9 * scale * scale {
                return Algebra::Other;
            }
            let r = disc.max(0.0).sqrt();
            let (e1, e2) = (0.5 * (tr + r), 0.5 * (tr - r));
            if tr.abs() < 1e-9 * scale {
                Algebra::E11
            } else {
                let (big, small) = if e1.abs() >= e2.abs() { (e1, e2) } else { (e2, e1) };
                Algebra::Tau3 { mu: small / big }
            }
        }
        _ => Algebra::Other,
    }
}

fn ad(b: &[[Vector3<f64>; 3]; 3], x: &Vector3<f64>, i: usize) -> Vector3<f64> {
    (0..3).map(|j| b[j][i] * x[j]).sum()
}

fn ad_vec(b: &[[Vector3<f64>; 3]; 3], x: &Vector3<f64>, y: &Vector3<f64>) -> Vector3<f64> {
    let mut out = Vector3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            out += b[i][j] * x[i] * y[j];
        }
    }
    out
}

/// Levi-Civita symbols `Γ^m_ij` of a left-invariant metric `g` in a
/// left-invariant basis with the given brackets.
pub fn christoffel(b: &[[Vector3<f64>; 3]; 3], g: &Matrix3<f64>) -> [[Vector3<f64>; 3]; 3] {
    let gi = g.try_inverse().expect("metric is invertible");
    let gb = |i: usize, j: usize, k: usize| (g * b[i][j])[k];
    let mut out = [[Vector3::zeros(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let lower =
                Vector3::from_fn(|k, _| 0.5 * (gb(i, j, k) - gb(j, k, i) + gb(k, i, j)));
            out[i][j] = gi * lower;
        }
    }
    out
}

type Brackets = [[Vector3<f64>; 3]; 3];

fn ricci_in_basis(b: &Brackets, g: &Matrix3<f64>) -> Matrix3<f64> {
    let gam = christoffel(b, g);
    let mut ric = Matrix3::zeros();
    for j in 0..3 {
        for k in 0..3 {
            let mut s = 0.0;
            for i in 0..3 {
                for m in 0..3 {
                    s += gam[j][k][m] * gam[i][m][i] - gam[i][k][m] * gam[j][m][i]
                        - b[i][j][m] * gam[m][k][i];
                }
            }
            ric[(j, k)] = s;
        }
    }
    ric
}

/// Brackets in the basis `f_i = Σ_j m[(j, i)] e_j`.
fn change_basis(b: &Brackets, m: &Matrix3<f64>) -> Brackets {
    let mi = m.try_inverse().unwrap();
    let mut out = [[Vector3::zeros(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut v = Vector3::zeros();
            for a in 0..3 {
                for c in 0..3 {
                    v += b[a][c] * (m[(a, i)] * m[(c, j)]);
                }
            }
            out[i][j] = mi * v;
        }
    }
    out
}

/// A `g`-orthonormal basis from the Cholesky factor, so that nothing is
/// summed against an ill-conditioned metric.
fn cholesky_basis(g: &Matrix3<f64>) -> Matrix3<f64> {
    let l = g.cholesky().expect("metric is positive definite").l();
    l.transpose().try_inverse().unwrap()
}

/// Ricci tensor and scalar curvature in the reference basis.
pub fn ricci_reference(theta0: &Sym3, g: &Matrix3<f64>) -> (Matrix3<f64>, f64) {
    let m = cholesky_basis(g);
    let ric_f = ricci_in_basis(&change_basis(&brackets(theta0), &m), &Matrix3::identity());
    let mi = m.try_inverse().unwrap();
    (mi.transpose() * ric_f * mi, ric_f.trace())
}

/// `R − |Θ|² + (tr Θ)²` and `div Θ − d tr Θ`, both computed in an orthonormal
/// basis; the momentum is returned in reference components.
pub fn constraints_reference(
    theta0: &Sym3,
    g: &Matrix3<f64>,
    theta_ref: &Matrix3<f64>,
) -> (f64, Vector3<f64>) {
    let m = cholesky_basis(g);
    let b = change_basis(&brackets(theta0), &m);
    let th = m.transpose() * theta_ref * m;
    let r = ricci_in_basis(&b, &Matrix3::identity()).trace();
    let ham = r - (th * th).trace() + th.trace().powi(2);
    let gam = christoffel(&b, &Matrix3::identity());
    let mom_f = Vector3::from_fn(|k, _| {
        (0..3)
            .map(|i| {
                (0..3)
                    .map(|mm| -gam[i][i][mm] * th[(mm, k)] - gam[i][k][mm] * th[(i, mm)])
                    .sum::<f64>()
            })
            .sum()
    });
    let mi = m.try_inverse().unwrap();
    (ham, mi.transpose() * mom_f)
}

/// `max |∇η|` for a left-invariant one-form with reference components `eta`.
pub fn covariant_derivative_max(theta0: &Sym3, g: &Matrix3<f64>, eta: &Vector3<f64>) -> f64 {
    let m = cholesky_basis(g);
    let gam = christoffel(&change_basis(&brackets(theta0), &m), &Matrix3::identity());
    let e = m.transpose() * eta;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for k in 0..3 {
            let v: f64 = (0..3).map(|mm| -gam[i][k][mm] * e[mm]).sum();
            worst = worst.max(v.abs());
        }
    }
    worst
}

/// Matrix exponential by a truncated Taylor series with scaling and squaring.
pub fn expm(m: &Matrix2<f64>) -> Matrix2<f64> {
    let norm = m.abs().max();
    let mut k = 0;
    while norm / f64::from(1u32 << k) > 0.25 {
        k += 1;
    }
    let a = m / f64::from(1u32 << k);
    let mut term = Matrix2::identity();
    let mut sum = Matrix2::identity();
    for n in 1..30 {
        term = term * a / n as f64;
        sum += term;
    }
    for _ in 0..k {
        sum = sum * sum;
    }
    sum
}

/// Ricci tensor, in the orthonormal frame `(dz, exp(−zθ)dX)`, of
/// `dz² + dXᵀ exp(−2zθ) dX` at height `z`, from coordinate Christoffel symbols.
pub fn coordinate_ricci(theta2: &Matrix2<f64>, z: f64) -> Matrix3<f64> {
    let e = expm(&(theta2 * (-2.0 * z)));
    let embed = |m: Matrix2<f64>, top: f64| {
        let mut out = Matrix3::zeros();
        out[(0, 0)] = top;
        out.fixed_view_mut::<2, 2>(1, 1).copy_from(&m);
        out
    };
    let g = embed(e, 1.0);
    let dg = embed(theta2 * e * -2.0, 0.0);
    let ddg = embed(theta2 * theta2 * e * 4.0, 0.0);
    let gi = g.try_inverse().unwrap();
    let dgi = -gi * dg * gi;
    // only ∂_z acts; index 0 is z
    let d = |i: usize| if i == 0 { 1.0 } else { 0.0 };
    let gamma_with = |gi: &Matrix3<f64>, dg: &Matrix3<f64>, k: usize, i: usize, j: usize| {
        (0..3)
            .map(|l| 0.5 * gi[(k, l)] * (d(i) * dg[(j, l)] + d(j) * dg[(i, l)] - d(l) * dg[(i, j)]))
            .sum::<f64>()
    };
    let gam = |k, i, j| gamma_with(&gi, &dg, k, i, j);
    let dgam = |k, i, j| gamma_with(&dgi, &dg, k, i, j) + gamma_with(&gi, &ddg, k, i, j);
    let mut ric = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += d(k) * dgam(k, i, j) - d(j) * dgam(k, i, k);
                for l in 0..3 {
                    s += gam(k, k, l) * gam(l, i, j) - gam(k, j, l) * gam(l, i, k);
                }
            }
            ric[(i, j)] = s;
        }
    }
    let p = embed(expm(&(theta2 * -z)), 1.0);
    let pi = p.try_inverse().unwrap();
    pi.transpose() * ric * pi
}

/// Five-point derivative of a matrix-valued map.
pub fn fd<const R: usize, const C: usize, F>(
    f: F,
    t: f64,
    h: f64,
) -> nalgebra::SMatrix<f64, R, C>
where
    F: Fn(f64) -> nalgebra::SMatrix<f64, R, C>,
{
    (-f(t + 2.0 * h) + f(t + h) * 8.0 - f(t - h) * 8.0 + f(t - 2.0 * h)) / (12.0 * h)
}

/// Ricci tensor of `−β² dt² + h(t)` on `ℝ × G` in the basis `(∂_t, x_i)`,
/// with time derivatives by finite differences.
pub fn ricci4_coordinate<H>(theta0: &Sym3, beta: f64, h: H, t: f64) -> Matrix4<f64>
where
    H: Fn(f64) -> Matrix3<f64>,
{
    let b3 = brackets(theta0);
    let bracket = |a: usize, b: usize| -> Vector4<f64> {
        if a == 0 || b == 0 {
            Vector4::zeros()
        } else {
            let v = b3[a - 1][b - 1];
            Vector4::new(0.0, v[0], v[1], v[2])
        }
    };
    let metric = |s: f64| {
        let mut g = Matrix4::zeros();
        g[(0, 0)] = -beta * beta;
        g.fixed_view_mut::<3, 3>(1, 1).copy_from(&h(s));
        g
    };
    let gamma = |s: f64| -> [[Vector4<f64>; 4]; 4] {
        let g = metric(s);
        let dg = fd(metric, s, 1e-4);
        let gi = g.try_inverse().unwrap();
        let gb = |a: usize, b: usize, c: usize| (g * bracket(a, b))[c];
        let d = |a: usize| if a == 0 { 1.0 } else { 0.0 };
        let mut out = [[Vector4::zeros(); 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                let lower = Vector4::from_fn(|c, _| {
                    0.5 * (d(a) * dg[(b, c)] + d(b) * dg[(a, c)] - d(c) * dg[(a, b)]
                        + gb(a, b, c)
                        - gb(b, c, a)
                        + gb(c, a, b))
                });
                out[a][b] = gi * lower;
            }
        }
        out
    };
    let flat = |s: f64| {
        let g = gamma(s);
        nalgebra::SMatrix::<f64, 64, 1>::from_fn(|i, _| g[i / 16][(i / 4) % 4][i % 4])
    };
    let dflat = fd(flat, t, 1e-3);
    let dgam = |a: usize, b: usize, c: usize| dflat[16 * a + 4 * b + c];
    let gam = gamma(t);
    let mut ric = Matrix4::zeros();
    for b in 0..4 {
        for c in 0..4 {
            let mut s = dgam(b, c, 0);
            if b == 0 {
                s -= (0..4).map(|a| dgam(a, c, a)).sum::<f64>();
            }
            for a in 0..4 {
                for dd in 0..4 {
                    s += gam[b][c][dd] * gam[a][dd][a] - gam[a][c][dd] * gam[b][dd][a]
                        - bracket(a, b)[dd] * gam[dd][c][a];
                }
            }
            ric[(b, c)] = s;
        }
    }
    ric
}

fn nonzero(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi, any::<bool>()).prop_map(|(x, s)| if s { x } else { -x })
}

/// Valid pairs of the given row, with entries of moderate size.
pub fn row_strategy(row: TableRow) -> BoxedStrategy<CauchyPair> {
    let free = -2.0..2.0f64;
    match row {
        TableRow::Abelian => free.prop_map(|a| pair(a, 0.0, 0.0, 0.0, 0.0, 0.0)).boxed(),
        TableRow::E11 => (free.clone(), nonzero(0.2, 2.0), -2.0..2.0f64)
            .prop_map(|(uu, ll, ln)| pair(uu, 0.0, 0.0, ll, ln, -ll))
            .boxed(),
        TableRow::Tau2OffDiagonal => (nonzero(0.2, 2.0), -2.0..2.0f64)
            .prop_map(|(ul, un)| pair(0.0, ul, un, 0.0, 0.0, 0.0))
            .boxed(),
        TableRow::Tau2QuasiDiagonal => (free.clone(), nonzero(0.2, 2.0), 0.0..std::f64::consts::TAU)
            .prop_map(|(uu, k, phi)| {
                // rank-one θ = k v vᵀ
                let (s, c) = phi.sin_cos();
                pair(uu, 0.0, 0.0, k * c * c, k * c * s, k * s * s)
            })
            .boxed(),
        TableRow::Tau2SingleL => (nonzero(0.2, 2.0), nonzero(0.2, 2.0))
            .prop_map(|(ul, ll)| pair(-ll, ul, 0.0, ll, 0.0, 0.0))
            .boxed(),
        TableRow::Tau2SingleN => (nonzero(0.2, 2.0), nonzero(0.2, 2.0))
            .prop_map(|(un, nn)| pair(-nn, 0.0, un, 0.0, 0.0, nn))
            .boxed(),
        TableRow::Tau2Generic => (nonzero(0.3, 2.0), nonzero(0.3, 2.0), nonzero(0.3, 2.0))
            .prop_map(|(ul, un, ln)| {
                let ll = ul * ln / un;
                let nn = un * ln / ul;
                pair(-(ll + nn), ul, un, ll, ln, nn)
            })
            .boxed(),
        TableRow::Tau3Mu => (free, nonzero(0.3, 2.0), -1.0..1.0f64, 0.0..std::f64::consts::TAU)
            .prop_filter("μ away from 0", |(_, _, mu, _)| mu.abs() > 0.1)
            .prop_map(|(uu, k, mu, phi)| {
                // eigenvalues k and μk along a rotated basis
                let (s, c) = phi.sin_cos();
                let (a, b) = (k, mu * k);
                pair(uu, 0.0, 0.0, a * c * c + b * s * s, (a - b) * c * s, a * s * s + b * c * c)
            })
            .boxed(),
    }
}

pub fn any_valid_pair() -> BoxedStrategy<(TableRow, CauchyPair)> {
    let rows: Vec<_> = TableRow::ALL
        .iter()
        .map(|&r| row_strategy(r).prop_map(move |p| (r, p)).boxed())
        .collect();
    proptest::strategy::Union::new(rows).boxed()
}

/// The constrained-Ricci-flat choice of `Θ_uu` for a diagonal-block pair.
pub fn flat_uu(ll: f64, ln: f64, nn: f64) -> f64 {
    let t = ll + nn;
    let d = ll * nn - ln * ln;
    if t == 0.0 {
        0.0
    } else {
        (t * t - 2.0 * d) / t
    }
}
