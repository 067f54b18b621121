//! Pointwise Bakry-Émery curvature as a local generalized eigenproblem.
//!
//! At a vertex `x` both `Gamma(f,f)(x)` and `Gamma2(f,f)(x)` only see `f` on
//! the forward 2-ball of `x`, so they are quadratic forms `f'Bf` and `f'Af`
//! in at most `|B_2(x)|` variables. The curvature at `x` is the infimum of
//! `f'Af / f'Bf` over `f'Bf > 0`. Directions in the kernel of `B` are
//! eliminated through a Schur complement; if they make `A` unbounded below
//! the curvature is `-inf`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::chain::StochasticMatrix;
use crate::error::{Error, Result};

/// Local quadratic forms at one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalForms {
    /// States of the 2-ball, the centre first.
    pub ball: Vec<usize>,
    /// `Gamma2(f,f)(x) = f'Af`.
    pub a: DMatrix<f64>,
    /// `Gamma(f,f)(x) = f'Bf`.
    pub b: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCurvature {
    pub state: usize,
    pub kappa: f64,
    /// A full-length observable attaining `kappa`, zero off the 2-ball.
    /// Absent when `kappa` is infinite.
    pub minimizer: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BakryEmeryCurvature {
    /// Indexed by state.
    pub vertices: Vec<f64>,
    pub min: f64,
}

fn two_ball(p: &StochasticMatrix, x: usize) -> Vec<usize> {
    let mut ball = vec![x];
    let mut seen = std::collections::HashSet::from([x]);
    let mut frontier = 0;
    for _ in 0..2 {
        let end = ball.len();
        for i in frontier..end {
            for &(y, _) in p.support_row(ball[i]) {
                if seen.insert(y) {
                    ball.push(y);
                }
            }
        }
        frontier = end;
    }
    ball
}

/// Builds `A` and `B` on the 2-ball of `x`.
pub fn local_forms(p: &StochasticMatrix, x: usize) -> LocalForms {
    let ball = two_ball(p, x);
    let m = ball.len();
    let index = |s: usize| ball.iter().position(|&b| b == s).expect("inside the 2-ball");
    // Gamma matrix at u: 1/2 sum_w P(u,w) (e_w - e_u)(e_w - e_u)'.
    let gamma_at = |u: usize| {
        let mut g = DMatrix::<f64>::zeros(m, m);
        let iu = index(u);
        for &(w, pw) in p.support_row(u) {
            if w == u {
                continue;
            }
            let iw = index(w);
            let h = 0.5 * pw;
            g[(iu, iu)] += h;
            g[(iw, iw)] += h;
            g[(iu, iw)] -= h;
            g[(iw, iu)] -= h;
        }
        g
    };
    // Row of the generator at u: (Lf)(u) = l_u . f.
    let generator_at = |u: usize| {
        let mut l = DVector::<f64>::zeros(m);
        let iu = index(u);
        for &(z, pz) in p.support_row(u) {
            if z != u {
                l[index(z)] += pz;
                l[iu] -= pz;
            }
        }
        l
    };
    let b = gamma_at(x);
    let lx = generator_at(x);
    let mut a = DMatrix::<f64>::zeros(m, m);
    for &(y, py) in p.support_row(x) {
        if y == x {
            continue;
        }
        // 1/2 L Gamma(f,f)(x) part.
        a += (gamma_at(y) - &b) * (0.5 * py);
        // -Gamma(f, Lf)(x) part, symmetrized.
        let d = generator_at(y) - &lx;
        let (iy, ix) = (index(y), 0);
        for j in 0..m {
            let c = 0.25 * py * d[j];
            a[(iy, j)] -= c;
            a[(j, iy)] -= c;
            a[(ix, j)] += c;
            a[(j, ix)] += c;
        }
    }
    LocalForms { ball, a, b }
}

/// Smallest `f'Af / f'Bf` over `f'Bf > 0`, with an attaining `f`.
fn solve_local(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (f64, Option<DVector<f64>>) {
    let m = a.nrows();
    let eb = SymmetricEigen::new(b.clone());
    let scale_b = eb.eigenvalues.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let (range, null): (Vec<usize>, Vec<usize>) =
        (0..m).partition(|&i| eb.eigenvalues[i] > 1e-10 * scale_b);
    if range.is_empty() {
        return (f64::INFINITY, None);
    }
    let r = DMatrix::from_fn(m, range.len(), |i, j| eb.eigenvectors[(i, range[j])]);
    let nb = DMatrix::from_fn(m, null.len(), |i, j| eb.eigenvectors[(i, null[j])]);
    let lambda: Vec<f64> = range.iter().map(|&i| eb.eigenvalues[i]).collect();

    let a_rr = r.transpose() * a * &r;
    let a_r0 = r.transpose() * a * &nb;
    let a_00 = nb.transpose() * a * &nb;
    let scale_a = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let tol_a = 1e-9 * scale_a;

    let mut pinv = DMatrix::<f64>::zeros(null.len(), null.len());
    if !null.is_empty() {
        let e0 = SymmetricEigen::new(a_00.clone());
        for (k, &mu) in e0.eigenvalues.iter().enumerate() {
            let w = e0.eigenvectors.column(k);
            if mu < -tol_a {
                return (f64::NEG_INFINITY, None);
            }
            if mu <= tol_a {
                if (&a_r0 * w).amax() > tol_a {
                    return (f64::NEG_INFINITY, None);
                }
            } else {
                pinv += (w * w.transpose()) / mu;
            }
        }
    }
    let schur = &a_rr - &a_r0 * &pinv * a_r0.transpose();
    let inv_sqrt: Vec<f64> = lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
    let k = range.len();
    let mut mat = DMatrix::from_fn(k, k, |i, j| inv_sqrt[i] * schur[(i, j)] * inv_sqrt[j]);
    mat = (&mat + mat.transpose()) * 0.5;
    let em = SymmetricEigen::new(mat);
    let (imin, kappa) = em
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty range");
    let c = DVector::from_fn(k, |i, _| inv_sqrt[i] * em.eigenvectors[(i, imin)]);
    let bn = -(&pinv * (a_r0.transpose() * &c));
    (kappa, Some(&r * c + &nb * bn))
}

pub fn bakry_emery_vertex(p: &StochasticMatrix, x: usize) -> Result<VertexCurvature> {
    if x >= p.n() {
        return Err(Error::UnsupportedState(x));
    }
    let forms = local_forms(p, x);
    let (kappa, local) = solve_local(&forms.a, &forms.b);
    let minimizer = local.map(|v| {
        let mut f = vec![0.0; p.n()];
        for (i, &s) in forms.ball.iter().enumerate() {
            f[s] = v[i];
        }
        f
    });
    Ok(VertexCurvature {
        state: x,
        kappa,
        minimizer,
    })
}

pub fn bakry_emery_curvature(p: &StochasticMatrix) -> Result<BakryEmeryCurvature> {
    if !p.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let vertices: Vec<f64> = (0..p.n())
        .into_par_iter()
        .map(|x| {
            let forms = local_forms(p, x);
            solve_local(&forms.a, &forms.b).0
        })
        .collect();
    let min = vertices.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(BakryEmeryCurvature { vertices, min })
}
