//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn smallest_singular_value(m: &CMatrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Thin orthonormal basis of the column span (QR, `m` assumed full column rank).
pub fn orthonormalize(m: &CMatrix) -> CMatrix {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return CMatrix::zeros(rows, 0);
    }
    m.clone().qr().q()
}

/// QR factors `(Q, R)` of a tall matrix.
pub fn thin_qr(m: &CMatrix) -> (CMatrix, CMatrix) {
    let qr = m.clone().qr();
    (qr.q(), qr.r())
}

pub fn hermitian_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * real(0.5)
}

/// Eigen-decomposition of a hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Number of negative eigenvalues of a hermitian matrix, from a
/// Bunch–Kaufman `LDL*` factorization (exact zeros count as negative).
pub fn negative_inertia(m: &CMatrix) -> usize {
    let n = m.nrows();
    let mut a = m.clone();
    let alpha = (1.0 + 17f64.sqrt()) / 8.0;
    let mut negatives = 0;
    let swap = |a: &mut CMatrix, i: usize, j: usize| {
        if i != j {
            a.swap_rows(i, j);
            a.swap_columns(i, j);
        }
    };
    let mut k = 0;
    while k < n {
        let (mut r, mut lambda) = (k, 0.0);
        for i in k + 1..n {
            if a[(i, k)].norm() > lambda {
                lambda = a[(i, k)].norm();
                r = i;
            }
        }
        let akk = a[(k, k)].re.abs();
        let two_by_two = if akk >= alpha * lambda || lambda == 0.0 {
            false
        } else {
            let sigma = (k..n)
                .filter(|&i| i != r)
                .map(|i| a[(i, r)].norm())
                .fold(0.0, f64::max);
            if akk * sigma >= alpha * lambda * lambda {
                false
            } else if a[(r, r)].re.abs() >= alpha * sigma {
                swap(&mut a, k, r);
                false
            } else {
                swap(&mut a, k + 1, r);
                true
            }
        };
        if !two_by_two {
            let d = a[(k, k)].re;
            if d <= 0.0 {
                negatives += 1;
            }
            if d != 0.0 {
                for j in k + 1..n {
                    let f = a[(j, k)].conj() / d;
                    for i in k + 1..n {
                        let aik = a[(i, k)];
                        a[(i, j)] -= aik * f;
                    }
                }
            }
            k += 1;
        } else {
            let (p, q, b) = (a[(k, k)].re, a[(k + 1, k + 1)].re, a[(k + 1, k)]);
            let det = p * q - b.norm_sqr();
            // eigenvalue signs of the 2×2 pivot
            if det < 0.0 {
                negatives += 1;
            } else if p + q <= 0.0 {
                negatives += 2;
            }
            // E⁻¹ = [[q, −b̄], [−b, p]] / det, with E = [[p, b̄], [b, q]]
            let einv = [
                [C64::new(q / det, 0.0), -b.conj() / det],
                [-b / det, C64::new(p / det, 0.0)],
            ];
            for j in k + 2..n {
                let cj = [a[(j, k)], a[(j, k + 1)]];
                // w = E⁻¹ c_j*
                let w = [
                    einv[0][0] * cj[0].conj() + einv[0][1] * cj[1].conj(),
                    einv[1][0] * cj[0].conj() + einv[1][1] * cj[1].conj(),
                ];
                for i in k + 2..n {
                    let ci = [a[(i, k)], a[(i, k + 1)]];
                    a[(i, j)] -= ci[0] * w[0] + ci[1] * w[1];
                }
            }
            k += 2;
        }
    }
    negatives
}

/// Solves `A X = B` by LU; `None` when `A` is singular.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    a.clone().lu().solve(b)
}

/// Complex Schur form `M = Q T Q*`.
///
/// The QR iteration can stall on nearly scalar matrices; it is retried on
/// shifted copies `M − μI`, which have the same Schur vectors.
pub fn schur(m: &CMatrix) -> (CMatrix, CMatrix) {
    let n = m.nrows();
    let max_iter = 200 * n + 1000;
    let scale = m.norm().max(1.0) / (n.max(1) as f64).sqrt();
    let centre = m.trace() / C64::new(n.max(1) as f64, 0.0);
    let shifts = [
        C64::new(0.0, 0.0),
        centre,
        centre + C64::new(0.5, 0.2) * scale,
        C64::new(-0.3, 0.7) * scale,
    ];
    for mu in shifts {
        let shifted = m - identity(n) * mu;
        if let Some(s) = nalgebra::linalg::Schur::try_new(shifted, f64::EPSILON, max_iter) {
            let (q, mut t) = s.unpack();
            for i in 0..n {
                t[(i, i)] += mu;
            }
            return (q, t);
        }
    }
    nalgebra::linalg::Schur::new(m.clone()).unpack()
}

/// Eigenvalues and eigenvectors of a normal matrix (e.g. a unitary).
///
/// The complex Schur form of a normal matrix is diagonal, so `Q` holds
/// orthonormal eigenvectors.
pub fn normal_eigen(m: &CMatrix) -> (Vec<C64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let (q, t) = schur(m);
    let values = (0..n).map(|i| t[(i, i)]).collect();
    (values, q)
}

pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let (_, t) = schur(m);
    (0..m.nrows()).map(|i| t[(i, i)]).collect()
}

/// Complex Schur form `M = Q T Q*` whose leading diagonal block holds every
/// eigenvalue accepted by `select`.
///
/// Returns `(Q, T, k)` with `k` the number of selected eigenvalues. Reordering
/// uses adjacent swaps by 2×2 unitary rotations.
pub fn ordered_schur<F>(m: &CMatrix, select: F) -> Result<(CMatrix, CMatrix, usize)>
where
    F: Fn(C64) -> bool,
{
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    let (mut q, mut t) = schur(m);
    for i in 1..n {
        for j in 0..i {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    let mut k = 0;
    for i in 0..n {
        if !select(t[(i, i)]) {
            continue;
        }
        let mut pos = i;
        while pos > k {
            swap_adjacent(&mut q, &mut t, pos - 1);
            pos -= 1;
        }
        k += 1;
    }
    for i in 0..k {
        if !select(t[(i, i)]) {
            return Err(Error::SchurReorder(format!(
                "eigenvalue {} drifted out of the selected set during reordering",
                t[(i, i)]
            )));
        }
    }
    let resid = (&q * &t * q.adjoint() - m).norm() / m.norm().max(1.0);
    if resid > 1e-10 {
        return Err(Error::SchurReorder(format!(
            "reconstruction residual {resid:.3e}"
        )));
    }
    Ok((q, t, k))
}

/// Swaps the diagonal entries at `i` and `i + 1` of the upper triangular `t`.
fn swap_adjacent(q: &mut CMatrix, t: &mut CMatrix, i: usize) {
    let n = t.nrows();
    let t11 = t[(i, i)];
    let t22 = t[(i + 1, i + 1)];
    let t12 = t[(i, i + 1)];
    // eigenvector of the 2x2 block for t22
    let (mut v1, mut v2) = (t12, t22 - t11);
    let norm = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    v1 /= norm;
    v2 /= norm;
    // Z = [[v1, -conj(v2)], [v2, conj(v1)]]
    let z = [[v1, -v2.conj()], [v2, v1.conj()]];
    // T <- Z* T on rows i, i+1
    for col in 0..n {
        let a = t[(i, col)];
        let b = t[(i + 1, col)];
        t[(i, col)] = z[0][0].conj() * a + z[1][0].conj() * b;
        t[(i + 1, col)] = z[0][1].conj() * a + z[1][1].conj() * b;
    }
    // T <- T Z and Q <- Q Z on columns i, i+1
    for row in 0..n {
        let a = t[(row, i)];
        let b = t[(row, i + 1)];
        t[(row, i)] = a * z[0][0] + b * z[1][0];
        t[(row, i + 1)] = a * z[0][1] + b * z[1][1];
        let a = q[(row, i)];
        let b = q[(row, i + 1)];
        q[(row, i)] = a * z[0][0] + b * z[1][0];
        q[(row, i + 1)] = a * z[0][1] + b * z[1][1];
    }
    t[(i + 1, i)] = C64::new(0.0, 0.0);
}
