//! Small dense complex linear algebra on top of `nalgebra`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // inherent on some targets and toolchains
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `|u><v|`
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// `<u|v>`
#[inline]
pub fn inner(u: &CVector, v: &CVector) -> Complex64 {
    u.dotc(v)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().copied().fold(ZERO, |acc, z| acc + z)
}

/// `Tr(A^dagger B)`
pub fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M^dagger) / 2`
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Real part of `<psi|H|psi>`.
pub fn expectation(h: &CMatrix, psi: &CVector) -> f64 {
    psi.dotc(&(h * psi)).re
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending and
/// eigenvectors as the matching columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).0.first().copied().unwrap_or(0.0)
}

/// Clip negative eigenvalues to zero and renormalize the trace to one.
pub fn psd_project(m: &CMatrix) -> CMatrix {
    let (values, vectors) = eigh(m);
    let clipped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let n = m.nrows();
    if total <= 0.0 {
        return CMatrix::identity(n, n) * c(1.0 / n as f64, 0.0);
    }
    let mut out = CMatrix::zeros(n, n);
    for (i, &v) in clipped.iter().enumerate() {
        if v > 0.0 {
            let col = vectors.column(i).into_owned();
            out += outer(&col, &col) * c(v / total, 0.0);
        }
    }
    hermitize(&out)
}

/// Coordinates of a Hermitian matrix in an orthonormal real basis, so that the
/// Euclidean inner product of coordinates equals `Re Tr(A B)`.
///
/// Layout: the `d` diagonal entries, then for each `i < j` the pair
/// `sqrt(2) Re m_ij, sqrt(2) Im m_ij`.
pub fn hermitian_coords(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let s = core::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(m[(i, i)].re);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            out.push(s * m[(i, j)].re);
            out.push(s * m[(i, j)].im);
        }
    }
    out
}

/// Inverse of [`hermitian_coords`].
pub fn from_hermitian_coords(d: usize, coords: &[f64]) -> CMatrix {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = c(coords[i], 0.0);
    }
    let mut idx = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = c(s * coords[idx], s * coords[idx + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            idx += 2;
        }
    }
    m
}

/// Coordinates of the projector `|psi><psi|` without forming the matrix.
pub fn pure_coords(psi: &CVector) -> Vec<f64> {
    hermitian_coords(&outer(psi, psi))
}

/// Distance between two unit vectors modulo a global phase,
/// `min_theta |u - e^{i theta} v|`.
pub fn phase_distance(u: &CVector, v: &CVector) -> f64 {
    (2.0 - 2.0 * inner(u, v).norm()).max(0.0).sqrt()
}

pub fn normalize(v: &CVector) -> Option<CVector> {
    let n = v.norm();
    if n > 0.0 && n.is_finite() {
        Some(v / c(n, 0.0))
    } else {
        None
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Haar-random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(d, |_, _| complex_normal(rng));
        if let Some(u) = normalize(&v) {
            return u;
        }
    }
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| complex_normal(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q.clone();
    for col in 0..d {
        let rd = r[(col, col)];
        let phase = if rd.norm() > 0.0 { rd / c(rd.norm(), 0.0) } else { ONE };
        for row in 0..d {
            u[(row, col)] = q[(row, col)] * phase;
        }
    }
    u
}

/// Random density matrix `G G^dagger / Tr(G G^dagger)` with `G` a `d x rank`
/// Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, rank.max(1), |_, _| complex_normal(rng));
    let m = &g * g.adjoint();
    let t = trace(&m).re;
    hermitize(&(m / c(t, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coords_round_trip_and_preserve_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..5 {
            let a = random_density(d, d, &mut rng);
            let b = random_density(d, 1, &mut rng);
            let ca = hermitian_coords(&a);
            let cb = hermitian_coords(&b);
            assert_eq!(ca.len(), d * d);
            let back = from_hermitian_coords(d, &ca);
            assert!(max_abs_diff(&a, &back) < 1e-14);
            let dot: f64 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
            assert!((dot - frobenius_inner(&a, &b).re).abs() < 1e-14);
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(4, &mut rng);
        let id = u.adjoint() * &u;
        assert!(max_abs_diff(&id, &CMatrix::identity(4, 4)) < 1e-13);
    }

    #[test]
    fn psd_projection_clips_and_renormalizes() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(alloc::vec![c(1.1, 0.0), c(-0.1, 0.0)]));
        let p = psd_project(&m);
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(p[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn eigh_sorts_ascending() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(alloc::vec![c(3.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        let (vals, vecs) = eigh(&m);
        assert_eq!(vals, alloc::vec![-1.0, 2.0, 3.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unit_vector(3, &mut rng);
        let v = &u * Complex64::from_polar(1.0, 0.7);
        assert!(phase_distance(&u, &v) < 1e-7);
    }
}
