//! Dense complex linear algebra for normal matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Operator norm (largest singular value).
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// Largest singular value and a unit right singular vector for it.
pub fn top_singular(a: &CMatrix) -> (f64, CVector) {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return (0.0, CVector::zeros(n));
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (i, sigma) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &s)| {
                if s > best.1 {
                    (i, s)
                } else {
                    best
                }
            });
    let v = v_t.row(i).adjoint();
    (sigma.max(0.0), v)
}

/// Frobenius norm of `AA* - A*A`.
pub fn normality_residual(a: &CMatrix) -> f64 {
    (a * a.adjoint() - a.adjoint() * a).norm()
}

/// Unitary diagonalization `A = Q diag(λ) Q*` of a normal matrix.
///
/// The Hermitian and skew parts of a normal matrix commute, so a generic
/// real combination `H + tK` has the same eigenvectors; its Hermitian
/// eigendecomposition is computed and the residual checked. A few values
/// of `t` are tried in case one happens to merge distinct eigenvalues.
pub fn normal_eigen(a: &CMatrix) -> Option<(Vec<Complex64>, CMatrix)> {
    let n = a.nrows();
    let i = Complex64::i();
    let herm = (a + a.adjoint()) * Complex64::from(0.5);
    let skew = (a - a.adjoint()) * (-i * 0.5);
    let tol = 1e-9 * a.norm().max(1.0);
    for t in [
        0.577_215_664_901_532_9,
        1.324_717_957_244_746,
        0.271_828_182_845_904_5,
    ] {
        let mix = &herm + &skew * Complex64::from(t);
        let eig = mix.symmetric_eigen();
        let q = eig.eigenvectors;
        let values: Vec<Complex64> = (0..n)
            .map(|j| {
                let col = q.column(j);
                col.dotc(&(a * col))
            })
            .collect();
        let lam = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(values.clone()));
        let residual = (a - &q * lam * q.adjoint()).norm();
        if residual <= tol {
            return Some((values, q));
        }
    }
    None
}

/// `exp(S)` for skew-Hermitian `S`, computed spectrally so the result is
/// unitary to rounding.
pub fn expm_skew(s: &CMatrix) -> CMatrix {
    let i = Complex64::i();
    let herm = s * (-i);
    let herm = (&herm + herm.adjoint()) * Complex64::from(0.5);
    let eig = herm.symmetric_eigen();
    let phases = eig.eigenvalues.map(|x| Complex64::from_polar(1.0, x));
    &eig.eigenvectors * CMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::from(1.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Permutation matrix sending basis vector `j` to `perm[j]`.
pub fn permutation_matrix(perm: &[usize]) -> CMatrix {
    let n = perm.len();
    let mut p = CMatrix::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        p[(i, j)] = Complex64::from(1.0);
    }
    p
}

/// `‖UAU* - B‖`.
pub fn conjugation_gap(u: &CMatrix, a: &CMatrix, b: &CMatrix) -> f64 {
    op_norm(&(u * a * u.adjoint() - b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn op_norm_of_diagonal() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(1.0, 1.0),
        ]));
        assert!((op_norm(&d) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            let a = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let svd_max = a.clone().singular_values().max();
            assert!((op_norm(&a) - svd_max).abs() < 1e-9 * svd_max.max(1.0));
        }
    }

    #[test]
    fn unitary_and_eigen() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_unitary(5, &mut rng);
        let id = CMatrix::identity(5, 5);
        assert!((u.adjoint() * &u - &id).norm() < 1e-12);
        let diag: Vec<Complex64> = (0..5)
            .map(|k| Complex64::new(k as f64, -(k as f64) / 2.0))
            .collect();
        let a =
            &u * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag.clone())) * u.adjoint();
        assert!(normality_residual(&a) < 1e-10);
        let (mut vals, q) = normal_eigen(&a).unwrap();
        assert!((q.adjoint() * &q - &id).norm() < 1e-10);
        vals.sort_by(|x, y| x.re.total_cmp(&y.re));
        for (x, y) in vals.iter().zip(&diag) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn exponential_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = CMatrix::from_fn(4, 4, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let s = (&g - g.adjoint()) * Complex64::from(0.5);
        let u = expm_skew(&s);
        assert!((u.adjoint() * &u - CMatrix::identity(4, 4)).norm() < 1e-12);
    }
}
