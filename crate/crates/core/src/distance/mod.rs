//! Spectral distance and distances between unitary orbits.
//!
//! For matrices the spectral distance `δ(h, k)` is the bottleneck matching
//! value of the two eigenvalue lists, and the unitary `V_k P V_h*` built
//! from an optimal matching realizes `‖UhU* − k‖ = δ`, so
//! `dist(U(h), U(k)) <= δ(h, k)` holds constructively. A seeded descent
//! over the unitary group looks for something better.
//!
//! For finite spectral presentations `δ` is bracketed with sup-norm
//! dilations: the lower endpoint is always certified by an explicit open
//! set on which the dilation inequality fails.

pub mod linalg;
pub mod matching;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dimlat::cmp_unchecked;
use crate::dyadic::Dyadic;
use crate::orbits::{joint_overlay, same_norm_closure, OrbitError};
use crate::region::OpenRegion;
use crate::specmeas::SpectralMeasure;

use linalg::{
    conjugation_gap, expm_skew, normal_eigen, permutation_matrix, random_unitary, top_singular,
};
pub use linalg::{CMatrix, CVector};
use matching::bottleneck_assignment;

/// Relative normality tolerance: `‖AA* − A*A‖ <= NORMAL_TOL · ‖A‖²`.
pub const NORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistanceError {
    #[error("matrix is {rows}×{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not normal: ‖AA* − A*A‖ = {residual:e}")]
    NotNormal { residual: f64 },
    #[error("dimensions differ: {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("eigendecomposition failed the residual check")]
    EigenFailed,
    #[error("mesh must be positive and finite, got {0}")]
    BadMesh(f64),
    #[error("grid cell {cell:?} holds {h_count} eigenvalues of h but {k_count} of k")]
    MultiplicityMismatch {
        cell: GridCell,
        h_count: usize,
        k_count: usize,
    },
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("tolerance must be positive")]
    BadTolerance,
}

/// A dense complex matrix checked to be normal, with its unitary
/// diagonalization.
#[derive(Debug, Clone)]
pub struct NormalMatrix {
    mat: CMatrix,
    eigenvalues: Vec<Complex64>,
    eigenvectors: CMatrix,
    residual: f64,
}

impl NormalMatrix {
    pub fn new(mat: CMatrix) -> Result<Self, DistanceError> {
        if mat.nrows() != mat.ncols() {
            return Err(DistanceError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let residual = linalg::normality_residual(&mat);
        let scale = mat.norm();
        if residual > NORMAL_TOL * scale * scale.max(1.0) {
            return Err(DistanceError::NotNormal { residual });
        }
        let (eigenvalues, eigenvectors) = normal_eigen(&mat).ok_or(DistanceError::EigenFailed)?;
        Ok(NormalMatrix {
            mat,
            eigenvalues,
            eigenvectors,
            residual,
        })
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let n = values.len();
        NormalMatrix {
            mat: CMatrix::from_diagonal(&CVector::from_column_slice(values)),
            eigenvalues: values.to_vec(),
            eigenvectors: CMatrix::identity(n, n),
            residual: 0.0,
        }
    }

    /// `U diag(values) U*` for a unitary `u`.
    pub fn from_spectrum(values: &[Complex64], u: &CMatrix) -> Result<Self, DistanceError> {
        let d = CMatrix::from_diagonal(&CVector::from_column_slice(values));
        NormalMatrix::new(u * d * u.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn normality_residual(&self) -> f64 {
        self.residual
    }

    /// `UAU*`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self, DistanceError> {
        NormalMatrix::new(u * &self.mat * u.adjoint())
    }
}

fn check_dims(h: &NormalMatrix, k: &NormalMatrix) -> Result<usize, DistanceError> {
    if h.dim() == k.dim() {
        Ok(h.dim())
    } else {
        Err(DistanceError::DimensionMismatch(h.dim(), k.dim()))
    }
}

fn distance_table(a: &[Complex64], b: &[Complex64]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect()
}

/// `δ(h, k) = min_σ max_j |λ_j − μ_σ(j)|`.
pub fn delta_matrix(h: &NormalMatrix, k: &NormalMatrix) -> Result<f64, DistanceError> {
    check_dims(h, k)?;
    Ok(bottleneck_assignment(&distance_table(h.eigenvalues(), k.eigenvalues())).0)
}

/// Unitary `V_k P V_h*` from an optimal bottleneck matching; it conjugates
/// `h` to within `δ(h, k)` of `k`.
pub fn bottleneck_unitary(h: &NormalMatrix, k: &NormalMatrix) -> Result<CMatrix, DistanceError> {
    check_dims(h, k)?;
    let (_, perm) = bottleneck_assignment(&distance_table(h.eigenvalues(), k.eigenvalues()));
    Ok(matched_unitary(h, k, &perm))
}

fn matched_unitary(h: &NormalMatrix, k: &NormalMatrix, perm: &[usize]) -> CMatrix {
    k.eigenvectors() * permutation_matrix(perm) * h.eigenvectors().adjoint()
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceReport {
    pub delta_exact: f64,
    /// Upper bound on `dist(U(h), U(k))`, attained by `witness_unitary`.
    pub dist_ub: f64,
    #[serde(skip)]
    pub witness_unitary: CMatrix,
    /// Restart that produced the bound; `None` for the matching unitary.
    pub best_restart: Option<usize>,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
}

const DESCENT_ITERS: usize = 200;

/// One descent run of `U ↦ ‖UhU* − k‖` from `u`, moving by `U ← exp(S)U`
/// with `S` the skew-Hermitian part of the subgradient, with backtracking.
fn descend(h: &CMatrix, k: &CMatrix, mut u: CMatrix) -> (f64, CMatrix, usize) {
    let objective = |u: &CMatrix| conjugation_gap(u, h, k);
    let mut value = objective(&u);
    let mut step = 1.0;
    let mut iters = 0;
    while iters < DESCENT_ITERS && step > 1e-14 && value > 0.0 {
        iters += 1;
        let conj = &u * h * u.adjoint();
        let m = &conj - k;
        let (sigma, v) = top_singular(&m);
        if sigma == 0.0 {
            break;
        }
        let left = &m * &v / Complex64::from(sigma);
        let outer = &v * left.adjoint();
        let g = &conj * &outer - &outer * &conj;
        let dir = (&g - g.adjoint()) * Complex64::from(0.5);
        let dir_norm = dir.norm();
        if dir_norm == 0.0 {
            break;
        }
        let mut improved = false;
        while step > 1e-14 {
            for sign in [1.0, -1.0] {
                let cand = expm_skew(&(&dir * Complex64::from(sign * step / dir_norm))) * &u;
                let cv = objective(&cand);
                if cv < value {
                    u = cand;
                    value = cv;
                    improved = true;
                    break;
                }
            }
            if improved {
                step *= 2.0;
                break;
            }
            step /= 2.0;
        }
        if !improved {
            break;
        }
    }
    (value, u, iters)
}

/// Seeded random-restart upper bound on the distance between the unitary
/// orbits of `h` and `k`.
///
/// Restart 0 starts from the identity; restart `r > 0` from a Haar unitary
/// drawn from a generator seeded by `(seed, r)`. The matching unitary is
/// always evaluated as well, so `dist_ub <= δ(h, k)` up to rounding. The
/// minimum is reduced by `(value, restart)` and does not depend on
/// scheduling.
pub fn dist_upper_bound(
    h: &NormalMatrix,
    k: &NormalMatrix,
    restarts: usize,
    seed: u64,
) -> Result<DistanceReport, DistanceError> {
    let n = check_dims(h, k)?;
    let delta = delta_matrix(h, k)?;
    let matched = bottleneck_unitary(h, k)?;
    let matched_value = conjugation_gap(&matched, h.matrix(), k.matrix());

    let runs: Vec<(f64, usize, CMatrix, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                CMatrix::identity(n, n)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                random_unitary(n, &mut rng)
            };
            let (v, u, iters) = descend(h.matrix(), k.matrix(), start);
            (v, r, u, iters)
        })
        .collect();
    let iterations = runs.iter().map(|r| r.3).sum();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let (dist_ub, witness_unitary, best_restart) = match best {
        Some((v, r, u, _)) if v < matched_value => (v, u, Some(r)),
        _ => (matched_value, matched, None),
    };
    Ok(DistanceReport {
        delta_exact: delta,
        dist_ub,
        witness_unitary,
        best_restart,
        iterations,
        restarts,
        seed,
    })
}

/// A square cell `[i·s, (i+1)·s) × [j·s, (j+1)·s)` of the construction grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GridCell {
    pub i: i64,
    pub j: i64,
    /// Side length `mesh / √2`, so that the cell diameter is the mesh.
    #[serde(skip)]
    side_bits: u64,
}

impl GridCell {
    pub fn side(&self) -> f64 {
        f64::from_bits(self.side_bits)
    }

    pub fn of(z: Complex64, side: f64) -> Self {
        GridCell {
            i: (z.re / side).floor() as i64,
            j: (z.im / side).floor() as i64,
            side_bits: side.to_bits(),
        }
    }

    pub fn center(&self) -> Complex64 {
        let s = self.side();
        Complex64::new((self.i as f64 + 0.5) * s, (self.j as f64 + 0.5) * s)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        GridCell::of(z, self.side()) == *self
    }

    /// Eigenvalues of `m` inside the cell.
    pub fn count(&self, m: &NormalMatrix) -> usize {
        m.eigenvalues()
            .iter()
            .filter(|z| self.contains(**z))
            .count()
    }
}

#[derive(Debug, Clone)]
pub struct GridConstruction {
    pub unitary: CMatrix,
    pub achieved_norm: f64,
    pub mesh: f64,
    /// Eigenvalue `j` of `h` is matched with eigenvalue `perm[j]` of `k`.
    pub perm: Vec<usize>,
}

/// Grid construction of a unitary conjugating `h` close to `k`.
///
/// The plane is cut into squares of diameter `mesh`. When every cell holds
/// equally many eigenvalues of `h` and `k`, matching them cell by cell
/// gives a unitary with `‖UhU* − k‖ <= mesh`; otherwise the first
/// offending cell is reported.
pub fn construct_unitary_grid(
    h: &NormalMatrix,
    k: &NormalMatrix,
    mesh: f64,
) -> Result<GridConstruction, DistanceError> {
    check_dims(h, k)?;
    if !(mesh > 0.0 && mesh.is_finite()) {
        return Err(DistanceError::BadMesh(mesh));
    }
    let side = mesh / std::f64::consts::SQRT_2;
    let mut cells: BTreeMap<GridCell, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (j, z) in h.eigenvalues().iter().enumerate() {
        cells.entry(GridCell::of(*z, side)).or_default().0.push(j);
    }
    for (j, z) in k.eigenvalues().iter().enumerate() {
        cells.entry(GridCell::of(*z, side)).or_default().1.push(j);
    }
    let mut perm = vec![0; h.dim()];
    for (cell, (hs, ks)) in &cells {
        if hs.len() != ks.len() {
            return Err(DistanceError::MultiplicityMismatch {
                cell: *cell,
                h_count: hs.len(),
                k_count: ks.len(),
            });
        }
        let hv: Vec<Complex64> = hs.iter().map(|&j| h.eigenvalues()[j]).collect();
        let kv: Vec<Complex64> = ks.iter().map(|&j| k.eigenvalues()[j]).collect();
        let (_, local) = bottleneck_assignment(&distance_table(&hv, &kv));
        for (a, b) in local.into_iter().enumerate() {
            perm[hs[a]] = ks[b];
        }
    }
    let unitary = matched_unitary(h, k, &perm);
    let achieved_norm = conjugation_gap(&unitary, h.matrix(), k.matrix());
    Ok(GridConstruction {
        unitary,
        achieved_norm,
        mesh,
        perm,
    })
}

/// The permutation of the cycle `(1 2 … j)` on `n` points, 0-indexed:
/// basis vector `e_j` goes to `e_1` and `e_i` to `e_{i+1}` for `i < j`.
pub fn cycle_permutation(n: usize, j: usize) -> Vec<usize> {
    assert!(1 <= j && j <= n, "cycle length {j} outside 1..={n}");
    (0..n)
        .map(|i| match i {
            _ if i + 1 < j => i + 1,
            _ if i + 1 == j => 0,
            _ => i,
        })
        .collect()
}

/// The truncated diagonal pair `h = diag(1, 1/2, …, 1/n)` and
/// `k = diag(0, 1, 1/2, …, 1/(n−1))`.
pub fn harmonic_pair(n: usize) -> (NormalMatrix, NormalMatrix) {
    let h: Vec<Complex64> = (1..=n).map(|i| Complex64::from(1.0 / i as f64)).collect();
    let k: Vec<Complex64> = std::iter::once(Complex64::from(0.0))
        .chain((1..n).map(|i| Complex64::from(1.0 / i as f64)))
        .collect();
    (NormalMatrix::diagonal(&h), NormalMatrix::diagonal(&k))
}

/// Bracket on the sup-metric spectral distance of two presentations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaBracket {
    /// Certified: some open set violates the dilation inequality at `lo`
    /// (or `lo = 0`).
    pub lo: Dyadic,
    /// No violation found at `hi` on the probe family.
    pub hi: Dyadic,
    pub tol: Dyadic,
    /// Euclidean-metric bracket `[lo, √2·hi]`.
    pub euclid_lo: f64,
    pub euclid_hi: f64,
}

/// An open set `O` with `M_x(O + B_r) < M_y(O)`, if the candidates hold one.
fn violated(
    r: Dyadic,
    x: &SpectralMeasure,
    y: &SpectralMeasure,
    candidates: &[OpenRegion],
    witness: Option<&OpenRegion>,
) -> bool {
    let check = |o: &OpenRegion| {
        !o.is_empty()
            && cmp_unchecked(
                &x.crude_multiplicity(&o.dilate_unchecked(r)),
                &y.crude_multiplicity(o),
            ) == Ordering::Less
    };
    witness.is_some_and(|w| check(&w.shrink(r))) || candidates.iter().any(check)
}

fn infeasible(
    r: Dyadic,
    h: &SpectralMeasure,
    k: &SpectralMeasure,
    candidates: &[OpenRegion],
    witness: Option<&OpenRegion>,
) -> bool {
    violated(r, h, k, candidates, witness) || violated(r, k, h, candidates, witness)
}

/// Lattice squares in the bracket search go this many levels below the
/// presentations' coordinate precision.
const LATTICE_EXTRA_LEVELS: u32 = 1;

/// Bisection bracket for `δ(h, k)` in the sup metric.
///
/// The upper end starts at the joint bounding-box span plus one (where the
/// dilation covers everything) and is lowered whenever the probe family
/// finds no violation; the lower end only ever moves to radii with an
/// explicit violating open set. When the orbits' norm closures differ,
/// the exact decision's witness is shrunk until it certifies a positive
/// lower end, so `lo = 0` exactly when the norm closures coincide.
pub fn delta_presentation(
    h: &SpectralMeasure,
    k: &SpectralMeasure,
    tol: Dyadic,
) -> Result<DeltaBracket, DistanceError> {
    if !tol.is_positive() {
        return Err(DistanceError::BadTolerance);
    }
    let verdict = same_norm_closure(h, k)?;
    let ov = joint_overlay(&[h, k]);
    let mut candidates = Vec::new();
    // Stratum probes shrink geometrically to below the tolerance: a small
    // probe stays clear of far-away mass for larger dilation radii.
    let floor = tol
        .checked_half()
        .and_then(|t| t.checked_half())
        .unwrap_or(tol);
    for s in ov.strata() {
        let mut t = ov.probe_size(s);
        loop {
            candidates.push(ov.probe(s, t));
            match t.checked_half() {
                Some(next) if t > floor => t = next,
                _ => break,
            }
        }
    }
    // Lattice squares reach the inside of cells, where mass is spread.
    let frame = h.support().union(&k.support()).default_frame();
    let level = h.coordinate_level().max(k.coordinate_level()) + LATTICE_EXTRA_LEVELS;
    for l in 0..=level {
        candidates.extend(frame.lattice_squares(l).into_iter().map(OpenRegion::rect));
    }
    let witness = verdict.witness.as_ref().map(|w| w.region.clone());

    let span = match h.support().union(&k.support()).bbox() {
        Some(b) => b.width().max(b.height()),
        None => Dyadic::ZERO,
    };
    let mut hi = span + Dyadic::ONE;
    let mut lo = Dyadic::ZERO;
    if let Some(w) = &witness {
        let mut t = hi;
        while let Some(next) = t.checked_half() {
            t = next;
            if infeasible(t, h, k, &candidates, Some(w)) {
                lo = t;
                break;
            }
        }
    }
    while hi - lo > tol {
        let Some(mid) = (lo + hi).checked_half() else {
            break;
        };
        if mid <= lo || mid >= hi {
            break;
        }
        if infeasible(mid, h, k, &candidates, witness.as_ref()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DeltaBracket {
        lo,
        hi,
        tol,
        euclid_lo: lo.to_f64(),
        euclid_hi: std::f64::consts::SQRT_2 * hi.to_f64(),
    })
}
