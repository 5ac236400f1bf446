//! Dense complex matrix layer: Hermitian eigendecomposition, spectral matrix
//! functions, norms, and unitary exponentials.
//!
//! Everything downstream (states, bounds, dynamics) is built on the small set
//! of primitives in this module. Matrices are dense, row-major, `Complex64`.
//! The eigensolver is a cyclic Jacobi iteration for Hermitian matrices: at the
//! dimensions this crate targets (≤ ~512) it is simple, deterministic, and
//! accurate to near machine precision.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hermiticity validation tolerance: max |A - A†| entry.
pub const HERM_TOL: f64 = 1e-10;
/// Guaranteed bound on eigendecomposition residuals, relative to the
/// matrix scale: reconstruction and orthonormality hold to this tolerance.
pub const EIG_TOL: f64 = 1e-11;
/// Hard cap on Jacobi sweeps before reporting no convergence.
pub const MAX_JACOBI_SWEEPS: usize = 100;
/// Internal Jacobi stop; tighter than [`EIG_TOL`] so that spectral
/// functions of near-singular matrices (√ρ with zero eigenvalues) do not
/// inherit an amplified residual. Convergence is quadratic, so the extra
/// sweeps are cheap.
const JACOBI_STOP_REL: f64 = 1e-14;
/// Eigenvalues above `-PSD_CLIP_REL * max |eigenvalue|` are treated as
/// nonnegative and clipped to zero before sqrt/power. Quadrature-built
/// mixtures routinely acquire negative eigenvalues of this size.
pub const PSD_CLIP_REL: f64 = 1e-10;

/// Spectral functions applied through [`herm_fn`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    /// Principal square root of a PSD matrix.
    Sqrt,
    /// Fractional power `λ^s` with `s ∈ [0, 1]`; `0^s := 0` (support
    /// convention, including `s = 0`).
    Power(f64),
    /// Entrywise absolute value of the spectrum.
    Abs,
}

/// Serialized form: dimension plus interleaved re/im entries, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    entries: Vec<f64>,
}

/// Square complex matrix, row-major storage.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix(dim = {})", self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| format!("{:+.4}{:+.4}i", self[(i, j)].re, self[(i, j)].im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        if repr.entries.len() != 2 * repr.dim * repr.dim {
            return Err(Error::DimensionMismatch {
                left: repr.entries.len(),
                right: 2 * repr.dim * repr.dim,
            });
        }
        let data: Vec<Complex64> = repr
            .entries
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        let m = ComplexMatrix { dim: repr.dim, data };
        m.check_finite()?;
        Ok(m)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        let mut entries = Vec::with_capacity(2 * m.data.len());
        for z in &m.data {
            entries.push(z.re);
            entries.push(z.im);
        }
        MatrixRepr { dim: m.dim, entries }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from rows of complex entries; panics unless square.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "rows must form a square matrix");
        ComplexMatrix {
            dim,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteEntries)
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }

    /// Accumulates `weight * |v⟩⟨v|` without allocating the outer product.
    pub fn add_scaled_outer(&mut self, weight: f64, v: &[Complex64]) {
        assert_eq!(self.dim, v.len());
        let d = self.dim;
        for i in 0..d {
            let wi = v[i] * weight;
            let row = &mut self.data[i * d..(i + 1) * d];
            for (j, r) in row.iter_mut().enumerate() {
                *r += wi * v[j].conj();
            }
        }
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rrow = &rhs.data[k * d..(k + 1) * d];
                let orow = &mut out.data[i * d..(i + 1) * d];
                for j in 0..d {
                    orow[j] += a * rrow[j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len());
        let d = self.dim;
        (0..d)
            .map(|i| {
                self.data[i * d..(i + 1) * d]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Kronecker product.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (da, db) = (self.dim, rhs.dim);
        let mut out = Self::zeros(da * db);
        for i in 0..da {
            for j in 0..da {
                let a = self[(i, j)];
                for k in 0..db {
                    for l in 0..db {
                        out[(i * db + k, j * db + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max |A - A†| entry.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian_within(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Hermitian average (A + A†)/2; kills roundoff asymmetry before
    /// handing a matrix to the eigensolver.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    fn max_off_diag(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                m = m.max(self[(i, j)].norm());
            }
        }
        m
    }
}

/// ⟨a|b⟩ with the physics convention (conjugate-linear in the first slot).
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Outer product |a⟩⟨b|.
pub fn outer(a: &[Complex64], b: &[Complex64]) -> ComplexMatrix {
    assert_eq!(a.len(), b.len());
    ComplexMatrix::from_fn(a.len(), |i, j| a[i] * b[j].conj())
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Computational basis vector |k⟩ in dimension `dim`.
pub fn basis_vector(dim: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// the matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub eigenvalues: Vec<f64>,
    /// Column `k` of this matrix is the eigenvector for `eigenvalues[k]`.
    pub vectors: ComplexMatrix,
}

impl HermEigen {
    /// Column `k` as an owned vector.
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.dim()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// Reassembles `V f(Λ) V†` for a real function of the eigenvalues.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.vectors.dim();
        let mut out = ComplexMatrix::zeros(d);
        let mut col = vec![Complex64::new(0.0, 0.0); d];
        for k in 0..d {
            let fv = f(self.eigenvalues[k]);
            if fv == 0.0 {
                continue;
            }
            for (i, c) in col.iter_mut().enumerate() {
                *c = self.vectors[(i, k)];
            }
            out.add_scaled_outer(fv, &col);
        }
        out
    }
}

/// One Jacobi rotation annihilating the (p, q) entry of `m`, accumulated
/// into `v`. `m` must be Hermitian with real diagonal.
fn jacobi_rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let abs = apq.norm();
    if abs == 0.0 {
        return;
    }
    let phase = apq / abs; // e^{iφ}
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let zeta = (aqq - app) / (2.0 * abs);
    // Smaller-magnitude root of t² - 2ζt - 1 = 0, for stability.
    let t = if zeta >= 0.0 {
        -1.0 / (zeta + (zeta * zeta + 1.0).sqrt())
    } else {
        1.0 / (-zeta + (zeta * zeta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let d = m.dim();
    let s_phase = phase * s; // s e^{iφ}
    let s_phase_conj = s_phase.conj(); // s e^{-iφ}

    // A <- A U, with U = I except U_pp = c, U_pq = -s e^{iφ},
    // U_qp = s e^{-iφ}, U_qq = c.
    for k in 0..d {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * c + akq * s_phase_conj;
        m[(k, q)] = akq * c - akp * s_phase;
    }
    // A <- U† A.
    for k in 0..d {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * c + aqk * s_phase;
        m[(q, k)] = aqk * c - apk * s_phase_conj;
    }
    // V <- V U.
    for k in 0..d {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * s_phase_conj;
        v[(k, q)] = vkq * c - vkp * s_phase;
    }

    // Pin what the rotation achieved exactly.
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
}

/// Hermitian eigendecomposition by cyclic Jacobi sweeps.
///
/// Eigenvalues come out ascending; ties keep the pre-sort column order.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermEigen> {
    a.check_finite()?;
    let dev = a.hermiticity_deviation();
    if dev > HERM_TOL * a.max_abs_entry().max(1.0) {
        return Err(Error::NotHermitian { max_dev: dev });
    }

    let d = a.dim();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(d);
    let scale = a.max_abs_entry().max(1.0);
    let stop = JACOBI_STOP_REL * scale;
    let skip = stop * 1e-2;

    let mut sweeps = 0;
    while m.max_off_diag() > stop {
        if sweeps >= MAX_JACOBI_SWEEPS {
            // The tight internal target was not reached; the decomposition
            // is still valid as long as the advertised tolerance holds.
            if m.max_off_diag() <= EIG_TOL * scale {
                break;
            }
            return Err(Error::NoConvergence {
                sweeps,
                residual: m.max_off_diag(),
            });
        }
        for p in 0..d {
            for q in (p + 1)..d {
                if m[(p, q)].norm() > skip {
                    jacobi_rotate(&mut m, &mut v, p, q);
                }
            }
        }
        sweeps += 1;
    }

    // Ascending sort; stable, so equal eigenvalues keep original index order.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&k| m[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(d, |i, j| v[(i, order[j])]);

    Ok(HermEigen { eigenvalues, vectors })
}

/// Applies a real spectral function to a Hermitian matrix: `V f(Λ) V†`.
///
/// For `Sqrt` and `Power`, eigenvalues below `-psd_clip` fail with
/// [`Error::NotPsd`]; small negatives inside the clip band are set to zero.
pub fn herm_fn(a: &ComplexMatrix, f: MatrixFunction) -> Result<ComplexMatrix> {
    if let MatrixFunction::Power(s) = f {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::ExponentOutOfRange(s));
        }
    }
    let eigen = herm_eig(a)?;
    let max_mag = eigen.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l.abs()));
    let clip = PSD_CLIP_REL * max_mag;

    match f {
        MatrixFunction::Abs => Ok(eigen.assemble(f64::abs)),
        MatrixFunction::Sqrt | MatrixFunction::Power(_) => {
            if let Some(&bad) = eigen.eigenvalues.iter().find(|&&l| l < -clip) {
                return Err(Error::NotPsd {
                    eigenvalue: bad,
                    clip_tol: clip,
                });
            }
            // The whole clip band collapses to zero: eigenvalues this small
            // are numerically indistinguishable from rank deficiency, and
            // letting them through would inject √-amplified noise.
            let apply = move |l: f64| {
                let l = if l.abs() <= clip { 0.0 } else { l };
                match f {
                    MatrixFunction::Sqrt => l.sqrt(),
                    // 0^s := 0 for every s in [0, 1]: powers act on the
                    // support only, so s = 0 yields the support projector.
                    MatrixFunction::Power(s) => {
                        if l == 0.0 {
                            0.0
                        } else {
                            l.powf(s)
                        }
                    }
                    MatrixFunction::Abs => unreachable!(),
                }
            };
            Ok(eigen.assemble(apply))
        }
    }
}

/// Singular values by one-sided Jacobi: rotations orthogonalize column
/// pairs until the column set is numerically orthogonal; the singular
/// values are the final column norms. Equivalent to two-sided Jacobi on
/// A†A but without forming the square, so small singular values keep
/// their accuracy.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let d = a.dim();
    let mut cols: Vec<Vec<Complex64>> = (0..d).map(|j| (0..d).map(|i| a[(i, j)]).collect()).collect();
    let mut norms_sq: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect();
    let tol = 1e-14;

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..d {
            for q in (p + 1)..d {
                let g: Complex64 = inner(&cols[p], &cols[q]);
                let abs_g = g.norm();
                if abs_g <= tol * (norms_sq[p] * norms_sq[q]).sqrt() || abs_g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = g / abs_g;
                let zeta = (norms_sq[q] - norms_sq[p]) / (2.0 * abs_g);
                let t = if zeta >= 0.0 {
                    -1.0 / (zeta + (zeta * zeta + 1.0).sqrt())
                } else {
                    1.0 / (-zeta + (zeta * zeta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let s_phase = phase * s;
                let s_phase_conj = s_phase.conj();
                let (left, right) = cols.split_at_mut(q);
                let (col_p, col_q) = (&mut left[p], &mut right[0]);
                for (vp, vq) in col_p.iter_mut().zip(col_q.iter_mut()) {
                    let (a, b) = (*vp, *vq);
                    *vp = a * c + b * s_phase_conj;
                    *vq = b * c - a * s_phase;
                }
                norms_sq[p] = cols[p].iter().map(|z| z.norm_sqr()).sum();
                norms_sq[q] = cols[q].iter().map(|z| z.norm_sqr()).sum();
            }
        }
        if !rotated {
            break;
        }
    }
    norms_sq.iter().map(|n| n.sqrt()).collect()
}

/// Trace norm ‖A‖₁ = Σ singular values; for Hermitian input this is Σ|λ|.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    let scale = a.max_abs_entry().max(1.0);
    if a.hermiticity_deviation() <= HERM_TOL * scale {
        let eigen = herm_eig(a).expect("hermitian branch");
        eigen.eigenvalues.iter().map(|l| l.abs()).sum()
    } else {
        singular_values(a).iter().sum()
    }
}

/// Unitary `e^{-iθB}` for Hermitian `B`, assembled spectrally.
pub fn unitary_exp(b: &ComplexMatrix, theta: f64) -> Result<ComplexMatrix> {
    Ok(unitary_from_eigen(&herm_eig(b)?, theta))
}

/// `e^{-iθB}` from a precomputed eigendecomposition of B; lets callers
/// amortize one eigensolve over many evolution times.
pub fn unitary_from_eigen(eigen: &HermEigen, theta: f64) -> ComplexMatrix {
    let d = eigen.vectors.dim();
    let mut out = ComplexMatrix::zeros(d);
    let mut col = vec![Complex64::new(0.0, 0.0); d];
    for k in 0..d {
        let phase = Complex64::from_polar(1.0, -theta * eigen.eigenvalues[k]);
        for (i, c) in col.iter_mut().enumerate() {
            *c = eigen.vectors[(i, k)];
        }
        for i in 0..d {
            let w = col[i] * phase;
            for j in 0..d {
                out[(i, j)] += w * col[j].conj();
            }
        }
    }
    out
}
