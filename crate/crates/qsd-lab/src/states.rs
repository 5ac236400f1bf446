//! Density operators, ensembles, POVMs, measurement application, and the
//! fidelity family (fidelity, super fidelity, purity).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    herm_fn, outer, trace_norm, vec_norm, ComplexMatrix, MatrixFunction, HERM_TOL, PSD_CLIP_REL,
};

/// Tolerance on traces, weight sums, and vector normalization.
pub const TRACE_TOL: f64 = 1e-9;
/// Tolerance on POVM completeness; loose enough for quadrature-built sums.
pub const POVM_TOL: f64 = 1e-8;

/// Hermitian, positive semidefinite, unit-trace operator.
///
/// Serializes as `{dim, entries}` with interleaved re/im entries; the full
/// validity check runs again on deserialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl TryFrom<ComplexMatrix> for DensityOperator {
    type Error = Error;

    fn try_from(matrix: ComplexMatrix) -> Result<Self> {
        DensityOperator::new(matrix)
    }
}

impl From<DensityOperator> for ComplexMatrix {
    fn from(rho: DensityOperator) -> ComplexMatrix {
        rho.matrix
    }
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace, and positive semidefiniteness
    /// (eigenvalues above the relative clip).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.check_finite()?;
        let dev = matrix.hermiticity_deviation();
        if dev > HERM_TOL {
            return Err(Error::NotHermitian { max_dev: dev });
        }
        let trace_dev = (matrix.trace().re - 1.0).abs();
        if trace_dev > TRACE_TOL {
            return Err(Error::TraceNotUnit(trace_dev));
        }
        let eigen = crate::operator::herm_eig(&matrix)?;
        let max_mag = eigen.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l.abs()));
        let clip = PSD_CLIP_REL * max_mag;
        if let Some(&bad) = eigen.eigenvalues.iter().find(|&&l| l < -clip) {
            return Err(Error::NotPsd {
                eigenvalue: bad,
                clip_tol: clip,
            });
        }
        Ok(DensityOperator { matrix })
    }

    /// Pure state |ψ⟩⟨ψ|; `psi` must be normalized within [`TRACE_TOL`].
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = vec_norm(psi);
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized(norm));
        }
        let normalized: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(DensityOperator {
            matrix: outer(&normalized, &normalized),
        })
    }

    /// Construction-time bypass for matrices PSD by construction (convex
    /// combinations of pure projectors, unitary conjugations). Cheap checks
    /// only; the expensive spectral check stays available via [`validate`].
    ///
    /// [`validate`]: DensityOperator::validate
    pub(crate) fn trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.hermiticity_deviation() <= HERM_TOL);
        debug_assert!((matrix.trace().re - 1.0).abs() <= TRACE_TOL);
        DensityOperator { matrix }
    }

    /// Full invariant check (includes an eigendecomposition).
    pub fn validate(&self) -> Result<()> {
        DensityOperator::new(self.matrix.clone()).map(|_| ())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// U ρ U† (unitary conjugation preserves the invariants).
    pub fn conjugated(&self, u: &ComplexMatrix) -> Self {
        DensityOperator::trusted(u.mul(&self.matrix).mul(&u.adjoint()))
    }
}

/// Serialized ensemble member.
#[derive(Serialize, Deserialize)]
struct MemberRepr {
    weight: f64,
    state: DensityOperator,
}

#[derive(Serialize, Deserialize)]
struct EnsembleRepr {
    members: Vec<MemberRepr>,
}

/// Weighted list of density operators {p_i, ρ_i} with Σ p_i = 1.
///
/// Zero-weight members are dropped on construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "EnsembleRepr", into = "EnsembleRepr")]
pub struct Ensemble {
    members: Vec<(f64, DensityOperator)>,
}

impl TryFrom<EnsembleRepr> for Ensemble {
    type Error = Error;

    fn try_from(repr: EnsembleRepr) -> Result<Self> {
        Ensemble::new(repr.members.into_iter().map(|m| (m.weight, m.state)).collect())
    }
}

impl From<Ensemble> for EnsembleRepr {
    fn from(e: Ensemble) -> EnsembleRepr {
        EnsembleRepr {
            members: e
                .members
                .into_iter()
                .map(|(weight, state)| MemberRepr { weight, state })
                .collect(),
        }
    }
}

impl Ensemble {
    pub fn new(members: Vec<(f64, DensityOperator)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidWeights("ensemble has no members".into()));
        }
        let dim = members[0].1.dim();
        for (_, state) in &members {
            if state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: state.dim(),
                });
            }
        }
        if let Some((p, _)) = members.iter().find(|(p, _)| *p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidWeights(format!("weight {p} is negative or non-finite")));
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        let members: Vec<_> = members.into_iter().filter(|(p, _)| *p > 0.0).collect();
        if members.is_empty() {
            return Err(Error::InvalidWeights("all members have zero weight".into()));
        }
        Ok(Ensemble { members })
    }

    /// Convenience constructor for equal dimensions and explicit pairs.
    pub fn pair(p1: f64, rho1: DensityOperator, p2: f64, rho2: DensityOperator) -> Result<Self> {
        Ensemble::new(vec![(p1, rho1), (p2, rho2)])
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    pub fn members(&self) -> &[(f64, DensityOperator)] {
        &self.members
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.members[i].0
    }

    pub fn state(&self, i: usize) -> &DensityOperator {
        &self.members[i].1
    }

    /// The mixture Σ p_i ρ_i.
    pub fn mix(&self) -> DensityOperator {
        let mut m = ComplexMatrix::zeros(self.dim());
        for (p, rho) in &self.members {
            m.add_assign(&rho.matrix().scale_re(*p));
        }
        DensityOperator::trusted(m)
    }
}

#[derive(Serialize, Deserialize)]
struct PovmRepr {
    operators: Vec<ComplexMatrix>,
}

/// Measurement operators M_l with Σ M_l† M_l = I.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PovmRepr", into = "PovmRepr")]
pub struct Povm {
    operators: Vec<ComplexMatrix>,
}

impl TryFrom<PovmRepr> for Povm {
    type Error = Error;

    fn try_from(repr: PovmRepr) -> Result<Self> {
        Povm::new(repr.operators)
    }
}

impl From<Povm> for PovmRepr {
    fn from(p: Povm) -> PovmRepr {
        PovmRepr { operators: p.operators }
    }
}

impl Povm {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::InvalidPovm(1.0));
        }
        let dim = operators[0].dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for op in &operators {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: op.dim(),
                });
            }
            op.check_finite()?;
            sum.add_assign(&op.adjoint().mul(op));
        }
        let dev = sum.sub(&ComplexMatrix::identity(dim)).max_abs_entry();
        if dev > POVM_TOL {
            return Err(Error::InvalidPovm(dev));
        }
        Ok(Povm { operators })
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn operator(&self, i: usize) -> &ComplexMatrix {
        &self.operators[i]
    }
}

/// Post-measurement state Σ M_i ρ M_i†.
pub fn apply_measurement(rho: &DensityOperator, povm: &Povm) -> Result<DensityOperator> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: povm.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(rho.dim());
    for m in povm.operators() {
        out.add_assign(&m.mul(rho.matrix()).mul(&m.adjoint()));
    }
    debug_assert!((out.trace().re - 1.0).abs() <= TRACE_TOL);
    Ok(DensityOperator::trusted(out))
}

/// Tr{AB} for Hermitian A, B (real by symmetry).
pub(crate) fn herm_trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    let d = a.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            // Tr{AB} = Σ_ij A_ij B_ji = Σ_ij A_ij conj(B_ij) for Hermitian B.
            let x = a[(i, j)];
            let y = b[(i, j)];
            acc += x.re * y.re + x.im * y.im;
        }
    }
    acc
}

/// Hilbert-Schmidt overlap Tr{ρσ}; real for Hermitian states.
pub fn trace_overlap(rho: &DensityOperator, sigma: &DensityOperator) -> f64 {
    herm_trace_product(rho.matrix(), sigma.matrix())
}

/// Uhlmann fidelity F(ρ, σ) = ‖√ρ √σ‖₁², computed from the singular values
/// of √ρ √σ and clamped to [0, 1].
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let sr = herm_fn(rho.matrix(), MatrixFunction::Sqrt)?;
    let ss = herm_fn(sigma.matrix(), MatrixFunction::Sqrt)?;
    let f = trace_norm(&sr.mul(&ss)).powi(2);
    Ok(f.clamp(0.0, 1.0))
}

/// Super fidelity Tr{ρσ} + √((1 - Tr{ρ²})(1 - Tr{σ²})); an upper bound on
/// the fidelity.
pub fn super_fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let overlap = herm_trace_product(rho.matrix(), sigma.matrix());
    let gap_rho = (1.0 - purity(rho)).max(0.0);
    let gap_sigma = (1.0 - purity(sigma)).max(0.0);
    Ok(overlap + (gap_rho * gap_sigma).sqrt())
}

/// Purity Tr{ρ²}.
pub fn purity(rho: &DensityOperator) -> f64 {
    let f = rho.matrix().frobenius_norm();
    f * f
}

/// Result of sampling purification overlaps against the fidelity.
#[derive(Debug, Clone, Serialize)]
pub struct PurificationReport {
    pub fidelity: f64,
    pub max_overlap: f64,
    pub trials: usize,
    /// max overlap ≤ F + tolerance (the hard direction).
    pub within_bound: bool,
    /// max overlap ≥ 0.9 F (soft Monte-Carlo diagnostic only).
    pub soft_lower_ok: bool,
}

/// Samples `trials` random purifications of σ against a fixed purification
/// of ρ. Every sampled overlap |⟨ξ|χ⟩|² must stay below F(ρ, σ); the
/// maximum found is a Monte-Carlo lower estimate of it.
pub fn purification_fidelity_check(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    trials: usize,
    seed: u64,
) -> Result<PurificationReport> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let d = rho.dim();
    let f = fidelity(rho, sigma)?;
    let eig_rho = crate::operator::herm_eig(rho.matrix())?;
    let eig_sigma = crate::operator::herm_eig(sigma.matrix())?;
    let sqrt_rho: Vec<f64> = eig_rho.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    let sqrt_sigma: Vec<f64> = eig_sigma.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    // Overlap matrix between the two eigenbases.
    let cross = eig_rho.vectors.adjoint().mul(&eig_sigma.vectors);

    let mut stream = crate::random::SeedStream::new(seed);
    let mut max_overlap: f64 = 0.0;
    for trial in 0..trials {
        // |χ_W⟩ = Σ_l √μ_l |u_l⟩ ⊗ W|l⟩ ranges over all purifications of σ
        // as W ranges over the unitaries on the ancilla. The first trial
        // takes the canonical aligned purification W = I.
        let w = if trial == 0 {
            ComplexMatrix::identity(d)
        } else {
            crate::random::haar_unitary(d, &mut stream.rng())
        };
        let mut amp = Complex64::new(0.0, 0.0);
        for k in 0..d {
            for l in 0..d {
                amp += sqrt_rho[k] * sqrt_sigma[l] * cross[(k, l)] * w[(k, l)];
            }
        }
        max_overlap = max_overlap.max(amp.norm_sqr());
    }

    // No purification overlap can exceed the fidelity; a violation here
    // means the fidelity computation itself is broken.
    assert!(
        max_overlap <= f + 1e-9,
        "sampled purification overlap {max_overlap} exceeds the fidelity {f}"
    );
    Ok(PurificationReport {
        fidelity: f,
        max_overlap,
        trials,
        within_bound: max_overlap <= f + 1e-9,
        soft_lower_ok: max_overlap >= 0.9 * f,
    })
}
