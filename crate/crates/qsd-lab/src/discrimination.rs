//! Error probability for a given POVM, the exact binary (Helstrom) solution,
//! lower and upper bounds on the optimal error, the pretty-good measurement,
//! and quantum Chernoff exponents with tensor-power asymptotics.
//!
//! For N > 2 the exact optimum is not computed (that would need an SDP
//! solver); [`bounds_report`] brackets it instead and reports the bracket.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{
    herm_eig, herm_fn, kron_vec, trace_norm, vec_norm, ComplexMatrix, MatrixFunction,
};
use crate::states::{fidelity, DensityOperator, Ensemble, Povm, TRACE_TOL};

/// Relative cutoff below which eigenvalues of the mixture count as zero in
/// the pretty-good-measurement pseudo-inverse.
pub const PGM_PINV_CUTOFF_REL: f64 = 1e-10;

/// Bracket on the optimal error probability of an ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub qiu_lower: f64,
    pub montanaro_lower: f64,
    pub kb_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pgm_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hellstrom_exact: Option<f64>,
}

/// Chernoff exponent for one pair of ensemble members.
#[derive(Debug, Clone, Serialize)]
pub struct PairExponent {
    pub i: usize,
    pub j: usize,
    pub exponent: f64,
    pub s_min: f64,
}

/// Pairwise quantum Chernoff exponents; the ensemble exponent is the
/// minimum over pairs.
#[derive(Debug, Clone, Serialize)]
pub struct ChernoffReport {
    pub pairs: Vec<PairExponent>,
    pub ensemble_exponent: f64,
}

/// One row of a tensor-power discrimination study.
#[derive(Debug, Clone, Serialize)]
pub struct TensorPowerRow {
    pub n: u32,
    pub error: f64,
    /// -log(p_E)/n; absent when the error is exactly zero.
    pub rate: Option<f64>,
    /// Helstrom error of the explicitly built n-fold tensor states, for
    /// small n only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explicit_error: Option<f64>,
}

/// Closed-form tensor-power error curve with explicit-matrix cross-checks.
#[derive(Debug, Clone, Serialize)]
pub struct TensorPowerStudy {
    pub overlap_fidelity: f64,
    pub chernoff_exponent: f64,
    pub rows: Vec<TensorPowerRow>,
}

/// Tr{M ρ M†} for a measurement operator M.
fn outcome_probability(m: &ComplexMatrix, rho: &ComplexMatrix) -> f64 {
    // Tr{M ρ M†} = Σ_ik (Mρ)_ik conj(M_ik).
    let prod = m.mul(rho);
    let d = m.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for k in 0..d {
            let a = prod[(i, k)];
            let b = m[(i, k)];
            acc += a.re * b.re + a.im * b.im;
        }
    }
    acc
}

/// Probability that the POVM fails to identify the ensemble label:
/// 1 - Σ p_i Tr{M_i ρ_i M_i†}.
///
/// The POVM may have more operators than the ensemble has members; the
/// extra outcomes count as errors. The complementary cross-term sum
/// Σ_i p_i Σ_{j≠i} Tr{M_j ρ_i M_j†} is evaluated as well and must agree.
pub fn error_probability(ensemble: &Ensemble, povm: &Povm) -> Result<f64> {
    if ensemble.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            left: ensemble.dim(),
            right: povm.dim(),
        });
    }
    if povm.len() < ensemble.len() {
        return Err(Error::UnsupportedCombination(format!(
            "POVM with {} operators cannot discriminate {} members",
            povm.len(),
            ensemble.len()
        )));
    }

    let mut success = 0.0;
    let mut cross = 0.0;
    for (i, (p, rho)) in ensemble.members().iter().enumerate() {
        for (j, m) in povm.operators().iter().enumerate() {
            let prob = p * outcome_probability(m, rho.matrix());
            if i == j {
                success += prob;
            } else {
                cross += prob;
            }
        }
    }
    let direct = 1.0 - success;
    assert!(
        (direct - cross).abs() <= 1e-9,
        "error decompositions disagree: direct {direct} vs cross-term {cross}"
    );
    Ok(direct.clamp(0.0, 1.0))
}

/// Exact two-state minimum error ½ - ½‖p₁ρ₁ - p₂ρ₂‖₁ together with the
/// optimal projective measurement onto the nonnegative/negative eigenspaces
/// of the weighted difference. Zero eigenvalues go to the first outcome.
pub fn hellstrom(
    p1: f64,
    rho1: &DensityOperator,
    p2: f64,
    rho2: &DensityOperator,
) -> Result<(f64, Povm)> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            left: rho1.dim(),
            right: rho2.dim(),
        });
    }
    if (p1 + p2 - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidWeights(format!("p1 + p2 = {}", p1 + p2)));
    }

    let delta = rho1.matrix().scale_re(p1).sub(&rho2.matrix().scale_re(p2));
    let eigen = herm_eig(&delta)?;
    let error = 0.5 - 0.5 * eigen.eigenvalues.iter().map(|l| l.abs()).sum::<f64>();
    let error = error.clamp(0.0, 1.0);

    let d = rho1.dim();
    let mut plus = ComplexMatrix::zeros(d);
    let mut minus = ComplexMatrix::zeros(d);
    for k in 0..d {
        let col = eigen.eigenvector(k);
        if eigen.eigenvalues[k] >= 0.0 {
            plus.add_scaled_outer(1.0, &col);
        } else {
            minus.add_scaled_outer(1.0, &col);
        }
    }
    let povm = Povm::new(vec![plus, minus])?;

    let ensemble = Ensemble::pair(p1, rho1.clone(), p2, rho2.clone())?;
    let achieved = error_probability(&ensemble, &povm)?;
    assert!(
        (achieved - error).abs() <= 1e-9,
        "Helstrom projector error {achieved} disagrees with closed form {error}"
    );
    Ok((error, povm))
}

/// Qiu lower bound ½(1 - Σ_{i≠j}‖p_iρ_i - p_jρ_j‖₁ / (2(N-1))),
/// clamped below at zero. Collapses to the exact Helstrom value at N = 2.
pub fn qiu_lower(ensemble: &Ensemble) -> f64 {
    let n = ensemble.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let delta = ensemble
                .state(i)
                .matrix()
                .scale_re(ensemble.weight(i))
                .sub(&ensemble.state(j).matrix().scale_re(ensemble.weight(j)));
            sum += trace_norm(&delta);
        }
    }
    (0.5 * (1.0 - sum / (2.0 * (n as f64 - 1.0)))).max(0.0)
}

/// Montanaro lower bound ½ Σ_{i≠j} p_i p_j F(ρ_i, ρ_j) over ordered pairs.
pub fn montanaro_lower(ensemble: &Ensemble) -> f64 {
    let n = ensemble.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let f = fidelity(ensemble.state(i), ensemble.state(j))
                .expect("ensemble members share a dimension and are valid");
            sum += ensemble.weight(i) * ensemble.weight(j) * f;
        }
    }
    0.5 * sum
}

/// Knill-Barnum upper bound Σ_{i≠j} √(p_i p_j) √F(ρ_i, ρ_j) over ordered
/// pairs. Deliberately not clamped at 1: the bound may be trivial.
pub fn knill_barnum_upper(ensemble: &Ensemble) -> f64 {
    let n = ensemble.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let f = fidelity(ensemble.state(i), ensemble.state(j))
                .expect("ensemble members share a dimension and are valid");
            sum += (ensemble.weight(i) * ensemble.weight(j)).sqrt() * f.sqrt();
        }
    }
    sum
}

/// Pretty-good (square-root) measurement M_i = √(S^{-1/2} p_i ρ_i S^{-1/2})
/// with S = Σ p_j ρ_j and the pseudo-inverse taken on the support of S.
///
/// When S is rank deficient, an extra failure operator covering the
/// orthogonal complement is appended so the POVM resolves the identity;
/// it only ever contributes to the error.
pub fn pgm(ensemble: &Ensemble) -> Result<Povm> {
    let d = ensemble.dim();
    let s = ensemble.mix();
    let eigen = herm_eig(s.matrix())?;
    let lam_max = eigen.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l));
    let cutoff = PGM_PINV_CUTOFF_REL * lam_max;
    if lam_max <= 0.0 {
        return Err(Error::DegenerateMixture);
    }

    let inv_sqrt = eigen.assemble(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 });
    let support = eigen.assemble(|l| if l > cutoff { 1.0 } else { 0.0 });
    let rank_deficient = eigen.eigenvalues.iter().any(|&l| l <= cutoff);

    let mut operators = Vec::with_capacity(ensemble.len() + 1);
    for (p, rho) in ensemble.members() {
        let effect = inv_sqrt.mul(&rho.matrix().scale_re(*p)).mul(&inv_sqrt);
        // Store the Hermitian square root so that M†M recovers the effect.
        operators.push(herm_fn(&effect.hermitian_part(), MatrixFunction::Sqrt)?);
    }
    if rank_deficient {
        let failure = ComplexMatrix::identity(d).sub(&support);
        operators.push(failure.hermitian_part());
    }
    Povm::new(operators)
}

/// Error probability achieved by the pretty-good measurement.
pub fn pgm_error(ensemble: &Ensemble) -> Result<f64> {
    error_probability(ensemble, &pgm(ensemble)?)
}

/// All bounds applicable to the ensemble; the exact value and the PGM error
/// are included where available (Helstrom only at N = 2).
pub fn bounds_report(ensemble: &Ensemble) -> Result<BoundsReport> {
    let pgm_error = pgm_error(ensemble).ok();
    let hellstrom_exact = if ensemble.len() == 2 {
        let (e, _) = hellstrom(
            ensemble.weight(0),
            ensemble.state(0),
            ensemble.weight(1),
            ensemble.state(1),
        )?;
        Some(e)
    } else {
        None
    };
    Ok(BoundsReport {
        qiu_lower: qiu_lower(ensemble),
        montanaro_lower: montanaro_lower(ensemble),
        kb_upper: knill_barnum_upper(ensemble),
        pgm_error,
        hellstrom_exact,
    })
}

/// Spectral data for evaluating s ↦ Tr{ρ^s σ^(1-s)} cheaply on many s.
struct ChernoffObjective {
    lam_rho: Vec<f64>,
    lam_sigma: Vec<f64>,
    /// |⟨v_i | u_j⟩|² between the two eigenbases.
    overlap_sq: Vec<f64>,
    dim: usize,
}

impl ChernoffObjective {
    fn new(rho: &DensityOperator, sigma: &DensityOperator) -> Result<Self> {
        let er = herm_eig(rho.matrix())?;
        let es = herm_eig(sigma.matrix())?;
        let cross = er.vectors.adjoint().mul(&es.vectors);
        let d = rho.dim();
        let clip = |v: &[f64]| -> Vec<f64> {
            let max = v.iter().fold(0.0_f64, |m, &l| m.max(l.abs()));
            let band = crate::operator::PSD_CLIP_REL * max;
            v.iter().map(|&l| if l <= band { 0.0 } else { l }).collect()
        };
        let mut overlap_sq = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                overlap_sq[i * d + j] = cross[(i, j)].norm_sqr();
            }
        }
        Ok(ChernoffObjective {
            lam_rho: clip(&er.eigenvalues),
            lam_sigma: clip(&es.eigenvalues),
            overlap_sq,
            dim: d,
        })
    }

    /// Tr{ρ^s σ^(1-s)} with the support convention 0^x := 0.
    fn eval(&self, s: f64) -> f64 {
        let pow = |l: f64, e: f64| if l == 0.0 { 0.0 } else { l.powf(e) };
        let mut acc = 0.0;
        for i in 0..self.dim {
            let li = pow(self.lam_rho[i], s);
            if li == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                let lj = pow(self.lam_sigma[j], 1.0 - s);
                acc += li * lj * self.overlap_sq[i * self.dim + j];
            }
        }
        acc
    }
}

/// Golden-section refinement of a minimum inside [lo, hi].
fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > width {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Pairwise Chernoff exponent: coarse grid on s then golden-section
/// refinement; robust on flat objectives (pure-state pairs).
fn pair_exponent(rho: &DensityOperator, sigma: &DensityOperator) -> Result<(f64, f64)> {
    let objective = ChernoffObjective::new(rho, sigma)?;
    let grid_points = 101;
    let mut best_s = 0.0;
    let mut best_q = f64::INFINITY;
    for k in 0..grid_points {
        let s = k as f64 / (grid_points - 1) as f64;
        let q = objective.eval(s);
        if q < best_q {
            best_q = q;
            best_s = s;
        }
    }
    let step = 1.0 / (grid_points - 1) as f64;
    let lo = (best_s - step).max(0.0);
    let hi = (best_s + step).min(1.0);
    let (s_refined, q_refined) = golden_section_min(|s| objective.eval(s), lo, hi, 1e-6);
    let (s_min, q_min) = if q_refined < best_q {
        (s_refined, q_refined)
    } else {
        (best_s, best_q)
    };
    // Q ≤ 1 up to roundoff, so the exponent is nonnegative.
    Ok(((-q_min.ln()).max(0.0), s_min))
}

/// Quantum Chernoff exponents for every unordered pair; the ensemble
/// exponent is the minimum over pairs.
pub fn chernoff(ensemble: &Ensemble) -> Result<ChernoffReport> {
    let n = ensemble.len();
    let mut pairs = Vec::new();
    let mut ensemble_exponent = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let (exponent, s_min) = pair_exponent(ensemble.state(i), ensemble.state(j))?;
            ensemble_exponent = ensemble_exponent.min(exponent);
            pairs.push(PairExponent { i, j, exponent, s_min });
        }
    }
    if pairs.is_empty() {
        ensemble_exponent = 0.0;
    }
    Ok(ChernoffReport {
        pairs,
        ensemble_exponent,
    })
}

/// Discrimination error of {p₁, |ψ₁⟩⟨ψ₁|^⊗n; p₂, |ψ₂⟩⟨ψ₂|^⊗n} as n grows.
///
/// For pure states the Helstrom error has the closed form
/// ½(1 - √(1 - 4p₁p₂Fⁿ)) with F = |⟨ψ₁|ψ₂⟩|²; for n ≤ `explicit_n_cap`
/// the tensor-power states are also built explicitly and the closed form is
/// cross-checked against the full Helstrom computation.
pub fn tensor_power_study(
    p1: f64,
    psi1: &[Complex64],
    p2: f64,
    psi2: &[Complex64],
    n_max: u32,
    explicit_n_cap: u32,
) -> Result<TensorPowerStudy> {
    assert!(n_max <= 24, "tensor powers beyond n = 24 are out of scope");
    if psi1.len() != psi2.len() {
        return Err(Error::DimensionMismatch {
            left: psi1.len(),
            right: psi2.len(),
        });
    }
    for psi in [psi1, psi2] {
        let norm = vec_norm(psi);
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized(norm));
        }
    }
    if (p1 + p2 - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidWeights(format!("p1 + p2 = {}", p1 + p2)));
    }

    let overlap_fidelity = crate::operator::inner(psi1, psi2).norm_sqr();
    let base = Ensemble::pair(
        p1,
        DensityOperator::pure(psi1)?,
        p2,
        DensityOperator::pure(psi2)?,
    )?;
    let chernoff_exponent = chernoff(&base)?.ensemble_exponent;

    let mut rows = Vec::with_capacity(n_max as usize);
    let mut kron1 = psi1.to_vec();
    let mut kron2 = psi2.to_vec();
    for n in 1..=n_max {
        let fn_pow = overlap_fidelity.powi(n as i32);
        let error = 0.5 * (1.0 - (1.0 - 4.0 * p1 * p2 * fn_pow).max(0.0).sqrt());
        let rate = if error > 0.0 { Some(-error.ln() / n as f64) } else { None };

        let explicit_error = if n <= explicit_n_cap {
            if n > 1 {
                kron1 = kron_vec(&kron1, psi1);
                kron2 = kron_vec(&kron2, psi2);
            }
            let rho1 = DensityOperator::pure(&kron1)?;
            let rho2 = DensityOperator::pure(&kron2)?;
            let (e, _) = hellstrom(p1, &rho1, p2, &rho2)?;
            assert!(
                (e - error).abs() <= 1e-9,
                "explicit tensor-power Helstrom {e} disagrees with closed form {error} at n = {n}"
            );
            Some(e)
        } else {
            None
        };

        rows.push(TensorPowerRow {
            n,
            error,
            rate,
            explicit_error,
        });
    }

    Ok(TensorPowerStudy {
        overlap_fidelity,
        chernoff_exponent,
        rows,
    })
}
