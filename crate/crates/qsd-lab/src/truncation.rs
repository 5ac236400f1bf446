//! Finite-rank truncation machinery: spectral truncation with tail masses,
//! and convergence studies for the fidelity and the Knill-Barnum bound under
//! truncation. Infinite rank is emulated by fast-decaying (geometric)
//! spectra, so the tails are meaningful at small ranks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{herm_eig, herm_fn, trace_norm, ComplexMatrix, MatrixFunction};
use crate::states::{DensityOperator, Ensemble};

/// One rank row of a truncation study.
#[derive(Debug, Clone, Serialize)]
pub struct TruncationRow {
    pub rank: usize,
    /// Largest discarded mass Σ_{k>d} λ_k over the states involved.
    pub tail: f64,
    /// Smallest retained mass α_d = Tr{ρ_d} over the states involved.
    pub alpha: f64,
    /// |‖√ρ_d √σ_d‖₁ - ‖√ρ √σ‖₁| (fidelity studies only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_dev: Option<f64>,
    /// |KB(d) - KB| (Knill-Barnum studies only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kb_dev: Option<f64>,
    /// Proof-side bound: √tail_ρ + √tail_σ for fidelity studies, the
    /// minimum-error displacement N Σ_i p_i tail_i for KB studies.
    pub bound: f64,
    /// Largest discarded √-mass Σ_{k>d} √λ_k over the states involved; the
    /// finite-stage data behind square-root-summability conditions.
    pub sqrt_tail: f64,
}

/// Rank-indexed convergence table.
#[derive(Debug, Clone, Serialize)]
pub struct TruncationStudy {
    pub rows: Vec<TruncationRow>,
}

/// Spectral truncation: keeps the `rank` largest eigenvalues with their
/// eigenvectors (ties at the cut keep the lower index in the ascending
/// eigenvalue order). Returns the unnormalized truncation and the discarded
/// tail mass.
pub fn truncate(rho: &DensityOperator, rank: usize) -> Result<(ComplexMatrix, f64)> {
    let dim = rho.dim();
    if rank < 1 || rank > dim {
        return Err(Error::RankOutOfRange { rank, dim });
    }
    let eigen = herm_eig(rho.matrix())?;
    let mut order: Vec<usize> = (0..dim).collect();
    // Descending by eigenvalue; equal eigenvalues keep the lower index.
    order.sort_by(|&i, &j| {
        eigen.eigenvalues[j]
            .partial_cmp(&eigen.eigenvalues[i])
            .unwrap()
            .then(i.cmp(&j))
    });

    let mut truncated = ComplexMatrix::zeros(dim);
    let mut kept = 0.0;
    for &k in order.iter().take(rank) {
        let l = eigen.eigenvalues[k].max(0.0);
        truncated.add_scaled_outer(l, &eigen.eigenvector(k));
        kept += l;
    }
    let tail: f64 = order
        .iter()
        .skip(rank)
        .map(|&k| eigen.eigenvalues[k].max(0.0))
        .sum();
    debug_assert!((kept + tail - 1.0).abs() <= 1e-9);
    Ok((truncated, tail))
}

fn sqrt_tail_mass(rho: &DensityOperator, rank: usize) -> Result<f64> {
    let eigen = herm_eig(rho.matrix())?;
    let dim = rho.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        eigen.eigenvalues[j]
            .partial_cmp(&eigen.eigenvalues[i])
            .unwrap()
            .then(i.cmp(&j))
    });
    Ok(order
        .iter()
        .skip(rank)
        .map(|&k| eigen.eigenvalues[k].max(0.0).sqrt())
        .sum())
}

/// ‖√A √B‖₁ for PSD matrices (not necessarily unit trace).
fn sqrt_product_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let sa = herm_fn(a, MatrixFunction::Sqrt)?;
    let sb = herm_fn(b, MatrixFunction::Sqrt)?;
    Ok(trace_norm(&sa.mul(&sb)))
}

/// How ‖√ρ_d √σ_d‖₁ approaches ‖√ρ √σ‖₁ as the rank grows. Every deviation
/// is checked against the Hilbert-Schmidt chain bound √tail_ρ + √tail_σ.
pub fn fidelity_convergence_study(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    ranks: &[usize],
) -> Result<TruncationStudy> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    assert!(ranks.windows(2).all(|w| w[0] < w[1]), "ranks must ascend");
    let full = sqrt_product_norm(rho.matrix(), sigma.matrix())?;

    let mut rows = Vec::with_capacity(ranks.len());
    for &rank in ranks {
        let (rho_d, tail_rho) = truncate(rho, rank)?;
        let (sigma_d, tail_sigma) = truncate(sigma, rank)?;
        let value = sqrt_product_norm(&rho_d, &sigma_d)?;
        let dev = (value - full).abs();
        let bound = tail_rho.sqrt() + tail_sigma.sqrt();
        assert!(
            dev <= bound + 1e-9,
            "rank {rank}: deviation {dev} exceeds the tail bound {bound}"
        );
        rows.push(TruncationRow {
            rank,
            tail: tail_rho.max(tail_sigma),
            alpha: (1.0 - tail_rho).min(1.0 - tail_sigma),
            fidelity_dev: Some(dev),
            kb_dev: None,
            bound,
            sqrt_tail: sqrt_tail_mass(rho, rank)?.max(sqrt_tail_mass(sigma, rank)?),
        });
    }
    Ok(TruncationStudy { rows })
}

/// How the Knill-Barnum bound of the rank-d normalized truncations
/// approaches the untruncated bound, together with the minimum-error
/// displacement bound N Σ_i p_i tail_i(d), which must decrease to zero.
pub fn kb_convergence_study(ensemble: &Ensemble, ranks: &[usize]) -> Result<TruncationStudy> {
    assert!(ranks.windows(2).all(|w| w[0] < w[1]), "ranks must ascend");
    let n = ensemble.len();
    let full_kb = crate::discrimination::knill_barnum_upper(ensemble);

    let mut rows: Vec<TruncationRow> = Vec::with_capacity(ranks.len());
    for &rank in ranks {
        let mut members = Vec::with_capacity(n);
        let mut max_tail = 0.0_f64;
        let mut min_alpha = 1.0_f64;
        let mut displacement = 0.0;
        let mut max_sqrt_tail = 0.0_f64;
        for (p, rho) in ensemble.members() {
            let (rho_d, tail) = truncate(rho, rank)?;
            let alpha = rho_d.trace().re;
            debug_assert!((alpha - (1.0 - tail)).abs() <= 1e-12);
            max_tail = max_tail.max(tail);
            min_alpha = min_alpha.min(alpha);
            displacement += n as f64 * p * tail;
            max_sqrt_tail = max_sqrt_tail.max(sqrt_tail_mass(rho, rank)?);
            members.push((*p, DensityOperator::new(rho_d.scale_re(1.0 / alpha))?));
        }
        let kb = crate::discrimination::knill_barnum_upper(&Ensemble::new(members)?);
        let dev = (kb - full_kb).abs();
        if let Some(prev) = rows.last() {
            assert!(
                displacement <= prev.bound + 1e-12,
                "displacement bound increased from {} to {displacement} at rank {rank}",
                prev.bound
            );
        }
        rows.push(TruncationRow {
            rank,
            tail: max_tail,
            alpha: min_alpha,
            fidelity_dev: None,
            kb_dev: Some(dev),
            bound: displacement,
            sqrt_tail: max_sqrt_tail,
        });
    }
    if let Some(last) = rows.last() {
        if last.rank == ensemble.dim() {
            assert!(
                last.kb_dev.unwrap() <= 1e-9,
                "full-rank KB deviation {} should vanish",
                last.kb_dev.unwrap()
            );
            assert!(last.bound <= 1e-12);
        }
    }
    Ok(TruncationStudy { rows })
}

/// Density operator with the normalized geometric spectrum ratio^k,
/// k = 1..dim, in a seeded Haar-random eigenbasis. The workhorse for
/// emulating trace-class operators with meaningful tails.
pub fn geometric_spectrum_state(dim: usize, ratio: f64, seed: u64) -> DensityOperator {
    assert!(dim >= 1 && ratio > 0.0 && ratio < 1.0);
    let raw: Vec<f64> = (1..=dim).map(|k| ratio.powi(k as i32)).collect();
    let total: f64 = raw.iter().sum();
    let mut stream = crate::random::SeedStream::new(seed);
    let u = crate::random::haar_unitary(dim, &mut stream.rng());
    let mut m = ComplexMatrix::zeros(dim);
    for (k, lam) in raw.iter().enumerate() {
        let col: Vec<num_complex::Complex64> = (0..dim).map(|i| u[(i, k)]).collect();
        m.add_scaled_outer(lam / total, &col);
    }
    DensityOperator::trusted(m.hermitian_part())
}
