//! Time evolution of unitarily related mixtures, autocorrelation and
//! cross-correlation diagnostics, bound sweeps over time, solvability
//! verdicts, and the closed-form qubit construction.
//!
//! Every statement about long-time behaviour made here is evidence over a
//! finite window: a finite-dimensional generator has pure point spectrum, so
//! absolutely continuous behaviour is only emulated up to the recurrence
//! time of the discretized spectrum. Verdicts carry that caveat verbatim.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{herm_eig, inner, unitary_from_eigen, vec_norm, ComplexMatrix};
use crate::states::{purity, DensityOperator, Ensemble, TRACE_TOL};

/// Caveat attached to every solvability verdict.
pub const FINITE_WINDOW_CAVEAT: &str = "finite-model evidence only: the generator has pure point \
spectrum, so decay is emulated on a window below the recurrence time and no t → ∞ limit is claimed";

/// Hermitian generator B with pairwise distinct coupling rates x_i; member i
/// of the mixture evolves by e^{-i t x_i B}.
#[derive(Debug, Clone)]
pub struct UnitaryFamily {
    generator: ComplexMatrix,
    rates: Vec<f64>,
}

impl UnitaryFamily {
    pub fn new(generator: ComplexMatrix, rates: Vec<f64>) -> Result<Self> {
        let dev = generator.hermiticity_deviation();
        if dev > crate::operator::HERM_TOL * generator.max_abs_entry().max(1.0) {
            return Err(Error::NotHermitian { max_dev: dev });
        }
        for i in 0..rates.len() {
            for j in (i + 1)..rates.len() {
                if rates[i] == rates[j] {
                    return Err(Error::DuplicateRates);
                }
            }
        }
        Ok(UnitaryFamily { generator, rates })
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn branches(&self) -> usize {
        self.rates.len()
    }
}

/// Spectral measure data of a reference vector: eigenvalues of the
/// generator and weights |⟨φ_k|ψ⟩|².
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralProfile {
    pub fn new(generator: &ComplexMatrix, psi: &[Complex64]) -> Result<Self> {
        let norm = vec_norm(psi);
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized(norm));
        }
        let eigen = herm_eig(generator)?;
        let d = generator.dim();
        let weights: Vec<f64> = (0..d)
            .map(|k| {
                let col = eigen.eigenvector(k);
                inner(&col, psi).norm_sqr()
            })
            .collect();
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() <= TRACE_TOL);
        Ok(SpectralProfile {
            eigenvalues: eigen.eigenvalues,
            weights,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// a(t) = ⟨ψ|e^{-itB}|ψ⟩ = Σ_k w_k e^{-itλ_k}.
    pub fn autocorrelation(&self, t: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .zip(&self.weights)
            .map(|(&l, &w)| Complex64::from_polar(w, -t * l))
            .sum()
    }

    /// Σ_k w_k², the Wiener limit of the time-averaged |a|² when the
    /// eigenvalues are pairwise distinct.
    pub fn point_mass_sum(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

/// ⟨ψ|e^{-itB}|ψ⟩ for a normalized reference vector.
pub fn autocorrelation(generator: &ComplexMatrix, psi: &[Complex64], t: f64) -> Result<Complex64> {
    Ok(SpectralProfile::new(generator, psi)?.autocorrelation(t))
}

/// ⟨φ|e^{-itB}|ψ⟩ for normalized φ, ψ. The decay of this cross-measure
/// transform on the same window as the autocorrelation is the numerical
/// content of the cross-measure statement.
pub fn cross_correlation(
    generator: &ComplexMatrix,
    phi: &[Complex64],
    psi: &[Complex64],
    t: f64,
) -> Result<Complex64> {
    for v in [phi, psi] {
        let norm = vec_norm(v);
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized(norm));
        }
    }
    let eigen = herm_eig(generator)?;
    let d = generator.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..d {
        let col = eigen.eigenvector(k);
        let amp = inner(phi, &col) * inner(&col, psi);
        acc += amp * Complex64::from_polar(1.0, -t * eigen.eigenvalues[k]);
    }
    Ok(acc)
}

/// Time average (1/T)∫₀ᵀ |a(t)|² dt by the trapezoid rule on `n_samples`
/// points. Converges to Σ_k w_k² (on distinct eigenvalues) as T grows.
pub fn wiener_average(
    generator: &ComplexMatrix,
    psi: &[Complex64],
    t_max: f64,
    n_samples: usize,
) -> Result<f64> {
    assert!(t_max > 0.0 && n_samples >= 2);
    let profile = SpectralProfile::new(generator, psi)?;
    let h = t_max / (n_samples - 1) as f64;
    let integral: f64 = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let value = profile.autocorrelation(k as f64 * h).norm_sqr();
            if k == 0 || k == n_samples - 1 {
                0.5 * value
            } else {
                value
            }
        })
        .sum::<f64>()
        * h;
    Ok(integral / t_max)
}

/// Weight profiles offered by the discretized model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightProfile {
    Uniform,
    RaisedCosine,
}

/// Finite stand-in for an absolutely continuous spectrum: a diagonal
/// generator with d evenly spaced eigenvalues on [a, b] and a reference
/// vector carrying the chosen weight profile. Behaves AC-like only up to
/// the recurrence time 2π(d-1)/(b-a).
#[derive(Debug, Clone)]
pub struct AcModel {
    pub generator: ComplexMatrix,
    pub psi: Vec<Complex64>,
    pub recurrence_time: f64,
    pub label: String,
}

pub fn discretized_ac_model(d: usize, interval: (f64, f64), profile: WeightProfile) -> AcModel {
    let (a, b) = interval;
    assert!(d >= 2 && a < b, "need d ≥ 2 and a < b");
    let spacing = (b - a) / (d - 1) as f64;
    let eigenvalues: Vec<f64> = (0..d).map(|k| a + k as f64 * spacing).collect();

    let raw: Vec<f64> = match profile {
        WeightProfile::Uniform => vec![1.0; d],
        // Midpoint-sampled raised cosine: strictly positive, peaked at the
        // center, vanishing toward the edges.
        WeightProfile::RaisedCosine => (0..d)
            .map(|k| 1.0 - (std::f64::consts::TAU * (k as f64 + 0.5) / d as f64).cos())
            .collect(),
    };
    let total: f64 = raw.iter().sum();
    let psi: Vec<Complex64> = raw
        .iter()
        .map(|w| Complex64::new((w / total).sqrt(), 0.0))
        .collect();

    let tag = match profile {
        WeightProfile::Uniform => "uniform",
        WeightProfile::RaisedCosine => "raised-cosine",
    };
    AcModel {
        generator: ComplexMatrix::diag(&eigenvalues),
        psi,
        recurrence_time: std::f64::consts::TAU / spacing,
        label: format!("ac-d{d}-{tag}[{a},{b}]"),
    }
}

/// Evolved ensemble {p_i, e^{-i t x_i B} ρ_i e^{i t x_i B}}.
pub fn evolve_ensemble(
    family: &UnitaryFamily,
    base: &[DensityOperator],
    weights: &[f64],
    t: f64,
) -> Result<Ensemble> {
    if base.len() != family.branches() || weights.len() != family.branches() {
        return Err(Error::DimensionMismatch {
            left: base.len(),
            right: family.branches(),
        });
    }
    let eigen = herm_eig(family.generator())?;
    let members = family
        .rates()
        .iter()
        .zip(base.iter().zip(weights))
        .map(|(&x, (rho, &p))| {
            let u = unitary_from_eigen(&eigen, t * x);
            (p, rho.conjugated(&u))
        })
        .collect();
    Ensemble::new(members)
}

/// Which quantity a time sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepQuantity {
    /// Knill-Barnum upper bound.
    Kb,
    /// Montanaro lower bound.
    Montanaro,
    /// Exact Helstrom error (two branches only).
    Hellstrom,
}

impl SweepQuantity {
    pub fn is_upper_bound(self) -> bool {
        matches!(self, SweepQuantity::Kb | SweepQuantity::Hellstrom)
    }

    pub fn is_lower_bound(self) -> bool {
        matches!(self, SweepQuantity::Montanaro | SweepQuantity::Hellstrom)
    }
}

/// Uniform time grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        assert!(points >= 2 && stop > start);
        TimeGrid { start, stop, points }
    }

    pub fn values(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|k| self.start + k as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepMetadata {
    pub model: String,
    pub rates: Vec<f64>,
    pub quantity: SweepQuantity,
    /// Known oscillation period of the swept quantity, when the model has
    /// one in closed form (the qubit construction).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_period: Option<f64>,
}

/// Values of one named quantity over a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn with_model_label(mut self, label: impl Into<String>) -> Self {
        self.metadata.model = label.into();
        self
    }

    pub fn with_analytic_period(mut self, period: f64) -> Self {
        self.metadata.analytic_period = Some(period);
        self
    }
}

/// All base states equal and pure ⇒ the sweep reduces to inner products of
/// evolved vectors. Returns the common state vector if so.
fn common_pure_state(base: &[DensityOperator]) -> Option<Vec<Complex64>> {
    let first = &base[0];
    if (purity(first) - 1.0).abs() > 1e-12 {
        return None;
    }
    for other in &base[1..] {
        if first.matrix().sub(other.matrix()).max_abs_entry() > 1e-14 {
            return None;
        }
    }
    let eigen = herm_eig(first.matrix()).ok()?;
    Some(eigen.eigenvector(first.dim() - 1))
}

fn pure_pair_fidelities(coeffs: &[Complex64], eigenvalues: &[f64], rates: &[f64], t: f64) -> Vec<Vec<f64>> {
    let n = rates.len();
    // ⟨ψ_i(t)|ψ_j(t)⟩ = Σ_k |c_k|² e^{-i t (x_j - x_i) λ_k}, evaluated from
    // the evolved coefficient vectors.
    let evolved: Vec<Vec<Complex64>> = rates
        .iter()
        .map(|&x| {
            coeffs
                .iter()
                .zip(eigenvalues)
                .map(|(c, &l)| c * Complex64::from_polar(1.0, -t * x * l))
                .collect()
        })
        .collect();
    let mut f = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let overlap = inner(&evolved[i], &evolved[j]).norm_sqr();
            f[i][j] = overlap;
            f[j][i] = overlap;
        }
    }
    f
}

/// Evaluates the named quantity at every grid time for the unitarily
/// related mixture of `base` states.
///
/// When every branch shares one pure base state, the sweep runs through
/// evolved state vectors, and the Knill-Barnum values are cross-checked
/// pointwise against the direct autocorrelation formula
/// Σ_{i≠j} √(p_i p_j) |a((x_j - x_i) t)|.
pub fn bound_sweep(
    family: &UnitaryFamily,
    base: &[DensityOperator],
    weights: &[f64],
    grid: &TimeGrid,
    which: SweepQuantity,
) -> Result<SweepResult> {
    let n = family.branches();
    if base.len() != n || weights.len() != n {
        return Err(Error::DimensionMismatch {
            left: base.len(),
            right: n,
        });
    }
    if which == SweepQuantity::Hellstrom && n != 2 {
        return Err(Error::UnsupportedCombination(
            "hellstrom sweep requires exactly two branches".into(),
        ));
    }
    let times = grid.values();

    let values: Vec<f64> = if let Some(psi) = common_pure_state(base) {
        let eigen = herm_eig(family.generator())?;
        let coeffs: Vec<Complex64> = (0..psi.len())
            .map(|k| inner(&eigen.eigenvector(k), &psi))
            .collect();
        let profile = SpectralProfile::new(family.generator(), &psi)?;
        let rates = family.rates().to_vec();
        let eigenvalues = eigen.eigenvalues.clone();
        times
            .par_iter()
            .map(|&t| {
                let f = pure_pair_fidelities(&coeffs, &eigenvalues, &rates, t);
                match which {
                    SweepQuantity::Kb => {
                        let mut kb = 0.0;
                        let mut direct = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                if i == j {
                                    continue;
                                }
                                let pw = (weights[i] * weights[j]).sqrt();
                                kb += pw * f[i][j].sqrt();
                                direct += pw * profile.autocorrelation((rates[j] - rates[i]) * t).norm();
                            }
                        }
                        assert!(
                            (kb - direct).abs() <= 1e-9,
                            "KB sweep {kb} disagrees with the autocorrelation formula {direct} at t = {t}"
                        );
                        kb
                    }
                    SweepQuantity::Montanaro => {
                        let mut m = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                if i != j {
                                    m += weights[i] * weights[j] * f[i][j];
                                }
                            }
                        }
                        0.5 * m
                    }
                    SweepQuantity::Hellstrom => {
                        0.5 * (1.0 - (1.0 - 4.0 * weights[0] * weights[1] * f[0][1]).max(0.0).sqrt())
                    }
                }
            })
            .collect()
    } else {
        times
            .par_iter()
            .map(|&t| -> Result<f64> {
                let ensemble = evolve_ensemble(family, base, weights, t)?;
                Ok(match which {
                    SweepQuantity::Kb => crate::discrimination::knill_barnum_upper(&ensemble),
                    SweepQuantity::Montanaro => crate::discrimination::montanaro_lower(&ensemble),
                    SweepQuantity::Hellstrom => {
                        crate::discrimination::hellstrom(
                            ensemble.weight(0),
                            ensemble.state(0),
                            ensemble.weight(1),
                            ensemble.state(1),
                        )?
                        .0
                    }
                })
            })
            .collect::<Result<Vec<f64>>>()?
    };

    Ok(SweepResult {
        grid: times,
        values,
        metadata: SweepMetadata {
            model: format!("urm-dim{}-N{}", base[0].dim(), n),
            rates: family.rates().to_vec(),
            quantity: which,
            analytic_period: None,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    FullySolvableEvidence,
    NotFullySolvableEvidence,
    Inconclusive,
}

/// Verdict plus the statistics that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    /// Which rule fired (or why none did).
    pub rule: String,
    pub threshold: f64,
    pub window: (f64, f64),
    pub max_over_window: f64,
    pub min_over_window: f64,
    /// Smallest per-subwindow peak of a lower-bound sweep, when the
    /// recurrence rule was evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_subwindow_peak: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    pub subwindows: usize,
    pub caveat: String,
}

/// Dominant-period estimate from the discrete Fourier transform of the
/// mean-removed sweep values; `None` when the signal is flat.
fn dominant_period(times: &[f64], values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 4 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let scale = centered.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale <= 1e-12 {
        return None;
    }
    let mut best_k = 0;
    let mut best_mag = 0.0;
    for k in 1..=(n / 2) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &v) in centered.iter().enumerate() {
            acc += Complex64::from_polar(v, -std::f64::consts::TAU * (k * j) as f64 / n as f64);
        }
        let mag = acc.norm();
        if mag > best_mag {
            best_mag = mag;
            best_k = k;
        }
    }
    if best_k == 0 {
        return None;
    }
    let span = times[n - 1] - times[0];
    Some(span / best_k as f64)
}

/// Decides between fully-solvable evidence (an upper-bound sweep stays below
/// the threshold across the window), not-fully-solvable evidence (a
/// lower-bound sweep rises back above the threshold in every period-length
/// subwindow), or inconclusive.
pub fn solvability_verdict(
    sweep: &SweepResult,
    decay_threshold: f64,
    window: (f64, f64),
) -> Result<VerdictReport> {
    let (lo, hi) = window;
    let (grid_lo, grid_hi) = (sweep.grid[0], *sweep.grid.last().unwrap());
    if lo < grid_lo - 1e-12 || hi > grid_hi + 1e-12 || lo >= hi {
        return Err(Error::WindowOutOfRange { lo, hi });
    }
    let indexed: Vec<(f64, f64)> = sweep
        .grid
        .iter()
        .zip(&sweep.values)
        .filter(|(&t, _)| t >= lo && t <= hi)
        .map(|(&t, &v)| (t, v))
        .collect();
    if indexed.len() < 2 {
        return Err(Error::WindowOutOfRange { lo, hi });
    }
    let max_over_window = indexed.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    let min_over_window = indexed.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let quantity = sweep.metadata.quantity;

    if quantity.is_upper_bound() && max_over_window <= decay_threshold {
        return Ok(VerdictReport {
            verdict: Verdict::FullySolvableEvidence,
            rule: format!(
                "upper-bound sweep stayed ≤ {decay_threshold} across the window (max {max_over_window:.3e})"
            ),
            threshold: decay_threshold,
            window,
            max_over_window,
            min_over_window,
            min_subwindow_peak: None,
            period: None,
            subwindows: 1,
            caveat: FINITE_WINDOW_CAVEAT.into(),
        });
    }

    if quantity.is_lower_bound() {
        let times: Vec<f64> = indexed.iter().map(|&(t, _)| t).collect();
        let vals: Vec<f64> = indexed.iter().map(|&(_, v)| v).collect();
        let period = sweep
            .metadata
            .analytic_period
            .or_else(|| dominant_period(&times, &vals));
        // A flat sweep has no recurrence scale; treat the window as one piece.
        let span = hi - lo;
        let sub_len = period.unwrap_or(span).min(span);
        let count = (span / sub_len).floor().max(1.0) as usize;
        let mut min_peak = f64::INFINITY;
        for w in 0..count {
            let (a, b) = (lo + w as f64 * sub_len, lo + (w + 1) as f64 * sub_len);
            let peak = indexed
                .iter()
                .filter(|(t, _)| *t >= a - 1e-12 && *t <= b + 1e-12)
                .map(|&(_, v)| v)
                .fold(f64::NEG_INFINITY, f64::max);
            min_peak = min_peak.min(peak);
        }
        if min_peak >= decay_threshold {
            return Ok(VerdictReport {
                verdict: Verdict::NotFullySolvableEvidence,
                rule: format!(
                    "lower-bound sweep recurs above {decay_threshold} in each of {count} period-length subwindows (weakest peak {min_peak:.3e})"
                ),
                threshold: decay_threshold,
                window,
                max_over_window,
                min_over_window,
                min_subwindow_peak: Some(min_peak),
                period,
                subwindows: count,
                caveat: FINITE_WINDOW_CAVEAT.into(),
            });
        }
        return Ok(VerdictReport {
            verdict: Verdict::Inconclusive,
            rule: "neither decay nor recurrence was established on the window".into(),
            threshold: decay_threshold,
            window,
            max_over_window,
            min_over_window,
            min_subwindow_peak: Some(min_peak),
            period,
            subwindows: count,
            caveat: FINITE_WINDOW_CAVEAT.into(),
        });
    }

    Ok(VerdictReport {
        verdict: Verdict::Inconclusive,
        rule: "upper-bound sweep exceeded the threshold on the window".into(),
        threshold: decay_threshold,
        window,
        max_over_window,
        min_over_window,
        min_subwindow_peak: None,
        period: None,
        subwindows: 1,
        caveat: FINITE_WINDOW_CAVEAT.into(),
    })
}

/// The closed-form qubit pair: both states evolve from |0⟩⟨0| under
/// e^{-i t x σ_x}, giving populations cos²(t x), sin²(t x) and purely
/// imaginary coherences.
#[derive(Debug, Clone)]
pub struct QubitExample {
    pub state1: DensityOperator,
    pub state2: DensityOperator,
    pub error: f64,
}

fn qubit_state(theta: f64) -> DensityOperator {
    let (s, c) = theta.sin_cos();
    let m = ComplexMatrix::from_rows(&[
        vec![Complex64::new(c * c, 0.0), Complex64::new(0.0, c * s)],
        vec![Complex64::new(0.0, -c * s), Complex64::new(s * s, 0.0)],
    ]);
    DensityOperator::trusted(m)
}

/// σ_x as the generator of the qubit construction.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    ])
}

/// Equal-weight Helstrom error of the closed-form qubit pair at time t,
/// cross-checked against the generic evolution path.
pub fn qubit_example(t: f64, x1: f64, x2: f64) -> Result<QubitExample> {
    if x1 == x2 {
        return Err(Error::DuplicateRates);
    }
    let state1 = qubit_state(t * x1);
    let state2 = qubit_state(t * x2);

    // Generic path: evolve |0⟩⟨0| through unitary exponentials of σ_x.
    let family = UnitaryFamily::new(pauli_x(), vec![x1, x2])?;
    let zero = DensityOperator::pure(&crate::operator::basis_vector(2, 0))?;
    let evolved = evolve_ensemble(&family, &[zero.clone(), zero], &[0.5, 0.5], t)?;
    for (closed, generic) in [(&state1, evolved.state(0)), (&state2, evolved.state(1))] {
        let dev = closed.matrix().sub(generic.matrix()).max_abs_entry();
        assert!(dev <= 1e-10, "closed form deviates from evolution by {dev:e}");
    }

    let (error, _) = crate::discrimination::hellstrom(0.5, &state1, 0.5, &state2)?;
    Ok(QubitExample { state1, state2, error })
}

/// Helstrom error sweep of the qubit construction, with its analytic
/// period π/|x₂ - x₁| recorded for the verdict machinery.
pub fn qubit_example_sweep(grid: &TimeGrid, x1: f64, x2: f64) -> Result<SweepResult> {
    let times = grid.values();
    let values: Vec<f64> = times
        .par_iter()
        .map(|&t| qubit_example(t, x1, x2).map(|q| q.error))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SweepResult {
        grid: times,
        values,
        metadata: SweepMetadata {
            model: "qubit-example".into(),
            rates: vec![x1, x2],
            quantity: SweepQuantity::Hellstrom,
            analytic_period: Some(std::f64::consts::PI / (x2 - x1).abs()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::basis_vector;

    fn ket_plus() -> Vec<Complex64> {
        let s = 1.0 / 2f64.sqrt();
        vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)]
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::diag(&[1.0, -1.0])
    }

    #[test]
    fn family_rejects_duplicate_rates() {
        assert!(matches!(
            UnitaryFamily::new(pauli_z(), vec![0.0, 1.0, 1.0]),
            Err(Error::DuplicateRates)
        ));
    }

    #[test]
    fn autocorrelation_examples() {
        // Eigenvector: point mass, |a| ≡ 1.
        let a = autocorrelation(&pauli_z(), &basis_vector(2, 0), 3.7).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-12);

        // σ_z with |+⟩: a(t) = cos t.
        for t in [0.0, 0.4, 1.9, 12.0] {
            let a = autocorrelation(&pauli_z(), &ket_plus(), t).unwrap();
            assert!((a - Complex64::new(t.cos(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn autocorrelation_matches_direct_sum_on_grid_model() {
        let model = discretized_ac_model(256, (0.0, 1.0), WeightProfile::Uniform);
        let profile = SpectralProfile::new(&model.generator, &model.psi).unwrap();
        for t in [0.3, 5.0, 77.0, 400.0] {
            // Independent oracle: direct summation over the known spectrum.
            let oracle: Complex64 = (0..256)
                .map(|k| Complex64::from_polar(1.0 / 256.0, -t * k as f64 / 255.0))
                .sum();
            assert!((profile.autocorrelation(t) - oracle).norm() < 1e-12);
        }
        // Decay on the plateau window, before the recurrence.
        for t in [50.0, 120.0, 400.0, model.recurrence_time / 2.0] {
            assert!(profile.autocorrelation(t).norm() <= 0.05);
        }
        assert!((profile.autocorrelation(model.recurrence_time).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_point_model_reduces_to_the_two_level_case() {
        // d = 2 on [-1, 1] with uniform weights: |a(t)| = |cos t|.
        let model = discretized_ac_model(2, (-1.0, 1.0), WeightProfile::Uniform);
        let profile = SpectralProfile::new(&model.generator, &model.psi).unwrap();
        for t in [0.0, 0.3, 2.2, 9.0] {
            assert!((profile.autocorrelation(t).norm() - t.cos().abs()).abs() < 1e-12);
        }
        assert!((model.recurrence_time - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn raised_cosine_has_faster_sidelobes() {
        let uniform = discretized_ac_model(128, (0.0, 1.0), WeightProfile::Uniform);
        let hann = discretized_ac_model(128, (0.0, 1.0), WeightProfile::RaisedCosine);
        let pu = SpectralProfile::new(&uniform.generator, &uniform.psi).unwrap();
        let ph = SpectralProfile::new(&hann.generator, &hann.psi).unwrap();
        let sidelobe = |p: &SpectralProfile| -> f64 {
            (30..200).map(|k| p.autocorrelation(k as f64).norm()).fold(0.0, f64::max)
        };
        assert!(sidelobe(&ph) < sidelobe(&pu) / 2.0);
    }

    #[test]
    fn cross_correlation_examples() {
        let b = pauli_z();
        // Distinct eigenvectors: identically zero.
        for t in [0.0, 1.0, 8.5] {
            let c = cross_correlation(&b, &basis_vector(2, 0), &basis_vector(2, 1), t).unwrap();
            assert!(c.norm() < 1e-14);
        }
        // φ = ψ reduces to the autocorrelation.
        let plus = ket_plus();
        for t in [0.2, 2.7] {
            let c = cross_correlation(&b, &plus, &plus, t).unwrap();
            let a = autocorrelation(&b, &plus, t).unwrap();
            assert!((c - a).norm() < 1e-12);
        }
    }

    #[test]
    fn cross_correlation_decays_with_autocorrelation() {
        let model = discretized_ac_model(128, (0.0, 1.0), WeightProfile::Uniform);
        let smooth = discretized_ac_model(128, (0.0, 1.0), WeightProfile::RaisedCosine);
        let t_plateau = [40.0, 90.0, 200.0];
        for t in t_plateau {
            let cross = cross_correlation(&model.generator, &smooth.psi, &model.psi, t).unwrap();
            assert!(cross.norm() <= 0.1, "cross-correlation {:.3} at t = {t}", cross.norm());
        }
    }

    #[test]
    fn wiener_average_examples() {
        // Eigenvector: constant |a| = 1, so the average is 1 at any T.
        let w = wiener_average(&pauli_z(), &basis_vector(2, 0), 10.0, 501).unwrap();
        assert!((w - 1.0).abs() < 1e-12);

        // σ_z / |+⟩: average of cos² is 1/2.
        let w = wiener_average(&pauli_z(), &ket_plus(), 1000.0, 20_001).unwrap();
        assert!((w - 0.5).abs() <= 0.01);

        let model = discretized_ac_model(256, (0.0, 1.0), WeightProfile::Uniform);
        let w = wiener_average(&model.generator, &model.psi, 2000.0, 40_001).unwrap();
        assert!((w - 1.0 / 256.0).abs() <= 0.01);

        // Point-mass lower bound.
        let profile = SpectralProfile::new(&model.generator, &model.psi).unwrap();
        assert!(w >= profile.point_mass_sum() - 0.01);
    }

    #[test]
    fn evolve_preserves_spectra_and_t_zero() {
        let family = UnitaryFamily::new(pauli_x(), vec![0.0, 1.0]).unwrap();
        let zero = DensityOperator::pure(&basis_vector(2, 0)).unwrap();
        let base = [zero.clone(), zero.clone()];

        let at_zero = evolve_ensemble(&family, &base, &[0.5, 0.5], 0.0).unwrap();
        for i in 0..2 {
            assert!(at_zero.state(i).matrix().sub(zero.matrix()).max_abs_entry() < 1e-12);
        }

        let t = 0.9;
        let evolved = evolve_ensemble(&family, &base, &[0.5, 0.5], t).unwrap();
        // Populations cos²(t x_i), sin²(t x_i).
        assert!((evolved.state(1).matrix()[(0, 0)].re - t.cos().powi(2)).abs() < 1e-12);
        // Unitary conjugation preserves eigenvalues (here: purity).
        for i in 0..2 {
            assert!((purity(evolved.state(i)) - 1.0).abs() < 1e-10);
            evolved.state(i).validate().unwrap();
        }
    }

    #[test]
    fn qubit_example_closed_form() {
        // x = (0, 1): the error is ½ - ½|sin t|.
        for t in [0.0, 0.3, 1.2, 2.0, 7.7] {
            let q = qubit_example(t, 0.0, 1.0).unwrap();
            assert!((q.error - (0.5 - 0.5 * t.sin().abs())).abs() < 1e-10);
        }
        // Orthogonal at t(x2 - x1) = π/2.
        let q = qubit_example(std::f64::consts::FRAC_PI_2, 0.0, 1.0).unwrap();
        assert!(q.error < 1e-10);
        // Periodic with period π/|Δx|.
        let period = std::f64::consts::PI / 0.7;
        for t in [0.1, 1.3, 4.0] {
            let a = qubit_example(t, 0.3, 1.0).unwrap().error;
            let b = qubit_example(t + period, 0.3, 1.0).unwrap().error;
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn kb_sweep_pure_path_matches_general_path() {
        let model = discretized_ac_model(12, (0.0, 1.0), WeightProfile::Uniform);
        let family = UnitaryFamily::new(model.generator.clone(), vec![0.0, 1.0, 2.0]).unwrap();
        let pure = DensityOperator::pure(&model.psi).unwrap();
        let base = vec![pure; 3];
        let weights = [1.0 / 3.0; 3];
        let grid = TimeGrid::new(0.0, 5.0, 21);

        let fast = bound_sweep(&family, &base, &weights, &grid, SweepQuantity::Kb).unwrap();

        // Force the general matrix path with an imperceptibly mixed state.
        let eps = 1e-6;
        let mixed = Ensemble::pair(
            1.0 - eps,
            DensityOperator::pure(&model.psi).unwrap(),
            eps,
            DensityOperator::new(ComplexMatrix::identity(12).scale_re(1.0 / 12.0)).unwrap(),
        )
        .unwrap()
        .mix();
        let base_mixed = vec![mixed; 3];
        let slow = bound_sweep(&family, &base_mixed, &weights, &grid, SweepQuantity::Kb).unwrap();

        for (f, s) in fast.values.iter().zip(&slow.values) {
            assert!((f - s).abs() < 1e-3, "pure path {f} vs general path {s}");
        }
    }

    #[test]
    fn sweep_at_t_zero_saturates_kb() {
        let model = discretized_ac_model(8, (0.0, 1.0), WeightProfile::Uniform);
        let family = UnitaryFamily::new(model.generator.clone(), vec![0.0, 1.0, 3.0]).unwrap();
        let pure = DensityOperator::pure(&model.psi).unwrap();
        let weights = [0.5, 0.25, 0.25];
        let grid = TimeGrid::new(0.0, 1.0, 3);
        let sweep = bound_sweep(&family, &vec![pure; 3], &weights, &grid, SweepQuantity::Kb).unwrap();
        // At t = 0 all branches coincide: KB = Σ_{i≠j} √(p_i p_j).
        let expected: f64 = {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        acc += (weights[i] * weights[j]).sqrt();
                    }
                }
            }
            acc
        };
        assert!((sweep.values[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn hellstrom_sweep_needs_two_branches() {
        let model = discretized_ac_model(8, (0.0, 1.0), WeightProfile::Uniform);
        let family = UnitaryFamily::new(model.generator.clone(), vec![0.0, 1.0, 2.0]).unwrap();
        let pure = DensityOperator::pure(&model.psi).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 3);
        let out = bound_sweep(
            &family,
            &vec![pure; 3],
            &[1.0 / 3.0; 3],
            &grid,
            SweepQuantity::Hellstrom,
        );
        assert!(matches!(out, Err(Error::UnsupportedCombination(_))));
    }

    #[test]
    fn verdict_rules() {
        // Orthogonal static ensemble: a KB sweep that is identically zero.
        let zero_sweep = SweepResult {
            grid: (0..101).map(|k| k as f64).collect(),
            values: vec![0.0; 101],
            metadata: SweepMetadata {
                model: "static".into(),
                rates: vec![0.0, 1.0],
                quantity: SweepQuantity::Kb,
                analytic_period: None,
            },
        };
        let report = solvability_verdict(&zero_sweep, 0.1, (10.0, 90.0)).unwrap();
        assert_eq!(report.verdict, Verdict::FullySolvableEvidence);
        assert_eq!(report.caveat, FINITE_WINDOW_CAVEAT);

        // Qubit example: the Montanaro sweep recurs each period.
        let grid = TimeGrid::new(0.0, 10.0 * std::f64::consts::PI, 2001);
        let family = UnitaryFamily::new(pauli_x(), vec![0.0, 1.0]).unwrap();
        let zero = DensityOperator::pure(&basis_vector(2, 0)).unwrap();
        let sweep = bound_sweep(&family, &[zero.clone(), zero], &[0.5, 0.5], &grid, SweepQuantity::Montanaro)
            .unwrap()
            .with_analytic_period(std::f64::consts::PI);
        let report = solvability_verdict(&sweep, 0.1, (0.0, 10.0 * std::f64::consts::PI)).unwrap();
        assert_eq!(report.verdict, Verdict::NotFullySolvableEvidence);
        assert!(report.subwindows >= 9);
        assert!(report.min_subwindow_peak.unwrap() >= 0.24);

        // Out-of-range window.
        assert!(matches!(
            solvability_verdict(&sweep, 0.1, (0.0, 100.0)),
            Err(Error::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn dft_period_estimate_close_to_analytic() {
        let grid = TimeGrid::new(0.0, 10.0 * std::f64::consts::PI, 2001);
        let family = UnitaryFamily::new(pauli_x(), vec![0.0, 1.0]).unwrap();
        let zero = DensityOperator::pure(&basis_vector(2, 0)).unwrap();
        let sweep =
            bound_sweep(&family, &[zero.clone(), zero], &[0.5, 0.5], &grid, SweepQuantity::Montanaro).unwrap();
        let est = dominant_period(&sweep.grid, &sweep.values).unwrap();
        assert!(
            (est - std::f64::consts::PI).abs() < 0.35,
            "estimated period {est}"
        );
    }
}
