//! Declarative scenario runner: parses a JSON scenario, executes the named
//! study, writes `<prefix>.csv` and `<prefix>.json`, and returns a one-line
//! summary. Artifacts are byte-deterministic for a fixed scenario and seed.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discrimination::{
    bounds_report, chernoff, hellstrom, tensor_power_study, BoundsReport, ChernoffReport,
    TensorPowerStudy,
};
use crate::dynamics::{
    bound_sweep, discretized_ac_model, qubit_example_sweep, solvability_verdict, AcModel,
    SweepQuantity, SweepResult, TimeGrid, UnitaryFamily, VerdictReport, WeightProfile,
};
use crate::error::{Error, Result};
use crate::operator::basis_vector;
use crate::states::{DensityOperator, Ensemble};
use crate::truncation::{
    fidelity_convergence_study, geometric_spectrum_state, kb_convergence_study, TruncationStudy,
};
use crate::uncountable::{
    separation_harness, fidelity_inequality_suite, n_mixture, uqsd_pipeline, SeparationHarnessParams,
    SeparationReport, DensitySpec, InequalityReport, QuadratureScheme,
};

/// Reference vector for a discretized model: either the model's own weight
/// profile or a single eigenvector of the generator (point spectrum).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiSpec {
    #[default]
    Profile,
    Eigenvector { index: usize },
}

/// Discretized absolutely-continuous-like model parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcModelSpec {
    pub dim: usize,
    pub interval: (f64, f64),
    #[serde(default = "default_profile")]
    pub profile: WeightProfile,
    #[serde(default)]
    pub psi: Option<PsiSpec>,
}

fn default_profile() -> WeightProfile {
    WeightProfile::Uniform
}

impl AcModelSpec {
    fn build(&self) -> (AcModel, Vec<Complex64>) {
        let model = discretized_ac_model(self.dim, self.interval, self.profile);
        let psi = match self.psi.clone().unwrap_or_default() {
            PsiSpec::Profile => model.psi.clone(),
            PsiSpec::Eigenvector { index } => basis_vector(self.dim, index),
        };
        (model, psi)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.dim < 2 {
            return Err("model dim must be at least 2".into());
        }
        if self.interval.0 >= self.interval.1 {
            return Err("model interval must satisfy a < b".into());
        }
        if let Some(PsiSpec::Eigenvector { index }) = &self.psi {
            if *index >= self.dim {
                return Err(format!("eigenvector index {index} out of range for dim {}", self.dim));
            }
        }
        Ok(())
    }
}

/// Time-evolution model of a unitarily related mixture sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UrmModelSpec {
    /// |0⟩⟨0| under e^{-i t x σ_x} at two rates.
    QubitExample { x1: f64, x2: f64 },
    /// Pure reference state of a discretized model at arbitrary rates.
    DiscretizedAc {
        #[serde(flatten)]
        model: AcModelSpec,
        rates: Vec<f64>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
}

/// Optional verdict evaluation attached to a sweep scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictSpec {
    pub threshold: f64,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationKind {
    Fidelity,
    Kb,
}

/// A runnable scenario; the JSON form is tagged by `kind`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scenario {
    Hellstrom {
        out_prefix: String,
        #[serde(default)]
        seed: u64,
        p1: f64,
        state1: DensityOperator,
        p2: f64,
        state2: DensityOperator,
    },
    Bounds {
        out_prefix: String,
        #[serde(default)]
        seed: u64,
        ensemble: Ensemble,
    },
    UrmSweep {
        out_prefix: String,
        #[serde(default)]
        seed: u64,
        model: UrmModelSpec,
        grid: TimeGrid,
        quantity: SweepQuantity,
        #[serde(default)]
        verdict: Option<VerdictSpec>,
    },
    Chernoff {
        out_prefix: String,
        #[serde(default)]
        seed: u64,
        ensemble: Ensemble,
    },
    TensorPower {
        out_prefix: String,
        #[serde(default)]
        seed: u64,
        p1: f64,
        /// Interleaved re/im amplitudes.
        psi1: Vec<f64>,
        p2: f64,
        psi2: Vec<f64>,
        n_max: u32,
        #[serde(default = "default_explicit_cap")]
        explicit_n_cap: u32,
    },
    Nmixture {
        out_prefix: String,
        #[serde(default)]
        seed: u64,
        model: AcModelSpec,
        density: DensitySpec,
        partition: Vec<(f64, f64)>,
        nodes_per_component: usize,
        times: Vec<f64>,
    },
    Claim13 {
        out_prefix: String,
        #[serde(default)]
        seed: u64,
        model: AcModelSpec,
        c: f64,
        eps1: f64,
        eps2: f64,
        nodes_per_component: usize,
        t_search: f64,
        #[serde(default = "default_fid_samples")]
        fidelity_samples: usize,
    },
    Truncation {
        out_prefix: String,
        #[serde(default)]
        seed: u64,
        dim: usize,
        #[serde(default = "default_ratio")]
        ratio: f64,
        ranks: Vec<usize>,
        study: TruncationKind,
    },
    InequalitySuite {
        out_prefix: String,
        #[serde(default)]
        seed: u64,
        trials: usize,
    },
}

fn default_explicit_cap() -> u32 {
    6
}

fn default_fid_samples() -> usize {
    3
}

fn default_ratio() -> f64 {
    0.5
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Hellstrom { .. } => "hellstrom",
            Scenario::Bounds { .. } => "bounds",
            Scenario::UrmSweep { .. } => "urm-sweep",
            Scenario::Chernoff { .. } => "chernoff",
            Scenario::TensorPower { .. } => "tensor-power",
            Scenario::Nmixture { .. } => "nmixture",
            Scenario::Claim13 { .. } => "claim13",
            Scenario::Truncation { .. } => "truncation",
            Scenario::InequalitySuite { .. } => "inequality-suite",
        }
    }

    pub fn out_prefix(&self) -> &str {
        match self {
            Scenario::Hellstrom { out_prefix, .. }
            | Scenario::Bounds { out_prefix, .. }
            | Scenario::UrmSweep { out_prefix, .. }
            | Scenario::Chernoff { out_prefix, .. }
            | Scenario::TensorPower { out_prefix, .. }
            | Scenario::Nmixture { out_prefix, .. }
            | Scenario::Claim13 { out_prefix, .. }
            | Scenario::Truncation { out_prefix, .. }
            | Scenario::InequalitySuite { out_prefix, .. } => out_prefix,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Scenario::Hellstrom { seed, .. }
            | Scenario::Bounds { seed, .. }
            | Scenario::UrmSweep { seed, .. }
            | Scenario::Chernoff { seed, .. }
            | Scenario::TensorPower { seed, .. }
            | Scenario::Nmixture { seed, .. }
            | Scenario::Claim13 { seed, .. }
            | Scenario::Truncation { seed, .. }
            | Scenario::InequalitySuite { seed, .. } => *seed,
        }
    }

    /// Parameter validation; runs before any numerics.
    pub fn validate(&self) -> std::result::Result<(), String> {
        match self {
            Scenario::Hellstrom { p1, p2, state1, state2, .. } => {
                if (p1 + p2 - 1.0).abs() > crate::states::TRACE_TOL {
                    return Err(format!("weights must sum to 1, got {}", p1 + p2));
                }
                if state1.dim() != state2.dim() {
                    return Err("states must share a dimension".into());
                }
                Ok(())
            }
            Scenario::Bounds { ensemble, .. } | Scenario::Chernoff { ensemble, .. } => {
                if ensemble.len() < 2 {
                    return Err("ensemble needs at least two members".into());
                }
                Ok(())
            }
            Scenario::UrmSweep { model, grid, quantity, verdict, .. } => {
                if grid.points < 2 || grid.stop <= grid.start {
                    return Err("grid needs points ≥ 2 and stop > start".into());
                }
                match model {
                    UrmModelSpec::QubitExample { x1, x2 } => {
                        if x1 == x2 {
                            return Err("qubit example needs x1 ≠ x2".into());
                        }
                    }
                    UrmModelSpec::DiscretizedAc { model, rates, weights } => {
                        model.validate()?;
                        if rates.len() < 2 {
                            return Err("need at least two rates".into());
                        }
                        for i in 0..rates.len() {
                            for j in (i + 1)..rates.len() {
                                if rates[i] == rates[j] {
                                    return Err("rates must be pairwise distinct".into());
                                }
                            }
                        }
                        if let Some(w) = weights {
                            if w.len() != rates.len() {
                                return Err("weights and rates must have equal length".into());
                            }
                            if w.iter().any(|p| *p < 0.0)
                                || (w.iter().sum::<f64>() - 1.0).abs() > crate::states::TRACE_TOL
                            {
                                return Err("weights must be nonnegative and sum to 1".into());
                            }
                        }
                        if *quantity == SweepQuantity::Hellstrom && rates.len() != 2 {
                            return Err("hellstrom sweeps need exactly two rates".into());
                        }
                    }
                }
                if let Some(v) = verdict {
                    if v.threshold <= 0.0 {
                        return Err("verdict threshold must be positive".into());
                    }
                    if v.window.0 < grid.start || v.window.1 > grid.stop || v.window.0 >= v.window.1 {
                        return Err("verdict window must lie inside the grid span".into());
                    }
                }
                Ok(())
            }
            Scenario::TensorPower { p1, psi1, p2, psi2, n_max, explicit_n_cap, .. } => {
                if (p1 + p2 - 1.0).abs() > crate::states::TRACE_TOL {
                    return Err(format!("weights must sum to 1, got {}", p1 + p2));
                }
                if psi1.len() != psi2.len() || psi1.len() < 4 || psi1.len() % 2 != 0 {
                    return Err("state amplitudes must be equal-length interleaved re/im lists".into());
                }
                if *n_max == 0 || *n_max > 24 {
                    return Err("n_max must lie in 1..=24".into());
                }
                let dim = psi1.len() / 2;
                if dim.pow(*explicit_n_cap.min(n_max)) > 1 << 12 {
                    return Err("explicit_n_cap implies tensor dimensions beyond 4096".into());
                }
                Ok(())
            }
            Scenario::Nmixture { model, partition, nodes_per_component, times, .. } => {
                model.validate()?;
                if partition.is_empty() || times.is_empty() {
                    return Err("need at least one partition cell and one time".into());
                }
                if *nodes_per_component < 2 {
                    return Err("nodes_per_component must be at least 2".into());
                }
                Ok(())
            }
            Scenario::Claim13 { model, c, eps1, eps2, nodes_per_component, t_search, .. } => {
                model.validate()?;
                if *c <= 1.0 {
                    return Err("separation c must exceed 1 (disjoint unit supports)".into());
                }
                if !(0.0 < *eps1 && *eps1 < 1.0) || !(0.0 < *eps2 && *eps2 < 1.0) {
                    return Err("eps1 and eps2 must lie in (0, 1)".into());
                }
                if *nodes_per_component < 2 || *t_search <= 0.0 {
                    return Err("need nodes_per_component ≥ 2 and t_search > 0".into());
                }
                Ok(())
            }
            Scenario::Truncation { dim, ratio, ranks, .. } => {
                if *dim < 2 {
                    return Err("dim must be at least 2".into());
                }
                if !(0.0 < *ratio && *ratio < 1.0) {
                    return Err("ratio must lie in (0, 1)".into());
                }
                if ranks.is_empty() || ranks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err("ranks must be a nonempty ascending list".into());
                }
                if *ranks.last().unwrap() > *dim || ranks[0] < 1 {
                    return Err("ranks must lie in 1..=dim".into());
                }
                Ok(())
            }
            Scenario::InequalitySuite { trials, .. } => {
                if *trials == 0 {
                    return Err("trials must be positive".into());
                }
                Ok(())
            }
        }
    }
}

/// 17-significant-digit float formatting: lossless round-trip for f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

struct CsvTable {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new(header: &'static [&'static str]) -> Self {
        CsvTable { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    kind: &'static str,
    seed: u64,
    report: T,
}

/// Paths written plus the human summary line.
#[derive(Debug)]
pub struct RunOutcome {
    pub json_path: PathBuf,
    pub csv_path: PathBuf,
    pub summary: String,
}

fn bounds_csv_row(report: &BoundsReport) -> Vec<String> {
    vec![
        format_float(report.qiu_lower),
        format_float(report.montanaro_lower),
        format_float(report.kb_upper),
        format_opt(report.pgm_error),
        format_opt(report.hellstrom_exact),
    ]
}

#[derive(Serialize)]
struct NmixtureRow {
    t: f64,
    reconstruction_residual: f64,
    branch_weights: Vec<f64>,
    bounds: BoundsReport,
}

#[derive(Serialize)]
struct NmixtureReport {
    partition: Vec<(f64, f64)>,
    rows: Vec<NmixtureRow>,
}

#[derive(Serialize)]
struct SweepReport {
    sweep: SweepResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<VerdictReport>,
}

#[derive(Serialize)]
struct HellstromReport {
    error: f64,
    bounds: BoundsReport,
    povm: crate::states::Povm,
}

fn interleaved_to_state(raw: &[f64]) -> Vec<Complex64> {
    raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// Executes a validated scenario and writes `<prefix>.json` and
/// `<prefix>.csv`. The optional `out_override` replaces the scenario's
/// output prefix.
pub fn run_scenario(scenario: &Scenario, out_override: Option<&str>) -> Result<RunOutcome> {
    let prefix = out_override.unwrap_or_else(|| scenario.out_prefix());
    let seed = scenario.seed();

    let (json, csv, summary): (serde_json::Value, String, String) = match scenario {
        Scenario::Hellstrom { p1, state1, p2, state2, .. } => {
            let (error, povm) = hellstrom(*p1, state1, *p2, state2)?;
            let ensemble = Ensemble::pair(*p1, state1.clone(), *p2, state2.clone())?;
            let bounds = bounds_report(&ensemble)?;
            let mut table = CsvTable::new(&[
                "p1",
                "p2",
                "hellstrom_error",
                "qiu_lower",
                "montanaro_lower",
                "kb_upper",
                "pgm_error",
            ]);
            table.push(vec![
                format_float(*p1),
                format_float(*p2),
                format_float(error),
                format_float(bounds.qiu_lower),
                format_float(bounds.montanaro_lower),
                format_float(bounds.kb_upper),
                format_opt(bounds.pgm_error),
            ]);
            let summary = format!("hellstrom: error={error:.6} (qiu={:.6}, kb={:.6})", bounds.qiu_lower, bounds.kb_upper);
            let report = HellstromReport { error, bounds, povm };
            (serde_json::to_value(Envelope { kind: "hellstrom", seed, report })?, table.render(), summary)
        }

        Scenario::Bounds { ensemble, .. } => {
            let report = bounds_report(ensemble)?;
            let mut table = CsvTable::new(&[
                "qiu_lower",
                "montanaro_lower",
                "kb_upper",
                "pgm_error",
                "hellstrom_exact",
            ]);
            table.push(bounds_csv_row(&report));
            let summary = format!(
                "bounds: N={} bracket=[{:.6}, {:.6}] pgm={}",
                ensemble.len(),
                report.qiu_lower.max(report.montanaro_lower),
                report.kb_upper,
                format_opt(report.pgm_error)
            );
            (serde_json::to_value(Envelope { kind: "bounds", seed, report })?, table.render(), summary)
        }

        Scenario::UrmSweep { model, grid, quantity, verdict, .. } => {
            let sweep = match model {
                UrmModelSpec::QubitExample { x1, x2 } => {
                    if *quantity == SweepQuantity::Hellstrom {
                        qubit_example_sweep(grid, *x1, *x2)?
                    } else {
                        let family = UnitaryFamily::new(crate::dynamics::pauli_x(), vec![*x1, *x2])?;
                        let zero = DensityOperator::pure(&basis_vector(2, 0))?;
                        bound_sweep(&family, &[zero.clone(), zero], &[0.5, 0.5], grid, *quantity)?
                            .with_model_label("qubit-example")
                            .with_analytic_period(std::f64::consts::PI / (x2 - x1).abs())
                    }
                }
                UrmModelSpec::DiscretizedAc { model, rates, weights } => {
                    let (ac, psi) = model.build();
                    let family = UnitaryFamily::new(ac.generator.clone(), rates.clone())?;
                    let weights = weights
                        .clone()
                        .unwrap_or_else(|| vec![1.0 / rates.len() as f64; rates.len()]);
                    let pure = DensityOperator::pure(&psi)?;
                    bound_sweep(&family, &vec![pure; rates.len()], &weights, grid, *quantity)?
                        .with_model_label(ac.label.clone())
                }
            };
            let verdict_report = verdict
                .as_ref()
                .map(|v| solvability_verdict(&sweep, v.threshold, v.window))
                .transpose()?;

            let mut table = CsvTable::new(&["t", "value"]);
            for (t, v) in sweep.grid.iter().zip(&sweep.values) {
                table.push(vec![format_float(*t), format_float(*v)]);
            }
            let summary = match &verdict_report {
                Some(r) => format!(
                    "urm-sweep[{}/{:?}]: {} points, verdict={:?} ({}); caveat: {}",
                    sweep.metadata.model,
                    sweep.metadata.quantity,
                    sweep.grid.len(),
                    r.verdict,
                    r.rule,
                    r.caveat
                ),
                None => format!(
                    "urm-sweep[{}/{:?}]: {} points, max={:.6}, min={:.6}",
                    sweep.metadata.model,
                    sweep.metadata.quantity,
                    sweep.grid.len(),
                    sweep.values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)),
                    sweep.values.iter().fold(f64::INFINITY, |a, &b| a.min(b))
                ),
            };
            let report = SweepReport { sweep, verdict: verdict_report };
            (serde_json::to_value(Envelope { kind: "urm-sweep", seed, report })?, table.render(), summary)
        }

        Scenario::Chernoff { ensemble, .. } => {
            let report: ChernoffReport = chernoff(ensemble)?;
            let mut table = CsvTable::new(&["i", "j", "exponent", "s_min"]);
            for pair in &report.pairs {
                table.push(vec![
                    pair.i.to_string(),
                    pair.j.to_string(),
                    format_float(pair.exponent),
                    format_float(pair.s_min),
                ]);
            }
            let summary = format!(
                "chernoff: ensemble exponent={:.9} over {} pairs",
                report.ensemble_exponent,
                report.pairs.len()
            );
            (serde_json::to_value(Envelope { kind: "chernoff", seed, report })?, table.render(), summary)
        }

        Scenario::TensorPower { p1, psi1, p2, psi2, n_max, explicit_n_cap, .. } => {
            let study: TensorPowerStudy = tensor_power_study(
                *p1,
                &interleaved_to_state(psi1),
                *p2,
                &interleaved_to_state(psi2),
                *n_max,
                *explicit_n_cap,
            )?;
            let mut table = CsvTable::new(&["n", "error", "rate", "explicit_error"]);
            for row in &study.rows {
                table.push(vec![
                    row.n.to_string(),
                    format_float(row.error),
                    format_opt(row.rate),
                    format_opt(row.explicit_error),
                ]);
            }
            let summary = format!(
                "tensor-power: F={:.6}, xi={:.9}, rate(n={})={}",
                study.overlap_fidelity,
                study.chernoff_exponent,
                n_max,
                format_opt(study.rows.last().and_then(|r| r.rate))
            );
            (serde_json::to_value(Envelope { kind: "tensor-power", seed, report: study })?, table.render(), summary)
        }

        Scenario::Nmixture { model, density, partition, nodes_per_component, times, .. } => {
            let (ac, psi) = model.build();
            let scheme = QuadratureScheme::for_spec(density, *nodes_per_component)?;
            let mut rows = Vec::with_capacity(times.len());
            let mut table = CsvTable::new(&[
                "t",
                "reconstruction_residual",
                "qiu_lower",
                "montanaro_lower",
                "kb_upper",
                "pgm_error",
                "hellstrom_exact",
            ]);
            let mut worst_residual = 0.0_f64;
            for &t in times {
                let nm = n_mixture(density, &scheme, partition, &ac.generator, &psi, t)?;
                let residual = nm.reconstruction_residual();
                worst_residual = worst_residual.max(residual);
                let bounds = uqsd_pipeline(&nm)?;
                table.push(
                    [vec![format_float(t), format_float(residual)], bounds_csv_row(&bounds)].concat(),
                );
                rows.push(NmixtureRow {
                    t,
                    reconstruction_residual: residual,
                    branch_weights: nm.weights().to_vec(),
                    bounds,
                });
            }
            let summary = format!(
                "nmixture: {} cells, {} times, worst rewriting residual={:.3e}",
                partition.len(),
                times.len(),
                worst_residual
            );
            let report = NmixtureReport { partition: partition.clone(), rows };
            (serde_json::to_value(Envelope { kind: "nmixture", seed, report })?, table.render(), summary)
        }

        Scenario::Claim13 {
            model,
            c,
            eps1,
            eps2,
            nodes_per_component,
            t_search,
            fidelity_samples,
            ..
        } => {
            let (ac, psi) = model.build();
            let params = SeparationHarnessParams {
                c: *c,
                eps1: *eps1,
                eps2: *eps2,
                nodes_per_component: *nodes_per_component,
                t_search: *t_search,
                fidelity_samples: *fidelity_samples,
            };
            let report: SeparationReport = separation_harness(&ac.generator, &psi, &params)?;
            let mut table = CsvTable::new(&[
                "c",
                "eps1",
                "eps2",
                "T",
                "t_prime",
                "purity_min",
                "overlap_max",
                "superfid_bound",
                "pass",
            ]);
            table.push(vec![
                format_float(report.c),
                format_float(report.eps1),
                format_float(report.eps2),
                format_float(report.t_window),
                format_float(report.t_prime),
                format_float(report.purity_min),
                format_float(report.overlap_max),
                format_float(report.superfid_bound),
                report.pass.to_string(),
            ]);
            let summary = format!(
                "claim13: pass={} T={:.4} t'={:.4} purity_min={:.4} overlap_max={:.3e} superfid_bound={:.4}",
                report.pass,
                report.t_window,
                report.t_prime,
                report.purity_min,
                report.overlap_max,
                report.superfid_bound
            );
            (serde_json::to_value(Envelope { kind: "claim13", seed, report })?, table.render(), summary)
        }

        Scenario::Truncation { seed, dim, ratio, ranks, study, .. } => {
            let rho = geometric_spectrum_state(*dim, *ratio, *seed);
            let sigma = geometric_spectrum_state(*dim, *ratio, seed.wrapping_add(1));
            let report: TruncationStudy = match study {
                TruncationKind::Fidelity => fidelity_convergence_study(&rho, &sigma, ranks)?,
                TruncationKind::Kb => {
                    let ensemble = Ensemble::pair(0.5, rho, 0.5, sigma)?;
                    kb_convergence_study(&ensemble, ranks)?
                }
            };
            let mut table = CsvTable::new(&["d", "tail", "alpha", "fidelity_dev", "kb_dev", "bound"]);
            for row in &report.rows {
                table.push(vec![
                    row.rank.to_string(),
                    format_float(row.tail),
                    format_float(row.alpha),
                    format_opt(row.fidelity_dev),
                    format_opt(row.kb_dev),
                    format_float(row.bound),
                ]);
            }
            let last = report.rows.last().unwrap();
            let summary = format!(
                "truncation[{:?}]: {} ranks, final dev={} bound={:.3e}",
                study,
                report.rows.len(),
                format_opt(last.fidelity_dev.or(last.kb_dev)),
                last.bound
            );
            (serde_json::to_value(Envelope { kind: "truncation", seed: *seed, report })?, table.render(), summary)
        }

        Scenario::InequalitySuite { seed, trials, .. } => {
            let report: InequalityReport = fidelity_inequality_suite(*trials, *seed)?;
            let mut table = CsvTable::new(&[
                "trials",
                "min_strong_concavity",
                "min_mixture_vs_point",
                "min_sqrt_weight_dominance",
                "min_super_fidelity_gap",
            ]);
            table.push(vec![
                trials.to_string(),
                format_float(report.min_strong_concavity),
                format_float(report.min_mixture_vs_point),
                format_float(report.min_sqrt_weight_dominance),
                format_float(report.min_super_fidelity_gap),
            ]);
            let summary = format!(
                "inequality-suite: {} trials, min gap={:.3e}",
                trials,
                report.min_gap()
            );
            (serde_json::to_value(Envelope { kind: "inequality-suite", seed: *seed, report })?, table.render(), summary)
        }
    };

    let json_path = PathBuf::from(format!("{prefix}.json"));
    let csv_path = PathBuf::from(format!("{prefix}.csv"));
    write_artifact(&json_path, &(serde_json::to_string_pretty(&json)? + "\n"))?;
    write_artifact(&csv_path, &csv)?;

    Ok(RunOutcome { json_path, csv_path, summary })
}

fn write_artifact(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::Io(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(format!("serialization failed: {e}"))
    }
}
