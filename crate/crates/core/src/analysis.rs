//! Fisher information of a protocol, the universal infidelity distribution,
//! loss and efficiency metrics, and seeded Monte Carlo campaigns.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::measurement::{build_protocol, Apparatus, Layout, MeasurementProtocol, OperatorModel, POVMElement, Symmetry};
use crate::optics::{spectral_grid, SpectralGrid, DEFAULT_SPECTRAL_POINTS};
use crate::quantum::{haar_random_state, StateVector};
use crate::tomography::{
    chi_square_adequacy, mle_reconstruct, pure_probabilities, sample_counts, split_exposure, ChiSquareResult,
    CountData, CountHeader, Rank, PROB_FLOOR,
};

/// Samples drawn from the universal distribution for a histogram.
pub const HISTOGRAM_SAMPLES: usize = 100_000;
pub const HISTOGRAM_BINS: usize = 60;
/// Upper histogram edge as a quantile of the pooled samples.
pub const HISTOGRAM_QUANTILE: f64 = 0.999;
/// Factor between inverse-information eigenvalues and the coefficients `d_j`.
pub const CALIBRATION: f64 = 1.0;

/// Gradient of `p = <psi|Lambda|psi>` with respect to
/// `(Re c_1..Re c_s, Im c_1..Im c_s)`.
pub fn probability_gradient(psi: &StateVector, op: &POVMElement) -> Vec<f64> {
    let v = op.operator.matrix() * psi.as_dvector();
    let s = psi.dim();
    let mut g = vec![0.0; 2 * s];
    for k in 0..s {
        g[k] = 2.0 * v[k].re;
        g[s + k] = 2.0 * v[k].im;
    }
    g
}

/// Orthonormal basis (columns) of the `2s - 2` real directions orthogonal to
/// the normalization direction `(Re psi, Im psi)` and the global-phase
/// direction `(-Im psi, Re psi)`.
pub fn tangent_basis(psi: &StateVector) -> DMatrix<f64> {
    let s = psi.dim();
    let a = psi.amplitudes();
    let mut basis: Vec<DVector<f64>> = vec![
        DVector::from_fn(2 * s, |i, _| if i < s { a[i].re } else { a[i - s].im }),
        DVector::from_fn(2 * s, |i, _| if i < s { -a[i].im } else { a[i - s].re }),
    ];
    for e in 0..2 * s {
        if basis.len() == 2 * s {
            break;
        }
        let mut v = DVector::from_fn(2 * s, |i, _| if i == e { 1.0 } else { 0.0 });
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / n);
        }
    }
    DMatrix::from_columns(&basis[2..])
}

/// Fisher information on the tangent space of pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct InformationMatrix {
    pub protocol: String,
    pub dim_params: usize,
    pub matrix: DMatrix<f64>,
    pub exposures: Vec<f64>,
}

/// `I = sum_nu n_nu sum_j grad p grad p^T / p` over real amplitude
/// parameters, without the tangent projection.
pub fn full_information_matrix(psi: &StateVector, ops: &[Vec<POVMElement>], exposures: &[f64]) -> Result<DMatrix<f64>> {
    if ops.len() != exposures.len() {
        return Err(Error::InvalidConfig(format!("{} exposures for {} settings", exposures.len(), ops.len())));
    }
    let n = 2 * psi.dim();
    let mut info = DMatrix::zeros(n, n);
    for (set, &nu) in ops.iter().zip(exposures) {
        for e in set {
            if e.operator.dim() != psi.dim() {
                return Err(Error::DimensionMismatch { expected: psi.dim(), actual: e.operator.dim() });
            }
            let p = psi.expectation(&e.operator)?.max(PROB_FLOOR);
            let g = DVector::from_vec(probability_gradient(psi, e));
            info.ger(nu / p, &g, &g, 1.0);
        }
    }
    Ok(info)
}

pub fn information_matrix(
    psi: &StateVector,
    ops: &[Vec<POVMElement>],
    exposures: &[f64],
    protocol: &str,
) -> Result<InformationMatrix> {
    let full = full_information_matrix(psi, ops, exposures)?;
    let t = tangent_basis(psi);
    let m = t.transpose() * full * &t;
    Ok(InformationMatrix {
        protocol: protocol.to_string(),
        dim_params: t.ncols(),
        matrix: (&m + m.transpose()) * 0.5,
        exposures: exposures.to_vec(),
    })
}

/// `1 - F = sum_j d_j xi_j^2` with i.i.d. standard normal `xi_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfidelityDistribution {
    pub coefficients: Vec<f64>,
    pub predicted_mean: f64,
}

impl InfidelityDistribution {
    pub fn from_coefficients(coefficients: Vec<f64>) -> Self {
        let predicted_mean = coefficients.iter().sum();
        Self { coefficients, predicted_mean }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.coefficients
            .iter()
            .map(|d| {
                let x: f64 = rng.sample(StandardNormal);
                d * x * x
            })
            .sum()
    }

    /// Histogram of `n` draws.
    pub fn histogram<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Histogram {
        let samples: Vec<f64> = (0..n).map(|_| self.sample(rng)).collect();
        Histogram::from_samples(&samples, HISTOGRAM_BINS, HISTOGRAM_QUANTILE)
    }
}

/// `d_j = calibration * eig(I_t^-1)`; the eigenvalues of the tangent-space
/// information must all be positive.
pub fn infidelity_distribution(info: &InformationMatrix, calibration: f64) -> Result<InfidelityDistribution> {
    let eig = SymmetricEigen::new(info.matrix.clone()).eigenvalues;
    let max = eig.iter().cloned().fold(0.0, f64::max);
    if info.dim_params == 0 || !(max > 0.0) || eig.iter().any(|&l| l <= 1e-10 * max) {
        return Err(Error::SingularInformation(info.protocol.clone()));
    }
    let mut d: Vec<f64> = eig.iter().map(|l| calibration / l).collect();
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(InfidelityDistribution::from_coefficients(d))
}

/// Density histogram on `[0, q]`, `q` the given quantile of the samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn from_samples(samples: &[f64], bins: usize, quantile: f64) -> Self {
        if samples.is_empty() || bins == 0 {
            return Self { edges: vec![0.0], density: Vec::new() };
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let idx = ((sorted.len() - 1) as f64 * quantile).round() as usize;
        let hi = sorted[idx].max(f64::MIN_POSITIVE);
        let width = hi / bins as f64;
        let mut counts = vec![0usize; bins];
        for &x in samples {
            if (0.0..=hi).contains(&x) {
                counts[((x / width) as usize).min(bins - 1)] += 1;
            }
        }
        let norm = samples.len() as f64 * width;
        Self {
            edges: (0..=bins).map(|i| i as f64 * width).collect(),
            density: counts.iter().map(|&c| c as f64 / norm).collect(),
        }
    }

    pub fn mode_height(&self) -> f64 {
        self.density.iter().cloned().fold(0.0, f64::max)
    }

    /// Center of the tallest bin.
    pub fn mode(&self) -> f64 {
        let i = self
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i);
        self.edges.get(i + 1).map_or(0.0, |r| (self.edges[i] + r) / 2.0)
    }

    /// CSV with columns `bin_left,bin_right,density`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["bin_left", "bin_right", "density"])?;
        for (i, d) in self.density.iter().enumerate() {
            csv.write_record([self.edges[i].to_string(), self.edges[i + 1].to_string(), d.to_string()])?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut edges = Vec::new();
        let mut density = Vec::new();
        for rec in csv::Reader::from_reader(r).deserialize() {
            let (l, r, d): (f64, f64, f64) = rec?;
            if edges.is_empty() {
                edges.push(l);
            }
            edges.push(r);
            density.push(d);
        }
        Ok(Self { edges, density })
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `L = n_tot <1 - F>` and its standard error.
pub fn loss(n_tot: u64, infidelities: &[f64]) -> Result<(f64, f64)> {
    if infidelities.is_empty() {
        return Err(Error::InvalidConfig("loss of an empty run list".into()));
    }
    let (m, se) = mean_and_stderr(infidelities);
    Ok((n_tot as f64 * m, n_tot as f64 * se))
}

/// `Eff = <1 - F>_min / <1 - F>` with `<1 - F>_min = (s - 1) / n_tot`.
pub fn efficiency(mean_infidelity: f64, s: usize, n_tot: u64) -> Result<f64> {
    if !(mean_infidelity > 0.0) {
        return Err(Error::InvalidConfig(format!("efficiency needs a positive mean infidelity, got {mean_infidelity}")));
    }
    Ok((s as f64 - 1.0) / n_tot as f64 / mean_infidelity)
}

/// One simulated experiment: protocol, spectrum, models and sample sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub symmetry: Symmetry,
    pub layout: Layout,
    pub delta_lambda_nm: f64,
    pub lambda_s_um: f64,
    pub lambda_p_um: f64,
    pub plate_order: u32,
    /// Idler-arm plate order; the signal order when absent.
    pub idler_plate_order: Option<u32>,
    pub n_tot: u64,
    pub n_exp: usize,
    pub seed: u64,
    pub reconstruction_model: OperatorModel,
    pub data_model: OperatorModel,
    pub spectral_points: usize,
    pub rank: Rank,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 4,
            symmetry: Symmetry::Octahedron,
            layout: Layout::Faces,
            delta_lambda_nm: 0.0,
            lambda_s_um: 0.65,
            lambda_p_um: 0.325,
            plate_order: 5,
            idler_plate_order: None,
            n_tot: 1_000_000,
            n_exp: 200,
            seed: 1,
            reconstruction_model: OperatorModel::Fuzzy,
            data_model: OperatorModel::Fuzzy,
            spectral_points: DEFAULT_SPECTRAL_POINTS,
            rank: Rank::Pure,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.dim != 2 && self.dim != 4 {
            return bad(format!("dim must be 2 or 4, got {}", self.dim));
        }
        if self.n_tot == 0 || self.n_exp == 0 {
            return bad("n_tot and n_exp must be at least 1".into());
        }
        if !(self.delta_lambda_nm >= 0.0) || !self.delta_lambda_nm.is_finite() {
            return bad(format!("delta_lambda_nm must be nonnegative, got {}", self.delta_lambda_nm));
        }
        if self.spectral_points == 0 {
            return bad("spectral_points must be at least 1".into());
        }
        Ok(())
    }

    pub fn spectral_grid(&self) -> Result<SpectralGrid> {
        if self.delta_lambda_nm == 0.0 {
            return Ok(SpectralGrid::monochromatic(self.lambda_s_um, self.lambda_p_um));
        }
        spectral_grid(self.lambda_s_um, self.delta_lambda_nm * 1e-3, self.lambda_p_um, self.spectral_points)
    }

    pub fn apparatus(&self) -> Result<Apparatus> {
        Apparatus::quartz(
            self.plate_order,
            self.idler_plate_order.unwrap_or(self.plate_order),
            self.lambda_s_um,
            self.lambda_p_um,
        )
    }

    pub fn protocol(&self) -> Result<MeasurementProtocol> {
        self.validate()?;
        build_protocol(self.symmetry, self.layout, self.dim, &self.apparatus()?, &self.spectral_grid()?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }
}

/// Outcome of one simulated experiment under one reconstruction model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: usize,
    pub fidelity: f64,
    pub infidelity: f64,
    pub chi2: Option<ChiSquareResult>,
    pub converged: bool,
    pub iterations: usize,
    /// `sum d_j` of the data-model information at the true state.
    pub predicted_infidelity: f64,
    pub coefficients: Vec<f64>,
    pub count_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub config: ExperimentConfig,
    pub reconstruction_model: OperatorModel,
    pub protocol: String,
    pub protocol_hash: String,
    pub n_runs: usize,
    pub converged_runs: usize,
    pub mean_infidelity: f64,
    #[serde(rename = "L")]
    pub loss: f64,
    #[serde(rename = "L_stderr")]
    pub loss_stderr: f64,
    #[serde(rename = "Eff")]
    pub efficiency: f64,
    #[serde(rename = "Eff_stderr")]
    pub efficiency_stderr: f64,
    /// `n_tot` times the mean of `sum d_j` over the sampled states.
    pub predicted_loss: f64,
    pub predicted_loss_stderr: f64,
    pub predicted_efficiency: f64,
    /// Mean over states of `(s - 1) / (n_tot sum d_j)`.
    pub mean_state_efficiency: f64,
    pub chi2_dof: Option<i64>,
    pub rejection_rate_05: f64,
    pub rejection_rate_01: f64,
    pub histogram_mode: f64,
    pub histogram_mode_height: f64,
    pub runtime_s: f64,
}

#[derive(Clone, Debug)]
pub struct CampaignResult {
    pub summary: CampaignSummary,
    pub runs: Vec<RunRecord>,
    /// Averaged universal distribution pooled over the sampled states.
    pub histogram: Histogram,
    pub first_counts: CountData,
}

struct RunOutput {
    records: Vec<RunRecord>,
    hist_samples: Vec<f64>,
    counts: CountData,
}

fn run_one(
    config: &ExperimentConfig,
    protocol: &MeasurementProtocol,
    models: &[OperatorModel],
    run_index: usize,
    hist_per_run: usize,
) -> Result<RunOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(run_index as u64);
    let psi = haar_random_state(config.dim, &mut rng)?;
    let data_ops = protocol.operators(config.data_model);
    let exposures = split_exposure(config.n_tot, protocol.n_settings());
    let mut counts = Vec::with_capacity(data_ops.len());
    for (set, &n) in data_ops.iter().zip(&exposures) {
        counts.push(sample_counts(&pure_probabilities(&psi, set)?, n, &mut rng)?);
    }
    let data = CountData::new(data_ops[0].iter().map(|e| e.outcome.clone()).collect(), counts)?;
    let count_hash = data.hash();

    let exposures_f: Vec<f64> = exposures.iter().map(|&x| x as f64).collect();
    let info = information_matrix(&psi, data_ops, &exposures_f, &protocol.name())?;
    let dist = infidelity_distribution(&info, CALIBRATION)?;
    let hist_samples = (0..hist_per_run).map(|_| dist.sample(&mut rng)).collect();

    let mut records = Vec::with_capacity(models.len());
    for &model in models {
        let ops = protocol.operators(model);
        let rec = mle_reconstruct(&data, ops, config.rank)?;
        let fidelity = rec.estimate.fidelity(&psi)?;
        let fitted = rec.estimate.probabilities(ops)?;
        let chi2 = chi_square_adequacy(&data, &fitted, config.rank.free_parameters(config.dim)).ok();
        records.push(RunRecord {
            run_index,
            fidelity,
            infidelity: 1.0 - fidelity,
            chi2,
            converged: rec.converged,
            iterations: rec.iterations,
            predicted_infidelity: dist.predicted_mean,
            coefficients: dist.coefficients.clone(),
            count_hash: count_hash.clone(),
        });
    }
    Ok(RunOutput { records, hist_samples, counts: data })
}

/// Runs `n_exp` experiments and reconstructs each data set with every model
/// in `models`; all models see identical counts. Run `i` draws from the
/// ChaCha stream `i` of the campaign seed, so results do not depend on the
/// thread schedule.
pub fn run_models(config: &ExperimentConfig, models: &[OperatorModel]) -> Result<Vec<CampaignResult>> {
    let start = Instant::now();
    let protocol = config.protocol()?;
    if !protocol.is_informationally_complete(config.data_model) {
        return Err(Error::SingularInformation(protocol.name()));
    }
    let hist_per_run = HISTOGRAM_SAMPLES.div_ceil(config.n_exp);
    let outputs: Vec<RunOutput> = (0..config.n_exp)
        .into_par_iter()
        .map(|i| run_one(config, &protocol, models, i, hist_per_run))
        .collect::<Result<_>>()?;
    let runtime_s = start.elapsed().as_secs_f64();

    let samples: Vec<f64> = outputs.iter().flat_map(|o| o.hist_samples.iter().copied()).collect();
    let histogram = Histogram::from_samples(&samples, HISTOGRAM_BINS, HISTOGRAM_QUANTILE);
    let first_counts = outputs[0].counts.clone();
    let protocol_hash = protocol.hash();

    models
        .iter()
        .enumerate()
        .map(|(m, &model)| {
            let runs: Vec<RunRecord> = outputs.iter().map(|o| o.records[m].clone()).collect();
            let summary = summarize_runs(config, model, &protocol, &protocol_hash, &runs, &histogram, runtime_s)?;
            Ok(CampaignResult { summary, runs, histogram: histogram.clone(), first_counts: first_counts.clone() })
        })
        .collect()
}

pub fn run_campaign(config: &ExperimentConfig) -> Result<CampaignResult> {
    Ok(run_models(config, &[config.reconstruction_model])?.remove(0))
}

fn summarize_runs(
    config: &ExperimentConfig,
    model: OperatorModel,
    protocol: &MeasurementProtocol,
    protocol_hash: &str,
    runs: &[RunRecord],
    histogram: &Histogram,
    runtime_s: f64,
) -> Result<CampaignSummary> {
    let s = config.dim;
    let n_tot = config.n_tot;
    let infid: Vec<f64> = runs.iter().map(|r| r.infidelity).collect();
    let (loss, loss_stderr) = loss(n_tot, &infid)?;
    let mean_infidelity = loss / n_tot as f64;
    let eff = efficiency(mean_infidelity, s, n_tot).unwrap_or(f64::INFINITY);
    let predicted: Vec<f64> = runs.iter().map(|r| r.predicted_infidelity).collect();
    let (predicted_loss, predicted_loss_stderr) = self::loss(n_tot, &predicted)?;
    let state_eff: Vec<f64> = predicted.iter().map(|&p| (s as f64 - 1.0) / (n_tot as f64 * p)).collect();
    let tested: Vec<&ChiSquareResult> = runs.iter().filter_map(|r| r.chi2.as_ref()).collect();
    let rate = |alpha: f64| {
        if tested.is_empty() {
            0.0
        } else {
            tested.iter().filter(|c| c.p_value < alpha).count() as f64 / tested.len() as f64
        }
    };
    Ok(CampaignSummary {
        config: config.clone(),
        reconstruction_model: model,
        protocol: protocol.name(),
        protocol_hash: protocol_hash.to_string(),
        n_runs: runs.len(),
        converged_runs: runs.iter().filter(|r| r.converged).count(),
        mean_infidelity,
        loss,
        loss_stderr,
        efficiency: eff,
        efficiency_stderr: if loss > 0.0 { eff * loss_stderr / loss } else { 0.0 },
        predicted_loss,
        predicted_loss_stderr,
        predicted_efficiency: (s as f64 - 1.0) / predicted_loss,
        mean_state_efficiency: state_eff.iter().sum::<f64>() / state_eff.len() as f64,
        chi2_dof: tested.first().map(|c| c.dof),
        rejection_rate_05: rate(0.05),
        rejection_rate_01: rate(0.01),
        histogram_mode: histogram.mode(),
        histogram_mode_height: histogram.mode_height(),
        runtime_s,
    })
}

impl CampaignResult {
    /// CSV with columns `run_index,fidelity,infidelity,chi2,dof,p_value,converged`
    /// plus iteration count, predicted infidelity and the count hash.
    pub fn write_runs_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "run_index",
            "fidelity",
            "infidelity",
            "chi2",
            "dof",
            "p_value",
            "converged",
            "iterations",
            "predicted_infidelity",
            "count_hash",
        ])?;
        for r in &self.runs {
            let (chi2, dof, p) = match &r.chi2 {
                Some(c) => (c.statistic.to_string(), c.dof.to_string(), c.p_value.to_string()),
                None => (String::new(), String::new(), String::new()),
            };
            csv.write_record([
                r.run_index.to_string(),
                r.fidelity.to_string(),
                r.infidelity.to_string(),
                chi2,
                dof,
                p,
                r.converged.to_string(),
                r.iterations.to_string(),
                r.predicted_infidelity.to_string(),
                r.count_hash.clone(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }

    /// CSV with columns `run_index,d_1,...,d_k`.
    pub fn write_coefficients_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        let k = self.runs.first().map_or(0, |r| r.coefficients.len());
        let mut head = vec!["run_index".to_string()];
        head.extend((1..=k).map(|j| format!("d_{j}")));
        csv.write_record(&head)?;
        for r in &self.runs {
            let mut row = vec![r.run_index.to_string()];
            row.extend(r.coefficients.iter().map(|d| d.to_string()));
            csv.write_record(&row)?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Writes `runs.csv`, `summary.json`, `coefficients.csv`,
    /// `histogram.csv` and `counts_run0.csv` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_runs_csv(fs::File::create(dir.join("runs.csv"))?)?;
        self.write_coefficients_csv(fs::File::create(dir.join("coefficients.csv"))?)?;
        self.histogram.write_csv(fs::File::create(dir.join("histogram.csv"))?)?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&self.summary)? + "\n")?;
        let header = CountHeader {
            protocol_hash: self.summary.protocol_hash.clone(),
            n_tot: self.summary.config.n_tot,
            seed: self.summary.config.seed,
        };
        self.first_counts.write_csv(fs::File::create(dir.join("counts_run0.csv"))?, &header)?;
        Ok(())
    }
}

/// Standard versus fuzzy reconstruction of the same count data.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub standard: CampaignResult,
    pub fuzzy: CampaignResult,
    /// `L_standard / L_fuzzy`.
    pub ratio: f64,
    /// Every run fed identical counts to both reconstructions.
    pub paired: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub config: ExperimentConfig,
    pub loss_standard: f64,
    pub loss_standard_stderr: f64,
    pub loss_fuzzy: f64,
    pub loss_fuzzy_stderr: f64,
    pub ratio: f64,
    pub paired: bool,
    pub rejection_rate_01_standard: f64,
    pub rejection_rate_05_fuzzy: f64,
}

pub fn compare_models(config: &ExperimentConfig) -> Result<Comparison> {
    let mut res = run_models(config, &[OperatorModel::Standard, OperatorModel::Fuzzy])?;
    let fuzzy = res.pop().expect("two models");
    let standard = res.pop().expect("two models");
    let paired = standard.runs.iter().zip(&fuzzy.runs).all(|(a, b)| a.count_hash == b.count_hash);
    let ratio = standard.summary.loss / fuzzy.summary.loss;
    Ok(Comparison { standard, fuzzy, ratio, paired })
}

impl Comparison {
    pub fn report(&self) -> ComparisonReport {
        ComparisonReport {
            config: self.fuzzy.summary.config.clone(),
            loss_standard: self.standard.summary.loss,
            loss_standard_stderr: self.standard.summary.loss_stderr,
            loss_fuzzy: self.fuzzy.summary.loss,
            loss_fuzzy_stderr: self.fuzzy.summary.loss_stderr,
            ratio: self.ratio,
            paired: self.paired,
            rejection_rate_01_standard: self.standard.summary.rejection_rate_01,
            rejection_rate_05_fuzzy: self.fuzzy.summary.rejection_rate_05,
        }
    }

    /// Writes each arm into `standard/` and `fuzzy/` plus `comparison.json`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        self.standard.write_to_dir(&dir.join("standard"))?;
        self.fuzzy.write_to_dir(&dir.join("fuzzy"))?;
        fs::write(dir.join("comparison.json"), serde_json::to_string_pretty(&self.report())? + "\n")?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub delta_lambda_nm: f64,
    pub mean_infidelity: f64,
    #[serde(rename = "L")]
    pub loss: f64,
    #[serde(rename = "L_stderr")]
    pub loss_stderr: f64,
    #[serde(rename = "Eff")]
    pub efficiency: f64,
    #[serde(rename = "Eff_stderr")]
    pub efficiency_stderr: f64,
    pub predicted_loss: f64,
    pub mode_height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
    pub histograms: Vec<Histogram>,
    pub mean_strictly_increasing: bool,
    pub mode_height_strictly_decreasing: bool,
}

/// Per-`delta lambda` table sorted by bandwidth, with monotonicity flags.
pub fn summarize(results: &[CampaignResult]) -> SummaryTable {
    let mut sorted: Vec<&CampaignResult> = results.iter().collect();
    sorted.sort_by(|a, b| a.summary.config.delta_lambda_nm.total_cmp(&b.summary.config.delta_lambda_nm));
    let rows: Vec<SummaryRow> = sorted
        .iter()
        .map(|r| SummaryRow {
            delta_lambda_nm: r.summary.config.delta_lambda_nm,
            mean_infidelity: r.summary.mean_infidelity,
            loss: r.summary.loss,
            loss_stderr: r.summary.loss_stderr,
            efficiency: r.summary.efficiency,
            efficiency_stderr: r.summary.efficiency_stderr,
            predicted_loss: r.summary.predicted_loss,
            mode_height: r.histogram.mode_height(),
        })
        .collect();
    SummaryTable {
        mean_strictly_increasing: rows.windows(2).all(|w| w[1].mean_infidelity > w[0].mean_infidelity),
        mode_height_strictly_decreasing: rows.windows(2).all(|w| w[1].mode_height < w[0].mode_height),
        histograms: sorted.iter().map(|r| r.histogram.clone()).collect(),
        rows,
    }
}
