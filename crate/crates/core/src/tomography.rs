//! Count statistics, maximum-likelihood reconstruction and the chi-square
//! adequacy test.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::measurement::{hermitian_coordinates, POVMElement, POVM_TOL};
use crate::quantum::{
    dominant_eigenvector, hermitian_eigen, trace_of_product, DensityMatrix, Operator, StateVector, ZERO,
};

/// Floor applied to probabilities before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-12;
/// Iteration cap of the likelihood ascent.
pub const MAX_ITERATIONS: usize = 10_000;
/// Stop once the log-likelihood gain per recorded count drops below this.
pub const CONVERGENCE_TOL: f64 = 1e-10;
/// Cells with fewer expected counts are pooled in the chi-square test.
pub const MIN_EXPECTED: f64 = 5.0;

/// Outcome counts per setting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountData {
    pub outcomes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl CountData {
    pub fn new(outcomes: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidCounts("no outcome labels".into()));
        }
        if let Some(bad) = counts.iter().position(|c| c.len() != outcomes.len()) {
            return Err(Error::InvalidCounts(format!(
                "setting {bad} has {} cells, expected {}",
                counts[bad].len(),
                outcomes.len()
            )));
        }
        Ok(Self { outcomes, counts })
    }

    pub fn n_settings(&self) -> usize {
        self.counts.len()
    }

    /// Per-setting exposures `n_nu`.
    pub fn exposures(&self) -> Vec<u64> {
        self.counts.iter().map(|c| c.iter().sum()).collect()
    }

    pub fn n_tot(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// SHA-256 over the counts, for checking that two analyses saw the same data.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for row in &self.counts {
            for c in row {
                h.update(c.to_le_bytes());
            }
            h.update(b";");
        }
        hex::encode(h.finalize())
    }

    /// CSV with columns `setting_index,outcome_label,count`, preceded by a
    /// `# {json}` header line.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &CountHeader) -> Result<()> {
        writeln!(w, "# {}", serde_json::to_string(header)?)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["setting_index", "outcome_label", "count"])?;
        for (i, row) in self.counts.iter().enumerate() {
            for (label, c) in self.outcomes.iter().zip(row) {
                csv.write_record([i.to_string(), label.clone(), c.to_string()])?;
            }
        }
        csv.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut r: R) -> Result<(Self, CountHeader)> {
        let mut first = String::new();
        r.read_line(&mut first)?;
        let json = first
            .trim_end()
            .strip_prefix("# ")
            .ok_or_else(|| Error::InvalidCounts("missing `# {json}` header line".into()))?;
        let header: CountHeader = serde_json::from_str(json)?;

        #[derive(Deserialize)]
        struct Row {
            setting_index: usize,
            outcome_label: String,
            count: u64,
        }
        let mut outcomes: Vec<String> = Vec::new();
        let mut counts: Vec<Vec<u64>> = Vec::new();
        for row in csv::Reader::from_reader(r).deserialize() {
            let row: Row = row?;
            if row.setting_index == counts.len() {
                counts.push(Vec::new());
            } else if row.setting_index + 1 != counts.len() {
                return Err(Error::InvalidCounts(format!("setting {} out of order", row.setting_index)));
            }
            let first = counts.len() == 1;
            let cell = counts.last_mut().expect("row pushed above");
            if first {
                outcomes.push(row.outcome_label);
            } else if outcomes.get(cell.len()) != Some(&row.outcome_label) {
                return Err(Error::InvalidCounts(format!("unexpected outcome `{}`", row.outcome_label)));
            }
            cell.push(row.count);
        }
        if counts.is_empty() {
            return Err(Error::InvalidCounts("no count rows".into()));
        }
        Ok((Self::new(outcomes, counts)?, header))
    }
}

/// Metadata stored with count files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountHeader {
    pub protocol_hash: String,
    pub n_tot: u64,
    pub seed: u64,
}

/// Splits `n_tot` evenly over the settings; the remainder goes to the first
/// settings.
pub fn split_exposure(n_tot: u64, n_settings: usize) -> Vec<u64> {
    if n_settings == 0 {
        return Vec::new();
    }
    let k = n_settings as u64;
    (0..k).map(|i| n_tot / k + u64::from(i < n_tot % k)).collect()
}

fn check_complete(ops: &[POVMElement], dim: usize) -> Result<()> {
    let mut sum = Operator::zeros(dim);
    for e in ops {
        if e.operator.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: e.operator.dim() });
        }
        sum.add_assign_scaled(&e.operator, 1.0);
    }
    if ops.is_empty() || sum.frobenius_distance(&Operator::identity(dim)) > POVM_TOL {
        return Err(Error::IncompleteOperators("elements do not sum to the identity".into()));
    }
    Ok(())
}

fn clip_probabilities(mut p: Vec<f64>) -> Result<Vec<f64>> {
    for x in &mut p {
        if *x < -PROB_FLOOR || *x > 1.0 + PROB_FLOOR || !x.is_finite() {
            return Err(Error::InvalidProbabilities(format!("probability {x} outside [0, 1]")));
        }
        *x = x.clamp(0.0, 1.0);
    }
    Ok(p)
}

/// `p_j = Tr(rho Lambda_j)`.
pub fn outcome_probabilities(rho: &DensityMatrix, ops: &[POVMElement]) -> Result<Vec<f64>> {
    check_complete(ops, rho.dim())?;
    clip_probabilities(ops.iter().map(|e| trace_of_product(rho.matrix(), e.operator.matrix()).re).collect())
}

/// `p_j = <psi|Lambda_j|psi>`, equal to [`outcome_probabilities`] on
/// `|psi><psi|` without forming the density matrix.
pub fn pure_probabilities(psi: &StateVector, ops: &[POVMElement]) -> Result<Vec<f64>> {
    check_complete(ops, psi.dim())?;
    clip_probabilities(ops.iter().map(|e| psi.expectation(&e.operator)).collect::<Result<_>>()?)
}

/// Multinomial draw of `n` trials as a chain of conditional binomials.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], n: u64, rng: &mut R) -> Result<Vec<u64>> {
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|&p| p < -1e-9 || !p.is_finite()) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!("{probs:?} is not a distribution")));
    }
    let mut out = vec![0u64; probs.len()];
    let (mut left, mut mass) = (n, 1.0f64);
    for (j, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if j + 1 == probs.len() {
            out[j] = left;
            break;
        }
        let q = if mass > 0.0 { (p.max(0.0) / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(left, q).expect("probability clamped to [0, 1]").sample(rng);
        out[j] = draw;
        left -= draw;
        mass -= p.max(0.0);
    }
    Ok(out)
}

/// Rank constraint of the estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    #[default]
    Pure,
    Full,
}

impl Rank {
    /// Real parameters of a state of dimension `dim` under this constraint.
    pub fn free_parameters(self, dim: usize) -> usize {
        match self {
            Rank::Pure => 2 * dim - 2,
            Rank::Full => dim * dim - 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Estimate {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl Estimate {
    /// `<psi|rho|psi>`, which reduces to `|<phi|psi>|^2` for a pure estimate.
    pub fn fidelity(&self, truth: &StateVector) -> Result<f64> {
        match self {
            Estimate::Pure(phi) => crate::quantum::fidelity_pure(phi, truth),
            Estimate::Mixed(rho) => Ok(truth.expectation(&Operator::from_matrix(rho.matrix().clone()))?.clamp(0.0, 1.0)),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            Estimate::Pure(psi) => DensityMatrix::from_state(psi),
            Estimate::Mixed(rho) => rho.clone(),
        }
    }

    /// Outcome probabilities of every setting.
    pub fn probabilities(&self, ops: &[Vec<POVMElement>]) -> Result<Vec<Vec<f64>>> {
        ops.iter()
            .map(|set| match self {
                Estimate::Pure(psi) => pure_probabilities(psi, set),
                Estimate::Mixed(rho) => outcome_probabilities(rho, set),
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub estimate: Estimate,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when a cell with counts had its probability floored.
    pub regularized: bool,
    /// Log-likelihood after each accepted step, starting from the initial point.
    pub ll_history: Vec<f64>,
}

/// Flattened operators and counts of one reconstruction problem.
struct Problem {
    dim: usize,
    ops: Vec<Vec<C64>>,
    counts: Vec<f64>,
    n: f64,
}

impl Problem {
    fn new(data: &CountData, ops: &[Vec<POVMElement>]) -> Result<Self> {
        if data.n_settings() != ops.len() {
            return Err(Error::InvalidCounts(format!(
                "{} settings of counts for {} operator sets",
                data.n_settings(),
                ops.len()
            )));
        }
        let dim = ops
            .first()
            .and_then(|s| s.first())
            .map(|e| e.operator.dim())
            .ok_or_else(|| Error::IncompleteOperators("no operators".into()))?;
        let mut flat = Vec::new();
        let mut counts = Vec::new();
        for (set, row) in ops.iter().zip(&data.counts) {
            check_complete(set, dim)?;
            if set.len() != row.len() {
                return Err(Error::InvalidCounts(format!("{} cells for {} outcomes", row.len(), set.len())));
            }
            for (e, &c) in set.iter().zip(row) {
                let m = e.operator.matrix();
                flat.push((0..dim * dim).map(|k| m[(k / dim, k % dim)]).collect());
                counts.push(c as f64);
            }
        }
        let n = counts.iter().sum::<f64>();
        if n <= 0.0 {
            return Err(Error::InvalidCounts("no counts recorded".into()));
        }
        Ok(Self { dim, ops: flat, counts, n })
    }

    fn apply(&self, k: usize, psi: &[C64], out: &mut [C64]) {
        let (d, m) = (self.dim, &self.ops[k]);
        for r in 0..d {
            out[r] = (0..d).map(|c| m[r * d + c] * psi[c]).sum();
        }
    }

    /// `Lambda_k psi` for every operator, with the log-likelihood.
    fn evaluate_pure(&self, psi: &[C64], v: &mut [Vec<C64>], p: &mut [f64]) -> (f64, bool) {
        let mut ll = 0.0;
        let mut floored = false;
        for k in 0..self.ops.len() {
            self.apply(k, psi, &mut v[k]);
            let pk: f64 = psi.iter().zip(&v[k]).map(|(a, b)| (a.conj() * b).re).sum();
            p[k] = pk.max(PROB_FLOOR);
            if self.counts[k] > 0.0 {
                floored |= pk < PROB_FLOOR;
                ll += self.counts[k] * p[k].ln();
            }
        }
        (ll, floored)
    }

    fn evaluate_mixed(&self, rho: &DMatrix<C64>, p: &mut [f64]) -> (f64, bool) {
        let d = self.dim;
        let mut ll = 0.0;
        let mut floored = false;
        for k in 0..self.ops.len() {
            let m = &self.ops[k];
            let mut tr = 0.0;
            for a in 0..d {
                for b in 0..d {
                    tr += (rho[(a, b)] * m[b * d + a]).re;
                }
            }
            p[k] = tr.max(PROB_FLOOR);
            if self.counts[k] > 0.0 {
                floored |= tr < PROB_FLOOR;
                ll += self.counts[k] * p[k].ln();
            }
        }
        (ll, floored)
    }

    fn r_operator(&self, p: &[f64]) -> DMatrix<C64> {
        let d = self.dim;
        let mut r = DMatrix::from_element(d, d, ZERO);
        for (k, m) in self.ops.iter().enumerate() {
            let w = self.counts[k] / p[k];
            if w == 0.0 {
                continue;
            }
            for a in 0..d {
                for b in 0..d {
                    r[(a, b)] += m[a * d + b] * w;
                }
            }
        }
        r
    }

    /// Least-squares solution of `Tr(rho Lambda) = f` over Hermitian `rho`.
    fn linear_inversion(&self, data: &CountData) -> DMatrix<C64> {
        let d = self.dim;
        let k = d * d;
        let mut ata = DMatrix::<f64>::zeros(k, k);
        let mut atf = DVector::<f64>::zeros(k);
        let exposures: Vec<f64> = data.exposures().iter().map(|&x| x as f64).collect();
        let per_setting = data.outcomes.len();
        for (idx, m) in self.ops.iter().enumerate() {
            let nu = exposures[idx / per_setting];
            if nu == 0.0 {
                continue;
            }
            let f = self.counts[idx] / nu;
            let mat = DMatrix::from_fn(d, d, |a, b| m[a * d + b]);
            let x = DVector::from_vec(hermitian_coordinates(&mat));
            ata += &x * x.transpose();
            atf += &x * f;
        }
        let coords = ata
            .svd(true, true)
            .solve(&atf, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(k));
        let mut rho = DMatrix::from_element(d, d, ZERO);
        for i in 0..d {
            rho[(i, i)] = C64::new(coords[i], 0.0);
        }
        let mut c = d;
        let s = 2f64.sqrt();
        for i in 0..d {
            for j in i + 1..d {
                let z = C64::new(coords[c] / s, coords[c + 1] / s);
                rho[(i, j)] = z;
                rho[(j, i)] = z.conj();
                c += 2;
            }
        }
        rho
    }
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= n);
}

/// Step-size bounds of the diluted fixed-point iteration.
const EPS_START: f64 = 1.0;
const EPS_MAX: f64 = 1e4;
const EPS_MIN: f64 = 1e-12;

/// Maximizes `prod p_jnu^n_jnu` by the diluted fixed point
/// `rho <- A rho A / Tr`, `A = I + eps (R / N - I)`, with
/// `R = sum n_jnu / p_jnu Lambda_jnu`. For pure states this becomes
/// `psi <- psi + eps (R psi / N - psi)` followed by normalization;
/// `eps = 1` is the plain `R rho R` iteration. `eps` is halved until the
/// likelihood does not decrease and grown again after each accepted step.
/// The iteration starts from linear inversion (its dominant eigenvector
/// for pure states).
pub fn mle_reconstruct(data: &CountData, ops: &[Vec<POVMElement>], rank: Rank) -> Result<ReconstructionResult> {
    let problem = Problem::new(data, ops)?;
    let li = problem.linear_inversion(data);
    match rank {
        Rank::Pure => reconstruct_pure(&problem, &li),
        Rank::Full => reconstruct_mixed(&problem, &li),
    }
}

fn reconstruct_pure(pr: &Problem, li: &DMatrix<C64>) -> Result<ReconstructionResult> {
    let d = pr.dim;
    let m = pr.ops.len();
    let mut psi: Vec<C64> = dominant_eigenvector(li).amplitudes().to_vec();
    let mut v = vec![vec![ZERO; d]; m];
    let mut p = vec![0.0; m];
    let mut cand = vec![ZERO; d];
    let mut cand_v = v.clone();
    let mut cand_p = p.clone();
    let (mut ll, mut regularized) = pr.evaluate_pure(&psi, &mut v, &mut p);
    let mut history = vec![ll];
    let mut eps = EPS_START;
    let mut converged = false;
    let mut iterations = 0;
    let mut small_steps = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut dir = vec![ZERO; d];
        for k in 0..m {
            let w = pr.counts[k] / (p[k] * pr.n);
            if w != 0.0 {
                for a in 0..d {
                    dir[a] += v[k][a] * w;
                }
            }
        }
        for a in 0..d {
            dir[a] -= psi[a];
        }
        if dir.iter().map(|c| c.norm_sqr()).sum::<f64>() < 1e-30 {
            converged = true;
            break;
        }
        let mut accepted = None;
        while eps >= EPS_MIN {
            for a in 0..d {
                cand[a] = psi[a] + dir[a] * eps;
            }
            normalize(&mut cand);
            let (cll, floored) = pr.evaluate_pure(&cand, &mut cand_v, &mut cand_p);
            if cll >= ll {
                accepted = Some((cll, floored));
                break;
            }
            eps *= 0.5;
        }
        let Some((cll, floored)) = accepted else {
            converged = true;
            break;
        };
        std::mem::swap(&mut psi, &mut cand);
        std::mem::swap(&mut v, &mut cand_v);
        std::mem::swap(&mut p, &mut cand_p);
        regularized |= floored;
        let gain = cll - ll;
        ll = cll;
        history.push(ll);
        eps = (eps * 2.0).min(EPS_MAX);
        if gain < CONVERGENCE_TOL * pr.n {
            small_steps += 1;
            if small_steps >= 2 {
                converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }
    Ok(ReconstructionResult {
        estimate: Estimate::Pure(StateVector::normalized(psi)?),
        log_likelihood: ll,
        iterations,
        converged,
        regularized,
        ll_history: history,
    })
}

fn reconstruct_mixed(pr: &Problem, li: &DMatrix<C64>) -> Result<ReconstructionResult> {
    let d = pr.dim;
    let m = pr.ops.len();
    // positive part of the linear-inversion estimate, mixed slightly to full rank
    let (vals, vecs) = hermitian_eigen(li);
    let mut rho = DMatrix::from_element(d, d, ZERO);
    for (i, &l) in vals.iter().enumerate() {
        let col = vecs.column(i);
        rho += &col * col.adjoint() * C64::new(l.max(0.0), 0.0);
    }
    let tr = rho.trace().re;
    let id = DMatrix::<C64>::identity(d, d);
    rho = if tr > 0.0 { rho.unscale(tr) * C64::new(0.9, 0.0) } else { id.unscale(d as f64) * C64::new(0.9, 0.0) }
        + id.unscale(d as f64) * C64::new(0.1, 0.0);

    let mut p = vec![0.0; m];
    let mut cand_p = p.clone();
    let (mut ll, mut regularized) = pr.evaluate_mixed(&rho, &mut p);
    let mut history = vec![ll];
    let mut eps = EPS_START;
    let mut converged = false;
    let mut iterations = 0;
    let mut small_steps = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let g = pr.r_operator(&p).unscale(pr.n) - &id;
        if g.norm() < 1e-15 {
            converged = true;
            break;
        }
        let mut accepted = None;
        while eps >= EPS_MIN {
            let a = &id + g.scale(eps);
            let mut next = &a * &rho * a.adjoint();
            next = (&next + next.adjoint()).unscale(2.0);
            let t = next.trace().re;
            next.unscale_mut(t);
            let (cll, floored) = pr.evaluate_mixed(&next, &mut cand_p);
            if cll >= ll {
                accepted = Some((next, cll, floored));
                break;
            }
            eps *= 0.5;
        }
        let Some((next, cll, floored)) = accepted else {
            converged = true;
            break;
        };
        rho = next;
        std::mem::swap(&mut p, &mut cand_p);
        regularized |= floored;
        let gain = cll - ll;
        ll = cll;
        history.push(ll);
        eps = (eps * 2.0).min(EPS_MAX);
        if gain < CONVERGENCE_TOL * pr.n {
            small_steps += 1;
            if small_steps >= 2 {
                converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }
    Ok(ReconstructionResult {
        estimate: Estimate::Mixed(DensityMatrix::new(rho)?),
        log_likelihood: ll,
        iterations,
        converged,
        regularized,
        ll_history: history,
    })
}

/// Pearson goodness of fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: i64,
    pub p_value: f64,
    /// Cells kept after pooling.
    pub cells: usize,
}

/// `sum (n_jnu - n_nu p_jnu)^2 / (n_nu p_jnu)`. Within a setting, cells
/// expecting fewer than [`MIN_EXPECTED`] counts are pooled into one cell;
/// a pool still below the threshold joins the smallest retained cell.
/// `dof = cells - settings - free_parameters`.
pub fn chi_square_adequacy(data: &CountData, fitted: &[Vec<f64>], free_parameters: usize) -> Result<ChiSquareResult> {
    if fitted.len() != data.n_settings() {
        return Err(Error::InvalidCounts(format!(
            "{} fitted settings for {} settings of counts",
            fitted.len(),
            data.n_settings()
        )));
    }
    let mut statistic = 0.0;
    let mut cells = 0usize;
    let mut settings = 0usize;
    for (row, probs) in data.counts.iter().zip(fitted) {
        if row.len() != probs.len() {
            return Err(Error::InvalidCounts("fitted probabilities do not match the cells".into()));
        }
        let n: u64 = row.iter().sum();
        if n == 0 {
            continue;
        }
        settings += 1;
        let mut kept: Vec<(f64, f64)> = Vec::new();
        let mut pool = (0.0, 0.0);
        for (&c, &p) in row.iter().zip(probs) {
            let e = n as f64 * p;
            if e >= MIN_EXPECTED {
                kept.push((c as f64, e));
            } else {
                pool.0 += c as f64;
                pool.1 += e;
            }
        }
        if pool.1 >= MIN_EXPECTED || kept.is_empty() {
            if pool.1 > 0.0 || pool.0 > 0.0 {
                kept.push(pool);
            }
        } else if pool.1 > 0.0 || pool.0 > 0.0 {
            let smallest = kept
                .iter_mut()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("kept is nonempty");
            smallest.0 += pool.0;
            smallest.1 += pool.1;
        }
        for (o, e) in &kept {
            if *e > 0.0 {
                statistic += (o - e).powi(2) / e;
            } else if *o > 0.0 {
                statistic = f64::INFINITY;
            }
        }
        cells += kept.len();
    }
    let dof = cells as i64 - settings as i64 - free_parameters as i64;
    if dof <= 0 {
        return Err(Error::NoDegreesOfFreedom(dof));
    }
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    let p_value = if statistic.is_finite() { dist.sf(statistic) } else { 0.0 };
    Ok(ChiSquareResult { statistic, dof, p_value, cells })
}
