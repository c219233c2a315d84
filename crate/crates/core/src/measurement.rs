//! Polyhedral tomography protocols, ideal rotated projectors and fuzzy
//! measurement operators averaged over the photon spectrum.
//!
//! A protocol is named after the solid whose face normals give its
//! measurement directions on the Bloch sphere: the cube has six faces
//! (three antipodal pairs along the axes) and the octahedron eight
//! (four antipodal pairs along `(+-1, +-1, +-1)/sqrt 3`). With
//! [`Layout::Faces`] every face normal is its own plate setting, selected on
//! the `V` output of the polarizing beam splitter; with [`Layout::Bases`]
//! one representative per antipodal pair is used.
//!
//! Two-qubit protocols are Cartesian products of per-arm settings, signal
//! arm varying slowest, with outcomes ordered `(VV, VH, HV, HH)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::optics::{
    basis_unitary, idler_wavelength, wrap_plate_angle, DispersionModel, PlateKind, SpectralGrid,
    WavePlateSetting, WavePlateSpec,
};
use crate::quantum::{bloch_projector, tensor, Operator, ZERO};

/// Completeness/positivity tolerance for measurement operators.
pub const POVM_TOL: f64 = 1e-10;
/// Projector-match tolerance (Frobenius) for solved plate angles.
pub const ANGLE_MATCH_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Cube,
    Octahedron,
}

impl Symmetry {
    pub fn name(self) -> &'static str {
        match self {
            Symmetry::Cube => "cube",
            Symmetry::Octahedron => "octahedron",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// One setting per face normal.
    #[default]
    Faces,
    /// One setting per measurement basis.
    Bases,
}

/// Which operator set describes the apparatus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorModel {
    /// Rotated projectors at the design wavelength.
    Standard,
    /// Projectors averaged over the spectrum.
    Fuzzy,
}

/// One representative Bloch direction per measurement basis; its projectors
/// are `(I +- n.sigma)/2`.
pub fn protocol_directions(symmetry: Symmetry) -> Vec<[f64; 3]> {
    match symmetry {
        Symmetry::Cube => vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        Symmetry::Octahedron => {
            let r = 1.0 / 3f64.sqrt();
            vec![[r, r, r], [r, -r, -r], [-r, r, -r], [-r, -r, r]]
        }
    }
}

/// All face normals, each representative followed by its antipode.
pub fn face_normals(symmetry: Symmetry) -> Vec<[f64; 3]> {
    protocol_directions(symmetry)
        .into_iter()
        .flat_map(|n| [n, n.map(|x| -x)])
        .collect()
}

/// Directions realized as plate settings for one arm.
pub fn setting_directions(symmetry: Symmetry, layout: Layout) -> Vec<[f64; 3]> {
    match layout {
        Layout::Faces => face_normals(symmetry),
        Layout::Bases => protocol_directions(symmetry),
    }
}

fn direction_label(n: [f64; 3]) -> String {
    let sign = |x: f64| if x > 1e-9 { '+' } else if x < -1e-9 { '-' } else { '0' };
    let nonzero: Vec<char> = n.iter().map(|&x| sign(x)).collect();
    match nonzero.iter().filter(|&&c| c != '0').count() {
        1 => {
            let axis = nonzero.iter().position(|&c| c != '0').unwrap();
            format!("{}{}", nonzero[axis], ['x', 'y', 'z'][axis])
        }
        _ => nonzero.iter().collect(),
    }
}

/// Half- and quarter-wave plate of one arm; the light crosses the HWP first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmOptics {
    pub hwp: WavePlateSpec,
    pub qwp: WavePlateSpec,
}

impl ArmOptics {
    pub fn from_order(order: u32, design_wavelength_um: f64, dispersion: Arc<DispersionModel>) -> Result<Self> {
        Ok(Self {
            hwp: WavePlateSpec::from_order(PlateKind::Half, order, design_wavelength_um, dispersion.clone())?,
            qwp: WavePlateSpec::from_order(PlateKind::Quarter, order, design_wavelength_um, dispersion)?,
        })
    }

    pub fn design_wavelength_um(&self) -> f64 {
        self.hwp.design_wavelength_um
    }

    pub fn unitary(&self, angles: PlateAngles, lambda_um: f64) -> Result<Operator> {
        basis_unitary(
            &WavePlateSetting::new(self.hwp.clone(), angles.hwp),
            &WavePlateSetting::new(self.qwp.clone(), angles.qwp),
            lambda_um,
        )
    }
}

/// Plates in both arms of the source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Apparatus {
    pub signal: ArmOptics,
    pub idler: ArmOptics,
}

impl Apparatus {
    /// Quartz plates of the given orders in each arm, each arm designed for
    /// its own central wavelength.
    pub fn quartz(signal_order: u32, idler_order: u32, signal_um: f64, pump_um: f64) -> Result<Self> {
        let q = DispersionModel::quartz();
        let idler_um = idler_wavelength(signal_um, pump_um)?;
        Ok(Self {
            signal: ArmOptics::from_order(signal_order, signal_um, q.clone())?,
            idler: ArmOptics::from_order(idler_order, idler_um, q)?,
        })
    }
}

/// Fast-axis angles (radians from vertical) of the HWP and QWP.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateAngles {
    #[serde(serialize_with = "ser_sig12")]
    pub hwp: f64,
    #[serde(serialize_with = "ser_sig12")]
    pub qwp: f64,
}

fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn ser_sig12<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig12(*x))
}

/// Bloch vector of `U^dagger |V>`, the state selected on the `V` port.
fn selected_bloch(arm: &ArmOptics, alpha: f64, beta: f64, lambda: f64) -> Result<[f64; 3]> {
    let u = arm.unitary(PlateAngles { hwp: alpha, qwp: beta }, lambda)?;
    let m = u.matrix();
    // U^dagger |V> = conj(first row of U)
    let (a, b) = (m[(0, 0)].conj(), m[(0, 1)].conj());
    let off = a.conj() * b;
    Ok([2.0 * off.re, 2.0 * off.im, a.norm_sqr() - b.norm_sqr()])
}

struct AngleSolver<'a> {
    arm: &'a ArmOptics,
    lambda: f64,
    target: [f64; 3],
}

impl AngleSolver<'_> {
    fn residual(&self, x: [f64; 2]) -> Result<[f64; 3]> {
        let b = selected_bloch(self.arm, x[0], x[1], self.lambda)?;
        Ok([b[0] - self.target[0], b[1] - self.target[1], b[2] - self.target[2]])
    }

    /// Levenberg-Marquardt on the Bloch-vector residual; `free` masks which
    /// of `(alpha, beta)` may move.
    fn solve(&self, start: [f64; 2], free: [bool; 2]) -> Result<Option<[f64; 2]>> {
        const STEP: f64 = 1e-7;
        let norm2 = |r: &[f64; 3]| r.iter().map(|v| v * v).sum::<f64>();
        let mut x = start;
        let mut r = self.residual(x)?;
        let mut damping = 1e-3;
        for _ in 0..200 {
            if norm2(&r) < 1e-28 {
                break;
            }
            let mut jac = [[0.0; 2]; 3];
            for p in 0..2 {
                if !free[p] {
                    continue;
                }
                let (mut xp, mut xm) = (x, x);
                xp[p] += STEP;
                xm[p] -= STEP;
                let (rp, rm) = (self.residual(xp)?, self.residual(xm)?);
                for i in 0..3 {
                    jac[i][p] = (rp[i] - rm[i]) / (2.0 * STEP);
                }
            }
            let mut jtj = [[0.0; 2]; 2];
            let mut jtr = [0.0; 2];
            for i in 0..3 {
                for p in 0..2 {
                    jtr[p] += jac[i][p] * r[i];
                    for q in 0..2 {
                        jtj[p][q] += jac[i][p] * jac[i][q];
                    }
                }
            }
            let mut improved = false;
            for _ in 0..30 {
                let a = [
                    [jtj[0][0] * (1.0 + damping) + if free[0] { 1e-14 } else { 1.0 }, jtj[0][1]],
                    [jtj[1][0], jtj[1][1] * (1.0 + damping) + if free[1] { 1e-14 } else { 1.0 }],
                ];
                let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
                if det.abs() < 1e-300 {
                    damping *= 10.0;
                    continue;
                }
                let dx = [
                    -(a[1][1] * jtr[0] - a[0][1] * jtr[1]) / det,
                    -(a[0][0] * jtr[1] - a[1][0] * jtr[0]) / det,
                ];
                let cand = [x[0] + dx[0], x[1] + dx[1]];
                let rc = self.residual(cand)?;
                if norm2(&rc) < norm2(&r) {
                    x = cand;
                    r = rc;
                    damping = (damping * 0.3).max(1e-12);
                    improved = true;
                    break;
                }
                damping *= 10.0;
            }
            if !improved {
                break;
            }
        }
        Ok((norm2(&r) < 1e-22).then_some(x))
    }
}

fn angle_cost(a: &PlateAngles) -> f64 {
    a.hwp.abs() + a.qwp.abs()
}

/// Plate angles that make `U^dagger P_V U` equal to `(I + n.sigma)/2` at
/// `lambda0_um`. Among all solutions in `(-pi/2, pi/2]^2` the one with the
/// smallest `|alpha| + |beta|` wins, then the smallest `alpha`.
pub fn angles_for_direction(direction: [f64; 3], arm: &ArmOptics, lambda0_um: f64) -> Result<PlateAngles> {
    let len = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(len > 0.0) {
        return Err(Error::InvalidConfig("measurement direction must be nonzero".into()));
    }
    let target = direction.map(|x| x / len);
    let solver = AngleSolver { arm, lambda: lambda0_um, target };
    let target_proj = bloch_projector(target);

    const STARTS: usize = 8;
    let grid: Vec<f64> = (0..STARTS).map(|i| -FRAC_PI_2 + PI * (i as f64 + 0.5) / STARTS as f64).collect();
    let mut raw = Vec::new();
    for &a in &grid {
        for &b in &grid {
            raw.extend(solver.solve([a, b], [true, true])?);
        }
    }
    // pinned solves recover exact family members when the solution set is a curve
    for &s in &grid {
        raw.extend(solver.solve([0.0, s], [false, true])?);
        raw.extend(solver.solve([s, 0.0], [true, false])?);
    }

    let mut best: Option<PlateAngles> = None;
    for x in raw {
        let cand = PlateAngles { hwp: wrap_plate_angle(x[0]), qwp: wrap_plate_angle(x[1]) };
        let u = arm.unitary(cand, lambda0_um)?;
        if Operator::basis_projector(2, 0).conjugated_by(&u).frobenius_distance(&target_proj) > ANGLE_MATCH_TOL {
            continue;
        }
        best = Some(match best {
            None => cand,
            Some(b) => {
                let (cb, cc) = (angle_cost(&b), angle_cost(&cand));
                if cc < cb - 1e-9 || ((cc - cb).abs() <= 1e-9 && cand.hwp < b.hwp - 1e-9) {
                    cand
                } else {
                    b
                }
            }
        });
    }
    best.ok_or(Error::SolverFailed(target))
}

/// Plate angles per arm plus a label such as `+x` or `+x|-y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSetting {
    pub label: String,
    pub signal: PlateAngles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idler: Option<PlateAngles>,
}

/// A measurement operator with its outcome label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct POVMElement {
    pub outcome: String,
    pub operator: Operator,
}

pub fn outcome_labels(dim: usize) -> Result<Vec<&'static str>> {
    match dim {
        2 => Ok(vec!["V", "H"]),
        4 => Ok(vec!["VV", "VH", "HV", "HH"]),
        d => Err(Error::DimensionMismatch { expected: 4, actual: d }),
    }
}

/// `U^dagger |j><j| U` for every basis state `j`: entry `(a, b)` is
/// `conj(U_ja) U_jb`.
fn rotated_basis_projectors(u: &Operator) -> Vec<DMatrix<C64>> {
    let m = u.matrix();
    let n = m.nrows();
    (0..n)
        .map(|j| DMatrix::from_fn(n, n, |a, b| m[(j, a)].conj() * m[(j, b)]))
        .collect()
}

fn setting_unitary(
    setting: &ProtocolSetting,
    apparatus: &Apparatus,
    dim: usize,
    signal_um: f64,
    idler_um: f64,
) -> Result<Operator> {
    let us = apparatus.signal.unitary(setting.signal, signal_um)?;
    match dim {
        2 => Ok(us),
        4 => {
            let idler = setting.idler.ok_or_else(|| {
                Error::InvalidConfig(format!("setting `{}` has no idler angles", setting.label))
            })?;
            Ok(tensor(&us, &apparatus.idler.unitary(idler, idler_um)?))
        }
        d => Err(Error::DimensionMismatch { expected: 4, actual: d }),
    }
}

fn label_elements(mats: Vec<DMatrix<C64>>, dim: usize) -> Result<Vec<POVMElement>> {
    Ok(outcome_labels(dim)?
        .into_iter()
        .zip(mats)
        .map(|(l, m)| POVMElement { outcome: l.to_string(), operator: Operator::from_matrix(m) })
        .collect())
}

/// `P_j(alpha, beta) = U^dagger P_j U` with each arm at its design
/// wavelength; for two qubits the elements are tensor products of the
/// per-arm rotated projectors.
pub fn ideal_projectors(setting: &ProtocolSetting, apparatus: &Apparatus, dim: usize) -> Result<Vec<POVMElement>> {
    let u = setting_unitary(
        setting,
        apparatus,
        dim,
        apparatus.signal.design_wavelength_um(),
        apparatus.idler.design_wavelength_um(),
    )?;
    label_elements(rotated_basis_projectors(&u), dim)
}

/// `Lambda_j = sum_k P(lambda_k) U_k^dagger P_j U_k`, with the idler arm
/// evaluated at the wavelength slaved to each signal sample.
pub fn fuzzy_povm(
    setting: &ProtocolSetting,
    apparatus: &Apparatus,
    spectral: &SpectralGrid,
    dim: usize,
) -> Result<Vec<POVMElement>> {
    spectral.validate()?;
    let idlers = spectral.idler_wavelengths()?;
    let mut acc = vec![DMatrix::from_element(dim, dim, ZERO); dim];
    for (point, &li) in spectral.points.iter().zip(&idlers) {
        let u = setting_unitary(setting, apparatus, dim, point.wavelength_um, li)?;
        for (a, p) in acc.iter_mut().zip(rotated_basis_projectors(&u)) {
            a.zip_apply(&p, |x, y| *x += y * point.weight);
        }
    }
    label_elements(acc, dim)
}

/// Checks hermiticity, eigenvalues in `[-tol, 1 + tol]` and `sum = I`.
pub fn check_povm(elements: &[POVMElement], tol: f64) -> Result<()> {
    let dim = elements
        .first()
        .map(|e| e.operator.dim())
        .ok_or_else(|| Error::IncompleteOperators("empty element list".into()))?;
    let mut sum = Operator::zeros(dim);
    for e in elements {
        if e.operator.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: e.operator.dim() });
        }
        if !e.operator.is_hermitian(tol) {
            return Err(Error::IncompleteOperators(format!("element `{}` is not Hermitian", e.outcome)));
        }
        let eig = e.operator.hermitian_eigenvalues();
        if eig[0] < -tol || eig[eig.len() - 1] > 1.0 + tol {
            return Err(Error::IncompleteOperators(format!(
                "element `{}` has eigenvalues outside [0, 1]",
                e.outcome
            )));
        }
        sum.add_assign_scaled(&e.operator, 1.0);
    }
    let defect = sum.frobenius_distance(&Operator::identity(dim));
    if defect > tol {
        return Err(Error::IncompleteOperators(format!("elements sum to identity only within {defect:e}")));
    }
    Ok(())
}

/// Real coordinates of a Hermitian matrix in an orthonormal basis of the
/// Hermitian matrices (diagonal, then `sqrt 2` Re/Im of the upper triangle).
pub(crate) fn hermitian_coordinates(m: &DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        v.push(m[(i, i)].re);
    }
    for i in 0..n {
        for j in i + 1..n {
            v.push(2f64.sqrt() * m[(i, j)].re);
            v.push(2f64.sqrt() * m[(i, j)].im);
        }
    }
    v
}

/// Rank of the Gram matrix of the vectorized operators (full rank is `s^2`).
pub fn operator_span_rank(sets: &[Vec<POVMElement>]) -> usize {
    let Some(dim) = sets.iter().flatten().next().map(|e| e.operator.dim()) else {
        return 0;
    };
    let k = dim * dim;
    let mut gram = DMatrix::<f64>::zeros(k, k);
    for e in sets.iter().flatten() {
        let v = hermitian_coordinates(e.operator.matrix());
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] += v[i] * v[j];
            }
        }
    }
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let max = eig.iter().cloned().fold(0.0, f64::max);
    eig.iter().filter(|&&x| x > 1e-10 * max).count()
}

/// A complete measurement protocol with both operator models attached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementProtocol {
    pub dim: usize,
    pub symmetry: Symmetry,
    pub layout: Layout,
    pub settings: Vec<ProtocolSetting>,
    pub apparatus: Apparatus,
    pub spectral: SpectralGrid,
    pub ideal: Vec<Vec<POVMElement>>,
    pub fuzzy: Vec<Vec<POVMElement>>,
}

/// Builds per-arm settings from the polyhedron directions and attaches ideal
/// and fuzzy operators to every setting.
pub fn build_protocol(
    symmetry: Symmetry,
    layout: Layout,
    dim: usize,
    apparatus: &Apparatus,
    spectral: &SpectralGrid,
) -> Result<MeasurementProtocol> {
    outcome_labels(dim)?;
    let dirs = setting_directions(symmetry, layout);
    let per_arm = |arm: &ArmOptics| -> Result<Vec<(String, PlateAngles)>> {
        dirs.iter()
            .map(|&n| Ok((direction_label(n), angles_for_direction(n, arm, arm.design_wavelength_um())?)))
            .collect()
    };
    let signal = per_arm(&apparatus.signal)?;
    let settings: Vec<ProtocolSetting> = if dim == 2 {
        signal
            .into_iter()
            .map(|(label, a)| ProtocolSetting { label, signal: a, idler: None })
            .collect()
    } else {
        let idler = if apparatus.idler == apparatus.signal { signal.clone() } else { per_arm(&apparatus.idler)? };
        signal
            .iter()
            .flat_map(|(ls, a)| {
                idler.iter().map(move |(li, b)| ProtocolSetting {
                    label: format!("{ls}|{li}"),
                    signal: *a,
                    idler: Some(*b),
                })
            })
            .collect()
    };
    let ideal = settings
        .iter()
        .map(|s| ideal_projectors(s, apparatus, dim))
        .collect::<Result<Vec<_>>>()?;
    let fuzzy = settings
        .iter()
        .map(|s| fuzzy_povm(s, apparatus, spectral, dim))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementProtocol {
        dim,
        symmetry,
        layout,
        settings,
        apparatus: apparatus.clone(),
        spectral: spectral.clone(),
        ideal,
        fuzzy,
    })
}

impl MeasurementProtocol {
    pub fn operators(&self, model: OperatorModel) -> &[Vec<POVMElement>] {
        match model {
            OperatorModel::Standard => &self.ideal,
            OperatorModel::Fuzzy => &self.fuzzy,
        }
    }

    pub fn n_settings(&self) -> usize {
        self.settings.len()
    }

    pub fn name(&self) -> String {
        let layout = match self.layout {
            Layout::Faces => "faces",
            Layout::Bases => "bases",
        };
        format!("{}/{}/dim{}", self.symmetry.name(), layout, self.dim)
    }

    pub fn is_informationally_complete(&self, model: OperatorModel) -> bool {
        operator_span_rank(self.operators(model)) == self.dim * self.dim
    }

    /// Pretty JSON: angles at 12 significant digits, operators as `[re, im]`
    /// pairs.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// SHA-256 of the JSON serialization, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}
