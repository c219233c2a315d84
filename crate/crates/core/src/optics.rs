//! Birefringent dispersion, wave-plate geometry and retarder unitaries, SPDC
//! phase matching and spectral discretization.
//!
//! Wavelengths are in micrometres throughout; angles and optical thicknesses
//! are in radians. The optical thickness `delta = pi h |n_e - n_o| / lambda`
//! is half the retardance, so a half-wave plate of order `k` has
//! `delta = pi/2 + pi k` and a quarter-wave plate `delta = pi/4 + pi k`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quantum::Operator;
use num_complex::Complex64 as C64;

/// Default number of midpoint samples used to discretize a finite spectrum.
pub const DEFAULT_SPECTRAL_POINTS: usize = 64;

const QUARTZ_JSON: &str = include_str!("../data/quartz.json");

/// Functional form of the index curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DispersionForm {
    /// `n^2 = A + B l^2 / (l^2 - C) + D l^2 / (l^2 - E)`, coefficients `[A, B, C, D, E]`.
    TwoPoleSellmeier,
    /// `n^2 = 1 + sum_i B_i l^2 / (l^2 - C_i)`, coefficients `[B_1, C_1, B_2, C_2, ...]`.
    Sellmeier,
}

impl DispersionForm {
    pub fn id(self) -> &'static str {
        match self {
            DispersionForm::TwoPoleSellmeier => "two-pole-sellmeier",
            DispersionForm::Sellmeier => "sellmeier",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "two-pole-sellmeier" => Ok(DispersionForm::TwoPoleSellmeier),
            "sellmeier" => Ok(DispersionForm::Sellmeier),
            other => Err(Error::UnknownDispersionForm(other.to_string())),
        }
    }

    fn check_coefficients(self, c: &[f64]) -> Result<()> {
        let ok = match self {
            DispersionForm::TwoPoleSellmeier => c.len() == 5,
            DispersionForm::Sellmeier => !c.is_empty() && c.len() % 2 == 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "{} coefficients are invalid for form `{}`",
                c.len(),
                self.id()
            )))
        }
    }

    fn index(self, c: &[f64], lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        let n2 = match self {
            DispersionForm::TwoPoleSellmeier => {
                c[0] + c[1] * l2 / (l2 - c[2]) + c[3] * l2 / (l2 - c[4])
            }
            DispersionForm::Sellmeier => {
                1.0 + c.chunks_exact(2).map(|bc| bc[0] * l2 / (l2 - bc[1])).sum::<f64>()
            }
        };
        n2.sqrt()
    }
}

/// On-disk layout of a dispersion model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct DispersionFile {
    name: String,
    form_id: String,
    coefficients_o: Vec<f64>,
    coefficients_e: Vec<f64>,
    range_um: [f64; 2],
}

/// Ordinary and extraordinary index curves of a uniaxial crystal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DispersionFile", into = "DispersionFile")]
pub struct DispersionModel {
    name: String,
    form: DispersionForm,
    coefficients_o: Vec<f64>,
    coefficients_e: Vec<f64>,
    range_um: [f64; 2],
}

impl TryFrom<DispersionFile> for DispersionModel {
    type Error = Error;

    fn try_from(f: DispersionFile) -> Result<Self> {
        let form = DispersionForm::from_id(&f.form_id)?;
        DispersionModel::new(f.name, form, f.coefficients_o, f.coefficients_e, f.range_um)
    }
}

impl From<DispersionModel> for DispersionFile {
    fn from(m: DispersionModel) -> Self {
        DispersionFile {
            name: m.name,
            form_id: m.form.id().to_string(),
            coefficients_o: m.coefficients_o,
            coefficients_e: m.coefficients_e,
            range_um: m.range_um,
        }
    }
}

impl DispersionModel {
    /// Builds a model and checks `n > 1` and `|n_e - n_o| > 0` across the
    /// valid range.
    pub fn new(
        name: impl Into<String>,
        form: DispersionForm,
        coefficients_o: Vec<f64>,
        coefficients_e: Vec<f64>,
        range_um: [f64; 2],
    ) -> Result<Self> {
        form.check_coefficients(&coefficients_o)?;
        form.check_coefficients(&coefficients_e)?;
        let [lo, hi] = range_um;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::InvalidConfig(format!("bad wavelength range [{lo}, {hi}]")));
        }
        let model = Self { name: name.into(), form, coefficients_o, coefficients_e, range_um };
        const PROBES: usize = 257;
        for i in 0..PROBES {
            let l = lo + (hi - lo) * i as f64 / (PROBES - 1) as f64;
            let (no, ne) = (model.n_o_unchecked(l), model.n_e_unchecked(l));
            if !(no > 1.0 && ne > 1.0) || !((ne - no).abs() > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "dispersion model `{}` is unphysical at {l} um (n_o = {no}, n_e = {ne})",
                    model.name
                )));
            }
        }
        Ok(model)
    }

    /// Crystalline quartz, bundled with the crate.
    pub fn quartz() -> Arc<DispersionModel> {
        Arc::new(Self::from_json(QUARTZ_JSON).expect("bundled quartz data is valid"))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<DispersionFile>(s)?.try_into()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dispersion model serializes");
        s.push('\n');
        s
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn form(&self) -> DispersionForm {
        self.form
    }

    pub fn range_um(&self) -> [f64; 2] {
        self.range_um
    }

    fn check_range(&self, lambda: f64) -> Result<()> {
        let [lo, hi] = self.range_um;
        if lambda.is_finite() && lambda >= lo && lambda <= hi {
            Ok(())
        } else {
            Err(Error::OutOfRange { wavelength_um: lambda, lo, hi })
        }
    }

    fn n_o_unchecked(&self, lambda: f64) -> f64 {
        self.form.index(&self.coefficients_o, lambda)
    }

    fn n_e_unchecked(&self, lambda: f64) -> f64 {
        self.form.index(&self.coefficients_e, lambda)
    }

    pub fn n_o(&self, lambda: f64) -> Result<f64> {
        self.check_range(lambda)?;
        Ok(self.n_o_unchecked(lambda))
    }

    pub fn n_e(&self, lambda: f64) -> Result<f64> {
        self.check_range(lambda)?;
        Ok(self.n_e_unchecked(lambda))
    }

    /// `|n_e(lambda) - n_o(lambda)|`.
    pub fn birefringence(&self, lambda: f64) -> Result<f64> {
        self.check_range(lambda)?;
        Ok((self.n_e_unchecked(lambda) - self.n_o_unchecked(lambda)).abs())
    }
}

pub fn birefringence(model: &DispersionModel, lambda_um: f64) -> Result<f64> {
    model.birefringence(lambda_um)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlateKind {
    Half,
    Quarter,
}

impl PlateKind {
    /// Zero-order optical thickness at the design wavelength.
    pub fn base_thickness(self) -> f64 {
        match self {
            PlateKind::Half => FRAC_PI_2,
            PlateKind::Quarter => FRAC_PI_4,
        }
    }

    /// Design optical thickness `pi/2 + pi k` or `pi/4 + pi k`.
    pub fn design_optical_thickness(self, order: u32) -> f64 {
        self.base_thickness() + PI * order as f64
    }
}

/// Geometric thickness giving the design optical thickness at `lambda0_um`:
/// `h = (k + 1/2) lambda0 / dn` (half) or `(k + 1/4) lambda0 / dn` (quarter).
pub fn plate_thickness(
    kind: PlateKind,
    order: u32,
    lambda0_um: f64,
    model: &DispersionModel,
) -> Result<f64> {
    let dn = model.birefringence(lambda0_um)?;
    Ok(kind.design_optical_thickness(order) / PI * lambda0_um / dn)
}

/// `delta = pi h dn(lambda) / lambda`.
pub fn optical_thickness(thickness_um: f64, lambda_um: f64, model: &DispersionModel) -> Result<f64> {
    if !(thickness_um > 0.0) {
        return Err(Error::InvalidConfig(format!("plate thickness must be positive, got {thickness_um}")));
    }
    Ok(PI * thickness_um * model.birefringence(lambda_um)? / lambda_um)
}

/// Retarder unitary for optical thickness `delta` and fast axis at `alpha`
/// from vertical:
///
/// ```text
/// [ cos d - i sin d cos 2a      -i sin d sin 2a      ]
/// [   -i sin d sin 2a        cos d + i sin d cos 2a  ]
/// ```
pub fn waveplate_unitary(delta: f64, alpha: f64) -> Operator {
    let (sd, cd) = delta.sin_cos();
    let (s2a, c2a) = (2.0 * alpha).sin_cos();
    Operator::from_2x2([
        [C64::new(cd, -sd * c2a), C64::new(0.0, -sd * s2a)],
        [C64::new(0.0, -sd * s2a), C64::new(cd, sd * c2a)],
    ])
}

/// Physical wave plate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePlateSpec {
    pub kind: PlateKind,
    pub order: u32,
    pub thickness_um: f64,
    pub design_wavelength_um: f64,
    pub dispersion: Arc<DispersionModel>,
}

impl WavePlateSpec {
    /// Plate whose thickness is derived exactly from its order (no rounding).
    pub fn from_order(
        kind: PlateKind,
        order: u32,
        design_wavelength_um: f64,
        dispersion: Arc<DispersionModel>,
    ) -> Result<Self> {
        let thickness_um = plate_thickness(kind, order, design_wavelength_um, &dispersion)?;
        Ok(Self { kind, order, thickness_um, design_wavelength_um, dispersion })
    }

    pub fn optical_thickness(&self, lambda_um: f64) -> Result<f64> {
        optical_thickness(self.thickness_um, lambda_um, &self.dispersion)
    }

    pub fn unitary(&self, angle: f64, lambda_um: f64) -> Result<Operator> {
        Ok(waveplate_unitary(self.optical_thickness(lambda_um)?, angle))
    }
}

/// Maps an angle into `(-pi/2, pi/2]`, the period of a wave plate.
pub fn wrap_plate_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(PI);
    if r > FRAC_PI_2 {
        r - PI
    } else {
        r
    }
}

/// A plate rotated to a given fast-axis angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePlateSetting {
    pub plate: WavePlateSpec,
    angle: f64,
}

impl WavePlateSetting {
    pub fn new(plate: WavePlateSpec, angle: f64) -> Self {
        Self { plate, angle: wrap_plate_angle(angle) }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn unitary(&self, lambda_um: f64) -> Result<Operator> {
        self.plate.unitary(self.angle, lambda_um)
    }
}

/// `U = QWP(delta2(lambda), beta) . HWP(delta1(lambda), alpha)`: the light
/// crosses the half-wave plate first.
pub fn basis_unitary(hwp: &WavePlateSetting, qwp: &WavePlateSetting, lambda_um: f64) -> Result<Operator> {
    Ok(&qwp.unitary(lambda_um)? * &hwp.unitary(lambda_um)?)
}

/// Idler wavelength fixed by energy conservation,
/// `lambda_i = lambda_s lambda_p / (lambda_s - lambda_p)`.
pub fn idler_wavelength(lambda_s_um: f64, lambda_p_um: f64) -> Result<f64> {
    if !(lambda_p_um > 0.0 && lambda_s_um > lambda_p_um) || !lambda_s_um.is_finite() {
        return Err(Error::Domain(format!(
            "need lambda_s > lambda_p > 0, got lambda_s = {lambda_s_um}, lambda_p = {lambda_p_um}"
        )));
    }
    Ok(lambda_s_um * lambda_p_um / (lambda_s_um - lambda_p_um))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub wavelength_um: f64,
    pub weight: f64,
}

/// Discretized signal spectrum `P(lambda_k)` with the pump that slaves the
/// idler wavelength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub center_um: f64,
    pub width_um: f64,
    pub pump_um: f64,
    pub points: Vec<SpectralPoint>,
}

impl SpectralGrid {
    pub fn monochromatic(center_um: f64, pump_um: f64) -> Self {
        Self {
            center_um,
            width_um: 0.0,
            pump_um,
            points: vec![SpectralPoint { wavelength_um: center_um, weight: 1.0 }],
        }
    }

    pub fn is_monochromatic(&self) -> bool {
        self.points.len() == 1
    }

    /// Checks weights and support.
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidGrid("no spectral points".into()));
        }
        let total: f64 = self.points.iter().map(|p| p.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidGrid(format!("weights sum to {total}")));
        }
        let half = self.width_um / 2.0;
        for p in &self.points {
            if p.weight < 0.0 || !p.weight.is_finite() {
                return Err(Error::InvalidGrid(format!("negative weight {}", p.weight)));
            }
            if (p.wavelength_um - self.center_um).abs() > half * (1.0 + 1e-12) + 1e-15 {
                return Err(Error::InvalidGrid(format!(
                    "wavelength {} outside the filter band",
                    p.wavelength_um
                )));
            }
        }
        Ok(())
    }

    /// Idler wavelength paired with each signal sample.
    pub fn idler_wavelengths(&self) -> Result<Vec<f64>> {
        self.points.iter().map(|p| idler_wavelength(p.wavelength_um, self.pump_um)).collect()
    }
}

/// Uniform spectrum of full width `width_um`, sampled at the midpoints of
/// `n_points` equal subintervals.
pub fn spectral_grid(center_um: f64, width_um: f64, pump_um: f64, n_points: usize) -> Result<SpectralGrid> {
    if !(width_um >= 0.0) || !width_um.is_finite() {
        return Err(Error::InvalidGrid(format!("width must be nonnegative, got {width_um}")));
    }
    if n_points == 0 {
        return Err(Error::InvalidGrid("n_points must be at least 1".into()));
    }
    if width_um == 0.0 && n_points != 1 {
        return Err(Error::InvalidGrid("a zero-width spectrum takes exactly one point".into()));
    }
    let step = width_um / n_points as f64;
    let lo = center_um - width_um / 2.0;
    let weight = 1.0 / n_points as f64;
    let points = (0..n_points)
        .map(|k| SpectralPoint {
            wavelength_um: if n_points == 1 { center_um } else { lo + (k as f64 + 0.5) * step },
            weight,
        })
        .collect();
    let mut grid = SpectralGrid { center_um, width_um, pump_um, points };
    // absorb rounding in 1/n so the weights sum to one
    let total: f64 = grid.points.iter().map(|p| p.weight).sum();
    if let Some(last) = grid.points.last_mut() {
        last.weight += 1.0 - total;
    }
    grid.validate()?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{fidelity_pure, StateVector, ONE, ZERO};

    fn quartz() -> Arc<DispersionModel> {
        DispersionModel::quartz()
    }

    #[test]
    fn quartz_birefringence_at_650nm() {
        // a 396 um order-5 half-wave plate needs dn = 5.5 * 0.65 / 396
        let dn = birefringence(&quartz(), 0.65).unwrap();
        let h = 5.5 * 0.65 / dn;
        assert!((h - 396.0).abs() < 0.5, "dn = {dn}");
        assert!((dn - 0.00903).abs() < 1e-5);
    }

    #[test]
    fn birefringence_is_smooth_and_positive() {
        let q = quartz();
        let a = birefringence(&q, 0.65).unwrap();
        let b = birefringence(&q, 0.65 + 1e-6).unwrap();
        assert!((a - b).abs() < 1e-6);
        for i in 0..=400 {
            let l = 0.4 + 0.4 * i as f64 / 400.0;
            assert!(birefringence(&q, l).unwrap() > 0.0);
        }
    }

    #[test]
    fn out_of_range_wavelength() {
        assert!(matches!(birefringence(&quartz(), 5.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(
            plate_thickness(PlateKind::Half, 5, 0.1, &quartz()),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn order_five_plate_thicknesses() {
        let q = quartz();
        let h = plate_thickness(PlateKind::Half, 5, 0.65, &q).unwrap();
        let qw = plate_thickness(PlateKind::Quarter, 5, 0.65, &q).unwrap();
        assert!((h - 396.0).abs() < 1.0, "h_hwp = {h}");
        assert!((qw - 378.0).abs() < 1.0, "h_qwp = {qw}");
        let h0 = plate_thickness(PlateKind::Half, 0, 0.65, &q).unwrap();
        assert!((h0 - h * 0.5 / 5.5).abs() < 1e-9);
        assert!((h0 - 36.0).abs() < 0.1);
    }

    #[test]
    fn optical_thickness_examples() {
        let q = quartz();
        let d = optical_thickness(396.0, 0.65, &q).unwrap();
        assert!((d - 5.5 * PI).abs() < 1e-2);
        let d2 = optical_thickness(792.0, 0.65, &q).unwrap();
        assert_eq!(d2, 2.0 * d);
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let d = optical_thickness(396.0, 0.6 + 0.001 * i as f64, &q).unwrap();
            assert!(d < prev);
            prev = d;
        }
        assert!(optical_thickness(0.0, 0.65, &q).is_err());
    }

    #[test]
    fn design_thickness_round_trip() {
        let q = quartz();
        for kind in [PlateKind::Half, PlateKind::Quarter] {
            for k in 0..12 {
                for l0 in [0.45, 0.65, 0.81, 1.55] {
                    let p = WavePlateSpec::from_order(kind, k, l0, q.clone()).unwrap();
                    let d = p.optical_thickness(l0).unwrap();
                    assert!((d - kind.design_optical_thickness(k)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn waveplate_examples() {
        assert!(waveplate_unitary(0.0, 0.7).frobenius_distance(&Operator::identity(2)) < 1e-15);
        let u = waveplate_unitary(FRAC_PI_2, 0.0);
        let expected = Operator::from_2x2([[C64::new(0.0, -1.0), ZERO], [ZERO, C64::new(0.0, 1.0)]]);
        assert!(u.frobenius_distance(&expected) < 1e-15);
        let u = waveplate_unitary(FRAC_PI_2, FRAC_PI_4);
        let expected = Operator::from_2x2([[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, -1.0), ZERO]]);
        assert!(u.frobenius_distance(&expected) < 1e-15);
    }

    #[test]
    fn basis_unitary_examples() {
        let q = quartz();
        let hwp = WavePlateSpec::from_order(PlateKind::Half, 5, 0.65, q.clone()).unwrap();
        let qwp = WavePlateSpec::from_order(PlateKind::Quarter, 5, 0.65, q).unwrap();
        let u = basis_unitary(
            &WavePlateSetting::new(hwp.clone(), 0.0),
            &WavePlateSetting::new(qwp.clone(), 0.0),
            0.65,
        )
        .unwrap();
        assert!(u.matrix()[(0, 1)].norm() < 1e-15 && u.matrix()[(1, 0)].norm() < 1e-15);
        assert!(u.is_unitary(1e-12));

        let (a, b) = (0.3, -0.9);
        let at = |l| {
            basis_unitary(&WavePlateSetting::new(hwp.clone(), a), &WavePlateSetting::new(qwp.clone(), b), l)
                .unwrap()
        };
        assert!(at(0.65).frobenius_distance(&at(0.66)) > 0.01);
    }

    #[test]
    fn zero_order_half_wave_plate_rotates_v_to_diagonal() {
        let q = quartz();
        let hwp = WavePlateSpec::from_order(PlateKind::Half, 0, 0.65, q.clone()).unwrap();
        let qwp = WavePlateSpec::from_order(PlateKind::Quarter, 0, 0.65, q).unwrap();
        let v = StateVector::basis(2, 0).unwrap();
        let out = v.apply(&hwp.unitary(PI / 8.0, 0.65).unwrap()).unwrap();
        let d = StateVector::normalized(vec![ONE, ONE]).unwrap();
        assert!((fidelity_pure(&out, &d).unwrap() - 1.0).abs() < 1e-10);

        // a quarter-wave plate on the axes then turns diagonal into circular
        let u = basis_unitary(
            &WavePlateSetting::new(hwp, PI / 8.0),
            &WavePlateSetting::new(qwp, 0.0),
            0.65,
        )
        .unwrap();
        let b = v.apply(&u).unwrap().bloch_vector().unwrap();
        assert!((b[1] - 1.0).abs() < 1e-10, "{b:?}");
    }

    #[test]
    fn idler_examples() {
        assert!((idler_wavelength(0.65, 0.325).unwrap() - 0.65).abs() < 1e-15);
        let li = idler_wavelength(0.66, 0.325).unwrap();
        let oracle = 1.0 / (1.0 / 0.325 - 1.0 / 0.66);
        assert!((li - oracle).abs() < 1e-12);
        assert!((li - 0.6403).abs() < 1e-4);
        assert!(li > 0.325);
        assert!(matches!(idler_wavelength(0.325, 0.325), Err(Error::Domain(_))));
        assert!(idler_wavelength(0.3, 0.325).is_err());
    }

    #[test]
    fn spectral_grid_examples() {
        let g = spectral_grid(0.65, 0.0, 0.325, 1).unwrap();
        assert_eq!(g.points, vec![SpectralPoint { wavelength_um: 0.65, weight: 1.0 }]);
        let g = spectral_grid(0.65, 0.020, 0.325, 4).unwrap();
        let offsets: Vec<f64> = g.points.iter().map(|p| (p.wavelength_um - 0.65) * 1e3).collect();
        for (o, e) in offsets.iter().zip([-7.5, -2.5, 2.5, 7.5]) {
            assert!((o - e).abs() < 1e-9);
        }
        assert!(g.points.iter().all(|p| (p.weight - 0.25).abs() < 1e-15));
        for n in 1..200 {
            let g = spectral_grid(0.65, 0.04, 0.325, n).unwrap();
            let s: f64 = g.points.iter().map(|p| p.weight).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(spectral_grid(0.65, 0.0, 0.325, 3).is_err());
        assert!(spectral_grid(0.65, 0.01, 0.325, 0).is_err());
        assert!(spectral_grid(0.65, -0.01, 0.325, 4).is_err());
    }

    #[test]
    fn angle_wrapping() {
        assert_eq!(wrap_plate_angle(FRAC_PI_2), FRAC_PI_2);
        assert!((wrap_plate_angle(-FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
        assert!((wrap_plate_angle(3.0 * PI / 4.0) + PI / 4.0).abs() < 1e-15);
        assert!((wrap_plate_angle(0.1 + 7.0 * PI) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn dispersion_file_round_trips_bit_exact() {
        let m = DispersionModel::from_json(QUARTZ_JSON).unwrap();
        assert_eq!(m.to_json(), QUARTZ_JSON);
        assert_eq!(DispersionModel::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn dispersion_file_errors() {
        let bad_form = QUARTZ_JSON.replace("two-pole-sellmeier", "cauchy");
        assert!(matches!(DispersionModel::from_json(&bad_form), Err(Error::UnknownDispersionForm(_))));
        let unphysical = DispersionModel::new(
            "flat",
            DispersionForm::Sellmeier,
            vec![0.5, 0.01],
            vec![0.5, 0.01],
            [0.4, 0.8],
        );
        assert!(unphysical.is_err());
    }
}
