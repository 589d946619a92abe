//! Reduced-order modal models of the fin assembly.
//!
//! The rigid part (rod, housing, motor) is a lumped mass on a mount whose
//! per-axis stiffness is the series combination of cantilever rod bending
//! and an isotropic silicone joint. The flexible fin is a clamped-free strip
//! reduced to one modal mass/spring, optionally loaded by surrounding fluid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::par::Exec;

/// First clamped-free eigenvalue of a uniform beam.
pub const CLAMPED_FREE_LAMBDA1: f64 = 1.875;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidPartGeometry {
    /// L, m
    pub rod_length: f64,
    /// H, m (extent along y)
    pub rod_height: f64,
    /// W, m (extent along x, the fin-normal axis)
    pub rod_width: f64,
    /// L_h, m
    pub housing_length: f64,
    /// L_s, m
    pub cap_length: f64,
    /// D, m
    pub housing_diameter: f64,
    /// Pa
    pub rod_elastic_modulus: f64,
    /// kg/m³
    pub rod_density: f64,
    /// Housing + motor + cap, kg (rod excluded).
    pub rigid_part_mass: f64,
    /// Silicone bond stiffness per unit bonded area, Pa/m.
    pub joint_stiffness_per_area: f64,
}

impl Default for RigidPartGeometry {
    fn default() -> Self {
        Self {
            rod_length: 10e-3,
            rod_height: 7.5e-3,
            rod_width: 3e-3,
            housing_length: 15.5e-3,
            cap_length: 5e-3,
            housing_diameter: 11e-3,
            rod_elastic_modulus: 2.0e9,
            rod_density: 1240.0,
            rigid_part_mass: 3.0e-3,
            joint_stiffness_per_area: 1.0e8,
        }
    }
}

impl RigidPartGeometry {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("rigid.rod_length", self.rod_length)?;
        ensure_positive("rigid.rod_height", self.rod_height)?;
        ensure_positive("rigid.rod_width", self.rod_width)?;
        ensure_positive("rigid.housing_length", self.housing_length)?;
        ensure_positive("rigid.cap_length", self.cap_length)?;
        ensure_positive("rigid.housing_diameter", self.housing_diameter)?;
        ensure_positive("rigid.rod_elastic_modulus", self.rod_elastic_modulus)?;
        ensure_non_negative("rigid.rod_density", self.rod_density)?;
        ensure_positive("rigid.rigid_part_mass", self.rigid_part_mass)?;
        ensure_positive("rigid.joint_stiffness_per_area", self.joint_stiffness_per_area)
    }

    pub fn rod_area(&self) -> f64 {
        self.rod_height * self.rod_width
    }

    pub fn rod_mass(&self) -> f64 {
        self.rod_density * self.rod_length * self.rod_area()
    }

    /// Tip bending stiffness 3EI/L³ for motion along x and y.
    pub fn rod_stiffness(&self) -> (f64, f64) {
        let (h, w) = (self.rod_height, self.rod_width);
        let i_x = h * w.powi(3) / 12.0;
        let i_y = w * h.powi(3) / 12.0;
        let l3 = self.rod_length.powi(3);
        let e = self.rod_elastic_modulus;
        (3.0 * e * i_x / l3, 3.0 * e * i_y / l3)
    }

    pub fn joint_stiffness(&self) -> f64 {
        self.joint_stiffness_per_area * self.rod_area()
    }

    /// Same rod cross-section area, different H/W.
    pub fn with_aspect_ratio(&self, ratio: f64) -> Self {
        let area = self.rod_area();
        Self {
            rod_height: (area * ratio).sqrt(),
            rod_width: (area / ratio).sqrt(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexibleFinGeometry {
    /// L_f, m
    pub fin_length: f64,
    /// t, m
    pub thickness: f64,
    /// b, m
    pub clamped_width: f64,
    /// Pa
    pub elastic_modulus: f64,
    /// kg/m³
    pub density: f64,
    pub poisson_ratio: f64,
}

impl Default for FlexibleFinGeometry {
    fn default() -> Self {
        Self {
            fin_length: 12e-3,
            thickness: 200e-6,
            clamped_width: 11e-3,
            elastic_modulus: 2.5e9,
            density: 1420.0,
            poisson_ratio: 0.34,
        }
    }
}

impl FlexibleFinGeometry {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("fin.fin_length", self.fin_length)?;
        ensure_positive("fin.thickness", self.thickness)?;
        ensure_positive("fin.clamped_width", self.clamped_width)?;
        ensure_positive("fin.elastic_modulus", self.elastic_modulus)?;
        ensure_positive("fin.density", self.density)?;
        if !(0.0..0.5).contains(&self.poisson_ratio) {
            return Err(Error::validation("fin.poisson_ratio", "must lie in [0, 0.5)"));
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.density * self.thickness * self.clamped_width * self.fin_length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidProperties {
    /// kg/m³
    pub density: f64,
    /// Pa·s
    pub dynamic_viscosity: f64,
}

impl FluidProperties {
    pub const WATER: FluidProperties = FluidProperties {
        density: 1000.0,
        dynamic_viscosity: 1.0e-3,
    };

    pub fn validate(&self) -> Result<()> {
        ensure_positive("fluid.density", self.density)?;
        ensure_positive("fluid.dynamic_viscosity", self.dynamic_viscosity)
    }
}

impl Default for FluidProperties {
    fn default() -> Self {
        Self::WATER
    }
}

/// Knobs of the reduced-order model that are not geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalConfig {
    /// Fraction of rod mass lumped at the tip.
    pub rod_mass_participation: f64,
    /// Fraction of (fin + added fluid) mass in the fin's first mode.
    pub fin_modal_mass_fraction: f64,
    /// C_am in Γ = C_am ρ b / (ρ_f t).
    pub added_mass_coefficient: f64,
    pub damping_ratio_x: f64,
    pub damping_ratio_y: f64,
    pub fin_damping_ratio: f64,
    /// Extra bending length contributed by the compliant root clamp, m.
    /// Zero means the fin is clamped exactly at its root.
    pub fin_root_extension: f64,
}

impl Default for ModalConfig {
    fn default() -> Self {
        Self {
            rod_mass_participation: 0.24,
            fin_modal_mass_fraction: 0.25,
            added_mass_coefficient: PI / 4.0,
            damping_ratio_x: 0.05,
            damping_ratio_y: 0.05,
            fin_damping_ratio: 0.1,
            fin_root_extension: 0.0,
        }
    }
}

impl ModalConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("modal.rod_mass_participation", self.rod_mass_participation)?;
        ensure_positive("modal.fin_modal_mass_fraction", self.fin_modal_mass_fraction)?;
        ensure_non_negative("modal.added_mass_coefficient", self.added_mass_coefficient)?;
        ensure_non_negative("modal.damping_ratio_x", self.damping_ratio_x)?;
        ensure_non_negative("modal.damping_ratio_y", self.damping_ratio_y)?;
        ensure_non_negative("modal.fin_damping_ratio", self.fin_damping_ratio)?;
        ensure_non_negative("modal.fin_root_extension", self.fin_root_extension)
    }
}

/// Lumped per-axis model of the rigid part plus one fin mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedOrderModel {
    pub effective_mass_x: f64,
    pub effective_mass_y: f64,
    pub stiffness_x: f64,
    pub stiffness_y: f64,
    pub damping_x: f64,
    pub damping_y: f64,
    pub fin_modal_mass: f64,
    pub fin_modal_stiffness: f64,
    pub fin_modal_damping: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalFrequencies {
    pub f1: f64,
    pub f2: f64,
    pub axis1: Axis,
    pub axis2: Axis,
}

impl NaturalFrequencies {
    /// (f2 − f1) / f1
    pub fn gap_ratio(&self) -> f64 {
        (self.f2 - self.f1) / self.f1
    }
}

fn series(a: f64, b: f64) -> f64 {
    if a.is_infinite() {
        return b;
    }
    if b.is_infinite() {
        return a;
    }
    a * b / (a + b)
}

fn oscillator_hz(k: f64, m: f64) -> f64 {
    (k / m).sqrt() / (2.0 * PI)
}

/// Stiffness-proportional damping for a target damping ratio.
fn damping_for(ratio: f64, k: f64, m: f64) -> f64 {
    2.0 * ratio * (k * m).sqrt()
}

/// Added-mass ratio Γ of a strip of width b vibrating in `fluid`.
pub fn added_mass_ratio(fin: &FlexibleFinGeometry, fluid: &FluidProperties, c_am: f64) -> f64 {
    c_am * fluid.density * fin.clamped_width / (fin.density * fin.thickness)
}

/// First bending frequency of the fin as a clamped-free strip, in Hz.
///
/// With `fluid = None` the strip vibrates in vacuum; otherwise the result is
/// divided by √(1 + Γ) using added-mass coefficient `c_am`.
pub fn fin_first_frequency_with(
    fin: &FlexibleFinGeometry,
    fluid: Option<&FluidProperties>,
    c_am: f64,
    root_extension: f64,
) -> f64 {
    let length = fin.fin_length + root_extension;
    let plate = fin.elastic_modulus * fin.thickness * fin.thickness
        / (12.0 * fin.density * (1.0 - fin.poisson_ratio * fin.poisson_ratio));
    let vacuum = CLAMPED_FREE_LAMBDA1.powi(2) / (2.0 * PI) / (length * length) * plate.sqrt();
    match fluid {
        None => vacuum,
        Some(fl) => vacuum / (1.0 + added_mass_ratio(fin, fl, c_am)).sqrt(),
    }
}

/// [`fin_first_frequency_with`] using the default added-mass coefficient π/4
/// and no root extension.
pub fn fin_first_frequency(fin: &FlexibleFinGeometry, fluid: Option<&FluidProperties>) -> f64 {
    fin_first_frequency_with(fin, fluid, PI / 4.0, 0.0)
}

pub fn build_reduced_model(
    rigid: &RigidPartGeometry,
    fin: &FlexibleFinGeometry,
    fluid: &FluidProperties,
    config: &ModalConfig,
) -> Result<ReducedOrderModel> {
    rigid.validate()?;
    fin.validate()?;
    fluid.validate()?;
    config.validate()?;

    let (k_rod_x, k_rod_y) = rigid.rod_stiffness();
    let k_joint = rigid.joint_stiffness();
    let k_x = series(k_rod_x, k_joint);
    let k_y = series(k_rod_y, k_joint);
    let m = rigid.rigid_part_mass + config.rod_mass_participation * rigid.rod_mass();

    let gamma = added_mass_ratio(fin, fluid, config.added_mass_coefficient);
    let fin_mass = config.fin_modal_mass_fraction * fin.mass() * (1.0 + gamma);
    let f_fin = fin_first_frequency_with(
        fin,
        Some(fluid),
        config.added_mass_coefficient,
        config.fin_root_extension,
    );
    let fin_k = fin_mass * (2.0 * PI * f_fin).powi(2);

    Ok(ReducedOrderModel {
        effective_mass_x: m,
        effective_mass_y: m,
        stiffness_x: k_x,
        stiffness_y: k_y,
        damping_x: damping_for(config.damping_ratio_x, k_x, m),
        damping_y: damping_for(config.damping_ratio_y, k_y, m),
        fin_modal_mass: fin_mass,
        fin_modal_stiffness: fin_k,
        fin_modal_damping: damping_for(config.fin_damping_ratio, fin_k, fin_mass),
    })
}

impl ReducedOrderModel {
    pub fn frequency_x(&self) -> f64 {
        oscillator_hz(self.stiffness_x, self.effective_mass_x)
    }

    pub fn frequency_y(&self) -> f64 {
        oscillator_hz(self.stiffness_y, self.effective_mass_y)
    }

    pub fn fin_frequency(&self) -> f64 {
        oscillator_hz(self.fin_modal_stiffness, self.fin_modal_mass)
    }

    /// Rigid-part modes sorted ascending; ties go to x first.
    pub fn natural_frequencies(&self) -> NaturalFrequencies {
        let fx = self.frequency_x();
        let fy = self.frequency_y();
        if fx <= fy {
            NaturalFrequencies {
                f1: fx,
                f2: fy,
                axis1: Axis::X,
                axis2: Axis::Y,
            }
        } else {
            NaturalFrequencies {
                f1: fy,
                f2: fx,
                axis1: Axis::Y,
                axis2: Axis::X,
            }
        }
    }

    /// Both eigenfrequencies (Hz, ascending) of the x-axis chain
    /// ground, spring k_x, rigid mass, spring k_fin, fin modal mass.
    pub fn assembly_frequencies(&self) -> (f64, f64) {
        let (m1, m2) = (self.effective_mass_x, self.fin_modal_mass);
        let (k1, k2) = (self.stiffness_x, self.fin_modal_stiffness);
        if k2.is_infinite() {
            let f = oscillator_hz(k1, m1 + m2);
            return (f, f64::INFINITY);
        }
        // eigenvalues of M⁻¹K = [[a, b], [c, d]]
        let a = (k1 + k2) / m1;
        let b = -k2 / m1;
        let c = -k2 / m2;
        let d = k2 / m2;
        let half_trace = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b * c).sqrt();
        // The product of the roots is k1 k2 / (m1 m2); dividing by the large
        // root avoids cancellation in half_trace − disc when the modes are far apart.
        let hi = half_trace + disc;
        let lo = (k1 * k2 / (m1 * m2)) / hi;
        (lo.sqrt() / (2.0 * PI), hi.sqrt() / (2.0 * PI))
    }

    pub fn assembly_first_frequency(&self) -> f64 {
        self.assembly_frequencies().0
    }
}

pub fn natural_frequencies(model: &ReducedOrderModel) -> NaturalFrequencies {
    model.natural_frequencies()
}

pub fn assembly_first_frequency(
    rigid: &RigidPartGeometry,
    fin: &FlexibleFinGeometry,
    fluid: &FluidProperties,
    config: &ModalConfig,
) -> Result<f64> {
    Ok(build_reduced_model(rigid, fin, fluid, config)?.assembly_first_frequency())
}

/// Grid axes for [`modal_sweep`]. Absent axes stay at the base geometry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    /// L values, m
    pub rod_length: Option<Vec<f64>>,
    /// H/W values at the base H·W
    pub aspect_ratio: Option<Vec<f64>>,
    /// L_f values, m
    pub fin_length: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    RodLength,
    AspectRatio,
    FinLength,
}

impl SweepAxis {
    pub fn column(&self) -> &'static str {
        match self {
            SweepAxis::RodLength => "rod_length_m",
            SweepAxis::AspectRatio => "aspect_ratio",
            SweepAxis::FinLength => "fin_length_m",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Grid coordinates in the order of [`SweepTable::axes`].
    pub coords: Vec<f64>,
    pub f1: f64,
    pub f2: f64,
    pub gap_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axes: Vec<SweepAxis>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = self.axes.iter().map(|a| a.column().to_string()).collect();
        h.extend(["f1_hz", "f2_hz", "gap_ratio"].map(String::from));
        h
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = crate::io::csv_writer(out);
        w.write_record(self.header())?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.coords.iter().map(|v| crate::io::fmt_f64(*v)).collect();
            rec.extend([row.f1, row.f2, row.gap_ratio].map(crate::io::fmt_f64));
            w.write_record(rec)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<csv>".into(),
            source: e,
        })?;
        Ok(())
    }
}

/// Evaluate the modal model over the Cartesian product of the grid axes.
///
/// Rows are ordered lexicographically over (rod_length, aspect_ratio,
/// fin_length). When `fin_length` is swept the two columns are the assembly
/// (rigid + fin) frequencies; otherwise the rigid-part x/y modes.
pub fn modal_sweep(
    grid: &SweepGrid,
    rigid: &RigidPartGeometry,
    fin: &FlexibleFinGeometry,
    fluid: &FluidProperties,
    config: &ModalConfig,
) -> Result<SweepTable> {
    modal_sweep_with(grid, rigid, fin, fluid, config, Exec::default())
}

pub fn modal_sweep_with(
    grid: &SweepGrid,
    rigid: &RigidPartGeometry,
    fin: &FlexibleFinGeometry,
    fluid: &FluidProperties,
    config: &ModalConfig,
    exec: Exec,
) -> Result<SweepTable> {
    let mut axes = Vec::new();
    let mut values: Vec<&[f64]> = Vec::new();
    for (axis, vals) in [
        (SweepAxis::RodLength, &grid.rod_length),
        (SweepAxis::AspectRatio, &grid.aspect_ratio),
        (SweepAxis::FinLength, &grid.fin_length),
    ] {
        if let Some(v) = vals {
            if v.is_empty() {
                return Err(Error::validation(axis.column(), "empty grid"));
            }
            axes.push(axis);
            values.push(v);
        }
    }
    if axes.is_empty() {
        return Err(Error::validation("sweep", "no grid axis given"));
    }

    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for vals in &values {
        points = points
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }

    let fin_swept = axes.contains(&SweepAxis::FinLength);
    let rows = exec.map(&points, |coords| -> Result<SweepRow> {
        let mut r = rigid.clone();
        let mut f = fin.clone();
        for (axis, v) in axes.iter().zip(coords) {
            match axis {
                SweepAxis::RodLength => r.rod_length = *v,
                SweepAxis::AspectRatio => {
                    ensure_positive("aspect_ratio", *v)?;
                    let a = r.with_aspect_ratio(*v);
                    r.rod_height = a.rod_height;
                    r.rod_width = a.rod_width;
                }
                SweepAxis::FinLength => f.fin_length = *v,
            }
        }
        let model = build_reduced_model(&r, &f, fluid, config)?;
        let (f1, f2) = if fin_swept {
            model.assembly_frequencies()
        } else {
            let n = model.natural_frequencies();
            (n.f1, n.f2)
        };
        Ok(SweepRow {
            coords: coords.clone(),
            f1,
            f2,
            gap_ratio: (f2 - f1) / f1,
        })
    });
    Ok(SweepTable {
        axes,
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_model(kx: f64, ky: f64) -> ReducedOrderModel {
        ReducedOrderModel {
            effective_mass_x: 1.0,
            effective_mass_y: 1.0,
            stiffness_x: kx,
            stiffness_y: ky,
            damping_x: 0.0,
            damping_y: 0.0,
            fin_modal_mass: 1.0,
            fin_modal_stiffness: 1.0,
            fin_modal_damping: 0.0,
        }
    }

    fn defaults() -> (RigidPartGeometry, FlexibleFinGeometry, FluidProperties, ModalConfig) {
        (
            RigidPartGeometry::default(),
            FlexibleFinGeometry::default(),
            FluidProperties::WATER,
            ModalConfig::default(),
        )
    }

    #[test]
    fn unit_oscillator() {
        let n = unit_model(1.0, 1.0).natural_frequencies();
        assert_eq!(n.f1, 1.0 / (2.0 * PI));
        assert_eq!(n.f1, n.f2);
        let n = unit_model(1.0, 4.0).natural_frequencies();
        assert!((n.f2 / n.f1 - 2.0).abs() < 1e-15);
        assert_eq!((n.axis1, n.axis2), (Axis::X, Axis::Y));
    }

    #[test]
    fn square_rod_is_symmetric() {
        let (mut r, f, fl, c) = defaults();
        r.rod_height = 5e-3;
        r.rod_width = 5e-3;
        for l in [4e-3, 10e-3, 20e-3] {
            r.rod_length = l;
            let m = build_reduced_model(&r, &f, &fl, &c).unwrap();
            assert_eq!(m.stiffness_x, m.stiffness_y);
        }
    }

    #[test]
    fn tall_rod_has_soft_x_axis() {
        let (r, f, fl, c) = defaults();
        let m = build_reduced_model(&r, &f, &fl, &c).unwrap();
        assert!(m.stiffness_x < m.stiffness_y);
        assert_eq!(m.natural_frequencies().axis1, Axis::X);
    }

    #[test]
    fn stiff_joint_limit() {
        let (mut r, f, fl, c) = defaults();
        r.joint_stiffness_per_area = 1e16;
        let m = build_reduced_model(&r, &f, &fl, &c).unwrap();
        let (kx, ky) = r.rod_stiffness();
        assert!((m.stiffness_x / kx - 1.0).abs() < 1e-3);
        assert!((m.stiffness_y / ky - 1.0).abs() < 1e-3);
    }

    #[test]
    fn negative_participation_rejected() {
        let (r, f, fl, mut c) = defaults();
        c.rod_mass_participation = -0.1;
        let err = build_reduced_model(&r, &f, &fl, &c).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("rod_mass_participation"));
    }

    #[test]
    fn fin_frequency_closed_form() {
        let fin = FlexibleFinGeometry {
            fin_length: 12e-3,
            thickness: 200e-6,
            elastic_modulus: 2.5e9,
            density: 1420.0,
            poisson_ratio: 0.0,
            ..Default::default()
        };
        let f = fin_first_frequency(&fin, None);
        assert!((f - 297.66).abs() < 0.05, "{f}");
        let long = FlexibleFinGeometry {
            fin_length: 24e-3,
            ..fin.clone()
        };
        assert!((fin_first_frequency(&long, None) * 4.0 / f - 1.0).abs() < 1e-14);
        assert!(fin_first_frequency(&fin, Some(&FluidProperties::WATER)) < f);
    }

    #[test]
    fn assembly_rigid_fin_limit() {
        let mut m = unit_model(3.0, 5.0);
        m.fin_modal_mass = 1e-4;
        m.fin_modal_stiffness = f64::INFINITY;
        let f = m.assembly_first_frequency();
        assert!((f / m.natural_frequencies().f1 - 1.0).abs() < 5e-3);
        m.fin_modal_stiffness = 1e12;
        let g = m.assembly_first_frequency();
        assert!((g / f - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sweep_rejects_empty() {
        let (r, f, fl, c) = defaults();
        let grid = SweepGrid {
            rod_length: Some(vec![]),
            ..Default::default()
        };
        assert!(modal_sweep(&grid, &r, &f, &fl, &c).unwrap_err().is_validation());
        assert!(modal_sweep(&SweepGrid::default(), &r, &f, &fl, &c).is_err());
    }

    #[test]
    fn single_point_sweep_matches_direct() {
        let (r, f, fl, c) = defaults();
        let grid = SweepGrid {
            rod_length: Some(vec![r.rod_length]),
            ..Default::default()
        };
        let t = modal_sweep(&grid, &r, &f, &fl, &c).unwrap();
        assert_eq!(t.rows.len(), 1);
        let n = build_reduced_model(&r, &f, &fl, &c).unwrap().natural_frequencies();
        assert_eq!((t.rows[0].f1, t.rows[0].f2), (n.f1, n.f2));
    }

    #[test]
    fn sweep_order_is_lexicographic_and_exec_independent() {
        let (r, f, fl, c) = defaults();
        let grid = SweepGrid {
            rod_length: Some(vec![6e-3, 8e-3, 10e-3]),
            aspect_ratio: Some(vec![1.0, 2.0]),
            fin_length: None,
        };
        let a = modal_sweep_with(&grid, &r, &f, &fl, &c, Exec::Sequential).unwrap();
        let b = modal_sweep_with(&grid, &r, &f, &fl, &c, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        let coords: Vec<_> = a.rows.iter().map(|r| r.coords.clone()).collect();
        assert_eq!(coords[0], vec![6e-3, 1.0]);
        assert_eq!(coords[1], vec![6e-3, 2.0]);
        assert_eq!(coords[5], vec![10e-3, 2.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn mode_ordering_follows_aspect(h in 1e-3f64..10e-3, w in 1e-3f64..10e-3,
                                            l in 4e-3f64..20e-3, kj in 1e6f64..1e10) {
                let (mut r, f, fl, c) = defaults();
                r.rod_height = h; r.rod_width = w; r.rod_length = l;
                r.joint_stiffness_per_area = kj;
                let n = build_reduced_model(&r, &f, &fl, &c).unwrap().natural_frequencies();
                if h > w { prop_assert_eq!(n.axis1, Axis::X); }
                if h < w { prop_assert_eq!(n.axis1, Axis::Y); }
            }

            #[test]
            fn series_bound(h in 1e-3f64..10e-3, w in 1e-3f64..10e-3, kj in 1e6f64..1e11) {
                let (mut r, f, fl, c) = defaults();
                r.rod_height = h; r.rod_width = w; r.joint_stiffness_per_area = kj;
                let m = build_reduced_model(&r, &f, &fl, &c).unwrap();
                let (kx, ky) = r.rod_stiffness();
                let kj = r.joint_stiffness();
                prop_assert!(m.stiffness_x <= kx.min(kj) * (1.0 + 1e-12));
                prop_assert!(m.stiffness_y <= ky.min(kj) * (1.0 + 1e-12));
            }

            #[test]
            fn stiffness_scale(kx in 1.0f64..1e6, ky in 1.0f64..1e6, m in 1e-4f64..1.0) {
                let mut a = unit_model(kx, ky);
                a.effective_mass_x = m; a.effective_mass_y = m;
                let mut b = a.clone();
                b.stiffness_x *= 4.0; b.stiffness_y *= 4.0;
                let (na, nb) = (a.natural_frequencies(), b.natural_frequencies());
                prop_assert!((nb.f1 / na.f1 - 2.0).abs() < 1e-12);
                prop_assert!((nb.f2 / na.f2 - 2.0).abs() < 1e-12);
            }
        }
    }
}
