//! Geometry search: rod length for resonance matching and fin length for
//! peak thrust.

use serde::Serialize;

use crate::calibration::nelder_mead::{nelder_mead, NelderMeadOptions};
use crate::config::ToolkitConfig;
use crate::error::{Error, Result};
use crate::io::{csv_writer, fmt_f64};
use crate::modal::{build_reduced_model, Axis, FlexibleFinGeometry, FluidProperties, ModalConfig, RigidPartGeometry};
use crate::par::Exec;

/// ((f1 − target) / target)²
pub fn resonance_mismatch(
    rigid: &RigidPartGeometry,
    fin: &FlexibleFinGeometry,
    fluid: &FluidProperties,
    modal: &ModalConfig,
    target_freq: f64,
) -> Result<f64> {
    if !(target_freq > 0.0) {
        return Err(Error::validation("target_freq", "must be positive"));
    }
    let f1 = build_reduced_model(rigid, fin, fluid, modal)?.natural_frequencies().f1;
    Ok(((f1 - target_freq) / target_freq).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    GoldenSection,
    /// f1 was not monotone over the bounds, so a dense grid located the
    /// bracket before golden-section refinement.
    GridFallback,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RodLengthResult {
    /// m
    pub length: f64,
    pub mismatch: f64,
    /// Hz
    pub f1: f64,
    pub method: SearchMethod,
    /// Optimum sits on a bound, so the true minimizer may lie outside.
    pub at_boundary: bool,
    /// Every (length, mismatch) evaluated, in order.
    pub probes: Vec<(f64, f64)>,
}

/// Golden-section tolerance on rod length, m.
pub const ROD_LENGTH_TOL: f64 = 1e-5;
const MONOTONE_PROBES: usize = 9;
const FALLBACK_GRID: usize = 201;

fn check_bounds(bounds: (f64, f64), name: &str) -> Result<()> {
    let (lo, hi) = bounds;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
        return Err(Error::validation(name, format!("need 0 < lower <= upper, got [{lo}, {hi}]")));
    }
    Ok(())
}

fn golden_section(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<()> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    f(0.5 * (a + b))?;
    Ok(())
}

/// Rod length whose first mode best matches `target_freq`.
pub fn optimize_rod_length(bounds: (f64, f64), config: &ToolkitConfig, target_freq: f64) -> Result<RodLengthResult> {
    check_bounds(bounds, "rod_length_bounds")?;
    let (lo, hi) = bounds;
    let mut probes = Vec::new();
    let f1_at = |length: f64| -> Result<f64> {
        let mut rigid = config.rigid.clone();
        rigid.rod_length = length;
        build_reduced_model(&rigid, &config.fin, &config.fluid, &config.modal).map(|m| m.natural_frequencies().f1)
    };
    let mut eval = |length: f64| -> Result<f64> {
        let f1 = f1_at(length)?;
        let m = ((f1 - target_freq) / target_freq).powi(2);
        probes.push((length, m));
        Ok(m)
    };
    if !(target_freq > 0.0) {
        return Err(Error::validation("target_freq", "must be positive"));
    }

    let method = if lo == hi {
        eval(lo)?;
        SearchMethod::Degenerate
    } else {
        let grid: Vec<f64> = (0..MONOTONE_PROBES)
            .map(|i| lo + (hi - lo) * i as f64 / (MONOTONE_PROBES - 1) as f64)
            .collect();
        let freqs = grid.iter().map(|&l| f1_at(l)).collect::<Result<Vec<_>>>()?;
        let monotone = freqs.windows(2).all(|w| w[1] < w[0]) || freqs.windows(2).all(|w| w[1] > w[0]);
        if monotone {
            golden_section(&mut eval, lo, hi, ROD_LENGTH_TOL)?;
            SearchMethod::GoldenSection
        } else {
            let step = (hi - lo) / (FALLBACK_GRID - 1) as f64;
            let mut best = (lo, f64::INFINITY);
            for i in 0..FALLBACK_GRID {
                let l = lo + step * i as f64;
                let m = eval(l)?;
                if m < best.1 {
                    best = (l, m);
                }
            }
            golden_section(&mut eval, (best.0 - step).max(lo), (best.0 + step).min(hi), ROD_LENGTH_TOL)?;
            SearchMethod::GridFallback
        }
    };

    let &(length, mismatch) = probes
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one probe");
    let at_boundary = method != SearchMethod::Degenerate
        && (length - lo < 2.0 * ROD_LENGTH_TOL || hi - length < 2.0 * ROD_LENGTH_TOL);
    Ok(RodLengthResult {
        length,
        mismatch,
        f1: f1_at(length)?,
        method,
        at_boundary,
        probes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinLengthResult {
    /// m
    pub length: f64,
    /// N
    pub thrust: f64,
    /// The 64-point scan as (length, thrust).
    pub grid: Vec<(f64, f64)>,
    /// Refinement evaluations as (length, thrust).
    pub probes: Vec<(f64, f64)>,
}

pub const FIN_GRID_POINTS: usize = 64;

/// Fin length maximizing predicted thrust at `voltage`.
pub fn optimize_fin_length(
    bounds: (f64, f64),
    voltage: f64,
    config: &ToolkitConfig,
    exec: Exec,
) -> Result<FinLengthResult> {
    check_bounds(bounds, "fin_length_bounds")?;
    config.motor.drive_frequency(voltage)?;
    let (lo, hi) = bounds;
    let thrust_at = |length: f64| -> Result<f64> {
        let mut fin = config.fin.clone();
        fin.fin_length = length;
        let asm = crate::thrust::FinAssembly {
            fin: &fin,
            ..config.assembly()
        };
        asm.predict_thrust(voltage)
    };

    if lo == hi {
        let f = thrust_at(lo)?;
        return Ok(FinLengthResult {
            length: lo,
            thrust: f,
            grid: vec![(lo, f)],
            probes: Vec::new(),
        });
    }

    let lengths: Vec<f64> = (0..FIN_GRID_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (FIN_GRID_POINTS - 1) as f64)
        .collect();
    let thrusts = exec.map(&lengths, |&l| thrust_at(l));
    let grid: Vec<(f64, f64)> = lengths
        .iter()
        .zip(thrusts)
        .map(|(&l, f)| f.map(|f| (l, f)))
        .collect::<Result<_>>()?;
    let &(l0, _) = grid.iter().max_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty grid");

    let step = (hi - lo) / (FIN_GRID_POINTS - 1) as f64;
    let mut probes = Vec::new();
    let mut failure = None;
    let opts = NelderMeadOptions {
        initial_step: Some(vec![0.5 * step]),
        x_tol: 1e-9,
        f_tol: 0.0,
        ..NelderMeadOptions::default()
    };
    // Outside the bounds the objective is the boundary thrust plus a
    // distance penalty, which keeps the simplex inside.
    let scale = grid.iter().map(|g| g.1.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    nelder_mead(
        |x| {
            let l = x[0].clamp(lo, hi);
            match thrust_at(l) {
                Ok(f) => {
                    if l == x[0] {
                        probes.push((l, f));
                    }
                    -f + scale * (x[0] - l).abs() / step
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        &[l0],
        &opts,
    )
    .map_err(|e| failure.take().unwrap_or(e))?;

    let &(length, thrust) = grid
        .iter()
        .chain(&probes)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    Ok(FinLengthResult {
        length,
        thrust,
        grid,
        probes,
    })
}

/// Everything a designer looks at for one geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub rod_length_m: f64,
    pub rod_height_m: f64,
    pub rod_width_m: f64,
    pub fin_length_m: f64,
    pub f1_hz: f64,
    pub f2_hz: f64,
    pub first_mode_axis: Axis,
    pub mode_gap_ratio: f64,
    pub assembly_f1_hz: f64,
    pub voltage_v: f64,
    pub drive_freq_hz: f64,
    pub a_x1_m: f64,
    pub a_x2_m: f64,
    pub a_x3_m: f64,
    pub a_1y_m: f64,
    pub streaming_velocity_mps: f64,
    pub thrust_n: f64,
    pub resonance_mismatch: f64,
}

pub const REPORT_CSV_HEADER: [&str; 18] = [
    "rod_length_m",
    "rod_height_m",
    "rod_width_m",
    "fin_length_m",
    "f1_hz",
    "f2_hz",
    "first_mode_axis",
    "mode_gap_ratio",
    "assembly_f1_hz",
    "voltage_v",
    "drive_freq_hz",
    "a_x1_m",
    "a_x2_m",
    "a_x3_m",
    "a_1y_m",
    "streaming_velocity_mps",
    "thrust_n",
    "resonance_mismatch",
];

/// Report at the motor's rated voltage, with mismatch against the drive
/// frequency there.
pub fn design_report(config: &ToolkitConfig) -> Result<DesignReport> {
    config.validate()?;
    let model = build_reduced_model(&config.rigid, &config.fin, &config.fluid, &config.modal)?;
    let nf = model.natural_frequencies();
    let voltage = config.motor.rated_voltage;
    let point = config.assembly().evaluate(voltage)?;
    let mismatch = ((nf.f1 - point.frequency) / point.frequency).powi(2);
    Ok(DesignReport {
        rod_length_m: config.rigid.rod_length,
        rod_height_m: config.rigid.rod_height,
        rod_width_m: config.rigid.rod_width,
        fin_length_m: config.fin.fin_length,
        f1_hz: nf.f1,
        f2_hz: nf.f2,
        first_mode_axis: nf.axis1,
        mode_gap_ratio: nf.gap_ratio(),
        assembly_f1_hz: model.assembly_first_frequency(),
        voltage_v: voltage,
        drive_freq_hz: point.frequency,
        a_x1_m: point.amplitudes.a_x1,
        a_x2_m: point.amplitudes.a_x2,
        a_x3_m: point.amplitudes.a_x3,
        a_1y_m: point.amplitudes.a_1y,
        streaming_velocity_mps: point.streaming_velocity,
        thrust_n: point.thrust,
        resonance_mismatch: mismatch,
    })
}

impl DesignReport {
    fn axis_name(&self) -> &'static str {
        match self.first_mode_axis {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }

    fn numbers(&self) -> [(&'static str, f64); 17] {
        [
            ("rod_length_m", self.rod_length_m),
            ("rod_height_m", self.rod_height_m),
            ("rod_width_m", self.rod_width_m),
            ("fin_length_m", self.fin_length_m),
            ("f1_hz", self.f1_hz),
            ("f2_hz", self.f2_hz),
            ("mode_gap_ratio", self.mode_gap_ratio),
            ("assembly_f1_hz", self.assembly_f1_hz),
            ("voltage_v", self.voltage_v),
            ("drive_freq_hz", self.drive_freq_hz),
            ("a_x1_m", self.a_x1_m),
            ("a_x2_m", self.a_x2_m),
            ("a_x3_m", self.a_x3_m),
            ("a_1y_m", self.a_1y_m),
            ("streaming_velocity_mps", self.streaming_velocity_mps),
            ("thrust_n", self.thrust_n),
            ("resonance_mismatch", self.resonance_mismatch),
        ]
    }

    /// `key = value` lines, TOML compatible.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.numbers() {
            if k == "mode_gap_ratio" {
                out.push_str(&format!("first_mode_axis = \"{}\"\n", self.axis_name()));
            }
            out.push_str(&format!("{k} = {}\n", fmt_f64(v)));
        }
        out
    }

    fn csv_row(&self) -> Vec<String> {
        let mut row: Vec<String> = Vec::with_capacity(18);
        for (k, v) in self.numbers() {
            if k == "mode_gap_ratio" {
                row.push(self.axis_name().to_string());
            }
            row.push(fmt_f64(v));
        }
        row
    }
}

pub fn write_reports_csv<W: std::io::Write>(reports: &[DesignReport], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(REPORT_CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_row())?;
    }
    w.flush().map_err(|e| Error::Config(format!("writing report: {e}")))?;
    Ok(())
}
