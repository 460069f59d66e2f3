//! Geometric self-folding model: fold angle from laminate geometry, its
//! inverse for design work, and validation statistics against measured
//! gap–angle data.
//!
//! The hinge folds because the exposed heat-shrink layer contracts over the
//! board gap; once the rigid board edges touch, the bend radius is set by
//! the stacked layer thicknesses and the fold angle is `gap / radius`.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// Layer thicknesses and board gap defining the fold geometry. Lengths in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaminateSpec {
    /// Rigid substrate thickness.
    pub t_fr4_mm: f64,
    /// Heat-shrink layer thickness after shrinkage (shrinkage thickens the
    /// sheet, so this is usually larger than the flat value).
    pub t_po_shrunk_mm: f64,
    /// Heat-shrink layer thickness before shrinkage.
    pub t_po_flat_mm: f64,
    /// Board gap at the hinge line.
    pub gap_mm: f64,
}

impl LaminateSpec {
    pub fn new(t_fr4_mm: f64, t_po_shrunk_mm: f64, t_po_flat_mm: f64, gap_mm: f64) -> Result<Self> {
        let spec = Self {
            t_fr4_mm,
            t_po_shrunk_mm,
            t_po_flat_mm,
            gap_mm,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Replaces the gap, keeping the layer stack.
    pub fn with_gap(self, gap_mm: f64) -> Result<Self> {
        Self::new(self.t_fr4_mm, self.t_po_shrunk_mm, self.t_po_flat_mm, gap_mm)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_fr4_mm", self.t_fr4_mm),
            ("t_po_shrunk_mm", self.t_po_shrunk_mm),
            ("t_po_flat_mm", self.t_po_flat_mm),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if !(self.gap_mm >= 0.0) || !self.gap_mm.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "gap_mm must be non-negative, got {}",
                self.gap_mm
            )));
        }
        Ok(())
    }
}

/// Measured thicknesses of the stack used for model validation:
/// board 0.55 mm, shrink layer 0.44 mm shrunk / 0.35 mm flat.
impl Default for LaminateSpec {
    fn default() -> Self {
        Self {
            t_fr4_mm: 0.55,
            t_po_shrunk_mm: 0.44,
            t_po_flat_mm: 0.35,
            gap_mm: 1.0,
        }
    }
}

/// Bend radius of the folded hinge: the summed thickness of the rigid board
/// and the shrunk polymer layer.
pub fn curvature_radius(spec: &LaminateSpec) -> f64 {
    spec.t_fr4_mm + spec.t_po_shrunk_mm
}

/// Final fold angle in radians: `gap / curvature_radius`.
///
/// Fails with [`Error::InvalidGeometry`] when the gap asks for more than a
/// half-turn — the board edges meet before the hinge can fold past π.
pub fn fold_angle(spec: &LaminateSpec) -> Result<f64> {
    spec.validate()?;
    let theta = spec.gap_mm / curvature_radius(spec);
    if theta > std::f64::consts::PI {
        return Err(Error::InvalidGeometry(format!(
            "gap {} mm folds to {:.2}° > 180°; reduce the gap or thicken the stack",
            spec.gap_mm,
            theta.to_degrees()
        )));
    }
    Ok(theta)
}

/// Board gap that folds to `theta_rad`, for the given layer stack
/// (the spec's own gap is ignored). Inverse of [`fold_angle`].
pub fn gap_for_angle(theta_rad: f64, spec: &LaminateSpec) -> Result<f64> {
    spec.validate()?;
    if !(0.0..=std::f64::consts::PI).contains(&theta_rad) {
        return Err(Error::OutOfRange {
            what: "fold angle",
            message: format!("{theta_rad} rad not in [0, π]"),
        });
    }
    Ok(theta_rad * curvature_radius(spec))
}

/// One measured sample: board gap and the fold angle it produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSample {
    pub gap_mm: f64,
    pub angle_deg: f64,
}

/// Measured gap–angle data, possibly with repeated samples per gap.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AngleMeasurementSet {
    pub records: Vec<AngleSample>,
}

impl AngleMeasurementSet {
    pub fn new(records: Vec<AngleSample>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if !(r.gap_mm > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "record {i}: gap must be positive, got {}",
                    r.gap_mm
                )));
            }
            if !(r.angle_deg > 0.0 && r.angle_deg < 180.0) {
                return Err(Error::InvalidSpec(format!(
                    "record {i}: angle must be in (0°, 180°), got {}",
                    r.angle_deg
                )));
            }
        }
        Ok(Self { records })
    }

    /// Reads `gap_mm,angle_deg` CSV. Line numbers in errors count the header.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        expect_headers(&mut rdr, &["gap_mm", "angle_deg"])?;
        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Csv {
                line,
                message: e.to_string(),
            })?;
            let gap_mm = parse_field(&row, 0, "gap_mm", line)?;
            let angle_deg = parse_field(&row, 1, "angle_deg", line)?;
            records.push(AngleSample { gap_mm, angle_deg });
        }
        Self::new(records)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

pub(crate) fn expect_headers<R: Read>(rdr: &mut csv::Reader<R>, want: &[&str]) -> Result<()> {
    let headers = rdr.headers().map_err(|e| Error::Csv {
        line: 1,
        message: e.to_string(),
    })?;
    let got: Vec<&str> = headers.iter().collect();
    if got.len() < want.len() || got[..want.len()] != *want {
        return Err(Error::Csv {
            line: 1,
            message: format!("expected header {:?}, got {:?}", want.join(","), got.join(",")),
        });
    }
    Ok(())
}

pub(crate) fn parse_field(row: &csv::StringRecord, idx: usize, name: &str, line: usize) -> Result<f64> {
    let raw = row.get(idx).ok_or_else(|| Error::Csv {
        line,
        message: format!("missing column {name}"),
    })?;
    raw.parse::<f64>().map_err(|_| Error::Csv {
        line,
        message: format!("column {name}: cannot parse {raw:?} as a number"),
    })
}

/// Per-sample comparison of measured and predicted fold angles.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AngleResidual {
    pub gap_mm: f64,
    pub measured_deg: f64,
    pub predicted_deg: f64,
    /// measured − predicted
    pub residual_deg: f64,
}

/// Fit quality of the fold-angle model against a measurement set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationMetrics {
    pub r_squared: f64,
    /// Standard deviation of |measured − predicted|, in degrees.
    pub abs_error_std_deg: f64,
    pub residuals: Vec<AngleResidual>,
}

/// Compares model predictions (per-sample) against measured angles.
///
/// Requires at least two distinct gaps; R² is 1 − SS_res/SS_tot about the
/// mean measured angle, and `abs_error_std_deg` is the sample standard
/// deviation of the absolute errors.
pub fn validation_metrics(data: &AngleMeasurementSet, spec: &LaminateSpec) -> Result<ValidationMetrics> {
    let mut gaps: Vec<f64> = data.records.iter().map(|r| r.gap_mm).collect();
    gaps.sort_by(f64::total_cmp);
    gaps.dedup();
    if gaps.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: gaps.len(),
        });
    }

    let mut residuals = Vec::with_capacity(data.records.len());
    for r in &data.records {
        let predicted_deg = fold_angle(&spec.with_gap(r.gap_mm)?)?.to_degrees();
        residuals.push(AngleResidual {
            gap_mm: r.gap_mm,
            measured_deg: r.angle_deg,
            predicted_deg,
            residual_deg: r.angle_deg - predicted_deg,
        });
    }

    let measured: Vec<f64> = residuals.iter().map(|r| r.measured_deg).collect();
    let predicted: Vec<f64> = residuals.iter().map(|r| r.predicted_deg).collect();
    let abs_errors: Vec<f64> = residuals.iter().map(|r| r.residual_deg.abs()).collect();

    Ok(ValidationMetrics {
        r_squared: stats::r_squared(&measured, &predicted),
        abs_error_std_deg: stats::sample_std(&abs_errors),
        residuals,
    })
}
