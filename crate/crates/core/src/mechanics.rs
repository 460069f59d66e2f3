//! Elastic hinge mechanics: unfolding kinematics, the incompressible
//! Neo-Hookean bending-moment integral, force-displacement curves, and
//! modulus fitting against tensile-test data.
//!
//! Unit system: lengths in mm, moduli in MPa (= N/mm²), so moments come out
//! in N·mm and forces in N.
//!
//! Geometry of the model: the hinge polymer bends as a circular arc of
//! curvature φ = θ/g over the fixed gap g, with the inextensible face at
//! Y = 0 and the stretched face at Y = t_flat. Incompressibility maps the
//! flat-state thickness coordinate Y to the bent-state coordinate
//! y = (1 − √(1 − 2Yφ))/φ and gives the through-thickness stretch
//! λ = 1 − yφ = √(1 − 2Yφ). Unfolding from the fabricated angle θ₀ to
//! θ₁ < θ₀ loads each fiber at the effective stretch λ₁/λ₀.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{expect_headers, parse_field};
use crate::quadrature;
use crate::stats;

/// Quadrature tolerances for the bending-moment integral (N·mm).
const MOMENT_ABS_TOL: f64 = 1e-10;
const MOMENT_REL_TOL: f64 = 1e-8;
const MOMENT_MAX_SUBDIV: usize = 200;

/// Mechanical description of one hinge for force-displacement work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HingeMechSpec {
    /// Rigid substrate length per side, mm.
    pub arm_length_mm: f64,
    /// Hinge width, mm.
    pub width_mm: f64,
    /// Polymer thickness in the planar (flat) state, mm.
    pub t_flat_mm: f64,
    /// Board gap, mm.
    pub gap_mm: f64,
    /// Fabricated (as-folded) fold angle, radians.
    pub theta0_rad: f64,
    /// Neo-Hookean shear modulus, MPa.
    pub shear_modulus_mpa: f64,
}

impl HingeMechSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("arm_length_mm", self.arm_length_mm),
            ("width_mm", self.width_mm),
            ("t_flat_mm", self.t_flat_mm),
            ("gap_mm", self.gap_mm),
            ("shear_modulus_mpa", self.shear_modulus_mpa),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if !(self.theta0_rad > 0.0 && self.theta0_rad < std::f64::consts::PI) {
            return Err(Error::InvalidSpec(format!(
                "theta0_rad must lie in (0, π), got {}",
                self.theta0_rad
            )));
        }
        // square-root argument must stay positive across the full thickness
        // at the largest curvature ever evaluated (the fabricated angle)
        let max_arg = 2.0 * self.t_flat_mm * curvature(self.theta0_rad, self.gap_mm);
        if max_arg >= 1.0 {
            return Err(Error::InvalidSpec(format!(
                "curvature validity violated at theta0: 2*t_flat*theta0/gap = {max_arg:.4} >= 1"
            )));
        }
        Ok(())
    }

    /// Same hinge with a different shear modulus.
    pub fn with_shear_modulus(self, shear_modulus_mpa: f64) -> Self {
        Self {
            shear_modulus_mpa,
            ..self
        }
    }

    /// Internal angle of the tensile-test kinematics at rest, α₀ = π − θ₀.
    pub fn alpha0_rad(&self) -> f64 {
        std::f64::consts::PI - self.theta0_rad
    }

    /// Largest admissible tensile displacement, reached when the hinge is
    /// pulled fully open (α = π).
    pub fn max_displacement_mm(&self) -> f64 {
        2.0 * self.arm_length_mm * (1.0 - (self.alpha0_rad() / 2.0).sin())
    }
}

/// Tensile-test sample used throughout: gap 1 mm, fold angle 51°,
/// flat polymer thickness 0.35 mm. Arm length and width are not defaulted
/// because they depend on the specimen.
impl Default for HingeMechSpec {
    fn default() -> Self {
        Self {
            arm_length_mm: 10.0,
            width_mm: 10.0,
            t_flat_mm: 0.35,
            gap_mm: 1.0,
            theta0_rad: 51f64.to_radians(),
            shear_modulus_mpa: 7.0,
        }
    }
}

/// Internal angle α after unfolding by displacement `d`:
/// α = 2·arcsin(d/(2L) + sin(α₀/2)).
pub fn internal_angle(d_mm: f64, spec: &HingeMechSpec) -> Result<f64> {
    spec.validate()?;
    if !(d_mm >= 0.0) {
        return Err(Error::OutOfRange {
            what: "displacement",
            message: format!("{d_mm} mm is negative"),
        });
    }
    if d_mm == 0.0 {
        return Ok(spec.alpha0_rad());
    }
    let arg = d_mm / (2.0 * spec.arm_length_mm) + (spec.alpha0_rad() / 2.0).sin();
    if arg > 1.0 + 1e-12 {
        return Err(Error::OutOfRange {
            what: "displacement",
            message: format!(
                "{d_mm} mm exceeds the fully open configuration (max {:.6} mm)",
                spec.max_displacement_mm()
            ),
        });
    }
    Ok(2.0 * arg.min(1.0).asin())
}

/// Tensile displacement that opens the hinge to internal angle `alpha`:
/// d = 2L(sin(α/2) − sin(α₀/2)). Inverse of [`internal_angle`].
pub fn displacement_from_angle(alpha_rad: f64, spec: &HingeMechSpec) -> Result<f64> {
    spec.validate()?;
    let alpha0 = spec.alpha0_rad();
    if !(alpha0..=std::f64::consts::PI + 1e-12).contains(&alpha_rad) {
        return Err(Error::OutOfRange {
            what: "internal angle",
            message: format!("{alpha_rad} rad not in [α₀ = {alpha0}, π]"),
        });
    }
    Ok(2.0 * spec.arm_length_mm * ((alpha_rad / 2.0).sin() - (alpha0 / 2.0).sin()))
}

/// Arc curvature of the bent polymer, φ = θ/g (1/mm). Requires g > 0.
pub fn curvature(theta_rad: f64, gap_mm: f64) -> f64 {
    theta_rad / gap_mm
}

fn check_sqrt_domain(y_mm: f64, phi_per_mm: f64) -> Result<f64> {
    if !(y_mm >= 0.0) || !(phi_per_mm >= 0.0) {
        return Err(Error::OutOfRange {
            what: "thickness coordinate / curvature",
            message: format!("Y = {y_mm} mm, phi = {phi_per_mm} 1/mm must be non-negative"),
        });
    }
    let argument = 1.0 - 2.0 * y_mm * phi_per_mm;
    if argument <= 0.0 {
        return Err(Error::CurvatureValidity {
            y_mm,
            phi_per_mm,
            argument,
        });
    }
    Ok(argument)
}

/// Bent-state thickness coordinate y for flat-state coordinate Y at
/// curvature φ, from incompressibility: y = (1 − √(1 − 2Yφ))/φ.
///
/// Evaluated in the rationalized form 2Y/(1 + √(1 − 2Yφ)), which is exact
/// at φ = 0 (y = Y) and avoids cancellation at small curvature.
pub fn thickness_map(y_flat_mm: f64, phi_per_mm: f64) -> Result<f64> {
    let argument = check_sqrt_domain(y_flat_mm, phi_per_mm)?;
    Ok(2.0 * y_flat_mm / (1.0 + argument.sqrt()))
}

/// Through-thickness stretch ratio λ = √(1 − 2Yφ) ∈ (0, 1].
pub fn stretch(y_flat_mm: f64, phi_per_mm: f64) -> Result<f64> {
    Ok(check_sqrt_domain(y_flat_mm, phi_per_mm)?.sqrt())
}

/// Bending moment (N·mm) resisting the reduction of the fold angle from the
/// fabricated θ₀ (taken from `spec`) to `theta1`:
///
/// M = G·W·∫₀^{t_flat} (λ_eff − λ_eff⁻²) · ((1 − λ₁)/φ₁) · (1/λ₁) dY,
/// λ_eff = λ₁/λ₀.
///
/// Zero when θ₁ = θ₀ and positive for θ₁ < θ₀ (tension opposes unfolding).
/// Further folding (θ₁ > θ₀) is outside the model's domain.
pub fn bending_moment(spec: &HingeMechSpec, theta1_rad: f64) -> Result<f64> {
    spec.validate()?;
    if !(theta1_rad > 0.0 && theta1_rad <= spec.theta0_rad) {
        return Err(Error::OutOfRange {
            what: "theta1",
            message: format!(
                "{theta1_rad} rad not in (0, theta0 = {}]; only unfolding is modeled",
                spec.theta0_rad
            ),
        });
    }
    let phi0 = curvature(spec.theta0_rad, spec.gap_mm);
    let phi1 = curvature(theta1_rad, spec.gap_mm);

    let integrand = |y_flat: f64| {
        let lambda0 = (1.0 - 2.0 * y_flat * phi0).sqrt();
        let lambda1 = (1.0 - 2.0 * y_flat * phi1).sqrt();
        let lambda_eff = lambda1 / lambda0;
        // (1 − λ₁)/φ₁ rationalized to 2Y/(1 + λ₁): exact as φ₁ → 0
        let moment_arm = 2.0 * y_flat / (1.0 + lambda1);
        (lambda_eff - 1.0 / (lambda_eff * lambda_eff)) * moment_arm / lambda1
    };

    let q = quadrature::integrate(
        integrand,
        0.0,
        spec.t_flat_mm,
        MOMENT_ABS_TOL,
        MOMENT_REL_TOL,
        MOMENT_MAX_SUBDIV,
    )?;
    Ok(spec.shear_modulus_mpa * spec.width_mm * q.value)
}

/// Tensile force F(d) = M(d) / (L·cos(α(d)/2)), in newtons.
///
/// Fails with [`Error::SingularConfiguration`] at (or past) the fully open
/// configuration α = π, where the lever arm vanishes and F diverges.
pub fn tensile_force(d_mm: f64, spec: &HingeMechSpec) -> Result<f64> {
    if d_mm == 0.0 {
        spec.validate()?;
        return Ok(0.0);
    }
    let alpha = internal_angle(d_mm, spec)?;
    // mathematically θ₁ = π − α ≤ θ₀ for d ≥ 0; the min() drops float noise
    let theta1 = (std::f64::consts::PI - alpha).min(spec.theta0_rad);
    if theta1 <= 0.0 {
        return Err(Error::SingularConfiguration(format!(
            "displacement {d_mm} mm opens the hinge fully (α = 180°); the tensile force diverges there"
        )));
    }
    let moment = bending_moment(spec, theta1)?;
    Ok(moment / (spec.arm_length_mm * (alpha / 2.0).cos()))
}

/// Pointwise [`tensile_force`] over a displacement grid, as a plot-ready
/// series of (displacement mm, force N).
pub fn force_curve(d_grid_mm: &[f64], spec: &HingeMechSpec) -> Result<Vec<(f64, f64)>> {
    d_grid_mm
        .iter()
        .map(|&d| tensile_force(d, spec).map(|f| (d, f)))
        .collect()
}

/// Writes a force-displacement series as `displacement_mm,force_N` CSV.
pub fn write_force_curve_csv<W: Write>(mut w: W, curve: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "displacement_mm,force_N")?;
    for (d, f) in curve {
        writeln!(w, "{d},{f}")?;
    }
    Ok(())
}

/// One tensile-test record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensilePoint {
    pub displacement_mm: f64,
    pub force_n: f64,
    /// Deformation cycle this record belongs to (1-based; defaults to 1
    /// when the data carries no cycle column).
    pub cycle: u32,
}

/// Load-displacement data from a cyclic tensile test.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TensileDataset {
    pub points: Vec<TensilePoint>,
}

impl TensileDataset {
    pub fn new(points: Vec<TensilePoint>) -> Result<Self> {
        let mut last: Option<&TensilePoint> = None;
        for (i, p) in points.iter().enumerate() {
            if !(p.displacement_mm >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "point {i}: displacement must be non-negative, got {}",
                    p.displacement_mm
                )));
            }
            if let Some(prev) = last {
                if p.cycle == prev.cycle && p.displacement_mm <= prev.displacement_mm {
                    return Err(Error::InvalidSpec(format!(
                        "point {i}: displacement must be strictly increasing within cycle {}",
                        p.cycle
                    )));
                }
            }
            last = Some(p);
        }
        Ok(Self { points })
    }

    /// Reads `displacement_mm,force_N[,cycle]` CSV.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        expect_headers(&mut rdr, &["displacement_mm", "force_N"])?;
        let has_cycle = rdr
            .headers()
            .map(|h| h.get(2) == Some("cycle"))
            .unwrap_or(false);
        let mut points = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Csv {
                line,
                message: e.to_string(),
            })?;
            let displacement_mm = parse_field(&row, 0, "displacement_mm", line)?;
            let force_n = parse_field(&row, 1, "force_N", line)?;
            let cycle = if has_cycle {
                let raw = row.get(2).unwrap_or("1");
                raw.parse::<u32>().map_err(|_| Error::Csv {
                    line,
                    message: format!("column cycle: cannot parse {raw:?} as an integer"),
                })?
            } else {
                1
            };
            points.push(TensilePoint {
                displacement_mm,
                force_n,
                cycle,
            });
        }
        Self::new(points)
    }

    /// Points of the earliest cycle present (the paper fits the first trial).
    pub fn first_cycle(&self) -> Vec<TensilePoint> {
        let Some(first) = self.points.iter().map(|p| p.cycle).min() else {
            return Vec::new();
        };
        self.points.iter().filter(|p| p.cycle == first).copied().collect()
    }
}

/// Result of fitting the shear modulus to tensile data.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModulusFit {
    /// Young's modulus E = 3G (incompressible limit), MPa.
    #[serde(rename = "E_MPa")]
    pub e_mpa: f64,
    /// Fitted shear modulus, MPa.
    #[serde(rename = "G_MPa")]
    pub g_mpa: f64,
    pub r_squared: f64,
    /// √(Σ residual²), N.
    pub residual_norm: f64,
}

/// Least-squares fit of the shear modulus to a tensile dataset; the spec's
/// own modulus is ignored. The model force is linear in G, so the optimum is
/// closed-form: G* = Σ F_i·f_i / Σ f_i² with f_i the model force at G = 1 MPa.
///
/// Uses the first deformation cycle only. Reports E = 3G.
pub fn fit_modulus(data: &TensileDataset, spec: &HingeMechSpec) -> Result<ModulusFit> {
    let points = data.first_cycle();
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    let unit = spec.with_shear_modulus(1.0);
    let model_unit: Vec<f64> = points
        .iter()
        .map(|p| tensile_force(p.displacement_mm, &unit))
        .collect::<Result<_>>()?;

    let denom: f64 = model_unit.iter().map(|f| f * f).sum();
    if denom == 0.0 {
        return Err(Error::DegenerateFit(
            "model force is identically zero over the supplied displacements".into(),
        ));
    }
    let numer: f64 = points
        .iter()
        .zip(&model_unit)
        .map(|(p, f)| p.force_n * f)
        .sum();
    let g_mpa = numer / denom;

    let observed: Vec<f64> = points.iter().map(|p| p.force_n).collect();
    let predicted: Vec<f64> = model_unit.iter().map(|f| g_mpa * f).collect();
    let ss_res: f64 = observed
        .iter()
        .zip(&predicted)
        .map(|(o, p)| (o - p) * (o - p))
        .sum();

    Ok(ModulusFit {
        e_mpa: 3.0 * g_mpa,
        g_mpa,
        r_squared: stats::r_squared(&observed, &predicted),
        residual_norm: ss_res.sqrt(),
    })
}
