//! Elastic recovery after flat stacking: recovery-rate traces and a
//! two-phase (instantaneous elastic + slow viscoelastic) curve fit.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{expect_headers, parse_field};

/// Upper bound on the fitted viscoelastic time constant, minutes.
const TAU_MAX_MIN: f64 = 1e4;
const TAU_MIN_MIN: f64 = 1e-3;

/// One angle reading after release from compression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoverySample {
    pub t_min: f64,
    pub angle_deg: f64,
}

/// Time series of fold-angle measurements after releasing a hinge that was
/// held flat, together with the hold duration and the designed fold angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryTrace {
    pub hold_duration_min: f64,
    pub design_angle_deg: f64,
    pub samples: Vec<RecoverySample>,
}

impl RecoveryTrace {
    pub fn new(hold_duration_min: f64, design_angle_deg: f64, samples: Vec<RecoverySample>) -> Result<Self> {
        if !(design_angle_deg > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "design angle must be positive, got {design_angle_deg}"
            )));
        }
        if hold_duration_min < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "hold duration must be non-negative, got {hold_duration_min}"
            )));
        }
        let mut last = f64::NEG_INFINITY;
        for (i, s) in samples.iter().enumerate() {
            if !(s.t_min >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "sample {i}: time must be non-negative, got {}",
                    s.t_min
                )));
            }
            if s.t_min <= last {
                return Err(Error::InvalidSpec(format!(
                    "sample {i}: times must be strictly increasing"
                )));
            }
            if !(s.angle_deg > 0.0 && s.angle_deg < 180.0) {
                return Err(Error::InvalidSpec(format!(
                    "sample {i}: angle must be in (0°, 180°), got {}",
                    s.angle_deg
                )));
            }
            last = s.t_min;
        }
        Ok(Self {
            hold_duration_min,
            design_angle_deg,
            samples,
        })
    }

    /// Reads a `t_min,angle_deg` CSV; hold duration and design angle come
    /// from the sidecar metadata (see [`RecoveryMeta`]).
    pub fn from_csv<R: Read>(reader: R, meta: &RecoveryMeta) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        expect_headers(&mut rdr, &["t_min", "angle_deg"])?;
        let mut samples = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Csv {
                line,
                message: e.to_string(),
            })?;
            samples.push(RecoverySample {
                t_min: parse_field(&row, 0, "t_min", line)?,
                angle_deg: parse_field(&row, 1, "angle_deg", line)?,
            });
        }
        if samples.is_empty() {
            return Err(Error::Csv {
                line: 2,
                message: "trace contains no samples".into(),
            });
        }
        Self::new(meta.hold_duration_min, meta.design_angle_deg, samples)
    }

    fn rates(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .map(|s| (s.t_min, recovery_rate(s.angle_deg, self.design_angle_deg).expect("validated")))
            .collect()
    }
}

/// Sidecar metadata for a recovery trace CSV.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RecoveryMeta {
    pub hold_duration_min: f64,
    pub design_angle_deg: f64,
}

/// Recovered fraction of the designed fold angle.
pub fn recovery_rate(angle_deg: f64, design_angle_deg: f64) -> Result<f64> {
    if design_angle_deg == 0.0 {
        return Err(Error::OutOfRange {
            what: "design angle",
            message: "must be non-zero".into(),
        });
    }
    Ok(angle_deg / design_angle_deg)
}

/// Recovery rate at time `t_min`, piecewise-linearly interpolated between
/// trace samples. `t_min` must lie within the sampled time range.
pub fn rate_at(trace: &RecoveryTrace, t_min: f64) -> Result<f64> {
    let rates = trace.rates();
    let (Some(first), Some(last)) = (rates.first(), rates.last()) else {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    };
    if t_min < first.0 || t_min > last.0 {
        return Err(Error::OutOfRange {
            what: "time",
            message: format!("{t_min} min outside sampled range [{}, {}]", first.0, last.0),
        });
    }
    let idx = rates.partition_point(|&(t, _)| t <= t_min);
    if idx == 0 {
        return Ok(first.1);
    }
    if idx == rates.len() {
        return Ok(last.1);
    }
    let (t0, r0) = rates[idx - 1];
    let (t1, r1) = rates[idx];
    Ok(r0 + (r1 - r0) * (t_min - t0) / (t1 - t0))
}

/// Fitted two-phase recovery curve r(t) = r_inst + r_slow·(1 − e^{−t/τ}).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TwoPhaseFit {
    /// Instantaneous elastic recovery fraction.
    pub r_inst: f64,
    /// Slow viscoelastic recovery fraction (asymptotic additional recovery).
    pub r_slow: f64,
    /// Viscoelastic time constant, minutes.
    pub tau_min: f64,
    pub rmse: f64,
    /// Set when r_inst + r_slow > 1.05: asymptotic recovery above the design
    /// angle is physically suspect. A warning, not an error.
    pub over_recovery: bool,
}

impl TwoPhaseFit {
    pub fn rate_at(&self, t_min: f64) -> f64 {
        self.r_inst + self.r_slow * (1.0 - (-t_min / self.tau_min).exp())
    }
}

/// Sum of squared residuals and the clamped linear parameters for a fixed τ.
/// The model is linear in (r_inst, r_slow) given τ, so those solve in closed
/// form from the 2×2 normal equations.
fn linear_subfit(rates: &[(f64, f64)], tau: f64) -> (f64, f64, f64) {
    let n = rates.len() as f64;
    let (mut sw, mut sww, mut sr, mut swr) = (0.0, 0.0, 0.0, 0.0);
    for &(t, r) in rates {
        let w = 1.0 - (-t / tau).exp();
        sw += w;
        sww += w * w;
        sr += r;
        swr += w * r;
    }
    let det = n * sww - sw * sw;
    let (mut r_inst, mut r_slow) = if det.abs() < 1e-14 {
        // basis degenerate (all w nearly equal): flat model
        (sr / n, 0.0)
    } else {
        (
            (sww * sr - sw * swr) / det,
            (n * swr - sw * sr) / det,
        )
    };
    r_inst = r_inst.clamp(0.0, 1.0);
    r_slow = r_slow.clamp(0.0, 1.0);
    let sse: f64 = rates
        .iter()
        .map(|&(t, r)| {
            let pred = r_inst + r_slow * (1.0 - (-t / tau).exp());
            (r - pred) * (r - pred)
        })
        .sum();
    (sse, r_inst, r_slow)
}

/// Fits the two-phase recovery model by variable projection: a deterministic
/// search over τ (log-spaced grid, then golden-section refinement) with the
/// closed-form linear solve at each candidate. Needs at least 4 samples.
pub fn fit_two_phase(trace: &RecoveryTrace) -> Result<TwoPhaseFit> {
    if trace.samples.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: trace.samples.len(),
        });
    }
    let rates = trace.rates();

    const GRID: usize = 160;
    let ln_lo = TAU_MIN_MIN.ln();
    let ln_hi = TAU_MAX_MIN.ln();
    let tau_at = |i: usize| (ln_lo + (ln_hi - ln_lo) * i as f64 / (GRID - 1) as f64).exp();

    let mut best = (f64::INFINITY, 0usize);
    for i in 0..GRID {
        let (sse, _, _) = linear_subfit(&rates, tau_at(i));
        if sse < best.0 {
            best = (sse, i);
        }
    }

    // golden-section refinement in ln τ around the best grid point
    let mut lo = if best.1 == 0 { ln_lo } else { tau_at(best.1 - 1).ln() };
    let mut hi = if best.1 == GRID - 1 { ln_hi } else { tau_at(best.1 + 1).ln() };
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut m1 = hi - INV_PHI * (hi - lo);
    let mut m2 = lo + INV_PHI * (hi - lo);
    let mut f1 = linear_subfit(&rates, m1.exp()).0;
    let mut f2 = linear_subfit(&rates, m2.exp()).0;
    for _ in 0..120 {
        if f1 <= f2 {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - INV_PHI * (hi - lo);
            f1 = linear_subfit(&rates, m1.exp()).0;
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + INV_PHI * (hi - lo);
            f2 = linear_subfit(&rates, m2.exp()).0;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let tau = (0.5 * (lo + hi)).exp();
    let (sse, r_inst, r_slow) = linear_subfit(&rates, tau);
    if !sse.is_finite() {
        return Err(Error::NonConvergence(
            "two-phase recovery fit produced a non-finite residual".into(),
        ));
    }

    Ok(TwoPhaseFit {
        r_inst,
        r_slow,
        tau_min: tau,
        rmse: (sse / rates.len() as f64).sqrt(),
        over_recovery: r_inst + r_slow > 1.05,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn trace_from_rates(design: f64, pts: &[(f64, f64)]) -> RecoveryTrace {
        let samples = pts
            .iter()
            .map(|&(t, r)| RecoverySample {
                t_min: t,
                angle_deg: r * design,
            })
            .collect();
        RecoveryTrace::new(60.0, design, samples).unwrap()
    }

    #[test]
    fn rate_basics() {
        assert_eq!(recovery_rate(51.0, 51.0).unwrap(), 1.0);
        assert_eq!(recovery_rate(0.0, 51.0).unwrap(), 0.0);
        assert_relative_eq!(recovery_rate(0.85 * 51.0, 51.0).unwrap(), 0.85, max_relative = 1e-15);
        assert!(recovery_rate(10.0, 0.0).is_err());
    }

    #[test]
    fn rate_is_scale_invariant() {
        for k in [0.5, 2.0, 7.3] {
            assert_relative_eq!(
                recovery_rate(43.0 * k, 51.0 * k).unwrap(),
                recovery_rate(43.0, 51.0).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn interpolation_hits_nodes_and_midpoints() {
        let trace = trace_from_rates(51.0, &[(0.0, 0.60), (30.0, 0.85)]);
        assert_relative_eq!(rate_at(&trace, 0.0).unwrap(), 0.60, max_relative = 1e-14);
        assert_relative_eq!(rate_at(&trace, 30.0).unwrap(), 0.85, max_relative = 1e-14);
        assert_relative_eq!(rate_at(&trace, 15.0).unwrap(), 0.725, max_relative = 1e-14);
        assert!(rate_at(&trace, -1.0).is_err());
        assert!(rate_at(&trace, 31.0).is_err());
    }

    #[test]
    fn two_phase_round_trip_noiseless() {
        let (r_i, r_s, tau) = (0.6, 0.25, 10.0);
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let t = 3.0 * i as f64;
                (t, r_i + r_s * (1.0 - (-t / tau).exp()))
            })
            .collect();
        let fit = fit_two_phase(&trace_from_rates(51.0, &pts)).unwrap();
        assert!((fit.r_inst - r_i).abs() / r_i < 0.01, "r_inst = {}", fit.r_inst);
        assert!((fit.r_slow - r_s).abs() / r_s < 0.01, "r_slow = {}", fit.r_slow);
        assert!((fit.tau_min - tau).abs() / tau < 0.01, "tau = {}", fit.tau_min);
        assert!(fit.rmse < 1e-10);
        assert!(!fit.over_recovery);
    }

    #[test]
    fn two_phase_constant_trace() {
        let pts: Vec<(f64, f64)> = (0..8).map(|i| (5.0 * i as f64, 0.85)).collect();
        let fit = fit_two_phase(&trace_from_rates(51.0, &pts)).unwrap();
        assert!(fit.r_slow.abs() < 1e-9, "r_slow = {}", fit.r_slow);
        assert_relative_eq!(fit.r_inst, 0.85, epsilon = 1e-9);
        assert!(fit.rmse < 1e-12);
    }

    #[test]
    fn two_phase_with_noise_recovers_tau() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let (r_i, r_s, tau) = (0.6, 0.25, 10.0);
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = 1.5 * i as f64;
                let r = r_i + r_s * (1.0 - (-t / tau).exp());
                (t, r * (1.0 + noise.sample(&mut rng)))
            })
            .collect();
        let fit = fit_two_phase(&trace_from_rates(51.0, &pts)).unwrap();
        assert!((fit.tau_min - tau).abs() / tau < 0.10, "tau = {}", fit.tau_min);
    }

    #[test]
    fn two_phase_needs_four_samples() {
        let pts = [(0.0, 0.6), (5.0, 0.7), (10.0, 0.75)];
        assert!(matches!(
            fit_two_phase(&trace_from_rates(51.0, &pts)).unwrap_err(),
            Error::InsufficientData { needed: 4, got: 3 }
        ));
    }

    #[test]
    fn over_recovery_is_flagged() {
        // rates climbing well above the design angle
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let t = 4.0 * i as f64;
                (t, 0.9 + 0.5 * (1.0 - (-t / 8.0_f64).exp()))
            })
            .collect();
        let fit = fit_two_phase(&trace_from_rates(51.0, &pts)).unwrap();
        assert!(fit.over_recovery);
    }

    #[test]
    fn trace_validation_and_csv() {
        let meta = RecoveryMeta {
            hold_duration_min: 120.0,
            design_angle_deg: 51.0,
        };
        let csv = "t_min,angle_deg\n0,30.6\n10,40.0\n30,43.35\n";
        let trace = RecoveryTrace::from_csv(csv.as_bytes(), &meta).unwrap();
        assert_eq!(trace.samples.len(), 3);
        assert_relative_eq!(rate_at(&trace, 30.0).unwrap(), 0.85, max_relative = 1e-12);

        let empty = "t_min,angle_deg\n";
        assert!(matches!(
            RecoveryTrace::from_csv(empty.as_bytes(), &meta).unwrap_err(),
            Error::Csv { .. }
        ));

        let unordered = "t_min,angle_deg\n10,40.0\n5,30.0\n";
        assert!(RecoveryTrace::from_csv(unordered.as_bytes(), &meta).is_err());
    }

    proptest! {
        #[test]
        fn monotone_traces_interpolate_monotonically(
            steps in proptest::collection::vec(0.001f64..0.1, 3..12),
            increments in proptest::collection::vec(0.0f64..0.08, 3..12),
            query in 0.0f64..1.0,
        ) {
            let n = steps.len().min(increments.len());
            let mut t = 0.0;
            let mut r = 0.3;
            let mut pts = Vec::new();
            for i in 0..n {
                t += 1.0 + steps[i] * 100.0;
                r += increments[i];
                pts.push((t, r.min(0.99)));
            }
            prop_assume!(pts.len() >= 2);
            let trace = trace_from_rates(51.0, &pts);
            let t_lo = pts[0].0;
            let t_hi = pts[pts.len() - 1].0;
            let ta = t_lo + query * (t_hi - t_lo) * 0.5;
            let tb = t_lo + (0.5 + query * 0.5) * (t_hi - t_lo);
            let ra = rate_at(&trace, ta).unwrap();
            let rb = rate_at(&trace, tb).unwrap();
            prop_assert!(rb >= ra - 1e-12);
        }
    }
}
