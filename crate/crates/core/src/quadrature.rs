//! Adaptive Gauss–Kronrod quadrature (7/15 point rule with bisection).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae on [-1, 1]; odd indices are the embedded
// 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// One G7/K15 panel: returns (Kronrod value, |K15 − G7| error estimate).
fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];

    for j in 0..7 {
        let x = half * XGK[j];
        let f_lo = f(center - x);
        let f_hi = f(center + x);
        let sum = f_lo + f_hi;
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }

    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, bisecting the interval with the largest
/// error estimate until `abs_tol` or `rel_tol` is met.
///
/// Fails with [`Error::NonConvergence`] if the tolerance is still unmet
/// after `max_subdivisions` bisections.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }

    let (value, error) = kronrod_panel(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Interval { a, b, value, error });

    let mut subdivisions = 0;
    loop {
        let total: f64 = heap.iter().map(|i| i.value).sum();
        let total_err: f64 = heap.iter().map(|i| i.error).sum();
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Quadrature {
                value: total,
                error_estimate: total_err,
                subdivisions,
            });
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::NonConvergence(format!(
                "quadrature error estimate {total_err:.3e} above tolerance after {subdivisions} subdivisions"
            )));
        }

        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = kronrod_panel(&f, worst.a, mid);
        let (v2, e2) = kronrod_panel(&f, mid, worst.b);
        heap.push(Interval {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Interval {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        // degree-7 polynomial is integrated exactly by G7 already
        let q = integrate(|x| 7.0 * x.powi(6) - 3.0 * x.powi(2) + 1.0, 0.0, 2.0, 1e-12, 1e-12, 100).unwrap();
        assert_relative_eq!(q.value, 128.0 - 8.0 + 2.0, max_relative = 1e-14);
    }

    #[test]
    fn smooth_transcendental() {
        let q = integrate(f64::sin, 0.0, std::f64::consts::PI, 1e-12, 1e-12, 100).unwrap();
        assert_relative_eq!(q.value, 2.0, max_relative = 1e-13);
    }

    #[test]
    fn zero_width_interval() {
        let q = integrate(|x| x * x, 1.5, 1.5, 1e-12, 1e-12, 10).unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn needle_requires_subdivision() {
        // sharp but integrable peak; forces the adaptive path
        let q = integrate(|x| 1.0 / ((x - 0.3).powi(2) + 1e-4), 0.0, 1.0, 1e-10, 1e-10, 500).unwrap();
        let exact = ((0.7 / 1e-2).atan() + (0.3 / 1e-2).atan()) / 1e-2;
        assert_relative_eq!(q.value, exact, max_relative = 1e-9);
        assert!(q.subdivisions > 0);
    }

    #[test]
    fn non_convergence_is_reported() {
        // |x|^(-1/2) near 0 with a tiny subdivision budget
        let err = integrate(|x: f64| x.abs().sqrt().recip().min(1e12), 0.0, 1.0, 1e-14, 1e-14, 3);
        assert!(err.is_err());
    }
}
