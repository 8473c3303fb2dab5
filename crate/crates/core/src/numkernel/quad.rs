use alloc::vec::Vec;

use super::Tolerance;
use crate::error::{Error, Result};

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule
// (QUADPACK qk15).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// error is already at the round-off floor; splitting cannot help
    floor: bool,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = libm::fabs(res_k);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (libm::fabs(f1) + libm::fabs(f2));
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * libm::fabs(fc - mean);
    for j in 0..7 {
        res_asc += WGK[j] * (libm::fabs(fv1[j] - mean) + libm::fabs(fv2[j] - mean));
    }
    let value = res_k * half;
    let res_abs = res_abs * libm::fabs(half);
    let res_asc = res_asc * libm::fabs(half);
    let mut error = libm::fabs((res_k - res_g) * half);
    if res_asc != 0.0 && error != 0.0 {
        let scale = libm::pow(200.0 * error / res_asc, 1.5);
        error = res_asc * if scale < 1.0 { scale } else { 1.0 };
    }
    let round_off = 50.0 * f64::EPSILON * res_abs;
    let floor = error <= round_off;
    if floor {
        error = round_off;
    }
    Segment {
        a,
        b,
        value,
        error,
        floor,
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`, or until every
/// remaining error is at the round-off floor of its subinterval. `f` is never
/// evaluated at the endpoints, so integrable endpoint singularities are fine.
pub fn adaptive_quad<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || a > b {
        return Err(Error::Domain("adaptive_quad requires finite a <= b"));
    }
    if a == b {
        return Ok(0.0);
    }
    let first = kronrod15(&mut f, a, b);
    if !first.value.is_finite() {
        return Err(Error::Domain("integrand is not finite on the interval"));
    }
    let mut segments: Vec<Segment> = Vec::with_capacity(64);
    segments.push(first);
    let mut total = first.value;
    let mut total_err = first.error;

    loop {
        let target = tol.abs_tol().max(tol.rel_tol() * libm::fabs(total));
        if total_err <= target {
            return Ok(total);
        }
        // worst segment that can still be improved
        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                !s.floor && s.b - s.a > 4.0 * f64::EPSILON * libm::fabs(s.a).max(libm::fabs(s.b))
            })
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(worst) = worst else {
            // every remaining error is at the round-off floor
            return Ok(total);
        };
        if segments.len() >= tol.max_iter() {
            return Err(Error::Convergence {
                what: "adaptive quadrature",
                estimate: total,
                error: total_err,
            });
        }
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        let left = kronrod15(&mut f, seg.a, mid);
        let right = kronrod15(&mut f, mid, seg.b);
        if !left.value.is_finite() || !right.value.is_finite() {
            return Err(Error::Domain("integrand is not finite on the interval"));
        }
        total += left.value + right.value - seg.value;
        total_err += left.error + right.error - seg.error;
        segments.push(left);
        segments.push(right);
        // refresh the running sums to avoid drift from repeated updates
        if segments.len().is_multiple_of(64) {
            total = segments.iter().map(|s| s.value).sum();
            total_err = segments.iter().map(|s| s.error).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_4;

    #[test]
    fn examples() {
        let tol = Tolerance::DEFAULT;
        assert!((adaptive_quad(|_| 1.0, 0.0, 2.0, tol).unwrap() - 2.0).abs() < 1e-14);
        assert!((adaptive_quad(|t| t * t, 0.0, 1.0, tol).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        let v = adaptive_quad(|u| 1.0 / (1.0 + u * u), 0.0, 1.0, tol).unwrap();
        assert!((v - FRAC_PI_4).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let tol = Tolerance::new(1e-13, 1e-12, 500).unwrap();
        let v = adaptive_quad(|u| 1.0 / libm::sqrt(u), 0.0, 1.0, tol).unwrap();
        assert!((v - 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn reports_convergence_failure_with_estimate() {
        let tol = Tolerance::new(1e-15, 0.0, 3).unwrap();
        match adaptive_quad(|u| libm::sin(50.0 * u), 0.0, 10.0, tol) {
            Err(Error::Convergence { estimate, .. }) => assert!(estimate.is_finite()),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn empty_and_reversed_intervals() {
        let tol = Tolerance::DEFAULT;
        assert_eq!(adaptive_quad(|t| t, 1.0, 1.0, tol).unwrap(), 0.0);
        assert!(adaptive_quad(|t| t, 1.0, 0.0, tol).is_err());
    }
}
