//! Basmajian and Bridgeman sums over ortho spectra, with empirical tails.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::point_distance;
use crate::ortho::OrthoSpectrum;
use crate::surfaces::FuchsianSurface;

/// Constant of the Bridgeman term `c L(sech^2(l/2))`. The ratio of
/// [`bridgeman_quadrature`] to `L(sech^2(l/2))` is `4 / pi` at every
/// length tried; summing against the area of a pants only approaches it
/// slowly (see `calibrate_bridgeman`).
pub const BRIDGEMAN_C: f64 = 4.0 / PI;

fn require_length(l: f64) -> Result<()> {
    if l > 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("length must be positive, got {l}")))
    }
}

/// `2 asinh(1 / sinh l) = 2 ln coth(l/2)`: the length of the shadow a
/// boundary lift at distance `l` casts on another.
pub fn basmajian_term(l: f64) -> Result<f64> {
    require_length(l)?;
    Ok(2.0 * (1.0 / l.sinh()).asinh())
}

/// Rogers dilogarithm `L(x) = Li2(x) + ln(x) ln(1 - x) / 2` on `[0, 1]`.
pub fn rogers_dilog(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "Rogers dilogarithm needs x in [0, 1], got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(PI * PI / 6.0);
    }
    if x > 0.5 {
        return Ok(PI * PI / 6.0 - rogers_small(1.0 - x));
    }
    Ok(rogers_small(x))
}

// series for Li2, fine for x <= 1/2
fn rogers_small(x: f64) -> f64 {
    let mut li2 = 0.0f64;
    let mut p = x;
    let mut k = 1.0f64;
    while p > 1e-18 * li2.max(1e-300) || k < 2.0 {
        li2 += p / (k * k);
        k += 1.0;
        p *= x;
        if k > 200.0 {
            break;
        }
    }
    li2 + 0.5 * x.ln() * (-x).ln_1p()
}

/// Area contributed by an ortho geodesic of length `l`:
/// `BRIDGEMAN_C L(sech^2(l/2))`.
pub fn bridgeman_term(l: f64) -> Result<f64> {
    bridgeman_term_with(l, BRIDGEMAN_C)
}

pub fn bridgeman_term_with(l: f64, c: f64) -> Result<f64> {
    require_length(l)?;
    let s = 1.0 / (l / 2.0).cosh();
    Ok(c * rogers_dilog(s * s)?)
}

/// Direct evaluation of the Bridgeman area function: the unit tangent
/// vectors whose geodesic runs from the axis `A` to a geodesic `B` at
/// distance `l`, divided by `2 pi`. With `A = (0, inf)` and `B = (p, q)`
/// those geodesics have one endpoint `x < 0` and the other in `(p, q)`;
/// the Liouville measure is `dx dy / (x - y)^2` and each unoriented
/// geodesic carries two orientations, so the value is
/// `(2 / pi) \int\int len(x, y) dx dy / (x - y)^2`.
pub fn bridgeman_quadrature(l: f64, tol: f64) -> Result<f64> {
    require_length(l)?;
    let p = 1.0;
    let q = (l / 2.0).tanh().powi(-2);
    let (c2, r2) = ((p + q) / 2.0, (q - p) / 2.0);
    // x = -tan(pi s / 2), s in (0, 1)
    let inner = |x: f64| {
        let f = |y: f64| {
            let (c1, r1) = ((x + y) / 2.0, (y - x) / 2.0);
            let ha = (-x * y).sqrt();
            let bx = (r1 * r1 - r2 * r2 + c2 * c2 - c1 * c1) / (2.0 * (c2 - c1));
            let by = (r1 * r1 - (bx - c1) * (bx - c1)).max(0.0).sqrt();
            if by == 0.0 {
                return 0.0;
            }
            let len = point_distance(
                num_complex::Complex64::new(0.0, ha),
                num_complex::Complex64::new(bx, by),
            );
            len / ((x - y) * (x - y))
        };
        quadrature::integrate(f, p, q, tol * 1e-2).integral
    };
    let outer = |s: f64| {
        let t = PI * s / 2.0;
        let x = -t.tan();
        let dx = PI / 2.0 / (t.cos() * t.cos());
        if !x.is_finite() || !dx.is_finite() {
            return 0.0;
        }
        inner(x) * dx
    };
    let total = quadrature::integrate(outer, 0.0, 1.0, tol).integral;
    Ok(2.0 / PI * total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Exponential majorant `N(x) <= a e^(delta x)` of a counting function,
/// fitted on the upper half of the cutoff range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub log_amplitude: f64,
    pub exponent: f64,
    pub window: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub target: f64,
    pub partial_sum: f64,
    /// Empirical: integral of the term against the fitted count growth.
    #[serde(with = "crate::io::float_or_string")]
    pub tail_bound: f64,
    pub cutoff: f64,
    pub per_boundary: Vec<f64>,
    pub per_boundary_target: Vec<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// False when the spectrum came from an uncertified search.
    pub certifying: bool,
    pub growth: Option<GrowthFit>,
}

impl IdentityReport {
    pub fn discrepancy(&self) -> f64 {
        (self.target - self.partial_sum).abs()
    }
}

/// Pairwise summation, independent of thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Fit `ln N(x) ~ ln a + delta x` over `x` in `[cutoff / 2, cutoff]` by
/// least squares, then raise `ln a` so the fit dominates every sample.
pub fn fit_growth(sorted_lengths: &[f64], cutoff: f64) -> Option<GrowthFit> {
    let lo = (cutoff / 2.0).max(sorted_lengths.first().copied()?);
    if !(cutoff > lo) {
        return None;
    }
    let samples: Vec<(f64, f64)> = (0..=40)
        .map(|k| lo + (cutoff - lo) * k as f64 / 40.0)
        .filter_map(|x| {
            let n = sorted_lengths.partition_point(|&l| l <= x);
            (n > 0).then(|| (x, (n as f64).ln()))
        })
        .collect();
    let distinct = samples.windows(2).filter(|w| w[1].1 != w[0].1).count();
    if distinct < 2 {
        return None;
    }
    let m = samples.len() as f64;
    let (sx, sy) = samples
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = samples.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    let delta = (sxy / sxx).max(0.0);
    let intercept = samples
        .iter()
        .map(|&(x, y)| y - delta * x)
        .fold(f64::NEG_INFINITY, f64::max);
    Some(GrowthFit {
        log_amplitude: intercept,
        exponent: delta,
        window: (lo, cutoff),
    })
}

/// `\int_L^inf f(x) dN(x)` for the fitted `N`; infinite when the growth
/// outpaces the `e^-x` decay of the terms.
fn tail_integral<F: Fn(f64) -> f64>(fit: &GrowthFit, cutoff: f64, f: F) -> f64 {
    if fit.exponent >= 0.999 {
        return f64::INFINITY;
    }
    let density = |x: f64| f(x) * fit.exponent * (fit.log_amplitude + fit.exponent * x).exp();
    let span = 40.0 / (1.0 - fit.exponent);
    quadrature::integrate(density, cutoff, cutoff + span, 1e-12)
        .integral
        .max(0.0)
}

/// Empirical majorant for the Basmajian sum beyond `cutoff`, from the
/// growth of the sorted `lengths`.
pub fn basmajian_tail(sorted_lengths: &[f64], cutoff: f64) -> f64 {
    match fit_growth(sorted_lengths, cutoff) {
        Some(g) => tail_integral(&g, cutoff, |x| 4.0 * (1.0 / x.sinh()).asinh()),
        None => f64::INFINITY,
    }
}

fn verdict(target: f64, partial: f64, tail: f64, tol: f64) -> Verdict {
    if (target - partial).abs() <= tail + tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn check_inputs(spectrum: &OrthoSpectrum, surface: &FuchsianSurface) -> Result<()> {
    if spectrum.fingerprint != surface.fingerprint() {
        return Err(Error::Domain(
            "spectrum was computed for a different surface".into(),
        ));
    }
    if spectrum.boundary_count != surface.boundary.len() {
        return Err(Error::Domain(
            "boundary count of spectrum and surface differ".into(),
        ));
    }
    Ok(())
}

/// Basmajian: the boundary is tiled by the shadows of the other lifts. A
/// foot at the end of an ortho geodesic of length `l` accounts for
/// `2 ln coth(l/2)` of its boundary component, so each spectrum entry
/// (an unoriented arc) adds `2 basmajian_term(l)` to the perimeter.
pub fn basmajian_check(
    spectrum: &OrthoSpectrum,
    surface: &FuchsianSurface,
    tol: f64,
) -> Result<IdentityReport> {
    check_inputs(spectrum, surface)?;
    let nb = surface.boundary.len();
    let mut per: Vec<Vec<f64>> = vec![Vec::new(); nb];
    let mut all = Vec::with_capacity(spectrum.entries.len());
    for e in &spectrum.entries {
        let t = basmajian_term(e.length)?;
        per[e.boundary_pair.0].push(t);
        per[e.boundary_pair.1].push(t);
        all.push(2.0 * t);
    }
    let per_boundary: Vec<f64> = per.iter().map(|v| pairwise_sum(v)).collect();
    let partial = pairwise_sum(&all);
    let mut lengths = spectrum.lengths();
    lengths.sort_by(f64::total_cmp);
    let growth = fit_growth(&lengths, spectrum.cutoff);
    let tail = basmajian_tail(&lengths, spectrum.cutoff);
    let target = surface.perimeter();
    Ok(IdentityReport {
        identity: "basmajian".into(),
        target,
        partial_sum: partial,
        tail_bound: tail,
        cutoff: spectrum.cutoff,
        per_boundary,
        per_boundary_target: surface.boundary_lengths(),
        tolerance: tol,
        verdict: verdict(target, partial, tail, tol),
        certifying: spectrum.is_certified(),
        growth,
    })
}

/// Bridgeman: the area is the sum of `F(l)` over the spectrum.
pub fn bridgeman_check(
    spectrum: &OrthoSpectrum,
    surface: &FuchsianSurface,
    tol: f64,
) -> Result<IdentityReport> {
    bridgeman_check_with(spectrum, surface, tol, BRIDGEMAN_C)
}

pub fn bridgeman_check_with(
    spectrum: &OrthoSpectrum,
    surface: &FuchsianSurface,
    tol: f64,
    c: f64,
) -> Result<IdentityReport> {
    check_inputs(spectrum, surface)?;
    let terms: Vec<f64> = spectrum
        .entries
        .iter()
        .map(|e| bridgeman_term_with(e.length, c))
        .collect::<Result<_>>()?;
    let partial = pairwise_sum(&terms);
    let mut lengths = spectrum.lengths();
    lengths.sort_by(f64::total_cmp);
    let growth = fit_growth(&lengths, spectrum.cutoff);
    let tail = match &growth {
        Some(g) => tail_integral(g, spectrum.cutoff, |x| {
            bridgeman_term_with(x, c).unwrap_or(0.0)
        }),
        None => f64::INFINITY,
    };
    let target = surface.area();
    Ok(IdentityReport {
        identity: "bridgeman".into(),
        target,
        partial_sum: partial,
        tail_bound: tail,
        cutoff: spectrum.cutoff,
        per_boundary: Vec::new(),
        per_boundary_target: Vec::new(),
        tolerance: tol,
        verdict: verdict(target, partial, tail, tol),
        certifying: spectrum.is_certified(),
        growth,
    })
}

/// The constant making `c sum L(sech^2(l/2))` plus its fitted tail equal
/// the area.
pub fn calibrate_bridgeman(spectrum: &OrthoSpectrum, surface: &FuchsianSurface) -> Result<f64> {
    let unit = bridgeman_check_with(spectrum, surface, 0.0, 1.0)?;
    if !unit.tail_bound.is_finite() {
        return Err(Error::InsufficientData(
            "count growth too fast to bound the tail".into(),
        ));
    }
    Ok(surface.area() / (unit.partial_sum + unit.tail_bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn basmajian_term_values() {
        assert_relative_eq!(
            basmajian_term(1.0).unwrap(),
            1.543_873_665_8,
            epsilon = 1e-10
        );
        for k in 1..100 {
            let l = 0.1 * k as f64;
            let log_form = 2.0 * (1.0 / (l / 2.0).tanh()).ln();
            assert_relative_eq!(basmajian_term(l).unwrap(), log_form, epsilon = 1e-12);
        }
        assert!(basmajian_term(0.0).is_err());
        assert!(basmajian_term(-1.0).is_err());
    }

    #[test]
    fn basmajian_asymptote() {
        for l in [4.0f64, 6.0, 10.0, 20.0] {
            let r = basmajian_term(l).unwrap() / (4.0 * (-l).exp());
            assert!((r - 1.0).abs() < 0.05, "{l}: {r}");
        }
    }

    #[test]
    fn rogers_special_values() {
        assert_relative_eq!(rogers_dilog(0.5).unwrap(), PI * PI / 12.0, epsilon = 1e-14);
        assert_relative_eq!(rogers_dilog(1.0).unwrap(), PI * PI / 6.0, epsilon = 1e-15);
        assert_relative_eq!(
            rogers_dilog(1.0 - 1e-12).unwrap(),
            PI * PI / 6.0,
            epsilon = 1e-9
        );
        assert_eq!(rogers_dilog(0.0).unwrap(), 0.0);
        assert!(rogers_dilog(1.5).is_err());
        assert!(rogers_dilog(-0.1).is_err());
        // golden ratio value L(1/phi^2) = pi^2 / 15
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_relative_eq!(
            rogers_dilog(1.0 / (phi * phi)).unwrap(),
            PI * PI / 15.0,
            epsilon = 1e-13
        );
        assert_relative_eq!(
            rogers_dilog(1.0 / phi).unwrap(),
            PI * PI / 10.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn rogers_reflection() {
        for k in 1..200 {
            let x = k as f64 / 200.0;
            let s = rogers_dilog(x).unwrap() + rogers_dilog(1.0 - x).unwrap();
            assert_relative_eq!(s, PI * PI / 6.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bridgeman_limits() {
        assert_relative_eq!(
            bridgeman_term(1e-9).unwrap(),
            BRIDGEMAN_C * PI * PI / 6.0,
            epsilon = 1e-8
        );
        assert!(bridgeman_term(40.0).unwrap() < 1e-15);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for l in [0.5, 1.0, 2.0, 4.0] {
            let q = bridgeman_quadrature(l, 1e-9).unwrap();
            let f = bridgeman_term(l).unwrap();
            assert!((q / f - 1.0).abs() < 1e-6, "{l}: {q} vs {f}");
        }
    }

    // geodesics through a segment of length s on the imaginary axis have
    // Liouville measure s; this fixes the normalization used above
    #[test]
    fn crofton_normalization() {
        for s in [0.3f64, 1.0, 2.5] {
            let h2 = (2.0 * s).exp();
            let outer = |u: f64| {
                let t = PI * u / 2.0;
                let x = -t.tan();
                let dx = PI / 2.0 / (t.cos() * t.cos());
                if !x.is_finite() || !dx.is_finite() || x == 0.0 {
                    return 0.0;
                }
                let (y1, y2) = (1.0 / -x, h2 / -x);
                (1.0 / (y1 - x) - 1.0 / (y2 - x)) * dx
            };
            let m = quadrature::integrate(outer, 0.0, 1.0, 1e-12).integral;
            assert_relative_eq!(m, s, epsilon = 1e-9);
        }
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (1..1000).map(|k| 1.0 / k as f64).collect();
        assert_relative_eq!(pairwise_sum(&v), v.iter().sum::<f64>(), epsilon = 1e-12);
    }

    #[test]
    fn growth_fit_recovers_exponent() {
        // N(x) = floor(e^(0.6 x))
        let mut lengths = Vec::new();
        for n in 1..20000 {
            lengths.push((n as f64).ln() / 0.6);
        }
        let g = fit_growth(&lengths, 15.0).unwrap();
        assert!((g.exponent - 0.6).abs() < 0.01, "{g:?}");
    }
}
