//! Quantities computed from spectra: granulosity, Poincaré sums, growth
//! exponents, comparison, one-holed torus reconstruction and a systole
//! lower bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::trig::{
    cuff_from_tau_pair, pants_boundary_distance, torus_gamma_from_simple_ortho,
    winding_ortho_length,
};
use crate::geometry::{Geodesic, IdealPoint, Isometry};
use crate::identities::{basmajian_tail, basmajian_term, pairwise_sum};
use crate::ortho::{boundary_frame, ortho_spectrum, OrthoSpectrum, LENGTH_TOL};
use crate::surfaces::{build_one_holed_torus, build_pants, FuchsianSurface};

/// Sorted distinct values of `s` below `l`, merging values within
/// [`LENGTH_TOL`].
fn distinct_below(s: &[f64], l: f64) -> Vec<f64> {
    let mut v: Vec<f64> = s.iter().copied().filter(|&x| x < l).collect();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        match out.last() {
            Some(&y) if x - y <= LENGTH_TOL * (1.0 + y) => {}
            _ => out.push(x),
        }
    }
    out
}

fn cosh_ratio(x: f64, y: f64) -> f64 {
    // cosh(y/2) / cosh(x/2) without overflow for long lengths
    let (a, b) = (x / 2.0, y / 2.0);
    (b - a).exp() * (1.0 + (-2.0 * b).exp()) / (1.0 + (-2.0 * a).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GranulosityMode {
    /// Infimum over all pairs `x < y < L`.
    AllPairs,
    /// Infimum over consecutive distinct values only.
    Consecutive,
}

/// `inf cosh(y/2) / cosh(x/2)` over distinct values `x < y < l` of `s`;
/// `+inf` when there are fewer than two.
pub fn granulosity(s: &[f64], l: f64) -> f64 {
    granulosity_with(s, l, GranulosityMode::AllPairs)
}

pub fn granulosity_with(s: &[f64], l: f64, mode: GranulosityMode) -> f64 {
    let v = distinct_below(s, l);
    let mut best = f64::INFINITY;
    match mode {
        GranulosityMode::AllPairs => {
            for (k, &x) in v.iter().enumerate() {
                for &y in &v[k + 1..] {
                    best = best.min(cosh_ratio(x, y));
                }
            }
        }
        GranulosityMode::Consecutive => {
            for w in v.windows(2) {
                best = best.min(cosh_ratio(w[0], w[1]));
            }
        }
    }
    best
}

/// Smallest ratio `cosh(y/2) / cosh(x/2)` exceeding `threshold` over
/// values `x < y <= l` of `s`; `+inf` if none does.
pub fn granulosity_above(s: &[f64], l: f64, threshold: f64) -> f64 {
    let v = distinct_below(s, l.next_up());
    let mut best = f64::INFINITY;
    for (k, &x) in v.iter().enumerate() {
        let rest = &v[k + 1..];
        let j = rest.partition_point(|&y| cosh_ratio(x, y) <= threshold);
        if let Some(&y) = rest.get(j) {
            best = best.min(cosh_ratio(x, y));
        }
    }
    best
}

/// `sum exp(-h l)` over the spectrum.
pub fn poincare_partial(spectrum: &OrthoSpectrum, h: f64) -> f64 {
    let mut terms: Vec<f64> = spectrum
        .entries
        .iter()
        .map(|e| (-h * e.length).exp())
        .collect();
    terms.sort_by(f64::total_cmp);
    pairwise_sum(&terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentMethod {
    CountingSlope,
    PartialSumDivergence,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub estimate: f64,
    pub window: (f64, f64),
    /// RMS deviation of the fitted line over the window.
    #[serde(with = "crate::io::float_or_string")]
    pub residual: f64,
    pub method: ExponentMethod,
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - icpt - slope * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    (slope, icpt, rms)
}

/// Half-width of the baseline over which local slopes are measured; the
/// counts are step functions, so pointwise slopes are meaningless.
const SLOPE_HALF_BASELINE: f64 = 2.0;

/// Largest run of samples whose local slopes stay within 10% of each other,
/// widened by the slope baseline. Returns the index range of samples.
fn stable_window(pts: &[(f64, f64)]) -> Option<(usize, usize)> {
    let local: Vec<Option<f64>> = pts
        .iter()
        .map(|&(x, _)| {
            let near: Vec<(f64, f64)> = pts
                .iter()
                .copied()
                .filter(|p| (p.0 - x).abs() <= SLOPE_HALF_BASELINE + 1e-12)
                .collect();
            (near.len() >= 3).then(|| least_squares(&near).0)
        })
        .collect();
    let mut best: Option<(usize, usize)> = None;
    for a in 0..pts.len() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for b in a..pts.len() {
            let Some(s) = local[b] else { break };
            lo = lo.min(s);
            hi = hi.max(s);
            if !(lo > 0.0) || hi > 1.1 * lo {
                break;
            }
            if best.is_none_or(|(s, e): (usize, usize)| pts[b].0 - pts[a].0 > pts[e].0 - pts[s].0) {
                best = Some((a, b));
            }
        }
    }
    let (a, b) = best?;
    let lo = pts.partition_point(|p| p.0 < pts[a].0 - SLOPE_HALF_BASELINE - 1e-12);
    let hi = pts.partition_point(|p| p.0 <= pts[b].0 + SLOPE_HALF_BASELINE + 1e-12) - 1;
    (hi >= lo + 2).then_some((lo, hi))
}

/// Samples start where the count reaches this, to keep small-number noise
/// out of the fit.
const MIN_COUNT: usize = 10;

fn counting_fit(sorted: &[f64], samples: &[f64]) -> Result<ExponentFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|&x| {
            let n = sorted.partition_point(|&l| l <= x);
            (n >= MIN_COUNT).then(|| (x, (n as f64).ln()))
        })
        .collect();
    let (a, b) = stable_window(&pts).ok_or_else(|| {
        Error::InsufficientData("no window where the counting slope is stable".into())
    })?;
    let (slope, _, rms) = least_squares(&pts[a..=b]);
    Ok(ExponentFit {
        estimate: slope,
        window: (pts[a].0, pts[b].0),
        residual: rms,
        method: ExponentMethod::CountingSlope,
    })
}

fn check_cutoffs(spectrum: &OrthoSpectrum, cutoffs: &[f64]) -> Result<Vec<f64>> {
    let mut c: Vec<f64> = cutoffs.to_vec();
    c.sort_by(f64::total_cmp);
    c.dedup();
    if c.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 distinct cutoffs, got {}",
            c.len()
        )));
    }
    if c.iter().any(|&x| !(x > 0.0) || x > spectrum.cutoff) {
        return Err(Error::InsufficientData(format!(
            "cutoffs must lie in (0, {}]",
            spectrum.cutoff
        )));
    }
    Ok(c)
}

/// Growth rate of `N(L) = #{l <= L}` from the counts at the given cutoffs.
pub fn ortho_exponent(spectrum: &OrthoSpectrum, cutoffs: &[f64]) -> Result<ExponentFit> {
    let c = check_cutoffs(spectrum, cutoffs)?;
    let mut lengths = spectrum.lengths();
    lengths.sort_by(f64::total_cmp);
    counting_fit(&lengths, &c)
}

/// The abscissa `t` at which the increments of `sum exp(-t l)` between
/// consecutive cutoffs stop growing.
pub fn ortho_exponent_divergence(spectrum: &OrthoSpectrum, cutoffs: &[f64]) -> Result<ExponentFit> {
    let c = check_cutoffs(spectrum, cutoffs)?;
    let mut lengths = spectrum.lengths();
    lengths.sort_by(f64::total_cmp);
    let slope_at = |t: f64| -> Option<(f64, f64)> {
        let mut pts = Vec::new();
        for w in c.windows(2) {
            let lo = lengths.partition_point(|&l| l <= w[0]);
            let hi = lengths.partition_point(|&l| l <= w[1]);
            let terms: Vec<f64> = lengths[lo..hi]
                .iter()
                .map(|l| (-t * (l - w[0])).exp())
                .collect();
            let inc = pairwise_sum(&terms);
            if inc > 0.0 {
                // log of the increment, measured from the window start
                pts.push((
                    0.5 * (w[0] + w[1]),
                    inc.ln() - t * w[0] - (w[1] - w[0]).ln(),
                ));
            }
        }
        (pts.len() >= 3).then(|| {
            let (s, _, r) = least_squares(&pts);
            (s, r)
        })
    };
    let (mut lo, mut hi) = (0.0, 2.0);
    let (s_lo, _) =
        slope_at(lo).ok_or_else(|| Error::InsufficientData("too few nonempty windows".into()))?;
    if s_lo <= 0.0 {
        return Err(Error::InsufficientData(
            "partial sums do not grow at t = 0".into(),
        ));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        match slope_at(mid) {
            Some((s, _)) if s > 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    let t = 0.5 * (lo + hi);
    let (_, residual) = slope_at(t).unwrap_or((0.0, f64::NAN));
    Ok(ExponentFit {
        estimate: t,
        window: (c[0], c[c.len() - 1]),
        residual,
        method: ExponentMethod::PartialSumDivergence,
    })
}

/// A boundary lift seen from the normalized lift `(-1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalRadius {
    pub radius: f64,
    pub length: f64,
    pub component: usize,
}

/// Conjugate so that the axis of boundary 0 is `(-1, 1)` with the center of
/// its fundamental segment at `i`, and report each other lift whose ortho
/// geodesic leaves that segment: its Euclidean radius (after folding the
/// outside of the unit circle in by `z -> -1/z`) and its distance `l`.
/// Complete for `l <= r_max`.
pub fn boundary_interval_radii(
    surface: &FuchsianSurface,
    r_max: f64,
) -> Result<Vec<IntervalRadius>> {
    let spectrum = ortho_spectrum(surface, r_max)?;
    interval_radii_from_spectrum(surface, &spectrum)
}

pub fn interval_radii_from_spectrum(
    surface: &FuchsianSurface,
    spectrum: &OrthoSpectrum,
) -> Result<Vec<IntervalRadius>> {
    // z -> (z - 1) / (z + 1) sends 0, inf to -1, 1 and fixes i
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let to_unit = Isometry::new(s, -s, s, s)?;
    let normal = to_unit * boundary_frame(surface, 0)?.inverse();
    let axes: Vec<Geodesic> = (0..surface.boundary.len())
        .map(|i| surface.boundary_element(i).axis())
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut push = |g: Isometry, j: usize, length: f64| {
        let lift = normal.apply_geodesic(&g.apply_geodesic(&axes[j]));
        let ends = [lift.p, lift.q].map(|p| match p {
            IdealPoint::Finite(x) => x,
            IdealPoint::Infinity => f64::INFINITY,
        });
        let inside = ends.iter().all(|x| x.abs() <= 1.0);
        let (a, b) = if inside {
            (ends[0], ends[1])
        } else {
            let inv = |x: f64| if x.is_infinite() { 0.0 } else { -1.0 / x };
            (inv(ends[0]), inv(ends[1]))
        };
        out.push(IntervalRadius {
            radius: 0.5 * (a - b).abs(),
            length,
            component: j,
        });
    };
    for e in &spectrum.entries {
        let (i, j) = e.boundary_pair;
        if i == 0 {
            push(e.representative, j, e.length);
        }
        if j == 0 {
            push(e.representative.inverse(), i, e.length);
        }
    }
    Ok(out)
}

/// `max e^-l / r` over the radii: the constant in `r >= e^-l / C`.
pub fn radius_constant(radii: &[IntervalRadius]) -> f64 {
    radii
        .iter()
        .map(|r| (-r.length).exp() / r.radius)
        .fold(0.0, f64::max)
}

/// Growth rate of `#{r' >= r}` against `-ln r`, using counts only up to
/// `complete_to` (in `-ln r`) when given.
pub fn packing_exponent(radii: &[f64], complete_to: Option<f64>) -> Result<ExponentFit> {
    if radii.len() < 50 {
        return Err(Error::InsufficientData(format!(
            "need at least 50 radii, got {}",
            radii.len()
        )));
    }
    let mut xs: Vec<f64> = radii.iter().map(|r| -r.ln()).collect();
    xs.sort_by(f64::total_cmp);
    let top = complete_to
        .unwrap_or(xs[xs.len() - 1])
        .min(xs[xs.len() - 1]);
    let bottom = xs[MIN_COUNT - 1];
    if !(top > bottom) {
        return Err(Error::InsufficientData("radii span no range".into()));
    }
    let steps = ((top - bottom) / 0.25).ceil().max(8.0) as usize;
    let samples: Vec<f64> = (0..=steps)
        .map(|k| bottom + (top - bottom) * k as f64 / steps as f64)
        .collect();
    let fit = counting_fit(&xs, &samples)?;
    // logarithmic counting, e.g. a single geometric sequence
    if fit.estimate < 0.05 {
        return Err(Error::InsufficientData(format!(
            "radii decay too fast to fit a power law (slope {:.3})",
            fit.estimate
        )));
    }
    Ok(fit)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SpectrumComparison {
    Isospectral {
        cutoff: f64,
        tol: f64,
        count: usize,
        max_discrepancy: f64,
    },
    Distinct {
        cutoff: f64,
        tol: f64,
        count_a: usize,
        count_b: usize,
        /// First index where matched lengths differ by more than `tol`.
        first_discrepancy: Option<(usize, f64, f64)>,
    },
}

impl SpectrumComparison {
    pub fn is_isospectral(&self) -> bool {
        matches!(self, SpectrumComparison::Isospectral { .. })
    }
}

/// Match sorted length lists below `cutoff`. Entries within `tol` of the
/// cutoff may be missing from either side and are ignored.
pub fn compare_lengths(a: &[f64], b: &[f64], cutoff: f64, tol: f64) -> SpectrumComparison {
    let prep = |v: &[f64]| {
        let mut v: Vec<f64> = v.iter().copied().filter(|&x| x <= cutoff - tol).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (a, b) = (prep(a), prep(b));
    let first = a
        .iter()
        .zip(&b)
        .enumerate()
        .find(|(_, (x, y))| (*x - *y).abs() > tol)
        .map(|(k, (x, y))| (k, *x, *y));
    if a.len() != b.len() || first.is_some() {
        return SpectrumComparison::Distinct {
            cutoff,
            tol,
            count_a: a.len(),
            count_b: b.len(),
            first_discrepancy: first,
        };
    }
    let max = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    SpectrumComparison::Isospectral {
        cutoff,
        tol,
        count: a.len(),
        max_discrepancy: max,
    }
}

pub fn compare_spectra(a: &OrthoSpectrum, b: &OrthoSpectrum, tol: f64) -> SpectrumComparison {
    compare_lengths(&a.lengths(), &b.lengths(), a.cutoff.min(b.cutoff), tol)
}

/// Compare a degree `d` cover's spectrum against the base spectrum with
/// every multiplicity scaled by `d`.
pub fn multiplicity_audit(
    base: &OrthoSpectrum,
    cover: &OrthoSpectrum,
    degree: usize,
    tol: f64,
) -> SpectrumComparison {
    let scaled: Vec<f64> = base
        .entries
        .iter()
        .flat_map(|e| std::iter::repeat_n(e.length, degree))
        .collect();
    compare_lengths(
        &scaled,
        &cover.lengths(),
        base.cutoff.min(cover.cutoff),
        tol,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusParams {
    pub l_gamma: f64,
    pub l_alpha: f64,
    pub twist_abs: f64,
}

const MATCH_TOL: f64 = 1e-8;
const TWIST_ITERATIONS: usize = 200;

/// Remove `sub` from `all` as multisets, matching within [`MATCH_TOL`].
/// `None` if some element of `sub` has no partner.
fn multiset_difference(all: &[f64], sub: &[f64]) -> Option<Vec<f64>> {
    let mut rest = Vec::with_capacity(all.len());
    let mut k = 0;
    for &x in all {
        if k < sub.len() && (x - sub[k]).abs() <= MATCH_TOL * (1.0 + x) {
            k += 1;
        } else if k < sub.len() && sub[k] < x {
            return None;
        } else {
            rest.push(x);
        }
    }
    (k == sub.len()).then_some(rest)
}

/// Ortho spectrum of the pants obtained by cutting along the interior
/// curve, restricted to arcs with both feet on the boundary.
fn cut_pants_spectrum(l_alpha: f64, l_gamma: f64, cutoff: f64) -> Result<Vec<f64>> {
    let p = build_pants(l_alpha, l_alpha, l_gamma)?;
    let sp = ortho_spectrum(&p, cutoff)?;
    let mut v: Vec<f64> = sp
        .entries
        .iter()
        .filter(|e| e.boundary_pair == (2, 2))
        .map(|e| e.length)
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn shortest_crossing(
    l_alpha: f64,
    twist: f64,
    l_gamma: f64,
    pants: &[f64],
    cutoff: f64,
) -> Result<f64> {
    let t = build_one_holed_torus(l_alpha, twist, l_gamma)?;
    let mut v = ortho_spectrum(&t, cutoff)?.lengths();
    v.sort_by(f64::total_cmp);
    let pants: Vec<f64> = pants.iter().copied().filter(|&x| x <= cutoff).collect();
    let rest = multiset_difference(&v, &pants)
        .ok_or_else(|| Error::Inconsistent("candidate torus misses a pants arc".into()))?;
    Ok(rest.first().copied().unwrap_or(f64::INFINITY))
}

/// Recover the boundary length, interior curve length and |twist| of a
/// one-holed torus from its ortho spectrum.
///
/// The shortest arc `t` is the simple one disjoint from the interior curve
/// `alpha`, and the arc winding once more around `alpha` has
/// `cosh(t'/2) = 2 cosh(l_alpha/2) cosh(t/2)`; together with
/// `cosh(l_alpha/2) = sinh(t/2) sinh(l_gamma/4)` each candidate `t'` fixes
/// both lengths. The Basmajian sum brackets `l_gamma`, and a candidate is
/// accepted when the spectrum of the torus cut along `alpha` sits inside
/// the input. What remains are arcs crossing `alpha`; the shortest of them
/// grows with |twist| on `[0, l_alpha/2]`, which is solved by bisection.
pub fn reconstruct_torus(spectrum: &OrthoSpectrum) -> Result<TorusParams> {
    if spectrum.boundary_count != 1 {
        return Err(Error::Inconsistent(format!(
            "a one-holed torus has one boundary component, spectrum has {}",
            spectrum.boundary_count
        )));
    }
    let mut lengths = spectrum.lengths();
    lengths.sort_by(f64::total_cmp);
    if lengths.len() < 3 {
        return Err(Error::InsufficientCutoff(
            "fewer than three ortho geodesics".into(),
        ));
    }
    let t = lengths[0];
    let terms: Vec<f64> = lengths
        .iter()
        .map(|&l| basmajian_term(l).map(|b| 2.0 * b))
        .collect::<Result<_>>()?;
    let partial = pairwise_sum(&terms);
    let tail = basmajian_tail(&lengths, spectrum.cutoff);
    if !tail.is_finite() {
        return Err(Error::InsufficientCutoff(
            "Basmajian tail cannot be bounded".into(),
        ));
    }
    let (g_lo, g_hi) = (partial - 1e-9, partial + 2.0 * tail + 1e-6);

    let mut distinct = distinct_below(&lengths, f64::INFINITY);
    distinct.remove(0);
    let mut found = None;
    for &y in &distinct {
        let Ok(a) = cuff_from_tau_pair(t, y) else {
            continue;
        };
        let Ok(g) = torus_gamma_from_simple_ortho(t, a) else {
            continue;
        };
        if g < g_lo || g > g_hi {
            continue;
        }
        // cheap filter: the next winding arc must be present when in range
        if let Ok(w3) = winding_ortho_length(3, a, a, g) {
            if w3 < spectrum.cutoff - MATCH_TOL
                && !lengths
                    .iter()
                    .any(|&x| (x - w3).abs() <= MATCH_TOL * (1.0 + x))
            {
                continue;
            }
        }
        let pants = cut_pants_spectrum(a, g, spectrum.cutoff)?;
        if let Some(rest) = multiset_difference(&lengths, &pants) {
            found = Some((a, g, pants, rest));
            break;
        }
    }
    let (l_alpha, l_gamma, pants, rest) = found.ok_or_else(|| {
        Error::Inconsistent(
            "no arc pair matches a one-holed torus with the Basmajian length".into(),
        )
    })?;
    let c = *rest.first().ok_or_else(|| {
        Error::InsufficientCutoff("no arc crossing the interior curve below the cutoff".into())
    })?;

    let probe_cut = (c + 0.5).min(spectrum.cutoff.max(c + 0.5));
    let f = |tw: f64| shortest_crossing(l_alpha, tw, l_gamma, &pants, probe_cut);
    let f0 = f(0.0)?;
    if c <= f0 + 1e-12 * (1.0 + c) {
        if c < f0 - MATCH_TOL {
            return Err(Error::Inconsistent(format!(
                "crossing arc {c} shorter than the twist-free minimum {f0}"
            )));
        }
        return Ok(TorusParams {
            l_gamma,
            l_alpha,
            twist_abs: 0.0,
        });
    }
    let (mut lo, mut hi) = (0.0, l_alpha / 2.0);
    if f(hi)? < c - MATCH_TOL {
        return Err(Error::Inconsistent(
            "crossing arc longer than any twist allows".into(),
        ));
    }
    let mut converged = false;
    for _ in 0..TWIST_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < c {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * l_alpha {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ResourceCap(
            "twist bisection did not converge".into(),
        ));
    }
    Ok(TorusParams {
        l_gamma,
        l_alpha,
        twist_abs: 0.5 * (lo + hi),
    })
}

/// Genus and number of boundary components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub genus: u32,
    pub boundaries: u32,
}

impl Topology {
    pub fn of(surface: &FuchsianSurface) -> Result<Topology> {
        let n = surface.boundary.len() as i64;
        let twice_g = 2 - surface.euler_characteristic - n;
        if twice_g < 0 || twice_g % 2 != 0 {
            return Err(Error::Domain("inconsistent Euler characteristic".into()));
        }
        Ok(Topology {
            genus: (twice_g / 2) as u32,
            boundaries: n as u32,
        })
    }

    pub fn abs_euler(&self) -> u32 {
        2 * self.genus + self.boundaries - 2
    }

    pub fn interior_curves(&self) -> u32 {
        (3 * self.genus + self.boundaries).saturating_sub(3)
    }
}

/// Coarse default for the cap on pants curve lengths.
pub fn default_pants_cap(topology: Topology, longest_boundary: f64) -> f64 {
    4.0 * std::f64::consts::PI * topology.abs_euler() as f64 + longest_boundary
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McKeanStep {
    pub depth: usize,
    /// Upper bound on the longer of the two arcs compared at this depth.
    pub window: f64,
    #[serde(with = "crate::io::float_or_string")]
    pub ratio: f64,
    pub lower: f64,
    /// The window reaches past the spectrum cutoff; only listed lengths
    /// were scanned.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McKeanBound {
    pub bound: f64,
    pub cap: f64,
    pub root_boundary: usize,
    pub boundary_lower: Vec<f64>,
    pub collar_floor: f64,
    pub steps: Vec<McKeanStep>,
    /// Some window exceeded the cutoff: the bound is not certified.
    pub window_truncated: bool,
    /// No admissible arc pair in some window, or no finite cap: the bound
    /// fell back to 0.
    pub degraded: bool,
}

// cosh(t/2) for the simple arc with both feet on cuff g, other cuffs a, b
fn simple_arc_cosh(a: f64, b: f64, g: f64) -> f64 {
    let (ca, cb, cg, sg) = (
        (a / 2.0).cosh(),
        (b / 2.0).cosh(),
        (g / 2.0).cosh(),
        (g / 2.0).sinh(),
    );
    ((ca * ca + cb * cb + 2.0 * ca * cb * cg) / (sg * sg) + 1.0).sqrt()
}

/// Lower bound for the systole of any surface with this ortho spectrum and
/// topology, given that some pants decomposition has all curves at most
/// `cap` (default [`default_pants_cap`]).
///
/// From a boundary component `a0`, a pants curve `a` at depth `n` comes with
/// two arcs from `a0` to itself whose lengths satisfy
/// `cosh(t'/2) / cosh(t/2) = 2 cosh(l(a)/2)`; both lie below a window fixed
/// by the bounds already obtained, so the smallest spectral ratio above 2
/// in that window bounds `l(a)` from below. Curves outside the
/// decomposition cross one of length at most `cap` and are at least
/// `2 asinh(1 / sinh(cap/2))` long.
pub fn mckean_systole_bound(
    spectrum: &OrthoSpectrum,
    topology: Topology,
    cap: Option<f64>,
) -> Result<McKeanBound> {
    if spectrum.boundary_count != topology.boundaries as usize || spectrum.boundary_count == 0 {
        return Err(Error::Domain(
            "spectrum and topology disagree on boundary count".into(),
        ));
    }
    let nb = spectrum.boundary_count;
    let mut feet = vec![Vec::new(); nb];
    for e in &spectrum.entries {
        let t = basmajian_term(e.length)?;
        feet[e.boundary_pair.0].push(t);
        feet[e.boundary_pair.1].push(t);
    }
    let lower: Vec<f64> = feet
        .iter_mut()
        .map(|v| {
            v.sort_by(f64::total_cmp);
            pairwise_sum(v)
        })
        .collect();
    let cap = match cap {
        Some(c) if c > 0.0 => c,
        Some(c) => {
            return Err(Error::Domain(format!(
                "pants cap must be positive, got {c}"
            )))
        }
        None => {
            let mut lengths = spectrum.lengths();
            lengths.sort_by(f64::total_cmp);
            let tail = basmajian_tail(&lengths, spectrum.cutoff);
            default_pants_cap(
                topology,
                lower.iter().fold(0.0, |m: f64, &x| m.max(x)) + tail,
            )
        }
    };
    let own: Vec<Vec<f64>> = (0..nb)
        .map(|i| {
            spectrum
                .entries
                .iter()
                .filter(|e| e.boundary_pair == (i, i))
                .map(|e| e.length)
                .collect()
        })
        .collect();
    mckean_from_parts(&lower, &own, spectrum.cutoff, topology, cap)
}

fn mckean_from_parts(
    lower: &[f64],
    own: &[Vec<f64>],
    cutoff: f64,
    topology: Topology,
    cap: f64,
) -> Result<McKeanBound> {
    let lo_all = lower.iter().copied().fold(f64::INFINITY, f64::min);
    let collar = 2.0 * (1.0 / (cap / 2.0).sinh()).asinh();
    let base = McKeanBound {
        bound: lo_all,
        cap,
        root_boundary: 0,
        boundary_lower: lower.to_vec(),
        collar_floor: collar,
        steps: Vec::new(),
        window_truncated: false,
        degraded: false,
    };
    if topology.interior_curves() == 0 {
        return Ok(base);
    }
    if !(lo_all > 0.0) {
        return Ok(McKeanBound {
            bound: 0.0,
            degraded: true,
            ..base
        });
    }
    let depth_max = topology.abs_euler() as usize;
    let mut best: Option<McKeanBound> = None;
    for (root, lengths) in own.iter().enumerate() {
        let mut s = f64::INFINITY;
        let mut steps = Vec::new();
        for depth in 0..depth_max {
            let c = s.min(lo_all).min(lower[root]);
            let cuff = if depth == 0 { lower[root] } else { c };
            let t_max = simple_arc_cosh(cap, cap, cuff).acosh() * 2.0;
            let t_prime = 2.0 * (2.0 * (cap / 2.0).cosh() * (t_max / 2.0).cosh()).acosh();
            let window = if depth == 0 {
                t_prime
            } else {
                let d = pants_boundary_distance(c, c, cap)?;
                let arc = depth as f64 * (d + cap / 2.0);
                2.0 * arc + cap + t_prime
            };
            let truncated = window > cutoff;
            let ratio = granulosity_above(lengths, window.min(cutoff), 2.0 * (1.0 + 1e-12));
            let lower_here = if ratio.is_finite() {
                2.0 * (ratio / 2.0).acosh()
            } else {
                0.0
            };
            s = s.min(lower_here);
            steps.push(McKeanStep {
                depth,
                window,
                ratio,
                lower: lower_here,
                truncated,
            });
        }
        let bound = lo_all.min(collar).min(s);
        let cand = McKeanBound {
            bound,
            root_boundary: root,
            window_truncated: steps.iter().any(|st| st.truncated),
            degraded: !(collar > 0.0) || steps.iter().any(|st| !st.ratio.is_finite()),
            steps,
            ..base.clone()
        };
        if best.as_ref().is_none_or(|b| cand.bound > b.bound) {
            best = Some(cand);
        }
    }
    Ok(best.expect("at least one boundary"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchingRow {
    pub epsilon: f64,
    pub n: u32,
    pub predicted: f64,
    pub matched: Option<f64>,
    /// `l - n eps + 2 ln eps`.
    pub excess: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchingReport {
    pub l_gamma: f64,
    pub rows: Vec<PinchingRow>,
    /// Smallest `M` with `l(tau_n) <= n eps - 2 ln eps + M` on every row.
    #[serde(with = "crate::io::float_or_string")]
    pub fitted_m: f64,
    pub all_matched: bool,
}

/// Tori `(eps, 0, l_gamma)` and the arcs from the boundary winding `n`
/// times around the short curve.
pub fn pinching_experiment(epsilons: &[f64], n_max: u32, l_gamma: f64) -> Result<PinchingReport> {
    let mut rows = Vec::new();
    for &eps in epsilons {
        let predicted: Vec<f64> = (1..=n_max)
            .map(|n| winding_ortho_length(n, eps, eps, l_gamma))
            .collect::<Result<_>>()?;
        let cutoff = predicted.iter().copied().fold(0.0, f64::max) + 0.25;
        let torus = build_one_holed_torus(eps, 0.0, l_gamma)?;
        let lengths = ortho_spectrum(&torus, cutoff)?.lengths();
        for (k, &p) in predicted.iter().enumerate() {
            let n = k as u32 + 1;
            let matched = lengths
                .iter()
                .copied()
                .find(|&l| (l - p).abs() <= MATCH_TOL * (1.0 + p));
            rows.push(PinchingRow {
                epsilon: eps,
                n,
                predicted: p,
                matched,
                excess: matched.map(|l| l - n as f64 * eps + 2.0 * eps.ln()),
            });
        }
    }
    let fitted_m = rows
        .iter()
        .filter_map(|r| r.excess)
        .fold(f64::NEG_INFINITY, f64::max);
    let all_matched = rows.iter().all(|r| r.matched.is_some());
    Ok(PinchingReport {
        l_gamma,
        rows,
        fitted_m,
        all_matched,
    })
}
