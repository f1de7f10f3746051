//! Ortho spectra, boundary lifts, closed geodesics and systoles.
//!
//! Ortho geodesics from boundary `i` are found by a tube search: group
//! elements `g` are admitted when `g o` lies within `r` of the fundamental
//! segment `S_i` of the axis of `h_i` (length `l_i`, centered at the foot
//! of the perpendicular from `o`). Every ortho geodesic of length at most
//! `L` leaving `S_i` ends on a lift `g A_j` whose own fundamental segment
//! is within `L` of `S_i`, and that segment is within `rho_j` of `g o`, where
//! `cosh rho_j = cosh D_j cosh(l_j / 2)` with `D_j = d(o, A_j)`. So
//! `r = max(L + max_j rho_j, rho_i)` suffices, and the Dirichlet tiles met
//! along the way are face-connected inside the tube.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{
    group_ball, uniform_cost_search, BallElement, GroupElement, DEFAULT_ELEMENT_CAP,
};
use crate::covers::Ambient;
use crate::dirichlet::core_covering_radius;
use crate::error::{Error, Result};
use crate::geometry::{point_distance, ExtIsometry, Geodesic, Isometry};
use crate::surfaces::FuchsianSurface;
use crate::words::Word;

/// Lengths closer than this are treated as one value when merging.
pub const LENGTH_TOL: f64 = 1e-9;
const FOOT_TOL: f64 = 1e-7;
const WINDOW_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthoGeodesicEntry {
    pub length: f64,
    pub boundary_pair: (usize, usize),
    /// Feet on boundary `i` and `j`, as arc length in `[0, l)` from the foot
    /// of the perpendicular dropped from the basepoint, in the direction the
    /// boundary element translates.
    pub feet: (f64, f64),
    /// `g` with the ortho geodesic running from `axis(h_i)` to `g axis(h_j)`.
    pub representative: Isometry,
    pub word: Word,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certificate {
    Certified,
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthoSpectrum {
    pub entries: Vec<OrthoGeodesicEntry>,
    pub cutoff: f64,
    pub certificate: Certificate,
    pub ball_radius: f64,
    pub fingerprint: String,
    pub boundary_count: usize,
}

impl OrthoSpectrum {
    pub fn lengths(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.length).collect()
    }

    pub fn is_certified(&self) -> bool {
        self.certificate == Certificate::Certified
    }

    /// The sub-spectrum below a smaller cutoff.
    pub fn truncated(&self, cutoff: f64) -> OrthoSpectrum {
        let mut s = self.clone();
        s.entries.retain(|e| e.length <= cutoff);
        s.cutoff = cutoff.min(self.cutoff);
        s
    }
}

/// Per-boundary data used by the searches.
///
/// Component `j` has axis `x_j N_j (0, inf)`. For covers, `x_j` is a base
/// group element and the tube searches run in the base group: an element
/// `z` joins components `i` and `j` when `H x_i z = H x_j`, and stands for
/// the cover element `x_i z x_j^-1`. Otherwise `x_j` is the identity.
struct Frames<'a> {
    /// `N_j` with `N_j(i)` the foot of the perpendicular from `o` to
    /// `x_j^-1` of the axis.
    frames: Vec<Isometry>,
    conj: Vec<GroupElement>,
    coset: Vec<usize>,
    lengths: Vec<f64>,
    /// `d(o, S_j)` bound `rho_j`.
    rho: Vec<f64>,
    steps: &'a [GroupElement],
    ambient: Option<&'a Ambient>,
}

impl Frames<'_> {
    /// The frame of the axis itself.
    fn actual(&self, j: usize) -> ExtIsometry {
        self.conj[j].ext() * self.frames[j].into()
    }

    /// The element of the surface group represented by `z` between
    /// components `i` and `j`, or `None` if `z` joins other components.
    fn lift(&self, i: usize, j: usize, z: &GroupElement) -> Option<GroupElement> {
        match self.ambient {
            None => Some(z.clone()),
            Some(a) => {
                if a.table.act(self.coset[i], &z.word) != self.coset[j] {
                    return None;
                }
                let g = self.conj[i].mul(z).mul(&self.conj[j].inverse());
                let (word, end) = a.basis.rewrite(&a.table, 0, &g.word);
                debug_assert_eq!(end, 0);
                Some(GroupElement::from_ext(word, g.ext()))
            }
        }
    }
}

fn frames(surface: &FuchsianSurface) -> Result<Frames<'_>> {
    let o = surface.basepoint;
    let mut fr = Frames {
        frames: Vec::new(),
        conj: Vec::new(),
        coset: Vec::new(),
        lengths: Vec::new(),
        rho: Vec::new(),
        steps: &surface.face_pairings,
        ambient: surface.ambient.as_ref(),
    };
    for i in 0..surface.boundary.len() {
        let (h, x, power) = match &surface.ambient {
            None => (surface.boundary_element(i), GroupElement::identity(), 1),
            Some(a) => {
                let c = &a.components[i];
                let x = GroupElement::from_word(c.conjugator.clone(), &a.base.generators);
                fr.coset.push(a.table.act(0, &c.conjugator));
                fr.steps = &a.base.face_pairings;
                (a.base.boundary_element(c.base), x, c.power)
            }
        };
        if surface.ambient.is_none() {
            fr.coset.push(0);
        }
        let l = power as f64 * h.translation_length()?;
        let (p, q) = h.oriented_axis()?;
        let n = Isometry::frame(p, q, Some(o))?;
        let foot = n.apply(Complex64::i());
        let dist = point_distance(o, foot);
        fr.frames.push(n);
        fr.conj.push(x);
        fr.lengths.push(l);
        fr.rho.push((dist.cosh() * (l / 2.0).cosh()).acosh());
    }
    Ok(fr)
}

/// Frame of boundary axis `i` whose point `i` is the center of the
/// fundamental segment used for the feet.
pub fn boundary_frame(surface: &FuchsianSurface, i: usize) -> Result<Isometry> {
    if i >= surface.boundary.len() {
        return Err(Error::Domain(format!("no boundary component {i}")));
    }
    Ok(frames(surface)?.actual(i).to_f64())
}

/// Distance from `z` (in the frame of `A_i`) to the segment `[-l/2, l/2]`
/// of the imaginary axis.
fn segment_distance(z: Complex64, l: f64) -> f64 {
    let s = z.norm().ln();
    if s.abs() <= l / 2.0 {
        (z.re.abs() / z.im).asinh()
    } else {
        let end = Complex64::new(0.0, (s.signum() * l / 2.0).exp());
        point_distance(z, end)
    }
}

/// Ortho data between the framed axis `A_i` and `M (0, inf)` where `M` is
/// the relative frame: `(length, foot_i, foot_j)` or `None` for the same
/// lift. Crossing lifts are an error.
pub(crate) fn relative_ortho(m: &Isometry) -> Result<Option<(f64, f64, f64)>> {
    let (a, b, c, d) = (m.a, m.b, m.c, m.d);
    let bc = b * c;
    let scale = 1.0 + a.abs().max(b.abs()).max(c.abs()).max(d.abs()).powi(2);
    let len = if bc > 0.0 {
        2.0 * bc.sqrt().asinh()
    } else if bc < -1.0 {
        2.0 * (-a * d).sqrt().asinh()
    } else if bc.abs() <= 1e-12 * scale {
        return Ok(None);
    } else {
        return Err(Error::InvalidSurface(format!(
            "boundary lifts cross (bc = {bc})"
        )));
    };
    if len < 1e-7 {
        return Ok(None);
    }
    let fi = 0.5 * ((a * b) / (c * d)).abs().ln();
    let fj = 0.5 * ((b * d) / (a * c)).abs().ln();
    Ok(Some((len, fi, fj)))
}

/// `x` mod `l` in `[0, l)`, snapping values within the foot tolerance of
/// `l` to `0` so both ends of the circle agree.
fn wrap(x: f64, l: f64) -> f64 {
    let r = x.rem_euclid(l);
    if r >= l - FOOT_TOL {
        0.0
    } else {
        r
    }
}

fn circular_gap(a: f64, b: f64, l: f64) -> f64 {
    let d = (a - b).abs();
    d.min(l - d)
}

struct Candidate {
    j: usize,
    length: f64,
    fi: f64,
    fj: f64,
    element: GroupElement,
}

/// Enumerates every ortho geodesic of length at most `cutoff`.
pub fn ortho_spectrum(surface: &FuchsianSurface, cutoff: f64) -> Result<OrthoSpectrum> {
    ortho_spectrum_capped(surface, cutoff, DEFAULT_ELEMENT_CAP)
}

pub fn ortho_spectrum_capped(
    surface: &FuchsianSurface,
    cutoff: f64,
    cap: usize,
) -> Result<OrthoSpectrum> {
    if !(cutoff > 0.0) {
        return Err(Error::Domain(format!(
            "cutoff must be positive, got {cutoff}"
        )));
    }
    let fr = frames(surface)?;
    let nb = surface.boundary.len();
    let o = surface.basepoint;
    let rho_max = fr.rho.iter().cloned().fold(0.0, f64::max);
    let mut complete = surface.certificate.certified;
    let mut radius_used: f64 = 0.0;
    let mut entries = Vec::new();
    for i in 0..nb {
        let radius = (cutoff + rho_max).max(fr.rho[i]);
        radius_used = radius_used.max(radius);
        let ni_inv = fr.frames[i].inverse();
        let li = fr.lengths[i];
        let search = uniform_cost_search(fr.steps, radius, cap, |g| {
            segment_distance((ni_inv * *g).apply(o), li)
        });
        complete &= search.complete;
        let cands: Vec<Result<Vec<Candidate>>> = search
            .elements
            .par_iter()
            .map(|e| {
                let mut out = Vec::new();
                let base = ExtIsometry::from(ni_inv) * e.element.ext();
                for j in i..nb {
                    if fr.ambient.is_some()
                        && fr.ambient.unwrap().table.act(fr.coset[i], &e.element.word)
                            != fr.coset[j]
                    {
                        continue;
                    }
                    let m = (base * fr.frames[j].into()).to_f64();
                    if let Some((len, fi, fj)) = relative_ortho(&m)? {
                        // one representative per lift: both feet on the fundamental segments
                        let lj = fr.lengths[j];
                        if len <= cutoff
                            && fi.abs() <= li / 2.0 + WINDOW_SLACK
                            && fj.abs() <= lj / 2.0 + WINDOW_SLACK
                        {
                            out.push(Candidate {
                                j,
                                length: len,
                                fi: wrap(fi, li),
                                fj: wrap(fj, lj),
                                element: fr.lift(i, j, &e.element).unwrap(),
                            });
                        }
                    }
                }
                Ok(out)
            })
            .collect();
        let mut all = Vec::new();
        for c in cands {
            all.extend(c?);
        }
        entries.extend(dedup(i, all, &fr.lengths));
    }
    entries.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.boundary_pair.cmp(&b.boundary_pair))
            .then(a.feet.0.total_cmp(&b.feet.0))
            .then(a.feet.1.total_cmp(&b.feet.1))
    });
    Ok(OrthoSpectrum {
        entries,
        cutoff,
        certificate: if complete {
            Certificate::Certified
        } else {
            Certificate::Heuristic
        },
        ball_radius: radius_used,
        fingerprint: surface.fingerprint(),
        boundary_count: nb,
    })
}

/// One entry per ortho geodesic: candidates agreeing on the target
/// component, the length and the foot on `A_i` are the same arc.
fn dedup(i: usize, mut all: Vec<Candidate>, lengths: &[f64]) -> Vec<OrthoGeodesicEntry> {
    let li = lengths[i];
    all.sort_by(|a, b| a.j.cmp(&b.j).then(a.length.total_cmp(&b.length)));
    let mut out = Vec::new();
    let mut start = 0;
    while start < all.len() {
        let mut end = start + 1;
        while end < all.len()
            && all[end].j == all[start].j
            && all[end].length - all[end - 1].length <= LENGTH_TOL * (1.0 + all[end].length)
        {
            end += 1;
        }
        let cluster = &mut all[start..end];
        cluster.sort_by(|a, b| {
            a.fi.total_cmp(&b.fi)
                .then(a.element.word.cmp(&b.element.word))
        });
        let mut reps: Vec<&Candidate> = Vec::new();
        for c in cluster.iter() {
            match reps
                .iter_mut()
                .find(|r| circular_gap(r.fi, c.fi, li) <= FOOT_TOL)
            {
                Some(r) => {
                    if c.element.word < r.element.word {
                        *r = c;
                    }
                }
                None => reps.push(c),
            }
        }
        for r in reps {
            // each self-pair arc is seen from both ends; keep one orientation
            if r.j == i && r.fi > r.fj {
                continue;
            }
            out.push(OrthoGeodesicEntry {
                length: r.length,
                boundary_pair: (i, r.j),
                feet: (r.fi, r.fj),
                representative: r.element.matrix,
                word: r.element.word.clone(),
            });
        }
        start = end;
    }
    out
}

/// A boundary lift `g axis(h_i)` with its component and coset representative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLift {
    pub geodesic: Geodesic,
    pub component: usize,
    pub representative: GroupElement,
}

/// Distinct lifts `g axis(h_i)` for `g` in the ball of radius `radius`.
pub fn boundary_lifts(surface: &FuchsianSurface, radius: f64) -> Result<Vec<BoundaryLift>> {
    let ball = group_ball(surface, radius)?;
    lifts_from_ball(surface, &ball)
}

pub(crate) fn lifts_from_ball(
    surface: &FuchsianSurface,
    ball: &[BallElement],
) -> Result<Vec<BoundaryLift>> {
    let fr = frames(surface)?;
    let axes: Vec<Geodesic> = (0..surface.boundary.len())
        .map(|i| surface.boundary_element(i).axis())
        .collect::<Result<_>>()?;
    // g A_j = g' A_j exactly when g^-1 o and g'^-1 o differ by a power of
    // h_j, i.e. share the distance to A_j and the foot position mod l_j
    let mut keyed = Vec::new();
    for (k, e) in ball.iter().enumerate() {
        for j in 0..axes.len() {
            let w = (fr.actual(j).inverse() * e.element.ext().inverse())
                .to_f64()
                .apply(surface.basepoint);
            keyed.push((
                j,
                (w.re.abs() / w.im).asinh(),
                wrap(w.norm().ln(), fr.lengths[j]),
                k,
            ));
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.3.cmp(&b.3)));
    let mut out: Vec<BoundaryLift> = Vec::new();
    let mut start = 0;
    while start < keyed.len() {
        let mut end = start + 1;
        while end < keyed.len()
            && keyed[end].0 == keyed[start].0
            && keyed[end].1 - keyed[end - 1].1 <= 1e-9 * (1.0 + keyed[end].1)
        {
            end += 1;
        }
        let mut cluster = keyed[start..end].to_vec();
        cluster.sort_by_key(|c| c.3);
        let mut reps: Vec<(f64, usize)> = Vec::new();
        for &(j, _, s, k) in &cluster {
            if reps
                .iter()
                .all(|&(t, _)| circular_gap(t, s, fr.lengths[j]) > FOOT_TOL)
            {
                reps.push((s, k));
                let e = &ball[k].element;
                out.push(BoundaryLift {
                    geodesic: e.matrix.apply_geodesic(&axes[j]),
                    component: j,
                    representative: e.clone(),
                });
            }
        }
        start = end;
    }
    out.sort_by(|a, b| {
        a.component
            .cmp(&b.component)
            .then(a.representative.word.cmp(&b.representative.word))
    });
    // crossing audit in the frame of each lift would be quadratic; check
    // pairs through the relative-frame test on a bounded prefix
    let n = out.len().min(400);
    for a in 0..n {
        for b in a + 1..n {
            let ma = lift_frame(&fr, &out[a]);
            let mb = lift_frame(&fr, &out[b]);
            relative_ortho(&(ma.inverse() * mb).to_f64())?;
        }
    }
    Ok(out)
}

fn lift_frame(fr: &Frames, l: &BoundaryLift) -> ExtIsometry {
    l.representative.ext() * fr.actual(l.component)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedGeodesic {
    pub length: f64,
    pub primitive: bool,
    /// Canonical word of the conjugacy class (up to inversion).
    pub word: Word,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthSpectrum {
    pub geodesics: Vec<ClosedGeodesic>,
    pub cutoff: f64,
    pub certificate: Certificate,
    pub ball_radius: f64,
}

/// Fallback covering radius used when the core polygon cannot be closed.
const HEURISTIC_CORE_RADIUS: f64 = 4.0;

/// Closed geodesics of length at most `cutoff`, one per conjugacy class up to
/// inversion (unoriented geodesics).
pub fn closed_geodesics(surface: &FuchsianSurface, cutoff: f64) -> Result<LengthSpectrum> {
    if let Some(a) = &surface.ambient {
        return lifted_closed_geodesics(a, cutoff);
    }
    let (delta, certified) = match core_covering_radius(surface) {
        Some(d) => (d, true),
        None => (HEURISTIC_CORE_RADIUS, false),
    };
    let radius = cutoff + 2.0 * delta;
    let ball = group_ball(surface, radius)?;
    // the least displaced representative of a class has the smallest
    // entries, hence the most accurate trace
    let mut classes: BTreeMap<Word, (f64, f64)> = BTreeMap::new();
    for e in &ball {
        let w = &e.element.word;
        if w.is_empty() {
            continue;
        }
        let t = e.element.abs_trace() / 2.0;
        let l = if t > 1.0 { 2.0 * t.acosh() } else { 0.0 };
        if l <= 0.0 || l > cutoff + LENGTH_TOL {
            continue;
        }
        classes.entry(w.conjugacy_key()).or_insert((e.priority, l));
    }
    let mut geodesics: Vec<ClosedGeodesic> = classes
        .into_iter()
        .map(|(word, (_, l))| ClosedGeodesic {
            length: l,
            primitive: word.power_exponent() == 1,
            word,
        })
        .collect();
    geodesics.sort_by(|a, b| a.length.total_cmp(&b.length).then(a.word.cmp(&b.word)));
    Ok(LengthSpectrum {
        geodesics,
        cutoff,
        certificate: if certified {
            Certificate::Certified
        } else {
            Certificate::Heuristic
        },
        ball_radius: radius,
    })
}

/// Closed geodesics of a cover from those of its base: a primitive base
/// class `w` lifts to one primitive class per orbit of `w` on the cosets,
/// of length the orbit size times `l(w)`.
fn lifted_closed_geodesics(a: &Ambient, cutoff: f64) -> Result<LengthSpectrum> {
    let base = closed_geodesics(&a.base, cutoff)?;
    let mut geodesics = Vec::new();
    for g in base.geodesics.iter().filter(|g| g.primitive) {
        let mut seen = vec![false; a.table.degree];
        for c in 0..a.table.degree {
            if seen[c] {
                continue;
            }
            let mut r = 0;
            let mut d = c;
            loop {
                seen[d] = true;
                d = a.table.act(d, &g.word);
                r += 1;
                if d == c {
                    break;
                }
            }
            let t = &a.table.transversal[c];
            let root = t.mul(&g.word.pow(r)).mul(&t.inverse());
            let (root, _) = a.basis.rewrite(&a.table, 0, &root);
            let mut k = 1;
            while (k * r) as f64 * g.length <= cutoff + LENGTH_TOL {
                let word = root.pow(k).conjugacy_key();
                geodesics.push(ClosedGeodesic {
                    length: (k * r) as f64 * g.length,
                    primitive: k == 1,
                    word,
                });
                k += 1;
            }
        }
    }
    geodesics.sort_by(|a, b| a.length.total_cmp(&b.length).then(a.word.cmp(&b.word)));
    Ok(LengthSpectrum {
        geodesics,
        cutoff,
        certificate: base.certificate,
        ball_radius: base.ball_radius,
    })
}

/// Length of the shortest closed geodesic, searching up to `max_length`.
pub fn systole(surface: &FuchsianSurface, max_length: f64) -> Result<f64> {
    let shortest_boundary = surface
        .boundary_lengths()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let cutoff = max_length.min(shortest_boundary + LENGTH_TOL);
    let spec = closed_geodesics(surface, cutoff)?;
    spec.geodesics
        .first()
        .map(|g| g.length)
        .ok_or(Error::NotFound(max_length))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn relative_ortho_concentric() {
        // (0, inf) against (1, q) with (q + 1) / (q - 1) = cosh 1: distance 1,
        // foot at height sqrt(q)
        let q = (0.5f64.tanh()).powi(-2);
        let m = Isometry::frame(
            crate::geometry::IdealPoint::Finite(1.0),
            crate::geometry::IdealPoint::Finite(q),
            None,
        )
        .unwrap();
        let (l, fi, _) = relative_ortho(&m).unwrap().unwrap();
        assert_relative_eq!(l, 1.0, epsilon = 1e-12);
        assert_relative_eq!(fi, 0.5 * q.ln(), epsilon = 1e-12);
        assert!(relative_ortho(&Isometry::axial(0.7)).unwrap().is_none());
        assert!(relative_ortho(&Isometry::rotation(0.9)).is_err());
    }

    #[test]
    fn segment_distance_cases() {
        assert_relative_eq!(
            segment_distance(Complex64::new(0.0, 1.0), 2.0),
            0.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            segment_distance(Complex64::new(0.0, 3f64.exp()), 2.0),
            2.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            segment_distance(Complex64::new(1.0, 1.0), 2.0),
            1f64.asinh(),
            epsilon = 1e-12
        );
    }
}
