//! Dirichlet domains at the basepoint, computed in the Klein model.
//!
//! Everything is conjugated so the basepoint sits at the center of the disk.
//! The bisector between the center and an orbit point is then a straight
//! chord, and the domain is a convex polygon obtained by clipping.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ball::{
    displacement, surface_search, symmetric_generators, uniform_cost_search, GroupElement,
    DEFAULT_ELEMENT_CAP,
};
use crate::error::{Error, Result};
use crate::geometry::{IdealPoint, Isometry};
use crate::surfaces::FuchsianSurface;
use crate::words::Word;

/// How the face pairings stored on a surface were obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainCertificate {
    pub certified: bool,
    /// Radius at which the face set was found stable under a 25% increase.
    pub probe_radius: f64,
}

/// Klein-model edge length below which an edge counts as a vertex.
const DEGENERATE_EDGE: f64 = 1e-9;

/// Half-plane `n . k <= c` in Klein coordinates, tagged with a label.
#[derive(Clone, Copy, Debug)]
pub(crate) struct HalfPlane {
    pub n: [f64; 2],
    pub c: f64,
    pub label: usize,
}

/// Convex polygon with a label on each edge (`None` for the initial box).
#[derive(Clone, Debug)]
pub(crate) struct Polygon {
    pub verts: Vec<[f64; 2]>,
    pub labels: Vec<Option<usize>>,
}

impl Polygon {
    fn square(h: f64) -> Self {
        Polygon {
            verts: vec![[-h, -h], [h, -h], [h, h], [-h, h]],
            labels: vec![None; 4],
        }
    }

    fn clip(&self, hp: &HalfPlane) -> Polygon {
        let n = self.verts.len();
        let side = |p: &[f64; 2]| hp.n[0] * p[0] + hp.n[1] * p[1] - hp.c;
        let mut verts = Vec::with_capacity(n + 1);
        let mut labels = Vec::with_capacity(n + 1);
        for i in 0..n {
            let (p, q) = (self.verts[i], self.verts[(i + 1) % n]);
            let (sp, sq) = (side(&p), side(&q));
            let (inp, inq) = (sp <= 0.0, sq <= 0.0);
            let cut = || {
                let t = sp / (sp - sq);
                [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
            };
            match (inp, inq) {
                (true, true) => {
                    verts.push(p);
                    labels.push(self.labels[i]);
                }
                (true, false) => {
                    verts.push(p);
                    labels.push(self.labels[i]);
                    verts.push(cut());
                    labels.push(Some(hp.label));
                }
                (false, true) => {
                    verts.push(cut());
                    labels.push(self.labels[i]);
                }
                (false, false) => {}
            }
        }
        Polygon { verts, labels }
    }

    /// Labels of edges that pass through the open unit disk. Edges shorter
    /// than [`DEGENERATE_EDGE`] are bisectors through a vertex: whether they
    /// survive clipping is decided by rounding, and they pair no face.
    fn labels_inside_disk(&self) -> BTreeSet<usize> {
        let n = self.verts.len();
        let mut out = BTreeSet::new();
        for i in 0..n {
            if let Some(l) = self.labels[i] {
                let (p, q) = (self.verts[i], self.verts[(i + 1) % n]);
                if (p[0] - q[0]).hypot(p[1] - q[1]) < DEGENERATE_EDGE {
                    continue;
                }
                if segment_origin_distance(p, q) < 1.0 - 1e-12 {
                    out.insert(l);
                }
            }
        }
        out
    }

    fn max_radius(&self) -> f64 {
        self.verts
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max)
    }
}

fn segment_origin_distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    let d = [q[0] - p[0], q[1] - p[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (-(p[0] * d[0] + p[1] * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] + t * d[0]).hypot(p[1] + t * d[1])
}

/// Point of the upper half-plane seen from `o`, moved to the model where `o = i`.
fn centered(z: Complex64, o: Complex64) -> Complex64 {
    (z - o.re) / o.im
}

/// Bisector between the disk center and the orbit point `g o`.
pub(crate) fn bisector(g: &Isometry, o: Complex64, label: usize) -> HalfPlane {
    let w = centered(g.apply(o), o);
    let (x, y) = (w.re, w.im);
    // (x^2 + y^2 - 1) k1 - 2x k2 <= x^2 + (y - 1)^2, scaled by 1/(2y)
    let n = [(x * x + y * y - 1.0) / (2.0 * y), -x / y];
    let c = (x * x + (y - 1.0) * (y - 1.0)) / (2.0 * y);
    let s = n[0].hypot(n[1]);
    HalfPlane {
        n: [n[0] / s, n[1] / s],
        c: c / s,
        label,
    }
}

fn ideal_to_disk(p: IdealPoint, o: Complex64) -> [f64; 2] {
    match p {
        IdealPoint::Infinity => [1.0, 0.0],
        IdealPoint::Finite(x) => {
            let u = (x - o.re) / o.im;
            let z = Complex64::new(u, -1.0) / Complex64::new(u, 1.0);
            [z.re, z.im]
        }
    }
}

/// Half-plane on the basepoint side of the chord spanned by a geodesic.
pub(crate) fn chord(p: IdealPoint, q: IdealPoint, o: Complex64, label: usize) -> HalfPlane {
    let (a, b) = (ideal_to_disk(p, o), ideal_to_disk(q, o));
    let mut n = [-(b[1] - a[1]), b[0] - a[0]];
    let s = n[0].hypot(n[1]);
    n = [n[0] / s, n[1] / s];
    let mut c = n[0] * a[0] + n[1] * a[1];
    if c < 0.0 {
        n = [-n[0], -n[1]];
        c = -c;
    }
    HalfPlane { n, c, label }
}

/// Face labels of the polygon cut out by the bisectors of `elements`.
fn faces_of(elements: &[GroupElement], o: Complex64) -> BTreeSet<usize> {
    let mut poly = Polygon::square(2.0);
    for (k, e) in elements.iter().enumerate() {
        if e.word.is_empty() {
            continue;
        }
        poly = poly.clip(&bisector(&e.matrix, o, k));
    }
    poly.labels_inside_disk()
}

fn face_words(elements: &[GroupElement], o: Complex64) -> BTreeSet<Word> {
    faces_of(elements, o)
        .into_iter()
        .map(|k| elements[k].word.clone())
        .collect()
}

fn ball_over(steps: &[GroupElement], o: Complex64, radius: f64) -> Result<Vec<GroupElement>> {
    let s = uniform_cost_search(steps, radius, DEFAULT_ELEMENT_CAP, |g| displacement(g, o));
    if !s.complete {
        return Err(Error::ResourceCap(format!(
            "ball of radius {radius} too large during certification"
        )));
    }
    Ok(s.elements.into_iter().map(|b| b.element).collect())
}

enum Attempt {
    Stable(Vec<GroupElement>),
    Unstable,
}

fn attempt(gens: &[Isometry], o: Complex64, radius: f64, max_rounds: usize) -> Result<Attempt> {
    let base = symmetric_generators(gens);
    let mut steps = base.clone();
    for _ in 0..max_rounds {
        let inner = ball_over(&steps, o, radius)?;
        let faces = face_words(&inner, o);
        let closed: BTreeSet<Word> = faces
            .iter()
            .flat_map(|w| [w.clone(), w.inverse()])
            .collect();
        let pairings: Vec<GroupElement> = closed
            .iter()
            .map(|w| GroupElement::from_word(w.clone(), gens))
            .collect();
        let outer = ball_over(&pairings, o, 1.25 * radius)?;
        // a face whose edge degenerates to a point may show on one side only
        let faces_outer: BTreeSet<Word> = face_words(&outer, o)
            .into_iter()
            .flat_map(|w| [w.inverse(), w])
            .collect();
        let reaches_gens = base.iter().all(|g| outer.iter().any(|e| e.word == g.word));
        if faces_outer == closed && reaches_gens {
            return Ok(Attempt::Stable(pairings));
        }
        let mut next: BTreeSet<Word> = base.iter().map(|g| g.word.clone()).collect();
        next.extend(closed);
        next.extend(faces_outer.iter().cloned());
        let next: Vec<GroupElement> = next
            .into_iter()
            .map(|w| GroupElement::from_word(w, gens))
            .collect();
        if next
            .iter()
            .map(|e| &e.word)
            .eq(steps.iter().map(|e| &e.word))
        {
            return Ok(Attempt::Unstable);
        }
        steps = next;
    }
    Ok(Attempt::Unstable)
}

/// Face pairings of the Dirichlet domain at `o`, certified by stability of
/// the face set between `radius` and `1.25 * radius`.
pub fn face_pairings_at(gens: &[Isometry], o: Complex64, radius: f64) -> Result<Vec<GroupElement>> {
    match attempt(gens, o, radius, 6)? {
        Attempt::Stable(p) => Ok(p),
        Attempt::Unstable => Err(Error::Uncertified(format!(
            "face set changed above probe radius {radius}"
        ))),
    }
}

/// Certify face pairings, raising the probe radius by 25% until the face
/// set is stable. Falls back to the symmetric generators, uncertified.
pub fn certify(gens: &[Isometry], o: Complex64) -> (Vec<GroupElement>, DomainCertificate) {
    let start = gens.iter().map(|g| displacement(g, o)).fold(1.0, f64::max);
    let mut radius = 1.5 * start;
    for _ in 0..12 {
        match attempt(gens, o, radius, 6) {
            Ok(Attempt::Stable(p)) => {
                return (
                    p,
                    DomainCertificate {
                        certified: true,
                        probe_radius: radius,
                    },
                )
            }
            Ok(Attempt::Unstable) => radius *= 1.25,
            Err(_) => break,
        }
    }
    (
        symmetric_generators(gens),
        DomainCertificate {
            certified: false,
            probe_radius: radius,
        },
    )
}

/// Face pairings of a surface's Dirichlet domain at a caller-chosen radius.
pub fn dirichlet_face_pairings(
    surface: &FuchsianSurface,
    probe_radius: f64,
) -> Result<Vec<Isometry>> {
    let p = face_pairings_at(&surface.generators, surface.basepoint, probe_radius)?;
    Ok(p.into_iter().map(|e| e.matrix).collect())
}

/// Covering radius of the convex core by the basepoint orbit: the largest
/// distance from `o` to a vertex of the Dirichlet domain truncated by the
/// boundary lifts. `None` when the truncated polygon still reaches the
/// circle at infinity (not enough lifts in the ball).
pub fn core_covering_radius(surface: &FuchsianSurface) -> Option<f64> {
    if !surface.certificate.certified {
        return None;
    }
    let o = surface.basepoint;
    let axes: Vec<(IdealPoint, IdealPoint)> = surface
        .boundary
        .iter()
        .enumerate()
        .map(|(i, _)| surface.boundary_element(i).oriented_axis())
        .collect::<Result<_>>()
        .ok()?;
    let mut radius = surface.certificate.probe_radius;
    for _ in 0..4 {
        let search = surface_search(surface, radius, DEFAULT_ELEMENT_CAP, |g| displacement(g, o));
        if !search.complete {
            return None;
        }
        let ball: Vec<GroupElement> = search.elements.into_iter().map(|b| b.element).collect();
        let mut poly = Polygon::square(2.0);
        for (k, e) in ball.iter().enumerate() {
            if !e.word.is_empty() {
                poly = poly.clip(&bisector(&e.matrix, o, k));
            }
        }
        for e in &ball {
            for &(p, q) in &axes {
                let hp = chord(
                    e.matrix.apply_ideal(p),
                    e.matrix.apply_ideal(q),
                    o,
                    usize::MAX,
                );
                poly = poly.clip(&hp);
            }
        }
        let r = poly.max_radius();
        if r < 1.0 - 1e-9 {
            return Some(r.atanh());
        }
        radius *= 1.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping_keeps_labels() {
        let p = Polygon::square(2.0);
        let hp = HalfPlane {
            n: [1.0, 0.0],
            c: 0.5,
            label: 7,
        };
        let q = p.clip(&hp);
        assert_eq!(q.verts.len(), 4);
        assert!(q.labels.contains(&Some(7)));
        assert!(q.labels_inside_disk().contains(&7));
    }

    #[test]
    fn bisector_is_equidistant() {
        let o = Complex64::new(0.3, 1.7);
        let g = Isometry::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let hp = bisector(&g, o, 0);
        // foot of the chord in Klein coordinates maps back to an equidistant point
        let k = [hp.n[0] * hp.c, hp.n[1] * hp.c];
        let r2 = k[0] * k[0] + k[1] * k[1];
        // Klein -> Poincare disk -> centered half-plane
        let s = 1.0 + (1.0 - r2).sqrt();
        let zeta = Complex64::new(k[0] / s, k[1] / s);
        let w =
            Complex64::i() * (Complex64::new(1.0, 0.0) + zeta) / (Complex64::new(1.0, 0.0) - zeta);
        let z = w * o.im + o.re;
        let d1 = crate::geometry::point_distance(z, o);
        let d2 = crate::geometry::point_distance(z, g.apply(o));
        assert!((d1 - d2).abs() < 1e-10, "{d1} vs {d2}");
    }
}
