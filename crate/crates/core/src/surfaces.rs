//! Explicit Fuchsian groups from Fenchel–Nielsen data.
//!
//! Every surface is assembled from pants blocks. A block is the group of a
//! right-angled hexagon doubled along its seams: cuff elements `q0, q1, q2`
//! with `q0 q1 q2 = 1`, `q0` translating up the imaginary axis, and the
//! hexagon on the same side of all three oriented axes.
//!
//! Gluing cuff `b` onto cuff `a` conjugates by `twist_along(u, t) * J`, where
//! `J` carries the framed axis of `v` onto the reversed framed axis of `u`,
//! so that `J v J^-1 = u^-1`. The frames are anchored at seam feet:
//!
//! | cuff | origin of twist |
//! |------|-----------------|
//! | 0    | foot of the seam to cuff 2 |
//! | 1    | foot of the seam to cuff 2 |
//! | 2    | foot of the seam to cuff 0 |
//!
//! With this table, twist 0 on a one-holed torus lines up the two seams
//! running to the boundary, which is where the shortest crossing ortho
//! geodesic is minimal.

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ball::{displacement, symmetric_generators, uniform_cost_search, GroupElement};
use crate::covers::Ambient;
use crate::dirichlet::{self, DomainCertificate};
use crate::error::{Error, Result};
use crate::geometry::{
    common_perpendicular, pants_boundary_distance, point_distance, ExtIsometry, Geodesic,
    IdealPoint, Isometry,
};
use crate::words::Word;

const ORIGIN_SEAM: [usize; 3] = [2, 2, 0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Pants,
    OneHoledTorus,
    PantsGraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteriorCurve {
    pub length: f64,
    #[serde(default)]
    pub twist: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gluing {
    pub pants_a: usize,
    pub cuff_a: usize,
    pub pants_b: usize,
    pub cuff_b: usize,
    pub length: f64,
    #[serde(default)]
    pub twist: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Leg {
    pub pants: usize,
    pub cuff: usize,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PantsGraph {
    pub pants: usize,
    #[serde(default)]
    pub gluings: Vec<Gluing>,
    #[serde(default)]
    pub legs: Vec<Leg>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub kind: SurfaceKind,
    #[serde(default)]
    pub boundary_lengths: Vec<f64>,
    #[serde(default)]
    pub interior_curves: Vec<InteriorCurve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PantsGraph>,
}

fn positive(field: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Spec(format!(
            "{field} must be a positive length, got {x}"
        )))
    }
}

impl SurfaceSpec {
    pub fn pants(l1: f64, l2: f64, l3: f64) -> Self {
        SurfaceSpec {
            kind: SurfaceKind::Pants,
            boundary_lengths: vec![l1, l2, l3],
            interior_curves: vec![],
            graph: None,
        }
    }

    pub fn one_holed_torus(l_alpha: f64, twist: f64, l_gamma: f64) -> Self {
        SurfaceSpec {
            kind: SurfaceKind::OneHoledTorus,
            boundary_lengths: vec![l_gamma],
            interior_curves: vec![InteriorCurve {
                length: l_alpha,
                twist,
            }],
            graph: None,
        }
    }

    pub fn from_graph(graph: PantsGraph) -> Self {
        SurfaceSpec {
            kind: SurfaceKind::PantsGraph,
            boundary_lengths: graph.legs.iter().map(|l| l.length).collect(),
            interior_curves: vec![],
            graph: Some(graph),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: SurfaceSpec = serde_json::from_str(s).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Checks shape and positivity; returns the equivalent pants graph.
    pub fn validate(&self) -> Result<PantsGraph> {
        for (k, l) in self.boundary_lengths.iter().enumerate() {
            positive(&format!("boundary_lengths[{k}]"), *l)?;
        }
        for (k, c) in self.interior_curves.iter().enumerate() {
            positive(&format!("interior_curves[{k}].length"), c.length)?;
            if !c.twist.is_finite() {
                return Err(Error::Spec(format!(
                    "interior_curves[{k}].twist must be finite"
                )));
            }
        }
        let graph = match self.kind {
            SurfaceKind::Pants => {
                if self.boundary_lengths.len() != 3
                    || !self.interior_curves.is_empty()
                    || self.graph.is_some()
                {
                    return Err(Error::Spec(
                        "pants needs exactly 3 boundary_lengths and nothing else".into(),
                    ));
                }
                let b = &self.boundary_lengths;
                PantsGraph {
                    pants: 1,
                    gluings: vec![],
                    legs: (0..3)
                        .map(|c| Leg {
                            pants: 0,
                            cuff: c,
                            length: b[c],
                        })
                        .collect(),
                }
            }
            SurfaceKind::OneHoledTorus => {
                if self.boundary_lengths.len() != 1
                    || self.interior_curves.len() != 1
                    || self.graph.is_some()
                {
                    return Err(Error::Spec(
                        "one_holed_torus needs 1 boundary length and 1 interior curve".into(),
                    ));
                }
                let a = self.interior_curves[0];
                PantsGraph {
                    pants: 1,
                    gluings: vec![Gluing {
                        pants_a: 0,
                        cuff_a: 0,
                        pants_b: 0,
                        cuff_b: 1,
                        length: a.length,
                        twist: a.twist,
                    }],
                    legs: vec![Leg {
                        pants: 0,
                        cuff: 2,
                        length: self.boundary_lengths[0],
                    }],
                }
            }
            SurfaceKind::PantsGraph => {
                let g = self
                    .graph
                    .clone()
                    .ok_or_else(|| Error::Spec("pants_graph needs a graph".into()))?;
                if !self.boundary_lengths.is_empty() {
                    let legs: Vec<f64> = g.legs.iter().map(|l| l.length).collect();
                    if legs != self.boundary_lengths {
                        return Err(Error::Spec(
                            "boundary_lengths disagree with graph legs".into(),
                        ));
                    }
                }
                if !self.interior_curves.is_empty() {
                    let same = self.interior_curves.len() == g.gluings.len()
                        && self
                            .interior_curves
                            .iter()
                            .zip(&g.gluings)
                            .all(|(c, e)| c.length == e.length && c.twist == e.twist);
                    if !same {
                        return Err(Error::Spec(
                            "interior_curves disagree with graph gluings".into(),
                        ));
                    }
                }
                g
            }
        };
        validate_graph(&graph)?;
        Ok(graph)
    }

    pub fn euler_characteristic(&self) -> Result<i64> {
        Ok(-(self.validate()?.pants as i64))
    }
}

fn validate_graph(g: &PantsGraph) -> Result<()> {
    if g.pants == 0 {
        return Err(Error::Spec("graph.pants must be at least 1".into()));
    }
    let mut used = vec![[false; 3]; g.pants];
    let mut mark = |p: usize, c: usize, what: &str| -> Result<()> {
        if p >= g.pants || c > 2 {
            return Err(Error::Spec(format!("{what}: cuff ({p}, {c}) out of range")));
        }
        if used[p][c] {
            return Err(Error::Spec(format!("{what}: cuff ({p}, {c}) used twice")));
        }
        used[p][c] = true;
        Ok(())
    };
    for (k, e) in g.gluings.iter().enumerate() {
        positive(&format!("graph.gluings[{k}].length"), e.length)?;
        if !e.twist.is_finite() {
            return Err(Error::Spec(format!(
                "graph.gluings[{k}].twist must be finite"
            )));
        }
        mark(e.pants_a, e.cuff_a, &format!("graph.gluings[{k}]"))?;
        mark(e.pants_b, e.cuff_b, &format!("graph.gluings[{k}]"))?;
    }
    for (k, l) in g.legs.iter().enumerate() {
        positive(&format!("graph.legs[{k}].length"), l.length)?;
        mark(l.pants, l.cuff, &format!("graph.legs[{k}]"))?;
    }
    if let Some(p) = used.iter().position(|u| u.iter().any(|x| !x)) {
        return Err(Error::Spec(format!("pants {p} has an unassigned cuff")));
    }
    if g.legs.is_empty() {
        return Err(Error::Spec(
            "a surface with geodesic boundary needs at least one leg".into(),
        ));
    }
    // connectivity
    let mut seen = vec![false; g.pants];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(p) = queue.pop_front() {
        for e in &g.gluings {
            for (x, y) in [(e.pants_a, e.pants_b), (e.pants_b, e.pants_a)] {
                if x == p && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Spec("pants graph is disconnected".into()));
    }
    Ok(())
}

/// Where a surface came from; hashed into the fingerprint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SurfaceOrigin {
    Spec {
        spec: SurfaceSpec,
    },
    Cover {
        base: Box<SurfaceOrigin>,
        images: Vec<u64>,
        modulus: u64,
    },
    Generators,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryComponent {
    pub word: Word,
    /// Expected translation length.
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuchsianSurface {
    pub generators: Vec<Isometry>,
    pub boundary: Vec<BoundaryComponent>,
    pub basepoint: Complex64,
    /// Dirichlet face pairings at the basepoint, closed under inverses.
    pub face_pairings: Vec<GroupElement>,
    pub certificate: DomainCertificate,
    pub euler_characteristic: i64,
    pub origin: SurfaceOrigin,
    /// For covers: the base group's face pairings and the coset data used
    /// to enumerate the subgroup inside it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<Ambient>,
}

impl FuchsianSurface {
    /// Assemble a surface and certify its Dirichlet domain.
    pub fn assemble(
        generators: Vec<Isometry>,
        boundary: Vec<BoundaryComponent>,
        basepoint: Complex64,
        euler_characteristic: i64,
        origin: SurfaceOrigin,
    ) -> Self {
        let (face_pairings, certificate) = dirichlet::certify(&generators, basepoint);
        FuchsianSurface {
            generators,
            boundary,
            basepoint,
            face_pairings,
            certificate,
            euler_characteristic,
            origin,
            ambient: None,
        }
    }

    /// A surface with no certification attempted; face pairings are the
    /// symmetric generators. Useful for auditing arbitrary generator sets.
    pub fn uncertified(
        generators: Vec<Isometry>,
        boundary: Vec<BoundaryComponent>,
        basepoint: Complex64,
    ) -> Self {
        let face_pairings = symmetric_generators(&generators);
        FuchsianSurface {
            generators,
            boundary,
            basepoint,
            face_pairings,
            certificate: DomainCertificate {
                certified: false,
                probe_radius: 0.0,
            },
            euler_characteristic: 0,
            origin: SurfaceOrigin::Generators,
            ambient: None,
        }
    }

    /// For covers the element is evaluated through the base generators,
    /// which keeps conjugated boundary words accurate.
    pub fn boundary_element(&self, i: usize) -> Isometry {
        self.boundary_element_ext(i).to_f64()
    }

    pub fn boundary_element_ext(&self, i: usize) -> ExtIsometry {
        match &self.ambient {
            Some(a) => self.boundary[i]
                .word
                .substitute(&a.basis.words)
                .evaluate_ext(&a.base.generators),
            None => self.boundary[i].word.evaluate_ext(&self.generators),
        }
    }

    pub fn boundary_lengths(&self) -> Vec<f64> {
        self.boundary.iter().map(|b| b.length).collect()
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary.iter().map(|b| b.length).sum()
    }

    /// Gauss–Bonnet area of the convex core, `2 pi |chi|`.
    pub fn area(&self) -> f64 {
        2.0 * PI * self.euler_characteristic.unsigned_abs() as f64
    }

    pub fn spec(&self) -> Option<&SurfaceSpec> {
        match &self.origin {
            SurfaceOrigin::Spec { spec } => Some(spec),
            _ => None,
        }
    }

    /// Hex SHA-256 of the origin description.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(&self.origin).expect("origin serializes");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Cuff elements, seam-foot origins and hexagon centroid of one pants.
#[derive(Clone, Debug)]
struct Block {
    cuffs: [Isometry; 3],
    origins: [Complex64; 3],
    centroid: Complex64,
}

impl Block {
    fn conjugated(&self, k: &Isometry) -> Block {
        let ki = k.inverse();
        Block {
            cuffs: self.cuffs.map(|q| (*k * q * ki).renormalized()),
            origins: self.origins.map(|z| k.apply(z)),
            centroid: k.apply(self.centroid),
        }
    }
}

fn to_hyperboloid(z: Complex64) -> [f64; 3] {
    let (x, y) = (z.re, z.im);
    let r2 = x * x + y * y;
    [x / y, (r2 - 1.0) / (2.0 * y), (r2 + 1.0) / (2.0 * y)]
}

fn from_hyperboloid(v: [f64; 3]) -> Complex64 {
    let y = 1.0 / (v[2] - v[1]);
    Complex64::new(v[0] * y, y)
}

/// Normalized Minkowski mean of points.
fn centroid(points: &[Complex64]) -> Complex64 {
    let mut s = [0.0; 3];
    for p in points {
        let v = to_hyperboloid(*p);
        for k in 0..3 {
            s[k] += v[k];
        }
    }
    let q = (s[2] * s[2] - s[0] * s[0] - s[1] * s[1]).sqrt();
    from_hyperboloid([s[0] / q, s[1] / q, s[2] / q])
}

fn pants_block(l: [f64; 3]) -> Result<Block> {
    let g1 = Isometry::axial(l[0]);
    let d = pants_boundary_distance(l[0], l[1], l[2])?;
    let k = Isometry::rotation(PI / 2.0);
    let m = k * Isometry::axial(d) * k.inverse();
    let h = m * Isometry::axial(l[1]) * m.inverse();
    let target = 2.0 * (l[2] / 2.0).cosh();
    let h = if ((g1 * h).trace().abs() - target).abs()
        <= ((g1 * h.inverse()).trace().abs() - target).abs()
    {
        h
    } else {
        h.inverse()
    };
    // sign of the lift chosen so tr(g1 g2) = -2 cosh(l3 / 2)
    let g2 = if (g1 * h).trace() > 0.0 { h.neg() } else { h };
    let g3 = (g1 * g2).inverse();
    let axes = [g1.axis()?, g2.axis()?, g3.axis()?];
    let mut feet = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let (fa, fb) = common_perpendicular(&axes[a], &axes[b])?;
        let expected = pants_boundary_distance(l[a], l[b], l[3 - a - b])?;
        let measured = point_distance(fa, fb);
        if (measured - expected).abs() > 1e-8 * (1.0 + expected) {
            return Err(Error::Construction(format!(
                "hexagon side ({a},{b}) measured {measured}, expected {expected}"
            )));
        }
        feet[a][b] = fa;
        feet[b][a] = fb;
    }
    let origins = [
        feet[0][ORIGIN_SEAM[0]],
        feet[1][ORIGIN_SEAM[1]],
        feet[2][ORIGIN_SEAM[2]],
    ];
    let all = [
        feet[0][1], feet[1][0], feet[0][2], feet[2][0], feet[1][2], feet[2][1],
    ];
    Ok(Block {
        cuffs: [g1, g2, g3],
        origins,
        centroid: centroid(&all),
    })
}

fn framed(q: &Isometry, origin: Complex64) -> Result<Isometry> {
    let (p, r) = q.oriented_axis()?;
    Isometry::frame(p, r, Some(origin))
}

/// Gluing isometry: `K v K^-1 = u^-1`, carrying the origin of `v` to the
/// origin of `u` shifted by `twist` along `u`.
fn gluing_map(
    u: &Isometry,
    u_origin: Complex64,
    v: &Isometry,
    v_origin: Complex64,
    twist: f64,
) -> Result<Isometry> {
    let w = Isometry {
        a: 0.0,
        b: 1.0,
        c: -1.0,
        d: 0.0,
    };
    let j = framed(u, u_origin)? * w * framed(v, v_origin)?.inverse();
    let k = u.twist_along(twist)? * j;
    let check = (k * *v * k.inverse()).distance_psl(&u.inverse());
    if !(check < 1e-7 * (1.0 + u.a.abs().max(u.b.abs()).max(u.c.abs()).max(u.d.abs()))) {
        return Err(Error::Construction(format!(
            "gluing map misses the target cuff by {check}"
        )));
    }
    Ok(k)
}

/// Free-basis bookkeeping for one placed pants.
#[derive(Clone, Debug)]
struct Placed {
    block: Block,
    words: [Word; 3],
}

/// Word of cuff `k` from the cyclic relation `q_k q_{k+1} q_{k+2} = 1`.
fn third_word(words: &[Option<Word>; 3], k: usize) -> Word {
    let a = words[(k + 1) % 3].as_ref().expect("two cuffs known");
    let b = words[(k + 2) % 3].as_ref().expect("two cuffs known");
    a.mul(b).inverse()
}

/// Build any surface described by a validated spec.
pub fn build_surface(spec: &SurfaceSpec) -> Result<FuchsianSurface> {
    let graph = spec.validate()?;
    let mut lengths = vec![[0.0f64; 3]; graph.pants];
    for e in &graph.gluings {
        lengths[e.pants_a][e.cuff_a] = e.length;
        lengths[e.pants_b][e.cuff_b] = e.length;
    }
    for l in &graph.legs {
        lengths[l.pants][l.cuff] = l.length;
    }

    // spanning tree from pants 0; other gluings become HNN extensions
    let mut in_tree = vec![false; graph.pants];
    in_tree[0] = true;
    let mut tree: Vec<(usize, bool)> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(p) = queue.pop_front() {
        for (k, e) in graph.gluings.iter().enumerate() {
            if e.pants_a == p && !in_tree[e.pants_b] {
                in_tree[e.pants_b] = true;
                tree.push((k, false));
                queue.push_back(e.pants_b);
            } else if e.pants_b == p && !in_tree[e.pants_a] {
                in_tree[e.pants_a] = true;
                tree.push((k, true));
                queue.push_back(e.pants_a);
            }
        }
    }
    let tree_edges: BTreeSet<usize> = tree.iter().map(|t| t.0).collect();
    let hnn: Vec<usize> = (0..graph.gluings.len())
        .filter(|k| !tree_edges.contains(k))
        .collect();
    let hnn_cuffs: BTreeSet<(usize, usize)> = hnn
        .iter()
        .flat_map(|&k| {
            let e = graph.gluings[k];
            [(e.pants_a, e.cuff_a), (e.pants_b, e.cuff_b)]
        })
        .collect();
    let prefers = |p: usize, c: usize| hnn_cuffs.contains(&(p, c));

    let mut gens: Vec<Isometry> = Vec::new();
    let mut placed: Vec<Option<Placed>> = vec![None; graph.pants];

    // pants 0: two basis letters, preferring cuffs that take part in HNN gluings
    {
        let block = pants_block(lengths[0])?;
        let word_cuff = (0..3).rev().find(|&c| !prefers(0, c)).unwrap_or(2);
        let mut words: [Option<Word>; 3] = [None, None, None];
        for c in 0..3 {
            if c != word_cuff {
                words[c] = Some(Word::generator(gens.len()));
                gens.push(block.cuffs[c]);
            }
        }
        words[word_cuff] = Some(third_word(&words, word_cuff));
        placed[0] = Some(Placed {
            block,
            words: words.map(|w| w.unwrap()),
        });
    }

    for &(k, swapped) in &tree {
        let e = graph.gluings[k];
        let ((pa, ca), (pb, cb)) = if swapped {
            ((e.pants_b, e.cuff_b), (e.pants_a, e.cuff_a))
        } else {
            ((e.pants_a, e.cuff_a), (e.pants_b, e.cuff_b))
        };
        let host = placed[pa].as_ref().expect("tree order").clone();
        let raw = pants_block(lengths[pb])?;
        let u = host.block.cuffs[ca];
        let kmap = gluing_map(
            &u,
            host.block.origins[ca],
            &raw.cuffs[cb],
            raw.origins[cb],
            e.twist,
        )?;
        let block = raw.conjugated(&kmap);
        let mut words: [Option<Word>; 3] = [None, None, None];
        words[cb] = Some(host.words[ca].inverse());
        let others = [(cb + 1) % 3, (cb + 2) % 3];
        let letter = others
            .iter()
            .copied()
            .find(|&c| prefers(pb, c))
            .unwrap_or(others[0]);
        words[letter] = Some(Word::generator(gens.len()));
        gens.push(block.cuffs[letter]);
        let rest = 3 - cb - letter;
        words[rest] = Some(third_word(&words, rest));
        placed[pb] = Some(Placed {
            block,
            words: words.map(|w| w.unwrap()),
        });
    }

    for &k in &hnn {
        let e = graph.gluings[k];
        let sides = [
            ((e.pants_a, e.cuff_a), (e.pants_b, e.cuff_b)),
            ((e.pants_b, e.cuff_b), (e.pants_a, e.cuff_a)),
        ];
        let mut done = false;
        for ((pu, cu), (pv, cv)) in sides {
            let uw = placed[pu].as_ref().unwrap().words[cu].clone();
            let vw = placed[pv].as_ref().unwrap().words[cv].clone();
            let letter = match vw.letters() {
                [l] if *l > 0 => *l,
                _ => continue,
            };
            if uw.letters().iter().any(|x| x.abs() == letter) {
                continue;
            }
            let pu_block = &placed[pu].as_ref().unwrap().block;
            let pv_block = &placed[pv].as_ref().unwrap().block;
            let t = gluing_map(
                &pu_block.cuffs[cu],
                pu_block.origins[cu],
                &pv_block.cuffs[cv],
                pv_block.origins[cv],
                e.twist,
            )?;
            let idx = (letter - 1) as usize;
            gens[idx] = t;
            let mut images: Vec<Word> = (0..gens.len()).map(Word::generator).collect();
            images[idx] = Word(vec![-letter])
                .mul(&uw.inverse())
                .mul(&Word(vec![letter]));
            for p in placed.iter_mut().flatten() {
                for w in p.words.iter_mut() {
                    *w = w.substitute(&images);
                }
            }
            done = true;
            break;
        }
        if !done {
            return Err(Error::Construction(format!(
                "gluing {k} cannot be realized as an HNN extension over the current free basis"
            )));
        }
    }

    let boundary = graph
        .legs
        .iter()
        .map(|l| BoundaryComponent {
            word: placed[l.pants].as_ref().unwrap().words[l.cuff].clone(),
            length: l.length,
        })
        .collect::<Vec<_>>();
    for (i, b) in boundary.iter().enumerate() {
        let got = b.word.evaluate(&gens).translation_length()?;
        if (got - b.length).abs() > 1e-8 * (1.0 + b.length) {
            return Err(Error::Construction(format!(
                "boundary {i} has length {got}, expected {}",
                b.length
            )));
        }
    }
    let basepoint = placed[0].as_ref().unwrap().block.centroid;
    Ok(FuchsianSurface::assemble(
        gens,
        boundary,
        basepoint,
        -(graph.pants as i64),
        SurfaceOrigin::Spec { spec: spec.clone() },
    ))
}

/// Pair of pants with boundary lengths `l1, l2, l3`; generators `g1, g2`
/// with `tr(g1 g2) = -2 cosh(l3/2)` and boundary words `g1, g2, (g1 g2)^-1`.
pub fn build_pants(l1: f64, l2: f64, l3: f64) -> Result<FuchsianSurface> {
    build_surface(&SurfaceSpec::pants(l1, l2, l3))
}

/// One-holed torus `<A, B>` with `A` of length `l_alpha`, twist `twist` along
/// `A`, and boundary word `B^-1 A B A^-1` of length `l_gamma`.
pub fn build_one_holed_torus(l_alpha: f64, twist: f64, l_gamma: f64) -> Result<FuchsianSurface> {
    build_surface(&SurfaceSpec::one_holed_torus(l_alpha, twist, l_gamma))
}

pub fn build_from_pants_graph(spec: &SurfaceSpec) -> Result<FuchsianSurface> {
    build_surface(spec)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    /// Size of the worst violation found (0 when none).
    #[serde(with = "crate::io::float_or_string")]
    pub worst: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn worst_violation(&self) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// True when the endpoints of `h` separate those of `g` on the circle.
fn interleave(g: &Geodesic, h: &Geodesic) -> bool {
    // circle order via the angle of the Cayley image
    let ang = |p: IdealPoint| match p {
        IdealPoint::Infinity => 0.0,
        IdealPoint::Finite(x) => {
            let z = Complex64::new(x, -1.0) / Complex64::new(x, 1.0);
            let a = z.arg();
            if a < 0.0 {
                a + 2.0 * PI
            } else {
                a
            }
        }
    };
    let (mut a, mut b) = (ang(g.p), ang(g.q));
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let inside = |t: f64| t > a + 1e-12 && t < b - 1e-12;
    let outside = |t: f64| t < a - 1e-12 || t > b + 1e-12;
    let (c, d) = (ang(h.p), ang(h.q));
    (inside(c) && outside(d)) || (inside(d) && outside(c))
}

/// Audit a surface: boundary lengths, disjointness of boundary lifts, and
/// absence of elliptic elements in a ball of twice the probe radius.
pub fn validate_surface(surface: &FuchsianSurface) -> ValidationReport {
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    let mut detail = String::new();
    for (i, b) in surface.boundary.iter().enumerate() {
        let t = surface.boundary_element_ext(i).trace().abs() / 2.0;
        let err = if t > 1.0 {
            (2.0 * t.acosh() - b.length).abs()
        } else {
            f64::INFINITY
        };
        if err > worst {
            worst = err;
            detail = format!("boundary {i}");
        }
    }
    checks.push(ValidationCheck {
        name: "boundary_lengths".into(),
        passed: worst <= 1e-8,
        worst,
        detail,
    });

    let probe = if surface.certificate.probe_radius > 0.0 {
        surface.certificate.probe_radius
    } else {
        4.0
    };
    let o = surface.basepoint;
    let steps = symmetric_generators(&surface.generators);
    let ball = uniform_cost_search(&steps, 2.0 * probe, 200_000, |g| displacement(g, o));

    let mut elliptic = 0usize;
    let mut min_trace = f64::INFINITY;
    for e in &ball.elements {
        if e.element.word.is_empty() {
            continue;
        }
        let t = e.element.abs_trace();
        if t < 2.0 - 1e-9 {
            elliptic += 1;
            min_trace = min_trace.min(t);
        }
    }
    checks.push(ValidationCheck {
        name: "no_elliptics".into(),
        passed: elliptic == 0,
        worst: if elliptic == 0 { 0.0 } else { 2.0 - min_trace },
        detail: format!(
            "{elliptic} elliptic elements among {} searched",
            ball.elements.len()
        ),
    });

    let axes: Vec<Option<Geodesic>> = (0..surface.boundary.len())
        .map(|i| surface.boundary_element(i).axis().ok())
        .collect();
    let mut lifts: Vec<Geodesic> = Vec::new();
    'outer: for e in ball.elements.iter().filter(|e| e.priority <= probe) {
        for a in axes.iter().flatten() {
            let g = e.element.matrix.apply_geodesic(a);
            if lifts.iter().any(|h| h.approx_eq(&g, 1e-9)) {
                continue;
            }
            lifts.push(g);
            if lifts.len() >= 600 {
                break 'outer;
            }
        }
    }
    let mut crossings = 0usize;
    for i in 0..lifts.len() {
        for j in i + 1..lifts.len() {
            if interleave(&lifts[i], &lifts[j]) {
                crossings += 1;
            }
        }
    }
    checks.push(ValidationCheck {
        name: "disjoint_boundary_lifts".into(),
        passed: crossings == 0 && axes.iter().all(|a| a.is_some()),
        worst: crossings as f64,
        detail: format!("{crossings} crossing pairs among {} lifts", lifts.len()),
    });

    ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
