//! Uniform-cost enumeration of group elements over Dirichlet face pairings.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_distance, ExtIsometry, Isometry};
use crate::surfaces::FuchsianSurface;
use crate::words::Word;

/// Default cap on the number of elements a single search may visit.
pub const DEFAULT_ELEMENT_CAP: usize = 4_000_000;

/// A group element together with its reduced word in the generators.
///
/// The matrix is kept in double-double alongside its rounded value; after
/// deserialization only the rounded value is available.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupElement {
    pub word: Word,
    pub matrix: Isometry,
    #[serde(skip)]
    ext: Option<ExtIsometry>,
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.word == other.word && self.matrix == other.matrix
    }
}

impl GroupElement {
    pub fn identity() -> Self {
        Self::from_ext(Word::empty(), ExtIsometry::IDENTITY)
    }

    pub fn new(word: Word, matrix: Isometry) -> Self {
        GroupElement {
            word,
            matrix,
            ext: None,
        }
    }

    pub fn from_ext(word: Word, ext: ExtIsometry) -> Self {
        GroupElement {
            word,
            matrix: ext.to_f64(),
            ext: Some(ext),
        }
    }

    pub fn from_word(word: Word, gens: &[Isometry]) -> Self {
        let ext = word.evaluate_ext(gens);
        Self::from_ext(word, ext)
    }

    pub fn ext(&self) -> ExtIsometry {
        self.ext.unwrap_or_else(|| self.matrix.into())
    }

    /// `|trace|`, from the extended matrix.
    pub fn abs_trace(&self) -> f64 {
        self.ext().trace().abs()
    }

    pub fn inverse(&self) -> Self {
        Self::from_ext(self.word.inverse(), self.ext().inverse())
    }

    pub fn mul(&self, other: &GroupElement) -> Self {
        Self::from_ext(self.word.mul(&other.word), self.ext() * other.ext())
    }
}

/// An element reached by a search, with the priority it was admitted at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallElement {
    pub element: GroupElement,
    pub priority: f64,
}

#[derive(Clone, Debug)]
pub struct Search {
    /// Elements in the order they were settled (non-decreasing priority).
    pub elements: Vec<BallElement>,
    /// False when the element cap stopped the search early.
    pub complete: bool,
}

struct Node {
    priority: f64,
    element: GroupElement,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // reversed so BinaryHeap pops the smallest priority, then shortlex word
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.element.word.cmp(&self.element.word))
    }
}

/// Best-first search from the identity over right multiplication by `steps`,
/// admitting elements whose `priority` is at most `radius`.
///
/// Elements of a free group are identified by reduced word, so the visited
/// set is exact. The priority is a function of the element only, which makes
/// the first push of an element final.
pub fn uniform_cost_search<F>(
    steps: &[GroupElement],
    radius: f64,
    cap: usize,
    priority: F,
) -> Search
where
    F: Fn(&Isometry) -> f64,
{
    let mut heap = BinaryHeap::new();
    let mut seen: HashSet<Word> = HashSet::new();
    let start = GroupElement::identity();
    let p0 = priority(&start.matrix);
    seen.insert(start.word.clone());
    heap.push(Node {
        priority: p0,
        element: start,
    });
    let mut out = Vec::new();
    let mut complete = true;
    while let Some(Node {
        priority: p,
        element,
    }) = heap.pop()
    {
        for s in steps {
            let next = element.mul(s);
            if seen.contains(&next.word) {
                continue;
            }
            let q = priority(&next.matrix);
            if q <= radius {
                seen.insert(next.word.clone());
                heap.push(Node {
                    priority: q,
                    element: next,
                });
            }
        }
        out.push(BallElement {
            element,
            priority: p,
        });
        if seen.len() > cap {
            complete = false;
            break;
        }
    }
    Search {
        elements: out,
        complete,
    }
}

/// Generators together with their inverses, as search steps.
pub fn symmetric_generators(gens: &[Isometry]) -> Vec<GroupElement> {
    let mut out = Vec::with_capacity(2 * gens.len());
    for (k, g) in gens.iter().enumerate() {
        out.push(GroupElement::new(Word::generator(k), *g));
        out.push(GroupElement::new(Word::generator(k).inverse(), g.inverse()));
    }
    out
}

/// `d(o, g o)`.
pub fn displacement(g: &Isometry, o: Complex64) -> f64 {
    point_distance(o, g.apply(o))
}

/// Best-first search over the surface group with a priority depending only
/// on the element. Covers search their ambient group and keep the elements
/// of the subgroup, rewritten in the cover's generators.
pub fn surface_search<F>(surface: &FuchsianSurface, radius: f64, cap: usize, priority: F) -> Search
where
    F: Fn(&Isometry) -> f64,
{
    match &surface.ambient {
        None => uniform_cost_search(&surface.face_pairings, radius, cap, priority),
        Some(amb) => {
            let s = uniform_cost_search(&amb.base.face_pairings, radius, cap, priority);
            let elements = s
                .elements
                .into_iter()
                .filter_map(|b| {
                    let (word, end) = amb.basis.rewrite(&amb.table, 0, &b.element.word);
                    (end == 0).then_some(BallElement {
                        element: GroupElement { word, ..b.element },
                        priority: b.priority,
                    })
                })
                .collect();
            Search {
                elements,
                complete: s.complete,
            }
        }
    }
}

/// All elements moving the basepoint at most `radius`, sorted by
/// displacement, then by normalized matrix entries, then by word.
pub fn group_ball(surface: &FuchsianSurface, radius: f64) -> Result<Vec<BallElement>> {
    if !surface.certificate.certified {
        return Err(Error::Uncertified(
            "face pairings were not certified".into(),
        ));
    }
    let o = surface.basepoint;
    let search = surface_search(surface, radius, DEFAULT_ELEMENT_CAP, |g| displacement(g, o));
    if !search.complete {
        return Err(Error::ResourceCap(format!(
            "group ball of radius {radius} exceeds {DEFAULT_ELEMENT_CAP} elements"
        )));
    }
    let mut v = search.elements;
    sort_canonical(&mut v);
    Ok(v)
}

pub(crate) fn sort_canonical(v: &mut [BallElement]) {
    v.sort_by(|x, y| {
        let (a, b) = (x.element.matrix.normalized(), y.element.matrix.normalized());
        x.priority
            .total_cmp(&y.priority)
            .then_with(|| a.a.total_cmp(&b.a))
            .then_with(|| a.b.total_cmp(&b.b))
            .then_with(|| a.c.total_cmp(&b.c))
            .then_with(|| a.d.total_cmp(&b.d))
            .then_with(|| x.element.word.cmp(&y.element.word))
    });
}
