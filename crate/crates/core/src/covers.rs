//! Finite covers from permutation actions of the free group, via
//! Reidemeister–Schreier, and the cyclic cover family of the one-holed torus.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ball::{group_ball, symmetric_generators};
use crate::error::{Error, Result};
use crate::geometry::Isometry;
use crate::surfaces::{
    build_one_holed_torus, BoundaryComponent, FuchsianSurface, SurfaceKind, SurfaceOrigin,
};
use crate::words::Word;

/// Right action of the free generators on cosets `0..degree`, with a
/// shortlex Schreier transversal. Coset `0` is the subgroup itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetTable {
    pub degree: usize,
    /// `actions[g][c]` is the coset reached from `c` by generator `g`.
    pub actions: Vec<Vec<usize>>,
    pub transversal: Vec<Word>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl CosetTable {
    /// Cosets of the kernel of `F -> Z/modulus`, generator `g` ↦ `images[g]`.
    pub fn cyclic(images: &[u64], modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Domain("modulus must be positive".into()));
        }
        let g = images.iter().fold(modulus, |acc, &r| gcd(acc, r % modulus));
        if g != 1 {
            return Err(Error::DisconnectedCover {
                image_order: modulus / g,
                modulus,
            });
        }
        let n = modulus as usize;
        let actions = images
            .iter()
            .map(|&r| (0..n).map(|c| (c + (r % modulus) as usize) % n).collect())
            .collect();
        Self::from_actions(actions)
    }

    /// Table from explicit permutations; the action must be transitive.
    pub fn from_actions(actions: Vec<Vec<usize>>) -> Result<Self> {
        let degree = actions.first().map_or(1, |a| a.len());
        let mut inverse = Vec::with_capacity(actions.len());
        for a in &actions {
            if a.len() != degree {
                return Err(Error::Domain("permutations of different degrees".into()));
            }
            let mut inv = vec![usize::MAX; degree];
            for (c, &d) in a.iter().enumerate() {
                if d >= degree || inv[d] != usize::MAX {
                    return Err(Error::Domain("generator does not act bijectively".into()));
                }
                inv[d] = c;
            }
            inverse.push(inv);
        }
        // breadth first in shortlex letter order gives the shortlex-least
        // representative of every coset
        let mut transversal: Vec<Option<Word>> = vec![None; degree];
        transversal[0] = Some(Word::empty());
        let mut queue = VecDeque::from([0usize]);
        while let Some(c) = queue.pop_front() {
            let t = transversal[c].clone().unwrap();
            for (g, (a, inv)) in actions.iter().zip(&inverse).enumerate() {
                for (letter, next) in [(g as i32 + 1, a[c]), (-(g as i32 + 1), inv[c])] {
                    if transversal[next].is_none() {
                        transversal[next] = Some(t.mul(&Word(vec![letter])));
                        queue.push_back(next);
                    }
                }
            }
        }
        if transversal.iter().any(Option::is_none) {
            let reached = transversal.iter().filter(|t| t.is_some()).count();
            return Err(Error::DisconnectedCover {
                image_order: reached as u64,
                modulus: degree as u64,
            });
        }
        Ok(CosetTable {
            degree,
            actions,
            transversal: transversal.into_iter().map(Option::unwrap).collect(),
        })
    }

    /// Coset reached from `c` by reading `w`.
    pub fn act(&self, c: usize, w: &Word) -> usize {
        w.letters().iter().fold(c, |c, &l| {
            let g = (l.unsigned_abs() - 1) as usize;
            if l > 0 {
                self.actions[g][c]
            } else {
                self.actions[g].iter().position(|&d| d == c).unwrap()
            }
        })
    }
}

/// Free basis of the subgroup of a coset table, with the rewriting map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchreierBasis {
    /// Nontrivial Schreier generators `t_c g t_{cg}^-1`, as base words.
    pub words: Vec<Word>,
    /// `index[c][g]`: the basis element for the edge `c --g-->`, if any.
    index: Vec<Vec<Option<usize>>>,
}

impl SchreierBasis {
    pub fn new(table: &CosetTable) -> Self {
        let ngens = table.actions.len();
        let mut words = Vec::new();
        let mut index = vec![vec![None; ngens]; table.degree];
        for (c, row) in index.iter_mut().enumerate() {
            for (g, slot) in row.iter_mut().enumerate() {
                let d = table.actions[g][c];
                let w = table.transversal[c]
                    .mul(&Word::generator(g))
                    .mul(&table.transversal[d].inverse());
                if !w.is_empty() {
                    *slot = Some(words.len());
                    words.push(w);
                }
            }
        }
        SchreierBasis { words, index }
    }

    /// Reidemeister rewriting of a base word read from coset `start`.
    /// Returns the rewritten word and the coset it ends at.
    pub fn rewrite(&self, table: &CosetTable, start: usize, w: &Word) -> (Word, usize) {
        let mut out = Vec::new();
        let mut c = start;
        for &l in w.letters() {
            let g = (l.unsigned_abs() - 1) as usize;
            if l > 0 {
                if let Some(k) = self.index[c][g] {
                    out.push(k as i32 + 1);
                }
                c = table.actions[g][c];
            } else {
                let prev = table.actions[g].iter().position(|&d| d == c).unwrap();
                if let Some(k) = self.index[prev][g] {
                    out.push(-(k as i32 + 1));
                }
                c = prev;
            }
        }
        (Word(out).reduced(), c)
    }
}

/// A subgroup enumerated inside a certified base surface group, with the
/// coset table and Schreier basis for membership and rewriting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ambient {
    pub base: Box<FuchsianSurface>,
    pub table: CosetTable,
    pub basis: SchreierBasis,
    /// Per boundary component of the cover, the base data it lifts.
    pub components: Vec<LiftedBoundary>,
}

/// A cover boundary component with axis `x axis(w)` and element
/// `x w^power x^-1`, for `w` the word of base boundary `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedBoundary {
    pub base: usize,
    pub conjugator: Word,
    pub power: usize,
}

/// The cover of `surface` with fundamental group the stabilizer of coset
/// `0`. Boundary components are the orbits of each base boundary word on
/// cosets; an orbit through `c` of length `r` gives `t_c w^r t_c^-1`.
pub fn subgroup_from_table(
    surface: &FuchsianSurface,
    table: &CosetTable,
    origin: SurfaceOrigin,
) -> Result<FuchsianSurface> {
    if table.actions.len() != surface.generators.len() {
        return Err(Error::Domain(format!(
            "table acts by {} generators, surface has {}",
            table.actions.len(),
            surface.generators.len()
        )));
    }
    let basis = SchreierBasis::new(table);
    let generators: Vec<Isometry> = basis
        .words
        .iter()
        .map(|w| w.evaluate(&surface.generators).renormalized())
        .collect();
    let conjugators = boundary_conjugators(surface, table)?;
    let mut boundary = Vec::new();
    let mut components = Vec::new();
    for (bi, (b, conj)) in surface.boundary.iter().zip(&conjugators).enumerate() {
        let mut seen = vec![false; table.degree];
        for c in 0..table.degree {
            if seen[c] {
                continue;
            }
            let mut r = 0;
            let mut d = c;
            loop {
                seen[d] = true;
                d = table.act(d, &b.word);
                r += 1;
                if d == c {
                    break;
                }
            }
            let x = conj
                .get(&c)
                .cloned()
                .unwrap_or_else(|| table.transversal[c].clone());
            let lifted = x.mul(&b.word.pow(r as i32)).mul(&x.inverse());
            let (word, end) = basis.rewrite(table, 0, &lifted);
            debug_assert_eq!(end, 0);
            boundary.push(BoundaryComponent {
                word,
                length: r as f64 * b.length,
            });
            components.push(LiftedBoundary {
                base: bi,
                conjugator: x,
                power: r,
            });
        }
    }
    let chi = surface.euler_characteristic * table.degree as i64;
    if surface.ambient.is_some() || !surface.certificate.certified {
        // no certified ambient to enumerate in; certify the cover directly
        return Ok(FuchsianSurface::assemble(
            generators,
            boundary,
            surface.basepoint,
            chi,
            origin,
        ));
    }
    // balls of the subgroup are balls of the base group intersected with
    // it, so the base certificate carries over
    let face_pairings = symmetric_generators(&generators);
    Ok(FuchsianSurface {
        generators,
        boundary,
        basepoint: surface.basepoint,
        face_pairings,
        certificate: surface.certificate.clone(),
        euler_characteristic: chi,
        origin,
        ambient: Some(Ambient {
            base: Box::new(surface.clone()),
            table: table.clone(),
            basis,
            components,
        }),
    })
}

/// For each base boundary word `w` and each coset `c`, the element `x` of
/// a small base ball in coset `c` whose lift `x axis(w)` passes closest to
/// the basepoint. Orbit representatives are looked up by their least coset.
fn boundary_conjugators(
    surface: &FuchsianSurface,
    table: &CosetTable,
) -> Result<Vec<BTreeMap<usize, Word>>> {
    let mut out = vec![BTreeMap::new(); surface.boundary.len()];
    if !surface.certificate.certified || surface.ambient.is_some() {
        return Ok(out);
    }
    let o = surface.basepoint;
    let mut frames = Vec::new();
    for i in 0..surface.boundary.len() {
        let (p, q) = surface.boundary_element(i).oriented_axis()?;
        frames.push(Isometry::frame(p, q, None)?.inverse());
    }
    // sheets far from the basepoint fall back to the transversal
    let ball = group_ball(surface, surface.certificate.probe_radius)?;
    for (j, (b, frame)) in surface.boundary.iter().zip(&frames).enumerate() {
        let mut best: BTreeMap<usize, (f64, Word)> = BTreeMap::new();
        for e in &ball {
            let x = &e.element;
            let c = table.act(0, &x.word);
            // least coset of the orbit of c under w
            let mut key = c;
            let mut d = table.act(c, &b.word);
            while d != c {
                key = key.min(d);
                d = table.act(d, &b.word);
            }
            let z = (*frame * x.matrix.inverse()).apply(o);
            let dist = (z.re.abs() / z.im).asinh();
            match best.get(&key) {
                Some((bd, _)) if *bd <= dist => {}
                _ => {
                    best.insert(key, (dist, x.word.clone()));
                }
            }
        }
        out[j] = best.into_iter().map(|(k, (_, w))| (k, w)).collect();
    }
    Ok(out)
}

/// Kernel of the homomorphism sending generator `g` to `images[g]` mod
/// `modulus`, as a surface.
pub fn subgroup_from_cyclic_hom(
    surface: &FuchsianSurface,
    images: &[u64],
    modulus: u64,
) -> Result<FuchsianSurface> {
    if images.len() != surface.generators.len() {
        return Err(Error::Domain(format!(
            "{} images for {} generators",
            images.len(),
            surface.generators.len()
        )));
    }
    let table = CosetTable::cyclic(images, modulus)?;
    if modulus == 1 {
        return Ok(surface.clone());
    }
    let origin = SurfaceOrigin::Cover {
        base: Box::new(surface.origin.clone()),
        images: images.to_vec(),
        modulus,
    };
    subgroup_from_table(surface, &table, origin)
}

/// `arccosh(3/2)`, the systole of the base torus for `n = 1`.
pub fn special_alpha_length(n: u32) -> f64 {
    1.5f64.acosh() / n as f64
}

/// One-holed torus with `l_alpha = arccosh(3/2) / n`, twist `0` and
/// boundary length `l_gamma`.
#[allow(non_snake_case)]
pub fn build_special_X(n: u32, l_gamma: f64) -> Result<FuchsianSurface> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    build_one_holed_torus(special_alpha_length(n), 0.0, l_gamma)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyclicCoverSpec {
    pub k: u32,
    pub m: u32,
}

/// The degree `2^k` cover for `A ↦ 2^m`, `B ↦ 1` mod `2^k`.
pub fn cover_family(k: u32, m: u32, base: &FuchsianSurface) -> Result<FuchsianSurface> {
    if m > k {
        return Err(Error::Domain(format!("m = {m} exceeds k = {k}")));
    }
    if k > 20 {
        return Err(Error::Domain(format!("k = {k} is too large")));
    }
    match base.spec() {
        Some(s) if s.kind == SurfaceKind::OneHoledTorus => {}
        _ => {
            return Err(Error::Domain(
                "cover family needs a one-holed torus base".into(),
            ))
        }
    }
    let modulus = 1u64 << k;
    subgroup_from_cyclic_hom(base, &[(1u64 << m) % modulus, 1], modulus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_table_transversal_is_shortlex() {
        let t = CosetTable::cyclic(&[0, 1], 3).unwrap();
        assert_eq!(t.transversal[0], Word::empty());
        assert_eq!(t.transversal[1], Word(vec![2]));
        assert_eq!(t.transversal[2], Word(vec![-2]));
    }

    #[test]
    fn non_surjective_hom_is_rejected() {
        assert!(matches!(
            CosetTable::cyclic(&[2, 4], 8),
            Err(Error::DisconnectedCover {
                image_order: 4,
                modulus: 8
            })
        ));
    }

    #[test]
    fn schreier_rank_matches_index_formula() {
        // rank of an index-d subgroup of F_2 is d + 1
        for (im, n) in [(vec![1u64, 0], 2u64), (vec![2, 1], 4), (vec![1, 1], 8)] {
            let t = CosetTable::cyclic(&im, n).unwrap();
            assert_eq!(SchreierBasis::new(&t).words.len(), n as usize + 1);
        }
    }

    #[test]
    fn rewriting_inverts_substitution() {
        let t = CosetTable::cyclic(&[2, 1], 4).unwrap();
        let b = SchreierBasis::new(&t);
        let w = Word(vec![1, 2, 2, -1, -2, -2, 1, 1]);
        assert_eq!(t.act(0, &w), 0);
        let (r, end) = b.rewrite(&t, 0, &w);
        assert_eq!(end, 0);
        assert_eq!(r.substitute(&b.words), w);
    }
}
