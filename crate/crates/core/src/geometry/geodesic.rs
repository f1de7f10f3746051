use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::isometry::{point_distance, Isometry};
use crate::error::{Error, Result};

/// A point of the circle at infinity of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IdealPoint {
    Finite(f64),
    Infinity,
}

impl IdealPoint {
    pub fn is_infinite(&self) -> bool {
        matches!(self, IdealPoint::Infinity)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            IdealPoint::Finite(x) => Some(*x),
            IdealPoint::Infinity => None,
        }
    }

    /// Equality with relative tolerance on finite values.
    pub fn approx_eq(&self, other: IdealPoint, tol: f64) -> bool {
        match (self, other) {
            (IdealPoint::Infinity, IdealPoint::Infinity) => true,
            (IdealPoint::Finite(x), IdealPoint::Finite(y)) => {
                (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
            }
            _ => false,
        }
    }
}

/// Unoriented complete geodesic, given by its two distinct ideal endpoints.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Geodesic {
    pub p: IdealPoint,
    pub q: IdealPoint,
}

impl PartialEq for Geodesic {
    fn eq(&self, other: &Self) -> bool {
        (self.p == other.p && self.q == other.q) || (self.p == other.q && self.q == other.p)
    }
}

impl Geodesic {
    pub fn new(p: IdealPoint, q: IdealPoint) -> Result<Self> {
        if p == q {
            return Err(Error::CoincidentPoints);
        }
        Ok(Geodesic { p, q })
    }

    pub(crate) fn new_unchecked(p: IdealPoint, q: IdealPoint) -> Self {
        Geodesic { p, q }
    }

    pub fn finite(p: f64, q: f64) -> Result<Self> {
        Self::new(IdealPoint::Finite(p), IdealPoint::Finite(q))
    }

    /// Vertical geodesic over `x`.
    pub fn finite_inf(x: f64) -> Self {
        Geodesic {
            p: IdealPoint::Finite(x),
            q: IdealPoint::Infinity,
        }
    }

    pub fn approx_eq(&self, other: &Geodesic, tol: f64) -> bool {
        (self.p.approx_eq(other.p, tol) && self.q.approx_eq(other.q, tol))
            || (self.p.approx_eq(other.q, tol) && self.q.approx_eq(other.p, tol))
    }

    /// Euclidean center and radius when both endpoints are finite.
    pub fn half_circle(&self) -> Option<(f64, f64)> {
        match (self.p, self.q) {
            (IdealPoint::Finite(p), IdealPoint::Finite(q)) => {
                Some(((p + q) / 2.0, (p - q).abs() / 2.0))
            }
            _ => None,
        }
    }

    pub fn shares_endpoint(&self, other: &Geodesic) -> bool {
        self.p == other.p || self.p == other.q || self.q == other.p || self.q == other.q
    }
}

/// Four pairwise distinct ideal points `(a, b; c, d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdealQuadruple {
    pub a: IdealPoint,
    pub b: IdealPoint,
    pub c: IdealPoint,
    pub d: IdealPoint,
}

impl IdealQuadruple {
    pub fn new(a: IdealPoint, b: IdealPoint, c: IdealPoint, d: IdealPoint) -> Result<Self> {
        let pts = [a, b, c, d];
        for i in 0..4 {
            for j in i + 1..4 {
                if pts[i] == pts[j] {
                    return Err(Error::CoincidentPoints);
                }
            }
        }
        Ok(IdealQuadruple { a, b, c, d })
    }

    pub fn map(&self, g: &Isometry) -> Self {
        IdealQuadruple {
            a: g.apply_ideal(self.a),
            b: g.apply_ideal(self.b),
            c: g.apply_ideal(self.c),
            d: g.apply_ideal(self.d),
        }
    }
}

/// Cross ratio `((a - c)(b - d)) / ((a - d)(b - c))`, with the factors that
/// contain an infinite entry dropped.
pub fn cross_ratio(q: &IdealQuadruple) -> Result<f64> {
    use IdealPoint::*;
    let check = IdealQuadruple::new(q.a, q.b, q.c, q.d)?;
    let v = match (check.a, check.b, check.c, check.d) {
        (Infinity, Finite(b), Finite(c), Finite(d)) => (b - d) / (b - c),
        (Finite(a), Infinity, Finite(c), Finite(d)) => (a - c) / (a - d),
        (Finite(a), Finite(b), Infinity, Finite(d)) => (b - d) / (a - d),
        (Finite(a), Finite(b), Finite(c), Infinity) => (a - c) / (b - c),
        (Finite(a), Finite(b), Finite(c), Finite(d)) => ((a - c) * (b - d)) / ((a - d) * (b - c)),
        _ => return Err(Error::CoincidentPoints),
    };
    Ok(v)
}

// Product of the differences x - y over the given pairs, skipping any pair
// that contains the point at infinity.
fn diff_product(pairs: [(IdealPoint, IdealPoint); 2]) -> f64 {
    pairs
        .iter()
        .map(|(x, y)| match (x, y) {
            (IdealPoint::Finite(x), IdealPoint::Finite(y)) => x - y,
            _ => 1.0,
        })
        .product()
}

/// Length of the common perpendicular of two disjoint geodesics, from the
/// cross ratio of their endpoints: `tanh(d/2)^2 = min(cr, 1/cr)`.
pub fn geodesic_distance(g1: &Geodesic, g2: &Geodesic) -> Result<f64> {
    if g1.shares_endpoint(g2) {
        return Err(Error::AsymptoticGeodesics);
    }
    let q = IdealQuadruple::new(g1.p, g1.q, g2.p, g2.q)?;
    let cr = cross_ratio(&q)?;
    if cr <= 0.0 {
        return Err(Error::IntersectingGeodesics);
    }
    let (a, b, c, d) = (q.a, q.b, q.c, q.d);
    // 1 - cr and 1 - 1/cr in factored form, free of cancellation when the
    // geodesics are far apart
    let (small, gap) = if cr <= 1.0 {
        (
            cr,
            diff_product([(a, b), (d, c)]) / diff_product([(a, d), (b, c)]),
        )
    } else {
        (
            cr.recip(),
            diff_product([(a, b), (c, d)]) / diff_product([(a, c), (b, d)]),
        )
    };
    // dropping the two infinite factors can flip the sign; 1 - s^2 > 0
    // d = 2 atanh(s) = 2 ln(1 + s) - ln(1 - s^2)
    Ok(2.0 * small.sqrt().ln_1p() - gap.abs().ln())
}

/// Common perpendicular of two disjoint geodesics, as its two feet
/// `(on g1, on g2)`, built by normalizing `g1` to the imaginary axis.
pub fn common_perpendicular(g1: &Geodesic, g2: &Geodesic) -> Result<(Complex64, Complex64)> {
    if g1.shares_endpoint(g2) {
        return Err(Error::AsymptoticGeodesics);
    }
    let n = Isometry::frame(g1.p, g1.q, None)?;
    let ni = n.inverse();
    let (u, v) = match (ni.apply_ideal(g2.p), ni.apply_ideal(g2.q)) {
        (IdealPoint::Finite(u), IdealPoint::Finite(v)) => (u, v),
        _ => return Err(Error::AsymptoticGeodesics),
    };
    if u * v <= 0.0 {
        return Err(Error::IntersectingGeodesics);
    }
    // The perpendicular is the circle |z| = sqrt(uv) (up to the sign of u, v).
    let r = (u * v).sqrt();
    let sgn = u.signum();
    let foot1 = Complex64::new(0.0, r);
    let (c, rho) = ((u + v) / 2.0, (u - v).abs() / 2.0);
    // intersection of |z| = r with |z - c| = rho
    let x = (r * r - rho * rho + c * c) / (2.0 * c);
    let y = (r * r - x * x).max(0.0).sqrt();
    let foot2 = Complex64::new(x.abs() * sgn, y);
    Ok((n.apply(foot1), n.apply(foot2)))
}

/// Distance between two geodesics measured as the distance between the feet
/// of their explicitly constructed common perpendicular.
pub fn perpendicular_length(g1: &Geodesic, g2: &Geodesic) -> Result<f64> {
    let (a, b) = common_perpendicular(g1, g2)?;
    Ok(point_distance(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use IdealPoint::*;

    #[test]
    fn cross_ratio_examples() {
        let q = IdealQuadruple::new(Finite(0.0), Finite(1.0), Finite(2.0), Finite(3.0)).unwrap();
        assert_relative_eq!(cross_ratio(&q).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        let q = IdealQuadruple::new(Finite(0.0), Infinity, Finite(1.0), Finite(5.0)).unwrap();
        assert_relative_eq!(cross_ratio(&q).unwrap(), 0.2, epsilon = 1e-15);
        assert_eq!(
            IdealQuadruple::new(Finite(0.0), Finite(1.0), Finite(0.0), Finite(3.0)).unwrap_err(),
            Error::CoincidentPoints
        );
    }

    #[test]
    fn distance_examples() {
        let e = 1f64.exp();
        let g1 = Geodesic::finite(-1.0, 1.0).unwrap();
        let g2 = Geodesic::finite(-e, e).unwrap();
        assert_relative_eq!(geodesic_distance(&g1, &g2).unwrap(), 1.0, epsilon = 1e-14);
        let g3 = Geodesic::finite(-7.5, 7.5).unwrap();
        assert_relative_eq!(
            geodesic_distance(&g1, &g3).unwrap(),
            7.5f64.ln(),
            epsilon = 1e-14
        );
        assert_eq!(
            geodesic_distance(&g1, &Geodesic::finite(1.0, 4.0).unwrap()).unwrap_err(),
            Error::AsymptoticGeodesics
        );
        assert_eq!(
            geodesic_distance(&g1, &Geodesic::finite(0.0, 4.0).unwrap()).unwrap_err(),
            Error::IntersectingGeodesics
        );
    }

    #[test]
    fn perpendicular_oracle_agrees_on_examples() {
        let g1 = Geodesic::finite(0.0, 1.0).unwrap();
        let g2 = Geodesic::finite(2.0, 3.0).unwrap();
        let a = geodesic_distance(&g1, &g2).unwrap();
        let b = perpendicular_length(&g1, &g2).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-12);
        let g3 = Geodesic::finite_inf(-2.0);
        assert_relative_eq!(
            geodesic_distance(&g1, &g3).unwrap(),
            perpendicular_length(&g1, &g3).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn geodesic_equality_is_unordered() {
        assert_eq!(
            Geodesic::finite(1.0, 2.0).unwrap(),
            Geodesic::finite(2.0, 1.0).unwrap()
        );
        assert_eq!(
            Geodesic::finite_inf(1.0),
            Geodesic::new(Infinity, Finite(1.0)).unwrap()
        );
    }
}
