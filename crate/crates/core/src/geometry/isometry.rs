use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::geodesic::{Geodesic, IdealPoint};
use crate::error::{Error, Result};

/// Tolerance on `ad - bc = 1` accepted by [`Isometry::new`].
pub const DET_TOL: f64 = 1e-12;
/// Tolerance for identity and parabolic classification.
pub const CLASS_TOL: f64 = 1e-12;

/// Orientation-preserving isometry of the upper half-plane, stored as an
/// `SL(2, R)` matrix. The sign of the lift is kept through products so trace
/// signs of words are meaningful; [`Isometry::normalized`] picks the
/// canonical `PSL(2, R)` representative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IsometryClass {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Checked constructor; the determinant must be 1 within [`DET_TOL`].
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !det.is_finite()
            || (det - 1.0).abs() > DET_TOL * (1.0 + a.abs() * d.abs() + b.abs() * c.abs())
        {
            return Err(Error::BadDeterminant { det });
        }
        Ok(Isometry { a, b, c, d })
    }

    /// Rescales an arbitrary matrix with positive determinant into `SL(2, R)`.
    pub fn from_gl(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::BadDeterminant { det });
        }
        let s = det.sqrt().recip();
        Ok(Isometry {
            a: a * s,
            b: b * s,
            c: c * s,
            d: d * s,
        })
    }

    pub fn diagonal(lambda: f64) -> Self {
        Isometry {
            a: lambda,
            b: 0.0,
            c: 0.0,
            d: lambda.recip(),
        }
    }

    /// Pure translation by `t` along the imaginary axis, towards infinity.
    pub fn axial(t: f64) -> Self {
        Self::diagonal((t / 2.0).exp())
    }

    /// Rotation by angle `theta` about the point `i`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Isometry {
            a: c,
            b: s,
            c: -s,
            d: c,
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Isometry {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn neg(&self) -> Self {
        Isometry {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    /// Re-projects onto `det = 1` to stop drift in long products.
    pub fn renormalized(&self) -> Self {
        let det = self.det();
        if det > 0.0 {
            let s = det.sqrt().recip();
            Isometry {
                a: self.a * s,
                b: self.b * s,
                c: self.c * s,
                d: self.d * s,
            }
        } else {
            *self
        }
    }

    /// Canonical `PSL(2, R)` representative: trace >= 0, ties broken by the
    /// first nonzero entry being positive.
    pub fn normalized(&self) -> Self {
        let flip = if self.trace() != 0.0 {
            self.trace() < 0.0
        } else {
            let first = [self.a, self.b, self.c, self.d]
                .into_iter()
                .find(|x| *x != 0.0)
                .unwrap_or(1.0);
            first < 0.0
        };
        if flip {
            self.neg()
        } else {
            *self
        }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let n = self.normalized();
        (n.a - 1.0).abs() <= tol && n.b.abs() <= tol && n.c.abs() <= tol && (n.d - 1.0).abs() <= tol
    }

    pub fn classify(&self) -> IsometryClass {
        if self.is_identity(CLASS_TOL) {
            return IsometryClass::Identity;
        }
        let t = self.trace().abs();
        if (t - 2.0).abs() <= CLASS_TOL {
            IsometryClass::Parabolic
        } else if t > 2.0 {
            IsometryClass::Hyperbolic
        } else {
            IsometryClass::Elliptic
        }
    }

    fn require_hyperbolic(&self) -> Result<()> {
        match self.classify() {
            IsometryClass::Hyperbolic => Ok(()),
            _ => Err(Error::NotHyperbolic {
                trace: self.trace(),
            }),
        }
    }

    /// `2 arccosh(|tr| / 2)`.
    pub fn translation_length(&self) -> Result<f64> {
        self.require_hyperbolic()?;
        Ok(2.0 * (self.trace().abs() / 2.0).acosh())
    }

    /// Translation length without the classification check; `0` for
    /// non-hyperbolic elements.
    pub fn displacement_length(&self) -> f64 {
        let t = self.trace().abs() / 2.0;
        if t > 1.0 {
            2.0 * t.acosh()
        } else {
            0.0
        }
    }

    /// Fixed points as (repelling, attracting).
    pub fn oriented_axis(&self) -> Result<(IdealPoint, IdealPoint)> {
        self.require_hyperbolic()?;
        // Work with the positive-trace lift so derivative tests are uniform.
        let m = if self.trace() < 0.0 {
            self.neg()
        } else {
            *self
        };
        let disc = (m.trace() * m.trace() - 4.0).sqrt();
        let (p, q) = if m.c == 0.0 {
            // z -> (a z + b) / d: infinity is attracting iff a > d.
            let finite = IdealPoint::Finite(m.b / (m.d - m.a));
            if m.a > m.d {
                (finite, IdealPoint::Infinity)
            } else {
                (IdealPoint::Infinity, finite)
            }
        } else {
            // Roots of c z^2 + (d - a) z - b = 0, computed without cancellation.
            let bq = m.d - m.a;
            let sign = if bq >= 0.0 { 1.0 } else { -1.0 };
            let q = -0.5 * (bq + sign * disc);
            let r1 = q / m.c;
            let r2 = if q != 0.0 { -m.b / q } else { -bq / m.c - r1 };
            // Attracting fixed point has |c z + d| > 1.
            if (m.c * r1 + m.d).abs() > 1.0 {
                (IdealPoint::Finite(r2), IdealPoint::Finite(r1))
            } else {
                (IdealPoint::Finite(r1), IdealPoint::Finite(r2))
            }
        };
        Ok((p, q))
    }

    pub fn axis(&self) -> Result<Geodesic> {
        let (p, q) = self.oriented_axis()?;
        Geodesic::new(p, q)
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    pub fn apply_ideal(&self, p: IdealPoint) -> IdealPoint {
        match p {
            IdealPoint::Infinity => {
                if self.c == 0.0 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite(self.a / self.c)
                }
            }
            IdealPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    pub fn apply_geodesic(&self, g: &Geodesic) -> Geodesic {
        Geodesic::new_unchecked(self.apply_ideal(g.p), self.apply_ideal(g.q))
    }

    /// Isometry translating by signed distance `t` along the oriented axis
    /// of `self` (positive `t` moves in the direction `self` translates).
    pub fn twist_along(&self, t: f64) -> Result<Isometry> {
        let (p, q) = self.oriented_axis()?;
        let frame = Isometry::frame(p, q, None)?;
        Ok(frame * Isometry::axial(t) * frame.inverse())
    }

    /// Frame of an oriented geodesic: the returned `N` sends `0 -> p`,
    /// `inf -> q`, and `i` to the foot of the perpendicular from `through`
    /// (or to an arbitrary axis point when `through` is `None`).
    pub fn frame(p: IdealPoint, q: IdealPoint, through: Option<Complex64>) -> Result<Isometry> {
        let base = match (p, q) {
            (IdealPoint::Infinity, IdealPoint::Infinity) => return Err(Error::CoincidentPoints),
            (IdealPoint::Infinity, IdealPoint::Finite(q)) => Isometry {
                a: q,
                b: -1.0,
                c: 1.0,
                d: 0.0,
            },
            (IdealPoint::Finite(p), IdealPoint::Infinity) => Isometry {
                a: 1.0,
                b: p,
                c: 0.0,
                d: 1.0,
            },
            (IdealPoint::Finite(p), IdealPoint::Finite(q)) => {
                if p == q {
                    return Err(Error::CoincidentPoints);
                }
                if q > p {
                    Isometry::from_gl(q, p, 1.0, 1.0)?
                } else {
                    Isometry::from_gl(-q, p, -1.0, 1.0)?
                }
            }
        };
        match through {
            None => Ok(base),
            Some(o) => {
                let w = base.inverse().apply(o);
                let s = w.norm().ln();
                Ok(base * Isometry::axial(s))
            }
        }
    }

    /// Maximum absolute entry difference to `other`, modulo the sign of the lift.
    pub fn distance_psl(&self, other: &Isometry) -> f64 {
        let d = |x: &Isometry, y: &Isometry| {
            (x.a - y.a)
                .abs()
                .max((x.b - y.b).abs())
                .max((x.c - y.c).abs())
                .max((x.d - y.d).abs())
        };
        d(self, other).min(d(&self.neg(), other))
    }

    /// Hyperbolic distance moved by the point `z`.
    pub fn displacement_of(&self, z: Complex64) -> f64 {
        point_distance(z, self.apply(z))
    }
}

impl Mul for Isometry {
    type Output = Isometry;
    fn mul(self, r: Isometry) -> Isometry {
        Isometry {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Hyperbolic distance between two points of the upper half-plane.
pub fn point_distance(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm_sqr();
    let den = 4.0 * z.im * w.im;
    // d = 2 asinh(|z - w| / (2 sqrt(Im z Im w))), stable for nearby points.
    2.0 * (num / den).sqrt().asinh()
}
