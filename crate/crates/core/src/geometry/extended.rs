//! Double-double matrix products.
//!
//! Group elements deep in a ball have entries near `e^(R/2)` while the
//! quantities read off them (traces, relative frames) can be of order one,
//! so plain `f64` products lose most of their digits to cancellation.
//! Products are accumulated in double-double and rounded at the end.

use std::ops::Mul;
use std::sync::atomic::{AtomicBool, Ordering};

use twofloat::TwoFloat;

use super::Isometry;

static EXTENDED: AtomicBool = AtomicBool::new(true);

/// Switch products between double-double (the default) and plain `f64`.
pub fn set_extended_precision(on: bool) {
    EXTENDED.store(on, Ordering::Relaxed);
}

pub fn extended_precision() -> bool {
    EXTENDED.load(Ordering::Relaxed)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtIsometry {
    pub a: TwoFloat,
    pub b: TwoFloat,
    pub c: TwoFloat,
    pub d: TwoFloat,
}

impl ExtIsometry {
    pub const IDENTITY: ExtIsometry = ExtIsometry {
        a: TwoFloat::from_f64(1.0),
        b: TwoFloat::from_f64(0.0),
        c: TwoFloat::from_f64(0.0),
        d: TwoFloat::from_f64(1.0),
    };

    pub fn inverse(&self) -> Self {
        ExtIsometry {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn to_f64(&self) -> Isometry {
        Isometry {
            a: self.a.hi() + self.a.lo(),
            b: self.b.hi() + self.b.lo(),
            c: self.c.hi() + self.c.lo(),
            d: self.d.hi() + self.d.lo(),
        }
    }

    pub fn trace(&self) -> f64 {
        let t = self.a + self.d;
        t.hi() + t.lo()
    }
}

impl From<Isometry> for ExtIsometry {
    fn from(m: Isometry) -> Self {
        ExtIsometry {
            a: m.a.into(),
            b: m.b.into(),
            c: m.c.into(),
            d: m.d.into(),
        }
    }
}

impl Mul for ExtIsometry {
    type Output = ExtIsometry;
    fn mul(self, r: ExtIsometry) -> ExtIsometry {
        if !extended_precision() {
            return (self.to_f64() * r.to_f64()).renormalized().into();
        }
        ExtIsometry {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }
}
