//! Closed-form hyperbolic trigonometry for right-angled pentagons and
//! hexagons, as used for pairs of pants.

use crate::error::{Error, Result};

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

/// Side of a right-angled pentagon opposite two adjacent sides `a`, `b`:
/// `cosh d = sinh a sinh b`.
pub fn pentagon_side(a: f64, b: f64) -> Result<f64> {
    require_positive("a", a)?;
    require_positive("b", b)?;
    let product = a.sinh() * b.sinh();
    if product <= 1.0 {
        return Err(Error::DegeneratePentagon { product });
    }
    Ok(product.acosh())
}

/// Length of the ortho geodesic that winds once around a cuff of length `a`,
/// given the simple ortho geodesic `t` with both feet on the same cuff:
/// `cosh(t'/2) = 2 cosh(a/2) cosh(t/2)`.
pub fn tau_prime_from_tau(a: f64, t: f64) -> Result<f64> {
    require_positive("a", a)?;
    require_positive("t", t)?;
    Ok(2.0 * (2.0 * (a / 2.0).cosh() * (t / 2.0).cosh()).acosh())
}

/// Cuff length recovered from a pair (t, t') as above.
pub fn cuff_from_tau_pair(t: f64, t_prime: f64) -> Result<f64> {
    require_positive("t", t)?;
    let ratio = (t_prime / 2.0).cosh() / (t / 2.0).cosh();
    if ratio <= 2.0 {
        return Err(Error::Domain(format!("cosh ratio {ratio} must exceed 2")));
    }
    Ok(2.0 * (ratio / 2.0).acosh())
}

/// Upper bound `2 asinh(cosh(l_alpha/2) / sinh(l_gamma/4))` for the simple
/// ortho geodesic with both feet on the cuff of length `l_gamma`.
pub fn cord_upper_bound(l_alpha: f64, l_gamma: f64) -> Result<f64> {
    require_positive("l_alpha", l_alpha)?;
    require_positive("l_gamma", l_gamma)?;
    Ok(2.0 * ((l_alpha / 2.0).cosh() / (l_gamma / 4.0).sinh()).asinh())
}

/// Distance between cuffs 1 and 2 of the pair of pants with cuff lengths
/// `(l1, l2, l3)`, from the right-angled hexagon with alternate sides
/// `l1/2, l2/2, l3/2`:
/// `cosh d = (cosh(l3/2) + cosh(l1/2) cosh(l2/2)) / (sinh(l1/2) sinh(l2/2))`.
pub fn pants_boundary_distance(l1: f64, l2: f64, l3: f64) -> Result<f64> {
    require_positive("l1", l1)?;
    require_positive("l2", l2)?;
    require_positive("l3", l3)?;
    let (h1, h2, h3) = (l1 / 2.0, l2 / 2.0, l3 / 2.0);
    Ok(((h3.cosh() + h1.cosh() * h2.cosh()) / (h1.sinh() * h2.sinh())).acosh())
}

/// Length of the simple ortho geodesic with both feet on the cuff of length
/// `l_gamma`, separating the other two cuffs:
/// `cosh(t/2) = sinh(l_alpha/2) sinh(d(alpha, gamma))`.
pub fn simple_ortho_length(l_alpha: f64, l_beta: f64, l_gamma: f64) -> Result<f64> {
    let d = pants_boundary_distance(l_alpha, l_gamma, l_beta)?;
    Ok(2.0 * ((l_alpha / 2.0).sinh() * d.sinh()).acosh())
}

/// Ortho geodesic with both feet on `gamma` winding `n >= 1` times around
/// `alpha`: `cosh(t_n/2) = sinh(n l_alpha/2) sinh(d(alpha, gamma))`.
pub fn winding_ortho_length(n: u32, l_alpha: f64, l_beta: f64, l_gamma: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("winding number must be >= 1".into()));
    }
    let d = pants_boundary_distance(l_alpha, l_gamma, l_beta)?;
    let v = (n as f64 * l_alpha / 2.0).sinh() * d.sinh();
    if v < 1.0 {
        return Err(Error::DegeneratePentagon { product: v });
    }
    Ok(2.0 * v.acosh())
}

/// Cuff length on a one-holed torus from the simple ortho geodesic `t` and
/// the boundary length: `cosh(l_alpha/2) = sinh(t/2) sinh(l_gamma/4)`.
pub fn torus_alpha_from_simple_ortho(t: f64, l_gamma: f64) -> Result<f64> {
    require_positive("t", t)?;
    require_positive("l_gamma", l_gamma)?;
    let v = (t / 2.0).sinh() * (l_gamma / 4.0).sinh();
    if v <= 1.0 {
        return Err(Error::DegeneratePentagon { product: v });
    }
    Ok(2.0 * v.acosh())
}

/// Boundary length of a one-holed torus from `t` and `l_alpha` (inverse of
/// [`torus_alpha_from_simple_ortho`]).
pub fn torus_gamma_from_simple_ortho(t: f64, l_alpha: f64) -> Result<f64> {
    require_positive("t", t)?;
    require_positive("l_alpha", l_alpha)?;
    Ok(4.0 * ((l_alpha / 2.0).cosh() / (t / 2.0).sinh()).asinh())
}

/// Collar half-width around a closed geodesic of length `l`:
/// `sinh(w) sinh(l/2) = 1`.
pub fn collar_width(l: f64) -> Result<f64> {
    require_positive("l", l)?;
    Ok((1.0 / (l / 2.0).sinh()).asinh())
}
