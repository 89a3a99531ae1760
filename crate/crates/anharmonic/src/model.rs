//! The quartic potential family V(x) = m² x² + g x⁴.
//!
//! `m2` is kept as the fundamental parameter (never m itself), so the
//! double-well regime m² < 0 needs no special handling anywhere downstream.

use serde::Serialize;

use crate::error::{Error, Result};

/// A member of the family V(x) = m² x² + g x⁴.
///
/// Invariants enforced at construction: `g >= 0`, and `g == 0` requires
/// `m2 > 0` so the spectrum stays bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSpec {
    m2: f64,
    g: f64,
}

impl PotentialSpec {
    pub fn new(m2: f64, g: f64) -> Result<Self> {
        if !m2.is_finite() || !g.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "non-finite parameters m2 = {m2}, g = {g}"
            )));
        }
        if g < 0.0 {
            return Err(Error::InvalidPotential(format!(
                "g = {g} < 0 gives an unbounded spectrum"
            )));
        }
        if g == 0.0 && m2 <= 0.0 {
            return Err(Error::InvalidPotential(format!(
                "g = 0 requires m2 > 0 for a bound ground state (got m2 = {m2})"
            )));
        }
        Ok(Self { m2, g })
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// V(x) = m² x² + g x⁴. Even in x by construction.
    pub fn eval(&self, x: f64) -> f64 {
        let x2 = x * x;
        (self.m2 + self.g * x2) * x2
    }

    /// Global minimum of V: −m⁴/(4g) for a double well, 0 otherwise.
    pub fn v_min(&self) -> f64 {
        if self.m2 < 0.0 && self.g > 0.0 {
            -self.m2 * self.m2 / (4.0 * self.g)
        } else {
            0.0
        }
    }

    /// Position of the right-hand well (0 for a single well).
    pub fn well_position(&self) -> f64 {
        if self.m2 < 0.0 && self.g > 0.0 {
            (-self.m2 / (2.0 * self.g)).sqrt()
        } else {
            0.0
        }
    }

    /// Scale out the quartic coupling.
    ///
    /// Returns `(reduced, energy_factor, length_factor)` such that
    /// `E(self) = energy_factor * E(reduced)` and
    /// `psi(x; self) = psi(x * length_factor; reduced)`, with
    /// `reduced = (m2 / g^(2/3), 1)`, `energy_factor = g^(1/3)`,
    /// `length_factor = g^(1/6)`.
    pub fn symanzik_reduce(&self) -> Result<(PotentialSpec, f64, f64)> {
        if self.g == 0.0 {
            return Err(Error::InvalidPotential(
                "scaling reduction is undefined at g = 0".into(),
            ));
        }
        let energy_factor = self.g.cbrt();
        let length_factor = self.g.powf(1.0 / 6.0);
        let reduced = PotentialSpec::new(self.m2 / (energy_factor * energy_factor), 1.0)?;
        Ok((reduced, energy_factor, length_factor))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn eval_simple_values() {
        let v = PotentialSpec::new(1.0, 2.0).unwrap();
        assert_eq!(v.eval(1.0), 3.0);
        let w = PotentialSpec::new(-1.0, 2.0).unwrap();
        assert_eq!(w.eval(0.0), 0.0);
        let u = PotentialSpec::new(0.0, 1.0).unwrap();
        assert_eq!(u.eval(2.0), 16.0);
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(PotentialSpec::new(1.0, -0.5).is_err());
        assert!(PotentialSpec::new(-1.0, 0.0).is_err());
        assert!(PotentialSpec::new(0.0, 0.0).is_err());
        assert!(PotentialSpec::new(f64::NAN, 1.0).is_err());
        assert!(PotentialSpec::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn symanzik_identity_case() {
        let (red, ef, lf) = PotentialSpec::new(0.0, 1.0)
            .unwrap()
            .symanzik_reduce()
            .unwrap();
        assert_eq!(red, PotentialSpec::new(0.0, 1.0).unwrap());
        assert_eq!(ef, 1.0);
        assert_eq!(lf, 1.0);
    }

    #[test]
    fn symanzik_algebra() {
        let (red, ef, lf) = PotentialSpec::new(1.0, 8.0)
            .unwrap()
            .symanzik_reduce()
            .unwrap();
        assert_relative_eq!(red.m2(), 0.25, max_relative = 1e-15);
        assert_eq!(red.g(), 1.0);
        assert_relative_eq!(ef, 2.0, max_relative = 1e-15);
        assert_relative_eq!(lf, 8f64.powf(1.0 / 6.0), max_relative = 1e-15);
    }

    #[test]
    fn symanzik_rejects_g_zero() {
        assert!(PotentialSpec::new(1.0, 0.0)
            .unwrap()
            .symanzik_reduce()
            .is_err());
    }

    #[test]
    fn double_well_geometry() {
        let v = PotentialSpec::new(-4.0, 2.0).unwrap();
        assert_relative_eq!(v.v_min(), -2.0, max_relative = 1e-15);
        assert_relative_eq!(v.well_position(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(v.eval(v.well_position()), v.v_min(), max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn potential_is_even(m2 in -10.0f64..10.0, g in 0.01f64..10.0, x in -30.0f64..30.0) {
            let v = PotentialSpec::new(m2, g).unwrap();
            prop_assert_eq!(v.eval(x), v.eval(-x));
        }
    }
}
