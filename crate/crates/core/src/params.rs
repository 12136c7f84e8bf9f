use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Parameters of the profile problem `Q(0) = rho0, Q'(0) = 0` with rate `a`
/// in spatial dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub rho0: f64,
    pub dim: f64,
}

impl Params {
    pub fn new(a: f64, rho0: f64, dim: f64) -> Result<Self> {
        make_params(a, rho0, dim)
    }

    /// Shorthand for the three-dimensional problem.
    pub fn dim3(a: f64, rho0: f64) -> Result<Self> {
        make_params(a, rho0, 3.0)
    }

    /// True when the N = 3 only checks (audit, Hamiltonian, shooting) apply.
    pub fn is_dim3(&self) -> bool {
        self.dim == 3.0
    }
}

/// Validates and builds [`Params`].
pub fn make_params(a: f64, rho0: f64, dim: f64) -> Result<Params> {
    if !a.is_finite() {
        return Err(invalid("a", "must be finite"));
    }
    if a <= 0.0 {
        return Err(invalid("a", "must be positive"));
    }
    if !rho0.is_finite() {
        return Err(invalid("rho0", "must be finite"));
    }
    if rho0 <= 0.0 {
        return Err(invalid("rho0", "must be positive"));
    }
    if !dim.is_finite() || dim <= 2.0 || dim >= 4.0 {
        return Err(invalid("dim", "must lie in the open interval (2, 4)"));
    }
    Ok(Params { a, rho0, dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn accepts_reference_root_values() {
        let p = make_params(0.918, 1.885, 3.0).unwrap();
        assert_eq!(p.a, 0.918);
        assert_eq!(p.rho0, 1.885);
        assert_eq!(p.dim, 3.0);
        assert!(p.is_dim3());
    }

    #[test]
    fn accepts_unit_pair() {
        assert_eq!(
            make_params(1.0, 1.0, 3.0).unwrap(),
            Params {
                a: 1.0,
                rho0: 1.0,
                dim: 3.0
            }
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let err = make_params(-1.0, 1.0, 3.0).unwrap_err();
        assert_eq!(err.to_string(), "a must be positive");
        assert!(matches!(
            make_params(1.0, 0.0, 3.0),
            Err(Error::InvalidParameter { name: "rho0", .. })
        ));
        assert!(make_params(1.0, 1.0, 2.0).is_err());
        assert!(make_params(1.0, 1.0, 4.0).is_err());
        assert!(make_params(f64::NAN, 1.0, 3.0).is_err());
        assert!(make_params(1.0, f64::INFINITY, 3.0).is_err());
        assert!(make_params(1.0, 1.0, 2.5).is_ok());
    }
}
