//! Byzantine client behaviors, applied by the simulator to the vector a
//! client would honestly transmit.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use crate::candidates::ClientId;
use crate::error::{check_dim, Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub enum AttackKind {
    /// Transmit the negated honest vector.
    SignFlip,
    /// Send nothing.
    Omit,
    /// Transmit a configured vector regardless of the honest one.
    FixedVector(Vec<f64>),
    /// Add `sigma` times standard normal noise to every coordinate.
    GaussianNoise { sigma: f64 },
    /// Add `magnitude` times the unit vector along `direction`.
    Shift { direction: Vec<f64>, magnitude: f64 },
}

impl AttackKind {
    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::SignFlip => "sign_flip",
            AttackKind::Omit => "omit",
            AttackKind::FixedVector(_) => "fixed_vector",
            AttackKind::GaussianNoise { .. } => "gaussian_noise",
            AttackKind::Shift { .. } => "shift",
        }
    }
}

/// Parameter-free kind names; parameterized kinds are built directly.
impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sign_flip" => Ok(AttackKind::SignFlip),
            "omit" => Ok(AttackKind::Omit),
            "fixed_vector" | "gaussian_noise" | "shift" => Err(Error::InvalidParameter(format!(
                "attack kind `{s}` needs parameters"
            ))),
            other => Err(Error::UnknownAttack(other.to_string())),
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Number of attacked clients.
    pub f: usize,
}

impl AttackSpec {
    pub fn none() -> Self {
        Self {
            kind: AttackKind::SignFlip,
            f: 0,
        }
    }

    pub fn validate(&self, t: usize) -> Result<()> {
        if self.f > t {
            return Err(Error::InvalidParameter(format!(
                "attack targets f={} clients but the fault bound is t={t}",
                self.f
            )));
        }
        match &self.kind {
            AttackKind::GaussianNoise { sigma } if !(*sigma >= 0.0 && sigma.is_finite()) => Err(
                Error::InvalidParameter(format!("gaussian_noise sigma must be >= 0, got {sigma}")),
            ),
            AttackKind::Shift {
                direction,
                magnitude,
            } => {
                if !magnitude.is_finite() {
                    return Err(Error::InvalidParameter(
                        "shift magnitude must be finite".into(),
                    ));
                }
                if direction.iter().all(|x| *x == 0.0) {
                    return Err(Error::InvalidParameter(
                        "shift direction must be nonzero".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// What an attacked client transmits in place of `honest`; `None` means no
/// message. `seed` should come from [`seed::derive`] with the client and
/// round so that noise is reproducible.
pub fn apply_attack(kind: &AttackKind, honest: &[f64], seed: u64) -> Result<Option<Vec<f64>>> {
    Ok(match kind {
        AttackKind::SignFlip => Some(honest.iter().map(|x| -x).collect()),
        AttackKind::Omit => None,
        AttackKind::FixedVector(v) => {
            check_dim(honest.len(), v.len())?;
            Some(v.clone())
        }
        AttackKind::GaussianNoise { sigma } => {
            let mut rng = seed::rng(seed);
            Some(
                honest
                    .iter()
                    .map(|x| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        x + sigma * z
                    })
                    .collect(),
            )
        }
        AttackKind::Shift {
            direction,
            magnitude,
        } => {
            check_dim(honest.len(), direction.len())?;
            let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidParameter(
                    "shift direction must be nonzero".into(),
                ));
            }
            Some(
                honest
                    .iter()
                    .zip(direction)
                    .map(|(x, u)| x + magnitude * u / norm)
                    .collect(),
            )
        }
    })
}

/// Deterministic pseudo-random set of `f` attacked clients out of `n`.
pub fn select_attacked(n: usize, f: usize, run_seed: u64) -> Result<BTreeSet<ClientId>> {
    if f > n {
        return Err(Error::InvalidParameter(format!(
            "cannot attack f={f} of n={n} clients"
        )));
    }
    let mut rng = seed::rng(seed::derive(run_seed, seed::TAG_SELECT, 0, 0));
    Ok(index::sample(&mut rng, n, f).into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_flip() {
        let out = apply_attack(&AttackKind::SignFlip, &[0.5, -2.0], 0)
            .unwrap()
            .unwrap();
        assert_eq!(out, vec![-0.5, 2.0]);
        let back = apply_attack(&AttackKind::SignFlip, &out, 0)
            .unwrap()
            .unwrap();
        assert_eq!(back, vec![0.5, -2.0]);
    }

    #[test]
    fn omit_sends_nothing() {
        assert_eq!(
            apply_attack(&AttackKind::Omit, &[1.0, 2.0], 3).unwrap(),
            None
        );
    }

    #[test]
    fn fixed_and_shift() {
        let fixed = AttackKind::FixedVector(vec![9.0, 9.0]);
        assert_eq!(
            apply_attack(&fixed, &[1.0, 2.0], 0).unwrap(),
            Some(vec![9.0, 9.0])
        );
        assert!(apply_attack(&fixed, &[1.0], 0).is_err());

        let shift = AttackKind::Shift {
            direction: vec![3.0, 4.0],
            magnitude: 10.0,
        };
        assert_eq!(
            apply_attack(&shift, &[0.0, 0.0], 0).unwrap(),
            Some(vec![6.0, 8.0])
        );
    }

    #[test]
    fn gaussian_noise_is_seeded() {
        let kind = AttackKind::GaussianNoise { sigma: 0.5 };
        let a = apply_attack(&kind, &[0.0; 8], 11).unwrap().unwrap();
        let b = apply_attack(&kind, &[0.0; 8], 11).unwrap().unwrap();
        let c = apply_attack(&kind, &[0.0; 8], 12).unwrap().unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let zero = AttackKind::GaussianNoise { sigma: 0.0 };
        assert_eq!(
            apply_attack(&zero, &[1.0, 2.0], 5).unwrap(),
            Some(vec![1.0, 2.0])
        );
    }

    #[test]
    fn parse_kinds() {
        assert_eq!(
            "sign_flip".parse::<AttackKind>().unwrap(),
            AttackKind::SignFlip
        );
        assert_eq!("omit".parse::<AttackKind>().unwrap(), AttackKind::Omit);
        assert!(matches!(
            "label_flip".parse::<AttackKind>(),
            Err(Error::UnknownAttack(_))
        ));
    }

    #[test]
    fn selection() {
        assert!(select_attacked(10, 0, 1).unwrap().is_empty());
        assert_eq!(select_attacked(10, 10, 1).unwrap().len(), 10);
        let a = select_attacked(10, 3, 42).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a, select_attacked(10, 3, 42).unwrap());
        assert!(a.iter().all(|&i| i < 10));
        assert!(select_attacked(3, 4, 1).is_err());
    }

    #[test]
    fn spec_validation() {
        let spec = AttackSpec {
            kind: AttackKind::SignFlip,
            f: 4,
        };
        assert!(spec.validate(3).is_err());
        assert!(spec.validate(4).is_ok());
        let spec = AttackSpec {
            kind: AttackKind::GaussianNoise { sigma: -1.0 },
            f: 1,
        };
        assert!(spec.validate(3).is_err());
    }
}
