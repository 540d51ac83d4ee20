use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Functional reserve of an organ: a count `L` of FSUs whose loss causes a
/// complication, or the equivalent fraction `kappa` (threshold `kappa n`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reserve {
    Count(u64),
    Fraction(f64),
}

/// An organ of `n` FSUs with individual volumes summing to `volume`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrganSpec {
    n: u64,
    volume: f64,
    fsu_volumes: Vec<f64>,
    uniform: bool,
    reserve: Reserve,
}

const VOLUME_SUM_RTOL: f64 = 1e-9;

fn check_reserve(reserve: Reserve, n: u64) -> Result<()> {
    match reserve {
        Reserve::Count(l) if l > n + 1 => Err(Error::Domain(format!(
            "reserve count {l} outside [0, {}]",
            n + 1
        ))),
        Reserve::Fraction(k) if !(k > 0.0 && k < 1.0) => Err(Error::Domain(format!(
            "reserve fraction must lie in (0, 1), got {k}"
        ))),
        _ => Ok(()),
    }
}

impl OrganSpec {
    /// `n` FSUs of equal volume `volume / n`.
    pub fn uniform(n: u64, volume: f64, reserve: Reserve) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("organ needs at least one FSU".into()));
        }
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::Parameter(format!("volume must be positive, got {volume}")));
        }
        check_reserve(reserve, n)?;
        Ok(Self {
            n,
            volume,
            fsu_volumes: vec![volume / n as f64; n as usize],
            uniform: true,
            reserve,
        })
    }

    /// FSUs with the given volumes; `volume` must equal their sum.
    pub fn with_volumes(volume: f64, fsu_volumes: Vec<f64>, reserve: Reserve) -> Result<Self> {
        let n = fsu_volumes.len() as u64;
        if n == 0 {
            return Err(Error::Parameter("organ needs at least one FSU".into()));
        }
        if let Some(v) = fsu_volumes.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Parameter(format!("FSU volumes must be positive, got {v}")));
        }
        let sum: f64 = fsu_volumes.iter().sum();
        if (sum - volume).abs() > VOLUME_SUM_RTOL * volume.abs() {
            return Err(Error::Parameter(format!(
                "FSU volumes sum to {sum}, organ volume is {volume}"
            )));
        }
        check_reserve(reserve, n)?;
        Ok(Self {
            n,
            volume,
            fsu_volumes,
            uniform: false,
            reserve,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn fsu_volumes(&self) -> &[f64] {
        &self.fsu_volumes
    }

    pub fn reserve(&self) -> Reserve {
        self.reserve
    }

    /// Complication threshold on the killed count: `L`, or `kappa n`.
    pub fn threshold(&self) -> f64 {
        match self.reserve {
            Reserve::Count(l) => l as f64,
            Reserve::Fraction(k) => k * self.n as f64,
        }
    }

    /// Total volume of killed FSUs.
    ///
    /// For equal volumes this is `V S_n / n`, evaluated in that form.
    pub fn damage_volume(&self, killed: &[bool]) -> Result<f64> {
        if killed.len() as u64 != self.n {
            return Err(Error::Shape(format!(
                "expected {} FSU states, got {}",
                self.n,
                killed.len()
            )));
        }
        if self.uniform {
            let s = killed.iter().filter(|&&k| k).count();
            return Ok(self.volume * s as f64 / self.n as f64);
        }
        Ok(killed
            .iter()
            .zip(&self.fsu_volumes)
            .filter(|(k, _)| **k)
            .map(|(_, v)| v)
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn damage_volume_examples() {
        let organ = OrganSpec::uniform(10, 1.0, Reserve::Count(3)).unwrap();
        assert_eq!(organ.damage_volume(&[true; 10]).unwrap(), 1.0);
        assert_eq!(organ.damage_volume(&[false; 10]).unwrap(), 0.0);
        let mut s = [false; 10];
        s[1] = true;
        s[4] = true;
        s[9] = true;
        assert_eq!(organ.damage_volume(&s).unwrap(), 0.3);
        assert!(matches!(organ.damage_volume(&[true; 9]), Err(Error::Shape(_))));
    }

    #[test]
    fn heterogeneous_volumes() {
        let organ = OrganSpec::with_volumes(6.0, vec![1.0, 2.0, 3.0], Reserve::Fraction(0.5)).unwrap();
        assert_eq!(organ.damage_volume(&[true, false, true]).unwrap(), 4.0);
        assert_eq!(organ.damage_volume(&[true; 3]).unwrap(), organ.volume());
        assert_eq!(organ.threshold(), 1.5);
        assert!(OrganSpec::with_volumes(5.0, vec![1.0, 2.0, 3.0], Reserve::Count(1)).is_err());
        assert!(OrganSpec::with_volumes(1.0, vec![1.0, 0.0], Reserve::Count(1)).is_err());
    }

    #[test]
    fn reserve_validation() {
        assert!(OrganSpec::uniform(5, 1.0, Reserve::Count(6)).is_ok());
        assert!(OrganSpec::uniform(5, 1.0, Reserve::Count(7)).is_err());
        assert!(OrganSpec::uniform(5, 1.0, Reserve::Fraction(1.0)).is_err());
        assert!(OrganSpec::uniform(0, 1.0, Reserve::Count(0)).is_err());
    }
}
