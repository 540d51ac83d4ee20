use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// The integer cube `U_n = [-n, n]^d`, stored row-major with the first
/// coordinate varying slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeCube {
    pub d: usize,
    pub n: usize,
}

impl LatticeCube {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::Parameter(format!(
                "lattice dimension must be 1..={MAX_DIM}, got {d}"
            )));
        }
        Ok(Self { d, n })
    }

    /// Edge length `2n + 1`.
    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    /// `|U_n| = (2n + 1)^d`.
    pub fn len(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, coords: &[i64]) -> bool {
        coords.len() == self.d && coords.iter().all(|c| c.unsigned_abs() as usize <= self.n)
    }

    /// Row-major offset of a site, or `None` outside the cube.
    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        if !self.contains(coords) {
            return None;
        }
        let side = self.side();
        Some(
            coords
                .iter()
                .fold(0, |acc, &c| acc * side + (c + self.n as i64) as usize),
        )
    }

    /// Coordinates of the site at a row-major offset.
    pub fn coords_of(&self, mut index: usize) -> Vec<i64> {
        let side = self.side();
        let mut out = vec![0i64; self.d];
        for slot in out.iter_mut().rev() {
            *slot = (index % side) as i64 - self.n as i64;
            index /= side;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinality_and_indexing() {
        let cube = LatticeCube::new(2, 3).unwrap();
        assert_eq!(cube.len(), 49);
        for i in 0..cube.len() {
            let c = cube.coords_of(i);
            assert_eq!(cube.index_of(&c), Some(i));
        }
        assert_eq!(cube.coords_of(0), vec![-3, -3]);
        assert_eq!(cube.coords_of(1), vec![-3, -2]);
        assert_eq!(cube.index_of(&[4, 0]), None);
        assert_eq!(LatticeCube::new(3, 0).unwrap().len(), 1);
        assert!(LatticeCube::new(4, 1).is_err());
        assert!(LatticeCube::new(0, 1).is_err());
    }
}
