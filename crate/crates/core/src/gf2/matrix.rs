use std::fmt;

use crate::error::{Error, Result};
use crate::gf2::BitVector;

/// Row-major GF(2) matrix, each row stored as a packed [`BitVector`].
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitVector>,
    cols: usize,
}

/// Reduced row echelon form together with the pivot column of each row.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub matrix: BitMatrix,
    pub pivots: Vec<usize>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![BitVector::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(|i| BitVector::unit(n, i)).collect(),
            cols: n,
        }
    }

    pub fn from_rows(rows: Vec<BitVector>, cols: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(Self { rows, cols })
    }

    /// Parses rows written as `0`/`1` strings; all rows must have equal length.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.parse::<BitVector>())
            .collect::<Result<Vec<_>>>()?;
        let cols = parsed.first().map_or(0, BitVector::len);
        Self::from_rows(parsed, cols)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn column(&self, c: usize) -> BitVector {
        self.rows.iter().map(|r| r.get(c)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: (0..self.cols).map(|c| self.column(c)).collect(),
            cols: self.rows.len(),
        }
    }

    /// `M · v` over GF(2).
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        self.rows.iter().map(|r| r.dot(v)).collect()
    }

    /// `M · Nᵀ`, i.e. all pairwise row inner products.
    pub fn mul_transpose(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.cols,
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|a| other.rows.iter().map(|b| a.dot(b)).collect())
            .collect::<Result<Vec<BitVector>>>()?;
        Ok(Self {
            rows,
            cols: other.rows.len(),
        })
    }

    /// Row vector times matrix: the GF(2) combination of rows selected by `coeffs`.
    pub fn combine_rows(&self, coeffs: &BitVector) -> Result<BitVector> {
        if coeffs.len() != self.rows.len() {
            return Err(Error::DimensionMismatch {
                expected: self.rows.len(),
                got: coeffs.len(),
            });
        }
        let mut acc = BitVector::zeros(self.cols);
        for (i, r) in self.rows.iter().enumerate() {
            if coeffs.get(i) {
                acc.xor_assign(r)?;
            }
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVector::is_zero)
    }

    /// Gauss–Jordan elimination; zero rows are dropped.
    pub fn echelon(&self) -> Echelon {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(found) = (rank..rows.len()).find(|&i| rows[i].get(col)) else {
                continue;
            };
            rows.swap(rank, found);
            let pivot_row = rows[rank].clone();
            for (i, r) in rows.iter_mut().enumerate() {
                if i != rank && r.get(col) {
                    r.xor_assign(&pivot_row).expect("rows share a width");
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        Echelon {
            matrix: Self {
                rows,
                cols: self.cols,
            },
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }
}

impl Echelon {
    /// Clears every pivot column of `v` using the echelon rows, returning the
    /// canonical remainder of `v` modulo the row space.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut out = v.clone();
        for (row, &p) in self.matrix.rows().iter().zip(&self.pivots) {
            if out.get(p) {
                out.xor_assign(row).expect("width checked by caller");
            }
        }
        out
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming_h() -> BitMatrix {
        BitMatrix::from_strs(&["0001111", "0110011", "1010101"]).unwrap()
    }

    #[test]
    fn identity_times_vector() {
        let v: BitVector = "101".parse().unwrap();
        assert_eq!(BitMatrix::identity(3).mul_vec(&v).unwrap(), v);
    }

    #[test]
    fn zero_matrix_kills_everything() {
        let v: BitVector = "110101".parse().unwrap();
        assert!(BitMatrix::zeros(4, 6).mul_vec(&v).unwrap().is_zero());
    }

    #[test]
    fn hamming_check_of_unit_error_is_column() {
        // Column i of this H is the binary expansion of i + 1.
        let h = hamming_h();
        for i in 0..7 {
            let s = h.mul_vec(&BitVector::unit(7, i)).unwrap();
            let expected: BitVector = (0..3).map(|b| ((i + 1) >> (2 - b)) & 1 == 1).collect();
            assert_eq!(s, expected, "position {i}");
            assert_eq!(s, h.column(i));
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let v = BitVector::zeros(5);
        assert!(matches!(
            hamming_h().mul_vec(&v),
            Err(Error::DimensionMismatch {
                expected: 7,
                got: 5
            })
        ));
    }

    #[test]
    fn rank_and_reduction() {
        let m = BitMatrix::from_strs(&["1100", "0110", "1010"]).unwrap();
        let e = m.echelon();
        assert_eq!(e.pivots, vec![0, 1]);
        assert!(e.contains(&"1010".parse().unwrap()));
        assert!(!e.contains(&"0011".parse().unwrap()));
        assert!(!e.contains(&"0001".parse().unwrap()));
        assert_eq!(hamming_h().rank(), 3);
    }
}
