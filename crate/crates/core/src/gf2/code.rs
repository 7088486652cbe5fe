use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// Dimension cap for exhaustive minimum-distance computation.
const MAX_ENUM_DIM: usize = 24;

/// A binary linear `[n, k]` code with a table-driven syndrome decoder.
#[derive(Debug, Clone)]
pub struct LinearCode {
    n: usize,
    k: usize,
    generator: BitMatrix,
    parity_check: BitMatrix,
    t: usize,
    table: HashMap<BitVector, BitVector>,
}

impl LinearCode {
    /// Builds a code from a full-rank generator, deriving a parity-check matrix.
    pub fn from_generator(generator: BitMatrix) -> Result<Self> {
        let parity_check = derive_parity_check(&generator)?;
        Self::new(generator, parity_check)
    }

    /// Builds a code from an explicit generator / parity-check pair and checks
    /// `H · Gᵀ = 0` and the rank conditions.
    pub fn new(generator: BitMatrix, parity_check: BitMatrix) -> Result<Self> {
        let n = generator.ncols();
        let k = generator.nrows();
        if generator.rank() != k {
            return Err(Error::InvalidCode(format!(
                "generator has rank {} but {k} rows",
                generator.rank()
            )));
        }
        if parity_check.nrows() > 0 && parity_check.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: parity_check.ncols(),
            });
        }
        let parity_check = if parity_check.nrows() == 0 {
            BitMatrix::zeros(0, n)
        } else {
            parity_check
        };
        if parity_check.rank() != n - k {
            return Err(Error::InvalidCode(format!(
                "parity check has rank {} but n - k = {}",
                parity_check.rank(),
                n - k
            )));
        }
        if k > 0 && !parity_check.mul_transpose(&generator)?.is_zero() {
            return Err(Error::InvalidCode("H · Gᵀ ≠ 0".into()));
        }
        let t = match min_distance(&generator)? {
            Some(d) => (d - 1) / 2,
            None => n,
        };
        let table = syndrome_table(&parity_check, n, t)?;
        Ok(Self {
            n,
            k,
            generator,
            parity_check,
            t,
            table,
        })
    }

    /// The `[7, 4, 3]` Hamming code; column `i` of its check matrix is `i + 1` in binary.
    pub fn hamming_7_4() -> Self {
        let g = BitMatrix::from_strs(&["1110000", "1001100", "0101010", "1101001"])
            .expect("static matrix");
        let h = BitMatrix::from_strs(&["0001111", "0110011", "1010101"]).expect("static matrix");
        Self::new(g, h).expect("Hamming code is valid")
    }

    /// The `[7, 3, 4]` simplex code, dual of [`LinearCode::hamming_7_4`].
    pub fn simplex_7_3() -> Self {
        let ham = Self::hamming_7_4();
        Self::new(ham.parity_check.clone(), ham.generator.clone()).expect("dual is valid")
    }

    /// The whole space `F_2^n`.
    pub fn full_space(n: usize) -> Self {
        Self::new(BitMatrix::identity(n), BitMatrix::zeros(0, n)).expect("identity is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of errors the table decoder is guaranteed to correct.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity_check
    }

    pub fn syndrome(&self, word: &BitVector) -> Result<BitVector> {
        self.parity_check.mul_vec(word)
    }

    pub fn contains(&self, word: &BitVector) -> Result<bool> {
        Ok(self.syndrome(word)?.is_zero())
    }

    /// Encodes a `k`-bit message as `m · G`.
    pub fn encode(&self, message: &BitVector) -> Result<BitVector> {
        self.generator.combine_rows(message)
    }

    /// All `2^k` codewords in message order. Only sensible for small `k`.
    pub fn codewords(&self) -> Vec<BitVector> {
        assert!(self.k <= MAX_ENUM_DIM, "refusing to enumerate 2^{}", self.k);
        (0..1u64 << self.k)
            .map(|m| {
                let msg: BitVector = (0..self.k).map(|i| (m >> i) & 1 == 1).collect();
                self.encode(&msg).expect("message has k bits")
            })
            .collect()
    }

    /// Nearest-codeword decoding through the syndrome table.
    ///
    /// Returns the codeword at distance `≤ t` when the syndrome belongs to a
    /// correctable error; otherwise reports [`Error::Undecodable`].
    pub fn syndrome_decode(&self, word: &BitVector) -> Result<BitVector> {
        let s = self.syndrome(word)?;
        match self.table.get(&s) {
            Some(e) => word.xor(e),
            None => Err(Error::Undecodable {
                syndrome: s.to_string(),
            }),
        }
    }

    /// Plain-text form: `n k`, the generator rows, then `H` and the check rows.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.k);
        for r in self.generator.rows() {
            let _ = writeln!(out, "{r}");
        }
        out.push_str("H\n");
        for r in self.parity_check.rows() {
            let _ = writeln!(out, "{r}");
        }
        out
    }

    /// Parses the plain-text code format. Blank lines and `#` comments are skipped.
    /// The `H` block is optional; when absent the check matrix is derived.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "empty code file".into(),
        })?;
        let dims = header
            .split_whitespace()
            .map(str::parse::<usize>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: hline,
                msg: e.to_string(),
            })?;
        let [n, k] = dims[..] else {
            return Err(Error::Parse {
                line: hline,
                msg: "expected header `n k`".into(),
            });
        };
        if k > n {
            return Err(Error::Parse {
                line: hline,
                msg: format!("k = {k} exceeds n = {n}"),
            });
        }

        let mut parse_row = |what: &str| -> Result<BitVector> {
            let (ln, row) = lines.next().ok_or(Error::Parse {
                line: 0,
                msg: format!("missing {what} row"),
            })?;
            let v: BitVector = row.parse().map_err(|_| Error::Parse {
                line: ln,
                msg: format!("bad {what} row {row:?}"),
            })?;
            if v.len() != n {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("{what} row has {} bits, expected {n}", v.len()),
                });
            }
            Ok(v)
        };
        let g_rows = (0..k)
            .map(|_| parse_row("generator"))
            .collect::<Result<Vec<_>>>()?;
        let generator = BitMatrix::from_rows(g_rows, n)?;

        match lines.next() {
            None => Self::from_generator(generator),
            Some((_, "H")) => {
                let rest: Vec<(usize, &str)> = lines.collect();
                if rest.len() != n - k {
                    return Err(Error::Parse {
                        line: rest.first().map_or(0, |r| r.0),
                        msg: format!("expected {} parity-check rows, got {}", n - k, rest.len()),
                    });
                }
                let h_rows = rest
                    .iter()
                    .map(|(ln, row)| {
                        row.parse::<BitVector>()
                            .ok()
                            .filter(|v| v.len() == n)
                            .ok_or(Error::Parse {
                                line: *ln,
                                msg: format!("bad parity-check row {row:?}"),
                            })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::new(generator, BitMatrix::from_rows(h_rows, n)?)
            }
            Some((ln, other)) => Err(Error::Parse {
                line: ln,
                msg: format!("expected `H` or end of file, found {other:?}"),
            }),
        }
    }
}

fn derive_parity_check(generator: &BitMatrix) -> Result<BitMatrix> {
    let n = generator.ncols();
    let ech = generator.echelon();
    if ech.pivots.len() != generator.nrows() {
        return Err(Error::InvalidCode("generator is not full rank".into()));
    }
    let rows = (0..n)
        .filter(|c| !ech.pivots.contains(c))
        .map(|free| {
            let mut h = BitVector::unit(n, free);
            for (row, &p) in ech.matrix.rows().iter().zip(&ech.pivots) {
                if row.get(free) {
                    h.set(p, true);
                }
            }
            h
        })
        .collect();
    BitMatrix::from_rows(rows, n)
}

/// Minimum nonzero weight over all codewords; `None` for the zero code.
fn min_distance(generator: &BitMatrix) -> Result<Option<usize>> {
    let k = generator.nrows();
    if k == 0 {
        return Ok(None);
    }
    if k > MAX_ENUM_DIM {
        return Err(Error::InvalidCode(format!(
            "dimension {k} too large for exhaustive distance computation"
        )));
    }
    // Gray-code walk: each step flips one generator row in or out.
    let mut word = BitVector::zeros(generator.ncols());
    let mut best = usize::MAX;
    for i in 1..1u64 << k {
        let row = i.trailing_zeros() as usize;
        word.xor_assign(generator.row(row))?;
        best = best.min(word.weight());
    }
    Ok(Some(best))
}

fn syndrome_table(h: &BitMatrix, n: usize, t: usize) -> Result<HashMap<BitVector, BitVector>> {
    let mut table = HashMap::new();
    for w in 0..=t.min(n) {
        for support in combinations(n, w) {
            let mut e = BitVector::zeros(n);
            for i in support {
                e.set(i, true);
            }
            let s = h.mul_vec(&e)?;
            if let Some(prev) = table.insert(s, e.clone()) {
                return Err(Error::InvalidCode(format!(
                    "errors {prev} and {e} share a syndrome"
                )));
            }
        }
    }
    Ok(table)
}

/// All `w`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, w: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..w).collect();
    if w > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..w).rev().find(|&i| cur[i] != i + n - w) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..w {
            cur[j] = cur[j - 1] + 1;
        }
    }
}
