//! Dense matrices over prime fields F_p.
//!
//! Entries are stored row-major as `u32` values in `[0, p)`. Primes are
//! limited to `p < 2^16` so that a product of two entries always fits in a
//! `u32` and a dot product accumulates safely in a `u64`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::FieldError;
use crate::rng;

/// Largest admissible modulus (exclusive).
pub const PRIME_LIMIT: u32 = 1 << 16;

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u32) -> Result<(), FieldError> {
    if p >= PRIME_LIMIT {
        return Err(FieldError::PrimeTooLarge(p));
    }
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    Ok(())
}

/// Multiplicative inverse of a nonzero `a` modulo `p` via extended Euclid.
pub fn inverse_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    let (mut old_r, mut r) = (a as i64, p as i64);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(p as i64) as u32
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldMatrix {
    prime: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}{:?}", self.prime, self.to_rows())
    }
}

impl FieldMatrix {
    pub fn new(
        prime: u32,
        rows: usize,
        cols: usize,
        entries: Vec<u32>,
    ) -> Result<Self, FieldError> {
        check_prime(prime)?;
        if entries.len() != rows * cols {
            return Err(FieldError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(&value) = entries.iter().find(|&&e| e >= prime) {
            return Err(FieldError::EntryOutOfRange { value, prime });
        }
        Ok(FieldMatrix {
            prime,
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from nested rows. An empty row list gives a 0x0 matrix.
    pub fn from_rows(prime: u32, rows: &[Vec<u32>]) -> Result<Self, FieldError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(FieldError::Shape("ragged rows".into()));
        }
        Self::new(prime, rows.len(), cols, rows.concat())
    }

    pub fn zeros(prime: u32, rows: usize, cols: usize) -> Result<Self, FieldError> {
        Self::new(prime, rows, cols, vec![0; rows * cols])
    }

    pub fn identity(prime: u32, n: usize) -> Result<Self, FieldError> {
        let mut m = Self::zeros(prime, n, n)?;
        for i in 0..n {
            m.entries[i * n + i] = 1 % prime;
        }
        Ok(m)
    }

    /// Entries drawn i.i.d. uniform on `[0, p)` from a ChaCha20 stream keyed
    /// by `seed`, filled in row-major order.
    pub fn sample_uniform(
        prime: u32,
        rows: usize,
        cols: usize,
        seed: u64,
    ) -> Result<Self, FieldError> {
        check_prime(prime)?;
        let mut rng = rng::seeded(seed);
        Ok(Self::sample_with(prime, rows, cols, &mut rng))
    }

    /// Same as [`sample_uniform`](Self::sample_uniform) but drawing from a
    /// caller-owned generator. `prime` must already be validated.
    pub fn sample_with<R: Rng + ?Sized>(prime: u32, rows: usize, cols: usize, rng: &mut R) -> Self {
        let entries = (0..rows * cols).map(|_| rng.gen_range(0..prime)).collect();
        FieldMatrix {
            prime,
            rows,
            cols,
            entries,
        }
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: u32) {
        self.entries[r * self.cols + c] = value % self.prime;
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        if self.cols == 0 {
            return vec![Vec::new(); self.rows];
        }
        self.entries
            .chunks(self.cols)
            .map(<[u32]>::to_vec)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.prime != other.prime {
            return Err(FieldError::PrimeMismatch(self.prime, other.prime));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(FieldError::Shape(format!(
                "add {}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.prime;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| (a + b) % p)
            .collect();
        Ok(FieldMatrix {
            entries,
            ..self.clone()
        })
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(FieldError::Shape(format!(
                "multiply {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.prime as u64;
        let mut entries = vec![0u32; self.rows * other.cols];
        for i in 0..self.rows {
            let row = &self.entries[i * self.cols..(i + 1) * self.cols];
            for j in 0..other.cols {
                let mut acc = 0u64;
                for (k, &a) in row.iter().enumerate() {
                    if a != 0 {
                        acc = (acc + a as u64 * other.entries[k * other.cols + j] as u64) % p;
                    }
                }
                entries[i * other.cols + j] = acc as u32;
            }
        }
        Ok(FieldMatrix {
            prime: self.prime,
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    /// Applies `I_T ⊗ self` to a signal block whose `T` columns are the
    /// per-symbol vectors, without forming the Kronecker product.
    pub fn apply_blockwise(&self, signal: &FieldMatrix) -> Result<FieldMatrix, FieldError> {
        if signal.rows != self.cols {
            return Err(FieldError::Shape(format!(
                "signal vectors have length {}, channel expects {}",
                signal.rows, self.cols
            )));
        }
        self.multiply(signal)
    }

    /// Rank by Gauss–Jordan elimination. The pivot for each column is the
    /// lowest-index row at or below the current pivot row with a nonzero entry.
    pub fn rank(&self) -> usize {
        self.reduced_row_echelon().1
    }

    /// Reduced row echelon form and rank.
    pub fn reduced_row_echelon(&self) -> (FieldMatrix, usize) {
        let mut m = self.clone();
        let p = m.prime as u64;
        let cols = m.cols;
        let mut rank = 0;
        for c in 0..cols {
            if rank == m.rows {
                break;
            }
            let Some(pivot) = (rank..m.rows).find(|&r| m.entries[r * cols + c] != 0) else {
                continue;
            };
            if pivot != rank {
                for k in 0..cols {
                    m.entries.swap(pivot * cols + k, rank * cols + k);
                }
            }
            let inv = inverse_mod(m.entries[rank * cols + c], m.prime) as u64;
            for k in c..cols {
                let e = &mut m.entries[rank * cols + k];
                *e = (*e as u64 * inv % p) as u32;
            }
            for r in 0..m.rows {
                if r == rank {
                    continue;
                }
                let factor = m.entries[r * cols + c] as u64;
                if factor == 0 {
                    continue;
                }
                for k in c..cols {
                    let sub = factor * m.entries[rank * cols + k] as u64 % p;
                    let e = &mut m.entries[r * cols + k];
                    *e = ((*e as u64 + p - sub) % p) as u32;
                }
            }
            rank += 1;
        }
        (m, rank)
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut entries = vec![0; self.entries.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                entries[c * self.rows + r] = self.entries[r * self.cols + c];
            }
        }
        FieldMatrix {
            prime: self.prime,
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// Copies `block` into this matrix with its top-left corner at `(row, col)`.
    pub fn set_block(
        &mut self,
        row: usize,
        col: usize,
        block: &FieldMatrix,
    ) -> Result<(), FieldError> {
        self.same_field(block)?;
        if row + block.rows > self.rows || col + block.cols > self.cols {
            return Err(FieldError::Shape(format!(
                "{}x{} block at ({row},{col}) does not fit a {}x{} matrix",
                block.rows, block.cols, self.rows, self.cols
            )));
        }
        for r in 0..block.rows {
            let dst = (row + r) * self.cols + col;
            self.entries[dst..dst + block.cols]
                .copy_from_slice(&block.entries[r * block.cols..(r + 1) * block.cols]);
        }
        Ok(())
    }

    /// Stacks the columns into a single `(rows*cols) x 1` vector.
    pub fn column_stack(&self) -> FieldMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.entries[r * self.cols + c]);
            }
        }
        FieldMatrix {
            prime: self.prime,
            rows: self.entries.len(),
            cols: 1,
            entries,
        }
    }

    /// Inverse of [`column_stack`](Self::column_stack).
    pub fn from_column_stack(
        stacked: &FieldMatrix,
        rows: usize,
        cols: usize,
    ) -> Result<FieldMatrix, FieldError> {
        if stacked.cols != 1 || stacked.rows != rows * cols {
            return Err(FieldError::Shape(format!(
                "cannot unstack {}x{} into {rows}x{cols}",
                stacked.rows, stacked.cols
            )));
        }
        let mut m = FieldMatrix::zeros(stacked.prime, rows, cols)?;
        for c in 0..cols {
            for r in 0..rows {
                m.entries[r * cols + c] = stacked.entries[c * rows + r];
            }
        }
        Ok(m)
    }
}
