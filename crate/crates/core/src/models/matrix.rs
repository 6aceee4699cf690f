//! Operator matrices expressed in the energy eigenbasis.
//!
//! Grid models produce dense matrices; the harmonic oscillator only couples
//! neighbouring levels and is stored row-sparse so that thousands of levels
//! stay cheap.

/// A real matrix indexed by energy levels.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelMatrix {
    /// Row-major `dim x dim` storage.
    Dense { dim: usize, data: Vec<f64> },
    /// Nonzero entries of each row, sorted by column.
    Sparse { rows: Vec<Vec<(usize, f64)>> },
}

impl LevelMatrix {
    pub fn dense(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim, "dense storage must be dim*dim");
        LevelMatrix::Dense { dim, data }
    }

    /// Builds a sparse matrix from `(row, col, value)` triples. Duplicate
    /// positions are summed.
    pub fn sparse_from_triples(dim: usize, triples: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (r, c, v) in triples {
            assert!(r < dim && c < dim, "index out of range");
            rows[r].push((c, v));
        }
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            row.dedup_by(|next, kept| {
                if next.0 == kept.0 {
                    kept.1 += next.1;
                    true
                } else {
                    false
                }
            });
        }
        LevelMatrix::Sparse { rows }
    }

    pub fn dim(&self) -> usize {
        match self {
            LevelMatrix::Dense { dim, .. } => *dim,
            LevelMatrix::Sparse { rows } => rows.len(),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        match self {
            LevelMatrix::Dense { dim, data } => data[row * dim + col],
            LevelMatrix::Sparse { rows } => rows[row]
                .binary_search_by_key(&col, |&(c, _)| c)
                .map(|i| rows[row][i].1)
                .unwrap_or(0.0),
        }
    }

    /// Iterates `(col, value)` over the stored entries of `row`, skipping
    /// exact zeros.
    pub fn row(&self, row: usize) -> RowIter<'_> {
        match self {
            LevelMatrix::Dense { dim, data } => RowIter::Dense {
                values: data[row * dim..(row + 1) * dim].iter().enumerate(),
            },
            LevelMatrix::Sparse { rows } => RowIter::Sparse {
                entries: rows[row].iter(),
            },
        }
    }

    /// Largest `|A_nm - A_mn|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn all_finite(&self) -> bool {
        match self {
            LevelMatrix::Dense { data, .. } => data.iter().all(|v| v.is_finite()),
            LevelMatrix::Sparse { rows } => rows.iter().flatten().all(|(_, v)| v.is_finite()),
        }
    }

    /// Applies `f(row, col, value)` to every stored entry, keeping the layout.
    pub fn map_entries(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        match self {
            LevelMatrix::Dense { dim, data } => {
                let dim = *dim;
                let data = data
                    .iter()
                    .enumerate()
                    .map(|(idx, &v)| f(idx / dim, idx % dim, v))
                    .collect();
                LevelMatrix::Dense { dim, data }
            }
            LevelMatrix::Sparse { rows } => LevelMatrix::Sparse {
                rows: rows
                    .iter()
                    .enumerate()
                    .map(|(r, row)| row.iter().map(|&(c, v)| (c, f(r, c, v))).collect())
                    .collect(),
            },
        }
    }
}

pub enum RowIter<'a> {
    Dense {
        values: std::iter::Enumerate<std::slice::Iter<'a, f64>>,
    },
    Sparse {
        entries: std::slice::Iter<'a, (usize, f64)>,
    },
}

impl Iterator for RowIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            RowIter::Dense { values } => values.find(|(_, v)| **v != 0.0).map(|(c, v)| (c, *v)),
            RowIter::Sparse { entries } => entries.find(|(_, v)| *v != 0.0).copied(),
        }
    }
}

/// Momentum operator in the energy eigenbasis, `p_nm = -i a_nm` with `a` real
/// and antisymmetric, so `p` is Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumMatrix {
    pub imag_part: LevelMatrix,
}

impl MomentumMatrix {
    /// `|p_nm|^2`.
    pub fn abs_sq(&self, n: usize, m: usize) -> f64 {
        let a = self.imag_part.get(n, m);
        a * a
    }

    /// `p_nm` as `(re, im)`.
    pub fn element(&self, n: usize, m: usize) -> (f64, f64) {
        (0.0, -self.imag_part.get(n, m))
    }

    /// `sum_m |p_nm|^2 = <n|p^2|n>` within the stored basis.
    pub fn row_norm_sq(&self, n: usize) -> f64 {
        self.imag_part.row(n).map(|(_, a)| a * a).sum()
    }
}
