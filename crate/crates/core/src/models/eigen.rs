//! Symmetric eigensolvers.
//!
//! The grid Hamiltonian is tridiagonal and goes through implicit-shift QL
//! (the `tql2` scheme of Bowdler, Martin, Reinsch and Wilkinson). Small dense
//! symmetric matrices go through cyclic Jacobi.
//!
//! Eigenvectors are stored one after another, so eigenvector `k` is the
//! contiguous slice `vectors[k*dim..(k+1)*dim]`.

use thiserror::Error;

/// QL iterations allowed per eigenvalue before giving up.
const MAX_QL_ITERATIONS: usize = 60;
const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("eigensolver failed to converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },
    #[error("matrix is not symmetric: |A_ij - A_ji| = {deviation:e} at ({row}, {col})")]
    Asymmetric { row: usize, col: usize, deviation: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Symmetric tridiagonal matrix: `off_diagonal[i]` couples `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self, EigenError> {
        if diagonal.is_empty() || off_diagonal.len() + 1 != diagonal.len() {
            return Err(EigenError::Dimension(format!(
                "{} diagonal entries need {} off-diagonal entries, got {}",
                diagonal.len(),
                diagonal.len().saturating_sub(1),
                off_diagonal.len()
            )));
        }
        Ok(Self { diagonal, off_diagonal })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.diagonal[i] * v[i];
                if i > 0 {
                    acc += self.off_diagonal[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.off_diagonal[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.diagonal[i].abs();
                if i > 0 {
                    acc += self.off_diagonal[i - 1].abs();
                }
                if i + 1 < n {
                    acc += self.off_diagonal[i].abs();
                }
                acc
            })
            .fold(0.0, f64::max)
    }
}

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, EigenError> {
        if data.len() != dim * dim || dim == 0 {
            return Err(EigenError::Dimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, EigenError> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(EigenError::Dimension("rows must form a square matrix".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Input accepted by [`diagonalize`].
#[derive(Debug, Clone, PartialEq)]
pub enum SymmetricMatrix {
    Tridiagonal(TridiagonalMatrix),
    Dense(DenseMatrix),
}

impl SymmetricMatrix {
    pub fn dim(&self) -> usize {
        match self {
            SymmetricMatrix::Tridiagonal(t) => t.dim(),
            SymmetricMatrix::Dense(d) => d.dim,
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            SymmetricMatrix::Tridiagonal(t) => t.apply(v),
            SymmetricMatrix::Dense(d) => d.apply(v),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            SymmetricMatrix::Tridiagonal(t) => t.norm(),
            SymmetricMatrix::Dense(d) => d.norm(),
        }
    }
}

/// Ascending eigenvalues with orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    dim: usize,
    vectors: Vec<f64>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.dim)
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.weighted_gram(&vec![1.0; self.dim]);
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            for b in a..self.dim {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((gram[a * self.dim + b] - target).abs());
            }
        }
        worst
    }

    /// `G_ab = sum_i v_a[i] w[i] v_b[i]` as a row-major symmetric matrix, i.e.
    /// a diagonal operator expressed in the eigenbasis.
    pub fn weighted_gram(&self, weight: &[f64]) -> Vec<f64> {
        let n = self.dim;
        assert_eq!(weight.len(), n, "one weight per component");
        let scaled: Vec<f64> = self
            .vectors()
            .flat_map(|v| v.iter().zip(weight).map(|(x, w)| x * w))
            .collect();
        let mut gram = vec![0.0; n * n];
        for a0 in (0..n).step_by(TILE) {
            let a_len = TILE.min(n - a0);
            for b0 in (a0..n).step_by(TILE) {
                let b_len = TILE.min(n - b0);
                let tile = gram_tile(
                    |t| &scaled[(a0 + t.min(a_len - 1)) * n..][..n],
                    |t| self.vector(b0 + t.min(b_len - 1)),
                );
                for (ta, row) in tile.iter().enumerate().take(a_len) {
                    for (tb, &value) in row.iter().enumerate().take(b_len) {
                        let (a, b) = (a0 + ta, b0 + tb);
                        gram[a * n + b] = value;
                        gram[b * n + a] = value;
                    }
                }
            }
        }
        // Rounding differs between the (a, b) and (b, a) positions inside a
        // diagonal tile; the upper triangle wins.
        for a in 0..n {
            for b in 0..a {
                gram[a * n + b] = gram[b * n + a];
            }
        }
        gram
    }

    /// `max_k ||H v_k - E_k v_k||_2 / ||H||`.
    pub fn max_residual(&self, h: &SymmetricMatrix) -> f64 {
        let norm = h.norm().max(f64::MIN_POSITIVE);
        (0..self.dim)
            .map(|k| {
                let v = self.vector(k);
                let hv = h.apply(v);
                let r: f64 = hv.iter().zip(v).map(|(a, b)| (a - self.values[k] * b).powi(2)).sum();
                r.sqrt() / norm
            })
            .fold(0.0, f64::max)
    }

    /// Sorts ascending (stable, so near-ties keep solver order) and fixes each
    /// vector's sign so that its largest component is positive.
    fn finalize(values: Vec<f64>, vectors: Vec<f64>, dim: usize) -> Self {
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut sorted_values = Vec::with_capacity(dim);
        let mut sorted_vectors = Vec::with_capacity(dim * dim);
        for &k in &order {
            sorted_values.push(values[k]);
            let v = &vectors[k * dim..(k + 1) * dim];
            let pivot = v
                .iter()
                .enumerate()
                .fold(
                    (0, 0.0f64),
                    |best, (i, &x)| if x.abs() > best.1 { (i, x.abs()) } else { best },
                )
                .0;
            let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
            sorted_vectors.extend(v.iter().map(|x| sign * x));
        }
        Self {
            values: sorted_values,
            dim,
            vectors: sorted_vectors,
        }
    }
}

/// Eigen-decomposition of a symmetric tridiagonal or dense matrix.
///
/// `tol` bounds the off-diagonal mass left by Jacobi relative to the matrix
/// norm; QL deflates at machine precision and ignores it.
pub fn diagonalize(h: &SymmetricMatrix, tol: f64) -> Result<Eigensystem, EigenError> {
    match h {
        SymmetricMatrix::Tridiagonal(t) => diagonalize_tridiagonal(t),
        SymmetricMatrix::Dense(d) => diagonalize_dense(d, tol),
    }
}

/// Implicit-shift QL with eigenvector accumulation.
///
/// The QL sweep itself only touches the two diagonals, so it runs first and
/// logs its Givens rotations. The log is then replayed onto the eigenvector
/// matrix in blocks of rotations times blocks of rows that stay in cache,
/// instead of streaming the whole `dim x dim` matrix once per QL iteration.
pub fn diagonalize_tridiagonal(t: &TridiagonalMatrix) -> Result<Eigensystem, EigenError> {
    let n = t.dim();
    if t.diagonal.iter().chain(&t.off_diagonal).any(|v| !v.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let mut d = t.diagonal.clone();
    let mut e = t.off_diagonal.clone();
    e.push(0.0);
    let mut log = Vec::new();
    ql_sweep(&mut d, &mut e, &mut log)?;
    let z = replay_rotations(n, &log);
    Ok(Eigensystem::finalize(d, z, n))
}

/// One Givens rotation mixing eigenvector columns `index` and `index + 1`.
#[derive(Clone, Copy)]
struct Rotation {
    index: u32,
    c: f64,
    s: f64,
}

fn ql_sweep(d: &mut [f64], e: &mut [f64], log: &mut Vec<Rotation>) -> Result<(), EigenError> {
    let n = d.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(EigenError::NoConvergence { index: l, iterations });
            }

            // Wilkinson-style shift from the leading 2x2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated_early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated_early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                log.push(Rotation { index: i as u32, c, s });
            }
            if deflated_early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

const LANES: usize = 16;
const ROTATION_CHUNK: usize = 65536;

/// Applies the logged rotations to the identity and returns the eigenvectors
/// one after another.
///
/// Rows of the accumulated matrix are independent under column rotations, so
/// they are processed in groups of `LANES`, stored lane-interleaved so that one
/// rotation updates two contiguous `[f64; LANES]` values.
fn replay_rotations(n: usize, log: &[Rotation]) -> Vec<f64> {
    let groups = n.div_ceil(LANES);
    // block[g][col][lane] = Z[g*LANES + lane][col]
    let mut block = vec![[0.0f64; LANES]; groups * n];
    for row in 0..n {
        block[(row / LANES) * n + row][row % LANES] = 1.0;
    }
    for chunk in log.chunks(ROTATION_CHUNK) {
        for group in block.chunks_exact_mut(n) {
            apply_rotations(group, chunk);
        }
    }
    let mut vectors = vec![0.0; n * n];
    for (g, group) in block.chunks_exact(n).enumerate() {
        for (col, lanes) in group.iter().enumerate() {
            for (lane, &v) in lanes.iter().enumerate() {
                let row = g * LANES + lane;
                if row < n {
                    vectors[col * n + row] = v;
                }
            }
        }
    }
    vectors
}

fn apply_rotations(group: &mut [[f64; LANES]], chunk: &[Rotation]) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx") {
        // SAFETY: the required CPU feature was detected at runtime.
        unsafe { apply_rotations_avx(group, chunk) };
        return;
    }
    apply_rotations_generic(group, chunk);
}

// Same arithmetic with wider registers. Rust never contracts a*b+c into an
// FMA on its own, so results are bitwise identical to the generic path.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx")]
unsafe fn apply_rotations_avx(group: &mut [[f64; LANES]], chunk: &[Rotation]) {
    apply_rotations_generic(group, chunk);
}

#[inline(always)]
fn apply_rotations_generic(group: &mut [[f64; LANES]], chunk: &[Rotation]) {
    for rot in chunk {
        let i = rot.index as usize;
        let (lo, hi) = group.split_at_mut(i + 1);
        let a = &mut lo[i];
        let b = &mut hi[0];
        for lane in 0..LANES {
            let f = b[lane];
            b[lane] = rot.s * a[lane] + rot.c * f;
            a[lane] = rot.c * a[lane] - rot.s * f;
        }
    }
}

const TILE: usize = 4;
type Tile = [[f64; TILE]; TILE];

/// Dot products of `TILE` rows against `TILE` rows, with each accumulator
/// split over four lanes so the inner loop vectorizes.
fn gram_tile<'a>(rows_a: impl Fn(usize) -> &'a [f64], rows_b: impl Fn(usize) -> &'a [f64]) -> Tile {
    let a: [&[f64]; TILE] = std::array::from_fn(&rows_a);
    let b: [&[f64]; TILE] = std::array::from_fn(&rows_b);
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx") {
        // SAFETY: the required CPU feature was detected at runtime.
        return unsafe { gram_tile_avx(&a, &b) };
    }
    gram_tile_generic(&a, &b)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx")]
unsafe fn gram_tile_avx(a: &[&[f64]; TILE], b: &[&[f64]; TILE]) -> Tile {
    gram_tile_generic(a, b)
}

#[inline(always)]
fn gram_tile_generic(a: &[&[f64]; TILE], b: &[&[f64]; TILE]) -> Tile {
    const W: usize = 4;
    let n = a[0].len();
    let body = n - n % W;
    let mut acc = [[[0.0f64; W]; TILE]; TILE];
    let mut k = 0;
    while k < body {
        let av: [[f64; W]; TILE] = std::array::from_fn(|t| a[t][k..k + W].try_into().unwrap());
        let bv: [[f64; W]; TILE] = std::array::from_fn(|t| b[t][k..k + W].try_into().unwrap());
        for ta in 0..TILE {
            for tb in 0..TILE {
                for l in 0..W {
                    acc[ta][tb][l] += av[ta][l] * bv[tb][l];
                }
            }
        }
        k += W;
    }
    let mut out = [[0.0; TILE]; TILE];
    for ta in 0..TILE {
        for tb in 0..TILE {
            let lanes = acc[ta][tb];
            let tail: f64 = (body..n).map(|i| a[ta][i] * b[tb][i]).sum();
            out[ta][tb] = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail;
        }
    }
    out
}

/// Cyclic Jacobi for dense symmetric matrices.
pub fn diagonalize_dense(a: &DenseMatrix, tol: f64) -> Result<Eigensystem, EigenError> {
    let n = a.dim;
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in i + 1..n {
            let deviation = (a.at(i, j) - a.at(j, i)).abs();
            if deviation > 1e-12 * scale {
                return Err(EigenError::Asymmetric {
                    row: i,
                    col: j,
                    deviation,
                });
            }
        }
    }

    let mut m = a.data.clone();
    // Symmetrize so rounding-level asymmetry cannot leak into the rotations.
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
    let mut z = vec![0.0; n * n];
    for k in 0..n {
        z[k * n + k] = 1.0;
    }
    let frob: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = tol.max(f64::EPSILON) * frob;

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= target {
            let values = (0..n).map(|i| m[i * n + i]).collect();
            return Ok(Eigensystem::finalize(values, z, n));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                // eigenvector k is row k of z
                let (head, tail) = z.split_at_mut(q * n);
                let vp = &mut head[p * n..(p + 1) * n];
                let vq = &mut tail[..n];
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
            }
        }
    }
    Err(EigenError::NoConvergence {
        index: 0,
        iterations: MAX_JACOBI_SWEEPS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    #[test]
    fn already_diagonal() {
        let h = SymmetricMatrix::Dense(DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap());
        let eig = diagonalize(&h, 1e-14).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0]);
        assert_eq!(eig.vector(0), &[0.0, 1.0]);
        assert_eq!(eig.vector(1), &[1.0, 0.0]);
    }

    #[test]
    fn asymmetric_dense_is_rejected() {
        let h = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).unwrap();
        assert!(matches!(
            diagonalize_dense(&h, 1e-14),
            Err(EigenError::Asymmetric { .. })
        ));
    }

    #[test]
    fn jacobi_matches_ql_on_random_tridiagonal() {
        let mut rng = StdRng::seed_from_u64(11);
        let mut next = || rng.gen_range(-0.5..0.5);
        let n = 24;
        let diag: Vec<f64> = (0..n).map(|_| 4.0 * next()).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| next()).collect();
        let t = TridiagonalMatrix::new(diag.clone(), off.clone()).unwrap();
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            dense[i * n + i] = diag[i];
            if i + 1 < n {
                dense[i * n + i + 1] = off[i];
                dense[(i + 1) * n + i] = off[i];
            }
        }
        let d = DenseMatrix::new(n, dense).unwrap();
        let ql = diagonalize_tridiagonal(&t).unwrap();
        let jac = diagonalize_dense(&d, 1e-15).unwrap();
        for (a, b) in ql.values.iter().zip(&jac.values) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert!(ql.orthonormality_error() < 1e-12);
        assert!(jac.orthonormality_error() < 1e-12);
        assert!(ql.max_residual(&SymmetricMatrix::Tridiagonal(t)) < 1e-13);
        assert!(jac.max_residual(&SymmetricMatrix::Dense(d)) < 1e-13);
    }

    #[test]
    fn free_particle_box_ground_state() {
        // hbar = m = 1, L = pi, 64 interior points: E_1 -> 1/2
        let n = 64;
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let t = TridiagonalMatrix::new(vec![1.0 / (h * h); n], vec![-0.5 / (h * h); n - 1]).unwrap();
        let eig = diagonalize_tridiagonal(&t).unwrap();
        assert!((eig.values[0] - 0.5).abs() / 0.5 < 2e-3, "E1 = {}", eig.values[0]);
        // the discrete spectrum is known exactly: (1 - cos(k h)) / h^2
        for (k, e) in eig.values.iter().enumerate() {
            let exact = (1.0 - ((k + 1) as f64 * h).cos()) / (h * h);
            assert!((e - exact).abs() < 1e-10 * exact.max(1.0));
        }
    }

    #[test]
    fn one_by_one() {
        let t = TridiagonalMatrix::new(vec![3.0], vec![]).unwrap();
        let eig = diagonalize_tridiagonal(&t).unwrap();
        assert_eq!(eig.values, vec![3.0]);
        assert_eq!(eig.vector(0), &[1.0]);
    }

    #[test]
    fn bad_dimensions() {
        assert!(TridiagonalMatrix::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(DenseMatrix::new(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn weighted_gram_matches_naive_sums() {
        // 19 is not a multiple of the tile, lane or rotation-group widths
        let n = 19;
        let diag: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64).collect();
        let t = TridiagonalMatrix::new(diag, vec![0.3; n - 1]).unwrap();
        let eig = diagonalize_tridiagonal(&t).unwrap();
        let w: Vec<f64> = (0..n).map(|i| i as f64 - 4.5).collect();
        let gram = eig.weighted_gram(&w);
        for a in 0..n {
            for b in 0..n {
                let naive: f64 = (0..n).map(|i| eig.vector(a)[i] * w[i] * eig.vector(b)[i]).sum();
                assert!((gram[a * n + b] - naive).abs() < 1e-13);
                assert_eq!(gram[a * n + b], gram[b * n + a]);
            }
        }
        assert!(eig.orthonormality_error() < 1e-13);
        assert!(eig.max_residual(&SymmetricMatrix::Tridiagonal(t)) < 1e-14);
    }
}
