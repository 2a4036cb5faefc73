//! Systematic real-valued `(n, k)` MDS codes over equal-shaped matrix blocks.
//!
//! Parity rows come from a Cauchy matrix `1 / (x_r - y_l)` with source points
//! `y_l = l` and parity points `x_r = k + r`, rescaled column-wise so that the
//! first parity row is all ones. Column scaling keeps every square minor of a
//! Cauchy matrix nonsingular, so `[I; C]` has the any-`k`-rows property. With a
//! single parity row the code is the plain sum parity `A_1 + ... + A_k`.
//!
//! Block ids are 0-based throughout.

use std::sync::OnceLock;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matrix::{Matrix, MatrixError};

/// Condition-number ceiling applied by [`decode`].
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;

/// Above this many `k`-subsets the conditioning preflight samples instead of enumerating.
const EXHAUSTIVE_SUBSET_LIMIT: u128 = 20_000;
const SAMPLED_SUBSETS: usize = 2_000;

#[derive(Debug, Error, PartialEq)]
pub enum CodecError {
    #[error("invalid code parameters (n={n}, k={k}): need 1 <= k <= n")]
    InvalidParams { n: usize, k: usize },
    #[error("expected {expected} source blocks with ids 0..{expected}, got {got}")]
    SourceCount { expected: usize, got: usize },
    #[error("block {id} has shape {got:?}, expected {expected:?}")]
    ShapeMismatch {
        id: usize,
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("block id {id} appears more than once")]
    DuplicateId { id: usize },
    #[error("block id {id} out of range for n={n}")]
    IdOutOfRange { id: usize, n: usize },
    #[error("insufficient data: {got} distinct blocks received, {need} required")]
    Insufficient { got: usize, need: usize },
    #[error("generator worst-case condition number {condition:e} exceeds limit {limit:e}")]
    IllConditioned { condition: f64, limit: f64 },
    #[error("generator rows {ids:?} are singular: MDS invariant violated")]
    SingularSubsystem { ids: Vec<usize> },
    #[error("generator is not MDS: rows {ids:?} are linearly dependent")]
    NotMds { ids: Vec<usize> },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeParams {
    n: usize,
    k: usize,
}

impl CodeParams {
    pub fn new(n: usize, k: usize) -> Result<Self, CodecError> {
        if k == 0 || k > n {
            return Err(CodecError::InvalidParams { n, k });
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

#[derive(Debug)]
pub struct GeneratorMatrix {
    params: CodeParams,
    entries: Matrix,
    systematic: bool,
    worst_condition: OnceLock<f64>,
}

impl Clone for GeneratorMatrix {
    fn clone(&self) -> Self {
        Self {
            params: self.params,
            entries: self.entries.clone(),
            systematic: self.systematic,
            worst_condition: self.worst_condition.clone(),
        }
    }
}

/// Builds the systematic normalized-Cauchy generator for `params`.
pub fn make_generator(params: CodeParams) -> GeneratorMatrix {
    let (n, k) = (params.n, params.k);
    let entries = Matrix::from_fn(n, k, |row, col| {
        if row < k {
            if row == col {
                1.0
            } else {
                0.0
            }
        } else {
            // 1/(x_r - y_l) divided by the first parity row's 1/(x_0 - y_l).
            let r = (row - k) as f64;
            let l = col as f64;
            let kf = k as f64;
            (kf - l) / (kf + r - l)
        }
    });
    GeneratorMatrix {
        params,
        entries,
        systematic: true,
        worst_condition: OnceLock::new(),
    }
}

impl GeneratorMatrix {
    /// A systematic generator with caller-chosen parity rows, checked for the
    /// any-`k`-rows property before it is returned.
    pub fn with_parity_rows(k: usize, parity: &[Vec<f64>]) -> Result<Self, CodecError> {
        let params = CodeParams::new(k + parity.len(), k)?;
        let parity = if parity.is_empty() {
            Matrix::zeros(0, k)
        } else {
            Matrix::from_rows(parity)?
        };
        if parity.cols() != k {
            return Err(CodecError::ShapeMismatch {
                id: k,
                got: parity.shape(),
                expected: (parity.rows(), k),
            });
        }
        let entries = Matrix::vstack(&[Matrix::identity(k), parity])?;
        let gen = Self {
            params,
            entries,
            systematic: true,
            worst_condition: OnceLock::new(),
        };
        if let Some(ids) = gen.first_singular_subset() {
            return Err(CodecError::NotMds { ids });
        }
        Ok(gen)
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn is_systematic(&self) -> bool {
        self.systematic
    }

    pub fn coefficient(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    /// The `k x k` matrix formed by the listed generator rows.
    pub fn submatrix(&self, ids: &[usize]) -> Matrix {
        Matrix::from_fn(ids.len(), self.params.k, |r, c| self.entries[(ids[r], c)])
    }

    /// Worst 1-norm condition number over `k`-row submatrices. Exhaustive when
    /// there are at most 20 000 subsets, otherwise a fixed pseudo-random sample.
    pub fn worst_condition(&self) -> f64 {
        *self.worst_condition.get_or_init(|| {
            self.row_subsets()
                .into_iter()
                .map(|ids| self.submatrix(&ids).condition_number())
                .fold(1.0, f64::max)
        })
    }

    fn first_singular_subset(&self) -> Option<Vec<usize>> {
        self.row_subsets()
            .into_iter()
            .find(|ids| self.submatrix(ids).inverse().is_err())
    }

    fn row_subsets(&self) -> Vec<Vec<usize>> {
        let (n, k) = (self.params.n, self.params.k);
        if binomial(n, k) <= EXHAUSTIVE_SUBSET_LIMIT {
            return k_subsets(n, k);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(((n as u64) << 32) ^ k as u64);
        (0..SAMPLED_SUBSETS)
            .map(|_| {
                let mut ids = index::sample(&mut rng, n, k).into_vec();
                ids.sort_unstable();
                ids
            })
            .collect()
    }
}

/// An ordered collection of equal-shaped blocks tagged with coded-block ids.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSet {
    blocks: Vec<Matrix>,
    ids: Vec<usize>,
}

impl BlockSet {
    pub fn new(ids: Vec<usize>, blocks: Vec<Matrix>) -> Result<Self, CodecError> {
        if ids.len() != blocks.len() {
            return Err(CodecError::SourceCount { expected: ids.len(), got: blocks.len() });
        }
        if let Some(first) = blocks.first() {
            let shape = first.shape();
            for (id, b) in ids.iter().zip(&blocks) {
                if b.shape() != shape {
                    return Err(CodecError::ShapeMismatch { id: *id, got: b.shape(), expected: shape });
                }
            }
        }
        let mut seen = ids.clone();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(CodecError::DuplicateId { id: w[0] });
        }
        Ok(Self { blocks, ids })
    }

    /// Source blocks with ids `0..blocks.len()`.
    pub fn sources(blocks: Vec<Matrix>) -> Result<Self, CodecError> {
        Self::new((0..blocks.len()).collect(), blocks)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Matrix> {
        self.blocks
    }

    pub fn get(&self, id: usize) -> Option<&Matrix> {
        self.ids.iter().position(|&i| i == id).map(|p| &self.blocks[p])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Matrix)> {
        self.ids.iter().copied().zip(&self.blocks)
    }

    /// Keeps only the listed ids, in the order given.
    pub fn select(&self, ids: &[usize]) -> Option<BlockSet> {
        let blocks = ids.iter().map(|&id| self.get(id).cloned()).collect::<Option<Vec<_>>>()?;
        Some(BlockSet { blocks, ids: ids.to_vec() })
    }
}

/// Coded block `j` is `sum_l gen[j, l] * source[l]`; systematic outputs are copies.
pub fn encode(gen: &GeneratorMatrix, source: &BlockSet) -> Result<BlockSet, CodecError> {
    let (n, k) = (gen.params.n, gen.params.k);
    if source.len() != k || source.ids.iter().enumerate().any(|(i, &id)| i != id) {
        return Err(CodecError::SourceCount { expected: k, got: source.len() });
    }
    let (rows, cols) = source.blocks[0].shape();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        if gen.systematic && j < k {
            out.push(source.blocks[j].clone());
            continue;
        }
        let mut acc = Matrix::zeros(rows, cols);
        for (l, block) in source.blocks.iter().enumerate() {
            let c = gen.entries[(j, l)];
            if c != 0.0 {
                acc.axpy(c, block)?;
            }
        }
        out.push(acc);
    }
    Ok(BlockSet { blocks: out, ids: (0..n).collect() })
}

/// Recovers the `k` source blocks from any `k` coded blocks, refusing
/// generators whose worst-case conditioning exceeds [`DEFAULT_CONDITION_LIMIT`].
pub fn decode(gen: &GeneratorMatrix, received: &BlockSet) -> Result<BlockSet, CodecError> {
    decode_with_limit(gen, received, DEFAULT_CONDITION_LIMIT)
}

/// [`decode`] with an explicit conditioning ceiling (`f64::INFINITY` disables the check).
pub fn decode_with_limit(
    gen: &GeneratorMatrix,
    received: &BlockSet,
    condition_limit: f64,
) -> Result<BlockSet, CodecError> {
    let (n, k) = (gen.params.n, gen.params.k);
    if let Some(&id) = received.ids.iter().find(|&&id| id >= n) {
        return Err(CodecError::IdOutOfRange { id, n });
    }
    if received.len() < k {
        return Err(CodecError::Insufficient { got: received.len(), need: k });
    }
    if condition_limit.is_finite() {
        let condition = gen.worst_condition();
        if condition > condition_limit {
            return Err(CodecError::IllConditioned { condition, limit: condition_limit });
        }
    }

    let mut chosen = received.ids.clone();
    chosen.sort_unstable();
    chosen.truncate(k);
    let picked = received.select(&chosen).expect("chosen ids come from the received set");

    if gen.systematic && chosen.iter().enumerate().all(|(i, &id)| i == id) {
        return Ok(BlockSet { blocks: picked.blocks, ids: (0..k).collect() });
    }

    let inv = gen
        .submatrix(&chosen)
        .inverse()
        .map_err(|_| CodecError::SingularSubsystem { ids: chosen.clone() })?;
    let (rows, cols) = picked.blocks[0].shape();
    let mut out = Vec::with_capacity(k);
    for l in 0..k {
        // A systematic row already holds source l verbatim.
        if gen.systematic {
            if let Some(pos) = chosen.iter().position(|&id| id == l) {
                out.push(picked.blocks[pos].clone());
                continue;
            }
        }
        let mut acc = Matrix::zeros(rows, cols);
        for (j, block) in picked.blocks.iter().enumerate() {
            let c = inv[(l, j)];
            if c != 0.0 {
                acc.axpy(c, block)?;
            }
        }
        out.push(acc);
    }
    Ok(BlockSet { blocks: out, ids: (0..k).collect() })
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
