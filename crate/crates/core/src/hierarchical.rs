//! The two-tier code: an outer `(n2, k2)` code across groups and an inner
//! `(n1_i, k1_i)` code inside group `i`, with submaster and master decoding.
//!
//! Groups and workers are 0-based: worker `w(i, j)` is `WorkerId { group: i, index: j }`.
//!
//! Matrix-vector (`A x`): rows of `A` are zero-padded to a multiple of
//! `lcm_i(k1_i k2)`, split into `k2` row blocks and outer-encoded into
//! `A~_1 .. A~_{n2}`; each `A~_i` is split into `k1_i` row blocks and
//! inner-encoded into the worker tasks `A^_{i,j}`.
//!
//! Matrix-matrix (`A^T B`): the columns of `B` are grouped left to right into
//! `k2` equal blocks and outer-encoded into `b~_1 .. b~_{n2}`; group `i` splits
//! the columns of `A` into `k1_i` equal blocks and inner-encodes them. Worker
//! `(i, j)` computes `A~_{i,j}^T b~_i`. Missing columns are zero-padded and
//! stripped again after decoding.

use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use crate::latency::HomogeneousParams;
use crate::matrix::{Matrix, MatrixError};
use crate::mds_codec::{self, BlockSet, CodeParams, CodecError, GeneratorMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum SchemeError {
    #[error("inner code list has {got} entries but the outer code has n2={n2}")]
    InnerCount { got: usize, n2: usize },
    #[error("group {group} out of range (n2={n2})")]
    NoSuchGroup { group: usize, n2: usize },
    #[error("tier-1 failure: group {group} has {got} worker results, needs {need}")]
    GroupInsufficient { group: usize, got: usize, need: usize },
    #[error("tier-2 failure: {got} group results available, master needs {need}")]
    TooFewGroups { got: usize, need: usize },
    #[error("input matrix must be non-empty, got {rows}x{cols}")]
    EmptyInput { rows: usize, cols: usize },
    #[error("A^T B needs A and B with equal row counts, got {a_rows} and {b_rows}")]
    RowMismatch { a_rows: usize, b_rows: usize },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

impl SchemeError {
    /// 1 for submaster-level failures, 2 for master-level, `None` otherwise.
    pub fn tier(&self) -> Option<u8> {
        match self {
            SchemeError::GroupInsufficient { .. } => Some(1),
            SchemeError::TooFewGroups { .. } => Some(2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierCodeParams {
    outer: CodeParams,
    inner: Vec<CodeParams>,
}

impl HierCodeParams {
    pub fn new(outer: CodeParams, inner: Vec<CodeParams>) -> Result<Self, SchemeError> {
        if inner.len() != outer.n() {
            return Err(SchemeError::InnerCount { got: inner.len(), n2: outer.n() });
        }
        Ok(Self { outer, inner })
    }

    /// `(n1, k1) x (n2, k2)`.
    pub fn homogeneous(n1: usize, k1: usize, n2: usize, k2: usize) -> Result<Self, SchemeError> {
        let inner = CodeParams::new(n1, k1)?;
        let outer = CodeParams::new(n2, k2)?;
        Ok(Self { outer, inner: vec![inner; n2] })
    }

    pub fn outer(&self) -> CodeParams {
        self.outer
    }

    pub fn inner(&self, group: usize) -> CodeParams {
        self.inner[group]
    }

    pub fn groups(&self) -> usize {
        self.outer.n()
    }

    pub fn as_homogeneous(&self) -> Option<HomogeneousParams> {
        let first = self.inner[0];
        self.inner.iter().all(|c| *c == first).then(|| HomogeneousParams {
            n1: first.n(),
            k1: first.k(),
            n2: self.outer.n(),
            k2: self.outer.k(),
        })
    }

    pub fn workers(&self) -> impl Iterator<Item = WorkerId> + '_ {
        self.inner
            .iter()
            .enumerate()
            .flat_map(|(group, c)| (0..c.n()).map(move |index| WorkerId { group, index }))
    }

    /// Row-count granularity for matrix-vector encoding: `lcm_i(k1_i * k2)`.
    pub fn row_granularity(&self) -> usize {
        self.inner.iter().fold(1, |acc, c| acc.lcm(&(c.k() * self.outer.k())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorkerId {
    pub group: usize,
    pub index: usize,
}

impl WorkerId {
    pub fn new(group: usize, index: usize) -> Self {
        Self { group, index }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodedTaskSet {
    pub tasks: BTreeMap<WorkerId, Matrix>,
    /// Zero rows appended to `A` before splitting.
    pub padding_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatMatTaskSet {
    /// Per worker: (coded column slice of `A`, coded column block of `B`).
    pub tasks: BTreeMap<WorkerId, (Matrix, Matrix)>,
    /// Columns of the original `A` (rows of `A^T B`).
    pub a_cols: usize,
    /// Columns of the original `B`.
    pub b_cols: usize,
}

/// A hierarchical code with its generators built once.
#[derive(Debug, Clone)]
pub struct HierarchicalCode {
    params: HierCodeParams,
    outer: GeneratorMatrix,
    inner: Vec<GeneratorMatrix>,
}

impl HierarchicalCode {
    pub fn new(params: HierCodeParams) -> Self {
        let outer = mds_codec::make_generator(params.outer);
        let inner = params.inner.iter().map(|c| mds_codec::make_generator(*c)).collect();
        Self { params, outer, inner }
    }

    /// Uses caller-supplied generators (e.g. the plain sum-parity code).
    pub fn with_generators(
        params: HierCodeParams,
        outer: GeneratorMatrix,
        inner: Vec<GeneratorMatrix>,
    ) -> Result<Self, SchemeError> {
        let bad = outer.params() != params.outer
            || inner.len() != params.inner.len()
            || inner.iter().zip(&params.inner).any(|(g, c)| g.params() != *c);
        if bad {
            return Err(SchemeError::InnerCount { got: inner.len(), n2: params.outer.n() });
        }
        Ok(Self { params, outer, inner })
    }

    pub fn params(&self) -> &HierCodeParams {
        &self.params
    }

    pub fn encode_matvec(&self, a: &Matrix) -> Result<CodedTaskSet, SchemeError> {
        if a.rows() == 0 || a.cols() == 0 {
            return Err(SchemeError::EmptyInput { rows: a.rows(), cols: a.cols() });
        }
        let g = self.params.row_granularity();
        let padded_rows = a.rows().div_ceil(g) * g;
        let padded = a.pad_rows(padded_rows);
        let outer_src = BlockSet::sources(padded.split_rows(self.params.outer.k())?)?;
        let group_blocks = mds_codec::encode(&self.outer, &outer_src)?;

        let mut tasks = BTreeMap::new();
        for (group, block) in group_blocks.iter() {
            let inner_src = BlockSet::sources(block.split_rows(self.params.inner[group].k())?)?;
            let coded = mds_codec::encode(&self.inner[group], &inner_src)?;
            for (index, task) in coded.into_blocks().into_iter().enumerate() {
                tasks.insert(WorkerId { group, index }, task);
            }
        }
        Ok(CodedTaskSet { tasks, padding_rows: padded_rows - a.rows() })
    }

    /// Recovers `A~_i x` (or any per-group linear result) from at least `k1_i`
    /// worker results of group `group`, keyed by worker index.
    pub fn submaster_decode(&self, group: usize, results: &BTreeMap<usize, Matrix>) -> Result<Matrix, SchemeError> {
        let inner = self.inner_generator(group)?;
        let need = inner.params().k();
        if results.len() < need {
            return Err(SchemeError::GroupInsufficient { group, got: results.len(), need });
        }
        let rx = BlockSet::new(results.keys().copied().collect(), results.values().cloned().collect())?;
        let decoded = mds_codec::decode(inner, &rx)?;
        Ok(Matrix::vstack(decoded.blocks())?)
    }

    /// Runs every group's inner decode concurrently. Groups with too few
    /// results come back as tier-1 errors rather than aborting the rest.
    pub fn decode_groups(
        &self,
        per_group: &BTreeMap<usize, BTreeMap<usize, Matrix>>,
    ) -> BTreeMap<usize, Result<Matrix, SchemeError>> {
        per_group
            .par_iter()
            .map(|(&group, results)| (group, self.submaster_decode(group, results)))
            .collect()
    }

    /// Outer decode from at least `k2` group results `A~_i x`, stacked and
    /// with `padding_rows` trailing rows removed.
    pub fn master_decode(
        &self,
        group_results: &BTreeMap<usize, Matrix>,
        padding_rows: usize,
    ) -> Result<Matrix, SchemeError> {
        let decoded = self.outer_decode(group_results)?;
        let stacked = Matrix::vstack(decoded.blocks())?;
        Ok(stacked.slice_rows(0, stacked.rows() - padding_rows))
    }

    /// Full matrix-vector decode from whichever worker results are present.
    pub fn decode_matvec(
        &self,
        worker_results: &BTreeMap<WorkerId, Matrix>,
        padding_rows: usize,
    ) -> Result<Matrix, SchemeError> {
        let group_results = self.collect_groups(worker_results)?;
        self.master_decode(&group_results, padding_rows)
    }

    pub fn encode_matmat(&self, a: &Matrix, b: &Matrix) -> Result<MatMatTaskSet, SchemeError> {
        for m in [a, b] {
            if m.rows() == 0 || m.cols() == 0 {
                return Err(SchemeError::EmptyInput { rows: m.rows(), cols: m.cols() });
            }
        }
        if a.rows() != b.rows() {
            return Err(SchemeError::RowMismatch { a_rows: a.rows(), b_rows: b.rows() });
        }
        let k2 = self.params.outer.k();
        let b_padded = b.pad_cols(b.cols().div_ceil(k2) * k2);
        let b_coded = mds_codec::encode(&self.outer, &BlockSet::sources(b_padded.split_cols(k2)?)?)?;

        let mut tasks = BTreeMap::new();
        for (group, b_block) in b_coded.iter() {
            let k1 = self.params.inner[group].k();
            let a_padded = a.pad_cols(a.cols().div_ceil(k1) * k1);
            let a_coded = mds_codec::encode(&self.inner[group], &BlockSet::sources(a_padded.split_cols(k1)?)?)?;
            for (index, a_block) in a_coded.into_blocks().into_iter().enumerate() {
                tasks.insert(WorkerId { group, index }, (a_block, b_block.clone()));
            }
        }
        Ok(MatMatTaskSet { tasks, a_cols: a.cols(), b_cols: b.cols() })
    }

    /// `A^T B` from the available worker outputs `A~_{i,j}^T b~_i`.
    pub fn matmat_decode_pipeline(
        &self,
        outputs: &BTreeMap<WorkerId, Matrix>,
        a_cols: usize,
        b_cols: usize,
    ) -> Result<Matrix, SchemeError> {
        let mut group_results = self.collect_groups(outputs)?;
        for r in group_results.values_mut() {
            *r = r.slice_rows(0, a_cols);
        }
        let decoded = self.outer_decode(&group_results)?;
        let full = Matrix::hstack(decoded.blocks())?;
        Ok(full.slice_cols(0, b_cols))
    }

    fn inner_generator(&self, group: usize) -> Result<&GeneratorMatrix, SchemeError> {
        self.inner
            .get(group)
            .ok_or(SchemeError::NoSuchGroup { group, n2: self.params.groups() })
    }

    fn outer_decode(&self, group_results: &BTreeMap<usize, Matrix>) -> Result<BlockSet, SchemeError> {
        let need = self.params.outer.k();
        if group_results.len() < need {
            return Err(SchemeError::TooFewGroups { got: group_results.len(), need });
        }
        let rx = BlockSet::new(group_results.keys().copied().collect(), group_results.values().cloned().collect())?;
        Ok(mds_codec::decode(&self.outer, &rx)?)
    }

    /// Groups worker results, decodes every group in parallel and returns the
    /// successful ones. Fails only when fewer than `k2` groups decode; the
    /// error names a tier-1 failure if one caused the shortfall.
    fn collect_groups(
        &self,
        worker_results: &BTreeMap<WorkerId, Matrix>,
    ) -> Result<BTreeMap<usize, Matrix>, SchemeError> {
        let mut per_group: BTreeMap<usize, BTreeMap<usize, Matrix>> = BTreeMap::new();
        for (w, m) in worker_results {
            per_group.entry(w.group).or_default().insert(w.index, m.clone());
        }
        let mut ok = BTreeMap::new();
        let mut first_tier1 = None;
        for (group, res) in self.decode_groups(&per_group) {
            match res {
                Ok(m) => {
                    ok.insert(group, m);
                }
                Err(e @ SchemeError::GroupInsufficient { .. }) => {
                    first_tier1.get_or_insert(e);
                }
                Err(e) => return Err(e),
            }
        }
        let need = self.params.outer.k();
        if ok.len() < need {
            return Err(first_tier1.unwrap_or(SchemeError::TooFewGroups { got: ok.len(), need }));
        }
        Ok(ok)
    }
}

/// What worker `w(i, j)` computes for a matrix-vector job.
pub fn worker_compute_matvec(task: &Matrix, x: &Matrix) -> Result<Matrix, SchemeError> {
    Ok(task.matmul(x)?)
}

/// What worker `w(i, j)` computes for `A^T B`: `A~_{i,j}^T b~_i`.
pub fn worker_compute_matmat(a_block: &Matrix, b_block: &Matrix) -> Result<Matrix, SchemeError> {
    Ok(a_block.transpose().matmul(b_block)?)
}
