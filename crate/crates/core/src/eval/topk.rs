use crate::distance::GroundTruthMatrix;
use crate::encoder::{Representation, Similarity};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Neighbors of one query, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub query_id: usize,
    pub neighbor_ids: Vec<usize>,
    pub scores: Vec<f64>,
}

impl QueryResult {
    pub fn len(&self) -> usize {
        self.neighbor_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbor_ids.is_empty()
    }
}

/// Keeps the `k` best `(id, key)` entries, where a smaller key is better and
/// ties go to the smaller id.
fn select_k(mut items: Vec<(usize, f64)>, k: usize) -> Vec<(usize, f64)> {
    let cmp = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    if k == 0 {
        return Vec::new();
    }
    if k < items.len() {
        items.select_nth_unstable_by(k - 1, cmp);
        items.truncate(k);
    }
    items.sort_unstable_by(cmp);
    items
}

fn check_k(k: usize, available: usize) -> Result<()> {
    if k > available {
        return Err(Error::arg(format!("k = {k} exceeds the {available} available candidates")));
    }
    Ok(())
}

/// Ground-truth top-k over every id in the matrix.
pub fn topk_ground_truth(gt: &GroundTruthMatrix, query_id: usize, k: usize) -> Result<QueryResult> {
    topk_ground_truth_among(gt, query_id, &gt.ids, k)
}

/// Ground-truth top-k restricted to `candidates` (the query itself is
/// skipped).
pub fn topk_ground_truth_among(
    gt: &GroundTruthMatrix,
    query_id: usize,
    candidates: &[usize],
    k: usize,
) -> Result<QueryResult> {
    let missing = |id| Error::arg(format!("id {id} is not covered by the ground-truth matrix"));
    let q = gt.row_of(query_id).ok_or_else(|| missing(query_id))?;
    let mut items = Vec::with_capacity(candidates.len());
    for &c in candidates {
        if c != query_id {
            let r = gt.row_of(c).ok_or_else(|| missing(c))?;
            items.push((c, gt.get(q, r)));
        }
    }
    check_k(k, items.len())?;
    let best = select_k(items, k);
    let neighbor_ids = best.iter().map(|&(id, _)| id).collect();
    let scores = best.iter().map(|&(id, _)| gt.similarity(q, gt.row_of(id).unwrap())).collect();
    Ok(QueryResult {
        query_id,
        neighbor_ids,
        scores,
    })
}

/// Linear scan of `reps` (with parallel `ids`) by representation similarity.
pub fn topk_repr<T: Scalar>(
    ids: &[usize],
    reps: &[Representation<T>],
    query: &Representation<T>,
    sim: Similarity,
    k: usize,
    exclude_id: Option<usize>,
) -> Result<QueryResult> {
    if ids.len() != reps.len() {
        return Err(Error::arg("ids and representations differ in length"));
    }
    let mut items = Vec::with_capacity(reps.len());
    for (&id, r) in ids.iter().zip(reps) {
        if Some(id) != exclude_id {
            let s = sim.eval(query.as_slice(), r.as_slice())?.as_f64();
            items.push((id, -s));
        }
    }
    check_k(k, items.len())?;
    let best = select_k(items, k);
    Ok(QueryResult {
        query_id: exclude_id.unwrap_or(usize::MAX),
        neighbor_ids: best.iter().map(|&(id, _)| id).collect(),
        scores: best.iter().map(|&(_, s)| -s).collect(),
    })
}
