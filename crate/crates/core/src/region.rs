//! Nearest-neighbor neighborhoods in feature space (region of competence) and
//! in decision space (output profiles).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pool::ClassifierPool;

/// `k` nearest reference rows, closest first. Equal distances are ordered by
/// index.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighborhood {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

impl Neighborhood {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// The `K` nearest DSEL samples in feature space.
pub type RegionOfCompetence = Neighborhood;
/// The `Kp` DSEL samples with the closest output profiles.
pub type ProfileNeighborhood = Neighborhood;

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    dist2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2.total_cmp(&other.dist2).then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Bounded max-heap selection of the `k` closest `points` to `query`.
pub fn nearest<'a, I>(query: &[f64], points: I, k: usize, exclude: Option<usize>) -> Result<Neighborhood>
where
    I: ExactSizeIterator<Item = &'a [f64]>,
{
    let available = points.len() - usize::from(exclude.is_some_and(|e| e < points.len()));
    if k == 0 || k > available {
        return Err(Error::NeighborhoodTooLarge { k, available });
    }
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
    for (index, p) in points.enumerate() {
        if Some(index) == exclude {
            continue;
        }
        let c = Candidate {
            dist2: squared_distance(query, p),
            index,
        };
        if heap.len() < k {
            heap.push(c);
        } else if c < *heap.peek().expect("heap holds k items") {
            heap.pop();
            heap.push(c);
        }
    }
    let sorted = heap.into_sorted_vec();
    Ok(Neighborhood {
        indices: sorted.iter().map(|c| c.index).collect(),
        distances: sorted.iter().map(|c| c.dist2.sqrt()).collect(),
    })
}

/// Every point ordered by distance to `query` (ties by index).
pub fn rank_all<'a, I>(query: &[f64], points: I, exclude: Option<usize>) -> Vec<usize>
where
    I: Iterator<Item = &'a [f64]>,
{
    let mut all: Vec<Candidate> = points
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(index, p)| Candidate {
            dist2: squared_distance(query, p),
            index,
        })
        .collect();
    all.sort_unstable();
    all.into_iter().map(|c| c.index).collect()
}

/// Euclidean k-NN of `x` in `dsel`. `exclude` drops the query's own row when
/// it comes from DSEL.
pub fn region_of(x: &[f64], dsel: &Dataset, k: usize, exclude: Option<usize>) -> Result<RegionOfCompetence> {
    if x.len() != dsel.feature_count() {
        return Err(Error::DimensionMismatch {
            expected: dsel.feature_count(),
            found: x.len(),
        });
    }
    nearest(x, dsel.rows(), k, exclude)
}

/// Concatenated class supports of every pool member for one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputProfile(pub Vec<f64>);

impl OutputProfile {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn output_profile(pool: &ClassifierPool, x: &[f64]) -> Result<OutputProfile> {
    let mut values = Vec::with_capacity(pool.len() * pool.class_count());
    for c in pool.members() {
        values.extend(c.predict(x)?.supports);
    }
    Ok(OutputProfile(values))
}

/// The `kp` stored profiles closest to `profile`.
pub fn profile_neighborhood(
    profile: &OutputProfile,
    dsel_profiles: &[OutputProfile],
    kp: usize,
    exclude: Option<usize>,
) -> Result<ProfileNeighborhood> {
    if let Some(first) = dsel_profiles.first() {
        if first.0.len() != profile.0.len() {
            return Err(Error::DimensionMismatch {
                expected: first.0.len(),
                found: profile.0.len(),
            });
        }
    }
    nearest(
        profile.as_slice(),
        dsel_profiles.iter().map(OutputProfile::as_slice),
        kp,
        exclude,
    )
}
