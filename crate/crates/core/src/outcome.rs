//! Prediction spaces and events.
//!
//! Events are index sets over a space of `K` outcomes. Labels only appear
//! at I/O boundaries; everything else works with indices (or bit masks for
//! the brute-force scans over `2^K`).

use std::collections::HashMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest space for which `2^K` enumeration is allowed.
pub const MAX_ENUMERABLE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteOutcomeSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl FiniteOutcomeSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidSpace("a finite space needs at least one label".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidSpace(format!("duplicate label {label:?}")));
            }
        }
        Ok(Self { labels, index })
    }

    /// Space with labels `y0, y1, ...`.
    pub fn anonymous(size: usize) -> Result<Self> {
        Self::new((0..size).map(|i| format!("y{i}")))
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index.get(label).copied().ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    }

    pub fn event_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Event> {
        let indices = labels.iter().map(|l| self.index_of(l.as_ref())).collect::<Result<Vec<_>>>()?;
        Event::new(indices, self.size())
    }

    pub fn event_labels(&self, event: &Event) -> Vec<String> {
        event.indices().iter().map(|&i| self.labels[i].clone()).collect()
    }
}

/// Uniform grid `lo + i * (hi - lo) / (num_points - 1)`. Only the endpoints
/// and count are stored; points are recomputed from the formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOutcomeSpace {
    lo: f64,
    hi: f64,
    num_points: usize,
}

impl GridOutcomeSpace {
    pub fn new(lo: f64, hi: f64, num_points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidSpace(format!("grid needs finite lo < hi, got [{lo}, {hi}]")));
        }
        if num_points < 2 {
            return Err(Error::InvalidSpace(format!("grid needs at least 2 points, got {num_points}")));
        }
        Ok(Self { lo, hi, num_points })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn size(&self) -> usize {
        self.num_points
    }

    pub fn cell_width(&self) -> f64 {
        (self.hi - self.lo) / (self.num_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.num_points {
            self.hi
        } else {
            self.lo + i as f64 * (self.hi - self.lo) / (self.num_points - 1) as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.num_points).map(|i| self.point(i))
    }
}

/// Either kind of prediction space.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeSpace {
    Finite(FiniteOutcomeSpace),
    Grid(GridOutcomeSpace),
}

impl OutcomeSpace {
    pub fn size(&self) -> usize {
        match self {
            OutcomeSpace::Finite(s) => s.size(),
            OutcomeSpace::Grid(g) => g.size(),
        }
    }

    /// Volume of an event: cardinality on finite spaces, cell count times
    /// cell width on grids.
    pub fn event_size(&self, event: &Event) -> f64 {
        match self {
            OutcomeSpace::Finite(_) => event.len() as f64,
            OutcomeSpace::Grid(g) => event.len() as f64 * g.cell_width(),
        }
    }
}

impl From<FiniteOutcomeSpace> for OutcomeSpace {
    fn from(s: FiniteOutcomeSpace) -> Self {
        OutcomeSpace::Finite(s)
    }
}

impl From<GridOutcomeSpace> for OutcomeSpace {
    fn from(g: GridOutcomeSpace) -> Self {
        OutcomeSpace::Grid(g)
    }
}

/// A subset of a `K`-outcome space, stored as a strictly increasing index list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    indices: Vec<usize>,
    space_size: usize,
}

impl Event {
    /// Builds an event from indices in any order; duplicates are rejected.
    pub fn new(mut indices: Vec<usize>, space_size: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidEvent(format!("duplicate index {}", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= space_size {
                return Err(Error::InvalidEvent(format!("index {last} out of range for {space_size} outcomes")));
            }
        }
        Ok(Self { indices, space_size })
    }

    pub fn empty(space_size: usize) -> Self {
        Self { indices: Vec::new(), space_size }
    }

    pub fn full(space_size: usize) -> Self {
        Self { indices: (0..space_size).collect(), space_size }
    }

    pub fn singleton(index: usize, space_size: usize) -> Result<Self> {
        Self::new(vec![index], space_size)
    }

    /// Event whose members are the set bits of `mask`.
    pub fn from_mask(mask: u64, space_size: usize) -> Self {
        debug_assert!(space_size <= 64 && (space_size == 64 || mask >> space_size == 0));
        let indices = (0..space_size).filter(|i| mask >> i & 1 == 1).collect();
        Self { indices, space_size }
    }

    pub fn mask(&self) -> Option<u64> {
        (self.space_size <= 64).then(|| self.indices.iter().fold(0u64, |m, &i| m | 1 << i))
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn space_size(&self) -> usize {
        self.space_size
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn complement(&self) -> Event {
        let mut members = self.indices.iter().peekable();
        let indices = (0..self.space_size)
            .filter(|i| {
                if members.peek() == Some(&i) {
                    members.next();
                    false
                } else {
                    true
                }
            })
            .collect();
        Event { indices, space_size: self.space_size }
    }

    fn check_same_space(&self, other: &Event) -> Result<()> {
        if self.space_size != other.space_size {
            return Err(Error::SpaceMismatch { event: other.space_size, space: self.space_size });
        }
        Ok(())
    }

    pub fn union(&self, other: &Event) -> Result<Event> {
        self.check_same_space(other)?;
        let indices = self.indices.iter().merge(other.indices.iter()).dedup().copied().collect();
        Ok(Event { indices, space_size: self.space_size })
    }

    pub fn intersection(&self, other: &Event) -> Result<Event> {
        self.check_same_space(other)?;
        let indices = self.indices.iter().filter(|i| other.contains(**i)).copied().collect();
        Ok(Event { indices, space_size: self.space_size })
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.space_size == other.space_size && self.indices.iter().all(|&i| other.contains(i))
    }
}

/// Set complement within the event's space.
pub fn complement(e: &Event) -> Event {
    e.complement()
}

/// All `2^K` events of the space, ordered by cardinality and then
/// lexicographically by index list.
pub fn enumerate_events(space: &FiniteOutcomeSpace) -> Result<Vec<Event>> {
    enumerate_events_of_size(space.size())
}

pub fn enumerate_events_of_size(k: usize) -> Result<Vec<Event>> {
    Ok(canonical_masks(k)?.into_iter().map(|m| Event::from_mask(m, k)).collect())
}

/// Bit masks of all subsets of `{0..k}` in canonical order.
pub(crate) fn canonical_masks(k: usize) -> Result<Vec<u64>> {
    if k > MAX_ENUMERABLE {
        return Err(Error::SpaceTooLarge { size: k, limit: MAX_ENUMERABLE });
    }
    let mut masks = Vec::with_capacity(1 << k);
    for size in 0..=k {
        for combo in (0..k).combinations(size) {
            masks.push(combo.iter().fold(0u64, |m, &i| m | 1 << i));
        }
    }
    Ok(masks)
}

pub(crate) fn check_enumerable(k: usize) -> Result<()> {
    if k > MAX_ENUMERABLE {
        Err(Error::SpaceTooLarge { size: k, limit: MAX_ENUMERABLE })
    } else {
        Ok(())
    }
}
