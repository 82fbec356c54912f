//! Conformal prediction regions and imprecise highest density regions.
//!
//! The strong α-cut `{y : π(y) > α}` is the normative IHDR; the
//! intersection of all events with `Π̲(A) >= 1 - α` is computed by brute
//! force as an independent route to the same set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::{check_enumerable, Event, OutcomeSpace};
use crate::possibility::full_mask;
use crate::transducer::{transduce, Contour, NonconformityMeasure};
use crate::value::{Rational, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    Cpr,
    IhdrCut,
    IhdrIntersection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRegion<V> {
    pub event: Event,
    pub alpha: V,
    pub kind: RegionKind,
}

fn check_alpha<V: Value>(alpha: &V) -> Result<()> {
    if *alpha < V::zero() || *alpha > V::one() {
        return Err(Error::AlphaOutOfRange(alpha.render()));
    }
    Ok(())
}

fn strict_cut<V: Value>(c: &Contour<V>, alpha: &V) -> Event {
    let indices = c.values().iter().enumerate().filter(|(_, v)| *v > alpha).map(|(i, _)| i).collect();
    Event::new(indices, c.len()).expect("indices are in range and distinct")
}

/// `{y : π(y) > α}`. No consonance requirement.
pub fn cpr<V: Value>(c: &Contour<V>, alpha: &V) -> Result<PredictionRegion<V>> {
    check_alpha(alpha)?;
    Ok(PredictionRegion { event: strict_cut(c, alpha), alpha: alpha.clone(), kind: RegionKind::Cpr })
}

/// Strong α-cut of a consonant contour.
pub fn ihdr_cut<V: Value>(c: &Contour<V>, alpha: &V) -> Result<PredictionRegion<V>> {
    check_alpha(alpha)?;
    if !c.is_consonant() {
        return Err(Error::NonConsonantContour { max: c.max().render() });
    }
    Ok(PredictionRegion { event: strict_cut(c, alpha), alpha: alpha.clone(), kind: RegionKind::IhdrCut })
}

/// `⋂ {A : Π̲(A) >= 1 - α}` over all `2^K` events.
pub fn ihdr_intersection<V: Value>(c: &Contour<V>, alpha: &V) -> Result<PredictionRegion<V>> {
    check_alpha(alpha)?;
    if !c.is_consonant() {
        return Err(Error::NonConsonantContour { max: c.max().render() });
    }
    let k = c.len();
    check_enumerable(k)?;
    let values = c.values();
    let threshold = V::one() - alpha.clone();
    // Π̲(A) = 1 - π(y*) with y* the argmax over Aᶜ, so memoise per argmax.
    // Index `k` stands for an empty complement, where Π̲ = 1.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("contour values are comparable"));
    let mut rank = vec![0usize; k];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let qualifies: Vec<bool> = (0..=k)
        .map(|r| {
            let lower = if r == k { V::one() } else { V::one() - values[order[r]].clone() };
            lower >= threshold
        })
        .collect();
    let full = full_mask(k);
    let mut acc = full;
    for mask in 0..=full {
        let mut comp = full & !mask;
        let mut best = k;
        while comp != 0 {
            let i = comp.trailing_zeros() as usize;
            best = best.min(rank[i]);
            comp &= comp - 1;
        }
        if qualifies[best] {
            acc &= mask;
        }
    }
    Ok(PredictionRegion { event: Event::from_mask(acc, k), alpha: alpha.clone(), kind: RegionKind::IhdrIntersection })
}

pub fn region<V: Value>(c: &Contour<V>, alpha: &V, kind: RegionKind) -> Result<PredictionRegion<V>> {
    match kind {
        RegionKind::Cpr => cpr(c, alpha),
        RegionKind::IhdrCut => ihdr_cut(c, alpha),
        RegionKind::IhdrIntersection => ihdr_intersection(c, alpha),
    }
}

/// α grid on which every distinct region of a contour appears: the
/// requested values, the breakpoints, midpoints between consecutive
/// breakpoints, and the endpoints 0 and 1.
pub fn alpha_sweep<V: Value>(c: &Contour<V>, extra: &[V]) -> Vec<V> {
    let bps = c.breakpoints();
    let mut grid: Vec<V> = extra.to_vec();
    grid.extend(bps.iter().cloned());
    let two = V::one() + V::one();
    grid.extend(bps.windows(2).map(|w| (w[0].clone() + w[1].clone()) / two.clone()));
    grid.push(V::zero());
    grid.push(V::one());
    grid.sort_by(|a, b| a.partial_cmp(b).expect("alphas are comparable"));
    grid.dedup();
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Row<V> {
    pub alpha: V,
    pub cpr: Event,
    pub cut: Event,
    pub intersection: Event,
}

impl<V> Prop1Row<V> {
    pub fn agrees(&self) -> bool {
        self.cpr == self.cut && self.cut == self.intersection
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Report<V> {
    pub rows: Vec<Prop1Row<V>>,
}

impl<V> Prop1Report<V> {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(Prop1Row::agrees)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Prop1Row<V>> {
        self.rows.iter().filter(|r| !r.agrees())
    }
}

/// Compares the three region constructions on the sweep grid. Alphas
/// outside `[0, 1]` are dropped.
pub fn prop1_check<V: Value>(c: &Contour<V>, alphas: &[V]) -> Result<Prop1Report<V>> {
    if !c.is_consonant() {
        return Err(Error::NonConsonantContour { max: c.max().render() });
    }
    check_enumerable(c.len())?;
    let in_range: Vec<V> = alphas.iter().filter(|a| **a >= V::zero() && **a <= V::one()).cloned().collect();
    let rows = alpha_sweep(c, &in_range)
        .into_par_iter()
        .map(|alpha| {
            Ok(Prop1Row {
                cpr: cpr(c, &alpha)?.event,
                cut: ihdr_cut(c, &alpha)?.event,
                intersection: ihdr_intersection(c, &alpha)?.event,
                alpha,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Prop1Report { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inclusion {
    Equal,
    /// First region strictly inside the second.
    Subset,
    Superset,
    Incomparable,
}

pub fn inclusion(a: &Event, b: &Event) -> Inclusion {
    match (a.is_subset(b), b.is_subset(a)) {
        (true, true) => Inclusion::Equal,
        (true, false) => Inclusion::Subset,
        (false, true) => Inclusion::Superset,
        (false, false) => Inclusion::Incomparable,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureComparison {
    pub alpha: Rational,
    pub region1: Event,
    pub region2: Event,
    pub size1: f64,
    pub size2: f64,
    pub relation: Inclusion,
}

/// CPRs of two nonconformity measures on the same data and candidates.
/// `candidates` must enumerate `space` in order.
pub fn compare_measures<Y, M1, M2>(
    data: &[Y],
    candidates: &[Y],
    space: &OutcomeSpace,
    psi1: &M1,
    psi2: &M2,
    alpha: &Rational,
) -> Result<MeasureComparison>
where
    Y: Clone + Send + Sync,
    M1: NonconformityMeasure<Y>,
    M2: NonconformityMeasure<Y>,
{
    if candidates.len() != space.size() {
        return Err(Error::SpaceMismatch { event: candidates.len(), space: space.size() });
    }
    let region1 = cpr(&transduce(data, candidates, psi1)?, alpha)?.event;
    let region2 = cpr(&transduce(data, candidates, psi2)?, alpha)?.event;
    Ok(MeasureComparison {
        alpha: alpha.clone(),
        size1: space.event_size(&region1),
        size2: space.event_size(&region2),
        relation: inclusion(&region1, &region2),
        region1,
        region2,
    })
}
