//! The transductive conformal transducer and its consonance adjustments.
//!
//! For a bag `y^n` and a candidate `ỹ`, the candidate is appended as
//! `y_{n+1}`, every point is scored against the other `n` points with a
//! nonconformity measure, and the transducer value is the fraction of
//! scores at least as large as the candidate's own score. Values are exact
//! fractions `k / (n + 1)` with `1 <= k <= n + 1`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::{FiniteOutcomeSpace, GridOutcomeSpace, OutcomeSpace};
use crate::value::{max_value, Rational, Value};

/// Where a contour came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Raw,
    PrimeAdjusted,
    DoublePrimeAdjusted,
    Analytic,
}

/// Plausibility value per outcome, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour<V> {
    values: Vec<V>,
    provenance: Provenance,
}

impl<V: Value> Contour<V> {
    pub fn new(values: Vec<V>, provenance: Provenance) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidContour("contour has no values".into()));
        }
        if let Some(bad) = values.iter().find(|v| **v < V::zero() || **v > V::one()) {
            return Err(Error::InvalidContour(format!("value {} outside [0, 1]", bad.render())));
        }
        Ok(Self { values, provenance })
    }

    /// Contour given analytically rather than produced by a transducer.
    pub fn analytic(values: Vec<V>) -> Result<Self> {
        Self::new(values, Provenance::Analytic)
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn value(&self, index: usize) -> &V {
        &self.values[index]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn max(&self) -> &V {
        max_value(&self.values).expect("contours are non-empty")
    }

    /// `sup π = 1`, checked exactly.
    pub fn is_consonant(&self) -> bool {
        self.max().is_one()
    }

    /// Sorted distinct contour values.
    pub fn breakpoints(&self) -> Vec<V> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| a.partial_cmp(b).expect("contour values are ordered"));
        v.dedup();
        v
    }

    pub fn to_f64(&self) -> Contour<f64> {
        Contour { values: self.values.iter().map(Value::to_f64).collect(), provenance: self.provenance }
    }
}

/// A permutation-invariant score of how strange `y` is relative to a bag.
pub trait NonconformityMeasure<Y>: Sync {
    type Score: PartialOrd + Send;

    fn score(&self, rest: &[Y], y: &Y) -> Result<Self::Score>;

    /// `T_i = Ψ(bag \ {bag[i]}, bag[i])` for every element of the bag.
    fn scores(&self, bag: &[Y]) -> Result<Vec<Self::Score>>
    where
        Y: Clone,
    {
        let mut rest = Vec::with_capacity(bag.len().saturating_sub(1));
        (0..bag.len())
            .map(|i| {
                rest.clear();
                rest.extend(bag[..i].iter().cloned());
                rest.extend(bag[i + 1..].iter().cloned());
                self.score(&rest, &bag[i])
            })
            .collect()
    }
}

/// `|mean(rest) - y|`.
pub fn nonconformity_mean_abs(rest: &[f64], y: f64) -> Result<f64> {
    if rest.is_empty() {
        return Err(Error::EmptyBag);
    }
    Ok((sorted_sum(rest) / rest.len() as f64 - y).abs())
}

/// `1 - counts[y] / Σ counts`: one minus the empirical frequency of `y`.
pub fn nonconformity_one_minus_emp(counts: &[u64], y: usize) -> Result<Rational> {
    let count = *counts.get(y).ok_or_else(|| Error::UnknownLabel(format!("#{y}")))?;
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyBag);
    }
    Ok(Rational::one() - Rational::from_ratio(count, total))
}

// Summing in sorted order makes the result depend only on the multiset.
fn sorted_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// Distance of a point from the mean of the others.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanAbsDistance;

impl NonconformityMeasure<f64> for MeanAbsDistance {
    type Score = f64;

    fn score(&self, rest: &[f64], y: &f64) -> Result<f64> {
        nonconformity_mean_abs(rest, *y)
    }

    fn scores(&self, bag: &[f64]) -> Result<Vec<f64>> {
        if bag.len() < 2 {
            return Err(Error::EmptyBag);
        }
        let total = sorted_sum(bag);
        let n = (bag.len() - 1) as f64;
        Ok(bag.iter().map(|&y| ((total - y) / n - y).abs()).collect())
    }
}

/// One minus the empirical frequency of a label among the other points.
#[derive(Debug, Clone, Copy, Default)]
pub struct OneMinusEmpirical;

impl NonconformityMeasure<usize> for OneMinusEmpirical {
    type Score = Rational;

    fn score(&self, rest: &[usize], y: &usize) -> Result<Rational> {
        let width = rest.iter().copied().max().map_or(0, |m| m + 1).max(y + 1);
        let mut counts = vec![0u64; width];
        for &r in rest {
            counts[r] += 1;
        }
        nonconformity_one_minus_emp(&counts, *y)
    }

    fn scores(&self, bag: &[usize]) -> Result<Vec<Rational>> {
        if bag.len() < 2 {
            return Err(Error::EmptyBag);
        }
        let mut counts: HashMap<usize, u64> = HashMap::new();
        for &y in bag {
            *counts.entry(y).or_default() += 1;
        }
        let n = (bag.len() - 1) as u64;
        // Each point sees its own label one fewer time among the rest.
        let per_label: HashMap<usize, Rational> = counts
            .iter()
            .map(|(&label, &c)| (label, Rational::one() - Rational::new(BigInt::from(c - 1), BigInt::from(n))))
            .collect();
        Ok(bag.iter().map(|y| per_label[y].clone()).collect())
    }
}

/// Scores every point identically; its transducer is the vacuous contour.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantScore;

impl<Y: Sync> NonconformityMeasure<Y> for ConstantScore {
    type Score = u8;

    fn score(&self, _rest: &[Y], _y: &Y) -> Result<u8> {
        Ok(0)
    }
}

/// User-supplied real-valued score function.
pub struct FnMeasure<F>(pub F);

impl<Y, F> NonconformityMeasure<Y> for FnMeasure<F>
where
    F: Fn(&[Y], &Y) -> f64 + Sync,
{
    type Score = f64;

    fn score(&self, rest: &[Y], y: &Y) -> Result<f64> {
        Ok((self.0)(rest, y))
    }
}

/// Rank count `k` such that the transducer value is `k / (n + 1)`.
pub fn conformal_rank<Y, M>(data: &[Y], candidate: &Y, psi: &M) -> Result<usize>
where
    Y: Clone,
    M: NonconformityMeasure<Y> + ?Sized,
{
    if data.is_empty() {
        return Ok(1);
    }
    let mut bag = Vec::with_capacity(data.len() + 1);
    bag.extend_from_slice(data);
    bag.push(candidate.clone());
    let scores = psi.scores(&bag)?;
    let own = scores.last().expect("bag is non-empty");
    Ok(scores.iter().filter(|t| *t >= own).count())
}

/// `π(ỹ, y^n) = (n + 1)^{-1} Σ_i 1[T_i >= T_{n+1}]`.
pub fn conformal_transducer<Y, M>(data: &[Y], candidate: &Y, psi: &M) -> Result<Rational>
where
    Y: Clone,
    M: NonconformityMeasure<Y> + ?Sized,
{
    let k = conformal_rank(data, candidate, psi)?;
    Ok(Rational::from_ratio(k as u64, data.len() as u64 + 1))
}

/// Transducer evaluated at each candidate, in candidate order.
pub fn transduce<Y, M>(data: &[Y], candidates: &[Y], psi: &M) -> Result<Contour<Rational>>
where
    Y: Clone + Send + Sync,
    M: NonconformityMeasure<Y>,
{
    if candidates.is_empty() {
        return Err(Error::InvalidSpace("no candidates to evaluate".into()));
    }
    let values: Vec<Rational> = if candidates.len() >= 64 {
        candidates.par_iter().map(|c| conformal_transducer(data, c, psi)).collect::<Result<_>>()?
    } else {
        candidates.iter().map(|c| conformal_transducer(data, c, psi)).collect::<Result<_>>()?
    };
    Contour::new(values, Provenance::Raw)
}

/// Output of a transducer run over a whole prediction space.
#[derive(Debug, Clone)]
pub struct ConformalResult<Y> {
    pub data: Vec<Y>,
    pub space: OutcomeSpace,
    pub contour: Contour<Rational>,
}

impl<Y> ConformalResult<Y> {
    pub fn n(&self) -> usize {
        self.data.len()
    }
}

/// Runs the transducer on every label of a finite space. Data are label indices.
pub fn transduce_finite<M>(data: &[usize], space: &FiniteOutcomeSpace, psi: &M) -> Result<ConformalResult<usize>>
where
    M: NonconformityMeasure<usize>,
{
    if let Some(&bad) = data.iter().find(|&&y| y >= space.size()) {
        return Err(Error::UnknownLabel(format!("#{bad}")));
    }
    let candidates: Vec<usize> = (0..space.size()).collect();
    let contour = transduce(data, &candidates, psi)?;
    Ok(ConformalResult { data: data.to_vec(), space: space.clone().into(), contour })
}

/// Runs the transducer on every point of a grid.
pub fn transduce_grid<M>(data: &[f64], space: &GridOutcomeSpace, psi: &M) -> Result<ConformalResult<f64>>
where
    M: NonconformityMeasure<f64>,
{
    let candidates: Vec<f64> = space.points().collect();
    let contour = transduce(data, &candidates, psi)?;
    Ok(ConformalResult { data: data.to_vec(), space: (*space).into(), contour })
}

/// `π'(y) = π(y) / sup π`.
pub fn adjust_prime<V: Value>(c: &Contour<V>) -> Result<Contour<V>> {
    let max = c.max().clone();
    if max.is_zero() {
        return Err(Error::AllZeroContour);
    }
    let values = c.values.iter().map(|v| v.clone() / max.clone()).collect();
    Contour::new(values, Provenance::PrimeAdjusted)
}

/// `π''(y) = 1` on the argmax of π, unchanged elsewhere.
pub fn adjust_double_prime<V: Value>(c: &Contour<V>) -> Contour<V> {
    let max = c.max().clone();
    let values = c.values.iter().map(|v| if *v == max { V::one() } else { v.clone() }).collect();
    Contour { values, provenance: Provenance::DoublePrimeAdjusted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn example_data() -> Vec<usize> {
        let mut d = vec![0; 20];
        d.extend(vec![1; 30]);
        d.extend(vec![2; 50]);
        d
    }

    #[test]
    fn mean_abs_examples() {
        assert_eq!(nonconformity_mean_abs(&[2.0, 3.0], 1.0).unwrap(), 1.5);
        assert_eq!(nonconformity_mean_abs(&[5.0, 5.0, 5.0], 5.0).unwrap(), 0.0);
        assert_eq!(nonconformity_mean_abs(&[0.0, 10.0], 5.0).unwrap(), 0.0);
        assert_eq!(nonconformity_mean_abs(&[], 5.0), Err(Error::EmptyBag));
    }

    #[test]
    fn one_minus_emp_examples() {
        let counts = [20, 30, 50];
        assert_eq!(nonconformity_one_minus_emp(&counts, 0).unwrap(), q(4, 5));
        assert_eq!(nonconformity_one_minus_emp(&counts, 1).unwrap(), q(7, 10));
        assert_eq!(nonconformity_one_minus_emp(&counts, 2).unwrap(), q(1, 2));
        assert!(matches!(nonconformity_one_minus_emp(&counts, 3), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn transducer_reproduces_the_three_label_example() {
        let data = example_data();
        let psi = OneMinusEmpirical;
        assert_eq!(conformal_transducer(&data, &0, &psi).unwrap(), q(21, 101));
        assert_eq!(conformal_transducer(&data, &1, &psi).unwrap(), q(51, 101));
        assert_eq!(conformal_transducer(&data, &2, &psi).unwrap(), q(1, 1));
    }

    #[test]
    fn empty_data_gives_full_plausibility() {
        assert_eq!(conformal_transducer::<f64, _>(&[], &3.0, &MeanAbsDistance).unwrap(), q(1, 1));
        assert_eq!(conformal_transducer::<usize, _>(&[], &0, &OneMinusEmpirical).unwrap(), q(1, 1));
    }

    #[test]
    fn fast_scores_match_leave_one_out_definition() {
        let bag = vec![0usize, 1, 1, 2, 2, 2, 0, 1];
        let fast = OneMinusEmpirical.scores(&bag).unwrap();
        let slow: Vec<Rational> = (0..bag.len())
            .map(|i| {
                let mut rest = bag.clone();
                rest.remove(i);
                OneMinusEmpirical.score(&rest, &bag[i]).unwrap()
            })
            .collect();
        assert_eq!(fast, slow);

        let bag = vec![0.5, -1.25, 3.0, 2.0, 0.125];
        let fast = MeanAbsDistance.scores(&bag).unwrap();
        for (i, f) in fast.iter().enumerate() {
            let mut rest = bag.clone();
            rest.remove(i);
            let direct = nonconformity_mean_abs(&rest, bag[i]).unwrap();
            assert!((f - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn transduce_finite_contour() {
        let space = FiniteOutcomeSpace::new(["A", "B", "C"]).unwrap();
        let res = transduce_finite(&example_data(), &space, &OneMinusEmpirical).unwrap();
        assert_eq!(res.contour.values(), &[q(21, 101), q(51, 101), q(1, 1)]);
        assert_eq!(res.n(), 100);
        assert_eq!(res.contour.provenance(), Provenance::Raw);
        assert!(res.contour.is_consonant());
    }

    #[test]
    fn one_point_two_labels_by_hand() {
        // Data {A}. Candidate A: bag (A, A), both scores 1 - 1/1 = 0, rank 2 -> 1.
        // Candidate B: bag (A, B), both scores 1 - 0/1 = 1, rank 2 -> 1.
        let space = FiniteOutcomeSpace::new(["A", "B"]).unwrap();
        let res = transduce_finite(&[0], &space, &OneMinusEmpirical).unwrap();
        assert_eq!(res.contour.values(), &[q(1, 1), q(1, 1)]);
        // Data {A, A}. Candidate B: scores A: 1 - 1/2, A: 1 - 1/2, B: 1 - 0/2 = 1.
        // Only the candidate reaches its own score: 1/3. Candidate A: all 0 -> 1.
        let res = transduce_finite(&[0, 0], &space, &OneMinusEmpirical).unwrap();
        assert_eq!(res.contour.values(), &[q(1, 1), q(1, 3)]);
    }

    #[test]
    fn gaussian_grid_peaks_next_to_sample_mean() {
        use rand_distr::{Distribution, Normal};
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let data: Vec<f64> = (0..10).map(|_| normal.sample(&mut rng)).collect();
        let grid = GridOutcomeSpace::new(-4.0, 4.0, 101).unwrap();
        let res = transduce_grid(&data, &grid, &MeanAbsDistance).unwrap();
        let mean = data.iter().sum::<f64>() / data.len() as f64;
        let nearest = (0..grid.size())
            .min_by(|&a, &b| (grid.point(a) - mean).abs().total_cmp(&(grid.point(b) - mean).abs()))
            .unwrap();
        assert_eq!(res.contour.value(nearest), &q(1, 1));
        assert!(res.contour.is_consonant());
    }

    #[test]
    fn adjust_prime_examples() {
        let c = Contour::analytic(vec![0.5, 0.25]).unwrap();
        assert_eq!(adjust_prime(&c).unwrap().values(), &[1.0, 0.5]);
        let c = Contour::analytic(vec![0.2, 0.2]).unwrap();
        assert_eq!(adjust_prime(&c).unwrap().values(), &[1.0, 1.0]);
        let c = Contour::analytic(vec![q(21, 101), q(1, 1)]).unwrap();
        assert_eq!(adjust_prime(&c).unwrap().values(), c.values());
        let z = Contour::analytic(vec![0.0, 0.0]).unwrap();
        assert_eq!(adjust_prime(&z), Err(Error::AllZeroContour));
    }

    #[test]
    fn adjust_double_prime_examples() {
        let c = Contour::analytic(vec![0.5, 0.25]).unwrap();
        assert_eq!(adjust_double_prime(&c).values(), &[1.0, 0.25]);
        let c = Contour::analytic(vec![0.2, 0.2]).unwrap();
        assert_eq!(adjust_double_prime(&c).values(), &[1.0, 1.0]);
        let c = Contour::analytic(vec![q(21, 101), q(51, 101), q(1, 1)]).unwrap();
        assert_eq!(adjust_double_prime(&c).values(), c.values());
        assert_eq!(adjust_double_prime(&c).provenance(), Provenance::DoublePrimeAdjusted);
    }

    #[test]
    fn contour_validation() {
        assert!(Contour::<f64>::analytic(vec![]).is_err());
        assert!(Contour::analytic(vec![1.5]).is_err());
        assert!(Contour::analytic(vec![-0.1]).is_err());
    }

    #[test]
    fn user_supplied_measure() {
        let psi = FnMeasure(|rest: &[f64], y: &f64| rest.iter().map(|r| (r - y).abs()).fold(f64::INFINITY, f64::min));
        let data = [0.0, 1.0, 2.0, 10.0];
        // Nearest-neighbour distance; the far candidate is the strangest.
        assert_eq!(conformal_transducer(&data, &30.0, &psi).unwrap(), q(1, 5));
        assert_eq!(conformal_transducer(&data, &1.0, &psi).unwrap(), q(1, 1));
    }

    proptest! {
        #[test]
        fn permutation_invariance_labels(data in prop::collection::vec(0usize..4, 0..40), cand in 0usize..4, seed in any::<u64>()) {
            let base = conformal_transducer(&data, &cand, &OneMinusEmpirical).unwrap();
            let mut shuffled = data.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(conformal_transducer(&shuffled, &cand, &OneMinusEmpirical).unwrap(), base);
        }

        #[test]
        fn permutation_invariance_reals(data in prop::collection::vec(-50.0f64..50.0, 1..30), cand in -60.0f64..60.0, seed in any::<u64>()) {
            let base = conformal_transducer(&data, &cand, &MeanAbsDistance).unwrap();
            let mut shuffled = data.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(conformal_transducer(&shuffled, &cand, &MeanAbsDistance).unwrap(), base);
        }

        #[test]
        fn raw_values_are_rank_fractions(data in prop::collection::vec(0usize..5, 0..30), cand in 0usize..5) {
            let n = data.len() as i64;
            let v = conformal_transducer(&data, &cand, &OneMinusEmpirical).unwrap();
            let scaled = v * Rational::from_integer(BigInt::from(n + 1));
            prop_assert!(scaled.is_integer());
            let k = scaled.to_integer();
            prop_assert!(k >= BigInt::from(1) && k <= BigInt::from(n + 1));
        }

        #[test]
        fn modal_candidate_is_fully_plausible(data in prop::collection::vec(0usize..5, 1..40)) {
            let mut counts = [0usize; 5];
            for &d in &data { counts[d] += 1; }
            let mode = (0..5).max_by_key(|&i| counts[i]).unwrap();
            prop_assert_eq!(conformal_transducer(&data, &mode, &OneMinusEmpirical).unwrap(), q(1, 1));
        }

        #[test]
        fn adjustment_ordering(raw in prop::collection::vec(1u64..=20, 1..10)) {
            let c = Contour::analytic(raw.iter().map(|&k| Rational::from_ratio(k, 21)).collect()).unwrap();
            let p1 = adjust_prime(&c).unwrap();
            let p2 = adjust_double_prime(&c);
            prop_assert!(p1.is_consonant() && p2.is_consonant());
            for i in 0..c.len() {
                prop_assert!(p2.value(i) <= p1.value(i));
                prop_assert!(c.value(i) <= p2.value(i));
            }
            // π' keeps the order of values.
            for i in 0..c.len() {
                for j in 0..c.len() {
                    prop_assert_eq!(c.value(i) < c.value(j), p1.value(i) < p1.value(j));
                }
            }
        }
    }
}
