//! Consonant plausibility functions induced by a contour.
//!
//! `Π̄(A) = max_{y ∈ A} π(y)` and `Π̲(A) = 1 - Π̄(Aᶜ)`. Both are computed
//! lazily from the contour; only the brute-force checkers and the Möbius
//! transform materialise a `2^K` table.

use std::ops::{Add, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::outcome::{canonical_masks, check_enumerable, Event};
use crate::transducer::{Contour, Provenance};
use crate::value::{scaled_integers, Value};

fn require_consonant<V: Value>(c: &Contour<V>) -> Result<()> {
    if c.is_consonant() {
        Ok(())
    } else {
        Err(Error::NonConsonantContour { max: c.max().render() })
    }
}

fn require_matching<V: Value>(c: &Contour<V>, a: &Event) -> Result<()> {
    if a.space_size() != c.len() {
        return Err(Error::SpaceMismatch { event: a.space_size(), space: c.len() });
    }
    Ok(())
}

/// Supremum of the contour over an event, zero on the empty event.
pub(crate) fn sup_over<V: Value>(values: &[V], indices: &[usize]) -> V {
    let mut best = V::zero();
    for &i in indices {
        if values[i] > best {
            best = values[i].clone();
        }
    }
    best
}

fn sup_over_mask<V: Value>(values: &[V], mask: u64) -> V {
    let mut best = V::zero();
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        if values[i] > best {
            best = values[i].clone();
        }
        m &= m - 1;
    }
    best
}

/// `sup π = 1`.
pub fn is_consonant<V: Value>(c: &Contour<V>) -> bool {
    c.is_consonant()
}

/// Upper probability `Π̄(A) = sup_{y ∈ A} π(y)`.
pub fn upper_prob<V: Value>(c: &Contour<V>, a: &Event) -> Result<V> {
    require_consonant(c)?;
    require_matching(c, a)?;
    Ok(sup_over(c.values(), a.indices()))
}

/// Lower probability `Π̲(A) = 1 - Π̄(Aᶜ)`.
pub fn lower_prob<V: Value>(c: &Contour<V>, a: &Event) -> Result<V> {
    require_consonant(c)?;
    require_matching(c, a)?;
    Ok(V::one() - sup_over(c.values(), a.complement().indices()))
}

/// Dual pair `(Π̄, Π̲)` over a contour already checked for consonance.
#[derive(Debug, Clone, Copy)]
pub struct UpperLowerPair<'a, V> {
    contour: &'a Contour<V>,
}

impl<'a, V: Value> UpperLowerPair<'a, V> {
    pub fn new(contour: &'a Contour<V>) -> Result<Self> {
        require_consonant(contour)?;
        Ok(Self { contour })
    }

    pub fn contour(&self) -> &'a Contour<V> {
        self.contour
    }

    pub fn space_size(&self) -> usize {
        self.contour.len()
    }

    pub fn upper(&self, a: &Event) -> Result<V> {
        require_matching(self.contour, a)?;
        Ok(sup_over(self.contour.values(), a.indices()))
    }

    pub fn lower(&self, a: &Event) -> Result<V> {
        require_matching(self.contour, a)?;
        Ok(V::one() - sup_over(self.contour.values(), a.complement().indices()))
    }

    /// `Π̄` of the event with bit mask `mask`.
    pub fn upper_mask(&self, mask: u64) -> V {
        sup_over_mask(self.contour.values(), mask)
    }

    pub fn lower_mask(&self, mask: u64) -> V {
        let full = full_mask(self.space_size());
        V::one() - sup_over_mask(self.contour.values(), full & !mask)
    }
}

pub(crate) fn full_mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Tropical (max-plus) addition over `[0, 1]`; `0` is the identity.
pub fn tropical_sum<V: Value>(values: &[V]) -> Result<V> {
    if values.is_empty() {
        return Err(Error::EmptyList);
    }
    Ok(values.iter().fold(V::zero(), |acc, v| if *v > acc { v.clone() } else { acc }))
}

/// Möbius mass over the events of a `K`-outcome space.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction<V> {
    space_size: usize,
    // Indexed by event bit mask.
    table: Vec<V>,
}

impl<V: Value> MassFunction<V> {
    /// Builds a mass function from `(event, mass)` pairs; unspecified events get 0.
    pub fn from_entries(space_size: usize, entries: &[(Event, V)]) -> Result<Self> {
        check_enumerable(space_size)?;
        let mut table = vec![V::zero(); 1 << space_size];
        for (event, mass) in entries {
            if event.space_size() != space_size {
                return Err(Error::SpaceMismatch { event: event.space_size(), space: space_size });
            }
            let m = event.mask().expect("enumerable spaces fit in a mask") as usize;
            table[m] = table[m].clone() + mass.clone();
        }
        let mf = Self { space_size, table };
        mf.validate()?;
        Ok(mf)
    }

    fn validate(&self) -> Result<()> {
        if !self.table[0].approx_eq(&V::zero()) {
            return Err(Error::InvalidSetFunction(format!("m(∅) = {}", self.table[0].render())));
        }
        for (mask, m) in self.table.iter().enumerate() {
            if *m < V::zero() - V::tolerance() {
                return Err(Error::NegativeMass {
                    event: Event::from_mask(mask as u64, self.space_size).indices().to_vec(),
                    mass: m.render(),
                });
            }
        }
        let total = self.table.iter().fold(V::zero(), |acc, m| acc + m.clone());
        if !total.approx_eq(&V::one()) {
            return Err(Error::InvalidSetFunction(format!("masses sum to {}", total.render())));
        }
        Ok(())
    }

    pub fn space_size(&self) -> usize {
        self.space_size
    }

    pub fn mass(&self, event: &Event) -> Result<V> {
        if event.space_size() != self.space_size {
            return Err(Error::SpaceMismatch { event: event.space_size(), space: self.space_size });
        }
        Ok(self.table[event.mask().expect("enumerable") as usize].clone())
    }

    /// Events with non-zero mass, by cardinality then lexicographically.
    pub fn entries(&self) -> Vec<(Event, V)> {
        canonical_masks(self.space_size)
            .expect("space size checked at construction")
            .into_iter()
            .filter(|&m| !self.table[m as usize].is_zero())
            .map(|m| (Event::from_mask(m, self.space_size), self.table[m as usize].clone()))
            .collect()
    }

    /// `bel(A) = Σ_{B ⊆ A} m(B)`.
    pub fn belief(&self, event: &Event) -> Result<V> {
        if event.space_size() != self.space_size {
            return Err(Error::SpaceMismatch { event: event.space_size(), space: self.space_size });
        }
        let a = event.mask().expect("enumerable");
        // Walk the submasks of `a`.
        let mut total = self.table[0].clone();
        let mut sub = a;
        while sub != 0 {
            total = total + self.table[sub as usize].clone();
            sub = (sub - 1) & a;
        }
        Ok(total)
    }

    /// Belief of every event, indexed by bit mask.
    pub fn belief_table(&self) -> Vec<V> {
        let mut t = self.table.clone();
        for bit in 0..self.space_size {
            let b = 1usize << bit;
            for mask in 0..t.len() {
                if mask & b != 0 {
                    t[mask] = t[mask].clone() + t[mask ^ b].clone();
                }
            }
        }
        t
    }
}

/// Möbius transform `m(A) = Σ_{B ⊆ A} (-1)^{|A - B|} bel(B)`.
///
/// Rejects inputs that are not belief functions: any mass below zero
/// (exact values) or below `-1e-12` (floating point).
pub fn mass_from_belief<V, F>(bel: F, space_size: usize) -> Result<MassFunction<V>>
where
    V: Value,
    F: Fn(&Event) -> V,
{
    check_enumerable(space_size)?;
    let size = 1usize << space_size;
    let mut t: Vec<V> = (0..size).map(|m| bel(&Event::from_mask(m as u64, space_size))).collect();
    if !t[0].approx_eq(&V::zero()) {
        return Err(Error::InvalidSetFunction(format!("bel(∅) = {}", t[0].render())));
    }
    if !t[size - 1].approx_eq(&V::one()) {
        return Err(Error::InvalidSetFunction(format!("bel(Y) = {}", t[size - 1].render())));
    }
    for bit in 0..space_size {
        let b = 1usize << bit;
        for mask in 0..size {
            if mask & b != 0 {
                t[mask] = t[mask].clone() - t[mask ^ b].clone();
            }
        }
    }
    for (mask, m) in t.iter().enumerate() {
        if *m < V::zero() - V::tolerance() {
            return Err(Error::NegativeMass {
                event: Event::from_mask(mask as u64, space_size).indices().to_vec(),
                mass: m.render(),
            });
        }
    }
    Ok(MassFunction { space_size, table: t })
}

/// Focal elements and whether they form a chain under inclusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FocalElements {
    pub events: Vec<Event>,
    pub nested: bool,
}

pub fn focal_elements<V: Value>(m: &MassFunction<V>) -> FocalElements {
    let events: Vec<Event> = m.entries().into_iter().map(|(e, _)| e).collect();
    // Sorted by cardinality, so a chain means each is contained in the next.
    let nested = events.windows(2).all(|w| w[0].is_subset(&w[1]));
    FocalElements { events, nested }
}

/// Largest space and order accepted by the brute-force capacity checkers.
pub const K_CHECK_MAX_SPACE: usize = 6;
pub const K_CHECK_MAX_ORDER: usize = 4;

/// A collection `{A, A_1..A_k}` violating the inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<V> {
    pub a: Event,
    pub parts: Vec<Event>,
    pub lhs: V,
    pub rhs: V,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CapacityCheck<V> {
    Holds,
    Violated(Witness<V>),
}

impl<V> CapacityCheck<V> {
    pub fn holds(&self) -> bool {
        matches!(self, CapacityCheck::Holds)
    }

    pub fn witness(&self) -> Option<&Witness<V>> {
        match self {
            CapacityCheck::Holds => None,
            CapacityCheck::Violated(w) => Some(w),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Inequality {
    /// `ν(A) >= Σ_I (-1)^{|I|-1} ν(∩_I A_i)` for `A_i ⊆ A`.
    Monotone,
    /// `ν(A) <= Σ_I (-1)^{|I|-1} ν(∪_I A_i)` for `A ⊆ A_i`.
    Alternating,
}

/// Brute-force k-alternating check. Enumerates every `A` and every multiset
/// of `k` supersets of `A`, in canonical order, and stops at the first
/// violation.
pub fn check_k_alternating<V, F>(nu: F, k: usize, space_size: usize) -> Result<CapacityCheck<V>>
where
    V: Value,
    F: Fn(&Event) -> V,
{
    check_k(nu, k, space_size, Inequality::Alternating)
}

/// Brute-force k-monotone check over every `A` and every multiset of `k`
/// subsets of `A`.
pub fn check_k_monotone<V, F>(nu: F, k: usize, space_size: usize) -> Result<CapacityCheck<V>>
where
    V: Value,
    F: Fn(&Event) -> V,
{
    check_k(nu, k, space_size, Inequality::Monotone)
}

fn check_k<V, F>(nu: F, k: usize, space_size: usize, kind: Inequality) -> Result<CapacityCheck<V>>
where
    V: Value,
    F: Fn(&Event) -> V,
{
    if k < 2 {
        return Err(Error::InvalidOrder(k));
    }
    if space_size > K_CHECK_MAX_SPACE || k > K_CHECK_MAX_ORDER {
        return Err(Error::BudgetExceeded { space: space_size, k });
    }
    let table: Vec<V> = (0..1u64 << space_size).map(|m| nu(&Event::from_mask(m, space_size))).collect();
    let found = match scaled_integers(&table) {
        Some(ints) => scan(&ints, 0, k, space_size, kind),
        None => scan(&table, V::tolerance(), k, space_size, kind),
    };
    Ok(match found {
        None => CapacityCheck::Holds,
        Some((a, parts)) => {
            let rhs = inclusion_exclusion(&table, &parts, kind);
            CapacityCheck::Violated(Witness {
                a: Event::from_mask(a, space_size),
                parts: parts.iter().map(|&p| Event::from_mask(p, space_size)).collect(),
                lhs: table[a as usize].clone(),
                rhs,
            })
        }
    })
}

fn inclusion_exclusion<T>(table: &[T], parts: &[u64], kind: Inequality) -> T
where
    T: Clone + Add<Output = T> + Sub<Output = T>,
{
    let k = parts.len();
    let mut plus: Option<T> = None;
    let mut minus: Option<T> = None;
    for subset in 1u32..(1 << k) {
        let combined = (0..k).filter(|i| subset >> i & 1 == 1).map(|i| parts[i]).reduce(|x, y| match kind {
            Inequality::Monotone => x & y,
            Inequality::Alternating => x | y,
        });
        let v = table[combined.expect("non-empty subset") as usize].clone();
        let slot = if subset.count_ones() % 2 == 1 { &mut plus } else { &mut minus };
        *slot = Some(match slot.take() {
            Some(acc) => acc + v,
            None => v,
        });
    }
    let plus = plus.expect("k >= 1");
    match minus {
        Some(m) => plus - m,
        None => plus,
    }
}

fn scan<T>(table: &[T], slack: T, k: usize, space_size: usize, kind: Inequality) -> Option<(u64, Vec<u64>)>
where
    T: Clone + PartialOrd + Add<Output = T> + Sub<Output = T>,
{
    let order = canonical_masks(space_size).expect("guarded by caller");
    let full = full_mask(space_size);
    for &a in &order {
        let related: Vec<u64> = order
            .iter()
            .copied()
            .filter(|&b| match kind {
                Inequality::Monotone => b & !a == 0,
                Inequality::Alternating => a & !b & full == 0,
            })
            .collect();
        let lhs = table[a as usize].clone();
        // Multisets i_1 <= ... <= i_k over `related`.
        let mut idx = vec![0usize; k];
        loop {
            let parts: Vec<u64> = idx.iter().map(|&i| related[i]).collect();
            let rhs = inclusion_exclusion(table, &parts, kind);
            let ok = match kind {
                Inequality::Monotone => rhs <= lhs.clone() + slack.clone(),
                Inequality::Alternating => lhs <= rhs + slack.clone(),
            };
            if !ok {
                return Some((a, parts));
            }
            let Some(pos) = (0..k).rev().find(|&p| idx[p] + 1 < related.len()) else {
                break;
            };
            idx[pos] += 1;
            let v = idx[pos];
            idx[pos + 1..].fill(v);
        }
    }
    None
}

/// A pair of contours `γ <= π` with `min γ = 0` and `max π = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cloud<V> {
    pub gamma: Contour<V>,
    pub pi: Contour<V>,
}

impl<V: Value> Cloud<V> {
    pub fn new(gamma: Contour<V>, pi: Contour<V>) -> Result<Self> {
        if gamma.len() != pi.len() {
            return Err(Error::InvalidContour("cloud bounds differ in length".into()));
        }
        if gamma.values().iter().zip(pi.values()).any(|(g, p)| g > p) {
            return Err(Error::InvalidContour("lower cloud bound exceeds the upper one".into()));
        }
        if !gamma.values().iter().any(Zero::is_zero) {
            return Err(Error::InvalidContour("lower cloud bound never reaches 0".into()));
        }
        if !pi.values().iter().any(One::is_one) {
            return Err(Error::InvalidContour("upper cloud bound never reaches 1".into()));
        }
        Ok(Self { gamma, pi })
    }
}

/// Cloud `[γ, π]` with `γ(y) = π(y)` when `π(y) <= 1/2` and `1 - π(y)` otherwise.
pub fn cloud_gamma<V: Value>(c: &Contour<V>) -> Result<Cloud<V>> {
    require_consonant(c)?;
    let half = V::half();
    let gamma = c.values().iter().map(|p| if *p <= half { p.clone() } else { V::one() - p.clone() }).collect();
    Cloud::new(Contour::new(gamma, Provenance::Analytic)?, c.clone())
}
