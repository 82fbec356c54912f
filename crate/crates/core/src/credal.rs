//! The credal set `𝓜(Π̄) = {P : P(A) <= Π̄(A) for every A}` of a consonant
//! contour.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::outcome::check_enumerable;
use crate::region::cpr;
use crate::transducer::Contour;
use crate::value::{scaled_integers, Value};

/// Largest space for vertex enumeration (`K!` permutations).
pub const MAX_VERTEX_SPACE: usize = 8;

/// A probability mass function on a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector<V> {
    weights: Vec<V>,
}

impl<V: Value> ProbabilityVector<V> {
    /// Weights must be non-negative and sum to one (exactly, or within `1e-12`).
    pub fn new(weights: Vec<V>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbability("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| **w < V::zero()) {
            return Err(Error::InvalidProbability(format!("negative weight {}", w.render())));
        }
        let total = weights.iter().fold(V::zero(), |acc, w| acc + w.clone());
        if !total.approx_eq(&V::one()) {
            return Err(Error::InvalidProbability(format!("weights sum to {}", total.render())));
        }
        Ok(Self { weights })
    }

    pub fn dirac(index: usize, size: usize) -> Result<Self> {
        if index >= size {
            return Err(Error::InvalidProbability(format!("outcome {index} outside a space of {size}")));
        }
        let mut weights = vec![V::zero(); size];
        weights[index] = V::one();
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[V] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn prob(&self, indices: &[usize]) -> V {
        indices.iter().fold(V::zero(), |acc, &i| acc + self.weights[i].clone())
    }

    pub fn to_f64(&self) -> ProbabilityVector<f64> {
        ProbabilityVector { weights: self.weights.iter().map(Value::to_f64).collect() }
    }

    /// Shannon entropy in nats, with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        self.weights.iter().map(Value::to_f64).filter(|&w| w > 0.0).map(|w| w * w.recip().ln()).sum()
    }
}

fn check_inputs<V: Value>(p: &ProbabilityVector<V>, c: &Contour<V>) -> Result<()> {
    if !c.is_consonant() {
        return Err(Error::NonConsonantContour { max: c.max().render() });
    }
    if p.len() != c.len() {
        return Err(Error::WrongDimension { expected: c.len(), actual: p.len() });
    }
    Ok(())
}

/// Every event: `P(A) <= Π̄(A)`, tables built by peeling the lowest bit.
fn dominated<T>(p: &[T], pi: &[T], slack: &T) -> bool
where
    T: Clone + PartialOrd + std::ops::Add<Output = T> + num_traits::Zero,
{
    let size = 1usize << p.len();
    let mut prob = vec![T::zero(); size];
    let mut upper = vec![T::zero(); size];
    for mask in 1..size {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        prob[mask] = prob[rest].clone() + p[i].clone();
        upper[mask] = if pi[i] > upper[rest] { pi[i].clone() } else { upper[rest].clone() };
        if prob[mask] > upper[mask].clone() + slack.clone() {
            return false;
        }
    }
    true
}

/// Membership by the definition, over all `2^K` events.
pub fn in_credal_set<V: Value>(p: &ProbabilityVector<V>, c: &Contour<V>) -> Result<bool> {
    check_inputs(p, c)?;
    check_enumerable(c.len())?;
    let joint: Vec<V> = p.weights().iter().chain(c.values()).cloned().collect();
    Ok(match scaled_integers(&joint) {
        Some(ints) => {
            let (pw, pi) = ints.split_at(p.len());
            dominated(pw, pi, &0)
        }
        None => dominated(p.weights(), c.values(), &V::tolerance()),
    })
}

/// Membership through the cuts: `P(π > α) >= 1 - α` for `α` in `{0}` and
/// every contour value. Cuts are constant between consecutive values and
/// the bound is loosest at the left end, so these alphas suffice.
pub fn prop2_membership<V: Value>(p: &ProbabilityVector<V>, c: &Contour<V>) -> Result<bool> {
    check_inputs(p, c)?;
    let mut alphas = c.breakpoints();
    alphas.push(V::zero());
    for alpha in alphas {
        let cut = cpr(c, &alpha)?.event;
        let mass = p.prob(cut.indices());
        if !(V::one() - alpha).le_tol(&mass) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Vertex for an outcome ordering: `p_{σ(i)} = Π̄(σ_1..σ_i) - Π̄(σ_1..σ_{i-1})`.
fn vertex_for_order<V: Value>(values: &[V], order: &[usize]) -> Vec<V> {
    let mut weights = vec![V::zero(); values.len()];
    let mut running = V::zero();
    for &i in order {
        if values[i] > running {
            weights[i] = values[i].clone() - running.clone();
            running = values[i].clone();
        }
    }
    weights
}

fn same_point<V: Value>(a: &[V], b: &[V]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

/// Distinct vertices over all `K!` outcome orderings, in order of first
/// appearance under lexicographic permutations.
pub fn extreme_points<V: Value>(c: &Contour<V>) -> Result<Vec<ProbabilityVector<V>>> {
    if !c.is_consonant() {
        return Err(Error::NonConsonantContour { max: c.max().render() });
    }
    if c.len() > MAX_VERTEX_SPACE {
        return Err(Error::SpaceTooLarge { size: c.len(), limit: MAX_VERTEX_SPACE });
    }
    let mut out: Vec<Vec<V>> = Vec::new();
    for order in (0..c.len()).permutations(c.len()) {
        let v = vertex_for_order(c.values(), &order);
        if !out.iter().any(|w| same_point(w, &v)) {
            out.push(v);
        }
    }
    Ok(out.into_iter().map(|weights| ProbabilityVector { weights }).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerEntropy<V> {
    /// Natural-log entropy.
    pub nats: f64,
    pub minimiser: ProbabilityVector<V>,
}

/// `inf_{P ∈ 𝓜} H(P)`; entropy is concave, so the infimum sits at a vertex.
pub fn lower_entropy<V: Value>(c: &Contour<V>) -> Result<LowerEntropy<V>> {
    let vertices = extreme_points(c)?;
    let (nats, minimiser) = vertices
        .into_iter()
        .map(|v| (v.entropy(), v))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("a consonant contour has at least one vertex");
    Ok(LowerEntropy { nats, minimiser })
}

const REJECTION_TRIES: usize = 64;

fn uniform_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

fn sample_one(values: &[f64], contour: &Contour<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = values.len();
    if k <= MAX_VERTEX_SPACE {
        for _ in 0..REJECTION_TRIES {
            let w = uniform_simplex(rng, k);
            let p = ProbabilityVector { weights: w };
            if in_credal_set(&p, contour).expect("validated by caller") {
                return p.weights;
            }
        }
    }
    // Dirichlet(1) mixture of vertices for random outcome orderings.
    let mix = uniform_simplex(rng, k);
    let mut order: Vec<usize> = (0..k).collect();
    let mut out = vec![0.0; k];
    for lambda in mix {
        order.shuffle(rng);
        for (o, v) in out.iter_mut().zip(vertex_for_order(values, &order)) {
            *o += lambda * v;
        }
    }
    let total: f64 = out.iter().sum();
    out.into_iter().map(|x| x / total).collect()
}

/// `count` members of the credal set. Sample `i` uses its own ChaCha8
/// stream `i` under `seed`, so the output does not depend on thread count.
pub fn sample_credal<V: Value>(c: &Contour<V>, count: usize, seed: u64) -> Result<Vec<ProbabilityVector<f64>>> {
    if !c.is_consonant() {
        return Err(Error::NonConsonantContour { max: c.max().render() });
    }
    let contour = c.to_f64();
    let values = contour.values().to_vec();
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            ProbabilityVector { weights: sample_one(&values, &contour, &mut rng) }
        })
        .collect())
}

/// Cartesian position in the triangle with vertices `(0,0)`, `(1,0)`, `(1/2, √3/2)`.
pub fn ternary_coords<V: Value>(p: &ProbabilityVector<V>) -> Result<(f64, f64)> {
    if p.len() != 3 {
        return Err(Error::WrongDimension { expected: 3, actual: p.len() });
    }
    let w: Vec<f64> = p.weights().iter().map(Value::to_f64).collect();
    Ok((w[1] + w[2] / 2.0, w[2] * 3f64.sqrt() / 2.0))
}
