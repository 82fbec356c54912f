//! Imprecise highest density regions for a Poisson rate under a finite set
//! of Gamma priors.
//!
//! Each prior is updated conjugately, each posterior gives a Negative
//! Binomial predictive, and the IHDR is the smallest set of counts whose
//! lower predictive probability reaches `1 - α`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Mass every component must place on the truncated support.
pub const TRUNCATION_MASS: f64 = 1.0 - 1e-10;
/// Largest truncation point searched for.
pub const MAX_TRUNCATION: u64 = 10_000_000;
/// Exhaustive minimality check limits: result size and support size.
pub const EXHAUSTIVE_MAX_SET: usize = 20;
pub const EXHAUSTIVE_MAX_SUPPORT: usize = 25;

/// `Gamma(a, b)` in the shape-rate parametrisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub a: f64,
    pub b: f64,
}

impl GammaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let p = Self { a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.a > 0.0 && self.b > 0.0) {
            return Err(Error::InvalidGamma { shape: self.a, rate: self.b });
        }
        Ok(())
    }

    pub fn ln_density(&self, lambda: f64) -> f64 {
        self.a * self.b.ln() - ln_gamma(self.a) + (self.a - 1.0) * lambda.ln() - self.b * lambda
    }
}

/// `(a + Σ y, b + n)`.
pub fn posterior_update(prior: GammaParams, data: &[i64]) -> Result<GammaParams> {
    prior.validate()?;
    if let Some(&bad) = data.iter().find(|&&y| y < 0) {
        return Err(Error::NegativeCount(bad));
    }
    let total: i64 = data.iter().sum();
    GammaParams::new(prior.a + total as f64, prior.b + data.len() as f64)
}

/// Negative Binomial pmf with size `a` and success probability `b / (b + 1)`.
pub fn predictive_pmf(post: GammaParams, y: u64) -> f64 {
    let (a, b, y) = (post.a, post.b, y as f64);
    let ln = ln_gamma(y + a) - ln_gamma(a) - ln_gamma(y + 1.0) + a * (b / (b + 1.0)).ln() - y * (b + 1.0).ln();
    ln.exp()
}

/// Extreme predictive measures, tabulated on `0..=truncation`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveFGCS {
    posteriors: Vec<GammaParams>,
    truncation: u64,
    pmfs: Vec<Vec<f64>>,
}

impl PredictiveFGCS {
    /// Truncates at the smallest `T` where every component has CDF `>= 1 - 1e-10`.
    pub fn new(posteriors: Vec<GammaParams>) -> Result<Self> {
        if posteriors.is_empty() {
            return Err(Error::InvalidSpec("a predictive credal set needs at least one component".into()));
        }
        for p in &posteriors {
            p.validate()?;
        }
        let mut pmfs: Vec<Vec<f64>> = vec![Vec::new(); posteriors.len()];
        let mut cdfs = vec![0.0f64; posteriors.len()];
        let mut y = 0u64;
        loop {
            for ((post, pmf), cdf) in posteriors.iter().zip(&mut pmfs).zip(&mut cdfs) {
                let p = predictive_pmf(*post, y);
                pmf.push(p);
                *cdf += p;
            }
            if cdfs.iter().all(|&c| c >= TRUNCATION_MASS) {
                break;
            }
            if y == MAX_TRUNCATION {
                let mass = cdfs.iter().copied().fold(f64::INFINITY, f64::min);
                return Err(Error::TruncationInsufficient { mass });
            }
            y += 1;
        }
        Ok(Self { posteriors, truncation: y, pmfs })
    }

    /// Updates every prior on the same data.
    pub fn from_priors(priors: &[GammaParams], data: &[i64]) -> Result<Self> {
        let posts = priors.iter().map(|p| posterior_update(*p, data)).collect::<Result<Vec<_>>>()?;
        Self::new(posts)
    }

    pub fn posteriors(&self) -> &[GammaParams] {
        &self.posteriors
    }

    pub fn components(&self) -> usize {
        self.posteriors.len()
    }

    /// Largest count in the truncated support.
    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    pub fn pmf(&self, component: usize) -> &[f64] {
        &self.pmfs[component]
    }

    /// `P_j(S)` for every component; `event` must be sorted and distinct.
    fn component_probs(&self, event: &[u64]) -> Vec<f64> {
        self.pmfs.iter().map(|pmf| event.iter().map(|&y| pmf[y as usize]).sum()).collect()
    }

    fn normalise(&self, event: &[u64]) -> Result<Vec<u64>> {
        let mut e = event.to_vec();
        e.sort_unstable();
        e.dedup();
        if let Some(&y) = e.last().filter(|&&y| y > self.truncation) {
            return Err(Error::OutsideSupport { value: y, max: self.truncation });
        }
        Ok(e)
    }

    /// Probability of the event under each component.
    pub fn event_probs(&self, event: &[u64]) -> Result<Vec<f64>> {
        Ok(self.component_probs(&self.normalise(event)?))
    }
}

/// `P̲(A) = min_j P_j(A)`.
pub fn fgcs_lower_prob(fgcs: &PredictiveFGCS, event: &[u64]) -> Result<f64> {
    Ok(fgcs.event_probs(event)?.into_iter().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsaIhdr {
    pub alpha: f64,
    /// The region, sorted.
    pub support: Vec<u64>,
    /// Shortest prefix of the α-independent ranking reaching `1 - α`, sorted.
    /// Nested across α, unlike `support`.
    pub greedy_prefix: Vec<u64>,
    pub component_probs: Vec<f64>,
    pub lower_prob: f64,
    /// `true` when no smaller set reaches `1 - α`, checked exhaustively.
    pub exhaustive_verified: bool,
    pub truncation: u64,
}

/// Smallest-cardinality set with `min_j P_j(S) >= 1 - α`.
///
/// Greedy addition in decreasing order of `min_j p_j(y)`, then drops and
/// two-for-one swaps until neither applies. When the result has at most 20
/// counts on a support of at most 25, every smaller set is checked.
pub fn bsa_ihdr(fgcs: &PredictiveFGCS, alpha: f64) -> Result<BsaIhdr> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha.to_string()));
    }
    let target = 1.0 - alpha;
    let support_len = fgcs.truncation as usize + 1;
    let covers = |set: &[u64]| {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        fgcs.component_probs(&sorted).into_iter().all(|p| p >= target)
    };

    let floor: Vec<f64> =
        (0..support_len).map(|y| fgcs.pmfs.iter().map(|p| p[y]).fold(f64::INFINITY, f64::min)).collect();
    let mut ranking: Vec<u64> = (0..support_len as u64).collect();
    ranking.sort_by(|&x, &y| floor[y as usize].total_cmp(&floor[x as usize]).then(x.cmp(&y)));

    let mut prefix = Vec::new();
    for &y in &ranking {
        prefix.push(y);
        if covers(&prefix) {
            break;
        }
    }
    let mut set = prefix.clone();
    if !covers(&set) {
        let mass = fgcs_lower_prob(fgcs, &set)?;
        return Err(Error::TruncationInsufficient { mass });
    }
    improve_locally(&mut set, support_len as u64, &covers);

    let mut exhaustive_verified = false;
    if set.len() <= EXHAUSTIVE_MAX_SET && support_len <= EXHAUSTIVE_MAX_SUPPORT {
        while let Some(smaller) = find_cover_of_size(fgcs, set.len().wrapping_sub(1), target) {
            if !covers(&smaller) {
                break;
            }
            set = smaller;
        }
        exhaustive_verified = true;
    }

    set.sort_unstable();
    prefix.sort_unstable();
    let component_probs = fgcs.component_probs(&set);
    let lower_prob = component_probs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(BsaIhdr {
        alpha,
        support: set,
        greedy_prefix: prefix,
        component_probs,
        lower_prob,
        exhaustive_verified,
        truncation: fgcs.truncation,
    })
}

fn improve_locally(set: &mut Vec<u64>, support_len: u64, covers: &impl Fn(&[u64]) -> bool) {
    loop {
        // Drop a single element.
        if let Some(i) = (0..set.len()).find(|&i| {
            let mut trial = set.clone();
            trial.remove(i);
            covers(&trial)
        }) {
            set.remove(i);
            continue;
        }
        // Replace two elements by one outside the set.
        let outside: Vec<u64> = (0..support_len).filter(|y| !set.contains(y)).collect();
        let mut swapped = false;
        'search: for i in 0..set.len() {
            for j in i + 1..set.len() {
                for &o in &outside {
                    let mut trial: Vec<u64> =
                        set.iter().enumerate().filter(|&(k, _)| k != i && k != j).map(|(_, &y)| y).collect();
                    trial.push(o);
                    if covers(&trial) {
                        *set = trial;
                        swapped = true;
                        break 'search;
                    }
                }
            }
        }
        if !swapped {
            return;
        }
    }
}

/// Some set of exactly `size` counts reaching `target`. Coverage is monotone
/// under inclusion, so this also settles every smaller size.
fn find_cover_of_size(fgcs: &PredictiveFGCS, size: usize, target: f64) -> Option<Vec<u64>> {
    let n = fgcs.truncation as usize + 1;
    if size > n || size == usize::MAX {
        return None;
    }
    if size == 0 {
        return (target <= 0.0).then(Vec::new);
    }
    // Gosper's hack over n-bit masks with `size` bits set.
    let mut mask: u32 = (1u32 << size) - 1;
    let limit: u32 = 1u32 << n;
    while mask < limit {
        let members: Vec<u64> = (0..n as u64).filter(|&y| mask >> y & 1 == 1).collect();
        if fgcs.component_probs(&members).into_iter().all(|p| p >= target) {
            return Some(members);
        }
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geometric(p_success: f64) -> GammaParams {
        // a = 1 and b / (b + 1) = p.
        GammaParams::new(1.0, p_success / (1.0 - p_success)).unwrap()
    }

    /// Trapezoid rule for `∫ Poisson(y | λ) Gamma(λ | a, b) dλ`, with
    /// `λ = u^k` so the integrand is smooth at zero.
    fn integrated_pmf(post: GammaParams, y: u64) -> f64 {
        let (a, b, yf) = (post.a, post.b, y as f64);
        let k = (3.0 / a).ceil().max(1.0);
        let mean = (yf + a) / (b + 1.0);
        let sd = (yf + a).sqrt() / (b + 1.0);
        let lambda_max = mean + 40.0 * sd + 40.0 / (b + 1.0);
        let u_max = lambda_max.powf(1.0 / k);
        let constant = a * b.ln() - ln_gamma(a) - ln_gamma(yf + 1.0) + k.ln();
        let f = |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            let lambda = u.powf(k);
            (constant + (k * (yf + a) - 1.0) * u.ln() - lambda * (b + 1.0)).exp()
        };
        let steps = 200_000;
        let h = u_max / steps as f64;
        let inner: f64 = (1..steps).map(|i| f(i as f64 * h)).sum();
        h * (inner + 0.5 * (f(0.0) + f(u_max)))
    }

    #[test]
    fn posterior_update_examples() {
        assert_eq!(
            posterior_update(GammaParams::new(2.0, 1.0).unwrap(), &[3, 1]).unwrap(),
            GammaParams::new(6.0, 3.0).unwrap()
        );
        let prior = GammaParams::new(1.5, 0.5).unwrap();
        assert_eq!(posterior_update(prior, &[]).unwrap(), prior);
        assert_eq!(
            posterior_update(GammaParams::new(1.0, 1.0).unwrap(), &[0, 0, 0]).unwrap(),
            GammaParams::new(1.0, 4.0).unwrap()
        );
        assert_eq!(posterior_update(prior, &[2, -1]), Err(Error::NegativeCount(-1)));
        assert!(GammaParams::new(0.0, 1.0).is_err());
        assert!(GammaParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn posterior_density_ratio_is_constant() {
        // prior × likelihood ∝ posterior density.
        let prior = GammaParams::new(2.0, 1.0).unwrap();
        let data = [3u64, 1];
        let post = posterior_update(prior, &[3, 1]).unwrap();
        let ratio = |lambda: f64| {
            let loglik: f64 = data.iter().map(|&y| y as f64 * lambda.ln() - lambda - ln_gamma(y as f64 + 1.0)).sum();
            prior.ln_density(lambda) + loglik - post.ln_density(lambda)
        };
        let r0 = ratio(0.3);
        for lambda in [0.7, 1.0, 2.5, 6.0] {
            assert!((ratio(lambda) - r0).abs() < 1e-10);
        }
    }

    #[test]
    fn geometric_pmf() {
        let g = GammaParams::new(1.0, 1.0).unwrap();
        assert!((predictive_pmf(g, 0) - 0.5).abs() < 1e-15);
        for k in 0..40 {
            let exact = 0.5f64.powi(k as i32 + 1);
            assert!((predictive_pmf(g, k) - exact).abs() <= 1e-12 * exact);
        }
        assert!((integrated_pmf(g, 0) - 0.5).abs() < 1e-8);
        assert!((integrated_pmf(g, 3) - 0.0625).abs() < 1e-8);
    }

    #[test]
    fn truncation_is_tight_and_normalised() {
        let fgcs = PredictiveFGCS::new(vec![GammaParams::new(1.0, 1.0).unwrap()]).unwrap();
        // 1 - 2^-(T+1) >= 1 - 1e-10 first holds at T = 33.
        assert_eq!(fgcs.truncation(), 33);
        let total: f64 = fgcs.pmf(0).iter().sum();
        assert!((total - 1.0).abs() < 1e-10);

        let fgcs = PredictiveFGCS::new(vec![GammaParams::new(40.0, 0.5).unwrap(), geometric(0.5)]).unwrap();
        for j in 0..2 {
            let pmf = fgcs.pmf(j);
            let total: f64 = pmf.iter().sum();
            assert!(total >= TRUNCATION_MASS && total <= 1.0 + 1e-10);
            let before: f64 = pmf[..pmf.len() - 1].iter().sum();
            if j == 0 {
                assert!(before < TRUNCATION_MASS);
            }
        }
        assert!(PredictiveFGCS::new(vec![]).is_err());
    }

    #[test]
    fn lower_probability_examples() {
        let single = PredictiveFGCS::new(vec![geometric(0.5)]).unwrap();
        assert_eq!(fgcs_lower_prob(&single, &[0, 1]).unwrap(), single.pmf(0)[0] + single.pmf(0)[1]);
        let full: Vec<u64> = (0..=single.truncation()).collect();
        assert!(fgcs_lower_prob(&single, &full).unwrap() >= TRUNCATION_MASS);

        let two = PredictiveFGCS::new(vec![geometric(0.5), geometric(1.0 / 3.0)]).unwrap();
        assert!((fgcs_lower_prob(&two, &[0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(fgcs_lower_prob(&two, &[10_000]), Err(Error::OutsideSupport { .. })));
        assert_eq!(fgcs_lower_prob(&two, &[0, 0, 1]).unwrap(), fgcs_lower_prob(&two, &[1, 0]).unwrap());
    }

    #[test]
    fn geometric_ihdr() {
        let fgcs = PredictiveFGCS::new(vec![geometric(0.5)]).unwrap();
        let r = bsa_ihdr(&fgcs, 0.2).unwrap();
        assert_eq!(r.support, vec![0, 1, 2]);
        assert_eq!(r.greedy_prefix, vec![0, 1, 2]);
        assert!((r.lower_prob - 0.875).abs() < 1e-15);
        assert!(fgcs_lower_prob(&fgcs, &[0, 1]).unwrap() < 0.8);
        assert!(!r.exhaustive_verified);

        assert_eq!(bsa_ihdr(&fgcs, 0.999).unwrap().support, vec![0]);
        for bad in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(bsa_ihdr(&fgcs, bad), Err(Error::AlphaOutOfRange(_))));
        }
    }

    #[test]
    fn small_supports_are_verified_exhaustively() {
        // A concentrated posterior keeps the support under 25.
        let fgcs =
            PredictiveFGCS::new(vec![GammaParams::new(30.0, 30.0).unwrap(), GammaParams::new(50.0, 40.0).unwrap()])
                .unwrap();
        assert!(fgcs.truncation() < 25);
        let r = bsa_ihdr(&fgcs, 0.1).unwrap();
        assert!(r.exhaustive_verified);
        assert!(r.lower_prob >= 0.9);
        assert!(find_cover_of_size(&fgcs, r.support.len() - 1, 0.9).is_none());
    }

    #[test]
    fn local_search_beats_the_greedy_prefix() {
        // The floor ranking prefers the middle counts, but the two
        // components put their weight at opposite ends.
        let fgcs = PredictiveFGCS {
            posteriors: vec![geometric(0.5), geometric(0.5)],
            truncation: 5,
            pmfs: vec![vec![0.4, 0.15, 0.15, 0.15, 0.15, 0.0], vec![0.0, 0.15, 0.15, 0.15, 0.15, 0.4]],
        };
        let r = bsa_ihdr(&fgcs, 0.31).unwrap();
        assert_eq!(r.greedy_prefix, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(r.support.len(), 4);
        assert!(r.support.contains(&0) && r.support.contains(&5));
        assert!(r.component_probs.iter().all(|&p| p >= 0.69));
        assert!(r.exhaustive_verified);
    }

    #[test]
    fn imprecise_region_is_at_least_each_precise_hdr() {
        let priors = [GammaParams::new(2.0, 1.0).unwrap(), GammaParams::new(5.0, 2.0).unwrap()];
        let data = [3, 1, 4, 2, 2];
        let fgcs = PredictiveFGCS::from_priors(&priors, &data).unwrap();
        for alpha in [0.05, 0.1, 0.3, 0.5] {
            let r = bsa_ihdr(&fgcs, alpha).unwrap();
            assert!(r.lower_prob >= 1.0 - alpha);
            for j in 0..2 {
                let single = PredictiveFGCS::new(vec![fgcs.posteriors()[j]]).unwrap();
                let hdr = bsa_ihdr(&single, alpha).unwrap();
                assert!(hdr.support.len() <= r.support.len());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pmf_matches_numerical_integration(a in 0.5f64..20.0, b in 0.5f64..20.0, y in 0u64..=50) {
            let post = GammaParams::new(a, b).unwrap();
            prop_assert!((predictive_pmf(post, y) - integrated_pmf(post, y)).abs() < 1e-8);
        }

        #[test]
        fn lower_prob_is_monotone_and_superadditive(
            a in 0.5f64..10.0, b in 0.5f64..5.0, c in 0.5f64..10.0, d in 0.5f64..5.0,
            xs in prop::collection::btree_set(0u64..15, 0..8),
            ys in prop::collection::btree_set(0u64..15, 0..8),
        ) {
            let fgcs = PredictiveFGCS::new(vec![GammaParams::new(a, b).unwrap(), GammaParams::new(c, d).unwrap()]).unwrap();
            prop_assume!(fgcs.truncation() >= 15);
            let x: Vec<u64> = xs.iter().copied().collect();
            let union: Vec<u64> = xs.union(&ys).copied().collect();
            prop_assert!(fgcs_lower_prob(&fgcs, &x).unwrap() <= fgcs_lower_prob(&fgcs, &union).unwrap() + 1e-15);
            let y_only: Vec<u64> = ys.difference(&xs).copied().collect();
            let lhs = fgcs_lower_prob(&fgcs, &union).unwrap();
            let rhs = fgcs_lower_prob(&fgcs, &x).unwrap() + fgcs_lower_prob(&fgcs, &y_only).unwrap();
            prop_assert!(lhs >= rhs - 1e-15);
        }

        #[test]
        fn ihdr_covers_and_prefix_is_antitone(
            a in 0.5f64..10.0, b in 0.5f64..5.0, c in 0.5f64..10.0, d in 0.5f64..5.0,
            a1 in 0.01f64..0.99, a2 in 0.01f64..0.99,
        ) {
            let fgcs = PredictiveFGCS::new(vec![GammaParams::new(a, b).unwrap(), GammaParams::new(c, d).unwrap()]).unwrap();
            let (lo, hi) = (a1.min(a2), a1.max(a2));
            let r_lo = bsa_ihdr(&fgcs, lo).unwrap();
            let r_hi = bsa_ihdr(&fgcs, hi).unwrap();
            for r in [&r_lo, &r_hi] {
                prop_assert!(fgcs_lower_prob(&fgcs, &r.support).unwrap() >= 1.0 - r.alpha);
                prop_assert!(r.support.len() <= r.greedy_prefix.len());
            }
            prop_assert!(r_hi.greedy_prefix.iter().all(|y| r_lo.greedy_prefix.contains(y)));
        }
    }
}
