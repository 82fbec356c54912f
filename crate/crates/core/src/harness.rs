//! Monte Carlo coverage of conformal prediction regions.
//!
//! Each trial draws `n + 1` exchangeable points, builds the transducer from
//! the first `n`, and records whether the last point falls in the CPR and in
//! the strong-cut IHDR of the (double-prime adjusted) contour.

use num_traits::One;
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::ihdr_cut;
use crate::transducer::{adjust_double_prime, transduce, ConstantScore, Contour, MeanAbsDistance, OneMinusEmpirical};
use crate::value::{rational_from_f64, Rational};

/// Minimum trial count for a pass/fail verdict.
pub const MIN_TRIALS_FOR_VERDICT: usize = 1000;
/// Points in the per-trial Gaussian candidate grid.
pub const GAUSSIAN_GRID_POINTS: usize = 201;
/// Half-width of the Gaussian grid in sample standard deviations.
pub const GAUSSIAN_GRID_SDS: f64 = 6.0;

/// An exchangeable process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProcessSpec {
    IidCategorical {
        weights: Vec<f64>,
    },
    IidGaussian {
        mu: f64,
        sigma: f64,
    },
    IidPoisson {
        lambda: f64,
    },
    /// Pólya urn over `initial.len()` colours: draw a colour with
    /// probability proportional to its count, then add one ball of it.
    PolyaUrn {
        initial: Vec<f64>,
    },
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::IidCategorical { weights } => {
                if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(Error::InvalidSpec("categorical weights must be finite and non-negative".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidSpec(format!("categorical weights sum to {total}")));
                }
            }
            ProcessSpec::IidGaussian { mu, sigma } => {
                if !mu.is_finite() || !sigma.is_finite() || *sigma <= 0.0 {
                    return Err(Error::InvalidSpec("gaussian needs finite mu and sigma > 0".into()));
                }
            }
            ProcessSpec::IidPoisson { lambda } => {
                if !lambda.is_finite() || *lambda <= 0.0 {
                    return Err(Error::InvalidSpec("poisson needs lambda > 0".into()));
                }
            }
            ProcessSpec::PolyaUrn { initial } => {
                if initial.is_empty() || initial.iter().any(|w| !w.is_finite() || *w <= 0.0) {
                    return Err(Error::InvalidSpec("polya urn needs positive initial counts".into()));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> &'static str {
        match self {
            ProcessSpec::IidCategorical { .. } => "iid-categorical",
            ProcessSpec::IidGaussian { .. } => "iid-gaussian",
            ProcessSpec::IidPoisson { .. } => "iid-poisson",
            ProcessSpec::PolyaUrn { .. } => "polya-urn",
        }
    }

    pub fn default_measure(&self) -> MeasureKind {
        match self {
            ProcessSpec::IidCategorical { .. } | ProcessSpec::PolyaUrn { .. } => MeasureKind::OneMinusEmp,
            ProcessSpec::IidGaussian { .. } | ProcessSpec::IidPoisson { .. } => MeasureKind::MeanAbs,
        }
    }
}

/// Built-in nonconformity measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    OneMinusEmp,
    MeanAbs,
    Constant,
}

impl MeasureKind {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureKind::OneMinusEmp => "one-minus-emp",
            MeasureKind::MeanAbs => "mean-abs",
            MeasureKind::Constant => "constant",
        }
    }

    fn check(&self, spec: &ProcessSpec) -> Result<()> {
        let ok = match (self, spec) {
            (MeasureKind::Constant, _) => true,
            (MeasureKind::OneMinusEmp, ProcessSpec::IidGaussian { .. }) => false,
            (MeasureKind::OneMinusEmp, _) => true,
            (MeasureKind::MeanAbs, ProcessSpec::IidGaussian { .. } | ProcessSpec::IidPoisson { .. }) => true,
            (MeasureKind::MeanAbs, _) => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleMeasure { measure: self.name().into(), family: spec.family().into() })
        }
    }
}

impl std::str::FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-minus-emp" => Ok(MeasureKind::OneMinusEmp),
            "mean-abs" => Ok(MeasureKind::MeanAbs),
            "constant" => Ok(MeasureKind::Constant),
            other => Err(Error::InvalidSpec(format!("unknown nonconformity measure {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub family: String,
    pub psi: MeasureKind,
    pub n: usize,
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
    /// Trials whose held-out point lies in the CPR.
    pub hits: usize,
    /// Trials whose held-out point lies in the strong-cut IHDR.
    pub ihdr_hits: usize,
    /// Trials where the two memberships differ.
    pub mismatches: usize,
    pub empirical_coverage: f64,
    pub standard_error: f64,
    /// `None` below [`MIN_TRIALS_FOR_VERDICT`] trials.
    pub pass: Option<bool>,
}

impl CoverageReport {
    fn new(spec: &ProcessSpec, psi: MeasureKind, n: usize, alpha: f64, trials: usize, seed: u64, tally: Tally) -> Self {
        let coverage = tally.hits as f64 / trials as f64;
        let se = (coverage * (1.0 - coverage) / trials as f64).sqrt();
        let pass = (trials >= MIN_TRIALS_FOR_VERDICT).then(|| coverage >= (1.0 - alpha) - 3.0 * se);
        Self {
            family: spec.family().into(),
            psi,
            n,
            alpha,
            trials,
            seed,
            hits: tally.hits,
            ihdr_hits: tally.ihdr_hits,
            mismatches: tally.mismatches,
            empirical_coverage: coverage,
            standard_error: se,
            pass,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    hits: usize,
    ihdr_hits: usize,
    mismatches: usize,
}

impl std::ops::Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            hits: self.hits + o.hits,
            ihdr_hits: self.ihdr_hits + o.ihdr_hits,
            mismatches: self.mismatches + o.mismatches,
        }
    }
}

/// RNG for one trial: stream `trial` of the master seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn draw_labels(spec: &ProcessSpec, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    match spec {
        ProcessSpec::IidCategorical { weights } => {
            let dist = WeightedIndex::new(weights).expect("validated weights");
            (0..count).map(|_| dist.sample(rng)).collect()
        }
        ProcessSpec::PolyaUrn { initial } => {
            let mut urn = initial.clone();
            (0..count)
                .map(|_| {
                    let total: f64 = urn.iter().sum();
                    let mut u = rng.random::<f64>() * total;
                    let mut pick = urn.len() - 1;
                    for (i, w) in urn.iter().enumerate() {
                        if u < *w {
                            pick = i;
                            break;
                        }
                        u -= w;
                    }
                    urn[pick] += 1.0;
                    pick
                })
                .collect()
        }
        ProcessSpec::IidPoisson { lambda } => {
            let dist = Poisson::new(*lambda).expect("validated lambda");
            (0..count).map(|_| dist.sample(rng) as usize).collect()
        }
        ProcessSpec::IidGaussian { .. } => unreachable!("gaussian draws are real-valued"),
    }
}

fn label_contour(data: &[usize], candidates: &[usize], psi: MeasureKind) -> Result<Contour<Rational>> {
    match psi {
        MeasureKind::OneMinusEmp => transduce(data, candidates, &OneMinusEmpirical),
        MeasureKind::Constant => transduce(data, candidates, &ConstantScore),
        MeasureKind::MeanAbs => {
            let data: Vec<f64> = data.iter().map(|&y| y as f64).collect();
            let candidates: Vec<f64> = candidates.iter().map(|&y| y as f64).collect();
            transduce(&data, &candidates, &MeanAbsDistance)
        }
    }
}

/// Candidate grid for a Gaussian trial: 201 points over mean ± 6 sd of the
/// observed points (sd = 1 when undefined or zero), then the held-out point.
pub fn gaussian_candidates(data: &[f64], held_out: f64) -> Vec<f64> {
    let n = data.len();
    let mean = if n == 0 { 0.0 } else { data.iter().sum::<f64>() / n as f64 };
    let sd = if n < 2 {
        1.0
    } else {
        let var = data.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        if var > 0.0 {
            var.sqrt()
        } else {
            1.0
        }
    };
    let (lo, hi) = (mean - GAUSSIAN_GRID_SDS * sd, mean + GAUSSIAN_GRID_SDS * sd);
    let step = (hi - lo) / (GAUSSIAN_GRID_POINTS - 1) as f64;
    let mut grid: Vec<f64> = (0..GAUSSIAN_GRID_POINTS).map(|i| lo + step * i as f64).collect();
    grid.push(held_out);
    grid
}

/// Contour over the trial's candidates and the index of the held-out point.
fn trial_contour(
    spec: &ProcessSpec,
    n: usize,
    psi: MeasureKind,
    rng: &mut ChaCha8Rng,
) -> Result<(Contour<Rational>, usize)> {
    match spec {
        ProcessSpec::IidGaussian { mu, sigma } => {
            let dist = Normal::new(*mu, *sigma).expect("validated parameters");
            let draws: Vec<f64> = (0..=n).map(|_| dist.sample(rng)).collect();
            let (data, held) = (&draws[..n], draws[n]);
            let candidates = gaussian_candidates(data, held);
            let contour = match psi {
                MeasureKind::MeanAbs => transduce(data, &candidates, &MeanAbsDistance)?,
                MeasureKind::Constant => transduce(data, &candidates, &ConstantScore)?,
                MeasureKind::OneMinusEmp => unreachable!("rejected by MeasureKind::check"),
            };
            Ok((contour, candidates.len() - 1))
        }
        ProcessSpec::IidPoisson { .. } => {
            let draws = draw_labels(spec, n + 1, rng);
            let top = *draws.iter().max().expect("n + 1 >= 1 draws");
            let candidates: Vec<usize> = (0..=top).collect();
            Ok((label_contour(&draws[..n], &candidates, psi)?, draws[n]))
        }
        ProcessSpec::IidCategorical { weights: w } | ProcessSpec::PolyaUrn { initial: w } => {
            let draws = draw_labels(spec, n + 1, rng);
            let candidates: Vec<usize> = (0..w.len()).collect();
            Ok((label_contour(&draws[..n], &candidates, psi)?, draws[n]))
        }
    }
}

fn check_alpha(alpha: f64) -> Result<Rational> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha.to_string()));
    }
    Ok(rational_from_f64(alpha).expect("finite alpha"))
}

/// Runs `trials` trials once and scores every alpha on the same draws.
fn simulate(
    spec: &ProcessSpec,
    n: usize,
    alphas: &[f64],
    psi: Option<MeasureKind>,
    trials: usize,
    seed: u64,
) -> Result<Vec<CoverageReport>> {
    spec.validate()?;
    let psi = psi.unwrap_or_else(|| spec.default_measure());
    psi.check(spec)?;
    if trials == 0 {
        return Err(Error::InvalidSpec("at least one trial is required".into()));
    }
    let exact: Vec<Rational> = alphas.iter().map(|&a| check_alpha(a)).collect::<Result<_>>()?;
    if alphas.is_empty() {
        return Ok(Vec::new());
    }
    let tallies = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let (contour, held) = trial_contour(spec, n, psi, &mut rng)?;
            let adjusted = if contour.max().is_one() { contour.clone() } else { adjust_double_prime(&contour) };
            exact
                .iter()
                .map(|alpha| {
                    let in_cpr = contour.value(held) > alpha;
                    let in_ihdr = ihdr_cut(&adjusted, alpha)?.event.contains(held);
                    Ok(Tally {
                        hits: in_cpr as usize,
                        ihdr_hits: in_ihdr as usize,
                        mismatches: (in_cpr != in_ihdr) as usize,
                    })
                })
                .collect::<Result<Vec<Tally>>>()
        })
        .try_reduce(
            || vec![Tally::default(); alphas.len()],
            |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x + y).collect()),
        )?;
    Ok(alphas
        .iter()
        .zip(tallies)
        .map(|(&alpha, tally)| CoverageReport::new(spec, psi, n, alpha, trials, seed, tally))
        .collect())
}

/// Coverage of the level-`alpha` CPR over `trials` seeded trials.
/// `psi = None` picks the family default.
pub fn run_coverage(
    spec: &ProcessSpec,
    n: usize,
    alpha: f64,
    psi: Option<MeasureKind>,
    trials: usize,
    seed: u64,
) -> Result<CoverageReport> {
    Ok(simulate(spec, n, &[alpha], psi, trials, seed)?.remove(0))
}

/// One report per `(spec, n, alpha)`, in that nesting order. Every cell uses
/// the master seed, so a cell matches the corresponding [`run_coverage`].
pub fn run_uniformity_sweep(
    specs: &[ProcessSpec],
    ns: &[usize],
    alphas: &[f64],
    psi: Option<MeasureKind>,
    trials: usize,
    seed: u64,
) -> Result<Vec<CoverageReport>> {
    let mut out = Vec::with_capacity(specs.len() * ns.len() * alphas.len());
    for spec in specs {
        for &n in ns {
            out.extend(simulate(spec, n, alphas, psi, trials, seed)?);
        }
    }
    Ok(out)
}
