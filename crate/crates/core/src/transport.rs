//! 2-Wasserstein distances in one dimension.
//!
//! On the real line the optimal coupling of two laws is the comonotone one,
//! `(F_X^-1(U), F_Y^-1(U))` for a single uniform `U`, so
//!
//! ```text
//! W2(X, Y)^2 = int_0^1 (F_X^-1(t) - F_Y^-1(t))^2 dt.
//! ```
//!
//! For discrete laws both quantile functions are step functions and the
//! integral is a finite sum over the merged breakpoints ([`w2_discrete`]).
//! Against the standard normal each atom's level interval is integrated in
//! closed form ([`w2_to_gaussian`]). The brute-force and Monte Carlo
//! estimators exist to check those two.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::DiscreteDist;
use crate::error::{Error, Result};
use crate::gaussian;
use crate::numeric::KahanSum;

/// Breakpoints of the two cumulative-weight tables closer than this are
/// treated as one.
pub const LEVEL_TIE_TOLERANCE: f64 = 1e-12;

/// Largest refined support accepted by the brute-force oracles (8! assignments).
pub const BRUTE_FORCE_MAX_ATOMS: usize = 8;

const NEAR_RATIONAL_TOLERANCE: f64 = 1e-9;
const BOOTSTRAP_RESAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactDiscrete,
    ExactGaussian,
    BruteForce,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactDiscrete => "exact-discrete",
            Method::ExactGaussian => "exact-gaussian",
            Method::BruteForce => "brute-force",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

/// Quantile value of the second argument on a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SegmentValue {
    Atom(f64),
    Gaussian(GaussianMarker),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaussianMarker {
    #[serde(rename = "gaussian")]
    Gaussian,
}

/// A level interval `(t_lo, t_hi]` on which the first quantile function is
/// constant (and the second too, unless it is the Gaussian one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileSegment {
    pub t_lo: f64,
    pub t_hi: f64,
    pub left_value: f64,
    pub right_value: SegmentValue,
}

impl QuantileSegment {
    pub fn mass(&self) -> f64 {
        self.t_hi - self.t_lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct W2Report {
    pub distance: f64,
    pub squared_distance: f64,
    pub method: Method,
    pub error_bound: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<QuantileSegment>,
}

impl W2Report {
    fn exact(squared: f64, method: Method, segments: Vec<QuantileSegment>) -> Self {
        let squared = squared.max(0.0);
        Self {
            distance: squared.sqrt(),
            squared_distance: squared,
            method,
            error_bound: 0.0,
            segments,
        }
    }

    /// Copy without the segment list.
    pub fn summary(&self) -> Self {
        Self {
            segments: Vec::new(),
            ..self.clone()
        }
    }
}

/// A finitely supported joint law given as `(mass, x, y)` triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub pairs: Vec<(f64, f64, f64)>,
}

impl Coupling {
    /// `E[(X - Y)^2]`.
    pub fn cost(&self) -> f64 {
        let mut s = KahanSum::new();
        for &(m, x, y) in &self.pairs {
            s.add(m * (x - y) * (x - y));
        }
        s.value()
    }

    /// `E[XY]`.
    pub fn correlation(&self) -> f64 {
        let mut s = KahanSum::new();
        for &(m, x, y) in &self.pairs {
            s.add(m * x * y);
        }
        s.value()
    }

    /// Largest per-atom deviation of the two marginals from `a` and `b`.
    pub fn marginal_error(&self, a: &DiscreteDist, b: &DiscreteDist) -> f64 {
        fn side(d: &DiscreteDist, pts: impl Iterator<Item = (f64, f64)>) -> f64 {
            let mut mass = vec![0.0; d.len()];
            let mut stray = 0.0f64;
            for (m, v) in pts {
                match d.atoms().iter().position(|a| a.position == v) {
                    Some(i) => mass[i] += m,
                    None => stray += m,
                }
            }
            d.weights()
                .zip(mass)
                .map(|(w, m)| (w - m).abs())
                .fold(stray, f64::max)
        }
        side(a, self.pairs.iter().map(|p| (p.0, p.1))).max(side(b, self.pairs.iter().map(|p| (p.0, p.2))))
    }
}

/// Common refinement of the two level tables into segments.
pub fn quantile_segments(a: &DiscreteDist, b: &DiscreteDist) -> Vec<QuantileSegment> {
    let (la, lb) = (a.levels(), b.levels());
    let (xa, xb) = (a.atoms(), b.atoms());
    let mut segments = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut t = 0.0;
    loop {
        let (ca, cb) = (la[i], lb[j]);
        let next = if (ca - cb).abs() <= LEVEL_TIE_TOLERANCE {
            ca.max(cb)
        } else {
            ca.min(cb)
        };
        if next > t {
            segments.push(QuantileSegment {
                t_lo: t,
                t_hi: next,
                left_value: xa[i].position,
                right_value: SegmentValue::Atom(xb[j].position),
            });
            t = next;
        }
        let (last_a, last_b) = (i + 1 == la.len(), j + 1 == lb.len());
        if last_a && last_b {
            break;
        }
        // whichever table sits at `next` moves on; ties move both
        let adv_a = !last_a && (ca - next).abs() <= LEVEL_TIE_TOLERANCE;
        let adv_b = !last_b && (cb - next).abs() <= LEVEL_TIE_TOLERANCE;
        debug_assert!(adv_a || adv_b);
        i += usize::from(adv_a);
        j += usize::from(adv_b);
    }
    segments
}

/// Exact `W2(a, b)` between two discrete laws.
pub fn w2_discrete(a: &DiscreteDist, b: &DiscreteDist) -> W2Report {
    let segments = quantile_segments(a, b);
    let mut sq = KahanSum::new();
    for s in &segments {
        if let SegmentValue::Atom(y) = s.right_value {
            sq.add(s.mass() * (s.left_value - y).powi(2));
        }
    }
    W2Report::exact(sq.value(), Method::ExactDiscrete, segments)
}

/// Exact `W2(d, Z)` for standard normal `Z`.
///
/// `error_bound` propagates [`gaussian::QUANTILE_TOLERANCE`] through the
/// interior breakpoints.
pub fn w2_to_gaussian(d: &DiscreteDist) -> W2Report {
    let mut sq = KahanSum::new();
    let mut sq_err = 0.0;
    let mut segments = Vec::with_capacity(d.len());
    let atoms = d.atoms();
    // (level, phi(z), z phi(z)) at the lower end of the current segment
    let mut lo = (0.0, 0.0, 0.0);
    for (k, (atom, &level)) in atoms.iter().zip(d.levels()).enumerate() {
        let x = atom.position;
        let hi = if level < 1.0 {
            let z = gaussian::quantile_unchecked(level);
            let p = gaussian::pdf(z);
            if k + 1 < atoms.len() {
                // d(squared)/dz at an interior breakpoint is 2 z phi(z) (x_{k+1} - x_k)
                sq_err += 2.0 * (z * p).abs() * (atoms[k + 1].position - x);
            }
            (level, p, z * p)
        } else {
            (1.0, 0.0, 0.0)
        };
        let width = hi.0 - lo.0;
        let pm1 = lo.1 - hi.1;
        let pm2 = width - (hi.2 - lo.2);
        sq.add(x * x * width - 2.0 * x * pm1 + pm2);
        segments.push(QuantileSegment {
            t_lo: lo.0,
            t_hi: hi.0,
            left_value: x,
            right_value: SegmentValue::Gaussian(GaussianMarker::Gaussian),
        });
        lo = hi;
    }
    let mut report = W2Report::exact(sq.value(), Method::ExactGaussian, segments);
    report.error_bound = distance_error(report.squared_distance, sq_err * gaussian::QUANTILE_TOLERANCE);
    report
}

/// Bound on `|sqrt(s') - sqrt(s)|` given `|s' - s| <= e`.
fn distance_error(s: f64, e: f64) -> f64 {
    if s > e {
        e / (s.sqrt() + (s - e).sqrt())
    } else {
        e.sqrt()
    }
}

/// The comonotone coupling, one pair per quantile segment.
pub fn comonotone_coupling(a: &DiscreteDist, b: &DiscreteDist) -> Coupling {
    let pairs = quantile_segments(a, b)
        .into_iter()
        .map(|s| match s.right_value {
            SegmentValue::Atom(y) => (s.mass(), s.left_value, y),
            SegmentValue::Gaussian(_) => unreachable!("discrete segments only"),
        })
        .collect();
    Coupling { pairs }
}

/// Both laws as uniform laws on `n <= 8` (repeated) atoms.
fn refine(a: &DiscreteDist, b: &DiscreteDist) -> Result<(Vec<f64>, Vec<f64>)> {
    const SEARCH_LIMIT: usize = 1000;
    let fits = |n: usize| {
        a.weights().chain(b.weights()).all(|w| {
            let scaled = w * n as f64;
            (scaled - scaled.round()).abs() <= NEAR_RATIONAL_TOLERANCE * n as f64 && scaled.round() >= 1.0
        })
    };
    let n = (1..=SEARCH_LIMIT)
        .find(|&n| fits(n))
        .ok_or(Error::NotNearRational)?;
    if n > BRUTE_FORCE_MAX_ATOMS {
        return Err(Error::RefinementTooLarge {
            needed: n,
            limit: BRUTE_FORCE_MAX_ATOMS,
        });
    }
    let expand = |d: &DiscreteDist| -> Vec<f64> {
        d.atoms()
            .iter()
            .flat_map(|a| std::iter::repeat_n(a.position, (a.weight * n as f64).round() as usize))
            .collect()
    };
    Ok((expand(a), expand(b)))
}

/// Visits every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn merge_pairs(mut pairs: Vec<(f64, f64, f64)>) -> Coupling {
    pairs.sort_by(|p, q| p.1.total_cmp(&q.1).then(p.2.total_cmp(&q.2)));
    let mut out: Vec<(f64, f64, f64)> = Vec::with_capacity(pairs.len());
    for p in pairs {
        match out.last_mut() {
            Some(last) if last.1 == p.1 && last.2 == p.2 => last.0 += p.0,
            _ => out.push(p),
        }
    }
    Coupling { pairs: out }
}

/// Best assignment under `score`, maximized, as a coupling of uniform masses.
fn best_assignment(xs: &[f64], ys: &[f64], score: impl Fn(f64, f64) -> f64) -> (f64, Coupling) {
    let n = xs.len();
    let mut best = f64::NEG_INFINITY;
    let mut best_perm: Vec<usize> = (0..n).collect();
    for_each_permutation(n, |perm| {
        let mut s = 0.0;
        for (i, &p) in perm.iter().enumerate() {
            s += score(xs[p], ys[i]);
        }
        if s > best {
            best = s;
            best_perm.copy_from_slice(perm);
        }
    });
    let mass = 1.0 / n as f64;
    let pairs = best_perm
        .iter()
        .enumerate()
        .map(|(i, &p)| (mass, xs[p], ys[i]))
        .collect();
    (best / n as f64, merge_pairs(pairs))
}

/// `W2(a, b)` by exhaustive search over assignments of the refined atoms.
pub fn w2_bruteforce(a: &DiscreteDist, b: &DiscreteDist) -> Result<W2Report> {
    let (xs, ys) = refine(a, b)?;
    let (neg, _) = best_assignment(&xs, &ys, |x, y| -(x - y) * (x - y));
    Ok(W2Report::exact(-neg, Method::BruteForce, Vec::new()))
}

/// `max E[X'Y']` over couplings of the refined atoms, with a maximizer.
pub fn max_corr_bruteforce(a: &DiscreteDist, b: &DiscreteDist) -> Result<(f64, Coupling)> {
    let (xs, ys) = refine(a, b)?;
    Ok(best_assignment(&xs, &ys, |x, y| x * y))
}

fn sorted_rms(xs: &[f64], ys: &[f64]) -> f64 {
    let mut s = KahanSum::new();
    for (x, y) in xs.iter().zip(ys) {
        s.add((x - y) * (x - y));
    }
    (s.value() / xs.len() as f64).sqrt()
}

fn sort(v: &mut [f64]) {
    v.sort_unstable_by(f64::total_cmp);
}

fn monte_carlo(mut xs: Vec<f64>, mut ys: Vec<f64>, rng: &mut ChaCha8Rng) -> W2Report {
    let n = xs.len();
    let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
    let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for k in 0..n {
            bx[k] = xs[rng.random_range(0..n)];
            by[k] = ys[rng.random_range(0..n)];
        }
        sort(&mut bx);
        sort(&mut by);
        boot.push(sorted_rms(&bx, &by));
    }
    sort(&mut xs);
    sort(&mut ys);
    let distance = sorted_rms(&xs, &ys);
    let mean = boot.iter().sum::<f64>() / boot.len() as f64;
    let var = boot.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (boot.len() - 1) as f64;
    W2Report {
        distance,
        squared_distance: distance * distance,
        method: Method::MonteCarlo,
        error_bound: var.sqrt(),
        segments: Vec::new(),
    }
}

/// Sorted-sample estimate of `W2(a, b)` from `n` draws of each law.
///
/// Stream 0 of the seeded generator draws from `a`, stream 1 from `b`,
/// stream 2 drives the bootstrap. `error_bound` is the bootstrap standard
/// error over 50 resamples of both samples.
pub fn mc_w2_estimate(a: &DiscreteDist, b: &DiscreteDist, n: usize, seed: u64) -> Result<W2Report> {
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let xs = a.sample_with(&mut stream(seed, 0), n);
    let ys = b.sample_with(&mut stream(seed, 1), n);
    Ok(monte_carlo(xs, ys, &mut stream(seed, 2)))
}

/// Sorted-sample estimate of `W2(d, Z)`; normal draws by inverse transform.
pub fn mc_w2_to_gaussian(d: &DiscreteDist, n: usize, seed: u64) -> Result<W2Report> {
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let xs = d.sample_with(&mut stream(seed, 0), n);
    let mut rng = stream(seed, 1);
    let ys = (0..n)
        .map(|_| gaussian::quantile_unchecked(rng.sample(rand::distr::Open01)))
        .collect();
    Ok(monte_carlo(xs, ys, &mut stream(seed, 2)))
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
