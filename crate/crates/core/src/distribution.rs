//! Finite discrete distributions on the real line.
//!
//! A [`DiscreteDist`] is an immutable list of atoms sorted by position with
//! strictly positive weights summing to one. Every constructor funnels
//! through the same normalization step: sort, merge positions closer than
//! [`MERGE_TOLERANCE`], renormalize, and build the cumulative-weight table
//! that backs [`DiscreteDist::cdf`] and [`DiscreteDist::quantile`].

use std::cmp::Ordering;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{kahan_sum, KahanSum};

/// Positions closer than this are treated as one atom.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Accepted deviation of the raw total weight from 1 in [`DiscreteDist::new`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Default bound on `len(a) * len(b)` for a single convolution.
pub const DEFAULT_MAX_PAIRS: usize = 1 << 20;

/// Name of the generator behind [`DiscreteDist::sample`]. Independent streams
/// are obtained with `ChaCha8Rng::set_stream`.
pub const PRNG_NAME: &str = "ChaCha8Rng";

/// One point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    atoms: Vec<Atom>,
    // levels[i] = F(atoms[i].position); the last entry is exactly 1.
    levels: Vec<f64>,
}

/// Mean, variance and fourth central moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub fourth_moment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvolveConfig {
    pub max_pairs: usize,
}

impl Default for ConvolveConfig {
    fn default() -> Self {
        Self {
            max_pairs: DEFAULT_MAX_PAIRS,
        }
    }
}

impl DiscreteDist {
    /// Builds a distribution from `(position, weight)` pairs in any order.
    pub fn new<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<(f64, f64)> = atoms.into_iter().collect();
        if raw.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        for (index, &(x, w)) in raw.iter().enumerate() {
            if !x.is_finite() || !w.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if w <= 0.0 {
                return Err(Error::NonPositiveWeight { index, weight: w });
            }
        }
        let total = kahan_sum(raw.iter().map(|a| a.1));
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::WeightSum { total });
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::from_sorted(raw))
    }

    /// Point mass at `x`.
    pub fn point_mass(x: f64) -> Self {
        Self::from_sorted(vec![(x, 1.0)])
    }

    /// Uniform law on the given positions.
    pub fn uniform(positions: &[f64]) -> Result<Self> {
        let w = 1.0 / positions.len() as f64;
        Self::new(positions.iter().map(|&x| (x, w)))
    }

    /// The symmetric law on {-1, 1}.
    pub fn rademacher() -> Self {
        Self::from_sorted(vec![(-1.0, 0.5), (1.0, 0.5)])
    }

    /// Core constructor. `raw` must be sorted by position, finite, with
    /// nonnegative weights of positive total. Zero weights are dropped.
    pub(crate) fn from_sorted(raw: Vec<(f64, f64)>) -> Self {
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        // (center, mass) of the open group. The center is updated as a running
        // mean so that it stays inside the group even for subnormal weights.
        let mut group: Option<(f64, f64)> = None;
        for (x, w) in raw {
            if w <= 0.0 {
                continue;
            }
            match group {
                Some((center, mass)) if x - center < MERGE_TOLERANCE => {
                    let mass = mass + w;
                    group = Some((center + (x - center) * (w / mass), mass));
                }
                _ => {
                    if let Some(g) = group {
                        merged.push(g);
                    }
                    group = Some((x, w));
                }
            }
        }
        if let Some((center, mass)) = group {
            merged.push((center, mass));
        }
        assert!(!merged.is_empty(), "distribution with no positive mass");

        // A total within a few ulps of 1 is left alone so that construction
        // is idempotent (JSON round trips reproduce the same weights).
        let total = kahan_sum(merged.iter().map(|a| a.1));
        let scale = if (total - 1.0).abs() <= 4.0 * f64::EPSILON {
            1.0
        } else {
            total
        };
        let atoms: Vec<Atom> = merged
            .into_iter()
            .map(|(position, w)| Atom {
                position,
                weight: w / scale,
            })
            .collect();
        let mut levels = Vec::with_capacity(atoms.len());
        let mut acc = KahanSum::new();
        for a in &atoms {
            acc.add(a.weight);
            levels.push(acc.value().min(1.0));
        }
        *levels.last_mut().unwrap() = 1.0;
        Self { atoms, levels }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Cumulative weight at each atom; the last entry is 1.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.position)
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.weight)
    }

    pub fn min(&self) -> f64 {
        self.atoms[0].position
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].position
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let count = self.atoms.partition_point(|a| a.position <= x);
        if count == 0 {
            0.0
        } else {
            self.levels[count - 1]
        }
    }

    /// Generalized inverse `inf { x : F(x) >= t }` for `t` in `(0, 1)`.
    pub fn quantile(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidLevel(t));
        }
        Ok(self.quantile_unchecked(t))
    }

    pub(crate) fn quantile_unchecked(&self, t: f64) -> f64 {
        let i = self.levels.partition_point(|&c| c < t);
        self.atoms[i.min(self.atoms.len() - 1)].position
    }

    pub fn mean(&self) -> f64 {
        kahan_sum(self.atoms.iter().map(|a| a.weight * a.position))
    }

    pub fn moments(&self) -> MomentSummary {
        let mean = self.mean();
        let mut second = KahanSum::new();
        let mut fourth = KahanSum::new();
        for a in &self.atoms {
            let d2 = (a.position - mean).powi(2);
            second.add(a.weight * d2);
            fourth.add(a.weight * d2 * d2);
        }
        MomentSummary {
            mean,
            variance: second.value(),
            fourth_moment: fourth.value(),
        }
    }

    /// Law of `scale * X + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if scale == 0.0 || !scale.is_finite() || !shift.is_finite() {
            return Err(Error::ZeroScale);
        }
        let mut raw: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .map(|a| (scale * a.position + shift, a.weight))
            .collect();
        if scale < 0.0 {
            raw.reverse();
        }
        Ok(Self::from_sorted(raw))
    }

    /// Rescales to mean 0 and variance 1. Fails on point masses.
    pub fn standardize(&self) -> Result<Self> {
        let m = self.moments();
        if m.variance <= 0.0 {
            return Err(Error::NotStandardized {
                mean: m.mean,
                variance: m.variance,
            });
        }
        let s = m.variance.sqrt();
        self.affine(1.0 / s, -m.mean / s)
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.convolve_with(other, &ConvolveConfig::default())
    }

    pub fn convolve_with(&self, other: &Self, config: &ConvolveConfig) -> Result<Self> {
        let pairs = self.len().saturating_mul(other.len());
        if pairs > config.max_pairs {
            return Err(Error::SupportCapExceeded {
                pairs,
                cap: config.max_pairs,
            });
        }
        let (long, short) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let raw = if short.len() <= 8 {
            merge_shifted(long, short)
        } else {
            let mut raw = Vec::with_capacity(pairs);
            for s in &short.atoms {
                raw.extend(
                    long.atoms
                        .iter()
                        .map(|l| (l.position + s.position, l.weight * s.weight)),
                );
            }
            raw.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            raw
        };
        Ok(Self::from_sorted(raw))
    }

    /// Law of `(X + Y) / sqrt 2` for independent `X ~ self`, `Y ~ other`.
    pub fn normalized_sum(&self, other: &Self) -> Result<Self> {
        self.normalized_sum_with(other, &ConvolveConfig::default())
    }

    pub fn normalized_sum_with(&self, other: &Self, config: &ConvolveConfig) -> Result<Self> {
        self.convolve_with(other, config)?
            .affine(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }

    /// Equal-mass quantile binning into `bins` atoms.
    ///
    /// Bin `k` covers quantile levels `(k/m, (k+1)/m]` and collapses to the
    /// average of the quantile function over it, so the mean is kept and the
    /// variance can only drop. Bins landing on the same position merge.
    pub fn quantize(&self, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::ZeroBins);
        }
        let m = bins as f64;
        let mut out = Vec::with_capacity(bins);
        let mut i = 0;
        let mut prev_level = 0.0f64;
        for k in 0..bins {
            let lo = k as f64 / m;
            let hi = if k + 1 == bins { 1.0 } else { (k + 1) as f64 / m };
            let mut moment = KahanSum::new();
            let mut mass = KahanSum::new();
            loop {
                let level = self.levels[i];
                let overlap = level.min(hi) - prev_level.max(lo);
                if overlap > 0.0 {
                    moment.add(overlap * self.atoms[i].position);
                    mass.add(overlap);
                }
                if level <= hi && i + 1 < self.atoms.len() {
                    prev_level = level;
                    i += 1;
                    if level == hi {
                        break;
                    }
                } else {
                    break;
                }
            }
            let position = if mass.value() > 0.0 {
                moment.value() / mass.value()
            } else {
                self.atoms[i].position
            };
            out.push((position, 1.0 / m));
        }
        // Conditional means are nondecreasing; guard against rounding.
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::from_sorted(out))
    }

    /// `n` independent draws by inverse-transform sampling.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    pub(crate) fn sample_with<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample(Open01);
                self.quantile_unchecked(u)
            })
            .collect()
    }

    /// Fixed-support comparison of atoms, up to `tol` on positions and weights.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| (a.position - b.position).abs() <= tol && (a.weight - b.weight).abs() <= tol)
    }
}

/// Merges `short.len()` shifted copies of `long`, each already sorted.
fn merge_shifted(long: &DiscreteDist, short: &DiscreteDist) -> Vec<(f64, f64)> {
    let k = short.len();
    let n = long.len();
    let mut cursors = vec![0usize; k];
    let mut out = Vec::with_capacity(n * k);
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (j, &c) in cursors.iter().enumerate() {
            if c < n {
                let x = long.atoms[c].position + short.atoms[j].position;
                if best.is_none_or(|(_, bx)| x.total_cmp(&bx) == Ordering::Less) {
                    best = Some((j, x));
                }
            }
        }
        let Some((j, x)) = best else { break };
        out.push((x, long.atoms[cursors[j]].weight * short.atoms[j].weight));
        cursors[j] += 1;
    }
    out
}

#[derive(Serialize, Deserialize)]
struct RawDist {
    atoms: Vec<(f64, f64)>,
}

impl Serialize for DiscreteDist {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RawDist {
            atoms: self.atoms.iter().map(|a| (a.position, a.weight)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiscreteDist {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawDist::deserialize(deserializer)?;
        DiscreteDist::new(raw.atoms).map_err(serde::de::Error::custom)
    }
}

impl DiscreteDist {
    /// Parses `{"atoms": [[position, weight], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDist = serde_json::from_str(text)?;
        Self::new(raw.atoms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite atoms always serialize")
    }
}
