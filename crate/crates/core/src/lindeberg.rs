//! Triangular arrays of small independent terms.
//!
//! A row is a finite list of independent mean-zero laws, each supported in
//! `[-eps, eps]`, with variances summing to one. The distance of the row
//! sum to `N(0, 1)` is computed exactly (up to recorded quantization cost),
//! and a sweep over shrinking `eps` reports the largest distance seen across
//! a fixed catalog of row families.
//!
//! The catalog maximum is only a lower bound for the supremum over *all*
//! admissible rows: the sweep shows the trend, it does not compute that
//! supremum.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{ConvolveConfig, DiscreteDist};
use crate::error::{Error, Result};
use crate::numeric::{kahan_sum, splitmix64};
use crate::transport::{w2_discrete, w2_to_gaussian};

pub const DEFAULT_TERM_CAP: usize = 1_000_000;

pub const CSV_HEADER: &str = "epsilon,family,n_terms,w2,quant_error,support_size";

const BOUND_TOLERANCE: f64 = 1e-12;
const MEAN_TOLERANCE: f64 = 1e-10;
const VARIANCE_SUM_TOLERANCE: f64 = 1e-9;
// Slack for 1/eps^2 landing a hair above an integer.
const COUNT_SLACK: f64 = 1e-9;
// Lattice steps per eps for `random-bounded`; keeps exact sums under 2^16 atoms.
const LATTICE_STEPS: i64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `ceil(1/eps^2)` copies of `+-1/sqrt(n)`.
    RademacherEqual,
    /// Alternating skewed two-point terms on `{-eps, eps/2}` and symmetric
    /// ones on `+-eps/2`, rescaled to unit total variance.
    MixedScales,
    /// Seeded random three-point terms on an `eps/4` lattice, rescaled to
    /// unit total variance.
    RandomBounded,
}

impl Family {
    pub const ALL: [Family; 3] = [
        Family::RademacherEqual,
        Family::MixedScales,
        Family::RandomBounded,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::RademacherEqual => "rademacher-equal",
            Family::MixedScales => "mixed-scales",
            Family::RandomBounded => "random-bounded",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// `eps = 2^(-j/2)` for `j = 1..=10`.
pub fn default_epsilon_grid() -> Vec<f64> {
    (1..=10).map(|j| 2f64.powf(-(j as f64) / 2.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayRow {
    pub terms: Vec<DiscreteDist>,
    pub epsilon: f64,
    pub label: String,
}

impl ArrayRow {
    /// Checks the bound, mean and total-variance conditions on every term.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidEpsilon(self.epsilon));
        }
        if self.terms.is_empty() {
            return Err(Error::EmptyInput("row"));
        }
        let mut variances = Vec::with_capacity(self.terms.len());
        for (j, t) in self.terms.iter().enumerate() {
            let bound = t.min().abs().max(t.max().abs());
            if bound > self.epsilon + BOUND_TOLERANCE {
                return Err(Error::InvalidRow(format!(
                    "term {j} reaches {bound}, beyond eps = {}",
                    self.epsilon
                )));
            }
            let m = t.moments();
            if m.mean.abs() > MEAN_TOLERANCE {
                return Err(Error::InvalidRow(format!("term {j} has mean {}", m.mean)));
            }
            variances.push(m.variance);
        }
        let total = kahan_sum(variances);
        if (total - 1.0).abs() > VARIANCE_SUM_TOLERANCE {
            return Err(Error::InvalidRow(format!("variances sum to {total}")));
        }
        Ok(())
    }
}

pub fn build_row(family: Family, epsilon: f64, seed: u64) -> Result<ArrayRow> {
    build_row_with(family, epsilon, seed, DEFAULT_TERM_CAP)
}

pub fn build_row_with(family: Family, epsilon: f64, seed: u64, term_cap: usize) -> Result<ArrayRow> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let terms = match family {
        Family::RademacherEqual => rademacher_equal(epsilon, term_cap)?,
        Family::MixedScales => mixed_scales(epsilon, term_cap)?,
        Family::RandomBounded => random_bounded(epsilon, seed, term_cap)?,
    };
    let row = ArrayRow {
        terms,
        epsilon,
        label: family.name().to_string(),
    };
    row.validate()?;
    Ok(row)
}

fn count_for(target: f64, term_cap: usize) -> Result<usize> {
    let needed = (target - COUNT_SLACK).ceil().max(1.0);
    if needed > term_cap as f64 {
        return Err(Error::TermCapExceeded {
            needed: needed.min(usize::MAX as f64) as usize,
            cap: term_cap,
        });
    }
    Ok(needed as usize)
}

fn two_point(lo: f64, hi: f64, p_lo: f64) -> DiscreteDist {
    DiscreteDist::from_sorted(vec![(lo, p_lo), (hi, 1.0 - p_lo)])
}

fn rademacher_equal(epsilon: f64, term_cap: usize) -> Result<Vec<DiscreteDist>> {
    let n = count_for(1.0 / (epsilon * epsilon), term_cap)?;
    let x = (1.0 / n as f64).sqrt();
    Ok(vec![two_point(-x, x, 0.5); n])
}

fn mixed_scales(epsilon: f64, term_cap: usize) -> Result<Vec<DiscreteDist>> {
    // {-eps, eps/2} with masses (1/3, 2/3) has variance eps^2/2; +-eps/2 has eps^2/4
    let pair_variance = 0.75 * epsilon * epsilon;
    let pairs = count_for(1.0 / pair_variance, term_cap / 2)?;
    let s = (1.0 / (pairs as f64 * pair_variance)).sqrt();
    let wide = two_point(-epsilon * s, 0.5 * epsilon * s, 1.0 / 3.0);
    let narrow = two_point(-0.5 * epsilon * s, 0.5 * epsilon * s, 0.5);
    Ok((0..2 * pairs)
        .map(|j| if j % 2 == 0 { wide.clone() } else { narrow.clone() })
        .collect())
}

fn random_bounded(epsilon: f64, seed: u64, term_cap: usize) -> Result<Vec<DiscreteDist>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = epsilon / LATTICE_STEPS as f64;
    // lattice positions and weights, drawn until the total variance reaches 1
    let mut raw: Vec<[(i64, f64); 3]> = Vec::new();
    let mut total = 0.0;
    while total < 1.0 {
        if raw.len() >= term_cap {
            return Err(Error::TermCapExceeded {
                needed: raw.len() + 1,
                cap: term_cap,
            });
        }
        let (atoms, var) = random_three_point(&mut rng);
        total += var * unit * unit;
        raw.push(atoms);
    }
    let step = unit / total.sqrt();
    Ok(raw
        .into_iter()
        .map(|atoms| DiscreteDist::from_sorted(atoms.iter().map(|&(l, w)| (l as f64 * step, w)).collect()))
        .collect())
}

/// Mean-zero law on three lattice points in `[-4, 4]`; returns it with its variance.
fn random_three_point<R: Rng>(rng: &mut R) -> ([(i64, f64); 3], f64) {
    loop {
        let lo = -rng.random_range(1..=LATTICE_STEPS);
        let hi = rng.random_range(1..=LATTICE_STEPS);
        let mid = rng.random_range(lo + 1..hi);
        let p_mid: f64 = rng.random_range(0.1..0.6);
        let (lo_f, mid_f, hi_f) = (lo as f64, mid as f64, hi as f64);
        let p_hi = (-p_mid * mid_f - (1.0 - p_mid) * lo_f) / (hi_f - lo_f);
        let p_lo = 1.0 - p_mid - p_hi;
        if p_lo < 0.02 || p_hi < 0.02 {
            continue;
        }
        let var = p_lo * lo_f * lo_f + p_mid * mid_f * mid_f + p_hi * hi_f * hi_f;
        return ([(lo, p_lo), (mid, p_mid), (hi, p_hi)], var);
    }
}

/// Law of a row sum with its quantization bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSum {
    pub law: DiscreteDist,
    /// Sum of the W2 costs of every quantization along the fold.
    pub quantization_error: f64,
}

/// Folds the terms with convolution in order, quantizing to `max_support`
/// whenever the running support grows past it.
pub fn row_sum(row: &ArrayRow, max_support: usize) -> Result<RowSum> {
    row_sum_of(&row.terms, max_support, &ConvolveConfig::default())
}

pub(crate) fn row_sum_of(
    terms: &[DiscreteDist],
    max_support: usize,
    config: &ConvolveConfig,
) -> Result<RowSum> {
    if max_support == 0 {
        return Err(Error::ZeroBins);
    }
    let (first, rest) = terms.split_first().ok_or(Error::EmptyInput("row"))?;
    let mut acc = first.clone();
    let mut cost = 0.0;
    for t in rest {
        acc = acc.convolve_with(t, config)?;
        if acc.len() > max_support {
            let q = acc.quantize(max_support)?;
            // convolving both sides with the same independent term cannot
            // increase W2, so the costs simply add up
            cost += w2_discrete(&acc, &q).distance;
            acc = q;
        }
    }
    Ok(RowSum {
        law: acc,
        quantization_error: cost,
    })
}

/// `(W2(row sum, Z), accumulated quantization cost)`.
pub fn row_sum_w2(row: &ArrayRow, max_support: usize) -> Result<(f64, f64)> {
    row.validate()?;
    let s = row_sum(row, max_support)?;
    Ok((w2_to_gaussian(&s.law).distance, s.quantization_error))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub family: String,
    pub n_terms: usize,
    pub w2: f64,
    pub quant_error: f64,
    pub support_size: usize,
}

/// Catalog maximum at one epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyPoint {
    pub epsilon: f64,
    pub w2: f64,
    pub quant_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Sorted by descending epsilon; families keep their input order.
    pub entries: Vec<SweepEntry>,
}

impl SweepResult {
    /// Per-epsilon maximum of `w2` over families, in descending epsilon.
    /// `quant_error` is the largest cost among that epsilon's rows.
    pub fn proxy(&self) -> Vec<ProxyPoint> {
        let mut out: Vec<ProxyPoint> = Vec::new();
        for e in &self.entries {
            match out.last_mut() {
                Some(p) if p.epsilon == e.epsilon => {
                    p.w2 = p.w2.max(e.w2);
                    p.quant_error = p.quant_error.max(e.quant_error);
                }
                _ => out.push(ProxyPoint {
                    epsilon: e.epsilon,
                    w2: e.w2,
                    quant_error: e.quant_error,
                }),
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.entries {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
        if header != CSV_HEADER {
            return Err(Error::Parse(format!("unexpected sweep header `{header}`")));
        }
        let entries = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(Self { entries })
    }
}

/// Seed of row `index` in a sweep.
pub fn row_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

/// Evaluates every `(family, epsilon)` row in parallel. Family `i` at
/// epsilon `j` is seeded by [`row_seed`] with index `i * epsilons.len() + j`.
pub fn sweep(families: &[Family], epsilons: &[f64], max_support: usize, seed: u64) -> Result<SweepResult> {
    if families.is_empty() {
        return Err(Error::EmptyInput("families"));
    }
    if epsilons.is_empty() {
        return Err(Error::EmptyInput("epsilon grid"));
    }
    if let Some(&bad) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidEpsilon(bad));
    }
    let jobs: Vec<(usize, Family, f64)> = families
        .iter()
        .flat_map(|&f| epsilons.iter().map(move |&e| (f, e)))
        .enumerate()
        .map(|(i, (f, e))| (i, f, e))
        .collect();
    let mut entries = jobs
        .par_iter()
        .map(|&(index, family, epsilon)| {
            let row = build_row(family, epsilon, row_seed(seed, index))?;
            let sum = row_sum(&row, max_support)?;
            Ok((
                index,
                SweepEntry {
                    epsilon,
                    family: row.label,
                    n_terms: row.terms.len(),
                    w2: w2_to_gaussian(&sum.law).distance,
                    quant_error: sum.quantization_error,
                    support_size: sum.law.len(),
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let family_rank = |name: &str| families.iter().position(|f| f.name() == name);
    entries.sort_by(|(ia, a), (ib, b)| {
        b.epsilon
            .total_cmp(&a.epsilon)
            .then(family_rank(&a.family).cmp(&family_rank(&b.family)))
            .then(ia.cmp(ib))
    });
    Ok(SweepResult {
        entries: entries.into_iter().map(|(_, e)| e).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_equal_rows() {
        let row = build_row(Family::RademacherEqual, 0.5, 0).unwrap();
        assert_eq!(row.terms.len(), 4);
        for t in &row.terms {
            assert_eq!(t.positions().collect::<Vec<_>>(), vec![-0.5, 0.5]);
            assert_eq!(t.weights().collect::<Vec<_>>(), vec![0.5, 0.5]);
        }
        let row = build_row(Family::RademacherEqual, 0.1, 0).unwrap();
        assert_eq!(row.terms.len(), 100);
        assert!((row.terms[0].moments().variance - 0.01).abs() < 1e-15);
        // 2^(-5) must give exactly 1024 terms, not 1025
        let row = build_row(Family::RademacherEqual, 2f64.powf(-5.0), 0).unwrap();
        assert_eq!(row.terms.len(), 1024);
    }

    #[test]
    fn every_family_builds_valid_rows() {
        for family in Family::ALL {
            for &eps in &[1.0, 0.5, 0.2, 0.07] {
                let row = build_row(family, eps, 7).unwrap();
                row.validate().unwrap();
                assert_eq!(row.label, family.name());
            }
        }
        let r = build_row(Family::RandomBounded, 0.2, 7).unwrap();
        assert_eq!(r, build_row(Family::RandomBounded, 0.2, 7).unwrap());
        assert_ne!(r, build_row(Family::RandomBounded, 0.2, 8).unwrap());
        assert!(r.terms.iter().all(|t| t.len() == 3));
    }

    #[test]
    fn row_errors() {
        assert!(matches!("nope".parse::<Family>(), Err(Error::UnknownFamily(_))));
        assert!(matches!(
            build_row(Family::MixedScales, 0.0, 0),
            Err(Error::InvalidEpsilon(_))
        ));
        assert!(matches!(
            build_row(Family::RademacherEqual, 1e-4, 0),
            Err(Error::TermCapExceeded { .. })
        ));
        assert!(matches!(
            build_row_with(Family::RandomBounded, 0.05, 0, 10),
            Err(Error::TermCapExceeded { cap: 10, .. })
        ));
        let mut row = build_row(Family::RademacherEqual, 0.5, 0).unwrap();
        row.epsilon = 0.4;
        assert!(matches!(row.validate(), Err(Error::InvalidRow(_))));
        row.epsilon = 0.5;
        row.terms.pop();
        assert!(matches!(row.validate(), Err(Error::InvalidRow(_))));
    }

    #[test]
    fn single_rademacher_term() {
        let row = build_row(Family::RademacherEqual, 1.0, 0).unwrap();
        assert_eq!(row.terms.len(), 1);
        let (w2, q) = row_sum_w2(&row, 1 << 16).unwrap();
        assert!((w2 - 0.635_791).abs() < 1e-6);
        assert_eq!(q, 0.0);
    }

    #[test]
    fn reversed_fold_agrees() {
        for (family, cap) in [
            (Family::RandomBounded, 1 << 16),
            (Family::RandomBounded, 40),
            (Family::MixedScales, 16),
        ] {
            let row = build_row(family, 0.3, 11).unwrap();
            let fwd = row_sum(&row, cap).unwrap();
            let mut rev_terms = row.terms.clone();
            rev_terms.reverse();
            let rev = row_sum_of(&rev_terms, cap, &ConvolveConfig::default()).unwrap();
            let (a, b) = (
                w2_to_gaussian(&fwd.law).distance,
                w2_to_gaussian(&rev.law).distance,
            );
            let slack = 2.0 * fwd.quantization_error.max(rev.quantization_error) + 1e-9;
            assert!((a - b).abs() <= slack, "{family}: {a} vs {b}, slack {slack}");
        }
    }

    #[test]
    fn sweep_shapes() {
        assert!(matches!(
            sweep(&[], &[0.5], 64, 0),
            Err(Error::EmptyInput("families"))
        ));
        assert!(matches!(
            sweep(&Family::ALL, &[], 64, 0),
            Err(Error::EmptyInput(_))
        ));
        let one = sweep(&Family::ALL, &[0.5], 1 << 16, 3).unwrap();
        assert_eq!(one.entries.len(), 3);
        let names: Vec<_> = one.entries.iter().map(|e| e.family.as_str()).collect();
        assert_eq!(names, vec!["rademacher-equal", "mixed-scales", "random-bounded"]);

        let r = sweep(
            &[Family::MixedScales, Family::RademacherEqual],
            &[0.3, 0.7, 0.5],
            1 << 16,
            3,
        )
        .unwrap();
        let eps: Vec<f64> = r.entries.iter().map(|e| e.epsilon).collect();
        assert_eq!(eps, vec![0.7, 0.7, 0.5, 0.5, 0.3, 0.3]);
        assert_eq!(r.proxy().len(), 3);
        assert_eq!(
            r,
            sweep(
                &[Family::MixedScales, Family::RademacherEqual],
                &[0.3, 0.7, 0.5],
                1 << 16,
                3
            )
            .unwrap()
        );
    }

    #[test]
    fn sweep_csv_round_trip() {
        let r = sweep(&Family::ALL, &[0.7, 0.4], 1 << 16, 5).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(SweepResult::read_csv(buf.as_slice()).unwrap(), r);
    }
}
