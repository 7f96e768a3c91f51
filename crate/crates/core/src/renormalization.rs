//! Dyadic renormalization: `law(X) -> law((X + X') / sqrt 2)`.
//!
//! Each step takes two independent copies of the current law. Starting from
//! a standardized `X` the `k`-th iterate is the law of `S_{2^k} / sqrt(2^k)`.
//! Supports are kept below `max_support` by equal-mass quantization, and the
//! W2 cost of every quantization is written into the trace.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::distribution::{ConvolveConfig, DiscreteDist};
use crate::error::{Error, Result};
use crate::transport::{w2_discrete, w2_to_gaussian};

/// Tolerance on mean and variance for inputs that must be standardized.
pub const STANDARDIZED_TOLERANCE: f64 = 1e-9;

/// Default support cap for the iteration.
pub const DEFAULT_MAX_SUPPORT: usize = 1 << 16;

pub const CSV_HEADER: &str = "k,support_size,w2,mean,variance,fourth_moment,quant_error";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RgRecord {
    pub k: usize,
    pub support_size: usize,
    #[serde(rename = "w2")]
    pub w2_to_gaussian: f64,
    pub mean: f64,
    pub variance: f64,
    pub fourth_moment: f64,
    #[serde(rename = "quant_error")]
    pub quantization_error: f64,
}

impl RgRecord {
    fn new(k: usize, d: &DiscreteDist, quantization_error: f64) -> Self {
        let m = d.moments();
        Self {
            k,
            support_size: d.len(),
            w2_to_gaussian: w2_to_gaussian(d).distance,
            mean: m.mean,
            variance: m.variance,
            fourth_moment: m.fourth_moment,
            quantization_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RgTrace {
    pub records: Vec<RgRecord>,
    /// Law after the last iteration.
    pub last: DiscreteDist,
}

impl RgTrace {
    pub fn w2_column(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.w2_to_gaussian).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_records(&self.records, out)
    }
}

pub fn write_records<W: Write>(records: &[RgRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<RgRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected trace header `{header}`")));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Errors unless `d` has mean 0 and variance 1 within [`STANDARDIZED_TOLERANCE`].
pub fn ensure_standardized(d: &DiscreteDist) -> Result<()> {
    let m = d.moments();
    if m.mean.abs() > STANDARDIZED_TOLERANCE || (m.variance - 1.0).abs() > STANDARDIZED_TOLERANCE {
        return Err(Error::NotStandardized {
            mean: m.mean,
            variance: m.variance,
        });
    }
    Ok(())
}

/// One renormalization step; returns the new law and the W2 cost paid to
/// quantization (zero when the support stayed under `max_support`).
pub fn rg_step(d: &DiscreteDist, max_support: usize) -> Result<(DiscreteDist, f64)> {
    rg_step_with(d, max_support, &ConvolveConfig::default())
}

pub fn rg_step_with(
    d: &DiscreteDist,
    max_support: usize,
    config: &ConvolveConfig,
) -> Result<(DiscreteDist, f64)> {
    ensure_standardized(d)?;
    step(d, max_support, config)
}

fn step(d: &DiscreteDist, max_support: usize, config: &ConvolveConfig) -> Result<(DiscreteDist, f64)> {
    if max_support == 0 {
        return Err(Error::ZeroBins);
    }
    // Too many pairs: quantize the input first. Averaging two independent
    // copies does not increase W2, so that cost carries over unchanged.
    let mut cost = 0.0;
    let pre;
    let input = if d.len().saturating_mul(d.len()) > config.max_pairs {
        let bins = (config.max_pairs as f64).sqrt().floor() as usize;
        pre = d.quantize(bins.max(1))?;
        cost += w2_discrete(d, &pre).distance;
        &pre
    } else {
        d
    };
    let next = input.normalized_sum_with(input, config)?;
    if next.len() <= max_support {
        return Ok((next, cost));
    }
    let q = next.quantize(max_support)?;
    cost += w2_discrete(&next, &q).distance;
    Ok((q, cost))
}

/// Runs `iterations` steps from a standardized `d`. Record `k = 0` is `d`.
pub fn rg_trace(d: &DiscreteDist, iterations: usize, max_support: usize) -> Result<RgTrace> {
    rg_trace_with(d, iterations, max_support, &ConvolveConfig::default())
}

pub fn rg_trace_with(
    d: &DiscreteDist,
    iterations: usize,
    max_support: usize,
    config: &ConvolveConfig,
) -> Result<RgTrace> {
    ensure_standardized(d)?;
    let mut records = Vec::with_capacity(iterations + 1);
    records.push(RgRecord::new(0, d, 0.0));
    let mut current = d.clone();
    for k in 1..=iterations {
        // later iterates may drift below unit variance through quantization,
        // so only the input is checked
        let (next, cost) = step(&current, max_support, config)?;
        records.push(RgRecord::new(k, &next, cost));
        current = next;
    }
    Ok(RgTrace {
        records,
        last: current,
    })
}

/// Both sides of `W2((X+Y)/sqrt 2, Z)^2 <= (W2(X,Z)^2 + W2(Y,Z)^2) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contraction {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative up to rounding.
    pub margin: f64,
}

pub fn contraction_check(a: &DiscreteDist, b: &DiscreteDist) -> Result<Contraction> {
    contraction_check_with(a, b, &ConvolveConfig::default())
}

pub fn contraction_check_with(
    a: &DiscreteDist,
    b: &DiscreteDist,
    config: &ConvolveConfig,
) -> Result<Contraction> {
    ensure_standardized(a)?;
    ensure_standardized(b)?;
    let lhs = w2_to_gaussian(&a.normalized_sum_with(b, config)?).squared_distance;
    let rhs = 0.5 * (w2_to_gaussian(a).squared_distance + w2_to_gaussian(b).squared_distance);
    Ok(Contraction {
        lhs,
        rhs,
        margin: rhs - lhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian;

    #[test]
    fn step_examples() {
        let (d, err) = rg_step(&DiscreteDist::rademacher(), 3).unwrap();
        let s = std::f64::consts::SQRT_2;
        let want = DiscreteDist::new([(-s, 0.25), (0.0, 0.5), (s, 0.25)]).unwrap();
        assert!(d.approx_eq(&want, 1e-15));
        assert_eq!(err, 0.0);

        assert!(matches!(
            rg_step(&DiscreteDist::point_mass(0.0), 8),
            Err(Error::NotStandardized { .. })
        ));
        assert!(matches!(
            rg_step(&DiscreteDist::rademacher().affine(1.0, 0.1).unwrap(), 8),
            Err(Error::NotStandardized { .. })
        ));
    }

    #[test]
    fn step_quantizes_over_cap() {
        let (d, err) = rg_step(&DiscreteDist::rademacher(), 2).unwrap();
        assert_eq!(d.len(), 2);
        assert!(err > 0.0);
        let exact = DiscreteDist::rademacher()
            .normalized_sum(&DiscreteDist::rademacher())
            .unwrap();
        assert!((err - w2_discrete(&exact, &d).distance).abs() < 1e-15);
    }

    #[test]
    fn step_prequantizes_when_pairs_exceed_cap() {
        let d = gaussian::equal_mass_bins(64).unwrap().standardize().unwrap();
        let cfg = ConvolveConfig { max_pairs: 1024 };
        let (next, err) = rg_step_with(&d, 1 << 16, &cfg).unwrap();
        assert!(err > 0.0);
        let exact = d.normalized_sum(&d).unwrap();
        assert!(w2_discrete(&exact, &next).distance <= err + 1e-12);
    }

    #[test]
    fn trace_zero_iterations() {
        let r = DiscreteDist::rademacher();
        let t = rg_trace(&r, 0, 16).unwrap();
        assert_eq!(t.records.len(), 1);
        let rec = t.records[0];
        assert_eq!((rec.k, rec.support_size), (0, 2));
        assert_eq!((rec.mean, rec.variance, rec.fourth_moment), (0.0, 1.0, 1.0));
        assert!((rec.w2_to_gaussian - 0.635_791).abs() < 1e-6);
    }

    #[test]
    fn trace_with_quantization_obeys_triangle_budget() {
        let u = DiscreteDist::uniform(&[-1.0, 0.0, 0.3, 2.0])
            .unwrap()
            .standardize()
            .unwrap();
        let t = rg_trace(&u, 8, 64).unwrap();
        assert!(t.records.iter().any(|r| r.quantization_error > 0.0));
        for w in t.records.windows(2) {
            assert!(w[1].w2_to_gaussian <= w[0].w2_to_gaussian + w[1].quantization_error + 1e-9);
            assert!(w[1].support_size <= 64);
        }
    }

    #[test]
    fn contraction_examples() {
        let r = DiscreteDist::rademacher();
        let c = contraction_check(&r, &r).unwrap();
        assert!(c.margin > 0.01, "{c:?}");
        assert!(contraction_check(&r, &DiscreteDist::point_mass(0.0)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = rg_trace(&DiscreteDist::rademacher(), 4, 1 << 16).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().count(), 6);
        assert_eq!(read_records(buf.as_slice()).unwrap(), t.records);
        assert!(read_records("a,b\n1,2\n".as_bytes()).is_err());
    }
}
