//! Standard normal reference `Z ~ N(0, 1)`.
//!
//! Besides density, CDF and quantile this module provides the two integrals
//! of the normal quantile function that make W2-to-Gaussian exact:
//!
//! ```text
//! int_{a}^{b} Phi^-1(t) dt   = phi(Phi^-1(a)) - phi(Phi^-1(b))
//! int_{a}^{b} Phi^-1(t)^2 dt = (b - a) - [z phi(z)]_{Phi^-1(a)}^{Phi^-1(b)}
//! ```
//!
//! Endpoints 0 and 1 are handled through the limits `phi(+-inf) = 0` and
//! `z phi(z) -> 0`; the quantile is never evaluated there.

use crate::distribution::DiscreteDist;
use crate::error::{Error, Result};

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Absolute accuracy promised by [`quantile`].
pub const QUANTILE_TOLERANCE: f64 = 1e-9;

/// Marker type for the reference law.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GaussianRef;

impl GaussianRef {
    pub const MEAN: f64 = 0.0;
    pub const VARIANCE: f64 = 1.0;
}

#[inline]
pub fn pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

#[inline]
pub fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

/// `Phi^-1(t)` for `t` in `(0, 1)`.
pub fn quantile(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidLevel(t));
    }
    Ok(quantile_unchecked(t))
}

pub(crate) fn quantile_unchecked(t: f64) -> f64 {
    if t > 0.5 {
        // 1 - t is exact on [0.5, 1]
        -lower_quantile(1.0 - t)
    } else {
        lower_quantile(t)
    }
}

fn lower_quantile(t: f64) -> f64 {
    let x = wichura_as241(t);
    // Halley step on Phi(x) - t
    let e = cdf(x) - t;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    if u.is_finite() {
        x - u / (1.0 + 0.5 * x * u)
    } else {
        x
    }
}

// Coefficients of Wichura's AS 241 (PPND16), highest degree first, as published.
#[allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]
const CENTRAL_NUM: [f64; 8] = [
    2509.080_928_730_122_7,
    33_430.575_583_588_13,
    67_265.770_927_008_7,
    45_921.953_931_549_87,
    13_731.693_765_509_461,
    1_971.590_950_306_551_4,
    133.141_667_891_784_38,
    3.387_132_872_796_366_5,
];
#[allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]
const CENTRAL_DEN: [f64; 8] = [
    5_226.495_278_852_546,
    28_729.085_735_721_943,
    39_307.895_800_092_71,
    21_213.794_301_586_597,
    5_394.196_021_424_751,
    687.187_007_492_057_9,
    42.313_330_701_600_91,
    1.0,
];
#[allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]
const NEAR_NUM: [f64; 8] = [
    7.745_450_142_783_414e-4,
    0.022_723_844_989_269_184,
    0.241_780_725_177_450_6,
    1.270_458_252_452_368_4,
    3.647_848_324_763_204_5,
    5.769_497_221_460_691,
    4.630_337_846_156_545,
    1.423_437_110_749_683_5,
];
#[allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]
const NEAR_DEN: [f64; 8] = [
    1.050_750_071_644_416_9e-9,
    5.475_938_084_995_345e-4,
    0.015_198_666_563_616_457,
    0.148_103_976_427_480_08,
    0.689_767_334_985_1,
    1.676_384_830_183_803_8,
    2.053_191_626_637_759,
    1.0,
];
#[allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]
const FAR_NUM: [f64; 8] = [
    2.010_334_399_292_288e-7,
    2.711_555_568_743_487_6e-5,
    0.001_242_660_947_388_078_4,
    0.026_532_189_526_576_124,
    0.296_560_571_828_504_9,
    1.784_826_539_917_291_3,
    5.463_784_911_164_114,
    6.657_904_643_501_103,
];
#[allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]
const FAR_DEN: [f64; 8] = [
    2.044_263_103_389_939_7e-15,
    1.421_511_758_316_446e-7,
    1.846_318_317_510_054_8e-5,
    7.868_691_311_456_133e-4,
    0.014_875_361_290_850_615,
    0.136_929_880_922_735_8,
    0.599_832_206_555_888,
    1.0,
];

#[inline]
fn horner(r: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * r + c)
}

/// Wichura's AS 241, about 1e-16 relative accuracy.
fn wichura_as241(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(r, &CENTRAL_NUM) / horner(r, &CENTRAL_DEN);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        horner(r, &NEAR_NUM) / horner(r, &NEAR_DEN)
    } else {
        let r = r - 5.0;
        horner(r, &FAR_NUM) / horner(r, &FAR_DEN)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo >= 0.0 && hi <= 1.0 && lo < hi) {
        return Err(Error::InvalidInterval { lo, hi });
    }
    Ok(())
}

/// `phi(Phi^-1(t))`, zero at both ends.
fn density_at_level(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        pdf(quantile_unchecked(t))
    }
}

/// `z phi(z)` at `z = Phi^-1(t)`, zero at both ends.
fn z_density_at_level(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let z = quantile_unchecked(t);
        z * pdf(z)
    }
}

/// `int_{lo}^{hi} Phi^-1(t) dt`.
pub fn quantile_partial_moment1(lo: f64, hi: f64) -> Result<f64> {
    check_interval(lo, hi)?;
    Ok(density_at_level(lo) - density_at_level(hi))
}

/// `int_{lo}^{hi} Phi^-1(t)^2 dt`.
pub fn quantile_partial_moment2(lo: f64, hi: f64) -> Result<f64> {
    check_interval(lo, hi)?;
    Ok((hi - lo) - (z_density_at_level(hi) - z_density_at_level(lo)))
}

/// Equal-mass discretization of `N(0, 1)` into `bins` atoms, each the
/// conditional mean of its quantile bin.
pub fn equal_mass_bins(bins: usize) -> Result<DiscreteDist> {
    if bins == 0 {
        return Err(Error::ZeroBins);
    }
    let m = bins as f64;
    let dens: Vec<f64> = (0..=bins).map(|k| density_at_level(k as f64 / m)).collect();
    let atoms: Vec<(f64, f64)> = dens.windows(2).map(|w| ((w[0] - w[1]) * m, 1.0 / m)).collect();
    Ok(DiscreteDist::from_sorted(atoms))
}
