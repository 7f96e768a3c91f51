//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use w2clt::DiscreteDist;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Normal CDF straight from `erfc`.
pub fn big_phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Normal quantile by bisection; uses `-q(1 - t)` above the median so that
/// the upper tail keeps full relative precision.
pub fn normal_quantile(t: f64) -> f64 {
    if t > 0.5 {
        return -normal_quantile(1.0 - t);
    }
    let (mut lo, mut hi) = (-40.0f64, 0.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if big_phi(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let f: &dyn Fn(f64) -> f64 = &f;
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Quadrature over `[a, b]` split into unit pieces, so narrow features far
/// from the midpoint are not missed.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let pieces = ((b - a).ceil() as usize).max(1);
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| simpson(&f, a + i as f64 * h, a + (i + 1) as f64 * h, tol / pieces as f64))
        .sum()
}

const TAIL: f64 = 12.0;

/// `W2(d, N(0, 1))^2` by integrating `(x_i - z)^2 phi(z)` over each atom's
/// z-interval.
pub fn w2_to_normal_squared_by_quadrature(d: &DiscreteDist) -> f64 {
    let mut lo = -TAIL;
    let mut total = 0.0;
    let mut level = 0.0;
    for a in d.atoms() {
        level += a.weight;
        let hi = if level >= 1.0 - 1e-15 {
            TAIL
        } else {
            normal_quantile(level).min(TAIL)
        };
        let x = a.position;
        total += integrate(|z| (x - z) * (x - z) * phi(z), lo, hi, 1e-14);
        lo = hi;
    }
    total
}

/// `(B - n/2) / (sqrt(n) / 2)` for `B ~ Binomial(n, 1/2)`, as `(position, weight)`
/// pairs; weights by the ratio recursion in log space.
pub fn binomial_oracle(n: u64) -> Vec<(f64, f64)> {
    let nf = n as f64;
    let mut log_w = -nf * std::f64::consts::LN_2;
    let mut out = Vec::with_capacity(n as usize + 1);
    for i in 0..=n {
        if i > 0 {
            log_w += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        out.push(((2.0 * i as f64 - nf) / nf.sqrt(), log_w.exp()));
    }
    out
}

/// Random law with `k` atoms in `[-2, 2]` and weights bounded away from zero.
pub fn random_dist<R: Rng>(rng: &mut R, k: usize) -> DiscreteDist {
    let atoms: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.random_range(-2.0..2.0), rng.random_range(0.05..1.0)))
        .collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    DiscreteDist::new(atoms.into_iter().map(|(x, w)| (x, w / total))).unwrap()
}

/// Random law with at least two atoms, standardized.
pub fn random_standardized<R: Rng>(rng: &mut R, k: usize) -> DiscreteDist {
    loop {
        let d = random_dist(rng, k.max(2));
        if d.len() >= 2 {
            return d.standardize().unwrap();
        }
    }
}

/// Random composition of `n` into `k` positive parts.
pub fn composition<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = (1..n).collect();
    for i in 0..k - 1 {
        let j = rng.random_range(i..cuts.len());
        cuts.swap(i, j);
    }
    let mut cuts: Vec<usize> = cuts[..k - 1].to_vec();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain([n]) {
        parts.push(c - prev);
        prev = c;
    }
    parts
}

/// Law with `k` distinct atoms whose weights are multiples of `1/n`.
pub fn random_rational<R: Rng>(rng: &mut R, n: usize) -> DiscreteDist {
    let k = rng.random_range(1..=n);
    let parts = composition(rng, n, k);
    let mut xs: Vec<f64> = Vec::with_capacity(k);
    while xs.len() < k {
        let x: f64 = rng.random_range(-3.0..3.0);
        if xs.iter().all(|y| (x - y).abs() > 1e-3) {
            xs.push(x);
        }
    }
    DiscreteDist::new(xs.into_iter().zip(parts).map(|(x, p)| (x, p as f64 / n as f64))).unwrap()
}
