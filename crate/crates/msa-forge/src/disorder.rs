//! Seeded IID random potentials.
//!
//! Values are produced by a counter-based construction keyed on
//! `(seed, site)` rather than by sequential streams: the value at a site
//! never depends on the region being sampled, so overlapping regions
//! agree on their intersection and disjoint regions are structurally
//! independent.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::LatticePoint;

#[derive(Debug, Error, PartialEq)]
pub enum DisorderError {
    #[error("piecewise CDF needs at least two knots spanning [0, 1]")]
    BadCdfTable,
    #[error("potential value missing at site {0}")]
    MissingSite(String),
}

/// SplitMix64 finalizer. This exact mixing function is part of the
/// on-disk contract: reports freeze Monte-Carlo statistics derived from
/// it, so it must never change.
#[inline]
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

/// Stable keyed hash of a site: the SplitMix64 finalizer folded over the
/// seed, the zigzag-coded coordinates, and the coordinate count.
pub fn site_hash(seed: u64, coords: &[i64]) -> u64 {
    let mut h = mix64(seed);
    for &c in coords {
        h = mix64(h ^ zigzag(c));
    }
    mix64(h ^ coords.len() as u64)
}

/// Uniform draw in `[0, 1)` from the upper 53 bits of a hash.
#[inline]
pub fn unit_from_hash(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Derived seed for trial `t` of a Monte-Carlo run.
pub fn trial_seed(base_seed: u64, trial: u64) -> u64 {
    mix64(mix64(base_seed) ^ trial)
}

/// Marginal distribution of the potential at a single site.
///
/// Carries the Holder data of its CDF: `F(t + eps) - F(t) <=
/// holder_constant * eps^holder_exponent` for every `t` and
/// `eps in (0, 1]`. For the uniform law on `[a, b]` this holds exactly
/// with exponent 1 and constant `1/(b - a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MarginalDistribution {
    Uniform { a: f64, b: f64 },
    /// Piecewise-linear CDF through `knots`: pairs `(t, F(t))` with `F`
    /// non-decreasing from 0 to 1.
    Piecewise { knots: Vec<(f64, f64)> },
}

impl MarginalDistribution {
    pub fn uniform(a: f64, b: f64) -> Self {
        assert!(b > a, "uniform support must be nonempty");
        MarginalDistribution::Uniform { a, b }
    }

    /// Uniform on [-1, 1], the standard Anderson-model choice.
    pub fn standard() -> Self {
        Self::uniform(-1.0, 1.0)
    }

    pub fn piecewise(knots: Vec<(f64, f64)>) -> Result<Self, DisorderError> {
        if knots.len() < 2
            || knots.first().map(|k| k.1) != Some(0.0)
            || knots.last().map(|k| k.1) != Some(1.0)
            || knots.windows(2).any(|w| w[1].0 <= w[0].0 || w[1].1 < w[0].1)
        {
            return Err(DisorderError::BadCdfTable);
        }
        Ok(MarginalDistribution::Piecewise { knots })
    }

    pub fn holder_exponent(&self) -> f64 {
        1.0
    }

    pub fn holder_constant(&self) -> f64 {
        match self {
            MarginalDistribution::Uniform { a, b } => 1.0 / (b - a),
            MarginalDistribution::Piecewise { knots } => knots
                .windows(2)
                .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
                .fold(0.0, f64::max),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            MarginalDistribution::Uniform { a, b } => ((t - a) / (b - a)).clamp(0.0, 1.0),
            MarginalDistribution::Piecewise { knots } => {
                if t <= knots[0].0 {
                    return 0.0;
                }
                if t >= knots[knots.len() - 1].0 {
                    return 1.0;
                }
                let i = knots.partition_point(|k| k.0 <= t) - 1;
                let (t0, f0) = knots[i];
                let (t1, f1) = knots[i + 1];
                f0 + (f1 - f0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Inverse CDF evaluated at `u in [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            MarginalDistribution::Uniform { a, b } => a + (b - a) * u,
            MarginalDistribution::Piecewise { knots } => {
                let i = knots
                    .partition_point(|k| k.1 <= u)
                    .clamp(1, knots.len() - 1)
                    - 1;
                let (t0, f0) = knots[i];
                let (t1, f1) = knots[i + 1];
                if f1 > f0 {
                    t0 + (t1 - t0) * (u - f0) / (f1 - f0)
                } else {
                    t0
                }
            }
        }
    }

    /// Potential value at a site under this marginal for a given seed.
    pub fn value_at(&self, seed: u64, site: &LatticePoint) -> f64 {
        self.quantile(unit_from_hash(site_hash(seed, site.coords())))
    }
}

/// `F(t + eps) - F(t)`; callers may compare this against
/// `holder_constant * eps^holder_exponent`.
pub fn cdf_increment(distribution: &MarginalDistribution, t: f64, eps: f64) -> f64 {
    assert!(eps > 0.0, "eps must be positive");
    distribution.cdf(t + eps) - distribution.cdf(t)
}

/// A seeded realization of the IID potential over a finite set of
/// single-particle sites.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderSample {
    seed: u64,
    values: BTreeMap<LatticePoint, f64>,
}

impl DisorderSample {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn region(&self) -> impl Iterator<Item = &LatticePoint> {
        self.values.keys()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, site: &LatticePoint) -> Option<f64> {
        self.values.get(site).copied()
    }

    pub fn try_value(&self, site: &LatticePoint) -> Result<f64, DisorderError> {
        self.value(site)
            .ok_or_else(|| DisorderError::MissingSite(site.to_string()))
    }
}

/// Draw an IID sample over `region`. An empty region yields an empty
/// sample. Each value depends only on `(seed, site)`.
pub fn sample<I>(distribution: &MarginalDistribution, seed: u64, region: I) -> DisorderSample
where
    I: IntoIterator<Item = LatticePoint>,
{
    let values = region
        .into_iter()
        .map(|site| {
            let v = distribution.value_at(seed, &site);
            (site, v)
        })
        .collect();
    DisorderSample { seed, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Cube;
    use proptest::prelude::*;

    #[test]
    fn overlapping_regions_agree() {
        let dist = MarginalDistribution::standard();
        let left = Cube::single(vec![0], 5);
        let right = Cube::single(vec![4], 5);
        let s1 = sample(&dist, 99, left.sites());
        let s2 = sample(&dist, 99, right.sites());
        let mut overlap = 0;
        for site in left.sites() {
            if let (Some(a), Some(b)) = (s1.value(&site), s2.value(&site)) {
                assert_eq!(a.to_bits(), b.to_bits());
                overlap += 1;
            }
        }
        assert_eq!(overlap, 5);
    }

    #[test]
    fn values_within_support() {
        let dist = MarginalDistribution::uniform(-1.0, 1.0);
        let region = Cube::single(vec![0, 0], 8);
        let s = sample(&dist, 7, region.sites());
        for site in region.sites() {
            let v = s.value(&site).unwrap();
            assert!((-1.0..1.0).contains(&v), "{v}");
        }
    }

    #[test]
    fn empirical_mean_regression() {
        let dist = MarginalDistribution::uniform(0.0, 1.0);
        let region = Cube::single(vec![0], 5000); // 9999 sites
        let s = sample(&dist, 2024, region.sites());
        let mean: f64 =
            region.sites().map(|x| s.value(&x).unwrap()).sum::<f64>() / s.len() as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean = {mean}");
        // Frozen regression value for this exact generator and seed.
        assert!(
            (mean - 0.5006065082144488).abs() < 1e-12,
            "mean drifted: {mean:.16}"
        );
    }

    #[test]
    fn empty_region_is_empty_sample() {
        let dist = MarginalDistribution::standard();
        let s = sample(&dist, 1, std::iter::empty());
        assert!(s.is_empty());
    }

    #[test]
    fn cdf_increment_examples() {
        let u01 = MarginalDistribution::uniform(0.0, 1.0);
        assert!((cdf_increment(&u01, 0.3, 0.1) - 0.1).abs() < 1e-15);
        assert_eq!(cdf_increment(&u01, 2.0, 0.5), 0.0);
        let u11 = MarginalDistribution::uniform(-1.0, 1.0);
        assert!((cdf_increment(&u11, -0.5, 0.2) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn piecewise_cdf_round_trip() {
        let dist =
            MarginalDistribution::piecewise(vec![(-1.0, 0.0), (0.0, 0.75), (1.0, 1.0)]).unwrap();
        assert_eq!(dist.cdf(-1.0), 0.0);
        assert!((dist.cdf(-0.5) - 0.375).abs() < 1e-15);
        assert_eq!(dist.cdf(2.0), 1.0);
        assert!((dist.holder_constant() - 0.75).abs() < 1e-15);
        // quantile is a right inverse of cdf on the support interior
        for u in [0.1, 0.4, 0.74, 0.8, 0.99] {
            assert!((dist.cdf(dist.quantile(u)) - u).abs() < 1e-12);
        }
        assert!(MarginalDistribution::piecewise(vec![(0.0, 0.0)]).is_err());
        assert!(MarginalDistribution::piecewise(vec![(0.0, 0.2), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn distribution_json_round_trip() {
        let dist = MarginalDistribution::uniform(-1.0, 1.0);
        let json = serde_json::to_string(&dist).unwrap();
        assert_eq!(json, r#"{"kind":"uniform","a":-1.0,"b":1.0}"#);
        let back: MarginalDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, dist);
    }

    #[test]
    fn cross_site_correlation_is_small() {
        let dist = MarginalDistribution::uniform(0.0, 1.0);
        let x = LatticePoint::single(vec![0]);
        let y = LatticePoint::single(vec![1]);
        let n = 10_000u64;
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for seed in 0..n {
            let a = dist.value_at(seed, &x);
            let b = dist.value_at(seed, &y);
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
        }
        let nf = n as f64;
        let cov = sxy / nf - (sx / nf) * (sy / nf);
        let var_x = sxx / nf - (sx / nf) * (sx / nf);
        let var_y = syy / nf - (sy / nf) * (sy / nf);
        let corr = cov / (var_x * var_y).sqrt();
        assert!(corr.abs() < 0.05, "corr = {corr}");
    }

    #[test]
    fn trial_seed_is_stable() {
        // Regression pin: reports depend on this derivation.
        assert_eq!(trial_seed(0, 0), mix64(mix64(0)));
        assert_ne!(trial_seed(42, 0), trial_seed(42, 1));
        assert_ne!(trial_seed(42, 0), trial_seed(43, 0));
    }

    proptest! {
        #[test]
        fn holder_bound_uniform(t in -2.0f64..2.0, eps in 1e-6f64..1.0) {
            let dist = MarginalDistribution::uniform(-1.0, 1.0);
            let inc = cdf_increment(&dist, t, eps);
            let bound = dist.holder_constant() * eps.powf(dist.holder_exponent());
            prop_assert!(inc <= bound * (1.0 + 1e-12) + 1e-18, "inc={inc} bound={bound}");
        }

        #[test]
        fn holder_bound_piecewise(t in -2.0f64..2.0, eps in 1e-6f64..1.0) {
            let dist = MarginalDistribution::piecewise(
                vec![(-1.0, 0.0), (-0.25, 0.5), (1.0, 1.0)],
            ).unwrap();
            let inc = cdf_increment(&dist, t, eps);
            let bound = dist.holder_constant() * eps.powf(dist.holder_exponent());
            prop_assert!(inc <= bound * (1.0 + 1e-12) + 1e-18);
        }
    }
}
