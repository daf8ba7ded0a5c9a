//! Seeded generators for the marginal laws and the four simulation designs.
//!
//! Every random quantity of a replicate is drawn from its own ChaCha stream
//! keyed by `(base_seed, replicate, role)`, so replicates can be generated in
//! any order or in parallel with identical results.

use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{Marginal, PredictorArray, ResponseBlock, SimConfig, Study, TrueFeature, TrueSet};
use crate::error::Result;

/// 0-based true features of the single-platform studies (1, 2, 12, 13).
pub const UNIVARIATE_TRUE: [usize; 4] = [0, 1, 11, 12];
/// 0-based true features of the multi-platform studies (2, 3, 101, 102).
pub const MULTIVARIATE_TRUE: [usize; 4] = [1, 2, 100, 101];

/// Active response coordinates in the multi-platform studies.
const ACTIVE_RESPONSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Platform(usize),
    Betas,
    Noise,
    PlatformIds,
    NoiseResponses,
}

impl Role {
    fn code(self) -> u64 {
        match self {
            Role::Platform(k) => k as u64,
            Role::Betas => 1 << 16,
            Role::Noise => (1 << 16) + 1,
            Role::PlatformIds => (1 << 16) + 2,
            Role::NoiseResponses => (1 << 16) + 3,
        }
    }
}

/// Generator for one `(seed, replicate, role)` stream.
fn stream(seed: u64, replicate: u64, role: Role) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replicate.wrapping_mul(1 << 20).wrapping_add(role.code()));
    rng
}

fn open_uniform<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// `count` draws of `U^(1/a)`.
pub fn sample_power(a: f64, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count).map(|_| open_uniform(&mut rng).powf(1.0 / a)).collect()
}

/// `count` draws of `m (1 - U)^(-1/a)`.
pub fn sample_pareto(shape: f64, mode: f64, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.gen();
            mode * (1.0 - u).powf(-1.0 / shape)
        })
        .collect()
}

fn ar1_with<R: Rng>(n: usize, p: usize, rho: f64, rng: &mut R) -> Array2<f64> {
    let scale = (1.0 - rho * rho).sqrt();
    let mut x = Array2::zeros((n, p));
    for mut row in x.rows_mut() {
        let mut prev: f64 = rng.sample(StandardNormal);
        row[0] = prev;
        for j in 1..p {
            let z: f64 = rng.sample(StandardNormal);
            prev = rho * prev + scale * z;
            row[j] = prev;
        }
    }
    x
}

/// `n` i.i.d. rows of `N(0, Sigma)` with `Sigma_ij = rho^|i-j|`, by the AR(1)
/// recursion.
pub fn gen_ar1_gaussian(n: usize, p: usize, rho: f64, seed: u64) -> Array2<f64> {
    ar1_with(n, p, rho, &mut ChaCha20Rng::seed_from_u64(seed))
}

/// Quantile of `marginal` at `Phi(z)`.
pub fn gaussian_to_marginal(z: f64, marginal: Marginal) -> f64 {
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    match marginal {
        Marginal::Gaussian => z,
        Marginal::Power { a } => std.cdf(z).powf(1.0 / a),
        // survival form keeps precision in the upper tail
        Marginal::Pareto { shape, mode } => mode * std.cdf(-z).powf(-1.0 / shape),
    }
}

fn copula_with<R: Rng>(n: usize, p: usize, rho: f64, marginal: Marginal, rng: &mut R) -> Array2<f64> {
    let mut x = ar1_with(n, p, rho, rng);
    if marginal != Marginal::Gaussian {
        x.mapv_inplace(|z| gaussian_to_marginal(z, marginal));
    }
    x
}

/// AR(1) Gaussian copula with the given marginal law.
pub fn gen_copula_platform(n: usize, p: usize, rho: f64, marginal: Marginal, seed: u64) -> Array2<f64> {
    copula_with(n, p, rho, marginal, &mut ChaCha20Rng::seed_from_u64(seed))
}

fn iid_with<R: Rng>(n: usize, p: usize, marginal: Marginal, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, p), || match marginal {
        Marginal::Gaussian => rng.sample(StandardNormal),
        Marginal::Power { a } => open_uniform(rng).powf(1.0 / a),
        Marginal::Pareto { shape, mode } => mode * (1.0 - rng.gen::<f64>()).powf(-1.0 / shape),
    })
}

/// One simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyInstance {
    pub x: PredictorArray,
    pub y: ResponseBlock,
    pub true_set: TrueSet,
    /// Coefficients in draw order: four per replicate for S1/S2, and per
    /// active response coordinate for S3/S4.
    pub betas: Vec<f64>,
    pub replicate: usize,
    pub seed: u64,
}

/// Knobs for tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenOptions {
    /// Multiplier on the Gaussian noise term (1 in the studies).
    pub noise_scale: f64,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self { noise_scale: 1.0 }
    }
}

pub fn gen_study(cfg: &SimConfig, replicate: usize) -> Result<StudyInstance> {
    gen_study_with(cfg, replicate, GenOptions::default())
}

pub fn gen_study_with(cfg: &SimConfig, replicate: usize, opts: GenOptions) -> Result<StudyInstance> {
    cfg.validate()?;
    let seed = cfg.base_seed;
    let r = replicate as u64;
    let (n, p) = (cfg.n, cfg.p);
    let mut beta_rng = stream(seed, r, Role::Betas);
    let mut noise_rng = stream(seed, r, Role::Noise);
    let beta = |rng: &mut ChaCha20Rng| rng.gen_range(cfg.beta_low..cfg.beta_high);

    match cfg.study {
        Study::S1 | Study::S2 => {
            let mut xr = stream(seed, r, Role::Platform(0));
            let x = if cfg.study == Study::S1 {
                copula_with(n, p, cfg.ar_coefficient, cfg.marginal, &mut xr)
            } else {
                iid_with(n, p, cfg.marginal, &mut xr)
            };
            let betas: Vec<f64> = (0..4).map(|_| beta(&mut beta_rng)).collect();
            let y: Vec<f64> = (0..n)
                .map(|i| {
                    let signal: f64 = UNIVARIATE_TRUE.iter().zip(&betas).map(|(&j, b)| b * x[[i, j]]).sum();
                    let e: f64 = noise_rng.sample(StandardNormal);
                    signal + opts.noise_scale * e
                })
                .collect();
            Ok(StudyInstance {
                x: PredictorArray::from_matrix(x)?,
                y: ResponseBlock::from_vector(y)?,
                true_set: TrueSet::from_features(&UNIVARIATE_TRUE),
                betas,
                replicate,
                seed,
            })
        }
        Study::S3 | Study::S4 => {
            let platforms: Vec<Array2<f64>> = cfg
                .platforms
                .iter()
                .enumerate()
                .map(|(k, &m)| copula_with(n, p, cfg.ar_coefficient, m, &mut stream(seed, r, Role::Platform(k))))
                .collect();
            let d = platforms.len();
            let mut id_rng = stream(seed, r, Role::PlatformIds);
            let shared: Vec<usize> = (0..4).map(|_| id_rng.gen_range(0..d)).collect();
            let mut y = Array2::zeros((n, cfg.q));
            let mut betas = Vec::new();
            let mut ids_per_k = Vec::with_capacity(ACTIVE_RESPONSES);
            for k in 0..ACTIVE_RESPONSES.min(cfg.q) {
                let ids: Vec<usize> = if cfg.shared_platform_ids || k == 0 {
                    shared.clone()
                } else {
                    (0..4).map(|_| id_rng.gen_range(0..d)).collect()
                };
                let feat = |t: usize, i: usize| platforms[ids[t]][[i, MULTIVARIATE_TRUE[t]]];
                let b: Vec<f64> = match cfg.study {
                    Study::S3 => (0..4).map(|_| beta(&mut beta_rng)).collect(),
                    _ => (0..2).map(|_| beta(&mut beta_rng)).collect(),
                };
                for i in 0..n {
                    let signal = match cfg.study {
                        Study::S3 => (0..4).map(|t| b[t] * feat(t, i)).sum::<f64>(),
                        _ => b[0] * feat(0, i) * feat(1, i) + b[1] * feat(2, i) * feat(3, i),
                    };
                    let e: f64 = noise_rng.sample(StandardNormal);
                    y[[i, k]] = signal + opts.noise_scale * e;
                }
                betas.extend(b);
                ids_per_k.push(ids);
            }
            if cfg.q > ACTIVE_RESPONSES {
                let mut nr = stream(seed, r, Role::NoiseResponses);
                let extra = iid_with(n, cfg.q - ACTIVE_RESPONSES, cfg.noise_marginal, &mut nr);
                y.slice_mut(s![.., ACTIVE_RESPONSES..]).assign(&extra);
            }
            let true_set = TrueSet {
                entries: MULTIVARIATE_TRUE
                    .iter()
                    .enumerate()
                    .map(|(t, &feature)| TrueFeature {
                        feature,
                        platforms: ids_per_k.iter().map(|ids| ids[t]).collect(),
                    })
                    .collect(),
            };
            Ok(StudyInstance {
                x: PredictorArray::from_platforms(&platforms)?,
                y: ResponseBlock::new(y)?,
                true_set,
                betas,
                replicate,
                seed,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Axis;
    use proptest::prelude::*;

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        crate::measures::pearson_utility(a, b)
    }

    #[test]
    fn power_and_pareto_moments() {
        let s = sample_power(5.0, 100_000, 1);
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 5.0 / 6.0).abs() < 0.01);
        let mut sorted = s.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[50_000] - 0.5f64.powf(0.2)).abs() < 0.01);
        assert!(s.iter().all(|&v| v > 0.0 && v < 1.0));
        let q = sample_pareto(10.0, 1.0, 100_000, 2);
        let mean = q.iter().sum::<f64>() / q.len() as f64;
        assert!((mean - 10.0 / 9.0).abs() < 0.01);
        assert!(q.iter().all(|&v| v >= 1.0));
        let mut sorted = q.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[50_000] - 2f64.powf(0.1)).abs() < 0.01);
    }

    #[test]
    fn uniform_power_ks() {
        let mut s = sample_power(1.0, 20_000, 3);
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        let ks = s
            .iter()
            .enumerate()
            .map(|(i, &v)| ((i + 1) as f64 / n - v).abs().max((v - i as f64 / n).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 0.015, "{ks}");
    }

    #[test]
    fn ar1_correlations() {
        let x = gen_ar1_gaussian(10_000, 5, 0.5, 4);
        let c = |j: usize| x.column(j).to_vec();
        assert!((corr(&c(0), &c(1)) - 0.5).abs() < 0.03);
        assert!((corr(&c(0), &c(2)) - 0.25).abs() < 0.03);
        for j in 0..5 {
            let v = c(j);
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            assert!((var - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn copula_marginals() {
        let x = gen_copula_platform(10_000, 5, 0.5, Marginal::Power { a: 5.0 }, 5);
        let mut col = x.column(0).to_vec();
        col.sort_by(f64::total_cmp);
        let n = col.len() as f64;
        let ks = col
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = v.powi(5);
                ((i + 1) as f64 / n - f).abs().max((f - i as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "{ks}");
        let y = gen_copula_platform(1000, 5, 0.5, Marginal::Pareto { shape: 10.0, mode: 1.0 }, 6);
        assert!(y.iter().all(|&v| v >= 1.0));
        let ranks = |j: usize| crate::measures::midranks(&x.column(j).to_vec());
        assert!(corr(&ranks(0), &ranks(1)) > corr(&ranks(0), &ranks(4)));
    }

    #[test]
    fn study_shapes() {
        let cfg = SimConfig {
            p: 200,
            ..SimConfig::for_study(Study::S1)
        };
        let s = gen_study(&cfg, 0).unwrap();
        assert_eq!(s.x.values().dim(), (1, 200, 200));
        assert_eq!(s.y.values().dim(), (200, 1));
        assert_eq!(s.true_set.features(), vec![0, 1, 11, 12]);
        let cfg3 = SimConfig {
            p: 150,
            ..SimConfig::for_study(Study::S3)
        };
        let s3 = gen_study(&cfg3, 1).unwrap();
        assert_eq!(s3.x.values().dim(), (3, 200, 150));
        assert_eq!(s3.y.values().dim(), (200, 10));
        assert_eq!(s3.true_set.features(), vec![1, 2, 100, 101]);
        assert!(s3.true_set.entries.iter().all(|e| e.platforms.len() == 3));
        assert!(s3.betas.iter().all(|&b| (1.0..2.0).contains(&b)));
        assert!(s3.x.values().index_axis(Axis(0), 0).iter().all(|&v| v >= 1.0));
        let mut bad = cfg3.clone();
        bad.p = 101;
        assert!(gen_study(&bad, 0).is_err());
    }

    #[test]
    fn noiseless_response_is_linear_combination() {
        let cfg = SimConfig {
            n: 50,
            p: 20,
            ..SimConfig::for_study(Study::S1)
        };
        let s = gen_study_with(&cfg, 3, GenOptions { noise_scale: 0.0 }).unwrap();
        let x = s.x.values().index_axis(Axis(0), 0).to_owned();
        for i in 0..50 {
            let expect: f64 = UNIVARIATE_TRUE.iter().zip(&s.betas).map(|(&j, b)| b * x[[i, j]]).sum();
            assert_eq!(s.y.values()[[i, 0]], expect);
        }
        assert!(s.betas.iter().all(|&b| (2.0..5.0).contains(&b)));
    }

    #[test]
    fn multivariate_noiseless_uses_recorded_platforms() {
        let cfg = SimConfig {
            n: 30,
            p: 110,
            ..SimConfig::for_study(Study::S4)
        };
        let s = gen_study_with(&cfg, 2, GenOptions { noise_scale: 0.0 }).unwrap();
        let v = s.x.values();
        for k in 0..3 {
            let b = &s.betas[2 * k..2 * k + 2];
            let pid = |t: usize| s.true_set.entries[t].platforms[k];
            let f = |t: usize, i: usize| v[[pid(t), i, MULTIVARIATE_TRUE[t]]];
            for i in 0..30 {
                let expect = b[0] * f(0, i) * f(1, i) + b[1] * f(2, i) * f(3, i);
                assert_eq!(s.y.values()[[i, k]], expect);
            }
        }
    }

    #[test]
    fn shared_ids_switch() {
        let cfg = SimConfig {
            n: 20,
            p: 110,
            shared_platform_ids: true,
            ..SimConfig::for_study(Study::S3)
        };
        let s = gen_study(&cfg, 0).unwrap();
        for e in &s.true_set.entries {
            assert!(e.platforms.iter().all(|&k| k == e.platforms[0]));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn deterministic_per_replicate(seed in 0u64..1000, rep in 0usize..50) {
            let cfg = SimConfig { n: 20, p: 110, base_seed: seed, ..SimConfig::for_study(Study::S3) };
            let a = gen_study(&cfg, rep).unwrap();
            let b = gen_study(&cfg, rep).unwrap();
            prop_assert_eq!(&a, &b);
            let c = gen_study(&cfg, rep + 1).unwrap();
            prop_assert_ne!(a.x, c.x);
        }
    }
}
