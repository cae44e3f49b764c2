// SPDX-License-Identifier: MIT OR Apache-2.0

//! Test-only oracles and instance generators.
//!
//! Everything here works from raw cells, never from the prefix tables.

#![allow(dead_code)]

use blockseg_core::{
    gen_data, gen_model, replicate_rng, ChangePointSet, DataMatrix, FamilyKind, JnKind, MarkerMap,
    ParamLaw, PenaltySpec, RhoKind, DEFAULT_VARIANCE_FLOOR,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn all_families() -> Vec<FamilyKind> {
    vec![
        FamilyKind::Bernoulli,
        FamilyKind::Categorical { d: 3 },
        FamilyKind::GaussianKnownVar { variance: 1.5 },
        FamilyKind::GaussianMeanVar,
        FamilyKind::Exponential,
        FamilyKind::Poisson,
        FamilyKind::Markov2,
    ]
}

fn ln_factorial(x: f64) -> f64 {
    (2..=x as u64).map(|k| (k as f64).ln()).sum()
}

/// Observed values of columns `r..=s` (1-based), pooled over rows.
pub fn pooled(data: &DataMatrix, r: usize, s: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for row in 0..data.n() {
        for col in r - 1..s {
            if data.is_observed(row, col) {
                out.push(data.get(row, col));
            }
        }
    }
    out
}

/// `-log f` of the block `r..=s` at its MLE, evaluated cell by cell.
pub fn raw_neg_loglik(data: &DataMatrix, family: &FamilyKind, r: usize, s: usize) -> f64 {
    if let FamilyKind::Markov2 = family {
        return raw_markov(data, r, s);
    }
    let xs = pooled(data, r, s);
    let k = xs.len() as f64;
    match *family {
        FamilyKind::Bernoulli | FamilyKind::Categorical { .. } => {
            let d = family.alphabet().unwrap();
            let mut counts = vec![0.0; d];
            for &x in &xs {
                counts[x as usize] += 1.0;
            }
            xs.iter().map(|&x| -(counts[x as usize] / k).ln()).sum()
        }
        FamilyKind::GaussianKnownVar { variance } => {
            let mean = xs.iter().sum::<f64>() / k;
            xs.iter().map(|&x| neg_log_normal(x, mean, variance)).sum()
        }
        FamilyKind::GaussianMeanVar => {
            let mean = xs.iter().sum::<f64>() / k;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k;
            let var = var.max(DEFAULT_VARIANCE_FLOOR);
            xs.iter().map(|&x| neg_log_normal(x, mean, var)).sum()
        }
        FamilyKind::Exponential => {
            let rate = k / xs.iter().sum::<f64>();
            xs.iter().map(|&x| -(rate.ln() - rate * x)).sum()
        }
        FamilyKind::Poisson => {
            let mean = xs.iter().sum::<f64>() / k;
            xs.iter()
                .map(|&x| {
                    let xlog = if x == 0.0 { 0.0 } else { x * mean.ln() };
                    -(xlog - mean - ln_factorial(x))
                })
                .sum()
        }
        FamilyKind::Markov2 => unreachable!(),
    }
}

fn neg_log_normal(x: f64, mean: f64, var: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI * var).ln() + (x - mean).powi(2) / (2.0 * var)
}

fn raw_markov(data: &DataMatrix, r: usize, s: usize) -> f64 {
    let mut init = [0.0f64; 2];
    let mut trans = [[0.0f64; 2]; 2];
    for row in 0..data.n() {
        if data.is_observed(row, r - 1) {
            init[data.get(row, r - 1) as usize] += 1.0;
        }
        for v in r..s {
            if data.is_observed(row, v - 1) && data.is_observed(row, v) {
                trans[data.get(row, v - 1) as usize][data.get(row, v) as usize] += 1.0;
            }
        }
    }
    let n0 = init[0] + init[1];
    let mut total = 0.0;
    for row in 0..data.n() {
        if data.is_observed(row, r - 1) {
            total -= (init[data.get(row, r - 1) as usize] / n0).ln();
        }
        for v in r..s {
            if data.is_observed(row, v - 1) && data.is_observed(row, v) {
                let b = data.get(row, v - 1) as usize;
                let a = data.get(row, v) as usize;
                total -= (trans[b][a] / (trans[b][0] + trans[b][1])).ln();
            }
        }
    }
    total
}

/// `l(C)` from raw cells.
pub fn raw_loglik(data: &DataMatrix, family: &FamilyKind, c: &ChangePointSet) -> f64 {
    -c.blocks()
        .map(|b| raw_neg_loglik(data, family, b.start, b.end))
        .sum::<f64>()
}

/// Data drawn from a random block model of `family`, sometimes with
/// missing cells.
pub fn random_data(family: &FamilyKind, n: usize, m: usize, rng: &mut ChaCha8Rng) -> DataMatrix {
    let k = rng.random_range(0..m);
    let model = gen_model(family, m, k, rng, &ParamLaw::default()).unwrap();
    let data = gen_data(&model, n, rng).unwrap();
    if rng.random_bool(0.3) {
        let mut mask: Vec<bool> = (0..n * m).map(|_| rng.random_bool(0.85)).collect();
        mask[..m].fill(true);
        DataMatrix::with_mask(n, m, data.cells().to_vec(), mask).unwrap()
    } else {
        data
    }
}

/// Marker map where many short blocks fall under a 1 Mb threshold but the
/// full span stays feasible.
pub fn random_marker_map(m: usize, rng: &mut ChaCha8Rng) -> MarkerMap {
    let mut pos = Vec::with_capacity(m);
    let mut cur = rng.random_range(0..1_000_000u64);
    for _ in 0..m {
        pos.push(cur);
        cur += rng.random_range(0..1_500_000u64);
    }
    if m > 1 && pos[m - 1] - pos[0] <= 1_000_000 {
        pos[m - 1] = pos[0] + 1_000_001 + rng.random_range(0..2_000_000u64);
    }
    MarkerMap::new(pos).unwrap()
}

pub fn random_penalty(m: usize, lambda: f64, roh: bool, rng: &mut ChaCha8Rng) -> PenaltySpec {
    let rho = if roh {
        RhoKind::roh(random_marker_map(m, rng), 1.0)
    } else {
        RhoKind::ConstOne
    };
    let jn = if rng.random_bool(0.5) {
        JnKind::LogN
    } else {
        JnKind::SqrtN
    };
    PenaltySpec::new(rho, jn, lambda)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    replicate_rng(seed, 0)
}

/// Every change-point set of `1..m`.
pub fn all_sets(m: usize) -> Vec<ChangePointSet> {
    (0u32..1 << (m - 1))
        .map(|mask| {
            let internal: Vec<usize> = (1..m).filter(|c| mask & (1 << (c - 1)) != 0).collect();
            ChangePointSet::from_internal(m, &internal).unwrap()
        })
        .collect()
}
