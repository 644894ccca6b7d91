//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use eigengap::Dataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly decreasing positive vector with entries log-uniform in [lo, hi].
pub fn random_spectrum(rng: &mut ChaCha8Rng, p: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..p)
        .map(|_| (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp())
        .collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v.dedup();
    while v.len() < p {
        let last = *v.last().unwrap();
        v.push(last * 0.9);
    }
    v
}

/// Exhaustive projection onto the non-increasing cone (optionally intersected
/// with a box): every block pattern of `x`, encoded as a bitmask of cut
/// positions, is given its (clamped) block means; infeasible candidates are
/// dropped and the closest remaining one returned.
pub fn brute_force_projection(x: &[f64], bounds: Option<(f64, f64)>) -> Vec<f64> {
    let p = x.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (p - 1)) {
        let mut y = vec![0.0; p];
        let mut start = 0;
        for end in 1..=p {
            let cut = end == p || mask & (1 << (end - 1)) != 0;
            if cut {
                let mut mean = x[start..end].iter().sum::<f64>() / (end - start) as f64;
                if let Some((lo, hi)) = bounds {
                    mean = mean.clamp(lo, hi);
                }
                y[start..end].iter_mut().for_each(|v| *v = mean);
                start = end;
            }
        }
        if y.windows(2).any(|w| w[0] < w[1]) {
            continue;
        }
        let dist: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, y));
        }
    }
    best.unwrap().1
}

/// Central finite-difference gradient with per-coordinate step `h_rel · |x_j|`.
pub fn finite_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h_rel: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let h = h_rel * x[j].abs().max(1e-3);
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[j] += h;
            down[j] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-12);
    diff / scale
}

/// Zero-mean Gaussian rows with covariance `diag(spectrum)`.
pub fn gaussian_dataset(rng: &mut ChaCha8Rng, n: usize, spectrum: &[f64]) -> Dataset {
    let p = spectrum.len();
    let x = DMatrix::from_fn(n, p, |_, j| {
        let z: f64 = StandardNormal.sample(rng);
        z * spectrum[j].sqrt()
    });
    Dataset::new(x).unwrap()
}

/// `−2 Σ_i ln N(x_i; 0, Σ)` evaluated with a Cholesky factor of `Σ`.
pub fn dense_neg2_log_likelihood(sigma: &DMatrix<f64>, data: &Dataset) -> f64 {
    let p = sigma.nrows() as f64;
    let chol = sigma.clone().cholesky().expect("positive definite");
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let mut total = 0.0;
    for row in data.x().row_iter() {
        let x = row.transpose();
        let solved = chol.solve(&x);
        let quad = x.dot(&solved);
        total += p * (2.0 * std::f64::consts::PI).ln() + log_det + quad;
    }
    total
}
