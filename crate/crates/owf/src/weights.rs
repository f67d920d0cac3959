//! Simplex-constrained optimal weights.
//!
//! For a nonnegative dissimilarity profile `rho` over a search window and a
//! noise level `sigma`, the weights minimizing
//!
//! ```text
//! g(w) = (sum w(x) rho(x))^2 + sigma^2 * sum w(x)^2,   w >= 0, sum w = 1
//! ```
//!
//! are triangular in `rho`: `w(x) ∝ (1 - rho(x)/a)+`, where the bandwidth `a`
//! is the unique positive root of `M(t) = sum rho(x) (t - rho(x))+ = sigma^2`.
//! The root is found exactly by scanning the sorted profile with running sums,
//! so no iterative solver is involved.

use std::cmp::Ordering;

use crate::error::{invalid, Error, Result};

/// Tolerance on `sum w = 1` accepted by [`WeightMap::new`].
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Triangular kernel `(1 - |t|)+`.
#[inline]
pub fn triangular(t: f64) -> f64 {
    (1.0 - t.abs()).max(0.0)
}

/// Dissimilarity values over a search window, in window enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoProfile {
    values: Vec<f64>,
    center_index: Option<usize>,
}

impl RhoProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("profile must have at least one entry"));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid(format!("rho[{i}] = {} is not a finite nonnegative value", values[i])));
        }
        Ok(Self { values, center_index: None })
    }

    /// Profile whose entry at `center` belongs to the window center `x0`.
    pub fn with_center(values: Vec<f64>, center: usize) -> Result<Self> {
        let mut p = Self::new(values)?;
        if center >= p.values.len() {
            return Err(invalid(format!("center index {center} outside profile of length {}", p.values.len())));
        }
        p.center_index = Some(center);
        Ok(p)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn center_index(&self) -> Option<usize> {
        self.center_index
    }

    /// True when every entry is zero; `M` is then identically zero.
    pub fn is_degenerate(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Root of `M(a) = sigma^2`, or the degenerate marker for an all-zero profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Finite(f64),
    /// All dissimilarities vanish, so every entry gets the same weight.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSolution {
    bandwidth: Bandwidth,
    k_star: usize,
    sorted_order: Vec<usize>,
}

impl BandwidthSolution {
    pub fn bandwidth(&self) -> Bandwidth {
        self.bandwidth
    }

    /// The bandwidth `a`, or `None` when degenerate.
    pub fn a(&self) -> Option<f64> {
        match self.bandwidth {
            Bandwidth::Finite(a) => Some(a),
            Bandwidth::Degenerate => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.bandwidth == Bandwidth::Degenerate
    }

    /// Number of smallest sorted entries that enter the root equation.
    pub fn k_star(&self) -> usize {
        self.k_star
    }

    /// Stable ascending permutation of the profile: `sorted_order[i]` is the
    /// index of the `i`-th smallest entry.
    pub fn sorted_order(&self) -> &[usize] {
        &self.sorted_order
    }
}

/// Nonnegative weights summing to one, in window enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    weights: Vec<f64>,
}

impl WeightMap {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("weight map must be non-empty"));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid(format!("weight[{i}] = {} is not a finite nonnegative value", weights[i])));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(invalid(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Wraps weights that were normalized by dividing by their sum.
    pub(crate) fn from_normalized(weights: Vec<f64>) -> Self {
        debug_assert!(weights.iter().all(|&w| w >= 0.0));
        Self { weights }
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "uniform weight map needs at least one entry");
        Self { weights: vec![1.0 / len as f64; len] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `sum w(x) * values(x)` accumulated in enumeration order.
    pub fn dot(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.weights.len(), "length mismatch");
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.weights
    }
}

/// Multiplier-form weights together with their multipliers: `w = (b - lambda*rho)+ / sigma^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct KktWeights {
    pub weights: WeightMap,
    pub lambda: f64,
    pub b: f64,
    pub a: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("sigma must be positive and finite, got {sigma}")))
    }
}

/// `M(t) = sum rho(x) (t - rho(x))+` over a slice.
#[inline]
pub(crate) fn m_rho(values: &[f64], t: f64) -> f64 {
    values.iter().map(|&r| r * (t - r).max(0.0)).sum()
}

pub fn eval_m_rho(rho: &RhoProfile, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    m_rho(&rho.values, t)
}

/// Scans an ascending profile and returns `(a, k_star)`. `a` is `None` when
/// the profile is all zeros.
///
/// Leading zeros have `a_k = +inf` and are always accepted. The scan stops at
/// the first `k` with `a_k < rho_k`; every later `k` fails as well.
pub(crate) fn bandwidth_from_sorted(sorted: &[f64], sigma2: f64) -> (Option<f64>, usize) {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut a = None;
    let mut k_star = 0;
    for (k, &r) in sorted.iter().enumerate() {
        sum += r;
        sum_sq += r * r;
        if sum > 0.0 {
            let ak = (sigma2 + sum_sq) / sum;
            if ak >= r {
                a = Some(ak);
            } else {
                break;
            }
        }
        k_star = k + 1;
    }
    (a, k_star)
}

/// Bandwidth of an unsorted profile, reusing `scratch` for the sort.
pub(crate) fn bandwidth_unsorted(values: &[f64], sigma2: f64, scratch: &mut Vec<f64>) -> Option<f64> {
    scratch.clear();
    scratch.extend_from_slice(values);
    scratch.sort_unstable_by(f64::total_cmp);
    bandwidth_from_sorted(scratch, sigma2).0
}

/// Writes unnormalized triangular kernel values for `values` into `out`
/// and returns their sum. With no bandwidth every kernel value is 1.
#[inline]
pub(crate) fn triangular_weights(values: &[f64], a: Option<f64>, out: &mut Vec<f64>) -> f64 {
    out.clear();
    match a {
        Some(a) => out.extend(values.iter().map(|&r| triangular(r / a))),
        None => out.resize(values.len(), 1.0),
    }
    out.iter().sum()
}

pub fn solve_bandwidth(rho: &RhoProfile, sigma: f64) -> Result<BandwidthSolution> {
    check_sigma(sigma)?;
    let v = &rho.values;
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap_or(Ordering::Equal));
    let sorted: Vec<f64> = order.iter().map(|&i| v[i]).collect();
    let (a, k_star) = bandwidth_from_sorted(&sorted, sigma * sigma);
    Ok(BandwidthSolution {
        bandwidth: a.map_or(Bandwidth::Degenerate, Bandwidth::Finite),
        k_star,
        sorted_order: order,
    })
}

/// Minimizer of the bias-variance bound over the simplex.
///
/// Entries with `rho >= a` get exactly zero weight; a degenerate profile
/// yields uniform weights.
pub fn optimal_weights(rho: &RhoProfile, sigma: f64) -> Result<WeightMap> {
    let sol = solve_bandwidth(rho, sigma)?;
    let mut kernel = Vec::with_capacity(rho.len());
    let total = triangular_weights(&rho.values, sol.a(), &mut kernel);
    Ok(WeightMap { weights: kernel.into_iter().map(|k| k / total).collect() })
}

/// `(sum w rho)^2 + sigma^2 sum w^2`.
pub fn eval_objective(rho: &RhoProfile, w: &WeightMap, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if rho.len() != w.len() {
        return Err(invalid(format!("profile has {} entries, weights {}", rho.len(), w.len())));
    }
    let bias: f64 = w.weights.iter().zip(&rho.values).map(|(w, r)| w * r).sum();
    let var: f64 = w.weights.iter().map(|w| w * w).sum();
    Ok(bias * bias + sigma * sigma * var)
}

/// Weights in multiplier form, with `lambda = sigma^2 / sum (a - rho)+` and
/// `b = lambda * a`. Independent of [`optimal_weights`] past the bandwidth.
pub fn kkt_weights(rho: &RhoProfile, sigma: f64) -> Result<KktWeights> {
    let sol = solve_bandwidth(rho, sigma)?;
    let a = sol
        .a()
        .ok_or_else(|| Error::DegenerateInput("all dissimilarities are zero".into()))?;
    let sigma2 = sigma * sigma;
    let mass: f64 = rho.values.iter().map(|&r| (a - r).max(0.0)).sum();
    let lambda = sigma2 / mass;
    let b = lambda * a;
    let weights = rho.values.iter().map(|&r| (b - lambda * r).max(0.0) / sigma2).collect();
    Ok(KktWeights { weights: WeightMap { weights }, lambda, b, a })
}
