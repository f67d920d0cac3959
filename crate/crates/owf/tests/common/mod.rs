//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

use rand::Rng;

/// `sum rho (t - rho)+`, summed directly.
pub fn m_rho(rho: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for &r in rho {
        if t > r {
            acc += r * (t - r);
        }
    }
    acc
}

/// Root of `m_rho(t) = sigma^2` by bisection. Needs a positive entry.
pub fn bisect_bandwidth(rho: &[f64], sigma: f64) -> f64 {
    let target = sigma * sigma;
    let total: f64 = rho.iter().sum();
    let max = rho.iter().cloned().fold(0.0, f64::max);
    assert!(total > 0.0);
    // m_rho(t) >= total * (t - max) once t >= max
    let (mut lo, mut hi) = (0.0_f64, max + target / total + 1.0);
    while m_rho(rho, hi) < target {
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if m_rho(rho, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn objective(rho: &[f64], w: &[f64], sigma: f64) -> f64 {
    let bias: f64 = rho.iter().zip(w).map(|(r, w)| r * w).sum();
    let var: f64 = w.iter().map(|w| w * w).sum();
    bias * bias + sigma * sigma * var
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Accelerated projected gradient on the simplex with adaptive restart.
pub fn projected_gradient_minimizer(rho: &[f64], sigma: f64) -> Vec<f64> {
    let n = rho.len();
    let s2 = sigma * sigma;
    // gradient: 2 (rho . w) rho + 2 s2 w; Lipschitz constant 2 (|rho|^2 + s2)
    let lip = 2.0 * (rho.iter().map(|r| r * r).sum::<f64>() + s2);
    let step = 1.0 / lip;
    let grad = |w: &[f64]| -> Vec<f64> {
        let dot: f64 = rho.iter().zip(w).map(|(r, w)| r * w).sum();
        rho.iter().zip(w).map(|(r, w)| 2.0 * dot * r + 2.0 * s2 * w).collect()
    };
    let mut x = vec![1.0 / n as f64; n];
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut prev = objective(rho, &x, sigma);
    for _ in 0..50_000 {
        let g = grad(&y);
        let stepped: Vec<f64> = y.iter().zip(&g).map(|(y, g)| y - step * g).collect();
        let next = project_simplex(&stepped);
        let val = objective(rho, &next, sigma);
        let moved: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        if val > prev {
            // restart momentum
            t = 1.0;
            y = x.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = next.iter().zip(&x).map(|(n, o)| n + beta * (n - o)).collect();
        x = next;
        t = t_next;
        prev = val;
        if moved < 1e-12 {
            // stop only at a fixed point of the plain projected step
            let g = grad(&x);
            let plain = project_simplex(&x.iter().zip(&g).map(|(x, g)| x - step * g).collect::<Vec<_>>());
            if plain.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum::<f64>() < 1e-12 {
                break;
            }
            t = 1.0;
            y = x.clone();
        }
    }
    x
}

/// Uniform random point of the simplex.
pub fn random_simplex_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

/// Nonnegative profile with roughly `zero_frac` exact zeros and at least one
/// positive entry, spanning several orders of magnitude.
pub fn random_profile<R: Rng>(rng: &mut R, len: usize, zero_frac: f64) -> Vec<f64> {
    let scale = 10f64.powf(rng.random_range(-2.0..2.5));
    let mut v: Vec<f64> = (0..len)
        .map(|_| if rng.random::<f64>() < zero_frac { 0.0 } else { scale * rng.random::<f64>() })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        let i = rng.random_range(0..len);
        v[i] = scale * (0.5 + rng.random::<f64>());
    }
    v
}

pub fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let j = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    assert!((0..n).contains(&j), "index {i} reflects outside 0..{n}");
    j as usize
}

/// Straight-line optimal weights filter with the rectangular patch kernel.
/// Operates on a row-major buffer; borders are mirrored.
pub fn reference_owf_rect(values: &[f64], width: usize, height: usize, sigma: f64, patch: usize, search: usize) -> Vec<f64> {
    let at = |r: isize, c: isize| values[reflect(r, height) * width + reflect(c, width)];
    let (p, s) = (patch as isize, search as isize);
    let floor = std::f64::consts::SQRT_2 * sigma;
    let m = ((2 * p + 1) * (2 * p + 1)) as f64;
    let mut out = Vec::with_capacity(width * height);
    for r0 in 0..height as isize {
        for c0 in 0..width as isize {
            let mut rho = Vec::new();
            let mut ys = Vec::new();
            for dr in -s..=s {
                for dc in -s..=s {
                    let (r, c) = (r0 + dr, c0 + dc);
                    let mut acc = 0.0;
                    for zr in -p..=p {
                        for zc in -p..=p {
                            let d = at(r + zr, c + zc) - at(r0 + zr, c0 + zc);
                            acc += d * d;
                        }
                    }
                    let dist = (acc / m).sqrt();
                    rho.push(if dist > floor { dist - floor } else { 0.0 });
                    ys.push(at(r, c));
                }
            }
            let mut sorted = rho.clone();
            sorted.sort_by(f64::total_cmp);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            let mut a = None;
            for &x in &sorted {
                sum += x;
                sum_sq += x * x;
                if sum > 0.0 {
                    let ak = (sigma * sigma + sum_sq) / sum;
                    if ak < x {
                        break;
                    }
                    a = Some(ak);
                }
            }
            let kernel: Vec<f64> = match a {
                Some(a) => rho.iter().map(|&x| (1.0 - x / a).max(0.0)).collect(),
                None => vec![1.0; rho.len()],
            };
            let mut total = 0.0;
            for k in &kernel {
                total += k;
            }
            let mut est = 0.0;
            for (k, y) in kernel.iter().zip(&ys) {
                est += (k / total) * y;
            }
            out.push(est);
        }
    }
    out
}
