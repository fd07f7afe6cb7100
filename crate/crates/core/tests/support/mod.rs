//! Slow reference implementations used as oracles by the integration tests.
//! None of them shares code with the optimized paths in the library.
#![allow(dead_code)]

use aed_core::featnet::FilterBank;
use aed_core::{LrnParams, Map, PcanetModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_map(rng: &mut ChaCha8Rng, h: usize, w: usize, c: usize) -> Map {
    Map::from_fn(h, w, c, |_, _, _| rng.random_range(0.0..1.0))
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues and matching unit eigenvectors, sorted by descending value.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    (values, vectors)
}

pub fn gauss(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let mut d2 = 0.0;
    for i in 0..a.len() {
        d2 += (a[i] - b[i]).powi(2);
    }
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// From-scratch kernel PCA: Gram matrix, explicit `(I - 1/N) V (I - 1/N)`
/// centering, Jacobi eigenvectors scaled to `lambda |alpha|^2 = 1`, and the
/// residual `|phi~(z)|^2 - sum_j (w_j . phi~(z))^2`.
pub struct DenseKpca {
    pub train: Vec<Vec<f64>>,
    pub sigma: f64,
    pub v: Vec<Vec<f64>>,
    pub centered: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub alphas: Vec<Vec<f64>>,
}

impl DenseKpca {
    pub fn new(train: &[Vec<f64>], sigma: f64, q: usize) -> Self {
        let n = train.len();
        let v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| gauss(&train[i], &train[j], sigma)).collect()).collect();
        let c: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| f64::from(u8::from(i == j)) - 1.0 / n as f64).collect())
            .collect();
        let mul = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum()).collect()).collect()
        };
        let centered = mul(&mul(&c, &v), &c);
        let (values, vectors) = jacobi_eigen(centered.clone());
        let alphas = (0..q)
            .map(|j| vectors[j].iter().map(|x| x / values[j].sqrt()).collect())
            .collect();
        DenseKpca {
            train: train.to_vec(),
            sigma,
            v,
            centered,
            eigenvalues: values,
            alphas,
        }
    }

    pub fn rank(&self) -> usize {
        let top = self.eigenvalues[0];
        self.eigenvalues.iter().filter(|&&l| l > 1e-10 * top).count()
    }

    pub fn score(&self, z: &[f64]) -> f64 {
        let n = self.train.len();
        let nf = n as f64;
        let k: Vec<f64> = self.train.iter().map(|x| gauss(z, x, self.sigma)).collect();
        let k_mean = k.iter().sum::<f64>() / nf;
        let v_mean: Vec<f64> = (0..n).map(|i| self.v[i].iter().sum::<f64>() / nf).collect();
        let grand = v_mean.iter().sum::<f64>() / nf;
        let norm2 = gauss(z, z, self.sigma) - 2.0 * k_mean + grand;
        let centered_k: Vec<f64> = (0..n).map(|i| k[i] - k_mean - v_mean[i] + grand).collect();
        let explained: f64 = self
            .alphas
            .iter()
            .map(|a| a.iter().zip(&centered_k).map(|(x, y)| x * y).sum::<f64>().powi(2))
            .sum();
        norm2 - explained
    }
}

/// Zero-padded cross-correlation, accumulated channel, then kernel row,
/// then kernel column.
pub fn naive_correlate(map: &Map, bank: &FilterBank, index: usize) -> Vec<f64> {
    let (h, w, ch) = map.shape();
    let (k1, k2) = bank.kernel_size();
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for k in 0..ch {
                for dr in 0..k1 {
                    for dc in 0..k2 {
                        let sr = r as isize + dr as isize - (k1 / 2) as isize;
                        let sc = c as isize + dc as isize - (k2 / 2) as isize;
                        if sr < 0 || sc < 0 || sr >= h as isize || sc >= w as isize {
                            continue;
                        }
                        acc += bank.weight(index, k, dr, dc) * map.get(sr as usize, sc as usize, k);
                    }
                }
            }
            out[r * w + c] = acc;
        }
    }
    out
}

pub fn naive_lrn(maps: &[Vec<f64>], p: &LrnParams) -> Vec<Vec<f64>> {
    let l = maps.len();
    let half = (p.depth / 2) as isize;
    (0..l)
        .map(|i| {
            (0..maps[i].len())
                .map(|k| {
                    let mut energy = 0.0;
                    for j in (i as isize - half)..=(i as isize + half) {
                        if j >= 0 && (j as usize) < l {
                            energy += maps[j as usize][k] * maps[j as usize][k];
                        }
                    }
                    maps[i][k] / (p.bias + p.weight * energy).powf(p.exponent)
                })
                .collect()
        })
        .collect()
}

/// Code maps and raw block counts of the whole forward pass, by loops.
pub fn naive_forward(map: &Map, model: &PcanetModel) -> (Vec<Vec<u32>>, Vec<Vec<u64>>) {
    let hyper = model.hyper();
    let (h, w, _) = map.shape();
    let mut stage1: Vec<Vec<f64>> = (0..model.bank1().len()).map(|i| naive_correlate(map, model.bank1(), i)).collect();
    if let Some(p) = &hyper.lrn {
        stage1 = naive_lrn(&stage1, p);
    }
    let mut codes = Vec::new();
    let mut counts = Vec::new();
    for s1 in &stage1 {
        let s1_map = Map::from_vec(h, w, 1, s1.clone()).unwrap();
        let mut stage2: Vec<Vec<f64>> = (0..model.bank2().len()).map(|i| naive_correlate(&s1_map, model.bank2(), i)).collect();
        if let Some(p) = &hyper.lrn {
            stage2 = naive_lrn(&stage2, p);
        }
        let code: Vec<u32> = (0..h * w)
            .map(|k| {
                let mut t = 0u32;
                for (m, out) in stage2.iter().enumerate() {
                    if out[k] > 0.0 {
                        t += 1 << m;
                    }
                }
                t
            })
            .collect();
        let bins = 1usize << hyper.l2;
        let mut hist = Vec::new();
        let mut r0 = 0;
        while r0 < h {
            let mut c0 = 0;
            while c0 < w {
                let mut block = vec![0u64; bins];
                for r in r0..(r0 + hyper.block_h).min(h) {
                    for c in c0..(c0 + hyper.block_w).min(w) {
                        block[code[r * w + c] as usize] += 1;
                    }
                }
                hist.extend(block);
                c0 += hyper.block_w;
            }
            r0 += hyper.block_h;
        }
        codes.push(code);
        counts.push(hist);
    }
    (codes, counts)
}

/// Explicit mean-removed patch vectors (channel-major, row-major) of a map.
pub fn naive_patches(map: &Map, k1: usize, k2: usize) -> Vec<Vec<f64>> {
    let (h, w, ch) = map.shape();
    let mut out = Vec::new();
    for r in 0..=h - k1 {
        for c in 0..=w - k2 {
            let mut p = Vec::new();
            for k in 0..ch {
                for dr in 0..k1 {
                    for dc in 0..k2 {
                        p.push(map.get(r + dr, c + dc, k));
                    }
                }
            }
            let mean = p.iter().sum::<f64>() / p.len() as f64;
            out.push(p.into_iter().map(|x| x - mean).collect());
        }
    }
    out
}

/// Stage-1 outputs (after LRN when enabled) by loops, as single-channel maps.
pub fn naive_stage_one(map: &Map, model: &PcanetModel) -> Vec<Map> {
    let (h, w, _) = map.shape();
    let mut outs: Vec<Vec<f64>> = (0..model.bank1().len()).map(|i| naive_correlate(map, model.bank1(), i)).collect();
    if let Some(p) = &model.hyper().lrn {
        outs = naive_lrn(&outs, p);
    }
    outs.into_iter().map(|o| Map::from_vec(h, w, 1, o).unwrap()).collect()
}

/// 8-connected component sizes by breadth-first flood fill.
pub fn flood_fill_areas(mask: &[bool], h: usize, w: usize) -> Vec<usize> {
    let mut seen = vec![false; mask.len()];
    let mut areas = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start] = true;
        let mut area = 0;
        while let Some(i) = queue.pop_front() {
            area += 1;
            let (r, c) = ((i / w) as isize, (i % w) as isize);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nr, nc) = (r + dr, c + dc);
                    if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                        continue;
                    }
                    let j = nr as usize * w + nc as usize;
                    if mask[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        areas.push(area);
    }
    areas.sort_unstable();
    areas
}

/// Integer displacement `(dx, dy)` in `[-r, r]^2` minimizing the mean squared
/// difference between `next(x + dx, y + dy)` and `prev(x, y)` on the overlap.
pub fn best_integer_shift(prev: &[f64], next: &[f64], h: usize, w: usize, r: isize) -> (isize, isize) {
    let mut best = (0, 0);
    let mut best_err = f64::INFINITY;
    for dy in -r..=r {
        for dx in -r..=r {
            let mut err = 0.0;
            let mut count = 0;
            for y in r..h as isize - r {
                for x in r..w as isize - r {
                    let a = prev[y as usize * w + x as usize];
                    let b = next[(y + dy) as usize * w + (x + dx) as usize];
                    err += (a - b) * (a - b);
                    count += 1;
                }
            }
            let err = err / count as f64;
            if err < best_err {
                best_err = err;
                best = (dx, dy);
            }
        }
    }
    best
}

/// Shifted 2-D sinusoid: the pattern moves `shift` pixels toward +columns.
pub fn sinusoid(h: usize, w: usize, period: f64, shift: f64) -> aed_core::GrayFrame {
    aed_core::GrayFrame::from_fn(h, w, |r, c| {
        let x = c as f64 - shift;
        let y = r as f64;
        let tau = std::f64::consts::TAU;
        0.5 + 0.25 * (tau * x / period).sin() + 0.25 * (tau * y / period).cos()
    })
    .unwrap()
}
