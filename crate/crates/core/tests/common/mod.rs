//! Shared fixtures: random joint generators and a dense brute-force oracle.
#![allow(dead_code)]

use entropy_triangles::{JointDistribution, Partition};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A joint distribution stored as a full row-major probability table.
pub struct Dense {
    pub cards: Vec<usize>,
    pub p: Vec<f64>,
}

impl Dense {
    pub fn from_joint(joint: &JointDistribution) -> Dense {
        let cards: Vec<usize> = joint.cardinalities().iter().map(|&c| c as usize).collect();
        let size: usize = cards.iter().product();
        let mut p = vec![0.0; size];
        for (t, w) in joint.iter() {
            p[index(&cards, t)] += w;
        }
        Dense { cards, p }
    }

    pub fn n(&self) -> usize {
        self.cards.len()
    }

    fn decode(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for k in (0..self.n()).rev() {
            out[k] = flat % self.cards[k];
            flat /= self.cards[k];
        }
        out
    }

    /// Marginal table over `subset`, as a map from sub-tuple to mass.
    pub fn marginal(&self, subset: &[usize]) -> std::collections::BTreeMap<Vec<usize>, f64> {
        let mut m = std::collections::BTreeMap::new();
        for (flat, &q) in self.p.iter().enumerate() {
            let t = self.decode(flat);
            let key: Vec<usize> = subset.iter().map(|&i| t[i]).collect();
            *m.entry(key).or_insert(0.0) += q;
        }
        m
    }

    pub fn h(&self, subset: &[usize]) -> f64 {
        self.marginal(subset)
            .values()
            .filter(|&&q| q > 0.0)
            .map(|&q| -q * q.log2())
            .sum()
    }

    pub fn h_all(&self) -> f64 {
        self.h(&(0..self.n()).collect::<Vec<_>>())
    }

    pub fn h_uniform(&self, subset: &[usize]) -> f64 {
        subset.iter().map(|&i| (self.cards[i] as f64).log2()).sum()
    }

    /// `sum p log p / (p_X p_Y)` over the full table.
    pub fn kl_binding(&self, x: &[usize], y: &[usize]) -> f64 {
        let px = self.marginal(x);
        let py = self.marginal(y);
        let mut acc = 0.0;
        for (flat, &q) in self.p.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let t = self.decode(flat);
            let kx: Vec<usize> = x.iter().map(|&i| t[i]).collect();
            let ky: Vec<usize> = y.iter().map(|&i| t[i]).collect();
            acc += q * (q / (px[&kx] * py[&ky])).log2();
        }
        acc
    }

    pub fn vi(&self, x: &[usize], y: &[usize]) -> f64 {
        2.0 * self.h_all() - self.h(x) - self.h(y)
    }

    pub fn delta(&self, x: &[usize], y: &[usize]) -> f64 {
        self.h_uniform(x) + self.h_uniform(y) - self.h(x) - self.h(y)
    }

    pub fn total_correlation(&self) -> f64 {
        (0..self.n()).map(|i| self.h(&[i])).sum::<f64>() - self.h_all()
    }

    pub fn source_vi(&self) -> f64 {
        let all = self.h_all();
        (0..self.n())
            .map(|i| {
                let rest: Vec<usize> = (0..self.n()).filter(|&k| k != i).collect();
                all - self.h(&rest)
            })
            .sum()
    }

    pub fn dual_total_correlation(&self) -> f64 {
        self.h_all() - self.source_vi()
    }

    pub fn co_information(&self) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for mask in 1usize..(1 << n) {
            let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let sign = if s.len() % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * self.h(&s);
        }
        acc
    }
}

fn index(cards: &[usize], t: &[u32]) -> usize {
    t.iter()
        .zip(cards)
        .fold(0, |acc, (&c, &k)| acc * k + c as usize)
}

/// Random empirical joint: 2..=max_vars variables with 2..=max_card codes,
/// plus a random non-trivial partition.
pub fn random_joint(
    rng: &mut ChaCha8Rng,
    max_vars: usize,
    max_card: u32,
) -> (JointDistribution, Partition) {
    let n = rng.random_range(2..=max_vars);
    let cards: Vec<u32> = (0..n).map(|_| rng.random_range(2..=max_card)).collect();
    let m = rng.random_range(1..=80);
    // a few latent prototypes give the samples some dependence
    let protos: Vec<Vec<u32>> = (0..rng.random_range(1..=4))
        .map(|_| cards.iter().map(|&c| rng.random_range(0..c)).collect())
        .collect();
    let noise: f64 = rng.random();
    let rows: Vec<Vec<u32>> = (0..m)
        .map(|_| {
            let p = &protos[rng.random_range(0..protos.len())];
            cards
                .iter()
                .zip(p)
                .map(|(&c, &v)| {
                    if rng.random::<f64>() < noise {
                        rng.random_range(0..c)
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let joint = JointDistribution::from_rows(&rows, &cards).unwrap();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let k = rng.random_range(1..n);
    let part = Partition::new(idx[..k].to_vec(), idx[k..].to_vec()).unwrap();
    (joint, part)
}

/// Random joint given by real-valued weights on a full table, sparsified.
pub fn random_dense_joint(
    rng: &mut ChaCha8Rng,
    max_vars: usize,
    max_card: u32,
) -> (JointDistribution, Partition) {
    let n = rng.random_range(2..=max_vars);
    let cards: Vec<u32> = (0..n).map(|_| rng.random_range(2..=max_card)).collect();
    let size: usize = cards.iter().map(|&c| c as usize).product();
    let sparsity: f64 = rng.random();
    let mut entries: Vec<(Vec<u32>, f64)> = Vec::new();
    for flat in 0..size {
        let mut rem = flat;
        let mut t = vec![0u32; n];
        for k in (0..n).rev() {
            t[k] = (rem % cards[k] as usize) as u32;
            rem /= cards[k] as usize;
        }
        let w = if rng.random::<f64>() < sparsity {
            0.0
        } else {
            rng.random::<f64>()
        };
        entries.push((t, w));
    }
    if entries.iter().all(|(_, w)| *w == 0.0) {
        entries[0].1 = 1.0;
    }
    let names = (0..n).map(|i| format!("V{i}")).collect();
    let joint = JointDistribution::from_weights(names, &cards, entries).unwrap();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let k = rng.random_range(1..n);
    let part = Partition::new(idx[..k].to_vec(), idx[k..].to_vec()).unwrap();
    (joint, part)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Three binary variables with Z = X xor Y, uniform over the four consistent rows.
pub fn xor_joint() -> JointDistribution {
    let rows = [[0u32, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]];
    JointDistribution::from_rows(&rows, &[2, 2, 2]).unwrap()
}
