//! k-wise independent bond percolation on an n × n(k+1) box with a
//! guaranteed narrow-side crossing.
//!
//! The box splits into k+1 disjoint n × n sub-boxes (no bonds join adjacent
//! sub-boxes, so components never leave their sub-box). Bonds are i.i.d.
//! Bernoulli(p), conditioned on the number of sub-boxes with a narrow-
//! direction crossing being odd — like conditioning k+1 Bernoulli variables
//! on an odd sum. Odd means nonzero, and a narrow-direction crossing of one
//! sub-box (top long side to bottom long side, span n) crosses the whole box,
//! so every accepted sample crosses with probability 1.
//!
//! Site convention per sub-box: an n × n grid, bonds between orthogonal
//! nearest neighbors (2n(n−1) bonds). "Narrow" joins row 0 to row n−1;
//! "wide" joins column 0 to column n−1 of the sub-box.

use crate::error::{Error, Result};
use crate::lab::{
    chi_square_p_value, chi_square_stat, IndependenceReport, TestMode, Violation,
};
use crate::seed::SeedStream;
use rayon::prelude::*;
use serde::Serialize;

/// Rejection budget for the odd-crossing conditioning.
pub const CONDITIONING_BUDGET: u64 = 100_000;

/// Union-find over sub-box sites plus two virtual side nodes.
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while i != root {
            let next = self.parent[i];
            self.parent[i] = root;
            i = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }

    fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Crossing direction within a sub-box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossDirection {
    /// Top long side to bottom long side (row 0 ↔ row n−1): spans the narrow
    /// side of the full box.
    Narrow,
    /// Left to right within the sub-box (column 0 ↔ column n−1).
    Wide,
}

/// Open/closed bonds of one n × n sub-box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxBonds {
    n: u32,
    /// (r, c)–(r, c+1): index r·(n−1) + c, for r < n, c < n−1.
    horizontal: Vec<bool>,
    /// (r, c)–(r+1, c): index r·n + c, for r < n−1, c < n.
    vertical: Vec<bool>,
}

impl BoxBonds {
    pub fn sample(n: u32, p: f64, stream: &mut SeedStream) -> BoxBonds {
        let nn = n as usize;
        BoxBonds {
            n,
            horizontal: (0..nn * (nn - 1)).map(|_| stream.next_bernoulli(p)).collect(),
            vertical: (0..(nn - 1) * nn).map(|_| stream.next_bernoulli(p)).collect(),
        }
    }

    pub fn filled(n: u32, open: bool) -> BoxBonds {
        let nn = n as usize;
        BoxBonds {
            n,
            horizontal: vec![open; nn * (nn - 1)],
            vertical: vec![open; (nn - 1) * nn],
        }
    }

    pub fn side(&self) -> u32 {
        self.n
    }

    /// Bonds per sub-box: 2n(n−1).
    pub fn bond_count(n: u32) -> u64 {
        2 * n as u64 * (n as u64 - 1)
    }

    /// Bond by local index: horizontal bonds first, then vertical.
    pub fn bond(&self, local: u64) -> bool {
        let h = self.horizontal.len() as u64;
        if local < h {
            self.horizontal[local as usize]
        } else {
            self.vertical[(local - h) as usize]
        }
    }

    pub fn set_bond(&mut self, local: u64, open: bool) {
        let h = self.horizontal.len() as u64;
        if local < h {
            self.horizontal[local as usize] = open;
        } else {
            self.vertical[(local - h) as usize] = open;
        }
    }

    fn site(&self, r: u32, c: u32) -> usize {
        (r * self.n + c) as usize
    }
}

/// Union-find crossing detector with two virtual side nodes.
pub fn has_crossing(bx: &BoxBonds, direction: CrossDirection) -> bool {
    let n = bx.n;
    let sites = (n * n) as usize;
    let (src, dst) = (sites, sites + 1);
    let mut uf = UnionFind::new(sites + 2);
    for r in 0..n {
        for c in 0..n - 1 {
            if bx.horizontal[(r * (n - 1) + c) as usize] {
                uf.union(bx.site(r, c), bx.site(r, c + 1));
            }
        }
    }
    for r in 0..n - 1 {
        for c in 0..n {
            if bx.vertical[(r * n + c) as usize] {
                uf.union(bx.site(r, c), bx.site(r + 1, c));
            }
        }
    }
    match direction {
        CrossDirection::Narrow => {
            for c in 0..n {
                uf.union(src, bx.site(0, c));
                uf.union(dst, bx.site(n - 1, c));
            }
        }
        CrossDirection::Wide => {
            for r in 0..n {
                uf.union(src, bx.site(r, 0));
                uf.union(dst, bx.site(r, n - 1));
            }
        }
    }
    uf.same(src, dst)
}

/// Breadth-first crossing oracle, independent of the union-find route.
pub fn has_crossing_bfs(bx: &BoxBonds, direction: CrossDirection) -> bool {
    let n = bx.n;
    let mut visited = vec![false; (n * n) as usize];
    let mut queue: Vec<(u32, u32)> = Vec::new();
    match direction {
        CrossDirection::Narrow => (0..n).for_each(|c| queue.push((0, c))),
        CrossDirection::Wide => (0..n).for_each(|r| queue.push((r, 0))),
    }
    for &(r, c) in &queue {
        visited[bx.site(r, c)] = true;
    }
    while let Some((r, c)) = queue.pop() {
        let arrived = match direction {
            CrossDirection::Narrow => r == n - 1,
            CrossDirection::Wide => c == n - 1,
        };
        if arrived {
            return true;
        }
        let mut visit = |r2: u32, c2: u32, open: bool| {
            if open && !visited[(r2 * n + c2) as usize] {
                visited[(r2 * n + c2) as usize] = true;
                queue.push((r2, c2));
            }
        };
        if c + 1 < n {
            visit(r, c + 1, bx.horizontal[(r * (n - 1) + c) as usize]);
        }
        if c > 0 {
            visit(r, c - 1, bx.horizontal[(r * (n - 1) + c - 1) as usize]);
        }
        if r + 1 < n {
            visit(r + 1, c, bx.vertical[(r * n + c) as usize]);
        }
        if r > 0 {
            visit(r - 1, c, bx.vertical[((r - 1) * n + c) as usize]);
        }
    }
    false
}

/// One accepted configuration of the full n × n(k+1) box.
#[derive(Debug, Clone)]
pub struct BondConfig {
    pub n: u32,
    pub k: u32,
    pub p: f64,
    pub boxes: Vec<BoxBonds>,
    /// Narrow-direction crossing indicator per sub-box.
    pub box_crossings: Vec<bool>,
    /// Rejected draws before acceptance.
    pub rejections: u64,
}

impl BondConfig {
    pub fn crossing_count(&self) -> usize {
        self.box_crossings.iter().filter(|&&c| c).count()
    }

    /// The conditioning event.
    pub fn odd_crossings(&self) -> bool {
        self.crossing_count() % 2 == 1
    }

    /// Narrow-side crossing of the full box: components never leave a
    /// sub-box, so this is "some sub-box crosses".
    pub fn full_box_crossing(&self) -> bool {
        self.box_crossings.iter().any(|&c| c)
    }

    /// Bond by global 1-based index: sub-boxes in order, horizontal bonds
    /// before vertical within each.
    pub fn bond(&self, global: u64) -> bool {
        let per_box = BoxBonds::bond_count(self.n);
        let b = (global - 1) / per_box;
        self.boxes[b as usize].bond((global - 1) % per_box)
    }
}

/// Total bonds of the full box, for global indexing.
pub fn total_bonds(n: u32, k: u32) -> u64 {
    (k as u64 + 1) * BoxBonds::bond_count(n)
}

/// Bernoulli(p) bonds conditioned on an odd number of crossing sub-boxes,
/// by rejection.
pub fn sample_conditioned(
    n: u32,
    k: u32,
    p: f64,
    stream: &mut SeedStream,
) -> Result<BondConfig> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "bond probability p = {p} must lie in (0, 1)"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("side n = {n} must be ≥ 2")));
    }
    for rejections in 0..CONDITIONING_BUDGET {
        let boxes: Vec<BoxBonds> = (0..=k).map(|_| BoxBonds::sample(n, p, stream)).collect();
        let box_crossings: Vec<bool> = boxes
            .iter()
            .map(|b| has_crossing(b, CrossDirection::Narrow))
            .collect();
        if box_crossings.iter().filter(|&&c| c).count() % 2 == 1 {
            return Ok(BondConfig {
                n,
                k,
                p,
                boxes,
                box_crossings,
                rejections,
            });
        }
    }
    Err(Error::RejectionBudget {
        attempts: CONDITIONING_BUDGET,
        context: format!("odd-crossing conditioning at n={n}, k={k}, p={p}"),
    })
}

/// Chi-square verdict on bond tuples plus the per-bond marginal check.
#[derive(Debug, Clone, Serialize)]
pub struct BondKwiseReport {
    pub report: IndependenceReport,
    /// Worst |p̂ − p| over tested bonds, in binomial σ units.
    pub marginal_max_dev_sigmas: f64,
    /// Family-wise threshold: the max of that many |N(0,1)| draws stays
    /// below this with probability 1 − α.
    pub marginal_threshold_sigmas: f64,
    pub marginals_pass: bool,
}

/// Draws `num_tuples` k-tuples of distinct bonds and chi-square-tests them
/// against the product Bernoulli(p) law over `trials` conditioned samples.
///
/// With `avoid_one_box`, each tuple picks its k bonds from k distinct
/// sub-boxes, leaving at least one sub-box untouched — the regime where the
/// product law is expected. Without it, tuples may cover all k+1 sub-boxes,
/// exposing the conditioning for probing.
#[allow(clippy::too_many_arguments)]
pub fn verify_bond_kwise(
    n: u32,
    k: u32,
    p: f64,
    num_tuples: usize,
    trials: u64,
    alpha: f64,
    seed: u64,
    avoid_one_box: bool,
) -> Result<BondKwiseReport> {
    if trials < 100 << k {
        return Err(Error::InvalidParameter(format!(
            "{trials} trials inadequate for k={k}; need ≥ {}",
            100u64 << k
        )));
    }
    let per_box = BoxBonds::bond_count(n);
    let root = SeedStream::new(seed);
    let mut tuple_stream = root.derive(1);
    let mut tuples: Vec<Vec<u64>> = Vec::with_capacity(num_tuples);
    for _ in 0..num_tuples {
        let mut tuple = Vec::with_capacity(k as usize);
        if avoid_one_box {
            // k distinct sub-boxes out of k+1, one bond in each
            let spare = tuple_stream.next_word() % (k as u64 + 1);
            for b in (0..=k as u64).filter(|&b| b != spare) {
                let local = tuple_stream.next_word() % per_box;
                tuple.push(b * per_box + local + 1);
            }
        } else {
            while tuple.len() < k as usize + 1 {
                let g = tuple_stream.next_word() % total_bonds(n, k) + 1;
                if !tuple.contains(&g) {
                    tuple.push(g);
                }
            }
        }
        tuple.sort_unstable();
        tuples.push(tuple);
    }

    let base = root.derive(2);
    let tables: Vec<Vec<u64>> = (0..trials)
        .into_par_iter()
        .fold(
            || tuples.iter().map(|t| vec![0u64; 1 << t.len()]).collect(),
            |mut acc: Vec<Vec<u64>>, trial| {
                let mut stream = base.derive(trial);
                let config = sample_conditioned(n, k, p, &mut stream)
                    .expect("p in (0,1) keeps acceptance bounded away from 0");
                for (table, tuple) in acc.iter_mut().zip(tuples.iter()) {
                    let mut pattern = 0usize;
                    for (r, &g) in tuple.iter().enumerate() {
                        if config.bond(g) {
                            pattern |= 1 << r;
                        }
                    }
                    table[pattern] += 1;
                }
                acc
            },
        )
        .reduce(
            || tuples.iter().map(|t| vec![0u64; 1 << t.len()]).collect(),
            |mut a, b| {
                for (ta, tb) in a.iter_mut().zip(b.iter()) {
                    for (x, y) in ta.iter_mut().zip(tb.iter()) {
                        *x += y;
                    }
                }
                a
            },
        );

    let per_test_alpha = alpha / tuples.len() as f64;
    let mut violations = Vec::new();
    let mut marginal_max_dev = 0.0f64;
    for (tuple, observed) in tuples.iter().zip(tables.iter()) {
        let width = tuple.len();
        // expected cell probability: bit set ⟺ bond open, weight p
        let expected: Vec<f64> = (0..1usize << width)
            .map(|pattern| {
                let open = pattern.count_ones();
                trials as f64
                    * p.powi(open as i32)
                    * (1.0 - p).powi((width as u32 - open) as i32)
            })
            .collect();
        let statistic = chi_square_stat(observed, &expected);
        let p_value = chi_square_p_value(statistic, ((1 << width) - 1) as f64);
        if p_value < per_test_alpha {
            violations.push(Violation {
                indices: tuple.clone(),
                observed: observed.clone(),
                expected,
                statistic,
                p_value: Some(p_value),
            });
        }
        // marginals: P(bond r open) from the table
        let marginal_se = (p * (1.0 - p) / trials as f64).sqrt();
        for r in 0..width {
            let open: u64 = (0..1usize << width)
                .filter(|pat| pat >> r & 1 == 1)
                .map(|pat| observed[pat])
                .sum();
            let dev = (open as f64 / trials as f64 - p).abs() / marginal_se;
            marginal_max_dev = marginal_max_dev.max(dev);
        }
    }

    let report = IndependenceReport {
        mode: TestMode::MonteCarlo,
        construction: format!("perc(n={n}, k={k}, p={p})"),
        tuples_tested: tuples.len(),
        sample_size: trials,
        alpha: Some(alpha),
        passed: violations.is_empty(),
        violations,
    };
    let margins_tested: usize = tuples.iter().map(|t| t.len()).sum();
    let threshold = two_sided_normal_quantile(alpha / margins_tested as f64);
    Ok(BondKwiseReport {
        marginals_pass: marginal_max_dev <= threshold,
        marginal_max_dev_sigmas: marginal_max_dev,
        marginal_threshold_sigmas: threshold,
        report,
    })
}

/// z with P(|N(0,1)| > z) = α: the Bonferroni yardstick for a family of
/// marginal checks.
fn two_sided_normal_quantile(alpha: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - alpha / 2.0)
}
