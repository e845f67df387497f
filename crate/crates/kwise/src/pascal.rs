//! The random-sign Pascal triangle.
//!
//! ```text
//! X_{0,0} = 1,   X_{n,−1} = X_{n,n+1} = 0,
//! X_{n,k} = ξ⁺_{n−1,k−1}·X_{n−1,k−1} + ξ⁻_{n−1,k}·X_{n−1,k}
//! ```
//!
//! with one fresh fair sign per edge. Cross terms vanish in expectation, so
//! E X_{n,k}² = C(n,k) satisfies Pascal's rule; the all-plus seed reproduces
//! the binomial triangle exactly, and signs never change parity, so
//! X_{n,k} ≡ C(n,k) (mod 2) always. The distribution of the central
//! coefficient X_{2n,n} is the open experimental question this module feeds.
//!
//! Entries are exactly representable: machine-width (i64/i128) while central
//! binomials fit, BigInt beyond, behind the [`Entry`] scalar trait.

use crate::error::{Error, Result};
use crate::num::Entry;
use crate::seed::{SeedStream, Sign};
use num_integer::binomial;
use serde::Serialize;

/// Rows 0..=n_max of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedTriangle<E> {
    rows: Vec<Vec<E>>,
}

impl<E: Entry> SignedTriangle<E> {
    pub fn rows(&self) -> &[Vec<E>] {
        &self.rows
    }

    pub fn n_max(&self) -> u32 {
        self.rows.len() as u32 - 1
    }

    /// Entry X_{n,k}; the out-of-triangle boundary is zero.
    pub fn value(&self, n: u32, k: i64) -> E {
        if k < 0 || k > n as i64 {
            return E::zero();
        }
        self.rows[n as usize][k as usize].clone()
    }
}

/// Grows the triangle from an arbitrary sign source — deterministic fixtures
/// (all-plus reproduces the binomial triangle) and exhaustive-enumeration
/// oracles drive this directly.
///
/// Signs are consumed row by row, entries left to right, left edge before
/// right edge, and only where the recurrence has a structurally present
/// parent. This makes realizations prefix-stable in n_max.
pub fn grow_triangle_with<E: Entry>(
    n_max: u32,
    source: impl FnMut() -> Sign,
) -> Result<SignedTriangle<E>> {
    if let Some(max) = E::max_rows() {
        if n_max > max {
            return Err(Error::InvalidParameter(format!(
                "n_max = {n_max} exceeds the entry scalar's exact range ({max} rows)"
            )));
        }
    }
    Ok(grow_with(n_max, source))
}

fn grow_with<E: Entry>(n_max: u32, mut next_sign: impl FnMut() -> Sign) -> SignedTriangle<E> {
    let mut rows: Vec<Vec<E>> = Vec::with_capacity(n_max as usize + 1);
    rows.push(vec![E::one()]);
    for n in 1..=n_max as usize {
        let prev = &rows[n - 1];
        let mut row = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = E::zero();
            if k >= 1 {
                let left = prev[k - 1].clone();
                acc += if next_sign() == 1 { left } else { -left };
            }
            if k < n {
                let right = prev[k].clone();
                acc += if next_sign() == 1 { right } else { -right };
            }
            row.push(acc);
        }
        rows.push(row);
    }
    SignedTriangle { rows }
}

/// Grows rows 0..=n_max with fresh signs from `stream`.
pub fn grow_triangle<E: Entry>(n_max: u32, stream: &mut SeedStream) -> Result<SignedTriangle<E>> {
    grow_triangle_with(n_max, || stream.next_sign())
}

/// Number of signs a triangle of `n_max` rows consumes: Σ_{r≤n} 2r·... each
/// row n has 2n consumed edges.
pub fn signs_consumed(n_max: u32) -> u64 {
    (n_max as u64) * (n_max as u64 + 1)
}

/// Summary statistics of the central coefficient X_{2n,n}.
#[derive(Debug, Clone, Serialize)]
pub struct CentralStats {
    pub n: u32,
    pub trials: u64,
    pub mean: f64,
    pub mean_se: f64,
    /// Empirical E X_{2n,n}², to compare with C(2n,n).
    pub second_moment: f64,
    pub second_moment_se: f64,
    pub expected_second_moment: f64,
    /// E X⁴ / (E X²)², the normalized fourth moment.
    pub normalized_fourth: f64,
    /// Histogram of X/√C(2n,n) over fixed bins (center, count).
    pub histogram: Vec<(f64, u64)>,
}

const HIST_BINS: usize = 41;
const HIST_SPAN: f64 = 5.0;

/// Monte-Carlo law of the central coefficient over `trials` triangles grown
/// from substreams of `base`.
pub fn central_statistics(n: u32, trials: u64, base: &SeedStream) -> Result<CentralStats> {
    if trials < 1000 {
        return Err(Error::InvalidParameter(format!(
            "{trials} trials is below the 10^3 floor"
        )));
    }
    if n > 60 {
        return Err(Error::InvalidParameter(
            "central statistics use i128 entries; n ≤ 60 keeps them exact".into(),
        ));
    }
    let expected = binomial(2u128 * n as u128, n as u128) as f64;
    let scale = expected.sqrt();
    let values: Vec<f64> = (0..trials)
        .map(|t| {
            let mut stream = base.derive(t);
            let tri: SignedTriangle<i128> = grow_with(2 * n, || stream.next_sign());
            tri.value(2 * n, n as i64) as f64
        })
        .collect();
    let tf = trials as f64;
    let mean = values.iter().sum::<f64>() / tf;
    let m2 = values.iter().map(|v| v * v).sum::<f64>() / tf;
    let m4 = values.iter().map(|v| v * v * v * v).sum::<f64>() / tf;
    let se = |xs: &dyn Fn(f64) -> f64| -> f64 {
        let est = values.iter().map(|&v| xs(v)).sum::<f64>() / tf;
        let ss = values
            .iter()
            .map(|&v| (xs(v) - est) * (xs(v) - est))
            .sum::<f64>();
        (ss / (tf * (tf - 1.0))).sqrt()
    };
    let mut histogram: Vec<(f64, u64)> = (0..HIST_BINS)
        .map(|b| {
            let center = -HIST_SPAN + (b as f64 + 0.5) * (2.0 * HIST_SPAN / HIST_BINS as f64);
            (center, 0)
        })
        .collect();
    for &v in &values {
        let z = v / scale;
        let b = (((z + HIST_SPAN) / (2.0 * HIST_SPAN) * HIST_BINS as f64) as isize)
            .clamp(0, HIST_BINS as isize - 1) as usize;
        histogram[b].1 += 1;
    }
    Ok(CentralStats {
        n,
        trials,
        mean,
        mean_se: se(&|v| v),
        second_moment: m2,
        second_moment_se: se(&|v| v * v),
        expected_second_moment: expected,
        normalized_fourth: m4 / (m2 * m2),
        histogram,
    })
}
