//! Multi-indices of total degree `<= n` in graded lexicographic order.

use crate::error::{Error, Result};

/// Exponent tuple `i = (i_1, ..., i_{2d})` with its total degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exponents: Vec<u32>,
    total: u32,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let total = exponents.iter().sum();
        Self { exponents, total }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn dims(&self) -> usize {
        self.exponents.len()
    }
}

/// `C(n + dims, dims)` with overflow detection.
fn index_count(n: u32, dims: usize) -> Result<usize> {
    let mut acc: u128 = 1;
    for k in 1..=dims as u128 {
        acc = acc
            .checked_mul(n as u128 + k)
            .ok_or_else(|| Error::Capacity(format!("binomial({} + {dims}, {dims}) overflows", n)))?;
        acc /= k; // exact: product of k consecutive integers is divisible by k!
    }
    usize::try_from(acc)
        .map_err(|_| Error::Capacity(format!("index set of size {acc} exceeds usize")))
}

fn fill(prefix: &mut Vec<u32>, remaining_dims: usize, degree: u32, out: &mut Vec<MultiIndex>) {
    if remaining_dims == 1 {
        prefix.push(degree);
        out.push(MultiIndex::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for head in 0..=degree {
        prefix.push(head);
        fill(prefix, remaining_dims - 1, degree - head, out);
        prefix.pop();
    }
}

/// All multi-indices with `|i| <= n`, graded lexicographically: total degree
/// ascending, lexicographic (first coordinate most significant) within each
/// degree. The zero index comes first.
pub fn enumerate_indices(n: u32, dims: usize) -> Result<Vec<MultiIndex>> {
    if dims == 0 {
        return Err(Error::Argument("dims must be at least 1".into()));
    }
    let count = index_count(n, dims)?;
    let mut out = Vec::with_capacity(count);
    let mut prefix = Vec::with_capacity(dims);
    for degree in 0..=n {
        fill(&mut prefix, dims, degree, &mut out);
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force oracle: enumerate the full exponent grid and filter.
    fn exhaustive(n: u32, dims: usize) -> Vec<Vec<u32>> {
        let mut all: Vec<Vec<u32>> = vec![vec![]];
        for _ in 0..dims {
            all = all
                .into_iter()
                .flat_map(|v| {
                    (0..=n).map(move |e| {
                        let mut w = v.clone();
                        w.push(e);
                        w
                    })
                })
                .collect();
        }
        let mut kept: Vec<Vec<u32>> = all
            .into_iter()
            .filter(|v| v.iter().sum::<u32>() <= n)
            .collect();
        kept.sort_by_key(|v| (v.iter().sum::<u32>(), v.clone()));
        kept
    }

    #[test]
    fn small_cases_match_oracle() {
        let got = enumerate_indices(1, 2).unwrap();
        let tuples: Vec<&[u32]> = got.iter().map(|i| i.exponents()).collect();
        assert_eq!(tuples, vec![&[0, 0][..], &[0, 1], &[1, 0]]);

        let zero = enumerate_indices(0, 4).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].exponents(), &[0, 0, 0, 0]);
        assert_eq!(zero[0].total(), 0);

        for (n, dims) in [(2, 3), (3, 2), (4, 4), (6, 2)] {
            let got = enumerate_indices(n, dims).unwrap();
            let want = exhaustive(n, dims);
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                assert_eq!(g.exponents(), w.as_slice());
            }
        }
    }

    #[test]
    fn count_is_binomial() {
        // C(8, 2) = 28 for n = 6, dims = 2, so the gradient space has 27.
        assert_eq!(enumerate_indices(6, 2).unwrap().len(), 28);
        fn binom(n: u64, k: u64) -> u64 {
            let mut acc = 1u64;
            for j in 1..=k {
                acc = acc * (n - k + j) / j;
            }
            acc
        }
        for dims in 1..=6usize {
            for n in 0..=10u32 {
                let want = binom((n as u64) + dims as u64, dims as u64) as usize;
                assert_eq!(enumerate_indices(n, dims).unwrap().len(), want);
            }
        }
    }

    #[test]
    fn huge_request_is_a_capacity_error() {
        match enumerate_indices(u32::MAX, 6) {
            Err(Error::Capacity(_)) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
