use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `m + n` accepted by [`enumerate_shuffles`].
pub const SHUFFLE_BUDGET: usize = 12;

/// All `σ` of `{0, …, m+n−1}` increasing on the first `m` and on the last
/// `n` arguments (zero-based).
#[derive(Debug, Clone, Serialize)]
pub struct ShuffleSet {
    pub m: usize,
    pub n: usize,
    pub permutations: Vec<Vec<usize>>,
}

impl ShuffleSet {
    pub fn len(&self) -> usize {
        self.permutations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutations.is_empty()
    }
}

pub fn enumerate_shuffles(m: usize, n: usize) -> Result<ShuffleSet> {
    if m + n > SHUFFLE_BUDGET {
        return Err(Error::Budget(format!("shuffle enumeration of ({m},{n}) exceeds m+n ≤ {SHUFFLE_BUDGET}")));
    }
    let mut permutations = Vec::new();
    let mut chosen = Vec::with_capacity(m);
    choose(0, m + n, m, &mut chosen, &mut |first: &[usize]| {
        let mut sigma = first.to_vec();
        sigma.extend((0..m + n).filter(|i| !first.contains(i)));
        permutations.push(sigma);
    });
    Ok(ShuffleSet { m, n, permutations })
}

/// Visits every increasing `k`-subset of `start..end` in lexicographic order.
fn choose(start: usize, end: usize, k: usize, chosen: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    let need = k - chosen.len();
    for i in start..=end.saturating_sub(need) {
        if i >= end {
            break;
        }
        chosen.push(i);
        choose(i + 1, end, k, chosen, visit);
        chosen.pop();
    }
}

/// `σ^{-1}`: the factor placed in slot `l` is `σ^{-1}(l)`.
pub fn inverse(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; sigma.len()];
    for (j, &l) in sigma.iter().enumerate() {
        inv[l] = j;
    }
    inv
}

/// `C(n, k)` in `u128`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}
