use serde::Serialize;

use super::enumerate::{enumerate_shuffles, inverse};
use super::simplex::{Factor, SpectralSimplex, DETERMINISTIC_MAX, SPECTRAL_NODES};
use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// Multi-index `α_j ∈ ℕ₀^d`.
pub type MultiIndex = Vec<u32>;

/// Which input factor sits in a slot of an expanded sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FactorRef {
    F(usize),
    G(usize),
}

/// Per-factor multi-indices of a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DerivativeLedger {
    pub indices: Vec<MultiIndex>,
}

impl DerivativeLedger {
    pub fn new(indices: Vec<MultiIndex>) -> Self {
        Self { indices }
    }

    /// `Σ_j Σ_l α_j^{(l)}`.
    pub fn total(&self) -> u64 {
        self.indices.iter().flatten().map(|&a| a as u64).sum()
    }

    /// Per-coordinate sums `|α^{(l)}| = Σ_j α_j^{(l)}`.
    pub fn per_coordinate(&self) -> Vec<u64> {
        let d = self.indices.iter().map(Vec::len).max().unwrap_or(0);
        (0..d)
            .map(|l| self.indices.iter().map(|a| a.get(l).copied().unwrap_or(0) as u64).sum())
            .collect()
    }

    pub fn concat(&self, other: &DerivativeLedger) -> DerivativeLedger {
        let mut indices = self.indices.clone();
        indices.extend(other.indices.iter().cloned());
        DerivativeLedger { indices }
    }
}

/// `|α| + |β|`.
pub fn total_derivative_order(f_part: &DerivativeLedger, g_part: &DerivativeLedger) -> u64 {
    f_part.total() + g_part.total()
}

/// One term of a partial-shuffle expansion.
#[derive(Debug, Clone, Serialize)]
pub struct ExpandedSequence {
    pub slots: Vec<FactorRef>,
    pub ledger: DerivativeLedger,
}

/// Expansion of
/// `∫_{Δ^n} f_1(s_1)⋯f_k(s_k) [∫_{Δ^p_{θ,s_k}} g_1⋯g_p] f_{k+1}(s_{k+1})⋯f_n(s_n)`
/// into a sum over `Δ^{n+p}`: `f_1, …, f_k` stay in front and the `g`-block
/// is shuffled into the suffix `f_{k+1}, …, f_n`. For `k = 0` the inner
/// integral runs up to `t`, which gives the plain shuffle of both lists.
#[derive(Debug, Clone, Serialize)]
pub struct PartialShuffle {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub sequences: Vec<ExpandedSequence>,
}

pub fn partial_shuffle_expand(f: &[MultiIndex], g: &[MultiIndex], k: usize) -> Result<PartialShuffle> {
    let (n, p) = (f.len(), g.len());
    if k > n {
        return Err(domain(format!("inner integral position k = {k} exceeds n = {n}")));
    }
    let tail = n - k;
    let set = enumerate_shuffles(tail, p)?;
    let sequences = set
        .permutations
        .iter()
        .map(|sigma| {
            let inv = inverse(sigma);
            let mut slots: Vec<FactorRef> = (0..k).map(FactorRef::F).collect();
            slots.extend(inv.iter().map(|&j| if j < tail { FactorRef::F(k + j) } else { FactorRef::G(j - tail) }));
            let ledger = DerivativeLedger::new(
                slots
                    .iter()
                    .map(|s| match *s {
                        FactorRef::F(j) => f[j].clone(),
                        FactorRef::G(i) => g[i].clone(),
                    })
                    .collect(),
            );
            ExpandedSequence { slots, ledger }
        })
        .collect();
    Ok(PartialShuffle { n, p, k, sequences })
}

fn check_budget(m: usize) -> Result<()> {
    if m > DETERMINISTIC_MAX {
        return Err(Error::Budget(format!("simplex dimension {m} exceeds {DETERMINISTIC_MAX}")));
    }
    Ok(())
}

fn relative<T: Scalar>(lhs: T, rhs: T) -> T {
    let scale = lhs.abs();
    if scale > T::zero() {
        (lhs - rhs).abs() / scale
    } else {
        (lhs - rhs).abs()
    }
}

/// Left and right sides of the shuffle identity
/// `∫_{Δ^m} Π f_j · ∫_{Δ^n} Π g_i = Σ_{σ ∈ S(m,n)} ∫_{Δ^{m+n}} Π_l h_{σ^{-1}(l)}(w_l)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub terms: usize,
    /// `|lhs − rhs| / |lhs|` (absolute when `lhs = 0`).
    pub residual: T,
}

pub fn verify_shuffle_identity<T: Scalar>(
    f: &[Factor<'_, T>],
    g: &[Factor<'_, T>],
    theta: T,
    t: T,
) -> Result<IdentityCheck<T>> {
    let (m, n) = (f.len(), g.len());
    check_budget(m + n)?;
    let rule = SpectralSimplex::new(theta, t, SPECTRAL_NODES)?;
    let lhs = rule.simplex(f) * rule.simplex(g);
    let all: Vec<Factor<'_, T>> = f.iter().chain(g).copied().collect();
    let set = enumerate_shuffles(m, n)?;
    let mut rhs = T::zero();
    for sigma in &set.permutations {
        let seq: Vec<Factor<'_, T>> = inverse(sigma).iter().map(|&j| all[j]).collect();
        rhs = rhs + rule.simplex(&seq);
    }
    Ok(IdentityCheck { lhs, rhs, terms: set.len(), residual: relative(lhs, rhs) })
}

/// Both sides of the partial-shuffle identity for concrete factors.
pub fn verify_partial_shuffle<T: Scalar>(
    f: &[Factor<'_, T>],
    g: &[Factor<'_, T>],
    k: usize,
    theta: T,
    t: T,
) -> Result<IdentityCheck<T>> {
    let (n, p) = (f.len(), g.len());
    check_budget(n + p)?;
    let blank = vec![Vec::new(); n];
    let blank_g = vec![Vec::new(); p];
    let expansion = partial_shuffle_expand(&blank, &blank_g, k)?;
    let rule = SpectralSimplex::new(theta, t, SPECTRAL_NODES)?;
    let inner = rule.running(g);
    let lhs = if k == 0 {
        inner[0] * rule.simplex(f)
    } else {
        // Running integral of f_{k+1..n}, weighted by the inner block at s_k,
        // then continued through f_k, …, f_1.
        let tail = rule.running(&f[k..]);
        let nodes = rule.nodes();
        let mut acc: Vec<T> = (0..nodes.len()).map(|i| f[k - 1](nodes[i]) * inner[i] * tail[i]).collect();
        acc = rule.integrate(&acc);
        for fj in f[..k - 1].iter().rev() {
            let prod: Vec<T> = nodes.iter().zip(&acc).map(|(&s, &a)| fj(s) * a).collect();
            acc = rule.integrate(&prod);
        }
        acc[0]
    };
    let mut rhs = T::zero();
    for seq in &expansion.sequences {
        let factors: Vec<Factor<'_, T>> = seq
            .slots
            .iter()
            .map(|s| match *s {
                FactorRef::F(j) => f[j],
                FactorRef::G(i) => g[i],
            })
            .collect();
        rhs = rhs + rule.simplex(&factors);
    }
    Ok(IdentityCheck { lhs, rhs, terms: expansion.sequences.len(), residual: relative(lhs, rhs) })
}
