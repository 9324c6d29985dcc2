
use crate::error::{Error, Result};
use crate::opcore::Operator;
use crate::scalar::{cr, Real};

pub const MAX_SYMMETRIC_COPIES: usize = 6;
pub const MAX_SYMMETRIC_DIM: usize = 10_000;

/// `d₊(r) = binomial(r + d − 1, d − 1)`, exact.
pub fn sym_dim(d: usize, r: usize) -> Result<u64> {
    if d == 0 {
        return Err(Error::OutOfRange("local dimension must be ≥ 1".into()));
    }
    let n = (r + d - 1) as u128;
    let k = (d - 1).min(r) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays exact: acc is C(n, i).
        acc = acc
            .checked_mul(n - i)
            .ok_or_else(|| Error::SizeGuard("binomial overflow".into()))?
            / (i + 1);
        if acc > (1u128 << 62) {
            return Err(Error::SizeGuard(format!("d₊({r}) for d={d} exceeds 2^62")));
        }
    }
    Ok(acc as u64)
}

/// All permutations of `0..r` in lexicographic order.
pub(crate) fn permutations(r: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..r).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..r).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..r).rev().find(|&j| current[j] > current[i - 1]).expect("pivot exists");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

fn digits(mut idx: usize, d: usize, r: usize) -> Vec<usize> {
    let mut out = vec![0; r];
    for slot in (0..r).rev() {
        out[slot] = idx % d;
        idx /= d;
    }
    out
}

fn undigits(digs: &[usize], d: usize) -> usize {
    digs.iter().fold(0, |acc, &x| acc * d + x)
}

/// Permutation operator `P_π |i₁…i_r⟩ = |i_{π⁻¹(1)}…⟩`: tensor factor `s`
/// moves to slot `perm[s]`.
pub fn permutation_operator<T: Real>(d: usize, perm: &[usize]) -> Operator<T> {
    let r = perm.len();
    let n = d.pow(r as u32);
    let mut m = Operator::zeros(n, n);
    for col in 0..n {
        let src = digits(col, d, r);
        let mut dst = vec![0; r];
        for (s, &p) in perm.iter().enumerate() {
            dst[p] = src[s];
        }
        m[(undigits(&dst, d), col)] = cr(T::one());
    }
    m
}

/// Projector onto the symmetric subspace of `(ℂ^d)^{⊗r}`, built as
/// `(1/r!) Σ_π P_π`.
pub fn symmetric_subspace_projector<T: Real>(d: usize, r: usize) -> Result<Operator<T>> {
    if d < 2 || r < 1 {
        return Err(Error::OutOfRange(format!("need d ≥ 2 and r ≥ 1, got d={d}, r={r}")));
    }
    if r > MAX_SYMMETRIC_COPIES {
        return Err(Error::SizeGuard(format!(
            "r = {r} exceeds the permutation-sum cap {MAX_SYMMETRIC_COPIES}"
        )));
    }
    let n = d
        .checked_pow(r as u32)
        .filter(|&n| n <= MAX_SYMMETRIC_DIM)
        .ok_or_else(|| Error::SizeGuard(format!("d^r = {d}^{r} exceeds {MAX_SYMMETRIC_DIM}")))?;
    let perms = permutations(r);
    let weight = T::one() / T::from_count(perms.len());
    let mut m = Operator::<T>::zeros(n, n);
    let mut dst = vec![0; r];
    for col in 0..n {
        let src = digits(col, d, r);
        for perm in &perms {
            for (s, &p) in perm.iter().enumerate() {
                dst[p] = src[s];
            }
            m[(undigits(&dst, d), col)] += cr(weight);
        }
    }
    debug_assert!(!m.max_abs().is_zero());
    Ok(m)
}
