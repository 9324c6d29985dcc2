use num_traits::Zero;

use crate::error::{Error, Result};
use crate::opcore::{DensityOperator, Operator};
use crate::scalar::{Real, C};

pub fn tensor<T: Real>(a: &Operator<T>, b: &Operator<T>) -> Operator<T> {
    a.kron(b)
}

/// `A₁ ⊗ A₂ ⊗ …`.
pub fn tensor_all<T: Real>(ops: &[Operator<T>]) -> Operator<T> {
    let mut it = ops.iter();
    let first = it.next().expect("at least one factor").clone();
    it.fold(first, |acc, op| acc.kron(op))
}

/// `I ⊗ … ⊗ op (at position `site`) ⊗ … ⊗ I`.
pub fn embed<T: Real>(op: &Operator<T>, dims: &[usize], site: usize) -> Operator<T> {
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    Operator::identity(left).kron(op).kron(&Operator::identity(right))
}

fn validate_keep(dims: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Shape(format!("invalid subsystem dims {dims:?}")));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Shape(format!(
            "keep set {keep:?} out of range for {} subsystems",
            dims.len()
        )));
    }
    Ok(keep)
}

/// Partial trace of a square operator over every subsystem not in `keep`.
/// Kept subsystems retain their original relative order.
pub fn partial_trace_op<T: Real>(m: &Operator<T>, dims: &[usize], keep: &[usize]) -> Result<Operator<T>> {
    let keep = validate_keep(dims, keep)?;
    let total: usize = dims.iter().product();
    let n = m.dim()?;
    if n != total {
        return Err(Error::DimMismatch {
            expected: total,
            got: n,
        });
    }
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim = total / kept_dim;

    // Decompose every full index into (kept index, traced index).
    let mut kept_of = vec![0usize; total];
    let mut traced_of = vec![0usize; total];
    for (idx, (kk, tt)) in kept_of.iter_mut().zip(traced_of.iter_mut()).enumerate() {
        let mut rem = idx;
        let mut digits = vec![0usize; dims.len()];
        for s in (0..dims.len()).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let (mut a, mut b) = (0usize, 0usize);
        for (s, &d) in digits.iter().enumerate() {
            if keep.binary_search(&s).is_ok() {
                a = a * dims[s] + d;
            } else {
                b = b * dims[s] + d;
            }
        }
        *kk = a;
        *tt = b;
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::with_capacity(kept_dim); traced_dim];
    for idx in 0..total {
        groups[traced_of[idx]].push(idx);
    }
    let mut out = vec![C::<T>::zero(); kept_dim * kept_dim];
    for g in &groups {
        for &i in g {
            let row = kept_of[i] * kept_dim;
            for &j in g {
                out[row + kept_of[j]] += m.get(i, j);
            }
        }
    }
    Ok(Operator::from_raw(kept_dim, kept_dim, out))
}

pub fn partial_trace<T: Real>(rho: &DensityOperator<T>, dims: &[usize], keep: &[usize]) -> Result<DensityOperator<T>> {
    Ok(DensityOperator::from_trusted(partial_trace_op(rho.matrix(), dims, keep)?))
}
