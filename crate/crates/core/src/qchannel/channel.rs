use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::opcore::{hermitian_eig, partial_trace_op, trace_norm, DensityOperator, Operator, SUPPORT_CUTOFF};
use crate::scalar::{Real, C};

/// Kraus-completeness tolerance for trace preservation.
pub const TP_TOL: f64 = 1e-8;
/// Choi trace distance below which two channels are equal.
pub const CHANNEL_EQ_TOL: f64 = 1e-8;
/// Kraus operators from a Choi factorization with smaller weight are dropped.
pub const KRAUS_WEIGHT_CUTOFF: f64 = 1e-12;

/// Completely positive map in Kraus form; not necessarily trace preserving.
#[derive(Clone, Debug)]
pub struct KrausMap<T: Real> {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<Operator<T>>,
}

impl<T: Real> KrausMap<T> {
    pub fn new(in_dim: usize, out_dim: usize, kraus: Vec<Operator<T>>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Shape("no Kraus operators".into()));
        }
        for k in &kraus {
            if k.rows() != out_dim || k.cols() != in_dim {
                return Err(Error::Shape(format!(
                    "Kraus operator is {}x{}, expected {out_dim}x{in_dim}",
                    k.rows(),
                    k.cols()
                )));
            }
            if !k.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { in_dim, out_dim, kraus })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[Operator<T>] {
        &self.kraus
    }

    pub fn apply_op(&self, x: &Operator<T>) -> Result<Operator<T>> {
        if x.rows() != self.in_dim || x.cols() != self.in_dim {
            return Err(Error::DimMismatch {
                expected: self.in_dim,
                got: x.rows(),
            });
        }
        Ok(self
            .kraus
            .iter()
            .fold(Operator::zeros(self.out_dim, self.out_dim), |acc, k| &acc + &k.sandwich(x)))
    }

    /// `Σ K†K`.
    pub fn completeness(&self) -> Operator<T> {
        self.kraus
            .iter()
            .fold(Operator::zeros(self.in_dim, self.in_dim), |acc, k| {
                &acc + &k.adjoint().matmul(k)
            })
    }

    /// The Hilbert–Schmidt adjoint, Kraus set `{K†}`.
    pub fn adjoint(&self) -> Self {
        Self {
            in_dim: self.out_dim,
            out_dim: self.in_dim,
            kraus: self.kraus.iter().map(Operator::adjoint).collect(),
        }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &Self) -> Result<Self> {
        if first.out_dim != self.in_dim {
            return Err(Error::DimMismatch {
                expected: self.in_dim,
                got: first.out_dim,
            });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                let ab = a.matmul(b);
                if !ab.max_abs().is_zero() {
                    kraus.push(ab);
                }
            }
        }
        if kraus.is_empty() {
            kraus.push(Operator::zeros(self.out_dim, first.in_dim));
        }
        Ok(Self {
            in_dim: first.in_dim,
            out_dim: self.out_dim,
            kraus,
        })
    }

    /// `J = Σ_{ij} |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, input factor first.
    pub fn choi(&self) -> Operator<T> {
        let (n, m) = (self.in_dim, self.out_dim);
        let dim = n * m;
        let mut j = Operator::zeros(dim, dim);
        let mut v = vec![C::<T>::zero(); dim];
        for k in &self.kraus {
            for i in 0..n {
                for a in 0..m {
                    v[i * m + a] = k.get(a, i);
                }
            }
            for (r, &vr) in v.iter().enumerate() {
                if vr.is_zero() {
                    continue;
                }
                for (c, &vc) in v.iter().enumerate() {
                    j[(r, c)] += vr * vc.conj();
                }
            }
        }
        j
    }

    /// Kraus operators from the eigendecomposition of a Choi matrix.
    pub fn from_choi(j: &Operator<T>, in_dim: usize, out_dim: usize) -> Result<Self> {
        let dim = j.dim()?;
        if dim != in_dim * out_dim {
            return Err(Error::DimMismatch {
                expected: in_dim * out_dim,
                got: dim,
            });
        }
        let spec = hermitian_eig(j)?;
        let min = spec.min_eigenvalue();
        if min < -T::tol(1e-8) {
            return Err(Error::NotCompletelyPositive(min.as_f64()));
        }
        let cutoff = T::lit(KRAUS_WEIGHT_CUTOFF) * spec.max_eigenvalue().max(T::one());
        let mut kraus = Vec::new();
        for (idx, &lambda) in spec.eigenvalues.iter().enumerate().rev() {
            if lambda < cutoff {
                continue;
            }
            let s = lambda.sqrt();
            kraus.push(Operator::from_fn(out_dim, in_dim, |a, i| {
                spec.eigenvectors.get(i * out_dim + a, idx) * s
            }));
        }
        if kraus.is_empty() {
            kraus.push(Operator::zeros(out_dim, in_dim));
        }
        Self::new(in_dim, out_dim, kraus)
    }
}

/// Completely positive trace-preserving map between named spaces.
///
/// Kraus form is the ground truth; the Choi matrix is derived once on demand.
#[derive(Clone, Debug)]
pub struct Channel<T: Real> {
    map: KrausMap<T>,
    name: String,
    /// Projector onto the input subspace where the construction is faithful
    /// (e.g. the support of `N(κ)` for a Petz map).
    domain: Option<Operator<T>>,
    choi: OnceLock<Operator<T>>,
}

impl<T: Real> Channel<T> {
    pub fn new(in_dim: usize, out_dim: usize, kraus: Vec<Operator<T>>, name: impl Into<String>) -> Result<Self> {
        Self::from_map(KrausMap::new(in_dim, out_dim, kraus)?, name)
    }

    pub fn from_map(map: KrausMap<T>, name: impl Into<String>) -> Result<Self> {
        let dev = (&map.completeness() - &Operator::identity(map.in_dim)).max_abs();
        if !(dev <= T::tol(TP_TOL)) {
            return Err(Error::NotTracePreserving(dev.as_f64()));
        }
        Ok(Self {
            map,
            name: name.into(),
            domain: None,
            choi: OnceLock::new(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, n, vec![Operator::identity(n)], "identity").expect("identity is a channel")
    }

    /// `ρ ↦ UρU†`.
    pub fn unitary(u: &Operator<T>, name: impl Into<String>) -> Result<Self> {
        let n = u.dim()?;
        let dev = u.unitarity_deviation();
        if !(dev <= T::tol(1e-9)) {
            return Err(Error::NotUnitary(dev.as_f64()));
        }
        Self::new(n, n, vec![u.clone()], name)
    }

    /// Partial trace keeping subsystems `keep` (in their original order).
    pub fn partial_trace(dims: &[usize], keep: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        // Kraus operators ⟨t|_traced for each basis state of the traced part;
        // build them by tracing the basis dyads.
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        if keep_sorted.iter().any(|&k| k >= dims.len()) || dims.iter().any(|&d| d == 0) {
            return Err(Error::Shape(format!("invalid partial trace {dims:?} keep {keep:?}")));
        }
        let kept_dim: usize = keep_sorted.iter().map(|&k| dims[k]).product();
        let traced_dim = total / kept_dim;
        let mut kraus = vec![Operator::zeros(kept_dim, total); traced_dim];
        for idx in 0..total {
            let mut rem = idx;
            let mut digits = vec![0usize; dims.len()];
            for s in (0..dims.len()).rev() {
                digits[s] = rem % dims[s];
                rem /= dims[s];
            }
            let (mut a, mut t) = (0usize, 0usize);
            for (s, &dgt) in digits.iter().enumerate() {
                if keep_sorted.binary_search(&s).is_ok() {
                    a = a * dims[s] + dgt;
                } else {
                    t = t * dims[s] + dgt;
                }
            }
            kraus[t][(a, idx)] = C::one();
        }
        Self::new(total, kept_dim, kraus, format!("partial-trace{dims:?}->{keep_sorted:?}"))
    }

    pub fn from_choi(j: &Operator<T>, in_dim: usize, out_dim: usize, name: impl Into<String>) -> Result<Self> {
        let reduced = partial_trace_op(j, &[in_dim, out_dim], &[0])?;
        let dev = (&reduced - &Operator::identity(in_dim)).max_abs();
        if !(dev <= T::tol(1e-6)) {
            return Err(Error::NotTracePreserving(dev.as_f64()));
        }
        Self::from_map(KrausMap::from_choi(j, in_dim, out_dim)?, name)
    }

    pub fn with_domain(mut self, projector: Operator<T>) -> Self {
        self.domain = Some(projector);
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn domain(&self) -> Option<&Operator<T>> {
        self.domain.as_ref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn in_dim(&self) -> usize {
        self.map.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.map.out_dim
    }

    pub fn kraus(&self) -> &[Operator<T>] {
        &self.map.kraus
    }

    pub fn as_map(&self) -> &KrausMap<T> {
        &self.map
    }

    pub fn apply(&self, rho: &DensityOperator<T>) -> Result<DensityOperator<T>> {
        Ok(DensityOperator::from_trusted(self.map.apply_op(rho.matrix())?))
    }

    pub fn apply_op(&self, x: &Operator<T>) -> Result<Operator<T>> {
        self.map.apply_op(x)
    }

    /// Unital adjoint map (trace preserving only for unital channels).
    pub fn adjoint(&self) -> KrausMap<T> {
        self.map.adjoint()
    }

    pub fn choi(&self) -> &Operator<T> {
        self.choi.get_or_init(|| self.map.choi())
    }

    /// Re-derives a minimal Kraus set when the current one exceeds `in·out`.
    pub fn compressed(self) -> Result<Self> {
        if self.map.kraus.len() <= self.in_dim() * self.out_dim() {
            return Ok(self);
        }
        let map = KrausMap::from_choi(self.choi(), self.in_dim(), self.out_dim())?;
        Ok(Self {
            map,
            name: self.name,
            domain: self.domain,
            choi: self.choi,
        })
    }
}

/// `second ∘ first`.
pub fn compose<T: Real>(second: &Channel<T>, first: &Channel<T>) -> Result<Channel<T>> {
    let map = second.map.after(&first.map)?;
    Channel::from_map(map, format!("{}∘{}", second.name, first.name))?.compressed()
}

/// `‖J(a) − J(b)‖₁`.
pub fn choi_distance<T: Real>(a: &Channel<T>, b: &Channel<T>) -> Result<T> {
    if a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim() {
        return Err(Error::Shape(format!(
            "channels {}→{} and {}→{}",
            a.in_dim(),
            a.out_dim(),
            b.in_dim(),
            b.out_dim()
        )));
    }
    Ok(trace_norm(&(a.choi() - b.choi())))
}

pub fn channels_equal<T: Real>(a: &Channel<T>, b: &Channel<T>) -> Result<bool> {
    Ok(choi_distance(a, b)? <= T::tol(CHANNEL_EQ_TOL))
}

pub fn choi<T: Real>(e: &Channel<T>) -> Operator<T> {
    e.choi().clone()
}

pub fn channel_from_choi<T: Real>(j: &Operator<T>, in_dim: usize, out_dim: usize) -> Result<Channel<T>> {
    Channel::from_choi(j, in_dim, out_dim, "from-choi")
}

/// Support cutoff reused for Kraus factorizations of states.
pub(crate) fn state_kraus_weights<T: Real>(rho: &DensityOperator<T>) -> Vec<(T, Vec<C<T>>)> {
    let spec = rho.spectrum();
    let thr = T::lit(SUPPORT_CUTOFF) * spec.max_eigenvalue().max(T::one());
    spec.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > thr)
        .map(|(k, &p)| (p, spec.eigenvectors.column(k)))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct ChannelWire<T: Real> {
    in_dim: usize,
    out_dim: usize,
    #[serde(bound = "")]
    kraus: Vec<Operator<T>>,
    name: String,
}

impl<T: Real> Serialize for Channel<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelWire {
            in_dim: self.in_dim(),
            out_dim: self.out_dim(),
            kraus: self.map.kraus.clone(),
            name: self.name.clone(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Channel<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = ChannelWire::<T>::deserialize(d)?;
        Channel::new(w.in_dim, w.out_dim, w.kraus, w.name).map_err(D::Error::custom)
    }
}
