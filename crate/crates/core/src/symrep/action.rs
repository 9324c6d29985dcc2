use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::opcore::{embed, tensor_all, trace_norm, DensityOperator, Operator};
use crate::random::haar_unitary;
use crate::scalar::{Real, C};
use crate::symrep::{eigenblocks, sym_dim, symmetric_subspace_projector, EigenBlocks};

pub const UNITARY_TOL: f64 = 1e-9;
pub const SYMMETRIC_LEAK_TOL: f64 = 1e-8;

/// A labelled tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
        }
    }
}

#[derive(Clone, Debug)]
pub enum ActionKind<T: Real> {
    /// Element `g` is a list of per-subsystem unitaries; element 0 is the identity.
    FiniteGroup { elements: Vec<Vec<Operator<T>>> },
    /// Time translations `e^{-iHt}` with `H = Σ_s H_s` over the subsystems.
    HamiltonianGenerated {
        generators: Vec<Operator<T>>,
        degeneracy_tol: Option<T>,
    },
    /// `U ↦ U^{⊗r}` for `U ∈ U(d)`; every subsystem has dimension `d`.
    CollectiveUnitary { local_dim: usize, copies: usize },
}

/// Unitary representation of a symmetry group over registered subsystems.
#[derive(Clone, Debug)]
pub struct SymmetryAction<T: Real> {
    systems: Vec<Subsystem>,
    kind: ActionKind<T>,
    joint_unitaries: OnceLock<Vec<Operator<T>>>,
    blocks: OnceLock<EigenBlocks<T>>,
    sym_projector: OnceLock<Operator<T>>,
}

impl<T: Real> SymmetryAction<T> {
    fn from_parts(systems: Vec<Subsystem>, kind: ActionKind<T>) -> Self {
        Self {
            systems,
            kind,
            joint_unitaries: OnceLock::new(),
            blocks: OnceLock::new(),
            sym_projector: OnceLock::new(),
        }
    }

    pub fn finite_group(systems: Vec<Subsystem>, elements: Vec<Vec<Operator<T>>>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::UnsupportedAction("group with no elements".into()));
        }
        let tol = T::tol(UNITARY_TOL);
        for (g, element) in elements.iter().enumerate() {
            if element.len() != systems.len() {
                return Err(Error::Shape(format!(
                    "element {g} has {} factors for {} subsystems",
                    element.len(),
                    systems.len()
                )));
            }
            for (u, sys) in element.iter().zip(&systems) {
                if u.rows() != sys.dim || u.cols() != sys.dim {
                    return Err(Error::DimMismatch {
                        expected: sys.dim,
                        got: u.rows(),
                    });
                }
                let dev = u.unitarity_deviation();
                if !(dev <= tol) {
                    return Err(Error::NotUnitary(dev.as_f64()));
                }
                if g == 0 {
                    let id_dev = (u - &Operator::identity(sys.dim)).max_abs();
                    if id_dev > tol {
                        return Err(Error::UnsupportedAction(format!(
                            "element 0 must act as identity (deviation {id_dev})"
                        )));
                    }
                }
            }
        }
        Ok(Self::from_parts(systems, ActionKind::FiniteGroup { elements }))
    }

    /// `Z_N` generated by one unitary per subsystem (each must satisfy `g^N = I`).
    pub fn cyclic(systems: Vec<Subsystem>, generators: &[Operator<T>], order: usize) -> Result<Self> {
        if order == 0 || generators.len() != systems.len() {
            return Err(Error::Shape("one generator per subsystem and order ≥ 1".into()));
        }
        let mut elements = Vec::with_capacity(order);
        let mut current: Vec<Operator<T>> = systems.iter().map(|s| Operator::identity(s.dim)).collect();
        for _ in 0..order {
            elements.push(current.clone());
            current = current.iter().zip(generators).map(|(c, g)| g.matmul(c)).collect();
        }
        Self::finite_group(systems, elements)
    }

    pub fn hamiltonian(systems: Vec<Subsystem>, generators: Vec<Operator<T>>, degeneracy_tol: Option<T>) -> Result<Self> {
        if generators.len() != systems.len() {
            return Err(Error::Shape("one generator per subsystem".into()));
        }
        for (h, sys) in generators.iter().zip(&systems) {
            if h.rows() != sys.dim || h.cols() != sys.dim {
                return Err(Error::DimMismatch {
                    expected: sys.dim,
                    got: h.rows(),
                });
            }
            let dev = h.hermiticity_deviation();
            if !(dev <= T::tol(1e-10)) {
                return Err(Error::NotHermitian(dev.as_f64()));
            }
        }
        Ok(Self::from_parts(
            systems,
            ActionKind::HamiltonianGenerated {
                generators,
                degeneracy_tol,
            },
        ))
    }

    pub fn collective(local_dim: usize, copies: usize) -> Result<Self> {
        if local_dim < 2 || copies < 1 {
            return Err(Error::OutOfRange(format!(
                "collective action needs d ≥ 2, r ≥ 1 (got {local_dim}, {copies})"
            )));
        }
        let systems = (0..copies).map(|i| Subsystem::new(format!("q{i}"), local_dim)).collect();
        Ok(Self::from_parts(systems, ActionKind::CollectiveUnitary { local_dim, copies }))
    }

    pub fn systems(&self) -> &[Subsystem] {
        &self.systems
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.systems.iter().map(|s| s.dim).product()
    }

    pub fn kind(&self) -> &ActionKind<T> {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ActionKind::FiniteGroup { .. } => "FiniteGroup",
            ActionKind::HamiltonianGenerated { .. } => "HamiltonianGenerated",
            ActionKind::CollectiveUnitary { .. } => "CollectiveUnitary",
        }
    }

    /// `|G|` for finite groups.
    pub fn order(&self) -> Option<usize> {
        match &self.kind {
            ActionKind::FiniteGroup { elements } => Some(elements.len()),
            _ => None,
        }
    }

    /// `U_g = ⊗_s U_g^s` for every element of a finite group.
    pub fn joint_unitaries(&self) -> Result<&[Operator<T>]> {
        let ActionKind::FiniteGroup { elements } = &self.kind else {
            return Err(Error::UnsupportedAction(format!("{} has no element list", self.kind_name())));
        };
        Ok(self
            .joint_unitaries
            .get_or_init(|| elements.iter().map(|e| tensor_all(e)).collect()))
    }

    /// `H^{(1)} ⊗ I ⊗ … + I ⊗ H^{(2)} ⊗ … + …`.
    pub fn joint_generator(&self) -> Result<Operator<T>> {
        let ActionKind::HamiltonianGenerated { generators, .. } = &self.kind else {
            return Err(Error::UnsupportedAction(format!("{} has no generator", self.kind_name())));
        };
        let dims = self.dims();
        let n = self.total_dim();
        Ok(generators
            .iter()
            .enumerate()
            .fold(Operator::zeros(n, n), |acc, (s, h)| &acc + &embed(h, &dims, s)))
    }

    /// Eigenblocks of the joint generator (cached).
    pub fn blocks(&self) -> Result<&EigenBlocks<T>> {
        if let Some(b) = self.blocks.get() {
            return Ok(b);
        }
        let ActionKind::HamiltonianGenerated { degeneracy_tol, .. } = &self.kind else {
            return Err(Error::UnsupportedAction(format!("{} has no eigenblocks", self.kind_name())));
        };
        let b = eigenblocks(&self.joint_generator()?, *degeneracy_tol)?;
        Ok(self.blocks.get_or_init(|| b))
    }

    /// `e^{-iHt}` for a Hamiltonian action.
    pub fn evolution(&self, t: T) -> Result<Operator<T>> {
        Ok(self.blocks()?.evolution(t))
    }

    /// Projector onto the symmetric subspace of the collective action (cached).
    pub fn symmetric_projector(&self) -> Result<&Operator<T>> {
        let ActionKind::CollectiveUnitary { local_dim, copies } = self.kind else {
            return Err(Error::UnsupportedAction(format!("{} is not collective", self.kind_name())));
        };
        if let Some(p) = self.sym_projector.get() {
            return Ok(p);
        }
        let p = symmetric_subspace_projector(local_dim, copies)?;
        Ok(self.sym_projector.get_or_init(|| p))
    }

    /// `U^{⊗r}` of a local unitary for a collective action.
    pub fn collective_power(&self, u: &Operator<T>) -> Result<Operator<T>> {
        let ActionKind::CollectiveUnitary { local_dim, copies } = self.kind else {
            return Err(Error::UnsupportedAction(format!("{} is not collective", self.kind_name())));
        };
        if u.rows() != local_dim || u.cols() != local_dim {
            return Err(Error::DimMismatch {
                expected: local_dim,
                got: u.rows(),
            });
        }
        Ok(tensor_all(&vec![u.clone(); copies]))
    }

    /// Seeded Haar-random local unitaries for sampling a collective action.
    pub fn sample_local_unitaries(&self, count: usize, seed: u64) -> Result<Vec<Operator<T>>> {
        let ActionKind::CollectiveUnitary { local_dim, .. } = self.kind else {
            return Err(Error::UnsupportedAction(format!("{} is not collective", self.kind_name())));
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count).map(|_| haar_unitary(local_dim, &mut rng)).collect())
    }

    /// The same group acting on a subset of the subsystems (in the given order).
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() || keep.iter().any(|&k| k >= self.systems.len()) {
            return Err(Error::Shape(format!("invalid subsystem selection {keep:?}")));
        }
        let systems: Vec<Subsystem> = keep.iter().map(|&k| self.systems[k].clone()).collect();
        let kind = match &self.kind {
            ActionKind::FiniteGroup { elements } => ActionKind::FiniteGroup {
                elements: elements
                    .iter()
                    .map(|e| keep.iter().map(|&k| e[k].clone()).collect())
                    .collect(),
            },
            ActionKind::HamiltonianGenerated {
                generators,
                degeneracy_tol,
            } => ActionKind::HamiltonianGenerated {
                generators: keep.iter().map(|&k| generators[k].clone()).collect(),
                degeneracy_tol: *degeneracy_tol,
            },
            ActionKind::CollectiveUnitary { local_dim, .. } => ActionKind::CollectiveUnitary {
                local_dim: *local_dim,
                copies: keep.len(),
            },
        };
        Ok(Self::from_parts(systems, kind))
    }

    /// The first `n` subsystems.
    pub fn head(&self, n: usize) -> Result<Self> {
        self.restrict(&(0..n).collect::<Vec<_>>())
    }

    /// The subsystems from index `n` on.
    pub fn tail(&self, n: usize) -> Result<Self> {
        self.restrict(&(n..self.systems.len()).collect::<Vec<_>>())
    }

    /// Same group acting jointly on the subsystems of `self` then `other`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut systems = self.systems.clone();
        systems.extend(other.systems.iter().cloned());
        let kind = match (&self.kind, &other.kind) {
            (ActionKind::FiniteGroup { elements: a }, ActionKind::FiniteGroup { elements: b }) => {
                if a.len() != b.len() {
                    return Err(Error::UnsupportedAction(format!(
                        "group orders differ: {} vs {}",
                        a.len(),
                        b.len()
                    )));
                }
                ActionKind::FiniteGroup {
                    elements: a
                        .iter()
                        .zip(b)
                        .map(|(x, y)| x.iter().chain(y).cloned().collect())
                        .collect(),
                }
            }
            (
                ActionKind::HamiltonianGenerated {
                    generators: a,
                    degeneracy_tol: ta,
                },
                ActionKind::HamiltonianGenerated { generators: b, .. },
            ) => ActionKind::HamiltonianGenerated {
                generators: a.iter().chain(b).cloned().collect(),
                degeneracy_tol: *ta,
            },
            (
                ActionKind::CollectiveUnitary {
                    local_dim: da,
                    copies: ra,
                },
                ActionKind::CollectiveUnitary {
                    local_dim: db,
                    copies: rb,
                },
            ) if da == db => ActionKind::CollectiveUnitary {
                local_dim: *da,
                copies: ra + rb,
            },
            _ => {
                return Err(Error::UnsupportedAction(format!(
                    "cannot combine {} with {}",
                    self.kind_name(),
                    other.kind_name()
                )))
            }
        };
        Ok(Self::from_parts(systems, kind))
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        let total = self.total_dim();
        if n != total {
            return Err(Error::DimMismatch {
                expected: total,
                got: n,
            });
        }
        Ok(())
    }

    /// Group average of an arbitrary square operator.
    pub fn twirl_operator(&self, x: &Operator<T>) -> Result<Operator<T>> {
        self.check_dim(x.dim()?)?;
        match &self.kind {
            ActionKind::FiniteGroup { .. } => {
                let us = self.joint_unitaries()?;
                let n = x.rows();
                let sum = us
                    .iter()
                    .fold(Operator::zeros(n, n), |acc, u| &acc + &u.sandwich(x));
                Ok(sum.scale(T::one() / T::from_count(us.len())))
            }
            ActionKind::HamiltonianGenerated { .. } => Ok(self.blocks()?.dephase(x)),
            ActionKind::CollectiveUnitary { local_dim, copies } => {
                let p = self.symmetric_projector()?;
                let leak = trace_norm(&(&p.sandwich(x) - x));
                if leak > T::tol(SYMMETRIC_LEAK_TOL) {
                    return Err(Error::OutsideSymmetricSubspace(leak.as_f64()));
                }
                let dplus = T::lit(sym_dim(*local_dim, *copies)? as f64);
                Ok(p.scale_c(x.trace() / dplus))
            }
        }
    }

    /// The uniform twirl `G(ρ)`.
    pub fn twirl(&self, rho: &DensityOperator<T>) -> Result<DensityOperator<T>> {
        Ok(DensityOperator::from_trusted(self.twirl_operator(rho.matrix())?))
    }

    /// `‖G(ρ) − ρ‖₁`.
    pub fn asymmetry_deviation(&self, rho: &DensityOperator<T>) -> Result<T> {
        Ok(trace_norm(&(&self.twirl_operator(rho.matrix())? - rho.matrix())))
    }

    /// Largest commutator `‖[X, U_g]‖` (finite groups) or `‖[X, H]‖` (translations).
    pub fn commutation_violation(&self, x: &Operator<T>) -> Result<T> {
        self.check_dim(x.dim()?)?;
        match &self.kind {
            ActionKind::FiniteGroup { .. } => Ok(self
                .joint_unitaries()?
                .iter()
                .map(|u| x.commutator(u).max_abs())
                .fold(T::zero(), T::max)),
            ActionKind::HamiltonianGenerated { .. } => Ok(x.commutator(&self.joint_generator()?).max_abs()),
            ActionKind::CollectiveUnitary { .. } => Ok(self
                .sample_local_unitaries(8, 0)?
                .iter()
                .map(|u| -> Result<T> { Ok(x.commutator(&self.collective_power(u)?).max_abs()) })
                .collect::<Result<Vec<T>>>()?
                .into_iter()
                .fold(T::zero(), T::max)),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum ActionWire<T: Real> {
    FiniteGroup {
        systems: Vec<Subsystem>,
        #[serde(bound = "")]
        elements: Vec<Vec<Operator<T>>>,
    },
    HamiltonianGenerated {
        systems: Vec<Subsystem>,
        #[serde(bound = "")]
        generators: Vec<Operator<T>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        degeneracy_tol: Option<f64>,
    },
    CollectiveUnitary {
        systems: Vec<Subsystem>,
        local_dim: usize,
        copies: usize,
    },
}

impl<T: Real> Serialize for SymmetryAction<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let systems = self.systems.clone();
        let wire = match &self.kind {
            ActionKind::FiniteGroup { elements } => ActionWire::FiniteGroup {
                systems,
                elements: elements.clone(),
            },
            ActionKind::HamiltonianGenerated {
                generators,
                degeneracy_tol,
            } => ActionWire::HamiltonianGenerated {
                systems,
                generators: generators.clone(),
                degeneracy_tol: degeneracy_tol.map(Real::as_f64),
            },
            ActionKind::CollectiveUnitary { local_dim, copies } => ActionWire::CollectiveUnitary {
                systems,
                local_dim: *local_dim,
                copies: *copies,
            },
        };
        wire.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for SymmetryAction<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let action = match ActionWire::<T>::deserialize(d)? {
            ActionWire::FiniteGroup { systems, elements } => Self::finite_group(systems, elements),
            ActionWire::HamiltonianGenerated {
                systems,
                generators,
                degeneracy_tol,
            } => Self::hamiltonian(systems, generators, degeneracy_tol.map(T::lit)),
            ActionWire::CollectiveUnitary {
                systems,
                local_dim,
                copies,
            } => {
                if systems.len() != copies || systems.iter().any(|s| s.dim != local_dim) {
                    Err(Error::Shape("collective systems must be `copies` factors of `local_dim`".into()))
                } else {
                    Self::collective(local_dim, copies).map(|mut a| {
                        a.systems = systems;
                        a
                    })
                }
            }
        };
        action.map_err(D::Error::custom)
    }
}

/// `{I, Z}` on one qubit labelled `label`.
pub fn z2_phase_flip<T: Real>(label: &str) -> SymmetryAction<T> {
    SymmetryAction::cyclic(
        vec![Subsystem::new(label, 2)],
        &[Operator::real_diag(&[T::one(), -T::one()])],
        2,
    )
    .expect("valid Z2 action")
}

/// `Z_N` acting on each listed subsystem by `diag(1, ω, ω², …)`, `ω = e^{2πi/N}`.
pub fn cyclic_phase<T: Real>(order: usize, systems: Vec<Subsystem>) -> Result<SymmetryAction<T>> {
    let gens: Vec<Operator<T>> = systems
        .iter()
        .map(|s| {
            let w: Vec<C<T>> = (0..s.dim)
                .map(|k| {
                    let angle = T::TAU() * T::from_count(k % order.max(1)) / T::from_count(order.max(1));
                    C::from_polar(T::one(), angle)
                })
                .collect();
            Operator::diag(&w)
        })
        .collect();
    SymmetryAction::cyclic(systems, &gens, order)
}

/// Number-operator generator `diag(0, 1, …, d−1)`.
pub fn number_operator<T: Real>(dim: usize) -> Operator<T> {
    let v: Vec<T> = (0..dim).map(T::from_count).collect();
    Operator::real_diag(&v)
}
