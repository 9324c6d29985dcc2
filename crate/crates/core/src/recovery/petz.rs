use crate::error::{Error, Result};
use crate::opcore::{
    imaginary_power, power_on_support, support_projector, support_threshold, trace_distance, DensityOperator,
    Operator, SUPPORT_CUTOFF, SUPPORT_LEAK_TOL,
};
use crate::qchannel::{state_kraus_weights, Channel};
use crate::scalar::{Real, C};

/// A forward channel `N` with its anchor state `κ`, and the Petz map built
/// from them.
///
/// The Petz map is trace preserving only on `supp N(κ)`. On the orthogonal
/// complement it is extended by `X ↦ Tr(QX) κ`, which keeps it covariant
/// whenever `κ` is symmetric. [`RecoverySpec::domain`] is that support.
#[derive(Clone, Debug)]
pub struct RecoverySpec<T: Real> {
    channel: Channel<T>,
    kappa: DensityOperator<T>,
    image: DensityOperator<T>,
    petz: Channel<T>,
}

impl<T: Real> RecoverySpec<T> {
    pub fn new(channel: Channel<T>, kappa: DensityOperator<T>) -> Result<Self> {
        if kappa.dim() != channel.in_dim() {
            return Err(Error::DimMismatch {
                expected: channel.in_dim(),
                got: kappa.dim(),
            });
        }
        let image = channel.apply(&kappa)?;
        let img_spec = image.spectrum();
        let a = power_on_support(img_spec, T::lit(-0.5));
        let sqrt_kappa = power_on_support(kappa.spectrum(), T::lit(0.5));

        let mut kraus: Vec<Operator<T>> = channel
            .kraus()
            .iter()
            .map(|k| sqrt_kappa.matmul(&k.adjoint()).matmul(&a))
            .collect();

        // Route the complement of supp N(κ) to κ.
        let thr = support_threshold(img_spec.max_eigenvalue(), T::lit(SUPPORT_CUTOFF));
        let kernel: Vec<_> = img_spec
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &x)| x <= thr)
            .map(|(j, _)| img_spec.eigenvectors.column(j))
            .collect();
        kraus.extend(route_to_state(&kernel, &kappa));
        let domain = support_projector(img_spec);
        let petz = Channel::new(channel.out_dim(), channel.in_dim(), kraus, format!("petz({})", channel.name()))?
            .compressed()?
            .with_domain(domain);
        Ok(Self {
            channel,
            kappa,
            image,
            petz,
        })
    }

    pub fn channel(&self) -> &Channel<T> {
        &self.channel
    }

    pub fn kappa(&self) -> &DensityOperator<T> {
        &self.kappa
    }

    /// `N(κ)`.
    pub fn image(&self) -> &DensityOperator<T> {
        &self.image
    }

    /// The Petz map at `t = 0`.
    pub fn petz(&self) -> &Channel<T> {
        &self.petz
    }

    /// Projector onto `supp N(κ)`.
    pub fn domain(&self) -> &Operator<T> {
        self.petz.domain().expect("petz map carries its domain")
    }

    /// `(κ^{it}, N(κ)^{−it})`.
    fn rotations(&self, t: T) -> (Operator<T>, Operator<T>) {
        (
            imaginary_power(self.kappa.spectrum(), t),
            imaginary_power(self.image.spectrum(), -t),
        )
    }

    /// `R_t = V_{κ,t} ∘ R_P ∘ V_{N(κ),−t}` with `V_{ω,t}(X) = ω^{it} X ω^{−it}`.
    pub fn rotated(&self, t: T) -> Result<Channel<T>> {
        if t == T::zero() {
            return Ok(self.petz.clone());
        }
        let (left, right) = self.rotations(t);
        let kraus = self
            .petz
            .kraus()
            .iter()
            .map(|k| left.matmul(k).matmul(&right))
            .collect();
        Ok(Channel::new(self.petz.in_dim(), self.petz.out_dim(), kraus, format!("{}[t={t}]", self.petz.name()))?
            .with_domain(self.domain().clone()))
    }

    /// `R_t(X)` without materializing the rotated Kraus set.
    pub fn apply_rotated(&self, t: T, x: &Operator<T>) -> Result<Operator<T>> {
        if t == T::zero() {
            return self.petz.apply_op(x);
        }
        let (left, right) = self.rotations(t);
        let inner = self.petz.apply_op(&right.sandwich(x))?;
        Ok(left.sandwich(&inner))
    }

    pub fn recover(&self, t: T, probe: &DensityOperator<T>) -> Result<DensityOperator<T>> {
        Ok(DensityOperator::from_trusted(self.apply_rotated(t, probe.matrix())?))
    }

    /// `‖R_t(N(κ)) − κ‖₁`, zero for an exact Petz map.
    pub fn exactness(&self, t: T) -> Result<T> {
        trace_distance(&self.recover(t, &self.image)?, &self.kappa)
    }

    /// Fails when `ρ` has weight outside `supp κ`.
    pub fn check_support(&self, rho: &DensityOperator<T>) -> Result<()> {
        let leak = rho.weight_outside(&support_projector(self.kappa.spectrum()));
        if leak > T::tol(SUPPORT_LEAK_TOL) {
            return Err(Error::Support(format!("state has weight {leak} outside supp(κ)")));
        }
        Ok(())
    }
}

/// Kraus operators `√λ_a |v_a⟩⟨q_b|` sending the span of `kernel` to `κ`.
pub(crate) fn route_to_state<T: Real>(kernel: &[Vec<C<T>>], kappa: &DensityOperator<T>) -> Vec<Operator<T>> {
    if kernel.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (p, v) in state_kraus_weights(kappa) {
        let v = v.iter().map(|z| *z * p.sqrt()).collect::<Vec<_>>();
        for q in kernel {
            out.push(Operator::outer(&v, q));
        }
    }
    out
}

/// The Petz recovery map `√κ N†(N(κ)^{−1/2} · N(κ)^{−1/2}) √κ`.
pub fn petz_map<T: Real>(n: &Channel<T>, kappa: &DensityOperator<T>) -> Result<Channel<T>> {
    Ok(RecoverySpec::new(n.clone(), kappa.clone())?.petz)
}

pub fn rotated_petz<T: Real>(n: &Channel<T>, kappa: &DensityOperator<T>, t: T) -> Result<Channel<T>> {
    RecoverySpec::new(n.clone(), kappa.clone())?.rotated(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{partial_trace, support_rank};
    use crate::qchannel::{choi_distance, Channel};
    use crate::random::{haar_unitary, random_channel, random_state, random_state_with_rank};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_channel_gives_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let kappa = random_state::<f64, _>(3, &mut rng);
        let r = petz_map(&Channel::identity(3), &kappa).unwrap();
        assert!(choi_distance(&r, &Channel::identity(3)).unwrap() <= 1e-8);
    }

    #[test]
    fn unitary_channel_is_inverted() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let u = haar_unitary::<f64, _>(3, &mut rng);
        let kappa = random_state::<f64, _>(3, &mut rng);
        let r = petz_map(&Channel::unitary(&u, "U").unwrap(), &kappa).unwrap();
        let inv = Channel::unitary(&u.adjoint(), "U†").unwrap();
        assert!(choi_distance(&r, &inv).unwrap() <= 1e-8);
    }

    #[test]
    fn recovers_the_anchor_for_any_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..5 {
            let n = random_channel::<f64, _>(3, 2, 2, &mut rng);
            let kappa = random_state::<f64, _>(3, &mut rng);
            let spec = RecoverySpec::new(n, kappa).unwrap();
            for t in [0.0, 1.0, -2.5] {
                assert!(spec.exactness(t).unwrap() <= 1e-8);
                let r = spec.rotated(t).unwrap();
                let out = r.apply(spec.image()).unwrap();
                assert!(trace_distance(&out, spec.kappa()).unwrap() <= 1e-8);
            }
        }
    }

    #[test]
    fn rank_deficient_anchor_is_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let kappa = random_state_with_rank::<f64, _>(4, 2, &mut rng);
        let tr = Channel::partial_trace(&[2, 2], &[0]).unwrap();
        let spec = RecoverySpec::new(tr, kappa).unwrap();
        assert!(spec.exactness(0.7).unwrap() <= 1e-8);
        // Trace preserving everywhere, including off the domain.
        let r = spec.petz();
        let probe = random_state::<f64, _>(2, &mut rng);
        assert!((r.apply(&probe).unwrap().matrix().trace().re - 1.0).abs() < 1e-10);
        let img_rank = support_rank(spec.image().eigenvalues());
        assert_eq!(spec.domain().trace().re.round() as usize, img_rank);
    }

    #[test]
    fn t_zero_is_exactly_petz() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let n = random_channel::<f64, _>(2, 2, 2, &mut rng);
        let kappa = random_state::<f64, _>(2, &mut rng);
        let spec = RecoverySpec::new(n.clone(), kappa.clone()).unwrap();
        let a = rotated_petz(&n, &kappa, 0.0).unwrap();
        assert_eq!(a.choi(), spec.petz().choi());
    }

    #[test]
    fn maximally_mixed_anchors_make_rotations_trivial() {
        let kappa = DensityOperator::<f64>::maximally_mixed(4);
        let tr = Channel::partial_trace(&[2, 2], &[0]).unwrap();
        let spec = RecoverySpec::new(tr, kappa).unwrap();
        let d = choi_distance(spec.petz(), &spec.rotated(1.0).unwrap()).unwrap();
        assert!(d <= 1e-8);
    }

    #[test]
    fn apply_rotated_matches_kraus_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let n = random_channel::<f64, _>(3, 3, 2, &mut rng);
        let kappa = random_state::<f64, _>(3, &mut rng);
        let spec = RecoverySpec::new(n, kappa).unwrap();
        let x = random_state::<f64, _>(3, &mut rng);
        let a = spec.apply_rotated(1.3, x.matrix()).unwrap();
        let b = spec.rotated(1.3).unwrap().apply_op(x.matrix()).unwrap();
        assert!((&a - &b).max_abs() < 1e-12);
    }

    #[test]
    fn support_check() {
        let kappa = DensityOperator::<f64>::diagonal(&[1.0, 0.0]).unwrap();
        let spec = RecoverySpec::new(Channel::identity(2), kappa).unwrap();
        assert!(spec.check_support(&DensityOperator::basis(2, 0)).is_ok());
        assert!(matches!(
            spec.check_support(&crate::opcore::plus_state()),
            Err(Error::Support(_))
        ));
        let mixed = DensityOperator::<f64>::maximally_mixed(4);
        let _ = partial_trace(&mixed, &[2, 2], &[0]).unwrap();
    }

    #[test]
    fn dim_mismatch() {
        let kappa = DensityOperator::<f64>::maximally_mixed(3);
        assert!(matches!(
            RecoverySpec::new(Channel::identity(2), kappa),
            Err(Error::DimMismatch { .. })
        ));
    }
}
