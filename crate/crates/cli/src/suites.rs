use asymcat::asymmetry::{
    accuracy_lhs, accuracy_upper_bound, build_sigma_crs, conditional_mutual_information, mutual_information,
    rel_ent_asymmetry,
};
use asymcat::opcore::{
    fidelity, hermitian_eig, partial_trace, relative_entropy, trace_distance, von_neumann_entropy, Operator,
};
use asymcat::qchannel::{choi_distance, compose, symmetrize, Channel};
use asymcat::random::{random_channel, random_hermitian, random_state};
use asymcat::recovery::{verify_dephasing_recovery, verify_reversibility, RecoverySpec, SearchOptions};
use asymcat::showcase::{ClockSpec, ClonerSpec, ExperimentOptions, ExperimentSpec};
use asymcat::symrep::{cyclic_phase, EigenBlocks, Subsystem, SymmetryAction};
use asymcat::{DensityOperator, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::{print_json, Failure};
use crate::{GlobalOpts, Suite};

const EQ: f64 = 1e-8;

#[derive(Serialize)]
struct Tally {
    suite: &'static str,
    property: &'static str,
    passed: usize,
    total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_error: Option<String>,
}

#[derive(Serialize)]
struct Summary {
    seed: u64,
    properties: Vec<Tally>,
    failures: usize,
    pass: bool,
}

struct Runner {
    suite: &'static str,
    rng: ChaCha8Rng,
    tallies: Vec<Tally>,
}

impl Runner {
    fn new(suite: &'static str, seed: u64) -> Self {
        Self {
            suite,
            rng: ChaCha8Rng::seed_from_u64(seed),
            tallies: Vec::new(),
        }
    }

    fn property(&mut self, name: &'static str, trials: usize, mut f: impl FnMut(&mut ChaCha8Rng) -> Result<bool>) {
        let mut tally = Tally {
            suite: self.suite,
            property: name,
            passed: 0,
            total: trials,
            first_error: None,
        };
        for _ in 0..trials {
            match f(&mut self.rng) {
                Ok(true) => tally.passed += 1,
                Ok(false) => {}
                Err(e) => {
                    tally.first_error.get_or_insert_with(|| e.to_string());
                }
            }
        }
        self.tallies.push(tally);
    }
}

/// A random single-system action: a cyclic phase group or a number-like
/// Hamiltonian with integer levels.
fn random_action(rng: &mut ChaCha8Rng, dim: usize) -> Result<SymmetryAction<f64>> {
    let sys = vec![Subsystem::new("A", dim)];
    if rng.gen_bool(0.5) {
        cyclic_phase(rng.gen_range(2..=5), sys)
    } else {
        let levels: Vec<f64> = (0..dim).map(|_| rng.gen_range(0..3) as f64).collect();
        SymmetryAction::hamiltonian(sys, vec![Operator::real_diag(&levels)], None)
    }
}

fn core(seed: u64) -> Vec<Tally> {
    let mut r = Runner::new("core", seed);
    r.property("eig_reconstruction", 40, |rng| {
        let h = random_hermitian::<f64, _>(rng.gen_range(2..=12), rng);
        let e = hermitian_eig(&h)?;
        let v = &e.eigenvectors;
        let rebuilt = v.matmul(&Operator::real_diag(&e.eigenvalues)).matmul(&v.adjoint());
        Ok((&rebuilt - &h).max_abs() <= 1e-10 && e.eigenvalues.windows(2).all(|w| w[0] <= w[1]))
    });
    r.property("fidelity_symmetric_and_bounded", 40, |rng| {
        let n = rng.gen_range(2..=8);
        let (a, b) = (random_state::<f64, _>(n, rng), random_state::<f64, _>(n, rng));
        let (fab, fba) = (fidelity(&a, &b)?, fidelity(&b, &a)?);
        Ok((fab - fba).abs() <= EQ && (0.0..=1.0).contains(&fab) && (fidelity(&a, &a)? - 1.0).abs() <= EQ)
    });
    r.property("trace_distance_triangle", 40, |rng| {
        let n = rng.gen_range(2..=8);
        let s: Vec<DensityOperator> = (0..3).map(|_| random_state(n, rng)).collect();
        let (ab, bc, ac) = (
            trace_distance(&s[0], &s[1])?,
            trace_distance(&s[1], &s[2])?,
            trace_distance(&s[0], &s[2])?,
        );
        Ok(ac <= ab + bc + EQ && ab <= 2.0 + EQ)
    });
    r.property("partial_trace_preserves_trace", 40, |rng| {
        let (da, db) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let rho = random_state::<f64, _>(da * db, rng);
        let a = partial_trace(&rho, &[da, db], &[0])?;
        let b = partial_trace(&rho, &[da, db], &[1])?;
        Ok((a.matrix().trace().re - 1.0).abs() <= EQ && (b.matrix().trace().re - 1.0).abs() <= EQ)
    });
    r.property("twirl_idempotent_and_symmetric", 40, |rng| {
        let n = rng.gen_range(2..=8);
        let action = random_action(rng, n)?;
        let rho = random_state(n, rng);
        let once = action.twirl(&rho)?;
        let twice = action.twirl(&once)?;
        Ok(trace_distance(&once, &twice)? <= EQ && action.commutation_violation(once.matrix())? <= EQ)
    });
    r.property("choi_roundtrip", 40, |rng| {
        let (i, o) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let e = random_channel::<f64, _>(i, o, rng.gen_range(1..=3), rng);
        let back = Channel::from_choi(e.choi(), i, o, "roundtrip")?;
        Ok(choi_distance(&e, &back)? <= EQ)
    });
    r.property("dephasing_idempotent", 40, |rng| {
        let sizes: Vec<usize> = (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(1..=3)).collect();
        let blocks = EigenBlocks::<f64>::from_block_sizes(&sizes)?;
        let rho = random_state(blocks.dim(), rng);
        let d = blocks.dephasing_map();
        let once = d.apply(&rho)?;
        Ok(trace_distance(&once, &d.apply(&once)?)? <= EQ)
    });
    r.tallies
}

fn asymmetry(seed: u64) -> Vec<Tally> {
    let mut r = Runner::new("asymmetry", seed);
    r.property("gamma_entropy_identity", 50, |rng| {
        let n = rng.gen_range(2..=12);
        let action = random_action(rng, n)?;
        let rho = random_state(n, rng);
        let v = rel_ent_asymmetry(&action, &rho)?;
        let g = action.twirl(&rho)?;
        let rel = relative_entropy(&rho, &g)?.finite().unwrap_or(f64::INFINITY);
        let chain = von_neumann_entropy(&g) - von_neumann_entropy(&rho);
        Ok((chain - rel).abs() <= EQ && (v.gamma - rel).abs() <= EQ && v.gamma >= -EQ)
    });
    r.property("monotone_under_covariant_channels", 40, |rng| {
        let n = rng.gen_range(2..=5);
        let action = cyclic_phase::<f64>(rng.gen_range(2..=4), vec![Subsystem::new("A", n)])?;
        let e = symmetrize(&random_channel(n, n, rng.gen_range(1..=3), rng), &action, &action)?;
        let rho = random_state(n, rng);
        let before = rel_ent_asymmetry(&action, &rho)?.gamma;
        let after = rel_ent_asymmetry(&action, &e.apply(&rho)?)?.gamma;
        Ok(after <= before + EQ)
    });
    r.property("convex", 40, |rng| {
        let n = rng.gen_range(2..=8);
        let action = random_action(rng, n)?;
        let (a, b) = (random_state(n, rng), random_state(n, rng));
        let p: f64 = rng.gen();
        let mixed = a.mix(p, &b)?;
        let lhs = rel_ent_asymmetry(&action, &mixed)?.gamma;
        let rhs = p * rel_ent_asymmetry(&action, &a)?.gamma + (1.0 - p) * rel_ent_asymmetry(&action, &b)?.gamma;
        Ok(lhs <= rhs + EQ)
    });
    r.property("cmi_identity", 25, |rng| {
        let order = rng.gen_range(2..=6);
        let (dr, ds) = (rng.gen_range(2..=3), 2);
        let action = cyclic_phase::<f64>(order, vec![Subsystem::new("R", dr), Subsystem::new("S", ds)])?;
        let (tau, sigma) = (random_state::<f64, _>(dr, rng), random_state::<f64, _>(ds, rng));
        let big = build_sigma_crs(&action, &tau, &sigma)?;
        let dg = rel_ent_asymmetry(&action, &tau.tensor(&sigma))?.gamma
            - rel_ent_asymmetry(&action.head(1)?, &tau)?.gamma;
        let cmi = conditional_mutual_information(&big, [order, dr, ds])?;
        let mi = mutual_information(&big, &[order, dr, ds], &[1], &[0])?;
        let g_tau = rel_ent_asymmetry(&action.head(1)?, &tau)?.gamma;
        Ok((cmi - dg).abs() <= EQ && (mi - g_tau).abs() <= EQ)
    });
    r.property("accuracy_floor_solves_bound", 40, |rng| {
        let rank: usize = rng.gen_range(1..=16);
        let dg: f64 = rng.gen_range(0.0..4.0);
        let b = accuracy_upper_bound(dg, rank)?;
        let tight = b.epsilon_floor >= 1.0 || (accuracy_lhs(b.epsilon_floor, rank) - dg).abs() <= 1e-9;
        Ok(tight && b.fidelity_floor <= 1.0 && b.fidelity_ceiling >= 1.0 - b.epsilon_floor / 2.0 - EQ)
    });
    r.tallies
}

fn recovery(seed: u64, tol_floor: f64) -> Vec<Tally> {
    let mut r = Runner::new("recovery", seed);
    let quick = SearchOptions {
        grid_points: 81,
        floor_tol: tol_floor,
        ..Default::default()
    };
    r.property("reversibility_floor", 20, |rng| {
        let n = rng.gen_range(2..=4);
        let action = cyclic_phase::<f64>(rng.gen_range(2..=4), vec![Subsystem::new("A", n)])?;
        let e = symmetrize(&random_channel(n, n, rng.gen_range(1..=3), rng), &action, &action)?;
        let rep = verify_reversibility(&e, &action, &action, &random_state(n, rng), &quick)?;
        Ok(rep.passes(tol_floor))
    });
    r.property("dephasing_recovery_floor", 15, |rng| {
        let sizes: Vec<usize> = (0..rng.gen_range(2..=3)).map(|_| rng.gen_range(1..=2)).collect();
        let blocks = EigenBlocks::<f64>::from_block_sizes(&sizes)?;
        let d = blocks.dephasing_map();
        let n = blocks.dim();
        // D∘E∘D commutes with the idempotent D.
        let e = compose(&d, &compose(&random_channel(n, n, 2, rng), &d)?)?;
        let rep = verify_dephasing_recovery(&e, &blocks, &random_state(n, rng), &quick)?;
        Ok(rep.passes(tol_floor))
    });
    r.property("petz_recovers_anchor", 20, |rng| {
        let (i, o) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let spec = RecoverySpec::new(random_channel(i, o, 2, rng), random_state(i, rng))?;
        let t: f64 = rng.gen_range(-3.0..3.0);
        Ok(spec.exactness(0.0)? <= EQ && spec.exactness(t)? <= EQ)
    });
    let opts = ExperimentOptions {
        tol_floor,
        ..Default::default()
    };
    let clocks: Vec<ClockSpec> = [1, 2]
        .into_iter()
        .flat_map(|k| [2, 3, 4, 8].map(|t| ClockSpec::new(t, k)))
        .collect();
    let mut i = 0;
    r.property("clock_instances", clocks.len(), |_| {
        let s = clocks[i].clone();
        i += 1;
        Ok(ExperimentSpec::Clock(s).run(&opts)?.pass)
    });
    let cloners = [(2, 1, 1), (2, 2, 1), (2, 3, 2), (3, 1, 1)].map(|(d, n, k)| ClonerSpec::new(d, n, k));
    let mut j = 0;
    r.property("cloner_instances", cloners.len(), |_| {
        let s = cloners[j].clone();
        j += 1;
        Ok(ExperimentSpec::Cloner(s).run(&opts)?.pass)
    });
    r.tallies
}

pub fn verify(g: &GlobalOpts, suite: Suite, seed: u64) -> std::result::Result<(), Failure> {
    let mut tallies = Vec::new();
    if matches!(suite, Suite::Core | Suite::All) {
        tallies.extend(core(seed));
    }
    if matches!(suite, Suite::Asymmetry | Suite::All) {
        tallies.extend(asymmetry(seed));
    }
    if matches!(suite, Suite::Recovery | Suite::All) {
        tallies.extend(recovery(seed, g.tol_floor));
    }
    let failures = tallies.iter().filter(|t| t.passed != t.total).count();
    let summary = Summary {
        seed,
        failures,
        pass: failures == 0,
        properties: tallies,
    };
    if g.json {
        print_json(&summary)?;
    } else {
        for t in &summary.properties {
            let mark = if t.passed == t.total { "ok  " } else { "FAIL" };
            println!("[{mark}] {}/{}  {}/{}", t.suite, t.property, t.passed, t.total);
            if let Some(e) = &t.first_error {
                println!("       first error: {e}");
            }
        }
        println!("seed {seed}: {} properties, {failures} failing", summary.properties.len());
    }
    if failures > 0 {
        return Err(Failure::Property(format!("{failures} properties failed")));
    }
    Ok(())
}
