use std::path::Path;
use std::time::Instant;

use asymcat::asymmetry::{rel_ent_asymmetry, AsymmetryValue};
use asymcat::recovery::{verify_reversibility, RecoveryResult, RECOVERY_COVARIANCE_TOL};
use asymcat::report::{ExperimentReport, SCHEMA_VERSION};
use asymcat::showcase::{ClockSpec, ClonerSpec, ExperimentOptions, ExperimentSpec};
use asymcat::{Channel, DensityOperator, SymmetryAction};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::output::{digest, print_json, print_report, read_json, verdict, write_csv, Failure};
use crate::GlobalOpts;

fn experiment_options(g: &GlobalOpts) -> ExperimentOptions {
    let mut opts = ExperimentOptions {
        tol_eq: g.tol_eq,
        tol_floor: g.tol_floor,
        ..Default::default()
    };
    opts.search.floor_tol = g.tol_floor;
    opts
}

fn run_one(spec: &ExperimentSpec, opts: &ExperimentOptions, timing: bool) -> Result<ExperimentReport, Failure> {
    let start = Instant::now();
    let mut report = spec.run(opts)?;
    report.inputs_digest = Some(digest(&report.inputs));
    if timing {
        report.wall_time_seconds = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

/// Runs independent experiments in parallel and reports them in input order.
fn run_batch(g: &GlobalOpts, specs: &[ExperimentSpec]) -> Result<(), Failure> {
    let opts = experiment_options(g);
    let reports = specs
        .par_iter()
        .map(|s| run_one(s, &opts, g.timing))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = &g.csv {
        write_csv(path, &reports)?;
    }
    if g.json {
        if reports.len() == 1 {
            print_json(&reports[0])?;
        } else {
            print_json(&reports)?;
        }
    } else {
        reports.iter().for_each(print_report);
    }
    verdict(&reports)
}

pub fn clock(g: &GlobalOpts, ts: Vec<usize>, k: usize, omega: f64) -> Result<(), Failure> {
    let specs: Vec<ExperimentSpec> = ts
        .into_iter()
        .map(|t| ExperimentSpec::Clock(ClockSpec { t, k, omega }))
        .collect();
    run_batch(g, &specs)
}

pub fn cloner(g: &GlobalOpts, d: usize, n: usize, k: usize, probes: usize, seed: u64) -> Result<(), Failure> {
    run_batch(
        g,
        &[ExperimentSpec::Cloner(ClonerSpec {
            d,
            n,
            k,
            probes,
            seed,
        })],
    )
}

pub fn run_spec(g: &GlobalOpts, path: &Path) -> Result<(), Failure> {
    let (spec, _): (ExperimentSpec, _) = read_json(path)?;
    run_batch(g, &[spec])
}

#[derive(Serialize)]
struct GammaOutput {
    schema_version: u32,
    command: &'static str,
    inputs_digest: String,
    #[serde(flatten)]
    value: AsymmetryValue<f64>,
}

pub fn gamma(g: &GlobalOpts, state: &Path, action: &Path) -> Result<(), Failure> {
    let (rho, rho_raw): (DensityOperator, _) = read_json(state)?;
    let (act, act_raw): (SymmetryAction, _) = read_json(action)?;
    let value = rel_ent_asymmetry(&act, &rho)?;
    let out = GammaOutput {
        schema_version: SCHEMA_VERSION,
        command: "gamma",
        inputs_digest: digest(&json!({"state": rho_raw, "action": act_raw})),
        value,
    };
    if g.json {
        print_json(&out)?;
    } else {
        println!("gamma      {:.9}", out.value.gamma);
        println!("S(rho)     {:.9}", out.value.entropy_state);
        println!("S(G(rho))  {:.9}", out.value.entropy_twirled);
        println!("action     {}", out.value.action);
    }
    Ok(())
}

#[derive(Serialize)]
struct RecoverOutput {
    schema_version: u32,
    command: &'static str,
    inputs_digest: String,
    gamma_in: f64,
    gamma_out: f64,
    /// Asymmetry lost by the channel.
    delta_gamma: f64,
    recovery: RecoveryResult<f64>,
    recovery_covariance_violation: f64,
    petz_exactness: f64,
    floor_tol: f64,
    floor_pass: bool,
    covariance_pass: bool,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_seconds: Option<f64>,
}

pub fn recover(
    g: &GlobalOpts,
    channel: &Path,
    state: &Path,
    action: &Path,
    action_out: Option<&Path>,
) -> Result<(), Failure> {
    let start = Instant::now();
    let (f, f_raw): (Channel, _) = read_json(channel)?;
    let (rho, rho_raw): (DensityOperator, _) = read_json(state)?;
    let (a_in, a_in_raw): (SymmetryAction, _) = read_json(action)?;
    let (a_out, a_out_raw) = match action_out {
        Some(p) => read_json::<SymmetryAction>(p)?,
        None => (a_in.clone(), a_in_raw.clone()),
    };
    let inputs = json!({"channel": f_raw, "state": rho_raw, "action": a_in_raw, "action_out": a_out_raw});

    let opts = experiment_options(g);
    let rep = verify_reversibility(&f, &a_in, &a_out, &rho, &opts.search)?;
    let floor_pass = rep.recovery.passes(g.tol_floor);
    let covariance_pass = rep.recovery_covariance.max_violation <= RECOVERY_COVARIANCE_TOL;
    let out = RecoverOutput {
        schema_version: SCHEMA_VERSION,
        command: "recover",
        inputs_digest: digest(&inputs),
        gamma_in: rep.gamma_in,
        gamma_out: rep.gamma_out,
        delta_gamma: rep.delta_gamma,
        recovery_covariance_violation: rep.recovery_covariance.max_violation,
        petz_exactness: rep.petz_exactness,
        recovery: rep.recovery,
        floor_tol: g.tol_floor,
        floor_pass,
        covariance_pass,
        pass: floor_pass && covariance_pass,
        wall_time_seconds: g.timing.then(|| start.elapsed().as_secs_f64()),
    };
    if g.json {
        print_json(&out)?;
    } else {
        println!("recover {}", f.name());
        println!(
            "  gamma in {:.6}  out {:.6}  lost {:.6}",
            out.gamma_in, out.gamma_out, out.delta_gamma
        );
        println!(
            "  fidelity achieved {:.6}  floor {:.6}  margin {:.3e}  best t {:.4}",
            out.recovery.achieved_fidelity, out.recovery.fidelity_floor, out.recovery.margin, out.recovery.best_t
        );
        println!("  recovery covariance violation {:.3e}", out.recovery_covariance_violation);
        println!("  petz exactness {:.3e}", out.petz_exactness);
        println!("  {}", if out.pass { "pass" } else { "FAIL" });
    }
    if !floor_pass {
        return Err(Failure::Floor(format!(
            "fidelity {} below floor {}",
            out.recovery.achieved_fidelity, out.recovery.fidelity_floor
        )));
    }
    if !covariance_pass {
        return Err(Failure::Invariant(format!(
            "recovery is not covariant (violation {:e})",
            out.recovery_covariance_violation
        )));
    }
    Ok(())
}
