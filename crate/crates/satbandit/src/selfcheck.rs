//! Built-in invariant suite behind the `selfcheck` subcommand: fast,
//! deterministic checks of the kernel's load-bearing identities. Each check
//! prints one ok/fail line; any failure makes the CLI exit with code 3.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use satbandit_core::bounds::{schedule_kl, swap_pairwise_kl};
use satbandit_core::env::{satisficing_regret, Environment, NoiseSpec};
use satbandit_core::estimators::BlockView;
use satbandit_core::instances::{
    alternating_instance, choose_hypothesis_count, sample_nu, single_switch_params,
    swap_window_params, NuVector,
};
use satbandit_core::policies::{run_episode, PolicySpec};
use satbandit_core::windowed::{beta, lcb_win, n_delta, ucb_win, EpochBuffer, RadiusFn};

use crate::seed::derive_seed;

type Check = (&'static str, fn() -> Result<(), String>);

/// Runs every check, printing one line each; returns whether all passed.
pub fn run_selfcheck() -> bool {
    let checks: &[Check] = &[
        ("windowed statistics fixtures", check_windowed_fixtures),
        ("hypothesis count recipe", check_hypothesis_count),
        ("pairwise KL identity", check_kl_identity),
        ("instance segment counts", check_instance_segments),
        ("episode determinism", check_determinism),
        ("seed derivation", check_seed_derivation),
        ("estimator implication", check_estimator_implication),
        ("regret equals gap times wrong pulls", check_regret_identity),
        ("radius threshold count", check_n_delta),
    ];
    let mut all_ok = true;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("[ ok ] {name}"),
            Err(why) => {
                all_ok = false;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    all_ok
}

fn ensure(cond: bool, why: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why.to_string())
    }
}

fn check_windowed_fixtures() -> Result<(), String> {
    let mut buf = EpochBuffer::new();
    for v in [0.9, 0.9, 0.9, 0.9, 0.1] {
        buf.push(v);
    }
    let zero = RadiusFn::zero();
    ensure(
        (lcb_win(&buf, &zero) - 0.7).abs() < 1e-12,
        "lcb of the 0.9x4/0.1 fixture",
    )?;
    ensure(
        (ucb_win(&buf, &zero) - 0.1).abs() < 1e-12,
        "ucb of the 0.9x4/0.1 fixture",
    )?;
    ensure(
        (beta(8, 100, 2) - 2.185968202222548).abs() < 1e-12,
        "beta(8, 100, 2)",
    )?;
    ensure(
        (buf.avg_last(4).unwrap() - 0.7).abs() < 1e-12,
        "avg_last(4)",
    )
}

fn check_hypothesis_count() -> Result<(), String> {
    for y in 4..=20_000u32 {
        let y = y as f64;
        let x = choose_hypothesis_count(y).map_err(|e| e.to_string())? as f64;
        if x * x.ln() > y || x.ln() < 0.5 * y.ln() {
            return Err(format!("recipe fails at y = {y}"));
        }
    }
    Ok(())
}

fn check_kl_identity() -> Result<(), String> {
    let p = swap_window_params(300, 3, 0.45, 0.5).map_err(|e| e.to_string())?;
    let cands: Vec<usize> = p.candidates().collect();
    for &a in &cands {
        for &b in &cands {
            let s1 = p.schedule(&NuVector(vec![a])).map_err(|e| e.to_string())?;
            let s2 = p.schedule(&NuVector(vec![b])).map_err(|e| e.to_string())?;
            let brute = schedule_kl(&s1, &s2).map_err(|e| e.to_string())?;
            if (brute - swap_pairwise_kl(&p, a, b)).abs() > 1e-12 {
                return Err(format!("mismatch at ({a}, {b})"));
            }
        }
    }
    Ok(())
}

fn check_instance_segments() -> Result<(), String> {
    let swap = swap_window_params(900, 7, 0.35, 0.5).map_err(|e| e.to_string())?;
    let single = single_switch_params(2000, 2, 0.4, 0.5).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let nu = sample_nu(&swap, &mut rng);
        let sched = swap.schedule(&nu).map_err(|e| e.to_string())?;
        ensure(sched.num_segments() == 7, "swap-window segment count")?;
        let nu = sample_nu(&single, &mut rng);
        let sched = single.schedule(&nu).map_err(|e| e.to_string())?;
        ensure(sched.num_segments() == 2, "single-switch segment count")?;
    }
    let alt = alternating_instance(64, 4, 0.3, 0.5).map_err(|e| e.to_string())?;
    ensure(alt.num_segments() == 4, "alternating segment count")
}

fn check_determinism() -> Result<(), String> {
    let schedule = alternating_instance(2048, 4, 0.3, 0.5).map_err(|e| e.to_string())?;
    let env = Environment::new(schedule.clone(), 0.5, NoiseSpec::UnitGaussian)
        .map_err(|e| e.to_string())?;
    let run = || {
        let mut policy = PolicySpec::NonstatSat.build(&env, 5).unwrap();
        run_episode(&env, &mut *policy, &mut ChaCha8Rng::seed_from_u64(9))
    };
    let a = run();
    let b = run();
    ensure(
        a.transcript == b.transcript,
        "transcripts differ across identical runs",
    )?;
    let scored =
        satisficing_regret(&schedule, 0.5, &a.transcript.actions).map_err(|e| e.to_string())?;
    ensure(
        a.regret == scored,
        "episode regret disagrees with the scorer",
    )
}

fn check_seed_derivation() -> Result<(), String> {
    ensure(
        derive_seed(0, "noise", 0) == 0x1866_ea9c_93d8_a216,
        "golden vector changed: recorded experiments are no longer reproducible",
    )?;
    let mut seen = HashSet::new();
    for label in ["noise", "policy", "nu", "coin"] {
        for rep in 0..5_000u64 {
            if !seen.insert(derive_seed(7, label, rep)) {
                return Err(format!("collision at {label}/{rep}"));
            }
        }
    }
    Ok(())
}

fn check_estimator_implication() -> Result<(), String> {
    // 200 trajectories from a rotating policy set; whenever a block's wrong
    // pulls stay at or below l/4 the argmax estimate must be exact.
    let params = swap_window_params(896, 9, 0.3, 0.5).map_err(|e| e.to_string())?;
    let specs = [
        PolicySpec::NonstatSat,
        PolicySpec::SimpleSat,
        PolicySpec::Fixed(0),
        PolicySpec::Fixed(1),
        PolicySpec::RoundRobin,
        PolicySpec::Uniform,
    ];
    for rep in 0..200u64 {
        let spec = &specs[(rep % specs.len() as u64) as usize];
        let nu = sample_nu(&params, &mut ChaCha8Rng::seed_from_u64(rep));
        let env = params.environment(&nu).map_err(|e| e.to_string())?;
        let mut policy = spec.build(&env, rep ^ 0xabcd).map_err(|e| e.to_string())?;
        let out = run_episode(
            &env,
            &mut *policy,
            &mut ChaCha8Rng::seed_from_u64(rep ^ 0x77),
        );
        let wrong = out.transcript.wrong_pull_counts.as_ref().unwrap();
        for (block, &wrong_pulls) in wrong.iter().enumerate() {
            let view =
                BlockView::new(&out.transcript, &params, block).map_err(|e| e.to_string())?;
            if 4 * wrong_pulls as usize <= params.window_len
                && view.argmax_estimator() != nu.0[block]
            {
                return Err(format!("violation at rep {rep}, block {block}"));
            }
        }
    }
    Ok(())
}

fn check_regret_identity() -> Result<(), String> {
    let params = swap_window_params(300, 3, 0.45, 0.5).map_err(|e| e.to_string())?;
    for rep in 0..50u64 {
        let nu = sample_nu(&params, &mut ChaCha8Rng::seed_from_u64(rep));
        let env = params.environment(&nu).map_err(|e| e.to_string())?;
        let mut policy = PolicySpec::Uniform
            .build(&env, rep)
            .map_err(|e| e.to_string())?;
        let out = run_episode(&env, &mut *policy, &mut ChaCha8Rng::seed_from_u64(rep));
        let expected = params.delta * out.wrong_pulls as f64;
        if (out.regret - expected).abs() > 1e-9 * (1.0 + expected) {
            return Err(format!("identity off at rep {rep}"));
        }
    }
    Ok(())
}

fn check_n_delta() -> Result<(), String> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let t = rng.gen_range(2usize..100_000);
        let k = rng.gen_range(1usize..50);
        let d: f64 = rng.gen_range(0.01..2.0);
        match n_delta(t, k, d) {
            Some(n) => {
                let cap = 8.0 * (4.0 * (t as f64).ln() + (k as f64).ln()) / (d * d) + 1.0;
                if n as f64 > cap {
                    return Err(format!("n_delta({t}, {k}, {d}) = {n} above cap {cap}"));
                }
            }
            None => {
                if beta(t, t, k) <= d / 2.0 {
                    return Err(format!(
                        "n_delta({t}, {k}, {d}) missing despite feasibility"
                    ));
                }
            }
        }
    }
    Ok(())
}
