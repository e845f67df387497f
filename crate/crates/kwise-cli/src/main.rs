//! kwise — construct and verify random walks with k-wise independent steps.
//!
//! Subcommands mirror the library: `gray` (pairwise-independent bounded
//! walk), `m4` (mod-4 block construction), `modm` (general resynchronizing
//! construction), `verify` (independence suites, exact and chi-square),
//! `pascal` (random-sign Pascal triangle experiments), `perc` (k-wise
//! independent bond percolation).
//!
//! Every run is a pure function of its flags: all randomness flows from
//! `--seed` through derived substreams, artifacts are byte-identical across
//! reruns, and `--jobs` never changes results, only wall time. Exit status is
//! 0 iff every assertion the run makes holds.

mod artifacts;

use anyhow::{bail, Context, Result};
use artifacts::{OutputDir, Report};
use clap::{Parser, Subcommand, ValueEnum};
use kwise::gray::{
    self, gray_walk_path_ordered, needed_prefix, verify_pairwise_exact, Extremes, GraySampler,
    SubsetOrder,
};
use kwise::lab::{
    chi_square_on_tuples, chi_square_tuples, exact_uniform_sweep, ChiSquareConfig, IidBits,
    IidSampler, IndependenceReport,
};
use kwise::modm::{
    assemble_sequence, boundary_tuples, build_m4_sequence, choose_lambda, AnyLemmaSampler,
    M4Finite, M4Sampler, ModmParams, ModmSampler,
};
use kwise::pascal::central_statistics;
use kwise::perc::{sample_conditioned, verify_bond_kwise};
use kwise::walk::accumulate_walk;
use kwise::SeedStream;
use rayon::prelude::*;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kwise",
    version,
    about = "k-wise independent ±1 walk constructions and verification lab"
)]
struct Cli {
    /// Master seed; every substream derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output directory for artifacts.
    #[arg(long, global = true, env = "KWISE_OUT", default_value = ".")]
    out: PathBuf,

    /// Format for tabular side artifacts (reports are always JSON).
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads for trial-parallel suites (0 = all cores). Results are
    /// identical for any value.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Construction {
    Iid,
    Gray,
    M4,
    Modm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Chi2,
}

#[derive(Subcommand)]
enum Command {
    /// Run the gray walk and report predicted vs observed extremes.
    Gray {
        /// Walk horizon (number of steps).
        #[arg(long, default_value_t = 1024)]
        horizon: u64,
        /// Write the path as walk.csv.
        #[arg(long)]
        emit_path: bool,
        /// Use the lexicographic (Walsh) subset order instead of Gray.
        #[arg(long)]
        lexicographic: bool,
        /// Include the constant X_0 = +1 so the path starts at S'_0 = 1.
        #[arg(long)]
        include_x0: bool,
        /// Independent walks (seed substreams); with reps > 1 the report adds
        /// the empirical attainment-time distribution of sup and inf.
        #[arg(long, default_value_t = 1)]
        reps: u64,
    },

    /// Run the mod-4 block construction and assert S_{jL} ≡ 0 (mod 4).
    M4 {
        #[arg(long)]
        k: u32,
        /// Block length L (multiple of 4, L > k).
        #[arg(long = "L")]
        block_len: u64,
        /// Horizon (multiple of L).
        #[arg(long)]
        horizon: u64,
        /// Independent sequences to check.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Write the first sequence's path as walk.csv.
        #[arg(long)]
        emit_path: bool,
    },

    /// Assemble the general construction and measure checkpoint hit rates.
    Modm {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        eps: f64,
        /// Explicit λ (skips the certified grid search; reported as such).
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 10000)]
        trials: u64,
        /// Checkpoints I_1..I_j to measure.
        #[arg(long, default_value_t = 5)]
        checkpoints: u64,
        /// Write the first assembled path as walk.csv.
        #[arg(long)]
        emit_path: bool,
    },

    /// Grow random-sign Pascal triangles and summarize X_{2n,n}.
    Pascal {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 10000)]
        trials: u64,
    },

    /// Sample conditioned bond percolation and test bond k-wise independence.
    Perc {
        /// Sub-box side length.
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Conditioned samples for the structural checks.
        #[arg(long, default_value_t = 10000)]
        trials: u64,
        /// Bond tuples per independence regime.
        #[arg(long, default_value_t = 50)]
        tuples: usize,
        /// Trials for the chi-square tuple tests.
        #[arg(long, default_value_t = 20000)]
        kwise_trials: u64,
        /// Also test tuples covering all k+1 sub-boxes (reported, not gated).
        #[arg(long)]
        cover_all: bool,
    },

    /// Run an independence verification suite; exit 0 iff it passes.
    Verify {
        #[arg(long, value_enum)]
        construction: Construction,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Independence order under test.
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Seed bits for exact enumeration (gray/iid).
        #[arg(long, default_value_t = 10)]
        j: u32,
        /// Block length for m4.
        #[arg(long = "L", default_value_t = 8)]
        block_len: u64,
        /// Modulus for modm.
        #[arg(long, default_value_t = 4)]
        m: u32,
        /// ε for modm.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 100)]
        tuples: usize,
        #[arg(long, default_value_t = 100000)]
        trials: u64,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        /// For gray chi2: test the multiplicatively dependent triples
        /// (the detector-power case; expected to FAIL).
        #[arg(long)]
        dependent_triples: bool,
        /// For modm chi2: add block-boundary straddling tuples.
        #[arg(long)]
        adversarial: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
        {
            eprintln!("kwise: failed to size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("kwise: assertions failed (see report)");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("kwise: error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let out = OutputDir::new(&cli.out)?;
    match &cli.command {
        Command::Gray {
            horizon,
            emit_path,
            lexicographic,
            include_x0,
            reps,
        } => run_gray(
            cli,
            &out,
            *horizon,
            *emit_path,
            *lexicographic,
            *include_x0,
            *reps,
        ),
        Command::M4 {
            k,
            block_len,
            horizon,
            trials,
            emit_path,
        } => run_m4(cli, &out, *k, *block_len, *horizon, *trials, *emit_path),
        Command::Modm {
            k,
            m,
            eps,
            lambda,
            trials,
            checkpoints,
            emit_path,
        } => run_modm(
            cli,
            &out,
            *k,
            *m,
            *eps,
            *lambda,
            *trials,
            *checkpoints,
            *emit_path,
        ),
        Command::Pascal { n, trials } => run_pascal(cli, &out, *n, *trials),
        Command::Perc {
            n,
            k,
            p,
            trials,
            tuples,
            kwise_trials,
            cover_all,
        } => run_perc(
            cli,
            &out,
            *n,
            *k,
            *p,
            *trials,
            *tuples,
            *kwise_trials,
            *cover_all,
        ),
        Command::Verify { .. } => run_verify(cli, &out),
    }
}

struct GrayRep {
    passed: bool,
    stats: serde_json::Value,
    sup_attained_at: Option<u64>,
    inf_attained_at: Option<u64>,
}

fn gray_one_rep(
    stream: &mut SeedStream,
    horizon: u64,
    lexicographic: bool,
    include_x0: bool,
) -> Result<GrayRep> {
    let order = if lexicographic {
        SubsetOrder::Lexicographic
    } else {
        SubsetOrder::Gray
    };
    let xi = stream.take_signs(needed_prefix(horizon));
    let walk = gray_walk_path_ordered(&xi, horizon, include_x0, order)?;
    let predicted = gray::predicted_extremes(&xi);
    let (max, min, max_abs) = (walk.max(), walk.min(), walk.max_abs());
    let argmax = walk.sums().iter().position(|&s| s == max).unwrap() as u64;
    let argmin = walk.sums().iter().position(|&s| s == min).unwrap() as u64;
    let start_n = if include_x0 { 0 } else { 1 };

    // the exact constants bind for the gray order without the X_0 shift; the
    // primed walk and the lexicographic variant assert their own envelopes
    let (passed, predicted_json, sup_attained, inf_attained) = match predicted {
        Extremes::Bounded {
            j_min,
            sup_abs,
            sup,
            inf,
        } => {
            let ok = if include_x0 {
                let half = 1i64 << (j_min - 1);
                max <= half && min >= -half
            } else if lexicographic {
                max_abs <= 1i64 << j_min
            } else {
                max <= sup && min >= inf && max_abs <= sup_abs
            };
            let sup_hit = !include_x0 && !lexicographic && max == sup;
            let inf_hit = !include_x0 && !lexicographic && min == inf;
            (
                ok,
                json!({
                    "bounded": true,
                    "j_min": j_min,
                    "sup_abs": sup_abs,
                    "sup": sup,
                    "inf": inf,
                }),
                sup_hit,
                inf_hit,
            )
        }
        Extremes::UnboundedSoFar { prefix_len } => (
            true,
            json!({ "bounded": false, "prefix_len": prefix_len }),
            false,
            false,
        ),
    };
    Ok(GrayRep {
        passed,
        stats: json!({
            "observed": {
                "max": max,
                "min": min,
                "max_abs": max_abs,
                "argmax_n": start_n + argmax,
                "argmin_n": start_n + argmin,
            },
            "predicted": predicted_json,
            "sup_attained": sup_attained,
            "inf_attained": inf_attained,
        }),
        sup_attained_at: sup_attained.then_some(start_n + argmax),
        inf_attained_at: inf_attained.then_some(start_n + argmin),
    })
}

fn quantiles(mut times: Vec<u64>) -> serde_json::Value {
    if times.is_empty() {
        return json!(null);
    }
    times.sort_unstable();
    let q = |f: f64| times[((times.len() - 1) as f64 * f) as usize];
    json!({ "p50": q(0.5), "p90": q(0.9), "max": times[times.len() - 1] })
}

#[allow(clippy::too_many_arguments)]
fn run_gray(
    cli: &Cli,
    out: &OutputDir,
    horizon: u64,
    emit_path: bool,
    lexicographic: bool,
    include_x0: bool,
    reps: u64,
) -> Result<bool> {
    if horizon == 0 || reps == 0 {
        bail!("horizon and reps must be ≥ 1");
    }
    let first = gray_one_rep(
        &mut SeedStream::new(cli.seed).derive(0),
        horizon,
        lexicographic,
        include_x0,
    )?;
    let mut passed = first.passed;
    let mut stats = first.stats.clone();

    if reps > 1 {
        // empirical attainment-time distribution across independent tails;
        // the construction pins the extreme values, not when they are reached
        let mut sup_times = Vec::new();
        let mut inf_times = Vec::new();
        let mut sup_hits = 0u64;
        let mut inf_hits = 0u64;
        for rep in 0..reps {
            let rep_result = gray_one_rep(
                &mut SeedStream::new(cli.seed).derive(rep),
                horizon,
                lexicographic,
                include_x0,
            )?;
            passed &= rep_result.passed;
            if let Some(t) = rep_result.sup_attained_at {
                sup_hits += 1;
                sup_times.push(t);
            }
            if let Some(t) = rep_result.inf_attained_at {
                inf_hits += 1;
                inf_times.push(t);
            }
        }
        stats["attainment"] = json!({
            "reps": reps,
            "sup": {
                "attained_fraction": sup_hits as f64 / reps as f64,
                "times": quantiles(sup_times),
            },
            "inf": {
                "attained_fraction": inf_hits as f64 / reps as f64,
                "times": quantiles(inf_times),
            },
        });
    }

    let report = Report::new(
        if lexicographic { "walsh-lex" } else { "gray" },
        cli.seed,
        json!({
            "horizon": horizon,
            "include_x0": include_x0,
            "lexicographic": lexicographic,
            "reps": reps,
        }),
        passed,
        stats,
    );
    out.write_json("gray_report.json", &report)?;
    if emit_path {
        let order = if lexicographic {
            SubsetOrder::Lexicographic
        } else {
            SubsetOrder::Gray
        };
        let mut stream = SeedStream::new(cli.seed).derive(0);
        let xi = stream.take_signs(needed_prefix(horizon));
        let walk = gray_walk_path_ordered(&xi, horizon, include_x0, order)?;
        let start_n = if include_x0 { 0 } else { 1 };
        out.write_walk_csv("walk.csv", start_n, walk.sums(), None)?;
    }
    Ok(passed)
}

#[allow(clippy::too_many_arguments)]
fn run_m4(
    cli: &Cli,
    out: &OutputDir,
    k: u32,
    block_len: u64,
    horizon: u64,
    trials: u64,
    emit_path: bool,
) -> Result<bool> {
    let base = SeedStream::new(cli.seed);
    // validate once up front so bad parameters error instead of panicking
    // inside the worker pool
    build_m4_sequence(k, block_len, horizon, &mut base.derive(0))?;
    let violations: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = base.derive(t);
            let seq = build_m4_sequence(k, block_len, horizon, &mut stream)
                .expect("parameters validated above");
            let walk = accumulate_walk(seq.values(), Some(4)).expect("nonempty");
            let reduced = walk.reduced().expect("modulus set");
            (1..=horizon / block_len)
                .filter(|j| reduced[(j * block_len - 1) as usize] != 0)
                .count() as u64
        })
        .sum();

    let passed = violations == 0;
    let report = Report::new(
        "m4",
        cli.seed,
        json!({ "k": k, "L": block_len, "horizon": horizon, "trials": trials }),
        passed,
        json!({
            "checkpoints_per_trial": horizon / block_len,
            "checkpoint_violations": violations,
        }),
    );
    out.write_json("m4_report.json", &report)?;
    if emit_path {
        let mut stream = base.derive(0);
        let seq = build_m4_sequence(k, block_len, horizon, &mut stream)?;
        let walk = accumulate_walk(seq.values(), Some(4))?;
        out.write_walk_csv("walk.csv", 1, walk.sums(), walk.reduced())?;
    }
    Ok(passed)
}

#[allow(clippy::too_many_arguments)]
fn run_modm(
    cli: &Cli,
    out: &OutputDir,
    k: u32,
    m: u32,
    eps: f64,
    lambda: Option<f64>,
    trials: u64,
    checkpoints: u64,
    emit_path: bool,
) -> Result<bool> {
    if trials == 0 || checkpoints == 0 {
        bail!("trials and checkpoints must be positive");
    }
    let (params, certified) = match lambda {
        Some(l) => (ModmParams::with_lambda(k, m, eps, l)?, false),
        None => (choose_lambda(k, m, eps)?, true),
    };
    let sampler = AnyLemmaSampler::new(&params)?;
    let horizon = checkpoints * params.step_l;
    let base = SeedStream::new(cli.seed);

    let hits: Vec<(u64, u64)> = (0..trials)
        .into_par_iter()
        .fold(
            || vec![(0u64, 0u64); checkpoints as usize],
            |mut acc, t| {
                let run = assemble_sequence(&sampler, horizon, &base.derive(t))
                    .expect("horizon is a multiple of L");
                let walk = accumulate_walk(run.sequence.values(), Some(params.m))
                    .expect("nonempty");
                let reduced = walk.reduced().expect("modulus set");
                let sums = walk.sums();
                for (j, slot) in acc.iter_mut().enumerate() {
                    let idx = ((j as u64 + 1) * params.step_l - 1) as usize;
                    if reduced[idx] == 0 {
                        slot.0 += 1;
                    }
                    if sums[idx].rem_euclid(params.requested_m as i64) == 0 {
                        slot.1 += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![(0u64, 0u64); checkpoints as usize],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.0 += y.0;
                    x.1 += y.1;
                }
                a
            },
        );

    let threshold = 1.0 - eps - 3.0 * (eps / trials as f64).sqrt();
    let rates: Vec<serde_json::Value> = hits
        .iter()
        .enumerate()
        .map(|(j, &(w, r))| {
            json!({
                "j": j + 1,
                "index": (j as u64 + 1) * params.step_l,
                "hit_rate_working_modulus": w as f64 / trials as f64,
                "hit_rate_requested_modulus": r as f64 / trials as f64,
            })
        })
        .collect();
    let passed = hits
        .iter()
        .all(|&(w, _)| w as f64 / trials as f64 >= threshold);

    let report = Report::new(
        "modm",
        cli.seed,
        serde_json::to_value(&params)?,
        passed,
        json!({
            "certified_lambda": certified,
            "trials": trials,
            "threshold": threshold,
            "leftover_fraction": sampler.classification().leftover_fraction(),
            "checkpoint_rates": rates,
        }),
    );
    out.write_json("modm_report.json", &report)?;
    if cli.format == Format::Csv {
        let rows: Vec<Vec<String>> = hits
            .iter()
            .enumerate()
            .map(|(j, &(w, r))| {
                vec![
                    (j + 1).to_string(),
                    ((j as u64 + 1) * params.step_l).to_string(),
                    format!("{}", w as f64 / trials as f64),
                    format!("{}", r as f64 / trials as f64),
                ]
            })
            .collect();
        out.write_csv(
            "checkpoints.csv",
            "j,I_j,hit_rate_mod_m,hit_rate_mod_requested",
            &rows,
        )?;
    }
    if emit_path {
        let run = assemble_sequence(&sampler, horizon, &base.derive(0))?;
        let walk = accumulate_walk(run.sequence.values(), Some(params.m))?;
        out.write_walk_csv("walk.csv", 1, walk.sums(), walk.reduced())?;
    }
    Ok(passed)
}

fn run_pascal(cli: &Cli, out: &OutputDir, n: u32, trials: u64) -> Result<bool> {
    let base = SeedStream::new(cli.seed);
    let stats = central_statistics(n, trials, &base)?;
    let mean_ok = stats.mean.abs() <= 3.0 * stats.mean_se;
    let second_ok = (stats.second_moment - stats.expected_second_moment).abs()
        <= 3.0 * stats.second_moment_se;
    let passed = mean_ok && second_ok;
    let report = Report::new(
        "pascal",
        cli.seed,
        json!({ "n": n, "trials": trials }),
        passed,
        serde_json::to_value(&stats)?,
    );
    out.write_json("pascal_report.json", &report)?;
    if cli.format == Format::Csv {
        let rows: Vec<Vec<String>> = stats
            .histogram
            .iter()
            .map(|(center, count)| vec![format!("{center}"), count.to_string()])
            .collect();
        out.write_csv("histogram.csv", "bin_center,count", &rows)?;
    }
    Ok(passed)
}

#[allow(clippy::too_many_arguments)]
fn run_perc(
    cli: &Cli,
    out: &OutputDir,
    n: u32,
    k: u32,
    p: f64,
    trials: u64,
    tuples: usize,
    kwise_trials: u64,
    cover_all: bool,
) -> Result<bool> {
    let base = SeedStream::new(cli.seed);
    sample_conditioned(n, k, p, &mut base.derive(0))?; // surface parameter errors
    // structural checks over conditioned samples
    let (odd, crossing, attempts): (u64, u64, u64) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = base.derive(t);
            let config = sample_conditioned(n, k, p, &mut stream)
                .expect("parameters validated above");
            (
                config.odd_crossings() as u64,
                config.full_box_crossing() as u64,
                config.rejections + 1,
            )
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));

    let avoiding = verify_bond_kwise(n, k, p, tuples, kwise_trials, 0.01, cli.seed, true)?;
    let covering = if cover_all {
        Some(verify_bond_kwise(
            n,
            k,
            p,
            tuples,
            kwise_trials,
            0.01,
            cli.seed,
            false,
        )?)
    } else {
        None
    };

    let structural = odd == trials && crossing == trials;
    let passed = structural && avoiding.report.passed && avoiding.marginals_pass;
    let report = Report::new(
        "perc",
        cli.seed,
        json!({ "n": n, "k": k, "p": p, "trials": trials, "tuples": tuples,
                "kwise_trials": kwise_trials }),
        passed,
        json!({
            "odd_crossing_count": odd,
            "full_box_crossing_count": crossing,
            "acceptance_rate": trials as f64 / attempts as f64,
            "kwise_avoiding_one_box": serde_json::to_value(&avoiding)?,
            "kwise_covering_all_boxes": covering
                .as_ref()
                .map(serde_json::to_value)
                .transpose()?,
        }),
    );
    out.write_json("perc_report.json", &report)?;
    Ok(passed)
}

fn run_verify(cli: &Cli, out: &OutputDir) -> Result<bool> {
    let Command::Verify {
        construction,
        mode,
        k,
        j,
        block_len,
        m,
        eps,
        tuples,
        trials,
        alpha,
        dependent_triples,
        adversarial,
    } = &cli.command
    else {
        unreachable!("dispatched from run()");
    };
    let (name, report): (&str, IndependenceReport) = match (construction, mode) {
        (Construction::Gray, Mode::Exact) => ("gray-exact", verify_pairwise_exact(*j)?),
        (Construction::Iid, Mode::Exact) => {
            let positions: Vec<u64> = (1..=*j as u64).collect();
            (
                "iid-exact",
                exact_uniform_sweep(&IidBits(*j), &positions, *k as usize, "iid")?,
            )
        }
        (Construction::M4, Mode::Exact) => {
            let space = M4Finite {
                block_len: *block_len,
                blocks: 2,
            };
            let positions: Vec<u64> = (1..=2 * *block_len).collect();
            let max_k = (*k as usize).min(*block_len as usize - 1);
            (
                "m4-exact",
                exact_uniform_sweep(&space, &positions, max_k, "m4")?,
            )
        }
        (Construction::Modm, Mode::Exact) => {
            bail!("exact mode for the general construction is not enumerable; use chi2")
        }
        (Construction::Iid, Mode::Chi2) => {
            let cfg = chi2_config(*k, *tuples, *trials, *alpha, cli.seed, 4 * *block_len);
            ("iid-chi2", chi_square_tuples(&IidSampler, &cfg)?)
        }
        (Construction::Gray, Mode::Chi2) => {
            let sampler = GraySampler {
                order: SubsetOrder::Gray,
            };
            if *dependent_triples {
                // (a, b, completion): X_a·X_b·X_c ≡ ±1, the power check
                let sets: Vec<Vec<u64>> = (1..=*tuples as u64)
                    .map(|a| {
                        let b = a + 1;
                        let c = gray::dependent_triple_completion(a, b);
                        let mut t = vec![a, b, c];
                        t.sort_unstable();
                        t
                    })
                    .collect();
                (
                    "gray-dependent-triples",
                    chi_square_on_tuples(&sampler, &sets, *trials, *alpha, cli.seed)?,
                )
            } else {
                let cfg = chi2_config(*k, *tuples, *trials, *alpha, cli.seed, 1024);
                ("gray-chi2", chi_square_tuples(&sampler, &cfg)?)
            }
        }
        (Construction::M4, Mode::Chi2) => {
            let sampler = M4Sampler {
                k: *k,
                block_len: *block_len,
            };
            let cfg = chi2_config(*k, *tuples, *trials, *alpha, cli.seed, 4 * *block_len);
            ("m4-chi2", chi_square_tuples(&sampler, &cfg)?)
        }
        (Construction::Modm, Mode::Chi2) => {
            let params = choose_lambda(*k, *m, *eps)?;
            let sampler = ModmSampler::new(&params)?;
            if *adversarial {
                let sets = boundary_tuples(&params, *k as usize);
                (
                    "modm-boundary-chi2",
                    chi_square_on_tuples(&sampler, &sets, *trials, *alpha, cli.seed)?,
                )
            } else {
                let cfg = chi2_config(
                    *k,
                    *tuples,
                    *trials,
                    *alpha,
                    cli.seed,
                    4 * params.step_l,
                );
                ("modm-chi2", chi_square_tuples(&sampler, &cfg)?)
            }
        }
    };
    let passed = report.passed;
    let envelope = Report::new(
        name,
        cli.seed,
        json!({
            "mode": if *mode == Mode::Exact { "exact" } else { "chi2" },
            "k": k, "j": j, "L": block_len, "m": m, "eps": eps,
            "tuples": tuples, "trials": trials, "alpha": alpha,
        }),
        passed,
        serde_json::to_value(&report)?,
    );
    out.write_json("verify_report.json", &envelope)
        .context("writing verify report")?;
    Ok(passed)
}

fn chi2_config(
    k: u32,
    tuples: usize,
    trials: u64,
    alpha: f64,
    seed: u64,
    window_hi: u64,
) -> ChiSquareConfig {
    ChiSquareConfig {
        k: k as usize,
        num_tuples: tuples,
        trials,
        alpha,
        tuple_seed: seed ^ 0x5eed,
        window: (1, window_hi),
        seed,
    }
}
