use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lof::automata::{Fsa, PropositionPartition, SafetyAutomaton};
use lof::gridworld::{EnvironmentMdp, EventAssignment};
use lof::harness::{run_composability, run_oracle_suite, run_satisfaction, ExperimentConfig};
use lof::ltl::{parse_formula, split_spec, translate_cosafe_to_fsa};
use lof::options::{train_all_options, OptionBundle, OptionSet, OptionTrainConfig, Schedule};
use lof::planner::{
    greedy_metapolicy, lof_q_learning, logical_value_iteration, logical_value_iteration_general,
    EventMode, LofQlConfig, PlannerConfig,
};
use lof::runtime::{check_satisfaction, rollout, Controller, RolloutSetup};

#[derive(Parser)]
#[command(name = "lof", version, about = "Logical options on gridworlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a co-safe LTL specification into a task automaton.
    Compile {
        #[arg(long)]
        spec: String,
        /// Proposition partition file (JSON): {"subgoals": [..], "safety": [..], "events": [..]}.
        #[arg(long, conflicts_with = "map")]
        props: Option<PathBuf>,
        /// Take the propositions from a map instead.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = lof::ltl::DEFAULT_STATE_CAP)]
        state_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn one option per subgoal and write an options bundle.
    TrainOptions {
        #[arg(long)]
        map: PathBuf,
        /// Safety automaton JSON; options are then trained on the product.
        #[arg(long)]
        safety: Option<PathBuf>,
        #[arg(long, default_value_t = OptionTrainConfig::default().episodes)]
        episodes: usize,
        #[arg(long, default_value_t = OptionTrainConfig::default().max_steps)]
        max_steps: usize,
        /// independent, shared or chained
        #[arg(long, default_value = "chained")]
        schedule: Schedule,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a meta-policy for a task and optionally roll it out once.
    Plan {
        #[arg(long)]
        fsa: PathBuf,
        #[arg(long)]
        options: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        safety: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Vi)]
        mode: Mode,
        /// Fixed event values, e.g. `can=1`.
        #[arg(long, default_value = "")]
        events: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a JSON-lines trace of one rollout from the map's start cell.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 400)]
        cap: usize,
    },
    /// Run an experiment protocol and write metrics, traces and artifacts.
    Experiment {
        #[arg(value_enum)]
        kind: Experiment,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the oracle checks; exits non-zero if any fails.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Vi,
    Ql,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Satisfaction,
    Composability,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_env(path: &Path) -> Result<EnvironmentMdp> {
    EnvironmentMdp::from_text(&read(path)?)
        .with_context(|| format!("loading map {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Compile {
            spec,
            props,
            map,
            state_cap,
            out,
        } => {
            let partition = match (props, map) {
                (Some(p), _) => serde_json::from_str::<PropositionPartition>(&read(&p)?)?,
                (None, Some(m)) => load_env(&m)?.partition,
                (None, None) => bail!("pass --props or --map"),
            };
            partition.check()?;
            let f = parse_formula(&spec)?;
            let split = split_spec(&f, &partition.safety)?;
            if !split.safety_conjuncts.is_empty() {
                log::info!("safety part: never {}", split.safety_conjuncts.join(", "));
            }
            let fsa = translate_cosafe_to_fsa(&split.liveness, &partition, state_cap)?;
            log::info!("{} states, {} edges", fsa.n_states(), fsa.edges.len());
            emit(out.as_deref(), &fsa.to_json_string())
        }
        Command::TrainOptions {
            map,
            safety,
            episodes,
            max_steps,
            schedule,
            seed,
            out,
        } => {
            let env = load_env(&map)?;
            let cfg = OptionTrainConfig {
                episodes,
                max_steps,
                schedule,
                seed,
                ..Default::default()
            };
            let table = match &safety {
                Some(p) => {
                    Some(SafetyAutomaton::from_json_str(&read(p)?)?.compile(&env.partition)?)
                }
                None => None,
            };
            let options = train_all_options(&env, table.as_ref(), &cfg)?;
            log::info!(
                "{} options, {} training steps",
                options.options.len(),
                options.training_steps()
            );
            let bundle = options.to_bundle(Some(&read(&map)?));
            write(&out, &serde_json::to_string_pretty(&bundle)?)
        }
        Command::Plan {
            fsa,
            options,
            map,
            safety,
            mode,
            events,
            seed,
            out,
            trace,
            cap,
        } => {
            let env = load_env(&map)?;
            let fsa = Fsa::from_json_str(&read(&fsa)?)?;
            let bundle: OptionBundle = serde_json::from_str(&read(&options)?)?;
            let options = OptionSet::from_bundle(&bundle, &env)?;
            let events = EventAssignment::parse(&env.partition, &events)?;
            let safety = match &safety {
                Some(p) => Some(SafetyAutomaton::from_json_str(&read(p)?)?),
                None => None,
            };
            if options.general != safety.is_some() {
                bail!(
                    "a safety automaton is needed exactly when the options were trained with one"
                );
            }
            let table = fsa.compile(&env.partition)?;
            let safety_table = match &safety {
                Some(s) => Some(s.compile(&env.partition)?),
                None => None,
            };
            let pc = PlannerConfig::fixed(events.mask);
            let policy = match mode {
                Mode::Vi => Some(match &safety {
                    Some(s) => logical_value_iteration_general(&fsa, s, &options, &env, &pc)?,
                    None => logical_value_iteration(&fsa, &options, &env, &pc)?,
                }),
                Mode::Ql => {
                    let qc = LofQlConfig {
                        seed,
                        ..Default::default()
                    };
                    Some(lof_q_learning(
                        &fsa,
                        &options,
                        &env,
                        EventMode::Fixed(events.mask),
                        &qc,
                    )?)
                }
                Mode::Greedy => None,
            };
            let doc = match &policy {
                Some(p) => p.to_json(),
                None => {
                    let n_fs = options.n_fs();
                    let mut choices = Vec::new();
                    for f in 0..table.n_states() {
                        for fs in 0..n_fs {
                            for s in 0..env.n_states() {
                                choices.push(
                                    greedy_metapolicy(&table, &options, f, fs, s, events.mask).ok(),
                                );
                            }
                        }
                    }
                    serde_json::json!({"kind": "greedy", "n_f": table.n_states(), "n_fs": n_fs,
                        "n_cells": env.n_states(), "mu": choices})
                }
            };
            emit(out.as_deref(), &serde_json::to_string_pretty(&doc)?)?;
            if let Some(path) = trace {
                let start = env.start_cell().context("the map has no start cell")?;
                let controller = match &policy {
                    Some(p) => Controller::Meta {
                        policy: p,
                        options: &options,
                    },
                    None => Controller::Greedy { options: &options },
                };
                let setup = RolloutSetup {
                    fsa: &table,
                    safety: safety_table.as_ref(),
                    env: &env,
                };
                let t = rollout(controller, setup, events, start, seed, cap);
                let ok = check_satisfaction(&t, &fsa, &env)?;
                log::info!(
                    "rollout: {:?} after {} steps, return {}, satisfied {ok}",
                    t.status,
                    t.steps(),
                    t.raw_return
                );
                write(&path, &t.to_jsonl())?;
            }
            Ok(())
        }
        Command::Experiment { kind, config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let env = load_env(&cfg.map)?;
            let output = match kind {
                Experiment::Satisfaction => run_satisfaction(&cfg, &env)?,
                Experiment::Composability => {
                    let options = match &cfg.options_bundle {
                        Some(p) => OptionSet::from_bundle(&serde_json::from_str(&read(p)?)?, &env)?,
                        None => {
                            let mut oc = cfg.options.clone();
                            oc.seed = lof::harness::derive_seed(cfg.run_seed(0), &[0]);
                            train_all_options(&env, None, &oc)?
                        }
                    };
                    let mut c = run_composability(&cfg, &env, &options)?;
                    c.output
                        .artifacts
                        .push(("summary".into(), serde_json::to_value(&c.summaries)?));
                    c.output.artifacts.push((
                        "options".into(),
                        serde_json::to_value(options.to_bundle(Some(&read(&cfg.map)?)))?,
                    ));
                    c.output
                }
            };
            output.write_to(&out)?;
            log::info!(
                "{} rows written to {}",
                output.rows.len(),
                out.join("metrics.csv").display()
            );
            Ok(())
        }
        Command::Oracle { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let env = load_env(&cfg.map)?;
            let report = run_oracle_suite(&cfg, &env)?;
            println!("{report}");
            if !report.ok() {
                std::process::exit(1);
            }
            Ok(())
        }
    }
}
