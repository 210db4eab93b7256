//! Command-line interface: tabulate elections, score committees, compute
//! instance optima, manage the ballot corpus, and reproduce the experiment
//! tables and figures.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use propmeter::coalitions::{maximal_solid_coalitions, threshold_set, DivisorMethod};
use propmeter::completion::{complete_ballots, CompletionConfig};
use propmeter::formats::{csv_to_election, parse_blt, write_blt};
use propmeter::harness::corpus::{self, cache_dir, fetch_scot, load_corpus, FetchSource};
use propmeter::harness::experiment::{run_experiment, ExperimentConfig};
use propmeter::harness::figures;
use propmeter::measures::{axiom_census, MeasureContext, MeasureId, PriceMode, PricePath};
use propmeter::model::{round_3dp, Committee, Election, Frac};
use propmeter::optimizer::{
    apportion_nondisjoint, hitting_set_instance, optimal_bruteforce, optimal_psc,
    DEFAULT_ENUM_CAP,
};
use propmeter::rules::{run_rule, RuleId, TieBreakPolicy};

#[derive(Parser)]
#[command(
    name = "propmeter",
    version,
    about = "Proportionality measures for ranked-ballot elections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TieBreakArgs {
    /// Tie-break mode.
    #[arg(long, default_value = "lex", value_parser = ["lex", "random"])]
    tiebreak: String,
    /// Seed for random tie-breaking.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TieBreakArgs {
    fn policy(&self) -> TieBreakPolicy {
        match self.tiebreak.as_str() {
            "random" => TieBreakPolicy::Seeded(self.seed),
            _ => TieBreakPolicy::Lexicographic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the maximal solid coalitions and threshold constraints.
    Coalitions {
        file: PathBuf,
        #[arg(long, default_value = "dhondt")]
        divisors: DivisorMethod,
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
    /// Tabulate the election under a voting rule.
    Rules {
        file: PathBuf,
        #[arg(long)]
        rule: RuleId,
        #[command(flatten)]
        tiebreak: TieBreakArgs,
        /// Emit the round log as JSON.
        #[arg(long)]
        log: bool,
    },
    /// Score one committee under the proportionality measures.
    Alpha {
        file: PathBuf,
        /// Comma-separated candidate indices, e.g. 1,4,5.
        #[arg(long)]
        committee: String,
        #[arg(long, default_value = "all")]
        measure: String,
        /// Use the displayed-formula reading of the price stability term.
        #[arg(long)]
        strict_paper_price: bool,
    },
    /// Count committees satisfying each axiom.
    Census {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
        cap: u64,
    },
    /// Instance-optimal alpha values.
    Optimal {
        file: PathBuf,
        #[arg(long, default_value = "all")]
        measure: String,
        #[arg(long, default_value = "descent", value_parser = ["descent", "bruteforce"])]
        method: String,
        #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
        cap: u64,
    },
    /// Generate a 3-Hitting-Set hardness election.
    GenHardness {
        #[arg(long)]
        universe: usize,
        #[arg(long)]
        sets: usize,
        #[arg(long)]
        h: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apportion representation guarantees over non-disjoint coalitions.
    Apportion {
        file: PathBuf,
        #[arg(long, default_value = "dhondt")]
        divisors: DivisorMethod,
    },
    /// Complete truncated ballots.
    Complete {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Extension cutoff as a fraction, e.g. 0.1.
        #[arg(long, default_value_t = 0.1)]
        cutoff: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a corpus-layout CSV ballot table to BLT.
    Convert {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Download and convert the Scottish election corpus.
    FetchScot {
        #[arg(long)]
        dest: Option<PathBuf>,
        /// Override the download URL.
        #[arg(long)]
        url: Option<String>,
        /// Convert from a local tarball instead of downloading.
        #[arg(long)]
        archive: Option<PathBuf>,
        /// Convert from a local directory instead of downloading.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Ballot statistics of a corpus, for cross-checking published totals.
    Stats { dir: PathBuf },
    /// Run the full experiment suite over a corpus.
    Experiment {
        data: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Comma-separated rules or "all".
        #[arg(long, default_value = "all")]
        rules: String,
        /// Comma-separated measures or "all".
        #[arg(long, default_value = "all")]
        measures: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Complete ballots before evaluating.
        #[arg(long)]
        completed: bool,
        #[arg(long)]
        strict_paper_price: bool,
        /// How EAR treats unranked candidates.
        #[arg(long, default_value = "ignore", value_parser = ["ignore", "final-rank"])]
        ear_unranked: String,
        #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
        cap: u64,
    },
    /// Render figures from a finished run directory.
    Plot {
        run_dir: PathBuf,
        /// hist-<measure>, box-<measure>, or pair:<ruleA>:<ruleB>[:<measure>]
        #[arg(long)]
        figure: String,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_election(path: &PathBuf) -> Result<Election> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|x| x == "json") {
        Ok(propmeter::formats::from_json(&text)?)
    } else {
        Ok(parse_blt(&text)?)
    }
}

fn parse_measures(s: &str) -> Result<Vec<MeasureId>> {
    if s == "all" {
        return Ok(MeasureId::ALL.to_vec());
    }
    if s == "none" || s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| part.trim().parse().map_err(|e: String| anyhow!(e)))
        .collect()
}

fn parse_rules(s: &str) -> Result<Vec<RuleId>> {
    if s == "all" {
        return Ok(RuleId::ALL.to_vec());
    }
    s.split(',')
        .map(|part| part.trim().parse().map_err(|e: String| anyhow!(e)))
        .collect()
}

fn fmt_frac(x: Frac) -> String {
    format!("{:.3} ({}/{})", round_3dp(x), x.numer(), x.denom())
}

fn candidate_list(cands: &[usize]) -> String {
    cands
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Coalitions { file, divisors, format } => {
            let e = load_election(&file)?;
            let coalitions = maximal_solid_coalitions(&e);
            let thresholds = threshold_set(&coalitions, e.total_voters(), e.seats(), divisors);
            if format == "json" {
                let out = serde_json::json!({
                    "coalitions": coalitions,
                    "thresholds": thresholds.iter().map(|t| serde_json::json!({
                        "candidates": t.candidates,
                        "ell": t.ell,
                        "support": t.support,
                        "threshold": format!("{}/{}", t.threshold.numer(), t.threshold.denom()),
                        "threshold_3dp": round_3dp(t.threshold),
                    })).collect::<Vec<_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&out)?);
            } else {
                println!("candidates,support");
                for c in &coalitions {
                    println!("{},{}", candidate_list(&c.candidates), c.support);
                }
                println!();
                println!("candidates,ell,support,threshold");
                for t in &thresholds {
                    println!(
                        "{},{},{},{:.3}",
                        candidate_list(&t.candidates),
                        t.ell,
                        t.support,
                        round_3dp(t.threshold)
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rules { file, rule, tiebreak, log } => {
            let e = load_election(&file)?;
            let (committee, round_log) = run_rule(&e, rule, tiebreak.policy());
            let names: Vec<&str> = committee
                .members()
                .iter()
                .map(|&c| e.candidate_name(c))
                .collect();
            println!("{}: {} ({})", rule.label(), committee, names.join(", "));
            if log {
                println!("{}", serde_json::to_string_pretty(&round_log.to_json())?);
            }
            if !round_log.diagnostics.is_empty() {
                for d in &round_log.diagnostics {
                    eprintln!("diagnostic: {d}");
                }
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Alpha { file, committee, measure, strict_paper_price } => {
            let e = load_election(&file)?;
            let members: Vec<usize> = committee
                .split(',')
                .map(|x| x.trim().parse::<usize>().context("committee indices"))
                .collect::<Result<_>>()?;
            if members.len() != e.seats() {
                bail!(
                    "committee has {} members, the instance needs {}",
                    members.len(),
                    e.seats()
                );
            }
            let w = Committee::new(members, e.num_candidates())?;
            let mode = if strict_paper_price {
                PriceMode::StrictPaper
            } else {
                PriceMode::Redirectable
            };
            let ctx = MeasureContext::new(&e);
            for m in parse_measures(&measure)? {
                match m {
                    MeasureId::Psc => {
                        let (alpha, witness) = ctx.psc_value(&w);
                        let extra = witness.map(|x| {
                            format!("coalition {} needs {}", candidate_list(&x.candidates), x.ell)
                        });
                        println!("psc: {}{}", fmt_frac(alpha), witness_str(&extra));
                    }
                    MeasureId::EjrPlus => {
                        let (alpha, witness) = ctx.ejr_plus_value(&w);
                        let extra = witness.map(|x| {
                            format!(
                                "candidate {} at rank {} with ell {}",
                                x.candidate, x.rank, x.ell
                            )
                        });
                        println!("ejr: {}{}", fmt_frac(alpha), witness_str(&extra));
                    }
                    MeasureId::LocalStability => {
                        let (alpha, witness) = ctx.local_stability_value(&w);
                        let extra = witness.map(|x| {
                            format!("candidate {} preferred by weight {}", x.candidate, x.group_weight)
                        });
                        println!("ls: {}{}", fmt_frac(alpha), witness_str(&extra));
                    }
                    MeasureId::Priceability => {
                        let report = propmeter::measures::price::priceability_value(
                            &e,
                            &w,
                            mode,
                            PricePath::Auto,
                        );
                        println!(
                            "price: {} (price {}, {})",
                            fmt_frac(report.alpha),
                            fmt_frac(report.price),
                            if report.exact { "exact" } else { "float" }
                        );
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Census { file, cap } => {
            let e = load_election(&file)?;
            let census = axiom_census(&e, cap, PriceMode::default())?;
            println!("committees: {}", census.total_committees);
            for m in MeasureId::ALL {
                println!(
                    "{}: {}/{}",
                    m.label(),
                    census.satisfied_count(m),
                    census.total_committees
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Optimal { file, measure, method, cap } => {
            let e = load_election(&file)?;
            for m in parse_measures(&measure)? {
                let report = match (m, method.as_str()) {
                    (MeasureId::Psc, "descent") => optimal_psc(&e)?,
                    _ => optimal_bruteforce(&e, m, cap)?,
                };
                println!("{}: {} witness {}", m.label(), fmt_frac(report.alpha), report.witness);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::GenHardness { universe, sets, h, seed, out } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let sets: Vec<[usize; 3]> = (0..sets)
                .map(|_| {
                    let mut pool: Vec<usize> = (1..=universe).collect();
                    for i in (1..pool.len()).rev() {
                        pool.swap(i, rng.gen_range(0..=i));
                    }
                    [pool[0], pool[1], pool[2]]
                })
                .collect();
            let (election, alpha) = hitting_set_instance(universe, &sets, h)?;
            std::fs::write(&out, write_blt(&election))?;
            println!(
                "wrote {} (m={}, k={}, n={}), alpha = {}",
                out.display(),
                election.num_candidates(),
                election.seats(),
                election.total_voters(),
                fmt_frac(alpha)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Apportion { file, divisors } => {
            let e = load_election(&file)?;
            let coalitions = maximal_solid_coalitions(&e);
            let trace = apportion_nondisjoint(
                &coalitions,
                e.num_candidates(),
                e.total_voters(),
                e.seats(),
                divisors,
            )?;
            println!("step,candidates,ell,quotient");
            for (i, g) in trace.accepted.iter().enumerate() {
                println!(
                    "{},{},{},{:.3}",
                    i + 1,
                    candidate_list(&g.candidates),
                    g.ell,
                    round_3dp(g.quotient)
                );
            }
            match &trace.blocking {
                Some(g) => println!(
                    "blocking,{},{},{:.3}",
                    candidate_list(&g.candidates),
                    g.ell,
                    round_3dp(g.quotient)
                ),
                None => println!("blocking,none,,"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Complete { file, seed, cutoff, out } => {
            let e = load_election(&file)?;
            let cutoff =
                Frac::approximate_float(cutoff).ok_or_else(|| anyhow!("bad cutoff {cutoff}"))?;
            if cutoff <= Frac::new(0, 1) || cutoff > Frac::new(1, 1) {
                bail!("cutoff must lie in (0, 1]");
            }
            let completed = complete_ballots(&e, &CompletionConfig { cutoff, seed });
            std::fs::write(&out, write_blt(&completed))?;
            println!(
                "wrote {} ({} ballot types, n = {})",
                out.display(),
                completed.ballots().len(),
                completed.total_voters()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Convert { file, out } => {
            let text = std::fs::read_to_string(&file)?;
            let e = csv_to_election(&text)?;
            std::fs::write(&out, write_blt(&e))?;
            println!(
                "wrote {} (m={}, k={}, n={})",
                out.display(),
                e.num_candidates(),
                e.seats(),
                e.total_voters()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::FetchScot { dest, url, archive, dir } => {
            let dest = dest.unwrap_or_else(cache_dir);
            let source = if let Some(path) = archive {
                FetchSource::Archive(path)
            } else if let Some(path) = dir {
                FetchSource::Dir(path)
            } else {
                FetchSource::Https(url.unwrap_or_else(|| corpus::SCOT_ELEX_URL.to_string()))
            };
            let (index, errors) = fetch_scot(&dest, source)?;
            println!(
                "indexed {} elections ({} multiwinner) into {}",
                index.entries.len(),
                index.multiwinner().count(),
                dest.display()
            );
            if !errors.is_empty() {
                for e in &errors {
                    eprintln!("skipped {}: {}", e.id, e.error);
                }
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { dir } => {
            let (index, errors) = load_corpus(&dir)?;
            let stats = corpus::corpus_stats(&dir, &index).map_err(|e| anyhow!(e))?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
            Ok(if errors.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Experiment {
            data,
            out,
            rules,
            measures,
            seed,
            jobs,
            completed,
            strict_paper_price,
            ear_unranked,
            cap,
        } => {
            let (index, load_errors) = load_corpus(&data)?;
            let cfg = ExperimentConfig {
                rules: parse_rules(&rules)?,
                measures: parse_measures(&measures)?,
                seed,
                jobs,
                completed,
                enum_cap: cap,
                strict_paper_price,
                ear_unranked: match ear_unranked.as_str() {
                    "final-rank" => propmeter::rules::EarUnranked::FinalRank,
                    _ => propmeter::rules::EarUnranked::Ignore,
                },
            };
            let artifacts = run_experiment(&data, &index, &cfg, &out).map_err(|e| anyhow!(e))?;
            println!(
                "run {}: {} elections evaluated, {} failed, tables in {}",
                artifacts.run_id,
                artifacts.results.len(),
                artifacts.errors.len() + load_errors.len(),
                artifacts.out_dir.join("tables").display()
            );
            Ok(if artifacts.errors.is_empty() && load_errors.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Plot { run_dir, figure } => {
            let table = figures::ValueTable::load(&run_dir).map_err(|e| anyhow!(e))?;
            let fig_dir = run_dir.join("figures");
            std::fs::create_dir_all(&fig_dir)?;
            if let Some(measure) = figure.strip_prefix("hist-") {
                let values = table
                    .column(&format!("opt_{measure}"))
                    .map_err(|e| anyhow!(e))?;
                figures::histogram(&values, &fig_dir, &figure, &format!("optimal {measure} values"))
                    .map_err(|e| anyhow!(e))?;
            } else if let Some(measure) = figure.strip_prefix("box-") {
                let mut series = vec![(
                    "optimal".to_string(),
                    table
                        .column(&format!("opt_{measure}"))
                        .map_err(|e| anyhow!(e))?,
                )];
                for rule in RuleId::ALL {
                    let col = format!("{}_{measure}", rule.label());
                    if table.header.contains(&col) {
                        series.push((
                            rule.label().to_string(),
                            table.column(&col).map_err(|e| anyhow!(e))?,
                        ));
                    }
                }
                figures::boxplot(&series, &fig_dir, &figure, &format!("{measure} values by rule"))
                    .map_err(|e| anyhow!(e))?;
            } else if let Some(rest) = figure.strip_prefix("pair:") {
                let parts: Vec<&str> = rest.split(':').collect();
                if parts.len() < 2 {
                    bail!("pair figures need pair:<ruleA>:<ruleB>[:<measure>]");
                }
                let measure = parts.get(2).copied().unwrap_or("psc");
                let rows = pair_rows(&table, parts[0], parts[1], measure).map_err(|e| anyhow!(e))?;
                figures::pairwise(
                    &rows,
                    (parts[0], parts[1]),
                    &fig_dir,
                    &figure.replace(':', "-"),
                    &format!("{measure}: {} vs {}", parts[0], parts[1]),
                )
                .map_err(|e| anyhow!(e))?;
            } else {
                bail!("unknown figure {figure:?}");
            }
            println!("wrote figures under {}", fig_dir.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Rows (optimal, a, b) restricted to elections where the two rules chose
/// different committees; everything comes straight out of values.csv.
fn pair_rows(
    table: &figures::ValueTable,
    rule_a: &str,
    rule_b: &str,
    measure: &str,
) -> Result<Vec<(f64, f64, f64)>, String> {
    let optimal = table.column(&format!("opt_{measure}"))?;
    let a = table.column(&format!("{rule_a}_{measure}"))?;
    let b = table.column(&format!("{rule_b}_{measure}"))?;
    let committees_a = table.column_str(&format!("{rule_a}_committee"))?;
    let committees_b = table.column_str(&format!("{rule_b}_committee"))?;
    Ok(optimal
        .into_iter()
        .enumerate()
        .filter(|(i, _)| committees_a[*i] != committees_b[*i])
        .map(|(i, o)| (o, a[i], b[i]))
        .collect())
}

fn witness_str(witness: &Option<String>) -> String {
    match witness {
        Some(w) => format!(" [{w}]"),
        None => String::new(),
    }
}
