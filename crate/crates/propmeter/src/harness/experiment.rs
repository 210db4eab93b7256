//! Full-corpus experiment runs.
//!
//! One pass per election computes all four measure values for every
//! committee, the five rule committees, instance optima, census counts, and
//! the share of singleton constraints at the PSC optimum. Aggregation then
//! emits the census, disagreement, distance and alignment tables along with
//! a per-election value table that the figures are rendered from.
//!
//! Every output is a pure function of (corpus content hash, config, seed):
//! the run directory is named by that hash and re-runs are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::completion::{complete_ballots, CompletionConfig};
use crate::harness::corpus::{read_election, CorpusError, CorpusIndex};
use crate::measures::{MeasureContext, MeasureId, PriceMode, PricePath};
use crate::model::{committee_distance, Committee, Election, Frac};
use crate::optimizer::{binomial, committees, optimal_psc};
use crate::rules::{ear, run_rule, EarUnranked, RuleId, TieBreakPolicy};

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub rules: Vec<RuleId>,
    pub measures: Vec<MeasureId>,
    pub seed: u64,
    pub jobs: usize,
    /// Complete every ballot before evaluating.
    pub completed: bool,
    pub enum_cap: u64,
    pub strict_paper_price: bool,
    /// How EAR treats unranked candidates.
    pub ear_unranked: EarUnranked,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rules: RuleId::ALL.to_vec(),
            measures: MeasureId::ALL.to_vec(),
            seed: 42,
            jobs: 0,
            completed: false,
            enum_cap: crate::optimizer::DEFAULT_ENUM_CAP,
            strict_paper_price: false,
            ear_unranked: EarUnranked::default(),
        }
    }
}

impl ExperimentConfig {
    fn price_mode(&self) -> PriceMode {
        if self.strict_paper_price {
            PriceMode::StrictPaper
        } else {
            PriceMode::Redirectable
        }
    }
}

/// Everything computed for one election.
#[derive(Debug, Clone, Serialize)]
pub struct ElectionResult {
    pub id: String,
    pub candidates: usize,
    pub seats: usize,
    pub voters: u64,
    /// Committee per rule label.
    pub rule_committees: BTreeMap<&'static str, Vec<usize>>,
    /// `values[rule][measure]` = alpha of the rule's committee.
    pub rule_values: BTreeMap<&'static str, BTreeMap<&'static str, Frac>>,
    /// Instance-optimal alpha per measure.
    pub optimal: BTreeMap<&'static str, Frac>,
    /// Whether each rule attains the optimum, per measure.
    pub achieves_optimal: BTreeMap<&'static str, BTreeMap<&'static str, bool>>,
    /// Distance from each rule's committee to the nearest optimal one.
    pub nearest_optimal_distance: BTreeMap<&'static str, BTreeMap<&'static str, u64>>,
    /// Committees-satisfying counts per measure, with the total.
    pub census_total: u64,
    pub census_satisfied: BTreeMap<&'static str, u64>,
    /// Share of singleton candidate sets among the constraints active at
    /// the PSC optimum (full candidate set excluded); None when no
    /// constraint is active.
    pub singleton_share: Option<f64>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Serialize)]
pub struct RunArtifacts {
    pub run_id: String,
    pub out_dir: PathBuf,
    pub results: Vec<ElectionResult>,
    pub errors: Vec<CorpusError>,
}

/// Evaluates one election against every rule and measure.
pub fn evaluate_election(e: &Election, id: &str, cfg: &ExperimentConfig) -> ElectionResult {
    let started = Instant::now();
    let mode = cfg.price_mode();
    let ctx = MeasureContext::new(e);
    let m = e.num_candidates();
    let k = e.seats();

    // all committees and their values, one pass
    let all: Vec<Committee> = committees(m, k)
        .map(|members| Committee::new(members, m).unwrap())
        .collect();
    let wants = |measure: MeasureId| cfg.measures.contains(&measure);
    let value_rows: Vec<[Frac; 4]> = all
        .par_iter()
        .map(|w| {
            [
                if wants(MeasureId::Psc) { ctx.psc_value(w).0 } else { Frac::zero() },
                if wants(MeasureId::EjrPlus) { ctx.ejr_plus_value(w).0 } else { Frac::zero() },
                if wants(MeasureId::LocalStability) {
                    ctx.local_stability_value(w).0
                } else {
                    Frac::zero()
                },
                if wants(MeasureId::Priceability) {
                    crate::measures::price::priceability_value(e, w, mode, PricePath::Auto).alpha
                } else {
                    Frac::zero()
                },
            ]
        })
        .collect();

    let measure_idx = |measure: MeasureId| {
        MeasureId::ALL.iter().position(|x| *x == measure).unwrap()
    };
    let optimal_value = |measure: MeasureId| {
        let i = measure_idx(measure);
        value_rows.iter().map(|row| row[i]).min().unwrap()
    };

    let mut rule_committees = BTreeMap::new();
    let mut rule_values: BTreeMap<&'static str, BTreeMap<&'static str, Frac>> = BTreeMap::new();
    let mut achieves: BTreeMap<&'static str, BTreeMap<&'static str, bool>> = BTreeMap::new();
    let mut nearest: BTreeMap<&'static str, BTreeMap<&'static str, u64>> = BTreeMap::new();
    for &rule in &cfg.rules {
        let (w, _) = match rule {
            RuleId::Ear => ear(e, TieBreakPolicy::Lexicographic, cfg.ear_unranked),
            _ => run_rule(e, rule, TieBreakPolicy::Lexicographic),
        };
        let row = all
            .iter()
            .position(|c| *c == w)
            .expect("rule committees are size-k subsets");
        rule_committees.insert(rule.label(), w.members().to_vec());
        let mut values = BTreeMap::new();
        let mut optimal_flags = BTreeMap::new();
        let mut distances = BTreeMap::new();
        for &measure in &cfg.measures {
            let i = measure_idx(measure);
            let value = value_rows[row][i];
            let best = optimal_value(measure);
            values.insert(measure.label(), value);
            optimal_flags.insert(measure.label(), value == best);
            let distance = all
                .iter()
                .zip(&value_rows)
                .filter(|(_, vals)| vals[i] == best)
                .map(|(c, _)| committee_distance(&w, c).unwrap())
                .min()
                .unwrap();
            distances.insert(measure.label(), distance);
        }
        rule_values.insert(rule.label(), values);
        achieves.insert(rule.label(), optimal_flags);
        nearest.insert(rule.label(), distances);
    }

    let one = Frac::new(1, 1);
    let mut census_satisfied = BTreeMap::new();
    for &measure in &cfg.measures {
        let i = measure_idx(measure);
        let count = value_rows.iter().filter(|row| row[i] < one).count() as u64;
        census_satisfied.insert(measure.label(), count);
    }
    let optimal: BTreeMap<&'static str, Frac> = cfg
        .measures
        .iter()
        .map(|&measure| (measure.label(), optimal_value(measure)))
        .collect();

    // the PSC descent supplies the active-constraint view of the optimum
    let singleton_share = wants(MeasureId::Psc)
        .then(|| optimal_psc(e))
        .and_then(Result::ok)
        .and_then(|report| {
        let full: Vec<usize> = (1..=m).collect();
        let active: Vec<_> = ctx
            .thresholds
            .iter()
            .filter(|t| t.threshold > report.alpha && t.candidates != full)
            .collect();
        if active.is_empty() {
            return None;
        }
        let singles = active.iter().filter(|t| t.candidates.len() == 1).count();
        Some(singles as f64 / active.len() as f64)
        });

    ElectionResult {
        id: id.to_string(),
        candidates: m,
        seats: k,
        voters: e.total_voters(),
        rule_committees,
        rule_values,
        optimal,
        achieves_optimal: achieves,
        nearest_optimal_distance: nearest,
        census_total: all.len() as u64,
        census_satisfied,
        singleton_share,
        elapsed_ms: started.elapsed().as_millis() as u64,
    }
}

/// Runs the experiment over every multiwinner election of the corpus and
/// writes tables plus a manifest under `out/<run-id>/`.
pub fn run_experiment(
    corpus_dir: &Path,
    index: &CorpusIndex,
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<RunArtifacts, String> {
    let run_id = {
        let mut hasher = Sha256::new();
        hasher.update(index.content_hash());
        hasher.update(serde_json::to_string(cfg).unwrap());
        hex(&hasher.finalize())[..12].to_string()
    };
    let out_dir = out.join(&run_id);
    let tables = out_dir.join("tables");
    fs::create_dir_all(&tables).map_err(|e| e.to_string())?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| e.to_string())?;

    let entries: Vec<_> = index.multiwinner().collect();
    let outcomes: Vec<Result<ElectionResult, CorpusError>> = pool.install(|| {
        entries
            .par_iter()
            .map(|entry| {
                let run = || -> Result<ElectionResult, String> {
                    let mut e = read_election(corpus_dir, entry)?;
                    if binomial(e.num_candidates(), e.seats()) > cfg.enum_cap as u128 {
                        return Err(format!(
                            "C({}, {}) exceeds the enumeration cap",
                            e.num_candidates(),
                            e.seats()
                        ));
                    }
                    if cfg.completed {
                        let completion = CompletionConfig {
                            cutoff: Frac::new(1, 10),
                            seed: derive_seed(cfg.seed, &entry.id),
                        };
                        e = complete_ballots(&e, &completion);
                    }
                    Ok(evaluate_election(&e, &entry.id, cfg))
                };
                run().map_err(|error| CorpusError {
                    id: entry.id.clone(),
                    error,
                })
            })
            .collect()
    });

    let mut results = Vec::new();
    let mut errors = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(result) => results.push(result),
            Err(error) => errors.push(error),
        }
    }
    results.sort_by(|a, b| a.id.cmp(&b.id));

    write_tables(&tables, &results, cfg).map_err(|e| e.to_string())?;
    let manifest = serde_json::json!({
        "run_id": run_id,
        "corpus_hash": index.content_hash(),
        "config": cfg,
        "elections_evaluated": results.len(),
        "elections_failed": errors.len(),
    });
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    fs::write(
        out_dir.join("errors.json"),
        serde_json::to_string_pretty(&errors).unwrap(),
    )
    .map_err(|e| e.to_string())?;

    Ok(RunArtifacts {
        run_id,
        out_dir,
        results,
        errors,
    })
}

/// Stable per-election completion seed.
pub fn derive_seed(master: u64, id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(id.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn write_tables(
    dir: &Path,
    results: &[ElectionResult],
    cfg: &ExperimentConfig,
) -> std::io::Result<()> {
    // census: for each axiom, elections whose satisfaction rate is strictly
    // below 25%, 50%, 100%
    let mut census = String::from("axiom,lt25,lt50,lt100,elections\n");
    for &measure in &cfg.measures {
        let mut lt = [0u64; 3];
        for r in results {
            let s = r.census_satisfied[measure.label()];
            let t = r.census_total;
            if 4 * s < t {
                lt[0] += 1;
            }
            if 2 * s < t {
                lt[1] += 1;
            }
            if s < t {
                lt[2] += 1;
            }
        }
        census.push_str(&format!(
            "{},{},{},{},{}\n",
            measure.label(),
            lt[0],
            lt[1],
            lt[2],
            results.len()
        ));
    }
    fs::write(dir.join("census.csv"), census)?;

    // pairwise disagreement counts and average distances
    let mut disagreement = String::from("rule_a,rule_b,disagreements,avg_distance\n");
    for (i, &a) in cfg.rules.iter().enumerate() {
        for &b in cfg.rules.iter().skip(i + 1) {
            let mut differing = 0u64;
            let mut total_distance = 0u64;
            for r in results {
                let ca = &r.rule_committees[a.label()];
                let cb = &r.rule_committees[b.label()];
                let d = half_symmetric_difference(ca, cb);
                if d > 0 {
                    differing += 1;
                }
                total_distance += d;
            }
            disagreement.push_str(&format!(
                "{},{},{},{:.2}\n",
                a.label(),
                b.label(),
                differing,
                total_distance as f64 / results.len().max(1) as f64
            ));
        }
    }
    fs::write(dir.join("disagreement.csv"), disagreement)?;

    // alignment with the optima
    let mut alignment = String::from("rule,measure,optimal_count,avg_nearest_distance\n");
    for &rule in &cfg.rules {
        for &measure in &cfg.measures {
            let mut count = 0u64;
            let mut total_distance = 0u64;
            for r in results {
                if r.achieves_optimal[rule.label()][measure.label()] {
                    count += 1;
                }
                total_distance += r.nearest_optimal_distance[rule.label()][measure.label()];
            }
            alignment.push_str(&format!(
                "{},{},{},{:.2}\n",
                rule.label(),
                measure.label(),
                count,
                total_distance as f64 / results.len().max(1) as f64
            ));
        }
    }
    fs::write(dir.join("alignment.csv"), alignment)?;

    // per-election values backing every figure; committee columns let the
    // pairwise plots restrict to genuine disagreements
    let mut values = String::from("id,m,k,n");
    for &measure in &cfg.measures {
        values.push_str(&format!(",opt_{}", measure.label()));
    }
    for &rule in &cfg.rules {
        for &measure in &cfg.measures {
            values.push_str(&format!(",{}_{}", rule.label(), measure.label()));
        }
    }
    for &rule in &cfg.rules {
        values.push_str(&format!(",{}_committee", rule.label()));
    }
    values.push('\n');
    for r in results {
        values.push_str(&format!("{},{},{},{}", r.id, r.candidates, r.seats, r.voters));
        for &measure in &cfg.measures {
            values.push_str(&format!(",{}", frac_csv(r.optimal[measure.label()])));
        }
        for &rule in &cfg.rules {
            for &measure in &cfg.measures {
                values.push_str(&format!(
                    ",{}",
                    frac_csv(r.rule_values[rule.label()][measure.label()])
                ));
            }
        }
        for &rule in &cfg.rules {
            let members: Vec<String> = r.rule_committees[rule.label()]
                .iter()
                .map(|c| c.to_string())
                .collect();
            values.push_str(&format!(",{}", members.join(" ")));
        }
        values.push('\n');
    }
    fs::write(dir.join("values.csv"), values)?;

    // headline statistics
    let singleton: Vec<f64> = results.iter().filter_map(|r| r.singleton_share).collect();
    let singleton_mean = if singleton.is_empty() {
        None
    } else {
        Some(singleton.iter().sum::<f64>() / singleton.len() as f64)
    };
    let one = Frac::new(1, 1);
    let seqrcv_psc_failures = results
        .iter()
        .filter(|r| {
            r.rule_values
                .get(RuleId::SeqRcv.label())
                .and_then(|v| v.get(MeasureId::Psc.label()))
                .is_some_and(|alpha| *alpha >= one)
        })
        .count();
    let summary = serde_json::json!({
        "elections": results.len(),
        "mean_singleton_constraint_share": singleton_mean,
        "seqrcv_psc_failures": seqrcv_psc_failures,
    });
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).unwrap(),
    )?;
    Ok(())
}

fn half_symmetric_difference(a: &[usize], b: &[usize]) -> u64 {
    let shared = a.iter().filter(|x| b.contains(x)).count();
    (a.len() - shared) as u64
}

/// Value cells carry nine decimals, enough to reconstruct every alpha that
/// occurs at corpus scale (denominators stay below n * k).
fn frac_csv(x: Frac) -> String {
    format!("{:.9}", x.to_f64().unwrap_or(f64::NAN))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
