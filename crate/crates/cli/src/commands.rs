//! Subcommand implementations. Each returns its artifacts; nothing here
//! touches the filesystem except through the run cache.

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use ctoe::bits::BitString;
use ctoe::enumerate::{consistent_set_sharded, CacheError, ConsistencyQuery, RunCache, RunTable};
use ctoe::mdl::model::{ModelExpr, ObservationModel, StreamSource};
use ctoe::mdl::score::{ctoe_score, localization_bits, partial_score, prob_score, select_ctoe, ScoreError};
use ctoe::mdl::streams::pi_bits;
use ctoe::predict::{
    all_targets, km_vs_logm_from_table, nfl_with_table, ockham_from_table, predict_from_table, NflConfig, PredictError,
    DEFAULT_MAX_ATTEMPTS,
};
use ctoe::utoe::{render_tribits, utoe_stream_par, write_snapshot, TriBit};

use crate::artifacts::Artifact;
use crate::config::{Command, Experiment, ExperimentConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("run cache: {0}")]
    Cache(#[from] CacheError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    match cfg.command {
        Command::Enumerate => enumerate(cfg),
        Command::Km => km(cfg),
        Command::Predict => predict(cfg),
        Command::UtoeStream => utoe(cfg),
        Command::Select => select(cfg),
        Command::MdlScore => mdl_score(cfg),
        Command::Experiment(Experiment::Ockham) => ockham(cfg),
        Command::Experiment(Experiment::Nfl) => nfl(cfg),
        Command::Experiment(Experiment::PiMdl) => pi_mdl(cfg),
        Command::Experiment(Experiment::KmVsM) => km_vs_m(cfg),
        Command::Experiment(Experiment::Localization) => localization(cfg),
    }
}

fn table(cfg: &ExperimentConfig) -> Result<RunTable, RunError> {
    match RunCache::from_env().filter(|_| cfg.cache) {
        Some(cache) => Ok(RunTable::build_cached(cfg.max_len, cfg.budget(), &cache)?),
        None => Ok(RunTable::build(cfg.max_len, cfg.budget())),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn query(cfg: &ExperimentConfig) -> ConsistencyQuery {
    ConsistencyQuery::new(cfg.target().clone(), cfg.max_len).with_budget(cfg.budget())
}

fn enumerate(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let set = consistent_set_sharded(&query(cfg), cfg.shards);
    let summary = json!({
        "target": cfg.target(),
        "max_len": cfg.max_len,
        "count": set.count,
        "undecided": set.undecided,
        "q_min": set.q_min,
        "l": set.l,
        "garbage_bound": set.garbage_bound(cfg.max_len),
        "members_sample": set.members_sample,
    });
    let rows = set
        .members_sample
        .iter()
        .map(|p| vec![p.to_string(), p.len().to_string(), p.disassemble()]);
    Ok(vec![
        Artifact::json("enumerate.json", &summary),
        Artifact::csv("members_sample.csv", &["program", "length", "disassembly"], rows),
    ])
}

fn km(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let set = consistent_set_sharded(&query(cfg), cfg.shards);
    let summary = json!({
        "target": cfg.target(),
        "max_len": cfg.max_len,
        "l": set.l,
        "q_min": set.q_min,
        "count": set.count,
    });
    Ok(vec![Artifact::json("km.json", &summary)])
}

fn predict(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let table = table(cfg)?;
    let report = predict_from_table(&table, cfg.target(), cfg.horizon)?;
    let ockham = ockham_from_table(&table, cfg.target(), cfg.horizon)?;
    let rows = report.continuations.iter().map(|c| {
        vec![
            c.bits.to_string(),
            c.count.to_string(),
            c.probability.to_string(),
            opt(c.l_n),
        ]
    });
    let csv = Artifact::csv("predict.csv", &["continuation", "count", "probability", "l_n"], rows);
    Ok(vec![
        csv,
        Artifact::json("predict.json", &json!({ "prediction": report, "ockham": ockham })),
    ])
}

fn utoe(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let cells = utoe_stream_par(cfg.cells, cfg.budget());
    let mut text = render_tribits(&cells);
    text.push('\n');
    let mut snapshot = Vec::new();
    write_snapshot(&mut snapshot, cfg.budget(), &cells)?;
    let count = |v: TriBit| cells.iter().filter(|&&c| c == v).count();
    let summary = json!({
        "cells": cfg.cells,
        "zeros": count(TriBit::Zero),
        "ones": count(TriBit::One),
        "undefined": count(TriBit::Undefined),
        "max_steps": cfg.steps,
        "max_output_bits": cfg.output_bits,
    });
    Ok(vec![
        Artifact::raw("stream.txt", text.into_bytes()),
        Artifact::raw("stream.snapshot", snapshot),
        Artifact::json("utoe.json", &summary),
    ])
}

fn select(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let o = cfg.target();
    let budget = cfg.budget();
    let rows: Vec<Vec<String>> = cfg
        .parsed_pairs
        .iter()
        .map(|(q, s)| {
            let perfect = ctoe_score(q, s, o, budget);
            let partial = partial_score(q, s, o, budget);
            vec![
                q.to_string(),
                s.to_string(),
                perfect.as_ref().map_or_else(|_| String::new(), |t| t.to_string()),
                partial.report.total.to_string(),
                partial.table.positions.len().to_string(),
                perfect.err().map_or_else(String::new, |e| e.to_string()),
            ]
        })
        .collect();
    let best = select_ctoe(&cfg.parsed_pairs, o, budget)?;
    Ok(vec![
        Artifact::csv(
            "select.csv",
            &["q", "s", "ctoe_total", "partial_total", "errors", "reason"],
            rows,
        ),
        Artifact::json("select.json", &json!({ "target": o, "best": best })),
    ])
}

#[derive(Serialize)]
struct ScoreRow<'a> {
    model: &'a str,
    admissible: bool,
    model_bits: u64,
    observer_bits: u64,
    noise_bits: Option<f64>,
    total: Option<f64>,
}

fn mdl_score(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let o = cfg.target();
    let mut rows = Vec::new();
    for (spec, model) in cfg.models.iter().zip(&cfg.parsed_models) {
        let row = match prob_score(model, &cfg.parsed_observer, o, cfg.budget()) {
            Ok(r) => ScoreRow {
                model: spec,
                admissible: true,
                model_bits: r.model_bits,
                observer_bits: r.observer_bits,
                noise_bits: Some(r.noise_bits),
                total: Some(r.total),
            },
            Err(ScoreError::Inadmissible) => ScoreRow {
                model: spec,
                admissible: false,
                model_bits: model.code_length(),
                observer_bits: cfg.parsed_observer.code_length(),
                noise_bits: None,
                total: None,
            },
            Err(e) => return Err(e.into()),
        };
        rows.push(row);
    }
    // First model with the smallest total.
    let best = rows
        .iter()
        .filter_map(|r| r.total.map(|t| (t, r.model)))
        .fold(None::<(f64, &str)>, |acc, (t, m)| match acc {
            Some((bt, _)) if bt <= t => acc,
            _ => Some((t, m)),
        })
        .map(|(_, m)| m);
    let csv_rows = rows.iter().map(|r| {
        vec![
            r.model.to_string(),
            r.admissible.to_string(),
            r.model_bits.to_string(),
            r.observer_bits.to_string(),
            opt(r.noise_bits),
            opt(r.total),
        ]
    });
    Ok(vec![
        Artifact::csv(
            "mdl.csv",
            &["model", "admissible", "model_bits", "observer_bits", "noise_bits", "total"],
            csv_rows,
        ),
        Artifact::json(
            "mdl.json",
            &json!({ "target": o, "observer": cfg.observer, "scores": rows, "best": best }),
        ),
    ])
}

fn ockham(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let table = table(cfg)?;
    let mut rows = Vec::new();
    let (mut cases, mut agree, mut truncated, mut empty) = (0u64, 0u64, 0u64, 0u64);
    for target in all_targets(cfg.max_target_len) {
        match ockham_from_table(&table, &target, cfg.horizon) {
            Ok(r) => {
                cases += 1;
                agree += u64::from(r.agrees);
                truncated += u64::from(r.truncated);
                rows.push(vec![
                    target.to_string(),
                    r.q_min.to_string(),
                    r.continuation.to_string(),
                    r.truncated.to_string(),
                    opt(r.argmax),
                    r.agrees.to_string(),
                ]);
            }
            Err(PredictError::EmptyConditioningSet { .. }) => empty += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let summary = json!({
        "max_len": cfg.max_len,
        "horizon": cfg.horizon,
        "cases": cases,
        "agree": agree,
        "truncated": truncated,
        "empty_conditioning_sets": empty,
        "agreement_fraction": if cases > 0 { agree as f64 / cases as f64 } else { 0.0 },
    });
    Ok(vec![
        Artifact::csv(
            "ockham.csv",
            &["target", "q_min", "continuation", "truncated", "argmax", "agrees"],
            rows,
        ),
        Artifact::json("ockham.json", &summary),
    ])
}

fn nfl(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let nfl_cfg = NflConfig {
        max_len: cfg.max_len,
        t: cfg.t,
        n: cfg.n,
        trials: cfg.trials,
        seed: cfg.seed,
        max_attempts: DEFAULT_MAX_ATTEMPTS,
    };
    let report = nfl_with_table(&nfl_cfg, &table(cfg)?)?;
    let rows = [("uniform", report.uniform), ("universal", report.universal)]
        .into_iter()
        .map(|(name, s)| {
            vec![
                name.to_string(),
                s.trials.to_string(),
                s.predictor_correct.to_string(),
                s.predictor_accuracy.to_string(),
                s.predictor_se.to_string(),
                s.baseline_correct.to_string(),
                s.baseline_accuracy.to_string(),
                s.baseline_se.to_string(),
                s.discarded.to_string(),
            ]
        });
    Ok(vec![
        Artifact::csv(
            "nfl.csv",
            &[
                "regime",
                "trials",
                "predictor_correct",
                "predictor_accuracy",
                "predictor_se",
                "baseline_correct",
                "baseline_accuracy",
                "baseline_se",
                "discarded",
            ],
            rows,
        ),
        Artifact::json("nfl.json", &report),
    ])
}

fn pi_mdl(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let coin = ModelExpr::Coin;
    let pi = ModelExpr::DetStream(StreamSource::PiBits);
    let n = cfg.cells as usize;
    let o: BitString = pi_bits(n);
    let identity = ObservationModel::Identity;
    let mut rows = Vec::new();
    for t in 1..=n {
        let c = prob_score(&coin, &identity, &o[..t], cfg.budget())?.total;
        let p = prob_score(&pi, &identity, &o[..t], cfg.budget())?.total;
        let winner = match p.total_cmp(&c) {
            std::cmp::Ordering::Less => "pi",
            std::cmp::Ordering::Greater => "coin",
            std::cmp::Ordering::Equal => "tie",
        };
        rows.push(vec![t.to_string(), c.to_string(), p.to_string(), winner.to_string()]);
    }
    let summary = json!({
        "coin_bits": coin.code_length(),
        "pi_bits": pi.code_length(),
        "crossover_t": pi.code_length() - coin.code_length(),
        "observations": o,
    });
    Ok(vec![
        Artifact::csv("pi_mdl.csv", &["t", "coin_total", "pi_total", "winner"], rows),
        Artifact::json("pi_mdl.json", &summary),
    ])
}

fn km_vs_m(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let table = table(cfg)?;
    let rows = km_vs_logm_from_table(&table, &all_targets(cfg.max_target_len));
    let csv_rows = rows.iter().map(|r| {
        vec![
            r.target.to_string(),
            r.count.to_string(),
            opt(r.km),
            opt(r.neg_log2_p),
            opt(r.gap),
        ]
    });
    Ok(vec![
        Artifact::csv("km_vs_m.csv", &["target", "count", "km", "neg_log2_p", "gap"], csv_rows),
        Artifact::json("km_vs_m.json", &json!({ "max_len": cfg.max_len, "rows": rows })),
    ])
}

fn localization(cfg: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let rows = cfg
        .locations
        .iter()
        .map(|&n| Ok(vec![n.to_string(), localization_bits(n)?.to_string()]))
        .collect::<Result<Vec<_>, ScoreError>>()?;
    Ok(vec![Artifact::csv("localization.csv", &["locations", "bits"], rows)])
}
