//! Print every statistic the benchmark suite checks, for one seed of the
//! simulated release. Handy when retuning `SimParams`.

use std::collections::BTreeSet;
use std::time::Instant;

use shears::acceptability::Scorer;
use shears::colloc::build_offset_stats;
use shears::corpus::{self, Split, TreeIndex};
use shears::features::FeatureConfig;
use shears::lm::{train_ngram, LmBundle};
use shears::metrics::{self, RatingTable};
use shears::model;
use shears::pipeline::{self, FeatureVariant};
use shears::synth::{self, SimParams};

fn main() {
    let t0 = Instant::now();
    let params = SimParams::default();
    let seed = 20_260_810u64;

    let corpus_toks = synth::lm_corpus(&params, seed);
    let lm = LmBundle::from_model(train_ngram(&corpus_toks, 3).unwrap());
    let stats = build_offset_stats(&corpus_toks, 4).unwrap();
    println!("[{:>6.1?}] lm + colloc ready", t0.elapsed());

    let single = synth::generate_single_prune(&params, seed + 1, &lm, &stats).unwrap();
    let trees = TreeIndex::from_trees(single.treebank.clone());
    println!("[{:>6.1?}] single-prune release ready", t0.elapsed());

    let report = corpus::verify_split(&single.judgments).unwrap();
    println!(
        "counts: train {} test {} | pairs {}/{} | balance no/yes {:.3}/{:.3} | covered {}",
        report.train_judgments,
        report.test_judgments,
        report.train_pairs,
        report.test_pairs,
        report.balance_overall.no,
        report.balance_overall.yes,
        report.test_workers_covered
    );

    let cstats = corpus::corpus_statistics(&single.judgments, &trees).unwrap();
    println!(
        "compression rate: mean {:.3} std {:.3} (targets 0.867 / 0.174)",
        cstats.rate_mean, cstats.rate_std
    );

    let all_table = RatingTable::from_pairs(
        single
            .judgments
            .iter()
            .map(|r| (r.pair_id.clone(), r.label)),
    );
    let kappa = metrics::fleiss_kappa(&all_table).unwrap();
    let test_table = RatingTable::from_pairs(
        single
            .judgments
            .iter()
            .filter(|r| r.split == Split::Test)
            .map(|r| (r.pair_id.clone(), r.label)),
    );
    let ww = metrics::worker_worker_agreement(&test_table).unwrap();
    println!("fleiss kappa {kappa:.3} (target 0.294) | test agreement {ww:.3} (target 0.636)");

    for dep in ["mwe", "cop", "cc:preconj", "nmod:tmod"] {
        let r = &cstats.per_deprel.get(dep);
        match r {
            Some(r) => println!("  dep {dep}: rate {:.3} (n={})", r.rate, r.total),
            None => println!("  dep {dep}: MISSING"),
        }
    }
    let worker_rows: Vec<(String, u8)> = single
        .judgments
        .iter()
        .map(|r| (r.worker_id.clone(), r.label))
        .collect();
    let wr = metrics::worker_rate_distribution(&worker_rows);
    println!(
        "worker rates: mean {:.3} std {:.3} (targets 0.402 / 0.216)",
        wr.mean, wr.std
    );

    // Intrinsic models.
    let cfg = FeatureConfig::default();
    let train_recs: Vec<_> = single
        .judgments
        .iter()
        .filter(|r| r.split == Split::Train)
        .cloned()
        .collect();
    let test_recs: Vec<_> = single
        .judgments
        .iter()
        .filter(|r| r.split == Split::Test)
        .cloned()
        .collect();
    let train_x = pipeline::judgment_features(&train_recs, &trees, &lm, &stats, &cfg).unwrap();
    let test_x = pipeline::judgment_features(&test_recs, &trees, &lm, &stats, &cfg).unwrap();
    println!("[{:>6.1?}] features ready", t0.elapsed());

    let mut full_model = None;
    for variant in [
        FeatureVariant::LmOnly,
        FeatureVariant::LmDependencies,
        FeatureVariant::LmDependenciesWorker,
        FeatureVariant::NoDependencies,
        FeatureVariant::NoWorker,
        FeatureVariant::Full,
    ] {
        let m = pipeline::train_variant(&train_x, variant, model::DEFAULT_C).unwrap();
        let scored: Vec<_> = test_x
            .iter()
            .zip(&test_recs)
            .map(|((pid, v, y), rec)| metrics::ScoredJudgment {
                pair_id: pid.clone(),
                worker_id: rec.worker_id.clone(),
                label: *y,
                probability: m.predict(&variant.filter(v)),
            })
            .collect();
        let auc = metrics::roc_auc(&scored).unwrap();
        let acc = metrics::accuracy(&scored, 0.5).unwrap();
        let mk = metrics::model_as_rater_kappa(&scored, 0.5).unwrap();
        println!(
            "variant {:<24} auc {auc:.3} acc {acc:.3} kappa {mk:.3}",
            variant.label()
        );
        if variant == FeatureVariant::Full {
            full_model = Some(m);
        }
    }
    println!("[{:>6.1?}] intrinsic models done", t0.elapsed());

    // Multi-prune evaluation.
    let full_model = full_model.unwrap();
    let scorer = Scorer::new(&full_model, &lm, &stats, &cfg);
    let multi = synth::generate_multi_prune(
        &params,
        seed + 2,
        &scorer,
        &lm,
        &stats,
        &single.workers,
        single.latent_delta_stats,
    )
    .unwrap();
    let multi_trees = TreeIndex::from_trees(multi.treebank.clone());
    println!(
        "[{:>6.1?}] multi release: {} judgments over {} compressions",
        t0.elapsed(),
        multi.judgments.len(),
        multi_trees.len()
    );
    let fns = pipeline::score_chain_functions(&multi.judgments, &multi_trees, &scorer).unwrap();
    let auc_a = metrics::roc_auc(&fns.a).unwrap();
    let auc_min = metrics::roc_auc(&fns.a_min).unwrap();
    let auc_m = metrics::roc_auc(&fns.a_m).unwrap();
    let auc_lm = metrics::roc_auc(&fns.a_lm).unwrap();
    let boot = metrics::bootstrap_auc_delta(&fns.a, &fns.a_lm, 2000, seed + 3).unwrap();
    println!(
        "chain functions: A {auc_a:.3} A_min {auc_min:.3} A_M {auc_m:.3} A_LM {auc_lm:.3} (p A vs A_LM = {:.4})",
        boot.p_value
    );
    let multi_kappa = metrics::fleiss_kappa(&RatingTable::from_pairs(
        multi
            .judgments
            .iter()
            .map(|r| (r.pair_id.clone(), r.label)),
    ));
    println!("multi kappa: {multi_kappa:?}");

    // Gold reachability.
    let gold = synth::generate_gold(&params, seed + 4).unwrap();
    let gold_trees = TreeIndex::from_trees(gold.treebank.clone());
    let reach = corpus::reachability_report(&gold.gold, &gold_trees).unwrap();
    println!(
        "gold reachability: {:.3} ({} of {}, {} alignment failures)",
        reach.fraction, reach.reachable, reach.total, reach.alignment_failures
    );

    // A quick sanity check that the sampled pool behaves.
    let lens: Vec<usize> = single
        .treebank
        .iter()
        .take(200)
        .map(|t| t.len())
        .collect();
    let mean_len = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
    let seen: BTreeSet<String> = single
        .treebank
        .iter()
        .flat_map(|t| t.tokens().iter().map(|tok| tok.deprel.clone()))
        .collect();
    println!(
        "[{:>6.1?}] sentence mean tokens {mean_len:.1}; {} deprel types",
        t0.elapsed(),
        seen.len()
    );
}
