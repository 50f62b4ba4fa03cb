//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints exactly one PASS/FAIL line, whatever the outcome of the
//! others; the process fails if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::Rng as _;

use metades::bpso::{optimize, oracle_distance, transfer_s, transfer_v, BpsoConfig, MaskObjective, OracleFitness};
use metades::dataset::{generate_p2, Dataset, ScaleParams};
use metades::des::{majority_vote, weighted_vote, Baselines, DesModel, DesParams, Method};
use metades::experiment::{run_experiment, ExperimentConfig, RunReport};
use metades::features::{
    ambiguity, build_meta_dataset, entropy, exp_support, kl_from_uniform, log_support, FeatureMask, MetaDataset,
    MetaFeatureVector, MetaLayout, ReferenceSet, RrcConfig,
};
use metades::pool::{bagging, ClassifierPool, PerceptronConfig, PoolConfig};
use metades::region::{output_profile, profile_neighborhood, region_of};
use metades::rng::derived_rng;
use metades::selector::{MetaClassifier, MetaClassifierConfig};

type Outcome = Result<String, String>;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn ensure(ok: bool, detail: impl Into<String>) -> Outcome {
    let detail = detail.into();
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mean_of(report: &RunReport, method: Method) -> f64 {
    report
        .summary
        .iter()
        .find(|s| s.method == method)
        .and_then(|s| s.mean)
        .unwrap_or(f64::NAN)
}

/// Oracle accuracy is at least every method's accuracy in every completed
/// replication.
fn oracle_dominates(report: &RunReport) -> bool {
    let Some(col) = report.methods.iter().position(|&m| m == Method::Oracle) else {
        return false;
    };
    report.replications.iter().all(|r| {
        let oracle = r.accuracies[col].expect("replication completed");
        r.accuracies.iter().all(|a| a.is_some_and(|a| a <= oracle))
    })
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

// ---------------------------------------------------------------------------
// 1: P2 with a five-member pool

fn p2_run(replications: usize, bpso_runs: usize) -> RunReport {
    let mut config = ExperimentConfig::load(manifest_dir().join("configs/p2.toml")).unwrap();
    config.replications = replications;
    config.bpso.runs = bpso_runs;
    config.methods = all_methods();
    config.output_dir = None;
    run_experiment(&config).unwrap()
}

fn criterion_1(reports: &mut Vec<RunReport>) -> Outcome {
    let report = p2_run(1, 10);
    assert!(
        report.replications[0].error.is_none(),
        "{:?}",
        report.replications[0].error
    );
    let oracle = mean_of(&report, Method::Oracle);
    let single = mean_of(&report, Method::SingleBest);
    let des = mean_of(&report, Method::MetaDesOracle);
    let mv = mean_of(&report, Method::MajorityVote);
    let parts = [
        ("a oracle>=0.99", oracle >= 0.99),
        ("b single-best in [0.48,0.60]", (0.48..=0.60).contains(&single)),
        ("c META-DES.Oracle>=0.93", des >= 0.93),
        ("d META-DES.Oracle-majority>=0.10", des - mv >= 0.10),
    ];
    let failed: Vec<&str> = parts.iter().filter(|p| !p.1).map(|p| p.0).collect();
    let mut detail = format!(
        "seed 20261016: oracle {oracle:.4}, single best {single:.4}, META-DES.Oracle {des:.4}, majority {mv:.4}"
    );
    if !failed.is_empty() {
        detail.push_str(&format!("; failed: {}", failed.join(", ")));
    }

    // Spread over more replications, reported but not judged.
    let spread = p2_run(5, 3);
    let per_rep: Vec<String> = spread
        .replications
        .iter()
        .map(|r| {
            let a = &r.accuracies;
            let at = |m: Method| a[spread.methods.iter().position(|&x| x == m).unwrap()].unwrap_or(f64::NAN);
            format!(
                "({:.3}/{:.3}/{:.3})",
                at(Method::Oracle),
                at(Method::SingleBest),
                at(Method::MetaDesOracle)
            )
        })
        .collect();
    println!(
        "  info: 5 replications, oracle/single-best/META-DES.Oracle: {}",
        per_rep.join(" ")
    );
    reports.push(report);
    reports.push(spread);
    ensure(failed.is_empty(), detail)
}

// ---------------------------------------------------------------------------
// 2: meta-feature vector length

fn small_pool(seed: u64, size: usize) -> (ClassifierPool, Dataset) {
    let scale = ScaleParams::fit(&generate_p2(200, seed));
    let train = scale.transform(&generate_p2(200, seed)).unwrap();
    let pool = bagging(
        &train,
        &PoolConfig {
            size,
            ..Default::default()
        },
        seed,
    )
    .unwrap();
    (pool, scale.transform(&generate_p2(120, seed + 1)).unwrap())
}

fn criterion_2() -> Outcome {
    let (pool, dsel) = small_pool(5, 5);
    let reference = ReferenceSet::build(
        &pool,
        dsel,
        &RrcConfig {
            samples: 20,
            ..Default::default()
        },
    )
    .unwrap();
    let samples = generate_p2(6, 77);
    let scaled = ScaleParams::fit(&generate_p2(200, 5)).transform(&samples).unwrap();
    let ids: Vec<usize> = (0..scaled.len()).collect();
    let default = build_meta_dataset(&pool, &reference, MetaLayout::new(7, 5), &scaled, &ids, None).unwrap();
    let mut ok = default.rows.iter().all(|r| r.values.len() == 67);
    let mut rng = derived_rng(2, "acceptance-layout", 0);
    for _ in 0..20 {
        let (k, kp) = (rng.random_range(1..=40), rng.random_range(1..=40));
        let meta = build_meta_dataset(&pool, &reference, MetaLayout::new(k, kp), &scaled, &ids, None).unwrap();
        ok &= meta.len() == scaled.len() * pool.len();
        ok &= meta.rows.iter().all(|r| r.values.len() == k * 8 + kp + 6);
        ok &= MetaLayout::new(k, kp).len() == k * 8 + kp + 6;
    }
    ensure(ok, "length 67 at K=7, Kp=5 and 8K+Kp+6 for 20 random (K, Kp)")
}

// ---------------------------------------------------------------------------
// 3: transfer functions

fn criterion_3() -> Outcome {
    let mut ok = transfer_s(0.0) == 0.5 && transfer_v(0.0) == 0.0;
    let grid: Vec<f64> = (-20_000..=20_000).map(|i| i as f64 * 1e-3).collect();
    // Increments of the S curve fall below one ulp past |v| ~ 15 (and it
    // rounds to 1 past ~18.4), so the full grid is checked to the tolerance
    // and the clamped velocity range (|v| <= 6) strictly.
    for w in grid.windows(2) {
        ok &= transfer_s(w[1]) - transfer_s(w[0]) >= -1e-12;
        if w[0] >= 0.0 {
            ok &= transfer_v(w[1]) - transfer_v(w[0]) >= -1e-12;
        }
        if w[0].abs() <= 6.0 && w[1].abs() <= 6.0 {
            ok &= transfer_s(w[1]) > transfer_s(w[0]);
            if w[0] >= 0.0 {
                ok &= transfer_v(w[1]) > transfer_v(w[0]);
            }
        }
    }
    for &v in &grid {
        ok &= (transfer_s(v) + transfer_s(-v) - 1.0).abs() <= 1e-12;
        ok &= (transfer_v(v) - transfer_v(-v)).abs() <= 1e-12;
        ok &= (0.0..=1.0).contains(&transfer_v(v)) && (0.0..=1.0).contains(&transfer_s(v));
    }
    ensure(
        ok,
        "T_S(0)=0.5, T_V(0)=0; monotone and symmetric on 40001 points in [-20, 20]",
    )
}

// ---------------------------------------------------------------------------
// 4: Oracle fitness of the Oracle itself

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for seed in 0..5 {
        let (pool, dsel) = small_pool(seed, 7);
        let reference = ReferenceSet::build(
            &pool,
            dsel,
            &RrcConfig {
                samples: 20,
                ..Default::default()
            },
        )
        .unwrap();
        let samples = ScaleParams::fit(&generate_p2(200, seed))
            .transform(&generate_p2(60, seed + 9))
            .unwrap();
        let ids: Vec<usize> = (0..samples.len()).collect();
        let meta = build_meta_dataset(&pool, &reference, MetaLayout::default(), &samples, &ids, None).unwrap();
        let labels: Vec<bool> = meta.rows.iter().map(|r| r.meta_label).collect();
        let oracle: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l))).collect();
        worst = worst.max(oracle_distance(&oracle, &labels));
        rows += meta.len();
    }
    ensure(
        worst == 0.0,
        format!("max distance {worst} over {rows} meta-rows from 5 meta-datasets"),
    )
}

// ---------------------------------------------------------------------------
// 5: BPSO against exhaustive search on four meta-features

fn toy_meta(n_samples: usize, seed: u64, tag: &str) -> MetaDataset {
    let mut rng = derived_rng(seed, tag, 0);
    let rows = (0..n_samples)
        .map(|id| {
            let values: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let margin = values[0] + values[1] - 1.0 + 0.15 * (rng.random::<f64>() - 0.5);
            MetaFeatureVector {
                meta_label: margin > 0.0,
                values,
                classifier_index: 0,
                sample_id: id,
            }
        })
        .collect();
    MetaDataset {
        layout: MetaLayout::new(1, 1),
        rows,
    }
}

fn all_masks(dim: usize) -> Vec<FeatureMask> {
    (1..1u32 << dim)
        .map(|m| FeatureMask::from_bits((0..dim).map(|i| m >> i & 1 == 1).collect()))
        .collect()
}

fn criterion_5() -> Outcome {
    let mut matches = 0;
    let mut audit_ok = true;
    for seed in 0..20 {
        let objective = OracleFitness::new(
            toy_meta(150, seed, "toy-train"),
            toy_meta(150, seed, "toy-opt"),
            toy_meta(150, seed, "toy-val"),
            MetaClassifierConfig::default(),
        );
        assert_eq!(objective.dim(), 4);
        let exhaustive: Vec<(FeatureMask, f64)> = all_masks(4)
            .into_iter()
            .map(|m| (m.clone(), objective.validation(&m)))
            .collect();
        let best = exhaustive.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        let optimal: Vec<&FeatureMask> = exhaustive.iter().filter(|e| e.1 == best).map(|e| &e.0).collect();
        let result = optimize(
            &objective,
            &BpsoConfig {
                seed,
                ..Default::default()
            },
        );
        if optimal.contains(&&result.archive.best_mask) {
            matches += 1;
        }
        audit_ok &= result
            .validations
            .iter()
            .all(|v| result.archive.validation_fitness <= v.fitness);
        audit_ok &= !result.validations.is_empty();
    }
    ensure(
        matches >= 18 && audit_ok,
        format!("{matches}/20 archives equal the exhaustive optimum; archive <= every validation: {audit_ok}"),
    )
}

// ---------------------------------------------------------------------------
// 6: analytic identities of the meta-features

fn criterion_6() -> Outcome {
    let tol = 1e-9;
    let mut ok = true;
    for l in 2..=10usize {
        let u = 1.0 / l as f64;
        ok &= log_support(u, l).abs() <= tol;
        ok &= exp_support(0.0, l).abs() <= tol;
        ok &= (exp_support(u, l) - 0.5).abs() <= tol;
        ok &= kl_from_uniform(&vec![u; l]).abs() <= tol;
        for hot in 0..l {
            let mut v = vec![0.0; l];
            v[hot] = 1.0;
            ok &= entropy(&v).abs() <= tol;
        }
    }
    let amb = ambiguity(&[0.65, 0.30, 0.05]);
    ok &= (amb - 0.35).abs() <= tol;
    ensure(
        ok,
        format!("L = 2..10 identities hold; ambiguity(0.65, 0.30, 0.05) = {amb}"),
    )
}

// ---------------------------------------------------------------------------
// 7: Oracle dominance

fn random_dataset(rng: &mut metades::rng::Rng, n: usize, dim: usize, classes: usize) -> Dataset {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    // Every class appears at least once.
    let labels: Vec<usize> = (0..n)
        .map(|i| if i < classes { i } else { rng.random_range(0..classes) })
        .collect();
    Dataset::new(rows, labels, (0..classes).map(|c| format!("c{c}")).collect()).unwrap()
}

struct Instance {
    pool: ClassifierPool,
    reference: ReferenceSet,
    test: Dataset,
    k: usize,
    kp: usize,
}

fn random_instance(seed: u64) -> Instance {
    let mut rng = derived_rng(seed, "acceptance-instance", 0);
    let classes = rng.random_range(2..=4);
    let dim = rng.random_range(1..=4);
    let train = random_dataset(&mut rng, 40, dim, classes);
    let dsel_size = rng.random_range(12..=30);
    let dsel = random_dataset(&mut rng, dsel_size, dim, classes);
    let test = random_dataset(&mut rng, 15, dim, classes);
    let config = PoolConfig {
        size: rng.random_range(1..=7),
        bootstrap_frac: 1.0,
        perceptron: PerceptronConfig {
            epochs: 20,
            learning_rate: 0.1,
        },
    };
    let pool = bagging(&train, &config, seed).unwrap();
    let reference = ReferenceSet::build(
        &pool,
        dsel,
        &RrcConfig {
            samples: 10,
            ..Default::default()
        },
    )
    .unwrap();
    let k = rng.random_range(1..=reference.len().min(9));
    let kp = rng.random_range(1..=reference.len().min(9));
    Instance {
        pool,
        reference,
        test,
        k,
        kp,
    }
}

fn criterion_7(reports: &[RunReport]) -> Outcome {
    let mut samples = 0;
    let mut violations = 0;
    for seed in 0..100 {
        let inst = random_instance(seed);
        let mut rng = derived_rng(seed, "acceptance-selector", 0);
        let params = DesParams {
            k: inst.k,
            kp: inst.kp,
            selection_threshold: rng.random(),
            ..Default::default()
        };
        let layout = params.layout();
        let mut mask = FeatureMask::from_bits((0..layout.len()).map(|_| rng.random_bool(0.5)).collect());
        mask.set(0, true);
        let weights: Vec<f64> = (0..mask.count_ones()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let selector = MetaClassifier::from_parts(weights, rng.random_range(-1.0..1.0), &mask);
        let scale = ScaleParams::fit(inst.reference.data());
        let model = DesModel::new(inst.pool.clone(), selector, mask, scale, inst.reference.clone(), params).unwrap();
        let baselines = Baselines::new(&inst.pool, &inst.reference, inst.k).unwrap();
        for j in 0..inst.test.len() {
            let x = inst.test.row(j);
            let truth = inst.test.label(j);
            let oracle_hit = inst.pool.labels(x).contains(&truth);
            let mut predictions = vec![model.classify_scaled(x).unwrap().label];
            for m in Method::ALL.into_iter().filter(|m| m.is_baseline()) {
                predictions.push(baselines.predict(m, x).unwrap());
            }
            samples += 1;
            if !oracle_hit && predictions.contains(&truth) {
                violations += 1;
            }
        }
    }
    let runs_ok = reports.iter().all(oracle_dominates);
    let replications: usize = reports.iter().map(|r| r.replications.len()).sum();
    ensure(
        violations == 0 && runs_ok,
        format!(
            "{violations} per-sample violations over {samples} samples of 100 random instances; \
             oracle >= every method in all {replications} experiment replications: {runs_ok}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 8: brute-force equivalences

fn brute_knn(x: &[f64], points: &[Vec<f64>], k: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum(), i))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|p| p.1).collect()
}

fn brute_vote(labels: &[usize], weights: &[f64], classes: usize) -> usize {
    let mut candidates: Vec<(f64, usize)> = (0..classes)
        .filter(|c| labels.contains(c))
        .map(|c| {
            (
                labels
                    .iter()
                    .zip(weights)
                    .filter(|(l, _)| **l == c)
                    .map(|(_, w)| w)
                    .sum(),
                c,
            )
        })
        .collect();
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    candidates[0].1
}

fn first_argmax(values: &[f64]) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v == best).unwrap()
}

/// Baseline labels recomputed from the raw pool and DSEL.
fn brute_baseline(method: Method, inst: &Instance, x: &[f64]) -> usize {
    let data = inst.reference.data();
    let rows: Vec<Vec<f64>> = data.rows().map(<[f64]>::to_vec).collect();
    let members = inst.pool.members();
    let labels: Vec<usize> = members.iter().map(|c| c.label(x)).collect();
    let l = inst.pool.class_count();
    let hood = brute_knn(x, &rows, inst.k);
    let correct = |i: usize, j: usize| members[i].label(&rows[j]) == data.label(j);
    let hits: Vec<f64> = (0..members.len())
        .map(|i| hood.iter().filter(|&&j| correct(i, j)).count() as f64)
        .collect();
    let ones = vec![1.0; labels.len()];
    match method {
        Method::Ola => labels[first_argmax(&hits)],
        Method::Lca => {
            let scores: Vec<f64> = (0..members.len())
                .map(|i| {
                    let same: Vec<usize> = hood.iter().copied().filter(|&j| data.label(j) == labels[i]).collect();
                    if same.is_empty() {
                        0.0
                    } else {
                        same.iter().filter(|&&j| correct(i, j)).count() as f64 / same.len() as f64
                    }
                })
                .collect();
            labels[first_argmax(&scores)]
        }
        Method::KnoraE => {
            for size in (1..=inst.k).rev() {
                let oracles: Vec<usize> = (0..members.len())
                    .filter(|&i| hood[..size].iter().all(|&j| correct(i, j)))
                    .collect();
                if !oracles.is_empty() {
                    let votes: Vec<usize> = oracles.iter().map(|&i| labels[i]).collect();
                    return brute_vote(&votes, &vec![1.0; votes.len()], l);
                }
            }
            brute_vote(&labels, &ones, l)
        }
        Method::KnoraU => {
            if hits.iter().all(|&h| h == 0.0) {
                brute_vote(&labels, &ones, l)
            } else {
                brute_vote(&labels, &hits, l)
            }
        }
        _ => unreachable!(),
    }
}

fn criterion_8() -> Outcome {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut tally = |name: &'static str, ok: bool| {
        let e = counts.entry(name).or_default();
        e.0 += usize::from(ok);
        e.1 += 1;
    };
    for seed in 0..200 {
        let inst = random_instance(1000 + seed);
        let rows: Vec<Vec<f64>> = inst.reference.data().rows().map(<[f64]>::to_vec).collect();
        let x = inst.test.row(0);

        let region = region_of(x, inst.reference.data(), inst.k, None).unwrap();
        tally("k-NN region", region.indices == brute_knn(x, &rows, inst.k));

        let profile = |p: &[f64]| -> Vec<f64> {
            inst.pool
                .members()
                .iter()
                .flat_map(|c| c.predict(p).unwrap().supports)
                .collect()
        };
        let dsel_profiles: Vec<Vec<f64>> = rows.iter().map(|r| profile(r)).collect();
        let hood = profile_neighborhood(
            &output_profile(&inst.pool, x).unwrap(),
            inst.reference.profiles(),
            inst.kp,
            None,
        )
        .unwrap();
        tally(
            "profile neighborhood",
            hood.indices == brute_knn(&profile(x), &dsel_profiles, inst.kp),
        );

        let baselines = Baselines::new(&inst.pool, &inst.reference, inst.k).unwrap();
        for (name, m) in [
            ("OLA", Method::Ola),
            ("LCA", Method::Lca),
            ("KNORA-E", Method::KnoraE),
            ("KNORA-U", Method::KnoraU),
        ] {
            tally(name, baselines.predict(m, x).unwrap() == brute_baseline(m, &inst, x));
        }

        let mut rng = derived_rng(seed, "acceptance-vote", 0);
        let classes = rng.random_range(2..=5);
        let n = rng.random_range(1..=9);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
        let weights: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..4u8)) * 0.25).collect();
        let same = weighted_vote(&labels, &weights, classes) == brute_vote(&labels, &weights, classes)
            && majority_vote(&labels, classes) == brute_vote(&labels, &vec![1.0; n], classes);
        tally("weighted vote", same);
    }
    let ok = counts.values().all(|(hit, n)| hit == n && *n >= 200);
    let detail = counts
        .iter()
        .map(|(k, (hit, n))| format!("{k} {hit}/{n}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(ok, detail)
}

// ---------------------------------------------------------------------------
// 9: byte-identical benchmark reports

fn run_cli_benchmark(config: &Path, out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_metades"))
        .args([
            "benchmark",
            config.to_str().unwrap(),
            "--output-dir",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    std::fs::write(
        &config,
        "replications = 3\nseed = 11\n[data]\nkind = \"p2\"\ntrain = 200\nmeta = 200\ndsel = 200\ntest = 300\n\
         [pool]\nsize = 5\n[bpso]\nruns = 2\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_cli_benchmark(&config, &a);
    run_cli_benchmark(&config, &b);
    let mut compared = Vec::new();
    let mut ok = true;
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in names {
        let (x, y) = (
            std::fs::read(a.join(&name)).unwrap(),
            std::fs::read(b.join(&name)).unwrap(),
        );
        ok &= x == y && !x.is_empty();
        compared.push(name.to_string_lossy().into_owned());
    }
    ok &= compared.iter().filter(|n| n.ends_with(".csv")).count() == 5;
    ensure(ok, format!("identical: {}", compared.join(", ")))
}

// ---------------------------------------------------------------------------
// 10: smoke benchmark on the bundled datasets

fn criterion_10(reports: &mut Vec<RunReport>) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["iris", "wine", "breast_cancer"] {
        let mut config = ExperimentConfig::load(manifest_dir().join(format!("configs/{name}.toml"))).unwrap();
        config.methods = all_methods();
        let report = run_experiment(&config).unwrap();
        assert!(report.replications.iter().all(|r| r.error.is_none()));
        let (des, single) = (
            mean_of(&report, Method::MetaDesOracle),
            mean_of(&report, Method::SingleBest),
        );
        ok &= des >= single;
        parts.push(format!("{name} {des:.4} vs {single:.4}"));
        reports.push(report);
    }
    ensure(ok, format!("META-DES.Oracle vs single best: {}", parts.join(", ")))
}

fn main() {
    let mut reports = Vec::new();
    let mut failures = 0;
    let mut record = |n: usize, title: &str, f: &mut dyn FnMut() -> Outcome| {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(d) => println!("criterion {n} ({title}): PASS - {d}"),
            Err(d) => {
                failures += 1;
                println!("criterion {n} ({title}): FAIL - {d}");
            }
        }
    };
    record(1, "P2 reproduction", &mut || criterion_1(&mut reports));
    record(2, "meta-feature vector length", &mut criterion_2);
    record(3, "transfer functions", &mut criterion_3);
    record(4, "oracle fitness of the oracle", &mut criterion_4);
    record(5, "BPSO vs exhaustive search", &mut criterion_5);
    record(6, "meta-feature identities", &mut criterion_6);
    record(10, "smoke benchmark", &mut || criterion_10(&mut reports));
    record(7, "oracle dominance", &mut || criterion_7(&reports));
    record(8, "brute-force equivalences", &mut criterion_8);
    record(9, "deterministic reports", &mut criterion_9);
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
