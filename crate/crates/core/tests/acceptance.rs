//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its runtime. Every expected value is pinned here; no
//! tolerance is deferred to later calibration.

use std::collections::HashSet;
use std::time::Instant;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gapeval::corpus::{self, Category, ProblemRecord, ProblemType, VariantBundle};
use gapeval::evalmatrix::{build_matrix, matrix_to_string, Column};
use gapeval::grading;
use gapeval::kernelgen::{
    soundness_bound, verify_loop, KernelCandidate, LoopOutcome, LoopParams, NoopPatcher,
    ScriptedPanel, SlotDict,
};
use gapeval::metrics::{
    self, bootstrap_ci, global_robustness, hoeffding_half_width, penalty_robustness,
    r_hat_frozen_slope, soft_gradient, GradientKind, RobustnessConfig, SaturationMode,
};
use gapeval::modelio::Client;
use gapeval::pairstats::{mcnemar_exact, star_label, DiscordantCounts};
use gapeval::pipeline::{self, build_backend};
use gapeval::surfacegen::{
    self, apply_rename, check_collisions, generate_garbled_map, invert_rename,
    matches_garbled_pattern, RenameFamily,
};

fn pass(criterion: u32, what: &str, started: Instant) {
    println!(
        "criterion {criterion}: PASS - {what} ({} ms)",
        started.elapsed().as_millis()
    );
}

fn config(mode: SaturationMode) -> RobustnessConfig {
    RobustnessConfig { mode, bootstrap_samples: 0, ..RobustnessConfig::default() }
}

// ---------------------------------------------------------------------------
// 1. geometric-mean identity on the published per-model robustness summary
// ---------------------------------------------------------------------------

/// (model, R_surf, R_para, R_global) as published, six decimals.
const PUBLISHED_ROBUSTNESS: [(&str, f64, f64, f64); 18] = [
    ("claude-opus-4", 0.958236, 0.948923, 0.953569),
    ("claude-sonnet-4", 0.961328, 0.941545, 0.951385),
    ("deepseek-prover", 0.972361, 0.959814, 0.966067),
    ("gemini-2.5-flash-lite", 0.961202, 0.942202, 0.951655),
    ("gemini-2.5-pro", 0.949132, 0.914877, 0.931848),
    ("gemini-2.5-flash", 0.951578, 0.917523, 0.934396),
    ("gpt-4.1", 0.963035, 0.944350, 0.953646),
    ("gpt-4.1-mini", 0.953185, 0.938590, 0.945860),
    ("gpt-4.1-nano", 0.980245, 0.982347, 0.981295),
    ("gpt-4o", 0.985836, 0.980026, 0.982927),
    ("gpt-4o-mini", 0.989664, 0.985652, 0.987656),
    ("grok4", 0.937415, 0.916048, 0.926670),
    ("kimi-k2", 0.955185, 0.929617, 0.942314),
    ("llama-4", 0.972019, 0.954604, 0.963272),
    ("mistral", 0.984081, 0.981983, 0.983032),
    ("o3", 0.939731, 0.921062, 0.930350),
    ("o4-mini", 0.946086, 0.928919, 0.937463),
    ("qwen3", 0.941208, 0.927547, 0.934353),
];

#[test]
fn criterion_01_geometric_mean_identity() {
    let started = Instant::now();
    for (model, r_surf, r_para, r_global) in PUBLISHED_ROBUSTNESS {
        let computed = global_robustness(r_surf, r_para).unwrap();
        assert!(
            (computed - r_global).abs() <= 1e-4,
            "{model}: sqrt({r_surf}*{r_para}) = {computed} vs published {r_global}"
        );
    }
    assert!(started.elapsed().as_secs() < 1);
    pass(1, "global robustness matches all 18 published rows within 1e-4", started);
}

// ---------------------------------------------------------------------------
// 2. McNemar exact on the external-validation counts
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_mcnemar_exact_reference_values() {
    let started = Instant::now();
    let p = mcnemar_exact(DiscordantCounts::new(24, 10));
    assert!((p - 0.024).abs() <= 0.002, "(24,10) gave {p}");
    let p = mcnemar_exact(DiscordantCounts::new(35, 13));
    assert!((p - 0.002).abs() <= 0.001, "(35,13) gave {p}");
    assert!(started.elapsed().as_secs() < 1);
    pass(2, "exact test reproduces (24,10)->0.024 and (35,13)->0.002", started);
}

// ---------------------------------------------------------------------------
// 3. soundness bound of the screening loop
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_soundness_bound() {
    let started = Instant::now();
    let delta = soundness_bound(15, 2, 5, 0.04).unwrap();
    assert!((delta - 1.47e-13).abs() < 1e-15, "delta = {delta}");
    assert!(delta < 1e-10);
    let delta = soundness_bound(15, 2, 5, 0.08).unwrap();
    assert!(delta < 1e-8, "delta = {delta}");
    assert!(started.elapsed().as_secs() < 1);
    pass(3, "screening bound gives 1.47e-13 < 1e-10 and stays under 1e-8 at eps=0.08", started);
}

// ---------------------------------------------------------------------------
// 4. oracle equivalence of the full metric pipeline
// ---------------------------------------------------------------------------

/// Deliberately naive re-implementation of the estimator, kept independent
/// of the library path it checks.
fn oracle_r_hat(easy: &[f64], hard: &[f64], k: f64, eps: f64, mode: SaturationMode) -> f64 {
    let n = easy.len() as f64;
    let p_e = (easy.iter().sum::<f64>() + 0.5) / (n + 1.0);
    let p_h = (hard.iter().sum::<f64>() + 0.5) / (n + 1.0);
    let sigma = (0.5 * (p_e * (1.0 - p_e) + p_h * (1.0 - p_h))).sqrt();
    let drops: Vec<f64> = easy.iter().zip(hard).map(|(e, h)| (e - h) / sigma).collect();
    let saturate = |d: f64| -> f64 {
        let softplus = (1.0 + (k * d).exp()).ln() / k;
        match mode {
            SaturationMode::PaperLiteral => softplus,
            SaturationMode::ClampedCentered => (softplus - 2.0f64.ln() / k).max(0.0),
            SaturationMode::HardClamp => d.max(0.0),
        }
    };
    let naive_median = |values: &[f64]| -> f64 {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = sorted.len();
        if m % 2 == 1 {
            sorted[m / 2]
        } else {
            (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
        }
    };
    let positive: Vec<f64> = drops.iter().copied().filter(|d| *d > 0.0).collect();
    let typical = if positive.is_empty() {
        let abs: Vec<f64> = drops.iter().map(|d| d.abs()).collect();
        naive_median(&abs).max(eps)
    } else {
        naive_median(&positive)
    };
    let beta = 2.0f64.ln() / typical;
    drops.iter().map(|&d| (-beta * saturate(d)).exp()).sum::<f64>() / n
}

#[test]
fn criterion_04_estimator_matches_naive_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let unit = Uniform::new_inclusive(0.0f64, 1.0);
    for trial in 0..1000 {
        let n = 1 + trial % 20;
        let binary = trial % 2 == 0;
        let draw = |rng: &mut ChaCha8Rng| {
            if binary {
                f64::from(unit.sample(rng) > 0.5)
            } else {
                unit.sample(rng)
            }
        };
        let easy: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let hard: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        for mode in [
            SaturationMode::PaperLiteral,
            SaturationMode::ClampedCentered,
            SaturationMode::HardClamp,
        ] {
            let cfg = config(mode);
            let lib = penalty_robustness(&easy, &hard, &cfg).unwrap().r_hat;
            let oracle = oracle_r_hat(&easy, &hard, cfg.k, cfg.eps, mode);
            assert!(
                (lib - oracle).abs() <= 1e-12,
                "trial {trial} mode {mode:?}: lib {lib} vs oracle {oracle}"
            );
        }
    }
    assert!(started.elapsed().as_secs() < 30);
    pass(4, "estimator equals the naive oracle to 1e-12 on 1000 instances x 3 modes", started);
}

// ---------------------------------------------------------------------------
// 5. invariance suite
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_invariance_suite() {
    let started = Instant::now();
    let cfg = config(SaturationMode::ClampedCentered);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let unit = Uniform::new_inclusive(0.0f64, 1.0);

    // e = h gives exactly 1
    for trial in 0..50 {
        let n = 1 + trial % 15;
        let e: Vec<f64> = (0..n).map(|_| f64::from(unit.sample(&mut rng) > 0.5)).collect();
        assert_eq!(penalty_robustness(&e, &e, &cfg).unwrap().r_hat, 1.0);
    }
    // pure improvement gives exactly 1
    let zeros = vec![0.0; 10];
    let ones = vec![1.0; 10];
    assert_eq!(penalty_robustness(&zeros, &ones, &cfg).unwrap().r_hat, 1.0);

    // range and permutation invariance on fuzzed instances
    for trial in 0..500u64 {
        let n = 2 + (trial as usize) % 24;
        let binary = trial % 2 == 0;
        let draw = |rng: &mut ChaCha8Rng| {
            if binary {
                f64::from(unit.sample(rng) > 0.5)
            } else {
                unit.sample(rng)
            }
        };
        let e: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let h: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let r = penalty_robustness(&e, &h, &cfg).unwrap().r_hat;
        assert!(r > 0.0 && r <= 1.0, "trial {trial}: r = {r}");
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let ep: Vec<f64> = order.iter().map(|&i| e[i]).collect();
        let hp: Vec<f64> = order.iter().map(|&i| h[i]).collect();
        let rp = penalty_robustness(&ep, &hp, &cfg).unwrap().r_hat;
        assert!((r - rp).abs() <= 1e-12, "trial {trial}: {r} vs permuted {rp}");
    }
    assert!(started.elapsed().as_secs() < 10);
    pass(5, "identity=1 exactly, improvements=1, range and permutation hold on 500 fuzzed", started);
}

// ---------------------------------------------------------------------------
// 6. analytic gradient against central finite differences
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_gradient_matches_finite_differences() {
    let started = Instant::now();
    let cfg = config(SaturationMode::PaperLiteral);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let unit = Uniform::new(0.05f64, 0.95);
    let step = 1e-5;
    for trial in 0..100 {
        let n = 4 + trial % 9;
        let e: Vec<f64> = (0..n).map(|_| unit.sample(&mut rng)).collect();
        let h: Vec<f64> = (0..n).map(|_| unit.sample(&mut rng)).collect();
        let grad = soft_gradient(&e, &h, &cfg, GradientKind::Full).unwrap();
        for j in 0..n {
            for (analytic, side) in [(grad.wrt_easy[j], "e"), (grad.wrt_hard[j], "h")] {
                let (mut plus_e, mut minus_e) = (e.clone(), e.clone());
                let (mut plus_h, mut minus_h) = (h.clone(), h.clone());
                if side == "e" {
                    plus_e[j] += step;
                    minus_e[j] -= step;
                } else {
                    plus_h[j] += step;
                    minus_h[j] -= step;
                }
                let fd = (r_hat_frozen_slope(&plus_e, &plus_h, &cfg, grad.slope).unwrap()
                    - r_hat_frozen_slope(&minus_e, &minus_h, &cfg, grad.slope).unwrap())
                    / (2.0 * step);
                let denom = fd.abs().max(analytic.abs()).max(1e-8);
                assert!(
                    (fd - analytic).abs() / denom < 1e-4,
                    "trial {trial} d{side}[{j}]: fd {fd} vs analytic {analytic}"
                );
            }
        }
    }
    assert!(started.elapsed().as_secs() < 30);
    pass(6, "full soft gradient matches central differences (rel err < 1e-4, 100 instances)", started);
}

// ---------------------------------------------------------------------------
// 7. Hoeffding half-width
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_hoeffding_width() {
    let started = Instant::now();
    let half = hoeffding_half_width(1051, 0.05).unwrap();
    assert!((half - 0.0419).abs() <= 1e-4, "half-width {half}");
    let quad = hoeffding_half_width(4 * 1051, 0.05).unwrap();
    assert_eq!(quad, half / 2.0, "4N must halve the width exactly");
    assert!(started.elapsed().as_secs() < 1);
    pass(7, "half-width 0.0419 at N=1051 and exact 1/2 scaling under 4N", started);
}

// ---------------------------------------------------------------------------
// 8. verify-loop decision vs exhaustive window scan
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_verify_loop_equals_window_scan() {
    let started = Instant::now();
    let candidate = KernelCandidate {
        question: "q".into(),
        solution: "s".into(),
        slots: SlotDict::new(),
        core_steps: vec![],
    };
    let mut checked = 0u64;
    for t in 2..=6usize {
        for j in 1..=2usize {
            let bits = t * j;
            for pattern in 0u64..(1 << bits) {
                let rounds: Vec<Vec<bool>> = (0..t)
                    .map(|r| (0..j).map(|v| pattern >> (r * j + v) & 1 == 1).collect())
                    .collect();
                let expected = (0..=t - 2)
                    .any(|s| rounds[s..s + 2].iter().all(|round| round.iter().all(|v| *v)));
                let mut panel = ScriptedPanel::new(j, rounds);
                let params = LoopParams { max_rounds: t, streak: 2, judges: j };
                let (outcome, _, trace) =
                    verify_loop(candidate.clone(), &mut panel, &mut NoopPatcher, &params);
                assert_eq!(
                    outcome == LoopOutcome::Accepted,
                    expected,
                    "t={t} j={j} pattern={pattern:b}"
                );
                if outcome == LoopOutcome::Accepted {
                    let tail = &trace.iterations[trace.iterations.len() - 2..];
                    assert!(tail.iter().all(|it| it.votes.iter().all(|v| *v)));
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 5000, "exhausted {checked} sequences");
    assert!(started.elapsed().as_secs() < 10);
    pass(8, "loop decision equals the window-scan oracle on every sequence, T<=6, J<=2", started);
}

// ---------------------------------------------------------------------------
// 9. renaming round-trip on the golden record plus fuzzed records
// ---------------------------------------------------------------------------

fn fuzz_record(rng: &mut ChaCha8Rng, serial: usize) -> ProblemRecord {
    const IDENTIFIERS: &[&str] =
        &["a", "b", "k", "m", "n", "r", "x", "y", "z", "T", "N", "r_1", "x_0", "s_2"];
    const WORDS: &[&str] = &[
        "the", "sum", "of", "squares", "equals", "a", "bound", "for", "integers", "with",
        "total", "prove", "that", "holds", "every", "choice",
    ];
    const FRAGMENTS: &[&str] = &["\\frac{1}{2}", "\\pi", "\\sqrt{2}", "\\left( t \\right)"];
    let mut pool: Vec<&str> = IDENTIFIERS.to_vec();
    for i in (1..pool.len()).rev() {
        pool.swap(i, rng.gen_range(0..=i));
    }
    let n_vars = rng.gen_range(1..=4usize);
    let n_params = rng.gen_range(0..=2usize);
    let vars: Vec<String> = pool[..n_vars].iter().map(|s| s.to_string()).collect();
    let params: Vec<String> =
        pool[n_vars..n_vars + n_params].iter().map(|s| s.to_string()).collect();
    let mut text = String::new();
    for _ in 0..rng.gen_range(10..40) {
        match rng.gen_range(0..4u8) {
            0 => text.push_str(WORDS[rng.gen_range(0..WORDS.len())]),
            1 => {
                let id = &pool[rng.gen_range(0..n_vars + n_params)];
                // subscripted identifiers sometimes appear in braced form
                if id.contains('_') && rng.gen_bool(0.5) {
                    let (base, sub) = id.split_once('_').unwrap();
                    text.push_str(&format!("{base}_{{{sub}}}"));
                } else {
                    text.push_str(id);
                }
            }
            2 => text.push_str(FRAGMENTS[rng.gen_range(0..FRAGMENTS.len())]),
            _ => text.push_str(&rng.gen_range(0..100u32).to_string()),
        }
        text.push(' ');
    }
    let mut solution = text.clone();
    for id in vars.iter().chain(&params) {
        solution.push_str(&format!("Let {id} be given. "));
    }
    ProblemRecord {
        index: format!("{}-{}-{}", 1938 + serial % 80, if serial % 2 == 0 { "A" } else { "B" }, 1 + serial % 8),
        record_type: Category::Alg,
        tags: vec![Category::Alg],
        difficulty: "1".into(),
        question: text,
        solution,
        vars,
        params,
        sci_consts: vec![],
        variants: None,
        checked: true,
        problem_type: ProblemType::Proof,
        extra: serde_json::Map::new(),
    }
}

#[test]
fn criterion_09_renaming_round_trip() {
    let started = Instant::now();
    let golden = corpus::parse_corpus(include_str!("../data/golden_record.jsonl")).unwrap()
        .remove(0)
        .record;
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // shipped golden record: its collision-free garbled map plus a freshly
    // generated one
    let shipped = golden.variants.as_ref().unwrap().garbled_string.as_ref().unwrap();
    for text in [&golden.question, &golden.solution] {
        let renamed = apply_rename(text, &shipped.map);
        assert_eq!(&invert_rename(&renamed, &shipped.map).unwrap(), text);
    }
    let fresh = generate_garbled_map(&golden, &mut rng).unwrap();
    assert!(check_collisions(&fresh, &golden).is_empty());
    for value in fresh.entries.values() {
        assert!(matches_garbled_pattern(value));
    }
    for text in [&golden.question, &golden.solution] {
        let renamed = apply_rename(text, &fresh.entries);
        assert_eq!(&invert_rename(&renamed, &fresh.entries).unwrap(), text);
    }

    // 200 fuzzed records
    for serial in 0..200 {
        let record = fuzz_record(&mut rng, serial);
        let map = generate_garbled_map(&record, &mut rng).unwrap();
        assert!(
            check_collisions(&map, &record).is_empty(),
            "fuzzed record {serial}: map collides"
        );
        for value in map.entries.values() {
            assert!(matches_garbled_pattern(value), "{value:?}");
        }
        for text in [&record.question, &record.solution] {
            let renamed = apply_rename(text, &map.entries);
            let back = invert_rename(&renamed, &map.entries).unwrap();
            assert_eq!(&back, text, "fuzzed record {serial} round-trip");
        }
    }
    assert!(started.elapsed().as_secs() < 10);
    pass(9, "byte-exact round-trips, clean collision checks, 4-16 char garbled names", started);
}

// ---------------------------------------------------------------------------
// 10. end-to-end mock run
// ---------------------------------------------------------------------------

fn synthetic_record(i: usize) -> ProblemRecord {
    let year = 1950 + (i / 8) as u16;
    let position = 1 + (i % 8) as u32;
    let part = if i % 2 == 0 { "A" } else { "B" };
    let mut record = ProblemRecord {
        index: format!("{year}-{part}-{position}"),
        record_type: [Category::Alg, Category::Nt, Category::Geo][i % 3],
        tags: vec![[Category::Alg, Category::Nt, Category::Geo][i % 3]],
        difficulty: position.to_string(),
        question: format!("Compute the total weight w of {} crates of unit weight q.", i + 2),
        solution: format!("The total is w = {}. Multiply the count by q.", 3 * (i + 1)),
        vars: vec!["w".into()],
        params: vec!["q".into()],
        sci_consts: vec![],
        variants: None,
        checked: true,
        problem_type: if i % 2 == 0 { ProblemType::Calculation } else { ProblemType::Proof },
        extra: serde_json::Map::new(),
    };
    let mut bundle = VariantBundle::default();
    for family in RenameFamily::ALL {
        let mut map = indexmap::IndexMap::new();
        map.insert("w".to_string(), format!("{}w{i}", family.label().to_lowercase()));
        map.insert("q".to_string(), format!("{}q{i}", family.label().to_lowercase()));
        *bundle.surface_mut(family) = Some(corpus::SurfaceVariant {
            question: apply_rename(&record.question, &map),
            solution: apply_rename(&record.solution, &map),
            map,
        });
    }
    bundle.kernel_variant = Some(corpus::KernelVariant {
        question: record.question.replace("crates", "barrels"),
        solution: record.solution.replace("Multiply", "Scale"),
        meta: corpus::KernelMeta::default(),
    });
    record.variants = Some(bundle);
    record
}

#[test]
fn criterion_10_end_to_end_mock_run() {
    let started = Instant::now();
    let records: Vec<ProblemRecord> = (0..20).map(synthetic_record).collect();
    let cfg = RobustnessConfig { bootstrap_samples: 100, ..RobustnessConfig::default() };

    let run_once = || {
        let (solver_backend, solver_config) = build_backend("mock:oracle", &records).unwrap();
        let (grader_backend, grader_config) = build_backend("mock:exact", &records).unwrap();
        let solver = Client::new(solver_backend, solver_config);
        let grader = Client::new(grader_backend, grader_config);
        let outcome = pipeline::cmd_evaluate(&records, &Column::ALL, &solver, &grader).unwrap();
        assert!(outcome.failures.is_empty());
        let bundle =
            gapeval::report::build_report(&outcome.matrix, Some(&outcome.verdicts), &cfg).unwrap();
        (matrix_to_string(&outcome.matrix), bundle)
    };

    // deterministic bundle: two runs, identical bytes
    let (matrix_a, bundle_a) = run_once();
    let (matrix_b, bundle_b) = run_once();
    assert_eq!(matrix_a, matrix_b);
    assert_eq!(bundle_a.render_files(), bundle_b.render_files());

    // accuracy columns equal matrix column means
    let matrix = gapeval::evalmatrix::parse_matrix(&matrix_a).unwrap();
    for row in &bundle_a.accuracy {
        let (mean, n) = matrix.column_mean(row.column).unwrap();
        assert_eq!(row.n, n);
        assert!((row.accuracy_pct - 100.0 * mean).abs() < 1e-9);
    }

    // an engineered column with (24,10) discordance prints p = 0.024 with **
    let mut verdicts = Vec::new();
    for i in 0..40usize {
        let item = format!("19{:02}-A-{}", 38 + i / 8, 1 + i % 8);
        let (orig, gs) = if i < 24 {
            (true, false)
        } else if i < 34 {
            (false, true)
        } else {
            (true, true)
        };
        for column in Column::ALL {
            let grade = if column == Column::Gs { gs } else { orig };
            verdicts.push((item.clone(), column, grade));
        }
    }
    let engineered = build_matrix(&verdicts).unwrap();
    let bundle = gapeval::report::build_report(&engineered, None, &cfg).unwrap();
    let gs_row = bundle.accuracy.iter().find(|r| r.column == Column::Gs).unwrap();
    let p = gs_row.p_exact.unwrap();
    assert!((p - 0.024).abs() <= 0.002, "engineered p = {p}");
    assert_eq!(gs_row.stars, "**");
    assert_eq!(star_label(p).unwrap(), "**");
    let files = bundle.render_files();
    let accuracy_csv = &files.iter().find(|(name, _)| *name == "accuracy.csv").unwrap().1;
    assert!(
        accuracy_csv.contains("0.024") && accuracy_csv.contains("**"),
        "accuracy table must print p=0.024 with **:\n{accuracy_csv}"
    );

    assert!(started.elapsed().as_secs() < 60);
    pass(10, "deterministic mock bundle, column means, and the engineered (24,10) ** row", started);
}

// ---------------------------------------------------------------------------
// 11. headroom diagnostic bound
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_headroom_bound() {
    let started = Instant::now();
    let cfg = config(SaturationMode::HardClamp);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let unit = Uniform::new_inclusive(0.0f64, 1.0);
    for trial in 0..200 {
        let n = 5 + trial % 60;
        let p1 = unit.sample(&mut rng);
        let p2 = unit.sample(&mut rng);
        let e: Vec<f64> = (0..n).map(|_| f64::from(unit.sample(&mut rng) < p1)).collect();
        let h: Vec<f64> = (0..n).map(|_| f64::from(unit.sample(&mut rng) < p2)).collect();
        let r = penalty_robustness(&e, &h, &cfg).unwrap();
        let bound = metrics::headroom_bound(r.p_easy, r.p_hard, r.slope, r.sigma);
        assert!(
            1.0 - r.r_hat <= bound + 1.0 / (n as f64 + 1.0) + 1e-12,
            "trial {trial}: 1-R = {} exceeds {bound} + 1/(N+1)",
            1.0 - r.r_hat
        );
    }
    assert!(started.elapsed().as_secs() < 10);
    pass(11, "1-R stays within the headroom bound plus smoothing slack on 200 runs", started);
}

// ---------------------------------------------------------------------------
// supporting checks used by several criteria
// ---------------------------------------------------------------------------

#[test]
fn bootstrap_is_reproducible_across_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let e: Vec<f64> = (0..30).map(|_| f64::from(rng.gen_bool(0.7))).collect();
    let h: Vec<f64> = (0..30).map(|_| f64::from(rng.gen_bool(0.5))).collect();
    let cfg = RobustnessConfig { bootstrap_samples: 400, seed: 7, ..RobustnessConfig::default() };
    assert_eq!(bootstrap_ci(&e, &h, &cfg).unwrap(), bootstrap_ci(&e, &h, &cfg).unwrap());
}

#[test]
fn golden_record_passes_validation_and_round_trips() {
    let text = include_str!("../data/golden_record.jsonl");
    let loaded = corpus::parse_corpus(text).unwrap();
    assert_eq!(loaded.len(), 1);
    assert_eq!(loaded[0].violations, vec![]);
    let reserialized = format!("{}\n", corpus::serialize_record(&loaded[0].record));
    assert_eq!(reserialized, text);
}

#[test]
fn grading_normalization_closes_the_strict_path() {
    assert!(grading::strict_match("\\frac{2}{5}\\sqrt{5}", "2/5 sqrt(5)"));
    assert!(!grading::strict_match("0.775", "2/5 sqrt(5)"));
}

#[test]
fn generated_surface_variants_avoid_every_existing_token() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut seen = HashSet::new();
    for serial in 0..50 {
        let record = fuzz_record(&mut rng, serial);
        let map = generate_garbled_map(&record, &mut rng).unwrap();
        let variant = surfacegen::generate_surface_variant(&record, &map);
        for value in map.entries.values() {
            assert!(!surfacegen::contains_token(&record.question, value));
            assert!(!surfacegen::contains_token(&record.solution, value));
            seen.insert(value.clone());
        }
        // every key with a plain-token occurrence is gone from the variant
        for key in map.entries.keys() {
            assert!(!surfacegen::contains_token(&variant.question, key));
            assert!(!surfacegen::contains_token(&variant.solution, key));
        }
    }
    assert!(!seen.is_empty());
}
