//! Drive the full generate -> evaluate -> report pipeline over the shipped
//! golden record with the offline mock backends.

use std::sync::Arc;

use gapeval::corpus::{self, ProblemRecord};
use gapeval::evalmatrix::Column;
use gapeval::kernelgen::LoopParams;
use gapeval::metrics::RobustnessConfig;
use gapeval::modelio::Client;
use gapeval::pipeline::{self, build_backend, VariantSelector};
use gapeval::surfacegen::{self, RenameFamily};

fn golden() -> ProblemRecord {
    corpus::parse_corpus(include_str!("../data/golden_record.jsonl")).unwrap()
        .remove(0)
        .record
}

#[test]
fn golden_record_regenerates_validates_and_evaluates() {
    let mut record = golden();
    record.variants = None;

    let backend = Arc::new(pipeline::mock_generation_backend());
    let (_, config) = build_backend("mock:kernel", &[]).unwrap();
    let generator = Client::new(backend.clone(), config.clone());
    let judge = Client::new(backend, config);

    let outcome = pipeline::cmd_generate(
        std::slice::from_ref(&record),
        &VariantSelector::ALL,
        &generator,
        &judge,
        &LoopParams { max_rounds: 6, streak: 2, judges: 3 },
        13,
    );
    assert_eq!(outcome.failures, vec![], "generation must succeed on the golden record");
    let augmented = &outcome.records[0];
    let bundle = augmented.variants.as_ref().unwrap();

    // regenerated bundle is schema-clean and every map passes the
    // generation-time collision rules
    assert_eq!(corpus::validate_record(augmented), vec![]);
    for family in RenameFamily::ALL {
        let variant = bundle.surface(family).unwrap();
        let map = surfacegen::RenameMap {
            family,
            entries: variant.map.clone(),
            provenance: Default::default(),
        };
        assert!(surfacegen::check_collisions(&map, augmented).is_empty(), "{family:?}");
        // round-trip back to the source texts
        assert_eq!(
            surfacegen::invert_rename(&variant.solution, &variant.map).unwrap(),
            augmented.solution
        );
    }
    let kernel = bundle.kernel_variant.as_ref().unwrap();
    assert!(!kernel.meta.core_steps.is_empty());
    assert!(!kernel.meta.mutable_slots.is_empty());
    assert_eq!(outcome.traces.len(), 1);

    // the augmented record round-trips through the corpus format
    let serialized = corpus::serialize_record(augmented);
    let reloaded = corpus::parse_corpus(&serialized).unwrap();
    assert_eq!(&reloaded[0].record, augmented);

    // this record's identifiers occur only in the solution, so the surface
    // variant questions stay identical to the original; a verbatim solver
    // answers all five prompts the same way and a strict string grader can
    // match only the original reference
    let original_question = &augmented.question;
    for family in RenameFamily::ALL {
        assert_eq!(&bundle.surface(family).unwrap().question, original_question);
    }

    let records = vec![augmented.clone()];
    let (solver_backend, solver_config) = build_backend("mock:oracle", &records).unwrap();
    let (grader_backend, grader_config) = build_backend("mock:exact", &records).unwrap();
    let solver = Client::new(solver_backend, solver_config);
    let grader = Client::new(grader_backend, grader_config);
    let eval = pipeline::cmd_evaluate(&records, &Column::ALL, &solver, &grader).unwrap();
    assert!(eval.failures.is_empty());
    assert_eq!(eval.matrix.get(0, Column::Original), Some(true));
    assert_eq!(eval.matrix.get(0, Column::Kv), Some(true), "kernel question is distinct");
    for column in Column::SURFACE {
        assert_eq!(eval.matrix.get(0, column), Some(false), "{column:?}");
    }

    let cfg = RobustnessConfig { bootstrap_samples: 0, ..RobustnessConfig::default() };
    let bundle = gapeval::report::build_report(&eval.matrix, Some(&eval.verdicts), &cfg).unwrap();
    let surface_row =
        bundle.robustness.iter().find(|r| r.comparison == "surface").unwrap();
    let para_row =
        bundle.robustness.iter().find(|r| r.comparison == "parametric").unwrap();
    assert!(surface_row.r_value < 1.0, "the surface flip must cost penalty mass");
    assert_eq!(format!("{:.6}", para_row.r_value), "1.000000");
}
