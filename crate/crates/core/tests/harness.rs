use std::sync::Arc;

use shiftlab::concepts::{first_bit_class, modified_class, ClassRef, Concept, PrgSpec};
use shiftlab::domain::Input;
use shiftlab::harness::{
    emit, parse_csv, parse_json, run, run_codec, run_separation, Cell, Experiment,
    ExperimentConfig, OutputFormat,
};

fn num(c: Option<&Cell>) -> f64 {
    c.and_then(Cell::as_f64).unwrap()
}

fn quick(e: Experiment) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(e);
    match e {
        Experiment::Separation | Experiment::Distinguish => {
            cfg.n = 10;
            cfg.trials = 1000;
            cfg.train_size = 100;
        }
        Experiment::Codec => cfg.train_size = 20_000,
        Experiment::Walk | Experiment::Regularity => cfg.trials = 1000,
        Experiment::Bounds => {}
    }
    cfg
}

#[test]
fn empty_arm_a_predicts_with_index_zero() {
    let n = 8;
    let mut cfg = ExperimentConfig::defaults(Experiment::Separation);
    cfg.n = n;
    cfg.range_train_size = 0;
    cfg.trials = 4000;
    cfg.test_points = 4;
    let report = run_separation(&cfg).unwrap();
    let acc = num(report.lookup("A", "accuracy"));
    let hw = num(report.lookup("A", "ci99_half_width"));

    // enumeration oracle: mean agreement of the index-0 concept with every
    // concept of the class over the whole cube
    let base: ClassRef = Arc::new(first_bit_class(n, PrgSpec::hash_based(n).unwrap()).unwrap());
    let class = modified_class(base).unwrap();
    let xs: Vec<Input> = (0..1u64 << n).map(|v| Input::new(n, v).unwrap()).collect();
    let zero = class.modified(0).eval_batch(&xs);
    let agree: usize = (0..1u64 << n)
        .map(|j| {
            class
                .modified(j)
                .eval_batch(&xs)
                .iter()
                .zip(&zero)
                .filter(|(a, b)| a == b)
                .count()
        })
        .sum();
    let oracle = agree as f64 / (1u64 << (2 * n)) as f64;
    assert!(
        (acc - oracle).abs() <= hw,
        "accuracy {acc} vs oracle {oracle} (hw {hw})"
    );
}

#[test]
fn test_prg_reports_are_byte_identical() {
    let mut cfg = ExperimentConfig::defaults(Experiment::Separation);
    cfg.n = 4;
    cfg.trials = 500;
    cfg.train_size = 20;
    cfg.range_train_size = 10;
    cfg.prg = shiftlab::PrgKind::TestDeterministic;
    cfg.allow_insecure = true;
    cfg.seed = 1234;
    let first = emit(&run(&cfg, Some(1)).unwrap(), OutputFormat::Json).unwrap();
    let second = emit(&run(&cfg, Some(2)).unwrap(), OutputFormat::Json).unwrap();
    assert_eq!(first, second);
    assert!(first.contains("no security claim"));
}

#[test]
fn insecure_prg_needs_explicit_permission() {
    let mut cfg = quick(Experiment::Distinguish);
    cfg.prg = shiftlab::PrgKind::TestDeterministic;
    assert!(run(&cfg, Some(1)).is_err());
}

#[test]
fn one_bit_payloads_always_decode() {
    for hex in ["8", "0"] {
        let mut cfg = ExperimentConfig::defaults(Experiment::Codec);
        cfg.payload = hex.into();
        cfg.payload_bits = 1;
        cfg.train_size = 10_000;
        let r = run_codec(&cfg).unwrap();
        assert_eq!(r.rows[0][4], Cell::Float(1.0), "payload {hex}");
        assert_eq!(r.rows[0][6], Cell::Int(0));
    }
}

#[test]
fn starved_codec_reports_near_zero_success() {
    let mut cfg = ExperimentConfig::defaults(Experiment::Codec);
    cfg.train_size = 10;
    let r = run_codec(&cfg).unwrap();
    assert!(num(r.rows[0].get(4)) < 0.05);
    assert!(
        num(r.rows[0].get(6)) > 0.0,
        "pilot outcomes should go unseen sometimes"
    );
}

#[test]
fn every_report_round_trips() {
    for e in Experiment::ALL {
        let cfg = quick(e);
        let report = run(&cfg, None).unwrap();
        assert_eq!(report.columns, e.columns(), "{e}");
        assert_eq!(report.config, cfg);
        assert_eq!(report.seed, cfg.seed);
        let json = emit(&report, OutputFormat::Json).unwrap();
        assert_eq!(parse_json(&json).unwrap(), report, "{e}");
        let (cols, rows) = parse_csv(&emit(&report, OutputFormat::Csv).unwrap()).unwrap();
        assert_eq!(
            (cols, rows),
            (report.columns.clone(), report.rows.clone()),
            "{e}"
        );
    }
}

#[test]
fn bounds_csv_header_is_fixed() {
    let csv = emit(
        &run(&quick(Experiment::Bounds), None).unwrap(),
        OutputFormat::Csv,
    )
    .unwrap();
    assert!(csv.starts_with(
        "n,p_samples,alpha,radius,ball_size,ball_size_log2,entropy_bound_log2,lower_bound,vacuous,exact_error\n"
    ));
    assert!(csv.contains("\n2,2,0.0,0,1,0.0,0.0,0.75,false,0.78125\n"));
}

#[test]
fn separation_rows_in_documented_order() {
    let r = run(&quick(Experiment::Separation), None).unwrap();
    let arms: Vec<String> = r.rows.iter().map(|row| row[0].to_string()).collect();
    assert_eq!(arms, ["A", "B", "B", "gap"]);
    let learners: Vec<String> = r.rows.iter().map(|row| row[1].to_string()).collect();
    assert_eq!(
        learners[..3],
        ["index_recovery", "lookup", "amplified_lookup"]
    );
    assert_eq!(r.rows[2][3], Cell::Int(300));
    assert!(r.metric_value("tv_bound").is_some());
}

#[test]
fn single_learner_selection() {
    let mut cfg = quick(Experiment::Separation);
    cfg.learner = "constant0".into();
    let r = run(&cfg, None).unwrap();
    assert_eq!(r.rows.len(), 3);
    assert_eq!(r.rows[1][1], Cell::text("constant0"));
    assert_eq!(r.rows[1][7], Cell::Null);
}
