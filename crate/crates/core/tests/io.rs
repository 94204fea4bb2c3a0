use std::fs::File;
use std::io::{BufReader, Write};

use zovr_core::problems::{builtin, load_dataset_csv, load_model_csv, make_quadratic};
use zovr_core::{read_trace_csv, run_szvr_g, Error, OptimizerConfig, QueryLedger};

#[test]
fn trace_round_trips_through_a_file() {
    let q = make_quadratic(3, None).unwrap();
    let mut cfg = OptimizerConfig::manual(0.1, 0.01, 7, 3, 2, 1)
        .with_stride(2)
        .with_budget(40);
    cfg.initial_point = Some(vec![1.0, -1.0, 0.5]);
    let trace = run_szvr_g(&q, &cfg, &mut QueryLedger::new()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    trace.write_csv(File::create(&path).unwrap()).unwrap();
    let rows = read_trace_csv(BufReader::new(File::open(&path).unwrap())).unwrap();
    assert_eq!(rows.len(), trace.records.len());
    for (row, rec) in rows.iter().zip(&trace.records) {
        assert_eq!(
            (row.epoch, row.iter, row.szo_count),
            (rec.epoch, rec.iter, rec.szo_count)
        );
        assert_eq!(row.f_value.to_bits(), rec.f_value.to_bits());
        assert_eq!(row.grad_norm_sq.map(f64::to_bits), rec.grad_norm_sq.map(f64::to_bits));
        assert_eq!(row.flag, rec.truncated);
    }
    assert!(rows.last().unwrap().flag);
}

#[test]
fn builtin_data_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = builtin::digits();
    let path = dir.path().join("digits.csv");
    data.write_csv(File::create(&path).unwrap()).unwrap();
    assert_eq!(load_dataset_csv(&path).unwrap(), data);

    let model = builtin::attack_model();
    let path = dir.path().join("model.csv");
    model.write_csv(File::create(&path).unwrap()).unwrap();
    assert_eq!(load_model_csv(&path).unwrap(), model);
}

#[test]
fn malformed_files_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    let mut f = File::create(&path).unwrap();
    writeln!(f, "f1,f2,label\n1.0,2.0,0\n0.5,x,1").unwrap();
    drop(f);
    match load_dataset_csv(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    let err = load_dataset_csv(dir.path().join("absent.csv")).unwrap_err();
    assert!(matches!(err, Error::Io(_)) && err.is_parse_failure());

    let path = dir.path().join("trace.csv");
    std::fs::write(
        &path,
        "epoch,iter,szo_count,f_value,grad_norm_sq,flag\n0,0,0,1.0,,0\n0,1,2,1.0\n",
    )
    .unwrap();
    match read_trace_csv(BufReader::new(File::open(&path).unwrap())) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
}
