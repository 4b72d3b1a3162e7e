//! Reads a reference log and candidate logs from CSV and prints every measure.
//!
//!     cargo run --example compare_csv_logs -- ALOG.csv GLOG.csv [GLOG.csv ...]
//!
//! Without arguments it compares the bundled loan fixtures.

use std::path::PathBuf;

use logdist::event_log::{read_log, ColumnMapping, FormatOptions};
use logdist::harness::{evaluate, MeasureId};

fn main() -> anyhow::Result<()> {
    let mut paths: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if paths.len() < 2 {
        let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
        paths = vec![
            fixtures.join("loan_gt_20.csv"),
            fixtures.join("loan_seq_20.csv"),
        ];
    }
    let read = |p: &PathBuf| read_log(p, &ColumnMapping::default(), &FormatOptions::default());
    let alog = read(&paths[0])?;
    let glogs = paths[1..].iter().map(read).collect::<Result<Vec<_>, _>>()?;

    let report = evaluate(&alog, &glogs, &MeasureId::DEFAULTS)?;
    print!("{}", report.to_text());
    Ok(())
}
