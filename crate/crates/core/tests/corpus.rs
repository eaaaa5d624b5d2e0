//! Replays the fuzz seed corpus through the parsers with the fuzz targets'
//! assertions, so the invariants are checked without a fuzzing toolchain.

use std::fs;
use std::path::PathBuf;

use majorisation::empirical::{discrete_empirical_dr, read_counts_csv, Dataset};
use majorisation::expr::parse;
use majorisation::families::FamilySpec;
use majorisation::TabulatedFn;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn family_specs() {
    for (name, s) in seeds("family_spec") {
        let s = String::from_utf8(s).unwrap();
        match s.parse::<FamilySpec>() {
            Ok(spec) => assert_eq!(spec.to_string().parse::<FamilySpec>().unwrap(), spec, "{name}"),
            Err(_) => assert_eq!(name, "invalid"),
        }
    }
}

#[test]
fn expressions() {
    for (name, s) in seeds("expr_parse") {
        let s = String::from_utf8(s).unwrap();
        match parse(&s) {
            Ok(e) => assert_eq!(parse(&e.to_string()).unwrap().to_string(), e.to_string(), "{name}"),
            Err(_) => assert_eq!(name, "truncated"),
        }
    }
}

#[test]
fn tables() {
    for (name, s) in seeds("tabulated_json") {
        let r = TabulatedFn::from_json(std::str::from_utf8(&s).unwrap());
        assert_eq!(r.is_ok(), name != "bad", "{name}");
    }
    for (name, s) in seeds("tabulated_csv") {
        let r = TabulatedFn::read_csv_infer(s.as_slice());
        assert_eq!(r.is_ok(), name != "bad", "{name}");
    }
}

#[test]
fn datasets_and_counts() {
    for (name, s) in seeds("dataset_csv") {
        match Dataset::from_csv(s.as_slice()) {
            Ok(d) => assert_eq!(d.column(0).count(), d.rows()),
            Err(_) => assert_eq!(name, "nan"),
        }
    }
    for (name, s) in seeds("counts_csv") {
        match read_counts_csv(s.as_slice()) {
            Ok(c) => assert!(discrete_empirical_dr(&c).is_ok(), "{name}"),
            Err(_) => assert_eq!(name, "negative"),
        }
    }
}
