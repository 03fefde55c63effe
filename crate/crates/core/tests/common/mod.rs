#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Frozen high-precision scalars keyed by name.
pub fn scalars() -> HashMap<String, f64> {
    let mut rdr = csv::Reader::from_path(fixture_path("scalars.csv")).unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].parse::<f64>().unwrap())
        })
        .collect()
}

pub fn scalar(name: &str) -> f64 {
    *scalars().get(name).unwrap_or_else(|| panic!("missing oracle value {name}"))
}

/// Rows of a numeric CSV fixture.
pub fn table(name: &str) -> Vec<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(fixture_path(name)).unwrap();
    rdr.records()
        .map(|r| r.unwrap().iter().map(|v| v.parse::<f64>().unwrap()).collect())
        .collect()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}
