// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::path::PathBuf;

use blockseg::load_marker_map;
use blockseg_core::{Interval, JnKind, PenaltySpec, RhoKind};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

#[test]
fn roh_penalty_matches_golden_table() {
    let markers = load_marker_map(&golden("roh_markers.txt"), 10).unwrap();
    let spec = PenaltySpec::new(RhoKind::roh(markers.clone(), 1.0), JnKind::LogN, 1.0);
    let table = fs::read_to_string(golden("roh_rho.csv")).unwrap();
    let mut rows = 0;
    for line in table.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (r, s): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        let interval = Interval::new(r, s);
        assert_eq!(
            markers.span(interval),
            f[2].parse::<u64>().unwrap(),
            "{line}"
        );
        let rho = spec.rho(interval).unwrap();
        if f[3] == "inf" {
            assert!(rho.is_infinite(), "{line}");
        } else {
            let want: f64 = f[3].parse().unwrap();
            assert!(
                (rho.value() - want).abs() <= 1e-15 * want,
                "{line}: {}",
                rho.value()
            );
        }
        rows += 1;
    }
    assert_eq!(rows, 55);
}
