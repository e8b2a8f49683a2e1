//! Replays the checked-in fuzz corpus through the same checks as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use attrmeter::io::{parse_grid, parse_matrix, parse_name_list, write_matrix, Encoding};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fuzz/corpus")
        .join(target);
    let mut out: Vec<(PathBuf, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let bytes = fs::read(&path).unwrap();
            (path, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn matrix_round_trip(target: &str, encoding: Encoding) -> (usize, usize) {
    let (mut ok, mut rejected) = (0, 0);
    for (path, bytes) in seeds(target) {
        match parse_matrix(&bytes, encoding) {
            Ok(m) => {
                let text = write_matrix(&m, encoding);
                assert_eq!(
                    parse_matrix(text.as_bytes(), encoding).unwrap(),
                    m,
                    "{}",
                    path.display()
                );
                ok += 1;
            }
            Err(_) => rejected += 1,
        }
    }
    (ok, rejected)
}

#[test]
fn plus_minus_one_matrices() {
    let (ok, rejected) = matrix_round_trip("parse_matrix_pm1", Encoding::PlusMinusOne);
    assert!(ok >= 3 && rejected >= 2, "{ok} accepted, {rejected} rejected");
}

#[test]
fn zero_one_matrices() {
    let (ok, rejected) = matrix_round_trip("parse_matrix_zero_one", Encoding::ZeroOne);
    assert!(ok >= 1 && rejected >= 2, "{ok} accepted, {rejected} rejected");
}

#[test]
fn name_lists() {
    for (path, bytes) in seeds("parse_name_list") {
        if let Ok(names) = parse_name_list(&bytes) {
            assert!(
                names.iter().all(|n| !n.is_empty() && !n.starts_with('#')),
                "{}",
                path.display()
            );
        }
    }
}

#[test]
fn grids() {
    let mut accepted = 0;
    for (path, bytes) in seeds("parse_grid") {
        let Ok(text) = std::str::from_utf8(&bytes) else {
            continue;
        };
        if let Ok(grid) = parse_grid(text) {
            assert_eq!(grid.first(), Some(&0), "{}", path.display());
            assert!(grid.windows(2).all(|w| w[0] < w[1]));
            accepted += 1;
        }
    }
    assert_eq!(accepted, 2);
}
