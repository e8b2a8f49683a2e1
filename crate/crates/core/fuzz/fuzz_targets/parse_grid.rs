#![no_main]

use attrmeter::io::parse_grid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = parse_grid(text) {
        assert_eq!(grid.first(), Some(&0));
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
});
