#![no_main]

use attrmeter::io::{parse_matrix, write_matrix, Encoding};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = parse_matrix(data, Encoding::ZeroOne) {
        let text = write_matrix(&m, Encoding::ZeroOne);
        let back = parse_matrix(text.as_bytes(), Encoding::ZeroOne).expect("rendered matrix parses");
        assert_eq!(back, m);
    }
});
