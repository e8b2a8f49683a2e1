#![no_main]

use attrmeter::io::{parse_matrix, write_matrix, Encoding};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // errors are fine, panics are not; accepted input must round trip
    if let Ok(m) = parse_matrix(data, Encoding::PlusMinusOne) {
        let text = write_matrix(&m, Encoding::PlusMinusOne);
        let back = parse_matrix(text.as_bytes(), Encoding::PlusMinusOne).expect("rendered matrix parses");
        assert_eq!(back, m);
    }
});
