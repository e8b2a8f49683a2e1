#![no_main]

use attrmeter::io::parse_name_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(names) = parse_name_list(data) {
        for name in names {
            assert!(!name.is_empty() && !name.starts_with('#'));
        }
    }
});
