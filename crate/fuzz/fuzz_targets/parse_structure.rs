#![no_main]

use libfuzzer_sys::fuzz_target;
use solenoid::io::{parse_structure, structure_from_json, structure_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > 2048 {
        return;
    }
    if let Ok(st) = parse_structure(s, true) {
        let back = structure_from_json(&structure_to_json(&st), false).unwrap();
        assert_eq!(back.lambda(), st.lambda());
    }
});
