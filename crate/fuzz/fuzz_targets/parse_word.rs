#![no_main]

use libfuzzer_sys::fuzz_target;
use solenoid::io::{parse_word, word_from_json, word_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > 2048 {
        return;
    }
    if let Ok(w) = parse_word(s) {
        let back = word_from_json(&word_to_json(&w)).unwrap();
        assert_eq!(back.base, w.base);
        assert_eq!(back.flips(), w.flips());
    }
});
