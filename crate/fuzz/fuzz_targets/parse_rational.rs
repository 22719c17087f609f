#![no_main]

use libfuzzer_sys::fuzz_target;
use solenoid::farey::FareyVertex;
use solenoid::io::{format_rational, parse_decimal, parse_rational};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_rational(s) {
        assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }
    let _ = parse_decimal(s);
    if let Ok(v) = s.parse::<FareyVertex>() {
        assert_eq!(v.to_string().parse::<FareyVertex>().unwrap(), v);
    }
});
