#![no_main]

use libfuzzer_sys::fuzz_target;
use solenoid::io::{parse_tangent, tangent_from_json, tangent_to_json};
use solenoid::structures::{DecoratedStructure, TlcTesselation};
use solenoid::subgroup::Subgroup;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let st = DecoratedStructure::unity(TlcTesselation::farey(&Subgroup::commutator()));
    if let Ok(v) = parse_tangent(s, &st, true) {
        assert_eq!(tangent_from_json(&tangent_to_json(&st, &v), &st, false).unwrap(), v);
    }
});
