#![no_main]

use libfuzzer_sys::fuzz_target;
use majorisation::families::FamilySpec;

fuzz_target!(|data: &str| {
    if let Ok(spec) = data.parse::<FamilySpec>() {
        // display must parse back to the same spec
        let again: FamilySpec = spec.to_string().parse().expect("display round trip");
        assert_eq!(spec, again);
    }
});
