#![no_main]

use libfuzzer_sys::fuzz_target;
use majorisation::TabulatedFn;

fuzz_target!(|data: &str| {
    if let Ok(t) = TabulatedFn::from_json(data) {
        let back = TabulatedFn::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back.values(), t.values());
        let _ = t.integral();
    }
});
