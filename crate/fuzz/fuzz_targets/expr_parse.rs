#![no_main]

use libfuzzer_sys::fuzz_target;
use majorisation::expr::parse;

fuzz_target!(|data: &str| {
    if let Ok(e) = parse(data) {
        let again = parse(&e.to_string()).expect("display round trip");
        assert_eq!(e.to_string(), again.to_string());
    }
});
