#![no_main]

use libfuzzer_sys::fuzz_target;
use majorisation::TabulatedFn;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = TabulatedFn::read_csv_infer(data) {
        let _ = t.interpolate(t.xs()[0]);
        let _ = majorisation::DrCdf::from_table(t.clone());
        let _ = majorisation::DrPdf::from_table(t);
    }
});
