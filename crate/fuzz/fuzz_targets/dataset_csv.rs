#![no_main]

use libfuzzer_sys::fuzz_target;
use majorisation::empirical::Dataset;

fuzz_target!(|data: &[u8]| {
    if let Ok(d) = Dataset::from_csv(data) {
        assert_eq!(d.labels().len(), d.dim());
        assert_eq!(d.column(0).count(), d.rows());
    }
});
