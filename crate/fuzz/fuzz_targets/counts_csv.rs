#![no_main]

use libfuzzer_sys::fuzz_target;
use majorisation::empirical::{discrete_empirical_dr, read_counts_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(counts) = read_counts_csv(data) {
        let _ = discrete_empirical_dr(&counts);
    }
});
