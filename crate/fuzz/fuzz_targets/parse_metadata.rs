#![no_main]

use std::path::Path;

use kdep_cli::io::parse_metadata;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_metadata(data, Path::new("meta.csv")) {
        for row in rows {
            assert!(row.weight.is_finite() && row.weight > 0.0);
        }
    }
});
