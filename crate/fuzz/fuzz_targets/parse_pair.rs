#![no_main]

use std::path::Path;

use kdep_cli::io::parse_pair;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((x, y)) = parse_pair(data, Path::new("pair.txt")) {
        assert_eq!(x.len(), y.len());
        assert!(x.iter().chain(&y).all(|v| v.is_finite()));
    }
});
