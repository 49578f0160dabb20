#![no_main]

use kdep::BandwidthSpec;
use kdep_cli::args::parse_bandwidth;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((a, b)) = parse_bandwidth(text) {
        for spec in [a, b] {
            if let BandwidthSpec::Fixed(s) = spec {
                assert!(s.is_finite() && s > 0.0);
            }
        }
    }
});
