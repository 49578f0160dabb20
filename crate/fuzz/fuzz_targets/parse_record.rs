#![no_main]

use kdep_cli::record::{parse_record, to_line};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(record) = parse_record(text) {
        if record.statistic.is_finite() && record.p_value.is_finite() {
            let line = to_line(&record).unwrap();
            let back = parse_record(&line).unwrap();
            assert_eq!(back.statistic.to_bits(), record.statistic.to_bits());
        }
    }
});
