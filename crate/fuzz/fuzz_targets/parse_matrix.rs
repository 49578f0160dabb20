#![no_main]

use std::path::Path;

use kdep_cli::io::{parse_matrix, write_matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(table) = parse_matrix(data, Path::new("fuzz.csv")) else {
        return;
    };
    // Anything accepted must survive a write/parse cycle unchanged.
    let names: Vec<String> = (0..table.data.d()).map(|j| format!("c{j}")).collect();
    let mut buf = Vec::new();
    write_matrix(&mut buf, &names, table.data.values()).unwrap();
    let again = parse_matrix(&buf, Path::new("again.csv")).unwrap();
    assert_eq!(again.data.values(), table.data.values());
});
