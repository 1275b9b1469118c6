#![no_main]

use libfuzzer_sys::fuzz_target;
use magchain::io::read_butterfly_csv;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(rows) = read_butterfly_csv(&text) {
        assert!(rows.iter().all(|r| r.q >= 1 && r.lo <= r.hi));
    }
});
