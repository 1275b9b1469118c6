#![no_main]

use libfuzzer_sys::fuzz_target;
use magchain::io::read_bands_csv;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(rows) = read_bands_csv(&text) {
        assert!(rows.iter().all(|r| r.lo <= r.hi));
    }
});
