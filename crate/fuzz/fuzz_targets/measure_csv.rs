#![no_main]

use libfuzzer_sys::fuzz_target;
use magchain::io::read_measure_csv;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let _ = read_measure_csv(&text);
});
