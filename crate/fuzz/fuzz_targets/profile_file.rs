#![no_main]

use libfuzzer_sys::fuzz_target;
use magchain::io::parse_profile_file;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(p) = parse_profile_file(&text) {
        let (lo, hi) = p.declared_range().expect("file profiles carry a range");
        assert!(lo <= hi);
        for j in lo..=hi.min(lo.saturating_add(64)) {
            let _ = p.coefficient(j);
        }
    }
});
