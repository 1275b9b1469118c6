#![no_main]

use libfuzzer_sys::fuzz_target;
use magchain::io::{parse_profile_spec, ProfileSource};
use magchain::profile::FieldProfile;

fuzz_target!(|data: &[u8]| {
    let spec = String::from_utf8_lossy(data);
    if let Ok(ProfileSource::Periodic(values)) = parse_profile_spec(&spec) {
        assert!(!values.is_empty());
        let _ = FieldProfile::periodic(values);
    }
});
