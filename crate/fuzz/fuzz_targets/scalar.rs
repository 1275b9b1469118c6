#![no_main]

use libfuzzer_sys::fuzz_target;
use magchain::Scalar;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(x) = s.parse::<Scalar>() else { return };
    assert!(x.to_f64().is_finite());
    // Exact values print as p/q and must read back unchanged.
    if x.is_exact() {
        assert_eq!(x.to_string().parse::<Scalar>().unwrap(), x);
    }
});
