#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(shifts) = lumpq_cli::parse_lambda_list(text) {
        assert!(!shifts.is_empty());
        assert!(shifts.iter().all(|s| s.value().re.is_finite() && s.value().im.is_finite()));
    }
});
