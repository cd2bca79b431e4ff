#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // parsing untrusted input must never panic; a successful parse must
    // survive a write/reparse round trip bit-for-bit
    if let Ok(p) = lumpq::io::parse_matrix_str(text) {
        let rendered = lumpq::io::matrix_to_string(&p);
        let q = lumpq::io::parse_matrix_str(&rendered).expect("round trip reparses");
        assert_eq!(p.entries(), q.entries());
    }
});
