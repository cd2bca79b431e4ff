#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(pi) = lumpq::io::parse_partition_str(text) {
        let rendered = lumpq::io::partition_to_string(&pi);
        let again = lumpq::io::parse_partition_str(&rendered).expect("round trip reparses");
        assert_eq!(pi, again);
    }
});
