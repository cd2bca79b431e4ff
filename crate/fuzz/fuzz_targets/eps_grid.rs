#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = lumpq_cli::parse_eps_grid(text) {
        assert!(!grid.is_empty());
        assert!(grid.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
});
