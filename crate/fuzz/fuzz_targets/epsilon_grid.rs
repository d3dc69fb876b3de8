#![no_main]

use libfuzzer_sys::fuzz_target;
use sphere_eq::io::{parse_epsilon_grid, MAX_GRID_LEN};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(grid) = parse_epsilon_grid(text) else { return };
    assert!(!grid.is_empty() && grid.len() <= MAX_GRID_LEN);
    assert!(grid.iter().all(|e| e.is_finite() && *e > 0.0));
});
