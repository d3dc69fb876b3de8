#![no_main]

use libfuzzer_sys::fuzz_target;
use sphere_eq::io::{format_spherical, parse_spherical};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(pts) = parse_spherical(text) else { return };
    let back = parse_spherical(&format_spherical(&pts).expect("unit points convert")).expect("formatted set parses");
    for (a, b) in pts.iter().zip(&back) {
        assert!(a.chord(b) < 1e-12);
    }
});
