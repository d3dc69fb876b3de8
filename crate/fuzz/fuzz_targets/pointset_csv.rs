#![no_main]

use libfuzzer_sys::fuzz_target;
use sphere_eq::io::{format_pointset, parse_pointset};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(pts) = parse_pointset(text) else { return };
    for p in &pts {
        assert!((p.dot(p) - 1.0).abs() < 1e-12);
    }
    // whatever was accepted must survive a write/read cycle bit for bit
    let back = parse_pointset(&format_pointset(&pts)).expect("formatted set parses");
    assert_eq!(pts.len(), back.len());
    for (a, b) in pts.iter().zip(&back) {
        assert_eq!(a.coords().map(f64::to_bits), b.coords().map(f64::to_bits));
    }
});
