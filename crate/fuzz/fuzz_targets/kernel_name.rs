#![no_main]

use libfuzzer_sys::fuzz_target;
use sphere_eq::KernelSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = text.parse::<KernelSpec>() else { return };
    let again: KernelSpec = spec.to_string().parse().expect("canonical name parses");
    assert_eq!(spec, again);
    let _ = spec.eval_t(0.0);
});
