#![no_main]

use libfuzzer_sys::fuzz_target;
use sphere_eq::interpolation::{interpolant_eval, InterpolantModel};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(model) = InterpolantModel::from_json(text) else { return };
    let _ = interpolant_eval(&model, &model.centers[0]);
    let back = InterpolantModel::from_json(&model.to_json().expect("model serializes")).expect("round trip");
    assert_eq!(model.w.len(), back.w.len());
});
