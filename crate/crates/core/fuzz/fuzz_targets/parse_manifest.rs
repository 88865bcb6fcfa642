#![no_main]

use libfuzzer_sys::fuzz_target;
use reservoir_w::io::RunManifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = serde_json::from_slice::<RunManifest>(data) {
        let text = serde_json::to_string(&m).unwrap();
        serde_json::from_str::<RunManifest>(&text).expect("serialized manifest parses");
    }
});
