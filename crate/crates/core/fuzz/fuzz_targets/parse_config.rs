#![no_main]

use libfuzzer_sys::fuzz_target;
use reservoir_w::io::{parse_config, render_config};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(text) {
        // Anything accepted must survive a render/parse cycle unchanged.
        let rendered = render_config(&cfg);
        let back = parse_config(&rendered).expect("rendered config parses");
        assert_eq!(back, cfg, "{rendered}");
    }
});
