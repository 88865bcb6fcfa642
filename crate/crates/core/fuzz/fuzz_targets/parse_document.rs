#![no_main]

use libfuzzer_sys::fuzz_target;
use reservoir_w::io::{parse_document, render_document};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_document(text) {
        let rendered = render_document(&doc);
        let back = parse_document(&rendered).expect("rendered document parses");
        assert_eq!(back, doc, "{rendered}");
    }
});
