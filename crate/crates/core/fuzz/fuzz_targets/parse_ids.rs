#![no_main]

use libfuzzer_sys::fuzz_target;
use reservoir_w::experiments::{DeviationChannel, FigureId};

fuzz_target!(|data: String| {
    if let Ok(f) = FigureId::parse(&data) {
        assert_eq!(FigureId::parse(f.as_str()).unwrap(), f);
    }
    if let Some(c) = DeviationChannel::parse(&data) {
        assert_eq!(DeviationChannel::parse(c.as_str()), Some(c));
    }
});
