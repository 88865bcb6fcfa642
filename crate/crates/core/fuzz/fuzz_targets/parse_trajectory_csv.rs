#![no_main]

use libfuzzer_sys::fuzz_target;
use reservoir_w::io::{parse_trajectory_csv, write_trajectory_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(tr) = parse_trajectory_csv(text) else { return };
    let mut out = Vec::new();
    write_trajectory_csv(&tr, &mut out).expect("write to memory");
    let back = parse_trajectory_csv(std::str::from_utf8(&out).unwrap()).expect("written csv parses");
    assert_eq!(back.len(), tr.len());
    // Written values are rounded to 12 significant digits; a second cycle is exact.
    let mut again = Vec::new();
    write_trajectory_csv(&back, &mut again).unwrap();
    assert_eq!(out, again);
});
