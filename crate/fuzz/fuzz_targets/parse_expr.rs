//! The expression parser must never panic, every error must carry an
//! in-bounds byte offset, and accepted trees must round-trip through render.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    match metagee::exprlang::parse(src) {
        Ok(expr) => {
            let rendered = expr.render();
            let back = metagee::exprlang::parse(&rendered)
                .expect("rendered text must parse");
            assert_eq!(back, expr, "render/parse round trip diverged");
        }
        Err(e) => {
            assert!(e.offset <= src.len());
        }
    }
});
