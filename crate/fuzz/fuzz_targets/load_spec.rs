//! Spec ingestion must never panic on arbitrary bytes: JSON parsing, schema
//! validation, expression compilation, and the grid walk all return errors.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(file) = metagee::report::parse_spec_json(text) else { return };
    let _ = metagee::report::compile(&file);
});
