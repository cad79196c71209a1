#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    l1exact_cli::fuzzing::csv_table(data);
});
