#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = nca_cli::parse_config_str(text, "fuzz") {
        let _ = cfg.validate();
        let _ = cfg.initial_density();
        let _ = cfg.to_json();
    }
});
