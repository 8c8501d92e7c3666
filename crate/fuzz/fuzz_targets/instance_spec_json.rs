#![no_main]

use condorcet::harness::InstanceSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = InstanceSpec::from_json(text) else {
        return;
    };
    // file specs would touch the filesystem; huge generators are not interesting
    let small = match &spec {
        InstanceSpec::File { .. } => false,
        InstanceSpec::TotalOrder { deltas } | InstanceSpec::BlockMinimax { deltas, .. } => {
            deltas.len() <= 64
        }
        InstanceSpec::RandomCw { k, .. } => *k <= 64,
    };
    if small {
        if let Ok(m) = spec.build() {
            assert!(m.validate().cw.is_some());
        }
    }
});
