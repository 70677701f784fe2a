#![no_main]

use libfuzzer_sys::fuzz_target;
use stagekit::driver::Phase;
use stagekit::vectordsl::NormTier;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = s.parse::<Phase>() {
        assert_eq!(p.name(), s);
    }
    if let Ok(t) = s.parse::<NormTier>() {
        assert_eq!(t.name(), s);
    }
});
