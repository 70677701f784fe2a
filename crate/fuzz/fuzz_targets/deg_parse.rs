#![no_main]

use libfuzzer_sys::fuzz_target;
use stagekit::codegen::Deg;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(deg) = Deg::from_json(text) {
        // Accepted graphs re-serialize to a fixed point.
        let canon = deg.to_json();
        let again = Deg::from_json(&canon).expect("canonical form parses");
        assert_eq!(again, deg);
        assert_eq!(again.to_json(), canon);
    }
});
