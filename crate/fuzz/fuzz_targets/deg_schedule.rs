#![no_main]

use libfuzzer_sys::fuzz_target;
use stagekit::codegen::Deg;
use stagekit::runtime::schedule_deg;

fuzz_target!(|data: &[u8]| {
    let Some((&workers, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let Ok(deg) = Deg::from_json(text) else {
        return;
    };
    let plan = schedule_deg(&deg, workers as usize).expect("validated graphs are acyclic");
    assert_eq!(plan.kernel_count(), deg.kernels.len());
    let mut wave_of = vec![usize::MAX; deg.kernels.len()];
    for (w, ks) in plan.waves.iter().enumerate() {
        for &k in ks {
            assert_eq!(wave_of[k], usize::MAX, "kernel scheduled twice");
            wave_of[k] = w;
        }
    }
    for e in &deg.edges {
        let id = |s: &str| s[1..].parse::<usize>().unwrap();
        assert!(wave_of[id(&e.from)] < wave_of[id(&e.to)]);
    }
});
