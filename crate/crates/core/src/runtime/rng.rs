//! The seedable generator behind `VectorRand`.

const MUL: u64 = 6364136223846793005;
const INC: u64 = 1442695040888963407;

/// 64-bit linear congruential generator. Each draw advances the state and
/// maps its top 53 bits to `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lcg {
    state: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Lcg {
    pub fn new(state: u64) -> Self {
        Lcg { state }
    }

    /// Generator for one random stream of a run. Distinct streams of the
    /// same seed start from unrelated states.
    pub fn for_stream(seed: u64, stream: u64) -> Self {
        Lcg::new(splitmix(seed ^ splitmix(stream)))
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_f64(&mut self) -> f64 {
        self.state = self.state.wrapping_mul(MUL).wrapping_add(INC);
        (self.state >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
