use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counter-based random stream keyed by `(seed, stream_id)`.
///
/// Streams are ChaCha8 keystreams, so identical keys reproduce identical draw
/// sequences on every platform, and distinct stream ids never overlap. The
/// pipeline uses the manifest index of a sample as its stream id.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    /// Independent stream for a named purpose on the same sample, e.g. donor
    /// selection vs. synthetic geometry.
    pub fn for_purpose(seed: u64, stream: u64, purpose: &str) -> Self {
        Self::new(splitmix64(seed ^ fnv1a(purpose.as_bytes())), stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_key_same_sequence() {
        let a: Vec<u64> = (0..16).map({
            let mut r = SeededRng::new(7, 3);
            move |_| r.random()
        }).collect();
        let b: Vec<u64> = (0..16).map({
            let mut r = SeededRng::new(7, 3);
            move |_| r.random()
        }).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_and_purposes_differ() {
        let x = SeededRng::new(7, 3).next_u64();
        assert_ne!(x, SeededRng::new(7, 4).next_u64());
        assert_ne!(x, SeededRng::new(8, 3).next_u64());
        assert_ne!(
            SeededRng::for_purpose(7, 3, "a").next_u64(),
            SeededRng::for_purpose(7, 3, "b").next_u64()
        );
    }

    // Frozen first draw; a change here means outputs of earlier runs can no
    // longer be reproduced.
    #[test]
    fn first_draw_is_stable() {
        assert_eq!(SeededRng::new(0, 0).next_u64(), 0xb585_f767_a79a_3b6c);
        assert_eq!(SeededRng::new(42, 7).next_u64(), 0x20e5_cc88_35be_27d0);
    }
}

