use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finaliser, used to derive independent child seeds from a master seed.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `(master, label)`, e.g. one per algorithm or replicate.
pub fn derive_seed(master: u64, label: u64) -> u64 {
    mix64(master ^ mix64(label.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Sampling stream of `node` under `seed`. Streams share the ChaCha key and differ in
/// the stream id, so draws at one node never depend on how other nodes are scheduled.
pub fn node_rng(seed: u64, node: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(node as u64);
    rng
}

/// One independent sampling stream per node.
#[derive(Debug, Clone)]
pub struct NodeRngs {
    streams: Vec<ChaCha12Rng>,
}

impl NodeRngs {
    pub fn new(seed: u64, n: usize) -> Self {
        NodeRngs {
            streams: (0..n).map(|i| node_rng(seed, i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    pub fn node(&mut self, i: usize) -> &mut ChaCha12Rng {
        &mut self.streams[i]
    }

    pub(crate) fn streams_mut(&mut self) -> &mut [ChaCha12Rng] {
        &mut self.streams
    }
}
