//! Deterministic randomness.
//!
//! Gaussian directions come from Philox4x32-10 (Salmon et al., Random123), a
//! counter-based generator: the block at `(key, counter)` can be produced in
//! any order without carrying state, so a direction set is fully described by
//! its 64-bit seed. Uniforms are turned into normals with the Box–Muller
//! transform using `libm`'s portable `log`/`sin`/`cos`, which makes the stream
//! bit-identical across platforms.
//!
//! Sequential draws (batch indices, inner `(i, j)` picks) use ChaCha8 seeded
//! through [`stream_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32 block with 10 rounds.
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut ctr = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0];
    }
    ctr
}

/// Two independent standard normals for block `(seed; j, lane)`.
pub fn normal_pair(seed: u64, j: u64, lane: u64) -> (f64, f64) {
    let key = [seed as u32, (seed >> 32) as u32];
    let out = philox4x32_10([lane as u32, (lane >> 32) as u32, j as u32, (j >> 32) as u32], key);
    let a = (u64::from(out[1]) << 32) | u64::from(out[0]);
    let b = (u64::from(out[3]) << 32) | u64::from(out[2]);
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u1 in (0, 1] keeps the logarithm finite; u2 in [0, 1).
    let u1 = ((a >> 11) + 1) as f64 * SCALE;
    let u2 = (b >> 11) as f64 * SCALE;
    let radius = (-2.0 * libm::log(u1)).sqrt();
    let angle = std::f64::consts::TAU * u2;
    (radius * libm::cos(angle), radius * libm::sin(angle))
}

/// Fill `out` with the standard-normal vector indexed by `j` under `seed`.
pub fn fill_normal_vector(seed: u64, j: u64, out: &mut [f64]) {
    for (lane, chunk) in out.chunks_mut(2).enumerate() {
        let (z0, z1) = normal_pair(seed, j, lane as u64);
        chunk[0] = z0;
        if let Some(slot) = chunk.get_mut(1) {
            *slot = z1;
        }
    }
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Split a seed into independent child seeds: `mix(seed, index)`.
pub fn mix(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Independent random streams derived from a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Per-epoch direction sets; child index is the epoch.
    Directions,
    /// Batch selection and inner `(i, j)` draws.
    Sampler,
    /// Per-iteration directions of the baseline methods.
    BaselineDirections,
    /// Randomized-output index of RSG.
    Output,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Directions => 0x6469_7265_6374,
            Stream::Sampler => 0x7361_6d70_6c65,
            Stream::BaselineDirections => 0x6261_7365_6c69,
            Stream::Output => 0x6f75_7470_7574,
        }
    }
}

pub fn stream_seed(master: u64, stream: Stream) -> u64 {
    mix(master, stream.tag())
}

/// Seed of the direction set used in epoch `epoch`.
pub fn epoch_direction_seed(master: u64, epoch: u64) -> u64 {
    mix(stream_seed(master, Stream::Directions), epoch)
}

pub fn stream_rng(master: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, stream))
}
