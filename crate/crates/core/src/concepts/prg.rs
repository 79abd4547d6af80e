//! Length-doubling generators used as the GGM expansion step.

use serde::{Deserialize, Serialize};
use sha2::digest::generic_array::GenericArray;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrgKind {
    /// SHA-256 based expansion; the default.
    #[serde(rename = "hash")]
    HashBased,
    /// SplitMix64 based expansion. Fast, reproducible, and not a PRG in any
    /// cryptographic sense; reports always flag it.
    #[serde(rename = "test")]
    TestDeterministic,
}

impl PrgKind {
    pub fn label(&self) -> &'static str {
        match self {
            PrgKind::HashBased => "hash",
            PrgKind::TestDeterministic => "test",
        }
    }
}

impl std::str::FromStr for PrgKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hash" => Ok(PrgKind::HashBased),
            "test" => Ok(PrgKind::TestDeterministic),
            other => Err(Error::invalid(format!(
                "unknown PRG kind {other:?}; expected hash or test"
            ))),
        }
    }
}

const DOMAIN_TAG: &[u8; 12] = b"shiftlab-prg";
const MAX_KEY_BYTES: usize = 32;
const SHA256_IV: [u32; 8] = [
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
];

/// A generator `G: {0,1}^s → {0,1}^{2s}` returned as the two halves
/// `(G_0(state), G_1(state))`.
///
/// Hash-based: the message is `"shiftlab-prg" ‖ s ‖ len(key) ‖ key ‖ state`
/// (state as 8 little-endian bytes). `G_0` is the first 8 bytes of
/// `SHA-256(message)` read big-endian, reduced mod `2^s`; `G_1` is the next
/// 8 bytes, reduced the same way. The message always fits one SHA-256 block,
/// so each expansion costs one compression.
///
/// Test: `G_b(state) = splitmix64(2·state + b) mod 2^s`; the key is ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrgSpec {
    kind: PrgKind,
    seed_bits: u32,
    key: Vec<u8>,
    block: [u8; 64],
    state_offset: usize,
}

impl PrgSpec {
    pub fn new(kind: PrgKind, seed_bits: u32) -> Result<Self> {
        Self::with_key(kind, seed_bits, &[])
    }

    pub fn hash_based(seed_bits: u32) -> Result<Self> {
        Self::new(PrgKind::HashBased, seed_bits)
    }

    pub fn test_deterministic(seed_bits: u32) -> Result<Self> {
        Self::new(PrgKind::TestDeterministic, seed_bits)
    }

    /// `key` is mixed into every hash-based expansion (at most 32 bytes).
    pub fn with_key(kind: PrgKind, seed_bits: u32, key: &[u8]) -> Result<Self> {
        if seed_bits == 0 || seed_bits > 64 {
            return Err(Error::invalid(format!(
                "PRG seed length must be in 1..=64 bits, got {seed_bits}"
            )));
        }
        if key.len() > MAX_KEY_BYTES {
            return Err(Error::invalid(format!(
                "PRG key material is limited to {MAX_KEY_BYTES} bytes, got {}",
                key.len()
            )));
        }
        let mut block = [0u8; 64];
        let mut at = 0;
        block[..DOMAIN_TAG.len()].copy_from_slice(DOMAIN_TAG);
        at += DOMAIN_TAG.len();
        block[at] = seed_bits as u8;
        block[at + 1] = key.len() as u8;
        at += 2;
        block[at..at + key.len()].copy_from_slice(key);
        at += key.len();
        let state_offset = at;
        let msg_len = at + 8;
        block[msg_len] = 0x80;
        block[56..].copy_from_slice(&((msg_len as u64) * 8).to_be_bytes());
        Ok(PrgSpec {
            kind,
            seed_bits,
            key: key.to_vec(),
            block,
            state_offset,
        })
    }

    pub fn kind(&self) -> PrgKind {
        self.kind
    }

    pub fn seed_bits(&self) -> u32 {
        self.seed_bits
    }

    pub fn output_bits(&self) -> u32 {
        2 * self.seed_bits
    }

    pub fn key(&self) -> &[u8] {
        &self.key
    }

    pub fn is_insecure(&self) -> bool {
        self.kind == PrgKind::TestDeterministic
    }

    fn mask(&self) -> u64 {
        if self.seed_bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.seed_bits) - 1
        }
    }

    /// The message hashed for `state` (hash-based kind).
    pub fn message(&self, state: u64) -> Vec<u8> {
        let mut m = self.block[..self.state_offset].to_vec();
        m.extend_from_slice(&state.to_le_bytes());
        m
    }

    pub fn expand(&self, state: u64) -> (u64, u64) {
        let mask = self.mask();
        match self.kind {
            PrgKind::HashBased => {
                let mut block = self.block;
                block[self.state_offset..self.state_offset + 8]
                    .copy_from_slice(&state.to_le_bytes());
                let mut h = SHA256_IV;
                sha2::compress256(&mut h, &[*GenericArray::from_slice(&block)]);
                let g0 = (u64::from(h[0]) << 32) | u64::from(h[1]);
                let g1 = (u64::from(h[2]) << 32) | u64::from(h[3]);
                (g0 & mask, g1 & mask)
            }
            PrgKind::TestDeterministic => {
                let s = state.wrapping_mul(2);
                (splitmix64(s) & mask, splitmix64(s.wrapping_add(1)) & mask)
            }
        }
    }
}

/// SplitMix64 output function applied to `z`.
pub(crate) fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
