//! Symmetric XOR games: representation, reproducible sampling, and the
//! canonical `n:b_0b_1...b_n` text form.
//!
//! Sampling is counter based. For `(master_seed, index)` the generator key is
//!
//! ```text
//! key = master_seed ^ mix64((index + 1) * GAMMA)
//! ```
//!
//! and mix word `w` (1-based) is `mix64(key + w * GAMMA)`, i.e. the `w`-th
//! output of a SplitMix64 stream seeded with `key`. Bit `j` of the game is bit
//! `j mod 64` of word `j / 64 + 1`. All arithmetic wraps modulo 2^64.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one sampled game: the master seed of the run plus the sample index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleDescriptor {
    pub master_seed: u64,
    pub index: u64,
}

impl SampleDescriptor {
    pub fn new(master_seed: u64, index: u64) -> Self {
        Self { master_seed, index }
    }

    fn key(&self) -> u64 {
        self.master_seed ^ mix64(self.index.wrapping_add(1).wrapping_mul(GAMMA))
    }

    /// Word `w >= 1` of this descriptor's bit stream.
    pub fn word(&self, w: u64) -> u64 {
        mix64(self.key().wrapping_add(w.wrapping_mul(GAMMA)))
    }

    /// The first `len` bits of the stream.
    pub fn bits(&self, len: usize) -> Vec<bool> {
        let key = self.key();
        let mut out = Vec::with_capacity(len);
        let mut word = 0u64;
        for j in 0..len {
            if j % 64 == 0 {
                let w = (j / 64 + 1) as u64;
                word = mix64(key.wrapping_add(w.wrapping_mul(GAMMA)));
            }
            out.push((word >> (j % 64)) & 1 == 1);
        }
        out
    }
}

/// Winning condition of an `n`-player symmetric XOR game: players win on
/// input weight `j` iff the parity of their outputs equals `bits[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymmetricGame {
    n: usize,
    bits: Vec<bool>,
}

impl SymmetricGame {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.len() < 2 {
            return Err(Error::MalformedGame {
                input: bits_string(&bits),
                reason: "a game needs n >= 1 players (at least 2 bits)".into(),
            });
        }
        Ok(Self {
            n: bits.len() - 1,
            bits,
        })
    }

    /// The game that always wins with output parity 0.
    pub fn all_zero(n: usize) -> Result<Self> {
        Self::new(vec![false; n + 1])
    }

    /// The CHSH game: parity 0 unless both inputs are 1.
    pub fn chsh() -> Self {
        Self {
            n: 2,
            bits: vec![false, false, true],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// `(-1)^{G_j}` as ±1.
    pub fn sign(&self, j: usize) -> f64 {
        if self.bits[j] {
            -1.0
        } else {
            1.0
        }
    }

    pub fn complement(&self) -> Self {
        Self {
            n: self.n,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            n: self.n,
            bits: self.bits.iter().rev().copied().collect(),
        }
    }
}

fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Draws the game for `desc` with `n` players.
pub fn sample_game(n: usize, desc: SampleDescriptor) -> Result<SymmetricGame> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample_game requires n >= 1".into()));
    }
    SymmetricGame::new(desc.bits(n + 1))
}

pub fn format_game(g: &SymmetricGame) -> String {
    format!("{}:{}", g.n, bits_string(&g.bits))
}

pub fn parse_game(text: &str) -> Result<SymmetricGame> {
    let malformed = |reason: &str| Error::MalformedGame {
        input: text.to_string(),
        reason: reason.to_string(),
    };
    let (n_part, bits_part) = text
        .trim()
        .split_once(':')
        .ok_or_else(|| malformed("expected 'n:bits'"))?;
    let n: usize = n_part
        .parse()
        .map_err(|_| malformed("player count is not a nonnegative integer"))?;
    if n == 0 {
        return Err(malformed("n >= 1 required"));
    }
    let bits = bits_part
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(malformed("bits must be '0' or '1'")),
        })
        .collect::<Result<Vec<_>>>()?;
    if bits.len() != n + 1 {
        return Err(malformed(&format!(
            "expected {} bits, found {}",
            n + 1,
            bits.len()
        )));
    }
    SymmetricGame::new(bits)
}

impl fmt::Display for SymmetricGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_game(self))
    }
}

impl FromStr for SymmetricGame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_game(s)
    }
}

/// Parses a game file: one canonical game per line, `#` comment lines and
/// blank lines ignored.
pub fn parse_game_file(text: &str) -> Result<Vec<SymmetricGame>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(parse_game)
        .collect()
}

pub fn format_game_file(games: &[SymmetricGame]) -> String {
    let mut out = String::new();
    for g in games {
        out.push_str(&format_game(g));
        out.push('\n');
    }
    out
}
