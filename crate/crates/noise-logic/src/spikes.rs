//! Clocked stochastic spike trains, the signal substrate for everything else.
//!
//! A train is a fixed-length sequence of binary slots over a discrete clock;
//! slot value 1 means a spike fired in that slot. Trains are generated from a
//! [`ClockConfig`] through labeled RNG streams, so identical
//! `(seed, stream_label, config)` always reproduces the identical train.
//! Orthogonal sets are built constructively (one categorical draw per slot),
//! which guarantees the zero-coincidence invariant instead of merely making
//! it likely.
//!
//! With `spike_prob = 1/2` a train is a clocked fair coin per slot, the
//! bitstream equivalent of a bipolar random telegraph wave with XOR standing
//! in for sign multiplication.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, BufRead, Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Discrete clock shared by a family of trains: slot count, per-slot spike
/// probability, and the 64-bit seed that roots every labeled RNG stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockConfig {
    n_steps: usize,
    spike_prob: f64,
    seed: u64,
}

impl ClockConfig {
    /// Validates `n_steps >= 1` and `spike_prob` in `[0, 1]`.
    pub fn new(n_steps: usize, spike_prob: f64, seed: u64) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidConfig("n_steps must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&spike_prob) {
            return Err(Error::InvalidConfig(format!(
                "spike_prob {spike_prob} outside [0, 1]"
            )));
        }
        Ok(Self {
            n_steps,
            spike_prob,
            seed,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn spike_prob(&self) -> f64 {
        self.spike_prob
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The labeled RNG stream `(seed, stream_label)`. Streams with distinct
    /// labels are independent; concurrent workers must partition labels
    /// rather than share generator state.
    pub fn rng(&self, stream_label: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream_label);
        rng
    }
}

/// Fixed-length binary spike sequence, packed 64 slots per word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeTrain {
    words: Vec<u64>,
    len: usize,
}

impl SpikeTrain {
    /// All-zero train of `len` slots.
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut train = Self::zeros(bits.len());
        for (t, &b) in bits.iter().enumerate() {
            if b {
                train.set(t);
            }
        }
        train
    }

    /// Number of clock slots.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Slot value at `t`. Panics if `t` is out of range.
    #[inline]
    pub fn get(&self, t: usize) -> bool {
        assert!(t < self.len, "slot {t} out of range ({} slots)", self.len);
        (self.words[t / 64] >> (t % 64)) & 1 == 1
    }

    #[inline]
    fn set(&mut self, t: usize) {
        self.words[t / 64] |= 1u64 << (t % 64);
    }

    /// Total number of spikes.
    pub fn spike_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |t| self.get(t))
    }

    /// Slot of the first spike, scanning in clock order.
    pub fn first_spike(&self) -> Option<usize> {
        for (i, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(i * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Slot-wise OR.
    pub fn or(&self, other: &SpikeTrain) -> Result<SpikeTrain> {
        self.check_len(other)?;
        Ok(SpikeTrain {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
            len: self.len,
        })
    }

    /// Slot-wise XOR (parity).
    pub fn xor(&self, other: &SpikeTrain) -> Result<SpikeTrain> {
        self.check_len(other)?;
        Ok(SpikeTrain {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
            len: self.len,
        })
    }

    fn check_len(&self, other: &SpikeTrain) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }

    /// Unpadded `0`/`1` character string, slot 0 first.
    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for SpikeTrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

impl FromStr for SpikeTrain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("empty spike train string".into()));
        }
        let mut train = SpikeTrain::zeros(s.len());
        for (t, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => train.set(t),
                other => {
                    return Err(Error::Parse(format!(
                        "invalid character '{other}' at slot {t}; expected 0 or 1"
                    )))
                }
            }
        }
        Ok(train)
    }
}

/// `k` trains that never spike in the same slot, plus the clock they share.
#[derive(Debug, Clone)]
pub struct OrthogonalSet {
    trains: Vec<SpikeTrain>,
    clock: ClockConfig,
}

impl OrthogonalSet {
    pub fn trains(&self) -> &[SpikeTrain] {
        &self.trains
    }

    pub fn train(&self, id: usize) -> Result<&SpikeTrain> {
        self.trains.get(id).ok_or(Error::UnknownComponent {
            id,
            count: self.trains.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.trains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trains.is_empty()
    }

    pub fn clock(&self) -> &ClockConfig {
        &self.clock
    }
}

/// Slot-wise OR of component trains, with the ground-truth member ids kept
/// alongside for validation.
#[derive(Debug, Clone)]
pub struct Superposition {
    signal: SpikeTrain,
    member_ids: BTreeSet<usize>,
}

impl Superposition {
    /// Superposition of nothing: an all-zero signal.
    pub fn empty(n_steps: usize) -> Self {
        Self {
            signal: SpikeTrain::zeros(n_steps),
            member_ids: BTreeSet::new(),
        }
    }

    pub fn signal(&self) -> &SpikeTrain {
        &self.signal
    }

    pub fn member_ids(&self) -> &BTreeSet<usize> {
        &self.member_ids
    }

    /// Ground-truth membership test (testing support, not part of the
    /// detection path).
    pub fn contains(&self, id: usize) -> bool {
        self.member_ids.contains(&id)
    }
}

/// Draws one train of independent Bernoulli(`spike_prob`) slots from the
/// stream `(clock.seed, stream_label)`.
pub fn generate_random_train(clock: &ClockConfig, stream_label: u64) -> SpikeTrain {
    let mut rng = clock.rng(stream_label);
    let p = clock.spike_prob();
    let mut train = SpikeTrain::zeros(clock.n_steps());
    for t in 0..clock.n_steps() {
        if rng.gen::<f64>() < p {
            train.set(t);
        }
    }
    train
}

/// Builds `k` pairwise-orthogonal trains by categorical slot assignment:
/// each slot belongs to train `j` with probability `spike_prob` (for each
/// `j`), or to no train with the remaining probability. The construction is
/// exact, so cross-train coincidences are impossible, and each train keeps
/// the marginal per-slot rate `spike_prob`.
///
/// Uses stream label 0 of the clock's seed.
pub fn generate_orthogonal_set(clock: &ClockConfig, k: usize) -> Result<OrthogonalSet> {
    if k == 0 {
        return Err(Error::InvalidConfig("orthogonal set needs k >= 1".into()));
    }
    let p = clock.spike_prob();
    let total = k as f64 * p;
    if total > 1.0 {
        return Err(Error::InfeasibleOrthogonal { k, p, product: total });
    }
    let mut rng = clock.rng(0);
    let mut trains = vec![SpikeTrain::zeros(clock.n_steps()); k];
    if p > 0.0 {
        for t in 0..clock.n_steps() {
            let u = rng.gen::<f64>();
            if u < total {
                // Categorical draw: u in [j*p, (j+1)*p) selects train j.
                // The min() guards the float-division edge at u = total.
                let j = ((u / p) as usize).min(k - 1);
                trains[j].set(t);
            }
        }
    }
    Ok(OrthogonalSet {
        trains,
        clock: *clock,
    })
}

/// Slot-wise OR of the member trains, recording which ids participated.
pub fn superpose<'a, I>(members: I) -> Result<Superposition>
where
    I: IntoIterator<Item = (usize, &'a SpikeTrain)>,
{
    let mut iter = members.into_iter();
    let (first_id, first) = iter
        .next()
        .ok_or(Error::EmptyInput("superpose needs at least one member"))?;
    let mut signal = first.clone();
    let mut member_ids = BTreeSet::from([first_id]);
    for (id, train) in iter {
        signal = signal.or(train)?;
        member_ids.insert(id);
    }
    Ok(Superposition { signal, member_ids })
}

/// Slot-wise parity of all input trains. Grouping-invariant: any nesting of
/// pairwise XORs over the same multiset gives the same output.
pub fn xor_fold<'a, I>(trains: I) -> Result<SpikeTrain>
where
    I: IntoIterator<Item = &'a SpikeTrain>,
{
    let mut iter = trains.into_iter();
    let first = iter
        .next()
        .ok_or(Error::EmptyInput("xor_fold needs at least one train"))?;
    let mut acc = first.clone();
    for train in iter {
        acc = acc.xor(train)?;
    }
    Ok(acc)
}

/// Number of slots where both trains spike.
pub fn coincidence_count(a: &SpikeTrain, b: &SpikeTrain) -> Result<usize> {
    a.check_len(b)?;
    Ok(a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x & y).count_ones() as usize)
        .sum())
}

// ── Serialization ────────────────────────────────────────────────────────
//
// Text form: a header line `n_steps=<int> p=<float> seed=<int>` followed by
// one unpadded 0/1 string per train. JSON form mirrors the same fields.

#[derive(Serialize, Deserialize)]
struct TrainFileJson {
    n_steps: usize,
    p: f64,
    seed: u64,
    trains: Vec<String>,
}

/// Writes the text form of a train collection.
pub fn write_trains_text<W: Write>(
    w: &mut W,
    clock: &ClockConfig,
    trains: &[SpikeTrain],
) -> io::Result<()> {
    writeln!(
        w,
        "n_steps={} p={} seed={}",
        clock.n_steps(),
        clock.spike_prob(),
        clock.seed()
    )?;
    for train in trains {
        writeln!(w, "{train}")?;
    }
    Ok(())
}

/// Reads the text form back; every train must match the header's `n_steps`.
pub fn read_trains_text<R: BufRead>(r: R) -> Result<(ClockConfig, Vec<SpikeTrain>)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("missing header line".into()))??;
    let clock = parse_header(&header)?;
    let mut trains = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let train: SpikeTrain = line.parse()?;
        if train.len() != clock.n_steps() {
            return Err(Error::LengthMismatch {
                expected: clock.n_steps(),
                actual: train.len(),
            });
        }
        trains.push(train);
    }
    Ok((clock, trains))
}

fn parse_header(header: &str) -> Result<ClockConfig> {
    let mut n_steps = None;
    let mut p = None;
    let mut seed = None;
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed header field '{field}'")))?;
        match key {
            "n_steps" => {
                n_steps = Some(value.parse::<usize>().map_err(|e| {
                    Error::Parse(format!("bad n_steps '{value}': {e}"))
                })?)
            }
            "p" => {
                p = Some(
                    value
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad p '{value}': {e}")))?,
                )
            }
            "seed" => {
                seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|e| Error::Parse(format!("bad seed '{value}': {e}")))?,
                )
            }
            other => return Err(Error::Parse(format!("unknown header field '{other}'"))),
        }
    }
    match (n_steps, p, seed) {
        (Some(n), Some(p), Some(s)) => ClockConfig::new(n, p, s),
        _ => Err(Error::Parse(
            "header must contain n_steps, p and seed".into(),
        )),
    }
}

/// Writes the JSON form: `{"n_steps":, "p":, "seed":, "trains":["0101...",]}`.
pub fn write_trains_json<W: Write>(
    w: &mut W,
    clock: &ClockConfig,
    trains: &[SpikeTrain],
) -> Result<()> {
    let file = TrainFileJson {
        n_steps: clock.n_steps(),
        p: clock.spike_prob(),
        seed: clock.seed(),
        trains: trains.iter().map(|t| t.to_bit_string()).collect(),
    };
    serde_json::to_writer_pretty(&mut *w, &file)?;
    writeln!(w)?;
    Ok(())
}

/// Reads the JSON form back with the same validation as the text reader.
pub fn read_trains_json<R: Read>(r: R) -> Result<(ClockConfig, Vec<SpikeTrain>)> {
    let file: TrainFileJson = serde_json::from_reader(r)?;
    let clock = ClockConfig::new(file.n_steps, file.p, file.seed)?;
    let mut trains = Vec::with_capacity(file.trains.len());
    for s in &file.trains {
        let train: SpikeTrain = s.parse()?;
        if train.len() != clock.n_steps() {
            return Err(Error::LengthMismatch {
                expected: clock.n_steps(),
                actual: train.len(),
            });
        }
        trains.push(train);
    }
    Ok((clock, trains))
}
