//! Two-party string verification over hyperspace parity signals.
//!
//! Both parties share a bank of 2N reference trains, two per bit position
//! (one for bit value 0, one for bit value 1). A party turns its N-bit
//! string into a single *hyperspace signal* by XOR-folding the N selected
//! reference trains slot by slot. Equal strings select identical trains and
//! therefore produce identical signals; strings differing in d >= 1
//! positions produce signals that agree per slot with probability
//! `(1 + (1 - 4p(1-p))^d) / 2`, which is exactly 1/2 for every d and every N
//! when p = 1/2. Comparing M slots then bounds the false-accept probability
//! by `2^-M` regardless of string length; 83 steps push it below ~1e-25.
//!
//! Alice's signal crosses a channel that may drop spikes (never insert
//! them), so with a lossy channel equal strings can be rejected but unequal
//! strings gain no cover. Bob compares the received slots against his own
//! signal and rejects at the first mismatch.
//!
//! Stream-label layout under one clock seed: bank train for (position `i`,
//! bit value `v`) uses label `2i + v`; [`verify`] transmits through label
//! `2N`; the Monte Carlo harness draws string pairs from label `2N + 1`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coincidence::{check_positive, check_probability, pow_prob};
use crate::gates::{self, build_xor_fold};
use crate::spikes::{self, ClockConfig, SpikeTrain};
use crate::{Error, Result};

/// Fixed-length binary string to be verified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidConfig(
                "bit string must have length >= 1".into(),
            ));
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    /// Uniformly random string of `n` bits.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "bit string must have length >= 1".into(),
            ));
        }
        Ok(Self {
            bits: (0..n).map(|_| rng.gen::<bool>()).collect(),
        })
    }

    /// Copy with exactly `distance` uniformly chosen positions flipped.
    pub fn random_at_distance<R: Rng>(&self, distance: usize, rng: &mut R) -> Result<Self> {
        if distance > self.len() {
            return Err(Error::InvalidConfig(format!(
                "distance {distance} exceeds string length {}",
                self.len()
            )));
        }
        let mut bits = self.bits.clone();
        for i in rand::seq::index::sample(rng, self.len(), distance) {
            bits[i] = !bits[i];
        }
        Ok(Self { bits })
    }

    pub fn hamming_distance(&self, other: &BitString) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!(
                    "invalid character '{other}' in bit string"
                ))),
            })
            .collect::<Result<Vec<bool>>>()?;
        BitString::new(bits)
    }
}

/// Which side of the protocol a signal belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Party {
    Alice,
    Bob,
}

/// The 2N reference trains both parties index, two per bit position.
#[derive(Debug, Clone)]
pub struct ReferenceBank {
    clock: ClockConfig,
    n_bits: usize,
    trains: Vec<SpikeTrain>,
}

impl ReferenceBank {
    pub fn clock(&self) -> &ClockConfig {
        &self.clock
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    /// Reference train encoding bit value `value` at `position`.
    pub fn train(&self, position: usize, value: bool) -> &SpikeTrain {
        &self.trains[2 * position + usize::from(value)]
    }

    pub fn trains(&self) -> &[SpikeTrain] {
        &self.trains
    }

    /// Stream label reserved for the channel when this bank's protocol
    /// transmits (the labels below it belong to the bank's trains).
    pub fn channel_stream_label(&self) -> u64 {
        2 * self.n_bits as u64
    }

    /// Stream label reserved for drawing random string pairs in Monte Carlo
    /// runs.
    pub fn pair_stream_label(&self) -> u64 {
        2 * self.n_bits as u64 + 1
    }
}

/// Generates the 2N mutually independent reference trains from stream
/// labels `0..2N`. Both parties construct the identical bank from the
/// shared clock seed.
pub fn make_reference_bank(n_bits: usize, clock: &ClockConfig) -> Result<ReferenceBank> {
    check_positive("N", n_bits)?;
    let trains = (0..2 * n_bits as u64)
        .map(|label| spikes::generate_random_train(clock, label))
        .collect();
    Ok(ReferenceBank {
        clock: *clock,
        n_bits,
        trains,
    })
}

/// How the hyperspace parity signal is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignalEngine {
    /// Word-level XOR fold of the selected trains.
    Direct,
    /// Through the threshold-neuron parity circuit; bit-identical to
    /// `Direct` by construction, kept as an independent route.
    NeuralCircuit,
}

/// One party's hyperspace signal: the XOR fold of its N selected trains.
#[derive(Debug, Clone)]
pub struct HyperspaceSignal {
    signal: SpikeTrain,
    owner: Party,
    clock: ClockConfig,
}

impl HyperspaceSignal {
    pub fn signal(&self) -> &SpikeTrain {
        &self.signal
    }

    pub fn owner(&self) -> Party {
        self.owner
    }

    pub fn clock(&self) -> &ClockConfig {
        &self.clock
    }
}

/// Folds the N trains selected by `s` (train `(i, s_i)` for each position)
/// into the party's hyperspace signal.
pub fn hyperspace_signal(
    bank: &ReferenceBank,
    s: &BitString,
    engine: SignalEngine,
    owner: Party,
) -> Result<HyperspaceSignal> {
    if s.len() != bank.n_bits() {
        return Err(Error::LengthMismatch {
            expected: bank.n_bits(),
            actual: s.len(),
        });
    }
    let selected: Vec<&SpikeTrain> = s
        .iter()
        .enumerate()
        .map(|(i, bit)| bank.train(i, bit))
        .collect();
    let signal = match engine {
        SignalEngine::Direct => spikes::xor_fold(selected.iter().copied())?,
        SignalEngine::NeuralCircuit => {
            let circuit = build_xor_fold(bank.n_bits())?;
            let inputs: HashMap<&str, &SpikeTrain> = circuit
                .ports()
                .iter()
                .zip(selected.iter().copied())
                .map(|(port, train)| (port.as_str(), train))
                .collect();
            gates::run_circuit(&circuit, &inputs)?
        }
    };
    Ok(HyperspaceSignal {
        signal,
        owner,
        clock: *bank.clock(),
    })
}

/// Spike-deleting channel: a transmitted spike is lost with probability
/// `loss_prob`, empty slots always arrive intact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    loss_prob: f64,
}

impl ChannelModel {
    pub fn new(loss_prob: f64) -> Result<Self> {
        check_probability("loss", loss_prob)?;
        Ok(Self { loss_prob })
    }

    /// Channel that delivers every spike.
    pub fn ideal() -> Self {
        Self { loss_prob: 0.0 }
    }

    pub fn loss_prob(&self) -> f64 {
        self.loss_prob
    }
}

/// Sends a signal through the channel, deleting each spike independently
/// with the channel's loss probability. Deletions are drawn from the stream
/// `(signal clock seed, stream_label)`, so a retransmission with the same
/// label loses the same spikes.
pub fn transmit(sig: &HyperspaceSignal, ch: &ChannelModel, stream_label: u64) -> HyperspaceSignal {
    let mut rng = sig.clock.rng(stream_label);
    let loss = ch.loss_prob();
    let bits: Vec<bool> = sig
        .signal
        .iter()
        .map(|spike| spike && !(rng.gen::<f64>() < loss))
        .collect();
    HyperspaceSignal {
        signal: SpikeTrain::from_bools(&bits),
        owner: sig.owner,
        clock: sig.clock,
    }
}

/// Verification verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Accept,
    Reject,
}

/// Outcome of one protocol run.
///
/// `analytic_false_accept_bound` is the worst-case probability that unequal
/// strings would have survived the same comparison; the verifier does not
/// know the true Hamming distance, so the bound uses d = 1 (the maximum
/// over d >= 1, and exact for every d when p = 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationResult {
    pub verdict: Verdict,
    pub steps_compared: usize,
    pub first_mismatch_step: Option<usize>,
    pub analytic_false_accept_bound: f64,
}

/// Runs the protocol: Alice's hyperspace signal crosses the channel, Bob
/// compares the first `m_steps` received slots against his own signal and
/// rejects at the first mismatch.
///
/// Uses the `Direct` signal engine; the neural-circuit engine produces
/// bit-identical signals and is exercised through [`hyperspace_signal`].
pub fn verify(
    a: &BitString,
    b: &BitString,
    bank: &ReferenceBank,
    m_steps: usize,
    ch: &ChannelModel,
) -> Result<VerificationResult> {
    check_positive("M", m_steps)?;
    if m_steps > bank.clock().n_steps() {
        return Err(Error::InvalidConfig(format!(
            "M = {m_steps} exceeds the clock's {} steps",
            bank.clock().n_steps()
        )));
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }

    let alice = hyperspace_signal(bank, a, SignalEngine::Direct, Party::Alice)?;
    let bob = hyperspace_signal(bank, b, SignalEngine::Direct, Party::Bob)?;
    let received = transmit(&alice, ch, bank.channel_stream_label());

    let first_mismatch_step =
        (0..m_steps).find(|&t| received.signal().get(t) != bob.signal().get(t));
    let verdict = if first_mismatch_step.is_some() {
        Verdict::Reject
    } else {
        Verdict::Accept
    };
    Ok(VerificationResult {
        verdict,
        steps_compared: m_steps,
        first_mismatch_step,
        analytic_false_accept_bound: error_bound(m_steps, bank.clock().spike_prob(), 1)?,
    })
}

/// Probability that the two parties' hyperspace signals agree at one slot
/// when the strings differ in exactly `d` positions:
/// `(1 + (1 - 4p(1-p))^d) / 2`.
///
/// The d differing positions select 2d mutually independent trains whose
/// parities are the only surviving terms (shared selections cancel), each
/// slot-value pair disagreeing with probability `2p(1-p)`. For `d = 0` the
/// signals are identical and the value is 1; at `p = 1/2` the value is
/// exactly 1/2 for every `d >= 1`, independent of string length.
pub fn per_step_agreement_probability(p: f64, d: usize) -> Result<f64> {
    check_probability("p", p)?;
    Ok((1.0 + pow_prob(1.0 - 4.0 * p * (1.0 - p), d)) / 2.0)
}

/// False-accept probability over `M` compared slots for strings at Hamming
/// distance `d >= 1`: the per-step agreement probability raised to `M`.
/// At `p = 1/2` this is exactly `2^-M` for every `d` and every `N`.
pub fn error_bound(m_steps: usize, p: f64, d: usize) -> Result<f64> {
    check_positive("M", m_steps)?;
    check_positive("d", d)?;
    Ok(pow_prob(per_step_agreement_probability(p, d)?, m_steps))
}

/// Predicted acceptance probability of a protocol run at the full parameter
/// set, channel loss included.
///
/// Decomposing each party's parity into the shared part `s` (positions
/// where the strings agree) and the private parts `u`, `v` (the `d`
/// differing positions), the per-slot match probability after spike loss
/// `l` is `P(x = y) - l P(x=1, y=1) + l P(x=1, y=0)`. With `d = 0` this
/// reduces to `1 - l * P(signal spike)`, giving the false-reject law
/// `1 - (1 - l/2)^M` at `p = 1/2`; with `l = 0` it reduces to
/// [`error_bound`].
pub fn acceptance_probability(
    n_bits: usize,
    m_steps: usize,
    p: f64,
    d: usize,
    loss: f64,
) -> Result<f64> {
    check_positive("N", n_bits)?;
    check_positive("M", m_steps)?;
    check_probability("p", p)?;
    check_probability("loss", loss)?;
    if d > n_bits {
        return Err(Error::InvalidConfig(format!(
            "d = {d} exceeds N = {n_bits}"
        )));
    }
    // P(parity of k Bernoulli(p) values is odd) = (1 - (1-2p)^k) / 2.
    let odd_parity = |k: usize| (1.0 - pow_prob(1.0 - 2.0 * p, k)) / 2.0;
    let alpha = odd_parity(d); // private-part parity rate, either party
    let sigma = odd_parity(n_bits - d); // shared-part parity rate
    let p_agree = alpha * alpha + (1.0 - alpha) * (1.0 - alpha);
    let p_both_one = (1.0 - sigma) * alpha * alpha + sigma * (1.0 - alpha) * (1.0 - alpha);
    let p_one_zero = alpha * (1.0 - alpha);
    let match_prob = p_agree - loss * p_both_one + loss * p_one_zero;
    Ok(pow_prob(match_prob, m_steps))
}

/// Parameters of a Monte Carlo acceptance-rate estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McParams {
    pub n_bits: usize,
    pub m_steps: usize,
    pub spike_prob: f64,
    pub distance: usize,
    pub loss_prob: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Acceptance-rate estimate with binomial standard error and 99% CI.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub accepts: u64,
    pub trials: u64,
    pub rate: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Normal quantile for a two-sided 99% confidence interval.
const Z_99: f64 = 2.575_829_303_548_9;

/// Estimates the acceptance rate over independent protocol runs: each trial
/// builds a fresh bank from a trial-specific seed, draws a random string
/// pair at Hamming distance exactly `distance`, and runs [`verify`].
///
/// With `distance >= 1` the rate estimates the false-accept probability;
/// `distance = 0` measures completeness. Trials are independent and run in
/// parallel; the result depends only on the parameters, not on scheduling.
pub fn monte_carlo_false_accept(params: &McParams) -> Result<McEstimate> {
    check_positive("N", params.n_bits)?;
    check_positive("M", params.m_steps)?;
    check_probability("p", params.spike_prob)?;
    check_probability("loss", params.loss_prob)?;
    if params.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if params.distance > params.n_bits {
        return Err(Error::InvalidConfig(format!(
            "d = {} exceeds N = {}",
            params.distance, params.n_bits
        )));
    }

    let accepts = (0..params.trials)
        .into_par_iter()
        .map(|trial| u64::from(run_trial(params, trial)))
        .sum::<u64>();

    let trials = params.trials as f64;
    let rate = accepts as f64 / trials;
    let stderr = (rate * (1.0 - rate) / trials).sqrt();
    Ok(McEstimate {
        accepts,
        trials: params.trials,
        rate,
        stderr,
        ci_low: (rate - Z_99 * stderr).max(0.0),
        ci_high: (rate + Z_99 * stderr).min(1.0),
    })
}

fn run_trial(params: &McParams, trial: u64) -> bool {
    let clock = ClockConfig::new(
        params.m_steps,
        params.spike_prob,
        trial_seed(params.seed, trial),
    )
    .expect("parameters validated");
    let bank = make_reference_bank(params.n_bits, &clock).expect("parameters validated");
    let mut pair_rng = clock.rng(bank.pair_stream_label());
    let a = BitString::random(params.n_bits, &mut pair_rng).expect("N validated");
    let b = a
        .random_at_distance(params.distance, &mut pair_rng)
        .expect("distance validated");
    let ch = ChannelModel::new(params.loss_prob).expect("loss validated");
    let result = verify(&a, &b, &bank, params.m_steps, &ch).expect("parameters validated");
    result.verdict == Verdict::Accept
}

/// SplitMix64 expansion of (seed, trial index) into the trial's clock seed.
fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ (trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn clock(n_steps: usize, p: f64, seed: u64) -> ClockConfig {
        ClockConfig::new(n_steps, p, seed).unwrap()
    }

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn bank_has_two_trains_per_position_and_replays_deterministically() {
        let cfg = clock(100, 0.5, 42);
        let bank = make_reference_bank(4, &cfg).unwrap();
        assert_eq!(bank.trains().len(), 8);
        let again = make_reference_bank(4, &cfg).unwrap();
        for (x, y) in bank.trains().iter().zip(again.trains()) {
            assert_eq!(x, y);
        }
        let one = make_reference_bank(1, &cfg).unwrap();
        assert_eq!(one.trains().len(), 2);
    }

    #[test]
    fn bank_trains_are_independent_fair_streams() {
        // Rates within 3 sigma of 1/2 and pairwise equal-slot agreement
        // within 3 sigma of 1/2 (oracle: direct agreement count).
        let n_steps = 10_000;
        let cfg = clock(n_steps, 0.5, 7);
        let bank = make_reference_bank(4, &cfg).unwrap();
        let tol = 3.0 * (n_steps as f64 * 0.25).sqrt();
        for train in bank.trains() {
            let count = train.spike_count() as f64;
            assert!((count - 5000.0).abs() <= tol, "rate off: {count}");
        }
        for i in 0..bank.trains().len() {
            for j in (i + 1)..bank.trains().len() {
                let (a, b) = (&bank.trains()[i], &bank.trains()[j]);
                let agreements = (0..n_steps).filter(|&t| a.get(t) == b.get(t)).count() as f64;
                assert!(
                    (agreements - 5000.0).abs() <= tol,
                    "trains {i},{j} agree {agreements} times"
                );
            }
        }
    }

    #[test]
    fn single_bit_signal_is_the_selected_train() {
        let cfg = clock(200, 0.5, 9);
        let bank = make_reference_bank(1, &cfg).unwrap();
        for (s, value) in [("0", false), ("1", true)] {
            let sig =
                hyperspace_signal(&bank, &bits(s), SignalEngine::Direct, Party::Alice).unwrap();
            assert_eq!(sig.signal(), bank.train(0, value));
        }
    }

    #[test]
    fn equal_strings_give_identical_signals() {
        let cfg = clock(500, 0.5, 10);
        let bank = make_reference_bank(6, &cfg).unwrap();
        let s = bits("101101");
        let alice = hyperspace_signal(&bank, &s, SignalEngine::Direct, Party::Alice).unwrap();
        let bob = hyperspace_signal(&bank, &s, SignalEngine::Direct, Party::Bob).unwrap();
        assert_eq!(alice.signal(), bob.signal());
        assert_eq!(alice.owner(), Party::Alice);
        assert_eq!(bob.owner(), Party::Bob);
    }

    #[test]
    fn engines_produce_identical_signals() {
        let cfg = clock(300, 0.5, 11);
        let bank = make_reference_bank(5, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let s = BitString::random(5, &mut rng).unwrap();
            let direct =
                hyperspace_signal(&bank, &s, SignalEngine::Direct, Party::Alice).unwrap();
            let neural =
                hyperspace_signal(&bank, &s, SignalEngine::NeuralCircuit, Party::Alice).unwrap();
            assert_eq!(direct.signal(), neural.signal(), "string {s}");
        }
    }

    #[test]
    fn signal_rejects_wrong_string_length() {
        let cfg = clock(100, 0.5, 12);
        let bank = make_reference_bank(4, &cfg).unwrap();
        assert!(matches!(
            hyperspace_signal(&bank, &bits("101"), SignalEngine::Direct, Party::Alice),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ideal_channel_is_identity_and_total_loss_silences() {
        let cfg = clock(400, 0.5, 13);
        let bank = make_reference_bank(3, &cfg).unwrap();
        let sig = hyperspace_signal(&bank, &bits("010"), SignalEngine::Direct, Party::Alice)
            .unwrap();
        let intact = transmit(&sig, &ChannelModel::ideal(), 6);
        assert_eq!(intact.signal(), sig.signal());
        let silenced = transmit(&sig, &ChannelModel::new(1.0).unwrap(), 6);
        assert_eq!(silenced.signal().spike_count(), 0);
    }

    #[test]
    fn lossy_channel_deletes_the_expected_fraction() {
        // ~5000 spikes at p=1/2 over 10^4 slots; survivors within 3 sigma
        // of 0.9 of the sent count (oracle: direct spike counts).
        let cfg = clock(10_000, 0.5, 14);
        let bank = make_reference_bank(2, &cfg).unwrap();
        let sig =
            hyperspace_signal(&bank, &bits("10"), SignalEngine::Direct, Party::Alice).unwrap();
        let sent = sig.signal().spike_count() as f64;
        let received = transmit(&sig, &ChannelModel::new(0.1).unwrap(), 4);
        let survived = received.signal().spike_count() as f64;
        let tol = 3.0 * (sent * 0.1 * 0.9).sqrt();
        assert!(
            (survived - 0.9 * sent).abs() <= tol,
            "survived {survived} of {sent}"
        );
        // No insertions: every received spike existed in the original.
        let coincident = spikes::coincidence_count(sig.signal(), received.signal()).unwrap();
        assert_eq!(coincident, received.signal().spike_count());
    }

    #[test]
    fn transmission_is_deterministic_per_label() {
        let cfg = clock(1000, 0.5, 15);
        let bank = make_reference_bank(2, &cfg).unwrap();
        let sig =
            hyperspace_signal(&bank, &bits("01"), SignalEngine::Direct, Party::Alice).unwrap();
        let ch = ChannelModel::new(0.3).unwrap();
        assert_eq!(transmit(&sig, &ch, 9).signal(), transmit(&sig, &ch, 9).signal());
        assert_ne!(
            transmit(&sig, &ch, 9).signal(),
            transmit(&sig, &ch, 10).signal()
        );
    }

    #[test]
    fn equal_strings_always_accept_on_an_ideal_channel() {
        for seed in 0..50 {
            let cfg = clock(128, 0.5, seed);
            let bank = make_reference_bank(8, &cfg).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = BitString::random(8, &mut rng).unwrap();
            let result = verify(&s, &s, &bank, 128, &ChannelModel::ideal()).unwrap();
            assert_eq!(result.verdict, Verdict::Accept, "seed {seed}");
            assert_eq!(result.first_mismatch_step, None);
            assert_eq!(result.steps_compared, 128);
        }
    }

    #[test]
    fn verify_validates_window_and_lengths() {
        let cfg = clock(50, 0.5, 16);
        let bank = make_reference_bank(4, &cfg).unwrap();
        let s = bits("1010");
        assert!(verify(&s, &s, &bank, 51, &ChannelModel::ideal()).is_err());
        assert!(verify(&s, &s, &bank, 0, &ChannelModel::ideal()).is_err());
        assert!(matches!(
            verify(&s, &bits("10100"), &bank, 10, &ChannelModel::ideal()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn agreement_probability_matches_closed_form_points() {
        assert_eq!(per_step_agreement_probability(0.3, 0).unwrap(), 1.0);
        assert_eq!(per_step_agreement_probability(0.5, 1).unwrap(), 0.5);
        assert_eq!(per_step_agreement_probability(0.5, 7).unwrap(), 0.5);
        assert!(
            (per_step_agreement_probability(0.25, 2).unwrap() - 0.53125).abs() < 1e-15
        );
        assert!(per_step_agreement_probability(1.1, 1).is_err());
    }

    #[test]
    fn agreement_probability_matches_joint_enumeration() {
        // Oracle: enumerate the four reference slot values involved when
        // d = 2 and check the parity-agreement weight.
        let p = 0.25f64;
        let mut agree_weight = 0.0;
        for combo in 0..16u32 {
            let vals: Vec<bool> = (0..4).map(|i| (combo >> i) & 1 == 1).collect();
            let weight: f64 = vals.iter().map(|&v| if v { p } else { 1.0 - p }).product();
            // Alice folds vals[0]^vals[1], Bob folds vals[2]^vals[3]; the
            // shared part cancels when comparing.
            if (vals[0] ^ vals[1]) == (vals[2] ^ vals[3]) {
                agree_weight += weight;
            }
        }
        let formula = per_step_agreement_probability(p, 2).unwrap();
        assert!((agree_weight - formula).abs() < 1e-15);
    }

    #[test]
    fn error_bound_reference_points() {
        assert_eq!(error_bound(1, 0.5, 1).unwrap(), 0.5);
        assert_eq!(error_bound(8, 0.5, 1).unwrap(), 0.00390625);
        assert_eq!(error_bound(83, 0.5, 1).unwrap(), 2f64.powi(-83));
        assert_eq!(error_bound(83, 0.5, 5).unwrap(), 2f64.powi(-83));
        let mixed = error_bound(8, 0.25, 1).unwrap();
        assert!((mixed - 0.625f64.powi(8)).abs() < 1e-15);
        assert!(error_bound(0, 0.5, 1).is_err());
        assert!(error_bound(8, 0.5, 0).is_err());
    }

    #[test]
    fn acceptance_probability_specializes_correctly() {
        // Lossless: reduces to the error bound for any d >= 1.
        for d in 1..=3usize {
            let full = acceptance_probability(8, 12, 0.3, d, 0.0).unwrap();
            let bound = error_bound(12, 0.3, d).unwrap();
            assert!((full - bound).abs() < 1e-15, "d={d}");
        }
        // Equal strings, lossy: the p=1/2 false-reject law 1-(1-l/2)^M.
        let accept = acceptance_probability(16, 8, 0.5, 0, 0.1).unwrap();
        assert!((accept - 0.95f64.powi(8)).abs() < 1e-15);
        // Equal strings, ideal channel: certainty.
        assert_eq!(acceptance_probability(16, 8, 0.5, 0, 0.0).unwrap(), 1.0);
        assert!(acceptance_probability(4, 8, 0.5, 5, 0.0).is_err());
    }

    #[test]
    fn monte_carlo_matches_error_bound_at_m8() {
        let params = McParams {
            n_bits: 8,
            m_steps: 8,
            spike_prob: 0.5,
            distance: 1,
            loss_prob: 0.0,
            trials: 100_000,
            seed: 2024,
        };
        let est = monte_carlo_false_accept(&params).unwrap();
        let expected = error_bound(8, 0.5, 1).unwrap();
        let sigma = (expected * (1.0 - expected) / params.trials as f64).sqrt();
        assert!(
            (est.rate - expected).abs() <= 3.0 * sigma,
            "rate {} vs {expected}",
            est.rate
        );
        assert!(est.ci_low <= est.rate && est.rate <= est.ci_high);
    }

    #[test]
    fn monte_carlo_matches_error_bound_at_p_quarter() {
        // Oracle check of the mixed-rate bound 0.625^8 at p = 1/4, d = 1.
        let params = McParams {
            n_bits: 6,
            m_steps: 8,
            spike_prob: 0.25,
            distance: 1,
            loss_prob: 0.0,
            trials: 60_000,
            seed: 5,
        };
        let est = monte_carlo_false_accept(&params).unwrap();
        let expected = error_bound(8, 0.25, 1).unwrap();
        let sigma = (expected * (1.0 - expected) / params.trials as f64).sqrt();
        assert!(
            (est.rate - expected).abs() <= 3.0 * sigma,
            "rate {} vs {expected}",
            est.rate
        );
    }

    #[test]
    fn monte_carlo_distance_zero_always_accepts() {
        let params = McParams {
            n_bits: 4,
            m_steps: 6,
            spike_prob: 0.5,
            distance: 0,
            loss_prob: 0.0,
            trials: 2_000,
            seed: 99,
        };
        let est = monte_carlo_false_accept(&params).unwrap();
        assert_eq!(est.accepts, est.trials);
        assert_eq!(est.rate, 1.0);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_validates_parameters() {
        let params = McParams {
            n_bits: 4,
            m_steps: 4,
            spike_prob: 0.5,
            distance: 1,
            loss_prob: 0.0,
            trials: 5_000,
            seed: 7,
        };
        let a = monte_carlo_false_accept(&params).unwrap();
        let b = monte_carlo_false_accept(&params).unwrap();
        assert_eq!(a.accepts, b.accepts);

        let bad_d = McParams {
            distance: 5,
            ..params
        };
        assert!(monte_carlo_false_accept(&bad_d).is_err());
        let bad_trials = McParams { trials: 0, ..params };
        assert!(monte_carlo_false_accept(&bad_trials).is_err());
    }

    #[test]
    fn rejection_step_is_geometric_at_half() {
        // For unequal strings at p = 1/2 each compared slot mismatches
        // independently with probability 1/2, so the first mismatch step is
        // geometric: ~half the rejects happen at step 0, mean ~1.
        let mut first_steps = Vec::new();
        for seed in 0..4000u64 {
            let cfg = clock(64, 0.5, seed);
            let bank = make_reference_bank(8, &cfg).unwrap();
            let a = bits("10110100");
            let b = bits("10110101");
            let result = verify(&a, &b, &bank, 64, &ChannelModel::ideal()).unwrap();
            if let Some(step) = result.first_mismatch_step {
                first_steps.push(step as f64);
            }
        }
        let n = first_steps.len() as f64;
        // P(no mismatch in 64 slots) = 2^-64; every run should reject.
        assert_eq!(first_steps.len(), 4000);
        let mean = first_steps.iter().sum::<f64>() / n;
        // Geometric(1/2) starting at 0: mean 1, variance 2.
        let tol = 3.0 * (2.0f64 / n).sqrt();
        assert!((mean - 1.0).abs() <= tol, "mean first mismatch {mean}");
        let at_zero = first_steps.iter().filter(|&&s| s == 0.0).count() as f64 / n;
        let tol0 = 3.0 * (0.25f64 / n).sqrt();
        assert!((at_zero - 0.5).abs() <= tol0, "step-0 fraction {at_zero}");
    }

    #[test]
    fn bit_string_distance_sampling_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = BitString::random(32, &mut rng).unwrap();
        for d in [0usize, 1, 5, 32] {
            let b = a.random_at_distance(d, &mut rng).unwrap();
            assert_eq!(a.hamming_distance(&b).unwrap(), d);
        }
        assert!(a.random_at_distance(33, &mut rng).is_err());
    }

    #[test]
    fn bit_string_parsing_and_display() {
        let s = bits("0101");
        assert_eq!(s.to_string(), "0101");
        assert_eq!(s.len(), 4);
        assert!(!s.get(0) && s.get(1));
        assert!("".parse::<BitString>().is_err());
        assert!("012".parse::<BitString>().is_err());
    }
}
