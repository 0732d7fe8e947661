//! Presence/absence readout of a reference component inside a superposition.
//!
//! The detector scans clock slots in order and acts on the reference train's
//! spikes. In `ExactOrthogonal` mode (all trains drawn from one orthogonal
//! set) the very first reference spike settles the question with no error
//! possible. In `Independent` mode the first reference spike the
//! superposition fails to cover proves absence outright, while a covered run
//! of `k` reference spikes leaves a residual false-positive risk of `q^k`.
//! Either way the probability of seeing no verdict at all within a window of
//! `T` slots is `(1 - p)^T`, shrinking exponentially with the window.

use std::io::Write;

use serde::Serialize;

use crate::spikes::{self, ClockConfig, SpikeTrain, Superposition};
use crate::{Error, Result};

/// Detector mode: trust exact orthogonality, or treat the superposition
/// members as merely independent of the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DetectorMode {
    ExactOrthogonal,
    Independent,
}

/// Observation window and mode for one detection run.
#[derive(Debug, Clone, Copy)]
pub struct DetectorConfig {
    max_window: usize,
    mode: DetectorMode,
}

impl DetectorConfig {
    pub fn new(max_window: usize, mode: DetectorMode) -> Result<Self> {
        if max_window == 0 {
            return Err(Error::InvalidConfig("max_window must be at least 1".into()));
        }
        Ok(Self { max_window, mode })
    }

    pub fn max_window(&self) -> usize {
        self.max_window
    }

    pub fn mode(&self) -> DetectorMode {
        self.mode
    }
}

/// Detection verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Present,
    Absent,
    Undecided,
}

/// Verdict plus where and on how much evidence it was reached.
///
/// `decision_step` is the slot that settled the verdict (`None` when
/// undecided). `evidence_count` is the number of reference spikes examined
/// up to and including that slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DetectionOutcome {
    pub verdict: Verdict,
    pub decision_step: Option<usize>,
    pub evidence_count: usize,
}

/// Scans `cfg.max_window()` slots for reference spikes and decides whether
/// the component is in the superposition.
///
/// In exact-orthogonal mode the caller guarantees that the reference and all
/// superposition members came from one orthogonal set; that precondition is
/// not checkable here, and with it the verdict is error-free. In independent
/// mode an `Absent` verdict is always correct, while `Present` carries a
/// false-positive probability of `q^evidence_count` where `q` is the
/// superposition's per-slot spike rate.
pub fn detect_component(
    reference: &SpikeTrain,
    sup: &Superposition,
    cfg: &DetectorConfig,
) -> Result<DetectionOutcome> {
    let signal = sup.signal();
    if reference.len() != signal.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            actual: signal.len(),
        });
    }
    if cfg.max_window() > reference.len() {
        return Err(Error::WindowTooLarge {
            window: cfg.max_window(),
            len: reference.len(),
        });
    }

    match cfg.mode() {
        DetectorMode::ExactOrthogonal => {
            for t in 0..cfg.max_window() {
                if reference.get(t) {
                    let verdict = if signal.get(t) {
                        Verdict::Present
                    } else {
                        Verdict::Absent
                    };
                    return Ok(DetectionOutcome {
                        verdict,
                        decision_step: Some(t),
                        evidence_count: 1,
                    });
                }
            }
            Ok(DetectionOutcome {
                verdict: Verdict::Undecided,
                decision_step: None,
                evidence_count: 0,
            })
        }
        DetectorMode::Independent => {
            let mut covered = 0usize;
            let mut last_covered_slot = None;
            for t in 0..cfg.max_window() {
                if reference.get(t) {
                    if signal.get(t) {
                        covered += 1;
                        last_covered_slot = Some(t);
                    } else {
                        // One uncovered reference spike proves absence.
                        return Ok(DetectionOutcome {
                            verdict: Verdict::Absent,
                            decision_step: Some(t),
                            evidence_count: covered + 1,
                        });
                    }
                }
            }
            match last_covered_slot {
                Some(t) => Ok(DetectionOutcome {
                    verdict: Verdict::Present,
                    decision_step: Some(t),
                    evidence_count: covered,
                }),
                None => Ok(DetectionOutcome {
                    verdict: Verdict::Undecided,
                    decision_step: None,
                    evidence_count: 0,
                }),
            }
        }
    }
}

/// Probability `(1 - p)^T` that a reference with per-slot rate `p` stays
/// silent for `T` slots, leaving the detector undecided.
pub fn undecided_probability(p: f64, window: usize) -> Result<f64> {
    check_probability("p", p)?;
    check_positive("T", window)?;
    Ok(pow_prob(1.0 - p, window))
}

/// Probability `q^k` that `k` reference spikes are all covered by chance,
/// where `q` is the per-slot spike rate of the superposition without the
/// reference component.
pub fn false_positive_probability(q: f64, k: usize) -> Result<f64> {
    check_probability("q", q)?;
    check_positive("k", k)?;
    Ok(pow_prob(q, k))
}

pub(crate) fn check_probability(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidConfig(format!(
            "{name} = {value} outside [0, 1]"
        )));
    }
    Ok(())
}

pub(crate) fn check_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// Integer power of a probability; `powi` keeps powers of two exact.
pub(crate) fn pow_prob(base: f64, exp: usize) -> f64 {
    debug_assert!(exp <= i32::MAX as usize);
    base.powi(exp as i32)
}

/// One detector run of the demo: a component tested against superposition
/// `A` or `B`.
#[derive(Debug, Clone, Serialize)]
pub struct DemoRow {
    pub component_id: usize,
    pub superposition: char,
    pub verdict: Verdict,
    pub decision_step: Option<usize>,
    pub evidence_count: usize,
}

/// Verdict table for every (component, superposition) pair, plus the ground
/// truth the superpositions were built from.
#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub rows: Vec<DemoRow>,
    pub memberships_a: Vec<usize>,
    pub memberships_b: Vec<usize>,
}

impl DemoReport {
    /// `component_id,superposition,verdict,decision_step,evidence_count`
    /// rows; `decision_step` is empty when undecided.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "component_id,superposition,verdict,decision_step,evidence_count"
        )?;
        for row in &self.rows {
            let step = row
                .decision_step
                .map(|s| s.to_string())
                .unwrap_or_default();
            writeln!(
                w,
                "{},{},{:?},{},{}",
                row.component_id, row.superposition, row.verdict, step, row.evidence_count
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// True when every verdict is consistent with the recorded memberships
    /// (undecided rows are ignored; they are not errors).
    pub fn verdicts_match_ground_truth(&self) -> bool {
        self.rows.iter().all(|row| {
            let members = match row.superposition {
                'A' => &self.memberships_a,
                _ => &self.memberships_b,
            };
            let truth = members.contains(&row.component_id);
            match row.verdict {
                Verdict::Present => truth,
                Verdict::Absent => !truth,
                Verdict::Undecided => true,
            }
        })
    }
}

/// Builds one orthogonal set of `k_components` trains, superposes the two
/// given membership subsets into signals `A` and `B`, and runs the detector
/// for every (component, superposition) pair.
pub fn run_demo(
    k_components: usize,
    memberships_a: &[usize],
    memberships_b: &[usize],
    clock: &ClockConfig,
    cfg: &DetectorConfig,
) -> Result<DemoReport> {
    let set = spikes::generate_orthogonal_set(clock, k_components)?;
    let build = |members: &[usize]| -> Result<Superposition> {
        for &id in members {
            if id >= k_components {
                return Err(Error::UnknownComponent {
                    id,
                    count: k_components,
                });
            }
        }
        if members.is_empty() {
            return Ok(Superposition::empty(clock.n_steps()));
        }
        spikes::superpose(members.iter().map(|&id| (id, &set.trains()[id])))
    };
    let sup_a = build(memberships_a)?;
    let sup_b = build(memberships_b)?;

    let mut rows = Vec::with_capacity(2 * k_components);
    for (id, reference) in set.trains().iter().enumerate() {
        for (label, sup) in [('A', &sup_a), ('B', &sup_b)] {
            let outcome = detect_component(reference, sup, cfg)?;
            rows.push(DemoRow {
                component_id: id,
                superposition: label,
                verdict: outcome.verdict,
                decision_step: outcome.decision_step,
                evidence_count: outcome.evidence_count,
            });
        }
    }
    Ok(DemoReport {
        rows,
        memberships_a: memberships_a.to_vec(),
        memberships_b: memberships_b.to_vec(),
    })
}
