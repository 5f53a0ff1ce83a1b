//! Per-device harvest-state traces: synthetic i.i.d. generation, threshold
//! binarization of raw readings, and CSV ingestion.
//!
//! A trace holds one bit per slot: `1` when the harvested power reached the
//! usability threshold in that slot (one unit of energy), `0` otherwise.
//! Slots are 1-based throughout the public API.

use std::fmt;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Probability;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(pub String);

impl DeviceId {
    pub fn new(id: impl Into<String>) -> Self {
        DeviceId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Binary harvest states `b(t)` for one device over a period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyTrace {
    device_id: DeviceId,
    states: Vec<bool>,
}

impl EnergyTrace {
    pub fn new(device_id: DeviceId, states: Vec<bool>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::parameter("period_len", "a trace needs at least one slot"));
        }
        Ok(EnergyTrace { device_id, states })
    }

    /// Builds a trace from `0`/`1` integers, rejecting anything else.
    pub fn from_bits(device_id: DeviceId, bits: &[u8]) -> Result<Self> {
        let states = bits
            .iter()
            .enumerate()
            .map(|(i, &b)| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Ingest {
                    row: i + 1,
                    reason: format!("energy state must be 0 or 1, got {other}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        EnergyTrace::new(device_id, states)
    }

    /// A trace of `period_len` slots that harvests exactly at `slots`.
    pub fn from_slots(device_id: DeviceId, period_len: usize, slots: &[usize]) -> Result<Self> {
        let mut states = vec![false; period_len];
        for (i, &slot) in slots.iter().enumerate() {
            if slot == 0 || slot > period_len {
                return Err(Error::Ingest {
                    row: i + 1,
                    reason: format!("slot {slot} outside 1..={period_len}"),
                });
            }
            states[slot - 1] = true;
        }
        EnergyTrace::new(device_id, states)
    }

    pub fn device_id(&self) -> &DeviceId {
        &self.device_id
    }

    pub fn period_len(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[bool] {
        &self.states
    }

    /// State at 1-based `slot`.
    pub fn harvests_at(&self, slot: usize) -> bool {
        slot >= 1 && self.states.get(slot - 1).copied().unwrap_or(false)
    }

    /// Ascending 1-based slots with `b(t) = 1`.
    pub fn harvest_slots(&self) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i + 1))
            .collect()
    }

    pub fn harvest_count(&self) -> usize {
        self.states.iter().filter(|&&b| b).count()
    }
}

/// I.i.d. Bernoulli arrival model for one device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalModel {
    pub prob_harvest: Probability,
    pub period_len: usize,
    pub seed: u64,
}

impl ArrivalModel {
    pub fn new(prob_harvest: f64, period_len: usize, seed: u64) -> Result<Self> {
        let prob_harvest = Probability::new(prob_harvest)
            .map_err(|_| Error::parameter("prob_harvest", format!("{prob_harvest} is outside [0, 1]")))?;
        if period_len == 0 {
            return Err(Error::parameter("period_len", "must be at least 1"));
        }
        Ok(ArrivalModel { prob_harvest, period_len, seed })
    }
}

/// Draws a trace slot by slot from the `(seed, device)` trace stream.
pub fn generate_trace(model: &ArrivalModel, device_id: DeviceId) -> Result<EnergyTrace> {
    if model.period_len == 0 {
        return Err(Error::parameter("period_len", "must be at least 1"));
    }
    let p = model.prob_harvest.get();
    let mut rng = rng::stream(model.seed, rng::TRACE_DOMAIN, device_id.as_str());
    let states = (0..model.period_len).map(|_| rng.random_bool(p)).collect();
    EnergyTrace::new(device_id, states)
}

/// Generates the `(u, v)` traces of a device pair from a shared seed. The two
/// devices draw from independent sub-streams.
pub fn generate_pair(
    prob_u: f64,
    prob_v: f64,
    period_len: usize,
    seed: u64,
) -> Result<(EnergyTrace, EnergyTrace)> {
    let u = generate_trace(&ArrivalModel::new(prob_u, period_len, seed)?, DeviceId::new("u"))?;
    let v = generate_trace(&ArrivalModel::new(prob_v, period_len, seed)?, DeviceId::new("v"))?;
    Ok((u, v))
}

/// Fraction of slots with `b(t) = 1`.
pub fn estimate_prob(trace: &EnergyTrace) -> f64 {
    trace.harvest_count() as f64 / trace.period_len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSample {
    pub slot: usize,
    /// Harvested power reading, volts.
    pub reading: f64,
    /// 1-based data row the sample came from.
    pub row: usize,
}

/// Real-valued readings for one device before binarization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrace {
    device_id: DeviceId,
    samples: Vec<RawSample>,
}

impl RawTrace {
    /// Samples are `(slot, reading)` pairs; rows are numbered by position.
    pub fn new(device_id: DeviceId, samples: &[(usize, f64)]) -> Result<Self> {
        let samples = samples
            .iter()
            .enumerate()
            .map(|(i, &(slot, reading))| RawSample { slot, reading, row: i + 1 })
            .collect();
        RawTrace::from_samples(device_id, samples)
    }

    pub fn from_samples(device_id: DeviceId, samples: Vec<RawSample>) -> Result<Self> {
        let mut prev = 0usize;
        for s in &samples {
            if s.slot == 0 {
                return Err(Error::Ingest { row: s.row, reason: "slot index is 1-based".into() });
            }
            if s.slot <= prev {
                return Err(Error::Ingest {
                    row: s.row,
                    reason: format!("slot {} does not follow slot {prev}", s.slot),
                });
            }
            if !s.reading.is_finite() || s.reading < 0.0 {
                return Err(Error::Ingest {
                    row: s.row,
                    reason: format!("reading {} must be finite and non-negative", s.reading),
                });
            }
            prev = s.slot;
        }
        Ok(RawTrace { device_id, samples })
    }

    pub fn device_id(&self) -> &DeviceId {
        &self.device_id
    }

    pub fn samples(&self) -> &[RawSample] {
        &self.samples
    }
}

/// Binarizes readings: `b(t) = 1` iff slot `t` has a reading `>= threshold`.
/// Slots without a sample are `0`.
pub fn threshold_trace(raw: &RawTrace, threshold: f64, period_len: usize) -> Result<EnergyTrace> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::parameter("threshold", format!("{threshold} must be positive")));
    }
    if period_len == 0 {
        return Err(Error::parameter("period_len", "must be at least 1"));
    }
    let mut states = vec![false; period_len];
    for s in &raw.samples {
        if s.slot > period_len {
            return Err(Error::Ingest {
                row: s.row,
                reason: format!("slot {} outside 1..={period_len}", s.slot),
            });
        }
        states[s.slot - 1] = s.reading >= threshold;
    }
    EnergyTrace::new(raw.device_id.clone(), states)
}

#[derive(Debug, Serialize, Deserialize)]
struct BinaryRow {
    slot: usize,
    b_u: u8,
    b_v: u8,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRow {
    slot: usize,
    device_id: String,
    reading: f64,
}

/// Header of the two-device binary trace CSV.
pub const BINARY_CSV_HEADER: &str = "slot,b_u,b_v";
/// Header of the raw reading CSV.
pub const RAW_CSV_HEADER: &str = "slot,device_id,reading";

/// Writes `slot,b_u,b_v` rows for a device pair.
pub fn write_binary_csv<W: Write>(out: W, u: &EnergyTrace, v: &EnergyTrace) -> Result<()> {
    if u.period_len() != v.period_len() {
        return Err(Error::PeriodMismatch { left: u.period_len(), right: v.period_len() });
    }
    let mut w = csv::Writer::from_writer(out);
    for (i, (&bu, &bv)) in u.states.iter().zip(&v.states).enumerate() {
        w.serialize(BinaryRow { slot: i + 1, b_u: bu as u8, b_v: bv as u8 })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `slot,b_u,b_v` file. Slots must run 1, 2, 3, ... without gaps.
pub fn read_binary_csv<R: Read>(input: R) -> Result<(EnergyTrace, EnergyTrace)> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, BINARY_CSV_HEADER)?;
    let mut bu = Vec::new();
    let mut bv = Vec::new();
    for (i, rec) in r.deserialize::<BinaryRow>().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Ingest { row, reason: e.to_string() })?;
        if rec.slot != row {
            return Err(Error::Ingest { row, reason: format!("expected slot {row}, found {}", rec.slot) });
        }
        for b in [rec.b_u, rec.b_v] {
            if b > 1 {
                return Err(Error::Ingest { row, reason: format!("energy state must be 0 or 1, got {b}") });
            }
        }
        bu.push(rec.b_u == 1);
        bv.push(rec.b_v == 1);
    }
    if bu.is_empty() {
        return Err(Error::Ingest { row: 0, reason: "trace file has no rows".into() });
    }
    Ok((EnergyTrace::new(DeviceId::new("u"), bu)?, EnergyTrace::new(DeviceId::new("v"), bv)?))
}

/// Writes raw samples of any number of devices, device by device.
pub fn write_raw_csv<W: Write>(out: W, traces: &[RawTrace]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RAW_CSV_HEADER.split(','))?;
    for t in traces {
        for s in &t.samples {
            w.serialize(RawRow { slot: s.slot, device_id: t.device_id.0.clone(), reading: s.reading })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `slot,device_id,reading` rows, grouping them by device in order of
/// first appearance. Row numbers in errors count data rows from 1.
pub fn read_raw_csv<R: Read>(input: R) -> Result<Vec<RawTrace>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, RAW_CSV_HEADER)?;
    let mut groups: Vec<(DeviceId, Vec<RawSample>)> = Vec::new();
    for (i, rec) in r.deserialize::<RawRow>().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Ingest { row, reason: e.to_string() })?;
        let sample = RawSample { slot: rec.slot, reading: rec.reading, row };
        match groups.iter_mut().find(|(id, _)| id.0 == rec.device_id) {
            Some((_, samples)) => samples.push(sample),
            None => groups.push((DeviceId(rec.device_id), vec![sample])),
        }
    }
    groups.into_iter().map(|(id, samples)| RawTrace::from_samples(id, samples)).collect()
}

fn check_header<R: Read>(r: &mut csv::Reader<R>, expected: &str) -> Result<()> {
    let found = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if found != expected {
        return Err(Error::Ingest { row: 0, reason: format!("expected header `{expected}`, found `{found}`") });
    }
    Ok(())
}
