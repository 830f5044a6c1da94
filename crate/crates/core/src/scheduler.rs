//! Pipelined routing schedules, in units of one routing step `t`.
//!
//! Excitation `k` (address qubit `a_k`, with `k = n` the bus) is routed from
//! the root down to tree level `k`, one hop per slot. Hop `j` crosses the
//! router at level `j`, so it may start only once `a_j` has arrived there.
//! Route-out is the time mirror of route-in. Excitation 0 never leaves the
//! root. For standard dual-rail both rails of a qubit are routed on the same
//! waveguides, rail 1 one slot behind rail 0.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytics::query_slots;
use crate::encoding::Encoding;
use crate::error::{Error, Result};
use crate::units::Time;

/// Tree level used for an excitation still held in the register.
pub const REGISTER_LEVEL: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Medium {
    Transmon,
    Waveguide,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
        }
    }
}

impl Medium {
    pub fn name(self) -> &'static str {
        match self {
            Medium::Transmon => "transmon",
            Medium::Waveguide => "waveguide",
        }
    }
}

/// One slot of one excitation's timeline. For waveguide slots `level` is the
/// router crossed (hop from level `j` to `j+1` on the way in, the reverse on
/// the way out); for transmon slots it is where the excitation sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub k: usize,
    pub rail: usize,
    pub level: i32,
    pub slot_start: u32,
    pub direction: Direction,
    pub medium: Medium,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n: u32,
    pub encoding: Encoding,
    pub makespan_slots: u32,
    pub entries: Vec<ScheduleEntry>,
}

/// A hop: router level and slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hop {
    pub level: u32,
    pub slot: u32,
    pub direction: Direction,
}

/// Hops of excitation `k`, rail `rail`, in time order.
pub fn hops(n: u32, encoding: Encoding, k: usize, rail: usize) -> Vec<Hop> {
    let total = query_slots(n, encoding);
    let k = k as u32;
    if k == 0 {
        return Vec::new();
    }
    let start = if encoding.is_standard() { 2 * (k - 1) + rail as u32 } else { k - 1 };
    let inward = (0..k).map(|j| Hop { level: j, slot: start + j, direction: Direction::In });
    let outward = (0..k).rev().map(|j| Hop { level: j, slot: total - 1 - (start + j), direction: Direction::Out });
    inward.chain(outward).collect()
}

pub fn build_schedule(n: u32, encoding: Encoding) -> Result<Schedule> {
    if n == 0 {
        return Err(Error::invalid("tree depth n must be at least 1"));
    }
    if n > 60 {
        return Err(Error::invalid(format!("tree depth n = {n} is too large")));
    }
    let total = query_slots(n, encoding);
    let mut entries = Vec::new();
    for k in 0..=n as usize {
        for rail in 0..encoding.rails() {
            let hs = hops(n, encoding, k, rail);
            let by_slot: BTreeMap<u32, Hop> = hs.iter().map(|h| (h.slot, *h)).collect();
            let mut location = if k == 0 { 0 } else { REGISTER_LEVEL };
            for slot in 0..total {
                let direction = if 2 * slot < total { Direction::In } else { Direction::Out };
                match by_slot.get(&slot) {
                    Some(h) => {
                        entries.push(ScheduleEntry {
                            k,
                            rail,
                            level: h.level as i32,
                            slot_start: slot,
                            direction: h.direction,
                            medium: Medium::Waveguide,
                        });
                        location = match h.direction {
                            Direction::In => h.level as i32 + 1,
                            Direction::Out if h.level == 0 => REGISTER_LEVEL,
                            Direction::Out => h.level as i32,
                        };
                    }
                    None => entries.push(ScheduleEntry {
                        k,
                        rail,
                        level: location,
                        slot_start: slot,
                        direction,
                        medium: Medium::Transmon,
                    }),
                }
            }
        }
    }
    Ok(Schedule { n, encoding, makespan_slots: total, entries })
}

impl Schedule {
    pub fn makespan(&self, t: Time) -> Time {
        Time::from_ns(self.makespan_slots as f64 * t.ns())
    }

    pub fn excitations(&self) -> usize {
        self.n as usize + 1
    }

    fn timeline(&self, k: usize, rail: usize) -> impl Iterator<Item = &ScheduleEntry> {
        self.entries.iter().filter(move |e| e.k == k && e.rail == rail)
    }

    /// `k,level,slot_start,direction,medium` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,level,slot_start,direction,medium\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.k,
                e.level,
                e.slot_start,
                e.direction.name(),
                e.medium.name()
            ));
        }
        out
    }
}

/// Maximal run of one medium, in slots `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidenceInterval {
    pub start: u32,
    pub end: u32,
    pub medium: Medium,
}

impl ResidenceInterval {
    pub fn len(&self) -> u32 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Residence of excitation `k` on its first (or only) rail.
pub fn residence_intervals(schedule: &Schedule, k: usize) -> Result<Vec<ResidenceInterval>> {
    residence_intervals_rail(schedule, k, 0)
}

pub fn residence_intervals_rail(schedule: &Schedule, k: usize, rail: usize) -> Result<Vec<ResidenceInterval>> {
    if k >= schedule.excitations() || rail >= schedule.encoding.rails() {
        return Err(Error::UnknownExcitation(k));
    }
    let mut slots: Vec<&ScheduleEntry> = schedule.timeline(k, rail).collect();
    slots.sort_by_key(|e| e.slot_start);
    let mut out: Vec<ResidenceInterval> = Vec::new();
    for e in slots {
        match out.last_mut() {
            Some(last) if last.medium == e.medium && last.end == e.slot_start => last.end += 1,
            _ => out.push(ResidenceInterval { start: e.slot_start, end: e.slot_start + 1, medium: e.medium }),
        }
    }
    Ok(out)
}

/// Slots spent in `medium` by excitation `k`, rail `rail`.
pub fn residence_total(intervals: &[ResidenceInterval], medium: Medium) -> u32 {
    intervals.iter().filter(|i| i.medium == medium).map(ResidenceInterval::len).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conflict {
    pub level: i32,
    pub slot: u32,
    pub excitations: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub makespan_slots: u32,
    pub expected_makespan_slots: u32,
    pub conflicts: Vec<Conflict>,
    pub dependency_violations: Vec<String>,
    pub residence_violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.makespan_slots == self.expected_makespan_slots
            && self.conflicts.is_empty()
            && self.dependency_violations.is_empty()
            && self.residence_violations.is_empty()
    }
}

/// Checks makespan, waveguide exclusivity per level, routing dependencies
/// and residence partitioning using only the schedule entries.
pub fn validate_schedule(schedule: &Schedule) -> ValidationReport {
    let total = schedule.makespan_slots;
    let mut report = ValidationReport {
        makespan_slots: total,
        expected_makespan_slots: query_slots(schedule.n, schedule.encoding),
        ..Default::default()
    };

    let mut usage: BTreeMap<(i32, u32), Vec<(usize, usize)>> = BTreeMap::new();
    for e in schedule.entries.iter().filter(|e| e.medium == Medium::Waveguide) {
        usage.entry((e.level, e.slot_start)).or_default().push((e.k, e.rail));
    }
    for ((level, slot), users) in usage {
        if users.len() > 1 {
            report.conflicts.push(Conflict { level, slot, excitations: users });
        }
    }

    let rails = schedule.encoding.rails();
    let mut arrival = vec![0u32; schedule.excitations()];
    let mut departure = vec![total; schedule.excitations()];
    for (k, (arr, dep)) in arrival.iter_mut().zip(departure.iter_mut()).enumerate() {
        for rail in 0..rails {
            for e in schedule.timeline(k, rail).filter(|e| e.medium == Medium::Waveguide) {
                match e.direction {
                    Direction::In => *arr = (*arr).max(e.slot_start + 1),
                    Direction::Out => *dep = (*dep).min(e.slot_start),
                }
            }
        }
    }
    for e in schedule.entries.iter().filter(|e| e.medium == Medium::Waveguide) {
        let j = e.level as usize;
        if j >= e.k {
            report
                .dependency_violations
                .push(format!("excitation {} rail {} crosses level {j}, below its destination", e.k, e.rail));
            continue;
        }
        match e.direction {
            Direction::In if e.slot_start < arrival[j] => report.dependency_violations.push(format!(
                "excitation {} rail {} crosses level {j} at slot {} before a_{j} arrives at {}",
                e.k, e.rail, e.slot_start, arrival[j]
            )),
            Direction::Out if e.slot_start + 1 > departure[j] => report.dependency_violations.push(format!(
                "excitation {} rail {} crosses level {j} at slot {} after a_{j} leaves at {}",
                e.k, e.rail, e.slot_start, departure[j]
            )),
            _ => {}
        }
    }

    for k in 0..schedule.excitations() {
        for rail in 0..rails {
            let mut slots: Vec<u32> = schedule.timeline(k, rail).map(|e| e.slot_start).collect();
            slots.sort_unstable();
            if slots != (0..total).collect::<Vec<_>>() {
                report
                    .residence_violations
                    .push(format!("excitation {k} rail {rail} does not cover [0, {total}) exactly once"));
            }
            let guided = schedule.timeline(k, rail).filter(|e| e.medium == Medium::Waveguide).count();
            if guided != 2 * k {
                report
                    .residence_violations
                    .push(format!("excitation {k} rail {rail} spends {guided} slots in the waveguide, expected {}", 2 * k));
            }
        }
    }
    report
}
