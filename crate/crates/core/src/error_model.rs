//! Monte Carlo loss, dephasing and thermal events on query trajectories.
//!
//! Each excitation takes one branch with probability ½: for hybrid
//! dual-rail it either travels the tree (logical 0) or stays in its register
//! transmon for the whole query; for standard dual-rail it rides rail 0 or
//! rail 1. Loss is an exponential clock over the excitation's residence
//! intervals, with `T1_m` in the waveguide and `T1_q` in transmons.
//!
//! A lost excitation is removed from the basis configuration and the rest
//! of the gate program is replayed; the verdict comes from the final
//! register pattern. Loss clocks run over the whole query, as if each
//! dual-rail pair existed from `t = 0` to `T`; a loss drawn before the
//! excitation's release is applied right after the release, and one drawn
//! after its return just before the return.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::query_slots;
use crate::encoding::Encoding;
use crate::error::{Error, Result};
use crate::qram::{Config, DataMode, DataRegister, Gate, Level, OpKind, Qram, QramConfig, QueryProgram, Slot};
use crate::scheduler::{build_schedule, residence_intervals_rail, Medium, Schedule};
use crate::units::Time;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub t1_q: Time,
    pub t1_m: Time,
    #[serde(default = "infinite")]
    pub t2_q: Time,
    #[serde(default = "infinite")]
    pub t2_m: Time,
    #[serde(default)]
    pub n_th: f64,
    /// Adds an `|f⟩ → |e⟩` decay clock of length `t_f` per hybrid release.
    #[serde(default)]
    pub f_decay: bool,
}

fn infinite() -> Time {
    Time::INFINITE
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel {
            t1_q: Time::INFINITE,
            t1_m: Time::INFINITE,
            t2_q: Time::INFINITE,
            t2_m: Time::INFINITE,
            n_th: 0.0,
            f_decay: false,
        }
    }

    pub fn loss_only(t1_q: Time, t1_m: Time) -> Self {
        NoiseModel { t1_q, t1_m, ..NoiseModel::noiseless() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("T1_q", self.t1_q), ("T1_m", self.t1_m), ("T2_q", self.t2_q), ("T2_m", self.t2_m)] {
            if !(t.ns() > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {} ns", t.ns())));
            }
        }
        if !(self.n_th >= 0.0 && self.n_th.is_finite()) {
            return Err(Error::invalid(format!("n_th must be non-negative, got {}", self.n_th)));
        }
        for (name, t1, t2) in [("q", self.t1_q, self.t2_q), ("m", self.t1_m, self.t2_m)] {
            if !t1.is_infinite() && !t2.is_infinite() && t2.ns() > 2.0 * t1.ns() * (1.0 + 1e-12) {
                return Err(Error::invalid(format!("T2_{name} exceeds 2 T1_{name}")));
            }
        }
        Ok(())
    }

    fn t1(&self, medium: Medium) -> f64 {
        match medium {
            Medium::Transmon => self.t1_q.ns(),
            Medium::Waveguide => self.t1_m.ns(),
        }
    }

    fn t2(&self, medium: Medium) -> f64 {
        match medium {
            Medium::Transmon => self.t2_q.ns(),
            Medium::Waveguide => self.t2_m.ns(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Loss,
    Dephase,
    Thermal,
    FDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventLocation {
    pub medium: Medium,
    /// Tree level, `-1` for the register.
    pub level: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEvent {
    pub time_ns: f64,
    pub k: usize,
    pub location: EventLocation,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryVerdict {
    pub seed: u64,
    pub index: u64,
    /// Sampled branch per excitation: address bits, then the bus.
    pub branch: Vec<u8>,
    pub events: Vec<NoiseEvent>,
    pub detected: bool,
    /// Register qubits that flagged: `reg{k}=f` (hybrid) or `reg{k}=gg` (standard).
    pub detection_basis: Vec<String>,
    /// Register decodes to the input branch and the tree is empty.
    pub exact: bool,
}

impl TrajectoryVerdict {
    pub fn loss_count(&self) -> usize {
        self.events.iter().filter(|e| e.kind == EventKind::Loss).count()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("verdicts serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessEstimate {
    pub p: f64,
    pub stderr: f64,
    pub trials: u64,
    pub successes: u64,
}

/// Interval in ns with its medium and tree level.
#[derive(Debug, Clone, Copy)]
struct Span {
    start: f64,
    end: f64,
    medium: Medium,
    level: i32,
}

/// Precomputed program, schedule and residence data for one configuration.
#[derive(Debug, Clone)]
pub struct TrajectorySampler {
    pub config: QramConfig,
    pub noise: NoiseModel,
    schedule: Schedule,
    program: QueryProgram,
    /// `[k][rail]` residence spans of the routed branch.
    routed: Vec<Vec<Vec<Span>>>,
    release_ns: Vec<Vec<f64>>,
    return_ns: Vec<Vec<f64>>,
    total_ns: f64,
}

impl TrajectorySampler {
    pub fn new(config: QramConfig, noise: NoiseModel) -> Result<Self> {
        config.validate()?;
        noise.validate()?;
        if config.encoding == Encoding::SingleRail {
            return Err(Error::ModeMismatch { expected: "dual-rail encoding", found: config.encoding.name() });
        }
        let schedule = build_schedule(config.n, config.encoding)?;
        let qram = Qram::new(config, DataMode::Classical)?;
        let program = qram.compile(&DataRegister::Classical(vec![false; config.memory_size()]))?;
        let t = config.t.ns();
        let rails = config.encoding.rails();
        let mut routed = Vec::new();
        let mut release_ns = Vec::new();
        let mut return_ns = Vec::new();
        for k in 0..=config.n as usize {
            let mut per_rail = Vec::new();
            let mut rel = Vec::new();
            let mut ret = Vec::new();
            for rail in 0..rails {
                let spans = residence_intervals_rail(&schedule, k, rail)?
                    .into_iter()
                    .map(|iv| {
                        let level = schedule
                            .entries
                            .iter()
                            .find(|e| e.k == k && e.rail == rail && e.slot_start == iv.start)
                            .map(|e| e.level)
                            .unwrap_or(-1);
                        Span { start: iv.start as f64 * t, end: iv.end as f64 * t, medium: iv.medium, level }
                    })
                    .collect();
                per_rail.push(spans);
                let slot_of = |kind| {
                    program.ops.iter().find(|op| op.kind == kind && op.k == k && op.rail == rail).map(|op| op.slot)
                };
                rel.push(slot_of(OpKind::Release).unwrap_or(0) as f64 * t);
                ret.push(slot_of(OpKind::Return).unwrap_or(0) as f64 * t);
            }
            routed.push(per_rail);
            release_ns.push(rel);
            return_ns.push(ret);
        }
        let total_ns = query_slots(config.n, config.encoding) as f64 * t;
        Ok(TrajectorySampler { config, noise, schedule, program, routed, release_ns, return_ns, total_ns })
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn query_time(&self) -> Time {
        Time::from_ns(self.total_ns)
    }

    fn rng(seed: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        rng
    }

    fn hybrid(&self) -> bool {
        self.config.encoding == Encoding::HybridDualRail
    }

    /// Residence spans of excitation `k` on the sampled branch.
    fn spans(&self, k: usize, bit: u8) -> Vec<Span> {
        if self.hybrid() {
            if bit == 0 {
                self.routed[k][0].clone()
            } else {
                vec![Span { start: 0.0, end: self.total_ns, medium: Medium::Transmon, level: -1 }]
            }
        } else {
            self.routed[k][bit as usize].clone()
        }
    }

    fn location_at(&self, k: usize, bit: u8, time: f64) -> EventLocation {
        let spans = self.spans(k, bit);
        let s = spans.iter().find(|s| time >= s.start && time < s.end).or(spans.last()).expect("spans cover the query");
        EventLocation { medium: s.medium, level: s.level }
    }

    fn sample_branch(&self, rng: &mut ChaCha8Rng) -> Vec<u8> {
        (0..=self.config.n).map(|_| rng.gen_range(0..2u8)).collect()
    }

    /// First loss time of excitation `k`, if any, from a piecewise-constant
    /// exponential clock.
    fn sample_loss(&self, rng: &mut ChaCha8Rng, k: usize, bit: u8) -> Option<f64> {
        let mut budget = -(1.0 - rng.gen::<f64>()).ln();
        for s in self.spans(k, bit) {
            let rate = 1.0 / self.noise.t1(s.medium);
            let hazard = rate * (s.end - s.start);
            if hazard >= budget {
                return Some(s.start + budget / rate);
            }
            budget -= hazard;
        }
        None
    }

    fn sample_events(&self, rng: &mut ChaCha8Rng, branch: &[u8]) -> Vec<NoiseEvent> {
        let mut events = Vec::new();
        for (k, &bit) in branch.iter().enumerate() {
            if let Some(time) = self.sample_loss(rng, k, bit) {
                events.push(NoiseEvent { time_ns: time, k, location: self.location_at(k, bit, time), kind: EventKind::Loss });
            }
            for s in self.spans(k, bit) {
                let t2 = self.noise.t2(s.medium);
                let flip = 0.5 * (1.0 - (-(s.end - s.start) / t2).exp());
                if rng.gen::<f64>() < flip {
                    let time = rng.gen_range(s.start..s.end);
                    events.push(NoiseEvent {
                        time_ns: time,
                        k,
                        location: EventLocation { medium: s.medium, level: s.level },
                        kind: EventKind::Dephase,
                    });
                }
            }
            if self.noise.n_th > 0.0 {
                let rate = self.noise.n_th / self.noise.t1_q.ns();
                let u: f64 = rng.gen();
                let time = -(1.0 - u).ln() / rate;
                if time < self.total_ns {
                    events.push(NoiseEvent { time_ns: time, k, location: self.location_at(k, bit, time), kind: EventKind::Thermal });
                }
            }
            if self.noise.f_decay && self.hybrid() && self.config.t_f.ns() > 0.0 {
                let u: f64 = rng.gen();
                let time = -(1.0 - u).ln() * self.noise.t1_q.ns();
                if time < self.config.t_f.ns() {
                    let at = self.release_ns[k][0] + time;
                    events.push(NoiseEvent {
                        time_ns: at,
                        k,
                        location: EventLocation { medium: Medium::Transmon, level: -1 },
                        kind: EventKind::FDecay,
                    });
                }
            }
        }
        events.sort_by(|a, b| a.time_ns.total_cmp(&b.time_ns));
        events
    }

    /// Draws branch and events for trajectory `index` of stream `seed` and
    /// propagates losses through the protocol.
    pub fn sample(&self, seed: u64, index: u64) -> TrajectoryVerdict {
        let mut rng = Self::rng(seed, index);
        let branch = self.sample_branch(&mut rng);
        let events = self.sample_events(&mut rng, &branch);
        let mut verdict = self.propagate(&branch, &events);
        verdict.seed = seed;
        verdict.index = index;
        verdict
    }

    /// Deterministic single-loss trajectory for detection tests.
    pub fn inject_loss(&self, branch: &[u8], k: usize, time: Time) -> Result<TrajectoryVerdict> {
        if branch.len() != self.config.n as usize + 1 || branch.iter().any(|&b| b > 1) {
            return Err(Error::invalid("branch must hold one bit per excitation"));
        }
        if k > self.config.n as usize {
            return Err(Error::UnknownExcitation(k));
        }
        let t = time.ns();
        if !(0.0..self.total_ns).contains(&t) {
            return Err(Error::invalid(format!("loss time {t} ns outside the query")));
        }
        let event = NoiseEvent { time_ns: t, k, location: self.location_at(k, branch[k], t), kind: EventKind::Loss };
        Ok(self.propagate(branch, &[event]))
    }

    fn initial_config(&self, branch: &[u8]) -> (Config, Vec<Option<Slot>>) {
        let layout = &self.program.layout;
        let mut config = Config::ground();
        let mut labels = vec![None; branch.len()];
        for (k, &bit) in branch.iter().enumerate() {
            let reg = &layout.register[k];
            if reg.len() == 2 {
                config.set(reg[bit as usize], Level::E);
                labels[k] = Some(reg[bit as usize]);
            } else if bit == 1 {
                config.set(reg[0], Level::E);
                labels[k] = Some(reg[0]);
            }
        }
        (config, labels)
    }

    fn propagate(&self, branch: &[u8], events: &[NoiseEvent]) -> TrajectoryVerdict {
        let layout = &self.program.layout;
        let t = self.config.t.ns();
        let (mut config, mut labels) = self.initial_config(branch);
        let rail_of = |k: usize| if self.config.encoding.is_standard() { branch[k] as usize } else { 0 };
        let mut pending: Vec<(f64, usize)> = events
            .iter()
            .filter(|e| e.kind == EventKind::Loss)
            .map(|e| {
                let r = rail_of(e.k);
                (e.time_ns.clamp(self.release_ns[e.k][r], self.return_ns[e.k][r]), e.k)
            })
            .collect();
        pending.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut fire = |config: &mut Config, labels: &mut [Option<Slot>], hit: &dyn Fn(f64, usize) -> bool| {
            pending.retain(|&(time, k)| {
                if hit(time, k) {
                    lose(config, labels, k);
                    false
                } else {
                    true
                }
            });
        };

        for op in &self.program.ops {
            let start = op.slot as f64 * t;
            let on_rail = op.rail == rail_of(op.k);
            fire(&mut config, &mut labels, &|time, _| time < start);
            if op.kind == OpKind::Return && on_rail {
                fire(&mut config, &mut labels, &|_, k| k == op.k);
            }
            for gate in &op.gates {
                apply_tracked(gate, &mut config, &mut labels);
            }
            if op.kind == OpKind::Release && on_rail {
                if labels[op.k].is_none() {
                    let root = layout.ancilla[0][0][op.rail];
                    if config.get(root) == Level::E && !labels.contains(&Some(root)) {
                        labels[op.k] = Some(root);
                    }
                }
                fire(&mut config, &mut labels, &|time, k| k == op.k && time <= start);
            }
        }
        fire(&mut config, &mut labels, &|_, _| true);

        let mut basis = Vec::new();
        let mut decoded = Vec::new();
        for (k, reg) in layout.register.iter().enumerate() {
            if reg.len() == 2 {
                match (config.get(reg[0]), config.get(reg[1])) {
                    (Level::G, Level::G) => basis.push(format!("reg{k}=gg")),
                    (Level::E, Level::G) => decoded.push(0),
                    (Level::G, Level::E) => decoded.push(1),
                    _ => decoded.push(u8::MAX),
                }
            } else {
                match config.get(reg[0]) {
                    Level::F => basis.push(format!("reg{k}=f")),
                    Level::E => decoded.push(1),
                    Level::G => decoded.push(0),
                }
            }
        }
        let tree_empty = config.excited().iter().all(|&(s, _)| !layout.is_tree(s));
        TrajectoryVerdict {
            seed: 0,
            index: 0,
            branch: branch.to_vec(),
            events: events.to_vec(),
            detected: !basis.is_empty(),
            detection_basis: basis,
            exact: tree_empty && decoded == branch,
        }
    }

    /// Fraction of trajectories without a loss event.
    pub fn estimate(&self, trials: u64, seed: u64) -> Result<SuccessEstimate> {
        if trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        let successes = self.count_successes(seed, 0..trials);
        Ok(success_estimate(successes, trials))
    }

    /// Loss-free trajectories among `indices` of stream `seed`; lets callers
    /// split the work across threads.
    pub fn count_successes(&self, seed: u64, indices: std::ops::Range<u64>) -> u64 {
        indices
            .filter(|&i| {
                let mut rng = Self::rng(seed, i);
                let branch = self.sample_branch(&mut rng);
                branch.iter().enumerate().all(|(k, &bit)| self.sample_loss(&mut rng, k, bit).is_none())
            })
            .count() as u64
    }
}

pub fn success_estimate(successes: u64, trials: u64) -> SuccessEstimate {
    let p = successes as f64 / trials as f64;
    SuccessEstimate { p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), trials, successes }
}

fn lose(config: &mut Config, labels: &mut [Option<Slot>], k: usize) {
    if let Some(slot) = labels[k].take() {
        config.set(slot, Level::G);
    }
}

/// Moves excitation labels along with permutation gates; phases and
/// Hadamards do not act on the sampled basis branch.
fn apply_tracked(gate: &Gate, config: &mut Config, labels: &mut [Option<Slot>]) {
    let moved = match *gate {
        Gate::Hadamard(_) | Gate::PhaseIfExcited(_) | Gate::PauliZ(_) => return,
        Gate::Swap(a, b) => Some((a, b)),
        Gate::GeExchange(a, b) => match (config.get(a), config.get(b)) {
            (Level::E, Level::G) | (Level::G, Level::E) => Some((a, b)),
            _ => None,
        },
        Gate::Route { control, source, left, right } => {
            Some((source, if config.get(control) == Level::G { left } else { right }))
        }
        Gate::CSwap { control, a, b } => (config.get(control) != Level::G).then_some((a, b)),
        Gate::LevelFlip { .. } => None,
    };
    if let Some((result, _)) = gate.permute(config) {
        *config = result;
    }
    if let Some((a, b)) = moved {
        for l in labels.iter_mut().flatten() {
            if *l == a {
                *l = b;
            } else if *l == b {
                *l = a;
            }
        }
    }
}

pub fn sample_trajectory(config: &QramConfig, noise: &NoiseModel, seed: u64) -> Result<TrajectoryVerdict> {
    Ok(TrajectorySampler::new(*config, *noise)?.sample(seed, 0))
}

pub fn estimate_success_prob(config: &QramConfig, noise: &NoiseModel, trials: u64, seed: u64) -> Result<SuccessEstimate> {
    TrajectorySampler::new(*config, *noise)?.estimate(trials, seed)
}
