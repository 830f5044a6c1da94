use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use super::gates::{Gate, Rails};
use super::state::{Config, Level, SparseState};
use super::{AddressState, DataMode, DataRegister, Layout, QramConfig};
use crate::analytics::query_slots;
use crate::encoding::Encoding;
use crate::error::{Error, Result};
use crate::scheduler::{Direction, Medium, Schedule};

/// Protocol step that an [`Op`] implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Prepare,
    Release,
    Set,
    Hop,
    Read,
    Unset,
    Return,
    Decode,
}

/// A group of gates executed at one schedule time. Hops occupy one slot
/// starting at `slot`; everything else is instantaneous at `slot`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Op {
    pub kind: OpKind,
    pub k: usize,
    pub rail: usize,
    pub level: i32,
    pub slot: u32,
    pub duration: u32,
    pub direction: Option<Direction>,
    pub gates: Vec<Gate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryProgram {
    pub layout: Layout,
    pub makespan_slots: u32,
    pub ops: Vec<Op>,
}

impl QueryProgram {
    pub fn run(&self, initial: &SparseState) -> Result<SparseState> {
        let mut state = initial.clone();
        let norm0 = state.norm_sqr();
        for op in &self.ops {
            for g in &op.gates {
                state = g.apply(&state);
            }
            let norm = state.norm_sqr();
            if (norm - norm0).abs() > 1e-10 {
                return Err(Error::InvariantViolation(format!(
                    "norm drifted to {norm} after {:?} of excitation {}",
                    op.kind, op.k
                )));
            }
        }
        Ok(state)
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.ops.iter().flat_map(|op| op.gates.iter())
    }

    /// Gate trace with slot times, suitable for schedule replay.
    pub fn trace_json(&self) -> serde_json::Value {
        json!({
            "n": self.layout.n,
            "encoding": self.layout.encoding,
            "mode": self.layout.mode,
            "makespan_slots": self.makespan_slots,
            "slots": self.layout.names,
            "ops": self.ops,
        })
    }
}

/// Lists disagreements between a program's hops and a schedule's waveguide
/// occupancy; empty when the trace replays exactly.
pub fn check_trace_against_schedule(program: &QueryProgram, schedule: &Schedule) -> Vec<String> {
    let mut problems = Vec::new();
    if program.layout.n != schedule.n || program.layout.encoding != schedule.encoding {
        problems.push("program and schedule describe different trees".to_string());
    }
    if program.makespan_slots != schedule.makespan_slots {
        problems.push(format!(
            "program makespan {} differs from schedule makespan {}",
            program.makespan_slots, schedule.makespan_slots
        ));
    }
    let traced: BTreeSet<_> = program
        .ops
        .iter()
        .filter(|op| op.kind == OpKind::Hop)
        .map(|op| (op.k, op.rail, op.level, op.slot, op.direction))
        .collect();
    let scheduled: BTreeSet<_> = schedule
        .entries
        .iter()
        .filter(|e| e.medium == Medium::Waveguide)
        .map(|e| (e.k, e.rail, e.level, e.slot_start, Some(e.direction)))
        .collect();
    for extra in traced.difference(&scheduled) {
        problems.push(format!("hop {extra:?} is not in the schedule"));
    }
    for missing in scheduled.difference(&traced) {
        problems.push(format!("scheduled hop {missing:?} is missing from the trace"));
    }
    for op in &program.ops {
        if op.slot + op.duration > program.makespan_slots {
            problems.push(format!("{:?} of excitation {} ends after the makespan", op.kind, op.k));
        }
    }
    problems
}

/// A tree of a given configuration and data mode.
#[derive(Debug, Clone)]
pub struct Qram {
    pub config: QramConfig,
    pub layout: Layout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct OrderKey {
    slot: u32,
    phase: u8,
    level_rank: u32,
    k: usize,
    rail: usize,
    seq: u8,
}

impl Qram {
    pub fn new(config: QramConfig, mode: DataMode) -> Result<Self> {
        config.validate()?;
        Ok(Qram { config, layout: Layout::new(config.n, config.encoding, mode) })
    }

    fn n(&self) -> usize {
        self.config.n as usize
    }

    fn is_hybrid(&self) -> bool {
        self.config.encoding == Encoding::HybridDualRail
    }

    fn rails(&self) -> usize {
        self.config.encoding.rails()
    }

    fn check_mode(&self, data: &DataRegister) -> Result<()> {
        if data.mode() != self.layout.mode {
            return Err(Error::ModeMismatch { expected: self.layout.mode.name(), found: data.mode().name() });
        }
        data.validate(self.layout.memory_size())
    }

    fn release_gates(&self, k: usize, rail: usize) -> Vec<Gate> {
        let reg = self.layout.register[k][rail];
        let root = self.layout.ancilla[0][0][rail];
        if self.is_hybrid() {
            vec![
                Gate::LevelFlip { slot: reg, lo: Level::E, hi: Level::F },
                Gate::LevelFlip { slot: reg, lo: Level::G, hi: Level::E },
                Gate::GeExchange(reg, root),
                Gate::LevelFlip { slot: reg, lo: Level::E, hi: Level::F },
            ]
        } else {
            vec![Gate::Swap(reg, root)]
        }
    }

    fn set_gates(&self, level: usize, rail: usize) -> Vec<Gate> {
        self.layout.ancilla[level]
            .iter()
            .zip(&self.layout.control[level])
            .map(|(a, c)| Gate::Swap(a[rail], c[rail]))
            .collect()
    }

    fn hop_gates(&self, level: usize, rail: usize) -> Vec<Gate> {
        let cr = self.layout.control_rail();
        (0..1usize << level)
            .map(|i| Gate::Route {
                control: self.layout.control[level][i][cr],
                source: self.layout.ancilla[level][i][rail],
                left: self.layout.ancilla[level + 1][2 * i][rail],
                right: self.layout.ancilla[level + 1][2 * i + 1][rail],
            })
            .collect()
    }

    fn read_gates(&self, data: &DataRegister) -> Vec<Gate> {
        let n = self.n();
        let rr = self.layout.control_rail();
        let leaves = &self.layout.ancilla[n];
        let mut gates = Vec::new();
        for (leaf, slots) in leaves.iter().enumerate() {
            let cell = self.layout.cell_of_leaf(leaf);
            match data {
                DataRegister::Classical(bits) => {
                    if bits[cell] {
                        gates.push(Gate::PhaseIfExcited(slots[rr]));
                    }
                }
                DataRegister::Quantum(_) => {
                    let dc = self.layout.data_control[cell];
                    gates.push(Gate::Swap(slots[rr], dc));
                    gates.push(Gate::CSwap { control: dc, a: self.layout.data[cell], b: slots[rr] });
                }
            }
        }
        gates
    }

    fn bus(&self) -> Rails {
        self.layout.register_rails(self.n())
    }

    fn prepare_gates(&self) -> Vec<Gate> {
        match (self.layout.mode, self.bus()) {
            (DataMode::Classical, bus) => vec![Gate::Hadamard(bus)],
            (DataMode::Quantum, _) if self.is_hybrid() => Vec::new(),
            (DataMode::Quantum, Rails::Single(s)) => vec![Gate::LevelFlip { slot: s, lo: Level::G, hi: Level::E }],
            (DataMode::Quantum, Rails::Dual(a, b)) => vec![Gate::Swap(a, b)],
        }
    }

    fn decode_gates(&self) -> Vec<Gate> {
        match self.layout.mode {
            DataMode::Classical if self.is_hybrid() => vec![Gate::Hadamard(self.bus()), Gate::PauliZ(self.bus())],
            DataMode::Classical => vec![Gate::Hadamard(self.bus())],
            DataMode::Quantum => Vec::new(),
        }
    }

    fn start_slot(&self, k: usize, rail: usize) -> u32 {
        match k {
            0 => 0,
            _ if self.config.encoding.is_standard() => 2 * (k as u32 - 1) + rail as u32,
            _ => k as u32 - 1,
        }
    }

    /// Builds the time-ordered gate program for one query.
    pub fn compile(&self, data: &DataRegister) -> Result<QueryProgram> {
        self.check_mode(data)?;
        let n = self.n();
        let total = query_slots(self.config.n, self.config.encoding);
        let op = |kind, k, rail, level: i32, slot, duration, direction, gates| Op {
            kind,
            k,
            rail,
            level,
            slot,
            duration,
            direction,
            gates,
        };

        let mut inward: Vec<(OrderKey, Op)> = Vec::new();
        for k in 0..=n {
            for rail in 0..self.rails() {
                let s = self.start_slot(k, rail);
                let key = |slot, phase, level_rank, seq| OrderKey { slot, phase, level_rank, k, rail, seq };
                inward.push((key(s, 2, 0, 0), op(OpKind::Release, k, rail, 0, s, 0, None, self.release_gates(k, rail))));
                if k == 0 {
                    inward.push((key(0, 2, 0, 1), op(OpKind::Set, 0, rail, 0, 0, 0, None, self.set_gates(0, rail))));
                    continue;
                }
                for j in 0..k {
                    let slot = s + j as u32;
                    // Deeper hops first so a payload is not moved twice in one slot.
                    inward.push((
                        key(slot, 3, u32::MAX - j as u32, 0),
                        op(OpKind::Hop, k, rail, j as i32, slot, 1, Some(Direction::In), self.hop_gates(j, rail)),
                    ));
                }
                if k < n {
                    let slot = s + k as u32;
                    inward.push((key(slot, 0, 0, 0), op(OpKind::Set, k, rail, k as i32, slot, 0, None, self.set_gates(k, rail))));
                }
            }
        }
        inward.sort_by(|a, b| a.0.cmp(&b.0));
        let inward: Vec<Op> = inward.into_iter().map(|(_, o)| o).collect();

        let mut ops = vec![op(OpKind::Prepare, n, 0, -1, 0, 0, None, self.prepare_gates())];
        ops.extend(inward.iter().cloned());
        ops.push(op(OpKind::Read, n, 0, n as i32, total / 2, 0, None, self.read_gates(data)));
        for o in inward.iter().rev() {
            let mut back = o.clone();
            back.slot = total - o.slot - o.duration;
            back.gates.reverse();
            back.kind = match o.kind {
                OpKind::Release => OpKind::Return,
                OpKind::Set => OpKind::Unset,
                other => other,
            };
            if o.kind == OpKind::Hop {
                back.direction = Some(Direction::Out);
            }
            if back.kind == OpKind::Return && o.k == n && self.is_hybrid() && self.layout.mode == DataMode::Quantum {
                // The data qubit comes back single-rail.
                back.gates = vec![Gate::Swap(self.layout.register[n][0], self.layout.ancilla[0][0][0])];
            }
            ops.push(back);
        }
        ops.push(op(OpKind::Decode, n, 0, -1, total, 0, None, self.decode_gates()));
        Ok(QueryProgram { layout: self.layout.clone(), makespan_slots: total, ops })
    }

    /// Register encoding of `Σ α_j |j⟩|0⟩_bus` with the data register loaded.
    pub fn initial_state(&self, address: &AddressState, data: &DataRegister) -> Result<SparseState> {
        self.check_mode(data)?;
        let size = self.layout.memory_size();
        address.validate(size)?;
        let n = self.n();
        let mut state = SparseState::empty();
        for (j, &alpha) in address.0.iter().enumerate() {
            if alpha.norm() == 0.0 {
                continue;
            }
            let mut c = Config::ground();
            for k in 0..=n {
                let bit = if k < n { (j >> (n - 1 - k)) & 1 } else { 0 };
                self.encode_bit(&mut c, k, bit);
            }
            state.add(c, alpha);
        }
        if let DataRegister::Quantum(cells) = data {
            for (i, cell) in cells.iter().enumerate() {
                let slot = self.layout.data[i];
                if cell[1].norm() > 0.0 && state.len() > 1 << 20 {
                    return Err(Error::invalid("quantum data register too large to expand"));
                }
                state = state.map(|c, a, emit| {
                    if cell[0].norm() > 0.0 {
                        emit(c.clone(), a * cell[0]);
                    }
                    if cell[1].norm() > 0.0 {
                        let mut c1 = c.clone();
                        c1.set(slot, Level::E);
                        emit(c1, a * cell[1]);
                    }
                });
            }
        }
        Ok(state)
    }

    fn encode_bit(&self, c: &mut Config, k: usize, bit: usize) {
        let reg = &self.layout.register[k];
        if reg.len() == 2 {
            c.set(reg[bit], Level::E);
        } else if bit == 1 {
            c.set(reg[0], Level::E);
        }
    }

    pub fn query(&self, address: &AddressState, data: &DataRegister) -> Result<QueryOutcome> {
        let program = self.compile(data)?;
        let initial = self.initial_state(address, data)?;
        let final_state = program.run(&initial)?;
        Ok(QueryOutcome { program, initial, final_state })
    }

    /// Swaps ancilla and control on every node at `level`.
    pub fn set_address(&self, state: &SparseState, level: usize) -> Result<SparseState> {
        if level >= self.n() {
            return Err(Error::ProtocolOrder(format!("no routers at level {level}")));
        }
        Ok(apply_all(state, (0..self.rails()).flat_map(|r| self.set_gates(level, r))))
    }

    /// Routes every level-`level` ancilla into a child ancilla.
    pub fn route_address(&self, state: &SparseState, level: usize) -> Result<SparseState> {
        if level >= self.n() {
            return Err(Error::ProtocolOrder(format!(
                "cannot route past level {} (requested level {level})",
                self.n() - 1
            )));
        }
        Ok(apply_all(state, (0..self.rails()).flat_map(|r| self.hop_gates(level, r))))
    }

    /// Phase-flips leaf branches whose bit is set.
    pub fn read_classical(&self, state: &SparseState, data: &DataRegister) -> Result<SparseState> {
        if data.mode() != DataMode::Classical {
            return Err(Error::ModeMismatch { expected: "classical", found: data.mode().name() });
        }
        self.check_mode(data)?;
        Ok(apply_all(state, self.read_gates(data)))
    }

    /// Moves the carrier into the queried cell control and the queried data
    /// qubit into the leaf.
    pub fn read_quantum(&self, state: &SparseState, data: &DataRegister) -> Result<SparseState> {
        if data.mode() != DataMode::Quantum {
            return Err(Error::ModeMismatch { expected: "quantum", found: data.mode().name() });
        }
        self.check_mode(data)?;
        Ok(apply_all(state, self.read_gates(data)))
    }

    fn check_hybrid(&self) -> Result<()> {
        if !self.is_hybrid() {
            return Err(Error::ModeMismatch { expected: "hybrid-dual-rail", found: self.config.encoding.name() });
        }
        Ok(())
    }

    /// `(α|0⟩ + β|1⟩)_k |0⟩_root → α|0⟩_k|1⟩_root + β|1⟩_k|0⟩_root` via the
    /// `|f⟩` ladder.
    pub fn hybrid_release(&self, state: &SparseState, k: usize) -> Result<SparseState> {
        self.check_hybrid()?;
        if k > self.n() {
            return Err(Error::UnknownExcitation(k));
        }
        let root = self.layout.ancilla[0][0][0];
        if state.iter().any(|(c, a)| a.norm() > 0.0 && c.get(root) != Level::G) {
            return Err(Error::ProtocolOrder("root ancilla is occupied".into()));
        }
        Ok(apply_all(state, self.release_gates(k, 0)))
    }

    /// Inverse of [`Qram::hybrid_release`]; a lost tree excitation leaves
    /// register qubit `k` in `|f⟩`.
    pub fn hybrid_unrelease(&self, state: &SparseState, k: usize) -> Result<SparseState> {
        self.check_hybrid()?;
        if k > self.n() {
            return Err(Error::UnknownExcitation(k));
        }
        Ok(apply_all(state, self.release_gates(k, 0).into_iter().rev()))
    }
}

fn apply_all<I: IntoIterator<Item = Gate>>(state: &SparseState, gates: I) -> SparseState {
    gates.into_iter().fold(state.clone(), |s, g| g.apply(&s))
}

/// One term of the final state, split into register and the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTerm {
    /// `None` when a register qubit is outside its code space.
    pub address: Option<usize>,
    pub bus: Option<u8>,
    pub rest: Config,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub program: QueryProgram,
    pub initial: SparseState,
    pub final_state: SparseState,
}

impl QueryOutcome {
    fn layout(&self) -> &Layout {
        &self.program.layout
    }

    fn decode_qubit(&self, c: &Config, k: usize) -> Option<u8> {
        let reg = &self.layout().register[k];
        let is_bus = k == self.layout().n as usize;
        if reg.len() == 2 {
            match (c.get(reg[0]), c.get(reg[1])) {
                (Level::E, Level::G) => Some(0),
                (Level::G, Level::E) => Some(1),
                // Quantum data returns single-rail on the carrier rail.
                (Level::G, Level::G) if is_bus && self.layout().mode == DataMode::Quantum => Some(0),
                _ => None,
            }
        } else {
            match c.get(reg[0]) {
                Level::G => Some(0),
                Level::E => Some(1),
                Level::F => None,
            }
        }
    }

    /// Decodes register contents of every term in the final state.
    pub fn terms(&self) -> Vec<OutputTerm> {
        let layout = self.layout();
        let n = layout.n as usize;
        self.final_state
            .iter()
            .map(|(c, &amplitude)| {
                let bits: Option<Vec<u8>> = (0..n).map(|k| self.decode_qubit(c, k)).collect();
                let address = bits.map(|b| b.iter().fold(0usize, |acc, &x| (acc << 1) | x as usize));
                OutputTerm {
                    address,
                    bus: self.decode_qubit(c, n),
                    rest: c.restrict(|s| !layout.is_register(s)),
                    amplitude,
                }
            })
            .collect()
    }

    /// Population with any tree qubit away from `|g⟩`.
    pub fn tree_residual(&self) -> f64 {
        let layout = self.layout();
        self.final_state
            .iter()
            .filter(|(c, _)| c.excited().iter().any(|&(s, _)| layout.is_tree(s)))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Amplitudes `⟨j, b| ⊗ ⟨ground rest|` of the final state.
    pub fn register_amplitudes(&self) -> BTreeMap<(usize, u8), Complex64> {
        let mut out = BTreeMap::new();
        for t in self.terms() {
            if let (Some(j), Some(b)) = (t.address, t.bus) {
                if t.rest == Config::ground() {
                    *out.entry((j, b)).or_insert(Complex64::new(0.0, 0.0)) += t.amplitude;
                }
            }
        }
        out
    }

    /// Purity of the reduced state on the address and bus qubits.
    pub fn register_purity(&self) -> f64 {
        let layout = self.layout();
        let mut by_rest: BTreeMap<Config, BTreeMap<Config, Complex64>> = BTreeMap::new();
        for (c, &a) in self.final_state.iter() {
            let rest = c.restrict(|s| !layout.is_register(s));
            let reg = c.restrict(|s| layout.is_register(s));
            by_rest.entry(rest).or_default().insert(reg, a);
        }
        let blocks: Vec<_> = by_rest.values().collect();
        let mut purity = 0.0;
        for x in &blocks {
            for y in &blocks {
                let overlap: Complex64 = x.iter().filter_map(|(c, a)| y.get(c).map(|b| a.conj() * b)).sum();
                purity += overlap.norm_sqr();
            }
        }
        purity
    }

    pub fn to_json(&self) -> serde_json::Value {
        let codec = self.layout().codec();
        let state: Vec<_> = self
            .final_state
            .iter()
            .map(|(c, a)| json!({ "config": codec.render(c), "re": a.re, "im": a.im }))
            .collect();
        let output: Vec<_> = self
            .register_amplitudes()
            .into_iter()
            .map(|((j, b), a)| json!({ "address": j, "bus": b, "re": a.re, "im": a.im }))
            .collect();
        json!({
            "n": self.layout().n,
            "encoding": self.layout().encoding,
            "mode": self.layout().mode,
            "slots": self.layout().names,
            "final_state": state,
            "output": output,
            "tree_residual": self.tree_residual(),
            "register_purity": self.register_purity(),
        })
    }
}
