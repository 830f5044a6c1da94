use std::path::{Path, PathBuf};

use num_complex::Complex64;
use phonon_qram::analytics::{
    dephasing_no_error_prob, heralding_rate, success_prob_hybrid, success_prob_standard_vacuum,
};
use phonon_qram::error_model::{success_estimate, NoiseModel, TrajectorySampler};
use phonon_qram::qram::{AddressState, DataMode, DataRegister, Qram, QramConfig, QueryOutcome};
use phonon_qram::router::{kappa_point, simulate_routing, window_point, RouterSimConfig, SweepRow};
use phonon_qram::scheduler::{build_schedule, residence_intervals_rail, residence_total, validate_schedule, Medium};
use phonon_qram::units::Time;
use phonon_qram::wavepackets::{PulseShape, WavePacket};
use phonon_qram::Encoding;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde_json::json;

use crate::config::{
    DataSpec, HeraldingConfig, ModeSpec, MonteCarloConfig, QuerySimConfig, RouteFidelityConfig, RouterSimCliConfig,
    ScheduleConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{meta, num, write_file, write_json, Csv};

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn sweep_rows(rows: &[SweepRow], csv: &mut Csv, with_time_domain: bool) {
    for r in rows {
        let mut cells = vec![num(r.param), r.shape.name().to_string(), num(r.infidelity)];
        if with_time_domain {
            cells.push(r.infidelity_time_domain.map(num).unwrap_or_default());
        }
        csv.row(&cells);
    }
}

pub fn route_fidelity(
    mut cfg: RouteFidelityConfig,
    window: Option<Time>,
    shape: Option<PulseShape>,
    seed: u64,
    out: &Path,
    pool: &ThreadPool,
) -> CliResult<Vec<PathBuf>> {
    if let Some(s) = shape {
        cfg.shapes = vec![s];
    }
    let single = window.is_some();
    if let Some(w) = window {
        cfg.windows = vec![w];
    }
    if cfg.shapes.is_empty() {
        return Err(config_error("no pulse shapes given"));
    }
    if cfg.windows.is_empty() || (!single && cfg.kappas.is_empty()) {
        return Err(config_error("sweep grid is empty"));
    }
    let params = json!({ "command": "route-fidelity", "config": cfg, "seed": seed });
    let mut written = Vec::new();

    if !single {
        let points: Vec<_> = cfg.shapes.iter().flat_map(|&s| cfg.kappas.iter().map(move |&k| (s, k))).collect();
        let rows: Vec<SweepRow> = pool.install(|| {
            points
                .par_iter()
                .map(|&(s, k)| kappa_point(s, cfg.fwhm, k, cfg.transition, cfg.time_domain))
                .collect::<Result<_, _>>()
        })?;
        let mut csv = Csv::new(&params, &["param", "shape", "infidelity", "infidelity_time_domain"]);
        sweep_rows(&rows, &mut csv, true);
        written.push(csv.write(out, "fig1c.csv")?);
    }

    let points: Vec<_> = cfg.shapes.iter().flat_map(|&s| cfg.windows.iter().map(move |&w| (s, w))).collect();
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .map(|&(s, w)| window_point(s, cfg.fwhm, cfg.window_kappa, cfg.transition, w))
            .collect::<Result<_, _>>()
    })?;
    let mut csv = Csv::new(&params, &["param", "shape", "infidelity"]);
    sweep_rows(&rows, &mut csv, false);
    written.push(csv.write(out, "fig1d.csv")?);
    Ok(written)
}

pub fn router_sim(cfg: RouterSimCliConfig, seed: u64, out: &Path) -> CliResult<Vec<PathBuf>> {
    let packet = WavePacket::new(cfg.shape, cfg.fwhm)?;
    let sim = RouterSimConfig {
        packet,
        kappa_max: cfg.kappa_max,
        transition: cfg.transition,
        window: cfg.window,
        dt: cfg.dt,
        control_init: cfg.control.map(|[re, im]| Complex64::new(re, im)),
        source: cfg.source,
    };
    let result = simulate_routing(&sim)?;
    let params = json!({ "command": "router-sim", "config": cfg, "seed": seed });
    let doc = json!({ "meta": meta(&params), "result": result });
    Ok(vec![write_json(out, "router_sim.json", &doc)?])
}

fn data_register(spec: &DataSpec, mode: ModeSpec, size: usize) -> CliResult<DataRegister> {
    let data = match (spec, mode) {
        (DataSpec::Bits(bits), ModeSpec::Classical) => {
            if bits.iter().any(|&b| b > 1) {
                return Err(config_error("classical data must be 0 or 1"));
            }
            DataRegister::Classical(bits.iter().map(|&b| b == 1).collect())
        }
        (DataSpec::Qubits(cells), ModeSpec::Quantum) => DataRegister::Quantum(
            cells.iter().map(|c| c.map(|[re, im]| Complex64::new(re, im))).collect(),
        ),
        (DataSpec::Bits(bits), ModeSpec::Quantum) => DataRegister::Quantum(
            bits.iter()
                .map(|&b| match b {
                    0 => Ok([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
                    1 => Ok([Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]),
                    _ => Err(config_error("data bits must be 0 or 1")),
                })
                .collect::<CliResult<_>>()?,
        ),
        (DataSpec::Qubits(_), ModeSpec::Classical) => {
            return Err(config_error("classical mode needs a list of bits"));
        }
    };
    data.validate(size)?;
    Ok(data)
}

fn query_record(label: &str, outcome: &QueryOutcome) -> serde_json::Value {
    let output: Vec<_> = outcome
        .register_amplitudes()
        .into_iter()
        .map(|((j, b), a)| json!({ "address": j, "bus": b, "re": a.re, "im": a.im }))
        .collect();
    json!({
        "input": label,
        "output": output,
        "tree_residual": outcome.tree_residual(),
        "register_purity": outcome.register_purity(),
    })
}

pub fn query_sim(cfg: QuerySimConfig, seed: u64, out: &Path, pool: &ThreadPool) -> CliResult<Vec<PathBuf>> {
    let qcfg = QramConfig { n: cfg.n, t: cfg.t, t_f: cfg.t_f, encoding: cfg.encoding };
    qcfg.validate()?;
    let size = qcfg.memory_size();
    let mode = match cfg.mode {
        ModeSpec::Classical => DataMode::Classical,
        ModeSpec::Quantum => DataMode::Quantum,
    };
    let data = data_register(&cfg.data, cfg.mode, size)?;
    let qram = Qram::new(qcfg, mode)?;

    let mut inputs: Vec<(String, AddressState)> = Vec::new();
    if let Some(amps) = &cfg.superposition {
        let state = AddressState(amps.iter().map(|&[re, im]| Complex64::new(re, im)).collect());
        state.validate(size)?;
        inputs.push(("superposition".into(), state));
    }
    for bits in &cfg.addresses {
        if bits.len() != cfg.n as usize {
            return Err(config_error(format!("address {bits:?} does not have {} bits", cfg.n)));
        }
        inputs.push((bits.clone(), AddressState::from_bits(bits)?));
    }
    if inputs.is_empty() {
        for j in 0..size {
            let label = format!("{j:0width$b}", width = cfg.n as usize);
            inputs.push((label, AddressState::basis(size, j)?));
        }
    }

    let outcomes: Vec<QueryOutcome> =
        pool.install(|| inputs.par_iter().map(|(_, a)| qram.query(a, &data)).collect::<Result<_, _>>())?;
    let records: Vec<_> = inputs.iter().zip(&outcomes).map(|((l, _), o)| query_record(l, o)).collect();
    let params = json!({ "command": "query-sim", "config": cfg, "seed": seed });
    let mut doc = json!({ "meta": meta(&params), "results": records });
    if cfg.trace {
        doc["trace"] = outcomes[0].program.trace_json();
    }
    Ok(vec![write_json(out, "query.json", &doc)?])
}

pub fn heralding(cfg: HeraldingConfig, seed: u64, out: &Path) -> CliResult<Vec<PathBuf>> {
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max {
        return Err(config_error("need 1 <= n_min <= n_max"));
    }
    if cfg.t1_m.is_empty() || cfg.t2_q.is_empty() {
        return Err(config_error("lifetime grids must not be empty"));
    }
    let params = json!({ "command": "heralding", "config": cfg, "seed": seed });
    let mut fig4a = Csv::new(&params, &["n", "N", "t_ns", "T1q_us", "T1m_us", "T", "P", "Pmin", "Pmax", "rate_hz"]);
    for n in cfg.n_min..=cfg.n_max {
        for &t1m in &cfg.t1_m {
            let r = heralding_rate(n, cfg.t, cfg.t1_q, t1m, cfg.encoding)?;
            fig4a.row(&[
                n.to_string(),
                r.memory_size.to_string(),
                num(r.t_ns),
                num(cfg.t1_q.us()),
                num(t1m.us()),
                num(r.query_time_ns),
                num(r.p_no_error),
                num(r.p_min),
                num(r.p_max),
                num(r.rate_hz),
            ]);
        }
    }
    let mut fig4b = Csv::new(&params, &["n", "T2q_us", "P_dephasing", "approx_2n2t_over_T2"]);
    for n in cfg.n_min..=cfg.n_max {
        for &t2q in &cfg.t2_q {
            let d = dephasing_no_error_prob(n, cfg.t, t2q, cfg.t2_m)?;
            fig4b.row(&[n.to_string(), num(t2q.us()), num(d.p_no_error), num(d.approx_infidelity)]);
        }
    }
    Ok(vec![fig4a.write(out, "fig4a.csv")?, fig4b.write(out, "fig4b.csv")?])
}

/// Independent stream seed for grid point `i`.
fn point_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
}

const CHUNK: u64 = 8192;

pub fn montecarlo(cfg: MonteCarloConfig, seed: u64, out: &Path, pool: &ThreadPool) -> CliResult<Vec<PathBuf>> {
    if cfg.trials == 0 {
        return Err(config_error("trials must be at least 1"));
    }
    if cfg.grid.is_empty() {
        return Err(config_error("Monte Carlo grid is empty"));
    }
    let params = json!({ "command": "montecarlo", "config": cfg, "seed": seed });
    let mut csv = Csv::new(
        &params,
        &["n", "encoding", "T1q_us", "T1m_us", "trials", "P_mc", "stderr", "P_closed", "z", "within_3sigma"],
    );
    let mut lines = String::new();
    for (i, p) in cfg.grid.iter().enumerate() {
        let qcfg = QramConfig { n: p.n, t: cfg.t, t_f: Time::ZERO, encoding: p.encoding };
        let noise = NoiseModel { t2_q: cfg.t2_q, t2_m: cfg.t2_m, n_th: cfg.n_th, ..NoiseModel::loss_only(p.t1_q, p.t1_m) };
        let closed = match p.encoding {
            Encoding::HybridDualRail => success_prob_hybrid(p.n, cfg.t, p.t1_q, p.t1_m)?.p,
            Encoding::StandardDualRailVacuum => success_prob_standard_vacuum(p.n, cfg.t, p.t1_q, p.t1_m)?.p,
            other => return Err(config_error(format!("no closed form for {other}"))),
        };
        let sampler = TrajectorySampler::new(qcfg, noise)?;
        let s = point_seed(seed, i);
        let chunks: Vec<_> = (0..cfg.trials.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(cfg.trials)).collect();
        let successes: u64 = pool.install(|| chunks.into_par_iter().map(|r| sampler.count_successes(s, r)).sum());
        let est = success_estimate(successes, cfg.trials);
        let z = if est.stderr > 0.0 { (est.p - closed) / est.stderr } else if est.p == closed { 0.0 } else { f64::INFINITY };
        csv.row(&[
            p.n.to_string(),
            p.encoding.name().to_string(),
            num(p.t1_q.us()),
            num(p.t1_m.us()),
            cfg.trials.to_string(),
            num(est.p),
            num(est.stderr),
            num(closed),
            num(z),
            (z.abs() <= 3.0).to_string(),
        ]);
        let verdicts: Vec<_> = pool.install(|| (0..cfg.verdicts_per_point).into_par_iter().map(|j| sampler.sample(s, j)).collect());
        for v in verdicts {
            let mut record = serde_json::to_value(&v).expect("verdict serializes");
            record["point"] = json!(i);
            record["n"] = json!(p.n);
            record["encoding"] = json!(p.encoding);
            lines.push_str(&serde_json::to_string(&record).expect("record serializes"));
            lines.push('\n');
        }
    }
    Ok(vec![csv.write(out, "montecarlo.csv")?, write_file(out, "verdicts.jsonl", &lines)?])
}

pub fn schedule(cfg: ScheduleConfig, seed: u64, out: &Path) -> CliResult<Vec<PathBuf>> {
    if cfg.depths.is_empty() || cfg.encodings.is_empty() {
        return Err(config_error("schedule grid is empty"));
    }
    let params = json!({ "command": "schedule", "config": cfg, "seed": seed });
    let mut written = Vec::new();
    let mut reports = Vec::new();
    let t = cfg.t.ns();
    for &n in &cfg.depths {
        for &enc in &cfg.encodings {
            let s = build_schedule(n, enc)?;
            let report = validate_schedule(&s);
            let stem = format!("schedule_{}_n{n}", enc.name());
            let mut csv = Csv::new(&params, &["k", "level", "slot_start", "direction", "medium"]);
            for e in &s.entries {
                csv.row(&[
                    e.k.to_string(),
                    e.level.to_string(),
                    e.slot_start.to_string(),
                    e.direction.name().to_string(),
                    e.medium.name().to_string(),
                ]);
            }
            written.push(csv.write(out, &format!("{stem}.csv"))?);
            let bars: Vec<_> = s
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "k": e.k, "rail": e.rail, "level": e.level, "direction": e.direction, "medium": e.medium,
                        "start_ns": e.slot_start as f64 * t, "end_ns": (e.slot_start + 1) as f64 * t,
                    })
                })
                .collect();
            let doc = json!({ "meta": meta(&params), "n": n, "encoding": enc, "makespan_slots": s.makespan_slots,
                "makespan_ns": s.makespan(cfg.t).ns(), "entries": bars });
            written.push(write_json(out, &format!("{stem}.json"), &doc)?);
            let mut waveguide = Vec::new();
            for k in 0..=n as usize {
                let per_rail: Vec<u32> = (0..enc.rails())
                    .map(|r| residence_intervals_rail(&s, k, r).map(|iv| residence_total(&iv, Medium::Waveguide)))
                    .collect::<Result<_, _>>()?;
                waveguide.push(per_rail);
            }
            reports.push(json!({
                "n": n, "encoding": enc, "valid": report.is_valid(), "report": report,
                "waveguide_slots": waveguide,
            }));
        }
    }
    let doc = json!({ "meta": meta(&params), "schedules": reports });
    written.push(write_json(out, "schedule_report.json", &doc)?);
    Ok(written)
}
