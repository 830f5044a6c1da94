//! Closed-form query times, heralding probabilities and infidelity scalings.
//!
//! Times are [`Time`] values; an infinite lifetime contributes no decay.

use serde::Serialize;

use crate::encoding::Encoding;
use crate::error::{Error, Result};
use crate::units::Time;

fn check_depth(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("tree depth n must be at least 1"));
    }
    if n > 60 {
        return Err(Error::invalid(format!("tree depth n = {n} is too large")));
    }
    Ok(())
}

fn check_step(t: Time) -> Result<()> {
    let v = t.ns();
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::invalid(format!("routing step must be finite and non-negative, got {v} ns")));
    }
    Ok(())
}

fn check_lifetime(name: &str, t1: Time) -> Result<()> {
    if !(t1.ns() > 0.0) {
        return Err(Error::invalid(format!("{name} must be positive, got {} ns", t1.ns())));
    }
    Ok(())
}

/// `1/T1` in 1/ns, zero for an infinite lifetime.
fn rate(t1: Time) -> f64 {
    1.0 / t1.ns()
}

/// Query duration in routing steps: `2(2n−1)` for single-rail and hybrid,
/// `2(3n−1)` for standard dual-rail.
pub fn query_slots(n: u32, encoding: Encoding) -> u32 {
    if encoding.is_standard() {
        2 * (3 * n - 1)
    } else {
        2 * (2 * n - 1)
    }
}

pub fn query_time(n: u32, t: Time, encoding: Encoding) -> Result<Time> {
    check_depth(n)?;
    check_step(t)?;
    Ok(Time::from_ns(query_slots(n, encoding) as f64 * t.ns()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessProbability {
    pub p: f64,
    pub p_min: f64,
    pub p_max: f64,
}

fn bound(n: u32, t: f64, total: f64, t1q: Time, t1_route: f64) -> f64 {
    let n = n as f64;
    (-(n + 1.0) * (total * rate(t1q) - n * t * rate(t1q) + n * t / t1_route)).exp()
}

/// Hybrid dual-rail: each excitation is routed `2k` steps with probability ½
/// and otherwise idles in its register transmon.
pub fn success_prob_hybrid(n: u32, t: Time, t1q: Time, t1m: Time) -> Result<SuccessProbability> {
    check_lifetime("T1_q", t1q)?;
    check_lifetime("T1_m", t1m)?;
    let total = query_time(n, t, Encoding::HybridDualRail)?.ns();
    let t = t.ns();
    let (gq, gm) = (rate(t1q), rate(t1m));
    let mut log_p = 0.0;
    for k in 0..=n {
        let routed = 2.0 * k as f64 * t;
        let branch = 0.5 * ((-routed * gm).exp() + (-routed * gq).exp());
        log_p += branch.ln() - (total - routed) * gq;
    }
    let lo = t1q.ns().min(t1m.ns());
    let hi = t1q.ns().max(t1m.ns());
    Ok(SuccessProbability { p: log_p.exp(), p_min: bound(n, t, total, t1q, lo), p_max: bound(n, t, total, t1q, hi) })
}

/// Standard dual-rail with the tree initialized in vacuum; every excitation
/// comes from the register and spends `2kt` in the waveguide.
pub fn success_prob_standard_vacuum(n: u32, t: Time, t1q: Time, t1m: Time) -> Result<SuccessProbability> {
    check_lifetime("T1_q", t1q)?;
    check_lifetime("T1_m", t1m)?;
    let total = query_time(n, t, Encoding::StandardDualRailVacuum)?.ns();
    let p = bound(n, t.ns(), total, t1q, t1m.ns());
    Ok(SuccessProbability { p, p_min: p, p_max: p })
}

/// Order-of-magnitude estimate `exp(−2ⁿ T/T1_q)` for a tree initialized in
/// the logical subspace, where every node carries an excitation.
pub fn success_prob_standard_logical(n: u32, t: Time, t1q: Time) -> Result<f64> {
    check_lifetime("T1_q", t1q)?;
    let total = query_time(n, t, Encoding::StandardDualRailLogical)?.ns();
    Ok((-(2f64.powi(n as i32)) * total * rate(t1q)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeraldingReport {
    pub n: u32,
    pub memory_size: u64,
    pub t_ns: f64,
    pub query_time_ns: f64,
    pub p_no_error: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub rate_hz: f64,
    pub scenario: Encoding,
    /// True when the probability is a scaling estimate rather than exact.
    pub approximate: bool,
}

/// Success probability and heralding rate `P/T` for one scenario.
pub fn heralding_rate(n: u32, t: Time, t1q: Time, t1m: Time, scenario: Encoding) -> Result<HeraldingReport> {
    let total = query_time(n, t, scenario)?;
    let (probs, approximate) = match scenario {
        Encoding::SingleRail | Encoding::HybridDualRail => (success_prob_hybrid(n, t, t1q, t1m)?, false),
        Encoding::StandardDualRailVacuum => (success_prob_standard_vacuum(n, t, t1q, t1m)?, false),
        Encoding::StandardDualRailLogical => {
            let p = success_prob_standard_logical(n, t, t1q)?;
            (SuccessProbability { p, p_min: p, p_max: p }, true)
        }
    };
    if total.ns() <= 0.0 {
        return Err(Error::invalid("query time is zero"));
    }
    Ok(HeraldingReport {
        n,
        memory_size: 1u64 << n,
        t_ns: t.ns(),
        query_time_ns: total.ns(),
        p_no_error: probs.p,
        p_min: probs.p_min,
        p_max: probs.p_max,
        rate_hz: probs.p / total.seconds(),
        scenario,
        approximate,
    })
}

/// Probability that a qubit idle for `duration` shows no phase flip.
pub fn no_dephasing(duration: f64, t2: Time) -> f64 {
    0.5 * (1.0 + (-duration / t2.ns()).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DephasingEstimate {
    pub p_no_error: f64,
    /// Small-error approximation `2n²t/T2_q` of the infidelity.
    pub approx_infidelity: f64,
}

/// Lower bound on heralded fidelity from dephasing, hybrid schedule.
pub fn dephasing_no_error_prob(n: u32, t: Time, t2q: Time, t2m: Time) -> Result<DephasingEstimate> {
    check_lifetime("T2_q", t2q)?;
    check_lifetime("T2_m", t2m)?;
    let total = query_time(n, t, Encoding::HybridDualRail)?.ns();
    let t = t.ns();
    let mut p = 1.0;
    for k in 0..=n {
        let routed = 2.0 * k as f64 * t;
        p *= 0.5 * (no_dephasing(routed, t2m) + no_dephasing(routed, t2q)) * no_dephasing(total - routed, t2q);
    }
    let nf = n as f64;
    Ok(DephasingEstimate { p_no_error: p, approx_infidelity: 2.0 * nf * nf * t / t2q.ns() })
}

/// Thermal-excitation infidelity bound `4 n_th n(n+1) T/T1`.
pub fn thermal_infidelity_bound(n: u32, t: Time, t1: Time, n_th: f64) -> Result<f64> {
    check_lifetime("T1", t1)?;
    if !(n_th >= 0.0 && n_th.is_finite()) {
        return Err(Error::invalid(format!("thermal occupation must be non-negative, got {n_th}")));
    }
    let total = query_time(n, t, Encoding::HybridDualRail)?.ns();
    let nf = n as f64;
    Ok(4.0 * n_th * nf * (nf + 1.0) * total * rate(t1))
}

/// Query infidelity from per-route distortion `eps`: `eps n(n−1)`.
pub fn distortion_query_infidelity(n: u32, eps: f64) -> Result<f64> {
    check_depth(n)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("routing infidelity must be non-negative, got {eps}")));
    }
    let nf = n as f64;
    Ok(eps * nf * (nf - 1.0))
}

/// Probability that no released qubit decays out of `|f⟩` during the release.
pub fn f_decay_correction(n: u32, t_f: Time, t1q: Time) -> Result<f64> {
    check_depth(n)?;
    check_lifetime("T1_q", t1q)?;
    if !(t_f.ns() >= 0.0) {
        return Err(Error::invalid("t_f must be non-negative"));
    }
    Ok((-(n as f64) * t_f.ns() * rate(t1q)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ns(v: f64) -> Time {
        Time::from_ns(v)
    }
    fn us(v: f64) -> Time {
        Time::from_us(v)
    }

    #[test]
    fn query_times() {
        assert_eq!(query_time(4, ns(350.0), Encoding::HybridDualRail).unwrap().ns(), 4900.0);
        assert_eq!(query_time(1, ns(350.0), Encoding::HybridDualRail).unwrap().ns(), 700.0);
        assert_eq!(query_time(4, ns(350.0), Encoding::StandardDualRailVacuum).unwrap().ns(), 7700.0);
        assert!(query_time(0, ns(350.0), Encoding::SingleRail).is_err());
    }

    #[test]
    fn equal_lifetimes_collapse() {
        for n in 1..=10 {
            let t1 = us(100.0);
            let p = success_prob_hybrid(n, ns(350.0), t1, t1).unwrap();
            let total = query_time(n, ns(350.0), Encoding::HybridDualRail).unwrap().ns();
            let expected = (-(n as f64 + 1.0) * total / t1.ns()).exp();
            assert_relative_eq!(p.p, expected, max_relative = 1e-14);
            assert_relative_eq!(p.p_min, expected, max_relative = 1e-14);
            assert_relative_eq!(p.p_max, expected, max_relative = 1e-14);
        }
    }

    #[test]
    fn zero_step_is_certain() {
        assert_eq!(success_prob_hybrid(5, ns(0.0), us(100.0), us(2.0)).unwrap().p, 1.0);
        assert_eq!(success_prob_standard_vacuum(5, ns(0.0), us(100.0), us(2.0)).unwrap().p, 1.0);
        assert_eq!(success_prob_standard_logical(5, ns(0.0), us(100.0)).unwrap(), 1.0);
        assert_eq!(dephasing_no_error_prob(5, ns(0.0), us(10.0), us(10.0)).unwrap().p_no_error, 1.0);
    }

    #[test]
    fn nominal_heralding_point() {
        let r = heralding_rate(7, ns(350.0), us(100.0), us(2.0), Encoding::HybridDualRail).unwrap();
        assert_eq!(r.query_time_ns, 9100.0);
        assert!(r.rate_hz > 1000.0 && r.rate_hz < 5000.0, "{}", r.rate_hz);
        assert!(r.p_min <= r.p_no_error && r.p_no_error <= r.p_max);
    }

    #[test]
    fn infinite_lifetimes_give_inverse_query_time() {
        let r = heralding_rate(3, ns(350.0), Time::INFINITE, Time::INFINITE, Encoding::HybridDualRail).unwrap();
        assert_eq!(r.rate_hz, 1.0 / Time::from_ns(3500.0).seconds());
    }

    #[test]
    fn standard_is_worse_than_hybrid() {
        let h = success_prob_hybrid(4, ns(350.0), us(100.0), us(2.0)).unwrap().p;
        let s = success_prob_standard_vacuum(4, ns(350.0), us(100.0), us(2.0)).unwrap().p;
        assert!(s < h);
        let same = success_prob_standard_vacuum(4, ns(350.0), us(100.0), us(100.0)).unwrap().p;
        assert_relative_eq!(same, (-5.0 * 7700.0 / 100_000.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn logical_init_estimate() {
        let p = success_prob_standard_logical(5, ns(350.0), us(100.0)).unwrap();
        assert_relative_eq!(p, 0.0434, max_relative = 1e-2);
        let p5 = success_prob_standard_logical(5, ns(350.0), us(100.0)).unwrap().ln();
        let p6 = success_prob_standard_logical(6, ns(350.0), us(100.0)).unwrap().ln();
        let ratio = 2.0 * query_time(6, ns(350.0), Encoding::StandardDualRailLogical).unwrap().ns()
            / query_time(5, ns(350.0), Encoding::StandardDualRailLogical).unwrap().ns();
        assert_relative_eq!(p6 / p5, ratio, max_relative = 1e-12);
    }

    #[test]
    fn dephasing_values() {
        assert_relative_eq!(no_dephasing(1000.0, ns(1000.0)), 0.683_939_720_585_721, max_relative = 1e-12);
        let d = dephasing_no_error_prob(4, ns(350.0), Time::INFINITE, Time::INFINITE).unwrap();
        assert_eq!(d.p_no_error, 1.0);
    }

    #[test]
    fn thermal_distortion_and_f_decay() {
        assert_relative_eq!(thermal_infidelity_bound(3, ns(350.0), us(100.0), 0.01).unwrap(), 0.0168, max_relative = 1e-12);
        assert_eq!(thermal_infidelity_bound(3, ns(350.0), us(100.0), 0.0).unwrap(), 0.0);
        let r = thermal_infidelity_bound(40, ns(350.0), us(100.0), 0.01).unwrap()
            / thermal_infidelity_bound(20, ns(350.0), us(100.0), 0.01).unwrap();
        assert!((r - 8.0).abs() < 0.5);
        assert_eq!(distortion_query_infidelity(1, 1e-3).unwrap(), 0.0);
        assert_relative_eq!(distortion_query_infidelity(5, 1e-3).unwrap(), 0.02, max_relative = 1e-12);
        assert_eq!(distortion_query_infidelity(5, 0.0).unwrap(), 0.0);
        assert_eq!(f_decay_correction(3, ns(0.0), us(100.0)).unwrap(), 1.0);
        assert_relative_eq!(f_decay_correction(3, ns(50.0), us(100.0)).unwrap(), (-0.0015f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn bad_lifetimes_rejected() {
        assert!(success_prob_hybrid(2, ns(350.0), ns(0.0), us(1.0)).is_err());
        assert!(thermal_infidelity_bound(2, ns(350.0), us(1.0), -0.1).is_err());
    }
}
