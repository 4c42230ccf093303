//! CSV and key=value writers. Numbers use 9 significant digits (C `%.9g`),
//! '.' as decimal separator and LF line endings.

use std::fmt::Write as _;

use crate::envelope::{EnvelopeReport, PolarPoint, RatioGain};
use crate::metrics::PerformanceReport;
use crate::sim::TrajectoryRecord;

pub const TRAJECTORY_HEADER: &str = "t,x,y,psi,d,eta,kappa,L0_eff,L1,eta_bar,region,a_d,V_lyap";
pub const REGION_HEADER: &str = "d,eta,eta_bar_c,eta_bar_v,region_c,region_v";
pub const SUMMARY_HEADER: &str = "A_const,A_var,G_abs,G_rel";
pub const PERFORMANCE_HEADER: &str = "t_s,J,Mp,T_far_measured,T_far_bound";

/// Formats like C's `%.9g`.
pub fn g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (8 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn trajectory_csv(traj: &TrajectoryRecord) -> String {
    let mut out = String::with_capacity(traj.samples.len() * 160);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            g9(s.t),
            g9(s.x),
            g9(s.y),
            g9(s.psi),
            g9(s.d),
            g9(s.eta),
            g9(s.kappa),
            g9(s.l0_eff),
            g9(s.l1),
            g9(s.eta_bar),
            s.region.as_str(),
            g9(s.accel),
            g9(s.lyapunov)
        );
    }
    out
}

pub fn region_csv(report: &EnvelopeReport) -> String {
    let d_nodes = report.d_nodes();
    let eta_nodes = report.eta_nodes();
    let mut out = String::with_capacity(d_nodes.len() * eta_nodes.len() * 64);
    out.push_str(REGION_HEADER);
    out.push('\n');
    let n_eta = eta_nodes.len();
    for (i, d) in d_nodes.iter().enumerate() {
        let (bc, bv) = (g9(report.boundary_const[i]), g9(report.boundary_var[i]));
        let d = g9(*d);
        for (j, eta) in eta_nodes.iter().enumerate() {
            let k = i * n_eta + j;
            let _ = writeln!(
                out,
                "{d},{},{bc},{bv},{},{}",
                g9(*eta),
                report.regions_const[k].as_str(),
                report.regions_var[k].as_str()
            );
        }
    }
    out
}

/// Area fractions and gains in percent.
pub fn summary_csv(report: &EnvelopeReport) -> String {
    format!(
        "{SUMMARY_HEADER}\n{},{},{},{}\n",
        g9(100.0 * report.a_const),
        g9(100.0 * report.a_var),
        g9(report.gain.absolute),
        g9(report.gain.relative)
    )
}

pub fn boundary_csv(report: &EnvelopeReport) -> String {
    let mut out = String::from("d,eta_bar_c,eta_bar_v\n");
    for (i, d) in report.d_nodes().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            g9(*d),
            g9(report.boundary_const[i]),
            g9(report.boundary_var[i])
        );
    }
    out
}

/// Polar maps of the same grid for both laws, joined row by row.
pub fn polar_csv(constant: &[PolarPoint], variable: &[PolarPoint]) -> String {
    let mut out = String::with_capacity(constant.len() * 64);
    out.push_str("d,eta,x,y,region_c,region_v\n");
    for (c, v) in constant.iter().zip(variable) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            g9(c.d),
            g9(c.eta),
            g9(c.x),
            g9(c.y),
            c.region.as_str(),
            v.region.as_str()
        );
    }
    out
}

pub fn sweep_csv(rows: &[RatioGain]) -> String {
    let mut out = String::from("ratio,A_const,A_var,G_abs,G_rel\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            g9(r.ratio),
            g9(100.0 * r.a_const),
            g9(100.0 * r.a_var),
            g9(r.gain.absolute),
            g9(r.gain.relative)
        );
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map(g9).unwrap_or_default()
}

/// Header plus a single row.
pub fn performance_csv(p: &PerformanceReport) -> String {
    format!("{PERFORMANCE_HEADER}\n{}\n", performance_row(p))
}

pub fn performance_row(p: &PerformanceReport) -> String {
    format!(
        "{},{},{},{},{}",
        opt(p.settling_time),
        g9(p.control_effort),
        g9(p.peak_overshoot),
        g9(p.t_far_measured),
        g9(p.t_far_bound)
    )
}

/// Flat `key=value` block; `t_s` is empty when the band is never entered.
pub fn performance_kv(p: &PerformanceReport) -> String {
    format!(
        "t_s={}\nJ={}\nMp={}\nT_far_measured={}\nT_far_bound={}\nsettle_eps={}\nsettled={}\n",
        opt(p.settling_time),
        g9(p.control_effort),
        g9(p.peak_overshoot),
        g9(p.t_far_measured),
        g9(p.t_far_bound),
        g9(p.settle_eps),
        p.settled()
    )
}
