//! Sectioned `key = value` scenario files.
//!
//! ```text
//! # straight line, two profiles compared
//! [path]
//! type = line
//! x0 = 0
//! y0 = 0
//! direction_deg = 0
//!
//! [limits]
//! speed = 12
//! r_min = 100
//!
//! [profile]
//! type = constant
//! L0 = 40
//!
//! [profile2]
//! type = variable
//! L_min = 40
//! L_max = 82
//! d_c = 32
//!
//! [init]
//! x = -150
//! y = 50
//! heading_deg = 90
//!
//! [sim]
//! t_final = 60
//! ```
//!
//! Angles are in degrees unless the key ends in `_rad`. Unknown sections,
//! unknown keys and repeated keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::envelope::GridSpec;
use crate::error::{GuidanceError, Result};
use crate::geometry::{PathModel, Point, Traversal};
use crate::guidance::{GuidanceLimits, LookaheadProfile};
use crate::sim::{Integrator, SimConfig, VehicleState, DEFAULT_DT};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub path: PathModel,
    pub limits: GuidanceLimits,
    pub profile: LookaheadProfile,
    /// Second profile, present in comparison mode.
    pub profile2: Option<LookaheadProfile>,
    pub init: VehicleState,
    pub sim: SimConfig,
}

impl Scenario {
    pub fn profiles(&self) -> Vec<LookaheadProfile> {
        std::iter::once(self.profile).chain(self.profile2).collect()
    }
}

/// Grid, limits and the constant/variable pair for envelope analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeConfig {
    pub grid: GridSpec,
    pub limits: GuidanceLimits,
    pub constant: LookaheadProfile,
    pub variable: LookaheadProfile,
}

pub const PRESET_NAMES: [&str; 3] = ["straight_line_table2", "ellipse_table2", "envelope_reference"];

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Section {
    name: String,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn raw(&mut self, key: &str) -> Option<(&str, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.as_str(), e.line)
        })
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        let Some((v, line)) = self.raw(key) else {
            return Ok(None);
        };
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(GuidanceError::Parse {
                line,
                message: format!("`{key}` expects a finite number, got `{v}`"),
            }),
        }
    }

    fn f64(&mut self, key: &str) -> Result<f64> {
        self.opt_f64(key)?.ok_or_else(|| self.missing(key))
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn opt_usize(&mut self, key: &str) -> Result<Option<usize>> {
        let Some((v, line)) = self.raw(key) else {
            return Ok(None);
        };
        v.parse::<usize>().map(Some).map_err(|_| GuidanceError::Parse {
            line,
            message: format!("`{key}` expects a non-negative integer, got `{v}`"),
        })
    }

    fn word(&mut self, key: &str) -> Result<Option<(String, usize)>> {
        Ok(self.raw(key).map(|(v, l)| (v.to_ascii_lowercase(), l)))
    }

    /// Angle given either as `<stem>_deg` or `<stem>_rad`.
    fn angle(&mut self, stem: &str) -> Result<Option<f64>> {
        let deg = self.opt_f64(&format!("{stem}_deg"))?;
        let rad = self.opt_f64(&format!("{stem}_rad"))?;
        match (deg, rad) {
            (Some(_), Some(_)) => Err(GuidanceError::validation(
                format!("{stem}_rad"),
                format!("give either {stem}_deg or {stem}_rad, not both"),
            )),
            (Some(d), None) => Ok(Some(d.to_radians())),
            (None, r) => Ok(r),
        }
    }

    fn missing(&self, key: &str) -> GuidanceError {
        GuidanceError::validation(key, format!("required in [{}]", self.name))
    }

    fn finish(self) -> Result<()> {
        match self.entries.iter().find(|(_, e)| !e.used) {
            Some((k, e)) => Err(GuidanceError::Parse {
                line: e.line,
                message: format!("unknown key `{k}` in [{}]", self.name),
            }),
            None => Ok(()),
        }
    }
}

struct Document {
    sections: BTreeMap<String, Section>,
}

impl Document {
    fn parse(text: &str, allowed: &[&str]) -> Result<Self> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .ok_or_else(|| GuidanceError::Parse {
                        line,
                        message: "unterminated section header".into(),
                    })?;
                if !allowed.contains(&name) {
                    return Err(GuidanceError::Parse {
                        line,
                        message: format!("unknown section [{name}]"),
                    });
                }
                if sections.contains_key(name) {
                    return Err(GuidanceError::Parse {
                        line,
                        message: format!("section [{name}] repeated"),
                    });
                }
                sections.insert(
                    name.to_string(),
                    Section {
                        name: name.to_string(),
                        entries: BTreeMap::new(),
                    },
                );
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| GuidanceError::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(GuidanceError::Parse {
                    line,
                    message: "empty key or value".into(),
                });
            }
            let section = current
                .as_ref()
                .and_then(|c| sections.get_mut(c))
                .ok_or_else(|| GuidanceError::Parse {
                    line,
                    message: "key outside of any section".into(),
                })?;
            if section.entries.contains_key(key) {
                return Err(GuidanceError::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            section.entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                    used: false,
                },
            );
        }
        Ok(Document { sections })
    }

    fn take(&mut self, name: &str) -> Result<Section> {
        self.sections.remove(name).ok_or_else(|| GuidanceError::Parse {
            line: 0,
            message: format!("missing section [{name}]"),
        })
    }

    fn take_opt(&mut self, name: &str) -> Option<Section> {
        self.sections.remove(name)
    }
}

fn parse_traversal(sec: &mut Section) -> Result<Traversal> {
    match sec.word("traversal")? {
        None => Ok(Traversal::Ccw),
        Some((w, _)) if w == "ccw" => Ok(Traversal::Ccw),
        Some((w, _)) if w == "cw" => Ok(Traversal::Cw),
        Some((w, line)) => Err(GuidanceError::Parse {
            line,
            message: format!("traversal must be ccw or cw, got `{w}`"),
        }),
    }
}

fn parse_path(mut sec: Section) -> Result<PathModel> {
    let (kind, line) = sec.word("type")?.ok_or_else(|| sec.missing("type"))?;
    let path = match kind.as_str() {
        "line" => {
            let anchor = Point::new(sec.f64("x0")?, sec.f64("y0")?);
            let angle = sec.angle("direction")?;
            let dx = sec.opt_f64("dx")?;
            let dy = sec.opt_f64("dy")?;
            match (angle, dx, dy) {
                (Some(a), None, None) => PathModel::line(anchor, Point::new(a.cos(), a.sin()))?,
                (None, Some(dx), Some(dy)) => {
                    let dir = Point::new(dx, dy);
                    // keep an already-unit vector bit-exact so files round-trip
                    if (dir.norm() - 1.0).abs() <= 4.0 * f64::EPSILON {
                        let p = PathModel::StraightLine { anchor, direction: dir };
                        p.validate()?;
                        p
                    } else {
                        PathModel::line(anchor, dir)?
                    }
                }
                _ => {
                    return Err(GuidanceError::validation(
                        "direction_deg",
                        "line needs direction_deg (or direction_rad) or both dx and dy",
                    ))
                }
            }
        }
        "circle" => {
            let center = Point::new(sec.f64("cx")?, sec.f64("cy")?);
            let radius = sec.f64("radius")?;
            let traversal = parse_traversal(&mut sec)?;
            PathModel::circle(center, radius, traversal)?
        }
        "ellipse" => {
            let center = Point::new(sec.f64("cx")?, sec.f64("cy")?);
            let a = sec.f64("a")?;
            let b = sec.f64("b")?;
            let traversal = parse_traversal(&mut sec)?;
            PathModel::ellipse(center, a, b, traversal)?
        }
        other => {
            return Err(GuidanceError::Parse {
                line,
                message: format!("path type must be line, circle or ellipse, got `{other}`"),
            })
        }
    };
    sec.finish()?;
    Ok(path)
}

fn parse_limits(mut sec: Section) -> Result<GuidanceLimits> {
    let mut limits = GuidanceLimits::new(sec.f64("speed")?, sec.f64("r_min")?)?;
    if let Some(eps) = sec.opt_f64("eps_proj")? {
        limits = limits.with_eps_proj(eps)?;
    }
    sec.finish()?;
    Ok(limits)
}

fn parse_profile(mut sec: Section) -> Result<LookaheadProfile> {
    let (kind, line) = sec.word("type")?.ok_or_else(|| sec.missing("type"))?;
    let p = match kind.as_str() {
        "constant" => LookaheadProfile::constant(sec.f64("L0")?)?,
        "variable" => LookaheadProfile::variable(sec.f64("L_min")?, sec.f64("L_max")?, sec.f64("d_c")?)?,
        other => {
            return Err(GuidanceError::Parse {
                line,
                message: format!("profile type must be constant or variable, got `{other}`"),
            })
        }
    };
    sec.finish()?;
    Ok(p)
}

fn parse_init(mut sec: Section) -> Result<VehicleState> {
    let x = sec.f64("x")?;
    let y = sec.f64("y")?;
    let heading = sec.angle("heading")?.ok_or_else(|| sec.missing("heading_deg"))?;
    sec.finish()?;
    Ok(VehicleState::new(x, y, heading))
}

fn parse_sim(mut sec: Section) -> Result<SimConfig> {
    let mut cfg = SimConfig::new(sec.f64("t_final")?);
    cfg.dt = sec.f64_or("dt", DEFAULT_DT)?;
    cfg.integrator = match sec.word("integrator")? {
        None => Integrator::Rk4,
        Some((w, _)) if w == "rk4" => Integrator::Rk4,
        Some((w, _)) if w == "euler" => Integrator::Euler,
        Some((w, line)) => {
            return Err(GuidanceError::Parse {
                line,
                message: format!("integrator must be rk4 or euler, got `{w}`"),
            })
        }
    };
    cfg.settle_eps = sec.opt_f64("settle_eps")?;
    cfg.validate()?;
    sec.finish()?;
    Ok(cfg)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut doc = Document::parse(text, &["path", "limits", "profile", "profile2", "init", "sim"])?;
    let path = parse_path(doc.take("path")?)?;
    let limits = parse_limits(doc.take("limits")?)?;
    let profile = parse_profile(doc.take("profile")?)?;
    let profile2 = doc.take_opt("profile2").map(parse_profile).transpose()?;
    let init = parse_init(doc.take("init")?)?;
    let sim = parse_sim(doc.take("sim")?)?;
    Ok(Scenario {
        path,
        limits,
        profile,
        profile2,
        init,
        sim,
    })
}

/// Envelope configuration: `[grid]`, `[limits]`, `[profile]` (constant law)
/// and `[profile2]` (variable law). Every `[grid]` key is optional.
pub fn parse_envelope_config(text: &str) -> Result<EnvelopeConfig> {
    let mut doc = Document::parse(text, &["grid", "limits", "profile", "profile2"])?;
    let mut grid = GridSpec::default();
    if let Some(mut sec) = doc.take_opt("grid") {
        grid.d_min = sec.f64_or("d_min", grid.d_min)?;
        grid.d_max = sec.f64_or("d_max", grid.d_max)?;
        if let Some(v) = sec.angle("eta_min")? {
            grid.eta_min = v;
        }
        if let Some(v) = sec.angle("eta_max")? {
            grid.eta_max = v;
        }
        grid.n_d = sec.opt_usize("n_d")?.unwrap_or(grid.n_d);
        grid.n_eta = sec.opt_usize("n_eta")?.unwrap_or(grid.n_eta);
        grid.kappa = sec.f64_or("kappa", grid.kappa)?;
        sec.finish()?;
    }
    let limits = parse_limits(doc.take("limits")?)?;
    let constant = parse_profile(doc.take("profile")?)?;
    let variable = parse_profile(doc.take("profile2")?)?;
    grid.validate()?;
    Ok(EnvelopeConfig {
        grid,
        limits,
        constant,
        variable,
    })
}

/// Shortest decimal that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x}")
}

/// Emits `<stem>_deg` when the degree value parses back bit-exactly.
fn angle_line(out: &mut String, stem: &str, rad: f64, wrap: bool) {
    let deg = rad.to_degrees();
    let back = deg.to_radians();
    let back = if wrap { crate::geometry::wrap_angle(back) } else { back };
    if back.to_bits() == rad.to_bits() {
        let _ = writeln!(out, "{stem}_deg = {}", num(deg));
    } else {
        let _ = writeln!(out, "{stem}_rad = {}", num(rad));
    }
}

fn write_limits(out: &mut String, l: &GuidanceLimits) {
    let _ = writeln!(out, "[limits]\nspeed = {}\nr_min = {}", num(l.speed), num(l.r_min));
    if let Some(e) = l.eps_proj {
        let _ = writeln!(out, "eps_proj = {}", num(e));
    }
    out.push('\n');
}

fn write_profile(out: &mut String, section: &str, p: &LookaheadProfile) {
    let _ = writeln!(out, "[{section}]");
    match *p {
        LookaheadProfile::Constant { l0 } => {
            let _ = writeln!(out, "type = constant\nL0 = {}", num(l0));
        }
        LookaheadProfile::Variable { l_min, l_max, d_c } => {
            let _ = writeln!(
                out,
                "type = variable\nL_min = {}\nL_max = {}\nd_c = {}",
                num(l_min),
                num(l_max),
                num(d_c)
            );
        }
    }
    out.push('\n');
}

fn traversal_str(t: Traversal) -> &'static str {
    match t {
        Traversal::Ccw => "ccw",
        Traversal::Cw => "cw",
    }
}

pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::from("[path]\n");
    match s.path {
        PathModel::StraightLine { anchor, direction } => {
            let _ = writeln!(out, "type = line\nx0 = {}\ny0 = {}", num(anchor.x), num(anchor.y));
            let angle = direction.y.atan2(direction.x);
            if Point::new(angle.cos(), angle.sin()).normalize() == direction {
                let _ = writeln!(out, "direction_rad = {}", num(angle));
            } else {
                let _ = writeln!(out, "dx = {}\ndy = {}", num(direction.x), num(direction.y));
            }
        }
        PathModel::Circle {
            center,
            radius,
            traversal,
        } => {
            let _ = writeln!(
                out,
                "type = circle\ncx = {}\ncy = {}\nradius = {}\ntraversal = {}",
                num(center.x),
                num(center.y),
                num(radius),
                traversal_str(traversal)
            );
        }
        PathModel::Ellipse {
            center,
            semi_major,
            semi_minor,
            traversal,
        } => {
            let _ = writeln!(
                out,
                "type = ellipse\ncx = {}\ncy = {}\na = {}\nb = {}\ntraversal = {}",
                num(center.x),
                num(center.y),
                num(semi_major),
                num(semi_minor),
                traversal_str(traversal)
            );
        }
    }
    out.push('\n');
    write_limits(&mut out, &s.limits);
    write_profile(&mut out, "profile", &s.profile);
    if let Some(p2) = &s.profile2 {
        write_profile(&mut out, "profile2", p2);
    }
    let _ = writeln!(out, "[init]\nx = {}\ny = {}", num(s.init.x), num(s.init.y));
    angle_line(&mut out, "heading", s.init.heading, true);
    out.push('\n');
    let _ = writeln!(
        out,
        "[sim]\nt_final = {}\ndt = {}\nintegrator = {}",
        num(s.sim.t_final),
        num(s.sim.dt),
        s.sim.integrator.as_str()
    );
    if let Some(e) = s.sim.settle_eps {
        let _ = writeln!(out, "settle_eps = {}", num(e));
    }
    out
}

pub fn serialize_envelope_config(c: &EnvelopeConfig) -> String {
    let g = &c.grid;
    let mut out = format!("[grid]\nd_min = {}\nd_max = {}\n", num(g.d_min), num(g.d_max));
    angle_line(&mut out, "eta_min", g.eta_min, false);
    angle_line(&mut out, "eta_max", g.eta_max, false);
    let _ = writeln!(out, "n_d = {}\nn_eta = {}\nkappa = {}\n", g.n_d, g.n_eta, num(g.kappa));
    write_limits(&mut out, &c.limits);
    write_profile(&mut out, "profile", &c.constant);
    write_profile(&mut out, "profile2", &c.variable);
    out.trim_end().to_string() + "\n"
}

const STRAIGHT_LINE_PRESET: &str = "\
# Straight-line case study: constant versus variable look-ahead
[path]
type = line
x0 = 0
y0 = 0
direction_deg = 0

[limits]
speed = 12
r_min = 100

[profile]
type = constant
L0 = 40

[profile2]
type = variable
L_min = 40
L_max = 82
d_c = 32

[init]
x = -150
y = 50
heading_deg = 90

[sim]
t_final = 60
dt = 0.01
integrator = rk4
";

const ELLIPSE_PRESET: &str = "\
# Elliptical orbit case study: constant versus variable look-ahead
[path]
type = ellipse
cx = 0
cy = 0
a = 180
b = 110
traversal = ccw

[limits]
speed = 12
r_min = 100

[profile]
type = constant
L0 = 22

[profile2]
type = variable
L_min = 22
L_max = 100
d_c = 20

[init]
x = 250
y = 120
heading_deg = 150

[sim]
t_final = 120
dt = 0.01
integrator = rk4
";

const ENVELOPE_REFERENCE: &str = "\
# Saturation envelope on a straight path
[grid]
d_min = 0
d_max = 200
eta_min_deg = -180
eta_max_deg = 180
n_d = 1000
n_eta = 1000
kappa = 0

[limits]
speed = 50
r_min = 100

[profile]
type = constant
L0 = 50

[profile2]
type = variable
L_min = 50
L_max = 150
d_c = 30
";

/// Text of a shipped preset, if the name is known.
pub fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "straight_line_table2" => Some(STRAIGHT_LINE_PRESET),
        "ellipse_table2" => Some(ELLIPSE_PRESET),
        "envelope_reference" => Some(ENVELOPE_REFERENCE),
        _ => None,
    }
}

pub fn preset_scenario(name: &str) -> Option<Scenario> {
    match name {
        "straight_line_table2" | "ellipse_table2" => {
            preset_text(name).map(|t| parse_scenario(t).expect("shipped preset"))
        }
        _ => None,
    }
}

pub fn preset_envelope() -> EnvelopeConfig {
    parse_envelope_config(ENVELOPE_REFERENCE).expect("shipped preset")
}
