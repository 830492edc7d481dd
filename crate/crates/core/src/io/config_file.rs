//! TOML scenario files.
//!
//! Every key is optional. Missing keys take the value of the chosen preset
//! (top-level `preset`, default `test1`) and each such default is recorded in
//! the provenance log. Unknown keys are errors in strict mode and logged
//! warnings otherwise.

use std::path::{Path, PathBuf};

use thiserror::Error;
use toml::{Table, Value};

use crate::simulation::{
    preset, ConfigError, ElectrodeFlow, ElectrodeHeat, ForceModel, OutletFlow, ScenarioConfig,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigFileError {
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error(transparent)]
    Semantic(#[from] ConfigError),
}

/// Parsed configuration and the notices produced while filling it in.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: ScenarioConfig,
    /// One line per default applied or unknown key ignored.
    pub provenance: Vec<String>,
}

const SECTIONS: [&str; 8] = [
    "geometry",
    "material",
    "stabilization",
    "time",
    "boundary",
    "force",
    "output",
    "solver",
];

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

struct Section<'a> {
    name: &'a str,
    table: Table,
    provenance: &'a mut Vec<String>,
}

impl Section<'_> {
    fn key(&self, k: &str) -> String {
        format!("{}.{k}", self.name)
    }

    fn take(&mut self, k: &str, default: impl std::fmt::Display) -> Option<Value> {
        let v = self.table.remove(k);
        if v.is_none() {
            self.provenance.push(format!("default {} = {default}", self.key(k)));
        }
        v
    }

    fn f64(&mut self, k: &str, target: &mut f64) -> Result<(), ConfigError> {
        match self.take(k, *target) {
            None => Ok(()),
            Some(Value::Float(f)) => {
                *target = f;
                Ok(())
            }
            Some(Value::Integer(i)) => {
                *target = i as f64;
                Ok(())
            }
            Some(other) => Err(ConfigError::new(self.key(k), format!("expected a number, got {}", other.type_str()))),
        }
    }

    fn usize(&mut self, k: &str, target: &mut usize) -> Result<(), ConfigError> {
        match self.take(k, *target) {
            None => Ok(()),
            Some(Value::Integer(i)) if i >= 0 => {
                *target = i as usize;
                Ok(())
            }
            Some(other) => Err(ConfigError::new(
                self.key(k),
                format!("expected a non-negative integer, got {other}"),
            )),
        }
    }

    fn bool(&mut self, k: &str, target: &mut bool) -> Result<(), ConfigError> {
        match self.take(k, *target) {
            None => Ok(()),
            Some(Value::Boolean(b)) => {
                *target = b;
                Ok(())
            }
            Some(other) => Err(ConfigError::new(self.key(k), format!("expected a boolean, got {}", other.type_str()))),
        }
    }

    fn choice(&mut self, k: &str, current: &str, allowed: &[&str]) -> Result<String, ConfigError> {
        match self.take(k, format!("\"{current}\"")) {
            None => Ok(current.to_string()),
            Some(Value::String(s)) if allowed.contains(&s.as_str()) => Ok(s),
            Some(other) => Err(ConfigError::new(
                self.key(k),
                format!("expected one of {allowed:?}, got {other}"),
            )),
        }
    }

    fn finish(self, strict: bool) -> Result<(), ConfigError> {
        if let Some(k) = self.table.keys().next() {
            if strict {
                return Err(ConfigError::new(self.key(k), "unknown key"));
            }
            for k in self.table.keys() {
                self.provenance.push(format!("ignored unknown key {}.{k}", self.name));
            }
        }
        Ok(())
    }
}

fn section_table(root: &mut Table, name: &str) -> Result<Table, ConfigError> {
    match root.remove(name) {
        None => Ok(Table::new()),
        Some(Value::Table(t)) => Ok(t),
        Some(_) => Err(ConfigError::new(name, "expected a table")),
    }
}

/// Parses and validates a scenario file.
pub fn parse_config(text: &str, strict: bool) -> Result<ParsedConfig, ConfigFileError> {
    let mut root: Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ConfigFileError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let mut provenance = Vec::new();

    let base = match root.remove("preset") {
        None => "test1".to_string(),
        Some(Value::String(s)) => s,
        Some(_) => return Err(ConfigError::new("preset", "expected a string").into()),
    };
    let mut c = preset(&base)
        .ok_or_else(|| ConfigError::new("preset", format!("unknown preset \"{base}\" (test1, test2, test3)")))?;
    match root.remove("name") {
        None => provenance.push(format!("default name = \"{}\"", c.name)),
        Some(Value::String(s)) => c.name = s,
        Some(_) => return Err(ConfigError::new("name", "expected a string").into()),
    }

    let mut tables = Vec::new();
    for name in SECTIONS {
        tables.push((name, section_table(&mut root, name)?));
    }
    if let Some(k) = root.keys().next() {
        if strict {
            return Err(ConfigError::new(k.as_str(), "unknown key").into());
        }
        provenance.extend(root.keys().map(|k| format!("ignored unknown key {k}")));
    }
    for (name, table) in tables {
        let mut s = Section {
            name,
            table,
            provenance: &mut provenance,
        };
        match name {
            "geometry" => {
                let g = &mut c.geometry;
                s.f64("length", &mut g.length)?;
                s.f64("height", &mut g.height)?;
                s.f64("electrode_radius", &mut g.electrode_radius)?;
                s.f64("tissue_depth", &mut g.tissue_depth)?;
                s.usize("arc_segments", &mut g.arc_segments)?;
                s.f64("mesh_size", &mut g.mesh_size)?;
            }
            "material" => {
                let m = &mut c.material;
                s.f64("sigma0", &mut m.sigma0)?;
                s.f64("eta0", &mut m.eta0)?;
                s.f64("theta_core", &mut m.theta_core)?;
                s.f64("dynamic_viscosity", &mut m.dynamic_viscosity)?;
                s.f64("density", &mut m.density)?;
                s.f64("viscosity_slope", &mut m.viscosity_slope)?;
                s.f64("blood_heat_capacity", &mut m.blood_heat_capacity)?;
                s.f64("tissue_heat_capacity", &mut m.tissue_heat_capacity)?;
            }
            "stabilization" => {
                let st = &mut c.stabilization;
                s.bool("enabled", &mut st.enabled)?;
                s.f64("alpha", &mut st.alpha)?;
                s.f64("beta", &mut st.beta)?;
                s.f64("c_r", &mut st.c_r)?;
                let mut r = st.theta_ref.unwrap_or(f64::NAN);
                if s.table.contains_key("theta_ref") {
                    s.f64("theta_ref", &mut r)?;
                    st.theta_ref = Some(r);
                }
            }
            "time" => {
                let t = &mut c.time;
                s.f64("t_final", &mut t.t_final)?;
                s.f64("tau", &mut t.tau)?;
                s.bool("stokes_warm_start", &mut t.stokes_warm_start)?;
            }
            "boundary" => {
                let b = &mut c.boundary;
                s.f64("inlet_amplitude", &mut b.inlet_amplitude)?;
                s.f64("electrode_potential", &mut b.electrode_potential)?;
                let outlet = match b.outlet {
                    OutletFlow::DoNothing => "do_nothing",
                    OutletFlow::InletProfile => "inlet_profile",
                };
                b.outlet = match s.choice("outlet_velocity", outlet, &["do_nothing", "inlet_profile"])?.as_str() {
                    "do_nothing" => OutletFlow::DoNothing,
                    _ => OutletFlow::InletProfile,
                };
                let (flow, mut amplitude) = match b.electrode_flow {
                    ElectrodeFlow::NoSlip => ("no_slip", 20.0),
                    ElectrodeFlow::Saline { amplitude } => ("saline", amplitude),
                };
                let flow = s.choice("electrode_velocity", flow, &["no_slip", "saline"])?;
                if flow == "saline" {
                    s.f64("saline_amplitude", &mut amplitude)?;
                }
                b.electrode_flow = match flow.as_str() {
                    "saline" => ElectrodeFlow::Saline { amplitude },
                    _ => ElectrodeFlow::NoSlip,
                };
                let (heat, mut temperature) = match b.electrode_heat {
                    ElectrodeHeat::Natural => ("natural", 20.0),
                    ElectrodeHeat::Fixed(t) => ("fixed", t),
                };
                let heat = s.choice("electrode_heat", heat, &["natural", "fixed"])?;
                if heat == "fixed" {
                    s.f64("saline_temperature", &mut temperature)?;
                }
                b.electrode_heat = match heat.as_str() {
                    "fixed" => ElectrodeHeat::Fixed(temperature),
                    _ => ElectrodeHeat::Natural,
                };
            }
            "force" => {
                let (kind, mut k) = match c.force {
                    ForceModel::None => ("none", crate::simulation::BOUSSINESQ_COEFFICIENT),
                    ForceModel::Boussinesq { coefficient } => ("boussinesq", coefficient),
                };
                let kind = s.choice("kind", kind, &["none", "boussinesq"])?;
                if kind == "boussinesq" {
                    s.f64("boussinesq_coefficient", &mut k)?;
                    c.force = ForceModel::Boussinesq { coefficient: k };
                } else {
                    c.force = ForceModel::None;
                }
            }
            "output" => {
                let o = &mut c.output;
                match s.take("directory", "none") {
                    None => {}
                    Some(Value::String(d)) => o.directory = Some(PathBuf::from(d)),
                    Some(_) => return Err(ConfigError::new("output.directory", "expected a string").into()),
                }
                s.usize("cadence", &mut o.cadence)?;
                let shown = format!("{:?}", o.probes);
                if let Some(v) = s.take("probes", shown) {
                    o.probes = parse_probes(&v)?;
                }
            }
            "solver" => {
                let so = &mut c.solver;
                s.f64("tol", &mut so.tol)?;
                s.usize("max_iter", &mut so.max_iter)?;
                s.usize("restart", &mut so.restart)?;
                s.f64("pressure_shift", &mut so.pressure_shift)?;
            }
            _ => unreachable!("section list is fixed"),
        }
        s.finish(strict)?;
    }
    c.validate()?;
    for line in &provenance {
        log::info!("config: {line}");
    }
    Ok(ParsedConfig { config: c, provenance })
}

fn parse_probes(v: &Value) -> Result<Vec<[f64; 2]>, ConfigError> {
    let err = || ConfigError::new("output.probes", "expected an array of [x, y] pairs");
    let number = |v: &Value| match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    v.as_array()
        .ok_or_else(err)?
        .iter()
        .map(|p| match p.as_array().map(|a| a.as_slice()) {
            Some([x, y]) => Ok([number(x).ok_or_else(err)?, number(y).ok_or_else(err)?]),
            _ => Err(err()),
        })
        .collect()
}

/// Reads and parses a scenario file; the error names the file when it
/// cannot be read.
pub fn load_config(path: impl AsRef<Path>, strict: bool) -> Result<ParsedConfig, ConfigFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigFileError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config(&text, strict)
}

/// The effective configuration as a complete scenario file. Parsing the
/// result gives back the same configuration.
pub fn config_to_toml(c: &ScenarioConfig) -> String {
    fn table(entries: Vec<(&str, Value)>) -> Value {
        Value::Table(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
    let f = Value::Float;
    let int = |u: usize| Value::Integer(u as i64);
    let g = &c.geometry;
    let m = &c.material;
    let st = &c.stabilization;
    let b = &c.boundary;
    let mut stab = vec![
        ("enabled", Value::Boolean(st.enabled)),
        ("alpha", f(st.alpha)),
        ("beta", f(st.beta)),
        ("c_r", f(st.c_r)),
    ];
    if let Some(r) = st.theta_ref {
        stab.push(("theta_ref", f(r)));
    }
    let mut boundary = vec![
        ("inlet_amplitude", f(b.inlet_amplitude)),
        ("electrode_potential", f(b.electrode_potential)),
        (
            "outlet_velocity",
            Value::String(
                match b.outlet {
                    OutletFlow::DoNothing => "do_nothing",
                    OutletFlow::InletProfile => "inlet_profile",
                }
                .into(),
            ),
        ),
    ];
    match b.electrode_flow {
        ElectrodeFlow::NoSlip => boundary.push(("electrode_velocity", Value::String("no_slip".into()))),
        ElectrodeFlow::Saline { amplitude } => {
            boundary.push(("electrode_velocity", Value::String("saline".into())));
            boundary.push(("saline_amplitude", f(amplitude)));
        }
    }
    match b.electrode_heat {
        ElectrodeHeat::Natural => boundary.push(("electrode_heat", Value::String("natural".into()))),
        ElectrodeHeat::Fixed(t) => {
            boundary.push(("electrode_heat", Value::String("fixed".into())));
            boundary.push(("saline_temperature", f(t)));
        }
    }
    let force = match c.force {
        ForceModel::None => vec![("kind", Value::String("none".into()))],
        ForceModel::Boussinesq { coefficient } => vec![
            ("kind", Value::String("boussinesq".into())),
            ("boussinesq_coefficient", f(coefficient)),
        ],
    };
    let mut output = vec![
        ("cadence", int(c.output.cadence)),
        (
            "probes",
            Value::Array(c.output.probes.iter().map(|p| Value::Array(vec![f(p[0]), f(p[1])])).collect()),
        ),
    ];
    if let Some(d) = &c.output.directory {
        output.push(("directory", Value::String(d.display().to_string())));
    }
    let root = table(vec![
        ("name", Value::String(c.name.clone())),
        (
            "geometry",
            table(vec![
                ("length", f(g.length)),
                ("height", f(g.height)),
                ("electrode_radius", f(g.electrode_radius)),
                ("tissue_depth", f(g.tissue_depth)),
                ("arc_segments", int(g.arc_segments)),
                ("mesh_size", f(g.mesh_size)),
            ]),
        ),
        (
            "material",
            table(vec![
                ("sigma0", f(m.sigma0)),
                ("eta0", f(m.eta0)),
                ("theta_core", f(m.theta_core)),
                ("dynamic_viscosity", f(m.dynamic_viscosity)),
                ("density", f(m.density)),
                ("viscosity_slope", f(m.viscosity_slope)),
                ("blood_heat_capacity", f(m.blood_heat_capacity)),
                ("tissue_heat_capacity", f(m.tissue_heat_capacity)),
            ]),
        ),
        ("stabilization", table(stab)),
        (
            "time",
            table(vec![
                ("t_final", f(c.time.t_final)),
                ("tau", f(c.time.tau)),
                ("stokes_warm_start", Value::Boolean(c.time.stokes_warm_start)),
            ]),
        ),
        ("boundary", table(boundary)),
        ("force", table(force)),
        ("output", table(output)),
        (
            "solver",
            table(vec![
                ("tol", f(c.solver.tol)),
                ("max_iter", int(c.solver.max_iter)),
                ("restart", int(c.solver.restart)),
                ("pressure_shift", f(c.solver.pressure_shift)),
            ]),
        ),
    ]);
    toml::to_string(&root).expect("plain tables serialise")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::{scenario_test1, scenario_test2, scenario_test3};

    #[test]
    fn empty_file_is_default_test1() {
        let parsed = parse_config("", false).unwrap();
        assert_eq!(parsed.config, scenario_test1());
        assert!(parsed.provenance.iter().any(|l| l == "default time.tau = 0.01"));
    }

    #[test]
    fn negative_tau_is_rejected_by_name() {
        let e = parse_config("[time]\ntau = -0.1\n", false).unwrap_err();
        let ConfigFileError::Semantic(e) = e else { panic!("{e:?}") };
        assert_eq!(e.key, "time.tau");
        assert!(e.to_string().contains("tau: must be > 0"), "{e}");
    }

    #[test]
    fn values_round_trip_into_the_model() {
        let parsed = parse_config("[material]\nsigma0 = 0.6\neta0 = 1\n", true).unwrap();
        assert_eq!(parsed.config.material.sigma0, 0.6);
        assert_eq!(parsed.config.material.eta0, 1.0);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse_config("[time]\ntau = = 3\n", false).unwrap_err();
        let ConfigFileError::Syntax { line, column, .. } = e else { panic!("{e:?}") };
        assert_eq!(line, 2);
        assert!(column > 1);
    }

    #[test]
    fn unknown_keys_depend_on_strictness() {
        let text = "[time]\ntua = 0.1\n";
        let e = parse_config(text, true).unwrap_err();
        assert!(matches!(e, ConfigFileError::Semantic(ConfigError { ref key, .. }) if key == "time.tua"));
        let lenient = parse_config(text, false).unwrap();
        assert!(lenient.provenance.iter().any(|l| l.contains("time.tua")));
        assert!(parse_config("colour = 1\n", true).is_err());
    }

    #[test]
    fn echo_is_a_fixed_point() {
        let mut odd = scenario_test3();
        odd.stabilization.theta_ref = Some(36.5);
        odd.output.probes = vec![[0.1, -0.2], [1.0 / 3.0, 0.7]];
        odd.output.directory = Some("out/run".into());
        odd.time.tau = 0.1 / 3.0;
        for c in [scenario_test1(), scenario_test2(), odd] {
            let echoed = parse_config(&config_to_toml(&c), true).unwrap();
            assert_eq!(echoed.config, c);
            assert!(echoed.provenance.iter().all(|l| l.contains("output.directory")), "{:?}", echoed.provenance);
        }
    }

    #[test]
    fn preset_selects_the_base() {
        let parsed = parse_config("preset = \"test2\"\n[time]\nt_final = 0.5\n", true).unwrap();
        let mut expected = scenario_test2();
        expected.time.t_final = 0.5;
        assert_eq!(parsed.config, expected);
        assert!(parse_config("preset = \"test9\"\n", false).is_err());
    }

    #[test]
    fn missing_file_names_the_path() {
        let e = load_config("/nonexistent/missing.toml", false).unwrap_err();
        assert!(e.to_string().contains("missing.toml"));
    }
}
