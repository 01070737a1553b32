//! TOML sweep configuration.
//!
//! ```toml
//! tiers = ["analytic", "master_effective"]   # default ["analytic"]
//! output = "fig3.csv"                        # optional
//!
//! [params]            # SystemParams; swept fields may be left out
//! omega_m = 1e6
//! kappa_c = 5e3
//! kappa_e = 5e3
//! g_omega = 200.0
//! g_kappa = 500.0
//! J = 2e5
//! eps_c = 5e3
//! eps_e = 5e3
//! # gamma, delta_c, delta_e, n_th default to 0; T_b (K) sets n_th
//!
//! [[axes]]            # one or two
//! params = ["delta_c", "delta_e"]   # linked: all set to the axis value
//! label = "delta"                   # default: params joined by "+"
//! min = -5e5
//! max = 5e5
//! count = 401
//! scale = "linear"                  # or "log"
//!
//! [truncation]        # defaults shown
//! effective = 6
//! full_cavity = 4
//! full_mechanics = 8
//!
//! [solver]
//! method = "auto"                   # auto | direct | iterative
//! convention = "sandwich"           # sandwich | commutator
//! collapse = "displacement_modified" # or "standard"
//! gmres_tol = 1e-13
//! direct_limit = 4096
//!
//! [gate]              # optional truncation check before the sweep
//! truncations = [6, 12]
//! full_truncations = [[4, 8], [6, 12]]
//! tol = 1e-3
//! at = { delta_c = -1e5, delta_e = -1e5 }
//! ```
//!
//! Unknown keys are errors naming the closest valid key. All missing
//! required fields are reported together.

use std::collections::BTreeMap;
use std::path::PathBuf;

use toml::{Table, Value};

use super::{Axis, Gate, Scale, SolverSettings, SweepSpec, Tier, Truncations};
use crate::liouvillian::{Convention, SolverChoice};
use crate::model::{CollapseVariant, SystemParams};
use crate::{Error, Result};

const TOP: &[&str] = &["tiers", "output", "params", "axes", "truncation", "solver", "gate"];
const AXIS: &[&str] = &["params", "label", "min", "max", "count", "scale"];
const TRUNCATION: &[&str] = &["effective", "full_cavity", "full_mechanics"];
const SOLVER: &[&str] = &["method", "convention", "collapse", "gmres_tol", "direct_limit"];
const GATE: &[&str] = &["truncations", "full_truncations", "tol", "at"];
const REQUIRED_PARAMS: &[&str] = &["omega_m", "kappa_c", "kappa_e", "g_omega", "g_kappa", "J", "eps_c", "eps_e"];

pub fn nearest<'a>(key: &str, valid: &[&'a str]) -> Option<&'a str> {
    valid.iter().copied().min_by_key(|v| strsim::levenshtein(key, v))
}

#[derive(Default)]
struct Walk {
    unknown: Vec<String>,
    missing: Vec<String>,
    invalid: Vec<String>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Walk {
    fn check_keys(&mut self, path: &str, t: &Table, valid: &[&str]) {
        for k in t.keys() {
            if !valid.contains(&k.as_str()) {
                let hint = nearest(k, valid).map(|n| format!(" (nearest valid key: `{}`)", join(path, n))).unwrap_or_default();
                self.unknown.push(format!("`{}`{hint}", join(path, k)));
            }
        }
    }

    fn bad(&mut self, path: &str, key: &str, what: &str) {
        self.invalid.push(format!("`{}` {what}", join(path, key)));
    }

    fn f64(&mut self, path: &str, t: &Table, key: &str, required: bool) -> Option<f64> {
        match t.get(key) {
            None => {
                if required {
                    self.missing.push(join(path, key));
                }
                None
            }
            Some(Value::Float(v)) => Some(*v),
            Some(Value::Integer(v)) => Some(*v as f64),
            Some(_) => {
                self.bad(path, key, "must be a number");
                None
            }
        }
    }

    fn usize(&mut self, path: &str, t: &Table, key: &str, required: bool) -> Option<usize> {
        match t.get(key) {
            None => {
                if required {
                    self.missing.push(join(path, key));
                }
                None
            }
            Some(v) => match v.as_integer().and_then(|i| usize::try_from(i).ok()) {
                Some(n) => Some(n),
                None => {
                    self.bad(path, key, "must be a nonnegative integer");
                    None
                }
            },
        }
    }

    fn str<'t>(&mut self, path: &str, t: &'t Table, key: &str) -> Option<&'t str> {
        match t.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.bad(path, key, "must be a string");
                None
            }
        }
    }

    /// A string restricted to `choices`; unrecognized values name the closest one.
    fn choice<'c>(&mut self, path: &str, t: &Table, key: &str, choices: &[&'c str]) -> Option<&'c str> {
        let s = self.str(path, t, key)?;
        match choices.iter().find(|c| **c == s) {
            Some(c) => Some(c),
            None => {
                let hint = nearest(s, choices).map(|n| format!(" (nearest: \"{n}\")")).unwrap_or_default();
                self.bad(path, key, &format!("has unknown value \"{s}\"{hint}"));
                None
            }
        }
    }

    fn table<'t>(&mut self, path: &str, t: &'t Table, key: &str) -> Option<&'t Table> {
        match t.get(key) {
            None => None,
            Some(Value::Table(s)) => Some(s),
            Some(_) => {
                self.bad(path, key, "must be a table");
                None
            }
        }
    }

    fn strings(&mut self, path: &str, t: &Table, key: &str) -> Option<Vec<String>> {
        let arr = match t.get(key)? {
            Value::Array(a) => a,
            _ => {
                self.bad(path, key, "must be an array of strings");
                return None;
            }
        };
        let out: Option<Vec<String>> = arr.iter().map(|v| v.as_str().map(String::from)).collect();
        if out.is_none() {
            self.bad(path, key, "must be an array of strings");
        }
        out
    }

    fn finish(self) -> Result<()> {
        let mut parts = Vec::new();
        if !self.unknown.is_empty() {
            parts.push(format!("unknown keys: {}", self.unknown.join(", ")));
        }
        if !self.missing.is_empty() {
            parts.push(format!("missing required fields: {}", self.missing.join(", ")));
        }
        if !self.invalid.is_empty() {
            parts.push(format!("invalid values: {}", self.invalid.join(", ")));
        }
        if parts.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(parts.join("; ")))
        }
    }
}

fn parse_axis(w: &mut Walk, path: &str, t: &Table) -> Option<Axis> {
    w.check_keys(path, t, AXIS);
    let params = w.strings(path, t, "params");
    if t.get("params").is_none() {
        w.missing.push(join(path, "params"));
    }
    if let Some(ps) = &params {
        for p in ps {
            if !SystemParams::FIELDS.contains(&p.as_str()) {
                let hint = nearest(p, SystemParams::FIELDS).map(|n| format!(" (nearest: \"{n}\")")).unwrap_or_default();
                w.bad(path, "params", &format!("names unknown parameter \"{p}\"{hint}"));
            }
        }
    }
    let label = w.str(path, t, "label").map(String::from);
    let min = w.f64(path, t, "min", true);
    let max = w.f64(path, t, "max", true);
    let count = w.usize(path, t, "count", true);
    let scale = match w.choice(path, t, "scale", &["linear", "log"]) {
        Some("log") => Scale::Log,
        _ => Scale::Linear,
    };
    let params = params?;
    Some(Axis { label: label.unwrap_or_else(|| params.join("+")), params, min: min?, max: max?, count: count?, scale })
}

fn parse_gate(w: &mut Walk, t: &Table) -> Gate {
    w.check_keys("gate", t, GATE);
    let mut g = Gate::default();
    if let Some(v) = t.get("truncations") {
        match v.as_array().and_then(|a| a.iter().map(|x| x.as_integer().and_then(|i| usize::try_from(i).ok())).collect()) {
            Some(list) => g.truncations = list,
            None => w.bad("gate", "truncations", "must be an array of integers"),
        }
    }
    if let Some(v) = t.get("full_truncations") {
        let pairs: Option<Vec<(usize, usize)>> = v.as_array().and_then(|a| {
            a.iter()
                .map(|x| {
                    let p = x.as_array()?;
                    let n = |i: usize| p.get(i)?.as_integer().and_then(|x| usize::try_from(x).ok());
                    (p.len() == 2).then_some(())?;
                    Some((n(0)?, n(1)?))
                })
                .collect()
        });
        match pairs {
            Some(list) => g.full_truncations = list,
            None => w.bad("gate", "full_truncations", "must be an array of [cavity, mechanics] pairs"),
        }
    }
    if let Some(tol) = w.f64("gate", t, "tol", false) {
        g.tol = tol;
    }
    if let Some(at) = w.table("gate", t, "at") {
        w.check_keys("gate.at", at, SystemParams::FIELDS);
        for k in at.keys() {
            if let Some(v) = w.f64("gate.at", at, k, false) {
                g.at.insert(k.clone(), v);
            }
        }
    }
    g
}

pub fn parse_config(text: &str) -> Result<SweepSpec> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(format!("malformed config: {e}")))?;
    let mut w = Walk::default();
    w.check_keys("", &root, TOP);

    let tiers = match w.strings("", &root, "tiers") {
        Some(names) => names
            .iter()
            .filter_map(|n| {
                let t = Tier::from_name(n);
                if t.is_none() {
                    let names: Vec<&str> = Tier::ALL.iter().map(|t| t.name()).collect();
                    let hint = nearest(n, &names).map(|x| format!(" (nearest: \"{x}\")")).unwrap_or_default();
                    w.bad("", "tiers", &format!("names unknown tier \"{n}\"{hint}"));
                }
                t
            })
            .collect(),
        None => vec![Tier::Analytic],
    };
    let output = w.str("", &root, "output").map(PathBuf::from);

    let mut axes = Vec::new();
    match root.get("axes") {
        None => w.missing.push("axes".into()),
        Some(Value::Array(list)) => {
            for (i, a) in list.iter().enumerate() {
                let path = format!("axes[{i}]");
                match a.as_table() {
                    Some(t) => axes.extend(parse_axis(&mut w, &path, t)),
                    None => w.invalid.push(format!("`{path}` must be a table")),
                }
            }
        }
        Some(_) => w.bad("", "axes", "must be an array of tables ([[axes]])"),
    }
    let swept: Vec<&str> = root
        .get("axes")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .filter_map(|a| a.get("params")?.as_array())
        .flatten()
        .filter_map(Value::as_str)
        .collect();

    let empty = Table::new();
    let params_t = match w.table("", &root, "params") {
        Some(t) => t,
        None => {
            if root.get("params").is_none() {
                w.missing.push("params".into());
            }
            &empty
        }
    };
    w.check_keys("params", params_t, SystemParams::FIELDS);
    let mut fixed = SystemParams { gamma: 0.0, delta_c: 0.0, delta_e: 0.0, n_th: 0.0, t_b: None, ..SystemParams::baseline() };
    for name in SystemParams::FIELDS {
        let required = REQUIRED_PARAMS.contains(name) && !swept.contains(name) && !std::ptr::eq(params_t, &empty);
        if let Some(v) = w.f64("params", params_t, name, required) {
            if *name == "T_b" {
                fixed.t_b = Some(v);
            } else {
                let _ = fixed.set(name, v);
            }
        }
    }
    if let Some(t) = fixed.t_b {
        if params_t.get("n_th").is_none() {
            fixed = fixed.with_bath_temperature(t);
        }
    }
    // a swept field that is not pinned takes the start of its axis
    for a in &axes {
        for name in &a.params {
            if params_t.get(name.as_str()).is_none() {
                let _ = fixed.set(name, a.min);
            }
        }
    }

    let mut truncations = Truncations::default();
    if let Some(t) = w.table("", &root, "truncation") {
        w.check_keys("truncation", t, TRUNCATION);
        truncations.effective = w.usize("truncation", t, "effective", false).unwrap_or(truncations.effective);
        truncations.full_cavity = w.usize("truncation", t, "full_cavity", false).unwrap_or(truncations.full_cavity);
        truncations.full_mechanics = w.usize("truncation", t, "full_mechanics", false).unwrap_or(truncations.full_mechanics);
    }

    let mut solver = SolverSettings::default();
    if let Some(t) = w.table("", &root, "solver") {
        w.check_keys("solver", t, SOLVER);
        solver.method = match w.choice("solver", t, "method", &["auto", "direct", "iterative"]) {
            Some("direct") => SolverChoice::Direct,
            Some("iterative") => SolverChoice::Iterative,
            _ => solver.method,
        };
        solver.convention = match w.choice("solver", t, "convention", &["sandwich", "commutator"]) {
            Some("commutator") => Convention::Commutator,
            Some(_) => Convention::Sandwich,
            None => solver.convention,
        };
        solver.collapse = match w.choice("solver", t, "collapse", &["standard", "displacement_modified"]) {
            Some("standard") => CollapseVariant::Standard,
            Some(_) => CollapseVariant::DisplacementModified,
            None => solver.collapse,
        };
        solver.gmres_tol = w.f64("solver", t, "gmres_tol", false).unwrap_or(solver.gmres_tol);
        solver.direct_limit = w.usize("solver", t, "direct_limit", false).unwrap_or(solver.direct_limit);
    }

    let gate = w.table("", &root, "gate").map(|t| parse_gate(&mut w, t));
    w.finish()?;

    let spec = SweepSpec { axes, fixed, tiers, truncations, solver, gate, output };
    spec.validate()?;
    Ok(spec)
}

fn float(v: f64) -> Value {
    Value::Float(v)
}

fn int(v: usize) -> Value {
    Value::Integer(v as i64)
}

fn enum_name<T: serde::Serialize>(v: &T) -> Value {
    // unit variants serialize as their snake_case names
    Value::String(toml::Value::try_from(v).ok().and_then(|x| x.as_str().map(String::from)).unwrap_or_default())
}

/// Canonical TOML for `spec`, with every default written out.
pub fn serialize_config(spec: &SweepSpec) -> String {
    let mut root = Table::new();
    root.insert("tiers".into(), Value::Array(spec.tiers.iter().map(|t| Value::String(t.name().into())).collect()));
    if let Some(o) = &spec.output {
        root.insert("output".into(), Value::String(o.display().to_string()));
    }
    let mut params = Table::new();
    for name in SystemParams::FIELDS {
        if let Some(v) = spec.fixed.get(name) {
            params.insert((*name).into(), float(v));
        }
    }
    root.insert("params".into(), Value::Table(params));
    let axes = spec
        .axes
        .iter()
        .map(|a| {
            let mut t = Table::new();
            t.insert("params".into(), Value::Array(a.params.iter().cloned().map(Value::String).collect()));
            t.insert("label".into(), Value::String(a.label.clone()));
            t.insert("min".into(), float(a.min));
            t.insert("max".into(), float(a.max));
            t.insert("count".into(), int(a.count));
            t.insert("scale".into(), enum_name(&a.scale));
            Value::Table(t)
        })
        .collect();
    root.insert("axes".into(), Value::Array(axes));
    let mut tr = Table::new();
    tr.insert("effective".into(), int(spec.truncations.effective));
    tr.insert("full_cavity".into(), int(spec.truncations.full_cavity));
    tr.insert("full_mechanics".into(), int(spec.truncations.full_mechanics));
    root.insert("truncation".into(), Value::Table(tr));
    let mut so = Table::new();
    so.insert("method".into(), enum_name(&spec.solver.method));
    so.insert("convention".into(), enum_name(&spec.solver.convention));
    so.insert("collapse".into(), enum_name(&spec.solver.collapse));
    so.insert("gmres_tol".into(), float(spec.solver.gmres_tol));
    so.insert("direct_limit".into(), int(spec.solver.direct_limit));
    root.insert("solver".into(), Value::Table(so));
    if let Some(g) = &spec.gate {
        let mut gt = Table::new();
        gt.insert("truncations".into(), Value::Array(g.truncations.iter().map(|&n| int(n)).collect()));
        gt.insert(
            "full_truncations".into(),
            Value::Array(g.full_truncations.iter().map(|&(c, m)| Value::Array(vec![int(c), int(m)])).collect()),
        );
        gt.insert("tol".into(), float(g.tol));
        let at: BTreeMap<String, Value> = g.at.iter().map(|(k, &v)| (k.clone(), float(v))).collect();
        gt.insert("at".into(), Value::Table(at.into_iter().collect()));
        root.insert("gate".into(), Value::Table(gt));
    }
    toml::to_string(&root).expect("config tables always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[params]
omega_m = 1e6
kappa_c = 5e3
kappa_e = 5e3
g_omega = 200
g_kappa = 500
J = 2e5
eps_c = 5e3
eps_e = 5e3

[[axes]]
params = ["delta_c", "delta_e"]
min = -5e5
max = 5e5
count = 11
"#;

    fn err(text: &str) -> String {
        match parse_config(text) {
            Err(Error::Config(m)) => m,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let s = parse_config(MINIMAL).unwrap();
        assert_eq!(s.tiers, vec![Tier::Analytic]);
        assert_eq!(s.truncations, Truncations::default());
        assert_eq!(s.solver, SolverSettings::default());
        assert_eq!(s.axes[0].label, "delta_c+delta_e");
        assert_eq!(s.axes[0].scale, Scale::Linear);
        assert_eq!((s.fixed.gamma, s.fixed.n_th, s.fixed.t_b), (0.0, 0.0, None));
        assert_eq!(s.fixed.delta_c, -5e5);
        assert!(s.gate.is_none() && s.output.is_none());
    }

    #[test]
    fn typo_names_nearest_key() {
        let m = err(&MINIMAL.replace("kappa_c = 5e3", "kapa_c = 5e3"));
        assert!(m.contains("`params.kapa_c`"), "{m}");
        assert!(m.contains("nearest valid key: `params.kappa_c`"), "{m}");
        // a typo also leaves the real key missing
        assert!(m.contains("missing required fields: params.kappa_c"), "{m}");
        let m = err(&format!("tier = [\"analytic\"]\n{MINIMAL}"));
        assert!(m.contains("`tiers`"), "{m}");
    }

    #[test]
    fn missing_fields_listed_together() {
        let m = err("[params]\nomega_m = 1e6\n[[axes]]\nparams = [\"J\"]\n");
        for f in ["params.kappa_c", "params.kappa_e", "params.g_omega", "params.g_kappa", "params.eps_c", "params.eps_e", "axes[0].min", "axes[0].max", "axes[0].count"] {
            assert!(m.contains(f), "{f} not in {m}");
        }
        // J is swept, so not required
        assert!(!m.contains("params.J"), "{m}");
        let m = err("");
        assert!(m.contains("params") && m.contains("axes"), "{m}");
    }

    #[test]
    fn bad_values_rejected() {
        assert!(err(&format!("tiers = [\"analytik\"]\n{MINIMAL}")).contains("nearest: \"analytic\""));
        assert!(err(&MINIMAL.replace("count = 11", "count = 1")).contains("count"));
        assert!(err(&MINIMAL.replace("count = 11", "count = 11\nscale = \"log\"")).contains("log scale"));
        assert!(err(&MINIMAL.replace("count = 11", "count = 11\nscale = \"lin\"")).contains("scale"));
        assert!(parse_config("this is = = not toml").is_err());
    }

    #[test]
    fn serialization_is_idempotent() {
        let text = format!(
            "tiers = [\"analytic\", \"master_effective\"]\noutput = \"x.csv\"\n{}\n[gate]\ntruncations = [4, 6]\nat = {{ delta_c = -1e5 }}\n[solver]\nmethod = \"direct\"\n",
            MINIMAL.replace("J = 2e5", "J = 2e5\nT_b = 10")
        );
        let s1 = parse_config(&text).unwrap();
        let t1 = serialize_config(&s1);
        let s2 = parse_config(&t1).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(t1, serialize_config(&s2));
        assert_eq!(s2.solver.method, SolverChoice::Direct);
        assert!(s2.fixed.n_th > 0.0);
    }
}
