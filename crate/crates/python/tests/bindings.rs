//! Drives the module through an embedded interpreter.

use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn run(code: &str) {
    Python::initialize();
    Python::attach(|py| {
        let m = wrap_pymodule!(optoblock_py::optoblock_module)(py);
        let globals = PyDict::new(py);
        globals.set_item("ob", m).unwrap();
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python snippet failed: {e}");
        }
    });
}

#[test]
fn params_roundtrip_and_validation() {
    run(r#"
p = ob.SystemParams(J=3e5, delta_c=-1e5)
assert p.get("J") == 3e5 and p.to_dict()["delta_c"] == -1e5
p.set("kappa_e", 1e3)
assert p.get("kappa_e") == 1e3
try:
    ob.SystemParams(kapa_c=1.0)
    raise AssertionError("unknown field accepted")
except ValueError:
    pass
assert "SystemParams(" in repr(p)
"#);
}

#[test]
fn analytic_tier_and_poles() {
    run(r#"
p = ob.SystemParams(J=2e5, delta_c=-1e5, delta_e=-4e5)
assert ob.g2_analytic(p)["g2_c"] < 1e-12
q = ob.SystemParams().with_detuning(-2e5)
r = ob.g2_analytic(q)
assert r["g2_c"] == 0.0 and r["g2_e"] == float("inf")
assert r["poles"] == ["pole_JplusDeltaC"]
"#);
}

#[test]
fn master_tiers_and_tier_errors() {
    run(r#"
p = ob.SystemParams().with_detuning(-1e5)
m = ob.evaluate(p, "master_effective", levels=5)
assert not m["hard_error"] and m["g2_c"] > 0.0
full = ob.evaluate(p, "master_full")
assert full["hard_error"] and full["status"].startswith("error:")
try:
    ob.evaluate(p, "nope")
    raise AssertionError("unknown tier accepted")
except ValueError as e:
    assert "master_effective" in str(e)
"#);
}

#[test]
fn noise_report_fields() {
    run(r#"
r = ob.effective_noise(ob.SystemParams(), 2.0, 1.0)
assert set(r) == {"n_eff", "xi_amp", "t_eff", "n_th", "clamped", "term1_complex"}
assert abs(r["xi_amp"] ** 2 - r["n_eff"]) <= 1e-12 * max(r["n_eff"], 1.0)
"#);
}

#[test]
fn sweep_from_config_text() {
    run(r#"
cfg = """
[params]
omega_m = 1e6
kappa_c = 5e3
kappa_e = 5e3
g_omega = 200.0
g_kappa = 500.0
J = 2e5
eps_c = 5e3
eps_e = 5e3

[[axes]]
params = ["delta_c", "delta_e"]
min = -3e5
max = -1e5
count = 3
"""
canon = ob.normalize_config(cfg)
assert ob.normalize_config(canon) == canon
csv = ob.run_sweep(cfg, threads=1)
lines = csv.splitlines()
assert lines[0] == "axis1,tier,g2_c,g2_e,n_c,n_e,status,residual"
assert len(lines) == 4
try:
    ob.run_sweep(cfg.replace("kappa_e", "kappa_ee"))
    raise AssertionError("bad config accepted")
except ValueError as e:
    assert "kappa_e" in str(e)
"#);
}
