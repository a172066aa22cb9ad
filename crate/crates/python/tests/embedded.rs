use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::ffi::CString;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "swarmseek").unwrap();
        swarmseek_py::register(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("ss", m).unwrap();
        f(py, &globals);
    });
}

fn run(py: Python<'_>, globals: &Bound<'_, PyDict>, code: &str) {
    let code = CString::new(code).unwrap();
    py.run(&code, Some(globals), None).unwrap();
}

#[test]
fn stability_from_python() {
    with_module(|py, g| {
        run(
            py,
            g,
            "v = ss.jury_check(0.675, -0.285, 1.193, 1.193, 1.0)\n\
             assert v.stable\n\
             assert abs(v.conditions['C13'][0] - 2.39525) < 1e-9\n\
             assert ss.jury_check(1.2, 1.2, 1.193, 1.193, 1.0).failed_conditions[:1] == ['C14']\n",
        );
    });
}

#[test]
fn scenario_from_python() {
    with_module(|py, g| {
        run(
            py,
            g,
            "sc = ss.Scenario(overrides={'algorithm': 'spso', 'n': 4})\n\
             assert sc.algorithm == 'spso' and sc.n == 4\n\
             r = sc.run(seed=3)\n\
             assert r.seed == 3 and r.iterations == sc.run(seed=3).iterations\n\
             try:\n    ss.Scenario(overrides={'params.w1': 1.5, 'params.w2': 1.5})\n    raise AssertionError('accepted')\n\
             except ss.UnstableError:\n    pass\n",
        );
    });
}
