//! Python bindings for the `pilotplan` crate.
//!
//! Weights are passed as `"n/d"` strings (or anything whose `str()` has that
//! form, such as `fractions.Fraction`). Solutions come back as plain dicts.

use pilotplan::assignment::optimal_fixed_length;
use pilotplan::channel::{estimate_depth_rates, linear_rate_model};
use pilotplan::{
    CellGrid, ChannelParams, IncrementRule, MultiGroupConfig as CoreMulti, TwoGroupConfig as CoreTwo, Weight,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn weight(obj: &Bound<'_, PyAny>) -> PyResult<Weight> {
    obj.str()?.to_str()?.trim().parse::<Weight>().map_err(err)
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn rule(name: &str) -> PyResult<IncrementRule> {
    match name {
        "linear" => Ok(IncrementRule::Linear),
        "measured" => Ok(IncrementRule::Measured),
        other => Err(PyValueError::new_err(format!("unknown increment rule {other:?}"))),
    }
}

/// Per-depth rate table `C_0 < C_1 < ...`.
#[pyclass(module = "pilotplan_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct DepthRates(pilotplan::DepthRates);

#[pymethods]
impl DepthRates {
    #[new]
    fn new(rates: Vec<f64>) -> PyResult<Self> {
        pilotplan::DepthRates::from_values(rates).map(Self).map_err(err)
    }

    /// `C_i = c0 + slope * i` for `depths` depths.
    #[staticmethod]
    fn linear(c0: f64, slope: f64, depths: usize) -> PyResult<Self> {
        linear_rate_model(c0, slope, depths).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (cells, gamma=3.7, hole_ratio=0.14, cell_radius=500.0, trials=100_000, seed=1))]
    fn monte_carlo(
        py: Python<'_>,
        cells: u64,
        gamma: f64,
        hole_ratio: f64,
        cell_radius: f64,
        trials: u64,
        seed: u64,
    ) -> PyResult<Self> {
        let order = pilotplan::assignment::partition_depths(cells).map_err(err)? as u32;
        let grid = CellGrid::new(order, cell_radius, hole_ratio).map_err(err)?;
        let params = ChannelParams::new(gamma, trials, seed).map_err(err)?;
        py.detach(|| estimate_depth_rates(&grid, &params)).map(Self).map_err(err)
    }

    #[getter]
    fn rates(&self) -> Vec<f64> {
        self.0.rates().to_vec()
    }

    #[getter]
    fn std_errors(&self) -> Vec<f64> {
        self.0.std_errors().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.depths()
    }

    fn __repr__(&self) -> String {
        format!("DepthRates({:?})", self.0.rates())
    }
}

/// Two priority groups sharing `users` pilots per cell.
#[pyclass(module = "pilotplan_py", frozen)]
struct TwoGroupConfig(CoreTwo);

#[pymethods]
impl TwoGroupConfig {
    #[new]
    fn new(cells: u64, users: u64, alpha: &Bound<'_, PyAny>, omega: &Bound<'_, PyAny>) -> PyResult<Self> {
        CoreTwo::new(cells, users, weight(alpha)?, weight(omega)?).map(Self).map_err(err)
    }

    #[getter]
    fn k1(&self) -> u64 {
        self.0.k1()
    }

    #[getter]
    fn k2(&self) -> u64 {
        self.0.k2()
    }

    fn totals(&self) -> Vec<u64> {
        self.0.totals().collect()
    }

    /// Optimal group-1 length for total pilot length `total`.
    fn rho(&self, total: u64) -> PyResult<u64> {
        self.0.rho(total).map_err(err)
    }

    fn rho_closed_form(&self, total: u64) -> PyResult<u64> {
        self.0.rho_closed_form(total).map_err(err)
    }

    /// Largest maximizer of the weighted sum rate at `total`.
    fn mu(&self, total: u64) -> PyResult<u64> {
        self.0.mu(total).map_err(err)
    }

    fn wsr_bar(&self, total: u64, rates: &DepthRates) -> PyResult<f64> {
        self.0.wsr_bar(total, &rates.0).map_err(err)
    }

    /// Threshold list in units of `N_coh / K`; the last entry is `inf`.
    fn thresholds(&self, rates: &DepthRates) -> PyResult<Vec<f64>> {
        self.0.thresholds(&rates.0).map(|t| t.values).map_err(err)
    }

    fn optimize(&self, py: Python<'_>, n_coh: f64, rates: &DepthRates) -> PyResult<Py<PyAny>> {
        let sol = self.0.optimize(n_coh, &rates.0).map_err(err)?;
        to_py(py, &sol)
    }
}

/// Three or more groups, listed from highest to lowest priority.
#[pyclass(module = "pilotplan_py", frozen)]
struct MultiGroupConfig(CoreMulti);

#[pymethods]
impl MultiGroupConfig {
    /// `shares` is a list of `(alpha, omega)` pairs.
    #[new]
    fn new(cells: u64, users: u64, shares: Vec<(Bound<'_, PyAny>, Bound<'_, PyAny>)>) -> PyResult<Self> {
        let shares = shares.iter().map(|(a, w)| Ok((weight(a)?, weight(w)?))).collect::<PyResult<Vec<_>>>()?;
        CoreMulti::new(cells, users, &shares).map(Self).map_err(err)
    }

    #[pyo3(signature = (total, rates, rule="measured"))]
    fn greedy_allocate(&self, total: u64, rates: &DepthRates, rule: &str) -> PyResult<Vec<u64>> {
        self.0.greedy_allocate(total, &rates.0, self::rule(rule)?).map_err(err)
    }

    #[pyo3(signature = (n_coh, rates, rule="measured"))]
    fn optimize(&self, py: Python<'_>, n_coh: f64, rates: &DepthRates, rule: &str) -> PyResult<Py<PyAny>> {
        let sol = self.0.optimize(n_coh, &rates.0, self::rule(rule)?).map_err(err)?;
        to_py(py, &sol)
    }
}

/// Pilots per depth of the best `length`-pilot assignment for `users` users.
#[pyfunction]
fn optimal_vector(length: u64, users: u64, cells: u64) -> PyResult<Vec<u64>> {
    optimal_fixed_length(length, users, cells).map(|p| p.entries().to_vec()).map_err(err)
}

#[pymodule]
fn pilotplan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<DepthRates>()?;
    m.add_class::<TwoGroupConfig>()?;
    m.add_class::<MultiGroupConfig>()?;
    m.add_function(wrap_pyfunction!(optimal_vector, m)?)?;
    Ok(())
}
