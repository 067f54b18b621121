//! Python bindings: `import cutofflab`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use cutoff_lab::chain::{format_chain, parse_chain, DEFAULT_TOL};
use cutoff_lab::curvature::{chain_curvature, curvature_report, wasserstein1, CurvatureReport};
use cutoff_lab::entropy::{self, SuiteOptions, DEFAULT_TOL_T, EPS_GRID};
use cutoff_lab::families::{expand_range, parse_family, DEFAULT_STATE_CAP};
use cutoff_lab::{Error, InequalityVerdict, StochasticMatrix};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(cutofflab, CutoffLabError, PyException);

fn py_err(e: Error) -> PyErr {
    CutoffLabError::new_err(e.to_string())
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for cutoff_lab::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Outcome of checking one inequality `lhs <= rhs`.
#[pyclass(name = "Verdict", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyVerdict {
    name: String,
    lhs: f64,
    rhs: f64,
    slack: f64,
    passed: bool,
    vacuous: bool,
    tolerance: f64,
    context: BTreeMap<String, f64>,
}

impl From<InequalityVerdict> for PyVerdict {
    fn from(v: InequalityVerdict) -> Self {
        Self {
            name: v.name,
            lhs: v.lhs,
            rhs: v.rhs,
            slack: v.slack,
            passed: v.pass,
            vacuous: v.vacuous,
            tolerance: v.tolerance,
            context: v.context.into_iter().collect(),
        }
    }
}

#[pymethods]
impl PyVerdict {
    fn __repr__(&self) -> String {
        format!(
            "Verdict({:?}, lhs={}, rhs={}, passed={}, vacuous={})",
            self.name, self.lhs, self.rhs, self.passed, self.vacuous
        )
    }
}

/// Both curvature constants with their local values.
#[pyclass(name = "Curvature", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyCurvature {
    ollivier_min: f64,
    bakry_emery_min: f64,
    ollivier_edges: BTreeMap<(usize, usize), f64>,
    bakry_emery_vertices: Vec<f64>,
}

impl From<CurvatureReport> for PyCurvature {
    fn from(r: CurvatureReport) -> Self {
        Self {
            ollivier_min: r.ollivier_min,
            bakry_emery_min: r.bakry_emery_min,
            ollivier_edges: r.ollivier_edges,
            bakry_emery_vertices: r.bakry_emery_vertices,
        }
    }
}

#[pymethods]
impl PyCurvature {
    fn __repr__(&self) -> String {
        format!(
            "Curvature(ollivier_min={}, bakry_emery_min={})",
            self.ollivier_min, self.bakry_emery_min
        )
    }
}

/// A continuous-time chain with generator `P - I`.
#[pyclass(name = "Chain", frozen, skip_from_py_object)]
pub struct PyChain {
    inner: cutoff_lab::Chain,
}

#[pymethods]
impl PyChain {
    /// From a row-stochastic matrix given as a list of rows.
    #[new]
    #[pyo3(signature = (rows, transitive = false))]
    fn new(rows: Vec<Vec<f64>>, transitive: bool) -> PyResult<Self> {
        let p = StochasticMatrix::from_rows(&rows).py()?;
        Ok(Self {
            inner: cutoff_lab::Chain::new(p).py()?.with_transitivity(transitive),
        })
    }

    /// From a family spec such as `"hypercube:d=6"`.
    #[staticmethod]
    #[pyo3(signature = (spec, state_cap = DEFAULT_STATE_CAP))]
    fn from_spec(spec: &str, state_cap: usize) -> PyResult<Self> {
        let inst = parse_family(spec).and_then(|f| f.build(state_cap)).py()?;
        Ok(Self {
            inner: inst.to_chain().py()?,
        })
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path)?;
        let raw = parse_chain(&text).py()?;
        let diag = raw.diagnostics();
        if !diag.ok() {
            return Err(py_err(Error::InvalidMatrix(diag.problems().join("; "))));
        }
        Ok(Self {
            inner: cutoff_lab::Chain::new(raw.into_matrix().py()?).py()?,
        })
    }

    /// The chain-file text for this matrix.
    fn to_text(&self) -> String {
        format_chain(self.inner.matrix())
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn is_transitive(&self) -> bool {
        self.inner.is_transitive()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        let p = self.inner.matrix();
        (0..p.n()).map(|x| p.row(x).to_vec()).collect()
    }

    fn stationary(&self) -> Vec<f64> {
        self.inner.pi().as_slice().to_vec()
    }

    fn relaxation_time(&self) -> PyResult<f64> {
        self.inner.t_rel().py()
    }

    fn diameter(&self) -> PyResult<u32> {
        Ok(self.inner.metric().py()?.diameter)
    }

    /// `max 1/P(x,y)` over edges.
    fn sparsity(&self) -> PyResult<f64> {
        Ok(self.inner.metric().py()?.delta)
    }

    #[pyo3(signature = (t, tol = DEFAULT_TOL))]
    fn heat_kernel(&self, py: Python<'_>, t: f64, tol: f64) -> PyResult<Vec<Vec<f64>>> {
        let rows = py.detach(|| self.inner.heat_kernel(t, tol)).py()?;
        Ok(rows.into_iter().map(|r| r.into_vec()).collect())
    }

    #[pyo3(signature = (t, tol = DEFAULT_TOL))]
    fn worst_tv(&self, py: Python<'_>, t: f64, tol: f64) -> PyResult<f64> {
        py.detach(|| entropy::worst_tv(&self.inner, t, tol)).py()
    }

    #[pyo3(signature = (eps, tol_t = DEFAULT_TOL_T))]
    fn mixing_time(&self, py: Python<'_>, eps: f64, tol_t: f64) -> PyResult<f64> {
        py.detach(|| entropy::mixing_time(&self.inner, eps, tol_t)).py()
    }

    /// `(d*(t), V*(t))`.
    fn entropy_at(&self, py: Python<'_>, t: f64) -> PyResult<(f64, f64)> {
        let e = py.detach(|| entropy::entropy_at(&self.inner, t, DEFAULT_TOL)).py()?;
        Ok((e.d_star, e.v_star))
    }

    fn cutoff_time_equation(&self, py: Python<'_>, c: f64) -> PyResult<f64> {
        py.detach(|| entropy::cutoff_time_equation(&self.inner, c)).py()
    }

    fn entropic_ratio(&self, py: Python<'_>, eps: f64) -> PyResult<f64> {
        py.detach(|| entropy::entropic_concentration_ratio(&self.inner, eps)).py()
    }

    /// Curvature on every edge and vertex; `full=False` uses one vertex of
    /// a transitive chain.
    #[pyo3(signature = (full = true))]
    fn curvature(&self, py: Python<'_>, full: bool) -> PyResult<PyCurvature> {
        let report = py
            .detach(|| {
                if full {
                    curvature_report(self.inner.matrix())
                } else {
                    chain_curvature(&self.inner)
                }
            })
            .py()?;
        Ok(report.into())
    }

    /// Exact `W1(mu, nu)` under the graph metric of the support.
    fn wasserstein1(&self, mu: Vec<f64>, nu: Vec<f64>) -> PyResult<f64> {
        let metric = self.inner.metric().py()?;
        Ok(wasserstein1(&mu, &nu, metric).py()?.value)
    }

    #[pyo3(signature = (eps = None, t_grid = None, draws = 100, seed = 0))]
    fn verify(
        &self,
        py: Python<'_>,
        eps: Option<Vec<f64>>,
        t_grid: Option<Vec<f64>>,
        draws: usize,
        seed: u64,
    ) -> PyResult<Vec<PyVerdict>> {
        let options = SuiteOptions {
            eps: eps.unwrap_or_else(|| EPS_GRID.to_vec()),
            t_grid,
            draws,
            seed,
            curvature: None,
        };
        let report = py.detach(|| entropy::verify_suite(&self.inner, &options)).py()?;
        Ok(report.verdicts.into_iter().map(Into::into).collect())
    }

    fn __repr__(&self) -> String {
        format!("Chain(n={})", self.inner.n())
    }
}

#[pyfunction]
fn kl_divergence(mu: Vec<f64>, pi: Vec<f64>) -> PyResult<f64> {
    entropy::kl_divergence(&mu, &pi).py()
}

#[pyfunction]
fn varentropy(mu: Vec<f64>, pi: Vec<f64>) -> PyResult<f64> {
    entropy::varentropy(&mu, &pi).py()
}

#[pyfunction]
fn tv_distance(mu: Vec<f64>, nu: Vec<f64>) -> PyResult<f64> {
    entropy::tv_distance(&mu, &nu).py()
}

/// `[(value, spec), ...]` for a spec with one `a..b` or `a..b/step` range.
#[pyfunction(name = "expand_range")]
fn py_expand_range(spec: &str) -> PyResult<Vec<(f64, String)>> {
    expand_range(spec).py()
}

#[pymodule]
fn cutofflab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChain>()?;
    m.add_class::<PyVerdict>()?;
    m.add_class::<PyCurvature>()?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(varentropy, m)?)?;
    m.add_function(wrap_pyfunction!(tv_distance, m)?)?;
    m.add_function(wrap_pyfunction!(py_expand_range, m)?)?;
    m.add("CutoffLabError", m.py().get_type::<CutoffLabError>())?;
    m.add("EPS_GRID", EPS_GRID.to_vec())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_keep_every_field() {
        let v = InequalityVerdict::check("x", 1.0, 2.0, 1e-9).with("t", 0.5);
        let p = PyVerdict::from(v);
        assert!(p.passed && !p.vacuous);
        assert_eq!(p.slack, 1.0);
        assert_eq!(p.context.get("t"), Some(&0.5));
    }

    #[test]
    fn curvature_report_converts() {
        let inst = cutoff_lab::families::cycle(6).unwrap();
        let r = PyCurvature::from(curvature_report(&inst.matrix).unwrap());
        assert_eq!(r.ollivier_edges.len(), 6);
        assert_eq!(r.bakry_emery_vertices.len(), 6);
    }
}
