//! Python bindings for `fraclib`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict};

use fraclib::histo;
use fraclib::{
    FracError, Histogram as CoreHistogram, PiecewisePolynomial, Polynomial, TransformKind,
    TransformMethod,
};

fn err(e: FracError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn data_set(points: Vec<(f64, f64)>) -> PyResult<fraclib::DataSet> {
    fraclib::DataSet::new(points).map_err(err)
}

fn scales(alpha: Vec<f64>, n: usize) -> PyResult<fraclib::ScaleFactors> {
    let v = if alpha.len() == 1 { vec![alpha[0]; n] } else { alpha };
    fraclib::ScaleFactors::new(v).map_err(err)
}

fn histogram(knots: Vec<f64>, frequencies: Vec<f64>) -> PyResult<CoreHistogram> {
    let p = fraclib::Partition::new(knots).map_err(err)?;
    CoreHistogram::new(p, frequencies).map_err(err)
}

fn polys(coeffs: Vec<Vec<f64>>, lo: f64, hi: f64) -> PyResult<Vec<PiecewisePolynomial>> {
    coeffs
        .into_iter()
        .map(|c| PiecewisePolynomial::single(Polynomial::new(c), lo, hi).map_err(err))
        .collect()
}

/// A fractal function given by its affine IFS.
#[pyclass(frozen, skip_from_py_object, module = "pyfraclib")]
#[derive(Clone)]
pub struct FractalSystem {
    inner: fraclib::FractalSystem,
}

#[pymethods]
impl FractalSystem {
    /// System with maps `q_i` given as ascending coefficient lists on the whole interval.
    #[new]
    fn new(knots: Vec<f64>, alpha: Vec<f64>, q: Vec<Vec<f64>>) -> PyResult<Self> {
        let p = fraclib::Partition::new(knots).map_err(err)?;
        let n = p.len();
        let q = polys(q, p.lo(), p.hi())?;
        let inner = fraclib::FractalSystem::new(p, scales(alpha, n)?, q, None, "python")
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn affine_fif(points: Vec<(f64, f64)>, alpha: Vec<f64>) -> PyResult<Self> {
        let d = data_set(points)?;
        let s = scales(alpha, d.len() - 1)?;
        Ok(Self {
            inner: fraclib::build_affine_fif(&d, &s).map_err(err)?,
        })
    }

    #[staticmethod]
    fn interpolatory_discontinuous(points: Vec<(f64, f64)>, alpha: Vec<f64>, slopes: Vec<f64>) -> PyResult<Self> {
        let d = data_set(points)?;
        let s = scales(alpha, d.len() - 1)?;
        Ok(Self {
            inner: fraclib::build_interpolatory_discontinuous(&d, &s, &slopes).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: fraclib::io::system_from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        fraclib::io::system_to_json(&self.inner).map_err(err)
    }

    #[getter]
    fn knots(&self) -> Vec<f64> {
        self.inner.partition().knots().to_vec()
    }

    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.inner.alpha().to_vec()
    }

    /// Ascending coefficients of every piece of every map.
    #[getter]
    fn q(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner
            .q()
            .iter()
            .map(|p| p.pieces().iter().map(|c| c.coeffs().to_vec()).collect())
            .collect()
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.inner.variant().name()
    }

    fn knot_values(&self) -> Vec<f64> {
        self.inner.knot_values()
    }

    /// `(value, error_bound)` at `x`.
    #[pyo3(signature = (x, depth = 48))]
    fn eval(&self, x: f64, depth: usize) -> PyResult<(f64, f64)> {
        let r = fraclib::eval_at(&self.inner, x, depth).map_err(err)?;
        Ok((r.value, r.error_bound))
    }

    /// Rows `(x, value, code)` of the depth-`k` address grid.
    fn sample(&self, depth: u32) -> PyResult<Vec<(f64, f64, String)>> {
        let n = self.inner.n();
        let set = fraclib::sample_grid(&self.inner, depth).map_err(err)?;
        Ok(set
            .rows()
            .iter()
            .map(|r| (r.x, r.value, r.address.code_string(n)))
            .collect())
    }

    #[pyo3(signature = (n, seed = 0, burn_in = 64))]
    fn chaos(&self, n: usize, seed: u64, burn_in: usize) -> Vec<(f64, f64)> {
        fraclib::chaos_game(&self.inner, n, burn_in, seed).points
    }

    fn moments(&self, max_order: usize) -> PyResult<Vec<f64>> {
        Ok(fraclib::moments(&self.inner, max_order).map_err(err)?.values)
    }

    /// Panel-sum estimate of the `m`-th moment, extrapolated over depths `k-2..=k`.
    fn moment_oracle(&self, m: usize, depth: u32) -> PyResult<f64> {
        fraclib::moment_oracle_extrapolated(&self.inner, m, depth).map_err(err)
    }

    #[pyo3(signature = (kind, s, method = "quadrature", depth = 12, tol = 1e-12))]
    fn transform<'py>(
        &self,
        py: Python<'py>,
        kind: &str,
        s: f64,
        method: &str,
        depth: u32,
        tol: f64,
    ) -> PyResult<Bound<'py, PyComplex>> {
        let kind = parse_kind(kind)?;
        let method = match method {
            "quadrature" => TransformMethod::Quadrature { depth },
            "series" => TransformMethod::Series { tol },
            other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
        };
        let v = fraclib::transform(&self.inner, kind, s, method).map_err(err)?;
        Ok(PyComplex::from_doubles(py, v.value.re, v.value.im))
    }

    #[pyo3(signature = (kind, s, depth = 12))]
    fn transform_residual(&self, kind: &str, s: f64, depth: u32) -> PyResult<f64> {
        fraclib::transform_residual(&self.inner, parse_kind(kind)?, s, depth).map_err(err)
    }

    fn dimension(&self) -> f64 {
        fraclib::minkowski_dimension(&self.inner)
    }

    fn areas(&self) -> PyResult<Vec<f64>> {
        histo::areas(&self.inner).map_err(err)
    }

    fn self_residual(&self, depth: u32) -> PyResult<f64> {
        fraclib::self_residual(&self.inner, depth).map_err(err)
    }

    #[pyo3(signature = (tol = fraclib::DEFAULT_TOL))]
    fn validate<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let r = fraclib::validate(&self.inner, tol);
        let d = PyDict::new(py);
        d.set_item("variant", r.variant.name())?;
        d.set_item("join_residuals", r.join_residuals.clone())?;
        d.set_item("endpoint_residuals", r.endpoint_residuals.to_vec())?;
        d.set_item("ck_order", r.ck_order)?;
        d.set_item("knot_values", r.knot_values.clone())?;
        d.set_item("q_jump", r.q_jump)?;
        Ok(d)
    }

    fn derivative(&self, r: u32) -> PyResult<Self> {
        Ok(Self {
            inner: fraclib::derivative_system(&self.inner, r).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "FractalSystem(knots={:?}, alpha={:?}, variant='{}')",
            self.inner.partition().knots(),
            self.inner.alpha(),
            self.inner.variant().name()
        )
    }
}

fn parse_kind(kind: &str) -> PyResult<TransformKind> {
    TransformKind::parse(kind).ok_or_else(|| PyValueError::new_err(format!("unknown transform `{kind}`")))
}

/// Result of a histopolation solve.
#[pyclass(frozen, module = "pyfraclib")]
pub struct HistoSolution {
    inner: histo::HistoSolution,
}

#[pymethods]
impl HistoSolution {
    #[getter]
    fn system(&self) -> Option<FractalSystem> {
        self.inner.system.clone().map(|inner| FractalSystem { inner })
    }

    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.inner.alpha.clone()
    }

    #[getter]
    fn areas(&self) -> Vec<f64> {
        self.inner.areas.clone()
    }

    #[getter]
    fn targets(&self) -> Vec<f64> {
        self.inner.targets.clone()
    }

    #[getter]
    fn residuals(&self) -> Vec<f64> {
        self.inner.area_residuals.clone()
    }

    #[getter]
    fn feasible(&self) -> bool {
        self.inner.feasible
    }

    #[getter]
    fn condition(&self) -> Option<f64> {
        self.inner.diagnostics.condition
    }

    fn __repr__(&self) -> String {
        format!(
            "HistoSolution(feasible={}, alpha={:?}, areas={:?})",
            self.inner.feasible, self.inner.alpha, self.inner.areas
        )
    }
}

#[pyfunction]
fn solve_scales(knots: Vec<f64>, frequencies: Vec<f64>, q: Vec<Vec<f64>>) -> PyResult<HistoSolution> {
    let h = histogram(knots, frequencies)?;
    let p = h.partition().clone();
    let q = polys(q, p.lo(), p.hi())?;
    Ok(HistoSolution {
        inner: histo::solve_scales(&p, &h, &q).map_err(err)?,
    })
}

#[pyfunction]
fn solve_offsets(knots: Vec<f64>, frequencies: Vec<f64>, alpha: Vec<f64>, slopes: Vec<f64>) -> PyResult<HistoSolution> {
    let h = histogram(knots, frequencies)?;
    let p = h.partition().clone();
    let s = scales(alpha, p.len())?;
    Ok(HistoSolution {
        inner: histo::solve_offsets(&p, &h, &s, &slopes).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (knots, frequencies, alpha, y0 = 0.0))]
fn solve_continuous(knots: Vec<f64>, frequencies: Vec<f64>, alpha: Vec<f64>, y0: f64) -> PyResult<HistoSolution> {
    let h = histogram(knots, frequencies)?;
    let p = h.partition().clone();
    let s = scales(alpha, p.len())?;
    Ok(HistoSolution {
        inner: histo::solve_continuous(&p, &h, &s, y0).map_err(err)?,
    })
}

#[pyfunction]
fn histospline(spline: &FractalSystem, frequencies: Vec<f64>) -> PyResult<HistoSolution> {
    let h = CoreHistogram::new(spline.inner.partition().clone(), frequencies).map_err(err)?;
    Ok(HistoSolution {
        inner: histo::histospline(&spline.inner, &h).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (knots, frequencies, y0 = 0.0))]
fn cumulative_data(knots: Vec<f64>, frequencies: Vec<f64>, y0: f64) -> PyResult<Vec<(f64, f64)>> {
    let h = histogram(knots, frequencies)?;
    Ok(histo::cumulative_data(&h, y0).map_err(err)?.points().to_vec())
}

#[pymodule]
fn pyfraclib(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<FractalSystem>()?;
    m.add_class::<HistoSolution>()?;
    m.add_function(wrap_pyfunction!(solve_scales, m)?)?;
    m.add_function(wrap_pyfunction!(solve_offsets, m)?)?;
    m.add_function(wrap_pyfunction!(solve_continuous, m)?)?;
    m.add_function(wrap_pyfunction!(histospline, m)?)?;
    m.add_function(wrap_pyfunction!(cumulative_data, m)?)?;
    Ok(())
}
