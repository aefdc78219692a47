//! Python bindings for the hardyk library: weight algebra, disk geometry,
//! kernels, characteristic scans and operator-norm estimates.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hardyk::characteristic::CharFlag;
use hardyk::geometry::ArcInterval;
use hardyk::grid::{GridFunction, PolarGrid};
use hardyk::weights::{parse_weight, WeightSpec};
use hardyk::HardyError;

fn err(e: HardyError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Normalized area of the Carleson box over an interval of normalized
/// length `nl` (arc length divided by pi).
#[pyfunction]
fn box_area(nl: f64) -> f64 {
    hardyk::box_area(nl)
}

/// Kernel (1 - z * conj(lam))^(-alpha), principal branch.
#[pyfunction]
fn kernel(alpha: f64, z: Complex64, lam: Complex64) -> PyResult<Complex64> {
    hardyk::kernel_checked(alpha, z, lam).map_err(err)
}

/// Shift-summed dyadic majorant of the kernel modulus, truncated at
/// generation `j_max`.
#[pyfunction]
fn dyadic_kernel(alpha: f64, z: Complex64, lam: Complex64, j_max: u32) -> f64 {
    hardyk::dyadic_kernel_pair(alpha, z, lam, j_max)
}

/// Smallest covering interval from the two shifted dyadic grids:
/// returns `(start, len_rad)` of a dyadic J containing the input arc with
/// `|J| <= 6 |I|`.
#[pyfunction]
fn cover(start: f64, len_rad: f64) -> PyResult<(f64, f64)> {
    let arc = ArcInterval::new(start, len_rad).map_err(err)?;
    let j = hardyk::cover(&arc).materialize();
    Ok((j.start(), j.len_rad()))
}

/// A weight on the unit disk, built from the text grammar
/// (`const:<v>`, `radial:t=<v>`, `point:theta=<v>,s=<v>`, `tab:<path>`,
/// factors joined by `*`).
#[pyclass(frozen, skip_from_py_object)]
struct Weight {
    inner: WeightSpec,
}

#[pymethods]
impl Weight {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let inner = parse_weight(spec).map_err(err)?;
        inner.validate().map_err(err)?;
        Ok(Weight { inner })
    }

    /// Pointwise value at polar coordinates (r, theta).
    fn eval(&self, r: f64, theta: f64) -> PyResult<f64> {
        self.inner.eval_checked(r, theta).map_err(err)
    }

    /// Dual weight sigma = w^(-1/(p-1)).
    fn dual(&self, p: f64) -> PyResult<Weight> {
        Ok(Weight {
            inner: self.inner.dual(p).map_err(err)?,
        })
    }

    /// Pointwise power w^e.
    fn pow(&self, e: f64) -> PyResult<Weight> {
        Ok(Weight {
            inner: self.inner.pow(e).map_err(err)?,
        })
    }

    /// Rotated weight w(z e^{-i phi}).
    fn rotate(&self, phi: f64) -> Weight {
        Weight {
            inner: self.inner.rotate(phi),
        }
    }

    fn __repr__(&self) -> String {
        format!("Weight(\"{}\")", self.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

/// Polar discretization of the unit disk; cell count grows like 2^(depth+5).
#[pyclass(frozen)]
struct Grid {
    inner: PolarGrid,
}

#[pymethods]
impl Grid {
    #[new]
    fn new(depth: u32) -> PyResult<Self> {
        Ok(Grid {
            inner: PolarGrid::new(depth).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.inner.depth()
    }

    /// Centre and area of cell `i` as `(r, theta, area)`.
    fn cell(&self, i: usize) -> PyResult<(f64, f64, f64)> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!(
                "cell index {i} out of range for {} cells",
                self.inner.len()
            )));
        }
        let c = self.inner.cell(i);
        Ok((c.r, c.theta, c.area))
    }

    /// Index of the cell containing the point (r, theta).
    fn locate(&self, r: f64, theta: f64) -> usize {
        self.inner.locate(r, theta)
    }
}

fn flag_name(f: CharFlag) -> &'static str {
    match f {
        CharFlag::Finite => "finite",
        CharFlag::Divergent => "divergent",
        CharFlag::InadmissibleDual => "inadmissible_dual",
    }
}

/// Characteristic scan of `weight` over both shifted dyadic grids up to
/// generation `j_max` with `rotations` uniform grid rotations; quadrature
/// for tabulated weights runs on a depth-`depth` grid.
#[pyfunction]
#[pyo3(signature = (weight, p, alpha, j_max=10, rotations=4, depth=5))]
fn characteristic(
    py: Python<'_>,
    weight: &Weight,
    p: f64,
    alpha: f64,
    j_max: u32,
    rotations: usize,
    depth: u32,
) -> PyResult<Py<PyDict>> {
    let grid = PolarGrid::new(depth).map_err(err)?;
    let r = hardyk::characteristic(&weight.inner, p, alpha, j_max, rotations, &grid).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("flag", flag_name(r.flag))?;
    d.set_item("certificate_factor", r.certificate_factor)?;
    d.set_item("per_generation", r.per_generation.clone())?;
    d.set_item(
        "argmax",
        r.argmax.as_ref().map(|a| (a.start(), a.len_rad())),
    )?;
    Ok(d.unbind())
}

/// Power-iteration estimate of the L^2(weight) operator norm of the
/// alpha-kernel operator on a depth-`depth` grid.  Returns a dict with the
/// estimate, the iteration count and whether the tolerance was reached.
#[pyfunction]
#[pyo3(signature = (alpha, weight, depth=5, tol=1e-4, max_iter=200))]
fn norm_estimate(
    py: Python<'_>,
    alpha: f64,
    weight: &Weight,
    depth: u32,
    tol: f64,
    max_iter: usize,
) -> PyResult<Py<PyDict>> {
    let grid = PolarGrid::new(depth).map_err(err)?;
    let d = PyDict::new(py);
    match hardyk::norm_estimate_l2(alpha, &weight.inner, &grid, tol, max_iter) {
        Ok(r) => {
            d.set_item("estimate", r.estimate)?;
            d.set_item("iterations", r.iterations)?;
            d.set_item("residual", r.residual)?;
            d.set_item("converged", true)?;
        }
        Err(HardyError::NoConvergence { iterations, last }) => {
            d.set_item("estimate", last)?;
            d.set_item("iterations", iterations)?;
            d.set_item("residual", f64::NAN)?;
            d.set_item("converged", false)?;
        }
        Err(e) => return Err(err(e)),
    }
    d.set_item("grid_cells", grid.len())?;
    Ok(d.unbind())
}

/// Dyadic Carleson embedding ratio for a seeded random nonnegative test
/// function on a depth-`depth` grid, boxes truncated at `j_max`.
#[pyfunction]
#[pyo3(signature = (weight, p=2.0, depth=5, j_max=8, seed=1))]
fn embedding_ratio(weight: &Weight, p: f64, depth: u32, j_max: u32, seed: u64) -> PyResult<f64> {
    let grid = PolarGrid::new(depth).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = GridFunction::from_values(
        &grid,
        (0..grid.len())
            .map(|_| Complex64::new(rng.random::<f64>(), 0.0))
            .collect(),
    )
    .map_err(err)?;
    hardyk::carleson_embedding_ratio(&weight.inner, hardyk::GridShift::Zero, p, &g, &grid, j_max)
        .map_err(err)
}

/// Sampled check that the shift-summed dyadic kernel dominates the modulus
/// of the analytic kernel; returns the empirical sup of the ratio and its
/// value after doubling the sample budget.
#[pyfunction]
#[pyo3(signature = (alpha, samples=100_000, j_max=12))]
fn domination(py: Python<'_>, alpha: f64, samples: usize, j_max: u32) -> PyResult<Py<PyDict>> {
    let r = hardyk::domination_check(alpha, samples, j_max).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("sup_ratio", r.sup_ratio)?;
    d.set_item("doubled_sup_ratio", r.doubled_sup_ratio)?;
    d.set_item("stable", r.stable)?;
    d.set_item("included", r.included)?;
    d.set_item("excluded", r.excluded)?;
    Ok(d.unbind())
}

/// Sampled verification of the separated-boxes lower-bound geometry for the
/// kernel at angle scale `theta`; `d` defaults to the smallest admissible
/// separation for `alpha`.
#[pyfunction]
#[pyo3(signature = (alpha, theta=0.01, samples=50_000, d=None))]
fn necessity(
    py: Python<'_>,
    alpha: f64,
    theta: f64,
    samples: usize,
    d: Option<u32>,
) -> PyResult<Py<PyDict>> {
    let sep = d.unwrap_or_else(|| hardyk::choose_d(alpha));
    let r = hardyk::necessity_geometry(alpha, theta, sep, samples).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("d", r.d)?;
    out.set_item("all_slacks_nonnegative", r.all_slacks_nonnegative())?;
    out.set_item("bound_holds", r.bound_holds())?;
    out.set_item("bound_margin_min", r.bound_margin.min)?;
    Ok(out.unbind())
}

#[pymodule]
fn hardyk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(box_area, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(dyadic_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(cover, m)?)?;
    m.add_function(wrap_pyfunction!(characteristic, m)?)?;
    m.add_function(wrap_pyfunction!(norm_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(embedding_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(domination, m)?)?;
    m.add_function(wrap_pyfunction!(necessity, m)?)?;
    m.add_class::<Weight>()?;
    m.add_class::<Grid>()?;
    Ok(())
}
