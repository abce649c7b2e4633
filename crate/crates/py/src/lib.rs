//! Python bindings. Matrices cross the boundary as lists of rows.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use ::cqrrpt::analysis::{pivot_quality as pq, PivotedFactor};
use ::cqrrpt::cqrrpt::{cqrrpt as run_cqrrpt, cqrrpt_core, flop_model as model, CqrrptConfig, CqrrptOutput};
use ::cqrrpt::qrcp::{default_rank_tol, qrcp_maxnorm as maxnorm, validate as check};
use ::cqrrpt::sketching::{leverage_scores as scores, SketchFamily, SketchOperator as Op};
use ::cqrrpt::{testmat, DenseMatrix, Error};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Row lists to a dense matrix; every row must have the same length.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<DenseMatrix, Error> {
    if rows.is_empty() {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    DenseMatrix::from_rows(rows)
}

pub fn to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i)).collect()
}

fn parse_family(name: &str, nnz: usize) -> PyResult<SketchFamily> {
    match name {
        "gaussian" => Ok(SketchFamily::Gaussian),
        "saso" => Ok(SketchFamily::Saso { nnz_per_col: nnz }),
        "srft" => Ok(SketchFamily::Srft),
        _ => Err(PyValueError::new_err(format!("unknown sketch family {name:?}"))),
    }
}

/// A seeded sketching operator, applied from the left.
#[pyclass(frozen)]
pub struct SketchOperator {
    inner: Op,
}

#[pymethods]
impl SketchOperator {
    #[new]
    #[pyo3(signature = (family, d, m, seed=0, nnz=4))]
    fn new(family: &str, d: usize, m: usize, seed: u64, nnz: usize) -> PyResult<Self> {
        let inner = Op::sample(parse_family(family, nnz)?, d, m, seed).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family().name()
    }

    fn apply(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let m = from_rows(&rows).map_err(err)?;
        Ok(to_rows(&self.inner.apply(&m).map_err(err)?))
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        to_rows(&self.inner.to_dense())
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_bytes())
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(Self { inner: Op::from_bytes(data).map_err(err)? })
    }
}

/// Output of a CQRRPT run: `M[:, pivots] ≈ q @ r`.
#[pyclass(frozen)]
pub struct Factorization {
    out: CqrrptOutput,
}

#[pymethods]
impl Factorization {
    #[getter]
    fn q(&self) -> Vec<Vec<f64>> {
        to_rows(&self.out.factorization.q)
    }

    #[getter]
    fn r(&self) -> Vec<Vec<f64>> {
        to_rows(&self.out.factorization.r)
    }

    /// 0-based column indices.
    #[getter]
    fn pivots(&self) -> Vec<usize> {
        self.out.factorization.pivots.clone()
    }

    #[getter]
    fn k(&self) -> usize {
        self.out.k
    }

    #[getter]
    fn k0(&self) -> usize {
        self.out.k0
    }

    /// Diagnostics and timings as strings, in a fixed key order.
    fn record(&self) -> Vec<(&'static str, String)> {
        self.out.record()
    }

    fn __repr__(&self) -> String {
        let f = &self.out.factorization;
        format!("Factorization(m={}, n={}, k={})", f.q.rows(), f.r.cols(), self.out.k)
    }
}

fn config(gamma: f64, family: &str, nnz: usize, seed: u64, eps_tol: Option<f64>) -> PyResult<CqrrptConfig> {
    let mut cfg = CqrrptConfig { gamma, family: parse_family(family, nnz)?, seed, ..Default::default() };
    if let Some(e) = eps_tol {
        cfg.eps_tol = e;
    }
    Ok(cfg)
}

/// Factor `rows` with a fresh sketch of size `ceil(gamma * n)`.
#[pyfunction(name = "cqrrpt")]
#[pyo3(signature = (rows, gamma=1.25, family="saso", nnz=4, seed=0, eps_tol=None))]
fn factor(rows: Vec<Vec<f64>>, gamma: f64, family: &str, nnz: usize, seed: u64, eps_tol: Option<f64>) -> PyResult<Factorization> {
    let m = from_rows(&rows).map_err(err)?;
    let out = run_cqrrpt(&m, &config(gamma, family, nnz, seed, eps_tol)?).map_err(err)?;
    Ok(Factorization { out })
}

/// Factor `rows` with a given sketching operator.
#[pyfunction]
#[pyo3(signature = (rows, sketch, eps_tol=None))]
fn cqrrpt_with_sketch(rows: Vec<Vec<f64>>, sketch: &SketchOperator, eps_tol: Option<f64>) -> PyResult<Factorization> {
    let m = from_rows(&rows).map_err(err)?;
    let fam = sketch.inner.family();
    let mut cfg = CqrrptConfig { family: fam, ..Default::default() };
    if let Some(e) = eps_tol {
        cfg.eps_tol = e;
    }
    let out = cqrrpt_core(&m, &sketch.inner, &cfg).map_err(err)?;
    Ok(Factorization { out })
}

type Rows = Vec<Vec<f64>>;

/// Householder QR with max-norm pivoting: `(q, r, pivots)`.
#[pyfunction]
#[pyo3(signature = (rows, rank_tol=None))]
fn qrcp_maxnorm(rows: Vec<Vec<f64>>, rank_tol: Option<f64>) -> PyResult<(Rows, Rows, Vec<usize>)> {
    let m = from_rows(&rows).map_err(err)?;
    let f = maxnorm(&m, rank_tol.unwrap_or_else(|| default_rank_tol(m.cols())));
    Ok((to_rows(&f.q), to_rows(&f.r), f.pivots))
}

/// `(orthogonality_loss, reconstruction_error, passes)` of a factorization of `rows`.
#[pyfunction]
fn validate(f: &Factorization, rows: Vec<Vec<f64>>, tol: f64) -> PyResult<(f64, f64, bool)> {
    let m = from_rows(&rows).map_err(err)?;
    let rep = check(&f.out.factorization, &m, tol).map_err(err)?;
    Ok((rep.orthogonality_loss, rep.reconstruction_error, rep.pass))
}

/// Trailing-norm ratio and diagonal-ratio curves of `f` against max-norm QRCP.
#[pyfunction]
fn pivot_quality(f: &Factorization, rows: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let m = from_rows(&rows).map_err(err)?;
    let reference = maxnorm(&m, default_rank_tol(m.cols()));
    let test = PivotedFactor::from(&f.out.factorization);
    let c = pq(&m, (&reference).into(), test).map_err(err)?;
    Ok((c.trailing_ratio, c.diag_ratio_ref, c.diag_ratio_test))
}

#[pyfunction]
#[pyo3(signature = (m, n, k, d, c_sk=0.0))]
fn flop_model(m: usize, n: usize, k: usize, d: usize, c_sk: f64) -> PyResult<f64> {
    model(m, n, k, d, c_sk).map_err(err)
}

#[pyfunction]
fn leverage_scores(rows: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    scores(&from_rows(&rows).map_err(err)?).map_err(err)
}

/// Test matrix by name: gaussian, exact-rank, decay, staircase, high-coherence, kahan.
#[pyfunction]
#[pyo3(signature = (kind, m, n, seed=0, rank=10, cond=1e10, scale=1e10, theta=0.285))]
#[allow(clippy::too_many_arguments)]
fn generate(kind: &str, m: usize, n: usize, seed: u64, rank: usize, cond: f64, scale: f64, theta: f64) -> PyResult<Vec<Vec<f64>>> {
    let out = match kind {
        "gaussian" => testmat::gen_gaussian(m, n, seed),
        "exact-rank" => testmat::gen_exact_rank(m, n, rank, seed),
        "decay" => testmat::gen_spectral(m, n, &testmat::SpectrumSpec::PolynomialDecay { cond }, seed).map_err(err)?,
        "staircase" => testmat::gen_spectral(m, n, &testmat::SpectrumSpec::staircase(), seed).map_err(err)?,
        "high-coherence" => testmat::gen_high_coherence(m, n, scale, seed).map_err(err)?,
        "kahan" => testmat::gen_kahan(n, theta).map_err(err)?,
        _ => return Err(PyValueError::new_err(format!("unknown matrix kind {kind:?}"))),
    };
    Ok(to_rows(&out))
}

#[pymodule]
fn pycqrrpt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SketchOperator>()?;
    m.add_class::<Factorization>()?;
    m.add_function(wrap_pyfunction!(factor, m)?)?;
    m.add_function(wrap_pyfunction!(cqrrpt_with_sketch, m)?)?;
    m.add_function(wrap_pyfunction!(qrcp_maxnorm, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(pivot_quality, m)?)?;
    m.add_function(wrap_pyfunction!(flop_model, m)?)?;
    m.add_function(wrap_pyfunction!(leverage_scores, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
