//! Python bindings. Thin wrappers over the core crate: exact shift
//! quantities cross the boundary as "a/b" strings, grid densities as a
//! class holding the cell values, everything else as native scalars.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use acim::density::GridDensity;
use acim::ergodic::{exactness_decay, two_letter_mean_zero_seed};
use acim::interval::engel;
use acim::interval::euclid::{self, PlanarRectangle};
use acim::markov;
use acim::markov::{CylinderWord, JumpParameter};
use acim::rational;
use acim::series::TruncationPolicy;
use acim::wandering;

fn py_err(e: acim::error::AcimError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_q(q: &str) -> PyResult<JumpParameter> {
    JumpParameter::parse(q).map_err(py_err)
}

fn word_of(letters: Vec<i64>) -> CylinderWord {
    CylinderWord::of(&letters)
}

/// Density on a uniform grid over an interval, with the mass that has
/// left the domain tracked separately.
#[pyclass]
#[derive(Clone)]
struct Grid {
    inner: GridDensity,
}

#[pymethods]
impl Grid {
    /// Indicator of [a, b], with fractional overlap on boundary cells.
    #[staticmethod]
    fn indicator(domain_lo: f64, domain_hi: f64, n_cells: usize, a: f64, b: f64) -> PyResult<Self> {
        GridDensity::indicator(domain_lo, domain_hi, n_cells, a, b)
            .map(|inner| Grid { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn constant(domain_lo: f64, domain_hi: f64, n_cells: usize, value: f64) -> PyResult<Self> {
        GridDensity::constant(domain_lo, domain_hi, n_cells, value)
            .map(|inner| Grid { inner })
            .map_err(py_err)
    }

    fn domain(&self) -> (f64, f64) {
        self.inner.domain()
    }

    fn n_cells(&self) -> usize {
        self.inner.n_cells()
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn value_at(&self, x: f64) -> f64 {
        self.inner.value_at(x)
    }

    fn l1_norm(&self) -> f64 {
        self.inner.l1_norm()
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn escaped_mass(&self) -> f64 {
        self.inner.escaped_mass()
    }

    /// One transfer step of the interval expansion map.
    fn transfer(&self) -> PyResult<Self> {
        engel::engel_transfer(&self.inner)
            .map(|inner| Grid { inner })
            .map_err(py_err)
    }

    /// Projection of x -> f(T^n x) onto the grid.
    fn orbit_pullback(&self, n: usize) -> PyResult<Self> {
        engel::orbit_pullback(&self.inner, n)
            .map(|inner| Grid { inner })
            .map_err(py_err)
    }
}

/// Measure of the cylinder fixed by `word` under the stationary chain.
#[pyfunction]
fn cylinder_measure(word: Vec<i64>, q: &str) -> PyResult<String> {
    let q = parse_q(q)?;
    Ok(rational::format(&markov::cylinder_measure(&word_of(word), &q)))
}

/// Same cylinder weighted by the invariant density.
#[pyfunction]
fn weighted_cylinder_measure(word: Vec<i64>, q: &str) -> PyResult<String> {
    let q = parse_q(q)?;
    Ok(rational::format(&markov::weighted_cylinder_measure(
        &word_of(word),
        &q,
    )))
}

/// Integral of the invariant density over the cylinder.
#[pyfunction]
fn density_expectation(word: Vec<i64>, q: &str) -> PyResult<String> {
    let q = parse_q(q)?;
    Ok(rational::format(&markov::density_expectation(
        &word_of(word),
        &q,
    )))
}

/// Conditional probability that the density is positive on the cylinder.
#[pyfunction]
fn positive_density_probability(word: Vec<i64>, q: &str) -> PyResult<String> {
    let q = parse_q(q)?;
    Ok(rational::format(&markov::positive_density_probability(
        &word_of(word),
        &q,
    )))
}

/// Orbit-plus-transfer series against the closed form: (lhs, rhs, equal).
#[pyfunction]
fn series_identity(word: Vec<i64>, q: &str) -> PyResult<(String, String, bool)> {
    let q = parse_q(q)?;
    let id = markov::series_identity(&word_of(word), &q).map_err(py_err)?;
    let holds = id.holds();
    Ok((
        rational::format(&id.series_sum),
        rational::format(&id.density),
        holds,
    ))
}

/// Exhaustive invariance check over all valid words up to the given
/// length with letters in [-3, 3]: (words checked, all exact).
#[pyfunction]
fn invariance_is_exact(q: &str, max_len: usize) -> PyResult<(usize, bool)> {
    let q = parse_q(q)?;
    let report = markov::invariance_check(&q, max_len, -3, 3);
    Ok((report.checked, report.exact))
}

/// Measure of `word` under the annihilating measure built from `pattern`.
#[pyfunction]
fn annihilating_measure(pattern: Vec<i64>, word: Vec<i64>, q: &str) -> PyResult<String> {
    let q = parse_q(q)?;
    let density = wandering::annihilating_density(&word_of(pattern), &q).map_err(py_err)?;
    Ok(rational::format(&density.weighted_measure(&word_of(word))))
}

/// Whether the occupation-level certificate for the pattern verifies.
#[pyfunction]
fn wandering_certified(pattern: Vec<i64>, q: &str) -> PyResult<bool> {
    let q = parse_q(q)?;
    Ok(wandering::certify_wandering_cylinder(&word_of(pattern), &q).verified)
}

/// Sample path of the chain: `length` letters starting from `start`.
#[pyfunction]
fn simulate_trajectory(q: &str, start: i64, length: usize, seed: u64) -> PyResult<Vec<i64>> {
    let q = parse_q(q)?;
    let word = markov::simulate_trajectory(&q, start, length, seed).map_err(py_err)?;
    Ok(word.letters().to_vec())
}

/// Mean number of returns to the origin of a simple walk on Z^d.
#[pyfunction]
fn zd_walk_return_estimate(d: usize, steps: usize, samples: usize, seed: u64) -> PyResult<f64> {
    markov::zd_walk_return_estimate(d, steps, samples, seed).map_err(py_err)
}

/// One step of the interval expansion map.
#[pyfunction]
fn engel_apply(x: f64) -> PyResult<f64> {
    engel::engel_apply(x).map_err(py_err)
}

/// Truncated invariant-density series started from `seed`. Returns the
/// summed density and the run report as a JSON string.
#[pyfunction]
fn invariant_density_series(
    seed: &Grid,
    max_terms: usize,
    tail_tolerance: f64,
) -> PyResult<(Grid, String)> {
    let policy = TruncationPolicy::new(max_terms, tail_tolerance).map_err(py_err)?;
    let report = engel::invariant_density_series(&seed.inner, &policy).map_err(py_err)?;
    let json = report.summary_json().to_string();
    Ok((
        Grid {
            inner: report.density,
        },
        json,
    ))
}

/// Iterated-transfer norm drain: (steps until the norm falls below the
/// tolerance, or None; worst per-step mass drift).
#[pyfunction]
fn dissipativity_witness(
    seed: &Grid,
    max_terms: usize,
    tail_tolerance: f64,
) -> PyResult<(Option<usize>, f64)> {
    let policy = TruncationPolicy::new(max_terms, tail_tolerance).map_err(py_err)?;
    let report = engel::dissipativity_witness(&seed.inner, &policy).map_err(py_err)?;
    Ok((report.steps_to_tolerance, report.max_mass_drift))
}

/// Reference measure dx dy / y of a rectangle in the open quadrant.
#[pyfunction]
fn euclid_rect_measure(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> PyResult<f64> {
    let rect = PlanarRectangle::new(x_lo, x_hi, y_lo, y_hi).map_err(py_err)?;
    Ok(euclid::euclid_rect_measure(&rect))
}

/// Absolute invariance defect of the rectangle under the subtractive map.
#[pyfunction]
fn euclid_invariance_defect(
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    quad_tol: f64,
) -> PyResult<f64> {
    let rect = PlanarRectangle::new(x_lo, x_hi, y_lo, y_hi).map_err(py_err)?;
    euclid::euclid_invariance_defect(&rect, quad_tol).map_err(py_err)
}

/// Exact L1 norms of iterated transfers of the standard mean-zero seed.
#[pyfunction]
fn decay_norms(q: &str, horizon: usize) -> PyResult<Vec<String>> {
    let q = parse_q(q)?;
    let seed = two_letter_mean_zero_seed(&q);
    let report = exactness_decay(&seed, &q, horizon).map_err(py_err)?;
    Ok((0..=horizon)
        .map(|n| rational::format(report.norm(n).expect("norm within horizon")))
        .collect())
}

#[pymodule]
fn acim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Grid>()?;
    m.add_function(wrap_pyfunction!(cylinder_measure, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_cylinder_measure, m)?)?;
    m.add_function(wrap_pyfunction!(density_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(positive_density_probability, m)?)?;
    m.add_function(wrap_pyfunction!(series_identity, m)?)?;
    m.add_function(wrap_pyfunction!(invariance_is_exact, m)?)?;
    m.add_function(wrap_pyfunction!(annihilating_measure, m)?)?;
    m.add_function(wrap_pyfunction!(wandering_certified, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(zd_walk_return_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(engel_apply, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_density_series, m)?)?;
    m.add_function(wrap_pyfunction!(dissipativity_witness, m)?)?;
    m.add_function(wrap_pyfunction!(euclid_rect_measure, m)?)?;
    m.add_function(wrap_pyfunction!(euclid_invariance_defect, m)?)?;
    m.add_function(wrap_pyfunction!(decay_norms, m)?)?;
    Ok(())
}
