//! Python bindings for bath generation, coherence simulation, readout and fitting.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spinbath::bath::{self, BathConfig, DepletionMode, DepletionModel, LatticeConstants};
use spinbath::cce::{self, CceOptions};
use spinbath::fit::{self, DataSeries, Measured, StretchedOptions};
use spinbath::noise::{self, ChiOptions, FilterFunction, FilterSequence, NoisePsd};
use spinbath::readout::{self, CountHistogram, ReadoutParams};
use spinbath::sequences::{self, PulseSequence, RegisterModel, StandardSequence};
use spinbath::spin::{CentralSpinModel, QubitSubspace, SpinSpecies};

fn py_err(e: spinbath::Error) -> PyErr {
    match e {
        spinbath::Error::NotHermitian { .. } | spinbath::Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn species(name: &str) -> PyResult<SpinSpecies> {
    match name {
        "si29" => Ok(SpinSpecies::si29()),
        "c13" => Ok(SpinSpecies::c13()),
        other => Err(PyValueError::new_err(format!(
            "register species must be \"si29\" or \"c13\", got {other:?}"
        ))),
    }
}

/// Divacancy electron spin in a static field along the c-axis.
#[pyclass(name = "CentralSpin", module = "pyspinbath", frozen)]
pub struct PyCentralSpin {
    inner: CentralSpinModel,
}

#[pymethods]
impl PyCentralSpin {
    /// `subspace` is "sq" (m_s 0 and -1) or "dq" (m_s +1 and -1).
    #[new]
    #[pyo3(signature = (magnetic_field_t, subspace = "sq"))]
    fn new(magnetic_field_t: f64, subspace: &str) -> PyResult<Self> {
        let subspace = match subspace {
            "sq" => QubitSubspace::Sq0Minus1,
            "dq" => QubitSubspace::DqPlus1Minus1,
            other => {
                return Err(PyValueError::new_err(format!(
                    "subspace must be \"sq\" or \"dq\", got {other:?}"
                )))
            }
        };
        Ok(Self {
            inner: CentralSpinModel::new(magnetic_field_t, subspace).map_err(py_err)?,
        })
    }

    #[getter]
    fn magnetic_field_t(&self) -> f64 {
        self.inner.magnetic_field_t
    }

    #[getter]
    fn levels(&self) -> (f64, f64) {
        self.inner.levels()
    }
}

/// Pulse sequence template; times passed to simulations set its total duration.
#[pyclass(name = "Sequence", module = "pyspinbath", frozen)]
pub struct PySequence {
    inner: PulseSequence,
}

#[pymethods]
impl PySequence {
    /// `kind` is one of ramsey, hahn, dq_ramsey, nuclear_ramsey, nuclear_hahn, xy8, cpmg.
    #[new]
    #[pyo3(signature = (kind, detuning_hz = 0.0, m_s = 0, blocks = 1, pulses = 1))]
    fn new(kind: &str, detuning_hz: f64, m_s: i8, blocks: usize, pulses: usize) -> PyResult<Self> {
        let standard = match kind {
            "ramsey" => StandardSequence::Ramsey { detuning_hz },
            "hahn" => StandardSequence::Hahn,
            "dq_ramsey" => StandardSequence::DqRamsey { detuning_hz },
            "nuclear_ramsey" => StandardSequence::NuclearRamsey { m_s },
            "nuclear_hahn" => StandardSequence::NuclearHahn { m_s },
            "xy8" => StandardSequence::Xy8 { blocks },
            "cpmg" => StandardSequence::Cpmg { pulses },
            other => return Err(PyValueError::new_err(format!("unknown sequence kind {other:?}"))),
        };
        Ok(Self {
            inner: standard.build(1.0).map_err(py_err)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml().map_err(py_err)
    }
}

/// Sampled spin bath around the defect.
#[pyclass(name = "Bath", module = "pyspinbath", frozen)]
pub struct PyBath {
    inner: bath::Bath,
}

#[pymethods]
impl PyBath {
    /// Samples isotopes and paramagnetic impurities on a 4H-SiC lattice.
    #[staticmethod]
    #[pyo3(signature = (
        extent_cells = (8, 8, 3),
        si29_abundance = 0.0468,
        c13_abundance = 0.0107,
        impurity_density_per_cm3 = 0.0,
        bath_radius_angstrom = 50.0,
        seed = 0,
    ))]
    fn sample(
        extent_cells: (usize, usize, usize),
        si29_abundance: f64,
        c13_abundance: f64,
        impurity_density_per_cm3: f64,
        bath_radius_angstrom: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let (a, b, c) = extent_cells;
        let sites = bath::generate_lattice([a, b, c], &LatticeConstants::default()).map_err(py_err)?;
        let config = BathConfig {
            si29_abundance,
            c13_abundance,
            impurity_density_per_cm3,
            bath_radius_angstrom,
            rng_seed: seed,
            ..BathConfig::default()
        };
        Ok(Self {
            inner: bath::sample_bath(&sites, &config).map_err(py_err)?,
        })
    }

    /// Reads the whitespace table written by `to_text`.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: bath::read_bath(text.as_bytes()).map_err(py_err)?,
        })
    }

    fn to_text(&self) -> String {
        bath::bath_to_string(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn nuclear_count(&self) -> usize {
        self.inner.nuclear_count()
    }

    #[getter]
    fn active_paramagnetic_count(&self) -> usize {
        self.inner.active_paramagnetic_count()
    }

    /// Copy with paramagnetic spins ionized according to the diode bias.
    #[pyo3(signature = (bias_volt, punch_through_volt = 40.0, full_depletion_volt = 60.0, logistic = false))]
    fn deplete(
        &self,
        bias_volt: f64,
        punch_through_volt: f64,
        full_depletion_volt: f64,
        logistic: bool,
    ) -> PyResult<Self> {
        let model = DepletionModel {
            punch_through_volt,
            full_depletion_volt,
            mode: if logistic {
                DepletionMode::Logistic
            } else {
                DepletionMode::Step
            },
            ..DepletionModel::default()
        };
        Ok(Self {
            inner: bath::apply_depletion(&self.inner, bias_volt, &model).map_err(py_err)?,
        })
    }

    /// Adds a register nucleus with the given hyperfine pair and returns its index.
    #[pyo3(signature = (a_parallel_hz, a_perp_hz, species_name = "si29"))]
    fn with_register(&self, a_parallel_hz: f64, a_perp_hz: f64, species_name: &str) -> PyResult<(Self, usize)> {
        let mut inner = self.inner.clone();
        let gamma = SpinSpecies::divacancy().gyromagnetic_ratio;
        let index = inner
            .inject_register(species(species_name)?, a_parallel_hz, a_perp_hz, gamma)
            .map_err(py_err)?;
        Ok((Self { inner }, index))
    }
}

/// Complex coherence sampled on a time grid.
#[pyclass(name = "CoherenceCurve", module = "pyspinbath", frozen)]
pub struct PyCoherenceCurve {
    inner: cce::CoherenceCurve,
}

#[pymethods]
impl PyCoherenceCurve {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn abs(&self) -> Vec<f64> {
        self.inner.abs()
    }

    #[getter]
    fn real(&self) -> Vec<f64> {
        self.inner.real()
    }

    #[getter]
    fn imag(&self) -> Vec<f64> {
        self.inner.values.iter().map(|v| v.im).collect()
    }

    /// First time |L| falls below 1/e, or None.
    fn one_over_e_time(&self) -> Option<f64> {
        self.inner.one_over_e_time()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn curve(inner: cce::CoherenceCurve) -> PyCoherenceCurve {
    PyCoherenceCurve { inner }
}

fn cce_options(pair_cutoff_angstrom: f64, paramagnetic_pair_cutoff_angstrom: f64) -> CceOptions {
    CceOptions {
        pair_cutoff_angstrom,
        paramagnetic_pair_cutoff_angstrom,
        ..CceOptions::default()
    }
}

/// Second-order cluster-correlation coherence of the electron.
#[pyfunction]
#[pyo3(signature = (bath, central, sequence, times, pair_cutoff_angstrom = 10.0, paramagnetic_pair_cutoff_angstrom = 200.0))]
fn cce_coherence(
    py: Python<'_>,
    bath: &PyBath,
    central: &PyCentralSpin,
    sequence: &PySequence,
    times: Vec<f64>,
    pair_cutoff_angstrom: f64,
    paramagnetic_pair_cutoff_angstrom: f64,
) -> PyResult<PyCoherenceCurve> {
    let options = cce_options(pair_cutoff_angstrom, paramagnetic_pair_cutoff_angstrom);
    py.detach(|| cce::cce_total(&bath.inner, &central.inner, &sequence.inner, &options, &times))
        .map(curve)
        .map_err(py_err)
}

/// Full-space evolution of every active bath spin; small baths only.
#[pyfunction]
fn exact_coherence(
    py: Python<'_>,
    bath: &PyBath,
    central: &PyCentralSpin,
    sequence: &PySequence,
    times: Vec<f64>,
) -> PyResult<PyCoherenceCurve> {
    py.detach(|| cce::exact_coherence(&bath.inner, &central.inner, &sequence.inner, &times))
        .map(curve)
        .map_err(py_err)
}

/// Coherence of bath nucleus `register` with the electron frozen in level `m_s`.
#[pyfunction]
#[pyo3(signature = (bath, register, m_s, magnetic_field_t, sequence, times, pair_cutoff_angstrom = 10.0))]
#[allow(clippy::too_many_arguments)]
fn nuclear_register_coherence(
    py: Python<'_>,
    bath: &PyBath,
    register: usize,
    m_s: f64,
    magnetic_field_t: f64,
    sequence: &PySequence,
    times: Vec<f64>,
    pair_cutoff_angstrom: f64,
) -> PyResult<PyCoherenceCurve> {
    let options = cce_options(
        pair_cutoff_angstrom,
        CceOptions::default().paramagnetic_pair_cutoff_angstrom,
    );
    py.detach(|| {
        cce::nuclear_register_coherence(
            register,
            m_s,
            &bath.inner,
            magnetic_field_t,
            &sequence.inner,
            &options,
            &times,
        )
    })
    .map(curve)
    .map_err(py_err)
}

/// Average over a static Gaussian detuning of width `sigma_hz`.
#[pyfunction]
#[pyo3(signature = (central, sequence, sigma_hz, times, samples = 2000))]
fn quasi_static_ensemble(
    central: &PyCentralSpin,
    sequence: &PySequence,
    sigma_hz: f64,
    times: Vec<f64>,
    samples: usize,
) -> PyResult<PyCoherenceCurve> {
    sequences::quasi_static_ensemble(&central.inner, &sequence.inner, sigma_hz, samples, &times)
        .map(curve)
        .map_err(py_err)
}

/// Filter-function coherence for a classical noise spectrum.
///
/// `model` is white (s0), lorentzian (variance, tau_c_s) or one_over_f
/// (amplitude); spectra are in rad^2/s per rad/s. `sequence` is ramsey,
/// hahn or cpmg.
#[pyfunction]
#[pyo3(signature = (model, times, sequence = "hahn", s0 = 0.0, variance = 0.0, tau_c_s = 1.0, amplitude = 0.0, pulses = 1))]
#[allow(clippy::too_many_arguments)]
fn noise_coherence(
    model: &str,
    times: Vec<f64>,
    sequence: &str,
    s0: f64,
    variance: f64,
    tau_c_s: f64,
    amplitude: f64,
    pulses: usize,
) -> PyResult<(PyCoherenceCurve, Vec<f64>)> {
    let psd = match model {
        "white" => NoisePsd::White { s0 },
        "lorentzian" => NoisePsd::Lorentzian { variance, tau_c_s },
        "one_over_f" => NoisePsd::OneOverF { amplitude },
        other => return Err(PyValueError::new_err(format!("unknown noise model {other:?}"))),
    };
    let kind = match sequence {
        "ramsey" => FilterSequence::Ramsey,
        "hahn" => FilterSequence::Hahn,
        "cpmg" => FilterSequence::Cpmg { pulses },
        other => return Err(PyValueError::new_err(format!("unknown filter sequence {other:?}"))),
    };
    let result = noise::noise_curve(&FilterFunction::of(kind), &psd, &times, &ChiOptions::default()).map_err(py_err)?;
    Ok((curve(result.curve), result.chi))
}

/// Interpulse delay of the k-th XY8 resonance, seconds.
#[pyfunction]
fn resonance_tau(larmor_hz: f64, a_parallel_hz: f64, k: usize) -> PyResult<f64> {
    sequences::resonance_taus(larmor_hz, a_parallel_hz, k).map_err(py_err)
}

/// Population P0 after XY8-N on the electron-register pair at each interpulse delay.
#[pyfunction]
#[pyo3(signature = (central, a_parallel_hz, a_perp_hz, blocks, taus, species_name = "si29"))]
fn xy8_spectroscopy(
    central: &PyCentralSpin,
    a_parallel_hz: f64,
    a_perp_hz: f64,
    blocks: usize,
    taus: Vec<f64>,
    species_name: &str,
) -> PyResult<Vec<f64>> {
    let register = RegisterModel::from_field(
        &species(species_name)?,
        central.inner.magnetic_field_t,
        a_parallel_hz,
        a_perp_hz,
    );
    sequences::xy8_spectroscopy(&central.inner, &register, blocks, &taus).map_err(py_err)
}

/// Simulated repetitive-readout record.
#[pyclass(name = "ReadoutTrace", module = "pyspinbath", frozen)]
pub struct PyReadoutTrace {
    inner: readout::ReadoutTrace,
}

#[pymethods]
impl PyReadoutTrace {
    #[getter]
    fn counts(&self) -> Vec<u64> {
        self.inner.counts.clone()
    }

    #[getter]
    fn hidden_state(&self) -> Vec<i8> {
        self.inner.hidden_state.clone()
    }

    #[getter]
    fn differential(&self) -> Vec<f64> {
        self.inner.differential.clone()
    }

    fn flips(&self) -> usize {
        self.inner.flips()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Maximum-likelihood T1 from dwell times, with its 95% interval.
    fn estimate_t1<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let e = readout::estimate_t1(&self.inner).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("t1_s", e.t1_s)?;
        d.set_item("ci_low_s", e.ci_low_s)?;
        d.set_item("ci_high_s", e.ci_high_s)?;
        d.set_item("dwell_count", e.dwell_count)?;
        Ok(d)
    }

    /// Threshold maximizing the assignment fidelity of this trace's histograms.
    fn optimal_threshold<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        threshold_dict(py, &readout::histograms(&self.inner))
    }
}

fn threshold_dict<'py>(py: Python<'py>, h: &CountHistogram) -> PyResult<Bound<'py, PyDict>> {
    let r = readout::optimal_threshold(h).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("threshold", r.threshold)?;
    d.set_item("up_is_bright", r.up_is_bright)?;
    d.set_item("fidelity", r.fidelity)?;
    d.set_item("degenerate", r.degenerate)?;
    Ok(d)
}

/// Telegraph register with Poisson photon counts per shot.
#[pyfunction]
#[pyo3(signature = (rate_up_hz, rate_down_hz, shot_duration_s, nuclear_t1_s, n_shots, seed = 0))]
fn simulate_qnd_trace(
    rate_up_hz: f64,
    rate_down_hz: f64,
    shot_duration_s: f64,
    nuclear_t1_s: f64,
    n_shots: usize,
    seed: u64,
) -> PyResult<PyReadoutTrace> {
    let params = ReadoutParams::new(rate_up_hz, rate_down_hz, shot_duration_s, nuclear_t1_s, seed);
    let inner = readout::simulate_qnd_trace(&params, n_shots).map_err(py_err)?;
    Ok(PyReadoutTrace { inner })
}

/// Exhaustive threshold search on two count histograms indexed by count.
#[pyfunction]
fn optimal_threshold<'py>(py: Python<'py>, up: Vec<f64>, down: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    threshold_dict(py, &CountHistogram { up, down })
}

fn series(t: Vec<f64>, y: Vec<f64>, sigma: Vec<f64>) -> PyResult<DataSeries> {
    DataSeries::new(t, y, sigma).map_err(py_err)
}

/// Weighted fit of A exp(-(t/T)^n) [+ B].
#[pyfunction]
#[pyo3(signature = (t, y, sigma, fix_n = None, baseline = false))]
fn fit_stretched_exp<'py>(
    py: Python<'py>,
    t: Vec<f64>,
    y: Vec<f64>,
    sigma: Vec<f64>,
    fix_n: Option<f64>,
    baseline: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let fit = fit::fit_stretched_exp(&series(t, y, sigma)?, &StretchedOptions { fix_n, baseline }).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("amplitude", fit.amplitude)?;
    d.set_item("t_decay_s", fit.t_decay_s)?;
    d.set_item("stretch_n", fit.stretch_n)?;
    d.set_item("baseline", fit.baseline)?;
    d.set_item("sigma_t_decay_s", fit.sigma_t_decay_s)?;
    d.set_item("sigma_stretch_n", fit.sigma_stretch_n)?;
    d.set_item("chi2", fit.chi2)?;
    d.set_item("dof", fit.dof)?;
    Ok(d)
}

/// Smallest decay time consistent with non-decaying data at `confidence`.
#[pyfunction]
#[pyo3(signature = (t, y, sigma, stretch_n = 1.0, confidence = 0.99))]
fn coherence_lower_bound<'py>(
    py: Python<'py>,
    t: Vec<f64>,
    y: Vec<f64>,
    sigma: Vec<f64>,
    stretch_n: f64,
    confidence: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let b = fit::coherence_lower_bound(&series(t, y, sigma)?, stretch_n, confidence).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("t_lower_s", b.t_lower_s)?;
    d.set_item("exceeds_ceiling", b.exceeds_ceiling)?;
    d.set_item("critical_chi2", b.critical_chi2)?;
    d.set_item("dof", b.dof)?;
    Ok(d)
}

/// Compares T2*(a)/T2*(b) with sqrt(T1(a)/T1(b)); pairs are (value, sigma).
#[pyfunction]
fn ratio_scaling_check<'py>(
    py: Python<'py>,
    t2star: ((f64, f64), (f64, f64)),
    t1: ((f64, f64), (f64, f64)),
) -> PyResult<Bound<'py, PyDict>> {
    let m = |(v, s): (f64, f64)| Measured::new(v, s);
    let r = fit::ratio_scaling_check((m(t2star.0), m(t2star.1)), (m(t1.0), m(t1.1))).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("lhs", (r.lhs.value, r.lhs.sigma))?;
    d.set_item("rhs", (r.rhs.value, r.rhs.sigma))?;
    d.set_item("relative_difference", r.relative_difference)?;
    d.set_item("z_score", r.z_score)?;
    d.set_item("agrees", r.agrees)?;
    Ok(d)
}

#[pymodule]
fn pyspinbath(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyCentralSpin>()?;
    m.add_class::<PySequence>()?;
    m.add_class::<PyBath>()?;
    m.add_class::<PyCoherenceCurve>()?;
    m.add_class::<PyReadoutTrace>()?;
    m.add_function(wrap_pyfunction!(cce_coherence, m)?)?;
    m.add_function(wrap_pyfunction!(exact_coherence, m)?)?;
    m.add_function(wrap_pyfunction!(nuclear_register_coherence, m)?)?;
    m.add_function(wrap_pyfunction!(quasi_static_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(noise_coherence, m)?)?;
    m.add_function(wrap_pyfunction!(resonance_tau, m)?)?;
    m.add_function(wrap_pyfunction!(xy8_spectroscopy, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_qnd_trace, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(fit_stretched_exp, m)?)?;
    m.add_function(wrap_pyfunction!(coherence_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_scaling_check, m)?)?;
    Ok(())
}
