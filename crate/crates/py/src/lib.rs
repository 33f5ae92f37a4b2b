//! Python bindings: script evaluation plus a thin view of corpus structures.

use cusp::completions::{gamma_complete, iota, tau_complete};
use cusp::corpus;
use cusp::dsl::{self, Config};
use cusp::ordered::{check_cu_axioms, check_o6, Structure as Inner};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

fn diagnostics_error(src: &str, ds: &[dsl::Diagnostic]) -> PyErr {
    let text: String = ds.iter().map(|d| d.render("<script>", src)).collect();
    PyValueError::new_err(text)
}

/// Evaluate a script; returns `(exit_code, report_json)`.
#[pyfunction]
#[pyo3(signature = (source, seed = 0, budget = None, summand_cap = None))]
fn run(source: &str, seed: u64, budget: Option<u64>, summand_cap: Option<u64>) -> (i32, String) {
    let defaults = Config::default();
    let config = Config {
        budget: budget.unwrap_or(defaults.budget),
        summand_cap: summand_cap.unwrap_or(defaults.summand_cap),
        seed,
        corpus_dir: None,
    };
    let report = match dsl::parse(source) {
        Ok(script) => dsl::evaluate(&script, &config),
        Err(diagnostics) => dsl::Report { entries: vec![], diagnostics },
    };
    (report.exit_code(), report.to_json_string(&config))
}

/// Parse and pretty-print; raises `ValueError` with rendered diagnostics.
#[pyfunction]
fn format(source: &str) -> PyResult<String> {
    dsl::parse(source).map(|s| dsl::print(&s)).map_err(|ds| diagnostics_error(source, &ds))
}

#[pyfunction]
fn corpus_names() -> Vec<String> {
    corpus::cu_corpus().into_iter().map(|(n, _)| n).collect()
}

/// A finite ordered monoid from the built-in corpus, addressed by labels.
#[pyclass(frozen)]
struct Structure {
    inner: Inner,
}

impl Structure {
    /// The structure itself if it carries `≺`, else `ι(S)` with `≺ = ≪`.
    fn with_aux(&self) -> Inner {
        if self.inner.has_aux() { self.inner.clone() } else { iota(&self.inner) }
    }

    fn idx(&self, label: &str) -> PyResult<usize> {
        self.inner.index_of(label).ok_or_else(|| PyKeyError::new_err(label.to_string()))
    }
}

#[pymethods]
impl Structure {
    #[staticmethod]
    fn from_corpus(name: &str) -> PyResult<Self> {
        corpus::by_name(name).map(|inner| Structure { inner }).ok_or_else(|| PyKeyError::new_err(name.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn add(&self, a: &str, b: &str) -> PyResult<String> {
        let s = self.inner.add(self.idx(a)?, self.idx(b)?);
        Ok(self.inner.label(s).to_string())
    }

    fn leq(&self, a: &str, b: &str) -> PyResult<bool> {
        Ok(self.inner.leq(self.idx(a)?, self.idx(b)?))
    }

    fn way_below(&self, a: &str, b: &str) -> PyResult<bool> {
        Ok(self.inner.way_below(self.idx(a)?, self.idx(b)?))
    }

    /// `None` when every Cu axiom holds, else `(law, labels)`.
    fn cu_violation(&self) -> Option<(String, Vec<String>)> {
        check_cu_axioms(&self.inner).err().map(|v| (v.law.to_string(), v.labels(&self.inner)))
    }

    fn o6_violation(&self) -> Option<(String, Vec<String>)> {
        check_o6(&self.inner).err().map(|v| (v.law.to_string(), v.labels(&self.inner)))
    }

    fn gamma_len(&self) -> PyResult<usize> {
        gamma_complete(&self.with_aux()).map(|g| g.structure.len()).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn tau_len(&self) -> PyResult<usize> {
        tau_complete(&self.with_aux()).map(|t| t.structure.len()).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Structure({})", self.inner.labels().join(", "))
    }
}

#[pymodule]
fn cusp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(format, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_names, m)?)?;
    m.add_class::<Structure>()?;
    m.add("SCHEMA", dsl::SCHEMA)?;
    Ok(())
}
