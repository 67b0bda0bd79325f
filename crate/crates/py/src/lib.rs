//! Python bindings: load or build models, mine knowledge, and compute
//! knowledge-assisted explanations.

use kxp::domain::{feature_set_from_names, Clause, FeatureSet, FeatureSpace, Instance, Kind, KnowledgeBase, Literal};
use kxp::explain::{attribute_rules, Explainer};
use kxp::ingest::{quantize, QuantizationSpec, RawTable, SchemaHints};
use kxp::miner::{extract_all, ExtractionLimit};
use kxp::models::{load_model, save_model, Model};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: kxp::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn names(space: &FeatureSpace, set: &FeatureSet) -> Vec<String> {
    set.iter().map(|&f| space.name(f).to_string()).collect()
}

fn parse_kind(kind: &str) -> PyResult<Kind> {
    kind.parse().map_err(value_error)
}

/// A decision list or boosted tree ensemble.
#[pyclass(name = "Model", module = "pykxp", frozen)]
struct PyModel {
    inner: Model,
}

/// Background knowledge: clauses over named features and values.
#[pyclass(name = "Knowledge", module = "pykxp", frozen)]
struct PyKnowledge {
    space: FeatureSpace,
    kb: KnowledgeBase,
}

impl PyKnowledge {
    /// The same clauses resolved against another feature space by name.
    fn over(&self, target: &FeatureSpace) -> PyResult<KnowledgeBase> {
        let mut kb = KnowledgeBase::new();
        for (i, c) in self.kb.clauses().iter().enumerate() {
            let lits = c
                .literals()
                .iter()
                .map(|l| {
                    Literal::named(
                        target,
                        self.space.name(l.feature),
                        l.polarity,
                        self.space.value_label(l.feature, l.value),
                    )
                })
                .collect::<kxp::Result<Vec<_>>>()
                .map_err(value_error)?;
            let clause = Clause::new(target, lits).map_err(value_error)?;
            let ids = self.kb.provenance(i);
            kb.insert(clause.clone(), None);
            for &id in ids {
                kb.insert(clause.clone(), Some(id));
            }
        }
        Ok(kb)
    }
}

#[pymethods]
impl PyKnowledge {
    /// Mines every minimal rule up to `max_size` literals that holds on all
    /// rows of a CSV file (last column taken as the class and ignored).
    #[staticmethod]
    #[pyo3(signature = (path, max_size = 5, min_support = 1, intervals = None))]
    fn mine(path: &str, max_size: usize, min_support: usize, intervals: Option<usize>) -> PyResult<PyKnowledge> {
        let raw = RawTable::from_path(path, &SchemaHints::default()).map_err(value_error)?;
        let spec = match intervals {
            Some(q) => QuantizationSpec::fit(&raw, q, None).map_err(value_error)?,
            None => QuantizationSpec::default(),
        };
        let ds = quantize(&raw, &spec).map_err(value_error)?;
        let limit = ExtractionLimit { max_size, min_support, ..Default::default() };
        let ex = extract_all(&ds, &limit, true).map_err(value_error)?;
        Ok(PyKnowledge { space: ds.space().clone(), kb: ex.knowledge })
    }

    fn clauses(&self) -> Vec<String> {
        self.kb.clauses().iter().map(|c| c.display(&self.space)).collect()
    }

    fn __len__(&self) -> usize {
        self.kb.len()
    }
}

impl PyModel {
    fn instance(&self, values: Vec<String>) -> PyResult<Instance> {
        self.inner.space().instance_from_labels(&values).map_err(value_error)
    }

    fn knowledge(&self, knowledge: Option<&PyKnowledge>) -> PyResult<KnowledgeBase> {
        match knowledge {
            Some(k) => k.over(self.inner.space()),
            None => Ok(KnowledgeBase::new()),
        }
    }
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<PyModel> {
        Ok(PyModel { inner: load_model(text).map_err(value_error)? })
    }

    fn to_json(&self) -> String {
        save_model(&self.inner)
    }

    #[getter]
    fn features(&self) -> Vec<String> {
        self.inner.space().features().iter().map(|f| f.name.clone()).collect()
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.classes().to_vec()
    }

    /// Class label for an instance given as one value label per feature.
    fn predict(&self, instance: Vec<String>) -> PyResult<String> {
        let inst = self.instance(instance)?;
        Ok(self.inner.classes()[self.inner.classify(&inst)].clone())
    }

    /// Up to `n` smallest explanations, each a list of feature names.
    #[pyo3(signature = (instance, kind = "axp", n = 20, knowledge = None))]
    fn explain(
        &self,
        py: Python<'_>,
        instance: Vec<String>,
        kind: &str,
        n: usize,
        knowledge: Option<PyRef<'_, PyKnowledge>>,
    ) -> PyResult<Vec<Vec<String>>> {
        let kind = parse_kind(kind)?;
        let inst = self.instance(instance)?;
        let kb = self.knowledge(knowledge.as_deref())?;
        let found = py.detach(|| -> kxp::Result<Vec<FeatureSet>> {
            let mut ex = Explainer::new(&self.inner, &kb, &inst)?;
            Ok(ex.enumerate_smallest(kind, n).explanations)
        });
        let space = self.inner.space();
        Ok(found.map_err(value_error)?.iter().map(|s| names(space, s)).collect())
    }

    /// Whether the named features form an explanation of `kind`.
    #[pyo3(signature = (instance, features, kind = "axp", knowledge = None))]
    fn check(
        &self,
        instance: Vec<String>,
        features: Vec<String>,
        kind: &str,
        knowledge: Option<PyRef<'_, PyKnowledge>>,
    ) -> PyResult<bool> {
        let kind = parse_kind(kind)?;
        let inst = self.instance(instance)?;
        let set = feature_set_from_names(self.inner.space(), &features).map_err(value_error)?;
        let kb = self.knowledge(knowledge.as_deref())?;
        let mut ex = Explainer::new(&self.inner, &kb, &inst).map_err(value_error)?;
        ex.check_explanation(kind, &set).map_err(value_error)
    }

    /// Knowledge clauses the abductive explanation depends on, as text.
    fn attribute(&self, instance: Vec<String>, axp: Vec<String>, knowledge: PyRef<'_, PyKnowledge>) -> PyResult<Vec<String>> {
        let inst = self.instance(instance)?;
        let set = feature_set_from_names(self.inner.space(), &axp).map_err(value_error)?;
        let kb = knowledge.over(self.inner.space())?;
        let a = attribute_rules(&self.inner, &kb, &inst, &set).map_err(value_error)?;
        Ok(a.clauses.iter().map(|&c| kb.clauses()[c].display(self.inner.space())).collect())
    }
}

/// The income decision list used in the documentation examples.
#[pyfunction]
fn income_list() -> PyModel {
    PyModel { inner: kxp::samples::income_list() }
}

/// The three-tree income ensemble used in the documentation examples.
#[pyfunction]
fn income_trees() -> PyModel {
    PyModel { inner: kxp::samples::income_trees() }
}

#[pyfunction]
fn status_list() -> PyModel {
    PyModel { inner: kxp::samples::status_list() }
}

/// `Sex = Male AND Relationship = Not-in-family -> Status = Separated`.
#[pyfunction]
fn separated_knowledge() -> PyKnowledge {
    PyKnowledge { space: kxp::samples::income_space(), kb: kxp::samples::separated_knowledge() }
}

#[pymodule]
fn pykxp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyKnowledge>()?;
    m.add_function(wrap_pyfunction!(income_list, m)?)?;
    m.add_function(wrap_pyfunction!(income_trees, m)?)?;
    m.add_function(wrap_pyfunction!(status_list, m)?)?;
    m.add_function(wrap_pyfunction!(separated_knowledge, m)?)?;
    Ok(())
}
