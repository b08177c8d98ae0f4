use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

/// Which source rows each pipeline stage read.
///
/// Stage names starting with `fit:` or equal to `ppca_fit` are training
/// stages; `validate:` stages are evaluation stages.
#[derive(Debug, Default)]
pub struct RowAudit {
    stages: Mutex<BTreeMap<String, BTreeSet<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub stages: BTreeMap<String, Vec<usize>>,
}

impl RowAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, stage: &str, rows: &[usize]) {
        let mut stages = self.stages.lock().expect("audit lock");
        stages.entry(stage.to_string()).or_default().extend(rows.iter().copied());
    }

    pub fn rows(&self, stage: &str) -> Vec<usize> {
        let stages = self.stages.lock().expect("audit lock");
        stages.get(stage).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }

    pub fn stage_names(&self) -> Vec<String> {
        self.stages.lock().expect("audit lock").keys().cloned().collect()
    }

    /// Training stages that touched a test row, and evaluation stages that
    /// touched a training row.
    pub fn leaks(&self, train: &[usize], test: &[usize]) -> Vec<String> {
        let train: BTreeSet<usize> = train.iter().copied().collect();
        let test: BTreeSet<usize> = test.iter().copied().collect();
        let stages = self.stages.lock().expect("audit lock");
        let mut out = Vec::new();
        for (name, rows) in stages.iter() {
            let training = name == "ppca_fit" || name.starts_with("fit:");
            let evaluating = name.starts_with("validate:");
            if (training && !rows.is_disjoint(&test)) || (evaluating && !rows.is_disjoint(&train)) {
                out.push(name.clone());
            }
        }
        out
    }

    pub fn to_record(&self, train: &[usize], test: &[usize]) -> AuditRecord {
        let stages = self.stages.lock().expect("audit lock");
        AuditRecord {
            train: train.to_vec(),
            test: test.to_vec(),
            stages: stages
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().copied().collect()))
                .collect(),
        }
    }
}
