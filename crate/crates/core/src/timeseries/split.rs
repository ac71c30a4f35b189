use crate::error::{IplError, Result};

use super::lag::SupervisedDataset;

/// Sizes of a chronological train / validation / test split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    Counts {
        train: usize,
        validation: usize,
        test: usize,
    },
    /// Fractions of the rows for train and validation; test takes the rest.
    Fractions { train: f64, validation: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: SupervisedDataset,
    pub validation: Option<SupervisedDataset>,
    pub test: SupervisedDataset,
}

/// Contiguous, time-ordered blocks; the test block is the most recent. When
/// counts sum to fewer than the available rows the oldest rows are unused.
pub fn chronological_split(ds: &SupervisedDataset, spec: SplitSpec) -> Result<Split> {
    let rows = ds.len();
    let (train, validation, test) = match spec {
        SplitSpec::Counts {
            train,
            validation,
            test,
        } => (train, validation, test),
        SplitSpec::Fractions { train, validation } => {
            if !(train >= 0.0 && validation >= 0.0 && train + validation <= 1.0) {
                return Err(IplError::InvalidParameter(format!(
                    "invalid split fractions {train}, {validation}"
                )));
            }
            let tr = (train * rows as f64).round() as usize;
            let va = ((validation * rows as f64).round() as usize).min(rows - tr.min(rows));
            (tr.min(rows), va, rows - tr.min(rows) - va)
        }
    };
    let total = train
        .checked_add(validation)
        .and_then(|s| s.checked_add(test))
        .unwrap_or(usize::MAX);
    if total > rows {
        return Err(IplError::InvalidParameter(format!(
            "split counts {train}+{validation}+{test} exceed {rows} rows"
        )));
    }
    let test_start = rows - test;
    let val_start = test_start - validation;
    let train_start = val_start - train;
    Ok(Split {
        train: ds.slice(train_start, val_start),
        validation: (validation > 0).then(|| ds.slice(val_start, test_start)),
        test: ds.slice(test_start, rows),
    })
}
