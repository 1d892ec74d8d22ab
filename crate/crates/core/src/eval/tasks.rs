use ndarray::{Array1, Axis};
use serde::{Deserialize, Serialize};

use crate::data::Group;
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::solver::TaskData;

/// A binary task contrasting two groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDefinition {
    pub name: String,
    pub positive: Group,
    pub negative: Group,
}

impl TaskDefinition {
    pub fn new(name: impl Into<String>, positive: Group, negative: Group) -> Result<Self> {
        if positive == negative {
            return Err(Error::domain(format!("task contrasts {positive} with itself")));
        }
        Ok(TaskDefinition {
            name: name.into(),
            positive,
            negative,
        })
    }

    pub fn involves(&self, g: Group) -> bool {
        self.positive == g || self.negative == g
    }

    /// The three canonical tasks: PD vs H, ST vs H, ST vs PD.
    pub fn canonical() -> Vec<TaskDefinition> {
        vec![
            TaskDefinition::new("pd_vs_h", Group::PD, Group::H).unwrap(),
            TaskDefinition::new("st_vs_h", Group::ST, Group::H).unwrap(),
            TaskDefinition::new("st_vs_pd", Group::ST, Group::PD).unwrap(),
        ]
    }
}

/// One task per definition; `source_rows` index into the dataset.
pub fn make_tasks(dataset: &Dataset, defs: &[TaskDefinition]) -> Result<Vec<TaskData>> {
    defs.iter()
        .map(|def| {
            let rows: Vec<usize> = (0..dataset.n_rows())
                .filter(|&i| def.involves(dataset.groups[i]))
                .collect();
            for g in [def.positive, def.negative] {
                if !rows.iter().any(|&i| dataset.groups[i] == g) {
                    return Err(Error::domain(format!("task `{}`: no rows of group {g}", def.name)));
                }
            }
            let y: Array1<f64> = rows
                .iter()
                .map(|&i| if dataset.groups[i] == def.positive { 1.0 } else { -1.0 })
                .collect();
            let mut task = TaskData::new(def.name.clone(), dataset.x.select(Axis(0), &rows), y)?;
            task.source_rows = rows;
            Ok(task)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn ds(groups: Vec<Group>) -> Dataset {
        let n = groups.len();
        let x = ndarray::Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
        let ids = (0..n).map(|i| format!("s{i}")).collect();
        Dataset::new(x, ids, groups, vec!["f".into()]).unwrap()
    }

    #[test]
    fn pd_vs_h_labels() {
        let d = ds(vec![Group::PD, Group::PD, Group::H]);
        let t = make_tasks(&d, &[TaskDefinition::new("t", Group::PD, Group::H).unwrap()]).unwrap();
        assert_eq!(t[0].y, array![1.0, 1.0, -1.0]);
        assert_eq!(t[0].source_rows, vec![0, 1, 2]);
    }

    #[test]
    fn identical_groups_rejected() {
        assert!(TaskDefinition::new("t", Group::H, Group::H).is_err());
    }

    #[test]
    fn canonical_sizes() {
        let groups: Vec<Group> = [vec![Group::PD; 5], vec![Group::ST; 3], vec![Group::H; 4]].concat();
        let t = make_tasks(&ds(groups), &TaskDefinition::canonical()).unwrap();
        let sizes: Vec<usize> = t.iter().map(|t| t.n_samples()).collect();
        assert_eq!(sizes, vec![9, 7, 8]);
    }

    #[test]
    fn missing_group() {
        let d = ds(vec![Group::PD, Group::H]);
        assert!(make_tasks(&d, &TaskDefinition::canonical()).is_err());
    }
}
