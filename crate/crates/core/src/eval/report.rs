use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::metrics::{mean_sd, Confusion};
use super::split::Scheme;
use crate::data::Group;
use crate::error::Result;
use crate::methods::Hyperparams;
use crate::solver::TrainedModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucSummary {
    pub mean: f64,
    pub sd: f64,
    pub values: Vec<f64>,
}

impl AucSummary {
    pub fn from_values(values: Vec<f64>) -> Self {
        let (mean, sd) = mean_sd(&values);
        AucSummary { mean, sd, values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub name: String,
    pub positive: Group,
    pub negative: Group,
    pub auc: AucSummary,
    /// True class in rows, predicted in columns, positive first; summed over rounds.
    pub confusion: Confusion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectCounts {
    pub subject: String,
    pub group: Group,
    pub task: String,
    pub predicted_positive: u64,
    pub predicted_negative: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub scheme: Scheme,
    pub ratio: Option<f64>,
    /// Repetitions for random splits, rounds for leave-one-subject-out.
    pub repeats: usize,
    pub seed: u64,
    /// Hyperparameters used in each repetition or round.
    pub hyperparams: Vec<Hyperparams>,
    pub tasks: Vec<TaskSummary>,
    /// Unweighted mean over tasks, per repetition.
    pub all_tasks: AucSummary,
    pub per_subject: Vec<SubjectCounts>,
    pub notices: Vec<String>,
    pub importance: Option<ImportanceReport>,
}

fn pm(s: &AucSummary) -> String {
    format!("{:.3} ± {:.3}", s.mean, s.sd)
}

impl EvalReport {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Distinct hyperparameter choices with their round counts, in first-use order.
    pub fn hyperparams_summary(&self) -> String {
        let mut seen: Vec<(Hyperparams, usize)> = Vec::new();
        for hp in &self.hyperparams {
            match seen.iter_mut().find(|(h, _)| h == hp) {
                Some((_, n)) => *n += 1,
                None => seen.push((*hp, 1)),
            }
        }
        seen.iter()
            .map(|(h, n)| if seen.len() == 1 { h.to_string() } else { format!("{h} (×{n})") })
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let scheme = match self.scheme {
            Scheme::RandomPartition => format!("random partition, training ratio {}", self.ratio.unwrap_or(f64::NAN)),
            Scheme::LeaveOneSubjectOut => "leave one subject out".to_string(),
            Scheme::KFold => "k-fold".to_string(),
        };
        let _ = writeln!(md, "# {} ({scheme})\n", self.method);
        let _ = writeln!(md, "Hyperparameters: {}; rounds: {}; seed: {}\n", self.hyperparams_summary(), self.repeats, self.seed);
        let _ = writeln!(md, "## AUC\n\n| Task | AUC |\n|---|---|");
        for t in &self.tasks {
            let _ = writeln!(md, "| {} | {} |", t.name, pm(&t.auc));
        }
        let _ = writeln!(md, "| All tasks | {} |\n", pm(&self.all_tasks));

        let _ = writeln!(md, "## Confusion matrices\n\nTrue labels in rows, predicted labels in columns.\n");
        for t in &self.tasks {
            let (p, n) = (t.positive, t.negative);
            let _ = writeln!(md, "### {}\n\n| | {p} | {n} |\n|---|---|---|", t.name);
            let _ = writeln!(md, "| {p} | {} | {} |", t.confusion[0][0], t.confusion[0][1]);
            let _ = writeln!(md, "| {n} | {} | {} |\n", t.confusion[1][0], t.confusion[1][1]);
        }

        if !self.per_subject.is_empty() {
            let _ = writeln!(md, "## Per-subject predictions\n");
            for t in &self.tasks {
                let _ = writeln!(md, "### {}\n\n| Subject | {} | {} |\n|---|---|---|", t.name, t.positive, t.negative);
                for s in self.per_subject.iter().filter(|s| s.task == t.name) {
                    let _ = writeln!(
                        md,
                        "| {} {} | {} | {} |",
                        s.group, s.subject, s.predicted_positive, s.predicted_negative
                    );
                }
                md.push('\n');
            }
        }
        if let Some(imp) = &self.importance {
            md.push_str(&imp.to_markdown());
        }
        if !self.notices.is_empty() {
            let _ = writeln!(md, "## Notices\n");
            for n in &self.notices {
                let _ = writeln!(md, "- {n}");
            }
        }
        md
    }

    /// Bar chart of per-task and overall mean AUC.
    pub fn auc_svg(&self) -> String {
        let mut bars: Vec<(String, f64)> = self.tasks.iter().map(|t| (t.name.clone(), t.auc.mean)).collect();
        bars.push(("all tasks".into(), self.all_tasks.mean));
        bar_chart(&format!("{} AUC", self.method), &bars, 1.0)
    }
}

/// AUC grid with methods in rows and training ratios in columns.
pub fn auc_table_markdown(reports: &[EvalReport]) -> String {
    let mut ratios: Vec<f64> = reports.iter().filter_map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();
    let mut methods: Vec<&str> = Vec::new();
    for r in reports {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let mut md = String::from("| Method |");
    for r in &ratios {
        let _ = write!(md, " {:.0}% |", r * 100.0);
    }
    md.push_str("\n|---|");
    md.push_str(&"---|".repeat(ratios.len()));
    md.push('\n');
    for m in methods {
        let _ = write!(md, "| {m} |");
        for ratio in &ratios {
            match reports.iter().find(|r| r.method == m && r.ratio == Some(*ratio)) {
                Some(r) => {
                    let _ = write!(md, " {} |", pm(&r.all_tasks));
                }
                None => md.push_str(" - |"),
            }
        }
        md.push('\n');
    }
    md
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    /// `c` for the shared weights, otherwise the task name.
    pub name: String,
    pub values: Vec<f64>,
    /// Feature indices by decreasing value; ties keep feature order.
    pub ranking: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub feature_names: Vec<String>,
    pub vectors: Vec<ImportanceVector>,
}

fn ranked(name: String, values: Vec<f64>) -> ImportanceVector {
    let mut ranking: Vec<usize> = (0..values.len()).collect();
    ranking.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    ImportanceVector { name, values, ranking }
}

/// Shared weights `c` (multiplicative models only) and `|alpha_t|` per task.
pub fn importance_report(model: &TrainedModel) -> ImportanceReport {
    let mut vectors = Vec::new();
    if let Some(c) = model.shared() {
        vectors.push(ranked("c".into(), c.to_vec()));
    }
    for (t, name) in model.task_names().iter().enumerate() {
        vectors.push(ranked(name.clone(), model.alpha(t).iter().map(|v| v.abs()).collect()));
    }
    ImportanceReport {
        feature_names: model.feature_names().to_vec(),
        vectors,
    }
}

impl ImportanceReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["vector", "rank", "feature", "importance"])?;
        for v in &self.vectors {
            for (rank, &j) in v.ranking.iter().enumerate() {
                w.write_record([
                    v.name.clone(),
                    (rank + 1).to_string(),
                    self.feature_names[j].clone(),
                    v.values[j].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::from("## Feature importance\n\n");
        for v in &self.vectors {
            let _ = writeln!(md, "### {}\n\n| Rank | Feature | Importance |\n|---|---|---|", v.name);
            for (rank, &j) in v.ranking.iter().enumerate() {
                let _ = writeln!(md, "| {} | {} | {:.4} |", rank + 1, self.feature_names[j], v.values[j]);
            }
            md.push('\n');
        }
        md
    }

    /// One bar panel per vector, bars in ranked order.
    pub fn to_svg(&self) -> String {
        let panels: Vec<String> = self
            .vectors
            .iter()
            .map(|v| {
                let bars: Vec<(String, f64)> = v
                    .ranking
                    .iter()
                    .map(|&j| (self.feature_names[j].clone(), v.values[j]))
                    .collect();
                let max = v.values.iter().copied().fold(0.0, f64::max);
                bar_chart(&v.name, &bars, if max > 0.0 { max } else { 1.0 })
            })
            .collect();
        stack_svgs(&panels)
    }
}

const ROW: f64 = 18.0;
const LABEL_W: f64 = 220.0;
const BAR_W: f64 = 300.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bar_chart(title: &str, bars: &[(String, f64)], full_scale: f64) -> String {
    let height = ROW * (bars.len() as f64 + 2.0);
    let width = LABEL_W + BAR_W + 80.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(s, "<text x=\"4\" y=\"{}\" font-weight=\"bold\">{}</text>", ROW - 4.0, escape(title));
    for (i, (label, value)) in bars.iter().enumerate() {
        let y = ROW * (i as f64 + 1.0);
        let w = (value / full_scale).clamp(0.0, 1.0) * BAR_W;
        let _ = writeln!(s, "<text x=\"4\" y=\"{:.1}\">{}</text>", y + 13.0, escape(label));
        let _ = writeln!(
            s,
            "<rect x=\"{LABEL_W}\" y=\"{:.1}\" width=\"{BAR_W}\" height=\"14\" fill=\"#eeeeee\"/>",
            y + 2.0
        );
        let _ = writeln!(
            s,
            "<rect x=\"{LABEL_W}\" y=\"{:.1}\" width=\"{w:.2}\" height=\"14\" fill=\"#3b6ea5\"/>",
            y + 2.0
        );
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\">{value:.3}</text>", LABEL_W + BAR_W + 6.0, y + 13.0);
    }
    s.push_str("</svg>\n");
    s
}

fn stack_svgs(panels: &[String]) -> String {
    let mut y = 0.0;
    let mut body = String::new();
    for p in panels {
        let h: f64 = p
            .split("height=\"")
            .nth(1)
            .and_then(|r| r.split('"').next())
            .and_then(|v| v.parse().ok())
            .unwrap_or(0.0);
        let _ = writeln!(body, "<g transform=\"translate(0,{y})\">\n{p}</g>");
        y += h + 10.0;
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{y}\">\n{body}</svg>\n",
        LABEL_W + BAR_W + 80.0
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{MmtflModel, RegularizerSpec, Standardizer, LossKind};

    fn model(c: Vec<f64>, alpha: Vec<f64>) -> TrainedModel {
        let d = c.len();
        TrainedModel::Mmtfl(MmtflModel {
            spec: RegularizerSpec::new(2, 1, 1.0, 1.0).unwrap(),
            loss_kind: LossKind::Logistic,
            feature_names: (0..d).map(|j| format!("f{j}")).collect(),
            task_names: vec!["t".into()],
            standardizer: Standardizer::identity(d),
            betas: alpha.iter().map(|a| vec![*a]).collect(),
            alphas: alpha.iter().zip(&c).map(|(a, c)| vec![a * c]).collect(),
            c,
            diagnostics: vec![],
            converged: true,
            warnings: vec![],
            seed: 0,
        })
    }

    #[test]
    fn zero_weights_keep_name_order() {
        let r = importance_report(&model(vec![0.0; 3], vec![0.0; 3]));
        assert_eq!(r.vectors.len(), 2);
        for v in &r.vectors {
            assert_eq!(v.ranking, vec![0, 1, 2]);
            assert!(v.values.iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn single_nonzero_ranks_first() {
        let r = importance_report(&model(vec![1.0; 3], vec![0.0, 0.0, -2.0]));
        assert_eq!(r.vectors[1].ranking[0], 2);
        assert_eq!(r.vectors[1].values[2], 2.0);
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("vector,rank,feature,importance\nc,1,f0,1\n"));
        assert!(text.contains("t,1,f2,2\n"));
        assert!(r.to_svg().contains("<rect"));
    }
}
