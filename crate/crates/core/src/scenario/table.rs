use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First line of every emitted file.
pub const SCHEMA_LINE: &str = "# risqn-results v1";

pub const HEADER: [&str; 27] = [
    "experiment",
    "variant",
    "param",
    "framework",
    "seed",
    "rep",
    "user",
    "user_x",
    "user_y",
    "user_h",
    "ris_x",
    "ris_y",
    "ris_h",
    "d_e2e",
    "r_in",
    "p_succ",
    "p_succ_mc",
    "p_succ_se",
    "r_e2e",
    "fidelity",
    "min_fidelity",
    "wfi",
    "objective",
    "sum_rate",
    "feasible",
    "violated",
    "wall_time_s",
];

/// One output row: a user of one repetition, or a whole repetition when it
/// has no per-user data (e.g. no feasible solution was found).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub variant: String,
    pub param: Option<f64>,
    pub framework: String,
    pub seed: u64,
    pub rep: usize,
    pub user: Option<usize>,
    pub user_x: Option<f64>,
    pub user_y: Option<f64>,
    pub user_h: Option<f64>,
    pub ris_x: Option<f64>,
    pub ris_y: Option<f64>,
    pub ris_h: Option<f64>,
    pub d_e2e: Option<f64>,
    pub r_in: Option<f64>,
    pub p_succ: Option<f64>,
    pub p_succ_mc: Option<f64>,
    pub p_succ_se: Option<f64>,
    pub r_e2e: Option<f64>,
    pub fidelity: Option<f64>,
    pub min_fidelity: Option<f64>,
    pub wfi: Option<f64>,
    pub objective: Option<f64>,
    pub sum_rate: Option<f64>,
    pub feasible: bool,
    /// `;`-separated names of violated constraints, or the failure reason.
    pub violated: String,
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new(rows: Vec<ResultRow>) -> Self {
        Self { rows }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// True when the table has rows and none of them is feasible.
    pub fn all_infeasible(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| !r.feasible)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        writeln!(w, "{SCHEMA_LINE}")?;
        let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        csv.write_record(HEADER)?;
        for row in &self.rows {
            csv.serialize(row)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        if first.trim_end() != SCHEMA_LINE {
            return Err(Error::Io(format!("unsupported results schema: {:?}", first.trim_end())));
        }
        let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        if csv.headers()?.iter().ne(HEADER) {
            return Err(Error::Io("unexpected results header".into()));
        }
        let rows = csv.deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(Self { rows })
    }

    /// Per `(variant, param, framework)` statistics, in first-appearance
    /// order.
    pub fn summarize(&self) -> Vec<GroupSummary> {
        let mut order: Vec<(String, Option<u64>, String)> = Vec::new();
        let mut groups: BTreeMap<(String, Option<u64>, String), BTreeMap<usize, Vec<&ResultRow>>> = BTreeMap::new();
        for row in &self.rows {
            let key = (row.variant.clone(), row.param.map(f64::to_bits), row.framework.clone());
            let entry = groups.entry(key.clone()).or_insert_with(|| {
                order.push(key);
                BTreeMap::new()
            });
            entry.entry(row.rep).or_default().push(row);
        }
        order
            .into_iter()
            .map(|key| {
                let reps = &groups[&key];
                let mut s = GroupSummary {
                    variant: key.0.clone(),
                    param: key.1.map(f64::from_bits),
                    framework: key.2.clone(),
                    reps: reps.len(),
                    ..Default::default()
                };
                let mut acc = [Mean::default(); 5];
                for rows in reps.values() {
                    let first = rows[0];
                    if !first.feasible {
                        continue;
                    }
                    s.feasible_reps += 1;
                    if rows.iter().any(|r| matches!((r.fidelity, r.min_fidelity), (Some(f), Some(m)) if f < m)) {
                        s.fidelity_violation_reps += 1;
                    }
                    for (m, v) in acc.iter_mut().zip([first.sum_rate, first.objective, first.wfi, first.ris_x]) {
                        m.push(v);
                    }
                    for r in rows {
                        acc[4].push(r.p_succ);
                    }
                }
                [s.mean_sum_rate, s.mean_objective, s.mean_wfi, s.mean_ris_x, s.mean_p_succ] = acc.map(|m| m.value());
                s
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Mean {
    sum: f64,
    n: usize,
}

impl Mean {
    fn push(&mut self, v: Option<f64>) {
        if let Some(v) = v {
            self.sum += v;
            self.n += 1;
        }
    }

    fn value(self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

/// Averages over the feasible repetitions of one group.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GroupSummary {
    pub variant: String,
    pub param: Option<f64>,
    pub framework: String,
    pub reps: usize,
    pub feasible_reps: usize,
    /// Feasible repetitions where some user misses its fidelity threshold.
    pub fidelity_violation_reps: usize,
    pub mean_sum_rate: Option<f64>,
    pub mean_objective: Option<f64>,
    pub mean_wfi: Option<f64>,
    pub mean_ris_x: Option<f64>,
    pub mean_p_succ: Option<f64>,
}

/// Write `table` to `path` as CSV.
pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<()> {
    table.write(File::create(path)?)
}

pub fn read_csv(path: &Path) -> Result<ResultTable> {
    ResultTable::read(File::open(path)?)
}
