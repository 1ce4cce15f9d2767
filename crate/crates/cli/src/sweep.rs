//! Mobility-exponent sweeps at fixed `q`.
//!
//! Steady states depend on `n` and `m` only through `q = m - n + 1`, so every
//! run in a sweep starts from the same initial data. Runs are independent and
//! fan out over a worker pool; rows are sorted by `n` before anything is
//! written, so the pool width never changes the output.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thinfilm::evolution::Outcome;
use thinfilm::PeriodicField;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::runner::{build_base, initial_data, prepare_dir, simulate_from, write, write_json, BaseState, RunSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: f64,
    pub outcome: String,
    pub final_hmin: f64,
    pub touchdown_count: usize,
    pub half_time: Option<f64>,
    pub t_c: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn touched_down(&self) -> bool {
        self.outcome == "TouchDown"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Adjacent swept exponents across the first TouchDown to positive transition.
    pub bracket: Option<(f64, f64)>,
    /// Transitions back to TouchDown after the bracket, reported rather than hidden.
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let mut s = String::from("n,outcome,final_hmin,touchdown_count,half_time,t_c\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:.16e},{},{},{}\n",
                r.n,
                r.outcome,
                r.final_hmin,
                r.touchdown_count,
                opt(r.half_time),
                opt(r.t_c)
            ));
        }
        s
    }
}

fn run_one(cfg: &ExperimentConfig, base: &BaseState, initial: &PeriodicField, n: f64) -> SweepRow {
    let row_cfg = cfg.with_n(n);
    match simulate_from(&row_cfg, base.clone(), initial.clone()) {
        Ok(sim) => {
            let t_c = match &sim.outcome {
                Outcome::TouchDown { t_estimate, .. } | Outcome::BlowUp { t_estimate, .. } => {
                    Some(sim.diagnostics.singularity.map(|s| s.t_c).unwrap_or(*t_estimate))
                }
                _ => None,
            };
            SweepRow {
                n,
                outcome: sim.outcome.kind().to_string(),
                final_hmin: sim.record.final_field.min(),
                touchdown_count: sim.diagnostics.touchdown_count,
                half_time: sim.diagnostics.half_time,
                t_c,
                error: None,
            }
        }
        Err(e) => SweepRow {
            n,
            outcome: "Error".into(),
            final_hmin: f64::NAN,
            touchdown_count: 0,
            half_time: None,
            t_c: None,
            error: Some(e.to_string()),
        },
    }
}

fn bracket_of(rows: &[SweepRow]) -> (Option<(f64, f64)>, Vec<String>) {
    let first = rows.windows(2).position(|w| w[0].touched_down() && !w[1].touched_down());
    let mut warnings = Vec::new();
    if let Some(i) = first {
        for r in &rows[i + 1..] {
            if r.touched_down() {
                warnings.push(format!("non-monotone transition: TouchDown again at n = {}", r.n));
            }
        }
    }
    for r in rows {
        if let Some(e) = &r.error {
            warnings.push(format!("run at n = {} failed: {e}", r.n));
        }
    }
    (first.map(|i| (rows[i].n, rows[i + 1].n)), warnings)
}

/// Runs every `n` of a resolved sweep config, brackets the critical exponent
/// and refines it by bisection.
pub fn sweep_critical_n(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let list = cfg.n_list.clone().ok_or_else(|| CliError::config("n_list", "required for sweep"))?;
    let base = build_base(&cfg.with_n(list[0]))?;
    let initial = initial_data(cfg, &base)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(1))
        .build()
        .map_err(|e| CliError::config("workers", e.to_string()))?;
    let mut rows: Vec<SweepRow> = pool.install(|| list.par_iter().map(|&n| run_one(cfg, &base, &initial, n)).collect());
    rows.sort_by(|a, b| a.n.total_cmp(&b.n));
    let (mut bracket, _) = bracket_of(&rows);
    for _ in 0..cfg.refine.unwrap_or(0) {
        let Some((lo, hi)) = bracket else { break };
        let mid = 0.5 * (lo + hi);
        let row = run_one(cfg, &base, &initial, mid);
        let touched = row.touched_down();
        rows.push(row);
        rows.sort_by(|a, b| a.n.total_cmp(&b.n));
        bracket = Some(if touched { (mid, hi) } else { (lo, mid) });
    }
    let (found, warnings) = bracket_of(&rows);
    Ok(SweepResult { rows, bracket: found, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub kind: String,
    pub config: ExperimentConfig,
    pub result: Option<SweepResult>,
    /// Evolve configs reproducing each row.
    pub runs: Vec<ExperimentConfig>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

pub(crate) fn run_sweep(cfg: ExperimentConfig) -> Result<RunSummary> {
    let clock = Instant::now();
    let dir = prepare_dir(&cfg)?;
    let result = sweep_critical_n(&cfg);
    let (result, error) = match result {
        Ok(r) => {
            write(&dir.join("sweep.csv"), &r.to_csv())?;
            (Some(r), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    let runs = result.iter().flat_map(|r| r.rows.iter().map(|row| cfg.with_n(row.n))).collect();
    let manifest = SweepManifest {
        kind: "sweep".into(),
        config: cfg,
        result,
        runs,
        error,
        wall_time_s: clock.elapsed().as_secs_f64(),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    let line = match (&manifest.result, &manifest.error) {
        (Some(r), _) => {
            let kinds: Vec<String> = r.rows.iter().map(|row| format!("n={}:{}", row.n, row.outcome)).collect();
            format!("sweep: {} bracket {:?}", kinds.join(" "), r.bracket)
        }
        (None, Some(e)) => format!("sweep failed: {e}"),
        (None, None) => unreachable!(),
    };
    Ok(RunSummary { out_dir: dir, line, ok: manifest.error.is_none() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: f64, outcome: &str) -> SweepRow {
        SweepRow {
            n,
            outcome: outcome.into(),
            final_hmin: 0.1,
            touchdown_count: 1,
            half_time: None,
            t_c: None,
            error: None,
        }
    }

    #[test]
    fn bracket_is_first_transition() {
        let rows = vec![row(1.0, "TouchDown"), row(1.5, "TouchDown"), row(2.0, "HorizonReached"), row(3.0, "HorizonReached")];
        let (b, w) = bracket_of(&rows);
        assert_eq!(b, Some((1.5, 2.0)));
        assert!(w.is_empty());
    }

    #[test]
    fn non_monotone_transition_is_reported() {
        let rows = vec![row(1.0, "TouchDown"), row(2.0, "HorizonReached"), row(3.0, "TouchDown")];
        let (b, w) = bracket_of(&rows);
        assert_eq!(b, Some((1.0, 2.0)));
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn csv_columns() {
        let r = SweepResult { rows: vec![row(1.0, "TouchDown")], bracket: None, warnings: vec![] };
        let csv = r.to_csv();
        assert!(csv.starts_with("n,outcome,final_hmin,touchdown_count,half_time,t_c\n"));
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 6);
    }
}
