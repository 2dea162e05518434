//! Parameter sweep over starting points and schedule constants.
//!
//! The problem is built once and shared; cells run in parallel and each
//! writes its own metrics CSV plus one line of `summary.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::{BenchSection, RunConfig, StartSpec};
use crate::harness::metrics::emit_metrics_csv;
use crate::schedules::PowerSchedule;
use crate::solver::run_irig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchCell {
    pub x0: f64,
    pub gamma0: f64,
    pub lambda0: f64,
    pub r: f64,
}

impl BenchCell {
    pub fn file_name(&self) -> String {
        format!(
            "x0={}_gamma0={}_lambda0={}_r={}.csv",
            self.x0, self.gamma0, self.lambda0, self.r
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellStatus {
    Done { final_f_bar: f64, final_f_gap: Option<f64>, final_h_bar: f64 },
    Rejected(String),
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: BenchCell,
    pub status: CellStatus,
    pub output: PathBuf,
}

pub const SUMMARY_HEADER: &str = "x0,gamma0,lambda0,r,status,final_f_bar,final_f_gap,final_h_bar,output";

/// Cells in row-major order: `x0`, then `(γ0, λ0)`, then `r`.
pub fn bench_cells(b: &BenchSection) -> Vec<BenchCell> {
    let mut cells = Vec::new();
    for &x0 in &b.x0 {
        for &[gamma0, lambda0] in &b.gamma_lambda {
            for &r in &b.r {
                cells.push(BenchCell { x0, gamma0, lambda0, r });
            }
        }
    }
    cells
}

/// Runs every cell of `cfg.bench` (default grid when absent) and writes
/// results below `out_dir`.
pub fn run_bench(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<CellResult>> {
    let bench = cfg.bench.clone().unwrap_or_default();
    let cells = bench_cells(&bench);
    if cells.is_empty() {
        return Err(Error::Config("bench grid is empty".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let resolved = cfg.resolve()?;
    let p = &resolved.problem;
    let epsilon_schedule = &resolved.schedule;

    let run_cell = |cell: &BenchCell| -> CellResult {
        let output = out_dir.join(cell.file_name());
        let status = (|| -> Result<CellStatus> {
            let schedule = PowerSchedule::new(
                cell.gamma0,
                cell.lambda0,
                epsilon_schedule.a,
                epsilon_schedule.b,
                cell.r,
            )?;
            let x0 = StartSpec::Constant(cell.x0).resolve(p.dim())?;
            let out = run_irig(p, &schedule, resolved.iterations, &x0, &resolved.options)?;
            emit_metrics_csv(&out.trace, &output)?;
            let last = out.trace.rows.last().expect("final iteration is always recorded");
            Ok(CellStatus::Done {
                final_f_bar: last.f_bar,
                final_f_gap: last.f_gap,
                final_h_bar: last.h_bar,
            })
        })();
        let status = match status {
            Ok(s) => s,
            Err(e @ Error::InvalidSchedule(_)) => {
                warn!("cell {cell:?} skipped: {e}");
                CellStatus::Rejected(e.to_string())
            }
            Err(e) => {
                warn!("cell {cell:?} failed: {e}");
                CellStatus::Failed(e.to_string())
            }
        };
        CellResult { cell: *cell, status, output }
    };

    let results: Vec<CellResult> = match bench.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| cells.par_iter().map(run_cell).collect()),
        None => cells.par_iter().map(run_cell).collect(),
    };
    let summary = out_dir.join("summary.csv");
    fs::write(&summary, format_summary(&results)).map_err(|e| Error::io(&summary, e))?;
    info!("bench: {} cells, summary in {}", results.len(), summary.display());
    Ok(results)
}

pub fn format_summary(results: &[CellResult]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in results {
        let c = r.cell;
        let (status, f, g, h) = match &r.status {
            CellStatus::Done { final_f_bar, final_f_gap, final_h_bar } => (
                "ok",
                format!("{final_f_bar:.16e}"),
                final_f_gap.map(|g| format!("{g:.16e}")).unwrap_or_default(),
                format!("{final_h_bar:.16e}"),
            ),
            CellStatus::Rejected(_) => ("rejected", String::new(), String::new(), String::new()),
            CellStatus::Failed(_) => ("failed", String::new(), String::new(), String::new()),
        };
        let file = r.output.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{status},{f},{g},{h},{}\n",
            c.x0, c.gamma0, c.lambda0, c.r,
            if status == "ok" { file } else { String::new() }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_27_cells() {
        let cells = bench_cells(&BenchSection::default());
        assert_eq!(cells.len(), 27);
        assert_eq!(cells[0], BenchCell { x0: -10.0, gamma0: 10.0, lambda0: 1.0, r: 0.5 });
        assert_eq!(cells[26], BenchCell { x0: 10.0, gamma0: 0.1, lambda0: 0.1, r: -1.0 });
    }

    #[test]
    fn small_bench_on_selection_problem() {
        let cfg = RunConfig::from_toml_str(
            "[problem]\nkind = \"selection\"\n[run]\niterations = 20\nrecord_stride = 5\n\
             [bench]\nx0 = [0.0, 1.0]\ngamma_lambda = [[1.0, 1.0], [10.0, 1.0]]\nr = [0.5]\nthreads = 2\n",
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let results = run_bench(&cfg, dir.path()).unwrap();
        assert_eq!(results.len(), 4);
        // γ0λ0 = 10 exceeds 2m/μ = 4 on this problem.
        assert!(matches!(results[1].status, CellStatus::Rejected(_)));
        assert!(matches!(results[0].status, CellStatus::Done { .. }));
        assert!(results[0].output.exists());
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 5);
        assert!(summary.lines().nth(2).unwrap().contains(",rejected,"));
    }

    #[test]
    fn bench_is_deterministic() {
        let cfg = RunConfig::from_toml_str(
            "[problem]\nkind = \"selection\"\n[run]\niterations = 30\n[bench]\nx0 = [2.0]\ngamma_lambda = [[1.0, 1.0]]\nr = [0.0, -1.0]\n",
        )
        .unwrap();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_bench(&cfg, a.path()).unwrap();
        run_bench(&cfg, b.path()).unwrap();
        for name in ["summary.csv", "x0=2_gamma0=1_lambda0=1_r=-1.csv"] {
            assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
        }
    }
}
