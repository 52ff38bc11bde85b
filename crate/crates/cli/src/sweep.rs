//! Cross-product parameter sweeps with rows in point order.

use rayon::prelude::*;

use crate::config::{Axis, Document, Tier};
use crate::error::CliError;
use crate::output::{Cell, Table};
use crate::runner::evaluate;

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub table: Table,
    pub failed: usize,
}

/// Axis values for every point, last axis varying fastest.
pub fn grid_points(axes: &[Axis]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut points = vec![Vec::new()];
    for a in axes {
        let vals = a.points()?;
        points = points
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

fn run_point(doc: &Document, axes: &[Axis], values: &[f64]) -> Result<crate::runner::RunReport, CliError> {
    let mut d = doc.clone();
    for (a, v) in axes.iter().zip(values) {
        d.set_value(&a.key, toml::Value::Float(*v))?;
    }
    d.set_value("output.dumps", toml::Value::Boolean(false))?;
    let s = d.scenario()?;
    evaluate(&s)
}

/// Evaluate every point on a pool of `jobs` threads (all cores when `None`).
/// Failed points are kept as rows with their error in `status`.
pub fn sweep(doc: &Document, axes: &[Axis], jobs: Option<usize>) -> Result<SweepResult, CliError> {
    if axes.is_empty() {
        return Err(CliError::Usage("sweep needs at least one axis".into()));
    }
    let base = doc.scenario()?;
    if matches!(base.tier, Tier::Bands | Tier::Calibrate) {
        return Err(CliError::Usage(format!("the {:?} tier has no transition probability to sweep", base.tier)));
    }
    let points = grid_points(axes)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let results: Vec<_> = pool.install(|| points.par_iter().map(|p| run_point(doc, axes, p)).collect());

    let mut header = vec!["index"];
    header.extend(axes.iter().map(|a| a.key.as_str()));
    header.extend(["phi0", "lambda_cm", "qa", "n_target", "P_final", "status"]);
    let mut table = Table::new("sweep", &header);
    let mut failed = 0;
    for (i, (p, res)) in points.iter().zip(results).enumerate() {
        let mut row = vec![Cell::Int(i as i64)];
        row.extend(p.iter().map(|v| Cell::Float(*v)));
        match res {
            Ok(r) => {
                for k in ["phi0", "lambda_cm", "qa", "n_target", "p_final"] {
                    row.push(r.metric(k).into());
                }
                row.push(Cell::Text("ok".into()));
            }
            Err(e) => {
                failed += 1;
                log::warn!("sweep point {i} failed: {e}");
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
                row.push(Cell::Text(e.to_string().replace(['\n', ','], " ")));
            }
        }
        table.push(row);
    }
    Ok(SweepResult { table, failed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_order() {
        let axes = vec![Axis::parse("a=1,2").unwrap(), Axis::parse("b=10,20,30").unwrap()];
        let p = grid_points(&axes).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p[1], vec![1.0, 20.0]);
        assert_eq!(p[3], vec![2.0, 10.0]);
    }
}
