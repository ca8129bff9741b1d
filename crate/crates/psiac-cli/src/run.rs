//! Experiment driver: DG solves per (degree, mesh), filtering per
//! (filter, pipeline), pointwise-error CSVs, a convergence summary with
//! fitted orders, and filter-coefficient dumps.

use crate::config::{Example, ExperimentConfig};
use crate::dump::{dump_filter, DumpError};
use psiac::dg::{
    error_metrics, fit_order, integrate, l2_on_cells, l2_project, DgField, IntegrateError,
    MeshError,
};
use psiac::exact::Rational;
use psiac::filter::{
    classify_point, filter_field, FilterError, InteriorSampler, Region, SymmetricFilter,
};
use psiac::kernel::{
    filter_catalog, symmetric_half_width, CatalogError, FilterName, FilterSpec, Side,
};
use psiac::legacy::numeric_filter_point;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Dump(#[from] DumpError),
}

const CFL: f64 = 0.1;

#[derive(Serialize)]
struct SnapshotRow {
    cell: usize,
    l: usize,
    coefficient: f64,
}

#[derive(Serialize)]
struct PointRow {
    x: f64,
    dg_error: f64,
    filtered_error: Option<f64>,
    pipeline: String,
    filter: String,
    d: usize,
    #[serde(rename = "N")]
    n: usize,
}

#[derive(Serialize, Clone)]
struct SummaryRow {
    example: u8,
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    filter: String,
    pipeline: String,
    h: f64,
    dg_l2: f64,
    dg_linf: f64,
    filtered_l2: Option<f64>,
    filtered_linf: Option<f64>,
    filtered_interior_l2: Option<f64>,
}

#[derive(Serialize)]
struct OrderRow {
    example: u8,
    d: usize,
    filter: String,
    pipeline: String,
    dg_l2_order: f64,
    filtered_interior_l2_order: Option<f64>,
}

struct Job {
    d: usize,
    n: usize,
    filter: Option<FilterName>,
    pipeline: &'static str,
}

pub fn run(config: &ExperimentConfig, out: &Path) -> Result<(), RunError> {
    std::fs::create_dir_all(out)?;
    let example = config.problem();
    let filters = config.parsed_filters();
    let ppc = config.eval_points_per_cell;

    // one DG solve per (degree, mesh), in parallel
    let mut keys: Vec<(usize, usize)> = Vec::new();
    for &d in &config.degrees {
        for &n in &config.mesh_sizes {
            keys.push((d, n));
        }
    }
    let solutions: HashMap<(usize, usize), DgField> = keys
        .par_iter()
        .map(|&(d, n)| -> Result<((usize, usize), DgField), RunError> {
            let mesh = example.mesh(n)?;
            let u0 = l2_project(|x| example.initial(x), &mesh, d);
            let u = integrate(&u0, example.t_end, CFL, &example.boundary_condition())?;
            Ok(((d, n), u))
        })
        .collect::<Result<_, _>>()?;

    // DG coefficient snapshots, one file per solve
    for &(d, n) in &keys {
        let rows: Vec<SnapshotRow> = solutions[&(d, n)]
            .snapshot_rows()
            .into_iter()
            .map(|(cell, l, coefficient)| SnapshotRow {
                cell,
                l,
                coefficient,
            })
            .collect();
        write_csv(
            &out.join(format!("ex{}_d{d}_N{n}_snapshot.csv", example.id)),
            &rows,
        )?;
    }

    let mut jobs: Vec<Job> = Vec::new();
    for &(d, n) in &keys {
        if filters.is_empty() {
            jobs.push(Job {
                d,
                n,
                filter: None,
                pipeline: "dg",
            });
        }
        for &filter in &filters {
            for pipeline in config.pipeline.variants() {
                jobs.push(Job {
                    d,
                    n,
                    filter: Some(filter),
                    pipeline,
                });
            }
        }
    }

    let mut summaries: Vec<SummaryRow> = jobs
        .par_iter()
        .map(|job| execute_job(job, &example, &solutions, ppc, out))
        .collect::<Result<_, _>>()?;
    summaries.sort_by(|a, b| {
        (a.d, a.n, &a.filter, &a.pipeline).cmp(&(b.d, b.n, &b.filter, &b.pipeline))
    });
    write_csv(&out.join("summary.csv"), &summaries)?;

    let orders = fitted_orders(&summaries, example.id);
    write_csv(&out.join("orders.csv"), &orders)?;

    for &filter in &filters {
        for &d in &config.degrees {
            let sides = if filter == FilterName::Symmetric {
                vec![Side::Symmetric]
            } else {
                vec![Side::Left, Side::Right]
            };
            for side in sides {
                let dump = dump_filter(filter, d, side)?;
                let path = out.join(format!("filter_{filter}_d{d}_{side}.json"));
                std::fs::write(&path, serde_json::to_string_pretty(&dump).expect("serializable"))?;
            }
        }
    }
    Ok(())
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), RunError> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn execute_job(
    job: &Job,
    example: &Example,
    solutions: &HashMap<(usize, usize), DgField>,
    ppc: usize,
    out: &Path,
) -> Result<SummaryRow, RunError> {
    let u = &solutions[&(job.d, job.n)];
    let mesh = u.mesh();
    let exact = |x: f64| example.exact_at_end(x);
    let xs = mesh.grid_points_f64(ppc);
    let dg_vals = u.sample_grid(ppc);
    let dg_metrics = error_metrics(&xs, &dg_vals, exact, mesh, ppc);

    let filtered: Option<Vec<Option<f64>>> = match job.filter {
        None => None,
        Some(name) => Some(filtered_values(name, job.pipeline, u, ppc)?),
    };

    let filter_label = job.filter.map(|f| f.to_string()).unwrap_or_default();
    let rows: Vec<PointRow> = (0..xs.len())
        .map(|i| PointRow {
            x: xs[i],
            dg_error: dg_metrics.samples[i].1,
            filtered_error: filtered
                .as_ref()
                .and_then(|vals| vals[i].map(|v| (v - exact(xs[i])).abs())),
            pipeline: job.pipeline.to_string(),
            filter: filter_label.clone(),
            d: job.d,
            n: job.n,
        })
        .collect();
    let stem = match job.filter {
        Some(name) => format!(
            "ex{}_d{}_N{}_{}_{}.csv",
            example.id, job.d, job.n, name, job.pipeline
        ),
        None => format!("ex{}_d{}_N{}_dg.csv", example.id, job.d, job.n),
    };
    write_csv(&out.join(stem), &rows)?;

    // summary metrics
    let (filtered_l2, filtered_linf, filtered_interior_l2) = match &filtered {
        None => (None, None, None),
        Some(vals) => {
            let errs: Vec<f64> = vals
                .iter()
                .zip(&xs)
                .map(|(v, &x)| v.map_or(f64::NAN, |v| (v - exact(x)).abs()))
                .collect();
            let linf = errs
                .iter()
                .filter(|e| e.is_finite())
                .cloned()
                .fold(0.0, f64::max);
            let full = vals.iter().all(Option::is_some);
            let l2 = full.then(|| l2_on_cells(&errs, mesh, ppc, 0, mesh.n_cells()));
            let margin = usize::try_from(symmetric_half_width(job.d).ceil()).expect("small");
            let interior = (2 * margin < mesh.n_cells())
                .then(|| l2_on_cells(&errs, mesh, ppc, margin, mesh.n_cells() - margin));
            (l2, Some(linf), interior)
        }
    };
    Ok(SummaryRow {
        example: example.id,
        d: job.d,
        n: job.n,
        filter: filter_label,
        pipeline: job.pipeline.to_string(),
        h: mesh.h_f64(),
        dg_l2: dg_metrics.l2,
        dg_linf: dg_metrics.linf,
        filtered_l2,
        filtered_linf,
        filtered_interior_l2,
    })
}

/// Filtered values on the standard grid; `None` marks points the filter
/// does not serve (boundary strips of a symmetric-only run).
fn filtered_values(
    name: FilterName,
    pipeline: &str,
    u: &DgField,
    ppc: usize,
) -> Result<Vec<Option<f64>>, RunError> {
    let mesh = u.mesh();
    let d = u.degree();
    let n = mesh.n_cells();
    // window-fit guard shared by both pipelines
    let mu = symmetric_half_width(d);
    let specs: Option<(FilterSpec, FilterSpec)> = match name {
        FilterName::Symmetric => None,
        _ => Some((
            filter_catalog(name, d, Side::Left)?,
            filter_catalog(name, d, Side::Right)?,
        )),
    };
    let max_width = specs
        .as_ref()
        .map(|(l, _)| l.support_width())
        .unwrap_or_else(|| &mu + &mu)
        .max(&mu + &mu);
    if max_width > psiac::exact::rat(n as i64) {
        return Err(RunError::Filter(FilterError::MeshTooCoarse {
            width: max_width.to_string(),
            cells: n,
        }));
    }

    let offsets: Vec<Rational> = (0..ppc)
        .map(|j| Rational::ratio(j as i64, ppc as i64))
        .collect();
    let mut vals: Vec<Option<f64>> = Vec::with_capacity(n * ppc + 1);
    match (pipeline, &specs) {
        ("symbolic", Some((left, right))) => {
            let ff = filter_field(u, left, right, ppc)?;
            vals.extend(ff.sample_grid().into_iter().map(Some));
        }
        ("symbolic", None) => {
            let symmetric = SymmetricFilter::new(d);
            let sampler = InteriorSampler::new(&symmetric, d, &offsets);
            for cell in 0..n {
                for (j, q) in offsets.iter().enumerate() {
                    vals.push(match classify_point(mesh, d, cell, q) {
                        Region::Interior => Some(sampler.eval(u, cell, j)),
                        _ => None,
                    });
                }
            }
            vals.push(None); // x = b sits in the right strip
        }
        ("legacy", _) => {
            let symmetric_spec = filter_catalog(FilterName::Symmetric, d, Side::Symmetric)?;
            let point = |cell: usize, q: &Rational| -> Option<f64> {
                let x = mesh.a_f64() + mesh.h_f64() * (cell as f64 + q.to_f64());
                match (classify_point(mesh, d, cell, q), &specs) {
                    (Region::Interior, _) => Some(numeric_filter_point(&symmetric_spec, u, x)),
                    (Region::LeftBoundary, Some((l, _))) => Some(numeric_filter_point(l, u, x)),
                    (Region::RightBoundary, Some((_, r))) => Some(numeric_filter_point(r, u, x)),
                    _ => None,
                }
            };
            for cell in 0..n {
                for q in &offsets {
                    vals.push(point(cell, q));
                }
            }
            vals.push(specs.as_ref().map(|(_, right)| numeric_filter_point(right, u, mesh.b_f64())));
        }
        (other, _) => unreachable!("unknown pipeline {other}"),
    }
    debug_assert_eq!(vals.len(), n * ppc + 1);
    Ok(vals)
}

fn fitted_orders(summaries: &[SummaryRow], example: u8) -> Vec<OrderRow> {
    let mut groups: Vec<(usize, String, String)> = summaries
        .iter()
        .map(|s| (s.d, s.filter.clone(), s.pipeline.clone()))
        .collect();
    groups.sort();
    groups.dedup();
    groups
        .into_iter()
        .filter_map(|(d, filter, pipeline)| {
            let rows: Vec<&SummaryRow> = summaries
                .iter()
                .filter(|s| s.d == d && s.filter == filter && s.pipeline == pipeline)
                .collect();
            if rows.len() < 2 {
                return None;
            }
            let dg_pairs: Vec<(f64, f64)> = rows.iter().map(|s| (s.h, s.dg_l2)).collect();
            let interior: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|s| s.filtered_interior_l2.map(|v| (s.h, v)))
                .collect();
            Some(OrderRow {
                example,
                d,
                filter,
                pipeline,
                dg_l2_order: fit_order(&dg_pairs),
                filtered_interior_l2_order: (interior.len() >= 2)
                    .then(|| fit_order(&interior)),
            })
        })
        .collect()
}
