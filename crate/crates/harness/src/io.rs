//! CSV and PGM persistence. Floats are written in shortest round-trip form
//! so files re-import to the same bits and reruns are byte-identical.

use std::io::Write;
use std::path::Path;

use sail::benchmark::{CellOptimum, MapElitesReport};
use sail::elites::{Elite, FeatureAxis, FeatureMap, FeatureSpec};
use sail::sail::{IterationStats, ObservationSet};

use crate::HarnessError;

fn csv_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Csv(format!("{}: {e}", path.display()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, HarnessError> {
    csv::Writer::from_path(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<(), HarnessError> {
    w.flush()
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io(format!("{}: {e}", path.display()))
}

pub fn write_observations(path: &Path, obs: &ObservationSet, param_names: &[&str]) -> Result<(), HarnessError> {
    let mut w = writer(path)?;
    let mut header = vec!["pe_index", "iteration", "neg_log_cd", "cl", "area"];
    header.extend_from_slice(param_names);
    w.write_record(&header).map_err(io_err(path))?;
    for o in obs.rows() {
        let mut row = vec![
            o.pe_index.to_string(),
            o.iteration.to_string(),
            o.drag.to_string(),
            o.lift.to_string(),
            o.area.to_string(),
        ];
        row.extend(o.genome.iter().map(f64::to_string));
        w.write_record(&row).map_err(io_err(path))?;
    }
    finish(w, path)
}

pub fn write_stats(path: &Path, stats: &[IterationStats]) -> Result<(), HarnessError> {
    let mut w = writer(path)?;
    w.write_record([
        "iteration",
        "pe_used",
        "observations",
        "acquisition_coverage",
        "prediction_value_sum",
    ])
    .map_err(io_err(path))?;
    for s in stats {
        w.write_record([
            s.iteration.to_string(),
            s.pe_used.to_string(),
            s.observations.to_string(),
            opt(s.acquisition_coverage),
            opt(s.prediction_value_sum),
        ])
        .map_err(io_err(path))?;
    }
    finish(w, path)
}

pub fn write_progress(path: &Path, reports: &[MapElitesReport]) -> Result<(), HarnessError> {
    let mut w = writer(path)?;
    w.write_record(["pe_used", "coverage", "value_sum"])
        .map_err(io_err(path))?;
    for r in reports {
        w.write_record([r.pe_used.to_string(), r.coverage.to_string(), r.value_sum.to_string()])
            .map_err(io_err(path))?;
    }
    finish(w, path)
}

/// A map read back from CSV, with the genome column names.
#[derive(Debug, Clone)]
pub struct MapTable {
    pub map: FeatureMap,
    pub param_names: Vec<String>,
}

/// One row per cell: bin indices, window bounds, occupancy, value, the
/// elite's features and genome. Empty cells leave the last columns blank.
pub fn write_map(path: &Path, map: &FeatureMap, param_names: &[impl AsRef<str>]) -> Result<(), HarnessError> {
    let spec = map.spec();
    let mut header = vec!["cell".to_string()];
    header.extend(spec.axes().iter().map(|a| format!("bin_{}", a.name)));
    for a in spec.axes() {
        header.push(format!("{}_lo", a.name));
        header.push(format!("{}_hi", a.name));
    }
    header.push("filled".into());
    header.push("value".into());
    header.extend(spec.axes().iter().map(|a| format!("feature_{}", a.name)));
    header.extend(param_names.iter().map(|p| p.as_ref().to_string()));

    let mut w = writer(path)?;
    w.write_record(&header).map_err(io_err(path))?;
    for flat in 0..spec.total_cells() {
        let cell = spec.cell_of(flat);
        let mut row = vec![flat.to_string()];
        row.extend(cell.iter().map(usize::to_string));
        for (lo, hi) in spec.cell_window(&cell) {
            row.push(lo.to_string());
            row.push(hi.to_string());
        }
        match map.get_flat(flat) {
            Some(e) => {
                row.push("1".into());
                row.push(e.value.to_string());
                row.extend(e.features.iter().map(f64::to_string));
                row.extend(e.genome.iter().map(f64::to_string));
            }
            None => {
                row.push("0".into());
                row.resize(header.len(), String::new());
            }
        }
        w.write_record(&row).map_err(io_err(path))?;
    }
    finish(w, path)
}

fn parse_f64(path: &Path, line: usize, s: &str) -> Result<f64, HarnessError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| csv_err(path, format!("row {line}: `{s}` is not a finite number")))
}

fn parse_usize(path: &Path, line: usize, s: &str) -> Result<usize, HarnessError> {
    s.parse()
        .map_err(|_| csv_err(path, format!("row {line}: `{s}` is not an index")))
}

pub fn read_map(path: &Path) -> Result<MapTable, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let names: Vec<String> = header
        .iter()
        .filter_map(|h| h.strip_prefix("bin_").map(str::to_string))
        .collect();
    let dim = names.len();
    if dim == 0 || header.first().map(String::as_str) != Some("cell") {
        return Err(csv_err(path, "not a map CSV (expected cell and bin_ columns)"));
    }
    let fixed = 1 + dim + 2 * dim + 2 + dim;
    if header.len() < fixed {
        return Err(csv_err(path, "missing columns"));
    }
    let param_names = header[fixed..].to_vec();

    struct Row {
        cell: Vec<usize>,
        window: Vec<(f64, f64)>,
        elite: Option<Elite>,
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != header.len() {
            return Err(csv_err(path, format!("row {line}: expected {} fields", header.len())));
        }
        let cell = (0..dim)
            .map(|k| parse_usize(path, line, &rec[1 + k]))
            .collect::<Result<Vec<_>, _>>()?;
        let window = (0..dim)
            .map(|k| {
                Ok((
                    parse_f64(path, line, &rec[1 + dim + 2 * k])?,
                    parse_f64(path, line, &rec[2 + dim + 2 * k])?,
                ))
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        let elite = match &rec[1 + 3 * dim] {
            "0" => None,
            "1" => {
                let value = parse_f64(path, line, &rec[2 + 3 * dim])?;
                let features = (0..dim)
                    .map(|k| parse_f64(path, line, &rec[3 + 3 * dim + k]))
                    .collect::<Result<Vec<_>, _>>()?;
                let genome = (fixed..header.len())
                    .map(|k| parse_f64(path, line, &rec[k]))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(Elite {
                    genome,
                    value,
                    features,
                })
            }
            other => return Err(csv_err(path, format!("row {line}: filled flag `{other}`"))),
        };
        rows.push(Row { cell, window, elite });
    }
    if rows.is_empty() {
        return Err(csv_err(path, "no rows"));
    }

    let axes = (0..dim)
        .map(|k| {
            let bins = rows.iter().map(|r| r.cell[k]).max().unwrap_or(0) + 1;
            let min = rows.iter().map(|r| r.window[k].0).fold(f64::INFINITY, f64::min);
            let max = rows.iter().map(|r| r.window[k].1).fold(f64::NEG_INFINITY, f64::max);
            FeatureAxis::new(names[k].clone(), min, max, bins)
        })
        .collect();
    let spec = FeatureSpec::new(axes).map_err(|e| csv_err(path, e))?;
    if rows.len() != spec.total_cells() {
        return Err(csv_err(
            path,
            format!("{} rows for {} cells", rows.len(), spec.total_cells()),
        ));
    }
    let mut map = FeatureMap::new(spec);
    let mut seen = vec![false; rows.len()];
    for row in rows {
        let flat = map.spec().flat_index(&row.cell);
        if std::mem::replace(&mut seen[flat], true) {
            return Err(csv_err(path, format!("cell {:?} listed twice", row.cell)));
        }
        if let Some(e) = row.elite {
            map.set_cell(flat, e);
        }
    }
    Ok(MapTable { map, param_names })
}

/// Grayscale pixel levels of a 2D map, row-major from the top: x along the
/// first axis, the second axis increasing upward. Empty cells are 0, filled
/// cells scaled to 1..=255 between the smallest and largest value, and 128
/// when all values are equal.
pub fn pgm_levels(map: &FeatureMap) -> Result<(usize, usize, Vec<u8>), HarnessError> {
    let shape = map.spec().shape();
    let [w, h] = shape[..] else {
        return Err(HarnessError::Config(format!(
            "PGM export needs a 2D map, got {}D",
            shape.len()
        )));
    };
    let (lo, hi) = map
        .elites()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, e)| {
            (lo.min(e.value), hi.max(e.value))
        });
    let mut px = Vec::with_capacity(w * h);
    for row in (0..h).rev() {
        for col in 0..w {
            let level = match map.get(&[col, row]) {
                None => 0,
                Some(_) if hi <= lo => 128,
                Some(e) => 1 + (254.0 * (e.value - lo) / (hi - lo)).round() as u8,
            };
            px.push(level);
        }
    }
    Ok((w, h, px))
}

/// Plain (P2) PGM.
pub fn write_pgm(path: &Path, map: &FeatureMap) -> Result<(), HarnessError> {
    let (w, h, px) = pgm_levels(map)?;
    let mut out = format!("P2\n{w} {h}\n255\n");
    for row in px.chunks(w) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// Per-cell optima: cell, bin indices, fitness and genome; unreachable
/// cells leave fitness and genome blank.
pub fn write_optima(
    path: &Path,
    spec: &FeatureSpec,
    optima: &[Option<CellOptimum>],
    param_names: &[&str],
) -> Result<(), HarnessError> {
    let mut w = writer(path)?;
    let mut header = vec!["cell".to_string()];
    header.extend(spec.axes().iter().map(|a| format!("bin_{}", a.name)));
    header.push("fitness".into());
    header.extend(param_names.iter().map(|p| p.to_string()));
    w.write_record(&header).map_err(io_err(path))?;
    for (flat, o) in optima.iter().enumerate() {
        let mut row = vec![flat.to_string()];
        row.extend(spec.cell_of(flat).iter().map(usize::to_string));
        match o {
            Some(o) => {
                row.push(o.fitness.to_string());
                row.extend(o.genome.iter().map(f64::to_string));
            }
            None => row.resize(header.len(), String::new()),
        }
        w.write_record(&row).map_err(io_err(path))?;
    }
    finish(w, path)
}

/// Reads optima written by [`write_optima`] for a map with `spec`.
pub fn read_optima(
    path: &Path,
    spec: &FeatureSpec,
    genome_len: usize,
) -> Result<Vec<Option<CellOptimum>>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let width = 1 + spec.dim() + 1 + genome_len;
    let mut out = vec![None; spec.total_cells()];
    let mut count = 0;
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != width {
            return Err(csv_err(path, format!("row {line}: expected {width} fields")));
        }
        let cell = parse_usize(path, line, &rec[0])?;
        if cell >= out.len() {
            return Err(csv_err(path, format!("row {line}: cell {cell} outside the map")));
        }
        count += 1;
        if rec[1 + spec.dim()].is_empty() {
            continue;
        }
        let fitness = parse_f64(path, line, &rec[1 + spec.dim()])?;
        let genome = (2 + spec.dim()..width)
            .map(|k| parse_f64(path, line, &rec[k]))
            .collect::<Result<Vec<_>, _>>()?;
        out[cell] = Some(CellOptimum { cell, fitness, genome });
    }
    if count != spec.total_cells() {
        return Err(csv_err(
            path,
            format!(
                "{count} rows but the map has {} cells; regenerate with gen-oracle",
                spec.total_cells()
            ),
        ));
    }
    Ok(out)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    let mut f = std::fs::File::create(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes())
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}
