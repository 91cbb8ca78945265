//! Figure generation: a pure transformation of the sweep CSVs into SVG files.

use anyhow::{Context, Result};
use std::path::Path;

use crate::svg::{Heatmap, Plot, Series};
use crate::table::Table;

const BLUE: &str = "#1f4e9e";
const RED: &str = "#c23b22";
const GREEN: &str = "#2e8b57";

/// Render every figure whose input data exists under `dir`. Returns the list
/// of files written. Missing columns abort with a schema error; empty data
/// sets produce a warning and no file.
pub fn emit_plots(dir: &Path) -> Result<Vec<String>> {
    let mut written = Vec::new();
    let bath_temperature = manifest_bath_temperature(dir);

    if let Some(name) = plot_populations(dir)? {
        written.push(name);
    }
    if let Some(name) = plot_vs_epsilon(
        dir,
        "ear_vs_eps.csv",
        "ear_median",
        "energy absorption rate",
        "ear_vs_eps.svg",
        None,
        true,
    )? {
        written.push(name);
    }
    if let Some(name) = plot_vs_epsilon(
        dir,
        "tsys_vs_eps.csv",
        "t_sys_median",
        "effective temperature",
        "tsys_vs_eps.svg",
        bath_temperature,
        false,
    )? {
        written.push(name);
    }
    if let Some(name) = plot_heatmap(dir, bath_temperature)? {
        written.push(name);
    }
    if let Some(name) = plot_tinf(dir, bath_temperature)? {
        written.push(name);
    }
    if written.is_empty() {
        eprintln!("warning: no figure data found in {}", dir.display());
    }
    Ok(written)
}

fn manifest_bath_temperature(dir: &Path) -> Option<f64> {
    let text = std::fs::read_to_string(dir.join("manifest.toml")).ok()?;
    let value: toml::Value = text.parse().ok()?;
    value
        .get("config")?
        .get("bath")?
        .get("temperature")?
        .as_float()
}

/// Populations versus level energy at the flagged drive amplitude, both
/// pictures, plus the eigenbasis weights versus their mean energies.
fn plot_populations(dir: &Path) -> Result<Option<String>> {
    let path = dir.join("populations.csv");
    if !path.exists() {
        return Ok(None);
    }
    let t = Table::read(&path)?;
    for col in ["picture", "sigma", "seed", "epsilon", "energy", "population"] {
        t.column(col)?;
    }
    if t.is_empty() {
        return Ok(None);
    }
    // first (sigma, seed, epsilon) combination in row order
    let first = &t.rows[0];
    let key = (
        t.str(first, "sigma")?.to_string(),
        t.str(first, "seed")?.to_string(),
        t.str(first, "epsilon")?.to_string(),
    );
    let selected: Vec<&Vec<String>> = t
        .rows
        .iter()
        .filter(|r| {
            t.str(r, "sigma").unwrap() == key.0
                && t.str(r, "seed").unwrap() == key.1
                && t.str(r, "epsilon").unwrap() == key.2
        })
        .collect();
    let mut plot = Plot::new(
        &format!(
            "steady-state occupations (sigma {:.3}, eps {:.3})",
            key.0.parse::<f64>().unwrap_or(f64::NAN),
            key.2.parse::<f64>().unwrap_or(f64::NAN)
        ),
        "level energy",
        "occupation",
        false,
        true,
    );
    for (picture, color) in [("stochastic", BLUE), ("quantum", RED)] {
        let pts: Vec<(f64, f64)> = selected
            .iter()
            .filter(|r| t.str(r, "picture").unwrap() == picture)
            .map(|r| {
                Ok((
                    t.f64(r, "energy")?,
                    t.f64(r, "population")?,
                ))
            })
            .collect::<Result<_>>()?;
        if !pts.is_empty() {
            plot.series.push(Series {
                label: picture.into(),
                color: color.into(),
                dash: None,
                markers: true,
                line: true,
                points: pts,
            });
        }
    }
    // eigenbasis occupations at the same instance, when available
    let eb_path = dir.join("eigenbasis.csv");
    if eb_path.exists() {
        let eb = Table::read(&eb_path)?;
        for col in ["sigma", "seed", "epsilon", "mean_energy", "weight"] {
            eb.column(col)?;
        }
        let pts: Vec<(f64, f64)> = eb
            .rows
            .iter()
            .filter(|r| {
                eb.str(r, "sigma").unwrap() == key.0
                    && eb.str(r, "seed").unwrap() == key.1
                    && eb.str(r, "epsilon").unwrap() == key.2
            })
            .map(|r| Ok((eb.f64(r, "mean_energy")?, eb.f64(r, "weight")?)))
            .collect::<Result<_>>()?;
        if !pts.is_empty() {
            plot.series.push(Series {
                label: "eigenbasis weights".into(),
                color: "#e08030".into(),
                dash: None,
                markers: true,
                line: false,
                points: pts,
            });
        }
    }
    write_svg(dir, "populations.svg", plot.render())
}

/// A quantity versus drive amplitude, one curve per picture at the largest
/// dispersion of the sweep (the sparse case).
fn plot_vs_epsilon(
    dir: &Path,
    file: &str,
    value_col: &str,
    y_label: &str,
    out_name: &str,
    h_line: Option<f64>,
    with_crossovers: bool,
) -> Result<Option<String>> {
    let path = dir.join(file);
    if !path.exists() {
        return Ok(None);
    }
    let t = Table::read(&path)?;
    for col in ["picture", "sigma", "seed", "epsilon", value_col] {
        t.column(col)?;
    }
    if t.is_empty() {
        return Ok(None);
    }
    let sigma_max = t
        .rows
        .iter()
        .map(|r| t.f64(r, "sigma").unwrap_or(f64::NAN))
        .fold(f64::NEG_INFINITY, f64::max);
    let first_seed = t.str(&t.rows[0], "seed")?.to_string();
    let mut plot = Plot::new(
        &format!("{y_label} vs drive amplitude (sigma {sigma_max:.3})"),
        "drive amplitude",
        y_label,
        true,
        true,
    );
    for (picture, color, dash) in [("stochastic", BLUE, None), ("quantum", RED, Some("6,4"))] {
        let mut pts: Vec<(f64, f64)> = t
            .rows
            .iter()
            .filter(|r| {
                t.str(r, "picture").unwrap() == picture
                    && t.f64(r, "sigma").unwrap_or(f64::NAN) == sigma_max
                    && t.str(r, "seed").unwrap() == first_seed
            })
            .map(|r| Ok((t.f64(r, "epsilon")?, t.f64(r, value_col)?)))
            .collect::<Result<_>>()?;
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if !pts.is_empty() {
            plot.series.push(Series {
                label: format!("{picture} (median over seeds)"),
                color: color.into(),
                dash,
                markers: false,
                line: true,
                points: pts,
            });
        }
    }
    if let Some(v) = h_line {
        plot.h_lines.push((v, GREEN.into(), "bath temperature".into()));
    }
    if with_crossovers {
        let cpath = dir.join("crossovers.csv");
        if cpath.exists() {
            let c = Table::read(&cpath)?;
            for col in ["sigma", "seed", "eps_lrt", "eps_slrt"] {
                c.column(col)?;
            }
            if let Some(row) = c
                .rows
                .iter()
                .find(|r| c.f64(r, "sigma").unwrap_or(f64::NAN) == sigma_max)
            {
                plot.v_lines.push((
                    c.f64(row, "eps_lrt")?,
                    "#777777".into(),
                    "mean coupling = bath rate".into(),
                ));
                plot.v_lines.push((
                    c.f64(row, "eps_slrt")?,
                    "#b07700".into(),
                    "harmonic coupling = bath rate".into(),
                ));
            }
        }
    }
    write_svg(dir, out_name, plot.render())
}

/// Effective temperature across the (sigma, epsilon) plane, one panel per
/// picture.
fn plot_heatmap(dir: &Path, bath_temperature: Option<f64>) -> Result<Option<String>> {
    let path = dir.join("tsys_heatmap.csv");
    if !path.exists() {
        return Ok(None);
    }
    let t = Table::read(&path)?;
    for col in ["picture", "sigma", "epsilon", "t_sys_median"] {
        t.column(col)?;
    }
    if t.is_empty() {
        return Ok(None);
    }
    let mut sigmas: Vec<f64> = Vec::new();
    let mut epsilons: Vec<f64> = Vec::new();
    for r in &t.rows {
        let s = t.f64(r, "sigma")?;
        let e = t.f64(r, "epsilon")?;
        if !sigmas.contains(&s) {
            sigmas.push(s);
        }
        if !epsilons.contains(&e) {
            epsilons.push(e);
        }
    }
    sigmas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    epsilons.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tb = bath_temperature.unwrap_or(10.0);
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for picture in ["stochastic", "quantum"] {
        let mut grid = vec![vec![f64::NAN; epsilons.len()]; sigmas.len()];
        let mut any = false;
        for r in &t.rows {
            if t.str(r, "picture")? != picture {
                continue;
            }
            let iy = sigmas
                .iter()
                .position(|&s| s == t.f64(r, "sigma").unwrap())
                .unwrap();
            let ix = epsilons
                .iter()
                .position(|&e| e == t.f64(r, "epsilon").unwrap())
                .unwrap();
            grid[iy][ix] = t.f64(r, "t_sys_median")?;
            any = true;
        }
        if any {
            cells.push(grid);
            labels.push(format!("{picture}: effective temperature (sigma vs drive)"));
        }
    }
    let map = Heatmap {
        title: "effective temperature across the sweep".into(),
        panel_labels: labels,
        x_values: epsilons,
        y_values: sigmas,
        cells,
        lo: tb,
        hi: 5.0 * tb,
    };
    write_svg(dir, "tsys_heatmap.svg", map.render())
}

/// Saturation temperature versus dispersion with its localization bound.
fn plot_tinf(dir: &Path, bath_temperature: Option<f64>) -> Result<Option<String>> {
    let path = dir.join("tinf_vs_sigma.csv");
    if !path.exists() {
        return Ok(None);
    }
    let t = Table::read(&path)?;
    for col in ["sigma", "seed", "t_inf", "lower_bound", "t_inf_median"] {
        t.column(col)?;
    }
    if t.is_empty() {
        return Ok(None);
    }
    let mut medians: Vec<(f64, f64)> = Vec::new();
    let mut bounds: Vec<(f64, f64)> = Vec::new();
    let mut points: Vec<(f64, f64)> = Vec::new();
    for r in &t.rows {
        let sigma = t.f64(r, "sigma")?;
        points.push((sigma, t.f64(r, "t_inf")?));
        if !medians.iter().any(|&(s, _)| s == sigma) {
            medians.push((sigma, t.f64(r, "t_inf_median")?));
            bounds.push((sigma, t.f64(r, "lower_bound")?));
        }
    }
    medians.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    bounds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut plot = Plot::new(
        "saturation temperature vs dispersion",
        "dispersion sigma",
        "saturation temperature",
        false,
        true,
    );
    plot.series.push(Series {
        label: "per-seed saturation".into(),
        color: BLUE.into(),
        dash: None,
        markers: true,
        line: false,
        points,
    });
    plot.series.push(Series {
        label: "median over seeds".into(),
        color: BLUE.into(),
        dash: None,
        markers: false,
        line: true,
        points: medians,
    });
    plot.series.push(Series {
        label: "localization lower bound".into(),
        color: RED.into(),
        dash: Some("6,4"),
        markers: false,
        line: true,
        points: bounds,
    });
    if let Some(tb) = bath_temperature {
        plot.h_lines.push((tb, GREEN.into(), "bath temperature".into()));
    }
    write_svg(dir, "tinf_vs_sigma.svg", plot.render())
}

fn write_svg(dir: &Path, name: &str, svg: Option<String>) -> Result<Option<String>> {
    match svg {
        Some(content) => {
            std::fs::write(dir.join(name), content)
                .with_context(|| format!("cannot write {name}"))?;
            Ok(Some(name.to_string()))
        }
        None => {
            eprintln!("warning: no data for {name}, skipped");
            Ok(None)
        }
    }
}
