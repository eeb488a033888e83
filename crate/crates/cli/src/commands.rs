use std::fmt;
use std::path::Path;

use gwp_core::cwt::{
    forward_cwt, log_spaced_scales, scale_range_for_grid, uniform_angles, Convention,
};
use gwp_core::grid::sample_field;
use gwp_core::metrics::{l2_norm, moment_report, run_sweep};
use gwp_core::sources::{
    advanced_field, composite_pulse, regularized_sum, retarded_field, FieldValue,
};
use gwp_core::verify::{
    round_trip, round_trip_image, run_criterion, smallest_scale, CRITERION_COUNT,
};
use gwp_core::{ComplexField, Domain, FieldKind, GridSpec, GwpError, PacketParams};
use num_complex::Complex64;

use crate::config::{parse_list, ConfigError, RunConfig};
use crate::output::{field_csv, field_pgm, fmt_f64, write_atomic, Csv};

/// Why a command stopped; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    NonConvergence(String),
    Verification(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification(_) | Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::NonConvergence(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::NonConvergence(m) => write!(f, "numerical failure: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<GwpError> for Failure {
    fn from(e: GwpError) -> Self {
        match e {
            GwpError::NonConvergence { .. } => Failure::NonConvergence(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write_atomic(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn comment(command: &str, cfg: &RunConfig) -> String {
    format!("gwp {command} {}", cfg.summary)
}

fn require_2d(cfg: &RunConfig, command: &str) -> Result<(), Failure> {
    if cfg.params.dim() == 2 {
        Ok(())
    } else {
        Err(Failure::Config(format!(
            "{command} works on 2D packets, got dim={}",
            cfg.params.dim()
        )))
    }
}

fn position_grid(cfg: &RunConfig) -> Result<GridSpec, Failure> {
    let sig = cfg.params.sigmas();
    let half = cfg.extent.unwrap_or([6.0 * sig[0], 6.0 * sig[1]]);
    Ok(GridSpec::centered(
        &[cfg.params.c() * cfg.t, 0.0],
        &half,
        &[cfg.nx, cfg.ny],
    )?)
}

fn write_field(
    cfg: &RunConfig,
    name: &str,
    field: &ComplexField,
    note: &str,
) -> Result<(), Failure> {
    let text = field_csv(field, &format!("{} {note}", comment("render", cfg)));
    write(&cfg.out.join(format!("{name}.csv")), text.as_bytes())?;
    if cfg.pgm {
        let shape = field.grid.shape();
        write(
            &cfg.out.join(format!("{name}.pgm")),
            &field_pgm(&field.values, shape[0], shape[1]),
        )?;
    }
    Ok(())
}

pub fn render(cfg: &RunConfig) -> Result<(), Failure> {
    require_2d(cfg, "render")?;
    let pp = &cfg.params;
    let grid = position_grid(cfg)?;
    let field = sample_field(FieldKind::Position, &grid, pp, cfg.t, false)?;
    write_field(cfg, "position", &field, "domain=position")?;
    let sig = pp.sigmas();
    let kgrid = GridSpec::centered(
        &[pp.kappa(), 0.0],
        &[6.0 / sig[0], 6.0 / sig[1]],
        &[cfg.nx, cfg.ny],
    )?;
    let spectrum = sample_field(FieldKind::Frequency, &kgrid, pp, cfg.t, false)?;
    write_field(
        cfg,
        "spectrum",
        &spectrum,
        "domain=frequency columns=kx,ky,re,im,abs",
    )
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn metrics(cfg: &RunConfig) -> Result<(), Failure> {
    require_2d(cfg, "metrics")?;
    let r = moment_report(&cfg.params)?;
    let norm = l2_norm(&cfg.params, 0.0)?;
    let mut csv = Csv::new(
        &comment("metrics", cfg),
        &[
            "norm",
            "center_x",
            "center_y",
            "dx",
            "dy",
            "center_kx",
            "center_ky",
            "dkx",
            "dky",
            "prod_x",
            "prod_y",
            "srp",
            "arp",
            "directional",
            "quad_err",
        ],
    );
    csv.row(&[
        fmt_f64(norm),
        fmt_f64(r.center_x),
        fmt_f64(r.center_y),
        fmt_f64(r.width_x),
        fmt_f64(r.width_y),
        fmt_f64(r.center_kx),
        fmt_f64(r.center_ky),
        fmt_f64(r.width_kx),
        fmt_f64(r.width_ky),
        fmt_f64(r.product_x),
        fmt_f64(r.product_y),
        opt(r.srp),
        opt(r.arp),
        r.directional.to_string(),
        fmt_f64(r.quadrature_err),
    ]);
    println!(
        "dx={:.6} dy={:.6} dkx={:.6} dky={:.6} prod=({:.6}, {:.6}) directional={}",
        r.width_x, r.width_y, r.width_kx, r.width_ky, r.product_x, r.product_y, r.directional
    );
    write(&cfg.out.join("metrics.csv"), csv.into_string().as_bytes())
}

pub fn sweep(cfg: &RunConfig) -> Result<(), Failure> {
    let mut csv = Csv::new(
        &comment("sweep", cfg),
        &[
            "sqrt_p",
            "family_value",
            "dx",
            "dy",
            "dkx",
            "dky",
            "dx_over_sigx",
            "dy_over_sigy",
            "prod_x",
            "prod_y",
            "srp",
            "arp",
            "directional",
            "quad_err",
        ],
    );
    for &value in &cfg.values {
        let result = run_sweep(
            cfg.mode,
            value,
            &cfg.sqrt_p,
            cfg.params.nu(),
            cfg.params.c(),
        )?;
        if result.nonstandard {
            eprintln!(
                "note: {}={value} is not one of the standard curve families",
                cfg.mode.name()
            );
        }
        for pt in &result.points {
            let r = &pt.report;
            csv.row(&[
                fmt_f64(pt.sqrt_p),
                fmt_f64(value),
                fmt_f64(r.width_x),
                fmt_f64(r.width_y),
                fmt_f64(r.width_kx),
                fmt_f64(r.width_ky),
                fmt_f64(pt.ratios[0]),
                fmt_f64(pt.ratios[1]),
                fmt_f64(r.product_x),
                fmt_f64(r.product_y),
                opt(r.srp),
                opt(r.arp),
                r.directional.to_string(),
                fmt_f64(r.quadrature_err),
            ]);
        }
    }
    write(&cfg.out.join("sweep.csv"), csv.into_string().as_bytes())
}

/// Reads a regular 2D grid from `x,y,re[,im[,abs]]` rows. Comment lines
/// start with `#`; a non-numeric first row is taken as the header.
pub fn read_field_csv(path: &Path) -> Result<ComplexField, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let bad = |line: usize, msg: &str| Failure::Config(format!("{}:{line}: {msg}", path.display()));
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() >= 3 => rows.push((
                v[0],
                v[1],
                Complex64::new(v[2], v.get(3).copied().unwrap_or(0.0)),
            )),
            Ok(_) => return Err(bad(i + 1, "need at least x,y,re")),
            Err(_) if rows.is_empty() => continue,
            Err(_) => return Err(bad(i + 1, "non-numeric value")),
        }
    }
    let axis = |pick: fn(&(f64, f64, Complex64)) -> f64| -> Vec<f64> {
        let mut v: Vec<f64> = rows.iter().map(pick).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let xs = axis(|r| r.0);
    let ys = axis(|r| r.1);
    if xs.len() < 2 || ys.len() < 2 || xs.len() * ys.len() != rows.len() {
        return Err(Failure::Config(format!(
            "{}: {} rows do not form a regular grid ({} x values, {} y values)",
            path.display(),
            rows.len(),
            xs.len(),
            ys.len()
        )));
    }
    let step = |v: &[f64]| -> Result<f64, Failure> {
        let h = (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
        if v.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h) {
            Ok(h)
        } else {
            Err(Failure::Config(format!(
                "{}: grid spacing is not uniform",
                path.display()
            )))
        }
    };
    let (hx, hy) = (step(&xs)?, step(&ys)?);
    let grid = GridSpec::new(vec![xs[0], ys[0]], vec![hx, hy], vec![xs.len(), ys.len()])?;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (x, y, v) in rows {
        let ix = ((x - xs[0]) / hx).round() as usize;
        let iy = ((y - ys[0]) / hy).round() as usize;
        values[ix * ys.len() + iy] = v;
    }
    Ok(ComplexField::new(grid, values, Domain::Position)?)
}

fn cwt_input(cfg: &RunConfig) -> Result<(ComplexField, String), Failure> {
    match &cfg.input {
        Some(path) => Ok((read_field_csv(path)?, format!("input={}", path.display()))),
        None => Ok((round_trip_image()?, "input=synthetic".into())),
    }
}

fn cwt_axes(cfg: &RunConfig, grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    require_2d(cfg, "cwt")?;
    let (dlo, dhi) = scale_range_for_grid(&cfg.params, grid)?;
    let lo = cfg
        .scale_min
        .unwrap_or_else(|| dlo.max(smallest_scale(&cfg.params, grid)));
    let hi = cfg.scale_max.unwrap_or(dhi);
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Failure::Config(format!(
            "scale range [{lo}, {hi}] is empty"
        )));
    }
    Ok((
        log_spaced_scales(lo, hi, cfg.scales),
        uniform_angles(cfg.angles),
    ))
}

pub fn cwt_analyze(cfg: &RunConfig) -> Result<(), Failure> {
    let (f, source) = cwt_input(cfg)?;
    let (scales, angles) = cwt_axes(cfg, &f.grid)?;
    let w = forward_cwt(&f, &scales, &angles, &cfg.params, cfg.t)?;
    let cell = f.grid.cell_volume();
    let mut csv = Csv::new(
        &format!("{} {source}", comment("cwt analyze", cfg)),
        &["scale", "angle", "energy", "max_abs"],
    );
    for (si, a) in scales.iter().enumerate() {
        for (ai, alpha) in angles.iter().enumerate() {
            let slice = w.slice(si, ai);
            let energy: f64 = slice.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell;
            let peak = slice.iter().map(|v| v.norm()).fold(0.0, f64::max);
            csv.row(&[fmt_f64(*a), fmt_f64(*alpha), fmt_f64(energy), fmt_f64(peak)]);
        }
    }
    write(
        &cfg.out.join("cwt_energy.csv"),
        csv.into_string().as_bytes(),
    )
}

pub fn cwt_roundtrip(cfg: &RunConfig) -> Result<(), Failure> {
    let (f, source) = cwt_input(cfg)?;
    let (scales, angles) = cwt_axes(cfg, &f.grid)?;
    let rt = round_trip(&f, &cfg.params, &scales, &angles)?;
    let note = format!("{} {source}", comment("cwt roundtrip", cfg));
    write(
        &cfg.out.join("reconstruction.csv"),
        field_csv(&rt.reconstruction, &note).as_bytes(),
    )?;
    let c_without = rt
        .admissibility
        .in_convention(Convention::Without2PiPower)
        .value;
    let c_with = rt
        .admissibility
        .in_convention(Convention::With2PiPower)
        .value;
    let mut csv = Csv::new(
        &note,
        &[
            "rel_error",
            "c_psi",
            "c_psi_with_2pi",
            "c_optimal",
            "scale_min",
            "scale_max",
        ],
    );
    csv.row(&[
        fmt_f64(rt.rel_error),
        fmt_f64(c_without),
        fmt_f64(c_with),
        fmt_f64(rt.optimal_c),
        fmt_f64(scales[0]),
        fmt_f64(scales[scales.len() - 1]),
    ]);
    write(&cfg.out.join("roundtrip.csv"), csv.into_string().as_bytes())?;
    println!(
        "relative L2 error {:.4e}; C = {:.6e}, optimal C = {:.6e}",
        rt.rel_error, c_without, rt.optimal_c
    );
    let tol = cfg.tolerance("roundtrip");
    if rt.rel_error > tol {
        return Err(Failure::Verification(format!(
            "relative error {:.4e} exceeds {tol}",
            rt.rel_error
        )));
    }
    let gap = (rt.optimal_c / c_without - 1.0)
        .abs()
        .min((rt.optimal_c / c_with - 1.0).abs());
    let tol = cfg.tolerance("convention");
    if gap > tol {
        return Err(Failure::Verification(format!(
            "optimal gain differs from both conventions by {gap:.3e}"
        )));
    }
    Ok(())
}

pub fn verify(only: Option<&str>) -> Result<(), Failure> {
    let ids: Vec<u8> = match only {
        None => (1..=CRITERION_COUNT).collect(),
        Some(list) => parse_list(list)?
            .into_iter()
            .map(|v| {
                if v.fract() == 0.0 && (1.0..=f64::from(CRITERION_COUNT)).contains(&v) {
                    Ok(v as u8)
                } else {
                    Err(Failure::Config(format!("no criterion {v}")))
                }
            })
            .collect::<Result<_, _>>()?,
    };
    let mut failed = Vec::new();
    for id in ids {
        let report = run_criterion(id).expect("id checked above");
        println!("{}", report.line());
        if !report.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("criteria {failed:?}")))
    }
}

fn source_field(
    grid: &GridSpec,
    f: impl Fn(&[f64]) -> Result<FieldValue, GwpError> + Sync,
) -> Result<Vec<Option<Complex64>>, Failure> {
    let mut x = [0.0; 2];
    (0..grid.len())
        .map(|i| {
            grid.coords_into(i, &mut x);
            Ok(f(&x)?.value())
        })
        .collect()
}

fn source_csv(grid: &GridSpec, values: &[Option<Complex64>], note: &str) -> String {
    let mut csv = Csv::new(note, &["x", "y", "re", "im", "abs"]);
    let mut x = [0.0; 2];
    for (i, v) in values.iter().enumerate() {
        grid.coords_into(i, &mut x);
        let cells = match v {
            Some(v) => [fmt_f64(v.re), fmt_f64(v.im), fmt_f64(v.norm())],
            None => Default::default(),
        };
        csv.row(&[
            fmt_f64(x[0]),
            fmt_f64(x[1]),
            cells[0].clone(),
            cells[1].clone(),
            cells[2].clone(),
        ]);
    }
    csv.into_string()
}

pub fn sources(cfg: &RunConfig) -> Result<(), Failure> {
    require_2d(cfg, "sources")?;
    let pp: &PacketParams = &cfg.params;
    let (q, t, c, eps) = (cfg.q, cfg.t, pp.c(), pp.epsilons()[0]);
    let grid = position_grid(cfg)?;
    let base = comment("sources", cfg);
    let retarded = source_field(&grid, |x| retarded_field(q, x, t, c))?;
    write(
        &cfg.out.join("retarded.csv"),
        source_csv(&grid, &retarded, &format!("{base} field=retarded")).as_bytes(),
    )?;
    let advanced = source_field(&grid, |x| advanced_field(q, x, t, c))?;
    write(
        &cfg.out.join("advanced.csv"),
        source_csv(&grid, &advanced, &format!("{base} field=advanced")).as_bytes(),
    )?;
    let regularized = source_field(&grid, |x| {
        regularized_sum(q, x, t, c, eps).map(FieldValue::Regular)
    })?;
    write(
        &cfg.out.join("regularized.csv"),
        source_csv(
            &grid,
            &regularized,
            &format!("{base} field=regularized eps={}", fmt_f64(eps)),
        )
        .as_bytes(),
    )?;
    let mut csv = Csv::new(
        &format!("{base} field=composite_pulse"),
        &["t", "re", "im", "abs"],
    );
    let t_max = 10.0 * pp.gamma() / c;
    for i in 0..=200 {
        let ti = t_max * i as f64 / 200.0;
        let v = composite_pulse(ti, pp)?;
        csv.row(&[fmt_f64(ti), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(v.norm())]);
    }
    write(&cfg.out.join("pulse.csv"), csv.into_string().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let nc = GwpError::NonConvergence {
            what: "x".into(),
            last_change: 1.0,
        };
        assert_eq!(Failure::from(nc).exit_code(), 3);
        assert_eq!(
            Failure::from(GwpError::Precondition("x".into())).exit_code(),
            2
        );
        assert_eq!(Failure::from(ConfigError("x".into())).exit_code(), 2);
        assert_eq!(Failure::Verification("x".into()).exit_code(), 1);
        assert_eq!(Failure::Io("x".into()).exit_code(), 1);
    }
}
