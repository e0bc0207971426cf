use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::{Artifact, CliError, CliResult, Loaded, Outcome};
use crate::analysis::{
    detect_periods, flc_scan, meyer_evidence, patch_frequency, return_vectors, rigidity_check,
    tile_frequencies, FrequencyTable, ReturnVectorSet, RigidityStatus, RigidityVerdict,
    TileGeometry, DEFAULT_FLC_EPS,
};
use crate::geometry::{
    default_resolution, mask_to_pgm, patch_to_svg, prototile_volumes, rubber_metric,
    set_equation_residual, solve_adjoint_ifs, ColouredPoint, Window,
};
use crate::numberfield::{
    is_pisot, is_pisot_family, is_totally_non_pisot, BasisScalar, SymbolicVector,
};
use crate::spectral::{
    birkhoff_cylinder_estimate, build_cylinders, cylinder_measure, eigenvalue_test,
    fixed_point_sample, mixing_overlap_bound, partition_check, pisot_family_of_alpha,
    separation_constant, weak_mixing_verdict, EigenStatus, EigenvalueVerdict, GridSpec,
    DEFAULT_PARTITION_TOLERANCE,
};
use crate::substitution::{fixed_point_seed, substitute, Patch, SubstitutionSystem, Tile};

pub const DEFAULT_LEVELS: usize = 3;
pub const DEFAULT_FLC_LEVELS: usize = 4;
pub const DEFAULT_RADIUS: f64 = 2.0;
pub const DEFAULT_NMAX: usize = 30;
/// Return vectors for rigidity and eigenvalue tests come from levels up to this.
pub const RETURN_LEVEL: usize = 3;
/// Patches larger than this are summarized instead of listed in JSON.
const MAX_LISTED_TILES: usize = 2000;

fn json_of<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// `{value, method}` pair for a single numeric field.
pub fn tagged(value: impl Serialize, method: &str) -> Value {
    json!({ "value": json_of(&value), "method": method })
}

pub fn vec_str(sys: &SubstitutionSystem, v: &SymbolicVector) -> String {
    v.display(sys.basis()).to_string()
}

pub fn parse_scalars(sys: &SubstitutionSystem, text: &str) -> CliResult<Vec<BasisScalar>> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != sys.dim() {
        return Err(CliError::Usage(format!(
            "`{text}` needs {} comma-separated coordinates",
            sys.dim()
        )));
    }
    parts
        .iter()
        .map(|p| {
            sys.basis()
                .parse(p)
                .map_err(|e| CliError::Usage(format!("`{p}`: {e}")))
        })
        .collect()
}

pub fn parse_vector(sys: &SubstitutionSystem, text: &str) -> CliResult<SymbolicVector> {
    Ok(SymbolicVector::from_scalars(&parse_scalars(sys, text)?))
}

/// `type@x,y;type@x,y` with 1-based types.
pub fn parse_patch(sys: &SubstitutionSystem, text: &str) -> CliResult<Patch> {
    let mut tiles = Vec::new();
    for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (ty, at) = item
            .split_once('@')
            .ok_or_else(|| CliError::Usage(format!("`{item}` is not type@coords")))?;
        let ty: usize = ty
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad tile type `{ty}`")))?;
        if ty == 0 || ty > sys.kappa() {
            return Err(CliError::Usage(format!(
                "tile type {ty} out of range 1..={}",
                sys.kappa()
            )));
        }
        tiles.push(Tile::new(ty - 1, parse_vector(sys, at)?));
    }
    if tiles.is_empty() {
        return Err(CliError::Usage("empty patch".into()));
    }
    Ok(Patch::new(tiles))
}

fn parse_window(text: &str, dim: usize) -> CliResult<Window> {
    let bad = || CliError::Usage(format!("window `{text}` is not lo1,..:hi1,.."));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let nums = |s: &str| -> CliResult<Vec<f64>> {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    };
    let (lo, hi) = (nums(lo)?, nums(hi)?);
    if lo.len() != dim || hi.len() != dim {
        return Err(bad());
    }
    Ok(Window::new(lo, hi))
}

fn tile_type(sys: &SubstitutionSystem, tile: usize) -> CliResult<usize> {
    if tile == 0 || tile > sys.kappa() {
        return Err(CliError::Usage(format!(
            "tile type {tile} out of range 1..={}",
            sys.kappa()
        )));
    }
    Ok(tile - 1)
}

fn resolution(l: &Loaded, explicit: Option<f64>) -> CliResult<f64> {
    match explicit.or(l.config.analysis.prototile_resolution) {
        Some(h) => Ok(h),
        None => default_resolution(&l.system).map_err(CliError::runtime),
    }
}

/// Raster prototile geometry at the configured resolution.
pub fn geometry(l: &Loaded) -> CliResult<TileGeometry> {
    let h = resolution(l, None)?;
    let sol = solve_adjoint_ifs(&l.system, h, None).map_err(CliError::runtime)?;
    TileGeometry::from_masks(&l.system, &sol.masks).map_err(CliError::runtime)
}

pub fn validate(l: &Loaded) -> CliResult<Outcome> {
    let sys = &l.system;
    let v = &l.validation;
    Ok(Outcome::new(
        "validate",
        "float",
        json!({
            "name": sys.name(),
            "dimension": sys.dim(),
            "kappa": sys.kappa(),
            "labels": sys.labels(),
            "basis": sys.basis().names().collect::<Vec<_>>(),
            "s_matrix": tagged(sys.s_matrix(), "exact"),
            "expansive": v.expansive,
            "primitivity_exponent": tagged(v.primitivity_exponent, "exact"),
            "numeric_eigenvalues": tagged(&v.numeric_eigenvalues, "float"),
            "perron_frobenius": tagged(v.perron_frobenius, "float"),
            "det_abs": tagged(v.det_abs, "float"),
            "pf_relative_error": tagged(v.pf_relative_error, "float"),
            "warnings": v.warnings,
        }),
    ))
}

fn patch_json(sys: &SubstitutionSystem, p: &Patch) -> Value {
    let floats = p.float_shifts(sys.basis());
    let listed: Vec<Value> = p
        .tiles()
        .iter()
        .zip(&floats)
        .take(MAX_LISTED_TILES)
        .map(|(t, f)| json!({ "type": t.ty + 1, "shift": vec_str(sys, &t.shift), "float": f }))
        .collect();
    json!({
        "tiles": p.len(),
        "count_by_type": tagged(p.count_by_type(sys.kappa()), "exact"),
        "listed": listed,
        "truncated": p.len() > MAX_LISTED_TILES,
    })
}

pub fn generate(
    l: &Loaded,
    level: usize,
    tile: usize,
    fixed_point: bool,
    window: Option<&str>,
) -> CliResult<Outcome> {
    let sys = &l.system;
    let window = window.map(|w| parse_window(w, sys.dim())).transpose()?;
    let (start, steps, seed_info) = if fixed_point {
        let seed = fixed_point_seed(sys).map_err(CliError::runtime)?;
        let info = json!({ "type": seed.tile.ty + 1, "shift": vec_str(sys, &seed.tile.shift), "period": seed.n });
        (seed.patch(), level * seed.n, info)
    } else {
        let ty = tile_type(sys, tile)?;
        (
            Patch::single(ty, sys.zero_vector()),
            level,
            json!({ "type": ty + 1, "shift": vec_str(sys, &sys.zero_vector()) }),
        )
    };
    let patch = substitute(sys, &start, steps, window.as_ref()).map_err(CliError::runtime)?;
    let text = patch.to_text(sys.basis(), sys.dim());
    let mut data = patch_json(sys, &patch);
    data["seed"] = seed_info;
    data["level"] = json!(level);
    data["substitution_steps"] = json!(steps);
    data["window"] = json!(window);
    Ok(Outcome::new("generate", "exact", data).with(Artifact::new(
        format!("patch_level{level}_tile{tile}.txt"),
        text,
    )))
}

pub fn render(
    l: &Loaded,
    level: usize,
    tile: usize,
    res: Option<f64>,
    svg: bool,
    pgm: bool,
) -> CliResult<Outcome> {
    let sys = &l.system;
    let ty = tile_type(sys, tile)?;
    let h = resolution(l, res)?;
    let sol = solve_adjoint_ifs(sys, h, None).map_err(CliError::runtime)?;
    let patch = substitute(sys, &Patch::single(ty, sys.zero_vector()), level, None)
        .map_err(CliError::runtime)?;
    let tiles: Vec<(usize, Vec<f64>)> = patch
        .tiles()
        .iter()
        .zip(patch.float_shifts(sys.basis()))
        .map(|(t, p)| (t.ty, p))
        .collect();
    let mut outcome = Outcome::new(
        "render",
        "raster",
        json!({ "level": level, "tile": tile, "resolution": h, "tiles": tiles.len(), "iterations": sol.iterations }),
    );
    if svg {
        let body = patch_to_svg(&sol.masks, &tiles).map_err(CliError::runtime)?;
        outcome = outcome.with(Artifact::new(
            format!("render_level{level}_tile{tile}.svg"),
            body,
        ));
    }
    if pgm {
        for (i, m) in sol.masks.iter().enumerate() {
            let bytes = mask_to_pgm(m).map_err(CliError::runtime)?;
            outcome = outcome.with(Artifact::new(format!("prototile{}.pgm", i + 1), bytes));
        }
    }
    Ok(outcome)
}

pub fn prototiles(l: &Loaded, res: Option<f64>, iters: Option<usize>) -> CliResult<Outcome> {
    let sys = &l.system;
    let h = resolution(l, res)?;
    let sol = solve_adjoint_ifs(sys, h, iters).map_err(CliError::runtime)?;
    let vols = prototile_volumes(sys, Some(&sol.masks)).map_err(CliError::runtime)?;
    let residual = set_equation_residual(sys, &sol.masks).map_err(CliError::runtime)?;
    let mut outcome = Outcome::new(
        "prototiles",
        "raster",
        json!({
            "resolution": h,
            "iterations": sol.iterations,
            "hausdorff_steps": tagged(&sol.steps, "raster"),
            "claimed_accuracy": tagged(sol.claimed_accuracy, "raster"),
            "volumes": tagged(&vols.volumes, "float"),
            "mask_volumes": tagged(&vols.mask_volumes, "raster"),
            "pf_eigenvalue": tagged(vols.eigenvalue, "float"),
            "relative_disagreement": tagged(vols.relative_disagreement, "raster"),
            "set_equation_residual": tagged(residual, "raster"),
        }),
    );
    for (i, m) in sol.masks.iter().enumerate() {
        let bytes = mask_to_pgm(m).map_err(CliError::runtime)?;
        outcome = outcome.with(Artifact::new(format!("prototile{}.pgm", i + 1), bytes));
    }
    Ok(outcome)
}

pub fn freq(l: &Loaded, patches: &[String], levels: Option<usize>) -> CliResult<Outcome> {
    let sys = &l.system;
    let levels = levels
        .or(l.config.analysis.levels)
        .unwrap_or(DEFAULT_LEVELS);
    let geom = geometry(l)?;
    let tf = tile_frequencies(sys, &geom).map_err(CliError::runtime)?;
    let mut table = FrequencyTable::default();
    let requested: Vec<(String, Patch)> = if patches.is_empty() {
        (0..sys.kappa())
            .map(|i| (sys.labels()[i].clone(), Patch::single(i, sys.zero_vector())))
            .collect()
    } else {
        patches
            .iter()
            .map(|p| Ok((p.clone(), parse_patch(sys, p)?)))
            .collect::<CliResult<_>>()?
    };
    for (label, p) in &requested {
        table
            .entries
            .push(patch_frequency(sys, &geom, p, levels, label).map_err(CliError::runtime)?);
    }
    Ok(Outcome::new(
        "freq",
        "fit",
        json!({
            "levels": levels,
            "tile_frequencies": tagged(&tf.frequencies, "float"),
            "volumes": tagged(&tf.volumes, "raster"),
            "normalization": tagged(tf.normalization, "float"),
            "patches": tagged(&table.entries, "fit"),
        }),
    )
    .with(Artifact::new(
        format!("freq_levels{levels}.csv"),
        table.to_csv(),
    )))
}

pub fn flc(l: &Loaded, levels: Option<usize>, radius: Option<f64>) -> CliResult<Outcome> {
    let sys = &l.system;
    let levels = levels
        .or(l.config.analysis.flc_levels)
        .unwrap_or(DEFAULT_FLC_LEVELS);
    let radius = radius
        .or(l.config.analysis.flc_radius)
        .unwrap_or(DEFAULT_RADIUS);
    let scan = flc_scan(sys, levels, radius, DEFAULT_FLC_EPS).map_err(CliError::runtime)?;
    let meyer_levels: Vec<usize> = (1..=levels.min(3)).collect();
    let meyer = meyer_evidence(sys, &meyer_levels, radius).map_err(CliError::runtime)?;
    Ok(Outcome::new(
        "flc",
        "float",
        json!({ "verdict": scan.verdict, "scan": json_of(&scan), "meyer": json_of(&meyer) }),
    ))
}

pub fn rigidity_json(sys: &SubstitutionSystem, xi: &ReturnVectorSet, v: &RigidityVerdict) -> Value {
    let (status, detail) = match &v.status {
        RigidityStatus::Rigid { witness } => (
            "RIGID",
            json!({ "witness": witness.iter().map(|w| vec_str(sys, w)).collect::<Vec<_>>() }),
        ),
        RigidityStatus::NotRigid { excess } => ("NOT_RIGID", json!({ "excess": excess })),
        RigidityStatus::Inapplicable { reason } => ("INAPPLICABLE", json!({ "reason": reason })),
    };
    json!({
        "status": status,
        "detail": detail,
        "qdim": tagged(v.qdim, "exact"),
        "bound": v.bound,
        "experimental": v.experimental,
        "generators": v.generators,
        "return_vectors": xi.len(),
        "return_level": xi.level,
        "return_radius": xi.radius,
    })
}

pub fn return_set(
    l: &Loaded,
    level: Option<usize>,
    radius: Option<f64>,
) -> CliResult<ReturnVectorSet> {
    let level = level.unwrap_or(RETURN_LEVEL);
    let radius = radius
        .or(l.config.analysis.flc_radius)
        .unwrap_or(DEFAULT_RADIUS);
    return_vectors(&l.system, level, radius).map_err(CliError::runtime)
}

pub fn rigidity(l: &Loaded, level: Option<usize>, radius: Option<f64>) -> CliResult<Outcome> {
    let xi = return_set(l, level, radius)?;
    let v = rigidity_check(&l.system, &xi).map_err(CliError::runtime)?;
    Ok(Outcome::new(
        "rigidity",
        "exact",
        rigidity_json(&l.system, &xi, &v),
    ))
}

pub fn pisot(l: &Loaded) -> CliResult<Outcome> {
    let sys = &l.system;
    let decl = sys.q().eigen_decl();
    let mut each = Vec::new();
    for (e, m) in decl {
        let report = is_pisot(e).map_err(CliError::runtime)?;
        each.push(json!({
            "minpoly": e.minpoly().coeffs(),
            "approx": [e.approx().re, e.approx().im],
            "multiplicity": m,
            "conjugates": e.all_conjugates().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "pisot": report.status,
            "margin": tagged(report.margin, "float"),
        }));
    }
    let set: Vec<_> = decl.iter().map(|(e, _)| e.clone()).collect();
    let family = is_pisot_family(&set).map_err(CliError::runtime)?;
    let tnp = is_totally_non_pisot(&set).map_err(CliError::runtime)?;
    Ok(Outcome::new(
        "pisot",
        "float",
        json!({ "eigenvalues": each, "pisot_family": family, "totally_non_pisot": tnp }),
    ))
}

fn eigen_method(v: &EigenvalueVerdict) -> &'static str {
    match v.status {
        EigenStatus::ExactPass { .. } => "exact",
        EigenStatus::NumericPass { .. } => "fit",
        EigenStatus::Fail { .. } if v.sequence.residues.iter().all(|r| r.exact) => "exact",
        EigenStatus::Fail { .. } => "float",
    }
}

pub fn eigen_json(l: &Loaded, v: &EigenvalueVerdict) -> CliResult<Value> {
    let family = pisot_family_of_alpha(&l.system, &v.alpha).map_err(CliError::runtime)?;
    Ok(json!({
        "alpha": v.sequence.alpha,
        "status": json_of(&v.status),
        "passed": v.status.passed(),
        "period_ok": v.period_ok,
        "method": eigen_method(v),
        "residues": json_of(&v.sequence.residues),
        "precision_bits": v.sequence.precision_bits,
        "notice": v.sequence.notice,
        "pisot_family": json_of(&family),
    }))
}

/// Residue tests for each α, with the periods detected at the return level.
pub fn eigen_verdicts(
    l: &Loaded,
    alphas: &[String],
    nmax: Option<usize>,
    xi: &ReturnVectorSet,
    periods: &[SymbolicVector],
) -> CliResult<Vec<EigenvalueVerdict>> {
    let sys = &l.system;
    let nmax = nmax
        .or(l.config.analysis.eigentest_nmax)
        .unwrap_or(DEFAULT_NMAX);
    let texts: Vec<String> = if alphas.is_empty() {
        l.config
            .analysis
            .alpha_candidates
            .iter()
            .map(|c| c.join(","))
            .collect()
    } else {
        alphas.to_vec()
    };
    if texts.is_empty() {
        return Err(CliError::Usage(
            "no --alpha given and no alpha_candidates configured".into(),
        ));
    }
    texts
        .iter()
        .map(|t| {
            eigenvalue_test(sys, &parse_scalars(sys, t)?, xi, nmax, periods)
                .map_err(CliError::runtime)
        })
        .collect()
}

pub fn eigentest(
    l: &Loaded,
    alphas: &[String],
    nmax: Option<usize>,
    level: Option<usize>,
    radius: Option<f64>,
) -> CliResult<Outcome> {
    let sys = &l.system;
    let xi = return_set(l, level, radius)?;
    let periods = detect_periods(sys, level.unwrap_or(RETURN_LEVEL), None)
        .map_err(CliError::runtime)?
        .periods;
    let verdicts = eigen_verdicts(l, alphas, nmax, &xi, &periods)?;
    let blocks = verdicts
        .iter()
        .map(|v| eigen_json(l, v))
        .collect::<CliResult<Vec<_>>>()?;
    let method = if verdicts.iter().all(|v| eigen_method(v) == "exact") {
        "exact"
    } else {
        "float"
    };
    let mut csv = String::from("alpha,n,residue,exact,error_bound\n");
    for v in &verdicts {
        for r in &v.sequence.residues {
            csv.push_str(&format!(
                "\"{}\",{},{:.12e},{},{:.3e}\n",
                v.sequence.alpha.join(","),
                r.n,
                r.value,
                r.exact,
                r.error_bound
            ));
        }
    }
    let nmax = nmax
        .or(l.config.analysis.eigentest_nmax)
        .unwrap_or(DEFAULT_NMAX);
    Ok(Outcome::new(
        "eigentest",
        method,
        json!({
            "nmax": nmax,
            "return_vectors": xi.len(),
            "periods": periods.iter().map(|p| vec_str(sys, p)).collect::<Vec<_>>(),
            "candidates": blocks,
        }),
    )
    .with(Artifact::new(format!("residues_nmax{nmax}.csv"), csv)))
}

pub fn weak_mixing_json(
    l: &Loaded,
    verdicts: &[EigenvalueVerdict],
    structural: &[&str],
) -> CliResult<Value> {
    let r = weak_mixing_verdict(&l.system, verdicts, structural).map_err(CliError::runtime)?;
    Ok(json_of(&r))
}

pub fn cylinders(
    l: &Loaded,
    m: Option<u32>,
    level: Option<usize>,
    frame: Option<f64>,
) -> CliResult<Outcome> {
    let sys = &l.system;
    let level = level
        .or(l.config.analysis.cylinder_level)
        .unwrap_or(DEFAULT_LEVELS);
    let sample = fixed_point_sample(sys, level).map_err(CliError::runtime)?;
    let sep = separation_constant(&sample.points).map_err(CliError::runtime)?;
    let m = m
        .or(l.config.analysis.cylinder_m)
        .unwrap_or(sep.m0)
        .max(sep.m0);
    let grid = GridSpec::new(sys.dim(), m, sep).map_err(CliError::runtime)?;
    let half = 2f64.powi(m as i32);
    let c = grid.cube_side();
    let available = sample
        .complete
        .sides()
        .iter()
        .fold(f64::INFINITY, |a, s| a.min(*s))
        - 2.0 * half
        - 2.0 * c;
    let frame = frame.unwrap_or_else(|| available.min(4.0 * half));
    let set = build_cylinders(&sample, &grid, Some(frame)).map_err(CliError::runtime)?;
    let tol = l
        .config
        .analysis
        .partition_tolerance
        .unwrap_or(DEFAULT_PARTITION_TOLERANCE);
    let report = partition_check(&set, tol);
    let sides: Vec<f64> = [0.25, 0.5, 0.9].iter().map(|f| f * (frame - c)).collect();
    let birkhoff = birkhoff_cylinder_estimate(&set, None, &sides).map_err(CliError::runtime)?;
    let mut csv =
        String::from("alpha,points,wiggle_volume,frequency,raw_frequency,measure,occurrences\n");
    for cl in &set.classes {
        csv.push_str(&format!(
            "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{}\n",
            cl.alpha_index,
            cl.rep.len(),
            cl.wiggle.volume(),
            cl.frequency,
            cl.raw_frequency,
            cylinder_measure(cl, cl.frequency),
            cl.occurrences
        ));
    }
    Ok(Outcome::new(
        "cylinders",
        "float",
        json!({
            "sample_level": level,
            "separation": json_of(&sep),
            "grid": json_of(&grid),
            "frame": json_of(&set.frame),
            "cells": set.cells,
            "patterns": set.alpha_count,
            "classes": set.classes.len(),
            "boundary_occurrences": set.boundary_occurrences,
            "partition": json_of(&report),
            "birkhoff": json_of(&birkhoff),
        }),
    )
    .with(Artifact::new(format!("cylinders_m{m}.csv"), csv)))
}

pub fn mixing(
    l: &Loaded,
    z: Option<&str>,
    host_level: Option<usize>,
    nmax: Option<usize>,
) -> CliResult<Outcome> {
    let sys = &l.system;
    let z = match z {
        Some(t) => parse_vector(sys, t)?,
        None => match &l.config.analysis.mixing_z {
            Some(c) => parse_vector(sys, &c.join(","))?,
            None => {
                return Err(CliError::Usage(
                    "no --z given and no mixing_z configured".into(),
                ))
            }
        },
    };
    let host_level = host_level.unwrap_or(l.config.analysis.levels.unwrap_or(DEFAULT_LEVELS) + 1);
    let nmax = nmax.unwrap_or(host_level.saturating_sub(1).max(1));
    let geom = geometry(l)?;
    let bound =
        mixing_overlap_bound(sys, &geom, &z, host_level, nmax).map_err(CliError::runtime)?;
    let mut csv = String::from("n,joint,single,ratio\n");
    for p in &bound.curve {
        csv.push_str(&format!(
            "{},{},{},{:.12e}\n",
            p.n, p.joint, p.single, p.ratio
        ));
    }
    Ok(Outcome::new("mixing", "float", json_of(&bound))
        .with(Artifact::new(format!("mixing_host{host_level}.csv"), csv)))
}

fn read_points(path: &Path) -> CliResult<Vec<ColouredPoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(super::config::ConfigError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(super::config::ConfigError::Schema {
            pointer: "/".into(),
            msg: e.to_string(),
        })
    })?;
    let list = value.get("points").unwrap_or(&value);
    serde_json::from_value(list.clone()).map_err(|e| {
        CliError::Config(super::config::ConfigError::Schema {
            pointer: "/points".into(),
            msg: format!("expected [[colour, [x, ...]], ...]: {e}"),
        })
    })
}

pub fn metric(a: &Path, b: &Path) -> CliResult<Outcome> {
    let pa = read_points(a)?;
    let pb = read_points(b)?;
    let d = rubber_metric(&pa, &pb);
    Ok(Outcome::new(
        "metric",
        "float",
        json!({ "a": a.display().to_string(), "b": b.display().to_string(), "distance": json_of(&d) }),
    ))
}
