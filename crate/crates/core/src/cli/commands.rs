use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::henon_map::{generalized_dimension, DimensionMap};
use crate::io::{fmt_f64, to_json_string};
use crate::morse::{
    degeneracy_scan_values, edge_refined_values, morse_index_from_values, symmetric_morse_index, MorseError,
    MorseReport,
};
use crate::radial_ode::{
    auxiliary_z, pull_back, solve_nodal_power, validate_profile, IvpOptions, ProfileMetadata,
    QualitativeReport, RadialProfile,
};
use crate::spectral::{
    dense_oracle_spectrum, solve_singular_spectrum, solve_standard_spectrum, Potential, SpectralConfig,
    SpectralError, SpectrumSummary, WeightKind, WeightedSLProblem,
};

use super::cache::{stage_key, write_file, Cache};
use super::config::{RunConfig, SweepAxis};
use super::CliError;

fn solver(e: impl std::fmt::Display) -> CliError {
    CliError::Solver(e.to_string())
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    to_json_string(value).expect("report serializes")
}

fn map_of(cfg: &RunConfig) -> Result<DimensionMap, CliError> {
    generalized_dimension(cfg.n, cfg.alpha).map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Serialize)]
struct ProfileKey<'a> {
    #[serde(rename = "M")]
    dim: f64,
    p: f64,
    m: usize,
    ivp: &'a IvpOptions,
}

/// Emden-variable profile with `c = 1`, reloaded from its serialized form so
/// fresh and cached runs see identical samples.
pub struct ProfileStage {
    pub map: DimensionMap,
    pub emden: RadialProfile,
    pub key: String,
}

pub fn profile_stage(cfg: &RunConfig, cache: &Cache) -> Result<ProfileStage, CliError> {
    let map = map_of(cfg)?;
    let key = stage_key(
        "profile",
        &ProfileKey {
            dim: map.m,
            p: cfg.p,
            m: cfg.m,
            ivp: &cfg.ivp,
        },
    );
    let meta_path = cache.path("profile", &key, ".json");
    let csv_path = cache.path("profile", &key, ".csv");
    let load = |meta: &str, csv: &str| -> Option<RadialProfile> {
        let meta: ProfileMetadata = serde_json::from_str(meta).ok()?;
        RadialProfile::from_parts(&meta, csv, None).ok()
    };
    if let (Some(meta), Some(csv)) = (cache.read(&meta_path), cache.read(&csv_path)) {
        if let Some(emden) = load(&meta, &csv) {
            return Ok(ProfileStage { map, emden, key });
        }
    }
    let fresh = solve_nodal_power(map.m, cfg.p, cfg.m, &cfg.ivp).map_err(solver)?;
    let meta = json(&fresh.metadata());
    let csv = fresh.to_csv();
    cache.write(&csv_path, &csv)?;
    cache.write(&meta_path, &meta)?;
    let emden = load(&meta, &csv).ok_or_else(|| solver("profile does not survive serialization"))?;
    Ok(ProfileStage { map, emden, key })
}

#[derive(Serialize)]
struct ProfileOutput<'a> {
    metadata: ProfileMetadata,
    emden: ProfileMetadata,
    validation: &'a QualitativeReport,
    z_zeros: Vec<f64>,
    z_zero_count: usize,
}

pub fn cmd_solve(cfg: &RunConfig, cache: &Cache) -> Result<Vec<String>, CliError> {
    let stage = profile_stage(cfg, cache)?;
    let z = auxiliary_z(&stage.emden).map_err(solver)?;
    let validation = validate_profile(&stage.emden);
    let emden_meta = stage.emden.metadata();
    let emden_csv = stage.emden.to_csv();
    let physical = pull_back(stage.emden, &stage.map).map_err(solver)?;
    let out = ProfileOutput {
        metadata: physical.metadata(),
        emden: emden_meta,
        validation: &validation,
        z_zeros: z.zeros,
        z_zero_count: z.zero_count,
    };
    let files = [
        ("profile.json", json(&out)),
        ("profile.csv", physical.to_csv()),
        ("emden_profile.csv", emden_csv),
    ];
    write_outputs(cfg, &files)
}

/// Both spectra of the linearization and the edge-refined singular values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub map: DimensionMap,
    pub nodal_zones: usize,
    pub zero_potential: bool,
    pub singular: SpectrumSummary,
    pub standard: SpectrumSummary,
    /// Singular eigenvalues, with those next to `−(M−1)` recomputed from the
    /// cross identity with `v'`.
    pub edge_refined: Vec<f64>,
}

pub struct SpectrumStage {
    pub record: SpectrumRecord,
    pub singular_csv: String,
    pub standard_csv: String,
}

#[derive(Serialize)]
struct SpectrumKey<'a> {
    profile: &'a str,
    #[serde(rename = "N")]
    n: u32,
    alpha: f64,
    k: usize,
    zero_potential: bool,
    spectral: &'a SpectralConfig,
}

pub fn spectrum_stage(cfg: &RunConfig, cache: &Cache) -> Result<SpectrumStage, CliError> {
    let map = map_of(cfg)?;
    let profile = if cfg.zero_potential {
        None
    } else {
        Some(profile_stage(cfg, cache)?)
    };
    let key = stage_key(
        "spectrum",
        &SpectrumKey {
            profile: profile.as_ref().map_or("none", |p| p.key.as_str()),
            n: cfg.n,
            alpha: cfg.alpha,
            k: cfg.k,
            zero_potential: cfg.zero_potential,
            spectral: &cfg.spectral,
        },
    );
    let paths = [
        cache.path("spectrum", &key, ".json"),
        cache.path("spectrum", &key, "-singular.csv"),
        cache.path("spectrum", &key, "-standard.csv"),
    ];
    if let [Some(rec), Some(sing), Some(std)] = paths.clone().map(|p| cache.read(&p)) {
        if let Ok(record) = serde_json::from_str(&rec) {
            return Ok(SpectrumStage {
                record,
                singular_csv: sing,
                standard_csv: std,
            });
        }
    }

    let emden = profile.map(|p| Arc::new(p.emden));
    let potential = match &emden {
        Some(v) => Potential::linearized(v.clone()),
        None => Potential::Zero,
    };
    let singular = solve_singular_spectrum(
        &WeightedSLProblem::new(map.m, potential.clone(), WeightKind::Singular),
        cfg.k,
        &cfg.spectral,
    )
    .map_err(solver)?;
    let standard = solve_standard_spectrum(
        &WeightedSLProblem::new(map.m, potential, WeightKind::Standard),
        cfg.k,
        &cfg.spectral,
    )
    .map_err(solver)?;
    let edge_refined = match &emden {
        Some(v) => edge_refined_values(&singular, v).map_err(solver)?,
        None => singular.values(),
    };
    let record = SpectrumRecord {
        map,
        nodal_zones: cfg.m,
        zero_potential: cfg.zero_potential,
        singular: singular.summary(),
        standard: standard.summary(),
        edge_refined,
    };
    let text = json(&record);
    let stage = SpectrumStage {
        record: serde_json::from_str(&text).map_err(solver)?,
        singular_csv: singular.eigenfunctions_csv(),
        standard_csv: standard.eigenfunctions_csv(),
    };
    cache.write(&paths[1], &stage.singular_csv)?;
    cache.write(&paths[2], &stage.standard_csv)?;
    cache.write(&paths[0], &text)?;
    Ok(stage)
}

pub fn cmd_spectrum(cfg: &RunConfig, cache: &Cache) -> Result<Vec<String>, CliError> {
    let stage = spectrum_stage(cfg, cache)?;
    let files = [
        ("spectrum.json", json(&stage.record)),
        ("singular_eigenfunctions.csv", stage.singular_csv),
        ("standard_eigenfunctions.csv", stage.standard_csv),
    ];
    write_outputs(cfg, &files)
}

/// Morse report with bounds, prediction and a degeneracy block that uses
/// both spectra.
pub fn morse_report(cfg: &RunConfig, rec: &SpectrumRecord) -> Result<MorseReport, CliError> {
    if !rec.singular.near_threshold.is_empty() {
        return Err(solver(MorseError::NearThreshold {
            values: rec.singular.near_threshold.clone(),
        }));
    }
    let mut report = morse_index_from_values(&rec.edge_refined, &rec.map)
        .map_err(solver)?
        .with_profile(cfg.m, true);
    let standard: Vec<f64> = rec.standard.eigenvalues.iter().map(|e| e.value).collect();
    report.degeneracy =
        degeneracy_scan_values(&rec.edge_refined, &standard, &rec.map, cfg.degeneracy_tol).map_err(solver)?;
    Ok(report)
}

#[derive(Serialize)]
struct SymmetricIndex {
    label: String,
    index: u128,
}

#[derive(Serialize)]
struct MorseOutput<'a> {
    report: &'a MorseReport,
    symmetric: SymmetricIndex,
    ordering_holds: bool,
}

pub fn cmd_morse(cfg: &RunConfig, cache: &Cache) -> Result<Vec<String>, CliError> {
    let stage = spectrum_stage(cfg, cache)?;
    let report = morse_report(cfg, &stage.record)?;
    let sym = cfg.symmetry()?;
    let index = symmetric_morse_index(&report, &sym).map_err(solver)?;
    let out = MorseOutput {
        report: &report,
        symmetric: SymmetricIndex {
            label: sym.label.clone(),
            index,
        },
        ordering_holds: report.ordering_holds(cfg.m, 0.0),
    };
    let files = [("morse.json", json(&out)), ("morse.csv", report.to_csv())];
    write_outputs(cfg, &files)
}

struct SweepRow {
    param: f64,
    values: Vec<f64>,
    total: u128,
    general: Option<u128>,
    with_f3: Option<u128>,
}

fn sweep_step(cfg: &RunConfig, cache: &Cache, param: f64) -> Result<SweepRow, CliError> {
    let mut step = cfg.clone();
    match cfg.sweep.axis {
        SweepAxis::P => step.p = param,
        SweepAxis::Alpha => step.alpha = param,
    }
    step.validate()?;
    let stage = spectrum_stage(&step, cache)?;
    let report = morse_report(&step, &stage.record)?;
    Ok(SweepRow {
        param,
        values: stage.record.edge_refined,
        total: report.total,
        general: report.bounds.map(|b| b.general),
        with_f3: report.bounds.and_then(|b| b.with_f3),
    })
}

/// Sweep CSV text: `param, nu_1 … nu_k, total, lower_general, lower_f3`.
pub fn sweep_csv(cfg: &RunConfig, cache: &Cache) -> Result<String, CliError> {
    let points = cfg.sweep.points();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    let rows: Vec<Result<SweepRow, CliError>> =
        pool.install(|| points.par_iter().map(|&x| sweep_step(cfg, cache, x)).collect());

    let axis = match cfg.sweep.axis {
        SweepAxis::P => "p",
        SweepAxis::Alpha => "alpha",
    };
    let mut out = String::from(axis);
    for i in 1..=cfg.k {
        out.push_str(&format!(",nu_{i}"));
    }
    out.push_str(",total,lower_general,lower_f3\n");
    let opt = |v: Option<u128>| v.map_or(String::new(), |x| x.to_string());
    for row in rows {
        let row = row?;
        let mut cells = vec![fmt_f64(row.param)];
        cells.extend((0..cfg.k).map(|i| row.values.get(i).map_or(String::new(), |v| fmt_f64(*v))));
        cells.push(row.total.to_string());
        cells.push(opt(row.general));
        cells.push(opt(row.with_f3));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn cmd_sweep(cfg: &RunConfig, cache: &Cache) -> Result<Vec<String>, CliError> {
    let csv = sweep_csv(cfg, cache)?;
    write_outputs(cfg, &[("sweep.csv", csv)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub index: usize,
    pub liouville: f64,
    pub liouville_error_bar: f64,
    pub oracle: f64,
    pub oracle_error_bar: f64,
    pub rel_diff: f64,
    /// `tolerance + 3 (bar_l + bar_o) / |ν|`.
    pub allowed: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub map: DimensionMap,
    pub n: usize,
    pub epsilon: f64,
    pub tolerance: f64,
    pub liouville_count: usize,
    pub oracle_count: usize,
    pub rows: Vec<OracleRow>,
    pub max_rel_diff: Option<f64>,
    pub agree: bool,
}

pub fn oracle_comparison(cfg: &RunConfig, cache: &Cache) -> Result<OracleComparison, CliError> {
    let stage = spectrum_stage(cfg, cache)?;
    let rec = &stage.record;
    let potential = if cfg.zero_potential {
        Potential::Zero
    } else {
        Potential::linearized(Arc::new(profile_stage(cfg, cache)?.emden))
    };
    let prob = WeightedSLProblem::new(rec.map.m, potential, WeightKind::Singular);
    let o = &cfg.oracle;
    let dense = dense_oracle_spectrum(&prob, o.n, o.epsilon).map_err(|e| match e {
        SpectralError::SizeGuard { .. } | SpectralError::InvalidInput(_) => CliError::Config(e.to_string()),
        e => solver(e),
    })?;
    let rows: Vec<OracleRow> = rec
        .singular
        .eigenvalues
        .iter()
        .zip(&dense.pairs)
        .enumerate()
        .map(|(i, (l, d))| {
            let scale = l.value.abs().max(f64::MIN_POSITIVE);
            let rel_diff = (l.value - d.value).abs() / scale;
            let allowed = o.tolerance + 3.0 * (l.error_bar + d.error_bar) / scale;
            OracleRow {
                index: i + 1,
                liouville: l.value,
                liouville_error_bar: l.error_bar,
                oracle: d.value,
                oracle_error_bar: d.error_bar,
                rel_diff,
                allowed,
                ok: rel_diff <= allowed,
            }
        })
        .collect();
    let liouville_count = rec.singular.eigenvalues.len();
    let oracle_count = dense.pairs.len();
    // a truncated request only fixes the first k oracle values
    let counts_ok = liouville_count == oracle_count || (liouville_count == cfg.k && oracle_count > cfg.k);
    Ok(OracleComparison {
        map: rec.map,
        n: o.n,
        epsilon: o.epsilon,
        tolerance: o.tolerance,
        liouville_count,
        oracle_count,
        max_rel_diff: rows.iter().map(|r| r.rel_diff).reduce(f64::max),
        agree: counts_ok && rows.iter().all(|r| r.ok),
        rows,
    })
}

pub fn cmd_oracle(cfg: &RunConfig, cache: &Cache) -> Result<Vec<String>, CliError> {
    let cmp = oracle_comparison(cfg, cache)?;
    let written = write_outputs(cfg, &[("oracle.json", json(&cmp))])?;
    if !cmp.agree {
        return Err(CliError::Mismatch(format!(
            "max relative difference {:?}, counts {}/{}",
            cmp.max_rel_diff, cmp.liouville_count, cmp.oracle_count
        )));
    }
    Ok(written)
}

fn write_outputs(cfg: &RunConfig, files: &[(&str, String)]) -> Result<Vec<String>, CliError> {
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = cfg.out.join(name);
        write_file(&path, contents)?;
        written.push(path.display().to_string());
    }
    Ok(written)
}
