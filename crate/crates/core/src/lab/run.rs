use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, ExperimentKind, FamilySource, ModulusConfig};
use crate::error::{Error, Result};
use crate::intersect::{dichotomy_report, essential_lower_bound_audit, DichotomyOptions};
use crate::modulus::{
    annulus_base, conformal_exponent, core_family, lower_bound_holder, modulus, product_family, ModulusOptions, ProductGrid, Surface, SurfaceFamily,
};
use crate::semmes::{
    assemble_point_singularity, audit_connectivity, audit_regularity, build_complex_with, full_words, quasi_self_similarity_check, ComplexOptions, ModelParams,
    SemmesComplex,
};
use crate::shrink::{iterate_shrink, run_bb_shrink, run_shrink, ShrinkOptions};
use crate::tree::{canonical_root, canonical_tree, TreeOptions};
use crate::word::Word;

pub const MANIFEST: &str = "MANIFEST";

/// Files written by one run, by name, with their sha256 digests.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunOutput {
    pub out: PathBuf,
    pub files: BTreeMap<String, String>,
    pub summary: serde_json::Value,
}

struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    fn text(&mut self, name: &str, s: String) {
        self.files.insert(name.into(), s.into_bytes());
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.text(name, s);
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs one experiment and writes its artifacts plus a manifest of content hashes.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::ConfigInvalid { field: "threads".into(), message: e.to_string() })?;
    let mut a = Artifacts { files: BTreeMap::new() };
    let summary = pool.install(|| dispatch(cfg, &mut a))?;
    // the output directory and thread count do not change any result
    let recorded = ExperimentConfig { out: PathBuf::new(), threads: None, ..cfg.clone() };
    a.json("config.json", &recorded)?;
    a.json("summary.json", &summary)?;
    write_artifacts(&cfg.out, &a.files)?;
    let files = a.files.iter().map(|(k, v)| (k.clone(), sha256_hex(v))).collect();
    Ok(RunOutput { out: cfg.out.clone(), files, summary })
}

fn write_artifacts(out: &Path, files: &BTreeMap<String, Vec<u8>>) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let mut manifest = String::new();
    for (name, bytes) in files {
        std::fs::write(out.join(name), bytes)?;
        manifest.push_str(&format!("{}  {}\n", sha256_hex(bytes), name));
    }
    std::fs::write(out.join(MANIFEST), manifest)?;
    Ok(())
}

/// Rehashes every file listed in the manifest; returns the names that differ.
pub fn verify_manifest(out: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(out.join(MANIFEST))?;
    let mut bad = Vec::new();
    for line in text.lines() {
        let (hash, name) = line.split_once("  ").ok_or_else(|| Error::ConfigInvalid { field: MANIFEST.into(), message: line.into() })?;
        let ok = std::fs::read(out.join(name)).map(|b| sha256_hex(&b) == hash).unwrap_or(false);
        if !ok {
            bad.push(name.to_string());
        }
    }
    Ok(bad)
}

fn dispatch(cfg: &ExperimentConfig, a: &mut Artifacts) -> Result<serde_json::Value> {
    match cfg.kind {
        ExperimentKind::BuildTree => build_tree(cfg, a),
        ExperimentKind::Shrink => shrink(cfg, a),
        ExperimentKind::MetricAudit => metric_audit(cfg, a),
        ExperimentKind::Modulus => run_modulus(cfg, a),
        ExperimentKind::Intersect => intersect(cfg, a),
        ExperimentKind::Dichotomy => dichotomy(cfg, a),
        ExperimentKind::PointSingularity => point_singularity(cfg, a),
    }
}

fn build_tree(cfg: &ExperimentConfig, a: &mut Artifacts) -> Result<serde_json::Value> {
    let t = canonical_tree(cfg.depth_or(3), &TreeOptions { unlink: None, seed: cfg.seed })?;
    a.json("tree.json", &t.scene())?;
    a.json("certificates.json", &t.certificates)?;
    a.text("tree.obj", t.to_obj(cfg.obj_angular));
    Ok(json!({"depth": t.depth, "tubes": t.tubes.len(), "certificates_hold": t.all_certificates_hold()}))
}

fn shrink(cfg: &ExperimentConfig, a: &mut Artifacts) -> Result<serde_json::Value> {
    let (root, _) = canonical_root()?;
    let leaf_cap = cfg.depth_cap.map_or(crate::shrink::DEFAULT_LEAF_CAP, |d| 1usize << d);
    let opts = ShrinkOptions { seed: cfg.seed, leaf_cap };
    if cfg.dimension == 4 {
        let c = run_bb_shrink(&root, &root, cfg.epsilon.unwrap_or(1.0), cfg.delta0, &opts)?;
        a.json("certificate.json", &c)?;
        return Ok(json!({"m": c.m, "distortion_product": c.distortion_product, "max_bound": c.max_bound, "holds": c.holds()}));
    }
    if !cfg.targets.is_empty() {
        let stages = iterate_shrink(&root, &cfg.targets, &opts)?;
        a.json("stages.json", &stages)?;
        return Ok(json!({"depths": stages.iter().map(|s| s.depth).collect::<Vec<_>>(), "holds": stages.iter().all(|s| s.holds())}));
    }
    let eps = cfg.epsilon.unwrap_or(root.diameter_estimate() / 10.0);
    let c = run_shrink(&root, eps, &opts)?;
    a.json("certificate.json", &c)?;
    a.text("leaves.obj", crate::geom::tube::tubes_to_obj(c.leaves.iter().map(|(w, t)| (w.to_string(), t)), cfg.obj_angular));
    Ok(json!({"m": c.m, "epsilon": c.epsilon, "max_final_diameter": c.max_final_diameter(), "holds": c.holds()}))
}

fn full_complex(cfg: &ExperimentConfig, depth: usize) -> Result<SemmesComplex> {
    build_complex_with(full_words(depth)?, cfg.lambda, ModelParams::default(), cfg.mesh_scale, cfg.dimension, &ComplexOptions::default())
}

fn metric_audit(cfg: &ExperimentConfig, a: &mut Artifacts) -> Result<serde_json::Value> {
    let c = full_complex(cfg, cfg.depth_or(4))?;
    let samples = cfg.samples.unwrap_or(1000);
    let reg = audit_regularity(&c, samples, cfg.seed);
    let con = audit_connectivity(&c, samples, cfg.seed);
    a.text("regularity.csv", reg.to_csv());
    let mut s = String::from("center_id,radius,pair_a,pair_b,factor\n");
    for x in &con.samples {
        s.push_str(&format!("{},{:.17e},{},{},{:.17e}\n", x.center, x.radius, x.pair.0, x.pair.1, x.factor));
    }
    a.text("connectivity.csv", s);
    let sim = if c.depth() >= 1 { quasi_self_similarity_check(&c, &"1".parse()?, 100, cfg.seed) } else { None };
    if cfg.dump_complex {
        a.json("complex.json", &c.to_json())?;
    }
    Ok(json!({
        "cells": c.cell_count(),
        "depth": c.depth(),
        "level_growth": reg.level_growth,
        "divergent": reg.divergent,
        "ratio_min": reg.ratio_min,
        "ratio_max": reg.ratio_max,
        "spread": reg.spread(),
        "connectivity_worst": con.worst,
        "disconnected": con.disconnected(),
        "similarity_distortion": sim.map(|s| s.distortion),
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    members: Vec<Surface>,
    #[serde(default)]
    volumes: Option<Vec<f64>>,
}

fn load_family(path: &Path, complex: Option<&Path>) -> Result<SurfaceFamily> {
    let f: FamilyFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let volumes = match (complex, f.volumes) {
        (Some(c), _) => {
            let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(c)?)?;
            let cells = v["cells"].as_array().ok_or_else(|| Error::ConfigInvalid { field: "complex".into(), message: "no cells array".into() })?;
            cells
                .iter()
                .map(|c| c["volume"].as_f64())
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::ConfigInvalid { field: "complex".into(), message: "cell without a numeric volume".into() })?
        }
        (None, Some(v)) => v,
        (None, None) => return Err(Error::ConfigInvalid { field: "family".into(), message: "needs volumes or a complex".into() }),
    };
    SurfaceFamily::new(f.members, volumes)
}

fn run_modulus(cfg: &ExperimentConfig, a: &mut Artifacts) -> Result<serde_json::Value> {
    let m: &ModulusConfig = cfg.modulus.as_ref().expect("validated");
    let n = cfg.dimension;
    let p = m.p.unwrap_or(conformal_exponent(n));
    let mut extra = json!({});
    let fam = match &m.family {
        FamilySource::Product { base_res, fiber_res } => {
            let grid = ProductGrid { n, base: annulus_base(*base_res, 0.5, 1.0), fiber_res: *fiber_res };
            let area = std::f64::consts::PI * 0.75;
            extra = json!({"holder_lower_bound": lower_bound_holder(area, grid.fiber_measure(), n), "base_cells": grid.base.len()});
            product_family(&grid)?
        }
        FamilySource::Core { word, depth } => {
            let c = full_complex(cfg, *depth)?;
            let w: Word = word.parse()?;
            core_family(&c, &w, cfg.samples.unwrap_or(usize::MAX), cfg.seed)?.family
        }
        FamilySource::File { path, complex } => load_family(path, complex.as_deref())?,
    };
    let r = modulus(&fam, p, &ModulusOptions { tol: m.tol, max_iter: m.max_iter, oracle: m.oracle })?;
    let result = json!({
        "p": r.p,
        "value": r.value,
        "lower_bound": r.lower_bound,
        "slack": r.admissibility_slack,
        "iterations": r.iterations,
        "oracle_gap": r.oracle_gap,
        "members": fam.len(),
        "cells": fam.cell_count(),
        "bounds": extra,
    });
    a.json("result.json", &result)?;
    if m.dump_density {
        let mut s = String::from("cell,rho\n");
        for (i, v) in r.density.iter().enumerate() {
            s.push_str(&format!("{i},{v:.17e}\n"));
        }
        a.text("density.csv", s);
    }
    Ok(result)
}

fn intersect(cfg: &ExperimentConfig, a: &mut Artifacts) -> Result<serde_json::Value> {
    let k = cfg.depth_or(6);
    let t = canonical_tree(k, &TreeOptions { unlink: None, seed: cfg.seed })?;
    let r = essential_lower_bound_audit(&t, k, cfg.samples.unwrap_or(50), cfg.seed)?;
    a.json("report.json", &r)?;
    Ok(json!({
        "delta": r.delta,
        "min_counts": r.levels.iter().map(|l| l.min_count).collect::<Vec<_>>(),
        "violations": r.violations.len(),
        "passed": r.passed(),
    }))
}

fn dichotomy(cfg: &ExperimentConfig, a: &mut Artifacts) -> Result<serde_json::Value> {
    let r = dichotomy_report(&DichotomyOptions {
        lambda: cfg.lambda,
        n: cfg.dimension,
        k_max: cfg.depth_or(4),
        mesh_scale: cfg.mesh_scale,
        samples: cfg.samples.unwrap_or(usize::MAX),
        seed: cfg.seed,
    })?;
    a.text("table.csv", r.to_csv());
    Ok(json!({
        "rows": r.rows.len(),
        "intrinsic_factor": r.intrinsic_factor(),
        "euclid_strictly_decreasing": r.euclid_strictly_decreasing(),
        "crossing": r.crossing(),
    }))
}

fn point_singularity(cfg: &ExperimentConfig, a: &mut Artifacts) -> Result<serde_json::Value> {
    let k = cfg.depth_or(3);
    let c = assemble_point_singularity(k, cfg.lambda, cfg.dimension, cfg.mesh_scale, cfg.ambient_pitch)?;
    let reg = audit_regularity(&c, cfg.samples.unwrap_or(300), cfg.seed);
    a.json("complex.json", &c.to_json())?;
    a.text("regularity.csv", reg.to_csv());
    let mut sampled_trees: Vec<usize> = reg.samples.iter().filter_map(|s| c.copy_of(s.center).map(|k| k.tree)).collect();
    sampled_trees.sort_unstable();
    sampled_trees.dedup();
    Ok(json!({
        "trees": k,
        "cells": c.cell_count(),
        "tree_measures": (0..k).map(|t| c.tree_measure(t)).collect::<Vec<_>>(),
        "sampled_trees": sampled_trees,
        "ratio_min": reg.ratio_min,
        "ratio_max": reg.ratio_max,
    }))
}
