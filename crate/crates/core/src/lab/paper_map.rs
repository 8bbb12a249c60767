//! Static map from operations and experiments to the results they exercise.

pub struct Entry {
    pub operation: &'static str,
    pub item: &'static str,
    pub experiment: &'static str,
    pub result: &'static str,
}

const fn e(operation: &'static str, item: &'static str, experiment: &'static str, result: &'static str) -> Entry {
    Entry { operation, item, experiment, result }
}

pub const ENTRIES: &[Entry] = &[
    e("children", "word::children", "build-tree", "defining tree words"),
    e("level", "word::level", "build-tree", "defining tree words"),
    e("interlace", "word::interlace", "shrink --dim 4", "Lemma 3.3 (interlace)"),
    e("make_round_core", "geom::polyline::make_round_core", "build-tree", "artifact plumbing"),
    e("tube_of", "geom::tube::tube_of", "build-tree", "Lemma 3.4 (tubular neighborhoods)"),
    e("bing_children", "geom::bing::bing_children", "build-tree", "Bing double, Lemma 3.2 steps"),
    e("linking_number", "geom::linking::linking_number", "build-tree", "clasp certificate"),
    e("meridian_intersections", "geom::meridian::meridian_intersections", "intersect", "Lemma 3.2 step tables"),
    e("diameter", "geom::diameter::diameter", "shrink", "Lemma 3.2 (3)"),
    e("interlaced_tube", "geom::interlaced::interlaced_tube", "shrink --dim 4", "Lemma 3.3 (neighborhood switch)"),
    e("plan_disks", "shrink::plan_disks", "shrink", "Lemma 3.2 step 0"),
    e("shrink_step", "shrink::shrink_step", "shrink", "Lemma 3.2 step k+1"),
    e("run_shrink", "shrink::run_shrink", "shrink", "Lemma 3.2"),
    e("run_bb_shrink", "shrink::run_bb_shrink", "shrink --dim 4", "Lemma 3.3"),
    e("iterate_shrink", "shrink::iterate_shrink", "shrink --targets", "Prop. 3.2"),
    e("build_complex", "semmes::build_complex", "metric-audit", "Semmes metric scaling"),
    e("distance", "semmes::SemmesComplex::distance", "metric-audit", "length metric"),
    e("measure", "semmes::SemmesComplex::measure", "metric-audit", "Lemma Ahlfors (measure)"),
    e("audit_regularity", "semmes::audit_regularity", "metric-audit", "Lemma Ahlfors"),
    e("audit_connectivity", "semmes::audit_connectivity", "metric-audit", "Lemma LLC (connectivity proxy)"),
    e("quasi_self_similarity_check", "semmes::quasi_self_similarity_check", "metric-audit", "Semmes quasi-similarity"),
    e("assemble_point_singularity", "semmes::assemble_point_singularity", "point-singularity", "one-point singular space"),
    e("is_admissible", "modulus::is_admissible", "modulus", "admissible functions"),
    e("modulus", "modulus::modulus", "modulus", "p-modulus"),
    e("product_family", "modulus::product_family", "modulus (product)", "Prop. 5.2"),
    e("lower_bound_holder", "modulus::lower_bound_holder", "modulus (product)", "Prop. 5.2 (Hölder bound)"),
    e("upper_bound_boxing", "modulus::upper_bound_boxing", "dichotomy", "Prop. 5.4"),
    e("core_family", "modulus::core_family", "modulus (core), dichotomy", "core tori families"),
    e("lp_oracle", "modulus::lp_oracle", "modulus --oracle force", "independent modulus oracle"),
    e("count_fiber_intersections", "intersect::count_fiber_intersections", "intersect", "fiber intersections"),
    e("essential_lower_bound_audit", "intersect::essential_lower_bound_audit", "intersect", "Cor. 4.2"),
    e("coarea_area_bound", "intersect::coarea_area_bound", "intersect", "Prop. 5.4 (co-area step)"),
    e("dichotomy_report", "intersect::dichotomy_report", "dichotomy", "Thm 6.1 (Prop. 5.2 vs Prop. 5.4)"),
    e("run", "lab::run", "all", "artifact plumbing"),
    e("paper_map_report", "lab::paper_map_report", "paper-map", "artifact plumbing"),
];

pub const OUT_OF_SCOPE: &[(&str, &str)] = &[
    ("Prop. 3.1", "unlinking diffeomorphism and re-embedding; only the metric consequences are modelled"),
    ("Lemmas 4.3-4.8", "homotopy and homology arguments; only integer intersection counts are computed"),
    ("Lemma 6.2", "quasisymmetric straightening"),
    ("Thm 1.1, Thm 6.1", "contradiction arguments; the two quantitative bounds are reproduced"),
    ("Lemma LLC", "contractibility; replaced by a connectivity proxy"),
    ("Prop. 3.2 limit", "the limit homeomorphism and the quotient map"),
    ("Loewner estimate", "quasiconformal to quasisymmetric upgrade"),
    ("n > 4", "geometry beyond word bookkeeping"),
];

pub fn paper_map_report() -> String {
    let mut s = String::from("# Paper map\n\n| operation | item | experiment | result |\n|---|---|---|---|\n");
    for x in ENTRIES {
        s.push_str(&format!("| {} | `{}` | {} | {} |\n", x.operation, x.item, x.experiment, x.result));
    }
    s.push_str("\n## Out of scope\n\n");
    for (r, why) in OUT_OF_SCOPE {
        s.push_str(&format!("- {r}: {why}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_operation_once() {
        let doc = paper_map_report();
        assert!(doc.contains("Prop. 5.2"));
        assert!(doc.contains("- Lemma 6.2: "));
        let mut names: Vec<&str> = ENTRIES.iter().map(|e| e.operation).collect();
        assert_eq!(names.len(), 35);
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), ENTRIES.len());
        for n in names {
            assert_eq!(doc.lines().filter(|l| l.starts_with(&format!("| {n} |"))).count(), 1, "{n}");
        }
    }
}
