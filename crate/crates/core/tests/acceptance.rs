use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tilescope::analysis::{
    lemma_bound_stats, patch_frequency, return_vectors, tile_frequencies, TileGeometry,
};
use tilescope::catalog;
use tilescope::geometry::{prototile_volumes, rubber_metric, solve_adjoint_ifs, ColouredPoint};
use tilescope::numberfield::{BasisScalar, SymbolicVector};
use tilescope::spectral::{
    build_cylinders, eigenvalue_residues, eigenvalue_test, fixed_point_sample,
    mixing_overlap_bound, partition_check, separation_constant, EigenStatus, GridSpec,
};
use tilescope::substitution::{
    perron_frobenius, s_power, substitute, validate_system, Patch, SubstitutionSystem,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn alpha(sys: &SubstitutionSystem, coords: &[&str]) -> Vec<BasisScalar> {
    coords
        .iter()
        .map(|c| sys.basis().parse(c).unwrap())
        .collect()
}

fn report(system: &str) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_tilescope"))
        .args(["report", "--all", system, "--no-write"])
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "report exited with {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn pf_identity() -> Check {
    let mut worst: f64 = 0.0;
    for sys in catalog::all().map_err(|e| e.to_string())? {
        let v = validate_system(&sys).map_err(|e| e.to_string())?;
        ensure(
            v.pf_relative_error < 1e-8,
            format!("{}: relative error {}", sys.name(), v.pf_relative_error),
        )?;
        worst = worst.max(v.pf_relative_error);
    }
    let b = (1.0 + 13f64.sqrt()) / 2.0;
    let tau = (1.0 + 5f64.sqrt()) / 2.0;
    let fr = perron_frobenius(catalog::frank_robinson().unwrap().s_matrix()).value;
    let mk = perron_frobenius(catalog::kenyon_modified().unwrap().s_matrix()).value;
    ensure(
        (fr - (b + 3.0)).abs() < 1e-9,
        format!("Frank-Robinson PF {fr}"),
    )?;
    ensure(
        (mk - 3.0 * tau).abs() < 1e-9,
        format!("modified Kenyon PF {mk}"),
    )?;
    Ok(format!(
        "worst relative error {worst:.2e}, PF {fr:.7} and {mk:.7}"
    ))
}

fn volume_eigenvector() -> Check {
    let fr = catalog::frank_robinson().unwrap();
    let sol = solve_adjoint_ifs(&fr, 1.0 / 256.0, None).map_err(|e| e.to_string())?;
    let vols = prototile_volumes(&fr, Some(&sol.masks)).map_err(|e| e.to_string())?;
    let raster = vols.mask_volumes.ok_or("no raster volumes")?;
    let b = (1.0 + 13f64.sqrt()) / 2.0;
    let expect = [b * b, b, b, 1.0];
    let mut worst: f64 = 0.0;
    for (v, e) in raster.iter().zip(expect) {
        worst = worst.max((v / raster[3] / e - 1.0).abs());
    }
    ensure(worst < 0.03, format!("ratio error {worst}"))?;
    let ken = catalog::kenyon().unwrap();
    let h = 0.0234375;
    let sol = solve_adjoint_ifs(&ken, h, None).map_err(|e| e.to_string())?;
    let area = sol.masks[0].volume();
    ensure((area - 1.0).abs() < 0.05, format!("Kenyon area {area}"))?;
    Ok(format!(
        "worst ratio error {:.2}%, Kenyon area {area:.4}",
        worst * 100.0
    ))
}

fn counting_identity() -> Check {
    let mut checked = 0;
    for sys in catalog::all().map_err(|e| e.to_string())? {
        for k in 0..=5u32 {
            let sk = s_power(sys.s_matrix(), k);
            for j in 0..sys.kappa() {
                let p = substitute(&sys, &Patch::single(j, sys.zero_vector()), k as usize, None)
                    .map_err(|e| e.to_string())?;
                let counts = p.count_by_type(sys.kappa());
                for (i, &c) in counts.iter().enumerate() {
                    ensure(
                        c as u128 == sk[i][j],
                        format!("{} k={k} ({i},{j}): {c} vs {}", sys.name(), sk[i][j]),
                    )?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} entries match exactly"))
}

fn random_set(rng: &mut ChaCha8Rng) -> Vec<ColouredPoint> {
    if rng.gen_bool(0.5) {
        let n = rng.gen_range(1..12);
        (0..n)
            .map(|_| {
                (
                    rng.gen_range(0..2),
                    vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                )
            })
            .collect()
    } else {
        let jitter = rng.gen_range(0.0..0.2);
        let mut out = Vec::new();
        for x in -3i32..=3 {
            for y in -3..=3 {
                let p = vec![
                    x as f64 + rng.gen_range(-jitter..=jitter),
                    y as f64 + rng.gen_range(-jitter..=jitter),
                ];
                out.push(((x + y).rem_euclid(2) as usize, p));
            }
        }
        out
    }
}

fn metric_axioms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    let mut violations = 0;
    for _ in 0..10_000 {
        let (a, b, c) = (
            random_set(&mut rng),
            random_set(&mut rng),
            random_set(&mut rng),
        );
        let ab = rubber_metric(&a, &b).value;
        let ba = rubber_metric(&b, &a).value;
        let bc = rubber_metric(&b, &c).value;
        let ac = rubber_metric(&a, &c).value;
        if (ab - ba).abs() > 1e-9 || ac > ab + bc + 1e-9 {
            violations += 1;
        }
    }
    ensure(violations == 0, format!("{violations} violations"))?;
    Ok("10000 triples, zero violations".into())
}

fn cylinder_partition() -> Check {
    let mut notes = Vec::new();
    for (sys, level, frame) in [
        (catalog::fibonacci_1d().unwrap(), 8, None),
        (catalog::kenyon().unwrap(), 4, Some(8.0)),
    ] {
        let sample = fixed_point_sample(&sys, level).map_err(|e| e.to_string())?;
        let sep = separation_constant(&sample.points).map_err(|e| e.to_string())?;
        let grid = GridSpec::new(sys.dim(), 2.max(sep.m0), sep).map_err(|e| e.to_string())?;
        let set = build_cylinders(&sample, &grid, frame).map_err(|e| e.to_string())?;
        let bound = 2f64.powi(-(grid.m as i32 * sys.dim() as i32));
        let over = set
            .classes
            .iter()
            .filter(|c| c.wiggle.volume() > bound)
            .count();
        ensure(
            over == 0,
            format!("{}: {over} wiggle boxes exceed 2^(-md)", sys.name()),
        )?;
        let r = partition_check(&set, 0.05);
        ensure(
            (0.95..=1.0 + 1e-9).contains(&r.total),
            format!("{}: partition total {}", sys.name(), r.total),
        )?;
        notes.push(format!(
            "{} total {:.4} ({} classes)",
            sys.name(),
            r.total,
            set.classes.len()
        ));
    }
    Ok(notes.join(", "))
}

fn non_mixing_bound() -> Check {
    let sys = catalog::kenyon().unwrap();
    let geom = TileGeometry::compute(&sys).map_err(|e| e.to_string())?;
    let z = SymbolicVector::parse(sys.basis(), &["0", "1"]).map_err(|e| e.to_string())?;
    let b = mixing_overlap_bound(&sys, &geom, &z, 4, 3).map_err(|e| e.to_string())?;
    ensure(
        (b.delta - 1.0 / 36.0).abs() < 1e-6,
        format!("delta {}", b.delta),
    )?;
    let last = b.curve.last().ok_or("empty overlap curve")?;
    ensure(
        last.ratio > 2.0 * b.delta,
        format!("ratio {} at n={}", last.ratio, last.n),
    )?;
    Ok(format!(
        "delta {:.6}, ratio {:.4} at n={} (host level 4)",
        b.delta, last.ratio, last.n
    ))
}

fn eigenvalue_verdicts() -> Check {
    let mk = catalog::kenyon_modified().unwrap();
    let xi = return_vectors(&mk, 3, 2.0).map_err(|e| e.to_string())?;
    let a = alpha(&mk, &["tau - 1", "0"]);
    let seq = eigenvalue_residues(&mk, &a, &xi, 30).map_err(|e| e.to_string())?;
    ensure(
        seq.residues.len() == 30,
        format!("modified Kenyon stopped at {}", seq.residues.len()),
    )?;
    ensure(
        seq.residues.iter().all(|r| r.exact && r.value == 0.0),
        "modified Kenyon residues not all integer",
    )?;
    let v = eigenvalue_test(&mk, &a, &xi, 30, &[]).map_err(|e| e.to_string())?;
    ensure(
        matches!(v.status, EigenStatus::ExactPass { .. }),
        format!("modified Kenyon {:?}", v.status),
    )?;

    let ken = catalog::kenyon().unwrap();
    let xi = return_vectors(&ken, 1, 3.0).map_err(|e| e.to_string())?;
    let v = eigenvalue_test(&ken, &alpha(&ken, &["1/3", "0"]), &xi, 40, &[])
        .map_err(|e| e.to_string())?;
    ensure(
        v.status == EigenStatus::ExactPass { from: 1 },
        format!("Kenyon (1/3,0) {:?}", v.status),
    )?;
    let v = eigenvalue_test(&ken, &alpha(&ken, &["0", "0.37"]), &xi, 40, &[])
        .map_err(|e| e.to_string())?;
    ensure(
        matches!(v.status, EigenStatus::Fail { .. }),
        format!("Kenyon (0,0.37) {:?}", v.status),
    )?;
    let s = &v.sequence;
    ensure(
        s.precision_bits == 128,
        format!("precision {} bits", s.precision_bits),
    )?;
    ensure(
        s.residues.len() == 40,
        format!("(0,0.37) residues stop at {}", s.residues.len()),
    )?;
    let tail = s.residues[30..].iter().map(|r| r.value).fold(0.0, f64::max);
    ensure(
        tail > 0.05,
        format!("(0,0.37) residues decay: tail max {tail}"),
    )?;
    Ok(format!(
        "tau-1 exact on n<=30, (1/3,0) exact from n=1, (0,0.37) fails with tail max {tail:.3}"
    ))
}

fn str_of(v: &Value) -> String {
    v.as_str()
        .map(str::to_string)
        .unwrap_or_else(|| v.to_string())
}

fn frank_robinson_pipeline(lemma: &mut Vec<Value>) -> Check {
    let doc = report("frank_robinson");
    lemma.push(doc["result"]["lemma_bound"].clone());
    let v = &doc["result"]["verdicts"];
    ensure(
        doc["status"] == "ok",
        format!("failed blocks {}", doc["result"]["failed_blocks"]),
    )?;
    ensure(v["rigid"] == "yes", format!("rigid {}", v["rigid"]))?;
    let witness: Vec<String> = v["rigidity"]["detail"]["witness"]
        .as_array()
        .ok_or("no witness")?
        .iter()
        .map(str_of)
        .collect();
    ensure(
        witness == ["[1; 0]", "[0; 1]"],
        format!("witness {witness:?}"),
    )?;
    ensure(
        v["pisot"][0]["pisot"] == "NotPisot",
        format!("pisot {}", v["pisot"]),
    )?;
    ensure(v["totally_non_pisot"] == true, "not totally non-Pisot")?;
    ensure(
        v["verdict"] == "WEAKLY_MIXING",
        format!("verdict {}", v["verdict"]),
    )?;
    ensure(v["flc"] == "ILC_EVIDENCE", format!("flc {}", v["flc"]))?;
    Ok(format!("rigid with witness {witness:?}, b not Pisot, totally non-Pisot, WEAKLY_MIXING, ILC evidence"))
}

fn kenyon_pipeline(lemma: &mut Vec<Value>) -> Check {
    let doc = report("kenyon");
    lemma.push(doc["result"]["lemma_bound"].clone());
    let v = &doc["result"]["verdicts"];
    ensure(
        doc["status"] == "ok",
        format!("failed blocks {}", doc["result"]["failed_blocks"]),
    )?;
    ensure(v["rigid"] == "no", format!("rigid {}", v["rigid"]))?;
    let (qdim, bound) = (&v["rigidity"]["qdim"]["value"], &v["rigidity"]["bound"]);
    ensure(
        qdim == 3 && bound == 2,
        format!("qdim {qdim} bound {bound}"),
    )?;
    let periods: Vec<String> = v["period_candidates"]
        .as_array()
        .ok_or("no periods")?
        .iter()
        .map(str_of)
        .collect();
    ensure(
        periods.iter().any(|p| p == "[0; 1]"),
        format!("periods {periods:?}"),
    )?;
    ensure(
        v["verdict"] == "NOT_WEAKLY_MIXING",
        format!("verdict {}", v["verdict"]),
    )?;
    ensure(
        v["eigenvalue_family"] == "(α1, 0)",
        format!("family {}", v["eigenvalue_family"]),
    )?;
    Ok("not rigid (qdim 3 > 2), period (0,1), NOT_WEAKLY_MIXING, eigenvalues (α1, 0)".into())
}

fn frequency_normalization() -> Check {
    let sys = catalog::fibonacci_1d().unwrap();
    let geom = TileGeometry::compute(&sys).map_err(|e| e.to_string())?;
    let tf = tile_frequencies(&sys, &geom).map_err(|e| e.to_string())?;
    ensure(
        (tf.normalization - 1.0).abs() < 1e-6,
        format!("normalization {}", tf.normalization),
    )?;
    let tau = (1.0 + 5f64.sqrt()) / 2.0;
    let expect = [tau / (tau + 2.0), 1.0 / (tau + 2.0)];
    let mut worst: f64 = 0.0;
    for (ty, e) in expect.iter().enumerate() {
        let entry = patch_frequency(
            &sys,
            &geom,
            &Patch::single(ty, sys.zero_vector()),
            8,
            "tile",
        )
        .map_err(|e| e.to_string())?;
        worst = worst.max((entry.value - e).abs());
        ensure(
            (entry.value - e).abs() < 1e-3,
            format!("type {}: {} vs {e}", ty + 1, entry.value),
        )?;
        ensure(
            (tf.frequencies[ty] - e).abs() < 1e-3,
            format!("PF frequency {}", tf.frequencies[ty]),
        )?;
    }
    Ok(format!(
        "level-8 curve error {worst:.1e}, normalization {:.9}",
        tf.normalization
    ))
}

fn counting_bound(lemma: &[Value]) -> Check {
    let local = lemma_bound_stats();
    let mut checks = local.checks;
    let mut violations = local.violations;
    let mut worst = local.worst_ratio;
    for l in lemma {
        checks += l["checks"].as_u64().unwrap_or(0);
        violations += l["violations"].as_u64().unwrap_or(0);
        worst = worst.max(l["worst_ratio"].as_f64().unwrap_or(0.0));
    }
    ensure(checks > 0, "no counts were performed")?;
    ensure(
        violations == 0,
        format!("{violations} violations out of {checks}"),
    )?;
    Ok(format!(
        "{checks} counts, zero violations, worst ratio {worst:.4}"
    ))
}

/// Writes straight to stdout so the lines survive libtest output capture.
fn say(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn run(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e
            .downcast_ref::<String>()
            .cloned()
            .or(e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default())
    });
    let elapsed = start.elapsed();
    let (pass, detail) = match outcome {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over budget {budget:?}")),
        Err(e) => (false, e),
    };
    say(format!(
        "criterion {id:>2} {} [{name}] {:.2}s: {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    ));
    pass
}

#[test]
fn acceptance_criteria() {
    let mut lemma = Vec::new();
    let secs = Duration::from_secs;
    let results = [
        run(1, "PF identity", secs(1), pf_identity),
        run(2, "volume eigenvector", secs(30), volume_eigenvector),
        run(3, "counting identity", secs(10), counting_identity),
        run(4, "metric axioms", secs(30), metric_axioms),
        run(
            5,
            "cylinder bound and partition",
            secs(60),
            cylinder_partition,
        ),
        run(6, "non-mixing overlap bound", secs(60), non_mixing_bound),
        run(7, "eigenvalue verdicts", secs(10), eigenvalue_verdicts),
        run(8, "Frank-Robinson pipeline", secs(120), || {
            frank_robinson_pipeline(&mut lemma)
        }),
        run(9, "Kenyon pipeline", secs(120), || {
            kenyon_pipeline(&mut lemma)
        }),
        run(
            10,
            "frequency normalization",
            secs(10),
            frequency_normalization,
        ),
        run(11, "counting bound", secs(1), || counting_bound(&lemma)),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, p)| !**p)
        .map(|(i, _)| i + 1)
        .collect();
    say(format!(
        "acceptance: {} of {} criteria pass",
        results.len() - failed.len(),
        results.len()
    ));
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
