use serde_json::{json, Map, Value};

use super::commands::{self as c, tagged, vec_str};
use super::{CliResult, Loaded, Outcome};
use crate::analysis::{
    detect_periods, lemma_bound_stats, rigidity_check, FlcVerdict, RigidityStatus,
};
use crate::numberfield::{is_pisot, is_totally_non_pisot, PisotStatus};
use crate::spectral::EigenvalueVerdict;

struct Blocks {
    blocks: Map<String, Value>,
    failed: Vec<String>,
}

impl Blocks {
    fn run(
        &mut self,
        name: &str,
        f: impl FnOnce() -> CliResult<(&'static str, Value)>,
    ) -> Option<Value> {
        match f() {
            Ok((method, data)) => {
                self.blocks.insert(
                    name.into(),
                    json!({ "status": "ok", "method": method, "data": data.clone() }),
                );
                Some(data)
            }
            Err(e) => {
                self.blocks.insert(
                    name.into(),
                    json!({ "status": "failed", "error": e.to_string() }),
                );
                self.failed.push(name.into());
                None
            }
        }
    }

    fn outcome(&mut self, name: &str, f: impl FnOnce() -> CliResult<Outcome>) -> Option<Value> {
        self.run(name, || f().map(|o| (o.method, o.data)))
    }
}

/// `(α1, 0)`-style description of the coordinates the passing α may charge.
fn family_pattern(verdicts: &[EigenvalueVerdict], dim: usize) -> Option<String> {
    let passing: Vec<&EigenvalueVerdict> = verdicts
        .iter()
        .filter(|v| v.status.passed() && v.period_ok && v.alpha.iter().any(|a| !a.is_zero()))
        .collect();
    if passing.is_empty() {
        return None;
    }
    let parts: Vec<String> = (0..dim)
        .map(|k| {
            if passing.iter().all(|v| v.alpha[k].is_zero()) {
                "0".into()
            } else {
                format!("α{}", k + 1)
            }
        })
        .collect();
    Some(format!("({})", parts.join(", ")))
}

/// Runs the analysis pipeline block by block; failures are recorded and the
/// remaining blocks still run.
pub fn report(l: &Loaded, all: bool) -> Outcome {
    let sys = &l.system;
    let mut b = Blocks {
        blocks: Map::new(),
        failed: Vec::new(),
    };
    let mut verdicts = Map::new();

    b.outcome("validate", || c::validate(l));
    if let Some(p) = b.outcome("pisot", || c::pisot(l)) {
        verdicts.insert(
            "pisot".into(),
            p["eigenvalues"].clone().as_array().map_or(json!([]), |es| {
                json!(es
                    .iter()
                    .map(|e| json!({ "approx": e["approx"], "pisot": e["pisot"] }))
                    .collect::<Vec<_>>())
            }),
        );
        verdicts.insert("pisot_family".into(), p["pisot_family"].clone());
        verdicts.insert("totally_non_pisot".into(), p["totally_non_pisot"].clone());
    }
    let flc = b.outcome("flc", || c::flc(l, None, None));
    let ilc = flc
        .as_ref()
        .is_some_and(|f| f["verdict"] == json!(FlcVerdict::IlcEvidence));
    if let Some(f) = &flc {
        verdicts.insert("flc".into(), f["verdict"].clone());
        verdicts.insert("meyer".into(), f["meyer"]["verdict"].clone());
    }

    let xi = c::return_set(l, None, None);
    let mut not_rigid = false;
    b.run("rigidity", || {
        let xi = xi
            .as_ref()
            .map_err(|e| super::CliError::Runtime(e.to_string()))?;
        let v = rigidity_check(sys, xi).map_err(super::CliError::runtime)?;
        not_rigid = matches!(v.status, RigidityStatus::NotRigid { .. });
        let data = c::rigidity_json(sys, xi, &v);
        verdicts.insert(
            "rigid".into(),
            json!(match &v.status {
                RigidityStatus::Rigid { .. } => "yes",
                RigidityStatus::NotRigid { .. } => "no",
                RigidityStatus::Inapplicable { .. } => "inapplicable",
            }),
        );
        verdicts.insert("rigidity".into(), data.clone());
        Ok(("exact", data))
    });

    let mut periods = Vec::new();
    b.run("periods", || {
        let scan = detect_periods(sys, c::RETURN_LEVEL, None).map_err(super::CliError::runtime)?;
        periods = scan.periods.clone();
        let list: Vec<String> = scan.periods.iter().map(|p| vec_str(sys, p)).collect();
        verdicts.insert("period_candidates".into(), json!(list));
        Ok((
            "exact",
            json!({
                "level": scan.level,
                "window": scan.window,
                "candidates_tested": scan.candidates_tested,
                "matched_tiles": scan.matched_tiles,
                "periods": list,
            }),
        ))
    });

    let mut tested: Vec<EigenvalueVerdict> = Vec::new();
    b.run("eigentest", || {
        let xi = xi
            .as_ref()
            .map_err(|e| super::CliError::Runtime(e.to_string()))?;
        tested = c::eigen_verdicts(l, &[], None, xi, &periods)?;
        let blocks = tested
            .iter()
            .map(|v| c::eigen_json(l, v))
            .collect::<CliResult<Vec<_>>>()?;
        Ok((
            "exact",
            json!({ "return_vectors": xi.len(), "candidates": blocks }),
        ))
    });
    verdicts.insert(
        "eigenvalue_family".into(),
        json!(family_pattern(&tested, sys.dim())),
    );

    let mut structural = Vec::new();
    if ilc {
        structural.push("ILC evidence");
    }
    if not_rigid {
        structural.push("non-rigidity");
    }
    if let Some(w) = b.run("weak_mixing", || {
        Ok(("exact", c::weak_mixing_json(l, &tested, &structural)?))
    }) {
        verdicts.insert("verdict".into(), w["verdict"].clone());
        verdicts.insert("warnings".into(), w["warnings"].clone());
    }

    if all {
        if let Some(p) = b.outcome("prototiles", || c::prototiles(l, None, None)) {
            verdicts.insert("prototile_volumes".into(), p["volumes"].clone());
        }
        if let Some(f) = b.outcome("freq", || c::freq(l, &[], None)) {
            verdicts.insert("tile_frequencies".into(), f["tile_frequencies"].clone());
        }
        if let Some(cy) = b.outcome("cylinders", || c::cylinders(l, None, None, None)) {
            verdicts.insert(
                "partition".into(),
                json!({
                    "total": tagged(&cy["partition"]["total"], "float"),
                    "pass": cy["partition"]["pass"],
                    "wiggle_bound_holds": cy["partition"]["wiggle_bound_holds"],
                }),
            );
        }
        if l.config.analysis.mixing_z.is_some() {
            if let Some(m) = b.outcome("mixing", || c::mixing(l, None, None, None)) {
                verdicts.insert(
                    "non_mixing".into(),
                    json!({ "z": m["z"], "k0": m["k0"], "delta": tagged(&m["delta"], "float"), "pass": m["pass"] }),
                );
            }
        }
    }

    if let Ok(set) = sys
        .q()
        .eigen_decl()
        .iter()
        .map(|(e, _)| Ok(e.clone()))
        .collect::<CliResult<Vec<_>>>()
    {
        if let Ok(tnp) = is_totally_non_pisot(&set) {
            verdicts.entry("totally_non_pisot").or_insert(json!(tnp));
        }
        let any_pisot = set
            .iter()
            .any(|e| is_pisot(e).is_ok_and(|r| r.status == PisotStatus::Pisot));
        verdicts.insert("any_pisot_eigenvalue".into(), json!(any_pisot));
    }

    Outcome::new(
        "report",
        "exact",
        json!({
            "all": all,
            "verdicts": verdicts,
            "blocks": b.blocks,
            "failed_blocks": b.failed,
            "lemma_bound": lemma_bound_stats(),
        }),
    )
}
