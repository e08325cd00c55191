//! Scene files: the JSON input of the command-line driver. Parsing is
//! strict — unknown keys and malformed entries are reported with their
//! JSON pointer — and every default is materialized so the echo in a
//! report re-parses to the same scene.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::blowup::{reduce_center, Center, EPoint};
use crate::error::{Error, Result};
use crate::groebner::Budget;
use crate::ideal::Ideal;
use crate::mpoly::MPoly;
use crate::parse::{canonical, parse_poly, VarTable};
use crate::rat::{parse_rat, rat_str, Rat};

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub ambient: usize,
    pub generators: Vec<MPoly>,
    pub others: Option<Vec<MPoly>>,
    pub avoid: Option<Vec<MPoly>>,
    pub base: Vec<Rat>,
    pub direction: Vec<Rat>,
    pub chart_index: Option<usize>,
    pub map: Option<Vec<MPoly>>,
    pub seed: u64,
    pub retries: u32,
    pub budget: Budget,
}

fn scene_err(pointer: &str, msg: impl Into<String>) -> Error {
    Error::Scene {
        pointer: pointer.into(),
        msg: msg.into(),
    }
}

fn as_object<'a>(v: &'a Value, pointer: &str) -> Result<&'a serde_json::Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| scene_err(pointer, "expected an object"))
}

fn check_keys(
    obj: &serde_json::Map<String, Value>,
    allowed: &[&str],
    pointer: &str,
) -> Result<()> {
    for k in obj.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(scene_err(
                &format!("{pointer}/{k}"),
                "unknown key".to_string(),
            ));
        }
    }
    Ok(())
}

fn get_usize(obj: &serde_json::Map<String, Value>, key: &str, pointer: &str) -> Result<usize> {
    let v = obj
        .get(key)
        .ok_or_else(|| scene_err(pointer, "missing required key"))?;
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| scene_err(pointer, "expected a nonnegative integer"))
}

fn parse_poly_list(
    v: &Value,
    table: &VarTable,
    pointer: &str,
    allow_empty: bool,
) -> Result<Vec<MPoly>> {
    let arr = v
        .as_array()
        .ok_or_else(|| scene_err(pointer, "expected an array of polynomial strings"))?;
    if arr.is_empty() && !allow_empty {
        return Err(scene_err(pointer, "must not be empty"));
    }
    let mut out = Vec::with_capacity(arr.len());
    for (i, item) in arr.iter().enumerate() {
        let here = format!("{pointer}/{i}");
        let s = item
            .as_str()
            .ok_or_else(|| scene_err(&here, "expected a polynomial string"))?;
        let p = parse_poly(s, table).map_err(|e| scene_err(&here, e.to_string()))?;
        out.push(p);
    }
    Ok(out)
}

fn parse_rat_entry(v: &Value, pointer: &str) -> Result<Rat> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(crate::rat::rat(i))
            } else {
                Err(scene_err(
                    pointer,
                    "numbers must be integers; write rationals as \"p/q\" strings",
                ))
            }
        }
        Value::String(s) => parse_rat(s).map_err(|e| scene_err(pointer, e.to_string())),
        _ => Err(scene_err(pointer, "expected an integer or a \"p/q\" string")),
    }
}

fn parse_rat_vec(v: &Value, len: usize, pointer: &str) -> Result<Vec<Rat>> {
    let arr = v
        .as_array()
        .ok_or_else(|| scene_err(pointer, "expected an array"))?;
    if arr.len() != len {
        return Err(scene_err(
            pointer,
            format!("expected {len} entries, found {}", arr.len()),
        ));
    }
    arr.iter()
        .enumerate()
        .map(|(i, item)| parse_rat_entry(item, &format!("{pointer}/{i}")))
        .collect()
}

pub fn scene_from_value(v: &Value) -> Result<Scene> {
    let top = as_object(v, "")?;
    check_keys(
        top,
        &[
            "ambient",
            "center",
            "point",
            "seed",
            "retries",
            "budgets",
            "chart_index",
            "map",
        ],
        "",
    )?;
    let ambient = get_usize(top, "ambient", "/ambient")?;
    if ambient == 0 {
        return Err(scene_err("/ambient", "must be at least 1"));
    }
    let table = VarTable::ambient(ambient);

    let mut budget = Budget::default();
    if let Some(bv) = top.get("budgets") {
        let bo = as_object(bv, "/budgets")?;
        check_keys(bo, &["groebner_steps", "max_degree"], "/budgets")?;
        if bo.contains_key("groebner_steps") {
            budget.groebner_steps =
                get_usize(bo, "groebner_steps", "/budgets/groebner_steps")? as u64;
        }
        if bo.contains_key("max_degree") {
            budget.max_degree = get_usize(bo, "max_degree", "/budgets/max_degree")? as u32;
        }
    }

    let cv = top
        .get("center")
        .ok_or_else(|| scene_err("/center", "missing required key"))?;
    let co = as_object(cv, "/center")?;
    check_keys(co, &["generators", "component0", "others", "avoid"], "/center")?;
    let generators = parse_poly_list(
        co.get("generators")
            .ok_or_else(|| scene_err("/center/generators", "missing required key"))?,
        &table,
        "/center/generators",
        false,
    )?;
    if let Some(c0) = co.get("component0") {
        let comp = parse_poly_list(c0, &table, "/center/component0", false)?;
        if comp != generators {
            return Err(scene_err(
                "/center/component0",
                "must define the same generators as /center/generators",
            ));
        }
    }
    let others = match co.get("others") {
        None => None,
        Some(ov) => {
            let gens = parse_poly_list(ov, &table, "/center/others", true)?;
            if gens.is_empty() {
                None
            } else {
                Some(gens)
            }
        }
    };
    let avoid = match co.get("avoid") {
        None => None,
        Some(av) => {
            let gens = parse_poly_list(av, &table, "/center/avoid", true)?;
            if gens.is_empty() {
                None
            } else {
                let ideal = Ideal::new(ambient, gens.clone());
                let dim = ideal
                    .dimension(&budget)
                    .map_err(|e| scene_err("/center/avoid", e.to_string()))?;
                if dim > ambient as i64 - 2 {
                    return Err(scene_err(
                        "/center/avoid",
                        "avoid set must have codimension >= 2",
                    ));
                }
                Some(gens)
            }
        }
    };

    let pv = top
        .get("point")
        .ok_or_else(|| scene_err("/point", "missing required key"))?;
    let po = as_object(pv, "/point")?;
    check_keys(po, &["base", "direction"], "/point")?;
    let base = parse_rat_vec(
        po.get("base")
            .ok_or_else(|| scene_err("/point/base", "missing required key"))?,
        ambient,
        "/point/base",
    )?;
    let direction = parse_rat_vec(
        po.get("direction")
            .ok_or_else(|| scene_err("/point/direction", "missing required key"))?,
        ambient,
        "/point/direction",
    )?;
    if direction.iter().all(|c| c.is_zero()) {
        return Err(scene_err("/point/direction", "must be nonzero"));
    }
    // validate against the reduced center: a common factor changes neither
    // the blow-up nor the tangency question
    let reduced = reduce_center(&generators)
        .map_err(|e| scene_err("/center/generators", e.to_string()))?;
    if reduced.iter().all(|g| g.eval(&base).is_zero()) {
        let tangent = reduced.iter().all(|g| {
            g.gradient_at(&base)
                .iter()
                .zip(&direction)
                .fold(Rat::zero(), |acc, (gr, d)| acc + gr * d)
                .is_zero()
        });
        if tangent {
            return Err(scene_err(
                "/point/direction",
                "direction is tangent to the center at the base point",
            ));
        }
    }

    let seed = match top.get("seed") {
        None => 0,
        Some(sv) => sv
            .as_u64()
            .ok_or_else(|| scene_err("/seed", "expected a nonnegative integer"))?,
    };
    let retries = match top.get("retries") {
        None => 5,
        Some(rv) => {
            let r = rv
                .as_u64()
                .ok_or_else(|| scene_err("/retries", "expected a nonnegative integer"))?;
            if r == 0 || r > 10_000 {
                return Err(scene_err("/retries", "must be between 1 and 10000"));
            }
            r as u32
        }
    };
    let chart_index = match top.get("chart_index") {
        None => None,
        Some(cv) => {
            let j = cv
                .as_u64()
                .ok_or_else(|| scene_err("/chart_index", "expected a positive integer"))?;
            if j == 0 || j as usize > generators.len() {
                return Err(scene_err(
                    "/chart_index",
                    format!("must be between 1 and {}", generators.len()),
                ));
            }
            Some(j as usize)
        }
    };
    let map = match top.get("map") {
        None => None,
        Some(mv) => {
            let polys = parse_poly_list(mv, &table, "/map", false)?;
            if polys.len() != ambient {
                return Err(scene_err(
                    "/map",
                    format!("expected {ambient} components, found {}", polys.len()),
                ));
            }
            Some(polys)
        }
    };
    Ok(Scene {
        ambient,
        generators,
        others,
        avoid,
        base,
        direction,
        chart_index,
        map,
        seed,
        retries,
        budget,
    })
}

pub fn scene_from_str(s: &str) -> Result<Scene> {
    let v: Value = serde_json::from_str(s)?;
    scene_from_value(&v)
}

pub fn parse_scene(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path)?;
    scene_from_str(&text)
}

impl Scene {
    pub fn table(&self) -> VarTable {
        VarTable::ambient(self.ambient)
    }

    pub fn center(&self) -> Result<Center> {
        let mut c = Center::new(self.ambient, self.generators.clone())?;
        if let Some(gs) = &self.others {
            c.others = Some(Ideal::new(self.ambient, gs.clone()));
        }
        if let Some(gs) = &self.avoid {
            c.avoid = Some(Ideal::new(self.ambient, gs.clone()));
        }
        Ok(c)
    }

    pub fn epoint(&self) -> EPoint {
        EPoint::new(self.base.clone(), self.direction.clone())
    }

    /// The scene with every default spelled out, in canonical strings;
    /// re-parsing the echo yields this scene back.
    pub fn echo(&self) -> Value {
        let table = self.table();
        let polys = |gs: &[MPoly]| -> Value {
            Value::Array(gs.iter().map(|g| json!(canonical(g, &table))).collect())
        };
        let rats = |rs: &[Rat]| -> Value {
            Value::Array(rs.iter().map(|r| json!(rat_str(r))).collect())
        };
        let mut center = BTreeMap::new();
        center.insert("generators".to_string(), polys(&self.generators));
        if let Some(gs) = &self.others {
            center.insert("others".to_string(), polys(gs));
        }
        if let Some(gs) = &self.avoid {
            center.insert("avoid".to_string(), polys(gs));
        }
        let mut top = BTreeMap::new();
        top.insert("ambient".to_string(), json!(self.ambient));
        top.insert("center".to_string(), to_value(center));
        top.insert(
            "point".to_string(),
            to_value(BTreeMap::from([
                ("base".to_string(), rats(&self.base)),
                ("direction".to_string(), rats(&self.direction)),
            ])),
        );
        top.insert("seed".to_string(), json!(self.seed));
        top.insert("retries".to_string(), json!(self.retries));
        top.insert(
            "budgets".to_string(),
            to_value(BTreeMap::from([
                (
                    "groebner_steps".to_string(),
                    json!(self.budget.groebner_steps),
                ),
                ("max_degree".to_string(), json!(self.budget.max_degree)),
            ])),
        );
        if let Some(j) = self.chart_index {
            top.insert("chart_index".to_string(), json!(j));
        }
        if let Some(m) = &self.map {
            top.insert("map".to_string(), polys(m));
        }
        to_value(top)
    }
}

fn to_value(map: BTreeMap<String, Value>) -> Value {
    Value::Object(map.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{
            "ambient": 2,
            "center": {"generators": ["x1", "x2"]},
            "point": {"base": [0, 0], "direction": [1, 1]}
        }"#
    }

    #[test]
    fn defaults_are_materialized() {
        let s = scene_from_str(minimal()).unwrap();
        assert_eq!(s.seed, 0);
        assert_eq!(s.retries, 5);
        assert_eq!(s.budget.groebner_steps, Budget::default().groebner_steps);
        assert!(s.chart_index.is_none());
    }

    #[test]
    fn echo_round_trips() {
        let s = scene_from_str(minimal()).unwrap();
        let echoed = scene_from_value(&s.echo()).unwrap();
        assert_eq!(s, echoed);
    }

    #[test]
    fn echo_round_trips_with_all_options() {
        let text = r#"{
            "ambient": 3,
            "center": {"generators": ["x2 - x1^2", "x3"], "avoid": ["x1 - 5", "x2 - 5"]},
            "point": {"base": ["1", "1", 0], "direction": [1, "1/2", 0]},
            "seed": 9,
            "retries": 7,
            "chart_index": 2,
            "map": ["x1", "x2", "x3"],
            "budgets": {"groebner_steps": 100000, "max_degree": 40}
        }"#;
        let s = scene_from_str(text).unwrap();
        let echoed = scene_from_value(&s.echo()).unwrap();
        assert_eq!(s, echoed);
    }

    #[test]
    fn unknown_keys_are_rejected_with_pointer() {
        let text = r#"{
            "ambient": 2,
            "center": {"generators": ["x1", "x2"]},
            "point": {"base": [0, 0], "direction": [1, 1]},
            "extra": 1
        }"#;
        match scene_from_str(text) {
            Err(Error::Scene { pointer, .. }) => assert_eq!(pointer, "/extra"),
            other => panic!("expected scene error, got {other:?}"),
        }
    }

    #[test]
    fn bad_polynomial_points_at_the_entry() {
        let text = r#"{
            "ambient": 2,
            "center": {"generators": ["x1", "x9"]},
            "point": {"base": [0, 0], "direction": [1, 1]}
        }"#;
        match scene_from_str(text) {
            Err(Error::Scene { pointer, .. }) => {
                assert_eq!(pointer, "/center/generators/1")
            }
            other => panic!("expected scene error, got {other:?}"),
        }
    }

    #[test]
    fn hypersurface_avoid_set_is_rejected() {
        let text = r#"{
            "ambient": 2,
            "center": {"generators": ["x1", "x2"]},
            "point": {"base": [0, 0], "direction": [1, 1]},
            "budgets": {}
        }"#;
        let mut v: Value = serde_json::from_str(text).unwrap();
        v["center"]["avoid"] = json!(["x1 - 5"]);
        match scene_from_value(&v) {
            Err(Error::Scene { pointer, msg }) => {
                assert_eq!(pointer, "/center/avoid");
                assert!(msg.contains("codimension"));
            }
            other => panic!("expected scene error, got {other:?}"),
        }
        // a point has codimension 2: accepted
        v["center"]["avoid"] = json!(["x1 - 5", "x2 - 5"]);
        assert!(scene_from_value(&v).is_ok());
    }

    #[test]
    fn tangent_direction_is_rejected() {
        let text = r#"{
            "ambient": 3,
            "center": {"generators": ["x1", "x2"]},
            "point": {"base": [0, 0, 0], "direction": [0, 0, 1]}
        }"#;
        match scene_from_str(text) {
            Err(Error::Scene { pointer, .. }) => assert_eq!(pointer, "/point/direction"),
            other => panic!("expected scene error, got {other:?}"),
        }
    }

    #[test]
    fn component_split_must_match() {
        let text = r#"{
            "ambient": 2,
            "center": {"generators": ["x1", "x2"], "component0": ["x1"]},
            "point": {"base": [0, 0], "direction": [1, 1]}
        }"#;
        match scene_from_str(text) {
            Err(Error::Scene { pointer, .. }) => assert_eq!(pointer, "/center/component0"),
            other => panic!("expected scene error, got {other:?}"),
        }
    }
}
