//! Acceptance gate. One test per criterion; each prints a single
//! PASS line when it holds (run with --nocapture to see them).

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use sprayforge::blowup::{build_chart, Center, EPoint};
use sprayforge::groebner::Budget;
use sprayforge::ideal::{monomials_up_to, Ideal};
use sprayforge::linalg::{jacobian_at, Mat};
use sprayforge::mpoly::MPoly;
use sprayforge::parse::{parse_poly, VarTable};
use sprayforge::rat::{parse_rat, rat, Rat};
use sprayforge::report::{execute, report_value, Command};
use sprayforge::sample::SeedCtx;
use sprayforge::scene::scene_from_str;
use sprayforge::spray1::{
    assemble_flow, kernel_spanning_family, lift_flow_spray, spray_derivative, LiftedFlowSpray,
};
use sprayforge::spray2::{hypersurface_retract, jelonek_embed, section_identity, type2_context};

fn bud() -> Budget {
    Budget::default()
}

fn pp(src: &str, table: &VarTable) -> MPoly {
    parse_poly(src, table).unwrap()
}

fn pr(src: &str) -> Rat {
    parse_rat(src).unwrap()
}

fn line_center() -> Center {
    let t = VarTable::ambient(3);
    Center::new(3, vec![pp("x1", &t), pp("x2", &t)]).unwrap()
}

fn line_scene_json(seed: u64) -> String {
    format!(
        r#"{{
            "ambient": 3,
            "center": {{"generators": ["x1", "x2"]}},
            "point": {{"base": [0, 0, 0], "direction": [1, 1, 0]}},
            "seed": {seed}
        }}"#
    )
}

#[test]
fn criterion_1_worked_line_example() {
    let t0 = Instant::now();
    let center = line_center();
    let chart = build_chart(&center, 2).unwrap();
    let b = EPoint::new(vec![rat(0); 3], vec![rat(1), rat(1), rat(0)]);
    // projection onto (x1, x3), flow direction e2, slowdown h(y) = y1
    let tau = Mat::from_int_rows(&[vec![1, 0, 0], vec![0, 0, 1]]);
    let zeta = vec![rat(0), rat(1), rat(0)];
    let h = MPoly::var(2, 0);
    let flow = assemble_flow(&center, tau, zeta, h, &bud()).unwrap();
    let ft = VarTable::spray(3, 0);
    let expect_map = vec![pp("x1", &ft), pp("x2 + t*x1", &ft), pp("x3", &ft)];
    assert_eq!(flow.map(), &expect_map[..], "flow map");
    let xi = vec![rat(1), rat(1), rat(0), rat(0)];
    let spray =
        lift_flow_spray(&flow, &chart, &b, Some(xi), &SeedCtx::new(0), &bud()).unwrap();
    let st = chart.spray_table();
    let expect_lambda = vec![pp("l1", &st), pp("1 + t*l1", &st)];
    assert_eq!(spray.lambda, expect_lambda, "lifted fiber components");
    let d = spray_derivative(&spray).unwrap();
    assert_eq!(d.homogeneous, vec![rat(0), rat(1)], "homogeneous derivative");
    assert_eq!(d.affine, vec![rat(-1)], "affine chart derivative");
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!("criterion 1: PASS — worked line example reproduced exactly in {elapsed:?}");
}

#[test]
fn criterion_2_point_example() {
    let t = VarTable::ambient(2);
    let center = Center::new(2, vec![pp("x1", &t), pp("x2", &t)]).unwrap();
    let chart = build_chart(&center, 2).unwrap();
    let b = EPoint::new(vec![rat(0); 2], vec![rat(1), rat(1)]);
    let tau = Mat::from_int_rows(&[vec![1, 1]]);
    let zeta = vec![rat(1), rat(-1)];
    let h = MPoly::var(1, 0);
    let flow = assemble_flow(&center, tau, zeta, h, &bud()).unwrap();
    let xi = vec![rat(1), rat(1), rat(0)];
    let spray =
        lift_flow_spray(&flow, &chart, &b, Some(xi), &SeedCtx::new(0), &bud()).unwrap();
    let d = spray_derivative(&spray).unwrap();
    assert_eq!(d.c, rat(2), "closed-form scale");
    assert_eq!(d.homogeneous, vec![rat(2), rat(-2)], "c * zeta");
    assert_eq!(
        d.symbolic, d.homogeneous,
        "symbolic d/dt route must agree exactly"
    );
    assert_eq!(d.affine, vec![rat(4)], "affine chart derivative");
    println!("criterion 2: PASS — point example closed-form and symbolic derivatives agree");
}

#[test]
fn criterion_3_full_domination_certificate() {
    let t0 = Instant::now();
    let scene = scene_from_str(&line_scene_json(0)).unwrap();
    assert_eq!(scene.retries, 5);
    let report = execute(&scene, Command::Certify).unwrap();
    let cert = report.certificate.as_ref().unwrap();
    assert_eq!(cert.rank, 3, "rank");
    assert_eq!(cert.target_dim, 3);
    assert_eq!(report.verdict, "dominating");
    assert!(
        cert.vectors.iter().any(|v| v.provenance.starts_with("flow")),
        "needs a fiber vector from the flow family"
    );
    assert!(
        cert.vectors.iter().any(|v| v.provenance.starts_with("image")),
        "needs image vectors from the second family"
    );
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("criterion 3: PASS — rank-3 certificate for the line scene in {elapsed:?}");
}

/// Time-zero section and blow-down compatibility of a lifted flow spray,
/// as normal forms modulo the chart relations.
fn assert_flow_spray_identities(s: &LiftedFlowSpray) {
    let chart = &s.chart;
    let n = chart.ambient();
    let m = chart.nvars();
    let nv = 1 + m;
    let chart_embed: Vec<usize> = (1..=m).collect();
    let rel = Ideal::new(
        nv,
        chart
            .relations()
            .iter()
            .map(|r| r.embed(nv, &chart_embed))
            .collect(),
    );
    let zero = MPoly::zero(nv);
    for i in 0..n {
        let at0 = s.fx[i].subst_var(0, &zero);
        let delta = &at0 - &MPoly::var(nv, 1 + i);
        assert!(
            rel.normal_form(&delta, &bud()).unwrap().is_zero(),
            "section identity, ambient component {i}"
        );
    }
    let r = chart.center.r();
    let j = chart.dist;
    for i in 1..=r {
        let at0 = s.lambda[i - 1].subst_var(0, &zero);
        let expect = if i == j {
            MPoly::one(nv)
        } else {
            MPoly::var(nv, 1 + chart.lambda_var(i).unwrap())
        };
        let delta = &at0 - &expect;
        assert!(
            rel.normal_form(&delta, &bud()).unwrap().is_zero(),
            "section identity, fiber component {i}"
        );
    }
    // blow-down of the lift equals the flow of the blow-down
    let flow_embed: Vec<usize> = (0..=n).collect();
    for i in 0..n {
        let direct = s.flow.map()[i].embed(nv, &flow_embed);
        let delta = &s.fx[i] - &direct;
        assert!(
            rel.normal_form(&delta, &bud()).unwrap().is_zero(),
            "projection identity, component {i}"
        );
    }
    // and the fiber components track it: u_i(f(x)) = lambda_i * u_j(x)
    let d = chart.exceptional_fn().embed(nv, &chart_embed);
    for i in 1..=r {
        let ui_f = chart.center.gens()[i - 1].substitute(&s.fx);
        let delta = &ui_f - &(&s.lambda[i - 1] * &d);
        assert!(
            rel.normal_form(&delta, &bud()).unwrap().is_zero(),
            "lifting identity, generator {i}"
        );
    }
}

#[test]
fn criterion_4_section_and_projection_identities() {
    // the two pinned sprays
    let center3 = line_center();
    let chart3 = build_chart(&center3, 2).unwrap();
    let b3 = EPoint::new(vec![rat(0); 3], vec![rat(1), rat(1), rat(0)]);
    let tau = Mat::from_int_rows(&[vec![1, 0, 0], vec![0, 0, 1]]);
    let flow = assemble_flow(
        &center3,
        tau,
        vec![rat(0), rat(1), rat(0)],
        MPoly::var(2, 0),
        &bud(),
    )
    .unwrap();
    let s1 = lift_flow_spray(
        &flow,
        &chart3,
        &b3,
        Some(vec![rat(1), rat(1), rat(0), rat(0)]),
        &SeedCtx::new(0),
        &bud(),
    )
    .unwrap();
    assert_flow_spray_identities(&s1);

    let t2 = VarTable::ambient(2);
    let center2 = Center::new(2, vec![pp("x1", &t2), pp("x2", &t2)]).unwrap();
    let chart2 = build_chart(&center2, 2).unwrap();
    let b2 = EPoint::new(vec![rat(0); 2], vec![rat(1), rat(1)]);
    let tau2 = Mat::from_int_rows(&[vec![1, 1]]);
    let flow2 = assemble_flow(
        &center2,
        tau2,
        vec![rat(1), rat(-1)],
        MPoly::var(1, 0),
        &bud(),
    )
    .unwrap();
    let s2 = lift_flow_spray(
        &flow2,
        &chart2,
        &b2,
        Some(vec![rat(1), rat(1), rat(0)]),
        &SeedCtx::new(0),
        &bud(),
    )
    .unwrap();
    assert_flow_spray_identities(&s2);

    // every spray that the rank-3 certificate is built from
    let seed = SeedCtx::new(0);
    let fam = kernel_spanning_family(&chart3, &b3, &seed.child("type1"), 5, &bud()).unwrap();
    assert!(!fam.sprays.is_empty());
    for s in &fam.sprays {
        assert_flow_spray_identities(s);
    }
    let retract = hypersurface_retract(
        &center3,
        &b3.base,
        2,
        &seed.child("retract"),
        5,
        &bud(),
    )
    .unwrap();
    let ctx = type2_context(&chart3, &b3, &retract, &seed.child("type2"), 5, &bud()).unwrap();
    section_identity(&ctx, &bud()).unwrap();
    println!("criterion 4: PASS — section and projection identities hold as normal forms");
}

#[test]
fn criterion_5_gcd_reduction_invariance() {
    let unreduced = r#"{
        "ambient": 3,
        "center": {"generators": ["x1^2", "x1*x2"]},
        "point": {"base": [0, 0, 0], "direction": [1, 1, 0]},
        "seed": 0
    }"#;
    let sa = scene_from_str(unreduced).unwrap();
    let sb = scene_from_str(&line_scene_json(0)).unwrap();
    let ra = report_value(&execute(&sa, Command::Certify).unwrap());
    let rb = report_value(&execute(&sb, Command::Certify).unwrap());
    let rel_a = serde_json::to_string(&ra["result"]["chart"]["relations"]).unwrap();
    let rel_b = serde_json::to_string(&rb["result"]["chart"]["relations"]).unwrap();
    assert_eq!(rel_a, rel_b, "chart relations must be byte-identical");
    let cert_a = serde_json::to_string(&ra["result"]["certificate"]).unwrap();
    let cert_b = serde_json::to_string(&rb["result"]["certificate"]).unwrap();
    assert_eq!(cert_a, cert_b, "certificates must be identical");
    assert_eq!(ra["verdict"], rb["verdict"]);
    assert_eq!(ra["verdict"], serde_json::json!("dominating"));
    println!("criterion 5: PASS — common-factor centers give identical charts and certificates");
}

#[test]
fn criterion_6_embedding_algorithm() {
    let t = VarTable::ambient(2);
    let hyp = pp("x2^2 + x1*x2 - 1", &t);
    let b_img = vec![rat(0), rat(1)];
    let e = jelonek_embed(&hyp, &b_img, None, &SeedCtx::new(0), 5, &bud()).unwrap();
    assert!(e.shear.iter().all(|c| c == &rat(0)));
    assert!(e.translation.iter().all(|c| c == &rat(0)));
    assert_eq!(e.h, MPoly::one(1));
    assert_eq!(e.gamma_fwd(&b_img).unwrap(), vec![rat(0), rat(1)]);
    assert_eq!(
        e.gamma_fwd(&[pr("3/2"), pr("1/2")]).unwrap(),
        vec![rat(3), pr("1/2")]
    );
    // 25 distinct seeded points of the curve, via x1 = (1 - s^2)/s
    let mut params: Vec<Rat> = Vec::new();
    for v in SeedCtx::new(6).ints(80, 40) {
        if v != 0 {
            let s = rat(v);
            if !params.contains(&s) {
                params.push(s);
            }
        }
        if params.len() == 25 {
            break;
        }
    }
    assert_eq!(params.len(), 25);
    for s in &params {
        let x = vec![(rat(1) - s * s) / s, s.clone()];
        assert_eq!(hyp.eval(&x), rat(0));
        let z = e.gamma_fwd(&x).unwrap();
        assert_eq!(e.image_gen.eval(&z), rat(0), "image ideal at gamma(x)");
        assert!(e.round_trip(&x).unwrap(), "round trip at {x:?}");
    }
    println!("criterion 6: PASS — embedding matches hand values and round-trips 25 points");
}

#[test]
fn criterion_7_dominability_lifting() {
    let text = r#"{
        "ambient": 2,
        "center": {"generators": ["x1", "x2"]},
        "point": {"base": [0, 0], "direction": [1, 0]},
        "map": ["x1", "x2 + x1^2"],
        "seed": 0
    }"#;
    let scene = scene_from_str(text).unwrap();
    let report = execute(&scene, Command::DominateLift).unwrap();
    assert_eq!(report.verdict, "dominating");
    let cert = report.certificate.as_ref().unwrap();
    for dist in 1..=2 {
        let name = format!("chart {dist} lift determinant");
        let check = cert
            .checks
            .iter()
            .find(|c| c.name == name)
            .unwrap_or_else(|| panic!("missing check {name}"));
        assert_eq!(check.status.as_str(), "pass", "{name}");
        let detail = check.detail.as_ref().unwrap();
        assert!(
            detail.contains("constant"),
            "chart {dist} determinant must be invertible over the whole fiber, got {detail}"
        );
    }
    println!("criterion 7: PASS — lift has invertible chart Jacobians over the whole fiber");
}

fn seeded_poly(seed: &SeedCtx, nvars: usize, deg: u32, nterms: usize) -> MPoly {
    let mons = monomials_up_to(nvars, deg);
    let idx = seed.child("index").ints(nterms, 1 << 20);
    let coef = seed.child("coeff").ints(nterms, 4);
    let mut p = MPoly::zero(nvars);
    for (i, c) in idx.into_iter().zip(coef) {
        if c != 0 {
            let m = mons[(i.rem_euclid(mons.len() as i64)) as usize].clone();
            p = &p + &MPoly::monomial(nvars, m, rat(c));
        }
    }
    if p.is_zero() {
        MPoly::var(nvars, 0)
    } else {
        p
    }
}

/// Brute-force ideal membership: look for a combination sum m_i g_i = p
/// with deg(m_i g_i) <= window by rational linear algebra, with no
/// reduction machinery involved.
fn brute_member(p: &MPoly, gens: &[MPoly], window: u32) -> bool {
    let nvars = p.nvars();
    let basis = monomials_up_to(nvars, window);
    let index: BTreeMap<Vec<u32>, usize> = basis
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    let coords = |q: &MPoly| -> Option<Vec<Rat>> {
        let mut v = vec![rat(0); basis.len()];
        for (e, c) in q.terms() {
            v[*index.get(e)?] = c.clone();
        }
        Some(v)
    };
    let target = match coords(p) {
        Some(v) => v,
        None => return false,
    };
    let mut cols: Vec<Vec<Rat>> = Vec::new();
    for g in gens {
        let gd = g.total_degree();
        if gd > window {
            continue;
        }
        for m in monomials_up_to(nvars, window - gd) {
            let prod = g.mul_monomial(&m, &rat(1));
            cols.push(coords(&prod).expect("product stays inside the window"));
        }
    }
    if cols.is_empty() {
        return p.is_zero();
    }
    let rows: Vec<Vec<Rat>> = (0..basis.len())
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    Mat::from_rows(rows).solve(&target).is_some()
}

#[test]
fn criterion_8_oracle_suite() {
    // membership: the reduction engine vs plain linear algebra
    let mut member_cases = 0;
    let mut nonmember_cases = 0;
    for k in 0..50u32 {
        let seed = SeedCtx::new(88).attempt("member", k);
        let nvars = 2 + (k as usize % 2);
        let nonconstant = |p: MPoly| {
            if p.is_constant() {
                &p + &MPoly::var(nvars, 0)
            } else {
                p
            }
        };
        let g1 = nonconstant(seeded_poly(&seed.child("g1"), nvars, 2, 3));
        let g2 = nonconstant(seeded_poly(&seed.child("g2"), nvars, 2, 3));
        let ideal = Ideal::new(nvars, vec![g1.clone(), g2.clone()]);
        let m1 = seeded_poly(&seed.child("m1"), nvars, 2, 2);
        let m2 = seeded_poly(&seed.child("m2"), nvars, 2, 2);
        let member = &(&m1 * &g1) + &(&m2 * &g2);
        assert!(
            ideal.normal_form(&member, &bud()).unwrap().is_zero(),
            "case {k}: constructed member must reduce to zero"
        );
        assert!(
            brute_member(&member, &[g1.clone(), g2.clone()], 4),
            "case {k}: brute-force search must find the combination"
        );
        member_cases += 1;
        let probe = seeded_poly(&seed.child("probe"), nvars, 4, 4);
        if !ideal.normal_form(&probe, &bud()).unwrap().is_zero() {
            assert!(
                !brute_member(&probe, &[g1, g2], 5),
                "case {k}: nonzero normal form but a combination exists"
            );
            nonmember_cases += 1;
        }
    }
    assert_eq!(member_cases, 50);
    assert!(nonmember_cases >= 15, "got {nonmember_cases}");

    // elimination soundness: projected sample points satisfy the output
    type PointFn = fn(&[Rat]) -> Vec<Rat>;
    let cases: Vec<(usize, Vec<&str>, Vec<usize>, usize, PointFn)> = vec![
        // twisted cubic graph: keep the y's
        (
            4,
            vec!["x2 - x1^2", "x3 - x1^3", "x4 - x1*x1"],
            vec![1, 2, 3],
            1,
            |v| {
                let t = &v[0];
                vec![t.clone(), t * t, &(t * t) * t, t * t]
            },
        ),
        // rational circle: y1 (1 + t^2) = 1 - t^2, y2 (1 + t^2) = 2 t
        (
            3,
            vec!["x2*(1 + x1^2) - (1 - x1^2)", "x3*(1 + x1^2) - 2*x1"],
            vec![1, 2],
            1,
            |v| {
                let t = &v[0];
                let den = rat(1) + t * t;
                vec![
                    t.clone(),
                    (rat(1) - t * t) / &den,
                    (rat(2) * t) / &den,
                ]
            },
        ),
        // two-parameter graph
        (
            5,
            vec!["x3 - x1*x2", "x4 - x1^2", "x5 - x2^2"],
            vec![2, 3, 4],
            2,
            |v| {
                let (s, t) = (&v[0], &v[1]);
                vec![s.clone(), t.clone(), s * t, s * s, t * t]
            },
        ),
    ];
    for (case_no, (nv, gens_src, keep, nparams, point)) in cases.into_iter().enumerate() {
        let t = VarTable::ambient(nv);
        let gens: Vec<MPoly> = gens_src.iter().map(|s| pp(s, &t)).collect();
        let ideal = Ideal::new(nv, gens);
        let elim = ideal.eliminate(&keep, &bud()).unwrap();
        assert!(
            !elim.gens().is_empty(),
            "case {case_no}: elimination must find a relation"
        );
        for trial in 0..20u32 {
            let vals: Vec<Rat> = SeedCtx::new(31)
                .attempt(&format!("elim{case_no}"), trial)
                .ints(nparams, 9)
                .into_iter()
                .map(rat)
                .collect();
            let full = point(&vals);
            for g in ideal.gens() {
                assert_eq!(g.eval(&full), rat(0), "sample point must lie on the source");
            }
            let projected: Vec<Rat> = keep.iter().map(|&i| full[i].clone()).collect();
            for g in elim.gens() {
                assert_eq!(
                    g.eval(&projected),
                    rat(0),
                    "case {case_no}: eliminated relation fails at a witnessed point"
                );
            }
        }
    }

    // jacobian entries vs an epsilon substitution that never differentiates
    for k in 0..20u32 {
        let seed = SeedCtx::new(59).attempt("jac", k);
        let p = seeded_poly(&seed.child("poly"), 3, 4, 5);
        let a: Vec<Rat> = seed
            .child("point")
            .ints(3, 6)
            .into_iter()
            .map(|v| pr(&format!("{v}/2")))
            .collect();
        let jac = jacobian_at(&[p.clone()], &a);
        for i in 0..3 {
            let args: Vec<MPoly> = (0..3)
                .map(|j| {
                    if j == i {
                        MPoly::affine(1, &[rat(1)], a[i].clone())
                    } else {
                        MPoly::constant(1, a[j].clone())
                    }
                })
                .collect();
            let univ = p.substitute(&args);
            let slope = univ.coeff(&[1]);
            assert_eq!(*jac.get(0, i), slope, "poly {k}, variable {i}");
        }
    }
    println!("criterion 8: PASS — membership, elimination, and jacobian oracles agree");
}

#[test]
fn criterion_9_byte_identical_reports() {
    let dir = std::env::temp_dir().join(format!("sprayforge-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scene9.json");
    std::fs::write(&path, line_scene_json(7)).unwrap();
    let run = || {
        std::process::Command::new(env!("CARGO_BIN_EXE_sprayforge"))
            .args(["certify", "--scene"])
            .arg(&path)
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "reports must be byte-identical");
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"verdict\": \"dominating\""));
    std::fs::remove_dir_all(&dir).ok();
    println!("criterion 9: PASS — identical scene and seed give byte-identical reports");
}
