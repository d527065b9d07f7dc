//! Scan-pipeline homology against the brute-force cube of resolutions, over
//! ℤ and the localizations at 2 and 3, torsion included.

use khovanov::braid::{make_ln, parse_braid, torus_braid, BraidWord, ClosurePlan};
use khovanov::cube::cube_complex;
use khovanov::homology::{bigraded_homology, euler_characteristic};
use khovanov::ring::Ring;
use khovanov::scan::{close_with_basepoints, scan_diagram};

fn corpus() -> Vec<(&'static str, BraidWord)> {
    vec![
        ("unknot (1 strand)", parse_braid("", 1).unwrap()),
        ("unknot (σ₁)", parse_braid("1", 2).unwrap()),
        ("unknot (σ₁⁻¹)", parse_braid("-1", 2).unwrap()),
        ("2-unlink", parse_braid("1 -1", 2).unwrap()),
        ("hopf+", parse_braid("1 1", 2).unwrap()),
        ("hopf-", parse_braid("-1 -1", 2).unwrap()),
        ("trefoil", torus_braid(2, 3)),
        ("mirror trefoil", parse_braid("-1 -1 -1", 2).unwrap()),
        ("figure eight", parse_braid("1 -2 1 -2", 3).unwrap()),
        ("T(2,5)", torus_braid(2, 5)),
        ("T(3,4)", torus_braid(3, 4)),
        ("L2", make_ln(2)),
    ]
}

#[test]
fn scan_equals_cube_no_basepoints() {
    for (name, word) in corpus() {
        let plan = ClosurePlan::new(word);
        for ring in [Ring::Z, Ring::Zp(2), Ring::Zp(3)] {
            let scan_cx = close_with_basepoints(scan_diagram(&plan, ring));
            let cube_cx = cube_complex(&plan, ring, 12).unwrap();
            let a = bigraded_homology(&scan_cx);
            let b = bigraded_homology(&cube_cx);
            assert_eq!(a, b, "{name} over {ring}:\nscan:\n{a}\ncube:\n{b}");
        }
    }
}

#[test]
fn scan_equals_cube_with_basepoints() {
    for (name, word) in corpus() {
        let comps = word.closure_components();
        let mut plan = ClosurePlan::new(word);
        // one basepoint per component, up to two, on the last strand of each
        for comp in comps.iter().take(2) {
            plan.add_basepoint(*comp.last().unwrap()).unwrap();
        }
        for ring in [Ring::Z, Ring::Zp(3)] {
            let scan_cx = close_with_basepoints(scan_diagram(&plan, ring));
            let cube_cx = cube_complex(&plan, ring, 12).unwrap();
            assert_eq!(
                bigraded_homology(&scan_cx),
                bigraded_homology(&cube_cx),
                "{name} over {ring} with basepoints"
            );
        }
    }
}

#[test]
fn jones_polynomial_invariance() {
    // the graded Euler characteristic only depends on the link: the trefoil
    // from σ₁³ and from the compiled T(2,3) expression agree
    let a = close_with_basepoints(scan_diagram(
        &ClosurePlan::new(parse_braid("1 1 1", 2).unwrap()),
        Ring::Z,
    ));
    let expr = khovanov::braid::parse_expression("T(2,3)").unwrap();
    let plan = khovanov::braid::compile(&expr).unwrap();
    let b = close_with_basepoints(scan_diagram(&plan, Ring::Z));
    assert_eq!(
        euler_characteristic(&bigraded_homology(&a)).to_string(),
        euler_characteristic(&bigraded_homology(&b)).to_string()
    );
    assert_eq!(
        euler_characteristic(&bigraded_homology(&a)).to_string(),
        "q + q^3 + q^5 - q^9"
    );
}

#[test]
fn basepoint_position_invariance_up_to_homotopy() {
    // moving the trefoil's basepoint to the other arc keeps both the
    // homology and the mapping-cone homology of the X action
    let mut p0 = ClosurePlan::new(parse_braid("1 1 1", 2).unwrap());
    p0.add_basepoint(0).unwrap();
    let mut p1 = ClosurePlan::new(parse_braid("1 1 1", 2).unwrap());
    p1.add_basepoint(1).unwrap();
    let a = close_with_basepoints(scan_diagram(&p0, Ring::Z));
    let b = close_with_basepoints(scan_diagram(&p1, Ring::Z));
    assert_eq!(bigraded_homology(&a), bigraded_homology(&b));
    let ca = khovanov::homology::mapping_cone_of_action(&a, khovanov::rmod::Side::Left);
    let cb = khovanov::homology::mapping_cone_of_action(&b, khovanov::rmod::Side::Left);
    assert_eq!(bigraded_homology(&ca), bigraded_homology(&cb));
}

#[test]
fn unlink_table() {
    // B[2: 1 -1] closes to the 2-component unlink: Z² at (0,0), Z at (0,±2)
    let plan = ClosurePlan::new(parse_braid("1 -1", 2).unwrap());
    let cx = close_with_basepoints(scan_diagram(&plan, Ring::Z));
    let t = bigraded_homology(&cx);
    assert_eq!(t.group(0, 0).map(|g| g.free), Some(2));
    assert_eq!(t.group(0, 2).map(|g| g.free), Some(1));
    assert_eq!(t.group(0, -2).map(|g| g.free), Some(1));
    assert_eq!(t.groups.len(), 3);
}
