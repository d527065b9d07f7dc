use khovanov::braid::{make_ln, ClosurePlan};
use khovanov::cube::cube_complex;
use khovanov::homology::bigraded_homology;
use khovanov::ring::Ring;
use khovanov::rmod::{match_summand, reduce_equivariant, PresTag, RPresentation};
use khovanov::scan::{close_with_basepoints, scan_diagram};

fn main() {
    let word = make_ln(2); // 7 crossings on 3 strands
    let comps = word.closure_components();
    println!("L2 components: {comps:?}");
    let mut plan = ClosurePlan::new(word);
    plan.add_basepoint(1).unwrap(); // T(2,3) component, last-touched arc
    plan.add_basepoint(2).unwrap(); // unknot component
    // scan route
    let state = scan_diagram(&plan, Ring::Z);
    let cx = close_with_basepoints(state);
    let red = reduce_equivariant(&cx);
    println!("scan-reduced:");
    for (i, sums) in red.decomp.as_ref().unwrap().iter().enumerate() {
        let names: Vec<String> = sums.iter().map(|s| format!("{s}")).collect();
        println!("  deg {}: {}", red.min_h + i as i32, names.join(" "));
    }
    println!("  d[0] = {:?}", red.diffs[0].entries);
    // cube route (independent)
    let cube = cube_complex(&plan, Ring::Z, 12).unwrap();
    let credux = reduce_equivariant(&cube);
    println!("cube-reduced:");
    for (i, sums) in credux.decomp.as_ref().unwrap().iter().enumerate() {
        let names: Vec<String> = sums.iter().map(|s| format!("{s}")).collect();
        println!("  deg {}: {}", credux.min_h + i as i32, names.join(" "));
    }
    println!("  d[0] = {:?}", credux.diffs[0].entries);
    assert_eq!(bigraded_homology(&cx), bigraded_homology(&cube), "homology mismatch");
    println!("homologies agree");
    let e_pres = RPresentation::shifted(PresTag::E, 0, 6);
    println!("scan match E{{6}}: {:?}", match_summand(&red, &e_pres, (0, 1)).map(|w| w.is_some()));
    println!("cube match E{{6}}: {:?}", match_summand(&credux, &e_pres, (0, 1)).map(|w| w.is_some()));
}
