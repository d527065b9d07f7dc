use khovanov::braid::{make_ln, ClosurePlan};
use khovanov::homology::bigraded_homology;
use khovanov::ring::Ring;
use khovanov::rmod::{match_summand, reduce_equivariant, PresTag, RPresentation};
use khovanov::scan::{close_with_basepoints, scan_diagram};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let word = make_ln(3);
    let mut plan = ClosurePlan::new(word);
    // left action = basepoint on the T(3,4) component {0,1,2}, right action =
    // basepoint on the unknot component {3}
    plan.add_basepoint(2).unwrap();
    plan.add_basepoint(3).unwrap();
    let state = scan_diagram(&plan, Ring::Zp(3));
    println!("scan done in {:?}; counts {:?}", t0.elapsed(), state.complex.object_counts());
    let cx = close_with_basepoints(state);
    println!("closed: rank {} in degrees {}..{}", cx.total_rank(), cx.min_h, cx.max_h());
    let t1 = Instant::now();
    let red = reduce_equivariant(&cx);
    println!("reduced in {:?}: rank {}", t1.elapsed(), red.total_rank());
    if let Some(d) = &red.decomp {
        for (i, sums) in d.iter().enumerate() {
            let names: Vec<String> = sums.iter().map(|s| format!("{s}")).collect();
            println!("  deg {}: {}", red.min_h + i as i32, names.join(" "));
        }
    }
    for (i, dmat) in red.diffs.iter().enumerate() {
        println!("  d[{}]: {} entries", red.min_h + i as i32, dmat.entries.len());
    }
    // print the top entry block
    let top = red.max_h();
    if red.dim(top) > 0 && red.dim(top - 1) > 0 {
        let d = red.diff(top - 1).unwrap();
        println!("top block: {:?}", d.entries);
    }
    let pres = RPresentation::shifted(PresTag::C(3), 8, 25);
    match match_summand(&red, &pres, (8, 9)) {
        Ok(Some(_)) => println!("MATCH C(3)[8]{{25}}: witness found"),
        Ok(None) => println!("NO WITNESS for C(3)[8]{{25}}"),
        Err(e) => println!("MATCH ERROR: {e}"),
    }
    let t = bigraded_homology(&red);
    for h in [8, 9] {
        for q in [22, 24, 26, 28] {
            if let Some(g) = t.group(h, q) {
                println!("H^{h} q={q}: free {} torsion {:?}", g.free, g.torsion);
            }
        }
    }
    println!("total {:?}", t0.elapsed());
}
