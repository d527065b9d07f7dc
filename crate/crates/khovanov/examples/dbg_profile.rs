use khovanov::braid::{compile, parse_expression};
use khovanov::ring::Ring;
use khovanov::scan::{close_with_basepoints, scan_diagram_logged};
use std::time::Instant;

fn main() {
    let expr = parse_expression("L3 # T(2,3)").unwrap();
    let plan = compile(&expr).unwrap();
    let t0 = Instant::now();
    let mut last = Instant::now();
    let state = scan_diagram_logged(&plan, Ring::Z, |k, st| {
        println!(
            "crossing {:>2}: {:>6.2?}  objects {:?}",
            k + 1,
            last.elapsed(),
            st.complex.object_counts()
        );
        last = Instant::now();
    });
    println!("scan total {:?}", t0.elapsed());
    let t1 = Instant::now();
    let cx = close_with_basepoints(state);
    println!("close {:?}, rank {}", t1.elapsed(), cx.total_rank());
    let t2 = Instant::now();
    let table = khovanov::homology::bigraded_homology(&cx);
    println!("homology {:?}, groups {}", t2.elapsed(), table.groups.len());
}
