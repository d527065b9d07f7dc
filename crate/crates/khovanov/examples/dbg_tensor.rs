use khovanov::ring::Ring;
use khovanov::rmod::{expand, reduce_equivariant, tensor_over_r, PresTag, RPresentation};

fn main() {
    for (n, m) in [(1i64, 1i64), (2, 3), (-2, 3)] {
        let prod = tensor_over_r(
            &expand(&RPresentation::new(PresTag::C(n)), Ring::Z),
            &expand(&RPresentation::new(PresTag::C(m)), Ring::Z),
        )
        .unwrap();
        let red = reduce_equivariant(&prod);
        println!("== C({n}) ⊗ C({m}) reduced:");
        let decomp = red.decomp.as_ref().unwrap();
        for (i, sums) in decomp.iter().enumerate() {
            println!("  degree {}: {:?}", red.min_h + i as i32, sums.iter().map(|s| format!("{s}")).collect::<Vec<_>>());
        }
        for (i, d) in red.diffs.iter().enumerate() {
            println!("  d[{}] entries: {:?}", red.min_h + i as i32,
                d.entries.iter().map(|((r,c),v)| format!("({r},{c})={v}")).collect::<Vec<_>>());
        }
    }
}
