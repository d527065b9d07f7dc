use khovanov::linalg::{smith, Mat};
use khovanov::ring::{coef_int, Ring};
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    for i in 0..=18 {
        let rows = rng.gen_range(1..=12usize);
        let cols = rng.gen_range(1..=12usize);
        let mut m = Mat::zero(rows, cols);
        let mut dump = Vec::new();
        for r in 0..rows {
            let mut row = Vec::new();
            for c in 0..cols {
                let v = rng.gen_range(-9..=9i64);
                *m.at_mut(r, c) = coef_int(v);
                row.push(v);
            }
            dump.push(row);
        }
        let ring = match rng.gen_range(0..3) {
            0 => Ring::Z,
            1 => Ring::Q,
            _ => Ring::Zp([2, 3, 5][rng.gen_range(0..3)]),
        };
        if i == 18 {
            println!("matrix = {dump:?} over {ring}");
            let snf = smith(&m, ring);
            println!("rank {}", snf.rank);
        }
    }
}
