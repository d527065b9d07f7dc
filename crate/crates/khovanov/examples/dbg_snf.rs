use khovanov::linalg::{check_certificate, smith, Mat};
use khovanov::ring::{coef_int, Ring};
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let t_all = Instant::now();
    for i in 0..500 {
        let rows = rng.gen_range(1..=12usize);
        let cols = rng.gen_range(1..=12usize);
        let mut m = Mat::zero(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                *m.at_mut(r, c) = coef_int(rng.gen_range(-9..=9i64));
            }
        }
        let ring = match rng.gen_range(0..3) {
            0 => Ring::Z,
            1 => Ring::Q,
            _ => Ring::Zp([2, 3, 5][rng.gen_range(0..3)]),
        };
        eprintln!("case {i}: {rows}x{cols} over {ring}");
        let t0 = Instant::now();
        let snf = smith(&m, ring);
        let t_snf = t0.elapsed();
        let t1 = Instant::now();
        assert!(check_certificate(&m, &snf, ring));
        let t_cert = t1.elapsed();
        if t_snf.as_millis() > 100 || t_cert.as_millis() > 100 {
            println!("case {i}: {rows}x{cols} over {ring}: snf {t_snf:?} cert {t_cert:?}");
        }
        if t_all.elapsed().as_secs() > 60 {
            println!("aborting at case {i}");
            break;
        }
    }
    println!("done in {:?}", t_all.elapsed());
}
