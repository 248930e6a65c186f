//! Exact-arithmetic helpers for the dyadic covering checks.

use kslab::coverings::DyadicCube;
use kslab::grid::{Point, Region};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn q(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

/// Exact membership for the convex pieces used below.
pub fn contains_exact(r: &Region, p: &[BigRational; 3]) -> bool {
    let d2 = |c: &Point| (0..3).fold(BigRational::zero(), |acc, a| {
        let d = &p[a] - q(c[a]);
        acc + &d * &d
    });
    match r {
        Region::Ball { center, radius } => d2(center) < q(*radius) * q(*radius),
        Region::ClosedBall { center, radius } => d2(center) <= q(*radius) * q(*radius),
        Region::Cube { center, side } => {
            (0..3).all(|a| (&p[a] - q(center[a])).abs() <= q(*side) / BigRational::from_integer(2.into()))
        }
        Region::HalfSpace { normal, offset, strict } => {
            let v = (0..3).fold(BigRational::zero(), |acc, a| acc + q(normal[a]) * &p[a]);
            if *strict {
                v < q(*offset)
            } else {
                v <= q(*offset)
            }
        }
        Region::Intersection(a, b) => contains_exact(a, p) && contains_exact(b, p),
        _ => unreachable!(),
    }
}

pub fn corners(c: &DyadicCube, dim: usize) -> Vec<[BigRational; 3]> {
    let half = BigRational::new(BigInt::one(), 2.into());
    let side = BigRational::new(BigInt::one(), BigInt::one() << c.k as usize);
    (0..1u32 << dim)
        .map(|bits| {
            let mut p = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
            for a in 0..dim {
                let i = c.coords[a] + ((bits >> a) & 1) as u64;
                p[a] = BigRational::from_integer(BigInt::from(i)) * &side - &half;
            }
            p
        })
        .collect()
}

pub fn random_convex_region(rng: &mut ChaCha8Rng, dim: usize) -> Region {
    let piece = |rng: &mut ChaCha8Rng| {
        let mut c = [0.0; 3];
        for v in c.iter_mut().take(dim) {
            *v = rng.gen_range(-0.5..0.5);
        }
        match rng.gen_range(0..4) {
            0 => Region::ball(c, rng.gen_range(0.1..0.8)),
            1 => Region::closed_ball(c, rng.gen_range(0.1..0.8)),
            2 => Region::cube(c, rng.gen_range(0.2..1.2)),
            _ => {
                let mut n = [0.0; 3];
                for v in n.iter_mut().take(dim) {
                    *v = rng.gen_range(-1.0..1.0);
                }
                if rng.gen_bool(0.5) {
                    Region::half_space(n, rng.gen_range(-0.2..0.4))
                } else {
                    Region::open_half_space(n, rng.gen_range(-0.2..0.4))
                }
            }
        }
    };
    let mut r = piece(rng);
    for _ in 0..rng.gen_range(0..3) {
        r = r.intersect(piece(rng));
    }
    r
}
