//! Good-point-set initialization: a number-theoretic low-discrepancy point
//! construction used to seed populations more uniformly than random draws.

use std::f64::consts::TAU;

use crate::core::{CoreError, Individual, Population, SearchSpace};

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime p with (p - 3) / 2 > s.
pub fn smallest_prime(s: usize) -> u64 {
    let mut p = 2;
    loop {
        if is_prime(p) && (p as f64 - 3.0) / 2.0 > s as f64 {
            return p;
        }
        p += 1;
    }
}

/// Fractional part in [0, 1), valid for negative arguments.
fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Generators r_i = 2 cos(2 pi i / p) for i = 1..=s with p the smallest
/// admissible prime.
pub fn generators(s: usize) -> Vec<f64> {
    let p = smallest_prime(s) as f64;
    (1..=s).map(|i| 2.0 * (TAU * i as f64 / p).cos()).collect()
}

/// n x s matrix of good points in the unit cube: entry (k, i) is the
/// fractional part of r_i * k for k = 1..=n.
pub fn good_point_set(n: usize, s: usize) -> Vec<Vec<f64>> {
    let r = generators(s);
    (1..=n)
        .map(|k| r.iter().map(|&ri| frac(ri * k as f64)).collect())
        .collect()
}

/// Deterministic population initialization by affine-mapping the good point
/// set into the search box.
pub fn gps_initialize(space: &SearchSpace, n: usize) -> Result<Population, CoreError> {
    if n < 2 {
        return Err(CoreError::PopulationTooSmall { got: n, min: 2 });
    }
    let points = good_point_set(n, space.dim());
    let members = points
        .into_iter()
        .map(|row| {
            Individual::new(
                row.iter()
                    .enumerate()
                    .map(|(i, &u)| space.lower()[i] + u * space.width(i))
                    .collect(),
            )
        })
        .collect();
    Ok(Population { members })
}

/// Centered L2 discrepancy of a point set in the unit cube (Hickernell).
pub fn centered_l2_discrepancy(points: &[Vec<f64>]) -> f64 {
    let n = points.len() as f64;
    let s = points[0].len();
    let mut sum1 = 0.0;
    for p in points {
        let mut prod = 1.0;
        for &u in p {
            let a = (u - 0.5).abs();
            prod *= 1.0 + 0.5 * a - 0.5 * a * a;
        }
        sum1 += prod;
    }
    let mut sum2 = 0.0;
    for p in points {
        for q in points {
            let mut prod = 1.0;
            for i in 0..s {
                let a = (p[i] - 0.5).abs();
                let b = (q[i] - 0.5).abs();
                prod *= 1.0 + 0.5 * a + 0.5 * b - 0.5 * (p[i] - q[i]).abs();
            }
            sum2 += prod;
        }
    }
    ((13.0f64 / 12.0).powi(s as i32) - 2.0 / n * sum1 + sum2 / (n * n)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::RngStream;

    #[test]
    fn smallest_prime_cases() {
        assert_eq!(smallest_prime(1), 7);
        assert_eq!(smallest_prime(3), 11);
        assert_eq!(smallest_prime(10), 29);
    }

    #[test]
    fn single_point_formula() {
        // s=1 -> p=7, r1 = 2 cos(2 pi / 7)
        let pts = good_point_set(1, 1);
        let r1 = 2.0 * (TAU / 7.0).cos();
        assert!((pts[0][0] - frac(r1)).abs() < 1e-12);
        assert!((pts[0][0] - 0.24698).abs() < 1e-5);
    }

    #[test]
    fn points_in_unit_cube() {
        for &(n, s) in &[(5usize, 3usize), (30, 10), (100, 2)] {
            for row in good_point_set(n, s) {
                for v in row {
                    assert!((0.0..1.0).contains(&v));
                }
            }
        }
    }

    #[test]
    fn rows_are_distinct() {
        for &s in &[2usize, 5, 10] {
            let pts = good_point_set(30, s);
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let d: f64 = pts[i]
                        .iter()
                        .zip(&pts[j])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    assert!(d > 1e-9, "rows {i} and {j} coincide at s={s}");
                }
            }
        }
    }

    #[test]
    fn gps_initialize_deterministic_and_bounded() {
        let space = SearchSpace::symmetric(2, -100.0, 100.0).unwrap();
        let a = gps_initialize(&space, 30).unwrap();
        let b = gps_initialize(&space, 30).unwrap();
        assert_eq!(a, b);
        for m in &a.members {
            assert!(space.contains(&m.position));
        }
    }

    #[test]
    fn gps_initialize_unit_box_identity() {
        let space = SearchSpace::symmetric(3, 0.0, 1.0).unwrap();
        let pop = gps_initialize(&space, 7).unwrap();
        let pts = good_point_set(7, 3);
        for (m, row) in pop.members.iter().zip(&pts) {
            assert_eq!(&m.position, row);
        }
    }

    #[test]
    fn gps_initialize_rejects_tiny() {
        let space = SearchSpace::symmetric(2, 0.0, 1.0).unwrap();
        assert!(gps_initialize(&space, 1).is_err());
    }

    #[test]
    fn discrepancy_beats_random_median() {
        let mut wins = 0;
        let reps = 20;
        for rep in 0..reps {
            let s = [2usize, 5, 10][rep % 3];
            let gps_d = centered_l2_discrepancy(&good_point_set(30, s));
            let mut rng = RngStream::new(1000 + rep as u64);
            let mut rand_ds: Vec<f64> = (0..100)
                .map(|_| {
                    let pts: Vec<Vec<f64>> = (0..30)
                        .map(|_| (0..s).map(|_| rng.uniform()).collect())
                        .collect();
                    centered_l2_discrepancy(&pts)
                })
                .collect();
            rand_ds.sort_by(f64::total_cmp);
            let median = 0.5 * (rand_ds[49] + rand_ds[50]);
            if gps_d < median {
                wins += 1;
            }
        }
        assert!(wins >= 18, "gps won only {wins}/{reps}");
    }
}
