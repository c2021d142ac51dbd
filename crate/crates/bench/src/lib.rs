//! Input generators for the benchmarks in `benches/`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rma_core::{Column, Matrix, Relation};

pub const KEYS: usize = 4;

pub fn key_names(prefix: &str) -> Vec<String> {
    (0..KEYS).map(|j| format!("{prefix}{j}")).collect()
}

/// `rows` tuples with a composite integer key named `{prefix}0..{prefix}3`
/// in scrambled order and `width` random float columns `x0..`.
pub fn keyed_relation(prefix: &str, rows: usize, width: usize, seed: u64) -> Relation {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut order: Vec<i64> = (0..rows as i64).collect();
    for i in (1..rows).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut cols: Vec<(String, Column)> = (0..KEYS)
        .map(|j| {
            let div = 10i64.pow(j as u32);
            (
                format!("{prefix}{j}"),
                Column::int(order.iter().map(|v| v / div % 10 + j as i64).collect()),
            )
        })
        .collect();
    // the last key column alone keeps the composite key unique
    cols[KEYS - 1].1 = Column::int(order.clone());
    for j in 0..width {
        cols.push((
            format!("x{j}"),
            Column::float((0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect()),
        ));
    }
    Relation::from_columns(cols).unwrap()
}

/// Random `n`×`n` matrix with a dominant diagonal, so it is well conditioned.
pub fn square(n: usize, seed: u64) -> Matrix {
    let mut rng = StdRng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| rng.gen_range(-1.0..1.0) + if i == j { n as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    Matrix::from_rows(&rows).unwrap()
}
