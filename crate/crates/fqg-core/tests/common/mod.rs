#![allow(dead_code)]

use fqg_core::linalg::CMat;
use fqg_core::{Category, QGParams};

pub fn cat3(max_level: usize) -> Category {
    Category::new(QGParams::identity(3).unwrap(), max_level)
}

pub fn sym4(max_level: usize) -> Category {
    Category::new(QGParams::symplectic(4).unwrap(), max_level)
}

/// `Σ_{a,b} v[(a, b) ↦ (b, a)]`: reorders `H_n ⊗ H_k` rows as `H_k ⊗ H_n`.
pub fn swap_rows(v: &CMat, da: usize, db: usize) -> CMat {
    faer::Mat::from_fn(v.nrows(), v.ncols(), |r, c| {
        let (b, a) = (r / da, r % da);
        v[(a * db + b, c)]
    })
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
