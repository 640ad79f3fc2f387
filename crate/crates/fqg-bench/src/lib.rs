//! Fixtures shared by the benchmarks.

use fqg_core::harmonic::trial_rng;
use fqg_core::{BlockElement, Category, QGParams};

/// Identity-parameter category at `N = 3` with every level up to `max_level` prebuilt.
pub fn warm_category(max_level: usize) -> Category {
    let cat = Category::new(QGParams::identity(3).expect("N = 3"), max_level);
    for n in 0..=max_level {
        cat.basis(n).expect("basis within budget");
    }
    cat
}

pub fn element(seed: u64, levels: &[usize], cat: &Category) -> BlockElement {
    BlockElement::random(&mut trial_rng(seed, 0xBE, 0), levels, cat)
}
