#![allow(dead_code)]

use tabenc::dataset::{split, DataTable, SplitSpec};
use tabenc::encoders::{EncodedTable, EncoderSpec, TableEncoder};
use tabenc_nn::Rng;

/// Two categorical columns; the class is `pos` iff the level indices sum to
/// at least `cut`. With `levels` classes the target is the sum modulo it.
pub fn toy_table(n: usize, classes: usize, seed: u64) -> DataTable {
    let mut rng = Rng::new(seed);
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let i = rng.below(5);
        let j = rng.below(4);
        a.push(format!("a{i}"));
        b.push(format!("b{j}"));
        y.push(if classes == 2 {
            (if i + j >= 4 { "pos" } else { "neg" }).to_string()
        } else {
            format!("k{}", (i + j) % classes)
        });
    }
    DataTable::new(vec!["a".into(), "b".into(), "y".into()], vec![a, b, y], "y").unwrap()
}

pub fn encoded(table: &DataTable, spec: &EncoderSpec) -> [EncodedTable; 3] {
    let s = split(table, &SplitSpec::default()).unwrap();
    let enc = TableEncoder::fit(&s.train, spec).unwrap();
    [
        enc.transform(&s.train).unwrap(),
        enc.transform(&s.validation).unwrap(),
        enc.transform(&s.test).unwrap(),
    ]
}

/// Six categorical columns; the class is decided by whether column `c0`
/// sits in its lower half of levels, the rest is noise.
pub fn separable_table(n: usize, seed: u64) -> DataTable {
    let mut rng = Rng::new(seed);
    let mut cols = vec![Vec::new(); 7];
    for _ in 0..n {
        let first = rng.below(6);
        cols[0].push(format!("l{first}"));
        for col in cols.iter_mut().take(6).skip(1) {
            col.push(format!("l{}", rng.below(6)));
        }
        cols[6].push((if first < 3 { "neg" } else { "pos" }).to_string());
    }
    let names = (0..6).map(|i| format!("c{i}")).chain(["y".to_string()]).collect();
    DataTable::new(names, cols, "y").unwrap()
}
