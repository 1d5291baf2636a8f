//! Jaro and Jaro-Winkler similarity for a few string pairs.

use tabenc::encoders::{jaro_similarity, jaro_winkler_similarity};

fn main() {
    for (a, b) in [("MARTHA", "MARHTA"), ("DIXON", "DICKSONX"), ("bin_01", "bin_02"), ("abc", "xyz")] {
        println!(
            "{a:<8} {b:<9} jaro {:.4}  winkler {:.4}",
            jaro_similarity(a, b),
            jaro_winkler_similarity(a, b)
        );
    }
}
