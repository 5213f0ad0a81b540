#![allow(dead_code)]

pub mod tracer;

use flatcount_core::PermutationPair;

pub const H2: &str = "A B C D\nD C B A";
pub const H11: &str = "A B C D E\nD C B E A";

pub fn pair(text: &str) -> PermutationPair {
    PermutationPair::parse(text).expect("valid permutation").1
}
