mod common;

use common::collapse;

#[test]
fn k_function() {
    collapse::k_function();
}

#[test]
fn pair_correlation() {
    collapse::pair_correlation();
}

#[test]
fn nearest_neighbour_and_empty_space() {
    collapse::nearest_neighbour_and_empty_space();
}

#[test]
fn mark_correlations() {
    collapse::mark_correlations();
}

#[test]
fn mark_weighted_k() {
    collapse::mark_weighted_k();
}

#[test]
fn type_statistics() {
    collapse::type_statistics();
}
