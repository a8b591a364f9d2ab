mod common;

use common::identities;

#[test]
fn constant_marks_give_unweighted_k() {
    identities::constant_marks_give_unweighted_k();
}

#[test]
fn constant_marks_stoyan_is_one_and_variogram_fails() {
    identities::constant_marks_stoyan_is_one_and_variogram_fails();
}

#[test]
fn mingling_constant_two_by_two() {
    identities::mingling_constant_two_by_two();
}

#[test]
fn mark_scale_equivariance() {
    identities::mark_scale_equivariance();
}

#[test]
fn differentiation_is_planar_only() {
    identities::differentiation_is_planar_only();
}

#[test]
fn point_order_does_not_matter() {
    identities::point_order_does_not_matter();
}
