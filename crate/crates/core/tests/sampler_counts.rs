mod common;

#[test]
fn incremental_counts_equal_recount() {
    assert_eq!(common::counts::check_random_instances(150), 150 * 20);
}
