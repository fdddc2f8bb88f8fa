mod common;

#[test]
fn series_and_ratfun_ring_axioms() {
    common::ring_axioms(256).unwrap();
}

#[test]
fn reconstruct_round_trip_200() {
    common::reconstruct_round_trips(200).unwrap();
}

#[test]
fn summand_valuation_oracle_500() {
    common::valuation_oracle(500).unwrap();
}

#[test]
fn guess_is_stable_under_larger_bounds() {
    common::guess_stability(9).unwrap();
}

#[test]
fn fig8_block_guess_is_stable() {
    common::fig8_block_guess_stability().unwrap();
}
