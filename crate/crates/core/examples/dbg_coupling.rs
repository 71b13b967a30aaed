use percolab::inference::experiments::coupling::*;
fn main() {
    let params = CouplingTestParams {
        eta: 2.0, delta: 4.0, eps: 10.0,
        outside_annulus: (7.0, 9.0),
        target_accepted: 400, max_raw: 20_000, seed: 5,
        region_half_width: 32, min_acceptance_rate: 1e-4,
    };
    let report = coupling_test(&params).unwrap();
    println!("{report:#?}");
}
