use oscone::numerics::C64;
use pyoscone::{four_by_four, general_matrix, herm_matrix};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[test]
fn four_by_four_checks_shape() {
    let m: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| (4 * i + j) as f64).collect()).collect();
    assert_eq!(four_by_four(&m).unwrap()[2][3], 11.0);
    assert!(four_by_four(&m[..3]).is_err());
    let mut ragged = m.clone();
    ragged[1].pop();
    assert!(four_by_four(&ragged).is_err());
}

#[test]
fn matrices_from_rows() {
    let t = general_matrix(&[vec![c(0.0), c(1.0)], vec![c(0.0), c(0.0)]]).unwrap();
    assert_eq!(t[(0, 1)], c(1.0));
    assert!(herm_matrix(&[vec![c(0.0), c(1.0)], vec![c(0.0), c(0.0)]]).is_err());
    let h = herm_matrix(&[vec![c(2.0), C64::new(0.0, 1.0)], vec![C64::new(0.0, -1.0), c(2.0)]]).unwrap();
    assert_eq!(h.trace(), 4.0);
}
